import argparse
import traceback

from config import CACHE_SETTINGS, DEFAULT_CONFIG_FILE, DEFAULT_THREADS, EXIT_CODES
from core import quantize
from core.cache_manager import CacheManager
from core.errors import AcceptanceError, ConfigError, PreconditionError, SymbolError
from core.experiment import COMMANDS, ExperimentConfig


def build_parser():
    """
    Buduje parser argumentów wiersza poleceń.

    Returns:
        ArgumentParser: Parser z podkomendami
    """
    parser = argparse.ArgumentParser(
        description="Rachunek magnetycznej kwantyzacji Weyla na siatkach biurkowych."
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Podkomenda do wykonania")
    parser.add_argument(
        "--config",
        default=DEFAULT_CONFIG_FILE,
        help="Ścieżka do pliku konfiguracji (klucz = wartość albo JSON)",
    )
    parser.add_argument("--out", default=None, help="Katalog plików wyjściowych")
    parser.add_argument("--seed", type=int, default=None, help="Ziarno baterii losowych")
    parser.add_argument(
        "--threads",
        type=int,
        default=DEFAULT_THREADS,
        help="Liczba wątków do składania macierzy fazowych",
    )
    parser.add_argument(
        "--cache",
        default=None,
        help=f"Katalog trwałego cache macierzy fazowych (np. {CACHE_SETTINGS['cache_dir']})",
    )
    return parser


def main(argv=None):
    """
    Uruchamia podkomendę i zwraca kod wyjścia.

    Returns:
        int: 0 sukces, 2 błąd konfiguracji, 3 warunek numeryczny, 4 akceptacja, 1 inny błąd
    """
    args = build_parser().parse_args(argv)
    cache_manager = None
    try:
        config = ExperimentConfig.from_file(args.config)
        config.override(output__dir=args.out, seed=args.seed)
        if args.threads < 1:
            raise ConfigError("--threads", f"liczba wątków musi być >= 1, otrzymano {args.threads}")
        if args.cache:
            cache_manager = CacheManager(cache_dir=args.cache)
        quantize.configure(threads=args.threads, cache=cache_manager)

        print(f"\n--- {args.command} ---")
        COMMANDS[args.command](config)
        print(f"\nZakończono. Pliki zapisano w katalogu {config['output.dir']}/")
        return EXIT_CODES["ok"]
    except ConfigError as e:
        print(f"BŁĄD KONFIGURACJI: {str(e)}")
        return EXIT_CODES["config"]
    except (PreconditionError, SymbolError) as e:
        print(f"BŁĄD NUMERYCZNY: {str(e)}")
        return EXIT_CODES["numerical"]
    except AcceptanceError as e:
        print(f"BŁĄD AKCEPTACJI: {str(e)}")
        return EXIT_CODES["acceptance"]
    except Exception as e:
        print(f"BŁĄD KRYTYCZNY: {str(e)}")
        traceback.print_exc()
        return 1
    finally:
        if cache_manager is not None:
            cache_manager.save_phase_cache()
            cache_manager.generate_cache_report()
            cache_manager.print_cache_stats()


if __name__ == "__main__":
    exit(main())
