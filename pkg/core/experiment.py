"""
Konfiguracja eksperymentów i komendy CLI: quantize, compose, expand,
parametrix, spectrum, gauge, accept.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from config import (
    ACCEPTANCE_TOLERANCES,
    DEFAULT_GRID,
    DEFAULT_OUT_DIR,
    DEFAULT_SEED,
    GRID_LIMITS,
    SIGN_SIGMA,
)

from .errors import AcceptanceError, ConfigError, PreconditionError, SymbolError
from .fields import field_preset, gauge_preset, potential_for
from .moyal import expansion, expansion_defect, moyal_oracle, moyal_product, parametrix
from .quantize import op_magnetic, op_minimal, op_weyl, gauge_covariance_residual
from .serialization import save_operator, save_symbol, symbol_header_json, write_sidecar
from .spectral import hermiticity_report, principal_symbol_check, spectrum
from .symbols import PhaseGrid, builtin, parse_symbol_spec, sample, seminorm_report

# Dozwolone klucze konfiguracji i ich wartości domyślne
DEFAULTS = {
    "grid.n": DEFAULT_GRID["n"],
    "grid.N": DEFAULT_GRID["N"],
    "grid.L": DEFAULT_GRID["L"],
    "field.preset": "constant:0.5",
    "field.gauge": "transversal",
    "symbols.f": "gaussian:x0=0.5;0,xi0=0.5;-0.5,sx=1.5,sk=1",
    "symbols.g": "gaussian:x0=-0.5;0.5,xi0=0;0.5,sx=1.5,sk=1",
    "quantize.scheme": "magnetic",
    "compose.points": 10,
    "expand.eps": "1,0.5,0.25",
    "parametrix.symbol": "bracket:m=2",
    "parametrix.R": 0.75,
    "parametrix.J": 2,
    "spectrum.symbol": "bracket:m=1",
    "spectrum.interior": True,
    "spectrum.csv": True,
    "gauge.phi": "quadratic:0.3",
    "gauge.contrast_phi": "cubic:0.05",
    "gauge.symbols": "gaussian:sx=1.5,sk=1 | bracket:m=1 | kinetic | cubic | x_xi:j=0,k=1",
    "fractional.s": 0.5,
    "output.dir": DEFAULT_OUT_DIR,
    "seed": DEFAULT_SEED,
}


def _parse_scalar(key, text):
    value = text.strip()
    if value.lower() in ("true", "yes", "on"):
        return True
    if value.lower() in ("false", "no", "off"):
        return False
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def parse_config_text(text):
    """
    Parsuje konfigurację "klucz = wartość" z sekcjami [sekcja] lub kluczami z kropkami.

    Returns:
        dict: Płaski słownik {"sekcja.klucz": wartość}
    """
    flat = {}
    section = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip() or None
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"linia {number}", f"brak '=' w wierszu: {raw.strip()}")
        key = key.strip()
        if section and "." not in key:
            key = f"{section}.{key}"
        flat[key] = _parse_scalar(key, value)
    return flat


def _flatten(data, prefix=""):
    flat = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def _float_list(key, value):
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = [v for v in str(value).split(",") if v.strip()]
    try:
        return [float(v) for v in items]
    except ValueError:
        raise ConfigError(key, f"oczekiwano listy liczb, otrzymano {value!r}")


@dataclass
class ExperimentConfig:
    """
    Zwalidowana konfiguracja eksperymentu.

    Args:
        values (dict): Płaski słownik ustawień (wartości domyślne uzupełnione)
        tolerances (dict): Progi kryteriów akceptacyjnych po nadpisaniach
    """

    values: dict = field(default_factory=lambda: dict(DEFAULTS))
    tolerances: dict = field(default_factory=lambda: dict(ACCEPTANCE_TOLERANCES))

    @classmethod
    def from_mapping(cls, mapping):
        flat = _flatten(mapping)
        values = dict(DEFAULTS)
        tolerances = dict(ACCEPTANCE_TOLERANCES)
        for key, value in flat.items():
            if key.startswith("tolerances."):
                name = key.split(".", 1)[1]
                if name not in tolerances:
                    raise ConfigError(key, "nieznane kryterium akceptacyjne")
                try:
                    tolerances[name] = float(value)
                except (TypeError, ValueError):
                    raise ConfigError(key, f"oczekiwano liczby, otrzymano {value!r}")
                continue
            if key not in DEFAULTS:
                raise ConfigError(key, "nieznany klucz konfiguracji")
            values[key] = value
        config = cls(values, tolerances)
        config.validate()
        return config

    @classmethod
    def from_text(cls, text):
        stripped = text.lstrip()
        if stripped.startswith("{"):
            try:
                return cls.from_mapping(json.loads(text))
            except json.JSONDecodeError as e:
                raise ConfigError("json", f"niepoprawny JSON: {e}")
        return cls.from_mapping(parse_config_text(text))

    @classmethod
    def from_file(cls, path):
        """
        Wczytuje konfigurację z pliku (format klucz = wartość albo JSON).
        """
        if path is None:
            return cls.from_mapping({})
        if not os.path.exists(path):
            raise ConfigError("--config", f"plik {path} nie istnieje")
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def __getitem__(self, key):
        return self.values[key]

    def override(self, **updates):
        for key, value in updates.items():
            if value is None:
                continue
            dotted = key.replace("__", ".")
            if dotted not in DEFAULTS:
                raise ConfigError(dotted, "nieznany klucz konfiguracji")
            self.values[dotted] = value
        self.validate()
        return self

    def validate(self):
        """
        Sprawdza zakresy i rozwiązywalność presetów; błąd wskazuje klucz.
        """
        n, N, L = self["grid.n"], self["grid.N"], self["grid.L"]
        if not isinstance(n, int) or n not in GRID_LIMITS["dims"]:
            raise ConfigError("grid.n", f"wymiar musi należeć do {GRID_LIMITS['dims']}, otrzymano {n!r}")
        if (
            not isinstance(N, int)
            or N < GRID_LIMITS["min_points"]
            or N > GRID_LIMITS["max_points"]
            or N & (N - 1)
        ):
            raise ConfigError(
                "grid.N",
                f"N musi być potęgą dwójki z zakresu "
                f"[{GRID_LIMITS['min_points']}, {GRID_LIMITS['max_points']}], otrzymano {N!r}",
            )
        if not isinstance(L, (int, float)) or isinstance(L, bool) or L <= 0:
            raise ConfigError("grid.L", f"L musi być dodatnie, otrzymano {L!r}")
        if self["quantize.scheme"] not in ("weyl", "minimal", "magnetic"):
            raise ConfigError("quantize.scheme", f"nieznany schemat {self['quantize.scheme']!r}")
        if not isinstance(self["seed"], int) or self["seed"] < 0:
            raise ConfigError("seed", f"ziarno musi być nieujemną liczbą całkowitą, otrzymano {self['seed']!r}")
        if not isinstance(self["parametrix.J"], int):
            raise ConfigError("parametrix.J", "rząd Neumanna musi być liczbą całkowitą")
        if not isinstance(self["compose.points"], int) or not 1 <= self["compose.points"] <= 16:
            raise ConfigError("compose.points", "liczba punktów wyroczni musi należeć do [1, 16]")
        _float_list("expand.eps", self["expand.eps"])
        s = self["fractional.s"]
        if not isinstance(s, (int, float)) or isinstance(s, bool) or not -1.0 <= s <= 1.0:
            raise ConfigError("fractional.s", f"wykładnik musi należeć do [-1, 1], otrzymano {s!r}")

        try:
            B = self.magnetic_field()
        except (PreconditionError, ValueError) as e:
            raise ConfigError("field.preset", str(e))
        try:
            potential_for(B, str(self["field.gauge"]))
        except (PreconditionError, ValueError) as e:
            raise ConfigError("field.gauge", str(e))
        for key in ("gauge.phi", "gauge.contrast_phi"):
            try:
                gauge_preset(str(self[key]), n)
            except (PreconditionError, ValueError) as e:
                raise ConfigError(key, str(e))
        for key in ("symbols.f", "symbols.g", "parametrix.symbol", "spectrum.symbol"):
            self.symbol(key)
        for spec in self.gauge_symbols():
            self._resolve_symbol("gauge.symbols", spec)

    def grid(self):
        return PhaseGrid(self["grid.n"], float(self["grid.L"]), self["grid.N"])

    def magnetic_field(self):
        return field_preset(str(self["field.preset"]), self["grid.n"])

    def potential(self):
        return potential_for(self.magnetic_field(), str(self["field.gauge"]))

    def _resolve_symbol(self, key, spec):
        try:
            name, params = parse_symbol_spec(spec)
            return builtin(name, params)
        except SymbolError as e:
            raise ConfigError(key, str(e))

    def symbol(self, key):
        return self._resolve_symbol(key, str(self[key]))

    def gauge_symbols(self):
        return [s.strip() for s in str(self["gauge.symbols"]).split("|") if s.strip()]

    def eps_list(self):
        return _float_list("expand.eps", self["expand.eps"])

    def out_dir(self, command):
        path = os.path.join(str(self["output.dir"]), command)
        os.makedirs(path, exist_ok=True)
        return path

    def summary(self):
        return {
            "grid": {"n": self["grid.n"], "N": self["grid.N"], "L": float(self["grid.L"])},
            "field": self["field.preset"],
            "gauge": self["field.gauge"],
            "seed": self["seed"],
        }


def _print_table(title, table):
    print(f"\n==== {title} ====")
    print(table.to_string(index=False))


def _operator_norm(M):
    return float(np.linalg.norm(M.entries, 2))


def cmd_quantize(config):
    """
    Kwantyzuje symbol symbols.f w schemacie quantize.scheme i zapisuje macierz.

    Returns:
        dict: Podsumowanie (schemat, defekt hermitowskości, normy)
    """
    grid = config.grid()
    A = config.potential()
    closure = config.symbol("symbols.f")
    f = sample(closure, grid)
    scheme = config["quantize.scheme"]
    if scheme == "magnetic":
        M = op_magnetic(f, A)
    elif scheme == "minimal":
        M = op_minimal(closure, A, grid)
    else:
        M = op_weyl(f)

    out = config.out_dir("quantize")
    save_operator(M, os.path.join(out, "operator.mwo"))
    summary = {
        "command": "quantize",
        "config": config.summary(),
        "symbol": config["symbols.f"],
        "scheme": M.scheme,
        "potential": M.potential,
        "hermiticity": hermiticity_report(M),
        "frobenius_norm": float(np.linalg.norm(M.entries)),
        "operator_norm": _operator_norm(M),
        "seminorms": seminorm_report(f, closure.class_meta[0] if closure.class_meta else 0.0),
    }
    write_sidecar(os.path.join(out, "quantize.json"), summary)
    print(
        f"Kwantyzacja {M.scheme}: defekt hermitowskości {summary['hermiticity']['defect']:.3e}, "
        f"norma {summary['operator_norm']:.6f}"
    )
    return summary


def _oracle_nodes(product, count, rng):
    """
    Losowe węzły (x, xi) we wnętrzu pudła i w dolnej połowie pasma,
    w których iloczyn przekracza 1% swojego maksimum.
    """
    grid = product.grid
    region = grid.interior_mask()[:, None] & (
        np.linalg.norm(grid.xi_points, axis=-1) <= 0.5 * grid.nyquist
    )[None, :]
    magnitude = np.where(region, np.abs(product.values), 0.0)
    significant = region & (magnitude >= 1e-2 * np.max(magnitude))
    candidates = np.flatnonzero(significant if np.count_nonzero(significant) >= count else region)
    chosen = rng.choice(candidates, size=count, replace=len(candidates) < count)
    return np.unravel_index(chosen, region.shape)


def compose_table(f_closure, g_closure, B, A, grid, count, seed, threads=None):
    """
    Tabela porównania iloczynu macierzowego z wyrocznią całkową w losowych węzłach.

    Błąd względny odniesiony jest do maksimum |f o^B g| we wnętrzu pudła.

    Returns:
        tuple: (SymbolField iloczynu, DataFrame)
    """
    f = sample(f_closure, grid)
    g = sample(g_closure, grid)
    product = moyal_product(f, g, A)
    rng = np.random.default_rng(seed)
    ix, ik = _oracle_nodes(product, count, rng)
    points = np.concatenate([grid.x_points[ix], grid.xi_points[ik]], axis=-1)
    oracle = np.array(moyal_oracle(f_closure, g_closure, B, points, threads=threads))
    values = product.values[ix, ik]
    scale = np.max(np.abs(product.values[grid.interior_mask()]))
    scale = scale if scale > 0 else 1.0
    table = pd.DataFrame(
        {
            "x": [tuple(np.round(p, 4)) for p in grid.x_points[ix]],
            "xi": [tuple(np.round(p, 4)) for p in grid.xi_points[ik]],
            "product_re": values.real,
            "product_im": values.imag,
            "oracle_re": oracle.real,
            "oracle_im": oracle.imag,
            "rel_error": np.abs(values - oracle) / scale,
        }
    )
    return product, table


def cmd_compose(config):
    """
    Iloczyn f o^B g z dumpem symbolu i tabelą porównania z wyrocznią.
    """
    grid = config.grid()
    B = config.magnetic_field()
    A = config.potential()
    f_closure, g_closure = config.symbol("symbols.f"), config.symbol("symbols.g")
    out = config.out_dir("compose")

    if f_closure.envelope is None or g_closure.envelope is None:
        product = moyal_product(sample(f_closure, grid), sample(g_closure, grid), A)
        table = pd.DataFrame()
        print("Pominięto wyrocznię: symbole bez obwiedni gaussowskiej")
    else:
        product, table = compose_table(
            f_closure, g_closure, B, A, grid, config["compose.points"], config["seed"]
        )
        _print_table("ILOCZYN vs WYROCZNIA", table)
        table.to_csv(os.path.join(out, "oracle.csv"), index=False)

    save_symbol(product, os.path.join(out, "product.mwc1"))
    summary = {
        "command": "compose",
        "config": config.summary(),
        "header": symbol_header_json(product),
        "max_rel_error": float(table["rel_error"].max()) if len(table) else None,
    }
    write_sidecar(os.path.join(out, "compose.json"), summary)
    return summary


def cmd_expand(config):
    """
    Wyrazy h_0, h_1, h_2 oraz tabela defektu rozwinięcia i komutatora przy skalowaniu.
    """
    grid = config.grid()
    B = config.magnetic_field()
    f_closure, g_closure = config.symbol("symbols.f"), config.symbol("symbols.g")
    series = expansion(sample(f_closure, grid), sample(g_closure, grid), B, 2)
    out = config.out_dir("expand")
    for j, term in enumerate(series.terms):
        save_symbol(term, os.path.join(out, f"h{j}.mwc1"))

    rows = [
        expansion_defect(f_closure, g_closure, B, grid, eps, str(config["field.gauge"]))
        for eps in config.eps_list()
    ]
    table = pd.DataFrame(rows)
    _print_table("ROZWINIĘCIE vs ILOCZYN", table)
    table.to_csv(os.path.join(out, "expansion.csv"), index=False)
    summary = {
        "command": "expand",
        "config": config.summary(),
        "orders": series.orders,
        "defects": rows,
    }
    write_sidecar(os.path.join(out, "expand.json"), summary)
    return summary


def cmd_parametrix(config):
    """
    Parametriks symbolu parametrix.symbol dla J = 0..parametrix.J z raportem residuów.
    """
    grid = config.grid()
    B = config.magnetic_field()
    A = config.potential()
    a = sample(config.symbol("parametrix.symbol"), grid)
    R = float(config["parametrix.R"])
    J = config["parametrix.J"]

    result = parametrix(a, B, R, J, A)
    out = config.out_dir("parametrix")
    save_symbol(result.b, os.path.join(out, "parametrix.mwc1"))
    save_symbol(result.residual_field, os.path.join(out, "residual.mwc1"))
    table = pd.DataFrame({"J": list(range(J + 1)), "residual": result.history})
    _print_table("RESIDUUM PARAMETRIKSU", table)
    summary = {
        "command": "parametrix",
        "config": config.summary(),
        "cutoff": R,
        "neumann_order": J,
        "ellipticity": result.ellipticity,
        "residuals": table["residual"].tolist(),
    }
    write_sidecar(os.path.join(out, "parametrix.json"), summary)
    return summary


def cmd_spectrum(config):
    """
    Widmo Op^A(spectrum.symbol) z raportem JSON i opcjonalnym plikiem CSV.
    """
    grid = config.grid()
    A = config.potential()
    p = sample(config.symbol("spectrum.symbol"), grid)
    M = op_magnetic(p, A)
    report = spectrum(M, interior_only=bool(config["spectrum.interior"]))
    out = config.out_dir("spectrum")
    s = float(config["fractional.s"])
    check = principal_symbol_check(M, s, p, A)
    payload = report.to_json()
    payload.update(
        {
            "command": "spectrum",
            "config": config.summary(),
            "fractional_s": s,
            "principal_symbol_deviation": check["deviation"],
            "spectral_shift": check["shift"],
        }
    )
    write_sidecar(os.path.join(out, "spectrum.json"), payload)
    if config["spectrum.csv"]:
        pd.DataFrame({"index": np.arange(len(report.eigenvalues)), "eigenvalue": report.eigenvalues}).to_csv(
            os.path.join(out, "eigenvalues.csv"), index=False
        )
    print(f"Widmo: {len(report.eigenvalues)} wartości, min = {report.min_eig:.6f}")
    return payload


def gauge_table(config):
    """
    Tabela residuów kowariancji cechowania dla obu schematów i wszystkich symboli.

    Dla gauge.phi obie kwantyzacje powinny być kowariantne; wiersz kontrastowy
    z gauge.contrast_phi (phi sześcienne) pokazuje brak kowariancji Op_A.
    """
    grid = config.grid()
    A = config.potential()
    rows = []
    for key in ("gauge.phi", "gauge.contrast_phi"):
        phi = gauge_preset(str(config[key]), grid.n)
        specs = config.gauge_symbols() if key == "gauge.phi" else ["kinetic"]
        for spec in specs:
            closure = config._resolve_symbol("gauge.symbols", spec)
            f = sample(closure, grid)
            for scheme in ("magnetic", "minimal"):
                rows.append(
                    {
                        "phi": config[key],
                        "symbol": spec,
                        "scheme": scheme,
                        "residual": gauge_covariance_residual(f, A, phi, scheme),
                    }
                )
    return pd.DataFrame(rows)


def cmd_gauge(config):
    """
    Kontrast kowariancji cechowania: kwantyzacja magnetyczna vs minimalna.
    """
    table = gauge_table(config)
    _print_table(
        f"KOWARIANCJA CECHOWANIA (phi = {config['gauge.phi']}, "
        f"kontrast = {config['gauge.contrast_phi']})",
        table,
    )
    out = config.out_dir("gauge")
    table.to_csv(os.path.join(out, "gauge.csv"), index=False)
    summary = {
        "command": "gauge",
        "config": config.summary(),
        "phi": config["gauge.phi"],
        "contrast_phi": config["gauge.contrast_phi"],
        "rows": table.to_dict(orient="records"),
    }
    write_sidecar(os.path.join(out, "gauge.json"), summary)
    return summary


def cmd_accept(config):
    """
    Uruchamia baterię kryteriów akceptacyjnych; niezaliczone kryteria dają AcceptanceError.
    """
    from .acceptance import run_acceptance

    table = run_acceptance(config)
    _print_table(f"KRYTERIA AKCEPTACYJNE (sigma = {SIGN_SIGMA})", table)
    out = config.out_dir("accept")
    table.to_csv(os.path.join(out, "acceptance.csv"), index=False)
    summary = {
        "command": "accept",
        "config": config.summary(),
        "results": table.to_dict(orient="records"),
    }
    write_sidecar(os.path.join(out, "acceptance.json"), summary)
    failed = table.loc[~table["passed"], "criterion"].tolist()
    if failed:
        raise AcceptanceError(failed)
    return summary


COMMANDS = {
    "quantize": cmd_quantize,
    "compose": cmd_compose,
    "expand": cmd_expand,
    "parametrix": cmd_parametrix,
    "spectrum": cmd_spectrum,
    "gauge": cmd_gauge,
    "accept": cmd_accept,
}
