import json
import os
import pickle
import tempfile
import threading
import time
from datetime import datetime

from config import CACHE_SETTINGS


class CacheManager:
    """
    Klasa zarządzająca cachowaniem macierzy fazowych Lambda^A(x, y), z bezpiecznym
    zapisem na dysk i wsparciem dla wielowątkowości.

    Bez katalogu cache działa wyłącznie w pamięci.
    """

    def __init__(
        self,
        cache_dir=None,
        phase_file=CACHE_SETTINGS["phase_cache_file"],
        max_entries=CACHE_SETTINGS["max_entries"],
        max_backups=CACHE_SETTINGS["max_backups"],
    ):
        """
        Inicjalizuje menedżera cache.

        Args:
            cache_dir (str, optional): Katalog dla plików cache (None = tylko pamięć)
            phase_file (str): Nazwa pliku cache macierzy fazowych
            max_entries (int): Maksymalna liczba macierzy w pamięci
            max_backups (int): Maksymalna liczba kopii zapasowych
        """
        self.cache_dir = cache_dir
        self.max_entries = max_entries
        self.max_backups = max_backups
        self.lock = threading.RLock()
        self.phase_file = None

        if cache_dir is not None:
            os.makedirs(cache_dir, exist_ok=True)
            self.phase_file = os.path.join(cache_dir, phase_file)

        self.phase_cache = self.load_phase_cache()

        # Liczniki statystyk
        self.hits = 0
        self.misses = 0

    @property
    def persistent(self):
        return self.phase_file is not None

    def load_phase_cache(self):
        """
        Ładuje cache macierzy fazowych z pliku.

        Returns:
            dict: Załadowane dane lub pusty słownik
        """
        if not self.persistent:
            return {}
        try:
            if os.path.exists(self.phase_file):
                with open(self.phase_file, "rb") as f:
                    data = pickle.load(f)
                print(f"Załadowano {len(data)} macierzy fazowych z cache")
                return data
            return {}
        except Exception as e:
            print(f"Błąd podczas ładowania cache macierzy fazowych: {str(e)}")
            return self._load_backup(self.phase_file)

    def _load_backup(self, original_file):
        """
        Próbuje załadować najnowszą kopię zapasową pliku cache.

        Args:
            original_file (str): Ścieżka do oryginalnego pliku cache

        Returns:
            dict: Dane z backupu lub pusty słownik
        """
        try:
            base_name = os.path.basename(original_file)
            backup_files = sorted(
                (
                    f
                    for f in os.listdir(self.cache_dir)
                    if f.startswith(base_name) and f.endswith(".bak")
                ),
                reverse=True,
            )
            if backup_files:
                newest_backup = os.path.join(self.cache_dir, backup_files[0])
                print(f"Próba odtworzenia z backupu: {newest_backup}")
                with open(newest_backup, "rb") as f:
                    data = pickle.load(f)
                print("Pomyślnie odtworzono dane z backupu")
                return data
        except Exception as e:
            print(f"Nie udało się odtworzyć z backupu: {str(e)}")
        return {}

    def save_phase_cache(self):
        """
        Bezpiecznie zapisuje cache macierzy fazowych do pliku.

        Returns:
            bool: True jeśli operacja się powiodła (lub cache jest tylko w pamięci)
        """
        if not self.persistent:
            return True
        with self.lock:
            saved = self._safe_save(dict(self.phase_cache), self.phase_file)
            if saved:
                self._cleanup_backups(self.phase_file)
            return saved

    def _safe_save(self, data, file_path):
        """
        Zapis atomowy: plik tymczasowy w tym samym katalogu, kopia zapasowa, zmiana nazwy.
        """
        try:
            file_dir = os.path.dirname(file_path)
            file_name = os.path.basename(file_path)
            prefix = file_name.split(".")[0] + "_tmp_"
            suffix = "." + file_name.split(".")[-1]

            with tempfile.NamedTemporaryFile(
                delete=False, prefix=prefix, suffix=suffix, dir=file_dir
            ) as tmp_file:
                tmp_path = tmp_file.name
                pickle.dump(data, tmp_file)

            if os.path.exists(file_path):
                stamp = datetime.now().strftime("%Y%m%d")
                backup_file = f"{file_path}.{stamp}.bak"
                if not os.path.exists(backup_file):
                    os.rename(file_path, backup_file)
                else:
                    os.remove(file_path)

            os.rename(tmp_path, file_path)
            print(f"Zapisano {len(data)} macierzy fazowych do {file_path}")
            return True
        except Exception as e:
            print(f"Błąd podczas bezpiecznego zapisu cache: {str(e)}")
            return False

    def _cleanup_backups(self, base_file_path):
        """
        Ogranicza liczbę kopii zapasowych pliku do max_backups najnowszych.
        """
        try:
            dir_path = os.path.dirname(base_file_path)
            base_name = os.path.basename(base_file_path)
            backup_files = sorted(
                f
                for f in os.listdir(dir_path)
                if f.startswith(base_name) and f.endswith(".bak")
            )
            for old_file in backup_files[: -self.max_backups]:
                try:
                    os.remove(os.path.join(dir_path, old_file))
                    print(f"Usunięto starą kopię zapasową: {old_file}")
                except Exception as e:
                    print(f"Nie udało się usunąć kopii zapasowej {old_file}: {str(e)}")
        except Exception as e:
            print(f"Błąd podczas czyszczenia kopii zapasowych: {str(e)}")

    def get_phase(self, key):
        """
        Pobiera macierz fazową z cache.

        Args:
            key (str): Klucz (siatka, potencjał, rząd kwadratury)

        Returns:
            ndarray: Macierz lub None, jeśli jej nie ma
        """
        if key is None:
            return None
        with self.lock:
            entry = self.phase_cache.get(key)
            if entry is None:
                self.misses += 1
                return None
            self.hits += 1
            return entry["data"]

    def add_phase(self, key, matrix, auto_save=False):
        """
        Dodaje macierz fazową do cache, usuwając najstarsze wpisy ponad limit.

        Returns:
            bool: True jeśli operacja się powiodła
        """
        if key is None:
            return False
        with self.lock:
            try:
                matrix.setflags(write=False)
                self.phase_cache[key] = {
                    "data": matrix,
                    "timestamp": time.time(),
                    "datetime": datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
                }
                while len(self.phase_cache) > self.max_entries:
                    oldest = next(iter(self.phase_cache))
                    del self.phase_cache[oldest]
                if auto_save:
                    self.save_phase_cache()
                return True
            except Exception as e:
                print(f"Błąd podczas dodawania macierzy fazowej do cache: {str(e)}")
                return False

    def clear(self):
        with self.lock:
            self.phase_cache.clear()
            self.hits = 0
            self.misses = 0

    def get_cache_stats(self):
        """
        Zwraca statystyki wykorzystania cache.

        Returns:
            dict: Statystyki cache
        """
        total = self.hits + self.misses
        hit_rate = (self.hits / total) * 100 if total > 0 else 0
        return {
            "hits": self.hits,
            "misses": self.misses,
            "total_requests": total,
            "hit_rate": f"{hit_rate:.2f}%",
            "phase_cache_size": len(self.phase_cache),
        }

    def generate_cache_report(self, output_file=CACHE_SETTINGS["cache_report_file"]):
        """
        Generuje raport stanu cache i zapisuje go do pliku JSON.

        Returns:
            str: Ścieżka do raportu lub None dla cache w pamięci
        """
        if not self.persistent:
            return None
        with self.lock:
            report = {
                "timestamp": time.time(),
                "datetime": datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
                "stats": self.get_cache_stats(),
                "entries": {
                    key: {"shape": list(entry["data"].shape), "datetime": entry["datetime"]}
                    for key, entry in self.phase_cache.items()
                },
                "file": {
                    "path": self.phase_file,
                    "size_bytes": (
                        os.path.getsize(self.phase_file)
                        if os.path.exists(self.phase_file)
                        else 0
                    ),
                },
            }
            report_path = os.path.join(self.cache_dir, output_file)
            with open(report_path, "w", encoding="utf-8") as f:
                json.dump(report, f, indent=4, ensure_ascii=False)
            return report_path

    def print_cache_stats(self):
        """
        Wyświetla szczegółowe statystyki cache.
        """
        stats = self.get_cache_stats()
        print("\n==== STATYSTYKI CACHE ====")
        print(f"Trafienia w cache: {stats['hits']}")
        print(f"Chybienia cache: {stats['misses']}")
        print(f"Łączne zapytania: {stats['total_requests']}")
        print(f"Skuteczność cache: {stats['hit_rate']}")
        print(f"Rozmiar cache: {stats['phase_cache_size']} macierzy")
        if self.persistent and os.path.exists(self.phase_file):
            size = os.path.getsize(self.phase_file) / (1024 * 1024)
            print(f"Rozmiar pliku cache: {size:.2f} MB")
        print("==========================\n")
