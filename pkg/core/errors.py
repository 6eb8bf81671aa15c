"""
Hierarchia wyjątków pakietu. Każda klasa odpowiada jednemu kodowi wyjścia CLI.
"""


class MagWeylError(Exception):
    """Bazowy wyjątek pakietu."""


class ConfigError(MagWeylError, ValueError):
    """Niepoprawny klucz lub wartość konfiguracji eksperymentu."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"Błąd konfiguracji [{key}]: {message}")


class SymbolError(MagWeylError, ValueError):
    """Niepoprawny symbol, siatka lub pochodna."""


class PreconditionError(MagWeylError, ValueError):
    """Niespełniony warunek numeryczny (eliptyczność, hermitowskość, zakres s)."""


class AcceptanceError(MagWeylError):
    """Niezaliczone kryterium akceptacyjne."""

    def __init__(self, failed):
        self.failed = list(failed)
        super().__init__(f"Niezaliczone kryteria akceptacyjne: {', '.join(self.failed)}")
