# Globalne ustawienia dla rachunku magnetycznej kwantyzacji Weyla

TOOL_VERSION = "1.0.0"

# Ustawienia siatki (domyślna skala "biurkowa")
DEFAULT_GRID = {
    "n": 2,  # Wymiar przestrzeni konfiguracyjnej
    "N": 16,  # Liczba węzłów na oś (parzysta)
    "L": 8.0,  # Połowa szerokości pudła [-L, L)
}

GRID_LIMITS = {
    "dims": (1, 2, 3),  # Dozwolone wymiary
    "min_points": 8,  # Minimalne N w konfiguracji
    "max_points": 64,  # Maksymalne N w konfiguracji
}

# Kwadratury Gaussa-Legendre'a
QUADRATURE_ORDER = 16  # Rząd Q dla odcinków (cyrkulacja, cechowanie poprzeczne)
FLUX_QUADRATURE_ORDER = 16  # Rząd Q x Q dla strumienia przez trójkąt
ORACLE_FLUX_ORDER = 8  # Tańszy rząd strumienia w wyroczni całkowej
ORACLE_NODES = 20  # Liczba węzłów na wymiar w wyroczni iloczynu Moyala
ENVELOPE_CUTOFF = 1e-12  # Obcięcie obwiedni gaussowskiej w wyroczni

# Zamrożona konwencja znaku: [Op^A(xi_1), Op^A(xi_2)] = SIGN_SIGMA * i * B_12
SIGN_SIGMA = 1

# Ekstrakcja symbolu z macierzy
SYMBOL_EDGE_ANCHORS = 3  # Węzły brzegowe (z każdej strony) wielomianu tła przy przesunięciu o pół kroku

# Tolerancje
HERMITICITY_TOLERANCE = 1e-8  # Maksymalny defekt hermitowskości przed rozkładem
SPECTRUM_FLOOR_TOLERANCE = 0.05  # Tolerancja dolnej granicy widma na siatce
INTERIOR_FRACTION = 0.5  # Część pudła traktowana jako wnętrze (środkowa połowa)
MAX_DERIVATIVE_ORDER = 4  # Najwyższy obsługiwany rząd różnic skończonych
MAX_EXPANSION_ORDER = 2  # Najwyższy rząd rozwinięcia asymptotycznego
MAX_NEUMANN_ORDER = 3  # Najwyższy rząd szeregu Neumanna w parametriksie

# Progi kryteriów akceptacyjnych (mogą być nadpisane w konfiguracji: tolerances.*)
ACCEPTANCE_TOLERANCES = {
    "stokes": 1e-10,  # Tożsamość Stokesa
    "gauge_polynomial": 1e-8,  # Kowariancja cechowania, phi kwadratowe
    "gauge_smooth": 1e-6,  # Kowariancja cechowania, phi gładkie ograniczone
    "minimal_defect": 1e-3,  # Dolny próg braku kowariancji Op_A
    "magnetic_cubic": 1e-6,  # Górny próg dla Op^A przy phi sześciennym
    "commutator": 1e-6,  # Relacje komutacyjne
    "round_trip": 1e-6,  # symbol_of o op_magnetic
    "moyal_oracle": 1e-3,  # Zgodność iloczynu z wyrocznią całkową
    "bracket": 0.05,  # Komutator vs nawias Poissona przy eps = 1/4
    "schemes_quadratic": 1e-8,  # Równość kwantyzacji dla symboli kwadratowych
    "schemes_cubic": 1e-4,  # Dolny próg różnicy dla symbolu sześciennego
    "parametrix": 0.1,  # Residuum parametriksu przy J = 2
    "spectrum_floor": 0.95,  # Dolna granica widm relatywistycznych
    "principal_symbol": 0.05,  # Symbol główny potęgi ułamkowej
    "sobolev_low": 0.25,  # Dolna granica ilorazu norm Sobolewa
    "sobolev_high": 4.0,  # Górna granica ilorazu norm Sobolewa
}

# Ustawienia wielowątkowości
DEFAULT_THREADS = 4
ROW_CHUNK = 16  # Liczba wierszy macierzy składanych w jednym zadaniu

# Ustawienia powtarzalności
DEFAULT_SEED = 0

# Ustawienia wyjścia
DEFAULT_OUT_DIR = "__out"
DEFAULT_CONFIG_FILE = "configs/default.cfg"

# Kody wyjścia CLI
EXIT_CODES = {
    "ok": 0,
    "config": 2,  # Błąd konfiguracji
    "numerical": 3,  # Niespełniony warunek numeryczny
    "acceptance": 4,  # Niezaliczone kryterium akceptacyjne
}

# Ustawienia cache macierzy fazowych
CACHE_SETTINGS = {
    "cache_dir": "cache",
    "phase_cache_file": "phase_matrices.pkl",
    "max_backups": 5,  # Maksymalna liczba kopii zapasowych
    "max_entries": 32,  # Limit wpisów trzymanych w pamięci
    "cache_report_file": "cache_report.json",
}

# Ustawienia baterii akceptacyjnej
ACCEPTANCE_SETTINGS = {
    "fine_points": 32,  # N dla kryteriów wymagających dokładności
    "stokes_triangles": 20,  # Liczba losowych trójkątów
    "oracle_points": 10,  # Punkty porównania z wyrocznią
    "sobolev_states": 20,  # Liczba stanów w baterii Sobolewa
    "refinement": (8, 16, 32),  # Ciąg N dla testów trendu (ta sama rodzina siatek)
    "parametrix_cutoff": 0.75,  # Promień R parametriksu
    "dilations": (1.0, 0.5, 0.25),  # Skale eps rozwinięcia
}
