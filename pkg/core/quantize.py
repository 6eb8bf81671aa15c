"""
Kwantyzacje Weyla (zwykła, minimalna, magnetyczna), odwrotne odwzorowanie
macierz -> symbol oraz narzędzia porównań na stanach próbnych.
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.fft

from config import (
    DEFAULT_SEED,
    DEFAULT_THREADS,
    QUADRATURE_ORDER,
    ROW_CHUNK,
    SIGN_SIGMA,
    SYMBOL_EDGE_ANCHORS,
)

from .cache_manager import CacheManager
from .errors import PreconditionError, SymbolError
from .fields import circulation, gauge_transform, zero_potential
from .symbols import GridFunction, PhaseGrid, SymbolClosure, SymbolField, sample

SCHEME_CODES = {"weyl": 0, "minimal": 1, "magnetic": 2}

# Współdzielony cache macierzy fazowych (w pamięci, dopóki CLI nie wskaże katalogu)
PHASE_CACHE = CacheManager()
_SETTINGS = {"threads": DEFAULT_THREADS}


def configure(threads=None, cache=None):
    """
    Ustawia liczbę wątków i cache używane przy składaniu macierzy fazowych.

    Args:
        threads (int, optional): Liczba wątków roboczych
        cache (CacheManager, optional): Zastępczy menedżer cache
    """
    global PHASE_CACHE
    if threads is not None:
        if threads < 1:
            raise PreconditionError(f"Liczba wątków musi być >= 1, otrzymano {threads}")
        _SETTINGS["threads"] = int(threads)
    if cache is not None:
        PHASE_CACHE = cache


def thread_count():
    """Bieżąca liczba wątków roboczych ustawiona przez configure()."""
    return _SETTINGS["threads"]


@dataclass(frozen=True)
class OperatorMatrix:
    """
    Macierz operatora na węzłach x z informacją o schemacie kwantyzacji.

    Args:
        grid (PhaseGrid): Siatka
        entries (ndarray): Macierz (size, size)
        scheme (str): "weyl", "minimal" albo "magnetic"
        potential (str, optional): Etykieta potencjału A (dla minimal/magnetic)
    """

    grid: PhaseGrid
    entries: np.ndarray = field(repr=False)
    scheme: str = "weyl"
    potential: Optional[str] = "zero"

    def __post_init__(self):
        if self.scheme not in SCHEME_CODES:
            raise SymbolError(f"Nieznany schemat kwantyzacji: {self.scheme}")
        expected = (self.grid.size, self.grid.size)
        if self.entries.shape != expected:
            raise SymbolError(f"Kształt macierzy {self.entries.shape} niezgodny z {expected}")

    def _check(self, other):
        if self.grid != other.grid:
            raise PreconditionError(f"Niezgodne siatki: {self.grid} i {other.grid}")
        if self.scheme == "magnetic" and other.scheme == "magnetic":
            if self.potential != other.potential:
                raise PreconditionError(
                    f"Niezgodne potencjały: {self.potential} i {other.potential}"
                )

    def _combined_tag(self, other):
        if self.scheme == other.scheme:
            return self.scheme, self.potential
        if "magnetic" in (self.scheme, other.scheme):
            potential = self.potential if self.scheme == "magnetic" else other.potential
            return "magnetic", potential
        return self.scheme, self.potential

    def __matmul__(self, other):
        self._check(other)
        scheme, potential = self._combined_tag(other)
        return OperatorMatrix(self.grid, self.entries @ other.entries, scheme, potential)

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            scheme, potential = self._combined_tag(other)
            return OperatorMatrix(self.grid, self.entries + other.entries, scheme, potential)
        eye = np.eye(self.grid.size)
        return OperatorMatrix(self.grid, self.entries + other * eye, self.scheme, self.potential)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return OperatorMatrix(self.grid, scalar * self.entries, self.scheme, self.potential)

    __rmul__ = __mul__

    def dagger(self):
        return OperatorMatrix(self.grid, self.entries.conj().T, self.scheme, self.potential)

    def hermiticity_defect(self):
        """Względny defekt ||M - M^*|| / ||M|| w normie Frobeniusa."""
        scale = np.linalg.norm(self.entries)
        if scale == 0.0:
            return 0.0
        return float(np.linalg.norm(self.entries - self.entries.conj().T) / scale)


def identity(grid, scheme="weyl", potential="zero"):
    return OperatorMatrix(grid, np.eye(grid.size, dtype=complex), scheme, potential)


def _midpoint_lattice(grid):
    """Punkty sieci połówkowej, kształt (2N-1,)*n + (n,)."""
    axes = [grid.midpoint_axis] * grid.n
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _phase_key(grid, A):
    """
    Klucz cache: siatka, etykieta i odcisk wartości A na sieci połówkowej.

    Dwa potencjały o tej samej etykiecie, ale różnych wartościach,
    dostają różne klucze.
    """
    samples = np.ascontiguousarray(np.asarray(A(_midpoint_lattice(grid)), dtype=float))
    fingerprint = hashlib.sha256(samples.tobytes()).hexdigest()[:16]
    return f"{grid.key()}|{A.label}|{fingerprint}|Q{QUADRATURE_ORDER}"


def phase_matrix(grid, A):
    """
    Macierz Lambda^A(x, y) = exp(-i Gamma^A([x, y])) na wszystkich parach węzłów.

    Składana blokami wierszy w puli wątków; wynik trafia do cache
    pod kluczem z odciskiem wartości potencjału.

    Args:
        grid (PhaseGrid): Siatka
        A (VectorPotential): Potencjał

    Returns:
        ndarray: Macierz (size, size), tylko do odczytu
    """
    if A.dim != grid.n:
        raise SymbolError(f"Wymiar potencjału {A.dim} niezgodny z siatką {grid.n}")
    key = _phase_key(grid, A)
    cached = PHASE_CACHE.get_phase(key)
    if cached is not None:
        return cached

    pts = grid.x_points
    out = np.empty((grid.size, grid.size), dtype=complex)

    def fill_rows(start):
        stop = min(start + ROW_CHUNK, grid.size)
        gamma = circulation(A, pts[start:stop, None, :], pts[None, :, :])
        out[start:stop] = np.exp(-1j * gamma)

    with ThreadPoolExecutor(max_workers=_SETTINGS["threads"]) as executor:
        list(executor.map(fill_rows, range(0, grid.size, ROW_CHUNK)))

    if not np.all(np.isfinite(out)):
        raise SymbolError(f"Potencjał {A.label} daje nieskończoną fazę na siatce")
    PHASE_CACHE.add_phase(key, out)
    return out


@lru_cache(maxsize=32)
def _half_shift(N, direction):
    """
    Okresowe przesunięcie o pół kroku jako macierz (N, N).

    Wiersz i to wartość w pozycji i + direction / 2 interpolantu
    trygonometrycznego danych; składowa Nyquista jest zerowana.
    """
    k = scipy.fft.fftfreq(N, d=1.0 / N)
    multiplier = np.exp(direction * 1j * np.pi * k / N)
    multiplier[N // 2] = 0.0
    mat = scipy.fft.ifft(multiplier[:, None] * scipy.fft.fft(np.eye(N), axis=0), axis=0).real
    mat.setflags(write=False)
    return mat


def _lagrange_weights(anchors, targets):
    """Wagi (len(targets), len(anchors)) interpolacji Lagrange'a."""
    anchors = np.asarray(anchors, dtype=float)
    targets = np.asarray(targets, dtype=float)
    weights = np.ones((len(targets), len(anchors)))
    for q, a in enumerate(anchors):
        for r, b in enumerate(anchors):
            if r != q:
                weights[:, q] *= (targets - b) / (a - b)
    return weights


def _edge_anchors(count):
    """Indeksy skrajnych punktów (po SYMBOL_EDGE_ANCHORS z każdej strony)."""
    if count <= 2 * SYMBOL_EDGE_ANCHORS:
        return np.arange(count)
    return np.r_[np.arange(SYMBOL_EDGE_ANCHORS), np.arange(count - SYMBOL_EDGE_ANCHORS, count)]


@lru_cache(maxsize=32)
def _midpoint_map(N):
    """
    Odwzorowanie (2N - 1, N) wartości w węzłach na sieć połówkową.

    Tło wielomianowe zaczepione na brzegach plus okresowe przesunięcie
    reszty; dokładne dla wielomianów stopnia do 2 * SYMBOL_EDGE_ANCHORS - 1.
    """
    positions = np.arange(N, dtype=float)
    anchors = _edge_anchors(N)
    background_half = _lagrange_weights(positions[anchors], positions[:-1] + 0.5)
    background_nodes = _lagrange_weights(positions[anchors], positions)
    shift = _half_shift(N, 1)[: N - 1]
    odd = shift.copy()
    odd[:, anchors] += background_half - shift @ background_nodes
    mat = np.zeros((2 * N - 1, N))
    mat[0::2] = np.eye(N)
    mat[1::2] = odd
    mat.setflags(write=False)
    return mat


def _refine(values, axis):
    """Przeniesienie wartości z węzłów na sieć połówkową wzdłuż osi."""
    mat = _midpoint_map(values.shape[axis])
    return np.moveaxis(np.tensordot(mat, np.moveaxis(values, axis, 0), axes=(1, 0)), 0, axis)


def _midpoint_values(f):
    """
    Wartości symbolu f(z, xi_m) dla z na sieci połówkowej, kształt (2N-1,)*n + (N,)*n.
    """
    grid = f.grid
    n = grid.n
    if f.closure is not None:
        axes = [grid.midpoint_axis] * n + [grid.xi_axis] * n
        mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
        z = np.stack(np.broadcast_arrays(*mesh[:n]), axis=-1)
        xi = np.stack(np.broadcast_arrays(*mesh[n:]), axis=-1)
        values = np.asarray(f.closure(z, xi), dtype=complex)
        if not np.all(np.isfinite(values)):
            raise SymbolError("Symbol przyjmuje wartości nieskończone w punktach środkowych")
        return values
    values = f.lattice()
    for axis in range(n):
        values = _refine(values, axis)
    return values


def _pair_indices(grid):
    """Współrzędne osiowe węzłów: tablica (n, size)."""
    return np.array(np.unravel_index(np.arange(grid.size), (grid.N,) * grid.n))


def _kernel(f):
    """
    Jądro N^{-n} sum_m f((x+y)/2, xi_m) exp(i <x - y, xi_m>) na parach węzłów.
    """
    grid = f.grid
    n, N = grid.n, grid.N
    values = _midpoint_values(f)
    xi_axes = tuple(range(n, 2 * n))
    transformed = scipy.fft.fftn(scipy.fft.ifftshift(values, axes=xi_axes), axes=xi_axes)
    coords = _pair_indices(grid)
    z_index = tuple(coords[a][:, None] + coords[a][None, :] for a in range(n))
    d_index = tuple((coords[a][None, :] - coords[a][:, None]) % N for a in range(n))
    return transformed[z_index + d_index] / N**n


def op_magnetic(f, A):
    """
    Magnetyczna kwantyzacja Weyla Op^A(f) jako macierz na węzłach x.

    Args:
        f (SymbolField): Symbol na siatce
        A (VectorPotential): Potencjał wektorowy

    Returns:
        OperatorMatrix: Macierz ze schematem "magnetic"
    """
    grid = f.grid
    if A.dim != grid.n:
        raise SymbolError(f"Wymiar potencjału {A.dim} niezgodny z siatką {grid.n}")
    entries = phase_matrix(grid, A) * _kernel(f)
    return OperatorMatrix(grid, entries, "magnetic", A.label)


def op_weyl(f):
    """
    Zwykła kwantyzacja Weyla; ta sama ścieżka co Op^A przy A = 0.
    """
    M = op_magnetic(f, zero_potential(f.grid.n))
    return OperatorMatrix(f.grid, M.entries, "weyl", "zero")


def nu_pullback(p, A):
    """
    Symbol p o nu_A: (x, xi) -> p(x, xi - A(x)).

    Args:
        p (callable): Symbol analityczny
        A (VectorPotential): Potencjał

    Returns:
        SymbolClosure: Złożenie z zachowanymi metadanymi klasy
    """
    name = getattr(p, "name", "custom")
    return SymbolClosure(
        lambda x, xi: p(x, xi - A(x)),
        f"{name}∘nu[{A.label}]",
        getattr(p, "class_meta", None),
    )


def _midpoint_potential(grid, A):
    """A((x + y) / 2) na wszystkich parach węzłów, kształt (size, size, n)."""
    values = np.asarray(A(_midpoint_lattice(grid)), dtype=float)
    coords = _pair_indices(grid)
    z_index = tuple(coords[a][:, None] + coords[a][None, :] for a in range(grid.n))
    return values[z_index]


def op_minimal(p, A, grid):
    """
    Kwantyzacja przez minimalne sprzężenie Op_A(p) = Op(p o nu_A).

    Przesunięcie xi -> xi - A(z) jest wykonywane dokładnie na jądrze:
    jądro Op(p o nu_A) w parze (x, y) to exp(i <A(z), x - y>) razy jądro Op(p),
    z = (x + y) / 2. Dla A = 0 wynik jest bitowo równy Op(p).

    Args:
        p (callable): Symbol analityczny
        A (VectorPotential): Potencjał
        grid (PhaseGrid): Siatka

    Returns:
        OperatorMatrix: Macierz ze schematem "minimal"
    """
    if A.dim != grid.n:
        raise SymbolError(f"Wymiar potencjału {A.dim} niezgodny z siatką {grid.n}")
    M = op_weyl(sample(p, grid))
    pts = grid.x_points
    separation = pts[:, None, :] - pts[None, :, :]
    phase = np.exp(1j * np.einsum("klj,klj->kl", _midpoint_potential(grid, A), separation))
    return OperatorMatrix(grid, phase * M.entries, "minimal", A.label)


@lru_cache(maxsize=256)
def _node_map(N, d_abs):
    """
    Odwzorowanie (N, 2N - 1) wartości na sieci połówkowej w wartości w węzłach
    dla przesunięcia |d| = d_abs.

    Dostępne są tylko punkty z k + l = s, dla których para mieści się w pudle.
    Parzyste |d| trafiają w węzły (brakujące uzupełnia tło wielomianowe),
    nieparzyste są przenoszone o pół kroku: tło zaczepione na brzegach
    plus okresowe przesunięcie reszty.
    """
    mat = np.zeros((N, 2 * N - 1))
    targets = np.arange(N, dtype=float)
    if d_abs % 2 == 0:
        slots = np.arange(d_abs // 2, N - d_abs // 2)
        columns = 2 * slots
        positions = slots.astype(float)
    else:
        slots = np.arange((d_abs - 1) // 2, N - (d_abs + 1) // 2)
        columns = 2 * slots + 1
        positions = slots + 0.5
    anchors = _edge_anchors(len(slots))
    mat[:, columns[anchors]] = _lagrange_weights(positions[anchors], targets)
    if d_abs % 2 == 0:
        mat[slots] = 0.0
        mat[slots, columns] = 1.0
    else:
        shift = _half_shift(N, -1)[:, slots]
        mat[:, columns] += shift
        mat[:, columns[anchors]] -= shift @ _lagrange_weights(positions[anchors], positions)
    mat.setflags(write=False)
    return mat


def _check_tag(M, A):
    if M.scheme != "magnetic":
        if A is not None and A.label != "zero" and A.label != M.potential:
            raise PreconditionError(
                f"Macierz w schemacie {M.scheme} nie przyjmuje potencjału {A.label}"
            )
        return None
    if A is None:
        raise PreconditionError("Ekstrakcja symbolu macierzy magnetycznej wymaga potencjału A")
    if A.label is not None and M.potential is not None and A.label != M.potential:
        raise PreconditionError(
            f"Potencjał {A.label} niezgodny z etykietą macierzy {M.potential}"
        )
    return A


def symbol_of(M, A=None):
    """
    Odwraca kwantyzację: zwraca symbol f na siatce, dla którego Op^A(f) = M.

    Jądro dzielone przez Lambda^A daje transformatę symbolu w punktach
    środkowych (x + y)/2. Pary z |d_j| = N/2 trafiają w to samo residuum
    i są uśredniane, dzięki czemu ekstrakcja jest zgodna ze sprzężeniem
    hermitowskim. Wartości w węzłach odtwarza _node_map: dokładnie dla
    wielomianów niskiego stopnia w z, spektralnie dla symboli zlokalizowanych.

    Args:
        M (OperatorMatrix): Macierz operatora
        A (VectorPotential, optional): Potencjał (wymagany dla schematu "magnetic")

    Returns:
        SymbolField: Symbol na siatce
    """
    grid = M.grid
    n, N = grid.n, grid.N
    half = N // 2
    A = _check_tag(M, A)
    kernel = M.entries * N**n
    if A is not None:
        kernel = kernel * np.conj(phase_matrix(grid, A))

    coords = _pair_indices(grid)
    d = np.stack([coords[a][None, :] - coords[a][:, None] for a in range(n)])
    keep = np.all(np.abs(d) <= half, axis=0)
    rows, cols = np.nonzero(keep)
    sep = d[:, rows, cols]
    weights = 0.5 ** np.sum(np.abs(sep) == half, axis=0)
    z_index = tuple(coords[a][rows] + coords[a][cols] for a in range(n))
    d_index = tuple((sep[a] + half) % N for a in range(n))
    spread = np.zeros((2 * N - 1,) * n + (N,) * n, dtype=complex)
    np.add.at(spread, z_index + d_index, kernel[rows, cols] * weights)

    for axis in range(n):
        d_axis = n + axis
        shape = list(spread.shape)
        shape[axis] = N
        nodes = np.empty(shape, dtype=complex)
        for j in range(N):
            column = np.take(spread, j, axis=d_axis)
            mapped = np.tensordot(
                _node_map(N, abs(j - half)), np.moveaxis(column, axis, 0), axes=(1, 0)
            )
            target = [slice(None)] * len(shape)
            target[d_axis] = j
            nodes[tuple(target)] = np.moveaxis(mapped, 0, axis)
        spread = nodes

    d_axes = tuple(range(n, 2 * n))
    values = scipy.fft.fftshift(
        scipy.fft.ifftn(scipy.fft.ifftshift(spread, axes=d_axes), axes=d_axes), axes=d_axes
    )
    return SymbolField(grid, values.reshape(grid.size, grid.size))


def apply(M, u):
    """
    Działa macierzą operatora na stan.

    Args:
        M (OperatorMatrix): Operator
        u (GridFunction): Stan

    Returns:
        GridFunction: M u
    """
    if M.grid != u.grid:
        raise PreconditionError(f"Niezgodne siatki operatora i stanu: {M.grid}, {u.grid}")
    return GridFunction(M.grid, M.entries @ u.values)


def _spectral_derivative_1d(N, L):
    xi = scipy.fft.fftfreq(N, d=2.0 * L / N) * 2.0 * np.pi
    return scipy.fft.ifft(xi[:, None] * scipy.fft.fft(np.eye(N), axis=0), axis=0)


def spectral_momentum(grid, j):
    """Macierz D_j = -i d_j realizowana przez FFT na siatce."""
    mats = [np.eye(grid.N)] * grid.n
    mats[j] = _spectral_derivative_1d(grid.N, grid.L)
    out = np.ones((1, 1), dtype=complex)
    for mat in mats:
        out = np.kron(out, mat)
    return out


def magnetic_momentum(grid, A, j):
    """
    Pęd magnetyczny D_j - A_j(X) zbudowany bezpośrednio z FFT.

    Returns:
        OperatorMatrix: Macierz w schemacie "magnetic"
    """
    entries = spectral_momentum(grid, j) - np.diag(A(grid.x_points)[:, j])
    return OperatorMatrix(grid, entries, "magnetic", A.label)


def interior_states(grid, count=8, seed=DEFAULT_SEED, width=None, spread=None, momentum=None):
    """
    Losowe paczki falowe gaussowskie skupione w środkowej części pudła.

    Args:
        grid (PhaseGrid): Siatka
        count (int): Liczba stanów
        seed (int): Ziarno generatora
        width (float, optional): Szerokość paczki (domyślnie L / 8)
        spread (float, optional): Zakres losowania środków (domyślnie L / 8)
        momentum (float, optional): Zakres losowania pędów (domyślnie nyquist / 8)

    Returns:
        ndarray: Macierz (size, count) z kolumnami o normie 1
    """
    rng = np.random.default_rng(seed)
    sigma = grid.L / 8.0 if width is None else float(width)
    spread = grid.L / 8.0 if spread is None else float(spread)
    momentum = grid.nyquist / 8.0 if momentum is None else float(momentum)
    centers = rng.uniform(-spread, spread, size=(count, grid.n))
    momenta = rng.uniform(-momentum, momentum, size=(count, grid.n))
    x = grid.x_points
    states = np.empty((grid.size, count), dtype=complex)
    for c in range(count):
        envelope = np.exp(-np.sum((x - centers[c]) ** 2, axis=-1) / (2.0 * sigma**2))
        states[:, c] = envelope * np.exp(1j * x @ momenta[c])
    return states / np.linalg.norm(states, axis=0)


def resolved_states(grid, count=4, seed=DEFAULT_SEED):
    """
    Stany próbne rozdzielane przez siatkę do poziomu błędu zaokrągleń.

    Szerokość sigma^2 = N h^2 / (2 pi) wyrównuje zanik przy brzegu pudła
    i zanik widma przy częstości Nyquista.
    """
    width = np.sqrt(grid.N * grid.h**2 / (2.0 * np.pi))
    return interior_states(
        grid, count, seed, width=width, spread=grid.h / 2.0, momentum=grid.dxi / 2.0
    )


def state_difference(M1, M2, states, rows=None):
    """
    Względna różnica ||(M1 - M2) U|| / ||M1 U|| na stanach próbnych.

    Z maską rows porównywane są tylko wybrane wiersze (np. wnętrze pudła).
    """
    first = M1.entries @ states
    second = M2.entries @ states
    if rows is not None:
        first, second = first[rows], second[rows]
    diff = np.linalg.norm(first - second)
    scale = np.linalg.norm(first)
    return float(diff / scale) if scale > 0 else float(diff)


def commutator_residual(grid, A, B, states=None):
    """
    Residuum [Op^A(xi_1), Op^A(xi_2)] - sigma i B_12(X) na stanach próbnych,
    mierzone na wierszach z wnętrza pudła.

    Returns:
        float: ||(C - sigma i B_12) U|| / ||U||
    """
    if grid.n < 2:
        raise PreconditionError("Relacja komutacyjna wymaga wymiaru n >= 2")
    states = resolved_states(grid) if states is None else states
    p1 = op_magnetic(sample(lambda x, xi: xi[..., 0] + 0.0 * x[..., 0], grid), A)
    p2 = op_magnetic(sample(lambda x, xi: xi[..., 1] + 0.0 * x[..., 0], grid), A)
    commutator = p1.entries @ p2.entries - p2.entries @ p1.entries
    target = SIGN_SIGMA * 1j * np.diag(
        np.broadcast_to(np.asarray(B.component(0, 1, grid.x_points), dtype=complex), (grid.size,))
    )
    rows = grid.interior_mask()
    diff = np.linalg.norm(((commutator - target) @ states)[rows])
    return float(diff / np.linalg.norm(states))


def gauge_covariance_residual(f, A, phi, scheme="magnetic", states=None):
    """
    Defekt kowariancji cechowania e^{i phi} Op(f; A) e^{-i phi} vs Op(f; A + grad phi).

    Args:
        f (SymbolField): Symbol (dla "minimal" wymagana funkcja źródłowa)
        A (VectorPotential): Potencjał
        phi (ScalarPotential): Funkcja cechowania
        scheme (str): "magnetic" albo "minimal"
        states (ndarray, optional): Stany próbne; bez nich norma Frobeniusa

    Returns:
        float: Względny defekt
    """
    grid = f.grid
    shifted = gauge_transform(A, phi)
    if scheme == "magnetic":
        M1 = op_magnetic(f, A)
        M2 = op_magnetic(f, shifted)
    elif scheme == "minimal":
        if f.closure is None:
            raise PreconditionError("Kwantyzacja minimalna wymaga symbolu analitycznego")
        M1 = op_minimal(f.closure, A, grid)
        M2 = op_minimal(f.closure, shifted, grid)
    else:
        raise PreconditionError(f"Nieobsługiwany schemat dla testu cechowania: {scheme}")

    phase = np.exp(1j * np.asarray(phi.value(grid.x_points), dtype=float))
    conjugated = OperatorMatrix(
        grid, phase[:, None] * M1.entries * np.conj(phase)[None, :], M2.scheme, M2.potential
    )
    if states is not None:
        return state_difference(conjugated, M2, states)
    scale = np.linalg.norm(M1.entries)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(conjugated.entries - M2.entries) / scale)
