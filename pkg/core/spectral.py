"""
Diagnostyka widmowa operatorów magnetycznych: widma, półograniczoność,
magnetyczne normy Sobolewa, potęgi ułamkowe i trzy hamiltoniany relatywistyczne.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg

from config import DEFAULT_GRID, HERMITICITY_TOLERANCE, INTERIOR_FRACTION, SIGN_SIGMA, TOOL_VERSION

from .errors import PreconditionError
from .quantize import (
    OperatorMatrix,
    magnetic_momentum,
    op_magnetic,
    op_minimal,
    symbol_of,
)
from .symbols import GridFunction, PhaseGrid, builtin, sample


@dataclass
class SpectrumReport:
    """
    Posortowane wartości własne zsymetryzowanej macierzy.

    Args:
        eigenvalues (ndarray): Wartości własne rosnąco
        hermiticity_defect (float): Defekt ||M - M^*|| / ||M||
        min_eig (float): Najmniejsza wartość własna
        interior_rank (int): Liczba węzłów we wnętrzu (size, gdy bez kompresji)
        grid (PhaseGrid): Siatka
    """

    eigenvalues: np.ndarray = field(repr=False)
    hermiticity_defect: float
    min_eig: float
    interior_rank: int
    grid: PhaseGrid

    def to_json(self):
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "hermiticity_defect": float(self.hermiticity_defect),
            "min_eig": float(self.min_eig),
            "interior_rank": int(self.interior_rank),
            "grid": {"n": self.grid.n, "N": self.grid.N, "L": float(self.grid.L)},
            "sigma": SIGN_SIGMA,
            "version": TOOL_VERSION,
        }


def hermiticity_report(M, tolerance=HERMITICITY_TOLERANCE):
    """
    Raport samosprzężoności na poziomie macierzy.

    Returns:
        dict: {"defect", "max_abs_defect", "hermitian"}
    """
    diff = M.entries - M.entries.conj().T
    defect = M.hermiticity_defect()
    return {
        "defect": defect,
        "max_abs_defect": float(np.max(np.abs(diff))) if diff.size else 0.0,
        "hermitian": bool(defect <= tolerance),
    }


def _symmetrized(M, tolerance):
    defect = M.hermiticity_defect()
    if defect > tolerance:
        raise PreconditionError(
            f"Macierz nie jest hermitowska: defekt {defect:.3e} > {tolerance:.1e}"
        )
    return 0.5 * (M.entries + M.entries.conj().T), defect


def _compress(H, grid, fraction=INTERIOR_FRACTION):
    """Kompresja do stanów o nośniku w środkowej części pudła."""
    mask = grid.interior_mask(fraction)
    return H[np.ix_(mask, mask)], int(mask.sum())


def spectrum(M, interior_only=False, tolerance=HERMITICITY_TOLERANCE):
    """
    Widmo zsymetryzowanej macierzy (M + M^*)/2.

    Args:
        M (OperatorMatrix): Operator
        interior_only (bool): Czy kompresować do środkowej połowy pudła
        tolerance (float): Dopuszczalny defekt hermitowskości

    Returns:
        SpectrumReport: Raport z wartościami własnymi
    """
    H, defect = _symmetrized(M, tolerance)
    rank = M.grid.size
    if interior_only:
        H, rank = _compress(H, M.grid)
    eigenvalues = scipy.linalg.eigh(H, eigvals_only=True)
    return SpectrumReport(eigenvalues, defect, float(eigenvalues[0]), rank, M.grid)


def garding_check(p, A, Ns=(8, 16, 32), L=DEFAULT_GRID["L"], R=1.0, lower_bound=1.0):
    """
    Sprawdzenie półograniczoności z dołu Op^A(p) przy zagęszczaniu siatki.

    Args:
        p (SymbolClosure): Symbol rzeczywisty z class_meta (m, rho, delta)
        A (VectorPotential): Potencjał
        Ns (tuple): Liczby węzłów na oś
        L (float): Połowa szerokości pudła
        R (float): Promień, powyżej którego wymagane jest Re p > 0
        lower_bound (float): Stała C_1 w warunku min eig >= -C_1

    Returns:
        dict: {"Ns", "min_eigs", "lower_bound", "bounded"}
    """
    meta = getattr(p, "class_meta", None)
    if meta is None:
        raise PreconditionError("Test Gårdinga wymaga symbolu z deklaracją klasy")
    m = meta[0]
    min_eigs = []
    for N in Ns:
        grid = PhaseGrid(A.dim, L, N)
        f = sample(p, grid)
        high = np.linalg.norm(grid.xi_points, axis=-1) >= R
        region = grid.interior_mask()[:, None] & high[None, :]
        weights = np.linalg.norm(grid.xi_points, axis=-1)[None, :] ** m
        ratio = f.values.real / np.where(weights > 0, weights, 1.0)
        if not np.any(region) or np.min(ratio[region]) <= 0:
            raise PreconditionError(
                f"Symbol nie jest eliptyczny od dołu dla |xi| >= {R} (N = {N})"
            )
        report = spectrum(op_magnetic(f, A), interior_only=True)
        min_eigs.append(report.min_eig)
        print(f"Gårding: N = {N}, min eig = {report.min_eig:.6f}")
    bounded = bool(np.all(np.isfinite(min_eigs)) and min(min_eigs) >= -lower_bound)
    return {
        "Ns": list(Ns),
        "min_eigs": [float(v) for v in min_eigs],
        "lower_bound": -float(lower_bound),
        "bounded": bounded,
    }


def sobolev_norm(u, s, A):
    """
    Magnetyczna norma Sobolewa (||P_s u||^2 + ||u||^2)^{1/2}, P_s = Op^A(<xi>^s).

    Args:
        u (GridFunction): Stan
        s (float): Rząd (s >= 0)
        A (VectorPotential): Potencjał

    Returns:
        float: Norma
    """
    if s < 0:
        raise PreconditionError(f"Normy Sobolewa rzędu ujemnego nieobsługiwane (s = {s})")
    P = op_magnetic(sample(builtin("bracket", {"m": s}), u.grid), A)
    Pu = GridFunction(u.grid, P.entries @ u.values)
    return float(np.sqrt(Pu.norm() ** 2 + u.norm() ** 2))


def fourier_sobolev_norm(u, s):
    """Płaska norma Sobolewa liczona mnożnikiem Fouriera <xi>^s."""
    grid = u.grid
    shape = (grid.N,) * grid.n
    freqs = scipy.fft.fftfreq(grid.N, d=grid.h) * 2.0 * np.pi
    mesh = np.meshgrid(*([freqs] * grid.n), indexing="ij")
    multiplier = (1.0 + sum(k**2 for k in mesh)) ** (s / 2.0)
    Pu = scipy.fft.ifftn(multiplier * scipy.fft.fftn(u.values.reshape(shape))).ravel()
    return float(np.sqrt(GridFunction(grid, Pu).norm() ** 2 + u.norm() ** 2))


def sobolev_equivalent_norm(u, A, m=1):
    """
    Norma równoważna (sum_{|alpha| <= m} ||(D - A)^alpha u||^2)^{1/2}.

    Iloczyny pędów magnetycznych brane są w kolejności Pi_1^a1 ... Pi_n^an.
    """
    if m < 0 or m > 2:
        raise PreconditionError(f"Obsługiwane rzędy m = 0, 1, 2, otrzymano {m}")
    grid = u.grid
    momenta = [magnetic_momentum(grid, A, j).entries for j in range(grid.n)]
    total = 0.0
    for alpha in itertools.product(range(m + 1), repeat=grid.n):
        if sum(alpha) > m:
            continue
        v = u.values
        for j in reversed(range(grid.n)):
            for _ in range(alpha[j]):
                v = momenta[j] @ v
        total += GridFunction(grid, v).norm() ** 2
    return float(np.sqrt(total))


def fractional_power(M, s, tolerance=HERMITICITY_TOLERANCE, return_shift=False):
    """
    Potęga M^s przez rozkład własny macierzy hermitowskiej.

    Gdy najmniejsza wartość własna jest mniejsza od 1, macierz jest
    przesuwana o 1 - lambda_min, a przesunięcie jest raportowane.

    Args:
        M (OperatorMatrix): Operator hermitowski
        s (float): Wykładnik, -1 <= s <= 1
        return_shift (bool): Czy zwrócić także przesunięcie

    Returns:
        OperatorMatrix: M^s (oraz przesunięcie, jeśli return_shift)
    """
    if not -1.0 <= s <= 1.0:
        raise PreconditionError(f"Wykładnik potęgi poza zakresem [-1, 1]: {s}")
    H, _ = _symmetrized(M, tolerance)
    eigenvalues, vectors = scipy.linalg.eigh(H)
    shift = 0.0
    if eigenvalues[0] < 1.0:
        shift = 1.0 - float(eigenvalues[0])
        print(f"Przesunięcie widma o {shift:.6f} przed potęgowaniem")
    powered = (vectors * (eigenvalues + shift) ** s) @ vectors.conj().T
    result = OperatorMatrix(M.grid, powered, M.scheme, M.potential)
    return (result, shift) if return_shift else result


def principal_symbol_check(M, s, p, A, xi_min=None):
    """
    Względne odchylenie symbolu M^s od (p + shift)^s na obszarze {|xi| >= xi_min, x we wnętrzu}.

    shift to przesunięcie widma zastosowane przez fractional_power; symbol
    porównywany jest z tym samym przesuniętym symbolem.

    Args:
        M (OperatorMatrix): Operator Op^A(p)
        s (float): Wykładnik
        p (SymbolField): Symbol M
        A (VectorPotential): Potencjał zgodny z M
        xi_min (float, optional): Próg |xi| (domyślnie połowa promienia Nyquista)

    Returns:
        dict: {"deviation": max |sym(M^s) - (p + shift)^s| / |(p + shift)^s|, "shift"}
    """
    grid = M.grid
    xi_min = 0.5 * grid.nyquist if xi_min is None else xi_min
    region = grid.interior_mask()[:, None] & (
        np.linalg.norm(grid.xi_points, axis=-1) >= xi_min
    )[None, :]
    if not np.any(region):
        raise PreconditionError(f"Obszar |xi| >= {xi_min} nie zawiera węzłów siatki")
    powered, shift = fractional_power(M, s, return_shift=True)
    symbol = symbol_of(powered, A if M.scheme == "magnetic" else None)
    target = (np.asarray(p.values, dtype=complex) + shift) ** s
    deviation = np.abs(symbol.values - target)[region] / np.abs(target[region])
    return {"deviation": float(np.max(deviation)), "shift": float(shift)}


def relativistic_triple(A, grid, return_shift=False):
    """
    Trzy kwantyzacje energii relatywistycznej:
    Op^A(<xi>), Op_A(<xi>) i ((D - A)^2 + 1)^{1/2} = (Op^A(|xi|^2) + 1)^{1/2}.

    Returns:
        tuple: (H1, H2, H3) jako OperatorMatrix (oraz przesunięcie widma H3, jeśli return_shift)
    """
    energy = builtin("bracket", {"m": 1.0})
    H1 = op_magnetic(sample(energy, grid), A)
    H2 = op_minimal(energy, A, grid)
    H3, shift = fractional_power(
        op_magnetic(sample(builtin("kinetic"), grid), A) + 1.0, 0.5, return_shift=True
    )
    return (H1, H2, H3, shift) if return_shift else (H1, H2, H3)


def _interior_norm(entries, grid):
    block, _ = _compress(entries, grid)
    return float(np.linalg.norm(block, 2))


def triple_differences(A, Ns=(8, 16, 32), L=DEFAULT_GRID["L"]):
    """
    Normy operatorowe (we wnętrzu) różnic par hamiltonianów przy zagęszczaniu siatki.

    Returns:
        dict: {"Ns", "magnetic_minimal", "magnetic_root", "minimal_root", "floors", "root_shifts"}
    """
    report = {
        "Ns": list(Ns),
        "magnetic_minimal": [],
        "magnetic_root": [],
        "minimal_root": [],
        "floors": [],
        "root_shifts": [],
    }
    for N in Ns:
        grid = PhaseGrid(A.dim, L, N)
        H1, H2, H3, shift = relativistic_triple(A, grid, return_shift=True)
        report["root_shifts"].append(shift)
        report["magnetic_minimal"].append(_interior_norm(H1.entries - H2.entries, grid))
        report["magnetic_root"].append(_interior_norm(H1.entries - H3.entries, grid))
        report["minimal_root"].append(_interior_norm(H2.entries - H3.entries, grid))
        report["floors"].append(min(spectrum(H, interior_only=True).min_eig for H in (H1, H2, H3)))
    return report


def boundedness_trend(f, A, Ns=(8, 16, 32), L=DEFAULT_GRID["L"]):
    """
    Normy operatorowe Op^A(f) dla symbolu klasy S^0 przy zagęszczaniu siatki.

    Returns:
        dict: {"Ns", "norms"}
    """
    norms = []
    for N in Ns:
        grid = PhaseGrid(A.dim, L, N)
        norms.append(float(np.linalg.norm(op_magnetic(sample(f, grid), A).entries, 2)))
    return {"Ns": list(Ns), "norms": norms}
