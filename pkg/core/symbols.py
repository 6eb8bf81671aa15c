"""
Siatki przestrzeni fazowej, pola symboli, różniczkowanie numeryczne
i dwa nawiasy Poissona (kanoniczny i magnetyczny).
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from config import INTERIOR_FRACTION, MAX_DERIVATIVE_ORDER, SIGN_SIGMA

from .errors import SymbolError

# Centralne szablony 4. rzędu: (licznik, mianownik), przesunięcia -r..r
_CENTRAL_STENCILS = {
    1: (np.array([1.0, -8.0, 0.0, 8.0, -1.0]), 12.0),
    2: (np.array([-1.0, 16.0, -30.0, 16.0, -1.0]), 12.0),
    3: (np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]), 8.0),
    4: (np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]), 6.0),
}
_PAD = 3


@dataclass(frozen=True)
class PhaseGrid:
    """
    Dyskretne pudło [-L, L)^n i dualna sieć częstości o kroku pi / L.

    Args:
        n (int): Wymiar
        L (float): Połowa szerokości pudła
        N (int): Liczba węzłów na oś (parzysta)
    """

    n: int
    L: float
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise SymbolError(f"Wymiar siatki musi być >= 1, otrzymano {self.n}")
        if self.N < 4 or self.N % 2:
            raise SymbolError(f"N musi być parzyste i >= 4, otrzymano {self.N}")
        if self.L <= 0:
            raise SymbolError(f"L musi być dodatnie, otrzymano {self.L}")

    @property
    def h(self):
        return 2.0 * self.L / self.N

    @property
    def dxi(self):
        return np.pi / self.L

    @property
    def size(self):
        return self.N**self.n

    @property
    def x_axis(self):
        return -self.L + self.h * np.arange(self.N)

    @property
    def xi_axis(self):
        return (np.arange(self.N) - self.N // 2) * self.dxi

    @property
    def midpoint_axis(self):
        return -self.L + 0.5 * self.h * np.arange(2 * self.N - 1)

    @property
    def x_points(self):
        return _lattice_points(self.x_axis, self.n)

    @property
    def xi_points(self):
        return _lattice_points(self.xi_axis, self.n)

    @property
    def nyquist(self):
        return np.pi / self.h

    def interior_mask(self, fraction=INTERIOR_FRACTION):
        """
        Maska węzłów x leżących w środkowej części pudła (|x_j| < fraction * L).
        """
        return np.all(np.abs(self.x_points) < fraction * self.L, axis=-1)

    def band_mask(self, fraction=INTERIOR_FRACTION):
        """Maska częstości rozdzielanych przez siatkę (|xi_j| < fraction * nyquist)."""
        return np.all(np.abs(self.xi_points) < fraction * self.nyquist, axis=-1)

    def key(self):
        return (self.n, float(self.L), self.N)


def _lattice_points(axis, n):
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


@dataclass(frozen=True)
class SymbolClosure:
    """
    Analityczny symbol (x, xi) -> complex z metadanymi.

    Args:
        func (callable): Funkcja zwektoryzowana po ostatniej osi x i xi
        name (str): Nazwa symbolu
        class_meta (tuple, optional): Znacznik klasy (m, rho, delta)
        envelope (dict, optional): Obwiednia gaussowska (x0, xi0, sx, sk) dla wyroczni
    """

    func: Callable
    name: str = "custom"
    class_meta: Optional[tuple] = None
    envelope: Optional[dict] = None

    def __call__(self, x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        return np.broadcast_to(np.asarray(self.func(x, xi), dtype=complex), shape)


@dataclass(frozen=True)
class SymbolField:
    """
    Symbol na sieci przestrzeni fazowej: values[x_node, xi_node].
    """

    grid: PhaseGrid
    values: np.ndarray
    closure: Optional[Callable] = None
    class_meta: Optional[tuple] = None

    def __post_init__(self):
        expected = (self.grid.size, self.grid.size)
        if self.values.shape != expected:
            raise SymbolError(
                f"Kształt wartości {self.values.shape} niezgodny z siatką {expected}"
            )

    def lattice(self):
        """Wartości jako tablica o 2n osiach (x_1..x_n, xi_1..xi_n)."""
        return self.values.reshape((self.grid.N,) * (2 * self.grid.n))

    def conj(self):
        return SymbolField(self.grid, np.conj(self.values))

    def interior(self, fraction=INTERIOR_FRACTION):
        return self.values[self.grid.interior_mask(fraction)]

    def _combine(self, other, op):
        if isinstance(other, SymbolField):
            _check_grid(self, other)
            return SymbolField(self.grid, op(self.values, other.values))
        return SymbolField(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return SymbolField(self.grid, -self.values)


@dataclass(frozen=True)
class GridFunction:
    """Stan u na węzłach x."""

    grid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (self.grid.size,):
            raise SymbolError(
                f"Kształt stanu {self.values.shape} niezgodny z siatką ({self.grid.size},)"
            )
        if not np.all(np.isfinite(self.values)):
            raise SymbolError("Stan zawiera wartości nieskończone lub NaN")

    def norm(self):
        """Norma L^2 z wagą h^n."""
        return float(np.sqrt(self.grid.h**self.grid.n * np.sum(np.abs(self.values) ** 2)))


def _check_grid(f, g):
    if f.grid != g.grid:
        raise SymbolError(f"Niezgodne siatki: {f.grid} i {g.grid}")


def sample(closure, grid):
    """
    Próbkuje symbol analityczny na sieci przestrzeni fazowej.

    Args:
        closure (callable): Funkcja (x, xi) -> complex
        grid (PhaseGrid): Siatka

    Returns:
        SymbolField: Pole z zachowaną funkcją źródłową
    """
    values = np.array(
        closure(grid.x_points[:, None, :], grid.xi_points[None, :, :]), dtype=complex
    )
    values = np.broadcast_to(values, (grid.size, grid.size)).copy()
    bad = ~np.isfinite(values)
    if np.any(bad):
        ix, ik = np.argwhere(bad)[0]
        raise SymbolError(
            f"Wartość nieskończona w węźle x={grid.x_points[ix].tolist()}, "
            f"xi={grid.xi_points[ik].tolist()}"
        )
    return SymbolField(grid, values, closure, getattr(closure, "class_meta", None))


def bracket(xi, m=1.0):
    """<xi>^m = (1 + |xi|^2)^{m/2}."""
    return (1.0 + np.sum(np.asarray(xi) ** 2, axis=-1)) ** (m / 2.0)


def builtin(name, params=None):
    """
    Zwraca wbudowany symbol analityczny.

    Dostępne nazwy: one, constant(c), bracket(m), kinetic, monomial(alpha),
    cubic(indices), gaussian(x0, xi0, sx, sk, amp), position(j), x_xi(j, k),
    potential(v0, width).

    Args:
        name (str): Nazwa symbolu
        params (dict, optional): Parametry

    Returns:
        SymbolClosure: Symbol z metadanymi klasy
    """
    p = dict(params or {})

    if name == "one":
        return SymbolClosure(lambda x, xi: np.ones(np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])), name, (0.0, 1.0, 0.0))

    if name == "constant":
        c = complex(p.get("c", 1.0))
        return SymbolClosure(
            lambda x, xi: np.full(np.broadcast_shapes(x.shape[:-1], xi.shape[:-1]), c),
            name,
            (0.0, 1.0, 0.0),
        )

    if name == "bracket":
        m = float(p.get("m", 1.0))
        return SymbolClosure(lambda x, xi: bracket(xi, m) + 0.0 * x[..., 0], name, (m, 1.0, 0.0))

    if name == "kinetic":
        return SymbolClosure(
            lambda x, xi: np.sum(xi**2, axis=-1) + 0.0 * x[..., 0], name, (2.0, 1.0, 0.0)
        )

    if name == "monomial":
        alpha = tuple(int(a) for a in p.get("alpha", (1,)))

        def monomial(x, xi):
            out = 1.0 + 0.0 * x[..., 0] + 0.0 * xi[..., 0]
            for j, a in enumerate(alpha):
                out = out * xi[..., j] ** a
            return out

        return SymbolClosure(monomial, name, (float(sum(alpha)), 1.0, 0.0))

    if name == "cubic":
        j, k, l = (int(i) for i in p.get("indices", (0, 1, 0)))
        return SymbolClosure(
            lambda x, xi: xi[..., j] * xi[..., k] * xi[..., l] + 0.0 * x[..., 0],
            name,
            (3.0, 1.0, 0.0),
        )

    if name == "gaussian":
        x0 = np.asarray(p.get("x0", 0.0), dtype=float)
        xi0 = np.asarray(p.get("xi0", 0.0), dtype=float)
        sx = float(p.get("sx", 1.0))
        sk = float(p.get("sk", 1.0))
        amp = complex(p.get("amp", 1.0))

        def gaussian(x, xi):
            return amp * np.exp(
                -np.sum((x - x0) ** 2, axis=-1) / (2.0 * sx**2)
                - np.sum((xi - xi0) ** 2, axis=-1) / (2.0 * sk**2)
            )

        envelope = {"x0": x0, "xi0": xi0, "sx": sx, "sk": sk}
        return SymbolClosure(gaussian, name, (0.0, 1.0, 0.0), envelope)

    if name == "position":
        j = int(p.get("j", 0))
        return SymbolClosure(lambda x, xi: x[..., j] + 0.0 * xi[..., 0], name, (0.0, 1.0, 0.0))

    if name == "x_xi":
        j = int(p.get("j", 0))
        k = int(p.get("k", 0))
        return SymbolClosure(lambda x, xi: x[..., j] * xi[..., k], name, (1.0, 1.0, 0.0))

    if name == "potential":
        v0 = float(p.get("v0", 1.0))
        width = float(p.get("width", 1.0))
        return SymbolClosure(
            lambda x, xi: v0 * np.exp(-np.sum(x**2, axis=-1) / (2.0 * width**2)) + 0.0 * xi[..., 0],
            name,
            (0.0, 1.0, 0.0),
        )

    raise SymbolError(f"Nieznany symbol wbudowany: {name}")


def parse_symbol_spec(text):
    """
    Parsuje zapis "nazwa:klucz=wartość,klucz=wartość"; wektory rozdzielane ';'.

    Returns:
        tuple: (nazwa, parametry)
    """
    name, _, rest = text.strip().partition(":")
    params = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise SymbolError(f"Brak '=' w parametrze symbolu: {item}")
        parts = value.split(";")
        try:
            parsed = [complex(v) if "j" in v else float(v) for v in parts]
        except ValueError:
            raise SymbolError(f"Niepoprawna wartość parametru {key}: {value}")
        params[key.strip()] = parsed if len(parsed) > 1 else parsed[0]
    if "alpha" in params or "indices" in params:
        for key in ("alpha", "indices"):
            if key in params:
                params[key] = tuple(int(v.real if isinstance(v, complex) else v) for v in np.atleast_1d(params[key]))
    return name, params


@lru_cache(maxsize=64)
def _fd_weights(offsets, order):
    offsets = np.asarray(offsets, dtype=float)
    width = len(offsets)
    vander = np.vander(offsets, width, increasing=True).T
    rhs = np.zeros(width)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(vander, rhs)


@lru_cache(maxsize=64)
def _fd_matrix(points, order):
    """
    Macierz różniczkowania 4. rzędu: szablon centralny we wnętrzu,
    jednostronny szablon o szerokości order + 4 przy brzegach.
    """
    numer, denom = _CENTRAL_STENCILS[order]
    radius = len(numer) // 2
    width = order + 4
    mat = np.zeros((points, points))
    for i in range(points):
        if radius <= i < points - radius:
            mat[i, i - radius : i + radius + 1] = numer / denom
            continue
        start = min(max(i - width // 2, 0), points - width)
        offsets = tuple(float(k - i) for k in range(start, start + width))
        mat[i, start : start + width] = _fd_weights(offsets, order)
    return mat


def _apply_along(mat, values, axis):
    moved = np.moveaxis(values, axis, 0)
    out = np.tensordot(mat, moved, axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def derivative(f, axis, order=1):
    """
    Pochodna cząstkowa symbolu różnicami skończonymi 4. rzędu.

    Dla pól z funkcją źródłową wartości poza siecią są dopróbkowywane,
    więc szablon centralny działa także w węzłach brzegowych.

    Args:
        f (SymbolField): Symbol
        axis (tuple): ("x", j) albo ("xi", j)
        order (int): Rząd pochodnej (0..4)

    Returns:
        SymbolField: Pochodna (bez funkcji źródłowej)
    """
    kind, j = axis
    grid = f.grid
    if kind not in ("x", "xi") or not 0 <= j < grid.n:
        raise SymbolError(f"Niepoprawna oś różniczkowania: {axis}")
    if order == 0:
        return SymbolField(grid, f.values.copy())
    if not 1 <= order <= MAX_DERIVATIVE_ORDER:
        raise SymbolError(f"Rząd pochodnej {order} nieobsługiwany (maksimum {MAX_DERIVATIVE_ORDER})")

    spacing = grid.h if kind == "x" else grid.dxi
    lattice_axis = j if kind == "x" else grid.n + j

    if f.closure is not None:
        values = _padded_closure_values(f, lattice_axis)
        numer, denom = _CENTRAL_STENCILS[order]
        radius = len(numer) // 2
        mat = np.zeros((grid.N, grid.N + 2 * _PAD))
        for i in range(grid.N):
            c = i + _PAD
            mat[i, c - radius : c + radius + 1] = numer / denom
    else:
        values = f.lattice()
        mat = _fd_matrix(grid.N, order)

    out = _apply_along(mat, values, lattice_axis) / spacing**order
    return SymbolField(grid, out.reshape(grid.size, grid.size))


def _padded_closure_values(f, lattice_axis):
    grid = f.grid
    axes = [grid.x_axis] * grid.n + [grid.xi_axis] * grid.n
    spacing = grid.h if lattice_axis < grid.n else grid.dxi
    base = axes[lattice_axis]
    axes[lattice_axis] = np.concatenate(
        [base[0] - spacing * np.arange(_PAD, 0, -1), base, base[-1] + spacing * np.arange(1, _PAD + 1)]
    )
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    x = np.stack(np.broadcast_arrays(*mesh[: grid.n]), axis=-1)
    xi = np.stack(np.broadcast_arrays(*mesh[grid.n :]), axis=-1)
    return np.asarray(f.closure(x, xi), dtype=complex)


def poisson(f, g):
    """
    Kanoniczny nawias Poissona {f, g} = sum_j (d_xi_j f d_x_j g - d_x_j f d_xi_j g).
    """
    _check_grid(f, g)
    total = np.zeros_like(f.values)
    for j in range(f.grid.n):
        total += derivative(f, ("xi", j)).values * derivative(g, ("x", j)).values
        total -= derivative(f, ("x", j)).values * derivative(g, ("xi", j)).values
    return SymbolField(f.grid, total)


def field_term(f, g, B):
    """sum_jk B_jk(x) d_xi_j f d_xi_k g na sieci."""
    _check_grid(f, g)
    grid = f.grid
    total = np.zeros_like(f.values)
    if B.is_zero:
        return SymbolField(grid, total)
    Bx = B.matrix(grid.x_points)
    df = [derivative(f, ("xi", j)).values for j in range(grid.n)]
    dg = [derivative(g, ("xi", k)).values for k in range(grid.n)]
    for j in range(grid.n):
        for k in range(grid.n):
            if j != k:
                total += Bx[:, j, k][:, None] * df[j] * dg[k]
    return SymbolField(grid, total)


def poisson_B(f, g, B):
    """
    Magnetyczny nawias Poissona {f, g}_B = {f, g} - sigma sum_jk B_jk d_xi_j f d_xi_k g.
    """
    if B.dim != f.grid.n:
        raise SymbolError(f"Wymiar pola {B.dim} niezgodny z siatką {f.grid.n}")
    bracket_values = poisson(f, g).values
    if B.is_zero:
        return SymbolField(f.grid, bracket_values)
    return SymbolField(f.grid, bracket_values - SIGN_SIGMA * field_term(f, g, B).values)


def mixed_derivative(f, alpha, beta):
    """
    Pochodna d_x^alpha d_xi^beta jako złożenie pochodnych jednoosiowych.
    """
    out = f
    for j, a in enumerate(alpha):
        if a:
            out = derivative(out, ("x", j), a)
    for j, b in enumerate(beta):
        if b:
            out = derivative(out, ("xi", j), b)
    return out


def seminorm_report(f, m, rho=1.0, delta=0.0, max_order=2):
    """
    Diagnostyczne półnormy klasy S^m_{rho,delta} we wnętrzu pudła:
    sup <xi>^{-m + rho|beta| - delta|alpha|} |d_x^alpha d_xi^beta f|.

    Returns:
        dict: {"alpha|beta": wartość}
    """
    grid = f.grid
    mask = grid.interior_mask()
    weight_base = bracket(grid.xi_points)[None, :]
    report = {}
    for total in range(max_order + 1):
        for combo in itertools.product(range(total + 1), repeat=2 * grid.n):
            if sum(combo) != total:
                continue
            alpha, beta = combo[: grid.n], combo[grid.n :]
            if any(a > MAX_DERIVATIVE_ORDER for a in combo):
                continue
            d = mixed_derivative(f, alpha, beta).values[mask]
            exponent = -m + rho * sum(beta) - delta * sum(alpha)
            value = float(np.max(np.abs(d) * weight_base**exponent)) if d.size else 0.0
            report[f"{alpha}|{beta}"] = value
    return report
