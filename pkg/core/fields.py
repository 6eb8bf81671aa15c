"""
Pola magnetyczne, potencjały wektorowe, cyrkulacje i strumienie oraz czynniki
fazowe Lambda^A, Omega^B i omega_B.

Pola i potencjały są funkcjami (callable) zwektoryzowanymi po ostatniej osi:
punkt x ma kształt (..., n), wynik ma kształt (...).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from config import FLUX_QUADRATURE_ORDER, QUADRATURE_ORDER

from .errors import PreconditionError
from .quadrature_utils import gauss_legendre_unit


@dataclass(frozen=True)
class MagneticField:
    """
    Zamknięta 2-forma B przechowywana jako składowe B_jk dla j < k.

    Args:
        dim (int): Wymiar n
        pairs (dict): {(j, k): callable(x)} dla j < k (indeksy od zera)
        decay_epsilon (float, optional): Wykładnik zaniku z hipotezy o polu
        label (str, optional): Identyfikator pola (klucz cache i raportów)
        constant (bool): Czy pole jest stałe (zamknięta postać cechowania)
    """

    dim: int
    pairs: dict = field(default_factory=dict)
    decay_epsilon: Optional[float] = None
    label: Optional[str] = None
    constant: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"Wymiar pola musi być >= 1, otrzymano {self.dim}")
        for j, k in self.pairs:
            if not (0 <= j < k < self.dim):
                raise ValueError(
                    f"Składowa ({j}, {k}) poza zakresem j < k < {self.dim}"
                )
        if self.decay_epsilon is not None and self.decay_epsilon <= 0:
            raise ValueError("decay_epsilon musi być dodatnie")

    @property
    def is_zero(self):
        return not self.pairs

    def component(self, j, k, x):
        """
        Zwraca B_jk(x) z odbiciem antysymetrycznym dla j > k.
        """
        x = np.asarray(x, dtype=float)
        if j == k:
            return np.zeros(x.shape[:-1])
        if j < k:
            func = self.pairs.get((j, k))
            return np.zeros(x.shape[:-1]) if func is None else _as_field(func(x), x)
        func = self.pairs.get((k, j))
        return np.zeros(x.shape[:-1]) if func is None else -_as_field(func(x), x)

    def matrix(self, x):
        """
        Zwraca macierz antysymetryczną B(x) o kształcie (..., n, n).
        """
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (self.dim, self.dim))
        for (j, k), func in self.pairs.items():
            value = _as_field(func(x), x)
            out[..., j, k] = value
            out[..., k, j] = -value
        return out


@dataclass(frozen=True)
class VectorPotential:
    """
    1-forma A z dA = B.

    Args:
        dim (int): Wymiar n
        components (callable): (j, x) -> A_j(x)
        gradient_components (callable, optional): (j, k, x) -> d_k A_j(x)
        vector (callable, optional): x -> A(x) o kształcie (..., n), szybsza ścieżka
        label (str, optional): Identyfikator potencjału (znacznik macierzy)
    """

    dim: int
    components: Callable
    gradient_components: Optional[Callable] = None
    vector: Optional[Callable] = None
    label: Optional[str] = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.vector is not None:
            return np.asarray(self.vector(x), dtype=float)
        return np.stack(
            [_as_field(self.components(j, x), x) for j in range(self.dim)], axis=-1
        )


@dataclass(frozen=True)
class ScalarPotential:
    """
    Funkcja cechowania phi z dokładnym gradientem.

    Args:
        dim (int): Wymiar n
        value (callable): x -> phi(x)
        gradient (callable): x -> grad phi(x) o kształcie (..., n)
        label (str, optional): Identyfikator
    """

    dim: int
    value: Callable
    gradient: Callable
    label: Optional[str] = None


@dataclass(frozen=True)
class Triangle:
    """Zorientowany trójkąt o wierzchołkach a, b, c."""

    a: tuple
    b: tuple
    c: tuple

    def corners(self):
        return (
            np.asarray(self.a, dtype=float),
            np.asarray(self.b, dtype=float),
            np.asarray(self.c, dtype=float),
        )


def _as_field(value, x):
    return np.broadcast_to(np.asarray(value, dtype=float), x.shape[:-1])


def zero_field(dim):
    return MagneticField(dim=dim, label="flat", constant=True)


def zero_potential(dim):
    """
    Zwraca potencjał A = 0 dla danego wymiaru.
    """
    return VectorPotential(
        dim=dim,
        components=lambda j, x: np.zeros(np.shape(x)[:-1]),
        gradient_components=lambda j, k, x: np.zeros(np.shape(x)[:-1]),
        vector=lambda x: np.zeros(np.shape(x)),
        label="zero",
    )


def transversal_gauge(B, order=QUADRATURE_ORDER):
    """
    Wyznacza potencjał w cechowaniu poprzecznym:
    A_j(x) = -sum_k int_0^1 ds B_jk(s x) s x_k.

    Dla pola stałego całka ma postać zamkniętą A_j = -(1/2) sum_k B_jk x_k,
    identyczną z wynikiem kwadratury.

    Args:
        B (MagneticField): Pole magnetyczne
        order (int): Rząd kwadratury Q

    Returns:
        VectorPotential: Potencjał z dA = B
    """
    label = None if B.label is None else f"transversal[{B.label}]"
    if B.is_zero:
        zero = zero_potential(B.dim)
        return VectorPotential(
            dim=B.dim,
            components=zero.components,
            gradient_components=zero.gradient_components,
            vector=zero.vector,
            label=label,
        )

    if B.constant:
        origin = np.zeros((1, B.dim))
        Bc = B.matrix(origin)[0]

        def vector(x):
            return -0.5 * np.einsum("jk,...k->...j", Bc, np.asarray(x, dtype=float))

        return VectorPotential(
            dim=B.dim,
            components=lambda j, x: vector(x)[..., j],
            gradient_components=lambda j, k, x: np.full(
                np.shape(x)[:-1], -0.5 * Bc[j, k]
            ),
            vector=vector,
            label=label,
        )

    s, _, w = gauss_legendre_unit(order)

    def vector(x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape)
        for si, wi in zip(s, w):
            total -= wi * si * np.einsum("...jk,...k->...j", B.matrix(si * x), x)
        return total

    return VectorPotential(
        dim=B.dim,
        components=lambda j, x: vector(x)[..., j],
        vector=vector,
        label=label,
    )


def landau_gauge(B, order=QUADRATURE_ORDER):
    """
    Potencjał typu Landaua dla pola tylko w płaszczyźnie (x1, x2):
    A_1 = 0, A_2(x) = int_0^{x_1} B_12(t, x_2, ...) dt.

    Args:
        B (MagneticField): Pole z jedyną składową B_12
        order (int): Rząd kwadratury

    Returns:
        VectorPotential: Potencjał z dA = B
    """
    if B.is_zero:
        return transversal_gauge(B, order)
    if set(B.pairs) != {(0, 1)}:
        raise PreconditionError(
            "Cechowanie Landaua wymaga pola wyłącznie w płaszczyźnie x1-x2"
        )
    s, _, w = gauss_legendre_unit(order)
    b12 = B.pairs[(0, 1)]

    def vector(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for si, wi in zip(s, w):
            pts = x.copy()
            pts[..., 0] = si * x[..., 0]
            out[..., 1] += wi * _as_field(b12(pts), pts)
        out[..., 1] *= x[..., 0]
        return out

    label = None if B.label is None else f"landau[{B.label}]"
    return VectorPotential(
        dim=B.dim,
        components=lambda j, x: vector(x)[..., j],
        vector=vector,
        label=label,
    )


def circulation(A, x, y, order=QUADRATURE_ORDER):
    """
    Cyrkulacja Gamma^A([x, y]) = int_0^1 ds <A((1-s)x + s y), y - x>.

    Args:
        A (VectorPotential): Potencjał
        x (array): Początek odcinka, kształt (..., n)
        y (array): Koniec odcinka, kształt (..., n)
        order (int): Rząd kwadratury Q

    Returns:
        ndarray: Cyrkulacja o kształcie (...)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    s, s_rev, w = gauss_legendre_unit(order)
    shape = (len(s),) + (1,) * x.ndim
    pts = s_rev.reshape(shape) * x + s.reshape(shape) * y
    values = np.sum(A(pts) * (y - x), axis=-1)
    return np.tensordot(w, values, axes=(0, 0))


def flux_reparametrized(B, x, y, z, order=FLUX_QUADRATURE_ORDER):
    """
    F_B(x, y, z) = sum_jk y_j (z_k - y_k) int int ds dt s B_jk(x-y-z+2sy+2st(z-y)).

    Spełnia Gamma^B(<x-y+z, x-y-z, x+y-z>) = 4 F_B(x, y, z).

    Returns:
        ndarray: Wartości F_B o kształcie (...)
    """
    x, y, z = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(z, dtype=float)
    )
    if B.is_zero:
        return np.zeros(x.shape[:-1])
    s, _, w = gauss_legendre_unit(order)
    base = x - y - z
    total = np.zeros(x.shape[:-1])
    for si, wsi in zip(s, w):
        for ti, wti in zip(s, w):
            pts = base + 2.0 * si * y + 2.0 * si * ti * (z - y)
            total += wsi * wti * si * np.einsum(
                "...j,...jk,...k->...", y, B.matrix(pts), z - y
            )
    return total


def flux_triangle(B, t, order=FLUX_QUADRATURE_ORDER):
    """
    Strumień Gamma^B(<a, b, c>) przez zorientowany trójkąt.

    Args:
        B (MagneticField): Pole
        t (Triangle): Trójkąt
        order (int): Rząd Q (kwadratura Q x Q)

    Returns:
        float: Strumień
    """
    a, b, c = t.corners()
    return flux_corners(B, a, b, c, order)


def flux_corners(B, a, b, c, order=FLUX_QUADRATURE_ORDER):
    """Wersja zwektoryzowana flux_triangle dla tablic wierzchołków."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    return 4.0 * flux_reparametrized(B, 0.5 * (a + c), 0.5 * (c - b), 0.5 * (a - b), order)


def stokes_residual(A, B, t, order=QUADRATURE_ORDER):
    """
    |Gamma^B(<x,y,z>) - Gamma^A([x,y]) - Gamma^A([y,z]) - Gamma^A([z,x])|.
    """
    a, b, c = t.corners()
    loop = circulation(A, a, b, order) + circulation(A, b, c, order) + circulation(A, c, a, order)
    return float(abs(flux_corners(B, a, b, c, order) - loop))


def lambda_A(A, x, y, order=QUADRATURE_ORDER):
    """Lambda^A(x, y) = exp(-i Gamma^A([x, y]))."""
    return np.exp(-1j * circulation(A, x, y, order))


def omega_B(B, x, y, z, order=FLUX_QUADRATURE_ORDER):
    """omega_B(x, y, z) = exp(-4i F_B(x, y, z))."""
    return np.exp(-4j * flux_reparametrized(B, x, y, z, order))


def Omega_B(B, a, b, c, order=FLUX_QUADRATURE_ORDER):
    """Omega^B(a, b, c) = exp(-i Gamma^B(<a, b, c>))."""
    return np.exp(-1j * flux_corners(B, a, b, c, order))


def gauge_transform(A, phi):
    """
    Zwraca A' = A + grad phi.

    Args:
        A (VectorPotential): Potencjał wyjściowy
        phi (ScalarPotential): Funkcja cechowania z gradientem

    Returns:
        VectorPotential: Potencjał równoważny cechowaniem
    """
    if A.dim != phi.dim:
        raise PreconditionError(
            f"Niezgodne wymiary potencjału ({A.dim}) i cechowania ({phi.dim})"
        )

    def vector(x):
        return A(x) + np.asarray(phi.gradient(x), dtype=float)

    label = None
    if A.label is not None and phi.label is not None:
        label = f"{A.label}+grad[{phi.label}]"
    return VectorPotential(
        dim=A.dim,
        components=lambda j, x: vector(x)[..., j],
        vector=vector,
        label=label,
    )


def _central_derivative(func, x, axis, step):
    e = np.zeros(x.shape[-1])
    e[axis] = step
    return (func(x + e) - func(x - e)) / (2.0 * step)


def curl_residual(A, B, points, step=1e-5):
    """
    Maksimum |d_j A_k - d_k A_j - B_jk| w punktach próbkowania.

    Korzysta z gradient_components, jeśli są dostępne, inaczej z różnic centralnych.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = A.dim
    worst = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            if A.gradient_components is not None:
                curl = A.gradient_components(k, j, points) - A.gradient_components(j, k, points)
            else:
                curl = _central_derivative(
                    lambda p: A(p)[..., k], points, j, step
                ) - _central_derivative(lambda p: A(p)[..., j], points, k, step)
            worst = max(worst, float(np.max(np.abs(curl - B.component(j, k, points)))))
    return worst


def closedness_residual(B, points, step=1e-4):
    """
    Maksimum |d_l B_jk + d_j B_kl + d_k B_lj| po trójkach l < j < k.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = B.dim
    worst = 0.0
    for l in range(n):
        for j in range(l + 1, n):
            for k in range(j + 1, n):
                total = (
                    _central_derivative(lambda p: B.component(j, k, p), points, l, step)
                    + _central_derivative(lambda p: B.component(k, l, p), points, j, step)
                    + _central_derivative(lambda p: B.component(l, j, p), points, k, step)
                )
                worst = max(worst, float(np.max(np.abs(total))))
    return worst


def hypothesis_check(B, points, step=1e-3):
    """
    Raport zaniku pola: max <x>^{1+eps} |d^alpha B_jk(x)| dla |alpha| <= 2.

    Args:
        B (MagneticField): Pole z zadeklarowanym decay_epsilon
        points (array): Punkty próbkowania (m, n)
        step (float): Krok różnic skończonych

    Returns:
        dict: Wykładnik, maksima dla rzędów 0, 1, 2 i flaga skończoności
    """
    if B.decay_epsilon is None:
        raise PreconditionError("Pole nie deklaruje wykładnika zaniku decay_epsilon")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    weight = (1.0 + np.sum(points**2, axis=-1)) ** ((1.0 + B.decay_epsilon) / 2.0)
    per_order = {0: 0.0, 1: 0.0, 2: 0.0}
    for (j, k), func in B.pairs.items():
        comp = lambda p, f=func: _as_field(f(p), p)
        per_order[0] = max(per_order[0], float(np.max(weight * np.abs(comp(points)))))
        for a in range(B.dim):
            d1 = _central_derivative(comp, points, a, step)
            per_order[1] = max(per_order[1], float(np.max(weight * np.abs(d1))))
            for b in range(a, B.dim):
                d2 = _central_derivative(
                    lambda p: _central_derivative(comp, p, a, step), points, b, step
                )
                per_order[2] = max(per_order[2], float(np.max(weight * np.abs(d2))))
    values = list(per_order.values())
    return {
        "epsilon": B.decay_epsilon,
        "per_order": per_order,
        "max_weighted": max(values),
        "finite": bool(np.all(np.isfinite(values))),
    }


def _parse_params(text, count, name):
    if not text:
        raise PreconditionError(f"Preset '{name}' wymaga {count} parametrów")
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise PreconditionError(f"Niepoprawne parametry presetu '{name}': {text}")
    if len(values) != count:
        raise PreconditionError(
            f"Preset '{name}' wymaga {count} parametrów, otrzymano {len(values)}"
        )
    return values


def field_preset(spec, dim):
    """
    Buduje pole z nazwy presetu: "flat", "constant:b", "periodic:b0,amp,k",
    "shortrange:b0,eps". Dla n = 1 pole jest zawsze zerowe.

    Args:
        spec (str): Nazwa presetu z parametrami
        dim (int): Wymiar n

    Returns:
        MagneticField: Pole z etykietą równą nazwie presetu
    """
    name, _, params = spec.partition(":")
    name = name.strip()
    if name in ("flat", "zero"):
        return zero_field(dim)
    if name not in ("constant", "periodic", "shortrange"):
        raise PreconditionError(f"Nieznany preset pola: {name}")
    if dim == 1:
        return MagneticField(dim=1, label=spec)

    if name == "constant":
        (b,) = _parse_params(params, 1, name)
        pairs = {(0, 1): lambda x, b=b: np.full(np.shape(x)[:-1], b)}
        return MagneticField(dim=dim, pairs=pairs, label=spec, constant=True)

    if name == "periodic":
        b0, amp, k = _parse_params(params, 3, name)
        pairs = {(0, 1): lambda x: b0 + amp * np.sin(k * x[..., 0])}
        return MagneticField(dim=dim, pairs=pairs, label=spec)

    b0, eps = _parse_params(params, 2, name)
    pairs = {
        (0, 1): lambda x: b0
        * (1.0 + x[..., 0] ** 2 + x[..., 1] ** 2) ** (-(1.0 + eps) / 2.0)
    }
    return MagneticField(dim=dim, pairs=pairs, decay_epsilon=eps, label=spec)


def potential_for(B, gauge="transversal"):
    """
    Wybiera potencjał dla pola: "transversal" albo "landau".
    """
    if gauge == "transversal":
        return transversal_gauge(B)
    if gauge == "landau":
        return landau_gauge(B)
    raise PreconditionError(f"Nieznane cechowanie: {gauge}")


def gauge_preset(spec, dim):
    """
    Funkcje cechowania: "zero", "constant:c", "linear:c", "quadratic:c",
    "cubic:c", "smooth:c,k".

    Returns:
        ScalarPotential: phi z dokładnym gradientem
    """
    name, _, params = spec.partition(":")
    name = name.strip()
    last = dim - 1

    if name == "zero":
        return ScalarPotential(
            dim, lambda x: np.zeros(np.shape(x)[:-1]), lambda x: np.zeros(np.shape(x)), spec
        )

    if name == "constant":
        (c,) = _parse_params(params, 1, name)
        return ScalarPotential(
            dim, lambda x: np.full(np.shape(x)[:-1], c), lambda x: np.zeros(np.shape(x)), spec
        )

    if name == "linear":
        (c,) = _parse_params(params, 1, name)

        def grad(x):
            out = np.zeros(np.shape(x))
            out[..., 0] = c
            return out

        return ScalarPotential(dim, lambda x: c * x[..., 0], grad, spec)

    if name == "quadratic":
        (c,) = _parse_params(params, 1, name)

        def value(x):
            return c * x[..., 0] * x[..., last] if dim > 1 else c * x[..., 0] ** 2

        def grad(x):
            out = np.zeros(np.shape(x))
            if dim > 1:
                out[..., 0] = c * x[..., last]
                out[..., last] = c * x[..., 0]
            else:
                out[..., 0] = 2.0 * c * x[..., 0]
            return out

        return ScalarPotential(dim, value, grad, spec)

    if name == "cubic":
        (c,) = _parse_params(params, 1, name)

        def value(x):
            return c * (x[..., 0] ** 3 + x[..., 0] * x[..., last] ** 2)

        def grad(x):
            out = np.zeros(np.shape(x))
            out[..., 0] += c * (3.0 * x[..., 0] ** 2 + x[..., last] ** 2)
            out[..., last] += 2.0 * c * x[..., 0] * x[..., last]
            return out

        return ScalarPotential(dim, value, grad, spec)

    if name == "smooth":
        c, k = _parse_params(params, 2, name)

        def value(x):
            return c * np.sin(k * x[..., 0]) * np.cos(k * x[..., last])

        def grad(x):
            out = np.zeros(np.shape(x))
            out[..., 0] += c * k * np.cos(k * x[..., 0]) * np.cos(k * x[..., last])
            out[..., last] -= c * k * np.sin(k * x[..., 0]) * np.sin(k * x[..., last])
            return out

        return ScalarPotential(dim, value, grad, spec)

    raise PreconditionError(f"Nieznana funkcja cechowania: {name}")


def scaled_field(B, eps):
    """
    Pole eps * B (skalowanie półklasyczne); zachowuje znacznik pola stałego.
    """
    pairs = {
        key: (lambda x, func=func: eps * _as_field(func(x), x)) for key, func in B.pairs.items()
    }
    label = None if B.label is None else f"{eps:g}*{B.label}"
    return MagneticField(
        dim=B.dim,
        pairs=pairs,
        decay_epsilon=B.decay_epsilon,
        label=label,
        constant=B.constant,
    )
