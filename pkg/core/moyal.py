"""
Magnetyczny iloczyn Moyala: wersja macierzowa, wyrocznia całkowa,
rozwinięcie asymptotyczne do rzędu 2 i parametriks symboli eliptycznych.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config import (
    ENVELOPE_CUTOFF,
    MAX_EXPANSION_ORDER,
    MAX_NEUMANN_ORDER,
    ORACLE_FLUX_ORDER,
    ORACLE_NODES,
    SIGN_SIGMA,
)

from .errors import PreconditionError, SymbolError
from .fields import omega_B, potential_for, scaled_field
from .quadrature_utils import gauss_legendre_box
from .quantize import identity, op_magnetic, symbol_of, thread_count
from .symbols import (
    SymbolClosure,
    SymbolField,
    _check_grid,
    bracket,
    field_term,
    mixed_derivative,
    poisson,
    poisson_B,
    sample,
)


@dataclass
class ExpansionSeries:
    """
    Wyrazy h_0, h_1, h_2 rozwinięcia f o^B g i ich zadeklarowane rzędy.
    """

    terms: list
    orders: list = field(default_factory=list)

    @property
    def order(self):
        return len(self.terms) - 1

    def total(self):
        out = self.terms[0]
        for term in self.terms[1:]:
            out = out + term
        return out


@dataclass
class ParametrixResult:
    """
    Wynik konstrukcji parametriksu.

    Args:
        b (SymbolField): Parametriks
        neumann_order (int): Rząd J szeregu Neumanna
        residual_field (SymbolField): a o^B b - 1
        cutoff (float): Promień odcięcia R
        residual (float): Supremum |a o^B b - 1| na {|xi| >= 2R, x we wnętrzu},
            w paśmie |xi_j| < nyquist / 2
        ellipticity (float): Oszacowana stała eliptyczności c
        history (list): Residua dla kolejnych rzędów 0..J
    """

    b: SymbolField
    neumann_order: int
    residual_field: SymbolField
    cutoff: float
    residual: float
    ellipticity: float
    history: Optional[list] = None


def moyal_product(f, g, A):
    """
    Iloczyn f o^B g jako symbol złożenia Op^A(f) Op^A(g).

    Args:
        f (SymbolField): Pierwszy symbol
        g (SymbolField): Drugi symbol
        A (VectorPotential): Potencjał (wynik zależy tylko od B = dA)

    Returns:
        SymbolField: Iloczyn na siatce
    """
    _check_grid(f, g)
    return symbol_of(op_magnetic(f, A) @ op_magnetic(g, A), A)


def _envelope(f):
    envelope = getattr(f, "envelope", None)
    if envelope is None:
        raise PreconditionError(
            f"Wyrocznia wymaga symbolu z obwiednią gaussowską, otrzymano '{getattr(f, 'name', f)}'"
        )
    return envelope


def _partial_fourier(f, env, w, v, nodes):
    """
    f~(w_a, v_b) = int exp(-i <v_b, eta>) f(w_a, eta) d eta na węzłach Gaussa-Legendre'a.

    Returns:
        ndarray: Macierz (len(w), len(v))
    """
    n = w.shape[-1]
    cut = np.sqrt(2.0 * np.log(1.0 / ENVELOPE_CUTOFF))
    center = np.broadcast_to(np.asarray(env["xi0"], dtype=float), (n,))
    eta, weights = gauss_legendre_box(center - cut * env["sk"], center + cut * env["sk"], nodes)
    values = np.asarray(f(w[:, None, :], eta[None, :, :]), dtype=complex)
    phases = np.exp(-1j * eta @ v.T)
    return (values * weights[None, :]) @ phases


def _window(center, half, bound):
    lower = np.maximum(center - half, -bound)
    upper = np.minimum(center + half, bound)
    return lower, upper


def _oracle_point(f, g, B, x, xi, nodes):
    n = x.shape[0]
    env_f, env_g = _envelope(f), _envelope(g)
    cut = np.sqrt(2.0 * np.log(1.0 / ENVELOPE_CUTOFF))
    x0_f = np.broadcast_to(np.asarray(env_f["x0"], dtype=float), (n,))
    x0_g = np.broadcast_to(np.asarray(env_g["x0"], dtype=float), (n,))

    y_lo, y_hi = _window(x - x0_f, cut * env_f["sx"], cut / (2.0 * env_g["sk"]))
    z_lo, z_hi = _window(x - x0_g, cut * env_g["sx"], cut / (2.0 * env_f["sk"]))
    if np.any(y_lo >= y_hi) or np.any(z_lo >= z_hi):
        return 0.0j

    y, wy = gauss_legendre_box(y_lo, y_hi, nodes)
    z, wz = gauss_legendre_box(z_lo, z_hi, nodes)
    # f~(x - y, -2z) i g~(x - z, 2y); całka po eta na gęstszej siatce
    f_tilde = _partial_fourier(f, env_f, x - y, -2.0 * z, 2 * nodes)
    g_tilde = _partial_fourier(g, env_g, x - z, 2.0 * y, 2 * nodes).T

    phase = np.exp(2j * (y @ xi)[:, None] - 2j * (z @ xi)[None, :])
    omega = omega_B(B, x, y[:, None, :], z[None, :, :], ORACLE_FLUX_ORDER)
    integrand = omega * phase * f_tilde * g_tilde
    total = wy @ integrand @ wz
    return complex(total / np.pi ** (2 * n))


def moyal_oracle(f, g, B, points, nodes=ORACLE_NODES, threads=None):
    """
    Bezpośrednia kwadratura całki oscylacyjnej iloczynu magnetycznego w punktach.

    Całki po eta i zeta sprowadzone są do częściowych transformat Fouriera,
    pozostała całka po (y, z) liczona jest tensorową kwadraturą Gaussa-Legendre'a
    w pudle, poza którym obwiednie spadają poniżej ENVELOPE_CUTOFF.

    Args:
        f (SymbolClosure): Symbol z obwiednią gaussowską
        g (SymbolClosure): Symbol z obwiednią gaussowską
        B (MagneticField): Pole
        points (array): Punkty (x, xi), kształt (P, 2n), P <= 16
        nodes (int): Liczba węzłów kwadratury na wymiar
        threads (int, optional): Liczba wątków (domyślnie ustawiona przez configure())

    Returns:
        list: Wartości iloczynu w punktach
    """
    _envelope(f)
    _envelope(g)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = B.dim
    if points.shape[-1] != 2 * n:
        raise SymbolError(f"Punkty muszą mieć 2n = {2 * n} współrzędnych, otrzymano {points.shape}")
    if len(points) > 16:
        raise PreconditionError(f"Wyrocznia obsługuje do 16 punktów, otrzymano {len(points)}")

    def evaluate(point):
        return _oracle_point(f, g, B, point[:n], point[n:], nodes)

    threads = thread_count() if threads is None else threads
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(evaluate, points))


def _declared_orders(f, g, up_to):
    if f.class_meta is None or g.class_meta is None:
        return [None] * (up_to + 1)
    m1, rho1, delta1 = f.class_meta
    m2, rho2, delta2 = g.class_meta
    gap = min(rho1, rho2) - max(delta1, delta2)
    return [m1 + m2 - j * gap for j in range(up_to + 1)]


def _second_order_term(f, g, B):
    grid = f.grid
    n = grid.n
    total = np.zeros_like(f.values)
    for j in range(n):
        for k in range(n):
            e_j = tuple(int(i == j) for i in range(n))
            e_k = tuple(int(i == k) for i in range(n))
            both = tuple(a + b for a, b in zip(e_j, e_k))
            zero = (0,) * n
            total += 2.0 * (
                mixed_derivative(f, e_k, e_j).values * mixed_derivative(g, e_j, e_k).values
            )
            total -= mixed_derivative(f, zero, both).values * mixed_derivative(g, both, zero).values
            total -= mixed_derivative(f, both, zero).values * mixed_derivative(g, zero, both).values
    total /= 8.0
    if not B.is_zero:
        total -= SIGN_SIGMA * field_term(f, g, B).values / 2j
    return SymbolField(grid, total)


def expansion(f, g, B, up_to=2):
    """
    Rozwinięcie f o^B g = h_0 + h_1 + h_2 + ...

    h_0 = f g, h_1 = -(i/2){f, g}, h_2 zawiera drugie pochodne
    oraz wyraz z polem -sigma (1/2i) sum B_jk d_xi_j f d_xi_k g.

    Args:
        f (SymbolField): Pierwszy symbol
        g (SymbolField): Drugi symbol
        B (MagneticField): Pole
        up_to (int): Najwyższy rząd (0, 1 albo 2)

    Returns:
        ExpansionSeries: Wyrazy rozwinięcia
    """
    _check_grid(f, g)
    if not 0 <= up_to <= MAX_EXPANSION_ORDER:
        raise PreconditionError(
            f"Rząd rozwinięcia {up_to} nieobsługiwany (maksimum {MAX_EXPANSION_ORDER})"
        )
    if B.dim != f.grid.n:
        raise SymbolError(f"Wymiar pola {B.dim} niezgodny z siatką {f.grid.n}")
    terms = [SymbolField(f.grid, f.values * g.values)]
    if up_to >= 1:
        terms.append(SymbolField(f.grid, -0.5j * poisson(f, g).values))
    if up_to >= 2:
        terms.append(_second_order_term(f, g, B))
    return ExpansionSeries(terms, _declared_orders(f, g, up_to))


def _dilated(p, eps):
    name = getattr(p, "name", "custom")
    return SymbolClosure(
        lambda x, xi: p(eps * x, xi), f"{name}@{eps:g}", getattr(p, "class_meta", None)
    )


def expansion_defect(f, g, B, grid, eps, gauge="transversal"):
    """
    Pomiar zgodności rozwinięcia w skalowaniu półklasycznym:
    symbole f(eps x, xi), g(eps x, xi) i pole eps B.

    Args:
        f (callable): Symbol analityczny
        g (callable): Symbol analityczny
        B (MagneticField): Pole
        grid (PhaseGrid): Siatka
        eps (float): Parametr skalowania
        gauge (str): Cechowanie potencjału

    Returns:
        dict: {"eps", "defect", "commutator_defect"} mierzone we wnętrzu pudła
    """
    field_eps = scaled_field(B, eps)
    A = potential_for(field_eps, gauge)
    fs = sample(_dilated(f, eps), grid)
    gs = sample(_dilated(g, eps), grid)
    mask = grid.interior_mask()

    fg = moyal_product(fs, gs, A)
    gf = moyal_product(gs, fs, A)
    series = expansion(fs, gs, field_eps, 2)
    defect = np.max(np.abs((fg - series.total()).values[mask]))

    commutator = (fg - gf).values[mask]
    bracket_B = poisson_B(fs, gs, field_eps).values[mask] / 1j
    scale = np.max(np.abs(bracket_B))
    commutator_defect = np.max(np.abs(commutator - bracket_B)) / scale if scale > 0 else 0.0
    return {
        "eps": float(eps),
        "defect": float(defect),
        "commutator_defect": float(commutator_defect),
    }


def smoothstep(r, R):
    """
    Odcięcie chi: 0 dla r <= R, 1 dla r >= 2R, wielomian piątego stopnia pomiędzy.
    """
    t = np.clip((np.asarray(r, dtype=float) - R) / R, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def _safe_reciprocal(chi, a):
    out = np.zeros(np.broadcast_shapes(np.shape(chi), np.shape(a)), dtype=complex)
    np.divide(chi, a, out=out, where=np.broadcast_to(chi, out.shape) > 0)
    return out


def ellipticity_constant(a, m, R):
    """
    c = min |a| <xi>^{-m} na obszarze {|xi| >= R, x we wnętrzu}.
    """
    grid = a.grid
    region = grid.interior_mask()[:, None] & (
        np.linalg.norm(grid.xi_points, axis=-1) >= R
    )[None, :]
    if not np.any(region):
        raise PreconditionError(f"Obszar |xi| >= {R} nie zawiera węzłów siatki")
    weights = bracket(grid.xi_points, -m)[None, :]
    return float(np.min((np.abs(a.values) * weights)[region]))


def parametrix(a, B, R, J, A=None):
    """
    Parametriks symbolu eliptycznego a z obciętym szeregiem Neumanna.

    b_0 = chi a^{-1}, r_0 = b_0 o^B a - 1, Op(b) = sum_{j<=J} (-Op(r_0))^j Op(b_0).
    Szereg sumowany jest na poziomie macierzy, symbol wyciągany raz na końcu.

    Args:
        a (SymbolField): Symbol z class_meta (m, rho, delta)
        B (MagneticField): Pole
        R (float): Promień odcięcia
        J (int): Rząd szeregu Neumanna (0..MAX_NEUMANN_ORDER)
        A (VectorPotential, optional): Potencjał (domyślnie cechowanie poprzeczne)

    Returns:
        ParametrixResult: Parametriks i residuum
    """
    grid = a.grid
    if a.class_meta is None:
        raise PreconditionError("Parametriks wymaga symbolu z deklaracją klasy (m, rho, delta)")
    if R <= 0:
        raise PreconditionError(f"Promień odcięcia musi być dodatni, otrzymano {R}")
    if not 0 <= J <= MAX_NEUMANN_ORDER:
        raise PreconditionError(f"Rząd Neumanna {J} poza zakresem 0..{MAX_NEUMANN_ORDER}")
    m = a.class_meta[0]
    c = ellipticity_constant(a, m, R)
    if c <= 0:
        raise PreconditionError(f"Symbol nie jest eliptyczny: c = {c:.3e} dla |xi| >= {R}")

    A = potential_for(B) if A is None else A
    if a.closure is not None:
        closure = a.closure
        b0 = sample(
            lambda x, xi: _safe_reciprocal(
                smoothstep(np.linalg.norm(xi, axis=-1), R), closure(x, xi)
            ),
            grid,
        )
    else:
        chi = smoothstep(np.linalg.norm(grid.xi_points, axis=-1), R)[None, :]
        b0 = SymbolField(grid, _safe_reciprocal(chi, a.values))

    op_a = op_magnetic(a, A)
    op_b0 = op_magnetic(b0, A)
    eye = identity(grid, "magnetic", A.label)
    remainder = op_b0 @ op_a - eye

    region = (
        grid.interior_mask()[:, None]
        & (np.linalg.norm(grid.xi_points, axis=-1) >= 2.0 * R)[None, :]
        & grid.band_mask()[None, :]
    )

    def measure(applied):
        field_ = symbol_of(applied, A) - 1.0
        value = float(np.max(np.abs(field_.values[region]))) if np.any(region) else 0.0
        return field_, value

    term = op_b0
    total = op_b0
    applied = op_a @ op_b0
    residual_field, residual = measure(applied)
    history = [residual]
    for _ in range(J):
        term = (-1.0) * (remainder @ term)
        total = total + term
        applied = applied + op_a @ term
        residual_field, residual = measure(applied)
        history.append(residual)

    b = symbol_of(total, A)
    print(
        f"Parametriks: J = {J}, R = {R:g}, c = {c:.4f}, residuum = {residual:.3e}, "
        f"historia = {', '.join(f'{r:.3e}' for r in history)}"
    )
    return ParametrixResult(b, J, residual_field, float(R), residual, c, history)
