from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=16)
def gauss_legendre_unit(order):
    """
    Zwraca węzły i wagi Gaussa-Legendre'a na odcinku [0, 1].

    Węzły są symetryzowane tak, że s[::-1] == 1 - s dokładnie w arytmetyce
    zmiennoprzecinkowej, co daje antysymetrię cyrkulacji względem zamiany końców.

    Args:
        order (int): Liczba węzłów Q

    Returns:
        tuple: (s, s_rev, w) - węzły, węzły odbite (1 - s) i wagi
    """
    if order < 1:
        raise ValueError(f"Rząd kwadratury musi być dodatni, otrzymano {order}")
    t, w = leggauss(order)
    t = 0.5 * (t - t[::-1])
    w = 0.5 * (w + w[::-1])
    s = 0.5 * (1.0 + t)
    s_rev = 0.5 * (1.0 - t)
    weights = 0.5 * w
    for arr in (s, s_rev, weights):
        arr.setflags(write=False)
    return s, s_rev, weights


def gauss_legendre_box(lower, upper, order):
    """
    Tensorowa kwadratura Gaussa-Legendre'a na prostopadłościanie.

    Args:
        lower (array): Dolne granice w każdym wymiarze
        upper (array): Górne granice w każdym wymiarze
        order (int): Liczba węzłów na wymiar

    Returns:
        tuple: (points, weights) o kształtach (order**d, d) i (order**d,)
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    s, _, w = gauss_legendre_unit(order)
    axes = [lo + (hi - lo) * s for lo, hi in zip(lower, upper)]
    weights = [(hi - lo) * w for lo, hi in zip(lower, upper)]
    grids = np.meshgrid(*axes, indexing="ij")
    wgrids = np.meshgrid(*weights, indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    total = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return points, total
