import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import SymbolError
from core.fields import field_preset, zero_field
from core.symbols import (
    GridFunction,
    PhaseGrid,
    SymbolClosure,
    builtin,
    derivative,
    parse_symbol_spec,
    poisson,
    poisson_B,
    sample,
    seminorm_report,
)


def test_grid_conventions():
    grid = PhaseGrid(1, 8.0, 16)
    assert grid.h == 1.0
    assert_allclose(grid.x_axis[[0, -1]], [-8.0, 7.0])
    assert_allclose(grid.xi_axis[[0, 8]], [-np.pi, 0.0])
    assert grid.midpoint_axis.size == 31
    assert grid.key() == (1, 8.0, 16)


@pytest.mark.parametrize("N", [3, 7, 2])
def test_grid_rejects_odd_or_tiny_N(N):
    with pytest.raises(SymbolError):
        PhaseGrid(2, 8.0, N)


def test_sample_reports_non_finite_node(grid16):
    bad = SymbolClosure(lambda x, xi: 1.0 / xi[..., 0] + 0.0 * x[..., 0], "inverse")
    with pytest.raises(SymbolError, match="xi="):
        sample(bad, grid16)


def test_resampling_is_bit_exact(grid16):
    p = builtin("gaussian", {"x0": [0.5, 0.0], "sx": 1.5})
    first = sample(p, grid16)
    second = sample(first.closure, grid16)
    assert np.array_equal(first.values, second.values)


def test_derivative_of_polynomial_symbol(grid16):
    f = sample(builtin("monomial", {"alpha": (2, 0)}), grid16)
    d = derivative(f, ("xi", 0))
    assert_allclose(d.values, 2.0 * grid16.xi_points[None, :, 0] + 0.0 * d.values.real, atol=1e-10)


def test_derivative_fourth_order_convergence():
    errors = []
    for N in (32, 64):
        grid = PhaseGrid(1, 8.0, N)
        f = sample(SymbolClosure(lambda x, xi: np.sin(x[..., 0]) + 0.0 * xi[..., 0]), grid)
        d = derivative(f, ("x", 0))
        exact = np.cos(grid.x_points[:, 0])[:, None]
        errors.append(np.max(np.abs(d.values - exact)))
    assert np.log2(errors[0] / errors[1]) >= 3.8


def test_derivative_rejects_high_order(grid16):
    f = sample(builtin("kinetic"), grid16)
    with pytest.raises(SymbolError):
        derivative(f, ("x", 0), 5)


def test_canonical_pair_bracket(grid16):
    f = sample(builtin("monomial", {"alpha": (1, 0)}), grid16)
    g = sample(builtin("position", {"j": 0}), grid16)
    assert_allclose(poisson(f, g).values, 1.0, atol=1e-10)


def test_magnetic_bracket_of_momenta(grid16):
    f = sample(builtin("monomial", {"alpha": (1, 0)}), grid16)
    g = sample(builtin("monomial", {"alpha": (0, 1)}), grid16)
    B = field_preset("constant:0.5", 2)
    assert_allclose(poisson_B(f, g, B).values, -0.5, atol=1e-10)
    assert np.array_equal(poisson_B(f, g, zero_field(2)).values, poisson(f, g).values)


def test_bracket_is_antisymmetric(grid16):
    f = sample(builtin("gaussian", {"x0": [0.5, 0.0], "xi0": [0.5, 0.0], "sx": 1.5}), grid16)
    g = sample(builtin("gaussian", {"x0": [0.0, 0.5], "sx": 1.2}), grid16)
    assert_allclose(poisson(f, f).values, 0.0, atol=1e-12)
    assert_allclose(poisson(f, g).values, -poisson(g, f).values, atol=1e-12)


def test_parse_symbol_spec():
    name, params = parse_symbol_spec("gaussian:x0=0.5;0,sx=1.5")
    assert name == "gaussian"
    assert params["x0"] == [0.5, 0.0]
    assert params["sx"] == 1.5
    _, params = parse_symbol_spec("monomial:alpha=1;2")
    assert params["alpha"] == (1, 2)
    with pytest.raises(SymbolError):
        parse_symbol_spec("gaussian:sx")
    with pytest.raises(SymbolError):
        builtin("unknown")


def test_grid_function_norm(grid16):
    u = GridFunction(grid16, np.ones(grid16.size))
    assert_allclose(u.norm(), np.sqrt(grid16.h**2 * grid16.size))
    with pytest.raises(SymbolError):
        GridFunction(grid16, np.full(grid16.size, np.nan))


def test_seminorm_report_for_bracket(grid16):
    f = sample(builtin("bracket", {"m": 1.0}), grid16)
    report = seminorm_report(f, 1.0)
    assert_allclose(report["(0, 0)|(0, 0)"], 1.0, atol=1e-12)
    assert report["(1, 0)|(0, 0)"] <= 1e-10
