import concurrent.futures

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core import moyal, quantize
from core.errors import PreconditionError
from core.fields import (
    field_preset,
    gauge_preset,
    gauge_transform,
    potential_for,
    zero_field,
    zero_potential,
)
from core.moyal import (
    expansion,
    expansion_defect,
    moyal_oracle,
    moyal_product,
    parametrix,
    smoothstep,
)
from core.quantize import op_weyl, resolved_states, state_difference
from core.symbols import PhaseGrid, SymbolClosure, SymbolField, bracket, builtin, sample

F_PARAMS = {"x0": [0.3, -0.2], "xi0": [0.2, 0.1], "sx": 1.0, "sk": 1.1}
G_PARAMS = {"x0": [-0.1, 0.4], "xi0": [-0.3, 0.2], "sx": 1.1, "sk": 1.0}
# Szersze paczki: iloczyny pozostają rozdzielane przez siatkę N = 32
WIDE_PARAMS = [
    {"x0": [0.2, 0.0], "xi0": [0.2, -0.1], "sx": 1.25, "sk": 1.0},
    {"x0": [-0.2, 0.1], "xi0": [0.0, 0.3], "sx": 1.3, "sk": 1.1},
    {"x0": [0.0, -0.3], "xi0": [-0.2, 0.0], "sx": 1.2, "sk": 1.0},
]


def _relative(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_unit_is_neutral(grid32, constant_potential):
    one = sample(builtin("one"), grid32)
    g = sample(builtin("gaussian", G_PARAMS), grid32)
    assert _relative(moyal_product(one, g, constant_potential).values, g.values) <= 1e-6
    assert _relative(moyal_product(g, one, constant_potential).values, g.values) <= 1e-6


def test_involution(grid32, constant_potential):
    f = sample(builtin("gaussian", F_PARAMS), grid32)
    g = sample(builtin("gaussian", G_PARAMS), grid32)
    left = moyal_product(f, g, constant_potential).conj()
    right = moyal_product(g.conj(), f.conj(), constant_potential)
    assert _relative(right.values, left.values) <= 1e-8


def test_associativity(grid32, constant_potential):
    f, g, h = (sample(builtin("gaussian", params), grid32) for params in WIDE_PARAMS)
    left = moyal_product(moyal_product(f, g, constant_potential), h, constant_potential)
    right = moyal_product(f, moyal_product(g, h, constant_potential), constant_potential)
    assert _relative(left.values, right.values) <= 1e-6


def test_product_depends_only_on_field(grid32, constant_potential):
    f = sample(builtin("gaussian", F_PARAMS), grid32)
    g = sample(builtin("gaussian", G_PARAMS), grid32)
    shifted = gauge_transform(constant_potential, gauge_preset("quadratic:0.3", 2))
    reference = moyal_product(f, g, constant_potential)
    assert _relative(moyal_product(f, g, shifted).values, reference.values) <= 1e-6


def test_momentum_position_product_on_resolved_states():
    grid = PhaseGrid(1, 8.0, 64)
    xi = sample(builtin("monomial", {"alpha": (1,)}), grid)
    x = sample(builtin("position", {"j": 0}), grid)
    product = moyal_product(xi, x, zero_potential(1))
    target = sample(SymbolClosure(lambda x, xi: x[..., 0] * xi[..., 0] - 0.5j, "x_xi-i/2"), grid)
    states = resolved_states(grid)
    rows = grid.interior_mask(0.25)
    assert state_difference(op_weyl(target), op_weyl(product), states, rows) <= 1e-6


def test_expansion_of_canonical_pair(grid16, constant_field):
    f = sample(builtin("monomial", {"alpha": (1, 0)}), grid16)
    g = sample(builtin("position", {"j": 0}), grid16)
    series = expansion(f, g, constant_field)
    mask = grid16.interior_mask()
    assert series.order == 2
    assert_allclose(series.terms[1].values[mask], -0.5j, atol=1e-10)
    assert_allclose(series.terms[2].values[mask], 0.0, atol=1e-10)
    assert series.orders == [1.0, 0.0, -1.0]


def test_expansion_field_term_of_momenta(grid16, constant_field):
    f = sample(builtin("monomial", {"alpha": (1, 0)}), grid16)
    g = sample(builtin("monomial", {"alpha": (0, 1)}), grid16)
    series = expansion(f, g, constant_field)
    mask = grid16.interior_mask()
    assert_allclose(series.terms[0].values, f.values * g.values)
    assert_allclose(series.terms[1].values[mask], 0.0, atol=1e-10)
    assert_allclose(series.terms[2].values[mask], 0.25j, atol=1e-10)
    flat = expansion(f, g, zero_field(2))
    assert_allclose(flat.terms[2].values[mask], 0.0, atol=1e-10)


def test_expansion_order_limit(grid16, constant_field):
    f = sample(builtin("kinetic"), grid16)
    with pytest.raises(PreconditionError):
        expansion(f, f, constant_field, up_to=3)


def test_expansion_defect_fields(grid16, constant_field):
    row = expansion_defect(builtin("gaussian", F_PARAMS), builtin("gaussian", G_PARAMS), constant_field, grid16, 0.5)
    assert set(row) == {"eps", "defect", "commutator_defect"}
    assert row["eps"] == 0.5
    assert np.isfinite(row["defect"])


def test_expansion_defect_decreases_with_scale(grid32, constant_field):
    f, g = builtin("gaussian", F_PARAMS), builtin("gaussian", G_PARAMS)
    defects = [expansion_defect(f, g, constant_field, grid32, eps)["defect"] for eps in (1.0, 0.5, 0.25)]
    assert all(later < earlier for earlier, later in zip(defects, defects[1:]))


@pytest.mark.parametrize("preset", ["flat", "constant:0.5"])
def test_oracle_agrees_with_grid_product(grid32, preset):
    B = field_preset(preset, 2)
    f, g = builtin("gaussian", F_PARAMS), builtin("gaussian", G_PARAMS)
    product = moyal_product(sample(f, grid32), sample(g, grid32), potential_for(B))
    nodes = [((17, 16), (18, 16)), ((15, 17), (14, 17))]
    points, expected = [], []
    for (ix, iy), (kx, ky) in nodes:
        x = grid32.x_axis[[ix, iy]]
        xi = grid32.xi_axis[[kx, ky]]
        points.append(np.concatenate([x, xi]))
        expected.append(product.values[ix * grid32.N + iy, kx * grid32.N + ky])
    oracle = np.array(moyal_oracle(f, g, B, points, threads=2))
    scale = np.max(np.abs(product.values))
    assert np.max(np.abs(oracle - np.array(expected))) <= 1e-3 * scale


def test_oracle_uses_configured_threads(monkeypatch, constant_field):
    workers = []

    class RecordingExecutor(concurrent.futures.ThreadPoolExecutor):
        def __init__(self, max_workers=None, **kwargs):
            workers.append(max_workers)
            super().__init__(max_workers=max_workers, **kwargs)

    monkeypatch.setattr(moyal, "ThreadPoolExecutor", RecordingExecutor)
    quantize.configure(threads=3)
    g = builtin("gaussian", G_PARAMS)
    moyal_oracle(g, g, constant_field, [[0.0, 0.0, 0.0, 0.0]])
    moyal_oracle(g, g, constant_field, [[0.0, 0.0, 0.0, 0.0]], threads=1)
    assert workers == [3, 1]


def test_oracle_requires_envelope(constant_field):
    with pytest.raises(PreconditionError):
        moyal_oracle(builtin("kinetic"), builtin("gaussian"), constant_field, [[0.0, 0.0, 0.0, 0.0]])


def test_oracle_point_limit(constant_field):
    g = builtin("gaussian")
    with pytest.raises(PreconditionError):
        moyal_oracle(g, g, constant_field, np.zeros((17, 4)))


def test_smoothstep():
    assert_allclose(smoothstep([0.5, 1.0, 1.5, 2.0, 3.0], 1.0), [0.0, 0.0, 0.5, 1.0, 1.0])


def test_parametrix_of_unit_symbol(grid16):
    B = zero_field(2)
    a = sample(builtin("one"), grid16)
    result = parametrix(a, B, 0.75, 0)
    assert result.residual <= 1e-10
    assert result.ellipticity == pytest.approx(1.0)
    assert result.history == [result.residual]


@pytest.mark.parametrize("J", [0, 1, 2])
def test_parametrix_of_multiplier(grid16, J):
    a = sample(builtin("bracket", {"m": 2.0}), grid16)
    result = parametrix(a, zero_field(2), 0.75, J)
    assert result.neumann_order == J
    assert result.residual <= 1e-10
    assert len(result.history) == J + 1
    if J == 0:
        xi_norm = np.linalg.norm(grid16.xi_points, axis=-1)
        expected = smoothstep(xi_norm, 0.75) / bracket(grid16.xi_points, 2.0)
        mask = grid16.interior_mask()
        assert_allclose(result.b.values[mask], np.broadcast_to(expected, result.b.values.shape)[mask], atol=1e-10)


def test_parametrix_residual_decreases_in_field(grid32, constant_field):
    a = sample(builtin("bracket", {"m": 2.0}), grid32)
    result = parametrix(a, constant_field, 0.75, 2)
    assert len(result.history) == 3
    assert all(later < earlier for earlier, later in zip(result.history, result.history[1:]))
    assert result.residual == result.history[-1]
    assert result.residual < 0.5 * result.history[0]


def test_parametrix_rejects_bad_input(grid16, constant_field):
    a = sample(builtin("bracket", {"m": 2.0}), grid16)
    with pytest.raises(PreconditionError):
        parametrix(a, constant_field, 0.0, 1)
    with pytest.raises(PreconditionError):
        parametrix(a, constant_field, 0.75, 4)
    with pytest.raises(PreconditionError):
        parametrix(SymbolField(grid16, a.values), constant_field, 0.75, 1)
    with pytest.raises(PreconditionError):
        parametrix(sample(builtin("constant", {"c": 0.0}), grid16), constant_field, 0.75, 1)
