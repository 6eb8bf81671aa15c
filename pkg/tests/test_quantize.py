import numpy as np
import pytest
from numpy.testing import assert_allclose

from core import quantize
from core.cache_manager import CacheManager
from core.errors import PreconditionError
from core.fields import MagneticField, field_preset, gauge_preset, potential_for, zero_potential
from core.quantize import (
    OperatorMatrix,
    apply,
    commutator_residual,
    gauge_covariance_residual,
    interior_states,
    magnetic_momentum,
    nu_pullback,
    op_magnetic,
    op_minimal,
    op_weyl,
    phase_matrix,
    resolved_states,
    spectral_momentum,
    state_difference,
    symbol_of,
)
from core.symbols import GridFunction, PhaseGrid, SymbolClosure, SymbolField, builtin, sample


def test_unit_symbol_gives_identity(grid16, constant_potential):
    M = op_magnetic(sample(builtin("one"), grid16), constant_potential)
    assert_allclose(M.entries, np.eye(grid16.size), atol=1e-12)
    assert M.scheme == "magnetic"
    assert M.potential == constant_potential.label


def test_momentum_symbol_on_plane_waves(grid16):
    k = grid16.xi_axis[[11, 6]]
    wave = np.exp(1j * grid16.x_points @ k)
    for j in range(2):
        f = sample(builtin("monomial", {"alpha": tuple(int(i == j) for i in range(2))}), grid16)
        out = apply(op_weyl(f), GridFunction(grid16, wave))
        assert_allclose(out.values, k[j] * wave, atol=1e-10)


def test_magnetic_momentum_matches_quantized_momentum(grid32):
    A = potential_for(field_preset("constant:0.1", 2))
    states = resolved_states(grid32)
    rows = grid32.interior_mask()
    for j in range(2):
        f = sample(builtin("monomial", {"alpha": tuple(int(i == j) for i in range(2))}), grid32)
        difference = state_difference(magnetic_momentum(grid32, A, j), op_magnetic(f, A), states, rows)
        assert difference <= 1e-8


def test_position_momentum_symmetrization():
    grid = PhaseGrid(1, 8.0, 16)
    M = op_weyl(sample(builtin("x_xi", {"j": 0, "k": 0}), grid))
    X = np.diag(grid.x_axis)
    D = spectral_momentum(grid, 0)
    assert_allclose(M.entries, 0.5 * (X @ D + D @ X), atol=1e-12)


def test_potential_symbol_is_diagonal(grid16):
    M = op_weyl(sample(builtin("potential", {"v0": 2.0, "width": 1.5}), grid16))
    expected = 2.0 * np.exp(-np.sum(grid16.x_points**2, axis=-1) / (2.0 * 1.5**2))
    assert_allclose(M.entries, np.diag(expected), atol=1e-12)


def test_zero_potential_paths_are_bit_identical(grid16):
    p = builtin("cubic")
    f = sample(p, grid16)
    weyl = op_weyl(f)
    magnetic = op_magnetic(f, zero_potential(2))
    minimal = op_minimal(p, zero_potential(2), grid16)
    assert np.array_equal(weyl.entries, magnetic.entries)
    assert np.array_equal(weyl.entries, minimal.entries)


def test_real_symbol_gives_hermitian_matrix(grid16):
    A = potential_for(field_preset("periodic:0.5,0.2,0.5", 2))
    M = op_magnetic(sample(builtin("bracket", {"m": 1.0}), grid16), A)
    assert M.hermiticity_defect() <= 1e-8
    assert op_minimal(builtin("bracket", {"m": 1.0}), A, grid16).hermiticity_defect() <= 1e-12


def test_nu_pullback():
    A = potential_for(field_preset("constant:1.0", 2))
    p = nu_pullback(builtin("kinetic"), A)
    rng = np.random.default_rng(0)
    x, xi = rng.uniform(-2, 2, size=(2, 10, 2))
    assert_allclose(p(x, xi), np.sum((xi - A(x)) ** 2, axis=-1), atol=1e-12)
    assert p.class_meta == (2.0, 1.0, 0.0)


def test_minimal_scheme_matches_quantized_pullback(grid32):
    A = potential_for(field_preset("constant:0.1", 2))
    p = builtin("gaussian", {"x0": [0.3, -0.2], "xi0": [0.3, 0.0], "sx": 1.5, "sk": 0.8})
    direct = op_weyl(sample(nu_pullback(p, A), grid32))
    minimal = op_minimal(p, A, grid32)
    states = resolved_states(grid32)
    assert state_difference(direct, minimal, states, grid32.interior_mask()) <= 1e-7


def test_minimal_equals_magnetic_for_constant_field(grid16, constant_potential):
    p = builtin("cubic")
    magnetic = op_magnetic(sample(p, grid16), constant_potential)
    minimal = op_minimal(p, constant_potential, grid16)
    scale = np.max(np.abs(magnetic.entries))
    assert_allclose(minimal.entries, magnetic.entries, atol=1e-12 * scale)


def test_identity_symbol(grid16):
    M = OperatorMatrix(grid16, np.eye(grid16.size, dtype=complex))
    assert_allclose(symbol_of(M).values, 1.0, atol=1e-10)


def test_momentum_round_trip(grid16):
    f = sample(builtin("monomial", {"alpha": (1, 0)}), grid16)
    back = symbol_of(op_weyl(f))
    assert_allclose(back.interior(), f.interior(), atol=1e-8)


def test_low_degree_polynomial_symbols_round_trip_everywhere(grid16, constant_potential):
    closure = SymbolClosure(
        lambda x, xi: x[..., 0] ** 2 * xi[..., 1] + 0.1 * x[..., 1] ** 3 - x[..., 0] * xi[..., 0] ** 2,
        "polynomial",
    )
    analytic = sample(closure, grid16)
    sampled = SymbolField(grid16, analytic.values)
    scale = np.max(np.abs(analytic.values))
    for f in (analytic, sampled):
        back = symbol_of(op_magnetic(f, constant_potential), constant_potential)
        assert_allclose(back.values, f.values, atol=1e-10 * scale)


def test_gaussian_round_trip_with_field(grid32, constant_potential):
    f = sample(
        builtin("gaussian", {"x0": [0.5, -0.5], "xi0": [0.5, 0.0], "sx": 1.0, "sk": 1.1}), grid32
    )
    back = symbol_of(op_magnetic(f, constant_potential), constant_potential)
    error = np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values)
    assert error <= 1e-6


def test_adjoint_extracts_conjugate_symbol(grid16, constant_potential):
    f = sample(builtin("gaussian", {"xi0": [0.5, 0.0], "sx": 1.5, "sk": 1.0}), grid16)
    kinetic = op_magnetic(sample(builtin("kinetic"), grid16), constant_potential)
    M = op_magnetic(f, constant_potential) @ kinetic
    forward = symbol_of(M, constant_potential)
    adjoint = symbol_of(M.dagger(), constant_potential)
    scale = np.max(np.abs(forward.values))
    assert_allclose(adjoint.values, forward.values.conj(), atol=1e-12 * scale)


def test_symbol_of_requires_matching_potential(grid16, constant_potential):
    M = op_magnetic(sample(builtin("kinetic"), grid16), constant_potential)
    with pytest.raises(PreconditionError):
        symbol_of(M)
    with pytest.raises(PreconditionError):
        symbol_of(M, potential_for(field_preset("constant:1.0", 2)))


def test_apply_checks_grid(grid16, grid32):
    M = op_weyl(sample(builtin("one"), grid16))
    with pytest.raises(PreconditionError):
        apply(M, GridFunction(grid32, np.zeros(grid32.size)))


def test_gauge_covariance_polynomial_phase(grid16, constant_potential):
    f = sample(builtin("cubic"), grid16)
    assert gauge_covariance_residual(f, constant_potential, gauge_preset("constant:1.3", 2)) <= 1e-14
    assert gauge_covariance_residual(f, constant_potential, gauge_preset("quadratic:0.3", 2)) <= 1e-8


def test_minimal_scheme_is_covariant_for_quadratic_phase(grid16, constant_potential):
    phi = gauge_preset("quadratic:0.3", 2)
    for name in ("kinetic", "cubic"):
        f = sample(builtin(name), grid16)
        assert gauge_covariance_residual(f, constant_potential, phi, "minimal") <= 1e-8


def test_minimal_scheme_breaks_covariance_for_cubic_phase(grid16, constant_potential):
    f = sample(builtin("cubic"), grid16)
    phi = gauge_preset("cubic:0.05", 2)
    assert gauge_covariance_residual(f, constant_potential, phi, "minimal") >= 1e-3
    assert gauge_covariance_residual(f, constant_potential, phi, "magnetic") <= 1e-8


def test_schemes_agree_on_quadratic_symbols_in_varying_field(grid32):
    A = potential_for(field_preset("periodic:0.1,0.05,0.25", 2))
    states = resolved_states(grid32)
    rows = grid32.interior_mask()

    def difference(p):
        return state_difference(
            op_magnetic(sample(p, grid32), A), op_minimal(p, A, grid32), states, rows
        )

    assert difference(builtin("kinetic")) <= 1e-8
    assert difference(builtin("monomial", {"alpha": (0, 1)})) <= 1e-8
    assert difference(builtin("cubic")) > 1e-4


@pytest.mark.parametrize("preset", ["constant:0.1", "periodic:0.1,0.05,0.25"])
def test_commutator_of_magnetic_momenta(grid32, preset):
    B = field_preset(preset, 2)
    assert commutator_residual(grid32, potential_for(B), B) <= 1e-6


def test_commutator_requires_two_dimensions():
    grid = PhaseGrid(1, 8.0, 16)
    B = field_preset("flat", 1)
    with pytest.raises(PreconditionError):
        commutator_residual(grid, potential_for(B), B)


def test_resolved_states_are_normalized_and_centered(grid32):
    states = resolved_states(grid32, count=3, seed=5)
    assert states.shape == (grid32.size, 3)
    assert_allclose(np.linalg.norm(states, axis=0), 1.0)
    outside = ~grid32.interior_mask(0.75)
    assert np.max(np.abs(states[outside])) <= 1e-5


def test_interior_states_respect_momentum_range(grid32):
    states = interior_states(grid32, count=2, seed=1, momentum=0.0)
    assert_allclose(states.imag, 0.0, atol=1e-15)


def test_phase_matrix_is_cached(grid16, constant_potential):
    first = phase_matrix(grid16, constant_potential)
    second = phase_matrix(grid16, constant_potential)
    assert first is second
    assert quantize.PHASE_CACHE.get_cache_stats()["hits"] >= 1
    assert not first.flags.writeable


def test_phase_cache_separates_potentials_with_shared_label(grid16):
    fields = [
        MagneticField(
            dim=2, pairs={(0, 1): lambda x, b=b: b + 0.0 * x[..., 0]}, label="shared", constant=True
        )
        for b in (0.5, 1.0)
    ]
    potentials = [potential_for(B) for B in fields]
    assert potentials[0].label == potentials[1].label
    first, second = (phase_matrix(grid16, A) for A in potentials)
    assert not np.allclose(first, second)
    quantize.configure(cache=CacheManager())
    assert_allclose(phase_matrix(grid16, potentials[1]), second, atol=1e-14)


def test_operator_algebra_tags(grid16, constant_potential):
    M = op_magnetic(sample(builtin("kinetic"), grid16), constant_potential)
    other = op_magnetic(sample(builtin("kinetic"), grid16), potential_for(field_preset("constant:1.0", 2)))
    with pytest.raises(PreconditionError):
        M @ other
    shifted = M + 1.0
    assert_allclose(shifted.entries - M.entries, np.eye(grid16.size))
