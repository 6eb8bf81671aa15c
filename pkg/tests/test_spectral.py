import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import PreconditionError
from core.fields import zero_potential
from core.quantize import identity, interior_states, op_weyl
from core.spectral import (
    boundedness_trend,
    fourier_sobolev_norm,
    fractional_power,
    garding_check,
    hermiticity_report,
    principal_symbol_check,
    relativistic_triple,
    sobolev_equivalent_norm,
    sobolev_norm,
    spectrum,
    triple_differences,
)
from core.symbols import GridFunction, SymbolClosure, builtin, sample


def test_identity_spectrum(grid16):
    report = spectrum(identity(grid16))
    assert_allclose(report.eigenvalues, 1.0, atol=1e-12)
    assert report.interior_rank == grid16.size
    assert report.to_json()["sigma"] == 1


def test_kinetic_spectrum_is_lattice_of_momenta(grid16):
    report = spectrum(op_weyl(sample(builtin("kinetic"), grid16)))
    expected = np.sort(np.sum(grid16.xi_points**2, axis=-1))
    assert_allclose(report.eigenvalues, expected, atol=1e-9)
    assert report.min_eig == pytest.approx(0.0, abs=1e-9)


def test_interior_compression(grid16):
    report = spectrum(identity(grid16), interior_only=True)
    assert report.interior_rank == int(grid16.interior_mask().sum())
    assert len(report.eigenvalues) == report.interior_rank


def test_non_hermitian_matrix_is_rejected(grid16):
    M = op_weyl(sample(builtin("constant", {"c": 1j}), grid16))
    assert not hermiticity_report(M)["hermitian"]
    with pytest.raises(PreconditionError):
        spectrum(M)


def test_fractional_powers_are_inverse(grid16):
    M = op_weyl(sample(builtin("bracket", {"m": 2.0}), grid16))
    root, shift = fractional_power(M, 0.5, return_shift=True)
    inverse_root = fractional_power(M, -0.5)
    assert shift <= 1e-12
    assert_allclose(root.entries @ inverse_root.entries, np.eye(grid16.size), atol=1e-10)


def test_fractional_power_reports_shift(grid16):
    M = op_weyl(sample(builtin("kinetic"), grid16))
    _, shift = fractional_power(M, 0.5, return_shift=True)
    assert shift == pytest.approx(1.0, abs=1e-9)


def test_fractional_power_range(grid16):
    with pytest.raises(PreconditionError):
        fractional_power(identity(grid16), 1.5)


def test_principal_symbol_of_root(grid16):
    p = sample(builtin("bracket", {"m": 2.0}), grid16)
    check = principal_symbol_check(op_weyl(p), 0.5, p, None)
    assert check["deviation"] <= 1e-8
    assert check["shift"] <= 1e-12


def test_principal_symbol_compares_against_shifted_symbol(grid16):
    p = sample(builtin("kinetic"), grid16)
    check = principal_symbol_check(op_weyl(p), 0.5, p, None)
    assert check["shift"] == pytest.approx(1.0, abs=1e-9)
    assert check["deviation"] <= 1e-8


def test_relativistic_triple_without_field(grid16):
    H1, H2, H3 = relativistic_triple(zero_potential(2), grid16)
    assert np.array_equal(H1.entries, H2.entries)
    assert_allclose(H1.entries, H3.entries, atol=1e-9)


def test_triple_differences_report():
    report = triple_differences(zero_potential(2), Ns=(8, 16))
    assert report["Ns"] == [8, 16]
    assert max(report["magnetic_minimal"]) == 0.0
    assert max(report["magnetic_root"]) <= 1e-9
    assert min(report["floors"]) >= 1.0 - 1e-9
    assert max(report["root_shifts"]) <= 1e-9


def test_sobolev_norms_without_field(grid16):
    A = zero_potential(2)
    u = GridFunction(grid16, interior_states(grid16, count=1)[:, 0])
    assert sobolev_norm(u, 0.0, A) == pytest.approx(np.sqrt(2.0) * u.norm())
    assert sobolev_norm(u, 1.0, A) == pytest.approx(fourier_sobolev_norm(u, 1.0), rel=1e-10)
    with pytest.raises(PreconditionError):
        sobolev_norm(u, -1.0, A)


def test_sobolev_equivalence(grid16, constant_potential):
    states = interior_states(grid16, count=5, seed=3)
    for column in states.T:
        u = GridFunction(grid16, column)
        ratio = sobolev_norm(u, 1.0, constant_potential) / sobolev_equivalent_norm(u, constant_potential, 1)
        assert 0.5 <= ratio <= 2.0


def test_garding_rejects_negative_symbol(constant_potential):
    negative = SymbolClosure(lambda x, xi: -np.sum(xi**2, axis=-1) + 0.0 * x[..., 0], "negative", (2.0, 1.0, 0.0))
    with pytest.raises(PreconditionError):
        garding_check(negative, constant_potential, Ns=(8,))


def test_garding_for_kinetic_energy(constant_potential):
    report = garding_check(builtin("kinetic"), constant_potential, Ns=(8, 16))
    assert report["bounded"]
    assert len(report["min_eigs"]) == 2


def test_boundedness_trend_for_order_zero_symbol(constant_potential):
    report = boundedness_trend(builtin("gaussian", {"sx": 1.5, "sk": 1.0}), constant_potential, Ns=(8, 16))
    assert report["Ns"] == [8, 16]
    assert all(0.0 < value <= 1.5 for value in report["norms"])
