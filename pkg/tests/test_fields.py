import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import PreconditionError
from core.fields import (
    MagneticField,
    Triangle,
    VectorPotential,
    circulation,
    closedness_residual,
    curl_residual,
    field_preset,
    flux_corners,
    flux_reparametrized,
    flux_triangle,
    gauge_preset,
    gauge_transform,
    hypothesis_check,
    landau_gauge,
    omega_B,
    scaled_field,
    stokes_residual,
    transversal_gauge,
    zero_field,
)


def _linear_field():
    return MagneticField(dim=2, pairs={(0, 1): lambda x: x[..., 0]}, label="x1")


def _polynomial_field():
    return MagneticField(
        dim=2,
        pairs={(0, 1): lambda x: 0.5 + 0.3 * x[..., 0] - 0.2 * x[..., 1] + 0.1 * x[..., 0] * x[..., 1]},
        label="poly",
    )


def test_transversal_gauge_of_linear_field():
    A = transversal_gauge(_linear_field())
    assert_allclose(A(np.array([3.0, 0.0])), [0.0, 3.0], atol=1e-12)


def test_transversal_gauge_constant_field_closed_form():
    A = transversal_gauge(field_preset("constant:1.0", 2))
    assert_allclose(A(np.array([2.0, -4.0])), [2.0, 1.0], atol=1e-14)


def test_circulation_of_gradient_field():
    grad = VectorPotential(
        dim=2,
        components=lambda j, x: x[..., 1 - j],
        vector=lambda x: np.stack([x[..., 1], x[..., 0]], axis=-1),
        label="grad[x1 x2]",
    )
    value = circulation(grad, np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    assert_allclose(value, 2.0, atol=1e-13)


def test_circulation_is_antisymmetric():
    A = transversal_gauge(_polynomial_field())
    rng = np.random.default_rng(3)
    x, y = rng.uniform(-3, 3, size=(2, 10, 2))
    assert_allclose(circulation(A, x, y), -circulation(A, y, x), atol=1e-13)


def test_flux_through_unit_triangle():
    B = field_preset("constant:1.0", 2)
    t = Triangle((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    assert_allclose(flux_triangle(B, t), 0.5, atol=1e-13)


def test_stokes_identity_on_random_triangles():
    B = _polynomial_field()
    A = transversal_gauge(B)
    rng = np.random.default_rng(0)
    for _ in range(20):
        corners = rng.uniform(-2, 2, size=(3, 2))
        assert stokes_residual(A, B, Triangle(*map(tuple, corners))) <= 1e-10


def test_reparametrized_flux_matches_corner_flux():
    B = _polynomial_field()
    rng = np.random.default_rng(1)
    x, y, z = rng.uniform(-1, 1, size=(3, 2))
    direct = flux_corners(B, x - y + z, x - y - z, x + y - z)
    assert_allclose(direct, 4.0 * flux_reparametrized(B, x, y, z), atol=1e-12)


def test_omega_for_constant_field():
    b = 0.7
    B = field_preset(f"constant:{b}", 2)
    x = np.array([0.3, -0.2])
    y = np.array([0.5, 1.0])
    z = np.array([-0.4, 0.2])
    expected = np.exp(-2j * b * (y[0] * z[1] - y[1] * z[0]))
    assert_allclose(omega_B(B, x, y, z), expected, atol=1e-12)


def test_gauge_transform_keeps_curl():
    B = field_preset("periodic:0.5,0.2,0.5", 2)
    A = transversal_gauge(B)
    shifted = gauge_transform(A, gauge_preset("smooth:0.5,0.5", 2))
    points = np.random.default_rng(2).uniform(-3, 3, size=(12, 2))
    assert curl_residual(A, B, points) <= 1e-6
    assert curl_residual(shifted, B, points) <= 1e-6


def test_landau_gauge_has_same_field():
    B = field_preset("periodic:0.5,0.2,0.5", 2)
    A = landau_gauge(B)
    points = np.random.default_rng(4).uniform(-3, 3, size=(12, 2))
    assert curl_residual(A, B, points) <= 1e-6
    assert_allclose(A(points)[:, 0], 0.0)


def test_landau_gauge_rejects_other_planes():
    B = MagneticField(dim=3, pairs={(1, 2): lambda x: np.ones(x.shape[:-1])})
    with pytest.raises(PreconditionError):
        landau_gauge(B)


def test_closedness_detects_non_closed_form():
    points = np.random.default_rng(5).uniform(-1, 1, size=(5, 3))
    closed = MagneticField(dim=3, pairs={(0, 1): lambda x: np.ones(x.shape[:-1])})
    broken = MagneticField(dim=3, pairs={(0, 1): lambda x: x[..., 2]})
    assert closedness_residual(closed, points) <= 1e-10
    assert closedness_residual(broken, points) > 0.5


def test_hypothesis_check_for_short_range_field():
    B = field_preset("shortrange:1.0,0.5", 2)
    points = np.random.default_rng(6).uniform(-10, 10, size=(50, 2))
    report = hypothesis_check(B, points)
    assert report["finite"]
    assert report["epsilon"] == 0.5
    assert report["per_order"][0] <= 1.0 + 1e-12


def test_hypothesis_check_requires_decay_exponent():
    with pytest.raises(PreconditionError):
        hypothesis_check(field_preset("constant:1.0", 2), np.zeros((1, 2)))


def test_presets():
    assert zero_field(2).is_zero
    assert field_preset("constant:1.0", 1).is_zero
    with pytest.raises(PreconditionError):
        field_preset("helical:1.0", 2)
    with pytest.raises(PreconditionError):
        gauge_preset("quartic:1.0", 2)


def test_scaled_field():
    B = scaled_field(field_preset("constant:0.5", 2), 0.25)
    assert B.constant
    assert_allclose(B.component(0, 1, np.zeros((1, 2))), [0.125])
    assert_allclose(B.component(1, 0, np.zeros((1, 2))), [-0.125])
