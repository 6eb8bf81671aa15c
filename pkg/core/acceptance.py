"""
Bateria kryteriów akceptacyjnych rachunku magnetycznego na siatkach biurkowych.
"""

import filecmp
import os
import tempfile

import numpy as np
import pandas as pd

from config import ACCEPTANCE_SETTINGS, SIGN_SIGMA

from . import quantize
from .fields import (
    MagneticField,
    Triangle,
    field_preset,
    gauge_preset,
    potential_for,
    stokes_residual,
    transversal_gauge,
)
from .moyal import expansion_defect, parametrix
from .quantize import (
    commutator_residual,
    gauge_covariance_residual,
    interior_states,
    op_magnetic,
    op_minimal,
    resolved_states,
    state_difference,
    symbol_of,
)
from .serialization import save_operator, save_symbol
from .spectral import (
    principal_symbol_check,
    sobolev_equivalent_norm,
    sobolev_norm,
    triple_differences,
)
from .symbols import GridFunction, PhaseGrid, builtin, sample


def _result(name, measured, threshold, passed, relation="<="):
    return {
        "criterion": name,
        "measured": float(measured),
        "relation": relation,
        "threshold": float(threshold),
        "passed": bool(passed),
    }


def _grids(config):
    L = float(config["grid.L"])
    coarse = PhaseGrid(2, L, config["grid.N"])
    fine = PhaseGrid(2, L, max(config["grid.N"], ACCEPTANCE_SETTINGS["fine_points"]))
    return coarse, fine


def _field(config):
    B = field_preset(str(config["field.preset"]), 2)
    if B.is_zero:
        B = field_preset("constant:0.5", 2)
    return B, potential_for(B, str(config["field.gauge"]))


def _gaussians(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        out.append(
            builtin(
                "gaussian",
                {
                    "x0": rng.uniform(-0.5, 0.5, 2),
                    "xi0": rng.uniform(-0.5, 0.5, 2),
                    "sx": rng.uniform(0.9, 1.1),
                    "sk": rng.uniform(1.0, 1.2),
                },
            )
        )
    return out


def check_stokes(config):
    rng = np.random.default_rng(config["seed"])
    B = MagneticField(
        dim=2,
        pairs={(0, 1): lambda x: 0.5 + 0.3 * x[..., 0] - 0.2 * x[..., 1] + 0.1 * x[..., 0] * x[..., 1]},
        label="polynomial",
    )
    A = transversal_gauge(B)
    worst = 0.0
    for _ in range(ACCEPTANCE_SETTINGS["stokes_triangles"]):
        corners = rng.uniform(-2.0, 2.0, size=(3, 2))
        worst = max(worst, stokes_residual(A, B, Triangle(*map(tuple, corners))))
    tol = config.tolerances["stokes"]
    return [_result("stokes", worst, tol, worst <= tol)]


def check_gauge(config, grid, A):
    symbols = [builtin("gaussian", {"sx": 1.5, "sk": 1.0}), builtin("bracket", {"m": 1.0}),
               builtin("kinetic"), builtin("cubic"), builtin("x_xi", {"j": 0, "k": 1})]
    results = []
    for phi_spec, key in (("quadratic:0.3", "gauge_polynomial"), ("smooth:0.5,0.5", "gauge_smooth")):
        phi = gauge_preset(phi_spec, 2)
        worst = max(gauge_covariance_residual(sample(p, grid), A, phi) for p in symbols)
        tol = config.tolerances[key]
        results.append(_result(key, worst, tol, worst <= tol))
    return results


def check_minimal_defect(config, grid, A):
    phi = gauge_preset("cubic:0.05", 2)
    f = sample(builtin("cubic"), grid)
    minimal = gauge_covariance_residual(f, A, phi, "minimal")
    magnetic = gauge_covariance_residual(f, A, phi, "magnetic")
    low = config.tolerances["minimal_defect"]
    high = config.tolerances["magnetic_cubic"]
    return [
        _result("minimal_defect", minimal, low, minimal >= low, ">="),
        _result("magnetic_cubic", magnetic, high, magnetic <= high),
    ]


def check_commutator(config, fine):
    states = resolved_states(fine, seed=config["seed"])
    worst = 0.0
    for preset in ("constant:0.1", "periodic:0.1,0.05,0.25"):
        B = field_preset(preset, 2)
        worst = max(worst, commutator_residual(fine, potential_for(B), B, states))
    tol = config.tolerances["commutator"]
    return [_result(f"commutator (sigma={SIGN_SIGMA:+d})", worst, tol, worst <= tol)]


def check_round_trip(config, fine, A):
    worst = 0.0
    for p in _gaussians(5, config["seed"]):
        f = sample(p, fine)
        back = symbol_of(op_magnetic(f, A), A)
        worst = max(worst, np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values))
    tol = config.tolerances["round_trip"]
    return [_result("round_trip", worst, tol, worst <= tol)]


def check_moyal_oracle(config, fine, B):
    from .experiment import compose_table

    f, g = _gaussians(2, config["seed"] + 1)
    worst = 0.0
    for field in (field_preset("flat", 2), B):
        _, table = compose_table(
            f, g, field, potential_for(field), fine, ACCEPTANCE_SETTINGS["oracle_points"], config["seed"]
        )
        worst = max(worst, float(table["rel_error"].max()))
    tol = config.tolerances["moyal_oracle"]
    return [_result("moyal_oracle", worst, tol, worst <= tol)]


def check_expansion(config, fine, B):
    f, g = _gaussians(2, config["seed"] + 2)
    rows = [expansion_defect(f, g, B, fine, eps) for eps in ACCEPTANCE_SETTINGS["dilations"]]
    defects = [r["defect"] for r in rows]
    monotone = all(b < a for a, b in zip(defects, defects[1:]))
    bracket_defect = rows[-1]["commutator_defect"]
    tol = config.tolerances["bracket"]
    return [
        _result("expansion_monotone", defects[-1], defects[0], monotone, "<"),
        _result("bracket", bracket_defect, tol, bracket_defect <= tol),
    ]


def check_scheme_agreement(config, fine):
    A = potential_for(field_preset("periodic:0.1,0.05,0.25", 2))
    states = resolved_states(fine, seed=config["seed"])
    rows = fine.interior_mask()

    def difference(p):
        return state_difference(
            op_magnetic(sample(p, fine), A), op_minimal(p, A, fine), states, rows
        )

    quadratic = max(
        difference(p) for p in (builtin("kinetic"), builtin("monomial", {"alpha": (1, 0)}))
    )
    cubic = difference(builtin("cubic"))
    high = config.tolerances["schemes_quadratic"]
    low = config.tolerances["schemes_cubic"]
    return [
        _result("schemes_quadratic", quadratic, high, quadratic <= high),
        _result("schemes_cubic", cubic, low, cubic > low, ">"),
    ]


def check_parametrix(config, fine):
    B = field_preset("constant:0.5", 2)
    A = potential_for(B)
    a = sample(builtin("bracket", {"m": 2.0}), fine)
    result = parametrix(a, B, ACCEPTANCE_SETTINGS["parametrix_cutoff"], 2, A)
    decreasing = all(b < a_ for a_, b in zip(result.history, result.history[1:]))
    tol = config.tolerances["parametrix"]
    return [_result("parametrix", result.residual, tol, result.residual <= tol and decreasing)]


def check_spectrum_floor(config, A):
    report = triple_differences(A, ACCEPTANCE_SETTINGS["refinement"], float(config["grid.L"]))
    floor = min(report["floors"])
    growth = max(
        max(report[key][-1], 1e-9) / max(report[key][0], 1e-9)
        for key in ("magnetic_minimal", "magnetic_root", "minimal_root")
    )
    tol = config.tolerances["spectrum_floor"]
    return [
        _result("spectrum_floor", floor, tol, floor >= tol, ">="),
        _result("difference_growth", growth, 2.0, growth <= 2.0),
    ]


def check_fractional(config, grid, A):
    p = sample(builtin("bracket", {"m": 2.0}), grid)
    deviation = principal_symbol_check(op_magnetic(p, A), 0.5, p, A)["deviation"]
    tol = config.tolerances["principal_symbol"]
    return [_result("principal_symbol", deviation, tol, deviation <= tol)]


def check_sobolev(config, grid, A):
    states = interior_states(grid, ACCEPTANCE_SETTINGS["sobolev_states"], config["seed"])
    ratios = []
    for column in states.T:
        u = GridFunction(grid, column)
        ratios.append(sobolev_norm(u, 1.0, A) / sobolev_equivalent_norm(u, A, 1))
    low, high = config.tolerances["sobolev_low"], config.tolerances["sobolev_high"]
    return [
        _result("sobolev_low", min(ratios), low, min(ratios) >= low, ">="),
        _result("sobolev_high", max(ratios), high, max(ratios) <= high),
    ]


def _dump_once(directory, grid, A, seed):
    f, g = _gaussians(2, seed)
    quantize.PHASE_CACHE.clear()
    save_operator(op_magnetic(sample(f, grid), A), os.path.join(directory, "operator.mwo"))
    product = symbol_of(op_magnetic(sample(f, grid), A) @ op_magnetic(sample(g, grid), A), A)
    save_symbol(product, os.path.join(directory, "product.mwc1"))
    return ["operator.mwo", "product.mwc1"]


def check_determinism(config, grid, A):
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        names = _dump_once(first, grid, A, config["seed"])
        _dump_once(second, grid, A, config["seed"])
        _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
    differing = len(mismatch) + len(errors)
    return [_result("determinism", differing, 0, differing == 0)]


def run_acceptance(config):
    """
    Uruchamia wszystkie kryteria i zwraca tabelę wyników.

    Args:
        config (ExperimentConfig): Konfiguracja (siatka, pole, ziarno, progi)

    Returns:
        DataFrame: Kolumny criterion, measured, relation, threshold, passed
    """
    grid, fine = _grids(config)
    B, A = _field(config)
    steps = [
        lambda: check_stokes(config),
        lambda: check_gauge(config, grid, A),
        lambda: check_minimal_defect(config, grid, A),
        lambda: check_commutator(config, fine),
        lambda: check_round_trip(config, fine, A),
        lambda: check_moyal_oracle(config, fine, B),
        lambda: check_expansion(config, fine, B),
        lambda: check_scheme_agreement(config, fine),
        lambda: check_parametrix(config, fine),
        lambda: check_spectrum_floor(config, A),
        lambda: check_fractional(config, grid, A),
        lambda: check_sobolev(config, grid, A),
        lambda: check_determinism(config, grid, A),
    ]
    rows = []
    for number, step in enumerate(steps, start=1):
        results = step()
        for row in results:
            status = "OK" if row["passed"] else "BŁĄD"
            print(f"[{number:2d}] {row['criterion']}: {row['measured']:.3e} {row['relation']} {row['threshold']:.1e} ... {status}")
        rows.extend(results)
    return pd.DataFrame(rows)
