"""Acceptance criteria, one test each; every test logs a PASS/FAIL line.

The lines are repeated in the "acceptance criteria" section of the pytest
terminal summary.
"""
import itertools
import time

import numpy as np
import pytest

from acwave.cli import main
from acwave.critical_point_solvers import minimize_Ic, wave_to_lab_frame
from acwave.cross_section import CrossSectionGrid, critical_points_J, dirichlet_eigenpairs, ground_state
from acwave.pipeline import regime
from acwave.verification import (
    check_sublevel_bounds,
    check_weighted_poincare,
    energy_flux_record,
    poincare_corpus,
    residual_te,
    simulate_evolution,
)
from acwave.weighted_channel import (
    ChannelGrid,
    WaveParameters,
    genus_seed_family,
    quadratic_form_QL,
    trial_function,
    weighted_norms,
)


def test_01_eigenvalue_oracle(criterion):
    t0 = time.perf_counter()
    grid = CrossSectionGrid.interval(4.0, 401)
    pairs = dirichlet_eigenpairs(grid, 2)
    elapsed = time.perf_counter() - t0
    e1 = abs(pairs[0].eigenvalue / (np.pi / 4) ** 2 - 1)
    e2 = abs(pairs[1].eigenvalue / (np.pi / 2) ** 2 - 1)
    ok = e1 <= 1e-4 and e2 <= 1e-4 and elapsed < 1.0
    criterion(1, "eigenvalue oracle", ok, f"rel err {e1:.2e}, {e2:.2e}; {elapsed:.3f} s")
    assert ok


def test_02_regime_thresholds(criterion):
    reg4 = regime(CrossSectionGrid.interval(4.0, 41))
    cross8 = CrossSectionGrid.interval(8.0, 81)
    reg8 = regime(cross8)
    states = critical_points_J(cross8)
    ok = abs(reg4.threshold - 1.2380) <= 1e-3 and reg4.case == "i" and reg8.case == "ii" and len(states) == 5
    criterion(2, "regime thresholds", ok, f"threshold {reg4.threshold:.5f}; l=8 case {reg8.case} with {len(states)} points")
    assert ok


def test_03_ground_state(criterion):
    t0 = time.perf_counter()
    fine = ground_state(CrossSectionGrid.interval(4.0, 401))
    finer = ground_state(CrossSectionGrid.interval(4.0, 801))
    elapsed = time.perf_counter() - t0
    drift = float(np.max(np.abs(fine.values - finer.values[::2])))
    ok = fine.energy < 0 and fine.residual <= 1e-10 and finer.residual <= 1e-10 and drift <= 1e-4 and elapsed < 5.0
    criterion(3, "ground state", ok, f"J {fine.energy:.6f}, residual {fine.residual:.1e}, refinement {drift:.1e}; {elapsed:.3f} s")
    assert ok


def test_04_weighted_poincare(criterion):
    cross = CrossSectionGrid.interval(4.0, 21)
    t0 = time.perf_counter()
    maxima, all_passed = [], True
    for h in (0.2, 0.1, 0.05):
        grid = ChannelGrid.with_spacing(-40.0, 0.0, h, cross)
        reports = [check_weighted_poincare(w, grid) for w in poincare_corpus(grid, 1000, np.random.default_rng(7))]
        all_passed &= all(r.passed for r in reports)
        maxima.append(max(r.max_ratio for r in reports))
    elapsed = time.perf_counter() - t0
    rising = maxima[0] < maxima[1] < maxima[2] < 4.0
    ok = all_passed and rising and elapsed < 30.0
    criterion(4, "weighted Poincare", ok, "max ratios " + ", ".join(f"{m:.4f}" for m in maxima) + f"; {elapsed:.1f} s")
    assert ok


def test_05_sublevel_bounds(criterion, params06, half05, psi1):
    family = genus_seed_family(1, 10, None, None, params06, half05, psi1.eigenfunction)
    reports = []

    def record(it, u, level, res):
        reports.append(check_sublevel_bounds(u, params06, half05))

    minimize_Ic(family.best_member(), params06, half05, step_rule="fixed", callback=record)
    ok = len(reports) >= 200 and all(r.passed for r in reports)
    criterion(5, "sublevel bounds", ok, f"{sum(r.passed for r in reports)}/{len(reports)} iterates")
    assert ok


def _ql_sweep():
    cross = CrossSectionGrid.interval(4.0, 41)
    pair = dirichlet_eigenpairs(cross, 1)[0]
    rows = []
    for c, k, L in itertools.islice(itertools.product((0.3, 0.6, 0.9, 1.2), (1, 2), (5.0, 20.0, 40.0)), 20):
        grid = ChannelGrid.with_spacing(-L, 0.0, L / 800, cross)
        params = WaveParameters(c, pair.eigenvalue)
        phi = trial_function(k, L, grid, pair.eigenfunction)
        ratio = quadratic_form_QL(phi, params, L, grid) / grid.weighted_inner(phi, phi)
        predicted = c * c * (0.25 + (k * np.pi / L) ** 2) + pair.eigenvalue - 1
        rows.append((ratio, predicted))
    return np.array(rows)


@pytest.mark.xfail(strict=True, reason="Q_L carries a factor 1/2 that the stated ratio omits")
def test_06_ql_identity_literal(criterion):
    rows = _ql_sweep()
    ratio, predicted = rows.T
    rel = float(np.max(np.abs(ratio - predicted) / np.abs(predicted)))
    signs = int(np.sum(np.sign(ratio) == np.sign(predicted)))
    ok = rel <= 1e-6 and signs == len(rows)
    criterion(6, "Q_L identity", ok, f"literal rel err {rel:.3g}; signs agree {signs}/{len(rows)}")
    assert ok


def test_06_ql_identity_with_half_factor():
    rows = _ql_sweep()
    ratio, predicted = rows.T
    assert len(rows) == 20
    assert np.max(np.abs(2 * ratio - predicted) / np.abs(predicted)) <= 1e-6
    assert np.all(np.sign(ratio) == np.sign(predicted))
    assert np.any(predicted > 0) and np.any(predicted < 0)


def test_07_heteroclinic_wave(criterion, default_run, coarse_run):
    res, elapsed = default_run
    wave = res.wave
    left_err, right_err = wave.end_errors()
    fine_mismatch = wave.diagnostics.mismatch
    coarse_mismatch = coarse_run.wave.diagnostics.mismatch
    ok = (
        wave.residual <= 1e-8
        and left_err <= 1e-3
        and right_err <= 1e-3
        and wave.diagnostics.gap > 0
        and fine_mismatch <= 1e-3
        and fine_mismatch < coarse_mismatch
        and elapsed < 60.0
    )
    criterion(
        7,
        "heteroclinic wave",
        ok,
        f"residual {wave.residual:.1e}, ends {left_err:.1e}/{right_err:.1e}, "
        f"gap mismatch {coarse_mismatch:.2e} -> {fine_mismatch:.2e}; {elapsed:.1f} s",
    )
    assert ok


def test_08_slab_energy_identity(criterion, default_run):
    wave = default_run[0].wave
    x = wave.grid.x
    rng = np.random.default_rng(0)
    residuals = []
    while len(residuals) < 10:
        i, j = sorted(rng.choice(x.size, size=2, replace=False))
        if j - i >= 2:
            residuals.append(energy_flux_record(wave, x[i], x[j]).residual)
    worst = max(residuals)
    ok = worst <= 1e-6
    criterion(8, "slab energy identity", ok, f"worst residual {worst:.1e} over 10 pairs")
    assert ok


def test_09_oddness(criterion, default_run):
    res = default_run[0]
    U = res.wave.field
    r_plus = residual_te(U, res.params, res.full_grid)
    r_minus = residual_te(-U, res.params, res.full_grid)
    ok = abs(r_plus - r_minus) <= 1e-14
    criterion(9, "oddness", ok, f"|diff| {abs(r_plus - r_minus):.1e}")
    assert ok


@pytest.mark.slow
def test_10_evolution(criterion, default_run):
    wave = default_run[0].wave
    lab = ChannelGrid.with_spacing(-40.0, 40.0, 0.05, wave.grid.cross)
    u0 = wave_to_lab_frame(wave, 0.0, lab.x)
    result = simulate_evolution(u0.values, lab, 20.0, 0.01)
    exact = wave_to_lab_frame(wave, 20.0, lab.x)
    speed_err = abs(result.speed - wave.speed) / wave.speed
    shape_err = float(np.max(np.abs(result.final - exact.values)) / np.max(np.abs(wave.field)))
    ok = speed_err <= 0.05 and shape_err <= 0.02
    criterion(10, "evolution", ok, f"speed {result.speed:.4f} ({speed_err:.2%}), shape {shape_err:.2%}")
    assert ok


@pytest.mark.slow
def test_11_level_trend(criterion, sequence3, half05):
    points = sequence3
    levels = np.array([p.level for p in points])
    masses = np.array([weighted_norms(p.field, half05).quartic_mass for p in points])
    ok = len(points) == 3 and np.all(levels < 0) and np.all(np.diff(levels) >= 0) and np.all(np.diff(masses) <= 0)
    criterion(
        11,
        "level trend (heuristic c_k)",
        ok,
        "levels " + ", ".join(f"{v:.3e}" for v in levels) + "; quartic " + ", ".join(f"{m:.3e}" for m in masses),
    )
    assert ok


def test_12_determinism(criterion, tmp_path, monkeypatch):
    monkeypatch.setenv("ACWAVE_THREADS", "1")
    dirs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["wave", "--out", str(d)]) for d in dirs]
    names = sorted(p.name for p in dirs[0].iterdir())
    same = all((dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes() for n in names)
    ok = codes == [0, 0] and same and names == sorted(p.name for p in dirs[1].iterdir()) and "wave.csv" in names
    criterion(12, "determinism", ok, f"{len(names)} files compared: {', '.join(names)}")
    assert ok
