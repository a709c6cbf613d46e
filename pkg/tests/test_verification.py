import numpy as np
import pytest

from acwave.cross_section import CrossSectionGrid
from acwave.exceptions import DomainError
from acwave.verification import (
    axial_decay,
    check_sublevel_bounds,
    check_weighted_poincare,
    energy_flux_identity,
    energy_flux_record,
    front_position,
    half_cylinder_balance,
    heteroclinic_gap,
    poincare_corpus,
    residual_te,
    sign_changes,
    simulate_evolution,
    slack,
)
from acwave.weighted_channel import ChannelGrid, weighted_norms


@pytest.fixture(scope="module")
def channel():
    cross = CrossSectionGrid.interval(4.0, 21)
    return ChannelGrid.with_spacing(-40.0, 0.0, 0.05, cross)


def extremal(grid, L):
    x = grid.x
    prof = np.where(x >= -L, np.exp(-x / 2) * np.sin(np.pi * x / L), 0.0)
    prof[-1] = 0.0
    ymode = np.sin(np.pi * np.linspace(0, 4, grid.cross.nodes[0]) / 4)
    ymode[[0, -1]] = 0.0
    return np.multiply.outer(prof, ymode)


def test_slack(channel):
    assert slack(channel) == pytest.approx(1.5)


@pytest.mark.parametrize("L", [5.0, 20.0, 40.0])
def test_poincare_ratio_of_extremal_profile(channel, L):
    rep = check_weighted_poincare(extremal(channel, L), channel)
    assert rep.ratio == pytest.approx(4 / (1 + 4 * np.pi**2 / L**2), rel=1e-3)
    assert rep.passed and not rep.degenerate


def test_poincare_degenerate_and_invalid(channel):
    rep = check_weighted_poincare(np.zeros(channel.shape), channel)
    assert rep.degenerate and rep.ratio == 0.0
    bad = np.ones(channel.shape)
    with pytest.raises(DomainError):
        check_weighted_poincare(bad, channel)


def test_poincare_corpus_is_reproducible(channel):
    a = poincare_corpus(channel, 20, np.random.default_rng(5))
    b = poincare_corpus(channel, 20, np.random.default_rng(5))
    assert len(a) == 20
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)
        assert np.all(u[-1] == 0.0)
        assert np.all(u[:, 0] == 0.0) and np.all(u[:, -1] == 0.0)


def test_sublevel_quantities(coarse_run):
    point = coarse_run.point
    grid = coarse_run.half_grid
    rep = check_sublevel_bounds(point.field, coarse_run.params, grid)
    norms = weighted_norms(point.field, grid)
    assert rep.applicable and rep.passed
    assert rep.values["mass"] == pytest.approx(norms.l2w)
    assert rep.values["axial"] == pytest.approx(norms.dx_l2w)
    assert rep.values["transverse"] == pytest.approx(norms.grady_l2w)
    assert rep.values["quartic"] == pytest.approx(norms.quartic_mass)
    assert rep.values["l4"] ** 4 == pytest.approx(norms.quartic_mass)
    assert rep.values["quartic"] == pytest.approx(-4 * point.level, rel=1e-6)


def test_sublevel_not_applicable_above_zero(coarse_run):
    grid = coarse_run.half_grid
    u = np.zeros(grid.shape)
    u[-41:-1, 1:-1] = 0.9 * (-1.0) ** np.arange(40)[:, None]
    rep = check_sublevel_bounds(u, coarse_run.params, grid)
    assert rep.level > 0 and not rep.applicable and not rep.passed


def test_energy_flux(coarse_run):
    wave = coarse_run.wave
    for a, b in [(-40.0, 40.0), (-5.0, 5.0), (-30.0, -20.0), (2.0, 2.1)]:
        rec = energy_flux_record(wave, a, b)
        assert rec.residual <= 1e-10
        assert energy_flux_identity(wave, a, b) == rec.residual
    with pytest.raises(DomainError):
        energy_flux_record(wave, 1.0, 0.0)
    with pytest.raises(DomainError):
        energy_flux_record(wave, 0.0, 0.05)


def test_gap_and_balance(coarse_run):
    gap = heteroclinic_gap(coarse_run.wave)
    assert gap.gap == pytest.approx(0.0996665597, rel=1e-8)
    assert gap.mismatch < 2e-4
    bal = half_cylinder_balance(coarse_run.point, coarse_run.params, coarse_run.half_grid, coarse_run.left_state)
    assert bal.mismatch < 1e-4


def test_residual_and_decay(coarse_run):
    wave = coarse_run.wave
    assert residual_te(wave.field, coarse_run.params, wave.grid) == pytest.approx(wave.residual, abs=1e-15)
    assert axial_decay(wave.field, wave.grid) < 1e-6
    noisy = wave.field + 1e-3 * np.random.default_rng(0).normal(size=wave.field.shape)
    noisy[:, [0, -1]] = 0.0
    assert residual_te(noisy, coarse_run.params, wave.grid) > 1e-2


def test_sign_change_report(coarse_run):
    rep = sign_changes(coarse_run.wave)
    assert rep.profile > 0
    assert rep.per_station.shape == (coarse_run.cross.interior_count,)


def test_front_position():
    x = np.linspace(0, 10, 101)
    assert front_position(1 - x / 10, x, 0.5) == pytest.approx(5.0)
    with pytest.raises(Exception):
        front_position(np.ones(5), np.arange(5.0), 0.5)


def test_evolution_rejects_bad_input(coarse_run):
    cross = coarse_run.cross
    lab = ChannelGrid.with_spacing(-5.0, 5.0, 0.1, cross)
    with pytest.raises(DomainError):
        simulate_evolution(np.full(lab.shape, 2.0), lab, 1.0)
    with pytest.raises(DomainError):
        simulate_evolution(np.zeros((3, 3)), lab, 1.0)
    with pytest.raises(DomainError):
        simulate_evolution(np.zeros(lab.shape), lab, -1.0)
