import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acwave.cross_section import (
    CrossSectionGrid,
    F,
    count_sign_changes,
    critical_points_J,
    dF,
    dirichlet_eigenpairs,
    evaluate_J,
    first_eigenvalue,
    gradient_J,
    ground_state,
    unstable_mode_count,
    wave_speed_threshold,
)
from acwave.exceptions import DomainError, RegimeError, SizingError


def discrete_eigenvalue(j, length, nodes):
    h = length / (nodes - 1)
    return 4.0 / h**2 * np.sin(j * np.pi * h / (2 * length)) ** 2


@pytest.mark.parametrize("nodes", [5, 41, 101])
def test_interval_eigenvalues_match_closed_form(nodes):
    grid = CrossSectionGrid.interval(4.0, nodes)
    count = min(4, nodes - 2)
    pairs = dirichlet_eigenpairs(grid, count)
    got = [p.eigenvalue for p in pairs]
    want = [discrete_eigenvalue(j, 4.0, nodes) for j in range(1, count + 1)]
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_eigenfunctions_orthonormal_and_vanish_on_walls():
    grid = CrossSectionGrid.interval(4.0, 41)
    pairs = dirichlet_eigenpairs(grid, 5)
    gram = np.array([[grid.inner(a.eigenfunction, b.eigenfunction) for b in pairs] for a in pairs])
    np.testing.assert_allclose(gram, np.eye(5), atol=1e-12)
    for p in pairs:
        assert p.eigenfunction[0] == 0.0 and p.eigenfunction[-1] == 0.0
    assert pairs[0].eigenfunction[1] > 0


def test_rectangle_eigenvalues_are_sums():
    rect = CrossSectionGrid.rectangle(4.0, 3.0, 21, 16)
    lx = [discrete_eigenvalue(j, 4.0, 21) for j in range(1, 4)]
    ly = [discrete_eigenvalue(j, 3.0, 16) for j in range(1, 4)]
    sums = np.sort([a + b for a in lx for b in ly])[:3]
    got = [p.eigenvalue for p in dirichlet_eigenpairs(rect, 3)]
    np.testing.assert_allclose(got, sums, rtol=1e-10)


def test_eigenpair_count_limits():
    grid = CrossSectionGrid.interval(4.0, 6)
    assert len(dirichlet_eigenpairs(grid, 4)) == 4
    with pytest.raises(SizingError):
        dirichlet_eigenpairs(grid, 5)
    with pytest.raises(SizingError):
        dirichlet_eigenpairs(grid, 0)


def test_gradient_J_is_derivative_of_J():
    grid = CrossSectionGrid.interval(4.0, 21)
    rng = np.random.default_rng(3)
    v = grid.extend(rng.uniform(-1, 1, grid.interior_count))
    d = grid.extend(rng.normal(size=grid.interior_count))
    eps = 1e-6
    fd = (evaluate_J(v + eps * d, grid) - evaluate_J(v - eps * d, grid)) / (2 * eps)
    assert fd == pytest.approx(grid.inner(gradient_J(v, grid), d), rel=1e-7)


def test_field_validation():
    grid = CrossSectionGrid.interval(4.0, 11)
    bad = np.ones(grid.shape)
    with pytest.raises(DomainError):
        evaluate_J(bad, grid)
    with pytest.raises(DomainError):
        evaluate_J(np.zeros(5), grid)
    nan = np.zeros(grid.shape)
    nan[3] = np.nan
    with pytest.raises(DomainError):
        evaluate_J(nan, grid)


def test_ground_state_properties():
    grid = CrossSectionGrid.interval(4.0, 41)
    up = ground_state(grid)
    inner = grid.interior(up.values)
    assert np.all(inner > 0) and np.all(inner < 1)
    np.testing.assert_allclose(up.values, up.values[::-1], atol=1e-12)
    assert up.energy < 0 and up.residual <= 1e-10
    assert np.max(np.abs(gradient_J(up.values, grid))) <= 1e-10
    assert up.energy == pytest.approx(evaluate_J(up.values, grid), abs=1e-15)


def test_ground_state_refuses_narrow_cross_section():
    grid = CrossSectionGrid.interval(2.0, 41)
    assert first_eigenvalue(grid) > 1
    with pytest.raises(RegimeError):
        ground_state(grid)


def test_threshold():
    assert wave_speed_threshold(1 - 0.25) == pytest.approx(1.0)
    assert wave_speed_threshold(2.0) == 0.0


def test_case_ii_critical_points():
    grid = CrossSectionGrid.interval(8.0, 81)
    k, _ = unstable_mode_count(grid)
    states = critical_points_J(grid)
    assert k == 2
    assert len(states) == 2 * k + 1 and states.complete
    energies = [s.energy for s in states]
    assert energies == sorted(energies)
    for s in states:
        assert s.residual <= 1e-10
        assert any(np.max(np.abs(t.values + s.values)) < 1e-8 for t in states)
    assert sum(np.max(np.abs(s.values)) == 0.0 for s in states) == 1


@given(st.floats(-3, 3, allow_nan=False))
def test_potential_is_even_and_bounded_below(w):
    assert F(w) == pytest.approx(F(-w), abs=0)
    assert F(w) >= -0.25 - 1e-15


@given(st.floats(-2, 2, allow_nan=False))
def test_dF_is_derivative(w):
    eps = 1e-6
    assert (F(w + eps) - F(w - eps)) / (2 * eps) == pytest.approx(dF(w), abs=1e-8)


@settings(max_examples=50)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=0, max_size=30), st.floats(0.1, 10))
def test_sign_changes_invariant_under_scaling_and_negation(values, scale):
    v = np.array(values)
    n = count_sign_changes(v, threshold=0.0)
    assert count_sign_changes(-v, threshold=0.0) == n
    assert count_sign_changes(scale * v, threshold=0.0) == n
    assert 0 <= n <= max(len(values) - 1, 0)


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_small_amplitude_energy(eps):
    grid = CrossSectionGrid.interval(4.0, 41)
    pair = dirichlet_eigenpairs(grid, 1)[0]
    J = evaluate_J(eps * pair.eigenfunction, grid)
    assert J == pytest.approx(eps**2 * (pair.eigenvalue - 1) / 2, rel=10 * eps**2)
    assert J < 0


def test_ground_state_refinement_201_801():
    coarse = ground_state(CrossSectionGrid.interval(4.0, 201))
    fine = ground_state(CrossSectionGrid.interval(4.0, 801))
    assert np.max(np.abs(coarse.values - fine.values[::4])) <= 1e-4


def test_excited_states_sign_changes():
    grid = CrossSectionGrid.interval(8.0, 81)
    states = critical_points_J(grid)
    changes = sorted({s.sign_changes() for s in states if s.morse_tag != "trivial"})
    assert changes == [0, 1]
