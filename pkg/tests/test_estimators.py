import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from acwave.estimators import CrossSectionModel, TravelingWaveSolver


@pytest.fixture(scope="module")
def model():
    return CrossSectionModel(n_modes=4).fit()


@pytest.fixture(scope="module")
def solver():
    return TravelingWaveSolver(x_min=-20.0, x_max=20.0, spacing=0.1).fit()


def test_params_round_trip():
    m = CrossSectionModel(length=5.0, nodes=21)
    assert m.get_params() == {"length": 5.0, "nodes": 21, "n_modes": 5, "tol": 1e-10}
    assert clone(m).get_params() == m.get_params()
    s = TravelingWaveSolver(speed=0.4).set_params(spacing=0.05)
    assert s.get_params()["speed"] == 0.4 and s.get_params()["spacing"] == 0.05


def test_not_fitted():
    with pytest.raises(NotFittedError):
        CrossSectionModel().transform(np.zeros((1, 41)))
    with pytest.raises(NotFittedError):
        TravelingWaveSolver().predict(np.zeros((1, 3)))


def test_cross_section_model(model):
    np.testing.assert_allclose(model.eigenvalues_[:2], [(np.pi / 4) ** 2, (np.pi / 2) ** 2], rtol=3e-3)
    assert model.case_ == "i" and model.threshold_ == pytest.approx(1.2385, abs=1e-3)
    coeffs = model.transform(model.components_)
    np.testing.assert_allclose(coeffs, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(model.inverse_transform(coeffs), model.components_, atol=1e-12)
    J = model.score_samples(model.ground_state_.values[None])
    assert J[0] == pytest.approx(model.ground_state_.energy)
    with pytest.raises(ValueError):
        model.transform(np.zeros((2, 40)))


def test_traveling_wave_solver(solver):
    assert solver.wave_.residual <= 1e-8
    up = solver.points_[0].field[0]
    mid = 20
    far_left, far_right = solver.predict([[-1e3, 2.0, 0.0], [1e3, 2.0, 0.0]])
    assert far_left == pytest.approx(up[mid], abs=1e-6)
    assert far_right == pytest.approx(0.0, abs=1e-9)
    # traveling: u(xi, y, t) = u(xi - c t, y, 0)
    c = solver.speed
    xi = np.linspace(-5, 5, 11)
    a = solver.predict(np.column_stack([xi + c * 3.0, np.full(11, 1.3), np.full(11, 3.0)]))
    b = solver.predict(np.column_stack([xi, np.full(11, 1.3), np.zeros(11)]))
    np.testing.assert_allclose(a, b, atol=1e-12)
    with pytest.raises(ValueError):
        solver.predict(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        solver.predict([[0.0, 5.0, 0.0]])
