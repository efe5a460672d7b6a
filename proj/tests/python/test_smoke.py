import numpy as np
import pytest

import cogom


def test_fit_and_predict_shapes():
    d = cogom.generate(n=120, j=15, w=8, seed=3)
    model = cogom.fit(d["r"], d["x"], k=3, alpha=0.5)
    assert model.pi.shape == (120, 3)
    assert model.theta.shape == (15, 3)
    assert np.allclose(model.pi.sum(axis=1), 1.0)
    assert cogom.predict(model).shape == (120, 15)


def test_noiseless_recovery():
    d = cogom.generate(n=100, j=30, w=0, pure=True, sample_responses=False, seed=0)
    model = cogom.fit(d["r"], k=3, hetero_iters=200, hetero_tol=1e-12, require_binary=False)
    err = cogom.align(model.pi, model.theta_untruncated, d["pi"], d["theta"])
    assert err.max_abs_pi < 1e-6
    assert err.max_abs_theta < 1e-6
    assert sorted(err.permutation) == [0, 1, 2]


def test_cross_validation_is_deterministic():
    d = cogom.generate(n=100, j=10, w=5, seed=1)
    a = cogom.cross_validate_alpha(d["r"], d["x"], alphas=[0.0, 0.3, 1.0], seed=4)
    b = cogom.cross_validate_alpha(d["r"], d["x"], alphas=[0.0, 0.3, 1.0], seed=4)
    assert a.selected_alpha == b.selected_alpha
    assert a.selected_alpha in (0.0, 0.3, 1.0)
    assert a.mae.shape == (3, 5)


def test_geometry_helpers():
    assert np.allclose(cogom.project_to_simplex(np.array([1.2, -0.1, 0.3])), [0.95, 0.0, 0.05])
    u = np.array([[0.1], [0.5], [-0.9], [0.3]])
    assert cogom.successive_projection(u, 1) == [2]
    h = cogom.hetero_pca(np.outer([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]), rank=1, max_iters=1000, tol=1e-12)
    assert np.allclose(h.debiased_gram, np.outer([1, 2, 3], [1, 2, 3]), atol=1e-6)


def test_identifiability_verdicts():
    d3 = np.array([[0.1, 0.2, 0.3], [0.2, 0.4, 0.6], [0.3, 0.6, 1.0]])
    assert cogom.check_identifiability(d3)["verdict"] == "NotIdentifiable"


def test_errors_map_to_python_exceptions():
    with pytest.raises(cogom.ValidationError):
        cogom.fit(np.full((5, 4), 0.5), k=2)
    with pytest.raises(cogom.NumericalError):
        cogom.fit(np.tile([1.0, 0.0, 1.0, 0.0], (6, 1)), k=3)
    assert issubclass(cogom.SignalError, cogom.Error)
