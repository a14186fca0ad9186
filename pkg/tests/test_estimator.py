import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from drplane.estimator import BasinClassifier


@pytest.fixture(scope="module")
def fitted():
    clf = BasinClassifier(set_kind="ellipse", set_param=2.0, slope=2.0, max_period=2)
    return clf.fit()


def test_get_set_params_roundtrip():
    clf = BasinClassifier(set_param=3.0, slope=1.5, iters=500)
    params = clf.get_params()
    assert params["set_param"] == 3.0
    other = BasinClassifier().set_params(**params)
    assert other.get_params() == params


def test_clone_compatible():
    clf = BasinClassifier(set_param=4.0)
    c2 = clone(clf)
    assert c2.get_params() == clf.get_params()


def test_predict_requires_fit():
    with pytest.raises(NotFittedError):
        BasinClassifier().predict(np.zeros((1, 2)))


def test_fit_discovers_attractors(fitted):
    assert fitted.n_attractors_ == 4
    assert fitted.feasible_points_.shape == (2, 2)


def test_predict_labels_feasible_starts(fitted):
    X = np.vstack([fitted.feasible_points_, [[100.0, 100.0]]])
    labels = fitted.predict(X)
    assert labels[0] != 0 and labels[1] != 0
    assert labels[0] != labels[1]


def test_predict_validates_shape(fitted):
    with pytest.raises(ValueError):
        fitted.predict(np.zeros((3, 5)))


def test_predict_matches_render(fitted):
    g = fitted.render(16, 16, region=(-3, 3, -3, 3))
    from drplane.basins import pixel_midpoints
    from drplane.geometry import Region

    mids = pixel_midpoints(Region(-3, 3, -3, 3), 16, 16)
    labels = fitted.predict(mids)
    assert np.array_equal(labels.reshape(16, 16), g.labels)


def test_unknown_set_kind():
    with pytest.raises(ValueError):
        BasinClassifier(set_kind="parabola").fit()


def test_circle_kind():
    clf = BasinClassifier(set_kind="circle", slope=0.5, intercept=0.1, max_period=2,
                          region=(-2, 2, -2, 2), scan_grid=12)
    clf.fit()
    assert clf.n_attractors_ == 2
