"""Frame parameter vectors and their time derivatives."""

import numpy as np
import pytest

from scalecbf.geometry import Frame, flatten_theta, theta_rates
from scalecbf.geometry.rotation import IDENTITY_QUAT


def test_flatten_lengths():
    assert flatten_theta(Frame(np.array([1.0, 2.0]), 0.3)).shape == (3,)
    assert flatten_theta(Frame(np.array([1.0, 2.0, 3.0]),
                               IDENTITY_QUAT.copy())).shape == (7,)


def test_flatten_round_trip_2d():
    frame = Frame(np.array([0.5, -1.2]), 0.7)
    theta = flatten_theta(frame)
    back = Frame.from_theta(theta, 2)
    assert np.allclose(back.origin, frame.origin)
    assert back.orientation == frame.orientation


def test_flatten_round_trip_3d():
    rng = np.random.default_rng(11)
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    frame = Frame(np.array([1.0, -2.0, 0.25]), q)
    back = Frame.from_theta(flatten_theta(frame), 3)
    assert np.allclose(back.origin, frame.origin)
    assert np.allclose(back.orientation, frame.orientation)


def test_theta_rates_2d():
    frame = Frame(np.zeros(2), 0.1)
    rates = theta_rates(frame, np.array([1.0, 2.0]), 0.5)
    assert np.allclose(rates, [1.0, 2.0, 0.5])


def test_theta_rates_3d_identity_spin():
    """Spin about z at the identity orientation: rate is half of (0,0,1,0)."""
    frame = Frame(np.zeros(3), IDENTITY_QUAT.copy())
    rates = theta_rates(frame, np.zeros(3), np.array([0.0, 0.0, 1.0]))
    assert np.allclose(rates[:3], 0.0)
    assert np.allclose(rates[3:], [0.0, 0.0, 0.5, 0.0])


def test_theta_rates_preserve_unit_norm():
    rng = np.random.default_rng(12)
    for _ in range(25):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        frame = Frame(rng.normal(size=3), q)
        rates = theta_rates(frame, rng.normal(size=3), rng.normal(size=3))
        assert abs(2.0 * q @ rates[3:]) < 1e-12


def test_theta_rates_warns_off_unit_sphere():
    frame = Frame(np.zeros(3), np.array([0.0, 0.0, 0.0, 1.01]))
    with pytest.warns(RuntimeWarning):
        theta_rates(frame, np.zeros(3), np.array([0.0, 0.0, 1.0]))


def test_rotation_orthogonal_for_unit_orientations():
    rng = np.random.default_rng(13)
    f2 = Frame(np.zeros(2), rng.uniform(-3, 3))
    r2 = f2.rotation()
    assert np.allclose(r2.T @ r2, np.eye(2), atol=1e-14)
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    f3 = Frame(np.zeros(3), q)
    r3 = f3.rotation()
    assert np.allclose(r3.T @ r3, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(r3) - 1.0) < 1e-12


def test_dict_round_trip():
    f2 = Frame(np.array([0.1, 0.2]), -0.4)
    assert Frame.from_dict(f2.to_dict()).orientation == f2.orientation
    q = np.array([0.5, 0.5, 0.5, 0.5])
    f3 = Frame(np.array([1.0, 2.0, 3.0]), q)
    back = Frame.from_dict(f3.to_dict())
    assert np.allclose(back.orientation, q)
    assert np.allclose(back.origin, f3.origin)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        Frame(np.array([1.0]))
    with pytest.raises(ValueError):
        Frame(np.zeros(3), 0.5)
    with pytest.raises(ValueError):
        Frame.from_theta(np.zeros(4), 2)
    with pytest.raises(ValueError):
        Frame.from_theta(np.zeros(6), 3)
    with pytest.raises(ValueError):
        theta_rates(Frame(np.zeros(2), 0.0), np.zeros(3), 0.1)
    with pytest.raises(ValueError):
        theta_rates(Frame(np.zeros(3), IDENTITY_QUAT.copy()), np.zeros(3),
                    np.zeros(2))
