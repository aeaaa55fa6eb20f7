"""Circulation rows: skew maps, strength schedules, box projector."""

import numpy as np
import pytest

from scalecbf.safety import (BoxProjector, CirculationSpec, ConstraintRow,
                             circulation_row, equilibrium_projector,
                             skew_matrix)


def proj2():
    return equilibrium_projector(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))


def linear_spec(projector=None, matrix=None):
    return CirculationSpec(style="linear", params=(1.0, 1.0),
                           projector=projector or proj2(), matrix=matrix)


def test_planar_rotation():
    spec = linear_spec()
    a = np.array([1.0, 0.0])
    row = circulation_row(spec, a, phi=0.0, x=np.zeros(4))
    assert np.allclose(row.a, [0.0, -1.0])
    assert isinstance(row, ConstraintRow)
    assert row.kind == "circulation"


def test_orthogonality_all_dims():
    rng = np.random.default_rng(909)
    for n in range(2, 8):
        mat = skew_matrix(n)
        for _ in range(50):
            a = rng.standard_normal(n)
            assert abs(a @ mat @ a) <= 1e-14 * (a @ a)


def test_skew_structure():
    for n in range(2, 8):
        mat = skew_matrix(n)
        assert np.allclose(mat + mat.T, 0.0)
    with pytest.raises(ValueError):
        skew_matrix(1)


def test_odd_dimension_pattern():
    mat = skew_matrix(7)
    a = np.arange(1.0, 8.0)
    c = mat @ a
    assert c[0] == 0.0
    assert np.allclose(c[1:], [-3.0, 2.0, -5.0, 4.0, -7.0, 6.0])


def test_linear_strength_at_origin():
    spec = linear_spec()
    row = circulation_row(spec, np.array([1.0, 0.0]), phi=0.0,
                          x=np.array([0.0, 0.0, 0.0, 0.0]))
    assert row.b == pytest.approx(1.0, abs=1e-15)


def test_exponential_strength_calibration():
    """The published schedule crosses zero at phi = 0.02 on the box."""
    spec = CirculationSpec(style="exponential",
                           params=(600.0, 2.0, 0.02, 0.1, 10.0),
                           projector=proj2())
    row = circulation_row(spec, np.array([0.0, 1.0]), phi=0.02,
                          x=np.array([0.5, 0.5, 0.0, 0.0]))
    assert row.b == pytest.approx(0.0, abs=1e-15)


def test_strength_positive_at_origin_required():
    with pytest.raises(ValueError):
        CirculationSpec(style="exponential",
                        params=(600.0, 2.0, -0.02, 0.1, 10.0),
                        projector=proj2())
    with pytest.raises(ValueError):
        CirculationSpec(style="linear", params=(1.0,), projector=proj2())
    with pytest.raises(ValueError):
        CirculationSpec(style="spiral", params=(1.0, 1.0), projector=proj2())


def test_custom_matrix_validation():
    bad = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        linear_spec(matrix=bad)
    good = np.array([[0.0, -2.0], [2.0, 0.0]])
    spec = linear_spec(matrix=good)
    row = circulation_row(spec, np.array([1.0, 0.0]), 0.0, np.zeros(4))
    assert np.allclose(row.a, [0.0, 2.0])
    with pytest.raises(ValueError):
        circulation_row(spec, np.array([1.0, 0.0, 0.0]), 0.0, np.zeros(6))


def test_projector_example():
    proj = proj2()
    x = np.array([0.5, 0.5, 1.0, 2.0])
    assert np.allclose(proj.project(x), [0.5, 0.5, 0.0, 0.0])
    assert proj.distance(x) == pytest.approx(np.sqrt(5.0), abs=1e-15)
    assert proj.distance(np.array([0.2, -0.3, 0.0, 0.0])) == 0.0
    assert np.allclose(proj.zeta(x), 0.0)


def test_projector_clips_position():
    proj = proj2()
    x = np.array([3.0, -2.0, 0.0, 0.0])
    assert np.allclose(proj.project(x), [1.0, -1.0, 0.0, 0.0])
    assert proj.distance(x) == pytest.approx(np.sqrt(5.0), abs=1e-15)


def test_projector_nonexpansive():
    rng = np.random.default_rng(313)
    proj = proj2()
    for _ in range(500):
        x, y = rng.uniform(-4.0, 4.0, size=(2, 4))
        lhs = np.linalg.norm(proj.project(x) - proj.project(y))
        assert lhs <= np.linalg.norm(x - y) + 1e-12


def test_projector_validation():
    with pytest.raises(ValueError):
        BoxProjector(np.array([1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        BoxProjector(np.array([]), np.array([]))
