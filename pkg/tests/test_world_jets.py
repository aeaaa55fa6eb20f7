"""World-frame scaling jets against finite differences and structure checks.

The analytic chain rule is validated layer by layer: each derivative block
is compared with central finite differences of the block one order below,
over randomized shapes, frames (including off-unit quaternions, since the
orientation derivatives are ambient), and evaluation points.
"""

import numpy as np
import pytest

from scalecbf.geometry import (Ellipsoid, Frame, Halfspace, SmoothPolytope,
                               eval_scaling, gradient_nonzero_outside)
from scalecbf.geometry.rotation import quat_from_axis_angle, quat_multiply

from oracles import fd_gradient, fd_jacobian

REL_TOL_12 = 1e-5
REL_TOL_3 = 1e-4


def random_frame(rng, dim, allow_off_unit=False):
    if dim == 2:
        return Frame(rng.uniform(-2, 2, size=2), rng.uniform(-np.pi, np.pi))
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    if allow_off_unit and rng.uniform() < 0.3:
        q *= rng.uniform(0.8, 1.2)
    return Frame(rng.uniform(-2, 2, size=3), q)


def random_primitive(rng, kind, dim):
    if kind == "halfspace":
        return Halfspace(rng.normal(size=dim), rng.uniform(-1, 1))
    if kind == "ellipsoid":
        mat = rng.normal(size=(dim, dim))
        return Ellipsoid(mat @ mat.T + 0.3 * np.eye(dim),
                         rng.uniform(-0.5, 0.5, size=dim))
    rows = np.vstack([np.eye(dim), -np.eye(dim),
                      rng.normal(size=(2, dim))])
    return SmoothPolytope(rows, -rng.uniform(0.5, 1.5, size=rows.shape[0]),
                          rng.uniform(2.0, 25.0))


def rel_err(got, want):
    scale = max(1.0, float(np.max(np.abs(want))))
    return float(np.max(np.abs(got - want))) / scale


def ladder_errors(prim, frame, p):
    """Max relative FD mismatch of (first, second, third) order blocks."""
    dim = frame.dim
    theta = frame.flatten()

    def at(pp, tt, order):
        return eval_scaling(prim, Frame.from_theta(tt, dim), pp, order)

    jet = at(p, theta, 3)
    e1 = max(
        rel_err(jet.dFdp, fd_gradient(lambda pp: at(pp, theta, 0).value, p)),
        rel_err(jet.dFdtheta,
                fd_gradient(lambda tt: at(p, tt, 0).value, theta)))
    e2 = max(
        rel_err(jet.d2Fdp2,
                fd_jacobian(lambda pp: at(pp, theta, 1).dFdp, p)),
        rel_err(jet.d2Fdthetadp.T,
                fd_jacobian(lambda tt: at(p, tt, 1).dFdp, theta)),
        rel_err(jet.d2Fdtheta2,
                fd_jacobian(lambda tt: at(p, tt, 1).dFdtheta, theta)))
    n_t = theta.shape[0]
    fd_p3 = fd_jacobian(
        lambda pp: at(pp, theta, 2).d2Fdp2.ravel(), p).reshape(dim, dim, dim)
    fd_p2t = fd_jacobian(
        lambda tt: at(p, tt, 2).d2Fdp2.ravel(), theta).reshape(dim, dim, n_t)
    fd_pt2 = fd_jacobian(
        lambda tt: at(p, tt, 2).d2Fdthetadp.T.ravel(),
        theta).reshape(dim, n_t, n_t)
    e3 = max(rel_err(jet.d3Fdp3, fd_p3),
             rel_err(jet.d3Fdp2dtheta, fd_p2t),
             rel_err(jet.d3Fdpdtheta2, fd_pt2))
    return e1, e2, e3


@pytest.mark.parametrize("kind", ["halfspace", "ellipsoid", "polytope"])
def test_derivative_ladder(kind):
    rng = np.random.default_rng(31)
    for i in range(100):
        dim = 2 if i % 2 == 0 else 3
        prim = random_primitive(rng, kind, dim)
        frame = random_frame(rng, dim, allow_off_unit=True)
        p = rng.uniform(-2.5, 2.5, size=dim)
        e1, e2, e3 = ladder_errors(prim, frame, p)
        assert e1 < REL_TOL_12, f"config {i}: first order {e1:.2e}"
        assert e2 < REL_TOL_12, f"config {i}: second order {e2:.2e}"
        assert e3 < REL_TOL_3, f"config {i}: third order {e3:.2e}"


def test_rotated_ellipse_gradients_tight():
    """Tilted ellipse with 1.5 / 2.0 semi-axes: gradient error below 1e-6."""
    rng = np.random.default_rng(32)
    prim = Ellipsoid(np.diag([1.0 / 1.5 ** 2, 1.0 / 2.0 ** 2]))
    frame = Frame(np.array([0.4, -0.2]), np.pi / 6)
    theta = frame.flatten()
    for _ in range(20):
        p = rng.uniform(-3, 3, size=2)
        jet = eval_scaling(prim, frame, p, 1)
        fd_p = fd_gradient(
            lambda pp: eval_scaling(prim, frame, pp, 0).value, p)
        fd_t = fd_gradient(
            lambda tt: eval_scaling(prim, Frame.from_theta(tt, 2), p, 0).value,
            theta)
        assert rel_err(jet.dFdp, fd_p) < 1e-6
        assert rel_err(jet.dFdtheta, fd_t) < 1e-6


def test_square_polytope_trivial_values():
    square = SmoothPolytope(
        np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]),
        -np.ones(4), 12.0)
    jet = eval_scaling(square, Frame.identity(2), np.zeros(2), 0)
    assert jet.value == pytest.approx(0.0, abs=1e-12)


def test_unit_circle_trivial_jet():
    jet = eval_scaling(Ellipsoid(np.eye(2)), Frame.identity(2),
                       np.array([2.0, 0.0]), 2)
    assert jet.value == pytest.approx(4.0)
    assert np.allclose(jet.dFdp, [4.0, 0.0])
    assert np.allclose(jet.d2Fdp2, 2.0 * np.eye(2))


def test_origin_blocks_mirror_point_blocks():
    """Derivatives in the origin equal point derivatives times (-1)^count."""
    rng = np.random.default_rng(33)
    for dim in (2, 3):
        prim = random_primitive(rng, "polytope", dim)
        frame = random_frame(rng, dim)
        p = rng.uniform(-1.5, 1.5, size=dim)
        jet = eval_scaling(prim, frame, p, 3)
        assert np.allclose(jet.dFdtheta[:dim], -jet.dFdp, atol=1e-13)
        assert np.allclose(jet.d2Fdthetadp[:dim], -jet.d2Fdp2, atol=1e-13)
        assert np.allclose(jet.d2Fdtheta2[:dim, :dim], jet.d2Fdp2, atol=1e-13)
        assert np.allclose(jet.d3Fdp2dtheta[:, :, :dim], -jet.d3Fdp3,
                           atol=1e-13)
        assert np.allclose(jet.d3Fdpdtheta2[:, :dim, :dim], jet.d3Fdp3,
                           atol=1e-13)


def test_jet_symmetry_and_definiteness():
    rng = np.random.default_rng(34)
    for i in range(30):
        dim = 2 if i % 2 == 0 else 3
        kind = ("halfspace", "ellipsoid", "polytope")[i % 3]
        prim = random_primitive(rng, kind, dim)
        frame = random_frame(rng, dim, allow_off_unit=True)
        p = rng.uniform(-2, 2, size=dim)
        jet = eval_scaling(prim, frame, p, 3)
        assert np.allclose(jet.d2Fdp2, jet.d2Fdp2.T, atol=1e-12)
        assert np.allclose(jet.d2Fdtheta2, jet.d2Fdtheta2.T, atol=1e-12)
        assert np.allclose(jet.d3Fdp2dtheta,
                           jet.d3Fdp2dtheta.transpose(1, 0, 2), atol=1e-11)
        assert np.allclose(jet.d3Fdpdtheta2,
                           jet.d3Fdpdtheta2.transpose(0, 2, 1), atol=1e-11)
        eigs = np.linalg.eigvalsh(jet.d2Fdp2)
        assert eigs[0] >= -1e-10
        if kind == "ellipsoid":
            assert eigs[0] > 0.0


def test_jet_orders_absent_above_request():
    prim = Ellipsoid(np.eye(2))
    frame = Frame.identity(2)
    p = np.array([1.0, 1.0])
    j0 = eval_scaling(prim, frame, p, 0)
    assert j0.dFdp is None and j0.d2Fdp2 is None and j0.d3Fdp3 is None
    j1 = eval_scaling(prim, frame, p, 1)
    assert j1.dFdp is not None and j1.d2Fdp2 is None
    j2 = eval_scaling(prim, frame, p, 2)
    assert j2.d2Fdtheta2 is not None and j2.d3Fdp3 is None


def test_rigid_invariance_2d():
    rng = np.random.default_rng(35)
    for i in range(40):
        kind = ("halfspace", "ellipsoid", "polytope")[i % 3]
        prim = random_primitive(rng, kind, 2)
        frame = random_frame(rng, 2)
        p = rng.uniform(-2, 2, size=2)
        base = eval_scaling(prim, frame, p, 0).value
        ang = rng.uniform(-np.pi, np.pi)
        shift = rng.uniform(-3, 3, size=2)
        rot = np.array([[np.cos(ang), -np.sin(ang)],
                        [np.sin(ang), np.cos(ang)]])
        moved_frame = Frame(rot @ frame.origin + shift,
                            frame.orientation + ang)
        moved = eval_scaling(prim, moved_frame, rot @ p + shift, 0).value
        assert abs(moved - base) < 1e-12 * max(1.0, abs(base))


def test_rigid_invariance_3d():
    rng = np.random.default_rng(36)
    for i in range(40):
        kind = ("halfspace", "ellipsoid", "polytope")[i % 3]
        prim = random_primitive(rng, kind, 3)
        frame = random_frame(rng, 3)
        p = rng.uniform(-2, 2, size=3)
        base = eval_scaling(prim, frame, p, 0).value
        axis = rng.normal(size=3)
        q_move = quat_from_axis_angle(axis, rng.uniform(-np.pi, np.pi))
        shift = rng.uniform(-3, 3, size=3)
        rot = Frame(np.zeros(3), q_move).rotation()
        moved_frame = Frame(rot @ frame.origin + shift,
                            quat_multiply(q_move, frame.orientation))
        moved = eval_scaling(prim, moved_frame, rot @ p + shift, 0).value
        assert abs(moved - base) < 1e-12 * max(1.0, abs(base))


def test_gradient_nonzero_outside_examples():
    assert gradient_nonzero_outside(Ellipsoid(np.eye(2)), Frame.identity(2),
                                    np.array([2.0, 0.0]))
    assert gradient_nonzero_outside(Halfspace(np.array([1.0, 0.0]), 0.0),
                                    Frame.identity(2), np.array([3.0, 0.0]))


def test_gradient_nonzero_outside_sweep():
    rng = np.random.default_rng(37)
    found = 0
    while found < 200:
        dim = 2 if found % 2 == 0 else 3
        kind = ("halfspace", "ellipsoid", "polytope")[found % 3]
        prim = random_primitive(rng, kind, dim)
        frame = random_frame(rng, dim)
        p = rng.uniform(-4, 4, size=dim)
        if eval_scaling(prim, frame, p, 0).value <= 1.0:
            continue
        assert gradient_nonzero_outside(prim, frame, p, tol_grad=1e-12)
        found += 1


def test_eval_scaling_input_errors():
    prim = Ellipsoid(np.eye(2))
    frame = Frame.identity(2)
    with pytest.raises(ValueError):
        eval_scaling(prim, frame, np.zeros(2), 4)
    with pytest.raises(ValueError):
        eval_scaling(prim, frame, np.zeros(3), 1)
    with pytest.raises(ValueError):
        eval_scaling(Ellipsoid(np.eye(3)), frame, np.zeros(2), 1)


def test_planar_fast_path_matches_general():
    """The scalarized 2d jet agrees with the matrix chain blockwise."""
    from scalecbf.geometry.world import _jet_general, _jet_planar

    fields = ("value", "dFdp", "dFdtheta", "d2Fdp2", "d2Fdthetadp",
              "d2Fdtheta2", "d3Fdp3", "d3Fdp2dtheta", "d3Fdpdtheta2")
    rng = np.random.default_rng(11)
    for kind in ("ellipsoid", "halfspace", "polytope"):
        for _ in range(20):
            prim = random_primitive(rng, kind, 2)
            frame = random_frame(rng, 2)
            p = rng.uniform(-3, 3, size=2)
            for order in range(4):
                fast = _jet_planar(prim, frame, p, order)
                ref = _jet_general(prim, frame, p, order)
                assert fast.order == ref.order
                for name in fields:
                    got = getattr(fast, name)
                    want = getattr(ref, name)
                    if want is None:
                        assert got is None
                        continue
                    assert rel_err(np.asarray(got, dtype=float),
                                   np.asarray(want, dtype=float)) < 1e-12
