"""Configuration derivatives of the minimal scaling value."""

import dataclasses

import numpy as np
import pytest

from scalecbf.geometry import Ellipsoid, Frame, Halfspace, SmoothPolytope
from scalecbf.sensitivity import (PrimitivePair, alpha_gradient,
                                  alpha_hessian, alpha_sensitivity,
                                  solve_min_scaling)

from oracles import fd_gradient, fd_jacobian

SQUARE = SmoothPolytope(
    np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]),
    -np.ones(4), 80.0)


def circle_pair(dist):
    return PrimitivePair(Ellipsoid(np.eye(2)), Frame.identity(2),
                         Ellipsoid(np.eye(2)),
                         Frame(np.array([dist, 0.0]), 0.0))


def spd(rng, dim):
    mat = rng.normal(size=(dim, dim))
    return mat @ mat.T + 0.4 * np.eye(dim)


def orient(rng, dim):
    if dim == 2:
        return rng.uniform(-np.pi, np.pi)
    quat = rng.normal(size=4)
    return quat / np.linalg.norm(quat)


def separated_pair(rng, kind, dim=2):
    """Random pair of the requested kind with alpha* above one."""
    while True:
        frame_a = Frame(rng.uniform(4, 6, size=dim) * rng.choice([-1, 1]),
                        orient(rng, dim))
        prim_a = Ellipsoid(spd(rng, dim), rng.uniform(-0.3, 0.3, size=dim))
        if kind == "ee":
            prim_b = Ellipsoid(spd(rng, dim), rng.uniform(-0.3, 0.3, size=dim))
        elif kind == "eh":
            normal = rng.normal(size=dim)
            prim_b = Halfspace(normal / np.linalg.norm(normal),
                               rng.uniform(-0.4, 0.4))
        elif kind == "he":
            normal = rng.normal(size=dim)
            prim_a = Halfspace(normal / np.linalg.norm(normal),
                               rng.uniform(-0.4, 0.4))
            frame_a = Frame(rng.uniform(-0.4, 0.4, size=dim), orient(rng, dim))
            prim_b = Ellipsoid(spd(rng, dim), rng.uniform(-0.3, 0.3, size=dim))
        else:
            prim_b = SQUARE if dim == 2 else None
        frame_b = Frame(rng.uniform(-0.4, 0.4, size=dim), orient(rng, dim))
        if kind == "he":
            frame_b = Frame(rng.uniform(4, 6, size=dim) * rng.choice([-1, 1]),
                            orient(rng, dim))
        pair = PrimitivePair(prim_a, frame_a, prim_b, frame_b)
        sol = solve_min_scaling(pair)
        if sol.alpha > 1.2:
            return pair, sol


def alpha_of(pair):
    def value(theta):
        return solve_min_scaling(pair.with_theta(theta)).alpha
    return value


def grad_of(pair):
    def value(theta):
        moved = pair.with_theta(theta)
        return alpha_gradient(moved, solve_min_scaling(moved))
    return value


KINDS = ["ee", "eh", "he", "ep"]


def test_circle_circle_frozen_gradient():
    pair = circle_pair(3.0)
    grad = alpha_gradient(pair, solve_min_scaling(pair))
    assert np.allclose(grad, [-4.0, 0.0, 0.0, 4.0, 0.0, 0.0], atol=1e-9)


def test_circle_circle_frozen_hessian():
    pair = circle_pair(3.0)
    sens = alpha_sensitivity(pair, solve_min_scaling(pair), order=2)
    assert sens.hess[0, 0] == pytest.approx(2.0, abs=1e-8)
    assert sens.hess[0, 3] == pytest.approx(-2.0, abs=1e-8)
    assert np.allclose(sens.hess, sens.hess.T, atol=0.0)


def test_gradient_matches_finite_differences():
    """Analytic gradient against central differences, mixed pair kinds."""
    rng = np.random.default_rng(61)
    for i in range(100):
        dim = 3 if i % 10 == 9 else 2
        kind = KINDS[i % 4]
        if dim == 3 and kind == "ep":
            kind = "ee"
        pair, sol = separated_pair(rng, kind, dim)
        grad = alpha_gradient(pair, sol)
        ref = fd_gradient(alpha_of(pair), pair.theta())
        err = np.linalg.norm(grad - ref) / max(1.0, np.linalg.norm(ref))
        assert err < 1e-6, f"pair {i} kind {kind} err {err:.2e}"


def test_hessian_matches_finite_differences():
    rng = np.random.default_rng(62)
    for i in range(100):
        dim = 3 if i % 10 == 9 else 2
        kind = KINDS[i % 4]
        if dim == 3 and kind == "ep":
            kind = "ee"
        pair, sol = separated_pair(rng, kind, dim)
        hess = alpha_hessian(pair, sol)
        ref = fd_jacobian(grad_of(pair), pair.theta())
        ref = 0.5 * (ref + ref.T)
        err = (np.linalg.norm(hess - ref, ord="fro")
               / max(1.0, np.linalg.norm(ref, ord="fro")))
        assert err < 1e-4, f"pair {i} kind {kind} err {err:.2e}"


def test_hessian_column_restriction_is_principal_block():
    rng = np.random.default_rng(63)
    pair, sol = separated_pair(rng, "ep")
    full = alpha_hessian(pair, sol)
    cols = [0, 1, 4]
    block = alpha_hessian(pair, sol, cols=cols)
    assert block.shape == (3, 3)
    assert np.allclose(block, full[np.ix_(cols, cols)], atol=1e-11)


def test_sensitivity_orders():
    pair = circle_pair(3.0)
    sol = solve_min_scaling(pair)
    first = alpha_sensitivity(pair, sol, order=1)
    assert first.hess is None
    second = alpha_sensitivity(pair, sol, order=2)
    assert np.allclose(first.grad, second.grad, atol=0.0)
    assert second.hess.shape == (6, 6)


def test_gradient_rejects_overlap():
    pair = circle_pair(0.5)
    sol = solve_min_scaling(pair)
    with pytest.raises(ValueError):
        alpha_gradient(pair, sol)


def test_gradient_rejects_stale_solution():
    pair = circle_pair(3.0)
    sol = solve_min_scaling(pair)
    stale = dataclasses.replace(sol, kkt_residual=1.0)
    with pytest.raises(ValueError):
        alpha_gradient(pair, stale)
    zero_mult = dataclasses.replace(sol, multiplier=0.0)
    with pytest.raises(ValueError):
        alpha_gradient(pair, zero_mult)


def test_gradient_predicts_alpha_change():
    """First-order model tracks a small rigid displacement of B."""
    pair = circle_pair(3.0)
    sol = solve_min_scaling(pair)
    grad = alpha_gradient(pair, sol)
    step = np.array([0.0, 0.0, 0.0, 1e-4, 0.0, 0.0])
    moved = solve_min_scaling(pair.with_theta(pair.theta() + step)).alpha
    predicted = sol.alpha + grad @ step
    assert abs(moved - predicted) < 5e-8


def test_quaternion_frame_gradient():
    rng = np.random.default_rng(64)
    pair, sol = separated_pair(rng, "ee", dim=3)
    assert pair.theta().shape == (14,)
    grad = alpha_gradient(pair, sol)
    ref = fd_gradient(alpha_of(pair), pair.theta())
    assert np.linalg.norm(grad - ref) / np.linalg.norm(ref) < 1e-6


def direction_patterns(rng, n_a, n_t):
    """Dense, one-block, single-entry, and gapped support patterns."""
    dense = rng.normal(size=n_t)
    head = np.zeros(n_t)
    head[:n_a] = rng.normal(size=n_a)
    tail = np.zeros(n_t)
    tail[n_a:] = rng.normal(size=n_t - n_a)
    single = np.zeros(n_t)
    single[rng.integers(n_t)] = rng.normal()
    gapped = np.zeros(n_t)
    gapped[0] = rng.normal()
    gapped[-1] = rng.normal()
    return [dense, head, tail, single, gapped, np.zeros(n_t)]


@pytest.mark.parametrize("kind", KINDS)
def test_directional_matches_full_sensitivity(kind):
    """One-direction curvature equals v'Hv against the full matrix."""
    from scalecbf.sensitivity import alpha_directional

    rng = np.random.default_rng(23)
    for dim in (2, 3):
        if kind == "ep" and dim == 3:
            continue
        for _ in range(4):
            pair, sol = separated_pair(rng, kind, dim)
            sens = alpha_sensitivity(pair, sol, order=2)
            for v in direction_patterns(rng, pair.n_theta_a, pair.n_theta):
                grad, quad = alpha_directional(pair, sol, v)
                assert np.array_equal(grad, sens.grad)
                want = float(v @ sens.hess @ v)
                scale = max(1.0, abs(want))
                assert abs(quad - want) < 1e-9 * scale
