import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bergerflow.space_form import (
    BergerParams,
    SpaceFormModel,
    apply_J,
    inner,
    j_matrix,
    riemann,
    symmetry_residuals,
    twisted_apply,
    twisted_matrix,
)

TOL = 1e-12
DIM = 8

finite_vec = arrays(
    np.float64,
    (DIM,),
    elements=st.floats(min_value=-10.0, max_value=10.0, allow_nan=False),
)


@given(finite_vec)
def test_J_squares_to_minus_identity(x):
    np.testing.assert_allclose(apply_J(apply_J(x)), -x, atol=TOL)


@given(finite_vec, finite_vec)
def test_J_is_orthogonal(x, y):
    assert abs(inner(apply_J(x), apply_J(y)) - inner(x, y)) < 1e-10


def test_j_matrix_matches_apply_J():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(5, DIM))
    np.testing.assert_allclose((j_matrix(DIM) @ x.T).T, apply_J(x), atol=TOL)


def test_riemann_frozen_value():
    # n=1, m=4: R(e1, e2) e1 = -4 e2
    model = SpaceFormModel(1, 4.0)
    e1, e2 = np.eye(2)
    np.testing.assert_allclose(riemann(model, e1, e2, e1), -4.0 * e2, atol=TOL)


def test_riemann_vanishes_flat():
    model = SpaceFormModel(2, 0.0)
    rng = np.random.default_rng(1)
    x, y, z = rng.normal(size=(3, 4))
    np.testing.assert_allclose(riemann(model, x, y, z), 0.0, atol=TOL)


@settings(max_examples=30)
@given(finite_vec)
def test_holomorphic_sectional_curvature_is_m(x):
    norm = np.linalg.norm(x)
    if norm < 1e-3:
        return
    x = x / norm
    model = SpaceFormModel(DIM // 2, 4.0)
    sec = inner(riemann(model, x, apply_J(x), apply_J(x)), x)
    assert abs(sec - 4.0) < 1e-9


def test_curvature_symmetries_hold():
    for n, m in [(1, 4.0), (2, -2.0), (4, 4.0)]:
        residuals = symmetry_residuals(SpaceFormModel(n, m), samples=100, seed=2)
        for name, value in residuals.items():
            assert value < 1e-12, f"n={n} m={m} {name}: {value}"


def test_twisted_frozen_value():
    # delta=1, xi=e1, w=e3: mu = 0, so T = R(e1, e3) and T e1 = -e3
    model = SpaceFormModel(2, 4.0)
    params = BergerParams(1.0)
    e = np.eye(4)
    out = twisted_apply(model, params, e[0], e[2], e[0])
    np.testing.assert_allclose(out, -e[2], atol=TOL)


def test_twisted_operator_skew_and_J_commuting():
    model = SpaceFormModel(4, 4.0)
    params = BergerParams(0.7)
    rng = np.random.default_rng(3)
    for _ in range(20):
        xi = rng.normal(size=DIM)
        xi /= np.linalg.norm(xi)
        w = rng.normal(size=DIM)
        w -= inner(w, xi) * xi
        u, v = rng.normal(size=(2, DIM))
        Tu = twisted_apply(model, params, xi, w, u)
        Tv = twisted_apply(model, params, xi, w, v)
        assert abs(inner(Tu, v) + inner(u, Tv)) < 1e-10
        TJu = twisted_apply(model, params, xi, w, apply_J(u))
        np.testing.assert_allclose(TJu, apply_J(Tu), atol=1e-10)


def test_twisted_matrix_matches_apply():
    model = SpaceFormModel(2, -2.0)
    params = BergerParams(1.3)
    rng = np.random.default_rng(4)
    xi = rng.normal(size=(6, 4))
    w = rng.normal(size=(6, 4))
    u = rng.normal(size=(6, 4))
    mat = twisted_matrix(model, params, xi, w)
    direct = twisted_apply(model, params, xi, w, u)
    np.testing.assert_allclose((mat @ u[..., None])[..., 0], direct, atol=1e-12)


def test_unit_fiber_rotation_identity():
    # at m=4 and |xi| = 1: R(xi, J xi) u = -2 J u + 2(<J xi, u> xi - <xi, u> J xi)
    model = SpaceFormModel(4, 4.0)
    rng = np.random.default_rng(5)
    for _ in range(10):
        xi = rng.normal(size=DIM)
        xi /= np.linalg.norm(xi)
        u = rng.normal(size=DIM)
        lhs = riemann(model, xi, apply_J(xi), u)
        rhs = -2.0 * apply_J(u) + 2.0 * (
            inner(apply_J(xi), u) * xi - inner(xi, u) * apply_J(xi)
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_model_validation():
    with pytest.raises(ValueError):
        SpaceFormModel(0, 4.0)
    with pytest.raises(ValueError):
        BergerParams(-0.5)
