import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyspin.errors import DetNotOne, PolarAxisSingularity, ZeroMomentum
from anyspin.lorentz import (
    METRIC,
    E2SpinorialElement,
    MassiveMomentum,
    MasslessMomentum,
    act,
    axis_rotation,
    boost_lift,
    canonical_boost,
    covering_map,
    helicity_boost,
    little_group_element,
    massless_standard,
    minkowski,
    random_sl2c,
    random_su2,
    rotation_lift,
    rotation_matrix,
    shell_residual,
)

vec3 = st.lists(st.floats(-5, 5), min_size=3, max_size=3).map(np.array)


def _boost_matrix(mhat, chi):
    """4x4 pure boost of rapidity chi along mhat, built directly."""
    mhat = np.asarray(mhat, float) / np.linalg.norm(mhat)
    out = np.eye(4)
    out[0, 0] = np.cosh(chi)
    out[0, 1:] = out[1:, 0] = np.sinh(chi) * mhat
    out[1:, 1:] += (np.cosh(chi) - 1) * np.outer(mhat, mhat)
    return out


def test_covering_identity_and_sign():
    assert np.allclose(covering_map(np.eye(2)), np.eye(4), atol=1e-15)
    assert np.allclose(covering_map(-np.eye(2)), np.eye(4), atol=1e-15)


def test_covering_of_z_rotation():
    th = 0.9
    lam = covering_map(rotation_lift([0, 0, 1], th))
    expected = np.eye(4)
    expected[1:, 1:] = rotation_matrix([0, 0, 1], th)
    assert np.abs(lam - expected).max() <= 1e-12
    assert np.allclose(rotation_matrix([0, 0, 1], th)[:2, :2], [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])


def test_covering_homomorphism_metric_det():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = random_sl2c(rng), random_sl2c(rng)
        la, lb = covering_map(a), covering_map(b)
        assert np.abs(covering_map(a @ b) - la @ lb).max() <= 1e-10 * max(1, np.abs(la @ lb).max())
        assert np.abs(la.T @ METRIC @ la - METRIC).max() <= 1e-10 * max(1, np.abs(la).max() ** 2)
        assert abs(np.linalg.det(la) - 1) <= 1e-9
        assert np.abs(covering_map(-a) - la).max() <= 1e-12
        x, y = rng.normal(size=4), rng.normal(size=4)
        assert abs(minkowski(la @ x, la @ y) - minkowski(x, y)) <= 1e-9 * max(1, np.abs(la).max() ** 2)


def test_det_not_one():
    with pytest.raises(DetNotOne):
        covering_map(2 * np.eye(2))
    with pytest.raises(DetNotOne):
        little_group_element(np.diag([1.0, 2.0]), MassiveMomentum(1.0, [0, 0, 0]))


def test_rotation_lift_examples():
    assert np.allclose(rotation_lift([0, 1, 0], 0.0), np.eye(2))
    assert np.allclose(rotation_lift([0.3, 1, 2], 2 * np.pi), -np.eye(2), atol=1e-15)
    assert np.allclose(rotation_lift([0, 0, 1], np.pi / 2), np.diag([np.exp(-0.25j * np.pi), np.exp(0.25j * np.pi)]))
    u = rotation_lift([1, 2, 3], 1.1)
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-14)


def test_boost_lift_examples():
    chi = 0.8
    assert np.allclose(boost_lift([1, 0, 0], 0.0), np.eye(2))
    assert np.allclose(boost_lift([0, 0, 1], chi), np.diag([np.exp(chi / 2), np.exp(-chi / 2)]))
    mhat = np.array([1.0, -2.0, 0.5])
    b = boost_lift(mhat, chi)
    assert np.allclose(b, b.conj().T) and np.all(np.linalg.eigvalsh(b) > 0)
    assert np.abs(covering_map(b) - _boost_matrix(mhat, chi)).max() <= 1e-12


def test_rotation_boost_commutation():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n, m = rng.normal(size=3), rng.normal(size=3)
        th, chi = rng.uniform(0, 2 * np.pi), rng.uniform(-3, 3)
        lhs = rotation_lift(n, th) @ boost_lift(m, chi)
        rhs = boost_lift(rotation_matrix(n, th) @ m, chi) @ rotation_lift(n, th)
        assert np.abs(lhs - rhs).max() <= 1e-10


def test_canonical_boost():
    q0 = MassiveMomentum(1.3, [0, 0, 0])
    assert np.allclose(canonical_boost(q0), np.eye(2))
    rng = np.random.default_rng(5)
    for _ in range(50):
        q = MassiveMomentum(rng.uniform(0.2, 3), rng.normal(size=3) * 2)
        a = canonical_boost(q)
        assert np.allclose(a, a.conj().T, atol=1e-14) and np.all(np.linalg.eigvalsh(a) > 0)
        assert shell_residual(q, "canonical") <= 1e-10 * q.omega


def test_helicity_boost():
    m, pz = 0.7, 1.9
    q = MassiveMomentum(m, [0, 0, pz])
    w = q.omega
    expected = np.diag([m + w + pz, m + w - pz]) / np.sqrt(2 * m * (m + w))
    assert np.allclose(helicity_boost(q), expected, atol=1e-14)
    assert np.allclose(helicity_boost(MassiveMomentum(m, [0, 0, 0])), np.eye(2))
    rng = np.random.default_rng(6)
    for _ in range(50):
        q = MassiveMomentum(rng.uniform(0.2, 3), rng.normal(size=3) * 2)
        assert shell_residual(q, "helicity") <= 1e-10 * q.omega
        r = np.linalg.norm(q.p)
        factor = axis_rotation(q.p) @ canonical_boost(MassiveMomentum(q.m, [0, 0, r]))
        assert np.abs(helicity_boost(q) - factor).max() <= 1e-10


def test_axis_rotation():
    assert np.allclose(axis_rotation([0, 0, 2.0]), np.eye(2))
    expected = np.array([[1, -1], [1, 1]]) / np.sqrt(2)
    assert np.allclose(axis_rotation([3.0, 0, 0]), expected)
    rng = np.random.default_rng(8)
    for _ in range(30):
        p = rng.normal(size=3)
        lam = covering_map(axis_rotation(p))
        assert np.abs(lam[1:, 3] - p / np.linalg.norm(p)).max() <= 1e-12
    with pytest.raises(PolarAxisSingularity):
        axis_rotation([0, 0, 0])


def test_massless_standard():
    assert np.allclose(massless_standard(MasslessMomentum([0, 0, 1.0])), np.eye(2))
    assert np.allclose(massless_standard(MasslessMomentum([0, 0, 4.0])), np.diag([2, 0.5]))
    rng = np.random.default_rng(9)
    for _ in range(50):
        q = MasslessMomentum(rng.normal(size=3))
        for f in ("helicity", "wightman"):
            assert shell_residual(q, f) <= 1e-10 * max(1, q.omega)
            assert abs(np.linalg.det(massless_standard(q, f)) - 1) <= 1e-12
    down = MasslessMomentum([0, 0, -2.0])
    assert shell_residual(down, "helicity") <= 1e-12
    with pytest.raises(PolarAxisSingularity):
        massless_standard(down, "wightman")
    with pytest.raises(ZeroMomentum):
        MasslessMomentum([0, 0, 0])


def test_little_group_massive():
    rng = np.random.default_rng(10)
    q = MassiveMomentum(1.0, rng.normal(size=3))
    for f in ("canonical", "helicity"):
        assert np.allclose(little_group_element(np.eye(2), q, f), np.eye(2), atol=1e-12)
    u = random_su2(rng)
    assert np.allclose(little_group_element(u, MassiveMomentum(1.0, [0, 0, 0])), u, atol=1e-12)
    for _ in range(30):
        a1, a2 = random_sl2c(rng), random_sl2c(rng)
        q = MassiveMomentum(rng.uniform(0.3, 2), rng.normal(size=3))
        for f in ("canonical", "helicity"):
            w = little_group_element(a1, q, f)
            assert np.abs(w.conj().T @ w - np.eye(2)).max() <= 1e-10
            lhs = little_group_element(a1 @ a2, q, f)
            rhs = little_group_element(a1, act(a2, q), f) @ little_group_element(a2, q, f)
            assert np.abs(lhs - rhs).max() <= 1e-9


def test_little_group_massless_phase():
    rng = np.random.default_rng(11)
    for _ in range(30):
        a1, a2 = random_sl2c(rng), random_sl2c(rng)
        q = MasslessMomentum(rng.normal(size=3))
        w1 = little_group_element(a1, act(a2, q), "helicity")
        w2 = little_group_element(a2, q, "helicity")
        w12 = little_group_element(a1 @ a2, q, "helicity")
        assert isinstance(w12, E2SpinorialElement)
        assert np.abs(w1.compose(w2).matrix() - w12.matrix()).max() <= 1e-8
        for tj in (-2, -1, 1, 2):
            assert abs(w1.character(tj) * w2.character(tj) - w12.character(tj)) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(st.floats(-np.pi, np.pi), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.floats(-np.pi, np.pi), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_e2_group_law(p1, z1, p2, z2):
    e1, e2 = E2SpinorialElement(z1, p1), E2SpinorialElement(z2, p2)
    assert np.abs(e1.compose(e2).matrix() - e1.matrix() @ e2.matrix()).max() <= 1e-12
    back = E2SpinorialElement.from_matrix(e1.matrix())
    assert np.allclose(back.matrix(), e1.matrix())


@settings(max_examples=60, deadline=None)
@given(vec3, st.floats(0.1, 4))
def test_shell_property(p, m):
    q = MassiveMomentum(m, p)
    for f in ("canonical", "helicity"):
        assert shell_residual(q, f) <= 1e-10 * max(1, q.omega)
