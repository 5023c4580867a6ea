import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyspin.angular import PAULI, HalfInt, wigner_d
from anyspin.errors import DetNotOne
from anyspin.irreps import (
    IrrepLabel,
    d_boost_batch,
    d_boost_canonical,
    d_boost_helicity,
    d_general,
    d_rotation_batch,
    d_su2,
    generators,
    polar_decomposition,
)
from anyspin.lorentz import (
    MassiveMomentum,
    axis_rotation,
    boost_lift,
    canonical_boost,
    helicity_boost,
    random_sl2c,
    random_su2,
)

from oracles import su2_zyz, wigner_D_zyz

SMALL_LABELS = [IrrepLabel.from_twice(a, b) for a in range(5) for b in range(5) if a + b <= 4]


def _levi_civita():
    e = np.zeros((3, 3, 3))
    e[0, 1, 2] = e[1, 2, 0] = e[2, 0, 1] = 1
    e[0, 2, 1] = e[2, 1, 0] = e[1, 0, 2] = -1
    return e


@pytest.mark.parametrize("l", SMALL_LABELS, ids=str)
def test_generator_algebra(l):
    g = generators(l)
    eps = _levi_civita()
    for i in range(3):
        for j in range(3):
            ca = g.A[i] @ g.A[j] - g.A[j] @ g.A[i]
            cb = g.B[i] @ g.B[j] - g.B[j] @ g.B[i]
            assert np.abs(ca - 1j * np.einsum("k,kab->ab", eps[i, j], g.A)).max() <= 1e-12
            assert np.abs(cb - 1j * np.einsum("k,kab->ab", eps[i, j], g.B)).max() <= 1e-12
            assert np.abs(g.A[i] @ g.B[j] - g.B[j] @ g.A[i]).max() <= 1e-12


def test_generator_examples():
    g0 = generators(IrrepLabel.from_twice(0, 0))
    assert g0.A.shape == (3, 1, 1) and not g0.A.any() and not g0.B.any()
    g = generators(IrrepLabel.from_twice(1, 0))
    assert np.allclose(g.A, PAULI / 2) and not g.B.any()


def test_d_general_trivial_cases():
    rng = np.random.default_rng(0)
    for l in SMALL_LABELS:
        assert np.allclose(d_general(l, np.eye(2)), np.eye(l.dim), atol=1e-13)
    u = random_su2(rng)
    assert np.allclose(d_general(IrrepLabel.from_twice(2, 0), u), wigner_d(HalfInt(2), u), atol=1e-12)
    a = random_sl2c(rng)
    assert np.allclose(d_general(IrrepLabel.from_twice(0, 1), a), a, atol=1e-12)
    assert np.allclose(d_general(IrrepLabel.from_twice(1, 0), a), np.linalg.inv(a.conj().T), atol=1e-12)


def test_d_general_boost_z():
    chi = 0.6
    a = boost_lift([0, 0, 1], chi)
    assert np.allclose(d_general(IrrepLabel.from_twice(0, 1), a), np.diag([np.exp(chi / 2), np.exp(-chi / 2)]))
    assert np.allclose(d_general(IrrepLabel.from_twice(1, 0), a), np.diag([np.exp(-chi / 2), np.exp(chi / 2)]))


def test_polar_decomposition():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = random_sl2c(rng, scale=2)
        h, u = polar_decomposition(a)
        assert np.allclose(h @ u, a) and np.allclose(h, h.conj().T)
        assert np.all(np.linalg.eigvalsh(h) > 0) and np.allclose(u.conj().T @ u, np.eye(2))


def test_d_general_homomorphism():
    rng = np.random.default_rng(2)
    for l in SMALL_LABELS:
        for _ in range(50):
            a, b = random_sl2c(rng), random_sl2c(rng)
            ab = d_general(l, a @ b)
            assert np.abs(ab - d_general(l, a) @ d_general(l, b)).max() <= 1e-8 * max(1, np.abs(ab).max())


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.floats(0, 2 * np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi)), st.integers(0, 3), st.integers(0, 3))
def test_su2_restriction(eul, t1, t2):
    u = su2_zyz(*eul)
    l = IrrepLabel.from_twice(t1, t2)
    expected = np.kron(wigner_D_zyz(t1, *eul), wigner_D_zyz(t2, *eul))
    d = d_general(l, u)
    assert np.abs(d - expected).max() <= 1e-10
    assert np.abs(d_su2(l, u) - expected).max() <= 1e-10
    assert np.abs(d.conj().T @ d - np.eye(l.dim)).max() <= 1e-10


def test_boost_not_unitary():
    a = boost_lift([0.2, 0.3, 1], 1.0)
    for l in SMALL_LABELS:
        if l.J1 != l.J2:
            d = d_general(l, a)
            assert np.abs(d.conj().T @ d - np.eye(l.dim)).max() > 1e-3


def test_canonical_boost_examples():
    l = IrrepLabel.from_twice(1, 0)
    q = MassiveMomentum(0.9, [0.4, -1.0, 0.7])
    assert np.allclose(d_boost_canonical(l, q), np.linalg.inv(canonical_boost(q)), atol=1e-12)
    assert np.allclose(d_boost_canonical(IrrepLabel.from_twice(2, 3), MassiveMomentum(1.0, [0, 0, 0])), np.eye(12))
    d = d_boost_canonical(IrrepLabel.from_twice(1, 1), MassiveMomentum(1.0, [0, 0, 1.5]))
    assert np.allclose(d, np.diag(np.diag(d)))


def test_helicity_boost_examples():
    m, pz = 1.1, 0.8
    q = MassiveMomentum(m, [0, 0, pz])
    l = IrrepLabel.from_twice(2, 1)
    e = (pz + q.omega) / m
    m1 = np.repeat([1, 0, -1], 2)
    m2 = np.tile([0.5, -0.5], 3)
    assert np.allclose(d_boost_helicity(l, q), np.diag(e ** (m2 - m1)), atol=1e-12)
    assert np.allclose(d_boost_helicity(l, MassiveMomentum(m, [0, 0, 0])), np.eye(l.dim))


@pytest.mark.parametrize("l", SMALL_LABELS, ids=str)
def test_closed_forms_match_general(l):
    rng = np.random.default_rng(3)
    for _ in range(10):
        q = MassiveMomentum(rng.uniform(0.3, 2), rng.normal(size=3) * 2)
        gc = d_general(l, canonical_boost(q))
        gh = d_general(l, helicity_boost(q))
        assert np.abs(d_boost_canonical(l, q) - gc).max() <= 1e-9 * max(1, np.abs(gc).max())
        assert np.abs(d_boost_helicity(l, q) - gh).max() <= 1e-9 * max(1, np.abs(gh).max())
        # helicity = D(B_p) times the canonical boost along z
        qz = MassiveMomentum(q.m, [0, 0, np.linalg.norm(q.p)])
        fac = d_general(l, axis_rotation(q.p)) @ d_boost_canonical(l, qz)
        assert np.abs(d_boost_helicity(l, q) - fac).max() <= 1e-9 * max(1, np.abs(fac).max())


def test_batched_forms_agree():
    rng = np.random.default_rng(4)
    P = rng.normal(size=(12, 3))
    P[0] = 0
    for l in SMALL_LABELS:
        for f, single in (("canonical", d_boost_canonical), ("helicity", d_boost_helicity)):
            batch = d_boost_batch(l, 0.7, P, f)
            for k in range(len(P)):
                ref = single(l, MassiveMomentum(0.7, P[k]))
                assert np.abs(batch[k] - ref).max() <= 1e-10 * max(1, np.abs(ref).max())
        us = np.stack([random_su2(rng) for _ in range(5)])
        rb = d_rotation_batch(l, us)
        for k in range(5):
            assert np.abs(rb[k] - d_su2(l, us[k])).max() <= 1e-12


def test_det_check():
    with pytest.raises(DetNotOne):
        d_general(IrrepLabel.from_twice(1, 1), np.diag([2.0, 2.0]))
