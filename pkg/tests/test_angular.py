import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyspin.angular import (
    PAULI,
    HalfInt,
    cg_matrix,
    clebsch_gordan,
    couple_to_scalar,
    spin_matrices,
    wigner_d,
)
from anyspin.errors import NonUnitaryInput, NoScalar
from anyspin.lorentz import random_su2

from oracles import cg_ladder, cg_sympy, invariant_null_space, su2_zyz, wigner_D_zyz

angles = st.tuples(
    st.floats(0, 2 * np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi)
)


# ---------------------------------------------------------------- HalfInt


def test_halfint_projections_descending():
    j = HalfInt(3)
    assert [m.twice for m in j.projections()] == [3, 1, -1, -3]
    assert j.dim() == 4 and not j.is_integer()
    assert HalfInt.of(0.5) == HalfInt(1) and HalfInt.of(2) == HalfInt(4)
    with pytest.raises(ValueError):
        HalfInt.of(0.3)


# ---------------------------------------------------------------- spin matrices


def test_spin_half_is_pauli_over_two():
    s = spin_matrices(HalfInt(1)).as_array()
    assert np.allclose(s, PAULI / 2, atol=1e-15)


def test_spin_zero_is_trivial():
    s = spin_matrices(HalfInt(0)).as_array()
    assert s.shape == (3, 1, 1) and not s.any()


@pytest.mark.parametrize("tj", range(0, 9))
def test_spin_algebra_and_casimir(tj):
    jx, jy, jz = spin_matrices(HalfInt(tj)).as_array()
    j = tj / 2
    assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() <= 1e-12
    assert np.abs(jy @ jz - jz @ jy - 1j * jx).max() <= 1e-12
    assert np.abs(jz @ jx - jx @ jz - 1j * jy).max() <= 1e-12
    cas = jx @ jx + jy @ jy + jz @ jz
    assert np.abs(cas - j * (j + 1) * np.eye(tj + 1)).max() <= 1e-12
    assert np.allclose(np.diag(jz), j - np.arange(tj + 1))
    for m in (jx, jy, jz):
        assert np.array_equal(m, m.conj().T)


# ---------------------------------------------------------------- Wigner D


def test_wigner_identity_and_defining():
    rng = np.random.default_rng(1)
    for tj in range(6):
        assert np.allclose(wigner_d(HalfInt(tj), np.eye(2)), np.eye(tj + 1), atol=1e-14)
    u = random_su2(rng)
    assert np.allclose(wigner_d(HalfInt(1), u), u, atol=1e-13)


def test_wigner_spin1_z_rotation():
    phi = 0.7
    u = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    expected = np.diag([np.exp(-1j * phi), 1, np.exp(1j * phi)])
    assert np.allclose(wigner_d(HalfInt(2), u), expected, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(angles, st.integers(0, 6))
def test_wigner_matches_euler_oracle(eul, tj):
    u = su2_zyz(*eul)
    assert np.abs(wigner_d(HalfInt(tj), u) - wigner_D_zyz(tj, *eul)).max() <= 1e-10


def test_wigner_homomorphism_and_inverse():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        u1, u2 = random_su2(rng), random_su2(rng)
        for tj in range(7):
            j = HalfInt(tj)
            d1, d2 = wigner_d(j, u1), wigner_d(j, u2)
            worst = max(worst, np.abs(wigner_d(j, u1 @ u2) - d1 @ d2).max())
            assert np.abs(wigner_d(j, u1.conj().T) - d1.conj().T).max() <= 1e-10
            assert np.abs(d1.conj().T @ d1 - np.eye(tj + 1)).max() <= 1e-10
    assert worst <= 1e-10


def test_wigner_rejects_non_unitary():
    with pytest.raises(NonUnitaryInput):
        wigner_d(HalfInt(2), np.array([[1.0, 0.1], [0.0, 1.0]]))


# ---------------------------------------------------------------- Clebsch-Gordan


def test_cg_examples():
    for tj in range(6):
        for ts in range(-tj, tj + 1, 2):
            # <j s 0 0 | j s> = 1
            assert clebsch_gordan(HalfInt(tj), HalfInt(0), HalfInt(tj), HalfInt(ts), HalfInt(0), HalfInt(ts)) == 1.0
    h = HalfInt(1)
    assert clebsch_gordan(h, h, HalfInt(4), h, h, HalfInt(2)) == 0.0
    assert abs(clebsch_gordan(h, h, HalfInt(0), h, HalfInt(-1), HalfInt(0)) - 1 / np.sqrt(2)) <= 1e-15
    assert clebsch_gordan(h, h, HalfInt(2), h, HalfInt(-1), HalfInt(2)) == 0.0


def _all_labels(max_twice=5):
    for t1 in range(max_twice + 1):
        for t2 in range(max_twice + 1):
            for tj in range(abs(t1 - t2), t1 + t2 + 1, 2):
                yield t1, t2, tj


def test_cg_against_sympy():
    worst = 0.0
    for t1, t2, tj in _all_labels():
        c = cg_matrix(HalfInt(t1), HalfInt(t2), HalfInt(tj))
        for a, tm1 in enumerate(range(t1, -t1 - 1, -2)):
            for b, tm2 in enumerate(range(t2, -t2 - 1, -2)):
                for k, tm in enumerate(range(tj, -tj - 1, -2)):
                    worst = max(worst, abs(c[a, b, k] - cg_sympy(t1, tm1, t2, tm2, tj, tm)))
    assert worst <= 1e-13


def test_cg_against_ladder_construction():
    worst = 0.0
    for t1 in range(6):
        for t2 in range(6):
            ref = cg_ladder(t1, t2)
            for tj, cols in ref.items():
                c = cg_matrix(HalfInt(t1), HalfInt(t2), HalfInt(tj)).reshape(-1, tj + 1)
                worst = max(worst, np.abs(c - cols).max())
    assert worst <= 1e-13


def test_cg_orthogonality_and_selection():
    for t1 in range(6):
        for t2 in range(6):
            blocks = []
            for tj in range(abs(t1 - t2), t1 + t2 + 1, 2):
                c = cg_matrix(HalfInt(t1), HalfInt(t2), HalfInt(tj))
                m1 = (t1 - 2 * np.arange(t1 + 1))[:, None, None]
                m2 = (t2 - 2 * np.arange(t2 + 1))[None, :, None]
                m = (tj - 2 * np.arange(tj + 1))[None, None, :]
                assert np.all(c[m1 + m2 != m] == 0)
                blocks.append(c.reshape(-1, tj + 1))
            u = np.concatenate(blocks, axis=1)
            assert np.abs(u.T @ u - np.eye(u.shape[1])).max() <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 10), st.integers(-10, 10), st.integers(-10, 10))
def test_cg_invalid_labels_vanish(t1, t2, tj, tm1, tm2):
    v = clebsch_gordan(HalfInt(t1), HalfInt(t2), HalfInt(tj), HalfInt(tm1), HalfInt(tm2), HalfInt(tm1 + tm2))
    valid = (
        abs(t1 - t2) <= tj <= t1 + t2 and (t1 + t2 + tj) % 2 == 0
        and abs(tm1) <= t1 and (t1 - tm1) % 2 == 0
        and abs(tm2) <= t2 and (t2 - tm2) % 2 == 0
        and abs(tm1 + tm2) <= tj
    )
    if not valid:
        assert v == 0.0


# ---------------------------------------------------------------- scalar coupling


def _in_span(t: np.ndarray, basis: np.ndarray) -> float:
    v = t.reshape(-1)
    proj = basis @ (basis.conj().T @ v)
    return float(np.linalg.norm(v - proj))


def test_couple_to_scalar_trivial():
    t = couple_to_scalar([HalfInt(0)] * 4)
    assert t.shape == (1, 1, 1, 1) and t[0, 0, 0, 0] == 1.0


def test_couple_four_halves_is_epsilon_pairing():
    h = HalfInt(1)
    t = couple_to_scalar([h, h, h, h], HalfInt(0))
    eps = np.array([[0, 1], [-1, 0]]) / np.sqrt(2)
    expected = np.einsum("ab,cd->abcd", eps, eps)
    ratio = t.reshape(-1) @ expected.reshape(-1) / np.linalg.norm(expected) ** 2
    assert np.abs(t - ratio * expected).max() <= 1e-14 and abs(ratio) > 0
    assert _in_span(t, invariant_null_space([1, 1, 1, 1])) <= 1e-12


def test_couple_spin_one_pair():
    t = couple_to_scalar([HalfInt(2), HalfInt(2), HalfInt(0), HalfInt(0)])[:, :, 0, 0]
    ms = [1, 0, -1]
    eps = np.array([[(-1) ** (1 - m) * (m == -mp) for mp in ms] for m in ms], dtype=float)
    ratio = np.sum(t * eps) / np.sum(eps * eps)
    assert np.abs(t - ratio * eps).max() <= 1e-14
    null = invariant_null_space([2, 2])
    assert null.shape[1] == 1 and _in_span(t, null) <= 1e-12


@pytest.mark.parametrize("spins", [(2, 2, 1, 1), (2, 0, 1, 1), (4, 2, 1, 1), (3, 1, 2, 0), (2, 2, 2, 2)])
def test_couple_to_scalar_invariant(spins):
    t = couple_to_scalar([HalfInt(s) for s in spins])
    ops = [spin_matrices(HalfInt(s)).as_array() for s in spins]
    for k in range(3):
        r = (np.einsum("ia,abcd->ibcd", ops[0][k], t) + np.einsum("ib,abcd->aicd", ops[1][k], t)
             + np.einsum("ic,abcd->abid", ops[2][k], t) + np.einsum("id,abcd->abci", ops[3][k], t))
        assert np.abs(r).max() <= 1e-12
    assert _in_span(t, invariant_null_space(list(spins))) <= 1e-12
    rng = np.random.default_rng(3)
    u = random_su2(rng)
    ds = [wigner_d(HalfInt(s), u) for s in spins]
    rot = np.einsum("ia,jb,kc,ld,abcd->ijkl", *ds, t)
    assert np.abs(rot - t).max() <= 1e-12


def test_couple_to_scalar_rejects():
    with pytest.raises(NoScalar):
        couple_to_scalar([HalfInt(2), HalfInt(0), HalfInt(1), HalfInt(0)])
    with pytest.raises(NoScalar):
        couple_to_scalar([HalfInt(4), HalfInt(0), HalfInt(1), HalfInt(1)])
    with pytest.raises(NoScalar):
        couple_to_scalar([HalfInt(1)] * 4, HalfInt(4))
