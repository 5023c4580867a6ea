"""SU(2) building blocks: half-integers, spin matrices, Wigner D, Clebsch-Gordan.

Basis vectors of a spin-j carrier space are always ordered by descending
projection  m = j, j-1, ..., -j.  Every other module relies on this.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import NoScalar, NonUnitaryInput

PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


@dataclass(frozen=True, order=True)
class HalfInt:
    """Exact half-integer stored as twice its value."""

    twice: int

    @classmethod
    def of(cls, x) -> "HalfInt":
        if isinstance(x, HalfInt):
            return x
        if isinstance(x, (int, np.integer)):
            return cls(2 * int(x))
        f = Fraction(x)
        if (2 * f).denominator != 1:
            raise ValueError(f"{x!r} is not a half-integer")
        return cls(int(2 * f))

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def frac(self) -> Fraction:
        return Fraction(self.twice, 2)

    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def dim(self) -> int:
        if self.twice < 0:
            raise ValueError("dimension of a negative spin")
        return self.twice + 1

    def projections(self) -> list["HalfInt"]:
        """Projections j, j-1, ..., -j as HalfInt."""
        return [HalfInt(self.twice - 2 * k) for k in range(self.twice + 1)]

    def is_projection_of(self, j: "HalfInt") -> bool:
        return abs(self.twice) <= j.twice and (j.twice - self.twice) % 2 == 0

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __add__(self, other) -> "HalfInt":
        return HalfInt(self.twice + HalfInt.of(other).twice)

    def __sub__(self, other) -> "HalfInt":
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return str(self.twice // 2) if self.twice % 2 == 0 else f"{self.twice}/2"


def _h(x) -> HalfInt:
    return HalfInt.of(x)


@dataclass(frozen=True)
class SpinMatrices:
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack([self.jx, self.jy, self.jz])


@lru_cache(maxsize=None)
def _spin_matrices_cached(twice_j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    j = twice_j / 2
    d = twice_j + 1
    ms = j - np.arange(d)
    jp = np.zeros((d, d), dtype=complex)
    # (J+)_{M, M'} = sqrt(j(j+1) - M'(M'+1)) for M = M'+1; row index of M'+1 is one above
    for col in range(1, d):
        mp = ms[col]
        jp[col - 1, col] = math.sqrt(j * (j + 1) - mp * (mp + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(ms).astype(complex)
    for a in (jx, jy, jz):
        a.setflags(write=False)
    return jx, jy, jz


def spin_matrices(j) -> SpinMatrices:
    j = _h(j)
    if j.twice < 0:
        raise ValueError("spin must be non-negative")
    return SpinMatrices(*_spin_matrices_cached(j.twice))


def su2_parameters(u: np.ndarray) -> np.ndarray:
    """Rotation vector theta*n with u = exp(-i theta n.sigma/2), theta in [0, 2pi].

    Works on a single 2x2 matrix or a stack (..., 2, 2).
    """
    u = np.asarray(u, dtype=complex)
    c = np.real(u[..., 0, 0] + u[..., 1, 1]) / 2
    s = np.real(1j * np.einsum("kab,...ba->...k", PAULI, u)) / 2
    sn = np.linalg.norm(s, axis=-1)
    half = np.arctan2(sn, c)
    with np.errstate(invalid="ignore", divide="ignore"):
        n = np.where(sn[..., None] > 0, s / np.where(sn > 0, sn, 1.0)[..., None], np.array([0.0, 0.0, 1.0]))
    return 2 * half[..., None] * n


def check_su2(u: np.ndarray, tol: float = 1e-10) -> None:
    u = np.asarray(u, dtype=complex)
    eye = np.eye(2)
    dev = np.abs(np.swapaxes(u.conj(), -1, -2) @ u - eye).max()
    det = np.abs(np.linalg.det(u) - 1).max()
    if dev > tol or det > tol:
        raise NonUnitaryInput(f"not in SU(2): |u*u-I|={dev:.2e}, |det-1|={det:.2e}")


def rotation_generator(j, v: np.ndarray) -> np.ndarray:
    """v.J for a 3-vector (or stack of 3-vectors) v."""
    jm = spin_matrices(j).as_array()
    return np.einsum("...k,kab->...ab", np.asarray(v, dtype=float), jm)


def wigner_d(j, u: np.ndarray) -> np.ndarray:
    """D^j(u) = exp(-i theta n.J) for u = exp(-i theta n.sigma/2)."""
    check_su2(u)
    v = su2_parameters(u)
    return expm(-1j * rotation_generator(j, v))


def wigner_d_batch(j, us: np.ndarray) -> np.ndarray:
    """Vectorized D^j over a stack of SU(2) matrices (no input validation)."""
    v = su2_parameters(us)
    j = _h(j)
    if j.twice == 0:
        return np.ones(v.shape[:-1] + (1, 1), dtype=complex)
    if j.twice == 1:
        return np.array(us, dtype=complex)
    return expm(-1j * rotation_generator(j, v))


# ---------------------------------------------------------------- Clebsch-Gordan


def _fact(n: int) -> int:
    return math.factorial(n)


@lru_cache(maxsize=65536)
def _cg_twice(tj1: int, tj2: int, tj: int, tm1: int, tm2: int, tm: int) -> float:
    if tm1 + tm2 != tm:
        return 0.0
    for tjj, tmm in ((tj1, tm1), (tj2, tm2), (tj, tm)):
        if tjj < 0 or abs(tmm) > tjj or (tjj - tmm) % 2:
            return 0.0
    if tj < abs(tj1 - tj2) or tj > tj1 + tj2 or (tj1 + tj2 + tj) % 2:
        return 0.0
    # all combinations below are integers
    a = (tj1 + tj2 - tj) // 2
    b = (tj1 - tj2 + tj) // 2
    c = (-tj1 + tj2 + tj) // 2
    top = (tj1 + tj2 + tj) // 2 + 1
    pref = Fraction(
        (tj + 1) * _fact(a) * _fact(b) * _fact(c)
        * _fact((tj + tm) // 2) * _fact((tj - tm) // 2)
        * _fact((tj1 - tm1) // 2) * _fact((tj1 + tm1) // 2)
        * _fact((tj2 - tm2) // 2) * _fact((tj2 + tm2) // 2),
        _fact(top),
    )
    e1 = (tj1 + tj2 - tj) // 2
    e2 = (tj1 - tm1) // 2
    e3 = (tj2 + tm2) // 2
    e4 = (tj - tj2 + tm1) // 2
    e5 = (tj - tj1 - tm2) // 2
    kmin = max(0, -e4, -e5)
    kmax = min(e1, e2, e3)
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = _fact(k) * _fact(e1 - k) * _fact(e2 - k) * _fact(e3 - k) * _fact(e4 + k) * _fact(e5 + k)
        s += Fraction((-1) ** k, den)
    if s == 0:
        return 0.0
    sq = pref * s * s
    val = math.sqrt(sq.numerator) / math.sqrt(sq.denominator) if sq.numerator < 2**1000 else math.sqrt(float(sq))
    return val if s > 0 else -val


def clebsch_gordan(j1, j2, j, m1, m2, m) -> float:
    """<j1 m1 j2 m2 | j m> with the Condon-Shortley phase; 0 for invalid labels."""
    return _cg_twice(_h(j1).twice, _h(j2).twice, _h(j).twice, _h(m1).twice, _h(m2).twice, _h(m).twice)


def cg_matrix(j1, j2, j) -> np.ndarray:
    """Array C[i1, i2, k] = <j1 m1 j2 m2 | j s> in descending-projection indexing."""
    j1, j2, j = _h(j1), _h(j2), _h(j)
    out = np.zeros((j1.dim(), j2.dim(), j.dim()))
    for a, m1 in enumerate(j1.projections()):
        for b, m2 in enumerate(j2.projections()):
            tm = m1.twice + m2.twice
            if abs(tm) <= j.twice:
                k = (j.twice - tm) // 2
                out[a, b, k] = _cg_twice(j1.twice, j2.twice, j.twice, m1.twice, m2.twice, tm)
    return out


def triangle(j1, j2, j) -> bool:
    t1, t2, t = _h(j1).twice, _h(j2).twice, _h(j).twice
    return abs(t1 - t2) <= t <= t1 + t2 and (t1 + t2 + t) % 2 == 0


def coupled_spins(j1, j2) -> list[HalfInt]:
    t1, t2 = _h(j1).twice, _h(j2).twice
    return [HalfInt(t) for t in range(abs(t1 - t2), t1 + t2 + 1, 2)]


def couple_to_scalar(spins: Sequence, j12=None) -> np.ndarray:
    """Rank-4 invariant tensor pairing (1,2) and (3,4) to an intermediate J12.

    T[m1,m2,m3,m4] = sum_M <j1 m1 j2 m2|J12 M><j3 m3 j4 m4|J12 -M><J12 M J12 -M|0 0>.
    With j12=None the smallest admissible intermediate spin is used.
    """
    if len(spins) != 4:
        raise ValueError("couple_to_scalar expects four spins")
    s = [_h(x) for x in spins]
    allowed = sorted(set(x.twice for x in coupled_spins(s[0], s[1])) & set(x.twice for x in coupled_spins(s[2], s[3])))
    if not allowed:
        raise NoScalar(f"spins {[str(x) for x in s]} cannot couple to total spin 0")
    if j12 is None:
        J = HalfInt(allowed[0])
    else:
        J = _h(j12)
        if J.twice not in allowed:
            raise NoScalar(f"intermediate spin {J} not admissible for {[str(x) for x in s]}")
    c12 = cg_matrix(s[0], s[1], J)
    c34 = cg_matrix(s[2], s[3], J)
    dJ = J.dim()
    # <J M J -M | 0 0>; index k <-> M = J - k, so -M sits at index dJ-1-k
    c00 = np.array([clebsch_gordan(J, J, 0, J.twice / 2 - k, -(J.twice / 2 - k), 0) for k in range(dJ)])
    c34_flip = c34[:, :, ::-1]
    return np.einsum("abk,cdk,k->abcd", c12, c34_flip, c00)
