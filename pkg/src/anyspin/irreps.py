"""Finite-dimensional irreducible representations D^{[J1,J2]} of SL(2,C).

Carrier index (M1, M2) is flattened M1-major, both descending.  With
A = J^(1) x I and B = I x J^(2), an element a = h u (h = exp(chi m.sigma/2),
u = exp(-i theta n.sigma/2)) is represented by

    D(a) = exp(-chi m.(A - B)) exp(-i theta n.(A + B)),

so (0,1/2) is the defining representation and (1/2,0) is a -> (a*)^{-1}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .angular import PAULI, HalfInt, spin_matrices, su2_parameters, wigner_d, wigner_d_batch
from .lorentz import MassiveMomentum, axis_rotation, axis_rotation_batch, check_det


@dataclass(frozen=True)
class IrrepLabel:
    J1: HalfInt
    J2: HalfInt

    def __post_init__(self):
        object.__setattr__(self, "J1", HalfInt.of(self.J1))
        object.__setattr__(self, "J2", HalfInt.of(self.J2))
        if self.J1.twice < 0 or self.J2.twice < 0:
            raise ValueError("irrep labels must be non-negative")

    @classmethod
    def from_twice(cls, t1: int, t2: int) -> "IrrepLabel":
        return cls(HalfInt(t1), HalfInt(t2))

    @property
    def dim(self) -> int:
        return self.J1.dim() * self.J2.dim()

    def index_labels(self) -> list[tuple[HalfInt, HalfInt]]:
        return [(m1, m2) for m1 in self.J1.projections() for m2 in self.J2.projections()]

    def __str__(self) -> str:
        return f"[{self.J1},{self.J2}]"


@dataclass(frozen=True)
class IrrepGenerators:
    A: np.ndarray  # (3, d, d)
    B: np.ndarray

    @property
    def J(self) -> np.ndarray:
        return self.A + self.B

    @property
    def K(self) -> np.ndarray:
        return -1j * (self.A - self.B)


def generators(l: IrrepLabel) -> IrrepGenerators:
    j1 = spin_matrices(l.J1).as_array()
    j2 = spin_matrices(l.J2).as_array()
    i1, i2 = np.eye(l.J1.dim()), np.eye(l.J2.dim())
    A = np.stack([np.kron(j1[k], i2) for k in range(3)])
    B = np.stack([np.kron(i1, j2[k]) for k in range(3)])
    return IrrepGenerators(A, B)


def polar_decomposition(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """a = h u with h positive hermitian and u in SU(2).

    For 2x2 unimodular a, h = sqrt(a a*) = (a a* + I)/sqrt(tr(a a*) + 2).
    """
    aa = a @ a.conj().T
    h = (aa + np.eye(2)) / np.sqrt(np.real(np.trace(aa)) + 2)
    u = np.linalg.solve(h, a)
    return h, u


def boost_parameters(h: np.ndarray) -> np.ndarray:
    """Vector chi*m with h = cosh(chi/2) + sinh(chi/2) m.sigma."""
    s = np.real(np.einsum("kab,ba->k", PAULI, h)) / 2
    sn = np.linalg.norm(s)
    if sn == 0:
        return np.zeros(3)
    return 2 * np.arcsinh(sn) * s / sn


def d_general(l: IrrepLabel, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    check_det(a)
    if l.dim == 1:
        return np.ones((1, 1), dtype=complex)
    h, u = polar_decomposition(a)
    g = generators(l)
    v = su2_parameters(u)
    c = boost_parameters(h)
    dh = expm(-np.einsum("k,kab->ab", c, g.A - g.B))
    du = expm(-1j * np.einsum("k,kab->ab", v, g.A + g.B))
    return dh @ du


def d_su2(l: IrrepLabel, u: np.ndarray) -> np.ndarray:
    """Restriction to SU(2): D^{J1}(u) x D^{J2}(u)."""
    return np.kron(wigner_d(l.J1, u), wigner_d(l.J2, u))


def _rapidity(q: MassiveMomentum) -> float:
    r = float(np.linalg.norm(q.p))
    return float(np.log((r + q.omega) / q.m))


def d_boost_canonical(l: IrrepLabel, q: MassiveMomentum) -> np.ndarray:
    """exp(-chi phat.J1) x exp(+chi phat.J2), e^chi = (|p| + omega)/m."""
    r = float(np.linalg.norm(q.p))
    if r == 0:
        return np.eye(l.dim, dtype=complex)
    chi = _rapidity(q)
    n = q.p / r
    j1 = spin_matrices(l.J1).as_array()
    j2 = spin_matrices(l.J2).as_array()
    e1 = expm(-chi * np.einsum("k,kab->ab", n, j1))
    e2 = expm(chi * np.einsum("k,kab->ab", n, j2))
    return np.kron(e1, e2)


def _boost_z_diagonal(l: IrrepLabel, chi) -> np.ndarray:
    """Diagonal of D(boost along z) = e^{chi (M2 - M1)}; chi may be an array."""
    m1 = np.array([m.value for m in l.J1.projections()])
    m2 = np.array([m.value for m in l.J2.projections()])
    expo = (m2[None, :] - m1[:, None]).reshape(-1)
    return np.exp(np.multiply.outer(chi, expo))


def d_boost_helicity(l: IrrepLabel, q: MassiveMomentum) -> np.ndarray:
    """D^{J1}(B_p) D^{J2}(B_p) ((|p|+omega)/m)^{M2'-M1'}."""
    r = float(np.linalg.norm(q.p))
    if r == 0:
        return np.eye(l.dim, dtype=complex)
    b = axis_rotation(q.p)
    rot = np.kron(wigner_d(l.J1, b), wigner_d(l.J2, b))
    return rot * _boost_z_diagonal(l, _rapidity(q))[None, :]


# ------------------------------------------------------------------ batched forms


def d_rotation_batch(l: IrrepLabel, us: np.ndarray) -> np.ndarray:
    d1 = wigner_d_batch(l.J1, us)
    d2 = wigner_d_batch(l.J2, us)
    n = us.shape[0]
    return np.einsum("nac,nbd->nabcd", d1, d2).reshape(n, l.dim, l.dim)


def d_boost_batch(l: IrrepLabel, m: float, P: np.ndarray, formalism: str) -> np.ndarray:
    """D^{[J1,J2]}(A_p) for every row of P (N, 3); identity rows at p = 0."""
    P = np.asarray(P, dtype=float).reshape(-1, 3)
    n = P.shape[0]
    r = np.linalg.norm(P, axis=1)
    omega = np.sqrt(r**2 + m**2)
    chi = np.log((r + omega) / m)
    out = np.tile(np.eye(l.dim, dtype=complex), (n, 1, 1))
    nz = r > 0
    if not nz.any() or l.dim == 1:
        return out
    b = axis_rotation_batch(P[nz])
    rot = d_rotation_batch(l, b)
    diag = _boost_z_diagonal(l, chi[nz])
    if formalism == "helicity":
        out[nz] = rot * diag[:, None, :]
    elif formalism == "canonical":
        # exp(-chi phat.(A-B)) = R diag(e^{chi(M2-M1)}) R* with R = D(B_p)
        out[nz] = np.einsum("nab,nb,ncb->nac", rot, diag, rot.conj())
    else:
        raise ValueError(f"unknown formalism {formalism!r}")
    return out
