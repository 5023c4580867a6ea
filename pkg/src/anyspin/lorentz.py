"""Minkowski geometry, SL(2,C) and standard boosts.

Metric diag(1,-1,-1,-1).  A four-vector p is identified with the hermitian
matrix p^mu sigma_mu; an element a of SL(2,C) acts by X -> a X a*.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import PAULI
from .errors import DetNotOne, PolarAxisSingularity, ZeroMomentum

SIGMA = np.concatenate([np.eye(2, dtype=complex)[None], PAULI])  # sigma_0..sigma_3
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
GEOM_TOL = 1e-10
K0 = np.array([1.0, 0.0, 0.0, 1.0])


def minkowski(x: np.ndarray, y: np.ndarray) -> float:
    return float(x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3])


@dataclass(frozen=True)
class MassiveMomentum:
    m: float
    p: np.ndarray

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError("massive momentum needs m > 0")
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3))

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.p @ self.p + self.m**2))

    def four(self) -> np.ndarray:
        return np.concatenate([[self.omega], self.p])

    def reference(self) -> np.ndarray:
        return np.array([self.m, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class MasslessMomentum:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(3)
        if np.linalg.norm(p) == 0:
            raise ZeroMomentum("massless momentum must be nonzero")
        object.__setattr__(self, "p", p)

    @property
    def omega(self) -> float:
        return float(np.linalg.norm(self.p))

    def four(self) -> np.ndarray:
        return np.concatenate([[self.omega], self.p])

    def reference(self) -> np.ndarray:
        return K0.copy()


def momentum_like(q, p3: np.ndarray):
    """Same kind (and mass) as q, with spatial part p3."""
    if isinstance(q, MassiveMomentum):
        return MassiveMomentum(q.m, p3)
    return MasslessMomentum(p3)


@dataclass(frozen=True)
class E2SpinorialElement:
    """Upper triangular [[e^{-i phi/2}, z], [0, e^{i phi/2}]]."""

    z: complex
    phi: float

    def matrix(self) -> np.ndarray:
        return np.array([[np.exp(-0.5j * self.phi), self.z], [0.0, np.exp(0.5j * self.phi)]])

    @classmethod
    def from_matrix(cls, w: np.ndarray, tol: float = 1e-8) -> "E2SpinorialElement":
        w = np.asarray(w, dtype=complex)
        if abs(w[1, 0]) > tol or abs(abs(w[0, 0]) - 1) > tol:
            raise ValueError("matrix is not in the E2 spinorial group")
        phi = float(-2 * np.angle(w[0, 0]))
        return cls(complex(w[0, 1]), phi)

    def compose(self, other: "E2SpinorialElement") -> "E2SpinorialElement":
        z = self.z * np.exp(0.5j * other.phi) + other.z * np.exp(-0.5j * self.phi)
        return E2SpinorialElement(complex(z), self.phi + other.phi)

    def character(self, twice_j: int) -> complex:
        """Little-group phase L^j = e^{-i j phi}, evaluated as (w00)^{2j}."""
        w00 = np.exp(-0.5j * self.phi)
        return w00**twice_j if twice_j >= 0 else np.conj(w00) ** (-twice_j)


def check_det(a: np.ndarray, tol: float = GEOM_TOL) -> None:
    d = np.linalg.det(a)
    if abs(d - 1) > tol:
        raise DetNotOne(f"|det a - 1| = {abs(d - 1):.3e}")


def to_matrix(x: np.ndarray) -> np.ndarray:
    return np.einsum("m,mab->ab", np.asarray(x, dtype=float), SIGMA)


def from_matrix(xm: np.ndarray) -> np.ndarray:
    # x^mu = tr(sigma_mu X)/2 for the Pauli basis, no metric sign since X = x^mu sigma_mu
    return np.real(np.einsum("mab,ba->m", SIGMA, xm)) / 2


def covering_map(a: np.ndarray) -> np.ndarray:
    """Lambda(a)^mu_nu = tr(sigma_mu a sigma_nu a*)/2."""
    a = np.asarray(a, dtype=complex)
    check_det(a)
    asa = np.einsum("bc,ncd,ed->nbe", a, SIGMA, a.conj())  # a sigma_nu a*
    return np.real(np.einsum("mab,nba->mn", SIGMA, asa)) / 2


def rotation_lift(n: np.ndarray, theta: float) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    return np.cos(theta / 2) * SIGMA[0] - 1j * np.sin(theta / 2) * np.einsum("k,kab->ab", n, PAULI)


def boost_lift(mhat: np.ndarray, chi: float) -> np.ndarray:
    mhat = np.asarray(mhat, dtype=float)
    mhat = mhat / np.linalg.norm(mhat)
    return np.cosh(chi / 2) * SIGMA[0] + np.sinh(chi / 2) * np.einsum("k,kab->ab", mhat, PAULI)


def rotation_matrix(n: np.ndarray, theta: float) -> np.ndarray:
    """3x3 rotation R(n, theta), right-handed."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return np.eye(3) + np.sin(theta) * k + (1 - np.cos(theta)) * (k @ k)


def polar_angles(p: np.ndarray) -> tuple[float, float]:
    """(theta, phi) with theta in [0, pi], phi in [0, 2pi), phi = 0 on the axis."""
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p)
    if r == 0:
        raise PolarAxisSingularity("direction of the zero vector")
    theta = float(np.arccos(np.clip(p[2] / r, -1.0, 1.0)))
    rho = np.hypot(p[0], p[1])
    phi = 0.0 if rho == 0 else float(np.mod(np.arctan2(p[1], p[0]), 2 * np.pi))
    return theta, phi


def _axis_rotation_angles(theta: float, phi: float) -> np.ndarray:
    ep, em = np.exp(0.5j * phi), np.exp(-0.5j * phi)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[em * c, -em * s], [ep * s, ep * c]])


def axis_rotation(phat: np.ndarray) -> np.ndarray:
    """B_p: SU(2) lift of the rotation carrying z onto the direction phat."""
    theta, phi = polar_angles(phat)
    return _axis_rotation_angles(theta, phi)


def axis_rotation_batch(p: np.ndarray) -> np.ndarray:
    """Vectorized axis_rotation for an (N, 3) array of nonzero vectors."""
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p, axis=-1)
    theta = np.arccos(np.clip(p[..., 2] / r, -1.0, 1.0))
    rho = np.hypot(p[..., 0], p[..., 1])
    phi = np.where(rho == 0, 0.0, np.mod(np.arctan2(p[..., 1], p[..., 0]), 2 * np.pi))
    ep, em = np.exp(0.5j * phi), np.exp(-0.5j * phi)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(p.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = em * c
    out[..., 0, 1] = -em * s
    out[..., 1, 0] = ep * s
    out[..., 1, 1] = ep * c
    return out


def canonical_boost(q: MassiveMomentum) -> np.ndarray:
    m, w = q.m, q.omega
    return ((m + w) * SIGMA[0] + np.einsum("k,kab->ab", q.p, PAULI)) / np.sqrt(2 * m * (m + w))


def helicity_boost(q: MassiveMomentum) -> np.ndarray:
    """Helicity standard boost; identity at rest where the polar angles are undefined."""
    m, w = q.m, q.omega
    r = float(np.linalg.norm(q.p))
    if r == 0:
        return np.eye(2, dtype=complex)
    theta, phi = polar_angles(q.p)
    alpha, beta = m + w + r, m + w - r
    ep, em = np.exp(0.5j * phi), np.exp(-0.5j * phi)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    mat = np.array([[alpha * em * c, -beta * em * s], [alpha * ep * s, beta * ep * c]])
    return mat / np.sqrt(2 * m * (m + w))


def massless_standard(q: MasslessMomentum, formalism: str = "helicity") -> np.ndarray:
    p = q.p
    r = q.omega
    if formalism == "wightman":
        s = r + p[2]
        if s <= 1e-300 or s < 1e-12 * r:
            raise PolarAxisSingularity("Wightman boost is singular for p along -z")
        return np.array(
            [[np.sqrt(s / 2), 0.0], [(p[0] + 1j * p[1]) / np.sqrt(2 * s), np.sqrt(2 / s)]],
            dtype=complex,
        )
    if formalism == "helicity":
        return axis_rotation(p) @ np.diag([np.sqrt(r), 1 / np.sqrt(r)]).astype(complex)
    raise ValueError(f"unknown massless formalism {formalism!r}")


def standard_boost(q, formalism: str) -> np.ndarray:
    if isinstance(q, MassiveMomentum):
        if formalism == "canonical":
            return canonical_boost(q)
        if formalism == "helicity":
            return helicity_boost(q)
        raise ValueError(f"unknown massive formalism {formalism!r}")
    return massless_standard(q, formalism)


def act(a: np.ndarray, q):
    """Momentum Lambda(a) q of the same kind."""
    lam = covering_map(a)
    return momentum_like(q, (lam @ q.four())[1:])


def little_group_element(a: np.ndarray, q, formalism: str = "canonical"):
    """W(a, q) = A_{Lambda(a) q}^{-1} a A_q.

    Returns a 2x2 SU(2) matrix for massive q and an E2SpinorialElement for
    massless q.
    """
    a = np.asarray(a, dtype=complex)
    check_det(a)
    lq = act(a, q)
    w = np.linalg.solve(standard_boost(lq, formalism), a @ standard_boost(q, formalism))
    if isinstance(q, MassiveMomentum):
        return w
    return E2SpinorialElement.from_matrix(w, tol=1e-7)


def shell_residual(q, formalism: str) -> float:
    """|Lambda(A_q) k - q| for the reference vector of q's kind."""
    lam = covering_map(standard_boost(q, formalism))
    return float(np.abs(lam @ q.reference() - q.four()).max())


def random_sl2c(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random element h u with |rapidity| <= 2*scale."""
    n = rng.normal(size=3)
    mvec = rng.normal(size=3)
    u = rotation_lift(n, rng.uniform(0, 4 * np.pi))
    h = boost_lift(mvec, rng.uniform(-2, 2) * scale)
    return h @ u


def random_su2(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return np.array([[q[0] - 1j * q[3], -q[2] - 1j * q[1]], [q[2] - 1j * q[1], q[0] + 1j * q[3]]])
