"""Coefficient functions u, v of causal fields, covariance residuals and
numerical (anti)commutator kernels.

Massive fields:   u(p,s) = (2 omega)^{-1/2} D(A_p) c_s,  c_s[M1,M2] = <J1 M1 J2 M2|j s>
                  v(p,s) = (-1)^{j+s} u(p,-s)
Massless fields:  u(p) = v(p) = (2|p|)^{J1+J2-1/2} D^{J1}(B_p)[:, -J1] x D^{J2}(B_p)[:, J2]

B_p is the axis rotation of lorentz.axis_rotation, which is also the rotation
inside the helicity standard transformations, so that covariance holds with the
little-group phases computed in lorentz.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .angular import HalfInt, cg_matrix, triangle, wigner_d, wigner_d_batch
from .errors import QuadratureUnderResolved, SpecViolation, ZeroMomentum
from .irreps import IrrepLabel, d_boost_batch, d_general
from .lorentz import (
    MassiveMomentum,
    MasslessMomentum,
    act,
    axis_rotation_batch,
    little_group_element,
)


@dataclass(frozen=True)
class FieldSpec:
    kind: str  # "massive" | "massless"
    statistics: str  # "boson" | "fermion"
    mass: float
    j: HalfInt  # spin, or signed helicity for massless
    irrep: IrrepLabel
    formalism: str = "canonical"

    def __post_init__(self):
        object.__setattr__(self, "j", HalfInt.of(self.j))
        l = self.irrep
        if self.kind == "massive":
            if self.mass <= 0:
                raise SpecViolation("massive field needs mass > 0")
            if self.j.twice < 0 or not triangle(l.J1, l.J2, self.j):
                raise SpecViolation(f"spin {self.j} not contained in {l}")
            if self.formalism not in ("canonical", "helicity"):
                raise SpecViolation(f"unknown formalism {self.formalism!r}")
        elif self.kind == "massless":
            if self.mass != 0:
                raise SpecViolation("massless field needs mass 0")
            if self.j.twice != l.J2.twice - l.J1.twice:
                raise SpecViolation(f"helicity {self.j} must equal J2-J1 for {l}")
        else:
            raise SpecViolation(f"unknown kind {self.kind!r}")
        want = "boson" if self.j.is_integer() else "fermion"
        if self.statistics != want:
            raise SpecViolation(f"spin {self.j} requires {want} statistics")

    @classmethod
    def massive(cls, mass, j, J1, J2, formalism="canonical") -> "FieldSpec":
        j = HalfInt.of(j)
        stat = "boson" if j.is_integer() else "fermion"
        return cls("massive", stat, float(mass), j, IrrepLabel(J1, J2), formalism)

    @classmethod
    def massless(cls, J1, J2) -> "FieldSpec":
        l = IrrepLabel(J1, J2)
        j = l.J2 - l.J1
        stat = "boson" if j.is_integer() else "fermion"
        return cls("massless", stat, 0.0, j, l, "helicity")

    @property
    def dim(self) -> int:
        return self.irrep.dim

    @property
    def n_spin(self) -> int:
        """Number of spin labels carried by the particle."""
        return self.j.dim() if self.kind == "massive" else 1

    def spin_labels(self) -> list[HalfInt]:
        return self.j.projections() if self.kind == "massive" else [self.j]

    def beta(self) -> int:
        """Relative phase of the antiparticle part, fixed to (-1)^{2 J2}."""
        return -1 if self.irrep.J2.twice % 2 else 1


@dataclass(frozen=True)
class CoeffTable:
    """u and v at one momentum, shape (dim, n_spin), rows in carrier order."""

    u: np.ndarray
    v: np.ndarray
    rows: list
    spins: list


def _cg_columns(spec: FieldSpec) -> np.ndarray:
    l = spec.irrep
    return cg_matrix(l.J1, l.J2, spec.j).reshape(l.dim, spec.j.dim())


def _v_from_u(spec: FieldSpec, u: np.ndarray) -> np.ndarray:
    # column k holds s = j - k, so -s sits at column n-1-k; (-1)^{j+s} = (-1)^{2j-k}
    n = spec.j.dim()
    signs = np.array([1 if ((spec.j.twice + (spec.j.twice - 2 * k)) // 2) % 2 == 0 else -1 for k in range(n)])
    return u[..., ::-1] * signs


def _spin_index(spec: FieldSpec, s) -> int:
    s = HalfInt.of(s)
    if not s.is_projection_of(spec.j):
        raise SpecViolation(f"{s} is not a projection of {spec.j}")
    return (spec.j.twice - s.twice) // 2


def u_massive_table(spec: FieldSpec, P: np.ndarray) -> np.ndarray:
    """u(p, s) for every row of P (N, 3): array (N, dim, 2j+1)."""
    if spec.kind != "massive":
        raise SpecViolation("u_massive needs a massive field")
    P = np.asarray(P, dtype=float).reshape(-1, 3)
    omega = np.sqrt(np.einsum("ni,ni->n", P, P) + spec.mass**2)
    d = d_boost_batch(spec.irrep, spec.mass, P, spec.formalism)
    return (d @ _cg_columns(spec)) / np.sqrt(2 * omega)[:, None, None]


def v_massive_table(spec: FieldSpec, P: np.ndarray) -> np.ndarray:
    return _v_from_u(spec, u_massive_table(spec, P))


def u_massive(spec: FieldSpec, p, s) -> np.ndarray:
    return u_massive_table(spec, np.asarray(p, dtype=float))[0, :, _spin_index(spec, s)]


def v_massive(spec: FieldSpec, p, s) -> np.ndarray:
    return v_massive_table(spec, np.asarray(p, dtype=float))[0, :, _spin_index(spec, s)]


def u_massless_table(l: IrrepLabel, P: np.ndarray) -> np.ndarray:
    """u(p) for every row of P (N, 3): array (N, dim)."""
    P = np.asarray(P, dtype=float).reshape(-1, 3)
    r = np.linalg.norm(P, axis=1)
    if np.any(r == 0):
        raise ZeroMomentum("massless coefficients need |p| > 0")
    b = axis_rotation_batch(P)
    c1 = wigner_d_batch(l.J1, b)[:, :, -1]  # column M1' = -J1
    c2 = wigner_d_batch(l.J2, b)[:, :, 0]  # column M2' = J2
    col = np.einsum("na,nb->nab", c1, c2).reshape(len(P), l.dim)
    return col * ((2 * r) ** (l.J1.value + l.J2.value - 0.5))[:, None]


def u_massless(l: IrrepLabel, p) -> np.ndarray:
    return u_massless_table(l, np.asarray(p, dtype=float))[0]


def coefficient_tables(spec: FieldSpec, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(u, v) of shape (N, dim, n_spin) for either kind."""
    if spec.kind == "massive":
        u = u_massive_table(spec, P)
        return u, _v_from_u(spec, u)
    u = u_massless_table(spec.irrep, P)[:, :, None]
    return u, u.copy()


def coefficient_table(spec: FieldSpec, p) -> CoeffTable:
    u, v = coefficient_tables(spec, np.asarray(p, dtype=float))
    return CoeffTable(u[0], v[0], spec.irrep.index_labels(), spec.spin_labels())


def growth_ratio(spec: FieldSpec, P: np.ndarray) -> np.ndarray:
    """max_{M,s} |u| / (1+|p|)^{J1+J2-1/2} per row (|p|^{...} scaling for massless)."""
    u, v = coefficient_tables(spec, P)
    r = np.linalg.norm(np.asarray(P, dtype=float).reshape(-1, 3), axis=1)
    expo = spec.irrep.J1.value + spec.irrep.J2.value - 0.5
    base = (1 + r) if spec.kind == "massive" else 2 * r
    m = np.maximum(np.abs(u).max(axis=(1, 2)), np.abs(v).max(axis=(1, 2)))
    return m / base**expo


# ------------------------------------------------------------------ covariance


def covariance_residual(spec: FieldSpec, a: np.ndarray, p) -> float:
    """max |LHS - RHS| of the transformation law of u and v at one momentum.

    Massive:  D(a) u(p,s) = (omega_{Lp}/omega_p)^{1/2} sum_s' u(Lp,s') D^j_{s's}(W)
              and the same for v with conj(D^j).
    Massless: D(a) u(p) = (|Lp|/|p|)^{1/2} e^{-i j phi(W)} u(Lp).
    """
    a = np.asarray(a, dtype=complex)
    p = np.asarray(p, dtype=float)
    D = d_general(spec.irrep, a)
    if spec.kind == "massive":
        q = MassiveMomentum(spec.mass, p)
        lq = act(a, q)
        W = little_group_element(a, q, spec.formalism)
        Dj = wigner_d(spec.j, W)
        u0, v0 = coefficient_tables(spec, q.p)
        u1, v1 = coefficient_tables(spec, lq.p)
        f = np.sqrt(lq.omega / q.omega)
        ru = D @ u0[0] - f * (u1[0] @ Dj)
        rv = D @ v0[0] - f * (v1[0] @ Dj.conj())
        return float(max(np.abs(ru).max(), np.abs(rv).max()))
    q = MasslessMomentum(p)
    lq = act(a, q)
    W = little_group_element(a, q, "helicity")
    L = W.character(spec.j.twice)
    u0 = u_massless(spec.irrep, q.p)
    u1 = u_massless(spec.irrep, lq.p)
    f = np.sqrt(lq.omega / q.omega)
    return float(np.abs(D @ u0 - f * L * u1).max())


# ------------------------------------------------------------------ causality


@dataclass(frozen=True)
class CausalityQuadrature:
    """Spherical product grid around the separation direction.

    Radial Gauss-Legendre on [0, p_max], Gauss-Legendre in cos(theta) measured
    from the separation axis, trapezoid in the azimuth.  The integrand carries
    the damping window exp(-(eps p)^2).
    """

    eps: float = 0.05
    p_max: float = 120.0
    n_radial: int = 400
    n_polar: int = 200
    n_azimuth: int = 8
    max_phase_per_node: float = 1.5

    def nodes(self, axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Momentum nodes (N, 3) and weights (window included)."""
        xr, wr = np.polynomial.legendre.leggauss(self.n_radial)
        pr = 0.5 * self.p_max * (xr + 1)
        wr = 0.5 * self.p_max * wr
        c, wc = np.polynomial.legendre.leggauss(self.n_polar)
        phi = 2 * np.pi * np.arange(self.n_azimuth) / self.n_azimuth
        wphi = np.full(self.n_azimuth, 2 * np.pi / self.n_azimuth)
        e3 = np.asarray(axis, dtype=float)
        e3 = e3 / np.linalg.norm(e3)
        helper = np.array([0.0, 0.0, 1.0]) if abs(e3[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        e1 = np.cross(helper, e3)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(e3, e1)
        s = np.sqrt(1 - c**2)
        dirs = (
            c[:, None, None] * e3
            + (s[:, None] * np.cos(phi)[None, :])[..., None] * e1
            + (s[:, None] * np.sin(phi)[None, :])[..., None] * e2
        ).reshape(-1, 3)
        wdir = (wc[:, None] * wphi[None, :]).reshape(-1)
        P = (pr[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        w = (wr[:, None] * pr[:, None] ** 2 * wdir[None, :]).reshape(-1)
        w = w * np.exp(-((self.eps * np.linalg.norm(P, axis=1)) ** 2))
        return P, w

    def check(self, x: np.ndarray) -> None:
        t, r = abs(float(x[0])), float(np.linalg.norm(x[1:]))
        radial = self.p_max * (t + r) / self.n_radial
        polar = self.p_max * r / self.n_polar
        if max(radial, polar) > self.max_phase_per_node:
            raise QuadratureUnderResolved(
                f"phase per node {max(radial, polar):.2f} exceeds {self.max_phase_per_node}"
            )


@dataclass
class _KernelTables:
    P: np.ndarray
    w: np.ndarray
    omega: np.ndarray
    uu: np.ndarray  # (N, d, d')
    vv: np.ndarray
    sign: complex


def _kernel_tables(spec, partner, quad, axis, flip) -> _KernelTables:
    P, w = quad.nodes(axis)
    # the origin is never a node (open Gauss-Legendre), so massless tables are defined
    u, v = coefficient_tables(spec, P)
    u2, v2 = coefficient_tables(partner, P)
    uu = np.einsum("nas,nbs->nab", u, u2.conj())
    vv = np.einsum("nas,nbs->nab", v, v2.conj())
    eta = 1 if spec.statistics == "fermion" else -1
    sign = eta * spec.beta() * partner.beta()
    if flip:
        sign = -sign
    omega = np.sqrt(np.einsum("ni,ni->n", P, P) + spec.mass**2)
    return _KernelTables(P, w, omega, uu, vv, sign)


def _check_partner(spec: FieldSpec, partner: FieldSpec) -> None:
    if partner.kind != spec.kind or partner.mass != spec.mass or partner.statistics != spec.statistics:
        raise SpecViolation("partner field must describe the same particle")
    if spec.kind == "massive" and partner.j != spec.j:
        raise SpecViolation("partner field must carry the same spin")
    if spec.kind == "massless" and partner.j != spec.j:
        raise SpecViolation("partner field must carry the same helicity")


def commutator_scan(spec: FieldSpec, points, quad: CausalityQuadrature | None = None,
                    partner: FieldSpec | None = None, flip: bool = False) -> np.ndarray:
    """Kernel of [psi_M(x), psi'_M'(0)*]_(+-) at each four-vector x; shape (n, d, d').

    K = (2pi)^-3 int d^3p w(p) sum_s [u_M conj(u'_M') e^{-ipx} + sign v_M conj(v'_M') e^{ipx}]
    with sign = eta beta conj(beta') (eta = -1 for bosons, +1 for fermions).  flip=True
    reverses that sign, which breaks causality and serves as a control.
    """
    quad = quad or CausalityQuadrature()
    partner = partner or spec
    _check_partner(spec, partner)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    for x in pts:
        quad.check(x)
    out = np.zeros((len(pts), spec.dim, partner.dim), dtype=complex)
    cache: dict[tuple, _KernelTables] = {}
    for i, x in enumerate(pts):
        r = np.linalg.norm(x[1:])
        axis = x[1:] / r if r > 0 else np.array([0.0, 0.0, 1.0])
        key = tuple(np.round(axis, 12))
        if key not in cache:
            cache[key] = _kernel_tables(spec, partner, quad, axis, flip)
        tb = cache[key]
        px = tb.omega * x[0] - tb.P @ x[1:]  # p.x with p0 = omega
        e = np.exp(-1j * px) * tb.w
        out[i] = np.einsum("n,nab->ab", e, tb.uu) + tb.sign * np.einsum("n,nab->ab", e.conj(), tb.vv)
    return out / (2 * np.pi) ** 3


def commutator_function(spec: FieldSpec, x, quad: CausalityQuadrature | None = None,
                        partner: FieldSpec | None = None, flip: bool = False) -> np.ndarray:
    return commutator_scan(spec, [x], quad, partner, flip)[0]


def default_probes(mass: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Spacelike probe set (10 points) and timelike reference set (3 points).

    Spacelike points lie at invariant distance 0.5..1.0 (in units of 1/mass) with
    r - |t| >= 0.4/mass, so the damping window does not reach across the cone.
    """
    rows = [[0.0, si, 0.0, 0.0] for si in np.linspace(0.5, 1.0, 5)]
    for si in np.linspace(0.6, 1.0, 5):
        rows.append([0.2, np.sqrt(si**2 + 0.04), 0.0, 0.0])
    space = np.array(rows) / mass
    time = np.array([[t / mass, 0.3 / mass, 0.0, 0.0] for t in (1.0, 1.5, 2.0)])
    return space, time


@dataclass
class CausalityReport:
    spacelike: np.ndarray
    timelike: np.ndarray
    flipped: np.ndarray
    reference: float
    max_relative: float
    flipped_min_relative: float
    tol: float = 1e-2
    control: float = 0.3
    points: np.ndarray = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.max_relative <= self.tol and self.flipped_min_relative >= self.control


def causality_check(spec: FieldSpec, quad: CausalityQuadrature | None = None,
                    partner: FieldSpec | None = None, space=None, time=None) -> CausalityReport:
    m = spec.mass if spec.mass > 0 else 1.0
    ds, dt = default_probes(m)
    space = ds if space is None else np.asarray(space, dtype=float)
    time = dt if time is None else np.asarray(time, dtype=float)
    ks = commutator_scan(spec, space, quad, partner)
    kt = commutator_scan(spec, time, quad, partner)
    kf = commutator_scan(spec, space, quad, partner, flip=True)
    ref = float(np.abs(kt).max())
    sp = np.abs(ks).max(axis=(1, 2))
    fl = np.abs(kf).max(axis=(1, 2))
    return CausalityReport(sp, np.abs(kt).max(axis=(1, 2)), fl, ref,
                           float(sp.max() / ref), float(fl.min() / ref), points=space)
