"""Eigenvalues, thresholds, the cutoff ladder, gap and Mourre certificates."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import CertificateFailure, EmptyWindow, NoConvergence
from .fock import ModeGrid, ladders
from .model import BoundConstants, Model, ModelConfig, build_model, relative_bound_constants, smoothstep_cut

DENSE_MAX = 1000


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)
    residuals: np.ndarray
    tol: float
    norm_estimate: float
    method: str

    @property
    def E(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def gap(self) -> float:
        return float(self.eigenvalues[1] - self.eigenvalues[0]) if len(self.eigenvalues) > 1 else math.inf

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "residuals": self.residuals.tolist(),
            "tol": self.tol,
            "norm_estimate": self.norm_estimate,
            "method": self.method,
        }


def _norm_estimate(h: sp.spmatrix) -> float:
    """max absolute row sum, an upper bound on the spectral norm."""
    return float(np.abs(h).sum(axis=1).max()) if h.nnz else 0.0


def lowest_eigs(h, k: int = 2, tol: float = 1e-10, seed: int = 0) -> SpectralReport:
    """k smallest eigenpairs of a hermitian matrix with a residual check.

    Diagonal input returns its sorted diagonal exactly; small matrices are
    diagonalized densely; larger ones go through ARPACK (thick-restart Lanczos).
    """
    h = sp.csr_matrix(h)
    n = h.shape[0]
    k = min(k, n)
    nrm = _norm_estimate(h)
    off = h - sp.diags(h.diagonal())
    off.eliminate_zeros()
    if off.nnz == 0:
        d = np.real(h.diagonal())
        idx = np.argsort(d, kind="stable")[:k]
        vecs = np.zeros((n, k), dtype=complex)
        vecs[idx, np.arange(k)] = 1.0
        return SpectralReport(d[idx], vecs, np.zeros(k), tol, nrm, "diagonal")
    if n <= DENSE_MAX:
        w, v = np.linalg.eigh(h.toarray())
        w, v, method = w[:k], v[:, :k], "dense"
    else:
        v0 = np.random.default_rng(seed).normal(size=n).astype(complex)
        try:
            w, v = eigsh(h, k=k, which="SA", tol=tol, v0=v0, ncv=max(2 * k + 1, 40), maxiter=20 * n)
        except ArpackNoConvergence as e:
            raise NoConvergence(f"lanczos did not converge for k={k}: {e}") from None
        # degenerate Ritz vectors from ARPACK need not be orthogonal; Rayleigh-Ritz on their span
        q, _ = np.linalg.qr(v)
        hs = q.conj().T @ (h @ q)
        w, y = np.linalg.eigh(0.5 * (hs + hs.conj().T))
        v, method = q @ y, "lanczos"
    res = np.linalg.norm(h @ v - v * w[None, :], axis=0)
    bound = max(tol, 1e-12) * max(nrm, 1.0) * 10
    if np.any(res > bound):
        raise NoConvergence(f"residual {res.max():.2e} above {bound:.2e}")
    return SpectralReport(np.asarray(w, dtype=float), v, res, tol, nrm, method)


def thresholds(m1: float, m2: float, m3: float, cap: int) -> list[float]:
    """Sorted distinct energies p m1 + q m2 + r m3 with 1 <= p+q+r and each <= cap."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    vals = {round(p * m1 + q * m2 + r * m3, 12)
            for p in range(cap + 1) for q in range(cap + 1) for r in range(cap + 1) if p + q + r >= 1}
    return sorted(vals)


@dataclass(frozen=True)
class CutoffLadder:
    delta: float
    m3: float
    gamma: float
    sigmas: tuple[float, ...]  # sigma_0 .. sigma_N
    near_boundary: bool = False

    @property
    def tau(self) -> float:
        return 1 - self.delta / (2 * (2 * self.m3 - self.delta))

    @property
    def N(self) -> int:
        """Smallest integer with N gamma >= 1."""
        return max(1, math.ceil(1 / self.gamma - 1e-12))

    def sigma(self, n: int) -> float:
        if n < len(self.sigmas):
            return self.sigmas[n]
        return self.sigmas[1] * self.gamma ** (n - 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(tau=self.tau, N=self.N)
        return d


def sigma_ladder(delta: float, m3: float, N: int) -> CutoffLadder:
    if not 0 < delta < m3:
        raise ValueError("need 0 < delta < m3")
    gamma = 1 - delta / (2 * m3 - delta)
    s = [2 * m3 + 1, m3 - delta / 2]
    while len(s) < N + 1:
        s.append(s[-1] * gamma)
    return CutoffLadder(delta, m3, gamma, tuple(s[: N + 1]), near_boundary=gamma < 1e-2)


# ------------------------------------------------------------------ certificate constants


@dataclass(frozen=True)
class CertificateConstants:
    bound: BoundConstants
    ladder: CutoffLadder
    D_tilde: float

    def g_delta(self) -> float:
        """min of g3 = 1/(4K) and the admissible g_delta^(1) upper limit."""
        b, gam = self.bound, self.ladder.gamma
        g1d = min(1.0, b.g1, (gam - gam**2) / (3 * self.D_tilde))
        return min(1 / (4 * b.K), g1d)

    def epsilon_gamma(self, g: float) -> float:
        lad = self.ladder
        a = (1 - 3 * g * self.D_tilde / lad.gamma - lad.gamma) / (2 * lad.N)
        return min(a, (lad.tau - lad.gamma) / 4)

    def window(self, g: float, n: int) -> tuple[float, float]:
        eps = self.epsilon_gamma(g)
        s = self.ladder.sigma(n)
        gam = self.ladder.gamma
        return ((gam - eps) ** 2 * s, (gam + eps) * s)

    def to_dict(self) -> dict:
        return {"bound": self.bound.to_dict(), "ladder": self.ladder.to_dict(), "D_tilde": self.D_tilde}


def certificate_constants(model: Model, n_ladder: int = 6, n_states: int = 100, seed: int = 0) -> CertificateConstants:
    cfg = model.config
    m3 = cfg.masses[2]
    bc = relative_bound_constants(model, n_states=n_states, seed=seed)
    lad = sigma_ladder(cfg.delta, m3, n_ladder)
    pre = max(4 * (2 * m3 + 1) * lad.gamma / (2 * m3 - cfg.delta), 2.0)
    D = pre * bc.K_tilde * (2 * m3 * bc.K1 + bc.K2)
    return CertificateConstants(bc, lad, float(D))


# ------------------------------------------------------------------ gap


@dataclass(frozen=True)
class GapCertificate:
    n: int
    sigma: float
    g: float
    E: float
    gap: float
    bound: float
    energy_bound: float
    in_regime: bool
    dim: int
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def gap_certificate(config: ModelConfig, g: float, n: int, consts: CertificateConstants,
                    tol: float = 1e-10, seed: int = 0) -> GapCertificate:
    """Check the gap of the cutoff Hamiltonian above its ground state at step n."""
    s = consts.ladder.sigma(n)
    m = build_model(config, sigma=s)
    rep = lowest_eigs(m.hamiltonian(g), k=2, tol=tol, seed=seed)
    b = consts.bound
    bound = (1 - 3 * g * consts.D_tilde / consts.ladder.gamma) * s
    ebound = g * b.b * b.K / (1 - b.g1 * b.K)
    slack = 10 * tol * max(rep.norm_estimate, 1.0)
    ok = rep.gap >= bound - slack and abs(rep.E) <= ebound + slack
    return GapCertificate(n, s, g, rep.E, rep.gap, float(bound), float(ebound), g <= consts.g_delta(),
                          m.space.dim, bool(ok))


# ------------------------------------------------------------------ dilation / Mourre


def chi_tau(x: np.ndarray, tau: float) -> np.ndarray:
    """1 on (-inf, tau], 0 on [1, inf), quintic smoothstep between."""
    t = np.clip((np.asarray(x, dtype=float) - tau) / (1 - tau), 0.0, 1.0)
    return 1.0 - t**3 * (10 - 15 * t + 6 * t**2)


def _diff_matrix(x: np.ndarray) -> np.ndarray:
    """Lagrange differentiation matrix on distinct nodes (barycentric form)."""
    m = len(x)
    if m == 1:
        return np.zeros((1, 1))
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    c = 1.0 / np.prod(dx, axis=1)
    D = (c[None, :] / c[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def direction_groups(grid: ModeGrid) -> list[np.ndarray]:
    """Node indices sharing a direction, each sorted by radius."""
    u = np.round(grid.nodes / grid.radii[:, None], 10)
    _, inv = np.unique(u, axis=0, return_inverse=True)
    inv = np.asarray(inv).reshape(-1)
    out = []
    for gid in range(inv.max() + 1):
        idx = np.nonzero(inv == gid)[0]
        out.append(idx[np.argsort(grid.radii[idx])])
    return out


def dilation_generator(grid: ModeGrid, tau: float, n: int, ladder: CutoffLadder) -> np.ndarray:
    """Real antisymmetric D with a_n = i D on mode amplitudes sqrt(w_k) f(p_k).

    T represents chi^2 r d/dr along each ray and D = (T - T^t)/2, the
    discrete version of chi^2 p.grad + (3/2) chi^2 + (r/2)(chi^2)'.
    """
    K = len(grid)
    D = np.zeros((K, K))
    r = grid.radii
    chi2 = chi_tau(r / ladder.sigma(n), tau) ** 2
    sw = np.sqrt(grid.weights)
    for idx in direction_groups(grid):
        T = (sw[idx] * r[idx] * chi2[idx])[:, None] * _diff_matrix(r[idx]) / sw[idx][None, :]
        D[np.ix_(idx, idx)] += 0.5 * (T - T.T)
    return D


def second_quantize(model: Model, a: np.ndarray) -> sp.csr_matrix:
    """dGamma(a) = sum_kl a_kl b*_k b_l on the massless species."""
    lads = ladders(model.space, 3)
    n = model.space.dim
    out = sp.csr_matrix((n, n), dtype=complex)
    for k, l in zip(*np.nonzero(a)):
        out = out + a[k, l] * (lads[k].T @ lads[l])
    return out.tocsr()


def _window_pairs(h: sp.csr_matrix, lo: float, hi: float, tol: float, seed: int):
    """Eigenpairs whose shifted energy lies in [lo, hi], with the ground energy."""
    n = h.shape[0]
    k = min(16, n)
    while True:
        rep = lowest_eigs(h, k=k, tol=tol, seed=seed)
        w = rep.eigenvalues - rep.E
        if w[-1] > hi or k >= n or rep.method == "dense":
            if rep.method == "dense" and k < n and w[-1] <= hi:
                k = n
                continue
            sel = (w >= lo) & (w <= hi)
            return rep.E, w[sel], rep.vectors[:, sel], rep
        k = min(2 * k, n)


@dataclass(frozen=True)
class MourreReport:
    n: int
    g: float
    sigma: float
    window: tuple[float, float]
    epsilon_gamma: float
    E: float
    window_energies: list[float]
    lowest: float
    c: float
    reference: float
    explicit_free_lowest: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def mourre_residual(model: Model, g: float, n: int, consts: CertificateConstants,
                    tol: float = 1e-10, seed: int = 0) -> MourreReport:
    """Lowest eigenvalue of E_D [H, iA_n] E_D on the spectral window D_n of H - E.

    The interaction part of the commutator is the exact matrix commutator with
    A_n = dGamma(a_n); the free part uses dGamma(chi_n^2 |p|), the second
    quantized symbol, because the discrete i[omega, a] has zero diagonal.
    """
    lad = consts.ladder
    eps = consts.epsilon_gamma(g)
    if eps <= 0:
        raise CertificateFailure(f"epsilon_gamma = {eps:.3e} <= 0 at g = {g:.3e}: window undefined")
    lo, hi = consts.window(g, n)
    s = lad.sigma(n)
    H = model.hamiltonian(g)
    E, wE, V, _ = _window_pairs(H, lo, hi, tol, seed)
    if V.shape[1] == 0:
        raise EmptyWindow(f"no eigenvalue of H - E in [{lo:.4f}, {hi:.4f}] (n={n})")
    grid = model.species[3].grid
    D = dilation_generator(grid, lad.tau, n, lad)
    A = second_quantize(model, 1j * D)
    r = grid.radii
    symbol = chi_tau(r / s, lad.tau) ** 2 * r
    occ = model.space.basis[:, model.space.species_slice(3)].astype(float)
    free = occ @ symbol
    HI = model.HI
    MV = free[:, None] * V + g * 1j * (HI @ (A @ V) - A @ (HI @ V))
    C = V.conj().T @ MV
    C = 0.5 * (C + C.conj().T)
    lowest = float(np.linalg.eigvalsh(C)[0])
    CE = V.conj().T @ (1j * (model.H0 @ (A @ V) - A @ (model.H0 @ V)))
    CE = 0.5 * (CE + CE.conj().T)
    explicit = float(np.linalg.eigvalsh(CE)[0])
    ref = lad.gamma**2 / lad.N**2 * s
    return MourreReport(n, g, s, (float(lo), float(hi)), float(eps), E, wE.tolist(), lowest,
                        lowest / s, float(ref), explicit, bool(lowest > 0))


# ------------------------------------------------------------------ infrared scaling


def massless_number(model: Model, vec: np.ndarray) -> float:
    """sum over massless modes of ||b_k phi||^2 = <phi, N_4 phi>."""
    occ = model.space.counts(3).astype(float)
    return float(np.real(np.vdot(vec, occ * vec)))


@dataclass(frozen=True)
class InfraredFit:
    gs: list[float]
    numbers: list[float]
    exponent: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


def infrared_scaling(config: ModelConfig, consts: CertificateConstants, n: int = 2,
                     fractions=(1 / 16, 1 / 8, 1 / 4, 1 / 2), tol: float = 1e-10, seed: int = 0) -> InfraredFit:
    """Fit log <N_4> against log g in the ground state of the cutoff Hamiltonian."""
    m = build_model(config, sigma=consts.ladder.sigma(n))
    gs = [f * consts.bound.g1 for f in fractions]
    nums = []
    for g in gs:
        rep = lowest_eigs(m.hamiltonian(g), k=1, tol=tol, seed=seed)
        nums.append(massless_number(m, rep.vectors[:, 0]))
    slope = np.polyfit(np.log(gs), np.log(nums), 1)[0]
    return InfraredFit(gs, nums, float(slope), n)


__all__ = [
    "SpectralReport", "lowest_eigs", "thresholds", "CutoffLadder", "sigma_ladder",
    "CertificateConstants", "certificate_constants", "GapCertificate", "gap_certificate",
    "chi_tau", "dilation_generator", "second_quantize", "MourreReport", "mourre_residual",
    "massless_number", "InfraredFit", "infrared_scaling", "smoothstep_cut",
]
