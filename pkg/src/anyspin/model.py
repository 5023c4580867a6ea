"""Four-species decay model: free Hamiltonian, cutoff interaction, constants.

Species order is fixed: boson (m1, j1), boson (m2, j2), massive fermion
(m3, j3) and a massless fermion whose antiparticle has helicity j4 < 0.
Massive legs carry (2pi)^{-3/2} u(p, s) in the helicity formalism by
default; the massless leg carries u(p) of its irrep.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .angular import HalfInt, couple_to_scalar, triangle
from .errors import ConfigInvalid, NoScalar, SpecViolation
from .fields import FieldSpec, coefficient_tables
from .fock import Caps, FockSpace, ModeGrid, SpeciesSpec, build_space, ladders
from .irreps import IrrepLabel, d_general
from .lorentz import random_sl2c

TWO_PI_3 = (2 * np.pi) ** -3
SPECIES_NAMES = ("boson1", "boson2", "fermion3", "massless4")


@dataclass(frozen=True)
class GridSpec:
    edges: tuple[float, ...]
    per_panel: int = 1
    dirs: int = 2

    def build(self) -> ModeGrid:
        return ModeGrid.spherical(self.edges, self.per_panel, self.dirs)


@dataclass(frozen=True)
class KernelParams:
    kind: str = "split"
    cutoff: float = 1.0  # Gaussian scale of F and G
    f_amp: tuple[float, float] = (1.0, 0.5)
    g_amp: tuple[float, float] = (1.0, 1.0)
    gt_amp: tuple[float, float] = (100.0, 100.0)
    eta: float = 0.5


@dataclass(frozen=True)
class ModelConfig:
    masses: tuple[float, float, float] = (2.0, 0.8, 0.5)
    spins_twice: tuple[int, int, int, int] = (2, 0, 1, -1)
    irreps_twice: tuple[tuple[int, int], ...] = ((1, 1), (0, 0), (1, 0), (0, 1))
    formalism: str = "helicity"
    grids: tuple[GridSpec, ...] = (
        GridSpec((0.0, 1.0), 1, 2),
        GridSpec((0.0, 1.0), 1, 2),
        GridSpec((0.0, 1.0), 1, 2),
        GridSpec((0.3, 0.42, 1.2), 2, 2),
    )
    boson_cap: int = 2
    species_caps: tuple[int | None, ...] = (2, 1, 1, 2)
    total_cap: int | None = 4
    max_dim: int = 20000
    kernels: KernelParams = field(default_factory=KernelParams)
    g_fraction: float = 0.5  # g1 = g_fraction / K
    delta_fraction: float = 0.2  # delta = delta_fraction * m3
    large: bool = False
    name: str = "default"

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "spins_twice", tuple(int(s) for s in self.spins_twice))
        object.__setattr__(self, "irreps_twice", tuple(tuple(int(x) for x in r) for r in self.irreps_twice))
        object.__setattr__(self, "species_caps", tuple(self.species_caps))
        grids = tuple(g if isinstance(g, GridSpec) else GridSpec(tuple(g["edges"]), g.get("per_panel", 1), g.get("dirs", 2))
                      for g in self.grids)
        object.__setattr__(self, "grids", grids)
        if isinstance(self.kernels, dict):
            kp = {k: tuple(v) if isinstance(v, list) else v for k, v in self.kernels.items()}
            object.__setattr__(self, "kernels", KernelParams(**kp))
        self.validate()

    # ---------------------------------------------------------------- validation

    def validate(self) -> None:
        m1, m2, m3 = self.masses
        if not m1 > m2 > m3 > 0:
            raise ConfigInvalid("mass ordering m1 > m2 > m3 > 0", f"got {self.masses}")
        if not m1 > m2 + m3:
            raise ConfigInvalid("decay threshold m1 > m2 + m3", f"got {m1} <= {m2 + m3}")
        if len(self.spins_twice) != 4 or len(self.irreps_twice) != 4 or len(self.grids) != 4:
            raise ConfigInvalid("four species", "spins, irreps and grids need four entries")
        t1, t2, t3, t4 = self.spins_twice
        if t1 < 0 or t1 % 2 or t2 < 0 or t2 % 2:
            raise ConfigInvalid("boson spins are non-negative integers", f"twice spins {t1}, {t2}")
        if t3 < 0 or t3 % 2 != 1:
            raise ConfigInvalid("massive fermion spin is half-odd", f"twice spin {t3}")
        if t4 >= 0 or t4 % 2 != 1:
            raise ConfigInvalid("massless helicity j4 < 0 and half-odd", f"twice helicity {t4}")
        for i in range(3):
            a, b = self.irreps_twice[i]
            if a < 0 or b < 0 or not triangle(HalfInt(a), HalfInt(b), HalfInt(self.spins_twice[i])):
                raise ConfigInvalid("massive irrep contains the spin", f"species {i + 1}: irrep {(a, b)}, 2j={self.spins_twice[i]}")
        a, b = self.irreps_twice[3]
        if b - a != -t4:
            raise ConfigInvalid("massless irrep J2 - J1 = -j4", f"irrep {(a, b)}, 2j4={t4}")
        for k, label in enumerate(("first", "second")):
            try:
                couple_to_scalar([HalfInt(r[k]) for r in self.irreps_twice])
            except NoScalar as e:
                raise ConfigInvalid(f"{label} irrep labels couple to a scalar", str(e)) from None
        if self.kernels.kind != "split":
            raise ConfigInvalid("split kernel", f"kernel kind {self.kernels.kind!r} is not supported")
        if self.formalism not in ("helicity", "canonical"):
            raise ConfigInvalid("formalism", f"unknown {self.formalism!r}")
        if not 0 < self.delta_fraction < 1:
            raise ConfigInvalid("0 < delta < m3", f"delta_fraction {self.delta_fraction}")
        if not 0 < self.g_fraction < 1:
            raise ConfigInvalid("0 < g1 K < 1", f"g_fraction {self.g_fraction}")
        if self.grids[3].edges[0] <= 0:
            raise ConfigInvalid("massless grid avoids p = 0", f"edges {self.grids[3].edges}")

    # ---------------------------------------------------------------- io

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grids"] = [asdict(g) for g in self.grids]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigInvalid("known config keys", f"unexpected {sorted(extra)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as e:
            raise ConfigInvalid("config parse", str(e)) from None

    @classmethod
    def from_json(cls, path) -> "ModelConfig":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigInvalid("config parse", str(e)) from None
        return cls.from_dict(d)

    # ---------------------------------------------------------------- derived

    @property
    def delta(self) -> float:
        return self.delta_fraction * self.masses[2]

    def irreps(self) -> list[IrrepLabel]:
        return [IrrepLabel.from_twice(a, b) for a, b in self.irreps_twice]

    def field_specs(self) -> list[FieldSpec]:
        out = []
        stats = ("boson", "boson", "fermion")
        for i in range(3):
            l = self.irreps()[i]
            out.append(FieldSpec("massive", stats[i], self.masses[i], HalfInt(self.spins_twice[i]), l, self.formalism))
        l4 = self.irreps()[3]
        out.append(FieldSpec.massless(l4.J1, l4.J2))
        return out

    def species(self, grids: list[ModeGrid] | None = None) -> list[SpeciesSpec]:
        grids = grids or [g.build() for g in self.grids]
        stats = ("boson", "boson", "fermion", "fermion")
        masses = self.masses + (0.0,)
        labels = [HalfInt(t) for t in self.spins_twice[:3]] + [HalfInt(-self.spins_twice[3])]
        return [SpeciesSpec(SPECIES_NAMES[i], stats[i], masses[i], labels[i], grids[i], self.species_caps[i])
                for i in range(4)]

    def caps(self) -> Caps:
        return Caps(boson=self.boson_cap, total=self.total_cap, max_dim=self.max_dim)


def default_config() -> ModelConfig:
    return ModelConfig()


def cobalt_config() -> ModelConfig:
    """Spin 5 -> spin 4 decay with electron and antineutrino; large basis."""
    return ModelConfig(
        masses=(2.0, 0.8, 0.5),
        spins_twice=(10, 8, 1, -1),
        irreps_twice=((5, 5), (4, 4), (1, 0), (0, 1)),
        large=True,
        max_dim=2_000_000,
        name="cobalt",
    )


# ------------------------------------------------------------------ one-body pieces


def dispersion(species: SpeciesSpec, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    r2 = np.sum(p * p, axis=-1)
    return np.sqrt(r2 + species.mass**2)


def free_hamiltonian(space: FockSpace) -> sp.csr_matrix:
    """Diagonal matrix of summed mode energies."""
    omega = np.concatenate([dispersion(s, s.mode_momenta()) for s in space.species])
    return sp.diags(space.basis.astype(float) @ omega).tocsr()


@dataclass(frozen=True)
class CouplingTensor:
    entries: np.ndarray  # (d1, d2, d3, d4), irrep indices flattened M1-major

    @property
    def magnitude(self) -> float:
        return float(np.abs(self.entries).max())

    def nonzero(self, tol: float = 1e-14) -> list[tuple[tuple[int, ...], complex]]:
        idx = np.argwhere(np.abs(self.entries) > tol)
        return [(tuple(int(x) for x in i), complex(self.entries[tuple(i)])) for i in idx]


def coupling_tensor(irreps: list[IrrepLabel], alpha: int = 1) -> CouplingTensor:
    """Product of the scalar couplings of first labels and second labels, max entry 1.

    Both alphas use the same tensor; alpha is accepted for symmetry with the kernels.
    """
    if alpha not in (1, 2):
        raise ValueError("alpha is 1 or 2")
    t1 = couple_to_scalar([l.J1 for l in irreps])
    t2 = couple_to_scalar([l.J2 for l in irreps])
    g = np.einsum("abcd,efgh->aebfcgdh", t1, t2).reshape([l.dim for l in irreps])
    g = g / np.abs(g).max()
    return CouplingTensor(g.astype(complex))


def invariance_residual(t: CouplingTensor, irreps: list[IrrepLabel], a: np.ndarray) -> float:
    """max |sum_M' prod_i D_i(a^-1)_{M'M} g_M' - g_M|."""
    ainv = np.linalg.inv(a)
    D = [d_general(l, ainv) for l in irreps]
    g2 = np.einsum("ai,bj,ck,dl,abcd->ijkl", D[0], D[1], D[2], D[3], t.entries)
    return float(np.abs(g2 - t.entries).max())


# ------------------------------------------------------------------ kernels


def smoothstep_cut(x: np.ndarray) -> np.ndarray:
    """chi0: 1 on (-inf, 1], 0 on [2, inf), quintic smoothstep between."""
    t = np.clip(np.asarray(x, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - t**3 * (10 - 15 * t + 6 * t**2)


@dataclass(frozen=True)
class Kernels:
    """Mode-sampled kernels; index alpha = 0, 1."""

    F: tuple[np.ndarray, np.ndarray]  # (n1, n2)
    G: tuple[np.ndarray, np.ndarray]  # (n3,)
    Gt: tuple[np.ndarray, np.ndarray]  # (n4,)

    def scaled(self, s: float) -> "Kernels":
        return Kernels(self.F, self.G, tuple(s * x for x in self.Gt))


def massless_exponent(config: ModelConfig) -> float:
    a, b = config.irreps_twice[3]
    return (a + b) / 2


def sample_kernels(config: ModelConfig, species: list[SpeciesSpec]) -> Kernels:
    kp = config.kernels
    r = [np.linalg.norm(s.mode_momenta(), axis=1) for s in species]
    lam2 = 2 * kp.cutoff**2
    e4 = 0.5 - massless_exponent(config) + kp.eta
    F = tuple(kp.f_amp[a] * np.exp(-(r[0][:, None] ** 2 + r[1][None, :] ** 2) / lam2) + 0j for a in range(2))
    G = tuple(kp.g_amp[a] * np.exp(-r[2] ** 2 / lam2) + 0j for a in range(2))
    Gt = tuple(kp.gt_amp[a] * r[3] ** e4 * np.exp(-r[3]) + 0j for a in range(2))
    return Kernels(F, G, Gt)


def infrared_cutoff(kernels: Kernels, sigma: float, species4: SpeciesSpec) -> Kernels:
    """Multiply the massless kernels by 1 - chi0(|p4|/sigma)."""
    r4 = np.linalg.norm(species4.mode_momenta(), axis=1)
    if sigma <= 0:
        return kernels
    f = 1.0 - smoothstep_cut(r4 / sigma)
    return Kernels(kernels.F, kernels.G, tuple(f * g for g in kernels.Gt))


# ------------------------------------------------------------------ assembly


def model_coefficients(config: ModelConfig, species: list[SpeciesSpec]) -> list[np.ndarray]:
    """Per species (n_modes, irrep dim) leg coefficients as used in the interaction."""
    out = []
    for i, (fs, s) in enumerate(zip(config.field_specs(), species)):
        u, _ = coefficient_tables(fs, s.grid.nodes)  # (N, d, n_spin)
        c = np.transpose(u, (0, 2, 1)).reshape(-1, fs.dim)
        if i < 3:
            c = c * (2 * np.pi) ** -1.5
        if c.shape[0] != s.n_modes:
            raise SpecViolation(f"species {s.name}: {c.shape[0]} coefficient rows for {s.n_modes} modes")
        out.append(c)
    return out


def _leg(lads: list[sp.csr_matrix], w: np.ndarray, c: np.ndarray, kind: str) -> sp.csr_matrix:
    """sum_k sqrt(w_k) c_k L_k by one COO concatenation."""
    c = np.asarray(c, dtype=complex) * np.sqrt(w)
    rows, cols, vals = [], [], []
    for ck, a in zip(c, lads):
        if ck == 0:
            continue
        co = a.tocoo()
        rows.append(co.row)
        cols.append(co.col)
        vals.append(ck * co.data)
    n = lads[0].shape[0]
    if not rows:
        return sp.csr_matrix((n, n), dtype=complex)
    m = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return m if kind == "annihilate" else m.T.tocsr()


def _low_rank(F: np.ndarray, tol: float = 1e-13) -> list[tuple[float, np.ndarray, np.ndarray]]:
    U, S, Vh = np.linalg.svd(F)
    keep = S > tol * max(S[0], 1e-300) if len(S) else []
    return [(float(S[r]), U[:, r], Vh[r, :]) for r in np.nonzero(keep)[0]]


def interaction_pieces(space: FockSpace, coeffs: list[np.ndarray], kernels: Kernels,
                       tensors: tuple[CouplingTensor, CouplingTensor]) -> sp.csr_matrix:
    """X = H1 + H2 at unit coupling; the interaction is X + X*."""
    lads = [ladders(space, i) for i in range(4)]
    ws = [s.mode_weights() for s in space.species]
    n = space.dim
    X = sp.csr_matrix((n, n), dtype=complex)
    for alpha in range(2):
        t = tensors[alpha]
        for S, uf, vf in _low_rank(kernels.F[alpha]):
            cache: dict = {}

            def leg(i, M, kind, vec):
                key = (i, M, kind)
                if key not in cache:
                    cache[key] = _leg(lads[i], ws[i], vec, kind)
                return cache[key]

            for (M1, M2, M3, M4), gM in t.nonzero():
                b4 = leg(3, M4, "create", kernels.Gt[alpha] * coeffs[3][:, M4])
                b3 = leg(2, M3, "create", kernels.G[alpha] * coeffs[2][:, M3].conj())
                a2 = leg(1, M2, "create", vf * coeffs[1][:, M2].conj())
                if alpha == 0:
                    a1 = leg(0, M1, "annihilate", uf * coeffs[0][:, M1])
                else:
                    a1 = leg(0, M1, "create", uf * coeffs[0][:, M1].conj())
                X = X + (TWO_PI_3 * gM * S) * (b4 @ (b3 @ (a2 @ a1)))
    X.sum_duplicates()
    X.eliminate_zeros()
    return X.tocsr()


def hermitian_sum(X: sp.csr_matrix) -> sp.csr_matrix:
    H = (X + X.conj().T).tocsr()
    H.sum_duplicates()
    H.sort_indices()
    return H


@dataclass
class Model:
    config: ModelConfig
    species: list[SpeciesSpec]
    space: FockSpace
    coeffs: list[np.ndarray]
    kernels: Kernels
    tensors: tuple[CouplingTensor, CouplingTensor]
    H0: sp.csr_matrix
    HI: sp.csr_matrix  # unit coupling
    sigma: float = 0.0

    def hamiltonian(self, g: float) -> sp.csr_matrix:
        return (self.H0 + g * self.HI).tocsr()


def build_model(config: ModelConfig, sigma: float = 0.0, kernels: Kernels | None = None) -> Model:
    """Assemble H0 and H_I; with sigma > 0 the massless kernel is cut below sigma
    and massless nodes with |p| < sigma are dropped (the Fock space above the cutoff)."""
    grids = [g.build() for g in config.grids]
    if sigma > 0:
        g4 = grids[3]
        keep = g4.radii >= sigma
        if not keep.any():
            raise SpecViolation(f"no massless node above sigma = {sigma}")
        grids[3] = ModeGrid(g4.nodes[keep], g4.weights[keep])
    species = config.species(grids)
    space = build_space(species, config.caps())
    species = space.species
    coeffs = model_coefficients(config, species)
    if kernels is None:
        kernels = sample_kernels(config, species)
    if sigma > 0:
        kernels = infrared_cutoff(kernels, sigma, species[3])
    irreps = config.irreps()
    tensors = (coupling_tensor(irreps, 1), coupling_tensor(irreps, 2))
    H0 = free_hamiltonian(space)
    HI = hermitian_sum(interaction_pieces(space, coeffs, kernels, tensors))
    return Model(config, species, space, coeffs, kernels, tensors, H0, HI, sigma)


# ------------------------------------------------------------------ constants


def coefficient_bound(fs: FieldSpec, nodes: np.ndarray, n_sweep: int = 64, p_sweep: float = 50.0) -> float:
    """sup of |u_M(p, s)| / (1 + |p|)^{J1+J2-1/2} over grid nodes and a radial sweep."""
    from .fock import fibonacci_directions

    r = np.geomspace(1e-3, p_sweep, n_sweep)
    dirs = fibonacci_directions(12)
    P = np.concatenate([nodes.reshape(-1, 3), (r[:, None, None] * dirs[None]).reshape(-1, 3), np.zeros((1, 3))])
    u, _ = coefficient_tables(fs, P)
    e = fs.irrep.J1.value + fs.irrep.J2.value - 0.5
    rp = np.linalg.norm(P, axis=1)
    return float((np.abs(u) / (1 + rp)[:, None, None] ** e).max())


def _wnorm(w: np.ndarray, f: np.ndarray) -> float:
    return float(np.sqrt(np.sum(w * np.abs(f) ** 2)))


@dataclass(frozen=True)
class BoundConstants:
    C_i: tuple[float, float, float]
    C: float
    g: float
    b: float
    weighted_norms: tuple[float, float]
    K: float
    K_tilde: float
    g1: float
    K1: float
    K2: float
    verified: bool
    min_margin: float
    max_ratio: float  # largest ||H_I psi|| / (g K (||H0 psi|| + b))
    n_states: int

    def to_dict(self) -> dict:
        return asdict(self)


def kernel_norms(model: Model) -> dict:
    """Weighted L2 norms entering the constants and the infrared hypotheses."""
    sp_ = model.species
    cfg = model.config
    w = [s.mode_weights() for s in sp_]
    r = [np.linalg.norm(s.mode_momenta(), axis=1) for s in sp_]
    ex = [l.J1.value + l.J2.value - 0.5 for l in cfg.irreps()]
    out = {"FG": [], "Gt": [], "Gt_hyp_i": []}
    for a in range(2):
        pf = (1 + r[0])[:, None] ** ex[0] * (1 + r[1])[None, :] ** ex[1]
        nf = float(np.sqrt(np.sum(w[0][:, None] * w[1][None, :] * np.abs(pf * model.kernels.F[a]) ** 2)))
        ng = _wnorm(w[2], (1 + r[2]) ** ex[2] * model.kernels.G[a])
        out["FG"].append(nf * ng)
        out["Gt"].append(_wnorm(w[3], r[3] ** ex[3] * model.kernels.Gt[a]))
        out["Gt_hyp_i"].append(_wnorm(w[3], r[3] ** (ex[3] - 1) * model.kernels.Gt[a]))
    return out


def hypothesis_sigma_sweep(model: Model, sigmas=None) -> dict:
    """sup over sigma of (sum_{|p|<=sigma} w |p|^{2(J1+J2)-1} |G~|^2)^{1/2} / sigma."""
    s4 = model.species[3]
    w = s4.mode_weights()
    r = np.linalg.norm(s4.mode_momenta(), axis=1)
    l4 = model.config.irreps()[3]
    e = 2 * (l4.J1.value + l4.J2.value) - 1
    if sigmas is None:
        sigmas = np.unique(np.concatenate([r, np.geomspace(max(r.min(), 1e-3), 2 * r.max(), 40)]))
    vals = []
    for s in sigmas:
        m = r <= s
        vals.append(max(np.sqrt(np.sum(w[m] * r[m] ** e * np.abs(g[m]) ** 2)) / s for g in model.kernels.Gt))
    vals = np.array(vals)
    return {"K_Gt": float(vals.max()), "sigmas": list(map(float, sigmas)), "ratios": vals.tolist()}


def relative_bound_constants(model: Model, n_states: int = 100, seed: int = 0) -> BoundConstants:
    """Constants of the relative bound and a check of it on random truncated states."""
    cfg = model.config
    m1, m2, m3 = cfg.masses
    fs = cfg.field_specs()
    C_i = tuple(coefficient_bound(fs[i], model.species[i].grid.nodes) * (2 * np.pi) ** -1.5 for i in range(3))
    ls = cfg.irreps()
    pref = 1.0
    for l in ls[:3]:
        pref *= (1 + l.J1.twice) ** 2 * (1 + l.J2.twice) ** 2
    l4 = ls[3]
    pref *= 2 ** (l4.J1.value + l4.J2.value - 0.5) * (1 + l4.J1.twice) * (1 + l4.J2.twice)
    C = TWO_PI_3 * C_i[0] * C_i[1] * C_i[2] * pref
    g = max(t.magnitude for t in model.tensors)
    b = m1 * m2 / (2 * (m1 + m2))
    kn = kernel_norms(model)
    wn = tuple(float(x * y) for x, y in zip(kn["FG"], kn["Gt"]))
    K = 2 * C * (1 / m1 + 1 / m2) * sum(wn)
    Kt = 2 * C * (1 / m1 + 1 / m2) * sum(kn["FG"])
    g1 = cfg.g_fraction / K if K > 0 else np.inf
    K1 = 1 / (1 - g1 * K) if K > 0 else 1.0
    K2 = b * K1**2
    rng = np.random.default_rng(seed)
    n = model.space.dim
    margins, ratios = [], []
    for _ in range(n_states):
        psi = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi /= np.linalg.norm(psi)
        lhs = g * np.linalg.norm(model.HI @ psi)
        rhs = g * K * (np.linalg.norm(model.H0 @ psi) + b)
        margins.append(rhs - lhs)
        ratios.append(lhs / rhs if rhs > 0 else 0.0)
    mm = float(min(margins)) if margins else 0.0
    mr = float(max(ratios)) if ratios else 0.0
    return BoundConstants(C_i, float(C), g, b, wn, float(K), float(Kt), float(g1), float(K1), float(K2),
                          bool(mm >= 0), mm, mr, n_states)
