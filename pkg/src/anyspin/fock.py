"""Truncated multi-species Fock space on a discretized momentum grid.

Modes of a species are (grid node, spin label) pairs, node-major.  Bosonic
species come first, then fermionic species, each in declaration order; the
Jordan-Wigner string runs over all fermionic modes in that global order.

Continuum deltas become Kronecker deltas, [a_k, a*_k'] = delta_kk'.  Cell
weights enter only through smearing: a*(phi) = sum_k sqrt(w_k) phi_k a*_k.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .angular import HalfInt
from .errors import DimensionOverflow, UnknownMode

DEFAULT_MAX_DIM = 60000


def fibonacci_directions(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    rho = np.sqrt(1 - z**2)
    phi = np.pi * (1 + 5**0.5) * i
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


@dataclass(frozen=True)
class ModeGrid:
    nodes: np.ndarray  # (K, 3)
    weights: np.ndarray  # (K,)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 3)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(nodes) != len(w) or len(w) == 0:
            raise ValueError("grid needs matching nonempty nodes and weights")
        if np.any(w <= 0) or not np.all(np.isfinite(nodes)):
            raise ValueError("grid weights must be positive and nodes finite")
        if len(np.unique(np.round(nodes, 12), axis=0)) != len(nodes):
            raise ValueError("duplicate grid nodes")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.nodes, axis=1)

    @classmethod
    def spherical(cls, edges, per_panel: int, n_dirs: int) -> "ModeGrid":
        """Gauss-Legendre panels in |p| between consecutive edges times Fibonacci directions.

        Weights are r^2 w_r * 4pi/n_dirs, so sum_k w_k f(p_k) approximates int d^3p f.
        """
        edges = np.asarray(edges, dtype=float)
        if np.any(np.diff(edges) <= 0) or edges[0] < 0:
            raise ValueError("panel edges must be increasing and non-negative")
        x, wx = np.polynomial.legendre.leggauss(per_panel)
        r, wr = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            r.append(0.5 * (b - a) * x + 0.5 * (a + b))
            wr.append(0.5 * (b - a) * wx)
        r, wr = np.concatenate(r), np.concatenate(wr)
        dirs = fibonacci_directions(n_dirs)
        nodes = (r[:, None, None] * dirs[None]).reshape(-1, 3)
        w = (wr[:, None] * r[:, None] ** 2 * np.full(n_dirs, 4 * np.pi / n_dirs)[None]).reshape(-1)
        return cls(nodes, w)

    def to_dict(self) -> dict:
        return {"nodes": self.nodes.tolist(), "weights": self.weights.tolist()}


@dataclass(frozen=True)
class SpeciesSpec:
    name: str
    statistics: str  # "boson" | "fermion"
    mass: float
    j: HalfInt  # spin (massive) or the carried helicity label (massless)
    grid: ModeGrid
    cap: int | None = None  # optional bound on the particle number of this species

    def __post_init__(self):
        object.__setattr__(self, "j", HalfInt.of(self.j))
        if self.statistics not in ("boson", "fermion"):
            raise ValueError(f"unknown statistics {self.statistics!r}")
        if self.mass < 0:
            raise ValueError("negative mass")

    @property
    def massless(self) -> bool:
        return self.mass == 0

    def labels(self) -> list[HalfInt]:
        return [self.j] if self.massless else self.j.projections()

    @property
    def n_modes(self) -> int:
        return len(self.grid) * len(self.labels())

    def mode(self, node: int, label) -> int:
        labels = self.labels()
        label = HalfInt.of(label)
        if not 0 <= node < len(self.grid) or label not in labels:
            raise UnknownMode(f"{self.name}: no mode ({node}, {label})")
        return node * len(labels) + labels.index(label)

    def mode_weights(self) -> np.ndarray:
        return np.repeat(self.grid.weights, len(self.labels()))

    def mode_momenta(self) -> np.ndarray:
        return np.repeat(self.grid.nodes, len(self.labels()), axis=0)


@dataclass(frozen=True)
class Caps:
    boson: int = 2  # per-mode occupation of bosonic modes
    total: int | None = None  # total particle number
    max_dim: int = DEFAULT_MAX_DIM


@dataclass
class FockSpace:
    species: list[SpeciesSpec]
    caps: Caps
    basis: np.ndarray  # (dim, n_modes) occupation numbers
    offsets: np.ndarray  # first global mode of each species
    mode_cap: np.ndarray
    fermionic: np.ndarray  # bool per mode
    _keys: np.ndarray = field(repr=False, default=None)
    _order: np.ndarray = field(repr=False, default=None)
    _radix: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def n_modes(self) -> int:
        return self.basis.shape[1]

    def species_index(self, name: str) -> int:
        for i, s in enumerate(self.species):
            if s.name == name:
                return i
        raise UnknownMode(f"no species {name!r}")

    def global_mode(self, species: str | int, mode: int) -> int:
        i = species if isinstance(species, int) else self.species_index(species)
        if not 0 <= mode < self.species[i].n_modes:
            raise UnknownMode(f"species {self.species[i].name}: mode {mode} out of range")
        return int(self.offsets[i] + mode)

    def species_slice(self, species: str | int) -> slice:
        i = species if isinstance(species, int) else self.species_index(species)
        return slice(int(self.offsets[i]), int(self.offsets[i] + self.species[i].n_modes))

    def counts(self, species: str | int) -> np.ndarray:
        """Particle number of one species in every basis state."""
        return self.basis[:, self.species_slice(species)].sum(axis=1)

    def encode(self, occ: np.ndarray) -> np.ndarray:
        return np.asarray(occ, dtype=np.int64) @ self._radix

    def lookup(self, occ: np.ndarray) -> np.ndarray:
        """Basis indices of occupation rows; -1 where the state is truncated away."""
        k = self.encode(occ)
        pos = np.searchsorted(self._keys, k)
        pos = np.clip(pos, 0, len(self._keys) - 1)
        hit = self._keys[pos] == k
        return np.where(hit, self._order[pos], -1)

    def vacuum_index(self) -> int:
        return 0

    def saturated(self) -> np.ndarray:
        """States where some species cap or the total cap is reached."""
        mask = np.zeros(self.dim, dtype=bool)
        for i, s in enumerate(self.species):
            if s.cap is not None:
                mask |= self.counts(i) >= s.cap
        if self.caps.total is not None:
            mask |= self.basis.sum(axis=1) >= self.caps.total
        return mask


def _species_states(s: SpeciesSpec, boson_cap: int) -> list[tuple[int, ...]]:
    cap_mode = 1 if s.statistics == "fermion" else boson_cap
    n = s.n_modes
    limit = s.cap if s.cap is not None else n * cap_mode
    out = []

    def rec(prefix, left, i):
        if i == n:
            out.append(tuple(prefix))
            return
        for k in range(min(cap_mode, left) + 1):
            prefix.append(k)
            rec(prefix, left - k, i + 1)
            prefix.pop()

    rec([], limit, 0)
    return out


def build_space(species: list[SpeciesSpec], caps: Caps | None = None) -> FockSpace:
    """Enumerate the occupation basis, ordered by particle number then lexicographically."""
    caps = caps or Caps()
    if not species:
        raise ValueError("at least one species is required")
    if caps.boson < 0 or (caps.total is not None and caps.total < 0):
        raise ValueError("caps must be non-negative")
    ordered = [s for s in species if s.statistics == "boson"] + [s for s in species if s.statistics == "fermion"]
    per = []
    bound = 1
    for s in ordered:
        st = np.array(_species_states(s, caps.boson), dtype=np.int16).reshape(-1, s.n_modes)
        if caps.total is not None:
            st = st[st.sum(axis=1) <= caps.total]
        per.append(st)
        bound *= len(st)
    # combine species with pruning on the total cap
    combo = np.zeros((1, 0), dtype=np.int16)
    for st in per:
        n_a = combo.sum(axis=1)
        n_b = st.sum(axis=1)
        ia, ib = np.meshgrid(np.arange(len(combo)), np.arange(len(st)), indexing="ij")
        ia, ib = ia.ravel(), ib.ravel()
        if caps.total is not None:
            keep = n_a[ia] + n_b[ib] <= caps.total
            ia, ib = ia[keep], ib[keep]
        if len(ia) > caps.max_dim:
            raise DimensionOverflow(f"basis size exceeds {caps.max_dim} (upper bound {bound})")
        combo = np.concatenate([combo[ia], st[ib]], axis=1)
    total = combo.sum(axis=1)
    order = np.lexsort(tuple(combo[:, ::-1].T) + (total,))
    basis = combo[order].astype(np.int16)
    n_modes = basis.shape[1]
    mode_cap = np.concatenate([np.full(s.n_modes, 1 if s.statistics == "fermion" else caps.boson) for s in ordered])
    fermionic = np.concatenate([np.full(s.n_modes, s.statistics == "fermion") for s in ordered])
    offsets = np.cumsum([0] + [s.n_modes for s in ordered])[:-1]
    radix = np.ones(n_modes, dtype=np.int64)
    for k in range(n_modes - 2, -1, -1):
        radix[k] = radix[k + 1] * (int(mode_cap[k + 1]) + 1)
    if n_modes and float(np.prod(mode_cap.astype(float) + 1)) > 2**62:
        raise DimensionOverflow("occupation keys do not fit in 64 bits")
    keys = basis.astype(np.int64) @ radix
    ko = np.argsort(keys)
    return FockSpace(ordered, caps, basis, offsets, mode_cap, fermionic, keys[ko], ko, radix)


# ------------------------------------------------------------------ ladders


def _annihilator(space: FockSpace, k: int) -> sp.csr_matrix:
    occ = space.basis
    rows_src = np.nonzero(occ[:, k] > 0)[0]
    tgt = occ[rows_src].copy()
    tgt[:, k] -= 1
    dst = space.lookup(tgt)
    if np.any(dst < 0):
        raise RuntimeError("basis is not closed under annihilation")
    n = occ[rows_src, k].astype(float)
    if space.fermionic[k]:
        before = space.fermionic.copy()
        before[k:] = False
        parity = occ[rows_src][:, before].sum(axis=1) % 2
        val = np.where(parity == 0, 1.0, -1.0)
    else:
        val = np.sqrt(n)
    return sp.csr_matrix((val, (dst, rows_src)), shape=(space.dim, space.dim))


def ladder(space: FockSpace, species: str | int, mode: int, kind: str) -> sp.csr_matrix:
    """Annihilation or creation operator of one mode; creation is the exact transpose."""
    k = space.global_mode(species, mode)
    a = _annihilator(space, k)
    if kind == "annihilate":
        return a
    if kind == "create":
        return a.T.tocsr()
    raise ValueError(f"unknown ladder kind {kind!r}")


def ladders(space: FockSpace, species: str | int) -> list[sp.csr_matrix]:
    """All annihilators of one species, mode order."""
    i = species if isinstance(species, int) else space.species_index(species)
    return [_annihilator(space, space.global_mode(i, m)) for m in range(space.species[i].n_modes)]


def leg_operator(space: FockSpace, species: str | int, c: np.ndarray, kind: str) -> sp.csr_matrix:
    """sum_k sqrt(w_k) c_k L_k with L the annihilator or the creator; no conjugation."""
    i = species if isinstance(species, int) else space.species_index(species)
    s = space.species[i]
    c = np.asarray(c, dtype=complex).reshape(s.n_modes) * np.sqrt(s.mode_weights())
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for m, a in enumerate(ladders(space, i)):
        if c[m] != 0:
            out = out + c[m] * (a if kind == "annihilate" else a.T)
    return out.tocsr()


def smeared_ladder(space: FockSpace, species: str | int, phi: np.ndarray, kind: str = "annihilate") -> sp.csr_matrix:
    """a(phi) = sum_k sqrt(w_k) conj(phi_k) a_k and a*(phi) = sum_k sqrt(w_k) phi_k a*_k."""
    phi = np.asarray(phi, dtype=complex)
    if kind == "annihilate":
        return leg_operator(space, species, phi.conj(), "annihilate")
    if kind == "create":
        return leg_operator(space, species, phi, "create")
    raise ValueError(f"unknown ladder kind {kind!r}")


def weighted_norm(space: FockSpace, species: str | int, phi: np.ndarray) -> float:
    i = species if isinstance(species, int) else space.species_index(species)
    w = space.species[i].mode_weights()
    return float(np.sqrt(np.sum(w * np.abs(phi) ** 2)))


def number_operator(space: FockSpace, species: str | int | None = None) -> sp.csr_matrix:
    occ = space.basis if species is None else space.basis[:, space.species_slice(species)]
    return sp.diags(occ.sum(axis=1).astype(float)).tocsr()


# ------------------------------------------------------------------ algebra check


@dataclass
class AlgebraReport:
    fermion_deviation: float
    boson_deviation: float
    mixed_deviation: float
    float_deviation: float  # same relations with the floating-point ladder matrices
    n_relations: int
    caveat_states: int  # columns excluded because a cap blocks a creation

    @property
    def exact(self) -> bool:
        return self.fermion_deviation == 0 and self.boson_deviation == 0 and self.mixed_deviation == 0


def _signed_squares(space: FockSpace, k: int) -> sp.csr_matrix:
    """Annihilator of mode k with every entry replaced by sign * entry^2 (integers)."""
    a = _annihilator(space, k).tocoo()
    sq = np.rint(np.sign(a.data) * a.data**2).astype(np.int64)
    return sp.csr_matrix((sq, (a.row, a.col)), shape=a.shape)


def _root(z: sp.spmatrix) -> sp.csr_matrix:
    z = z.tocoo()
    return sp.csr_matrix((np.sign(z.data) * np.sqrt(np.abs(z.data).astype(float)), (z.row, z.col)), shape=z.shape)


def _maxabs(m: sp.spmatrix) -> float:
    m = m.tocoo()
    return float(np.abs(m.data).max()) if m.nnz else 0.0


def check_algebra(space: FockSpace) -> AlgebraReport:
    """All CCR/CAR relations between every pair of modes.

    Ladder matrices are partial permutations with entries +-sqrt(n), so every
    product of two of them has one term per entry.  The products are formed on
    signed squared entries in integer arithmetic and square-rooted afterwards,
    which makes the check exact.  The deviation is measured on basis states
    (columns) where no cap blocks a creation appearing in the relation; the
    excluded columns are counted.
    """
    n = space.n_modes
    Q = [_signed_squares(space, k) for k in range(n)]
    A = [_annihilator(space, k) for k in range(n)]
    eye = sp.identity(space.dim, format="csr")
    zero = sp.csr_matrix((space.dim, space.dim))
    sat = space.saturated()
    dev = {"f": 0.0, "b": 0.0, "m": 0.0, "float": 0.0}
    excluded = np.zeros(space.dim, dtype=bool)
    count = 0
    for k in range(n):
        for q in range(n):
            fk, fq = space.fermionic[k], space.fermionic[q]
            ok = ~sat
            if not fk:
                ok = ok & (space.basis[:, k] < space.mode_cap[k])
            if not fq:
                ok = ok & (space.basis[:, q] < space.mode_cap[q])
            excluded |= ~ok
            P = sp.diags(ok.astype(float)).tocsr()
            s = 1 if (fk and fq) else -1
            delta = eye if (k == q and fk == fq) else zero
            r1 = _root(Q[k] @ Q[q].T) + s * _root(Q[q].T @ Q[k]) - delta
            r2 = _root(Q[k] @ Q[q]) + s * _root(Q[q] @ Q[k])
            f1 = A[k] @ A[q].T + s * (A[q].T @ A[k]) - delta
            f2 = A[k] @ A[q] + s * (A[q] @ A[k])
            key = "f" if (fk and fq) else ("b" if not (fk or fq) else "m")
            dev[key] = max(dev[key], _maxabs(r1 @ P), _maxabs(r2))
            dev["float"] = max(dev["float"], _maxabs(f1 @ P), _maxabs(f2))
            count += 2
    return AlgebraReport(dev["f"], dev["b"], dev["m"], dev["float"], count, int(excluded.sum()))


# ------------------------------------------------------------------ export


def export_triplets(op: sp.spmatrix, path) -> None:
    """Write nonzero entries as lines 'row col re im' after a 'dim nnz' header."""
    m = op.tocoo()
    with open(path, "w") as fh:
        fh.write(f"# dim {m.shape[0]} nnz {m.nnz}\n")
        for r, c, v in zip(m.row, m.col, m.data):
            z = complex(v)
            fh.write(f"{r} {c} {z.real:.17g} {z.imag:.17g}\n")


def read_triplets(path) -> sp.csr_matrix:
    with open(path) as fh:
        head = fh.readline().split()
        dim = int(head[2])
        data = np.loadtxt(fh, ndmin=2)
    if data.size == 0:
        return sp.csr_matrix((dim, dim), dtype=complex)
    return sp.csr_matrix((data[:, 2] + 1j * data[:, 3], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(dim, dim))


def export_basis(space: FockSpace, path) -> None:
    """One line per basis state: index followed by its occupation numbers."""
    with open(path, "w") as fh:
        names = " ".join(f"{s.name}:{s.n_modes}" for s in space.species)
        fh.write(f"# species {names}\n")
        for i, row in enumerate(space.basis):
            fh.write(f"{i} " + " ".join(str(int(x)) for x in row) + "\n")
