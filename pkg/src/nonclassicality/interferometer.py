"""Passive linear-optics simulation for multimode photon-number statistics.

A unitary is decomposed into a triangular (Reck-style) mesh of beam splitters
and phase shifters, and Fock states are pushed through the mesh element by
element. Passive optics conserves the total photon number, so states are stored
per total-number sector and every element acts on one sector at a time.

Convention: a photon entering mode ``i`` leaves in mode ``k`` with amplitude
``U[k, i]``; coherent amplitudes transform as ``alpha_out = U @ alpha_in``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from pathlib import Path

import numpy as np

from .specfun import log_factorial

UNITARITY_TOL = 1e-10
DEFAULT_N_MAX = 12
DEFAULT_BASIS_CAP = 2_000_000

# the 6x6 interferometer from the 6-mode dataset, printed with two decimals
PAPER_UNITARY = np.array(
    [
        [-0.14, -0.59, 0.25, -0.64, 0.23, -0.32],
        [0.28, 0.10, -0.80, -0.33, 0.40, -0.00],
        [0.46, 0.31, 0.15, -0.58, -0.57, 0.09],
        [-0.59, 0.40, 0.12, -0.38, 0.24, 0.53],
        [-0.17, 0.60, 0.10, -0.04, 0.14, -0.76],
        [-0.56, -0.15, -0.50, -0.07, -0.62, -0.17],
    ]
)


class UnitarityError(ValueError):
    pass


class BasisOverflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class UnitarySpec:
    entries: np.ndarray
    adjustment: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.entries, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
            raise ValueError(f"unitary must be square and non-empty, got shape {u.shape}")
        object.__setattr__(self, "entries", u)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def deviation(self) -> float:
        u = self.entries
        return float(np.max(np.abs(u.conj().T @ u - np.eye(self.dim))))

    @classmethod
    def orthonormalized(cls, matrix: np.ndarray) -> "UnitarySpec":
        """Nearest-in-spirit unitary via QR (Gram-Schmidt on the columns).

        Column phases are fixed so that R has a positive diagonal, which keeps
        the result close to ``matrix`` when it is already almost unitary. The
        max-norm size of the change is kept in ``adjustment``.
        """
        m = np.asarray(matrix, dtype=complex)
        q, r = np.linalg.qr(m)
        d = np.diagonal(r)
        phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
        q = q * phases[None, :]
        if np.allclose(m.imag, 0.0):
            q = q.real.astype(complex)
        return cls(q, float(np.max(np.abs(q - m))))

    @classmethod
    def from_json(cls, path: str | Path, orthonormalize: bool = True) -> "UnitarySpec":
        data = json.loads(Path(path).read_text())
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != (data["dim"], data["dim"]) or im.shape != re.shape:
            raise ValueError(f"unitary file {path}: entries do not match dim={data['dim']}")
        m = re + 1j * im
        return cls.orthonormalized(m) if orthonormalize else cls(m)

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()})


def paper_unitary() -> UnitarySpec:
    return UnitarySpec.orthonormalized(PAPER_UNITARY)


@dataclass(frozen=True)
class BeamSplitter:
    mode_a: int
    mode_b: int
    theta: float
    phi: float

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        e = np.exp(1j * self.phi)
        return np.array([[e * c, -s], [e * s, c]], dtype=complex)


@dataclass(frozen=True)
class PhaseShifter:
    mode: int
    phase: float


@dataclass
class MeshPlan:
    dim: int
    elements: list = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        """Multiply out the mesh; elements act on the input in list order."""
        u = np.eye(self.dim, dtype=complex)
        for el in self.elements:
            u = embed(el, self.dim) @ u
        return u


def embed(element, dim: int) -> np.ndarray:
    e = np.eye(dim, dtype=complex)
    if isinstance(element, BeamSplitter):
        a, b = element.mode_a, element.mode_b
        t = element.matrix()
        e[np.ix_([a, b], [a, b])] = t
    else:
        e[element.mode, element.mode] = np.exp(1j * element.phase)
    return e


def decompose(spec: UnitarySpec) -> MeshPlan:
    """Triangular beam-splitter mesh reproducing ``spec.entries``.

    Rows are cleared from the bottom up: entry ``(r, j)`` is nulled by a beam
    splitter on columns ``(j, j+1)`` applied from the right. What remains is a
    diagonal of phases, emitted as phase shifters after the beam splitters.
    """
    dev = spec.deviation()
    if dev > UNITARITY_TOL:
        raise UnitarityError(f"matrix is not unitary: max |U^dag U - I| = {dev:.3e}")
    n = spec.dim
    u = spec.entries.copy()
    elements: list = []
    for r in range(n - 1, 0, -1):
        for j in range(r):
            a, b = u[r, j], u[r, j + 1]
            theta = math.atan2(abs(a), abs(b))
            phi = float(np.angle(a) - np.angle(b)) if abs(a) > 0 and abs(b) > 0 else 0.0
            bs = BeamSplitter(j, j + 1, theta, phi)
            t = bs.matrix()
            cols = u[:, [j, j + 1]] @ t.conj().T
            u[:, j], u[:, j + 1] = cols[:, 0], cols[:, 1]
            u[r, j] = 0.0
            elements.append(bs)
    # bs list was built as U T1^-1 T2^-1 ... = D, so U = D ... T2 T1
    phases = [PhaseShifter(k, float(np.angle(u[k, k]))) for k in range(n)]
    return MeshPlan(n, elements + phases)


# ---------------------------------------------------------------------------
# Fock-space machinery


@lru_cache(maxsize=None)
def sector_basis(n: int, d: int) -> np.ndarray:
    """All occupation tuples of ``d`` modes with total photon number ``n``,
    in lexicographic order (shape ``(C(n+d-1, d-1), d)``)."""
    if d == 1:
        return np.array([[n]], dtype=np.int64)
    rows = []
    # stars and bars: choose d-1 bar positions among n+d-1 slots
    for bars in combinations(range(n + d - 1), d - 1):
        prev = -1
        occ = []
        for b in bars:
            occ.append(b - prev - 1)
            prev = b
        occ.append(n + d - 2 - prev)
        rows.append(occ)
    out = np.array(rows, dtype=np.int64)
    order = np.lexsort(out.T[::-1])
    return out[order]


def sector_dim(n: int, d: int) -> int:
    return math.comb(n + d - 1, d - 1)


def _keys(occ: np.ndarray, n: int) -> np.ndarray:
    weights = (n + 1) ** np.arange(occ.shape[-1], dtype=np.int64)
    return occ @ weights


@lru_cache(maxsize=None)
def _sorted_keys(n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    keys = _keys(sector_basis(n, d), n)
    order = np.argsort(keys)
    return keys[order], order


def index_of(occ: np.ndarray, n: int, d: int) -> np.ndarray:
    """Positions of occupation rows ``occ`` inside ``sector_basis(n, d)``."""
    keys, order = _sorted_keys(n, d)
    pos = np.searchsorted(keys, _keys(np.asarray(occ, dtype=np.int64), n))
    return order[pos]


@lru_cache(maxsize=256)
def _pair_groups(n: int, d: int, a: int, b: int) -> tuple[tuple[int, np.ndarray], ...]:
    """For modes (a, b): per pair-occupation s, an index array of shape
    (groups, s+1) whose column k addresses the state with n_a = k, n_b = s-k."""
    basis = sector_basis(n, d)
    others = [m for m in range(d) if m not in (a, b)]
    out = []
    for s in range(n + 1):
        if others:
            rest = sector_basis(n - s, len(others))
        else:
            if s != n:
                continue
            rest = np.zeros((1, 0), dtype=np.int64)
        g = rest.shape[0]
        occ = np.zeros((g, s + 1, d), dtype=np.int64)
        if others:
            occ[:, :, others] = rest[:, None, :]
        occ[:, :, a] = np.arange(s + 1)[None, :]
        occ[:, :, b] = s - np.arange(s + 1)[None, :]
        idx = index_of(occ.reshape(-1, d), n, d).reshape(g, s + 1)
        out.append((s, idx))
    assert sum(idx.size for _, idx in out) == basis.shape[0]
    return tuple(out)


def _poly_pow(c0: complex, c1: complex, p: int) -> np.ndarray:
    """Coefficients of (c0*x + c1*y)**p in x-degree order, by repeated
    multiplication (the recursion on photon number)."""
    coeffs = np.array([1.0 + 0j])
    step = np.array([c1, c0])  # y-term, x-term
    for _ in range(p):
        coeffs = np.convolve(coeffs, step)
    return coeffs


@lru_cache(maxsize=4096)
def two_mode_sector_matrix(theta: float, phi: float, s: int) -> np.ndarray:
    """Matrix of a beam splitter on the two-mode sector with ``s`` photons.

    Column ``p`` is the input |p, s-p>, row ``k`` the output |k, s-k>.
    """
    t = BeamSplitter(0, 1, theta, phi).matrix()
    out = np.zeros((s + 1, s + 1), dtype=complex)
    logf = log_factorial(np.arange(s + 1))
    for p in range(s + 1):
        q = s - p
        # a^dag -> t00 a^dag + t10 b^dag ; b^dag -> t01 a^dag + t11 b^dag
        poly = np.convolve(_poly_pow(t[0, 0], t[1, 0], p), _poly_pow(t[0, 1], t[1, 1], q))
        k = np.arange(s + 1)
        norm = np.exp(0.5 * (logf[k] + logf[s - k] - logf[p] - logf[q]))
        out[:, p] = poly * norm
    return out


@dataclass
class PureComponent:
    """A pure multimode state stored per total-photon-number sector."""

    sectors: dict[int, np.ndarray]
    truncation_loss: float = 0.0

    def norm2(self) -> float:
        return float(sum(np.vdot(v, v).real for v in self.sectors.values()))


@dataclass
class MultimodeState:
    d: int
    components: list[tuple[float, PureComponent]]

    def __post_init__(self):
        w = np.array([c[0] for c in self.components], dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"component weights must be nonnegative and sum to 1, got sum {w.sum()!r}")

    @property
    def n_max(self) -> int:
        return max((max(c.sectors) for _, c in self.components if c.sectors), default=0)

    @classmethod
    def fock(cls, occupation) -> "MultimodeState":
        occ = np.asarray(occupation, dtype=np.int64)
        n, d = int(occ.sum()), occ.size
        vec = np.zeros(sector_dim(n, d), dtype=complex)
        vec[index_of(occ[None, :], n, d)[0]] = 1.0
        return cls(d, [(1.0, PureComponent({n: vec}))])

    @classmethod
    def mixture(cls, weighted_occupations, renormalize: bool = True) -> "MultimodeState":
        """Incoherent mixture of Fock product states ``[(weight, occ), ...]``."""
        weights = np.array([w for w, _ in weighted_occupations], dtype=float)
        if renormalize:
            weights = weights / weights.sum()
        comps = []
        d = None
        for w, (_, occ) in zip(weights, weighted_occupations):
            st = cls.fock(occ)
            d = st.d
            comps.append((float(w), st.components[0][1]))
        return cls(d, comps)

    @classmethod
    def product(cls, single_mode_amplitudes, n_max: int = DEFAULT_N_MAX) -> "MultimodeState":
        """Pure product state from per-mode amplitude vectors over |0>, |1>, ...

        Sectors above ``n_max`` are dropped; the dropped norm is recorded as
        ``truncation_loss`` on the component.
        """
        amps = [np.asarray(a, dtype=complex) for a in single_mode_amplitudes]
        d = len(amps)
        sectors = {}
        kept = 0.0
        for n in range(n_max + 1):
            basis = sector_basis(n, d)
            valid = np.all(basis < np.array([a.size for a in amps])[None, :], axis=1)
            vec = np.zeros(basis.shape[0], dtype=complex)
            if valid.any():
                v = np.ones(int(valid.sum()), dtype=complex)
                for m, a in enumerate(amps):
                    v = v * a[basis[valid, m]]
                vec[valid] = v
            if np.any(vec != 0):
                sectors[n] = vec
                kept += float(np.vdot(vec, vec).real)
        total = float(np.prod([np.vdot(a, a).real for a in amps]))
        return cls(d, [(1.0, PureComponent(sectors, max(0.0, total - kept)))])


def apply_element(comp: PureComponent, element, d: int) -> PureComponent:
    new = {}
    for n, vec in comp.sectors.items():
        if isinstance(element, PhaseShifter):
            occ = sector_basis(n, d)[:, element.mode]
            new[n] = vec * np.exp(1j * element.phase * occ)
            continue
        out = vec.copy()
        for s, idx in _pair_groups(n, d, element.mode_a, element.mode_b):
            if s == 0:
                continue
            mat = two_mode_sector_matrix(element.theta, element.phi, s)
            out[idx] = vec[idx] @ mat.T
        new[n] = out
    return PureComponent(new, comp.truncation_loss)


def evolve(state: MultimodeState, plan: MeshPlan, basis_cap: int = DEFAULT_BASIS_CAP) -> MultimodeState:
    """Push every pure component of ``state`` through the mesh."""
    if plan.dim != state.d:
        raise ValueError(f"state has {state.d} modes but the mesh has {plan.dim}")
    for _, comp in state.components:
        for n in comp.sectors:
            if sector_dim(n, state.d) > basis_cap:
                raise BasisOverflowError(
                    f"sector with {n} photons in {state.d} modes has {sector_dim(n, state.d)} states (> cap {basis_cap})"
                )
    out = []
    for w, comp in state.components:
        for el in plan.elements:
            comp = apply_element(comp, el, state.d)
        out.append((w, comp))
    return MultimodeState(state.d, out)


@dataclass(frozen=True)
class JointDistribution:
    """Sparse joint table: row ``i`` of ``outcomes`` has probability ``probs[i]``."""

    outcomes: np.ndarray
    probs: np.ndarray
    truncation_loss: float = 0.0

    @property
    def d(self) -> int:
        return self.outcomes.shape[1]

    def marginal(self, mode: int) -> np.ndarray:
        col = self.outcomes[:, mode]
        return np.bincount(col, weights=self.probs, minlength=int(col.max()) + 1)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in o): float(p) for o, p in zip(self.outcomes, self.probs)}


def merge_rows(outcomes: np.ndarray, probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, inv = np.unique(outcomes, axis=0, return_inverse=True)
    merged = np.bincount(inv.reshape(-1), weights=probs, minlength=uniq.shape[0])
    return uniq, merged


def output_distribution(state: MultimodeState, drop_below: float = 0.0) -> JointDistribution:
    """Photon-number statistics: sum of component weights times |amplitude|^2."""
    outs, probs = [], []
    loss = 0.0
    for w, comp in state.components:
        loss += w * comp.truncation_loss
        for n, vec in comp.sectors.items():
            p = w * np.abs(vec) ** 2
            keep = p > drop_below
            outs.append(sector_basis(n, state.d)[keep])
            probs.append(p[keep])
    o, p = merge_rows(np.concatenate(outs), np.concatenate(probs))
    return JointDistribution(o, p, loss)


def coherent_shortcut(alphas, unitary: UnitarySpec, cutoff: int) -> list[np.ndarray]:
    """Per-mode Poisson distributions (0..cutoff) of the output of coherent
    inputs; the joint distribution is their product."""
    from .fockstats import StateSpec, photon_distribution

    out_amp = unitary.entries @ np.asarray(alphas, dtype=complex)
    return [photon_distribution(StateSpec.coherent(abs(a)), cutoff).probs for a in out_amp]


def product_joint(marginals: list[np.ndarray], drop_below: float = 0.0) -> JointDistribution:
    """Dense outer product of independent per-mode distributions, as a sparse table."""
    grids = np.meshgrid(*[np.arange(m.size) for m in marginals], indexing="ij")
    probs = marginals[0]
    for m in marginals[1:]:
        probs = np.multiply.outer(probs, m)
    outcomes = np.stack([g.reshape(-1) for g in grids], axis=1)
    p = probs.reshape(-1)
    keep = p > drop_below
    return JointDistribution(outcomes[keep], p[keep])


def squeezed_amplitudes(r: float, local_cutoff: int = 10) -> np.ndarray:
    """Number-basis amplitudes of a squeezed vacuum, kept up to ``local_cutoff`` photons."""
    amp = np.zeros(local_cutoff + 1, dtype=complex)
    ch, th = math.cosh(r), math.tanh(r)
    for k in range(local_cutoff // 2 + 1):
        amp[2 * k] = (-th) ** k * math.sqrt(math.comb(2 * k, k)) / 2**k / math.sqrt(ch)
    return amp


__all__ = [
    "BeamSplitter",
    "PhaseShifter",
    "MeshPlan",
    "UnitarySpec",
    "MultimodeState",
    "PureComponent",
    "JointDistribution",
    "decompose",
    "evolve",
    "output_distribution",
    "coherent_shortcut",
    "product_joint",
    "paper_unitary",
    "squeezed_amplitudes",
]
