"""Traditional nonclassicality witnesses, exact and estimated from samples.

Scalar witnesses flag nonclassicality when ``value + bias < threshold``:
Mandel Q, Q3, Q_B and Q_B3 against 0, the Klyshko ratio against 1. Matrix
witnesses report the minimal eigenvalue of a matrix that is positive
semidefinite for every classical state, and additionally demand a margin of
``max(1e-8, 3 stderr)`` below zero.

Empirical versions evaluate the same function on sample means of per-shot
features; their standard error follows from the delta method, i.e. the
sample standard deviation of the linearized per-shot contribution divided by
``sqrt(M)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .baselines import TradeoffCurve
from .detectors import DetectorModel, OutcomeDistribution, SampleSet
from .fockstats import MomentVector, empirical_moments
from .interferometer import JointDistribution
from .linalg import smallest_eigenpair
from .specfun import binomial

PSD_TOL = 1e-8
DEFAULT_DIMENSION_CAP = 64
KLYSHKO_MIN_COUNT = 5


class WitnessError(ValueError):
    pass


class IndexKind(str, enum.Enum):
    INTEGER = "integer"
    HALF_INTEGER = "half_integer"


class MatrixSource(str, enum.Enum):
    PNR_PROBABILITIES = "pnr_probabilities"
    CLICK_PROBABILITIES = "click_probabilities"
    MULTIMODE_MOMENTS = "multimode_moments"
    MULTIMODE_PROBABILITIES = "multimode_probabilities"


@dataclass(frozen=True)
class WitnessReport:
    name: str
    value: float
    threshold: float = 0.0
    stderr: float = 0.0
    margin: float = 0.0
    applicable: bool = True
    detail: dict[str, Any] = field(default_factory=dict, compare=False)

    def verdict(self, bias: float = 0.0) -> bool:
        """True when the biased witness certifies nonclassicality."""
        if not self.applicable or math.isnan(self.value):
            return False
        return self.value + bias < self.threshold - self.margin

    def critical_bias(self) -> float:
        """The state is flagged exactly for biases below this value."""
        if not self.applicable or math.isnan(self.value):
            return -math.inf
        return self.threshold - self.margin - self.value


def _not_applicable(name: str, threshold: float, reason: str) -> WitnessReport:
    return WitnessReport(name, math.nan, threshold, applicable=False, detail={"reason": reason})


@dataclass(frozen=True)
class MomentMatrix:
    entries: np.ndarray
    index_kind: IndexKind | None
    source: MatrixSource
    indices: np.ndarray | None = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if not np.all(np.isfinite(e)):
            raise WitnessError("moment matrix has non-finite entries")
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


# ---------------------------------------------------------------------------
# delta-method helper


def _numeric_gradient(fn: Callable[[np.ndarray], float], mu: np.ndarray) -> np.ndarray:
    g = np.zeros_like(mu)
    for i in range(mu.size):
        h = 1e-6 * max(abs(mu[i]), 1e-3)
        up, dn = mu.copy(), mu.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (fn(up) - fn(dn)) / (2 * h)
    return g


def _delta_stderr(per_shot: np.ndarray) -> float:
    """Standard error of a mean from the linearized per-shot contributions."""
    if per_shot.size < 2:
        return 0.0
    return float(np.std(per_shot, ddof=1) / math.sqrt(per_shot.size))


def _scalar_empirical(name: str, fn: Callable[[np.ndarray], float], feats: np.ndarray, threshold: float) -> WitnessReport:
    mu = feats.mean(axis=0)
    value = fn(mu)
    if not math.isfinite(value):
        return WitnessReport(name, value, threshold)
    g = _numeric_gradient(fn, mu)
    return WitnessReport(name, value, threshold, stderr=_delta_stderr(feats @ g))


def _samples_array(samples) -> np.ndarray:
    x = np.asarray(getattr(samples, "samples", samples))
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise WitnessError("empirical witnesses need at least two samples")
    return x.astype(np.int64)


# ---------------------------------------------------------------------------
# moment-based witnesses (PNR)


def _mandel(raw1: float, raw2: float) -> float:
    return (raw2 - raw1**2) / raw1 - 1.0


def _q3(n1: float, n2: float, n3: float) -> float:
    # normal-ordered arguments
    return n1 * n3 - n2**2


def mandel_q(mom: MomentVector) -> WitnessReport:
    """Mandel Q = (<n^2> - <n>^2)/<n> - 1; negative values are nonclassical."""
    if mom.order < 2:
        raise WitnessError("Mandel Q needs moments up to order 2")
    if mom.raw[0] <= 0:
        return _not_applicable("mandel_q", 0.0, "mean photon number is zero")
    return WitnessReport("mandel_q", _mandel(mom.raw[0], mom.raw[1]), 0.0)


def q3_pnr(mom: MomentVector) -> WitnessReport:
    """Third-order witness <n><:n^3:> - <:n^2:>^2."""
    if mom.order < 3:
        raise WitnessError("Q3 needs moments up to order 3")
    nm = mom.normal_ordered
    return WitnessReport("q3", _q3(nm[0], nm[1], nm[2]), 0.0)


def empirical_mandel_q(samples, mode: int = 0) -> WitnessReport:
    x = _samples_array(samples)[:, mode].astype(float)
    if x.mean() <= 0:
        return _not_applicable("mandel_q", 0.0, "no photons observed")
    feats = np.stack([x, x**2], axis=1)
    return _scalar_empirical("mandel_q", lambda m: _mandel(m[0], m[1]), feats, 0.0)


def empirical_q3(samples, mode: int = 0) -> WitnessReport:
    x = _samples_array(samples)[:, mode].astype(float)
    feats = np.stack([x, x * (x - 1), x * (x - 1) * (x - 2)], axis=1)
    return _scalar_empirical("q3", lambda m: _q3(m[0], m[1], m[2]), feats, 0.0)


# ---------------------------------------------------------------------------
# Klyshko ratio


def _klyshko_ratio(pm: float, p0: float, pp: float, k: int) -> float | None:
    num = (k + 1) * pm * pp
    if p0 == 0.0:
        return None if num == 0.0 else math.inf
    return num / (k * p0**2)


def _probs(probs) -> np.ndarray:
    return np.asarray(probs.probs if isinstance(probs, OutcomeDistribution) else probs, dtype=float)


def klyshko(probs, k: int) -> WitnessReport:
    """(k+1) p_{k-1} p_{k+1} / (k p_k^2); values below 1 are nonclassical."""
    p = _probs(probs)
    if not 1 <= k <= p.size - 2:
        raise WitnessError(f"Klyshko index k={k} outside 1..{p.size - 2}")
    r = _klyshko_ratio(p[k - 1], p[k], p[k + 1], k)
    if r is None:
        return _not_applicable(f"klyshko_k{k}", 1.0, "p_k and numerator both vanish")
    return WitnessReport(f"klyshko_k{k}", r, 1.0, detail={"k": k})


def klyshko_most_violated(probs) -> WitnessReport:
    """Minimum Klyshko ratio over all determinate k."""
    p = _probs(probs)
    best = None
    for k in range(1, p.size - 1):
        rep = klyshko(p, k)
        if rep.applicable and (best is None or rep.value < best.value):
            best = rep
    if best is None:
        return _not_applicable("klyshko", 1.0, "no determinate index")
    return WitnessReport("klyshko", best.value, 1.0, detail=best.detail)


def empirical_klyshko(samples, top: int | None = None, mode: int = 0, min_count: int = KLYSHKO_MIN_COUNT) -> WitnessReport:
    """Most violated Klyshko ratio on relative frequencies.

    Only indices whose central outcome ``k`` was seen at least ``min_count``
    times are scanned; ``top`` is the largest usable outcome (the saturating
    bin of a detector is excluded by the caller).
    """
    x = _samples_array(samples)[:, mode]
    hi = int(x.max()) if top is None else top
    counts = np.bincount(x, minlength=hi + 2)
    best = None
    for k in range(1, hi):
        if counts[k] < min_count:
            continue
        feats = np.stack([(x == k - 1), (x == k), (x == k + 1)], axis=1).astype(float)
        fn = lambda m, k=k: _klyshko_ratio(m[0], m[1], m[2], k)
        rep = _scalar_empirical("klyshko", fn, feats, 1.0)
        if best is None or rep.value < best.value:
            best = WitnessReport("klyshko", rep.value, 1.0, stderr=rep.stderr, detail={"k": k})
    if best is None:
        return _not_applicable("klyshko", 1.0, f"no outcome seen {min_count} times")
    return best


# ---------------------------------------------------------------------------
# matrices of scaled probabilities


def index_set(C: int, kind: IndexKind | str) -> np.ndarray:
    """Matrix indices with pairwise sums <= C: 0..floor(C/2), or the
    ceil(C/2) half-integers 1/2, 3/2, ..."""
    kind = IndexKind(kind)
    if kind is IndexKind.INTEGER:
        return np.arange(C // 2 + 1, dtype=float)
    return np.arange((C + 1) // 2, dtype=float) + 0.5


@dataclass(frozen=True)
class _LinearMatrix:
    # matrix = coef * values[pidx]
    pidx: np.ndarray
    coef: np.ndarray

    def build(self, values: np.ndarray) -> np.ndarray:
        return self.coef * values[self.pidx]

    def eigen_gradient(self, vec: np.ndarray) -> np.ndarray:
        g = np.zeros(int(self.pidx.max()) + 1)
        np.add.at(g, self.pidx.ravel(), (self.coef * np.outer(vec, vec)).ravel())
        return g


def _single_mode_layout(C: int, kind: IndexKind, click_bins: int | None = None) -> tuple[np.ndarray, _LinearMatrix]:
    idx = index_set(C, kind)
    jj, kk = np.meshgrid(idx, idx, indexing="ij")
    total = np.rint(jj + kk).astype(int)
    if click_bins is None:
        coef = binomial(jj + kk, jj)
    else:
        coef = 1.0 / binomial(click_bins, total)
    return idx, _LinearMatrix(total, np.asarray(coef, dtype=float))


def _min_eig_report(name: str, mat: np.ndarray, stderr: float = 0.0, detail=None) -> tuple[WitnessReport, np.ndarray]:
    lam, vec = smallest_eigenpair(mat)
    margin = max(PSD_TOL, 3.0 * stderr)
    return WitnessReport(name, lam, 0.0, stderr=stderr, margin=margin, detail=detail or {}), vec


def generalized_klyshko_pnr(probs, index_kind: IndexKind | str = IndexKind.INTEGER) -> tuple[MomentMatrix, WitnessReport]:
    """Matrix C(j+k, j) p_{j+k} over j, k with j + k <= C.

    ``probs`` covers photon numbers 0..C (a saturating top outcome should be
    left out by the caller). Half-integer indices use the gamma-function
    binomial and probe odd photon numbers.
    """
    p = _probs(probs)
    C = p.size - 1
    if C < 1:
        raise WitnessError(f"generalized Klyshko needs C >= 1, got {C}")
    kind = IndexKind(index_kind)
    idx, lay = _single_mode_layout(C, kind)
    mat = lay.build(p)
    rep, _ = _min_eig_report(f"gen_klyshko_{kind.value}", mat, detail={"index_kind": kind.value})
    return MomentMatrix(mat, kind, MatrixSource.PNR_PROBABILITIES, idx), rep


def generalized_klyshko_click(clicks, N: int | None = None, index_kind: IndexKind | str = IndexKind.INTEGER) -> tuple[MomentMatrix, WitnessReport]:
    """Matrix c_{j+k} / C(N, j+k) over j + k <= N."""
    c = _probs(clicks)
    N = c.size - 1 if N is None else N
    if c.size != N + 1:
        raise WitnessError(f"click distribution has {c.size} entries, expected N+1 = {N + 1}")
    if N < 1:
        raise WitnessError("click matrix needs N >= 1")
    kind = IndexKind(index_kind)
    idx, lay = _single_mode_layout(N, kind, click_bins=N)
    mat = lay.build(c)
    rep, _ = _min_eig_report(f"gen_klyshko_click_{kind.value}", mat, detail={"index_kind": kind.value})
    return MomentMatrix(mat, kind, MatrixSource.CLICK_PROBABILITIES, idx), rep


def _empirical_prob_matrix(name: str, x: np.ndarray, C: int, kind: IndexKind, click_bins: int | None) -> WitnessReport:
    freq = np.bincount(x, minlength=C + 1)[: C + 1] / x.size
    _, lay = _single_mode_layout(C, kind, click_bins)
    rep, vec = _min_eig_report(name, lay.build(freq))
    g = lay.eigen_gradient(vec)
    g = np.concatenate([g, np.zeros(max(0, int(x.max()) + 1 - g.size))])
    se = _delta_stderr(g[x])
    return WitnessReport(name, rep.value, 0.0, stderr=se, margin=max(PSD_TOL, 3 * se), detail={"index_kind": kind.value})


def empirical_generalized_klyshko(samples, C: int, mode: int = 0, click_bins: int | None = None) -> WitnessReport:
    """Minimum eigenvalue over the integer and half-integer matrices built
    from relative frequencies (no smoothing)."""
    x = _samples_array(samples)[:, mode]
    if C < 1:
        raise WitnessError(f"generalized Klyshko needs C >= 1, got {C}")
    name = "gen_klyshko" if click_bins is None else "gen_klyshko_click"
    reps = [_empirical_prob_matrix(name, x, C, k, click_bins) for k in IndexKind]
    return min(reps, key=lambda r: r.value)


# ---------------------------------------------------------------------------
# click-moment witnesses


def click_moments(clicks) -> np.ndarray:
    """<c>, <c^2>, <c^3> of a click distribution."""
    c = _probs(clicks)
    k = np.arange(c.size, dtype=float)
    return np.array([c @ k, c @ k**2, c @ k**3])


def _qb(c1: float, c2: float, N: int) -> float:
    return c2 - (N - 1) / N * c1**2 - c1


def _qb3(c1: float, c2: float, c3: float, N: int) -> float:
    return c3 * c1 - (N - 2) / (N - 1) * c2**2 - (N + 1) / (N - 1) * c2 * c1 + N / (N - 1) * c1**2


def qb(moms, N: int) -> WitnessReport:
    """Binomial parameter <c^2> - ((N-1)/N)<c>^2 - <c>; negative is nonclassical."""
    if N < 2:
        raise WitnessError(f"Q_B needs N >= 2, got {N}")
    m = np.asarray(moms, dtype=float)
    return WitnessReport("qb", _qb(m[0], m[1], N), 0.0)


def qb3(moms, N: int) -> WitnessReport:
    """Third-order click witness built from <c>, <c^2>, <c^3>."""
    if N < 3:
        raise WitnessError(f"Q_B3 needs N >= 3, got {N}")
    m = np.asarray(moms, dtype=float)
    return WitnessReport("qb3", _qb3(m[0], m[1], m[2], N), 0.0)


def empirical_qb(samples, N: int, mode: int = 0) -> WitnessReport:
    if N < 2:
        raise WitnessError(f"Q_B needs N >= 2, got {N}")
    x = _samples_array(samples)[:, mode].astype(float)
    feats = np.stack([x, x**2], axis=1)
    return _scalar_empirical("qb", lambda m: _qb(m[0], m[1], N), feats, 0.0)


def empirical_qb3(samples, N: int, mode: int = 0) -> WitnessReport:
    if N < 3:
        raise WitnessError(f"Q_B3 needs N >= 3, got {N}")
    x = _samples_array(samples)[:, mode].astype(float)
    feats = np.stack([x, x**2, x**3], axis=1)
    return _scalar_empirical("qb3", lambda m: _qb3(m[0], m[1], m[2], N), feats, 0.0)


# ---------------------------------------------------------------------------
# multimode witnesses


def _moment_matrix_from(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    d = first.size
    mat = np.empty((d + 1, d + 1))
    mat[0, 0] = 1.0
    mat[0, 1:] = mat[1:, 0] = first
    mat[1:, 1:] = second - np.diag(first)
    return 0.5 * (mat + mat.T)


def multimode_moment_matrix(source, d_x: int | None = None) -> tuple[MomentMatrix, WitnessReport]:
    """Second-order matrix [[1, <n_i>], [<n_i>, <:n_i n_j:>]].

    ``source`` is a :class:`JointDistribution` (exact moments) or samples
    (empirical moments with a delta-method standard error).
    """
    if isinstance(source, JointDistribution):
        o = source.outcomes.astype(float)
        w = source.probs / source.probs.sum()
        first = w @ o
        second = (o * w[:, None]).T @ o
        mat = _moment_matrix_from(first, second)
        rep, _ = _min_eig_report("moment_matrix", mat)
        return MomentMatrix(mat, None, MatrixSource.MULTIMODE_MOMENTS), rep

    x = _samples_array(source).astype(float)
    if d_x is not None and x.shape[1] != d_x:
        raise WitnessError(f"samples have {x.shape[1]} modes, expected {d_x}")
    first = x.mean(axis=0)
    second = x.T @ x / x.shape[0]
    mat = _moment_matrix_from(first, second)
    lam, vec = smallest_eigenpair(mat)
    # per-shot linearization: v^T F(x) v = (v0 + v.x)^2 - sum_i v_i^2 x_i
    per_shot = (vec[0] + x @ vec[1:]) ** 2 - x @ vec[1:] ** 2
    se = _delta_stderr(per_shot)
    rep = WitnessReport("moment_matrix", lam, 0.0, stderr=se, margin=max(PSD_TOL, 3 * se))
    return MomentMatrix(mat, None, MatrixSource.MULTIMODE_MOMENTS), rep


def superindex(occupation, base: int) -> int | np.ndarray:
    """Positional value n_0 + n_1 base + ... + n_{d-1} base^(d-1)."""
    occ = np.asarray(occupation, dtype=np.int64)
    weights = base ** np.arange(occ.shape[-1], dtype=np.int64)
    out = occ @ weights
    return int(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class _MultimodeLayout:
    rows: np.ndarray  # (R, d) index tuples
    needed: np.ndarray  # superindices (base C+1) of the summed tuples
    lay: _LinearMatrix
    truncated: bool
    full_dim: int


def _multimode_layout(C: int, d: int, kind: IndexKind, cap: int, allow_truncation: bool) -> _MultimodeLayout:
    idx = index_set(C, kind)
    r = idx.size
    full = r**d
    if full > cap and not allow_truncation:
        raise WitnessError(
            f"multimode matrix dimension {full} exceeds cap {cap}; pass allow_truncation=True to use the leading block"
        )
    dim = min(full, cap)
    # mode 0 is the least significant digit
    digits = np.stack(np.unravel_index(np.arange(dim), (r,) * d, order="F"), axis=1)
    rows = idx[digits]
    sums = rows[:, None, :] + rows[None, :, :]
    coef = np.prod(binomial(sums, np.broadcast_to(rows[:, None, :], sums.shape)), axis=-1)
    keys = superindex(np.rint(sums).astype(np.int64), C + 1)
    needed, pidx = np.unique(keys, return_inverse=True)
    return _MultimodeLayout(rows, needed, _LinearMatrix(pidx.reshape(dim, dim), coef), full > cap, full)


def multimode_generalized_klyshko(
    source,
    C: int,
    d_x: int,
    index_kind: IndexKind | str = IndexKind.INTEGER,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
    allow_truncation: bool = False,
) -> tuple[MomentMatrix, WitnessReport]:
    """Multimode matrix prod_i C(j_i + k_i, j_i) p_{j+k} over index tuples.

    Rows and columns are index tuples ordered by their superindex (mode 0
    least significant). Tuples add digit-wise; because each digit stays below
    C/2 the sum never carries, so the entry refers to the outcome whose
    superindex is the plain integer sum of the two superindices. Per-mode
    counts are 0..C and looked up in base C+1, which keeps the mapping
    injective. The matrix is the Kronecker product of single-mode matrices
    for product states, and for one mode it equals
    :func:`generalized_klyshko_pnr`. Above ``dimension_cap`` only the
    leading principal block is used (still PSD for classical states).
    """
    kind = IndexKind(index_kind)
    if C < 1:
        raise WitnessError(f"generalized Klyshko needs C >= 1, got {C}")
    ml = _multimode_layout(C, d_x, kind, dimension_cap, allow_truncation)
    name = f"gen_klyshko_mm_{kind.value}"
    detail = {"index_kind": kind.value, "truncated": ml.truncated, "full_dim": ml.full_dim}

    if isinstance(source, JointDistribution):
        if source.d != d_x:
            raise WitnessError(f"joint table has {source.d} modes, expected {d_x}")
        # outcomes with any count above C must not alias a valid superindex
        valid = np.all(source.outcomes <= C, axis=1)
        table = dict(zip(superindex(source.outcomes[valid], C + 1).tolist(), source.probs[valid].tolist()))
        values = np.array([table.get(int(k), 0.0) for k in ml.needed])
        mat = ml.lay.build(values)
        rep, _ = _min_eig_report(name, mat, detail=detail)
        return MomentMatrix(mat, kind, MatrixSource.MULTIMODE_PROBABILITIES, ml.rows), rep

    x = _samples_array(source)
    if x.shape[1] != d_x:
        raise WitnessError(f"samples have {x.shape[1]} modes, expected {d_x}")
    keys = np.where(np.all(x <= C, axis=1), superindex(x, C + 1), -1)
    pos = np.searchsorted(ml.needed, keys)
    pos = np.minimum(pos, ml.needed.size - 1)
    hit = (keys >= 0) & (ml.needed[pos] == keys)
    values = np.bincount(pos[hit], minlength=ml.needed.size) / x.shape[0]
    mat = ml.lay.build(values)
    lam, vec = smallest_eigenpair(mat)
    g = ml.lay.eigen_gradient(vec)
    g = np.concatenate([g, np.zeros(ml.needed.size - g.size)])
    se = _delta_stderr(np.where(hit, g[pos], 0.0))
    rep = WitnessReport(name, lam, 0.0, stderr=se, margin=max(PSD_TOL, 3 * se), detail=detail)
    return MomentMatrix(mat, kind, MatrixSource.MULTIMODE_PROBABILITIES, ml.rows), rep


# ---------------------------------------------------------------------------
# dataset-level evaluation


PNR_WITNESSES = ("mandel_q", "q3", "klyshko", "gen_klyshko")
CLICK_WITNESSES = ("qb", "qb3", "gen_klyshko_click")
MULTIMODE_WITNESSES = ("moment_matrix", "gen_klyshko_mm")


def valid_witnesses(detector: DetectorModel, d_x: int) -> tuple[str, ...]:
    if d_x > 1:
        return MULTIMODE_WITNESSES
    if detector.kind == "click":
        return CLICK_WITNESSES + ("moment_matrix",)
    return PNR_WITNESSES + ("moment_matrix",)


def resolved_top(detector: DetectorModel) -> int:
    """Largest outcome that is a resolved photon number (C)."""
    if detector.kind == "click":
        return detector.bins
    return detector.outcome_count - 2


def evaluate_witness(
    name: str,
    samples: SampleSet,
    detector: DetectorModel,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
) -> WitnessReport:
    """Empirical witness of one state's samples under a given detector."""
    allowed = valid_witnesses(detector, samples.d)
    if name not in allowed:
        raise WitnessError(
            f"witness {name!r} does not apply to a {samples.d}-mode {detector.kind} dataset; valid: {', '.join(allowed)}"
        )
    C = resolved_top(detector)
    if name == "mandel_q":
        return empirical_mandel_q(samples)
    if name == "q3":
        return empirical_q3(samples)
    if name == "klyshko":
        return empirical_klyshko(samples, top=C)
    if name == "gen_klyshko":
        return empirical_generalized_klyshko(samples, C)
    if name == "qb":
        return empirical_qb(samples, detector.bins)
    if name == "qb3":
        return empirical_qb3(samples, detector.bins)
    if name == "gen_klyshko_click":
        return empirical_generalized_klyshko(samples, C, click_bins=detector.bins)
    if name == "moment_matrix":
        return multimode_moment_matrix(samples)[1]
    reps = [
        multimode_generalized_klyshko(samples, C, samples.d, kind, dimension_cap, allow_truncation=True)[1]
        for kind in IndexKind
    ]
    best = min(reps, key=lambda r: r.value)
    return WitnessReport("gen_klyshko_mm", best.value, 0.0, best.stderr, best.margin, detail=best.detail)


def bias_grid(reports: Sequence[WitnessReport], pad: float = 1.0) -> np.ndarray:
    """Biases covering every distinct verdict pattern, from all-flagged to
    none-flagged: midpoints between sorted critical biases plus both ends."""
    crit = np.array([r.critical_bias() for r in reports])
    crit = np.unique(crit[np.isfinite(crit)])
    if crit.size == 0:
        return np.array([0.0])
    span = max(pad, float(crit[-1] - crit[0]))
    mids = 0.5 * (crit[1:] + crit[:-1])
    return np.concatenate([[crit[0] - span], mids, [crit[-1] + span]])


def sweep_bias(reports: Sequence[WitnessReport], labels, biases, name: str | None = None) -> TradeoffCurve:
    """Accuracy pair at each bias; a state counts as nonclassical when its
    biased witness is violated."""
    lab = np.asarray(labels).astype(int)
    if len(reports) != lab.size:
        raise WitnessError("one report per label required")
    if not (lab == 0).any() or not (lab == 1).any():
        raise WitnessError("bias sweep needs states of both classes")
    curve = TradeoffCurve(name or (reports[0].name if reports else "witness"))
    for b in biases:
        pred = np.array([r.verdict(float(b)) for r in reports], dtype=int)
        curve.add(float(b), pred, lab)
    return curve
