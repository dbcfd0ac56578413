"""Detector models: from true photon statistics to observed outcome statistics.

Three schemes are covered: an ideal photon-number-resolving (PNR) detector
with a finite cutoff, a binned PNR detector with efficiency and dark counts
(outcomes 0, 1, ..., top-1 and a saturating ``top+`` bin), and click
multiplexing over ``N`` bins. Externally characterized detectors enter as a
POVM matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import mpmath
import numpy as np

from .fockstats import PhotonDistribution, TRUNCATION_LIMIT
from .interferometer import JointDistribution, merge_rows
from .specfun import binomial, log_factorial

CLICK_FLOAT_MAX_BINS = 12
COLUMN_TOL = 1e-9


class DetectorError(ValueError):
    pass


@dataclass(frozen=True)
class DetectorModel:
    """Parametric or matrix-defined detector.

    ``kind`` is one of ``"ideal_pnr"`` (uses ``cutoff``), ``"binned_pnr"``
    (``efficiency``, ``dark_rate``, ``top``: outcomes 0..top with the last
    absorbing everything above), ``"click"`` (``bins``, ``efficiency``,
    ``dark_rate``) or ``"povm"`` (``matrix`` of shape outcomes x (cutoff+1)).
    """

    kind: str
    cutoff: int = 29
    efficiency: float = 1.0
    dark_rate: float = 0.0
    top: int = 4
    bins: int = 8
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("ideal_pnr", "binned_pnr", "click", "povm"):
            raise DetectorError(f"unknown detector kind {self.kind!r}")
        if not 0.0 <= self.efficiency <= 1.0:
            raise DetectorError(f"efficiency must lie in [0, 1], got {self.efficiency}")
        if self.dark_rate < 0:
            raise DetectorError(f"dark rate must be >= 0, got {self.dark_rate}")
        if self.kind == "click" and self.bins < 1:
            raise DetectorError(f"click detector needs bins >= 1, got {self.bins}")
        if self.kind == "binned_pnr" and self.top < 1:
            raise DetectorError(f"binned detector needs top >= 1, got {self.top}")
        if self.kind == "povm":
            if self.matrix is None:
                raise DetectorError("povm detector needs a matrix")
            m = np.asarray(self.matrix, dtype=float)
            _validate_povm(m)
            object.__setattr__(self, "matrix", m)
            object.__setattr__(self, "cutoff", m.shape[1] - 1)

    @classmethod
    def ideal_pnr(cls, cutoff: int = 29) -> "DetectorModel":
        return cls("ideal_pnr", cutoff=cutoff)

    @classmethod
    def binned_pnr(cls, efficiency: float = 1.0, dark_rate: float = 0.0, top: int = 4) -> "DetectorModel":
        return cls("binned_pnr", efficiency=efficiency, dark_rate=dark_rate, top=top)

    @classmethod
    def click(cls, bins: int = 8, efficiency: float = 1.0, dark_rate: float = 0.0) -> "DetectorModel":
        return cls("click", bins=bins, efficiency=efficiency, dark_rate=dark_rate)

    @classmethod
    def povm(cls, matrix) -> "DetectorModel":
        return cls("povm", matrix=np.asarray(matrix, dtype=float))

    @property
    def outcome_count(self) -> int:
        if self.kind == "ideal_pnr":
            return self.cutoff + 1
        if self.kind == "binned_pnr":
            return self.top + 1
        if self.kind == "click":
            return self.bins + 1
        return self.matrix.shape[0]

    @property
    def saturates(self) -> bool:
        """Whether the top outcome lumps together all larger photon numbers."""
        return self.kind in ("ideal_pnr", "binned_pnr", "povm")

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "ideal_pnr":
            return {"kind": self.kind, "cutoff": self.cutoff}
        if self.kind == "binned_pnr":
            return {"kind": self.kind, "efficiency": self.efficiency, "dark_rate": self.dark_rate, "top": self.top}
        if self.kind == "click":
            return {"kind": self.kind, "bins": self.bins, "efficiency": self.efficiency, "dark_rate": self.dark_rate}
        return {"kind": self.kind, "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DetectorModel":
        data = dict(data)
        kind = data.pop("kind")
        if kind == "povm" and "path" in data:
            return load_povm(data["path"])
        return cls(kind, **data)


def _validate_povm(m: np.ndarray) -> None:
    if m.ndim != 2:
        raise DetectorError(f"POVM matrix must be 2-D, got shape {m.shape}")
    if np.any(m < 0):
        raise DetectorError("POVM matrix has negative entries")
    dev = np.abs(m.sum(axis=0) - 1.0)
    if np.any(dev > COLUMN_TOL):
        bad = int(np.argmax(dev))
        raise DetectorError(f"POVM column m={bad} sums to {m[:, bad].sum():.12f}, expected 1")


def load_povm(path: str | Path) -> DetectorModel:
    """Read ``{"outcomes": O, "cutoff": C, "matrix": [[p(o|m)] ...]}``."""
    data = json.loads(Path(path).read_text())
    m = np.asarray(data["matrix"], dtype=float)
    if m.shape != (data["outcomes"], data["cutoff"] + 1):
        raise DetectorError(
            f"{path}: matrix shape {m.shape} does not match outcomes={data['outcomes']}, cutoff={data['cutoff']}"
        )
    return DetectorModel.povm(m)


def save_povm(model: DetectorModel, path: str | Path) -> None:
    m = model.matrix
    Path(path).write_text(json.dumps({"outcomes": m.shape[0], "cutoff": m.shape[1] - 1, "matrix": m.tolist()}))


@dataclass(frozen=True)
class OutcomeDistribution:
    probs: np.ndarray
    detector: DetectorModel | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < -1e-15):
            raise DetectorError("outcome probabilities must be nonnegative")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))

    @property
    def outcomes(self) -> int:
        return self.probs.size


@dataclass
class SampleSet:
    """``samples`` is an ``(M, d_x)`` array of detector outcomes for one state."""

    samples: np.ndarray
    label: int = 0
    meta: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        x = np.asarray(self.samples)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[0] < 1:
            raise ValueError("a sample set needs M >= 1")
        if np.any(x < 0):
            raise ValueError("samples must be nonnegative counts")
        self.samples = x.astype(np.int64)

    @property
    def M(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]


# ---------------------------------------------------------------------------
# response matrices


def binned_response(efficiency: float, dark_rate: float, top: int, cutoff: int) -> np.ndarray:
    """P(outcome | m photons) for binomial loss plus Poisson dark counts,
    with outcome ``top`` absorbing every count >= top."""
    m = np.arange(cutoff + 1)
    k = np.arange(top + 1)
    # thinning: Binomial(m, eta) probability of k detected photons, only k <= top matters
    if efficiency == 1.0:
        thin = (k[:, None] == m[None, :]).astype(float)
    elif efficiency == 0.0:
        thin = np.zeros((top + 1, cutoff + 1))
        thin[0, :] = 1.0
    else:
        valid = k[:, None] <= m[None, :]
        rest = np.where(valid, m[None, :] - k[:, None], 0)
        logc = log_factorial(m)[None, :] - log_factorial(k)[:, None] - log_factorial(rest)
        logp = logc + k[:, None] * math.log(efficiency) + rest * math.log1p(-efficiency)
        thin = np.where(valid, np.exp(np.where(valid, logp, 0.0)), 0.0)
    if dark_rate > 0:
        dark = np.exp(k * math.log(dark_rate) - dark_rate - log_factorial(k))
    else:
        dark = (k == 0).astype(float)
    resp = np.zeros((top + 1, cutoff + 1))
    for o in range(top):
        # P(detected + dark = o)
        kk = np.arange(o + 1)
        resp[o] = np.sum(thin[kk, :] * dark[o - kk][:, None], axis=0)
    resp[top] = 1.0 - resp[:top].sum(axis=0)
    return np.clip(resp, 0.0, 1.0)


def ideal_response(cutoff: int, dist_cutoff: int) -> np.ndarray:
    resp = np.zeros((cutoff + 1, dist_cutoff + 1))
    m = np.arange(dist_cutoff + 1)
    resp[np.minimum(m, cutoff), m] = 1.0
    return resp


def click_response_dp(bins: int, efficiency: float, dark_rate: float, cutoff: int) -> np.ndarray:
    """P(k clicks | m photons) by photon-by-photon occupancy recursion.

    Each photon is lost with probability 1-eta or lands in one of ``bins``
    equally likely bins; a bin clicks if it holds a photon or fires a dark
    count (probability 1 - exp(-nu)). All terms are positive, so this stays
    accurate for any number of bins; it serves as an independent route to
    the click statistics.
    """
    resp = np.zeros((bins + 1, cutoff + 1))
    occ = np.zeros(bins + 1)
    occ[0] = 1.0
    j = np.arange(bins + 1)
    p_dark = -math.expm1(-dark_rate)
    dark_mix = np.zeros((bins + 1, bins + 1))
    for filled in range(bins + 1):
        free = bins - filled
        extra = np.arange(free + 1)
        w = binomial(free, extra) * p_dark**extra * (1 - p_dark) ** (free - extra)
        dark_mix[filled + extra, filled] = w
    for m in range(cutoff + 1):
        resp[:, m] = dark_mix @ occ
        new = occ * (1.0 - efficiency + efficiency * j / bins)
        new[1:] += occ[:-1] * efficiency * (bins - j[:-1]) / bins
        occ = new
    return resp


def response_matrix(model: DetectorModel, dist_cutoff: int) -> np.ndarray:
    """Outcome-by-photon-number matrix covering photon numbers 0..dist_cutoff."""
    if model.kind == "ideal_pnr":
        return ideal_response(model.cutoff, dist_cutoff)
    if model.kind == "binned_pnr":
        return binned_response(model.efficiency, model.dark_rate, model.top, dist_cutoff)
    if model.kind == "click":
        return click_response_dp(model.bins, model.efficiency, model.dark_rate, dist_cutoff)
    m = model.matrix
    if dist_cutoff > model.cutoff:
        raise DetectorError(f"distribution cutoff {dist_cutoff} exceeds POVM cutoff {model.cutoff}")
    return m[:, : dist_cutoff + 1]


# ---------------------------------------------------------------------------
# single-mode responses


def _normal_ordered_exp(probs: np.ndarray, s: int, bins: int, efficiency: float, dark_rate: float) -> float:
    # <: exp(-s Gamma) :> with Gamma = eta n / N + nu
    z = 1.0 - s * efficiency / bins
    return math.exp(-s * dark_rate) * float(np.polynomial.polynomial.polyval(z, probs))


def click_distribution(dist: PhotonDistribution, bins: int, efficiency: float = 1.0, dark_rate: float = 0.0) -> OutcomeDistribution:
    """Click-count distribution c_0..c_N of a multiplexed threshold detector.

    Expands the click POVM binomially and evaluates each normal-ordered
    exponential through ``<:exp(-s Gamma):> = exp(-s nu) sum_m p_m (1 - s eta/N)^m``.
    The alternating sum loses digits as N grows, so above
    ``CLICK_FLOAT_MAX_BINS`` bins it is evaluated in extended precision.
    """
    if bins < 1:
        raise DetectorError(f"bins must be >= 1, got {bins}")
    if not 0.0 <= efficiency <= 1.0 or dark_rate < 0:
        raise DetectorError(f"invalid detector parameters eta={efficiency}, nu={dark_rate}")
    dist.require_tail_below(TRUNCATION_LIMIT)
    probs = dist.probs
    model = DetectorModel.click(bins, efficiency, dark_rate)
    if bins <= CLICK_FLOAT_MAX_BINS:
        g = np.array([_normal_ordered_exp(probs, s, bins, efficiency, dark_rate) for s in range(bins + 1)])
        c = np.zeros(bins + 1)
        for k in range(bins + 1):
            l = np.arange(k + 1)
            c[k] = binomial(bins, k) * np.sum(binomial(k, l) * (-1.0) ** l * g[bins - k + l])
        return OutcomeDistribution(np.clip(c, 0.0, None), model)

    with mpmath.workdps(int(bins * 0.7) + 40):
        mp_probs = [mpmath.mpf(float(p)) for p in probs]
        g = []
        for s in range(bins + 1):
            z = 1 - mpmath.mpf(s) * mpmath.mpf(efficiency) / bins
            g.append(mpmath.exp(-s * mpmath.mpf(dark_rate)) * mpmath.polyval(mp_probs[::-1], z))
        c = []
        for k in range(bins + 1):
            acc = mpmath.mpf(0)
            for l in range(k + 1):
                acc += mpmath.binomial(k, l) * (-1) ** l * g[bins - k + l]
            c.append(float(mpmath.binomial(bins, k) * acc))
    return OutcomeDistribution(np.clip(np.array(c), 0.0, None), model)


def pnr_response(dist: PhotonDistribution, model: DetectorModel) -> OutcomeDistribution:
    """Observed outcome distribution of a photon-number measurement.

    Mass beyond the distribution's cutoff (``tail_mass``) is assigned to the
    saturating top outcome.
    """
    if model.kind == "click":
        raise DetectorError("use click_distribution for click detectors")
    if model.kind == "povm" and dist.cutoff > model.cutoff:
        raise DetectorError(f"distribution cutoff {dist.cutoff} exceeds POVM cutoff {model.cutoff}")
    resp = response_matrix(model, dist.cutoff)
    out = resp @ dist.probs
    if model.kind == "povm":
        # tail photons respond like the largest tabulated photon number
        out = out + dist.tail_mass * model.matrix[:, -1]
    else:
        out[-1] += dist.tail_mass
    return OutcomeDistribution(out, model)


def detect(dist: PhotonDistribution, model: DetectorModel) -> OutcomeDistribution:
    if model.kind == "click":
        return click_distribution(dist, model.bins, model.efficiency, model.dark_rate)
    return pnr_response(dist, model)


def detect_joint(table: JointDistribution, model: DetectorModel) -> JointDistribution:
    """Apply the same detector independently to every mode of a joint table."""
    cutoff = int(table.outcomes.max()) if table.outcomes.size else 0
    resp = response_matrix(model, cutoff)
    outcomes, probs = table.outcomes, table.probs
    for mode in range(table.d):
        block = resp[:, outcomes[:, mode]]  # (O, K)
        o_idx, k_idx = np.nonzero(block)
        new_out = outcomes[k_idx].copy()
        new_out[:, mode] = o_idx
        outcomes, probs = merge_rows(new_out, probs[k_idx] * block[o_idx, k_idx])
    return JointDistribution(outcomes, probs, table.truncation_loss)


# ---------------------------------------------------------------------------
# sampling


def sample_indices(probs, M: int, seed: int | np.random.Generator) -> np.ndarray:
    """``M`` i.i.d. indices by inverse-CDF lookup on ``probs``."""
    probs = np.asarray(probs, dtype=float)
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    u = rng.random(M)
    return np.minimum(np.searchsorted(cdf, u, side="right"), probs.size - 1).astype(np.int64)


def sample(
    outcomes: OutcomeDistribution | np.ndarray,
    M: int,
    seed: int,
    label: int = 0,
    meta: dict[str, Any] | None = None,
) -> SampleSet:
    """Single-mode sample set of ``M`` draws from exact outcome probabilities."""
    probs = outcomes.probs if isinstance(outcomes, OutcomeDistribution) else outcomes
    return SampleSet(sample_indices(probs, M, seed)[:, None], label, dict(meta or {}), seed)


def sample_joint(
    table: JointDistribution,
    M: int,
    seed: int,
    label: int = 0,
    meta: dict[str, Any] | None = None,
) -> SampleSet:
    """Draw ``M`` outcome tuples from a sparse joint table (renormalized)."""
    idx = sample_indices(table.probs, M, seed)
    return SampleSet(table.outcomes[idx], label, dict(meta or {}), seed)


def normal_ordered_pi_moments(click_moments, bins: int, order: int = 3) -> np.ndarray:
    """Normal-ordered moments of the click POVM from click-count moments.

    ``click_moments`` holds <c>, <c^2>, <c^3> (only the first ``order`` are
    used). Derived from derivatives of the click generating function at 1.
    """
    c = np.asarray(click_moments, dtype=float)
    N = bins
    if order >= 3 and N < 3:
        raise DetectorError(f"third click moment needs N >= 3, got {N}")
    if order >= 2 and N < 2:
        raise DetectorError(f"second click moment needs N >= 2, got {N}")
    out = [c[0] / N]
    if order >= 2:
        out.append((c[1] - c[0]) / (N * (N - 1)))
    if order >= 3:
        out.append((c[2] - 3 * c[1] + 2 * c[0]) / (N * (N - 1) * (N - 2)))
    return np.array(out)
