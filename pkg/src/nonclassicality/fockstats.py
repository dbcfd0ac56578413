"""Photon-number statistics of the single-mode state families.

Every family used for training has a closed-form photon-number distribution,
so no density matrices are stored: detectors are diagonal in the number basis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .specfun import log_factorial

DEFAULT_TAIL = 1e-10
DEFAULT_MAX_CUTOFF = 200
TRUNCATION_LIMIT = 1e-8


class ParameterError(ValueError):
    pass


class TruncationError(ValueError):
    def __init__(self, tail_mass: float, limit: float = TRUNCATION_LIMIT):
        super().__init__(f"tail mass {tail_mass:.3e} beyond cutoff exceeds {limit:.0e}; raise the cutoff")
        self.tail_mass = tail_mass


class Family(str, enum.Enum):
    COHERENT = "Coherent"
    MIXED_COHERENT = "MixedCoherent"
    THERMAL = "Thermal"
    SQUEEZED_VACUUM = "SqueezedVacuum"
    SPATS = "Spats"
    LOSSY_FOCK = "LossyFock"

    @property
    def nonclassical(self) -> bool:
        return self in (Family.SQUEEZED_VACUUM, Family.SPATS, Family.LOSSY_FOCK)


_REQUIRED = {
    Family.COHERENT: ("alpha",),
    Family.MIXED_COHERENT: ("alpha1", "alpha2"),
    Family.THERMAL: ("nbar",),
    Family.SQUEEZED_VACUUM: ("r",),
    Family.SPATS: ("nbar",),
    Family.LOSSY_FOCK: ("n", "p_loss"),
}


@dataclass(frozen=True)
class StateSpec:
    """A single-mode input state: a family plus its parameters.

    Parameter names per family: ``alpha`` (Coherent), ``alpha1``/``alpha2``
    (MixedCoherent), ``nbar`` (Thermal, Spats), ``r`` (SqueezedVacuum),
    ``n``/``p_loss`` (LossyFock).
    """

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        missing = [k for k in _REQUIRED[fam] if k not in self.params]
        if missing:
            raise ParameterError(f"{fam.value} requires parameters {missing}")
        for key, val in self.params.items():
            if not math.isfinite(float(val)):
                raise ParameterError(f"{key}={val} is not finite")
        p = self.params
        if fam in (Family.THERMAL, Family.SPATS) and p["nbar"] < 0:
            raise ParameterError(f"nbar must be >= 0, got {p['nbar']}")
        if fam is Family.LOSSY_FOCK:
            if not 0.0 <= p["p_loss"] <= 1.0:
                raise ParameterError(f"p_loss must lie in [0, 1], got {p['p_loss']}")
            if int(p["n"]) != p["n"] or p["n"] < 1:
                raise ParameterError(f"LossyFock needs an integer n >= 1, got {p['n']}")

    @property
    def label(self) -> int:
        """1 for nonclassical families, 0 for classical ones."""
        return int(self.family.nonclassical)

    @classmethod
    def coherent(cls, alpha: float) -> "StateSpec":
        return cls(Family.COHERENT, {"alpha": alpha})

    @classmethod
    def mixed_coherent(cls, alpha1: float, alpha2: float) -> "StateSpec":
        return cls(Family.MIXED_COHERENT, {"alpha1": alpha1, "alpha2": alpha2})

    @classmethod
    def thermal(cls, nbar: float) -> "StateSpec":
        return cls(Family.THERMAL, {"nbar": nbar})

    @classmethod
    def squeezed_vacuum(cls, r: float) -> "StateSpec":
        return cls(Family.SQUEEZED_VACUUM, {"r": r})

    @classmethod
    def spats(cls, nbar: float) -> "StateSpec":
        return cls(Family.SPATS, {"nbar": nbar})

    @classmethod
    def lossy_fock(cls, n: int, p_loss: float = 0.0) -> "StateSpec":
        return cls(Family.LOSSY_FOCK, {"n": n, "p_loss": p_loss})

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family.value, "params": dict(self.params)}


@dataclass(frozen=True)
class PhotonDistribution:
    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty vector")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if self.tail_mass < 0:
            raise ValueError("tail_mass must be nonnegative")
        object.__setattr__(self, "probs", probs)

    @property
    def cutoff(self) -> int:
        return self.probs.size - 1

    def require_tail_below(self, limit: float = TRUNCATION_LIMIT) -> None:
        if self.tail_mass >= limit:
            raise TruncationError(self.tail_mass, limit)


@dataclass(frozen=True)
class MomentVector:
    """Raw and normal-ordered moments, index k-1 holding order k.

    ``raw_stderr``/``normal_stderr`` are only set for moments estimated from
    samples.
    """

    raw: np.ndarray
    normal_ordered: np.ndarray
    raw_stderr: np.ndarray | None = None
    normal_stderr: np.ndarray | None = None

    @property
    def order(self) -> int:
        return len(self.raw)

    def mean(self) -> float:
        return float(self.raw[0])


def _poisson(mu: float, m: np.ndarray) -> np.ndarray:
    if mu == 0.0:
        return (m == 0).astype(float)
    return np.exp(m * math.log(mu) - mu - log_factorial(m))


def _pmf(spec: StateSpec, m: np.ndarray) -> np.ndarray:
    fam, p = spec.family, spec.params
    if fam is Family.COHERENT:
        return _poisson(float(p["alpha"]) ** 2, m)
    if fam is Family.MIXED_COHERENT:
        return 0.5 * (_poisson(float(p["alpha1"]) ** 2, m) + _poisson(float(p["alpha2"]) ** 2, m))
    if fam is Family.THERMAL:
        nbar = float(p["nbar"])
        if nbar == 0.0:
            return (m == 0).astype(float)
        return np.exp(m * math.log(nbar) - (m + 1) * math.log1p(nbar))
    if fam is Family.SQUEEZED_VACUUM:
        r = float(p["r"])
        out = np.zeros(m.shape)
        even = m % 2 == 0
        k = m[even] // 2
        t2 = math.tanh(r) ** 2
        if t2 == 0.0:
            # r = 0 or tanh(r)^2 underflows: vacuum to double precision
            out[even] = (k == 0).astype(float)
            return out
        log_w = k * math.log(t2) + log_factorial(2 * k) - 2 * k * math.log(2.0) - 2 * log_factorial(k)
        out[even] = np.exp(log_w) / math.cosh(r)
        return out
    if fam is Family.SPATS:
        nbar = float(p["nbar"])
        out = np.zeros(m.shape)
        pos = m >= 1
        if nbar == 0.0:
            out[m == 1] = 1.0
            return out
        mm = m[pos]
        out[pos] = mm * np.exp((mm - 1) * math.log(nbar) - (mm + 1) * math.log1p(nbar))
        return out
    if fam is Family.LOSSY_FOCK:
        n, pl = int(p["n"]), float(p["p_loss"])
        return np.where(m == n, 1.0 - pl, 0.0) + np.where(m == n - 1, pl, 0.0)
    raise ParameterError(f"unknown family {fam}")


def mean_photon_number(spec: StateSpec) -> float:
    fam, p = spec.family, spec.params
    if fam is Family.COHERENT:
        return float(p["alpha"]) ** 2
    if fam is Family.MIXED_COHERENT:
        return 0.5 * (float(p["alpha1"]) ** 2 + float(p["alpha2"]) ** 2)
    if fam is Family.THERMAL:
        return float(p["nbar"])
    if fam is Family.SQUEEZED_VACUUM:
        return math.sinh(float(p["r"])) ** 2
    if fam is Family.SPATS:
        return 2 * float(p["nbar"]) + 1
    return int(p["n"]) - float(p["p_loss"])


def photon_distribution(
    spec: StateSpec,
    cutoff: int | None = None,
    *,
    tail_target: float = DEFAULT_TAIL,
    max_cutoff: int = DEFAULT_MAX_CUTOFF,
) -> PhotonDistribution:
    """Exact photon-number distribution of ``spec`` truncated at ``cutoff``.

    With ``cutoff=None`` the cutoff grows until the mass beyond it drops below
    ``tail_target`` or ``max_cutoff`` is reached. Mass beyond the cutoff is
    reported in ``tail_mass`` rather than renormalized away.
    """
    if cutoff is not None:
        if cutoff < 0:
            raise ParameterError(f"cutoff must be >= 0, got {cutoff}")
        probs = _pmf(spec, np.arange(cutoff + 1))
        return PhotonDistribution(probs, max(0.0, 1.0 - float(np.sum(probs))))

    # start near mean + a few standard deviations and grow geometrically
    mu = mean_photon_number(spec)
    c = min(max_cutoff, max(8, int(mu + 10 * math.sqrt(mu + 1) + 10)))
    while True:
        probs = _pmf(spec, np.arange(c + 1))
        tail = max(0.0, 1.0 - float(np.sum(probs)))
        if tail < tail_target or c >= max_cutoff:
            break
        c = min(max_cutoff, int(c * 1.5) + 1)
    # trim trailing zeros that carry no information
    nz = np.nonzero(probs)[0]
    last = int(nz[-1]) if nz.size else 0
    if spec.family is Family.LOSSY_FOCK:
        last = max(last, int(spec.params["n"]))
    return PhotonDistribution(probs[: last + 1], tail)


def _falling_factorial(m: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(m, dtype=float)
    for j in range(k):
        out = out * (m - j)
    return out


def moments_from_probs(probs: np.ndarray, order: int) -> MomentVector:
    """Moments of an arbitrary probability vector over 0..len(probs)-1."""
    if order < 1:
        raise ValueError("order must be >= 1")
    probs = np.asarray(probs, dtype=float)
    m = np.arange(probs.size, dtype=float)
    raw = np.array([np.dot(m**k, probs) for k in range(1, order + 1)])
    normal = np.array([np.dot(_falling_factorial(m, k), probs) for k in range(1, order + 1)])
    return MomentVector(raw, normal)


def moments(dist: PhotonDistribution, order: int) -> MomentVector:
    dist.require_tail_below()
    return moments_from_probs(dist.probs, order)


def empirical_moments(samples: np.ndarray, mode: int = 0, order: int = 3) -> MomentVector:
    """Sample moments of one mode with standard errors ``sqrt(var / M)``.

    ``samples`` is a sample set or an ``(M, d_x)`` integer array (a 1-D
    array is read as a single mode). The variance is the unbiased sample variance of the
    per-shot power ``x**k`` (falling factorial for the normal-ordered entries).
    """
    x = np.asarray(getattr(samples, "samples", samples))
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise ValueError("empty sample set")
    if x.shape[0] < 2:
        raise ValueError("standard errors need at least two samples")
    if order < 1:
        raise ValueError("order must be >= 1")
    col = x[:, mode].astype(float)
    n = col.size
    powers = np.stack([col**k for k in range(1, order + 1)])
    falling = np.stack([_falling_factorial(col, k) for k in range(1, order + 1)])
    return MomentVector(
        raw=powers.mean(axis=1),
        normal_ordered=falling.mean(axis=1),
        raw_stderr=np.sqrt(powers.var(axis=1, ddof=1) / n),
        normal_stderr=np.sqrt(falling.var(axis=1, ddof=1) / n),
    )


def generating_function(spec: StateSpec, z: float) -> float:
    """Closed-form probability generating function sum_m p_m z**m.

    Used as an exactness cross-check and for states too bright to tabulate.
    """
    fam, p = spec.family, spec.params
    if fam is Family.COHERENT:
        return math.exp(float(p["alpha"]) ** 2 * (z - 1.0))
    if fam is Family.MIXED_COHERENT:
        return 0.5 * (math.exp(float(p["alpha1"]) ** 2 * (z - 1.0)) + math.exp(float(p["alpha2"]) ** 2 * (z - 1.0)))
    if fam is Family.THERMAL:
        return 1.0 / (1.0 + float(p["nbar"]) * (1.0 - z))
    if fam is Family.SQUEEZED_VACUUM:
        r = float(p["r"])
        return 1.0 / math.sqrt(math.cosh(r) ** 2 - z * z * math.sinh(r) ** 2)
    if fam is Family.SPATS:
        nbar = float(p["nbar"])
        return z / (1.0 + nbar - nbar * z) ** 2
    n, pl = int(p["n"]), float(p["p_loss"])
    return (1.0 - pl) * z**n + pl * z ** (n - 1)
