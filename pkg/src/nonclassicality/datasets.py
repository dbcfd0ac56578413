"""Dataset configurations, the preset compositions, simulation and JSONL I/O."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .detectors import DetectorModel, SampleSet, detect, detect_joint, pnr_response, sample, sample_joint
from .fockstats import Family, StateSpec, photon_distribution
from .interferometer import (
    JointDistribution,
    MultimodeState,
    UnitarySpec,
    decompose,
    evolve,
    output_distribution,
    paper_unitary,
    product_joint,
    squeezed_amplitudes,
)
from .io_utils import atomic_write_text

BRIGHT_MAX_CUTOFF = 20000
SQUEEZED_LOCAL_CUTOFF = 10
MULTIMODE_N_MAX = 12

_PARAM = {
    Family.COHERENT: "alpha",
    Family.MIXED_COHERENT: "alpha1",
    Family.THERMAL: "nbar",
    Family.SQUEEZED_VACUUM: "r",
    Family.SPATS: "nbar",
    Family.LOSSY_FOCK: "n",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StateGroup:
    """``count`` states of one family with amplitudes on a grid over [lo, hi].

    ``pattern`` marks the excited modes of a multimode input (1 = excited).
    ``options``: ``alpha2_ratio`` for mixed coherent states (second amplitude
    as a fraction of the first), ``main_weight``/``loss_weight`` for
    single-photon-loss Fock inputs.
    """

    family: Family
    lo: float
    hi: float
    count: int
    spacing: str = "linear"
    pattern: tuple[int, ...] | None = None
    options: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.count < 1:
            raise ConfigError(f"{self.family.value}: count must be >= 1")
        if self.hi < self.lo:
            raise ConfigError(f"{self.family.value}: amplitude range [{self.lo}, {self.hi}] is empty")
        if self.spacing not in ("linear", "geometric"):
            raise ConfigError(f"{self.family.value}: spacing must be linear or geometric")
        if self.spacing == "geometric" and self.lo <= 0:
            raise ConfigError(f"{self.family.value}: geometric grid needs lo > 0")
        if self.pattern is not None:
            object.__setattr__(self, "pattern", tuple(int(v) for v in self.pattern))

    def grid(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.lo])
        if self.spacing == "geometric":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)

    def to_dict(self) -> dict[str, Any]:
        d = {"family": self.family.value, "lo": self.lo, "hi": self.hi, "count": self.count, "spacing": self.spacing}
        if self.pattern is not None:
            d["pattern"] = list(self.pattern)
        if self.options:
            d["options"] = dict(self.options)
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "StateGroup":
        data = dict(data)
        if "pattern" in data and data["pattern"] is not None:
            data["pattern"] = tuple(data["pattern"])
        return cls(**data)


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    detector: DetectorModel
    states: tuple[StateGroup, ...]
    M: int = 1000
    seed: int = 0
    d_x: int = 1
    unitary: str | None = None
    max_cutoff: int = BRIGHT_MAX_CUTOFF

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if self.M < 1:
            raise ConfigError("M must be >= 1")
        if not self.states:
            raise ConfigError("a dataset needs at least one state group")
        for g in self.states:
            if self.d_x > 1 and (g.pattern is None or len(g.pattern) != self.d_x):
                raise ConfigError(f"{g.family.value}: multimode groups need a pattern of length {self.d_x}")
            if self.d_x == 1 and g.pattern is not None:
                raise ConfigError(f"{g.family.value}: pattern given for a single-mode dataset")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "detector": self.detector.to_dict(),
            "states": [g.to_dict() for g in self.states],
            "M": self.M,
            "seed": self.seed,
            "d_x": self.d_x,
            "unitary": self.unitary,
            "max_cutoff": self.max_cutoff,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DatasetConfig":
        try:
            return cls(
                name=data["name"],
                detector=DetectorModel.from_dict(data["detector"]),
                states=tuple(StateGroup.from_dict(g) for g in data["states"]),
                M=int(data.get("M", 1000)),
                seed=int(data.get("seed", 0)),
                d_x=int(data.get("d_x", 1)),
                unitary=data.get("unitary"),
                max_cutoff=int(data.get("max_cutoff", BRIGHT_MAX_CUTOFF)),
            )
        except KeyError as exc:
            raise ConfigError(f"dataset config is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid dataset config: {exc}") from None

    def with_overrides(self, **kw) -> "DatasetConfig":
        data = self.to_dict()
        data.update({k: v for k, v in kw.items() if v is not None})
        return DatasetConfig.from_dict(data)

    def unitary_spec(self) -> UnitarySpec:
        if self.unitary is None:
            return paper_unitary()
        return UnitarySpec.from_json(self.unitary)


# ---------------------------------------------------------------------------
# presets

_SIX = (1, 1, 1, 1, 1, 1)
_BACK = (0, 0, 0, 1, 1, 1)
_FRONT = (1, 1, 1, 0, 0, 0)


def preset(name: str, M: int = 1000, seed: int = 0) -> DatasetConfig:
    """The four dataset compositions: ideal PNR (table1), binned PNR 0..4+
    (table2), eight-bin click multiplexing (table3), six modes behind a fixed
    interferometer with a binned PNR detector (table4)."""
    F = Family
    if name == "table1":
        groups = (
            StateGroup(F.SQUEEZED_VACUUM, 0.1, 1.2, 12),
            StateGroup(F.SPATS, 0.25, 1.2, 20),
            StateGroup(F.COHERENT, 0.0, 3.5, 36),
            StateGroup(F.MIXED_COHERENT, 0.0, 3.5, 18, options={"alpha2_ratio": 0.5}),
        )
        return DatasetConfig(name, DetectorModel.ideal_pnr(29), groups, M, seed)
    if name in ("table2", "table3"):
        if name == "table2":
            coherent = StateGroup(F.COHERENT, 0.0, 12.0, 13)
            det = DetectorModel.binned_pnr(1.0, 0.0, 4)
        else:
            coherent = StateGroup(F.COHERENT, 1.04e-3, 98.1, 13, spacing="geometric")
            det = DetectorModel.click(8, 1.0, 0.0)
        groups = (
            StateGroup(F.SQUEEZED_VACUUM, 0.1, 1.2, 12),
            StateGroup(F.SPATS, 0.15, 0.42, 10),
            coherent,
            StateGroup(F.THERMAL, 0.5, 7.0, 14),
        )
        return DatasetConfig(name, det, groups, M, seed)
    if name == "table4":
        groups = (
            StateGroup(F.SQUEEZED_VACUUM, 0.1, 0.6, 6, pattern=_SIX),
            StateGroup(F.SQUEEZED_VACUUM, 0.1, 0.8, 8, pattern=_BACK),
            StateGroup(F.SQUEEZED_VACUUM, 0.1, 0.8, 8, pattern=_FRONT),
            StateGroup(F.COHERENT, 0.0, 0.9, 10, pattern=_SIX),
            StateGroup(F.COHERENT, 0.1, 1.4, 14, pattern=_BACK),
            StateGroup(F.COHERENT, 0.1, 1.4, 14, pattern=_FRONT),
            StateGroup(F.LOSSY_FOCK, 1, 5, 5, pattern=_SIX, options={"main_weight": 0.9, "loss_weight": 0.0167}),
            StateGroup(F.LOSSY_FOCK, 1, 5, 5, pattern=_BACK, options={"main_weight": 0.95, "loss_weight": 0.0167}),
            StateGroup(F.LOSSY_FOCK, 1, 5, 5, pattern=_FRONT, options={"main_weight": 0.95, "loss_weight": 0.0167}),
        )
        return DatasetConfig(name, DetectorModel.binned_pnr(1.0, 0.0, 4), groups, M, seed, d_x=6)
    raise ConfigError(f"unknown preset {name!r}; choose table1, table2, table3 or table4")


PRESETS = ("table1", "table2", "table3", "table4")


# ---------------------------------------------------------------------------
# simulation


@dataclass
class StateRecord:
    state_id: str
    family: str
    params: dict[str, Any]
    label: int
    d_x: int
    M: int
    samples: np.ndarray
    detector: dict[str, Any] | None = None

    def to_sample_set(self, seed: int | None = None) -> SampleSet:
        meta = {"state_id": self.state_id, "family": self.family, "params": self.params}
        return SampleSet(self.samples, self.label, meta, seed)

    def to_json(self) -> str:
        rec = {
            "state_id": self.state_id,
            "family": self.family,
            "params": self.params,
            "label": self.label,
            "d_x": self.d_x,
            "M": self.M,
            "samples": self.samples.tolist(),
        }
        if self.detector is not None:
            rec["detector"] = self.detector
        return json.dumps(rec, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "StateRecord":
        rec = json.loads(line)
        samples = np.asarray(rec["samples"], dtype=np.int64).reshape(-1, rec["d_x"])
        if samples.shape[0] != rec["M"]:
            raise ConfigError(f"{rec['state_id']}: M={rec['M']} but {samples.shape[0]} samples stored")
        if rec["label"] not in (0, 1):
            raise ConfigError(f"{rec['state_id']}: label must be 0 or 1")
        return cls(rec["state_id"], rec["family"], rec["params"], rec["label"], rec["d_x"], rec["M"], samples, rec.get("detector"))


def record_spec(rec: StateRecord) -> StateSpec:
    """State description of a single-mode record."""
    if rec.d_x != 1:
        raise ConfigError(f"{rec.state_id}: multimode records have no single-mode state description")
    return StateSpec(Family(rec.family), dict(rec.params))


def state_seed(master: int, state_id: str) -> int:
    """Per-state seed independent of the other states in the dataset."""
    digest = hashlib.sha256(f"{master}:{state_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _single_mode_spec(group: StateGroup, value: float) -> StateSpec:
    fam = group.family
    if fam is Family.MIXED_COHERENT:
        return StateSpec.mixed_coherent(value, value * group.options.get("alpha2_ratio", 0.5))
    if fam is Family.LOSSY_FOCK:
        return StateSpec.lossy_fock(int(round(value)), group.options.get("p_loss", 0.0))
    return StateSpec(fam, {_PARAM[fam]: float(value)})


def _state_id(group: StateGroup, params: dict[str, Any]) -> str:
    body = ",".join(f"{k}={_fmt(v)}" for k, v in params.items() if k != "pattern")
    if group.pattern is not None:
        body = "".join(map(str, group.pattern)) + ":" + body
    return f"{group.family.value}[{body}]"


def _multimode_input(group: StateGroup, value: float) -> MultimodeState:
    pat = group.pattern
    d = len(pat)
    if group.family is Family.SQUEEZED_VACUUM:
        vac = np.array([1.0 + 0j])
        amps = [squeezed_amplitudes(value, SQUEEZED_LOCAL_CUTOFF) if p else vac for p in pat]
        return MultimodeState.product(amps, n_max=MULTIMODE_N_MAX)
    if group.family is Family.LOSSY_FOCK:
        n = int(round(value))
        base = np.array([n * p for p in pat])
        items = [(group.options.get("main_weight", 0.9), tuple(base))]
        for mode in range(d):
            if pat[mode]:
                occ = base.copy()
                occ[mode] -= 1
                items.append((group.options.get("loss_weight", 0.0167), tuple(occ)))
        return MultimodeState.mixture(items, renormalize=True)
    raise ConfigError(f"no multimode construction for {group.family.value}")


def _multimode_outcomes(group: StateGroup, value: float, cfg: DatasetConfig, unitary: UnitarySpec, plan) -> JointDistribution:
    det = cfg.detector
    if group.family is Family.COHERENT:
        # product coherent output: detect each mode, then take the product
        alphas = value * np.array(group.pattern, dtype=float)
        out_amp = unitary.entries @ alphas
        marginals = []
        for a in out_amp:
            dist = photon_distribution(StateSpec.coherent(abs(a)), max_cutoff=cfg.max_cutoff)
            marginals.append(detect(dist, det).probs)
        return product_joint(marginals)
    state = evolve(_multimode_input(group, value), plan)
    table = detect_joint(output_distribution(state), det)
    return JointDistribution(table.outcomes, table.probs / table.probs.sum(), table.truncation_loss)


def simulate(cfg: DatasetConfig) -> list[StateRecord]:
    """Exact outcome statistics per state, then ``M`` seeded samples each."""
    records: list[StateRecord] = []
    seen: set[str] = set()
    unitary = plan = None
    if cfg.d_x > 1:
        unitary = cfg.unitary_spec()
        if unitary.dim != cfg.d_x:
            raise ConfigError(f"unitary has dimension {unitary.dim}, dataset has {cfg.d_x} modes")
        plan = decompose(unitary)
    det_dict = cfg.detector.to_dict()
    for group in cfg.states:
        for value in group.grid():
            if cfg.d_x == 1:
                spec = _single_mode_spec(group, float(value))
                params = dict(spec.params)
            else:
                key = "n" if group.family is Family.LOSSY_FOCK else _PARAM[group.family]
                params = {key: int(round(value)) if key == "n" else float(value), "pattern": list(group.pattern)}
            sid = _state_id(group, params)
            if sid in seen:
                raise ConfigError(f"duplicate state {sid}")
            seen.add(sid)
            seed = state_seed(cfg.seed, sid)
            label = int(group.family.nonclassical)
            if cfg.d_x == 1:
                dist = photon_distribution(spec, max_cutoff=cfg.max_cutoff)
                outcome = detect(dist, cfg.detector)
                ss = sample(outcome, cfg.M, seed, label)
            else:
                table = _multimode_outcomes(group, float(value), cfg, unitary, plan)
                ss = sample_joint(table, cfg.M, seed, label)
            records.append(StateRecord(sid, group.family.value, params, label, cfg.d_x, cfg.M, ss.samples, det_dict))
    return records


# ---------------------------------------------------------------------------
# JSONL


def dumps_records(records: Sequence[StateRecord]) -> str:
    return "".join(r.to_json() + "\n" for r in records)


def write_jsonl(path: str | Path, records: Sequence[StateRecord]) -> None:
    atomic_write_text(path, dumps_records(records))


def read_jsonl(path: str | Path) -> list[StateRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(StateRecord.from_json(line))
            except (json.JSONDecodeError, KeyError, ConfigError) as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return out


def to_sample_sets(records: Sequence[StateRecord]) -> list[SampleSet]:
    return [r.to_sample_set() for r in records]


def dataset_detector(records: Sequence[StateRecord]) -> DetectorModel:
    dets = {json.dumps(r.detector, sort_keys=True) for r in records}
    if len(dets) != 1 or records[0].detector is None:
        raise ConfigError("dataset records do not share a single detector description")
    return DetectorModel.from_dict(records[0].detector)
