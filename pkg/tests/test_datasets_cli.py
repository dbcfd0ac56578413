import csv
import json

import numpy as np
import pytest

from nonclassicality.cli import main, parse_grid
from nonclassicality.datasets import (
    PRESETS,
    ConfigError,
    DatasetConfig,
    StateGroup,
    StateRecord,
    dataset_detector,
    dumps_records,
    preset,
    read_jsonl,
    record_spec,
    simulate,
    state_seed,
    write_jsonl,
)
from nonclassicality.detectors import DetectorModel
from nonclassicality.fockstats import Family


def _small_config(**kw) -> DatasetConfig:
    groups = (
        StateGroup(Family.COHERENT, 0.2, 2.0, 4),
        StateGroup(Family.THERMAL, 0.3, 1.5, 3),
        StateGroup(Family.SQUEEZED_VACUUM, 0.3, 0.9, 4),
        StateGroup(Family.SPATS, 0.3, 0.9, 3),
    )
    base = dict(name="small", detector=DetectorModel.ideal_pnr(29), states=groups, M=300, seed=4)
    base.update(kw)
    return DatasetConfig(**base)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestPresets:
    @pytest.mark.parametrize("name,total,ncl", [("table1", 86, 32), ("table2", 49, 22), ("table3", 49, 22)])
    def test_counts(self, table_states, name, total, ncl):
        cfg, states = table_states(name)
        labels = [s.label for s in states]
        assert len(states) == total and sum(labels) == ncl
        assert all(s.M == 1000 for s in states)

    def test_table4_composition(self):
        cfg = preset("table4")
        assert cfg.d_x == 6
        assert sum(g.count for g in cfg.states) == 75
        assert sum(g.count for g in cfg.states if g.family.nonclassical) == 37

    def test_unknown(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            preset("table9")

    def test_outcomes_within_detector_range(self, table_states):
        for name in ("table2", "table3"):
            cfg, states = table_states(name)
            top = cfg.detector.outcome_count - 1
            assert all(s.samples.max() <= top for s in states)

    def test_geometric_grid(self):
        g = preset("table3").states[2].grid()
        assert g[0] == pytest.approx(1.04e-3) and g[-1] == pytest.approx(98.1)
        np.testing.assert_allclose(np.diff(np.log(g)), np.log(g[1] / g[0]))


class TestConfig:
    def test_round_trip(self):
        for name in PRESETS:
            cfg = preset(name, M=50, seed=3)
            assert DatasetConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg

    def test_overrides_ignore_none(self):
        cfg = _small_config()
        assert cfg.with_overrides(seed=None, M=10).M == 10
        assert cfg.with_overrides(seed=None).seed == 4

    @pytest.mark.parametrize(
        "mutate,match",
        [
            (lambda d: d.pop("states"), "missing field"),
            (lambda d: d.update(M=0), "M must be"),
            (lambda d: d["states"][0].update(count=0), "count"),
            (lambda d: d["states"][0].update(lo=3.0, hi=1.0), "empty"),
            (lambda d: d["states"][0].update(family="Banana"), "invalid"),
            (lambda d: d.update(d_x=2), "pattern"),
        ],
    )
    def test_invalid(self, mutate, match):
        data = _small_config().to_dict()
        mutate(data)
        with pytest.raises(ConfigError, match=match):
            DatasetConfig.from_dict(data)

    def test_geometric_needs_positive_lo(self):
        with pytest.raises(ConfigError):
            StateGroup(Family.COHERENT, 0.0, 1.0, 3, spacing="geometric")


class TestSimulation:
    def test_deterministic_and_seeded(self):
        a = dumps_records(simulate(_small_config(M=1)))
        b = dumps_records(simulate(_small_config(M=1)))
        assert a == b
        assert dumps_records(simulate(_small_config(seed=5))) != dumps_records(simulate(_small_config()))

    def test_per_state_streams_independent(self):
        full = {r.state_id: r for r in simulate(_small_config())}
        cfg = _small_config()
        only = simulate(DatasetConfig(cfg.name, cfg.detector, cfg.states[2:3], cfg.M, cfg.seed))
        for rec in only:
            np.testing.assert_array_equal(rec.samples, full[rec.state_id].samples)

    def test_state_seed(self):
        assert state_seed(0, "Coherent[alpha=1]") == state_seed(0, "Coherent[alpha=1]")
        assert state_seed(0, "Coherent[alpha=1]") != state_seed(1, "Coherent[alpha=1]")

    def test_duplicate_ids_rejected(self):
        g = StateGroup(Family.COHERENT, 1.0, 1.0, 1)
        with pytest.raises(ConfigError, match="duplicate"):
            simulate(_small_config(states=(g, g)))

    def test_record_spec(self):
        rec = simulate(_small_config(M=5))[0]
        spec = record_spec(rec)
        assert spec.family is Family(rec.family) and spec.label == rec.label

    def test_jsonl_round_trip(self, tmp_path):
        records = simulate(_small_config(M=20))
        path = tmp_path / "d.jsonl"
        write_jsonl(path, records)
        back = read_jsonl(path)
        assert dumps_records(back) == dumps_records(records) == path.read_text()
        assert dataset_detector(back) == DetectorModel.ideal_pnr(29)

    def test_read_diagnostics(self, tmp_path):
        rec = simulate(_small_config(M=3))[0]
        good = rec.to_json()
        bad_m = json.loads(good)
        bad_m["M"] = 4
        path = tmp_path / "bad.jsonl"
        path.write_text(good + "\n" + json.dumps(bad_m) + "\n")
        with pytest.raises(ConfigError, match=r"bad.jsonl:2: .*M=4"):
            read_jsonl(path)
        path.write_text(good + "\n{not json\n")
        with pytest.raises(ConfigError, match=r":2:"):
            read_jsonl(path)
        bad_label = json.loads(good)
        bad_label["label"] = 2
        with pytest.raises(ConfigError, match="label"):
            StateRecord.from_json(json.dumps(bad_label))


class TestGrid:
    def test_forms(self):
        np.testing.assert_allclose(parse_grid("-0.5:0.5:5"), [-0.5, -0.25, 0, 0.25, 0.5])
        np.testing.assert_allclose(parse_grid("0,0.4,1.6"), [0, 0.4, 1.6])

    @pytest.mark.parametrize("text", ["", "a,b", "0:1:0", "0:1"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_grid(text)


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg_path = d / "dataset.json"
    cfg_path.write_text(json.dumps(_small_config().to_dict()))
    out = d / "data.jsonl"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    return d, out


class TestCli:
    def test_simulate_preset_overrides(self, tmp_path, capsys):
        out = tmp_path / "t2.jsonl"
        assert main(["simulate", "--preset", "table2", "--samples", "5", "--seed", "2", "--out", str(out)]) == 0
        recs = read_jsonl(out)
        assert len(recs) == 49 and all(r.M == 5 for r in recs)
        assert "27 classical, 22 nonclassical" in capsys.readouterr().out

    def test_simulate_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for p in (a, b):
            assert main(["simulate", "--preset", "table1", "--samples", "1", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_train_and_evaluate(self, small_dataset, capsys):
        d, data = small_dataset
        model = d / "model.json"
        model.write_text(json.dumps({"L": 2, "epochs": 150, "lam": 0.2}))
        ckpt = d / "ckpt.json"
        assert main(["train", "--dataset", str(data), "--config", str(model), "--out", str(ckpt), "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "< 0  =>  nonclassical" in out
        hist = _rows(d / "ckpt.history.csv")
        assert len(hist) == 151

        preds = d / "preds.csv"
        assert main(["evaluate", "--checkpoint", str(ckpt), "--dataset", str(data), "--out", str(preds)]) == 0
        rows = _rows(preds)
        assert len(rows) == 14
        # scoring the stored train split reproduces the last history row
        train_idx = json.loads(ckpt.read_text())["train_idx"]
        correct = [int(rows[i]["prediction"]) == int(rows[i]["label"]) for i in train_idx]
        assert np.mean(correct) == pytest.approx(float(hist[-1]["train_acc_total"]))

    def test_witness_bias_grid(self, small_dataset):
        d, data = small_dataset
        out = d / "mandel.csv"
        assert main(["witness", "--dataset", str(data), "--witness", "mandel_q", "--bias-grid=-0.5:0.5:11", "--out", str(out)]) == 0
        rows = _rows(out)
        assert len(rows) == 11
        assert float(rows[0]["bias"]) == -0.5 and float(rows[-1]["bias"]) == 0.5
        cl = [float(r["acc_classical"]) for r in rows]
        ncl = [float(r["acc_nonclassical"]) for r in rows]
        # a larger bias flags fewer states
        assert cl == sorted(cl) and ncl == sorted(ncl, reverse=True)

    def test_witness_default_grid_spans(self, small_dataset):
        d, data = small_dataset
        out = d / "q3.csv"
        assert main(["witness", "--dataset", str(data), "--witness", "q3", "--out", str(out)]) == 0
        rows = _rows(out)
        # q3 is defined for every state, so the lowest bias flags all of them
        assert float(rows[0]["acc_classical"]) == 0.0 and float(rows[0]["acc_nonclassical"]) == 1.0
        assert float(rows[-1]["acc_nonclassical"]) == 0.0 and float(rows[-1]["acc_classical"]) == 1.0

    def test_sweep(self, small_dataset, capsys):
        d, data = small_dataset
        model = d / "quick.json"
        model.write_text(json.dumps({"L": 1, "epochs": 40}))
        out = d / "sweep.csv"
        assert main(["sweep", "--dataset", str(data), "--config", str(model), "--lambda-grid", "0,2", "--out", str(out)]) == 0
        assert len(_rows(out)) == 2

    @pytest.mark.parametrize(
        "argv",
        [
            ["simulate", "--preset", "nope", "--out", "x.jsonl"],
            ["simulate", "--out", "x.jsonl"],
            ["frobnicate"],
            ["train", "--out", "x.json"],
        ],
    )
    def test_validation_exit_code(self, argv, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(argv) == 1

    def test_witness_mismatch_exit_code(self, small_dataset, capsys):
        d, data = small_dataset
        assert main(["witness", "--dataset", str(data), "--witness", "qb", "--out", str(d / "w.csv")]) == 1
        assert "valid: mandel_q" in capsys.readouterr().err

    def test_empty_dataset(self, tmp_path, capsys):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        assert main(["witness", "--dataset", str(empty), "--witness", "mandel_q", "--out", str(tmp_path / "w.csv")]) == 1
        assert "empty" in capsys.readouterr().err

    def test_missing_file_is_runtime_error(self, tmp_path):
        assert main(["evaluate", "--checkpoint", str(tmp_path / "nope.json"), "--dataset", str(tmp_path / "nope.jsonl")]) == 2

    def test_model_mode_mismatch(self, small_dataset):
        d, data = small_dataset
        model = d / "bad_model.json"
        model.write_text(json.dumps({"d_x": 3}))
        assert main(["train", "--dataset", str(data), "--config", str(model), "--out", str(d / "c.json")]) == 1

    def test_malformed_config_json(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text("{oops")
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o.jsonl")]) == 1
        assert "c.json:1:2" in capsys.readouterr().err
