"""Dataset files, snapshot round-trips, config digests, and the CLI surface."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from monogp.cli import main
from monogp.experiments import EXAMPLE1_DESIGN, ExperimentConfig, fit_models
from monogp.experiments import testfn_example1 as example1_fn
from monogp.gp import Dataset, DerivativeSpec
from monogp.io import (
    EnsembleSnapshot,
    RunConfig,
    SnapshotVersionError,
    canonical_json,
    load_dataset,
    load_snapshot,
    save_snapshot,
)


@pytest.fixture()
def example1_csv(tmp_path):
    path = tmp_path / "example1.csv"
    lines = ["x,y"]
    for x in EXAMPLE1_DESIGN:
        lines.append(f"{x},{example1_fn(x)}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def tiny_fit():
    X = np.array([0.0, 0.3, 0.6, 1.0])[:, None]
    data = Dataset(X, np.array([0.0, 0.8, 1.4, 2.0]))
    spec = DerivativeSpec((0,), (np.array([[0.45], [0.8]]),), (1,))
    xstar = np.array([[0.5]])
    cfg = ExperimentConfig(n_particles=10, burnin=10, thin=1, seed=2,
                           tau_final=10.0)
    return fit_models(data, spec, xstar, cfg)


class TestCanonicalJson:
    def test_floats_at_17_digits_roundtrip(self):
        vals = [0.1, 1.0 / 3.0, 1e-300, math.pi, -2.5e17]
        text = canonical_json(vals)
        parsed = json.loads(text)
        assert parsed == vals  # bit-exact float round-trip
        assert canonical_json(parsed) == text

    def test_fixed_field_order(self):
        assert canonical_json({"b": 1, "a": 2}) == '{"b":1,"a":2}'

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            canonical_json([math.inf])


class TestLoadDataset:
    def test_example1_fixture(self, example1_csv):
        ds = load_dataset(example1_csv)
        assert ds.n == 7 and ds.ndim == 1
        np.testing.assert_allclose(ds.X[:, 0], EXAMPLE1_DESIGN)

    def test_empty_data_section(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("x,y\n")
        with pytest.raises(ValueError, match="no data rows"):
            load_dataset(path)

    def test_duplicate_row_error_lists_rows(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("x,y\n0.1,1.0\n0.1,1.5\n0.3,2.0\n")
        with pytest.raises(ValueError, match=r"duplicated.*\[0, 1\]"):
            load_dataset(path)

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n0.1,1.0\n0.2,oops\n")
        with pytest.raises(ValueError, match=":3:"):
            load_dataset(path)

    def test_nonfinite_rejected(self, tmp_path):
        path = tmp_path / "inf.csv"
        path.write_text("x,y\n0.1,inf\n")
        with pytest.raises(ValueError, match="non-finite"):
            load_dataset(path)


class TestSnapshotRoundTrip:
    def test_field_for_field_equality(self, tmp_path, tiny_fit):
        config = RunConfig()
        snap = EnsembleSnapshot.from_fit(config, tiny_fit)
        path = save_snapshot(snap, tmp_path / "snap.json")
        again = load_snapshot(path)
        ens_a, ens_b = snap.ensemble, again.ensemble
        np.testing.assert_array_equal(ens_a.lengthscales, ens_b.lengthscales)
        np.testing.assert_array_equal(ens_a.variances, ens_b.variances)
        np.testing.assert_array_equal(ens_a.ystar, ens_b.ystar)
        np.testing.assert_array_equal(ens_a.yprime, ens_b.yprime)
        np.testing.assert_array_equal(ens_a.logweights, ens_b.logweights)
        assert (ens_a.t_index, ens_a.seed) == (ens_b.t_index, ens_b.seed)
        assert again.taus == snap.taus
        assert again.config_digest == snap.config_digest
        data_a, spec_a, xstar_a, _, _ = snap.problem_objects()
        data_b, spec_b, xstar_b, _, _ = again.problem_objects()
        np.testing.assert_array_equal(data_a.X, data_b.X)
        np.testing.assert_array_equal(data_a.y, data_b.y)
        assert spec_a.dims == spec_b.dims
        np.testing.assert_array_equal(xstar_a, xstar_b)

    def test_truncated_file_raises_parse_error(self, tmp_path, tiny_fit):
        snap = EnsembleSnapshot.from_fit(RunConfig(), tiny_fit)
        path = save_snapshot(snap, tmp_path / "snap.json")
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(json.JSONDecodeError):
            load_snapshot(path)

    def test_corruption_detected_by_checksum(self, tmp_path, tiny_fit):
        snap = EnsembleSnapshot.from_fit(RunConfig(), tiny_fit)
        path = save_snapshot(snap, tmp_path / "snap.json")
        doc = json.loads(path.read_text())
        doc["payload"]["ensemble"]["variances"][0] += 1.0
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="checksum"):
            load_snapshot(path)

    def test_version_mismatch_is_migration_error(self, tmp_path, tiny_fit):
        snap = EnsembleSnapshot.from_fit(RunConfig(), tiny_fit)
        path = save_snapshot(snap, tmp_path / "snap.json")
        doc = json.loads(path.read_text())
        doc["payload"]["version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(SnapshotVersionError):
            load_snapshot(path)

    def test_digest_mismatch_warns(self, tmp_path, tiny_fit):
        snap = EnsembleSnapshot.from_fit(RunConfig(), tiny_fit)
        path = save_snapshot(snap, tmp_path / "snap.json")
        with pytest.warns(UserWarning, match="digest"):
            load_snapshot(path, expect_config_digest="deadbeef")


class TestRunConfig:
    def test_yaml_roundtrip_and_digest(self, tmp_path, example1_csv):
        cfg_path = tmp_path / "run.yaml"
        cfg_path.write_text(f"""
data:
  path: {example1_csv}
monotonicity:
  dims: [0]
  directions: [1]
derivatives:
  strategy: gap_grid
  lo: 0.4
  hi: 0.9
  count: 10
prediction:
  grid_count: 25
sampler:
  n_particles: 50
  burnin: 20
  thin: 1
  seed: 3
  tau_final: 100.0
""")
        config = RunConfig.from_yaml(cfg_path)
        assert config.sampler.n_particles == 50
        assert config.monotone_dims == (0,)
        data, spec, xstar = config.build_problem()
        assert data.n == 7
        assert spec.total_points == 10
        assert xstar.shape == (25, 1)
        assert config.digest() == RunConfig.from_yaml(cfg_path).digest()

    def test_missing_data_file_raises(self, tmp_path):
        cfg_path = tmp_path / "run.yaml"
        cfg_path.write_text("data:\n  path: definitely_missing.csv\n")
        with pytest.raises(FileNotFoundError, match="definitely_missing"):
            RunConfig.from_yaml(cfg_path)


class TestCLI:
    def test_no_arguments_usage_exit_1(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag_exit_1(self, capsys):
        assert main(["example1", "--definitely-not-a-flag"]) == 1

    def test_fit_missing_data_file_exit_1(self, tmp_path, capsys):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("data:\n  path: nope.csv\n")
        code = main(["fit", "--config", str(cfg), "--out", str(tmp_path / "s.json")])
        assert code == 1
        assert "nope.csv" in capsys.readouterr().err

    def test_example1_smoke_writes_reports(self, tmp_path, capsys):
        code = main(["example1", "--n-particles", "60", "--seed", "7",
                     "--out-dir", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "example1" in out
        for name in ["example1_report.json", "example1_curves_monotone.csv",
                     "example1_curves_unconstrained.csv", "example1_trace.jsonl",
                     "example1_metrics.csv"]:
            assert (tmp_path / name).exists()
        report = json.loads((tmp_path / "example1_report.json").read_text())
        assert set(report["methods"]) == {"unconstrained", "monotone"}

    def test_fit_then_predict_pipeline(self, tmp_path, example1_csv, capsys):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(f"""
data:
  path: {example1_csv}
monotonicity:
  dims: [0]
derivatives:
  strategy: gap_grid
  lo: 0.4
  hi: 0.9
  count: 5
prediction:
  grid_count: 8
sampler:
  n_particles: 40
  burnin: 30
  thin: 1
  tau_final: 1000.0
""")
        snap = tmp_path / "snap.json"
        assert main(["fit", "--config", str(cfg), "--out", str(snap)]) == 0
        pts = tmp_path / "newpoints.csv"
        pts.write_text("x\n0.5\n0.65\n0.75\n")
        out_csv = tmp_path / "pred.csv"
        assert main(["predict", "--snapshot", str(snap), "--points", str(pts),
                     "--out", str(out_csv), "--config", str(cfg)]) == 0
        rows = out_csv.read_text().strip().splitlines()
        assert rows[0] == "x,mean,q025,q975"
        assert len(rows) == 4
        # predictions should roughly track the increasing truth
        means = [float(r.split(",")[1]) for r in rows[1:]]
        assert means[0] < means[-1]

    def test_design_derivs_gap_grid(self, tmp_path):
        out = tmp_path / "plan.json"
        assert main(["design-derivs", "--strategy", "gap-grid", "--lo", "0.4",
                     "--hi", "0.9", "--count", "10", "--out", str(out)]) == 0
        plan = json.loads(out.read_text())
        assert plan["strategy"] == "gap_grid"
        assert plan["options"]["count"] == 10

    def test_design_derivs_needs_bounds(self, capsys):
        assert main(["design-derivs", "--strategy", "gap-grid",
                     "--out", "/tmp/x.json"]) == 1
