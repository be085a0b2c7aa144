import json
from pathlib import Path

import pytest

from handlers import gibbs as gibbs_handler
from main import EXIT_CONFIG, EXIT_INFERENCE, EXIT_OK, main

DENSITY = """
    analysis:
      kind: density
      name: fig1
    model:
      kind: normal_known
      mean: 2.7
      sigma: 1.0
      epsilon: 0.2
    inference:
      alpha: [0.03, 0.05]
      h: {a: 4, b: 4}
    output:
      grid_points: 512
"""

PDO_CURVES = """
    analysis:
      kind: pdo_curves
      name: fig3
    model:
      kind: normal_unknown
      n: 9
      mean: 2.7
      variance: 9.0
      epsilon: 0.2
    inference:
      pdo: {form: power, c: 1.0, gamma: GAMMA}
      upper_target: 0.32
      beta_grid: {start: 0.0025, stop: 0.4975, points: 40}
"""

GIBBS = """
    analysis:
      kind: gibbs
      name: fig4
      seed: 7
    model:
      kind: normal_unknown
      n: 9
      mean: 2.7
      variance: 9.0
      epsilon: 0.2
    inference:
      pdo: {form: power, c: 1.0, gamma: 0.6}
      h: {a: 4, b: 4}
    sampler:
      n_samples: 500
      burn_in: 100
      chains: 2
      scan: random
    output:
      bins: 20
"""

RELATIVE_RISK = """
    analysis:
      kind: fiducial_rr
      name: fig5
    model:
      kind: relative_risk
      events_t: 6
      n_t: 20
      events_c: 18
      n_c: 30
    output:
      range: [0.0, 2.0]
      bins: 50
      rr_samples: 20000
"""

IMPORTANCE = """
    analysis:
      kind: importance
      name: fig2_importance
    model:
      kind: binomial
      successes: 1
      trials: 10
      epsilon: 0.03
      centre: 0.5
    inference:
      alpha: 0.05
      h: {a: 4, b: 4}
    output:
      bins: 200
      range: [0.0, 0.7]
      importance_samples: 4000
"""

CONFIGS_DIR = Path(__file__).resolve().parent.parent / "configs"


def run(path, out_dir, *extra):
    return main(["run", str(path), "--out-dir", str(out_dir), *extra])


class TestRun:
    def test_density_run_writes_outputs(self, write_config, tmp_path, read_csv, read_comments):
        out = tmp_path / "out"
        assert run(write_config(DENSITY), out) == EXIT_OK

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["analysis"] == {"kind": "density", "name": "fig1"}
        assert "fig1_density_a0p05.csv" in manifest["outputs"]
        assert manifest["seeds"] == [{"seed": 20240101, "stream": 0}]

        columns = read_csv(out / "fig1_density_a0p05.csv")
        assert list(columns) == ["theta", "density"]
        assert len(columns["theta"]) >= 512
        assert "direction=upper" in read_comments(out / "fig1_density_a0p05.csv")

        summary = json.loads((out / "fig1_summary.json").read_text())
        assert summary["direction"] == "upper"
        masses = summary["densities"][1]
        assert masses["mass_inside"] == pytest.approx(0.048216, abs=2e-6)

    def test_repeat_runs_are_byte_identical(self, write_config, tmp_path):
        path = write_config(DENSITY)
        assert run(path, tmp_path / "a") == EXIT_OK
        assert run(path, tmp_path / "b") == EXIT_OK
        for name in ("fig1_density_a0p03.csv", "fig1_density_a0p05.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        manifests = [json.loads((tmp_path / d / "manifest.json").read_text()) for d in ("a", "b")]
        # the digest covers the overridden output dir
        assert manifests[0]["config_digest"] != manifests[1]["config_digest"]
        for manifest in manifests:
            del manifest["timings"], manifest["config_digest"]
        assert manifests[0] == manifests[1]

    def test_malformed_config(self, write_config, tmp_path):
        path = write_config("analysis:\n  kind: density\n  name: [oops\n")
        assert run(path, tmp_path / "out") == EXIT_CONFIG

    def test_unknown_field(self, write_config, tmp_path):
        path = write_config(DENSITY.replace("name: fig1", "name: fig1\n      colour: red"))
        assert run(path, tmp_path / "out") == EXIT_CONFIG

    def test_alpha_below_floor(self, write_config, tmp_path):
        path = write_config(DENSITY.replace("alpha: [0.03, 0.05]", "alpha: 0.001"))
        assert run(path, tmp_path / "out") == EXIT_INFERENCE

    def test_relative_risk_run(self, write_config, tmp_path, read_csv):
        out = tmp_path / "out"
        assert run(write_config(RELATIVE_RISK), out) == EXIT_OK
        columns = read_csv(out / "fig5_rr.csv")
        assert list(columns) == ["rr", "fiducial", "confidence"]
        assert len(columns["rr"]) == 50
        summary = json.loads((out / "fig5_summary.json").read_text())
        assert summary["sample_rr"] == pytest.approx(0.5)

    def test_pdo_curves_run(self, write_config, tmp_path, read_csv):
        out = tmp_path / "out"
        assert run(write_config(PDO_CURVES.replace("GAMMA", "0.6")), out) == EXIT_OK
        columns = read_csv(out / "fig3_curves.csv")
        assert {"beta", "pdo", "lower", "interval_mass", "upper"} <= set(columns)
        assert len(columns["beta"]) == 40

    def test_pdo_curve_failing_validation(self, write_config, tmp_path):
        assert run(write_config(PDO_CURVES.replace("GAMMA", "1.0")), tmp_path / "out") == EXIT_INFERENCE

    def test_gibbs_run(self, write_config, tmp_path, read_csv):
        out = tmp_path / "out"
        assert run(write_config(GIBBS), out, "--samples", "300") == EXIT_OK
        chain = read_csv(out / "fig4_chain_0.csv")
        assert list(chain) == ["mu", "sigma"]
        assert len(chain["mu"]) == 300
        assert (out / "fig4_hist_mu.csv").exists()

        summary = json.loads((out / "fig4_summary.json").read_text())
        assert set(summary["gelman_rubin"]) == {"mu", "sigma"}
        assert 0.0 <= summary["interval_mass"] <= 1.0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seeds"] == [{"seed": 7, "stream": 0}, {"seed": 7, "stream": 1}]

    def test_memoized_chains_own_their_caches(self, write_config, tmp_path, monkeypatch):
        built = []
        original = gibbs_handler.full_conditionals

        def recording(*args, **kwargs):
            conditionals = original(*args, **kwargs)
            built.append(conditionals[0])
            return conditionals

        monkeypatch.setattr(gibbs_handler, "full_conditionals", recording)
        document = GIBBS.replace("      scan: random\n", "      scan: random\n      memo: 0.05\n")
        assert run(write_config(document), tmp_path / "out", "--samples", "200") == EXIT_OK

        used = [memo for memo in built if memo.cache_size > 0]
        assert len(used) == 2
        assert used[0] is not used[1]
        summary = json.loads((tmp_path / "out" / "fig4_summary.json").read_text())
        assert all(chain["approximate"] for chain in summary["chains"])


class TestValidate:
    def test_coherent_document(self, write_config, capsys):
        assert main(["validate", str(write_config(DENSITY))]) == EXIT_OK
        assert capsys.readouterr().out.startswith("OK")

    def test_incoherent_document(self, write_config, capsys):
        path = write_config(DENSITY.replace("alpha: [0.03, 0.05]", "alpha: 0.001"))
        assert main(["validate", str(path)]) == EXIT_INFERENCE
        assert "inference.alpha" in capsys.readouterr().out

    def test_schema_error(self, write_config):
        path = write_config(DENSITY.replace("kind: density", "kind: histogram"))
        assert main(["validate", str(path)]) == EXIT_CONFIG


class TestEngineEnvironment:
    def test_bad_environment_is_a_config_error(self, write_config, tmp_path, monkeypatch):
        monkeypatch.setenv("BFI_MAX_WORKERS", "abc")
        assert run(write_config(DENSITY), tmp_path / "out") == EXIT_CONFIG


class TestImportanceRender:
    def test_small_render_is_flagged(self, write_config, tmp_path, read_csv, read_comments):
        out = tmp_path / "out"
        assert run(write_config(IMPORTANCE), out) == EXIT_OK
        table = out / "fig2_importance_importance_a0p05.csv"
        assert list(read_csv(table)) == ["theta", "weighted", "assembled"]
        assert any(c.startswith("proposal=") and "inside" in c for c in read_comments(table))

        summary = json.loads((out / "fig2_importance_summary.json").read_text())
        assert summary["gap_tolerance"] == 0.02
        assert summary["within_tolerance"] is False
        manifest = json.loads((out / "manifest.json").read_text())
        assert any("departs from the assembled density" in w for w in manifest["warnings"])

    @pytest.mark.slow
    def test_bundled_render_matches_assembly(self, tmp_path):
        out = tmp_path / "out"
        assert run(CONFIGS_DIR / "fig2_importance.yaml", out) == EXIT_OK
        summary = json.loads((out / "fig2_importance_summary.json").read_text())
        assert summary["max_binwise_gap_over_peak"] < 0.02
        assert summary["within_tolerance"] is True
