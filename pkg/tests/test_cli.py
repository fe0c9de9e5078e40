import json
import os

import pytest

from fleetopt.cli import main


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """gen-data -> train-forest -> make-history on a tiny config."""
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.json"
    config.write_text(json.dumps({
        "synth": {"seed": 9, "n_supply": 3, "n_demand": 2, "soc_levels": 3,
                  "n_days": 30},
        "train": {"n_trees": 5, "max_depth": 3, "min_samples_leaf": 4, "seed": 1},
        "bench": {"eval_days": 1, "fixed_counts": [0, 6], "repetitions": 1,
                  "queries": ["Number of pre-allocated taxis"]},
    }))
    out = root / "work"
    assert main(["--config", str(config), "gen-data", "--out", str(out)]) == 0
    assert main(["--config", str(config), "train-forest",
                 "--world", str(out / "world.json"), "--out", str(out)]) == 0
    assert main(["--config", str(config), "make-history",
                 "--world", str(out / "world.json"),
                 "--forest", str(out / "forest.json"),
                 "--m", "5", "--seed", "0", "--out", str(out)]) == 0
    return config, out


class TestCli:
    def test_gen_data_is_seed_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["gen-data", "--seed", "4", "--out", str(a)]) == 0
        assert main(["gen-data", "--seed", "4", "--out", str(b)]) == 0
        assert (a / "world.json").read_bytes() == (b / "world.json").read_bytes()

    def test_pipeline_artifacts_exist(self, pipeline):
        _, out = pipeline
        for name in ("world.json", "forest.json", "forest_metrics.json",
                     "history.json"):
            assert (out / name).exists(), name

    def test_solve_full_model(self, pipeline, capsys):
        config, out = pipeline
        code = main(["solve", "--world", str(out / "world.json"),
                     "--forest", str(out / "forest.json"), "--day", "0"])
        assert code == 0
        printed = capsys.readouterr().out
        assert '"status": "Optimal"' in printed
        assert '"decision"' in printed

    def test_agent_runs_offline(self, pipeline, capsys):
        config, out = pipeline
        code = main(["agent", "--world", str(out / "world.json"),
                     "--forest", str(out / "forest.json"),
                     "--history", str(out / "history.json"),
                     "--day", "1", "--query", "Number of pre-allocated taxis",
                     "--guide", "deterministic", "--out", str(out / "agent")])
        assert code == 0
        assert "Request:" in capsys.readouterr().out
        with open(out / "agent" / "trace.json") as fh:
            trace = json.load(fh)
        assert trace["iterations"]

    def test_query_end_to_end(self, pipeline, capsys):
        config, out = pipeline
        code = main(["query", "How can we improve the taxi service level?",
                     "--world", str(out / "world.json"),
                     "--forest", str(out / "forest.json"),
                     "--history", str(out / "history.json"), "--day", "0"])
        assert code == 0
        assert "Objective used:" in capsys.readouterr().out

    def test_bench_efficiency_writes_reports(self, pipeline):
        config, out = pipeline
        bench_out = out / "bench"
        code = main(["--config", str(config), "bench", "efficiency",
                     "--world", str(out / "world.json"),
                     "--forest", str(out / "forest.json"),
                     "--history", str(out / "history.json"),
                     "--out", str(bench_out)])
        assert code == 0
        for name in ("efficiency_report.json", "efficiency_report.csv",
                     "efficiency_report.md", "efficiency_timings.csv"):
            assert (bench_out / name).exists(), name

    def test_bench_accuracy_offline(self, pipeline):
        config, out = pipeline
        bench_out = out / "accuracy"
        code = main(["--config", str(config), "bench", "accuracy",
                     "--world", str(out / "world.json"),
                     "--forest", str(out / "forest.json"),
                     "--out", str(bench_out)])
        assert code == 0
        assert (bench_out / "accuracy_linear_report.md").exists()
        assert (bench_out / "accuracy_nonlinear_report.md").exists()

    def test_runtime_failure_exits_one(self, tmp_path, capsys):
        code = main(["solve", "--world", str(tmp_path / "missing.json"),
                     "--forest", str(tmp_path / "nope.json")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_usage_error_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "nonsense", "--world", "w", "--forest", "f",
                  "--out", "o"])
        assert exc.value.code == 2
