import pytest

from banditeval import load_dataset, load_model
from banditeval.cli import main
from banditeval.dataio import save_dataset

from conftest import make_dataset


def run(args):
    return main([str(a) for a in args])


@pytest.fixture()
def generated(tmp_path):
    model_path = tmp_path / "model.txt"
    data_path = tmp_path / "log.txt"
    code = run(["generate", "--T", 800, "--seed", 3,
                "--model-out", model_path, "--data-out", data_path])
    assert code == 0
    return model_path, data_path


class TestGenerate:
    def test_emits_model_and_data(self, generated):
        model_path, data_path = generated
        model = load_model(model_path)
        data = load_dataset(data_path)
        assert len(data) == 800
        assert model.q.shape == (10,)

    def test_deterministic_for_seed(self, tmp_path):
        paths = []
        for tag in ("a", "b"):
            mp, dp = tmp_path / f"m{tag}.txt", tmp_path / f"d{tag}.txt"
            assert run(["generate", "--T", 50, "--seed", 9,
                        "--model-out", mp, "--data-out", dp]) == 0
            paths.append((mp.read_bytes(), dp.read_bytes()))
        assert paths[0] == paths[1]

    def test_multipool(self, tmp_path):
        dp = tmp_path / "pooled.txt"
        assert run(["generate", "--multipool", "--segments", 3, "--segment-len", 40,
                    "--pool-size", 4, "--seed", 1, "--data-out", dp]) == 0
        ds = load_dataset(dp)
        assert len(ds) == 120 and ds.pools is not None


class TestReplayCommand:
    def test_summary_and_trace(self, generated, tmp_path, capsys):
        _, data_path = generated
        trace = tmp_path / "trace.txt"
        code = run(["replay", "--data", data_path, "--algo", "ucb", "alpha=1",
                    "--seed", 5, "--trace", trace])
        assert code == 0
        out = capsys.readouterr().out
        assert "g_hat=" in out and "accepted=" in out
        indices = [int(line) for line in trace.read_text().split()]
        assert indices == sorted(indices)

    def test_permutations(self, generated, capsys):
        _, data_path = generated
        assert run(["replay", "--data", data_path, "--algo", "random",
                    "--seed", 5, "--permutations", 5]) == 0
        assert "std_err=" in capsys.readouterr().out

    def test_evaluator_error_exit_code(self, tmp_path, capsys):
        ds = make_dataset([1, 1], [1, 1], k=2)
        path = tmp_path / "log.txt"
        save_dataset(ds, path)
        code = run(["replay", "--data", path, "--algo", "fixed", "action=0",
                    "--seed", 1])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_usage_error_exit_code(self, generated):
        _, data_path = generated
        with pytest.raises(SystemExit) as exc:
            run(["replay", "--data", data_path, "--algo", "nosuch", "--seed", 1])
        assert exc.value.code == 2


class TestBredCommand:
    def test_summary_and_replicates_csv(self, generated, tmp_path, capsys):
        _, data_path = generated
        reps = tmp_path / "reps.csv"
        code = run(["bred", "--data", data_path, "--algo", "linucb", "alpha=1",
                    "--B", 8, "--seed", 2, "--replicates-csv", reps])
        assert code == 0
        out = capsys.readouterr().out
        assert "g_hat=" in out and "lo=" in out
        lines = reps.read_text().splitlines()
        assert lines[0] == "b,g_b,T_b"
        assert len(lines) == 9

    def test_jitter_flag_values(self, generated):
        _, data_path = generated
        for flag in ("auto", "none", "0.25"):
            assert run(["bred", "--data", data_path, "--algo", "ucb", "alpha=1",
                        "--B", 3, "--jitter", flag, "--seed", 2]) == 0
        with pytest.raises(SystemExit) as exc:
            run(["bred", "--data", data_path, "--algo", "ucb", "alpha=1",
                 "--jitter", "sometimes", "--seed", 2])
        assert exc.value.code == 2


class TestGroundTruthCommand:
    def test_runs(self, generated, capsys):
        model_path, _ = generated
        assert run(["ground-truth", "--model", model_path, "--algo", "fixed",
                    "action=0", "--T", 200, "--runs", 10, "--seed", 4]) == 0
        assert "g=" in capsys.readouterr().out


class TestSweepAndPlot:
    def test_end_to_end(self, generated, tmp_path, capsys):
        model_path, _ = generated
        long_path, agg_path = tmp_path / "long.csv", tmp_path / "agg.csv"
        code = run(["sweep", "--model", model_path, "--algo", "ucb", "alpha=1",
                    "--sizes", "200,400", "--seeds", 2, "--B", 4,
                    "--truth-runs", 4, "--seed", 6,
                    "--out-long", long_path, "--out-agg", agg_path])
        assert code == 0
        header = long_path.read_text().splitlines()[0]
        assert header == "method,T,seed,estimate,truth,abs_error,accepted,status"
        svg = tmp_path / "plot.svg"
        assert run(["plot", "--csv", agg_path, "--out", svg]) == 0
        assert svg.stat().st_size > 0


class TestWindowedCommand:
    def test_end_to_end(self, tmp_path, capsys):
        data_path = tmp_path / "pooled.txt"
        assert run(["generate", "--multipool", "--segments", 2, "--segment-len",
                    200, "--pool-size", 4, "--seed", 7, "--data-out", data_path]) == 0
        out_path = tmp_path / "windows.csv"
        code = run(["windowed", "--data", data_path, "--algo", "ucb", "alpha=1",
                    "--permutations", 10, "--B", 5, "--seed", 8, "--out", out_path])
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0].startswith("window,t_i,k_i,truth")
        assert len(lines) == 3


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_override(self, generated, tmp_path, capsys):
        _, data_path = generated
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"data={data_path}\nalgo=ucb alpha=1\nseed=11\n# comment\n")
        assert run(["replay", "--config", cfg]) == 0
        first = capsys.readouterr().out
        # same config, seed overridden on the command line
        assert run(["replay", "--config", cfg, "--seed", 12]) == 0
        second = capsys.readouterr().out
        assert first != second

    def test_unknown_config_key_is_usage_error(self, generated, tmp_path):
        _, data_path = generated
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nonsense=1\n")
        with pytest.raises(SystemExit) as exc:
            run(["replay", "--config", cfg, "--data", data_path,
                 "--algo", "ucb", "alpha=1"])
        assert exc.value.code == 2
