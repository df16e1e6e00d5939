import numpy as np
import pytest

from respclass.cli import ConfigError, benchmark_spec, format_config, main, parse_config
from respclass.core import read_dataset, read_ground_truth, read_rows


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def sim(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    assert run("simulate", "--scenario", "linear", "--d", 2, "--n", 400, "--seed", 3, "--out", d / "data.csv") == 0
    return d


class TestConfig:
    def test_repeated_keys_and_comments(self):
        cfg = parse_config("# grid\nlearner=a\nlearner = b  # second\n\nn=10\n")
        assert cfg == {"learner": ["a", "b"], "n": ["10"]}

    def test_round_trip(self):
        items = [("learner", ["x", "y"]), ("n", 5)]
        assert parse_config(format_config(items)) == {"learner": ["x", "y"], "n": ["5"]}

    @pytest.mark.parametrize("text", ["novalue\n", "=3\n"])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_full_scale_grid(self):
        learners = ["respsvm-linear", "respsvm-rbf", "resplr-disc", "resplr-gen", "respnet-disc", "respnet-gen"]
        text = "scenario=linear\nd=2\n" + "".join(f"learner={x}\n" for x in learners)
        text += "n=1000\nn=2000\nn=4000\nreplications=100\n"
        spec = benchmark_spec(parse_config(text))
        assert spec.n_grid == (1000, 2000, 4000) and len(spec.learners) == 6 and spec.replications == 100

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            benchmark_spec(parse_config("scenario=linear\nd=2\nlearner=resplr-gen\nn=10\nreplications=1\nfoo=1\n"))


class TestSimulate:
    def test_outputs(self, sim):
        ds = read_dataset(sim / "data.csv")
        gt = read_ground_truth(sim / "data_truth.csv")
        assert ds.n == 400 and gt.X.shape == (400, 2)
        np.testing.assert_array_equal(ds.X, gt.X)
        assert "scenario=linear" in (sim / "data.csv.cfg").read_text()

    def test_deterministic(self, sim, tmp_path):
        run("simulate", "--scenario", "linear", "--d", 2, "--n", 400, "--seed", 3, "--out", tmp_path / "data.csv")
        assert (tmp_path / "data.csv").read_bytes() == (sim / "data.csv").read_bytes()
        assert (tmp_path / "data_truth.csv").read_bytes() == (sim / "data_truth.csv").read_bytes()

    def test_spherical_odd_d(self, tmp_path, capsys):
        assert run("simulate", "--scenario", "spherical", "--d", 3, "--out", tmp_path / "x.csv") == 2
        assert "spherical requires even d" in capsys.readouterr().err


class TestTrainEvaluate:
    def test_balanced_theta_logged(self, sim, tmp_path):
        from respclass.surrogate import balanced_theta
        out = tmp_path / "m.txt"
        assert run("train", "--data", sim / "data.csv", "--learner", "resplr-gen", "--theta", "balanced",
                   "--epochs", 3, "--out", out) == 0
        theta = balanced_theta(read_dataset(sim / "data.csv"))
        log = (tmp_path / "m.txt.log").read_text()
        assert f"theta {theta!r} (balanced)" in log
        assert "final training loss" in log

    def test_svm_cv_table(self, sim, tmp_path):
        out = tmp_path / "svm.txt"
        assert run("train", "--data", sim / "data.csv", "--learner", "respsvm", "--kernel", "rbf",
                   "--cv", 3, "--out", out) == 0
        log = (tmp_path / "svm.txt.log").read_text()
        assert "cv 3-fold" in log
        assert any(line.startswith("C ") for line in log.splitlines())
        assert any(line.startswith("gamma ") for line in log.splitlines())

    def test_unknown_learner(self, sim, tmp_path, capsys):
        assert run("train", "--data", sim / "data.csv", "--learner", "forest", "--out", tmp_path / "m") == 2
        assert "usage hint" in capsys.readouterr().err

    def test_constants_tie_at_balanced_theta(self, sim, tmp_path):
        vals = []
        for name in ("constant-pos", "constant-neg"):
            m = tmp_path / name
            run("train", "--data", sim / "data.csv", "--learner", name, "--out", m)
            out = tmp_path / f"{name}.csv"
            assert run("evaluate", "--model", m, "--data", sim / "data.csv", "--theta", "balanced",
                       "--out", out) == 0
            vals.append(float(read_rows(out)[0]["l_theta_hat"]))
        assert vals[0] == pytest.approx(vals[1], abs=1e-12)

    def test_bayes_accuracy_column(self, sim, tmp_path):
        m = tmp_path / "lr"
        run("train", "--data", sim / "data.csv", "--learner", "resplr-gen", "--epochs", 20, "--out", m)
        out = tmp_path / "ev.csv"
        assert run("evaluate", "--model", m, "--data", sim / "data.csv",
                   "--ground-truth", sim / "data_truth.csv", "--out", out) == 0
        row = read_rows(out)[0]
        for key in ("n", "theta", "l_theta_hat", "l_prime_hat", "fp_hat", "fn_hat", "policy_value"):
            assert key in row
        assert 0.0 <= float(row["bayes_accuracy"]) <= 1.0

    def test_dimension_mismatch(self, sim, tmp_path, capsys):
        m = tmp_path / "c"
        run("train", "--data", sim / "data.csv", "--learner", "constant-pos", "--out", m)
        run("simulate", "--scenario", "linear", "--d", 10, "--n", 50, "--out", tmp_path / "wide.csv")
        assert run("evaluate", "--model", m, "--data", tmp_path / "wide.csv", "--out", tmp_path / "e.csv") == 3
        assert "data error" in capsys.readouterr().err

    def test_train_deterministic(self, sim, tmp_path):
        for k in range(2):
            run("train", "--data", sim / "data.csv", "--learner", "respnet-disc", "--epochs", 3,
                "--seed", 9, "--out", tmp_path / f"m{k}")
        assert (tmp_path / "m0").read_bytes() == (tmp_path / "m1").read_bytes()

    def test_missing_file(self, tmp_path):
        assert run("train", "--data", tmp_path / "nope.csv", "--learner", "constant-pos", "--out",
                   tmp_path / "m") == 3


class TestBenchmark:
    CFG = "scenario=linear\nd=2\nlearner=resplr-gen\nn=200\nreplications=2\nn_test=300\nepochs=3\n"

    def _run(self, tmp_path, name):
        cfg = tmp_path / "b.cfg"
        cfg.write_text(self.CFG)
        assert run("benchmark", "--config", cfg, "--out-dir", tmp_path / name) == 0
        return tmp_path / name

    def test_rows_and_rerun(self, tmp_path):
        a, b = self._run(tmp_path, "a"), self._run(tmp_path, "b")
        reps, agg = read_rows(a / "replications.csv"), read_rows(a / "aggregate.csv")
        assert len(reps) == 2 and len(agg) == 1
        assert agg[0]["n_ok"] == "2"
        for f in ("replications.csv", "aggregate.csv", "config.cfg"):
            assert (a / f).read_bytes() == (b / f).read_bytes()

    def test_preset_accepted(self):
        from respclass.cli import build_parser
        args = build_parser().parse_args(["benchmark", "--preset", "desk", "--out-dir", "x"])
        assert args.preset == "desk"

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("scenario=linear\n")
        assert run("benchmark", "--config", cfg, "--out-dir", tmp_path / "o") == 2


class TestBootstrap:
    def test_outer_zero(self, sim, tmp_path):
        assert run("bootstrap", "--data", sim / "data.csv", "--outer", 0, "--out", tmp_path / "ci.csv") == 2

    def test_table_and_determinism(self, sim, tmp_path):
        for k in range(2):
            assert run("bootstrap", "--data", sim / "data.csv", "--outer", 20, "--inner", 5, "--seed", 4,
                       "--out", tmp_path / f"ci{k}.csv") == 0
        assert (tmp_path / "ci0.csv").read_bytes() == (tmp_path / "ci1.csv").read_bytes()
        rows = read_rows(tmp_path / "ci0.csv")
        assert [r["coefficient"] for r in rows] == ["intercept", "x1", "x2"]
        for r in rows:
            assert int(r["significant"]) == (float(r["lower"]) > 0 or float(r["upper"]) < 0)
