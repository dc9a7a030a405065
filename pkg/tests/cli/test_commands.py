"""End-to-end tests of the subcommands through the exit-code wrapper."""

import json

import polars as pl
import pytest

from chemostat_qsd import __version__
from chemostat_qsd.cli.main import run

MODEL = """\
model:
  D: 1.0
  s_in: 2.0
  k: 1.0
  growth:
    kind: linear
    c: {c}
"""

FLOW = """\
flow:
  ells: [0, 1, 2]
  s0_values: [0.1, 1.5]
  horizon: 2.0
  points: 21
  equilibria_max: 5
"""

SIMULATE = """\
seed: 7
replicas: 200
simulate:
  x0: 1
  s0: 0.1
  horizon: 2.0
  save_paths: 3
  check_times: [0.5, 1.0]
  first_event_deltas: [0.1, 0.5]
"""


QSD = """\
seed: 11
replicas: 10000
qsd:
  method: both
  t: 10.0
  particles: 500
  s_bins: 8
  lambda_times: [2.0, 4.0, 6.0, 8.0, 10.0]
  yaglom: true
  yaglom_starts: [[1, 0.1], [4, 0.45]]
  yaglom_times: [2.0, 10.0]
"""

BOUNDS = """\
seed: 12
replicas: 2000
bounds:
  bd_n_max: 3
  bd_ell_max: 2
  exp_moment_t_cap: 50.0
"""


@pytest.fixture
def make_config(tmp_path):
    def make(*blocks, c=3.0):
        path = tmp_path / "run.yaml"
        path.write_text(MODEL.format(c=c) + "".join(blocks))
        return path

    return make


def read_manifest(run_dir):
    return json.loads((run_dir / "manifest.json").read_text())


class TestExitCodes:
    """Test the mapping from failures to exit codes."""

    def test_version(self, capsys):
        """Test that --version succeeds."""
        assert run(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_missing_config_file(self, tmp_path):
        """Test that a nonexistent config file exits with 1."""
        code = run(["--config", str(tmp_path / "absent.yaml"), "flow"])

        assert code == 1

    def test_invalid_config(self, make_config, tmp_path):
        """Test that an invalid config exits with 1 and writes nothing."""
        path = make_config("flow:\n  horizon: -1.0\n")

        code = run(["--config", str(path), "--out", str(tmp_path / "runs"), "flow"])

        assert code == 1
        assert not (tmp_path / "runs").exists()

    def test_subcommand_needs_config(self, tmp_path):
        """Test that a modelling subcommand without --config exits with 1."""
        assert run(["--out", str(tmp_path), "flow"]) == 1

    def test_stochastic_subcommand_needs_seed(self, make_config, tmp_path):
        """Test that simulate without any seed exits with 1."""
        path = make_config("simulate:\n  horizon: 1.0\n")

        code = run(["--config", str(path), "--out", str(tmp_path), "simulate"])

        assert code == 1

    def test_unknown_option(self):
        """Test that click usage errors exit with 1."""
        assert run(["--no-such-option"]) == 1

    def test_naive_estimator_precondition(self, make_config, tmp_path):
        """Test that fewer than 1000 paths for the naive QSD exits with 1."""
        path = make_config("seed: 1\nreplicas: 200\nqsd:\n  method: naive\n")

        code = run(["--config", str(path), "--out", str(tmp_path), "qsd"])

        assert code == 1

    @pytest.mark.slow
    def test_too_few_survivors(self, make_config, tmp_path):
        """Test that a subcritical model without survivors exits with 2."""
        path = make_config(
            "seed: 1\nreplicas: 1000\nqsd:\n  method: naive\n  t: 20.0\n", c=0.4
        )

        code = run(
            ["--config", str(path), "--out", str(tmp_path), "--threads", "1", "qsd"]
        )

        assert code == 2


class TestFlowCommand:
    """Test the deterministic flow subcommand."""

    def test_outputs_and_checks(self, make_config, tmp_path):
        """Test that flow writes its tables and passes its checks."""
        path = make_config(FLOW)
        out = tmp_path / "runs"

        assert run(["--config", str(path), "--out", str(out), "flow"]) == 0

        run_dir = out / "flow"
        manifest = read_manifest(run_dir)
        assert set(manifest["outputs"]) == {
            "validation.json",
            "equilibria.csv",
            "flow_curves.csv",
            "inverse_times.csv",
        }
        assert manifest["subcommand"] == "flow"
        assert manifest["config"]["flow"]["ells"] == [0, 1, 2]
        assert manifest["passed"] is True
        names = {check["check"] for check in manifest["checks"]}
        assert "linear equilibria closed form" in names

        equilibria = pl.read_csv(run_dir / "equilibria.csv")
        assert equilibria.height == 5
        curves = pl.read_csv(run_dir / "flow_curves.csv")
        assert curves.height == 3 * 2 * 21

    def test_outputs_are_deterministic(self, make_config, tmp_path):
        """Test that two flow runs write identical files."""
        path = make_config(FLOW)
        for name in ("a", "b"):
            run(["--config", str(path), "--out", str(tmp_path / name), "flow"])

        first = read_manifest(tmp_path / "a" / "flow")["outputs"]
        second = read_manifest(tmp_path / "b" / "flow")["outputs"]
        assert first == second

    def test_log_file_tags_records(self, make_config, tmp_path):
        """Test that --log-file records carry the subcommand label."""
        log_file = tmp_path / "flow.log"
        path = make_config(FLOW)

        run(
            [
                "--config",
                str(path),
                "--out",
                str(tmp_path / "runs"),
                "--log-file",
                str(log_file),
                "flow",
            ]
        )

        assert "| flow | " in log_file.read_text()


class TestSimulateCommand:
    """Test the simulate subcommand."""

    @pytest.mark.integration
    def test_seed_reproduces_outputs(self, make_config, tmp_path):
        """Test that the same seed gives byte-identical outputs across workers."""
        path = make_config(SIMULATE)
        codes = [
            run(
                [
                    "--config",
                    str(path),
                    "--out",
                    str(tmp_path / f"w{threads}"),
                    "--threads",
                    str(threads),
                    "simulate",
                ]
            )
            for threads in (1, 2)
        ]

        assert codes == [0, 0]
        first = read_manifest(tmp_path / "w1" / "simulate")
        second = read_manifest(tmp_path / "w2" / "simulate")
        assert first["outputs"] == second["outputs"]
        assert len(first["checks"]) > 0

        trajectories = pl.read_csv(tmp_path / "w1" / "simulate" / "trajectories.csv")
        assert set(trajectories["path"].unique().to_list()) == {0, 1, 2}

    @pytest.mark.integration
    def test_seed_override_changes_outputs(self, make_config, tmp_path):
        """Test that --seed replaces the file seed."""
        path = make_config(SIMULATE)
        for name, seed in (("a", "7"), ("b", "8")):
            out = tmp_path / name
            run(["--config", str(path), "--out", str(out), "--seed", seed, "simulate"])

        first = read_manifest(tmp_path / "a" / "simulate")
        second = read_manifest(tmp_path / "b" / "simulate")
        assert first["config"]["seed"] == 7
        assert second["config"]["seed"] == 8
        assert first["outputs"]["summary.json"] != second["outputs"]["summary.json"]


class TestReportCommand:
    """Test aggregation of earlier runs."""

    def test_summarizes_runs(self, make_config, tmp_path):
        """Test that report lists every run and its checks."""
        out = tmp_path / "runs"
        run(["--config", str(make_config(FLOW)), "--out", str(out), "flow"])

        assert run(["--out", str(out), "report", str(out)]) == 0

        summary = json.loads((out / "report" / "summary.json").read_text())
        assert summary["subcommands"] == ["flow"]
        assert summary["passed"] is True
        assert summary["runs"][0]["modified_outputs"] == []
        assert all(c["check"].startswith("flow: ") for c in summary["checks"])
        assert (out / "report" / "summary.md").exists()

    def test_flags_modified_outputs(self, make_config, tmp_path):
        """Test that outputs edited after the run are reported."""
        out = tmp_path / "runs"
        run(["--config", str(make_config(FLOW)), "--out", str(out), "flow"])
        (out / "flow" / "equilibria.csv").write_text("edited\n")

        run(["--out", str(out), "report", str(out)])

        summary = json.loads((out / "report" / "summary.json").read_text())
        assert summary["runs"][0]["modified_outputs"] == ["equilibria.csv"]

    def test_empty_directory(self, tmp_path):
        """Test that a directory without manifests exits with 1."""
        empty = tmp_path / "empty"
        empty.mkdir()

        assert run(["--out", str(tmp_path / "out"), "report", str(empty)]) == 1


@pytest.mark.slow
class TestQsdCommand:
    """Test the qsd subcommand on the Linear reference model."""

    def test_outputs_and_checks(self, make_config, tmp_path):
        """Test that qsd writes every table and certifies 0 < lambda <= D."""
        out = tmp_path / "runs"

        assert run(["--config", str(make_config(QSD)), "--out", str(out), "qsd"]) == 0

        run_dir = out / "qsd"
        manifest = read_manifest(run_dir)
        assert {
            "qsd_naive.csv",
            "qsd_fleming_viot.csv",
            "particles.csv",
            "yaglom.csv",
            "summary.json",
        } <= set(manifest["outputs"])
        checks = {check["check"]: check for check in manifest["checks"]}
        assert checks["0 < lambda <= D (survival)"]["passed"] is True
        assert checks["0 < lambda <= D (fleming_viot)"]["passed"] is True
        assert "QSD fixed point" in checks
        assert "naive and Fleming-Viot QSD agree" in checks
        assert "Yaglom convergence 1,0.1 vs 4,0.45" in checks

        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["fixed_point"]["paths"] >= 10_000
        assert 0 < summary["lambda"]["survival"]["lambda_hat"] <= 1.0
        assert summary["h"]["value"] > 0
        yaglom = pl.read_csv(run_dir / "yaglom.csv")
        assert yaglom["t"].to_list() == [2.0, 10.0]


@pytest.mark.slow
class TestBoundsCommand:
    """Test the bounds subcommand on the Linear reference model."""

    def test_outputs_and_checks(self, make_config, tmp_path):
        """Test that bounds writes its tables and agrees with uniformization."""
        out = tmp_path / "runs"

        code = run(["--config", str(make_config(BOUNDS)), "--out", str(out), "bounds"])

        assert code == 0
        run_dir = out / "bounds"
        manifest = read_manifest(run_dir)
        assert {
            "birth_death.csv",
            "small_set.json",
            "small_set_mc.csv",
            "moments.json",
        } <= set(manifest["outputs"])
        checks = {check["check"]: check for check in manifest["checks"]}
        assert checks["birth-death quadrature vs uniformization"]["passed"] is True
        assert "birth-death quadrature vs Monte Carlo" in checks
        assert "small set minorization" in checks
        assert "E[1/S_t] bound" in checks

        table = pl.read_csv(run_dir / "birth_death.csv")
        # births: 3 sizes x 2 ells; deaths also need ell <= n
        assert table.height == 6 + 5
