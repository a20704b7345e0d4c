import csv
import io
import json

import pytest

from overlap_sbm import cli_io
from overlap_sbm.cli_io import CliConfig, main, resolve_config
from overlap_sbm.tables import read_csv


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def replica_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# --- exit codes ----------------------------------------------------------------------


def test_usage_error_exit_1(capsys, tmp_path):
    code, _, err = run(["sample", "--c1", 0, "--out", tmp_path / "g.txt"], capsys)
    assert code == cli_io.EXIT_USAGE
    msg = json.loads(err)
    assert msg["kind"] == "usage" and "c1" in msg["message"]


def test_unknown_flag_exit_1(capsys):
    code, _, err = run(["replica", "--bogus", 1], capsys)
    assert code == 1 and json.loads(err)["error"] == "UsageError"


def test_infeasible_epsilon_exit_1(capsys):
    # c2 too large for this alpha: epsilon would leave [0, 1]
    code, _, err = run(["replica", "--c1", 10, "--c2", 40, "--alpha", 0.5], capsys)
    assert code == 1 and json.loads(err)["error"] == "InfeasibleParameters"


def test_missing_graph_exit_3(capsys, tmp_path):
    code, _, err = run(["spectrum", "--graph", tmp_path / "nope.txt", "--out", tmp_path / "s.csv"], capsys)
    assert code == cli_io.EXIT_IO and json.loads(err)["kind"] == "io"


def test_missing_config_exit_3(capsys, tmp_path):
    code, _, _ = run(["--config", tmp_path / "nope.json", "replica"], capsys)
    assert code == 3


def test_numerical_failure_exit_2(capsys):
    # c1 = 1 has no bulk root: the undetectable system is singular
    code, _, err = run(["replica", "--c1", 1, "--epsilon", 0.5, "--alpha", 0.0], capsys)
    assert code == cli_io.EXIT_NUMERIC and json.loads(err)["kind"] == "numerical"


def test_sweep_records_failures_and_exits_0(capsys):
    code, out, _ = run(["replica", "--c1", 1, "--epsilon", 0.5, "--alphas", "0,0.5"], capsys)
    assert code == 0
    rows = replica_rows(out)
    assert len(rows) == 2 and all(r["note"] for r in rows)


# --- configuration --------------------------------------------------------------------


def test_config_precedence(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"c1": 6, "alpha": 0.3, "seed": 5}))
    cfg = resolve_config(["--config", str(conf), "replica", "--alpha", "0.7"])
    assert cfg.params["c1"] == 6  # file beats default
    assert cfg.params["alpha"] == 0.7  # flag beats file
    assert cfg.params["sigma"] == 2.0  # default kept
    assert cfg.seed == 5
    cfg = resolve_config(["--config", str(conf), "--seed", "9", "replica"])
    assert cfg.seed == 9


def test_config_rejects_foreign_keys(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"k": 4}))
    code, _, _ = run(["--config", conf, "replica"], capsys)
    assert code == 1


def test_config_accepts_saved_cliconfig(tmp_path):
    cfg = resolve_config(["sample", "--c1", "6", "--out", str(tmp_path / "g.txt")])
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps(cfg.to_dict()))
    again = resolve_config(["--config", str(conf), "sample"])
    assert again == cfg


def test_grid_parsing():
    assert cli_io._grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert cli_io._grid("0.1, 0.3") == [0.1, 0.3]
    with pytest.raises(cli_io.UsageError):
        cli_io._grid("0:1")


# --- subcommands ----------------------------------------------------------------------


def test_sample_spectrum_accuracy_pipeline(tmp_path, capsys):
    g = tmp_path / "g.txt"
    code, out, _ = run(["--seed", 3, "sample", "--c1", 10, "--c2", 20, "--alpha", 0.5, "--n", 1000, "--out", g], capsys)
    assert code == 0
    info = json.loads(out)
    assert info["n"] == 1000
    side = json.loads(open(info["sidecar"]).read())
    assert len(side["labels"]) == 1000 and side["seed"] == 3
    assert CliConfig.from_dict(side["config"]).params["c2"] == 20

    code, out, _ = run(["spectrum", "--graph", g, "--k", 4, "--out", tmp_path / "s.csv", "--vector-out", tmp_path / "v.csv", "--hist-out", tmp_path / "h.csv"], capsys)
    assert code == 0
    ev = json.loads(out)["eigenvalues"]
    assert len(ev) == 4 and ev == sorted(ev, reverse=True)
    assert [r["rank"] for r in read_csv(tmp_path / "s.csv")] == [1, 2, 3, 4]
    assert len(read_csv(tmp_path / "v.csv")) == 1000
    assert sum(r["count"] for r in read_csv(tmp_path / "h.csv")) == 1000

    code, out, _ = run(["accuracy", "--graph", g], capsys)
    assert code == 0
    acc = json.loads(out)
    # c2 = 20 gives epsilon = 0: no edges between the outer blocks
    assert acc["accuracy"] > 0.9 and acc["lambda_1"] == pytest.approx(ev[0], rel=1e-6)


@pytest.mark.parametrize("argv", [
    ["--model", "canonical", "--c1", 8, "--epsilon", 0.2],
    ["--model", "microcanonical", "--c1", 8, "--epsilon", 0.2],
    ["--model", "overlap", "--ensemble", "canonical", "--c1", 10, "--c2", 18, "--alpha", 0.5],
    ["--model", "bimodal", "--c1", 10, "--c2", 18, "--alpha", 0.5, "--epsilon", 0.1667],
])
def test_sample_models(argv, tmp_path, capsys):
    code, out, _ = run(["sample", *argv, "--n", 600, "--out", tmp_path / "g.txt"], capsys)
    assert code == 0 and json.loads(out)["m"] > 0


def test_two_block_needs_numeric_epsilon(tmp_path, capsys):
    code, _, _ = run(["sample", "--model", "canonical", "--c1", 8, "--out", tmp_path / "g.txt"], capsys)
    assert code == 1


def test_microcanonical_noninteger_degree(tmp_path, capsys):
    code, _, err = run(["sample", "--c1", 10, "--c2", 18, "--alpha", 0.3, "--n", 1000, "--out", tmp_path / "g.txt", "--epsilon", 0.2], capsys)
    # epsilon given explicitly makes c2 non-integer here
    assert code == 1 and "integer" in json.loads(err)["message"]


def test_replica_single_point(capsys):
    code, out, _ = run(["replica", "--c1", 10, "--c2", 18, "--alpha", 0], capsys)
    assert code == 0
    (row,) = replica_rows(out)
    assert float(row["lambda_bulk"]) == pytest.approx(6.0, abs=1e-9)
    assert float(row["lambda_det"]) == pytest.approx(8.45, abs=1e-9)
    assert row["detectable"] == "true"


def test_replica_structureless_point_undetectable(capsys):
    code, out, _ = run(["replica", "--c1", 10, "--epsilon", 1, "--sigma", 1, "--alpha", 0.5], capsys)
    assert code == 0
    assert replica_rows(out)[0]["detectable"] == "false"


def test_replica_bimodal_and_append(tmp_path, capsys):
    path = tmp_path / "r.csv"
    for _ in range(2):
        code, _, _ = run(["replica", "--model", "bimodal", "--c1", 10, "--c2", 18, "--alphas", "0.25,0.5", "--append", path], capsys)
        assert code == 0
    rows = read_csv(path)
    assert len(rows) == 4 and all(r["model"] == "bimodal" for r in rows)
    assert all(r["lambda_det"] > r["lambda_bulk"] for r in rows)


def test_boundary(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, text, _ = run(["boundary", "--grid", "0,0.1,0.5", "--out", out], capsys)
    assert code == 0 and json.loads(text)["found"] == 2
    rows = read_csv(out)
    assert rows[0]["alpha_boundary"] == pytest.approx(0.6254, abs=1e-3)
    assert rows[2]["alpha_boundary"] is None and rows[2]["note"]


def test_experiment_rerun_byte_identical(tmp_path, capsys):
    argv = ["--seed", 4, "experiment", "eigencurve_alpha", "--n", 300, "--samples", 2, "--top-k", 3, "--alpha-step", 0.5]
    for d in ("a", "b"):
        code, out, _ = run([*argv, "--out-dir", tmp_path / d], capsys)
        assert code == 0
    assert (tmp_path / "a" / "data.csv").read_bytes() == (tmp_path / "b" / "data.csv").read_bytes()
    meta = json.loads((tmp_path / "a" / "meta.json").read_text())
    cfg = CliConfig.from_dict(meta["config"])
    assert cfg.subcommand == "experiment" and cfg.seed == 4
    assert cfg.params["plan"]["n_nodes"] == 300
    assert meta["plan"]["n_samples"] == 2 and meta["master_seed"] == 4
