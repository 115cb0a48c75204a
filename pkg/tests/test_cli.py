import csv
import json
import subprocess
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest
import yaml

from hglfr.cli import main
from hglfr.io import read_edgelist
from oracles import TOY_OMEGA

SMALL = {"N": 300, "avg_degree": 10, "k_max": 30, "tau1": 2.5, "tau2": 1.5, "c_min": 20, "c_max": 60}


def write_config(tmp_path, name="run.yaml", **kw):
    doc = {"schema": "hglfr-config/1", "seed": 3, "realizations": 2, "generator": SMALL}
    doc.update(kw)
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def snapshot(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(Path(root).rglob("*")) if p.is_file()}


# -- generate


def test_generate_benchmark_row(tmp_path):
    cfg = tmp_path / "bench.yaml"
    cfg.write_text(yaml.safe_dump({"realizations": 1, "cells": [{"mode": "LFR", "mu": 0.05}]}))
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
    net = tmp_path / "out" / "c000_r0000"
    meta = json.loads((net / "metadata.json").read_text())
    assert meta["nodes"] == 1000
    g, _ = read_edgelist(net / "edges.txt")
    assert g.node_count == 1000
    for key in ("achieved_mu", "D", "dropped_stubs", "seed"):
        assert key in meta
    assert abs(meta["achieved_mu"] - 0.05) < 0.03


def test_generate_deterministic(tmp_path):
    cfg = write_config(tmp_path, cells=[{"mode": "HGLFR", "parametrization": "Medium"}, {"mode": "GLFR", "mu": 0.3, "delta_mu": 0.1}])
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    a, b = snapshot(tmp_path / "a"), snapshot(tmp_path / "b")
    assert a == b and len(a) > 4
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "c"), "--seed", "4"]) == 0
    assert snapshot(tmp_path / "c")["c000_r0000/edges.txt"] != a["c000_r0000/edges.txt"]


def test_generate_hglfr_without_hierarchy_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, cells=[{"mode": "HGLFR"}])
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "cells[0]" in capsys.readouterr().err


def test_generate_failure_exit_code(tmp_path):
    # communities too small for the internal degree of the hubs
    gen = dict(SMALL, c_min=5, c_max=5, k_max=40, avg_degree=30)
    cfg = write_config(tmp_path, generator=gen, realizations=1, cells=[{"mode": "LFR", "mu": 0.05}])
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    fails = read_csv(tmp_path / "o" / "failures.csv")
    assert fails and fails[0]["seed"]


def test_missing_config_exit_code(tmp_path):
    assert main(["generate", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == 2


def test_argparse_usage_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


# -- analyze


def write_omega(path, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(range(len(values)))
        w.writerows(values)
    return path


def test_analyze_toy_matrix(tmp_path):
    path = write_omega(tmp_path / "toy.csv", TOY_OMEGA)
    assert main(["analyze", "--omega", str(path), "--out", str(tmp_path / "o")]) == 0
    (row,) = read_csv(tmp_path / "o" / "analysis.csv")
    assert float(row["lower"]) == 1.75 and float(row["upper"]) == 1.36
    assert abs(float(row["D"]) + 0.39) < 1e-12


def test_analyze_cliques_and_single_community(tmp_path, capsys):
    edges = tmp_path / "cliques.txt"
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    edges.write_text("".join(f"{a} {b}\n{a + 4} {b + 4}\n" for a, b in pairs))
    two = tmp_path / "two.tsv"
    two.write_text("".join(f"{v}\t{v // 4}\n" for v in range(8)))
    one = tmp_path / "one.tsv"
    one.write_text("".join(f"{v}\t0\n" for v in range(8)))
    assert main(["analyze", "--edges", str(edges), "--partition", str(two), "--partition", str(one)]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert float(rows[0]["D"]) == 2.0 and float(rows[0]["mu"]) == 0.0
    assert rows[1]["D"] == "undefined" and rows[1]["lower"] == "undefined"
    assert float(rows[1]["Q"]) == pytest.approx(0.0)


def test_analyze_mismatch_is_validation_error(tmp_path):
    edges = tmp_path / "e.txt"
    edges.write_text("0 1\n1 2\n")
    part = tmp_path / "p.tsv"
    part.write_text("0\t0\n1\t0\n")
    assert main(["analyze", "--edges", str(edges), "--partition", str(part)]) == 4


def test_analyze_network_dir_writes_omega(tmp_path):
    cfg = write_config(tmp_path, realizations=1, cells=[{"mode": "HGLFR", "L": 2, "mu_levels": [0.3, 0.05]}])
    main(["generate", "--config", str(cfg), "--out", str(tmp_path / "g")])
    net = tmp_path / "g" / "c000_r0000"
    assert main(["analyze", str(net), "--out", str(tmp_path / "a")]) == 0
    rows = read_csv(tmp_path / "a" / "analysis.csv")
    assert [r["level"] for r in rows] == ["0", "1", "2"]
    assert rows[-1]["D"] == "undefined"
    meta = json.loads((net / "metadata.json").read_text())
    assert float(rows[0]["D"]) == meta["D"]
    # the written Omega file re-analyzes to the same window
    assert main(["analyze", "--omega", str(tmp_path / "a" / "omega_c000_r0000_l0.csv"), "--out", str(tmp_path / "b")]) == 0
    assert float(read_csv(tmp_path / "b" / "analysis.csv")[0]["D"]) == meta["D"]


# -- detect


@pytest.fixture(scope="module")
def lfr_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("lfr")
    cfg = root / "cfg.yaml"
    cfg.write_text(yaml.safe_dump({"realizations": 2, "seed": 1, "cells": [{"mode": "LFR", "mu": [0.05, 0.95]}]}))
    assert main(["generate", "--config", str(cfg), "--out", str(root / "nets")]) == 0
    return root / "nets"


def test_detect_low_and_high_mixing(lfr_dirs, tmp_path):
    low = [str(lfr_dirs / f"c000_r000{r}") for r in range(2)]
    high = [str(lfr_dirs / f"c001_r000{r}") for r in range(2)]
    assert main(["detect", *low, "--methods", "lp,mod", "--seeds", "0,1", "--out", str(tmp_path / "lo")]) == 0
    assert main(["detect", *high, "--methods", "mod", "--out", str(tmp_path / "hi")]) == 0
    by_method = defaultdict(list)
    for row in read_csv(tmp_path / "lo" / "detect.csv"):
        by_method[row["method"]].append(float(row["nmi"]))
    assert set(by_method) == {"label_propagation", "modularity"}
    assert all(np.mean(v) >= 0.95 for v in by_method.values())
    assert np.mean([float(r["nmi"]) for r in read_csv(tmp_path / "hi" / "detect.csv")]) < 0.2


def test_detect_summary_round_trip(lfr_dirs, tmp_path):
    nets = [str(lfr_dirs / "c000_r0000"), str(lfr_dirs / "c001_r0000")]
    assert main(["detect", *nets, "--methods", "mod", "--gammas", "0.5,1", "--seeds", "0,1,2", "--out", str(tmp_path)]) == 0
    groups = defaultdict(list)
    for row in read_csv(tmp_path / "detect.csv"):
        groups[(row["network_id"], row["method"], row["gamma"])].append(float(row["nmi"]))
    summary = read_csv(tmp_path / "detect_summary.csv")
    assert len(summary) == 4
    for row in summary:
        values = groups[(row["network_id"], row["method"], row["gamma"])]
        assert int(row["runs"]) == len(values) == 3
        assert float(row["mean_nmi"]) == float(np.mean(values))


def test_detect_lp_with_empty_gammas(lfr_dirs, tmp_path):
    assert main(["detect", str(lfr_dirs / "c000_r0000"), "--methods", "lp", "--gammas", "", "--out", str(tmp_path)]) == 0
    (row,) = read_csv(tmp_path / "detect.csv")
    assert row["gamma"] == "" and row["method"] == "label_propagation"


def test_detect_usage_errors(lfr_dirs, tmp_path):
    net = str(lfr_dirs / "c000_r0000")
    assert main(["detect", net, "--methods", "infomap", "--out", str(tmp_path)]) == 2
    assert main(["detect", net, "--methods", "mod", "--gammas", "", "--out", str(tmp_path)]) == 2


# -- sweep


def test_sweep_flat_network_is_validation_error(lfr_dirs, tmp_path):
    assert main(["sweep", str(lfr_dirs / "c000_r0000"), "--out", str(tmp_path)]) == 4


def test_sweep_single_point_grid(tmp_path):
    cfg = write_config(tmp_path, realizations=1, cells=[{"mode": "HGLFR", "parametrization": "Low"}])
    main(["generate", "--config", str(cfg), "--out", str(tmp_path / "g")])
    net = tmp_path / "g" / "c000_r0000"
    n_levels = len(list(net.glob("partition_l*.tsv")))
    assert main(["sweep", str(net), "--gamma-grid", "1:1:1:lin", "--out", str(tmp_path / "s")]) == 0
    rows = read_csv(tmp_path / "s" / "sweep.csv")
    assert len(rows) == n_levels
    assert sorted(r["partition_id"] for r in rows) == [str(i) for i in range(n_levels)]
    assert sum(r["is_argmax"] == "1" for r in rows) == 1
    assert main(["sweep", str(net), "--gamma-grid", "bad", "--out", str(tmp_path / "s")]) == 2


# -- batch


def test_batch_zero_realizations(tmp_path):
    cfg = write_config(tmp_path, realizations=0, cells=[{"mode": "LFR", "mu": 0.1}])
    assert main(["batch", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    files = sorted((tmp_path / "o").glob("*.csv"))
    assert len(files) == 10
    for f in files:
        lines = f.read_text().splitlines()
        assert len(lines) == 1 and lines[0]


def test_batch_outputs_and_determinism(tmp_path):
    cfg = write_config(
        tmp_path,
        realizations=2,
        cells=[
            {"mode": "LFR", "mu": 0.1},
            {"mode": "HGLFR", "L": 2, "mu_levels": [0.3, 0.03], "delta_levels": [0.03, 0.01]},
            {"mode": "HGLFR", "parametrization": "High"},
        ],
        analysis={"methods": ["mod"], "gammas": [1.0], "detect_seeds": 2, "gamma_grid": "0.1:10:20:log"},
    )
    assert main(["batch", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["batch", "--config", str(cfg), "--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")
    window = read_csv(tmp_path / "a" / "window.csv")
    assert list(window[0]) == ["network_id", "generator", "label", "mu", "min_omega_ii", "D"]
    assert len(read_csv(tmp_path / "a" / "networks.csv")) == 6
    # summary means reproduce exactly from the per-run rows
    groups = defaultdict(list)
    for row in read_csv(tmp_path / "a" / "detection_by_mu.csv"):
        groups[(row["generator"], row["mu_bin"], row["method"], row["gamma"])].append(float(row["nmi"]))
    for row in read_csv(tmp_path / "a" / "detection_by_mu_summary.csv"):
        values = groups[(row["generator"], row["mu_bin"], row["method"], row["gamma"])]
        assert float(row["mean_nmi"]) == float(np.mean(values)) and int(row["n"]) == len(values)
    # degree histogram totals equal N per realization
    degree_rows = read_csv(tmp_path / "a" / "degree_distribution.csv")
    assert sum(int(r["target_count"]) for r in degree_rows if r["generator"] == "LFR") == 2 * SMALL["N"]


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "hglfr.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "hglfr" in out.stdout
