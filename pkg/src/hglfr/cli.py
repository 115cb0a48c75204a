"""Command-line interface.

Subcommands: ``generate``, ``analyze``, ``detect``, ``sweep`` and ``batch``.
Exit codes: 0 success, 2 configuration or usage error, 3 generation
failure, 4 analysis or validation error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import modularity, omega_matrix, resolution_window
from .config import METHOD_ALIASES, RunConfig, load_config, parse_gamma_grid
from .errors import ConfigError, GenerationError, HGLFRError, ValidationError
from .experiment import (
    d_bin,
    detect,
    fmt,
    mean_ci,
    mu_bin,
    realize,
    sweep_rows,
    window_summary,
    write_csv,
    write_network,
)
from .io import read_edgelist, read_partition

log = logging.getLogger("hglfr")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GENERATION = 3
EXIT_ANALYSIS = 4

UNDEFINED = "undefined"


class UsageError(HGLFRError):
    pass


def network_id(cell: int, r: int) -> str:
    return f"c{cell:03d}_r{r:04d}"


# ---------------------------------------------------------------- inputs


def _load_network(path):
    """Graph and every ``partition_l*.tsv`` level from a network directory."""
    path = Path(path)
    if not path.is_dir():
        raise ValidationError(f"{path}: not a network directory")
    g, labels = read_edgelist(path / "edges.txt")
    files = sorted(path.glob("partition_l*.tsv"), key=lambda f: int(f.stem.split("_l")[1]))
    if not files:
        raise ValidationError(f"{path}: no partition_l*.tsv files")
    levels = [read_partition(f, labels, g.degrees) for f in files]
    return g, levels


def _parse_methods(text):
    out = []
    for name in filter(None, (s.strip() for s in text.split(","))):
        if name not in METHOD_ALIASES:
            raise UsageError(f"unknown method {name!r}; choose from lp, mod")
        if METHOD_ALIASES[name] not in out:
            out.append(METHOD_ALIASES[name])
    if not out:
        raise UsageError("no detection method given")
    return out


def _parse_floats(text, what):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers") from None


def _parse_ints(text, what):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers") from None


def _read_matrix(path):
    """Square matrix from CSV; an optional first row of community ids is skipped."""
    with Path(path).open() as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and len(rows) == len(rows[0]) + 1:
        rows = rows[1:]
    try:
        return np.array([[float(x) for x in r] for r in rows], dtype=np.float64)
    except ValueError:
        raise ValidationError(f"{path}: Omega matrix must be numeric CSV") from None


def _write_matrix(path, values):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(range(values.shape[0]))
        for row in values.tolist():
            w.writerow([fmt(x) for x in row])


def _out_dir(args, cfg: RunConfig | None = None) -> Path:
    out = args.out or (cfg.output if cfg is not None else None)
    if out is None:
        raise UsageError("no output directory; pass --out")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


# ---------------------------------------------------------------- generate


def _generate_task(cfg: RunConfig, cell_index: int, r: int, out: str):
    cell = cfg.cells[cell_index]
    seed = cfg.realization_seed(cell_index, r)
    nid = network_id(cell_index, r)
    try:
        net, S = realize(cell, seed)
    except GenerationError as exc:
        return {"network_id": nid, "error": str(exc), "seed": list(seed.entropy)}
    meta = write_network(
        net,
        Path(out) / nid,
        {"cell": cell.describe(), "realization": r, "seed": list(seed.entropy), "S": S},
    )
    return {
        "network_id": nid,
        "cell": cell_index,
        "label": cell.label,
        "mode": cell.mode,
        "realization": r,
        "S": S,
        "mu": meta["achieved_mu"],
        "D": meta["D"],
        "dropped_stubs": meta["dropped_stubs"],
    }


def _run_tasks(fn, tasks, workers):
    """Run ``fn(*task)`` for every task, in order of ``tasks`` regardless of ``workers``."""
    if workers <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks))) if tasks else []


def _report_failures(out, failures):
    for f in failures:
        log.error("generation failed for %s (seed entropy %s): %s", f["network_id"], f["seed"], f["error"])
    write_csv(out / "failures.csv", ["network_id", "seed", "error"], [dict(f, seed=" ".join(map(str, f["seed"]))) for f in failures])


def cmd_generate(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    tasks = [(cfg, cell.index, r, str(out)) for cell, r in cfg.tasks()]
    results = _run_tasks(_generate_task, tasks, args.workers)
    ok = [r for r in results if "error" not in r]
    failures = [r for r in results if "error" in r]
    header = ["network_id", "cell", "label", "mode", "realization", "S", "mu", "D", "dropped_stubs"]
    write_csv(out / "networks.csv", header, ok)
    if failures:
        _report_failures(out, failures)
        print(f"{len(failures)} of {len(results)} networks failed to generate", file=sys.stderr)
        return EXIT_GENERATION
    print(f"wrote {len(ok)} networks to {out}")
    return EXIT_OK


# ---------------------------------------------------------------- analyze

ANALYZE_HEADER = ["network_id", "level", "n_communities", "mu", "lower", "upper", "D", "Q"]


def _analyze_levels(nid, g, levels, out):
    rows = []
    for i, p in enumerate(levels):
        s = window_summary(g, p)
        row = {
            "network_id": nid,
            "level": i,
            "n_communities": p.n_communities,
            "mu": s["mu"],
            "Q": modularity(g, p, 1.0),
        }
        if s["D"] is None:
            row.update(lower=UNDEFINED, upper=UNDEFINED, D=UNDEFINED)
        else:
            row.update(lower=s["lower"], upper=s["upper"], D=s["D"])
            if out is not None:
                _write_matrix(out / f"omega_{nid}_l{i}.csv", omega_matrix(g, p).values)
        rows.append(row)
    return rows


def cmd_analyze(args) -> int:
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    rows = []
    for path in args.omega or []:
        values = _read_matrix(path)
        row = {"network_id": Path(path).stem, "level": 0, "n_communities": values.shape[0]}
        if values.shape[0] < 2:
            row.update(lower=UNDEFINED, upper=UNDEFINED, D=UNDEFINED)
        else:
            w = resolution_window(values)
            row.update(lower=w.lower, upper=w.upper, D=w.D)
        rows.append(row)
    if args.edges:
        if not args.partition:
            raise UsageError("--edges needs at least one --partition")
        g, labels = read_edgelist(args.edges)
        levels = [read_partition(p, labels, g.degrees) for p in args.partition]
        rows.extend(_analyze_levels(Path(args.edges).stem, g, levels, out))
    for path in args.networks:
        g, levels = _load_network(path)
        rows.extend(_analyze_levels(Path(path).name, g, levels, out))
    if not rows:
        raise UsageError("nothing to analyze; give network directories, --edges/--partition or --omega")
    if out is not None:
        write_csv(out / "analysis.csv", ANALYZE_HEADER, rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(ANALYZE_HEADER)
        for row in rows:
            w.writerow([fmt(row.get(h)) for h in ANALYZE_HEADER])
    return EXIT_OK


# ---------------------------------------------------------------- detect

DETECT_HEADER = ["network_id", "method", "gamma", "seed", "nmi", "Q"]
SUMMARY_HEADER = ["network_id", "method", "gamma", "runs", "mean_nmi", "ci_low", "ci_high"]


def _summarize(rows, keys):
    groups = defaultdict(list)
    for row in rows:
        groups[tuple(row[k] for k in keys)].append(row["nmi"])
    out = []
    for key, values in groups.items():
        mean, lo, hi = mean_ci(values)
        out.append(dict(zip(keys, key), runs=len(values), n=len(values), mean_nmi=mean, ci_low=lo, ci_high=hi))
    return out


def cmd_detect(args) -> int:
    methods = _parse_methods(args.methods)
    if args.gamma_grid:
        gammas = parse_gamma_grid(args.gamma_grid, "--gamma-grid").tolist()
    else:
        gammas = _parse_floats(args.gammas, "--gammas")
    if "modularity" in methods and not gammas:
        raise UsageError("modularity maximization needs at least one gamma")
    seeds = _parse_ints(args.seeds, "--seeds") if args.seeds else [args.seed if args.seed is not None else 0]
    out = _out_dir(args)
    rows = []
    for path in args.networks:
        g, levels = _load_network(path)
        nid = Path(path).name
        for method in methods:
            for gamma in gammas if method == "modularity" else [None]:
                for s in seeds:
                    res = detect(g, levels[0], method, gamma, s)
                    rows.append(dict(res, network_id=nid, seed=s))
    write_csv(out / "detect.csv", DETECT_HEADER, rows)
    write_csv(out / "detect_summary.csv", SUMMARY_HEADER, _summarize(rows, ["network_id", "method", "gamma"]))
    return EXIT_OK


# ---------------------------------------------------------------- sweep

SWEEP_HEADER = ["network_id", "gamma", "partition_id", "Q", "is_argmax"]
INTERVAL_HEADER = ["network_id", "level", "n_communities", "gamma_low", "gamma_high"]


def _interval_rows(nid, levels, res):
    rows = []
    for j, iv in enumerate(res.intervals()):
        rows.append(
            {
                "network_id": nid,
                "level": j,
                "n_communities": levels[j].n_communities,
                "gamma_low": iv[0] if iv else None,
                "gamma_high": iv[1] if iv else None,
            }
        )
    return rows


def cmd_sweep(args) -> int:
    gammas = parse_gamma_grid(args.gamma_grid, "--gamma-grid")
    out = _out_dir(args)
    rows, intervals = [], []
    for path in args.networks:
        g, levels = _load_network(path)
        if len(levels) < 3:
            raise ValidationError(f"{path}: flat network; a sweep needs a hierarchy with an intermediate level")
        nid = Path(path).name
        res, sweep = sweep_rows(g, levels, gammas)
        rows.extend(dict(r, network_id=nid) for r in sweep)
        intervals.extend(_interval_rows(nid, levels, res))
    write_csv(out / "sweep.csv", SWEEP_HEADER, rows)
    write_csv(out / "sweep_intervals.csv", INTERVAL_HEADER, intervals)
    return EXIT_OK


# ---------------------------------------------------------------- batch

NETWORKS_HEADER = [
    "network_id", "cell", "label", "generator", "realization", "S", "mu", "mu_bin",
    "lower", "upper", "D", "min_omega_ii", "edges", "dropped_stubs",
]
DEGREE_HEADER = ["generator", "label", "degree", "target_count", "realized_count"]
WINDOW_HEADER = ["network_id", "generator", "label", "mu", "min_omega_ii", "D"]
MU_DETECT_HEADER = ["network_id", "generator", "label", "mu", "mu_bin", "method", "gamma", "seed", "nmi", "Q"]
MU_SUMMARY_HEADER = ["generator", "mu_bin", "method", "gamma", "n", "mean_nmi", "ci_low", "ci_high"]
D_DETECT_HEADER = ["network_id", "label", "mu", "D", "D_bin", "method", "gamma", "seed", "nmi", "Q"]
D_SUMMARY_HEADER = ["D_bin", "method", "gamma", "n", "mean_nmi", "ci_low", "ci_high"]
FAIL_HEADER = ["network_id", "seed", "error"]


def _batch_task(cfg: RunConfig, cell_index: int, r: int, out: str):
    cell = cfg.cells[cell_index]
    seed = cfg.realization_seed(cell_index, r)
    entropy = list(seed.entropy)
    nid = network_id(cell_index, r)
    try:
        net, S = realize(cell, seed)
    except GenerationError as exc:
        return {"network_id": nid, "error": str(exc), "seed": entropy}
    g, gt = net.graph, net.ground_truth
    if cfg.save_networks:
        write_network(net, Path(out) / "networks" / nid, {"cell": cell.describe(), "realization": r, "seed": entropy, "S": S})
    s = window_summary(g, gt)
    opts = cfg.analysis
    info = {
        "network_id": nid,
        "cell": cell_index,
        "label": cell.label,
        "generator": cell.mode,
        "realization": r,
        "S": S,
        "mu_bin": mu_bin(s["mu"]),
        "edges": g.m,
        "dropped_stubs": net.metadata["dropped_internal_stubs"] + net.metadata["dropped_external_stubs"],
        **s,
    }
    hi = max(int(net.target_degrees.max()), int(g.degrees.max())) + 1
    degrees = {
        "target": np.bincount(net.target_degrees, minlength=hi).tolist(),
        "realized": np.bincount(g.degrees, minlength=hi).tolist(),
    }
    detections = []
    for method in opts.methods:
        for gamma in opts.gammas if method == "modularity" else [None]:
            for k in range(opts.detect_seeds):
                res = detect(g, gt, method, gamma, np.random.SeedSequence(entropy + [1, k]))
                detections.append(dict(res, seed=k))
    sweep, intervals = [], []
    levels = net.hierarchy.levels
    if cell.mode == "HGLFR" and s["D"] is not None and s["D"] > 0 and len(levels) >= 3:
        res, rows = sweep_rows(g, levels, opts.gamma_grid)
        sweep = [dict(row, network_id=nid) for row in rows]
        intervals = _interval_rows(nid, levels, res)
    return {"info": info, "degrees": degrees, "detections": detections, "sweep": sweep, "intervals": intervals}


def _select_per_bin(infos, cap):
    if cap is None:
        return {i["network_id"] for i in infos}
    seen = defaultdict(int)
    keep = set()
    for i in infos:
        key = (i["generator"], i["mu_bin"])
        if seen[key] < cap:
            seen[key] += 1
            keep.add(i["network_id"])
    return keep


def cmd_batch(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    tasks = [(cfg, cell.index, r, str(out)) for cell, r in cfg.tasks()]
    results = _run_tasks(_batch_task, tasks, args.workers)
    failures = [r for r in results if "error" in r]
    done = [r for r in results if "error" not in r]
    infos = [r["info"] for r in done]
    opts = cfg.analysis

    write_csv(out / "networks.csv", NETWORKS_HEADER, infos)

    hist = {}
    for r in done:
        key = (r["info"]["generator"], r["info"]["label"])
        tgt, real = hist.setdefault(key, (defaultdict(int), defaultdict(int)))
        for k, c in enumerate(r["degrees"]["target"]):
            tgt[k] += c
        for k, c in enumerate(r["degrees"]["realized"]):
            real[k] += c
    degree_rows = []
    for (gen, label), (tgt, real) in hist.items():
        for k in sorted(set(tgt) | set(real)):
            if tgt[k] or real[k]:
                degree_rows.append({"generator": gen, "label": label, "degree": k, "target_count": tgt[k], "realized_count": real[k]})
    write_csv(out / "degree_distribution.csv", DEGREE_HEADER, degree_rows)

    write_csv(out / "window.csv", WINDOW_HEADER, [i for i in infos if i["D"] is not None])

    keep = _select_per_bin([i for i in infos if i["mu_bin"] is not None], opts.max_per_bin)
    mu_rows = [
        dict(d, **{k: r["info"][k] for k in ("network_id", "generator", "label", "mu", "mu_bin")})
        for r in done
        if r["info"]["network_id"] in keep
        for d in r["detections"]
    ]
    write_csv(out / "detection_by_mu.csv", MU_DETECT_HEADER, mu_rows)
    write_csv(out / "detection_by_mu_summary.csv", MU_SUMMARY_HEADER, _summarize(mu_rows, ["generator", "mu_bin", "method", "gamma"]))

    d_rows = []
    for r in done:
        i = r["info"]
        if i["generator"] == "HGLFR" and i["D"] is not None and i["mu"] < opts.assortative_mu:
            for d in r["detections"]:
                d_rows.append(dict(d, network_id=i["network_id"], label=i["label"], mu=i["mu"], D=i["D"], D_bin=d_bin(i["D"], opts.d_bin_width)))
    write_csv(out / "detection_by_D.csv", D_DETECT_HEADER, d_rows)
    write_csv(out / "detection_by_D_summary.csv", D_SUMMARY_HEADER, _summarize(d_rows, ["D_bin", "method", "gamma"]))

    write_csv(out / "sweep.csv", SWEEP_HEADER, [row for r in done for row in r["sweep"]])
    write_csv(out / "sweep_intervals.csv", INTERVAL_HEADER, [row for r in done for row in r["intervals"]])

    write_csv(out / "failures.csv", FAIL_HEADER, [dict(f, seed=" ".join(map(str, f["seed"]))) for f in failures])
    if failures:
        for f in failures:
            log.error("generation failed for %s (seed entropy %s): %s", f["network_id"], f["seed"], f["error"])
        print(f"batch finished with {len(failures)} failed realizations of {len(results)}", file=sys.stderr)
        return EXIT_GENERATION
    print(f"batch wrote {len(done)} realizations to {out}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hglfr", description="Hierarchical LFR benchmark generator and diagnostics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", help="output directory (overrides the config's output)")
        p.add_argument("--seed", type=int, help="base seed (overrides the config's seed)")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    p = sub.add_parser("generate", help="generate every network of a config grid")
    with_config(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="Omega matrix, resolution window and modularity per level")
    p.add_argument("networks", nargs="*", help="network directories written by 'generate'")
    p.add_argument("--edges", help="edge list file")
    p.add_argument("--partition", action="append", help="partition file for --edges (repeat per level)")
    p.add_argument("--omega", action="append", help="precomputed Omega matrix as CSV (repeatable)")
    p.add_argument("--out", help="output directory (default: CSV to stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("detect", help="run community detection against the ground truth")
    p.add_argument("networks", nargs="+", help="network directories")
    p.add_argument("--methods", default="lp,mod", help="comma-separated: lp, mod")
    p.add_argument("--gammas", default="1", help="comma-separated resolutions for 'mod'")
    p.add_argument("--gamma-grid", help="start:stop:points:log|lin (overrides --gammas)")
    p.add_argument("--seeds", help="comma-separated detection seeds")
    p.add_argument("--seed", type=int, help="single detection seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="modularity of every hierarchy level over a gamma grid")
    p.add_argument("networks", nargs="+", help="network directories")
    p.add_argument("--gamma-grid", default="0.05:20:200:log", help="start:stop:points:log|lin")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("batch", help="run a full experiment grid and write per-experiment CSVs")
    with_config(p)
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"hglfr: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GenerationError as exc:
        print(f"hglfr: generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (HGLFRError, ValueError, OSError) as exc:
        print(f"hglfr: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
