"""Run configuration: a versioned YAML document describing an experiment grid.

Example::

    schema: hglfr-config/1
    seed: 7
    realizations: 20
    output: runs/grid
    generator:
      N: 1000
      avg_degree: 14
      k_max: 50
      tau1: 2.5
      tau2: 1.5
      c_min: 50
      c_max: 200
    cells:
      - mode: LFR
        mu: [0.05, 0.1, 0.2]
      - mode: GLFR
        mu: [0.1, 0.3]
        delta_mu: 0.3
      - mode: HGLFR
        parametrization: [Low, Medium, High]
        S: [0.05, 0.5]
    analysis:
      gamma_grid: "0.05:20:200:log"
      methods: [lp, mod]
      gammas: [1.0]
      detect_seeds: 1

A list under ``mu`` or ``parametrization`` expands into one cell per entry.
``S`` is either a number or a ``[low, high]`` range; with a range each
realization draws its own ``S`` uniformly. A HGLFR cell may give ``L``,
``mu_levels`` and ``delta_levels`` explicitly instead of a named
parametrization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, ParameterError
from .sampling import MODES, PARAMETRIZATIONS, GeneratorParams, HierarchyParams

__all__ = [
    "CONFIG_SCHEMA",
    "BENCHMARK_GENERATOR",
    "DEFAULT_S_RANGE",
    "AnalysisOptions",
    "Cell",
    "RunConfig",
    "load_config",
    "parse_config",
    "parse_gamma_grid",
    "METHOD_ALIASES",
]

CONFIG_SCHEMA = "hglfr-config/1"

# Standard benchmark settings; k_max and c_max are our own choices.
BENCHMARK_GENERATOR = {
    "N": 1000,
    "avg_degree": 14.0,
    "k_max": 50,
    "tau1": 2.5,
    "tau2": 1.5,
    "c_min": 50,
    "c_max": 200,
}

DEFAULT_S_RANGE = (0.05, 0.5)

METHOD_ALIASES = {
    "lp": "label_propagation",
    "label_propagation": "label_propagation",
    "mod": "modularity",
    "modularity": "modularity",
}


def parse_gamma_grid(text: str, path: str = "gamma_grid") -> np.ndarray:
    """Parse ``"start:stop:points:log|lin"`` into a grid."""
    from .analysis import gamma_grid
    from .errors import ValidationError

    parts = str(text).split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(path, f"expected 'start:stop:points[:log|lin]', got {text!r}")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(path, f"non-numeric bound in {text!r}") from None
    scale = parts[3] if len(parts) == 4 else "log"
    try:
        return gamma_grid(start, stop, points, scale)
    except ValidationError as exc:
        raise ConfigError(path, str(exc)) from None


@dataclass(frozen=True)
class Cell:
    """One fully specified generator setting of the grid."""

    index: int
    mode: str
    params: GeneratorParams
    mu_levels: tuple[float, ...] | None = None
    delta_levels: tuple[float, ...] | None = None
    S: tuple[float, float] | None = None
    label: str = ""

    def hierarchy_params(self, S: float) -> HierarchyParams | None:
        if self.mode != "HGLFR":
            return None
        return HierarchyParams(len(self.mu_levels), S, self.mu_levels, self.delta_levels)

    def describe(self) -> dict:
        out = {"index": self.index, "mode": self.mode, "label": self.label}
        if self.mode == "HGLFR":
            out.update(mu_levels=list(self.mu_levels), delta_levels=list(self.delta_levels), S=list(self.S))
        else:
            out.update(mu=self.params.mu, delta_mu=self.params.delta_mu)
        return out


@dataclass(frozen=True)
class AnalysisOptions:
    gamma_grid: np.ndarray = field(default_factory=lambda: parse_gamma_grid("0.05:20:200:log"))
    methods: tuple[str, ...] = ("label_propagation", "modularity")
    gammas: tuple[float, ...] = (1.0,)
    detect_seeds: int = 1
    assortative_mu: float = 0.2
    d_bin_width: float = 0.5
    max_per_bin: int | None = None


@dataclass(frozen=True)
class RunConfig:
    cells: tuple[Cell, ...]
    realizations: int
    seed: int = 0
    seeds: tuple[int, ...] | None = None
    output: str | None = None
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    save_networks: bool = False

    def realization_seed(self, cell: int, r: int) -> np.random.SeedSequence:
        """Seed sequence for realization ``r`` of cell ``cell``; unique per pair."""
        if self.seeds is not None:
            return np.random.SeedSequence([self.seeds[r], cell])
        return np.random.SeedSequence([self.seed, cell, r])

    def tasks(self):
        for cell in self.cells:
            for r in range(self.realizations):
                yield cell, r

    def with_seed(self, seed: int) -> "RunConfig":
        return RunConfig(self.cells, self.realizations, seed, None, self.output, self.analysis, self.save_networks)


def _require(doc, key, path, kind=None):
    if not isinstance(doc, dict) or key not in doc:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return _typed(doc[key], f"{path}.{key}" if path else key, kind)


def _typed(value, path, kind):
    if kind is None:
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ConfigError(path, f"expected {kind.__name__}, got {value!r}")
    return value


def _as_list(value):
    return value if isinstance(value, list) else [value]


def _float_tuple(value, path):
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of numbers")
    return tuple(_typed(v, f"{path}[{i}]", float) for i, v in enumerate(value))


def _generator_fields(doc, path):
    base = dict(BENCHMARK_GENERATOR)
    if doc is None:
        return base
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected a mapping")
    for key, value in doc.items():
        if key not in base:
            raise ConfigError(f"{path}.{key}", "unknown generator field")
        base[key] = _typed(value, f"{path}.{key}", float if key in ("avg_degree", "tau1", "tau2") else int)
    return base


_CELL_KEYS = {"mode", "mu", "delta_mu", "parametrization", "L", "mu_levels", "delta_levels", "S", "generator"}


def _expand_cell(doc, path, generator, start):
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected a mapping")
    for key in doc:
        if key not in _CELL_KEYS:
            raise ConfigError(f"{path}.{key}", "unknown cell field")
    mode = _require(doc, "mode", path, str)
    if mode not in MODES:
        raise ConfigError(f"{path}.mode", f"must be one of {list(MODES)}")
    gen = dict(generator)
    if "generator" in doc:
        gen.update(_generator_fields(doc["generator"], f"{path}.generator"))
    cells = []
    if mode in ("LFR", "GLFR"):
        for key in ("parametrization", "mu_levels", "delta_levels", "L", "S"):
            if key in doc:
                raise ConfigError(f"{path}.{key}", f"not allowed for mode {mode}")
        mus = _as_list(_require(doc, "mu", path))
        delta = _typed(doc.get("delta_mu", 0.0), f"{path}.delta_mu", float)
        if mode == "LFR" and delta:
            raise ConfigError(f"{path}.delta_mu", "LFR cells take no delta_mu")
        for j, mu in enumerate(mus):
            mu = _typed(mu, f"{path}.mu[{j}]", float)
            params = GeneratorParams(**gen, mode=mode, mu=mu, delta_mu=delta)
            try:
                params.validate()
            except ParameterError as exc:
                raise ConfigError(f"{path}.mu[{j}]", str(exc)) from None
            cells.append(Cell(start + len(cells), mode, params, label=f"{mode} mu={mu:g}"))
        return cells

    for key in ("mu", "delta_mu"):
        if key in doc:
            raise ConfigError(f"{path}.{key}", "HGLFR cells use mu_levels or parametrization")
    S = doc.get("S", list(DEFAULT_S_RANGE))
    if isinstance(S, list):
        if len(S) != 2:
            raise ConfigError(f"{path}.S", "expected a number or a [low, high] range")
        S = (_typed(S[0], f"{path}.S[0]", float), _typed(S[1], f"{path}.S[1]", float))
    else:
        S = (_typed(S, f"{path}.S", float),) * 2
    if not 0 < S[0] <= S[1] <= 1:
        raise ConfigError(f"{path}.S", "need 0 < low <= high <= 1")

    if "parametrization" in doc:
        if "mu_levels" in doc or "delta_levels" in doc:
            raise ConfigError(f"{path}.parametrization", "give either a parametrization or mu_levels, not both")
        families = []
        for j, name in enumerate(_as_list(doc["parametrization"])):
            if name not in PARAMETRIZATIONS:
                raise ConfigError(
                    f"{path}.parametrization[{j}]", f"unknown parametrization {name!r}; known: {sorted(PARAMETRIZATIONS)}"
                )
            families.append((name, *PARAMETRIZATIONS[name]))
    elif "mu_levels" in doc:
        mus = _float_tuple(doc["mu_levels"], f"{path}.mu_levels")
        deltas = _float_tuple(doc.get("delta_levels", [0.0] * len(mus)), f"{path}.delta_levels")
        families = [("custom", mus, deltas)]
    else:
        raise ConfigError(path, "HGLFR cell needs hierarchy parameters (parametrization or mu_levels)")
    if "L" in doc:
        L = _typed(doc["L"], f"{path}.L", int)
        for _, mus, _ in families:
            if len(mus) != L:
                raise ConfigError(f"{path}.L", f"L={L} but {len(mus)} mixing levels given")

    params = GeneratorParams(**gen, mode="HGLFR")
    try:
        params.validate()
    except ParameterError as exc:
        raise ConfigError(f"{path}.generator", str(exc)) from None
    for name, mus, deltas in families:
        try:
            HierarchyParams(len(mus), S[1], mus, deltas).validate()
        except ParameterError as exc:
            raise ConfigError(f"{path}.mu_levels", str(exc)) from None
        cells.append(Cell(start + len(cells), "HGLFR", params, tuple(mus), tuple(deltas), S, label=f"HGLFR {name}"))
    return cells


def _analysis(doc, path="analysis") -> AnalysisOptions:
    if doc is None:
        return AnalysisOptions()
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected a mapping")
    known = {"gamma_grid", "methods", "gammas", "detect_seeds", "assortative_mu", "d_bin_width", "max_per_bin"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown analysis field")
    kw = {}
    if "gamma_grid" in doc:
        kw["gamma_grid"] = parse_gamma_grid(doc["gamma_grid"], f"{path}.gamma_grid")
    if "methods" in doc:
        methods = []
        for j, m in enumerate(_as_list(doc["methods"])):
            if m not in METHOD_ALIASES:
                raise ConfigError(f"{path}.methods[{j}]", f"unknown method {m!r}")
            methods.append(METHOD_ALIASES[m])
        kw["methods"] = tuple(methods)
    if "gammas" in doc:
        kw["gammas"] = _float_tuple(_as_list(doc["gammas"]), f"{path}.gammas")
    if "detect_seeds" in doc:
        kw["detect_seeds"] = _typed(doc["detect_seeds"], f"{path}.detect_seeds", int)
    for key in ("assortative_mu", "d_bin_width"):
        if key in doc:
            kw[key] = _typed(doc[key], f"{path}.{key}", float)
    if doc.get("max_per_bin") is not None:
        kw["max_per_bin"] = _typed(doc["max_per_bin"], f"{path}.max_per_bin", int)
    return AnalysisOptions(**kw)


def parse_config(doc) -> RunConfig:
    """Validate a decoded config document and expand its grid into cells."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a mapping")
    schema = doc.get("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        raise ConfigError("schema", f"unsupported schema {schema!r}, expected {CONFIG_SCHEMA!r}")
    known = {"schema", "seed", "seeds", "realizations", "output", "generator", "cells", "analysis", "save_networks"}
    for key in doc:
        if key not in known:
            raise ConfigError(key, "unknown field")
    generator = _generator_fields(doc.get("generator"), "generator")
    raw_cells = _require(doc, "cells", "", list)
    cells = []
    for i, c in enumerate(raw_cells):
        cells.extend(_expand_cell(c, f"cells[{i}]", generator, len(cells)))
    seeds = None
    if doc.get("seeds") is not None:
        seeds = tuple(_typed(s, f"seeds[{i}]", int) for i, s in enumerate(_typed(doc["seeds"], "seeds", list)))
        if len(set(seeds)) != len(seeds):
            raise ConfigError("seeds", "seeds must be unique")
    if "realizations" in doc:
        realizations = _typed(doc["realizations"], "realizations", int)
        if realizations < 0:
            raise ConfigError("realizations", "must be non-negative")
        if seeds is not None and len(seeds) != realizations:
            raise ConfigError("seeds", f"{len(seeds)} seeds for {realizations} realizations")
    elif seeds is not None:
        realizations = len(seeds)
    else:
        raise ConfigError("realizations", "missing required field")
    seed = _typed(doc.get("seed", 0), "seed", int)
    output = doc.get("output")
    if output is not None:
        output = str(_typed(output, "output", str))
    return RunConfig(
        cells=tuple(cells),
        realizations=realizations,
        seed=seed,
        seeds=seeds,
        output=output,
        analysis=_analysis(doc.get("analysis")),
        save_networks=bool(_typed(doc.get("save_networks", False), "save_networks", bool)),
    )


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from None
    return parse_config(doc)
