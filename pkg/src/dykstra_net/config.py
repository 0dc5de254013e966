"""Experiment configuration files.

Sections and keys::

    [graph]
    3 2 1          # n m d, then m lines "i j"   (or: file = graph.txt)
    0 1
    1 2
    [functions]
    default: zero
    0: quadratic a=1 c=-1
    [run]
    algorithm = dykstra       # dykstra | dual-ascent | apg
    schedule = tree           # tree | full | star
    seed = 0
    max_cycles = 1000
    gap_tol = 1e-12
    x0 = 1;2;3                # per-vertex values, coordinates comma-separated
    subsets = 0,1;1,2         # dual-ascent only
    greedy = false            # apg only
    greedy_blocks = edges     # edges | cycle
    hubs = 0,2                # star schedule hub order
    weights = 1;3             # optional per-vertex weights
    out = trace.csv

``#`` starts a comment. Errors carry the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .funcs import ConvexFunction, parse_function
from .graph import Graph, GraphError, is_connected

ALGORITHMS = ("dykstra", "dual-ascent", "apg")
SCHEDULES = ("tree", "full", "star")


class ConfigError(ValueError):
    """Malformed configuration, with a line number when one applies."""

    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


@dataclass
class ExperimentConfig:
    graph: Graph
    dim: int
    funcs: tuple[ConvexFunction, ...]
    x0: np.ndarray
    algorithm: str = "dykstra"
    schedule: str = "tree"
    seed: int = 0
    max_cycles: int = 1000
    gap_tol: float = 1e-12
    subsets: list[tuple[int, ...]] = field(default_factory=list)
    greedy: bool = False
    greedy_blocks: str = "edges"
    hubs: tuple[int, ...] = ()
    weights: np.ndarray | None = None
    out: str | None = None


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_graph_lines(lines: list[tuple[int, str]]) -> tuple[Graph, int]:
    """Graph text: ``n m d`` then ``m`` lines ``i j``; entries are (line_no, text)."""
    if not lines:
        raise ConfigError("empty graph section")
    no, head = lines[0]
    parts = head.split()
    if len(parts) != 3:
        raise ConfigError("graph header must be 'n m d'", no)
    try:
        n, m, d = (int(p) for p in parts)
    except ValueError:
        raise ConfigError("graph header must hold three integers", no) from None
    if n < 1 or m < 0 or d < 1:
        raise ConfigError("need n >= 1, m >= 0, d >= 1", no)
    body = lines[1:]
    if len(body) != m:
        raise ConfigError(f"expected {m} edge lines, found {len(body)}", no)
    edges = []
    for no, text in body:
        parts = text.split()
        try:
            i, j = (int(p) for p in parts)
        except ValueError:
            raise ConfigError(f"bad edge line {text!r}", no) from None
        edges.append((i, j))
    try:
        graph = Graph(n, tuple(edges))
    except GraphError as exc:
        raise ConfigError(str(exc), body[-1][0] if body else no) from None
    if not is_connected(graph):
        raise ConfigError("graph is not connected", no)
    return graph, d


def read_graph_file(path: str | Path) -> tuple[Graph, int]:
    text = Path(path).read_text().splitlines()
    lines = [(k + 1, _strip(t)) for k, t in enumerate(text)]
    return parse_graph_lines([(k, t) for k, t in lines if t])


def _vector_list(text: str, count: int, dim: int, no: int) -> np.ndarray:
    items = [p.strip() for p in text.split(";")]
    if len(items) != count:
        raise ConfigError(f"expected {count} entries, got {len(items)}", no)
    out = np.zeros((count, dim))
    for k, item in enumerate(items):
        try:
            vals = [float(v) for v in item.split(",")]
        except ValueError:
            raise ConfigError(f"bad number in {item!r}", no) from None
        if len(vals) == 1:
            vals = vals * dim
        if len(vals) != dim:
            raise ConfigError(f"entry {item!r} does not have {dim} coordinates", no)
        out[k] = vals
    return out


def parse_config(text: str, base_dir: str | Path = ".") -> ExperimentConfig:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in ("graph", "functions", "run"):
                raise ConfigError(f"unknown section [{current}]", no)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", no)
            sections[current] = []
            continue
        if current is None:
            raise ConfigError("content before the first section", no)
        sections[current].append((no, line))
    for name in ("graph", "run"):
        if name not in sections:
            raise ConfigError(f"missing [{name}] section")

    glines = sections["graph"]
    if glines and glines[0][1].startswith("file") and "=" in glines[0][1]:
        no, line = glines[0]
        path = Path(base_dir) / line.split("=", 1)[1].strip()
        try:
            graph, dim = read_graph_file(path)
        except OSError as exc:
            raise ConfigError(f"cannot read graph file: {exc}", no) from None
    else:
        graph, dim = parse_graph_lines(glines)
    n = graph.n_vertices

    descs: dict[int, str] = {}
    default = None
    for no, line in sections.get("functions", []):
        if ":" not in line:
            raise ConfigError("function lines look like 'i: kind params' or 'default: kind params'", no)
        key, desc = (p.strip() for p in line.split(":", 1))
        try:
            if key == "default":
                default = (no, desc)
                parse_function(desc, dim)
                continue
            i = int(key)
            if not 0 <= i < n:
                raise ConfigError(f"vertex {i} out of range", no)
            parse_function(desc, dim)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc), no) from None
        descs[i] = desc
    funcs = []
    for i in range(n):
        if i in descs:
            funcs.append(parse_function(descs[i], dim))
        elif default is not None:
            funcs.append(parse_function(default[1], dim))
        else:
            raise ConfigError(f"no function for vertex {i} and no default")

    kv: dict[str, tuple[int, str]] = {}
    for no, line in sections["run"]:
        if "=" not in line:
            raise ConfigError("run lines look like 'key = value'", no)
        k, v = (p.strip() for p in line.split("=", 1))
        kv[k.lower()] = (no, v)
    known = {"algorithm", "schedule", "seed", "max_cycles", "gap_tol", "x0", "subsets",
             "greedy", "greedy_blocks", "hubs", "weights", "out"}
    for k, (no, _) in kv.items():
        if k not in known:
            raise ConfigError(f"unknown run key {k!r}", no)

    def get(key, conv, default):
        if key not in kv:
            return default
        no, v = kv[key]
        try:
            return conv(v)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{key}: {exc}", no) from None

    if "x0" not in kv:
        raise ConfigError("missing run key 'x0'")
    x0 = _vector_list(kv["x0"][1], n, dim, kv["x0"][0])
    cfg = ExperimentConfig(graph, dim, tuple(funcs), x0)
    cfg.algorithm = get("algorithm", str.lower, "dykstra")
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}", kv["algorithm"][0])
    cfg.schedule = get("schedule", str.lower, "tree")
    if cfg.schedule not in SCHEDULES:
        raise ConfigError(f"schedule must be one of {SCHEDULES}", kv["schedule"][0])
    cfg.seed = get("seed", int, 0)
    cfg.max_cycles = get("max_cycles", int, 1000)
    cfg.gap_tol = get("gap_tol", float, 1e-12)
    if not cfg.gap_tol > 0:
        raise ConfigError("gap_tol must be positive", kv["gap_tol"][0])
    cfg.greedy = get("greedy", lambda v: v.lower() in ("1", "true", "yes", "on"), False)
    cfg.greedy_blocks = get("greedy_blocks", str.lower, "edges")
    cfg.hubs = get("hubs", lambda v: tuple(int(p) for p in v.split(",") if p.strip()), ())
    cfg.out = get("out", str, None)
    if "subsets" in kv:
        no, v = kv["subsets"]
        subs = []
        for part in v.split(";"):
            try:
                S = tuple(int(p) for p in part.split(","))
            except ValueError:
                raise ConfigError(f"bad subset {part!r}", no) from None
            if any(not 0 <= i < n for i in S):
                raise ConfigError(f"subset {part!r} has a vertex out of range", no)
            subs.append(S)
        cfg.subsets = subs
    if cfg.algorithm == "dual-ascent" and not cfg.subsets:
        raise ConfigError("dual-ascent needs 'subsets'")
    if "weights" in kv:
        no, v = kv["weights"]
        w = _vector_list(v, n, 1, no)[:, 0]
        if np.any(w <= 0):
            raise ConfigError("weights must be positive", no)
        cfg.weights = w
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), path.parent)
