import json
import math
import shutil
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dykstra_net.cli import main, run_experiment
from dykstra_net.config import ConfigError, load_config, parse_config
from dykstra_net.trace import HEADER, Trace, TraceRow, from_csv, read_csv, to_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
floats = st.floats(allow_nan=True, allow_infinity=True)


@given(st.lists(st.tuples(floats, floats, floats, floats, st.integers(0, 2**62)), max_size=20),
       st.sampled_from(["", "converged", "stuck", "max_cycles"]))
def test_csv_round_trip(rows, status):
    t = Trace(status=status)
    for k, (a, b, c, d, ns) in enumerate(rows):
        t.append(TraceRow(k + 1, a, b, c, d, ns))
    assert from_csv(to_csv(t)) == t


def test_csv_header_fixed():
    assert to_csv(Trace()).splitlines()[0] == ",".join(HEADER)
    assert HEADER == ("iter", "F", "gap_lb", "dist_ref", "sumz_sqrtn", "wall_ns")


def test_trace_iterations_increase():
    t = Trace()
    t.append(TraceRow(1, 0.0, 0.0))
    with pytest.raises(ValueError):
        t.append(TraceRow(1, 0.0, 0.0))


BASE = """[graph]
3 2 1
0 1
1 2
[functions]
default: zero
[run]
x0 = 1;2;3
"""


@pytest.mark.parametrize("text, line", [
    (BASE.replace("1 2\n[functions]", "1 7\n[functions]"), 4),
    (BASE.replace("3 2 1", "3 two 1"), 2),
    (BASE.replace("default: zero", "default: cubic"), 6),
    (BASE.replace("x0 = 1;2;3", "x0 = 1;2"), 8),
    (BASE + "gap_tol = -1\n", 9),
    (BASE + "colour = red\n", 9),
    (BASE + "algorithm = newton\n", 9),
    ("x = 1\n" + BASE, 1),
    (BASE.replace("[run]", "[runn]"), 7),
])
def test_config_errors_carry_line(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_config_disconnected_and_missing():
    with pytest.raises(ConfigError, match="not connected"):
        parse_config(BASE.replace("3 2 1\n0 1\n1 2", "3 1 1\n0 1"))
    with pytest.raises(ConfigError, match="x0"):
        parse_config(BASE.replace("x0 = 1;2;3", ""))
    with pytest.raises(ConfigError, match="subsets"):
        parse_config(BASE + "algorithm = dual-ascent\n")


def test_graph_file(tmp_path):
    (tmp_path / "g.txt").write_text("# path\n3 2 2\n0 1\n1 2\n")
    cfg_text = BASE.replace("3 2 1\n0 1\n1 2", "file = g.txt").replace("1;2;3", "1,0;2,0;3,0")
    (tmp_path / "c.cfg").write_text(cfg_text)
    cfg = load_config(tmp_path / "c.cfg")
    assert cfg.dim == 2 and cfg.graph.n_edges == 2


def test_consensus_config_trace():
    cfg = load_config(CONFIGS / "consensus.cfg")
    res = run_experiment(cfg)
    assert res.ok
    F = res.trace.column("F")
    assert all(b >= a - 1e-12 * (1 + abs(a)) for a, b in zip(F, F[1:]))
    # gap_tol bounds 1/2 |x - mean|^2, so distances are compared with its square root
    assert res.trace.last.dist_ref <= math.sqrt(2 * cfg.gap_tol)


def test_pairwise_config_is_stuck():
    res = run_experiment(load_config(CONFIGS / "stall_pairwise.cfg"))
    assert not res.ok and res.trace.status == "stuck"
    assert res.trace.last.gap_lb > 0


def test_apg_config_running_max():
    res = run_experiment(load_config(CONFIGS / "apg_boxes.cfg"))
    F = res.trace.column("F")
    assert all(b >= a for a, b in zip(F, F[1:]))
    assert res.ok


def test_cli_run_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["run", "--config", str(CONFIGS / "consensus.cfg"), "--out", str(out)]) == 0
    assert read_csv(out).status == "converged"
    assert main(["run", "--config", str(CONFIGS / "stall_pairwise.cfg"),
                 "--out", str(tmp_path / "p.csv")]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text(BASE.replace("3 2 1", "3 2"))
    assert main(["run", "--config", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_seed_override(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["run", "--config", str(CONFIGS / "consensus.cfg"), "--out", str(a), "--seed", "4"])
    main(["run", "--config", str(CONFIGS / "consensus.cfg"), "--out", str(b), "--seed", "4"])
    ta, tb = read_csv(a), read_csv(b)
    assert ta.column("F") == tb.column("F")


def test_cli_oracle(capsys):
    assert main(["oracle", "--config", str(CONFIGS / "weighted.cfg")]) == 0
    assert np.allclose(json.loads(capsys.readouterr().out)["x"], 3.0)
    main(["oracle", "--config", str(CONFIGS / "stall_full.cfg")])
    payload = json.loads(capsys.readouterr().out)
    assert np.allclose(np.ravel(payload["y"]), [1, 0, -1])


def test_cli_batch(tmp_path):
    files = []
    for name in ("consensus", "weighted", "stall_full"):
        shutil.copy(CONFIGS / f"{name}.cfg", tmp_path)
        files.append(str(tmp_path / f"{name}.cfg"))
    out = tmp_path / "out"
    assert main(["batch", *files, "--out-dir", str(out), "--jobs", "2"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["consensus.csv", "stall_full.csv",
                                                     "weighted.csv"]
