import csv
import hashlib
import json
import subprocess
import sys

import pytest
import yaml

from conftest import ROOT
from wwpd.cli import run_command
from wwpd.config import load_config
from wwpd.pipeline import SCHOTTKY, ExponentSchedule, build_f_sequence, classify_actions, derive_commutator_basis
from wwpd.qm import QmFunction, make_axis_word
from wwpd.tree import UNBOUNDED, TreeAction, axis_of, good_basis, projection_diameter
from wwpd.words import ReducedWord

R = ReducedWord


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ------------------------------------------------------------ small commands


def test_word_commands(capsys):
    assert run(capsys, "word", "reduce", "aAb") == (0, "b\n", "")
    assert run(capsys, "word", "reduce", "abBA")[1] == "1\n"
    assert run(capsys, "word", "sums", "aaaB")[1] == "3 -1\n"


@pytest.mark.parametrize("g, h, want", [("a", "baaB", "equivalent"), ("ab", "ba", "equivalent"), ("a", "b", "inequivalent")])
def test_sim_command(capsys, g, h, want):
    code, out, _ = run(capsys, "sim", g, h)
    assert code == 0 and out.strip() == want


def test_sim_command_inverse_conjugate(capsys):
    # BaaB cyclically reduces to aaBB, which is not a conjugate of a power of a.
    assert run(capsys, "sim", "a", "BaaB")[1].strip() == "inequivalent"


def test_sim_command_on_model_b(capsys):
    code, out, _ = run(capsys, "sim", "--model", "B", "a,1", "ba,1")
    assert code == 0 and out.strip() == "inequivalent"
    code, _, err = run(capsys, "sim", "--model", "B", "1,a", "a,1")
    assert code == 1 and "not loxodromic" in err


def test_axis_command(capsys):
    code, out, _ = run(capsys, "axis", "baB")
    lines = dict(line.split(" ", 1) for line in out.strip().splitlines())
    assert code == 0
    assert lines["conjugator"] == "b" and lines["period"] == "a" and lines["translation_length"] == "1"
    code, _, err = run(capsys, "axis", "1")
    assert code == 1 and "not loxodromic" in err


@pytest.mark.parametrize("g, h", [("a", "b"), ("aaa", "a"), ("aab", "abA"), ("ab", "bbaBB")])
def test_proj_diam_matches_library(capsys, g, h):
    want = projection_diameter(axis_of(R(g)), axis_of(R(h)))
    out = run(capsys, "proj-diam", g, h)[1].strip()
    assert out == ("unbounded" if want == UNBOUNDED else str(want))


def test_qm_eval_csv(capsys):
    code, out, _ = run(capsys, "qm", "eval", "--w", "ab", "ababab", "BABABA", "ABABAB", "1")
    rows = list(csv.DictReader(out.splitlines()))
    assert code == 0
    assert [(r["gamma"], r["h_w"]) for r in rows] == [("ababab", "3"), ("BABABA", "-3"), ("ABABAB", "-2"), ("1", "0")]
    assert rows[0]["d"] == "6" and rows[0]["c_wbar"] == "0"


def test_qm_defect_json(capsys):
    code, out, _ = run(capsys, "qm", "defect", "--w", "ab", "--budget", "50", "--seed", "3")
    data = json.loads(out)
    assert code == 0 and data["seed"] == 3 and data["samples"] == 50
    assert 0 <= data["defect_lower_bound"] <= 4
    assert run(capsys, "qm", "defect", "--w", "ab", "--budget", "50", "--seed", "3")[1] == out


def test_graph_delta(capsys, tmp_path):
    p = tmp_path / "c6.txt"
    p.write_text("".join(f"{i} {(i + 1) % 6}\n" for i in range(6)))
    assert run(capsys, "graph", "delta", str(p)) == (0, "1\n", "")
    q = tmp_path / "split.txt"
    q.write_text("0 1\n2 3\n")
    assert run(capsys, "graph", "delta", str(q))[0] == 1


# ------------------------------------------------------------ usage errors


@pytest.mark.parametrize(
    "argv",
    [
        ["frob"],
        [],
        ["word", "reduce", "ax"],
        ["qm", "eval", "--w", "a", "ab"],
        ["qm", "defect", "--w", "ab", "--budget", "0"],
        ["pipeline", "run", "/no/such/file.cfg"],
        ["graph", "delta", "/no/such/edges.txt"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def _write_cfg(tmp_path, **changes):
    raw = yaml.safe_load((ROOT / "configs" / "modelB.cfg").read_text())
    raw.update(changes)
    p = tmp_path / "run.cfg"
    p.write_text(yaml.safe_dump(raw))
    return p


def test_schedule_violation_is_a_config_error(capsys, tmp_path):
    p = _write_cfg(tmp_path, schedule={"row1": [1, 2, 3, 8, 16, 32], "growth": 2})
    code, _, err = run(capsys, "pipeline", "run", str(p))
    assert code == 2 and "schedule invariant violated" in err


@pytest.mark.parametrize(
    "change, needle",
    [
        ({"model": "C"}, "unknown model"),
        ({"bogus": 1}, "unknown config keys"),
        ({"reps": ["1,1"]}, "reps"),
        ({"J": -1}, "J"),
    ],
)
def test_bad_configs(capsys, tmp_path, change, needle):
    code, _, err = run(capsys, "pipeline", "run", str(_write_cfg(tmp_path, **change)))
    assert code == 2 and needle in err


# ------------------------------------------------------------ pipeline runs


def test_pipeline_model_b_outputs(capsys, tmp_path):
    cfg = _write_cfg(tmp_path, J=2, budget=300)
    report, series = tmp_path / "r.json", tmp_path / "s.csv"
    code, out, _ = run(capsys, "pipeline", "run", str(cfg), "--report", str(report), "--csv", str(series), "--seed", "7")
    assert code == 0
    assert "overall pass (seed 7)" in out
    assert "(13) pass" in out and "(step6) pass" in out
    data = json.loads(report.read_text())
    assert data["seed"] == 7 and data["passed"]
    assert data["config"]["seed"] == 7

    # Each row (i, j, kappa, d, value) is h(f_i^{d_i}) at i_kappa(f_j)^d; rebuild it from the library.
    rows = list(csv.DictReader(series.read_text().splitlines()))
    model = load_config(cfg).settings.model
    base = TreeAction("base", model.base_image, model.rank)
    tags = classify_actions(model)
    g0, h0, _ = derive_commutator_basis(model)
    live = [model.action(k) for k in range(1, model.K + 1) if tags[k - 1] == SCHOTTKY]
    g1, h1, _ = good_basis(g0, h0, live)
    f = build_f_sequence(g1, h1, ExponentSchedule.geometric((1, 2, 4, 8, 16, 32), 2, 2), 2, model, tags).f
    assert [hashlib.sha256(str(x).encode()).hexdigest()[:16] for x in f] == [e["sha256_16"] for e in data["f"]]
    qms = {i: QmFunction(make_axis_word(f[i - 1], d, base)) for i, d in enumerate(data["powers"], 1)}
    picked = rows[::7]
    assert len(picked) > 10
    for r in picked:
        i, j, kappa, d = (int(r[k]) for k in ("i", "j", "kappa", "d"))
        assert qms[i](model.outer_rep(kappa, f[j - 1]) ** d) == int(r["value"])


def test_entry_point_subprocess():
    out = subprocess.run([sys.executable, "-m", "wwpd", "word", "reduce", "abBa"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "aa\n"
