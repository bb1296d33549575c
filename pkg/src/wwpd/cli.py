"""Command-line front end.

Exit status: 0 on success or a passing run, 1 when a check fails, 2 for
usage and configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from pathlib import Path
from typing import Sequence

from .config import ConfigError, apply_overrides, build_model, load_config
from .pipeline import BadBasis, HypothesisViolated, ScheduleExhausted, run_report
from .qm import QmFunction, QmSpec, empirical_defect
from .spaces import Disconnected, delta_four_point, load_edge_list
from .tree import (
    NotLoxodromic,
    SearchExhausted,
    axis_of,
    boundary_pair,
    projection_diameter,
    sim_equivalent,
    UNBOUNDED,
)
from .words import InvalidLetter, ReducedWord, exponent_sums, random_word
from .wreath import ProductWord

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 as well; keep the text uniform
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _word(text: str, rank: int) -> ReducedWord:
    try:
        return ReducedWord.parse(text, rank)
    except (InvalidLetter, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _show(w: ReducedWord) -> str:
    return w.letters or "1"


def cmd_word(args) -> int:
    w = _word(args.w, args.rank)
    if args.op == "reduce":
        print(_show(w))
    else:
        print(" ".join(str(x) for x in exponent_sums(w)))
    return EXIT_OK


def cmd_sim(args) -> int:
    model = build_model(args.model)
    try:
        g = ProductWord.parse(args.g, model.n_factors, model.rank)
        h = ProductWord.parse(args.h, model.n_factors, model.rank)
    except (InvalidLetter, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    act = model.action(args.kappa)
    try:
        same = sim_equivalent(g, h, act)
    except NotLoxodromic as exc:
        print(f"not loxodromic: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print("equivalent" if same else "inequivalent")
    return EXIT_OK


def cmd_axis(args) -> int:
    g = _word(args.g, args.rank)
    try:
        ax = axis_of(g)
    except NotLoxodromic as exc:
        print(f"not loxodromic: {exc}", file=sys.stderr)
        return EXIT_FAIL
    P = boundary_pair(g)
    print(f"conjugator {_show(ax.conjugator)}")
    print(f"period {ax.period}")
    print(f"translation_length {ax.translation_length}")
    print(f"minus {P.minus}")
    print(f"plus {P.plus}")
    return EXIT_OK


def cmd_proj(args) -> int:
    g, h = _word(args.g, args.rank), _word(args.h, args.rank)
    try:
        pd = projection_diameter(axis_of(g), axis_of(h))
    except NotLoxodromic as exc:
        print(f"not loxodromic: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print("unbounded" if pd == UNBOUNDED else pd)
    return EXIT_OK


def _spec(args) -> QmSpec:
    w = _word(args.w, args.rank)
    try:
        return QmSpec(w=w, W=args.W)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_qm_eval(args) -> int:
    h = QmFunction(_spec(args))
    rows = h.rows([_word(x, args.rank) for x in args.gamma])
    writer = csv.DictWriter(sys.stdout, fieldnames=["gamma", "d", "c_w", "c_wbar", "h_w"], lineterminator="\n")
    writer.writeheader()
    for r, text in zip(rows, args.gamma):
        r["gamma"] = _show(_word(text, args.rank))
        r["d"] = len(_word(text, args.rank))
        writer.writerow(r)
    return EXIT_OK


def cmd_qm_defect(args) -> int:
    if args.budget < 1:
        raise UsageError("--budget must be at least 1")
    h = QmFunction(_spec(args))
    rank = args.rank

    def sampler(rng: random.Random):
        return (random_word(rng, rng.randint(0, args.max_len), rank), random_word(rng, rng.randint(0, args.max_len), rank))

    est = empirical_defect(h, sampler, args.budget, seed=args.seed)
    g0, g1 = est.witness
    print(json.dumps({
        "defect_lower_bound": est.value,
        "samples": est.samples,
        "seed": args.seed,
        "witness": [_show(g0), _show(g1)],
        "w": args.w,
        "W": args.W,
    }, sort_keys=True))
    return EXIT_OK


def cmd_graph_delta(args) -> int:
    try:
        G = load_edge_list(args.edgelist)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    try:
        delta = delta_four_point(G)
    except Disconnected as exc:
        print(f"disconnected: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"{delta:g}")
    return EXIT_OK


def write_outputs(data: dict, series: list[tuple], report_path: Path, csv_path: Path) -> None:
    report_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "kappa", "d", "value"])
        w.writerows(series)


def cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    apply_overrides(cfg, J=args.J, W=args.W, seed=args.seed, budget=args.budget, probe_cap=args.probe_cap)
    stem = Path(args.config).with_suffix("")
    base = Path(args.config).parent
    report = Path(args.report or (base / cfg.report_path if cfg.report_path else f"{stem}.report.json"))
    series_path = Path(args.csv or (base / cfg.csv_path if cfg.csv_path else f"{stem}.series.csv"))
    s = cfg.settings
    try:
        rep = run_report(s)
        data, series = rep.data, rep.series
    except (HypothesisViolated, ScheduleExhausted, BadBasis, SearchExhausted) as exc:
        data = {
            "model": s.model.name,
            "seed": s.seed,
            "config": s.echo,
            "passed": False,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        series = []
    write_outputs(data, series, report, series_path)
    verdicts = data.get("verdicts", {})
    for key in sorted(verdicts, key=lambda k: (not k.isdigit(), int(k) if k.isdigit() else 0, k)):
        print(f"({key}) {'pass' if verdicts[key]['pass'] else 'FAIL'}")
    if "error" in data:
        print(f"error: {data['error']['type']}: {data['error']['message']}")
    print(f"overall {'pass' if data['passed'] else 'FAIL'} (seed {s.seed})")
    print(f"report {report}")
    print(f"series {series_path}")
    return EXIT_OK if data["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wwpd", description="Counting quasimorphisms, tree geometry and the WWPD pipeline.")
    p.add_argument("--rank", type=int, default=2, help="rank of the free group for word arguments")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    w = sub.add_parser("word", help="word algebra")
    w.add_argument("op", choices=["reduce", "sums"])
    w.add_argument("w")
    w.set_defaults(func=cmd_word)

    s = sub.add_parser("sim", help="decide g ~ h")
    s.add_argument("g")
    s.add_argument("h")
    s.add_argument("--kappa", type=int, default=1)
    s.add_argument("--model", default="A")
    s.set_defaults(func=cmd_sim)

    a = sub.add_parser("axis", help="axis and boundary pair of g")
    a.add_argument("g")
    a.set_defaults(func=cmd_axis)

    pd = sub.add_parser("proj-diam", help="projection diameter of axis(h) onto axis(g)")
    pd.add_argument("g")
    pd.add_argument("h")
    pd.set_defaults(func=cmd_proj)

    q = sub.add_parser("qm", help="counting quasimorphisms")
    qsub = q.add_subparsers(dest="qcmd", parser_class=_Parser)
    qe = qsub.add_parser("eval")
    qe.add_argument("--w", required=True)
    qe.add_argument("--W", type=int, default=1)
    qe.add_argument("gamma", nargs="+")
    qe.set_defaults(func=cmd_qm_eval)
    qd = qsub.add_parser("defect")
    qd.add_argument("--w", required=True)
    qd.add_argument("--W", type=int, default=1)
    qd.add_argument("--budget", type=int, default=2000)
    qd.add_argument("--seed", type=int, default=0)
    qd.add_argument("--max-len", type=int, default=12)
    qd.set_defaults(func=cmd_qm_defect)

    g = sub.add_parser("graph", help="finite graph spaces")
    gsub = g.add_subparsers(dest="gcmd", parser_class=_Parser)
    gd = gsub.add_parser("delta")
    gd.add_argument("edgelist")
    gd.set_defaults(func=cmd_graph_delta)

    pl = sub.add_parser("pipeline", help="run the full construction")
    psub = pl.add_subparsers(dest="pcmd", parser_class=_Parser)
    pr = psub.add_parser("run")
    pr.add_argument("config")
    pr.add_argument("--report")
    pr.add_argument("--csv")
    pr.add_argument("--J", type=int)
    pr.add_argument("--W", type=int)
    pr.add_argument("--seed", type=int)
    pr.add_argument("--budget", type=int)
    pr.add_argument("--probe-cap", dest="probe_cap", type=int)
    pr.set_defaults(func=cmd_pipeline)
    return p


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
