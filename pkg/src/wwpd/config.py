"""YAML run configuration for the pipeline, validated eagerly."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from .pipeline import ExponentSchedule, PipelineSettings
from .words import ReducedWord, alphabet
from .wreath import Automorphism, FiniteQuotient, ProductWord, SemidirectModel, model_a, model_b

__all__ = ["ConfigError", "CliConfig", "load_config", "parse_config", "build_model"]

KNOWN_KEYS = {
    "model", "basis", "require_commutator", "schedule", "J", "W", "probe_cap",
    "budget", "seed", "power_cap", "a_max", "t", "reps", "output",
}


class ConfigError(ValueError):
    """A configuration problem; the message names the violated invariant."""


@dataclass
class CliConfig:
    settings: PipelineSettings
    report_path: str | None
    csv_path: str | None
    source: str


def _int(raw: dict, key: str, default: int, minimum: int) -> int:
    val = raw.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{key} must be an integer")
    if val < minimum:
        raise ConfigError(f"{key} must be at least {minimum}")
    return val


def _fraction(x: Any) -> Fraction:
    try:
        return Fraction(str(x))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot read coefficient {x!r}") from exc


def _custom_model(spec: dict) -> SemidirectModel:
    try:
        n_factors = int(spec.get("factors", 1))
        rank = int(spec.get("rank", 2))
        q = spec["quotient"]
        names = [str(x) for x in q["elements"]]
        table = [[names.index(str(x)) for x in row] for row in q["table"]]
        acts = q.get("actions") or {}
        actions = []
        for name in names:
            images = acts.get(name)
            if images is None:
                actions.append(Automorphism.identity(n_factors, rank))
                continue
            parsed = {}
            for key, text in images.items():
                factor, _, letter = str(key).rpartition(":")
                k = int(factor) - 1 if factor else 0
                parsed[(k, letter)] = ProductWord.parse(str(text), n_factors, rank)
            actions.append(Automorphism(parsed, n_factors, rank))
        basis = [ProductWord.parse(str(x), n_factors, rank) for x in spec.get("F_basis", [])]
        if len(basis) != 2:
            raise ConfigError("F_basis needs two elements of N")
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError, AttributeError) as exc:
        raise ConfigError(f"malformed custom model: {exc}") from exc
    quotient = FiniteQuotient(names, table, actions, identity=0)
    problems = quotient.problems()
    if problems:
        raise ConfigError(f"quotient invariant violated: {problems[0]}")
    return SemidirectModel(
        name=str(spec.get("name", "custom")),
        n_factors=n_factors,
        rank=rank,
        quotient=quotient,
        F_basis=(basis[0], basis[1]),
        base_factor=int(spec.get("base_factor", 0)),
    )


def build_model(raw: Any) -> SemidirectModel:
    if isinstance(raw, str):
        key = raw.strip().upper()
        if key == "A":
            return model_a()
        if key == "B":
            return model_b()
        raise ConfigError(f"unknown model preset {raw!r} (use A, B, or a custom mapping)")
    if isinstance(raw, dict):
        return _custom_model(raw)
    raise ConfigError("model must be a preset name or a mapping")


def parse_config(raw: Any, source: str = "<config>") -> CliConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    model = build_model(raw.get("model", "A"))

    sched = raw.get("schedule", {}) or {}
    if not isinstance(sched, dict):
        raise ConfigError("schedule must be a mapping")
    row1 = sched.get("row1", [1, 2, 4, 8, 16, 32])
    growth = sched.get("growth", 2)
    if not isinstance(row1, list) or len(row1) != 6 or not all(isinstance(x, int) and not isinstance(x, bool) for x in row1):
        raise ConfigError("schedule.row1 must list six integers (m, n, k, l, s, t)")
    if isinstance(growth, bool) or not isinstance(growth, int):
        raise ConfigError("schedule.growth must be an integer")
    J = _int(raw, "J", 3, 0)
    problems = ExponentSchedule((tuple(row1),), growth).problems()
    if problems:
        raise ConfigError(f"schedule invariant violated: {problems[0]}")
    max_esc = _int(sched, "max_escalations", 4, 0)

    basis = raw.get("basis")
    if basis is not None:
        if not (isinstance(basis, list) and len(basis) == 2):
            raise ConfigError("basis must list two words")
        basis = tuple(str(x) for x in basis)
        for w in basis:
            bad = set(w) - set(alphabet(2))
            if bad:
                raise ConfigError(f"basis word {w!r} uses letters outside a, b, A, B")

    t = tuple(_fraction(x) for x in raw.get("t", ["1", "1/2", "1/4"]))

    reps = raw.get("reps")
    if reps is not None:
        if not isinstance(reps, list) or len(reps) != model.K:
            raise ConfigError("reps must give one element of N per element of Q")
        try:
            reps = [ProductWord.parse(str(x), model.n_factors, model.rank) for x in reps]
            model = model.with_reps(reps)
        except ValueError as exc:
            raise ConfigError(f"coset representatives: {exc}") from exc

    out = raw.get("output", {}) or {}
    settings = PipelineSettings(
        model=model,
        row1=tuple(row1),
        growth=growth,
        max_escalations=max_esc,
        J=J,
        W=_int(raw, "W", 1, 1),
        probe_cap=_int(raw, "probe_cap", 20, 2),
        budget=_int(raw, "budget", 2000, 1),
        seed=_int(raw, "seed", 0, 0),
        power_cap=_int(raw, "power_cap", 8, 1),
        a_max=_int(raw, "a_max", 64, 1),
        basis=basis,
        require_commutator=bool(raw.get("require_commutator", True)),
        t=t,
    )
    _refresh_echo(settings, raw)
    return CliConfig(settings, out.get("report"), out.get("csv"), source)


def _refresh_echo(settings: PipelineSettings, raw: dict) -> None:
    echo = {k: raw[k] for k in sorted(raw) if k != "output"}
    echo["J"] = settings.J
    echo["W"] = settings.W
    echo["budget"] = settings.budget
    echo["probe_cap"] = settings.probe_cap
    echo["seed"] = settings.seed
    echo["t"] = [str(x) for x in settings.t]
    settings.echo = echo


def apply_overrides(cfg: CliConfig, **over: Any) -> CliConfig:
    """Replace settings from command-line flags (``None`` leaves a value alone)."""
    s = cfg.settings
    for key, val in over.items():
        if val is None:
            continue
        if key in ("J", "W", "seed", "budget", "probe_cap"):
            lo = {"J": 0, "W": 1, "seed": 0, "budget": 1, "probe_cap": 2}[key]
            if val < lo:
                raise ConfigError(f"{key} must be at least {lo}")
        setattr(s, key, val)
    echo = dict(s.echo)
    for key in ("J", "W", "seed", "budget", "probe_cap"):
        echo[key] = getattr(s, key)
    s.echo = echo
    return cfg


def load_config(path: str | Path) -> CliConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    return parse_config(raw, str(p))
