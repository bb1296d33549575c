"""Counting quasimorphisms on Cayley-tree models.

``c_w(x, y) = d(x, y) - min over paths alpha of (|alpha| - W * copies)``,
where copies are non-overlapping translates of the oriented path ``w``
inside ``alpha``, and ``h_w = c_w - c_wbar``.

Every action used here surjects onto the acting free group, so the
translates of ``w`` are exactly the paths carrying its label.

For ``W = 1`` no detour off the geodesic ever pays: retracting a path onto
``[x, y]`` removes at least one edge for each copy it destroys, and on the
segment itself backtracking costs more than any copies it can add.  The
value is then ``W`` times the greedy count of the label in the geodesic.
Larger weights go through the radius-stabilised shortcut search.
"""
from __future__ import annotations

import csv
import math
import random
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .spaces import AugmentedSearchProblem, RadiusTooSmall, min_cost_path
from .tree import TreeAction, axis_of, left_multiplication, project_to_axis
from .words import ReducedWord

__all__ = [
    "PowerTooSmall",
    "PowerSearchExhausted",
    "QmSpec",
    "QmFunction",
    "count_copies",
    "c_w",
    "h_w",
    "make_axis_word",
    "choose_powers",
    "initial_power",
    "empirical_defect",
    "DefectEstimate",
    "write_csv",
]

# The evaluation cache is least-recently-used, bounded by total key letters.
CACHE_LETTER_BUDGET = 20_000_000


class PowerTooSmall(ValueError):
    pass


class PowerSearchExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class QmSpec:
    w: ReducedWord
    W: int = 1
    x0: ReducedWord | None = None
    start: ReducedWord | None = None
    action: TreeAction | None = None
    max_radius: int = 16

    def __post_init__(self) -> None:
        rank = self.w.rank
        if self.W < 1:
            raise ValueError("W must be a positive integer")
        if len(self.w) < 2 * self.W:
            raise ValueError(f"|w| = {len(self.w)} is below 2W = {2 * self.W}")
        if self.x0 is None:
            object.__setattr__(self, "x0", ReducedWord.identity(rank))
        if self.start is None:
            object.__setattr__(self, "start", self.x0)
        if self.action is None:
            object.__setattr__(self, "action", left_multiplication(rank))

    def reversed(self) -> "QmSpec":
        """The spec of ``wbar``: the same path walked backwards."""
        return QmSpec(
            w=self.w.inverse(),
            W=self.W,
            x0=self.x0,
            start=self.start * self.w,
            action=self.action,
            max_radius=self.max_radius,
        )


def _label(alpha: str | ReducedWord | Sequence[ReducedWord]) -> str:
    if isinstance(alpha, str):
        return alpha
    if isinstance(alpha, ReducedWord):
        return alpha.letters
    out = []
    for u, v in zip(alpha, alpha[1:]):
        step = (u.inverse() * v).letters
        if len(step) != 1:
            raise ValueError("consecutive path vertices must be adjacent")
        out.append(step)
    return "".join(out)


def count_copies(alpha: str | ReducedWord | Sequence[ReducedWord], w: ReducedWord | str) -> int:
    """Maximum number of non-overlapping subpaths of ``alpha`` labelled ``w``.

    ``alpha`` is a path label (a walk, so it may backtrack) or a vertex list.
    All occurrences have the same length, so taking them leftmost-first is
    earliest-end greedy, which is optimal for interval scheduling; that is
    exactly what ``str.count`` does.
    """
    pat = w.letters if isinstance(w, ReducedWord) else w
    if not pat:
        raise ValueError("w must be non-empty")
    return _label(alpha).count(pat)


@dataclass
class _Eval:
    value: int
    path_length: int


def _c_w_eval(x: ReducedWord, y: ReducedWord, w: ReducedWord, W: int, max_radius: int) -> _Eval:
    g = x.inverse() * y
    d = len(g)
    if d == 0:
        return _Eval(0, 0)
    if W == 1:
        return _Eval(W * g.letters.count(w.letters), d)
    radius = max(1, W)
    prev = None
    while radius <= max_radius:
        res = min_cost_path(AugmentedSearchProblem.on_tree(x, y, w, W, radius))
        # A path of length n holds at most n / |w| copies, and n >= d.
        assert res.cost <= d and res.cost * len(w) >= d * (len(w) - W), (res.cost, d)
        if prev is not None and res.cost == prev.cost:
            return _Eval(d - res.cost, res.length)
        prev = res
        radius *= 2
    raise RadiusTooSmall(f"cost did not stabilise below radius {max_radius}")


def _check_bounds(c: int, d: int, w_len: int, W: int) -> None:
    # Enforced on every evaluation.
    if not 0 <= c <= W * d / w_len + W:
        raise AssertionError(f"c_w = {c} outside [0, W d/|w| + W] for d = {d}, |w| = {w_len}, W = {W}")


def c_w(x: ReducedWord, y: ReducedWord, spec: QmSpec) -> int:
    ev = _c_w_eval(x, y, spec.w, spec.W, spec.max_radius)
    _check_bounds(ev.value, len(x.inverse() * y), len(spec.w), spec.W)
    return ev.value


def h_w(gamma: Any, spec: QmSpec) -> int:
    return QmFunction(spec)(gamma)


class QmFunction:
    """``h_w`` for a fixed spec, with an evaluation cache keyed by the image word."""

    def __init__(self, spec: QmSpec):
        self.spec = spec
        self.wbar = spec.w.inverse()
        self._cache: OrderedDict[str, tuple[int, int]] = OrderedDict()
        self._cached_letters = 0
        # Paths longer than 2d + 12W + 4 are recorded here, not raised.
        self.long_paths: list[tuple[str, int, int]] = []

    def components(self, gamma: Any) -> tuple[int, int]:
        """``(c_w, c_wbar)`` at ``(x0, gamma . x0)``."""
        s = self.spec
        img = s.action.element_image(gamma)
        key = img.letters
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        x = s.x0
        y = img * x
        d = len(x.inverse() * y)
        out = []
        for word in (s.w, self.wbar):
            ev = _c_w_eval(x, y, word, s.W, s.max_radius)
            _check_bounds(ev.value, d, len(word), s.W)
            if ev.path_length > 2 * d + 12 * s.W + 4:
                self.long_paths.append((key[:40], d, ev.path_length))
            out.append(ev.value)
        pair = (out[0], out[1])
        self._remember(key, pair)
        return pair

    def _remember(self, key: str, pair: tuple[int, int]) -> None:
        if len(key) > CACHE_LETTER_BUDGET:
            return
        self._cache[key] = pair
        self._cached_letters += len(key)
        while self._cached_letters > CACHE_LETTER_BUDGET:
            old, _ = self._cache.popitem(last=False)
            self._cached_letters -= len(old)

    def __call__(self, gamma: Any) -> int:
        cw, cbar = self.components(gamma)
        return cw - cbar

    def reversed(self) -> "QmFunction":
        return QmFunction(self.spec.reversed())

    def rows(self, gammas: Iterable[Any], d: int | None = None) -> list[dict]:
        out = []
        for gamma in gammas:
            cw, cbar = self.components(gamma)
            out.append({"gamma": str(gamma), "d": d, "c_w": cw, "c_wbar": cbar, "h_w": cw - cbar})
        return out


def write_csv(rows: Iterable[dict], path, columns: Sequence[str] = ("gamma", "d", "c_w", "c_wbar", "h_w")) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("" if r.get(k) is None else r[k]) for k in columns})


def make_axis_word(
    f: Any,
    d: int,
    act: TreeAction | None = None,
    W: int = 1,
    x0: ReducedWord | None = None,
) -> QmSpec:
    """Spec for ``w(f^d)``: the axis of ``f`` read for ``d`` periods from the foot of ``x0``."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    ax = axis_of(f, act)
    rank = ax.conjugator.rank
    if x0 is None:
        x0 = ReducedWord.identity(rank)
    if act is None:
        act = left_multiplication(rank)
    if d * ax.translation_length < 2 * W:
        raise PowerTooSmall(f"|w(f^{d})| = {d * ax.translation_length} < 2W = {2 * W}")
    start = project_to_axis(x0, ax)
    image = act.element_image(f) ** d
    label = start.inverse() * image * start
    assert len(label) == d * ax.translation_length
    assert project_to_axis(x0, axis_of(image)) == start
    return QmSpec(w=label, W=W, x0=x0, start=start, action=act)


def initial_power(L: int, W: int) -> int:
    return max(1, math.ceil(2 * W / L))


def choose_powers(
    f_list: Sequence[Any],
    act: TreeAction | None,
    W: int = 1,
    check: Callable[[int, int], bool] | None = None,
    cap: int = 8,
) -> list[int]:
    """Least ``d_i >= ceil(2W / L_i)`` accepted by ``check(i, d)``, trying at most ``cap`` values each."""
    out = []
    for i, f in enumerate(f_list):
        L = axis_of(f, act).translation_length
        d = initial_power(L, W)
        for _ in range(cap):
            if check is None or check(i, d):
                break
            d += 1
        else:
            raise PowerSearchExhausted(f"no power for f_{i + 1} within {cap} tries")
        out.append(d)
    return out


@dataclass
class DefectEstimate:
    value: float
    witness: tuple[Any, Any] | None
    samples: int
    note: str = "lower bound from sampling"

    def __float__(self) -> float:
        return float(self.value)


def empirical_defect(
    h: Callable[[Any], float],
    sampler: Callable[[random.Random], tuple[Any, Any]],
    budget: int,
    seed: int = 0,
    mul: Callable[[Any, Any], Any] = lambda u, v: u * v,
) -> DefectEstimate:
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = random.Random(seed)
    best, witness = 0, None
    for _ in range(budget):
        g0, g1 = sampler(rng)
        val = abs(h(g0) - h(mul(g0, g1)) + h(g1))
        if witness is None or val > best:
            best, witness = val, (g0, g1)
    return DefectEstimate(best, witness, budget)
