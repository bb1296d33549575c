"""Geometry of the Cayley tree of F_r and of isometric actions on it.

Vertices are group elements (``ReducedWord``), with ``g`` acting by left
multiplication.  A ``TreeAction`` turns elements of some group N into such
left multiplications, so every element is either loxodromic (non-trivial
image) or elliptic (trivial image).

Equivalence ``g ~ h`` is decided by comparing oriented primitive roots:
segments of two axes that stay Hausdorff close rel endpoints share a
common oriented subsegment of almost the same length, and two periodic
bi-infinite words with arbitrarily long common oriented subwords have
conjugate primitive periods (Fine and Wilf).  This assumes the acting
group surjects onto F_r, which holds for every action built in this
package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable

from .folding import fold_subgroup
from .words import CyclicWord, ReducedWord, cyclic_equal, cyclic_reduce, primitive_root

__all__ = [
    "NotLoxodromic",
    "SearchExhausted",
    "UNBOUNDED",
    "TreeAction",
    "left_multiplication",
    "Axis",
    "Ray",
    "BoundaryPair",
    "geodesic",
    "axis_of",
    "boundary_pair",
    "project_to_axis",
    "project_end_to_axis",
    "projection_diameter",
    "translate_axis",
    "sim_equivalent",
    "stab_membership",
    "independence_check",
    "good_basis",
    "ray_agreement_depth",
]

# Sentinel for a closest-point projection of infinite diameter.
UNBOUNDED = math.inf


class NotLoxodromic(ValueError):
    pass


class SearchExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class TreeAction:
    """An action of a group N on the Cayley tree of F_rank.

    ``image`` sends an element of N to the word it left-multiplies by.
    """

    name: str
    image: Callable[[Any], ReducedWord]
    rank: int = 2

    def element_image(self, n: Any) -> ReducedWord:
        w = self.image(n)
        if w.rank != self.rank:
            raise ValueError(f"action {self.name!r} produced a rank-{w.rank} word")
        return w

    def apply(self, n: Any, v: ReducedWord) -> ReducedWord:
        return self.element_image(n) * v

    def is_loxodromic(self, n: Any) -> bool:
        return not self.element_image(n).is_identity()


def left_multiplication(rank: int = 2) -> TreeAction:
    """F_r acting on its own Cayley tree."""
    return TreeAction("left", lambda w: w, rank)


def _image(g: Any, act: TreeAction | None) -> ReducedWord:
    if act is None:
        if not isinstance(g, ReducedWord):
            raise TypeError("an action is required for non-word elements")
        return g
    return act.element_image(g)


def geodesic(x: ReducedWord, y: ReducedWord) -> list[ReducedWord]:
    """Vertex path from ``x`` to ``y``; it has ``|x^-1 y| + 1`` vertices."""
    step = x.inverse() * y
    return [x * step.prefix(i) for i in range(len(step) + 1)]


def distance(x: ReducedWord, y: ReducedWord) -> int:
    return len(x.inverse() * y)


@dataclass(frozen=True)
class Axis:
    conjugator: ReducedWord
    period: CyclicWord

    @property
    def translation_length(self) -> int:
        return len(self.period)

    def point(self, k: int) -> ReducedWord:
        """Vertex at signed position ``k`` along the axis (0 is the conjugator)."""
        p = self.period.letters
        if k >= 0:
            s = (p * (k // len(p) + 1))[:k]
        else:
            q = p[::-1].swapcase()
            s = (q * (-k // len(q) + 1))[:-k]
        return self.conjugator * ReducedWord._trusted(s, self.conjugator.rank)

    def window(self, radius: int) -> list[ReducedWord]:
        return [self.point(k) for k in range(-radius, radius + 1)]

    def contains(self, v: ReducedWord) -> bool:
        return project_to_axis(v, self) == v


@dataclass(frozen=True)
class Ray:
    """The boundary point ``prefix * repeat^inf``, held in normal form.

    Normal form: ``repeat`` is primitive, ``prefix * repeat`` reads reduced
    forever, and ``prefix`` is as short as possible.  Two rays define the
    same end exactly when their normal forms agree.
    """

    prefix: str
    repeat: str
    rank: int = 2

    @classmethod
    def make(cls, prefix: ReducedWord | str, repeat: CyclicWord | str, rank: int = 2) -> "Ray":
        p = prefix.letters if isinstance(prefix, ReducedWord) else prefix
        r = repeat.letters if isinstance(repeat, CyclicWord) else repeat
        if isinstance(prefix, ReducedWord):
            rank = prefix.rank
        if not r:
            raise ValueError("a ray needs a non-empty repeat")
        # Cancel the prefix against the periodic tail.
        i = len(p)
        while i and p[i - 1] == r[0].swapcase():
            i -= 1
            r = r[1:] + r[0]
        p = p[:i]
        r, _ = primitive_root(CyclicWord._trusted(r, rank))
        r = r.letters
        # Absorb the end of the prefix into the period.
        i = len(p)
        while i and p[i - 1] == r[-1]:
            i -= 1
            r = r[-1] + r[:-1]
        return cls(p[:i], r, rank)

    def __str__(self) -> str:
        return f"{self.prefix}|({self.repeat})^inf"

    @classmethod
    def parse(cls, text: str, rank: int = 2) -> "Ray":
        prefix, _, rest = text.partition("|")
        if not (rest.startswith("(") and rest.endswith(")^inf")):
            raise ValueError(f"cannot parse ray {text!r}")
        return cls.make(ReducedWord(prefix, rank), rest[1:-5], rank)

    def letters(self, n: int) -> str:
        """First ``n`` letters of the infinite reduced word."""
        p, r = self.prefix, self.repeat
        if n <= len(p):
            return p[:n]
        k = n - len(p)
        return p + (r * (k // len(r) + 1))[:k]

    def translate(self, w: ReducedWord) -> "Ray":
        return Ray.make((w * ReducedWord._trusted(self.prefix, self.rank)), self.repeat, self.rank)


def ray_agreement_depth(r1: Ray, r2: Ray) -> float:
    """Length of the common prefix of two rays (``inf`` when they are equal)."""
    if r1 == r2:
        return math.inf
    # Distinct eventually periodic words differ within this many letters.
    n = max(len(r1.prefix), len(r2.prefix)) + len(r1.repeat) + len(r2.repeat) + 1
    a, b = r1.letters(n), r2.letters(n)
    for i in range(n):
        if a[i] != b[i]:
            return i
    return n


@dataclass(frozen=True)
class BoundaryPair:
    minus: Ray
    plus: Ray

    def translate(self, w: ReducedWord) -> "BoundaryPair":
        return BoundaryPair(self.minus.translate(w), self.plus.translate(w))

    def as_set(self) -> frozenset[Ray]:
        return frozenset((self.minus, self.plus))

    def __str__(self) -> str:
        return f"({self.minus}, {self.plus})"


def axis_of(g: Any, act: TreeAction | None = None) -> Axis:
    w = _image(g, act)
    conj, core = cyclic_reduce(w)
    if core is None:
        raise NotLoxodromic(f"{g!r} acts elliptically")
    return Axis(conj, core)


def boundary_pair(g: Any, act: TreeAction | None = None) -> BoundaryPair:
    ax = axis_of(g, act)
    c = ax.conjugator
    return BoundaryPair(
        minus=Ray.make(c, ax.period.inverse()),
        plus=Ray.make(c, ax.period),
    )


def _common_prefix(s: str, t: str) -> int:
    n = min(len(s), len(t))
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if s[:mid] == t[:mid]:
            lo = mid
        else:
            hi = mid - 1
    return lo


def project_to_axis(x: ReducedWord, A: Axis) -> ReducedWord:
    """Closest vertex of ``A`` to ``x``."""
    c = A.conjugator
    rel = (c.inverse() * x).letters
    p = A.period.letters
    reps = len(rel) // len(p) + 1
    fwd = _common_prefix(rel, p * reps)
    if fwd:
        return c * ReducedWord._trusted(rel[:fwd], x.rank)
    q = p[::-1].swapcase()
    bwd = _common_prefix(rel, q * reps)
    return c * ReducedWord._trusted(rel[:bwd], x.rank)


def project_end_to_axis(ray: Ray, A: Axis) -> ReducedWord | None:
    """Where the geodesic towards ``ray`` leaves ``A``; None if ``ray`` is an end of ``A``."""
    c = A.conjugator
    rel = ray.translate(c.inverse())
    p = A.period.letters
    q = p[::-1].swapcase()
    ends = (Ray.make("", p, ray.rank), Ray.make("", q, ray.rank))
    if rel in ends:
        return None
    depth = max(int(ray_agreement_depth(rel, e)) for e in ends)
    return c * ReducedWord._trusted(rel.letters(depth), ray.rank)


def translate_axis(A: Axis, g: ReducedWord) -> Axis:
    """The axis ``g . A`` (the axis of ``g h g^-1`` when ``A`` is the axis of ``h``)."""
    word = g * A.conjugator * A.period.as_word() * A.conjugator.inverse() * g.inverse()
    return axis_of(word)


def projection_diameter(A: Axis, B: Axis) -> float:
    """Diameter of the closest-point projection of ``B`` onto ``A``.

    In a tree this is the length of ``A ∩ B`` (0 when they are disjoint),
    and ``UNBOUNDED`` when they share an end.
    """
    c = B.conjugator
    ends = (Ray.make(c, B.period), Ray.make(c, B.period.inverse()))
    feet = [project_end_to_axis(r, A) for r in ends]
    if feet[0] is None or feet[1] is None:
        return UNBOUNDED
    return distance(feet[0], feet[1])


def sim_equivalent(g: Any, h: Any, act: TreeAction | None = None) -> bool:
    ax_g = axis_of(g, act)
    ax_h = axis_of(h, act)
    root_g, _ = primitive_root(ax_g.period)
    root_h, _ = primitive_root(ax_h.period)
    return cyclic_equal(root_g, root_h)


def stab_membership(gamma: Any, P: BoundaryPair, act: TreeAction | None = None) -> bool:
    """Whether ``gamma`` fixes both ends of the ordered pair ``P``."""
    w = _image(gamma, act)
    return P.minus.translate(w) == P.minus and P.plus.translate(w) == P.plus


def fixes_ray(gamma: Any, ray: Ray, act: TreeAction | None = None) -> bool:
    return ray.translate(_image(gamma, act)) == ray


def independence_check(h: Any, k: Any, act: TreeAction | None = None) -> bool:
    """Whether ``h`` and ``k h k^-1`` have disjoint endpoint sets."""
    P = boundary_pair(h, act)
    moved = P.translate(_image(k, act))
    return not (P.as_set() & moved.as_set())


def folded_rank(words: Iterable[ReducedWord]) -> int:
    return fold_subgroup(list(words)).rank


def good_basis(
    g1: Any,
    h1: Any,
    actions: list[TreeAction],
    a_max: int = 64,
) -> tuple[Any, Any, int]:
    """Replace ``h1`` by ``g1^a h1 g1^-a h1^-1`` for the least workable ``a >= 1``.

    Workable means: under every action in which the pair is not elliptic,
    ``g1`` is inequivalent to the new ``h1`` and to its inverse, and the
    images of the pair still fold to rank 2.  ``actions[0]`` is the base
    action, under which ``(g1, h1)`` must be a free basis.
    """
    if not actions:
        raise ValueError("good_basis needs at least the base action")
    base = actions[0]
    if folded_rank([base.element_image(g1), base.element_image(h1)]) != 2:
        raise ValueError("(g1, h1) is not a free basis of a rank-2 subgroup")
    live = []
    for act in actions:
        ig, ih = act.element_image(g1), act.element_image(h1)
        if ig.is_identity() and ih.is_identity():
            continue
        live.append(act)
    for a in range(1, a_max + 1):
        h_new = (g1 ** a) * h1 * (g1 ** -a) * h1.inverse()
        ok = True
        for act in live:
            ig, ih = act.element_image(g1), act.element_image(h_new)
            if folded_rank([ig, ih]) != 2:
                ok = False
                break
            if sim_equivalent(ig, ih) or sim_equivalent(ig, ih.inverse()):
                ok = False
                break
        if ok:
            return g1, h_new, a
    raise SearchExhausted(f"no exponent a <= {a_max} yields a good basis")
