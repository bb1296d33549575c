"""Split extensions Gamma = N x| Q and the Kaloujnin-Krasner embedding.

N is a direct product of free groups (one factor in Model A, two in
Model B), Q a finite group acting on N by automorphisms.  Elements of
Gamma are pairs ``(n, q)`` with ``(n, q)(n', q') = (n q(n'), q q')``; the
coset of ``(n, q)`` modulo N is ``q``.  Cosets are indexed by Q, and the
representative of coset ``p`` is ``g_p = (nu_p, p)`` (``nu_p`` trivial unless
configured otherwise, and always trivial for the identity coset).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Sequence

from .tree import TreeAction
from .words import ReducedWord, alphabet, random_word

__all__ = [
    "QuotientMismatch",
    "BadIndex",
    "ProductWord",
    "Automorphism",
    "FiniteQuotient",
    "GammaElement",
    "WreathElement",
    "SemidirectModel",
    "wreath_mul",
    "kk_embed",
    "outer_rep",
    "verify_embedding",
    "EmbeddingReport",
    "model_a",
    "model_b",
]


class QuotientMismatch(ValueError):
    pass


class BadIndex(IndexError):
    pass


class ProductWord:
    """An element of F_r x ... x F_r, one reduced word per factor."""

    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[ReducedWord]):
        self.factors = tuple(factors)
        if not self.factors:
            raise ValueError("a product word needs at least one factor")
        if len({f.rank for f in self.factors}) != 1:
            raise ValueError("all factors must have the same rank")

    @classmethod
    def identity(cls, n_factors: int = 1, rank: int = 2) -> "ProductWord":
        return cls([ReducedWord.identity(rank)] * n_factors)

    @classmethod
    def parse(cls, text: str, n_factors: int = 1, rank: int = 2) -> "ProductWord":
        parts = [p.strip() for p in text.split(",")] if text.strip() else [""]
        if len(parts) == 1 and n_factors > 1 and parts[0] in ("", "1", "e"):
            parts = [""] * n_factors
        if len(parts) != n_factors:
            raise ValueError(f"expected {n_factors} comma-separated factors in {text!r}")
        return cls([ReducedWord.parse(p, rank) for p in parts])

    @classmethod
    def embed(cls, w: ReducedWord, k: int = 0, n_factors: int = 1) -> "ProductWord":
        fs = [ReducedWord.identity(w.rank)] * n_factors
        fs[k] = w
        return cls(fs)

    @property
    def rank(self) -> int:
        return self.factors[0].rank

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    def __len__(self) -> int:
        return sum(len(f) for f in self.factors)

    def __str__(self) -> str:
        return ",".join(f.letters or "1" for f in self.factors)

    def __repr__(self) -> str:
        return f"ProductWord({str(self)[:60]!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProductWord):
            return NotImplemented
        return self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __mul__(self, other: "ProductWord") -> "ProductWord":
        if not isinstance(other, ProductWord):
            return NotImplemented
        if self.n_factors != other.n_factors:
            raise ValueError("factor counts differ")
        return ProductWord([u * v for u, v in zip(self.factors, other.factors)])

    def inverse(self) -> "ProductWord":
        return ProductWord([f.inverse() for f in self.factors])

    def __pow__(self, e: int) -> "ProductWord":
        return ProductWord([f ** e for f in self.factors])

    def is_identity(self) -> bool:
        return all(f.is_identity() for f in self.factors)


class Automorphism:
    """An endomorphism of N given by the images of the generators ``(factor, letter)``.

    When every generator goes to a single letter (or the identity) the map
    is applied with ``str.translate``; otherwise images are concatenated
    and reduced.
    """

    def __init__(self, images: Mapping[tuple[int, str], ProductWord], n_factors: int, rank: int):
        self.n_factors = n_factors
        self.rank = rank
        self.images: dict[tuple[int, str], ProductWord] = {}
        for k in range(n_factors):
            for x in alphabet(rank)[:rank]:
                img = images.get((k, x))
                if img is None:
                    raise ValueError(f"no image for generator {x} of factor {k + 1}")
                self.images[(k, x)] = img
        self._fast = self._build_fast()

    def _build_fast(self):
        # tables[k][j] translates factor k into factor j; clean[k][j] says the
        # translation is a bijection on letters, so reduced words stay reduced.
        tables, clean = [], []
        for k in range(self.n_factors):
            row = [dict() for _ in range(self.n_factors)]
            for x in alphabet(self.rank)[: self.rank]:
                img = self.images[(k, x)]
                nonzero = [j for j, f in enumerate(img.factors) if not f.is_identity()]
                if len(nonzero) > 1:
                    return None
                for j in range(self.n_factors):
                    row[j][ord(x)] = None
                    row[j][ord(x.upper())] = None
                if nonzero:
                    j = nonzero[0]
                    letters = img.factors[j].letters
                    if len(letters) != 1:
                        return None
                    row[j][ord(x)] = letters
                    row[j][ord(x.upper())] = letters.swapcase()
            tables.append(row)
            clean.append([len({v for v in t.values() if v}) == 2 * self.rank for t in row])
        return tables, clean

    def __call__(self, n: ProductWord) -> ProductWord:
        if n.n_factors != self.n_factors:
            raise ValueError("factor count mismatch")
        if self._fast is not None:
            tables, clean = self._fast
            out = []
            for j in range(self.n_factors):
                parts = [(k, f.letters.translate(tables[k][j])) for k, f in enumerate(n.factors) if f.letters]
                parts = [(k, s) for k, s in parts if s]
                if not parts:
                    out.append(ReducedWord.identity(self.rank))
                elif len(parts) == 1 and clean[parts[0][0]][j]:
                    out.append(ReducedWord._trusted(parts[0][1], self.rank))
                else:
                    out.append(ReducedWord("".join(s for _, s in parts), self.rank))
            return ProductWord(out)
        out = ProductWord.identity(self.n_factors, self.rank)
        for k, f in enumerate(n.factors):
            chunks = [[] for _ in range(self.n_factors)]
            for ch in f.letters:
                img = self.images[(k, ch.lower())]
                if ch.isupper():
                    img = img.inverse()
                for j, g in enumerate(img.factors):
                    chunks[j].append(g.letters)
            out = out * ProductWord([ReducedWord("".join(c), self.rank) for c in chunks])
        return out

    def compose(self, other: "Automorphism") -> "Automorphism":
        """``self o other``."""
        return Automorphism({key: self(img) for key, img in other.images.items()}, self.n_factors, self.rank)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.images == other.images

    @classmethod
    def identity(cls, n_factors: int, rank: int) -> "Automorphism":
        return cls(
            {(k, x): ProductWord.embed(ReducedWord(x, rank), k, n_factors) for k in range(n_factors) for x in alphabet(rank)[:rank]},
            n_factors,
            rank,
        )


@dataclass
class FiniteQuotient:
    names: list[str]
    table: list[list[int]]
    actions: list[Automorphism]
    identity: int = 0

    @property
    def order(self) -> int:
        return len(self.names)

    def mul(self, p: int, q: int) -> int:
        return self.table[p][q]

    def inv(self, p: int) -> int:
        for q in range(self.order):
            if self.table[p][q] == self.identity:
                return q
        raise ValueError(f"{self.names[p]} has no inverse")

    def problems(self, samples: int = 1000, seed: int = 0) -> list[str]:
        """Violated quotient invariants, named; empty when the table is valid."""
        K = self.order
        out = []
        if len(self.table) != K or any(len(r) != K for r in self.table):
            return ["quotient table is not square of size |Q|"]
        if any(not 0 <= x < K for r in self.table for x in r):
            return ["quotient table has out-of-range entries"]
        if len(self.actions) != K:
            return ["every element of Q needs an automorphism"]
        e = self.identity
        if any(self.table[e][p] != p or self.table[p][e] != p for p in range(K)):
            out.append("identity law of Q")
        for p in range(K):
            if not any(self.table[p][q] == e for q in range(K)):
                out.append(f"inverse law of Q at {self.names[p]}")
        for p, q, r in itertools.product(range(K), repeat=3):
            if self.table[self.table[p][q]][r] != self.table[p][self.table[q][r]]:
                out.append("associativity of Q")
                break
        act0 = self.actions[0]
        ident = Automorphism.identity(act0.n_factors, act0.rank)
        if self.actions[e] != ident:
            out.append("identity of Q must act trivially")
        for p, q in itertools.product(range(K), repeat=2):
            if self.actions[self.table[p][q]] != self.actions[p].compose(self.actions[q]):
                out.append(f"action is not a homomorphism at ({self.names[p]}, {self.names[q]})")
                break
        rng = random.Random(seed)
        for _ in range(samples):
            u = _random_product(rng, act0.n_factors, act0.rank, 6)
            v = _random_product(rng, act0.n_factors, act0.rank, 6)
            bad = [p for p in range(K) if self.actions[p](u * v) != self.actions[p](u) * self.actions[p](v)]
            if bad:
                out.append(f"action of {self.names[bad[0]]} is not multiplicative")
                break
        return out


def _random_product(rng: random.Random, n_factors: int, rank: int, max_len: int) -> ProductWord:
    return ProductWord([random_word(rng, rng.randint(0, max_len), rank) for _ in range(n_factors)])


@dataclass(frozen=True)
class GammaElement:
    n: ProductWord
    q: int
    model: "SemidirectModel | None" = field(default=None, compare=False, repr=False)

    def __mul__(self, other: "GammaElement") -> "GammaElement":
        if self.model is None:
            raise ValueError("element is not attached to a model")
        return self.model.mul(self, other)

    def inverse(self) -> "GammaElement":
        return self.model.inverse(self)

    def __str__(self) -> str:
        qname = self.model.quotient.names[self.q] if self.model else str(self.q)
        return f"({self.n};{qname})"


@dataclass(frozen=True)
class WreathElement:
    rho: tuple[ProductWord, ...]
    phi: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.phi) != list(range(len(self.phi))):
            raise ValueError("phi must be a permutation of Q")
        if len(self.rho) != len(self.phi):
            raise ValueError("rho and phi must be indexed by the same Q")


def wreath_mul(x: WreathElement, y: WreathElement) -> WreathElement:
    """``(rho, phi)(sigma, psi) = (B -> rho(B) sigma(phi(B)), B -> psi(phi(B)))``."""
    if len(x.phi) != len(y.phi):
        raise QuotientMismatch("wreath elements over different quotients")
    rho = tuple(x.rho[B] * y.rho[x.phi[B]] for B in range(len(x.phi)))
    phi = tuple(y.phi[x.phi[B]] for B in range(len(x.phi)))
    return WreathElement(rho, phi)


@dataclass
class SemidirectModel:
    name: str
    n_factors: int
    rank: int
    quotient: FiniteQuotient
    F_basis: tuple[ProductWord, ProductWord]
    base_factor: int = 0
    reps: list[ProductWord] | None = None  # nu_p; identity when None

    def __post_init__(self) -> None:
        K = self.quotient.order
        if self.reps is None:
            self.reps = [ProductWord.identity(self.n_factors, self.rank)] * K
        if len(self.reps) != K:
            raise ValueError("one coset representative per element of Q")
        if not self.reps[self.quotient.identity].is_identity():
            raise ValueError("the identity coset must use the identity representative")

    @property
    def K(self) -> int:
        return self.quotient.order

    def element(self, n: ProductWord | str, q: int | str = 0) -> GammaElement:
        if isinstance(n, str):
            n = ProductWord.parse(n, self.n_factors, self.rank)
        if isinstance(q, str):
            q = self.quotient.names.index(q)
        return GammaElement(n, q, self)

    def from_n(self, n: ProductWord) -> GammaElement:
        return GammaElement(n, self.quotient.identity, self)

    def identity(self) -> GammaElement:
        return self.from_n(ProductWord.identity(self.n_factors, self.rank))

    def mul(self, x: GammaElement, y: GammaElement) -> GammaElement:
        Q = self.quotient
        return GammaElement(x.n * Q.actions[x.q](y.n), Q.mul(x.q, y.q), self)

    def inverse(self, x: GammaElement) -> GammaElement:
        qi = self.quotient.inv(x.q)
        return GammaElement(self.quotient.actions[qi](x.n.inverse()), qi, self)

    def rep(self, p: int) -> GammaElement:
        return GammaElement(self.reps[p], p, self)

    def coset(self, mu: GammaElement) -> int:
        return mu.q

    def kk_embed(self, mu: GammaElement) -> WreathElement:
        rho, phi = [], []
        for p in range(self.K):
            target = self.quotient.mul(p, mu.q)
            g = self.mul(self.mul(self.rep(p), mu), self.inverse(self.rep(target)))
            assert g.q == self.quotient.identity, "rho value left N"
            rho.append(g.n)
            phi.append(target)
        return WreathElement(tuple(rho), tuple(phi))

    def outer_rep(self, kappa: int, n: ProductWord) -> ProductWord:
        """``i_kappa(n) = g_kappa n g_kappa^-1`` for ``kappa`` in ``1..K``."""
        if not 1 <= kappa <= self.K:
            raise BadIndex(f"kappa must be in 1..{self.K}, got {kappa}")
        g = self.rep(kappa - 1)
        out = self.mul(self.mul(g, self.from_n(n)), self.inverse(g))
        return out.n

    def base_image(self, n: ProductWord) -> ReducedWord:
        return n.factors[self.base_factor]

    def action(self, kappa: int) -> TreeAction:
        """``N`` acting on the tree through ``i_kappa`` followed by the base action."""
        if not 1 <= kappa <= self.K:
            raise BadIndex(f"kappa must be in 1..{self.K}, got {kappa}")
        return TreeAction(
            f"{self.name}:{kappa}",
            lambda n, k=kappa: self.base_image(self.outer_rep(k, n)),
            self.rank,
        )

    def actions(self) -> list[TreeAction]:
        return [self.action(k) for k in range(1, self.K + 1)]

    def generators(self) -> list[GammaElement]:
        """Generators of N (both signs) followed by the non-identity elements of Q."""
        gens = []
        for k in range(self.n_factors):
            for x in alphabet(self.rank):
                gens.append(self.from_n(ProductWord.embed(ReducedWord(x, self.rank), k, self.n_factors)))
        for q in range(self.K):
            if q != self.quotient.identity:
                gens.append(GammaElement(ProductWord.identity(self.n_factors, self.rank), q, self))
        return gens

    def ball(self, length: int) -> list[GammaElement]:
        """Distinct elements that are products of at most ``length`` generators."""
        gens = self.generators()
        seen = {self.identity(): None}
        frontier = [self.identity()]
        for _ in range(length):
            nxt = []
            for g in frontier:
                for s in gens:
                    h = self.mul(g, s)
                    if h not in seen:
                        seen[h] = None
                        nxt.append(h)
            frontier = nxt
        return list(seen)

    def random_element(self, rng: random.Random, max_len: int = 8) -> GammaElement:
        n = _random_product(rng, self.n_factors, self.rank, max_len)
        return GammaElement(n, rng.randrange(self.K), self)

    def with_reps(self, reps: list[ProductWord]) -> "SemidirectModel":
        return SemidirectModel(self.name, self.n_factors, self.rank, self.quotient, self.F_basis, self.base_factor, reps)


def kk_embed(mu: GammaElement) -> WreathElement:
    if mu.model is None:
        raise ValueError("element is not attached to a model")
    return mu.model.kk_embed(mu)


def outer_rep(model: SemidirectModel, kappa: int, n: ProductWord) -> ProductWord:
    return model.outer_rep(kappa, n)


@dataclass
class EmbeddingReport:
    passed: bool
    homomorphism_checks: int = 0
    injectivity_checks: int = 0
    kernel_checks: int = 0
    counterexamples: list[str] = field(default_factory=list)


def verify_embedding(
    model: SemidirectModel,
    sample_size: int = 1000,
    seed: int = 0,
    exhaustive_length: int = 0,
    max_counterexamples: int = 5,
) -> EmbeddingReport:
    """Check that theta is an injective homomorphism, on a ball and on random pairs."""
    if sample_size < 1:
        raise ValueError("sample_size must be at least 1")
    rep = EmbeddingReport(passed=True)
    rng = random.Random(seed)

    def fail(msg: str) -> None:
        rep.passed = False
        if len(rep.counterexamples) < max_counterexamples:
            rep.counterexamples.append(msg)

    ball = model.ball(exhaustive_length) if exhaustive_length > 0 else [model.identity()]
    theta = {g: model.kk_embed(g) for g in ball}
    pairs: Iterator[tuple[GammaElement, GammaElement]] = itertools.product(ball, repeat=2)
    randoms = [(model.random_element(rng), model.random_element(rng)) for _ in range(sample_size)]
    for mu, nu in itertools.chain(pairs, randoms):
        tm = theta.get(mu) or model.kk_embed(mu)
        tn = theta.get(nu) or model.kk_embed(nu)
        rep.homomorphism_checks += 1
        if model.kk_embed(model.mul(mu, nu)) != wreath_mul(tm, tn):
            fail(f"theta({mu} {nu}) != theta({mu}) theta({nu})")
    # Injectivity: distinct elements must have distinct images.
    images: dict[WreathElement, GammaElement] = {}
    for g in itertools.chain(ball, (x for pair in randoms for x in pair)):
        t = theta.get(g) or model.kk_embed(g)
        rep.injectivity_checks += 1
        other = images.setdefault(t, g)
        if other != g:
            fail(f"theta({g}) == theta({other})")
    # Kernel argument: phi trivial exactly on N, where rho at the identity coset is mu.
    ident_perm = tuple(range(model.K))
    e = model.quotient.identity
    for g in itertools.chain(ball, (x for pair in randoms for x in pair)):
        t = theta.get(g) or model.kk_embed(g)
        rep.kernel_checks += 1
        in_n = g.q == e
        if (t.phi == ident_perm) != in_n:
            fail(f"phi of {g} trivial iff in N fails")
        elif in_n and t.rho[e] != g.n:
            fail(f"rho({g})(B_1) != {g.n}")
    return rep


def _swap_quotient(action: Automorphism, n_factors: int, rank: int) -> FiniteQuotient:
    return FiniteQuotient(
        names=["1", "s"],
        table=[[0, 1], [1, 0]],
        actions=[Automorphism.identity(n_factors, rank), action],
    )


def model_a() -> SemidirectModel:
    """N = F_2, Q = Z/2 acting by a <-> b, acting on the Cayley tree of N."""
    w = lambda s: ProductWord([ReducedWord(s)])
    sigma = Automorphism({(0, "a"): w("b"), (0, "b"): w("a")}, 1, 2)
    return SemidirectModel(
        name="A",
        n_factors=1,
        rank=2,
        quotient=_swap_quotient(sigma, 1, 2),
        F_basis=(w("a"), w("b")),
    )


def model_b() -> SemidirectModel:
    """N = F_2 x F_2, Q = Z/2 swapping the factors; N acts through the first factor."""
    pw = lambda u, v: ProductWord([ReducedWord(u), ReducedWord(v)])
    sigma = Automorphism(
        {(0, "a"): pw("", "a"), (0, "b"): pw("", "b"), (1, "a"): pw("a", ""), (1, "b"): pw("b", "")},
        2,
        2,
    )
    return SemidirectModel(
        name="B",
        n_factors=2,
        rank=2,
        quotient=_swap_quotient(sigma, 2, 2),
        F_basis=(pw("a", ""), pw("b", "")),
    )
