"""Free-group word algebra.

Words are stored as strings over ``a, b, c, ...`` (generators) and
``A, B, C, ...`` (their inverses).  Everything here is immutable, and the
hot paths (inversion, powers, the cancellation at a product junction,
rotation tests) are string operations so that words with millions of
letters stay cheap.
"""
from __future__ import annotations

import random
import string
from functools import cached_property
from typing import Iterable, Iterator, Sequence

__all__ = [
    "InvalidLetter",
    "RankMismatch",
    "EmptyWord",
    "ReducedWord",
    "CyclicWord",
    "reduce",
    "multiply",
    "cyclic_reduce",
    "primitive_root",
    "cyclic_equal",
    "exponent_sums",
    "alphabet",
    "random_word",
    "words_of_length",
    "words_up_to",
    "cyclically_reduced_words",
]

MAX_RANK = 26


class InvalidLetter(ValueError):
    pass


class RankMismatch(ValueError):
    pass


class EmptyWord(ValueError):
    pass


def alphabet(rank: int) -> str:
    """Generators followed by their inverses, e.g. ``"abAB"`` for rank 2."""
    if not 1 <= rank <= MAX_RANK:
        raise ValueError(f"rank must be in 1..{MAX_RANK}, got {rank}")
    gens = string.ascii_lowercase[:rank]
    return gens + gens.upper()


def _inv_str(s: str) -> str:
    return s[::-1].swapcase()


def _free_reduce(s: str) -> str:
    out: list[str] = []
    for ch in s:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def _cancel_length(u: str, v: str) -> int:
    # Largest k with u[-k:] inverse to v[:k].  Cancellation is prefix-closed,
    # so gallop to a failing length, then binary search below it.  Typical
    # cancellations are short, and this keeps the slices short too.
    hi = min(len(u), len(v))
    if hi == 0 or u[-1] != v[0].swapcase():
        return 0
    lo, step = 1, 2
    while True:
        probe = min(step, hi)
        if u[-probe:] != _inv_str(v[:probe]):
            hi = probe - 1
            break
        lo = probe
        if probe == hi:
            return lo
        step *= 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if u[-mid:] == _inv_str(v[:mid]):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _join(u: str, v: str) -> str:
    k = _cancel_length(u, v)
    if k == 0:
        return u + v
    return u[: len(u) - k] + v[k:]


def _check_letters(s: str, rank: int) -> None:
    allowed = alphabet(rank)
    bad = set(s) - set(allowed)
    if bad:
        raise InvalidLetter(f"letters {sorted(bad)} not in alphabet {allowed!r}")


class ReducedWord:
    """A freely reduced word in the free group of the given rank."""

    __slots__ = ("letters", "rank", "_hash")

    def __init__(self, letters: str | Sequence[str] = "", rank: int = 2):
        if not isinstance(letters, str):
            letters = "".join(letters)
        _check_letters(letters, rank)
        self.letters = _free_reduce(letters)
        self.rank = rank
        self._hash = None

    @classmethod
    def _trusted(cls, letters: str, rank: int) -> "ReducedWord":
        obj = cls.__new__(cls)
        obj.letters = letters
        obj.rank = rank
        obj._hash = None
        return obj

    @classmethod
    def identity(cls, rank: int = 2) -> "ReducedWord":
        return cls._trusted("", rank)

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "ReducedWord":
        text = text.strip()
        if text in ("1", "e"):
            text = ""
        if rank is None:
            rank = infer_rank(text)
        return cls(text, rank)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[str]:
        return iter(self.letters)

    def __str__(self) -> str:
        return self.letters

    def __repr__(self) -> str:
        shown = self.letters if len(self.letters) <= 40 else self.letters[:37] + "..."
        return f"ReducedWord({shown!r}, rank={self.rank})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReducedWord):
            return NotImplemented
        return self.rank == other.rank and self.letters == other.letters

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rank, self.letters))
        return self._hash

    def is_identity(self) -> bool:
        return not self.letters

    def _same_rank(self, other: "ReducedWord") -> None:
        if self.rank != other.rank:
            raise RankMismatch(f"rank {self.rank} vs rank {other.rank}")

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        if not isinstance(other, ReducedWord):
            return NotImplemented
        self._same_rank(other)
        return ReducedWord._trusted(_join(self.letters, other.letters), self.rank)

    def inverse(self) -> "ReducedWord":
        return ReducedWord._trusted(_inv_str(self.letters), self.rank)

    def __pow__(self, e: int) -> "ReducedWord":
        if e == 0 or not self.letters:
            return ReducedWord.identity(self.rank)
        if e < 0:
            return self.inverse() ** (-e)
        conj, core = cyclic_reduce(self)
        c = conj.letters
        body = core.letters * e  # core is cyclically reduced, so no cancellation
        return ReducedWord._trusted(c + body + _inv_str(c), self.rank)

    def conjugate_by(self, k: "ReducedWord") -> "ReducedWord":
        """Return ``k * self * k^-1``."""
        return k * self * k.inverse()

    def commutes_with(self, other: "ReducedWord") -> bool:
        return self * other == other * self

    def prefix(self, n: int) -> "ReducedWord":
        return ReducedWord._trusted(self.letters[:n], self.rank)


def infer_rank(text: str) -> int:
    """Smallest rank (at least 2) whose alphabet covers ``text``."""
    rank = 2
    for ch in text:
        if ch.isalpha() and ch.isascii():
            rank = max(rank, string.ascii_lowercase.index(ch.lower()) + 1)
        else:
            raise InvalidLetter(f"letter {ch!r} is not a generator symbol")
    return rank


def reduce(raw: str | Iterable[str], rank: int = 2) -> ReducedWord:
    if not isinstance(raw, str):
        raw = "".join(raw)
    return ReducedWord(raw, rank)


def multiply(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    return u * v


class CyclicWord:
    """A conjugacy class of non-trivial elements, held as a cyclically reduced word.

    Equality is rotation equivalence.  The canonical (lexicographically
    least) rotation is computed on first use; equality tests do not need it.
    """

    __slots__ = ("letters", "rank", "__dict__")

    def __init__(self, letters: str, rank: int = 2):
        if not letters:
            raise EmptyWord("a cyclic word must be non-empty")
        _check_letters(letters, rank)
        if _free_reduce(letters) != letters:
            raise ValueError(f"{letters!r} is not freely reduced")
        if len(letters) >= 2 and letters[0] == letters[-1].swapcase():
            raise ValueError(f"{letters!r} is not cyclically reduced")
        self.letters = letters
        self.rank = rank

    @classmethod
    def _trusted(cls, letters: str, rank: int) -> "CyclicWord":
        obj = cls.__new__(cls)
        obj.letters = letters
        obj.rank = rank
        return obj

    @cached_property
    def canonical_rotation(self) -> str:
        return _least_rotation(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    def __repr__(self) -> str:
        shown = self.letters if len(self.letters) <= 40 else self.letters[:37] + "..."
        return f"CyclicWord({shown!r}, rank={self.rank})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CyclicWord):
            return NotImplemented
        return (
            self.rank == other.rank
            and len(self.letters) == len(other.letters)
            and other.letters in self.letters + self.letters
        )

    def __hash__(self) -> int:
        return hash((self.rank, self.canonical_rotation))

    def inverse(self) -> "CyclicWord":
        return CyclicWord._trusted(_inv_str(self.letters), self.rank)

    def as_word(self) -> ReducedWord:
        return ReducedWord._trusted(self.letters, self.rank)

    def __pow__(self, e: int) -> "CyclicWord":
        if e < 1:
            raise ValueError("cyclic powers are taken with positive exponents")
        return CyclicWord._trusted(self.letters * e, self.rank)


def _least_rotation(s: str) -> str:
    # Booth's algorithm.
    n = len(s)
    if n <= 64:
        return min(s[i:] + s[:i] for i in range(n))
    ss = s + s
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        sj = ss[j]
        i = f[j - k - 1]
        while i != -1 and sj != ss[k + i + 1]:
            if sj < ss[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != ss[k + i + 1]:
            if sj < ss[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return ss[k : k + n]


def cyclic_reduce(u: ReducedWord) -> tuple[ReducedWord, CyclicWord | None]:
    """Split ``u`` as ``conjugator * core * conjugator^-1`` with core cyclically reduced.

    The conjugator is the shortest possible.  The identity gives ``(e, None)``.
    """
    s = u.letters
    if not s:
        return ReducedWord.identity(u.rank), None
    # k letters peel off each end while s[:k] is inverse to s[-k:]; a reduced
    # word never cancels completely, so 2k < len(s).
    hi = (len(s) - 1) // 2
    lo = 0
    if hi > 0 and s[0] == s[-1].swapcase():
        lo, step = 1, 2
        while lo < hi:
            probe = min(step, hi)
            if s[:probe] != _inv_str(s[-probe:]):
                hi = probe - 1
                break
            lo = probe
            step *= 2
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if s[:mid] == _inv_str(s[-mid:]):
                lo = mid
            else:
                hi = mid - 1
    conj = s[:lo]
    core = s[lo : len(s) - lo]
    return ReducedWord._trusted(conj, u.rank), CyclicWord._trusted(core, u.rank)


def primitive_root(c: CyclicWord) -> tuple[CyclicWord, int]:
    """Return ``(root, k)`` with ``c == root ** k`` and ``root`` not a proper power."""
    s = c.letters
    if not s:
        raise EmptyWord("primitive_root of the empty word")
    # The first non-trivial occurrence of s in s+s is its least period,
    # which always divides len(s).
    p = (s + s).find(s, 1)
    return CyclicWord._trusted(s[:p], c.rank), len(s) // p


def cyclic_equal(c1: CyclicWord, c2: CyclicWord) -> bool:
    if c1.rank != c2.rank:
        raise RankMismatch(f"rank {c1.rank} vs rank {c2.rank}")
    return c1 == c2


def exponent_sums(u: ReducedWord) -> tuple[int, ...]:
    s = u.letters
    gens = string.ascii_lowercase[: u.rank]
    return tuple(s.count(g) - s.count(g.upper()) for g in gens)


def random_word(rng: random.Random, length: int, rank: int = 2) -> ReducedWord:
    """Uniformly random reduced word of exactly the given length."""
    letters = alphabet(rank)
    out: list[str] = []
    while len(out) < length:
        ch = rng.choice(letters)
        if out and out[-1] == ch.swapcase():
            continue
        out.append(ch)
    return ReducedWord._trusted("".join(out), rank)


def words_of_length(n: int, rank: int = 2) -> Iterator[ReducedWord]:
    letters = alphabet(rank)

    def extend(prefix: str) -> Iterator[str]:
        if len(prefix) == n:
            yield prefix
            return
        for ch in letters:
            if prefix and prefix[-1] == ch.swapcase():
                continue
            yield from extend(prefix + ch)

    for s in extend(""):
        yield ReducedWord._trusted(s, rank)


def words_up_to(n: int, rank: int = 2) -> Iterator[ReducedWord]:
    for k in range(n + 1):
        yield from words_of_length(k, rank)


def cyclically_reduced_words(n: int, rank: int = 2) -> Iterator[CyclicWord]:
    """All cyclically reduced words of length exactly ``n`` (every rotation listed)."""
    for w in words_of_length(n, rank):
        s = w.letters
        if n >= 2 and s[0] == s[-1].swapcase():
            continue
        if n >= 1:
            yield CyclicWord._trusted(s, rank)
