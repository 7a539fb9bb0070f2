"""Built-in free groups and a brute-force Cayley-graph oracle.

The oracle enumerates reduced words directly and never looks at an
automaton, so it can be used to check automata and DP counts.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field

from .automaton import STAR, Automaton, Generator

DEFAULT_WORD_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    """An enumeration or table would exceed its configured size cap."""


@dataclass(frozen=True)
class FreeGroupSpec:
    """Free group of rank k with a homomorphism to Z^nu.

    ``images[i]`` is the image of the i-th positive generator; inverses map to
    the negation.  Inverse generators are named by upper-casing.
    """

    k: int
    images: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("free group rank must be at least 2 (non-elementary)")
        if not self.names:
            object.__setattr__(self, "names", tuple("abcdefghijklmnopqrstuvwxyz"[: self.k]))
        if len(self.names) != self.k or len(self.images) != self.k:
            raise ValueError("need one name and one image per positive generator")
        if len({len(w) for w in self.images}) != 1:
            raise ValueError("homomorphism images must share a dimension")
        for n in self.names:
            if n.upper() == n:
                raise ValueError("positive generator names must be lower case")

    @property
    def nu(self) -> int:
        return len(self.images[0])

    def letters(self) -> list[str]:
        out = []
        for n in self.names:
            out += [n, n.upper()]
        return out

    def inverse(self, x: str) -> str:
        return x.swapcase()

    def hom(self) -> dict[str, tuple[int, ...]]:
        h = {}
        for n, w in zip(self.names, self.images):
            h[n] = tuple(w)
            h[n.upper()] = tuple(-x for x in w)
        return h

    @classmethod
    def abelianization(cls, k: int) -> "FreeGroupSpec":
        return cls(k, tuple(tuple(int(i == j) for j in range(k)) for i in range(k)))


def f2_nu2() -> FreeGroupSpec:
    """F2 with the abelianization onto Z^2 (kernel: commutator subgroup)."""
    return FreeGroupSpec.abelianization(2)


def f2_nu1() -> FreeGroupSpec:
    """F2 with a -> 1, b -> 0."""
    return FreeGroupSpec(2, ((1,), (0,)))


def f3_nu3() -> FreeGroupSpec:
    return FreeGroupSpec.abelianization(3)


def build_free_group_automaton(spec: FreeGroupSpec) -> Automaton:
    """Reduced-word automaton: one vertex per signed generator."""
    letters = spec.letters()
    gens = {x: Generator(x, spec.inverse(x)) for x in letters}
    edges = {}
    for x in letters:
        edges[(STAR, x)] = x
    for x in letters:
        for y in letters:
            if y != spec.inverse(x):
                edges[(x, y)] = y
    return Automaton(gens, (STAR, *letters), edges, STAR, spec.hom())


@dataclass
class OracleBall:
    """``counts[n]`` maps a weight vector to the number of |g| = n with that weight."""

    nu: int
    counts: list[dict[tuple[int, ...], int]] = field(default_factory=list)

    @property
    def n_max(self) -> int:
        return len(self.counts) - 1

    def total(self, n: int) -> int:
        return sum(self.counts[n].values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", *(f"w{i + 1}" for i in range(self.nu)), "count"])
        for n, table in enumerate(self.counts):
            for wt in sorted(table):
                w.writerow([n, *wt, table[wt]])
        return buf.getvalue()


def reduced_words(spec: FreeGroupSpec, n: int, budget: int = DEFAULT_WORD_BUDGET):
    """Yield all reduced words of length n as tuples of letters, depth first."""
    letters = spec.letters()
    total = 1 if n == 0 else 2 * spec.k * (2 * spec.k - 1) ** (n - 1)
    if total > budget:
        raise BudgetExceeded(f"{total} reduced words of length {n} exceed budget {budget}")
    word: list[str] = []

    def rec(depth):
        if depth == n:
            yield tuple(word)
            return
        for x in letters:
            if word and x == spec.inverse(word[-1]):
                continue
            word.append(x)
            yield from rec(depth + 1)
            word.pop()

    yield from rec(0)


def oracle_counts(spec: FreeGroupSpec, n_max: int, budget: int = DEFAULT_WORD_BUDGET) -> OracleBall:
    """Exact weight distribution on each sphere by exhaustive enumeration."""
    hom = spec.hom()
    nu = spec.nu
    used = 0
    ball = OracleBall(nu)
    for n in range(n_max + 1):
        table: Counter = Counter()
        for word in reduced_words(spec, n, budget - used):
            used += 1
            wt = [0] * nu
            for x in word:
                for i, c in enumerate(hom[x]):
                    wt[i] += c
            table[tuple(wt)] += 1
        ball.counts.append(dict(table))
    return ball


def free_reduce(word, inverse) -> tuple:
    out: list = []
    for x in word:
        if out and out[-1] == inverse(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass
class MarkovCheck:
    ok: bool
    n_checked: int
    failure: str = ""
    witness: tuple = ()

    def __str__(self):
        if self.ok:
            return f"strong Markov property holds up to length {self.n_checked}"
        return f"FAIL at length {self.n_checked}: {self.failure}: {''.join(self.witness) or '(empty)'}"


def path_words(a: Automaton, n: int):
    """Label words of all length-n paths starting at ``*``."""
    succ: dict[str, list[tuple[str, str]]] = {}
    for (u, v), g in a.edges.items():
        succ.setdefault(u, []).append((v, g))
    frontier = [(a.initial, ())]
    for _ in range(n):
        frontier = [(v, w + (g,)) for (u, w) in frontier for (v, g) in succ.get(u, ())]
    return [w for _, w in frontier]


def verify_strong_markov(
    a: Automaton, spec: FreeGroupSpec, n_max: int, budget: int = DEFAULT_WORD_BUDGET
) -> MarkovCheck:
    """Compare ``*``-paths against the oracle sphere for every n <= n_max.

    Checks that each path word is geodesic (freely reduced of length n), that
    no two paths give the same element, and that every element of the sphere
    is hit.  The first failure, at the shortest length, is reported.
    """
    letters = set(spec.letters())
    unknown = set(a.generators) - letters
    if unknown:
        raise ValueError(f"automaton uses generators outside the group: {sorted(unknown)}")
    for n in range(n_max + 1):
        words = path_words(a, n)
        seen = set()
        for w in words:
            red = free_reduce(w, spec.inverse)
            if len(red) != n:
                return MarkovCheck(False, n, "non-geodesic path word", w)
            if red in seen:
                return MarkovCheck(False, n, "two paths give the same element", red)
            seen.add(red)
        for w in reduced_words(spec, n, budget):
            if w not in seen:
                return MarkovCheck(False, n, "element not represented by any path", w)
    return MarkovCheck(True, n_max)
