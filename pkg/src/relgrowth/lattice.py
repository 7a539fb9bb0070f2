"""Integer lattices in Hermite normal form and the cycle-weight groups.

Convention: a lattice basis is a list of integer *row* vectors in row-style
Hermite normal form: echelon form, positive pivots, and every entry above a
pivot reduced into ``[0, pivot)``.  This is column-style HNF of the
transpose, and it is unique for a given lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .automaton import Automaton, ComponentAnalysis, cyclic_period
from .counting import EdgeWeighting
from .groups import BudgetExceeded

DEFAULT_WEIGHT_BUDGET = 5 * 10**7


class LatticeError(ValueError):
    pass


def hnf(vectors, dim: int | None = None) -> list[tuple[int, ...]]:
    """Row-style Hermite normal form of the lattice spanned by ``vectors``."""
    rows = [list(map(int, v)) for v in vectors]
    if dim is None:
        if not rows:
            raise ValueError("dimension needed for an empty generating set")
        dim = len(rows[0])
    rows = [r for r in rows if any(r)]
    basis: list[list[int]] = []
    col = 0
    while rows and col < dim:
        # gcd-reduce column `col` across remaining rows
        while True:
            nz = [r for r in rows if r[col] != 0]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda r: abs(r[col]))
            for r in nz:
                if r is not piv:
                    q = r[col] // piv[col]
                    for k in range(col, dim):
                        r[k] -= q * piv[k]
            rows = [r for r in rows if any(r)]
        nz = [r for r in rows if r[col] != 0]
        if nz:
            piv = nz[0]
            rows = [r for r in rows if r is not piv]
            if piv[col] < 0:
                piv = [-x for x in piv]
            basis.append(piv)
        col += 1
    # reduce entries above pivots
    for i, row in enumerate(basis):
        p = next(k for k, x in enumerate(row) if x)
        for above in basis[:i]:
            q = above[p] // row[p]
            if q:
                for k in range(p, dim):
                    above[k] -= q * row[k]
    return [tuple(r) for r in basis]


@dataclass(frozen=True)
class IntegerLattice:
    dim: int
    basis: tuple[tuple[int, ...], ...]

    @classmethod
    def span(cls, vectors, dim: int) -> "IntegerLattice":
        return cls(dim, tuple(hnf(list(vectors), dim)))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> list[int]:
        return [next(k for k, x in enumerate(r) if x) for r in self.basis]

    def __contains__(self, vec) -> bool:
        v = list(map(int, vec))
        if len(v) != self.dim:
            raise ValueError("dimension mismatch")
        for row, p in zip(self.basis, self.pivots):
            if any(v[:p]):
                return False
            if v[p] % row[p]:
                return False
            q = v[p] // row[p]
            for k in range(p, self.dim):
                v[k] -= q * row[k]
        return not any(v)

    def contains_lattice(self, other: "IntegerLattice") -> bool:
        return all(b in self for b in other.basis)

    def index(self) -> int | None:
        """[Z^dim : L], or None when the rank is deficient."""
        if self.rank < self.dim:
            return None
        return math.prod(r[p] for r, p in zip(self.basis, self.pivots))

    def format(self) -> str:
        return "{" + ", ".join("(" + ",".join(map(str, b)) + ")" for b in self.basis) + "}"


def dual_points(delta: IntegerLattice) -> list[tuple[Fraction, ...]]:
    """Points t of Q^nu / Z^nu with <t, d> integral for every d in the lattice.

    With basis rows B (square, full rank) the dual is B^{-1} Z^nu; its image in
    the torus is the finite group generated by the columns of B^{-1} mod 1.
    """
    if delta.rank < delta.dim:
        raise LatticeError("rank-deficient lattice has an infinite dual point set")
    nu = delta.dim
    B = [[Fraction(x) for x in row] for row in delta.basis]
    # B upper triangular: solve B x = e_k by back substitution
    gens = []
    for k in range(nu):
        x = [Fraction(0)] * nu
        for i in reversed(range(nu)):
            s = Fraction(int(i == k)) - sum(B[i][c] * x[c] for c in range(i + 1, nu))
            x[i] = s / B[i][i]
        gens.append(tuple(c % 1 for c in x))
    pts = {tuple(Fraction(0) for _ in range(nu))}
    frontier = list(pts)
    while frontier:
        new = []
        for p in frontier:
            for g in gens:
                q = tuple((a + b) % 1 for a, b in zip(p, g))
                if q not in pts:
                    pts.add(q)
                    new.append(q)
        frontier = new
    return sorted(pts)


def format_point(t) -> str:
    return "(" + ", ".join(str(Fraction(x)) for x in t) + ")"


# ---------------------------------------------------------------------------
# cycle weights


def _component_edges(w: EdgeWeighting, comp) -> list[tuple[int, int, tuple[int, ...]]]:
    """Internal edges as (local source, local target, weight)."""
    local = {v: i for i, v in enumerate(comp)}
    return [(local[u], local[v], wt) for (u, v), wt in sorted(w.weights.items())
            if u in local and v in local]


def closed_walk_weights(w: EdgeWeighting, comp, bases, L: int,
                        budget: int = DEFAULT_WEIGHT_BUDGET) -> dict[int, dict[int, set]]:
    """``out[base][l]``: weights of closed walks of length l <= L at ``base``.

    Dense boolean DP over (base, vertex, weight) in the box |w_i| <= F L;
    only lengths with at least one closed walk are recorded.
    """
    comp = list(comp)
    local = {v: i for i, v in enumerate(comp)}
    for b in bases:
        if b not in local:
            raise ValueError("base vertex must lie in the component")
    edges = _component_edges(w, comp)
    nu, F = w.nu, max(w.F, 1)
    side = 2 * F * L + 1
    cells = len(bases) * len(comp) * side**nu
    if cells > budget:
        raise BudgetExceeded(f"cycle weight DP needs {cells} cells (cap {budget})")
    off = F * L
    state = np.zeros((len(bases), len(comp)) + (side,) * nu, dtype=bool)
    for k, b in enumerate(bases):
        state[(k, local[b]) + (off,) * nu] = True
    out: dict[int, dict[int, set]] = {b: {} for b in bases}
    for length in range(1, L + 1):
        nxt = np.zeros_like(state)
        for u, v, wt in edges:
            dst = tuple(slice(max(c, 0), side + min(c, 0)) for c in wt)
            src = tuple(slice(max(-c, 0), side - max(c, 0)) for c in wt)
            nxt[(slice(None), v) + dst] |= state[(slice(None), u) + src]
        state = nxt
        for k, b in enumerate(bases):
            hits = np.argwhere(state[k, local[b]])
            if len(hits):
                out[b][length] = {tuple(int(x) - off for x in h) for h in hits}
    return out


def cycle_weight_data(w: EdgeWeighting, comp, base: int, L: int, period: int | None = None,
                      budget: int = DEFAULT_WEIGHT_BUDGET) -> dict[int, set[tuple[int, ...]]]:
    """Weights of closed walks of length l <= L at ``base`` inside the component.

    Only lengths with at least one cycle appear; these are multiples of the
    period.
    """
    out = closed_walk_weights(w, comp, [base], L, budget)[base]
    if period is not None:
        assert all(l % period == 0 for l in out), "cycle length not a multiple of the period"
    return out


def all_cycle_weights(w: EdgeWeighting, comp, L: int, budget: int = DEFAULT_WEIGHT_BUDGET):
    """Union over base vertices of :func:`cycle_weight_data`, keyed by length."""
    merged: dict[int, set] = {}
    for per_base in closed_walk_weights(w, comp, list(comp), L, budget).values():
        for l, ws in per_base.items():
            merged.setdefault(l, set()).update(ws)
    return merged


def _truncate(cycles: dict[int, set], L: int) -> dict[int, set]:
    return {l: ws for l, ws in cycles.items() if l <= L}


def _delta_generators(cycles: dict[int, set]) -> list[tuple[int, ...]]:
    gens = []
    for ws in cycles.values():
        ws = sorted(ws)
        ref = ws[0]
        gens += [tuple(a - b for a, b in zip(x, ref)) for x in ws[1:]]
    return gens


def delta_from_cycles(cycles: dict[int, set], nu: int) -> IntegerLattice:
    return IntegerLattice.span(_delta_generators(cycles), nu)


def gamma_from_cycles(cycles: dict[int, set], nu: int) -> IntegerLattice:
    return IntegerLattice.span([x for ws in cycles.values() for x in ws], nu)


@dataclass(frozen=True)
class DeltaResult:
    lattice: IntegerLattice
    L: int
    cycles: dict


def delta_group(w: EdgeWeighting, comp, L0: int | None = None, step: int | None = None,
                L_cap: int | None = None, budget: int = DEFAULT_WEIGHT_BUDGET) -> DeltaResult:
    """Krieger-type Delta group from equal-length cycle weight differences.

    Cycle lengths are bounded by L, starting at 2|V| and growing by |V|; the
    result is accepted once the HNF is unchanged across two increments.
    """
    nv = len(comp)
    step = step or nv
    L = L0 or 2 * nv
    cap = L_cap or max(8 * nv, L + 2 * step)
    while True:
        if L + 2 * step > cap:
            raise LatticeError(
                f"Delta group did not stabilise by cycle length {cap}; pass a larger L manually"
            )
        cycles = all_cycle_weights(w, comp, L + 2 * step, budget)
        lats = [delta_from_cycles(_truncate(cycles, L + k * step), w.nu) for k in range(3)]
        if lats[0] == lats[1] == lats[2]:
            return DeltaResult(lats[0], L, cycles)
        L += step


@dataclass(frozen=True)
class GroupIndices:
    gamma: IntegerLattice
    delta: IntegerLattice
    c: tuple[int, ...]
    D: int | None
    period: int
    L: int
    pair: tuple = ()

    @property
    def finite(self) -> bool:
        return self.D is not None


def choose_c(cycles: dict[int, set], period: int, skip: int = 0):
    """Cycle pair with length difference ``period``, shortest first.

    Within a length pair the lexicographically smallest weights are used;
    ``skip`` moves to later candidates (used to test coset independence).
    """
    cands = []
    for l in sorted(cycles):
        if l + period in cycles:
            for x in sorted(cycles[l + period]):
                for y in sorted(cycles[l]):
                    cands.append(((l + period, x), (l, y)))
                    if len(cands) > skip:
                        (l1, w1), (l2, w2) = cands[skip]
                        return tuple(a - b for a, b in zip(w1, w2)), cands[skip]
    raise LatticeError("no pair of cycles with length difference equal to the period")


def group_indices(w: EdgeWeighting, comp, adj, period: int | None = None, skip: int = 0,
                  budget: int = DEFAULT_WEIGHT_BUDGET, require_full_rank: bool = True) -> GroupIndices:
    """Gamma, Delta, generator c and the order D of c + Delta in Gamma / Delta."""
    if period is None:
        period, _ = cyclic_period(adj, sorted(comp))
    dr = delta_group(w, comp, budget=budget)
    cycles = dr.cycles
    gamma = gamma_from_cycles(cycles, w.nu)
    if require_full_rank and gamma.rank < w.nu:
        raise LatticeError(
            f"rank(Gamma) = {gamma.rank} < nu = {w.nu}: some nonzero <t, f> is cohomologous "
            "to a constant, impossible for a surjection from a hyperbolic group"
        )
    c, pair = choose_c(cycles, period, skip)
    bound = dr.lattice.index()
    D = None
    if bound is not None:
        for k in range(1, bound + 1):
            if tuple(k * x for x in c) in dr.lattice:
                D = k
                break
    return GroupIndices(gamma, dr.lattice, c, D, period, dr.L, pair)


def global_period(pairs) -> tuple[int, int]:
    """(lcm form, product form) of the common period from (p_j, D_j) pairs."""
    pairs = list(pairs)
    if any(D is None for _, D in pairs):
        raise LatticeError("some D_j is infinite")
    lcm = reduce(math.lcm, (math.lcm(p, D) for p, D in pairs), 1)
    prod = math.prod(p * D for p, D in pairs)
    return lcm, prod


def cohomology_test(t, w: EdgeWeighting, comp, delta: IntegerLattice, cycles: dict[int, set]):
    """Return the constant (a Fraction mod 1) if <t, f> is cohomologous to a
    constant on the component, else None.

    Works modulo Z: the test is <t, d> in Z for every Delta basis vector d;
    the constant is <t, w(g0)> / l(g0) mod 1 for the shortest cycle g0
    (lexicographically smallest weight).
    """
    t = tuple(Fraction(x) for x in t)
    for d in delta.basis:
        if sum(a * b for a, b in zip(t, d)).denominator != 1:
            return None
    l0 = min(cycles)
    w0 = min(cycles[l0])
    return (sum(a * b for a, b in zip(t, w0)) / l0) % 1


@dataclass
class LatticeReport:
    components: list[int] = field(default_factory=list)
    indices: list[GroupIndices] = field(default_factory=list)
    D_lcm: int | None = None
    D_product: int | None = None
    dual: list[list[tuple[Fraction, ...]]] = field(default_factory=list)

    def format(self) -> str:
        lines = []
        for j, (ci, gi) in enumerate(zip(self.components, self.indices), 1):
            lines += [
                f"component {j} (block {ci}):",
                f"  p = {gi.period}",
                f"  Gamma = {gi.gamma.format()}",
                f"  Delta = {gi.delta.format()}",
                f"  c = ({','.join(map(str, gi.c))})",
                f"  D_j = {gi.D if gi.D is not None else 'infinite'}",
                f"  cycle length bound L = {gi.L}",
                "  dual points = " + ", ".join(format_point(t) for t in self.dual[j - 1]),
            ]
        lines.append(f"D (lcm) = {self.D_lcm}")
        lines.append(f"D (product) = {self.D_product}")
        return "\n".join(lines)


def lattice_report(a: Automaton, ca: ComponentAnalysis, w: EdgeWeighting,
                   budget: int = DEFAULT_WEIGHT_BUDGET) -> LatticeReport:
    adj = a.adjacency()
    rep = LatticeReport()
    for ci in ca.maximal_indices:
        comp = ca.components[ci]
        gi = group_indices(w, comp, adj, ca.periods[ci], budget=budget)
        rep.components.append(ci)
        rep.indices.append(gi)
        rep.dual.append(dual_points(gi.delta))
    rep.D_lcm, rep.D_product = global_period((gi.period, gi.D) for gi in rep.indices)
    return rep


def basis_matrix(lat: IntegerLattice) -> np.ndarray:
    return np.array(lat.basis, dtype=np.int64).reshape(lat.rank, lat.dim)
