"""Exact weighted path counts, character sums and Fourier inversion.

Counts are kept as dense object arrays of Python ints indexed by weight
(offset by ``F * n``), one array per vertex, while the DP runs; the
resulting :class:`CountTable` stores only nonzero entries.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass

import numpy as np

from .automaton import Automaton, AutomatonError, ComponentAnalysis, decompose
from .groups import BudgetExceeded

DEFAULT_CELL_BUDGET = 5 * 10**7
MAX_NU = 4


@dataclass(frozen=True)
class EdgeWeighting:
    """Edge weights f(u, v) = phi(label(u, v)) in Z^nu, in vertex-index form."""

    nu: int
    weights: dict[tuple[int, int], tuple[int, ...]]
    F: int

    def array(self, n: int) -> np.ndarray:
        """(n, n, nu) integer array of edge weights (zero off the edge set)."""
        W = np.zeros((n, n, self.nu), dtype=np.int64)
        for (u, v), w in self.weights.items():
            W[u, v] = w
        return W


def edge_weighting(a: Automaton, hom: dict[str, tuple[int, ...]] | None = None,
                   max_nu: int = MAX_NU) -> EdgeWeighting:
    """Push the homomorphism through the edge labels.

    A generator without its own hom entry takes the negated image of its
    inverse; a generator with neither is an error.
    """
    hom = dict(hom if hom is not None else (a.hom or {}))
    if not hom:
        raise AutomatonError("homomorphism incomplete: no hom lines")
    for g, gen in a.generators.items():
        if g not in hom and gen.inverse in hom:
            hom[g] = tuple(-x for x in hom[gen.inverse])
    missing = [g for g in a.generators if g not in hom]
    if missing:
        raise AutomatonError(f"homomorphism incomplete: no image for {', '.join(missing)}")
    nus = {len(w) for w in hom.values()}
    if len(nus) != 1:
        raise AutomatonError("homomorphism images have different dimensions")
    nu = nus.pop()
    if nu < 1 or nu > max_nu:
        raise AutomatonError(f"nu = {nu} outside the supported range 1..{max_nu}")
    for g, gen in a.generators.items():
        if tuple(-x for x in hom[gen.inverse]) != tuple(hom[g]):
            raise AutomatonError(f"homomorphism not compatible with inverses at {g!r}")
    idx = a.index
    weights = {(idx[u], idx[v]): tuple(hom[g]) for (u, v), g in a.edges.items()}
    F = max((max(abs(x) for x in w) for w in weights.values()), default=0)
    return EdgeWeighting(nu, weights, F)


@dataclass
class CountTable:
    """N(n, w) for n <= n_max; ``tables[n]`` holds nonzero entries only."""

    nu: int
    tables: list[dict[tuple[int, ...], int]]
    totals: list[int]

    @property
    def n_max(self) -> int:
        return len(self.totals) - 1

    def count(self, n: int, w) -> int:
        return self.tables[n].get(tuple(w), 0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["n", *(f"w{i + 1}" for i in range(self.nu)), "count"])
        for n, table in enumerate(self.tables):
            for w in sorted(table):
                out.writerow([n, *w, table[w]])
        return buf.getvalue()


def _grouped_edges(a: Automaton, w: EdgeWeighting):
    """Edges bucketed by (target, weight): sources can be summed before shifting."""
    groups: dict[tuple[int, tuple[int, ...]], list[int]] = {}
    for (u, v), wt in sorted(w.weights.items()):
        groups.setdefault((v, wt), []).append(u)
    return groups


def _check_budget(w: EdgeWeighting, nverts: int, n_max: int, cap: int):
    cells = (2 * w.F * n_max + 1) ** w.nu * nverts
    if cells > cap:
        raise BudgetExceeded(
            f"weight table needs about {cells} cells (cap {cap}); lower n_max or nu"
        )


def iterate_counts(a: Automaton, w: EdgeWeighting, n_max: int, cell_budget: int = DEFAULT_CELL_BUDGET):
    """Yield ``(n, dense)`` for n = 0..n_max.

    ``dense`` has shape ``(|V|,) + (2 F n + 1,) * nu``; ``dense[v][w + F n]`` is
    the number of length-n paths from ``*`` ending at v with weight w.
    """
    nv = len(a.vertices)
    _check_budget(w, nv, n_max, cell_budget)
    nu, F = w.nu, w.F
    groups = _grouped_edges(a, w)
    cur = np.zeros((nv,) + (1,) * nu, dtype=object)
    cur[...] = 0
    cur[(a.star,) + (0,) * nu] = 1
    yield 0, cur
    for n in range(1, n_max + 1):
        side = 2 * F * n + 1
        nxt = np.zeros((nv,) + (side,) * nu, dtype=object)
        nxt[...] = 0
        old = 2 * F * (n - 1) + 1
        for (v, wt), sources in groups.items():
            acc = cur[sources[0]]
            for u in sources[1:]:
                acc = acc + cur[u]
            # old index i (weight i - F(n-1)) lands at i + F + wt in the new box
            sl = tuple(slice(F + c, F + c + old) for c in wt)
            nxt[(v,) + sl] += acc
        cur = nxt
        yield n, cur


def _sparse(dense: np.ndarray, n: int, F: int) -> dict[tuple[int, ...], int]:
    tot = dense.sum(axis=0)
    off = F * n
    out = {}
    for ix in zip(*np.nonzero(tot)):
        out[tuple(int(i) - off for i in ix)] = int(tot[ix])
    return out


def count_by_weight(a: Automaton, w: EdgeWeighting, n_max: int,
                    cell_budget: int = DEFAULT_CELL_BUDGET) -> CountTable:
    """Exact N(n, w) = #{length-n paths from * with total weight w}."""
    tables, totals = [], []
    for n, dense in iterate_counts(a, w, n_max, cell_budget):
        tab = _sparse(dense, n, w.F)
        tables.append(tab)
        totals.append(sum(tab.values()))
    return CountTable(w.nu, tables, totals)


def relative_growth_sequence(a: Automaton, w: EdgeWeighting, n_max: int, target=None,
                             cell_budget: int = DEFAULT_CELL_BUDGET) -> tuple[list[int], list[int]]:
    """(N(n, target), T(n)) for n <= n_max without keeping full tables.

    Used for long runs where the full table would not fit in memory.
    """
    target = tuple(target) if target is not None else (0,) * w.nu
    rel, tot = [], []
    for n, dense in iterate_counts(a, w, n_max, cell_budget):
        flat = dense.sum(axis=0)
        off = w.F * n
        if all(abs(c) <= off for c in target):
            rel.append(int(flat[tuple(c + off for c in target)]))
        else:
            rel.append(0)
        tot.append(int(flat.sum()))
    return rel, tot


def relative_growth(t: CountTable, target=None) -> tuple[list[int], list[int]]:
    target = tuple(target) if target is not None else (0,) * t.nu
    return [tab.get(target, 0) for tab in t.tables], list(t.totals)


def write_growth_csv(rel, tot) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["n", "total", "zero_weight_count", "ratio"])
    for n, (r, s) in enumerate(zip(rel, tot)):
        out.writerow([n, s, r, f"{r / s:.12g}" if s else "nan"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# character sums


def _phase_matrix(base: np.ndarray, W: np.ndarray, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return base * np.exp(2j * np.pi * (W @ t))


def character_sum_table(t_table: CountTable, t, n: int) -> complex:
    """Sum over |g| = n of exp(2 pi i <t, phi(g)>), from exact counts."""
    t = np.asarray(t, dtype=float)
    s = 0j
    for wt, c in t_table.tables[n].items():
        s += c * np.exp(2j * np.pi * float(np.dot(t, wt)))
    return complex(s)


def _paths_form(M: np.ndarray, star: int, n: int) -> complex:
    """<e_* M^n, 1>: weighted count of length-n paths from *."""
    row = np.zeros(M.shape[0], dtype=complex)
    row[star] = 1.0
    for _ in range(n):
        row = row @ M
    return complex(row.sum())


def character_sum_matrix(a: Automaton, w: EdgeWeighting, t, n: int,
                         ca: ComponentAnalysis | None = None) -> complex:
    """Same character sum through the masked matrices.

    Each C_j(t) sees the paths through B_j plus the paths that never enter a
    maximal component; the latter are counted once per j, so (m - 1) copies of
    their exact contribution are removed.  No path meets two maximal
    components, so the result is exact.
    """
    ca = ca or decompose(a)
    A = a.transition_matrix().astype(float)
    W = w.array(len(a.vertices))
    At = _phase_matrix(A, W, t)
    m = len(ca.maximal_indices)
    s = 0j
    for j in range(m):
        mask = ca.cj_mask(j)
        s += _paths_form(At * np.outer(mask, mask), a.star, n)
    if m > 1:
        mask = ca.nonmaximal_mask()
        s -= (m - 1) * _paths_form(At * np.outer(mask, mask), a.star, n)
    return s


def character_sum(a: Automaton, w: EdgeWeighting, t, n: int, method: str = "table",
                  table: CountTable | None = None) -> complex:
    if method == "table":
        table = table if table is not None and table.n_max >= n else count_by_weight(a, w, n)
        return character_sum_table(table, t, n)
    if method == "matrix":
        return character_sum_matrix(a, w, t, n)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Fourier inversion


class GridTooSmall(ValueError):
    def __init__(self, M: int, minimal: int):
        super().__init__(f"grid M={M} too small; need M >= {minimal} (M > 2 F n)")
        self.minimal = minimal


def torus_grid(M: int, nu: int) -> np.ndarray:
    """All points k / M of the uniform grid on [0,1)^nu, lexicographic order."""
    pts = np.array(list(itertools.product(range(M), repeat=nu)), dtype=float)
    return pts / M


def fourier_count(a: Automaton, w: EdgeWeighting, n: int, M: int, target=None,
                  ca: ComponentAnalysis | None = None, return_residual: bool = False):
    """N(n, target) by averaging the matrix-route character sum over the M^nu grid.

    The character sum is a trigonometric polynomial of degree <= F n in each
    coordinate, so the grid average is exact once M > 2 F n.
    """
    minimal = 2 * w.F * n + 1
    if M < max(minimal, 1):
        raise GridTooSmall(M, minimal)
    target = np.zeros(w.nu) if target is None else np.asarray(target, dtype=float)
    if n == 0:
        value = int(not target.any())
        return (value, 0.0) if return_residual else value
    ca = ca or decompose(a)
    nv = len(a.vertices)
    A = a.transition_matrix().astype(float)
    W = w.array(nv)
    pts = torus_grid(M, w.nu)
    # batched over grid points: phases (P, nv, nv)
    phase = np.exp(2j * np.pi * np.einsum("uvk,pk->puv", W, pts))
    masks = [ca.cj_mask(j) for j in range(len(ca.maximal_indices))]
    m = len(masks)
    coeffs = [1.0] * m
    if m > 1:
        masks.append(ca.nonmaximal_mask())
        coeffs.append(-(m - 1.0))
    sums = np.zeros(len(pts), dtype=complex)
    for mask, coef in zip(masks, coeffs):
        Mt = phase * (A * np.outer(mask, mask))[None]
        row = np.zeros((len(pts), nv), dtype=complex)
        row[:, a.star] = 1.0
        for _ in range(n):
            row = np.einsum("pu,puv->pv", row, Mt)
        sums += coef * row.sum(axis=1)
    shift = np.exp(-2j * np.pi * (pts @ target))
    est = (sums * shift).mean()
    value = int(round(est.real))
    resid = abs(est - value)
    return (value, resid) if return_residual else value
