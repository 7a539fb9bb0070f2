import itertools
import math
from fractions import Fraction
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relgrowth.automaton import decompose
from relgrowth.counting import edge_weighting
from relgrowth.fixtures import load_fixture
from relgrowth.lattice import (
    IntegerLattice,
    LatticeError,
    all_cycle_weights,
    choose_c,
    cohomology_test,
    cycle_weight_data,
    delta_from_cycles,
    delta_group,
    dual_points,
    gamma_from_cycles,
    global_period,
    group_indices,
    hnf,
    lattice_report,
)

vectors = st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=0, max_size=6)


def minors_gcd(rows, dim):
    """gcd of all dim x dim minors: the index of a full-rank span (independent route)."""
    g = 0
    for sub in itertools.combinations(rows, dim):
        g = math.gcd(g, round(abs(np.linalg.det(np.array(sub, dtype=float)))))
    return g


@given(vectors)
@settings(max_examples=300, deadline=None)
def test_hnf_idempotent(rows):
    h = hnf(rows, 3)
    assert hnf(h, 3) == h


@given(vectors)
@settings(max_examples=300, deadline=None)
def test_hnf_shape_and_membership(rows):
    lat = IntegerLattice.span(rows, 3)
    pivots = lat.pivots
    assert pivots == sorted(pivots) and len(set(pivots)) == len(pivots)
    for i, (row, p) in enumerate(zip(lat.basis, pivots)):
        assert row[p] > 0
        for above in lat.basis[:i]:
            assert 0 <= above[p] < row[p]
    for r in rows:
        assert r in lat
    assert lat.rank == (np.linalg.matrix_rank(np.array(rows)) if rows else 0)


@given(vectors)
@settings(max_examples=200, deadline=None)
def test_index_matches_minors(rows):
    lat = IntegerLattice.span(rows, 3)
    g = minors_gcd(rows, 3) if len(rows) >= 3 else 0
    if lat.rank == 3:
        assert lat.index() == g
    else:
        assert lat.index() is None and g == 0


@given(vectors)
@settings(max_examples=150, deadline=None)
def test_dual_points_property(rows):
    lat = IntegerLattice.span(rows, 3)
    if lat.rank < 3 or lat.index() > 400:
        return
    pts = dual_points(lat)
    assert len(pts) == lat.index()
    for t in pts:
        for d in lat.basis:
            assert sum(a * b for a, b in zip(t, d)).denominator == 1


def test_non_member():
    lat = IntegerLattice.span([(1, 1), (0, 2)], 2)
    assert (1, 0) not in lat
    assert (3, 1) in lat


@pytest.mark.parametrize(
    "basis, expected",
    [
        ([(1, 1), (0, 2)], [(0, 0), (Fraction(1, 2), Fraction(1, 2))]),
        ([(1,)], [(0,)]),
        ([(2, 0), (0, 1)], [(0, 0), (Fraction(1, 2), 0)]),
    ],
)
def test_dual_points_examples(basis, expected):
    assert dual_points(IntegerLattice.span(basis, len(basis[0]))) == [tuple(map(Fraction, e)) for e in expected]


def test_dual_points_rank_deficient():
    with pytest.raises(LatticeError):
        dual_points(IntegerLattice.span([(1, 1)], 2))


def _block(name):
    a = load_fixture(name)
    ca = decompose(a)
    (j,) = ca.maximal_indices
    return a, edge_weighting(a), ca, ca.components[j]


def closed_walks(a, w, comp, base, length):
    """Brute force: weights of all closed walks at base inside the component."""
    members = set(comp)
    succ = {u: [v for v in comp if (u, v) in w.weights] for u in comp}
    out = set()
    for path in itertools.product(comp, repeat=length - 1):
        seq = (base, *path, base)
        if all(y in succ[x] for x, y in zip(seq, seq[1:])):
            tot = [0] * w.nu
            for x, y in zip(seq, seq[1:]):
                tot = [p + q for p, q in zip(tot, w.weights[(x, y)])]
            out.add(tuple(tot))
    return out


def test_cycle_weights_f2_base_a():
    a, w, ca, comp = _block("f2")
    base = a.index["a"]
    data = cycle_weight_data(w, comp, base, 4, period=1)
    assert data[1] == {(1, 0)}
    # a -> a -> a, a -> b -> a, a -> B -> a
    assert data[2] == {(2, 0), (1, 1), (1, -1)}
    for l in (1, 2, 3, 4):
        assert data[l] == closed_walks(a, w, comp, base, l)


def test_cycle_lengths_multiple_of_period():
    for name in ("hexagon", "bipartite"):
        a, w, ca, comp = _block(name)
        p = ca.periods[ca.maximal_indices[0]]
        data = all_cycle_weights(w, comp, 12)
        assert data and all(l % p == 0 for l in data)


def test_delta_examples(f2, f2_nu1):
    a, w, ca, comp = _block("f2")
    assert delta_group(w, comp).lattice.basis == ((1, 1), (0, 2))
    a1, w1, ca1, comp1 = _block("f2_nu1")
    assert delta_group(w1, comp1).lattice.basis == ((1,),)
    a2, w2, ca2, comp2 = _block("period2")
    assert delta_group(w2, comp2).lattice.rank == 0


@pytest.mark.parametrize("name", ["f2", "f2_nu1", "f3", "two_chains", "hexagon", "bipartite"])
def test_delta_stabilised(name):
    a, w, ca, comp = _block(name)
    res = delta_group(w, comp)
    longer = delta_from_cycles(all_cycle_weights(w, comp, res.L + len(comp)), w.nu)
    assert longer == res.lattice


def test_group_indices_f2(f2):
    a, w, ca = f2
    comp = ca.components[ca.maximal_indices[0]]
    gi = group_indices(w, comp, a.adjacency())
    assert gi.gamma.basis == ((1, 0), (0, 1))
    assert gi.delta.basis == ((1, 1), (0, 2))
    assert gi.D == 2
    assert sum(gi.c) % 2 == 1


def test_group_indices_f2_nu1(f2_nu1):
    a, w, ca = f2_nu1
    gi = group_indices(w, ca.components[ca.maximal_indices[0]], a.adjacency())
    assert gi.gamma.basis == ((1,),) and gi.delta.basis == ((1,),) and gi.D == 1


def test_zero_weight_rank_obstruction():
    a, w, ca, comp = _block("period2")
    with pytest.raises(LatticeError, match="rank"):
        group_indices(w, comp, a.adjacency())


@pytest.mark.parametrize("name", ["f2", "f2_nu1", "f3", "two_chains", "hexagon", "bipartite"])
def test_lattice_invariants(name):
    a, w, ca, comp = _block(name)
    gi = group_indices(w, comp, a.adjacency(), ca.periods[ca.maximal_indices[0]])
    assert gi.gamma.contains_lattice(gi.delta)
    assert tuple(gi.D * x for x in gi.c) in gi.delta
    assert all(tuple(k * x for x in gi.c) not in gi.delta for k in range(1, gi.D))
    if gi.gamma.rank == w.nu:
        assert gi.D == gi.delta.index() // gi.gamma.index()
    # a different cycle pair gives the same coset
    other = group_indices(w, comp, a.adjacency(), gi.period, skip=1)
    assert tuple(x - y for x, y in zip(gi.c, other.c)) in gi.delta


def test_global_period_examples():
    assert global_period([(1, 2)]) == (2, 2)
    assert global_period([(1, 1)]) == (1, 1)
    assert global_period([(2, 1), (1, 3)]) == (6, 6)
    assert global_period([(2, 2), (1, 2)]) == (2, 8)
    with pytest.raises(LatticeError):
        global_period([(1, None)])


def test_lattice_report(f2):
    a, w, ca = f2
    rep = lattice_report(a, ca, w)
    assert (rep.indices[0].period, rep.indices[0].D, rep.D_lcm, rep.D_product) == (1, 2, 2, 2)
    assert rep.dual[0] == [(0, 0), (Fraction(1, 2), Fraction(1, 2))]
    text = rep.format()
    assert "1/2" in text and "D (lcm) = 2" in text


def test_cohomology_examples(f2):
    a, w, ca = f2
    comp = ca.components[ca.maximal_indices[0]]
    res = delta_group(w, comp)
    assert cohomology_test((0, 0), w, comp, res.lattice, res.cycles) == 0
    assert cohomology_test((Fraction(1, 2), Fraction(1, 2)), w, comp, res.lattice, res.cycles) == Fraction(1, 2)
    assert cohomology_test((Fraction(1, 3), 0), w, comp, res.lattice, res.cycles) is None


def test_cohomology_agrees_with_potential(f2):
    """At a dual point, an explicit potential h makes <t, f> - c a coboundary mod 1."""
    a, w, ca = f2
    comp = ca.components[ca.maximal_indices[0]]
    res = delta_group(w, comp)
    for t in dual_points(res.lattice):
        c = cohomology_test(t, w, comp, res.lattice, res.cycles)
        # build h along a spanning tree, then check every edge
        base = comp[0]
        h = {base: Fraction(0)}
        frontier = [base]
        while frontier:
            u = frontier.pop()
            for (x, y), wt in w.weights.items():
                if x == u and y in comp and y not in h:
                    h[y] = h[u] + sum(p * q for p, q in zip(t, wt)) - c
                    frontier.append(y)
        for (x, y), wt in w.weights.items():
            if x in comp and y in comp:
                g = sum(p * q for p, q in zip(t, wt))
                assert (g - c - h[y] + h[x]) % 1 == 0
