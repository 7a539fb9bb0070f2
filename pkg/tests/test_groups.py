import pytest

from relgrowth.automaton import STAR, Automaton, decompose
from relgrowth.groups import (
    BudgetExceeded,
    FreeGroupSpec,
    build_free_group_automaton,
    f2_nu1,
    f2_nu2,
    f3_nu3,
    oracle_counts,
    reduced_words,
    verify_strong_markov,
)


def test_rank_one_rejected():
    with pytest.raises(ValueError):
        FreeGroupSpec(1, ((1,),))


def test_hom_antisymmetric():
    spec = f3_nu3()
    h = spec.hom()
    for x in spec.letters():
        assert h[spec.inverse(x)] == tuple(-c for c in h[x])


@pytest.mark.parametrize("spec, nv, ne, lam", [(f2_nu2(), 5, 16, 3), (f3_nu3(), 7, 36, 5)])
def test_free_group_automaton(spec, nv, ne, lam):
    a = build_free_group_automaton(spec)
    assert len(a.vertices) == nv
    assert len(a.edges) == ne
    assert abs(decompose(a).lam - lam) < 1e-9


def test_builtin_matches_fixture_file():
    from relgrowth.fixtures import load_fixture
    a = build_free_group_automaton(f2_nu2())
    b = load_fixture("f2")
    assert set(a.edges.items()) == set(b.edges.items())
    assert a.hom == b.hom


def test_sphere_sizes():
    ball = oracle_counts(f2_nu2(), 8)
    assert ball.total(4) == 108
    for n in range(1, 9):
        assert ball.total(n) == 4 * 3 ** (n - 1)
    ball3 = oracle_counts(f3_nu3(), 5)
    for n in range(1, 6):
        assert ball3.total(n) == 6 * 5 ** (n - 1)


def test_oracle_examples():
    assert oracle_counts(f2_nu2(), 4).counts[4][(0, 0)] == 8
    assert oracle_counts(f2_nu1(), 2).counts[2][(0,)] == 2


def test_oracle_symmetry_and_parity():
    ball = oracle_counts(f2_nu2(), 9)
    for n, table in enumerate(ball.counts):
        for w, c in table.items():
            assert table.get(tuple(-x for x in w), 0) == c
        if n % 2:
            assert (0, 0) not in table


def test_word_budget():
    with pytest.raises(BudgetExceeded):
        list(reduced_words(f2_nu2(), 12, budget=1000))


def test_oracle_csv_header():
    csv = oracle_counts(f2_nu2(), 1).to_csv().splitlines()
    assert csv[0] == "n,w1,w2,count"
    assert csv[1] == "0,0,0,1"


def test_verify_strong_markov_passes():
    spec = f2_nu2()
    chk = verify_strong_markov(build_free_group_automaton(spec), spec, 8)
    assert chk.ok, str(chk)


def test_verify_detects_missing_edge():
    spec = f2_nu2()
    a = build_free_group_automaton(spec)
    edges = dict(a.edges)
    del edges[("a", "b")]
    broken = Automaton(a.generators, a.vertices, edges, a.initial, a.hom)
    chk = verify_strong_markov(broken, spec, 8)
    assert not chk.ok
    assert chk.n_checked == 2
    assert chk.witness == ("a", "b")
    assert "not represented" in chk.failure


def test_verify_detects_duplicate_paths():
    spec = f2_nu2()
    a = build_free_group_automaton(spec)
    edges = dict(a.edges)
    edges[(STAR, "a2")] = "a"
    for y in ("a", "b", "B"):
        edges[("a2", y)] = y
    dup = Automaton(a.generators, a.vertices + ("a2",), edges, a.initial, a.hom)
    chk = verify_strong_markov(dup, spec, 4)
    assert not chk.ok
    assert chk.n_checked == 1
    assert "same element" in chk.failure


def test_verify_detects_non_geodesic():
    spec = f2_nu2()
    a = build_free_group_automaton(spec)
    edges = dict(a.edges)
    edges[("a", "A")] = "A"
    chk = verify_strong_markov(Automaton(a.generators, a.vertices, edges, a.initial, a.hom), spec, 4)
    assert not chk.ok and "non-geodesic" in chk.failure
