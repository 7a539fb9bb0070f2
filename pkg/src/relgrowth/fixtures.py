"""Shipped automaton fixtures, loaded by name."""

from __future__ import annotations

from importlib import resources

from .automaton import Automaton, parse_automaton

GROUP_FIXTURES = ("f2", "f2_nu1", "f3")
SYNTHETIC_VALID = ("period2", "bipartite", "two_max_disjoint", "two_chains", "hexagon")
SYNTHETIC_INVALID = ("two_max", "unreachable")


def fixture_text(name: str) -> str:
    return resources.files(__package__).joinpath("fixtures", f"{name}.aut").read_text()


def load_fixture(name: str) -> Automaton:
    return parse_automaton(fixture_text(name))


def all_fixture_names() -> list[str]:
    return sorted(
        p.name[:-4] for p in resources.files(__package__).joinpath("fixtures").iterdir()
        if p.name.endswith(".aut")
    )
