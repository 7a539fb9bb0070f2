"""Strongly Markov automata: parsing, validation and component structure.

An automaton is a finite directed graph with a distinguished initial vertex
``*`` (no in-edges), at most one edge per ordered vertex pair, and a
generator label on every edge.  Paths from ``*`` stand for group elements.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

STAR = "*"
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# relative tolerance for calling a component maximal
RADIUS_RTOL = 1e-9


class AutomatonError(ValueError):
    """Malformed automaton text or structurally unusable automaton."""


@dataclass(frozen=True)
class Generator:
    name: str
    inverse: str


@dataclass(frozen=True)
class Automaton:
    generators: dict[str, Generator]
    vertices: tuple[str, ...]
    edges: dict[tuple[str, str], str]
    initial: str = STAR
    hom: dict[str, tuple[int, ...]] | None = None

    @property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @property
    def star(self) -> int:
        return self.vertices.index(self.initial)

    def successors(self, v: str) -> list[str]:
        return [b for (a, b) in self.edges if a == v]

    def transition_matrix(self) -> np.ndarray:
        idx = self.index
        A = np.zeros((len(self.vertices), len(self.vertices)), dtype=np.int64)
        for (u, v) in self.edges:
            A[idx[u], idx[v]] = 1
        return A

    def adjacency(self) -> list[list[int]]:
        idx = self.index
        out: list[list[int]] = [[] for _ in self.vertices]
        for (u, v) in self.edges:
            out[idx[u]].append(idx[v])
        for row in out:
            row.sort()
        return out


def parse_automaton(text: str) -> Automaton:
    """Parse the line-oriented automaton format.

    Recognised directives: ``generators:``, ``involution:``, ``vertices:``,
    ``initial:``, ``edge:`` and ``hom:``.  ``#`` starts a comment.
    """
    gens: list[str] = []
    pairs: list[tuple[str, str]] = []
    vertices: list[str] = []
    initial: str | None = None
    edge_lines: list[tuple[int, str, str, str]] = []
    hom_lines: list[tuple[int, str, list[int]]] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise AutomatonError(f"line {lineno}: expected '<directive>: ...'")
        key, rest = line.split(":", 1)
        key = key.strip().lower()
        toks = rest.split()
        if key == "generators":
            gens.extend(toks)
        elif key == "involution":
            if len(toks) != 2:
                raise AutomatonError(f"line {lineno}: involution takes two names")
            pairs.append((toks[0], toks[1]))
        elif key == "vertices":
            vertices.extend(toks)
        elif key == "initial":
            if len(toks) != 1:
                raise AutomatonError(f"line {lineno}: initial takes one vertex")
            initial = toks[0]
        elif key == "edge":
            if len(toks) != 3:
                raise AutomatonError(f"line {lineno}: edge takes <from> <to> <generator>")
            edge_lines.append((lineno, *toks))
        elif key == "hom":
            if len(toks) < 2:
                raise AutomatonError(f"line {lineno}: hom takes <generator> <int>+")
            try:
                hom_lines.append((lineno, toks[0], [int(x) for x in toks[1:]]))
            except ValueError:
                raise AutomatonError(f"line {lineno}: hom entries must be integers") from None
        else:
            raise AutomatonError(f"line {lineno}: unknown directive {key!r}")

    for g in gens:
        if not _NAME.match(g):
            raise AutomatonError(f"bad generator name {g!r}")
    if len(set(gens)) != len(gens):
        raise AutomatonError("duplicate generator name")
    if not gens:
        raise AutomatonError("no generators declared")

    inverse: dict[str, str] = {}
    for a, b in pairs:
        for x in (a, b):
            if x not in gens:
                raise AutomatonError(f"involution mentions unknown generator {x!r}")
        for x, y in ((a, b), (b, a)):
            if inverse.get(x, y) != y:
                raise AutomatonError(f"involution not a pairing: {x!r} paired twice")
            inverse[x] = y
    missing = [g for g in gens if g not in inverse]
    if missing:
        raise AutomatonError(f"involution not a pairing: no inverse for {', '.join(missing)}")
    generators = {g: Generator(g, inverse[g]) for g in gens}

    if initial is None:
        raise AutomatonError("missing initial vertex")
    if initial != STAR:
        raise AutomatonError("initial vertex must be '*'")
    if STAR not in vertices:
        raise AutomatonError("vertex list must include '*'")
    if len(set(vertices)) != len(vertices):
        raise AutomatonError("duplicate vertex name")
    for v in vertices:
        if v != STAR and not _NAME.match(v):
            raise AutomatonError(f"bad vertex name {v!r}")

    vset = set(vertices)
    edges: dict[tuple[str, str], str] = {}
    for lineno, u, v, g in edge_lines:
        if u not in vset or v not in vset:
            raise AutomatonError(f"line {lineno}: edge uses undeclared vertex")
        if g not in generators:
            raise AutomatonError(f"line {lineno}: unknown generator {g!r} in label")
        if v == STAR:
            raise AutomatonError(f"line {lineno}: edge ({u}, *) ends at the initial vertex")
        if (u, v) in edges:
            raise AutomatonError(f"line {lineno}: duplicate edge {u} -> {v}")
        edges[(u, v)] = g

    hom = None
    if hom_lines:
        hom = {}
        dims = {len(vals) for _, _, vals in hom_lines}
        if len(dims) != 1:
            raise AutomatonError("hom lines disagree on the dimension nu")
        for lineno, g, vals in hom_lines:
            if g not in generators:
                raise AutomatonError(f"line {lineno}: hom for unknown generator {g!r}")
            if g in hom:
                raise AutomatonError(f"line {lineno}: duplicate hom for {g!r}")
            hom[g] = tuple(vals)

    return Automaton(generators, tuple(vertices), edges, initial, hom)


def load_automaton(path) -> Automaton:
    with open(path) as fh:
        return parse_automaton(fh.read())


def format_automaton(a: Automaton) -> str:
    """Inverse of :func:`parse_automaton` (up to comments and ordering)."""
    lines = ["generators: " + " ".join(a.generators)]
    seen = set()
    for g in a.generators.values():
        if g.name in seen:
            continue
        seen.update((g.name, g.inverse))
        lines.append(f"involution: {g.name} {g.inverse}")
    lines.append("vertices: " + " ".join(a.vertices))
    lines.append(f"initial: {a.initial}")
    for (u, v), g in a.edges.items():
        lines.append(f"edge: {u} {v} {g}")
    if a.hom:
        for g, w in a.hom.items():
            lines.append(f"hom: {g} " + " ".join(map(str, w)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# strongly connected components


def strongly_connected_components(adj: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative.

    Components come out in reverse topological order of the condensation
    (sinks first); every component's vertex list is sorted.
    """
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for k in range(i, len(adj[v])):
                w = adj[v][k]
                if index[w] < 0:
                    work.append((v, k + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


def is_trivial(comp: list[int], adj: list[list[int]]) -> bool:
    """Single vertex without a self-loop: no cycles at all."""
    return len(comp) == 1 and comp[0] not in adj[comp[0]]


def spectral_radius_dense(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M.astype(float)))))


def cyclic_period(adj: list[list[int]], comp: list[int]) -> tuple[int, list[list[int]]]:
    """Period of an irreducible component and its cyclic classes.

    BFS from the smallest vertex inside the component; the period is the gcd
    of ``depth(u) + 1 - depth(v)`` over internal edges u -> v.  Class k holds
    vertices with depth congruent to k mod the period, so every internal edge
    goes from class k to class k+1.
    """
    if not comp or is_trivial(comp, adj):
        raise AutomatonError("undefined period: trivial component has no cycles")
    members = set(comp)
    base = comp[0]
    depth = {base: 0}
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in members and v not in depth:
                depth[v] = depth[u] + 1
                queue.append(v)
    g = 0
    for u in comp:
        for v in adj[u]:
            if v in members:
                g = math.gcd(g, abs(depth[u] + 1 - depth[v]))
    classes: list[list[int]] = [[] for _ in range(g)]
    for v in comp:
        classes[depth[v] % g].append(v)
    return g, classes


# ---------------------------------------------------------------------------
# validation and decomposition


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    maximal_components: list[list[str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        if self.ok:
            comps = "; ".join("{" + ", ".join(c) + "}" for c in self.maximal_components)
            return f"valid: {len(self.maximal_components)} maximal component(s): {comps}"
        return "invalid:\n" + "\n".join("  - " + e for e in self.errors)


@dataclass(frozen=True)
class ComponentAnalysis:
    """SCCs of the transition matrix in block lower-triangular order.

    ``components[i]`` lists vertex indices.  Edges stay inside a block or run
    from a later block to an earlier one, so reordering A by the concatenated
    components makes it block lower-triangular.
    """

    components: tuple[tuple[int, ...], ...]
    radii: tuple[float, ...]
    maximal: tuple[bool, ...]
    periods: dict[int, int]
    classes: dict[int, tuple[tuple[int, ...], ...]]
    lam: float

    @property
    def maximal_indices(self) -> list[int]:
        return [i for i, m in enumerate(self.maximal) if m]

    def order(self) -> list[int]:
        return [v for comp in self.components for v in comp]

    def cj_mask(self, j: int) -> np.ndarray:
        """Boolean vertex mask: False on vertices of other maximal components."""
        idx = self.maximal_indices
        if not 0 <= j < len(idx):
            raise IndexError(f"maximal index {j} out of range (have {len(idx)})")
        n = sum(len(c) for c in self.components)
        mask = np.ones(n, dtype=bool)
        for k, ci in enumerate(idx):
            if k != j:
                mask[list(self.components[ci])] = False
        return mask

    def nonmaximal_mask(self) -> np.ndarray:
        n = sum(len(c) for c in self.components)
        mask = np.ones(n, dtype=bool)
        for ci in self.maximal_indices:
            mask[list(self.components[ci])] = False
        return mask


def _radius_close(r: float, lam: float) -> bool:
    return abs(r - lam) <= RADIUS_RTOL * max(1.0, lam)


def _analyse(a: Automaton) -> ComponentAnalysis:
    A = a.transition_matrix()
    adj = a.adjacency()
    # Tarjan emits sinks first; edges then run from later to earlier blocks,
    # so the block matrix is lower triangular.
    comps = strongly_connected_components(adj)
    radii = []
    for comp in comps:
        if is_trivial(comp, adj):
            radii.append(0.0)
        else:
            radii.append(spectral_radius_dense(A[np.ix_(comp, comp)]))
    lam = max(radii) if radii else 0.0
    maximal = tuple(lam > 0 and _radius_close(r, lam) for r in radii)
    periods, classes = {}, {}
    for i, comp in enumerate(comps):
        if maximal[i]:
            p, cls = cyclic_period(adj, comp)
            periods[i] = p
            classes[i] = tuple(tuple(c) for c in cls)
    return ComponentAnalysis(
        components=tuple(tuple(c) for c in comps),
        radii=tuple(radii),
        maximal=maximal,
        periods=periods,
        classes=classes,
        lam=lam,
    )


def _reach(adj: list[list[int]], sources: list[int]) -> dict[int, int]:
    """BFS predecessor map from a set of sources."""
    pred = {s: -1 for s in sources}
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in pred:
                pred[v] = u
                queue.append(v)
    return pred


def validate(a: Automaton) -> ValidationReport:
    """Structural checks: no edge into ``*``, reachability from ``*``, and
    no path between distinct maximal components."""
    rep = ValidationReport()
    names = a.vertices
    for (u, v) in a.edges:
        if v == a.initial:
            rep.errors.append(f"edge into initial vertex: {u} -> {v}")
    adj = a.adjacency()
    reached = _reach(adj, [a.star])
    for i, v in enumerate(names):
        if i not in reached:
            rep.errors.append(f"vertex {v} is not reachable from *")
    if not a.edges:
        rep.errors.append("automaton has no edges")
        return rep

    ca = _analyse(a)
    if not ca.maximal_indices:
        rep.errors.append("no component with positive spectral radius")
        return rep
    for i in ca.maximal_indices:
        start = list(ca.components[i])
        pred = _reach(adj, start)
        for k in ca.maximal_indices:
            if k == i:
                continue
            hit = [v for v in ca.components[k] if v in pred]
            if hit:
                path = [hit[0]]
                while pred[path[-1]] != -1:
                    path.append(pred[path[-1]])
                path.reverse()
                rep.errors.append(
                    "path between maximal components: " + " -> ".join(names[x] for x in path)
                )
    rep.maximal_components = [
        [names[v] for v in ca.components[i]] for i in ca.maximal_indices
    ]
    return rep


def decompose(a: Automaton) -> ComponentAnalysis:
    rep = validate(a)
    if not rep.ok:
        raise AutomatonError(str(rep))
    return _analyse(a)


def component_period(a: Automaton, comp) -> tuple[int, list[list[int]]]:
    return cyclic_period(a.adjacency(), sorted(comp))


def build_cj(a: Automaton, ca: ComponentAnalysis, j: int) -> np.ndarray:
    """Transition matrix with rows/columns of the other maximal components zeroed."""
    mask = ca.cj_mask(j)
    A = a.transition_matrix()
    return A * np.outer(mask, mask)
