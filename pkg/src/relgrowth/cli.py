"""Command line interface.

Exit codes: 0 success (possibly with skipped checks), 1 invalid input,
2 budget exceeded, 3 a reported check failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import counting, lattice, series, spectral
from .automaton import Automaton, AutomatonError, ComponentAnalysis, build_cj, decompose, load_automaton, validate
from .counting import EdgeWeighting, edge_weighting
from .groups import BudgetExceeded, FreeGroupSpec, build_free_group_automaton, oracle_counts, verify_strong_markov

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_FAIL = 0, 1, 2, 3


@dataclass
class RunConfig:
    input: str | None = None
    group: str | None = None
    hom: str | None = None
    n_max: int = 40
    grid: int = 16
    max_order: int = 20
    window: tuple[int, int] | None = None
    target: tuple[int, ...] | None = None
    out_dir: str = "out"
    seed: int = 0
    word_budget: int = 10**7
    cell_budget: int = counting.DEFAULT_CELL_BUDGET
    samples: int = 1000

    def check(self):
        if self.n_max < 4:
            raise ValueError("n_max must be at least 4")
        if self.grid < 8:
            raise ValueError("grid size must be at least 8")
        if min(self.word_budget, self.cell_budget, self.max_order, self.samples) <= 0:
            raise ValueError("budgets must be positive")
        if self.input is None and self.group is None:
            raise ValueError("give --input FILE or --group f2|f3")


class CliError(Exception):
    def __init__(self, msg, code=EXIT_INVALID):
        super().__init__(msg)
        self.code = code


def parse_hom(text: str) -> dict[str, tuple[int, ...]]:
    """``"a:1,0;b:0,1"`` -> {"a": (1, 0), "b": (0, 1)}."""
    out = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        name, _, vals = part.partition(":")
        out[name.strip()] = tuple(int(x) for x in vals.split(","))
    return out


def parse_window(text: str) -> tuple[int, int]:
    a, _, b = text.partition(":")
    return int(a), int(b)


def group_spec(cfg: RunConfig) -> FreeGroupSpec:
    k = {"f2": 2, "f3": 3}.get(cfg.group or "")
    if k is None:
        raise CliError(f"unknown built-in group {cfg.group!r} (choose f2 or f3)")
    if not cfg.hom:
        return FreeGroupSpec.abelianization(k)
    hom = parse_hom(cfg.hom)
    names = tuple("abc"[:k])
    if set(hom) != set(names):
        raise CliError("homomorphism incomplete: --hom must give every positive generator")
    return FreeGroupSpec(k, tuple(hom[n] for n in names), names)


def load_input(cfg: RunConfig) -> tuple[Automaton, EdgeWeighting | None]:
    if cfg.input:
        try:
            a = load_automaton(cfg.input)
        except OSError as e:
            raise CliError(f"cannot read {cfg.input}: {e}") from e
        hom = parse_hom(cfg.hom) if cfg.hom else None
    else:
        a = build_free_group_automaton(group_spec(cfg))
        hom = None
    return a, edge_weighting(a, hom)


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


# ---------------------------------------------------------------------------
# subcommands


def _validated(cfg) -> tuple[Automaton, EdgeWeighting, ComponentAnalysis]:
    a, w = load_input(cfg)
    rep = validate(a)
    if not rep.ok:
        raise CliError(str(rep))
    return a, w, decompose(a)


def cmd_validate(cfg: RunConfig, out) -> int:
    lines = []
    try:
        a, w = load_input(cfg)
    except AutomatonError as e:
        lines.append(f"invalid: {e}")
        code = EXIT_INVALID
    else:
        rep = validate(a)
        lines.append(str(rep))
        code = EXIT_OK if rep.ok else EXIT_INVALID
        if rep.ok:
            lines.append(f"vertices: {len(a.vertices)}, edges: {len(a.edges)}, nu: {w.nu}")
    text = "\n".join(lines) + "\n"
    write_atomic(Path(cfg.out_dir) / "validation.txt", text)
    out.write(text)
    return code


def analysis_text(a, w, ca, cfg) -> tuple[str, bool]:
    lines = [f"lambda = {fmt(ca.lam)}", f"components (block lower-triangular order): {len(ca.components)}"]
    for i, comp in enumerate(ca.components):
        names = ",".join(a.vertices[v] for v in comp)
        tag = f"maximal, p = {ca.periods[i]}" if ca.maximal[i] else "non-maximal"
        lines.append(f"  [{i}] {{{names}}} radius {fmt(ca.radii[i])} ({tag})")
    rep = lattice.lattice_report(a, ca, w)
    lines.append(rep.format())
    ok = True
    for j, pts in enumerate(rep.dual):
        cj = build_cj(a, ca, j)
        M = cfg.grid
        denoms = [Fraction(x).denominator for t in pts for x in t]
        if any(M % d for d in denoms):
            M = math.lcm(M, *denoms)
        scan = spectral.torus_scan(cj, w, M, ca.lam, exclude=pts)
        same = sorted(scan.near_max) == sorted(pts)
        ok &= same
        lines.append(f"component {j + 1}: torus scan (M = {M}) near-maximal set "
                     + ", ".join(lattice.format_point(t) for t in scan.near_max)
                     + f"; cross-check {'PASS' if same else 'FAIL'}; epsilon = {fmt(scan.epsilon)}")
    return "\n".join(lines) + "\n", ok


def cmd_analyze(cfg, out) -> int:
    a, w, ca = _validated(cfg)
    try:
        text, ok = analysis_text(a, w, ca, cfg)
    except lattice.LatticeError as e:
        raise CliError(f"structure analysis failed: {e}") from e
    write_atomic(Path(cfg.out_dir) / "analysis.txt", text)
    out.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def _max_n_within(w: EdgeWeighting, nv: int, cap: int) -> int:
    n = 0
    while (2 * w.F * (n + 1) + 1) ** w.nu * nv <= cap:
        n += 1
        if n > 10**6:
            break
    return n


def growth_sequences(a, w, cfg) -> tuple[list[int], list[int], bool]:
    """(rel, tot, truncated) up to n_max, truncated to the budget if needed."""
    n = cfg.n_max
    truncated = False
    try:
        counting._check_budget(w, len(a.vertices), n, cfg.cell_budget)
    except BudgetExceeded:
        n = _max_n_within(w, len(a.vertices), cfg.cell_budget)
        truncated = True
    rel, tot = counting.relative_growth_sequence(a, w, n, cfg.target, cfg.cell_budget)
    return rel, tot, truncated


def cmd_count(cfg, out) -> int:
    a, w, ca = _validated(cfg)
    rel, tot, truncated = growth_sequences(a, w, cfg)
    text = counting.write_growth_csv(rel, tot)
    write_atomic(Path(cfg.out_dir) / "counts.csv", text)
    out.write(text)
    if truncated:
        sys.stderr.write(f"budget exceeded: counts stop at n = {len(tot) - 1}\n")
        return EXIT_BUDGET
    return EXIT_OK


def cmd_scan(cfg, out) -> int:
    a, w, ca = _validated(cfg)
    rng = np.random.default_rng(cfg.seed)
    lines = []
    near = {}
    ok = True
    csv_parts = []
    for j in range(len(ca.maximal_indices)):
        cj = build_cj(a, ca, j)
        scan = spectral.torus_scan(cj, w, cfg.grid, ca.lam)
        near[f"component_{j + 1}"] = [[str(x) for x in t] for t in scan.near_max]
        csv_parts.append(scan.to_csv().replace("radius", f"radius_{j + 1}"))
        pts = rng.random((cfg.samples, w.nu))
        radii = spectral.batched_radii(cj, w, pts)
        bound_ok = bool(np.all(radii <= ca.lam + 1e-9))
        ok &= bound_ok and bool(np.all(scan.radii <= ca.lam + 1e-9))
        lines.append(f"component {j + 1}: near-maximal grid points "
                     + ", ".join(lattice.format_point(t) for t in scan.near_max))
        lines.append(f"  max radius away from them: lambda - {fmt(scan.epsilon)}")
        lines.append(f"  radius <= lambda at {cfg.samples} random points: {'PASS' if bound_ok else 'FAIL'}")
    d = Path(cfg.out_dir)
    write_atomic(d / "scan.csv", "".join(csv_parts))
    write_atomic(d / "near_max.json", json.dumps(near, indent=2) + "\n")
    text = "\n".join(lines) + "\n"
    out.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def fourier_rows(a, w, ca, n_max: int, target=None):
    table = counting.count_by_weight(a, w, n_max)
    tgt = target if target is not None else (0,) * w.nu
    rows = []
    for n in range(n_max + 1):
        M = 2 * w.F * n + 1
        val, res = counting.fourier_count(a, w, n, M, target=tgt, ca=ca, return_residual=True)
        rows.append((n, M, val, table.count(n, tgt), float(res)))
    return rows


def cmd_fourier(cfg, out) -> int:
    a, w, ca = _validated(cfg)
    n_max = min(cfg.n_max, 16)
    rows = fourier_rows(a, w, ca, n_max, cfg.target)
    lines = ["n,grid,fourier,exact,residual"]
    ok = True
    for n, M, val, exact, res in rows:
        ok &= val == exact and res < 0.5
        lines.append(f"{n},{M},{val},{exact},{res:.12g}")
    text = "\n".join(lines) + "\n"
    write_atomic(Path(cfg.out_dir) / "fourier.csv", text)
    out.write(text)
    out.write(f"Fourier inversion matches exact counts: {'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_FAIL


def default_window(cfg) -> tuple[int, int]:
    return cfg.window or (40, cfg.n_max)


def cmd_fit(cfg, out) -> int:
    a, w, ca = _validated(cfg)
    rep = lattice.lattice_report(a, ca, w)
    rel, tot, truncated = growth_sequences(a, w, cfg)
    D = rep.D_lcm
    try:
        fit = series.asymptotic_fit(rel, ca.lam, D, default_window(cfg))
    except series.SeriesError as e:
        out.write(f"fit SKIPPED: {e}\n")
        return EXIT_BUDGET if truncated else EXIT_OK
    text = f"{fit}\nexpected slope -nu/2 = {fmt(-w.nu / 2)}\n"
    d = Path(cfg.out_dir)
    write_atomic(d / "fit.txt", text)
    write_atomic(d / "fit_residuals.dat", series.gnuplot_residuals(rel, ca.lam, fit))
    out.write(text)
    return EXIT_BUDGET if truncated else EXIT_OK


def cmd_rationality(cfg, out) -> int:
    a, w, ca = _validated(cfg)
    rel, tot, truncated = growth_sequences(a, w, cfg)
    K = cfg.max_order
    lines = []
    for label, seq in (("totals", tot), ("relative growth", rel)):
        try:
            r = series.min_recurrence(seq, K)
            lines.append(f"{label}: {r}")
        except series.SeriesError as e:
            lines.append(f"{label}: SKIPPED ({e})")
    text = "\n".join(lines) + "\n"
    write_atomic(Path(cfg.out_dir) / "rationality.txt", text)
    out.write(text)
    return EXIT_BUDGET if truncated else EXIT_OK


def cmd_oracle(cfg, out) -> int:
    if not cfg.group:
        raise CliError("the oracle needs a built-in group (--group f2|f3)")
    spec = group_spec(cfg)
    try:
        ball = oracle_counts(spec, cfg.n_max, cfg.word_budget)
    except BudgetExceeded as e:
        raise CliError(str(e), EXIT_BUDGET) from e
    a = build_free_group_automaton(spec)
    chk = verify_strong_markov(a, spec, min(cfg.n_max, 8), cfg.word_budget)
    write_atomic(Path(cfg.out_dir) / "oracle.csv", ball.to_csv())
    out.write(ball.to_csv())
    out.write(f"{chk}\n")
    return EXIT_OK if chk.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# consolidated report


def build_report(cfg):
    """Run every check.

    Returns rows of (name, PASS/FAIL/SKIPPED, detail), the growth sequences
    and whether they were truncated by the cell budget.
    """
    a, w, ca = _validated(cfg)
    rows = []

    def add(name, status, detail=""):
        rows.append((name, status, detail))

    add("validation", "PASS", f"{len(ca.maximal_indices)} maximal component(s), lambda = {fmt(ca.lam)}")
    rep = lattice.lattice_report(a, ca, w)
    D = rep.D_lcm
    _, ok = analysis_text(a, w, ca, cfg)
    add("dual points = torus scan level set", "PASS" if ok else "FAIL",
        f"p = {[g.period for g in rep.indices]}, D_j = {[g.D for g in rep.indices]}, D = {D}")

    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for j in range(len(ca.maximal_indices)):
        radii = spectral.batched_radii(build_cj(a, ca, j), w, rng.random((cfg.samples, w.nu)))
        worst = max(worst, float(radii.max()))
    add("radius <= lambda at random torus points", "PASS" if worst <= ca.lam + 1e-9 else "FAIL",
        f"max radius {fmt(worst)}")

    rel, tot, truncated = growth_sequences(a, w, cfg)
    nf = min(16, len(tot) - 1)
    frows = fourier_rows(a, w, ca, nf)
    fok = all(v == e and r < 0.5 for _, _, v, e, r in frows)
    add("Fourier inversion = exact counts", "PASS" if fok else "FAIL",
        f"n <= {nf}, max residual {fmt(max(r for *_, r in frows))}")

    table = counting.count_by_weight(a, w, min(12, len(tot) - 1))
    worst = 0.0
    for n in range(table.n_max + 1):
        for t in rng.random((8, w.nu)):
            d = abs(counting.character_sum_table(table, t, n) - counting.character_sum_matrix(a, w, t, n, ca))
            worst = max(worst, d / ca.lam**n)
    add("character sums: table route = matrix route", "PASS" if worst < 1e-9 else "FAIL",
        f"max |difference| / lambda^n = {worst:.3g}")

    try:
        br = series.coornaert_check(tot, ca.lam, step=D)
        add("purely exponential totals", "PASS" if br.c1 > 0 and br.stable else "FAIL",
            f"[{fmt(br.c1)}, {fmt(br.c2)}], tail spread {br.spread:.3g}")
    except series.SeriesError as e:
        add("purely exponential totals", "SKIPPED", str(e))

    try:
        fit = series.asymptotic_fit(rel, ca.lam, D, default_window(cfg))
        good = abs(fit.slope + w.nu / 2) <= 0.1 and fit.constant > 0
        add("asymptotic exponent -nu/2", "PASS" if good else "FAIL", str(fit))
    except series.SeriesError as e:
        add("asymptotic exponent -nu/2", "SKIPPED", f"window unmet: {e}")

    K = cfg.max_order
    nv = len(a.vertices)
    try:
        rt = series.min_recurrence(tot, min(K, nv + 1))
        add("totals satisfy a recurrence (rational control)", "PASS" if rt.found else "FAIL", str(rt))
    except series.SeriesError as e:
        add("totals satisfy a recurrence (rational control)", "SKIPPED", str(e))
    try:
        rr = series.min_recurrence(rel, K)
        add(f"no recurrence of order <= {K} for relative growth", "FAIL" if rr.found else "PASS", str(rr))
    except series.SeriesError as e:
        add(f"no recurrence of order <= {K} for relative growth", "SKIPPED", str(e))

    dens = series.density_ratio(rel, tot, D)
    add("density ratio decays to 0", "PASS" if dens.verdict == "decay" else "FAIL",
        f"log-log slope {fmt(dens.decay_exponent)}, r(end)/r(end/2) = {fmt(dens.ratio_at_doubling)}")
    return rows, (rel, tot), truncated


def cmd_report(cfg, out) -> int:
    rows, (rel, tot), truncated = build_report(cfg)
    d = Path(cfg.out_dir)
    lines = [f"{status:8s} {name}: {detail}" for name, status, detail in rows]
    lines.append("data files: counts.csv, report.txt in " + str(d))
    text = "\n".join(lines) + "\n"
    write_atomic(d / "counts.csv", counting.write_growth_csv(rel, tot))
    write_atomic(d / "report.txt", text)
    out.write(text)
    if any(s == "FAIL" for _, s, _ in rows):
        return EXIT_FAIL
    if any(s == "SKIPPED" for _, s, _ in rows):
        sys.stderr.write("warning: some checks were skipped\n")
    return EXIT_BUDGET if truncated else EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "count": cmd_count,
    "scan": cmd_scan,
    "fourier": cmd_fourier,
    "fit": cmd_fit,
    "rationality": cmd_rationality,
    "oracle": cmd_oracle,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relgrowth", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON file with RunConfig fields; flags take precedence")
    p.add_argument("--input", help="automaton file")
    p.add_argument("--group", choices=["f2", "f3"], help="built-in free group")
    p.add_argument("--hom", help='homomorphism, e.g. "a:1,0;b:0,1"')
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("--grid", type=int)
    p.add_argument("--max-order", type=int, dest="max_order")
    p.add_argument("--window", type=parse_window, help="fit window a:b")
    p.add_argument("--target", help="weight vector, e.g. 1,0")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--word-budget", type=int, dest="word_budget")
    p.add_argument("--cell-budget", type=int, dest="cell_budget")
    p.add_argument("--samples", type=int)
    return p


def make_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if ns.config:
        with open(ns.config) as fh:
            data = json.load(fh)
        names = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(data) - names
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            if k == "window" and v is not None:
                v = tuple(v) if not isinstance(v, str) else parse_window(v)
            if k == "target" and v is not None:
                v = tuple(v)
            setattr(cfg, k, v)
    for f in dataclasses.fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is None:
            continue
        if f.name == "target":
            v = tuple(int(x) for x in v.split(","))
        setattr(cfg, f.name, v)
    cfg.check()
    return cfg


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = make_config(ns)
        return COMMANDS[ns.command](cfg, out)
    except CliError as e:
        sys.stderr.write(f"error: {e}\n")
        return e.code
    except BudgetExceeded as e:
        sys.stderr.write(f"budget exceeded: {e}\n")
        return EXIT_BUDGET
    except (AutomatonError, lattice.LatticeError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
