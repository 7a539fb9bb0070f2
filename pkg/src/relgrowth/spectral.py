"""Character-weighted transfer matrices C_j(t) and their leading spectral data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .counting import EdgeWeighting

NEAR_MAX_TOL = 1e-6


class SpectralError(RuntimeError):
    pass


@dataclass(frozen=True)
class WeightedMatrix:
    matrix: np.ndarray
    t: tuple[float, ...]
    j: int = 0


def weighted_matrix(cj: np.ndarray, w: EdgeWeighting, t, j: int = 0) -> WeightedMatrix:
    """Entry (u, v) is exp(2 pi i <t, f(u, v)>) C_j(u, v)."""
    n = cj.shape[0]
    if cj.shape != (n, n):
        raise ValueError("C_j must be square")
    if any(u >= n or v >= n for (u, v) in w.weights):
        raise ValueError("weighting refers to vertices outside the matrix")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (w.nu,):
        raise ValueError(f"torus point must have {w.nu} coordinates")
    W = w.array(n)
    M = cj.astype(complex) * np.exp(2j * np.pi * (W @ t))
    return WeightedMatrix(M, tuple(float(x) for x in t), j)


def spectral_radius(m) -> float:
    M = m.matrix if isinstance(m, WeightedMatrix) else m
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError:
        return power_radius(M)
    return float(np.max(np.abs(ev)))


def power_radius(M: np.ndarray, iters: int = 5000, restarts: int = 4, seed: int = 0) -> float:
    """Fallback radius estimate: growth rate of ||M^k x|| with random starts."""
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        x = rng.standard_normal(M.shape[0]) + 1j * rng.standard_normal(M.shape[0])
        logs = 0.0
        for _ in range(iters):
            x = M @ x
            nrm = np.linalg.norm(x)
            if nrm == 0:
                break
            logs += np.log(nrm)
            x /= nrm
        best = max(best, float(np.exp(logs / iters)))
    return best


@dataclass
class EigenData:
    eigenvalues: np.ndarray  # the p maximal eigenvalues, ordered by argument from theta
    theta: float  # phase / (2 pi), representative in [0, 1/p)
    gap: float  # radius minus the (p+1)-th largest modulus
    projections: list[np.ndarray]
    coefficients: list[complex]  # <e_* Q_k, 1>


def max_eigendata(m, p: int, star: int = 0, min_gap: float = 1e-6, tol: float = 1e-8) -> EigenData:
    """Leading p eigenvalues and their one-dimensional spectral projections.

    Q_k = u_k v_k^* / (v_k^* u_k) with u_k, v_k right and left eigenvectors.
    """
    M = m.matrix if isinstance(m, WeightedMatrix) else np.asarray(m, dtype=complex)
    vals, vl, vr = scipy.linalg.eig(M, left=True, right=True)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals, vl, vr = vals[order], vl[:, order], vr[:, order]
    mods = np.abs(vals)
    rho = mods[0]
    top = vals[:p]
    if np.max(rho - mods[:p]) > tol * max(1.0, rho):
        raise SpectralError(f"leading moduli differ: {mods[:p]}")
    for a, b in itertools.combinations(range(p), 2):
        if abs(top[a] - top[b]) < 1e-6 * max(1.0, rho):
            raise SpectralError(f"degenerate leading eigenvalue: {top[a]} and {top[b]} collide")
    gap = float(rho - mods[p]) if len(mods) > p else float(rho)
    if gap <= min_gap:
        raise SpectralError(f"no spectral gap after the {p} leading eigenvalues (moduli {mods[:p + 1]})")
    args = np.mod(np.angle(top) / (2 * np.pi), 1.0)
    theta = float(np.min(np.mod(args, 1.0 / p)))
    if theta > 1.0 / p - 1e-12:
        theta = 0.0
    k_order = np.argsort(np.mod(args - theta + 1e-12, 1.0))
    projs, coefs = [], []
    for k in k_order:
        u = vr[:, k]
        v = vl[:, k]
        denom = np.vdot(v, u)
        if abs(denom) < 1e-14:
            raise SpectralError("left and right eigenvectors are orthogonal")
        Q = np.outer(u, v.conj()) / denom
        projs.append(Q)
        coefs.append(complex(Q[star].sum()))
    return EigenData(top[k_order], theta, gap, projs, coefs)


@dataclass
class SpectralScan:
    M: int
    lam: float
    points: np.ndarray  # (M^nu, nu) grid coordinates k/M
    radii: np.ndarray  # (M^nu,)
    near_max: list[tuple[Fraction, ...]]
    epsilon: float | None = None

    def to_csv(self) -> str:
        nu = self.points.shape[1]
        lines = [",".join([*(f"t{i + 1}" for i in range(nu)), "radius"])]
        for p, r in zip(self.points, self.radii):
            lines.append(",".join([*(f"{x:.12g}" for x in p), f"{r:.12g}"]))
        return "\n".join(lines) + "\n"


def torus_distance(a, b) -> float:
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
    return float(np.linalg.norm(np.minimum(d, 1.0 - d)))


def batched_radii(cj: np.ndarray, w: EdgeWeighting, pts: np.ndarray) -> np.ndarray:
    W = w.array(cj.shape[0])
    phase = np.exp(2j * np.pi * np.einsum("uvk,pk->puv", W, pts))
    mats = phase * cj.astype(float)[None]
    return np.max(np.abs(np.linalg.eigvals(mats)), axis=1)


def torus_scan(cj: np.ndarray, w: EdgeWeighting, M: int, lam: float, tol: float = NEAR_MAX_TOL,
               exclude=None, exclude_radius: float = 0.1) -> SpectralScan:
    """Spectral radius of C_j(t) on the uniform M^nu grid.

    ``epsilon`` is lam minus the largest radius at grid points farther than
    ``exclude_radius`` from every point in ``exclude`` (defaults to the
    near-maximal set found by the scan).
    """
    if M < 8:
        raise ValueError("grid size M must be at least 8")
    grid = np.array(list(itertools.product(range(M), repeat=w.nu)), dtype=np.int64)
    pts = grid / M
    radii = batched_radii(cj, w, pts)
    near = [tuple(Fraction(int(k), M) for k in g) for g, r in zip(grid, radii) if r > lam - tol]
    centres = near if exclude is None else list(exclude)
    far = [r for p, r in zip(pts, radii)
           if all(torus_distance(p, [float(x) for x in c]) >= exclude_radius for c in centres)]
    eps = float(lam - max(far)) if far else None
    return SpectralScan(M, lam, pts, radii, near, eps)


def leading_modulus(cj: np.ndarray, w: EdgeWeighting, t) -> float:
    return spectral_radius(weighted_matrix(cj, w, t))


@dataclass
class HessianResult:
    hessian: np.ndarray
    stencil: dict
    richardson_gap: float
    flagged: bool


def _hessian_fd(f, t0: np.ndarray, h: float) -> tuple[np.ndarray, dict]:
    nu = len(t0)
    H = np.zeros((nu, nu))
    vals = {}

    def ev(*offs):
        key = tuple(offs)
        if key not in vals:
            x = t0.copy()
            for i, s in offs:
                x[i] += s * h
            vals[key] = f(x)
        return vals[key]

    f0 = ev()
    for i in range(nu):
        H[i, i] = (ev((i, 1)) - 2 * f0 + ev((i, -1))) / h**2
        for k in range(i + 1, nu):
            H[i, k] = (ev((i, 1), (k, 1)) - ev((i, 1), (k, -1))
                       - ev((i, -1), (k, 1)) + ev((i, -1), (k, -1))) / (4 * h**2)
            H[k, i] = H[i, k]
    return H, vals


def lambda_curve_and_hessian(cj: np.ndarray, w: EdgeWeighting, t0, h: float = 1e-3,
                             lam: float | None = None, min_gap: float = 1e-3,
                             flag_tol: float = 1e-3) -> HessianResult:
    """Central-difference Hessian of log lambda_j(t) at t0, Richardson-refined.

    lambda_j(t) is the modulus of the leading eigenvalue.  The stencil values
    are returned so callers can inspect the curve.  Raises if the spectral gap
    collapses anywhere on the stencil.
    """
    t0 = np.atleast_1d(np.asarray([float(x) for x in t0], dtype=float))

    def loglam(t):
        ev = np.linalg.eigvals(weighted_matrix(cj, w, t).matrix)
        mods = np.sort(np.abs(ev))[::-1]
        top = mods[0]
        # leading group: moduli equal to the top (rotation structure for p > 1)
        rest = mods[np.abs(mods - top) > 1e-7 * max(1.0, top)]
        if rest.size and top - rest[0] < min_gap:
            raise SpectralError(f"spectral gap collapsed at t = {t}")
        return float(np.log(top))

    H1, vals = _hessian_fd(loglam, t0, h)
    H2, _ = _hessian_fd(loglam, t0, h / 2)
    H = (4 * H2 - H1) / 3
    gap = float(np.max(np.abs(H2 - H1)))
    H = (H + H.T) / 2
    stencil = {k: float(np.exp(v)) for k, v in vals.items()}
    return HessianResult(H, stencil, gap, gap > flag_tol)
