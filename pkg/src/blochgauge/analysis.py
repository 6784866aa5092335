"""Numerical evaluators for the modulus criteria of Bloch-type membership.

All suprema over the open sub-ball B_z are taken over the boundary sphere of the
closed ball of radius d_z/2.  |f| and P nu are continuous up to that sphere and
obey maximum principles, so the two sups agree; for a zero-free f the same holds
for the infimum.  Everything that can underflow (|F| ~ exp(-2000) for singular
inner functions near an atom) is carried in log form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import norm as _gauss
from scipy.stats import qmc

from . import quadrature as quad
from .boundary import BoundaryData
from .errors import InconsistencyError, PreconditionError, SingularityError
from .functions import HoloFunction, Rescaled, as_batch
from .geometry import BallPoint, as_point
from .weights import Weight, moderateness_constant

__all__ = [
    "SampleGrid",
    "CriteriaReport",
    "sphere_points",
    "sup_modulus",
    "inf_modulus",
    "in_E",
    "winding_number",
    "count_zeros",
    "condition_i",
    "condition_ii",
    "condition_iii",
    "condition_iv",
    "evaluate_conditions",
    "schwarz_pick_margin",
    "rescale_to_subball",
    "theorem2_quantity",
    "theorem2_grid",
    "little_bloch_scan",
    "audit",
    "trend",
    "GROWTH_RATIO",
    "GROWTH_RUN",
]

DEFAULT_K = 10
DEFAULT_J = 64
DEFAULT_BOUNDARY_SAMPLES = 64
ASCENT_STEPS = 20
CONTOUR_SAMPLES = 256
CONTOUR_SHRINK = 1.0 - 1e-6
FLAT_CONTOUR = 1e-12
CONSISTENCY_SLACK = 1e-12
GROWTH_RATIO = 1.2
GROWTH_RUN = 3
UNVERIFIED_E = "E-membership assumed false (unverified)"
UNVERIFIED_MODERATE = "omega moderateness unverified"


def sphere_points(n: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` deterministic low-discrepancy unit vectors in C^n (shape (count, n)).

    For n = 1 these are the equispaced points exp(2 pi i j / count).
    """
    if n == 1:
        return np.exp(2j * np.pi * np.arange(count) / count)[:, None]
    u = qmc.Halton(d=2 * n, scramble=True, seed=seed).random(count)
    g = _gauss.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    z = g[:, :n] + 1j * g[:, n:]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True)
class SampleGrid:
    """Radii 1 - 2^-k (k = 1..K) times J directions."""

    n: int = 1
    K: int = DEFAULT_K
    J: int = DEFAULT_J
    seed: int = 0
    directions: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "directions", sphere_points(self.n, self.J, self.seed))

    def d(self, k: int) -> float:
        return 2.0 ** (-k)

    def row(self, k: int) -> np.ndarray:
        """Sample points with d_z = 2^-k, shape (J, n)."""
        return (1.0 - self.d(k)) * self.directions

    def points(self, k: int) -> list[BallPoint]:
        r = 1.0 - self.d(k)
        return [BallPoint.polar(r, u) for u in self.directions]

    @property
    def ks(self) -> range:
        return range(1, self.K + 1)


# --------------------------------------------------------------------------
# extremal moduli over sub-ball boundaries


def _check_finite_points(Z, vals):
    bad = np.flatnonzero(np.isnan(vals))
    if bad.size:
        p = Z[bad[0]]
        raise InconsistencyError(f"non-finite modulus at {p}", point=p)


def _ascend(f, centers, radii, u, best, sense):
    """Projected ascent of sense*log|f| on the spheres |w - c| = r, from unit offsets u."""
    u = u.copy()
    step = np.full(centers.shape[0], 0.5)
    for _ in range(ASCENT_STEPS):
        w = centers + radii[:, None] * u
        # real gradient of log|f| is conj(grad f / f)
        g = np.nan_to_num(sense * np.conj(f.log_grad(w)))
        tang = g - np.real(np.sum(g * u.conj(), axis=1))[:, None] * u
        tn = np.linalg.norm(tang, axis=1)
        move = tn > 1e-300
        cand = u + step[:, None] * np.where(move[:, None], tang / np.where(move, tn, 1.0)[:, None], 0)
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        lc = f.log_abs(centers + radii[:, None] * cand)
        better = (sense * lc > sense * best) & move
        u[better] = cand[better]
        best = np.where(better, lc, best)
        step = np.where(better, step, step * 0.5)
    return best, centers + radii[:, None] * u


def _log_extremes(f: HoloFunction, centers, radii, samples: int, seed: int, want_min: bool = True):
    """(max log|f|, min log|f|) over the spheres |w - c| = r; min is None unless wanted.

    n = 1: ``samples`` equispaced circle points.  n > 1: ``samples`` low-discrepancy
    sphere points, then ASCENT_STEPS steps of projected ascent from the best one.
    """
    centers = as_batch(centers, f.n)
    m, n = centers.shape
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (m,))
    U = sphere_points(n, samples, seed)
    W = centers[:, None, :] + radii[:, None, None] * U[None, :, :]
    L = f.log_abs(W.reshape(-1, n)).reshape(m, samples)
    _check_finite_points(W.reshape(-1, n), L.ravel())
    rows = np.arange(m)
    jmax = np.argmax(L, axis=1)
    hi = L[rows, jmax]
    lo = None
    if want_min:
        jmin = np.argmin(L, axis=1)
        lo = L[rows, jmin]
    if n > 1:
        hi, _ = _ascend(f, centers, radii, U[jmax], hi, +1)
        if want_min:
            lo, _ = _ascend(f, centers, radii, U[jmin], lo, -1)
    return hi, lo


def log_sup_modulus(f, centers, samples=DEFAULT_BOUNDARY_SAMPLES, seed=0, radii=None):
    centers = as_batch(centers, f.n)
    if radii is None:
        radii = (1.0 - np.linalg.norm(centers, axis=1)) / 2.0
    return _log_extremes(f, centers, radii, samples, seed, want_min=False)[0]


def sup_modulus(f: HoloFunction, z, boundary_samples: int = DEFAULT_BOUNDARY_SAMPLES, seed: int = 0) -> float:
    """M_f(z), the sup of |f| over B_z, read off the boundary sphere."""
    z = as_point(z)
    return float(np.exp(log_sup_modulus(f, z.coords[None, :], boundary_samples, seed, z.dz / 2)[0]))


# --------------------------------------------------------------------------
# zeros


def winding_number(f: HoloFunction, center: complex, radius: float, samples: int = CONTOUR_SAMPLES) -> float:
    """(1 / 2 pi i) * contour integral of f'/f over |w - center| = radius (trapezoid)."""
    return float(_winding_many(f, np.array([complex(center)]), np.array([float(radius)]), samples)[0])


def _winding_many(f, centers, radii, samples):
    t = np.exp(2j * np.pi * np.arange(samples) / samples)
    W = centers[:, None] + radii[:, None] * t[None, :]
    flat = W.ravel()
    L, q = f.log_abs_grad(flat)
    L = L.reshape(W.shape)
    q = q[:, 0].reshape(W.shape)
    rel = L - np.max(L, axis=1, keepdims=True)
    flat_hit = np.any(rel < math.log(FLAT_CONTOUR), axis=1)
    vals = np.real(np.mean(q * (W - centers[:, None]), axis=1))
    return np.where(flat_hit, np.nan, vals)


def count_zeros(f: HoloFunction, center: complex, radius: float, samples: int = CONTOUR_SAMPLES) -> int:
    """Zeros of a one-variable f inside |w - center| < radius, by the argument principle."""
    return int(_count_many(f, np.array([complex(center)]), np.array([float(radius)]), samples)[0])


def _count_many(f, centers, radii, samples=CONTOUR_SAMPLES):
    centers = np.asarray(centers, dtype=complex)
    radii = np.asarray(radii, dtype=float)
    out = np.empty(centers.size, dtype=int)
    todo = np.arange(centers.size)
    rr = radii.copy()
    for attempt in range(2):
        if todo.size == 0:
            break
        s = samples
        vals = _winding_many(f, centers[todo], rr[todo], s)
        # refine where the trapezoid has not yet resolved an integer
        while s < 8192:
            off = ~np.isnan(vals) & (np.abs(vals - np.round(vals)) > 0.05)
            if not off.any():
                break
            s *= 4
            vals[off] = _winding_many(f, centers[todo][off], rr[todo][off], s)
        ok = ~np.isnan(vals)
        out[todo[ok]] = np.round(vals[ok]).astype(int)
        todo = todo[~ok]
        # perturb the contour once
        rr[todo] *= 1.0 - 1e-3
    if todo.size:
        p = complex(centers[todo[0]])
        raise SingularityError(f"|f| vanishes on the contour around {p:.12g}", point=p)
    return out


def _zeros_in_balls(f: HoloFunction, centers, radii, closed: bool):
    """Boolean per center: does f vanish in the ball of the given radius?

    Returns (hits, verified).  ``verified`` is False for n > 1 functions without
    declared zeros, where no cheap oracle exists and membership is assumed false.
    """
    centers = as_batch(centers, f.n)
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (centers.shape[0],))
    if f.zero_free:
        return np.zeros(centers.shape[0], dtype=bool), True
    if f.declared_zeros is not None:
        hits = np.zeros(centers.shape[0], dtype=bool)
        for z in f.declared_zeros:
            dist = z.distance(centers)
            hits |= (dist <= radii) if closed else (dist < radii)
        return hits, True
    if f.n == 1:
        rho = radii * (1.0 + 1e-6 if closed else CONTOUR_SHRINK)
        return _count_many(f, centers[:, 0], rho) > 0, True
    return np.zeros(centers.shape[0], dtype=bool), False


def in_E(f: HoloFunction, z) -> bool:
    """True iff B_z meets the zero set of f."""
    z = as_point(z)
    return bool(_zeros_in_balls(f, z.coords[None, :], z.dz / 2, closed=False)[0][0])


def inf_modulus(f: HoloFunction, z, boundary_samples: int = DEFAULT_BOUNDARY_SAMPLES, seed: int = 0) -> float:
    """inf of |f| over B_z: 0 if a zero lies in the closed ball, else the boundary minimum."""
    z = as_point(z)
    hit, _ = _zeros_in_balls(f, z.coords[None, :], z.dz / 2, closed=True)
    if hit[0]:
        return 0.0
    _, lo = _log_extremes(f, z.coords[None, :], z.dz / 2, boundary_samples, seed)
    return float(np.exp(lo[0]))


# --------------------------------------------------------------------------
# the four conditions


def _xlogy_ratio(log_f, log_M):
    """|f| * log(M / |f|) from logs; 0 where |f| = 0 or M = 0."""
    with np.errstate(invalid="ignore", over="ignore"):
        val = np.exp(log_f) * (log_M - log_f)
    return np.where(np.isfinite(log_f) & np.isfinite(log_M), val, 0.0)


def evaluate_conditions(
    f: HoloFunction,
    w: Weight,
    Z,
    boundary_samples: int = DEFAULT_BOUNDARY_SAMPLES,
    seed: int = 0,
    dz=None,
) -> dict:
    """Left sides of conditions (i)-(iv), divided by omega(d_z), at a batch of points."""
    Z = as_batch(Z, f.n)
    if dz is None:
        dz = 1.0 - np.linalg.norm(Z, axis=1)
    dz = np.broadcast_to(np.asarray(dz, dtype=float), (Z.shape[0],))
    om = np.asarray(w(dz), dtype=float) * np.ones_like(dz)
    radii = dz / 2.0

    log_f = f.log_abs(Z)
    grad = np.linalg.norm(f.grad(Z), axis=1)
    log_M, log_lo = _log_extremes(f, Z, radii, boundary_samples, seed)
    short = log_M < log_f - CONSISTENCY_SLACK * np.maximum(1.0, np.abs(log_f))
    short &= np.isfinite(log_f)
    if short.any():
        i = int(np.flatnonzero(short)[0])
        raise InconsistencyError(
            f"M_f(z) = exp({log_M[i]:.17g}) below |f(z)| = exp({log_f[i]:.17g})", point=Z[i]
        )
    log_M = np.maximum(log_M, log_f)
    M = np.exp(log_M)

    E, verified = _zeros_in_balls(f, Z, radii, closed=False)
    closed_hit = E | _zeros_in_balls(f, Z, radii, closed=True)[0] if f.declared_zeros is not None else E
    lo = np.where(closed_hit, 0.0, np.minimum(np.exp(log_lo), np.exp(log_f)))

    logterm = _xlogy_ratio(log_f, log_M)
    chi = E.astype(float)
    out = {
        "d_z": dz,
        "in_E": E,
        "abs_f": np.exp(log_f),
        "grad_norm": grad,
        "M": M,
        "inf": lo,
        "log_term": logterm,
        "lhs_i": grad * dz / om,
        "lhs_ii": (M - lo) / om,
        "lhs_iii": (chi * M + logterm) / om,
        "lhs_iv": (chi * M + (1.0 - chi) * logterm) / om,
        "E_verified": verified,
    }
    return out


def _single(f, w, z, key, boundary_samples, seed):
    z = as_point(z)
    return float(evaluate_conditions(f, w, z.coords[None, :], boundary_samples, seed, z.dz)[key][0])


def condition_i(f, w, z, boundary_samples=DEFAULT_BOUNDARY_SAMPLES, seed=0) -> float:
    """|grad f(z)| d_z / omega(d_z)."""
    z = as_point(z)
    return float(np.linalg.norm(f.grad(z)[0]) * z.dz / w(z.dz))


def condition_ii(f, w, z, boundary_samples=DEFAULT_BOUNDARY_SAMPLES, seed=0) -> float:
    """(M_f(z) - inf_{B_z}|f|) / omega(d_z)."""
    return _single(f, w, z, "lhs_ii", boundary_samples, seed)


def condition_iii(f, w, z, boundary_samples=DEFAULT_BOUNDARY_SAMPLES, seed=0) -> float:
    return _single(f, w, z, "lhs_iii", boundary_samples, seed)


def condition_iv(f, w, z, boundary_samples=DEFAULT_BOUNDARY_SAMPLES, seed=0) -> float:
    return _single(f, w, z, "lhs_iv", boundary_samples, seed)


# --------------------------------------------------------------------------
# Schwarz-Pick and rescaling


def schwarz_pick_margin(g: HoloFunction, z, tolerance: float = 1e-9) -> float:
    """2/(1-|z|^2) |g| log(1/|g|) - |grad g| at z; nonnegative for zero-free g with |g| <= 1."""
    return float(schwarz_pick_margins(g, as_point(z).coords[None, :], tolerance)[0])


def schwarz_pick_margins(g: HoloFunction, Z, tolerance: float = 1e-9) -> np.ndarray:
    Z = as_batch(Z, g.n)
    if not g.zero_free and g.declared_zeros != []:
        raise PreconditionError("Schwarz-Pick margin needs a zero-free function")
    log_g = g.log_abs(Z)
    over = log_g > math.log1p(tolerance)
    if over.any():
        i = int(np.flatnonzero(over)[0])
        raise PreconditionError(f"|g| = {math.exp(log_g[i]):.12g} > 1 at {Z[i]}")
    r2 = np.real(np.sum(Z * Z.conj(), axis=1))
    rhs = 2.0 / (1.0 - r2) * _xlogy_ratio(log_g, np.zeros_like(log_g))
    lhs = np.linalg.norm(g.grad(Z), axis=1)
    return rhs - lhs


def rescale_to_subball(f: HoloFunction, z, boundary_samples: int = DEFAULT_BOUNDARY_SAMPLES, seed: int = 0):
    """g_z(w) = f(z + d_z w / 2) / M_f(z)."""
    z = as_point(z)
    M = sup_modulus(f, z, boundary_samples, seed)
    M = max(M, abs(complex(f.eval(z)[0])))
    if not M > 0:
        raise PreconditionError(f"M_f vanishes at {z}; f is identically zero near z")
    return Rescaled(f, z.coords, z.dz / 2.0, M)


# --------------------------------------------------------------------------
# boundary-data criteria (n = 1)


def _thm2_raw(bd: BoundaryData, z: np.ndarray, samples: int, nodes: int) -> np.ndarray:
    """exp(P nu(z)) * [max_{|w-z| = d_z/2} P nu(w) - P nu(z)] at an array of points."""
    z = np.asarray(z, dtype=complex).ravel()
    d = 1.0 - np.abs(z)
    t = np.exp(2j * np.pi * np.arange(samples) / samples)
    W = z[:, None] + (d / 2.0)[:, None] * t[None, :]
    pz = quad.poisson_many(bd, z, nodes)
    pw = quad.poisson_many(bd, W, nodes).max(axis=1)
    osc = np.maximum(pw - pz, 0.0)
    return np.exp(pz) * osc


def theorem2_quantity(
    bd: BoundaryData,
    w: Weight,
    z,
    boundary_samples: int = DEFAULT_BOUNDARY_SAMPLES,
    nodes: int = quad.DEFAULT_NODES,
) -> float:
    """exp(P nu(z)) * [sup_{B_z} P nu - P nu(z)] / omega(d_z)."""
    z = complex(z.coords[0]) if isinstance(z, BallPoint) else complex(z)
    val = _thm2_raw(bd, np.array([z]), boundary_samples, nodes)[0]
    return float(val / w(1.0 - abs(z)))


def theorem2_grid(bd, w, grid: SampleGrid, boundary_samples=DEFAULT_BOUNDARY_SAMPLES, nodes=quad.DEFAULT_NODES,
                  workers: int = 1):
    """Rows (k, j, d_z, value) of the normalized Theorem 2 quantity on a grid."""

    def row(k):
        z = grid.row(k)[:, 0]
        return _thm2_raw(bd, z, boundary_samples, nodes) / w(grid.d(k))

    vals = _map_rows(row, grid.ks, workers)
    return [(k, j, grid.d(k), float(v)) for k, vs in zip(grid.ks, vals) for j, v in enumerate(vs)]


def atom_approach_angles(bd: BoundaryData, d: float, spreads=(0.25, 0.5, 1.0, 2.0, 4.0)) -> np.ndarray:
    """Angles theta_j +/- sqrt(c d): points 1-d at these angles sit on horocycles at each atom."""
    if not bd.has_atoms:
        return np.zeros(0)
    base = np.angle(bd.atom_locations)
    offs = np.sqrt(np.asarray(spreads) * d)
    return (base[:, None] + np.concatenate([offs, -offs])[None, :]).ravel()


def little_bloch_scan(
    bd: BoundaryData,
    K: int = DEFAULT_K,
    J: int = DEFAULT_J,
    boundary_samples: int = DEFAULT_BOUNDARY_SAMPLES,
    nodes: int = quad.DEFAULT_NODES,
    atom_approach: bool = True,
    workers: int = 1,
) -> list[float]:
    """Q_k = max over directions of the un-normalized Theorem 2 quantity at d_z = 2^-k.

    Besides J equispaced directions, each atom contributes directions that
    approach it tangentially (along horocycles), where the quantity does not
    decay for a singular inner factor.
    """
    grid = SampleGrid(1, K, J)

    def row(k):
        d = grid.d(k)
        theta = 2 * np.pi * np.arange(J) / J
        if atom_approach:
            theta = np.concatenate([theta, atom_approach_angles(bd, d)])
        z = (1.0 - d) * np.exp(1j * theta)
        keep = bd.atom_distance(z) > quad.ATOM_PROXIMITY
        return float(np.max(_thm2_raw(bd, z[keep], boundary_samples, nodes)))

    return list(_map_rows(row, grid.ks, workers))


# --------------------------------------------------------------------------
# grid audits


def _map_rows(fn, ks, workers):
    ks = list(ks)
    if workers <= 1:
        return [fn(k) for k in ks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, ks))


def trend(row_maxima, ratio: float = GROWTH_RATIO, run: int = GROWTH_RUN) -> str:
    """'growing' if the row maxima grow by more than ``ratio`` for ``run`` consecutive k.

    'inconclusive' if the last step still exceeds ``ratio`` without a full run,
    'bounded' otherwise.
    """
    m = np.asarray(row_maxima, dtype=float)
    if m.size < 2:
        return "inconclusive"
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(m[:-1] > 0, m[1:] / m[:-1], np.where(m[1:] > 0, np.inf, 1.0))
    streak = 0
    for x in r:
        streak = streak + 1 if x > ratio else 0
        if streak >= run:
            return "growing"
    return "inconclusive" if r[-1] > ratio else "bounded"


CONDITIONS = ("lhs_i", "lhs_ii", "lhs_iii", "lhs_iv")


@dataclass
class CriteriaReport:
    """Per-point left sides of (i)-(iv) over a SampleGrid with grid sups and trends."""

    rows: list
    empirical_constants: dict
    row_maxima: dict
    trend_flags: dict
    moderateness: float
    flags: list

    def table(self) -> dict:
        cols = ["k", "direction", "d_z", "in_E", *CONDITIONS]
        return {c: [r[c] for r in self.rows] for c in cols}


def audit(
    f: HoloFunction,
    w: Weight,
    grid: SampleGrid,
    boundary_samples: int = DEFAULT_BOUNDARY_SAMPLES,
    workers: int = 1,
) -> CriteriaReport:
    """Evaluate conditions (i)-(iv) at every grid point."""
    if grid.n != f.n:
        raise PreconditionError(f"grid dimension {grid.n} does not match function dimension {f.n}")

    def row(k):
        return evaluate_conditions(f, w, grid.row(k), boundary_samples, grid.seed, dz=grid.d(k))

    results = _map_rows(row, grid.ks, workers)
    rows, maxima = [], {c: [] for c in CONDITIONS}
    verified = True
    for k, res in zip(grid.ks, results):
        verified &= bool(res["E_verified"])
        for c in CONDITIONS:
            maxima[c].append(float(np.max(res[c])))
        for j in range(grid.J):
            rows.append(
                {
                    "k": k,
                    "direction": j,
                    "d_z": float(res["d_z"][j]),
                    "in_E": bool(res["in_E"][j]),
                    **{c: float(res[c][j]) for c in CONDITIONS},
                }
            )
    for r in rows:
        for c in CONDITIONS:
            if not (np.isfinite(r[c]) and r[c] >= 0):
                raise InconsistencyError(f"{c} = {r[c]} at k={r['k']}, direction {r['direction']}")
    constants = {c: max(maxima[c]) for c in CONDITIONS}
    trends = {c: trend(maxima[c]) for c in CONDITIONS}
    c_mod = moderateness_constant(w, grid.K + 2)
    flags = []
    if not verified:
        flags.append(UNVERIFIED_E)
    if w.kind == "tabulated" or moderateness_constant(w, 2 * grid.K + 4) > c_mod * (1 + 1e-2):
        flags.append(UNVERIFIED_MODERATE)
    return CriteriaReport(rows, constants, maxima, trends, c_mod, flags)


def lemma_points(n: int, grid: SampleGrid) -> np.ndarray:
    """The origin followed by all grid points, shape (1 + K J, n)."""
    pts = [np.zeros((1, n), dtype=complex)] + [grid.row(k) for k in grid.ks]
    return np.concatenate(pts, axis=0)


def reverse_inequality_gap(f: HoloFunction, Z, boundary_samples=DEFAULT_BOUNDARY_SAMPLES, seed=0, slack=1e-9):
    """2|f| log(M_f/|f|) + slack*M_f - d_z/2 |grad f| at points outside E (NaN on E).

    Nonnegative by the Schwarz-Pick lemma applied to the rescaled function g_z.
    """
    Z = as_batch(Z, f.n)
    dz = 1.0 - np.linalg.norm(Z, axis=1)
    E, _ = _zeros_in_balls(f, Z, dz / 2, closed=False)
    log_f = f.log_abs(Z)
    log_M, _ = _log_extremes(f, Z, dz / 2, boundary_samples, seed, want_min=False)
    log_M = np.maximum(log_M, log_f)
    lhs = dz / 2 * np.linalg.norm(f.grad(Z), axis=1)
    rhs = 2 * _xlogy_ratio(log_f, log_M) + slack * np.exp(log_M)
    return np.where(E, np.nan, rhs - lhs)
