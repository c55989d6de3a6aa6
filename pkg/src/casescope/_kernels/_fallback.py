"""NumPy implementations of the hot kernels.

Used when the compiled extension is unavailable. Semantics are identical
to ``_native``; floating-point results may differ by rounding because
NumPy uses pairwise summation where the native loops accumulate serially.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "numpy"

# Deterministic unit direction for exactly coincident centers, derived from
# the ordered index pair (lo, hi); the lower index is pushed along +direction.
_HASH_A = 12.9898
_HASH_B = 78.233
_HASH_C = 43758.5453


def _pair_angle(lo: int, hi: int) -> float:
    t = math.sin(lo * _HASH_A + hi * _HASH_B) * _HASH_C
    return 2.0 * math.pi * (t - math.floor(t))


def knn_query(points: np.ndarray, qi: int, k: int) -> tuple[np.ndarray, float]:
    """Indices of the k nearest points to ``points[qi]`` and the neighborhood radius.

    Candidates are ordered by (squared distance, index); the query point is
    always a member even when coincident points would otherwise crowd it out.
    Returns at most ``min(k, n)`` indices, sorted by (distance, index).
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    m = min(k, n)
    dx = pts[:, 0] - pts[qi, 0]
    dy = pts[:, 1] - pts[qi, 1]
    d2 = dx * dx + dy * dy
    order = np.lexsort((np.arange(n), d2))
    others = order[order != qi][: m - 1]
    sel = np.concatenate(([qi], others)).astype(np.intp)
    sel = sel[np.lexsort((sel, d2[sel]))]
    radius = float(np.sqrt(d2[sel].max()))
    return sel, radius


def knn_all(points: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """``knn_query`` for every point; returns (indices (n, m), radii (n,))."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    m = min(k, n)
    idx = np.empty((n, m), dtype=np.intp)
    radii = np.empty(n, dtype=np.float64)
    for qi in range(n):
        sel, radius = knn_query(pts, qi, k)
        idx[qi] = sel
        radii[qi] = radius
    return idx, radii


def layout_run(
    pos: np.ndarray,
    vel: np.ndarray,
    masses: np.ndarray,
    image_mass: float,
    dt: float,
    damping: float,
    max_iter: int,
    eps: float,
    r_min: float,
    ke_guard: float,
) -> tuple[np.ndarray, np.ndarray, int, bool, bool]:
    """Damped force iteration for text bodies around a fixed image at the origin.

    Per step and text body i: repulsion m_i*m_j/max(r, r_min)^2 from every
    other text, spring M*m_i*r^2 toward the origin, then the semi-implicit
    update v <- damping*(v + (F/m)*dt), x <- x + v*dt.

    Converged when the largest per-step displacement drops below ``eps`` and
    kinetic energy below ``ke_guard`` (the damped system is actually at rest,
    not merely crawling). Returns (pos, vel, iterations, converged, finite).
    """
    p = np.array(pos, dtype=np.float64, copy=True)
    v = np.array(vel, dtype=np.float64, copy=True)
    mass = np.asarray(masses, dtype=np.float64)
    n = p.shape[0]
    eps2 = eps * eps
    # overflow to inf is the divergence signal here, not an error
    with np.errstate(over="ignore", invalid="ignore"):
        return _iterate(p, v, mass, n, image_mass, dt, damping, max_iter, eps2, r_min, ke_guard)


def _iterate(p, v, mass, n, image_mass, dt, damping, max_iter, eps2, r_min, ke_guard):
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        diff = p[:, None, :] - p[None, :, :]  # diff[i, j] = p_i - p_j
        d2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
        r = np.sqrt(d2)
        unit = np.zeros_like(diff)
        np.divide(diff, r[..., None], out=unit, where=r[..., None] > 0.0)
        zi, zj = np.nonzero((r == 0.0) & ~np.eye(n, dtype=bool))
        for a, b in zip(zi.tolist(), zj.tolist()):
            lo, hi = (a, b) if a < b else (b, a)
            ang = _pair_angle(lo, hi)
            sign = 1.0 if a == lo else -1.0
            unit[a, b, 0] = sign * math.cos(ang)
            unit[a, b, 1] = sign * math.sin(ang)
        rc = np.maximum(r, r_min)
        mag = (mass[:, None] * mass[None, :]) / (rc * rc)
        np.fill_diagonal(mag, 0.0)
        force = (mag[..., None] * unit).sum(axis=1)
        # spring M*m*r^2 toward the origin: vector form -M*m*r*p
        radial = np.sqrt(p[:, 0] ** 2 + p[:, 1] ** 2)
        force -= (image_mass * mass * radial)[:, None] * p

        v = damping * (v + force / mass[:, None] * dt)
        step = v * dt
        p = p + step

        if not (np.isfinite(p).all() and np.isfinite(v).all()):
            return p, v, iterations, False, False
        max_disp2 = float((step * step).sum(axis=1).max())
        ke = float(0.5 * (mass * (v * v).sum(axis=1)).sum())
        if max_disp2 < eps2 and ke < ke_guard:
            converged = True
            break

    return p, v, iterations, converged, True
