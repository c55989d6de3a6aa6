"""Force-directed placement of diagnostic-text labels around a fixed image.

Text bodies repel each other with magnitude m_i*m_j/r^2 and are pulled
toward the image by a spring of magnitude M*m_i*r^2, where a text's mass
is its word count. Velocities are damped every step; after the iteration
settles, a geometric separation pass removes any residual rectangle
overlaps (the force model alone cannot guarantee non-overlap: a lone
label is pulled straight into the image).
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from casescope import _kernels
from casescope.errors import (
    DuplicateId,
    NonFiniteState,
    ResidualOverlap,
    SchemaError,
    TooFewTexts,
)

# Convergence demands near-zero kinetic energy, not merely a small step:
# with strong damping a step can dip under convergence_eps while heavy
# bodies still carry momentum, so integration continues until the total
# energy is below the at-rest tolerance.
KE_AT_REST = 1e-3
SEPARATION_MAX_PASSES = 1000
SEPARATION_MARGIN = 1e-9
_GOLDEN = 0.6180339887498949


@dataclass(frozen=True)
class LayoutConfig:
    dt: float = 0.02
    damping: float = 0.9
    max_iter: int = 5000
    convergence_eps: float = 1e-4
    r_min: float = 1.0
    initial_radius: float | None = None  # default: the image diagonal
    image_mass: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        for name in ("dt", "damping", "max_iter", "convergence_eps", "r_min", "image_mass"):
            if getattr(self, name) <= 0:
                raise SchemaError(f"layout config {name} must be positive")
        if not self.damping < 1.0:
            raise SchemaError(f"damping must be strictly below 1, got {self.damping}")
        if self.initial_radius is not None and self.initial_radius <= 0:
            raise SchemaError("initial_radius must be positive")


@dataclass(frozen=True)
class LayoutBody:
    id: str
    kind: str  # "text" | "image"
    center: tuple[float, float]
    half_extents: tuple[float, float]
    mass: float
    velocity: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class TextSpec:
    id: str
    label: str
    half_extents: tuple[float, float]
    mass_override: float | None = None


@dataclass(frozen=True)
class LayoutResult:
    positions: dict[str, tuple[float, float]]
    iterations: int
    converged: bool
    residual_overlaps: int


def word_count_mass(text: str) -> int:
    """Whitespace-token count, clamped to at least 1 (a mass must be positive)."""
    return max(1, len(text.split()))


def _coincident_direction(id_a: str, id_b: str) -> tuple[float, float]:
    """Deterministic unit direction for body a when centers coincide."""
    lo, hi = sorted((id_a, id_b))
    angle = 2.0 * math.pi * ((zlib.crc32(f"{lo}\x00{hi}".encode()) & 0xFFFFFFFF) / 2**32)
    sign = 1.0 if id_a == lo else -1.0
    return (sign * math.cos(angle), sign * math.sin(angle))


def repulsion(i: LayoutBody, j: LayoutBody, r_min: float = 1.0) -> tuple[float, float]:
    """Repulsive force on text i from text j: magnitude m_i*m_j / max(r, r_min)^2."""
    if i.kind != "text" or j.kind != "text":
        raise ValueError("repulsion acts between text bodies")
    dx = i.center[0] - j.center[0]
    dy = i.center[1] - j.center[1]
    r = math.hypot(dx, dy)
    if r == 0.0:
        ux, uy = _coincident_direction(i.id, j.id)
    else:
        ux, uy = dx / r, dy / r
    mag = i.mass * j.mass / max(r, r_min) ** 2
    return (mag * ux, mag * uy)


def spring(i: LayoutBody, image: LayoutBody) -> tuple[float, float]:
    """Attractive force on text i toward the image: magnitude M*m_i*r^2."""
    if i.kind != "text" or image.kind != "image":
        raise ValueError("spring acts between a text body and the image body")
    dx = image.center[0] - i.center[0]
    dy = image.center[1] - i.center[1]
    r = math.hypot(dx, dy)
    if r == 0.0:
        return (0.0, 0.0)
    mag = image.mass * i.mass * r * r
    return (mag * dx / r, mag * dy / r)


def step(bodies: Sequence[LayoutBody], config: LayoutConfig) -> list[LayoutBody]:
    """One semi-implicit Euler step with multiplicative damping; image fixed."""
    config.validate()
    texts = [b for b in bodies if b.kind == "text"]
    images = [b for b in bodies if b.kind == "image"]
    if len(images) != 1:
        raise SchemaError(f"scene needs exactly one image body, got {len(images)}")
    image = images[0]
    out: list[LayoutBody] = []
    for body in bodies:
        if body.kind == "image":
            out.append(body)
            continue
        fx, fy = spring(body, image)
        for other in texts:
            if other.id == body.id:
                continue
            rx, ry = repulsion(body, other, config.r_min)
            fx += rx
            fy += ry
        vx = config.damping * (body.velocity[0] + fx / body.mass * config.dt)
        vy = config.damping * (body.velocity[1] + fy / body.mass * config.dt)
        x = body.center[0] + vx * config.dt
        y = body.center[1] + vy * config.dt
        if not all(math.isfinite(v) for v in (x, y, vx, vy)):
            raise NonFiniteState(f"body {body.id!r} diverged")
        out.append(replace(body, center=(x, y), velocity=(vx, vy)))
    return out


def _rect_overlap(a: LayoutBody, b: LayoutBody) -> tuple[float, float]:
    """Penetration depths (ox, oy); both positive iff the rectangles overlap."""
    ox = (a.half_extents[0] + b.half_extents[0]) - abs(a.center[0] - b.center[0])
    oy = (a.half_extents[1] + b.half_extents[1]) - abs(a.center[1] - b.center[1])
    return ox, oy


def overlap_count(bodies: Sequence[LayoutBody]) -> int:
    """Number of body pairs intersecting with positive area (touching edges don't count)."""
    count = 0
    for i in range(len(bodies)):
        for j in range(i + 1, len(bodies)):
            ox, oy = _rect_overlap(bodies[i], bodies[j])
            if ox > 0.0 and oy > 0.0:
                count += 1
    return count


def evenness(bodies: Sequence[LayoutBody]) -> float:
    """Largest angular gap (radians) between text centers around the image center."""
    texts = [b for b in bodies if b.kind == "text"]
    if len(texts) < 2:
        raise TooFewTexts(f"evenness needs at least 2 texts, got {len(texts)}")
    images = [b for b in bodies if b.kind == "image"]
    cx, cy = images[0].center if images else (0.0, 0.0)
    angles = sorted(math.atan2(b.center[1] - cy, b.center[0] - cx) for b in texts)
    gaps = [b - a for a, b in zip(angles, angles[1:])]
    gaps.append(2.0 * math.pi - (angles[-1] - angles[0]))
    return max(gaps)


def _separate(bodies: list[LayoutBody]) -> tuple[list[LayoutBody], int]:
    """Push overlapping rectangles apart along the minimum-penetration axis.

    The image body never moves; a pair sharing a center is split along the
    axis using the deterministic ordered-id direction sign.
    """
    current = list(bodies)
    for _ in range(SEPARATION_MAX_PASSES):
        moved = False
        for i in range(len(current)):
            for j in range(i + 1, len(current)):
                a, b = current[i], current[j]
                ox, oy = _rect_overlap(a, b)
                if not (ox > 0.0 and oy > 0.0):
                    continue
                axis = 0 if ox <= oy else 1
                pen = (ox if axis == 0 else oy) + SEPARATION_MARGIN
                delta = b.center[axis] - a.center[axis]
                direction = 1.0 if delta > 0 else -1.0 if delta < 0 else (
                    1.0 if sorted((a.id, b.id))[0] == a.id else -1.0
                )
                shifts: list[tuple[int, LayoutBody, float]] = []
                if a.kind == "image":
                    shifts.append((j, b, direction * pen))
                elif b.kind == "image":
                    shifts.append((i, a, -direction * pen))
                else:
                    shifts.append((i, a, -direction * pen / 2.0))
                    shifts.append((j, b, direction * pen / 2.0))
                for idx, body, shift in shifts:
                    center = list(body.center)
                    center[axis] += shift
                    current[idx] = replace(body, center=(center[0], center[1]))
                moved = True
        if not moved:
            break
    return current, overlap_count(current)


def initial_placement(
    texts: Sequence[TextSpec],
    image_half_extents: tuple[float, float],
    config: LayoutConfig,
) -> list[LayoutBody]:
    """Scene bodies with labels evenly spaced on the starting circle.

    The circle radius defaults to the image diagonal; the angular offset is
    a deterministic function of the seed (seed 0 starts at angle 0).
    """
    config.validate()
    if not texts:
        raise SchemaError("scene needs at least one text")
    if image_half_extents[0] <= 0 or image_half_extents[1] <= 0:
        raise SchemaError("image half extents must be positive")
    ids = [t.id for t in texts]
    if len(set(ids)) != len(ids):
        raise DuplicateId("text ids must be unique within a scene")
    n = len(texts)
    radius = config.initial_radius
    if radius is None:
        radius = 2.0 * math.hypot(image_half_extents[0], image_half_extents[1])
    offset = 2.0 * math.pi * ((config.seed * _GOLDEN) % 1.0)
    bodies = [
        LayoutBody(id="__image__", kind="image", center=(0.0, 0.0),
                   half_extents=image_half_extents, mass=config.image_mass)
    ]
    for i, spec in enumerate(texts):
        mass = spec.mass_override if spec.mass_override is not None else word_count_mass(spec.label)
        if mass < 1.0:
            raise SchemaError(f"text {spec.id!r} mass must be >= 1, got {mass}")
        angle = offset + 2.0 * math.pi * i / n
        bodies.append(
            LayoutBody(
                id=spec.id,
                kind="text",
                center=(radius * math.cos(angle), radius * math.sin(angle)),
                half_extents=spec.half_extents,
                mass=float(mass),
            )
        )
    return bodies


def simulate(
    texts: Sequence[TextSpec],
    image_half_extents: tuple[float, float],
    config: LayoutConfig | None = None,
) -> tuple[list[LayoutBody], int, bool]:
    """Run the force iteration only; returns final bodies (with velocities)."""
    config = config or LayoutConfig()
    bodies = initial_placement(texts, image_half_extents, config)
    text_bodies = [b for b in bodies if b.kind == "text"]
    pos = np.array([b.center for b in text_bodies], dtype=np.float64)
    vel = np.zeros_like(pos)
    masses = np.array([b.mass for b in text_bodies], dtype=np.float64)

    pos, vel, iterations, converged, finite = _kernels.layout_run(
        pos,
        vel,
        masses,
        config.image_mass,
        config.dt,
        config.damping,
        config.max_iter,
        config.convergence_eps,
        config.r_min,
        KE_AT_REST,
    )
    if not finite:
        raise NonFiniteState("layout simulation diverged; adjust dt/damping")
    out = [bodies[0]]
    for i, body in enumerate(text_bodies):
        out.append(
            replace(
                body,
                center=(float(pos[i, 0]), float(pos[i, 1])),
                velocity=(float(vel[i, 0]), float(vel[i, 1])),
            )
        )
    return out, iterations, converged


def kinetic_energy(bodies: Sequence[LayoutBody]) -> float:
    return sum(
        0.5 * b.mass * (b.velocity[0] ** 2 + b.velocity[1] ** 2)
        for b in bodies
        if b.kind == "text"
    )


def solve(
    texts: Sequence[TextSpec],
    image_half_extents: tuple[float, float],
    config: LayoutConfig | None = None,
) -> LayoutResult:
    """Lay the labels out around the image at the origin.

    Labels start evenly spaced on a circle, iterate under the force model
    until at rest, then a separation pass enforces the hard no-overlap
    postcondition. Deterministic for fixed inputs and seed.
    """
    bodies, iterations, converged = simulate(texts, image_half_extents, config)
    separated, residual = _separate(bodies)
    if residual > 0:
        raise ResidualOverlap(
            f"{residual} overlapping pairs remain after separation; scene too dense",
            residual_overlaps=residual,
        )
    positions = {b.id: b.center for b in separated if b.kind == "text"}
    return LayoutResult(
        positions=positions,
        iterations=iterations,
        converged=converged,
        residual_overlaps=residual,
    )
