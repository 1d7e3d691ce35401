"""Euclidean regions, ball volumes, and the overlap estimates behind the
cluster construction.

Everything here is plain d-dimensional geometry: open/closed balls, thin
product cells (a 2-disc crossed with a (d-2)-ball), spherical shells, and
Monte Carlo volume estimation against an exactly sampleable bounding region.
The closed-form quantities (shell radii, the shell-minus-core profile, the
step-region lower bound) are what the dimension bounds in
:mod:`hardspheres.bounds` are built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

# Construction profile: sphere radii live in [MU - DELTA, MU + DELTA] and
# cells are 2-discs of radius EPS crossed with a large (d-2)-ball.  The
# planar separation constraint 2*(MU + DELTA + EPS) < sqrt(3) is what keeps
# non-adjacent lattice sites from ever interacting.
MU = 0.75
DELTA = 0.1
EPS = 0.01
RADIUS_MIN = MU - DELTA
RADIUS_MAX = MU + DELTA

_MAX_GAMMA_DIM = 300  # math.gamma overflows near d = 340


def unit_ball_volume(d: int) -> float:
    """Lebesgue volume of the unit ball in R^d: pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 0:
        raise ValueError(f"dimension must be >= 0, got {d}")
    if d > _MAX_GAMMA_DIM:
        return math.exp(log_unit_ball_volume(d))
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def log_unit_ball_volume(d: int) -> float:
    """log of unit_ball_volume(d), safe for any dimension."""
    if d < 0:
        raise ValueError(f"dimension must be >= 0, got {d}")
    return (d / 2.0) * math.log(math.pi) - math.lgamma(d / 2.0 + 1.0)


def ball_volume(d: int, radius: float) -> float:
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    return unit_ball_volume(d) * radius**d


def sample_in_ball(
    center: np.ndarray, radius: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw n points uniformly from the ball B(center, radius).

    Isotropic Gaussian direction scaled by U^(1/d) times the radius; exact
    for every d >= 1.
    """
    center = np.asarray(center, dtype=float)
    d = center.shape[0]
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # A d-dim standard normal is never numerically zero for the batch sizes
    # used here; guard anyway so a pathological draw cannot emit NaN.
    norms[norms == 0.0] = 1.0
    u = rng.random((n, 1))
    return center + g / norms * (radius * u ** (1.0 / d))


@dataclass(frozen=True)
class Ball:
    """Ball B(center, radius).  Open for overlap tests, closed for emptiness
    queries; membership takes a ``closed`` flag."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius < 0:
            raise ValueError(f"ball radius must be >= 0, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def volume(self) -> float:
        return ball_volume(self.dim, self.radius)

    def contains(self, points: np.ndarray, closed: bool = True) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        d2 = np.sum((points - self.center) ** 2, axis=1)
        r2 = self.radius**2
        return d2 <= r2 if closed else d2 < r2

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_in_ball(self.center, self.radius, n, rng)

    def bounding_ball(self) -> "Ball":
        return self


@dataclass(frozen=True)
class Cell:
    """Product cell: a planar 2-disc of radius ``eps`` around
    ``planar_center`` crossed with a (d-2)-ball of radius ``layer_radius``
    around ``layer_center``.

    ``layer_center`` of length 0 degenerates to the bare 2-disc (d = 2).
    """

    planar_center: np.ndarray
    eps: float
    layer_center: np.ndarray
    layer_radius: float

    def __post_init__(self):
        object.__setattr__(
            self, "planar_center", np.asarray(self.planar_center, dtype=float)
        )
        object.__setattr__(
            self, "layer_center", np.asarray(self.layer_center, dtype=float).reshape(-1)
        )
        if self.planar_center.shape != (2,):
            raise ValueError("planar_center must be a 2-vector")
        if self.eps < 0 or self.layer_radius < 0:
            raise ValueError("cell radii must be >= 0")

    @property
    def dim(self) -> int:
        return 2 + self.layer_center.shape[0]

    @property
    def center(self) -> np.ndarray:
        return np.concatenate([self.planar_center, self.layer_center])

    def volume(self) -> float:
        m = self.layer_center.shape[0]
        return (
            math.pi
            * self.eps**2
            * unit_ball_volume(m)
            * self.layer_radius**m
        )

    def contains(self, points: np.ndarray, closed: bool = True) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        p2 = np.sum((points[:, :2] - self.planar_center) ** 2, axis=1)
        if closed:
            ok = p2 <= self.eps**2
        else:
            ok = p2 < self.eps**2
        m = self.layer_center.shape[0]
        if m:
            l2 = np.sum((points[:, 2:] - self.layer_center) ** 2, axis=1)
            ok &= l2 <= self.layer_radius**2 if closed else l2 < self.layer_radius**2
        return ok

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        planar = sample_in_ball(self.planar_center, self.eps, n, rng)
        m = self.layer_center.shape[0]
        if m == 0:
            return planar
        layer = sample_in_ball(self.layer_center, self.layer_radius, n, rng)
        return np.hstack([planar, layer])

    def bounding_ball(self) -> Ball:
        return Ball(self.center, math.hypot(self.eps, self.layer_radius))


@dataclass(frozen=True)
class Annulus:
    """Closed spherical shell {x : inner <= |x - center| <= outer}."""

    center: np.ndarray
    inner: float
    outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not 0 <= self.inner <= self.outer:
            raise ValueError(
                f"need 0 <= inner <= outer, got inner={self.inner} outer={self.outer}"
            )

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def volume(self) -> float:
        d = self.dim
        return unit_ball_volume(d) * (self.outer**d - self.inner**d)

    def contains(self, points: np.ndarray, closed: bool = True) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        d2 = np.sum((points - self.center) ** 2, axis=1)
        if closed:
            return (d2 >= self.inner**2) & (d2 <= self.outer**2)
        return (d2 > self.inner**2) & (d2 < self.outer**2)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        d = self.dim
        g = rng.standard_normal((n, d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        u = rng.random((n, 1))
        lo, hi = self.inner**d, self.outer**d
        rho = (lo + u * (hi - lo)) ** (1.0 / d)
        return self.center + g / norms * rho

    def bounding_ball(self) -> Ball:
        return Ball(self.center, self.outer)


@dataclass(frozen=True)
class Intersection:
    """Intersection of regions.  No closed-form volume; membership only."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("intersection needs at least one part")
        dims = {p.dim for p in self.parts}
        if len(dims) != 1:
            raise ValueError(f"mixed dimensions in intersection: {dims}")

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    def contains(self, points: np.ndarray, closed: bool = True) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        ok = self.parts[0].contains(points, closed=closed)
        for part in self.parts[1:]:
            ok &= part.contains(points, closed=closed)
        return ok

    def bounding_ball(self) -> Ball:
        # Any part bounds the intersection; pick the smallest bounding ball.
        balls = [p.bounding_ball() for p in self.parts]
        return min(balls, key=lambda b: b.radius)


@dataclass(frozen=True)
class Difference:
    """outer minus the union of subtracted regions."""

    outer: object
    subtracted: tuple

    def __post_init__(self):
        object.__setattr__(self, "subtracted", tuple(self.subtracted))
        for s in self.subtracted:
            if s.dim != self.outer.dim:
                raise ValueError("subtracted region dimension mismatch")

    @property
    def dim(self) -> int:
        return self.outer.dim

    def contains(self, points: np.ndarray, closed: bool = True) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        ok = self.outer.contains(points, closed=closed)
        for s in self.subtracted:
            # Subtracting a closed set from a closed set: a point on the
            # boundary of s is removed.  Measure zero either way.
            ok &= ~s.contains(points, closed=not closed)
        return ok

    def bounding_ball(self) -> Ball:
        return self.outer.bounding_ball()


Region = Union[Ball, Cell, Annulus, Intersection, Difference]


def region_contains(region: Region, point: np.ndarray, closed: bool = True) -> bool:
    """Membership of a single point."""
    return bool(region.contains(np.asarray(point, dtype=float)[None, :], closed=closed)[0])


def exact_volume(region: Region) -> Optional[float]:
    """Closed-form volume if the region type has one, else None."""
    if isinstance(region, (Ball, Cell, Annulus)):
        return region.volume()
    return None


def region_contains_ball(region: Region, center: np.ndarray, radius: float) -> bool:
    """True if B(center, radius) provably lies inside the region.

    Exact for Ball, Cell, and Annulus; conservatively requires every part
    for Intersection and returns False for Difference (no cheap certificate).
    """
    center = np.asarray(center, dtype=float)
    if isinstance(region, Ball):
        return math.dist(center, region.center) + radius <= region.radius
    if isinstance(region, Cell):
        planar = math.dist(center[:2], region.planar_center)
        if planar + radius > region.eps:
            return False
        if region.layer_center.shape[0] == 0:
            return True
        layer = math.dist(center[2:], region.layer_center)
        return layer + radius <= region.layer_radius
    if isinstance(region, Annulus):
        rho = math.dist(center, region.center)
        return rho - radius >= region.inner and rho + radius <= region.outer
    if isinstance(region, Intersection):
        return all(region_contains_ball(p, center, radius) for p in region.parts)
    return False


def region_lower_distance(a: Region, b: Region) -> float:
    """Provable lower bound on the distance between two regions.

    Exact for Ball/Cell pairs (product-cell distance decomposes over the
    planar and layer factors); annuli fall back to their outer balls,
    intersections take the best part, differences use their outer region.
    Returns a value <= 0 when no positive separation is certified; never
    overestimates the true distance.
    """
    if isinstance(a, Intersection):
        return max(region_lower_distance(p, b) for p in a.parts)
    if isinstance(b, Intersection):
        return max(region_lower_distance(a, p) for p in b.parts)
    if isinstance(a, Difference):
        return region_lower_distance(a.outer, b)
    if isinstance(b, Difference):
        return region_lower_distance(a, b.outer)
    if isinstance(a, Annulus):
        a = a.bounding_ball()
    if isinstance(b, Annulus):
        b = b.bounding_ball()
    if isinstance(a, Ball) and isinstance(b, Ball):
        return math.dist(a.center, b.center) - a.radius - b.radius
    if isinstance(a, Cell) and isinstance(b, Cell):
        dpl = math.dist(a.planar_center, b.planar_center) - a.eps - b.eps
        dly = (
            math.dist(a.layer_center, b.layer_center)
            - a.layer_radius
            - b.layer_radius
        )
        return math.hypot(max(0.0, dpl), max(0.0, dly))
    if isinstance(b, Cell):
        a, b = b, a
    if isinstance(a, Cell) and isinstance(b, Ball):
        dpl = math.dist(a.planar_center, b.center[:2]) - a.eps
        dly = math.dist(a.layer_center, b.center[2:]) - a.layer_radius
        return math.hypot(max(0.0, dpl), max(0.0, dly)) - b.radius
    return 0.0


def regions_disjoint(a: Region, b: Region, margin: float = 1e-9) -> bool:
    """True only when the two regions are provably separated by more than
    ``margin``.  A False result makes no claim either way."""
    return region_lower_distance(a, b) > margin


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    n_samples: int
    hits: int


def mc_region_volume(
    region: Region,
    bounding: Region,
    n: int,
    seed: int,
    batch: int = 1 << 18,
) -> VolumeEstimate:
    """Hit-or-miss volume estimate of ``region`` against ``bounding``.

    ``bounding`` must contain the region and have an exact sampler and an
    exact volume (Ball, Cell, or Annulus).  Deterministic in ``seed``; the
    binomial standard error is reported alongside the estimate.
    """
    vol = exact_volume(bounding)
    if vol is None:
        raise ValueError("bounding region must have an exact volume and sampler")
    if n <= 0:
        raise ValueError(f"need n >= 1 samples, got {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    hits = 0
    remaining = n
    while remaining > 0:
        k = min(batch, remaining)
        pts = bounding.sample(k, rng)
        hits += int(np.count_nonzero(region.contains(pts)))
        remaining -= k
    p = hits / n
    return VolumeEstimate(
        value=vol * p,
        std_error=vol * math.sqrt(p * (1.0 - p) / n),
        n_samples=n,
        hits=hits,
    )


def shell_radii(R: float, eps: float = EPS) -> tuple:
    """Planar-deficit radii of a ball of radius R cut by the thin cell slab.

    A point of the cell sits at planar distance between 1 - 2*eps and
    1 + 2*eps from the ball center's planar coordinates, so the layer
    section of B(x, R) inside the cell has radius between
    inner = sqrt(R^2 - (1 + 2 eps)^2) and outer = sqrt(R^2 - (1 - 2 eps)^2).
    Requires R > 1 + 2*eps.
    """
    hi = 1.0 + 2.0 * eps
    lo = 1.0 - 2.0 * eps
    if R <= hi:
        raise ValueError(f"need R > {hi}, got R={R}")
    return math.sqrt(R**2 - hi**2), math.sqrt(R**2 - lo**2)


def cylinder_section_bracket(d: int, R: float, eps: float = EPS) -> tuple:
    """Closed-form bracket for the volume of (thin cell) intersect B(x, R)
    when the planar centers sit at distance about 1 apart.

    Lower bound assumes the layer section keeps at least a third of its
    (d-2)-ball (valid once the big-ball constant passed the overlap check);
    upper bound is the full product.  Returns (lower, upper).
    """
    if d < 3:
        raise ValueError(f"need d >= 3, got {d}")
    r1, r2 = shell_radii(R, eps)
    m = d - 2
    base = math.pi * eps**2 * unit_ball_volume(m)
    return base * r1**m / 3.0, base * r2**m


def step_layer_radii(r: float, eps: float = EPS) -> tuple:
    """Layer radii (shell_lo, core_hi, bound) for the step region at parent
    radius r.

    The step region lives between the spheres of radius r + MU -+ DELTA
    around the parent center, cut to a planar cell whose points sit at
    planar distance 1 -+ 2 eps from the parent's planar coordinates.  Its
    layer section therefore contains a (d-2)-ball of radius
    shell_lo = sqrt((r+MU+DELTA)^2 - (1+2 eps)^2) up to the inner cutout of
    radius at most core_hi = sqrt((r+MU-DELTA)^2 - (1-2 eps)^2), and is
    contained in the ball of radius bound = sqrt((r+MU+DELTA)^2 - (1-2 eps)^2).
    Domain: r in [MU - DELTA, MU + DELTA].
    """
    if not RADIUS_MIN - 1e-12 <= r <= RADIUS_MAX + 1e-12:
        raise ValueError(f"parent radius {r} outside [{RADIUS_MIN}, {RADIUS_MAX}]")
    r_out = r + MU + DELTA
    r_in = r + MU - DELTA
    shell_lo = math.sqrt(r_out**2 - (1.0 + 2.0 * eps) ** 2)
    core_hi = math.sqrt(r_in**2 - (1.0 - 2.0 * eps) ** 2)
    bound = math.sqrt(r_out**2 - (1.0 - 2.0 * eps) ** 2)
    return shell_lo, core_hi, bound


def step_volume_profile(r: float, d: int) -> float:
    """Normalized lower-bound profile shell_lo^(d-2)/3 - core_hi^(d-2) for
    the step-region volume at parent radius r.  Increasing on the radius
    window for d >= 11, which is where the dimension-independent bound
    comes from.
    """
    if d < 11:
        raise ValueError(f"profile is only monotone for d >= 11, got {d}")
    shell_lo, core_hi, _ = step_layer_radii(r)
    m = d - 2
    return shell_lo**m / 3.0 - core_hi**m


def step_volume_lower_bound(d: int, eps: float = EPS) -> float:
    """Dimension-dependent lower bound on the step-region volume, valid for
    d >= 11 once the overlap constant is large enough:

        pi * eps^2 * omega_{d-2} / 3 * (1.2^((d-2)/2) - 1)

    The 1.2 comes from shell(RADIUS_MIN)^2 = 1.2096 > 1.2 and the dropped
    core term is absorbed because core(RADIUS_MIN)^2 = 0.7296 gives
    core^(d-2) <= 1/3 for d >= 11.
    """
    if d < 11:
        raise ValueError(f"lower bound requires d >= 11, got {d}")
    m = d - 2
    return math.pi * eps**2 * unit_ball_volume(m) / 3.0 * (1.2 ** (m / 2.0) - 1.0)


def step_volume_bracket(d: int, r: float, eps: float = EPS) -> tuple:
    """Closed-form (lower, upper) bracket for the step-region volume at
    parent radius r in dimension d.

    upper is the bounding product pi eps^2 omega_{d-2} bound^{d-2}; lower
    keeps a third of the shell_lo ball and subtracts the full core ball.
    The lower entry can be <= 0 for small d; callers needing positivity
    should use d >= 11 where the profile is positive on the whole window.
    """
    if d < 3:
        raise ValueError(f"need d >= 3, got {d}")
    shell_lo, core_hi, bound = step_layer_radii(r, eps)
    m = d - 2
    base = math.pi * eps**2 * unit_ball_volume(m)
    return base * (shell_lo**m / 3.0 - core_hi**m), base * bound**m


def overlap_fraction(
    dim: int,
    C: float,
    R: float,
    x_dist: float,
    n: int = 200_000,
    seed: int = 0,
) -> tuple:
    """MC estimate of vol(B(0,C) intersect B(x,R)) / vol(B(x,R)) with x at
    distance x_dist from the origin.  Returns (fraction, std_error)."""
    if dim < 1:
        raise ValueError(f"need dim >= 1, got {dim}")
    rng = np.random.Generator(np.random.Philox(seed))
    x = np.zeros(dim)
    x[0] = x_dist
    hits = 0
    remaining = n
    C2 = C * C
    while remaining > 0:
        k = min(1 << 18, remaining)
        pts = sample_in_ball(x, R, k, rng)
        hits += int(np.count_nonzero(np.sum(pts * pts, axis=1) <= C2))
        remaining -= k
    p = hits / n
    return p, math.sqrt(p * (1.0 - p) / n)


def search_overlap_constant(
    dim: int,
    R_max: float,
    target: float = 1.0 / 3.0,
    sigmas: float = 4.0,
    n: int = 200_000,
    seed: int = 0,
    max_exponent: int = 20,
) -> int:
    """Smallest power-of-two C such that every ball B(x, R), R <= R_max,
    centered inside B(0, C) keeps at least ``target`` of its volume inside,
    with an MC certificate at ``sigmas`` standard errors.

    The worst interior placement is covered by the boundary case of the
    shrunk ball B(0, C - R_max): for |x| = c the fraction is at least the
    boundary fraction at ball radius c, which increases in c and is
    minimized at c = C - R_max.
    """
    for k in range(max_exponent + 1):
        C = float(1 << k)
        c_eff = C - R_max
        if c_eff <= 0:
            continue
        frac, se = overlap_fraction(dim, c_eff, R_max, c_eff, n=n, seed=seed + k)
        if frac - sigmas * se >= target:
            return 1 << k
    raise RuntimeError(
        f"no power-of-two overlap constant up to 2^{max_exponent} passed "
        f"in dimension {dim}"
    )
