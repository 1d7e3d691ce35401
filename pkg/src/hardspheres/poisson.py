"""Lazy, exactly consistent sampling of a homogeneous Poisson process.

A RegionRegistry realizes one Poisson process of intensity lam on R^d a
region at a time.  Each query region becomes a record, and a location is
owned by the earliest record that determined its points, so overlapping
queries never resample and every point keeps a stable identity
(record id, index).  Records come in three kinds:

stored     Points drawn and kept: draw N ~ Poisson(lam * vol), place them
           by the region's exact sampler, drop the ones owned by earlier
           stored/streamed records (exact Poisson thinning), keep the rest.

streamed   For masses too heavy to keep in memory: the same thinning, but
           candidates are generated in fixed-size batches from a dedicated
           replayable substream and immediately discarded.  Only the count
           and the substream key are retained; any later query overlapping
           the region replays the batches and filters by membership, so the
           realization is exact at every scale and costs no storage.

saturated  For masses beyond any enumeration (a first-layer cell in d = 45
           holds ~1e51 points): no count is drawn.  Emptiness has
           probability exp(-mass) which underflows to exactly 0.0 for the
           enforced minimum mass, a uniformly chosen process point is just
           a uniform location in the region, and points of later overlapping
           queries are realized as fresh Poisson inside the zone.  Removing
           the picked point perturbs later counts only at relative order
           (later realized mass) / (saturated mass); the registry tracks
           that ratio and refuses to proceed when it could ever matter
           (default tolerance 1e-9; the d = 45 runs sit near 1e-50).

Same seed and same query sequence give bit-identical results; streams
replay from SeedSequence-derived Philox keys that never touch the main
stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import (
    Annulus,
    Ball,
    Cell,
    Intersection,
    Region,
    exact_volume,
    regions_disjoint,
)
from .rngutil import RNG_ALGORITHM, derive_seed, generator

STREAM_BATCH = 1 << 16  # frozen: replay identity depends on it

DEFAULT_STORE_CAP = 10_000.0
DEFAULT_STREAM_CAP = 2e7
SATURATION_MIN_MASS = 4096.0  # exp(-m) == 0.0 in binary64 needs m >= 746
DEFAULT_SATURATION_Q_TOL = 1e-9

_MAIN_PATH = 0
_STREAM_PATH = 2


class RegistryError(RuntimeError):
    pass


def region_key(region: Region) -> tuple:
    """Hashable structural identity of a region (bit-exact on coordinates)."""
    if isinstance(region, Ball):
        return ("ball", region.center.tobytes(), region.radius)
    if isinstance(region, Cell):
        return (
            "cell",
            region.planar_center.tobytes(),
            region.eps,
            region.layer_center.tobytes(),
            region.layer_radius,
        )
    if isinstance(region, Annulus):
        return ("annulus", region.center.tobytes(), region.inner, region.outer)
    raise RegistryError(f"no structural key for region type {type(region).__name__}")


@dataclass(frozen=True)
class PointSet:
    """Points of the process inside one query region.  ids are stable
    (record_id, local_index) pairs; coords is (n, d)."""

    ids: tuple
    coords: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class PickResult:
    """Outcome of pick_in_region: status 'empty' or 'picked'."""

    status: str
    point_id: Optional[tuple]
    coords: Optional[np.ndarray]
    mode: str
    n_members: Optional[int]
    mass_lower: float
    mass_upper: float


class _Record:
    __slots__ = (
        "rid",
        "region",
        "mode",
        "bball_center",
        "bball_radius",
        "coords",
        "n_candidates",
        "n_fresh",
        "n_members",
        "member_region",
        "filter_ids",
        "stream_seed_path",
        "mass_lower",
        "realized_mass_in_zone",
        "pick_coords",
    )

    def __init__(self, rid, region, mode, bball):
        self.rid = rid
        self.region = region
        self.mode = mode
        self.bball_center = bball.center
        self.bball_radius = bball.radius
        self.coords = None  # stored mode: (n, d) array
        self.n_candidates = 0
        self.n_fresh = 0
        self.n_members = 0
        self.member_region = None
        self.filter_ids = ()
        self.stream_seed_path = None
        self.mass_lower = 0.0
        self.realized_mass_in_zone = 0.0
        self.pick_coords = []  # saturated mode: picked process points


class RegionRegistry:
    """One lazily realized Poisson process of intensity lam on R^dim."""

    def __init__(
        self,
        dim: int,
        lam: float,
        seed: int,
        store_cap: float = DEFAULT_STORE_CAP,
        stream_cap: float = DEFAULT_STREAM_CAP,
        saturation_min_mass: float = SATURATION_MIN_MASS,
        saturation_q_tol: float = DEFAULT_SATURATION_Q_TOL,
        max_materialize: float = 5e7,
    ):
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        if lam < 0:
            raise ValueError(f"intensity must be >= 0, got {lam}")
        if saturation_min_mass < 746.0:
            raise ValueError(
                "saturation_min_mass below 746 breaks the exact-emptiness "
                "guarantee (exp(-m) must underflow to 0.0)"
            )
        self.dim = dim
        self.lam = lam
        self.seed = int(seed)
        self.store_cap = store_cap
        self.stream_cap = stream_cap
        self.saturation_min_mass = saturation_min_mass
        self.saturation_q_tol = saturation_q_tol
        self.max_materialize = max_materialize
        self.rng = generator(self.seed, _MAIN_PATH)
        self.records: list = []
        self._stored_by_key: dict = {}
        self.rng_algorithm = RNG_ALGORITHM
        # budget metrics
        self.stored_points = 0
        self.peak_stored_points = 0
        self.streamed_candidates_total = 0
        self.stream_replays = 0

    # -- helpers -------------------------------------------------------

    def _check_dim(self, region: Region):
        if region.dim != self.dim:
            raise RegistryError(
                f"region dimension {region.dim} != registry dimension {self.dim}"
            )

    def _overlapping(self, bball, records):
        out = []
        for rec in records:
            gap = math.dist(bball.center, rec.bball_center) - (
                bball.radius + rec.bball_radius
            )
            if gap <= 1e-12:
                out.append(rec)
        return out

    def _determined_filter_ids(self, region: Region) -> tuple:
        """Earlier records whose owned zone can reach into this sampling
        region.  Provably disjoint records are skipped; their membership
        test could never fire."""
        return tuple(
            r.rid
            for r in self.records
            if r.mode in ("stored", "streamed")
            and not regions_disjoint(region, r.region)
        )

    def _drop_determined(self, pts: np.ndarray, filter_ids) -> np.ndarray:
        """Mask of candidates NOT owned by the given earlier records."""
        keep = np.ones(pts.shape[0], dtype=bool)
        for rid in filter_ids:
            rec = self.records[rid]
            keep &= ~rec.region.contains(pts)
        return keep

    def _note_saturated_realization(self, bball, mass_upper: float):
        """Track how much mass later queries realize inside saturated zones
        and enforce the exactness tolerance."""
        sats = [r for r in self.records if r.mode == "saturated"]
        for rec in self._overlapping(bball, sats):
            rec.realized_mass_in_zone += mass_upper
            q = rec.realized_mass_in_zone / rec.mass_lower
            if q > self.saturation_q_tol:
                raise RegistryError(
                    f"realized mass inside saturated record {rec.rid} reached "
                    f"relative ratio {q:.3e} > {self.saturation_q_tol:.1e}; "
                    "the remove-one-point correction would no longer be "
                    "negligible"
                )

    def _stream_rng(self, rec) -> np.random.Generator:
        return generator(*rec.stream_seed_path)

    def _replay(self, rec):
        """Yield (start_index, candidates, fresh_mask) batches of a streamed
        record, identical on every call."""
        self.stream_replays += 1
        rng = self._stream_rng(rec)
        done = 0
        while done < rec.n_candidates:
            k = min(STREAM_BATCH, rec.n_candidates - done)
            pts = rec.region.sample(k, rng)
            fresh = self._drop_determined(pts, rec.filter_ids)
            yield done, pts, fresh
            done += k

    # -- core queries --------------------------------------------------

    def materialize(self, region: Region) -> PointSet:
        """All process points in a region with an exact volume and sampler.
        First call realizes the fresh zone and stores it; later calls only
        collect.  The cached realization is never redrawn."""
        self._check_dim(region)
        key = region_key(region)
        if key not in self._stored_by_key:
            vol = exact_volume(region)
            if vol is None:
                raise RegistryError(
                    "only regions with exact volumes can be materialized "
                    "directly; wrap composite regions via pick_in_region"
                )
            mass = self.lam * vol
            if mass > self.max_materialize:
                raise RegistryError(
                    f"expected count {mass:.3e} exceeds the materialization "
                    f"cap {self.max_materialize:.3e}; use pick_in_region"
                )
            bball = region.bounding_ball()
            self._note_saturated_realization(bball, mass)
            rid = len(self.records)
            rec = _Record(rid, region, "stored", bball)
            rec.filter_ids = self._determined_filter_ids(region)
            n = int(self.rng.poisson(mass)) if mass > 0 else 0
            rec.n_candidates = n
            if n:
                pts = region.sample(n, self.rng)
                keep = self._drop_determined(pts, rec.filter_ids)
                rec.coords = pts[keep]
            else:
                rec.coords = np.empty((0, self.dim))
            rec.n_fresh = rec.coords.shape[0]
            self.records.append(rec)
            self._stored_by_key[key] = rid
            self.stored_points += rec.n_fresh
            self.peak_stored_points = max(self.peak_stored_points, self.stored_points)
        return self.collect(region)

    def points_in_ball(self, center, radius: float) -> PointSet:
        return self.materialize(Ball(np.asarray(center, dtype=float), radius))

    def points_in_cell(self, cell: Cell) -> PointSet:
        if not isinstance(cell, Cell):
            raise RegistryError("points_in_cell expects a Cell region")
        return self.materialize(cell)

    def collect(self, region: Region) -> PointSet:
        """All currently determined points inside the region: stored points,
        streamed candidates via replay, and saturated picks.  Does not
        realize anything new; the region must be covered by determined
        zones (callers materialize a superset first)."""
        self._check_dim(region)
        ids = []
        coords = []
        for rec in self.records:
            if regions_disjoint(region, rec.region):
                continue
            if rec.mode == "stored":
                if rec.n_fresh:
                    mask = region.contains(rec.coords)
                    for i in np.flatnonzero(mask):
                        ids.append((rec.rid, int(i)))
                        coords.append(rec.coords[i])
            elif rec.mode == "streamed":
                for start, pts, fresh in self._replay(rec):
                    mask = fresh & region.contains(pts)
                    for i in np.flatnonzero(mask):
                        ids.append((rec.rid, start + int(i)))
                        coords.append(pts[i])
            else:  # saturated: only its picked points are determined
                for k, p in enumerate(rec.pick_coords):
                    if bool(region.contains(p[None, :])[0]):
                        ids.append((rec.rid, k))
                        coords.append(p)
        order = sorted(range(len(ids)), key=lambda i: ids[i])
        return PointSet(
            ids=tuple(ids[i] for i in order),
            coords=(
                np.asarray([coords[i] for i in order])
                if ids
                else np.empty((0, self.dim))
            ),
        )

    def uniform_choice(self, points: PointSet):
        """Uniform element of a point set, invariant under input permutation:
        candidates are sorted lexicographically by coordinates first."""
        n = len(points)
        if n == 0:
            raise RegistryError("uniform_choice on an empty point set")
        order = np.lexsort(points.coords.T[::-1])
        j = int(self.rng.integers(n))
        k = int(order[j])
        return points.ids[k], points.coords[k]

    # -- tiered pick ----------------------------------------------------

    def pick_in_region(
        self,
        region: Region,
        bounding: Region,
        vol_lower: float,
        vol_upper: Optional[float] = None,
    ) -> PickResult:
        """Uniformly pick one process point of ``region`` (or report it
        empty), choosing the cheapest exact realization tier from the mass
        bracket.  ``bounding`` must contain the region and have an exact
        volume and sampler; ``vol_lower`` must underestimate vol(region).
        """
        self._check_dim(region)
        self._check_dim(bounding)
        if vol_upper is None:
            vol_upper = exact_volume(bounding)
            if vol_upper is None:
                raise RegistryError("bounding region needs an exact volume")
        if not 0.0 <= vol_lower <= vol_upper:
            raise RegistryError(
                f"invalid volume bracket [{vol_lower}, {vol_upper}]"
            )
        m_lo = self.lam * vol_lower
        m_hi = self.lam * vol_upper

        if m_hi <= self.store_cap:
            self.materialize(bounding)
            members = self.collect(region)
            if len(members) == 0:
                return PickResult("empty", None, None, "stored", 0, m_lo, m_hi)
            pid, coords = self.uniform_choice(members)
            return PickResult(
                "picked", pid, coords, "stored", len(members), m_lo, m_hi
            )

        if m_hi <= self.stream_cap:
            return self._pick_streamed(region, bounding, m_lo, m_hi)

        return self._pick_saturated(region, bounding, m_lo, m_hi)

    def _pick_streamed(self, region, bounding, m_lo, m_hi) -> PickResult:
        bball = bounding.bounding_ball()
        self._note_saturated_realization(bball, m_hi)
        # Earlier determined points inside the region are members too; they
        # must be collected before the new record exists.
        earlier = self.collect(region)
        rid = len(self.records)
        rec = _Record(rid, bounding, "streamed", bball)
        rec.filter_ids = self._determined_filter_ids(bounding)
        rec.member_region = region
        rec.stream_seed_path = (self.seed, _STREAM_PATH, rid)
        rec.n_candidates = int(self.rng.poisson(m_hi))
        rec.mass_lower = m_lo
        self.records.append(rec)
        self.streamed_candidates_total += rec.n_candidates

        # Pass 1: count fresh candidates and members.
        n_fresh = 0
        n_members = 0
        for _, pts, fresh in self._replay(rec):
            n_fresh += int(np.count_nonzero(fresh))
            n_members += int(np.count_nonzero(fresh & region.contains(pts)))
        rec.n_fresh = n_fresh
        rec.n_members = n_members

        total = n_members + len(earlier)
        if total == 0:
            return PickResult("empty", None, None, "streamed", 0, m_lo, m_hi)
        j = int(self.rng.integers(total))
        if j < len(earlier):
            return PickResult(
                "picked",
                earlier.ids[j],
                earlier.coords[j],
                "streamed",
                total,
                m_lo,
                m_hi,
            )
        j -= len(earlier)

        # Pass 2: extract the j-th member's coordinates.
        seen = 0
        for start, pts, fresh in self._replay(rec):
            mask = fresh & region.contains(pts)
            k = int(np.count_nonzero(mask))
            if seen + k > j:
                local = np.flatnonzero(mask)[j - seen]
                return PickResult(
                    "picked",
                    (rid, start + int(local)),
                    pts[local].copy(),
                    "streamed",
                    total,
                    m_lo,
                    m_hi,
                )
            seen += k
        raise RegistryError("stream replay lost the picked member")  # unreachable

    def _pick_saturated(self, region, bounding, m_lo, m_hi) -> PickResult:
        if m_lo < self.saturation_min_mass:
            raise RegistryError(
                f"mass bracket [{m_lo:.3e}, {m_hi:.3e}] is too heavy to "
                "stream but its lower bound is below the saturation minimum "
                f"{self.saturation_min_mass}; cannot realize exactly"
            )
        bball = bounding.bounding_ball()
        # The saturated pick must come from the undetermined sea; any already
        # determined point inside the region would carry selection weight
        # ~ 1/mass that the sea pick ignores.  Refuse instead of approximate.
        if len(self.collect(region)) > 0:
            raise RegistryError(
                "saturated pick over a region that already holds determined "
                "points; realize it with a lighter tier instead"
            )
        sats = [r for r in self.records if r.mode == "saturated"]
        if self._overlapping(bball, sats):
            raise RegistryError("overlapping saturated zones are not supported")
        rid = len(self.records)
        rec = _Record(rid, region, "saturated", bball)
        rec.filter_ids = self._determined_filter_ids(bounding)
        rec.mass_lower = m_lo
        self.records.append(rec)

        for _ in range(10_000):
            pts = bounding.sample(4096, self.rng)
            ok = region.contains(pts) & self._drop_determined(pts, rec.filter_ids)
            hit = np.flatnonzero(ok)
            if hit.size:
                coords = pts[hit[0]].copy()
                rec.pick_coords.append(coords)
                self.stored_points += 1
                self.peak_stored_points = max(
                    self.peak_stored_points, self.stored_points
                )
                return PickResult(
                    "picked", (rid, 0), coords, "saturated", None, m_lo, m_hi
                )
        raise RegistryError(
            "rejection sampling failed to land in the saturated region; "
            "the volume bracket is probably wrong"
        )

    # -- reporting -------------------------------------------------------

    def realized_points(self) -> PointSet:
        """Every determined point the registry stores coordinates for
        (stored fresh points and saturated picks; streamed candidates are
        replay-derived and reported by count only)."""
        ids = []
        coords = []
        for rec in self.records:
            if rec.mode == "stored" and rec.n_fresh:
                for i in range(rec.n_fresh):
                    ids.append((rec.rid, i))
                    coords.append(rec.coords[i])
            elif rec.mode == "saturated":
                for k, p in enumerate(rec.pick_coords):
                    ids.append((rec.rid, k))
                    coords.append(p)
        return PointSet(
            ids=tuple(ids),
            coords=np.asarray(coords) if ids else np.empty((0, self.dim)),
        )

    def stream_summaries(self) -> list:
        return [
            {
                "record": rec.rid,
                "candidates": rec.n_candidates,
                "fresh": rec.n_fresh,
                "members": rec.n_members,
            }
            for rec in self.records
            if rec.mode == "streamed"
        ]

    def saturated_summaries(self) -> list:
        return [
            {
                "record": rec.rid,
                "mass_lower": rec.mass_lower,
                "picks": len(rec.pick_coords),
            }
            for rec in self.records
            if rec.mode == "saturated"
        ]

    def metrics(self) -> dict:
        return {
            "records": len(self.records),
            "stored_points": self.stored_points,
            "peak_stored_points": self.peak_stored_points,
            "streamed_candidates_total": self.streamed_candidates_total,
            "stream_replays": self.stream_replays,
            "rng_algorithm": self.rng_algorithm,
        }

    def dump(self) -> str:
        """Line-oriented description of every record and stored point."""
        lines = [
            f"# poisson registry dim={self.dim} lam={self.lam!r} seed={self.seed}"
        ]
        for rec in self.records:
            reg = rec.region
            desc = f"{type(reg).__name__.lower()} key={region_key_safe(reg)}"
            lines.append(
                f"r {rec.rid} {rec.mode} {desc} candidates={rec.n_candidates} "
                f"fresh={rec.n_fresh}"
            )
            if rec.mode == "stored" and rec.n_fresh:
                for i in range(rec.n_fresh):
                    xs = " ".join(f"{x:.17g}" for x in rec.coords[i])
                    lines.append(f"p {rec.rid} {i} {xs}")
            elif rec.mode == "saturated":
                for k, p in enumerate(rec.pick_coords):
                    xs = " ".join(f"{x:.17g}" for x in p)
                    lines.append(f"p {rec.rid} {k} {xs}")
        return "\n".join(lines) + "\n"


def region_key_safe(region: Region) -> str:
    """Short printable region description for dumps."""
    if isinstance(region, Ball):
        c = ",".join(f"{x:.6g}" for x in region.center)
        return f"ball[{c};{region.radius:.6g}]"
    if isinstance(region, Cell):
        c = ",".join(f"{x:.6g}" for x in region.planar_center)
        z = ",".join(f"{x:.6g}" for x in region.layer_center)
        return f"cell[{c};{region.eps:.6g};{z};{region.layer_radius:.6g}]"
    if isinstance(region, Annulus):
        c = ",".join(f"{x:.6g}" for x in region.center)
        return f"annulus[{c};{region.inner:.6g},{region.outer:.6g}]"
    return type(region).__name__.lower()


def brute_force_counts(
    dim: int,
    lam: float,
    lo,
    hi,
    regions,
    seed: int,
) -> list:
    """Oracle for consistency tests: realize the process once on a box and
    count region memberships of the same global sample."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != (dim,) or hi.shape != (dim,) or np.any(hi <= lo):
        raise ValueError("invalid box")
    rng = generator(seed, _MAIN_PATH)
    vol = float(np.prod(hi - lo))
    n = int(rng.poisson(lam * vol))
    pts = lo + rng.random((n, dim)) * (hi - lo)
    return [int(np.count_nonzero(reg.contains(pts))) for reg in regions]


# -- lazy-vs-oracle consistency ------------------------------------------
#
# A fixed planar script of ten overlapping cell/ball queries whose joint
# count vector has the same law as counting the regions on one global
# sample.  The picks run with a small store cap, so the first two queries
# stream while the rest store, exercising ownership thinning, full-overlap
# replay, and the stored tier in one pass.

_SCRIPT_STORE_CAP = 4.0
_SCRIPT_BOX = 2.5


def consistency_regions(dim: int) -> dict:
    if dim != 2:
        raise ValueError("the consistency script is planar (dim = 2)")
    return {
        "q01": Ball(np.array([0.0, 0.0]), 0.8),
        "q02": Ball(np.array([0.6, 0.0]), 0.7),
        "q03": Cell(np.array([-0.4, 0.2]), 0.35, np.empty(0), 1.0),
        "q04": Ball(np.array([-0.5, -0.5]), 0.4),
        "q05": Ball(np.array([0.3, 0.4]), 0.5),
        "q06": Cell(np.array([0.9, -0.3]), 0.3, np.empty(0), 1.0),
        "q07": Ball(np.array([-0.9, 0.1]), 0.45),
        "q08": Ball(np.array([0.2, -0.6]), 0.5),
        "q09": Ball(np.array([0.0, 0.0]), 1.2),
        "q10": Ball(np.array([0.55, 0.35]), 0.35),
    }


# Which queries pick (uniform member draw) and which materialize; every
# query yields the region's exact point count either way.
_SCRIPT_PICKS = ("q01", "q02", "q05", "q07", "q10")


def consistency_counts_lazy(
    dim: int, lam: float, seed: int, store_cap: float = _SCRIPT_STORE_CAP
) -> tuple:
    """Count vector of the script's ten regions through a lazy registry."""
    regs = consistency_regions(dim)
    registry = RegionRegistry(dim, lam, seed, store_cap=store_cap)
    counts = []
    for key in sorted(regs):
        reg = regs[key]
        if key in _SCRIPT_PICKS:
            res = registry.pick_in_region(reg, reg, exact_volume(reg))
            counts.append(res.n_members)
        else:
            counts.append(len(registry.materialize(reg)))
    recount = len(registry.collect(regs["q01"]))
    if recount != counts[0]:
        raise RegistryError(
            f"replay recount {recount} != pick-time count {counts[0]}"
        )
    return tuple(counts)


def consistency_counts_oracle(dim: int, lam: float, seed: int) -> tuple:
    regs = consistency_regions(dim)
    counted = [regs[k] for k in sorted(regs)]
    lo = np.full(dim, -_SCRIPT_BOX)
    hi = np.full(dim, _SCRIPT_BOX)
    return tuple(brute_force_counts(dim, lam, lo, hi, counted, seed))


# Projections of the joint count law tested by the chi-squared battery.
# The full 10-tuple is too fine to test directly (at 1e4 samples nearly
# every tuple is unique, so any pooled table degenerates); equality of the
# joint law implies equality of every projection, so a fixed battery of
# marginals, the grand total, and strongly overlapping pairs is what a
# sample of this size can actually falsify.
_SCRIPT_PAIRS = ((0, 1), (0, 2), (0, 8), (1, 5), (3, 6), (4, 9))


def _chi2_two_sample(vals_a, vals_b, min_pooled: int):
    """Two-sample chi-squared on categorical values, pooling categories
    rarer than min_pooled combined.  Returns (chi2, p, dof, n_categories)
    or None when the pooled table is degenerate."""
    from collections import Counter

    from scipy.stats import chi2_contingency

    ca, cb = Counter(vals_a), Counter(vals_b)
    keys = sorted(set(ca) | set(cb))
    main = [k for k in keys if ca[k] + cb[k] >= min_pooled]
    row_a = [ca[k] for k in main]
    row_b = [cb[k] for k in main]
    rest_a = sum(ca[k] for k in keys if k not in main)
    rest_b = sum(cb[k] for k in keys if k not in main)
    if rest_a + rest_b > 0:
        row_a.append(rest_a)
        row_b.append(rest_b)
    table = np.array([row_a, row_b])
    if table.shape[1] < 2 or min(table.sum(axis=1)) == 0:
        return None
    stat, p, dof, _ = chi2_contingency(table)
    return float(stat), float(p), int(dof), int(table.shape[1])


def sampler_consistency_check(
    dim: int,
    lam: float,
    n_seeds: int,
    seed: int,
    alpha: float = 1e-3,
    min_pooled: int = 25,
) -> dict:
    """Chi-squared battery testing that the lazy registry's joint count law
    matches the brute-force global-sample oracle.

    The battery covers every marginal count, the grand total, and the six
    most-overlapping query pairs, at familywise significance ``alpha``
    (Bonferroni).  A degenerate projection (too few populated categories to
    test) is an error, not a pass."""
    if n_seeds < 100:
        raise ValueError("need at least 100 seeds for a meaningful test")
    lazy = np.array(
        [
            consistency_counts_lazy(dim, lam, derive_seed(seed, 41, i))
            for i in range(n_seeds)
        ]
    )
    oracle = np.array(
        [
            consistency_counts_oracle(dim, lam, derive_seed(seed, 42, i))
            for i in range(n_seeds)
        ]
    )
    n_queries = lazy.shape[1]
    tests = []
    for j in range(n_queries):
        tests.append((f"n{j + 1}", lazy[:, j].tolist(), oracle[:, j].tolist()))
    tests.append(("total", lazy.sum(axis=1).tolist(), oracle.sum(axis=1).tolist()))
    for i, j in _SCRIPT_PAIRS:
        tests.append(
            (
                f"n{i + 1}&n{j + 1}",
                list(zip(lazy[:, i], lazy[:, j])),
                list(zip(oracle[:, i], oracle[:, j])),
            )
        )
    alpha_each = alpha / len(tests)
    results = []
    worst = None
    for name, va, vb in tests:
        out = _chi2_two_sample(va, vb, min_pooled)
        if out is None:
            raise ValueError(
                f"count law projection {name} degenerate; increase n_seeds"
            )
        stat, p, dof, ncat = out
        results.append(
            {
                "projection": name,
                "p_value": p,
                "chi2": stat,
                "dof": dof,
                "categories": ncat,
                "passed": bool(p >= alpha_each),
            }
        )
        if worst is None or p < worst["p_value"]:
            worst = results[-1]
    return {
        "passed": all(r["passed"] for r in results),
        "min_p_value": worst["p_value"],
        "worst_projection": worst["projection"],
        "n_tests": len(tests),
        "alpha": alpha,
        "alpha_each": alpha_each,
        "n_seeds": n_seeds,
        "projections": results,
    }
