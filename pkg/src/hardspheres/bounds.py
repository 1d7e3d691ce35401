"""Dimension-dependent success bounds for the cluster construction.

Two volumes control one exploration step: A, a lower bound on the volume of
the region where the next sphere center may land, and B, the volume of the
largest exclusion ball around a candidate center.  A step succeeds when the
candidate region is nonempty and the chosen center is isolated, giving the
success probability at intensity lam the lower bound

    F(lam) = 1 - lam * B - exp(-lam * A),

maximized at lam_star = log(A/B) / A with value 1 - (log(A/B) + 1) / (A/B).
A/B grows geometrically in the dimension: it first exceeds 1 at d = 31 and
F(lam_star) first clears 0.892 at d = 45.  0.892 matters because a site is
kept when two independent steps succeed, and 0.892^2 = 0.7957 beats the
0.794 upper bound for the planar site-percolation threshold used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import (
    EPS,
    RADIUS_MAX,
    Region,
    exact_volume,
    log_unit_ball_volume,
    step_volume_lower_bound,
    unit_ball_volume,
)

# Success threshold whose square clears the planar site-percolation bound.
DEFAULT_THRESHOLD = 0.892
SITE_THRESHOLD_BOUND = 0.794

MIN_DIMENSION_SUPPORTED = 11  # the step-volume lower bound needs d >= 11


def constants_AB(d: int) -> tuple:
    """(A, B) for dimension d: A is the step-region volume lower bound,
    B = omega_d * RADIUS_MAX^d the largest exclusion-ball volume."""
    if d < MIN_DIMENSION_SUPPORTED:
        raise ValueError(f"need d >= {MIN_DIMENSION_SUPPORTED}, got {d}")
    A = step_volume_lower_bound(d)
    B = unit_ball_volume(d) * RADIUS_MAX**d
    return A, B


def log_constants_AB(d: int) -> tuple:
    """(log A, log B), stable for large d."""
    if d < MIN_DIMENSION_SUPPORTED:
        raise ValueError(f"need d >= {MIN_DIMENSION_SUPPORTED}, got {d}")
    m = d - 2
    half = 0.5 * m * math.log(1.2)
    # log(1.2^(m/2) - 1) without forming the big power.
    log_growth = half + math.log1p(-math.exp(-half))
    log_A = (
        math.log(math.pi)
        + 2.0 * math.log(EPS)
        + log_unit_ball_volume(m)
        - math.log(3.0)
        + log_growth
    )
    log_B = log_unit_ball_volume(d) + d * math.log(RADIUS_MAX)
    return log_A, log_B


def ratio_AB(d: int) -> float:
    """A/B computed from the two volume constants."""
    log_A, log_B = log_constants_AB(d)
    return math.exp(log_A - log_B)


def ratio_closed_form(d: int) -> float:
    """A/B via the reduced closed form
    1e-4 * d * (1.2^((d-2)/2) - 1) / (6 * 0.85^d), using the exact identity
    omega_{d-2} / omega_d = d / (2 pi)."""
    if d < MIN_DIMENSION_SUPPORTED:
        raise ValueError(f"need d >= {MIN_DIMENSION_SUPPORTED}, got {d}")
    m = d - 2
    return 1e-4 * d * (1.2 ** (m / 2.0) - 1.0) / (6.0 * RADIUS_MAX**d)


def success_lower_bound(lam: float, d: int) -> float:
    """F(lam) = 1 - lam*B - exp(-lam*A), a lower bound on per-step success."""
    if lam < 0:
        raise ValueError(f"intensity must be >= 0, got {lam}")
    A, B = constants_AB(d)
    return 1.0 - lam * B - math.exp(-lam * A)


def lambda_star(d: int) -> Optional[float]:
    """Maximizer log(A/B)/A of F, or None when A <= B (no useful intensity)."""
    log_A, log_B = log_constants_AB(d)
    if log_A <= log_B:
        return None
    return (log_A - log_B) * math.exp(-log_A)


def exact_success_bound(lam: float, d: int) -> float:
    """G(lam) = exp(-lam*B) - exp(-lam*A): the sharper two-exponential form
    of the step-success lower bound (G >= F pointwise)."""
    if lam < 0:
        raise ValueError(f"intensity must be >= 0, got {lam}")
    A, B = constants_AB(d)
    return math.exp(-lam * B) - math.exp(-lam * A)


@dataclass(frozen=True)
class BoundsReport:
    d: int
    A: float
    B: float
    ratio: float
    lambda_star: Optional[float]
    F_star: Optional[float]
    exact_G_star: Optional[float]
    threshold: float
    passes_threshold: bool


def bounds_report(d: int, threshold: float = DEFAULT_THRESHOLD) -> BoundsReport:
    """Evaluate the optimized bound at dimension d.

    When A/B <= 1 the optimizer does not exist and lambda_star, F_star and
    exact_G_star are reported absent with passes_threshold False.
    """
    A, B = constants_AB(d)
    r = ratio_AB(d)
    if r <= 1.0:
        return BoundsReport(d, A, B, r, None, None, None, threshold, False)
    lam = lambda_star(d)
    # F(lambda_star) in terms of the ratio alone: 1 - (log r + 1)/r.
    f_star = 1.0 - (math.log(r) + 1.0) / r
    g_star = math.exp(-math.log(r) / r) - 1.0 / r
    return BoundsReport(
        d, A, B, r, lam, f_star, g_star, threshold, f_star >= threshold
    )


def min_dimension(
    threshold: float = DEFAULT_THRESHOLD, d_max: int = 400
) -> int:
    """First dimension whose optimized bound has a valid maximizer and
    F_star >= threshold.  threshold = 0 returns the first dimension with a
    valid maximizer at all."""
    for d in range(MIN_DIMENSION_SUPPORTED, d_max + 1):
        rep = bounds_report(d, threshold)
        if rep.lambda_star is not None and rep.F_star >= threshold:
            return d
    raise RuntimeError(f"threshold {threshold} not reached by d = {d_max}")


def isolated_bound(lam: float, d: int, r: float, vol_S: float) -> float:
    """Lower bound exp(-lam * omega_d * r^d) - exp(-lam * vol_S) for the
    probability that a region S of volume vol_S holds a point and a
    uniformly chosen one is r-isolated."""
    if lam < 0:
        raise ValueError(f"intensity must be >= 0, got {lam}")
    if r < 0:
        raise ValueError(f"isolation radius must be >= 0, got {r}")
    if vol_S < 0:
        raise ValueError(f"volume must be >= 0, got {vol_S}")
    return math.exp(-lam * unit_ball_volume(d) * r**d) - math.exp(-lam * vol_S)


@dataclass(frozen=True)
class IsolationCheck:
    empirical: float
    std_error: float
    reference: float
    margin_sigmas: float
    trials_used: int
    passed: bool


def _bounding_box(regions, pad: float):
    dims = {reg.dim for reg in regions}
    if len(dims) != 1:
        raise ValueError(f"mixed dimensions: {dims}")
    d = dims.pop()
    lo = np.full(d, np.inf)
    hi = np.full(d, -np.inf)
    for reg in regions:
        b = reg.bounding_ball()
        lo = np.minimum(lo, b.center - b.radius - pad)
        hi = np.maximum(hi, b.center + b.radius + pad)
    return lo, hi


def _isolation_trials(
    region: Region,
    lam: float,
    r: float,
    trials: int,
    seed: int,
    condition_empty: Optional[Region] = None,
    chunk: int = 4096,
):
    """Brute-force isolation experiment.

    Each trial realizes a Poisson(lam) process on a box covering the
    r-inflated region (and the conditioning region if given), picks a
    uniform point of the process inside ``region`` when one exists, and
    records whether no other point lies within distance r.  Returns
    (success_indicators, kept_mask) as arrays over trials, where kept is
    False for trials rejected by the conditioning.
    """
    extra = [condition_empty] if condition_empty is not None else []
    lo, hi = _bounding_box([region, *extra], pad=r)
    box_vol = float(np.prod(hi - lo))
    d = lo.shape[0]
    rng = np.random.Generator(np.random.Philox(seed))

    success = np.zeros(trials, dtype=bool)
    kept = np.ones(trials, dtype=bool)
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        counts = rng.poisson(lam * box_vol, size=t)
        total = int(counts.sum())
        pts = lo + rng.random((total, d)) * (hi - lo)
        keys = rng.random(total)
        offsets = np.zeros(t + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])

        member = region.contains(pts) if total else np.zeros(0, dtype=bool)
        if condition_empty is not None:
            in_z = condition_empty.contains(pts) if total else np.zeros(0, dtype=bool)
            zc = np.concatenate([[0], np.cumsum(in_z)])
            kept[done : done + t] = (zc[offsets[1:]] - zc[offsets[:-1]]) == 0

        # Uniform member pick per trial: max random key among members.
        masked = np.where(member, keys, -1.0)
        pick_idx = np.full(t, -1, dtype=np.int64)
        # Segment argmax via a short python loop over trials in this chunk;
        # counts are small so this stays cheap.
        for i in range(t):
            a, b = offsets[i], offsets[i + 1]
            if a == b:
                continue
            j = a + int(np.argmax(masked[a:b]))
            if masked[j] >= 0.0:
                pick_idx[i] = j
        for i in range(t):
            j = pick_idx[i]
            if j < 0:
                continue
            a, b = offsets[i], offsets[i + 1]
            dist2 = np.sum((pts[a:b] - pts[j]) ** 2, axis=1)
            dist2[j - a] = np.inf  # the picked point itself
            success[done + i] = not np.any(dist2 <= r * r)
        done += t
    return success, kept


def mc_isolated_check(
    region: Region,
    lam: float,
    r: float,
    trials: int,
    seed: int,
    sigmas: float = 4.0,
) -> IsolationCheck:
    """Empirical P(pick exists and is r-isolated) against the analytic
    lower bound at the region's exact volume; passes when
    empirical >= bound - sigmas * std_error."""
    vol = exact_volume(region)
    if vol is None:
        raise ValueError("region needs an exact volume for the analytic bound")
    success, _ = _isolation_trials(region, lam, r, trials, seed)
    p = float(np.mean(success))
    se = math.sqrt(p * (1.0 - p) / trials)
    bound = isolated_bound(lam, region.dim, r, vol)
    return IsolationCheck(
        empirical=p,
        std_error=se,
        reference=bound,
        margin_sigmas=sigmas,
        trials_used=trials,
        passed=p >= bound - sigmas * se,
    )


def mc_conditional_isolated_check(
    region: Region,
    condition_empty: Region,
    lam: float,
    r: float,
    trials: int,
    seed: int,
    sigmas: float = 4.0,
) -> IsolationCheck:
    """Conditioning on a disjoint region being empty cannot hurt isolation:
    empirical conditional success must be >= the unconditional rate minus
    sigmas combined standard errors.  Conditioning is by rejection."""
    success_u, _ = _isolation_trials(region, lam, r, trials, seed)
    success_c, kept = _isolation_trials(
        region, lam, r, trials, seed + 1, condition_empty=condition_empty
    )
    if not np.any(kept):
        raise RuntimeError("conditioning rejected every trial")
    p_u = float(np.mean(success_u))
    p_c = float(np.mean(success_c[kept]))
    n_c = int(np.count_nonzero(kept))
    se = math.sqrt(
        p_u * (1.0 - p_u) / trials + p_c * (1.0 - p_c) / max(n_c, 1)
    )
    return IsolationCheck(
        empirical=p_c,
        std_error=se,
        reference=p_u,
        margin_sigmas=sigmas,
        trials_used=n_c,
        passed=p_c >= p_u - sigmas * se,
    )


def scan_dimensions(
    d_from: int, d_to: int, threshold: float = DEFAULT_THRESHOLD
):
    """Bounds reports for every dimension in [d_from, d_to]."""
    if d_from > d_to:
        raise ValueError(f"empty scan range [{d_from}, {d_to}]")
    return [bounds_report(d, threshold) for d in range(d_from, d_to + 1)]
