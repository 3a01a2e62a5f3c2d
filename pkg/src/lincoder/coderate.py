"""Minimum admissible code rates for linear-system forward increments.

The rate to describe X(t + dt) - X(t) to mean-square fidelity D is the
Gaussian rate distortion function of the increment covariance.  For stable
time-invariant drift the rate saturates at the value set by the Lyapunov
equilibrium covariance; otherwise it grows without bound as the sampling
interval grows, and a channel of fixed capacity forces a minimum sampling
rate.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import CapacityInfeasibleError, NoEquilibriumError
from .linalg import lyapunov_solve
from .linearsystem import LinearSystemModel, increment_distribution
from .ratedistortion import GaussianSource, RdfResult, rdf

#: Eigenvalue real parts must be below -HURWITZ_TOL for a drift to count as stable.
HURWITZ_TOL = 1e-10
#: Safety margin (bits) used when comparing rates against a capacity.
CAPACITY_MARGIN_BITS = 1e-9
#: Probe grid for bounded-rate detection in min_sampling_rate.
PROBE_DT_DECADES = (-3.0, 3.0)
PROBE_DT_POINTS = 121
#: Smallest sampling interval tried before declaring a capacity infeasible.
DT_FLOOR = 1e-6
#: Largest sampling interval tried when extending the probe grid.
DT_CEILING = 1e12
#: Relative width at which the crossing bisection stops.
BISECTION_RTOL = 1e-9


@dataclass(frozen=True)
class RateQuery:
    """One point on the time / fidelity / attention axes."""

    model: LinearSystemModel
    dt: float
    distortion: float
    t: float = 0.0

    def __post_init__(self):
        if float(self.dt) <= 0.0:
            raise ValueError("sampling interval must be positive")
        if float(self.distortion) < 0.0:
            raise ValueError("distortion budget must be nonnegative")
        if float(self.t) < 0.0:
            raise ValueError("time must be nonnegative")


@dataclass(frozen=True)
class NotNeeded:
    """No minimum sampling rate exists: any rate meets the capacity.

    ``ceiling_bits`` carries the saturation rate when the drift is stable;
    ``zero_rate`` flags the degenerate case of a rate that is zero for
    every sampling interval probed.
    """

    ceiling_bits: Optional[float] = None
    zero_rate: bool = False


@dataclass(frozen=True)
class RateCurve:
    """Code rate sampled along a sampling-interval grid."""

    dts: np.ndarray
    rate_bits: np.ndarray
    axis: str  # "dt" or "fs"
    distortion: float
    asymptote_bits: Optional[float]
    model_hash: str

    def rows(self):
        """(dt, fs, rate_bits) tuples ordered by the curve's axis."""
        order = range(len(self.dts)) if self.axis == "dt" else reversed(range(len(self.dts)))
        for i in order:
            dt = float(self.dts[i])
            yield dt, 1.0 / dt, float(self.rate_bits[i])


def increment_rate(query: RateQuery) -> RdfResult:
    """Minimum admissible code rate for one (model, t, dt, D) query.

    The increment mean is irrelevant to the rate, so the law is built at
    the origin.  A covariance that overflowed to non-finite values (wildly
    unstable drift at an extreme horizon) reports an infinite rate.
    """
    n = query.model.dimension
    law = increment_distribution(query.model, np.zeros(n), query.t, query.dt)
    cov = law.covariance
    if not np.all(np.isfinite(cov)):
        return RdfResult(math.inf, math.inf, math.inf, np.full(n, math.inf))
    return rdf(GaussianSource(np.zeros(n), cov), query.distortion)


def is_hurwitz(matrix: np.ndarray) -> bool:
    """True when every eigenvalue real part is below -HURWITZ_TOL."""
    return bool(np.max(np.linalg.eigvals(matrix).real) < -HURWITZ_TOL)


def rate_ceiling(model: LinearSystemModel, distortion: float) -> RdfResult:
    """Saturation rate of a stable time-invariant model.

    The increment covariance converges to the Lyapunov equilibrium, so the
    rate at any sampling interval is bounded by the rate of that Gaussian.
    Raises NoEquilibriumError when the drift is not Hurwitz (the increment
    covariance then has no limit).
    """
    if not model.is_constant:
        raise ValueError("rate ceiling requires constant drift")
    a = model.drift.matrix
    if not is_hurwitz(a):
        raise NoEquilibriumError("drift is not Hurwitz: increment covariance has no limit")
    equilibrium = lyapunov_solve(a, model.noise_intensity)
    n = model.dimension
    return rdf(GaussianSource(np.zeros(n), equilibrium), distortion)


def model_fingerprint(model: LinearSystemModel) -> str:
    """Short content hash of a constant-drift model (drift and noise)."""
    if not model.is_constant:
        raise ValueError("fingerprint requires constant drift")
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(model.drift.matrix).tobytes())
    digest.update(b"/")
    digest.update(np.ascontiguousarray(model.noise_intensity).tobytes())
    return digest.hexdigest()[:12]


def rate_curve(
    model: LinearSystemModel, distortion: float, dt_grid, axis: str = "dt"
) -> RateCurve:
    """Code rate at each grid point, with the saturation rate when it exists."""
    if axis not in ("dt", "fs"):
        raise ValueError("axis must be 'dt' or 'fs'")
    grid = np.asarray(dt_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("dt grid must be a non-empty vector")
    if np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise ValueError("dt grid must be positive and strictly increasing")
    rates = np.array(
        [increment_rate(RateQuery(model, float(dt), distortion)).rate_bits for dt in grid]
    )
    try:
        asymptote = rate_ceiling(model, distortion).rate_bits
    except NoEquilibriumError:
        asymptote = None
    return RateCurve(grid, rates, axis, float(distortion), asymptote, model_fingerprint(model))


def min_sampling_rate(
    model: LinearSystemModel,
    distortion: float,
    capacity_bits: float,
    *,
    dt_floor: float = DT_FLOOR,
) -> Union[float, NotNeeded]:
    """Smallest sampling rate keeping the code rate below a channel capacity.

    Exploits monotonicity of the rate in the sampling interval: the grid
    scan stops at the first interval at or above capacity, and the crossing
    is then located by bisection in log space.  Returns NotNeeded when the
    rate stays below capacity for every probed interval and the stable-case
    ceiling (when it exists) certifies boundedness.

    Raises CapacityInfeasibleError when the rate is at or above capacity
    even at the smallest supported interval.
    """
    if not model.is_constant:
        raise ValueError("minimum sampling rate requires constant drift")
    capacity_bits = float(capacity_bits)
    if capacity_bits <= 0.0:
        raise ValueError("capacity must be positive")
    threshold = capacity_bits - CAPACITY_MARGIN_BITS

    def below(dt: float) -> bool:
        return increment_rate(RateQuery(model, dt, distortion)).rate_bits < threshold

    grid = np.logspace(PROBE_DT_DECADES[0], PROBE_DT_DECADES[1], PROBE_DT_POINTS)
    lo = None
    hi = None
    for dt in grid:
        if below(float(dt)):
            lo = float(dt)
        else:
            hi = float(dt)
            break

    if lo is None:
        # Above capacity at the smallest grid point: push toward the floor.
        probe = float(grid[0])
        while probe > dt_floor:
            previous = probe
            probe = max(probe / 10.0, dt_floor)
            if below(probe):
                lo, hi = probe, previous
                break
        if lo is None:
            raise CapacityInfeasibleError(
                f"code rate stays at or above {capacity_bits} bits down to dt={dt_floor}"
            )

    if hi is None:
        # Below capacity across the whole probe grid.
        ceiling = None
        try:
            ceiling = rate_ceiling(model, distortion).rate_bits
            if ceiling < capacity_bits:
                return NotNeeded(ceiling_bits=ceiling, zero_rate=(ceiling <= 0.0))
        except NoEquilibriumError:
            pass
        dt = float(grid[-1])
        last_rate = increment_rate(RateQuery(model, dt, distortion)).rate_bits
        lo = dt
        while dt < DT_CEILING:
            dt *= 2.0
            rate = increment_rate(RateQuery(model, dt, distortion)).rate_bits
            if rate >= threshold:
                hi = dt
                break
            lo, last_rate = dt, rate
        if hi is None:
            return NotNeeded(ceiling_bits=ceiling, zero_rate=(last_rate <= 0.0))

    while hi / lo > 1.0 + BISECTION_RTOL:
        mid = math.sqrt(lo * hi)
        if below(mid):
            lo = mid
        else:
            hi = mid
    return 1.0 / lo
