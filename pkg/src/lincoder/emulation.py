"""Source-family codecs and data-based trajectory emulation.

A family of vector fields driven by binary activations defines a control
system whose endpoint map doubles as a decompressor for observed state
increments.  Two codecs are provided:

* one-hot index sequences (the system flows along one field per uniform
  sub-segment), compressed greedily;
* simplex codes (relative flow-time fractions plus a total flow time) for
  constant fields, compressed exactly by a linear program minimizing the
  total flow time.

On top of the simplex codec sits a non-parametric emulator: observed
increments of an unknown system are compressed trial by trial, averaged,
and replayed through multinomial draws of the field-selection frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InfeasibleTargetError
from .linalg import as_square, as_vector
from .rng import EMULATION_LANE, substream
from .simplexlp import solve_nonnegative_lp
from .trajectories import TrajectoryDataset

#: Simplex membership slack accepted by SimplexCode.
SIMPLEX_TOL = 5e-12
#: Fixed-substep integrator floor for affine-field segments.
MIN_SUBSTEPS = 64
SUBSTEP_NORM_FACTOR = 16.0


@dataclass(frozen=True)
class ConstantField:
    """Vector field with the same value everywhere."""

    vector: np.ndarray

    def __post_init__(self):
        vec = as_vector(self.vector, "field vector").copy()
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def dimension(self) -> int:
        return self.vector.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.vector


@dataclass(frozen=True)
class AffineField:
    """Vector field x -> M x + b."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        mat = as_square(self.matrix, "field matrix").copy()
        off = as_vector(self.offset, "field offset").copy()
        if off.shape[0] != mat.shape[0]:
            raise ValueError("field matrix and offset sizes do not agree")
        mat.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "offset", off)

    @property
    def dimension(self) -> int:
        return self.offset.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x + self.offset


Field = Union[ConstantField, AffineField]


@dataclass(frozen=True)
class SourceFamily:
    """Finite set of vector fields sharing one state dimension."""

    fields: tuple

    def __post_init__(self):
        fields = tuple(self.fields)
        if not fields:
            raise ValueError("a source family needs at least one field")
        dim = fields[0].dimension
        if any(f.dimension != dim for f in fields):
            raise ValueError("all fields must share the same dimension")
        object.__setattr__(self, "fields", fields)

    @classmethod
    def from_vectors(cls, vectors) -> "SourceFamily":
        return cls(tuple(ConstantField(v) for v in vectors))

    @property
    def size(self) -> int:
        return len(self.fields)

    @property
    def dimension(self) -> int:
        return self.fields[0].dimension

    @property
    def is_constant(self) -> bool:
        return all(isinstance(f, ConstantField) for f in self.fields)

    def field_matrix(self) -> np.ndarray:
        """Constant-field values as columns, shape (dimension, size)."""
        if not self.is_constant:
            raise ValueError("field matrix requires constant fields")
        return np.column_stack([f.vector for f in self.fields])

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Field values at x as columns, shape (dimension, size)."""
        return np.column_stack([f.evaluate(x) for f in self.fields])


@dataclass(frozen=True)
class OneHotSchedule:
    """One active field per uniform sub-segment of the horizon."""

    indices: tuple
    horizon: float

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise ValueError("schedule needs at least one segment")
        if float(self.horizon) <= 0.0:
            raise ValueError("schedule horizon must be positive")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "horizon", float(self.horizon))


@dataclass(frozen=True)
class PiecewiseSchedule:
    """Piecewise-constant activation patterns in {0,1}^K over the horizon.

    ``switch_times`` are offsets from the start; the first must be 0 and
    they must increase strictly inside the horizon.  ``patterns[j]`` is
    active on [switch_times[j], switch_times[j+1]).
    """

    switch_times: tuple
    patterns: tuple
    horizon: float

    def __post_init__(self):
        times = tuple(float(t) for t in self.switch_times)
        patterns = tuple(tuple(int(u) for u in p) for p in self.patterns)
        horizon = float(self.horizon)
        if horizon <= 0.0:
            raise ValueError("schedule horizon must be positive")
        if len(times) != len(patterns) or not times:
            raise ValueError("need one pattern per switching time")
        if times[0] != 0.0:
            raise ValueError("first switching time must be 0")
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])) or times[-1] >= horizon:
            raise ValueError("switching times must increase strictly inside the horizon")
        if any(u not in (0, 1) for p in patterns for u in p):
            raise ValueError("activation patterns must be binary")
        object.__setattr__(self, "switch_times", times)
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "horizon", horizon)


Schedule = Union[OneHotSchedule, PiecewiseSchedule]


@dataclass(frozen=True)
class SimplexCode:
    """Relative flow-time fractions plus the total flow time."""

    probabilities: np.ndarray
    flow_time: float

    def __post_init__(self):
        p = as_vector(self.probabilities, "probabilities").copy()
        if p.size == 0:
            raise ValueError("probability vector must be non-empty")
        if np.any(p < -SIMPLEX_TOL) or abs(float(p.sum()) - 1.0) > SIMPLEX_TOL * p.size:
            raise ValueError("probabilities must lie on the simplex")
        z = float(self.flow_time)
        if not np.isfinite(z) or z < 0.0:
            raise ValueError("flow time must be finite and nonnegative")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "flow_time", z)


@dataclass(frozen=True)
class IntegerCode:
    """Nonnegative integer counts per field, summing to the resolution."""

    counts: np.ndarray
    resolution: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=int).copy()
        resolution = int(self.resolution)
        if counts.ndim != 1 or counts.size == 0:
            raise ValueError("counts must be a non-empty vector")
        if resolution < 1:
            raise ValueError("resolution must be a positive integer")
        if np.any(counts < 0) or int(counts.sum()) != resolution:
            raise ValueError("counts must be nonnegative and sum to the resolution")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "resolution", resolution)


def _advance_segment(family: SourceFamily, x: np.ndarray, active, length: float) -> np.ndarray:
    """Flow along the activated combination of fields for one segment."""
    active = np.asarray(active, dtype=float)
    if not np.any(active):
        return x
    constant = sum(
        f.vector * a
        for f, a in zip(family.fields, active)
        if a and isinstance(f, ConstantField)
    )
    affine = [(f, a) for f, a in zip(family.fields, active) if a and isinstance(f, AffineField)]
    if not affine:
        # Constant combined field: the state advances linearly.
        return x + constant * length
    mix_matrix = sum(f.matrix * a for f, a in affine)
    mix_offset = sum(f.offset * a for f, a in affine)
    if np.ndim(constant):
        mix_offset = mix_offset + constant
    steps = max(
        MIN_SUBSTEPS,
        int(math.ceil(length * float(np.linalg.norm(mix_matrix, 1)) * SUBSTEP_NORM_FACTOR)),
    )
    h = length / steps
    for _ in range(steps):
        k1 = mix_matrix @ x + mix_offset
        k2 = mix_matrix @ (x + 0.5 * h * k1) + mix_offset
        k3 = mix_matrix @ (x + 0.5 * h * k2) + mix_offset
        k4 = mix_matrix @ (x + h * k3) + mix_offset
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def endpoint_map(family: SourceFamily, x_t, schedule: Schedule) -> np.ndarray:
    """Terminal state after driving the family with the given activations.

    One-hot schedules realize the composition of single-field flows over
    uniform sub-segments; piecewise schedules may activate several fields
    at once.  Constant fields advance the state exactly; affine fields are
    integrated with a fixed-substep fourth-order scheme.
    """
    x = as_vector(x_t, "state").copy()
    if x.shape[0] != family.dimension:
        raise ValueError("state dimension does not match the family")
    k = family.size
    if isinstance(schedule, OneHotSchedule):
        if any(i < 0 or i >= k for i in schedule.indices):
            raise ValueError("schedule index out of range")
        length = schedule.horizon / len(schedule.indices)
        for idx in schedule.indices:
            active = np.zeros(k)
            active[idx] = 1.0
            x = _advance_segment(family, x, active, length)
        return x
    if isinstance(schedule, PiecewiseSchedule):
        if any(len(p) != k for p in schedule.patterns):
            raise ValueError("pattern length does not match the family size")
        boundaries = list(schedule.switch_times) + [schedule.horizon]
        for pattern, start, stop in zip(schedule.patterns, boundaries, boundaries[1:]):
            x = _advance_segment(family, x, pattern, stop - start)
        return x
    raise TypeError(f"unsupported schedule type: {type(schedule).__name__}")


def onehot_compress(
    family: SourceFamily, x_t, target_dx, segments: int, dt: float
) -> np.ndarray:
    """Greedy one-hot index sequence steering toward x_t + target_dx.

    At each of the ``segments`` uniform sub-segments the index bringing the
    running endpoint closest to the proportional point on the straight line
    toward the target is chosen (ties to the lowest index).  Deterministic
    but not guaranteed optimal.
    """
    if not family.is_constant:
        raise ValueError("one-hot compression requires constant fields")
    segments = int(segments)
    if segments < 1:
        raise ValueError("need at least one segment")
    dt = float(dt)
    if dt <= 0.0:
        raise ValueError("horizon must be positive")
    x = as_vector(x_t, "state")
    target = as_vector(target_dx, "target increment")
    if x.shape[0] != family.dimension or target.shape[0] != family.dimension:
        raise ValueError("dimensions do not match the family")
    vectors = family.field_matrix()
    h = dt / segments
    position = x.copy()
    indices = np.empty(segments, dtype=int)
    for j in range(segments):
        waypoint = x + target * ((j + 1) / segments)
        candidates = position[:, None] + vectors * h
        distances = np.linalg.norm(candidates - waypoint[:, None], axis=0)
        pick = int(np.argmin(distances))
        indices[j] = pick
        position = candidates[:, pick]
    return indices


def onehot_code_rate_bits(family_size: int, segments: int, blocklength: int) -> float:
    """Code rate of the induced (K^N, L) block code, bits per symbol."""
    if family_size < 1 or segments < 1 or blocklength < 1:
        raise ValueError("family size, segments and blocklength must be positive")
    return segments / blocklength * math.log2(family_size)


def simplex_compress(family: SourceFamily, target_dx) -> SimplexCode:
    """Exact simplex code for a reachable increment of a constant family.

    Solves the linear program minimizing the total flow time subject to
    reproducing the increment with nonnegative per-field flow times, by a
    dense two-phase primal simplex.  Raises InfeasibleTargetError when the
    increment lies outside the conic hull of the fields.
    """
    if not family.is_constant:
        raise ValueError("simplex compression requires constant fields")
    target = as_vector(target_dx, "target increment")
    if target.shape[0] != family.dimension:
        raise ValueError("target dimension does not match the family")
    k = family.size
    if not np.any(target):
        return SimplexCode(np.full(k, 1.0 / k), 0.0)
    flow_times = solve_nonnegative_lp(np.ones(k), family.field_matrix(), target)
    z = float(flow_times.sum())
    if z <= 0.0:
        return SimplexCode(np.full(k, 1.0 / k), 0.0)
    return SimplexCode(flow_times / z, z)


def simplex_decompress(family: SourceFamily, x_t, code: SimplexCode) -> np.ndarray:
    """Increment reproduced from a simplex code, fields evaluated at x_t."""
    x = as_vector(x_t, "state")
    if x.shape[0] != family.dimension:
        raise ValueError("state dimension does not match the family")
    if code.probabilities.shape[0] != family.size:
        raise ValueError("code length does not match the family size")
    return code.flow_time * (family.evaluate(x) @ code.probabilities)


def integer_quantize(code: SimplexCode, resolution: int) -> IntegerCode:
    """Largest-remainder apportionment of the resolution among the fractions.

    Floors resolution * p, then hands the remaining units to the largest
    fractional parts (ties to the lowest index).  Guarantees
    max|counts/resolution - p| <= 1/resolution.
    """
    resolution = int(resolution)
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    scaled = code.probabilities * resolution
    counts = np.floor(scaled).astype(int)
    remainder = resolution - int(counts.sum())
    if remainder > 0:
        order = np.lexsort((np.arange(scaled.size), -(scaled - counts)))
        counts[order[:remainder]] += 1
    return IntegerCode(counts, resolution)


def integer_decompress(
    family: SourceFamily, x_t, code: IntegerCode, flow_time: float
) -> np.ndarray:
    """Increment reproduced from integer counts at the given total flow time.

    Callers normally pass the flow time carried alongside the counts; pass
    the full sampling interval instead to adopt the convention that the
    fields are active for the whole interval.
    """
    fractions = code.counts / code.resolution
    return simplex_decompress(family, x_t, SimplexCode(fractions, flow_time))


def integer_code_count(family_size: int, resolution: int) -> int:
    """Number of distinct integer codes: C(resolution + K - 1, K - 1)."""
    if family_size < 1 or resolution < 1:
        raise ValueError("family size and resolution must be positive")
    return math.comb(resolution + family_size - 1, family_size - 1)


@dataclass(frozen=True)
class StepCodes:
    """Per-step averaged simplex codes of a compressed training dataset."""

    probabilities: np.ndarray  # (steps, family size)
    flow_times: np.ndarray  # (steps,)
    feasible_trials: np.ndarray  # (steps,) int
    infeasible_trials: np.ndarray  # (steps,) int

    @property
    def steps(self) -> int:
        return self.flow_times.shape[0]

    @property
    def infeasible_count(self) -> int:
        return int(self.infeasible_trials.sum())


def compress_dataset(dataset: TrajectoryDataset, family: SourceFamily) -> StepCodes:
    """Compress every observed increment and average codes per step.

    Increments outside the attainable cone are skipped and counted; the
    per-step average runs over the feasible trials only.  A step with no
    feasible trial gets a zero flow time (the emulator then holds still).
    """
    if dataset.dimension != family.dimension:
        raise ValueError("dataset and family dimensions do not agree")
    increments = dataset.increments()
    trials, steps, _ = increments.shape
    k = family.size
    probabilities = np.empty((steps, k))
    flow_times = np.empty(steps)
    feasible = np.zeros(steps, dtype=int)
    infeasible = np.zeros(steps, dtype=int)
    for step in range(steps):
        p_sum = np.zeros(k)
        z_sum = 0.0
        good = 0
        for trial in range(trials):
            try:
                code = simplex_compress(family, increments[trial, step])
            except InfeasibleTargetError:
                infeasible[step] += 1
                continue
            p_sum += code.probabilities
            z_sum += code.flow_time
            good += 1
        feasible[step] = good
        if good == 0:
            probabilities[step] = np.full(k, 1.0 / k)
            flow_times[step] = 0.0
        else:
            probabilities[step] = p_sum / good
            flow_times[step] = z_sum / good
    return StepCodes(probabilities, flow_times, feasible, infeasible)


def emulate_steps(
    codes: StepCodes,
    family: SourceFamily,
    x0,
    resolution: int,
    seed: int,
) -> np.ndarray:
    """Replay averaged step codes through multinomial draws.

    At each step the field-selection counts are drawn from a multinomial
    with the averaged fractions, and the increment is decompressed at the
    current emulated state.  Deterministic given (codes, x0, resolution,
    seed).
    """
    resolution = int(resolution)
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    x = as_vector(x0, "initial state").copy()
    if x.shape[0] != family.dimension:
        raise ValueError("initial state dimension does not match the family")
    states = np.empty((codes.steps + 1, x.shape[0]))
    states[0] = x
    for step in range(codes.steps):
        p = np.clip(codes.probabilities[step], 0.0, None)
        p /= p.sum()
        counts = substream(seed, EMULATION_LANE, 0, step).multinomial(resolution, p)
        code = SimplexCode(counts / resolution, float(codes.flow_times[step]))
        x = x + simplex_decompress(family, x, code)
        states[step + 1] = x
    return states


@dataclass(frozen=True)
class EmulationResult:
    """Emulated trajectory plus compression diagnostics."""

    states: np.ndarray
    infeasible_count: int
    codes: StepCodes


def emulate(
    dataset: TrajectoryDataset,
    family: SourceFamily,
    resolution: int,
    seed: int,
) -> EmulationResult:
    """Generate one new trajectory resembling a further independent trial.

    Three steps per sampling instant: compress each trial's observed
    increment to a simplex code, average the codes arithmetically over the
    feasible trials, then draw field-selection counts from the multinomial
    with the averaged fractions and decompress at the current emulated
    state.  The emulated path starts at the mean initial state.
    """
    codes = compress_dataset(dataset, family)
    x0 = dataset.states[:, 0, :].mean(axis=0)
    states = emulate_steps(codes, family, x0, resolution, seed)
    return EmulationResult(states, codes.infeasible_count, codes)
