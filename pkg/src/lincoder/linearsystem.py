"""Linear stochastic systems driven by additive white noise.

Models dx = A(t) x dt + dw with noise intensity N, computes the Gaussian
law of the forward increment X(t + dt) - X(t) | X(t), and draws sample
paths by exact discretization (the sampled chain has exactly the analyzed
increment law; there is no integrator bias).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .linalg import as_square, as_vector, check_symmetric, mat_exp, max_abs
from .rng import PATH_LANE, substream
from .trajectories import TrajectoryDataset

#: Most negative eigenvalue accepted in the noise intensity matrix.
NOISE_PSD_TOL = 1e-9
#: norm1(A) * dt above which the LTI increment covariance is assembled by
#: interval doubling instead of one augmented exponential (avoids overflow
#: of the anti-stable block at large horizons).
GRAMIAN_SPLIT_NORM = 4.0
#: Fixed-substep integrator floor and norm factor for time-varying drift.
MIN_SUBSTEPS = 64
SUBSTEP_NORM_FACTOR = 16.0
#: Cholesky pivot cutoff (relative to the trace) below which the noise
#: square root falls back to the eigenvalue square root.
SQRT_PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class ConstantDrift:
    """Time-invariant drift matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = as_square(self.matrix, "drift matrix").copy()
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class TimeVaryingDrift:
    """Drift given as a function t -> A(t), evaluable on any finite window."""

    matrix_at: Callable[[float], np.ndarray]
    dimension: int

    def evaluate(self, t: float) -> np.ndarray:
        arr = as_square(self.matrix_at(float(t)), "drift matrix")
        if arr.shape[0] != self.dimension:
            raise ValueError("time-varying drift returned a matrix of wrong size")
        return arr


Drift = Union[ConstantDrift, TimeVaryingDrift]


@dataclass(frozen=True)
class LinearSystemModel:
    """Drift plus symmetric PSD noise intensity (units: state^2 / time)."""

    drift: Drift
    noise_intensity: np.ndarray

    def __post_init__(self):
        noise = check_symmetric(
            as_square(self.noise_intensity, "noise intensity"), "noise intensity"
        )
        if noise.shape[0] != self.drift.dimension:
            raise ValueError("drift and noise intensity sizes do not agree")
        smallest = float(np.linalg.eigvalsh(noise)[0])
        if smallest < -NOISE_PSD_TOL * max(1.0, max_abs(noise)):
            raise ValueError("noise intensity is not positive semidefinite")
        noise.setflags(write=False)
        object.__setattr__(self, "noise_intensity", noise)

    @classmethod
    def constant(cls, a, noise) -> "LinearSystemModel":
        return cls(ConstantDrift(a), noise)

    @classmethod
    def time_varying(cls, matrix_at, dimension, noise) -> "LinearSystemModel":
        return cls(TimeVaryingDrift(matrix_at, int(dimension)), noise)

    @property
    def dimension(self) -> int:
        return self.drift.dimension

    @property
    def is_constant(self) -> bool:
        return isinstance(self.drift, ConstantDrift)


@dataclass(frozen=True)
class IncrementDistribution:
    """Gaussian law of the forward increment over [t, t + dt]."""

    mean: np.ndarray
    covariance: np.ndarray
    t: float
    dt: float


def _substep_count(dt: float, norm: float) -> int:
    return max(MIN_SUBSTEPS, int(math.ceil(dt * norm * SUBSTEP_NORM_FACTOR)))


def _rk4(f, y0: np.ndarray, t0: float, dt: float, steps: int) -> np.ndarray:
    """Classical fourth-order one-step method with fixed substeps."""
    h = dt / steps
    y = y0
    t = t0
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y


def _van_loan(a: np.ndarray, noise: np.ndarray, dt: float):
    """One augmented exponential: returns (transition, increment covariance)."""
    n = a.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -a
    block[:n, n:] = noise
    block[n:, n:] = a.T
    exp = mat_exp(block, dt)
    f12 = exp[:n, n:]
    f22 = exp[n:, n:]
    phi = f22.T
    w = phi @ f12
    return phi, 0.5 * (w + w.T)


def _lti_transition_and_gramian(a: np.ndarray, noise: np.ndarray, dt: float):
    """Transition matrix and increment covariance of an LTI system.

    Built by the augmented-exponential method directly for moderate
    horizons, and by repeated interval doubling W(2t) = Phi W Phi^T + W
    otherwise.  For unstable drift at extreme horizons entries may
    overflow to inf, which callers treat as an unbounded-rate signal.
    """
    n = a.shape[0]
    if dt == 0.0:
        return np.eye(n), np.zeros((n, n))
    scale = float(np.linalg.norm(a, 1)) * dt
    if scale <= GRAMIAN_SPLIT_NORM:
        return _van_loan(a, noise, dt)
    doublings = min(96, int(math.ceil(math.log2(scale / GRAMIAN_SPLIT_NORM))))
    phi, w = _van_loan(a, noise, dt / (2**doublings))
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(doublings):
            w = phi @ w @ phi.T + w
            w = 0.5 * (w + w.T)
            phi = phi @ phi
    return phi, w


def state_transition(model: LinearSystemModel, t: float, dt: float) -> np.ndarray:
    """Transition matrix over [t, t + dt].

    Equals the matrix exponential for constant drift; for time-varying
    drift the variational equation is integrated with a fixed-substep
    fourth-order scheme so results are deterministic.
    """
    dt = float(dt)
    if dt < 0.0:
        raise ValueError("sampling interval must be nonnegative")
    n = model.dimension
    if dt == 0.0:
        return np.eye(n)
    if model.is_constant:
        return mat_exp(model.drift.matrix, dt)
    drift = model.drift
    steps = _substep_count(dt, float(np.linalg.norm(drift.evaluate(t), 1)))
    return _rk4(lambda tau, phi: drift.evaluate(tau) @ phi, np.eye(n), float(t), dt, steps)


def increment_distribution(
    model: LinearSystemModel, x_t, t: float, dt: float
) -> IncrementDistribution:
    """Gaussian law of X(t + dt) - X(t) given X(t) = x_t."""
    dt = float(dt)
    if dt <= 0.0:
        raise ValueError("sampling interval must be positive")
    x = as_vector(x_t, "state")
    if x.shape[0] != model.dimension:
        raise ValueError("state dimension does not match the model")
    if model.is_constant:
        phi, cov = _lti_transition_and_gramian(
            model.drift.matrix, model.noise_intensity, dt
        )
    else:
        phi = state_transition(model, t, dt)
        drift = model.drift
        noise = model.noise_intensity
        steps = _substep_count(dt, float(np.linalg.norm(drift.evaluate(t), 1)))

        def ode(tau, w):
            a = drift.evaluate(tau)
            return a @ w + w @ a.T + noise

        cov = _rk4(ode, np.zeros((model.dimension,) * 2), float(t), dt, steps)
        cov = 0.5 * (cov + cov.T)
    mean = (phi - np.eye(model.dimension)) @ x
    return IncrementDistribution(mean, cov, float(t), dt)


def gramian_derivative_residual(
    model: LinearSystemModel, dt_grid, step: float = 1e-3
) -> np.ndarray:
    """Residual of the covariance ODE dW/ddt = A W + W A^T + N on a grid.

    The derivative is approximated by a central difference with the given
    step; returns the max-norm residual per grid point.  Diagnostic surface:
    near the Lyapunov equilibrium the residual collapses to the equilibrium
    defect.
    """
    if not model.is_constant:
        raise ValueError("residual diagnostic requires constant drift")
    grid = as_vector(dt_grid, "dt grid")
    step = float(step)
    if step <= 0.0 or np.any(grid - step <= 0.0):
        raise ValueError("difference step must be positive and below min(dt_grid)")
    a = model.drift.matrix
    noise = model.noise_intensity
    out = np.empty(grid.shape[0])
    for i, dt in enumerate(grid):
        _, w0 = _lti_transition_and_gramian(a, noise, float(dt))
        _, wp = _lti_transition_and_gramian(a, noise, float(dt) + step)
        _, wm = _lti_transition_and_gramian(a, noise, float(dt) - step)
        diff = (wp - wm) / (2.0 * step)
        out[i] = max_abs(diff - (a @ w0 + w0 @ a.T + noise))
    return out


def _covariance_sqrt(cov: np.ndarray) -> np.ndarray:
    """Cholesky factor, or the eigenvalue square root when near-singular."""
    trace = float(np.trace(cov))
    try:
        chol = np.linalg.cholesky(cov)
        if float(np.min(np.diag(chol))) ** 2 >= SQRT_PIVOT_RTOL * max(trace, 0.0):
            return chol
    except np.linalg.LinAlgError:
        pass
    values, vectors = np.linalg.eigh(0.5 * (cov + cov.T))
    return vectors * np.sqrt(np.clip(values, 0.0, None))


def sample_paths(
    model: LinearSystemModel,
    x0,
    dt: float,
    steps: int,
    trials: int,
    seed: int,
) -> TrajectoryDataset:
    """Exact-discretization sample paths of a constant-drift model.

    x_{k+1} = Phi x_k + xi_k with xi_k ~ N(0, W(dt)) drawn through a
    counter-based generator keyed by (seed, trial, step), so the dataset is
    a pure function of the arguments regardless of evaluation order and
    trials are statistically independent.
    """
    if not model.is_constant:
        raise ValueError("sample paths require constant drift")
    dt = float(dt)
    if dt <= 0.0:
        raise ValueError("sampling interval must be positive")
    if steps < 1 or trials < 1:
        raise ValueError("need at least one step and one trial")
    x0 = as_vector(x0, "initial state")
    n = model.dimension
    if x0.shape[0] != n:
        raise ValueError("initial state dimension does not match the model")
    phi, cov = _lti_transition_and_gramian(model.drift.matrix, model.noise_intensity, dt)
    root = _covariance_sqrt(cov)
    states = np.empty((trials, steps + 1, n))
    for trial in range(trials):
        x = x0
        states[trial, 0] = x
        for k in range(steps):
            shock = root @ substream(seed, PATH_LANE, trial, k).standard_normal(n)
            x = phi @ x + shock
            states[trial, k + 1] = x
    return TrajectoryDataset(dt, states)
