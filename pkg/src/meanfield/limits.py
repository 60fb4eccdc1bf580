"""Limiting diffusions of the critical and central-limit regimes.

Four process kinds are covered:

* ``cw_cubic_1d``      dY = -(2/3) Y^3 dt + 2 dW, Y(0) = 0
                       (critical spin fluctuations without disorder);
* ``cw_random_slope``  Y(t) = 2 H t with H centered Gaussian of variance
                       int tanh^2(beta eta) d mu (disorder-dominated critical
                       spin fluctuations; exact, no discretization);
* ``kuramoto_cubic_2d`` dV_i = -c(w) V_i |V|^2 dt + sqrt((1+4w^2)/2) dW_i,
                       with c(w) = (1+4w^2)^2 (1-8w^2) / (4 (1-4w^2)^3 (1+w^2));
                       the drift points outward for w > 1/(2 sqrt 2) and the
                       process then explodes in finite time, so a stopping
                       rule is mandatory there;
* ``linear_ou_system`` matrix-drift Ornstein-Uhlenbeck process for the
                       central-limit systems, with exact moment propagation.

The cubic integrators use Euler-Maruyama with a tamed drift
(drift / (1 + dt |drift|)) in the ergodic regime to suppress rare-event
overflow without moving the invariant law at the tested tolerances; the
explosive regime is never tamed, only localized by the stopping radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .core import ConfigError, DisorderLaw, SeedSpec

_CHUNK_BUDGET = 4_000_000


def cubic_drift_coefficient(omega: float) -> float:
    """c(w) = (1+4w^2)^2 (1-8w^2) / (4 (1-4w^2)^3 (1+w^2)); positive
    (inward drift, ergodic diffusion) iff w < 1/(2 sqrt 2)."""
    w2 = omega * omega
    return (1.0 + 4.0 * w2) ** 2 * (1.0 - 8.0 * w2) / (
        4.0 * (1.0 - 4.0 * w2) ** 3 * (1.0 + w2)
    )


def cubic_noise_amplitude(omega: float) -> float:
    """sqrt((1 + 4 w^2)/2); equals 1/sqrt(2) in the frequency-free case."""
    return np.sqrt((1.0 + 4.0 * omega * omega) / 2.0)


class SdeKind(str, Enum):
    CW_CUBIC_1D = "cw_cubic_1d"
    CW_RANDOM_SLOPE = "cw_random_slope"
    KURAMOTO_CUBIC_2D = "kuramoto_cubic_2d"
    LINEAR_OU_SYSTEM = "linear_ou_system"


class StoppingKind(str, Enum):
    NONE = "none"
    RADIAL = "radial"


@dataclass(frozen=True)
class StoppingRule:
    """Radial localization: report paths up to the first grid time with
    (V1)^2 + (V2)^2 >= radius.  Detection happens at grid resolution, an
    O(dt)-biased version of the exact hitting time."""

    kind: StoppingKind = StoppingKind.NONE
    radius: float = np.inf  # threshold on the squared norm

    def __post_init__(self) -> None:
        if self.kind is StoppingKind.RADIAL and not self.radius > 0:
            raise ConfigError("radial stopping needs radius > 0")


@dataclass(frozen=True)
class LinearOuSystem:
    """dX = A X dt + diag(b) dW with Gaussian initial condition."""

    drift: np.ndarray
    noise_diag: np.ndarray
    init_cov: np.ndarray
    init_mean: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    def moments_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Exact mean and covariance at time t.

        Cov(t) = e^{At} Cov(0) e^{A^T t} + int_0^t e^{As} BB^T e^{A^T s} ds,
        with the integral evaluated by the block matrix exponential
        exp([[A, BB^T], [0, -A^T]] t)."""
        a = self.drift
        d = self.dim
        bbt = np.diag(self.noise_diag**2)
        block = np.zeros((2 * d, 2 * d))
        block[:d, :d] = a
        block[:d, d:] = bbt
        block[d:, d:] = -a.T
        eb = expm(block * t)
        phi = eb[:d, :d]  # e^{At}
        gram = eb[:d, d:] @ phi.T  # int_0^t e^{As} BB^T e^{A^T s} ds
        cov = phi @ self.init_cov @ phi.T + gram
        mean = phi @ (self.init_mean if self.init_mean is not None else np.zeros(d))
        return mean, 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class LimitSdeSpec:
    """Declaration of a limiting process, carrying its closed-form
    coefficients so drivers and reports read them from one place."""

    kind: SdeKind
    omega: float | None = None           # kuramoto_cubic_2d
    slope_variance: float | None = None  # cw_random_slope
    ou: LinearOuSystem | None = None     # linear_ou_system

    @staticmethod
    def cw_cubic() -> "LimitSdeSpec":
        return LimitSdeSpec(SdeKind.CW_CUBIC_1D)

    @staticmethod
    def cw_random_slope(law: DisorderLaw, beta: float) -> "LimitSdeSpec":
        from .cw_analysis import random_slope_variance

        return LimitSdeSpec(
            SdeKind.CW_RANDOM_SLOPE, slope_variance=random_slope_variance(law, beta)
        )

    @staticmethod
    def kuramoto_cubic(omega: float) -> "LimitSdeSpec":
        return LimitSdeSpec(SdeKind.KURAMOTO_CUBIC_2D, omega=omega)

    @staticmethod
    def linear_ou(system: LinearOuSystem) -> "LimitSdeSpec":
        return LimitSdeSpec(SdeKind.LINEAR_OU_SYSTEM, ou=system)

    def coefficient_table(self) -> dict[str, float]:
        """Closed-form coefficients of the declared process."""
        if self.kind is SdeKind.CW_CUBIC_1D:
            return {"cubic_drift": 2.0 / 3.0, "noise": 2.0}
        if self.kind is SdeKind.CW_RANDOM_SLOPE:
            return {"slope_variance": self.slope_variance, "slope_factor": 2.0}
        if self.kind is SdeKind.KURAMOTO_CUBIC_2D:
            return {
                "cubic_drift": cubic_drift_coefficient(self.omega),
                "noise": cubic_noise_amplitude(self.omega),
            }
        return {"dim": float(self.ou.dim)}


@dataclass
class LimitPaths:
    """Simulated sample paths on a uniform grid.

    ``values`` has shape (paths, times, dim); after a path stops it is frozen
    at its stopping value.  ``stop_times`` is NaN for paths that never hit the
    stopping radius."""

    times: np.ndarray
    values: np.ndarray
    stop_times: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def marginal(self, t_index: int = -1) -> np.ndarray:
        return self.values[:, t_index, :]

    def stopped_fraction(self, by_time: float) -> float:
        return self.stopped_count(by_time) / self.n_paths

    def stopped_count(self, by_time: float) -> int:
        with np.errstate(invalid="ignore"):
            return int((~np.isnan(self.stop_times) & (self.stop_times <= by_time)).sum())


def simulate_limit(
    spec: LimitSdeSpec,
    t_end: float,
    dt: float,
    n_paths: int,
    seed: SeedSpec,
    stopping: StoppingRule = StoppingRule(),
    n_snapshots: int = 11,
) -> LimitPaths:
    """Sample paths of a limiting process.

    The random-slope process is exact (one Gaussian per path and a linear
    ramp).  The cubic kinds use Euler-Maruyama; they require dt <= 1e-3
    because the cubic tails are stiff.  In the outward-drift regime of the
    planar cubic process a radial stopping rule is required.
    """
    if t_end <= 0 or dt <= 0:
        raise ConfigError("t_end and dt must be positive")
    rng = seed.generator("limit-noise")
    times = np.linspace(0.0, t_end, n_snapshots)

    if spec.kind is SdeKind.CW_RANDOM_SLOPE:
        h = rng.standard_normal(n_paths) * np.sqrt(spec.slope_variance)
        values = (2.0 * h)[:, None, None] * times[None, :, None]
        return LimitPaths(times, values, np.full(n_paths, np.nan))

    if spec.kind in (SdeKind.CW_CUBIC_1D, SdeKind.KURAMOTO_CUBIC_2D) and dt > 1e-3:
        raise ConfigError("cubic limit kinds need dt <= 1e-3")

    n_steps = int(round(t_end / dt))
    snap_steps = np.unique(np.round(times / dt).astype(np.int64))
    times = snap_steps * dt

    if spec.kind is SdeKind.CW_CUBIC_1D:
        y = np.zeros(n_paths)
        values = np.zeros((n_paths, snap_steps.size, 1))
        values[:, 0, 0] = y
        out_idx = 1 if snap_steps[0] == 0 else 0
        step = 0
        chunk = max(1, _CHUNK_BUDGET // max(n_paths, 1))
        for target in snap_steps[snap_steps > 0]:
            while step < target:
                k = min(chunk, int(target - step))
                noise = rng.standard_normal((k, n_paths))
                _kernels.cubic_sde_1d_chunk(y, dt, noise, True)
                step += k
            values[:, out_idx, 0] = y
            out_idx += 1
        return LimitPaths(times, values, np.full(n_paths, np.nan))

    if spec.kind is SdeKind.KURAMOTO_CUBIC_2D:
        c = cubic_drift_coefficient(spec.omega)
        sigma = cubic_noise_amplitude(spec.omega)
        if c < 0.0 and stopping.kind is StoppingKind.NONE:
            raise ConfigError(
                "explosive regime requires localization: supply a radial stopping rule"
            )
        tame = c > 0.0
        stop_r2 = stopping.radius if stopping.kind is StoppingKind.RADIAL else np.inf
        v1 = np.zeros(n_paths)
        v2 = np.zeros(n_paths)
        stopped_step = np.full(n_paths, -1, dtype=np.int64)
        values = np.zeros((n_paths, snap_steps.size, 2))
        out_idx = 1 if snap_steps[0] == 0 else 0
        step = 0
        chunk = max(1, _CHUNK_BUDGET // max(2 * n_paths, 1))
        for target in snap_steps[snap_steps > 0]:
            while step < target:
                k = min(chunk, int(target - step))
                noise = rng.standard_normal((2 * k, n_paths)) * sigma
                _kernels.cubic_sde_2d_chunk(
                    v1, v2, c, dt, noise[:k], noise[k:], tame, stop_r2,
                    stopped_step, step,
                )
                step += k
            values[:, out_idx, 0] = v1
            values[:, out_idx, 1] = v2
            out_idx += 1
        stop_times = np.where(stopped_step >= 0, stopped_step * dt, np.nan)
        return LimitPaths(times, values, stop_times)

    # linear_ou_system
    sys = spec.ou
    d = sys.dim
    chol = np.linalg.cholesky(
        sys.init_cov + 1e-14 * np.eye(d)
    )
    x = (chol @ rng.standard_normal((d, n_paths))).T
    if sys.init_mean is not None:
        x = x + sys.init_mean[None, :]
    values = np.zeros((n_paths, snap_steps.size, d))
    out_idx = 0
    if snap_steps[0] == 0:
        values[:, 0] = x
        out_idx = 1
    a_t = sys.drift.T
    b = sys.noise_diag
    sq = np.sqrt(dt)
    step = 0
    for target in snap_steps[snap_steps > 0]:
        while step < target:
            x = x + (x @ a_t) * dt + sq * rng.standard_normal((n_paths, d)) * b[None, :]
            step += 1
        values[:, out_idx] = x
        out_idx += 1
    return LimitPaths(times, values, np.full(n_paths, np.nan))


@dataclass(frozen=True)
class RadialMoments:
    mean: float
    variance: float
    se_mean: float
    n_paths: int


def radial_moments(
    spec: LimitSdeSpec,
    t: float,
    n_paths: int,
    dt: float,
    seed: SeedSpec,
    stopping: StoppingRule = StoppingRule(),
) -> RadialMoments:
    """Monte Carlo mean and variance of |V(t)|^2 for the planar cubic kind."""
    if spec.kind is not SdeKind.KURAMOTO_CUBIC_2D:
        raise ConfigError("radial moments are defined for the planar cubic kind")
    paths = simulate_limit(spec, t, dt, n_paths, seed, stopping, n_snapshots=2)
    v = paths.marginal(-1)
    r2 = (v**2).sum(axis=1)
    return RadialMoments(
        mean=float(r2.mean()),
        variance=float(r2.var(ddof=1)),
        se_mean=float(r2.std(ddof=1) / np.sqrt(n_paths)),
        n_paths=n_paths,
    )
