"""Continuous-time Glauber dynamics of the random-field spin model.

A site j carries a spin sigma_j in {-1,+1} and a frozen field eta_j drawn
from a finite symmetric law.  Spins flip one at a time at rate
exp(-beta * sigma_j * (m_N + eta_j)) where m_N is the current magnetization.
Rates depend on a site only through its (spin, field) cell, so the dynamics
is simulated exactly over the 2m aggregated cell channels: O(1) work per
event instead of N per-site clocks.

The simulator always runs in microscopic time; any critical time rescaling
is applied at observation by `cw_order_parameters`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._kernels import DONE, EVENT_BUFFER_FULL, NEED_UNIFORMS
from .core import (
    ConfigError,
    CwParams,
    FluctuationSeries,
    SeedSpec,
    SpaceScale,
    StructureError,
    TimeScale,
)

_UNIFORM_CHUNK = 1 << 20


@dataclass
class AggregatedCwState:
    """Sufficient statistic of the spin configuration: one integer count per
    (spin, field-atom) cell, plus the cached magnetization.

    ``counts[0, k]`` is the number of up spins with field value k,
    ``counts[1, k]`` the number of down spins.  Per-atom totals
    counts[0,k]+counts[1,k] are conserved by the dynamics (fields are

    frozen)."""

    counts: np.ndarray  # int64[2, m]
    field_values: np.ndarray  # float64[m]
    n_particles: int
    time: float = 0.0

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.field_values = np.asarray(self.field_values, dtype=float)
        if self.counts.shape != (2, self.field_values.size):
            raise StructureError(f"counts shape {self.counts.shape} does not match atoms")
        if (self.counts < 0).any():
            raise StructureError("negative cell count")
        if self.counts.sum() != self.n_particles:
            raise StructureError(
                f"counts sum to {self.counts.sum()}, expected N={self.n_particles}"
            )

    @property
    def magnetization(self) -> float:
        return float(self.counts[0].sum() - self.counts[1].sum()) / self.n_particles

    def empirical_measure(self):
        """Cell-keyed empirical measure of the configuration."""
        from .core import EmpiricalMeasure

        cells = {}
        for k, v in enumerate(self.field_values):
            cells[(1.0, float(v))] = int(self.counts[0, k])
            cells[(-1.0, float(v))] = int(self.counts[1, k])
        return EmpiricalMeasure(cells, self.n_particles)

    def copy(self) -> "AggregatedCwState":
        return AggregatedCwState(
            self.counts.copy(), self.field_values.copy(), self.n_particles, self.time
        )


@dataclass
class CwTrajectory:
    """Observation-grid snapshots (pre-jump states, the cadlag values) of an
    aggregated simulation, plus optional per-event records."""

    params: CwParams
    grid: np.ndarray              # microscopic observation times
    snap_counts: np.ndarray       # int64[G, 2, m]
    snap_m: np.ndarray            # float64[G]
    field_values: np.ndarray      # float64[m]
    n_events: int
    event_times: np.ndarray | None = None
    event_cells: np.ndarray | None = None  # channel = row*m + k
    initial_counts: np.ndarray | None = None

    def state_at(self, index: int) -> AggregatedCwState:
        return AggregatedCwState(
            self.snap_counts[index].copy(),
            self.field_values.copy(),
            self.params.n_particles,
            float(self.grid[index]),
        )


def initial_cw_state(
    params: CwParams,
    q0_up,
    seed: SeedSpec,
    fields: np.ndarray | None = None,
) -> AggregatedCwState:
    """Product initial condition: fields i.i.d. from the law (unless given
    explicitly), then spins independent with P(sigma=+1 | eta) = q0_up(eta).

    ``q0_up`` may be a scalar, a mapping atom value -> probability, or a
    callable."""
    law = params.law
    if callable(q0_up):
        probs = {v: float(q0_up(v)) for v in law.values}
    elif isinstance(q0_up, dict):
        probs = {float(v): float(p) for v, p in q0_up.items()}
        missing = [v for v in law.values if v not in probs]
        if missing:
            raise ConfigError(f"q0 missing atoms {missing}")
    else:
        probs = {v: float(q0_up) for v in law.values}
    for v, p in probs.items():
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"q0(+1 | eta={v}) = {p} outside [0, 1]")

    if fields is None:
        from .core import sample_disorder

        fields = sample_disorder(law, params.n_particles, seed)
    else:
        fields = np.asarray(fields, dtype=float)
        if fields.size != params.n_particles:
            raise ConfigError("explicit fields must have length N")

    rng = seed.generator("init-spins")
    u = rng.random(params.n_particles)
    values = law.values
    counts = np.zeros((2, values.size), dtype=np.int64)
    for k, v in enumerate(values):
        mask = fields == v
        n_k = int(mask.sum())
        up = int((u[mask] < probs[v]).sum())
        counts[0, k] = up
        counts[1, k] = n_k - up
    return AggregatedCwState(counts, values.copy(), params.n_particles)


def cell_rates(state: AggregatedCwState, params: CwParams) -> np.ndarray:
    """Total flip intensity of each (spin, field) cell:
    rate[j, k] = count[j, k] * exp(-beta * j * (m_N + eta_k))."""
    m = state.magnetization
    arg = params.beta * (m + state.field_values)
    rates = np.empty_like(state.counts, dtype=float)
    rates[0] = state.counts[0] * np.exp(-arg)
    rates[1] = state.counts[1] * np.exp(arg)
    return rates


def simulate_cw(
    state: AggregatedCwState,
    params: CwParams,
    t_end: float,
    grid: np.ndarray,
    seed: SeedSpec,
    record_events: bool = False,
) -> CwTrajectory:
    """Exact stochastic simulation over the aggregated channels.

    Waiting times are exponential with the total rate, the flipping channel
    is chosen proportionally, and exactly one spin moves between the two rows
    of its field column per event.  Snapshots at grid times are the pre-jump
    states.  All randomness comes from the 'cw-events' stream of ``seed``.
    """
    if t_end <= 0.0:
        raise ConfigError(f"t_end must be positive, got {t_end}")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or (np.diff(grid) < 0).any():
        raise ConfigError("observation grid must be non-empty and sorted")
    if grid[-1] > t_end + 1e-12:
        raise ConfigError("observation grid extends past t_end")

    work = state.copy()
    m_cells = work.field_values.size
    snap_counts = np.zeros((grid.size, 2, m_cells), dtype=np.int64)
    snap_m = np.zeros(grid.size)
    fstate = np.array([work.magnetization, work.time])
    istate = np.zeros(4, dtype=np.int64)
    rates = np.zeros((2, m_cells))

    if record_events:
        cap = 1 << 16
        event_times = np.zeros(cap)
        event_cells = np.zeros(cap, dtype=np.int32)
    else:
        event_times = np.zeros(0)
        event_cells = np.zeros(0, dtype=np.int32)

    rng = seed.generator("cw-events")
    uniforms = rng.random(_UNIFORM_CHUNK)
    initial_counts = work.counts.copy()
    while True:
        code = _kernels.cw_aggregated_kernel(
            work.counts,
            work.field_values,
            params.beta,
            1.0 / params.n_particles,
            t_end,
            grid,
            snap_counts,
            snap_m,
            uniforms,
            fstate,
            istate,
            event_times,
            event_cells,
            record_events,
            rates,
        )
        if code == DONE:
            break
        if code == NEED_UNIFORMS:
            uniforms = rng.random(_UNIFORM_CHUNK)
            istate[_kernels.I_UPOS] = 0
        elif code == EVENT_BUFFER_FULL:
            grown_t = np.zeros(event_times.size * 2)
            grown_c = np.zeros(event_cells.size * 2, dtype=np.int32)
            grown_t[: event_times.size] = event_times
            grown_c[: event_cells.size] = event_cells
            event_times, event_cells = grown_t, grown_c
        else:
            raise RuntimeError("total flip rate vanished (internal error)")

    work.time = fstate[_kernels.F_T]
    n_events = int(istate[_kernels.I_EVCOUNT])
    n_rec = int(istate[_kernels.I_EVPTR])
    return CwTrajectory(
        params=params,
        grid=grid,
        snap_counts=snap_counts,
        snap_m=snap_m,
        field_values=work.field_values,
        n_events=n_events,
        event_times=event_times[:n_rec] if record_events else None,
        event_cells=event_cells[:n_rec] if record_events else None,
        initial_counts=initial_counts,
    )


def spin_field_averages(
    counts: np.ndarray, basis: np.ndarray, n_particles: int
) -> np.ndarray:
    """Raw empirical averages (1/N) sum_j sigma_j phi_i(eta_j) for each basis
    row, from aggregated counts."""
    signed = (counts[..., 0, :] - counts[..., 1, :]) / n_particles
    return signed @ basis.T


def cw_order_parameters(
    traj: CwTrajectory,
    basis: np.ndarray,
    reference_table: np.ndarray,
    space_scale: SpaceScale = SpaceScale.MODERATE,
    time_scale: TimeScale = TimeScale.UNIT,
    labels: tuple[str, ...] = (),
) -> FluctuationSeries:
    """Rescaled spin-weighted empirical averages along the trajectory.

    For each basis function phi_i (values over the field atoms) and snapshot,
        Y_i = pref * [ (1/N) sum_j sigma_j phi_i(eta_j)
                       - sum_k phi_i(k) (q(+1,k) - q(-1,k)) mu(k) ],
    with pref = sqrt(N) at the central-limit scale and N**(1/4) at the
    moderate scale.  The time column is observed time: grid time divided by
    the time-scale factor.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    m = traj.field_values.size
    if basis.shape[1] != m:
        raise StructureError(
            f"basis has {basis.shape[1]} columns for {m} field atoms"
        )
    reference_table = np.asarray(reference_table, dtype=float)
    if reference_table.shape != (2, m):
        raise StructureError(f"reference table must be (2, {m})")
    weights = traj.params.law.weights
    n = traj.params.n_particles

    ref = basis @ ((reference_table[0] - reference_table[1]) * weights)
    raw = spin_field_averages(traj.snap_counts, basis, n)
    pref = np.sqrt(n) if space_scale is SpaceScale.SQRT_N else float(n) ** 0.25
    values = pref * (raw - ref[None, :])
    times = traj.grid / time_scale.factor(n)
    if not labels:
        labels = tuple(f"Y{i}" for i in range(basis.shape[0]))
    return FluctuationSeries(times, values, space_scale, time_scale, labels)
