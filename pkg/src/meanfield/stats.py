"""Statistical harness: exact small-system oracles, ensemble plumbing, and
the test battery connecting finite-N simulations to their limit objects.

The enumeration oracle cross-checks the event-driven simulator against the
closed-form reversible law; the collapse, slope and distributional tests
implement the finite-N verdicts for the critical-fluctuation theory.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from . import _kernels
from ._kernels import DONE, NEED_UNIFORMS
from .core import ConfigError, SeedSpec

_UNIFORM_CHUNK = 1 << 20


def default_threads() -> int:
    env = os.environ.get("MEANFIELD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_replicas(task, n_replicas: int, seed: SeedSpec, threads: int | None = None) -> list:
    """Run ``task(replica_seed)`` for replica indices 0..n-1.

    Fan-out is parallel over worker threads (the kernels release the GIL);
    results are returned in replica order, so aggregation is deterministic
    regardless of scheduling.
    """
    threads = threads or default_threads()
    seeds = [seed.replica(i) for i in range(n_replicas)]
    if threads <= 1 or n_replicas == 1:
        return [task(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, seeds))


# ---------------------------------------------------------------------------
# exact enumeration oracle for the spin model
# ---------------------------------------------------------------------------


@dataclass
class ExactOracleResult:
    """Closed-form equilibrium of an N-spin system at fixed fields.

    ``probabilities[c]`` is the reversible law over the 2^N configurations
    (bit j of c set means spin j up); residuals certify stationarity and
    detailed balance of the jump rates against that law."""

    spins: np.ndarray            # int8[2^N, N]
    energies: np.ndarray
    probabilities: np.ndarray
    generator_residual: float
    detailed_balance_residual: float

    @property
    def n_sites(self) -> int:
        return self.spins.shape[1]


def exact_gibbs_oracle(beta: float, fields: np.ndarray) -> ExactOracleResult:
    """Enumerate all configurations of a small system (N <= 12).

    The energy is -beta/(2N) (sum sigma)^2 - beta sum eta_j sigma_j, the
    stationary law is proportional to exp(-energy), and the flip rates
    exp(-beta sigma_j (m + eta_j)) satisfy detailed balance with respect to
    it exactly; both residuals are reported.
    """
    fields = np.asarray(fields, dtype=float)
    n = fields.size
    if n > 12:
        raise ConfigError(f"enumeration oracle refuses N={n} > 12")
    n_conf = 1 << n
    conf = np.arange(n_conf, dtype=np.int64)
    spins = np.where((conf[:, None] >> np.arange(n)[None, :]) & 1 == 1, 1, -1).astype(
        np.int8
    )
    total = spins.sum(axis=1).astype(float)
    energies = -beta / (2.0 * n) * total**2 - beta * (spins @ fields)
    logw = -energies
    logw -= logw.max()
    probabilities = np.exp(logw)
    probabilities /= probabilities.sum()

    m = total / n
    flow_in = np.zeros(n_conf)
    flow_out = np.zeros(n_conf)
    db = 0.0
    for j in range(n):
        rate_j = np.exp(-beta * spins[:, j] * (m + fields[j]))
        flipped = conf ^ (1 << j)
        flow_out += probabilities * rate_j
        np.add.at(flow_in, flipped, probabilities * rate_j)
        db = max(
            db,
            float(
                np.abs(
                    probabilities * rate_j - probabilities[flipped] * rate_j[flipped]
                ).max()
            ),
        )
    residual = float(np.abs(flow_in - flow_out).max())
    return ExactOracleResult(spins, energies, probabilities, residual, db)


@dataclass
class SiteSimulationResult:
    occupation: np.ndarray | None   # time fraction per configuration
    snap_m: np.ndarray
    grid: np.ndarray
    n_events: int
    final_spins: np.ndarray


def simulate_cw_sites(
    fields: np.ndarray,
    beta: float,
    t_end: float,
    seed: SeedSpec,
    spins0: np.ndarray | None = None,
    p_up: float = 0.5,
    grid: np.ndarray | None = None,
    track_occupation: bool = False,
) -> SiteSimulationResult:
    """Per-site event-driven simulation (oracle for small N).

    Keeps one exponential clock per site instead of aggregating cells; used
    to certify that the aggregated simulator induces the same law and to
    accumulate configuration occupation times against the enumeration oracle.
    """
    fields = np.asarray(fields, dtype=float)
    n = fields.size
    if track_occupation and n > 20:
        raise ConfigError("occupation tracking is limited to N <= 20")
    if spins0 is None:
        rng = seed.generator("init-spins")
        spins0 = np.where(rng.random(n) < p_up, 1, -1).astype(np.int8)
    spins = np.asarray(spins0, dtype=np.int8).copy()
    grid = np.asarray(grid if grid is not None else [t_end], dtype=float)
    occupation = np.zeros(1 << n) if track_occupation else np.zeros(0)
    snap_m = np.zeros(grid.size)
    fstate = np.array([spins.sum() / n, 0.0])
    istate = np.zeros(4, dtype=np.int64)
    rates = np.zeros(n)
    rng = seed.generator("cw-events")
    uniforms = rng.random(_UNIFORM_CHUNK)
    while True:
        code = _kernels.cw_site_kernel(
            spins,
            fields,
            beta,
            t_end,
            uniforms,
            fstate,
            istate,
            occupation,
            track_occupation,
            grid,
            snap_m,
            rates,
        )
        if code == DONE:
            break
        if code == NEED_UNIFORMS:
            uniforms = rng.random(_UNIFORM_CHUNK)
            istate[_kernels.I_UPOS] = 0
    occ = occupation / t_end if track_occupation else None
    return SiteSimulationResult(occ, snap_m, grid, int(istate[_kernels.I_EVCOUNT]), spins)


def occupation_from_aggregated(traj, site_fields: np.ndarray, site_spins0: np.ndarray,
                               t_end: float, seed: SeedSpec) -> np.ndarray:
    """Configuration occupation fractions reconstructed from an aggregated
    trajectory with recorded events.

    Within a cell every site flips at the same rate, so attributing each
    recorded cell event to a uniformly chosen site of that cell reproduces
    the site-resolved law exactly (exchangeability).
    """
    if traj.event_times is None:
        raise ConfigError("need a trajectory recorded with record_events=True")
    site_fields = np.asarray(site_fields, dtype=float)
    n = site_fields.size
    values = traj.field_values
    m_cells = values.size
    cell_sites: list[list[int]] = [[] for _ in range(2 * m_cells)]
    spins = np.asarray(site_spins0, dtype=np.int64).copy()
    for j in range(n):
        k = int(np.nonzero(values == site_fields[j])[0][0])
        row = 0 if spins[j] > 0 else 1
        cell_sites[row * m_cells + k].append(j)

    config = 0
    for j in range(n):
        if spins[j] > 0:
            config |= 1 << j
    occ = np.zeros(1 << n)
    rng = seed.generator("site-assignment")
    u = rng.random(traj.event_times.size)
    t_prev = 0.0
    for i in range(traj.event_times.size):
        t_i = traj.event_times[i]
        occ[config] += t_i - t_prev
        channel = int(traj.event_cells[i])
        row, k = divmod(channel, m_cells)
        sites = cell_sites[row * m_cells + k]
        pick = int(u[i] * len(sites))
        site = sites[pick]
        sites[pick] = sites[-1]
        sites.pop()
        cell_sites[(1 - row) * m_cells + k].append(site)
        config ^= 1 << site
        t_prev = t_i
    occ[config] += t_end - t_prev
    return occ / t_end


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# ---------------------------------------------------------------------------
# two-sample tests and convergence verdicts
# ---------------------------------------------------------------------------


def ks_two_sample(sample_a: np.ndarray, sample_b: np.ndarray) -> tuple[float, float]:
    """Two-sided Kolmogorov-Smirnov statistic with asymptotic p-value."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 20 or b.size < 20:
        raise ConfigError("both samples must have at least 20 points")
    res = sps.ks_2samp(a, b, method="asymp")
    return float(res.statistic), float(res.pvalue)


@dataclass(frozen=True)
class CollapseTestSpec:
    """Declaration of a collapse check: which observable, which system sizes,
    and the theoretical exponent the fitted slope is reported against."""

    observable: str
    n_ladder: tuple[int, ...]
    predicted_exponent: float
    confidence: float = 0.95

    def __post_init__(self) -> None:
        if len(self.n_ladder) < 3:
            raise ConfigError("collapse test needs at least 3 ladder values")
        ns = np.asarray(self.n_ladder, dtype=float)
        if (np.diff(ns) <= 0).any():
            raise ConfigError("N-ladder must be strictly increasing")
        ratios = ns[1:] / ns[:-1]
        if np.abs(ratios / ratios[0] - 1.0).max() > 0.01:
            raise ConfigError(f"N-ladder must be geometric, got ratios {ratios}")


@dataclass
class CollapseVerdict:
    collapse: bool
    medians: dict[int, float]
    fitted_exponent: float | None
    exponent_ci: tuple[float, float] | None
    predicted_exponent: float
    degenerate: bool = False


def collapse_test(
    spec: CollapseTestSpec,
    sup_by_n: dict[int, np.ndarray],
    seed: SeedSpec | None = None,
    n_boot: int = 500,
) -> CollapseVerdict:
    """Verdict on whether an observable's running maximum dies out along the
    ladder.

    Per system size the ensemble median of sup_t |observable| is computed;
    the verdict is ``collapse`` iff the medians strictly decrease and the
    log-log weighted least-squares slope is negative with its confidence
    interval excluding zero (median standard errors by bootstrap).  The
    fitted slope is reported against the predicted exponent, but agreement
    is informational: the theory gives one-sided bounds, not convergence
    rates.
    """
    for n in spec.n_ladder:
        if n not in sup_by_n:
            raise ConfigError(f"missing data for N={n}")
        if np.asarray(sup_by_n[n]).size < 100:
            raise ConfigError(f"need at least 100 replicas per N, got {np.asarray(sup_by_n[n]).size} at N={n}")

    medians = {n: float(np.median(sup_by_n[n])) for n in spec.n_ladder}
    med_vals = np.array([medians[n] for n in spec.n_ladder])
    if (med_vals == 0.0).all():
        return CollapseVerdict(True, medians, None, None, spec.predicted_exponent, True)

    decreasing = bool((np.diff(med_vals) < 0.0).all())

    rng = (seed or SeedSpec(0)).generator("collapse-bootstrap")
    log_meds = np.log(med_vals)
    ses = np.empty(len(spec.n_ladder))
    for i, n in enumerate(spec.n_ladder):
        data = np.asarray(sup_by_n[n], dtype=float)
        idx = rng.integers(0, data.size, size=(n_boot, data.size))
        boot_meds = np.median(data[idx], axis=1)
        boot_meds = np.maximum(boot_meds, 1e-300)
        ses[i] = max(float(np.log(boot_meds).std(ddof=1)), 1e-12)

    x = np.log(np.asarray(spec.n_ladder, dtype=float))
    w = 1.0 / ses**2
    xbar = (w * x).sum() / w.sum()
    ybar = (w * log_meds).sum() / w.sum()
    sxx = (w * (x - xbar) ** 2).sum()
    slope = float((w * (x - xbar) * (log_meds - ybar)).sum() / sxx)
    se_slope = float(np.sqrt(1.0 / sxx))
    z = sps.norm.ppf(0.5 + spec.confidence / 2.0)
    ci = (slope - z * se_slope, slope + z * se_slope)
    collapse = decreasing and ci[1] < 0.0
    return CollapseVerdict(collapse, medians, slope, ci, spec.predicted_exponent)


@dataclass
class SlopeRegressionResult:
    """Per-replica drift slopes of a linearly growing critical mode.

    ``variance_raw`` is the plain ensemble variance of the least-squares
    slopes; it contains an O(N^{-1/4}) contribution from the martingale part
    of the paths on top of the drift-slope variance.  That part is removed in
    ``variance_corrected`` using the realized quadratic variation of each
    path and the exact noise-to-slope transfer factor of the least-squares
    estimator (w^T min(t_i, t_j) w for slope weights w).
    """

    slopes: np.ndarray
    mean_slope: float
    se_mean_slope: float
    variance_raw: float
    variance_corrected: float
    se_variance: float
    noise_rate_estimate: float
    noise_transfer: float


def slope_regression(times: np.ndarray, paths: np.ndarray) -> SlopeRegressionResult:
    """Least-squares slope per replica over the observation window, with the
    ensemble slope variance and its diffusion-corrected value."""
    times = np.asarray(times, dtype=float)
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    if paths.shape[1] != times.size:
        raise ConfigError("paths must have one column per observation time")
    r = paths.shape[0]
    if r < 100:
        warnings.warn(
            f"only {r} replicas: slope-variance interval is wide", stacklevel=2
        )
    xc = times - times.mean()
    sxx = float((xc**2).sum())
    weights = xc / sxx
    slopes = paths @ weights

    # noise-to-slope transfer: Var(sum_i w_i M(t_i)) = v * w^T K w for a
    # martingale of quadratic variation v t, K_ij = min(t_i, t_j)
    kmat = np.minimum(times[:, None], times[None, :])
    transfer = float(weights @ kmat @ weights)
    qv = np.sum(np.diff(paths, axis=1) ** 2, axis=1)
    span = times[-1] - times[0]
    noise_rate = float(qv.mean() / span) if span > 0 else 0.0

    var_raw = float(slopes.var(ddof=1))
    var_corr = var_raw - noise_rate * transfer
    se_var = var_raw * np.sqrt(2.0 / max(r - 1, 1))
    return SlopeRegressionResult(
        slopes=slopes,
        mean_slope=float(slopes.mean()),
        se_mean_slope=float(slopes.std(ddof=1) / np.sqrt(r)),
        variance_raw=var_raw,
        variance_corrected=var_corr,
        se_variance=float(se_var),
        noise_rate_estimate=noise_rate,
        noise_transfer=transfer,
    )


@dataclass
class ConvergenceReport:
    ks_by_n: dict[int, tuple[float, float]]
    non_increasing: bool
    final_p: float
    passed: bool


def distributional_convergence_test(
    samples_by_n: dict[int, np.ndarray],
    limit_samples: np.ndarray,
    alpha: float = 0.01,
) -> ConvergenceReport:
    """Marginal-law convergence along a ladder of system sizes.

    Kolmogorov-Smirnov distance of each finite-N ensemble against a large
    limit-process sample; passes iff the statistic never increases along the
    ladder and the final p-value clears alpha.
    """
    ns = sorted(samples_by_n)
    limit_samples = np.asarray(limit_samples, dtype=float)
    max_n_samples = max(np.asarray(samples_by_n[n]).size for n in ns)
    if limit_samples.size < 10 * max_n_samples:
        raise ConfigError("limit ensemble must be at least 10x the finite-N ensembles")
    ks_by_n = {}
    for n in ns:
        ks_by_n[n] = ks_two_sample(samples_by_n[n], limit_samples)
    stats_seq = [ks_by_n[n][0] for n in ns]
    non_increasing = all(
        stats_seq[i + 1] <= stats_seq[i] + 1e-12 for i in range(len(ns) - 1)
    )
    final_p = ks_by_n[ns[-1]][1]
    return ConvergenceReport(ks_by_n, non_increasing, final_p, non_increasing and final_p > alpha)
