"""Deterministic theory of the spin model.

Covers the nonlinear evolution of the macroscopic profile q_t(sigma, eta),
its stationary solutions and their linear stability, the critical inverse
temperature, the linearized operator around a stationary state with its
weighted-space eigendecomposition, and the parameters of the Gaussian
fluctuation process.

The linearized operator acting on functions phi of the field value is

    (L phi)(eta) = cosh(beta (m* + eta)) phi(eta)
                   - beta * sum_k phi(eta_k) mu(eta_k) / cosh(beta (m* + eta_k)),

self-adjoint in L^2(nu) with nu(eta) = mu(eta) / cosh(beta (m* + eta)).
At the critical point (m* = 0, beta * int mu / cosh^2(beta eta) = 1) its
kernel is spanned by 1 / cosh(beta eta) and all other eigenvalues are >= 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import ConfigError, CwParams, DisorderLaw, StepSizeError, StructureError


class Stability(str, Enum):
    STABLE = "stable"
    NEUTRAL = "neutral"
    UNSTABLE = "unstable"


@dataclass
class CwProfile:
    """Macroscopic state: table[s, k] = q(sigma_s, eta_k) with row 0 for
    spin +1 and row 1 for spin -1; per-atom normalization q(1,.)+q(-1,.) = 1."""

    table: np.ndarray
    law: DisorderLaw

    def __post_init__(self) -> None:
        self.table = np.asarray(self.table, dtype=float)
        if self.table.shape != (2, self.law.n_atoms):
            raise StructureError(f"profile table must be (2, {self.law.n_atoms})")
        if (self.table < -1e-10).any():
            raise StructureError("profile has negative entries")
        norm = self.table.sum(axis=0)
        if np.abs(norm - 1.0).max() > 1e-10:
            raise StructureError("per-atom normalization violated beyond 1e-10")

    @property
    def magnetization(self) -> float:
        return float(((self.table[0] - self.table[1]) * self.law.weights).sum())

    def cell_reference(self) -> dict[tuple[float, float], float]:
        """Probability over (spin, field) cells: q(sigma, eta) mu(eta)."""
        ref = {}
        for k, v in enumerate(self.law.values):
            ref[(1.0, v)] = self.table[0, k] * self.law.weights[k]
            ref[(-1.0, v)] = self.table[1, k] * self.law.weights[k]
        return ref


def tilted_profile(beta: float, law: DisorderLaw, m_star: float) -> CwProfile:
    """Product-form profile q(sigma,eta) = e^{beta sigma (m+eta)} / 2cosh(...)."""
    arg = beta * (m_star + law.values)
    up = np.exp(arg) / (2.0 * np.cosh(arg))
    return CwProfile(np.vstack([up, 1.0 - up]), law)


@dataclass
class CwStationaryState:
    m_star: float
    profile: CwProfile
    stability: Stability
    criticality_gap: float  # beta * int mu/cosh^2(beta(m*+eta)) - 1


def _self_consistency(beta: float, law: DisorderLaw, m: float | np.ndarray):
    vals, w = law.values, law.weights
    m_arr = np.atleast_1d(np.asarray(m, dtype=float))
    t = np.tanh(beta * (m_arr[:, None] + vals[None, :])) @ w
    out = t - m_arr
    return out if np.ndim(m) else float(out[0])


def _stability_gap(beta: float, law: DisorderLaw, m: float) -> float:
    return float(beta * (law.weights / np.cosh(beta * (m + law.values)) ** 2).sum() - 1.0)


def cw_stationary_states(
    params: CwParams, grid_points: int = 10_001, neutral_tol: float = 1e-9
) -> list[CwStationaryState]:
    """All stationary magnetizations on [-1, 1].

    Roots of F(m) = int tanh(beta(m+eta)) mu(d eta) - m are bracketed on a
    uniform scan grid and refined by bisection to |F| < 1e-12.  m = 0 is a
    root for every even law and is always returned.  The stability flag comes
    from the sign of beta * int mu/cosh^2(beta(m*+eta)) - 1; for m* != 0 this
    reuses the same linearization formula.
    """
    beta, law = params.beta, params.law
    grid = np.linspace(-1.0, 1.0, grid_points)
    fvals = _self_consistency(beta, law, grid)

    roots: list[float] = [0.0]
    for i in range(grid_points - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = fvals[i], fvals[i + 1]
        if fa == 0.0 and a != 0.0:
            roots.append(float(a))
            continue
        if fa * fb < 0.0:
            lo, hi, flo = a, b, fa
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = _self_consistency(beta, law, mid)
                if abs(fm) < 1e-13 or hi - lo < 1e-16:
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))

    # dedupe (the scan rediscovers m=0)
    uniq: list[float] = []
    for r in sorted(roots):
        if not any(abs(r - u) < 1e-9 for u in uniq):
            uniq.append(r)
    spacing = grid[1] - grid[0]
    if any(
        abs(uniq[i + 1] - uniq[i]) < 4 * spacing for i in range(len(uniq) - 1)
    ):
        warnings.warn(
            f"scan grid may be too coarse to separate the {len(uniq)} roots found",
            stacklevel=2,
        )

    states = []
    for m in uniq:
        gap = _stability_gap(beta, law, m)
        if gap < -neutral_tol:
            flag = Stability.STABLE
        elif gap > neutral_tol:
            flag = Stability.UNSTABLE
        else:
            flag = Stability.NEUTRAL
        states.append(
            CwStationaryState(m, tilted_profile(beta, law, m), flag, gap)
        )
    return states


def critical_beta(law: DisorderLaw, beta_max: float = 64.0) -> float | None:
    """Smallest beta > 0 with beta * int mu(d eta)/cosh^2(beta eta) = 1.

    Bracket on a uniform scan, then bisect until |g(beta) - 1| < 1e-12.
    Returns None when sup_beta g < 1 (the law never turns critical).
    """

    def g(beta):
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        val = beta * ((law.weights[None, :] / np.cosh(beta[:, None] * law.values[None, :]) ** 2).sum(axis=1))
        return val

    grid = np.linspace(1e-9, beta_max, 200_001)
    vals = g(grid) - 1.0
    sign_change = np.nonzero((vals[:-1] < 0.0) & (vals[1:] >= 0.0))[0]
    if sign_change.size == 0:
        return None
    i = sign_change[0]
    lo, hi = grid[i], grid[i + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = float(g(mid)[0]) - 1.0
        if abs(fm) < 1e-13:
            return float(mid)
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def _mv_rhs(table: np.ndarray, beta: float, weights: np.ndarray, values: np.ndarray):
    """Right-hand side of the macroscopic evolution: for each atom,
    d/dt q(+1) = e^{+beta(m+eta)} q(-1) - e^{-beta(m+eta)} q(+1) and the
    opposite for q(-1), with m the current mean spin."""
    m = float(((table[0] - table[1]) * weights).sum())
    arg = beta * (m + values)
    flow = np.exp(arg) * table[1] - np.exp(-arg) * table[0]
    return np.vstack([flow, -flow])


def mckean_vlasov_cw(
    q0: CwProfile,
    params: CwParams,
    t_end: float,
    dt: float = 1e-3,
    store_every: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the 2m-dimensional macroscopic evolution with classical
    fourth-order Runge-Kutta.

    Returns (times, tables) with tables[i] the profile table at times[i].
    Raises StepSizeError when the per-atom normalization drifts beyond 1e-6
    or the profile leaves [0, 1] (the scheme preserves the normalization
    exactly in exact arithmetic, so drift indicates an unstable step size).
    """
    if dt <= 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")
    beta = params.beta
    w, v = params.law.weights, params.law.values
    n_steps = int(round(t_end / dt))
    q = q0.table.copy()
    times = [0.0]
    tables = [q.copy()]
    for step in range(1, n_steps + 1):
        k1 = _mv_rhs(q, beta, w, v)
        k2 = _mv_rhs(q + 0.5 * dt * k1, beta, w, v)
        k3 = _mv_rhs(q + 0.5 * dt * k2, beta, w, v)
        k4 = _mv_rhs(q + dt * k3, beta, w, v)
        q = q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = np.abs(q.sum(axis=0) - 1.0).max()
        if drift > 1e-6 or (q < -1e-6).any() or (q > 1.0 + 1e-6).any():
            raise StepSizeError(
                f"normalization drift {drift:.2e} at t={step * dt:.3g}; reduce dt"
            )
        if step % store_every == 0 or step == n_steps:
            times.append(step * dt)
            tables.append(q.copy())
    return np.array(times), np.array(tables)


@dataclass
class SpectralDecompositionCw:
    """Eigendecomposition of the linearized operator in L^2(nu).

    ``basis[i]`` holds the values of the i-th eigenfunction on the field
    atoms, nu-orthonormalized, with eigenvalues sorted ascending.  ``matrix``
    is the operator in the nodal basis (not symmetrized).
    """

    law: DisorderLaw
    beta: float
    m_star: float
    nu_weights: np.ndarray
    matrix: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray  # [i, k] = phi_i(eta_k)

    def apply(self, phi: np.ndarray) -> np.ndarray:
        return self.matrix @ phi

    def nu_inner(self, phi: np.ndarray, psi: np.ndarray) -> float:
        return float((phi * psi * self.nu_weights).sum())

    def kernel_mode_unnormalized(self) -> np.ndarray:
        """The critical direction with the 1/cosh(beta eta) normalization
        (the convention under which the random-slope variance is
        int tanh^2(beta eta) d mu)."""
        return 1.0 / np.cosh(self.beta * (self.m_star + self.law.values))


def linearized_cw(params: CwParams, m_star: float) -> SpectralDecompositionCw:
    """Assemble the linearized operator at a stationary magnetization and
    diagonalize it in the nu inner product.

    The operator is similar to a symmetric matrix via D^{1/2} A D^{-1/2}
    with D = diag(nu), so the spectrum is real and the eigenbasis can be
    nu-orthonormalized exactly.
    """
    law, beta = params.law, params.beta
    ch = np.cosh(beta * (m_star + law.values))
    nu = law.weights / ch
    a_matrix = np.diag(ch) - beta * np.ones((law.n_atoms, 1)) * nu[None, :]
    sq = np.sqrt(nu)
    sym = sq[:, None] * a_matrix / sq[None, :]
    sym = 0.5 * (sym + sym.T)  # exact symmetrization of rounding noise
    eigvals, eigvecs = np.linalg.eigh(sym)
    basis = (eigvecs / sq[:, None]).T
    # deterministic sign: largest-magnitude component positive
    for i in range(basis.shape[0]):
        j = int(np.argmax(np.abs(basis[i])))
        if basis[i, j] < 0:
            basis[i] = -basis[i]
    return SpectralDecompositionCw(
        law=law,
        beta=beta,
        m_star=m_star,
        nu_weights=nu,
        matrix=a_matrix,
        eigenvalues=eigvals,
        basis=basis,
    )


@dataclass
class CwCltParameters:
    """Parameters of the Gaussian fluctuation process along the eigenbasis.

    The i-th mode solves dX_i = 2[H_i - lambda_i X_i] dt + b_i dW_i with
    (X(0), H) jointly centered Gaussian; the covariance blocks are the
    second moments of sigma phi_i(eta) and sinh(beta(m*+eta)) phi_i(eta)
    under the product stationary law.  The noise amplitude is
    b_i = 2 sqrt(int phi_i^2 d nu); both factors of 2 come from the
    second-order term of the generator expansion (a first-order-only
    convention would understate the stationary variance by half).
    """

    eigenvalues: np.ndarray
    cov_x0: np.ndarray
    cov_h: np.ndarray
    cov_hx0: np.ndarray  # [i, j] = Cov(H_i, X_j(0))
    noise: np.ndarray
    drift_rates: np.ndarray  # 2 * eigenvalues

    def joint_initial_covariance(self) -> np.ndarray:
        """Covariance of the stacked vector (X(0), H)."""
        top = np.hstack([self.cov_x0, self.cov_hx0.T])
        bot = np.hstack([self.cov_hx0, self.cov_h])
        return np.vstack([top, bot])

    def ou_drift_matrix(self) -> np.ndarray:
        """Drift of the stacked (X, H) system: dX = (2H - 2 Lambda X) dt,
        dH = 0."""
        m = self.eigenvalues.size
        a = np.zeros((2 * m, 2 * m))
        a[:m, :m] = -np.diag(self.drift_rates)
        a[:m, m:] = 2.0 * np.eye(m)
        return a

    def ou_noise_diag(self) -> np.ndarray:
        return np.concatenate([self.noise, np.zeros_like(self.noise)])


def cw_clt_parameters(
    spec: SpectralDecompositionCw, params: CwParams, m_star: float
) -> CwCltParameters:
    """Covariances and noise amplitudes of the fluctuation limit.

    All integrals are finite sums over the field atoms.  The constant random
    drifts H_i vanish identically for the one-atom law at the origin, where
    sinh(beta * 0) = 0.
    """
    law, beta = params.law, params.beta
    w = law.weights
    arg = beta * (m_star + law.values)
    th = np.tanh(arg)
    sh = np.sinh(arg)
    phi = spec.basis  # [i, k]

    mean_phi_tanh = phi @ (w * th)
    mean_phi_sinh = phi @ (w * sh)
    cov_x0 = (phi * w[None, :]) @ phi.T - np.outer(mean_phi_tanh, mean_phi_tanh)
    cov_h = (phi * (w * sh**2)[None, :]) @ phi.T - np.outer(mean_phi_sinh, mean_phi_sinh)
    cov_hx0 = (phi * (w * sh * th)[None, :]) @ phi.T - np.outer(
        mean_phi_sinh, mean_phi_tanh
    )
    noise = 2.0 * np.sqrt((phi**2 * spec.nu_weights[None, :]).sum(axis=1))
    return CwCltParameters(
        eigenvalues=spec.eigenvalues.copy(),
        cov_x0=cov_x0,
        cov_h=cov_h,
        cov_hx0=cov_hx0,
        noise=noise,
        drift_rates=2.0 * spec.eigenvalues,
    )


def random_slope_variance(law: DisorderLaw, beta: float) -> float:
    """Variance of the Gaussian slope factor of the degenerate critical
    limit: int tanh^2(beta eta) mu(d eta).  The limiting critical mode grows
    linearly with slope 2H, so the slope variance is four times this."""
    return float((law.weights * np.tanh(beta * law.values) ** 2).sum())
