"""Deterministic theory of the rotator model.

Fourier-Galerkin integration of the macroscopic density, stationary
densities with their coherence self-consistency, the critical coupling,
the linearized operator around the incoherent state with its exact
spectrum, and the block-diagonal Gaussian fluctuation system.

Densities q(x, eta) on the torus are represented by Fourier coefficients
c_h(eta) = (1/2pi) int e^{-ihx} q(x, eta) dx for h = 0..K per frequency
atom, with c_0 = 1/(2 pi) pinned by normalization and negative harmonics
implied by conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.linalg import solve_continuous_lyapunov

from .core import (
    TWO_PI,
    ConfigError,
    DisorderLaw,
    KuramotoParams,
    QuadratureError,
    StructureError,
    TruncationError,
)


@dataclass(frozen=True)
class ThetaCritical:
    """Critical coupling: the spectral value [int mu(d eta)/(1+4 w^2 eta^2)]^{-1},
    plus (for the two-point unit law) the effective threshold min(theta_c, 2)
    with the binding branch."""

    theta_c: float
    effective: float | None = None
    binding: str | None = None  # "spectral" or "cap"


def theta_critical(omega: float, law: DisorderLaw) -> ThetaCritical:
    """Coupling at which the incoherent state turns neutrally stable."""
    if omega < 0:
        raise ConfigError("omega must be >= 0")
    denom = float((law.weights / (1.0 + 4.0 * (omega * law.values) ** 2)).sum())
    theta_c = 1.0 / denom
    if law.is_two_point_unit:
        eff = min(theta_c, 2.0)
        return ThetaCritical(theta_c, eff, "spectral" if theta_c <= 2.0 else "cap")
    return ThetaCritical(theta_c)


def kuramoto_stationary(
    r_value: float,
    params: KuramotoParams,
    eta: float,
    grid_points: int = 2048,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Stationary density for a candidate coherence r (mean phase 0).

    With u(x) = 2 (omega eta x + theta r cos x) the density is proportional to
        e^{u(x)} [ e^{4 pi omega eta} I(2 pi) + (1 - e^{4 pi omega eta}) I(x) ],
    I(x) = int_0^x e^{-u}; the inner integral is computed once as a cumulative
    Simpson table, which keeps the two exponentially growing factors paired.

    Returns (x grid, normalized density, cos-moment).  Raises QuadratureError
    when doubling the grid moves the cos-moment by more than 1e-6.
    """
    if grid_points < 512:
        raise ConfigError("need at least 512 quadrature points")

    def moment_and_density(n_pts):
        x = np.linspace(0.0, TWO_PI, n_pts + 1)
        u = 2.0 * (params.omega * eta * x + params.theta * r_value * np.cos(x))
        inner = cumulative_simpson(np.exp(-u), x=x, initial=0.0)
        amp = np.exp(4.0 * np.pi * params.omega * eta)
        unnorm = np.exp(u) * (amp * inner[-1] + (1.0 - amp) * inner)
        z = simpson(unnorm, x=x)
        if z <= 0 or not np.isfinite(z):
            raise QuadratureError("stationary density normalization failed")
        dens = unnorm / z
        return x, dens, float(simpson(np.cos(x) * dens, x=x))

    x, dens, mom = moment_and_density(grid_points)
    _, _, mom2 = moment_and_density(2 * grid_points)
    if abs(mom - mom2) > 1e-6:
        raise QuadratureError(
            f"quadrature not converged: cos-moment moved {abs(mom - mom2):.2e} on refinement"
        )
    return x, dens, mom


def coherence_map(r_value: float, params: KuramotoParams, grid_points: int = 2048) -> float:
    """The self-consistency map r -> int int cos x q_*(x, eta; r) dx mu(d eta)."""
    total = 0.0
    for v, w in params.law.atoms:
        _, _, mom = kuramoto_stationary(r_value, params, v, grid_points)
        total += w * mom
    return total


def solve_r_star(
    params: KuramotoParams, grid_points: int = 2048, n_scan: int = 101
) -> list[float]:
    """All fixed points of the coherence map on [0, 1].

    r = 0 is exact for every even law (the incoherent state); further roots
    are bracketed on a uniform scan and refined by bisection to 1e-10.
    """
    rs = np.linspace(0.0, 1.0, n_scan)
    gap = np.array([coherence_map(r, params, grid_points) - r for r in rs])
    roots = [0.0]
    for i in range(1, n_scan - 1):
        if gap[i] * gap[i + 1] < 0.0:
            lo, hi, glo = rs[i], rs[i + 1], gap[i]
            while hi - lo > 1e-10:
                mid = 0.5 * (lo + hi)
                gm = coherence_map(mid, params, grid_points) - mid
                if glo * gm <= 0.0:
                    hi = mid
                else:
                    lo, glo = mid, gm
            roots.append(0.5 * (lo + hi))
    return roots


@dataclass
class KuramotoDensity:
    """Truncated Fourier representation of a macroscopic rotator density."""

    law: DisorderLaw
    coeffs: np.ndarray  # complex[n_atoms, K+1], coeffs[:, h] = c_h(eta)

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != self.law.n_atoms:
            raise StructureError("coefficient array must be (n_atoms, K+1)")
        if np.abs(self.coeffs[:, 0] - 1.0 / TWO_PI).max() > 1e-12:
            raise StructureError("c_0 must equal 1/(2 pi) for every atom")
        if (self.reconstruct() < -1e-6).any():
            raise StructureError("reconstructed density dips below -1e-6")

    @property
    def truncation(self) -> int:
        return self.coeffs.shape[1] - 1

    def reconstruct(self, n_grid: int = 512) -> np.ndarray:
        """Density values on a uniform grid, rows per atom."""
        x = np.linspace(0.0, TWO_PI, n_grid, endpoint=False)
        h = np.arange(1, self.truncation + 1)
        phases = np.exp(1j * np.outer(h, x))  # [h, x]
        return np.real(
            self.coeffs[:, :1] + 2.0 * (self.coeffs[:, 1:] @ phases)
        )

    def coherence(self) -> complex:
        """int int e^{ix} q dx mu = 2 pi conj(sum_eta mu c_1)."""
        c1_tot = (self.law.weights * self.coeffs[:, 1]).sum()
        return TWO_PI * np.conj(c1_tot)

    @staticmethod
    def uniform(law: DisorderLaw, truncation: int) -> "KuramotoDensity":
        c = np.zeros((law.n_atoms, truncation + 1), dtype=complex)
        c[:, 0] = 1.0 / TWO_PI
        return KuramotoDensity(law, c)

    @staticmethod
    def from_function(q0, law: DisorderLaw, truncation: int, n_grid: int = 2048) -> "KuramotoDensity":
        """Project a callable density (x, eta) -> value onto the basis."""
        x = np.linspace(0.0, TWO_PI, n_grid, endpoint=False)
        c = np.zeros((law.n_atoms, truncation + 1), dtype=complex)
        for a, v in enumerate(law.values):
            vals = np.asarray([q0(xx, v) for xx in x], dtype=float)
            z = vals.mean() * TWO_PI
            if z <= 0 or not np.isfinite(z):
                raise ConfigError("initial density not normalizable")
            vals = vals / z
            for h in range(truncation + 1):
                c[a, h] = (vals * np.exp(-1j * h * x)).mean()
        return KuramotoDensity(law, c)


def _galerkin_rhs(
    c: np.ndarray, law: DisorderLaw, theta: float, omega: float
) -> np.ndarray:
    """Time derivative of the harmonic coefficients c[:, h], h = 1..K:

        dc_h/dt = -h^2/2 c_h - i h omega eta c_h
                  + pi theta h [ c1_tot c_{h-1} - conj(c1_tot) c_{h+1} ],

    with c_0 = 1/(2 pi), c_{K+1} = 0, and c1_tot = sum_eta mu(eta) c_1(eta).
    The coupling is the sin(Psi - x) transport written on coefficients."""
    n_atoms, kmax = c.shape
    h = np.arange(1, kmax + 1)
    c1_tot = (law.weights * c[:, 0]).sum()
    shifted_dn = np.empty_like(c)  # c_{h-1}
    shifted_dn[:, 0] = 1.0 / TWO_PI
    shifted_dn[:, 1:] = c[:, :-1]
    shifted_up = np.empty_like(c)  # c_{h+1}
    shifted_up[:, :-1] = c[:, 1:]
    shifted_up[:, -1] = 0.0
    local = (-0.5 * h**2)[None, :] * c - 1j * omega * np.outer(law.values, h) * c
    coupling = (np.pi * theta * h)[None, :] * (
        c1_tot * shifted_dn - np.conj(c1_tot) * shifted_up
    )
    return local + coupling


def mckean_vlasov_kuramoto(
    q0: KuramotoDensity,
    params: KuramotoParams,
    t_end: float,
    dt: float = 1e-3,
    store_every: int = 10,
    verify_truncation: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the Galerkin system with classical fourth-order Runge-Kutta.

    Returns (times, coefficient snapshots) where snapshots[i] has shape
    (n_atoms, K) over harmonics h = 1..K.  With ``verify_truncation`` the run
    is repeated at 2K and a drift of the coupling coefficient beyond 1e-6
    raises TruncationError.
    """
    if q0.truncation < 8:
        raise ConfigError("need truncation K >= 8")
    if dt <= 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")

    def integrate(c0):
        c = c0.copy()
        n_steps = int(round(t_end / dt))
        times = [0.0]
        snaps = [c.copy()]
        for step in range(1, n_steps + 1):
            k1 = _galerkin_rhs(c, params.law, params.theta, params.omega)
            k2 = _galerkin_rhs(c + 0.5 * dt * k1, params.law, params.theta, params.omega)
            k3 = _galerkin_rhs(c + 0.5 * dt * k2, params.law, params.theta, params.omega)
            k4 = _galerkin_rhs(c + dt * k3, params.law, params.theta, params.omega)
            c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % store_every == 0 or step == n_steps:
                times.append(step * dt)
                snaps.append(c.copy())
        return np.array(times), np.array(snaps)

    times, snaps = integrate(q0.coeffs[:, 1:])
    if verify_truncation:
        wide = np.zeros((q0.law.n_atoms, 2 * q0.truncation), dtype=complex)
        wide[:, : q0.truncation] = q0.coeffs[:, 1:]
        _, snaps2 = integrate(wide)
        w = q0.law.weights
        drift = np.abs(
            (w[None, :] * snaps[:, :, 0]).sum(axis=1)
            - (w[None, :] * snaps2[:, :, 0]).sum(axis=1)
        ).max()
        if drift > 1e-6:
            raise TruncationError(
                f"K={q0.truncation} too small: coupling coefficient moved {drift:.2e} at 2K"
            )
    return times, snaps


def analytic_spectrum(omega: float, k_max: int) -> list[complex]:
    """Exact eigenvalues of the linearized operator at the critical coupling
    theta = 1 + 4 omega^2 (each listed once per eigenvector):
    0 and -1/2 + 2 omega^2 twice, and -k^2/2 +- i k omega twice each for
    k = 2..k_max."""
    out = [0.0 + 0j, 0.0 + 0j, -0.5 + 2.0 * omega**2 + 0j, -0.5 + 2.0 * omega**2 + 0j]
    for k in range(2, k_max + 1):
        lam = -0.5 * k * k
        out += [lam + 1j * k * omega] * 2 + [lam - 1j * k * omega] * 2
    return out


@dataclass
class SpectralDecompositionK:
    """Linearized operator around the incoherent state on the truncated
    basis e^{ihx} x {1, eta}, h = -K..K without 0 (constants carry no
    dynamics and would contribute spurious zero modes).

    ``matrix`` acts on observables (the drift side of the fluctuation
    process); the Fokker-Planck side seen by the Galerkin integrator is its
    complex conjugate in this basis, available as `as_density_jacobian`.
    """

    omega: float
    theta: float
    truncation: int
    harmonics: np.ndarray       # signed harmonic per basis element
    eta_power: np.ndarray       # 0 for the function 1, 1 for eta
    matrix: np.ndarray          # complex[4K, 4K]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray    # columns

    def as_density_jacobian(self) -> np.ndarray:
        """Jacobian of the macroscopic flow at uniform in the same basis."""
        return np.conj(self.matrix)

    def kernel_vectors(self) -> np.ndarray:
        """Eigenvectors with |eigenvalue| < 1e-8 (columns)."""
        sel = np.abs(self.eigenvalues) < 1e-8
        return self.eigenvectors[:, sel]

    def kernel_dimension(self, tol: float = 1e-8) -> int:
        return int((np.abs(self.eigenvalues) < tol).sum())


def linearized_kuramoto(params: KuramotoParams, truncation: int = 32) -> SpectralDecompositionK:
    """Assemble and diagonalize the linearization at the incoherent state.

    On phi = e^{ihx} eta^e (two-point unit law, so eta^2 = 1):
      * (1/2) phi''            -> -h^2/2 on the diagonal;
      * omega eta phi'         -> i omega h, swapping the eta parity;
      * the coupling projects onto the first harmonics of the eta-even
        sector, adding theta/2 on the |h| = 1, e = 0 diagonal.
    The matrix is block diagonal over h, so the truncation is exact for all
    retained harmonics.
    """
    if truncation < 8:
        raise ConfigError("need truncation K >= 8")
    if not params.law.is_two_point_unit:
        raise ConfigError("the linearized spectrum assumes the two-point unit law")

    hs: list[int] = []
    es: list[int] = []
    for h in range(-truncation, truncation + 1):
        if h == 0:
            continue
        hs += [h, h]
        es += [0, 1]
    harmonics = np.array(hs)
    eta_power = np.array(es)
    dim = harmonics.size
    mat = np.zeros((dim, dim), dtype=complex)
    index = {(h, e): i for i, (h, e) in enumerate(zip(hs, es))}
    for (h, e), i in index.items():
        mat[i, i] = -0.5 * h * h
        if abs(h) == 1 and e == 0:
            mat[i, i] += 0.5 * params.theta
        mat[index[(h, 1 - e)], i] += 1j * params.omega * h
    eigvals, eigvecs = np.linalg.eig(mat)
    order = np.argsort(-eigvals.real, kind="stable")
    return SpectralDecompositionK(
        omega=params.omega,
        theta=params.theta,
        truncation=truncation,
        harmonics=harmonics,
        eta_power=eta_power,
        matrix=mat,
        eigenvalues=eigvals[order],
        eigenvectors=eigvecs[:, order],
    )


def kernel_coefficient_vectors(spec: SpectralDecompositionK) -> np.ndarray:
    """Coefficient vectors of the critical pair cos x - 2 w eta sin x and
    sin x + 2 w eta cos x in the decomposition's basis (columns)."""
    w = spec.omega
    dim = spec.harmonics.size
    out = np.zeros((dim, 2), dtype=complex)
    idx = {(h, e): i for i, (h, e) in enumerate(zip(spec.harmonics, spec.eta_power))}
    # cos x - 2 w eta sin x = (1/2)(1 + 2iw eta) e^{ix} + (1/2)(1 - 2iw eta) e^{-ix}
    out[idx[(1, 0)], 0] = 0.5
    out[idx[(1, 1)], 0] = 1j * w
    out[idx[(-1, 0)], 0] = 0.5
    out[idx[(-1, 1)], 0] = -1j * w
    # sin x + 2 w eta cos x = (1/2i)(1 + 2iw eta) e^{ix} - (1/2i)(1 - 2iw eta) e^{-ix}
    out[idx[(1, 0)], 1] = -0.5j
    out[idx[(1, 1)], 1] = w
    out[idx[(-1, 0)], 1] = 0.5j
    out[idx[(-1, 1)], 1] = w
    return out


@dataclass
class KuramotoCltSystem:
    """Block-diagonal linear fluctuation system at the incoherent state.

    For each harmonic h the four observables (cos hx, sin hx, eta cos hx,
    eta sin hx) solve a linear SDE with drift block

        [ a_h    0     0   -h w ]
        [ 0     a_h   h w   0   ]      a_h = (theta delta_{1h} - h^2) / 2,
        [ 0    -h w  -h^2/2 0   ]
        [ h w    0     0  -h^2/2]

    noise amplitude 1/sqrt(2) per component and initial covariance I/2.
    """

    theta: float
    omega: float
    h_max: int

    def drift_block(self, h: int) -> np.ndarray:
        if not 1 <= h <= self.h_max:
            raise ConfigError(f"harmonic {h} outside 1..{self.h_max}")
        a = 0.5 * (self.theta * (1 if h == 1 else 0) - h * h)
        b = -0.5 * h * h
        hw = h * self.omega
        return np.array(
            [
                [a, 0.0, 0.0, -hw],
                [0.0, a, hw, 0.0],
                [0.0, -hw, b, 0.0],
                [hw, 0.0, 0.0, b],
            ]
        )

    def noise_diag(self, h: int) -> np.ndarray:
        return np.full(4, 1.0 / np.sqrt(2.0))

    def initial_covariance(self, h: int) -> np.ndarray:
        return 0.5 * np.eye(4)

    def stationary_covariance(self, h: int) -> np.ndarray:
        """Solve A S + S A^T + B B^T = 0 for the h-th block (requires the
        block to be stable, i.e. h >= 2 or theta below critical)."""
        a = self.drift_block(h)
        if np.linalg.eigvals(a).real.max() > -1e-12:
            raise ConfigError(f"block h={h} is not stable; no stationary covariance")
        bbt = np.diag(self.noise_diag(h) ** 2)
        return solve_continuous_lyapunov(a, -bbt)


def kuramoto_clt_system(params: KuramotoParams, h_max: int = 16) -> KuramotoCltSystem:
    if not params.law.is_two_point_unit:
        raise ConfigError("the fluctuation blocks assume the two-point unit law")
    if h_max < 1:
        raise ConfigError("h_max must be >= 1")
    return KuramotoCltSystem(params.theta, params.omega, h_max)
