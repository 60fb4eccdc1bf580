"""Shared domain types: disorder laws, seeding, empirical/fluctuation measures.

Conventions used throughout the package:

* a *disorder law* is a finite, even (symmetric about 0) probability measure
  on the reals, holding the random magnetic fields of the spin model and the
  random natural frequencies of the rotator model;
* randomness is counter-based: every stream is a numpy ``Philox`` generator
  keyed by ``(base_seed, replica_index, stream tag)``, so replica streams are
  independent and reproducible with no sequential dependence between them;
* fluctuation observables are stored as plain ``FluctuationSeries`` arrays
  with the space/time rescaling recorded alongside the data.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TWO_PI = 2.0 * np.pi

_MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    """Invalid user-supplied configuration (law, parameters, scales...)."""


class StructureError(ValueError):
    """Mismatched cell structure between a measure and its reference."""


class NumericsError(RuntimeError):
    """A numerical-accuracy contract was violated."""


class StepSizeError(NumericsError):
    """Time step too large for the requested integration accuracy."""


class QuadratureError(NumericsError):
    """Quadrature did not converge under grid refinement."""


class TruncationError(NumericsError):
    """Spectral truncation too small: result changed under doubling."""


class SpaceScale(str, Enum):
    """Prefactor of the centered empirical measure.

    ``SQRT_N``  : sqrt(N) (rho_N - q), the central-limit scale.
    ``MODERATE``: N**(-1/4) * sqrt(N) (rho_N - q); each particle then carries
                  mass N**(-3/4), the scale of critical fluctuations.
    """

    SQRT_N = "sqrtN"
    MODERATE = "N_three_quarters_inverse"


class TimeScale(str, Enum):
    """Time speed-up applied at observation (the simulators always run in
    microscopic time): observed t corresponds to microscopic factor * t."""

    UNIT = "unit"
    N_QUARTER = "N_quarter"
    N_HALF = "N_half"

    def factor(self, n_particles: int) -> float:
        if self is TimeScale.UNIT:
            return 1.0
        if self is TimeScale.N_QUARTER:
            return float(n_particles) ** 0.25
        return float(n_particles) ** 0.5


def _splitmix64(z: int) -> int:
    """One round of the splitmix64 mixer; used only to derive stream keys."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _stream_tag(stream: str) -> int:
    return _splitmix64(zlib.crc32(stream.encode()) & _MASK64)


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic seeding contract.

    Identical ``(base_seed, replica_index)`` yield bit-identical trajectories
    across runs on the same build.  Streams for unrelated purposes (disorder
    draw, initial condition, dynamics noise) are separated by a string tag so
    that consuming more randomness in one stream never shifts another.
    """

    base_seed: int
    replica_index: int = 0

    def generator(self, stream: str = "main") -> np.random.Generator:
        """Counter-based generator for this (seed, replica, stream) triple."""
        key = np.array(
            [
                _splitmix64(self.base_seed & _MASK64),
                _splitmix64((self.replica_index & _MASK64) ^ _stream_tag(stream)),
            ],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))

    def replica(self, index: int) -> "SeedSpec":
        return SeedSpec(self.base_seed, index)


@dataclass(frozen=True)
class DisorderLaw:
    """Finite symmetric probability law for the random environment.

    ``atoms`` is a tuple of ``(value, weight)`` pairs.  Weights must be
    positive and sum to one; for every atom at ``v != 0`` there must be an
    atom of equal weight at ``-v`` (evenness).  Continuous laws are rejected
    by construction: only finitely many atoms are representable.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ConfigError("disorder law needs at least one atom")
        vals = [v for v, _ in self.atoms]
        if len(set(vals)) != len(vals):
            raise ConfigError(f"duplicate atom values in disorder law: {vals}")
        wsum = 0.0
        for v, w in self.atoms:
            if not np.isfinite(v):
                raise ConfigError(f"non-finite atom value {v}")
            if w <= 0.0:
                raise ConfigError(f"atom weight must be positive, got {w} at {v}")
            wsum += w
        if abs(wsum - 1.0) > 1e-12:
            raise ConfigError(f"atom weights sum to {wsum!r}, expected 1 within 1e-12")
        table = dict(self.atoms)
        for v, w in self.atoms:
            if v != 0.0 and (-v not in table or abs(table[-v] - w) > 1e-12):
                raise ConfigError(f"law not symmetric: atom at {v} has no mirror at {-v}")
        # canonical ordering by value, so supports compare predictably
        object.__setattr__(self, "atoms", tuple(sorted(self.atoms)))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def is_two_point_unit(self) -> bool:
        """True for the law (delta_{+1} + delta_{-1}) / 2."""
        return self.atoms == ((-1.0, 0.5), (1.0, 0.5))

    @staticmethod
    def delta(value: float = 0.0) -> "DisorderLaw":
        if value != 0.0:
            raise ConfigError("a single off-origin atom cannot be symmetric")
        return DisorderLaw(((0.0, 1.0),))

    @staticmethod
    def symmetric_pair(value: float) -> "DisorderLaw":
        """(delta_v + delta_{-v}) / 2 for v > 0."""
        if value <= 0.0:
            raise ConfigError("symmetric pair needs value > 0")
        return DisorderLaw(((value, 0.5), (-value, 0.5)))

    @staticmethod
    def rademacher() -> "DisorderLaw":
        return DisorderLaw.symmetric_pair(1.0)

    @staticmethod
    def parse(text: str) -> "DisorderLaw":
        """Parse 'v1:w1,v2:w2,...' (e.g. '0.3:0.5,-0.3:0.5')."""
        atoms = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                v, w = chunk.rsplit(":", 1)
                atoms.append((float(v), float(w)))
            except ValueError as exc:
                raise ConfigError(f"cannot parse law atom {chunk!r}") from exc
        return DisorderLaw(tuple(atoms))


@dataclass(frozen=True)
class CwParams:
    """Spin model parameters: inverse temperature, field law, system size."""

    beta: float
    law: DisorderLaw
    n_particles: int

    def __post_init__(self) -> None:
        if self.beta <= 0.0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.n_particles < 1:
            raise ConfigError(f"n_particles must be >= 1, got {self.n_particles}")


@dataclass(frozen=True)
class KuramotoParams:
    """Rotator model parameters: coupling, frequency scale, law, system size."""

    theta: float
    omega: float
    law: DisorderLaw
    n_particles: int

    def __post_init__(self) -> None:
        if self.theta <= 0.0:
            raise ConfigError(f"theta must be positive, got {self.theta}")
        if self.omega < 0.0:
            raise ConfigError(f"omega must be >= 0, got {self.omega}")
        if self.n_particles < 1:
            raise ConfigError(f"n_particles must be >= 1, got {self.n_particles}")

    def require_critical_window(self) -> None:
        """Critical-fluctuation theory needs the two-point unit law and
        omega < 1/2 (spectral gap of the non-kernel directions)."""
        if not self.law.is_two_point_unit:
            raise ConfigError("critical-fluctuation runs need the law (d_1 + d_-1)/2")
        if self.omega >= 0.5:
            raise ConfigError(f"critical-fluctuation runs need omega < 1/2, got {self.omega}")


@dataclass
class EmpiricalMeasure:
    """Counts per (state value, field value) cell; integrates to 1."""

    cells: dict[tuple[float, float], int]
    total: int

    def __post_init__(self) -> None:
        counts = np.array(list(self.cells.values()))
        if (counts < 0).any():
            raise StructureError("negative cell count")
        if counts.sum() != self.total:
            raise StructureError(
                f"cell counts sum to {counts.sum()}, expected total {self.total}"
            )

    def probability(self, cell: tuple[float, float]) -> float:
        return self.cells.get(cell, 0) / self.total


def sample_disorder(law: DisorderLaw, n: int, seed: SeedSpec) -> np.ndarray:
    """Draw n i.i.d. field/frequency values from the law.

    Reproducible per SeedSpec; the stream is tagged 'disorder' so that the
    environment draw is independent of every other stream of the replica.
    """
    if n < 1:
        raise ConfigError(f"need n >= 1, got {n}")
    rng = seed.generator("disorder")
    idx = rng.choice(law.n_atoms, size=n, p=law.weights)
    return law.values[idx]


def empirical_to_fluctuation(
    rho: EmpiricalMeasure,
    reference: dict[tuple[float, float], float],
    scale: SpaceScale = SpaceScale.SQRT_N,
) -> dict[tuple[float, float], float]:
    """Signed cell weights of the centered, rescaled empirical measure.

    Returns ``pref * (rho(cell) - reference(cell))`` per cell with
    ``pref = sqrt(N)`` or ``N**(1/4)`` for the moderate scale.  The reference
    must be a probability over a superset of the occupied cells; the signed
    weights sum to zero up to rounding because both measures have mass one.
    """
    ref_mass = sum(reference.values())
    if abs(ref_mass - 1.0) > 1e-10:
        raise StructureError(f"reference has mass {ref_mass!r}, expected 1")
    for cell in rho.cells:
        if cell not in reference:
            raise StructureError(f"cell {cell} missing from reference")
    n = rho.total
    pref = np.sqrt(n) if scale is SpaceScale.SQRT_N else float(n) ** 0.25
    return {
        cell: pref * (rho.cells.get(cell, 0) / n - q) for cell, q in reference.items()
    }


@dataclass
class FluctuationSeries:
    """Time series of rescaled order parameters.

    ``times`` are in observed units (after any time rescaling); ``values`` has
    one column per observable.  The scales record how the raw empirical
    measure was rescaled in space and how observed time maps to microscopic
    time.
    """

    times: np.ndarray
    values: np.ndarray
    space_scale: SpaceScale
    time_scale: TimeScale
    labels: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.shape[0] != self.times.shape[0]:
            raise StructureError(
                f"{self.values.shape[0]} rows of values for {self.times.shape[0]} times"
            )
        if self.labels and len(self.labels) != self.values.shape[1]:
            raise StructureError(
                f"{len(self.labels)} labels for {self.values.shape[1]} observables"
            )
        if not self.labels:
            self.labels = tuple(f"obs{i}" for i in range(self.values.shape[1]))

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]
