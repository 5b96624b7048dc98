"""
Von Neumann pointer measurements on pre- and post-selected ensembles.

The coupling ``H = eps * g(t) * A * P`` is applied impulsively, so each
eigenvalue branch ``a_k`` of ``A`` shifts a Gaussian pointer by
``eps * a_k``. After post-selection the pointer wavefunction is the
coherent sum

    phi(x) = sum_k c_k G(x - eps * a_k),    c_k = <post|P_k|pre>

with ``G(x) ~ exp(-x**2 / (4 sigma**2))``. Units have hbar = 1, so the
momentum-space width of ``G`` is ``1 / (2 sigma)``.

Sampling is split into fixed-size chunks. Chunk ``i`` of readout stream
``s`` draws from a Philox generator keyed by ``(seed, s, i)``, so a batch is
the same whatever number of worker threads produced it.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .hilbert import NotHermitian, OperatorMatrix
from .tsvf import TwoStateVector, branch_amplitudes

CHUNK_ATTEMPTS = 1 << 16
WEAK_MAX_RATIO = 0.2
STRONG_MIN_SEPARATION = 20.0
THREADS_ENV = "WVLAB_THREADS"

Readout = Literal["position", "momentum"]
_STREAMS = {"position": 0, "momentum": 1}


class RegimeError(ValueError):
    """Coupling strength is outside the regime the estimator assumes."""


class RegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PointerConfig:
    epsilon: float
    sigma: float = 1.0
    readout: Readout = "position"
    grid_points: int = 4096
    grid_pad: float = 8.0

    def __post_init__(self):
        for name in ("epsilon", "sigma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v}")
        if self.readout not in _STREAMS:
            raise ValueError(f"readout must be 'position' or 'momentum', got {self.readout!r}")
        if self.grid_points < 256:
            raise ValueError("grid_points must be >= 256")
        if not self.grid_pad > 0:
            raise ValueError("grid_pad must be positive")

    @property
    def ratio(self) -> float:
        return self.epsilon / self.sigma

    def with_readout(self, readout: Readout) -> "PointerConfig":
        return PointerConfig(self.epsilon, self.sigma, readout, self.grid_points, self.grid_pad)


@dataclass(frozen=True)
class PostSelectedPointer:
    eigenvalues: np.ndarray
    branch_shifts: np.ndarray
    branch_amps: np.ndarray
    sigma: float
    success_prob: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "success_prob", float(np.real(
            np.conj(self.branch_amps) @ self._overlaps() @ self.branch_amps)))

    def _overlaps(self) -> np.ndarray:
        d = self.branch_shifts[:, None] - self.branch_shifts[None, :]
        return np.exp(-d ** 2 / (8.0 * self.sigma ** 2))

    def wavefunction(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)[..., None]
        g = (2 * np.pi * self.sigma ** 2) ** -0.25 * np.exp(
            -(x - self.branch_shifts) ** 2 / (4 * self.sigma ** 2))
        return g @ self.branch_amps

    def momentum_wavefunction(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        envelope = (2 * self.sigma ** 2 / np.pi) ** 0.25 * np.exp(-self.sigma ** 2 * p ** 2)
        phases = np.exp(-1j * p[..., None] * self.branch_shifts)
        return envelope * (phases @ self.branch_amps)

    def density(self, grid, readout: Readout = "position") -> np.ndarray:
        """Unnormalized reading density; it integrates to ``success_prob``."""
        if readout == "position":
            return np.abs(self.wavefunction(grid)) ** 2
        return np.abs(self.momentum_wavefunction(grid)) ** 2

    def grid(self, cfg: PointerConfig, readout: Readout | None = None) -> np.ndarray:
        readout = readout or cfg.readout
        if readout == "position":
            pad = cfg.grid_pad * self.sigma
            lo, hi = self.branch_shifts.min() - pad, self.branch_shifts.max() + pad
        else:
            # branches are not displaced in momentum; the envelope bounds the density
            pad = cfg.grid_pad / (2 * self.sigma)
            lo, hi = -pad, pad
        return np.linspace(lo, hi, cfg.grid_points)

    def exact_mean(self, readout: Readout = "position") -> float:
        """Closed-form mean reading conditioned on post-selection."""
        c = self.branch_amps
        s = self.branch_shifts
        cc = np.conj(c)[:, None] * c[None, :]
        if readout == "position":
            terms = cc * 0.5 * (s[:, None] + s[None, :]) * self._overlaps()
        else:
            v = 1.0 / (4 * self.sigma ** 2)
            t = s[:, None] - s[None, :]
            terms = cc * 1j * t * v * np.exp(-t ** 2 * v / 2)
        return float(np.real(terms.sum()) / self.success_prob)

    def grid_moments(self, cfg: PointerConfig, readout: Readout | None = None):
        """Norm, mean and variance of the reading by trapezoid quadrature."""
        readout = readout or cfg.readout
        g = self.grid(cfg, readout)
        rho = self.density(g, readout)
        norm = np.trapezoid(rho, g)
        mean = np.trapezoid(g * rho, g) / norm
        var = np.trapezoid((g - mean) ** 2 * rho, g) / norm
        return float(norm), float(mean), float(var)


@dataclass(frozen=True)
class SampleBatch:
    readings: np.ndarray
    accepted: int
    attempted: int
    seed: int
    readout: Readout = "position"

    def mean(self) -> float:
        return float(np.mean(self.readings))

    def std_error(self) -> float:
        return float(np.std(self.readings, ddof=1) / math.sqrt(self.accepted))


def post_selected_pointer(tsv: TwoStateVector, op: OperatorMatrix,
                          cfg: PointerConfig) -> PostSelectedPointer:
    if not op.hermitian:
        raise NotHermitian("pointer coupling needs a Hermitian observable")
    values, amps = branch_amplitudes(tsv, op)
    return PostSelectedPointer(values, cfg.epsilon * values, amps, cfg.sigma)


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed & (2 ** 64 - 1), spawn_key=(stream, chunk))
    return np.random.Generator(np.random.Philox(ss))


def sample(ps: PostSelectedPointer, cfg: PointerConfig, n_attempts: int, seed: int,
           workers: int | None = None) -> SampleBatch:
    """Simulate ``n_attempts`` runs and keep the post-selected readings.

    Each run passes post-selection with probability ``success_prob``; a
    passing run draws its reading from the conditional density by inverse
    CDF on a trapezoid-integrated grid.
    """
    if n_attempts < 1:
        raise ValueError("n_attempts must be >= 1")
    grid = ps.grid(cfg)
    rho = ps.density(grid, cfg.readout)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(grid))])
    if cdf[-1] <= 0:
        raise ValueError("reading density vanishes on the grid")
    cdf /= cdf[-1]
    p_accept = min(max(ps.success_prob, 0.0), 1.0)
    stream = _STREAMS[cfg.readout]

    def run(chunk: int) -> np.ndarray:
        start = chunk * CHUNK_ATTEMPTS
        m = min(CHUNK_ATTEMPTS, n_attempts - start)
        rng = _chunk_rng(seed, stream, chunk)
        k = int(np.count_nonzero(rng.random(m) < p_accept))
        return np.interp(rng.random(k), cdf, grid)

    n_chunks = -(-n_attempts // CHUNK_ATTEMPTS)
    workers = workers or worker_count()
    if workers == 1 or n_chunks == 1:
        parts = [run(i) for i in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    readings = np.concatenate(parts)
    readings.setflags(write=False)
    return SampleBatch(readings, len(readings), n_attempts, seed, cfg.readout)


def attempts_for(ps: PostSelectedPointer, accepted: int) -> int:
    """Attempts needed so that about ``accepted`` runs survive post-selection.

    Pads by five binomial standard deviations so the target is met in practice.
    """
    if ps.success_prob <= 0:
        raise ValueError("post-selection never succeeds")
    return math.ceil((accepted + 5 * math.sqrt(accepted) + 5) / min(ps.success_prob, 1.0))


def _guard(ok: bool, message: str, force: bool):
    if ok:
        return
    if not force:
        raise RegimeError(message)
    warnings.warn(message, RegimeWarning, stacklevel=3)


@dataclass(frozen=True)
class WeakEstimate:
    value: complex
    std_error: tuple[float, float]
    position: SampleBatch
    momentum: SampleBatch

    @property
    def combined_error(self) -> float:
        return math.hypot(*self.std_error)


def estimate_weak_value(tsv: TwoStateVector, op: OperatorMatrix, cfg: PointerConfig,
                        n_attempts: int, seed: int, *, force: bool = False,
                        max_ratio: float = WEAK_MAX_RATIO,
                        workers: int | None = None) -> WeakEstimate:
    """Weak value read off a simulated pointer.

    The real part is the mean position shift over ``eps``; the imaginary part
    is ``2 sigma**2 / eps`` times the mean momentum shift, from an
    independent batch of runs.
    """
    _guard(cfg.ratio <= max_ratio,
           f"eps/sigma = {cfg.ratio:g} exceeds the weak-regime bound {max_ratio:g}", force)
    ps = post_selected_pointer(tsv, op, cfg)
    pos = sample(ps, cfg.with_readout("position"), n_attempts, seed, workers)
    mom = sample(ps, cfg.with_readout("momentum"), n_attempts, seed, workers)
    if pos.accepted < 2 or mom.accepted < 2:
        raise ValueError("too few post-selected runs to estimate anything")
    eps, s2 = cfg.epsilon, cfg.sigma ** 2
    value = complex(pos.mean() / eps, 2 * s2 * mom.mean() / eps)
    err = (pos.std_error() / eps, 2 * s2 * mom.std_error() / eps)
    return WeakEstimate(value, err, pos, mom)


def strong_outcome_frequencies(tsv: TwoStateVector, op: OperatorMatrix, cfg: PointerConfig,
                               n_attempts: int, seed: int, *, force: bool = False,
                               min_separation: float = STRONG_MIN_SEPARATION,
                               workers: int | None = None):
    """Strong-regime outcome frequencies as ``[(eigenvalue, frequency, count), ...]``.

    Each position reading is assigned to the nearest branch center ``eps * a_k``.
    """
    ps = post_selected_pointer(tsv, op, cfg)
    gaps = np.diff(ps.branch_shifts)
    separation = float(gaps.min()) / cfg.sigma if len(gaps) else math.inf
    _guard(separation >= min_separation,
           f"branch separation {separation:g} sigma is below {min_separation:g} sigma", force)
    batch = sample(ps, cfg.with_readout("position"), n_attempts, seed, workers)
    centers = ps.branch_shifts
    nearest = np.argmin(np.abs(batch.readings[:, None] - centers[None, :]), axis=1)
    counts = np.bincount(nearest, minlength=len(centers))
    total = max(batch.accepted, 1)
    return [(float(a), c / total, int(c)) for a, c in zip(ps.eigenvalues, counts)]
