"""Time evolution of oscillator states, classical and quantum, side by side.

The same rotation shows up four ways: exact phase multiplication on basis
coefficients, transport of boundary profiles along circles |z| = const,
the diagonal Schrodinger propagator, and rigid rotation of classical
ensembles.  Keeping all four routes independent is the point -- their
agreement is what the harness checks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bargmann import FockVector, _basis_matrix, hamiltonian_matrix
from .bath import moment_report
from .errors import SamplerError
from .phasespace import OscillatorParams, PhasePoint

__all__ = [
    "AngularProfile",
    "DampingParams",
    "EnsembleHistory",
    "profile_from_fock",
    "l2_grid_distance",
    "transport_solve",
    "evolve_exact",
    "schrodinger_evolve",
    "damped_solution",
    "sample_fock_density",
    "ensemble_evolve",
]


@dataclass(frozen=True)
class DampingParams:
    """Friction coefficient alpha of pdot = -w q - alpha p."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be >= 0 and finite")

    @property
    def relaxation_time(self) -> float:
        return 1.0 / self.alpha if self.alpha > 0 else math.inf


@dataclass(frozen=True, eq=False)
class AngularProfile:
    """Samples of a function on the circle |z| = radius, uniform angles."""

    values: np.ndarray
    radius: float
    time: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 1 or v.size < 4:
            raise ValueError("profile needs at least 4 grid values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("radius must be positive")

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.grid_size) / self.grid_size


def profile_from_fock(f: FockVector, radius: float, grid_size: int,
                      time: float = 0.0) -> AngularProfile:
    """Sample f on the circle |z| = radius at `grid_size` uniform angles."""
    phi = 2.0 * np.pi * np.arange(grid_size) / grid_size
    z = radius * np.exp(1j * phi)
    basis = _basis_matrix(z, f.truncation, f.hbar)
    return AngularProfile(f.coeffs @ basis, radius, time)


def l2_grid_distance(a, b) -> float:
    """Root-mean-square distance between two grids (or profiles)."""
    av = a.values if isinstance(a, AngularProfile) else np.asarray(a)
    bv = b.values if isinstance(b, AngularProfile) else np.asarray(b)
    if av.shape != bv.shape:
        raise ValueError("grid shapes differ")
    return float(np.sqrt(np.mean(np.abs(av - bv) ** 2)))


def transport_solve(profile: AngularProfile, t: float, params: OscillatorParams,
                    scheme: str = "spectral", dt: float = None) -> AngularProfile:
    """Advance the transport equation df/dt + w df/dphi = 0 on the circle.

    The exact solution is rigid rotation of the profile by w t.  "spectral"
    applies the per-harmonic phases exp(-i m w t) (exact for band-limited
    data); "upwind" runs the first-order finite-difference scheme with step
    `dt` and enforces the CFL bound w dt <= dphi.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    w = params.omega
    values = profile.values
    if scheme == "spectral":
        modes = np.fft.fftfreq(values.size, d=1.0 / values.size)
        out = np.fft.ifft(np.fft.fft(values) * np.exp(-1j * modes * w * t))
        return AngularProfile(out, profile.radius, profile.time + t)
    if scheme == "upwind":
        if dt is None or dt <= 0:
            raise ValueError("upwind scheme requires dt > 0")
        if t == 0:
            return AngularProfile(values.copy(), profile.radius, profile.time)
        dphi = 2.0 * np.pi / values.size
        n_steps = max(1, math.ceil(t / dt - 1e-12))
        dt_eff = t / n_steps
        nu = w * dt_eff / dphi
        if nu > 1.0 + 1e-12:
            raise ValueError(
                f"CFL violation: w*dt/dphi = {nu:.4g} > 1; shrink dt or refine the grid"
            )
        v = values.copy()
        for _ in range(n_steps):
            v = v - nu * (v - np.roll(v, 1))
        return AngularProfile(v, profile.radius, profile.time + t)
    raise ValueError(f"unknown scheme {scheme!r}")


def evolve_exact(f: FockVector, t: float, params: OscillatorParams) -> FockVector:
    """Free oscillator evolution: c_n -> c_n exp(-i w n t)."""
    n = np.arange(f.coeffs.size)
    return FockVector(f.coeffs * np.exp(-1j * params.omega * n * t), f.hbar, f.tail_mass)


def schrodinger_evolve(f: FockVector, t: float, ordering: str,
                       params: OscillatorParams) -> FockVector:
    """Evolve with the diagonal Hamiltonian: c_n -> c_n exp(-i E_n t / hbar).

    Normal ordering reproduces evolve_exact; symmetric ordering differs by the
    global zero-point phase exp(-i w t / 2) only.
    """
    h = hamiltonian_matrix(ordering, params, f.hbar, f.truncation)
    energies = np.real(np.diag(h.matrix))
    return FockVector(f.coeffs * np.exp(-1j * energies * t / f.hbar), f.hbar, f.tail_mass)


def damped_solution(q0: float, v0: float, params: OscillatorParams,
                    damping: DampingParams, t) -> PhasePoint:
    """Closed-form weakly damped motion with envelope exp(-alpha t / 2).

    q(t) = c1 exp(-i(w - i a/2) t) + c2 exp(+i(w + i a/2) t), both branches
    decaying like exp(-a t/2), with c1, c2 fixed by q(0) = q0 and the raw
    velocity qdot(0) = v0.  Valid for a << w; warns at a >= 0.1 w.  Returns
    the rescaled phase point (q, p = qdot/w); with an array `t` the fields
    hold arrays.
    """
    w = params.omega
    if w <= 0:
        raise ValueError("damped_solution needs omega > 0")
    a = damping.alpha
    if a >= 0.1 * w:
        warnings.warn(
            "damping is not small (alpha >= 0.1 omega); the constant-envelope "
            "form neglects the O(alpha^2) frequency shift",
            stacklevel=2,
        )
    t = np.asarray(t, dtype=float)
    c1 = 0.5 * (q0 + 1j * (v0 + 0.5 * a * q0) / w)
    branch = np.exp((-1j * w - 0.5 * a) * t)
    # real initial data: the second branch is the conjugate of the first
    q = 2.0 * np.real(c1 * branch)
    qdot = 2.0 * np.real(c1 * (-1j * w - 0.5 * a) * branch)
    p = qdot / w
    if t.ndim == 0:
        return PhasePoint(float(q), float(p))
    return PhasePoint(q, p)


# -- ensembles ----------------------------------------------------------------

def _coefficient_majorant(f: FockVector, r: np.ndarray) -> np.ndarray:
    """A(r) = sum |c_n| r^n / sqrt(n! hbar^n) >= |f(z)| for |z| = r."""
    mags = np.abs(f.coeffs)
    out = np.full_like(r, mags[0])
    term = np.ones_like(r)
    for n in range(1, f.coeffs.size):
        term = term * r / math.sqrt(n * f.hbar)
        out = out + mags[n] * term
    return out


def _rejection_sample(f: FockVector, n_samples: int, seed, proposal_scale: float):
    if seed is None:
        raise ValueError("sampling requires a seed")
    if not f.is_normalized(1e-9):
        raise ValueError("f must be normalized for density sampling")
    s = float(proposal_scale)
    if s <= 1.0:
        raise ValueError("proposal_scale must exceed 1 (wider than the measure)")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    hbar = f.hbar
    kappa = (1.0 - 1.0 / s) / hbar
    n_top = f.truncation
    r_max = 1.2 * math.sqrt(max(n_top, 1) / kappa) + math.sqrt(hbar)
    r_grid = np.linspace(0.0, r_max, 4097)
    ratio_grid = s * _coefficient_majorant(f, r_grid) ** 2 * np.exp(-kappa * r_grid ** 2)
    bound = 1.05 * float(np.max(ratio_grid))
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(s * hbar / 2.0)
    out = np.empty(n_samples, dtype=complex)
    filled = 0
    proposed = 0
    while filled < n_samples:
        chunk = max(10_000, 2 * (n_samples - filled))
        z = rng.normal(0.0, sigma, chunk) + 1j * rng.normal(0.0, sigma, chunk)
        basis = _basis_matrix(z, n_top, hbar)
        dens = np.abs(f.coeffs @ basis) ** 2
        ratio = s * dens * np.exp(-kappa * np.abs(z) ** 2)
        if float(np.max(ratio)) > bound:
            raise SamplerError("dominating bound violated; majorant grid too coarse")
        accept = rng.uniform(0.0, bound, chunk) < ratio
        picked = z[accept]
        take = min(picked.size, n_samples - filled)
        out[filled:filled + take] = picked[:take]
        filled += take
        proposed += chunk
        if proposed >= 10_000 and filled / proposed < 1e-3:
            raise SamplerError(
                f"rejection efficiency {filled / proposed:.2e} below 1e-3"
            )
    return out, filled / proposed


def sample_fock_density(f: FockVector, n_samples: int, seed,
                        proposal_scale: float = 2.0) -> np.ndarray:
    """Rejection-sample z from |f(z)|^2 exp(-|z|^2/hbar)/(pi hbar).

    The proposal is the Gaussian widened by `proposal_scale` in variance; the
    acceptance bound comes from the coefficient majorant A(|z|), which
    dominates |f| rigorously, so the sampler is exact.  An efficiency
    collapse (< 1e-3) raises SamplerError instead of looping forever.
    """
    samples, _ = _rejection_sample(f, n_samples, seed, proposal_scale)
    return samples


def _advance_cloud(q: np.ndarray, p: np.ndarray, omega: float, alpha: float,
                   duration: float, dt: float):
    """Leapfrog the whole cloud by `duration` (same scheme as hamilton_step)."""
    if duration == 0:
        return q, p
    n_sub = max(1, math.ceil(duration / dt - 1e-12))
    h = duration / n_sub
    decay = math.exp(-alpha * h / 2.0)
    for _ in range(n_sub):
        p = p - 0.5 * h * omega * q
        p = p * decay
        q = q + h * omega * p
        p = p * decay
        p = p - 0.5 * h * omega * q
    return q, p


@dataclass(frozen=True)
class EnsembleHistory:
    times: np.ndarray
    moments: list            # MomentReport per requested time
    final_z: np.ndarray
    acceptance_rate: float


def ensemble_evolve(f: FockVector, params: OscillatorParams, times, n_samples: int,
                    seed, damping: DampingParams = None, dt: float = None,
                    proposal_scale: float = 2.0) -> EnsembleHistory:
    """Draw a cloud from |f|^2 dmu and advance it classically.

    Every particle follows the leapfrog composition of hamilton_step; moment
    reports (mean z and |z|^2 with standard errors) are recorded at each
    requested time.  For a coherent state the exact law of the mean is
    hbar * conj(c) * exp(-i w t) times the damping envelope.
    """
    w = params.omega
    if w <= 0:
        raise ValueError("ensemble_evolve needs omega > 0")
    alpha = damping.alpha if damping is not None else 0.0
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1d array")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-decreasing and >= 0")
    if dt is None:
        dt = (2.0 * math.pi / w) / 1024.0
    z0, efficiency = _rejection_sample(f, n_samples, seed, proposal_scale)
    q = np.sqrt(2.0) * z0.real
    p = np.sqrt(2.0) * z0.imag
    reports = []
    t_prev = 0.0
    for t in times:
        q, p = _advance_cloud(q, p, w, alpha, t - t_prev, dt)
        t_prev = t
        z = (q + 1j * p) * (2.0 ** -0.5)
        reports.append(moment_report(z))
    z_final = (q + 1j * p) * (2.0 ** -0.5)
    return EnsembleHistory(times=times, moments=reports, final_z=z_final,
                           acceptance_rate=efficiency)
