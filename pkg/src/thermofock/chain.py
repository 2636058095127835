"""Periodic chain of coupled oscillators as a 1D lattice field.

The chain Hamiltonian

    H = (1/2) sum_n [ p_n^2/m + gamma_c (q_n - q_{n-1})^2 + gamma q_n^2 ]

diagonalizes under the discrete Fourier transform into independent modes
with dispersion w(k)^2 = gamma/m + 4 (gamma_c/m) sin^2(k a / 2).  Complex
mode amplitudes a(k) make the energy sum_k w(k) |a(k)|^2; rescaling by
sqrt(w(k)/w(0)) trades the mode-dependent frequency for a uniform one, so
a single bath temperature hands every mode the same quantum of action.
Long-time leapfrog trajectories let the dispersion be *measured* from
spectral peaks and compared against the formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, StabilityError
from .fits import fit_decay_rate

__all__ = [
    "ChainParams",
    "ChainState",
    "ChainTrajectory",
    "ModeSet",
    "DispersionMeasurement",
    "RelaxReport",
    "chain_energy",
    "dispersion",
    "normal_modes",
    "reconstruct_state",
    "rescale_modes",
    "sample_thermal_state",
    "integrate_chain",
    "spectral_dispersion",
    "continuum_error",
    "continuum_params_for",
    "mode_commutator_check",
    "chain_relax",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class ChainParams:
    """Geometry and stiffness of the periodic chain.

    `gamma` is the on-site (pinning) stiffness, `gamma_couple` the
    nearest-neighbour coupling; at least one must be positive so every
    mode frequency is real and the energy form is non-negative.
    """

    n_sites: int
    mass: float = 1.0
    gamma: float = 1.0
    gamma_couple: float = 1.0
    spacing: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.n_sites, int) and self.n_sites >= 2
                and _is_power_of_two(self.n_sites)):
            raise ValueError("n_sites must be a power of two, >= 2")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError("mass must be positive")
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be >= 0")
        if not (self.gamma_couple >= 0 and math.isfinite(self.gamma_couple)):
            raise ValueError("gamma_couple must be >= 0")
        if self.gamma == 0 and self.gamma_couple == 0:
            raise ValueError("gamma and gamma_couple cannot both vanish")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError("spacing must be positive")

    @property
    def zone_boundary(self) -> float:
        """Edge of the Brillouin zone, pi / spacing."""
        return math.pi / self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """Discrete k_j = 2 pi j / (N a) in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_sites, d=self.spacing)

    @property
    def omega_max(self) -> float:
        return math.sqrt((self.gamma + 4.0 * self.gamma_couple) / self.mass)


@dataclass(frozen=True, eq=False)
class ChainState:
    """Site displacements and momenta at one instant."""

    q: np.ndarray
    p: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        p = np.array(self.p, dtype=float)
        if q.ndim != 1 or q.shape != p.shape:
            raise ValueError("q and p must be 1d arrays of equal length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("state entries must be finite")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n_sites(self) -> int:
        return self.q.size


def _check_sites(state: ChainState, params: ChainParams):
    if state.n_sites != params.n_sites:
        raise ValueError(
            f"state has {state.n_sites} sites, params expect {params.n_sites}"
        )


def chain_energy(state: ChainState, params: ChainParams) -> float:
    """Total energy with periodic boundary q_0 = q_N."""
    _check_sites(state, params)
    q, p = state.q, state.p
    stretch = q - np.roll(q, 1)
    return float(0.5 * (np.sum(p * p) / params.mass
                        + params.gamma_couple * np.sum(stretch * stretch)
                        + params.gamma * np.sum(q * q)))


def dispersion(k, params: ChainParams):
    """Mode frequency w(k) = sqrt(gamma/m + 4 (gamma_c/m) sin^2(k a / 2)).

    Defined on the first Brillouin zone |k| <= pi/a; out-of-zone wavenumbers
    are rejected rather than silently aliased.
    """
    k_arr = np.asarray(k, dtype=float)
    if np.any(np.abs(k_arr) > params.zone_boundary * (1.0 + 1e-9)):
        raise ValueError("wavenumber outside the first Brillouin zone")
    w2 = (params.gamma
          + 4.0 * params.gamma_couple * np.sin(0.5 * k_arr * params.spacing) ** 2
          ) / params.mass
    w = np.sqrt(w2)
    return float(w) if np.isscalar(k) or k_arr.ndim == 0 else w


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Complex normal-mode amplitudes in FFT order.

    a_j = (sqrt(m w_j) Q_j + i P_j / sqrt(m w_j)) / sqrt(2) with Q, P the
    unitary DFTs of (q, p); then sum_j w_j |a_j|^2 reproduces the chain
    energy.  A gamma = 0 chain has no oscillator at k = 0; that mode is
    held out as the free drift pair (Q_0, P_0) instead.
    """

    k: np.ndarray
    omega: np.ndarray
    amplitudes: np.ndarray
    mass: float
    time: float = 0.0
    drift: tuple = None
    uniform_frequency: float = None

    def __post_init__(self):
        for name in ("k", "omega", "amplitudes"):
            arr = np.array(getattr(self, name),
                           dtype=complex if name == "amplitudes" else float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.k.shape == self.omega.shape == self.amplitudes.shape):
            raise ValueError("k, omega, amplitudes must share a shape")

    @property
    def n_modes(self) -> int:
        return self.amplitudes.size

    @property
    def rescale_factors(self) -> np.ndarray:
        """lambda_j = w_j / w(0); needs the k = 0 mode to oscillate."""
        w0 = float(self.omega[0])
        if w0 <= 0:
            raise ValueError("rescale factors undefined when omega(0) = 0")
        return self.omega / w0

    def energy(self) -> float:
        """sum_j w_j |a_j|^2 (or w0 sum |a|^2 after rescaling) + drift kinetic."""
        if self.uniform_frequency is not None:
            total = self.uniform_frequency * float(np.sum(np.abs(self.amplitudes) ** 2))
        else:
            total = float(np.sum(self.omega * np.abs(self.amplitudes) ** 2))
        if self.drift is not None:
            total += self.drift[1] ** 2 / (2.0 * self.mass)
        return total


def normal_modes(state: ChainState, params: ChainParams) -> ModeSet:
    """Decompose a chain state into complex mode amplitudes."""
    _check_sites(state, params)
    n = params.n_sites
    root_n = math.sqrt(n)
    bigq = np.fft.fft(state.q) / root_n
    bigp = np.fft.fft(state.p) / root_n
    k = params.wavenumbers
    omega = dispersion(k, params)
    drift = None
    if params.gamma == 0:
        # k = 0 is a free translation mode, not an oscillator
        drift = (float(bigq[0].real), float(bigp[0].real))
        weight = np.sqrt(params.mass * omega[1:])
        amps = np.zeros(n, dtype=complex)
        amps[1:] = (weight * bigq[1:] + 1j * bigp[1:] / weight) / math.sqrt(2.0)
    else:
        weight = np.sqrt(params.mass * omega)
        amps = (weight * bigq + 1j * bigp / weight) / math.sqrt(2.0)
    return ModeSet(k=k, omega=omega, amplitudes=amps, mass=params.mass,
                   time=state.time, drift=drift)


def reconstruct_state(modes: ModeSet, params: ChainParams) -> ChainState:
    """Invert normal_modes: amplitudes (plus drift pair) back to (q, p)."""
    if modes.uniform_frequency is not None:
        raise ValueError("cannot reconstruct from rescaled amplitudes; "
                         "undo the rescaling first")
    n = modes.n_modes
    if n != params.n_sites:
        raise ValueError("mode count does not match params.n_sites")
    a = modes.amplitudes
    mirror = np.conj(a[(-np.arange(n)) % n])
    omega = modes.omega
    bigq = np.zeros(n, dtype=complex)
    bigp = np.zeros(n, dtype=complex)
    osc = omega > 0
    weight = np.sqrt(params.mass * omega[osc])
    bigq[osc] = (a[osc] + mirror[osc]) / (math.sqrt(2.0) * weight)
    bigp[osc] = weight * (a[osc] - mirror[osc]) / (1j * math.sqrt(2.0))
    if modes.drift is not None:
        bigq[0] = modes.drift[0]
        bigp[0] = modes.drift[1]
    root_n = math.sqrt(n)
    q = np.real(np.fft.ifft(bigq * root_n))
    p = np.real(np.fft.ifft(bigp * root_n))
    return ChainState(q, p, modes.time)


def rescale_modes(modes: ModeSet) -> ModeSet:
    """Absorb the dispersion into the amplitudes: a~_j = sqrt(w_j/w0) a_j.

    Afterwards the energy is the single-frequency form w0 sum |a~|^2, so all
    modes share the k = 0 frequency -- and with it a common hbar = 1/(beta w0).
    """
    if modes.uniform_frequency is not None:
        raise ValueError("mode set is already rescaled")
    if modes.drift is not None or float(modes.omega[0]) <= 0:
        raise ValueError("rescaling needs gamma > 0 (no zero-frequency mode)")
    lam = modes.rescale_factors
    return ModeSet(k=modes.k, omega=modes.omega,
                   amplitudes=np.sqrt(lam) * modes.amplitudes,
                   mass=modes.mass, time=modes.time, drift=None,
                   uniform_frequency=float(modes.omega[0]))


def sample_thermal_state(params: ChainParams, beta: float, seed) -> ChainState:
    """Draw (q, p) from the Gibbs weight e^{-beta H}: each mode amplitude is
    an independent complex Gaussian with E|a_j|^2 = 1/(beta w_j)."""
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError("beta must be positive")
    if seed is None:
        raise ValueError("thermal sampling requires a seed")
    omega = dispersion(params.wavenumbers, params)
    if np.any(omega <= 0):
        raise ValueError("thermal sampling needs gamma > 0 (all modes bound)")
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(0.5 / (beta * omega))
    amps = sigma * (rng.standard_normal(params.n_sites)
                    + 1j * rng.standard_normal(params.n_sites))
    modes = ModeSet(k=params.wavenumbers, omega=omega, amplitudes=amps,
                    mass=params.mass)
    return reconstruct_state(modes, params)


# -- integration ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChainTrajectory:
    """Strided leapfrog snapshots: times (S,), q and p (S, N)."""

    times: np.ndarray
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        for name in ("times", "q", "p"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.q.shape != self.p.shape or self.q.shape[0] != self.times.size:
            raise ValueError("inconsistent snapshot shapes")

    @property
    def n_snapshots(self) -> int:
        return self.times.size

    def state(self, index: int) -> ChainState:
        return ChainState(self.q[index], self.p[index], float(self.times[index]))


def _force(q: np.ndarray, params: ChainParams) -> np.ndarray:
    gc = params.gamma_couple
    return -gc * (2.0 * q - np.roll(q, 1) - np.roll(q, -1)) - params.gamma * q


def integrate_chain(state: ChainState, params: ChainParams, duration: float,
                    dt: float, friction: float = 0.0,
                    stride: int = 1) -> ChainTrajectory:
    """Leapfrog (kick-drift-kick) evolution with optional per-site friction.

    Friction enters as the exact momentum decay e^{-alpha dt/2} on either
    side of the drift, so alpha = 0 is bit-for-bit the symplectic scheme.
    The step must satisfy dt < 2/w_max or the scheme is linearly unstable;
    energy growth past 10x the initial value aborts with StabilityError.
    Snapshots are taken every `stride` steps (uniformly spaced; the step
    count is rounded up to a multiple of stride so the run ends on one).
    """
    _check_sites(state, params)
    if not (duration > 0 and math.isfinite(duration)):
        raise ValueError("duration must be positive")
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError("dt must be positive")
    if friction < 0:
        raise ValueError("friction must be >= 0")
    if not (isinstance(stride, int) and stride >= 1):
        raise ValueError("stride must be a positive integer")
    w_max = params.omega_max
    if dt >= 2.0 / w_max:
        raise StabilityError(
            f"dt = {dt:.4g} at or beyond the stability bound 2/w_max = {2.0 / w_max:.4g}"
        )
    n_steps = max(1, math.ceil(duration / dt - 1e-12))
    n_steps = stride * math.ceil(n_steps / stride)
    h = duration / n_steps
    decay = math.exp(-friction * h / 2.0)
    m = params.mass
    q = state.q.copy()
    p = state.p.copy()
    e0 = chain_energy(state, params)
    e_cap = 10.0 * max(e0, 1e-300)
    n_snap = n_steps // stride + 1
    qs = np.empty((n_snap, params.n_sites))
    ps = np.empty_like(qs)
    qs[0], ps[0] = q, p
    s = 1
    for step in range(1, n_steps + 1):
        p += (0.5 * h) * _force(q, params)
        p *= decay
        q += (h / m) * p
        p *= decay
        p += (0.5 * h) * _force(q, params)
        if step % stride == 0:
            qs[s], ps[s] = q, p
            energy = chain_energy(ChainState(qs[s], ps[s]), params)
            if energy > e_cap:
                raise StabilityError(
                    f"energy grew to {energy:.3g} (initial {e0:.3g}); reduce dt"
                )
            s += 1
    times = state.time + h * stride * np.arange(n_snap)
    return ChainTrajectory(times=times, q=qs, p=ps)


def _trajectory_amplitudes(traj: ChainTrajectory, params: ChainParams):
    """Mode amplitudes a_j(t) for every snapshot; zero-frequency columns
    are returned as-is in Q/P form flagged by the mask."""
    n = params.n_sites
    if traj.q.shape[1] != n:
        raise ValueError("trajectory site count does not match params")
    root_n = math.sqrt(n)
    bigq = np.fft.fft(traj.q, axis=1) / root_n
    bigp = np.fft.fft(traj.p, axis=1) / root_n
    omega = dispersion(params.wavenumbers, params)
    osc = omega > 0
    amps = np.zeros(bigq.shape, dtype=complex)
    weight = np.sqrt(params.mass * omega[osc])
    amps[:, osc] = (weight * bigq[:, osc] + 1j * bigp[:, osc] / weight) / math.sqrt(2.0)
    return amps, omega, osc


@dataclass(frozen=True, eq=False)
class DispersionMeasurement:
    """Per-mode spectral peak frequencies against the dispersion formula."""

    k: np.ndarray
    omega_expected: np.ndarray
    omega_measured: np.ndarray      # nan where skipped
    skipped: np.ndarray             # True where no usable peak
    resolution: float               # frequency bin 2 pi / T_window

    @property
    def max_error(self) -> float:
        good = ~self.skipped
        if not np.any(good):
            return math.nan
        return float(np.max(np.abs(self.omega_measured[good]
                                   - self.omega_expected[good])))


def spectral_dispersion(traj: ChainTrajectory, params: ChainParams) -> DispersionMeasurement:
    """Measure w(k) from trajectory data, one FFT peak per mode.

    Each amplitude evolves as a_j(t) ~ e^{-i w_j t}, so the time spectrum
    peaks at signed frequency -w_j; the peak is refined by parabolic
    interpolation on log|X| and reported as a positive frequency.  Modes
    with no excitation (or no curvature at the peak) are flagged skipped.
    """
    n_snap = traj.n_snapshots
    if n_snap < 8:
        raise ValueError("need at least 8 snapshots for a spectrum")
    dt_snap = np.diff(traj.times)
    if not np.allclose(dt_snap, dt_snap[0], rtol=1e-9, atol=0.0):
        raise ValueError("snapshots must be uniformly spaced in time")
    dt_snap = float(dt_snap[0])
    amps, omega, osc = _trajectory_amplitudes(traj, params)
    spectrum = np.fft.fft(amps, axis=0)
    mag = np.abs(spectrum)
    freqs = np.fft.fftfreq(n_snap, d=dt_snap)          # cycles per time
    measured = np.full(params.n_sites, np.nan)
    skipped = np.ones(params.n_sites, dtype=bool)
    scale = float(np.max(mag)) if mag.size else 0.0
    for j in range(params.n_sites):
        if not osc[j]:
            continue
        col = mag[:, j]
        i_peak = int(np.argmax(col))
        peak = col[i_peak]
        if peak <= 1e-12 * max(scale, 1.0):
            continue
        lm = math.log(max(col[(i_peak - 1) % n_snap], 1e-300))
        l0 = math.log(peak)
        lp = math.log(max(col[(i_peak + 1) % n_snap], 1e-300))
        denom = lm - 2.0 * l0 + lp
        if denom >= 0.0:
            continue                                    # no curvature: flat spectrum
        shift = 0.5 * (lm - lp) / denom
        shift = min(0.5, max(-0.5, shift))
        signed_bin = i_peak if i_peak < n_snap - n_snap // 2 else i_peak - n_snap
        nu = (signed_bin + shift) / (n_snap * dt_snap)
        measured[j] = -2.0 * math.pi * nu
        skipped[j] = False
    return DispersionMeasurement(
        k=params.wavenumbers, omega_expected=omega, omega_measured=measured,
        skipped=skipped, resolution=2.0 * math.pi / (n_snap * dt_snap))


# -- continuum limit -----------------------------------------------------------

def continuum_params_for(spacing: float, field_mass: float, n_sites: int = 8,
                         mass: float = 1.0) -> ChainParams:
    """Chain parameters obeying the continuum scaling a^2 gamma_c / m = 1
    with on-site stiffness set by the field mass, gamma/m = M^2."""
    if not (field_mass >= 0):
        raise ValueError("field_mass must be >= 0")
    return ChainParams(n_sites=n_sites, mass=mass,
                       gamma=field_mass ** 2 * mass,
                       gamma_couple=mass / spacing ** 2, spacing=spacing)


def continuum_error(k_phys: float, params: ChainParams) -> float:
    """|w(k)^2 - (k^2 + M^2)|: the lattice dispersion against the continuum
    relativistic one.  Requires the scaling a^2 gamma_c / m = 1, under which
    the leading error is k^4 a^2 / 12."""
    scale = params.spacing ** 2 * params.gamma_couple / params.mass
    if abs(scale - 1.0) > 1e-9:
        raise ValueError("continuum scaling a^2 gamma_c/m = 1 not satisfied")
    m2 = params.gamma / params.mass
    w = dispersion(k_phys, params)
    return abs(w ** 2 - (k_phys ** 2 + m2))


# -- multimode Fock commutators ------------------------------------------------

def _ladder_product(r1: float, r2: float) -> float:
    """Product sqrt(r1) sqrt(r2), collapsing an equal pair to the radicand
    so that a raise-then-lower round trip costs no square-root rounding."""
    if r1 == r2:
        return r1
    return math.sqrt(r1) * math.sqrt(r2)


def mode_commutator_check(n_modes: int, n_levels: int, hbar: float) -> np.ndarray:
    """Residuals max_n |<n|[a_j, a+_l]|n'> - hbar delta_jl| on interior states.

    The ladder operators of distinct modes act on distinct tensor factors,
    so both operator orderings multiply the same two scalars and the
    difference vanishes identically -- in floating point too, since scalar
    multiplication commutes.  On the diagonal the round trips reduce to the
    radicands (n+1) hbar and n hbar before any square root is taken, so the
    residual is exactly zero whenever those products are exact (hbar = 1 in
    particular).  Interior means every occupation stays at least one level
    below the truncation so no raise can overflow.
    """
    if not (isinstance(n_modes, int) and 1 <= n_modes):
        raise ValueError("n_modes must be a positive integer")
    if not (isinstance(n_levels, int) and n_levels >= 2):
        raise ValueError("n_levels must be an integer >= 2")
    if n_modes > 4 or n_levels > 6:
        raise CapacityError("tensor product capped at 4 modes x 6 levels")
    if not (hbar > 0 and math.isfinite(hbar)):
        raise ValueError("hbar must be positive")
    interior = n_levels - 1          # occupations 0 .. n_levels-2 inclusive
    residual = np.zeros((n_modes, n_modes))
    occupations = np.indices((interior,) * n_modes).reshape(n_modes, -1).T
    for j in range(n_modes):
        for l in range(n_modes):
            worst = 0.0
            for occ in occupations:
                n_l = int(occ[l])
                n_j = int(occ[j])
                # apply a+_l then a_j
                forward = _ladder_product((n_l + 1) * hbar,
                                          (n_j + (1 if j == l else 0)) * hbar)
                # apply a_j then a+_l
                backward = _ladder_product(n_j * hbar,
                                           (n_l + (0 if j == l else 1)) * hbar)
                target = forward - backward - (hbar if j == l else 0.0)
                worst = max(worst, abs(target))
            residual[j, l] = worst
    return residual


# -- relaxation ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RelaxReport:
    """Outcome of a friction run: energies, per-mode envelope rates."""

    times: np.ndarray
    energies: np.ndarray
    alpha: float
    target_rate: float              # alpha / 2
    mode_rates: np.ndarray          # nan for unexcited / zero-frequency modes
    energy_ratio: float             # E(T) / E(0)
    expected_ratio: float           # e^{-alpha T}
    monotone: bool                  # non-increasing on snapshots (friction runs)
    energy_drift: float             # max |E - E0| / E0 (alpha = 0 control)

    @property
    def fitted(self) -> np.ndarray:
        return ~np.isnan(self.mode_rates)

    @property
    def worst_rate_error(self) -> float:
        rates = self.mode_rates[self.fitted]
        if rates.size == 0 or self.target_rate == 0:
            return math.nan
        return float(np.max(np.abs(rates - self.target_rate)) / self.target_rate)


def chain_relax(state: ChainState, params: ChainParams, alpha: float,
                duration: float, dt: float, stride: int = 1) -> RelaxReport:
    """Run the chain with friction and report how coherent motion dies away.

    Every mode amplitude should shrink under the envelope e^{-alpha t / 2}
    and the total energy under e^{-alpha t}; with alpha = 0 the same run
    doubles as the energy-conservation control, reported via energy_drift.
    Monotonicity of snapshot energies is checked with a slack covering the
    leapfrog shadow-energy ripple, (w_max dt)^2 / 4 relative.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    traj = integrate_chain(state, params, duration, dt, friction=alpha,
                           stride=stride)
    energies = np.array([
        chain_energy(traj.state(i), params) for i in range(traj.n_snapshots)
    ])
    e0 = energies[0]
    ratio = float(energies[-1] / e0) if e0 > 0 else math.nan
    drift = float(np.max(np.abs(energies - e0)) / e0) if e0 > 0 else 0.0
    span = float(traj.times[-1] - traj.times[0])
    if alpha == 0:
        return RelaxReport(times=traj.times, energies=energies, alpha=0.0,
                           target_rate=0.0,
                           mode_rates=np.full(params.n_sites, np.nan),
                           energy_ratio=ratio, expected_ratio=1.0,
                           monotone=True, energy_drift=drift)
    amps, omega, osc = _trajectory_amplitudes(traj, params)
    mags = np.abs(amps)
    rates = np.full(params.n_sites, np.nan)
    floor = 1e-8 * max(float(np.max(mags[0])), 1e-300)
    for j in range(params.n_sites):
        if osc[j] and mags[0, j] > floor and np.all(mags[:, j] > 0):
            rates[j] = fit_decay_rate(traj.times, mags[:, j])
    slack = (params.omega_max * (traj.times[1] - traj.times[0])
             / max(stride, 1)) ** 2 / 4.0
    increases = np.diff(energies) > energies[:-1] * slack + 1e-300
    monotone = not bool(np.any(increases))
    return RelaxReport(times=traj.times, energies=energies, alpha=alpha,
                       target_rate=alpha / 2.0, mode_rates=rates,
                       energy_ratio=ratio,
                       expected_ratio=math.exp(-alpha * span),
                       monotone=monotone, energy_drift=drift)
