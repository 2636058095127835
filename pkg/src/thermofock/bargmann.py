"""Numerics on the space of holomorphic functions square-integrable against
the thermal Gaussian measure.

The measure is dmu = exp(-|z|^2/hbar) * (2/h) dx dy with h = 2 pi hbar, so
the total mass is 1 and the monomials e_n(z) = z^n / sqrt(n! hbar^n) form an
orthonormal basis.  hbar is the bath parameter 1/(beta*omega).

Two independent routes are provided for every inner product: a Gauss-Laguerre
x uniform-angle quadrature that is *exact* on truncated expansions (not an
approximation), and a plain Monte Carlo estimate with a standard error, drawn
from the Gaussian itself.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, roots_laguerre

from .errors import TruncationError
from .phasespace import OscillatorParams

__all__ = [
    "BargmannMeasure",
    "FockVector",
    "MCEstimate",
    "OperatorMatrix",
    "SpanResidual",
    "basis_eval",
    "inner_product",
    "gram_quadrature",
    "gram_montecarlo",
    "coherent_vector",
    "ladder",
    "ladder_matrix",
    "quadrature_operators",
    "hamiltonian_matrix",
    "commutator",
    "kernel_eval",
    "coherent_span_residual",
    "spread_points",
]

DEFAULT_TRUNCATION = 32

# direct monomial evaluation is safe up to 20!; past that use log-gamma
_DIRECT_N = 20


def _check_hbar(hbar: float) -> float:
    hbar = float(hbar)
    if not (hbar > 0 and math.isfinite(hbar)):
        raise ValueError("hbar must be positive and finite")
    return hbar


@functools.lru_cache(maxsize=64)
def _quad_grid(hbar: float, n_max: int):
    """Nodes/weights exact for conj(f)*g with f, g truncated at n_max.

    Polar factorization z = sqrt(hbar s) e^{i phi}: Gauss-Laguerre in s with
    n_max + 1 nodes (exact for radial degree <= 2 n_max + 1) times a uniform
    angular grid with 2 n_max + 3 points (exact for harmonics |m| <= 2n_max+2).
    """
    n_radial = n_max + 1
    n_angular = 2 * n_max + 3
    s, w = roots_laguerre(n_radial)
    phi = 2.0 * np.pi * np.arange(n_angular) / n_angular
    r = np.sqrt(hbar * s)
    z = r[:, None] * np.exp(1j * phi)[None, :]
    weights = np.repeat(w / n_angular, n_angular)
    return z.ravel(), weights


@dataclass(frozen=True)
class BargmannMeasure:
    """The Gaussian probability measure exp(-|z|^2/hbar) (2/h) dx dy."""

    hbar: float

    def __post_init__(self):
        _check_hbar(self.hbar)

    def sample(self, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        """Draw z with independent N(0, hbar/2) real and imaginary parts."""
        sigma = math.sqrt(self.hbar / 2.0)
        x = rng.normal(0.0, sigma, n_samples)
        y = rng.normal(0.0, sigma, n_samples)
        return x + 1j * y

    def quadrature(self, n_max: int):
        return _quad_grid(self.hbar, int(n_max))


def basis_eval(n: int, z: complex, hbar: float) -> complex:
    """Evaluate e_n(z) = z^n / sqrt(n! hbar^n).

    Uses the direct formula for n <= 20 and a log-gamma stabilized form
    beyond, so large-n evaluations neither overflow nor lose the phase.
    """
    hbar = _check_hbar(hbar)
    n = int(n)
    if n < 0:
        raise ValueError("n must be >= 0")
    z = complex(z)
    if n == 0:
        return 1.0 + 0j
    if z == 0:
        return 0j
    if n <= _DIRECT_N:
        return z ** n / math.sqrt(math.factorial(n) * hbar ** n)
    log_mag = n * math.log(abs(z)) - 0.5 * gammaln(n + 1) - 0.5 * n * math.log(hbar)
    phase = n * math.atan2(z.imag, z.real)
    return complex(math.exp(log_mag) * math.cos(phase), math.exp(log_mag) * math.sin(phase))


def _basis_matrix(z: np.ndarray, n_max: int, hbar: float) -> np.ndarray:
    """Rows e_0..e_{n_max} evaluated on the points z (stable recurrence)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((n_max + 1, z.size), dtype=complex)
    out[0] = 1.0
    flat = z.ravel()
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * flat / math.sqrt(n * hbar)
    return out


@dataclass(frozen=True, eq=False)
class FockVector:
    """Truncated expansion sum_n coeffs[n] e_n over the measure with `hbar`.

    `tail_mass` records probability that leaked past the truncation when the
    vector came from expanding an analytic function (None otherwise).
    """

    coeffs: np.ndarray
    hbar: float
    tail_mass: float = None

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coeffs must be a non-empty 1d array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coeffs must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        _check_hbar(self.hbar)

    @classmethod
    def basis(cls, n: int, n_max: int, hbar: float) -> "FockVector":
        if not 0 <= n <= n_max:
            raise ValueError("need 0 <= n <= n_max")
        c = np.zeros(n_max + 1, dtype=complex)
        c[n] = 1.0
        return cls(c, hbar)

    @property
    def truncation(self) -> int:
        return self.coeffs.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "FockVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.coeffs / n, self.hbar, self.tail_mass)

    def evaluate(self, z):
        """Pointwise value sum_n c_n e_n(z); z may be scalar or an array."""
        z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
        basis = _basis_matrix(z_arr, self.truncation, self.hbar)
        vals = self.coeffs @ basis
        if np.isscalar(z) or np.asarray(z).ndim == 0:
            return complex(vals[0])
        return vals.reshape(np.asarray(z).shape)


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo value with its standard error."""

    value: complex
    stderr: float
    samples: int


def _compatible(f: FockVector, g: FockVector):
    if f.hbar != g.hbar:
        raise ValueError("hbar mismatch between vectors")
    if f.truncation != g.truncation:
        raise ValueError("truncation mismatch between vectors")


def inner_product(f: FockVector, g: FockVector, method: str = "quadrature",
                  samples: int = 200_000, seed=None):
    """(f, g) = integral of conj(f) g against the Gaussian measure.

    Parameters
    ----------
    method : "quadrature" or "montecarlo"
        The quadrature route is exact (to rounding) for truncated vectors;
        the Monte Carlo route returns an :class:`MCEstimate` whose stderr is
        estimated from the same sample.
    samples, seed : Monte Carlo controls; a seed is mandatory there.
    """
    _compatible(f, g)
    if method == "quadrature":
        z, w = _quad_grid(f.hbar, f.truncation)
        basis = _basis_matrix(z, f.truncation, f.hbar)
        fv = f.coeffs @ basis
        gv = g.coeffs @ basis
        return complex(np.sum(w * np.conj(fv) * gv))
    if method == "montecarlo":
        if seed is None:
            raise ValueError("montecarlo inner_product requires a seed")
        if samples < 2:
            raise ValueError("need at least 2 samples")
        rng = np.random.default_rng(seed)
        measure = BargmannMeasure(f.hbar)
        total = 0j
        total_sq = 0.0
        done = 0
        while done < samples:
            chunk = min(100_000, samples - done)
            z = measure.sample(chunk, rng)
            basis = _basis_matrix(z, f.truncation, f.hbar)
            x = np.conj(f.coeffs @ basis) * (g.coeffs @ basis)
            total += np.sum(x)
            total_sq += float(np.sum(np.abs(x) ** 2))
            done += chunk
        mean = total / samples
        var = max(total_sq / samples - abs(mean) ** 2, 0.0)
        return MCEstimate(complex(mean), math.sqrt(var / samples), samples)
    raise ValueError(f"unknown method {method!r}")


def gram_quadrature(n_max: int, hbar: float) -> np.ndarray:
    """Gram matrix (e_i, e_j), i, j <= n_max, by the exact quadrature."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    hbar = _check_hbar(hbar)
    z, w = _quad_grid(hbar, n_max)
    basis = _basis_matrix(z, n_max, hbar)
    return (basis.conj() * w) @ basis.T


def gram_montecarlo(n_max: int, hbar: float, samples: int, seed):
    """Monte Carlo Gram matrix with a per-entry standard error.

    Returns (G, se); the sample mean of conj(e_i) e_j over draws from the
    Gaussian measure, and sqrt(var/samples) entrywise.  Constant entries
    (i = j = 0) have zero variance by construction.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    hbar = _check_hbar(hbar)
    if seed is None:
        raise ValueError("montecarlo gram requires a seed")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    measure = BargmannMeasure(hbar)
    dim = n_max + 1
    acc = np.zeros((dim, dim), dtype=complex)
    acc_sq = np.zeros((dim, dim))
    done = 0
    while done < samples:
        chunk = min(100_000, samples - done)
        z = measure.sample(chunk, rng)
        basis = _basis_matrix(z, n_max, hbar)
        acc += basis.conj() @ basis.T
        sq = np.abs(basis) ** 2
        acc_sq += sq @ sq.T
        done += chunk
    mean = acc / samples
    var = np.maximum(acc_sq / samples - np.abs(mean) ** 2, 0.0)
    return mean, np.sqrt(var / samples)


def coherent_vector(c: complex, n_max: int = DEFAULT_TRUNCATION, hbar: float = 1.0,
                    tail_tol: float = None) -> FockVector:
    """Expansion of exp(c z) in the orthonormal basis: c_n = (c sqrt(hbar))^n/sqrt(n!).

    The squared norm of the full function is exp(hbar |c|^2); `tail_mass` on
    the returned vector is the part of it lost to the truncation.  If
    `tail_tol` is given and the tail exceeds it, a TruncationError is raised.
    """
    hbar = _check_hbar(hbar)
    c = complex(c)
    coeffs = np.empty(n_max + 1, dtype=complex)
    coeffs[0] = 1.0
    amp = c * math.sqrt(hbar)
    for n in range(1, n_max + 1):
        coeffs[n] = coeffs[n - 1] * amp / math.sqrt(n)
    tail = max(math.exp(hbar * abs(c) ** 2) - float(np.sum(np.abs(coeffs) ** 2)), 0.0)
    if tail_tol is not None and tail > tail_tol:
        raise TruncationError(
            f"coherent tail mass {tail:.3e} exceeds tolerance {tail_tol:.3e} "
            f"at truncation {n_max}"
        )
    return FockVector(coeffs, hbar, tail_mass=tail)


def ladder(kind: str, f: FockVector) -> FockVector:
    """Apply the lowering ("annihilate") or raising ("create") operator.

    Lowering maps e_n -> sqrt(n hbar) e_{n-1}.  Raising maps
    e_n -> sqrt((n+1) hbar) e_{n+1} and refuses to act when the top
    coefficient is occupied: silently dropping it would corrupt the state.
    """
    n_max = f.truncation
    hbar = f.hbar
    out = np.zeros_like(f.coeffs)
    if kind == "annihilate":
        ns = np.arange(1, n_max + 1)
        out[:-1] = f.coeffs[1:] * np.sqrt(ns * hbar)
    elif kind == "create":
        if f.coeffs[-1] != 0:
            raise TruncationError(
                "create would push the top coefficient past the truncation"
            )
        ns = np.arange(1, n_max + 1)
        out[1:] = f.coeffs[:-1] * np.sqrt(ns * hbar)
    else:
        raise ValueError("kind must be 'annihilate' or 'create'")
    return FockVector(out, hbar)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """A matrix in the e_n basis with a human-readable label."""

    label: str
    matrix: np.ndarray
    hbar: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        _check_hbar(self.hbar)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, f: FockVector) -> FockVector:
        if f.coeffs.size != self.dim:
            raise ValueError("dimension mismatch")
        if f.hbar != self.hbar:
            raise ValueError("hbar mismatch")
        return FockVector(self.matrix @ f.coeffs, self.hbar)


def ladder_matrix(kind: str, n_max: int, hbar: float) -> OperatorMatrix:
    hbar = _check_hbar(hbar)
    amp = np.sqrt(np.arange(1, n_max + 1) * hbar)
    m = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    if kind == "annihilate":
        m[np.arange(n_max), np.arange(1, n_max + 1)] = amp
    elif kind == "create":
        m[np.arange(1, n_max + 1), np.arange(n_max)] = amp
    else:
        raise ValueError("kind must be 'annihilate' or 'create'")
    return OperatorMatrix(kind, m, hbar)


def quadrature_operators(hbar: float, n_max: int):
    """Position and momentum matrices q = (a+ + a)/sqrt2, p = i (a+ - a)/sqrt2.

    Their commutator equals i hbar times the identity on the interior block
    (rows and columns below n_max); the top level feels the truncation.
    """
    a = ladder_matrix("annihilate", n_max, hbar).matrix
    c = ladder_matrix("create", n_max, hbar).matrix
    s = 2.0 ** -0.5
    q = OperatorMatrix("position", (c + a) * s, hbar)
    p = OperatorMatrix("momentum", 1j * (c - a) * s, hbar)
    return q, p


def hamiltonian_matrix(ordering: str, params: OscillatorParams, hbar: float,
                       n_max: int) -> OperatorMatrix:
    """Diagonal oscillator Hamiltonian.

    "normal" ordering gives energies hbar w n; "symmetric" ordering adds the
    half-quantum and is built additively as normal + hbar w / 2 so the
    difference of the two matrices is that constant shift, exactly.
    """
    hbar = _check_hbar(hbar)
    base = hbar * params.omega * np.arange(n_max + 1, dtype=float)
    if ordering == "normal":
        diag = base
    elif ordering == "symmetric":
        diag = base + hbar * params.omega / 2.0
    else:
        raise ValueError("ordering must be 'normal' or 'symmetric'")
    return OperatorMatrix(f"hamiltonian-{ordering}", np.diag(diag.astype(complex)), hbar)


def commutator(a, b) -> np.ndarray:
    """[A, B] for OperatorMatrix or plain ndarray arguments."""
    am = a.matrix if isinstance(a, OperatorMatrix) else np.asarray(a)
    bm = b.matrix if isinstance(b, OperatorMatrix) else np.asarray(b)
    return am @ bm - bm @ am


def kernel_eval(c: complex, psi: FockVector, mismatch_tol: float = 1e-10) -> complex:
    """Reproducing-kernel evaluation: (f_c, psi) = psi(hbar * conj(c)).

    Computes both routes -- the coefficient pairing with the coherent vector
    and the direct pointwise evaluation -- and insists they agree to
    `mismatch_tol` (relative), which catches overflow or truncation damage.
    Returns the pairing value.
    """
    c = complex(c)
    n_max = psi.truncation
    hbar = psi.hbar
    amp = np.conj(c) * math.sqrt(hbar)
    coh = np.empty(n_max + 1, dtype=complex)
    coh[0] = 1.0
    # overflow here is caught by the route comparison below, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            coh[n] = coh[n - 1] * amp / math.sqrt(n)
        paired = complex(np.sum(coh * psi.coeffs))
        direct = psi.evaluate(hbar * np.conj(c))
    scale = max(1.0, abs(direct))
    if not (abs(paired - direct) <= mismatch_tol * scale):
        raise TruncationError(
            f"kernel routes disagree: pairing {paired!r} vs direct {direct!r}"
        )
    return paired


@dataclass(frozen=True)
class SpanResidual:
    """Least-squares distance from a state to a span of coherent vectors."""

    residual: float
    gram_norm: float
    smallest_eigenvalue: float
    ill_conditioned: bool
    coefficients: np.ndarray


def coherent_span_residual(psi: FockVector, points, tikhonov_scale: float = 1e-12
                           ) -> SpanResidual:
    """min over beta of || psi - sum_k beta_k f_{c_k} || in the truncated space.

    The normal equations are Tikhonov-regularized with lambda =
    tikhonov_scale * ||Gram||, per the near-degeneracy of close coherent
    points.  A Gram matrix singular beyond the regularization is flagged,
    not raised.
    """
    points = [complex(c) for c in points]
    if len(points) < 1:
        raise ValueError("need at least one coherent point")
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if points[i] == points[j]:
                raise ValueError("coherent points must be pairwise distinct")
    n_max = psi.truncation
    cols = np.stack(
        [coherent_vector(c, n_max, psi.hbar).coeffs for c in points], axis=1
    )
    gram = cols.conj().T @ cols
    rhs = cols.conj().T @ psi.coeffs
    gram_norm = float(np.linalg.norm(gram, 2))
    lam = tikhonov_scale * gram_norm
    eigs = np.linalg.eigvalsh(gram)
    beta = np.linalg.solve(gram + lam * np.eye(len(points)), rhs)
    resid = float(np.linalg.norm(psi.coeffs - cols @ beta))
    return SpanResidual(
        residual=resid,
        gram_norm=gram_norm,
        smallest_eigenvalue=float(eigs[0]),
        ill_conditioned=bool(eigs[0] < lam),
        coefficients=beta,
    )


def spread_points(n: int, radius: float, center: complex = 0j) -> np.ndarray:
    """n well-separated points in a disk (golden-angle spiral), deterministic."""
    if n < 1 or radius <= 0:
        raise ValueError("need n >= 1 and radius > 0")
    k = np.arange(n, dtype=float)
    r = radius * np.sqrt((k + 0.5) / n)
    theta = k * (math.pi * (3.0 - math.sqrt(5.0)))
    return center + r * np.exp(1j * theta)
