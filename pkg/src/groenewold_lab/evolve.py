"""Time evolution of block matrices under the four flows.

Each angular sector evolves independently: the sector vector g (a single
matrix diagonal) obeys dg/dt = L g with L from the generators module. A
BlockPropagator factors L once and reuses the factorization for every
requested time:

- "identity"        zero generator (the frozen nu = 0 sector),
- "diagonal"        exactly diagonal generator (the quantum flow); the
                    stored phases are the diagonal itself, no eigensolve,
- "unitary"         i L is Hermitian to float precision, so exp(t L) is
                    unitary and comes from one Hermitian eigensolve,
- "diagonalizable"  general eigensolve, accepted when the eigenvector
                    basis is well conditioned (below 1e8),
- "stepping"        scaled matrix exponentials step through the sorted
                    time grid (last resort, never hit by the four flows).

Requests at t = 0 return the initial vector bit-exactly on every route.

The module also carries two continuum references that never touch the
number basis: classical_moment_quadrature integrates <alpha^m> under the
Liouville flow of the Gaussian density by a radial Bessel quadrature, and
whorl_field evaluates that density on a position-momentum grid, each
point rotated at the radius-dependent classical rate. Both serve as
independent oracles for the matrix route.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, QuadratureNotConverged
from .generators import all_generator_blocks
from .mathkit import bessel_i_scaled, composite_gauss_legendre_rule, expm
from .model import ModelSpec
from .states import GaussianState

__all__ = [
    "BlockPropagator",
    "Trajectory",
    "block_propagator",
    "classical_moment_quadrature",
    "evolve",
    "propagate_block",
    "whorl_field",
]

_HERMITIAN_TOL = 1e-12
_CONDITION_LIMIT = 1e8


class BlockPropagator:
    """Factored exp(t L) for one sector generator."""

    def __init__(self, L: np.ndarray):
        L = np.asarray(L, dtype=complex)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ConfigError("sector generator must be a square matrix")
        self.L = L
        n = L.shape[0]
        scale = float(np.abs(L).max()) if n else 0.0
        if scale == 0.0:
            self.route = "identity"
            return
        if float(np.abs(L - np.diag(np.diagonal(L))).max()) == 0.0:
            self.route = "diagonal"
            self._d = np.diagonal(L).copy()
            return
        a = 1j * L
        if float(np.abs(a - a.conj().T).max()) <= _HERMITIAN_TOL * max(1.0, scale):
            h = 0.5 * (a + a.conj().T)
            if float(np.abs(h.imag).max()) == 0.0:
                h = h.real  # real symmetric input takes the faster LAPACK path
            w, v = np.linalg.eigh(h)
            self.route = "unitary"
            self._w = w
            self._v = v
            return
        w, v = np.linalg.eig(L)
        if np.linalg.cond(v) < _CONDITION_LIMIT:
            self.route = "diagonalizable"
            self._w = w
            self._v = v
            self._vinv = np.linalg.inv(v)
            return
        self.route = "stepping"

    def at(self, g0: np.ndarray, t: float) -> np.ndarray:
        return self.trajectory(g0, [t])[0]

    def trajectory(self, g0: np.ndarray, times) -> np.ndarray:
        """Rows exp(t L) g0 for each requested time (sorted, finite)."""
        times = _check_times(times)
        g0 = np.asarray(g0, dtype=complex)
        if g0.shape != (self.L.shape[0],):
            raise ConfigError(
                f"initial sector vector has length {g0.shape}, "
                f"generator is {self.L.shape[0]}x{self.L.shape[0]}"
            )
        out = np.empty((len(times), len(g0)), dtype=complex)
        if self.route == "identity":
            out[:] = g0
            return out
        if self.route == "diagonal":
            for i, t in enumerate(times):
                out[i] = g0 if t == 0.0 else np.exp(t * self._d) * g0
            return out
        if self.route == "unitary":
            c = self._v.conj().T @ g0
            for i, t in enumerate(times):
                out[i] = g0 if t == 0.0 else self._v @ (np.exp(-1j * t * self._w) * c)
            return out
        if self.route == "diagonalizable":
            c = self._vinv @ g0
            for i, t in enumerate(times):
                out[i] = g0 if t == 0.0 else self._v @ (np.exp(t * self._w) * c)
            return out
        g = g0
        prev = 0.0
        steps: dict[float, np.ndarray] = {}
        for i, t in enumerate(times):
            dt = t - prev
            if dt != 0.0:
                step = steps.get(dt)
                if step is None:
                    step = expm(self.L * dt)
                    steps[dt] = step
                g = step @ g
            prev = t
            out[i] = g0 if t == 0.0 else g
        return out


def block_propagator(L: np.ndarray) -> BlockPropagator:
    return BlockPropagator(L)


def propagate_block(L: np.ndarray, g0: np.ndarray, times) -> np.ndarray:
    """One-shot exp(t L) g0 over a time grid; rows follow `times`."""
    return BlockPropagator(L).trajectory(g0, times)


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ConfigError("times must be a non-empty 1-D array")
    if not np.all(np.isfinite(t)):
        raise ConfigError("times must be finite")
    if np.any(np.diff(t) < 0.0):
        raise ConfigError("times must be sorted in increasing order")
    return t


@dataclass(frozen=True)
class Trajectory:
    """Sector histories of one flow over a common time grid.

    history[nu] has shape (len(times), N - |nu|); nu > 0 rows hold the
    sub-diagonal G[k + nu, k], nu < 0 the matching super-diagonal. In
    "moments" mode only |nu| <= 2 is propagated, enough for first and
    second moments; "full" mode carries every sector and can reassemble
    complete matrices.
    """

    dynamics: str
    model: ModelSpec
    times: np.ndarray
    mode: str
    dim: int
    history: dict = field(repr=False)

    def diagonal_history(self, nu: int) -> np.ndarray:
        if nu not in self.history:
            raise ConfigError(
                f"sector {nu} was not propagated (mode='{self.mode}', dim={self.dim})"
            )
        return self.history[nu]

    def matrix(self, index: int) -> np.ndarray:
        """Reassembled full matrix at times[index]."""
        if self.mode != "full":
            raise ConfigError("matrix() needs mode='full'")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        k = np.arange(self.dim)
        for nu in range(self.dim):
            rows = self.history[nu][index]
            out[k[: self.dim - nu] + nu, k[: self.dim - nu]] = rows
            if nu:
                out[k[: self.dim - nu], k[: self.dim - nu] + nu] = self.history[-nu][index]
        return out

    def trace_series(self) -> np.ndarray:
        return self.history[0].sum(axis=1)

    def purity_series(self) -> np.ndarray:
        """Tr G(t)^2 = sum_nu sum_k g_nu g_-nu, exact for any matrix."""
        if self.mode != "full":
            raise ConfigError("purity_series() needs mode='full'")
        total = np.zeros(len(self.times), dtype=complex)
        for nu in range(-self.dim + 1, self.dim):
            total += (self.history[nu] * self.history[-nu]).sum(axis=1)
        return total

    def hermiticity_series(self) -> np.ndarray:
        """max_nu max_k |g_-nu - conj(g_nu)| per time."""
        out = np.zeros(len(self.times))
        for nu in range(self.dim):
            if nu not in self.history or -nu not in self.history:
                continue
            dev = np.abs(self.history[-nu] - np.conj(self.history[nu])).max(axis=1)
            out = np.maximum(out, dev)
        return out


_PROPAGATOR_CACHE: dict = {}
_PROPAGATOR_CACHE_LIMIT = 8


def _propagators(dynamics: str, model: ModelSpec, nmax: int, guard: int, check: bool, nu_top: int):
    key = (dynamics, model, nmax, guard, check, nu_top)
    hit = _PROPAGATOR_CACHE.get(key)
    if hit is not None:
        return hit
    blocks = all_generator_blocks(dynamics, model, nmax, guard=guard, check=check, nu_top=nu_top)
    props = [BlockPropagator(b) for b in blocks]
    if len(_PROPAGATOR_CACHE) >= _PROPAGATOR_CACHE_LIMIT:
        _PROPAGATOR_CACHE.pop(next(iter(_PROPAGATOR_CACHE)))
    _PROPAGATOR_CACHE[key] = props
    return props


def evolve(
    g0,
    dynamics: str,
    model: ModelSpec,
    times,
    *,
    mode: str = "full",
    guard: int = 16,
    check: bool = True,
) -> Trajectory:
    """Propagate a block matrix under one of the four flows.

    g0 may be a GroenewoldMatrix or a plain square complex array. The
    negative sectors use L_{-nu} = conj(L_nu), so no hermiticity of g0 is
    assumed; Hermitian inputs stay Hermitian to rounding.
    """
    g0 = np.asarray(g0, dtype=complex)
    if g0.ndim != 2 or g0.shape[0] != g0.shape[1] or g0.shape[0] < 1:
        raise ConfigError("initial matrix must be square and non-empty")
    if mode not in ("full", "moments"):
        raise ConfigError("mode must be 'full' or 'moments'")
    times = _check_times(times)
    dim = g0.shape[0]
    nu_top = dim - 1 if mode == "full" else min(2, dim - 1)
    props = _propagators(dynamics, model, dim, guard, check, nu_top)
    history: dict[int, np.ndarray] = {}
    for nu in range(nu_top + 1):
        p = props[nu]
        history[nu] = p.trajectory(np.diagonal(g0, offset=-nu), times)
        if nu:
            minus = np.conj(p.trajectory(np.conj(np.diagonal(g0, offset=nu)), times))
            history[-nu] = minus
    return Trajectory(
        dynamics=dynamics,
        model=model,
        times=times,
        mode=mode,
        dim=dim,
        history=history,
    )


# ---------------------------------------------------------------------------
# Continuum references (no number basis)

def _rate_prime_coeffs(model: ModelSpec) -> np.ndarray:
    hpp = model.classical_symbol().derivative().derivative()
    return (model.omega / model.mu) * np.array([float(c) for c in hpp.coeffs])


def classical_moment_quadrature(
    m: int,
    state: GaussianState,
    model: ModelSpec,
    t: float,
    *,
    tol: float = 1e-9,
) -> complex:
    """<alpha^m> under the Liouville flow of the Gaussian density.

    The angular integral is a modified Bessel function, leaving a radial
    integrand 2 kappa r^{m+1} e^{-kappa (r-a0)^2} ive(m, 2 kappa r a0)
    e^{-i m t Omega(r^2)} on the 8-sigma support of the Gaussian. Panels
    track the phase derivative so each holds a bounded phase increment;
    the panel count is then doubled and a relative move above tol raises
    QuadratureNotConverged. t and m enter only through the phase, so
    m = 0 returns the conserved mass.
    """
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise ConfigError("moment order m must be a non-negative integer")
    if not np.isfinite(t):
        raise ConfigError("time must be finite")
    kappa = state.kappa
    a0 = abs(complex(state.alpha0))
    phi0 = np.angle(complex(state.alpha0)) if a0 else 0.0
    width = 8.0 / np.sqrt(kappa)
    lo, hi = max(0.0, a0 - width), a0 + width
    # phase derivative d/dr [m t Omega(r^2)] = 2 m t r Omega'(r^2)
    rp = _rate_prime_coeffs(model)
    probe = np.linspace(lo, hi, 257)
    theta_prime = 2.0 * m * abs(t) * probe * np.abs(
        np.polynomial.polynomial.polyval(probe**2, rp)
    )
    panels = max(8, int(np.ceil((hi - lo) * float(theta_prime.max()) / 1.5)))
    panels = min(panels, 4096)

    def integrate(n_panels: int) -> complex:
        rule = composite_gauss_legendre_rule(lo, hi, n_panels, order=12)
        r = rule.nodes
        u = r * r
        phase = np.exp(-1j * m * t * model.classical_rate(u))
        f = (
            2.0
            * kappa
            * r ** (m + 1)
            * np.exp(-kappa * (r - a0) ** 2)
            * bessel_i_scaled(m, 2.0 * kappa * r * a0)
            * phase
        )
        return complex(np.sum(rule.weights * f))

    first = integrate(panels)
    second = integrate(2 * panels)
    if abs(second - first) > tol * max(1.0, abs(second)):
        raise QuadratureNotConverged(
            f"moment m={m} at t={t}: panel doubling moved the integral by "
            f"{abs(second - first):.3e}"
        )
    return np.exp(1j * m * phi0) * second


def whorl_field(
    state: GaussianState,
    model: ModelSpec,
    t: float,
    qs: np.ndarray,
    ps: np.ndarray,
) -> np.ndarray:
    """Classically evolved Gaussian density on a position-momentum grid.

    Every phase-space point rotates at the radius-dependent rate
    Omega(|alpha|^2), so the density at time t is the initial Gaussian
    kappa e^{-kappa |alpha e^{+i Omega t} - alpha0|^2} / (2 pi hbar),
    evaluated pointwise; |alpha| is conserved, the origin is a fixed
    point, and the map is area-preserving so the mass stays 1. Returns
    values[i, j] = W(qs[j], ps[i]).
    """
    qs = np.asarray(qs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if qs.ndim != 1 or ps.ndim != 1 or qs.size == 0 or ps.size == 0:
        raise ConfigError("qs and ps must be non-empty 1-D arrays")
    if not np.isfinite(t):
        raise ConfigError("time must be finite")
    hbar = model.hbar
    s = np.sqrt(model.m * model.omega)
    qgrid, pgrid = np.meshgrid(qs, ps)
    alpha = (s * qgrid + 1j * pgrid / s) / np.sqrt(2.0 * hbar)
    u = np.abs(alpha) ** 2
    rotated = alpha * np.exp(1j * model.classical_rate(u) * t)
    kappa = state.kappa
    return (
        kappa
        / (2.0 * np.pi * hbar)
        * np.exp(-kappa * np.abs(rotated - complex(state.alpha0)) ** 2)
    )
