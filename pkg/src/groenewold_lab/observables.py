"""Comparison diagnostics for snapshots and trajectories.

Moments and position-momentum statistics come straight from the matrix
diagonals: <alpha> from the first sub-diagonal, <alpha^2> from the second,
<|alpha|^2> as the symmetric-ordering trace Tr(G (n + 1/2)). Widths use
the first-principles second-moment formulas

    dq^2 = (hbar / m w) (<|alpha|^2> + Re<alpha^2>) - <q>^2,
    dp^2 = (hbar m w)   (<|alpha|^2> - Re<alpha^2>) - <p>^2.

moment_width_variant evaluates an alternative printed form that replaces
Re<alpha^2> with Re{<alpha>^2} in both widths; it degenerates for
displaced states (the radicand can reach zero or go negative, reported as
NaN), which is why the first-principles form is primary and both are
emitted side by side in the CSV outputs.

Spectral diagnostics (extreme eigenvalues, squared negativity) run a full
Hermitian eigendecomposition; the negativity needs the whole negative
subspace anyway, so no extremal iteration is used. break_time scans two
trajectories on a shared time grid for the first first-moment split past
a threshold and returns +inf when they never split; it is a guide, not a
sharp quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .evolve import Trajectory
from .mathkit import hermitian_eig
from .model import ModelSpec

__all__ = [
    "MomentRecord",
    "break_time",
    "mean_alpha_series",
    "moment_track",
    "moment_width_variant",
    "moments",
    "spectrum_extremes",
    "squared_negativity",
]


@dataclass(frozen=True)
class MomentRecord:
    """Moment snapshot: complex moments plus q/p statistics."""

    t: float
    mean_alpha: complex
    alpha2: complex
    abs2: float
    mean_q: float
    mean_p: float
    dq: float
    dp: float


def _as_square(g) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
        raise ConfigError("expected a square matrix")
    return g


def _record(
    t: float,
    mean_alpha: complex,
    alpha2: complex,
    abs2: float,
    model: ModelSpec,
) -> MomentRecord:
    hbar = model.hbar
    m_omega = model.m * model.omega
    mean_q = math.sqrt(2.0 * hbar / m_omega) * mean_alpha.real
    mean_p = math.sqrt(2.0 * hbar * m_omega) * mean_alpha.imag
    var_q = (hbar / m_omega) * (abs2 + alpha2.real) - mean_q**2
    var_p = (hbar * m_omega) * (abs2 - alpha2.real) - mean_p**2
    return MomentRecord(
        t=float(t),
        mean_alpha=complex(mean_alpha),
        alpha2=complex(alpha2),
        abs2=float(abs2),
        mean_q=mean_q,
        mean_p=mean_p,
        dq=math.sqrt(max(var_q, 0.0)),
        dp=math.sqrt(max(var_p, 0.0)),
    )


def moments(g, model: ModelSpec, t: float = 0.0) -> MomentRecord:
    """Moment snapshot of one matrix.

    <alpha>   = Tr(G a)   = sum_k sqrt(k+1) G[k+1, k],
    <alpha^2> = Tr(G a^2) = sum_k sqrt((k+1)(k+2)) G[k+2, k],
    <|alpha|^2> = Tr(G (n + 1/2))  (symmetric ordering).
    """
    g = _as_square(g)
    dim = g.shape[0]
    k = np.arange(dim - 1, dtype=float)
    mean_alpha = complex(np.sqrt(k + 1.0) @ np.diagonal(g, offset=-1)) if dim > 1 else 0.0j
    if dim > 2:
        k2 = np.arange(dim - 2, dtype=float)
        alpha2 = complex(np.sqrt((k2 + 1.0) * (k2 + 2.0)) @ np.diagonal(g, offset=-2))
    else:
        alpha2 = 0.0j
    abs2 = float(np.real((np.arange(dim) + 0.5) @ np.diagonal(g)))
    return _record(t, mean_alpha, alpha2, abs2, model)


def moment_width_variant(record: MomentRecord, model: ModelSpec) -> tuple[float, float]:
    """Widths from the variant formula using Re{<alpha>^2}.

    Returns (dq, dp) with NaN where the radicand is negative; for
    displaced Gaussians the radicand crosses zero, making the degeneracy
    of this form visible as data next to the primary widths.
    """
    hbar = model.hbar
    m_omega = model.m * model.omega
    bracket = record.abs2 - (record.mean_alpha**2).real
    var_q = (hbar / m_omega) * bracket - record.mean_q**2
    var_p = (hbar * m_omega) * bracket - record.mean_p**2
    dq = math.sqrt(var_q) if var_q >= 0.0 else float("nan")
    dp = math.sqrt(var_p) if var_p >= 0.0 else float("nan")
    return dq, dp


def moment_track(traj: Trajectory) -> list[MomentRecord]:
    """MomentRecord at every stored time of a trajectory."""
    dim = traj.dim
    mean = mean_alpha_series(traj)
    if dim > 2:
        k2 = np.arange(dim - 2, dtype=float)
        alpha2 = traj.diagonal_history(2) @ np.sqrt((k2 + 1.0) * (k2 + 2.0))
    else:
        alpha2 = np.zeros(len(traj.times), dtype=complex)
    abs2 = np.real(traj.diagonal_history(0) @ (np.arange(dim) + 0.5))
    return [
        _record(t, mean[i], alpha2[i], abs2[i], traj.model)
        for i, t in enumerate(traj.times)
    ]


def mean_alpha_series(traj: Trajectory) -> np.ndarray:
    """<alpha>(t) along a trajectory, one complex value per time."""
    if traj.dim < 2:
        return np.zeros(len(traj.times), dtype=complex)
    k = np.arange(traj.dim - 1, dtype=float)
    return traj.diagonal_history(1) @ np.sqrt(k + 1.0)


def spectrum_extremes(g, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k largest (descending) and k smallest (ascending) eigenvalues.

    The input must be Hermitian; the full spectrum comes from one
    Hermitian eigendecomposition.
    """
    g = _as_square(g)
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ConfigError("k must be an integer")
    if not 1 <= k <= g.shape[0]:
        raise ConfigError(f"k must lie in [1, {g.shape[0]}]")
    w, _ = hermitian_eig(g)
    return w[::-1][:k].copy(), w[:k].copy()


def squared_negativity(g) -> float:
    """Sum of squared negative eigenvalues; 0 for positive semidefinite."""
    g = _as_square(g)
    w = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
    neg = w[w < 0.0]
    return float(neg @ neg)


def break_time(traj_a: Trajectory, traj_b: Trajectory, threshold: float) -> float:
    """First shared time with |<alpha>_A - <alpha>_B| > threshold.

    Returns +inf when the first moments never split past the threshold
    on the stored grid. The value is grid-resolution limited: a guide,
    not a sharp quantity.
    """
    if not (isinstance(threshold, (int, float)) and math.isfinite(threshold) and threshold > 0):
        raise ConfigError("threshold must be a positive finite number")
    ta, tb = traj_a.times, traj_b.times
    if len(ta) != len(tb) or not np.array_equal(ta, tb):
        raise ConfigError("trajectories must share one time grid")
    gap = np.abs(mean_alpha_series(traj_a) - mean_alpha_series(traj_b))
    over = np.flatnonzero(gap > threshold)
    if over.size == 0:
        return math.inf
    return float(ta[over[0]])
