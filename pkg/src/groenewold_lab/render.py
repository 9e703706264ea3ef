"""Phase-space fields and their file formats.

wigner_field synthesizes the phase-space symbol of a block matrix on a
rectangular grid, diagonal by diagonal: sector nu contributes a radial
profile (a Laguerre series evaluated by the three-term recurrence in the
degree) times the angular phasor e^(-i nu phi). The radial weight
x^(nu/2) e^(-x/2) / sqrt(nu!) is fused into one exponential so high
sectors neither overflow nor underflow on the way to an order-one value.

Fields carry their own mass (Riemann sum times cell area) and a boolean
mask of the strictly negative cells. A state whose support leaks off the
grid is reported with BoundaryMassWarning, never an error.

File formats: binary PGM (P5, maxval 255) with the affine value map

    gray = clip(round(128 + 127 * value / vscale), 0, 255),

vscale = max|value| (stored in a '# vscale=' header comment, so the map
inverts to value ~ (gray - 128) / 127 * vscale), a 0/255 PGM for the
negative mask, and a CSV matrix with '#' header lines, one grid row per
line, 17 significant digits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .evolve import whorl_field
from .model import ModelSpec
from .states import GaussianState

__all__ = [
    "DEFAULT_GRID",
    "BoundaryMassWarning",
    "PhaseField",
    "whorl_phase_field",
    "wigner_field",
    "write_field_csv",
    "write_mask_pgm",
    "write_pgm",
]

DEFAULT_GRID = (-4.0, 4.0, -4.0, 4.0, 256, 256)

_BOUNDARY_MASS_LIMIT = 1e-4


class BoundaryMassWarning(UserWarning):
    """The grid clips a non-negligible part of the state."""


@dataclass(frozen=True)
class PhaseField:
    """A real field on a rectangular position-momentum grid.

    values[i, j] is the field at (q = qs[j], p = ps[i]); the mask marks
    strictly negative cells; total_mass is the Riemann sum times the cell
    area.
    """

    grid: tuple[float, float, float, float, int, int]
    values: np.ndarray
    negative_mask: np.ndarray
    total_mass: float

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        q_min, q_max, p_min, p_max, nq, npts = self.grid
        return np.linspace(q_min, q_max, nq), np.linspace(p_min, p_max, npts)


def _check_grid(grid) -> tuple[float, float, float, float, int, int]:
    try:
        q_min, q_max, p_min, p_max, nq, npts = grid
    except (TypeError, ValueError):
        raise ConfigError(
            "grid must be (q_min, q_max, p_min, p_max, nq, np)"
        ) from None
    for name, count in (("nq", nq), ("np", npts)):
        if not isinstance(count, (int, np.integer)) or isinstance(count, bool) or count < 2:
            raise ConfigError(f"grid {name} must be an integer >= 2")
    vals = (float(q_min), float(q_max), float(p_min), float(p_max))
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError("grid bounds must be finite")
    if not (vals[0] < vals[1] and vals[2] < vals[3]):
        raise ConfigError("grid bounds must satisfy q_min < q_max and p_min < p_max")
    return vals[0], vals[1], vals[2], vals[3], int(nq), int(npts)


def _package(values: np.ndarray, grid) -> PhaseField:
    q_min, q_max, p_min, p_max, nq, npts = grid
    cell = (q_max - q_min) / (nq - 1) * (p_max - p_min) / (npts - 1)
    mass = float(values.sum() * cell)
    boundary = (
        np.abs(values[0, :]).sum()
        + np.abs(values[-1, :]).sum()
        + np.abs(values[1:-1, 0]).sum()
        + np.abs(values[1:-1, -1]).sum()
    ) * cell
    if boundary > _BOUNDARY_MASS_LIMIT:
        warnings.warn(
            f"boundary carries |mass| {boundary:.3e} > {_BOUNDARY_MASS_LIMIT:.0e}; "
            f"the grid clips the state",
            BoundaryMassWarning,
            stacklevel=3,
        )
    return PhaseField(
        grid=grid,
        values=values,
        negative_mask=values < 0.0,
        total_mass=mass,
    )


def _sector_profile(diag: np.ndarray, nu: int, x: np.ndarray) -> np.ndarray:
    """Radial sum_k diag[k] rho_k^(nu)(x) on flat x >= 0.

    rho_k^(nu)(x) = 2 (-1)^k sqrt(k!/(k+nu)!) x^(nu/2) e^(-x/2) L_k^(nu)(x),
    evaluated as weight(x) * sum_k diag[k] (-1)^k binom(k+nu, k)^(-1/2)
    L_k^(nu)(x) with the weight exponent fused against 1/sqrt(nu!).
    """
    if nu == 0:
        weight = 2.0 * np.exp(-0.5 * x)
    else:
        exponent = np.full_like(x, -np.inf)
        pos = x > 0.0
        exponent[pos] = 0.5 * nu * np.log(x[pos]) - 0.5 * x[pos] - 0.5 * math.lgamma(nu + 1)
        weight = 2.0 * np.exp(exponent)
    acc = np.zeros(x.shape, dtype=complex)
    l_prev = np.zeros_like(x)
    l_cur = np.ones_like(x)
    coef = 1.0
    for k in range(len(diag)):
        if k > 0:
            l_prev, l_cur = l_cur, ((2 * k - 1 + nu - x) * l_cur - (k - 1 + nu) * l_prev) / k
            coef *= -math.sqrt(k / (k + nu))
        if diag[k] != 0.0:
            acc += (coef * diag[k]) * l_cur
    return weight * acc


def wigner_field(g, model: ModelSpec, grid=DEFAULT_GRID) -> PhaseField:
    """Phase-space symbol of a block matrix over 2 pi hbar, on a grid.

    The input is symmetrized (evolved matrices are Hermitian to rounding),
    so the field is real by construction. Mass approximates the trace.
    """
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
        raise ConfigError("expected a square matrix")
    grid = _check_grid(grid)
    q_min, q_max, p_min, p_max, nq, npts = grid
    g = 0.5 * (g + g.conj().T)
    dim = g.shape[0]
    qs = np.linspace(q_min, q_max, nq)
    ps = np.linspace(p_min, p_max, npts)
    hbar = model.hbar
    scale = math.sqrt(model.m * model.omega)
    alpha = (scale * qs[None, :] + 1j * ps[:, None] / scale) / math.sqrt(2.0 * hbar)
    x = (4.0 * np.abs(alpha) ** 2).ravel()
    radius = np.abs(alpha).ravel()
    phasor = np.ones_like(x, dtype=complex)
    nonzero = radius > 0.0
    phasor[nonzero] = (alpha.ravel()[nonzero] / radius[nonzero]).conj()
    total = _sector_profile(np.real(np.diagonal(g)).astype(complex), 0, x).real.astype(float)
    power = np.ones_like(phasor)
    for nu in range(1, dim):
        power = power * phasor
        diag = np.diagonal(g, offset=-nu)
        if not np.any(diag):
            continue
        total = total + 2.0 * (power * _sector_profile(diag, nu, x)).real
    values = (total / (2.0 * math.pi * hbar)).reshape(npts, nq)
    return _package(values, grid)


def whorl_phase_field(
    state: GaussianState, model: ModelSpec, t: float, grid=DEFAULT_GRID
) -> PhaseField:
    """Classical continuum density at time t, packaged like wigner_field."""
    grid = _check_grid(grid)
    q_min, q_max, p_min, p_max, nq, npts = grid
    qs = np.linspace(q_min, q_max, nq)
    ps = np.linspace(p_min, p_max, npts)
    return _package(whorl_field(state, model, t, qs, ps), grid)


# ---------------------------------------------------------------------------
# File formats


def _gray_map(values: np.ndarray) -> tuple[np.ndarray, float]:
    vscale = float(np.abs(values).max())
    if vscale == 0.0:
        vscale = 1.0
    gray = np.clip(np.rint(128.0 + 127.0 * values / vscale), 0.0, 255.0)
    return gray.astype(np.uint8), vscale


def write_pgm(field: PhaseField, path) -> None:
    """Binary PGM of the field under the documented affine map."""
    gray, vscale = _gray_map(field.values)
    rows, cols = gray.shape
    header = f"P5\n# vscale={vscale:.17g}\n{cols} {rows}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(gray.tobytes())


def write_mask_pgm(field: PhaseField, path) -> None:
    """Binary PGM of the negative mask: 255 where negative, 0 elsewhere."""
    gray = np.where(field.negative_mask, np.uint8(255), np.uint8(0))
    rows, cols = gray.shape
    header = f"P5\n{cols} {rows}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(gray.tobytes())


def write_field_csv(field: PhaseField, path, provenance: str = "") -> None:
    """CSV matrix of the field, one grid row (fixed p) per line."""
    q_min, q_max, p_min, p_max, nq, npts = field.grid
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        fh.write(f"# grid q_min={q_min:.17g} q_max={q_max:.17g} nq={nq}\n")
        fh.write(f"# grid p_min={p_min:.17g} p_max={p_max:.17g} np={npts}\n")
        fh.write(f"# total_mass={field.total_mass:.17g}\n")
        for row in field.values:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")
