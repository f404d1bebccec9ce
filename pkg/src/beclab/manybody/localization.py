"""Where the pair-correlation gradient energy lives, for two bosons.

For N = 2 the ground state is a grid function of one coordinate once the
other is pinned at a sample point r2.  Dividing out the mean-field
profile leaves the correlation factor

    f(r) = Psi(r, r2) / phi(r),

whose weighted gradient energy int |phi|^2 |grad f|^2 concentrates in a
small ball around r2 for short-range repulsion.  This module reports, for
a list of ball radii, the fraction of that energy carried by the ball,
averaged over quasi-random r2 draws from the one-particle density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from ..errors import ConfigError
from ..gp import GPState
from .basis import FockBasis, ModeBasis
from .ground import ManyBodyGround

_NA_THRESHOLD = 1e-13


@dataclass(frozen=True)
class LocalizationProfile:
    radii: tuple[float, ...]
    fractions: tuple[float, ...] | None     # None when there is no gradient energy
    total_energy: float
    samples: int
    seed: int
    excluded_points: int

    @property
    def not_applicable(self) -> bool:
        return self.fractions is None


def _pair_amplitude_matrix(ground: ManyBodyGround, fock: FockBasis) -> np.ndarray:
    """Symmetric C with Psi(r1, r2) = sum_ij C_ij mode_i(r1) mode_j(r2)."""
    M = fock.M
    C = np.zeros((M, M))
    for idx, occ in enumerate(fock.occupations):
        nz = np.nonzero(occ)[0]
        if len(nz) == 1:
            C[nz[0], nz[0]] = ground.coefficients[idx]
        else:
            i, j = nz
            C[i, j] = C[j, i] = ground.coefficients[idx] / np.sqrt(2.0)
    return C


def _sample_indices(density_flat, weights_flat, count, seed):
    """Quasi-random draws of grid nodes from the one-particle density."""
    p = np.maximum(density_flat * weights_flat, 0.0)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    u = qmc.Sobol(d=1, scramble=True, seed=seed).random(count).ravel()
    return np.searchsorted(cdf, u)


def localization_profile(ground: ManyBodyGround, gp: GPState, basis: ModeBasis,
                         radii, samples: int = 64, seed: int = 0) -> LocalizationProfile:
    """Average in-ball fractions of the weighted correlation gradient energy.

    Requires N = 2 and a mean-field state solved on the mode grid.  Nodes
    where the mean-field profile is below 1e-12 of its peak are excluded
    from the division and counted in the report.
    """
    if ground.N != 2:
        raise ConfigError("localization profile is defined for N = 2 runs")
    grid = basis.grid
    if gp.grid.shape != grid.shape or gp.grid.extent != grid.extent:
        raise ConfigError("mean-field state must live on the mode grid", field="grid")
    radii = tuple(float(d) for d in radii)
    if any(d <= 0 for d in radii):
        raise ConfigError("ball radii must be positive", field="radii")

    fock = FockBasis.build(2, basis.size, dimension_cap=10**9)
    C = _pair_amplitude_matrix(ground, fock)
    flat_modes = basis.modes.reshape(basis.size, -1)

    phi = gp.phi.ravel()
    cutoff = 1e-12 * phi.max()
    valid = phi > cutoff
    excluded = int(np.size(phi) - np.count_nonzero(valid))
    weight = (phi**2) * grid.weights.ravel()

    density = np.einsum("if,ij,jf->f", flat_modes, ground.gamma / ground.N, flat_modes)
    idx = _sample_indices(np.maximum(density, 0.0), grid.weights.ravel(), samples, seed)

    mesh = np.meshgrid(*grid.axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)

    shape = grid.shape
    totals = np.zeros(samples)
    in_ball = np.zeros((samples, len(radii)))
    for s, cell in enumerate(idx):
        r2 = pts[cell]
        b = C @ flat_modes[:, cell]
        psi_slice = b @ flat_modes
        f = np.zeros_like(psi_slice)
        f[valid] = psi_slice[valid] / phi[valid]
        grad2 = _gradient_sq(f.reshape(shape), grid, valid.reshape(shape))
        edens = grad2.ravel() * weight
        dist2 = np.sum((pts - r2) ** 2, axis=1)
        totals[s] = edens.sum()
        for di, d in enumerate(radii):
            in_ball[s, di] = edens[dist2 <= d * d].sum()

    total = float(totals.sum())
    if total < _NA_THRESHOLD:
        return LocalizationProfile(radii=radii, fractions=None, total_energy=total,
                                   samples=samples, seed=seed, excluded_points=excluded)
    ok = totals > 0
    fracs = (in_ball[ok] / totals[ok, None]).mean(axis=0)
    return LocalizationProfile(radii=radii, fractions=tuple(float(x) for x in fracs),
                               total_energy=total, samples=samples, seed=seed,
                               excluded_points=excluded)


def _gradient_sq(f: np.ndarray, grid, valid: np.ndarray) -> np.ndarray:
    """Central-difference |grad f|^2, one-sided next to excluded nodes."""
    out = np.zeros_like(f)
    for ax, h in enumerate(grid.spacing):
        sl_lo = [slice(None)] * f.ndim
        sl_hi = [slice(None)] * f.ndim
        sl_lo[ax] = slice(None, -1)
        sl_hi[ax] = slice(1, None)
        pair_ok = valid[tuple(sl_lo)] & valid[tuple(sl_hi)]
        dfwd = np.zeros_like(f)
        dbwd = np.zeros_like(f)
        diff = np.where(pair_ok, (f[tuple(sl_hi)] - f[tuple(sl_lo)]) / h, 0.0)
        dfwd[tuple(sl_lo)] = diff
        has_f = np.zeros_like(valid)
        has_b = np.zeros_like(valid)
        has_f[tuple(sl_lo)] = pair_ok
        has_b[tuple(sl_hi)] = pair_ok
        dbwd[tuple(sl_hi)] = dfwd[tuple(sl_lo)]
        df = np.where(has_f & has_b, 0.5 * (dfwd + dbwd),
                      np.where(has_f, dfwd, np.where(has_b, dbwd, 0.0)))
        out += df**2
    out[~valid] = 0.0
    return out
