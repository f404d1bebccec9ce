"""Two-body matrix elements of the pair potential in the mode basis.

V[i,j,k,l] = int int mode_i(r) mode_j(r') v(r - r') mode_k(r) mode_l(r') ,

computed as grid convolutions of pair densities with the potential,
evaluated through the convolution theorem.  The potential enters through
its exact radial transform (closed form for spheres, fine 1D quadrature
for tabulated profiles), so the accuracy is set by the smooth mode
products and not by whether the 3D grid resolves the potential range;
contact-scale ranges are handled exactly this way.  A literal sampled
kernel route is kept for cross-checks; it refuses ranges below two grid
spacings.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ConfigError, UnderResolvedInteractionError
from ..model import PairPotential
from .basis import ModeBasis


@dataclass(frozen=True)
class InteractionTensor:
    """Symmetric 4-index tensor stored as a pair-density overlap matrix.

    With unordered pair index p(i,k), entry V[i,j,k,l] equals
    pair_matrix[p(i,k), p(j,l)]; the storage realizes the exchange
    symmetries in (i,k), in (j,l), and under (i,k) <-> (j,l) identically.
    """

    M: int
    pair_matrix: np.ndarray

    @cached_property
    def pair_index(self) -> np.ndarray:
        idx = np.zeros((self.M, self.M), dtype=np.int64)
        c = 0
        for i in range(self.M):
            for k in range(i, self.M):
                idx[i, k] = idx[k, i] = c
                c += 1
        return idx

    @property
    def n_pairs(self) -> int:
        return self.M * (self.M + 1) // 2

    def __getitem__(self, ijkl) -> float:
        i, j, k, l = ijkl
        return float(self.pair_matrix[self.pair_index[i, k], self.pair_index[j, l]])

    def symmetry_error(self) -> float:
        b = self.pair_matrix
        return float(np.abs(b - b.T).max() / max(np.abs(b).max(), 1e-300))

    def fold_hamiltonian_pairs(self) -> np.ndarray:
        """Coefficients over unordered pairs for the normal-ordered pair term.

        The pair interaction equals sum_{ab} F[a,b] P_a^dag P_b with
        P_(k<=l) = a_k a_l and
        F[(i,j),(k,l)] = (2-d_ij)(2-d_kl)/4 * (V[ijkl] + V[ijlk]),
        the direct plus exchange fold.
        """
        P = self.n_pairs
        pairs = [(i, k) for i in range(self.M) for k in range(i, self.M)]
        pi = self.pair_index
        B = self.pair_matrix
        F = np.zeros((P, P))
        for a, (i, j) in enumerate(pairs):
            wa = 2.0 - (i == j)
            for b, (k, l) in enumerate(pairs):
                direct = B[pi[i, k], pi[j, l]]
                exchange = B[pi[i, l], pi[j, k]]
                F[a, b] = wa * (2.0 - (k == l)) * 0.25 * (direct + exchange)
        return F

    def hartree_quartic(self, c: np.ndarray) -> float:
        """sum_{ijkl} V[ijkl] c_i c_j c_k c_l for a single-mode amplitude c."""
        pairs = [(i, k) for i in range(self.M) for k in range(i, self.M)]
        d = np.array([c[i] * c[k] * (2.0 - (i == k)) for i, k in pairs])
        return float(d @ self.pair_matrix @ d)


def interaction_tensor(basis: ModeBasis, potential: PairPotential,
                       method: str = "spectral") -> InteractionTensor:
    """Build the tensor for a finite-range repulsive potential.

    method 'spectral' (default) multiplies pair-density transforms by the
    exact radial transform of v; method 'sampled' uses the potential
    sampled on grid displacements and raises UnderResolvedInteractionError
    when the range falls below two grid spacings.
    """
    grid = basis.grid
    if potential.has_hard_core:
        raise ConfigError(
            "hard cores cannot enter a mode expansion; substitute a tall soft sphere",
            field="pair_potential")
    h = grid.spacing
    if max(h) - min(h) > 1e-9 * max(h):
        raise ConfigError("interaction grids must have equal spacing per axis", field="grid")
    if method == "sampled" and potential.range < 2.0 * max(h) and not potential.is_zero:
        raise UnderResolvedInteractionError(
            f"potential range {potential.range:.3g} below two grid spacings "
            f"({2 * max(h):.3g}); use the spectral route")
    if method not in ("spectral", "sampled"):
        raise ConfigError(f"unknown tensor method {method!r}", field="method")

    M = basis.size
    P = M * (M + 1) // 2
    if potential.is_zero:
        return InteractionTensor(M=M, pair_matrix=np.zeros((P, P)))

    n = grid.points
    hx = h[0]
    pad = int(np.ceil(potential.range / hx)) + 2
    npad = tuple(np.asarray(n) + pad)

    freqs = [2 * np.pi * np.fft.fftfreq(npad[ax], d=h[ax]) for ax in range(2)]
    freqs.append(2 * np.pi * np.fft.rfftfreq(npad[2], d=h[2]))
    qx, qy, qz = np.meshgrid(*freqs, indexing="ij", sparse=True)
    qmag = np.sqrt(qx**2 + qy**2 + qz**2)

    if method == "spectral":
        vq = potential.fourier_radial(qmag)
    else:
        kernel = _sampled_kernel(potential, npad, h)
        vq = np.fft.rfftn(kernel).real * float(np.prod(h))

    dup = np.full(qmag.shape, 2.0)
    dup[..., 0] = 1.0
    if npad[2] % 2 == 0:
        dup[..., -1] = 1.0
    wq = (vq * dup).ravel() / (float(np.prod(npad)) * float(np.prod(h)))

    # assemble B = Phat diag(wq) Phat^H in pair blocks to bound memory
    nq = npad[0] * npad[1] * (npad[2] // 2 + 1)
    block = max(16, min(P, int(3.0e8 / (nq * 16))))
    pairs = [(i, k) for i in range(M) for k in range(i, M)]
    weights = grid.weights
    inner = tuple(slice(0, s) for s in n)

    def transform_block(lo, hi):
        out = np.empty((hi - lo, nq), dtype=np.complex128)
        buf = np.zeros(npad)
        for c in range(lo, hi):
            i, k = pairs[c]
            buf[inner] = basis.modes[i] * basis.modes[k] * weights
            out[c - lo] = np.fft.rfftn(buf).ravel()
        return out

    starts = list(range(0, P, block))
    B = np.empty((P, P))
    for sa in starts:
        ea = min(sa + block, P)
        pa = transform_block(sa, ea)
        paw = pa * wq
        B[sa:ea, sa:ea] = (paw @ pa.conj().T).real
        for sb in starts:
            if sb <= sa:
                continue
            eb = min(sb + block, P)
            pb = transform_block(sb, eb)
            blk = (paw @ pb.conj().T).real
            B[sa:ea, sb:eb] = blk
            B[sb:eb, sa:ea] = blk.T
    B = 0.5 * (B + B.T)
    tensor = InteractionTensor(M=M, pair_matrix=B)
    if tensor.symmetry_error() > 1e-10:
        raise ConfigError("interaction tensor lost its exchange symmetry")
    return tensor


def _sampled_kernel(potential, npad, h):
    """v at minimum-image displacement vectors of the padded box."""
    axes = []
    for ax in range(3):
        idx = np.arange(npad[ax], dtype=float)
        idx = np.minimum(idx, npad[ax] - idx)
        axes.append(idx * h[ax])
    dx, dy, dz = np.meshgrid(*axes, indexing="ij", sparse=True)
    return potential.evaluate(np.sqrt(dx**2 + dy**2 + dz**2))
