"""Entropic functionals in ebits (base-2 logarithm units).

Support violations in the relative entropy return ``math.inf`` exactly,
never a large float.
"""

from __future__ import annotations

import math

import numpy as np

from . import qmat
from .config import tolerances
from .errors import DimensionError, ValidationError
from .states import DensityMatrix, PureState, schmidt

#: Mass that a state may carry on the kernel of the reference before a
#: relative entropy counts as a support violation (+inf).
SUPPORT_LEAK = 1e-9


def as_ebits(x: float) -> float:
    """Clamp small negative rounding residue to zero; reject real negatives."""
    if x < -1e-9:
        raise ValidationError(f"measure value {x!r} below the rounding floor")
    return 0.0 if x < 0.0 else float(x)


def shannon_entropy(probs) -> float:
    """H(p) = -sum p log2 p over entries above the eigenvalue cutoff."""
    p = np.asarray(probs, dtype=float).reshape(-1)
    p = p[p > tolerances().eig_cutoff]
    if p.size == 0:
        return 0.0
    return as_ebits(float(-np.sum(p * np.log2(p))))


def binary_entropy(x: float) -> float:
    x = float(x)
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def vn_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy -sum lambda log2 lambda of the spectrum."""
    w = np.linalg.eigvalsh(rho.matrix)
    return shannon_entropy(w)


def qrelative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Quantum relative entropy Tr(rho log2 rho - rho log2 sigma).

    Returns ``math.inf`` when rho has weight outside sigma's support.
    Evaluation happens in sigma's eigenbasis with rho rotated into it.
    """
    if rho.dim != sigma.dim:
        raise DimensionError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    cut = tolerances().eig_cutoff
    e = qmat.herm_eig(sigma.matrix)
    mu = np.clip(e.eigenvalues, 0.0, None)
    # Diagonal of rho in sigma's eigenbasis.
    r = np.einsum("ij,jk,ki->i", e.eigenvectors.conj().T, rho.matrix, e.eigenvectors).real
    r = np.clip(r, 0.0, None)
    off_support = float(np.sum(r[mu <= cut]))
    if off_support > SUPPORT_LEAK:
        return math.inf
    keep = mu > cut
    cross = float(np.sum(r[keep] * np.log2(mu[keep])))
    return as_ebits(-vn_entropy(rho) - cross)


def mutual_information(rho: DensityMatrix, cut=(0,)) -> float:
    """Quantum mutual information S(rho_X) + S(rho_Y) - S(rho) between the
    subsystems in ``cut`` and the rest (default: memory vs the system)."""
    if len(rho.dims) < 2:
        raise DimensionError("mutual information needs at least two subsystems")
    if isinstance(cut, (int, np.integer)):
        cut = (int(cut),)
    cut = tuple(sorted(set(int(c) for c in cut)))
    rest = tuple(i for i in range(len(rho.dims)) if i not in cut)
    if not cut or not rest:
        raise DimensionError(f"cut {cut} must split the subsystems in two")
    sx = vn_entropy(rho.reduced(cut))
    sy = vn_entropy(rho.reduced(rest))
    sxy = vn_entropy(rho)
    return as_ebits(sx + sy - sxy)


def pure_entanglement(psi: PureState) -> float:
    """Entanglement of a bipartite pure state: entropy of either marginal."""
    if len(psi.dims) != 2:
        raise DimensionError(f"expected bipartite dims, got {psi.dims}")
    da, db = psi.dims
    s = np.linalg.svd(psi.amplitudes.reshape(da, db), compute_uv=False)
    return shannon_entropy(s ** 2)


def schmidt_entropy(coefficients) -> float:
    """Entanglement from Schmidt coefficients: -sum c^2 log2 c^2."""
    c = np.asarray(coefficients, dtype=float)
    return shannon_entropy(c ** 2)


_YY = np.kron(
    np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]])
).astype(complex)


def concurrence(rho: DensityMatrix) -> float:
    """Two-qubit concurrence from the spin-flip spectrum.

    C = max(0, s1 - s2 - s3 - s4) where the s_i are the descending square
    roots of the eigenvalues of rho (Y(x)Y) rho* (Y(x)Y).
    """
    if rho.dims != (2, 2):
        raise DimensionError(f"concurrence is defined for dims (2, 2), got {rho.dims}")
    flipped = _YY @ rho.matrix.conj() @ _YY
    root = qmat.psd_sqrt(rho.matrix)
    w = np.linalg.eigvalsh(root @ flipped @ root)
    s = np.sqrt(np.clip(w, 0.0, None))[::-1]
    return max(0.0, float(s[0] - s[1] - s[2] - s[3]))


def ef_2qubit_closed(rho: DensityMatrix) -> float:
    """Closed-form two-qubit entanglement of formation,
    h((1 + sqrt(1 - C^2)) / 2) with C the concurrence."""
    c = concurrence(rho)
    return as_ebits(binary_entropy((1.0 + math.sqrt(max(0.0, 1.0 - c * c))) / 2.0))
