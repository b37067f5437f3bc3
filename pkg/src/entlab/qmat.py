"""Dense complex-matrix kernel: tensor products, partial trace and
transpose, Hermitian eigendecompositions and spectral functions.

Subsystem convention used throughout the library: a ``dims`` list
``[d0, d1, ...]`` describes repeated Kronecker factors in order, so
``dims[0]`` is the leftmost factor and the composite row index is

    n = (((i0 * d1) + i1) * d2 + i2) ...

i.e. the *last* listed subsystem varies fastest.  ``tensor(a, b)`` with
``dims [da, db]`` realizes exactly this layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import tolerances
from .errors import DimensionError, ValidationError


def as_matrix(m) -> np.ndarray:
    """Coerce input to a 2-D complex array, rejecting non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains NaN or Inf entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def frob(m: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def hermiticity_residual(m: np.ndarray) -> float:
    return frob(m - dagger(m))


def check_hermitian(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{what} is not square: shape {m.shape}")
    if hermiticity_residual(m) > tolerances().structural:
        raise ValidationError(f"{what} is not Hermitian within tolerance")
    return m


def _check_dims(m: np.ndarray, dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise DimensionError(f"subsystem dims must be >= 1, got {dims}")
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionError(
            f"matrix shape {m.shape} does not match dims {dims} (product {total})"
        )
    return dims


def tensor(a, b) -> np.ndarray:
    """Kronecker product; dimensions multiply (capped by the global record)."""
    a, b = as_matrix(a), as_matrix(b)
    cap = tolerances().dim_cap
    if a.shape[0] * b.shape[0] > cap or a.shape[1] * b.shape[1] > cap:
        raise DimensionError(
            f"tensor product dimension {a.shape[0] * b.shape[0]} exceeds cap {cap}"
        )
    return np.kron(a, b)


def tensor_all(*mats) -> np.ndarray:
    out = as_matrix(mats[0])
    for m in mats[1:]:
        out = tensor(out, m)
    return out


def partial_trace(m, dims, keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``keep`` is an index or iterable of indices into ``dims``; the result
    is ordered by ascending kept index and preserves the total trace.
    """
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    if isinstance(keep, (int, np.integer)):
        keep = (int(keep),)
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep:
        raise DimensionError("keep must name at least one subsystem")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for dims {dims}")
    return _partial_trace_impl(m, dims, keep)


def _partial_trace_impl(m: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]) -> np.ndarray:
    n = len(dims)
    traced = [k for k in range(n) if k not in keep]
    t = m.reshape(dims + dims)
    # Move kept axes to the front (rows then columns), traced axes to the back.
    row_axes = list(keep) + traced
    col_axes = [a + n for a in row_axes]
    t = np.transpose(t, row_axes + col_axes)
    dk = int(np.prod([dims[k] for k in keep], dtype=int))
    dt = int(np.prod([dims[k] for k in traced], dtype=int))
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("itjt->ij", t)


def partial_transpose(m, dims, on: int = 1) -> np.ndarray:
    """Transpose one subsystem of a bipartite operator.

    Applying it twice on the same subsystem returns the input exactly.
    """
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    if len(dims) != 2:
        raise DimensionError(f"partial transpose expects bipartite dims, got {dims}")
    if on not in (0, 1):
        raise DimensionError(f"subsystem index must be 0 or 1, got {on}")
    da, db = dims
    t = m.reshape(da, db, da, db)
    if on == 0:
        t = np.transpose(t, (2, 1, 0, 3))
    else:
        t = np.transpose(t, (0, 3, 2, 1))
    return t.reshape(da * db, da * db)


def permute_subsystems(m, dims, order) -> np.ndarray:
    """Reorder tensor factors of an operator; returns the permuted matrix."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    order = tuple(int(o) for o in order)
    if sorted(order) != list(range(len(dims))):
        raise DimensionError(f"order {order} is not a permutation of {len(dims)} subsystems")
    n = len(dims)
    t = m.reshape(dims + dims)
    t = np.transpose(t, order + tuple(o + n for o in order))
    total = int(np.prod(dims))
    return t.reshape(total, total)


@dataclass(frozen=True)
class HermitianEigen:
    """Spectral form M = V diag(w) V† with eigenvalues sorted descending."""

    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # orthonormal columns, matching order

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)

    def fn(self, f) -> np.ndarray:
        """Apply a scalar function to the spectrum: V diag(f(w)) V†."""
        v = self.eigenvectors
        return (v * f(self.eigenvalues)) @ dagger(v)


def herm_eig(m) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    m = check_hermitian(m)
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    return HermitianEigen(eigenvalues=w[order], eigenvectors=v[:, order])


def psd_sqrt(m) -> np.ndarray:
    """Square root of a positive semidefinite Hermitian matrix."""
    e = herm_eig(m)
    return e.fn(lambda w: np.sqrt(np.clip(w, 0.0, None)))
