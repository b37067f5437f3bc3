"""Multi-start gradient descent with batched central-difference gradients.

Both ensemble optimizers (formation/assistance) and the separable-ansatz
minimizer share this engine.  Objectives expose a batch form
``f(X: (B, P) array) -> (B,) array`` so finite differences and line
searches evaluate in single vectorized calls.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for the multi-start local optimizers.

    ``k`` caps the decomposition size (memory dimension); ``None`` resolves
    to rank(rho)^2 capped at 16 at call time.
    """

    restarts: int = 32
    max_iter: int = 500
    grad_tol: float = 1e-8
    k: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iter < 1:
            raise ParameterError("restarts and max_iter must be positive")
        if self.grad_tol <= 0:
            raise ParameterError("grad_tol must be positive")
        if self.k is not None and self.k < 1:
            raise ParameterError("decomposition cap k must be positive")

    def resolve_k(self, rank: int) -> int:
        if self.k is not None:
            if self.k < rank:
                raise ParameterError(f"decomposition cap k={self.k} below state rank {rank}")
            return int(self.k)
        return max(1, min(rank * rank, 16))

    def with_(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)


FD_STEP = 1e-6  # central-difference step


@dataclass
class GdResult:
    x: np.ndarray
    value: float
    iterations: int
    grad_norm: float
    converged: bool


def _gradient(batch_fn, x: np.ndarray, h: float) -> np.ndarray:
    p = x.size
    pts = np.repeat(x[None, :], 2 * p, axis=0)
    idx = np.arange(p)
    pts[idx, idx] += h
    pts[p + idx, idx] -= h
    vals = np.asarray(batch_fn(pts))
    return (vals[:p] - vals[p:]) / (2.0 * h)


def minimize_gd(batch_fn, x0: np.ndarray, *, max_iter: int, grad_tol: float,
                fd_step: float = FD_STEP) -> GdResult:
    """Gradient descent with backtracking line search on a batch objective.

    The line search evaluates a geometric ladder of candidate steps in one
    batched call and takes the best candidate satisfying the Armijo
    condition.  Stops on gradient norm, step collapse, or stall.
    """
    x = np.asarray(x0, dtype=float).copy()
    f = float(batch_fn(x[None, :])[0])
    step = 1.0
    gnorm = np.inf
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        g = _gradient(batch_fn, x, fd_step)
        gnorm = float(np.linalg.norm(g))
        if not np.isfinite(gnorm):
            return GdResult(x, f, it, gnorm, False)
        if gnorm <= grad_tol:
            return GdResult(x, f, it, gnorm, True)
        # Ladder of 12 candidate steps from 4x the last accepted step down.
        base = min(max(step * 4.0, 1e-10), 1e3)
        ladder = base * (0.5 ** np.arange(12))
        cands = x[None, :] - ladder[:, None] * g[None, :]
        vals = np.asarray(batch_fn(cands))
        ok = vals <= f - 1e-4 * ladder * gnorm * gnorm
        ok &= np.isfinite(vals)
        if not np.any(ok):
            # One finer ladder before giving up.
            ladder = base * (0.5 ** np.arange(12, 26))
            cands = x[None, :] - ladder[:, None] * g[None, :]
            vals = np.asarray(batch_fn(cands))
            ok = vals <= f - 1e-4 * ladder * gnorm * gnorm
            ok &= np.isfinite(vals)
            if not np.any(ok):
                return GdResult(x, f, it, gnorm, False)
        best = int(np.flatnonzero(ok)[np.argmin(vals[np.flatnonzero(ok)])])
        drop = f - float(vals[best])
        x = cands[best]
        f = float(vals[best])
        step = float(ladder[best])
        stall = stall + 1 if drop < 1e-11 * max(1.0, abs(f)) else 0
        if stall >= 3:
            return GdResult(x, f, it, gnorm, True)
    return GdResult(x, f, it, gnorm, False)


@dataclass
class MultiStartResult:
    x: np.ndarray
    value: float
    values: np.ndarray  # best value per restart
    restarts_run: int
    iterations: int
    grad_norm: float
    converged_count: int


def multi_start(batch_fn, inits, *, max_iter: int, grad_tol: float,
                stop_below: float | None = None) -> MultiStartResult:
    """Run ``minimize_gd`` from each init and keep the best minimum.

    ``stop_below``: optional certified target; the restart loop exits early
    once the best value is within 1e-7 of it (used with convex brackets).
    """
    best: GdResult | None = None
    values = []
    conv = 0
    iters = 0
    for x0 in inits:
        r = minimize_gd(batch_fn, np.asarray(x0, dtype=float),
                        max_iter=max_iter, grad_tol=grad_tol)
        values.append(r.value)
        conv += int(r.converged)
        iters += r.iterations
        if best is None or r.value < best.value:
            best = r
        if stop_below is not None and best.value <= stop_below + 1e-7:
            break
    assert best is not None
    return MultiStartResult(
        x=best.x,
        value=best.value,
        values=np.array(values),
        restarts_run=len(values),
        iterations=iters,
        grad_norm=best.grad_norm,
        converged_count=conv,
    )
