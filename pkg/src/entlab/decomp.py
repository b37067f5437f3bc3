"""Ensemble decompositions of a mixed state reached through its purification:
unitary remixing of the memory, orthogonal and generalized memory
measurements, the average-entanglement objective, and the min/max
optimizers giving entanglement of formation and assistance.

Every decomposition of rho with at most d_M members arises from a unitary
on the memory of a rank-complete purification, so the optimizers search
the unitary group U(k) through an anti-Hermitian generator chart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import qmat
from .config import tolerances
from .errors import DimensionError, ParameterError, ValidationError
from .measures import pure_entanglement, shannon_entropy
from .optim import OptimizerConfig, multi_start
from .states import (
    Decomposition,
    DensityMatrix,
    MemoryExtendedState,
    PureState,
    purify,
)

__all__ = [
    "UnitaryMixer",
    "MemoryPOVM",
    "MeasureReport",
    "OptimizerConfig",
    "remix",
    "measure_memory_orthogonal",
    "measure_memory_povm",
    "avg_entanglement",
    "entanglement_of_formation",
    "entanglement_of_assistance",
    "depolarized_projector_povm",
    "embed_mixer_params",
    "mixer_params_from_unitary",
]


# ---------------------------------------------------------------------------
# Generator chart on U(k):  theta (k^2 reals) -> H Hermitian -> U = exp(iH)
# ---------------------------------------------------------------------------

def _pair_indices(k: int):
    iu = np.triu_indices(k, 1)
    return iu


def params_to_hermitian(theta: np.ndarray, k: int) -> np.ndarray:
    """Map k^2 real parameters to a Hermitian generator (batched on axis 0)."""
    theta = np.atleast_2d(theta)
    b = theta.shape[0]
    if theta.shape[1] != k * k:
        raise ParameterError(f"need {k * k} parameters for a size-{k} mixer")
    h = np.zeros((b, k, k), dtype=complex)
    diag = np.arange(k)
    h[:, diag, diag] = theta[:, :k]
    iu, ju = _pair_indices(k)
    npair = iu.size
    re = theta[:, k:k + npair]
    im = theta[:, k + npair:]
    h[:, iu, ju] = re + 1j * im
    h[:, ju, iu] = re - 1j * im
    return h


def params_to_unitary(theta: np.ndarray, k: int) -> np.ndarray:
    """exp(i H(theta)) evaluated through the eigendecomposition (batched)."""
    h = params_to_hermitian(theta, k)
    w, v = np.linalg.eigh(h)
    phases = np.exp(1j * w)
    return np.einsum("bik,bk,bjk->bij", v, phases, v.conj())


def mixer_params_from_unitary(u: np.ndarray) -> np.ndarray:
    """Invert the chart: principal logarithm of a unitary to k^2 parameters."""
    u = qmat.as_matrix(u)
    k = u.shape[0]
    if qmat.frob(u @ qmat.dagger(u) - np.eye(k)) > 1e-8:
        raise ValidationError("matrix is not unitary")
    t, z = scipy.linalg.schur(u, output="complex")
    ang = np.angle(np.diag(t))
    h = (z * ang) @ qmat.dagger(z)
    h = (h + qmat.dagger(h)) / 2.0
    theta = np.empty(k * k)
    theta[:k] = np.diag(h).real
    iu, ju = _pair_indices(k)
    theta[k:k + iu.size] = h[iu, ju].real
    theta[k + iu.size:] = h[iu, ju].imag
    return theta


def embed_mixer_params(theta: np.ndarray, k_from: int, k_to: int) -> np.ndarray:
    """Pad a size-k_from generator into a size-k_to one acting as identity
    on the new memory levels."""
    if k_to < k_from:
        raise ParameterError(f"cannot embed size {k_from} into smaller size {k_to}")
    h_small = params_to_hermitian(np.asarray(theta, dtype=float), k_from)[0]
    h = np.zeros((k_to, k_to), dtype=complex)
    h[:k_from, :k_from] = h_small
    out = np.empty(k_to * k_to)
    out[:k_to] = np.diag(h).real
    iu, ju = _pair_indices(k_to)
    out[k_to:k_to + iu.size] = h[iu, ju].real
    out[k_to + iu.size:] = h[iu, ju].imag
    return out


@dataclass(frozen=True)
class UnitaryMixer:
    """Unitary on the memory space from k^2 anti-Hermitian generator
    coefficients, realized through the exponential map."""

    size: int
    parameters: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.parameters, dtype=float).reshape(-1)
        if p.size != self.size * self.size:
            raise ParameterError(
                f"mixer of size {self.size} needs {self.size ** 2} parameters, got {p.size}"
            )
        object.__setattr__(self, "parameters", p)
        u = self.unitary
        if qmat.frob(u @ qmat.dagger(u) - np.eye(self.size)) > tolerances().structural:
            raise ValidationError("realized mixer is not unitary within tolerance")

    @property
    def unitary(self) -> np.ndarray:
        return params_to_unitary(self.parameters[None, :], self.size)[0]

    @classmethod
    def identity(cls, k: int) -> "UnitaryMixer":
        return cls(size=k, parameters=np.zeros(k * k))

    @classmethod
    def from_unitary(cls, u) -> "UnitaryMixer":
        u = qmat.as_matrix(u)
        return cls(size=u.shape[0], parameters=mixer_params_from_unitary(u))

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> "UnitaryMixer":
        g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        q, r = np.linalg.qr(g)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        return cls.from_unitary(q)


@dataclass(frozen=True)
class MemoryPOVM:
    """Generalized measurement {A_i} on the memory, complete in the sense
    sum A_i^dag A_i = I."""

    elements: tuple

    def __post_init__(self):
        els = tuple(qmat.as_matrix(a) for a in self.elements)
        if not els:
            raise ValidationError("POVM needs at least one element")
        k = els[0].shape[0]
        if any(a.shape != (k, k) for a in els):
            raise DimensionError("POVM elements must share one square shape")
        acc = sum(qmat.dagger(a) @ a for a in els)
        if qmat.frob(acc - np.eye(k)) > tolerances().structural:
            raise ValidationError("POVM is incomplete: sum A_i^dag A_i != I")
        object.__setattr__(self, "elements", els)

    @property
    def size(self) -> int:
        return self.elements[0].shape[0]


def depolarized_projector_povm(d_m: int, eta: float) -> MemoryPOVM:
    """Rank-1 projector POVM mixed with white noise:
    E_i = (1 - eta) |i><i| + eta I/d_m, as A_i = sqrt(E_i)."""
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"eta must be in [0, 1], got {eta}")
    els = []
    for i in range(d_m):
        e = np.full(d_m, eta / d_m)
        e[i] += 1.0 - eta
        els.append(np.diag(np.sqrt(e)).astype(complex))
    return MemoryPOVM(elements=tuple(els))


# ---------------------------------------------------------------------------
# Measurements on the memory
# ---------------------------------------------------------------------------

def _amplitude_matrix(ext: MemoryExtendedState) -> np.ndarray:
    if ext.kind != "pure":
        raise ValidationError("operation needs a pure memory extension")
    d_m = ext.dims[0]
    d_ab = ext.dims[1] * ext.dims[2]
    return ext.payload.amplitudes.reshape(d_m, d_ab)


def _members_from_rows(rows: np.ndarray, dims_ab, target: DensityMatrix) -> Decomposition:
    cut = tolerances().weight_cutoff
    weights = np.sum(np.abs(rows) ** 2, axis=1)
    members = []
    for q, row in zip(weights, rows):
        if q < cut:
            continue
        members.append((float(q), PureState(dims=tuple(dims_ab), amplitudes=row / np.sqrt(q))))
    total = sum(p for p, _ in members)
    members = [(p / total, st) for p, st in members]
    return Decomposition(members=tuple(members), target=target)


def remix(ext: MemoryExtendedState, mixer: UnitaryMixer) -> Decomposition:
    """Apply a unitary to the memory of a pure extension and read off the
    decomposition induced by a computational-basis memory measurement."""
    amp = _amplitude_matrix(ext)
    if mixer.size != ext.dims[0]:
        raise DimensionError(
            f"mixer size {mixer.size} does not match memory dimension {ext.dims[0]}"
        )
    rows = mixer.unitary @ amp
    return _members_from_rows(rows, ext.dims[1:], ext.system_state())


def measure_memory_orthogonal(ext: MemoryExtendedState, basis) -> Decomposition:
    """Project the memory of a pure extension onto an orthonormal basis.

    ``basis`` is a square array whose *columns* are the basis vectors;
    member j gets weight ||<n_j| psi>||^2 and zero-weight members are
    dropped.  Equivalent to ``remix`` with the basis-change unitary B^dag.
    """
    amp = _amplitude_matrix(ext)
    b = qmat.as_matrix(basis)
    d_m = ext.dims[0]
    if b.shape != (d_m, d_m):
        raise DimensionError(f"basis shape {b.shape} does not match memory dimension {d_m}")
    if qmat.frob(qmat.dagger(b) @ b - np.eye(d_m)) > tolerances().structural:
        raise ValidationError("memory basis is not orthonormal within tolerance")
    rows = qmat.dagger(b) @ amp
    return _members_from_rows(rows, ext.dims[1:], ext.system_state())


def measure_memory_povm(ext: MemoryExtendedState, povm: MemoryPOVM) -> Decomposition:
    """Generalized memory measurement producing a mixed-member decomposition:
    members Tr_M(A_i rho A_i^dag)/q_i with q_i the outcome probabilities.

    The single-element POVM {I} returns the un-informative decomposition
    {1, rho_AB}; grading that member's entanglement is the relative-entropy
    minimization problem, not an ensemble average.
    """
    d_m, d_a, d_b = ext.dims
    if povm.size != d_m:
        raise DimensionError(f"POVM size {povm.size} does not match memory dimension {d_m}")
    rho = ext.density().matrix
    d_ab = d_a * d_b
    t = rho.reshape(d_m, d_ab, d_m, d_ab)
    target = ext.system_state()
    cut = tolerances().weight_cutoff
    raw = []
    for a in povm.elements:
        blk = np.einsum("am,mxny,an->xy", a, t, a.conj())
        q = float(np.trace(blk).real)
        raw.append((q, blk))
    members = []
    for q, blk in raw:
        if q < cut:
            continue
        from .states import validate_density  # local import avoids cycle at module load

        members.append((q, validate_density(blk / q, (d_a, d_b))))
    total = sum(p for p, _ in members)
    members = [(p / total, st) for p, st in members]
    return Decomposition(members=tuple(members), target=target)


def avg_entanglement(eps: Decomposition) -> float:
    """Ensemble average sum_i p_i S(rho_B^i) over pure members (ebits)."""
    if not eps.is_pure():
        raise TypeError("average entanglement needs pure members")
    return float(sum(p * pure_entanglement(st) for p, st in eps.members))


# ---------------------------------------------------------------------------
# Formation / assistance optimizers
# ---------------------------------------------------------------------------

@dataclass
class MeasureReport:
    """A named measure value plus optimizer diagnostics and the witness
    realizing it.  ``bound`` records the one-sidedness of the number."""

    name: str
    value: float
    bound: str  # "upper-bound-of-min" | "lower-bound-of-max" | "certified-lower" | "exact"
    witness: object = None
    diagnostics: dict = field(default_factory=dict)


def _xlog2x(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    mask = p > tolerances().eig_cutoff
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def _purification_matrix(rho: DensityMatrix, k: int) -> np.ndarray:
    ext = purify(rho, d_m=k)
    return _amplitude_matrix(ext)


def _avg_ent_batch(theta: np.ndarray, k: int, w: np.ndarray, dims_ab) -> np.ndarray:
    """Average entanglement of the remixed ensembles for a batch of
    generator parameters.

    Uses sum_i p_i S_i = H(all member Schmidt weights) - H(member weights),
    which is exact and free of 0/0 handling for vanishing members.
    """
    u = params_to_unitary(theta, k)
    rows = np.einsum("bij,jx->bix", u, w)
    b = rows.shape[0]
    da, db = dims_ab
    mats = rows.reshape(b * k, da, db)
    s = np.linalg.svd(mats, compute_uv=False)
    p = (s * s).reshape(b, -1)
    q = np.sum(np.abs(rows) ** 2, axis=2)
    return -np.sum(_xlog2x(p), axis=1) + np.sum(_xlog2x(q), axis=1)


def _optimize_avg_ent(rho: DensityMatrix, cfg: OptimizerConfig, sign: float,
                      extra_inits=None) -> tuple[MeasureReport, Decomposition]:
    if len(rho.dims) != 2:
        raise DimensionError(f"expected a bipartite state, got dims {rho.dims}")
    rank = rho.rank()
    k = cfg.resolve_k(rank)
    w = _purification_matrix(rho, k)
    dims_ab = rho.dims
    nparam = k * k

    def batch(theta):
        return sign * _avg_ent_batch(np.asarray(theta, dtype=float), k, w, dims_ab)

    rng = np.random.default_rng(cfg.seed)
    inits = [np.zeros(nparam)]
    for _ in range(max(0, cfg.restarts - 1)):
        inits.append(UnitaryMixer.random(k, rng).parameters)
    for x0 in extra_inits or ():
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        if x0.size != nparam:
            raise ParameterError(f"extra init has {x0.size} parameters, expected {nparam}")
        inits.append(x0)

    res = multi_start(batch, inits, max_iter=cfg.max_iter, grad_tol=cfg.grad_tol)
    mixer = UnitaryMixer(size=k, parameters=res.x)
    ext = purify(rho, d_m=k)
    witness = remix(ext, mixer)
    value = sign * res.value
    return (
        MeasureReport(
            name="",
            value=float(value),
            bound="",
            witness=witness,
            diagnostics={
                "restarts": res.restarts_run,
                "spread": float(np.ptp(sign * res.values)),
                "iterations": res.iterations,
                "grad_norm": res.grad_norm,
                "converged": res.converged_count,
                "k": k,
            },
        ),
        witness,
    )


def entanglement_of_formation(rho: DensityMatrix, cfg: OptimizerConfig | None = None,
                              extra_inits=None) -> MeasureReport:
    """Minimum average pure-state entanglement over decompositions of rho.

    Multi-start local optimization over the memory-unitary manifold; the
    reported number upper-bounds the true minimum and carries the best
    decomposition found as witness.  ``extra_inits`` warm-starts additional
    restarts (e.g. from a coarser search).
    """
    cfg = cfg or OptimizerConfig()
    report, _ = _optimize_avg_ent(rho, cfg, sign=1.0, extra_inits=extra_inits)
    report.name = "ef"
    report.bound = "upper-bound-of-min"
    return report


def entanglement_of_assistance(rho: DensityMatrix, cfg: OptimizerConfig | None = None,
                               extra_inits=None) -> MeasureReport:
    """Maximum average pure-state entanglement over decompositions of rho.

    Same manifold search as formation with the objective negated; the
    reported number lower-bounds the true maximum.
    """
    cfg = cfg or OptimizerConfig()
    report, _ = _optimize_avg_ent(rho, cfg, sign=-1.0, extra_inits=extra_inits)
    report.name = "ea"
    report.bound = "lower-bound-of-max"
    return report
