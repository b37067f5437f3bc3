"""Validated quantum-state types, Schmidt decomposition, purification,
memory extensions, state generators and the state file format.

Memory-extended states order their subsystems memory-first: dims are
``(d_M, d_A, d_B)`` and the classically correlated form is block diagonal
in the memory basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .config import tolerances
from .errors import CapacityError, DimensionError, ParameterError, ParseError, ValidationError


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator with a
    subsystem-dimension signature."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        tol = tolerances()
        m = qmat.as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        total = int(np.prod(dims))
        if m.shape != (total, total):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        if qmat.hermiticity_residual(m) > tol.structural:
            raise ValidationError("density matrix violates Hermiticity tolerance")
        w = np.linalg.eigvalsh(m)
        if w.min() < -tol.structural:
            raise ValidationError(
                f"density matrix violates positivity: min eigenvalue {w.min():.3e}"
            )
        if abs(np.trace(m).real - 1.0) > tol.structural:
            raise ValidationError(
                f"density matrix violates trace normalization: trace {np.trace(m).real!r}"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eig(self) -> qmat.HermitianEigen:
        return qmat.herm_eig(self.matrix)

    def rank(self) -> int:
        w = np.linalg.eigvalsh(self.matrix)
        return int(np.sum(w > tolerances().eig_cutoff))

    def reduced(self, keep) -> "DensityMatrix":
        """Partial trace onto the kept subsystems."""
        if isinstance(keep, (int, np.integer)):
            keep = (int(keep),)
        keep = tuple(sorted(set(int(k) for k in keep)))
        sub = qmat.partial_trace(self.matrix, self.dims, keep)
        return validate_density(sub, tuple(self.dims[k] for k in keep))

    def permuted(self, order) -> "DensityMatrix":
        m = qmat.permute_subsystems(self.matrix, self.dims, order)
        return validate_density(m, tuple(self.dims[o] for o in order))

    def grouped(self, groups) -> "DensityMatrix":
        """Merge adjacent subsystems, e.g. ``[(0,), (1, 2)]`` for an A:(BC) cut."""
        flat = [i for g in groups for i in g]
        if flat != list(range(len(self.dims))):
            raise DimensionError(f"groups {groups} must partition subsystems in order")
        dims = tuple(int(np.prod([self.dims[i] for i in g])) for g in groups)
        return DensityMatrix(dims=dims, matrix=self.matrix)


@dataclass(frozen=True)
class PureState:
    """Unit vector over a product of subsystems."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.dims)
        if v.size != int(np.prod(dims)):
            raise DimensionError(f"amplitude length {v.size} does not match dims {dims}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("amplitudes contain NaN or Inf")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValidationError(f"state norm {np.linalg.norm(v)!r} is not 1 within 1e-12")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _freeze(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(dims=self.dims, matrix=np.outer(v, v.conj()))

    def reduced(self, keep) -> DensityMatrix:
        return self.density().reduced(keep)


def normalized_pure(dims, amplitudes) -> PureState:
    """Build a PureState, normalizing the vector exactly."""
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n <= 0 or not np.isfinite(n):
        raise ValidationError("cannot normalize a zero or non-finite vector")
    return PureState(dims=tuple(dims), amplitudes=v / n)


def validate_density(matrix, dims) -> DensityMatrix:
    """Validate and canonicalize a raw matrix into a DensityMatrix.

    Eigenvalues in ``[-structural_tol, 0)`` are clamped to zero and the
    spectrum renormalized; anything worse raises naming the failed
    invariant.
    """
    tol = tolerances()
    m = qmat.as_matrix(matrix)
    dims = tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
    if qmat.hermiticity_residual(m) > tol.structural:
        raise ValidationError("Hermiticity violated beyond tolerance")
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol.structural:
        raise ValidationError(f"trace violated: got {tr!r}, expected 1")
    m = (m + qmat.dagger(m)) / 2.0
    w, v = np.linalg.eigh(m)
    if w.min() < -tol.structural:
        raise ValidationError(f"positivity violated: min eigenvalue {w.min():.3e}")
    if w.min() < 0.0:
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        m = (v * w) @ qmat.dagger(v)
    return DensityMatrix(dims=dims, matrix=m)


@dataclass(frozen=True)
class SchmidtForm:
    """Canonical bipartite form sum_i c_i |a_i>|b_i> with descending c_i.

    Vectors in ``basis_a`` have their first non-negligible component made
    real positive; the compensating phases live in ``basis_b`` so that the
    coefficients stay real and the reconstruction exact.
    """

    coefficients: np.ndarray  # nonnegative, descending
    basis_a: np.ndarray  # columns
    basis_b: np.ndarray  # columns

    def reconstruct(self, dims) -> PureState:
        mat = (self.basis_a * self.coefficients) @ self.basis_b.T
        return PureState(dims=tuple(dims), amplitudes=mat.reshape(-1))


def _fix_leading_phase(v: np.ndarray) -> tuple[np.ndarray, complex]:
    """Rotate v so its first non-negligible component is real positive."""
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size == 0:
        return v, 1.0 + 0j
    ph = v[idx[0]] / abs(v[idx[0]])
    return v / ph, ph


def _lex_key(v: np.ndarray) -> tuple:
    out = []
    for z in v:
        out.append(round(z.real, 9))
        out.append(round(z.imag, 9))
    return tuple(out)


def schmidt(psi: PureState) -> SchmidtForm:
    """Schmidt decomposition of a bipartite pure state.

    Degenerate coefficient blocks are canonicalized by Gram-Schmidt against
    the computational basis and ordered lexicographically, which makes the
    output deterministic despite the mathematical non-uniqueness.
    """
    if len(psi.dims) != 2:
        raise DimensionError(f"schmidt expects bipartite dims, got {psi.dims}")
    da, db = psi.dims
    tol = tolerances()
    mat = psi.amplitudes.reshape(da, db)
    u, s, vh = np.linalg.svd(mat)
    k = min(da, db)
    s = s[:k].copy()
    a = u[:, :k].copy()
    b = vh[:k, :].T.copy()  # columns b_i with psi = sum_i s_i a_i (x) b_i

    # Canonicalize degenerate blocks above the rank cutoff.
    groups = []
    start = 0
    for i in range(1, k + 1):
        if i == k or abs(s[i] - s[start]) > 1e-10:
            groups.append((start, i))
            start = i
    for lo, hi in groups:
        if s[lo] <= tol.eig_cutoff:
            continue
        if hi - lo > 1:
            span = a[:, lo:hi]
            proj = span @ span.conj().T
            cols = []
            for j in range(da):
                cand = proj @ np.eye(da)[:, j]
                for c in cols:
                    cand = cand - c * (c.conj() @ cand)
                n = np.linalg.norm(cand)
                if n > 1e-6:
                    cols.append(cand / n)
                if len(cols) == hi - lo:
                    break
            if len(cols) == hi - lo:
                block = np.stack(cols, axis=1)
                block = sorted((block[:, j] for j in range(block.shape[1])), key=_lex_key)
                a[:, lo:hi] = np.stack(block, axis=1)
                # Matching right vectors from the state itself.
                for j in range(lo, hi):
                    b[:, j] = (a[:, j].conj() @ mat) / s[j]

    for i in range(k):
        if s[i] > tol.eig_cutoff:
            a[:, i], ph = _fix_leading_phase(a[:, i])
            b[:, i] = b[:, i] * ph
        else:
            a[:, i], _ = _fix_leading_phase(a[:, i])
            b[:, i], _ = _fix_leading_phase(b[:, i])

    form = SchmidtForm(coefficients=_freeze(s), basis_a=_freeze(a), basis_b=_freeze(b))
    resid = np.linalg.norm((a * s) @ b.T - mat)
    if resid > tol.reconstruct:
        raise ValidationError(f"Schmidt reconstruction residual {resid:.3e} too large")
    return form


@dataclass(frozen=True)
class Decomposition:
    """Weighted ensemble of pure (or, after a generalized memory
    measurement, mixed) states realizing a target density matrix."""

    members: tuple  # of (weight, PureState | DensityMatrix)
    target: DensityMatrix

    def __post_init__(self):
        tol = tolerances()
        members = tuple((float(p), st) for p, st in self.members)
        if not members:
            raise ValidationError("decomposition needs at least one member")
        weights = np.array([p for p, _ in members])
        if np.any(weights <= 0):
            raise ValidationError("decomposition weights must be positive")
        if abs(weights.sum() - 1.0) > tol.structural:
            raise ValidationError(f"decomposition weights sum to {weights.sum()!r}, not 1")
        acc = np.zeros_like(self.target.matrix)
        for p, st in members:
            acc = acc + p * _member_matrix(st)
        resid = np.linalg.norm(acc - self.target.matrix)
        if resid > tol.reconstruct:
            raise ValidationError(f"decomposition reconstruction residual {resid:.3e}")
        object.__setattr__(self, "members", members)

    @property
    def weights(self) -> np.ndarray:
        return np.array([p for p, _ in self.members])

    def is_pure(self) -> bool:
        return all(isinstance(st, PureState) for _, st in self.members)

    def __len__(self) -> int:
        return len(self.members)


def _member_matrix(st) -> np.ndarray:
    if isinstance(st, PureState):
        v = st.amplitudes
        return np.outer(v, v.conj())
    if isinstance(st, DensityMatrix):
        return st.matrix
    raise TypeError(f"decomposition member must be PureState or DensityMatrix, got {type(st)}")


@dataclass(frozen=True)
class MemoryExtendedState:
    """Tripartite state over memory (x) A (x) B.

    ``kind == "pure"`` holds |psi_MAB>; ``kind == "classical"`` holds the
    memory-dephased mixture, block diagonal in the memory basis.
    """

    kind: str  # "pure" | "classical"
    dims: tuple[int, int, int]
    payload: object  # PureState | DensityMatrix

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3:
            raise DimensionError(f"memory-extended dims must be (d_M, d_A, d_B), got {dims}")
        if self.kind == "pure":
            if not isinstance(self.payload, PureState) or self.payload.dims != dims:
                raise ValidationError("pure extension payload must be a PureState over dims")
        elif self.kind == "classical":
            if not isinstance(self.payload, DensityMatrix) or self.payload.dims != dims:
                raise ValidationError("classical extension payload must be a DensityMatrix over dims")
            if _memory_offdiag_norm(self.payload.matrix, dims) > tolerances().structural:
                raise ValidationError("classical extension is not block diagonal in the memory basis")
        else:
            raise ValidationError(f"unknown extension kind {self.kind!r}")
        object.__setattr__(self, "dims", dims)

    def density(self) -> DensityMatrix:
        if self.kind == "pure":
            return self.payload.density()
        return self.payload

    def system_state(self) -> DensityMatrix:
        """The AB marginal (memory traced out)."""
        return self.density().reduced((1, 2))

    def memory_marginal(self) -> DensityMatrix:
        return self.density().reduced(0)


def _memory_offdiag_norm(m: np.ndarray, dims) -> float:
    dm = dims[0]
    dab = dims[1] * dims[2]
    t = m.reshape(dm, dab, dm, dab)
    off = t.copy()
    for i in range(dm):
        off[i, :, i, :] = 0.0
    return float(np.linalg.norm(off))


def purify(rho: DensityMatrix, d_m: int | None = None) -> MemoryExtendedState:
    """Eigendecomposition purification with computational memory states.

    The memory marginal of the output is diagonal; tracing the memory
    recovers ``rho``.
    """
    if len(rho.dims) != 2:
        raise DimensionError(f"purify expects a bipartite state, got dims {rho.dims}")
    e = rho.eig()
    cut = tolerances().eig_cutoff
    rank = int(np.sum(e.eigenvalues > cut))
    rank = max(rank, 1)
    if d_m is None:
        d_m = rank
    d_m = int(d_m)
    if d_m < rank:
        raise CapacityError(f"memory dimension {d_m} below state rank {rank}")
    lam = np.clip(e.eigenvalues[:rank], 0.0, None)
    lam = lam / lam.sum()
    amp = np.zeros((d_m, rho.dim), dtype=complex)
    amp[:rank, :] = np.sqrt(lam)[:, None] * e.eigenvectors[:, :rank].T
    psi = PureState(dims=(d_m,) + rho.dims, amplitudes=amp.reshape(-1))
    return MemoryExtendedState(kind="pure", dims=(d_m,) + rho.dims, payload=psi)


def canonical_extension(eps: Decomposition) -> MemoryExtendedState:
    """Classically correlated extension: each pure member tagged by an
    orthogonal memory state, sum_i p_i |m_i><m_i| (x) |psi_i><psi_i|."""
    if not eps.is_pure():
        raise TypeError("canonical extension requires pure members; use the POVM path for mixed ones")
    k = len(eps.members)
    dab = eps.target.dim
    out = np.zeros((k * dab, k * dab), dtype=complex)
    for i, (p, st) in enumerate(eps.members):
        blk = p * _member_matrix(st)
        out[i * dab:(i + 1) * dab, i * dab:(i + 1) * dab] = blk
    dims = (k,) + eps.target.dims
    return MemoryExtendedState(kind="classical", dims=dims, payload=validate_density(out, dims))


# ---------------------------------------------------------------------------
# State families and random generators
# ---------------------------------------------------------------------------

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def bell_state(which: str) -> PureState:
    """One of the four Bell states: phi+, phi-, psi+, psi-."""
    s = 1 / np.sqrt(2)
    table = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    if which not in table:
        raise ParameterError(f"unknown Bell state {which!r}")
    return PureState(dims=(2, 2), amplitudes=np.array(table[which], dtype=complex))


def gen_werner(p: float) -> DensityMatrix:
    """p |psi-><psi-| + (1-p) I/4 on two qubits, p in [0, 1]."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"werner parameter must be in [0, 1], got {p}")
    singlet = bell_state("psi-").density().matrix
    m = p * singlet + (1.0 - p) * np.eye(4) / 4.0
    return validate_density(m, (2, 2))


def gen_bell_diagonal(weights) -> DensityMatrix:
    """Mixture of the four Bell states (phi+, phi-, psi+, psi-) with the
    given probabilities."""
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != 4:
        raise ParameterError(f"need 4 Bell weights, got {w.size}")
    if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-10:
        raise ParameterError("Bell weights must be nonnegative and sum to 1")
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    m = np.zeros((4, 4), dtype=complex)
    for wi, name in zip(w, ("phi+", "phi-", "psi+", "psi-")):
        m = m + wi * bell_state(name).density().matrix
    return validate_density(m, (2, 2))


def gen_random_pure(dims, seed) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in dims)
    n = int(np.prod(dims))
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return normalized_pure(dims, v)


def gen_random_density(dims, rank: int | None = None, seed=None) -> DensityMatrix:
    """Random mixed state from the (truncated) Ginibre ensemble.

    Full rank reproduces the Hilbert-Schmidt measure; ``rank`` truncates
    the Ginibre factor for fixed-rank sampling.
    """
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in dims)
    n = int(np.prod(dims))
    if rank is None:
        rank = n
    rank = int(rank)
    if not 1 <= rank <= n:
        raise ParameterError(f"rank must be in [1, {n}], got {rank}")
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    return validate_density(m / np.trace(m).real, dims)


# ---------------------------------------------------------------------------
# State file format
# ---------------------------------------------------------------------------
#
# JSON document:
#   {
#     "format": "entlab-state-v1",
#     "dims": [2, 2],
#     "matrix": [[[re, im], ...], ...]   # row-major, dims[0] leftmost factor
#   }
# Floats serialize via Python repr (exact round trip, 17 significant digits
# where needed).

FILE_FORMAT = "entlab-state-v1"
_ALLOWED_KEYS = {"format", "dims", "matrix"}


def state_to_dict(rho: DensityMatrix) -> dict:
    mat = [
        [[float(z.real), float(z.imag)] for z in row]
        for row in np.asarray(rho.matrix)
    ]
    return {"format": FILE_FORMAT, "dims": list(rho.dims), "matrix": mat}


def save_state(rho: DensityMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(rho), fh, indent=1)
        fh.write("\n")


def state_from_dict(doc: dict) -> DensityMatrix:
    if not isinstance(doc, dict):
        raise ParseError("state document must be a JSON object")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise ParseError(f"unknown state-file field(s): {', '.join(sorted(unknown))}")
    for key in ("dims", "matrix"):
        if key not in doc:
            raise ParseError(f"state file is missing field '{key}'")
    if doc.get("format", FILE_FORMAT) != FILE_FORMAT:
        raise ParseError(f"unsupported state-file format {doc.get('format')!r}")
    dims = doc["dims"]
    if not isinstance(dims, list) or not all(isinstance(d, int) and d >= 1 for d in dims):
        raise ParseError("field 'dims' must be a list of positive integers")
    rows = doc["matrix"]
    n = int(np.prod(dims))
    try:
        m = np.array(
            [[complex(cell[0], cell[1]) for cell in row] for row in rows], dtype=complex
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"field 'matrix' must be nested [re, im] pairs: {exc}") from exc
    if m.shape != (n, n):
        raise ParseError(f"field 'matrix' has shape {m.shape}, expected {(n, n)} from dims")
    return validate_density(m, dims)


def load_state(path) -> DensityMatrix:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in state file at line {exc.lineno}: {exc.msg}") from exc
    return state_from_dict(doc)
