"""Global numerical tolerances.

All structural checks in the library read from one shared record so that
thresholds stay uniform and testable.  ``tolerances()`` returns the active
record; ``set_tolerances()`` swaps it (mainly useful in tests).
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # Frobenius-norm threshold for structural checks (Hermiticity,
    # orthonormality, unitarity, POVM completeness, block-diagonality).
    structural: float = 1e-10
    # Frobenius-norm threshold for reconstruction checks (Schmidt form,
    # decompositions, purification round trips).
    reconstruct: float = 1e-8
    # Eigenvalues at or below this count as zero: defines numerical rank,
    # support membership and 0*log(0) handling.
    eig_cutoff: float = 1e-12
    # Weights below this are dropped from measured decompositions.
    weight_cutoff: float = 1e-12
    # Eigenvalue floor applied to optimizer iterates before taking logs.
    log_floor: float = 1e-9
    # Largest total matrix dimension any kernel operation will produce.
    dim_cap: int = 4096


_ACTIVE = Tolerances()


def tolerances() -> Tolerances:
    """Return the active tolerance record."""
    return _ACTIVE


def set_tolerances(tols: Tolerances | None = None, **overrides) -> Tolerances:
    """Replace the active tolerance record, optionally overriding fields."""
    global _ACTIVE
    base = tols if tols is not None else _ACTIVE
    _ACTIVE = replace(base, **overrides) if overrides else base
    return _ACTIVE
