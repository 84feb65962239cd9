"""Speed-limit bounds on entangling times.

All times are in units of the dimensionless evolution parameter
T = Omega t.  The unified bound divides the Bures angle between the
start and target states by min{mean energy above ground, energy
spread}; with resource-equality normalization that denominator is 1
and the bound is the angle itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadDimensionError, LayoutMismatchError, StationaryStateError
from .hamiltonians import EnergyMoments, Hamiltonian, energy_moments
from .states import (
    DensityState,
    SystemLayout,
    bures_angle,
    maximally_entangled,
    uhlmann_fidelity,
)

__all__ = [
    "BoundReport",
    "unified_bound",
    "di_bound",
    "conjecture_bound",
    "smi_bound",
    "swap_stage_fidelity",
]

STATIONARY_TOL = 1e-12


@dataclass(frozen=True)
class BoundReport:
    """Unified speed-limit evaluation for one (start, target, Hamiltonian) triple."""

    angle: float
    moments: EnergyMoments
    bound: float
    d: int
    reference_bounds: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "angle": self.angle,
            "mean_energy": self.moments.mean,
            "energy_std": self.moments.std,
            "bound": self.bound,
            "d": self.d,
            "reference_bounds": dict(self.reference_bounds),
        }


def _principal_dim(layout: SystemLayout) -> int:
    # the two parties being entangled are the first two subsystems by convention
    dims = layout.dims
    return min(dims[0], dims[1]) if len(dims) >= 2 else dims[0]


def unified_bound(s0: DensityState, target: DensityState, h: Hamiltonian) -> BoundReport:
    """Minimal T to reach ``target`` from ``s0`` under any dynamics driven by ``h``.

    Raises StationaryStateError when both energy moments vanish, since
    the bound would be vacuous (the state never moves).
    """
    if s0.layout != target.layout:
        raise LayoutMismatchError("start and target states on different layouts")
    if s0.layout != h.layout:
        raise LayoutMismatchError("state and Hamiltonian on different layouts")
    theta = bures_angle(s0, target)
    em = energy_moments(h, s0)
    if em.smaller <= STATIONARY_TOL:
        raise StationaryStateError(
            f"vacuous bound: min energy moment {em.smaller:.3e}"
        )
    d = _principal_dim(s0.layout)
    refs = {
        "di": di_bound(d),
        "conjecture": conjecture_bound(d),
        "smi": smi_bound(d),
    }
    return BoundReport(angle=theta, moments=em, bound=theta / em.smaller,
                       d=d, reference_bounds=refs)


def di_bound(d: int) -> float:
    """arccos(1/sqrt(d)): minimal T for direct maximal entanglement of two qudits."""
    if d < 2:
        raise BadDimensionError(f"need d >= 2, got {d}")
    return math.acos(1.0 / math.sqrt(d))


def conjecture_bound(d: int) -> float:
    """2 arccos(1/sqrt(d)): conjectured minimum when the mediator starts uncorrelated."""
    return 2.0 * di_bound(d)


def smi_bound(d: int) -> float:
    """arccos(1/sqrt(d)) + arccos(1/d): proven two-stage swap-protocol bound."""
    if d < 2:
        raise BadDimensionError(f"need d >= 2, got {d}")
    return di_bound(d) + math.acos(1.0 / d)


def swap_stage_fidelity(d: int) -> float:
    """Overlap between the swap protocol's stage boundary states.

    Stage one ends in (maximally entangled A-C) x |0>_B; the target is
    (maximally entangled A-B) x |0>_C.  Their root fidelity is exactly
    1/d, which is what makes the second arccos(1/d) stage unavoidable.
    """
    if d < 2:
        raise BadDimensionError(f"need d >= 2, got {d}")
    layout = SystemLayout((("A", d), ("B", d), ("C", d)))
    psi_ac = maximally_entangled(d, SystemLayout((("A", d), ("C", d)))).pure_vector
    psi_ab = maximally_entangled(d, SystemLayout((("A", d), ("B", d)))).pure_vector
    ket0 = np.zeros(d, dtype=complex)
    ket0[0] = 1.0
    # layout order A,B,C: stage one parks |0> on B, the target parks |0> on C
    v1 = np.einsum("ac,b->abc", psi_ac.reshape(d, d), ket0).reshape(-1)
    v2 = np.kron(psi_ab, ket0)
    s1 = DensityState.from_pure(layout, v1)
    s2 = DensityState.from_pure(layout, v2)
    return uhlmann_fidelity(s1, s2)
