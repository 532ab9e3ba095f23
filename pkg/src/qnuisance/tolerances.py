"""Central numerical tolerance configuration.

One frozen record holds every threshold used across the package; modules
import the DEFAULT instance. Tests that need to probe behaviour near a
threshold construct their own instance instead of monkey-patching.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # matrix symmetry / structure
    hermiticity: float = 1e-12          # |H - H†| accepted silently
    hermiticity_error: float = 1e-8     # beyond this -> NonHermitianInput
    psd_clip: float = 1e-10             # eigenvalues above -psd_clip clipped to 0
    psd_error: float = 1e-8             # below -psd_error -> NotPsd
    eigen_gap: float = 1e-9             # merge eigenvalues closer than this
    projector: float = 1e-10

    # states and models
    rank_deficient: float = 1e-10       # min eigenvalue of a regular state must exceed this
    unit_trace: float = 1e-10
    domain_margin: float = 1e-9         # strict-inequality margin for domain membership
    fd_step: float = 1e-5               # central-difference step scale

    # fisher information
    singular_cond: float = 1e10         # cond(G) beyond this -> SingularFisher
    probability_floor: float = 1e-12    # outcomes below this excluded from scores
    dual_basis: float = 1e-8

    # bounds
    nuisance_floor_margin: float = 1e-12    # V_NN must exceed the floor by this
    weight_strict: float = 1e-10            # min eigenvalue for a "strict" weight
    block_orthogonality: float = 1e-6       # max off-block entry accepted by nui_bound_12/21
    weight_limit_cauchy: float = 1e-6       # extrapolation convergence requirement

    # povm
    povm_sum: float = 1e-9
    score_independence: float = 1e-10   # smallest singular value of interest scores
    lu_residual: float = 1e-6           # local-unbiasedness pass threshold


DEFAULT = Tolerances()
