"""Python bindings for the hardy heat-semigroup toolkit."""

from ._hardyheat import (
    HardyError,
    Potential,
    Profile,
    admissible,
    corollary_rhs,
    evolve,
    exponents,
    lorentz_norm,
    multiplicity,
    omega,
    power_law_norm,
    run_decay,
    solve_profile,
    theorem_rhs,
)

__all__ = [
    "HardyError",
    "Potential",
    "Profile",
    "admissible",
    "corollary_rhs",
    "evolve",
    "exponents",
    "lorentz_norm",
    "multiplicity",
    "omega",
    "power_law_norm",
    "run_decay",
    "solve_profile",
    "theorem_rhs",
]
