"""Attack simulations and resource arithmetic."""

from .brute_force import AttackIConfig, SurvivorReport, attack_i, sign_test_greater
from .collective import CollectiveAttackReport, heterodyne_collective_attack, posterior_entropy_oracle
from .orthogonality import (
    HAMMING_7_4,
    Bb84AttackConfig,
    Bb84AttackReport,
    OrthogonalityCurve,
    bb84_attack,
    ciphertext_states,
    codewords,
    orthogonality_curve,
)
from .resources import (
    CopiesCondition,
    GroverReport,
    KeygenYield,
    ResourceReport,
    copies_condition,
    grover_report,
    keygen_yield,
    resource_report,
)

__all__ = [
    "AttackIConfig",
    "Bb84AttackConfig",
    "Bb84AttackReport",
    "CollectiveAttackReport",
    "CopiesCondition",
    "GroverReport",
    "HAMMING_7_4",
    "KeygenYield",
    "OrthogonalityCurve",
    "ResourceReport",
    "SurvivorReport",
    "attack_i",
    "bb84_attack",
    "ciphertext_states",
    "codewords",
    "copies_condition",
    "grover_report",
    "heterodyne_collective_attack",
    "keygen_yield",
    "orthogonality_curve",
    "posterior_entropy_oracle",
    "resource_report",
    "sign_test_greater",
]
