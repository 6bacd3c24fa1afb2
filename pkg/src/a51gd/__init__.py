"""A5/1 stream cipher, a guess-and-determine state-recovery attack, and the
statistics/oracle harness around it."""

from .cipher import (
    A51,
    CipherSpec,
    CipherState,
    generate_keystream,
    initialize,
    majority,
    state_output_bits,
    step,
)
from .attack import (
    AttackReport,
    BranchPolicy,
    CompleteStateCandidate,
    StateCandidate,
    attack_full,
    attack_single_guess,
    enumerate_candidates,
    post_process,
)
from .partial import PartialRegister, UNKNOWN
from .stats import (
    brute_force_matches,
    estimate_complete_count,
    expected_rounds_formula,
    growth_counts,
    mini_spec,
    rounds_experiment,
)

__all__ = [
    "A51",
    "AttackReport",
    "BranchPolicy",
    "CipherSpec",
    "CipherState",
    "CompleteStateCandidate",
    "PartialRegister",
    "StateCandidate",
    "UNKNOWN",
    "attack_full",
    "attack_single_guess",
    "brute_force_matches",
    "enumerate_candidates",
    "estimate_complete_count",
    "expected_rounds_formula",
    "generate_keystream",
    "growth_counts",
    "initialize",
    "majority",
    "mini_spec",
    "post_process",
    "rounds_experiment",
    "state_output_bits",
    "step",
]
