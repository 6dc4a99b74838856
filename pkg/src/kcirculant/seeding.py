"""Deterministic seed derivation for parallel Monte Carlo trials."""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Counter-mode splitmix64 over (master, index).

    Distinct indices give distinct 64-bit seeds (the counter step is odd, the
    finalizer a bijection), so trials can run in any order or in parallel
    without sharing generator state.
    """
    z = (int(master_seed) + (int(trial_index) + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)
