"""Deterministic seed derivation.

A splitmix64 chain turns one user-facing seed plus any number of integer
branch labels into independent 64-bit stream seeds; bulk sampling then uses
numpy's PCG64 seeded with the derived value.  Thread counts never change
results because every task derives its own seed from its index.
"""

import numpy as np

_MASK = (1 << 64) - 1


def _mix(z):
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed, *branch):
    """Fold integer branch labels into `seed`, returning a 64-bit value."""
    state = _mix(int(seed) & _MASK)
    for b in branch:
        state = _mix(state ^ _mix(int(b) & _MASK))
    return state


def generator(seed, *branch):
    """numpy Generator on an independent stream identified by the branch labels."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *branch)))
