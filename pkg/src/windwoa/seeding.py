"""Deterministic seed derivation for nested experiment components."""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(*parts) -> int:
    """Derive a stable 64-bit seed from a mix of integers and strings.

    The same parts always give the same seed, on any platform, so each
    task/repetition/stage gets its own stream and adding or reordering
    sibling units never perturbs the others.
    """
    canonical = "\x1f".join(str(part) for part in parts)
    digest = hashlib.blake2b(canonical.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for one named stream of the run identified by `seed`."""
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, *stream]))
