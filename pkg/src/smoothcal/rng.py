"""Deterministic random streams shared by every data generator.

All randomness flows through the counter-based Philox4x64 bit generator so
that a (seed, tag) pair always yields the same stream no matter in which
order streams are consumed.  Child seeds are derived by hashing
``seed:tag`` with SHA-256, and normal variates are produced by an explicit
Box-Muller transform on the raw uniform stream.  Both constructions are
spelled out here so any other implementation can reproduce the streams.
"""

import hashlib

import numpy as np

__all__ = ["child_seed", "uniform_stream", "normals"]

_MAX_SEED = 2**64


def child_seed(seed: int, tag: str) -> int:
    """Derive a 64-bit child seed from a parent seed and a purpose tag.

    The child is the first 8 bytes (big-endian) of
    ``SHA-256(seed_as_8_bytes || b":" || tag_utf8)``.
    """
    if not 0 <= int(seed) < _MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    payload = int(seed).to_bytes(8, "big") + b":" + tag.encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")


def uniform_stream(seed: int, tag: str) -> np.random.Generator:
    """Philox-backed generator for the ``(seed, tag)`` uniform stream."""
    return np.random.Generator(np.random.Philox(key=child_seed(seed, tag)))


def normals(gen: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal variates via Box-Muller on ``gen``'s uniform stream.

    Draws ceil(size/2) pairs (u1, u2); u1 is mapped to (0, 1] so the log is
    finite.  For odd ``size`` the trailing variate of the last pair is
    discarded.
    """
    size = int(size)
    if size < 0:
        raise ValueError("size must be nonnegative")
    if size == 0:
        return np.empty(0)
    m = (size + 1) // 2
    u1 = 1.0 - gen.random(m)  # (0, 1]
    u2 = gen.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:size]
