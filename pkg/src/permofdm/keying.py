"""Shared-secret permutation keys and the keyed time-domain scramble.

The secret is a permutation of the N time samples of one OFDM symbol.
Applying it after the inverse DFT destroys subcarrier orthogonality;
in the frequency domain the same operation acts as the unitary mixing
matrix  F P F^-1  (identity exactly when P is the identity permutation).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .dsp import forward_dft, inverse_dft


@dataclass(frozen=True)
class PermutationKey:
    perm: np.ndarray
    key_id: str = ""

    def __post_init__(self) -> None:
        perm = np.asarray(self.perm, dtype=np.int64).copy()
        if perm.ndim != 1 or perm.size < 1:
            raise ValueError("perm must be a non-empty 1-D index vector")
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValueError("perm is not a bijection of 0..N-1")
        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)

    @property
    def n(self) -> int:
        return int(self.perm.size)

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.perm, np.arange(self.n)))


def identity_key(n: int) -> PermutationKey:
    return PermutationKey(np.arange(n), key_id="identity")


def derive_key(secret: bytes, n: int) -> PermutationKey:
    """Deterministic key from a shared secret: Fisher-Yates driven by a
    pseudorandom stream seeded with the SHA-256 of the secret."""
    if n < 2:
        raise ValueError(f"key length must be >= 2, got {n}")
    if not secret:
        raise ValueError("secret must be non-empty")
    digest = hashlib.sha256(bytes(secret)).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "big"))
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return PermutationKey(perm, key_id=digest.hex()[:16])


def random_key(n: int, seed) -> PermutationKey:
    """Uniformly random permutation; used for eavesdropper key guesses."""
    if n < 2:
        raise ValueError(f"key length must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    return PermutationKey(rng.permutation(n), key_id="random")


def randomize(x, key: PermutationKey) -> np.ndarray:
    """out[i] = x[perm[i]]; preserves the sample multiset exactly."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != key.n:
        raise ValueError(f"expected length {key.n}, got {x.shape[-1]}")
    return x[..., key.perm]


def derandomize(x, key: PermutationKey) -> np.ndarray:
    """Inverse scramble: out[perm[i]] = x[i]."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != key.n:
        raise ValueError(f"expected length {key.n}, got {x.shape[-1]}")
    out = np.empty_like(x)
    out[..., key.perm] = x
    return out


def spectral_transform(key: PermutationKey, X) -> np.ndarray:
    """Frequency-domain image of the scramble: F P F^-1 applied to X."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim != 1 or X.shape[0] != key.n:
        raise ValueError(f"expected 1-D length {key.n}, got shape {X.shape}")
    return forward_dft(randomize(inverse_dft(X), key))


@dataclass(frozen=True)
class KeySchedule:
    """One or more keys plus the per-symbol selection policy.

    policy "fixed" uses keys[0] for every symbol (the default, one key per
    packet); "round_robin" rotates through the key set symbol by symbol,
    the chosen-plaintext countermeasure.
    """

    keys: tuple[PermutationKey, ...]
    policy: str = "fixed"

    def __post_init__(self) -> None:
        keys = tuple(self.keys)
        if not keys:
            raise ValueError("schedule needs at least one key")
        if len({k.n for k in keys}) != 1:
            raise ValueError("all keys in a schedule must have the same length")
        if self.policy not in ("fixed", "round_robin"):
            raise ValueError(f"unknown schedule policy {self.policy!r}")
        object.__setattr__(self, "keys", keys)

    @property
    def n(self) -> int:
        return self.keys[0].n

    def key_for_symbol(self, index: int) -> PermutationKey:
        if self.policy == "fixed":
            return self.keys[0]
        return self.keys[index % len(self.keys)]

    def key_for_training(self) -> PermutationKey:
        return self.keys[0]


def single_key_schedule(key: PermutationKey) -> KeySchedule:
    return KeySchedule((key,))


def save_key_file(path, key: PermutationKey) -> None:
    """Key file format: one line of N comma-separated decimal indices."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(str(int(i)) for i in key.perm) + "\n")


def load_key_file(path, expected_n: int | None = None) -> PermutationKey:
    with open(path, "r", encoding="ascii") as fh:
        line = fh.readline().strip()
    if not line:
        raise ValueError(f"empty key file {path}")
    try:
        perm = np.array([int(tok) for tok in line.split(",")], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"malformed key file {path}: {exc}") from None
    if expected_n is not None and perm.size != expected_n:
        raise ValueError(f"key file holds {perm.size} indices, expected {expected_n}")
    return PermutationKey(perm, key_id="file")
