"""Cryptanalysis of the keyed waveform: key-space accounting, exhaustive
key search, waveform statistics, and an empirical mutual-information probe.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dsp import inverse_dft
from .keying import PermutationKey

BRUTE_FORCE_MAX_N = 10
MATCH_TOL = 1e-6


def key_space_size(n: int) -> int:
    """Number of permutation keys of length n: exactly n! (arbitrary precision)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.factorial(n)


def success_probability(n: int) -> Fraction:
    """Chance of guessing the key in one try under a uniform key choice: 1/n!."""
    return Fraction(1, key_space_size(n))


def log10_success_probability(n: int) -> float:
    """Base-10 log of 1/n!, via log-gamma so it stays finite for huge n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return -math.lgamma(n + 1) / math.log(10.0)


def papr(x) -> float:
    """Peak-to-average power ratio in dB: 10 log10(max|x|^2 / mean|x|^2)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.size == 0:
        raise ValueError("empty vector")
    power = np.abs(x) ** 2
    mean = float(power.mean())
    if mean <= 0:
        raise ValueError("zero-power vector")
    return float(10.0 * np.log10(power.max() / mean))


@dataclass
class AttackReport:
    tried_keys: int
    recovered_key: PermutationKey | None
    success: bool
    wall_time_s: float
    n_matches: int = 0
    key_space: int = 0
    refused: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "tried_keys": self.tried_keys,
            "recovered_key": None if self.recovered_key is None
            else [int(i) for i in self.recovered_key.perm],
            "success": self.success,
            "wall_time_s": self.wall_time_s,
            "n_matches": self.n_matches,
            "key_space": self.key_space,
            "refused": self.refused,
            "note": self.note,
        }


def brute_force_attack(ciphertext, known_plaintext_spectrum, n: int, batch: int = 4096) -> AttackReport:
    """Exhaustive key search in the chosen-plaintext setting.

    `ciphertext` is one scrambled time-domain symbol (no CP) and
    `known_plaintext_spectrum` the corresponding clear spectrum.  Every
    permutation of length n is tried; a key matches when unscrambling the
    ciphertext reproduces the plaintext's time samples within 1e-6 each.
    The full space is enumerated so non-uniqueness (degenerate plaintexts)
    is detected and reported; tried_keys counts trials up to the first match.

    For n > 10 the search is refused and a cost report citing the n! key
    space is returned instead.
    """
    t0 = time.perf_counter()
    space = key_space_size(n)
    if n > BRUTE_FORCE_MAX_N:
        return AttackReport(
            tried_keys=0, recovered_key=None, success=False,
            wall_time_s=time.perf_counter() - t0, key_space=space, refused=True,
            note=f"refused: {n}! = {space} trials is beyond the desk-scale ceiling "
                 f"(N <= {BRUTE_FORCE_MAX_N})",
        )
    c = np.asarray(ciphertext, dtype=np.complex128)
    X = np.asarray(known_plaintext_spectrum, dtype=np.complex128)
    if c.shape[0] != n or X.shape[0] != n:
        raise ValueError(f"ciphertext and plaintext spectrum must have length {n}")
    # out[perm[i]] = c[i] must equal p_time, i.e. c[i] == p_time[perm[i]].
    p_time = inverse_dft(X)
    first_match = None
    first_index = None
    n_matches = 0
    tried = 0
    perms = itertools.permutations(range(n))
    while True:
        block = np.array(list(itertools.islice(perms, batch)), dtype=np.int64)
        if block.size == 0:
            break
        diffs = np.abs(c[None, :] - p_time[block])
        ok = np.flatnonzero((diffs <= MATCH_TOL).all(axis=1))
        if ok.size and first_match is None:
            first_match = block[ok[0]].copy()
            first_index = tried + int(ok[0]) + 1
        n_matches += int(ok.size)
        tried += block.shape[0]
    elapsed = time.perf_counter() - t0
    if first_match is None:
        return AttackReport(tried_keys=tried, recovered_key=None, success=False,
                            wall_time_s=elapsed, n_matches=0, key_space=space)
    note = "" if n_matches == 1 else (
        f"non-unique: {n_matches} keys reproduce this plaintext (degenerate probe)"
    )
    return AttackReport(
        tried_keys=first_index, recovered_key=PermutationKey(first_match, key_id="recovered"),
        success=True, wall_time_s=elapsed, n_matches=n_matches, key_space=space, note=note,
    )


def _cells(samples: np.ndarray, bins: int) -> np.ndarray:
    """Flatten complex samples onto a bins x bins grid over their own range."""
    re, im = samples.real, samples.imag
    lo = min(re.min(), im.min())
    hi = max(re.max(), im.max())
    span = hi - lo
    if span <= 0:
        return np.zeros(samples.shape[0], dtype=np.int64)
    ir = np.clip(((re - lo) / span * bins).astype(np.int64), 0, bins - 1)
    ii = np.clip(((im - lo) / span * bins).astype(np.int64), 0, bins - 1)
    return ir * bins + ii


def empirical_mutual_information(plain, cipher, bins: int = 32) -> float:
    """Histogram plug-in estimate of I(plain; cipher) in bits.

    Both arguments are equal-length lists of complex vectors; samples are
    paired elementwise.  Each variable is binned on its own bins x bins
    (Re, Im) grid; the estimate is Kullback-Leibler of the joint cell
    histogram against the product of the marginals, hence non-negative and
    symmetric under argument swap by construction.
    """
    if len(plain) != len(cipher):
        raise ValueError("plain and cipher lists must have equal length")
    if len(plain) < 1000:
        raise ValueError(f"need at least 1000 vector pairs, got {len(plain)}")
    x = np.concatenate([np.asarray(v, dtype=np.complex128).ravel() for v in plain])
    y = np.concatenate([np.asarray(v, dtype=np.complex128).ravel() for v in cipher])
    if x.shape[0] != y.shape[0]:
        raise ValueError("plain and cipher hold different sample counts")
    n_cells = bins * bins
    cx = _cells(x, bins)
    cy = _cells(y, bins)
    joint = np.bincount(cx * n_cells + cy, minlength=n_cells * n_cells).astype(float)
    total = float(x.shape[0])
    nz = np.flatnonzero(joint)
    pj = joint[nz] / total
    px = np.bincount(cx, minlength=n_cells).astype(float) / total
    py = np.bincount(cy, minlength=n_cells).astype(float) / total
    return float(np.sum(pj * np.log2(pj / (px[nz // n_cells] * py[nz % n_cells]))))
