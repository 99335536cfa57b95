"""Gray-coded constellations (802.11a tables) and hard-decision slicing."""

from __future__ import annotations

import numpy as np


def _gray_rank(word: int, nbits: int) -> int:
    """Position of a Gray codeword in the reflected Gray sequence."""
    rank = word
    shift = 1
    while shift < nbits:
        rank ^= rank >> shift
        shift <<= 1
    return rank


def _axis_level(word: int, nbits: int) -> int:
    """Gray word of one axis -> odd amplitude level in -(2^n-1)..+(2^n-1)."""
    return 2 * _gray_rank(word, nbits) - (2**nbits - 1)


class ModulationScheme:
    """One modulation alphabet, indexed by the bit word (MSB first).

    For QAM the first half of the word selects the I level and the second
    half the Q level, each through the per-axis Gray table of 802.11a.
    The alphabet is scaled so its mean energy is exactly 1.
    """

    def __init__(self, name: str, bits_per_symbol: int):
        self.name = name
        self.bits_per_symbol = bits_per_symbol
        n = bits_per_symbol
        pts = np.empty(2**n, dtype=np.complex128)
        if n == 1:
            for w in range(2):
                pts[w] = _axis_level(w, 1)
        else:
            if n % 2:
                raise ValueError("QAM needs an even number of bits per symbol")
            half = n // 2
            for w in range(2**n):
                i_word = w >> half
                q_word = w & ((1 << half) - 1)
                pts[w] = _axis_level(i_word, half) + 1j * _axis_level(q_word, half)
        energy = float(np.mean(np.abs(pts) ** 2))
        self.scale = 1.0 / np.sqrt(energy)
        self.points = pts * self.scale

    def __repr__(self) -> str:
        return f"ModulationScheme({self.name!r}, bits_per_symbol={self.bits_per_symbol})"


BPSK = ModulationScheme("bpsk", 1)
QPSK = ModulationScheme("qpsk", 2)
QAM16 = ModulationScheme("qam16", 4)
QAM64 = ModulationScheme("qam64", 6)

SCHEMES = {s.name: s for s in (BPSK, QPSK, QAM16, QAM64)}


def get_scheme(name: str) -> ModulationScheme:
    try:
        return SCHEMES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown modulation scheme {name!r}") from None


def modulate_bits(bits, scheme: ModulationScheme) -> np.ndarray:
    """Map a bit stream to constellation points, bits_per_symbol bits at a time."""
    bits = np.asarray(bits)
    if bits.ndim != 1:
        raise ValueError("bits must be 1-D")
    bps = scheme.bits_per_symbol
    if bits.shape[0] % bps:
        raise ValueError(f"bit count {bits.shape[0]} not divisible by {bps}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    groups = bits.reshape(-1, bps).astype(np.int64)
    words = groups @ (1 << np.arange(bps - 1, -1, -1, dtype=np.int64))
    return scheme.points[words]


def demodulate_symbols(symbols, scheme: ModulationScheme) -> np.ndarray:
    """Minimum-Euclidean-distance slicer; returns the bits of the nearest alphabet point."""
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    words = slice_to_words(symbols, scheme)
    bps = scheme.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1, dtype=np.int64)
    return ((words[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def slice_to_words(symbols, scheme: ModulationScheme) -> np.ndarray:
    """Index of the nearest alphabet point for each symbol."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    d = np.abs(symbols[..., None] - scheme.points)
    return np.argmin(d, axis=-1)
