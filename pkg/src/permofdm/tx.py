"""Packet assembly: legacy preambles, secured training symbol, scrambled data symbols.

Packet layout (64-bin grid, 16-sample CP):

    [ STF 160 ][ LTF 160 ][ training 80 (scrambled mode only) ][ data 80 x n ]

The preambles are the plain legacy sequences so any receiver can detect the
packet; everything after them is protected by the permutation key.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .dsp import add_cyclic_prefix, forward_dft, inverse_dft, map_subcarriers
from .keying import KeySchedule, PermutationKey, randomize
from .modulation import ModulationScheme, modulate_bits
from .params import OfdmParams

MODE_LEGACY = "legacy"
MODE_RAND = "rand_ofdm"

# Pilot values in ascending bin order [7, 21, 43, 57], i.e. logical
# subcarriers [+7, +21, -21, -7] with the legacy polarities [1, -1, 1, 1].
# They ride along for spectral parity with legacy frames; no receiver in
# this package consumes them.
PILOT_VALUES = np.array([1.0, -1.0, 1.0, 1.0], dtype=np.complex128)

# Legacy long-preamble BPSK values on logical subcarriers -26..-1, +1..+26.
_LTF_NEG = [1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1]
_LTF_POS = [1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1]

# Legacy short-preamble tones: (logical subcarrier, value before the
# sqrt(13/6) power normalization).
_STF_TONES = [
    (-24, 1 + 1j), (-20, -1 - 1j), (-16, 1 + 1j), (-12, -1 - 1j),
    (-8, -1 - 1j), (-4, 1 + 1j), (4, -1 - 1j), (8, -1 - 1j),
    (12, 1 + 1j), (16, 1 + 1j), (20, 1 + 1j), (24, 1 + 1j),
]


def _ltf_spectrum(n_fft: int = 64) -> np.ndarray:
    spec = np.zeros(n_fft, dtype=np.complex128)
    for k, v in zip(range(-26, 0), _LTF_NEG):
        spec[k % n_fft] = v
    for k, v in zip(range(1, 27), _LTF_POS):
        spec[k % n_fft] = v
    return spec


def _stf_spectrum(n_fft: int = 64) -> np.ndarray:
    spec = np.zeros(n_fft, dtype=np.complex128)
    scale = np.sqrt(13.0 / 6.0)
    for k, v in _STF_TONES:
        spec[k % n_fft] = scale * v
    return spec


def ltf_symbol(p: OfdmParams) -> np.ndarray:
    """One 64-sample long-preamble symbol body; the packet-detection reference."""
    if p.fft_size != 64:
        raise ValueError("preambles are defined only for the 64-bin layout")
    return inverse_dft(_ltf_spectrum(p.fft_size))


def build_preambles(p: OfdmParams) -> tuple[np.ndarray, np.ndarray]:
    """Standard preambles: STF = 10 repetitions of a 16-sample pattern (160
    samples), LTF = 32-sample prefix plus two identical 64-sample symbols."""
    if p.fft_size != 64:
        raise ValueError("preambles are defined only for the 64-bin layout")
    stf_body = inverse_dft(_stf_spectrum(p.fft_size))
    stf = np.tile(stf_body[:16], 10)
    long_sym = ltf_symbol(p)
    ltf = np.concatenate([long_sym[32:], long_sym, long_sym])
    return stf, ltf


def training_spectrum(secret: bytes, n_fft: int) -> np.ndarray:
    """+-1 BPSK values on all n_fft bins, drawn from a SHA-256 stream of the secret."""
    if not secret:
        raise ValueError("training secret must be non-empty")
    buf = b""
    counter = 0
    while len(buf) * 8 < n_fft:
        buf += hashlib.sha256(bytes(secret) + counter.to_bytes(4, "big")).digest()
        counter += 1
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8))[:n_fft]
    return (1.0 - 2.0 * bits).astype(np.complex128)


def build_training_symbol(
    secret: bytes, key: PermutationKey, p: OfdmParams
) -> tuple[np.ndarray, np.ndarray]:
    """Secured training symbol.

    Returns (time, reference_spectrum): `time` is the transmitted 80-sample
    symbol (scramble then CP), `reference_spectrum` is F P F^-1 X_tr, the
    quantity a key holder divides by to estimate the channel on all 64 bins.
    """
    if key.n != p.fft_size:
        raise ValueError(f"key length {key.n} does not match fft_size {p.fft_size}")
    x_tr = training_spectrum(secret, p.fft_size)
    body = randomize(inverse_dft(x_tr), key)
    time = add_cyclic_prefix(body, p.cp_len)
    reference = forward_dft(body)
    return time, reference


@dataclass(frozen=True)
class FrameConfig:
    params: OfdmParams
    scheme: ModulationScheme
    n_data_symbols: int
    schedule: KeySchedule
    training_secret: bytes = b""
    mode: str = MODE_RAND

    def __post_init__(self) -> None:
        if self.n_data_symbols < 1:
            raise ValueError("n_data_symbols must be >= 1")
        if self.mode not in (MODE_LEGACY, MODE_RAND):
            raise ValueError(f"unknown frame mode {self.mode!r}")
        if self.schedule.n != self.params.fft_size:
            raise ValueError("schedule key length does not match fft_size")
        if self.mode == MODE_RAND and not self.training_secret:
            raise ValueError("scrambled mode needs a training secret")

    @property
    def bits_per_symbol(self) -> int:
        return self.params.n_data_subcarriers * self.scheme.bits_per_symbol

    @property
    def payload_bits(self) -> int:
        return self.n_data_symbols * self.bits_per_symbol


@dataclass
class Frame:
    stf: np.ndarray
    ltf: np.ndarray
    training: np.ndarray | None
    data: np.ndarray  # (n_data_symbols, fft_size + cp_len)
    payload_bits: np.ndarray

    def samples(self) -> np.ndarray:
        parts = [self.stf, self.ltf]
        if self.training is not None:
            parts.append(self.training)
        parts.append(self.data.ravel())
        return np.concatenate(parts)

    @property
    def n_samples(self) -> int:
        n = self.stf.size + self.ltf.size + self.data.size
        if self.training is not None:
            n += self.training.size
        return n


def encrypt_data_symbol(bits, key: PermutationKey, cfg: FrameConfig) -> np.ndarray:
    """modulate -> map subcarriers -> inverse DFT -> scramble -> CP.

    Legacy mode skips the scramble; with the identity key the two coincide.
    """
    p = cfg.params
    bits = np.asarray(bits)
    expected = p.n_data_subcarriers * cfg.scheme.bits_per_symbol
    if bits.shape[0] != expected:
        raise ValueError(f"expected {expected} bits, got {bits.shape[0]}")
    symbols = modulate_bits(bits, cfg.scheme)
    spectrum = map_subcarriers(symbols, PILOT_VALUES, p)
    body = inverse_dft(spectrum)
    if cfg.mode == MODE_RAND:
        body = randomize(body, key)
    return add_cyclic_prefix(body, p.cp_len)


def build_frame(cfg: FrameConfig, payload) -> Frame:
    """Assemble a complete packet from payload bits."""
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape[0] != cfg.payload_bits:
        raise ValueError(f"payload must hold {cfg.payload_bits} bits, got {payload.shape[0]}")
    p = cfg.params
    stf, ltf = build_preambles(p)
    training = None
    if cfg.mode == MODE_RAND:
        training, _ = build_training_symbol(cfg.training_secret, cfg.schedule.key_for_training(), p)
    bps = cfg.bits_per_symbol
    data = np.empty((cfg.n_data_symbols, p.symbol_len), dtype=np.complex128)
    for s in range(cfg.n_data_symbols):
        key = cfg.schedule.key_for_symbol(s)
        data[s] = encrypt_data_symbol(payload[s * bps:(s + 1) * bps], key, cfg)
    return Frame(stf=stf, ltf=ltf, training=training, data=data, payload_bits=payload.copy())
