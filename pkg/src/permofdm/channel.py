"""Channel emulation: tapped-delay-line Rayleigh models, AWGN, oscillator offsets.

Models are quasi-static: one tap realization per packet.  At 20 MHz and
sub-millisecond packets the 3 Hz Doppler of the indoor profile has a
coherence time several hundred times the packet duration, so intra-packet
fading is not modeled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import OfdmParams

KIND_AWGN = "awgn"
KIND_FLAT = "flat_rayleigh"
KIND_TDL = "tdl_rayleigh"


class ChannelModelError(ValueError):
    """Model parameters incompatible with the OFDM grid (e.g. delay spread beyond the CP)."""


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    path_delays_ns: tuple[float, ...] = ()
    path_gains_db: tuple[float, ...] = ()
    doppler_hz: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (KIND_AWGN, KIND_FLAT, KIND_TDL):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        delays = tuple(float(d) for d in self.path_delays_ns)
        gains = tuple(float(g) for g in self.path_gains_db)
        if len(delays) != len(gains):
            raise ValueError("path delay and gain lists must have equal length")
        if self.kind == KIND_AWGN and delays:
            raise ValueError("awgn model takes no taps")
        if self.kind == KIND_TDL and not delays:
            raise ValueError("tdl model needs at least one path")
        object.__setattr__(self, "path_delays_ns", delays)
        object.__setattr__(self, "path_gains_db", gains)


def presets() -> dict[str, ChannelModel]:
    """Named channels selectable from the CLI."""
    return {
        "awgn": ChannelModel(KIND_AWGN),
        "flat": ChannelModel(KIND_FLAT),
        "indoor6": ChannelModel(
            KIND_TDL,
            path_delays_ns=(0.0, 100.0, 200.0, 300.0, 500.0, 700.0),
            path_gains_db=(0.0, -3.6, -7.2, -10.8, -18.0, -25.2),
            doppler_hz=3.0,
        ),
    }


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray
    freq_response: np.ndarray
    seed: int

    @property
    def is_identity(self) -> bool:
        return self.taps.size == 1 and self.taps[0] == 1.0 + 0.0j


@dataclass(frozen=True)
class ImpairmentConfig:
    cfo_hz: float = 0.0
    static_phase_rad: float = 0.0
    snr_db: float = np.inf


def realize_channel(model: ChannelModel, p: OfdmParams, seed: int) -> ChannelRealization:
    """Draw one tap vector; freq_response is its zero-padded forward DFT."""
    rng = np.random.default_rng(seed)
    if model.kind == KIND_AWGN:
        taps = np.array([1.0 + 0.0j])
    elif model.kind == KIND_FLAT:
        taps = np.array([(rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)])
    else:
        offsets = [round(d * 1e-9 * p.sample_rate) for d in model.path_delays_ns]
        if max(offsets) >= p.cp_len:
            raise ChannelModelError(
                f"path delay of {max(offsets)} samples reaches beyond the {p.cp_len}-sample CP"
            )
        taps = np.zeros(max(offsets) + 1, dtype=np.complex128)
        for off, gain_db in zip(offsets, model.path_gains_db):
            sigma = np.sqrt(10.0 ** (gain_db / 10.0) / 2.0)
            taps[off] += sigma * (rng.standard_normal() + 1j * rng.standard_normal())
    freq = np.fft.fft(taps, p.fft_size)
    taps = taps.copy()
    taps.setflags(write=False)
    freq.setflags(write=False)
    return ChannelRealization(taps=taps, freq_response=freq, seed=int(seed))


def apply_channel(x, ch: ChannelRealization) -> np.ndarray:
    """Linear convolution with the taps, truncated to len(x)."""
    x = np.asarray(x, dtype=np.complex128)
    return np.convolve(x, ch.taps)[: x.shape[0]]


def add_awgn(x, snr_db: float, signal_power: float, seed: int) -> np.ndarray:
    """Add complex white Gaussian noise at the given SNR relative to signal_power.

    snr_db = +inf is the noise-off sentinel.
    """
    x = np.asarray(x, dtype=np.complex128)
    if np.isinf(snr_db) and snr_db > 0:
        return x.copy()
    if signal_power <= 0:
        raise ValueError("signal_power must be positive")
    sigma2 = signal_power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(x.shape[0]) + 1j * rng.standard_normal(x.shape[0])
    return x + np.sqrt(sigma2 / 2.0) * noise


def apply_cfo(x, cfo_hz: float, fs: float, phase0: float = 0.0) -> np.ndarray:
    """out[n] = x[n] exp(j (2 pi cfo_hz n / fs + phase0))."""
    x = np.asarray(x, dtype=np.complex128)
    if fs <= 0:
        raise ValueError("fs must be positive")
    n = np.arange(x.shape[0])
    return x * np.exp(1j * (2.0 * np.pi * cfo_hz * n / fs + phase0))


def apply_impairments(x, imp: ImpairmentConfig, fs: float, signal_power: float, seed: int) -> np.ndarray:
    """CFO and static phase rotation followed by AWGN."""
    out = apply_cfo(x, imp.cfo_hz, fs, imp.static_phase_rad)
    return add_awgn(out, imp.snr_db, signal_power, seed)
