"""Receiver chain: packet detection, CFO correction, secured channel
estimation, per-symbol decryption, clustering-based residual phase
correction, demodulation.  Also hosts the eavesdropper configurations.

Decryption of one received symbol is the exact inverse of the transmit
chain once the channel is known:

    strip CP -> DFT -> divide by H -> inverse DFT -> unscramble -> DFT -> unmap

With the true key and the true H this is an algebraic identity; with a
wrong key the final spectrum is a unitary mixture of all data bins and
slicing yields chance-level bits at any SNR.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clustering import k_medoids
from .dsp import forward_dft, inverse_dft, remove_cyclic_prefix, unmap_subcarriers
from .keying import (
    KeySchedule,
    PermutationKey,
    derandomize,
    identity_key,
    random_key,
    single_key_schedule,
    spectral_transform,
)
from .modulation import ModulationScheme, demodulate_symbols
from .params import OfdmParams
from .tx import MODE_LEGACY, MODE_RAND, ltf_symbol, training_spectrum

PREAMBLE_LEN = 320
# Offset of the first 64-sample long-preamble symbol inside the frame:
# 160 (STF) + 32 (LTF cyclic prefix).
LTF_SYMBOL_OFFSET = 192

ZF_MIN_GAIN = 1e-6
REF_MIN_GAIN = 1e-9


class DetectionError(RuntimeError):
    """No packet found above the detection threshold."""


class EstimationError(RuntimeError):
    """Channel or phase estimation impossible on this input."""


@dataclass
class SyncResult:
    frame_start: int
    coarse_cfo_hz: float = 0.0
    fine_cfo_hz: float = 0.0
    detection_metric: float = 0.0

    @property
    def cfo_hz(self) -> float:
        return self.coarse_cfo_hz + self.fine_cfo_hz


def detect_packet(rx, ltf_ref, threshold: float = 0.6, delay_spread: int = 0) -> SyncResult:
    """Locate the frame by normalized cross-correlation against the long preamble.

    The metric at each lag is |corr| / (||ref|| ||window||), in [0, 1]; the
    frame is declared at the strongest pair of peaks spaced 64 samples (the
    two long-preamble symbols).

    With delay_spread > 0 the correlation energy of the following
    delay_spread lags is pooled into the metric (window energy normalized
    over the extended span), which keeps the metric channel-independent on
    multipath and aligns the lag to the first arriving path; within the
    resulting plateau the latest near-maximal lag is chosen, which reduces
    to the exact peak on a clean channel.
    """
    rx = np.asarray(rx, dtype=np.complex128)
    ref = np.asarray(ltf_ref, dtype=np.complex128)
    if rx.shape[0] < PREAMBLE_LEN + ref.shape[0]:
        raise ValueError("capture shorter than a frame preamble")
    corr = np.correlate(rx, ref, mode="valid")
    ref_energy = float(np.sum(np.abs(ref) ** 2))
    power = np.abs(rx) ** 2
    cum = np.concatenate([[0.0], np.cumsum(power)])

    if delay_spread > 0:
        sq = np.abs(corr) ** 2
        csq = np.concatenate([[0.0], np.cumsum(sq)])
        span = delay_spread + 1
        if sq.shape[0] < span:
            raise ValueError("capture too short for the delay-spread window")
        pooled = csq[span:] - csq[:-span]
        w = ref.shape[0] + delay_spread
        win = cum[w:] - cum[:-w]
        n = min(pooled.shape[0], win.shape[0])
        metric = np.sqrt(pooled[:n]) / (np.sqrt(ref_energy * win[:n]) + 1e-300)
    else:
        win = cum[ref.shape[0]:] - cum[:-ref.shape[0]]
        metric = np.abs(corr) / (np.sqrt(ref_energy * win) + 1e-300)

    if metric.shape[0] <= 64:
        raise ValueError("capture too short for the peak-pair search")
    pair = 0.5 * (metric[:-64] + metric[64:])
    d = int(np.argmax(pair))
    peak = float(pair[d])
    if peak < threshold:
        raise DetectionError(f"no preamble found (best metric {peak:.3f} < {threshold})")
    if delay_spread > 0:
        stop = min(pair.shape[0], d + delay_spread + 1)
        late = np.flatnonzero(pair[d:stop] >= 0.99 * peak)
        d = d + int(late[-1])
    start = d - LTF_SYMBOL_OFFSET
    if start < 0:
        raise DetectionError("frame starts before the capture")
    return SyncResult(frame_start=start, detection_metric=peak)


def _deramp(x: np.ndarray, f_hz: float, fs: float) -> np.ndarray:
    n = np.arange(x.shape[0])
    return x * np.exp(-2j * np.pi * f_hz * n / fs)


def correct_cfo(
    rx,
    sync: SyncResult,
    p: OfdmParams,
    n_blocks_after_preamble: int = 0,
    cp_pairs: int = 12,
) -> tuple[np.ndarray, SyncResult]:
    """Estimate and remove the carrier frequency offset.

    Three stages, each from the phase of a lag autocorrelation: coarse on
    the short preamble (lag 16), fine on the long preamble (lag 64), and a
    refinement pooling every lag-64 self-similarity in the frame: the short
    preamble again (its period divides 64), the long preamble, and the last
    cp_pairs cyclic-prefix samples of every following OFDM symbol (the tail
    of the CP stays clean of multipath transients).  Returns the corrected
    signal and a SyncResult with the coarse / fine estimates filled in.
    """
    x = np.asarray(rx, dtype=np.complex128)
    fs = p.sample_rate
    s = sync.frame_start
    if s < 0 or s + PREAMBLE_LEN > x.shape[0]:
        raise ValueError("sync.frame_start outside the capture")

    stf = x[s:s + 160]
    f_coarse = float(np.angle(np.vdot(stf[:-16], stf[16:])) * fs / (2.0 * np.pi * 16.0))
    x1 = _deramp(x, f_coarse, fs)

    ltf = x1[s + 160:s + 320]
    f_fine = float(np.angle(np.vdot(ltf[:96], ltf[64:160])) * fs / (2.0 * np.pi * 64.0))
    x2 = _deramp(x1, f_fine, fs)

    acc = np.vdot(x2[s + 160:s + 256], x2[s + 224:s + 320])
    acc += np.vdot(x2[s:s + 96], x2[s + 64:s + 160])
    n_blocks = int(n_blocks_after_preamble)
    if n_blocks > 0:
        sym_len = p.symbol_len
        m = min(cp_pairs, p.cp_len)
        starts = s + PREAMBLE_LEN + sym_len * np.arange(n_blocks)
        starts = starts[starts + sym_len <= x.shape[0]]
        if starts.size:
            offs = np.arange(p.cp_len - m, p.cp_len)
            idx = (starts[:, None] + offs[None, :]).ravel()
            acc += np.vdot(x2[idx], x2[idx + p.fft_size])
    f_refine = float(np.angle(acc) * fs / (2.0 * np.pi * p.fft_size))

    f_total = f_coarse + f_fine + f_refine
    out = _deramp(x, f_total, fs)
    return out, replace(sync, coarse_cfo_hz=f_coarse, fine_cfo_hz=f_fine + f_refine)


def estimate_channel_training(y_tr, reference_spectrum, p: OfdmParams,
                              max_taps: int | None = None) -> np.ndarray:
    """Per-bin channel estimate from the secured training symbol.

    H[k] = DFT(strip_cp(y_tr))[k] / reference_spectrum[k], where the
    reference is the scrambled training spectrum F P F^-1 X_tr known only
    to key holders.

    With max_taps set, the estimate is additionally constrained to an
    impulse response of at most that many samples (the system's own CP
    assumption), via weighted least squares on the raw bins.  This is
    exact on any CP-compatible channel without noise and removes the
    unbounded noise amplification the plain division suffers on bins
    where the reference magnitude is small.
    """
    y_tr = np.asarray(y_tr, dtype=np.complex128)
    ref = np.asarray(reference_spectrum, dtype=np.complex128)
    body = remove_cyclic_prefix(y_tr, p.cp_len, n=p.fft_size)
    if ref.shape[0] != p.fft_size:
        raise ValueError(f"reference must have length {p.fft_size}")
    if np.min(np.abs(ref)) < REF_MIN_GAIN:
        raise EstimationError("reference spectrum has a near-zero bin")
    Y = forward_dft(body)
    if max_taps is None:
        return Y / ref
    n = p.fft_size
    L = min(int(max_taps), n)
    if L < 1:
        raise ValueError("max_taps must be >= 1")
    k = np.arange(n)[:, None]
    basis = np.exp(-2j * np.pi * k * np.arange(L)[None, :] / n)
    taps, *_ = np.linalg.lstsq(ref[:, None] * basis, Y, rcond=None)
    return basis @ taps


def zero_forcing_equalize(Y, H) -> tuple[np.ndarray, int]:
    """Per-bin division by H; bins with |H| < 1e-6 are zeroed instead of amplified.

    Returns (equalized, number_of_zeroed_bins).  Y may be 2-D with one
    symbol per row.
    """
    Y = np.asarray(Y, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    bad = np.abs(H) < ZF_MIN_GAIN
    safe = np.where(bad, 1.0, H)
    X = Y / safe
    if bad.any():
        X[..., bad] = 0.0
    return X, int(bad.sum())


def decrypt_symbol(sym, H, key: PermutationKey, p: OfdmParams) -> np.ndarray:
    """Invert one received data symbol down to its 48 data-bin values."""
    sym = np.asarray(sym, dtype=np.complex128)
    if sym.shape[0] != p.symbol_len:
        raise ValueError(f"expected {p.symbol_len} samples, got {sym.shape[0]}")
    body = remove_cyclic_prefix(sym, p.cp_len, n=p.fft_size)
    Y = forward_dft(body)
    X, _ = zero_forcing_equalize(Y, H)
    t = inverse_dft(X)
    t = derandomize(t, key)
    spectrum = forward_dft(t)
    data, _pilots = unmap_subcarriers(spectrum, p)
    return data


def _region_masks(values: np.ndarray, m_regions: int) -> list[np.ndarray]:
    if m_regions == 2:
        return [values.real < 0, values.real >= 0]
    return [
        (values.real >= 0) & (values.imag >= 0),
        (values.real < 0) & (values.imag >= 0),
        (values.real < 0) & (values.imag < 0),
        (values.real >= 0) & (values.imag < 0),
    ]


def _farthest_ideal(candidates: np.ndarray) -> complex:
    """Maximum-magnitude alphabet point of a region; ties break toward larger real part."""
    mags = np.abs(candidates)
    near_max = mags >= mags.max() - 1e-12
    tied = candidates[near_max]
    return complex(tied[np.argmax(tied.real)])


def estimate_residual_phase(symbols, scheme: ModulationScheme, seed: int = 0) -> float:
    """Estimate the common rotation of a received constellation.

    K-medoids with one cluster per alphabet point; in each quadrant
    (half-plane for BPSK) the highest-energy medoid is matched to the
    farthest ideal constellation point of that quadrant and their angle
    difference is taken; the estimate is the mean over the 2 (BPSK) or 4
    regions.  Returns the apparent rotation, i.e. the angle by which the
    cloud appears turned relative to the ideal grid.
    """
    pts = np.asarray(symbols, dtype=np.complex128).ravel()
    k = scheme.points.size
    if k > pts.shape[0]:
        raise ValueError(f"need at least {k} points, got {pts.shape[0]}")
    m_regions = 2 if scheme.bits_per_symbol == 1 else 4
    clusters = k_medoids(pts, k, seed=seed)
    clusters.quadrants = m_regions
    centers = clusters.centers
    thetas = []
    for mask_c, mask_i in zip(_region_masks(centers, m_regions),
                              _region_masks(scheme.points, m_regions)):
        region_centers = centers[mask_c]
        if region_centers.size == 0:
            raise EstimationError("a constellation quadrant holds no cluster center")
        c_max = region_centers[np.argmax(np.abs(region_centers))]
        x_t = _farthest_ideal(scheme.points[mask_i])
        thetas.append(float(np.angle(c_max / x_t)))
    return float(np.mean(thetas))


def correct_phase(symbols, theta: float) -> np.ndarray:
    """Rotate every symbol by exp(j theta)."""
    return np.asarray(symbols, dtype=np.complex128) * np.exp(1j * theta)


@dataclass
class RxConfig:
    params: OfdmParams
    scheme: ModulationScheme
    n_data_symbols: int
    csi_mode: str = "oracle"            # "oracle" | "training"
    key_source: str = "shared_key"      # "shared_key" | "identity_key" | "random_guess"
    schedule: KeySchedule | None = None
    training_secret: bytes = b""
    frame_mode: str = MODE_RAND
    guess_seed: int = 0                 # drives the random_guess key
    detect_threshold: float = 0.6
    timing_backoff: int = 3             # early shift applied in training mode, absorbed by H
    zf_erasure_rel: float = 0.0         # optionally erase estimated bins below this fraction of rms|H|
    estimator_max_taps: int | None = None  # optional CP-constrained channel estimation
    phase_mode: str = "pooled"          # "pooled" | "per_symbol" | "off"
    phase_points_cap: int = 512
    phase_seed: int = 0
    drift_correction: bool = True

    def __post_init__(self) -> None:
        if self.csi_mode not in ("oracle", "training"):
            raise ValueError(f"unknown csi_mode {self.csi_mode!r}")
        if self.key_source not in ("shared_key", "identity_key", "random_guess"):
            raise ValueError(f"unknown key_source {self.key_source!r}")
        if self.frame_mode not in (MODE_LEGACY, MODE_RAND):
            raise ValueError(f"unknown frame_mode {self.frame_mode!r}")
        if self.phase_mode not in ("pooled", "per_symbol", "off"):
            raise ValueError(f"unknown phase_mode {self.phase_mode!r}")
        if self.n_data_symbols < 1:
            raise ValueError("n_data_symbols must be >= 1")
        if self.key_source == "shared_key" and self.schedule is None:
            raise ValueError("shared_key reception needs a key schedule")


@dataclass
class RxResult:
    bits: np.ndarray
    sync: SyncResult
    h_est: np.ndarray
    theta_rad: float
    symbols: np.ndarray       # (n_data_symbols, 48) after all corrections
    zeroed_bins: int = 0
    drift_rad_per_symbol: float = 0.0


def _resolve_schedule(cfg: RxConfig) -> KeySchedule:
    n = cfg.params.fft_size
    if cfg.key_source == "shared_key":
        return cfg.schedule
    if cfg.key_source == "identity_key":
        return single_key_schedule(identity_key(n))
    return single_key_schedule(random_key(n, cfg.guess_seed))


def _phase_symmetry(scheme: ModulationScheme) -> float:
    """Rotational symmetry period of the alphabet: pi for BPSK, pi/2 otherwise."""
    return np.pi if scheme.bits_per_symbol == 1 else np.pi / 2.0


def _pooled_phase(data: np.ndarray, cfg: RxConfig) -> float:
    pool = data.ravel()
    cap = cfg.phase_points_cap
    if cap and pool.shape[0] > cap:
        idx = np.random.default_rng(cfg.phase_seed).choice(pool.shape[0], cap, replace=False)
        pool = pool[idx]
    try:
        theta = estimate_residual_phase(pool, cfg.scheme, seed=cfg.phase_seed)
    except EstimationError:
        return 0.0
    limit = _phase_symmetry(cfg.scheme) / 2.0
    return float(np.clip(theta, -limit, limit))


def _mpower_slope(data: np.ndarray, scheme: ModulationScheme) -> float:
    """Linear phase drift per symbol, measured without decisions.

    Raising each symbol to the alphabet's rotational-symmetry order M
    (2 for BPSK, 4 otherwise) cancels the modulation, so the angle of the
    per-symbol sum of m-th powers advances linearly at M times the drift
    rate.  The rate is read from lag products of that sequence (coarse at
    lag 1, refined at a longer lag), which needs no unwrapping and weights
    noisy symbols down by their own magnitude.  One shot, no feedback loop.
    """
    n_sym = data.shape[0]
    m = 2 if scheme.bits_per_symbol == 1 else 4
    z = np.sum(data**m, axis=1)
    slope = float(np.angle(np.vdot(z[:-1], z[1:]))) / m
    lag = min(16, n_sym // 2)
    if lag > 1:
        zc = z * np.exp(-1j * m * slope * np.arange(n_sym))
        slope += float(np.angle(np.vdot(zc[:-lag], zc[lag:]))) / (m * lag)
    return slope


def _mpower_drift(data: np.ndarray, scheme: ModulationScheme) -> tuple[np.ndarray, float]:
    """Remove the residual linear drift, pivoting at the packet center; the
    remaining static rotation is left for the clustering corrector."""
    n_sym = data.shape[0]
    slope = _mpower_slope(data, scheme)
    idx = np.arange(n_sym, dtype=float)
    correction = np.exp(-1j * slope * (idx - 0.5 * (n_sym - 1)))
    return data * correction[:, None], slope


def receive_frame_detailed(rx, cfg: RxConfig, oracle=None) -> RxResult:
    """Full receive chain; see receive_frame for the bit-level wrapper."""
    rx = np.asarray(rx, dtype=np.complex128)
    p = cfg.params
    schedule = _resolve_schedule(cfg)
    has_training = cfg.frame_mode == MODE_RAND

    ref = ltf_symbol(p)
    use_oracle = cfg.csi_mode == "oracle"
    if use_oracle:
        if oracle is None:
            raise ValueError("oracle csi_mode needs the channel realization")
        if not oracle.is_identity:
            ref = np.convolve(ref, oracle.taps)
    sync = detect_packet(rx, ref, threshold=cfg.detect_threshold,
                         delay_spread=0 if use_oracle else p.cp_len - 2)
    if not use_oracle and cfg.timing_backoff:
        sync.frame_start = max(0, sync.frame_start - cfg.timing_backoff)

    n_blocks = cfg.n_data_symbols + (1 if has_training else 0)
    x, sync = correct_cfo(rx, sync, p, n_blocks_after_preamble=n_blocks)

    s = sync.frame_start
    sym_len = p.symbol_len
    data_off = s + PREAMBLE_LEN + (sym_len if has_training else 0)
    end = data_off + sym_len * cfg.n_data_symbols
    if end > x.shape[0]:
        raise ValueError("capture truncated before the end of the payload")

    reference = None
    if not use_oracle:
        if not has_training:
            raise ValueError("training csi_mode needs a frame with a training symbol")
        if not cfg.training_secret:
            raise ValueError("training csi_mode needs a training secret")
        x_tr = training_spectrum(cfg.training_secret, p.fft_size)
        reference = spectral_transform(schedule.key_for_training(), x_tr)
        # Timing refinement: the pooled detector may lock up to a dozen
        # samples early on multipath.  The raw per-bin estimate's impulse
        # response localizes the channel's circular delay; re-anchor the
        # frame so the taps sit one sample into the CP-length tap window.
        y_tr = x[s + PREAMBLE_LEN:s + PREAMBLE_LEN + sym_len]
        g = np.fft.ifft(estimate_channel_training(y_tr, reference, p))
        energy = np.abs(g) ** 2
        ext = np.concatenate([energy, energy[:p.cp_len - 1]])
        windows = np.convolve(ext, np.ones(p.cp_len), mode="valid")[:p.fft_size]
        d0 = int(np.argmax(windows))
        signed = d0 if d0 < p.fft_size // 2 else d0 - p.fft_size
        shift = signed - 1
        if shift and 0 <= s + shift:
            s += shift
            sync = replace(sync, frame_start=s)
            data_off += shift
            end += shift
            if end > x.shape[0]:
                raise ValueError("capture truncated before the end of the payload")

    def _estimate_and_decrypt(xc):
        if use_oracle:
            h = np.asarray(oracle.freq_response, dtype=np.complex128)
        else:
            y_tr = xc[s + PREAMBLE_LEN:s + PREAMBLE_LEN + sym_len]
            h = estimate_channel_training(y_tr, reference, p,
                                          max_taps=cfg.estimator_max_taps)
            # Optional robustness knob, off by default: an estimated gain
            # far below the channel's RMS is mostly estimation noise, and
            # inverting it amplifies without bound.  Erasing such bins
            # trades that for a bounded 1/N energy loss, which the scramble
            # spreads thinly; together with estimator_max_taps this makes
            # the secured link outperform the plain per-bin receiver.
            if cfg.zf_erasure_rel > 0:
                rms = np.sqrt(np.mean(np.abs(h) ** 2))
                h = np.where(np.abs(h) < cfg.zf_erasure_rel * rms, 0.0, h)
        bodies = xc[data_off:end].reshape(cfg.n_data_symbols, sym_len)[:, p.cp_len:]
        Y = np.fft.fft(bodies, axis=1)
        X, n_zeroed = zero_forcing_equalize(Y, h)
        t = np.fft.ifft(X, axis=1)
        if cfg.key_source == "shared_key" and schedule.policy == "round_robin":
            de = np.empty_like(t)
            for i in range(cfg.n_data_symbols):
                de[i] = derandomize(t[i], schedule.key_for_symbol(i))
        else:
            de = derandomize(t, schedule.key_for_symbol(0))
        spectra = np.fft.fft(de, axis=1)
        return h, spectra[:, list(p.data_bins)], n_zeroed

    h_est, data, zeroed = _estimate_and_decrypt(x)

    # The preamble CFO stages leave a residual that still winds the
    # constellation across the packet (hundreds of Hz at low SNR).  Measure
    # it from the decrypted symbols via the modulation-free m-th power
    # slope, re-derotate the capture and decrypt once more, so only a small
    # static rotation is left for the clustering stage.
    drift = 0.0
    if cfg.drift_correction and cfg.n_data_symbols >= 4:
        slope = _mpower_slope(data, cfg.scheme)
        f_extra = slope * p.sample_rate / (2.0 * np.pi * sym_len)
        x = _deramp(x, f_extra, p.sample_rate)
        sync = replace(sync, fine_cfo_hz=sync.fine_cfo_hz + f_extra)
        h_est, data, zeroed = _estimate_and_decrypt(x)
        data, drift = _mpower_drift(data, cfg.scheme)

    theta = 0.0
    if cfg.phase_mode == "pooled":
        theta = _pooled_phase(data, cfg)
        data = data * np.exp(-1j * theta)
    elif cfg.phase_mode == "per_symbol":
        for i in range(data.shape[0]):
            try:
                th = estimate_residual_phase(data[i], cfg.scheme, seed=cfg.phase_seed)
            except EstimationError:
                th = 0.0
            data[i] = data[i] * np.exp(-1j * th)

    bits = demodulate_symbols(data.ravel(), cfg.scheme)
    return RxResult(bits=bits, sync=sync, h_est=h_est, theta_rad=theta,
                    symbols=data, zeroed_bins=zeroed, drift_rad_per_symbol=drift)


def receive_frame(rx, cfg: RxConfig, oracle=None) -> np.ndarray:
    """Decode a captured frame to its payload bits.

    Raises DetectionError when no preamble is found and EstimationError when
    channel estimation is impossible; callers running statistics count such
    frames as erased (50% BER over their bits).
    """
    return receive_frame_detailed(rx, cfg, oracle=oracle).bits
