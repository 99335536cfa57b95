"""Monte-Carlo BER engine: packet-level sweeps over SNR, modulation,
channel preset and receiver mode, with deterministic seeding and
machine-readable output.

Receiver modes:

    legacy         plain OFDM frame, true channel known
    oracle         scrambled frame, shared key, true channel known
    training       scrambled frame, shared key, channel estimated from the
                   secured training symbol
    eve-identity   eavesdropper who treats the frame as plain OFDM; she is
                   even granted the true channel
    eve-random     fully blind eavesdropper: random key guess, channel
                   estimation attempted with her own wrong key and secret
    eve-oracle-csi eavesdropper handed the true channel but guessing the key

Lost packets (no detection / failed estimation) are charged 50% BER over
their bits and counted in packets_lost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .channel import add_awgn, apply_channel, apply_impairments, presets, realize_channel, ImpairmentConfig
from .keying import KeySchedule, derive_key
from .modulation import get_scheme
from .params import OfdmParams
from .rx import DetectionError, EstimationError, RxConfig, receive_frame
from .tx import FrameConfig, MODE_LEGACY, MODE_RAND, build_frame

MODES = ("legacy", "oracle", "training", "eve-identity", "eve-random", "eve-oracle-csi")

CSV_HEADER = "snr_db,scheme,channel,mode,bits_sent,bit_errors,ber,ci_low,ci_high,packets,packets_lost"

_PAD_FRONT = 200
_PAD_BACK = 80


@dataclass(frozen=True)
class SweepSpec:
    snr_db: tuple[float, ...]
    schemes: tuple[str, ...] = ("bpsk",)
    channel: str = "awgn"
    modes: tuple[str, ...] = ("legacy",)
    n_packets: int = 100
    n_data_symbols: int = 100
    base_seed: int = 0

    def __post_init__(self) -> None:
        for m in self.modes:
            if m not in MODES:
                raise ValueError(f"unknown mode {m!r}")
        for s in self.schemes:
            get_scheme(s)
        if self.channel not in presets():
            raise ValueError(f"unknown channel preset {self.channel!r}")
        if self.n_packets < 1 or self.n_data_symbols < 1:
            raise ValueError("n_packets and n_data_symbols must be >= 1")


@dataclass
class BerRecord:
    snr_db: float
    scheme: str
    channel: str
    mode: str
    bits_sent: int
    bit_errors: int
    ber: float
    ci_low: float
    ci_high: float
    packets: int
    packets_lost: int


def wilson_interval(errors: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    p = errors / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _mode_wiring(mode: str) -> tuple[str, str, str]:
    """mode name -> (frame_mode, csi_mode, key_source)."""
    return {
        "legacy": (MODE_LEGACY, "oracle", "identity_key"),
        "oracle": (MODE_RAND, "oracle", "shared_key"),
        "training": (MODE_RAND, "training", "shared_key"),
        "eve-identity": (MODE_RAND, "oracle", "identity_key"),
        "eve-random": (MODE_RAND, "training", "random_guess"),
        "eve-oracle-csi": (MODE_RAND, "oracle", "random_guess"),
    }[mode]


def _seed_of(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_point(
    channel: str,
    scheme_name: str,
    mode: str,
    snr_db: float,
    n_packets: int,
    n_data_symbols: int,
    base_seed: int = 0,
    point_index: int = 0,
    impairments: ImpairmentConfig | None = None,
) -> BerRecord:
    """One Monte-Carlo point: n_packets fresh (payload, key, channel, noise) draws."""
    model = presets()[channel]
    p = OfdmParams()
    scheme = get_scheme(scheme_name)
    frame_mode, csi_mode, key_source = _mode_wiring(mode)
    bits_per_packet = n_data_symbols * p.n_data_subcarriers * scheme.bits_per_symbol

    bits_sent = 0
    bit_errors = 0
    packets_lost = 0
    for pkt in range(n_packets):
        ss = np.random.SeedSequence([int(base_seed), int(point_index), pkt])
        c_payload, c_channel, c_noise, c_misc = ss.spawn(4)
        rng = np.random.default_rng(c_payload)
        payload = rng.integers(0, 2, bits_per_packet, dtype=np.uint8)
        secret = rng.bytes(16)
        training_secret = rng.bytes(16)
        schedule = KeySchedule((derive_key(secret, p.fft_size),))

        tx_cfg = FrameConfig(p, scheme, n_data_symbols, schedule,
                             training_secret=training_secret, mode=frame_mode)
        frame = build_frame(tx_cfg, payload)
        samples = frame.samples()

        rng_misc = np.random.default_rng(c_misc)
        pad = _PAD_FRONT + int(rng_misc.integers(0, 37))
        tx_vec = np.concatenate([
            np.zeros(pad, dtype=np.complex128), samples,
            np.zeros(_PAD_BACK, dtype=np.complex128),
        ])
        realization = realize_channel(model, p, seed=_seed_of(c_channel))
        clean = apply_channel(tx_vec, realization)
        signal_power = float(np.mean(np.abs(clean[pad:pad + samples.shape[0]]) ** 2))
        if impairments is None:
            rx_vec = add_awgn(clean, snr_db, signal_power, seed=_seed_of(c_noise))
        else:
            imp = ImpairmentConfig(impairments.cfo_hz, impairments.static_phase_rad, snr_db)
            rx_vec = apply_impairments(clean, imp, p.sample_rate, signal_power,
                                       seed=_seed_of(c_noise))

        rx_cfg = RxConfig(
            params=p, scheme=scheme, n_data_symbols=n_data_symbols,
            csi_mode=csi_mode, key_source=key_source, schedule=schedule,
            training_secret=(training_secret if key_source == "shared_key"
                             else rng_misc.bytes(16)),
            frame_mode=frame_mode,
            guess_seed=_seed_of(c_misc), phase_seed=_seed_of(c_misc) ^ 0x5EED,
        )
        bits_sent += bits_per_packet
        try:
            decoded = receive_frame(rx_vec, rx_cfg,
                                    oracle=realization if csi_mode == "oracle" else None)
            bit_errors += int(np.count_nonzero(decoded != payload))
        except (DetectionError, EstimationError):
            packets_lost += 1
            bit_errors += bits_per_packet // 2

    ber = bit_errors / bits_sent if bits_sent else 0.0
    lo, hi = wilson_interval(bit_errors, bits_sent)
    return BerRecord(
        snr_db=float(snr_db), scheme=scheme_name, channel=channel, mode=mode,
        bits_sent=bits_sent, bit_errors=bit_errors, ber=ber,
        ci_low=lo, ci_high=hi, packets=n_packets, packets_lost=packets_lost,
    )


def run_sweep(spec: SweepSpec, impairments: ImpairmentConfig | None = None) -> list[BerRecord]:
    """Cartesian product scheme x mode x snr, in that deterministic order.

    Every point derives its packet seeds from (base_seed, point_index), so
    identical specs produce byte-identical output and points are independent.
    """
    records = []
    point_index = 0
    for scheme_name in spec.schemes:
        for mode in spec.modes:
            for snr in spec.snr_db:
                records.append(run_point(
                    spec.channel, scheme_name, mode, snr,
                    spec.n_packets, spec.n_data_symbols,
                    base_seed=spec.base_seed, point_index=point_index,
                    impairments=impairments,
                ))
                point_index += 1
    return records


def _fmt(v: float) -> str:
    return format(v, ".10g")


def records_to_csv(records: list[BerRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            _fmt(r.snr_db), r.scheme, r.channel, r.mode,
            str(r.bits_sent), str(r.bit_errors), _fmt(r.ber),
            _fmt(r.ci_low), _fmt(r.ci_high), str(r.packets), str(r.packets_lost),
        ]))
    return "\n".join(lines) + "\n"


def records_to_json(records: list[BerRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=2) + "\n"


def snr_at_ber(records: list[BerRecord], target_ber: float) -> float:
    """SNR where a BER curve crosses target_ber, by linear interpolation of
    log10(BER) against SNR.  Records must share one (scheme, mode, channel)."""
    pts = sorted((r.snr_db, r.ber) for r in records)
    if len(pts) < 2:
        raise ValueError("need at least two sweep points")
    floor = 0.5 / max(r.bits_sent for r in records)
    logs = [(s, math.log10(max(b, floor))) for s, b in pts]
    target = math.log10(target_ber)
    for (s0, l0), (s1, l1) in zip(logs, logs[1:]):
        if (l0 - target) * (l1 - target) <= 0 and l0 != l1:
            return s0 + (s1 - s0) * (l0 - target) / (l0 - l1)
    raise ValueError(f"curve does not cross BER {target_ber} within the sweep")
