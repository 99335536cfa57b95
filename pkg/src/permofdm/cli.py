"""Command-line front end: tx, rx, simulate, attack.

`simulate` accepts a config file of key=value lines mirroring its flags
(dashes or underscores, # comments); explicit flags override the file.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import iqio
from .attacks import (
    brute_force_attack,
    empirical_mutual_information,
    key_space_size,
    log10_success_probability,
    papr,
)
from .channel import presets
from .keying import (
    KeySchedule,
    derive_key,
    load_key_file,
    random_key,
    randomize,
    save_key_file,
    spectral_transform,
)
from .dsp import inverse_dft
from .modulation import get_scheme
from .params import OfdmParams
from .rx import DetectionError, EstimationError, RxConfig, receive_frame_detailed
from .sim import MODES, SweepSpec, records_to_csv, records_to_json, run_sweep
from .tx import FrameConfig, MODE_LEGACY, MODE_RAND, build_frame, training_spectrum


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SystemExit(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_defaults(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Pull --config out of argv and install its values as parser defaults."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    values = _parse_config_file(known.config)
    defaults = {}
    for action in parser._actions:
        if action.dest in values:
            raw = values[action.dest]
            if action.type is not None:
                raw = action.type(raw)
            elif isinstance(action.default, bool):
                raw = raw.lower() in ("1", "true", "yes", "on")
            defaults[action.dest] = raw
    parser.set_defaults(**defaults)
    return argv


def _frame_geometry(args) -> tuple[OfdmParams, object, str]:
    p = OfdmParams()
    scheme = get_scheme(args.scheme)
    mode = MODE_LEGACY if args.mode == "legacy" else MODE_RAND
    return p, scheme, mode


def _schedule_from_args(args, p: OfdmParams) -> KeySchedule:
    if getattr(args, "key_file", None):
        return KeySchedule((load_key_file(args.key_file, expected_n=p.fft_size),))
    return KeySchedule((derive_key(args.secret.encode(), p.fft_size),))


def _cmd_tx(args) -> int:
    p, scheme, mode = _frame_geometry(args)
    schedule = _schedule_from_args(args, p)
    rng = np.random.default_rng(args.seed)
    n_bits = args.symbols * p.n_data_subcarriers * scheme.bits_per_symbol
    payload = rng.integers(0, 2, n_bits, dtype=np.uint8)
    cfg = FrameConfig(p, scheme, args.symbols, schedule,
                      training_secret=args.training_secret.encode(), mode=mode)
    frame = build_frame(cfg, payload)
    iqio.write_iq(args.out, frame.samples())
    iqio.write_sidecar(args.out, n=p.fft_size, cp=p.cp_len, scheme=scheme.name,
                       mode=mode, n_symbols=args.symbols, sample_rate=p.sample_rate)
    if args.bits_out:
        with open(args.bits_out, "w", encoding="ascii") as fh:
            fh.write(iqio.bits_to_hex(payload) + "\n")
    if args.key_out:
        save_key_file(args.key_out, schedule.keys[0])
    print(f"wrote {frame.n_samples} samples to {args.out}")
    return 0


def _cmd_rx(args) -> int:
    p, scheme, mode = _frame_geometry(args)
    meta = None
    try:
        meta = iqio.read_sidecar(args.infile)
    except FileNotFoundError:
        pass
    if meta is not None:
        scheme = get_scheme(meta.get("scheme", scheme.name))
        mode = meta.get("mode", mode)
        args.symbols = int(meta.get("n_symbols", args.symbols))
    rx_vec = iqio.read_iq(args.infile)
    schedule = _schedule_from_args(args, p)
    csi = "training" if mode == MODE_RAND else "oracle"
    cfg = RxConfig(
        params=p, scheme=scheme, n_data_symbols=args.symbols,
        csi_mode=csi, key_source="identity_key" if mode == MODE_LEGACY else "shared_key",
        schedule=schedule, training_secret=args.training_secret.encode(),
        frame_mode=mode,
    )
    oracle = None
    if csi == "oracle":
        from .channel import ChannelModel, realize_channel
        oracle = realize_channel(ChannelModel("awgn"), p, seed=0)
    try:
        result = receive_frame_detailed(rx_vec, cfg, oracle=oracle)
    except (DetectionError, EstimationError) as exc:
        print(json.dumps({"error": str(exc)}))
        return 1
    ber = None
    if args.truth:
        with open(args.truth, "r", encoding="ascii") as fh:
            truth = iqio.hex_to_bits(fh.read(), n_bits=result.bits.shape[0])
        ber = float(np.count_nonzero(truth != result.bits) / result.bits.shape[0])
    report = {
        "frame_start": int(result.sync.frame_start),
        "cfo_hz": float(result.sync.cfo_hz),
        "theta_rad": float(result.theta_rad),
        "ber_if_truth_given": ber,
    }
    print(iqio.bits_to_hex(result.bits))
    print(json.dumps(report))
    if args.report:
        with open(args.report, "w", encoding="ascii") as fh:
            fh.write(json.dumps(report, indent=2) + "\n")
    return 0


def _cmd_simulate(args) -> int:
    snrs = []
    s = args.snr_start
    while s <= args.snr_stop + 1e-9:
        snrs.append(round(s, 6))
        s += args.snr_step
    spec = SweepSpec(
        snr_db=tuple(snrs),
        schemes=tuple(args.scheme.split(",")),
        channel=args.channel,
        modes=tuple(args.mode.split(",")),
        n_packets=args.packets,
        n_data_symbols=args.symbols,
        base_seed=args.seed,
    )
    records = run_sweep(spec)
    text = records_to_csv(records) if args.format == "csv" else records_to_json(records)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_attack(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.mode == "brute":
        key = random_key(args.n, rng)
        plain = rng.standard_normal(args.n) + 1j * rng.standard_normal(args.n)
        cipher = randomize(inverse_dft(plain), key)
        report = brute_force_attack(cipher, plain, args.n).to_dict()
        report["planted_key"] = [int(i) for i in key.perm]
    elif args.mode == "papr":
        deltas = []
        for _ in range(args.trials):
            x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
            k = random_key(64, rng)
            deltas.append(abs(papr(x) - papr(randomize(x, k))))
        report = {
            "mode": "papr", "trials": args.trials,
            "max_abs_papr_delta_db": max(deltas),
            "key_space_n64": str(key_space_size(64)),
            "log10_success_probability_n64": log10_success_probability(64),
        }
    else:  # mi
        p = OfdmParams()
        keys = [derive_key(rng.bytes(8), p.fft_size) for _ in range(args.n)]
        plain, cipher = [], []
        for i in range(max(args.trials, 1000)):
            x = training_spectrum(rng.bytes(8), p.fft_size)
            plain.append(x)
            cipher.append(spectral_transform(keys[i % len(keys)], x))
        report = {
            "mode": "mi", "n_keys": args.n, "pairs": len(plain),
            "mutual_information_bits": empirical_mutual_information(plain, cipher),
        }
    print(json.dumps(report, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permofdm",
                                     description="Keyed permutation-OFDM baseband toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    tx = sub.add_parser("tx", help="build a frame and write an IQ file")
    tx.add_argument("--out", required=True)
    tx.add_argument("--scheme", default="bpsk", choices=sorted(("bpsk", "qpsk", "qam16", "qam64")))
    tx.add_argument("--mode", default="rand_ofdm", choices=("legacy", "rand_ofdm"))
    tx.add_argument("--symbols", type=int, default=100)
    tx.add_argument("--secret", default="shared-secret")
    tx.add_argument("--training-secret", default="training-secret")
    tx.add_argument("--key-file", help="load the key from a file instead of deriving it")
    tx.add_argument("--key-out", help="also write the key file")
    tx.add_argument("--bits-out", help="also write the payload bits as hex")
    tx.add_argument("--seed", type=int, default=0)
    tx.set_defaults(func=_cmd_tx)

    rx = sub.add_parser("rx", help="decode an IQ file; prints hex bits and a JSON report")
    rx.add_argument("--in", dest="infile", required=True)
    rx.add_argument("--scheme", default="bpsk")
    rx.add_argument("--mode", default="rand_ofdm", choices=("legacy", "rand_ofdm"))
    rx.add_argument("--symbols", type=int, default=100)
    rx.add_argument("--secret", default="shared-secret")
    rx.add_argument("--training-secret", default="training-secret")
    rx.add_argument("--key-file")
    rx.add_argument("--truth", help="hex file of the true payload, enables BER in the report")
    rx.add_argument("--report", help="also write the JSON report here")
    rx.set_defaults(func=_cmd_rx)

    sim = sub.add_parser("simulate", help="Monte-Carlo BER sweep")
    sim.add_argument("--config", help="key=value file mirroring these flags")
    sim.add_argument("--channel", default="awgn", choices=sorted(presets()))
    sim.add_argument("--scheme", default="bpsk",
                     help="comma-separated list from bpsk,qpsk,qam16,qam64")
    sim.add_argument("--mode", default="legacy",
                     help="comma-separated list from " + ",".join(MODES))
    sim.add_argument("--snr-start", type=float, default=0.0)
    sim.add_argument("--snr-stop", type=float, default=10.0)
    sim.add_argument("--snr-step", type=float, default=2.0)
    sim.add_argument("--packets", type=int, default=20)
    sim.add_argument("--symbols", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", help="output path; stdout when omitted")
    sim.add_argument("--format", default="csv", choices=("csv", "json"))
    sim.set_defaults(func=_cmd_simulate)

    atk = sub.add_parser("attack", help="cryptanalysis toolkit")
    atk.add_argument("--n", type=int, default=4,
                     help="key length (brute), or number of keys (mi)")
    atk.add_argument("--mode", default="brute", choices=("brute", "papr", "mi"))
    atk.add_argument("--trials", type=int, default=1000)
    atk.add_argument("--seed", type=int, default=0)
    atk.set_defaults(func=_cmd_attack)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if argv and argv[0] == "simulate":
        sim_parser = parser._get_positional_actions()[0].choices["simulate"]
        _apply_config_defaults(sim_parser, argv)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
