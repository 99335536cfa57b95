"""File interchange: raw IQ captures, JSON sidecars, bit dumps.

IQ files hold interleaved 32-bit little-endian floats (I, Q, I, Q, ...).
The sidecar is a JSON object {n, cp, scheme, mode, n_symbols, sample_rate}
stored next to the capture as <path>.json.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def write_iq(path, samples) -> None:
    samples = np.asarray(samples, dtype=np.complex128)
    interleaved = np.empty(2 * samples.shape[0], dtype="<f4")
    interleaved[0::2] = samples.real.astype(np.float32)
    interleaved[1::2] = samples.imag.astype(np.float32)
    interleaved.tofile(str(path))


def read_iq(path) -> np.ndarray:
    raw = np.fromfile(str(path), dtype="<f4")
    if raw.size % 2:
        raise ValueError(f"{path}: odd float count, not an interleaved IQ file")
    return raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)


def sidecar_path(iq_path) -> Path:
    return Path(str(iq_path) + ".json")


def write_sidecar(iq_path, n: int, cp: int, scheme: str, mode: str,
                  n_symbols: int, sample_rate: float) -> None:
    meta = {"n": n, "cp": cp, "scheme": scheme, "mode": mode,
            "n_symbols": n_symbols, "sample_rate": sample_rate}
    sidecar_path(iq_path).write_text(json.dumps(meta, indent=2) + "\n", encoding="ascii")


def read_sidecar(iq_path) -> dict:
    return json.loads(sidecar_path(iq_path).read_text(encoding="ascii"))


def bits_to_hex(bits) -> str:
    """Pack a bit vector (MSB first) into a hex string; pads the tail with zeros."""
    bits = np.asarray(bits, dtype=np.uint8)
    return np.packbits(bits).tobytes().hex()


def hex_to_bits(text: str, n_bits: int | None = None) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(bytes.fromhex(text.strip()), dtype=np.uint8))
    if n_bits is not None:
        if bits.shape[0] < n_bits:
            raise ValueError(f"hex dump holds {bits.shape[0]} bits, need {n_bits}")
        bits = bits[:n_bits]
    return bits
