"""Complex-vector DSP primitives: DFT pair, cyclic prefix, subcarrier grid.

Convention: unnormalized forward transform, 1/N on the inverse (numpy's
fft/ifft pair).  Signals are 1-D complex128 arrays throughout.
"""

from __future__ import annotations

import numpy as np

from .params import OfdmParams


def _as_signal(x, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    return x


def forward_dft(x, n: int | None = None) -> np.ndarray:
    """X[k] = sum_n x[n] exp(-2j pi n k / N)."""
    x = _as_signal(x)
    if n is not None and x.shape[0] != n:
        raise ValueError(f"expected length {n}, got {x.shape[0]}")
    return np.fft.fft(x)


def inverse_dft(X, n: int | None = None) -> np.ndarray:
    """x[n] = (1/N) sum_k X[k] exp(+2j pi n k / N)."""
    X = _as_signal(X, "X")
    if n is not None and X.shape[0] != n:
        raise ValueError(f"expected length {n}, got {X.shape[0]}")
    return np.fft.ifft(X)


def add_cyclic_prefix(x, cp_len: int) -> np.ndarray:
    """Prepend the last cp_len samples of x."""
    x = _as_signal(x)
    if not 0 < cp_len < x.shape[0]:
        raise ValueError(f"cp_len must satisfy 0 < cp_len < {x.shape[0]}, got {cp_len}")
    return np.concatenate([x[-cp_len:], x])


def remove_cyclic_prefix(y, cp_len: int, n: int | None = None) -> np.ndarray:
    """Drop the first cp_len samples; the remainder is the symbol body."""
    y = _as_signal(y, "y")
    if cp_len <= 0 or y.shape[0] <= cp_len:
        raise ValueError(f"cp_len must satisfy 0 < cp_len < {y.shape[0]}, got {cp_len}")
    if n is not None and y.shape[0] != n + cp_len:
        raise ValueError(f"expected length {n + cp_len}, got {y.shape[0]}")
    return y[cp_len:]


def map_subcarriers(data, pilots, p: OfdmParams) -> np.ndarray:
    """Place data on the non-pilot used bins (ascending bin order) and pilots on the pilot bins."""
    data = _as_signal(data, "data")
    pilots = _as_signal(pilots, "pilots")
    if not p.used_subcarriers:
        raise ValueError("params carry no subcarrier layout")
    data_bins = p.data_bins
    if data.shape[0] != len(data_bins):
        raise ValueError(f"expected {len(data_bins)} data points, got {data.shape[0]}")
    if pilots.shape[0] != len(p.pilot_bins):
        raise ValueError(f"expected {len(p.pilot_bins)} pilot points, got {pilots.shape[0]}")
    out = np.zeros(p.fft_size, dtype=np.complex128)
    out[list(data_bins)] = data
    out[list(p.pilot_bins)] = pilots
    return out


def unmap_subcarriers(spectrum, p: OfdmParams) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of map_subcarriers: extract (data, pilots) from a full spectrum."""
    spectrum = _as_signal(spectrum, "spectrum")
    if spectrum.shape[0] != p.fft_size:
        raise ValueError(f"expected length {p.fft_size}, got {spectrum.shape[0]}")
    if not p.used_subcarriers:
        raise ValueError("params carry no subcarrier layout")
    return spectrum[list(p.data_bins)], spectrum[list(p.pilot_bins)]
