"""OFDM grid parameters (802.11a/g-style 64-bin layout by default)."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_SAMPLE_RATE = 20e6


def legacy_used_bins(n_fft: int = 64) -> tuple[int, ...]:
    """The 52 occupied bins (logical subcarriers +-1..+-26, DC excluded), wrapped to 0..n_fft-1."""
    logical = list(range(-26, 0)) + list(range(1, 27))
    return tuple(sorted(k % n_fft for k in logical))


def legacy_pilot_bins(n_fft: int = 64) -> tuple[int, ...]:
    """Pilot bins at logical subcarriers +-7 and +-21, wrapped to 0..n_fft-1."""
    return tuple(sorted(k % n_fft for k in (-21, -7, 7, 21)))


@dataclass(frozen=True)
class OfdmParams:
    """FFT size, cyclic prefix length and subcarrier layout.

    The default is the legacy 64-bin grid: 52 used subcarriers, 4 of them
    pilots, DC and 11 guard bins empty.  Other FFT sizes are allowed for
    bare DFT/permutation work; they carry an empty layout unless one is
    supplied explicitly, and the subcarrier mapping helpers then refuse
    to run.
    """

    fft_size: int = 64
    cp_len: int = 16
    used_subcarriers: tuple[int, ...] | None = None
    pilot_bins: tuple[int, ...] | None = None
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self) -> None:
        if self.fft_size < 2:
            raise ValueError(f"fft_size must be >= 2, got {self.fft_size}")
        if not 0 < self.cp_len < self.fft_size:
            raise ValueError(f"cp_len must satisfy 0 < cp_len < fft_size, got {self.cp_len}")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        used = self.used_subcarriers
        pilots = self.pilot_bins
        if used is None:
            used = legacy_used_bins(self.fft_size) if self.fft_size == 64 else ()
        if pilots is None:
            pilots = legacy_pilot_bins(self.fft_size) if self.fft_size == 64 else ()
        used = tuple(int(k) for k in used)
        pilots = tuple(int(k) for k in pilots)
        if used:
            if len(used) != 52:
                raise ValueError(f"expected 52 used subcarriers, got {len(used)}")
            if len(set(used)) != len(used):
                raise ValueError("used_subcarriers contains duplicates")
            if 0 in used:
                raise ValueError("the DC bin must stay empty")
            if any(not 0 <= k < self.fft_size for k in used):
                raise ValueError("used subcarrier index out of range")
            if not set(pilots) <= set(used):
                raise ValueError("pilot_bins must be a subset of used_subcarriers")
        elif pilots:
            raise ValueError("pilot_bins given without used_subcarriers")
        object.__setattr__(self, "used_subcarriers", used)
        object.__setattr__(self, "pilot_bins", pilots)

    @property
    def data_bins(self) -> tuple[int, ...]:
        """Used bins that carry data (ascending bin order, pilots excluded)."""
        pilots = set(self.pilot_bins)
        return tuple(k for k in self.used_subcarriers if k not in pilots)

    @property
    def n_data_subcarriers(self) -> int:
        return len(self.data_bins)

    @property
    def symbol_len(self) -> int:
        """Time-domain length of one OFDM symbol including its cyclic prefix."""
        return self.fft_size + self.cp_len
