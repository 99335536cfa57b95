"""permofdm: keyed time-domain permutation OFDM baseband.

A transmitter scrambles each OFDM symbol's time samples with a shared
secret permutation, erasing the subcarrier structure; a matching receiver
undoes the scramble after frequency-domain equalization, estimates the
channel from a key-protected training symbol, and corrects residual phase
by clustering the received constellation.  The package also ships a
channel emulator, eavesdropper models, a key-search toolkit and a
Monte-Carlo BER harness.
"""

from .params import OfdmParams, DEFAULT_SAMPLE_RATE
from .dsp import (
    add_cyclic_prefix,
    forward_dft,
    inverse_dft,
    map_subcarriers,
    remove_cyclic_prefix,
    unmap_subcarriers,
)
from .modulation import (
    BPSK,
    QAM16,
    QAM64,
    QPSK,
    SCHEMES,
    ModulationScheme,
    demodulate_symbols,
    get_scheme,
    modulate_bits,
)
from .keying import (
    KeySchedule,
    PermutationKey,
    derandomize,
    derive_key,
    identity_key,
    load_key_file,
    random_key,
    randomize,
    save_key_file,
    single_key_schedule,
    spectral_transform,
)
from .tx import (
    Frame,
    FrameConfig,
    MODE_LEGACY,
    MODE_RAND,
    build_frame,
    build_preambles,
    build_training_symbol,
    encrypt_data_symbol,
    ltf_symbol,
    training_spectrum,
)
from .channel import (
    ChannelModel,
    ChannelModelError,
    ChannelRealization,
    ImpairmentConfig,
    add_awgn,
    apply_cfo,
    apply_channel,
    apply_impairments,
    presets,
    realize_channel,
)
from .clustering import ClusterSet, k_medoids
from .rx import (
    DetectionError,
    EstimationError,
    RxConfig,
    RxResult,
    SyncResult,
    correct_cfo,
    correct_phase,
    decrypt_symbol,
    detect_packet,
    estimate_channel_training,
    estimate_residual_phase,
    receive_frame,
    receive_frame_detailed,
    zero_forcing_equalize,
)
from .attacks import (
    AttackReport,
    brute_force_attack,
    empirical_mutual_information,
    key_space_size,
    log10_success_probability,
    papr,
    success_probability,
)
from .sim import (
    BerRecord,
    MODES,
    SweepSpec,
    records_to_csv,
    records_to_json,
    run_point,
    run_sweep,
    snr_at_ber,
    wilson_interval,
)

__version__ = "0.1.0"
