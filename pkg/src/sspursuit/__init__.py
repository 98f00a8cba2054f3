"""Superimposed pilots and structured subspace pursuit for multi-antenna
OFDM channel estimation.

All antennas share one compressed set of pilot subcarriers, separated only by
per-antenna +/-1 sequences; the structured solver exploits the tap support
common to every antenna (and, with R > 1, to several OFDM symbols) to recover
the full channel from far fewer pilots than orthogonal designs need.
"""

from .channel import (
    BUILTIN_PROFILES,
    ITU_VEHICULAR_B,
    ChannelRealization,
    ChannelSpec,
    PowerDelayProfile,
    generate_channel,
    load_pdp,
    parse_pdp,
    quantize_pdp,
    save_pdp,
)
from .experiments import (
    AlgorithmEntry,
    ExperimentConfig,
    ResultRow,
    ResultTable,
    emit_csv,
    emit_plot_data,
    load_experiment_config,
    parse_experiment_config,
    read_result_csv,
    run_experiment,
    summarize,
)
from .measurement import MeasurementBlock, measurement_to_csv, simulate_measurement
from .pilots import (
    OverheadReport,
    PilotConfig,
    SensingMatrix,
    build_sensing_matrix,
    design_pilots,
    load_pilot_config,
    overhead_report,
    pilot_subcarriers,
    save_pilot_config,
)
from .recovery import (
    NMSE_DB_FLOOR,
    GramTable,
    RecoveryResult,
    SupportEstimate,
    aggregate_tap_energy,
    expand_support,
    ls_on_support,
    nmse,
    nmse_db,
    oracle_ls,
    sp_recover,
    ssp_recover,
    sweep_sparsity,
    top_k_taps,
)

__version__ = "0.1.0"
