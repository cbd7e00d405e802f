"""Link-level simulator comparing fully digital, phased-array hybrid, and
lens-array hybrid mmWave MIMO transmitters."""

__version__ = "0.1.0"

from .channel import (  # noqa: F401
    ArrayGeometry,
    BeamspaceTransform,
    ChannelRealization,
    PathComponent,
    ScenarioConfig,
    dft_matrix,
    gen_scenario,
    gen_user_channel,
    steering_vector,
    to_beamspace,
)
from .estimation import (  # noqa: F401
    BudgetError,
    DirectionDictionary,
    EstimationReport,
    PilotBudget,
    SensingPlan,
    build_sensing_plan,
    direction_dictionary,
    estimate_adaptive_cs,
    estimate_beamspace_cs,
    estimate_ls_direct,
    estimate_ls_effective,
    omp_recover,
)
from .metrics import (  # noqa: F401
    PowerConstants,
    RateResult,
    hardware_power,
    power_efficiency,
    snr_db_to_noise_var,
    sum_rate,
)
from .precoding import (  # noqa: F401
    BeamSet,
    PhaseCodebookConfig,
    PrecoderPair,
    beam_subset_rate,
    hybrid_factorize_omp,
    lahp_precoder,
    matched_codeword,
    select_beams_exhaustive,
    select_beams_ia,
    select_beams_incremental,
    select_beams_mm,
    two_stage_full_pahp,
    zf_precoder,
)
