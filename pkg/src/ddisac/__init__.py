"""Delay-Doppler ISAC link simulator.

Evaluates rate-splitting precoders on an OTFS grid: LMMSE rates under
imperfect CSI/SIC on the communication side, exact delay/Doppler
Cramer-Rao bounds on the sensing side, and a penalty genetic algorithm
searching precoders for max-min fairness under both sets of constraints.
"""

__version__ = "0.1.0"

from .channel import (ChannelEstimate, EffectiveChannel, PathConfig, PathSet,
                      apply_icsi, build_effective, gen_paths)
from .comm import (CommMetrics, ImpairmentConfig, ReceiveFilters,
                   evaluate_comm, lmmse_filters, sinr_common, sinr_private)
from .ga import (FitnessBreakdown, FrameContext, GaConfig, GaRunFailed,
                 QosThresholds, fitness, run_ga)
from .grid import DDGrid, dd_grid_to_vec, dd_vec_to_grid, isfft, sfft
from .harness import (CampaignConfig, CampaignSummary, FrameResult, SummaryRow,
                      compute_cdf, full_ga_config, make_frame_context,
                      reduced_ga_config, run_campaign, run_frame, write_csvs)
from .precoding import (DegeneratePrecoderError, PrecoderSet, StreamSymbols,
                        compose_tx, decode_chromosome, draw_symbols,
                        encode_precoders, normalize_power)
from .sensing import (EchoField, FimResult, SensingTarget, SingularFimError,
                      WaveformMoments, crb, default_target, echo_derivatives,
                      echo_mean, fim, sensing_for_precoders, waveform_moments)

__all__ = [
    "__version__",
    # grid
    "DDGrid", "isfft", "sfft", "dd_vec_to_grid", "dd_grid_to_vec",
    # channel
    "PathConfig", "PathSet", "EffectiveChannel", "ChannelEstimate",
    "gen_paths", "build_effective", "apply_icsi",
    # precoding
    "PrecoderSet", "StreamSymbols", "DegeneratePrecoderError",
    "draw_symbols", "normalize_power", "decode_chromosome",
    "encode_precoders", "compose_tx",
    # comm
    "ImpairmentConfig", "ReceiveFilters", "CommMetrics",
    "lmmse_filters", "sinr_common", "sinr_private", "evaluate_comm",
    # sensing
    "SensingTarget", "EchoField", "WaveformMoments", "FimResult",
    "SingularFimError", "default_target", "echo_mean", "echo_derivatives",
    "waveform_moments", "fim", "crb", "sensing_for_precoders",
    # ga
    "QosThresholds", "FrameContext", "GaConfig", "FitnessBreakdown",
    "GaRunFailed", "fitness", "run_ga",
    # harness
    "CampaignConfig", "FrameResult", "SummaryRow", "CampaignSummary",
    "reduced_ga_config", "full_ga_config", "make_frame_context", "run_frame",
    "run_campaign", "compute_cdf", "write_csvs",
]
