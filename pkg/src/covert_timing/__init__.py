"""Covert communication with a secret transmission slot over AWGN channels.

Alice hides one codeword in one of ``T`` slots of ``n`` symbols. The
package simulates the channel, Willie's detectors and Bob's decoder,
evaluates closed-form bounds, and runs seeded Monte Carlo experiments.
"""

from .bounds import (BoundValue, chebyshev_slot_term_bound, chernoff_chi2_tail, converse_md_bound,
                     cosh_identity, cosh_identity_brute, decoding_bound, noncentral_chi2_bounds,
                     q_function, q_upper)
from .channel import (Frame, FrameTruth, max_slot_power, read_frame, sample_awgn, slot_power,
                      slot_powers, transmit_frame, write_frame)
from .coding import (Codebook, DecodeResult, FrameDecode, UsageError, augment_origin,
                     binary_codebook, gaussian_codebook, ml_decode_frame, ml_decode_slot)
from .detection import (Hypothesis, LrtStatistic, MaxPowerDetector, RescaledStatistic, UMoments,
                        log_lrt_binary, log_lrt_binary_brute, log_lrt_gaussian, lrt_decide,
                        maxpower_decide, maxpower_threshold, moments_U, rescale_statistic)
from .harness import (RocCurve, TrialSummary, estimate_decoding_error, estimate_detection_error,
                      estimate_roc, ks_distance, sample_statistic_distribution, scaling_sweep,
                      wilson_ci)
from .model import (DomainError, ParameterError, PowerBudget, ScenarioParams, Scheme,
                    TScheduleSpec, check_regime, power_budget, schedule_T, throughput_bits)

__version__ = "0.1.0"
