"""Tone-reservation optimizers for OFDM nonlinear distortion reduction."""

from .baselines import (NCC_TR, PAPR_TR, BaselineConfig, count_ops_baseline,
                        solve_ncc_tr, solve_papr_tr)
from .estimators import AcTrOptimizer, NccTrOptimizer, PaprTrOptimizer
from .experiments import ExperimentSpec, benchmark_config, run_experiment
from .metrics import (AC_TR, ALGORITHMS, REFERENCE, RunMetrics, ccdf, papr,
                      run_ensemble, welch_psd)
from .ofdm import (ConfigurationError, FreqSymbol, SystemConfig, TimeFrame,
                   data_waveform, dft, dft_bin, idft, modulate, random_frame,
                   symbol_rng, tr_waveform)
from .pa import (BussgangSplit, NumericalError, RappPa, bussgang_lambda,
                 bussgang_split, lambda_analytic, rapp_amplify, sdr_db,
                 soft_limit, v_sat_for_ibo)
from .solver import (AcTrConfig, SolveDiagnostics, count_ops_ac_tr, objective,
                     solve_ac_tr)

__version__ = "0.1.0"
