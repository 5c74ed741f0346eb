"""Offline evaluation of contextual bandit algorithms on logged data."""

from .algorithms import (AlgorithmSpec, FixedPolicy, LinUcbPolicy, RandomPolicy,
                         UcbPolicy, fixed_policy, make_algorithm,
                         parse_algorithm, random_policy)
from .bred import (BredConfig, StandardizedCdf, bootstrap_resample,
                   bred_evaluate, confidence_region, default_bandwidth, jitter)
from .core import (AllPermutationsEmpty, AllReplicatesEmpty, BanditAlgorithm,
                   BanditEvalError, DegenerateDistribution, DimensionMismatch,
                   EvalReport, LoggedDataset, NoAcceptedRecords,
                   NonUniformLogging, ParseError, Record, SchemaError,
                   rng_stream)
from .dataio import load_dataset, save_dataset
from .plotting import emit_plot
from .replay import (ReplayResult, expected_acceptance,
                     permutation_ground_truth, replay_evaluate, subsample)
from .sweep import SweepSpec, run_error_sweep, write_csv
from .synthetic import (SyntheticModel, click_probability, draw_context,
                        generate_model, ground_truth_ctr, load_model,
                        save_model, simulate_log)
from .windows import (Window, make_multipool_dataset, partition_by_action_pool,
                      run_windowed_experiment, window_dataset)

__version__ = "0.1.0"
