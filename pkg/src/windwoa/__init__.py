"""Wind speed prediction toolkit.

A whale-style swarm optimizer, a compact tanh MLP with a damped
least-squares baseline trainer, hybrid weight selection coupling the
two, the agreement-metric suite (RMSE, SI, WI, NSE, KGE, R2, RE),
multi-station data handling with a correlated synthetic generator, and
a reproducible leave-one-station-out experiment harness.
"""

__version__ = "0.1.0"

from .benchmarks import BENCHMARKS, rastrigin, rosenbrock, sphere
from .dataset import (DataError, LooTask, Normalizer, SplitSpec, StationFrame, StationMeta,
                      build_loo_tasks, correlation_matrix, fit_normalizer, gilan_frame,
                      load_correlation, load_csv, load_station_meta, random_split,
                      repair_correlation, synth_generate, write_station_csv)
from .experiment import (ConfigError, ExperimentConfig, ExperimentResult, RepetitionRecord,
                         SynthSpec, TaskResult, WoaSettings, emit_plot_data,
                         load_experiment_frame, run_experiment, run_task, write_outputs)
from .metrics import (METRIC_COLUMNS, MetricReport, PredictionPair, RelativeError,
                      UndefinedMetricError, kge, metric_report, nse, r_squared,
                      relative_error, report_csv_header, report_csv_row,
                      report_json_dict, rmse, scatter_index, willmott_index)
from .mlp import (MlpTopology, SampleSet, flatten, forward, init_params, lm_train,
                  predict_batch, residual_jacobian, unflatten)
from .seeding import derive_seed, make_rng
from .training import (TRAINER_LMA, TRAINER_WOA, Normalization, TrainedModel,
                       default_woa_config, mlp_fitness, train_mlp_baseline, train_mlp_woa)
from .woa import (Bounds, InitializationError, SearchAgent, WoaConfig, WoaResult, WoaState,
                  coefficient_vectors, decay_a, encircle_step, explore_step,
                  initialize_population, spiral_step, woa_optimize, woa_step)
