"""Train both models for a single target station, end to end.

Generates a synthetic frame shaped like the bundled Gilan statistics,
takes one leave-one-station-out task, splits 70/30, z-scores on the
training rows, trains the damped least-squares baseline and the
whale-search hybrid, and prints both phase reports in m/s.
"""

from windwoa import (MlpTopology, PredictionPair, SampleSet, build_loo_tasks,
                     default_woa_config, fit_normalizer, gilan_frame, metric_report,
                     random_split, train_mlp_baseline, train_mlp_woa)
from windwoa.training import Normalization

frame = gilan_frame(n_rows=1200, seed=11)
task = build_loo_tasks(frame)[2]
print(f"target station: {task.target_station}")
print(f"references    : {', '.join(task.reference_stations)}")

split = random_split(frame.n_rows, 0.7, seed=99)
columns = list(task.reference_stations) + [task.target_station]
normalizer = fit_normalizer(frame, split.train_indices, columns)
normalization = Normalization(feature_means=normalizer.means[:-1],
                              feature_stds=normalizer.stds[:-1],
                              target_mean=float(normalizer.means[-1]),
                              target_std=float(normalizer.stds[-1]))

features = frame.records[:, [frame.column_index(n) for n in task.reference_stations]]
target = frame.column(task.target_station)
train_set = SampleSet(normalization.normalize_features(features[split.train_indices]),
                      normalization.normalize_targets(target[split.train_indices]))

topology = MlpTopology(len(task.reference_stations), 8, 1)
baseline = train_mlp_baseline(topology, train_set, seed=1, epochs=200)
baseline.normalization = normalization
hybrid = train_mlp_woa(topology, train_set, default_woa_config(topology, seed=1))
hybrid.normalization = normalization

for label, model in ((task.baseline_id, baseline), (task.hybrid_id, hybrid)):
    for phase, rows in (("training", split.train_indices), ("testing", split.test_indices)):
        report = metric_report(PredictionPair(target[rows], model.predict(features[rows])))
        print(f"{label:9s} {phase:8s}  RMSE {report.rmse:.3f}  SI {report.si:.3f}  "
              f"WI {report.wi:.3f}  NSE {report.nse:.3f}  KGE {report.kge:.3f}")
