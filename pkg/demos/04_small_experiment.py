"""A scaled-down leave-one-station-out experiment, library-driven.

Uses the bundled Gilan station statistics with reduced budgets so it
finishes in about a minute, then prints the comparison table and where
the full output files went. The equivalent command-line call:

    windwoa run --config <config.json> --out demo_run --jobs 2

with the same settings in the JSON file (a previous run's manifest.json
also works as the config, which replays it exactly).
"""

from pathlib import Path

from windwoa import ExperimentConfig, SynthSpec, WoaSettings, run_experiment, write_outputs

config = ExperimentConfig(
    synth=SynthSpec(rows=400),
    repetitions=5,
    lm_epochs=40,
    woa=WoaSettings(population_size=15, max_iterations=20),
    master_seed=7,
)

result = run_experiment(config, jobs=2)

print(f"{'model':10s} {'rep':>3s} {'train RMSE':>11s} {'test RMSE':>10s} {'test NSE':>9s}")
for task_result in result.results:
    record = task_result.selected
    for model_id, training, testing in (
        (record.baseline_id, record.baseline_training, record.baseline_testing),
        (record.hybrid_id, record.hybrid_training, record.hybrid_testing),
    ):
        print(f"{model_id:10s} {record.repetition:3d} {training.rmse:11.3f} "
              f"{testing.rmse:10.3f} {testing.nse:9.3f}")

wins, total = result.hybrid_wins()
print(f"\nhybrid test RMSE <= baseline on {wins}/{total} tasks")

outdir = Path("demo_run")
paths = write_outputs(result, outdir)
print(f"outputs: {paths['report']}, {paths['records']}, {paths['manifest']}, {paths['plots']}/")
