"""Tour of the agreement metrics on small, readable examples.

Shows the seven headline numbers, the KGE decomposition, how a metric
whose precondition fails surfaces as an explicit "undefined" marker,
and the fixed serialization order used by the experiment reports.
"""

import numpy as np

from windwoa import (PredictionPair, kge, metric_report, relative_error,
                     report_csv_header, report_csv_row)

observed = np.array([2.1, 3.4, 1.8, 4.0, 2.9, 3.7])
predicted = np.array([2.4, 3.1, 2.0, 3.6, 3.2, 3.9])
pair = PredictionPair(observed, predicted)

report = metric_report(pair)
print("observed :", observed)
print("predicted:", predicted)
print(f"RMSE {report.rmse:.4f} | SI {report.si:.4f} | WI {report.wi:.4f} "
      f"| NSE {report.nse:.4f} | KGE {report.kge:.4f} | R2 {report.r_squared:.4f} "
      f"| RE {report.mean_abs_re:.2f}%")

value, r, beta, gamma = kge(pair)
print(f"\nKGE decomposition: r={r:.4f} (correlation), beta={beta:.4f} (mean ratio), "
      f"gamma={gamma:.4f} (CV ratio) -> {value:.4f}")

errors = relative_error(pair)
print("per-sample relative error (%):", np.round(errors.per_sample, 1))

# a constant observation series leaves NSE and R2 without a definition
degenerate = metric_report(PredictionPair(np.full(4, 3.0), np.array([2.5, 3.0, 3.5, 3.0])))
print("\nconstant observations -> NSE:", degenerate.nse, "| R2:", degenerate.r_squared,
      "| RMSE still defined:", round(degenerate.rmse, 4))

print("\nserialized row (column order is fixed):")
print(",".join(report_csv_header()))
print(",".join(report_csv_row(degenerate)))
