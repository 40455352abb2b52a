"""Independent naive re-implementations used to cross-check the library.

Everything here is deliberately written as plain Python loops over
lists, sharing no code with the package, so a bug cannot hide in both
paths at once.
"""

import math


def naive_mean(values):
    return sum(values) / len(values)


def naive_std(values):
    m = naive_mean(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / len(values))


def naive_rmse(observed, predicted):
    total = 0.0
    for o, p in zip(observed, predicted):
        total += (p - o) ** 2
    return math.sqrt(total / len(observed))


def naive_pearson(observed, predicted):
    mo = naive_mean(observed)
    mp = naive_mean(predicted)
    num = sum((o - mo) * (p - mp) for o, p in zip(observed, predicted))
    den_o = sum((o - mo) ** 2 for o in observed)
    den_p = sum((p - mp) ** 2 for p in predicted)
    return num / math.sqrt(den_o * den_p)


def naive_r_squared(observed, predicted):
    return naive_pearson(observed, predicted) ** 2


def naive_willmott(observed, predicted):
    mo = naive_mean(observed)
    num = sum((o - p) ** 2 for o, p in zip(observed, predicted))
    den = sum((abs(p - mo) + abs(o - mo)) ** 2 for o, p in zip(observed, predicted))
    return 1.0 - num / den


def naive_scatter_index(observed, predicted):
    return naive_rmse(observed, predicted) / naive_mean(observed)


def naive_nse(observed, predicted):
    mo = naive_mean(observed)
    num = sum((p - o) ** 2 for o, p in zip(observed, predicted))
    den = sum((o - mo) ** 2 for o in observed)
    return 1.0 - num / den


def naive_kge(observed, predicted):
    r = naive_pearson(observed, predicted)
    beta = naive_mean(predicted) / naive_mean(observed)
    cv_o = naive_std(observed) / naive_mean(observed)
    cv_p = naive_std(predicted) / naive_mean(predicted)
    gamma = cv_p / cv_o
    value = 1.0 - math.sqrt((r - 1) ** 2 + (beta - 1) ** 2 + (gamma - 1) ** 2)
    return value, r, beta, gamma


def naive_mean_abs_relative_error(observed, predicted):
    errors = [100.0 * (p - o) / o for o, p in zip(observed, predicted) if o != 0.0]
    return sum(abs(e) for e in errors) / len(errors)


def naive_correlation_matrix(columns):
    """Pairwise Pearson over a list of equal-length columns."""
    k = len(columns)
    matrix = [[0.0] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            matrix[i][j] = 1.0 if i == j else naive_pearson(columns[i], columns[j])
    return matrix
