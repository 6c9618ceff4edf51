"""Pure-numpy split-search kernels.

Fallback used when the compiled extension is unavailable. Both backends
implement the same contract: scan one feature column, return the best
(threshold, score) pair, or (nan, -inf) when no admissible split exists.
Thresholds are midpoints between consecutive distinct sorted values; among
equal scores the lowest threshold wins (the scan runs in ascending order
and only strict improvements replace the incumbent).
"""
import numpy as np


def best_split_gini(x, y, min_leaf):
    """Best Gini-decrease split of one column.

    x: feature values, y: {0,1} labels, min_leaf: minimum rows per child.
    Returns (threshold, impurity_decrease).
    """
    n = x.shape[0]
    if n < 2:
        return np.nan, -np.inf
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    tot1 = ys.sum()
    p1 = tot1 / n
    parent = 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)

    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    l1 = np.cumsum(ys)[:-1]
    r1 = tot1 - l1
    gini_l = 1.0 - (l1 / nl) ** 2 - ((nl - l1) / nl) ** 2
    gini_r = 1.0 - (r1 / nr) ** 2 - ((nr - r1) / nr) ** 2
    decrease = parent - (nl * gini_l + nr * gini_r) / n

    valid = (xs[1:] != xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return np.nan, -np.inf
    decrease = np.where(valid, decrease, -np.inf)
    k = int(np.argmax(decrease))
    return 0.5 * (xs[k] + xs[k + 1]), float(decrease[k])


def best_split_grad_hess(x, g, h, lam, min_child_hessian):
    """Best second-order-gain split of one column.

    Gain is the unregularized structure score
    0.5 * [GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)]; the per-leaf
    penalty gamma is the caller's business. Children with summed hessian
    below min_child_hessian are inadmissible.
    Returns (threshold, gain).
    """
    n = x.shape[0]
    if n < 2:
        return np.nan, -np.inf
    order = np.argsort(x, kind="stable")
    xs = x[order]
    gl = np.cumsum(g[order])[:-1]
    hl = np.cumsum(h[order])[:-1]
    g_tot = g.sum()
    h_tot = h.sum()
    gr = g_tot - gl
    hr = h_tot - hl

    gain = 0.5 * (
        gl * gl / (hl + lam)
        + gr * gr / (hr + lam)
        - g_tot * g_tot / (h_tot + lam)
    )
    valid = (xs[1:] != xs[:-1]) & (hl >= min_child_hessian) & (hr >= min_child_hessian)
    if not valid.any():
        return np.nan, -np.inf
    gain = np.where(valid, gain, -np.inf)
    k = int(np.argmax(gain))
    return 0.5 * (xs[k] + xs[k + 1]), float(gain[k])
