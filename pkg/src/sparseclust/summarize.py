"""Posterior summaries: cluster-count distribution, label alignment,
attribute selection, fitted-mean error, co-clustering."""

import numpy as np
from scipy.optimize import linear_sum_assignment


def k_posterior(trace):
    """Normalized frequency of the number of clusters; mode breaks ties low."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    ks, counts = np.unique(np.asarray(trace.ks), return_counts=True)
    hist = {int(k): c / len(trace.ks) for k, c in zip(ks, counts)}
    mode = int(ks[np.argmax(counts)])  # np.argmax takes the first (smallest K) on ties
    return hist, mode


def relabel_conditional_on_K(trace, k):
    """Align cluster labels across all iterations with exactly k clusters.

    Labels are matched to a running reference by minimum-cost bipartite
    matching with squared-distance costs between cluster mean vectors.
    Returns (mu, pi, membership, used) where mu and pi are (T, k, p) aligned
    arrays, membership is the (n, k) fraction of iterations each sample
    spent in each aligned cluster, and used lists the trace indices.
    """
    used = [t for t, kt in enumerate(trace.ks) if kt == k]
    if not used:
        raise ValueError(f"no recorded iterations with K={k}")
    if not trace.means or not trace.pis:
        raise ValueError("trace was recorded without pi/mu_matrix fields")

    p = trace.p
    mu = np.empty((len(used), k, p))
    pi = np.empty((len(used), k, p))
    membership = np.zeros((trace.n, k))
    ref = trace.means[used[0]].copy()
    ref_weight = 0
    for out_t, t in enumerate(used):
        m = trace.means[t]
        cost = ((m[:, None, :] - ref[None, :, :]) ** 2).sum(axis=2)
        rows, cols = linear_sum_assignment(cost)
        perm = np.empty(k, dtype=int)
        perm[rows] = cols  # original label -> aligned label
        mu[out_t, perm] = m
        pi[out_t, perm] = trace.pis[t]
        membership[np.arange(trace.n), perm[trace.assignments[t]]] += 1.0
        ref = (ref * ref_weight + mu[out_t]) / (ref_weight + 1)
        ref_weight += 1
    membership /= len(used)
    return mu, pi, membership, used


def select_attributes(pi_mean, threshold=0.5):
    """Attributes whose aligned posterior-mean inclusion probability exceeds
    the threshold in at least one cluster; returned 1-based."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0,1), got {threshold}")
    hits = np.nonzero(pi_mean.max(axis=0) > threshold)[0]
    return {int(j) + 1 for j in hits}


def fitted_mean_posterior(trace, k=None):
    """Posterior mean of mu_j + mu_{c_i j} over iterations with K = k
    (modal K by default). Label-invariant, so no alignment is needed."""
    if k is None:
        _, k = k_posterior(trace)
    used = [t for t, kt in enumerate(trace.ks) if kt == k]
    if not used:
        raise ValueError(f"no recorded iterations with K={k}")
    acc = np.zeros((trace.n, trace.p))
    for t in used:
        acc += trace.fitted_mean(t)
    return acc / len(used)


def mse_fitted_means(trace, truth, restrict=None, k=None):
    """Mean squared error of the posterior-mean fitted means against the
    simulation truth, over the given 1-based attribute set."""
    est = fitted_mean_posterior(trace, k=k)
    if restrict is None:
        cols = np.arange(trace.p)
    else:
        cols = np.array(sorted(j - 1 for j in restrict), dtype=int)
    d = est[:, cols] - truth.mu[:, cols]
    return float((d * d).mean())


def coclustering(trace):
    """n x n posterior probability that two samples share a cluster."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    if not trace.assignments:
        raise ValueError("trace has no recorded assignments")
    n = trace.n
    out = np.zeros((n, n))
    for a in trace.assignments:
        out += a[:, None] == a[None, :]
    return out / len(trace.assignments)
