"""Sampler diagnostics: joint-distribution (marginal-conditional vs
successive-conditional) comparison and proposal-efficiency measurement."""

import math

import numpy as np

from .chain import sweep
from .clusters import (
    _loglik_dense,
    _sequential_scan,
    _slab_coef,
    eval_log_q0,
    sample_prior_mean,
)
from .forward import attach_data_sums, draw_data, draw_state_from_prior
from .model import DataMatrix

STATISTIC_NAMES = (
    "n_sample_clusters",
    "n_mean_clusters",
    "mean_attr_prob",
    "slab_var",
    "conc_samples",
    "conc_inner",
    "mean_sq_shift",
)


def state_statistics(state):
    """The scalar functionals compared between the two simulators."""
    k = state.samples.n_clusters()
    ssq = 0.0
    for mean in state.cluster_means.values():
        for cl in mean.inner.clusters.values():
            ssq += cl[0] * cl[1] * cl[1]
    return (
        float(k),
        float(state.mean_part.n_clusters()),
        float(state.attr_prob.mean()),
        float(state.slab_var),
        float(state.conc_samples),
        float(state.conc_inner),
        ssq / (k * state.p),
    )


def marginal_conditional_samples(n, p, hp, draws, rng):
    """Independent forward draws of the statistics from the prior."""
    out = np.empty((draws, len(STATISTIC_NAMES)))
    for t in range(draws):
        state = draw_state_from_prior(n, p, hp, rng)
        out[t] = state_statistics(state)
    return out


def successive_conditional_samples(n, p, hp, draws, rng):
    """Statistics along the coupled chain: resample data given the state,
    then the state given the data by one full transition-kernel sweep."""
    state = draw_state_from_prior(n, p, hp, rng)
    data = DataMatrix(draw_data(state, rng))
    attach_data_sums(state, data.y)
    out = np.empty((draws, len(STATISTIC_NAMES)))
    for t in range(draws):
        sweep(state, data, hp, rng)
        out[t] = state_statistics(state)
        data.y[...] = draw_data(state, rng)
        attach_data_sums(state, data.y)
    return out


def batch_means_se(x, n_batches=100):
    """Standard error of the mean of a correlated sequence via batch means."""
    m = len(x) // n_batches
    if m < 2:
        raise ValueError("sequence too short for the requested batch count")
    b = np.asarray(x[: m * n_batches]).reshape(n_batches, m).mean(axis=1)
    return float(b.std(ddof=1) / math.sqrt(n_batches))


def geweke_z_scores(forward, successive, n_batches=100):
    """Two-sample z per statistic; the successive side uses batch-means SEs
    to account for autocorrelation, the forward side is independent."""
    zs = {}
    for idx, name in enumerate(STATISTIC_NAMES):
        a = forward[:, idx]
        b = successive[:, idx]
        se_a = a.std(ddof=1) / math.sqrt(len(a))
        se_b = batch_means_se(b, n_batches)
        zs[name] = float((a.mean() - b.mean()) / math.hypot(se_a, se_b))
    return zs


def measure_birth_acceptance(state, data, hp, rng, attempts, proposal="sequential"):
    """Average acceptance probability of birth moves from a frozen state.

    Cycles over non-singleton samples; per attempt a candidate mean is drawn
    (sequentially or from the prior) and the move's acceptance probability
    min(1, r) is accumulated. The state is never mutated.
    """
    mu_base = state.mean_part.values_vector()
    sigma_sq = state.var_part.values_vector()
    eligible = [
        i for i in range(data.n)
        if state.samples.size_of(state.samples.cluster_of(i)) > 1
    ]
    if not eligible:
        raise ValueError("no non-singleton samples to attempt births from")

    log_prior_factor = math.log(state.conc_samples) - math.log(data.n - 1)
    total = 0.0
    for t in range(attempts):
        i = eligible[t % len(eligible)]
        y_i = data.y[i]
        x = y_i - mu_base
        if proposal == "sequential":
            mean_new, log_q = _sequential_scan(
                x, 1, sigma_sq, state.attr_prob, _slab_coef(hp),
                state.slab_var, state.conc_inner, rng=rng,
            )
            log_correction = eval_log_q0(mean_new, state, hp) - log_q
        elif proposal == "prior":
            mean_new = sample_prior_mean(data.p, state, hp, rng)
            log_correction = 0.0
        else:
            raise ValueError(f"unknown proposal kind {proposal!r}")
        cid = state.samples.cluster_of(i)
        log_f_new = _loglik_dense(y_i, mean_new.mu(), mu_base, sigma_sq)
        log_f_old = _loglik_dense(y_i, state.cluster_means[cid].mu(), mu_base, sigma_sq)
        log_r = log_prior_factor + log_f_new - log_f_old + log_correction
        total += 1.0 if log_r >= 0.0 else math.exp(log_r)
    return total / attempts
