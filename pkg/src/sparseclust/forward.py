"""Forward simulation of the full joint: state from the prior, data given
the state. Together with the transition kernel this supports
joint-distribution (marginal-conditional vs successive-conditional) testing.
"""

import math

import numpy as np

from .clusters import ClusterMeanVector
from .model import ModelState
from .partition import Partition


def _crp_partition(n_items, conc, rng, values):
    """Sequential CRP draw; ``values`` supplies a payload per new cluster."""
    part = Partition(n_items)
    for i in range(n_items):
        u = rng.random() * (conc + i)
        acc = 0.0
        placed = False
        for cid, cl in part.clusters.items():
            acc += cl[0]
            if u <= acc:
                part.attach(i, cid)
                placed = True
                break
        if not placed:
            part.attach_new(i, values())
    return part


def draw_cluster_mean_from_prior(p, attr_prob, hp, slab_var, conc_inner, rng):
    """Joint prior draw of one cluster's inclusion row and mean vector."""
    pi_row = np.empty(p)
    mean = ClusterMeanVector(p)
    counts = []
    cids = []
    m_total = 0
    for j in range(p):
        if rng.random() < attr_prob[j]:
            pi_row[j] = rng.beta(hp.slab_a, hp.slab_b)
        else:
            pi_row[j] = 0.0
        if rng.random() >= pi_row[j]:
            mean.inner.attach_spike(j)
            continue
        u = rng.random() * (conc_inner + m_total)
        acc = 0.0
        joined = False
        for t, c in enumerate(counts):
            acc += c
            if u <= acc:
                mean.inner.attach(j, cids[t])
                counts[t] += 1
                joined = True
                break
        if not joined:
            val = math.sqrt(slab_var) * rng.standard_normal()
            cids.append(mean.inner.attach_new(j, val))
            counts.append(1)
        m_total += 1
    return pi_row, mean


def draw_state_from_prior(n, p, hp, rng):
    """One draw of the complete latent state from the prior."""
    conc_samples = rng.gamma(hp.conc_shape, 1.0 / hp.conc_rate)
    conc_mean = rng.gamma(hp.conc_shape, 1.0 / hp.conc_rate)
    conc_var = rng.gamma(hp.conc_shape, 1.0 / hp.conc_rate)
    conc_inner = rng.gamma(hp.conc_shape, 1.0 / hp.conc_rate)
    slab_var = hp.eta_rate / rng.gamma(hp.eta_shape)
    attr_prob = rng.beta(hp.rho_a, hp.rho_b, size=p)

    mean_part = _crp_partition(
        p, conc_mean, rng,
        lambda: hp.base_mean + math.sqrt(hp.base_var) * rng.standard_normal(),
    )
    var_part = _crp_partition(
        p, conc_var, rng, lambda: hp.var_rate / rng.gamma(hp.var_shape),
    )
    samples = _crp_partition(n, conc_samples, rng, lambda: None)

    cluster_means = {}
    incl_prob = {}
    for cid in samples.clusters:
        pi_row, mean = draw_cluster_mean_from_prior(
            p, attr_prob, hp, slab_var, conc_inner, rng
        )
        cluster_means[cid] = mean
        incl_prob[cid] = pi_row

    return ModelState(
        mean_part=mean_part,
        var_part=var_part,
        samples=samples,
        cluster_means=cluster_means,
        incl_prob=incl_prob,
        cluster_data_sum={},
        attr_prob=attr_prob,
        slab_var=slab_var,
        conc_samples=conc_samples,
        conc_mean=conc_mean,
        conc_var=conc_var,
        conc_inner=conc_inner,
    )


def draw_data(state, rng):
    """Generate y given the state: baseline + cluster shift + noise."""
    n, p = state.n, state.p
    mu_base = state.mean_part.values_vector()
    sd = np.sqrt(state.var_part.values_vector())
    y = np.empty((n, p))
    for i in range(n):
        mu_c = state.cluster_means[state.samples.cluster_of(i)].mu()
        y[i] = mu_base + mu_c + sd * rng.standard_normal(p)
    return y


def attach_data_sums(state, y):
    """Recompute the cached per-cluster column sums for the given data."""
    state.cluster_data_sum = {
        cid: y[mem].sum(axis=0) for cid, mem in state.samples.members().items()
    }
