"""Updates for the hierarchical point-mass sparsity layer.

Covers the per-cluster inclusion probabilities (``incl_prob``), the
per-attribute activity propensities (``attr_prob``) and the shared slab
variance (``slab_var``).
"""

import numpy as np

from .densities import draw_inv_gamma
from .partition import SPIKE


def spike_zero_weight(rho, slab_a, slab_b):
    """Posterior probability that incl_prob is exactly zero given a zero mean.

    The continuous branch keeps marginal mass rho * slab_b / (slab_a + slab_b)
    after observing a zero mean component, so the spike weight must be
    renormalized against it.
    """
    cont = rho * slab_b / (slab_a + slab_b)
    return (1.0 - rho) / ((1.0 - rho) + cont)


def draw_pi_entry(mu_is_zero, rho_j, hp, rng):
    """One draw of an inclusion probability given the mean component's state."""
    if not mu_is_zero:
        return rng.beta(hp.slab_a + 1.0, hp.slab_b)
    w0 = spike_zero_weight(rho_j, hp.slab_a, hp.slab_b)
    if rng.random() < w0:
        return 0.0
    return rng.beta(hp.slab_a, hp.slab_b + 1.0)


def update_pi(state, hp, cid, j, rng):
    """Resample incl_prob[cid][j] from its conditional; returns the new value."""
    mu_is_zero = state.cluster_means[cid].inner.cluster_of(j) == SPIKE
    value = draw_pi_entry(mu_is_zero, float(state.attr_prob[j]), hp, rng)
    state.incl_prob[cid][j] = value
    return value


def draw_pi_row(mean, attr_prob, hp, rng):
    """Vectorized draw of a whole inclusion-probability row for one cluster."""
    p = mean.inner.n_items
    zero = np.fromiter(
        (mean.inner.assignments[j] == SPIKE for j in range(p)), dtype=bool, count=p
    )
    row = np.empty(p)
    n_nonzero = int(p - zero.sum())
    if n_nonzero:
        row[~zero] = rng.beta(hp.slab_a + 1.0, hp.slab_b, size=n_nonzero)
    if n_nonzero < p:
        rho_z = attr_prob[zero]
        w0 = spike_zero_weight(rho_z, hp.slab_a, hp.slab_b)
        keep_zero = rng.random(size=rho_z.shape[0]) < w0
        vals = np.where(keep_zero, 0.0, rng.beta(hp.slab_a, hp.slab_b + 1.0, size=rho_z.shape[0]))
        row[zero] = vals
    return row


def step_pi(state, hp, rng):
    """Refresh the full inclusion-probability matrix (one sweep of step 3)."""
    for cid in state.samples.clusters:
        state.incl_prob[cid] = draw_pi_row(state.cluster_means[cid], state.attr_prob, hp, rng)


def update_rho(state, hp, j, rng):
    """Resample attr_prob[j] given column j of the inclusion matrix."""
    k_live = state.samples.n_clusters()
    n_active = sum(1 for cid in state.samples.clusters if state.incl_prob[cid][j] > 0.0)
    value = rng.beta(hp.rho_a + n_active, hp.rho_b + k_live - n_active)
    state.attr_prob[j] = value
    return value


def step_rho(state, hp, rng):
    k_live = state.samples.n_clusters()
    p = state.attr_prob.shape[0]
    n_active = np.zeros(p)
    for cid in state.samples.clusters:
        n_active += state.incl_prob[cid] > 0.0
    state.attr_prob = rng.beta(hp.rho_a + n_active, hp.rho_b + k_live - n_active)


def update_eta_sq(state, hp, rng):
    """Resample the slab variance from its inverse-gamma conditional.

    Each live inner cluster contributes its unique value once, whatever its
    multiplicity across mean components.
    """
    n_unique = 0
    ssq = 0.0
    for cid in state.samples.clusters:
        for cl in state.cluster_means[cid].inner.clusters.values():
            n_unique += 1
            ssq += cl[1] * cl[1]
    state.slab_var = draw_inv_gamma(hp.eta_shape + 0.5 * n_unique, hp.eta_rate + 0.5 * ssq, rng)
    return state.slab_var
