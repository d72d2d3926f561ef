"""Chain orchestration: initialization, one full sweep, and trace recording."""

from dataclasses import dataclass, field

import numpy as np

from .baseline import step_baseline_means, step_baseline_vars
from .clusters import ClusterMeanVector, step_clusters
from .concentration import update_concentration, update_gamma_multi
from .densities import SamplerAbort
from .model import ModelState
from .partition import Partition
from .sparsity import draw_pi_row, step_pi, step_rho, update_eta_sq

ALL_ONE_CLUSTER = "one"
ALL_SINGLETONS = "singletons"

RECORD_FIELDS = frozenset({"K", "rho", "pi", "mu_matrix", "assignments"})


@dataclass
class ChainConfig:
    iterations: int = 50_000
    burn_in: int = 10_000
    thin: int = 1
    seed: int = 0
    init_mode: str = ALL_ONE_CLUSTER
    record: frozenset = field(default_factory=lambda: RECORD_FIELDS)
    # Fixing a concentration turns the corresponding DP into (approximately)
    # its parametric limit; the fixed value is never resampled.
    fix_conc_mean: float | None = None
    fix_conc_inner: float | None = None
    validate_every_sweep: bool = False

    def __post_init__(self):
        if self.iterations <= 0 or self.thin <= 0 or self.burn_in < 0:
            raise ValueError("iterations and thin must be positive, burn_in nonnegative")
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        if self.init_mode not in (ALL_ONE_CLUSTER, ALL_SINGLETONS):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        unknown = set(self.record) - RECORD_FIELDS
        if unknown:
            raise ValueError(f"unknown record fields {sorted(unknown)}")


class ChainTrace:
    """Per-iteration records after burn-in and thinning.

    Cluster-indexed quantities are stored with contiguous labels in order of
    first appearance within each iteration; fitted mean matrices are
    reconstructed on demand from the baseline vector, the cluster means and
    the assignments.
    """

    def __init__(self, n, p, config):
        self.n = n
        self.p = p
        self.config = config
        self.ks = []
        self.assignments = []
        self.rhos = []
        self.pis = []
        self.means = []
        self.baselines = []

    def __len__(self):
        return len(self.ks)

    def record(self, state):
        rec = self.config.record
        labels, order = state.samples.canonical()
        self.ks.append(state.samples.n_clusters())
        if "assignments" in rec or "mu_matrix" in rec:
            self.assignments.append(labels.astype(np.int16))
        if "rho" in rec:
            self.rhos.append(state.attr_prob.copy())
        if "pi" in rec:
            self.pis.append(np.stack([state.incl_prob[cid] for cid in order]))
        if "mu_matrix" in rec:
            self.means.append(np.stack([state.cluster_means[cid].mu() for cid in order]))
            self.baselines.append(state.mean_part.values_vector())

    def fitted_mean(self, t):
        """The n x p matrix mu_j + mu_{c_i j} at recorded iteration t."""
        return self.baselines[t] + self.means[t][self.assignments[t]]


def merge_traces(traces):
    """Pool recorded iterations of several chains (e.g. one per seed)."""
    if not traces:
        raise ValueError("no traces to merge")
    out = ChainTrace(traces[0].n, traces[0].p, traces[0].config)
    for tr in traces:
        out.ks.extend(tr.ks)
        out.assignments.extend(tr.assignments)
        out.rhos.extend(tr.rhos)
        out.pis.extend(tr.pis)
        out.means.extend(tr.means)
        out.baselines.extend(tr.baselines)
    return out


def init_state(data, hp, cfg, rng):
    """Starting state: baselines at per-attribute moments (one singleton
    cluster each), all mean shifts at zero, scalars at prior-scale values."""
    n, p = data.n, data.p
    col_mean = data.y.mean(axis=0)
    col_var = data.y.var(axis=0, ddof=1)
    col_var = np.maximum(col_var, 1e-12)  # constant columns would break positivity

    mean_part = Partition(p)
    var_part = Partition(p)
    for j in range(p):
        mean_part.attach_new(j, float(col_mean[j]))
        var_part.attach_new(j, float(col_var[j]))

    samples = Partition(n)
    rho0 = hp.rho_a / (hp.rho_a + hp.rho_b)
    attr_prob = np.full(p, rho0)
    state = ModelState(
        mean_part=mean_part,
        var_part=var_part,
        samples=samples,
        cluster_means={},
        incl_prob={},
        cluster_data_sum={},
        attr_prob=attr_prob,
        slab_var=1.0,
        conc_samples=hp.conc_shape / hp.conc_rate,
        conc_mean=cfg.fix_conc_mean if cfg.fix_conc_mean is not None
        else hp.conc_shape / hp.conc_rate,
        conc_var=hp.conc_shape / hp.conc_rate,
        conc_inner=cfg.fix_conc_inner if cfg.fix_conc_inner is not None
        else hp.conc_shape / hp.conc_rate,
    )

    if cfg.init_mode == ALL_ONE_CLUSTER:
        cid = samples.attach_new(0, None)
        for i in range(1, n):
            samples.attach(i, cid)
        cids = [cid]
    else:
        cids = [samples.attach_new(i, None) for i in range(n)]

    for cid in cids:
        mean = ClusterMeanVector.all_spike(p)
        state.cluster_means[cid] = mean
        state.incl_prob[cid] = draw_pi_row(mean, attr_prob, hp, rng)
    for cid, mem in samples.members().items():
        state.cluster_data_sum[cid] = data.y[mem].sum(axis=0)
    return state


def step_concentrations(state, data, hp, rng, fix_conc_mean=None, fix_conc_inner=None):
    """Step 7: each DP's concentration sees exactly the partition it generated."""
    state.conc_samples = update_concentration(
        state.conc_samples, state.samples.n_clusters(), data.n,
        hp.conc_shape, hp.conc_rate, rng,
    )
    if fix_conc_mean is None:
        state.conc_mean = update_concentration(
            state.conc_mean, state.mean_part.n_clusters(), data.p,
            hp.conc_shape, hp.conc_rate, rng,
        )
    state.conc_var = update_concentration(
        state.conc_var, state.var_part.n_clusters(), data.p,
        hp.conc_shape, hp.conc_rate, rng,
    )
    if fix_conc_inner is None:
        per_cluster = [
            (m.inner_cluster_count(), m.nonzero_count())
            for m in state.cluster_means.values()
        ]
        state.conc_inner = update_gamma_multi(
            state.conc_inner, per_cluster, hp.conc_shape, hp.conc_rate, rng,
        )


def sweep(state, data, hp, rng, fix_conc_mean=None, fix_conc_inner=None):
    """One full update cycle over all unknowns."""
    step_baseline_means(state, data, hp, rng)
    step_baseline_vars(state, data, hp, rng)
    step_pi(state, hp, rng)
    step_rho(state, hp, rng)
    step_clusters(state, data, hp, rng)
    update_eta_sq(state, hp, rng)
    step_concentrations(state, data, hp, rng, fix_conc_mean, fix_conc_inner)


def run_chain(data, hp, cfg):
    """Run one chain; identical (data, hp, cfg) give a bit-identical trace."""
    rng = np.random.default_rng(cfg.seed)
    state = init_state(data, hp, cfg, rng)
    trace = ChainTrace(data.n, data.p, cfg)
    for it in range(cfg.iterations):
        try:
            sweep(state, data, hp, rng, cfg.fix_conc_mean, cfg.fix_conc_inner)
        except SamplerAbort as exc:
            raise SamplerAbort(f"iteration {it}: {exc}") from exc
        if cfg.validate_every_sweep:
            state.validate(data)
        offset = it - cfg.burn_in
        if offset >= 0 and offset % cfg.thin == cfg.thin - 1:
            trace.record(state)
    return trace
