"""Gamma-prior concentration updates via beta auxiliary variables."""

import math

import numpy as np
from scipy.special import gammaln

from .densities import sample_log_categorical


def update_concentration(conc, k, n, prior_shape, prior_rate, rng):
    """One auxiliary-variable update for a single CRP's concentration.

    Draws x ~ Beta(conc+1, n), then returns a draw from the two-component
    gamma mixture with shapes prior_shape+k and prior_shape+k-1 and common
    rate prior_rate - log x.
    """
    if k < 1 or n < 1:
        raise ValueError(f"need k >= 1 and n >= 1, got k={k}, n={n}")
    x = rng.beta(conc + 1.0, n)
    rate = prior_rate - math.log(x)
    w = (prior_shape + k - 1.0) / ((prior_shape + k - 1.0) + n * rate)
    shape = prior_shape + k if rng.random() < w else prior_shape + k - 1.0
    return rng.gamma(shape, 1.0 / rate)


def update_gamma_multi(conc, per_cluster, prior_shape, prior_rate, rng):
    """Concentration update for several CRPs sharing one parameter.

    ``per_cluster`` holds one (k_c, m_c) pair per CRP: k_c clusters among m_c
    items. Pairs with m_c = 0 carry no information and are skipped; with no
    informative pair at all the conditional is the prior.

    Scheme: the c-th CRP likelihood gamma(conc)/gamma(conc+m_c) is augmented
    with x_c ~ Beta(conc+1, m_c) and a binary indicator s_c, giving

        p(conc | x, s) = Gamma(prior_shape + sum k_c - sum s_c,
                               prior_rate - sum log x_c).

    Only the indicator total enters the gamma shape, so the total is drawn
    exactly from its marginal under p(s | x): a distribution over counts with
    P(total = t) proportional to ESP_t(w) * gamma(shape0 - t), where the
    weights are w_c = m_c * (prior_rate - sum log x_c) and ESP_t is the t-th
    elementary symmetric polynomial (evaluated in log space). With a single
    CRP this reproduces update_concentration's marginalized two-component
    mixture exactly.
    """
    pairs = [(k, m) for k, m in per_cluster if m >= 1]
    if not pairs:
        return rng.gamma(prior_shape, 1.0 / prior_rate)

    c_count = len(pairs)
    total_k = sum(k for k, _ in pairs)
    xs = [rng.beta(conc + 1.0, m) for _, m in pairs]
    rate = prior_rate - sum(math.log(x) for x in xs)
    shape0 = prior_shape + total_k  # shape when no indicator fires

    logw = [math.log(m) + math.log(rate) for _, m in pairs]
    # Suffix table of log elementary symmetric polynomials:
    # esp[c][t] = log ESP_t(w_c, ..., w_{C-1}).
    neg_inf = float("-inf")
    esp = [[neg_inf] * (c_count + 1) for _ in range(c_count + 1)]
    esp[c_count][0] = 0.0
    for c in range(c_count - 1, -1, -1):
        esp[c][0] = 0.0
        for t in range(1, c_count - c + 1):
            esp[c][t] = np.logaddexp(esp[c + 1][t], logw[c] + esp[c + 1][t - 1])

    log_count = np.array([esp[0][t] + gammaln(shape0 - t) for t in range(c_count + 1)])
    u_total = sample_log_categorical(log_count, rng, where="gamma-multi indicator count")
    return rng.gamma(shape0 - u_total, 1.0 / rate)
