"""Reference implementations used only by the tests.

Each one is written independently of the library: scalar loops instead
of vectorised cumulative maxima, a continuous-time Markov chain instead of
Monte Carlo, and so on.
"""

import math
import sys

import numpy as np


def event_departures(T, sigma):
    """Departure epochs from the FIFO departure recursion, one customer at a time."""
    T = list(map(float, T))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    N, K = sigma.shape
    last = [-math.inf] * K
    out = np.empty((N, K))
    for k in range(N):
        ready = T[k]
        for i in range(K):
            last[i] = max(last[i], ready) + sigma[k, i]
            ready = last[i]
            out[k, i] = last[i]
    return out


def event_last_activity(T, sigma):
    return float(event_departures(T, sigma)[-1, -1])


def double_sup_x(T, s1, s2):
    """``sup_k {T_k + sup_{k<=i<=n} sum_{j=k}^i s1_j + sum_{j=i}^n s2_j}``, by brute force."""
    n = len(T)
    best = -math.inf
    for k in range(n):
        for i in range(k, n):
            v = T[k] + sum(s1[k:i + 1]) + sum(s2[i:])
            best = max(best, v)
    return best


def saturated_split_sup(s1, s2):
    """``sup_k sum_{i<=k} s1_i + sum_{i>=k} s2_i`` over split indices."""
    n = len(s1)
    return max(sum(s1[:k + 1]) + sum(s2[k:]) for k in range(n))


def saturated_mgf_exponential(rates, n, theta):
    """``E[exp(theta * Z_[1,n](N0))]`` for a tandem of exponential stations.

    With all customers present at time zero the network is a continuous-time
    Markov chain on queue lengths; ``Z`` is its absorption time, a phase-type
    variable, and the MGF obeys a first-step recursion.
    """
    K = len(rates)
    memo = {}
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))

    def m(state):
        if state in memo:
            return memo[state]
        if sum(state) == 0:
            return 1.0
        q = sum(r for r, c in zip(rates, state) if c > 0)
        if theta >= q:
            return math.inf
        acc = 0.0
        for i, (r, c) in enumerate(zip(rates, state)):
            if c > 0:
                nxt = list(state)
                nxt[i] -= 1
                if i + 1 < K:
                    nxt[i + 1] += 1
                acc += r * m(tuple(nxt))
        memo[state] = acc / (q - theta)
        return memo[state]

    try:
        return m((n,) + (0,) * (K - 1))
    finally:
        sys.setrecursionlimit(limit)


def split_union_sum(log_m1, log_m2, n):
    """``log sum_k exp(k L1 + (n - k + 1) L2)``: one term per split path."""
    terms = [k * log_m1 + (n - k + 1) * log_m2 for k in range(1, n + 1)]
    top = max(terms)
    return top + math.log(sum(math.exp(t - top) for t in terms))


def lindley_delays(lam, mu, count, seed):
    """M/M/1 sojourn times from a scalar Lindley loop, started empty."""
    rng = np.random.default_rng(seed)
    taus = rng.exponential(1 / lam, count)
    sig = rng.exponential(1 / mu, count)
    w = 0.0
    out = np.empty(count)
    for k in range(count):
        out[k] = w + sig[k]
        w = max(0.0, w + sig[k] - taus[k])
    return out
