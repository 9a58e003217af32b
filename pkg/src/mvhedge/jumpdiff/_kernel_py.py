"""Pure numpy simulation kernel.

Vectorized over paths, one time step at a time, reproducing the scalar
reference generator in _rng.py draw for draw: every path owns a hashed
SplitMix64 substream, each simulation attempt consumes one uniform for
the Gaussian shock and one for the Poisson count, and rejected attempts
(step factor <= 0) redraw both from the same substream.  This module is
the fallback when the compiled kernel is unavailable and the reference
its results are compared against.
"""

from __future__ import annotations

import numpy as np

from ._rng import _A, _B, _C, _D, _E, _F, GOLDEN, TWO_NEG52

_U64 = np.uint64
_GOLDEN = _U64(GOLDEN)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)


def _mix64(z):
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def _stream_states(seed, offset, n):
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    return _mix64(_U64(seed % (1 << 64)) + idx * _GOLDEN)


def _next_uniform(state, idx):
    state[idx] += _GOLDEN
    out = _mix64(state[idx])
    return ((out >> _U64(12)).astype(np.float64) + 0.5) * TWO_NEG52


def _ratio(r, num, den):
    top = np.full_like(r, num[-1])
    for c in reversed(num[:-1]):
        top = top * r + c
    bot = np.full_like(r, den[-1])
    for c in reversed(den[:-1]):
        bot = bot * r + c
    return top / bot


def _invnorm(p):
    out = np.empty_like(p)
    q = p - 0.5
    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        out[central] = qc * _ratio(r, _A, _B)
    tail = ~central
    if tail.any():
        qt = q[tail]
        r = np.sqrt(-np.log(np.where(qt < 0.0, p[tail], 1.0 - p[tail])))
        near = r <= 5.0
        x = np.where(near,
                     _ratio(np.where(near, r - 1.6, 0.0), _C, _D),
                     _ratio(np.where(near, 0.0, r - 5.0), _E, _F))
        out[tail] = np.where(qt < 0.0, -x, x)
    return out


def _poisson(u, mean, exp_neg_mean, max_count=10_000):
    k = np.zeros(u.shape)
    p = np.full(u.shape, exp_neg_mean)
    cum = p.copy()
    active = u > cum
    count = 0
    while active.any():
        count += 1
        if count > max_count:
            raise RuntimeError(f"poisson inversion ran away (mean {mean!r})")
        k[active] += 1.0
        p[active] *= mean / k[active]
        cum[active] += p[active]
        active &= u > cum
    return k


def _step_factors(state, mu_dt, sig_sqdt, eta, comp, lam, exp_neg_lam,
                  max_attempts):
    """Draw one step factor per path, rejecting nonpositive factors."""
    n = state.shape[0]
    factor = np.empty(n)
    counts = np.empty(n)
    pending = np.arange(n)
    rejects = 0
    for _ in range(max_attempts):
        xi = _invnorm(_next_uniform(state, pending))
        dn = _poisson(_next_uniform(state, pending), lam, exp_neg_lam)
        f = 1.0 + mu_dt + sig_sqdt * xi + eta * (dn - comp)
        ok = f > 0.0
        good = pending[ok]
        factor[good] = f[ok]
        counts[good] = dn[ok]
        rejects += int(np.count_nonzero(~ok))
        pending = pending[~ok]
        if pending.size == 0:
            return factor, counts, rejects
    raise RuntimeError("positivity rejection did not terminate; the grid is "
                       "far too coarse for these parameters")


def pure_paths(n_paths, path_offset, seed, steps, mu_dt, sig_sqdt, eta,
               comp, lam, exp_neg_lam, c_prop, s0, max_attempts=1000):
    """Terminal pure-investment wealth and terminal price per path.

    Streams through the grid without storing intermediate prices, so
    memory stays O(paths).  Returns ``(x_T, s_T, rejects)``.
    """
    state = _stream_states(seed, path_offset, n_paths)
    s = np.full(n_paths, float(s0))
    x = np.ones(n_paths)
    rejects = 0
    for _ in range(steps):
        factor, _, rej = _step_factors(state, mu_dt, sig_sqdt, eta, comp,
                                       lam, exp_neg_lam, max_attempts)
        rejects += rej
        s *= factor
        x *= 1.0 - c_prop * (factor - 1.0)
    return x, s, rejects


def price_paths(n_paths, path_offset, seed, steps, mu_dt, sig_sqdt, eta,
                comp, lam, exp_neg_lam, s0, max_attempts=1000):
    """Full price paths and per-step jump counts.

    Returns ``(prices, jumps, rejects)`` with ``prices`` of shape
    (paths, steps+1) and ``jumps`` of shape (paths, steps).  Allocates
    the whole batch; use :func:`pure_paths` for large estimators.
    """
    state = _stream_states(seed, path_offset, n_paths)
    prices = np.empty((n_paths, steps + 1))
    jumps = np.empty((n_paths, steps), dtype=np.int64)
    prices[:, 0] = float(s0)
    s = np.full(n_paths, float(s0))
    rejects = 0
    for j in range(steps):
        factor, counts, rej = _step_factors(state, mu_dt, sig_sqdt, eta, comp,
                                            lam, exp_neg_lam, max_attempts)
        rejects += rej
        s *= factor
        prices[:, j + 1] = s
        jumps[:, j] = counts.astype(np.int64)
    return prices, jumps, rejects
