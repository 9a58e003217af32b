"""Jump-diffusion specialization: seeded simulation against closed forms.

The price follows a compensated jump-diffusion with constant
coefficients,

    dS = S_- (mu dt + sigma dW + eta d(N - alpha t)),

discretized by a multiplicative Euler scheme whose per-step factor is
``1 + mu*dt + sigma*sqrt(dt)*xi + eta*(dN - alpha*dt)``.  Positivity of
the price is enforced by reject-and-redraw on nonpositive factors; the
rejections are counted and a rate above 1% aborts the run instead of
silently biasing it.

With constant coefficients the mean-variance tradeoff is deterministic,
the opportunity process is the exponential ``exp(kappa*(t - T))`` with
``kappa = mu**2 / (sigma**2 + alpha*eta**2)``, and the optimal pure
investment strategy keeps a constant proportion of wealth invested.
The Monte Carlo estimator of the pure-investment objective must land on
the closed form; that comparison is the acceptance test of this module.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .backend import get_kernel

MAX_REJECTION_RATE = 0.01
_CHUNK_MIN = 4096


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class JumpDiffusionParams:
    """Constant model coefficients.

    ``mu`` drift rate, ``sigma`` volatility (nonzero), ``eta`` relative
    jump size (> -1 so jumps cannot push the price through zero),
    ``alpha`` Poisson intensity (>= 0), ``s0`` initial price, ``horizon``
    terminal time.
    """
    mu: float
    sigma: float
    eta: float
    alpha: float
    s0: float
    horizon: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma {self.sigma!r} must be positive")
        if not self.eta > -1.0:
            raise ValueError(f"eta {self.eta!r} must exceed -1")
        if self.alpha < 0.0:
            raise ValueError(f"alpha {self.alpha!r} must be nonnegative")
        if not self.s0 > 0.0:
            raise ValueError(f"s0 {self.s0!r} must be positive")
        if not self.horizon > 0.0:
            raise ValueError(f"horizon {self.horizon!r} must be positive")

    @property
    def kappa(self) -> float:
        """Squared drift over total instantaneous variance."""
        return self.mu ** 2 / (self.sigma ** 2 + self.alpha * self.eta ** 2)

    @property
    def invested_proportion(self) -> float:
        """Constant proportion of wealth held by the optimal pure
        investment strategy (with flipped sign in the exponential)."""
        return self.mu / (self.sigma ** 2 + self.alpha * self.eta ** 2)


@dataclass(frozen=True)
class PathBatch:
    """Simulated batch: grid times, positive price paths, per-step jump
    counts and the seed that reproduces all of it bit-exactly."""
    grid: np.ndarray
    prices: np.ndarray
    jumps: np.ndarray
    seed: int
    rejections: int


@dataclass(frozen=True)
class PureInvestmentEstimate:
    """Monte Carlo estimate of the pure-investment objective."""
    estimate: float
    stderr: float
    zero_strategy_estimate: float
    closed_form: float
    terminal_price_mean: float
    terminal_price_stderr: float
    rejection_rate: float
    n_paths: int
    seed: int


def _thread_count() -> int:
    raw = os.environ.get("MVHEDGE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"MVHEDGE_THREADS={raw!r} is not an integer")
    if n < 0:
        raise ValueError(f"MVHEDGE_THREADS={raw!r} must be >= 0")
    if n == 0:
        n = min(os.cpu_count() or 1, 8)
    return n


def _run_chunked(kernel_fn, n_paths: int, args: tuple):
    """Split the path range over worker threads, in fixed chunk order.

    Substreams are indexed by absolute path number, so the results (and
    any reduction over them in path order) do not depend on the split.
    """
    threads = _thread_count()
    chunk = max(_CHUNK_MIN, -(-n_paths // threads))
    bounds = [(lo, min(lo + chunk, n_paths)) for lo in range(0, n_paths, chunk)]
    if len(bounds) == 1:
        return [kernel_fn(n_paths, 0, *args)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(kernel_fn, hi - lo, lo, *args)
                   for lo, hi in bounds]
        return [f.result() for f in futures]


def _scheme_constants(params: JumpDiffusionParams, steps: int):
    dt = params.horizon / steps
    lam = params.alpha * dt
    return (steps, params.mu * dt, params.sigma * math.sqrt(dt), params.eta,
            lam, lam, math.exp(-lam))


def _normalize_seed(seed) -> int:
    # the generator state is 64-bit; fold any int into its range
    return int(seed) % (1 << 64)


def _check_rejections(rejections: int, n_paths: int, steps: int) -> float:
    rate = rejections / (n_paths * steps)
    if rate > MAX_REJECTION_RATE:
        raise SimulationError(
            f"grid too coarse for parameters: rejection rate {rate:.2%} "
            f"exceeds {MAX_REJECTION_RATE:.0%}")
    return rate


def simulate_paths(params: JumpDiffusionParams, steps: int, n_paths: int,
                   seed: int, backend: str = "auto") -> PathBatch:
    """Simulate a reproducible batch of full price paths.

    Allocates paths x (steps+1) doubles; for large estimators use
    :func:`mc_pure_investment`, which streams instead.
    """
    if steps < 1 or n_paths < 1:
        raise ValueError("steps and n_paths must be at least 1")
    seed = _normalize_seed(seed)
    kern = get_kernel(backend)
    steps, mu_dt, sig_sqdt, eta, comp, lam, exp_neg_lam = \
        _scheme_constants(params, steps)
    parts = _run_chunked(
        kern.price_paths, n_paths,
        (seed, steps, mu_dt, sig_sqdt, eta, comp, lam, exp_neg_lam, params.s0))
    prices = np.concatenate([p[0] for p in parts], axis=0)
    jumps = np.concatenate([p[1] for p in parts], axis=0)
    rejections = sum(p[2] for p in parts)
    _check_rejections(rejections, n_paths, steps)
    grid = np.linspace(0.0, params.horizon, steps + 1)
    return PathBatch(grid, prices, jumps, int(seed), rejections)


def closed_form_opportunity(params: JumpDiffusionParams, t: float) -> float:
    """Opportunity process value at time t: exp(kappa * (t - horizon))."""
    if not 0.0 <= t <= params.horizon:
        raise ValueError(f"t {t!r} outside [0, {params.horizon}]")
    return math.exp(params.kappa * (t - params.horizon))


def mc_pure_investment(params: JumpDiffusionParams, steps: int, n_paths: int,
                       seed: int, backend: str = "auto") -> PureInvestmentEstimate:
    """Estimate the pure-investment objective along the constant
    proportion strategy and report it against the closed form.

    Before simulating, asserts that the strategy survives jumps: the
    relative wealth move on a jump is ``-proportion * eta`` and must
    stay above -1, otherwise the exponential wealth can be absorbed at
    zero and the constant-proportion reduction is invalid.
    """
    if steps < 1 or n_paths < 1:
        raise ValueError("steps and n_paths must be at least 1")
    c_prop = params.invested_proportion
    jump_move = -c_prop * params.eta
    if not jump_move > -1.0:
        raise SimulationError(
            f"optimal proportion {c_prop!r} breaks positivity at jumps: "
            f"relative wealth move {jump_move!r} <= -1")
    seed = _normalize_seed(seed)
    kern = get_kernel(backend)
    steps, mu_dt, sig_sqdt, eta, comp, lam, exp_neg_lam = \
        _scheme_constants(params, steps)
    parts = _run_chunked(
        kern.pure_paths, n_paths,
        (seed, steps, mu_dt, sig_sqdt, eta, comp, lam, exp_neg_lam, c_prop,
         params.s0))
    x_t = np.concatenate([p[0] for p in parts])
    s_t = np.concatenate([p[1] for p in parts])
    rate = _check_rejections(sum(p[2] for p in parts), n_paths, steps)

    sq = x_t ** 2
    estimate = float(np.mean(sq))
    stderr = float(np.std(sq, ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else 0.0
    return PureInvestmentEstimate(
        estimate=estimate,
        stderr=stderr,
        zero_strategy_estimate=1.0,
        closed_form=closed_form_opportunity(params, 0.0),
        terminal_price_mean=float(np.mean(s_t)),
        terminal_price_stderr=(float(np.std(s_t, ddof=1) / math.sqrt(n_paths))
                               if n_paths > 1 else 0.0),
        rejection_rate=rate,
        n_paths=n_paths,
        seed=int(seed),
    )


def bsde_residual(params: JumpDiffusionParams, grid, y_candidate,
                  psi_c, psi_d) -> float:
    """Residual of a candidate solution of the backward equation for the
    opportunity process, on a deterministic grid.

    The generator is evaluated at the left endpoint of every cell,

        gen = (psi_c*sigma + alpha*psi_d*eta + mu*y)**2
              / (y*(sigma**2 + alpha*eta**2) + alpha*psi_d*eta**2),

    and the residual is the worst cell gap |dy - gen*dt| plus the
    terminal gap |y(T) - 1|.  The candidate must be positive and keep
    the generator denominator positive.
    """
    grid = np.asarray(grid, dtype=float)
    y = np.asarray(y_candidate, dtype=float)
    pc = np.asarray(psi_c, dtype=float)
    pd = np.asarray(psi_d, dtype=float)
    if not (grid.shape == y.shape == pc.shape == pd.shape):
        raise ValueError("grid and candidate arrays must share one shape")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be strictly increasing")
    if np.any(y <= 0.0):
        raise ValueError("candidate must be strictly positive")

    den = y * (params.sigma ** 2 + params.alpha * params.eta ** 2) \
        + params.alpha * pd * params.eta ** 2
    if np.any(den[:-1] <= 0.0):
        raise ValueError("degenerate generator: denominator not positive")
    gen = (pc * params.sigma + params.alpha * pd * params.eta
           + params.mu * y) ** 2 / den
    gaps = np.abs(np.diff(y) - gen[:-1] * np.diff(grid))
    return float(np.max(gaps, initial=0.0) + abs(y[-1] - 1.0))
