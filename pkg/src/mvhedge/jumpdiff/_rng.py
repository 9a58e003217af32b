"""Reference random number generator for the simulation kernels.

This module is the normative description of the randomness used by every
simulation backend; the vectorized and compiled kernels must reproduce
it draw for draw.  The generator is SplitMix64 (Steele, Lea and Flood's
64-bit mixer with golden-gamma increment) with one independent substream
per simulated path:

* substream of path ``i``: initial state ``mix64(seed + (i+1)*GOLDEN)``
  with all arithmetic modulo 2**64,
* each draw advances the state by ``GOLDEN`` and outputs ``mix64(state)``,
* a uniform is ``((output >> 12) + 0.5) * 2**-52``, which lands strictly
  inside (0, 1): both extremes, ``2**-53`` and ``1 - 2**-53``, are exact
  doubles (a 53-bit mapping can round up to 1.0 and poison the inverse
  CDF),
* a standard normal is the inverse normal CDF (rational minimax
  approximation PPND16 from applied-statistics algorithm AS 241) of one
  uniform,
* a Poisson count is sequential-search inversion of one uniform, with
  ``exp(-mean)`` supplied by the caller so every backend uses the same
  starting weight.

The scalar implementation here is deliberately simple; it is used by the
tests as the ground truth for both production kernels.
"""

from __future__ import annotations

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
TWO_NEG52 = 2.0 ** -52

# AS 241 rational approximations for the inverse normal CDF (PPND16).
# Coefficients are split per region; evaluation is plain Horner so the
# operation order is identical in every backend.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2,
      1.9715909503065514427e3, 1.3731693765509461125e4,
      4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4,
      3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4,
      1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def mix64(z: int) -> int:
    """SplitMix64 finalizer: full-avalanche 64-bit mix."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_state(seed: int, path_index: int) -> int:
    """Initial state of the substream for one path."""
    return mix64((seed + (path_index + 1) * GOLDEN) & MASK64)


def _ratio(r: float, num, den) -> float:
    top = num[-1]
    for c in reversed(num[:-1]):
        top = top * r + c
    bot = den[-1]
    for c in reversed(den[:-1]):
        bot = bot * r + c
    return top / bot


def inverse_normal_cdf(p: float) -> float:
    """Quantile of the standard normal distribution for p in (0, 1)."""
    import math

    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _ratio(r, _A, _B)
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        x = _ratio(r - 1.6, _C, _D)
    else:
        x = _ratio(r - 5.0, _E, _F)
    return -x if q < 0.0 else x


def poisson_inverse(u: float, mean: float, exp_neg_mean: float,
                    max_count: int = 10_000) -> int:
    """Poisson count by sequential-search inversion of one uniform."""
    k = 0
    p = exp_neg_mean
    cum = p
    while u > cum:
        k += 1
        if k > max_count:
            raise RuntimeError(f"poisson inversion ran away (mean {mean!r})")
        p *= mean / k
        cum += p
    return k


class SplitMix64:
    """Scalar substream, the reference for the array kernels."""

    def __init__(self, seed: int, path_index: int = 0):
        self.state = stream_state(seed, path_index)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def next_uniform(self) -> float:
        return ((self.next_u64() >> 12) + 0.5) * TWO_NEG52

    def next_normal(self) -> float:
        return inverse_normal_cdf(self.next_uniform())

    def next_poisson(self, mean: float, exp_neg_mean: float) -> int:
        return poisson_inverse(self.next_uniform(), mean, exp_neg_mean)
