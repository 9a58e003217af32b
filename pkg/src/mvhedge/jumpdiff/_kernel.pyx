# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel.

Scalar per-path loops implementing exactly the generator and stepping
scheme documented in _rng.py; the numpy kernel in _kernel_py.py is the
reference implementation both are tested against.  The hot loops run
without the GIL so the chunked driver can use real threads.
"""

from libc.math cimport log, sqrt

import numpy as np


cdef double TWO_NEG52 = 2.0 ** -52
cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL

# AS 241 coefficients; must match _rng.py.
cdef double A0 = 3.3871328727963666080e0, A1 = 1.3314166789178437745e2
cdef double A2 = 1.9715909503065514427e3, A3 = 1.3731693765509461125e4
cdef double A4 = 4.5921953931549871457e4, A5 = 6.7265770927008700853e4
cdef double A6 = 3.3430575583588128105e4, A7 = 2.5090809287301226727e3
cdef double B1 = 4.2313330701600911252e1, B2 = 6.8718700749205790830e2
cdef double B3 = 5.3941960214247511077e3, B4 = 2.1213794301586595867e4
cdef double B5 = 3.9307895800092710610e4, B6 = 2.8729085735721942674e4
cdef double B7 = 5.2264952788528545610e3
cdef double C0 = 1.42343711074968357734e0, C1 = 4.63033784615654529590e0
cdef double C2 = 5.76949722146069140550e0, C3 = 3.64784832476320460504e0
cdef double C4 = 1.27045825245236838258e0, C5 = 2.41780725177450611770e-1
cdef double C6 = 2.27238449892691845833e-2, C7 = 7.74545014278341407640e-4
cdef double D1 = 2.05319162663775882187e0, D2 = 1.67638483018380384940e0
cdef double D3 = 6.89767334985100004550e-1, D4 = 1.48103976427480074590e-1
cdef double D5 = 1.51986665636164571966e-2, D6 = 5.47593808499534494600e-4
cdef double D7 = 1.05075007164441684324e-9
cdef double E0 = 6.65790464350110377720e0, E1 = 5.46378491116411436990e0
cdef double E2 = 1.78482653991729133580e0, E3 = 2.96560571828504891230e-1
cdef double E4 = 2.65321895265761230930e-2, E5 = 1.24266094738807843860e-3
cdef double E6 = 2.71155556874348757815e-5, E7 = 2.01033439929228813265e-7
cdef double F1 = 5.99832206555887937690e-1, F2 = 1.36929880922735805310e-1
cdef double F3 = 1.48753612908506148525e-2, F4 = 7.86869131145613259100e-4
cdef double F5 = 1.84631831751005468180e-5, F6 = 1.42151175831644588870e-7
cdef double F7 = 2.04426310338993978564e-15


cdef inline unsigned long long mix64(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double u01(unsigned long long v) noexcept nogil:
    return (<double>(v >> 12) + 0.5) * TWO_NEG52


cdef inline double invnorm(double p) noexcept nogil:
    cdef double q = p - 0.5
    cdef double r, x
    if q <= 0.425 and q >= -0.425:
        r = 0.180625 - q * q
        # ratio first, then scale by q: must round exactly like the
        # reference implementation
        x = (((((((A7*r+A6)*r+A5)*r+A4)*r+A3)*r+A2)*r+A1)*r+A0) / \
            (((((((B7*r+B6)*r+B5)*r+B4)*r+B3)*r+B2)*r+B1)*r+1.0)
        return q * x
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r = r - 1.6
        x = (((((((C7*r+C6)*r+C5)*r+C4)*r+C3)*r+C2)*r+C1)*r+C0) / \
            (((((((D7*r+D6)*r+D5)*r+D4)*r+D3)*r+D2)*r+D1)*r+1.0)
    else:
        r = r - 5.0
        x = (((((((E7*r+E6)*r+E5)*r+E4)*r+E3)*r+E2)*r+E1)*r+E0) / \
            (((((((F7*r+F6)*r+F5)*r+F4)*r+F3)*r+F2)*r+F1)*r+1.0)
    if q < 0.0:
        return -x
    return x


cdef inline double poisson_inv(double u, double mean, double exp_neg_mean) noexcept nogil:
    cdef double k = 0.0
    cdef double p = exp_neg_mean
    cdef double cum = p
    while u > cum:
        k += 1.0
        if k > 10000.0:
            return -1.0
        p *= mean / k
        cum += p
    return k


# scalar entry points for the backend-agreement tests
def _mix64_scalar(v):
    return mix64(<unsigned long long>v)


def _u01_scalar(v):
    return u01(<unsigned long long>v)


def _invnorm_scalar(double p):
    return invnorm(p)


def _poisson_scalar(double u, double mean, double exp_neg_mean):
    return poisson_inv(u, mean, exp_neg_mean)


def pure_paths(Py_ssize_t n_paths, unsigned long long path_offset,
               unsigned long long seed, int steps, double mu_dt,
               double sig_sqdt, double eta, double comp, double lam,
               double exp_neg_lam, double c_prop, double s0,
               int max_attempts=1000):
    """Compiled counterpart of _kernel_py.pure_paths."""
    x_arr = np.empty(n_paths)
    s_arr = np.empty(n_paths)
    cdef double[::1] xv = x_arr
    cdef double[::1] sv = s_arr
    cdef long long rejects = 0
    cdef int failed = 0
    cdef Py_ssize_t i
    cdef int j, attempts
    cdef unsigned long long state
    cdef double s, x, xi, dn, factor

    with nogil:
        for i in range(n_paths):
            state = mix64(seed + (path_offset + <unsigned long long>i + 1ULL) * GOLDEN)
            s = s0
            x = 1.0
            for j in range(steps):
                attempts = 0
                while True:
                    attempts += 1
                    if attempts > max_attempts:
                        failed = 1
                        break
                    state += GOLDEN
                    xi = invnorm(u01(mix64(state)))
                    state += GOLDEN
                    dn = poisson_inv(u01(mix64(state)), lam, exp_neg_lam)
                    if dn < 0.0:
                        failed = 2
                        break
                    factor = 1.0 + mu_dt + sig_sqdt * xi + eta * (dn - comp)
                    if factor > 0.0:
                        break
                    rejects += 1
                if failed:
                    break
                s *= factor
                x *= 1.0 - c_prop * (factor - 1.0)
            if failed:
                break
            xv[i] = x
            sv[i] = s

    if failed == 1:
        raise RuntimeError("positivity rejection did not terminate; the grid "
                           "is far too coarse for these parameters")
    if failed == 2:
        raise RuntimeError("poisson inversion ran away")
    return x_arr, s_arr, int(rejects)


def price_paths(Py_ssize_t n_paths, unsigned long long path_offset,
                unsigned long long seed, int steps, double mu_dt,
                double sig_sqdt, double eta, double comp, double lam,
                double exp_neg_lam, double s0, int max_attempts=1000):
    """Compiled counterpart of _kernel_py.price_paths."""
    prices_arr = np.empty((n_paths, steps + 1))
    jumps_arr = np.empty((n_paths, steps), dtype=np.int64)
    cdef double[:, ::1] pv = prices_arr
    cdef long long[:, ::1] jv = jumps_arr
    cdef long long rejects = 0
    cdef int failed = 0
    cdef Py_ssize_t i
    cdef int j, attempts
    cdef unsigned long long state
    cdef double s, xi, dn, factor

    with nogil:
        for i in range(n_paths):
            state = mix64(seed + (path_offset + <unsigned long long>i + 1ULL) * GOLDEN)
            s = s0
            pv[i, 0] = s
            for j in range(steps):
                attempts = 0
                while True:
                    attempts += 1
                    if attempts > max_attempts:
                        failed = 1
                        break
                    state += GOLDEN
                    xi = invnorm(u01(mix64(state)))
                    state += GOLDEN
                    dn = poisson_inv(u01(mix64(state)), lam, exp_neg_lam)
                    if dn < 0.0:
                        failed = 2
                        break
                    factor = 1.0 + mu_dt + sig_sqdt * xi + eta * (dn - comp)
                    if factor > 0.0:
                        break
                    rejects += 1
                if failed:
                    break
                s *= factor
                pv[i, j + 1] = s
                jv[i, j] = <long long>dn
            if failed:
                break

    if failed == 1:
        raise RuntimeError("positivity rejection did not terminate; the grid "
                           "is far too coarse for these parameters")
    if failed == 2:
        raise RuntimeError("poisson inversion ran away")
    return prices_arr, jumps_arr, int(rejects)
