"""Delta-method variances, Bonferroni z-tests and ROPE verdicts."""
from __future__ import absolute_import, unicode_literals
import collections
import math

import numpy as np

from . import sdt
from .errors import DomainError

PRACTICALLY_SIGNIFICANT = 'practically_significant'
NEGLIGIBLE = 'negligible'
INCONCLUSIVE = 'inconclusive'

TYPE1_METRICS = ('d_prime', 'c', 'c_prime')

DeltaEstimate = collections.namedtuple('DeltaEstimate', ['value', 'variance', 'n_s1', 'n_s2'])


class Rope(collections.namedtuple('Rope', ['low', 'high'])):
    __slots__ = ()

    def __new__(cls, low, high):
        if not low < high:
            raise DomainError('ROPE bounds must satisfy low < high, got [%s, %s]' % (low, high))
        return super(Rope, cls).__new__(cls, float(low), float(high))

    def contains(self, value):
        return self.low <= value <= self.high


# log M_ratio differences; d' and c differences
ROPE_LOG_M_RATIO = Rope(-0.05, 0.05)
ROPE_TYPE1 = Rope(-0.1, 0.1)


class ComparisonResult(collections.namedtuple('ComparisonResult', [
        'diff', 'z', 'alpha_corrected', 'threshold', 'statistically_significant', 'ci', 'rope', 'rope_verdict'])):
    __slots__ = ()

    def to_dict(self):
        return {
            'diff': self.diff,
            'z': self.z,
            'alpha_corrected': self.alpha_corrected,
            'threshold': self.threshold,
            'statistically_significant': self.statistically_significant,
            'ci': list(self.ci),
            'rope': list(self.rope),
            'rope_verdict': self.rope_verdict,
        }

    def verdict(self):
        return 'diff=%.4f z=%.3f (|z| %s %.3f) ci=[%.4f, %.4f] rope=[%s, %s]: %s, %s' % (
            self.diff, self.z, '>=' if self.statistically_significant else '<', self.threshold,
            self.ci[0], self.ci[1], self.rope[0], self.rope[1],
            'significant' if self.statistically_significant else 'not significant', self.rope_verdict)


def _z_variances(hr, far, n_s1, n_s2):
    if n_s1 < 1 or n_s2 < 1:
        raise DomainError('counts must be >= 1 (n_s1=%s, n_s2=%s)' % (n_s1, n_s2))
    if not (0.0 < hr < 1.0 and 0.0 < far < 1.0):
        raise DomainError('Delta variance undefined at degenerate rates: hr=%s far=%s' % (hr, far))
    z_hr = sdt.z(hr)
    z_far = sdt.z(far)
    var_zhr = hr * (1 - hr) / (n_s2 * sdt.normal_density(z_hr) ** 2)
    var_zfar = far * (1 - far) / (n_s1 * sdt.normal_density(z_far) ** 2)
    return z_hr, z_far, var_zhr, var_zfar


def delta_var_dprime(hr, far, n_s1, n_s2):
    _, _, var_zhr, var_zfar = _z_variances(hr, far, n_s1, n_s2)
    return var_zhr + var_zfar


def delta_var_c(hr, far, n_s1, n_s2):
    _, _, var_zhr, var_zfar = _z_variances(hr, far, n_s1, n_s2)
    return 0.25 * (var_zhr + var_zfar)


def delta_var_c_prime(hr, far, n_s1, n_s2):
    z_hr, z_far, var_zhr, var_zfar = _z_variances(hr, far, n_s1, n_s2)
    d = z_hr - z_far
    if d == 0:
        raise DomainError('undefined normalized criterion: d_prime is 0')
    # c' = -(z_hr + z_far) / (2 (z_hr - z_far))
    g_hr = z_far / d ** 2
    g_far = -z_hr / d ** 2
    return g_hr ** 2 * var_zhr + g_far ** 2 * var_zfar


_VARIANCES = {
    'd_prime': delta_var_dprime,
    'c': delta_var_c,
    'c_prime': delta_var_c_prime,
}


def delta_estimate(stats, metric):
    """DeltaEstimate of metric from a sdt.Type1Stats."""
    if metric not in TYPE1_METRICS:
        raise DomainError('unknown type 1 metric: %r' % (metric,))
    value = getattr(stats, metric)
    if value is None:
        raise DomainError('undefined normalized criterion: d_prime is 0')
    variance = _VARIANCES[metric](stats.hr, stats.far, stats.n_s1, stats.n_s2)
    return DeltaEstimate(value, variance, stats.n_s1, stats.n_s2)


def bonferroni_threshold(alpha=0.05, m=1):
    if m < 1:
        raise DomainError('number of comparisons must be >= 1')
    if not 0.0 < alpha < 1.0:
        raise DomainError('alpha must be inside (0, 1)')
    return sdt.z(1.0 - alpha / (2.0 * m))


def rope_classify(ci, rope):
    low, high = ci
    if low > high:
        raise DomainError('interval bounds out of order: [%s, %s]' % (low, high))
    # touching a bound counts as overlap
    if high < rope.low or low > rope.high:
        return PRACTICALLY_SIGNIFICANT
    if low > rope.low and high < rope.high:
        return NEGLIGIBLE
    return INCONCLUSIVE


def z_test(diff, var_diff, m_comparisons=1, alpha=0.05, rope=ROPE_TYPE1):
    if not var_diff > 0 or not math.isfinite(var_diff):
        raise DomainError('variance of the difference must be positive, got %r' % (var_diff,))
    se = math.sqrt(var_diff)
    z = diff / se
    alpha_corrected = alpha / float(m_comparisons)
    threshold = bonferroni_threshold(alpha, m_comparisons)
    half = sdt.z(1.0 - alpha / 2.0) * se
    ci = (diff - half, diff + half)
    return ComparisonResult(diff, z, alpha_corrected, threshold, abs(z) >= threshold, ci, rope,
        rope_classify(ci, rope))


def compare_type1(a, b, metric='d_prime', m_comparisons=1, alpha=0.05, rope=ROPE_TYPE1):
    """Difference a - b of two independent type 1 estimates (sdt.Type1Stats)."""
    ea = delta_estimate(a, metric)
    eb = delta_estimate(b, metric)
    return z_test(ea.value - eb.value, ea.variance + eb.variance, m_comparisons, alpha, rope)


def compare_bootstrap(estimate, replicates, m_comparisons=1, alpha=0.05, rope=ROPE_LOG_M_RATIO):
    """z-test of a meta-d' family difference whose variance comes from bootstrap replicates."""
    replicates = np.asarray(replicates, dtype=float)
    replicates = replicates[np.isfinite(replicates)]
    if len(replicates) < 2:
        raise DomainError('at least two finite replicates are required')
    return z_test(estimate, float(replicates.var(ddof=1)), m_comparisons, alpha, rope)
