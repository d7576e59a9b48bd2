"""Parametric bootstrap intervals for meta-d' family statistics.

Each replicate redraws multinomial counts from the fitted model at the
observed stimulus totals and refits. Replicate i draws from a generator
derived from (seed, i) alone, so serial and pooled runs agree exactly.
"""
from __future__ import absolute_import, unicode_literals
import collections
import math

import numpy as np

from . import log
from .counts import as_rating_counts
from .errors import BootstrapError, DomainError, MetadError
from .metad import fit_meta_d, joint_probs, DEGENERATE
from .pool import map_tasks, replicate_rng

STATISTICS = ('meta_d', 'm_ratio', 'log_m_ratio', 'd_prime')
MAX_FAILED_FRACTION = 0.2


class BootstrapInterval(collections.namedtuple('BootstrapInterval', [
        'statistic', 'low', 'high', 'level', 'n_boot', 'seed', 'estimate', 'n_failed', 'replicates', 'difference'])):
    __slots__ = ()

    def to_dict(self):
        return {
            'statistic': self.statistic,
            'difference': self.difference,
            'low': self.low,
            'high': self.high,
            'level': self.level,
            'n_boot': self.n_boot,
            'seed': self.seed,
            'estimate': self.estimate,
            'n_failed': self.n_failed,
        }


def statistic_value(fit, statistic):
    if statistic == 'meta_d':
        return fit.params.meta_d
    if statistic == 'd_prime':
        return fit.d_prime_type1
    if statistic == 'm_ratio':
        return fit.m_ratio
    if statistic == 'log_m_ratio':
        if fit.m_ratio > 0:
            return math.log(fit.m_ratio)
        return float('nan')
    raise DomainError('unknown statistic: %r' % (statistic,))


def _model_side(fit):
    probs = joint_probs(fit.d_prime_type1, fit.c_type1, fit.params)
    probs = probs / probs.sum(axis=(1, 2), keepdims=True)
    ns = np.array([fit.counts.n_s1, fit.counts.n_s2])
    return probs, ns


def _draw(probs, ns, rng, resample):
    if not resample:
        return ns[:, None, None] * probs
    h = probs.shape[2]
    return np.stack([
        rng.multinomial(int(round(ns[s])), probs[s].ravel()).reshape(2, h)
        for s in range(2)
    ])


def _replicate(task):
    index, seed, sides, statistic, fit_kwargs, resample = task
    rng = replicate_rng(seed, index)
    values = []
    for probs, ns in sides:
        counts = _draw(probs, ns, rng, resample)
        try:
            fit = fit_meta_d(counts, **fit_kwargs)
        except MetadError as e:
            return None, str(e)
        if not fit.converged:
            return None, 'no convergence'
        v = statistic_value(fit, statistic)
        if not math.isfinite(v):
            return None, 'non-finite %s' % statistic
        values.append(v)
    if len(values) == 2:
        return values[0] - values[1], None
    return values[0], None


def bootstrap_ci(counts, statistic='meta_d', n_boot=1000, level=0.95, seed=0, other=None, workers=1,
                 resample=True, cell_padding=DEGENERATE, correction=DEGENERATE, fit=None, other_fit=None):
    """Percentile interval for statistic(counts), or statistic(counts) - statistic(other)."""
    if statistic not in STATISTICS:
        raise DomainError('unknown statistic: %r' % (statistic,))
    if n_boot < 100:
        raise DomainError('n_boot must be >= 100, got %s' % n_boot)
    if not 0.0 < level < 1.0:
        raise DomainError('level must be inside (0, 1), got %s' % level)
    fit_kwargs = {'cell_padding': cell_padding, 'correction': correction}
    fits = [fit or fit_meta_d(as_rating_counts(counts), **fit_kwargs)]
    if other is not None or other_fit is not None:
        fits.append(other_fit or fit_meta_d(as_rating_counts(other), **fit_kwargs))
    estimates = [statistic_value(f, statistic) for f in fits]
    estimate = estimates[0] - estimates[1] if len(fits) == 2 else estimates[0]
    sides = [_model_side(f) for f in fits]
    tasks = [(i, seed, sides, statistic, fit_kwargs, resample) for i in range(n_boot)]
    results = map_tasks(_replicate, tasks, workers=workers)
    values = np.array([v for v, _ in results if v is not None])
    failures = collections.Counter(reason for v, reason in results if v is None)
    n_failed = n_boot - len(values)
    if n_failed:
        log.warning('%s of %s bootstrap replicates failed: %s'%(n_failed, n_boot, dict(failures)))
    if n_failed > MAX_FAILED_FRACTION * n_boot:
        raise BootstrapError('%s of %s bootstrap replicates failed (limit %d%%)' % (
            n_failed, n_boot, int(MAX_FAILED_FRACTION * 100)))
    alpha = 1.0 - level
    low, high = np.percentile(values, [100.0 * alpha / 2, 100.0 * (1 - alpha / 2)])
    log.info('bootstrap %s%s: %.4f [%.4f, %.4f] (%s replicates)'%(
        'difference of ' if len(fits) == 2 else '', statistic, estimate, low, high, len(values)))
    return BootstrapInterval(statistic, float(low), float(high), level, n_boot, seed, float(estimate),
        n_failed, values, len(fits) == 2)
