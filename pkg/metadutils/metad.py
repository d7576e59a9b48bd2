"""Maximum-likelihood meta-d' with the meta-c' = c' constraint.

The likelihood conditions on the type 1 response: for each (stimulus,
response) cell only the split of trials across confidence levels is
modelled, and type 1 behavior enters through c' alone.
"""
from __future__ import absolute_import, unicode_literals
import math

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtr, ndtri

from . import log
from . import sdt
from .counts import as_rating_counts, RatingCounts
from .errors import DomainError, FitError

NEVER = sdt.NEVER
DEGENERATE = sdt.DEGENERATE
ALWAYS = sdt.ALWAYS

_TINY = 1e-300


class MetaDParams(object):
    def __init__(self, meta_d, meta_c, t2_criteria_s1, t2_criteria_s2):
        self.meta_d = float(meta_d)
        self.meta_c = float(meta_c)
        self.t2_criteria_s1 = np.array(t2_criteria_s1, dtype=float)
        self.t2_criteria_s2 = np.array(t2_criteria_s2, dtype=float)
        if self.t2_criteria_s1.ndim != 1 or self.t2_criteria_s1.shape != self.t2_criteria_s2.shape:
            raise DomainError('type 2 criteria must be two vectors of equal length')
        if len(self.t2_criteria_s1) < 1:
            raise DomainError('at least one type 2 criterion per response is required')

    @property
    def h(self):
        return len(self.t2_criteria_s1) + 1

    def thresholds(self):
        return np.concatenate([self.t2_criteria_s1, [self.meta_c], self.t2_criteria_s2])

    def validate(self):
        t = self.thresholds()
        if not np.all(np.isfinite(t)) or not np.all(np.diff(t) > 0):
            raise DomainError('criteria must be strictly increasing around meta_c: %s' % (t.tolist(),))
        return self

    def to_dict(self):
        return {
            'meta_d': self.meta_d,
            'meta_c': self.meta_c,
            't2_criteria_s1': self.t2_criteria_s1.tolist(),
            't2_criteria_s2': self.t2_criteria_s2.tolist(),
        }

    def __repr__(self):
        return 'MetaDParams(meta_d=%r, meta_c=%r, s1=%s, s2=%s)' % (
            self.meta_d, self.meta_c, self.t2_criteria_s1.tolist(), self.t2_criteria_s2.tolist())


class Type2ProbTable(object):
    """P(confidence | stimulus, response), indexed like RatingCounts."""
    def __init__(self, p):
        self.p = p

    @property
    def h(self):
        return self.p.shape[2]

    def __getitem__(self, key):
        return self.p[key]


def _conditional_probs(meta_d, thresholds, h):
    mu = np.array([[-0.5 * meta_d], [0.5 * meta_d]])
    edges = np.concatenate([[-np.inf], thresholds, [np.inf]])[None, :]
    cdf = ndtr(edges - mu)
    sf = ndtr(mu - edges)
    # interval i < h is an "S1" response with confidence h - i;
    # interval h + k is an "S2" response with confidence k + 1
    lower = np.diff(cdf[:, :h + 1], axis=1)[:, ::-1]
    upper = -np.diff(sf[:, h:], axis=1)
    with np.errstate(divide='ignore', invalid='ignore'):
        p_s1 = np.where(cdf[:, h:h + 1] > 0, lower / cdf[:, h:h + 1], 0.0)
        p_s2 = np.where(sf[:, h:h + 1] > 0, upper / sf[:, h:h + 1], 0.0)
    return np.stack([p_s1, p_s2], axis=1)


def type2_probs(params, h=None):
    params.validate()
    if h is not None and h != params.h:
        raise DomainError('scale size %s does not match %s criteria per response' % (h, params.h - 1))
    return Type2ProbTable(_conditional_probs(params.meta_d, params.thresholds(), params.h))


def joint_probs(d_prime, c, params):
    """P(response, confidence | stimulus) for type 1 behavior (d', c)."""
    hr, far = sdt.generative_rates(d_prime, c)
    p_resp = np.array([[1.0 - far, far], [1.0 - hr, hr]])
    return p_resp[:, :, None] * type2_probs(params).p


def _nll(p, data):
    return -float(np.sum(data * np.log(np.maximum(p, _TINY))))


def log_likelihood(params, counts):
    counts = as_rating_counts(counts)
    p = type2_probs(params, counts.h).p
    return -_nll(p, counts.counts)


def m_ratio(meta_d, d_prime):
    if not d_prime > 0:
        raise DomainError('m_ratio requires d_prime > 0, got %r' % (d_prime,))
    return meta_d / float(d_prime)


def pad_cells(counts, policy=DEGENERATE):
    """Add 1/(2h) to every cell; returns (array, padded)."""
    counts = as_rating_counts(counts)
    arr = counts.counts
    if policy not in sdt.CORRECTIONS:
        raise DomainError('unknown cell padding policy: %r' % (policy,))
    if policy == ALWAYS or (policy == DEGENERATE and np.any(arr == 0)):
        return arr + 1.0 / (2 * counts.h), True
    return arr, False


def _unpack(x, c_prime, h):
    meta_d = x[0]
    meta_c = c_prime * meta_d
    # log-gaps are clamped so neighbouring thresholds stay distinct and finite
    gaps = np.exp(np.clip(x[1:], -30.0, 5.0))
    left = meta_c - np.cumsum(gaps[:h - 1])
    right = meta_c + np.cumsum(gaps[h - 1:])
    return meta_d, np.concatenate([left[::-1], [meta_c], right])


def _pack(meta_d, thresholds, h):
    meta_c = thresholds[h - 1]
    left = -np.diff(np.concatenate([[meta_c], thresholds[:h - 1][::-1]]))
    right = np.diff(thresholds[h - 1:])
    return np.concatenate([[meta_d], np.log(left), np.log(right)])


def initial_guess(data, d_prime, c_prime):
    """Quantile-matched type 2 thresholds at meta_d = d'."""
    h = data.shape[2]
    # one 2h-level scale per stimulus: "S1" conf h..1, then "S2" conf 1..h
    scale = np.concatenate([data[:, 0, ::-1], data[:, 1, :]], axis=1)
    tail = np.cumsum(scale[:, ::-1], axis=1)[:, ::-1] / scale.sum(axis=1, keepdims=True)
    eps = 1e-6
    far2 = np.clip(tail[0, 1:], eps, 1 - eps)
    hr2 = np.clip(tail[1, 1:], eps, 1 - eps)
    t = -0.5 * (ndtri(hr2) + ndtri(far2))
    t[h - 1] = c_prime * d_prime
    step = 0.05
    for i in range(h - 2, -1, -1):
        t[i] = min(t[i], t[i + 1] - step)
    for i in range(h, 2 * h - 1):
        t[i] = max(t[i], t[i - 1] + step)
    return _pack(d_prime, t, h)


def _simplex(x, scale):
    n = len(x)
    sim = np.tile(x, (n + 1, 1))
    for i in range(n):
        sim[i + 1, i] += scale
    return sim


class FitResult(object):
    def __init__(self, params, log_likelihood, d_prime_type1, c_type1, converged, iterations,
                 evaluations=0, type1=None, counts=None, padded=False, message='', meta=None,
                 objective=None):
        self.params = params
        self.log_likelihood = float(log_likelihood)
        # log-likelihood of the padded table the optimizer saw
        self.objective = self.log_likelihood if objective is None else float(objective)
        self.d_prime_type1 = float(d_prime_type1)
        self.c_type1 = float(c_type1)
        self.converged = bool(converged)
        self.iterations = int(iterations)
        self.evaluations = int(evaluations)
        self.type1 = type1
        self.counts = counts
        self.padded = padded
        self.message = message
        self.meta = dict(meta or {})
        self.ci = None
        if self.d_prime_type1 > 0:
            self.m_ratio = m_ratio(params.meta_d, self.d_prime_type1)
        else:
            self.m_ratio = float('nan')

    @property
    def c_prime(self):
        return sdt.c_prime(self.c_type1, self.d_prime_type1)

    def to_dict(self):
        d = self.params.to_dict()
        d.update({
            'd_prime': self.d_prime_type1,
            'c': self.c_type1,
            'c_prime': self.c_prime,
            'm_ratio': _finite_or_none(self.m_ratio),
            'log_likelihood': self.log_likelihood,
            'objective': self.objective,
            'converged': self.converged,
            'iterations': self.iterations,
            'evaluations': self.evaluations,
            'padded': self.padded,
            'message': self.message,
        })
        if self.type1 is not None:
            d.update({'hr': self.type1.hr, 'far': self.type1.far, 'n_s1': self.type1.n_s1, 'n_s2': self.type1.n_s2})
        if self.counts is not None:
            d['counts'] = self.counts.counts.tolist()
        if self.ci is not None:
            d['ci'] = self.ci
        if self.meta:
            d['meta'] = self.meta
        return d

    @classmethod
    def from_dict(cls, d):
        params = MetaDParams(d['meta_d'], d['meta_c'], d['t2_criteria_s1'], d['t2_criteria_s2'])
        type1 = None
        if 'hr' in d:
            type1 = sdt.Type1Stats(d['hr'], d['far'], d['d_prime'], d['c'], d.get('c_prime'), d['n_s1'], d['n_s2'])
        counts = None
        if d.get('counts') is not None:
            counts = RatingCounts(d['counts'])
        fit = cls(params, d['log_likelihood'], d['d_prime'], d['c'], d['converged'], d['iterations'],
            evaluations=d.get('evaluations', 0), type1=type1, counts=counts, padded=d.get('padded', False),
            message=d.get('message', ''), meta=d.get('meta'),
            objective=d.get('objective'))
        fit.ci = d.get('ci')
        return fit


def _finite_or_none(v):
    if v is None or not math.isfinite(v):
        return None
    return v


def fit_meta_d(counts, cell_padding=DEGENERATE, correction=DEGENERATE, max_evals=100000, tol=1e-8,
               restarts=4, meta=None):
    """Fit meta-d' by Nelder-Mead on ordered-by-construction thresholds.

    Non-convergence is reported through FitResult.converged; malformed
    counts raise.
    """
    counts = as_rating_counts(counts)
    h = counts.h
    stats = sdt.type1_stats(counts.type1(), correction=correction)
    if stats.c_prime is None:
        raise FitError('type 1 d_prime is 0; the meta-c constraint is undefined')
    c_prime = stats.c_prime
    data, padded = pad_cells(counts, cell_padding)
    if padded:
        log.debug('padded every cell by %s'%(1.0 / (2 * h)))

    def objective(x):
        meta_d, t = _unpack(x, c_prime, h)
        if not np.all(np.isfinite(t)):
            return np.inf
        return _nll(_conditional_probs(meta_d, t, h), data)

    x = initial_guess(data, stats.d_prime, c_prime)
    best = objective(x)
    fatol = tol * max(abs(best), 1.0)
    evaluations = 1
    iterations = 0
    converged = False
    message = ''
    scale = 0.25
    for attempt in range(restarts + 1):
        budget = max_evals - evaluations
        if budget <= 0:
            message = 'evaluation budget exhausted'
            break
        res = minimize(objective, x, method='Nelder-Mead', options={
            'initial_simplex': _simplex(x, scale),
            'maxfev': budget,
            'xatol': 1e-7,
            'fatol': fatol,
            'adaptive': True,
        })
        evaluations += res.nfev
        iterations += res.nit
        gain = best - res.fun
        if res.fun <= best:
            x, best = res.x, res.fun
        message = res.message
        # a restart that gains nothing confirms the optimum
        if attempt > 0 and res.success and gain <= fatol:
            converged = True
            break
        scale = 0.05
    meta_d, t = _unpack(x, c_prime, h)
    params = MetaDParams(meta_d, t[h - 1], t[:h - 1], t[h:])
    if converged:
        log.debug('meta-d fit converged after %s evaluations: meta_d=%s'%(evaluations, meta_d))
    else:
        log.warning('meta-d fit did not converge after %s evaluations (%s)'%(evaluations, message))
    return FitResult(params, log_likelihood(params, counts), stats.d_prime, stats.c, converged, iterations,
        evaluations=evaluations, type1=stats, counts=counts, padded=padded, message=str(message), meta=meta,
        objective=-best)
