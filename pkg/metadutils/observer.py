"""Synthetic SDT observers for estimator validation.

Stimulus means sit at -d'/2 and +d'/2 on the type 1 axis; confidence is
generated on a meta-d' axis with the same normalized criterion.
"""
from __future__ import absolute_import, unicode_literals

import numpy as np

from . import log
from . import sdt
from .counts import RatingCounts, StimulusClass
from .errors import DomainError, MetadError, SimulationError
from .metad import MetaDParams, fit_meta_d, type2_probs
from .pool import map_tasks, replicate_rng

DEFAULT_GRID = (100, 300, 1000, 3000, 10000)

# very high type 1 sensitivity, high metacognitive efficiency
RECOVERY_OBSERVER = {
    'd_prime': 3.2,
    'c': 0.0,
    'meta_d': 3.0,
    't2_criteria_s1': [-2.0, -1.5, -1.0, -0.5],
    't2_criteria_s2': [0.5, 1.0, 1.5, 2.0],
}


class ObserverSpec(object):
    def __init__(self, d_prime, c, meta_d=None, t2_criteria_s1=None, t2_criteria_s2=None):
        self.d_prime = float(d_prime)
        self.c = float(c)
        self.meta_d = self.d_prime if meta_d is None else float(meta_d)
        if self.d_prime < 0 or self.meta_d < 0:
            raise DomainError('d_prime and meta_d must be >= 0')
        if t2_criteria_s1 is None or t2_criteria_s2 is None:
            raise DomainError('both type 2 criteria vectors are required')
        self.t2_criteria_s1 = np.array(t2_criteria_s1, dtype=float)
        self.t2_criteria_s2 = np.array(t2_criteria_s2, dtype=float)
        self.meta_params()

    @property
    def meta_c(self):
        if self.d_prime > 0:
            return self.c / self.d_prime * self.meta_d
        return self.c

    @property
    def h(self):
        return len(self.t2_criteria_s1) + 1

    def meta_params(self):
        return MetaDParams(self.meta_d, self.meta_c, self.t2_criteria_s1, self.t2_criteria_s2).validate()

    def response_probs(self):
        """P(response | stimulus) as a 2x2 array."""
        hr, far = sdt.generative_rates(self.d_prime, self.c)
        return np.array([[1.0 - far, far], [1.0 - hr, hr]])

    def to_dict(self):
        return {
            'd_prime': self.d_prime,
            'c': self.c,
            'meta_d': self.meta_d,
            't2_criteria_s1': self.t2_criteria_s1.tolist(),
            't2_criteria_s2': self.t2_criteria_s2.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d['d_prime'], d['c'], d.get('meta_d'), d['t2_criteria_s1'], d['t2_criteria_s2'])


class SimOptions(object):
    def __init__(self, n_trials, n_s1=None, deterministic_type1=True, sample_type2=True, seed=0):
        self.n_trials = int(n_trials)
        self.n_s1 = self.n_trials // 2 if n_s1 is None else int(n_s1)
        self.deterministic_type1 = deterministic_type1
        self.sample_type2 = sample_type2
        self.seed = int(seed)
        if self.n_trials < 2:
            raise DomainError('n_trials must be >= 2')
        if not 0 <= self.n_s1 <= self.n_trials:
            raise DomainError('n_s1 must lie in [0, n_trials]')

    @property
    def n_s2(self):
        return self.n_trials - self.n_s1

    def to_dict(self):
        return {
            'n_trials': self.n_trials,
            'n_s1': self.n_s1,
            'deterministic_type1': self.deterministic_type1,
            'sample_type2': self.sample_type2,
            'seed': self.seed,
        }


def _check_h(spec, h):
    if h is not None and h != spec.h:
        raise DomainError('scale size %s does not match %s criteria per response' % (h, spec.h - 1))


def expected_counts(spec, n_trials, h=None, n_s1=None):
    """Noise-free counts: n_stimulus * P(response, confidence | stimulus)."""
    _check_h(spec, h)
    n_s1 = n_trials / 2.0 if n_s1 is None else n_s1
    ns = np.array([n_s1, n_trials - n_s1], dtype=float)
    joint = spec.response_probs()[:, :, None] * type2_probs(spec.meta_params()).p
    return RatingCounts(ns[:, None, None] * joint)


def round_preserving(values, total):
    """Round half away from zero, then repair the sum on the largest cell."""
    values = np.asarray(values, dtype=float)
    rounded = np.sign(values) * np.floor(np.abs(values) + 0.5)
    rounded[np.argmax(values)] += total - rounded.sum()
    return rounded


def simulate_counts(spec, opts, h=None):
    _check_h(spec, h)
    rng = np.random.default_rng(opts.seed)
    ns = np.array([opts.n_s1, opts.n_s2])
    p_resp = spec.response_probs()
    type1 = np.zeros((2, 2))
    for s in range(2):
        if opts.deterministic_type1:
            type1[s] = round_preserving(ns[s] * p_resp[s], ns[s])
        else:
            n_resp_s2 = rng.binomial(ns[s], p_resp[s, 1])
            type1[s] = [ns[s] - n_resp_s2, n_resp_s2]
    if opts.deterministic_type1 and opts.sample_type2:
        empty = [(StimulusClass(s).name, StimulusClass(r).name)
                 for s in range(2) for r in range(2) if ns[s] > 0 and type1[s, r] == 0]
        if empty:
            raise SimulationError('rounding left empty (stimulus, response) cells: %s' % empty)
    probs = type2_probs(spec.meta_params()).p
    counts = np.zeros((2, 2, spec.h))
    for s in range(2):
        for r in range(2):
            n = int(type1[s, r])
            if opts.sample_type2:
                counts[s, r] = rng.multinomial(n, probs[s, r])
            elif n:
                counts[s, r] = round_preserving(n * probs[s, r], n)
    return RatingCounts(counts)


def sample_trial(spec, stimulus, rng):
    """One trial: (response, confidence) for the given stimulus."""
    s = int(stimulus)
    p_resp = spec.response_probs()
    r = int(rng.random() < p_resp[s, 1])
    probs = type2_probs(spec.meta_params()).p[s, r]
    confidence = int(rng.choice(spec.h, p=probs / probs.sum())) + 1
    return StimulusClass(r), confidence


def _recovery_task(task):
    spec_dict, n_trials, rep, seed, deterministic_type1 = task
    spec = ObserverSpec.from_dict(spec_dict)
    rep_seed = int(replicate_rng(seed, n_trials, rep).integers(2**31))
    opts = SimOptions(n_trials, deterministic_type1=deterministic_type1, seed=rep_seed)
    try:
        fit = fit_meta_d(simulate_counts(spec, opts))
    except MetadError as e:
        return None, str(e)
    if not fit.converged:
        return None, 'no convergence'
    return (fit.d_prime_type1, fit.params.meta_d), None


def recovery_sweep(spec, grid=DEFAULT_GRID, reps=20, seed=0, h=None, workers=1, deterministic_type1=True):
    """Mean and spread of fitted d' and meta-d' over repeated simulations per trial count."""
    _check_h(spec, h)
    tasks = [(spec.to_dict(), n, rep, seed, deterministic_type1) for n in grid for rep in range(reps)]
    results = map_tasks(_recovery_task, tasks, workers=workers)
    rows = []
    for n in grid:
        chunk = [r for t, r in zip(tasks, results) if t[1] == n]
        ok = np.array([v for v, _ in chunk if v is not None]).reshape(-1, 2)
        failed = len(chunk) - len(ok)
        if failed:
            log.warning('%s of %s recovery fits failed at n_trials=%s'%(failed, len(chunk), n))
        row = {'n_trials': n, 'reps': len(ok), 'n_failed': failed}
        for i, name in enumerate(('d_prime', 'meta_d')):
            values = ok[:, i]
            row['mean_%s' % name] = float(values.mean()) if len(values) else float('nan')
            row['sd_%s' % name] = float(values.std(ddof=1)) if len(values) > 1 else float('nan')
        log.info('n_trials=%s: d_prime %.4f (sd %.4f), meta_d %.4f (sd %.4f)'%(
            n, row['mean_d_prime'], row['sd_d_prime'], row['mean_meta_d'], row['sd_meta_d']))
        rows.append(row)
    return rows
