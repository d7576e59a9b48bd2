"""Equal-variance signal detection theory, type 1 metrics.

Evidence axis convention: S1 is centered left of S2, and a response of "S2"
is given when the evidence falls above the criterion.
"""
from __future__ import absolute_import, unicode_literals
import collections

from scipy.special import ndtr, ndtri
from scipy.stats import norm

from . import log
from .counts import Type1Counts
from .errors import DomainError

NEVER = 'never'
DEGENERATE = 'degenerate'
ALWAYS = 'always'
CORRECTIONS = (NEVER, DEGENERATE, ALWAYS)

Type1Stats = collections.namedtuple('Type1Stats', ['hr', 'far', 'd_prime', 'c', 'c_prime', 'n_s1', 'n_s2'])


def z(p):
    """Inverse of the standard normal CDF."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError('z(p) requires 0 < p < 1, got %r' % p)
    return float(ndtri(p))


def _corrected_rate(n_resp_s2, n, correction):
    degenerate = n_resp_s2 <= 0 or n_resp_s2 >= n
    if correction == ALWAYS or (correction == DEGENERATE and degenerate):
        # log-linear: +0.5 to each cell of the row, +1 to its total
        return (n_resp_s2 + 0.5) / (n + 1.0), True
    return n_resp_s2 / float(n), False


def type1_rates(counts, correction=DEGENERATE):
    """Hit and false-alarm rates strictly inside (0, 1)."""
    if correction not in CORRECTIONS:
        raise DomainError('unknown edge correction: %r' % (correction,))
    counts = Type1Counts(*counts).validate()
    hr, hr_fixed = _corrected_rate(counts.n_s2_resp_s2, counts.n_s2, correction)
    far, far_fixed = _corrected_rate(counts.n_s1_resp_s2, counts.n_s1, correction)
    if correction == DEGENERATE and (hr_fixed or far_fixed):
        log.debug('edge correction applied: hr=%s far=%s'%(hr, far))
    if not (0.0 < hr < 1.0 and 0.0 < far < 1.0):
        raise DomainError('degenerate rates without correction: hr=%s far=%s' % (hr, far))
    return hr, far


def d_prime(hr, far):
    return z(hr) - z(far)


def criterion_c(hr, far):
    return -0.5 * (z(hr) + z(far))


def c_prime(c, d_prime):
    if d_prime == 0:
        raise DomainError('undefined normalized criterion: d_prime is 0')
    return c / float(d_prime)


def type1_stats(counts, correction=DEGENERATE):
    counts = Type1Counts(*counts)
    hr, far = type1_rates(counts, correction=correction)
    d = d_prime(hr, far)
    c = criterion_c(hr, far)
    cp = None
    if d != 0:
        cp = c_prime(c, d)
    return Type1Stats(hr, far, d, c, cp, float(counts.n_s1), float(counts.n_s2))


def generative_rates(d_prime, c):
    """(hr, far) of an observer with unit-variance means at -d'/2 and +d'/2."""
    hr = float(ndtr(d_prime / 2.0 - c))
    far = float(ndtr(-d_prime / 2.0 - c))
    return hr, far


def normal_density(x):
    return float(norm.pdf(x))
