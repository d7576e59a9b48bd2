#!/usr/bin/env python
from __future__ import absolute_import, unicode_literals
import argparse
import json
import sys

from . import command
from . import sdt
from . import stats
from .bootstrap import bootstrap_ci
from .counts import RatingCounts, Type1Counts
from .errors import ParseError
from .metad import FitResult
from .metad_fit import load_input

META_METRICS = ('meta_d', 'm_ratio', 'log_m_ratio')


class Side(object):
    """One side of a comparison: a fit report or a counts file."""
    def __init__(self, path, correction=sdt.DEGENERATE):
        self.path = path
        self.fit = None
        self.counts = None
        if path.endswith('.json'):
            try:
                with open(path) as f:
                    d = json.load(f)
            except ValueError as e:
                raise ParseError('invalid JSON: %s' % e, path=path)
            if 'hr' not in d:
                raise ParseError('not a fit report', path=path)
            self.type1 = sdt.Type1Stats(d['hr'], d['far'], d['d_prime'], d['c'], d.get('c_prime'), d['n_s1'], d['n_s2'])
            if not d.get('type1_only'):
                self.fit = FitResult.from_dict(d)
                self.counts = self.fit.counts
        else:
            self.counts, _ = load_input(path)
            t1 = self.counts if isinstance(self.counts, Type1Counts) else self.counts.type1()
            self.type1 = sdt.type1_stats(t1, correction=correction)
            if isinstance(self.counts, Type1Counts):
                self.counts = None


def default_rope(metric):
    if metric == 'log_m_ratio':
        return stats.ROPE_LOG_M_RATIO
    return stats.ROPE_TYPE1


def add_arguments(parser):
    parser.add_argument('a', help='Fit report (.json), counts CSV or trial log')
    parser.add_argument('b', help='Fit report (.json), counts CSV or trial log')
    parser.add_argument('--metric', help='d_prime, c, c_prime, meta_d, m_ratio or log_m_ratio', default='d_prime',
        choices=stats.TYPE1_METRICS + META_METRICS)
    parser.add_argument('--comparisons', help='Number of comparisons for the Bonferroni correction', type=int, default=1)
    parser.add_argument('--alpha', help='Family-wise significance level', type=float, default=0.05)
    parser.add_argument('--rope', help='ROPE as low,high; default depends on the metric', type=command.float_list)
    parser.add_argument('--n-boot', help='Bootstrap replicates for meta-d family metrics', type=int, default=1000)
    parser.add_argument('--workers', help='Worker processes for the bootstrap', type=int, default=1)
    command.add_common_arguments(parser)
    parser.set_defaults(seed=0)


def run(args):
    rope = stats.Rope(*args.rope) if args.rope else default_rope(args.metric)
    a = Side(args.a)
    b = Side(args.b)
    if args.metric in stats.TYPE1_METRICS:
        result = stats.compare_type1(a.type1, b.type1, args.metric, args.comparisons, args.alpha, rope)
    else:
        for side in (a, b):
            if not isinstance(side.counts, RatingCounts):
                raise ParseError('%s needs confidence-rating counts' % args.metric, path=side.path)
        interval = bootstrap_ci(a.counts, args.metric, n_boot=args.n_boot, seed=args.seed, other=b.counts,
            workers=args.workers, fit=a.fit, other_fit=b.fit)
        result = stats.compare_bootstrap(interval.estimate, interval.replicates, args.comparisons, args.alpha, rope)
    doc = result.to_dict()
    doc.update({'metric': args.metric, 'a': args.a, 'b': args.b, 'comparisons': args.comparisons, 'alpha': args.alpha})
    if args.out:
        command.write_json(doc, args.out)
    command.emit(args, doc, '%s: %s' % (args.metric, result.verdict()))
    return command.EXIT_OK


def main(argv=None, prog=None):
    parser = argparse.ArgumentParser(prog=prog, description='Compare two estimates with a Bonferroni z-test and a ROPE.')
    add_arguments(parser)
    return command.execute(parser, run, argv)

if __name__ == '__main__':
    sys.exit(main())
