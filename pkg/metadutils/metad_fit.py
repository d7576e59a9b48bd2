#!/usr/bin/env python
from __future__ import absolute_import, unicode_literals
import argparse
import os
import sys

from . import command
from . import log
from . import sdt
from .bootstrap import bootstrap_ci
from .counts import Type1Counts, load_counts
from .harness import load_trials, tally
from .metad import fit_meta_d
from .report import FIT_SUFFIX, type1_report

META_KEYS = ('model_id', 'task', 'risk', 'mode')


def default_outpath(path):
    base = path
    for ext in ('.jsonl', '.csv'):
        if base.endswith(ext):
            base = base[:-len(ext)]
    return base + FIT_SUFFIX


def load_input(path):
    """Counts and run metadata from a counts CSV or a trial log."""
    meta = {'source': os.path.abspath(path)}
    if path.endswith('.jsonl'):
        header, records = load_trials(path)
        meta.update((k, header.get(k)) for k in META_KEYS)
        return tally(records), meta
    return load_counts(path), meta


def add_arguments(parser):
    parser.add_argument('counts', help='Counts CSV or trial log (.jsonl)')
    parser.add_argument('--cell-padding', help='Add 1/(2h) to every cell: never, degenerate, always',
        choices=sdt.CORRECTIONS, default=sdt.DEGENERATE)
    parser.add_argument('--correction', help='Log-linear type 1 rate correction: never, degenerate, always',
        choices=sdt.CORRECTIONS, default=sdt.DEGENERATE)
    parser.add_argument('--max-evals', help='Objective evaluation budget', type=int, default=100000)
    parser.add_argument('--restarts', help='Optimizer restarts', type=int, default=4)
    parser.add_argument('--bootstrap', help='Bootstrap replicates for confidence intervals; 0 to skip', type=int, default=0)
    parser.add_argument('--statistics', help='Comma-separated bootstrap statistics', default='meta_d,m_ratio')
    parser.add_argument('--level', help='Confidence level', type=float, default=0.95)
    parser.add_argument('--workers', help='Worker processes for the bootstrap', type=int, default=1)
    for k in META_KEYS:
        parser.add_argument('--%s' % k.replace('_', '-'), help='Run metadata recorded in the report', dest=k)
    command.add_common_arguments(parser)
    parser.set_defaults(seed=0)


def run(args):
    counts, meta = load_input(args.counts)
    meta.update((k, getattr(args, k)) for k in META_KEYS if getattr(args, k))
    outpath = args.out or default_outpath(args.counts)
    if os.path.exists(outpath):
        log.warning("Warning: output path %s already exists."%outpath)
    if isinstance(counts, Type1Counts):
        stats = sdt.type1_stats(counts, correction=args.correction)
        doc = type1_report(stats, meta)
        command.write_json(doc, outpath)
        command.emit(args, doc, "d'=%.4f c=%.4f c'=%s (type 1 only); wrote %s" % (
            stats.d_prime, stats.c, '%.4f' % stats.c_prime if stats.c_prime is not None else 'undefined', outpath))
        return command.EXIT_OK
    fit = fit_meta_d(counts, cell_padding=args.cell_padding, correction=args.correction,
        max_evals=args.max_evals, restarts=args.restarts, meta=meta)
    if args.bootstrap:
        fit.ci = {}
        for statistic in [i.strip() for i in args.statistics.split(',') if i.strip()]:
            interval = bootstrap_ci(counts, statistic, n_boot=args.bootstrap, level=args.level, seed=args.seed,
                workers=args.workers, cell_padding=args.cell_padding, correction=args.correction, fit=fit)
            fit.ci[statistic] = interval.to_dict()
    doc = fit.to_dict()
    command.write_json(doc, outpath)
    command.emit(args, doc, "d'=%.4f meta_d=%.4f m_ratio=%.4f converged=%s; wrote %s" % (
        fit.d_prime_type1, fit.params.meta_d, fit.m_ratio, fit.converged, outpath))
    if not fit.converged:
        return command.EXIT_NO_CONVERGENCE
    return command.EXIT_OK


def main(argv=None, prog=None):
    parser = argparse.ArgumentParser(prog=prog, description="Fit meta-d' to confidence-rating counts.")
    add_arguments(parser)
    return command.execute(parser, run, argv)

if __name__ == '__main__':
    sys.exit(main())
