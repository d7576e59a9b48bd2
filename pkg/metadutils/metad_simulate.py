#!/usr/bin/env python
from __future__ import absolute_import, unicode_literals
import argparse
import sys
import csv
import os

from . import command
from . import log
from .counts import write_counts
from .observer import DEFAULT_GRID, RECOVERY_OBSERVER, ObserverSpec, SimOptions, expected_counts, recovery_sweep, simulate_counts

SWEEP_COLUMNS = ['n_trials', 'reps', 'n_failed', 'mean_d_prime', 'sd_d_prime', 'mean_meta_d', 'sd_meta_d']


def add_arguments(parser):
    parser.add_argument('--d-prime', help='Type 1 sensitivity', type=float, default=RECOVERY_OBSERVER['d_prime'])
    parser.add_argument('--c', help='Type 1 criterion', type=float, default=RECOVERY_OBSERVER['c'])
    parser.add_argument('--meta-d', help="Metacognitive sensitivity; default is d'", type=float,
        default=RECOVERY_OBSERVER['meta_d'])
    parser.add_argument('--criteria-s1', help='Comma-separated type 2 criteria below meta_c, ascending',
        type=command.float_list, default=RECOVERY_OBSERVER['t2_criteria_s1'])
    parser.add_argument('--criteria-s2', help='Comma-separated type 2 criteria above meta_c, ascending',
        type=command.float_list, default=RECOVERY_OBSERVER['t2_criteria_s2'])
    parser.add_argument('--n-trials', help='Number of trials', type=int, default=10000)
    parser.add_argument('--n-s1', help='Number of S1 trials; default is half', type=int)
    parser.add_argument('--stochastic-type1', help='Draw type 1 counts binomially instead of rounding', action='store_true')
    parser.add_argument('--no-sample-type2', help='Round type 2 counts instead of drawing them', action='store_true')
    parser.add_argument('--expected', help='Write noise-free expected counts', action='store_true')
    parser.add_argument('--sweep', help='Comma-separated trial counts for a recovery sweep', type=command.int_list)
    parser.add_argument('--reps', help='Repetitions per sweep point', type=int, default=20)
    parser.add_argument('--workers', help='Worker processes for the sweep', type=int, default=1)
    command.add_common_arguments(parser)
    parser.set_defaults(seed=0)


def write_sweep(rows, path):
    if os.path.exists(path):
        log.warning("Warning: output path %s already exists."%path)
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def sidecar_path(outpath):
    return os.path.splitext(outpath)[0] + '.json'


def run(args):
    spec = ObserverSpec(args.d_prime, args.c, args.meta_d, args.criteria_s1, args.criteria_s2)
    if args.sweep is not None:
        grid = args.sweep or DEFAULT_GRID
        rows = recovery_sweep(spec, grid=grid, reps=args.reps, seed=args.seed,
            workers=args.workers, deterministic_type1=not args.stochastic_type1)
        outpath = args.out or 'recovery.csv'
        write_sweep(rows, outpath)
        command.write_json({'observer': spec.to_dict(), 'grid': list(grid), 'reps': args.reps, 'seed': args.seed,
            'deterministic_type1': not args.stochastic_type1, 'rows': rows}, sidecar_path(outpath))
        command.emit(args, {'observer': spec.to_dict(), 'out': outpath, 'rows': rows}, 'Wrote %s' % outpath)
        return command.EXIT_OK
    opts = SimOptions(args.n_trials, n_s1=args.n_s1, deterministic_type1=not args.stochastic_type1,
        sample_type2=not args.no_sample_type2, seed=args.seed)
    if args.expected:
        counts = expected_counts(spec, args.n_trials, n_s1=args.n_s1)
    else:
        counts = simulate_counts(spec, opts)
    outpath = args.out or 'simulated.csv'
    write_counts(counts, outpath)
    sidecar = {'observer': spec.to_dict(), 'options': opts.to_dict(), 'seed': args.seed, 'expected': args.expected}
    command.write_json(sidecar, sidecar_path(outpath))
    log.info('simulated %s trials (h=%s) to %s'%(counts.total, counts.h, outpath))
    command.emit(args, dict(sidecar, out=outpath, counts=counts.counts), 'Wrote %s' % outpath)
    return command.EXIT_OK


def main(argv=None, prog=None):
    parser = argparse.ArgumentParser(prog=prog, description='Simulate confidence-rating counts from an SDT observer.')
    add_arguments(parser)
    return command.execute(parser, run, argv)

if __name__ == '__main__':
    sys.exit(main())
