#!/usr/bin/env python
from __future__ import absolute_import, unicode_literals
import argparse
import sys

from . import command
from .report import build_bundle, bundle_json, write_bundle


def add_arguments(parser):
    parser.add_argument('run_dirs', help='Directories holding fit reports and trial logs', nargs='+')
    command.add_common_arguments(parser, seed=False)


def run(args):
    bundle = build_bundle(args.run_dirs)
    outdir = args.out or 'report'
    paths = write_bundle(bundle, outdir)
    command.emit(args, bundle_json(bundle), '\n'.join('Wrote %s' % p for p in paths))
    return command.EXIT_OK


def main(argv=None, prog=None):
    parser = argparse.ArgumentParser(prog=prog, description='Summary tables and plot series from fit reports and trial logs.')
    add_arguments(parser)
    return command.execute(parser, run, argv)

if __name__ == '__main__':
    sys.exit(main())
