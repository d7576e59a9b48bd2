#!/usr/bin/env python
from __future__ import absolute_import, unicode_literals
import argparse
import collections
import sys

from . import __version__
from . import metad_compare
from . import metad_fit
from . import metad_report
from . import metad_run
from . import metad_simulate
from . import metad_validate_dataset

COMMANDS = collections.OrderedDict([
    ('simulate', metad_simulate),
    ('fit', metad_fit),
    ('compare', metad_compare),
    ('run', metad_run),
    ('report', metad_report),
    ('validate-dataset', metad_validate_dataset),
])


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    parser = argparse.ArgumentParser(prog='metadutils', description="Meta-d' and SDT analysis of confidence ratings.")
    parser.add_argument('--version', action='version', version='metadutils %s' % __version__)
    parser.add_argument('command', choices=list(COMMANDS))
    parser.add_argument('args', nargs=argparse.REMAINDER, help='Arguments for the command')
    args = parser.parse_args(argv)
    return COMMANDS[args.command].main(args.args, prog='metadutils %s' % args.command)

if __name__ == '__main__':
    sys.exit(main())
