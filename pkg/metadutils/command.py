"""Shared plumbing for the command modules: common flags, output, exit codes."""
from __future__ import absolute_import, unicode_literals, print_function
import json
import math

import numpy as np

from . import config
from . import log
from .errors import ConfigError, CountsError, MetadError, ParseError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CONVERGENCE = 3
EXIT_PARSE = 4


def add_common_arguments(parser, seed=True, out=True):
    parser.add_argument('--config', help='JSON or TOML file supplying defaults for these flags')
    if seed:
        parser.add_argument('--seed', help='Random seed', type=int)
    if out:
        parser.add_argument('--out', help='Output path')
    parser.add_argument('--json', help='Write a machine-readable JSON document to stdout', action='store_true')
    parser.add_argument('--verbose', help='Verbose output', action='store_true')
    parser.add_argument('--quiet', help='Only log errors', action='store_true')


def float_list(value):
    try:
        return [float(i) for i in value.split(',') if i.strip()]
    except ValueError:
        raise ValueError('expected comma-separated numbers: %r' % value)


def int_list(value):
    return [int(i) for i in value.split(',') if i.strip()]


def jsonable(v):
    if isinstance(v, dict):
        return dict((k, jsonable(i)) for k, i in v.items())
    if isinstance(v, (list, tuple)):
        return [jsonable(i) for i in v]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_json(doc, path):
    with open(path, 'w') as f:
        json.dump(jsonable(doc), f, indent=2, sort_keys=True)
        f.write('\n')


def emit(args, doc, text=None):
    """--json prints doc; otherwise the human-readable text, if any."""
    if args.json:
        print(json.dumps(jsonable(doc), sort_keys=True))
    elif text:
        print(text)


def execute(parser, run, argv=None):
    """Parse flags (defaults < --config < flags), run, and map failures to exit codes."""
    try:
        args = config.parse_args(parser, argv)
    except ConfigError as e:
        log.error(str(e))
        return EXIT_PARSE
    log.configure(verbose=args.verbose, quiet=args.quiet)
    try:
        return run(args)
    except (ParseError, CountsError, ConfigError) as e:
        log.error(str(e))
        return EXIT_PARSE
    except (MetadError, IOError) as e:
        log.error(str(e))
        return EXIT_ERROR
