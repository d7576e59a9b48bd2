"""Run configuration files (JSON or TOML) and flag defaults."""
from __future__ import absolute_import, unicode_literals
import copy
import json
import os
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import prompts
from . import tasks
from .client import DEFAULT_API_KEY_ENV
from .errors import ConfigError, DomainError, TemplateError

DEFAULTS = {
    'endpoint_url': None,
    'model_id': None,
    'task': None,
    'risk': 'None',
    'mode': prompts.WITH_CONFIDENCE,
    'n_trials': None,
    'concurrency': 4,
    'retry': {'max': 5, 'backoff_ms': 500},
    'invalid_ceiling': 0.05,
    'seed': 0,
    'template_dir': None,
    'dataset_path': None,
    'text_field': 'sentence',
    'label_field': 'label',
    'target_word': 'the',
    'p_delete': 0.5,
    'rate_limit': 0,
    'timeout': 60.0,
    'params': {},
    'api_key_env': DEFAULT_API_KEY_ENV,
    'out': None,
}

REQUIRED = ('endpoint_url', 'model_id', 'task', 'dataset_path', 'out')


def load_config_file(path):
    """Parse a JSON or TOML file into a dict; the format follows the extension."""
    if not os.path.exists(path):
        raise ConfigError('config file does not exist: %s' % path)
    try:
        if path.lower().endswith('.toml'):
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        else:
            with open(path) as f:
                data = json.load(f)
    except (ValueError, tomllib.TOMLDecodeError) as e:
        raise ConfigError('cannot parse %s: %s' % (path, e))
    if not isinstance(data, dict):
        raise ConfigError('%s: top level must be a table/object' % path)
    return data


def flag_defaults(data):
    """Config keys as argparse dests; nested tables flatten to parent_child."""
    out = {}
    for k, v in data.items():
        k = k.replace('-', '_')
        if isinstance(v, dict) and k != 'params':
            for sk, sv in v.items():
                out['%s_%s' % (k, sk.replace('-', '_'))] = sv
        else:
            out[k] = v
    return out


def parse_args(parser, argv=None):
    """Parse with defaults < --config file < flags."""
    args, _ = parser.parse_known_args(argv)
    path = getattr(args, 'config', None)
    if path:
        defaults = flag_defaults(load_config_file(path))
        known = set(a.dest for a in parser._actions) | set(parser._defaults)
        unknown = sorted(set(defaults) - known)
        if unknown:
            raise ConfigError('%s: unknown keys %s' % (path, ', '.join(unknown)))
        parser.set_defaults(**defaults)
    return parser.parse_args(argv)


class RunConfig(object):
    def __init__(self, **kwargs):
        unknown = sorted(set(kwargs) - set(DEFAULTS))
        if unknown:
            raise ConfigError('unknown run config keys: %s' % ', '.join(unknown))
        values = copy.deepcopy(DEFAULTS)
        for k, v in kwargs.items():
            if k == 'retry' and v is not None:
                values['retry'].update(v)
            elif v is not None:
                values[k] = v
        self.__dict__.update(values)

    @classmethod
    def from_file(cls, path, **overrides):
        data = load_config_file(path)
        data.update((k, v) for k, v in overrides.items() if v is not None)
        return cls(**data)

    def validate(self):
        missing = [k for k in REQUIRED if not getattr(self, k)]
        if missing:
            raise ConfigError('missing run config keys: %s' % ', '.join(missing))
        try:
            self.task = tasks.task_kind(self.task)
            self.risk = prompts.parse_risk(self.risk)
        except (DomainError, TemplateError) as e:
            raise ConfigError(str(e))
        if self.mode not in prompts.MODES:
            raise ConfigError('mode must be one of %s' % ', '.join(prompts.MODES))
        if self.n_trials is not None and int(self.n_trials) < 1:
            raise ConfigError('n_trials must be >= 1')
        if int(self.concurrency) < 1:
            raise ConfigError('concurrency must be >= 1')
        if not 0.0 <= float(self.invalid_ceiling) <= 1.0:
            raise ConfigError('invalid_ceiling must lie in [0, 1]')
        if not 0.0 <= float(self.p_delete) <= 1.0:
            raise ConfigError('p_delete must lie in [0, 1]')
        if int(self.retry.get('max', 0)) < 0 or float(self.retry.get('backoff_ms', 0)) < 0:
            raise ConfigError('retry limits must be non-negative')
        return self

    def task_spec(self):
        return tasks.TaskSpec(self.task, self.dataset_path, self.text_field, self.label_field)

    def to_dict(self):
        return dict((k, copy.deepcopy(getattr(self, k))) for k in DEFAULTS)
