"""Experiment runs against a chat-completions endpoint.

A run renders one prompt per dataset item, sends each as a fresh
single-message conversation, and appends one JSON line per trial to the
trial log. The first line of the log is a header describing the run.
"""
from __future__ import absolute_import, unicode_literals
import collections
import json
import os
import re
from concurrent.futures import ThreadPoolExecutor, FIRST_COMPLETED, wait

import numpy as np

from . import __version__
from . import log
from . import prompts
from . import tasks
from .client import ChatClient, utcnow
from .counts import RatingCounts, StimulusClass, Type1Counts
from .errors import ConfigError, InvalidRateError, ParseError, TallyError

SCHEMA_VERSION = 1
CONFIDENCE_LEVELS = 5

# reason codes for replies that do not follow the JSON protocol
EMPTY = 'empty'
NOT_JSON = 'not_json'
NOT_OBJECT = 'not_object'
MISSING_DECISION = 'missing_decision'
BAD_DECISION = 'bad_decision'
MISSING_CONFIDENCE = 'missing_confidence'
BAD_CONFIDENCE = 'bad_confidence'
OUT_OF_RANGE = 'out_of_range'
UNEXPECTED_KEYS = 'unexpected_keys'
TRANSPORT_ERROR = 'transport_error'

# header keys that must match for a run to be resumed
RESUME_KEYS = ('task', 'risk', 'mode', 'model_id', 'dataset_path', 'seed', 'target_word', 'p_delete', 'template_sha')

_FENCE = re.compile(r'^```[A-Za-z]*\s*(.*?)\s*```$', re.S)

ParsedResponse = collections.namedtuple('ParsedResponse', ['decision', 'confidence', 'reason'])

TrialRecord = collections.namedtuple('TrialRecord', [
    'trial_id', 'task', 'risk', 'mode', 'input_text', 'true_label', 'raw_response', 'decision', 'confidence',
    'valid', 'reason', 'model_id', 'request_timestamp', 'latency', 'attempt_count', 'attempts'])


def _as_int(v):
    if isinstance(v, bool):
        raise ValueError('boolean')
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if v.is_integer():
            return int(v)
        raise ValueError('not an integer')
    if isinstance(v, str):
        s = v.strip()
        try:
            return int(s)
        except ValueError:
            return _as_int(float(s))
    raise ValueError('not a number')


def _invalid(reason):
    return ParsedResponse(None, None, reason)


def parse_response(raw, mode=prompts.WITH_CONFIDENCE):
    """Parse a reply into (decision, confidence); invalid replies carry a reason code."""
    if raw is None or not raw.strip():
        return _invalid(EMPTY)
    s = raw.strip()
    m = _FENCE.match(s)
    if m:
        s = m.group(1)
    try:
        obj = json.loads(s)
    except ValueError:
        return _invalid(NOT_JSON)
    if not isinstance(obj, dict):
        return _invalid(NOT_OBJECT)
    expected = set(['decision'])
    if mode == prompts.WITH_CONFIDENCE:
        expected.add('confidence')
    if set(obj) - expected:
        return _invalid(UNEXPECTED_KEYS)
    if 'decision' not in obj:
        return _invalid(MISSING_DECISION)
    try:
        decision = _as_int(obj['decision'])
    except ValueError:
        return _invalid(BAD_DECISION)
    if decision not in (0, 1):
        return _invalid(OUT_OF_RANGE)
    confidence = None
    if mode == prompts.WITH_CONFIDENCE:
        if 'confidence' not in obj:
            return _invalid(MISSING_CONFIDENCE)
        try:
            confidence = _as_int(obj['confidence'])
        except ValueError:
            return _invalid(BAD_CONFIDENCE)
        if not 1 <= confidence <= CONFIDENCE_LEVELS:
            return _invalid(OUT_OF_RANGE)
    return ParsedResponse(StimulusClass(decision), confidence, None)


def record_to_dict(record):
    d = record._asdict()
    d['type'] = 'trial'
    return d


def record_from_dict(d):
    d = dict(d)
    d.pop('type', None)
    return TrialRecord(**d)


def validity_report(records):
    reasons = collections.Counter(r.reason for r in records if not r.valid)
    invalid_ids = [r.trial_id for r in records if not r.valid]
    return {
        'attempted': len(records),
        'valid': len(records) - len(invalid_ids),
        'invalid': len(invalid_ids),
        'reasons': dict(reasons),
        'invalid_ids': invalid_ids,
    }


def load_trials(path):
    """Read a trial log: (header, records).

    A truncated final line left by an interrupted run is skipped.
    """
    if not os.path.exists(path):
        raise ParseError('file does not exist', path=path)
    header = None
    records = []
    with open(path, encoding='utf-8') as f:
        lines = f.read().split('\n')
    # a complete log ends with a newline, so the last element is ''
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except ValueError:
            if lineno == len(lines):
                log.warning('%s:%s: skipping truncated final line'%(path, lineno))
                continue
            raise ParseError('invalid JSON', path=path, lineno=lineno)
        if lineno == 1:
            if d.get('type') != 'header':
                raise ParseError('first line must be the run header', path=path, lineno=1)
            if d.get('schema_version') != SCHEMA_VERSION:
                raise ParseError('unsupported schema version %r' % d.get('schema_version'), path=path, lineno=1)
            header = d
            continue
        try:
            records.append(record_from_dict(d))
        except TypeError as e:
            raise ParseError('malformed trial record: %s' % e, path=path, lineno=lineno)
    if header is None:
        raise ParseError('empty trial log', path=path)
    return header, records


def _repair_tail(path):
    """Cut a trailing partial line; returns True if anything was removed."""
    with open(path, 'rb+') as f:
        data = f.read()
        if not data or data.endswith(b'\n'):
            return False
        keep = data.rfind(b'\n') + 1
        f.seek(keep)
        f.truncate()
    log.warning('%s: removed truncated final line'%path)
    return True


def tally(records):
    """RatingCounts (or Type1Counts for type1_only runs) over valid records."""
    records = list(records)
    if not records:
        raise TallyError('empty tally')
    keys = set((r.task, r.risk, r.mode, r.model_id) for r in records)
    if len(keys) > 1:
        raise TallyError('records from different runs: %s' % sorted(keys))
    valid = [r for r in records if r.valid]
    if not valid:
        raise TallyError('empty tally')
    mode = records[0].mode
    if mode == prompts.TYPE1_ONLY:
        arr = np.zeros((2, 2))
        for r in valid:
            arr[StimulusClass[r.true_label], StimulusClass[r.decision]] += 1
        return Type1Counts.from_array(arr)
    arr = np.zeros((2, 2, CONFIDENCE_LEVELS))
    for r in valid:
        arr[StimulusClass[r.true_label], StimulusClass[r.decision], r.confidence - 1] += 1
    return RatingCounts(arr)


def run_header(config, template_sha):
    spec = config.task_spec()
    d = {
        'type': 'header',
        'schema_version': SCHEMA_VERSION,
        'metadutils_version': __version__,
        'created': utcnow(),
        'template_sha': template_sha,
    }
    d.update(spec.metadata())
    d.update(dict((k, v) for k, v in config.to_dict().items() if k not in ('out', 'task')))
    return d


def _check_resume(header, expected, path):
    diff = [k for k in RESUME_KEYS if header.get(k) != expected.get(k)]
    if diff:
        raise ConfigError('%s was written by a different run configuration (%s); use a new output path' % (
            path, ', '.join(diff)))


class Trial(object):
    def __init__(self, trial_id, text, label):
        self.trial_id = trial_id
        self.text = text
        self.label = label


def run_trial(client, config, trial):
    prompt = prompts.render_prompt(config.task, config.risk, config.mode, trial.text,
        template_dir=config.template_dir, target_word=config.target_word)
    completion = client.complete(prompt)
    if completion.text is None:
        parsed = _invalid(TRANSPORT_ERROR)
    else:
        parsed = parse_response(completion.text, config.mode)
    return TrialRecord(
        trial_id=trial.trial_id,
        task=config.task,
        risk=config.risk,
        mode=config.mode,
        input_text=trial.text,
        true_label=trial.label.name,
        raw_response=completion.text,
        decision=parsed.decision.name if parsed.decision is not None else None,
        confidence=parsed.confidence,
        valid=parsed.reason is None,
        reason=parsed.reason,
        model_id=config.model_id,
        request_timestamp=completion.request_timestamp,
        latency=completion.latency,
        attempt_count=len(completion.attempts),
        attempts=completion.attempts,
    )


def plan_trials(config):
    items = tasks.task_items(config.task_spec(), config.target_word, config.p_delete, config.seed)
    n = len(items) if config.n_trials is None else int(config.n_trials)
    if n > len(items):
        log.warning('requested %s trials but only %s items are available'%(n, len(items)))
        n = len(items)
    return [Trial(i, text, label) for i, (text, label) in enumerate(items[:n])]


def make_client(config):
    return ChatClient(config.endpoint_url, config.model_id, api_key_env=config.api_key_env,
        timeout=config.timeout, retry_max=config.retry['max'], backoff_ms=config.retry['backoff_ms'],
        params=config.params, rate_limit=config.rate_limit)


def run_experiment(config, client=None):
    """Run (or resume) a trial log at config.out; returns its path."""
    config.validate()
    path = config.out
    trials = plan_trials(config)
    planned = len(trials)
    header = run_header(config, prompts.template_sha(config.task, config.template_dir))
    done = []
    if os.path.exists(path) and os.path.getsize(path):
        _repair_tail(path)
        old_header, done = load_trials(path)
        _check_resume(old_header, header, path)
        log.info('resuming %s: %s of %s trials already recorded'%(path, len(done), planned))
    else:
        d = os.path.dirname(path)
        if d and not os.path.exists(d):
            os.makedirs(d)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(json.dumps(header) + '\n')
    seen = set(r.trial_id for r in done)
    todo = [t for t in trials if t.trial_id not in seen]
    invalid = sum(1 for r in done if not r.valid)
    ceiling = float(config.invalid_ceiling) * planned
    if todo:
        client = client or make_client(config)
    written = len(done)
    step = max(1, planned // 20)
    pending = set()
    todo = iter(todo)
    workers = int(config.concurrency)
    with ThreadPoolExecutor(max_workers=workers) as ex, open(path, 'a', encoding='utf-8') as f:
        def submit():
            trial = next(todo, None)
            if trial is not None:
                pending.add(ex.submit(run_trial, client, config, trial))
        for _ in range(2 * workers):
            submit()
        try:
            while pending:
                finished, _ = wait(pending, return_when=FIRST_COMPLETED)
                for fut in finished:
                    pending.discard(fut)
                    record = fut.result()
                    f.write(json.dumps(record_to_dict(record)) + '\n')
                    f.flush()
                    written += 1
                    if not record.valid:
                        invalid += 1
                        log.debug('trial %s invalid: %s'%(record.trial_id, record.reason))
                    if written % step == 0:
                        log.info('trial %s/%s written'%(written, planned))
                    if invalid > ceiling:
                        raise InvalidRateError('invalid replies exceed %.1f%% of %s planned trials (%s invalid)' % (
                            100 * config.invalid_ceiling, planned, invalid))
                    submit()
        finally:
            for fut in pending:
                fut.cancel()
    _, records = load_trials(path)
    report = validity_report(records)
    log.info('%s: %s attempted, %s valid, %s invalid'%(path, report['attempted'], report['valid'], report['invalid']))
    if report['attempted'] and report['invalid'] > config.invalid_ceiling * report['attempted']:
        raise InvalidRateError('invalid reply rate %.2f%% exceeds the %.1f%% ceiling' % (
            100.0 * report['invalid'] / report['attempted'], 100 * config.invalid_ceiling))
    return path
