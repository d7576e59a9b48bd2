from __future__ import absolute_import, unicode_literals
import json
import math
import os
import tempfile
import threading
import unittest

import numpy as np

from metadutils import harness
from metadutils import prompts
from metadutils.client import Completion, utcnow
from metadutils.config import RunConfig
from metadutils.counts import RatingCounts, Type1Counts
from metadutils.errors import ConfigError, InvalidRateError, ParseError, TallyError
from metadutils.metad import MetaDParams, fit_meta_d, type2_probs

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SILVER = math.sqrt(2.0) - 1.0


class FakeClient(object):
    """Answers every prompt with reply(text, label); text is the prompt's last line."""
    def __init__(self, reply, labels=None):
        self.reply = reply
        self.labels = labels or {}
        self.prompts = []
        self.lock = threading.Lock()

    def complete(self, prompt):
        with self.lock:
            self.prompts.append(prompt)
        text = prompt.split('\n')[-1]
        raw = self.reply(text, self.labels.get(text))
        if raw is None:
            attempts = [{'attempt': 1, 'outcome': 'connection_error', 'detail': 'refused'}]
            return Completion(None, None, attempts, 0.01, utcnow(), 'retries exhausted')
        return Completion(raw, 200, [{'attempt': 1, 'outcome': 'ok', 'status': 200}], 0.01, utcnow(), None)


class WeylObserver(object):
    """Deterministic SDT observer driven by two low-discrepancy sequences."""
    def __init__(self, d_prime=2.0, meta_d=1.6):
        self.mu = 0.5 * d_prime
        self.probs = type2_probs(MetaDParams(meta_d, 0.0, [-1.5, -1.0, -0.6, -0.3], [0.3, 0.6, 1.0, 1.5])).p
        self.cdf = np.cumsum(self.probs, axis=2)

    def __call__(self, text, label):
        k = int(text.split()[-1])
        s = label
        u1 = (k * GOLDEN) % 1.0
        u2 = (k * SILVER) % 1.0
        p_s2 = 1.0 - 0.5 * math.erfc((self.mu if s else -self.mu) / math.sqrt(2.0))
        r = int(u1 < p_s2)
        conf = int(np.searchsorted(self.cdf[s, r], u2 * self.cdf[s, r, -1])) + 1
        return json.dumps({'decision': r, 'confidence': min(conf, 5)})


def always(raw):
    return lambda text, label: raw


def echo_label(text, label):
    return json.dumps({'decision': label, 'confidence': 4})


def write_dataset(n):
    d = tempfile.mkdtemp()
    path = os.path.join(d, 'items.tsv')
    labels = {}
    with open(path, 'w') as f:
        f.write('sentence\tlabel\n')
        for k in range(n):
            text = 'item %s' % k
            labels[text] = k % 2
            f.write('%s\t%s\n' % (text, k % 2))
    return d, path, labels


def make_config(d, path, **kwargs):
    values = {
        'endpoint_url': 'http://localhost/v1/chat/completions',
        'model_id': 'fake-model',
        'task': 'A',
        'dataset_path': path,
        'out': os.path.join(d, 'run', 'trials.jsonl'),
        'concurrency': 2,
    }
    values.update(kwargs)
    return RunConfig(**values)


class TestParseResponse(unittest.TestCase):
    def test_valid(self):
        r = harness.parse_response('{"decision": 1, "confidence": 4}')
        self.assertEqual((int(r.decision), r.confidence, r.reason), (1, 4, None))
        r = harness.parse_response('```json\n{"decision": "0", "confidence": 2.0}\n```')
        self.assertEqual((int(r.decision), r.confidence), (0, 2))
        r = harness.parse_response('{"decision": 0}', prompts.TYPE1_ONLY)
        self.assertIsNone(r.confidence)

    def test_reason_codes(self):
        cases = [
            ('', harness.EMPTY),
            (None, harness.EMPTY),
            ('positive', harness.NOT_JSON),
            ('[1, 3]', harness.NOT_OBJECT),
            ('{"confidence": 3}', harness.MISSING_DECISION),
            ('{"decision": true, "confidence": 3}', harness.BAD_DECISION),
            ('{"decision": 0.5, "confidence": 3}', harness.BAD_DECISION),
            ('{"decision": 2, "confidence": 3}', harness.OUT_OF_RANGE),
            ('{"decision": 1}', harness.MISSING_CONFIDENCE),
            ('{"decision": 1, "confidence": "high"}', harness.BAD_CONFIDENCE),
            ('{"decision": 1, "confidence": 6}', harness.OUT_OF_RANGE),
            ('{"decision": 1, "confidence": 0}', harness.OUT_OF_RANGE),
            ('{"decision": 1, "confidence": 3, "reason": "sure"}', harness.UNEXPECTED_KEYS),
        ]
        for raw, reason in cases:
            r = harness.parse_response(raw)
            self.assertEqual(r.reason, reason, raw)
            self.assertIsNone(r.decision)

    def test_type1_only_rejects_confidence(self):
        r = harness.parse_response('{"decision": 1, "confidence": 3}', prompts.TYPE1_ONLY)
        self.assertEqual(r.reason, harness.UNEXPECTED_KEYS)


class TestRunExperiment(unittest.TestCase):
    def test_echo_run(self):
        d, path, labels = write_dataset(20)
        client = FakeClient(echo_label, labels)
        out = harness.run_experiment(make_config(d, path, risk='S1', seed=5), client)
        header, records = harness.load_trials(out)
        self.assertEqual(header['schema_version'], harness.SCHEMA_VERSION)
        self.assertEqual(header['task'], 'A_sentiment')
        self.assertEqual(header['risk'], 'S1')
        self.assertEqual(header['seed'], 5)
        self.assertEqual(header['template_sha'], prompts.template_sha('A'))
        self.assertEqual(header['label_mapping'], {'negative=0': 'S1', 'positive=1': 'S2'})
        self.assertEqual(len(records), 20)
        self.assertEqual(sorted(r.trial_id for r in records), list(range(20)))
        self.assertTrue(all(r.valid and r.decision == r.true_label for r in records))
        self.assertEqual(len(client.prompts), 20)
        self.assertTrue(all('Risk: answering 0' in p for p in client.prompts))
        counts = harness.tally(records)
        self.assertEqual(counts.type1(), Type1Counts(10, 0, 0, 10))
        self.assertEqual(counts.counts[0, 0, 3], 10)

    def test_n_trials_limits_plan(self):
        d, path, labels = write_dataset(20)
        out = harness.run_experiment(make_config(d, path, n_trials=7), FakeClient(echo_label, labels))
        _, records = harness.load_trials(out)
        self.assertEqual(sorted(r.trial_id for r in records), list(range(7)))

    def test_malformed_replies_are_recorded(self):
        d, path, labels = write_dataset(40)
        reply = lambda text, label: 'I think it is positive' if text == 'item 3' else echo_label(text, label)
        out = harness.run_experiment(make_config(d, path), FakeClient(reply, labels))
        _, records = harness.load_trials(out)
        bad = [r for r in records if not r.valid]
        self.assertEqual(len(bad), 1)
        self.assertEqual(bad[0].raw_response, 'I think it is positive')
        self.assertEqual(bad[0].reason, harness.NOT_JSON)
        self.assertEqual(harness.validity_report(records)['invalid_ids'], [3])
        self.assertEqual(harness.tally(records).total, 39)

    def test_invalid_ceiling_aborts(self):
        d, path, labels = write_dataset(20)
        cfg = make_config(d, path, concurrency=1)
        with self.assertRaises(InvalidRateError):
            harness.run_experiment(cfg, FakeClient(always('no idea'), labels))
        _, records = harness.load_trials(cfg.out)
        # ceiling is 5% of 20 planned trials; the second invalid reply stops the run
        self.assertEqual(len(records), 2)

    def test_transport_failures(self):
        d, path, labels = write_dataset(20)
        cfg = make_config(d, path, invalid_ceiling=1.0)
        harness.run_experiment(cfg, FakeClient(always(None), labels))
        _, records = harness.load_trials(cfg.out)
        self.assertTrue(all(r.reason == harness.TRANSPORT_ERROR for r in records))
        self.assertTrue(all(r.raw_response is None for r in records))
        with self.assertRaises(TallyError):
            harness.tally(records)

    def test_resume(self):
        d, path, labels = write_dataset(10)
        harness.run_experiment(make_config(d, path, n_trials=4), FakeClient(echo_label, labels))
        client = FakeClient(echo_label, labels)
        out = harness.run_experiment(make_config(d, path), client)
        self.assertEqual(len(client.prompts), 6)
        _, records = harness.load_trials(out)
        self.assertEqual(sorted(r.trial_id for r in records), list(range(10)))

    def test_resume_after_truncated_line(self):
        d, path, labels = write_dataset(10)
        cfg = make_config(d, path, n_trials=5)
        harness.run_experiment(cfg, FakeClient(echo_label, labels))
        with open(cfg.out, 'a') as f:
            f.write('{"trial_id": 5, "task": "A_sent')
        header, records = harness.load_trials(cfg.out)
        self.assertEqual(len(records), 5)
        client = FakeClient(echo_label, labels)
        harness.run_experiment(make_config(d, path), client)
        self.assertEqual(len(client.prompts), 5)
        _, records = harness.load_trials(cfg.out)
        self.assertEqual(sorted(r.trial_id for r in records), list(range(10)))

    def test_resume_rejects_other_model(self):
        d, path, labels = write_dataset(10)
        harness.run_experiment(make_config(d, path, n_trials=3), FakeClient(echo_label, labels))
        with self.assertRaises(ConfigError):
            harness.run_experiment(make_config(d, path, model_id='other-model'), FakeClient(echo_label, labels))

    def test_type1_only_run(self):
        d, path, labels = write_dataset(20)
        reply = lambda text, label: json.dumps({'decision': label})
        client = FakeClient(reply, labels)
        out = harness.run_experiment(make_config(d, path, mode=prompts.TYPE1_ONLY), client)
        _, records = harness.load_trials(out)
        self.assertTrue(all(r.confidence is None for r in records))
        self.assertEqual(harness.tally(records), Type1Counts(10, 0, 0, 10))
        self.assertTrue(all('confidence' not in p for p in client.prompts))

    def test_simulated_observer_pipeline(self):
        d, path, labels = write_dataset(2000)
        out = harness.run_experiment(make_config(d, path, concurrency=4), FakeClient(WeylObserver(), labels))
        _, records = harness.load_trials(out)
        self.assertEqual(len(records), 2000)
        counts = harness.tally(records)
        self.assertIsInstance(counts, RatingCounts)
        fit = fit_meta_d(counts)
        self.assertTrue(fit.converged)
        self.assertAlmostEqual(fit.d_prime_type1, 2.0, delta=0.15)
        self.assertAlmostEqual(fit.params.meta_d, 1.6, delta=0.3)


class TestTrialLog(unittest.TestCase):
    def write(self, lines):
        path = os.path.join(tempfile.mkdtemp(), 'log.jsonl')
        with open(path, 'w') as f:
            f.write('\n'.join(lines) + '\n')
        return path

    def test_header_required(self):
        path = self.write([json.dumps({'trial_id': 0})])
        with self.assertRaises(ParseError):
            harness.load_trials(path)

    def test_schema_version(self):
        path = self.write([json.dumps({'type': 'header', 'schema_version': 99})])
        with self.assertRaises(ParseError):
            harness.load_trials(path)

    def test_corrupt_middle_line(self):
        header = json.dumps({'type': 'header', 'schema_version': harness.SCHEMA_VERSION})
        path = self.write([header, '{not json', '{}'])
        with self.assertRaises(ParseError) as cm:
            harness.load_trials(path)
        self.assertEqual(cm.exception.lineno, 2)

    def test_missing(self):
        with self.assertRaises(ParseError):
            harness.load_trials('/nonexistent/log.jsonl')


class TestTally(unittest.TestCase):
    def record(self, trial_id, true_label, decision, confidence, mode=prompts.WITH_CONFIDENCE, model_id='m'):
        return harness.TrialRecord(trial_id, 'A_sentiment', 'None', mode, 'text', true_label, '{}', decision,
            confidence, decision is not None, None if decision is not None else harness.NOT_JSON, model_id,
            utcnow(), 0.1, 1, [])

    def test_counts(self):
        records = [
            self.record(0, 'S1', 'S1', 5),
            self.record(1, 'S1', 'S2', 2),
            self.record(2, 'S2', 'S2', 3),
            self.record(3, 'S2', None, None),
        ]
        counts = harness.tally(records)
        self.assertEqual(counts.h, 5)
        self.assertEqual(counts.counts[0, 0, 4], 1)
        self.assertEqual(counts.counts[0, 1, 1], 1)
        self.assertEqual(counts.counts[1, 1, 2], 1)
        self.assertEqual(counts.total, 3)

    def test_empty(self):
        with self.assertRaises(TallyError):
            harness.tally([])

    def test_mixed_runs(self):
        with self.assertRaises(TallyError):
            harness.tally([self.record(0, 'S1', 'S1', 5), self.record(1, 'S1', 'S1', 5, model_id='other')])

    def test_record_round_trip(self):
        r = self.record(0, 'S1', 'S2', 2)
        d = harness.record_to_dict(r)
        self.assertEqual(d['type'], 'trial')
        self.assertEqual(harness.record_from_dict(json.loads(json.dumps(d))), r)
