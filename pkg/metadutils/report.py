"""Plot-ready summary tables over fit reports and trial logs."""
from __future__ import absolute_import, unicode_literals
import collections
import csv
import glob
import json
import math
import os

from . import log
from . import sdt
from . import stats
from .counts import RatingCounts, Type1Counts
from .errors import DomainError, MetadError, ReportError
from .harness import load_trials, tally, validity_report

FIT_SUFFIX = '.fit.json'
TRIAL_SUFFIX = '.jsonl'
RISK_ORDER = {'S1': 0, 'None': 1, 'S2': 2}
Z95 = sdt.z(0.975)

TABLE_COLUMNS = [
    'source', 'model_id', 'task', 'risk', 'mode', 'n_s1', 'n_s2',
    'd_prime', 'd_prime_low', 'd_prime_high',
    'c', 'c_low', 'c_high',
    'c_prime', 'c_prime_low', 'c_prime_high',
    'meta_d', 'meta_d_low', 'meta_d_high',
    'm_ratio', 'm_ratio_low', 'm_ratio_high',
]
ACCURACY_COLUMNS = ['source', 'model_id', 'task', 'risk', 'confidence', 'n', 'n_correct', 'accuracy']
OUTCOME_COLUMNS = ['source', 'model_id', 'task', 'risk', 'outcome', 'confidence', 'n', 'proportion']
CRITERION_COLUMNS = ['model_id', 'task', 'risk', 'c', 'c_low', 'c_high', 'c_prime', 'c_prime_low', 'c_prime_high', 'source']
VALIDITY_COLUMNS = ['source', 'model_id', 'task', 'risk', 'mode', 'attempted', 'valid', 'invalid']

SCHEMAS = collections.OrderedDict([
    ('table.csv', TABLE_COLUMNS),
    ('accuracy_by_confidence.csv', ACCURACY_COLUMNS),
    ('confidence_given_outcome.csv', OUTCOME_COLUMNS),
    ('criterion_by_risk.csv', CRITERION_COLUMNS),
    ('validity.csv', VALIDITY_COLUMNS),
])
# columns that must parse as numbers whenever they are not empty
NUMERIC = set(TABLE_COLUMNS[5:] + ['confidence', 'n', 'n_correct', 'accuracy', 'proportion',
    'attempted', 'valid', 'invalid'])


def type1_report(type1_stats, meta=None):
    """Report dict for type-1-only counts, readable by build_bundle."""
    d = dict(type1_stats._asdict())
    d['type1_only'] = True
    if meta:
        d['meta'] = dict(meta)
    return d


def accuracy_by_confidence(counts):
    """P(correct | confidence = k); levels without observations are left out."""
    counts = counts if isinstance(counts, RatingCounts) else RatingCounts(counts)
    c = counts.counts
    rows = []
    for k in range(counts.h):
        n = c[:, :, k].sum()
        if n == 0:
            continue
        correct = c[0, 0, k] + c[1, 1, k]
        rows.append({'confidence': k + 1, 'n': n, 'n_correct': correct, 'accuracy': correct / n})
    return rows


def confidence_given_outcome(counts):
    """P(confidence = k | correct) and P(confidence = k | incorrect)."""
    counts = counts if isinstance(counts, RatingCounts) else RatingCounts(counts)
    c = counts.counts
    by_outcome = [
        ('correct', c[0, 0] + c[1, 1]),
        ('incorrect', c[0, 1] + c[1, 0]),
    ]
    rows = []
    for outcome, dist in by_outcome:
        total = dist.sum()
        if total == 0:
            continue
        for k in range(counts.h):
            rows.append({'outcome': outcome, 'confidence': k + 1, 'n': dist[k], 'proportion': dist[k] / total})
    return rows


def _interval(value, variance):
    if value is None or variance is None:
        return None, None
    half = Z95 * math.sqrt(variance)
    return value - half, value + half


def type1_columns(hr, far, n_s1, n_s2):
    """d', c, c' with 95% Delta-method intervals."""
    d = sdt.d_prime(hr, far)
    c = sdt.criterion_c(hr, far)
    row = {'n_s1': n_s1, 'n_s2': n_s2, 'd_prime': d, 'c': c, 'c_prime': None}
    row['d_prime_low'], row['d_prime_high'] = _interval(d, stats.delta_var_dprime(hr, far, n_s1, n_s2))
    row['c_low'], row['c_high'] = _interval(c, stats.delta_var_c(hr, far, n_s1, n_s2))
    if d != 0:
        row['c_prime'] = c / d
        row['c_prime_low'], row['c_prime_high'] = _interval(row['c_prime'], stats.delta_var_c_prime(hr, far, n_s1, n_s2))
    return row


def _meta_columns(meta):
    return {
        'model_id': meta.get('model_id'),
        'task': meta.get('task'),
        'risk': meta.get('risk'),
        'mode': meta.get('mode'),
    }


def _fit_row(path, d):
    row = {'source': path}
    row.update(_meta_columns(d.get('meta') or {}))
    row.update(type1_columns(d['hr'], d['far'], d['n_s1'], d['n_s2']))
    # point estimates come from the report itself
    row['d_prime'] = d['d_prime']
    row['c'] = d['c']
    row['c_prime'] = d.get('c_prime')
    if not d.get('type1_only'):
        row['meta_d'] = d['meta_d']
        row['m_ratio'] = d.get('m_ratio')
        for statistic, ci in (d.get('ci') or {}).items():
            if statistic in ('meta_d', 'm_ratio') and not ci.get('difference'):
                row['%s_low' % statistic] = ci['low']
                row['%s_high' % statistic] = ci['high']
    return row


class ReportBundle(object):
    def __init__(self):
        self.table = []
        self.accuracy = []
        self.outcome = []
        self.criterion = []
        self.validity = []

    def add_series(self, base, counts):
        for r in accuracy_by_confidence(counts):
            r.update(base)
            self.accuracy.append(r)
        for r in confidence_given_outcome(counts):
            r.update(base)
            self.outcome.append(r)

    def finish(self):
        for row in self.table:
            if row.get('c') is None:
                continue
            self.criterion.append(dict((k, row.get(k)) for k in CRITERION_COLUMNS))
        self.criterion.sort(key=lambda r: (str(r['model_id']), str(r['task']), RISK_ORDER.get(r['risk'], 3)))
        return self

    def tables(self):
        return collections.OrderedDict([
            ('table.csv', self.table),
            ('accuracy_by_confidence.csv', self.accuracy),
            ('confidence_given_outcome.csv', self.outcome),
            ('criterion_by_risk.csv', self.criterion),
            ('validity.csv', self.validity),
        ])

    def to_dict(self):
        return dict((name[:-4], rows) for name, rows in self.tables().items())


def _read_fit(path):
    try:
        with open(path) as f:
            d = json.load(f)
    except ValueError as e:
        raise ReportError('%s: invalid JSON: %s' % (path, e))
    for key in ('hr', 'far', 'n_s1', 'n_s2', 'd_prime', 'c'):
        if key not in d:
            raise ReportError('%s: not a fit report (missing %r)' % (path, key))
    return d


def build_bundle(run_dirs):
    """Collect *.fit.json reports and *.jsonl trial logs from run_dirs."""
    fits = []
    logs = []
    for d in run_dirs:
        if not os.path.isdir(d):
            raise ReportError('not a directory: %s' % d)
        fits.extend(sorted(glob.glob(os.path.join(d, '*' + FIT_SUFFIX))))
        logs.extend(sorted(glob.glob(os.path.join(d, '*' + TRIAL_SUFFIX))))
    if not fits and not logs:
        raise ReportError('no fit reports or trial logs in %s' % ', '.join(run_dirs))
    bundle = ReportBundle()
    fitted_sources = set()
    for path in fits:
        d = _read_fit(path)
        row = _fit_row(path, d)
        bundle.table.append(row)
        source = (d.get('meta') or {}).get('source')
        if source:
            fitted_sources.add(os.path.abspath(source))
        if d.get('counts') is not None:
            base = dict((k, row[k]) for k in ('source', 'model_id', 'task', 'risk'))
            bundle.add_series(base, RatingCounts(d['counts']))
    for path in logs:
        try:
            header, records = load_trials(path)
        except MetadError as e:
            raise ReportError(str(e))
        meta = {'model_id': header.get('model_id'), 'task': header.get('task'),
                'risk': header.get('risk'), 'mode': header.get('mode')}
        v = validity_report(records)
        row = {'source': path}
        row.update(meta)
        row.update(dict((k, v[k]) for k in ('attempted', 'valid', 'invalid')))
        bundle.validity.append(row)
        if os.path.abspath(path) in fitted_sources:
            continue
        try:
            counts = tally(records)
        except MetadError as e:
            log.warning('%s: %s'%(path, e))
            continue
        type1 = counts if isinstance(counts, Type1Counts) else counts.type1()
        try:
            hr, far = sdt.type1_rates(type1)
            row = {'source': path}
            row.update(meta)
            row.update(type1_columns(hr, far, type1.n_s1, type1.n_s2))
            bundle.table.append(row)
        except DomainError as e:
            log.warning('%s: %s'%(path, e))
        if isinstance(counts, RatingCounts):
            bundle.add_series({'source': path, 'model_id': meta['model_id'], 'task': meta['task'],
                'risk': meta['risk']}, counts)
    log.info('report: %s table rows from %s fit reports and %s trial logs'%(len(bundle.table), len(fits), len(logs)))
    return bundle.finish()


def _cell(v):
    if v is None:
        return ''
    if isinstance(v, float):
        if not math.isfinite(v):
            return ''
        if v.is_integer() and abs(v) < 1e15:
            return '%d' % v
        return repr(float(v))
    return v


def write_csv(path, columns, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])


def validate_csv(path, columns):
    """Check a written table against its column schema."""
    with open(path, newline='') as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != columns:
            raise ReportError('%s: header %s does not match %s' % (path, reader.fieldnames, columns))
        for row in reader:
            for k in columns:
                v = row[k]
                if k in NUMERIC and v != '':
                    try:
                        float(v)
                    except ValueError:
                        raise ReportError('%s:%s: %s is not a number: %r' % (path, reader.line_num, k, v))
            if row.get('accuracy') and not 0.0 <= float(row['accuracy']) <= 1.0:
                raise ReportError('%s:%s: accuracy outside [0, 1]' % (path, reader.line_num))


def write_bundle(bundle, outdir):
    if not os.path.exists(outdir):
        os.makedirs(outdir)
    paths = []
    for name, rows in bundle.tables().items():
        path = os.path.join(outdir, name)
        write_csv(path, SCHEMAS[name], rows)
        validate_csv(path, SCHEMAS[name])
        paths.append(path)
    path = os.path.join(outdir, 'bundle.json')
    with open(path, 'w') as f:
        json.dump(bundle_json(bundle), f, indent=2, sort_keys=True)
    paths.append(path)
    return paths


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, 'item'):
        return v.item()
    return v


def bundle_json(bundle):
    return dict((name, [dict((k, _clean(v)) for k, v in row.items()) for row in rows])
        for name, rows in bundle.to_dict().items())
