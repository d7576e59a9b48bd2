from __future__ import absolute_import, unicode_literals
import collections
import csv
import enum
import os

import numpy as np

from . import log
from .errors import CountsError, ParseError

CSV_HEADER = ['stimulus', 'response', 'confidence', 'count']


class StimulusClass(enum.IntEnum):
    # S2 is the "signal" class: correct S2 responses to S2 are hits
    S1 = 0
    S2 = 1

    @classmethod
    def parse(cls, value):
        v = str(value).strip().upper()
        if v in ('S1', '0'):
            return cls.S1
        if v in ('S2', '1'):
            return cls.S2
        raise ValueError('unknown stimulus class: %r' % (value,))


class Type1Counts(collections.namedtuple('Type1Counts', [
        'n_s1_resp_s1', 'n_s1_resp_s2', 'n_s2_resp_s1', 'n_s2_resp_s2'])):
    __slots__ = ()

    @property
    def n_s1(self):
        return self.n_s1_resp_s1 + self.n_s1_resp_s2

    @property
    def n_s2(self):
        return self.n_s2_resp_s1 + self.n_s2_resp_s2

    @property
    def total(self):
        return self.n_s1 + self.n_s2

    def as_array(self):
        return np.array([
            [self.n_s1_resp_s1, self.n_s1_resp_s2],
            [self.n_s2_resp_s1, self.n_s2_resp_s2],
        ], dtype=float)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        return cls(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    def validate(self):
        if any(v < 0 or not np.isfinite(v) for v in self):
            raise CountsError('type 1 counts must be finite and non-negative: %s' % (tuple(self),))
        if self.n_s1 < 1 or self.n_s2 < 1:
            raise CountsError('each stimulus class needs at least one trial (n_s1=%s, n_s2=%s)' % (self.n_s1, self.n_s2))
        return self


class RatingCounts(object):
    """Counts indexed by (stimulus, response, confidence - 1).

    Integer tallies and real-valued expected counts share this type.
    """
    def __init__(self, counts):
        arr = np.array(counts, dtype=float)
        if arr.ndim != 3 or arr.shape[:2] != (2, 2):
            raise CountsError('rating counts must have shape 2x2xh, got %s' % (arr.shape,))
        if arr.shape[2] < 2:
            raise CountsError('confidence scale needs at least 2 levels, got %s' % arr.shape[2])
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise CountsError('rating counts must be finite and non-negative')
        arr.setflags(write=False)
        self.counts = arr

    @property
    def h(self):
        return self.counts.shape[2]

    @property
    def n_s1(self):
        return self.counts[0].sum()

    @property
    def n_s2(self):
        return self.counts[1].sum()

    @property
    def total(self):
        return self.counts.sum()

    def is_integral(self):
        return bool(np.all(self.counts == np.round(self.counts)))

    def type1(self):
        return Type1Counts.from_array(self.counts.sum(axis=2))

    def coarsen(self, groups):
        """Merge adjacent confidence levels.

        groups is a sequence of consecutive runs of 1-based levels, e.g.
        [(1, 2), (3, 4, 5)] maps a 5-point scale onto 2 points.
        """
        flat = [c for g in groups for c in g]
        if flat != list(range(1, self.h + 1)):
            raise CountsError('groups must partition 1..%s in order: %s' % (self.h, groups))
        merged = [self.counts[:, :, [c - 1 for c in g]].sum(axis=2) for g in groups]
        return RatingCounts(np.stack(merged, axis=2))

    def to_nr(self):
        # confidence descending for "S1" responses, ascending for "S2"
        c = self.counts
        nr_s1 = np.concatenate([c[0, 0, ::-1], c[0, 1, :]])
        nr_s2 = np.concatenate([c[1, 0, ::-1], c[1, 1, :]])
        return nr_s1, nr_s2

    @classmethod
    def from_nr(cls, nr_s1, nr_s2):
        nr_s1 = np.asarray(nr_s1, dtype=float)
        nr_s2 = np.asarray(nr_s2, dtype=float)
        if nr_s1.shape != nr_s2.shape or nr_s1.ndim != 1 or len(nr_s1) % 2:
            raise CountsError('nR vectors must have equal, even length')
        h = len(nr_s1) // 2
        arr = np.empty((2, 2, h))
        for s, nr in enumerate((nr_s1, nr_s2)):
            arr[s, 0] = nr[:h][::-1]
            arr[s, 1] = nr[h:]
        return cls(arr)

    def __eq__(self, other):
        return isinstance(other, RatingCounts) and np.array_equal(self.counts, other.counts)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'RatingCounts(h=%s, n_s1=%s, n_s2=%s)' % (self.h, self.n_s1, self.n_s2)


def as_rating_counts(counts):
    if isinstance(counts, RatingCounts):
        return counts
    return RatingCounts(counts)


def _format_count(v):
    if float(v).is_integer():
        return '%d' % v
    return repr(float(v))


def write_counts(counts, path):
    if os.path.exists(path):
        log.warning("Warning: output path %s already exists."%path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        if isinstance(counts, Type1Counts):
            arr = counts.as_array()
            for s in StimulusClass:
                for r in StimulusClass:
                    writer.writerow([s.name, r.name, '', _format_count(arr[s, r])])
            return
        counts = as_rating_counts(counts)
        for s in StimulusClass:
            for r in StimulusClass:
                for k in range(counts.h):
                    writer.writerow([s.name, r.name, k + 1, _format_count(counts.counts[s, r, k])])


def load_counts(path, h=None):
    """Load a counts CSV: RatingCounts, or Type1Counts when confidence is empty."""
    if not os.path.exists(path):
        raise ParseError('file does not exist', path=path)
    rows = []
    with open(path, newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [i.strip().lower() for i in header] != CSV_HEADER:
            raise ParseError('header must be %s' % ','.join(CSV_HEADER), path=path, lineno=1)
        for row in reader:
            lineno = reader.line_num
            if not row or not any(i.strip() for i in row):
                continue
            if len(row) != 4:
                raise ParseError('4 columns required', path=path, lineno=lineno)
            try:
                s = StimulusClass.parse(row[0])
                r = StimulusClass.parse(row[1])
            except ValueError as e:
                raise ParseError(str(e), path=path, lineno=lineno)
            conf = row[2].strip()
            if conf:
                try:
                    conf = int(conf)
                except ValueError:
                    raise ParseError('confidence must be an integer: %r' % row[2], path=path, lineno=lineno)
                if conf < 1:
                    raise ParseError('confidence must be >= 1: %s' % conf, path=path, lineno=lineno)
            else:
                conf = None
            try:
                n = float(row[3])
            except ValueError:
                raise ParseError('count must be a number: %r' % row[3], path=path, lineno=lineno)
            if not np.isfinite(n) or n < 0:
                raise ParseError('count must be finite and non-negative: %r' % row[3], path=path, lineno=lineno)
            rows.append((lineno, s, r, conf, n))
    if not rows:
        raise ParseError('no count rows', path=path)
    rated = [i for i in rows if i[3] is not None]
    if rated and len(rated) != len(rows):
        lineno = [i[0] for i in rows if i[3] is None][0]
        raise ParseError('confidence missing in a rated counts file', path=path, lineno=lineno)
    if not rated:
        arr = np.zeros((2, 2))
        for _, s, r, _, n in rows:
            arr[s, r] += n
        return Type1Counts.from_array(arr)
    top = max(i[3] for i in rated)
    h = h or top
    if top > h:
        raise ParseError('confidence %s exceeds scale size %s' % (top, h), path=path)
    arr = np.zeros((2, 2, h))
    for _, s, r, conf, n in rated:
        arr[s, r, conf - 1] += n
    try:
        return RatingCounts(arr)
    except CountsError as e:
        raise ParseError(str(e), path=path)
