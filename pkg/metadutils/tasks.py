"""Binary classification tasks and their datasets.

Label 0 maps to S1 and label 1 to S2 for every task.
"""
from __future__ import absolute_import, unicode_literals
import collections
import csv
import os
import re

import numpy as np

from . import log
from .counts import StimulusClass
from .errors import DatasetError, DomainError

A_SENTIMENT = 'A_sentiment'
B_ORAL_WRITTEN = 'B_oral_written'
C_WORD_DEPLETION = 'C_word_depletion'
TASK_KINDS = (A_SENTIMENT, B_ORAL_WRITTEN, C_WORD_DEPLETION)

# short names accepted on the command line
ALIASES = {'A': A_SENTIMENT, 'B': B_ORAL_WRITTEN, 'C': C_WORD_DEPLETION}

LABEL_NAMES = {
    A_SENTIMENT: ('negative', 'positive'),
    B_ORAL_WRITTEN: ('oral', 'written'),
    C_WORD_DEPLETION: ('unchanged', 'deleted'),
}

# recorded in run metadata; the source corpus does not document which class is 1
LABEL_ASSUMPTIONS = {
    B_ORAL_WRITTEN: 'written source is label 1 (S2), oral transcription is label 0 (S1)',
}


def task_kind(value):
    kind = ALIASES.get(value, value)
    if kind not in TASK_KINDS:
        raise DomainError('unknown task: %r (expected one of %s)' % (value, ', '.join(TASK_KINDS)))
    return kind


class TaskSpec(object):
    def __init__(self, kind, dataset_path=None, text_field='sentence', label_field='label'):
        self.kind = task_kind(kind)
        self.dataset_path = dataset_path
        self.text_field = text_field
        self.label_field = label_field

    def label_mapping(self):
        names = LABEL_NAMES[self.kind]
        return {
            '%s=0' % names[0]: StimulusClass.S1.name,
            '%s=1' % names[1]: StimulusClass.S2.name,
        }

    def metadata(self):
        d = {
            'task': self.kind,
            'dataset_path': self.dataset_path,
            'label_mapping': self.label_mapping(),
        }
        if self.kind in LABEL_ASSUMPTIONS:
            d['label_assumption'] = LABEL_ASSUMPTIONS[self.kind]
        return d


def _delimiter(path):
    if path.lower().endswith(('.tsv', '.tab')):
        return '\t'
    return ','


def parse_label(value):
    v = value.strip()
    if v in ('0', '0.0'):
        return StimulusClass.S1
    if v in ('1', '1.0'):
        return StimulusClass.S2
    raise ValueError('unknown label value: %r' % (value,))


def load_dataset(spec):
    """Read (text, label) pairs from a TSV/CSV file with a header row."""
    path = spec.dataset_path
    if not path or not os.path.exists(path):
        raise DatasetError('file does not exist', path=path)
    items = []
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.reader(f, delimiter=_delimiter(path))
        header = next(reader, None)
        if header is None:
            raise DatasetError('empty dataset', path=path)
        header = [i.strip() for i in header]
        for field in (spec.text_field, spec.label_field):
            if field not in header:
                raise DatasetError('missing column %r in header %s' % (field, header), path=path, lineno=1)
        ti = header.index(spec.text_field)
        li = header.index(spec.label_field)
        for row in reader:
            lineno = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError('%s columns required, got %s' % (len(header), len(row)), path=path, lineno=lineno)
            try:
                label = parse_label(row[li])
            except ValueError as e:
                raise DatasetError(str(e), path=path, lineno=lineno)
            items.append((row[ti], label))
    if not items:
        raise DatasetError('no items', path=path)
    log.info('loaded %s items from %s'%(len(items), path))
    return items


def word_pattern(word):
    return re.compile(r'\b%s\b' % re.escape(word), re.IGNORECASE)


def find_occurrences(text, word):
    return list(word_pattern(word).finditer(text))


def delete_occurrence(text, word, index):
    """Remove the index-th standalone occurrence of word, with one adjoining run of spaces."""
    matches = find_occurrences(text, word)
    if not 0 <= index < len(matches):
        raise DomainError('occurrence %s of %r not found' % (index, word))
    start, end = matches[index].span()
    if end < len(text) and text[end].isspace():
        while end < len(text) and text[end].isspace():
            end += 1
    else:
        while start > 0 and text[start - 1].isspace():
            start -= 1
    return text[:start] + text[end:], len(text[:matches[index].start()].split())


class DepletionItem(collections.namedtuple('DepletionItem', [
        'original_text', 'presented_text', 'deleted', 'deleted_position', 'rng_seed'])):
    __slots__ = ()

    @property
    def label(self):
        return StimulusClass.S2 if self.deleted else StimulusClass.S1


def make_depletion_corpus(items, target_word='the', p_delete=0.5, seed=0):
    """Keep texts with the target word; delete one occurrence with probability p_delete.

    items are texts or (text, label) pairs; source labels are discarded.
    """
    if not 0.0 <= p_delete <= 1.0:
        raise DomainError('p_delete must lie in [0, 1], got %s' % p_delete)
    items = list(items)
    if not items:
        raise DomainError('no items')
    rng = np.random.default_rng(seed)
    corpus = []
    for item in items:
        text = item if isinstance(item, str) else item[0]
        n = len(find_occurrences(text, target_word))
        if not n:
            continue
        if rng.random() < p_delete:
            presented, position = delete_occurrence(text, target_word, int(rng.integers(n)))
            corpus.append(DepletionItem(text, presented, True, position, seed))
        else:
            corpus.append(DepletionItem(text, text, False, None, seed))
    if not corpus:
        raise DomainError('no sentence contains a standalone %r' % target_word)
    log.info('depletion corpus: %s of %s sentences qualify, %s deleted'%(
        len(corpus), len(items), sum(i.deleted for i in corpus)))
    return corpus


def task_items(spec, target_word='the', p_delete=0.5, seed=0):
    """(text, label) pairs as presented to the model."""
    items = load_dataset(spec)
    if spec.kind == C_WORD_DEPLETION:
        return [(i.presented_text, i.label) for i in make_depletion_corpus(items, target_word, p_delete, seed)]
    return items
