#!/usr/bin/env python
from __future__ import absolute_import, unicode_literals
import argparse
import sys

from . import command
from . import tasks
from .counts import StimulusClass


def summarize(spec, target_word='the', p_delete=0.5, seed=0):
    items = tasks.load_dataset(spec)
    doc = {
        'task': spec.kind,
        'dataset_path': spec.dataset_path,
        'items': len(items),
        'n_s1': sum(1 for _, label in items if label == StimulusClass.S1),
        'n_s2': sum(1 for _, label in items if label == StimulusClass.S2),
        'label_mapping': spec.label_mapping(),
    }
    if spec.kind == tasks.C_WORD_DEPLETION:
        corpus = tasks.make_depletion_corpus(items, target_word, p_delete, seed)
        doc['qualifying'] = len(corpus)
        doc['deleted'] = sum(1 for i in corpus if i.deleted)
    return doc


def add_arguments(parser):
    parser.add_argument('dataset', help='TSV/CSV dataset')
    parser.add_argument('--task', help='A_sentiment, B_oral_written or C_word_depletion (or A, B, C)', required=True)
    parser.add_argument('--text-field', help='Text column name', default='sentence')
    parser.add_argument('--label-field', help='Label column name', default='label')
    parser.add_argument('--target-word', help='Word removed in the word depletion task', default='the')
    parser.add_argument('--p-delete', help='Deletion probability in the word depletion task', type=float, default=0.5)
    command.add_common_arguments(parser, out=False)
    parser.set_defaults(seed=0)


def run(args):
    spec = tasks.TaskSpec(args.task, args.dataset, args.text_field, args.label_field)
    doc = summarize(spec, args.target_word, args.p_delete, args.seed)
    text = '%s: %s items (%s S1, %s S2)' % (args.dataset, doc['items'], doc['n_s1'], doc['n_s2'])
    if 'qualifying' in doc:
        text += ', %s contain %r' % (doc['qualifying'], args.target_word)
    command.emit(args, doc, text)
    return command.EXIT_OK


def main(argv=None, prog=None):
    parser = argparse.ArgumentParser(prog=prog, description='Check a task dataset and report its label balance.')
    add_arguments(parser)
    return command.execute(parser, run, argv)

if __name__ == '__main__':
    sys.exit(main())
