#!/usr/bin/env python
from __future__ import absolute_import, unicode_literals
import argparse
import json
import sys

from . import command
from . import prompts
from .config import RunConfig
from .harness import load_trials, run_experiment, validity_report


def param(value):
    """key=value decoding parameter; the value is parsed as JSON when possible."""
    key, sep, v = value.partition('=')
    if not sep or not key:
        raise argparse.ArgumentTypeError('expected key=value: %r' % value)
    try:
        return key, json.loads(v)
    except ValueError:
        return key, v


def add_arguments(parser):
    parser.add_argument('--endpoint-url', help='Chat-completions endpoint URL')
    parser.add_argument('--model-id', help='Model identifier sent with each request')
    parser.add_argument('--task', help='A_sentiment, B_oral_written or C_word_depletion (or A, B, C)')
    parser.add_argument('--risk', help='High-risk response: S1, S2 or None')
    parser.add_argument('--mode', help='with_confidence or type1_only', choices=prompts.MODES)
    parser.add_argument('--n-trials', help='Number of items to submit; default is all', type=int)
    parser.add_argument('--concurrency', help='Concurrent requests', type=int)
    parser.add_argument('--retry-max', help='Retries per request on transport failures', type=int)
    parser.add_argument('--retry-backoff-ms', help='Initial retry backoff in milliseconds', type=float)
    parser.add_argument('--invalid-ceiling', help='Abort when invalid replies exceed this fraction', type=float)
    parser.add_argument('--template-dir', help='Directory with prompt templates; default is the bundled set')
    parser.add_argument('--dataset-path', help='TSV/CSV dataset with text and label columns')
    parser.add_argument('--text-field', help='Text column name')
    parser.add_argument('--label-field', help='Label column name')
    parser.add_argument('--target-word', help='Word removed in the word depletion task')
    parser.add_argument('--p-delete', help='Deletion probability in the word depletion task', type=float)
    parser.add_argument('--rate-limit', help='Requests per second; 0 is unlimited', type=float)
    parser.add_argument('--timeout', help='Request timeout in seconds', type=float)
    parser.add_argument('--api-key-env', help='Environment variable holding the API key')
    parser.add_argument('--param', help='Decoding parameter key=value passed to the endpoint', type=param,
        action='append', default=[])
    command.add_common_arguments(parser)
    parser.set_defaults(params=None)


def run_config(args):
    params = dict(args.params or {})
    params.update(args.param)
    retry = {}
    if args.retry_max is not None:
        retry['max'] = args.retry_max
    if args.retry_backoff_ms is not None:
        retry['backoff_ms'] = args.retry_backoff_ms
    return RunConfig(
        endpoint_url=args.endpoint_url,
        model_id=args.model_id,
        task=args.task,
        risk=args.risk,
        mode=args.mode,
        n_trials=args.n_trials,
        concurrency=args.concurrency,
        retry=retry,
        invalid_ceiling=args.invalid_ceiling,
        seed=args.seed,
        template_dir=args.template_dir,
        dataset_path=args.dataset_path,
        text_field=args.text_field,
        label_field=args.label_field,
        target_word=args.target_word,
        p_delete=args.p_delete,
        rate_limit=args.rate_limit,
        timeout=args.timeout,
        params=params,
        api_key_env=args.api_key_env,
        out=args.out,
    )


def run(args):
    path = run_experiment(run_config(args))
    _, records = load_trials(path)
    doc = validity_report(records)
    doc['out'] = path
    command.emit(args, doc, '%s: %s attempted, %s valid, %s invalid %s' % (
        path, doc['attempted'], doc['valid'], doc['invalid'], doc['reasons'] or ''))
    return command.EXIT_OK


def main(argv=None, prog=None):
    parser = argparse.ArgumentParser(prog=prog, description='Run a classification task against a chat-completions endpoint.')
    add_arguments(parser)
    return command.execute(parser, run, argv)

if __name__ == '__main__':
    sys.exit(main())
