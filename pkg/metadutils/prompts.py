"""Prompt rendering from versioned jinja2 templates.

A prompt depends only on (task, risk, mode, text); nothing from earlier
trials is ever rendered into it.
"""
from __future__ import absolute_import, unicode_literals
import functools
import hashlib

import jinja2

from . import tasks
from .counts import StimulusClass
from .errors import TemplateError

WITH_CONFIDENCE = 'with_confidence'
TYPE1_ONLY = 'type1_only'
MODES = (WITH_CONFIDENCE, TYPE1_ONLY)
RISKS = ('S1', 'None', 'S2')

TEMPLATES = {
    tasks.A_SENTIMENT: 'sentiment.j2',
    tasks.B_ORAL_WRITTEN: 'oral_written.j2',
    tasks.C_WORD_DEPLETION: 'word_depletion.j2',
}

RESPONSE_DESCRIPTIONS = {
    tasks.A_SENTIMENT: {0: 'negative', 1: 'positive'},
    tasks.B_ORAL_WRITTEN: {0: 'oral transcription', 1: 'originates from a written source'},
    tasks.C_WORD_DEPLETION: {0: 'no word has been removed', 1: 'a word has been removed'},
}


def parse_risk(value):
    if value is None or str(value) == 'None':
        return 'None'
    v = str(value).strip().upper()
    if v == 'NONE':
        return 'None'
    if v not in RISKS:
        raise TemplateError('unknown risk configuration: %r' % (value,))
    return v


@functools.lru_cache(maxsize=None)
def environment(template_dir=None):
    if template_dir:
        loader = jinja2.FileSystemLoader(template_dir)
    else:
        loader = jinja2.PackageLoader('metadutils', 'templates')
    return jinja2.Environment(
        loader=loader,
        undefined=jinja2.StrictUndefined,
        autoescape=False,
        trim_blocks=True,
        lstrip_blocks=True,
    )


def _template(task, template_dir=None):
    kind = tasks.task_kind(task.kind if isinstance(task, tasks.TaskSpec) else task)
    try:
        return kind, environment(template_dir).get_template(TEMPLATES[kind])
    except jinja2.TemplateNotFound as e:
        raise TemplateError('no template registered for %s: %s' % (kind, e))


def render_prompt(task, risk, mode, text, template_dir=None, target_word='the'):
    if mode not in MODES:
        raise TemplateError('unknown mode: %r' % (mode,))
    risk = parse_risk(risk)
    kind, template = _template(task, template_dir)
    try:
        return template.render(
            mode=mode,
            risk=None if risk == 'None' else int(StimulusClass[risk]),
            labels=RESPONSE_DESCRIPTIONS[kind],
            target_word=target_word,
            text=text,
        )
    except jinja2.TemplateError as e:
        raise TemplateError('cannot render %s: %s' % (template.name, e))


def template_sha(task, template_dir=None):
    """SHA-1 over the task template and every template it extends."""
    kind, template = _template(task, template_dir)
    env = environment(template_dir)
    h = hashlib.sha1()
    for name in sorted(set([template.name, 'base.j2'])):
        try:
            source, _, _ = env.loader.get_source(env, name)
        except jinja2.TemplateNotFound as e:
            raise TemplateError('missing template: %s' % e)
        h.update(name.encode('utf-8'))
        h.update(source.encode('utf-8'))
    return h.hexdigest()
