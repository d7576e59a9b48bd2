"""OpenAI-compatible chat-completions client."""
from __future__ import absolute_import, unicode_literals
import collections
import datetime
import os
import random
import threading
import time

import requests

from . import log
from .errors import CredentialsError

DEFAULT_API_KEY_ENV = 'METADUTILS_API_KEY'
RETRY_STATUS = (429, 500, 502, 503, 504)

Completion = collections.namedtuple('Completion', [
    'text', 'status', 'attempts', 'latency', 'request_timestamp', 'error'])


def utcnow():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class RateLimiter(object):
    """Global minimum spacing between request starts; rate <= 0 disables it."""
    def __init__(self, rate=0, clock=time.monotonic, sleep=time.sleep):
        self.interval = 1.0 / rate if rate and rate > 0 else 0.0
        self.clock = clock
        self.sleep = sleep
        self._next = 0.0
        self._lock = threading.Lock()

    def acquire(self):
        if not self.interval:
            return
        with self._lock:
            now = self.clock()
            start = max(now, self._next)
            self._next = start + self.interval
        if start > now:
            self.sleep(start - now)


class ChatClient(object):
    def __init__(self, endpoint_url, model_id, api_key_env=DEFAULT_API_KEY_ENV, timeout=60.0, retry_max=5,
                 backoff_ms=500, params=None, rate_limit=0, session=None, sleep=time.sleep):
        self.endpoint_url = endpoint_url
        self.model_id = model_id
        self.timeout = timeout
        self.retry_max = int(retry_max)
        self.backoff_ms = float(backoff_ms)
        self.params = dict(params or {})
        self.sleep = sleep
        self.limiter = RateLimiter(rate_limit, sleep=sleep)
        api_key = os.getenv(api_key_env)
        if not api_key:
            raise CredentialsError('no API key: set the %s environment variable' % api_key_env)
        self.session = session or requests.Session()
        self.session.headers.update({
            'Authorization': 'Bearer %s' % api_key,
            'Content-Type': 'application/json',
        })

    def payload(self, prompt):
        # one user message per request: every trial is a fresh conversation
        body = {'model': self.model_id, 'messages': [{'role': 'user', 'content': prompt}]}
        body.update(self.params)
        return body

    def _backoff(self, attempt, retry_after=None):
        if retry_after:
            try:
                return float(retry_after)
            except ValueError:
                pass
        return self.backoff_ms / 1000.0 * (2 ** attempt) * (1.0 + 0.1 * random.random())

    def complete(self, prompt):
        """Send one prompt; transport failures are retried, then reported in Completion.error."""
        body = self.payload(prompt)
        attempts = []
        timestamp = utcnow()
        t0 = time.monotonic()
        for attempt in range(self.retry_max + 1):
            self.limiter.acquire()
            retry_after = None
            try:
                r = self.session.post(self.endpoint_url, json=body, timeout=self.timeout)
            except requests.RequestException as e:
                attempts.append({'attempt': attempt + 1, 'outcome': 'connection_error', 'detail': str(e)})
                log.debug('request error (attempt %s): %s'%(attempt + 1, e))
            else:
                if r.status_code in (401, 403):
                    raise CredentialsError('credentials rejected by %s (HTTP %s)' % (self.endpoint_url, r.status_code))
                if r.status_code == 200:
                    try:
                        text = r.json()['choices'][0]['message']['content']
                    except (ValueError, KeyError, IndexError, TypeError) as e:
                        attempts.append({'attempt': attempt + 1, 'outcome': 'bad_body', 'detail': str(e)})
                        return Completion(None, r.status_code, attempts, time.monotonic() - t0, timestamp,
                            'unexpected response body')
                    attempts.append({'attempt': attempt + 1, 'outcome': 'ok', 'status': 200})
                    return Completion(text, 200, attempts, time.monotonic() - t0, timestamp, None)
                attempts.append({'attempt': attempt + 1, 'outcome': 'http_error', 'status': r.status_code})
                if r.status_code not in RETRY_STATUS:
                    return Completion(None, r.status_code, attempts, time.monotonic() - t0, timestamp,
                        'HTTP %s' % r.status_code)
                retry_after = r.headers.get('Retry-After')
                log.debug('HTTP %s (attempt %s)'%(r.status_code, attempt + 1))
            if attempt < self.retry_max:
                self.sleep(self._backoff(attempt, retry_after))
        log.warning('request failed after %s attempts'%len(attempts))
        return Completion(None, attempts[-1].get('status'), attempts, time.monotonic() - t0, timestamp,
            'retries exhausted')
