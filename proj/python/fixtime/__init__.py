"""Resolution-time category prediction for issue trackers.

Thin dict-based wrappers over the C++ core in ``fixtime._core``.
"""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    CorpusEmpty,
    FixtimeError,
    OverrideError,
    StratificationError,
    ValidationError,
    categorize,
    clean_text,
    __version__,
)

__all__ = [
    "Bundle",
    "ConfigError",
    "CorpusEmpty",
    "FixtimeError",
    "OverrideError",
    "Service",
    "StratificationError",
    "ValidationError",
    "categorize",
    "clean_text",
    "default_config",
    "evaluate",
    "ingest",
    "insights",
    "metrics",
    "stratified_split",
    "train",
]


def _dump(value):
    if value is None or isinstance(value, str):
        return value
    return _json.dumps(value)


def default_config():
    return _json.loads(_core.default_config())


def ingest(dump, config=None, strict=False, project=None):
    """parse -> filter -> label; returns ``(corpus, report)`` dicts."""
    corpus, report = _core.ingest(str(dump), _dump(config), strict, project)
    return _json.loads(corpus), _json.loads(report)


def evaluate(corpus, config=None, seeds=1):
    return _json.loads(_core.evaluate(_dump(corpus), _dump(config), seeds))


def insights(corpus):
    return _json.loads(_core.insights(_dump(corpus)))


def stratified_split(labels, n_classes, train_ratio=0.8, seed=0):
    train_rows, test_rows = _core.stratified_split(list(labels), n_classes, train_ratio, seed)
    return list(train_rows), list(test_rows)


def metrics(y_true, y_pred, n_classes=4):
    return _json.loads(_core.metrics(list(y_true), list(y_pred), n_classes))


class Bundle:
    """A trained model with the insight tables of its corpus."""

    def __init__(self, core):
        self._core = core

    @classmethod
    def load(cls, path):
        return cls(_core.Bundle.load(str(path)))

    @classmethod
    def from_json(cls, text):
        return cls(_core.Bundle.from_json(_dump(text)))

    @property
    def project(self):
        return self._core.project

    @property
    def n_train(self):
        return self._core.n_train

    def save(self, path):
        self._core.save(str(path))

    def to_json(self):
        return self._core.to_json()

    def predict(self, issue):
        return _json.loads(self._core.predict(_dump(issue)))

    def explain(self, issue):
        return _json.loads(self._core.explain(_dump(issue)))

    def whatif(self, issue, overrides):
        return _json.loads(self._core.whatif(_dump(issue), _dump(overrides)))

    def topics(self):
        return _json.loads(self._core.topics())

    def insights(self):
        return _json.loads(self._core.insights())


def train(corpus, config=None):
    return Bundle(_core.Bundle.train(_dump(corpus), _dump(config)))


class Service:
    """Request routing over loaded bundles, without a network listener."""

    def __init__(self, bundles=None, directory=None):
        self._core = _core.Service.from_directory(str(directory)) if directory else _core.Service()
        for project, bundle in (bundles or {}).items():
            self._core.add_bundle(project, bundle._core)

    def projects(self):
        return list(self._core.projects())

    def handle(self, method, path, body=None):
        status, payload = self._core.handle(method, path, _dump(body) or "")
        return status, _json.loads(payload)
