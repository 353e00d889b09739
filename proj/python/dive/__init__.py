"""Provenance truth maintenance: labels, refutation what-ifs and confidence.

Documents are dive/1 JSON text. Functions returning structured results decode
them into plain dicts with the same shape as the HTTP API responses.
"""

import json as _json

from . import _dive
from ._dive import FORMAT_VERSION, DiveError, Service

__all__ = [
    "FORMAT_VERSION",
    "DiveError",
    "Service",
    "fixture",
    "canonicalize",
    "validate",
    "provenance",
    "refute",
    "confidence",
    "export_dot",
]

# DiveError args are (code, message, detail_json).
DiveError.code = property(lambda self: self.args[0])
DiveError.message = property(lambda self: self.args[1])
DiveError.detail = property(lambda self: _json.loads(self.args[2]))


def _policy(policy):
    if policy is None:
        return ""
    return policy if isinstance(policy, str) else _json.dumps(policy)


def fixture():
    """Canonical text of the built-in Lady Ada scenario."""
    return _dive.fixture()


def canonicalize(text):
    return _dive.canonicalize(text)


def validate(text):
    """{"valid": bool, "violations": [...]}; syntax and schema errors raise."""
    return _json.loads(_dive.validate(text))


def provenance(text, targets):
    return _json.loads(_dive.provenance(text, list(targets)))


def refute(text, targets, disabled=()):
    return _json.loads(_dive.refute(text, list(targets), list(disabled)))


def confidence(text, targets, disabled=(), policy=None):
    """policy: dict or JSON text with andPolicy, orPolicy, appraisalAggregator, defaultSeed."""
    return _json.loads(_dive.confidence(text, list(targets), list(disabled), _policy(policy)))


def export_dot(text, targets, disabled=(), policy=None):
    return _dive.export_dot(text, list(targets), list(disabled), _policy(policy))
