"""Python bindings for the wastedata core.

Rules, masks and reports are plain dicts; rationals are fractions.Fraction.
Snapshots are passed around as their line-delimited JSON text.
"""

import json as _json
from fractions import Fraction

from . import _core
from ._core import (
    ChunkStore as _ChunkStore,
    CorruptionError,
    DomainError,
    Landfill as _Landfill,
    NotFoundError,
    chunk,
    f_lifetime,
    select_action,
)

__version__ = _core.__version__

__all__ = [
    "ChunkStore",
    "CorruptionError",
    "DomainError",
    "Landfill",
    "NotFoundError",
    "allocate_shares",
    "chunk",
    "classify",
    "diff",
    "f_lifetime",
    "penalty_factor",
    "plan",
    "recover_summary",
    "report",
    "scan",
    "select_action",
    "simulate",
]


def _text(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def _q(x):
    return str(Fraction(x))


def classify(path, size, mtime, atime, rules, now, kind="regular"):
    """Return (category, reason) for one record."""
    return _core.classify(path, size, mtime, atime, _text(rules), now, kind)


def scan(root, *, follow_symlinks=False, one_filesystem=False, exclude=(), workers=1, taken_at=None):
    """Walk `root` and return the snapshot as JSONL text."""
    return _core.scan(str(root), follow_symlinks, one_filesystem, list(exclude), workers, taken_at)


def report(snapshot, rules):
    return _json.loads(_core.report(snapshot, _text(rules)))


def diff(before, after, rules=None):
    return _json.loads(_core.diff(before, after, None if rules is None else _text(rules)))


def plan(snapshot, rules, masks, *, device="mlc", endurance=None, erase_block=256 * 1024):
    return _json.loads(_core.plan(snapshot, _text(rules), _text(masks), device, endurance, erase_block))


def recover_summary(snapshot, rules):
    return _json.loads(_core.recover_summary(snapshot, _text(rules)))


def penalty_factor(useful_bytes, waste_bytes, alpha):
    return Fraction(_core.penalty_factor(_q(useful_bytes), _q(waste_bytes), _q(alpha)))


def allocate_shares(accounts, bandwidth, alpha):
    """accounts: iterable of (id, useful_bytes, waste_bytes[, base_weight])."""
    rows = []
    for a in accounts:
        ident, useful, waste, *rest = a
        rows.append((ident, _q(useful), _q(waste), _q(rest[0] if rest else 1)))
    return _core.allocate_shares(rows, bandwidth, _q(alpha))


def simulate(trace, bandwidth, alpha, ticks):
    """Run the bandwidth scheduler over a workload trace given as text."""
    return _json.loads(_core.simulate(trace, bandwidth, _q(alpha), ticks))


class Landfill(_Landfill):
    def stats(self):
        return _json.loads(self._stats_json())


class ChunkStore(_ChunkStore):
    def stats(self):
        return _json.loads(self._stats_json())
