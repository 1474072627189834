"""Tagged run log with canonical JSON serialization.

Every record carries the engine-maintained (computation, round, node) stamp;
callers only choose a tag and a JSON-compatible payload. Canonical order is
(computation, round, node, emission order) per tag, with engine-level records
(node = None) sorting before node records of the same round. Serializing the
same document twice, or documents from runs that differ only in worker
count, yields identical bytes.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from ._version import __version__

# Per-message fabric trace tags. They are high-volume, so they are only
# emitted when explicitly listed in the config's logTags.
NET_SEND = "net.send"
NET_DELIVER = "net.deliver"
NET_DROP = "net.drop"
NET_TAGS = frozenset({NET_SEND, NET_DELIVER, NET_DROP})

# Node faults are recorded no matter what filter is configured.
ERROR_TAG = "error"


@dataclass(slots=True)
class LogRecord:
    computation: int
    round: int
    node: Optional[int]
    payload: Any
    seq: int = 0  # emission order within (computation, round, node)

    def to_json_obj(self) -> dict:
        return {
            "computation": self.computation,
            "round": self.round,
            "node": self.node,
            "payload": self.payload,
        }


def _sort_key(rec: LogRecord):
    node = -1 if rec.node is None else rec.node
    return (rec.computation, rec.round, node, rec.seq)


@dataclass
class LogDocument:
    """Append-only record set grouped by tag, plus a run metadata header."""

    meta: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)  # tag -> list[LogRecord]

    def append(self, tag: str, record: LogRecord) -> None:
        self.data.setdefault(tag, []).append(record)

    def tags(self):
        return sorted(self.data)

    def records(self, tag: str) -> list:
        return self.data.get(tag, [])

    def payloads(self, tag: str) -> list:
        return [rec.payload for rec in self.records(tag)]

    def canonicalize(self) -> None:
        for records in self.data.values():
            records.sort(key=_sort_key)

    def canonical_json(self) -> str:
        return serialize(self)


def serialize(doc: LogDocument) -> str:
    """Canonical JSON text: sorted keys, records in canonical order."""
    doc.canonicalize()
    obj = {
        "meta": dict(doc.meta, version=__version__),
        "data": {tag: [r.to_json_obj() for r in doc.data[tag]] for tag in doc.tags()},
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


class RunLogger:
    """Collects records during a run, stamping them with engine state.

    Compute hooks of distinct nodes append through per-node buffers
    (see NodeContext.log) which the engine merges at the phase barrier in
    ascending node order, so the document never depends on thread timing.
    """

    def __init__(self, enabled_tags: Optional[Iterable[str]] = None):
        # None means "all algorithm tags"; fabric trace tags stay opt-in.
        self.enabled_tags = None if enabled_tags is None else frozenset(enabled_tags)
        self.document = LogDocument()
        self.computation = 0
        self.round = 0
        self._seq = 0

    def enabled(self, tag: str) -> bool:
        if tag == ERROR_TAG:
            return True
        if self.enabled_tags is None:
            return tag not in NET_TAGS
        return tag in self.enabled_tags

    def set_position(self, computation: int, round_: int) -> None:
        self.computation = computation
        self.round = round_

    def append(self, tag: str, payload, node: Optional[int] = None) -> None:
        if not self.enabled(tag):
            return
        self._seq += 1
        rec = LogRecord(self.computation, self.round, node, payload, self._seq)
        self.document.append(tag, rec)

    def merge_node_buffer(self, node_id: int, buffer: list) -> None:
        """Adopt (tag, payload) pairs staged by one node during compute."""
        for tag, payload in buffer:
            self._seq += 1
            rec = LogRecord(self.computation, self.round, node_id, payload, self._seq)
            self.document.append(tag, rec)
