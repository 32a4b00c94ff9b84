"""Parse traces and strong-incrementality checks.

A trace holds, for every prefix length i, the arcs a pipeline has committed
once it has accessed tokens 1..i and nothing further. Pipelines report token
access and commits to a :class:`TraceRecorder`; the recorder turns those
events into snapshots and rejects any access past the declared horizon.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .arceager import apply_transition, finalize, initial_config, oracle_sequence
from .conllu import DepTree, is_projective, projectivize
from .encodings import IncrementalDecoder, Scheme, encode

Arc = tuple[int, int]


class ContractViolation(RuntimeError):
    """A pipeline looked at a token beyond its delay horizon."""


@dataclass(frozen=True)
class ParseTrace:
    n: int
    snapshots: tuple[frozenset, ...]
    final: frozenset
    declared_delay: int
    sentence_id: str | None = None

    def to_json(self) -> str:
        return json.dumps({
            "sentence_id": self.sentence_id,
            "n": self.n,
            "delay": self.declared_delay,
            "snapshots": [sorted(map(list, s)) for s in self.snapshots],
            "final": sorted(map(list, self.final)),
        })

    @classmethod
    def from_json(cls, line: str) -> "ParseTrace":
        obj = json.loads(line)
        return cls(obj["n"], tuple(frozenset(map(tuple, s)) for s in obj["snapshots"]),
                   frozenset(map(tuple, obj["final"])), obj["delay"], obj.get("sentence_id"))


@dataclass(frozen=True)
class Verdict:
    passed: bool
    index: int | None = None  # first violating prefix length
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


class TraceRecorder:
    """Collects snapshots from access/commit events of one sentence."""

    def __init__(self, n: int, delay: int, sentence_id: str | None = None):
        self.n = n
        self.delay = delay
        self.sentence_id = sentence_id
        self.position = 0
        self.horizon = 0
        self.committed: frozenset = frozenset()
        self.snapshots: list[frozenset | None] = [None] * n
        self.max_access = 0

    def at(self, position: int) -> None:
        """Declare the position whose output is being decided next."""
        self.position = position

    def access(self, j: int) -> None:
        j = min(j, self.n)
        if j > self.position + self.delay:
            raise ContractViolation(
                f"token {j} accessed at position {self.position} with delay {self.delay}")
        self.max_access = max(self.max_access, j)
        if j > self.horizon:
            for i in range(self.horizon, j):
                if i >= 1:
                    self.snapshots[i - 1] = self.committed
            self.horizon = j

    def commit(self, arcs: Iterable[Arc]) -> None:
        arcs = frozenset(arcs)
        for h, d in arcs:
            if max(h, d) > self.horizon:
                raise ContractViolation(f"arc ({h}, {d}) touches a token not yet accessed")
        self.committed = arcs

    def finish(self, final: Iterable[Arc]) -> ParseTrace:
        final = frozenset(final)
        for i in range(max(self.horizon, 1), self.n + 1):
            self.snapshots[i - 1] = final
        return ParseTrace(self.n, tuple(self.snapshots), final, self.delay, self.sentence_id)


def check_monotonic(trace: ParseTrace) -> Verdict:
    snaps = list(trace.snapshots)
    for i in range(1, len(snaps)):
        if not snaps[i - 1] <= snaps[i]:
            lost = sorted(snaps[i - 1] - snaps[i])
            return Verdict(False, i + 1, f"arcs {lost} dropped")
    if snaps and not snaps[-1] <= trace.final:
        return Verdict(False, trace.n, "final parse drops committed arcs")
    return Verdict(True)


def check_delay(trace: ParseTrace, k: int) -> Verdict:
    """Every final arc among tokens 1..i-k must be committed at snapshot i."""
    for i in range(1, trace.n + 1):
        due = {a for a in trace.final if max(a) <= i - k}
        missing = due - trace.snapshots[i - 1]
        if missing:
            return Verdict(False, i, f"arcs {sorted(missing)} missing")
    return Verdict(True)


def connected_fraction(trace: ParseTrace) -> float:
    """Share of snapshots whose induced subgraph is connected (informational)."""
    if trace.n == 0:
        return 1.0
    ok = 0
    for i, snap in enumerate(trace.snapshots, 1):
        nodes = set(range(1, i + 1))
        edges = [(h, d) for h, d in snap if h in nodes and d in nodes]
        parent = {v: v for v in nodes}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for h, d in edges:
            parent[find(h)] = find(d)
        if len({find(v) for v in nodes}) <= 1:
            ok += 1
    return ok / trace.n


# -- gold pipelines -------------------------------------------------------

def trace_gold_labels(tree: DepTree, scheme, delay: int = 0) -> ParseTrace:
    """Trace a sequence-labeling decoder fed the gold labels of ``tree``."""
    seq = encode(tree, scheme)
    rec = TraceRecorder(len(tree), delay, tree.sentence_id)
    dec = IncrementalDecoder(Scheme.parse(scheme))
    for i, (lab, tag) in enumerate(zip(seq.labels, seq.upos), 1):
        rec.at(i)
        rec.access(i + delay)
        dec.feed(lab, tag)
        rec.commit(dec.arcs)
    heads = dec.finish()
    return rec.finish((h, d) for d, h in enumerate(heads, 1))


def trace_oracle(tree: DepTree, delay: int = 0) -> ParseTrace:
    """Trace the arc-eager parser driven by the static oracle."""
    gold = tree if is_projective(tree) else projectivize(tree)
    rec = TraceRecorder(len(gold), delay, tree.sentence_id)
    steps = oracle_sequence(gold)
    c = initial_config(len(gold))
    for _, t in steps[:-1]:
        rec.at(c.buffer_front)
        rec.access(c.buffer_front + delay)
        c = apply_transition(c, t)
        rec.commit(c.unlabeled())
    heads = finalize(c)
    return rec.finish((h, d) for d, h in enumerate(heads, 1))


def record_trace(pipeline, sentence, delay: int) -> ParseTrace:
    """Run ``pipeline(sentence, recorder)`` under a fresh recorder.

    ``pipeline`` must call ``recorder.at``/``access``/``commit`` as it goes and
    return the final head list.
    """
    n = len(sentence)
    rec = TraceRecorder(n, delay, getattr(sentence, "sentence_id", None))
    heads = pipeline(sentence, rec)
    return rec.finish((h, d) for d, h in enumerate(heads, 1))
