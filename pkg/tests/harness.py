"""Information-contract harness: perturb tokens beyond the delay horizon."""
from __future__ import annotations

import random

from increparse.incrementality import TraceRecorder


class Probe(TraceRecorder):
    """Recorder that also logs every commit together with the current position."""

    def __init__(self, n, delay):
        super().__init__(n, delay)
        self.log: list[tuple[int, frozenset]] = []

    def commit(self, arcs):
        super().commit(arcs)
        self.log.append((self.position, self.committed))


def committed_through(parser, forms, upos, i):
    """Everything the parser has committed while deciding positions <= i."""
    probe = Probe(len(forms), parser.delay)
    tags = upos if parser.gold_pos else None
    if parser.kind == "sl":
        _, labels = parser.parse_with_labels(forms, tags, probe)
        extra = tuple(labels[:i])
    else:
        parser.parse(forms, tags, probe)
        extra = ()
    return extra, [arcs for pos, arcs in probe.log if pos <= i]


def perturbation_trials(parser, trees, trials: int, seed: int = 0) -> int:
    """Return the number of trials whose committed prefix changed."""
    rng = random.Random(seed)
    k = parser.delay
    pool = [t for t in trees if len(t) > k + 1]
    vocab = sorted({f for t in trees for f in t.forms})
    tagset = sorted({p for t in trees for p in t.upos})
    violations = 0
    for _ in range(trials):
        tree = rng.choice(pool)
        n = len(tree)
        i = rng.randint(1, n - k - 1)
        forms, upos = list(tree.forms), list(tree.upos)
        before = committed_through(parser, forms, upos, i)
        for j in range(i + k, n):  # 0-based j is token j + 1 > i + k
            if rng.random() < 0.7:
                forms[j] = rng.choice(vocab)
            if rng.random() < 0.7:
                upos[j] = rng.choice(tagset)
        if committed_through(parser, forms, upos, i) != before:
            violations += 1
    return violations
