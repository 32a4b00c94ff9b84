"""Arc-eager transition system with a static oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .conllu import DepTree, Token, is_projective, projectivize

SHIFT, LEFT, RIGHT, REDUCE = "SH", "LA", "RA", "RE"
KINDS = (SHIFT, LEFT, RIGHT, REDUCE)


class TransitionError(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    kind: str
    deprel: str | None = None

    def __str__(self) -> str:
        return f"{self.kind}:{self.deprel}" if self.deprel else self.kind

    @classmethod
    def parse(cls, text: str) -> "Transition":
        kind, _, rel = text.partition(":")
        if kind not in KINDS:
            raise TransitionError(f"unknown transition {text!r}")
        return cls(kind, rel or None)


@dataclass(frozen=True)
class Configuration:
    n: int
    stack: tuple[int, ...] = (0,)
    buffer_front: int = 1
    arcs: frozenset = field(default_factory=frozenset)  # (head, dep, deprel)

    @property
    def top(self) -> int:
        return self.stack[-1]

    @property
    def terminal(self) -> bool:
        return self.buffer_front > self.n

    def head_of(self, node: int) -> int | None:
        for h, d, _ in self.arcs:
            if d == node:
                return h
        return None

    def has_head(self, node: int) -> bool:
        return any(d == node for _, d, _ in self.arcs)

    def unlabeled(self) -> set[tuple[int, int]]:
        return {(h, d) for h, d, _ in self.arcs}


def initial_config(n: int) -> Configuration:
    if n < 1:
        raise TransitionError("sentence must have at least one token")
    return Configuration(n)


def legal_transitions(c: Configuration, single_root: bool = False, complete: bool = False) -> set[str]:
    """Transition kinds whose preconditions hold.

    With ``single_root`` a second RightArc from node 0 is ruled out. With
    ``complete``, once the last token is at the buffer front every headless
    stack token must be attached (LeftArc) or popped before the buffer is
    emptied, so finalization only ever has to place the last token.
    """
    legal = set()
    buffer_left = c.buffer_front <= c.n
    if buffer_left:
        legal.add(SHIFT)
        if not (single_root and c.top == 0 and any(h == 0 for h, _, _ in c.arcs)):
            legal.add(RIGHT)
        if c.top != 0 and not c.has_head(c.top):
            legal.add(LEFT)
        if complete and c.buffer_front == c.n and any(not c.has_head(s) for s in c.stack[1:]):
            legal -= {SHIFT, RIGHT}
    if c.top != 0 and c.has_head(c.top):
        legal.add(REDUCE)
    return legal


def apply_transition(c: Configuration, t: Transition) -> Configuration:
    b = c.buffer_front
    if t.kind == SHIFT:
        if b > c.n:
            raise TransitionError("Shift needs a nonempty buffer")
        return Configuration(c.n, c.stack + (b,), b + 1, c.arcs)
    if t.kind == LEFT:
        if b > c.n:
            raise TransitionError("LeftArc needs a nonempty buffer")
        if c.top == 0:
            raise TransitionError("LeftArc cannot make the root a dependent")
        if c.has_head(c.top):
            raise TransitionError(f"LeftArc: stack top {c.top} already has a head")
        return Configuration(c.n, c.stack[:-1], b, c.arcs | {(b, c.top, t.deprel)})
    if t.kind == RIGHT:
        if b > c.n:
            raise TransitionError("RightArc needs a nonempty buffer")
        return Configuration(c.n, c.stack + (b,), b + 1, c.arcs | {(c.top, b, t.deprel)})
    if t.kind == REDUCE:
        if c.top == 0 or not c.has_head(c.top):
            raise TransitionError(f"Reduce: stack top {c.top} has no head")
        return Configuration(c.n, c.stack[:-1], b, c.arcs)
    raise TransitionError(f"unknown transition {t}")


def static_oracle(c: Configuration, gold: DepTree) -> Transition:
    """Next gold transition; Reduce only once the stack top is complete."""
    heads = gold.heads
    s, b = c.top, c.buffer_front
    if b <= c.n:
        if s != 0 and heads[s - 1] == b:
            return Transition(LEFT, gold.tokens[s - 1].deprel)
        if heads[b - 1] == s:
            return Transition(RIGHT, gold.tokens[b - 1].deprel)
    if s != 0 and c.has_head(s):
        attached = c.unlabeled()
        if all((s, d) in attached for d, h in enumerate(heads, 1) if h == s):
            return Transition(REDUCE)
    return Transition(SHIFT)


def finalize(c: Configuration) -> list[int]:
    """Head list for a terminal configuration.

    Headless tokens attach to the first root token; if there is none the
    first headless token becomes the root.
    """
    heads: list[int | None] = [None] * c.n
    for h, d, _ in c.arcs:
        heads[d - 1] = h
    roots = [d for d in range(1, c.n + 1) if heads[d - 1] == 0]
    root = roots[0] if roots else None
    for d in range(1, c.n + 1):
        if heads[d - 1] is None:
            if root is None:
                heads[d - 1] = 0
                root = d
            else:
                heads[d - 1] = root
    for r in roots[1:]:
        heads[r - 1] = root
    return heads


def config_tree(c: Configuration, template: DepTree | None = None, default_rel: str = "dep") -> DepTree:
    heads = finalize(c)
    rels = {d: r for _, d, r in c.arcs}
    out = []
    for i, h in enumerate(heads, 1):
        rel = rels.get(i) or ("root" if h == 0 else default_rel)
        if template is not None:
            tok = template.tokens[i - 1]
            out.append(Token(i, tok.form, tok.upos, h, rel))
        else:
            out.append(Token(i, f"w{i}", "X", h, rel))
    return DepTree(tuple(out), template.sentence_id if template else None,
                   template.comments if template else ())


def oracle_sequence(gold: DepTree) -> list[tuple[Configuration, Transition]]:
    """(configuration, gold transition) pairs; gold must be projective."""
    if not is_projective(gold):
        raise TransitionError("static oracle needs a projective tree; projectivize it first")
    c = initial_config(len(gold))
    steps = []
    while not c.terminal:
        t = static_oracle(c, gold)
        steps.append((c, t))
        c = apply_transition(c, t)
    steps.append((c, None))
    return steps


def run_oracle(gold: DepTree) -> tuple[list[Transition], DepTree]:
    target = gold if is_projective(gold) else projectivize(gold)
    steps = oracle_sequence(target)
    transitions = [t for _, t in steps[:-1]]
    return transitions, config_tree(steps[-1][0], gold)


def partial_parse(c: Configuration) -> set[tuple[int, int, str]]:
    return set(c.arcs)


def format_transitions(sentence_id: str, transitions: Iterable[Transition]) -> str:
    """TSV rows (sentence_id, step, transition, deprel)."""
    rows = [f"{sentence_id}\t{i}\t{t.kind}\t{t.deprel or '_'}" for i, t in enumerate(transitions, 1)]
    return "\n".join(rows) + ("\n" if rows else "")
