"""Sequence-labeling encodings of dependency trees.

Five schemes are supported: absolute head index, relative offset, PoS-based
offset and the 1-planar / 2-planar bracket encodings. Decoding runs strictly
left to right through :class:`IncrementalDecoder`; :func:`decode` is the batch
wrapper that feeds every label and then applies the sentence-final repairs.

Bracket convention (per plane, starred symbols belong to plane 2):

* rightward arc h -> d (h < d): ``/`` in the label of h, ``>`` in the label of d
* leftward arc h -> d (d < h): ``<`` in the label of d, ``\\`` in the label of h
* the root arc of t is a ``>`` on t whose ``/`` sits implicitly on node 0

Symbols are written in the order ``<``, ``\\``, ``/``, ``>``, each plane-1
run followed by its plane-2 run.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Union

from .conllu import DepTree, Token, crossing

ROOT = "ROOT"
BRACKETS = "<\\/>"

PosPayload = Union[str, tuple[int, str]]
Payload = Union[int, str, tuple[int, str]]


class Scheme(enum.Enum):
    ABS = "abs"
    REL = "rel"
    POS = "pos"
    B1P = "1p"
    B2P = "2p"

    @property
    def forward_looking(self) -> bool:
        return self in (Scheme.ABS, Scheme.REL, Scheme.POS)

    @property
    def bracketing(self) -> bool:
        return self in (Scheme.B1P, Scheme.B2P)

    @classmethod
    def parse(cls, name: Union[str, "Scheme"]) -> "Scheme":
        if isinstance(name, Scheme):
            return name
        aliases = {"abs-idx": "abs", "rel-idx": "rel", "pos-idx": "pos", "1-planar": "1p", "2-planar": "2p"}
        return cls(aliases.get(name.lower(), name.lower()))


def forward_looking(scheme) -> bool:
    return Scheme.parse(scheme).forward_looking


class LabelError(ValueError):
    """A label that does not belong to its scheme's alphabet."""

    def __init__(self, message: str, token: int | None = None):
        self.token = token
        if token is not None:
            message = f"token {token}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class LabelSequence:
    scheme: Scheme
    labels: tuple
    upos: tuple[str, ...]
    deprels: tuple[str, ...] | None = None
    forms: tuple[str, ...] | None = None
    sentence_id: str | None = None

    def __post_init__(self):
        if len(self.labels) != len(self.upos):
            raise LabelError(f"{len(self.labels)} labels but {len(self.upos)} PoS tags")
        for name in ("deprels", "forms"):
            extra = getattr(self, name)
            if extra is not None and len(extra) != len(self.labels):
                raise LabelError(f"{len(self.labels)} labels but {len(extra)} {name}")

    def __len__(self) -> int:
        return len(self.labels)

    def strings(self) -> list[str]:
        return [format_label(self.scheme, lab) for lab in self.labels]

    @classmethod
    def from_strings(cls, scheme, labels: Sequence[str], upos: Sequence[str], **kw) -> "LabelSequence":
        scheme = Scheme.parse(scheme)
        payloads = tuple(parse_label(scheme, s, token=i) for i, s in enumerate(labels, 1))
        return cls(scheme, payloads, tuple(upos), **kw)


# -- label strings ---------------------------------------------------------

def format_label(scheme: Scheme, payload: Payload) -> str:
    if scheme is Scheme.ABS:
        return str(payload)
    if scheme is Scheme.REL:
        return f"{payload:+d}"
    if scheme is Scheme.POS:
        if payload == ROOT:
            return ROOT
        k, tag = payload
        return f"{k:+d},{tag}"
    return payload


def bracket_symbols(label: str, two_planes: bool, token: int | None = None) -> list[tuple[str, int]]:
    """Split a bracket label into (symbol, plane) pairs."""
    out = []
    i = 0
    while i < len(label):
        ch = label[i]
        if ch not in BRACKETS:
            raise LabelError(f"bad bracket symbol {ch!r} in {label!r}", token)
        plane = 1
        if i + 1 < len(label) and label[i + 1] == "*":
            if not two_planes:
                raise LabelError(f"plane-2 symbol in 1-planar label {label!r}", token)
            plane = 2
            i += 1
        out.append((ch, plane))
        i += 1
    return out


def parse_label(scheme: Scheme, text: str, token: int | None = None) -> Payload:
    scheme = Scheme.parse(scheme)
    try:
        if scheme in (Scheme.ABS, Scheme.REL):
            return int(text)
        if scheme is Scheme.POS:
            if text == ROOT:
                return ROOT
            k, tag = text.split(",", 1)
            if not tag:
                raise ValueError
            return (int(k), tag)
    except ValueError:
        raise LabelError(f"malformed {scheme.value} label {text!r}", token) from None
    bracket_symbols(text, scheme is Scheme.B2P, token)
    return text


def canonical_brackets(symbols) -> str:
    syms = list(symbols)
    parts = []
    for ch in BRACKETS:
        parts.append(ch * sum(1 for s, p in syms if s == ch and p == 1))
        parts.append((ch + "*") * sum(1 for s, p in syms if s == ch and p == 2))
    return "".join(parts)


# -- plane assignment ------------------------------------------------------

def _same_direction_conflict(a: tuple[int, int], b: tuple[int, int]) -> bool:
    # arcs are (head, dependent); root arcs (0, d) are rightward
    return (a[0] < a[1]) == (b[0] < b[1]) and crossing(a, b)


def greedy_plane1(arcs: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Keep-first subset without same-direction crossings, by dependent index."""
    kept: list[tuple[int, int]] = []
    for arc in sorted(arcs, key=lambda a: a[1]):
        if not any(_same_direction_conflict(arc, k) for k in kept):
            kept.append(arc)
    return kept


def assign_planes(arcs: Sequence[tuple[int, int]]) -> dict[tuple[int, int], int]:
    """Map arcs to plane 1 or 2; arcs missing from the result are dropped.

    Conflict-graph components are handled in order of their leftmost arc and
    2-colored from it with plane 1 first. A component that is not bipartite
    falls back to greedy first-fit in leftmost-endpoint order.
    """
    order = sorted(arcs, key=lambda a: (min(a), max(a), a[1]))
    adj = {a: [b for b in order if b != a and _same_direction_conflict(a, b)] for a in order}
    planes: dict[tuple[int, int], int] = {}
    seen: set = set()
    for start in order:
        if start in seen:
            continue
        comp = []
        color = {start: 1}
        queue = [start]
        seen.add(start)
        bipartite = True
        while queue:
            a = queue.pop(0)
            comp.append(a)
            for b in adj[a]:
                if b not in color:
                    color[b] = 3 - color[a]
                    seen.add(b)
                    queue.append(b)
                elif color[b] == color[a]:
                    bipartite = False
        if bipartite:
            planes.update(color)
            continue
        comp.sort(key=order.index)
        for a in comp:
            for p in (1, 2):
                if not any(planes.get(b) == p for b in adj[a]):
                    planes[a] = p
                    break
    return planes


# -- encoding --------------------------------------------------------------

def _encode_pos(heads: Sequence[int], upos: Sequence[str]) -> list[PosPayload]:
    labels: list[PosPayload] = []
    for d, h in enumerate(heads, 1):
        if h == 0:
            labels.append(ROOT)
            continue
        tag = upos[h - 1]
        if h > d:
            k = sum(1 for j in range(d + 1, h + 1) if upos[j - 1] == tag)
        else:
            k = -sum(1 for j in range(h, d) if upos[j - 1] == tag)
        labels.append((k, tag))
    return labels


def _bracket_labels(n: int, planes: dict[tuple[int, int], int]) -> list[str]:
    symbols: list[list[tuple[str, int]]] = [[] for _ in range(n + 1)]
    for (h, d), p in planes.items():
        if h < d:
            symbols[h].append(("/", p))  # node 0's slash stays implicit
            symbols[d].append((">", p))
        else:
            symbols[d].append(("<", p))
            symbols[h].append(("\\", p))
    return [canonical_brackets(symbols[i]) for i in range(1, n + 1)]


def encode(tree: DepTree, scheme) -> LabelSequence:
    scheme = Scheme.parse(scheme)
    heads = tree.heads
    n = len(heads)
    if scheme is Scheme.ABS:
        labels: list = list(heads)
    elif scheme is Scheme.REL:
        labels = [h - d for d, h in enumerate(heads, 1)]
    elif scheme is Scheme.POS:
        labels = _encode_pos(heads, tree.upos)
    else:
        arcs = [(h, d) for d, h in enumerate(heads, 1)]
        if scheme is Scheme.B1P:
            planes = {a: 1 for a in greedy_plane1(arcs)}
        else:
            planes = assign_planes(arcs)
        labels = _bracket_labels(n, planes)
    return LabelSequence(scheme, tuple(labels), tuple(tree.upos), tuple(tree.deprels),
                         tuple(tree.forms), tree.sentence_id)


def encoded_arcs(tree: DepTree, scheme) -> set[tuple[int, int]]:
    """Arcs the encoder actually represents (all of them for head-based schemes)."""
    scheme = Scheme.parse(scheme)
    arcs = [(h, d) for d, h in enumerate(tree.heads, 1)]
    if scheme is Scheme.B1P:
        return set(greedy_plane1(arcs))
    if scheme is Scheme.B2P:
        return set(assign_planes(arcs))
    return set(arcs)


# -- decoding --------------------------------------------------------------

class IncrementalDecoder:
    """Left-to-right label decoder.

    ``feed`` consumes the label (and PoS tag) of the next token and commits
    every arc that labels read so far determine, including headless-token
    attachments whose target is already fixed. ``arcs`` only grows while
    feeding. ``finish`` applies the sentence-final repairs: out-of-range
    heads, unmatched brackets, cycles and extra roots.
    """

    def __init__(self, scheme):
        self.scheme = Scheme.parse(scheme)
        self.heads: list[int | None] = [None]  # index 0 unused
        self.upos: list[str] = [""]
        self._pending: dict[int, list[int]] = {}  # abs/rel: head position -> dependents
        self._pos_pending: list[list] = []  # [dependent, remaining k, tag]
        self._stacks = {(p, s): [] for p in (1, 2) for s in "</"}
        self._waiting: list[int] = []  # tokens with no head bracket, awaiting a root
        self._root: int | None = None
        self.n = 0

    @property
    def arcs(self) -> set[tuple[int, int]]:
        return {(h, d) for d, h in enumerate(self.heads) if d and h is not None}

    def _attach(self, h: int, d: int) -> None:
        if self.heads[d] is not None:
            return  # first head wins
        self.heads[d] = h
        if h == 0 and self._root is None:
            self._root = d
            for w in self._waiting:
                self.heads[w] = d
            self._waiting = []

    def feed(self, label: Payload, upos: str = "_") -> None:
        self.n += 1
        d = self.n
        self.heads.append(None)
        self.upos.append(upos)
        if isinstance(label, str) and self.scheme in (Scheme.ABS, Scheme.REL, Scheme.POS):
            label = parse_label(self.scheme, label, token=d)
        if self.scheme.bracketing:
            self._feed_brackets(d, label)
        else:
            self._resolve(d, upos)
            self._feed_head(d, label)

    def _feed_head(self, d: int, label: Payload) -> None:
        if self.scheme is Scheme.POS:
            if label == ROOT:
                self._attach(0, d)
                return
            k, tag = label
            if k > 0:
                self._pos_pending.append([d, k, tag])
                return
            if k < 0:
                seen = 0
                for j in range(d - 1, 0, -1):
                    if self.upos[j] == tag:
                        seen += 1
                        if seen == -k:
                            self._attach(j, d)
                            return
            self._attach(0, d)  # k == 0 or not enough tags to the left
            return
        h = label if self.scheme is Scheme.ABS else d + label
        if h < 0:
            self._attach(0, d)
        elif h <= d:
            self._attach(h, d)
        else:
            self._pending.setdefault(h, []).append(d)

    def _resolve(self, p: int, tag: str) -> None:
        for d in self._pending.pop(p, ()):
            self._attach(p, d)
        still = []
        for item in self._pos_pending:
            if item[2] == tag:
                item[1] -= 1
                if item[1] == 0:
                    self._attach(p, item[0])
                    continue
            still.append(item)
        self._pos_pending = still

    def _feed_brackets(self, i: int, label: str) -> None:
        symbols = bracket_symbols(label, self.scheme is Scheme.B2P, token=i)
        for p in (1, 2):
            for sym, plane in symbols:
                if plane != p:
                    continue
                if sym == "\\":
                    stack = self._stacks[(p, "<")]
                    if stack:
                        self._attach(i, stack.pop())
                elif sym == ">":
                    stack = self._stacks[(p, "/")]
                    self._attach(stack.pop() if stack else 0, i)
        for sym, plane in symbols:
            if sym in "</":
                self._stacks[(plane, sym)].append(i)
        if not any(sym in "<>" for sym, _ in symbols):
            if self._root is not None:
                self._attach(self._root, i)
            else:
                self._waiting.append(i)

    def finish(self) -> list[int]:
        """Apply end-of-sentence repairs and return the final head list."""
        n = self.n
        heads = list(self.heads)
        # (1) range repair for targets that never appeared
        for h, deps in self._pending.items():
            for d in deps:
                if heads[d] is None:
                    heads[d] = 0
        for d, _, _ in self._pos_pending:
            if heads[d] is None:
                heads[d] = 0
        # (3) headless repair
        root = next((d for d in range(1, n + 1) if heads[d] == 0), None)
        for d in range(1, n + 1):
            if heads[d] is None:
                if root is None:
                    heads[d] = 0
                    root = d
                else:
                    heads[d] = root
        # (4) cycle repair
        out = heads[1:]
        for cycle in find_cycles(out):
            out[min(cycle) - 1] = 0
        # (5) single-root repair
        roots = [d for d, h in enumerate(out, 1) if h == 0]
        for r in roots[1:]:
            out[r - 1] = roots[0]
        return out


def find_cycles(heads: Sequence[int]) -> list[list[int]]:
    """Cycles of a head list (1-based nodes, 0 = root), self-loops included."""
    n = len(heads)
    state = [0] * (n + 1)
    state[0] = 2
    cycles = []
    for start in range(1, n + 1):
        path = []
        node = start
        while 0 <= node <= n and state[node] == 0:
            state[node] = 1
            path.append(node)
            node = heads[node - 1]
        if 0 <= node <= n and state[node] == 1:
            cycles.append(path[path.index(node):])
        for p in path:
            state[p] = 2
    return cycles


def raw_decode(seq: LabelSequence) -> set[tuple[int, int]]:
    """Arcs committed by feeding every label, before sentence-final repairs."""
    dec = IncrementalDecoder(seq.scheme)
    for lab, tag in zip(seq.labels, seq.upos):
        dec.feed(lab, tag)
    return dec.arcs


def decode(seq: LabelSequence) -> DepTree:
    dec = IncrementalDecoder(seq.scheme)
    for lab, tag in zip(seq.labels, seq.upos):
        dec.feed(lab, tag)
    heads = dec.finish()
    n = len(heads)
    forms = seq.forms or tuple(f"w{i}" for i in range(1, n + 1))
    deprels = seq.deprels or tuple("root" if h == 0 else "dep" for h in heads)
    tokens = tuple(Token(i, forms[i - 1], seq.upos[i - 1], heads[i - 1], deprels[i - 1])
                   for i in range(1, n + 1))
    return DepTree(tokens, seq.sentence_id)


def coverage(tree: DepTree, scheme) -> float:
    """Fraction of gold arcs recovered by decode(encode(tree))."""
    if len(tree) == 0:
        return 1.0
    back = decode(encode(tree, scheme))
    return len(back.arcs() & tree.arcs()) / len(tree)
