"""CoNLL-U reading/writing, tree validation and treebank-level statistics."""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Iterator, Sequence, Union

logger = logging.getLogger(__name__)

ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC = range(10)


class ConlluError(ValueError):
    """Malformed CoNLL-U input."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class TreeValidationError(ValueError):
    def __init__(self, message: str, sentence_id: str | None = None):
        self.sentence_id = sentence_id
        super().__init__(f"sentence {sentence_id or '?'}: {message}")


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class DepTree:
    tokens: tuple[Token, ...]
    sentence_id: str | None = None
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def upos(self) -> list[str]:
        return [t.upos for t in self.tokens]

    @property
    def heads(self) -> list[int]:
        return [t.head for t in self.tokens]

    @property
    def deprels(self) -> list[str]:
        return [t.deprel for t in self.tokens]

    def arcs(self) -> set[tuple[int, int]]:
        """Unlabeled arcs as (head, dependent) pairs."""
        return {(t.head, t.id) for t in self.tokens}

    def labeled_arcs(self) -> set[tuple[int, int, str]]:
        return {(t.head, t.id, t.deprel) for t in self.tokens}

    def with_heads(self, heads: Sequence[int], deprels: Sequence[str] | None = None) -> "DepTree":
        if deprels is None:
            deprels = self.deprels
        tokens = tuple(replace(t, head=h, deprel=r) for t, h, r in zip(self.tokens, heads, deprels))
        return replace(self, tokens=tokens)

    @classmethod
    def from_heads(cls, heads: Sequence[int], deprels: Sequence[str] | None = None,
                   forms: Sequence[str] | None = None, upos: Sequence[str] | None = None,
                   sentence_id: str | None = None, validate: bool = True) -> "DepTree":
        n = len(heads)
        deprels = deprels or ["root" if h == 0 else "dep" for h in heads]
        forms = forms or [f"w{i}" for i in range(1, n + 1)]
        upos = upos or ["X"] * n
        tokens = tuple(Token(i, f, p, h, r)
                       for i, (f, p, h, r) in enumerate(zip(forms, upos, heads, deprels), 1))
        tree = cls(tokens, sentence_id)
        if validate:
            validate_tree(tree)
        return tree


def tree_problem(heads: Sequence[int]) -> str | None:
    """Return a description of why ``heads`` is not a single-rooted tree, or None."""
    n = len(heads)
    roots = 0
    for d, h in enumerate(heads, 1):
        if not 0 <= h <= n:
            return f"head {h} of token {d} out of range"
        if h == d:
            return f"token {d} is its own head"
        if h == 0:
            roots += 1
    if roots != 1:
        return f"{roots} root tokens"
    # every node must reach 0
    state = [0] * (n + 1)  # 0 unseen, 1 on path, 2 done
    state[0] = 2
    for start in range(1, n + 1):
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = heads[node - 1]
        if state[node] == 1:
            return f"cycle through token {node}"
        for p in path:
            state[p] = 2
    return None


def validate_tree(tree: DepTree) -> None:
    for i, tok in enumerate(tree.tokens, 1):
        if tok.id != i:
            raise TreeValidationError(f"token ids not consecutive at {tok.id}", tree.sentence_id)
        if not tok.upos or not tok.deprel:
            raise TreeValidationError(f"empty upos/deprel at token {i}", tree.sentence_id)
    problem = tree_problem(tree.heads)
    if problem:
        raise TreeValidationError(problem, tree.sentence_id)


def _lines(source) -> Iterator[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line.rstrip("\r\n")


def iter_conllu(source: Union[str, bytes, IO, Iterable], skip_invalid: bool = False,
                tokens_only: bool = False) -> Iterator[DepTree]:
    """Yield one DepTree per sentence block.

    Multiword-token ranges and empty nodes are dropped. With ``skip_invalid``
    sentences that are not trees are logged and skipped instead of raising.
    ``tokens_only`` reads raw parser input: heads may be ``_`` (read as 0)
    and no tree validation happens.
    """
    comments: list[str] = []
    rows: list[tuple[int, list[str]]] = []

    def flush():
        sent_id = None
        for c in comments:
            body = c[1:].strip()
            if body.startswith("sent_id"):
                sent_id = body.split("=", 1)[1].strip() if "=" in body else None
        tokens = []
        for line_no, cols in rows:
            if tokens_only and cols[HEAD] == "_":
                head = 0
            else:
                try:
                    head = int(cols[HEAD])
                except ValueError:
                    raise ConlluError(f"non-integer head {cols[HEAD]!r}", line_no) from None
            tokens.append(Token(int(cols[ID]), cols[FORM], cols[UPOS], head, cols[DEPREL]))
        tree = DepTree(tuple(tokens), sent_id, tuple(comments))
        if tokens_only:
            return tree
        try:
            validate_tree(tree)
        except TreeValidationError:
            if not skip_invalid:
                raise
            logger.warning("skipping invalid sentence %s", sent_id)
            return None
        return tree

    for line_no, line in enumerate(_lines(source), 1):
        if not line.strip():
            if rows:
                tree = flush()
                if tree is not None:
                    yield tree
            comments, rows = [], []
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"expected 10 columns, got {len(cols)}", line_no)
        if "-" in cols[ID] or "." in cols[ID]:
            continue
        if not cols[ID].isdigit():
            raise ConlluError(f"bad token id {cols[ID]!r}", line_no)
        rows.append((line_no, cols))
    if rows:
        tree = flush()
        if tree is not None:
            yield tree


def parse_conllu(source, skip_invalid: bool = False, tokens_only: bool = False) -> list[DepTree]:
    return list(iter_conllu(source, skip_invalid=skip_invalid, tokens_only=tokens_only))


def read_conllu(path, skip_invalid: bool = False, tokens_only: bool = False) -> list[DepTree]:
    with open(path, encoding="utf-8") as f:
        return parse_conllu(f, skip_invalid=skip_invalid, tokens_only=tokens_only)


def format_tree(tree: DepTree) -> str:
    lines = list(tree.comments)
    if tree.sentence_id is not None and not any(c[1:].strip().startswith("sent_id") for c in lines):
        lines.insert(0, f"# sent_id = {tree.sentence_id}")
    for t in tree.tokens:
        lines.append("\t".join([str(t.id), t.form, "_", t.upos, "_", "_", str(t.head), t.deprel, "_", "_"]))
    return "\n".join(lines) + "\n\n"


def write_conllu(trees: Iterable[DepTree], sink: IO) -> None:
    """Write trees to a text or binary sink. Unknown columns are emitted as ``_``."""
    binary = isinstance(sink, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(sink, "mode", "")
    for tree in trees:
        chunk = format_tree(tree)
        sink.write(chunk.encode("utf-8") if binary else chunk)


def dumps_conllu(trees: Iterable[DepTree]) -> str:
    return "".join(format_tree(t) for t in trees)


def _heads_of(tree_or_heads) -> list[int]:
    return tree_or_heads.heads if isinstance(tree_or_heads, DepTree) else list(tree_or_heads)


def crossing(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """True iff the two arcs (given by any endpoint order) strictly cross."""
    l1, r1 = sorted(a)
    l2, r2 = sorted(b)
    return l1 < l2 < r1 < r2 or l2 < l1 < r2 < r1


def is_projective(tree) -> bool:
    """No two arcs (root arcs from position 0 included) cross."""
    spans = sorted((min(h, d), max(h, d)) for d, h in enumerate(_heads_of(tree), 1))
    for i, (a, b) in enumerate(spans):
        for c, d in spans[i + 1:]:
            if c >= b:
                break
            if a < c < b < d:
                return False
    return True


def _depth(heads: Sequence[int], node: int) -> int:
    depth = 0
    while node != 0:
        node = heads[node - 1]
        depth += 1
    return depth


def _dominates(heads: Sequence[int], anc: int, node: int) -> bool:
    while node != 0:
        if node == anc:
            return True
        node = heads[node - 1]
    return anc == 0


def nonprojective_arcs(heads: Sequence[int]) -> list[int]:
    """Dependents whose incoming arc spans a node not dominated by the arc's head."""
    out = []
    for d, h in enumerate(heads, 1):
        lo, hi = min(h, d), max(h, d)
        if any(not _dominates(heads, h, m) for m in range(lo + 1, hi)):
            out.append(d)
    return out


def projectivize(tree: DepTree) -> DepTree:
    """Lift non-projective arcs to the grandparent until the tree is projective.

    The shortest offending arc is lifted first (leftmost dependent on ties).
    Deprels are left untouched.
    """
    heads = tree.heads
    changed = False
    while True:
        bad = nonprojective_arcs(heads)
        if not bad:
            break
        d = min(bad, key=lambda d: (abs(heads[d - 1] - d), d))
        heads[d - 1] = heads[heads[d - 1] - 1]
        changed = True
    return tree.with_heads(heads) if changed else tree


@dataclass(frozen=True)
class TreebankStats:
    n_sentences: int
    n_tokens: int
    pct_left_arcs: float
    pct_right_arcs: float
    pct_nonprojective_sentences: float

    def as_dict(self) -> dict:
        return {
            "n_sentences": self.n_sentences,
            "n_tokens": self.n_tokens,
            "pct_left_arcs": self.pct_left_arcs,
            "pct_right_arcs": self.pct_right_arcs,
            "pct_nonprojective_sentences": self.pct_nonprojective_sentences,
        }


def branching_stats(trees: Iterable[DepTree]) -> TreebankStats:
    """Arc direction percentages; root arcs count as right-pointing."""
    n_sent = n_tok = left = nonproj = 0
    for tree in trees:
        n_sent += 1
        for t in tree.tokens:
            n_tok += 1
            if t.head > t.id:
                left += 1
        if not is_projective(tree):
            nonproj += 1
    if n_tok == 0:
        raise ValueError("branching statistics need at least one token")
    pct_left = 100.0 * left / n_tok
    return TreebankStats(n_sent, n_tok, pct_left, 100.0 * (n_tok - left) / n_tok, 100.0 * nonproj / n_sent)
