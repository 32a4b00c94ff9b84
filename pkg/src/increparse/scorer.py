"""Averaged multiclass perceptron and left-to-right feature templates.

Every feature extracted at position i with delay k is built from tokens
w_1..w_{i+k} only. Sentence edges beyond the window show up as boundary
symbols, never as real tokens.
"""
from __future__ import annotations

import gzip
import io
import json
import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

LEFT_CONTEXT = 3
BOS, EOS, NONE = "<s>", "</s>", "<none>"
MAGIC = "increparse-model"
FORMAT_VERSION = 1


def _norm(form: str) -> str:
    if any(ch.isdigit() for ch in form):
        return "<num>"
    return form.lower()


def _shape(form: str) -> str:
    out = []
    for ch in form[:6]:
        c = "X" if ch.isupper() else "x" if ch.islower() else "d" if ch.isdigit() else ch
        if not out or out[-1] != c:
            out.append(c)
    return "".join(out)


def extract_features_sl(forms: Sequence[str], upos: Sequence[str] | None, i: int, k: int,
                        prev: Sequence[str] = (), pos_until: int | None = None) -> list[str]:
    """Features for the label of token ``i`` (1-based) with delay ``k``.

    ``pos_until`` is the last position whose tag may be used; it defaults to
    i + k, i.e. tags are treated as part of the input tokens.
    """
    n = len(forms)
    limit = i + k
    if pos_until is None:
        pos_until = limit
    pos_until = min(pos_until, limit)

    def word(j):
        if j < 1:
            return BOS
        if j > n:
            return EOS
        return _norm(forms[j - 1])

    def tag(j):
        if j < 1:
            return BOS
        if j > n:
            return EOS
        if upos is None or j > pos_until:
            return NONE
        return upos[j - 1]

    feats = ["bias", f"i={min(i, 40)}"]
    for j in range(i - LEFT_CONTEXT, limit + 1):
        o = j - i
        feats.append(f"w{o}={word(j)}")
        feats.append(f"p{o}={tag(j)}")
        if 1 <= j <= n and -1 <= o:
            form = forms[j - 1]
            feats.append(f"s{o}={form[-3:].lower()}")
            if o >= 0:
                feats.append(f"h{o}={_shape(form)}")
    p0 = tag(i)
    feats.append(f"p-1p0={tag(i - 1)}|{p0}")
    feats.append(f"p-2p-1p0={tag(i - 2)}|{tag(i - 1)}|{p0}")
    feats.append(f"w0p0={word(i)}|{p0}")
    feats.append(f"i|p0={min(i, 40)}|{p0}")
    if k >= 1:
        feats.append(f"p0p1={p0}|{tag(i + 1)}")
        feats.append(f"w0w1={word(i)}|{word(i + 1)}")
        feats.append(f"p-1p0p1={tag(i - 1)}|{p0}|{tag(i + 1)}")
        feats.append(f"i|p0p1={min(i, 40)}|{p0}|{tag(i + 1)}")
    if k >= 2:
        feats.append(f"p0p1p2={p0}|{tag(i + 1)}|{tag(i + 2)}")
        feats.append(f"p1p2={tag(i + 1)}|{tag(i + 2)}")
    l1 = prev[-1] if prev else BOS
    l2 = prev[-2] if len(prev) > 1 else BOS
    feats.append(f"l-1={l1}")
    feats.append(f"l-2l-1={l2}|{l1}")
    feats.append(f"l-1p0={l1}|{p0}")
    return feats


def extract_features_tb(forms: Sequence[str], upos: Sequence[str] | None, c, k: int,
                        prev: str | None = None, pos_until: int | None = None) -> list[str]:
    """Features for an arc-eager configuration.

    Only the first stack word, buffer words b..b+k and arcs already built are
    consulted.
    """
    n = len(forms)
    s, b = c.top, c.buffer_front
    limit = b + k
    if pos_until is None:
        pos_until = limit
    pos_until = min(pos_until, limit)

    def word(j):
        if j == 0:
            return "<root>"
        if j > n:
            return EOS
        return _norm(forms[j - 1])

    def tag(j):
        if j == 0:
            return "<root>"
        if j > n:
            return EOS
        if upos is None or j > pos_until:
            return NONE
        return upos[j - 1]

    head_rel = NONE
    s_deps = []
    b_deps = []
    for h, d, r in c.arcs:
        if d == s:
            head_rel = r or "dep"
        if h == s:
            s_deps.append((d, r))
        elif h == b:
            b_deps.append((d, r))
    s_deps.sort()
    b_deps.sort()
    sw, sp = word(s), tag(s)
    bw, bp = word(b), tag(b)
    dist = min(b - s, 6) if b <= n else -1
    feats = [
        "bias", f"sw={sw}", f"sp={sp}", f"swp={sw}|{sp}", f"sr={head_rel}",
        f"bw={bw}", f"bp={bp}", f"bwp={bw}|{bp}",
        f"sp|bp={sp}|{bp}", f"sw|bp={sw}|{bp}", f"sp|bw={sp}|{bw}", f"sw|bw={sw}|{bw}",
        f"sr|bp={head_rel}|{bp}", f"dist={dist}", f"dist|sp|bp={dist}|{sp}|{bp}",
        f"sld={s_deps[0][1] if s_deps else NONE}", f"srd={s_deps[-1][1] if s_deps else NONE}",
        f"bld={b_deps[0][1] if b_deps else NONE}", f"snd={min(len(s_deps), 3)}",
        f"prev={prev or BOS}", f"prev|bp={prev or BOS}|{bp}",
    ]
    if 1 <= b <= n:
        feats.append(f"bs={forms[b - 1][-3:].lower()}")
    if s >= 1:
        feats.append(f"ss={forms[s - 1][-3:].lower()}")
    for o in range(1, k + 1):
        j = b + o
        feats.append(f"b{o}w={word(j)}")
        feats.append(f"b{o}p={tag(j)}")
        feats.append(f"sp|bp|b{o}p={sp}|{bp}|{tag(j)}")
    if k >= 1:
        feats.append(f"bp|b1p={bp}|{tag(b + 1)}")
    return feats


def extract_features_pos(forms: Sequence[str], i: int, k: int, prev: Sequence[str] = ()) -> list[str]:
    n = len(forms)

    def word(j):
        return BOS if j < 1 else EOS if j > n else _norm(forms[j - 1])

    form = forms[i - 1]
    feats = ["bias", f"w0={word(i)}", f"s1={form[-1:].lower()}", f"s2={form[-2:].lower()}",
             f"s3={form[-3:].lower()}", f"pre2={form[:2].lower()}", f"shape={_shape(form)}",
             f"w-1={word(i - 1)}", f"w-2={word(i - 2)}", f"s3-1={word(i - 1)[-3:]}"]
    for o in range(1, k + 1):
        feats.append(f"w{o}={word(i + o)}")
        feats.append(f"s3{o}={word(i + o)[-3:]}")
    t1 = prev[-1] if prev else BOS
    t2 = prev[-2] if len(prev) > 1 else BOS
    feats += [f"t-1={t1}", f"t-2t-1={t2}|{t1}", f"t-1w0={t1}|{word(i)}"]
    if k >= 1:
        feats.append(f"w0w1={word(i)}|{word(i + 1)}")
    return feats


# -- perceptron ------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    features: tuple[str, ...]
    label: str
    target: str
    delay: int


class ModelError(ValueError):
    pass


@dataclass
class Model:
    """Averaged weights plus the closed class vocabulary."""

    target: str
    delay: int
    classes: list[str]
    weights: dict[str, dict[int, float]] = field(default_factory=dict)
    history: list[float] = field(default_factory=list)

    def scores(self, features: Iterable[str]) -> list[float]:
        totals = [0.0] * len(self.classes)
        w = self.weights
        for f in features:
            row = w.get(f)
            if row:
                for c, v in row.items():
                    totals[c] += v
        return totals

    def predict_index(self, features: Iterable[str], legal: Sequence[bool] | None = None) -> int:
        totals = self.scores(features)
        best, best_score = -1, 0.0
        for c, s in enumerate(totals):
            if legal is not None and not legal[c]:
                continue
            if best < 0 or s > best_score:
                best, best_score = c, s
        if best < 0:
            raise ModelError("no legal class to predict")
        return best

    def predict(self, features: Iterable[str], legal: Sequence[bool] | None = None) -> str:
        return self.classes[self.predict_index(features, legal)]

    # serialization: one header line, then one line per feature row
    def dump(self, out: io.TextIOBase) -> None:
        header = {"target": self.target, "delay": self.delay, "classes": self.classes,
                  "history": self.history, "rows": len(self.weights)}
        out.write(json.dumps(header, sort_keys=True) + "\n")
        for feat in sorted(self.weights):
            row = self.weights[feat]
            cells = " ".join(f"{c}:{row[c]!r}" for c in sorted(row))
            out.write(f"{json.dumps(feat)}\t{cells}\n")

    @classmethod
    def load(cls, lines) -> "Model":
        header = json.loads(next(lines))
        weights = {}
        for _ in range(header["rows"]):
            feat, cells = next(lines).rstrip("\n").split("\t")
            row = {}
            for cell in cells.split():
                c, v = cell.split(":", 1)
                row[int(c)] = float(v)
            weights[json.loads(feat)] = row
        return cls(header["target"], header["delay"], header["classes"], weights, header["history"])


def train(corpus: Sequence[Instance], epochs: int = 5, seed: int = 1) -> Model:
    """Train an averaged perceptron; deterministic for a given seed."""
    if not corpus:
        raise ModelError("empty training corpus")
    targets = {(x.target, x.delay) for x in corpus}
    if len(targets) > 1:
        raise ModelError(f"instances mix targets/delays: {sorted(targets)}")
    target, delay = next(iter(targets))
    counts = Counter(x.label for x in corpus)
    classes = sorted(counts, key=lambda c: (-counts[c], c))
    index = {c: i for i, c in enumerate(classes)}
    nclass = len(classes)

    weights: dict[str, dict[int, float]] = defaultdict(dict)
    totals: dict[tuple[str, int], float] = defaultdict(float)
    stamps: dict[tuple[str, int], int] = defaultdict(int)
    step = 0

    def score(feats):
        out = [0.0] * nclass
        for f in feats:
            row = weights.get(f)
            if row:
                for c, v in row.items():
                    out[c] += v
        return out

    def bump(f, c, v):
        key = (f, c)
        w = weights[f].get(c, 0.0)
        totals[key] += (step - stamps[key]) * w
        stamps[key] = step
        weights[f][c] = w + v

    order = list(range(len(corpus)))
    rng = random.Random(seed)
    history = []
    for epoch in range(epochs):
        rng.shuffle(order)
        correct = 0
        for idx in order:
            inst = corpus[idx]
            gold = index[inst.label]
            s = score(inst.features)
            # a tie with the gold class counts as a mistake, so lucky tie-breaks still get updated
            rival = max((c for c in range(nclass) if c != gold), key=lambda c: (s[c], -c), default=None)
            if rival is None or s[gold] > s[rival]:
                correct += 1
            else:
                guess = rival
                for f in inst.features:
                    bump(f, gold, 1.0)
                    bump(f, guess, -1.0)
            step += 1
        acc = correct / len(corpus)
        history.append(acc)
        logger.info("%s delay=%d epoch %d: train acc %.4f", target, delay, epoch + 1, acc)

    averaged: dict[str, dict[int, float]] = {}
    for f, row in weights.items():
        avg_row = {}
        for c, w in row.items():
            key = (f, c)
            total = totals[key] + (step - stamps[key]) * w
            avg = total / step
            if avg:
                avg_row[c] = avg
        if avg_row:
            averaged[f] = avg_row
    return Model(target, delay, classes, averaged, history)


# -- model bundles -----------------------------------------------------------

def save_bundle(path, header: dict, models: dict[str, Model]) -> None:
    """Write a self-describing model file (gzip when the name ends in .gz)."""
    buf = io.StringIO()
    buf.write(f"{MAGIC} {FORMAT_VERSION}\n")
    meta = dict(header, components=sorted(models))
    buf.write(json.dumps(meta, sort_keys=True) + "\n")
    for name in sorted(models):
        buf.write(f"component {name}\n")
        models[name].dump(buf)
    data = buf.getvalue().encode("utf-8")
    if str(path).endswith(".gz"):
        with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as f:
            f.write(data)
    else:
        with open(path, "wb") as f:
            f.write(data)


def load_bundle(path) -> tuple[dict, dict[str, Model]]:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as f:
        lines = iter(f)
        first = next(lines, "").split()
        if len(first) != 2 or first[0] != MAGIC:
            raise ModelError(f"{path}: not an increparse model file")
        if int(first[1]) != FORMAT_VERSION:
            raise ModelError(f"{path}: unsupported model format version {first[1]}")
        header = json.loads(next(lines))
        models = {}
        for name in header["components"]:
            tag, _, got = next(lines).rstrip("\n").partition(" ")
            if tag != "component" or got != name:
                raise ModelError(f"{path}: expected component {name}, found {got!r}")
            models[name] = Model.load(lines)
    return header, models
