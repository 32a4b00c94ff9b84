"""Fully incremental parsers built on the perceptron scorer.

Both parsers read the sentence strictly left to right. At position i a
parser with delay k may look at tokens up to i + k; when PoS tags are
predicted, a tag for token j is only produced once tokens up to j + k have
been read, so label features use predicted tags for positions <= i only.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from . import arceager as ae
from .conllu import DepTree, Token, is_projective, projectivize
from .encodings import IncrementalDecoder, Scheme, encode
from .incrementality import TraceRecorder
from .scorer import (Instance, Model, ModelError, extract_features_pos, extract_features_sl,
                     extract_features_tb, load_bundle, save_bundle, train)

logger = logging.getLogger(__name__)

ARC_EAGER = "arc-eager"


class _NullRecorder:
    def at(self, position):
        pass

    def access(self, j):
        pass

    def commit(self, arcs):
        pass


def tag_pos(model: Model, forms: Sequence[str], k: int | None = None) -> list[str]:
    """Greedy left-to-right tagging; tag i sees tokens <= i + k and tags < i."""
    k = model.delay if k is None else k
    tags: list[str] = []
    for i in range(1, len(forms) + 1):
        tags.append(model.predict(extract_features_pos(forms, i, k, tags)))
    return tags


class _Tagger:
    """Lazily extends predicted tags as the parser's horizon grows."""

    def __init__(self, model: Model | None, forms, gold: Sequence[str] | None, k: int):
        self.model, self.forms, self.k = model, forms, k
        self.tags: list[str] = list(gold) if gold is not None else []
        self.gold = gold is not None

    def upto(self, j: int) -> list[str]:
        j = min(j, len(self.forms))
        while not self.gold and len(self.tags) < j:
            i = len(self.tags) + 1
            self.tags.append(self.model.predict(extract_features_pos(self.forms, i, self.k, self.tags)))
        return self.tags


@dataclass
class SequenceLabelingParser:
    scheme: Scheme
    delay: int
    labels: Model
    deprels: Model
    pos: Model | None = None
    gold_pos: bool = True

    kind = "sl"

    def parse(self, forms: Sequence[str], upos: Sequence[str] | None = None,
              recorder: TraceRecorder | None = None, sentence_id: str | None = None) -> DepTree:
        tree, _ = self.parse_with_labels(forms, upos, recorder, sentence_id)
        return tree

    def parse_with_labels(self, forms, upos=None, recorder=None, sentence_id=None):
        rec = recorder or _NullRecorder()
        k = self.delay
        n = len(forms)
        use_gold = self.gold_pos
        if use_gold and upos is None:
            raise ModelError("this model needs gold PoS tags")
        tagger = _Tagger(self.pos, forms, upos if use_gold else None, k)
        dec = IncrementalDecoder(self.scheme)
        labels: list[str] = []
        rels: list[str] = []
        for i in range(1, n + 1):
            rec.at(i)
            rec.access(i + k)
            tags = tagger.upto(i)
            pos_until = i + k if use_gold else i
            feats = extract_features_sl(forms, tags, i, k, labels, pos_until)
            lab = self.labels.predict(feats)
            rel = self.deprels.predict(feats + [f"lab={lab}", f"lab|p0={lab}|{tags[i - 1]}"])
            labels.append(lab)
            rels.append(rel)
            dec.feed(lab, tags[i - 1])
            rec.commit(dec.arcs)
        heads = dec.finish()
        tags = tagger.upto(n)
        tokens = tuple(Token(i, forms[i - 1], tags[i - 1], h,
                             "root" if h == 0 else (rels[i - 1] if rels[i - 1] != "root" else "dep"))
                       for i, h in enumerate(heads, 1))
        return DepTree(tokens, sentence_id), labels


@dataclass
class ArcEagerParser:
    delay: int
    transitions: Model
    pos: Model | None = None
    gold_pos: bool = True

    kind = "tb"
    scheme = ARC_EAGER

    def parse(self, forms: Sequence[str], upos: Sequence[str] | None = None,
              recorder: TraceRecorder | None = None, sentence_id: str | None = None) -> DepTree:
        rec = recorder or _NullRecorder()
        k = self.delay
        n = len(forms)
        if self.gold_pos and upos is None:
            raise ModelError("this model needs gold PoS tags")
        tagger = _Tagger(self.pos, forms, upos if self.gold_pos else None, k)
        classes = self.transitions.classes
        parsed = [ae.Transition.parse(c) for c in classes]
        c = ae.initial_config(n)
        prev = None
        while not c.terminal:
            b = c.buffer_front
            rec.at(b)
            rec.access(b + k)
            tags = tagger.upto(b)
            pos_until = b + k if self.gold_pos else b
            feats = extract_features_tb(forms, tags, c, k, prev, pos_until)
            legal_kinds = ae.legal_transitions(c, single_root=True, complete=True)
            mask = [t.kind in legal_kinds for t in parsed]
            if not any(mask):
                # tiny training sets may lack every legal class
                t = ae.Transition(ae.SHIFT)
            else:
                t = parsed[self.transitions.predict_index(feats, mask)]
            c = ae.apply_transition(c, t)
            prev = str(t)
            rec.commit(c.unlabeled())
        heads = ae.finalize(c)
        tags = tagger.upto(n)
        rels = {d: r for _, d, r in c.arcs}
        tokens = []
        for i, h in enumerate(heads, 1):
            rel = rels.get(i) or "dep"
            if h == 0:
                rel = "root"
            elif rel == "root":
                rel = "dep"
            tokens.append(Token(i, forms[i - 1], tags[i - 1], h, rel))
        return DepTree(tuple(tokens), sentence_id)


# -- training -----------------------------------------------------------------

def pos_instances(trees: Sequence[DepTree], k: int) -> list[Instance]:
    out = []
    for tree in trees:
        forms, tags = tree.forms, tree.upos
        for i in range(1, len(tree) + 1):
            out.append(Instance(tuple(extract_features_pos(forms, i, k, tags[:i - 1])), tags[i - 1], "pos", k))
    return out


def sl_instances(trees: Sequence[DepTree], scheme: Scheme, k: int, gold_pos: bool = True):
    labels_out, rels_out = [], []
    target = f"labels:{scheme.value}"
    for tree in trees:
        seq = encode(tree, scheme)
        strings = seq.strings()
        forms, tags = tree.forms, tree.upos
        for i in range(1, len(tree) + 1):
            pos_until = i + k if gold_pos else i
            feats = extract_features_sl(forms, tags, i, k, strings[:i - 1], pos_until)
            lab = strings[i - 1]
            labels_out.append(Instance(tuple(feats), lab, target, k))
            rel_feats = feats + [f"lab={lab}", f"lab|p0={lab}|{tags[i - 1]}"]
            rels_out.append(Instance(tuple(rel_feats), tree.deprels[i - 1], "deprels", k))
    return labels_out, rels_out


def tb_instances(trees: Sequence[DepTree], k: int, gold_pos: bool = True) -> list[Instance]:
    out = []
    for tree in trees:
        gold = tree if is_projective(tree) else projectivize(tree)
        forms, tags = tree.forms, tree.upos
        prev = None
        for c, t in ae.oracle_sequence(gold)[:-1]:
            pos_until = c.buffer_front + k if gold_pos else c.buffer_front
            feats = extract_features_tb(forms, tags, c, k, prev, pos_until)
            out.append(Instance(tuple(feats), str(t), ARC_EAGER, k))
            prev = str(t)
    return out


def train_parser(trees: Sequence[DepTree], scheme: str, delay: int, epochs: int = 5, seed: int = 1,
                 gold_pos: bool = True):
    """Train a full parser (label/transition model, deprels, optional tagger)."""
    if not trees:
        raise ModelError("empty training treebank")
    pos_model = None
    if not gold_pos:
        pos_model = train(pos_instances(trees, delay), epochs, seed)
    if scheme == ARC_EAGER:
        model = train(tb_instances(trees, delay, gold_pos), epochs, seed)
        return ArcEagerParser(delay, model, pos_model, gold_pos)
    sch = Scheme.parse(scheme)
    lab_inst, rel_inst = sl_instances(trees, sch, delay, gold_pos)
    return SequenceLabelingParser(sch, delay, train(lab_inst, epochs, seed), train(rel_inst, epochs, seed),
                                  pos_model, gold_pos)


def save_parser(parser, path) -> None:
    header = {"kind": parser.kind, "scheme": parser.scheme if parser.kind == "tb" else parser.scheme.value,
              "delay": parser.delay, "gold_pos": parser.gold_pos}
    models = {}
    if parser.kind == "tb":
        models["transitions"] = parser.transitions
    else:
        models["labels"] = parser.labels
        models["deprels"] = parser.deprels
    if parser.pos is not None:
        models["pos"] = parser.pos
    save_bundle(path, header, models)


def load_parser(path):
    header, models = load_bundle(path)
    pos = models.get("pos")
    if header["kind"] == "tb":
        return ArcEagerParser(header["delay"], models["transitions"], pos, header["gold_pos"])
    return SequenceLabelingParser(Scheme.parse(header["scheme"]), header["delay"], models["labels"],
                                  models["deprels"], pos, header["gold_pos"])


def parse_treebank(parser, trees: Sequence[DepTree]) -> list[DepTree]:
    out = []
    for tree in trees:
        pred = parser.parse(tree.forms, tree.upos if parser.gold_pos else None, sentence_id=tree.sentence_id)
        out.append(DepTree(pred.tokens, tree.sentence_id, tree.comments))
    return out
