"""Seeded generator for a synthetic English-like UD treebank.

Used as a stand-in corpus when no large UD treebank is available. The
grammar mixes head-final noun phrases (determiners and stacked adjectives
before the noun), head-initial verb phrases, lexically conditioned PP
attachment, relative and subordinate clauses, coordination, and occasional
extraposed relative clauses that produce non-projective arcs.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .conllu import DepTree, Token

ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "pl"]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ou"]


@dataclass
class _Node:
    form: str
    upos: str
    deprel: str = "dep"
    head: "_Node | None" = None
    index: int = 0


@dataclass
class _Lexicon:
    rng: random.Random
    words: dict = field(default_factory=dict)

    def build(self):
        rng = self.rng
        seen: set = set()

        def coin(suffix, syll):
            for attempt in range(10_000):
                n_syll = syll + attempt // 20  # short forms run out
                w = "".join(rng.choice(ONSETS) + rng.choice(VOWELS) for _ in range(n_syll)) + suffix
                if w not in seen:
                    seen.add(w)
                    return w
            raise RuntimeError("lexicon exhausted")

        def many(n, suffixes, syll=(1, 3)):
            return [coin(rng.choice(suffixes), rng.randint(*syll)) for _ in range(n)]

        nouns = many(900, ["on", "er", "ity", "ment", "", "", "ness"])
        self.words = {
            # nouns split by whether they readily take a PP modifier
            "NOUN_nmod": nouns[:300],
            "NOUN": nouns[300:],
            "VERB_tr": many(250, ["ed", "s", "es", "ize", ""]),
            "VERB_in": many(150, ["ed", "s", "", "ate"]),
            "ADJ": many(300, ["ous", "al", "ive", "ic", "y", ""]),
            "ADV": many(60, ["ly"]) + ["very", "often", "now"],
            "PROPN": [w.capitalize() for w in many(200, ["", "o", "a"], (2, 3))],
            "DET": ["the", "a", "this", "that", "every", "some", "these"],
            "PRON": ["he", "she", "it", "they", "we", "you", "i"],
            "REL": ["who", "which", "that"],
            "ADP_v": ["in", "on", "at", "during", "with", "after"],
            "ADP_n": ["of", "for", "about", "with"],
            "AUX": ["will", "can", "has", "was", "is", "might", "must"],
            "PART": ["not"],
            "SCONJ": ["because", "if", "while", "although", "when"],
            "COMP": ["that"],
            "CCONJ": ["and", "or", "but"],
            "NUM": ["two", "three", "ten", "forty", "1999", "12"],
        }
        # noun/verb ambiguous forms so tagging needs context
        shared = many(60, ["", "s"])
        self.words["NOUN"] += shared
        self.words["VERB_tr"] += shared[:30]
        self.words["VERB_in"] += shared[30:]
        self._zipf = {k: self._weights(len(v)) for k, v in self.words.items()}
        return self

    @staticmethod
    def _weights(n):
        return [1.0 / (r + 1) ** 1.05 for r in range(n)]

    def pick(self, cls):
        return self.rng.choices(self.words[cls], weights=self._zipf[cls])[0]


class Generator:
    def __init__(self, seed: int = 1, max_depth: int = 3):
        self.rng = random.Random(seed)
        self.lex = _Lexicon(self.rng).build()
        self.max_depth = max_depth

    def node(self, cls, upos, rel):
        return _Node(self.lex.pick(cls), upos, rel)

    def adj_phrase(self, noun):
        out = []
        if self.rng.random() < 0.12:
            adv = self.node("ADV", "ADV", "advmod")
            out.append(adv)
        adj = self.node("ADJ", "ADJ", "amod")
        adj.head = noun
        for n in out:
            n.head = adj
        return out + [adj]

    def noun_phrase(self, rel, depth, allow_pp=True):
        """Return (nodes in order, head node)."""
        r = self.rng.random()
        if r < 0.18:
            head = self.node("PRON", "PRON", rel)
            return [head], head
        if r < 0.28:
            head = self.node("PROPN", "PROPN", rel)
            nodes = [head]
            if self.rng.random() < 0.3:
                flat = self.node("PROPN", "PROPN", "flat")
                flat.head = head
                nodes.append(flat)
            return nodes, head
        nmod_noun = self.rng.random() < 0.35
        head = self.node("NOUN_nmod" if nmod_noun else "NOUN", "NOUN", rel)
        pre = []
        if self.rng.random() < 0.75:
            det = self.node("DET", "DET", "det")
            det.head = head
            pre.append(det)
        if self.rng.random() < 0.12:
            num = self.node("NUM", "NUM", "nummod")
            num.head = head
            pre.append(num)
        n_adj = 0
        while n_adj < 3 and self.rng.random() < (0.45 if n_adj == 0 else 0.3):
            pre += self.adj_phrase(head)
            n_adj += 1
        nodes = pre + [head]
        if allow_pp and depth < self.max_depth and self.rng.random() < (0.55 if nmod_noun else 0.06):
            nodes += self.pp(head, "nmod", "ADP_n", depth + 1)
        if depth < self.max_depth and self.rng.random() < 0.07:
            nodes += self.relative(head, depth + 1)
        return nodes, head

    def pp(self, attach, rel, adp_cls, depth):
        nodes, noun = self.noun_phrase(rel, depth, allow_pp=depth < self.max_depth)
        noun.head = attach
        adp = self.node(adp_cls, "ADP", "case")
        adp.head = noun
        return [adp] + nodes

    def relative(self, noun, depth):
        rel_pron = self.node("REL", "PRON", "nsubj")
        nodes = [rel_pron]
        verb, vp = self.verb_phrase(depth, subject_nodes=[], with_aux=self.rng.random() < 0.2)
        verb.deprel = "acl:relcl"
        verb.head = noun
        rel_pron.head = verb
        return nodes + vp

    def verb_phrase(self, depth, subject_nodes, with_aux):
        transitive = self.rng.random() < 0.65
        verb = self.node("VERB_tr" if transitive else "VERB_in", "VERB", "root")
        nodes = list(subject_nodes)
        if with_aux:
            aux = self.node("AUX", "AUX", "aux")
            aux.head = verb
            nodes.append(aux)
            if self.rng.random() < 0.15:
                neg = self.node("PART", "PART", "advmod")
                neg.head = verb
                nodes.append(neg)
        nodes.append(verb)
        if transitive:
            obj_nodes, obj = self.noun_phrase("obj", depth)
            obj.head = verb
            nodes += obj_nodes
        n_pp = 0
        while depth < self.max_depth and n_pp < 2 and self.rng.random() < 0.35:
            nodes += self.pp(verb, "obl", "ADP_v", depth + 1)
            n_pp += 1
        if self.rng.random() < 0.15:
            adv = self.node("ADV", "ADV", "advmod")
            adv.head = verb
            nodes.append(adv)
        return verb, nodes

    def clause(self, depth):
        nodes = []
        fronted = []
        if self.rng.random() < 0.12:
            fronted.append(self.node("ADV", "ADV", "advmod"))
        subj_nodes, subj = self.noun_phrase("nsubj", depth)
        extraposed = []
        if depth < self.max_depth and self.rng.random() < 0.05 and subj.upos == "NOUN":
            extraposed = self.relative(subj, depth + 1)
        verb, vp = self.verb_phrase(depth, subj_nodes, with_aux=self.rng.random() < 0.3)
        subj.head = verb
        for f in fronted:
            f.head = verb
        nodes = fronted + vp + extraposed
        if depth < self.max_depth and self.rng.random() < 0.1:
            cc = self.node("CCONJ", "CCONJ", "cc")
            v2, vp2 = self.verb_phrase(depth + 1, [], with_aux=False)
            v2.deprel = "conj"
            v2.head = verb
            cc.head = v2
            nodes += [cc] + vp2
        if depth < self.max_depth and self.rng.random() < 0.18:
            if self.rng.random() < 0.5:
                mark = self.node("SCONJ", "SCONJ", "mark")
                rel = "advcl"
            else:
                mark = self.node("COMP", "SCONJ", "mark")
                rel = "ccomp"
            sub_verb, sub_nodes = self.clause(depth + 1)
            sub_verb.deprel = rel
            sub_verb.head = verb
            mark.head = sub_verb
            nodes += [mark] + sub_nodes
        return verb, nodes

    def sentence(self) -> list[_Node]:
        verb, nodes = self.clause(0)
        verb.deprel = "root"
        verb.head = None
        punct = _Node(".", "PUNCT", "punct", verb)
        return nodes + [punct]


def generate(n_sentences: int, seed: int = 1, max_len: int = 40) -> list[DepTree]:
    gen = Generator(seed)
    out = []
    while len(out) < n_sentences:
        nodes = gen.sentence()
        if len(nodes) > max_len:
            continue
        for i, nd in enumerate(nodes, 1):
            nd.index = i
        tokens = tuple(Token(nd.index, nd.form, nd.upos, nd.head.index if nd.head else 0, nd.deprel)
                       for nd in nodes)
        sid = f"synth-{seed}-{len(out) + 1}"
        out.append(DepTree(tokens, sid, (f"# sent_id = {sid}",)))
    return out
