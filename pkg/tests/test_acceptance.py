"""Acceptance suite: one test per criterion, each printing a PASS/FAIL/SKIP line.

Run with ``pytest tests/test_acceptance.py -v -s`` to watch the lines scroll by;
they are written straight to the terminal either way.
"""
from __future__ import annotations

import os
import random
import time
from pathlib import Path

import pytest

from increparse.arceager import run_oracle
from increparse.cli import main
from increparse.conllu import (DepTree, branching_stats, is_projective, projectivize, read_conllu,
                               tree_problem)
from increparse.encodings import Scheme, coverage, decode, encode, forward_looking
from increparse.evaluation import baseline_parse, displacement_curve, score, uas_from_curve
from increparse.parser import ARC_EAGER, parse_treebank, train_parser
from increparse.synth import generate

from harness import perturbation_trials
from treegen import (PUD, RELS, TAGS, all_head_lists, brute_two_colorable, load_pud, make_tree,
                     random_heads, random_projective_heads, same_direction_conflicts)

SCHEMES = [s.value for s in Scheme] + [ARC_EAGER]
NON_FORWARD = ["1p", "2p", ARC_EAGER]
EPOCHS = 5


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def _corpus_split():
    trees = generate(6500, seed=1)
    return trees[:5000], trees[5000:5500], trees[5500:]


@pytest.fixture(scope="module")
def synthetic():
    return _corpus_split()


# 1 ------------------------------------------------------------------------------

def test_criterion_1_round_trip(report):
    start = time.perf_counter()
    rng = random.Random(1)
    trees = [make_tree(h, rng) for n in range(1, 6) for h in all_head_lists(n)]
    trees += [make_tree(random_heads(rng.randint(1, 40), rng), rng) for _ in range(1000)]
    failures = sum(decode(encode(t, s)) != t for t in trees for s in ("abs", "rel", "pos"))
    elapsed = time.perf_counter() - start
    report(1, failures == 0 and elapsed < 60,
           f"{len(trees)} trees x 3 schemes, failures {failures}, {elapsed:.1f}s (limit 60s)")


# 2 ------------------------------------------------------------------------------

def _criterion_2_trees():
    for n in range(1, 7):
        yield from all_head_lists(n)
    rng = random.Random(2)
    for n in (7, 8):
        for _ in range(4000):
            yield random_heads(n, rng)


def test_criterion_2_bracket_completeness(report):
    checked_1p = checked_2p = failures = 0
    for heads in _criterion_2_trees():
        tree = make_tree(heads)
        if not same_direction_conflicts(heads):
            checked_1p += 1
            failures += coverage(tree, "1p") != 1.0
        if brute_two_colorable(heads):
            checked_2p += 1
            failures += coverage(tree, "2p") != 1.0
    report(2, failures == 0,
           f"1p on {checked_1p} conflict-free trees, 2p on {checked_2p} bipartite trees "
           f"(exhaustive n<=6, 4000 random each for n=7,8), failures {failures}")


# 3 ------------------------------------------------------------------------------

def test_criterion_3_oracle(report):
    rng = random.Random(3)
    golds = [make_tree(h, rng) for n in range(1, 6) for h in all_head_lists(n)]
    for _ in range(1000):
        n = rng.randint(1, 40)
        golds.append(make_tree(random_projective_heads(n, rng), rng))
        golds.append(make_tree(random_heads(n, rng), rng))
    failures = n_proj = 0
    for gold in golds:
        proj = is_projective(gold)
        n_proj += proj
        expected = gold if proj else projectivize(gold)
        failures += run_oracle(gold)[1] != expected
    report(3, failures == 0,
           f"{n_proj} projective + {len(golds) - n_proj} non-projective trees, failures {failures}")


# 4 ------------------------------------------------------------------------------

def test_criterion_4_strong_incrementality(report, tmp_path, capsys):
    start = time.perf_counter()
    bad = []
    n_sent = len(read_conllu(PUD))
    for scheme in SCHEMES:
        for k in (0, 1, 2):
            code = main(["verify", str(PUD), "--scheme", scheme, "--delay", str(k),
                         "--out", str(tmp_path / "v.tsv")])
            if code != 0:
                bad.append(f"{scheme}/k={k}")
    capsys.readouterr()
    elapsed = time.perf_counter() - start
    report(4, not bad and elapsed < 300 and n_sent >= 500,
           f"{len(SCHEMES)} pipelines x k in 0..2 on {n_sent} sentences, "
           f"failing runs {bad or 'none'}, {elapsed:.1f}s (limit 300s)")


# 5 ------------------------------------------------------------------------------

def test_criterion_5_information_contract(report):
    corpus = generate(400, seed=5)
    totals = {}
    for scheme in SCHEMES:
        for k in (0, 1, 2):
            # predicted PoS at k=1 exercises the lazy tagger path
            parser = train_parser(corpus[:150], scheme, k, epochs=2, seed=1, gold_pos=(k != 1))
            totals[scheme, k] = perturbation_trials(parser, corpus, trials=1000, seed=100 + k)
    leaks = {f"{s}/k={k}": v for (s, k), v in totals.items() if v}
    report(5, not leaks,
           f"1000 trials for each of {len(totals)} (scheme, k) pairs, violations {leaks or 0}")


# 6 ------------------------------------------------------------------------------

# left-arc percentages per treebank, keyed by the UD file prefix
REFERENCE_LEFT_ARCS = {
    "ar_padt": 30.46, "eu_bdt": 49.22, "zh_gsd": 63.67, "en_ewt": 57.18,
    "fr_gsd": 54.72, "hi_hdtb": 55.6, "id_gsd": 37.75, "mr_ufal": 51.34,
    "es_ancora": 54.43, "ta_ttb": 68.56, "te_mtg": 54.28, "vi_vtb": 40.99,
}


def test_criterion_6_branching_statistics(report, capsys):
    root = os.environ.get("INCREPARSE_UD_DIR")
    found = {}
    if root:
        for code in REFERENCE_LEFT_ARCS:
            files = sorted(Path(root).rglob(f"{code}-ud-*.conllu"))
            if files:
                found[code] = files
    if len(found) < 2:
        with capsys.disabled():
            print("\n[criterion 6] SKIP needs two UD 2.11 treebanks under INCREPARSE_UD_DIR "
                  f"(found {sorted(found) or 'none'})")
        pytest.skip("UD treebanks not available")
    deltas = {}
    for code, files in found.items():
        trees = [t for f in files for t in read_conllu(f, skip_invalid=True)]
        deltas[code] = branching_stats(trees).pct_left_arcs - REFERENCE_LEFT_ARCS[code]
    worst = max(abs(d) for d in deltas.values())
    report(6, worst <= 0.5,
           "left-arc deltas " + ", ".join(f"{c} {d:+.2f}" for c, d in sorted(deltas.items())))


# 7 ------------------------------------------------------------------------------

def test_criterion_7_learning_beats_baseline(report, synthetic):
    start = time.perf_counter()
    train, dev, test = synthetic
    dev_uas, models = {}, {}
    for scheme in NON_FORWARD:
        models[scheme] = train_parser(train, scheme, 2, epochs=EPOCHS, seed=1, gold_pos=True)
        dev_uas[scheme] = score(dev, parse_treebank(models[scheme], dev)).uas
    best = max(NON_FORWARD, key=lambda s: dev_uas[s])
    uas = score(test, parse_treebank(models[best], test)).uas
    base = score(test, baseline_parse(test, "right-branching")).uas
    elapsed = time.perf_counter() - start
    gap = 100 * (uas - base)
    report(7, gap >= 15 and elapsed < 1800,
           f"synthetic {len(train)}/{len(dev)}/{len(test)}, best on dev {best} "
           f"(dev {', '.join(f'{s} {100 * v:.2f}' for s, v in dev_uas.items())}), "
           f"test UAS {100 * uas:.2f} vs right-branching {100 * base:.2f} "
           f"(+{gap:.2f}, need +15), {elapsed:.0f}s (limit 1800s)")


# 8 ------------------------------------------------------------------------------

def _delay_table(train, held_out):
    table = {}
    for scheme in SCHEMES:
        for k in (0, 2):
            parser = train_parser(train, scheme, k, epochs=EPOCHS, seed=1, gold_pos=True)
            table[scheme, k] = 100 * score(held_out, parse_treebank(parser, held_out)).uas
    return table


def test_criterion_8_delay_ordering(report, synthetic):
    train, dev, _ = synthetic
    pud = load_pud()
    banks = {"synthetic": _delay_table(train[:2000], dev), "cs_pud": _delay_table(pud[:800], pud[800:])}
    drops, lines, pattern = [], [], []
    for name, table in banks.items():
        gain = {s: table[s, 2] - table[s, 0] for s in SCHEMES}
        drops += [f"{name}/{s}" for s in SCHEMES if table[s, 2] < table[s, 0] - 0.5]
        fwd = [gain[s] for s in SCHEMES if s != ARC_EAGER and forward_looking(s)]
        rest = [gain[s] for s in SCHEMES if s == ARC_EAGER or not forward_looking(s)]
        mean_fwd, mean_rest = sum(fwd) / len(fwd), sum(rest) / len(rest)
        pattern.append(mean_fwd > mean_rest)
        lines.append(f"{name}: " + ", ".join(f"{s} {table[s, 0]:.1f}->{table[s, 2]:.1f}" for s in SCHEMES)
                     + f"; mean gain fwd {mean_fwd:+.2f} vs other {mean_rest:+.2f}")
    report(8, not drops and any(pattern),
           f"drops beyond 0.5 {drops or 'none'}; " + " | ".join(lines))


# 9 ------------------------------------------------------------------------------

def _fuzz_pair(rng: random.Random) -> tuple[DepTree, DepTree]:
    n = rng.randint(1, 30)
    gold = make_tree(random_heads(n, rng), rng)
    heads = random_heads(n, rng)
    for d in range(n):  # pull the random tree toward gold where that keeps it a tree
        if rng.random() < 0.6:
            trial = heads[:d] + [gold.heads[d]] + heads[d + 1:]
            if tree_problem(trial) is None:
                heads = trial
    rels = [r if rng.random() < 0.6 else rng.choice(RELS) for r in gold.deprels]
    pred = DepTree.from_heads(heads, rels, forms=gold.forms, upos=[rng.choice(TAGS) for _ in range(n)])
    return gold, pred


def test_criterion_9_metric_identities(report):
    rng = random.Random(9)
    pairs = [_fuzz_pair(rng) for _ in range(10_000)]
    golds = [g for g, _ in pairs]
    preds = [p for _, p in pairs]
    identity = score(golds, golds)
    bad_identity = identity.uas != 1.0 or identity.las != 1.0
    bad_order = sum(score([g], [p]).las > score([g], [p]).uas for g, p in pairs)
    corpus = score(golds, preds)
    recombined = [uas_from_curve(displacement_curve(golds, preds, merge_tails=m)) for m in (True, False)]
    bad_recombine = any(r != corpus.uas for r in recombined)
    report(9, not (bad_identity or bad_order or bad_recombine),
           f"score(t,t)={identity.uas:.1f}/{identity.las:.1f}, las>uas in {bad_order} of {len(pairs)} pairs, "
           f"bucket UAS {recombined[0]:.6f} vs corpus {corpus.uas:.6f}")
