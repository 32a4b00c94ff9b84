"""Command-line front end: ``increparse <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 contract violation.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from typing import Iterable, Sequence

from . import arceager as ae
from .conllu import (ConlluError, DepTree, TreeValidationError, branching_stats, parse_conllu, read_conllu,
                     write_conllu)
from .encodings import LabelError, LabelSequence, Scheme, coverage, decode, encode
from .evaluation import (AlignmentError, curve_csv, displacement_curve, score)
from .incrementality import (ContractViolation, ParseTrace, check_delay, check_monotonic,
                             record_trace, trace_gold_labels, trace_oracle)
from .parser import ARC_EAGER, load_parser, parse_treebank, save_parser, train_parser
from .scorer import ModelError

logger = logging.getLogger("increparse")

SCHEMES = ("abs", "rel", "pos", "1p", "2p", ARC_EAGER)
DEFAULT_SEED = 1

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONTRACT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            yield f


def _read(path: str, args, tokens_only: bool = False) -> list[DepTree]:
    if path == "-":
        return parse_conllu(sys.stdin, skip_invalid=getattr(args, "skip_invalid", False), tokens_only=tokens_only)
    return read_conllu(path, skip_invalid=getattr(args, "skip_invalid", False), tokens_only=tokens_only)


def _sid(tree: DepTree, i: int) -> str:
    return tree.sentence_id or f"s{i}"


# -- encode / decode -----------------------------------------------------------

def cmd_encode(args) -> int:
    trees = _read(args.input, args)
    with _output(args.out) as out:
        if args.scheme == ARC_EAGER:
            out.write("sentence_id\tstep\ttransition\tdeprel\n")
            for i, tree in enumerate(trees, 1):
                transitions, _ = ae.run_oracle(tree)
                out.write(ae.format_transitions(_sid(tree, i), transitions))
            return EXIT_OK
        scheme = Scheme.parse(args.scheme)
        out.write("sentence_id\ttoken_id\tform\tupos\tlabel\tdeprel\n")
        for i, tree in enumerate(trees, 1):
            seq = encode(tree, scheme)
            for t, lab in zip(tree.tokens, seq.strings()):
                out.write(f"{_sid(tree, i)}\t{t.id}\t{t.form}\t{t.upos}\t{lab}\t{t.deprel}\n")
    if scheme.bracketing:
        total = sum(len(t) for t in trees)
        recovered = sum(coverage(t, scheme) * len(t) for t in trees)
        full = sum(1 for t in trees if coverage(t, scheme) == 1.0)
        cov = recovered / total if total else 1.0
        print(f"coverage\t{scheme.value}\tarcs {cov:.6f}\tsentences {full}/{len(trees)}", file=sys.stderr)
    return EXIT_OK


def read_labels(lines: Iterable[str], scheme: Scheme) -> list[LabelSequence]:
    """Parse a label TSV (header optional) into one sequence per sentence."""
    groups: list[tuple[str, list[list[str]]]] = []
    for line_no, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line or (line_no == 1 and line.startswith("sentence_id\t")):
            continue
        cols = line.split("\t")
        if len(cols) not in (5, 6):
            raise LabelError(f"line {line_no}: expected 5 or 6 columns, got {len(cols)}")
        if not groups or groups[-1][0] != cols[0]:
            groups.append((cols[0], []))
        rows = groups[-1][1]
        if cols[1] != str(len(rows) + 1):
            raise LabelError(f"line {line_no}: sentence {cols[0]} token ids out of order "
                             f"(got {cols[1]!r}, expected {len(rows) + 1})")
        rows.append(cols)
    out = []
    for sid, rows in groups:
        try:
            deprels = tuple(r[5] for r in rows) if all(len(r) == 6 for r in rows) else None
            out.append(LabelSequence.from_strings(scheme, [r[4] for r in rows], [r[3] for r in rows],
                                                  deprels=deprels, forms=tuple(r[2] for r in rows),
                                                  sentence_id=sid))
        except LabelError as e:
            raise LabelError(f"sentence {sid}, {e}") from None
    return out


def cmd_decode(args) -> int:
    if args.scheme == ARC_EAGER:
        raise UsageError("decode works on label files; arc-eager has none")
    scheme = Scheme.parse(args.scheme)
    if args.input == "-":
        seqs = read_labels(sys.stdin, scheme)
    else:
        with open(args.input, encoding="utf-8") as f:
            seqs = read_labels(f, scheme)
    trees = []
    for seq in seqs:
        tree = decode(seq)
        if seq.deprels is not None:
            # repaired tokens may have changed root status
            rels = [("root" if t.head == 0 else ("dep" if t.deprel == "root" else t.deprel))
                    for t in tree.tokens]
            tree = tree.with_heads(tree.heads, rels)
        comments = (f"# sent_id = {seq.sentence_id}",) if seq.sentence_id else ()
        trees.append(DepTree(tree.tokens, seq.sentence_id, comments))
    with _output(args.out) as out:
        write_conllu(trees, out)
    return EXIT_OK


# -- train / parse -------------------------------------------------------------

def cmd_train(args) -> int:
    trees = _read(args.input, args)
    if not trees:
        raise ModelError("training treebank is empty")
    if args.out is None:
        raise UsageError("train needs --out MODEL")
    logger.info("training %s k=%d on %d sentences", args.scheme, args.delay, len(trees))
    parser = train_parser(trees, args.scheme, args.delay, args.epochs, args.seed, args.gold_pos)
    save_parser(parser, args.out)
    return EXIT_OK


def _check_model(parser, args) -> None:
    scheme = parser.scheme if parser.kind == "tb" else parser.scheme.value
    if args.scheme is not None and args.scheme != scheme:
        raise ModelError(f"model was trained for scheme {scheme}, not {args.scheme}")
    if getattr(args, "delay", None) is not None and args.delay != parser.delay:
        raise ModelError(f"model was trained with delay {parser.delay}, not {args.delay}")


def _require_pos(parser, trees: Sequence[DepTree]) -> None:
    if not parser.gold_pos:
        return
    for i, tree in enumerate(trees, 1):
        for t in tree.tokens:
            if t.upos in ("", "_"):
                raise ModelError(f"sentence {_sid(tree, i)}, token {t.id}: model needs gold PoS tags")


def cmd_parse(args) -> int:
    parser = load_parser(args.model)
    _check_model(parser, args)
    trees = _read(args.input, args, tokens_only=True)
    _require_pos(parser, trees)
    with _output(args.out) as out:
        write_conllu(parse_treebank(parser, trees), out)
    return EXIT_OK


# -- eval / verify / stats -----------------------------------------------------

def cmd_eval(args) -> int:
    gold = _read(args.gold, args)
    pred = _read(args.pred, args)
    m = score(gold, pred)
    with _output(args.out) as out:
        if args.json:
            out.write(json.dumps(m.as_dict(), sort_keys=True) + "\n")
        else:
            out.write(f"UAS\t{100 * m.uas:.2f}\nLAS\t{100 * m.las:.2f}\ntokens\t{m.n_tokens}\n")
    if args.curve:
        with open(args.curve, "w", encoding="utf-8", newline="") as f:
            f.write(curve_csv(displacement_curve(gold, pred, merge_tails=True)))
    if args.raw_curve:
        with open(args.raw_curve, "w", encoding="utf-8", newline="") as f:
            f.write(curve_csv(displacement_curve(gold, pred, merge_tails=False)))
    return EXIT_OK


def _model_pipeline(parser):
    def run(tree, rec):
        upos = tree.upos if parser.gold_pos else None
        return parser.parse(tree.forms, upos, recorder=rec, sentence_id=tree.sentence_id).heads
    return run


def verify_traces(trees: Sequence[DepTree], scheme: str, delay: int, parser=None) -> list[ParseTrace]:
    traces = []
    for tree in trees:
        if parser is not None:
            traces.append(record_trace(_model_pipeline(parser), tree, parser.delay))
        elif scheme == ARC_EAGER:
            traces.append(trace_oracle(tree, delay))
        else:
            traces.append(trace_gold_labels(tree, scheme, delay))
    return traces


def cmd_verify(args) -> int:
    parser = None
    if args.model:
        parser = load_parser(args.model)
        scheme = parser.scheme if parser.kind == "tb" else parser.scheme.value
        if args.scheme is not None and args.scheme != scheme:
            raise ModelError(f"model was trained for scheme {scheme}, not {args.scheme}")
        delay = parser.delay if args.delay is None else args.delay
        trees = _read(args.input, args)
        _require_pos(parser, trees)
    else:
        if args.scheme is None:
            raise UsageError("verify needs --scheme or --model")
        scheme = args.scheme
        delay = 0 if args.delay is None else args.delay
        trees = _read(args.input, args)
    traces = verify_traces(trees, scheme, delay, parser)
    n_mono = n_delay = 0
    with _output(args.out) as out:
        out.write("sentence_id\ttokens\tmonotonic\tdelay_ok\tdetail\n")
        for i, (tree, tr) in enumerate(zip(trees, traces), 1):
            mono = check_monotonic(tr)
            dly = check_delay(tr, delay)
            n_mono += bool(mono)
            n_delay += bool(dly)
            detail = "; ".join(f"{name} fails at {v.index}: {v.detail}"
                               for name, v in (("monotonic", mono), ("delay", dly)) if not v)
            out.write(f"{_sid(tree, i)}\t{tr.n}\t{'pass' if mono else 'FAIL'}\t"
                      f"{'pass' if dly else 'FAIL'}\t{detail or '-'}\n")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as f:
            for tr in traces:
                f.write(tr.to_json() + "\n")
    n = len(trees)
    pct = (lambda x: 100.0 * x / n if n else 100.0)
    print(f"verify\t{scheme}\tk={delay}\tsentences {n}\tmonotonic {n_mono} ({pct(n_mono):.2f}%)\t"
          f"delay {n_delay} ({pct(n_delay):.2f}%)", file=sys.stderr)
    return EXIT_OK if n_mono == n and n_delay == n else EXIT_CONTRACT


def cmd_stats(args) -> int:
    stats = branching_stats(_read(args.input, args))
    with _output(args.out) as out:
        if args.json:
            out.write(json.dumps(stats.as_dict(), sort_keys=True) + "\n")
        else:
            for key, value in stats.as_dict().items():
                out.write(f"{key}\t{value:.2f}\n" if isinstance(value, float) else f"{key}\t{value}\n")
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synth import generate
    with _output(args.out) as out:
        write_conllu(generate(args.sentences, seed=args.seed), out)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="increparse", description="Fully incremental dependency parsing toolkit.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=func)
        return sp

    def common(sp, scheme_required=False, delay_default=0):
        sp.add_argument("--scheme", choices=SCHEMES, required=scheme_required, default=None)
        sp.add_argument("--delay", type=_nonneg, default=delay_default, metavar="N")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--skip-invalid", action="store_true", help="drop sentences that are not trees")

    sp = add("encode", cmd_encode, "Encode a CoNLL-U treebank as per-token labels (or oracle transitions).")
    sp.add_argument("input")
    common(sp, scheme_required=True)

    sp = add("decode", cmd_decode, "Decode a label TSV back into CoNLL-U.")
    sp.add_argument("input")
    common(sp, scheme_required=True)

    sp = add("train", cmd_train, "Train a parser model.")
    sp.add_argument("input")
    common(sp, scheme_required=True)
    sp.add_argument("--epochs", type=_nonneg, default=5, metavar="N")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--gold-pos", action="store_true", help="use input PoS tags instead of predicting them")

    sp = add("parse", cmd_parse, "Parse CoNLL-U input (forms, optionally PoS) with a trained model.")
    sp.add_argument("model")
    sp.add_argument("input")
    common(sp, delay_default=None)

    sp = add("eval", cmd_eval, "Score predicted trees against gold trees.")
    sp.add_argument("gold")
    sp.add_argument("pred")
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--curve", metavar="CSV", help="displacement curve with tails merged at +-10")
    sp.add_argument("--raw-curve", metavar="CSV", help="displacement curve without tail merging")
    sp.add_argument("--skip-invalid", action="store_true")

    sp = add("verify", cmd_verify, "Check monotonicity and delay-k incrementality on parse traces.")
    sp.add_argument("input")
    common(sp, delay_default=None)
    sp.add_argument("--model", metavar="MODEL", help="trace a trained parser instead of gold labels")
    sp.add_argument("--trace", metavar="JSONL", help="dump traces, one JSON object per sentence")

    sp = add("stats", cmd_stats, "Branching statistics of a treebank.")
    sp.add_argument("input")
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--skip-invalid", action="store_true")

    sp = add("synth", cmd_synth, "Generate a synthetic English-like treebank.")
    sp.add_argument("--sentences", type=_nonneg, default=6000, metavar="N")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--out", metavar="PATH")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("INCREPARSE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"increparse: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ContractViolation as e:
        print(f"increparse: contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except (ConlluError, TreeValidationError, LabelError, AlignmentError, ModelError,
            ae.TransitionError, OSError, ValueError) as e:
        print(f"increparse: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
