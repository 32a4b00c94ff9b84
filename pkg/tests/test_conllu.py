import io
import random
import re

import pytest
from hypothesis import given, settings, strategies as st

from increparse.conllu import (ConlluError, DepTree, TreeValidationError, branching_stats, dumps_conllu,
                               is_projective, nonprojective_arcs, parse_conllu, projectivize,
                               read_conllu, tree_problem, write_conllu)

from treegen import PUD, all_head_lists, brute_projective, make_tree, random_heads

TWO = "1\tHe\t_\tPRON\t_\t_\t2\tnsubj\t_\t_\n2\tleft\t_\tVERB\t_\t_\t0\troot\t_\t_\n"


def test_parse_two_token_sentence():
    (tree,) = parse_conllu(TWO)
    assert tree.heads == [2, 0]
    assert tree.deprels == ["nsubj", "root"]
    assert tree.forms == ["He", "left"]
    assert tree.upos == ["PRON", "VERB"]


def test_parse_empty_input():
    assert parse_conllu("") == []
    assert parse_conllu(b"") == []


def test_write_two_token_sentence():
    (tree,) = parse_conllu(TWO)
    assert dumps_conllu([tree]) == TWO + "\n"


def test_write_empty_sequence():
    buf = io.StringIO()
    write_conllu([], buf)
    assert buf.getvalue() == ""


def test_write_binary_sink():
    (tree,) = parse_conllu(TWO)
    buf = io.BytesIO()
    write_conllu([tree], buf)
    assert buf.getvalue().decode("utf-8") == TWO + "\n"


def test_comments_and_sentence_id_kept():
    text = "# sent_id = a-1\n# text = He left\n" + TWO
    (tree,) = parse_conllu(text)
    assert tree.sentence_id == "a-1"
    assert tree.comments == ("# sent_id = a-1", "# text = He left")
    assert dumps_conllu([tree]).startswith("# sent_id = a-1\n# text = He left\n1\t")


def test_multiword_and_empty_nodes_skipped():
    text = ("1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
            "1\tde\t_\tADP\t_\t_\t2\tcase\t_\t_\n"
            "2\tel\t_\tDET\t_\t_\t3\tdet\t_\t_\n"
            "2.1\tx\t_\tX\t_\t_\t_\t_\t_\t_\n"
            "3\tfin\t_\tNOUN\t_\t_\t0\troot\t_\t_\n")
    (tree,) = parse_conllu(text)
    assert tree.heads == [2, 3, 0]


def test_wrong_column_count_names_line():
    text = TWO + "\n" + "1\tx\t_\n"
    with pytest.raises(ConlluError) as e:
        parse_conllu(text)
    assert e.value.line_no == 4


def test_non_integer_head():
    with pytest.raises(ConlluError, match="non-integer head"):
        parse_conllu("1\tx\t_\tX\t_\t_\tfoo\tdep\t_\t_\n")


@pytest.mark.parametrize("heads,why", [([0, 0], "2 root"), ([2, 1], "0 root"), ([0, 3, 2], "cycle"),
                                       ([0, 5], "out of range"), ([1], "own head")])
def test_invalid_trees_rejected(heads, why):
    lines = "".join(f"{i}\tw\t_\tX\t_\t_\t{h}\tdep\t_\t_\n" for i, h in enumerate(heads, 1))
    with pytest.raises(TreeValidationError, match=why) as e:
        parse_conllu("# sent_id = bad\n" + lines)
    assert e.value.sentence_id == "bad"


def test_skip_invalid_mode(caplog):
    bad = "# sent_id = bad\n1\tw\t_\tX\t_\t_\t0\tdep\t_\t_\n2\tw\t_\tX\t_\t_\t0\tdep\t_\t_\n"
    trees = parse_conllu(bad + "\n" + TWO, skip_invalid=True)
    assert len(trees) == 1 and trees[0].heads == [2, 0]
    assert "bad" in caplog.text


def test_empty_deprel_rejected():
    with pytest.raises(TreeValidationError):
        parse_conllu("1\tw\t_\tX\t_\t_\t0\t\t_\t_\n")


def test_tokens_only_reads_unparsed_input():
    (tree,) = parse_conllu("1\tHe\t_\tPRON\t_\t_\t_\t_\t_\t_\n2\tgo\t_\tVERB\t_\t_\t_\t_\t_\t_\n",
                           tokens_only=True)
    assert tree.forms == ["He", "go"]


def test_pud_token_count_matches_independent_count():
    # count plain integer-id token lines with a regex, independently of the reader
    pattern = re.compile(r"^\d+\t")
    with open(PUD, encoding="utf-8") as f:
        expected = sum(1 for line in f if pattern.match(line))
    trees = read_conllu(PUD)
    assert sum(len(t) for t in trees) == expected == 18609
    assert len(trees) == 1000


def test_pud_round_trip_columns():
    with open(PUD, encoding="utf-8") as f:
        original = f.read()
    trees = parse_conllu(original)
    again = dumps_conllu(trees)

    def cols(text):
        return [tuple(line.split("\t")[i] for i in (0, 1, 3, 6, 7))
                for line in text.splitlines() if re.match(r"^\d+\t", line)]

    assert cols(original) == cols(again)
    assert parse_conllu(again) == trees


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 30), st.integers(0, 10**6))
def test_round_trip_property(n, seed):
    rng = random.Random(seed)
    tree = make_tree(random_heads(n, rng), rng, sentence_id=f"s{seed}")
    tree = DepTree(tree.tokens, tree.sentence_id, (f"# sent_id = s{seed}",))
    (back,) = parse_conllu(dumps_conllu([tree]))
    assert back == tree


# -- projectivity ---------------------------------------------------------------

def test_is_projective_examples():
    assert is_projective([2, 0, 2])
    assert is_projective([0])
    assert not is_projective([0, 4, 1, 2])  # raw head list: arcs 1-3 and 2-4 cross
    assert not is_projective(make_tree([0, 4, 1, 1]))


@pytest.mark.parametrize("n", range(1, 6))
def test_is_projective_matches_brute_force_exhaustive(n):
    for heads in all_head_lists(n):
        assert is_projective(heads) == brute_projective(heads), heads


def test_is_projective_matches_brute_force_random():
    rng = random.Random(7)
    for _ in range(2000):
        heads = random_heads(rng.randint(6, 8), rng)
        assert is_projective(heads) == brute_projective(heads), heads


def test_projectivize_identity_on_projective():
    tree = make_tree([2, 0, 2])
    assert projectivize(tree) is tree


def test_projectivize_example():
    tree = make_tree([0, 4, 1, 1])
    out = projectivize(tree)
    assert is_projective(out)
    assert out.forms == tree.forms and out.deprels == tree.deprels
    assert out.heads == [0, 1, 1, 1]


@pytest.mark.parametrize("n", range(1, 6))
def test_projectivize_exhaustive(n):
    for heads in all_head_lists(n):
        tree = make_tree(heads)
        out = projectivize(tree)
        assert tree_problem(out.heads) is None
        assert is_projective(out)
        assert projectivize(out) == out
        assert out.heads.index(0) == heads.index(0)


def test_projectivize_pud():
    for tree in read_conllu(PUD):
        out = projectivize(tree)
        assert is_projective(out) and len(out) == len(tree)
        assert not nonprojective_arcs(out.heads)


# -- statistics -----------------------------------------------------------------

def test_branching_stats_small():
    s = branching_stats([make_tree([2, 0])])
    assert s.pct_left_arcs == 50.0 and s.pct_right_arcs == 50.0
    assert s.n_sentences == 1 and s.n_tokens == 2


def test_branching_stats_empty_corpus():
    with pytest.raises(ValueError):
        branching_stats([])


def test_branching_stats_pud():
    s = branching_stats(read_conllu(PUD))
    assert s.pct_left_arcs == pytest.approx(54.26, abs=0.01)
    assert s.pct_nonprojective_sentences == pytest.approx(10.2)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 25), min_size=1, max_size=8), st.integers(0, 10**6))
def test_branching_percentages_sum_to_100(lengths, seed):
    rng = random.Random(seed)
    s = branching_stats([make_tree(random_heads(n, rng)) for n in lengths])
    assert abs(s.pct_left_arcs + s.pct_right_arcs - 100.0) < 0.01
