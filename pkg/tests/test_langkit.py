"""Oracle values and properties for the language toolkit."""

from __future__ import annotations

import itertools
import json
import random
import re

import hypothesis as hyp
import pytest
from hypothesis import strategies as st

from qcfa import langkit as lk
from qcfa.errors import CapExceeded

P1 = lk.lang_params(1)
P2 = lk.lang_params(2)
P3 = lk.lang_params(3)


# ---------------------------------------------------------------------------
# level constants


def test_length_recursion_chain():
    ns = [2]
    for _ in range(3):
        ns.append(lk.srel_next_len(ns[-1]))
    assert ns == [2, 7, 57, 3307]
    with pytest.raises(lk.LanguageError):
        lk.srel_next_len(1)


def test_min_segment_table():
    assert [lk.lang_params(i).min_segment for i in range(1, 6)] == [2, 2, 5, 10, 17]


def test_delim_width_table():
    assert [lk.lang_params(i).delim_width for i in range(1, 5)] == [1, 2, 2, 3]


def test_cbin_values():
    assert lk.cbin(P1, 1) == "1"
    assert [lk.cbin(P2, j) for j in (1, 2)] == ["01", "10"]
    assert [lk.cbin(P3, j) for j in (1, 2, 3)] == ["01", "10", "11"]
    with pytest.raises(lk.LanguageError):
        lk.cbin(P2, 3)


def test_lang_params_rejects_bad_levels():
    for bad in (0, -1, 1.5, "2"):
        with pytest.raises(lk.LanguageError):
            lk.lang_params(bad)


# ---------------------------------------------------------------------------
# generators


def test_build_rl_level1():
    assert lk.build_rl(1, "ab") == "ab$1aa1"
    assert lk.build_rl(1, "bb") == "bb$1aa1"
    assert lk.build_rl(1, "aba") == "aba$1aaa1aaa1"


def test_build_rl_level2():
    s = lk.build_rl(2, "ab")
    assert len(s) == 57
    assert s.startswith("ab$1aa1$1")
    assert s.count("$") == 2
    assert lk.is_member("rl", 2, s)


@hyp.given(
    w=st.text(alphabet="ab", min_size=2, max_size=6),
    i=st.integers(min_value=1, max_value=2),
)
def test_build_rl_length_law(w, i):
    length = len(w)
    for _ in range(i):
        length = lk.srel_next_len(length)
    assert len(lk.build_rl(i, w)) == length


def test_punc_values():
    assert lk.punc(P1, "ab") == "ab1"
    assert lk.punc(P2, "abba") == "ab01ba10"
    with pytest.raises(lk.LanguageError):
        lk.punc(P2, "abb")  # not m^2 for any admissible m
    with pytest.raises(lk.AlphabetError):
        lk.punc(P1, "a$")


def test_pad_values():
    assert lk.pad(P1, "aa1") == "aa1aa0aa0aa$a0a"
    assert len(lk.pad(P1, "aaa1")) == 47
    with pytest.raises(lk.LanguageError):
        lk.pad(P1, "aa1aa")  # malformed shell


def test_pad_tail_suffix():
    assert lk._pad_tail(P1, 2) == "$aa0aa0aa0aa$a0a"
    assert lk._pad_tail(P2, 1) == "$a00a"


def test_segl():
    assert lk.segl("aa1aa0aa0aa$a0a") == 2
    assert lk.segl("ab01ba10") == 2
    with pytest.raises(lk.LanguageError):
        lk.segl("abba")


def test_total_length_table():
    table = {(1, 2): 15, (1, 3): 47, (2, 2): 19, (2, 3): 58, (3, 5): 376, (3, 6): 887}
    for (i, m), want in table.items():
        assert lk.total_length(lk.lang_params(i), m) == want


def test_total_length_level1_closed_form():
    for m in range(2, 11):
        assert lk.total_length(P1, m) == m * 2 ** (m + 1) - 1


@pytest.mark.parametrize("i,m", [(1, 2), (1, 3), (1, 4), (2, 2), (2, 3)])
def test_pad_length_matches_total_length(i, m):
    params = lk.lang_params(i)
    p = "a" * m ** i
    assert len(lk.pad(params, lk.punc(params, p))) == lk.total_length(params, m)


# ---------------------------------------------------------------------------
# delimiter ordering


def test_well_ordered_sequence_values():
    assert lk.well_ordered_sequence(P2, 2) == [1, 2]
    assert lk.well_ordered_sequence(P2, 3) == [1, 1, 2]
    seq = lk.well_ordered_sequence(P3, 5)
    assert len(seq) == 25
    assert [seq[k - 1] for k in (5, 10, 15, 20)] == [2, 2, 2, 2]
    assert seq[24] == 3
    assert seq.count(1) == 20


def test_generated_sequence_is_well_ordered():
    for i, m in [(2, 2), (2, 3), (2, 4), (3, 5), (3, 6)]:
        params = lk.lang_params(i)
        assert lk.is_well_ordered(params, m, lk.well_ordered_sequence(params, m))


def test_well_ordered_uniqueness_small():
    # every candidate sequence over {1,2} up to length 4: only [1,2] passes (2,2)
    hits = [
        seq
        for L in range(1, 5)
        for seq in itertools.product((1, 2), repeat=L)
        if lk.is_well_ordered(P2, 2, list(seq))
    ]
    assert hits == [(1, 2)]


def test_is_well_ordered_rejects_mutations():
    for i, m in [(2, 3), (3, 5)]:
        params = lk.lang_params(i)
        seq = lk.well_ordered_sequence(params, m)
        rng = random.Random(7)
        for _ in range(200):
            mut = list(seq)
            k = rng.randrange(len(mut))
            mut[k] = rng.choice([v for v in range(1, i + 1) if v != mut[k]])
            assert not lk.is_well_ordered(params, m, mut)


def test_sumdel():
    for i, m in [(2, 2), (2, 3), (3, 5)]:
        params = lk.lang_params(i)
        seq = lk.well_ordered_sequence(params, m)
        for j in range(1, i + 1):
            assert lk.sumdel(seq, j) == m ** (i - j)


# ---------------------------------------------------------------------------
# membership


def test_is_member_eq():
    assert lk.is_member("eq", None, "")
    assert lk.is_member("eq", None, "ab")
    assert lk.is_member("eq", None, "aabb")
    assert not lk.is_member("eq", None, "ba")
    assert not lk.is_member("eq", None, "aab")


def test_is_member_pal():
    assert lk.is_member("pal", None, "")
    assert lk.is_member("pal", None, "a")
    assert lk.is_member("pal", None, "abba")
    assert not lk.is_member("pal", None, "ab")


def test_is_member_rl():
    assert lk.is_member("rl", 1, "ab$1aa1")
    assert not lk.is_member("rl", 1, "ab")
    assert not lk.is_member("rl", 1, "aa$1aaa1")
    assert lk.is_member("rl", 2, lk.build_rl(2, "ba"))
    assert not lk.is_member("rl", 2, lk.build_rl(1, "ba"))


def test_is_member_rpal_tails_are_literal():
    assert lk.is_member("rpal", 1, "aa$1aa1")
    assert lk.is_member("rpal", 1, "bb$1aa1")
    assert not lk.is_member("rpal", 1, "ab$1aa1")  # block not a palindrome
    assert not lk.is_member("rpal", 1, "bb$1bb1")  # tail runs must be a's


def test_is_member_ppal():
    assert lk.is_member("ppal", 1, "aa1")
    assert not lk.is_member("ppal", 1, "ab1")
    assert not lk.is_member("ppal", 1, "aa0")
    assert lk.is_member("ppal", 2, "ab01ba10")
    assert not lk.is_member("ppal", 2, "ab01ab10")
    assert not lk.is_member("ppal", 2, "ab10ba01")  # delimiters out of order


def test_is_member_pppal():
    assert lk.is_member("pppal", 1, "aa1aa0aa0aa$a0a")
    assert not lk.is_member("pppal", 1, "ab1aa0aa0aa$a0a")
    assert lk.is_member("pppal", 2, lk.pad(P2, lk.punc(P2, "abba")))
    assert not lk.is_member("pppal", 1, "aa1aa0aa0aa$a0a" + "a")


def test_is_member_shl():
    assert lk.is_member("shl", None, "0$1")
    assert lk.is_member("shl", None, "0$1$10$11")
    assert not lk.is_member("shl", None, "0")
    assert not lk.is_member("shl", None, "1$10")
    assert not lk.is_member("shl", None, "0$1$11")


def test_is_member_alphabet_guard():
    with pytest.raises(lk.AlphabetError):
        lk.is_member("eq", None, "a$b")
    with pytest.raises(lk.AlphabetError):
        lk.is_member("rl", 1, "ab0")
    with pytest.raises(lk.AlphabetError):
        lk.is_member("pal", None, "a1a")


def test_is_member_level_validation():
    with pytest.raises(lk.LanguageError):
        lk.is_member("nope", None, "a")
    with pytest.raises(lk.LanguageError):
        lk.is_member("rl", None, "ab$1aa1")
    with pytest.raises(lk.LanguageError):
        lk.is_member("pal", 1, "aa")


def _rl1_oracle(s):
    """Independent level-1 recognizer: regex shape plus run-length checks."""
    m = lk._matches_rl_regex(s)
    if not m:
        return False
    w = s[: s.index("$")]
    groups = s[s.index("$") + 2 :].split("1")[:-1]
    return len(groups) == len(w) - 1 and all(g == "a" * len(w) for g in groups)


@hyp.given(st.text(alphabet="ab1$", max_size=12))
def test_rl1_matches_independent_oracle(s):
    assert lk.is_member("rl", 1, s) == _rl1_oracle(s)


@hyp.given(st.text(alphabet="ab", min_size=2, max_size=5), st.data())
def test_rl1_member_mutations(w, data):
    s = lk.build_rl(1, w)
    assert lk.is_member("rl", 1, s)
    pos = data.draw(st.integers(min_value=0, max_value=len(s) - 1))
    ch = data.draw(st.sampled_from("ab1$"))
    mutant = s[:pos] + ch + s[pos + 1 :]
    assert lk.is_member("rl", 1, mutant) == _rl1_oracle(mutant)


def test_pppal1_single_mutations_all_rejected():
    s = lk.pad(P1, "aa1")
    for pos in range(len(s)):
        for ch in "ab01$":
            if ch == s[pos]:
                continue
            mutant = s[:pos] + ch + s[pos + 1 :]
            assert not lk.is_member("pppal", 1, mutant), mutant


@hyp.given(st.integers(min_value=1, max_value=2), st.data())
def test_punc_pad_roundtrip(i, data):
    params = lk.lang_params(i)
    m = data.draw(st.integers(min_value=2, max_value=4 if i == 1 else 3))
    half = data.draw(st.text(alphabet="ab", min_size=(m ** i + 1) // 2, max_size=(m ** i + 1) // 2))
    p = half + half[: m ** i // 2][::-1]
    shell = lk.punc(params, p)
    assert lk.is_member("ppal", i, shell)
    padded = lk.pad(params, shell)
    assert lk.is_member("pppal", i, padded)
    assert len(padded) == lk.total_length(params, m)


# ---------------------------------------------------------------------------
# enumeration


def test_iter_members_eq():
    assert list(lk.iter_members("eq", max_len=4)) == ["", "ab", "aabb"]


def test_iter_members_pal():
    assert list(lk.iter_members("pal", max_len=2)) == ["", "a", "b", "aa", "bb"]
    assert list(lk.iter_members("pal", limit=3)) == ["", "a", "b"]


def test_iter_members_rl_and_rpal():
    assert list(lk.iter_members("rl", 1, max_len=7)) == [
        "aa$1aa1", "ab$1aa1", "ba$1aa1", "bb$1aa1",
    ]
    assert list(lk.iter_members("rpal", 1, max_len=7)) == ["aa$1aa1", "bb$1aa1"]


def test_iter_members_pppal():
    got = list(lk.iter_members("pppal", 1, max_len=47))
    assert len(got) == 6  # two side-2 shells, four side-3 shells
    assert got[0] == "aa1aa0aa0aa$a0a"
    assert {len(s) for s in got} == {15, 47}


def test_iter_members_shl():
    assert list(lk.iter_members("shl", max_len=10)) == ["0$1", "0$1$10", "0$1$10$11"]


@pytest.mark.parametrize(
    "family,i,max_len",
    [("eq", None, 20), ("pal", None, 8), ("rl", 1, 60), ("rpal", 2, 60),
     ("ppal", 2, 20), ("pppal", 1, 47), ("shl", None, 30)],
)
def test_enumerated_strings_are_members(family, i, max_len):
    got = list(lk.iter_members(family, i, max_len=max_len))
    assert got
    for s in got:
        assert lk.is_member(family, i, s)
        assert len(s) <= max_len


# ---------------------------------------------------------------------------
# dissimilarity


def test_dissim_construct_pal_sizes():
    for n in (2, 4, 6):
        wit = lk.dissim_lower_bound("pal", None, n)
        assert wit.size == 2 ** (n // 2)
        assert wit.verify(lambda s: lk.is_member("pal", None, s))
        assert all(len(s) == n // 2 for s in wit.strings)


def test_dissim_exhaustive_frozen_values():
    table = [("pal", None, 2, 4), ("pal", None, 4, 9), ("pal", None, 6, 21),
             ("eq", None, 8, 9), ("rpal", 1, 7, 9)]
    for family, i, n, want in table:
        wit = lk.dissim_lower_bound(family, i, n, method="exhaustive")
        assert wit.size == want, (family, n)
        assert wit.verify(lambda s: lk.is_member(family, i, s))


def test_dissim_construct_witnesses_verify():
    for family, i, n in [("eq", None, 10), ("rpal", 1, 7), ("pppal", 1, 15), ("pppal", 2, 19)]:
        wit = lk.dissim_lower_bound(family, i, n)
        assert wit.verify(lambda s: lk.is_member(family, i, s))


def test_dissim_cap():
    with pytest.raises(CapExceeded) as err:
        lk.dissim_lower_bound("rpal", 1, 20, method="exhaustive", cap=1000)
    assert "1000" in str(err.value)


def test_dissim_witness_json_shape():
    doc = lk.dissim_lower_bound("pal", None, 4).to_json()
    assert set(doc) == {"n", "strings", "pairs"}
    assert doc["n"] == 4
    assert len(doc["pairs"]) == len(doc["strings"]) * (len(doc["strings"]) - 1) // 2
    json.dumps(doc)  # serializable


def test_dissim_verify_catches_forgery():
    wit = lk.dissim_lower_bound("pal", None, 4)
    pair = next(iter(wit.pairs))
    wit.pairs[pair] = "abababab"  # too long and wrong
    assert not wit.verify(lambda s: lk.is_member("pal", None, s))


# ---------------------------------------------------------------------------
# negative corpus


@pytest.mark.parametrize("kind", ["regex", "segment", "block", "wellorder", "nonpal"])
def test_corpus_counts_and_determinism(kind):
    items = lk.defect_corpus(kind, count=50, seed=0)
    assert len(items) == 50
    assert items == lk.defect_corpus(kind, count=50, seed=0)
    assert len({it.text for it in items}) == 50
    for it in items:
        assert it.defect == kind
        assert it.template in ("rpal", "pppal")


@pytest.mark.parametrize("kind", ["regex", "segment", "block", "wellorder", "nonpal"])
def test_corpus_items_are_nonmembers(kind):
    for it in lk.defect_corpus(kind, count=50, seed=0):
        assert not lk.is_member(it.template, it.level, it.text)


def test_corpus_regex_items_fail_shape_checks():
    for it in lk.defect_corpus("regex", count=50, seed=0):
        if it.template == "rpal":
            assert not lk._matches_rl_regex(it.text)


def test_corpus_segment_and_block_items_reach_stochastic_stages():
    for kind in ("segment", "block"):
        for it in lk.defect_corpus(kind, count=50, seed=0):
            assert lk._matches_rl_regex(it.text)


def _letter_runs(s):
    return sorted(len(r) for r in re.split(r"[^ab]+", s) if r)


def test_corpus_wellorder_shape():
    member_runs = {
        19: _letter_runs(lk.pad(P2, lk.punc(P2, "abba"))),
        58: _letter_runs(lk.pad(P2, lk.punc(P2, "a" * 9))),
    }
    for it in lk.defect_corpus("wellorder", count=54, seed=3):
        assert len(it.text) in (19, 58)
        assert it.text.count("10") == 1  # high delimiter present exactly once
        assert it.text.endswith("$a00a")
        assert "11" not in it.text
        # member-identical segment profile: ordering is the only broken stage
        assert _letter_runs(it.text) == member_runs[len(it.text)]


def test_corpus_nonpal_split():
    items = lk.defect_corpus("nonpal", count=60, seed=0)
    mc = [it for it in items if it.mc_ok]
    exact = [it for it in items if not it.mc_ok]
    assert len(mc) == 8
    assert len(exact) == 52
    assert all(len(it.text) <= 15 for it in mc)
    for it in items:
        if it.template == "rpal":
            assert lk.is_member("rl", it.level, it.text)  # perfect shell
        else:
            params = lk.lang_params(it.level)
            assert len(it.text) == lk.total_length(params, lk.segl(it.text))


def test_corpus_unknown_kind():
    with pytest.raises(lk.LanguageError):
        lk.defect_corpus("typo")


# ---------------------------------------------------------------------------
# level-structure bounds (small-scale versions of the acceptance sweeps)


def test_rl_block_length_bound():
    for i in (1, 2):
        for s in lk.iter_members("rpal", i, max_len=300):
            n = len(s)
            s0 = s[: s.index("$")]
            assert len(s0) < n ** (1.0 / 2 ** i)


def test_pppal_side_log_bound():
    for i in (1, 2):
        for s in lk.iter_members("pppal", i, max_len=300):
            assert 2 ** lk.segl(s) < len(s)
