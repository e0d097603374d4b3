"""Fragment builders, compiled recognizers, and the round-level interpreter."""

from __future__ import annotations

import math
from fractions import Fraction

import hypothesis as hyp
import pytest
from hypothesis import strategies as st

from qcfa import engines as eng
from qcfa import langkit as lk
from qcfa.builders import (
    BuildError,
    MalformedRegionError,
    as_fraction,
    build_eq_core,
    build_pal_check,
    build_pal_core,
    build_rw_gate,
    build_same_length,
    build_twice_as_long,
    compile_pppal,
    compile_rpal,
    counter_profile,
    interpret,
    separator_spans,
    token_view,
    tuned_rounds,
)

THETA = math.pi * math.sqrt(2.0)

# Fast sampling knobs: no gate coins, two counter sweeps.  Acceptance odds
# at these settings are solver-checked below; default knobs push expected
# running times past any practical per-trial budget (that is the point of
# the gates), so every trial-based test here uses SMALL.
SMALL = dict(k_eps=0, k_core=0, j_sweeps=2)

MEMBER_PPPAL1 = "aa1aa0aa0aa$a0a"      # level 1, two copy groups
NONPAL_PPPAL1 = "ab1aa0aa0aa$a0a"      # same shell, non-mirror head
MEMBER_PPPAL2 = "aa01aa10aa00aa$a00a"  # level 2, two copy groups


def enc4(w):
    """Base-4 value of a letter word; leftmost letter is the lowest digit."""
    return sum((1 if ch == "a" else 2) * 4 ** t for t, ch in enumerate(w))


def eq_accept(a, b, k):
    """Absorbed accept chance of one comparison core: gate fires first."""
    p_bad = math.sin((a - b) * THETA) ** 2
    gate = 0.5 ** k / (a + b + 1) ** 2
    return (1.0 - p_bad) * gate / (p_bad + (1.0 - p_bad) * gate)


def pal_accept(w, j):
    """Absorbed accept chance of one counter core on letter word w.

    Per cycle the scaled counter leaves squared mass
    .5*(64^-n + 4^-n + (e(rev)^2 + e(w)^2) * 64^-n) in the register, the
    difference ray carries .25*(e(rev)-e(w))^2*64^-n of it to reject, and
    the surviving mass must pass j*n fair coins to reach accept.
    """
    n = len(w)
    er, ef = enc4(w[::-1]), enc4(w)
    p_pass = 0.5 * (64.0 ** -n + 4.0 ** -n + (er * er + ef * ef) * 64.0 ** -n)
    p_diff = 0.25 * (er - ef) ** 2 * 64.0 ** -n
    if p_diff == 0.0:
        return 1.0
    p_acc = (p_pass - p_diff) * 2.0 ** -(j * n)
    return p_acc / (p_acc + p_diff)


# ---------------------------------------------------------------------------
# knobs


def test_as_fraction_accepts_rational_spellings():
    assert as_fraction("1/5") == Fraction(1, 5)
    assert as_fraction(Fraction(2, 7)) == Fraction(2, 7)
    assert as_fraction(0.25) == Fraction(1, 4)


def test_as_fraction_rejects_out_of_range_bounds():
    for bad in (0, 1, "1/2", "3/5", -0.1):
        with pytest.raises(BuildError):
            as_fraction(bad)
    with pytest.raises(BuildError):
        as_fraction(object())


def test_tuned_rounds_frozen_values():
    assert tuned_rounds("1/5") == 9
    assert tuned_rounds("1/3") == 8
    assert tuned_rounds(Fraction(1, 4)) == 8
    assert tuned_rounds(Fraction(1, 1024)) == 16


@hyp.given(num=st.integers(1, 60), den=st.integers(3, 4000))
def test_tuned_rounds_covers_the_inverse_bound(num, den):
    eps = Fraction(num, den)
    hyp.assume(0 < eps < Fraction(1, 2))
    t = tuned_rounds(eps) - 6
    assert 2 ** t >= 1 / eps
    assert t == 0 or 2 ** (t - 1) < 1 / eps


# ---------------------------------------------------------------------------
# token views


def test_token_view_counts_and_virtual_string():
    view = token_view("aa$1aa1", 0, 3, 8, ("a",), ("a",))
    assert view.left_count == 2
    assert view.right_count == 2
    assert view.virtual_string() == "aabb"
    assert view.left_tokens == ((1, 2, "a"), (2, 3, "a"))
    assert view.right_tokens == ((5, 6, "a"), (6, 7, "a"))


def test_token_view_include_mid_picks_up_the_middle_cell():
    base = token_view("a$a", 0, 2, 4, ("a",), ("$", "a"))
    with_mid = token_view("a$a", 0, 2, 4, ("a",), ("$", "a"), include_mid=True)
    assert base.right_count == 1
    assert with_mid.right_count == 2


def test_token_view_rejects_bad_signpost_order():
    with pytest.raises(BuildError):
        token_view("aa$1aa1", 3, 3, 8, ("a",), ("a",))
    with pytest.raises(BuildError):
        token_view("aa$1aa1", 0, 3, 99, ("a",), ("a",))


def test_token_view_ambiguous_tokens():
    with pytest.raises(MalformedRegionError, match="ambiguous"):
        token_view("aaa$b", 0, 4, 6, ("a", "aa"), ("b",))


def test_token_view_straddling_tokens():
    with pytest.raises(MalformedRegionError, match="straddles"):
        token_view("aba$b", 0, 4, 6, ("ab", "ba"), ("b",))


def test_separator_spans_finds_maximal_runs():
    assert separator_spans("aa$1aa1") == [(3, 5, "$1"), (7, 8, "1")]
    assert separator_spans("ab") == []
    assert separator_spans("0a0") == [(1, 2, "0"), (3, 4, "0")]


# ---------------------------------------------------------------------------
# walk gate


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("w", ["", "a", "ab", "aba", "abab", "babab", "aababb"])
def test_rw_gate_exit_chance_is_two_to_minus_k_over_n_plus_one(k, w):
    m = build_rw_gate(k).standalone(continue_to="reject")
    sol = eng.solve_exact(m, w)
    assert sol.p_accept == pytest.approx(0.5 ** k / (len(w) + 1), abs=1e-12)


def test_rw_gate_rejects_negative_coin_count():
    with pytest.raises(BuildError):
        build_rw_gate(-1)


# ---------------------------------------------------------------------------
# comparison core


@pytest.mark.parametrize("w", ["", "ab", "ba", "aabb", "abab", "bbaaab"])
def test_eq_core_never_rejects_balanced_words(w):
    m = build_eq_core("1/5", k_core=0).standalone()
    sol = eng.solve_exact(m, w)
    assert sol.p_accept == 1.0
    assert sol.p_reject == 0.0


@pytest.mark.parametrize(
    "w,frozen",
    [
        ("aa", 0.23700174462703583),   # sin^2(2 theta) against gate 1/9
        ("aab", 0.004746180900127239),
        ("b", 0.018718203658443566),
        ("aaab", 0.1005761273636655),
    ],
)
def test_eq_core_unbalanced_frozen_values(w, frozen):
    m = build_eq_core("1/5", k_core=0).standalone()
    sol = eng.solve_exact(m, w)
    assert sol.p_accept == pytest.approx(frozen, abs=1e-12)
    assert sol.p_accept == pytest.approx(
        eq_accept(w.count("a"), w.count("b"), 0), abs=1e-12
    )


def test_eq_core_gate_coins_shrink_the_leak():
    leaks = []
    for k in (0, 2, 4):
        m = build_eq_core("1/5", k_core=k).standalone()
        sol = eng.solve_exact(m, "aab")
        assert sol.p_accept == pytest.approx(eq_accept(2, 1, k), abs=1e-12)
        leaks.append(sol.p_accept)
    assert leaks[0] > leaks[1] > leaks[2]


def test_eq_core_default_rounds_come_from_epsilon():
    frag = build_eq_core("1/5")
    assert frag.metadata == {"epsilon": "1/5", "k_core": 9}


# ---------------------------------------------------------------------------
# counter core


ALL_WORDS_TO_4 = [
    "".join(t)
    for n in range(1, 5)
    for t in __import__("itertools").product("ab", repeat=n)
]


@pytest.mark.parametrize("w", ALL_WORDS_TO_4)
def test_pal_core_accepts_exactly_the_mirror_words(w):
    m = build_pal_core("1/5", j_sweeps=1).standalone()
    sol = eng.solve_exact(m, w)
    if w == w[::-1]:
        assert sol.p_accept == 1.0
        assert sol.p_reject == 0.0
    else:
        assert sol.p_accept < 1.0
        assert sol.p_accept == pytest.approx(pal_accept(w, 1), abs=1e-9)


@pytest.mark.parametrize(
    "w,j,frozen",
    [
        ("ab", 1, 0.9535483870967721),
        ("abb", 1, 0.875716357108305),
        ("aabb", 2, 0.11985766142159127),
    ],
)
def test_pal_core_frozen_values(w, j, frozen):
    m = build_pal_core("1/5", j_sweeps=j).standalone()
    assert eng.solve_exact(m, w).p_accept == pytest.approx(frozen, abs=1e-9)


def test_pal_core_is_reversal_symmetric():
    m = build_pal_core("1/5", j_sweeps=1).standalone()
    p_fwd = eng.solve_exact(m, "aab").p_accept
    p_rev = eng.solve_exact(m, "baa").p_accept
    assert p_fwd == pytest.approx(p_rev, abs=1e-12)


def test_pal_core_guards():
    with pytest.raises(BuildError):
        build_pal_core("1/5", j_sweeps=-1)
    with pytest.raises(BuildError):
        build_pal_core("1/5", register_dim=2)


@hyp.given(w=st.text(alphabet="ab", max_size=10))
def test_counter_profile_reads_the_word_both_ways(w):
    n = len(w)
    u, x, y, z = counter_profile(w)
    assert u == 8.0 ** -n
    assert x == 2.0 ** -n
    assert y * 8.0 ** n == enc4(w[::-1])
    assert z * 8.0 ** n == enc4(w)
    assert (y == z) == (w == w[::-1])


# ---------------------------------------------------------------------------
# region comparators


def test_same_length_balanced_regions_accept():
    frag = build_same_length(("a",), (0, 3), ("a",), (3, 8), "1/5",
                             input="aa$1aa1", k_core=0)
    assert frag.virtual_input() == "aabb"
    sol = eng.solve_exact(frag.standalone(), frag.virtual_input())
    assert sol.p_accept == 1.0


def test_same_length_unbalanced_regions_leak_like_the_core():
    frag = build_same_length(("a",), (0, 3), ("a",), (3, 9), "1/5",
                             input="aa$1aaa1", k_core=0)
    assert frag.virtual_input() == "aabbb"
    sol = eng.solve_exact(frag.standalone(), frag.virtual_input())
    assert sol.p_accept == pytest.approx(eq_accept(2, 3, 0), abs=1e-12)


def test_same_length_interval_validation():
    with pytest.raises(BuildError, match="always open"):
        build_same_length(("a",), (0, 3, "closed"), ("a",), (3, 8), "1/5",
                          input="aa$1aa1")
    with pytest.raises(BuildError, match="middle signpost"):
        build_same_length(("a",), (0, 3), ("a",), (4, 8), "1/5",
                          input="aa$1aa1")
    with pytest.raises(BuildError, match="interval"):
        build_same_length(("a",), (0,), ("a",), (3, 8), "1/5", input="aa$1aa1")


def test_twice_as_long_odd_separator_split():
    w = "a0a0a0a$a0a0a"
    frag = build_twice_as_long(0, 8, 14, "1/5", input=w, k_core=0)
    assert frag.view.left_count == 2
    assert frag.view.right_count == 3
    sol = eng.solve_exact(frag.standalone(), frag.virtual_input())
    assert sol.p_accept == pytest.approx(eq_accept(2, 3, 0), abs=1e-12)


def test_twice_as_long_even_split_rejects_outright():
    w = "a0a0a$a0a"
    frag = build_twice_as_long(0, 6, 10, "1/5", input=w)
    sol = eng.solve_exact(frag.standalone(), frag.virtual_input())
    assert sol.p_accept == 0.0
    assert sol.p_reject == 1.0


# ---------------------------------------------------------------------------
# prefix mirror check


def test_pal_check_stops_at_the_pattern():
    frag = build_pal_check("$", "1/5", j_sweeps=1, input="ab$1aa1")
    assert frag.metadata["virtual_word"] == "ab"
    sol = eng.solve_exact(frag.standalone(), "ab$1aa1")
    assert sol.p_accept == pytest.approx(pal_accept("ab", 1), abs=1e-9)


def test_pal_check_mirror_prefix_accepts():
    frag = build_pal_check("$", "1/5", j_sweeps=1, input="aba$ab")
    sol = eng.solve_exact(frag.standalone(), "aba$ab")
    assert sol.p_accept == 1.0


def test_pal_check_pattern_validation():
    with pytest.raises(BuildError, match="does not occur"):
        build_pal_check("$", "1/5", input="abab")
    with pytest.raises(BuildError, match="letter-free"):
        build_pal_check("a1", "1/5", input="a1b")
    with pytest.raises(BuildError, match="letter-free"):
        build_pal_check("", "1/5", input="ab")


# ---------------------------------------------------------------------------
# compiled recognizers (small instances; the deeper sweeps live in the
# acceptance suite)


def test_compile_rpal_metadata_records_the_knobs():
    m = compile_rpal(1, "1/5")
    assert m.metadata == {
        "template": "rpal", "level": 1, "epsilon": "1/5",
        "k_eps": 9, "k_core": 9, "j_sweeps": 9,
    }


def test_compile_rpal_member_is_certain():
    m = compile_rpal(1, "1/5")
    sol = eng.solve_exact(m, "aa$1aa1")
    assert sol.p_accept == 1.0
    assert sol.p_reject == 0.0


def test_compile_rpal_nonmirror_head_leaks_like_the_counter_core():
    m = compile_rpal(1, "1/5")
    sol = eng.solve_exact(m, "ab$1aa1")
    # every count check passes with certainty, so the acceptance odds are
    # the counter core's own: frozen against the closed form
    assert sol.p_accept == pytest.approx(pal_accept("ab", 9), abs=2e-6)
    assert sol.p_accept < 1e-3


def test_compile_rpal_wrong_run_length_is_nearly_certainly_caught():
    m = compile_rpal(1, "1/5")
    sol = eng.solve_exact(m, "aa$1aaa1")
    assert sol.p_accept < 1e-6


def test_compile_pppal_member_is_certain():
    m = compile_pppal(1, "1/5")
    assert lk.is_member("pppal", 1, MEMBER_PPPAL1)
    sol = eng.solve_exact(m, MEMBER_PPPAL1)
    assert sol.p_accept == 1.0
    assert sol.p_reject == 0.0


def test_compile_pppal_nonmirror_head_leaks_like_the_counter_core():
    m = compile_pppal(1, "1/5")
    sol = eng.solve_exact(m, NONPAL_PPPAL1)
    assert sol.p_accept == pytest.approx(pal_accept("ab", 9), abs=2e-6)


def test_compile_pppal_level_two_member_is_certain():
    m = compile_pppal(2, "1/5")
    assert lk.is_member("pppal", 2, MEMBER_PPPAL2)
    sol = eng.solve_exact(m, MEMBER_PPPAL2)
    assert sol.p_accept == 1.0


def test_compile_level_three_machines_stay_small():
    assert len(compile_rpal(3, "1/5").states) < 800
    assert len(compile_pppal(3, "1/5").states) < 600


def test_compile_level_validation():
    for bad in (0, -1, "2", 1.5):
        with pytest.raises(BuildError):
            compile_rpal(bad, "1/5")
        with pytest.raises(BuildError):
            compile_pppal(bad, "1/5")


# ---------------------------------------------------------------------------
# round-level interpreter


def test_interpret_is_deterministic_per_seed():
    a = interpret("rpal", 1, "1/5", "ab$1aa1", seed=7, **SMALL)
    b = interpret("rpal", 1, "1/5", "ab$1aa1", seed=7, **SMALL)
    c = interpret("rpal", 1, "1/5", "ab$1aa1", seed=8, **SMALL)
    assert a == b
    assert a.digest != c.digest


def test_interpret_members_always_accept():
    for s in range(100):
        assert interpret("rpal", 1, "1/5", "aa$1aa1", seed=s, **SMALL).verdict == "accept"
        assert interpret("pppal", 1, "1/5", MEMBER_PPPAL1, seed=s, **SMALL).verdict == "accept"


def test_interpret_format_rejects_are_seed_independent():
    for w in ("aa$aa1", "aa$1aa", "aa$$1aa1"):
        reports = [interpret("rpal", 1, "1/5", w, seed=s) for s in (0, 1, 2)]
        assert {r.verdict for r in reports} == {"reject"}
        assert len({(r.steps, r.digest) for r in reports}) == 1


def test_interpret_frequencies_match_the_exact_solver():
    # solver value for these knobs: 0.8369195922988606
    exact = eng.solve_exact(compile_rpal(1, "1/5", **SMALL), "ab$1aa1").p_accept
    trials = 3000
    hits = sum(
        interpret("rpal", 1, "1/5", "ab$1aa1", seed=s, **SMALL).verdict == "accept"
        for s in range(trials)
    )
    margin = 3.89 * math.sqrt(exact * (1.0 - exact) / trials)
    assert abs(hits / trials - exact) < margin


def test_interpret_default_knobs_blow_past_small_step_caps():
    # at epsilon=1/5 the gates make expected running times astronomically
    # long; the interpreter must report the cap honestly
    rep = interpret("rpal", 1, "1/5", "ba$1aa1", seed=0, max_steps=10_000)
    assert rep.verdict == "cutoff"
    assert rep.steps == 10_000


def test_interpret_validates_template_level_and_alphabet():
    with pytest.raises(BuildError):
        interpret("qal", 1, "1/5", "ab")
    with pytest.raises(BuildError):
        interpret("rpal", 0, "1/5", "ab")
    with pytest.raises(ValueError, match="alphabet"):
        interpret("rpal", 1, "1/5", "axb")
