"""Compiled recognizers for the two graded language families.

compile_rpal(i, ...) builds a machine for the recursively tail-extended
mirror words: a base block over {a,b} followed by i extension groups, the
base a mirror word.  compile_pppal(i, ...) builds a machine for the padded
punctuated mirror words with geometric all-a padding.

Both machines share one architecture: a deterministic format scan, a loop
of count-equality checks realized as comparison cores over virtual tapes,
a walk gate that decides when enough check rounds have accumulated, and a
terminal counter core that tests the mirror property of the underlying
letter block.  Every probabilistic ingredient is one-sided: members are
never rejected, so they are accepted with probability exactly one.
"""

from __future__ import annotations

from .. import langkit
from ..machine import LEFT_MARK, RIGHT_MARK
from .base import BuildError, Frag, as_fraction, tuned_rounds
from .cores import emit_eq, emit_pal, emit_rw, _match_table

_LETTERS = "ab"


def _knobs(epsilon, k_eps, k_core, j_sweeps):
    eps = as_fraction(epsilon)
    tuned = tuned_rounds(eps)
    ke = tuned if k_eps is None else int(k_eps)
    kc = tuned if k_core is None else int(k_core)
    js = tuned if j_sweeps is None else int(j_sweeps)
    if min(ke, kc, js) < 0:
        raise BuildError("round counts must be nonnegative")
    return eps, ke, kc, js


def _sdet(b, state, syms, target, move):
    keep = [s for s in syms
            if not (move > 0 and s == RIGHT_MARK)
            and not (move < 0 and s == LEFT_MARK)]
    if keep:
        b.det(state, keep, target, move)


# ---------------------------------------------------------------------------
# tail-extension family: virtual tapes
#
# Group j is delimited by the j-th "$".  Contexts on the prefix side are
# ("L", c, d): c = number of "$" among cells 1..p, d = whether cell p is a
# "$" (so the count stays maintainable in both directions).


class _C1Rpal:
    """Every prefix cell vs the "1" count of group j."""

    def __init__(self, j, i):
        self.j, self.i = j, i

    ctx0 = ("L", 0, 0)

    def right(self, ctx, sym):
        if ctx[0] == "L":
            _, c, d = ctx
            if sym in "ab1":
                nc = ("L", c, 0)
                return ("tok", "A", 0, nc, 1, nc)
            if sym == "$":
                if c + 1 == self.j:
                    return ("skip", ("pm",))
                if c + 1 < self.j:
                    nc = ("L", c + 1, 1)
                    return ("tok", "A", 0, nc, 1, nc)
            return ("dead",)
        if ctx[0] in ("pm", "R"):
            if sym == "1":
                return ("tok", "B", 0, ("R",), 1, ("R",))
            if sym == "a":
                return ("skip", ("R",))
            if sym == "$" and self.j < self.i:
                return ("rend", ("eS",))
            if sym == RIGHT_MARK and self.j == self.i:
                return ("rend", ("eM",))
        return ("dead",)

    def left(self, ctx, sym):
        if ctx[0] in ("R", "eS", "eM"):
            if sym == "1":
                return ("tok", "B", 0, ("R",), 1, ("R",))
            if sym == "a":
                return ("skip", ("R",))
            if sym == "$":
                return ("skip", ("pm",))
            return ("dead",)
        if ctx[0] == "pm":
            c = self.j - 1
        elif ctx[0] == "L":
            c = ctx[1] - ctx[2]
        else:
            return ("dead",)
        if c < 0:
            return ("dead",)
        if sym in "ab1":
            nc = ("L", c, 0)
            return ("tok", "A", 0, nc, 1, nc)
        if sym == "$":
            nc = ("L", c, 1)
            return ("tok", "A", 0, nc, 1, nc)
        if sym == LEFT_MARK:
            return ("lend", 0)
        return ("dead",)


class _C2FirstRpal:
    """Every prefix cell vs the length of group j's first letter run."""

    def __init__(self, j, i):
        self.j, self.i = j, i
        self._l = _C1Rpal(j, i)

    ctx0 = ("L", 0, 0)

    def right(self, ctx, sym):
        if ctx[0] == "L":
            if sym == "$" and ctx[1] + 1 == self.j:
                return ("skip", ("d",))
            return self._l.right(ctx, sym)
        if ctx[0] == "d":
            if sym == "1":
                return ("skip", ("f",))
            return ("dead",)
        if ctx[0] in ("f", "Ra"):
            if sym == "a":
                return ("tok", "B", 0, ("Ra",), 1, ("Ra",))
            if sym == "1" and ctx[0] == "Ra":
                return ("rend", ("e1",))
            return ("dead",)
        return ("dead",)

    def left(self, ctx, sym):
        if ctx[0] in ("e1", "Ra"):
            if sym == "a":
                return ("tok", "B", 0, ("Ra",), 1, ("Ra",))
            if sym == "1":
                return ("skip", ("f",))
            return ("dead",)
        if ctx[0] == "f":
            if sym == "$":
                return ("skip", ("d",))
            return ("dead",)
        if ctx[0] == "d":
            return self._l.left(("pm",), sym)
        if ctx[0] == "L":
            return self._l.left(ctx, sym)
        return ("dead",)


class _C2RestRpal:
    """Adjacent letter runs inside a group, anchored at the run separator."""

    ctx0 = ("A",)

    def right(self, ctx, sym):
        if ctx[0] == "A":
            if sym == "a":
                return ("tok", "A", 0, ("A",), 1, ("A",))
            if sym == "1":
                return ("skip", ("m",))
            return ("dead",)
        if ctx[0] in ("m", "B"):
            if sym == "a":
                return ("tok", "B", 0, ("B",), 1, ("B",))
            if sym == "1":
                return ("rend", ("e",))
        return ("dead",)

    def left(self, ctx, sym):
        if ctx[0] in ("e", "B"):
            if sym == "a":
                return ("tok", "B", 0, ("B",), 1, ("B",))
            if sym == "1":
                return ("skip", ("m",))
            return ("dead",)
        if ctx[0] == "m":
            if sym == "a":
                return ("tok", "A", 0, ("A",), 1, ("A",))
            return ("dead",)
        if ctx[0] == "A":
            if sym == "a":
                return ("tok", "A", 0, ("A",), 1, ("A",))
            if sym == "1":
                return ("lend", 0)
        return ("dead",)


def compile_rpal(i, epsilon, k_eps=None, *, k_core=None, j_sweeps=None):
    """Recognizer for level-i recursively tail-extended mirror words."""
    if not isinstance(i, int) or i < 1:
        raise BuildError(f"level must be a positive integer, got {i!r}")
    eps, ke, kc, js = _knobs(epsilon, k_eps, k_core, j_sweeps)
    b = Frag("", "ab$1", 4)
    acc = b.hook("accept")
    rej = b.hook("reject")

    # format scan: base block of >= 2 letters, then exactly i groups, each
    # "$1" followed by one or more "letter-run + 1" units (runs all-a).
    b.det(b.st("r.boot"), [LEFT_MARK], b.st("r.first"), 1)
    b.det(b.st("r.first"), _LETTERS, b.st("r.body"), 1)
    b.det(b.st("r.body"), _LETTERS, "r.body", 1)
    b.det("r.body", ["$"], b.st("r.g1_1"), 1)
    for c in range(1, i + 1):
        b.det(b.st(f"r.g1_{c}"), ["1"], b.st(f"r.g2_{c}"), 1)
        b.det(f"r.g2_{c}", ["a"], b.st(f"r.g3_{c}"), 1)
        b.det(f"r.g3_{c}", ["a"], f"r.g3_{c}", 1)
        b.det(f"r.g3_{c}", ["1"], b.st(f"r.g4_{c}"), 1)
        b.det(f"r.g4_{c}", ["a"], f"r.g3_{c}", 1)
        if c < i:
            b.det(f"r.g4_{c}", ["$"], b.st(f"r.g1_{c + 1}"), 1)
    b.det(f"r.g4_{i}", [RIGHT_MARK], b.st("m.c1pre_1"), 0)

    # check loop: per group, a rewind into the "1"-count check, a rewind
    # into the first-run check, then a chain of adjacent-run checks.
    for j in range(1, i + 1):
        pre1 = b.st(f"m.c1pre_{j}")
        for sym in b.tape_symbols:
            if sym != LEFT_MARK:
                b.det(pre1, [sym], pre1, -1)
        pre2 = b.st(f"m.c2pre_{j}")
        entry1 = emit_eq(b, f"c1_{j}", _C1Rpal(j, i), kc, reject=rej, cont=pre2)
        b.det(pre1, [LEFT_MARK], entry1, 0)
        for sym in b.tape_symbols:
            if sym != LEFT_MARK:
                b.det(pre2, [sym], pre2, -1)
        adv = b.st(f"m.adv_{j}")
        entry2 = emit_eq(b, f"c2f_{j}", _C2FirstRpal(j, i), kc,
                         reject=rej, cont=adv)
        b.det(pre2, [LEFT_MARK], entry2, 0)
        scan = b.st(f"m.advs_{j}")
        b.det(adv, ["1"], scan, 1)
        b.det(scan, ["a"], scan, 1)
        preA = b.st(f"m.preA_{j}")
        preB = b.st(f"m.preB_{j}")
        b.det(scan, ["1"], preA, -1)
        b.det(preA, ["a"], preA, -1)
        b.det(preA, ["1"], preB, -1)
        b.det(preB, ["a"], preB, -1)
        entry3 = emit_eq(b, f"c2r_{j}", _C2RestRpal(), kc, reject=rej, cont=adv)
        b.det(preB, ["1"], entry3, 0)
        if j < i:
            b.det(scan, ["$"], b.st(f"m.c1pre_{j + 1}"), 0)
        else:
            b.det(scan, [RIGHT_MARK], b.st("rw.rew"), 0)

    pal_entry = emit_pal(b, "p", "$", js, accept=acc, reject=rej)
    emit_rw(b, "rw", ke, exit_to=pal_entry, cont="m.c1pre_1")

    return b.machine("r.boot", accept=acc, reject=rej, metadata={
        "template": "rpal", "level": i, "epsilon": str(eps),
        "k_eps": ke, "k_core": kc, "j_sweeps": js,
    })


# ---------------------------------------------------------------------------
# padded punctuated family: virtual tapes
#
# Separator runs all have the delimiter width c, except the single-cell "$"
# level boundaries.  The adjacent-segment check crosses its separator with
# a width countdown; the level-boundary check takes the "$" itself as the
# first right-hand token; the level-doubling check selects every other
# separator on the left (sound once the run count is known to be odd, which
# a deterministic parity pass establishes before the core is entered).


class _C1Pppal:
    """Adjacent segments across one width-c separator."""

    def __init__(self, c):
        self.c = c

    ctx0 = ("P",)

    def right(self, ctx, sym):
        if ctx[0] in ("P", "A"):
            if sym in _LETTERS:
                return ("tok", "A", 0, ("A",), 1, ("A",))
            if sym in "01":
                return ("skip", ("S", self.c - 1))
            return ("dead",)
        if ctx[0] == "S":
            t = ctx[1]
            if t == 0:
                if sym in _LETTERS:
                    return ("tok", "B", 0, ("B",), 1, ("B",))
                return ("dead",)
            if sym in "01":
                return ("skip", ("S", t - 1))
            return ("dead",)
        if ctx[0] == "B":
            if sym in _LETTERS:
                return ("tok", "B", 0, ("B",), 1, ("B",))
            return ("rend", ("E",))
        return ("dead",)

    def left(self, ctx, sym):
        if ctx[0] in ("E", "B"):
            if sym in _LETTERS:
                return ("tok", "B", 0, ("B",), 1, ("B",))
            if sym in "01":
                return ("skip", ("T", self.c - 1))
            return ("dead",)
        if ctx[0] == "T":
            t = ctx[1]
            if t == 0:
                if sym in _LETTERS:
                    return ("tok", "A", 0, ("A",), 1, ("A",))
                return ("dead",)
            if sym in "01":
                return ("skip", ("T", t - 1))
            return ("dead",)
        if ctx[0] == "A":
            if sym in _LETTERS:
                return ("tok", "A", 0, ("A",), 1, ("A",))
            return ("lend", 0)
        return ("dead",)


class _C2Pppal:
    """Segment lengths across a level boundary; the "$" counts right."""

    ctx0 = ("P",)

    def right(self, ctx, sym):
        if ctx[0] in ("P", "A"):
            if sym in _LETTERS:
                return ("tok", "A", 0, ("A",), 1, ("A",))
            if sym == "$":
                return ("tok", "B", 0, ("D",), 1, ("D",))
            return ("dead",)
        if ctx[0] in ("D", "B"):
            if sym in _LETTERS:
                return ("tok", "B", 0, ("B",), 1, ("B",))
            return ("rend", ("E",))
        return ("dead",)

    def left(self, ctx, sym):
        if ctx[0] in ("E", "B"):
            if sym in _LETTERS:
                return ("tok", "B", 0, ("B",), 1, ("B",))
            if sym == "$":
                return ("tok", "B", 0, ("D",), 1, ("D",))
            return ("dead",)
        if ctx[0] == "D":
            if sym in _LETTERS:
                return ("tok", "A", 0, ("A",), 1, ("A",))
            return ("dead",)
        if ctx[0] == "A":
            if sym in _LETTERS:
                return ("tok", "A", 0, ("A",), 1, ("A",))
            return ("lend", 0)
        return ("dead",)


class _TwPppal:
    """Level doubling: every other upper separator vs all lower separators.

    Upper-side selection tracks run parity; walking leftward it tracks the
    parity of runs already to the right, which identifies the selected runs
    exactly when the total count is odd - guaranteed by the deterministic
    parity pass that guards this core.
    """

    def __init__(self, c):
        self.c = c

    ctx0 = ("L", 0)

    def _sep_done_right(self, par):
        if par == 0:
            return ("tok", "A", 0, ("Lt", 1), self.c, ("Ll", 1))
        return ("skip", ("Lt", 0))

    def _sep_done_left(self, rp, bt):
        if rp % 2 == 0:
            return ("tok", "A", bt, ("Lt", 1), self.c, ("Ll", (rp + 1) % 2))
        return ("skip", ("Ll", (rp + 1) % 2))

    def right(self, ctx, sym):
        c = self.c
        if ctx[0] == "L":
            par = ctx[1]
            if sym in _LETTERS:
                return ("skip", ("L", par))
            if sym in "01":
                if c == 1:
                    return self._sep_done_right(par)
                return ("skip", ("Lc", par, c - 1))
            if sym == "$":
                return ("tok", "B", 0, ("RD",), 1, ("Ll", 0))
            return ("dead",)
        if ctx[0] == "Lc":
            par, r = ctx[1], ctx[2]
            if sym in "01":
                if r == 1:
                    return self._sep_done_right(par)
                return ("skip", ("Lc", par, r - 1))
            return ("dead",)
        if ctx[0] == "Lt":
            if sym in _LETTERS:
                return ("skip", ("L", ctx[1]))
            return ("dead",)
        if ctx[0] in ("RD", "Rt"):
            if sym in _LETTERS:
                return ("skip", ("RL",))
            return ("dead",)
        if ctx[0] == "RL":
            if sym in _LETTERS:
                return ("skip", ("RL",))
            if sym in "01":
                if c == 1:
                    return ("tok", "B", 0, ("Rt",), 1, ("Rl",))
                return ("skip", ("Rc", c - 1))
            return ("rend", ("E",))
        if ctx[0] == "Rc":
            r = ctx[1]
            if sym in "01":
                if r == 1:
                    return ("tok", "B", 0, ("Rt",), c, ("Rl",))
                return ("skip", ("Rc", r - 1))
            return ("dead",)
        return ("dead",)

    def left(self, ctx, sym):
        c = self.c
        if ctx[0] == "E":
            if sym in _LETTERS:
                return ("skip", ("Rl",))
            return ("dead",)
        if ctx[0] == "Rl":
            if sym in _LETTERS:
                return ("skip", ("Rl",))
            if sym in "01":
                if c == 1:
                    return ("tok", "B", 0, ("Rt",), 1, ("Rl",))
                return ("skip", ("Rx", c - 1))
            if sym == "$":
                return ("tok", "B", 0, ("RD",), 1, ("Ll", 0))
            return ("dead",)
        if ctx[0] == "Rx":
            rem = ctx[1]
            if sym in "01":
                if rem == 1:
                    return ("tok", "B", c - 1, ("Rt",), c, ("Rl",))
                return ("skip", ("Rx", rem - 1))
            return ("dead",)
        if ctx[0] == "Ll":
            rp = ctx[1]
            if sym in _LETTERS:
                return ("skip", ("Ll", rp))
            if sym in "01":
                if c == 1:
                    return self._sep_done_left(rp, 0)
                return ("skip", ("Lx", rp, c - 1))
            if sym in ("$", LEFT_MARK):
                return ("lend", 0)
            return ("dead",)
        if ctx[0] == "Lx":
            rp, rem = ctx[1], ctx[2]
            if sym in "01":
                if rem == 1:
                    return self._sep_done_left(rp, c - 1)
                return ("skip", ("Lx", rp, rem - 1))
            return ("dead",)
        return ("dead",)


class _C3Pppal:
    """Delimiter census per span vs segment length minus one.

    Left tokens are the runs equal to the value-(j-1) delimiter; the span's
    closing high delimiter is crossed and the first following letter (the
    ruler segment's head) is excluded from the right-hand tokens.  Walking
    leftward through the ruler segment, a letter is classified one cell
    late so the excluded head can be recognized by the non-letter beyond it.
    """

    def __init__(self, c, tok_run, high_runs, low_runs):
        self.c = c
        self.tok = tok_run
        self.high = frozenset(high_runs)
        self.low = frozenset(low_runs)

    ctx0 = ("l",)

    def _classify_right(self, s):
        if s == self.tok:
            return ("tok", "A", 0, ("rt",), self.c, ("ll",))
        if s in self.high:
            return ("skip", ("pm1",))
        if s in self.low:
            return ("skip", ("rt",))
        return ("dead",)

    def right(self, ctx, sym):
        if ctx[0] == "l":
            if sym in _LETTERS:
                return ("skip", ("l",))
            if sym in "01":
                if self.c == 1:
                    return self._classify_right(sym)
                return ("skip", ("rx", sym))
            return ("dead",)
        if ctx[0] == "rx":
            s = ctx[1]
            if sym in "01":
                s2 = s + sym
                if len(s2) == self.c:
                    return self._classify_right(s2)
                return ("skip", ("rx", s2))
            return ("dead",)
        if ctx[0] == "rt":
            if sym in _LETTERS:
                return ("skip", ("l",))
            return ("dead",)
        if ctx[0] == "pm1":
            if sym in _LETTERS:
                return ("skip", ("rr",))
            return ("dead",)
        if ctx[0] == "rr":
            if sym in _LETTERS:
                return ("tok", "B", 0, ("rr",), 2, ("rp",))
            return ("rend", ("E",))
        return ("dead",)

    def _classify_left(self, rev):
        s = rev[::-1]
        if s == self.tok:
            return ("tok", "A", self.c - 1, ("rt",), self.c, ("ll",))
        if s in self.high:
            return ("lend", self.c - 1)
        if s in self.low:
            return ("skip", ("ll",))
        return ("dead",)

    def left(self, ctx, sym):
        if ctx[0] == "E":
            if sym in _LETTERS:
                return ("skip", ("rp",))
            return ("dead",)
        if ctx[0] == "rp":
            if sym in _LETTERS:
                return ("tok", "B", 1, ("rr",), 2, ("rp",))
            if sym in "01":
                if self.c == 1:
                    return ("skip", ("dx0",))
                return ("skip", ("dx", self.c - 1))
            return ("dead",)
        if ctx[0] == "dx":
            rem = ctx[1]
            if sym in "01":
                if rem == 1:
                    return ("skip", ("dx0",))
                return ("skip", ("dx", rem - 1))
            return ("dead",)
        if ctx[0] == "dx0":
            if sym in _LETTERS:
                return ("skip", ("ll",))
            return ("dead",)
        if ctx[0] == "ll":
            if sym in _LETTERS:
                return ("skip", ("ll",))
            if sym in "01":
                if self.c == 1:
                    return self._classify_left(sym)
                return ("skip", ("lx", sym))
            if sym == LEFT_MARK:
                return ("lend", 0)
            return ("dead",)
        if ctx[0] == "lx":
            rev = ctx[1]
            if sym in "01":
                rev2 = rev + sym
                if len(rev2) == self.c:
                    return self._classify_left(rev2)
                return ("skip", ("lx", rev2))
            return ("dead",)
        return ("dead",)


def compile_pppal(i, epsilon, k_eps=None, *, k_core=None, j_sweeps=None):
    """Recognizer for level-i padded punctuated mirror words."""
    if not isinstance(i, int) or i < 1:
        raise BuildError(f"level must be a positive integer, got {i!r}")
    eps, ke, kc, js = _knobs(epsilon, k_eps, k_core, j_sweeps)
    params = langkit.lang_params(i)
    c = params.delim_width
    cb = {l: langkit.cbin(params, l) for l in range(1, i + 1)}
    zeros = "0" * c
    b = Frag("", "ab01$", 4)
    acc = b.hook("accept")
    rej = b.hook("reject")

    # --- format scan, forward half: first cell is a letter; every
    # separator run is a known delimiter, the all-zeros run, or "$"; the
    # top-value delimiter occurs exactly once; before it no "$"/zeros run
    # appears, after it only those do and letters are all "a".
    b.det(b.st("r.boot"), [LEFT_MARK], b.st("r.seg0f"), 1)
    b.det(b.st("r.seg0f"), _LETTERS, b.st("r.seg0"), 1)
    runs = sorted(set(cb.values()) | {zeros})

    def run_states(beta):
        seg = f"r.seg{beta}"
        letters = _LETTERS if beta == 0 else "a"
        b.det(b.st(seg), list(letters), seg, 1)
        prefixes = sorted({r[:t] for r in runs for t in range(1, len(r))})
        for p in prefixes:
            st = b.st(f"r.run{beta}_{p}")
            src = seg if len(p) == 1 else f"r.run{beta}_{p[:-1]}"
            b.det(src, [p[-1]], st, 1)
        for r in runs:
            fin = b.st(f"r.fin{beta}_{r}")
            src = seg if len(r) == 1 else f"r.run{beta}_{r[:-1]}"
            b.det(src, [r[-1]], fin, 1)
        return seg

    run_states(0)
    run_states(1)
    for r in runs:
        if r == cb[i]:
            b.det(f"r.fin0_{r}", ["a"], "r.seg1", 1)
        elif r != zeros and i > 1:
            b.det(f"r.fin0_{r}", _LETTERS, "r.seg0", 1)
        if r == zeros:
            b.det(f"r.fin1_{r}", ["a"], "r.seg1", 1)
    b.det("r.seg1", ["$"], b.st("r.dol"), 1)
    b.det("r.dol", ["a"], "r.seg1", 1)
    b.det("r.seg1", [RIGHT_MARK], b.st("r.p_a1"), -1)

    # --- format scan, backward half: the string ends with "$ a zeros a".
    b.det("r.p_a1", ["a"], b.st("r.p_z1"), -1)
    for t in range(1, c + 1):
        nxt = b.st("r.p_a2") if t == c else b.st(f"r.p_z{t + 1}")
        b.det(f"r.p_z{t}", ["0"], nxt, -1)
    b.det("r.p_a2", ["a"], b.st("r.p_d"), -1)
    b.det("r.p_d", ["$"], b.st("m.toend"), 1)

    # --- check loop over separators, right to left.
    for sym in b.tape_symbols:
        if sym != RIGHT_MARK:
            b.det("m.toend", [sym], "m.toend", 1)
    b.det("m.toend", [RIGHT_MARK], b.st("m.st3"), -1)
    st1, st2, st3 = b.st("m.st1"), b.st("m.st2"), b.st("m.st3")
    st4n, st4d = b.st("m.st4n"), b.st("m.st4d")
    st5n, st5d = b.st("m.st5n"), b.st("m.st5d")
    b.det(st1, _LETTERS, st1, -1)
    b.det(st1, ["0", "1", "$"], st2, -1)
    b.det(st2, ["0", "1", "$"], st2, -1)
    b.det(st2, _LETTERS, st3, -1)
    b.det(st3, _LETTERS, st3, -1)
    b.det(st3, ["0", "1"], st4n, -1)
    b.det(st3, ["$"], st4d, -1)
    loop_done = b.st(f"l{i}.k0") if i > 1 else b.st("rw.rew")
    b.det(st3, [LEFT_MARK], loop_done, 1 if i > 1 else 0)
    b.det(st4n, ["0", "1"], st4n, -1)
    b.det(st4n, ["$"], st4d, -1)
    b.det(st4d, ["0", "1", "$"], st4d, -1)
    mexit = b.st("m.exit")
    c1_entry = emit_eq(b, "mc1", _C1Pppal(c), kc, reject=rej, cont=mexit)
    c2_entry = emit_eq(b, "mc2", _C2Pppal(), kc, reject=rej, cont=mexit)
    b.det(st4n, _LETTERS, st5n, -1)
    b.det(st4d, _LETTERS, st5d, -1)
    b.det(st5n, _LETTERS, st5n, -1)
    b.det(st5n, ["0", "1", "$", LEFT_MARK], c1_entry, 0)
    b.det(st5d, _LETTERS, st5d, -1)
    b.det(st5d, ["0", "1", "$", LEFT_MARK], c2_entry, 0)
    b.det(mexit, ["0", "1"], st1, -1)

    # --- level-doubling detour, fired when a check exits on "$" or the
    # right endmarker: locate the level pair, run the deterministic parity
    # pass, then the comparison core.
    seekm, seekl = b.st("t.seekm"), b.st("t.seekl")
    back = b.st("t.back")
    b.det(mexit, ["$", RIGHT_MARK], seekm, -1)
    b.det(seekm, list("ab01"), seekm, -1)
    b.det(seekm, ["$"], seekl, -1)
    b.det(seekm, [LEFT_MARK], back, 1)
    b.det(seekl, list("ab01"), seekl, -1)
    b.det(back, list("ab01"), back, 1)
    b.det(back, ["$", RIGHT_MARK], st1, -1)
    even0, even1 = b.st("t.even0"), b.st("t.even1")
    evenr0, evenr1 = b.st("t.evenr0"), b.st("t.evenr1")
    b.det(seekl, ["$", LEFT_MARK], even0, 1)
    b.det(even0, _LETTERS, even0, 1)
    b.det(even0, ["0", "1"], evenr1, 1)
    b.det(evenr1, ["0", "1"], evenr1, 1)
    b.det(evenr1, _LETTERS, even1, 1)
    b.det(even1, _LETTERS, even1, 1)
    b.det(even1, ["0", "1"], evenr0, 1)
    b.det(evenr0, ["0", "1"], evenr0, 1)
    b.det(evenr0, _LETTERS, even0, 1)
    back0 = b.st("t.back0")
    b.det(even1, ["$"], back0, -1)
    b.det(back0, list("ab01"), back0, -1)
    tdone = b.st("t.done")
    tw_entry = emit_eq(b, "twc", _TwPppal(c), kc, reject=rej, cont=tdone)
    b.det(back0, ["$", LEFT_MARK], tw_entry, 0)
    b.det(tdone, ["$", RIGHT_MARK], st1, -1)

    # --- census stage (levels above 1): for each delimiter value from the
    # top down to 2, sweep the high delimiters right to left, comparing
    # each span's value-(j-1) census against its ruler segment.
    for j in range(i, 1, -1):
        table = _match_table(cb[i], b.tape_symbols)
        L = len(cb[i])
        for q in range(L):
            kq = b.st(f"l{j}.k{q}")
            for sym in "ab01":
                q2 = table[(q, sym)]
                if q2 == L:
                    b.det(kq, [sym], b.st(f"l{j}.pm0"), 1)
                else:
                    b.det(kq, [sym], b.st(f"l{j}.k{q2}"), 1)
        high = {cb[l] for l in range(j, i + 1)}
        low = {cb[l] for l in range(1, j - 1)}
        vt = _C3Pppal(c, cb[j - 1], high, low)
        nav = b.st(f"l{j}.nav")
        c3_entry = emit_eq(b, f"c3_{j}", vt, kc, reject=rej, cont=nav)

        def hopchain(tag, count, move, target):
            cur = target
            for t in range(count):
                st = b.st(f"l{j}.{tag}{t}")
                _sdet(b, st, b.tape_symbols, cur, move)
                cur = st
            return cur

        def xstates(tag, src, hop_target, hop_move, skip_target, rerun):
            # leftward run reader: states follow the reversed content.
            scans = sorted({r[::-1] for r in runs})
            prefixes = sorted({s[:t] for s in scans for t in range(1, len(s))})
            for p in prefixes:
                st = b.st(f"l{j}.{tag}{p}")
                from_st = src if len(p) == 1 else f"l{j}.{tag}{p[:-1]}"
                b.det(from_st, [p[-1]], st, -1)
            for s in scans:
                from_st = src if len(s) == 1 else f"l{j}.{tag}{s[:-1]}"
                actual = s[::-1]
                if actual in high:
                    b.det(from_st, [s[-1]], hop_target, hop_move)
                elif actual in low or actual == cb[j - 1]:
                    b.det(from_st, [s[-1]], skip_target, -1)
            b.det(src, [LEFT_MARK], rerun[0], rerun[1])

        # entry navigation: from the ruler head, cross the high delimiter
        # and walk left to the previous high delimiter (or the left mark).
        pm0 = b.st(f"l{j}.pm0")
        pl = b.st(f"l{j}.pl")
        b.det(pm0, _LETTERS, hopchain("d", c, -1, pl), -1)
        b.det(pl, _LETTERS, pl, -1)
        if c > 1:
            xstates("x", pl, hopchain("h", c - 2, 1, c3_entry), 1, pl,
                    (c3_entry, 0))
        else:
            xstates("x", pl, c3_entry, 0, pl, (c3_entry, 0))
        # exit navigation: from the check's exit separator, cross the
        # checked high delimiter again and search on for the next one.
        n1 = b.st(f"l{j}.n1")
        b.det(nav, ["0", "1"], n1, -1)
        b.det(n1, _LETTERS, n1, -1)
        pl2 = b.st(f"l{j}.pl2")
        b.det(n1, ["0", "1"], hopchain("nd", c - 1, -1, pl2), -1)
        b.det(pl2, _LETTERS, pl2, -1)
        nxt = (b.st(f"l{j - 1}.k0"), 1) if j > 2 else (b.st("rw.rew"), 0)
        xstates("y", pl2, hopchain("g", c - 1, 1, pm0), 1, pl2, nxt)

    pal_entry = emit_pal(b, "p", cb[i], js, accept=acc, reject=rej)
    emit_rw(b, "rw", ke, exit_to=pal_entry, cont="m.toend")

    return b.machine("r.boot", accept=acc, reject=rej, metadata={
        "template": "pppal", "level": i, "epsilon": str(eps),
        "k_eps": ke, "k_core": kc, "j_sweeps": js,
    })
