"""Round-level reference interpreter for the two compiled recognizers.

interpret() replays the recognition procedure of compile_rpal /
compile_pppal without building a machine: the format scan is an ordinary
string scan, and every probabilistic stage is resolved by one absorbed
draw with the exact per-activation probabilities of the corresponding
core.  A comparison round over counts (a, b) with v = a + b tokens
rejects with sin^2((a-b)*theta) per cycle and exits with
2^-k_core/(v+1)^2, the walk gate fires with 2^-k_eps/(n+1) per entry,
and the terminal counter core's cycle weights come from a direct
four-axis register simulation.  Verdict distributions therefore agree
with the compiled machines on format-clean inputs; step counts are
coarse estimates of tape work, not exact transition counts.

The digest field hashes the sequence of round outcomes, so reruns with
one seed are reproducible, but the value is not comparable with the
trajectory digests of the step-level engine.
"""

from __future__ import annotations

import math
import random
import re

import numpy as np

from .. import langkit
from ..engines import RunReport
from ..machine import ACCEPT, REJECT
from .base import BuildError
from .cores import THETA, _match_table, counter_step, diff_rotation
from .templates import _knobs

_FNV_OFF = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF

_ALPHABETS = {"rpal": "ab$1", "pppal": "ab01$"}


class _Halt(Exception):
    def __init__(self, verdict):
        self.verdict = verdict


class _Trace:
    """Seeded draw source with a work estimate and a rolling outcome hash."""

    def __init__(self, seed, max_steps):
        self.rng = random.Random(seed)
        self.steps = 0
        self.max_steps = max_steps
        self.h = _FNV_OFF

    def note(self, tag, outcome):
        for byte in f"{tag}:{outcome};".encode():
            self.h = ((self.h ^ byte) * _FNV_PRIME) & _MASK

    def charge(self, amount):
        self.steps += int(amount)
        if self.steps > self.max_steps:
            raise _Halt("cutoff")

    def cycles(self, p_stop):
        """Number of inner cycles until an absorbing outcome lands."""
        if p_stop >= 1.0:
            return 1
        u = self.rng.random()
        return int(math.log1p(-u) / math.log1p(-p_stop)) + 1


def _eq_round(tr, tag, a, b, span, k_core):
    """One comparison-core activation; raises on reject, returns on pass."""
    v = a + b
    p_bad = math.sin((a - b) * THETA) ** 2
    gate = 0.5 ** k_core / float((v + 1) ** 2)
    stop = p_bad + (1.0 - p_bad) * gate
    n = tr.cycles(stop)
    tr.charge(n * (3 * span + 2 * v + k_core + 6))
    rejected = tr.rng.random() * stop < p_bad
    tr.note(tag, "bad" if rejected else "ok")
    if rejected:
        raise _Halt(REJECT)


def _walk_gate(tr, n_len, k_eps):
    gate = 0.5 ** k_eps / float(n_len + 1)
    fired = tr.rng.random() < gate
    tr.note("gate", "exit" if fired else "loop")
    tr.charge(2 * n_len + k_eps + 6)
    return fired


def _counter_core(tr, word, j_sweeps):
    """Terminal mirror check; always raises with the absorbed verdict."""
    psi = np.array([math.sqrt(0.5), math.sqrt(0.5), 0.0, 0.0], dtype=complex)
    for ch in word:
        psi = _go_step(ch) @ psi
    p_pass = float(np.real(np.vdot(psi, psi)))
    phi = _diff_matrix() @ psi
    p_diff = float(abs(phi[2]) ** 2)
    p_acc = (p_pass - p_diff) * 0.5 ** (j_sweeps * len(word))
    stop = p_diff + p_acc
    n = tr.cycles(stop)
    tr.charge(n * (len(word) * (j_sweeps + 2) + 6))
    accepted = tr.rng.random() * stop < p_acc
    tr.note("mirror", "acc" if accepted else "rej")
    raise _Halt(ACCEPT if accepted else REJECT)


_op_cache = {}


def _go_step(ch):
    if ch not in _op_cache:
        _op_cache[ch] = dict(counter_step(ch).branches)["go"]
    return _op_cache[ch]


def _diff_matrix():
    if "diff" not in _op_cache:
        _op_cache["diff"] = diff_rotation().branches[0][1]
    return _op_cache["diff"]


def _fed_letters(w, pattern, symbols):
    """Letters read before the first pattern match; letters reset progress."""
    table = _match_table(pattern, symbols)
    fed, q = [], 0
    for ch in w:
        if ch in "ab":
            fed.append(ch)
            q = 0
        else:
            q = table[(q, ch)]
            if q == len(pattern):
                break
    return "".join(fed)


# ---------------------------------------------------------------------------
# tail-extension family


def _rpal_groups(i, w):
    """Per-group (prefix_cells, one_count, a_run_lengths), or None."""
    if re.fullmatch(r"[ab]{2,}(?:\$1(?:a+1)+){%d}" % i, w) is None:
        return None
    parts = w.split("$")
    groups = []
    prefix = len(parts[0])
    for body in parts[1:]:
        runs = [len(r) for r in body.split("1") if r]
        groups.append((prefix, body.count("1"), runs))
        prefix += 1 + len(body)
    return groups


def _run_rpal(tr, i, w, ke, kc, js):
    groups = _rpal_groups(i, w)
    tr.charge(len(w) + 2)
    if groups is None:
        tr.note("format", "bad")
        raise _Halt(REJECT)
    tr.note("format", "ok")
    while True:
        for j, (prefix, ones, runs) in enumerate(groups, start=1):
            span = prefix + 1 + ones + sum(runs)
            _eq_round(tr, f"c1_{j}", prefix, ones, span, kc)
            _eq_round(tr, f"c2f_{j}", prefix, runs[0], span, kc)
            for t in range(len(runs) - 1):
                _eq_round(tr, f"c2r_{j}_{t}", runs[t], runs[t + 1],
                          runs[t] + runs[t + 1] + 1, kc)
        if _walk_gate(tr, len(w), ke):
            _counter_core(tr, w[:w.index("$")], js)


# ---------------------------------------------------------------------------
# padded punctuated family


def _pppal_shape(w, c, low, top, zeros):
    """Mirror of the compiled format scan: True when the scan survives."""
    n = len(w)
    if n == 0 or w[0] not in "ab":
        return False
    if not w.endswith("$a" + zeros + "a"):
        return False
    pos, beta = 0, False
    while pos < n:
        ch = w[pos]
        if ch in "ab":
            if beta and ch != "a":
                return False
            pos += 1
        elif ch == "$":
            if not beta or pos + 1 >= n or w[pos + 1] != "a":
                return False
            pos += 1
        elif ch in "01":
            end = pos
            while end < n and w[end] in "01":
                end += 1
            run = w[pos:end]
            if len(run) != c or end >= n or w[end] not in "ab":
                return False
            if beta:
                if run != zeros:
                    return False
            elif run == top:
                beta = True
                if w[end] != "a":
                    return False
            elif run not in low:
                return False
            pos = end
        else:
            return False
    return beta


def _segments(w):
    """Separator runs as (start, end, kind) with the letter gaps around them."""
    seps = []
    for m in re.finditer(r"[01]+|\$", w):
        seps.append((m.start(), m.end(), "$" if m.group() == "$" else "01"))
    return seps


def _letter_run_right(w, pos):
    end = pos
    while end < len(w) and w[end] in "ab":
        end += 1
    return end - pos


def _letter_run_left(w, pos):
    start = pos
    while start > 0 and w[start - 1] in "ab":
        start -= 1
    return pos - start


def _run_pppal(tr, i, w, ke, kc, js, params):
    c = params.delim_width
    cb = {l: langkit.cbin(params, l) for l in range(1, i + 1)}
    zeros = "0" * c
    low = {cb[l] for l in range(1, i)}
    tr.charge(2 * len(w) + 4)
    if not _pppal_shape(w, c, low, cb[i], zeros):
        tr.note("format", "bad")
        raise _Halt(REJECT)
    tr.note("format", "ok")

    seps = _segments(w)
    dollars = [s for s in seps if s[2] == "$"]
    # level-doubling pairs: each "$" splits off one (upper, lower) block
    doublings = []
    for t, (start, end, _) in enumerate(dollars):
        lo_bound = start
        hi_bound = dollars[t + 1][0] if t + 1 < len(dollars) else len(w)
        up_bound = dollars[t - 1][1] if t > 0 else 0
        uppers = sum(1 for s in seps if up_bound <= s[0] and s[1] <= lo_bound)
        lowers = sum(1 for s in seps
                     if lo_bound <= s[0] and s[1] <= hi_bound)
        doublings.append((uppers, lowers, lo_bound - up_bound,
                          hi_bound - lo_bound))

    # census spans per delimiter value, top down: high delimiters cut the
    # region left of the padding into spans whose value-(j-1) count must
    # match the ruler segment right of the span's closing delimiter.
    stages = []
    for j in range(i, 1, -1):
        highs = [s for s in seps
                 if s[2] == "01" and w[s[0]:s[1]] in {cb[l] for l in range(j, i + 1)}]
        spans = []
        left = 0
        for start, end, _ in highs:
            count = sum(1 for s in seps
                        if s[2] == "01" and left <= s[0] and s[1] <= start
                        and w[s[0]:s[1]] == cb[j - 1])
            ruler = _letter_run_right(w, end)
            after = end + ruler
            spans.append((count, ruler - 1, start - left + ruler + c,
                          after < len(w) and w[after] == "$"))
            left = end
        stages.append((j, spans))

    while True:
        # separator loop, right to left: segment-balance checks
        for start, end, kind in reversed(seps):
            a = _letter_run_left(w, start)
            rgt = _letter_run_right(w, end)
            span = a + (end - start) + rgt + 2
            if kind == "$":
                _eq_round(tr, f"c2_{start}", a, 1 + rgt, span, kc)
            else:
                _eq_round(tr, f"c1_{start}", a, rgt, span, kc)
        for t, (uppers, lowers, wu, wl) in enumerate(doublings):
            if uppers % 2 == 0:
                tr.note(f"parity_{t}", "even")
                raise _Halt(REJECT)
            tr.note(f"parity_{t}", "odd")
            _eq_round(tr, f"tw_{t}", (uppers + 1) // 2, lowers,
                      wu + wl + 2, kc)
        for j, spans in stages:
            for t, (count, ruler, span, blocked) in enumerate(spans):
                _eq_round(tr, f"c3_{j}_{t}", count, ruler, span, kc)
                if blocked:
                    # the exit walk needs a delimiter after the ruler; a
                    # "$" there means the shape cannot carry this level
                    tr.note(f"c3exit_{j}_{t}", "dollar")
                    raise _Halt(REJECT)
        if _walk_gate(tr, len(w), ke):
            _counter_core(tr, _fed_letters(w, cb[i], "ab01$"), js)


# ---------------------------------------------------------------------------
# public entry point


def interpret(template, i, epsilon, word, seed=0, *, max_steps=10 ** 7,
              k_eps=None, k_core=None, j_sweeps=None):
    """Run the round-level reference recognizer on one input word.

    Returns an engines-style RunReport whose verdict is distributed
    exactly as a trajectory of the corresponding compiled machine, up to
    the coarser step accounting described in the module docstring.
    """
    if template not in _ALPHABETS:
        raise BuildError(f"unknown template {template!r}")
    if not isinstance(i, int) or i < 1:
        raise BuildError(f"level must be a positive integer, got {i!r}")
    _, ke, kc, js = _knobs(epsilon, k_eps, k_core, j_sweeps)
    alphabet = _ALPHABETS[template]
    if any(ch not in alphabet for ch in word):
        raise ValueError(f"input leaves the {template} alphabet {alphabet!r}")
    tr = _Trace(seed, max_steps)
    try:
        if template == "rpal":
            _run_rpal(tr, i, word, ke, kc, js)
        else:
            _run_pppal(tr, i, word, ke, kc, js, langkit.lang_params(i))
        raise AssertionError("runner returned without a verdict")
    except _Halt as halt:
        verdict = halt.verdict
    tr.note("verdict", verdict)
    return RunReport(verdict=verdict, steps=min(tr.steps, max_steps),
                     seed=seed, max_steps=max_steps,
                     digest=f"{tr.h:016x}")
