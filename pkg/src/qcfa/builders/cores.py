"""Quantum cores and gates: comparison rounds, counter rounds, walk exits.

The comparison core realizes one count-equality check as an endless round
loop: a feeding pass rotates a register plane by +theta per left token and
-theta per right token (theta = pi*sqrt(2)), a plane measurement turns any
imbalance into a reject chance of sin^2((J-K)*theta) per round, and an
acceptance gate - two chained token walks that must both absorb on the
right, then k fair coins all landing heads - fires with probability
2^-k/(v+1)^2 per round, where v is the total token count.  Equal counts
are never rejected; unequal counts win the race against the gate except
with probability below 2^(1-k).

The counter core realizes the mirror-word check: a four-axis register
carries (u, x, y, z) with u'=u, x'=4x, y'=4y+d*u, z'=z+d*x under d(a)=1,
d(b)=2, scaled into a contraction by 8.  After a clean pass, y and z hold
the base-4 values of the word read backward and forward; a 45-degree
rotation in the (y,z) plane exposes their difference on one axis, whose
measurement rejects mirror-breaking words.  The gate is a per-round block
of full sweeps tossing one fair coin per letter, all heads required.

Both cores are emitted against a VirtualTape: a compile-time description
of how real tape cells map onto virtual tokens.  A VirtualTape provides
ctx0 (the context on the anchor cell) and step functions right(ctx, sym) /
left(ctx, sym) called when the head moves onto a new cell.  Contexts must
be functions of tape position alone.  Step results:

    ("skip", ctx2)                          plain cell, keep moving
    ("dead",)                               structurally impossible here
    ("lend", bt)                            anchor reached; bt cells to its
                                            canonical cell lie to the right
    ("rend", end_ctx)                       right boundary cell reached
    ("tok", kind, bt, at_ctx, width, before_ctx)
        a token classified: kind "A"/"B"; the coin/feed cell sits bt cells
        to the right; width = cells the token spans; before_ctx = context
        resuming a leftward move just past the token's leftmost cell.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .. import qkernel as qk
from ..machine import LEFT_MARK, RIGHT_MARK
from .base import (
    BuildError, Frag, TokenView, as_fraction, token_view, separator_spans,
    tuned_rounds,
)

THETA = math.pi * math.sqrt(2.0)

_cache = {}


def _cached(key, make):
    if key not in _cache:
        _cache[key] = make()
    return _cache[key]


def rot_channel(kind, dim):
    sign = 1.0 if kind == "A" else -1.0
    return _cached(("rot", kind, dim),
                   lambda: qk.rotation_channel(sign * THETA, dim, (0, 1)))


def plane_check(dim):
    groups = {"ok": [0], "bad": list(range(1, dim))}
    return _cached(("okbad", dim), lambda: qk.projective_measurement(dim, groups))


def coin(dim):
    return _cached(("coin", dim), lambda: qk.coin_channel(dim))


def counter_step(sym):
    d = {"a": 1, "b": 2}[sym]
    M = np.array([
        [1, 0, 0, 0],
        [0, 4, 0, 0],
        [d, 0, 4, 0],
        [0, d, 0, 1],
    ], dtype=float)
    return _cached(("dil", sym), lambda: qk.dilate_contraction(M, 8))


def counter_profile(word):
    """(u, x, y, z) after feeding `word` through the scaled counter steps.

    Composes the "go" branches on the integer seed (1, 1, 0, 0); y and z
    come out as the backward and forward base-4 reading values scaled by
    8^-len(word).
    """
    v = np.array([1.0, 1.0, 0.0, 0.0])
    for sym in word:
        go = dict(counter_step(sym).branches)["go"]
        v = np.real(go @ v)
    return tuple(float(x) for x in v)


def diff_rotation():
    return _cached(("vrot",), lambda: qk.rotation_channel(math.pi / 4, 4, (2, 3)))


def diff_check():
    return _cached(("diff",),
                   lambda: qk.projective_measurement(4, {"diff": [2], "rest": [0, 1, 3]}))


def reset_measure():
    return _cached(("reset",), lambda: qk.basis_measurement(4))


def axis_swap(k):
    def make():
        U = np.eye(4)
        U[[0, k]] = U[[k, 0]]
        return qk.unitary_channel(U)
    return _cached(("swap", k), make)


def counter_seed():
    def make():
        U = qk.completion_unitary([math.sqrt(0.5), math.sqrt(0.5), 0.0, 0.0])
        return qk.unitary_channel(U)
    return _cached(("seed",), make)


# ---------------------------------------------------------------------------
# comparison-core emitter


def emit_eq(b: Frag, ns, vt, k_core, *, reject, cont):
    """Wire one comparison core into builder `b` under namespace `ns`.

    Head must sit on the anchor cell when the returned entry state runs.
    On imbalance detection control moves to `reject`; when the gate fires
    control moves to `cont` with the head on the right boundary cell.
    """
    if k_core < 0:
        raise BuildError("coin count must be nonnegative")
    names = {}
    ctx_ids = {}
    at_info = {}
    pending = []
    hops = {}
    seq = [0]

    def cid(ctx):
        if ctx not in ctx_ids:
            ctx_ids[ctx] = len(ctx_ids)
        return ctx_ids[ctx]

    def name(key):
        if key not in names:
            mode = key[0]
            if mode in ("pass", "mr", "ml", "rew", "at", "meas"):
                tag = f"{mode}{''.join(str(p) for p in key[1:-1])}k{cid(key[-1])}"
            elif mode == "coin":
                tag = f"coin{key[1]}k{cid(key[2])}"
            else:
                tag = mode + "".join(str(p) for p in key[1:])
            names[key] = b.st(f"{ns}.{tag}")
            pending.append(key)
        return names[key]

    def hop(count, move, target):
        """Chain of `count` unconditional one-cell moves ending at `target`."""
        if count == 0:
            return target
        key = (count, move, target)
        if key not in hops:
            states = []
            for _ in range(count):
                states.append(b.st(f"{ns}.hop{seq[0]}"))
                seq[0] += 1
            for idx, s in enumerate(states):
                nxt = states[idx + 1] if idx + 1 < count else target
                sdet(s, b.tape_symbols, nxt, move)
            hops[key] = states[0]
        return hops[key]

    def note_at(at_ctx, width, before_ctx):
        prev = at_info.setdefault(at_ctx, (width, before_ctx))
        if prev != (width, before_ctx):
            raise BuildError(f"inconsistent token shape at context {at_ctx!r}")

    def sdet(state, syms, target, move):
        """det() that leaves marker cells with off-tape moves to dead-fill."""
        keep = [s for s in syms
                if not (move > 0 and s == RIGHT_MARK)
                and not (move < 0 and s == LEFT_MARK)]
        if keep:
            b.det(state, keep, target, move)

    def schan(state, syms, ch, routes):
        offr = any(mv > 0 for _, mv in routes.values())
        offl = any(mv < 0 for _, mv in routes.values())
        for s in syms:
            if (offr and s == RIGHT_MARK) or (offl and s == LEFT_MARK):
                continue
            b.chan(state, s, ch, routes)

    entry = name(("enter",))
    while pending:
        key = pending.pop()
        state = names[key]
        mode = key[0]
        if mode == "enter":
            sdet(state, b.tape_symbols, name(("pass", vt.ctx0)), 1)
        elif mode == "went":
            sdet(state, b.tape_symbols, name(("mr", key[1], vt.ctx0)), 1)
        elif mode == "pass":
            ctx = key[1]
            for sym in b.tape_symbols:
                res = vt.right(ctx, sym)
                tag = res[0]
                if tag == "skip":
                    sdet(state, [sym], name(("pass", res[1])), 1)
                elif tag == "tok":
                    _, kind, bt, at_ctx, width, before = res
                    if bt:
                        raise BuildError("rightward token classification must be in place")
                    schan(state, [sym], rot_channel(kind, b.dim),
                          {"-": (name(("pass", at_ctx)), 1)})
                elif tag == "rend":
                    b.det(state, [sym], name(("meas", res[1])), 0)
                else:
                    b.det(state, [sym], reject, 0)
        elif mode == "meas":
            ec = key[1]
            schan(state, b.tape_symbols, plane_check(b.dim),
                  {"ok": (name(("rew", 1, ec)), -1), "bad": (reject, 0)})
        elif mode == "rew":
            which, ctx = key[1], key[2]
            for sym in b.tape_symbols:
                res = vt.left(ctx, sym)
                tag = res[0]
                if tag == "skip":
                    sdet(state, [sym], name(("rew", which, res[1])), -1)
                elif tag == "tok":
                    sdet(state, [sym], name(("rew", which, res[5])), -1)
                elif tag == "lend":
                    bt = res[1]
                    target = name(("enter",) if which == "F" else ("went", which))
                    if bt == 0:
                        b.det(state, [sym], target, 0)
                    else:
                        sdet(state, [sym], hop(bt - 1, 1, target), 1)
                else:
                    b.det(state, [sym], reject, 0)
        elif mode == "mr":
            which, ctx = key[1], key[2]
            for sym in b.tape_symbols:
                res = vt.right(ctx, sym)
                tag = res[0]
                if tag == "skip":
                    sdet(state, [sym], name(("mr", which, res[1])), 1)
                elif tag == "tok":
                    _, kind, bt, at_ctx, width, before = res
                    note_at(at_ctx, width, before)
                    b.det(state, [sym], name(("at", which, at_ctx)), 0)
                elif tag == "rend":
                    ec = res[1]
                    if which == 1:
                        sdet(state, [sym], name(("rew", 2, ec)), -1)
                    elif k_core == 0:
                        b.det(state, [sym], cont, 0)
                    else:
                        b.det(state, [sym], name(("coin", 1, ec)), 0)
                else:
                    b.det(state, [sym], reject, 0)
        elif mode == "ml":
            which, ctx = key[1], key[2]
            for sym in b.tape_symbols:
                res = vt.left(ctx, sym)
                tag = res[0]
                if tag == "skip":
                    sdet(state, [sym], name(("ml", which, res[1])), -1)
                elif tag == "tok":
                    _, kind, bt, at_ctx, width, before = res
                    note_at(at_ctx, width, before)
                    target = name(("at", which, at_ctx))
                    if bt == 0:
                        b.det(state, [sym], target, 0)
                    else:
                        sdet(state, [sym], hop(bt - 1, 1, target), 1)
                elif tag == "lend":
                    bt = res[1]
                    target = name(("enter",))
                    if bt == 0:
                        b.det(state, [sym], target, 0)
                    else:
                        sdet(state, [sym], hop(bt - 1, 1, target), 1)
                else:
                    b.det(state, [sym], reject, 0)
        elif mode == "at":
            which, at_ctx = key[1], key[2]
            width, before = at_info[at_ctx]
            tails = hop(width - 1, -1, name(("ml", which, before)))
            schan(state, b.tape_symbols, coin(b.dim),
                  {"h": (name(("mr", which, at_ctx)), 1), "t": (tails, -1)})
        elif mode == "coin":
            t, ec = key[1], key[2]
            heads = cont if t == k_core else name(("coin", t + 1, ec))
            schan(state, b.tape_symbols, coin(b.dim),
                  {"h": (heads, 0), "t": (name(("rew", "F", ec)), -1)})
        else:  # pragma: no cover - emitter bug guard
            raise BuildError(f"unknown wiring mode {mode!r}")
    return entry


# ---------------------------------------------------------------------------
# counter-core emitter


def _match_table(pattern, symbols):
    """Deterministic substring-progress table over `symbols`."""
    L = len(pattern)
    table = {}
    for q in range(L):
        for sym in symbols:
            if sym in (LEFT_MARK, RIGHT_MARK):
                continue
            cand = pattern[:q] + sym
            k = min(len(cand), L)
            while k > 0 and cand[-k:] != pattern[:k]:
                k -= 1
            table[(q, sym)] = k
    return table


def emit_pal(b: Frag, ns, pattern, j_sweeps, *, accept, reject):
    """Wire one counter core under namespace `ns`.

    The core reads the letters before the first occurrence of `pattern`
    (before the right endmarker when pattern is None).  Entry rewinds to
    the left endmarker, so the head may start anywhere.
    """
    if j_sweeps < 0:
        raise BuildError("sweep count must be nonnegative")
    if b.dim != 4:
        raise BuildError("counter core needs a four-axis register")
    if pattern is not None:
        if not pattern or any(c in "ab" or c in (LEFT_MARK, RIGHT_MARK) for c in pattern):
            raise BuildError(f"stop pattern {pattern!r} must be nonempty and letter-free")
        if any(c not in b.alphabet for c in pattern):
            raise BuildError(f"stop pattern {pattern!r} leaves the machine alphabet")
        table = _match_table(pattern, b.tape_symbols)
        L = len(pattern)
    else:
        table, L = {}, None

    rewind = b.st(f"{ns}.rewind")
    meas0 = b.st(f"{ns}.reset")
    prep = b.st(f"{ns}.seed")
    for sym in b.tape_symbols:
        if sym != LEFT_MARK:
            b.det(rewind, [sym], rewind, -1)
    b.det(rewind, [LEFT_MARK], meas0, 0)
    routes = {"0": (prep, 0)}
    for k in (1, 2, 3):
        fix = b.st(f"{ns}.fix{k}")
        b.chan(fix, LEFT_MARK, axis_swap(k), {"-": (prep, 0)})
        routes[str(k)] = (fix, 0)
    b.chan(meas0, LEFT_MARK, reset_measure(), routes)

    def pass_state(q):
        return b.st(f"{ns}.feed{q}")

    def sweep_state(s, q):
        return b.st(f"{ns}.sw{s}q{q}")

    end = b.st(f"{ns}.turn")
    meas = b.st(f"{ns}.check")
    b.chan(prep, LEFT_MARK, counter_seed(), {"-": (pass_state(0), 1)})
    for q in range(L or 1):
        state = pass_state(q)
        for sym in b.tape_symbols:
            if sym in "ab":
                b.chan(state, sym, counter_step(sym),
                       {"go": (pass_state(0), 1), "restart": (rewind, -1)})
            elif sym == LEFT_MARK:
                continue
            elif sym == RIGHT_MARK:
                if pattern is None:
                    b.det(state, [sym], end, 0)
            else:
                q2 = table[(q, sym)]
                if q2 == L:
                    b.det(state, [sym], end, 0)
                else:
                    b.det(state, [sym], pass_state(q2), 1)
    for sym in b.tape_symbols:
        b.chan(end, sym, diff_rotation(), {"-": (meas, 0)})
    if j_sweeps == 0:
        after_rest = (accept, 0)
    else:
        after_rest = (b.st(f"{ns}.swr1"), -1)
    for sym in b.tape_symbols:
        if sym != LEFT_MARK:
            b.chan(meas, sym, diff_check(),
                   {"diff": (reject, 0), "rest": after_rest})
    for s in range(1, j_sweeps + 1):
        swr = b.st(f"{ns}.swr{s}")
        for sym in b.tape_symbols:
            if sym != LEFT_MARK:
                b.det(swr, [sym], swr, -1)
        b.det(swr, [LEFT_MARK], sweep_state(s, 0), 1)
        done = (accept, 0) if s == j_sweeps else (b.st(f"{ns}.swr{s + 1}"), -1)
        for q in range(L or 1):
            state = sweep_state(s, q)
            for sym in b.tape_symbols:
                if sym in "ab":
                    b.chan(state, sym, coin(4),
                           {"h": (sweep_state(s, 0), 1), "t": (rewind, -1)})
                elif sym == LEFT_MARK:
                    continue
                elif sym == RIGHT_MARK:
                    if pattern is None:
                        b.det(state, [sym], done[0], done[1])
                else:
                    q2 = table[(q, sym)]
                    if q2 == L:
                        b.det(state, [sym], done[0], done[1])
                    else:
                        b.det(state, [sym], sweep_state(s, q2), 1)
    return rewind


# ---------------------------------------------------------------------------
# walk gate emitter


def emit_rw(b: Frag, ns, k, *, exit_to, cont):
    """One walk-gate round: per entry, exit fires with chance 2^-k/(n+1)."""
    if k < 0:
        raise BuildError("coin count must be nonnegative")
    rew = b.st(f"{ns}.rew")
    walk = b.st(f"{ns}.walk")
    for sym in b.tape_symbols:
        if sym != LEFT_MARK:
            b.det(rew, [sym], rew, -1)
    b.det(rew, [LEFT_MARK], walk, 1)
    for sym in b.alphabet:
        b.chan(walk, sym, coin(b.dim), {"h": (walk, 1), "t": (walk, -1)})
    b.det(walk, [LEFT_MARK], cont, 0)
    if k == 0:
        b.det(walk, [RIGHT_MARK], exit_to, 0)
    else:
        first = b.st(f"{ns}.c1")
        b.det(walk, [RIGHT_MARK], first, 0)
        for t in range(1, k + 1):
            state = b.st(f"{ns}.c{t}")
            nxt = exit_to if t == k else b.st(f"{ns}.c{t + 1}")
            b.chan(state, RIGHT_MARK, coin(b.dim), {"h": (nxt, 0), "t": (cont, 0)})
    return rew


# ---------------------------------------------------------------------------
# plain virtual tapes and the public fragment builders


class PlainEqVT:
    """The real tape is the virtual tape: letters are the tokens."""

    ctx0 = ("s",)

    def right(self, ctx, sym):
        if sym == "a":
            return ("tok", "A", 0, ctx, 1, ctx)
        if sym == "b":
            return ("tok", "B", 0, ctx, 1, ctx)
        if sym == RIGHT_MARK:
            return ("rend", ctx)
        return ("dead",)

    def left(self, ctx, sym):
        if sym == "a":
            return ("tok", "A", 0, ctx, 1, ctx)
        if sym == "b":
            return ("tok", "B", 0, ctx, 1, ctx)
        if sym == LEFT_MARK:
            return ("lend", 0)
        return ("dead",)


def build_eq_core(epsilon, *, k_core=None, register_dim=2):
    """Count comparator over plain letter words: #a versus #b.

    Never rejects balanced words; rejects unbalanced ones except with
    probability at most 2^(1-k_core).
    """
    eps = as_fraction(epsilon)
    k = tuned_rounds(eps) if k_core is None else int(k_core)
    b = Frag("eqcore", "ab", register_dim)
    rej = b.hook("out_reject")
    acc = b.hook("out_accept")
    entry = emit_eq(b, "cmp", PlainEqVT(), k, reject=rej, cont=acc)
    return b.fragment(entry, accept=acc, reject=rej,
                      metadata={"epsilon": str(eps), "k_core": k})


def build_pal_core(epsilon, *, j_sweeps=None, register_dim=4):
    """Mirror-word checker over plain letter words."""
    eps = as_fraction(epsilon)
    j = tuned_rounds(eps) if j_sweeps is None else int(j_sweeps)
    b = Frag("palcore", "ab", register_dim)
    rej = b.hook("out_reject")
    acc = b.hook("out_accept")
    entry = emit_pal(b, "pal", None, j, accept=acc, reject=rej)
    return b.fragment(entry, accept=acc, reject=rej,
                      metadata={"epsilon": str(eps), "j_sweeps": j})


def build_pal_check(D, epsilon, *, j_sweeps=None, input=None, alphabet=None):
    """Mirror-word checker on the letters before the first occurrence of D.

    When `input` is given the stop pattern must occur in it (build error
    otherwise) and the fragment records the checked letter prefix.
    """
    eps = as_fraction(epsilon)
    j = tuned_rounds(eps) if j_sweeps is None else int(j_sweeps)
    if alphabet is None:
        extra = set(D) | set(input or "")
        alphabet = "ab" + "".join(sorted(extra - set("ab")))
    meta = {"epsilon": str(eps), "j_sweeps": j, "stop": D}
    if input is not None:
        cut = input.find(D)
        if cut < 0:
            raise BuildError(f"stop pattern {D!r} does not occur in the input")
        meta["virtual_word"] = "".join(c for c in input[:cut] if c in "ab")
    b = Frag("palchk", alphabet, 4)
    rej = b.hook("out_reject")
    acc = b.hook("out_accept")
    entry = emit_pal(b, "pal", D, j, accept=acc, reject=rej)
    return b.fragment(entry, accept=acc, reject=rej, metadata=meta)


def build_rw_gate(k_eps, *, alphabet="ab"):
    """Walk gate: exit signal with chance exactly 2^-k/(n+1) per entry."""
    k = int(k_eps)
    b = Frag("rwgate", alphabet, 1)
    ext = b.hook("out_exit")
    nxt = b.hook("out_continue")
    entry = emit_rw(b, "rw", k, exit_to=ext, cont=nxt)
    return b.fragment(entry, accept=ext, cont=nxt, metadata={"k_eps": k})


def _interval(pair, side):
    if len(pair) not in (2, 3):
        raise BuildError(f"{side} interval must be (lo, hi) or (lo, hi, 'closed')")
    closed = len(pair) == 3 and pair[2] == "closed"
    return int(pair[0]), int(pair[1]), closed


def build_same_length(s_l, i_l, s_r, i_r, epsilon, *, input, k_core=None):
    """Token-count comparator between two regions of one input.

    Returns a comparison-core fragment together with the token view that
    maps the regions onto its virtual word.  Malformed regions (ambiguous
    or straddling token decompositions, bad signpost order) raise at build
    time.
    """
    lo_l, hi_l, closed_l = _interval(i_l, "left")
    lo_r, hi_r, closed_r = _interval(i_r, "right")
    if closed_l:
        raise BuildError("left interval is always open")
    if hi_l != lo_r:
        raise BuildError(f"intervals must share the middle signpost ({hi_l} != {lo_r})")
    view = token_view(input, lo_l, hi_l, hi_r, tuple(s_l), tuple(s_r),
                      include_mid=closed_r)
    frag = build_eq_core(epsilon, k_core=k_core)
    return replace(frag, view=view)


def build_twice_as_long(p_l, p_m, p_r, epsilon, *, input, k_core=None):
    """Separator-count comparator: picks every other separator on the left.

    The left region (p_l, p_m) must split into an even number of segments
    (separator count odd); odd splits yield a fragment that rejects
    outright.  Left tokens are the 1st, 3rd, ... separators; right tokens
    are every separator in [p_m, p_r), including the one at p_m.
    """
    spans = separator_spans(input)
    left = [s for s in spans if s[0] > p_l and s[1] <= p_m]
    right = [s for s in spans if s[0] >= p_m and s[1] <= p_r]
    view = TokenView(
        input=input, p_l=p_l, p_m=p_m, p_r=p_r,
        s_l=tuple(sorted({s[2] for s in left})),
        s_r=tuple(sorted({s[2] for s in right})),
        left_tokens=tuple(left[0::2]), right_tokens=tuple(right),
        include_mid=True,
    )
    if len(left) % 2 == 0:
        b = Frag("twice", "ab", 2)
        rej = b.hook("out_reject")
        acc = b.hook("out_accept")
        entry = b.st("odd_split")
        b.det(entry, b.tape_symbols, rej, 0)
        frag = b.fragment(entry, accept=acc, reject=rej,
                          metadata={"segments": len(left) + 1})
        return replace(frag, view=view)
    frag = build_eq_core(epsilon, k_core=k_core)
    return replace(frag, view=view)
