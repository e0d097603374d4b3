"""Shared plumbing for machine construction: fragments, token views, knobs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .. import machine as mach
from ..machine import LEFT_MARK, RIGHT_MARK, MachineError


class BuildError(ValueError):
    """A builder was called with parameters it cannot realize."""


class MalformedRegionError(BuildError):
    """A tape region does not decompose uniquely into the given tokens."""


def as_fraction(epsilon) -> Fraction:
    """Coerce an error bound to an exact rational in (0, 1/2)."""
    if isinstance(epsilon, Fraction):
        eps = epsilon
    elif isinstance(epsilon, str):
        eps = Fraction(epsilon)
    elif isinstance(epsilon, float):
        eps = Fraction(epsilon)
    elif isinstance(epsilon, int):
        eps = Fraction(epsilon)
    else:
        raise BuildError(f"cannot read {epsilon!r} as a rational error bound")
    if not (0 < eps < Fraction(1, 2)):
        raise BuildError(f"error bound must lie strictly between 0 and 1/2, got {eps}")
    return eps


def ceil_log2_inverse(eps: Fraction) -> int:
    """Smallest t >= 0 with 2**t >= 1/eps, computed exactly."""
    t = 0
    while (1 << t) * eps.numerator < eps.denominator:
        t += 1
    return t


def tuned_rounds(epsilon) -> int:
    """Default gate width: 6 + ceil(log2(1/eps)).

    Used both for the coin count of the comparison-core gate and for the
    sweep count of the counter-core gate; with t = ceil(log2(1/eps)) the
    per-round gate mass is small enough that the one-sided error stays
    below eps for every region length >= 1.
    """
    return 6 + ceil_log2_inverse(as_fraction(epsilon))


# ---------------------------------------------------------------------------
# token views (host-side translation layer)


def _find_tokens(text, base, tokens):
    """Left-to-right decomposition of `text` into `tokens` plus filler.

    Returns [(start, end, token)] with absolute positions (base added).
    Raises MalformedRegionError when two tokens match at one spot or when a
    skipped match overlaps a consumed one, i.e. the decomposition would not
    be unique.
    """
    toks = sorted(set(tokens))
    spans = []
    pos = 0
    while pos < len(text):
        here = [t for t in toks if text.startswith(t, pos)]
        if len(here) > 1:
            raise MalformedRegionError(
                f"tokens {here} overlap at offset {pos}: decomposition is ambiguous"
            )
        if here:
            t = here[0]
            for other in toks:
                for k in range(pos + 1, pos + len(t)):
                    if text.startswith(other, k):
                        raise MalformedRegionError(
                            f"token {other!r} straddles {t!r} at offset {pos}"
                        )
            spans.append((base + pos, base + pos + len(t), t))
            pos += len(t)
        else:
            pos += 1
    return spans


@dataclass(frozen=True)
class TokenView:
    """A concrete two-interval token reading of one input string.

    Positions are tape coordinates: 0 is the left endmarker, cell k holds
    input[k-1], len(input)+1 is the right endmarker.  The left interval is
    open (p_l, p_m); the right one is (p_m, p_r), or [p_m, p_r) when
    include_mid is set.
    """
    input: str
    p_l: int
    p_m: int
    p_r: int
    s_l: tuple
    s_r: tuple
    left_tokens: tuple
    right_tokens: tuple
    include_mid: bool = False

    @property
    def left_count(self):
        return len(self.left_tokens)

    @property
    def right_count(self):
        return len(self.right_tokens)

    def virtual_string(self):
        """The endmarker-free word the comparison core effectively reads."""
        return "a" * self.left_count + "b" * self.right_count


def token_view(input, p_l, p_m, p_r, s_l, s_r, include_mid=False) -> TokenView:
    tape = mach.tape_of(input)
    n = len(tape)
    if not (0 <= p_l < p_m < p_r <= n - 1):
        raise BuildError(f"signposts {p_l},{p_m},{p_r} out of order for |w|={len(input)}")
    left = _find_tokens(tape[p_l + 1:p_m], p_l + 1, s_l)
    lo = p_m if include_mid else p_m + 1
    right = _find_tokens(tape[lo:p_r], lo, s_r)
    return TokenView(
        input=input, p_l=p_l, p_m=p_m, p_r=p_r,
        s_l=tuple(s_l), s_r=tuple(s_r),
        left_tokens=tuple(left), right_tokens=tuple(right),
        include_mid=include_mid,
    )


def separator_spans(input):
    """Maximal runs of non-letter symbols, as (start, end, text) tape spans."""
    tape = mach.tape_of(input)
    spans = []
    k = 1
    while k < len(tape) - 1:
        if tape[k] not in "ab":
            j = k
            while tape[j] not in "ab" and j < len(tape) - 1:
                j += 1
            spans.append((k, j, tape[k:j]))
            k = j
        else:
            k += 1
    return spans


# ---------------------------------------------------------------------------
# machine fragments


@dataclass(frozen=True)
class MachineFragment:
    """A machine piece with an entry state and dangling exit hooks.

    Hook states appear only as transition targets; they carry no outgoing
    transitions of their own.  Wiring a fragment into a larger machine (or
    closing it with standalone()) replaces the hook names with real states.
    """
    name: str
    entry: str
    states: tuple
    quantum_table: dict
    classical_table: dict
    register_dim: int
    input_alphabet: str
    accept_hook: str | None = None
    reject_hook: str | None = None
    continue_hook: str | None = None
    view: TokenView | None = None
    metadata: dict = field(default_factory=dict)

    def hooks(self):
        return {
            "accept": self.accept_hook,
            "reject": self.reject_hook,
            "continue": self.continue_hook,
        }

    def virtual_input(self):
        if self.view is not None:
            return self.view.virtual_string()
        if "virtual_word" in self.metadata:
            return self.metadata["virtual_word"]
        raise BuildError("fragment has no token view attached")

    def standalone(self, *, accept="accept", reject="reject",
                   continue_to="accept") -> mach.MachineSpec:
        """Close the hooks into a runnable machine.

        continue_to: "accept" or "reject" — where the continue hook lands.
        """
        targets = {}
        if self.accept_hook:
            targets[self.accept_hook] = "yes"
        if self.reject_hook:
            targets[self.reject_hook] = "no"
        if self.continue_hook:
            targets[self.continue_hook] = "yes" if continue_to == "accept" else "no"
        ct = {}
        for key, (q2, mv) in self.classical_table.items():
            ct[key] = (targets.get(q2, q2), mv)
        states = tuple(s for s in self.states if s not in targets) + ("yes", "no")
        spec = mach.MachineSpec(
            kind="quantum-classical",
            states=states, q0=self.entry, q_acc="yes", q_rej="no",
            input_alphabet=self.input_alphabet, register_dim=self.register_dim,
            quantum_table=dict(self.quantum_table), classical_table=ct,
            metadata=dict(self.metadata),
        )
        mach.ensure_valid(spec)
        return spec


class Frag:
    """Accumulates states and transition tables for one machine or fragment."""

    def __init__(self, name, alphabet, register_dim):
        self.name = name
        self.alphabet = alphabet
        self.dim = register_dim
        self.qt = {}
        self.ct = {}
        self._states = {}
        self._hooks = {}

    @property
    def tape_symbols(self):
        return tuple(self.alphabet) + (LEFT_MARK, RIGHT_MARK)

    def st(self, local):
        full = f"{self.name}.{local}" if self.name else local
        self._states.setdefault(full, True)
        return full

    def hook(self, local):
        full = self.st(local)
        self._hooks[full] = True
        return full

    def det(self, state, syms, target, move):
        """Deterministic transition(s): identity channel, outcome "-"."""
        for sym in syms:
            self.ct[(state, sym, "-")] = (target, move)

    def chan(self, state, sym, channel, routes):
        self.qt[(state, sym)] = channel
        for outcome, (target, move) in routes.items():
            self.ct[(state, sym, outcome)] = (target, move)

    def fill_dead_ends(self, dead_target):
        """Complete the classical table so every reachable branch has a home."""
        for state in self._states:
            if state in self._hooks:
                continue
            for sym in self.tape_symbols:
                ch = self.qt.get((state, sym))
                outcomes = [o for o, _ in ch.branches] if ch is not None else ["-"]
                for o in outcomes:
                    self.ct.setdefault((state, sym, o), (dead_target, 0))

    def fragment(self, entry, *, accept=None, reject=None, cont=None,
                 view=None, metadata=None) -> MachineFragment:
        dead = reject if reject is not None else self.hook("dead")
        self.fill_dead_ends(dead)
        return MachineFragment(
            name=self.name, entry=entry, states=tuple(self._states),
            quantum_table=dict(self.qt), classical_table=dict(self.ct),
            register_dim=self.dim, input_alphabet=self.alphabet,
            accept_hook=accept, reject_hook=dead if reject is None else reject,
            continue_hook=cont, view=view, metadata=dict(metadata or {}),
        )

    def machine(self, entry, *, accept, reject, kind="quantum-classical",
                metadata=None) -> mach.MachineSpec:
        self._states.setdefault(accept, True)
        self._states.setdefault(reject, True)
        self._hooks[accept] = True
        self._hooks[reject] = True
        self.fill_dead_ends(reject)
        spec = mach.MachineSpec(
            kind=kind, states=tuple(self._states), q0=entry,
            q_acc=accept, q_rej=reject, input_alphabet=self.alphabet,
            register_dim=self.dim, quantum_table=dict(self.qt),
            classical_table=dict(self.ct), metadata=dict(metadata or {}),
        )
        mach.ensure_valid(spec)
        return spec
