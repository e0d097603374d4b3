"""Generators, recognizers, enumerators and metrics for the recursive
padded-palindrome language families (EQ, PAL, RL, RPAL, PPAL, PPPAL, SHL).

All operations are pure functions on strings over {a, b, 0, 1, $}.
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field

from .errors import CapExceeded

AB = "ab"
FULL_ALPHABET = "ab01$"

FAMILIES = ("eq", "pal", "rl", "rpal", "ppal", "pppal", "shl")
_INDEXED = ("rl", "rpal", "ppal", "pppal")

_FAMILY_ALPHABET = {
    "eq": "ab",
    "pal": "ab",
    "rl": "ab1$",
    "rpal": "ab1$",
    "ppal": "ab01$",
    "pppal": "ab01$",
    "shl": "01$",
}


class LanguageError(ValueError):
    """Bad parameters for a language operation."""


class AlphabetError(LanguageError):
    """Input uses symbols outside the family alphabet (not a false verdict)."""


@dataclass(frozen=True)
class LangParams:
    """Level-i constants: delimiter width and minimum segment length."""

    level: int
    delim_width: int
    min_segment: int
    alphabet: str = FULL_ALPHABET


def _min_segment(i):
    # Least m0 > 1 such that m^(i-1) < 2^m for every m >= m0.  The inequality
    # is checked on a finite window; beyond max(i^2, 64) the ratio 2^m/m^(i-1)
    # is increasing (each +1 in m doubles the numerator but multiplies the
    # denominator by (1+1/m)^(i-1) <= e^(i/m) < 2 once m > i), so a window
    # that ends in the good region certifies the tail.
    hi = max(i * i, 64)
    bad = [m for m in range(2, hi + 1) if not m ** (i - 1) < 2 ** m]
    m0 = (max(bad) + 1) if bad else 2
    if not (hi > i and 2 ** hi > hi ** (i - 1)):
        raise LanguageError(f"certificate window too small for level {i}")
    return m0


def lang_params(i) -> LangParams:
    if not isinstance(i, int) or i < 1:
        raise LanguageError(f"level must be a positive integer, got {i!r}")
    return LangParams(level=i, delim_width=max(1, math.ceil(math.log2(i + 1))), min_segment=_min_segment(i))


def cbin(params: LangParams, j) -> str:
    """Binary rendering of delimiter value j, zero-padded to delim_width."""
    if not 1 <= j <= params.level:
        raise LanguageError(f"delimiter value {j} out of range 1..{params.level}")
    return format(j, f"0{params.delim_width}b")


def srel_next_len(k) -> int:
    if k < 2:
        raise LanguageError("block length below 2 has no successor")
    return k * k + k + 1


def _check_alphabet(s, allowed):
    bad = set(s) - set(allowed)
    if bad:
        raise AlphabetError(f"symbols {sorted(bad)} not in alphabet {allowed!r}")


def build_rl(i, w) -> str:
    """Apply the recursive tail-extension i times starting from a two-letter-alphabet block."""
    _check_alphabet(w, AB)
    if len(w) < 2:
        raise LanguageError("base block must have length >= 2")
    s = w
    for _ in range(i):
        n = len(s)
        s = s + "$1" + ("a" * n + "1") * (n - 1)
    return s


def segl(w) -> int:
    """Length of the first segment: index of the leftmost 0/1 symbol."""
    for idx, ch in enumerate(w):
        if ch in "01":
            return idx
    raise LanguageError("string has no binary symbol; segment length undefined")


def total_length(params: LangParams, m) -> int:
    c = params.delim_width
    return (m - 1) * 2 ** (m + 1) + c * (2 ** (m + 1) - m - 2) + m + 1


def well_ordered_sequence(params: LangParams, m) -> list:
    """The unique delimiter-value sequence for (i, m): slot k (1-based) holds
    the largest l such that m^(l-1) divides k."""
    i = params.level
    if m < params.min_segment:
        raise LanguageError(f"segment length {m} below minimum {params.min_segment}")
    out = []
    for k in range(1, m ** (i - 1) + 1):
        val = 1
        for l in range(2, i + 1):
            if k % m ** (l - 1) == 0:
                val = l
        out.append(val)
    return out


def is_well_ordered(params: LangParams, m, entries) -> bool:
    """Direct check of the three ordering conditions (no comparison against
    the constructed sequence)."""
    i = params.level
    entries = list(entries)
    if not entries:
        return False
    if any(not (isinstance(e, int) and 1 <= e <= i) for e in entries):
        return False
    if entries.count(i) != 1 or entries[-1] != i:
        return False
    for j in range(2, i + 1):
        high = [idx for idx, e in enumerate(entries) if e >= j]
        spans = [entries[: high[0]]]
        spans += [entries[a + 1 : b] for a, b in zip(high, high[1:])]
        if any(span.count(j - 1) != m - 1 for span in spans):
            return False
    return True


def sumdel(entries, j) -> int:
    """Occurrences of delimiter values >= j."""
    return sum(1 for e in entries if e >= j)


def punc(params: LangParams, p) -> str:
    """Insert a delimiter after every m-symbol segment (including the last)."""
    i = params.level
    _check_alphabet(p, AB)
    m = round(len(p) ** (1.0 / i)) if i > 1 else len(p)
    if m ** i != len(p) or m < params.min_segment:
        raise LanguageError(
            f"length {len(p)} is not m^{i} for an admissible m >= {params.min_segment}"
        )
    seq = well_ordered_sequence(params, m)
    parts = []
    for k, val in enumerate(seq):
        parts.append(p[k * m : (k + 1) * m])
        parts.append(cbin(params, val))
    return "".join(parts)


def _pad_tail(params: LangParams, l) -> str:
    """The geometric shrinking suffix: level l down to the two-cell base."""
    c = params.delim_width
    if l == 1:
        return "$" + "a" + "0" * c + "a"
    return "$" + "a" * l + ("0" * c + "a" * l) * (2 ** l - 1) + _pad_tail(params, l - 1)


def pad(params: LangParams, w) -> str:
    """Extend a punctuated string with shrinking all-a segment blocks."""
    m = segl(w)
    _split_punctuated(params, w, m)  # raises on malformed shells
    c = params.delim_width
    reps = 2 ** m - m ** (params.level - 1) - 1
    return w + ("a" * m + "0" * c) * reps + "a" * m + _pad_tail(params, m - 1)


def _split_punctuated(params: LangParams, w, m):
    """Parse a punctuated shell into its underlying string, validating segment
    lengths and the delimiter sequence; palindromeness is not checked here."""
    i = params.level
    if m < params.min_segment:
        raise LanguageError(f"segment length {m} below minimum {params.min_segment}")
    c = params.delim_width
    seq = well_ordered_sequence(params, m)
    expect_len = m ** i + c * m ** (i - 1)
    if len(w) != expect_len:
        raise LanguageError(f"punctuated length {len(w)} != expected {expect_len}")
    chunks = []
    pos = 0
    for val in seq:
        seg = w[pos : pos + m]
        if any(ch not in AB for ch in seg):
            raise LanguageError(f"segment at {pos} is not over {{a,b}}: {seg!r}")
        pos += m
        delim = w[pos : pos + c]
        if delim != cbin(params, val):
            raise LanguageError(f"delimiter at {pos} is {delim!r}, expected {cbin(params, val)!r}")
        pos += c
        chunks.append(seg)
    return "".join(chunks)


# ---------------------------------------------------------------------------
# membership


def _is_rl(i, s):
    if i == 0:
        return len(s) >= 2 and all(ch in AB for ch in s)
    if "$" not in s:
        return False
    w = s[: s.rindex("$")]
    n = len(w)
    if n < 2:
        return False
    return s == w + "$1" + ("a" * n + "1") * (n - 1) and _is_rl(i - 1, w)


def _leftmost_block(s):
    return s[: s.index("$")] if "$" in s else s


def _is_ppal(params, s):
    try:
        m = segl(s)
        if params.level == 1:
            if not (s.endswith("1") and m == len(s) - 1 and m >= 2):
                return False
            p = s[:-1]
        else:
            p = _split_punctuated(params, s, m)
    except LanguageError:
        return False
    return all(ch in AB for ch in p) and p == p[::-1]


def _is_pppal(params, s):
    try:
        m = segl(s)
    except LanguageError:
        return False
    i = params.level
    if m < params.min_segment or len(s) != total_length(params, m):
        return False
    c = params.delim_width
    head_len = (m + c) * m ** (i - 1) if i > 1 else m + 1
    head = s[:head_len]
    if not _is_ppal(params, head):
        return False
    return s == pad(params, head)


def _is_shl(s):
    parts = s.split("$")
    if len(parts) < 2:
        return False
    return all(part == format(k, "b") for k, part in enumerate(parts))


def is_member(family, i, s) -> bool:
    """Exact membership oracle.  `i` must be given iff the family is indexed;
    symbols outside the family alphabet raise AlphabetError rather than
    returning a verdict."""
    family = family.lower()
    if family not in FAMILIES:
        raise LanguageError(f"unknown family {family!r}")
    if family in _INDEXED:
        if i is None:
            raise LanguageError(f"family {family!r} needs a level index")
        if i < 1 or (family in ("rl", "rpal") and not isinstance(i, int)):
            raise LanguageError(f"invalid level {i!r}")
    elif i is not None:
        raise LanguageError(f"family {family!r} takes no level index")
    _check_alphabet(s, _FAMILY_ALPHABET[family])

    if family == "eq":
        n = s.count("a")
        return s == "a" * n + "b" * (len(s) - n) and len(s) == 2 * n
    if family == "pal":
        return s == s[::-1]
    if family == "rl":
        return _is_rl(i, s)
    if family == "rpal":
        w = _leftmost_block(s)
        return _is_rl(i, s) and w == w[::-1]
    if family == "ppal":
        return _is_ppal(lang_params(i), s)
    if family == "pppal":
        return _is_pppal(lang_params(i), s)
    return _is_shl(s)


# ---------------------------------------------------------------------------
# enumeration


def _palindromes(length):
    half = (length + 1) // 2
    for half_str in itertools.product(AB, repeat=half):
        h = "".join(half_str)
        yield h + h[: length // 2][::-1]


def iter_members(family, i=None, max_len=4096, limit=None):
    """Yield members in a deterministic order, up to max_len (and limit, if given)."""
    family = family.lower()

    def _gen():
        if family == "eq":
            for n in itertools.count():
                if 2 * n > max_len:
                    return
                yield "a" * n + "b" * n
        elif family == "pal":
            for length in range(max_len + 1):
                yield from _palindromes(length)
        elif family in ("rl", "rpal"):
            for base in itertools.count(2):
                length = base
                for _ in range(i):
                    length = srel_next_len(length)
                if length > max_len:
                    return
                blocks = _palindromes(base) if family == "rpal" else (
                    "".join(t) for t in itertools.product(AB, repeat=base)
                )
                for w in blocks:
                    yield build_rl(i, w)
        elif family in ("ppal", "pppal"):
            params = lang_params(i)
            for m in itertools.count(params.min_segment):
                if family == "ppal":
                    length = m ** i + params.delim_width * m ** (i - 1) if i > 1 else m + 1
                else:
                    length = total_length(params, m)
                if length > max_len:
                    return
                for p in _palindromes(m ** i):
                    shell = punc(params, p)
                    yield shell if family == "ppal" else pad(params, shell)
        elif family == "shl":
            for k in itertools.count(1):
                s = "$".join(format(t, "b") for t in range(k + 1))
                if len(s) > max_len:
                    return
                yield s
        else:
            raise LanguageError(f"unknown family {family!r}")

    gen = _gen()
    return itertools.islice(gen, limit) if limit is not None else gen


# ---------------------------------------------------------------------------
# dissimilarity


@dataclass
class DissimilarWitness:
    """A pairwise-dissimilar string set with one distinguishing suffix per pair."""

    n: int
    strings: list
    pairs: dict = field(default_factory=dict)  # (left, right) -> suffix

    @property
    def size(self):
        return len(self.strings)

    def verify(self, member_fn) -> bool:
        for (w1, w2), v in self.pairs.items():
            if len(w1 + v) > self.n or len(w2 + v) > self.n:
                return False
            if member_fn(w1 + v) == member_fn(w2 + v):
                return False
        want = {tuple(sorted(p)) for p in itertools.combinations(self.strings, 2)}
        have = {tuple(sorted(p)) for p in self.pairs}
        return want == have

    def to_json(self):
        return {
            "n": self.n,
            "strings": list(self.strings),
            "pairs": [
                {"left": w1, "right": w2, "suffix": v}
                for (w1, w2), v in sorted(self.pairs.items())
            ],
        }


def _member_fn(family, i):
    return lambda s: is_member(family, i, s)


def _construct_witness(family, i, n):
    pairs = {}
    if family == "eq":
        strings = ["a" * k for k in range(n // 2 + 1)]
        for w1, w2 in itertools.combinations(strings, 2):
            pairs[(w1, w2)] = "b" * len(w2)
        return DissimilarWitness(n=n, strings=strings, pairs=pairs)
    if family == "pal":
        half = n // 2
        strings = ["".join(t) for t in itertools.product(AB, repeat=half)]
        for w1, w2 in itertools.combinations(strings, 2):
            pairs[(w1, w2)] = w1[::-1]
        return DissimilarWitness(n=n, strings=strings, pairs=pairs)
    if family == "rpal":
        # half-block prefixes, completed by mirror + the deterministic tail
        best = None
        for base in itertools.count(2):
            length = base
            for _ in range(i):
                length = srel_next_len(length)
            if length > n:
                break
            if base % 2 == 0:
                best = base
        if best is None:
            raise LanguageError(f"no {family} member fits in n={n}")
        half = best // 2
        strings = ["".join(t) for t in itertools.product(AB, repeat=half)]
        for w1, w2 in itertools.combinations(strings, 2):
            v = build_rl(i, w1 + w1[::-1])[half:]
            pairs[(w1, w2)] = v
        return DissimilarWitness(n=n, strings=strings, pairs=pairs)
    if family == "pppal":
        # shell prefixes holding the first half of the letters (delimiters
        # interleave, so the split point is found by walking a probe shell)
        params = lang_params(i)
        best_m = None
        for m in itertools.count(params.min_segment):
            if total_length(params, m) > n:
                break
            if (m ** i) % 2 == 0:
                best_m = m
        if best_m is None:
            raise LanguageError(f"no {family} member fits in n={n}")
        half = best_m ** i // 2

        def shell(p):
            return pad(params, punc(params, p))

        probe = shell("a" * best_m ** i)
        split = 0
        letters = 0
        for idx, ch in enumerate(probe):
            if letters == half:
                split = idx
                break
            if ch in AB:
                letters += 1
        halves = ["".join(t) for t in itertools.product(AB, repeat=half)]
        prefix = {h: shell(h + h[::-1])[:split] for h in halves}
        strings = [prefix[h] for h in halves]
        for h1, h2 in itertools.combinations(halves, 2):
            v = shell(h1 + h1[::-1])[split:]
            pairs[(prefix[h1], prefix[h2])] = v
        return DissimilarWitness(n=n, strings=strings, pairs=pairs)
    raise LanguageError(f"no constructive witness family for {family!r}")


def _exhaustive_witness(family, i, n, cap):
    sigma = _FAMILY_ALPHABET[family]
    count = sum(len(sigma) ** L for L in range(n + 1))
    if count > cap:
        raise CapExceeded(
            f"exhaustive dissimilarity needs {count} candidate strings "
            f"(cap {cap}); lower n or raise the cap"
        )
    member = _member_fn(family, i)
    cands = ["".join(t) for L in range(n + 1) for t in itertools.product(sigma, repeat=L)]
    # accepting suffix sets, built by splitting each member once rather than
    # probing every (prefix, suffix) pair
    sets = {w: set() for w in cands}
    for u in cands:
        if member(u):
            for k in range(len(u) + 1):
                sets[u[:k]].add(u[k:])
    suffixes = {w: frozenset(vs) for w, vs in sets.items()}

    def distinguisher(w1, w2):
        lim = n - max(len(w1), len(w2))
        for v in sorted(suffixes[w1] | suffixes[w2], key=lambda v: (len(v), v)):
            if len(v) <= lim and (v in suffixes[w1]) != (v in suffixes[w2]):
                return v
        return None

    # collapse identical (length, profile) classes: same-class strings are
    # mutually similar, so a maximum clique uses at most one per class
    classes = {}
    for w in cands:
        classes.setdefault((len(w), suffixes[w]), w)
    reps = sorted(classes.values(), key=lambda w: (len(w), w))
    idx = {w: t for t, w in enumerate(reps)}
    adj = [[False] * len(reps) for _ in reps]
    for w1, w2 in itertools.combinations(reps, 2):
        if distinguisher(w1, w2) is not None:
            adj[idx[w1]][idx[w2]] = adj[idx[w2]][idx[w1]] = True

    best = []

    def extend(cur, cand):
        nonlocal best
        if len(cur) + len(cand) <= len(best):
            return
        if not cand:
            if len(cur) > len(best):
                best = cur[:]
            return
        v = cand[0]
        extend(cur + [v], [u for u in cand[1:] if adj[v][u]])
        extend(cur, cand[1:])

    extend([], list(range(len(reps))))
    strings = [reps[t] for t in best]
    pairs = {}
    for w1, w2 in itertools.combinations(strings, 2):
        pairs[(w1, w2)] = distinguisher(w1, w2)
    return DissimilarWitness(n=n, strings=strings, pairs=pairs)


def dissim_lower_bound(family, i, n, method="construct", cap=2 ** 22) -> DissimilarWitness:
    """A verified pairwise-dissimilar set of strings of length <= n.

    method="construct" returns the half-prefix witness family (size grows as
    2^(n/2) for the palindrome-flavored languages); method="exhaustive"
    computes the exact maximum by brute force; "auto" prefers exhaustive when
    the candidate space fits the cap.
    """
    family = family.lower()
    if method == "auto":
        sigma = _FAMILY_ALPHABET[family]
        method = "exhaustive" if len(sigma) ** (n + 1) <= cap else "construct"
    if method == "exhaustive":
        wit = _exhaustive_witness(family, i, n, cap)
    elif method == "construct":
        wit = _construct_witness(family, i, n)
    else:
        raise LanguageError(f"unknown method {method!r}")
    if not wit.verify(_member_fn(family, i)):
        raise AssertionError("witness failed self-verification")
    return wit


# ---------------------------------------------------------------------------
# structured negative corpus


@dataclass(frozen=True)
class CorpusItem:
    template: str  # "rpal" | "pppal"
    level: int
    text: str
    defect: str
    mc_ok: bool = True  # cheap enough for per-string sampling; else use the exact solver


def _enc4(w):
    return sum((1 if ch == "a" else 2) * 4 ** t for t, ch in enumerate(w))


def _matches_rl_regex(s):
    return re.fullmatch(r"[ab][ab]+(\$1(a+1)+)+", s) is not None


# Level-2 padded-shell fragments reused by the corpus builders below.
_TAIL_M2 = "$a00a"
_TAIL_M3 = "$aa" + "00aa" * 3 + "$a00a"


def _regex_violations(rng, count):
    """Strings rejected by the deterministic prefix checks of either template."""
    out = []
    fixed_rl1 = ["", "a", "$", "1", "ba", "a$1aa1", "aa$aa1", "aa$1ab1", "aa$11",
                 "aa1aa$1", "$1aa1aa", "aa$$1aa1", "aa$1aa", "aa$1aa1$", "ba$1aa1$1"]
    out.extend(CorpusItem("rpal", 1, s, "regex") for s in fixed_rl1)
    fixed_ppp2 = [
        "aa11aa10aa00aa" + _TAIL_M2,   # separator 11 is not an allowed delimiter
        "aa01aa10aa10aa" + _TAIL_M2,   # high delimiter appears twice
        "aa01aa00aa10aa" + _TAIL_M2,   # all-zero separator left of the high delimiter
        "aa01aa10ab00aa" + _TAIL_M2,   # b right of the high delimiter
        "ba01aa10aa00aa$a00b",          # postfix shape broken
        "1a01aa10aa00aa" + _TAIL_M2,   # does not begin with a letter
        "aa01aa10aa00aa$a0a",           # final padding uses the wrong delimiter width
        "aa01aa10aa000aa" + _TAIL_M2,  # width-3 separator
    ]
    out.extend(CorpusItem("pppal", 2, s, "regex") for s in fixed_ppp2)
    members = [build_rl(1, "".join(t)) for L in (2, 3, 4) for t in itertools.product(AB, repeat=L)]
    seen = {item.text for item in out}
    while len(out) < count:
        s = rng.choice(members)
        pos = rng.randrange(len(s))
        ch = rng.choice("ab1$")
        mutant = s[:pos] + ch + s[pos + 1 :]
        if mutant not in seen and not _matches_rl_regex(mutant):
            seen.add(mutant)
            out.append(CorpusItem("rpal", 1, mutant, "regex"))
    return out[:count]


def _rl1_segment_defects(rng, count):
    """Tail strings whose a-runs are off by one or two from the block length."""
    out = []
    for base in (2, 3):
        for t in itertools.product(AB, repeat=base):
            w = "".join(t)
            for seg in range(base - 1):
                for delta in (-1, 1, 2):
                    if base + delta < 1:
                        continue
                    tail = []
                    for k in range(base - 1):
                        tail.append("a" * (base + (delta if k == seg else 0)) + "1")
                    out.append(w + "$1" + "".join(tail))
    items = [CorpusItem("rpal", 1, s, "segment") for s in out]
    rng.shuffle(items)
    return items[:count]


def _rl1_block_defects(rng, count):
    """Tails with the wrong number of repeated groups (runs themselves intact)."""
    out = []
    for base in (2, 3, 4):
        for t in itertools.product(AB, repeat=base):
            w = "".join(t)
            for delta in (-1, 1, 2):
                reps = base - 1 + delta
                if reps < 1:
                    continue
                out.append(w + "$1" + ("a" * base + "1") * reps)
    items = [CorpusItem("rpal", 1, s, "block") for s in out]
    rng.shuffle(items)
    return items[:count]


def _pppal2_wellorder_defects(rng, count):
    """Level-2 shells with the unique high delimiter at the wrong slot.

    Every string passes the five deterministic prefix checks (separators drawn
    only from {00, 01, 10, $}, single high delimiter, nothing but a/0/$ to its
    right) and has member-identical segment lengths and block counts, so the
    ordering check is the only stage that can catch it."""
    out = []
    # side 2: high delimiter moved from slot 2 to slot 1 or slot 3
    for s1 in ("aa", "ab", "ba", "bb"):
        out.append(s1 + "10aa00aa00aa" + _TAIL_M2)
    sixes = list(_palindromes(6))
    sixes += [
        "".join(t) for t in itertools.product(AB, repeat=6)
        if "".join(t) != "".join(t)[::-1]
    ][:30]
    for p6 in sixes:
        out.append(p6[0:2] + "01" + p6[2:4] + "01" + p6[4:6] + "10aa" + _TAIL_M2)
    # side 3: moved to slot 1 or slot 2 (forced all-a segments after the move)
    for s1 in _palindromes(3):
        out.append(s1 + "10" + "aaa00" * 6 + "aaa" + _TAIL_M3)
    for p6 in _palindromes(6):
        out.append(p6[0:3] + "01" + p6[3:6] + "10" + "aaa00" * 5 + "aaa" + _TAIL_M3)
    items = [CorpusItem("pppal", 2, s, "wellorder") for s in out]
    rng.shuffle(items)
    return items[:count]


def _nonpal_items(rng, count):
    """Structurally perfect strings whose leading letter block is not a
    palindrome.  Short blocks are sampled directly; longer or nearly
    palindromic blocks take exponentially many rounds to resolve, so they are
    flagged for the exact solver instead."""
    out = []
    params1 = lang_params(1)
    params2 = lang_params(2)
    for base in (2, 3, 4, 5):
        for t in itertools.product(AB, repeat=base):
            w = "".join(t)
            if w == w[::-1]:
                continue
            out.append(CorpusItem("rpal", 1, build_rl(1, w), "nonpal", mc_ok=base <= 3))
    for t in itertools.product(AB, repeat=2):
        p = "".join(t)
        if p != p[::-1]:
            out.append(CorpusItem("pppal", 1, pad(params1, p + "1"), "nonpal"))
    for t in itertools.product(AB, repeat=3):
        p = "".join(t)
        if p != p[::-1]:
            out.append(CorpusItem("pppal", 1, pad(params1, p + "1"), "nonpal", mc_ok=False))
    for t in itertools.product(AB, repeat=4):
        p = "".join(t)
        if p != p[::-1]:
            out.append(CorpusItem("pppal", 2, pad(params2, punc(params2, p)), "nonpal", mc_ok=False))
    rng.shuffle(out)
    return out[:count]


_CORPUS_BUILDERS = {
    "regex": _regex_violations,
    "segment": _rl1_segment_defects,
    "block": _rl1_block_defects,
    "wellorder": _pppal2_wellorder_defects,
    "nonpal": _nonpal_items,
}


def defect_corpus(kind, count=50, seed=0):
    """Deterministic structured negative inputs, `count` per defect kind.

    Kinds: regex (rejected by the deterministic prefix checks), segment
    (one run length off), block (wrong group count), wellorder (delimiter
    ordering broken, level 2), nonpal (valid shell, nonpalindromic prefix).
    Items flagged mc_ok=False are too slow for per-string sampling and are
    meant for the exact solver."""
    try:
        builder = _CORPUS_BUILDERS[kind]
    except KeyError:
        raise LanguageError(f"unknown defect kind {kind!r}") from None
    items = builder(random.Random(f"{seed}:{kind}"), count)
    if len(items) < count:
        raise LanguageError(f"defect pool for {kind!r} has only {len(items)} items")
    return items
