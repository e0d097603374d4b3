"""Executable two-way machines on an endmarked tape.

A machine is a classical finite control plus a constant-size quantum
register.  Each step applies the quantum channel for (state, scanned
symbol), observes an outcome, then takes the classical transition for
(state, symbol, outcome): next state and a head move in {-1, 0, +1}.
Entering the accept/reject state halts immediately.

Tape layout for input w: position 0 holds the left marker, positions
1..n hold w, position n+1 holds the right marker.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import qkernel
from .qkernel import QuantumChannel, QuantumState

LEFT_MARK = ">"
RIGHT_MARK = "<"
ACCEPT = "accept"
REJECT = "reject"
MOVES = (-1, 0, 1)
KINDS = ("classical", "quantum-classical")
SPEC_FORMAT = "qsspec-1"


class MachineError(ValueError):
    """Malformed machine specification or illegal step."""


@dataclass
class MachineSpec:
    """Complete description of one machine; immutable after validation."""

    kind: str
    states: tuple
    q0: str
    q_acc: str
    q_rej: str
    input_alphabet: str
    register_dim: int
    quantum_table: dict  # (state, tape symbol) -> QuantumChannel
    classical_table: dict  # (state, tape symbol, outcome) -> (next state, move)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.states = tuple(self.states)

    @property
    def n_states(self):
        return len(self.states)


@dataclass(frozen=True)
class Configuration:
    state: str
    pos: int
    register: QuantumState


def tape_of(w) -> str:
    return LEFT_MARK + w + RIGHT_MARK


def tape_symbols(spec) -> tuple:
    return (LEFT_MARK,) + tuple(spec.input_alphabet) + (RIGHT_MARK,)


def is_halting(spec, state) -> bool:
    return state == spec.q_acc or state == spec.q_rej


def verdict_of(spec, state):
    if state == spec.q_acc:
        return ACCEPT
    if state == spec.q_rej:
        return REJECT
    return None


_IDENTITY_CACHE = {}


def channel_for(spec, state, symbol) -> QuantumChannel:
    """The channel at (state, symbol); defaults to the identity (outcome "-")."""
    ch = spec.quantum_table.get((state, symbol))
    if ch is not None:
        return ch
    dim = spec.register_dim
    if dim not in _IDENTITY_CACHE:
        _IDENTITY_CACHE[dim] = qkernel.identity_channel(dim)
    return _IDENTITY_CACHE[dim]


def initial_configuration(spec) -> Configuration:
    return Configuration(spec.q0, 0, QuantumState.basis(spec.register_dim))


def check_input(spec, w):
    bad = sorted(set(w) - set(spec.input_alphabet))
    if bad:
        raise MachineError(f"input symbols {bad} not in machine alphabet {spec.input_alphabet!r}")


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return f"{len(self.violations)} violation(s):\n" + "\n".join(
            f"  - {v}" for v in self.violations
        )


def validate_spec(spec: MachineSpec) -> ValidationReport:
    """Diagnostic check of every structural invariant, with located violations."""
    bad = []

    if spec.kind not in KINDS:
        bad.append(f"kind {spec.kind!r} not in {KINDS}")
    if len(set(spec.states)) != len(spec.states):
        bad.append("duplicate state names")
    for role, q in (("q0", spec.q0), ("q_acc", spec.q_acc), ("q_rej", spec.q_rej)):
        if q not in spec.states:
            bad.append(f"{role} {q!r} not in states")
    if spec.q_acc == spec.q_rej:
        bad.append("q_acc and q_rej must differ")
    if not (isinstance(spec.register_dim, int) and spec.register_dim >= 1):
        bad.append(f"register_dim must be a positive integer, got {spec.register_dim!r}")
    symbols = tape_symbols(spec)
    if len(set(symbols)) != len(symbols):
        bad.append("input alphabet repeats a symbol or uses a tape marker")
    if bad:
        return ValidationReport(ok=False, violations=tuple(bad))

    halting = {spec.q_acc, spec.q_rej}
    known = set(spec.states)
    symset = set(symbols)

    for (q, sym), ch in spec.quantum_table.items():
        where = f"channel ({q!r}, {sym!r})"
        if q not in known or sym not in symset:
            bad.append(f"{where}: unknown state or symbol")
            continue
        if q in halting:
            bad.append(f"{where}: halting states take no transitions")
        if ch.dim != spec.register_dim:
            bad.append(f"{where}: dimension {ch.dim} != register_dim {spec.register_dim}")
            continue
        report = qkernel.check_channel(ch)
        if not report.ok:
            bad.append(f"{where}: completeness residual {report.residual:.3e}")
        if spec.kind == "classical" and not _is_coin_or_trivial(ch):
            bad.append(f"{where}: classical machines allow only trivial or fair-coin channels")

    if spec.kind == "classical" and spec.register_dim != 1:
        bad.append(f"classical machine has register_dim {spec.register_dim} > 1")

    emitted = set()
    for q in spec.states:
        if q in halting:
            continue
        for sym in symbols:
            for outcome in channel_for(spec, q, sym).outcomes:
                emitted.add((q, sym, outcome))
                entry = spec.classical_table.get((q, sym, outcome))
                if entry is None:
                    bad.append(f"missing classical entry ({q!r}, {sym!r}, {outcome!r})")
                    continue
                q2, move = entry
                if q2 not in known:
                    bad.append(f"classical entry ({q!r}, {sym!r}, {outcome!r}): unknown target {q2!r}")
                if move not in MOVES:
                    bad.append(f"classical entry ({q!r}, {sym!r}, {outcome!r}): move {move!r} not in {MOVES}")
                elif sym == LEFT_MARK and move == -1:
                    bad.append(f"endmarker guard: ({q!r}, {sym!r}, {outcome!r}) moves left of the left marker")
                elif sym == RIGHT_MARK and move == 1:
                    bad.append(f"endmarker guard: ({q!r}, {sym!r}, {outcome!r}) moves right of the right marker")

    for key in spec.classical_table:
        if key not in emitted:
            q = key[0] if isinstance(key, tuple) and key else None
            if q in halting:
                bad.append(f"classical entry {key!r}: halting states take no transitions")
            else:
                bad.append(f"classical entry {key!r}: outcome never emitted at that (state, symbol)")

    return ValidationReport(ok=not bad, violations=tuple(bad))


def _is_coin_or_trivial(ch: QuantumChannel) -> bool:
    ops = [op for _, op in ch.branches]
    if len(ops) == 1:
        return bool(np.allclose(ops[0], np.eye(ch.dim), atol=1e-9))
    if len(ops) == 2:
        half = np.sqrt(0.5) * np.eye(ch.dim)
        return all(np.allclose(op, half, atol=1e-9) for op in ops)
    return False


def ensure_valid(spec: MachineSpec) -> MachineSpec:
    report = validate_spec(spec)
    if not report.ok:
        raise MachineError("invalid machine spec: " + report.summary())
    return spec


# ---------------------------------------------------------------------------
# step semantics


def step_distribution(spec, cfg: Configuration, w):
    """All successors of cfg on input w: list of (probability, next).

    `next` is a Configuration, or the verdict string for transitions that
    enter the accept/reject state.  For an already-halted cfg the verdict is
    echoed with probability 1.
    """
    n = len(w)
    if not 0 <= cfg.pos <= n + 1:
        raise MachineError(f"head position {cfg.pos} outside tape 0..{n + 1}")
    v = verdict_of(spec, cfg.state)
    if v is not None:
        return [(1.0, v)]
    sym = tape_of(w)[cfg.pos]
    out = []
    for outcome, p, post in qkernel.apply_channel(channel_for(spec, cfg.state, sym), cfg.register):
        try:
            q2, move = spec.classical_table[(cfg.state, sym, outcome)]
        except KeyError:
            raise MachineError(
                f"no classical entry for ({cfg.state!r}, {sym!r}, {outcome!r}); "
                "validate_spec would have flagged this"
            ) from None
        v = verdict_of(spec, q2)
        out.append((p, v if v is not None else Configuration(q2, cfg.pos + move, post)))
    return out


# ---------------------------------------------------------------------------
# serialization (format tag "qsspec-1")


def _channel_to_json(ch: QuantumChannel):
    return {
        "dim": ch.dim,
        "branches": [
            {"outcome": label, "operator": qkernel.matrix_to_json(op)}
            for label, op in ch.branches
        ],
    }


def _channel_from_json(doc) -> QuantumChannel:
    dim = doc["dim"]
    return QuantumChannel(
        [(b["outcome"], qkernel.matrix_from_json(b["operator"], dim)) for b in doc["branches"]]
    )


def spec_to_json(spec: MachineSpec) -> dict:
    channels = {}
    for (q, sym), ch in spec.quantum_table.items():
        channels.setdefault(q, {})[sym] = _channel_to_json(ch)
    classical = {}
    for (q, sym, outcome), (q2, move) in spec.classical_table.items():
        classical.setdefault(q, {}).setdefault(sym, {})[outcome] = [q2, int(move)]
    doc = {
        "format": SPEC_FORMAT,
        "kind": spec.kind,
        "states": list(spec.states),
        "q0": spec.q0,
        "q_acc": spec.q_acc,
        "q_rej": spec.q_rej,
        "input_alphabet": spec.input_alphabet,
        "register_dim": spec.register_dim,
        "channels": channels,
        "classical": classical,
    }
    if spec.metadata:
        doc["metadata"] = spec.metadata
    return doc


def spec_from_json(doc) -> MachineSpec:
    if doc.get("format") != SPEC_FORMAT:
        raise MachineError(f"unsupported machine file format {doc.get('format')!r}"
                           f" (expected {SPEC_FORMAT!r})")
    quantum_table = {}
    for q, by_sym in doc.get("channels", {}).items():
        for sym, ch in by_sym.items():
            quantum_table[(q, sym)] = _channel_from_json(ch)
    classical_table = {}
    for q, by_sym in doc.get("classical", {}).items():
        for sym, by_outcome in by_sym.items():
            for outcome, (q2, move) in by_outcome.items():
                classical_table[(q, sym, outcome)] = (q2, int(move))
    return MachineSpec(
        kind=doc["kind"],
        states=tuple(doc["states"]),
        q0=doc["q0"],
        q_acc=doc["q_acc"],
        q_rej=doc["q_rej"],
        input_alphabet=doc["input_alphabet"],
        register_dim=doc["register_dim"],
        quantum_table=quantum_table,
        classical_table=classical_table,
        metadata=doc.get("metadata", {}),
    )


def write_json_atomic(doc, path):
    """Serialize doc to path via a same-directory temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_spec(spec: MachineSpec, path):
    write_json_atomic(spec_to_json(spec), path)


def load_spec(path) -> MachineSpec:
    with open(path) as fh:
        return spec_from_json(json.load(fh))
