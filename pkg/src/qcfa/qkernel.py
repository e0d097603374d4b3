"""Small dense complex linear algebra for finite quantum registers.

States are plain complex vectors.  A channel is a list of outcome-labelled
operators -- one operator per outcome, so trajectories conditioned on an
outcome stay pure.  Everything here is double precision; acceptance
tolerances are 1e-9 unless a caller pins something tighter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

COMPLETENESS_TOL = 1e-9


class ChannelError(ValueError):
    """Malformed or non-complete channel."""


class ContractionError(ValueError):
    """Matrix does not fit under the requested dilation constant."""


def _as_operator(m, dim=None):
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ChannelError(f"operator must be square, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ChannelError(f"operator dimension {a.shape[0]} != expected {dim}")
    if not np.all(np.isfinite(a)):
        raise ChannelError("operator has non-finite entries")
    a.setflags(write=False)
    return a


class QuantumState:
    """Register state: complex amplitude vector, norm tracked explicitly."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        a = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if a.size == 0:
            raise ValueError("state must have at least one amplitude")
        if not np.all(np.isfinite(a)):
            raise ValueError("state amplitudes must be finite")
        a.setflags(write=False)
        self.amplitudes = a

    @classmethod
    def basis(cls, dim, k=0):
        v = np.zeros(dim, dtype=np.complex128)
        v[k] = 1.0
        return cls(v)

    @property
    def dim(self):
        return self.amplitudes.size

    def squared_norm(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return QuantumState(self.amplitudes / n)

    def overlap2(self, other):
        """|<self|other>|^2, for unit vectors a fidelity in [0, 1]."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def __repr__(self):
        return f"QuantumState({np.array2string(self.amplitudes, precision=6)})"


class QuantumChannel:
    """One selective quantum operation: outcome-labelled operator branches.

    Exactly one operator per outcome label.  A channel with two operators
    under the same label would make conditioned states mixed, which nothing
    in this package needs; such input is rejected up front.
    """

    __slots__ = ("dim", "branches")

    def __init__(self, branches):
        branches = [(str(label), _as_operator(op)) for label, op in branches]
        if not branches:
            raise ChannelError("channel needs at least one branch")
        dim = branches[0][1].shape[0]
        seen = set()
        for label, op in branches:
            if op.shape[0] != dim:
                raise ChannelError("all branch operators must share one dimension")
            if label in seen:
                raise ChannelError(
                    f"duplicate outcome label {label!r}: one operator per outcome; "
                    "give distinct labels (or route both cases through a single operator)"
                )
            seen.add(label)
        self.dim = dim
        self.branches = tuple(branches)

    @property
    def outcomes(self):
        return tuple(label for label, _ in self.branches)

    def completeness_residual(self):
        """Max-abs entry of sum(E^dagger E) - I."""
        acc = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for _, op in self.branches:
            acc += op.conj().T @ op
        return float(np.max(np.abs(acc - np.eye(self.dim))))

    def __repr__(self):
        return f"QuantumChannel(dim={self.dim}, outcomes={list(self.outcomes)})"


@dataclass(frozen=True)
class ChannelReport:
    residual: float
    branch_norms: dict
    ok: bool


def check_channel(ch: QuantumChannel, tol=COMPLETENESS_TOL) -> ChannelReport:
    """Diagnostic: completeness residual and per-branch operator norms."""
    norms = {label: float(np.linalg.norm(op, 2)) for label, op in ch.branches}
    residual = ch.completeness_residual()
    return ChannelReport(residual=residual, branch_norms=norms, ok=residual <= tol)


def apply_channel(ch: QuantumChannel, psi: QuantumState):
    """Apply a complete channel to a (unit) state.

    Returns [(outcome, probability, renormalized post-state)] for every
    outcome with nonzero probability; probabilities are squared norms of
    the branch images, so they sum to the squared norm of the input.
    """
    if ch.dim != psi.dim:
        raise ChannelError(f"channel dim {ch.dim} != state dim {psi.dim}")
    residual = ch.completeness_residual()
    if residual > COMPLETENESS_TOL:
        raise ChannelError(
            f"channel is not complete (residual {residual:.3e} > {COMPLETENESS_TOL:g})"
        )
    out = []
    for label, op in ch.branches:
        phi = op @ psi.amplitudes
        p = float(np.vdot(phi, phi).real)
        if p > 0.0:
            out.append((label, p, QuantumState(phi / np.sqrt(p))))
    return out


def dilate_contraction(M, c) -> QuantumChannel:
    """Embed M/c into a two-branch channel: "go" = M/c, "restart" = the defect.

    The restart branch is the principal square root of I - (M/c)^dagger(M/c),
    so completeness holds by construction; it is still re-verified.
    """
    if c <= 0:
        raise ContractionError("dilation constant must be positive")
    A = _as_operator(M) / c
    dim = A.shape[0]
    s = float(np.linalg.norm(A, 2))
    if s > 1.0 + 1e-9:
        raise ContractionError(
            f"spectral norm {s * c:.6g} exceeds the dilation constant {c:g}; "
            f"retry with c >= {s * c:.6g}"
        )
    gram = np.eye(dim) - A.conj().T @ A
    gram = (gram + gram.conj().T) / 2.0
    w, v = scipy.linalg.eigh(gram)
    w = np.clip(w, 0.0, None)
    rest = (v * np.sqrt(w)) @ v.conj().T
    ch = QuantumChannel([("go", A), ("restart", rest)])
    residual = ch.completeness_residual()
    if residual > COMPLETENESS_TOL:
        raise ChannelError(f"dilation failed completeness re-check ({residual:.3e})")
    return ch


# ---------------------------------------------------------------------------
# channel factories
#
# Outcome label conventions used across the package:
#   "-"            deterministic (unitary / identity) step
#   "h", "t"       fair coin
#   "0".."d-1"     computational-basis measurement
#   "go"/"restart" dilated contraction


def identity_channel(dim, outcome="-"):
    return QuantumChannel([(outcome, np.eye(dim))])


def unitary_channel(U, outcome="-"):
    U = _as_operator(U)
    dev = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if dev > COMPLETENESS_TOL:
        raise ChannelError(f"matrix is not unitary (deviation {dev:.3e})")
    return QuantumChannel([(outcome, U)])


def rotation_channel(theta, dim=2, axes=(0, 1), outcome="-"):
    """Single-branch planar rotation by theta acting on two register axes."""
    U = np.eye(dim, dtype=np.complex128)
    i, j = axes
    U[i, i] = np.cos(theta)
    U[i, j] = -np.sin(theta)
    U[j, i] = np.sin(theta)
    U[j, j] = np.cos(theta)
    return QuantumChannel([(outcome, U)])


def coin_channel(dim=1, labels=("h", "t")):
    """Fair coin: two scalar branches sqrt(1/2) * I; the register is untouched."""
    half = np.sqrt(0.5) * np.eye(dim)
    return QuantumChannel([(labels[0], half), (labels[1], half.copy())])


def basis_measurement(dim):
    """Computational-basis measurement: outcome "k" projects onto |k>."""
    branches = []
    for k in range(dim):
        p = np.zeros((dim, dim))
        p[k, k] = 1.0
        branches.append((str(k), p))
    return QuantumChannel(branches)


def projective_measurement(dim, groups):
    """Projective measurement from {label: [basis indices]} covering 0..dim-1."""
    used = []
    branches = []
    for label, idxs in groups.items():
        p = np.zeros((dim, dim))
        for i in idxs:
            p[i, i] = 1.0
            used.append(i)
        branches.append((label, p))
    if sorted(used) != list(range(dim)):
        raise ChannelError("projector index groups must partition 0..dim-1")
    return QuantumChannel(branches)


def completion_unitary(target, source=0):
    """A unitary with column `source` equal to `target` (Gram-Schmidt fill)."""
    t = np.asarray(target, dtype=np.complex128).reshape(-1)
    n = float(np.linalg.norm(t))
    if abs(n - 1.0) > 1e-12:
        t = t / n
    dim = t.size
    cols = [t]
    for k in range(dim):
        v = np.zeros(dim, dtype=np.complex128)
        v[k] = 1.0
        for c in cols:
            v = v - np.vdot(c, v) * c
        nv = np.linalg.norm(v)
        if nv > 1e-9:
            cols.append(v / nv)
    U = np.column_stack(cols[:dim])
    if source != 0:
        perm = list(range(dim))
        perm[0], perm[source] = perm[source], perm[0]
        U = U[:, perm]
    return U


# --- serialization helpers (row-major [re, im] pairs) ----------------------


def matrix_to_json(M):
    M = np.asarray(M, dtype=np.complex128)
    return [[float(x.real), float(x.imag)] for x in M.reshape(-1)]


def matrix_from_json(data, dim):
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    if flat.size != dim * dim:
        raise ChannelError(f"expected {dim * dim} entries, got {flat.size}")
    return flat.reshape(dim, dim)
