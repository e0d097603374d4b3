"""Execution engines: seeded Monte Carlo sampling and exact absorption solves.

The Monte Carlo engine walks single trajectories with a per-trial
xoshiro256** stream derived from (seed, trial), so reports are
bit-identical for identical arguments regardless of batching.

The exact engine turns (spec, input) into a finite absorbing chain and
solves the standard absorption/hitting-time linear systems.  Two chain
representations exist:

* ray: nodes are (state, position, register ray).  Exact whenever each
  node's onward behaviour depends on the register only through the ray,
  which holds for pure-state trajectories by construction.  Rays are
  keyed by rounded amplitudes; a key collision between genuinely
  different rays (fidelity gap > 1e-9) aborts this representation.
* density: nodes are (state, position) carrying an unnormalized density
  operator; always finite (|states| * (n+2) * dim^2 unknowns), used as
  the fallback and for cross-checks.

p_accept is reported as 1 - p_reject - p_unabsorbed: on machines whose
members halt almost surely with rare reject branches the subtracted
quantities are tiny vectors solved to tiny absolute error, which keeps
"p_accept = 1" sharp even when (I - Q) is badly conditioned.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import machine as mach
from .errors import CapExceeded
from .machine import ACCEPT, REJECT, MachineError

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

CUTOFF = "cutoff"

Z95 = 1.959963984540054
Z99 = 2.5758293035489004

PRUNE_EPS = 1e-14
DENSE_CUTOFF = 200_000
CONFIG_CAP = 1_000_000
RESIDUAL_TOL = 1e-10

_RAY_DIGITS = 12
_FIDELITY_GAP = 1e-9

_JIT_ENABLED = True  # flipped by tests to exercise the pure-python walker


class EngineError(RuntimeError):
    """Solver failed to meet its accuracy contract."""


def wilson_interval(successes, trials, z=Z95):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return (lo, hi)


# ---------------------------------------------------------------------------
# Monte Carlo walker
#
# One source for the trajectory loop; compiled with numba when available,
# executed as-is (numpy uint64 scalars) otherwise.  A regression test pins
# both paths to identical outputs.

_SM_GOLD = np.uint64(0x9E3779B97F4A7C15)
_SM_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MIX2 = np.uint64(0x94D049BB133111EB)
_FNV_OFF = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)
_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U45 = np.uint64(45)
_U64 = np.uint64(64)
_DOUBLE_SCALE = 2.0 ** -53


def _splitmix(state):
    state = state + _SM_GOLD
    z = state
    z = (z ^ (z >> _U30)) * _SM_MIX1
    z = (z ^ (z >> _U27)) * _SM_MIX2
    return z ^ (z >> _U31), state


def _rotl(x, k):
    return (x << k) | (x >> (_U64 - k))


def _walk_trials(trials, seed, max_steps, start, dim, tape, off, cnt,
                 ops, br_next, br_move, max_branches, verdicts, steps):
    """Sample `trials` trajectories; returns the trial-0 digest."""
    phis = np.empty((max_branches, dim), np.complex128)
    probs = np.empty(max_branches, np.float64)
    reg = np.empty(dim, np.complex128)
    digest0 = _FNV_OFF
    for t in range(trials):
        sm = np.uint64(seed) ^ ((np.uint64(t) + _U1) * _SM_GOLD)
        # the uint64 casts are no-ops when compiled; on the pure-python path
        # they pin the state width after boxed returns
        s0, sm = _splitmix(sm)
        sm = np.uint64(sm)
        s1, sm = _splitmix(sm)
        sm = np.uint64(sm)
        s2, sm = _splitmix(sm)
        sm = np.uint64(sm)
        s3, sm = _splitmix(sm)
        s0 = np.uint64(s0)
        s1 = np.uint64(s1)
        s2 = np.uint64(s2)
        s3 = np.uint64(s3)
        if (s0 | s1 | s2 | s3) == _U0:
            s0 = _SM_GOLD

        for i in range(dim):
            reg[i] = 0.0
        reg[0] = 1.0
        state = start
        pos = 0
        h = _FNV_OFF
        verdict = np.int8(2)
        nsteps = max_steps
        for step in range(1, max_steps + 1):
            sym = tape[pos]
            base = off[state, sym]
            nb = cnt[state, sym]
            total = 0.0
            for b in range(nb):
                acc_p = 0.0
                for i in range(dim):
                    s = 0.0j
                    for j in range(dim):
                        s += ops[base + b, i, j] * reg[j]
                    phis[b, i] = s
                    acc_p += s.real * s.real + s.imag * s.imag
                probs[b] = acc_p
                total += acc_p
            out = _rotl(s1 * _U5, _U7) * _U9
            tmp = s1 << _U17
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= tmp
            s3 = _rotl(s3, _U45)
            r = float(out >> _U11) * _DOUBLE_SCALE * total
            chosen = nb - 1
            acc_p = 0.0
            for b in range(nb):
                acc_p += probs[b]
                if r < acc_p:
                    chosen = b
                    break
            inv = 1.0 / math.sqrt(probs[chosen])
            for i in range(dim):
                reg[i] = phis[chosen, i] * inv
            gb = base + chosen
            h = (h ^ np.uint64(gb + 1)) * _FNV_PRIME
            h = (h ^ np.uint64(pos)) * _FNV_PRIME
            nxt = br_next[gb]
            if nxt < 0:
                verdict = np.int8(1) if nxt == -1 else np.int8(0)
                nsteps = step
                break
            state = nxt
            pos = pos + br_move[gb]
        verdicts[t] = verdict
        steps[t] = nsteps
        if t == 0:
            digest0 = h
    return digest0


if numba is not None:
    _splitmix = numba.njit(cache=True)(_splitmix)
    _rotl = numba.njit(cache=True)(_rotl)
    _walk_trials_jit = numba.njit(cache=True)(_walk_trials)
else:  # pragma: no cover
    _walk_trials_jit = None


def _compile_tables(spec, w):
    """Flatten spec + input into the arrays the walker consumes."""
    symbols = mach.tape_symbols(spec)
    sym_index = {sym: k for k, sym in enumerate(symbols)}
    tape = np.array([sym_index[c] for c in mach.tape_of(w)], dtype=np.int64)
    states = list(spec.states)
    st_index = {q: k for k, q in enumerate(states)}
    S, K = len(states), len(symbols)

    off = np.zeros((S, K), dtype=np.int64)
    cnt = np.zeros((S, K), dtype=np.int64)
    op_list, nxt_list, mv_list = [], [], []
    for q in states:
        if mach.is_halting(spec, q):
            continue
        for sym in symbols:
            ch = mach.channel_for(spec, q, sym)
            base = len(op_list)
            for outcome, op in ch.branches:
                try:
                    q2, move = spec.classical_table[(q, sym, outcome)]
                except KeyError:
                    raise MachineError(
                        f"no classical entry for ({q!r}, {sym!r}, {outcome!r})"
                    ) from None
                op_list.append(np.asarray(op, dtype=np.complex128))
                if q2 == spec.q_acc:
                    nxt_list.append(-1)
                elif q2 == spec.q_rej:
                    nxt_list.append(-2)
                else:
                    nxt_list.append(st_index[q2])
                mv_list.append(move)
            off[st_index[q], sym_index[sym]] = base
            cnt[st_index[q], sym_index[sym]] = len(op_list) - base

    d = spec.register_dim
    ops = np.stack(op_list) if op_list else np.zeros((0, d, d), np.complex128)
    start = st_index[spec.q0]
    if spec.q0 == spec.q_acc:
        start = -1
    elif spec.q0 == spec.q_rej:
        start = -2
    return {
        "tape": tape,
        "off": off,
        "cnt": cnt,
        "ops": ops,
        "br_next": np.array(nxt_list, dtype=np.int64),
        "br_move": np.array(mv_list, dtype=np.int64),
        "max_branches": int(cnt.max()) if cnt.size else 1,
        "start": start,
        "dim": d,
    }


def _run_batch(spec, w, trials, seed, max_steps):
    mach.ensure_valid(spec)
    mach.check_input(spec, w)
    seed = int(seed) & 0x7FFFFFFFFFFFFFFF
    t = _compile_tables(spec, w)
    verdicts = np.empty(trials, dtype=np.int8)
    steps = np.empty(trials, dtype=np.int64)
    if t["start"] < 0:
        verdicts[:] = 1 if t["start"] == -1 else 0
        steps[:] = 0
        return verdicts, steps, int(_FNV_OFF)
    args = (trials, seed, max_steps, t["start"], t["dim"], t["tape"], t["off"],
            t["cnt"], t["ops"], t["br_next"], t["br_move"], t["max_branches"],
            verdicts, steps)
    if _walk_trials_jit is not None and _JIT_ENABLED:
        digest = _walk_trials_jit(*args)
    else:
        with np.errstate(over="ignore"):
            digest = _walk_trials(*args)
    return verdicts, steps, int(digest)


_VERDICT_NAMES = {1: ACCEPT, 0: REJECT, 2: CUTOFF}


@dataclass(frozen=True)
class RunReport:
    verdict: str
    steps: int
    seed: int
    max_steps: int
    digest: str

    def to_json(self):
        return {
            "verdict": self.verdict,
            "steps": self.steps,
            "seed": self.seed,
            "max_steps": self.max_steps,
            "digest": self.digest,
        }


def run_trajectory(spec, w, seed=0, max_steps=1_000_000) -> RunReport:
    """Sample one trajectory; deterministic given (spec, input, seed)."""
    verdicts, steps, digest = _run_batch(spec, w, 1, seed, max_steps)
    return RunReport(
        verdict=_VERDICT_NAMES[int(verdicts[0])],
        steps=int(steps[0]),
        seed=seed,
        max_steps=max_steps,
        digest=f"{digest:016x}",
    )


@dataclass(frozen=True)
class EstimateReport:
    verdict_counts: dict
    p_hat: float
    wilson_lo: float
    wilson_hi: float
    mean_steps: float
    median_steps: float
    cutoffs: int
    seed: int
    trials: int
    max_steps: int

    def to_json(self):
        return {
            "verdict_counts": dict(self.verdict_counts),
            "p_hat": self.p_hat,
            "wilson_lo": self.wilson_lo,
            "wilson_hi": self.wilson_hi,
            "mean_steps": self.mean_steps,
            "median_steps": self.median_steps,
            "cutoffs": self.cutoffs,
            "seed": self.seed,
            "trials": self.trials,
            "max_steps": self.max_steps,
        }


def estimate(spec, w, trials=10_000, seed=0, max_steps=1_000_000) -> EstimateReport:
    """Acceptance-rate estimate with a Wilson 95% interval.

    Trial t draws from an independent stream keyed by (seed, t); cutoffs
    count toward step statistics and are reported, never dropped.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    verdicts, steps, _ = _run_batch(spec, w, trials, seed, max_steps)
    k_acc = int(np.count_nonzero(verdicts == 1))
    k_rej = int(np.count_nonzero(verdicts == 0))
    k_cut = trials - k_acc - k_rej
    lo, hi = wilson_interval(k_acc, trials)
    return EstimateReport(
        verdict_counts={ACCEPT: k_acc, REJECT: k_rej, CUTOFF: k_cut},
        p_hat=k_acc / trials,
        wilson_lo=lo,
        wilson_hi=hi,
        mean_steps=float(steps.mean()),
        median_steps=float(np.median(steps)),
        cutoffs=k_cut,
        seed=seed,
        trials=trials,
        max_steps=max_steps,
    )


# ---------------------------------------------------------------------------
# exact absorption solver


@dataclass(frozen=True)
class AbsorptionSolution:
    p_accept: float
    p_reject: float
    expected_steps: float  # math.inf when absorption is not almost-sure
    residual: float
    unknowns: int
    method: str
    conservation_gap: float
    unresolved_mass: float = 0.0

    def to_json(self):
        return {
            "p_accept": self.p_accept,
            "p_reject": self.p_reject,
            "expected_steps": self.expected_steps,
            "residual": self.residual,
            "unknowns": self.unknowns,
            "method": self.method,
            "conservation_gap": self.conservation_gap,
            "unresolved_mass": self.unresolved_mass,
        }


class _RayCollision(Exception):
    """Two distinct register rays landed on one quantization key."""


def _quantize(vec):
    return tuple((round(float(x.real), _RAY_DIGITS), round(float(x.imag), _RAY_DIGITS))
                 for x in vec)


class _RayChain:
    __slots__ = ("n_nodes", "src", "dst", "prob")

    def __init__(self, n_nodes, src, dst, prob):
        self.n_nodes = n_nodes
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.prob = np.asarray(prob, dtype=np.float64)


def _build_ray_chain(spec, w, cap, prune):
    tape = mach.tape_of(w)
    checked = {}

    def branches_of(state, sym):
        ch = mach.channel_for(spec, state, sym)
        key = id(ch)
        if key not in checked:
            residual = ch.completeness_residual()
            if residual > 1e-9:
                raise MachineError(f"channel at ({state!r}, {sym!r}) is not complete")
            checked[key] = ch.branches
        return checked[key]

    psi0 = np.zeros(spec.register_dim, dtype=np.complex128)
    psi0[0] = 1.0
    nodes = {(spec.q0, 0, _quantize(psi0)): 0}
    rays = [psi0]
    meta = [(spec.q0, 0)]
    src, dst, prob = [], [], []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        state, pos = meta[i]
        psi = rays[i]
        sym = tape[pos]
        for outcome, op in branches_of(state, sym):
            phi = op @ psi
            p = float(np.vdot(phi, phi).real)
            if p < prune:
                continue
            try:
                q2, move = spec.classical_table[(state, sym, outcome)]
            except KeyError:
                raise MachineError(
                    f"no classical entry for ({state!r}, {sym!r}, {outcome!r})"
                ) from None
            if q2 == spec.q_acc:
                src.append(i), dst.append(-1), prob.append(p)
                continue
            if q2 == spec.q_rej:
                src.append(i), dst.append(-2), prob.append(p)
                continue
            post = phi / math.sqrt(p)
            key = (q2, pos + move, _quantize(post))
            j = nodes.get(key)
            if j is None:
                if len(nodes) >= cap:
                    raise CapExceeded(
                        f"configuration chain exceeds config_cap={cap} nodes; "
                        "raise the cap or use the density representation"
                    )
                j = len(nodes)
                nodes[key] = j
                rays.append(post)
                meta.append((q2, pos + move))
                queue.append(j)
            else:
                fid = abs(np.vdot(rays[j], post)) ** 2
                if fid < 1.0 - _FIDELITY_GAP:
                    raise _RayCollision(key)
            src.append(i), dst.append(j), prob.append(p)
    return _RayChain(len(nodes), src, dst, prob)


def _direct_solver(A):
    lu = scipy.sparse.linalg.splu(A.tocsc())

    def solve(b):
        x = lu.solve(b)
        res = 0.0
        for _ in range(5):
            r = b - A @ x
            res = float(np.max(np.abs(r))) if r.size else 0.0
            if res <= 1e-13:
                break
            x = x + lu.solve(r)
        return x, res

    return solve


def _iterative_solver(A):
    ilu = scipy.sparse.linalg.spilu(A.tocsc(), drop_tol=1e-10, fill_factor=100)
    M = scipy.sparse.linalg.LinearOperator(A.shape, ilu.solve)

    def solve(b):
        try:
            x, _ = scipy.sparse.linalg.gmres(A, b, M=M, rtol=1e-13, atol=0.0,
                                             maxiter=5000, restart=200)
        except TypeError:  # older scipy spells rtol as tol
            x, _ = scipy.sparse.linalg.gmres(A, b, M=M, tol=1e-13, atol=0.0,
                                             maxiter=5000, restart=200)
        res = 0.0
        for _ in range(5):
            r = b - A @ x
            res = float(np.max(np.abs(r))) if r.size else 0.0
            if res <= 1e-13:
                break
            x = x + ilu.solve(r)
        return x, res

    return solve


def _solve_ray(chain, dense_cutoff):
    n = chain.n_nodes
    # nodes that can reach absorption (reverse closure from absorbing edges)
    radj = [[] for _ in range(n)]
    seeds = []
    for s, d in zip(chain.src, chain.dst):
        if d >= 0:
            radj[d].append(s)
        else:
            seeds.append(s)
    can = np.zeros(n, dtype=bool)
    stack = [s for s in set(seeds)]
    for s in stack:
        can[s] = True
    while stack:
        v = stack.pop()
        for u in radj[v]:
            if not can[u]:
                can[u] = True
                stack.append(u)

    if not can[0]:
        # the start is confined to non-absorbing components
        return AbsorptionSolution(
            p_accept=0.0, p_reject=0.0, expected_steps=math.inf, residual=0.0,
            unknowns=n, method="ray", conservation_gap=0.0, unresolved_mass=1.0,
        )

    good = np.flatnonzero(can)
    gidx = -np.ones(n, dtype=np.int64)
    gidx[good] = np.arange(good.size)
    m = good.size
    b_acc = np.zeros(m)
    b_rej = np.zeros(m)
    b_stuck = np.zeros(m)
    rows, cols, vals = [], [], []
    for s, d, p in zip(chain.src, chain.dst, chain.prob):
        if not can[s]:
            continue
        gs = gidx[s]
        if d == -1:
            b_acc[gs] += p
        elif d == -2:
            b_rej[gs] += p
        elif not can[d]:
            b_stuck[gs] += p
        else:
            rows.append(gs), cols.append(gidx[d]), vals.append(p)
    Q = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(m, m))
    A = scipy.sparse.identity(m, format="csr") - Q
    solve = _direct_solver(A) if m <= dense_cutoff else _iterative_solver(A)

    start = gidx[0]
    residual = 0.0
    sides = {}
    for name, b in (("acc", b_acc), ("rej", b_rej), ("stuck", b_stuck)):
        if b.any():
            x, res = solve(b)
            sides[name] = float(x[start])
            residual = max(residual, res)
        else:
            sides[name] = 0.0
    p_rej = min(1.0, max(0.0, sides["rej"]))
    p_stuck = min(1.0, max(0.0, sides["stuck"]))
    p_acc = min(1.0, max(0.0, 1.0 - p_rej - p_stuck))
    gap = abs(sides["acc"] + sides["rej"] + sides["stuck"] - 1.0)
    if p_stuck > 0.0:
        expected = math.inf
    else:
        t, res = solve(np.ones(m))
        residual = max(residual, res)
        expected = float(t[start])
    return AbsorptionSolution(
        p_accept=p_acc, p_reject=p_rej, expected_steps=expected,
        residual=residual, unknowns=m, method="ray",
        conservation_gap=gap, unresolved_mass=p_stuck,
    )


def _spectral_radius(A, iters=300):
    n = A.shape[0]
    v = np.ones(n, dtype=np.complex128) / math.sqrt(n)
    rho = 0.0
    for _ in range(iters):
        w = A @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        rho = nw
        v = w / nw
    return rho


def _solve_density(spec, w, cap, dense_cutoff):
    mach.ensure_valid(spec)
    tape = mach.tape_of(w)
    P = len(tape)
    d = spec.register_dim
    blk = d * d
    live = [q for q in spec.states if not mach.is_halting(spec, q)]
    qidx = {q: k for k, q in enumerate(live)}
    unknowns = len(live) * P * blk
    if unknowns > cap:
        raise CapExceeded(
            f"density representation needs {unknowns} unknowns (config_cap={cap})"
        )

    def node(q, pos):
        return (qidx[q] * P + pos) * blk

    rows, cols, vals = [], [], []
    acc_row = np.zeros(unknowns, dtype=np.complex128)
    rej_row = np.zeros(unknowns, dtype=np.complex128)
    trace_row = np.zeros(unknowns, dtype=np.complex128)
    for q in live:
        for pos in range(P):
            base = node(q, pos)
            for i in range(d):
                trace_row[base + i + d * i] = 1.0
            sym = tape[pos]
            for outcome, op in mach.channel_for(spec, q, sym).branches:
                q2, move = spec.classical_table[(q, sym, outcome)]
                E = np.asarray(op, dtype=np.complex128)
                if q2 == spec.q_acc or q2 == spec.q_rej:
                    G = E.conj().T @ E  # mass = sum_ij G[j,i] rho[i,j]
                    row = acc_row if q2 == spec.q_acc else rej_row
                    for i in range(d):
                        for j in range(d):
                            row[base + i + d * j] += G[j, i]
                    continue
                tgt = node(q2, pos + move)
                B = np.kron(E.conj(), E)  # vec(E rho E^dag), column stacking
                for r in range(blk):
                    for c in range(blk):
                        if B[r, c] != 0.0:
                            rows.append(tgt + r)
                            cols.append(base + c)
                            vals.append(B[r, c])
    A = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(unknowns, unknowns),
                                dtype=np.complex128)
    x0 = np.zeros(unknowns, dtype=np.complex128)
    x0[node(spec.q0, 0)] = 1.0  # vec(|0><0|): entry (0,0)

    rho = _spectral_radius(A)
    if rho < 1.0 - 1e-12:
        I = scipy.sparse.identity(unknowns, format="csr", dtype=np.complex128)
        solve = _direct_solver(I - A) if unknowns <= dense_cutoff else _iterative_solver(I - A)
        z, residual = solve(x0)
        p_acc = float((acc_row @ z).real)
        p_rej = float((rej_row @ z).real)
        expected = float((trace_row @ z).real)
        gap = abs(p_acc + p_rej - 1.0)
        return AbsorptionSolution(
            p_accept=min(1.0, max(0.0, p_acc)), p_reject=min(1.0, max(0.0, p_rej)),
            expected_steps=expected, residual=residual, unknowns=unknowns,
            method="density", conservation_gap=gap, unresolved_mass=0.0,
        )

    # spectral radius at 1: mass is trapped; accumulate what does absorb
    x = x0.copy()
    p_acc = p_rej = esteps = 0.0
    horizon = max(10_000, 20 * unknowns)
    for _ in range(horizon):
        mass = float((trace_row @ x).real)
        if mass < 1e-12:
            break
        p_acc += float((acc_row @ x).real)
        p_rej += float((rej_row @ x).real)
        esteps += mass
        x = A @ x
    unresolved = float((trace_row @ x).real)
    gap = abs(p_acc + p_rej + unresolved - 1.0)
    return AbsorptionSolution(
        p_accept=min(1.0, max(0.0, p_acc)), p_reject=min(1.0, max(0.0, p_rej)),
        expected_steps=math.inf if unresolved > 1e-9 else esteps,
        residual=0.0, unknowns=unknowns, method="density-truncated",
        conservation_gap=gap, unresolved_mass=unresolved,
    )


def solve_exact(spec, w, *, config_cap=CONFIG_CAP, dense_cutoff=DENSE_CUTOFF,
                representation="auto", prune=PRUNE_EPS) -> AbsorptionSolution:
    """Absorption probabilities and expected hitting time for (spec, input).

    representation: "auto" tries the ray chain and falls back to the density
    superoperator on a ray-key collision; "ray" and "density" force one.
    Exceeding config_cap raises CapExceeded.
    """
    mach.ensure_valid(spec)
    mach.check_input(spec, w)
    v = mach.verdict_of(spec, spec.q0)
    if v is not None:
        return AbsorptionSolution(
            p_accept=1.0 if v == ACCEPT else 0.0,
            p_reject=1.0 if v == REJECT else 0.0,
            expected_steps=0.0, residual=0.0, unknowns=0, method="halted",
            conservation_gap=0.0, unresolved_mass=0.0,
        )
    if representation not in ("auto", "ray", "density"):
        raise ValueError(f"unknown representation {representation!r}")
    if representation in ("auto", "ray"):
        try:
            chain = _build_ray_chain(spec, w, config_cap, prune)
            return _solve_ray(chain, dense_cutoff)
        except _RayCollision:
            if representation == "ray":
                raise EngineError(
                    "ray-chain quantization collision; rerun with "
                    "representation='density'"
                ) from None
    return _solve_density(spec, w, config_cap, dense_cutoff)
