"""Command-line front end: generate instances, build machines, run, report.

Subcommands: gen, check, build, run, estimate, exact, sweep, verify.
Every JSON/CSV artifact carries a provenance block (tool version, command,
resolved parameters, seed where applicable, timestamp unless suppressed
with --no-timestamp).  Exit codes: 0 success, 1 verdict-style negative,
2 usage error, 3 resource cap.  There is no environment-variable
configuration; defaults can come from a JSON file given with --config,
explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

from . import __version__
from . import engines as eng
from . import langkit as lk
from . import machine as mach
from .builders import (
    build_eq_core,
    build_pal_core,
    build_rw_gate,
    compile_pppal,
    compile_rpal,
    interpret,
)
from .errors import CapExceeded

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_CAP = 3

SCHEMA = "qsreport-1"
SWEEP_COLUMNS = ("n", "m", "p_accept_hat", "wilson_lo", "wilson_hi",
                 "mean_steps", "median_steps", "cutoff_rate", "seed", "status")
DEFECT_KINDS = ("regex", "segment", "block", "wellorder", "nonpal")


class UsageError(Exception):
    """Bad flag combination or value; maps to exit code 2."""


# ---------------------------------------------------------------------------
# small plumbing


def _provenance(command, parameters, stamped):
    doc = {
        "schema": SCHEMA,
        "tool": {"name": "qcfa", "version": __version__},
        "command": command,
        "parameters": parameters,
    }
    if stamped:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return doc


def _write_text_atomic(text, path):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_json(doc, out):
    if out is None:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        mach.write_json_atomic(doc, out)


def _emit_text(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        _write_text_atomic(text, out)


def _apply_config(args):
    """Fill unset (None) flags from the --config JSON object."""
    path = getattr(args, "config", None)
    if path is None:
        return
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise UsageError("--config must hold a JSON object of flag defaults")
    ns = vars(args)
    for key, value in doc.items():
        dest = key.replace("-", "_")
        if dest in ("command", "config") or dest not in ns:
            raise UsageError(f"config key {key!r} is not a flag of {args.command!r}")
        if ns[dest] is None:
            ns[dest] = value


def _need(args, dest):
    value = getattr(args, dest)
    if value is None:
        raise UsageError(f"--{dest.replace('_', '-')} is required for {args.command}")
    return value


def _as_int(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) \
            or int(value) != value:
        raise UsageError(f"--{name} must be an integer, got {value!r}")
    return int(value)


def _palindromes(length):
    half = (length + 1) // 2
    for t in itertools.product("ab", repeat=half):
        h = "".join(t)
        yield h + h[: length - half][::-1]


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


# ---------------------------------------------------------------------------
# gen


def _gen_members(family, i, m, limit):
    if family == "rpal":
        bases = _palindromes(m)
        make = lambda p: lk.build_rl(i, p)
    else:
        params = lk.lang_params(i)
        bases = _palindromes(m ** i)
        make = lambda p: lk.pad(params, lk.punc(params, p))
    items = []
    for p in bases:
        items.append({"family": family, "i": i, "m": m, "base": p,
                      "text": make(p)})
        if limit is not None and len(items) >= limit:
            break
    return items


def cmd_gen(args):
    if (args.m is None) == (args.defect is None):
        raise UsageError("gen needs exactly one of --m or --defect")
    if args.defect is not None:
        seed = _as_int("seed", _need(args, "seed"))
        count = _as_int("count", args.count if args.count is not None else 50)
        items = [
            {"family": it.template, "i": it.level, "defect": it.defect,
             "mc_ok": it.mc_ok, "text": it.text}
            for it in lk.defect_corpus(args.defect, count, seed)
        ]
        if args.family is not None:
            items = [it for it in items if it["family"] == args.family]
        if args.limit is not None:
            items = items[: _as_int("limit", args.limit)]
        params = {"defect": args.defect, "count": count, "seed": seed,
                  "family": args.family,
                  "limit": None if args.limit is None else int(args.limit)}
    else:
        family = _need(args, "family")
        i = _as_int("i", _need(args, "i"))
        m = _as_int("m", args.m)
        limit = None if args.limit is None else _as_int("limit", args.limit)
        items = _gen_members(family, i, m, limit)
        params = {"family": family, "i": i, "m": m, "limit": limit}
    if args.format == "json":
        doc = _provenance("gen", params, not args.no_timestamp)
        doc["result"] = {"count": len(items), "items": items}
        _emit_json(doc, args.out)
    else:
        _emit_text("".join(it["text"] + "\n" for it in items), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def cmd_check(args):
    family = _need(args, "family")
    i = _as_int("i", _need(args, "i"))
    text = _need(args, "input")
    try:
        member = lk.is_member(family, i, text)
        note = None
    except lk.AlphabetError as exc:
        member, note = False, str(exc)
    doc = _provenance("check", {"family": family, "i": i, "input": text},
                      not args.no_timestamp)
    doc["result"] = {"member": member}
    if note:
        doc["result"]["note"] = note
    _emit_json(doc, args.out)
    return EXIT_OK if member else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# build


def _build_machine(template, args):
    if template in ("rpal", "pppal"):
        i = _as_int("i", _need(args, "i"))
        epsilon = _need(args, "epsilon")
        compiler = compile_rpal if template == "rpal" else compile_pppal
        return compiler(i, epsilon, args.k_eps,
                        k_core=args.k_core, j_sweeps=args.j_sweeps)
    if template == "rwgate":
        k = _as_int("k-eps", args.k_eps if args.k_eps is not None else 0)
        return build_rw_gate(k).standalone(continue_to="reject")
    if template == "palcore":
        frag = build_pal_core(_need(args, "epsilon"), j_sweeps=args.j_sweeps)
        return frag.standalone()
    frag = build_eq_core(_need(args, "epsilon"), k_core=args.k_core)
    return frag.standalone()


def cmd_build(args):
    template = _need(args, "template")
    out = _need(args, "out")
    spec = _build_machine(template, args)
    mach.save_spec(spec, out)
    params = {"template": template, "i": args.i, "epsilon": args.epsilon,
              "k_eps": args.k_eps, "k_core": args.k_core,
              "j_sweeps": args.j_sweeps, "out": out}
    doc = _provenance("build", params, not args.no_timestamp)
    doc["result"] = {"written": out, "states": spec.n_states,
                     "register_dim": spec.register_dim,
                     "metadata": dict(spec.metadata)}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# run / estimate / exact


def _load_for_input(args):
    spec = mach.load_spec(_need(args, "spec"))
    text = _need(args, "input")
    mach.check_input(spec, text)
    return spec, text


def cmd_run(args):
    spec, text = _load_for_input(args)
    seed = _as_int("seed", _need(args, "seed"))
    max_steps = _as_int("max-steps",
                        args.max_steps if args.max_steps is not None else 1_000_000)
    report = eng.run_trajectory(spec, text, seed=seed, max_steps=max_steps)
    doc = _provenance("run", {"spec": args.spec, "input": text, "seed": seed,
                              "max_steps": max_steps}, not args.no_timestamp)
    doc["result"] = report.to_json()
    _emit_json(doc, args.out)
    if report.verdict == "accept":
        return EXIT_OK
    if report.verdict == "reject":
        return EXIT_NEGATIVE
    return EXIT_CAP


def cmd_estimate(args):
    spec, text = _load_for_input(args)
    seed = _as_int("seed", _need(args, "seed"))
    trials = _as_int("trials",
                     args.trials if args.trials is not None else 10_000)
    max_steps = _as_int("max-steps",
                        args.max_steps if args.max_steps is not None else 1_000_000)
    report = eng.estimate(spec, text, trials=trials, seed=seed,
                          max_steps=max_steps)
    doc = _provenance("estimate", {"spec": args.spec, "input": text,
                                   "trials": trials, "seed": seed,
                                   "max_steps": max_steps},
                      not args.no_timestamp)
    doc["result"] = report.to_json()
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_exact(args):
    spec, text = _load_for_input(args)
    kwargs = {"representation": args.representation or "auto"}
    if args.config_cap is not None:
        kwargs["config_cap"] = _as_int("config-cap", args.config_cap)
    solution = eng.solve_exact(spec, text, **kwargs)
    doc = _provenance("exact", {"spec": args.spec, "input": text, **kwargs},
                      not args.no_timestamp)
    doc["result"] = solution.to_json()
    _emit_json(doc, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


_SWEEP_VARIES = {"rpal": "m", "pppal": "m", "palcore": "n", "rwgate": "n"}


def _sweep_machine(subject, args):
    if subject in ("rpal", "pppal"):
        return _build_machine(subject, args)
    if subject == "palcore":
        return build_pal_core(_need(args, "epsilon"),
                              j_sweeps=args.j_sweeps).standalone()
    k = _as_int("k-eps", args.k_eps if args.k_eps is not None else 0)
    return build_rw_gate(k).standalone(continue_to="reject")


def _sweep_input(subject, args, point):
    if subject == "rpal":
        return lk.build_rl(_as_int("i", _need(args, "i")), "a" * point)
    if subject == "pppal":
        params = lk.lang_params(_as_int("i", _need(args, "i")))
        return lk.pad(params, lk.punc(params, "a" * point))
    return "a" * point


def cmd_sweep(args):
    subject = _need(args, "subject")
    vary = args.vary if args.vary is not None else _SWEEP_VARIES[subject]
    if vary != _SWEEP_VARIES[subject]:
        raise UsageError(f"subject {subject!r} sweeps over "
                         f"{_SWEEP_VARIES[subject]!r}, not {vary!r}")
    lo = _as_int("from", _need(args, "from_"))
    hi = _as_int("to", _need(args, "to"))
    step = _as_int("step", args.step if args.step is not None else 1)
    if step < 1 or hi < lo:
        raise UsageError("sweep range must be nonempty with positive step")
    seed = _as_int("seed", _need(args, "seed"))
    trials = _as_int("trials",
                     args.trials if args.trials is not None else 10_000)
    max_steps = _as_int("max-steps",
                        args.max_steps if args.max_steps is not None else 1_000_000)
    spec = _sweep_machine(subject, args)

    rows = []
    for idx, point in enumerate(range(lo, hi + 1, step)):
        row_seed = seed + idx
        row = dict.fromkeys(SWEEP_COLUMNS, "")
        row["m" if vary == "m" else "n"] = point
        row["seed"] = row_seed
        row["status"] = "ok"
        try:
            text = _sweep_input(subject, args, point)
            row["n"] = len(text)
            if vary == "m":
                row["m"] = point
            rep = eng.estimate(spec, text, trials=trials, seed=row_seed,
                               max_steps=max_steps)
            row.update(
                p_accept_hat=rep.p_hat, wilson_lo=rep.wilson_lo,
                wilson_hi=rep.wilson_hi, mean_steps=rep.mean_steps,
                median_steps=rep.median_steps,
                cutoff_rate=rep.cutoffs / rep.trials,
            )
        except (CapExceeded, mach.MachineError, lk.LanguageError) as exc:
            row["status"] = f"error: {exc}"
            if vary == "m":
                row["n"] = ""
        rows.append(row)

    params = {"subject": subject, "vary": vary, "from": lo, "to": hi,
              "step": step, "trials": trials, "seed": seed,
              "max_steps": max_steps, "i": args.i, "epsilon": args.epsilon,
              "k_eps": args.k_eps, "k_core": args.k_core,
              "j_sweeps": args.j_sweeps}
    buf = io.StringIO()
    head = _provenance("sweep", params, not args.no_timestamp)
    for key in ("schema", "tool", "command", "parameters", "timestamp"):
        if key in head:
            buf.write(f"# {key}={json.dumps(head[key], sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[col]) for col in SWEEP_COLUMNS])
    _emit_text(buf.getvalue(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _check(name, ok, detail):
    return {"name": name, "ok": bool(ok), "detail": detail}


def _suite_gate():
    """Walk-gate law: exit chance exactly 2^-k/(n+1)."""
    checks = []
    for k in (0, 1, 2):
        spec = build_rw_gate(k).standalone(continue_to="reject")
        for n in range(9):
            got = eng.solve_exact(spec, "a" * n).p_accept
            want = 0.5 ** k / (n + 1)
            checks.append(_check(f"gate k={k} n={n}", abs(got - want) <= 1e-9,
                                 f"p_exit={got!r}"))
    return checks


def _suite_counter(seed):
    """Counter identity: scaled register reads the word both ways."""
    from .builders import counter_profile

    def enc4(w):
        return sum((1 if c == "a" else 2) * 4 ** t for t, c in enumerate(w))

    checks = []
    words = ["".join(t) for n in range(0, 7)
             for t in itertools.product("ab", repeat=n)]
    bad = [w for w in words
           if counter_profile(w)[2] * 8.0 ** len(w) != enc4(w[::-1])
           or counter_profile(w)[3] * 8.0 ** len(w) != enc4(w)]
    checks.append(_check("counter identity |w|<=6", not bad, f"violations={bad}"))
    diffbad = [w for w in words
               if (counter_profile(w)[2] == counter_profile(w)[3])
               != (w == w[::-1])]
    checks.append(_check("diff zero iff mirror", not diffbad,
                         f"violations={diffbad}"))
    return checks


def _suite_members(seed):
    """One-sided acceptance on small members; bounded leak on defects."""
    checks = []
    rpal1 = compile_rpal(1, "1/5")
    for text, want_one in (("aa$1aa1", True), ("ab$1aa1", False)):
        sol = eng.solve_exact(rpal1, text)
        ok = (abs(sol.p_accept - 1.0) <= 1e-8 if want_one
              else sol.p_accept <= 0.2 + 1e-8)
        checks.append(_check(f"rpal1 {text}", ok, f"p_accept={sol.p_accept!r}"))
    pppal1 = compile_pppal(1, "1/5")
    params = lk.lang_params(1)
    member = lk.pad(params, lk.punc(params, "aa"))
    sol = eng.solve_exact(pppal1, member)
    checks.append(_check(f"pppal1 {member}", abs(sol.p_accept - 1.0) <= 1e-8,
                         f"p_accept={sol.p_accept!r}"))
    return checks


def _suite_agreement(seed, trials):
    """Interpreter vs compiled machine: one-sample proportion test at 1%."""
    knobs = {"k_eps": 0, "k_core": 0, "j_sweeps": 2}
    text = "ab$1aa1"
    exact = eng.solve_exact(compile_rpal(1, "1/5", **knobs), text).p_accept
    hits = sum(
        interpret("rpal", 1, "1/5", text, seed=seed + t, **knobs).verdict
        == "accept"
        for t in range(trials)
    )
    z = abs(hits / trials - exact) / math.sqrt(exact * (1 - exact) / trials)
    return [_check(f"agreement {text}", z < 2.576,
                   f"freq={hits}/{trials} exact={exact:.6f} z={z:.3f}")]


def cmd_verify(args):
    seed = _as_int("seed", _need(args, "seed"))
    trials = _as_int("trials", args.trials if args.trials is not None else 2000)
    wanted = args.suite if args.suite is not None else "all"
    suites = {}
    if wanted in ("all", "gate"):
        suites["gate"] = _suite_gate()
    if wanted in ("all", "counter"):
        suites["counter"] = _suite_counter(seed)
    if wanted in ("all", "members"):
        suites["members"] = _suite_members(seed)
    if wanted in ("all", "agreement"):
        suites["agreement"] = _suite_agreement(seed, trials)
    ok = all(c["ok"] for checks in suites.values() for c in checks)
    doc = _provenance("verify", {"suite": wanted, "seed": seed,
                                 "trials": trials}, not args.no_timestamp)
    doc["result"] = {
        "ok": ok,
        "suites": {name: {"ok": all(c["ok"] for c in checks), "checks": checks}
                   for name, checks in suites.items()},
    }
    _emit_json(doc, args.out)
    return EXIT_OK if ok else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# parser


def _add_common(sub):
    sub.add_argument("--config", help="JSON file with flag defaults")
    sub.add_argument("--out", help="write the artifact here (atomic)")
    sub.add_argument("--no-timestamp", action="store_true",
                     help="omit the timestamp field for byte-stable output")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qcfa",
        description="two-way quantum-classical automata: build, run, report",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="emit members or structured near-members")
    p.add_argument("--family", choices=("rpal", "pppal"))
    p.add_argument("--i", type=int)
    p.add_argument("--m", type=int, help="size index: base block of length m "
                                         "(rpal) or m^i (pppal)")
    p.add_argument("--defect", choices=DEFECT_KINDS)
    p.add_argument("--count", type=int, help="corpus size per defect kind")
    p.add_argument("--seed", type=int)
    p.add_argument("--limit", type=int)
    p.add_argument("--format", choices=("text", "json"), default="text")
    _add_common(p)

    p = sub.add_parser("check", help="oracle membership; exit 1 on nonmember")
    p.add_argument("--family", choices=("rpal", "pppal"))
    p.add_argument("--i", type=int)
    p.add_argument("--input")
    _add_common(p)

    p = sub.add_parser("build", help="compile a machine to a spec file")
    p.add_argument("--template",
                   choices=("rpal", "pppal", "rwgate", "palcore", "eqcore"))
    p.add_argument("--i", type=int)
    p.add_argument("--epsilon", help="error bound as a rational string")
    p.add_argument("--k-eps", type=int)
    p.add_argument("--k-core", type=int)
    p.add_argument("--j-sweeps", type=int)
    _add_common(p)

    for name, extra in (("run", ("seed", "max_steps")),
                        ("estimate", ("trials", "seed", "max_steps")),
                        ("exact", ())):
        p = sub.add_parser(name, help=f"{name} a machine on one input")
        p.add_argument("--spec", help="machine spec file")
        p.add_argument("--input")
        if "trials" in extra:
            p.add_argument("--trials", type=int)
        if "seed" in extra:
            p.add_argument("--seed", type=int)
        if "max_steps" in extra:
            p.add_argument("--max-steps", type=int)
        if name == "exact":
            p.add_argument("--representation",
                           choices=("auto", "ray", "density"))
            p.add_argument("--config-cap", type=int)
        _add_common(p)

    p = sub.add_parser("sweep", help="size sweep, one CSV row per point")
    p.add_argument("--subject", choices=("rpal", "pppal", "palcore", "rwgate"))
    p.add_argument("--vary", choices=("m", "n"))
    p.add_argument("--from", dest="from_", type=int)
    p.add_argument("--to", type=int)
    p.add_argument("--step", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--epsilon")
    p.add_argument("--k-eps", type=int)
    p.add_argument("--k-core", type=int)
    p.add_argument("--j-sweeps", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-steps", type=int)
    _add_common(p)

    p = sub.add_parser("verify", help="run the invariant suites")
    p.add_argument("--suite",
                   choices=("all", "gate", "counter", "members", "agreement"))
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    _add_common(p)

    return parser


_HANDLERS = {
    "gen": cmd_gen,
    "check": cmd_check,
    "build": cmd_build,
    "run": cmd_run,
    "estimate": cmd_estimate,
    "exact": cmd_exact,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_config(args)
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, eng.EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
