"""Batch command-line entry point.

Exit codes: 0 success, 2 usage error, 3 domain error. All numeric output is
printed with 10 significant digits so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import errors
from .core import (
    Gauge,
    associated_graph,
    consistency_index,
    dominant_eigenvalue,
    is_connected,
    parse_pcm,
    serialize_pcm,
    triad_profile,
)
from .elicitation import (
    QuestionPolicy,
    create_session,
    export_session,
    pattern_experiment,
    submit_answer,
)
from .inconsistency import (
    MissingPatternPolicy,
    RiQueryPolicy,
    cr_incomplete,
    ri_approx,
    ri_lookup,
    simulate_ri,
)
from .lexico import lex_completion
from .structures import (
    Adjustment,
    CdagSpec,
    EnumerationMode,
    bwm_enumerate_violations,
    bwm_guarantee,
    bwm_matrix,
    cdag_matrix,
    head_to_head_ingest,
)
from .weighting import (
    em_completion,
    em_weights,
    harker_weights,
    llsm_completion,
    llsm_weights,
    spanning_tree_gm_weights,
)

G = "%.10g"


def _fmt(x: float) -> str:
    return G % x


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(out, text: str) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def _parse_bounds(spec: str):
    lo, hi = spec.split(":")
    return (_parse_number(lo), _parse_number(hi))


def _parse_number(token: str) -> float:
    token = token.strip()
    if "/" in token:
        num, den = token.split("/")
        return float(num) / float(den)
    return float(token)


def _gauge(name: str) -> Gauge:
    return Gauge(name)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcmkit",
                                description="incomplete pairwise comparison matrix toolkit")
    seed_parent = argparse.ArgumentParser(add_help=False)
    seed_parent.add_argument("--seed", type=int, default=0,
                             help="random seed (environment variable PCM_SEED overrides)")
    sub = p.add_subparsers(dest="command", required=True,
                           parser_class=lambda **kw: argparse.ArgumentParser(
                               parents=[seed_parent], **kw))

    a = sub.add_parser("analyze", help="graph, connectivity, triads, consistency ratio")
    a.add_argument("input", help="matrix file (CSV grid or structured JSON), '-' for stdin")
    a.add_argument("--ri-policy", default="table-then-approx",
                   choices=["table", "approx", "table-then-approx", "simulate"])
    a.add_argument("--bounded", action="store_true",
                   help="clamp the completion to [1/9, 9] before measuring CI")

    w = sub.add_parser("weights", help="derive a weight vector")
    w.add_argument("input")
    w.add_argument("--method", required=True, choices=["llsm", "em", "harker", "tree-gm"])
    w.add_argument("--gauge", default="sum-one",
                   choices=[g.value for g in Gauge])

    c = sub.add_parser("complete", help="fill the missing comparisons")
    c.add_argument("input")
    c.add_argument("--method", required=True, choices=["llsm", "em", "lex"])
    c.add_argument("--bounds", default=None, metavar="LO:HI",
                   help="clamp interval for the eigenvalue method, e.g. 1/9:9")

    r = sub.add_parser("ri", help="random index lookup / approximation / simulation")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--m", type=int, required=True)
    r.add_argument("--samples", type=int, default=100000)
    r.add_argument("--policy", default="table", choices=["table", "approx", "simulate"])
    r.add_argument("--pattern", default="uniform-connected", choices=["uniform-connected"])

    g = sub.add_parser("generate", help="build structured matrices")
    gsub = g.add_subparsers(dest="kind", required=True)
    gc = gsub.add_parser("cdag", help="matrix from a connected acyclic digraph")
    gc.add_argument("input", help="JSON {n, arcs, alpha}, '-' for stdin")
    gc.add_argument("--format", default="structured", choices=["structured", "csv"])
    gb = gsub.add_parser("bwm", help="best-worst matrix from 2n-3 judgments")
    gb.add_argument("--best-row", required=True,
                    help="comma list a_12..a_1n (best over the others)")
    gb.add_argument("--others-to-worst", required=True,
                    help="comma list a_2n..a_(n-1)n")
    gb.add_argument("--format", default="structured", choices=["structured", "csv"])
    gr = gsub.add_parser("random", help="random complete 1..9-scale matrix")
    gr.add_argument("--n", type=int, required=True)
    gr.add_argument("--missing", type=int, default=0)
    gr.add_argument("--format", default="structured", choices=["structured", "csv"])

    ing = sub.add_parser("ingest", help="derive matrices from external data")
    isub = ing.add_subparsers(dest="kind", required=True)
    h2h = isub.add_parser("h2h", help="head-to-head win counts (CSV of integers)")
    h2h.add_argument("input")
    h2h.add_argument("--adjustment", default="2", choices=["1", "2"])
    h2h.add_argument("--cap", type=int, default=None,
                     help="exponent cap T: value^( matches/T )")
    h2h.add_argument("--format", default="structured", choices=["structured", "csv"])

    bc = sub.add_parser("bwm-check", help="sufficient no-violation conditions")
    bc.add_argument("input")

    be = sub.add_parser("bwm-enumerate", help="count ordinal violations on the 2..9 grid")
    be.add_argument("--exhaustive", action="store_true")
    be.add_argument("--samples", type=int, default=1000000)

    el = sub.add_parser("elicit", help="interactive questionnaire in the terminal")
    el.add_argument("--n", type=int, required=True)
    el.add_argument("--labels", default=None, help="comma-separated display labels")
    el.add_argument("--policy", default="balanced", choices=["balanced", "ross"])
    el.add_argument("--scale", default="saaty", choices=["saaty", "free"])
    el.add_argument("--bounded", action="store_true")
    el.add_argument("--export", default=None, help="write the session document here")

    ex = sub.add_parser("experiment", help="research harnesses")
    esub = ex.add_subparsers(dest="kind", required=True)
    ep = esub.add_parser("patterns", help="optimal filling-pattern search")
    ep.add_argument("--n", type=int, required=True)
    ep.add_argument("--samples", type=int, default=1000)
    ep.add_argument("--distance", default="euclidean",
                    choices=["euclidean", "chebyshev", "cosine"])

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--addr", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8712)
    sv.add_argument("--store", default="./pcm-sessions")
    sv.add_argument("--cors-origin", default=None)
    sv.add_argument("--static", default=None, help="directory of built web assets")

    rp = sub.add_parser("report", help="render figures and TSV for a session or RI curve")
    rsub = rp.add_subparsers(dest="kind", required=True)
    rs = rsub.add_parser("session", help="chart a session export")
    rs.add_argument("input", help="session document produced by elicit --export")
    rs.add_argument("--out-dir", default="./report")
    rr = rsub.add_parser("ri", help="chart the random index against missing entries")
    rr.add_argument("--n", type=int, required=True)
    rr.add_argument("--simulate-samples", type=int, default=0)
    rr.add_argument("--out-dir", default="./report")
    return p


def _cmd_analyze(args, out) -> int:
    pcm = parse_pcm(_read_input(args.input))
    g = associated_graph(pcm)
    connected = is_connected(g)
    _emit(out, f"n\t{pcm.n}")
    _emit(out, f"known\t{len(pcm.entries)}")
    _emit(out, f"missing\t{pcm.missing_count}")
    _emit(out, "edges\t" + " ".join(f"{i + 1}-{j + 1}" for (i, j) in sorted(g.edges)))
    _emit(out, f"connected\t{'yes' if connected else 'no'}")
    if not connected:
        raise errors.DisconnectedGraph("comparison graph is disconnected")
    if pcm.is_complete():
        profile = triad_profile(pcm)
        _emit(out, "theta\t" + " ".join(_fmt(v) for v in profile.theta))
        lam, _vec = dominant_eigenvalue(pcm.to_array())
        _emit(out, f"lambda_max\t{_fmt(lam)}")
        _emit(out, f"ci\t{_fmt(consistency_index(lam, pcm.n))}")
    policy = {
        "table": RiQueryPolicy.table_only(),
        "approx": RiQueryPolicy.table_then_approx(),
        "table-then-approx": RiQueryPolicy.table_then_approx(),
        "simulate": RiQueryPolicy.simulate_if_missing(seed=args.seed),
    }[args.ri_policy]
    try:
        rep = cr_incomplete(pcm, policy, bounded=args.bounded)
    except (errors.NotInTable, errors.UnknownBaseRi) as exc:
        _emit(out, f"ri\tunavailable\t{type(exc).__name__}")
        _emit(out, "cr\tunavailable")
        return 0
    _emit(out, f"ri\t{_fmt(rep.ri_used)}\t{rep.ri_source}")
    _emit(out, f"cr\t{_fmt(rep.cr)}")
    return 0


def _cmd_weights(args, out) -> int:
    pcm = parse_pcm(_read_input(args.input))
    gauge = _gauge(args.gauge)
    fn = {
        "llsm": llsm_weights,
        "em": em_weights,
        "harker": harker_weights,
        "tree-gm": spanning_tree_gm_weights,
    }[args.method]
    w = fn(pcm, gauge=gauge)
    _emit(out, json.dumps(w.to_dict()))
    return 0


def _cmd_complete(args, out) -> int:
    pcm = parse_pcm(_read_input(args.input))
    bounds = _parse_bounds(args.bounds) if args.bounds else None
    if args.method == "llsm":
        result = llsm_completion(pcm)
    elif args.method == "em":
        result = em_completion(pcm, bounds=bounds)
    else:
        result, _stages = lex_completion(pcm)
    _emit(out, json.dumps(result.to_document(), indent=2))
    return 0


def _cmd_ri(args, out) -> int:
    if args.policy == "table":
        value, source = ri_lookup(args.n, args.m, RiQueryPolicy.table_only())
        mean, stdev = value, None
    elif args.policy == "approx":
        mean, stdev, source = ri_approx(args.n, args.m), None, "approx"
    else:
        mean, stdev = simulate_ri(args.n, args.m, args.samples, args.seed,
                                  MissingPatternPolicy.uniform_connected())
        source = "simulated"
    stdev_txt = "" if stdev is None else _fmt(stdev)
    _emit(out, f"{args.n}\t{args.m}\t{_fmt(mean)}\t{stdev_txt}\t{source}")
    return 0


def _cmd_generate(args, out) -> int:
    from .core import parse_value_token
    if args.kind == "cdag":
        doc = json.loads(_read_input(args.input))
        spec = CdagSpec(n=int(doc["n"]),
                        arcs=tuple((int(i) - 1, int(j) - 1) for (i, j) in doc["arcs"]),
                        alpha=float(doc["alpha"]))
        pcm = cdag_matrix(spec)
    elif args.kind == "bwm":
        def token(x):
            value, frac = parse_value_token(x)
            return frac if frac is not None else value
        best = [token(x) for x in args.best_row.split(",")]
        others = [token(x) for x in args.others_to_worst.split(",")] \
            if args.others_to_worst else []
        pcm = bwm_matrix(len(best) + 1, best, others)
    else:
        import numpy as np
        from .core import SAATY_FRACTIONS, IncompletePcm, Scale
        from .core import connected_edges
        rng = np.random.Generator(np.random.Philox(
            key=np.array([args.seed % 2 ** 64, 0], dtype=np.uint64)))
        n = args.n
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        while True:
            drop = set(map(int, rng.choice(len(pairs), size=args.missing, replace=False))) \
                if args.missing else set()
            keep = [p for k, p in enumerate(pairs) if k not in drop]
            if connected_edges(n, keep):
                break
        entries = {p: SAATY_FRACTIONS[int(rng.integers(0, 17))] for p in keep}
        pcm = IncompletePcm.create(n, entries, Scale.SAATY)
    _emit(out, serialize_pcm(pcm, args.format))
    return 0


def _cmd_ingest(args, out) -> int:
    rows = [[int(x) for x in line.split(",")]
            for line in _read_input(args.input).strip().splitlines()]
    pcm = head_to_head_ingest(rows, Adjustment(args.adjustment), exponent_cap=args.cap)
    _emit(out, serialize_pcm(pcm, args.format))
    return 0


def _cmd_bwm_check(args, out) -> int:
    pcm = parse_pcm(_read_input(args.input))
    rep = bwm_guarantee(pcm)
    _emit(out, f"p\t{_fmt(rep.p)}")
    _emit(out, f"max_pref\t{_fmt(rep.max_pref)}")
    _emit(out, f"best_to_worst\t{_fmt(rep.a_1n)}")
    _emit(out, f"theorem1\t{'holds' if rep.theorem1_holds else 'fails'}")
    _emit(out, f"theorem2\t{'holds' if rep.theorem2_holds else 'fails'}")
    for cond in rep.violated_conditions:
        _emit(out, f"violated\t{cond}")
    _emit(out, f"certified\t{'yes' if rep.certified() else 'no'}")
    return 0


def _cmd_bwm_enumerate(args, out) -> int:
    mode = EnumerationMode.EXHAUSTIVE if args.exhaustive else EnumerationMode.SAMPLED
    total, theorem1, violations = bwm_enumerate_violations(
        mode=mode, sample_count=args.samples, seed=args.seed)
    _emit(out, f"{total} {theorem1} {violations}")
    return 0


def _cmd_elicit(args, out) -> int:
    labels = args.labels.split(",") if args.labels else [str(i + 1) for i in range(args.n)]
    policy = QuestionPolicy.ross_fixture() if args.policy == "ross" else QuestionPolicy.balanced()
    session = create_session(args.n, labels, policy, scale=args.scale, bounded=args.bounded)
    _emit(out, f"session {session.id}: {len(session.order)} comparisons")
    while True:
        nxt = session.next_pair()
        if nxt is None:
            break
        i, j = nxt
        prompt = f"[{len(session.answers) + 1}/{len(session.order)}] " \
                 f"{session.labels[i]} vs {session.labels[j]} (e.g. 3 or 1/5, q to stop): "
        out.write(prompt)
        out.flush()
        line = sys.stdin.readline()
        if not line or line.strip().lower() in ("q", "quit"):
            break
        try:
            value = _parse_number(line)
            session = submit_answer(session, nxt, value)
        except (ValueError, errors.PcmError) as exc:
            _emit(out, f"rejected: {exc}")
            continue
        rec = session.cr_history[-1]
        if rec.connected and rec.cr_generalized is not None:
            flag = "  <-- above 0.1, consider revising" if rec.cr_generalized > 0.1 else ""
            naive = "" if rec.cr_naive is None else f" (naive {rec.cr_naive:.4f})"
            _emit(out, f"CR {rec.cr_generalized:.4f}{naive}{flag}")
        elif rec.connected:
            _emit(out, f"CI {rec.ci:.4f}; no published random index for this size, CR unavailable")
        else:
            _emit(out, "graph not connected yet, no CR")
    doc = export_session(session)
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        _emit(out, f"session written to {args.export}")
    else:
        _emit(out, json.dumps(doc["series"]))
    return 0


def _cmd_experiment(args, out) -> int:
    result = pattern_experiment(args.n, args.samples, seed=args.seed, distance=args.distance)
    for k in sorted(result["per_k"]):
        for row in result["per_k"][k]:
            edges = ";".join(f"{i}-{j}" for (i, j) in row["edges"])
            _emit(out, f"{k}\t{edges}\t{_fmt(row['mean_distance'])}\t{row['rank']}")
    seq = result["sequence"]
    _emit(out, f"# nested sequence threads {seq['optima_threaded']}/{seq['of']} optima")
    for level in seq["levels"]:
        added = "start" if level["added"] is None else f"{level['added'][0]}-{level['added'][1]}"
        _emit(out, f"# k={level['k']} add {added} optimal={'yes' if level['hits_optimum'] else 'no'}")
    return 0


def _cmd_serve(args, out) -> int:
    import uvicorn
    from .service import create_app
    app = create_app(args.store, cors_origin=args.cors_origin, static_dir=args.static)
    uvicorn.run(app, host=args.addr, port=args.port, log_level="warning")
    return 0


def _cmd_report(args, out) -> int:
    from .report import render_cr_history, render_ri_curve, render_weights
    if args.kind == "session":
        doc = json.loads(_read_input(args.input))
        paths = render_cr_history(doc, args.out_dir)
        _emit(out, f"wrote {paths['tsv']}")
        _emit(out, f"wrote {paths['png']}")
        if doc.get("weights"):
            wpaths = render_weights(doc["weights"], doc["labels"], args.out_dir)
            _emit(out, f"wrote {wpaths['tsv']}")
            _emit(out, f"wrote {wpaths['png']}")
    else:
        paths = render_ri_curve(args.n, args.out_dir,
                                simulate_samples=args.simulate_samples, seed=args.seed)
        _emit(out, f"wrote {paths['tsv']}")
        _emit(out, f"wrote {paths['png']}")
    return 0


_HANDLERS = {
    "analyze": _cmd_analyze,
    "weights": _cmd_weights,
    "complete": _cmd_complete,
    "ri": _cmd_ri,
    "generate": _cmd_generate,
    "ingest": _cmd_ingest,
    "bwm-check": _cmd_bwm_check,
    "bwm-enumerate": _cmd_bwm_enumerate,
    "elicit": _cmd_elicit,
    "experiment": _cmd_experiment,
    "serve": _cmd_serve,
    "report": _cmd_report,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if os.environ.get("PCM_SEED"):
        args.seed = int(os.environ["PCM_SEED"])
    try:
        return _HANDLERS[args.command](args, out)
    except errors.PcmError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
