"""HTTP/JSON facade over sessions and analysis.

Sessions persist as one directory per id: a metadata file plus an
append-only answer log; every mutation is replayable, so a crash between
requests loses nothing. Snapshots are written with atomic renames.
"""

from __future__ import annotations

import json
import os
import threading
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import errors
from .core import parse_pcm
from .elicitation import (
    QuestionPolicy,
    Session,
    create_session,
    export_session,
    session_report,
    submit_answer,
)
from .inconsistency import RiPolicyKind, RiQueryPolicy, cr_incomplete, ri_lookup
from .lexico import lex_completion
from .structures import ordinal_violations
from .weighting import em_completion, em_weights, harker_weights, llsm_completion, llsm_weights

DOMAIN_422 = (
    errors.DisconnectedGraph, errors.MatrixIncomplete, errors.BadDimension,
    errors.ReciprocityViolation, errors.AsymmetricMissing, errors.NonPositiveEntry,
    errors.ScaleViolation, errors.OutOfRange, errors.NotInTable, errors.UnknownBaseRi,
    errors.BadLabels, errors.PolicyArityMismatch, errors.NoConvergence,
    errors.LpNumericalFailure, errors.NotIndependent, errors.BadValue,
    errors.InvalidSamples, errors.PatternDisconnected,
)
CONFLICT_409 = (errors.WrongPair, errors.SessionClosed)


class SessionStore:
    """Directory-backed map id -> session with a write-ahead answer log."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _dir(self, session_id: str) -> str:
        safe = "".join(c for c in session_id if c.isalnum() or c in "-_")
        return os.path.join(self.root, safe)

    def exists(self, session_id: str) -> bool:
        return os.path.isfile(os.path.join(self._dir(session_id), "meta.json"))

    def create(self, session: Session) -> None:
        d = self._dir(session.id)
        os.makedirs(d, exist_ok=True)
        meta = {
            "id": session.id,
            "n": session.n,
            "labels": list(session.labels),
            "order": [[i, j] for (i, j) in session.order],
            "scale": session.scale.value,
            "bounded": session.bounded,
        }
        self._atomic_write(os.path.join(d, "meta.json"), json.dumps(meta))
        open(os.path.join(d, "answers.log"), "a", encoding="utf-8").close()

    def append_answer(self, session_id: str, i: int, j: int, value: float, ts: float) -> None:
        path = os.path.join(self._dir(session_id), "answers.log")
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"i": i, "j": j, "value": value, "ts": ts}) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def snapshot(self, session: Session) -> None:
        d = self._dir(session.id)
        self._atomic_write(os.path.join(d, "snapshot.json"), json.dumps(export_session(session)))

    def load(self, session_id: str) -> Session:
        d = self._dir(session_id)
        with open(os.path.join(d, "meta.json"), encoding="utf-8") as fh:
            meta = json.load(fh)
        session = create_session(
            meta["n"], meta["labels"],
            QuestionPolicy.fixed([tuple(p) for p in meta["order"]]),
            scale=meta.get("scale", "free"), bounded=meta.get("bounded", False),
            session_id=meta["id"],
        )
        log = os.path.join(d, "answers.log")
        if os.path.isfile(log):
            with open(log, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    session = submit_answer(session, (rec["i"], rec["j"]), rec["value"],
                                            timestamp=rec["ts"])
        return session

    @staticmethod
    def _atomic_write(path: str, payload: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)


def _matrix_from_body(body: dict):
    matrix = body.get("matrix")
    if matrix is None:
        raise errors.BadDimension("request body needs a 'matrix' field")
    if isinstance(matrix, str):
        return parse_pcm(matrix)
    return parse_pcm(json.dumps(matrix))


def _policy_from_name(name: str, samples: int, seed: int) -> RiQueryPolicy:
    name = (name or "table-then-approx").lower()
    aliases = {
        "table": RiPolicyKind.TABLE_ONLY,
        "table-only": RiPolicyKind.TABLE_ONLY,
        "approx": RiPolicyKind.TABLE_THEN_APPROX,
        "table-then-approx": RiPolicyKind.TABLE_THEN_APPROX,
        "simulate": RiPolicyKind.SIMULATE_IF_MISSING,
    }
    if name not in aliases:
        raise errors.OutOfRange(f"unknown ri policy {name!r}")
    return RiQueryPolicy(aliases[name], samples, seed)


def create_app(store_dir: str, cors_origin: Optional[str] = None,
               static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="pcmkit", version="0.1.0")
    store = SessionStore(store_dir)

    if cors_origin:
        app.add_middleware(
            CORSMiddleware, allow_origins=[cors_origin],
            allow_methods=["*"], allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "MalformedRequest",
                                                      "detail": str(exc)})

    @app.exception_handler(json.JSONDecodeError)
    async def bad_json(request: Request, exc: json.JSONDecodeError):
        return JSONResponse(status_code=400, content={"error": "MalformedRequest",
                                                      "detail": str(exc)})

    @app.exception_handler(errors.PcmError)
    async def domain(request: Request, exc: errors.PcmError):
        name = type(exc).__name__
        if isinstance(exc, CONFLICT_409):
            return JSONResponse(status_code=409, content={"error": name, "detail": str(exc)})
        status = 422 if isinstance(exc, DOMAIN_422) else 422
        return JSONResponse(status_code=status, content={"error": name, "detail": str(exc)})

    async def _body(request: Request) -> dict:
        if "application/json" not in (request.headers.get("content-type") or ""):
            raise RequestValidationError([{"msg": "content type must be application/json"}])
        raw = await request.body()
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise RequestValidationError([{"msg": f"invalid JSON: {exc}"}])
        if not isinstance(body, dict):
            raise RequestValidationError([{"msg": "body must be a JSON object"}])
        return body

    @app.post("/v1/sessions")
    async def post_session(request: Request):
        body = await _body(request)
        n = body.get("n")
        labels = body.get("labels") or [str(i + 1) for i in range(n or 0)]
        policy_name = (body.get("policy") or "balanced").lower()
        if policy_name in ("ross", "ross-fixture"):
            policy = QuestionPolicy.ross_fixture()
        elif policy_name in ("balanced",):
            policy = QuestionPolicy.balanced()
        elif policy_name in ("fixed", "fixed-order"):
            pairs = [(int(i) - 1, int(j) - 1) for (i, j) in body.get("order", [])]
            policy = QuestionPolicy.fixed(pairs)
        else:
            raise errors.PolicyArityMismatch(f"unknown policy {policy_name!r}")
        if not isinstance(n, int):
            raise RequestValidationError([{"msg": "'n' must be an integer"}])
        session = create_session(n, labels, policy,
                                 scale=body.get("scale", "free"),
                                 bounded=bool(body.get("bounded", False)))
        store.create(session)
        store.snapshot(session)
        return {"id": session.id,
                "order": [[i + 1, j + 1] for (i, j) in session.order],
                "labels": list(session.labels)}

    def _load_or_404(session_id: str) -> Session:
        if not store.exists(session_id):
            raise _NotFound(session_id)
        return store.load(session_id)

    class _NotFound(Exception):
        def __init__(self, sid):
            self.sid = sid

    @app.exception_handler(_NotFound)
    async def not_found(request: Request, exc: _NotFound):
        return JSONResponse(status_code=404, content={"error": "UnknownSession",
                                                      "detail": exc.sid})

    @app.get("/v1/sessions/{session_id}/next")
    async def get_next(session_id: str):
        session = _load_or_404(session_id)
        nxt = session.next_pair()
        if nxt is None:
            return {"done": True}
        return {"pair": [nxt[0] + 1, nxt[1] + 1],
                "labels": [session.labels[nxt[0]], session.labels[nxt[1]]],
                "answered": len(session.answers),
                "total": len(session.order)}

    @app.post("/v1/sessions/{session_id}/answers")
    async def post_answer(session_id: str, request: Request):
        body = await _body(request)
        try:
            i, j = int(body["i"]) - 1, int(body["j"]) - 1
            value = float(body["value"])
        except (KeyError, TypeError, ValueError):
            raise RequestValidationError([{"msg": "need integer i, j and numeric value"}])
        with store.lock(session_id):
            session = _load_or_404(session_id)
            for pos, (pair, past_value, _ts) in enumerate(session.answers):
                if pair == (i, j):
                    if abs(past_value - value) <= 1e-12 * max(1.0, abs(past_value)):
                        record = session.cr_history[pos]
                        return _answer_payload(session, record, replayed=True)
                    raise errors.WrongPair(
                        f"pair ({i + 1},{j + 1}) already answered with {past_value}")
            session = submit_answer(session, (i, j), value)
            store.append_answer(session_id, i, j, value, session.answers[-1][2])
            store.snapshot(session)
            record = session.cr_history[-1]
            return _answer_payload(session, record, replayed=False)

    def _answer_payload(session: Session, record, replayed: bool) -> dict:
        payload = record.to_dict()
        payload["replayed"] = replayed
        payload["status"] = session.status.value
        nxt = session.next_pair()
        payload["next"] = None if nxt is None else [nxt[0] + 1, nxt[1] + 1]
        return payload

    @app.get("/v1/sessions/{session_id}/report")
    async def get_report(session_id: str):
        session = _load_or_404(session_id)
        return session_report(session)

    @app.post("/v1/analyze")
    async def post_analyze(request: Request):
        body = await _body(request)
        pcm = _matrix_from_body(body)
        method = (body.get("method") or "llsm").lower()
        policy = _policy_from_name(body.get("ri_policy", "table-then-approx"),
                                   int(body.get("samples", 10000)), int(body.get("seed", 0)))
        report = cr_incomplete(pcm, policy, bounded=bool(body.get("bounded", False)))
        weights = {
            "llsm": llsm_weights, "em": em_weights, "harker": harker_weights,
        }.get(method)
        if weights is None:
            raise errors.OutOfRange(f"unknown weighting method {method!r}")
        w = weights(pcm)
        violations = ordinal_violations(pcm, w, method)
        return {
            "inconsistency": report.to_dict(),
            "weights": w.to_dict(),
            "violations": violations.to_dict(),
        }

    @app.post("/v1/complete")
    async def post_complete(request: Request):
        body = await _body(request)
        pcm = _matrix_from_body(body)
        method = (body.get("method") or "llsm").lower()
        bounds = None
        if body.get("bounds"):
            lo, hi = body["bounds"]
            bounds = (float(lo), float(hi))
        if method == "llsm":
            result = llsm_completion(pcm)
        elif method == "em":
            result = em_completion(pcm, bounds=bounds)
        elif method == "lex":
            result, _stages = lex_completion(pcm)
        else:
            raise errors.OutOfRange(f"unknown completion method {method!r}")
        return result.to_document()

    @app.get("/v1/ri")
    async def get_ri(n: int, m: int, policy: str = "table-then-approx",
                     samples: int = 10000, seed: int = 0):
        value, source = ri_lookup(n, m, _policy_from_name(policy, samples, seed))
        return {"value": value, "source": source}

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
