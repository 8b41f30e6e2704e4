"""HTTP surface for the companion workbench UI.

Stateless engine endpoints plus an in-memory session store (named problems and
an append-only history tree).  Responses reuse the CLI's canonical JSON
encoding byte for byte.  Long operations (rere, sequence) run as jobs with a
poll/cancel handle; everything else is synchronous.

Error contract: 400 malformed input, 404 unknown session/ref/job, 409 polling
a cancelled job, 422 failed precondition (named inequality), 503 size cap.
"""

from __future__ import annotations

import re as _regex
import threading
import time
import uuid

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import family as fam
from . import jsonio
from .analysis import (
    randomized_failure_bound,
    relaxes_to,
    verify_speedup_target,
    zero_round_solvable_symmetric,
)
from .core import parse_problem, serialize_problem
from .diagram import build_diagram, diagram_to_dot, right_closed_sets
from .errors import BlowupError, ParseError, PreconditionError
from .cli import _apply_rename
from .roundelim import LiftedProblem, re, rere
from .simtree import (
    check_labeling,
    generate_valid_labeling,
    greedy_kods,
    kods_to_family_labeling,
    plus_to_family_transform,
    proper_edge_coloring,
    random_tree,
)


def _json_response(payload, status: int = 200) -> Response:
    return Response(
        content=jsonio.canonical_dumps(payload),
        status_code=status,
        media_type="application/json",
    )


class ApiError(Exception):
    def __init__(self, status: int, message: str, **extra):
        self.status = status
        self.payload = {"error": message} | extra
        super().__init__(message)


def _problem_from_body(body: dict, key: str = "problem"):
    if "text" in body and key == "problem":
        return parse_problem(body["text"])
    if key not in body:
        raise ApiError(400, f"missing '{key}' (or 'text') in request body")
    try:
        return jsonio.problem_from_json(body[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(400, f"malformed problem: {exc}") from exc


def _params_from_body(body: dict) -> fam.FamilyParams:
    try:
        return fam.FamilyParams(int(body["delta"]), int(body["a"]), int(body["x"]))
    except KeyError as exc:
        raise ApiError(400, f"missing parameter {exc}") from exc


class Job:
    def __init__(self):
        self.id = uuid.uuid4().hex
        self.cancel = threading.Event()
        self.status = "running"
        self.result = None
        self.error: str | None = None
        self.started = time.time()
        self.finished: float | None = None


class JobStore:
    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, fn) -> Job:
        job = Job()
        with self._lock:
            self._jobs[job.id] = job

        def run():
            try:
                result = fn(job.cancel)
                job.result = result
                job.status = "cancelled" if job.cancel.is_set() else "done"
            except Exception as exc:  # noqa: BLE001 - job boundary
                if job.cancel.is_set():
                    job.status = "cancelled"
                else:
                    job.status = "failed"
                    job.error = str(exc)
            finally:
                job.finished = time.time()

        threading.Thread(target=run, daemon=True).start()
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self._jobs:
                raise ApiError(404, f"unknown job {job_id}")
            return self._jobs[job_id]


class Session:
    def __init__(self, session_id: str):
        self.id = session_id
        self.lock = threading.Lock()
        self.problems: dict[str, str] = {}  # name -> ref
        self.refs: dict[str, dict] = {}  # ref -> payload (immutable once stored)
        self.nodes: list[dict] = []  # history tree, append-only

    def store(self, payload: dict) -> str:
        ref = f"r{len(self.refs)}"
        self.refs[ref] = payload
        return ref

    def append_node(self, op: str, input_ref: str | None, output_ref: str, parent: int | None) -> dict:
        node = {
            "id": len(self.nodes),
            "parent": parent,
            "op": op,
            "input": input_ref,
            "output": output_ref,
        }
        self.nodes.append(node)
        return node


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self) -> Session:
        session = Session(uuid.uuid4().hex)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise ApiError(404, f"unknown session {session_id}")
            return self._sessions[session_id]

    def restore(self, data: dict) -> Session:
        session = Session(uuid.uuid4().hex)
        session.problems = dict(data.get("problems", {}))
        session.refs = {str(k): v for k, v in data.get("refs", {}).items()}
        session.nodes = list(data.get("history", []))
        with self._lock:
            self._sessions[session.id] = session
        return session


def _lifted_payload(lp: LiftedProblem) -> dict:
    return {"kind": "lifted"} | jsonio.lifted_to_json(lp)


def _problem_payload(p) -> dict:
    return {"kind": "problem"} | jsonio.problem_to_json(p)


def _lifted_from_payload(payload: dict) -> LiftedProblem:
    problem = jsonio.problem_from_json(payload["problem"])
    sets = tuple(sorted((name, frozenset(members)) for name, members in payload["sets"].items()))
    return LiftedProblem(problem, sets, payload["transform"])


_FAMILY_NOTE = _regex.compile(r"family\(delta=(\d+), a=(\d+), x=(\d+)\)")


def _family_params_of(p) -> fam.FamilyParams | None:
    m = _FAMILY_NOTE.search(p.note or "")
    if not m:
        return None
    return fam.FamilyParams(int(m.group(1)), int(m.group(2)), int(m.group(3)))


def _relax_node_line(lp: LiftedProblem, from_line: str, to_line: str) -> LiftedProblem:
    """Replace one plain node configuration by a relaxation of it (slotwise
    superset sets under the dictionary)."""
    from .core import Problem
    from .core import _parse_config  # same grammar as problem files

    sets = lp.dictionary()
    src = _parse_config(from_line, 1)
    dst = _parse_config(to_line, 1)
    if not (src.is_plain() and dst.is_plain()):
        raise ApiError(422, "relax works on plain configuration lines")
    if src not in lp.problem.node_constraint.configs:
        raise ApiError(404, f"configuration '{src.serialize()}' is not a node configuration")
    for cfg in (src, dst):
        unknown = [l for l in cfg.labels() if l not in sets]
        if unknown:
            raise ApiError(422, f"labels outside the set dictionary: {', '.join(unknown)}")

    def as_set_config(cfg):
        slots = []
        for l, m in cfg.counts().items():
            slots.extend([sets[l]] * m)
        return tuple(sorted(slots, key=lambda s: (len(s), tuple(sorted(s)))))

    if relaxes_to(as_set_config(src), as_set_config(dst)) is None:
        raise PreconditionError(
            f"'{dst.serialize()}' is not a relaxation of '{src.serialize()}'",
            inequality="slotwise set inclusion up to permutation",
        )
    nodes = [dst if c == src else c for c in lp.problem.node_constraint.configs]
    problem = Problem.build(
        lp.problem.delta,
        nodes,
        lp.problem.edge_constraint.configs,
        note=f"relax({lp.problem.note})" if lp.problem.note else "relax",
    )
    return LiftedProblem(problem, lp.sets, lp.transform)


def create_app(test_job_delay: float = 0.0, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="round-elimination workbench service", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    jobs = JobStore()
    sessions = SessionStore()

    @app.middleware("http")
    async def timing_header(request: Request, call_next):
        # Timing travels as a header so bodies stay canonical and
        # byte-identical with CLI output.
        started = time.perf_counter()
        response = await call_next(request)
        response.headers["x-compute-ms"] = f"{(time.perf_counter() - started) * 1000:.1f}"
        return response

    @app.exception_handler(ApiError)
    async def api_error_handler(_: Request, exc: ApiError):
        return _json_response(exc.payload, exc.status)

    @app.exception_handler(ParseError)
    async def parse_error_handler(_: Request, exc: ParseError):
        return _json_response(
            {"error": str(exc), "line": exc.line, "column": exc.column}, 400
        )

    @app.exception_handler(PreconditionError)
    async def precondition_handler(_: Request, exc: PreconditionError):
        return _json_response({"error": str(exc), "inequality": exc.inequality}, 422)

    @app.exception_handler(BlowupError)
    async def blowup_handler(_: Request, exc: BlowupError):
        return _json_response({"error": str(exc), "stats": exc.stats}, 503)

    # -- engine endpoints ---------------------------------------------------

    @app.post("/v1/parse")
    async def ep_parse(request: Request):
        body = await request.json()
        if "text" not in body:
            raise ApiError(400, "missing 'text'")
        return _json_response(jsonio.problem_to_json(parse_problem(body["text"])))

    @app.post("/v1/serialize")
    async def ep_serialize(request: Request):
        body = await request.json()
        p = _problem_from_body(body)
        return _json_response({"text": serialize_problem(p)})

    @app.post("/v1/re")
    async def ep_re(request: Request):
        body = await request.json()
        p = _problem_from_body(body)
        lp = re(p, max_labels=int(body.get("max_labels", 10_000)))
        return _json_response(jsonio.lifted_to_json(lp))

    @app.post("/v1/rere")
    async def ep_rere(request: Request):
        body = await request.json()
        p = _problem_from_body(body)
        max_labels = int(body.get("max_labels", 10_000))

        def work(cancel):
            if test_job_delay:
                time.sleep(test_job_delay)
            lp = rere(p, max_labels=max_labels, cancel=cancel)
            return jsonio.lifted_to_json(lp)

        job = jobs.submit(work)
        return _json_response({"job": job.id}, 202)

    @app.get("/v1/jobs/{job_id}")
    async def ep_job(job_id: str):
        job = jobs.get(job_id)
        if job.status == "cancelled":
            return _json_response({"job": job.id, "status": "cancelled"}, 409)
        payload = {"job": job.id, "status": job.status}
        if job.status == "done":
            payload["result"] = job.result
        if job.status == "failed":
            payload["error"] = job.error
        return _json_response(payload)

    @app.delete("/v1/jobs/{job_id}")
    async def ep_cancel(job_id: str):
        job = jobs.get(job_id)
        job.cancel.set()
        if job.status == "running":
            job.status = "cancelled"
        return _json_response({"job": job.id, "status": job.status})

    @app.post("/v1/diagram")
    async def ep_diagram(request: Request):
        body = await request.json()
        p = _problem_from_body(body)
        side = body.get("side", "edge")
        if side not in ("node", "edge"):
            raise ApiError(400, f"side must be 'node' or 'edge', got {side!r}")
        d = build_diagram(p, side)
        return _json_response(jsonio.diagram_to_json(d) | {"dot": diagram_to_dot(d)})

    @app.post("/v1/right-closed-sets")
    async def ep_rcs(request: Request):
        body = await request.json()
        p = _problem_from_body(body)
        side = body.get("side", "edge")
        d = build_diagram(p, side)
        return _json_response({"side": side, "sets": [sorted(s) for s in right_closed_sets(d)]})

    @app.post("/v1/relax-check")
    async def ep_relax(request: Request):
        body = await request.json()
        try:
            c1 = tuple(frozenset(s) for s in body["from"])
            c2 = tuple(frozenset(s) for s in body["to"])
        except (KeyError, TypeError) as exc:
            raise ApiError(400, f"malformed set configurations: {exc}") from exc
        return _json_response(jsonio.relaxation_to_json(relaxes_to(c1, c2)))

    @app.post("/v1/speedup-verify")
    async def ep_speedup(request: Request):
        body = await request.json()
        p = _problem_from_body(body)
        try:
            target = jsonio.set_problem_from_json(body["target"])
        except (KeyError, TypeError) as exc:
            raise ApiError(400, f"malformed target: {exc}") from exc
        return _json_response(jsonio.verdict_to_json(verify_speedup_target(p, target)))

    @app.post("/v1/zero-round")
    async def ep_zero_round(request: Request):
        body = await request.json()
        p = _problem_from_body(body)
        return _json_response(jsonio.verdict_to_json(zero_round_solvable_symmetric(p)))

    @app.post("/v1/failure-bound")
    async def ep_failure_bound(request: Request):
        body = await request.json()
        p = _problem_from_body(body)
        return _json_response(jsonio.bound_to_json(randomized_failure_bound(p)))

    @app.post("/v1/family")
    async def ep_family(request: Request):
        body = await request.json()
        p = fam.make_family_problem(_params_from_body(body))
        return _json_response(jsonio.problem_to_json(p))

    @app.post("/v1/plus")
    async def ep_plus(request: Request):
        body = await request.json()
        p = fam.make_plus_problem(_params_from_body(body))
        return _json_response(jsonio.problem_to_json(p))

    @app.post("/v1/mis")
    async def ep_mis(request: Request):
        body = await request.json()
        p = fam.make_mis_problem(int(body.get("delta", 3)))
        return _json_response(jsonio.problem_to_json(p))

    @app.post("/v1/kods-statement")
    async def ep_kods_statement(request: Request):
        body = await request.json()
        s = fam.kods_problem_statement(int(body["delta"]), int(body["k"]))
        return _json_response(jsonio.kods_statement_to_json(s))

    @app.post("/v1/sequence")
    async def ep_sequence(request: Request):
        body = await request.json()
        delta = int(body["delta"])
        x0 = int(body["x0"])
        epsilon = float(body["epsilon"])
        mechanize = bool(body.get("mechanize", False))

        def work(cancel):
            if test_job_delay:
                time.sleep(test_job_delay)
            cert = fam.build_sequence(delta, x0, epsilon, mechanize=mechanize)
            return jsonio.certificate_to_json(cert)

        job = jobs.submit(work)
        return _json_response({"job": job.id}, 202)

    @app.post("/v1/simulate-kods")
    async def ep_simulate_kods(request: Request):
        body = await request.json()
        n, delta = int(body["n"]), int(body["delta"])
        seed, k, a = int(body.get("seed", 0)), int(body["k"]), int(body.get("a", 0))
        tree = random_tree(n, delta, seed)
        sol = greedy_kods(tree, k)
        labeled = kods_to_family_labeling(tree, sol, a, k)
        verdict = check_labeling(labeled, fam.make_family_problem(fam.FamilyParams(delta, a, k)))
        return _json_response(
            jsonio.verdict_to_json(verdict)
            | {
                "tree": jsonio.tree_to_json(labeled),
                "solution": jsonio.dsolution_to_json(sol),
                "dot": jsonio.tree_to_dot(labeled),
            }
        )

    @app.post("/v1/simulate-transform")
    async def ep_simulate_transform(request: Request):
        body = await request.json()
        n, delta = int(body["n"]), int(body["delta"])
        seed, a, x = int(body.get("seed", 0)), int(body["a"]), int(body["x"])
        tree = proper_edge_coloring(random_tree(n, delta, seed))
        plus = fam.make_plus_problem(fam.FamilyParams(delta, a, x))
        labeled = generate_valid_labeling(tree, plus, seed=seed)
        if labeled is None:
            raise ApiError(422, "no valid labeling of the extended problem exists on this tree")
        out = plus_to_family_transform(labeled, a, x)
        stepped = fam.FamilyParams(delta, (a - 2 * x - 1) // 2, x + 1)
        verdict = check_labeling(out, fam.make_family_problem(stepped))
        return _json_response(
            jsonio.verdict_to_json(verdict)
            | {"tree": jsonio.tree_to_json(out), "dot": jsonio.tree_to_dot(out)}
        )

    @app.post("/v1/simulate-check")
    async def ep_simulate_check(request: Request):
        body = await request.json()
        tree = jsonio.tree_from_json(body["tree"])
        p = _problem_from_body(body)
        return _json_response(jsonio.verdict_to_json(check_labeling(tree, p)))

    # -- sessions -----------------------------------------------------------

    @app.post("/v1/sessions")
    async def ep_session_create():
        session = sessions.create()
        return _json_response({"id": session.id})

    @app.get("/v1/sessions/{session_id}")
    async def ep_session_info(session_id: str):
        session = sessions.get(session_id)
        with session.lock:
            return _json_response(
                {"id": session.id, "problems": session.problems, "nodes": len(session.nodes)}
            )

    @app.post("/v1/sessions/{session_id}/problems")
    async def ep_session_add(session_id: str, request: Request):
        session = sessions.get(session_id)
        body = await request.json()
        name = body.get("name", "problem")
        p = _problem_from_body(body)
        with session.lock:
            ref = session.store(_problem_payload(p))
            session.problems[name] = ref
            node = session.append_node("load", None, ref, body.get("parent"))
        return _json_response({"ref": ref, "node": node})

    @app.get("/v1/sessions/{session_id}/refs/{ref}")
    async def ep_session_ref(session_id: str, ref: str):
        session = sessions.get(session_id)
        with session.lock:
            if ref not in session.refs:
                raise ApiError(404, f"unknown ref {ref}")
            return _json_response(session.refs[ref])

    @app.get("/v1/sessions/{session_id}/history")
    async def ep_session_history(session_id: str):
        session = sessions.get(session_id)
        with session.lock:
            return _json_response({"nodes": session.nodes})

    @app.post("/v1/sessions/{session_id}/apply")
    async def ep_session_apply(session_id: str, request: Request):
        session = sessions.get(session_id)
        body = await request.json()
        op = body.get("op")
        input_ref = body.get("input")
        parent = body.get("parent")
        with session.lock:
            if input_ref not in session.refs:
                raise ApiError(404, f"unknown ref {input_ref}")
            payload = session.refs[input_ref]

        def problem_of(data: dict):
            return jsonio.problem_from_json(data["problem"] if data.get("kind") == "lifted" else data)

        if op == "re":
            out = _lifted_payload(re(problem_of(payload)))
        elif op == "rere":
            out = _lifted_payload(rere(problem_of(payload)))
        elif op == "diagram":
            side = body.get("side", "edge")
            d = build_diagram(problem_of(payload), side)
            out = {"kind": "diagram"} | jsonio.diagram_to_json(d) | {"dot": diagram_to_dot(d)}
        elif op == "rename":
            if payload.get("kind") != "lifted":
                raise ApiError(422, "rename requires a transformed problem with a set dictionary")
            table = body.get("table", {})
            out = _lifted_payload(_apply_rename(_lifted_from_payload(payload), table))
        elif op == "zero-round":
            out = {"kind": "verdict"} | jsonio.verdict_to_json(
                zero_round_solvable_symmetric(problem_of(payload))
            )
        elif op == "weaken":
            # Parameter-monotone weakening of a stored family problem.
            p = problem_of(payload)
            source = _family_params_of(p)
            if source is None:
                raise ApiError(422, "weaken requires a family problem (parameters in its note)")
            target = fam.FamilyParams(source.delta, int(body["a"]), int(body["x"]))
            if target.a > source.a or target.x < source.x:
                raise PreconditionError(
                    f"(a={target.a}, x={target.x}) does not weaken (a={source.a}, x={source.x})",
                    inequality="a <= a' and x >= x'",
                )
            out = _problem_payload(fam.make_family_problem(target))
        elif op == "relax":
            if payload.get("kind") != "lifted":
                raise ApiError(422, "relax requires a transformed problem with a set dictionary")
            out = _lifted_payload(
                _relax_node_line(_lifted_from_payload(payload), body.get("from", ""), body.get("to", ""))
            )
        else:
            raise ApiError(400, f"unknown operation {op!r}")
        with session.lock:
            ref = session.store(out)
            node = session.append_node(op, input_ref, ref, parent)
        return _json_response({"ref": ref, "node": node})

    @app.get("/v1/sessions/{session_id}/export")
    async def ep_session_export(session_id: str):
        session = sessions.get(session_id)
        with session.lock:
            return _json_response(
                {
                    "problems": session.problems,
                    "refs": session.refs,
                    "history": session.nodes,
                }
            )

    @app.post("/v1/sessions/import")
    async def ep_session_import(request: Request):
        body = await request.json()
        session = sessions.restore(body)
        return _json_response({"id": session.id})

    return app


app = create_app()
