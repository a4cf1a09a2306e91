"""JSON-over-HTTP service backing the interactive what-if client.

Evaluation is synchronous; optimization runs as background jobs polled by id.
All read paths serve immutable state, so concurrent requests are safe; the
job registry is the only synchronized mutable structure.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .catalog import FactorCatalog
from .dataset import DescriptiveRow
from .errors import FactorPlanError
from .models import AggregatedScorer
from .optimize import Allocation, GAParams, Scope, normalized_cost, run_ga

log = logging.getLogger(__name__)

API_PREFIX = "/api"


class ApiError(Exception):
    def __init__(self, status: int, message: str, field_name: str | None = None):
        super().__init__(message)
        self.status = status
        self.field = field_name

    def payload(self) -> dict:
        err: dict = {"message": str(self)}
        if self.field:
            err["field"] = self.field
        return {"error": err}


@dataclass
class Job:
    id: str
    status: str = "running"  # running | done | failed
    trajectory: list[float] = field(default_factory=list)
    result: dict | None = None
    error: str | None = None


class JobRegistry:
    """Bounded pool of optimization jobs; completed jobs stay queryable."""

    def __init__(self, max_active: int = 1):
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}
        self._active = 0
        self._counter = 0
        self._max_active = max_active
        self._executor = ThreadPoolExecutor(max_workers=max_active)

    def submit(self, runner) -> Job:
        """Start ``runner(job)`` on the pool, or raise 409 when full."""
        with self._lock:
            if self._active >= self._max_active:
                raise ApiError(409, "optimization job limit reached; retry later")
            self._counter += 1
            job = Job(id=f"job-{self._counter}")
            self._jobs[job.id] = job
            self._active += 1

        def wrapped():
            try:
                runner(job)
                with self._lock:
                    job.status = "done"
            except Exception as exc:  # surfaced through the job record
                log.exception("optimization job %s failed", job.id)
                with self._lock:
                    job.status = "failed"
                    job.error = str(exc)
            finally:
                with self._lock:
                    self._active -= 1

        self._executor.submit(wrapped)
        return job

    def snapshot(self, job_id: str) -> dict:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise ApiError(404, f"unknown job {job_id!r}")
            return {
                "id": job.id,
                "status": job.status,
                "trajectory": list(job.trajectory),
                "result": job.result,
                "error": job.error,
            }

    def append_point(self, job: Job, value: float) -> None:
        with self._lock:
            job.trajectory.append(value)

    def set_result(self, job: Job, result: dict) -> None:
        with self._lock:
            job.result = result

    def shutdown(self) -> None:
        self._executor.shutdown(wait=False, cancel_futures=True)


@dataclass(frozen=True)
class ServiceState:
    catalog: FactorCatalog
    scorer: AggregatedScorer
    baseline: Allocation
    descriptives: tuple[DescriptiveRow, ...]
    jobs: JobRegistry


def _require_levels(raw, catalog: FactorCatalog, field_name: str) -> Allocation:
    if not isinstance(raw, dict):
        raise ApiError(400, f"{field_name} must be an object of factor levels", field_name)
    known = set(catalog.factor_ids)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ApiError(400, f"unknown factor ids {unknown}", field_name)
    levels: Allocation = {}
    for fid, value in raw.items():
        if not isinstance(value, int) or isinstance(value, bool) or not (1 <= value <= 9):
            raise ApiError(
                400, f"level must be an integer in 1..9, got {value!r}", f"{field_name}.{fid}"
            )
        levels[fid] = value
    return levels


def _full_allocation(raw, catalog: FactorCatalog) -> Allocation:
    levels = _require_levels(raw, catalog, "allocation")
    missing = [fid for fid in catalog.factor_ids if fid not in levels]
    if missing:
        raise ApiError(400, f"allocation missing factors {missing}", "allocation")
    return {fid: levels[fid] for fid in catalog.factor_ids}


def _scope_ids(raw, catalog: FactorCatalog) -> tuple[str, ...]:
    if raw is None:
        return catalog.factor_ids
    if not isinstance(raw, list) or not raw:
        raise ApiError(400, "scope must be a non-empty list of factor ids", "scope")
    known = set(catalog.factor_ids)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ApiError(400, f"unknown factor ids in scope {unknown}", "scope")
    if len(set(raw)) != len(raw):
        raise ApiError(400, "scope lists a factor twice", "scope")
    return tuple(fid for fid in catalog.factor_ids if fid in set(raw))


def evaluate_payload(state: ServiceState, body: dict) -> dict:
    """Score a full allocation; cost spans the optional scope only."""
    allocation = _full_allocation(body.get("allocation"), state.catalog)
    scope_ids = _scope_ids(body.get("scope"), state.catalog)
    context = {fid: allocation[fid] for fid in state.catalog.factor_ids if fid not in scope_ids}
    scope = Scope(catalog=state.catalog, optimized=scope_ids, context=context)

    vector = [allocation[fid] for fid in state.catalog.factor_ids]
    p_nb, p_lr, p_agg = state.scorer.score_components(vector)
    cost = sum(allocation[fid] for fid in scope_ids)
    c_norm = normalized_cost(cost, scope)
    return {
        "p_nb": p_nb,
        "p_lr": p_lr,
        "p_agg": p_agg,
        "cost": cost,
        "c_norm": c_norm,
        "fitness": p_agg - c_norm,
    }


def _ga_params(body: dict) -> GAParams:
    seed = body.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ApiError(400, "seed is required and must be an integer", "seed")
    raw = body.get("params") or {}
    if not isinstance(raw, dict):
        raise ApiError(400, "params must be an object", "params")
    allowed = {"population", "generations", "crossover", "mutation", "tournament", "elites"}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ApiError(400, f"unknown GA params {unknown}", "params")
    try:
        return GAParams(seed=seed, **raw)
    except FactorPlanError as exc:
        raise ApiError(400, str(exc), "params") from exc


def submit_optimize(state: ServiceState, body: dict) -> dict:
    scope_ids = _scope_ids(body.get("scope"), state.catalog)
    params = _ga_params(body)

    context = {fid: state.baseline[fid] for fid in state.catalog.factor_ids if fid not in scope_ids}
    if body.get("context") is not None:
        overrides = _require_levels(body["context"], state.catalog, "context")
        bad = sorted(set(overrides) & set(scope_ids))
        if bad:
            raise ApiError(400, f"context overlaps scope factors {bad}", "context")
        context.update(overrides)
    scope = Scope(catalog=state.catalog, optimized=scope_ids, context=context)
    baseline = {fid: state.baseline[fid] for fid in scope_ids}

    def runner(job: Job):
        result = run_ga(
            state.scorer,
            scope,
            params,
            baseline=baseline,
            on_generation=lambda _gen, best: state.jobs.append_point(job, best),
        )
        state.jobs.set_result(
            job,
            {
                "best": result.best,
                "best_report": {
                    "probability": result.best_report.probability,
                    "cost": result.best_report.cost,
                    "norm_cost": result.best_report.norm_cost,
                    "fitness": result.best_report.fitness,
                },
                "baseline_report": {
                    "probability": result.baseline_report.probability,
                    "cost": result.baseline_report.cost,
                    "norm_cost": result.baseline_report.norm_cost,
                    "fitness": result.baseline_report.fitness,
                },
                "delta_fitness": result.delta_fitness,
                "scope": list(scope.optimized),
                "context": dict(scope.context),
                "seed": params.seed,
            },
        )

    job = state.jobs.submit(runner)
    return {"job_id": job.id}


def catalog_payload(state: ServiceState) -> dict:
    return {
        "factors": [
            {"id": f.id, "name": f.name, "kind": f.kind, "category": f.category_id}
            for f in state.catalog.factors
        ],
        "categories": [
            {"id": c.id, "name": c.name, "side": c.side} for c in state.catalog.categories
        ],
        "baseline": dict(state.baseline),
    }


def descriptives_payload(state: ServiceState) -> dict:
    return {
        "rows": [
            {
                "factor_id": row.factor_id,
                "name": state.catalog.factor(row.factor_id).name,
                "kind": state.catalog.factor(row.factor_id).kind,
                "mean": row.mean,
                "sd": row.sd,
                "n": row.n,
            }
            for row in state.descriptives
        ]
    }


def make_handler(state: ServiceState):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # route access noise to logging
            log.debug("%s - %s", self.address_string(), fmt % args)

        def _send(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _read_json(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                raise ApiError(400, "request body required")
            try:
                body = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise ApiError(400, f"invalid JSON body: {exc}") from exc
            if not isinstance(body, dict):
                raise ApiError(400, "request body must be a JSON object")
            return body

        def _dispatch(self, method: str) -> None:
            path = self.path.split("?", 1)[0].rstrip("/")
            try:
                if method == "GET" and path == f"{API_PREFIX}/catalog":
                    self._send(200, catalog_payload(state))
                elif method == "GET" and path == f"{API_PREFIX}/descriptives":
                    self._send(200, descriptives_payload(state))
                elif method == "GET" and path.startswith(f"{API_PREFIX}/optimize/"):
                    job_id = path.rsplit("/", 1)[1]
                    self._send(200, state.jobs.snapshot(job_id))
                elif method == "POST" and path == f"{API_PREFIX}/evaluate":
                    self._send(200, evaluate_payload(state, self._read_json()))
                elif method == "POST" and path == f"{API_PREFIX}/optimize":
                    self._send(202, submit_optimize(state, self._read_json()))
                else:
                    raise ApiError(404, f"no route for {method} {path}")
            except ApiError as exc:
                self._send(exc.status, exc.payload())
            except FactorPlanError as exc:
                self._send(400, ApiError(400, str(exc)).payload())

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

    return Handler


def create_server(state: ServiceState, host: str = "127.0.0.1", port: int = 8000) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), make_handler(state))
