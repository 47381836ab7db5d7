"""HTTP surface over the platform: submissions, leaderboards, annotation."""

from __future__ import annotations

from pathlib import Path
from typing import Union

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    AuthorizationError,
    ConfigError,
    CrowdboardError,
    DomainError,
    NotFoundError,
    PlanningError,
    PredictionParseError,
    RateLimitedError,
    StaleLeaseError,
)
from .model import AnnotatorProfile
from .pipeline import Platform

_STATUS = {
    NotFoundError: 404,
    DomainError: 400,
    PredictionParseError: 400,
    ConfigError: 400,
    PlanningError: 409,
    AuthorizationError: 403,
    StaleLeaseError: 409,
    RateLimitedError: 429,
}


class SubmitBody(BaseModel):
    submitter: str
    predictions: Union[str, dict[str, str]]


class LabelBody(BaseModel):
    annotator_id: str
    labels: Union[int, dict[str, Union[int, list[int]]]]


class AnnotatorBody(BaseModel):
    annotator_id: str
    locale: str = "US"
    hits_completed: int = 0
    approval_rate: float = 1.0
    passed_qual_tests: list[str] = []


def create_app(platform: Platform, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="crowdboard", docs_url=None, redoc_url=None)

    @app.exception_handler(CrowdboardError)
    async def handle_domain_errors(request: Request, exc: CrowdboardError):
        status = 500
        for klass, code in _STATUS.items():
            if isinstance(exc, klass):
                status = code
                break
        body = {"error": type(exc).__name__, "detail": str(exc)}
        headers = {}
        if isinstance(exc, RateLimitedError):
            headers["Retry-After"] = str(int(exc.retry_after_seconds) + 1)
            body["retry_after_seconds"] = exc.retry_after_seconds
        return JSONResponse(status_code=status, content=body, headers=headers)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "events": platform.state.applied}

    @app.get("/tasks")
    def list_tasks():
        return {
            "tasks": [t.to_dict() for _, t in sorted(platform.state.tasks.items())]
        }

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str):
        return platform.state.task(task_id).to_dict()

    @app.post("/tasks/{task_id}/submissions", status_code=201)
    def submit(task_id: str, body: SubmitBody, response: Response):
        result = platform.submit(task_id, body.submitter, body.predictions)
        if result.status == "rejected":
            response.status_code = 422
        return result.to_dict()

    @app.get("/tasks/{task_id}/leaderboard")
    def leaderboard(task_id: str, sort_aspect: str | None = None):
        return platform.get_leaderboard(task_id, sort_aspect)

    @app.get("/plan-budget")
    def plan(
        cost_per_instance: float,
        target_se: float | None = None,
        budget: float | None = None,
        k: int = 1,
    ):
        from .planner import plan_budget

        return plan_budget(
            cost_per_instance, target_se=target_se, max_cost=budget, k=k
        ).to_dict()

    @app.get("/submissions/{submission_id}")
    def get_submission(submission_id: str):
        return platform.get_submission(submission_id)

    @app.post("/annotators", status_code=201)
    def register_annotator(body: AnnotatorBody):
        profile = AnnotatorProfile(
            annotator_id=body.annotator_id,
            locale=body.locale,
            hits_completed=body.hits_completed,
            approval_rate=body.approval_rate,
            passed_qual_tests=frozenset(body.passed_qual_tests),
        )
        platform.register_annotator(profile)
        return profile.to_dict()

    @app.get("/annotators/{annotator_id}/next")
    def next_assignment(annotator_id: str):
        assignment = platform.assign_next(annotator_id)
        if assignment is None:
            return {"done": True}
        return {"done": False, "assignment": assignment}

    @app.post("/assignments/{assignment_id}/label")
    def record_label(assignment_id: str, body: LabelBody):
        records = platform.record_label(assignment_id, body.labels, body.annotator_id)
        return {"recorded": len(records), "assignment_id": assignment_id}

    @app.post("/pipeline/step")
    def pipeline_step():
        return platform.run_pipeline_step()

    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
