"""HTTP service wrapping the simulator: scenario runs, verification, transcripts."""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from . import __version__
from .acceptance import run_all
from .dna import run_protocol, scenario_from_dict
from .errors import ScenarioError, SimError
from .scenarios import SCENARIOS, run_scenario


class ScenarioInfoModel(BaseModel):
    id: str
    summary: str
    parameters: dict[str, Any]


class RunRequest(BaseModel):
    scenario: str
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int | None = None
    sweep: bool = False
    quick: bool = False


class CheckModel(BaseModel):
    name: str
    claim: str
    expected: str
    measured: str
    tolerance: float
    passed: bool


class RunReportModel(BaseModel):
    schema_version: int = Field(alias="schema")
    scenario: str
    parameters: dict[str, Any]
    seed: int | None
    checks: list[CheckModel]
    tables: dict[str, dict[str, str]]
    passed: bool
    wall_time_s: float

    model_config = {"populate_by_name": True}


class VerifyRequest(BaseModel):
    quick: bool = True


class CriterionModel(BaseModel):
    name: str
    passed: bool
    details: list[str]
    seconds: float


class VerifyResponse(BaseModel):
    all_passed: bool
    criteria: list[CriterionModel]


class TranscriptRequest(BaseModel):
    config: dict[str, Any]
    seed: int = 0


def create_app() -> FastAPI:
    app = FastAPI(
        title="railsim",
        version=__version__,
        description="Exact few-photon simulator for switch-free photonic architectures.",
    )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/scenarios", response_model=list[ScenarioInfoModel])
    def scenarios() -> list[ScenarioInfoModel]:
        return [
            ScenarioInfoModel(id=info.id, summary=info.summary, parameters=info.parameters)
            for info in SCENARIOS.values()
        ]

    @app.post("/run", response_model=RunReportModel, response_model_by_alias=True)
    def run(req: RunRequest) -> RunReportModel:
        try:
            report = run_scenario(req.scenario, req.params, req.seed, req.sweep, req.quick)
        except ScenarioError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except SimError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return RunReportModel.model_validate(report.to_json())

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        results = run_all(quick=req.quick)
        return VerifyResponse(
            all_passed=all(r.passed for r in results),
            criteria=[
                CriterionModel(
                    name=r.name, passed=r.passed, details=r.details, seconds=round(r.seconds, 3)
                )
                for r in results
            ],
        )

    @app.post("/transcript", response_class=PlainTextResponse)
    def transcript(req: TranscriptRequest) -> str:
        try:
            scenario = scenario_from_dict(req.config)
            result = run_protocol(scenario, req.seed)
        except SimError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return result.transcript.to_jsonl()

    return app


app = create_app()
