"""Request and response models for the HTTP API.

Bundle files travel as verbatim payload strings (binary parts base64),
so a client that writes them to disk reproduces the exact bytes the
server would have written locally.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

MAX_JOBS = 64


class HealthResponse(BaseModel):
    status: str
    name: str
    version: str


class ValidateRequest(BaseModel):
    scenario: dict


class ValidateResponse(BaseModel):
    valid: bool
    fingerprint: str | None = None
    nodes: int = 0
    edges: int = 0
    subnets: int = 0
    entry_points: list[str] = Field(default_factory=list)
    errors: list[str] = Field(default_factory=list)


class CampaignRequest(BaseModel):
    scenario: dict
    seed: int | None = Field(None, ge=0)
    rounds: int | None = Field(None, ge=1)
    method: str | None = None
    sensors: int | None = Field(None, ge=0)
    funds: str | None = None


class BundlePayload(BaseModel):
    name: str
    manifest_json: str
    rounds_jsonl: str
    labels_csv: str
    alerts_b64: str


class CampaignResponse(BaseModel):
    manifest: dict
    bundle: BundlePayload


class SweepRequest(BaseModel):
    scenario: dict
    sensor_counts: list[int] = Field(min_length=1)
    fund_levels: list[str] = Field(min_length=1)
    seeds: list[int] = Field(min_length=1)
    jobs: int = Field(1, ge=1, le=MAX_JOBS)


class SweepRow(BaseModel):
    sensors: int
    funds: str
    mean_complexity: float
    # undefined with a single seed; NaN crosses JSON as null
    ci_low: float | None
    ci_high: float | None
    seeds: int
    rounds_per_seed: int


class SweepResponse(BaseModel):
    rows: list[SweepRow]
    csv: str


class ComparisonRequest(BaseModel):
    scenario: dict
    seeds: list[int] = Field(min_length=1)
    rounds: int | None = Field(None, ge=1)
    jobs: int = Field(1, ge=1, le=MAX_JOBS)


class ComparisonResponse(BaseModel):
    manifest: dict
    manifest_json: str
    bundles: list[BundlePayload]


class InspectRequest(BaseModel):
    scenario: dict


class CentralityResponse(BaseModel):
    csv: str
    rows: list[dict]


class GraphResponse(BaseModel):
    vertices_csv: str
    arcs_csv: str
    vertex_count: int
    arc_count: int


class ScenarioResponse(BaseModel):
    scenario: dict
    fingerprint: str
