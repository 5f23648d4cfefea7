"""Request/response models for the HTTP surface."""

from __future__ import annotations

from pydantic import BaseModel, Field


class AnalyzeRequest(BaseModel):
    text: str
    explain: bool = False
    json_trace: bool = False


class Reading(BaseModel):
    mr: str
    score: float
    senses: list[str]
    transformations: int
    precedent: bool = False


class AnalyzeResponse(BaseModel):
    readings: list[Reading]
    trace: str | None = None
    trace_events: list[dict] | None = None


class GenerateRequest(BaseModel):
    mr: str
    explain: bool = False
    json_trace: bool = False


class GenerateResponse(BaseModel):
    sentence: str
    trace: str | None = None
    trace_events: list[dict] | None = None


class LearnRequest(BaseModel):
    scenario: str | None = None  # scenario file content
    text: str | None = None  # raw instruction text
    answers: list[str] = Field(default_factory=list)
    explain: bool = False
    json_trace: bool = False


class QA(BaseModel):
    question: str
    answer: str | None


class LearnResponse(BaseModel):
    learned: bool
    name: str | None = None
    script: str | None = None
    questions: list[QA] = Field(default_factory=list)
    open_lacunae: list[str] = Field(default_factory=list)
    describe_back: str | None = None
    modules: dict[str, str] = Field(default_factory=dict)
    difficulty: dict[str, str] = Field(default_factory=dict)
    trace: str | None = None
    trace_events: list[dict] | None = None


class ConsolidateRequest(BaseModel):
    min_count: int = 3


class ConsolidateResponse(BaseModel):
    habits: list[str]


class PlanRequest(BaseModel):
    script: str
    collaborator: str | None = None
    context: list[str] = Field(default_factory=list)


class PlanResponse(BaseModel):
    script: str
    steps: list[str]
    provenance: str


class ValidateResponse(BaseModel):
    issues: list[str]


class PrecedentRequest(BaseModel):
    text: str
    reading: int = 0


class PrecedentResponse(BaseModel):
    key: str
    senses: list[str]


class MemoryResponse(BaseModel):
    text: str


class HealthResponse(BaseModel):
    status: str
    concepts: int
    senses: int
    shapes: int
    scripts: int
