"""FastAPI service wrapping one agent instance.

The agent is stateful (episodic memory accumulates across requests), so a
running service behaves like one long-lived collaborator-facing agent.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..agent import Agent
from ..kr import KBError
from ..learner import Scenario
from ..parser import ParseFailure
from ..semantics import AnalysisRejected
from ..generator import NoShapeFits
from . import schemas


def create_app(kb_dir=None, memory_path=None) -> FastAPI:
    try:
        agent = Agent(kb_dir=kb_dir, memory_path=memory_path)
    except (KBError, OSError) as err:
        raise RuntimeError(f"cannot load knowledge bases: {err}") from err

    app = FastAPI(title="framesem", version="0.1.0")
    app.state.agent = agent

    def trace_fields(trace, explain, json_trace):
        text = trace.render_text() if explain else None
        events = [e.as_dict() for e in trace.events] if explain and json_trace else None
        return text, events

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(
            status="ok",
            concepts=len(agent.ontology),
            senses=len(agent.lexicon),
            shapes=len(agent.shapes.shapes),
            scripts=len(agent.scripts),
        )

    @app.post("/analyze", response_model=schemas.AnalyzeResponse)
    def analyze(req: schemas.AnalyzeRequest):
        try:
            readings, trace = agent.analyze(req.text, explain=req.explain)
        except (ParseFailure, AnalysisRejected) as err:
            raise HTTPException(status_code=422, detail=str(err))
        text, events = trace_fields(trace, req.explain, req.json_trace)
        return schemas.AnalyzeResponse(
            readings=[
                schemas.Reading(
                    mr=mr.serialize(),
                    score=mr.score,
                    senses=list(mr.sense_ids),
                    transformations=mr.transformations,
                    precedent=mr.precedent,
                )
                for mr in readings
            ],
            trace=text,
            trace_events=events,
        )

    @app.post("/generate", response_model=schemas.GenerateResponse)
    def generate(req: schemas.GenerateRequest):
        try:
            sentence, trace = agent.generate_text(req.mr, explain=req.explain)
        except NoShapeFits as err:
            raise HTTPException(status_code=422, detail=str(err))
        except KBError as err:
            raise HTTPException(status_code=400, detail=str(err))
        text, events = trace_fields(trace, req.explain, req.json_trace)
        return schemas.GenerateResponse(sentence=sentence, trace=text, trace_events=events)

    @app.post("/learn", response_model=schemas.LearnResponse)
    def learn(req: schemas.LearnRequest):
        try:
            if req.scenario:
                scenario = Scenario.from_text(req.scenario)
            elif req.text:
                scenario = Scenario("adhoc", req.text, list(req.answers), [], {})
            else:
                raise HTTPException(status_code=400, detail="scenario or text required")
            result, trace = agent.learn_scenario(scenario, explain=req.explain)
        except KBError as err:
            raise HTTPException(status_code=400, detail=str(err))
        text, events = trace_fields(trace, req.explain, req.json_trace)
        return schemas.LearnResponse(
            learned=result.learned,
            name=result.script.name if result.script else None,
            script=result.script.serialize() if result.script else None,
            questions=[schemas.QA(question=q, answer=a) for q, a in result.questions],
            open_lacunae=[
                l.kind if hasattr(l, "kind") else str(l) for l in result.open_lacunae
            ],
            describe_back=result.describe_back,
            modules=dict(result.trace.status),
            difficulty=dict(result.trace.difficulty),
            trace=text,
            trace_events=events,
        )

    @app.post("/consolidate", response_model=schemas.ConsolidateResponse)
    def consolidate(req: schemas.ConsolidateRequest):
        habits = agent.consolidate(min_count=req.min_count)
        from ..kr import serialize_frame

        return schemas.ConsolidateResponse(
            habits=[serialize_frame(h.to_frame(i + 1)) for i, h in enumerate(habits)]
        )

    @app.post("/plan", response_model=schemas.PlanResponse)
    def plan(req: schemas.PlanRequest):
        try:
            result = agent.plan(req.script, req.collaborator, tuple(req.context))
        except KBError as err:
            raise HTTPException(status_code=422, detail=str(err))
        return schemas.PlanResponse(
            script=result.script,
            steps=[str(s) for s in result.steps],
            provenance=result.provenance,
        )

    @app.get("/validate", response_model=schemas.ValidateResponse)
    def validate():
        return schemas.ValidateResponse(issues=agent.validate())

    @app.post("/precedents", response_model=schemas.PrecedentResponse)
    def precedents(req: schemas.PrecedentRequest):
        try:
            key, chosen = agent.record_precedent(req.text, req.reading)
        except (ParseFailure, AnalysisRejected, KBError) as err:
            raise HTTPException(status_code=422, detail=str(err))
        return schemas.PrecedentResponse(key=key, senses=list(chosen.sense_ids))

    @app.delete("/precedents")
    def clear_precedents():
        agent.memory.clear_precedents()
        return {"cleared": True}

    @app.get("/memory", response_model=schemas.MemoryResponse)
    def memory():
        return schemas.MemoryResponse(text=agent.memory.serialize())

    return app
