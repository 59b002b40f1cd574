"""HTTP/JSON service backing the composer UI.

Endpoints: POST /v1/classify, /v1/generate, /v1/check; GET /v1/model.
Schema violations return 400 with the failing field path; musically invalid
requests (empty motifs, bad labels, oversize matrices) return 422; requests
needing the model return 503 until a checkpoint is loaded. The service never
mutates the checkpoint, so concurrent requests are safe.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .notes import EmptyMotifError
from .rules import (
    RepetitionLabel,
    RepetitionType,
    SymmetryKind,
    Transposition,
    classify,
    infer_pair_key,
    parse_type,
)
from .vocab import MAX_ROWS, NUM_ATTRIBUTES, TokenMatrix, VocabularyError, detokenize


@dataclass(frozen=True)
class ServiceConfig:
    bind: str = "127.0.0.1:8571"
    checkpoint: str | None = None
    max_motif_rows: int = MAX_ROWS
    cors_allow_origins: tuple[str, ...] = ()
    request_timeout: float = 30.0

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        from .dataset import _load_config_mapping

        raw = _load_config_mapping(path, set(cls.__dataclass_fields__))
        if "cors_allow_origins" in raw:
            raw["cors_allow_origins"] = tuple(raw["cors_allow_origins"])
        config = cls(**raw)
        return config.with_env_overrides()

    def with_env_overrides(self) -> "ServiceConfig":
        out = self
        if bind := os.environ.get("MOTIFREP_BIND"):
            out = replace(out, bind=bind)
        if ckpt := os.environ.get("MOTIFREP_CHECKPOINT"):
            out = replace(out, checkpoint=ckpt)
        return out

    def with_checkpoint(self, path: str) -> "ServiceConfig":
        return replace(self, checkpoint=path)


class MotifJSON(BaseModel):
    model_config = ConfigDict(extra="forbid")
    valid_len: int = Field(ge=0, le=MAX_ROWS)
    rows: list[list[int]]


class ClassifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    motif_a: MotifJSON
    motif_b: MotifJSON


class GenerateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    motif: MotifJSON
    labels: list[str] = Field(min_length=1)
    t: list[int | None] | None = None
    seed: int = 0
    chaining: bool = True


class CheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    motif: MotifJSON
    candidate: MotifJSON


def _wire_detail(label: RepetitionLabel):
    if isinstance(label.detail, Transposition):
        return {"kind": label.detail.kind, "t": label.detail.offset}
    if isinstance(label.detail, SymmetryKind):
        return label.detail.value
    return None


def _unprocessable(message: str) -> JSONResponse:
    return JSONResponse(status_code=422, content={"detail": message})


def create_app(config: ServiceConfig | None = None, model=None) -> FastAPI:
    """Build the service; loads the configured checkpoint at startup."""
    config = config or ServiceConfig()
    app = FastAPI(title="motifrep", version="1")
    app.state.config = config
    app.state.model = model
    app.state.checkpoint_hash = None

    if config.checkpoint:
        from .model import checkpoint_hash, load_checkpoint

        if not Path(config.checkpoint).exists():
            raise FileNotFoundError(f"checkpoint {config.checkpoint} does not exist")
        app.state.model = load_checkpoint(config.checkpoint)
        app.state.checkpoint_hash = checkpoint_hash(config.checkpoint)

    if config.cors_allow_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_allow_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def enforce_timeout(request: Request, call_next):
        import asyncio

        try:
            return await asyncio.wait_for(
                call_next(request), timeout=config.request_timeout or None
            )
        except asyncio.TimeoutError:
            return JSONResponse(status_code=504, content={"detail": "request timed out"})

    @app.exception_handler(RequestValidationError)
    async def schema_error(request: Request, exc: RequestValidationError):
        errors = [
            {"path": ".".join(str(p) for p in e["loc"]), "message": e["msg"]}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": errors})

    def _motif_from_wire(wire: MotifJSON, name: str) -> TokenMatrix:
        import numpy as np

        rows = np.asarray(wire.rows, dtype=np.int64)
        if rows.shape != (MAX_ROWS, NUM_ATTRIBUTES):
            raise ValueError(
                f"{name}.rows must be {MAX_ROWS}x{NUM_ATTRIBUTES}, got {rows.shape}"
            )
        if wire.valid_len > app.state.config.max_motif_rows:
            raise ValueError(
                f"{name}.valid_len exceeds the service limit "
                f"{app.state.config.max_motif_rows}"
            )
        return TokenMatrix(rows=rows, valid_len=wire.valid_len)

    def _classify_wire(a_wire: MotifJSON, b_wire: MotifJSON, names=("motif_a", "motif_b")):
        a = detokenize(_motif_from_wire(a_wire, names[0]))
        b = detokenize(_motif_from_wire(b_wire, names[1]), bar_index=1)
        label = classify(a, b, infer_pair_key(a, b))
        return {"label": label.variant.value, "detail": _wire_detail(label)}

    @app.post("/v1/classify")
    async def classify_endpoint(req: ClassifyRequest):
        try:
            return _classify_wire(req.motif_a, req.motif_b)
        except (ValueError, EmptyMotifError, VocabularyError) as e:
            return _unprocessable(str(e))

    @app.post("/v1/check")
    async def check_endpoint(req: CheckRequest):
        try:
            return _classify_wire(req.motif, req.candidate, names=("motif", "candidate"))
        except (ValueError, EmptyMotifError, VocabularyError) as e:
            return _unprocessable(str(e))

    @app.post("/v1/generate")
    async def generate_endpoint(req: GenerateRequest):
        from .generate import (
            GenerationRequest,
            generate_piece,
            render_midi_base64,
        )

        try:
            labels = tuple(parse_type(l) for l in req.labels)
            motif = _motif_from_wire(req.motif, "motif")
            request = GenerationRequest(
                motif=motif,
                labels=labels,
                t=tuple(req.t) if req.t is not None else None,
                seed=req.seed,
                chaining=req.chaining,
            )
        except (ValueError, VocabularyError) as e:
            return _unprocessable(str(e))

        needs_model = any(
            l not in (RepetitionType.STRICT, RepetitionType.TRANSPOSITIONAL)
            for l in labels
        )
        if needs_model and app.state.model is None:
            return JSONResponse(
                status_code=503, content={"detail": "model checkpoint not loaded"}
            )
        try:
            piece = generate_piece(request, app.state.model)
        except (ValueError, EmptyMotifError, VocabularyError) as e:
            return _unprocessable(str(e))

        steps = []
        current = piece.motifs[0][0]
        for tm, label in piece.motifs[1:]:
            try:
                verdict = _classify_wire(
                    MotifJSON(valid_len=current.valid_len, rows=current.rows.tolist()),
                    MotifJSON(valid_len=tm.valid_len, rows=tm.rows.tolist()),
                )
            except EmptyMotifError:
                verdict = {"label": RepetitionType.NONE.value, "detail": None}
            steps.append({"requested": label.value, **verdict})
            if request.chaining:
                current = tm
        try:
            midi_b64 = render_midi_base64(piece)
        except ValueError as e:
            return _unprocessable(str(e))
        return {
            "piece": piece.to_json_dict(),
            "labels": steps,
            "midi_base64": midi_b64,
        }

    @app.get("/v1/model")
    async def model_endpoint():
        if app.state.model is None:
            return JSONResponse(
                status_code=503, content={"detail": "model checkpoint not loaded"}
            )
        state = app.state.model
        return {
            "config": state.config.to_json_dict(),
            "variant": state.variant,
            "step": state.step,
            "checkpoint_hash": app.state.checkpoint_hash,
        }

    return app
