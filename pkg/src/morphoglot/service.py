"""HTTP API for glossing, lexicon mutation, and evaluation.

Routes (JSON over HTTP/1.1, UTF-8): POST /gloss, GET /lexicon,
POST /lexicon, POST /evaluate, GET /info.  Every response carries the
lexicon version it was computed against.  Lexicon mutations go through a
single-writer lock and bump the version; glossing reads decode against an
immutable snapshot (the lexicon is append-only), so an in-flight request
sees either the pre- or post-mutation lexicon, never a torn state.  The
service never writes checkpoints; training is CLI-only.
"""

from __future__ import annotations

import logging
import threading
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .igt import Morpheme, parse_corpus
from .lexicon import FingerprintMismatchError
from .pipeline import GlossingPipeline

log = logging.getLogger(__name__)


class GlossRequest(BaseModel):
    transcription: str
    translation: Optional[str] = None
    beam_width: Optional[int] = Field(default=None, ge=1, le=64)
    top_k: Optional[int] = Field(default=None, ge=1, le=64)


class AlternativeOut(BaseModel):
    segment: str
    gloss: str
    prob: float


class WordGlossOut(BaseModel):
    surface: str
    segments: list[str]
    glosses: list[str]
    log_prob: float
    is_punctuation: bool
    alternatives: list[list[AlternativeOut]]


class GlossResponse(BaseModel):
    words: list[WordGlossOut]
    lexicon_version: int


class LexiconEntryOut(BaseModel):
    index: int
    segment: str
    gloss: str
    provenance: str


class LexiconResponse(BaseModel):
    entries: list[LexiconEntryOut]
    lexicon_version: int


class AddEntryRequest(BaseModel):
    segment: str
    gloss: str


class AddEntryResponse(BaseModel):
    index: int
    added: bool
    lexicon_version: int


class EvaluateRequest(BaseModel):
    corpus: Optional[str] = None
    path: Optional[str] = None
    lexicon_setting: str = Field(default="train", pattern="^(train|extended|both)$")
    beam_width: Optional[int] = Field(default=None, ge=1, le=64)


class InfoResponse(BaseModel):
    lexicon_version: int
    lexicon_size: int
    embedding_dim: int
    encoder_fingerprint: str
    decoder_fingerprint: str
    beam_width: int
    tau: float
    kappa: float


class GlossingSession:
    """Pipeline plus the reader-writer discipline over its lexicon."""

    def __init__(self, pipeline: GlossingPipeline):
        self.pipeline = pipeline
        self._write_lock = threading.Lock()

    def snapshot(self):
        with self._write_lock:
            return self.pipeline.lexicon.snapshot()

    def add_entry(self, m: Morpheme) -> tuple[int, bool, int]:
        with self._write_lock:
            index, added = self.pipeline.lexicon.add_entry(m, "user", self.pipeline.encoder)
            return index, added, self.pipeline.lexicon.version


def create_app(session: Optional[GlossingSession]) -> FastAPI:
    app = FastAPI(title="morphoglot", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def require_session() -> GlossingSession:
        if session is None:
            raise HTTPException(status_code=503, detail="models are not loaded")
        return session

    @app.post("/gloss", response_model=GlossResponse)
    def gloss(request: GlossRequest) -> GlossResponse:
        live = require_session()
        view = live.snapshot()
        words = live.pipeline.gloss(
            request.transcription,
            request.translation,
            beam_width=request.beam_width,
            top_k=request.top_k,
            lexicon=view,
        )
        return GlossResponse(
            words=[
                WordGlossOut(
                    surface=w.surface,
                    segments=w.segments,
                    glosses=w.glosses,
                    log_prob=w.log_prob,
                    is_punctuation=w.is_punctuation,
                    alternatives=[
                        [AlternativeOut(segment=s, gloss=g, prob=p) for s, g, p in step]
                        for step in w.alternatives
                    ],
                )
                for w in words
            ],
            lexicon_version=view.version,
        )

    @app.get("/lexicon", response_model=LexiconResponse)
    def list_lexicon() -> LexiconResponse:
        live = require_session()
        view = live.snapshot()
        entries = [
            LexiconEntryOut(
                index=entry.row,
                segment=entry.morpheme.segment,
                gloss=entry.morpheme.gloss,
                provenance=entry.provenance,
            )
            for entry in view.entries
            if not entry.is_eos
        ]
        return LexiconResponse(entries=entries, lexicon_version=view.version)

    @app.post("/lexicon", response_model=AddEntryResponse)
    def add_lexicon_entry(request: AddEntryRequest) -> AddEntryResponse:
        live = require_session()
        try:
            morpheme = Morpheme(request.segment, request.gloss)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            index, added, version = live.add_entry(morpheme)
        except FingerprintMismatchError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return AddEntryResponse(index=index, added=added, lexicon_version=version)

    @app.post("/evaluate")
    def evaluate(request: EvaluateRequest) -> dict:
        live = require_session()
        if (request.corpus is None) == (request.path is None):
            raise HTTPException(
                status_code=400, detail="provide exactly one of 'corpus' or 'path'"
            )
        try:
            if request.corpus is not None:
                gold = parse_corpus(request.corpus, strict=True, split="test")
            else:
                with open(request.path, "r", encoding="utf-8") as handle:
                    gold = parse_corpus(handle, strict=True, split="test")
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"corpus error: {exc}") from exc
        if len(gold) == 0:
            raise HTTPException(status_code=400, detail="corpus is empty")
        settings = (
            ("train", "extended")
            if request.lexicon_setting == "both"
            else (request.lexicon_setting,)
        )
        version_before = live.pipeline.lexicon.version
        reports = live.pipeline.evaluate(gold, settings, beam_width=request.beam_width)
        assert live.pipeline.lexicon.version == version_before
        return {
            "reports": {name: report.to_dict() for name, report in reports.items()},
            "lexicon_version": version_before,
        }

    @app.get("/info", response_model=InfoResponse)
    def info() -> InfoResponse:
        live = require_session()
        view = live.snapshot()
        return InfoResponse(
            lexicon_version=view.version,
            lexicon_size=sum(not e.is_eos for e in view.entries),
            embedding_dim=live.pipeline.encoder.embedding_dim,
            encoder_fingerprint=live.pipeline.encoder.fingerprint().hex(),
            decoder_fingerprint=live.pipeline.decoder.fingerprint().hex(),
            beam_width=live.pipeline.beam_width,
            tau=live.pipeline.encoder.tau,
            kappa=live.pipeline.decoder.kappa,
        )

    return app


def serve(pipeline: GlossingPipeline, host: str, port: int) -> None:  # pragma: no cover
    import uvicorn

    app = create_app(GlossingSession(pipeline))
    uvicorn.run(app, host=host, port=port, log_level="info")
