"""Pydantic request/response models for the service endpoints."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class GeometryParams(BaseModel):
    frame_shift_ms: float = 10.0
    subsample_factor: int = 4
    sample_rate_hz: int = 16000


class AlignRequest(BaseModel):
    manifest: str
    posteriors: str
    vocab: str
    out: str
    pad_frames: int = 5
    paper_literal_backtrack: bool = False
    geometry: GeometryParams = Field(default_factory=GeometryParams)


class AlignResponse(BaseModel):
    aligned: int
    rejected: int
    out_manifest: str
    rejects_path: str | None = None


class AugmentRequest(BaseModel):
    manifest: str
    out_dir: str
    seed: int = 0
    apply_prob: float = 0.5
    independent_prob: float = 0.75
    augmenter_probs: tuple[float, float, float] = (0.1, 0.6, 0.3)
    shuffle_buffer: int = 64
    emit_originals: bool = True


class AugmentResponse(BaseModel):
    entries_in: int
    originals: int
    augmented: int
    out_manifest: str


class ScoreRequest(BaseModel):
    ref: str
    hyp: str
    baseline: str | None = None
    bootstrap: bool = False
    num_replicates: int = Field(default=5000, alias="B")
    alpha: float = 0.05
    seed: int = 0

    model_config = ConfigDict(populate_by_name=True)


class Interval(BaseModel):
    mean: float
    lower: float
    upper: float
    num_replicates: int
    alpha: float
    frac_below_zero: float
    text: str


class ErrorTotals(BaseModel):
    hits: int
    substitutions: int
    deletions: int
    insertions: int


class BaselineComparison(BaseModel):
    wer: float
    rwerr: float
    rwerr_ci: Interval | None = None


class ScoreResponse(BaseModel):
    num_utterances: int
    ref_words: int
    wer: float
    sub: float
    del_: float = Field(alias="del")
    ins: float
    counts: ErrorTotals
    ci: dict[str, Interval] | None = None
    baseline: BaselineComparison | None = None

    model_config = ConfigDict(populate_by_name=True)
