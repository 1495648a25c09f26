"""Request handlers shared by the HTTP routes and the local CLI path."""

from __future__ import annotations

from ..aligner import FrameGeometry
from ..augment import AugPolicyConfig
from ..pipeline import RunConfig, run_align, run_augment, run_score
from .schemas import (
    AlignRequest,
    AlignResponse,
    AugmentRequest,
    AugmentResponse,
    ScoreRequest,
    ScoreResponse,
)


def do_align(req: AlignRequest) -> AlignResponse:
    config = RunConfig(
        geometry=FrameGeometry(
            frame_shift_ms=req.geometry.frame_shift_ms,
            subsample_factor=req.geometry.subsample_factor,
            sample_rate_hz=req.geometry.sample_rate_hz,
        ),
        pad_frames=req.pad_frames,
        paper_literal_backtrack=req.paper_literal_backtrack,
    )
    outcome = run_align(req.manifest, req.posteriors, req.vocab, req.out, config)
    return AlignResponse(
        aligned=outcome.aligned,
        rejected=outcome.rejected,
        out_manifest=outcome.out_manifest,
        rejects_path=outcome.rejects_path,
    )


def do_augment(req: AugmentRequest) -> AugmentResponse:
    config = RunConfig(
        master_seed=req.seed,
        policy=AugPolicyConfig(
            apply_prob=req.apply_prob,
            independent_prob=req.independent_prob,
            augmenter_probs=req.augmenter_probs,
        ),
        shuffle_buffer=req.shuffle_buffer,
        emit_originals=req.emit_originals,
    )
    outcome = run_augment(req.manifest, req.out_dir, config)
    return AugmentResponse(
        entries_in=outcome.entries_in,
        originals=outcome.originals,
        augmented=outcome.augmented,
        out_manifest=outcome.out_manifest,
    )


def do_score(req: ScoreRequest) -> ScoreResponse:
    report = run_score(
        req.ref,
        req.hyp,
        baseline_path=req.baseline,
        bootstrap=req.bootstrap,
        num_replicates=req.num_replicates,
        alpha=req.alpha,
        seed=req.seed,
    )
    return ScoreResponse.model_validate(report)
