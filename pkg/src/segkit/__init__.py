"""segkit: CTC word alignment, segment-level waveform augmentation, and
WER scoring for ASR data pipelines."""

__version__ = "0.1.0"

from .aligner import (
    AlignmentPath,
    BlankAugmentedTarget,
    FrameGeometry,
    LogPosteriorGrid,
    Transcript,
    Vocab,
    WordSegment,
    WordSpan,
    align_path,
    align_words,
    expand_with_blanks,
    frames_to_samples,
    refine_boundaries,
    segments_from_path,
)
from .audio_io import (
    AudioBuffer,
    read_posteriors,
    read_wav,
    synth_posteriors,
    write_posteriors,
    write_wav,
)
from .augment import (
    AugPolicyConfig,
    DrawSource,
    SeededDraws,
    Utterance,
    apply_policy,
    seg_crop,
    seg_drop,
    seg_mix,
    seg_perm,
)
from .scoring import (
    BootstrapResult,
    ErrorCounts,
    WerRates,
    bootstrap_ci,
    edit_align,
    format_interval,
    relative_reduction,
    wer,
)

__all__ = [
    "__version__",
    "AlignmentPath",
    "AudioBuffer",
    "AugPolicyConfig",
    "BlankAugmentedTarget",
    "BootstrapResult",
    "DrawSource",
    "ErrorCounts",
    "FrameGeometry",
    "LogPosteriorGrid",
    "SeededDraws",
    "Transcript",
    "Utterance",
    "Vocab",
    "WerRates",
    "WordSegment",
    "WordSpan",
    "align_path",
    "align_words",
    "apply_policy",
    "bootstrap_ci",
    "edit_align",
    "expand_with_blanks",
    "format_interval",
    "frames_to_samples",
    "read_posteriors",
    "read_wav",
    "refine_boundaries",
    "relative_reduction",
    "seg_crop",
    "seg_drop",
    "seg_mix",
    "seg_perm",
    "segments_from_path",
    "synth_posteriors",
    "wer",
    "write_posteriors",
    "write_wav",
]
