"""Forced alignment of character transcripts against CTC posterior grids.

The aligner takes a T x S grid of per-frame log-probabilities over a
character vocabulary (blank included) and a known transcript, and finds the
single most probable monotone state path through the blank-augmented target.
The path is then grouped into per-word frame ranges, word boundaries are
recentred into the inter-word gaps, and frame ranges are mapped to audio
sample ranges.

All dynamic programming is done in natural-log domain with ``-inf`` standing
in for zero probability. Ties in the trellis maximisation are broken by
preferring the smallest step into a state (stay, then step-1, then step-2),
which makes the returned path deterministic across platforms.

Two backtrack modes exist:

* full-coverage (default): the final state is constrained to the last label
  or the trailing blank, so every transcript character is emitted at least
  once and every word receives a segment;
* literal argmax mode: the final state is the unconstrained argmax over all
  states, which can end mid-transcript and leave trailing words without
  frames (callers opting in must handle ``MissingWordError``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    DimensionMismatchError,
    InfeasibleAlignmentError,
    InvalidTranscriptError,
    MissingWordError,
)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class Vocab:
    """Character vocabulary with an explicit blank and word delimiter."""

    symbols: tuple[str, ...]
    blank_id: int = 0
    word_delimiter: str = " "

    def __post_init__(self) -> None:
        if len(set(self.symbols)) != len(self.symbols):
            raise ConfigurationError("vocab symbols must be unique")
        if not 0 <= self.blank_id < len(self.symbols):
            raise ConfigurationError(f"blank_id {self.blank_id} out of range")
        if self.word_delimiter not in self.symbols:
            raise ConfigurationError(
                f"word delimiter {self.word_delimiter!r} missing from vocab"
            )
        if self.symbols.index(self.word_delimiter) == self.blank_id:
            raise ConfigurationError("word delimiter must be distinct from blank")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def delimiter_id(self) -> int:
        return self._index[self.word_delimiter]

    def id_of(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise InvalidTranscriptError(f"symbol {symbol!r} not in vocab") from None

    @classmethod
    def from_file(cls, path: str | Path) -> "Vocab":
        """Load a vocab from JSON: {"symbols": [...], "blank": "<blank>",
        "word_delimiter": " "}."""
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        symbols = tuple(data["symbols"])
        blank = data.get("blank", "<blank>")
        if blank not in symbols:
            raise ConfigurationError(f"blank symbol {blank!r} missing from vocab file")
        return cls(
            symbols=symbols,
            blank_id=symbols.index(blank),
            word_delimiter=data.get("word_delimiter", " "),
        )

    def to_file(self, path: str | Path) -> None:
        data = {
            "symbols": list(self.symbols),
            "blank": self.symbols[self.blank_id],
            "word_delimiter": self.word_delimiter,
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, ensure_ascii=False)
            f.write("\n")


@dataclass(frozen=True)
class Transcript:
    """A word sequence plus its character-id rendering.

    ``char_ids`` is the transcript spelled out in vocab indices with one word
    delimiter between consecutive words and no blanks.
    """

    words: tuple[str, ...]
    char_ids: tuple[int, ...]

    @property
    def text(self) -> str:
        return " ".join(self.words)

    @classmethod
    def render(cls, text: str | Sequence[str], vocab: Vocab) -> "Transcript":
        words = tuple(text.split()) if isinstance(text, str) else tuple(text)
        ids: list[int] = []
        for k, word in enumerate(words):
            if not word:
                raise InvalidTranscriptError("empty word in transcript")
            if vocab.word_delimiter in word:
                raise InvalidTranscriptError(
                    f"word {word!r} contains the delimiter symbol"
                )
            if k:
                ids.append(vocab.delimiter_id)
            for ch in word:
                cid = vocab.id_of(ch)
                if cid == vocab.blank_id:
                    raise InvalidTranscriptError("transcript may not contain blank")
                ids.append(cid)
        return cls(words=words, char_ids=tuple(ids))


@dataclass(frozen=True)
class LogPosteriorGrid:
    """T x S natural-log probabilities, one row per encoder frame."""

    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise DimensionMismatchError("grid must be 2-D (frames x symbols)")
        if self.values.shape[0] < 1:
            raise DimensionMismatchError("grid needs at least one frame")

    @property
    def num_frames(self) -> int:
        return int(self.values.shape[0])

    @property
    def num_symbols(self) -> int:
        return int(self.values.shape[1])

    def validate(self, row_tol: float = 1e-3, value_tol: float = 1e-3) -> None:
        """Check that every row is a normalized log-distribution."""
        if float(self.values.max()) > value_tol:
            raise DegenerateInputError("grid holds log-probabilities above zero")
        lse = np.logaddexp.reduce(self.values, axis=1)
        if not np.all(np.abs(lse) <= row_tol):
            worst = int(np.argmax(np.abs(lse)))
            raise DegenerateInputError(
                f"frame {worst} logsumexp {lse[worst]:.3g} outside +/-{row_tol}"
            )


@dataclass(frozen=True)
class BlankAugmentedTarget:
    """Transcript interleaved with blanks: blank, c1, blank, c2, ..., blank."""

    states: tuple[int, ...]
    blank_id: int

    def __post_init__(self) -> None:
        if len(self.states) % 2 != 1:
            raise DimensionMismatchError("blank-augmented target length must be odd")
        for i, s in enumerate(self.states):
            if (i % 2 == 0) != (s == self.blank_id):
                raise DimensionMismatchError(
                    "blank-augmented target must alternate blank/label"
                )

    @property
    def num_labels(self) -> int:
        return len(self.states) // 2


@dataclass(frozen=True)
class AlignmentPath:
    """Best state path: one index into the blank-augmented target per frame."""

    states: tuple[int, ...]
    log_prob: float


@dataclass(frozen=True)
class WordSpan:
    """A word's half-open frame range."""

    word: str
    start_frame: int
    end_frame: int


@dataclass(frozen=True)
class WordSegment:
    """A word with both frame-level and sample-level half-open ranges."""

    word: str
    start_frame: int
    end_frame: int
    start_sample: int
    end_sample: int


@dataclass(frozen=True)
class FrameGeometry:
    """Audio-to-encoder-frame geometry.

    One encoder frame covers ``frame_shift_ms * subsample_factor`` ms of
    audio; with the defaults that is 40 ms, or 640 samples at 16 kHz.
    """

    frame_shift_ms: float = 10.0
    subsample_factor: int = 4
    sample_rate_hz: int = 16000

    def __post_init__(self) -> None:
        if self.frame_shift_ms <= 0 or self.subsample_factor <= 0 or self.sample_rate_hz <= 0:
            raise ConfigurationError("geometry fields must be strictly positive")

    @property
    def samples_per_frame(self) -> int:
        exact = self.sample_rate_hz * self.frame_shift_ms * self.subsample_factor / 1000.0
        rounded = round(exact)
        if abs(exact - rounded) > 1e-9:
            raise ConfigurationError(
                f"samples per encoder frame {exact} is not an integer"
            )
        return int(rounded)


def expand_with_blanks(transcript: Transcript, vocab: Vocab) -> BlankAugmentedTarget:
    """Interleave the transcript's char ids with blanks (length 2U+1)."""
    states: list[int] = [vocab.blank_id]
    for cid in transcript.char_ids:
        if not 0 <= cid < vocab.size:
            raise InvalidTranscriptError(f"char id {cid} out of vocab range")
        if cid == vocab.blank_id:
            raise InvalidTranscriptError("transcript may not contain blank")
        states.append(cid)
        states.append(vocab.blank_id)
    return BlankAugmentedTarget(states=tuple(states), blank_id=vocab.blank_id)


def align_path(
    grid: LogPosteriorGrid,
    target: BlankAugmentedTarget,
    *,
    full_coverage: bool = True,
) -> AlignmentPath:
    """Viterbi-align the blank-augmented target to the posterior grid.

    Returns the maximum-log-probability monotone state path. Allowed steps
    into state i at each frame are 0 (stay), 1, and 2, where a step of 2 is
    legal only into a label state whose label differs from the one two
    states back. Paths start at the leading blank or the first label.

    With ``full_coverage`` (default) the final state is restricted to the
    last label or the trailing blank, which guarantees the whole transcript
    is emitted; otherwise the final state is the unconstrained argmax over
    all states at the last frame.
    """
    values = grid.values
    T = grid.num_frames
    states = np.asarray(target.states, dtype=np.int64)
    N = len(states)

    if states.min() < 0 or states.max() >= grid.num_symbols:
        raise DimensionMismatchError(
            f"target references symbol {int(states.max())} but grid has "
            f"{grid.num_symbols} symbols"
        )
    dead = np.all(values == NEG_INF, axis=1)
    if bool(dead.any()):
        t = int(np.argmax(dead))
        raise DegenerateInputError(f"frame {t} assigns -inf to every symbol")
    if full_coverage and T < (N + 1) // 2:
        raise InfeasibleAlignmentError(
            f"{T} frames cannot cover {target.num_labels} labels"
        )

    # Per-frame log prob of each trellis state's symbol.
    emit = values[:, states]

    # Step-2 is only legal into a label state with a different label 2 back.
    allow2 = np.zeros(N, dtype=bool)
    if N > 2:
        odd = np.arange(3, N, 2)
        allow2[odd] = states[odd] != states[odd - 2]

    alpha = np.full(N, NEG_INF)
    alpha[0] = emit[0, 0]
    if N > 1:
        alpha[1] = emit[0, 1]
    # steps[t, i]: step size (0/1/2) taken into state i at frame t.
    steps = np.zeros((T, N), dtype=np.int8)

    shift1 = np.empty(N)
    shift2 = np.empty(N)
    for t in range(1, T):
        shift1[0] = NEG_INF
        shift1[1:] = alpha[:-1]
        shift2[:2] = NEG_INF
        shift2[2:] = alpha[:-2]
        shift2[~allow2] = NEG_INF
        stacked = np.stack((alpha, shift1, shift2))
        # argmax keeps the first maximum: stay beats step-1 beats step-2.
        choice = np.argmax(stacked, axis=0)
        best = np.take_along_axis(stacked, choice[None, :], axis=0)[0]
        alpha = best + emit[t]
        steps[t] = choice

    if full_coverage:
        end_candidates = (N - 1,) if N == 1 else (N - 2, N - 1)
    else:
        end_candidates = tuple(range(N))
    end = max(end_candidates, key=lambda i: (alpha[i], -i))
    if alpha[end] == NEG_INF:
        raise InfeasibleAlignmentError(
            "no feasible path reaches the end of the target"
        )

    path = np.empty(T, dtype=np.int64)
    path[T - 1] = end
    for t in range(T - 1, 0, -1):
        path[t - 1] = path[t] - steps[t, path[t]]

    return AlignmentPath(
        states=tuple(int(s) for s in path),
        log_prob=float(alpha[end]),
    )


def _word_of_char(transcript: Transcript) -> list[int]:
    """Map each char_ids position to its word index, -1 for delimiters."""
    owner: list[int] = []
    for k, word in enumerate(transcript.words):
        if k:
            owner.append(-1)
        owner.extend([k] * len(word))
    if len(owner) != len(transcript.char_ids):
        raise DimensionMismatchError("transcript words and char_ids disagree")
    return owner


def segments_from_path(
    path: AlignmentPath,
    target: BlankAugmentedTarget,
    transcript: Transcript,
) -> list[WordSpan]:
    """Group path frames into raw per-word frame ranges.

    A word's raw range runs from the first to the last frame whose state is
    one of that word's characters. Frames on blank or word-delimiter states
    fall into the inter-word gaps and belong to no word.
    """
    if len(target.states) != 2 * len(transcript.char_ids) + 1:
        raise DimensionMismatchError("target does not match transcript")
    owner = _word_of_char(transcript)

    first = [-1] * len(transcript.words)
    last = [-1] * len(transcript.words)
    for t, s in enumerate(path.states):
        if s % 2 == 0:
            continue  # blank state
        w = owner[(s - 1) // 2]
        if w < 0:
            continue  # delimiter state
        if first[w] < 0:
            first[w] = t
        last[w] = t

    spans: list[WordSpan] = []
    for k, word in enumerate(transcript.words):
        if first[k] < 0:
            raise MissingWordError(f"word {k} ({word!r}) emitted no frames")
        spans.append(WordSpan(word=word, start_frame=first[k], end_frame=last[k] + 1))
    return spans


def refine_boundaries(
    spans: Sequence[WordSpan],
    num_frames: int,
    pad_frames: int = 5,
) -> list[WordSpan]:
    """Recenter word boundaries into the middle of each inter-word gap.

    The shared boundary of consecutive words becomes the floor-midpoint of
    the gap between them (the right word owns the midpoint frame). The first
    word is extended left and the last word right by at most ``pad_frames``,
    clamped to the utterance edges.
    """
    if not spans:
        return []
    for a, b in zip(spans, spans[1:]):
        if a.end_frame > b.start_frame:
            raise DimensionMismatchError("raw spans must be disjoint and ordered")
    if spans[0].start_frame < 0 or spans[-1].end_frame > num_frames:
        raise DimensionMismatchError("raw spans fall outside the grid")
    if pad_frames < 0:
        raise ConfigurationError("pad_frames must be non-negative")

    starts = [s.start_frame for s in spans]
    ends = [s.end_frame for s in spans]
    starts[0] = spans[0].start_frame - min(pad_frames, spans[0].start_frame)
    ends[-1] = spans[-1].end_frame + min(pad_frames, num_frames - spans[-1].end_frame)
    for k in range(len(spans) - 1):
        mid = (spans[k].end_frame + spans[k + 1].start_frame) // 2
        ends[k] = mid
        starts[k + 1] = mid
    return [
        WordSpan(word=s.word, start_frame=st, end_frame=en)
        for s, st, en in zip(spans, starts, ends)
    ]


def frames_to_samples(
    start_frame: int,
    end_frame: int,
    geometry: FrameGeometry,
) -> tuple[int, int]:
    """Map a half-open frame range to the corresponding sample range."""
    spf = geometry.samples_per_frame
    return start_frame * spf, end_frame * spf


def attach_samples(
    spans: Sequence[WordSpan],
    geometry: FrameGeometry,
    num_samples: int | None = None,
) -> list[WordSegment]:
    """Turn refined frame spans into full segments with sample ranges.

    When ``num_samples`` is given, end samples are clamped to the audio
    length; a span starting at or past the end of the audio is an error.
    """
    out: list[WordSegment] = []
    for span in spans:
        start, end = frames_to_samples(span.start_frame, span.end_frame, geometry)
        if num_samples is not None:
            end = min(end, num_samples)
            if start >= end:
                raise DimensionMismatchError(
                    f"word {span.word!r} lies beyond the audio buffer"
                )
        out.append(
            WordSegment(
                word=span.word,
                start_frame=span.start_frame,
                end_frame=span.end_frame,
                start_sample=start,
                end_sample=end,
            )
        )
    return out


def align_words(
    grid: LogPosteriorGrid,
    text: str | Sequence[str],
    vocab: Vocab,
    *,
    geometry: FrameGeometry | None = None,
    pad_frames: int = 5,
    full_coverage: bool = True,
    num_samples: int | None = None,
) -> list[WordSegment]:
    """End-to-end alignment: text -> refined word segments with samples."""
    geometry = geometry or FrameGeometry()
    if grid.num_symbols != vocab.size:
        raise DimensionMismatchError(
            f"grid has {grid.num_symbols} symbols, vocab has {vocab.size}"
        )
    transcript = Transcript.render(text, vocab)
    target = expand_with_blanks(transcript, vocab)
    path = align_path(grid, target, full_coverage=full_coverage)
    raw = segments_from_path(path, target, transcript)
    refined = refine_boundaries(raw, grid.num_frames, pad_frames=pad_frames)
    return attach_samples(refined, geometry, num_samples=num_samples)
