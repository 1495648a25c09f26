"""Segment-level waveform augmentation.

Four transformations over word-segmented utterances, all operating directly
on samples with hard cuts (no crossfade, no inserted silence):

* drop: remove k ~ Uniform{1..floor(n/2)} words and their audio;
* permute: apply one uniformly random permutation jointly to words and
  their audio segments (Fisher-Yates, identity allowed);
* crop: keep one contiguous word span, start ~ U{0..n-1}, end ~ U{start..n-1},
  as a single audio slice (gap audio inside the span survives);
* mix: concatenate two utterances, audio and words.

``apply_policy`` samples which of these runs for a pair of utterances:
with probability ``apply_prob`` the pair is augmented at all; conditional on
that, with probability ``independent_prob`` each utterance is transformed
independently, otherwise the pair is mixed and the mix transformed once.
The transform is drawn over (crop, permute, drop) with cumulative weights.

Every output word keeps a provenance tag (source utterance id, original
segment index) so that surgery can be verified byte-for-byte downstream.
Draw order per operation is pinned in each docstring; given the same
DrawSource stream the output is byte-identical.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .audio_io import AudioBuffer
from .errors import ConfigurationError, IncompatiblePairError

OP_CROP = "crop"
OP_PERM = "perm"
OP_DROP = "drop"
OP_MIX = "mix"


@dataclass(frozen=True)
class TaggedSegment:
    """One word's sample range plus where it originally came from."""

    word: str
    start_sample: int
    end_sample: int
    source_id: str
    source_index: int


@dataclass(frozen=True)
class Utterance:
    """Audio plus its ordered, disjoint word segments.

    ``sources`` lists the original utterance ids this audio was assembled
    from (one entry unless mixed); ``ops`` records the transformations
    applied, in order.
    """

    id: str
    audio: AudioBuffer
    segments: tuple[TaggedSegment, ...]
    sources: tuple[str, ...] = ()
    ops: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        prev_end = 0
        for seg in self.segments:
            if seg.start_sample < prev_end or seg.start_sample >= seg.end_sample:
                raise ConfigurationError(
                    f"{self.id}: segments must be ordered, disjoint, non-empty"
                )
            prev_end = seg.end_sample
        if self.segments and self.segments[-1].end_sample > self.audio.num_samples:
            raise ConfigurationError(f"{self.id}: segment beyond audio buffer")
        if not self.sources:
            object.__setattr__(self, "sources", (self.id,))

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(seg.word for seg in self.segments)

    @property
    def text(self) -> str:
        return " ".join(self.words)

    @classmethod
    def fresh(
        cls,
        utt_id: str,
        audio: AudioBuffer,
        word_ranges: Sequence[tuple[str, int, int]],
    ) -> "Utterance":
        """Build an original (un-augmented) utterance; provenance is itself."""
        segments = tuple(
            TaggedSegment(
                word=w,
                start_sample=s,
                end_sample=e,
                source_id=utt_id,
                source_index=i,
            )
            for i, (w, s, e) in enumerate(word_ranges)
        )
        return cls(id=utt_id, audio=audio, segments=segments)


class DrawSource:
    """Supplier of uniform reals in [0, 1) and uniform integers in a range."""

    def uniform(self) -> float:
        raise NotImplementedError

    def integer(self, n: int) -> int:
        """Uniform integer in {0, ..., n-1}."""
        raise NotImplementedError


class SeededDraws(DrawSource):
    """Deterministic stream derived from a master seed plus string tags.

    Streams for distinct tag tuples (e.g. distinct utterance ids) are
    statistically independent; the same (seed, tags) always replays the
    same sequence.
    """

    def __init__(self, master_seed: int, *tags: str) -> None:
        if master_seed < 0:
            raise ConfigurationError("master seed must be non-negative")
        h = hashlib.sha256()
        for tag in tags:
            h.update(tag.encode("utf-8"))
            h.update(b"\x00")
        entropy = np.frombuffer(h.digest(), dtype=np.uint32)
        seq = np.random.SeedSequence([master_seed, *entropy.tolist()])
        self._rng = np.random.Generator(np.random.PCG64(seq))

    def uniform(self) -> float:
        return float(self._rng.random())

    def integer(self, n: int) -> int:
        if n < 1:
            raise ConfigurationError("integer() needs n >= 1")
        return int(self._rng.integers(n))


@dataclass(frozen=True)
class AugPolicyConfig:
    """Policy constants: fire rate, branch rate, and transform weights
    over (crop, permute, drop)."""

    apply_prob: float = 0.5
    independent_prob: float = 0.75
    augmenter_probs: tuple[float, float, float] = (0.1, 0.6, 0.3)
    max_drop_fraction: float = 0.5

    def __post_init__(self) -> None:
        for name in ("apply_prob", "independent_prob", "max_drop_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1], got {v}")
        if any(p < 0 for p in self.augmenter_probs):
            raise ConfigurationError("augmenter_probs must be non-negative")
        if abs(sum(self.augmenter_probs) - 1.0) > 1e-9:
            raise ConfigurationError("augmenter_probs must sum to 1")


def _reassemble(
    u: Utterance,
    kept: Sequence[TaggedSegment],
    new_id: str,
    op: str,
) -> Utterance:
    """Concatenate the kept word-owned slices into a fresh utterance."""
    pieces = [u.audio.samples[seg.start_sample : seg.end_sample] for seg in kept]
    samples = (
        np.concatenate(pieces) if pieces else np.zeros(0, dtype=np.int16)
    )
    segments = []
    offset = 0
    for seg in kept:
        length = seg.end_sample - seg.start_sample
        segments.append(
            replace(seg, start_sample=offset, end_sample=offset + length)
        )
        offset += length
    return Utterance(
        id=new_id,
        audio=AudioBuffer(samples=samples, sample_rate_hz=u.audio.sample_rate_hz),
        segments=tuple(segments),
        sources=u.sources,
        ops=u.ops + (op,),
    )


def seg_drop(
    u: Utterance,
    draws: DrawSource,
    max_fraction: float = 0.5,
) -> Utterance:
    """Remove up to ``max_fraction`` of the words and their audio.

    Draws, in order: k = 1 + integer(floor(n * max_fraction)), then k calls
    integer(len(pool)) picking distinct indices from the shrinking pool of
    remaining positions. With floor(n * max_fraction) == 0 the utterance is
    returned unchanged and no draws are consumed.
    """
    n = len(u.segments)
    k_max = int(n * max_fraction)
    if k_max == 0:
        return u
    k = 1 + draws.integer(k_max)
    pool = list(range(n))
    dropped = set()
    for _ in range(k):
        dropped.add(pool.pop(draws.integer(len(pool))))
    kept = [seg for i, seg in enumerate(u.segments) if i not in dropped]
    return _reassemble(u, kept, f"{u.id}-sd", OP_DROP)


def seg_perm(u: Utterance, draws: DrawSource) -> Utterance:
    """Permute the (word, audio segment) pairs jointly, uniformly at random.

    Fisher-Yates: for i = n-1 down to 1, j = integer(i + 1), swap(i, j).
    The identity permutation can occur. With n <= 1 the utterance is
    returned unchanged and no draws are consumed.
    """
    n = len(u.segments)
    if n <= 1:
        return u
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = draws.integer(i + 1)
        order[i], order[j] = order[j], order[i]
    kept = [u.segments[i] for i in order]
    return _reassemble(u, kept, f"{u.id}-sp", OP_PERM)


def seg_crop(u: Utterance, draws: DrawSource) -> Utterance:
    """Keep one contiguous word span and its contiguous audio.

    Draws, in order: start = integer(n), then end = start + integer(n -
    start). The kept audio is the single slice from the start word's first
    sample to the end word's last, so gap audio inside the span survives.
    With n <= 1 the utterance is returned unchanged and no draws are
    consumed.
    """
    n = len(u.segments)
    if n <= 1:
        return u
    start = draws.integer(n)
    end = start + draws.integer(n - start)
    base = u.segments[start].start_sample
    stop = u.segments[end].end_sample
    samples = u.audio.samples[base:stop]
    segments = tuple(
        replace(seg, start_sample=seg.start_sample - base, end_sample=seg.end_sample - base)
        for seg in u.segments[start : end + 1]
    )
    return Utterance(
        id=f"{u.id}-sc",
        audio=AudioBuffer(samples=samples, sample_rate_hz=u.audio.sample_rate_hz),
        segments=segments,
        sources=u.sources,
        ops=u.ops + (OP_CROP,),
    )


def seg_mix(x: Utterance, y: Utterance) -> Utterance:
    """Concatenate two utterances: audio, words, and segments."""
    if x.audio.sample_rate_hz != y.audio.sample_rate_hz:
        raise IncompatiblePairError(
            f"sample rates differ: {x.audio.sample_rate_hz} vs {y.audio.sample_rate_hz}"
        )
    shift = x.audio.num_samples
    samples = np.concatenate([x.audio.samples, y.audio.samples])
    segments = x.segments + tuple(
        replace(seg, start_sample=seg.start_sample + shift, end_sample=seg.end_sample + shift)
        for seg in y.segments
    )
    return Utterance(
        id=f"{x.id}+{y.id}",
        audio=AudioBuffer(samples=samples, sample_rate_hz=x.audio.sample_rate_hz),
        segments=segments,
        sources=x.sources + y.sources,
        ops=x.ops + y.ops + (OP_MIX,),
    )


def _pick_augmenter(u: float, cfg: AugPolicyConfig):
    """Map a uniform draw to a transform by cumulative weight over
    (crop, permute, drop)."""
    crop_w, perm_w, _ = cfg.augmenter_probs
    if u < crop_w:
        return lambda utt, draws: seg_crop(utt, draws)
    if u < crop_w + perm_w:
        return lambda utt, draws: seg_perm(utt, draws)
    return lambda utt, draws: seg_drop(utt, draws, cfg.max_drop_fraction)


def apply_policy(
    x: Utterance,
    y: Utterance,
    cfg: AugPolicyConfig,
    draws: DrawSource,
) -> list[Utterance]:
    """Run the augmentation policy on a pair of utterances.

    Draws, in order: r1 (no-op gate: empty list when r1 > apply_prob); r2
    (branch gate). Independent branch (r2 <= independent_prob): for x then
    y, one uniform choosing the transform, then the transform's own draws.
    Mix branch: one uniform choosing the transform applied to mix(x, y).
    """
    if draws.uniform() > cfg.apply_prob:
        return []
    if draws.uniform() <= cfg.independent_prob:
        out = []
        for u in (x, y):
            augmenter = _pick_augmenter(draws.uniform(), cfg)
            out.append(augmenter(u, draws))
        return out
    mixed = seg_mix(x, y)
    augmenter = _pick_augmenter(draws.uniform(), cfg)
    return [augmenter(mixed, draws)]
