"""Batch flows over manifests: align, augment, score.

Everything here is a deterministic function of (inputs, master seed).
Augmentation partner selection uses a bounded shuffle buffer seeded from
the master seed; per-pair policy draws come from streams keyed by the
primary utterance's id, so worker scheduling can never change an output.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

from . import audio_io, scoring
from .aligner import FrameGeometry, Vocab, align_words
from .augment import AugPolicyConfig, SeededDraws, Utterance, apply_policy
from .errors import (
    ConfigurationError,
    ManifestError,
    MissingInputError,
    SegkitError,
    UndefinedMetricError,
)
from .manifest import (
    ManifestEntry,
    Provenance,
    ProvenanceWord,
    SegmentRecord,
    format_entry,
    read_manifest,
)


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by the batch commands."""

    master_seed: int = 0
    geometry: FrameGeometry = field(default_factory=FrameGeometry)
    policy: AugPolicyConfig = field(default_factory=AugPolicyConfig)
    pad_frames: int = 5
    shuffle_buffer: int = 64
    emit_originals: bool = True
    paper_literal_backtrack: bool = False

    def __post_init__(self) -> None:
        if self.shuffle_buffer < 2:
            raise ConfigurationError("shuffle_buffer must be >= 2")
        if self.pad_frames < 0:
            raise ConfigurationError("pad_frames must be non-negative")


@dataclass(frozen=True)
class AlignOutcome:
    aligned: int
    rejected: int
    out_manifest: str
    rejects_path: str | None


def run_align(
    manifest_path: str | Path,
    posteriors_dir: str | Path,
    vocab_path: str | Path,
    out_path: str | Path,
    config: RunConfig,
) -> AlignOutcome:
    """Attach refined word segments to every alignable manifest entry.

    Entries that cannot be aligned are appended to ``<out>.rejects`` with
    the error kind and message; nothing is silently dropped.
    """
    manifest_path = Path(manifest_path)
    posteriors_dir = Path(posteriors_dir)
    out_path = Path(out_path)
    if not manifest_path.exists():
        raise MissingInputError(f"manifest not found: {manifest_path}")
    if not Path(vocab_path).exists():
        raise MissingInputError(f"vocab not found: {vocab_path}")
    vocab = Vocab.from_file(vocab_path)
    entries = read_manifest(manifest_path)
    base_dir = manifest_path.parent

    aligned_rows: list[str] = []
    reject_rows: list[str] = []
    for entry in entries:
        try:
            aligned_rows.append(format_entry(_align_entry(
                entry, base_dir, posteriors_dir, vocab, config
            )))
        except SegkitError as e:
            reject_rows.append(json.dumps(
                {"id": entry.id, "error": e.kind, "message": str(e)},
                ensure_ascii=False,
            ))

    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as f:
        for row in aligned_rows:
            f.write(row + "\n")
    rejects_path = None
    if reject_rows:
        rejects_path = str(out_path) + ".rejects"
        with open(rejects_path, "w", encoding="utf-8") as f:
            for row in reject_rows:
                f.write(row + "\n")
    return AlignOutcome(
        aligned=len(aligned_rows),
        rejected=len(reject_rows),
        out_manifest=str(out_path),
        rejects_path=rejects_path,
    )


def _align_entry(
    entry: ManifestEntry,
    base_dir: Path,
    posteriors_dir: Path,
    vocab: Vocab,
    config: RunConfig,
) -> ManifestEntry:
    post_path = entry.resolve_posteriors(base_dir)
    if post_path is None:
        post_path = posteriors_dir / f"{entry.id}.ctcp"
    if not post_path.exists():
        raise MissingInputError(f"posterior file not found: {post_path}")
    audio_path = entry.resolve_audio(base_dir)
    if not audio_path.exists():
        raise MissingInputError(f"audio file not found: {audio_path}")
    grid = audio_io.read_posteriors(post_path)
    num_samples = audio_io.wav_num_samples(audio_path)
    segments = align_words(
        grid,
        entry.text,
        vocab,
        geometry=config.geometry,
        pad_frames=config.pad_frames,
        full_coverage=not config.paper_literal_backtrack,
        num_samples=num_samples,
    )
    return replace(
        entry,
        segments=tuple(
            SegmentRecord(
                word=s.word,
                start_sample=s.start_sample,
                end_sample=s.end_sample,
                start_frame=s.start_frame,
                end_frame=s.end_frame,
            )
            for s in segments
        ),
    )


def load_utterance(entry: ManifestEntry, base_dir: Path) -> Utterance:
    """Read an entry's audio and wrap it with its word segments."""
    if entry.segments is None:
        raise ManifestError(f"entry {entry.id!r} has no segments")
    audio = audio_io.read_wav(entry.resolve_audio(base_dir))
    words = [s.word for s in entry.segments]
    if " ".join(words) != entry.text:
        raise ManifestError(
            f"entry {entry.id!r}: segment words do not spell the transcript"
        )
    try:
        return Utterance.fresh(
            entry.id,
            audio,
            [(s.word, s.start_sample, s.end_sample) for s in entry.segments],
        )
    except SegkitError as e:
        raise ManifestError(f"entry {entry.id!r}: {e}") from e


def iter_augmented(
    entries: Sequence[ManifestEntry],
    base_dir: Path,
    config: RunConfig,
) -> Iterator[tuple[ManifestEntry, list[Utterance]]]:
    """Stream (original entry, augmented outputs) pairs in manifest order.

    Each entry is paired with a partner drawn uniformly from a shuffle
    buffer holding the most recent ``shuffle_buffer`` utterances (seeded
    with the master seed; a self-draw moves to the next slot). After the
    pair is processed the entry replaces its partner's slot. Outputs of the
    pair for entry x get ids ``{x.id}-aug{k}``. The whole stream is a
    deterministic function of (manifest order, master seed).

    This is the library surface for training loops; the batch command
    writes the same stream to disk.
    """
    pool: list[Utterance] = [
        load_utterance(e, base_dir) for e in entries[: min(config.shuffle_buffer, len(entries))]
    ]
    pair_rng = SeededDraws(config.master_seed, "pairing")
    for entry in entries:
        x = load_utterance(entry, base_dir)
        j = pair_rng.integer(len(pool))
        if pool[j].id == x.id and len(pool) > 1:
            j = (j + 1) % len(pool)
        y = pool[j]
        draws = SeededDraws(config.master_seed, "policy", x.id)
        outputs = apply_policy(x, y, config.policy, draws)
        outputs = [
            replace(u, id=f"{x.id}-aug{k}") for k, u in enumerate(outputs)
        ]
        yield entry, outputs
        pool[j] = x


@dataclass(frozen=True)
class AugmentOutcome:
    entries_in: int
    originals: int
    augmented: int
    out_manifest: str


def run_augment(
    manifest_path: str | Path,
    out_dir: str | Path,
    config: RunConfig,
) -> AugmentOutcome:
    """Materialize the augmented stream as WAV files plus a manifest.

    Original entries (when emitted) keep their manifest fields; their audio
    bytes are copied verbatim. Augmented entries carry sample-level
    segments and full provenance. Two runs with identical inputs and seed
    produce byte-identical trees.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise MissingInputError(f"manifest not found: {manifest_path}")
    entries = read_manifest(manifest_path)
    base_dir = manifest_path.parent
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)

    originals = augmented = 0
    rows: list[str] = []
    for entry, outputs in iter_augmented(entries, base_dir, config):
        if config.emit_originals:
            shutil.copyfile(entry.resolve_audio(base_dir), audio_dir / f"{entry.id}.wav")
            rows.append(format_entry(replace(entry, audio_path=f"audio/{entry.id}.wav")))
            originals += 1
        for u in outputs:
            audio_io.write_wav(u.audio, audio_dir / f"{u.id}.wav")
            rows.append(format_entry(_augmented_entry(u)))
            augmented += 1

    out_manifest = out_dir / "manifest.jsonl"
    with open(out_manifest, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(row + "\n")
    return AugmentOutcome(
        entries_in=len(entries),
        originals=originals,
        augmented=augmented,
        out_manifest=str(out_manifest),
    )


def _augmented_entry(u: Utterance) -> ManifestEntry:
    return ManifestEntry(
        id=u.id,
        audio_path=f"audio/{u.id}.wav",
        text=u.text,
        segments=tuple(
            SegmentRecord(word=s.word, start_sample=s.start_sample, end_sample=s.end_sample)
            for s in u.segments
        ),
        provenance=Provenance(
            sources=u.sources,
            ops=u.ops,
            words=tuple(
                ProvenanceWord(source_id=s.source_id, segment_index=s.source_index)
                for s in u.segments
            ),
        ),
    )


def run_score(
    ref_path: str | Path,
    hyp_path: str | Path,
    *,
    baseline_path: str | Path | None = None,
    bootstrap: bool = False,
    num_replicates: int = 5000,
    alpha: float = 0.05,
    seed: int = 0,
) -> dict:
    """Score hypothesis transcripts against references, by utterance id.

    Returns the report as a plain dict (the machine-readable form); rates
    are percentages. With ``baseline_path`` the report adds the paired
    relative WER reduction of hyp over baseline, bootstrapped over shared
    resample indices when ``bootstrap`` is on.
    """
    refs = _texts_by_id(ref_path)
    hyps = _texts_by_id(hyp_path)
    _require_same_ids(refs, hyps, "hyp")
    ids = sorted(refs)
    if not ids:
        raise UndefinedMetricError("empty reference manifest")

    pair_counts = [scoring.edit_align(refs[i].split(), hyps[i].split()) for i in ids]
    total = _sum_counts(pair_counts)
    rates = scoring.wer(total)
    report: dict = {
        "num_utterances": len(ids),
        "ref_words": total.ref_len,
        "wer": round(rates.wer, 2),
        "sub": round(rates.sub, 2),
        "del": round(rates.del_, 2),
        "ins": round(rates.ins, 2),
        "counts": {
            "hits": total.hits,
            "substitutions": total.substitutions,
            "deletions": total.deletions,
            "insertions": total.insertions,
        },
    }

    if bootstrap:
        report["ci"] = {
            name: _interval_dict(scoring.bootstrap_ci(
                pair_counts,
                lambda cs, key=key: getattr(scoring.wer(_sum_counts(cs)), key),
                num_replicates=num_replicates,
                alpha=alpha,
                seed=seed,
                ids=ids,
            ))
            for name, key in (("wer", "wer"), ("sub", "sub"), ("del", "del_"), ("ins", "ins"))
        }

    if baseline_path is not None:
        bases = _texts_by_id(baseline_path)
        _require_same_ids(refs, bases, "baseline")
        base_counts = [scoring.edit_align(refs[i].split(), bases[i].split()) for i in ids]
        base_rates = scoring.wer(_sum_counts(base_counts))
        rwerr = scoring.relative_reduction(base_rates.wer, rates.wer)
        report["baseline"] = {
            "wer": round(base_rates.wer, 2),
            "rwerr": round(rwerr, 1),
        }
        if bootstrap:
            paired = list(zip(base_counts, pair_counts))

            def paired_rwerr(items) -> float:
                base = _sum_counts([b for b, _ in items])
                new = _sum_counts([h for _, h in items])
                return scoring.relative_reduction(scoring.wer(base).wer, scoring.wer(new).wer)

            result = scoring.bootstrap_ci(
                paired,
                paired_rwerr,
                num_replicates=num_replicates,
                alpha=alpha,
                seed=seed,
                ids=ids,
            )
            report["baseline"]["rwerr_ci"] = _interval_dict(result, decimals=1)
    return report


def format_report(report: dict) -> str:
    """Human-readable rendering of a score report."""
    lines = [
        f"utterances: {report['num_utterances']}   reference words: {report['ref_words']}",
        f"WER {report['wer']:.2f}  (SUB {report['sub']:.2f}  DEL {report['del']:.2f}"
        f"  INS {report['ins']:.2f})",
    ]
    if "ci" in report:
        for name in ("wer", "sub", "del", "ins"):
            lines.append(f"{name.upper()} CI {report['ci'][name]['text']}")
    if "baseline" in report:
        b = report["baseline"]
        line = f"baseline WER {b['wer']:.2f}  rWERR {b['rwerr']:.1f}%"
        if "rwerr_ci" in b:
            line += f"  CI {b['rwerr_ci']['text']}"
            line += f"  (replicates below zero: {100 * b['rwerr_ci']['frac_below_zero']:.2f}%)"
        lines.append(line)
    return "\n".join(lines)


def _interval_dict(result: scoring.BootstrapResult, decimals: int = 2) -> dict:
    return {
        "mean": result.mean,
        "lower": result.lower,
        "upper": result.upper,
        "num_replicates": result.num_replicates,
        "alpha": result.alpha,
        "frac_below_zero": result.frac_below_zero,
        "text": result.render(decimals),
    }


def _sum_counts(counts: Sequence[scoring.ErrorCounts]) -> scoring.ErrorCounts:
    total = scoring.ErrorCounts()
    for c in counts:
        total = total + c
    return total


def _texts_by_id(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"manifest not found: {path}")
    return {e.id: e.text for e in read_manifest(path)}


def _require_same_ids(refs: dict, others: dict, label: str) -> None:
    missing = sorted(set(refs) - set(others))
    extra = sorted(set(others) - set(refs))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing from {label}: {', '.join(missing[:10])}")
        if extra:
            parts.append(f"unknown in {label}: {', '.join(extra[:10])}")
        raise ManifestError("; ".join(parts))
