"""JSON-lines corpus manifests.

One UTF-8 JSON object per line. Known fields: id, audio_path, text,
posterior_path, segments, provenance. Relative audio/posterior paths are
resolved against the manifest's own directory, which keeps output trees
relocatable and lets a re-emitted manifest equal its input byte-for-byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import ManifestError


@dataclass(frozen=True)
class SegmentRecord:
    word: str
    start_sample: int
    end_sample: int
    start_frame: int | None = None
    end_frame: int | None = None


@dataclass(frozen=True)
class ProvenanceWord:
    source_id: str
    segment_index: int


@dataclass(frozen=True)
class Provenance:
    """How an augmented utterance was assembled from its sources."""

    sources: tuple[str, ...]
    ops: tuple[str, ...]
    words: tuple[ProvenanceWord, ...]


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    audio_path: str
    text: str
    posterior_path: str | None = None
    segments: tuple[SegmentRecord, ...] | None = None
    provenance: Provenance | None = None

    def resolve_audio(self, base_dir: Path) -> Path:
        p = Path(self.audio_path)
        return p if p.is_absolute() else base_dir / p

    def resolve_posteriors(self, base_dir: Path) -> Path | None:
        if self.posterior_path is None:
            return None
        p = Path(self.posterior_path)
        return p if p.is_absolute() else base_dir / p


def entry_to_dict(entry: ManifestEntry) -> dict:
    d: dict = {"id": entry.id, "audio_path": entry.audio_path, "text": entry.text}
    if entry.posterior_path is not None:
        d["posterior_path"] = entry.posterior_path
    if entry.segments is not None:
        d["segments"] = [
            {
                "word": s.word,
                **(
                    {"start_frame": s.start_frame, "end_frame": s.end_frame}
                    if s.start_frame is not None
                    else {}
                ),
                "start_sample": s.start_sample,
                "end_sample": s.end_sample,
            }
            for s in entry.segments
        ]
    if entry.provenance is not None:
        d["provenance"] = {
            "sources": list(entry.provenance.sources),
            "ops": list(entry.provenance.ops),
            "words": [
                {"source_id": w.source_id, "segment_index": w.segment_index}
                for w in entry.provenance.words
            ],
        }
    return d


def entry_from_dict(d: dict) -> ManifestEntry:
    for key in ("id", "audio_path", "text"):
        if key not in d:
            raise ManifestError(f"missing required field {key!r}")
    utt_id = str(d["id"])
    if not utt_id or any(c in utt_id for c in "/\\\x00"):
        raise ManifestError(f"bad utterance id {utt_id!r}")
    segments = None
    if d.get("segments") is not None:
        segments = tuple(
            SegmentRecord(
                word=str(s["word"]),
                start_sample=int(s["start_sample"]),
                end_sample=int(s["end_sample"]),
                start_frame=int(s["start_frame"]) if "start_frame" in s else None,
                end_frame=int(s["end_frame"]) if "end_frame" in s else None,
            )
            for s in d["segments"]
        )
    provenance = None
    if d.get("provenance") is not None:
        p = d["provenance"]
        provenance = Provenance(
            sources=tuple(p["sources"]),
            ops=tuple(p["ops"]),
            words=tuple(
                ProvenanceWord(source_id=w["source_id"], segment_index=int(w["segment_index"]))
                for w in p["words"]
            ),
        )
    return ManifestEntry(
        id=utt_id,
        audio_path=str(d["audio_path"]),
        text=str(d["text"]),
        posterior_path=d.get("posterior_path"),
        segments=segments,
        provenance=provenance,
    )


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                if not isinstance(d, dict):
                    raise ManifestError("entry is not a JSON object")
                entry = entry_from_dict(d)
            except (json.JSONDecodeError, ManifestError, KeyError, TypeError, ValueError) as e:
                raise ManifestError(f"{path}: line {lineno}: {e}") from e
            if entry.id in seen:
                raise ManifestError(f"{path}: line {lineno}: duplicate id {entry.id!r}")
            seen.add(entry.id)
            entries.append(entry)
    return entries


def format_entry(entry: ManifestEntry) -> str:
    return json.dumps(entry_to_dict(entry), ensure_ascii=False, separators=(", ", ": "))


def write_manifest(entries: Iterable[ManifestEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(format_entry(entry))
            f.write("\n")
