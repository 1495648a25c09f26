"""PCM WAV and posterior-grid file I/O.

Audio support is deliberately narrow: mono 16-bit PCM WAV only. Posterior
grids use a small binary container ("CTCP"): a 16-byte header followed by
row-major little-endian float32 natural-log probabilities.
"""

from __future__ import annotations

import struct
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .aligner import LogPosteriorGrid, Vocab
from .errors import (
    FormatError,
    InvalidDistributionError,
    ParameterError,
    TruncationError,
    UnsupportedAudioError,
)

POSTERIOR_MAGIC = b"CTCP"
POSTERIOR_VERSION = 1


@dataclass(frozen=True)
class AudioBuffer:
    """Mono 16-bit PCM samples."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self) -> None:
        if self.samples.ndim != 1:
            raise UnsupportedAudioError("audio buffer must be 1-D (mono)")
        if self.samples.dtype != np.int16:
            raise UnsupportedAudioError("audio buffer must be int16 PCM")

    @property
    def num_samples(self) -> int:
        return int(self.samples.shape[0])


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a mono 16-bit PCM WAV file."""
    try:
        with wave.open(str(path), "rb") as f:
            channels = f.getnchannels()
            width = f.getsampwidth()
            comp = f.getcomptype()
            rate = f.getframerate()
            frames = f.readframes(f.getnframes())
    except wave.Error as e:
        raise FormatError(f"{path}: {e}") from e
    except EOFError as e:
        raise FormatError(f"{path}: truncated WAV") from e
    if comp != "NONE":
        raise UnsupportedAudioError(f"{path}: compressed WAV not supported")
    if channels != 1:
        raise UnsupportedAudioError(f"{path}: expected mono, got {channels} channels")
    if width != 2:
        raise UnsupportedAudioError(f"{path}: expected 16-bit, got {8 * width}-bit")
    samples = np.frombuffer(frames, dtype="<i2").astype(np.int16)
    return AudioBuffer(samples=samples, sample_rate_hz=rate)


def write_wav(buffer: AudioBuffer, path: str | Path) -> None:
    """Write a canonical 44-byte-header mono 16-bit PCM WAV."""
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(buffer.sample_rate_hz)
        f.writeframes(buffer.samples.astype("<i2").tobytes())


def wav_num_samples(path: str | Path) -> int:
    """Read the sample count from a WAV header without decoding audio."""
    try:
        with wave.open(str(path), "rb") as f:
            return f.getnframes()
    except (wave.Error, EOFError) as e:
        raise FormatError(f"{path}: {e}") from e


def write_posteriors(grid: LogPosteriorGrid, path: str | Path) -> None:
    """Serialize a grid as CTCP: magic, version, T, S, float32 payload."""
    grid.validate(row_tol=1e-2)
    header = POSTERIOR_MAGIC + struct.pack(
        "<III", POSTERIOR_VERSION, grid.num_frames, grid.num_symbols
    )
    payload = np.ascontiguousarray(grid.values, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)


def read_posteriors(path: str | Path) -> LogPosteriorGrid:
    """Load a CTCP file, checking layout and row normalization."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 16 or data[:4] != POSTERIOR_MAGIC:
        raise FormatError(f"{path}: not a CTCP posterior file")
    version, num_frames, num_symbols = struct.unpack("<III", data[4:16])
    if version != POSTERIOR_VERSION:
        raise FormatError(f"{path}: unsupported CTCP version {version}")
    expected = 4 * num_frames * num_symbols
    if len(data) - 16 != expected:
        raise TruncationError(
            f"{path}: payload is {len(data) - 16} bytes, header promises {expected}"
        )
    values = (
        np.frombuffer(data, dtype="<f4", offset=16)
        .reshape(num_frames, num_symbols)
        .astype(np.float64)
    )
    grid = LogPosteriorGrid(values=values)
    try:
        # 1e-2 absorbs float32 rounding of rows normalized in float64.
        grid.validate(row_tol=1e-2)
    except Exception as e:
        raise InvalidDistributionError(f"{path}: {e}") from e
    return grid


def synth_posteriors(
    frame_ids: Sequence[int],
    vocab: Vocab,
    confidence: float,
) -> LogPosteriorGrid:
    """Build a near-one-hot grid that puts ``confidence`` on one symbol per
    frame and spreads the rest uniformly.

    Used as an alignment oracle: when the generating frame sequence is a
    valid path for a transcript, the aligner recovers it.
    """
    if not 0.5 < confidence < 1.0:
        raise ParameterError(f"confidence must be in (0.5, 1), got {confidence}")
    size = vocab.size
    if size < 2:
        raise ParameterError("vocab must have at least two symbols")
    ids = np.asarray(frame_ids, dtype=np.int64)
    if ids.ndim != 1 or len(ids) < 1:
        raise ParameterError("frame_ids must be a non-empty 1-D sequence")
    if ids.min() < 0 or ids.max() >= size:
        raise ParameterError("frame symbol id out of vocab range")
    values = np.full((len(ids), size), np.log((1.0 - confidence) / (size - 1)))
    values[np.arange(len(ids)), ids] = np.log(confidence)
    return LogPosteriorGrid(values=values)
