"""WAV ingestion and normalization.

Only PCM 16-bit mono 16 kHz files are accepted; anything else is rejected with
an error naming the offending field. Samples are scaled to [-1, 1] floats by
dividing by 32768.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import MalformedWavError, UnsupportedFormatError

SAMPLE_RATE = 16000
CLIP_SAMPLES = 16000  # one second
_INT16_SCALE = 32768.0


@dataclass
class AudioClip:
    """Fixed-rate mono PCM buffer; the unit of ingestion and augmentation."""

    samples: np.ndarray  # float32 in [-1, 1]
    sample_rate: int = SAMPLE_RATE

    def __len__(self) -> int:
        return len(self.samples)


def read_wav_bytes(data: bytes) -> AudioClip:
    """Decode a RIFF/WAVE byte buffer into an AudioClip.

    Raises MalformedWavError for broken container structure and
    UnsupportedFormatError for anything that is not PCM 16-bit mono 16 kHz.
    """
    if len(data) < 12:
        raise MalformedWavError("file shorter than RIFF header (12 bytes)")
    if data[0:4] != b"RIFF":
        raise MalformedWavError(f"bad RIFF magic {data[0:4]!r}")
    if data[8:12] != b"WAVE":
        raise MalformedWavError(f"bad WAVE tag {data[8:12]!r}")

    fmt = None
    pcm_data = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + chunk_size]
        if len(body) < chunk_size:
            raise MalformedWavError(
                f"chunk {chunk_id!r} claims {chunk_size} bytes but only {len(body)} present"
            )
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise MalformedWavError(f"fmt chunk too small ({chunk_size} bytes)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            pcm_data = body
        # chunks are word-aligned: odd sizes carry a pad byte
        pos += 8 + chunk_size + (chunk_size & 1)

    if fmt is None:
        raise MalformedWavError("missing fmt chunk")
    if pcm_data is None:
        raise MalformedWavError("missing data chunk")

    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedFormatError(f"audio_format={audio_format}, expected PCM (1)")
    if channels != 1:
        raise UnsupportedFormatError(f"channels={channels}, expected mono (1)")
    if rate != SAMPLE_RATE:
        raise UnsupportedFormatError(f"sample_rate={rate}, expected {SAMPLE_RATE}")
    if bits != 16:
        raise UnsupportedFormatError(f"bits_per_sample={bits}, expected 16")
    if len(pcm_data) % 2 != 0:
        raise MalformedWavError(f"data chunk length {len(pcm_data)} is not int16-aligned")

    ints = np.frombuffer(pcm_data, dtype="<i2")
    samples = ints.astype(np.float32) / _INT16_SCALE
    return AudioClip(samples=samples, sample_rate=rate)


def read_wav(path) -> AudioClip:
    """Read a PCM 16-bit mono 16 kHz WAV file."""
    with open(path, "rb") as fh:
        return read_wav_bytes(fh.read())


def wav_bytes(clip: AudioClip) -> bytes:
    """Encode a clip as a RIFF/WAVE byte buffer (PCM 16-bit mono)."""
    ints = np.clip(np.rint(clip.samples * _INT16_SCALE), -32768, 32767).astype("<i2")
    pcm = ints.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, 1, 1, clip.sample_rate, clip.sample_rate * 2, 2, 16
    )
    header += b"data" + struct.pack("<I", len(pcm))
    return header + pcm


def write_wav(clip: AudioClip, path) -> None:
    """Write a clip as PCM 16-bit mono WAV; round-trips within 1/32768."""
    with open(path, "wb") as fh:
        fh.write(wav_bytes(clip))


def fit_to_length(clip: AudioClip, target_len: int = CLIP_SAMPLES) -> AudioClip:
    """Center-pad (zeros) or center-crop a clip to exactly target_len samples.

    Odd pad deficits put the extra zero on the right. No rescaling is applied,
    so retained samples keep their energy.
    """
    n = len(clip.samples)
    if n == 0:
        raise ValueError("cannot fit an empty clip")
    if n == target_len:
        return clip
    if n < target_len:
        deficit = target_len - n
        left = deficit // 2
        out = np.zeros(target_len, dtype=clip.samples.dtype)
        out[left : left + n] = clip.samples
    else:
        start = (n - target_len) // 2
        out = clip.samples[start : start + target_len].copy()
    return AudioClip(samples=out, sample_rate=clip.sample_rate)
