"""Corpus inventory, hash-based splitting, augmentation, and the epoch cache.

Corpus layout: ``<root>/<word>/<clip>.wav`` plus ``<root>/_background_noise_/*.wav``.
Split assignment hashes the filename (with any ``_nohash_`` suffix stripped) so
that all clips from one speaker land in the same split and the assignment never
depends on scan order or machine.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import CLIP_SAMPLES, AudioClip, fit_to_length, read_wav
from .errors import (
    EmptyCorpusError,
    MissingNoiseDirError,
    NoiseTooShortError,
    ShiftOutOfRangeError,
)
from .features import FeatureMatrix, mfcc
from .labels import KEYWORDS, SILENCE_INDEX, UNKNOWN_INDEX, keyword_index

NOISE_DIR = "_background_noise_"
SPLITS = ("train", "validation", "test")

_NOHASH_RE = re.compile(r"_nohash_.*$")
_HASH_BUCKETS = 2**27

# per-batch class mix for training: 10% silence, 10% unknown, rest keywords
SILENCE_FRACTION = 0.1
UNKNOWN_FRACTION = 0.1

SAMPLES_PER_MS = 16


@dataclass(frozen=True)
class SampleRecord:
    path: str
    speaker_key: str
    label: int
    split: str


@dataclass
class Manifest:
    records: list[SampleRecord]
    keywords: tuple[str, ...] = KEYWORDS
    noise_paths: list[str] = field(default_factory=list)

    def split_records(self, split: str) -> list[SampleRecord]:
        return [r for r in self.records if r.split == split]

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                fh.write(f"{r.path}\t{r.label}\t{r.split}\n")


def speaker_key(filename: str) -> str:
    """Base filename with any ``_nohash_<n>`` suffix removed."""
    return _NOHASH_RE.sub("", Path(filename).name)


def assign_split(filename: str) -> str:
    """Deterministic 80/10/10 split from the SHA1 of the speaker key."""
    key = speaker_key(filename)
    digest = hashlib.sha1(key.encode("utf-8")).hexdigest()
    percentage = (int(digest, 16) % (_HASH_BUCKETS + 1)) * 100 / _HASH_BUCKETS
    if percentage < 10:
        return "validation"
    if percentage < 20:
        return "test"
    return "train"


def scan_dataset(root, keywords: tuple[str, ...] = KEYWORDS) -> Manifest:
    """Inventory a corpus directory into labeled, split-assigned records.

    WAVs under a keyword directory get that keyword's label; WAVs under any
    other word directory are `unknown`. Noise files are listed separately and
    never appear as samples.
    """
    root = Path(root)
    noise_dir = root / NOISE_DIR
    if not noise_dir.is_dir():
        raise MissingNoiseDirError(f"no {NOISE_DIR} directory under {root}")
    noise_paths = sorted(str(p) for p in noise_dir.glob("*.wav"))

    records = []
    for word_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        if word_dir.name == NOISE_DIR:
            continue
        label = keyword_index(word_dir.name)
        for wav in sorted(word_dir.glob("*.wav")):
            records.append(
                SampleRecord(
                    path=str(wav),
                    speaker_key=speaker_key(wav.name),
                    label=label,
                    split=assign_split(wav.name),
                )
            )
    if not any(r.label >= 2 for r in records):
        raise EmptyCorpusError(f"no keyword WAV files found under {root}")
    return Manifest(records=records, keywords=keywords, noise_paths=noise_paths)


@dataclass
class AugmentConfig:
    noise_prob: float = 0.8
    shift_ms_range: tuple[int, int] = (-100, 100)
    noise_scale_range: tuple[float, float] = (0.0, 0.1)
    cache_evict_frac: float = 0.3

    def __post_init__(self):
        if not 0 <= self.noise_prob <= 1:
            raise ValueError(f"noise_prob must be in [0, 1], got {self.noise_prob}")
        if self.shift_ms_range[0] != -self.shift_ms_range[1]:
            raise ValueError(f"shift range must be symmetric, got {self.shift_ms_range}")


def time_shift(clip: AudioClip, shift_ms: int, max_shift_ms: int = 100) -> AudioClip:
    """Shift by whole milliseconds: positive delays (zeros in front), negative advances."""
    if abs(shift_ms) > max_shift_ms:
        raise ShiftOutOfRangeError(f"|{shift_ms}| ms exceeds {max_shift_ms} ms")
    n = len(clip.samples)
    k = shift_ms * SAMPLES_PER_MS
    out = np.zeros(n, dtype=clip.samples.dtype)
    if k >= 0:
        out[k:] = clip.samples[: n - k]
    else:
        out[: n + k] = clip.samples[-k:]
    return AudioClip(samples=out, sample_rate=clip.sample_rate)


def mix_noise(
    clip: AudioClip, noise_clip: AudioClip, scale: float, rng: np.random.Generator
) -> AudioClip:
    """Add a random one-second crop of noise at the given amplitude, clamped to [-1, 1]."""
    n = len(clip.samples)
    if len(noise_clip.samples) < n:
        raise NoiseTooShortError(
            f"noise has {len(noise_clip.samples)} samples, need at least {n}"
        )
    start = int(rng.integers(0, len(noise_clip.samples) - n + 1))
    crop = noise_clip.samples[start : start + n]
    mixed = np.clip(clip.samples + scale * crop, -1.0, 1.0)
    return AudioClip(samples=mixed.astype(np.float32), sample_rate=clip.sample_rate)


def make_silence_sample(noise_clips: list[AudioClip], rng: np.random.Generator) -> AudioClip:
    """Random one-second noise crop scaled by Uniform[0, 1]; always label 0."""
    if not noise_clips:
        raise MissingNoiseDirError("no background noise available for silence samples")
    noise = noise_clips[int(rng.integers(0, len(noise_clips)))]
    if len(noise.samples) < CLIP_SAMPLES:
        raise NoiseTooShortError(f"noise file too short ({len(noise.samples)} samples)")
    start = int(rng.integers(0, len(noise.samples) - CLIP_SAMPLES + 1))
    scale = rng.uniform(0.0, 1.0)
    samples = (noise.samples[start : start + CLIP_SAMPLES] * scale).astype(np.float32)
    return AudioClip(samples=samples, sample_rate=noise.sample_rate)


class FeatureCache:
    """Maps (sample path, generation salt) to features.

    The salt records which cache generation produced an entry; eviction bumps
    the generation so re-featurized entries carry fresh augmentation draws.
    """

    def __init__(self):
        self._entries: dict[str, tuple[int, FeatureMatrix]] = {}
        self.generation = 0

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, path: str) -> FeatureMatrix | None:
        entry = self._entries.get(path)
        return entry[1] if entry is not None else None

    def put(self, path: str, features: FeatureMatrix) -> None:
        self._entries[path] = (self.generation, features)

    def evict(self, rng: np.random.Generator, frac: float = 0.3) -> int:
        """Remove ceil(frac * size) uniformly random entries; returns the count."""
        k = math.ceil(frac * len(self._entries))
        if k:
            keys = list(self._entries)
            for i in rng.choice(len(keys), size=k, replace=False):
                del self._entries[keys[i]]
        self.generation += 1
        return k


def _load_clip(path: str) -> AudioClip:
    return fit_to_length(read_wav(path))


def _augmented_features(
    path: str, augment: AugmentConfig, noise_clips: list[AudioClip], rng: np.random.Generator
) -> FeatureMatrix:
    clip = _load_clip(path)
    lo, hi = augment.shift_ms_range
    clip = time_shift(clip, int(rng.integers(lo, hi + 1)), max_shift_ms=max(abs(lo), hi))
    if noise_clips and rng.uniform() < augment.noise_prob:
        noise = noise_clips[int(rng.integers(0, len(noise_clips)))]
        scale = rng.uniform(*augment.noise_scale_range)
        clip = mix_noise(clip, noise, scale, rng)
    # cache in the training dtype; halves the footprint of a big epoch cache
    return mfcc(clip).astype(np.float32)


def load_noise_clips(manifest: Manifest) -> list[AudioClip]:
    return [read_wav(p) for p in manifest.noise_paths]


def epoch_batches(
    manifest: Manifest,
    split: str,
    augment: AugmentConfig,
    cache: FeatureCache,
    batch_size: int = 100,
    rng: np.random.Generator | None = None,
    noise_clips: list[AudioClip] | None = None,
):
    """Yield (features, labels) batches for one pass over a split.

    Training batches mix 10% synthesized silence and 10% resampled unknowns
    into each batch of shifted/noise-augmented keyword samples. Validation and
    test batches are the split's records in manifest order with no
    augmentation and no synthesized classes.
    """
    records = manifest.split_records(split)
    if not records:
        raise ValueError(f"split {split!r} is empty")
    if rng is None:
        rng = np.random.default_rng(0)

    if split != "train":
        for i in range(0, len(records), batch_size):
            chunk = records[i : i + batch_size]
            feats = []
            for r in chunk:
                f = cache.get(r.path)
                if f is None:
                    f = mfcc(_load_clip(r.path)).astype(np.float32)
                    cache.put(r.path, f)
                feats.append(f)
            yield np.stack(feats), np.array([r.label for r in chunk], dtype=np.int64)
        return

    if noise_clips is None:
        noise_clips = load_noise_clips(manifest)
    kw = [r for r in records if r.label >= 2]
    unknown_pool = [r for r in records if r.label == UNKNOWN_INDEX]
    if not kw:
        raise ValueError("train split has no keyword samples")

    order = rng.permutation(len(kw))
    n_sil = round(batch_size * SILENCE_FRACTION)
    n_unk = round(batch_size * UNKNOWN_FRACTION)
    n_kw = batch_size - n_sil - n_unk

    def featurize(record: SampleRecord) -> FeatureMatrix:
        f = cache.get(record.path)
        if f is None:
            f = _augmented_features(record.path, augment, noise_clips, rng)
            cache.put(record.path, f)
        return f

    for start in range(0, len(order), n_kw):
        batch_kw = [kw[i] for i in order[start : start + n_kw]]
        scale = len(batch_kw) / n_kw
        feats = [featurize(r) for r in batch_kw]
        labels = [r.label for r in batch_kw]
        if unknown_pool:
            for _ in range(round(n_unk * scale)):
                r = unknown_pool[int(rng.integers(0, len(unknown_pool)))]
                feats.append(featurize(r))
                labels.append(UNKNOWN_INDEX)
        if noise_clips:
            for _ in range(round(n_sil * scale)):
                feats.append(mfcc(make_silence_sample(noise_clips, rng)).astype(np.float32))
                labels.append(SILENCE_INDEX)
        yield np.stack(feats), np.array(labels, dtype=np.int64)
