"""Shared fixtures: a deterministic synthetic corpus and a small trained checkpoint.

Corpus clips are word-specific tones over a broadband noise floor, so classes
are separable, feature magnitudes stay speech-like, and tiny models can
actually learn them. Speaker names are chosen so the hash-based split
assignment fills every split.
"""

import numpy as np
import pytest

from kwsforge.audio import AudioClip, write_wav
from kwsforge.dataset import Manifest, SampleRecord, assign_split, scan_dataset

WORD_FREQS = {
    "yes": 300.0,
    "no": 430.0,
    "up": 560.0,
    "down": 700.0,
    "left": 860.0,
    "right": 1050.0,
    "on": 1300.0,
    "off": 1600.0,
    "stop": 2000.0,
    "go": 2500.0,
    "marvin": 3000.0,
    "bed": 3500.0,
}

SPLIT_QUOTA = {"train": 5, "validation": 2, "test": 2}


def names_for_split(split: str, count: int, salt: str) -> list[str]:
    """Enumerate speaker names until `count` of them hash into `split`."""
    names = []
    i = 0
    while len(names) < count:
        cand = f"{salt}{i:04d}"
        if assign_split(f"{cand}_nohash_0.wav") == split:
            names.append(cand)
        i += 1
    return names


def tone_clip(rng: np.random.Generator, freq: float) -> AudioClip:
    t = np.arange(16000) / 16000.0
    f = freq * (1 + rng.uniform(-0.02, 0.02))
    amp = rng.uniform(0.15, 0.3)
    x = amp * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    x = x + 0.06 * rng.normal(size=16000)
    return AudioClip(np.clip(x, -1.0, 1.0).astype(np.float32))


def build_corpus(root, rng: np.random.Generator) -> None:
    for word, freq in WORD_FREQS.items():
        word_dir = root / word
        word_dir.mkdir()
        for split, quota in SPLIT_QUOTA.items():
            for name in names_for_split(split, quota, salt=word):
                write_wav(tone_clip(rng, freq), word_dir / f"{name}_nohash_0.wav")

    noise_dir = root / "_background_noise_"
    noise_dir.mkdir()
    white = 0.1 * rng.normal(size=5 * 16000)
    write_wav(AudioClip(np.clip(white, -1, 1).astype(np.float32)), noise_dir / "white_noise.wav")
    t = np.arange(5 * 16000) / 16000.0
    rumble = 0.1 * np.sin(2 * np.pi * 60 * t) + 0.05 * rng.normal(size=5 * 16000)
    write_wav(AudioClip(np.clip(rumble, -1, 1).astype(np.float32)), noise_dir / "rumble.wav")


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    build_corpus(root, np.random.default_rng(20240901))
    return root


@pytest.fixture(scope="session")
def manifest(corpus_dir) -> Manifest:
    return scan_dataset(corpus_dir)


def toy_records(manifest: Manifest) -> list[SampleRecord]:
    """50 samples, all forced into the train split: 4 per keyword, 10 unknowns."""
    by_label: dict[int, list[SampleRecord]] = {}
    for r in manifest.records:
        if r.split == "train":
            by_label.setdefault(r.label, []).append(r)
    picked = [r for label in range(2, 12) for r in by_label[label][:4]]
    picked += by_label[1][:10]
    return [SampleRecord(r.path, r.speaker_key, r.label, "train") for r in picked]


@pytest.fixture(scope="session")
def toy_manifest(manifest) -> Manifest:
    records = toy_records(manifest)
    assert len(records) == 50
    return Manifest(records=records, keywords=manifest.keywords, noise_paths=manifest.noise_paths)


@pytest.fixture(scope="session")
def toy_checkpoint(toy_manifest, tmp_path_factory):
    """Compact model trained on the toy subset until it memorizes it.

    Small batches give the compact model the optimizer steps its tiny initial
    gradients need; augmentation stays off so the run converges in seconds.
    """
    from kwsforge.dataset import AugmentConfig
    from kwsforge.models import save_checkpoint
    from kwsforge.training import TrainConfig, train

    config = TrainConfig(
        model_name="cnn-one-fstride4",
        batch_size=10,
        max_epochs=400,
        seed=11,
        augment=AugmentConfig(noise_prob=0.0, shift_ms_range=(0, 0)),
        stop_at_train_accuracy=0.9,
    )
    ckpt, _ = train(config, toy_manifest)
    path = tmp_path_factory.mktemp("ckpt") / "toy.ckpt"
    save_checkpoint(ckpt, path)
    return path
