"""MFCC frontend: one-second clip in, 101x40 coefficient matrix out.

Pipeline per frame: Hann-windowed 30 ms frame (10 ms hop, offsets 0..16000 so a
one-second clip yields exactly 101 frames), unnormalized power spectrum on a
512-point FFT, 40 triangular mel filters confined to 20 Hz..4 kHz (the
band-pass is realized as filterbank limits, not a separate time-domain
filter), log with a 1e-10 floor, then an orthonormal DCT-II keeping all 40
coefficients. No pre-emphasis and no mean/variance normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio import CLIP_SAMPLES, SAMPLE_RATE, AudioClip
from .errors import BadLengthError, BadRangeError

WINDOW_LEN = 480  # 30 ms at 16 kHz
FRAME_SHIFT = 160  # 10 ms
N_FFT = 512
N_MELS = 40
F_MIN = 20.0
F_MAX = 4000.0
LOG_FLOOR = 1e-10

NUM_FRAMES = CLIP_SAMPLES // FRAME_SHIFT + 1  # 101

# FeatureMatrix: (NUM_FRAMES, N_MELS) float array, the model input.
FeatureMatrix = np.ndarray


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular mel filters sampled at FFT bin centers."""

    weights: np.ndarray  # (n_mels, n_fft//2 + 1)
    f_min: float
    f_max: float
    n_mels: int


def mel_filterbank(
    n_mels: int = N_MELS,
    f_min: float = F_MIN,
    f_max: float = F_MAX,
    sample_rate: int = SAMPLE_RATE,
    n_fft: int = N_FFT,
) -> MelFilterbank:
    """Build n_mels triangles with peaks equally spaced on the mel scale.

    Peak weight follows the slaney area normalization 2 / (f_right - f_left);
    every filter is zero outside [f_min, f_max].
    """
    if not (0 <= f_min < f_max <= sample_rate / 2):
        raise BadRangeError(
            f"need 0 <= f_min < f_max <= {sample_rate / 2}, got [{f_min}, {f_max}]"
        )
    # n_mels + 2 vertices: left edge, n_mels peaks, right edge
    mel_points = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)

    weights = np.zeros((n_mels, n_fft // 2 + 1))
    for i in range(n_mels):
        f_left, f_peak, f_right = hz_points[i], hz_points[i + 1], hz_points[i + 2]
        rising = (bin_freqs - f_left) / (f_peak - f_left)
        falling = (f_right - bin_freqs) / (f_right - f_peak)
        tri = np.maximum(0.0, np.minimum(rising, falling))
        weights[i] = tri * (2.0 / (f_right - f_left))
    return MelFilterbank(weights=weights, f_min=f_min, f_max=f_max, n_mels=n_mels)


@lru_cache(maxsize=4)
def _default_bank() -> MelFilterbank:
    return mel_filterbank()


@lru_cache(maxsize=4)
def _hann(n: int) -> np.ndarray:
    return np.hanning(n)


def frame_signal(
    clip: AudioClip, window_len: int = WINDOW_LEN, shift: int = FRAME_SHIFT
) -> np.ndarray:
    """Slice a one-second clip into Hann-windowed frames at offsets 0..16000.

    Samples past the end of the clip are zero, so the final frames taper off
    rather than being dropped; this is what makes the frame count 101.
    """
    x = np.asarray(clip.samples, dtype=np.float64)
    if len(x) != CLIP_SAMPLES:
        raise BadLengthError(f"expected {CLIP_SAMPLES} samples, got {len(x)}")
    n_frames = CLIP_SAMPLES // shift + 1
    padded = np.concatenate([x, np.zeros(window_len)])
    offsets = np.arange(n_frames) * shift
    frames = np.stack([padded[o : o + window_len] for o in offsets])
    return frames * _hann(window_len)


def power_spectrum(frame: np.ndarray, n_fft: int = N_FFT) -> np.ndarray:
    """Unnormalized |DFT_k|^2 of the zero-padded frame, k = 0..n_fft/2.

    Convention: no 1/N scaling, so summing |DFT_k|^2 over all n_fft bins
    equals n_fft times the frame energy (Parseval).
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[-1] > n_fft:
        raise BadLengthError(f"frame of {frame.shape[-1]} samples exceeds n_fft={n_fft}")
    if frame.ndim == 1:
        frame = frame[None, :]
        squeeze = True
    else:
        squeeze = False
    spec = np.abs(np.fft.rfft(frame, n=n_fft, axis=-1)) ** 2
    return spec[0] if squeeze else spec


@lru_cache(maxsize=4)
def dct_matrix(n: int = N_MELS) -> np.ndarray:
    """Orthonormal DCT-II matrix: row k is sqrt(2/n)*cos(pi*k*(2j+1)/(2n)),
    with row 0 scaled by 1/sqrt(2). D @ D.T == I."""
    j = np.arange(n)
    k = np.arange(n)[:, None]
    d = np.sqrt(2.0 / n) * np.cos(np.pi * k * (2 * j + 1) / (2 * n))
    d[0] /= np.sqrt(2.0)
    return d


def mfcc(clip: AudioClip) -> FeatureMatrix:
    """Compute the (101, 40) MFCC matrix for a one-second clip."""
    frames = frame_signal(clip)
    spec = power_spectrum(frames)
    bank = _default_bank()
    energies = spec @ bank.weights.T
    log_e = np.log(np.maximum(energies, LOG_FLOOR))
    feats = log_e @ dct_matrix(bank.n_mels).T
    if not np.all(np.isfinite(feats)):
        raise FloatingPointError("non-finite MFCC values")
    return feats


def dump_features(feats: FeatureMatrix, path) -> None:
    """Golden-test dump: two little-endian u32 dims (t, f), then row-major float32."""
    feats = np.ascontiguousarray(feats, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(np.array(feats.shape, dtype="<u4").tobytes())
        fh.write(feats.tobytes())


def load_features(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        t, f = np.frombuffer(fh.read(8), dtype="<u4")
        data = np.frombuffer(fh.read(4 * int(t) * int(f)), dtype="<f4")
    return data.reshape(int(t), int(f)).astype(np.float64)
