"""WAV read/write/fit behavior, including the 1/32768 round-trip bound."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwsforge.audio import AudioClip, fit_to_length, read_wav, read_wav_bytes, wav_bytes, write_wav
from kwsforge.errors import MalformedWavError, UnsupportedFormatError

QUANT = 1.0 / 32768.0


def make_wav_bytes(ints, rate=16000, channels=1, bits=16, audio_format=1):
    pcm = np.asarray(ints, dtype="<i2").tobytes()
    out = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    out += b"fmt " + struct.pack(
        "<IHHIIHH", 16, audio_format, channels, rate, rate * channels * bits // 8, channels * bits // 8, bits
    )
    out += b"data" + struct.pack("<I", len(pcm)) + pcm
    return out


class TestReadWav:
    def test_direct_decode(self, tmp_path):
        ints = np.arange(16000, dtype=np.int16) % 2000 - 1000
        path = tmp_path / "a.wav"
        path.write_bytes(make_wav_bytes(ints))
        clip = read_wav(path)
        assert len(clip) == 16000
        assert clip.sample_rate == 16000
        np.testing.assert_allclose(clip.samples, ints / 32768.0, atol=0)

    def test_full_scale_negative(self):
        clip = read_wav_bytes(make_wav_bytes([-32768] * 100))
        assert np.all(clip.samples == -1.0)

    def test_rejects_wrong_rate_and_channels(self):
        with pytest.raises(UnsupportedFormatError, match="sample_rate=44100"):
            read_wav_bytes(make_wav_bytes([0] * 10, rate=44100))
        with pytest.raises(UnsupportedFormatError, match="channels=2"):
            read_wav_bytes(make_wav_bytes([0] * 10, channels=2))
        with pytest.raises(UnsupportedFormatError, match="bits_per_sample=8"):
            read_wav_bytes(make_wav_bytes([0] * 10, bits=8))
        with pytest.raises(UnsupportedFormatError, match="audio_format=3"):
            read_wav_bytes(make_wav_bytes([0] * 10, audio_format=3))

    def test_rejects_broken_container(self):
        with pytest.raises(MalformedWavError, match="RIFF"):
            read_wav_bytes(b"JUNK" + b"\x00" * 40)
        with pytest.raises(MalformedWavError, match="shorter"):
            read_wav_bytes(b"RIFF")
        good = make_wav_bytes([0] * 100)
        with pytest.raises(MalformedWavError):
            read_wav_bytes(good[:60])  # truncated data chunk
        with pytest.raises(MalformedWavError, match="missing data"):
            read_wav_bytes(good[:36])  # fmt only


class TestWriteWav:
    def test_zero_round_trip(self, tmp_path):
        path = tmp_path / "z.wav"
        write_wav(AudioClip(np.zeros(16000, dtype=np.float32)), path)
        clip = read_wav(path)
        assert len(clip) == 16000
        assert np.all(clip.samples == 0.0)

    def test_quantization_bound(self):
        clip = AudioClip(np.array([0.5, -0.5, 0.25, -1.0, 1.0], dtype=np.float32))
        back = read_wav_bytes(wav_bytes(clip))
        assert np.abs(back.samples - clip.samples).max() <= QUANT

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4000))
    def test_round_trip_random_clips(self, seed, n):
        rng = np.random.default_rng(seed)
        clip = AudioClip(rng.uniform(-1, 1, n).astype(np.float32))
        back = read_wav_bytes(wav_bytes(clip))
        assert len(back) == n
        assert np.abs(back.samples - clip.samples).max() <= QUANT


class TestFitToLength:
    def test_exact_length_unchanged(self):
        clip = AudioClip(np.ones(16000, dtype=np.float32))
        assert fit_to_length(clip) is clip

    def test_symmetric_pad(self):
        clip = AudioClip(np.ones(15998, dtype=np.float32))
        out = fit_to_length(clip)
        assert len(out) == 16000
        assert out.samples[0] == 0 and out.samples[-1] == 0
        assert np.all(out.samples[1:-1] == 1)

    def test_odd_deficit_pads_extra_right(self):
        clip = AudioClip(np.ones(15997, dtype=np.float32))
        out = fit_to_length(clip)
        assert np.all(out.samples[:1] == 0) and np.all(out.samples[-2:] == 0)
        assert np.all(out.samples[1:-2] == 1)

    def test_center_crop(self):
        x = np.arange(20000, dtype=np.float32)
        out = fit_to_length(AudioClip(x))
        np.testing.assert_array_equal(out.samples, x[2000:18000])

    def test_empty_clip_rejected(self):
        with pytest.raises(ValueError):
            fit_to_length(AudioClip(np.zeros(0, dtype=np.float32)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 40000))
    def test_idempotent_and_energy_preserving(self, seed, n):
        rng = np.random.default_rng(seed)
        clip = AudioClip(rng.uniform(-1, 1, n).astype(np.float32))
        once = fit_to_length(clip)
        twice = fit_to_length(once)
        np.testing.assert_array_equal(once.samples, twice.samples)
        # retained samples are copied verbatim (no rescaling), preserving energy
        if n >= 16000:
            start = (n - 16000) // 2
            np.testing.assert_array_equal(once.samples, clip.samples[start : start + 16000])
        else:
            left = (16000 - n) // 2
            np.testing.assert_array_equal(once.samples[left : left + n], clip.samples)
            assert np.all(once.samples[:left] == 0) and np.all(once.samples[left + n :] == 0)
