"""Core signal container, test-signal generators, and PCM WAV I/O.

Conventions: mono float64 samples, nominal range [-A, A] with A = 1 for all
generated fixtures. 8-bit WAV is unsigned offset-binary, 16-bit is signed;
stereo files are down-mixed by averaging the two channels on read.
"""

from __future__ import annotations

import struct
import wave
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Signal",
    "ToneSpec",
    "ChordSpec",
    "SignalError",
    "WavFormatError",
    "gen_sine",
    "gen_chord",
    "read_wav",
    "write_wav",
    "normalize_peak",
    "note_to_freq",
]

DEFAULT_SAMPLE_RATE = 44100


class SignalError(ValueError):
    """Invalid signal parameters or content."""


class WavFormatError(SignalError):
    """Unsupported or malformed WAV data."""

    def __init__(self, message, code="bad_wav"):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Signal:
    """A finite mono sample sequence at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise SignalError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise SignalError("samples must all be finite")
        if self.sample_rate <= 0:
            raise SignalError("sample_rate must be positive")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.sample_rate)


@dataclass(frozen=True)
class ToneSpec:
    """One sinusoidal component: frequency, duration, level, phase."""

    frequency: float
    duration: float = 1.0
    level_db: float = 0.0
    phase: float = 0.0

    def validate(self, sample_rate: int):
        if self.frequency < 0 or self.frequency >= sample_rate / 2:
            raise SignalError(
                f"frequency {self.frequency} Hz must be in [0, Nyquist={sample_rate/2} Hz)"
            )
        if self.duration <= 0:
            raise SignalError("duration must be positive")
        if self.level_db > 0:
            raise SignalError("level_db must be <= 0 dBFS")


@dataclass(frozen=True)
class ChordSpec:
    """Equal-weight tone mix renormalized to a target peak level."""

    tones: tuple[ToneSpec, ...]
    level_db: float = 0.0
    duration: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tones", tuple(self.tones))
        if not self.tones:
            raise SignalError("chord needs at least one tone")
        if self.level_db > 0:
            raise SignalError("level_db must be <= 0 dBFS")


# Equal temperament, A4 = 440 Hz.
_NOTE_OFFSETS = {"C": -9, "D": -7, "E": -5, "F": -4, "G": -2, "A": 0, "B": 2}


def note_to_freq(name: str) -> float:
    """Resolve a note name like 'C4' or 'F#3' to Hz (A4 = 440)."""
    name = name.strip()
    if len(name) < 2:
        raise SignalError(f"bad note name: {name!r}")
    letter = name[0].upper()
    rest = name[1:]
    accidental = 0
    if rest[0] in "#b":
        accidental = 1 if rest[0] == "#" else -1
        rest = rest[1:]
    if letter not in _NOTE_OFFSETS or not rest.lstrip("-").isdigit():
        raise SignalError(f"bad note name: {name!r}")
    octave = int(rest)
    semitones = _NOTE_OFFSETS[letter] + accidental + 12 * (octave - 4)
    return 440.0 * 2.0 ** (semitones / 12.0)


def gen_sine(spec: ToneSpec, sample_rate: int = DEFAULT_SAMPLE_RATE) -> Signal:
    """Generate amp * sin(2*pi*f*t + phase) with amp = 10^(level_db/20)."""
    spec.validate(sample_rate)
    n = int(round(spec.duration * sample_rate))
    amp = 10.0 ** (spec.level_db / 20.0)
    t = np.arange(n) / sample_rate
    return Signal(amp * np.sin(2 * np.pi * spec.frequency * t + spec.phase), sample_rate)


def gen_chord(spec: ChordSpec, sample_rate: int = DEFAULT_SAMPLE_RATE) -> Signal:
    """Mix tones with equal weight, then rescale so the peak hits level_db."""
    mix = None
    for tone in spec.tones:
        tone.validate(sample_rate)
        part = gen_sine(
            ToneSpec(tone.frequency, spec.duration, 0.0, tone.phase), sample_rate
        ).samples
        mix = part if mix is None else mix + part
    peak = np.abs(mix).max()
    if peak == 0:
        raise SignalError("chord mixes to silence; cannot renormalize")
    target = 10.0 ** (spec.level_db / 20.0)
    return Signal(mix * (target / peak), sample_rate)


def normalize_peak(signal: Signal) -> Signal:
    """Scale so max |sample| = 1. Rejects all-zero input."""
    peak = np.abs(signal.samples).max() if len(signal) else 0.0
    if peak == 0:
        raise SignalError("cannot normalize an all-zero signal")
    return signal.with_samples(signal.samples / peak)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def read_wav(path) -> Signal:
    """Read 8-bit unsigned or 16-bit signed PCM WAV, averaging stereo to mono.

    8-bit maps [0, 255] -> [-1, 1) via (v - 128)/128; 16-bit via v/32768.
    """
    with open(path, "rb") as fh:
        return read_wav_bytes(fh.read())


def _pcm_frames(x: np.ndarray, bit_depth: int) -> bytes:
    if bit_depth == 8:
        q = _round_half_away(x * 128.0) + 128.0
        return np.clip(q, 0, 255).astype(np.uint8).tobytes()
    if bit_depth == 16:
        q = _round_half_away(x * 32768.0)
        return np.clip(q, -32768, 32767).astype("<i2").tobytes()
    raise WavFormatError(f"unsupported bit depth {bit_depth}", code="bad_depth")


def write_wav(path, signal: Signal, bit_depth: int = 16):
    """Write mono PCM WAV at 8 or 16 bits, round-half-away-from-zero, clamped."""
    frames = _pcm_frames(signal.samples, bit_depth)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(bit_depth // 8)
        wf.setframerate(signal.sample_rate)
        wf.writeframes(frames)


def wav_bytes(signal: Signal, bit_depth: int = 16) -> bytes:
    """Serialize a signal to in-memory WAV bytes (for the HTTP service)."""
    import io

    buf = io.BytesIO()
    frames = _pcm_frames(signal.samples, bit_depth)
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(bit_depth // 8)
        wf.setframerate(signal.sample_rate)
        wf.writeframes(frames)
    return buf.getvalue()


def read_wav_bytes(data: bytes) -> Signal:
    """Parse WAV bytes with the same rules as read_wav."""
    import io

    buf = io.BytesIO(data)
    try:
        with wave.open(buf, "rb") as wf:
            nch = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            comp = wf.getcomptype()
            nframes = wf.getnframes()
            raw = wf.readframes(nframes)
    except (wave.Error, EOFError, struct.error) as exc:
        raise WavFormatError(f"not a readable PCM WAV: {exc}", code="bad_wav") from exc
    if comp != "NONE":
        raise WavFormatError(f"non-PCM WAV compression {comp!r}", code="non_pcm")
    if width not in (1, 2):
        raise WavFormatError(f"unsupported sample width {8*width} bits", code="bad_depth")
    if nch not in (1, 2):
        raise WavFormatError(f"unsupported channel count {nch}", code="bad_channels")
    if len(raw) < nframes * nch * width:
        raise WavFormatError("truncated WAV data", code="truncated")
    if width == 1:
        x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    else:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if nch == 2:
        x = x.reshape(-1, 2).mean(axis=1)
    return Signal(x, rate)
