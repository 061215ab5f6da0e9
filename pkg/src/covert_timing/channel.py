"""Slotted AWGN channel: noise, frame assembly and per-slot powers.

Frames serialize to two debugging formats.

Binary (all little-endian)::

    magic   4 bytes  b"CTFR"
    header  6 x int64  n, T, transmitted (0/1), t_A (0 if none),
                       offset, message (-1 if none)
    body    n*T x float64, slot-major (slot 1 first)

CSV: comment lines ``# key=value`` for the same six header fields, then
one row per slot holding its ``n`` samples, comma separated, LF endings.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ParameterError, ScenarioParams

_MAGIC = b"CTFR"
_HEADER = struct.Struct("<4s6q")


@dataclass(frozen=True)
class FrameTruth:
    """Ground truth attached to a simulated frame (slots are 1-based)."""

    transmitted: bool
    t_A: int | None = None
    offset: int = 0
    message: int | None = None


@dataclass
class Frame:
    samples: np.ndarray
    n: int
    T: int
    truth: FrameTruth | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != (self.n * self.T,):
            raise ParameterError(
                f"frame needs {self.n * self.T} samples, got shape {self.samples.shape}")

    def slots(self) -> np.ndarray:
        """View of the samples as a ``(T, n)`` array."""
        return self.samples.reshape(self.T, self.n)

    def slot(self, t: int) -> np.ndarray:
        _check_slot(t, self.T)
        return self.samples[(t - 1) * self.n:t * self.n]


def _check_slot(t, T):
    if int(t) != t or not 1 <= t <= T:
        raise ParameterError(f"slot index must lie in 1..{T}, got {t!r}")


def sample_awgn(count: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. zero-mean Gaussian samples of the given variance."""
    if count < 0:
        raise ParameterError(f"count must be >= 0, got {count}")
    if variance < 0:
        raise ParameterError(f"variance must be >= 0, got {variance}")
    if variance == 0:
        return np.zeros(count)
    return rng.normal(0.0, math.sqrt(variance), size=count)


def transmit_frame(codeword, t_A: int, offset: int, params: ScenarioParams,
                   rng: np.random.Generator, receiver: str = "willie",
                   noise_var: float | None = None, message: int | None = None) -> Frame:
    """Build the ``n*T`` observation sequence seen by Willie or Bob.

    The codeword (if any) is added starting at sample ``(t_A - 1) * n + offset``.
    A non-zero offset splits its energy between slots ``t_A`` and ``t_A + 1``.

    Parameters
    ----------
    codeword : array_like of length n, or None
        Alice's transmitted symbols; None for a quiet frame.
    t_A : int
        Alice's slot, 1-based.
    offset : int
        Start position within slot ``t_A``, ``0 <= offset < n``.
    receiver : {"willie", "bob"}
        Picks the noise power from ``params``; ``noise_var`` overrides it.
    message : int, optional
        Codeword index, recorded in the frame's ground truth.
    """
    n, T = params.n, params.T
    _check_slot(t_A, T)
    if int(offset) != offset or not 0 <= offset < n:
        raise ParameterError(f"offset must lie in 0..{n - 1}, got {offset!r}")
    if noise_var is None:
        if receiver == "willie":
            noise_var = params.sigma_w_sq
        elif receiver == "bob":
            noise_var = params.sigma_b_sq
        else:
            raise ParameterError(f"receiver must be 'willie' or 'bob', got {receiver!r}")
    samples = sample_awgn(n * T, noise_var, rng)
    if codeword is None:
        return Frame(samples, n, T, FrameTruth(False, t_A, int(offset), None))
    codeword = np.asarray(codeword, dtype=float)
    if codeword.shape != (n,):
        raise ParameterError(f"codeword must have length {n}, got shape {codeword.shape}")
    start = (t_A - 1) * n + int(offset)
    if start + n > n * T:
        raise ParameterError("codeword overruns the end of the frame")
    samples[start:start + n] += codeword
    return Frame(samples, n, T, FrameTruth(True, t_A, int(offset), message))


def slot_power(frame: Frame, t: int) -> float:
    """Power ``Y_t`` (sum of squares) in slot ``t``, correctly rounded."""
    return math.fsum(np.square(frame.slot(t)))


def slot_powers(frame: Frame) -> np.ndarray:
    """Powers of all ``T`` slots (numpy pairwise summation along each slot)."""
    return np.square(frame.slots()).sum(axis=1)


def max_slot_power(frame: Frame) -> tuple[float, int]:
    """Largest slot power and its 1-based slot index (lowest index on ties)."""
    powers = slot_powers(frame)
    t = int(np.argmax(powers))
    return float(powers[t]), t + 1


def _header_fields(frame: Frame) -> tuple[int, ...]:
    truth = frame.truth or FrameTruth(False)
    return (frame.n, frame.T, int(truth.transmitted), truth.t_A or 0, truth.offset,
            -1 if truth.message is None else truth.message)


def _frame_from_fields(fields, samples) -> Frame:
    n, T, transmitted, t_A, offset, message = (int(v) for v in fields)
    truth = FrameTruth(bool(transmitted), t_A or None, offset,
                       None if message < 0 else message)
    return Frame(samples, n, T, truth)


_FIELDS = ("n", "T", "transmitted", "t_A", "offset", "message")


def write_frame(frame: Frame, path, fmt: str = "binary") -> None:
    path = Path(path)
    fields = _header_fields(frame)
    if fmt == "binary":
        with path.open("wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, *fields))
            fh.write(frame.samples.astype("<f8").tobytes())
    elif fmt == "csv":
        lines = [f"# {k}={v}" for k, v in zip(_FIELDS, fields)]
        for row in frame.slots():
            lines.append(",".join(format(x, ".17g") for x in row))
        path.write_text("\n".join(lines) + "\n", newline="\n")
    else:
        raise ParameterError(f"unknown frame format {fmt!r}")


def read_frame(path, fmt: str = "binary") -> Frame:
    path = Path(path)
    if fmt == "binary":
        data = path.read_bytes()
        magic, *fields = _HEADER.unpack_from(data)
        if magic != _MAGIC:
            raise ParameterError(f"{path} is not a frame file")
        samples = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(float)
        return _frame_from_fields(fields, samples)
    if fmt == "csv":
        header, rows = {}, []
        for line in path.read_text().splitlines():
            if line.startswith("#"):
                key, value = line[1:].strip().split("=", 1)
                header[key] = value
            elif line:
                rows.append([float(x) for x in line.split(",")])
        samples = np.array(rows, dtype=float).ravel()
        return _frame_from_fields([header[k] for k in _FIELDS], samples)
    raise ParameterError(f"unknown frame format {fmt!r}")
