"""Random codebooks and Bob's minimum-distance decoder."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channel import Frame
from .model import ParameterError, Scheme


class UsageError(RuntimeError):
    """Raised when an operation is applied to an object in the wrong state."""


@dataclass(frozen=True)
class Codebook:
    """A single-use random codebook.

    ``codewords`` has shape ``(num_messages, n)``; when ``has_origin`` is set
    row 0 is the all-zero "no transmission" word.
    """

    ensemble: Scheme
    param: float  # P_f for Gaussian codebooks, amplitude a for binary ones
    n: int
    codewords: np.ndarray
    has_origin: bool = False
    seed: object = None

    @property
    def num_messages(self) -> int:
        return self.codewords.shape[0]


def gaussian_codebook(n: int, M_int: int, P_f: float, seed=None) -> Codebook:
    """``2**M_int`` codewords with i.i.d. N(0, P_f) symbols."""
    if M_int < 1:
        raise ParameterError(f"M_int must be >= 1, got {M_int}")
    if P_f < 0:
        raise ParameterError(f"P_f must be >= 0, got {P_f}")
    rng = np.random.default_rng(seed)
    words = rng.normal(0.0, math.sqrt(P_f), size=(2 ** M_int, n)) if P_f > 0 \
        else np.zeros((2 ** M_int, n))
    return Codebook(Scheme.GAUSSIAN, P_f, n, words, False, seed)


def binary_codebook(n: int, M_int: int, a: float, seed=None) -> Codebook:
    """``2**M_int`` codewords with i.i.d. equiprobable symbols in {-a, +a}."""
    if M_int < 1:
        raise ParameterError(f"M_int must be >= 1, got {M_int}")
    if a < 0:
        raise ParameterError(f"a must be >= 0, got {a}")
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(2 ** M_int, n), dtype=np.int8) * 2 - 1
    return Codebook(Scheme.BINARY, a, n, a * signs.astype(float), False, seed)


def augment_origin(codebook: Codebook) -> Codebook:
    """Insert the all-zero codeword at index 0; message indices shift by one."""
    if codebook.has_origin:
        raise UsageError("codebook already contains the origin")
    words = np.vstack([np.zeros((1, codebook.n)), codebook.codewords])
    return replace(codebook, codewords=words, has_origin=True)


@dataclass(frozen=True)
class DecodeResult:
    slot: int | None
    message: int
    distance_sq: float


def ml_decode_slot(samples, codebook: Codebook, slot: int | None = None) -> DecodeResult:
    """Minimum-distance decoding of one slot; ties go to the lowest index."""
    y = np.asarray(samples, dtype=float)
    if y.shape != (codebook.n,):
        raise ParameterError(f"slot must have {codebook.n} samples, got shape {y.shape}")
    d2 = np.square(codebook.codewords - y).sum(axis=1)
    k = int(np.argmin(d2))
    return DecodeResult(slot, k, float(d2[k]))


def _decode_all_slots(frame: Frame, codebook: Codebook) -> tuple[np.ndarray, np.ndarray]:
    # |y - c|^2 = |y|^2 - 2 y.c + |c|^2, batched over slots
    Y = frame.slots()
    C = codebook.codewords
    d2 = np.square(Y).sum(axis=1)[:, None] - 2.0 * Y @ C.T + np.square(C).sum(axis=1)[None, :]
    k = np.argmin(d2, axis=1)
    return k, np.maximum(d2[np.arange(len(k)), k], 0.0)


@dataclass(frozen=True)
class FrameDecode:
    success: bool
    per_slot: list[DecodeResult]


def ml_decode_frame(frame: Frame, codebook: Codebook, truth=None) -> FrameDecode:
    """Decode every slot against an origin-augmented codebook.

    Success means Alice's slot decodes to the transmitted message and every
    other slot decodes to the origin. ``truth.message`` indexes the augmented
    book (so it is at least 1 when a codeword was sent).
    """
    if not codebook.has_origin:
        raise UsageError("frame decoding needs an origin-augmented codebook")
    truth = truth if truth is not None else frame.truth
    if truth is None:
        raise ParameterError("frame decoding needs ground truth to score")
    k, d2 = _decode_all_slots(frame, codebook)
    per_slot = [DecodeResult(t + 1, int(k[t]), float(d2[t])) for t in range(frame.T)]
    expected = np.zeros(frame.T, dtype=int)
    if truth.transmitted:
        expected[truth.t_A - 1] = truth.message
    return FrameDecode(bool(np.array_equal(k, expected)), per_slot)


def write_codebook_csv(codebook: Codebook, path) -> None:
    """One codeword per row, 17 significant digits."""
    lines = [",".join(format(x, ".17g") for x in row) for row in codebook.codewords]
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_codebook_csv(path, ensemble: Scheme, param: float, has_origin: bool = False) -> Codebook:
    rows = [[float(x) for x in line.split(",")]
            for line in Path(path).read_text().splitlines() if line]
    words = np.array(rows, dtype=float)
    return Codebook(Scheme(ensemble), param, words.shape[1], words, has_origin)
