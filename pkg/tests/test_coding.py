import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covert_timing.bounds import decoding_bound
from covert_timing.channel import Frame, FrameTruth, transmit_frame
from covert_timing.coding import (UsageError, augment_origin, binary_codebook, gaussian_codebook,
                                  ml_decode_frame, ml_decode_slot, read_codebook_csv,
                                  write_codebook_csv)
from covert_timing.harness import estimate_decoding_error, wilson_ci
from covert_timing.model import ScenarioParams, Scheme


class TestCodebooks:
    def test_zero_power(self):
        assert not gaussian_codebook(5, 2, 0.0, 1).codewords.any()
        assert not binary_codebook(5, 2, 0.0, 1).codewords.any()

    def test_gaussian_variance(self):
        book = gaussian_codebook(10 ** 4, 1, 1.0, seed=2)
        assert book.codewords[0].var() == pytest.approx(1.0, rel=0.1)
        assert book.num_messages == 2

    def test_deterministic(self):
        assert np.array_equal(gaussian_codebook(8, 3, 1.0, 9).codewords,
                              gaussian_codebook(8, 3, 1.0, 9).codewords)
        assert np.array_equal(binary_codebook(8, 3, 1.0, 9).codewords,
                              binary_codebook(8, 3, 1.0, 9).codewords)

    def test_binary_alphabet_and_balance(self):
        book = binary_codebook(10 ** 4, 1, 0.7, seed=3)
        assert np.all(np.abs(book.codewords) == 0.7)
        assert abs((book.codewords[0] > 0).mean() - 0.5) < 0.02


class TestOrigin:
    def test_augment(self):
        book = augment_origin(binary_codebook(6, 1, 0.5, 1))
        assert book.num_messages == 3 and book.has_origin
        assert not book.codewords[0].any()
        d2 = np.square(book.codewords[1:]).sum(axis=1)
        assert np.allclose(d2, 6 * 0.25)

    def test_twice(self):
        with pytest.raises(UsageError):
            augment_origin(augment_origin(binary_codebook(6, 1, 0.5, 1)))


class TestDecodeSlot:
    def test_noiseless(self):
        book = gaussian_codebook(10, 3, 1.0, 4)
        for k in range(book.num_messages):
            r = ml_decode_slot(book.codewords[k], book)
            assert r.message == k and r.distance_sq == 0.0

    def test_origin(self):
        book = augment_origin(binary_codebook(10, 2, 1.0, 4))
        assert ml_decode_slot(np.zeros(10), book).message == 0

    def test_tie_goes_to_lowest(self):
        from covert_timing.coding import Codebook
        book = Codebook(Scheme.BINARY, 1.0, 2, np.array([[5.0, 5.0], [1.0, 0.0], [-1.0, 0.0]]))
        assert ml_decode_slot(np.zeros(2), book).message == 1

    @settings(max_examples=50)
    @given(seed=st.integers(0, 2 ** 32 - 1), frac=st.floats(0, 0.999))
    def test_inside_half_min_distance(self, seed, frac):
        g = np.random.default_rng(seed)
        book = gaussian_codebook(6, 3, 1.0, g)
        C = book.codewords
        dmin = min(np.linalg.norm(C[i] - C[j]) for i in range(len(C)) for j in range(i))
        k = int(g.integers(0, len(C)))
        z = g.normal(size=6)
        z *= frac * dmin / 2 / np.linalg.norm(z)
        assert ml_decode_slot(C[k] + z, book).message == k


class TestDecodeFrame:
    def test_noiseless_success(self):
        book = augment_origin(gaussian_codebook(5, 2, 1.0, 6))
        p = ScenarioParams(5, 4)
        f = transmit_frame(book.codewords[3], 2, 0, p, np.random.default_rng(0), noise_var=0.0,
                           message=3)
        out = ml_decode_frame(f, book)
        assert out.success
        assert [r.message for r in out.per_slot] == [0, 3, 0, 0]

    def test_quiet_frame(self):
        book = augment_origin(binary_codebook(5, 2, 1.0, 6))
        f = Frame(np.zeros(20), 5, 4, FrameTruth(False))
        assert ml_decode_frame(f, book).success

    def test_spurious_slot_fails(self):
        book = augment_origin(binary_codebook(5, 2, 1.0, 6))
        x = np.zeros(20)
        x[5:10] = book.codewords[1]
        x[15:20] = book.codewords[2]
        assert not ml_decode_frame(Frame(x, 5, 4, FrameTruth(True, 2, 0, 1)), book).success

    def test_needs_origin(self):
        with pytest.raises(UsageError):
            ml_decode_frame(Frame(np.zeros(4), 2, 2, FrameTruth(False)), binary_codebook(2, 1, 1.0))

    def test_appending_quiet_slots(self):
        # frame success is the conjunction of per-slot outcomes
        g = np.random.default_rng(8)
        book = augment_origin(binary_codebook(30, 2, 1.0, g))
        base = transmit_frame(book.codewords[2], 1, 0, ScenarioParams(30, 2), g, receiver="bob",
                              noise_var=0.1, message=2)
        longer = Frame(np.concatenate([base.samples, 0.3 * g.normal(size=60)]), 30, 4, base.truth)
        a, b = ml_decode_frame(base, book), ml_decode_frame(longer, book)
        tail_ok = all(r.message == 0 for r in b.per_slot[2:])
        assert b.success == (a.success and tail_ok)


def test_codebook_csv_round_trip(tmp_path):
    book = gaussian_codebook(7, 2, 0.3, 11)
    write_codebook_csv(book, tmp_path / "book.csv")
    back = read_codebook_csv(tmp_path / "book.csv", Scheme.GAUSSIAN, 0.3)
    assert np.array_equal(back.codewords, book.codewords)


@pytest.mark.slow
@pytest.mark.parametrize("n,a2,M", [(200, 0.0536, 2), (100, 0.2, 2), (60, 0.5, 3),
                                    (40, 1.0, 4), (150, 0.15, 1)])
def test_known_slot_error_below_bound(n, a2, M):
    p = ScenarioParams(n, 10, scheme="binary", slot_known_to_bob=True)
    bound = decoding_bound(Scheme.BINARY, True, M, n, 10, a2, 1.0)
    assert not bound.vacuous
    s = estimate_decoding_error(p, 10_000, seed=n, M_int=M, power=a2)
    assert s.p_e_bob <= bound.value + (s.wilson_ci[1] - s.p_e_bob)
