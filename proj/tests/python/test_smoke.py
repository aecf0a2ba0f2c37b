import math
import random

import pytest

import rngaudit


def test_streams_are_deterministic():
    src = rngaudit.BitSource("mt19937", "5eed", 0)
    words = [src.take_word() for _ in range(3)]
    assert all(0 <= w < 2**32 for w in words)
    again = rngaudit.BitSource("mt19937", "5eed", 0)
    assert [again.take_word() for _ in range(3)] == words
    other = rngaudit.BitSource("mt19937", "5eed", 1)
    assert [other.take_word() for _ in range(3)] != words


def test_bit_order_msb_first():
    src = rngaudit.BitSource("mt19937", "5eed", 4)
    bits = src.take_bits(32)
    word = rngaudit.BitSource("mt19937", "5eed", 4).take_word()
    assert int("".join(map(str, bits)), 2) == word
    assert src.bits_consumed == 32


def test_numerics_against_math():
    assert rngaudit.erfc(1.0) == pytest.approx(math.erfc(1.0), rel=1e-14)
    assert rngaudit.chi2_sf(2, 3.0) == pytest.approx(math.exp(-1.5), rel=1e-14)
    assert rngaudit.igamc(0.5, 4.0) == pytest.approx(math.erfc(2.0), rel=1e-13)
    total = sum(rngaudit.binom_pmf(1000, 0.99, j) for j in range(1001))
    assert total == pytest.approx(1.0, abs=1e-10)
    assert rngaudit.binom_pmf(10, 0.5, 3) == pytest.approx(math.comb(10, 3) / 1024)


def test_categories():
    ranges, probs = rngaudit.build_categories(1000, 0.01, 1000, 5.0)
    assert len(ranges) == 17
    assert ranges[0] == (0, 981)
    assert ranges[-1] == (997, 1000)
    assert sum(probs) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        rngaudit.build_categories(100, 0.01, 8, 5.0)


def test_frequency_example():
    bits = [int(c) for c in "1011010101"]
    (p,) = rngaudit.run_test("frequency", bits)
    assert p == pytest.approx(0.527089, abs=1e-6)


def test_dft_variants_differ():
    rng = random.Random(3)
    bits = [rng.getrandbits(1) for _ in range(10000)]
    (orig,) = rngaudit.run_test("dft", bits, "original")
    (mod,) = rngaudit.run_test("dft", bits, "modified")
    assert 0.0 <= orig <= 1.0 and 0.0 <= mod <= 1.0
    assert orig != mod


def test_small_exact_values():
    assert rngaudit.savir2_cell_probs(2, 2) == [0.75, 0.25]
    assert rngaudit.excursion_pi(4, 4) == pytest.approx(0.0105, abs=5e-5)
    assert "sample_corr" in rngaudit.test_ids()


def test_sample_corr_constant():
    assert rngaudit.sample_corr_test([0.5] * 20, 1, "modified") == 1.0


def test_three_level_identity():
    (rep,) = rngaudit.run_three_level("identity", n=1, N=100, Nprime=100, threads=2)
    assert len(rep["T"]) == 100
    assert sum(rep["Y"]) == 100
    assert 0.0 <= rep["pvalue3"] <= 1.0
    (same,) = rngaudit.run_three_level("identity", n=1, N=100, Nprime=100, threads=1)
    assert same["T"] == rep["T"]


def test_exhausted_file(tmp_path):
    path = tmp_path / "tiny.bin"
    path.write_bytes(b"abc")
    src = rngaudit.BitSource(f"file:{path}")
    with pytest.raises(rngaudit.InsufficientInput):
        src.take_bits(100)


def test_bad_test_name():
    with pytest.raises(ValueError):
        rngaudit.run_test("nope", [0, 1])
