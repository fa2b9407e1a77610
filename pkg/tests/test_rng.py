import numpy as np

from inkfab import rng


def test_splitmix64_reference_sequence():
    # first outputs of the reference splitmix64 stream for seed 0
    sm = rng.SplitMix64(0)
    assert sm.next_u64() == 0xE220A8397B1DCDAF
    assert sm.next_u64() == 0x6E789E6AA1B965F4
    assert sm.next_u64() == 0x06C45D188009454F


def test_counter_stream_matches_sequential():
    seed = 0xDEADBEEFCAFEF00D
    sm = rng.SplitMix64(seed)
    seq = [sm.next_u64() for _ in range(100)]
    vec = rng.stream_u64(seed, np.arange(100, dtype=np.uint64))
    assert [int(v) for v in vec] == seq


def test_stream_order_independence():
    idx = np.array([7, 3, 9], dtype=np.uint64)
    a = rng.stream_u64(42, idx)
    b = rng.stream_u64(42, idx[::-1])[::-1]
    assert list(a) == list(b)


def test_unit_range():
    u = rng.stream_unit(1, np.arange(10_000, dtype=np.uint64))
    assert np.all(u >= 0.0) and np.all(u < 1.0)
    assert abs(u.mean() - 0.5) < 0.02


def test_xoshiro_deterministic_and_spread():
    a = rng.Xoshiro256StarStar(123)
    b = rng.Xoshiro256StarStar(123)
    seq_a = [a.next_u64() for _ in range(50)]
    seq_b = [b.next_u64() for _ in range(50)]
    assert seq_a == seq_b
    assert len(set(seq_a)) == 50


def test_gaussian_moments():
    z = rng.gaussian_stream(7, 200_000, 2, 0)
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1.0) < 0.01


def test_poisson_moments():
    # independent check: sample mean approaches lambda for chunked sampler
    gen = rng.Xoshiro256StarStar(99)
    lam = 40.0
    draws = [rng.poisson(lam, gen) for _ in range(3000)]
    mean = sum(draws) / len(draws)
    var = sum((d - mean) ** 2 for d in draws) / (len(draws) - 1)
    assert abs(mean - lam) < 3 * (lam / len(draws)) ** 0.5 * 2
    assert abs(var - lam) < lam * 0.15


def test_shuffle_deterministic():
    gen1 = rng.Xoshiro256StarStar(5)
    gen2 = rng.Xoshiro256StarStar(5)
    x1 = list(range(20))
    x2 = list(range(20))
    gen1.shuffle(x1)
    gen2.shuffle(x2)
    assert x1 == x2
    assert sorted(x1) == list(range(20))
