import numpy as np
import pytest

from pggsolve import _kernels
from pggsolve.rng import MASK64, Stream, mix_seed, splitmix64, stream_state

# First outputs of the reference algorithms, pinned so any edit to the
# constants or the update order shows up immediately on every platform.
GOLDEN_SEED0 = (0x53175D61490B23DF, 0x61DA6F3DC380D507, 0x5C0FDF91EC9A7BFC)
GOLDEN_SEED2024 = (0x8641253F8FED82D1, 0x4B7EEEC62AF66AF9, 0x3E595FE9CF746B2A)


def test_splitmix_golden():
    state, out = splitmix64(0)
    assert state == 0x9E3779B97F4A7C15
    assert out == 0xE220A8397B1DCDAF


def test_stream_golden_sequences():
    s = Stream(0)
    assert tuple(s.next_u64() for _ in range(3)) == GOLDEN_SEED0
    s = Stream(2024)
    assert tuple(s.next_u64() for _ in range(3)) == GOLDEN_SEED2024


def test_kernel_source_matches_stream():
    # the compiled kernels carry their own uint64 implementation; both
    # sources must emit the same sequence from the same state
    for seed in (0, 1, 7, 2024, (1 << 63) + 5):
        st = stream_state(seed)
        ref = Stream(seed)
        for _ in range(200):
            assert int(_kernels.rng_next(st)) == ref.next_u64()


def test_kernel_uniform_matches_stream():
    st = stream_state(11)
    ref = Stream(11)
    for _ in range(100):
        assert float(_kernels.rng_uniform(st)) == ref.uniform()


def test_uniform_range_and_mean():
    s = Stream(5)
    xs = [s.uniform() for _ in range(20000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    assert abs(sum(xs) / len(xs) - 0.5) < 0.01


def test_below_bounds():
    s = Stream(9)
    for _ in range(2000):
        v = s.below(7)
        assert 0 <= v < 7
    s2 = Stream(9)
    hit = set(s2.below(4) for _ in range(200))
    assert hit == {0, 1, 2, 3}
    with pytest.raises(ValueError):
        Stream(0).below(0)


def test_mix_seed_order_and_args_matter():
    assert mix_seed(1, 2) != mix_seed(2, 1)
    assert mix_seed(0) != mix_seed(0, 0)
    assert mix_seed(3, 4, 5) == mix_seed(3, 4, 5)
    vals = {mix_seed(0, k) for k in range(100)}
    assert len(vals) == 100
    assert all(0 <= v <= MASK64 for v in vals)


def test_shuffle_permutes_deterministically():
    base = list(range(60))
    a = base[:]
    Stream(3).shuffle(a)
    b = base[:]
    Stream(3).shuffle(b)
    c = base[:]
    Stream(4).shuffle(c)
    assert a == b
    assert sorted(a) == base
    assert a != base
    assert c != a


def test_stream_state_roundtrip():
    s = Stream(21)
    s.next_u64()
    arr = s.state_array()
    assert arr.dtype == np.uint64 and arr.shape == (4,)
    # kernel continues exactly where the interpreted stream stands
    nxt = ref = None
    nxt = int(_kernels.rng_next(arr.copy()))
    ref = s.next_u64()
    assert nxt == ref


def test_state_never_all_zero():
    for seed in range(200):
        assert any(int(x) for x in stream_state(seed))
