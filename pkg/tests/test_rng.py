import numpy as np

from ngmca.rng import derive_key, derive_seed, stream


def test_same_parts_same_stream():
    x = stream(7, "init").standard_normal(16)
    y = stream(7, "init").standard_normal(16)
    np.testing.assert_array_equal(x, y)


def test_different_parts_different_stream():
    x = stream(7, "init").standard_normal(16)
    y = stream(7, "noise").standard_normal(16)
    assert not np.array_equal(x, y)


def test_derive_seed_is_64_bit():
    for parts in [(0,), (1, "a"), ("cell", 0.5, 3)]:
        s = derive_seed(*parts)
        assert 0 <= s < 2**64


def test_derive_key_sensitive_to_order():
    assert derive_key("a", "b") != derive_key("b", "a")


def test_derive_key_no_concatenation_collision():
    # ("ab",) and ("a", "b") must not hash alike
    assert derive_key("ab") != derive_key("a", "b")
