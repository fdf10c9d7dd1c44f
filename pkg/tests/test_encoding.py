"""Canonical encoding: round trips, injectivity, stability."""

import pytest
from hypothesis import given, strategies as st

from oilchain.encoding import canon_decode, canon_encode, digest

# values the encoder accepts
scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**70), max_value=2**70),
    st.binary(max_size=64),
    st.text(max_size=64),
)
values = st.recursive(
    scalars,
    lambda inner: st.one_of(
        st.lists(inner, max_size=6),
        st.dictionaries(st.text(max_size=12), inner, max_size=6),
    ),
    max_leaves=24,
)


@given(values)
def test_round_trip(value):
    decoded = canon_decode(canon_encode(value))
    assert _normalize(value) == decoded


def _normalize(value):
    # decode returns lists for both lists and tuples
    if isinstance(value, tuple):
        return [_normalize(v) for v in value]
    if isinstance(value, list):
        return [_normalize(v) for v in value]
    if isinstance(value, dict):
        return {k: _normalize(v) for k, v in value.items()}
    return value


def test_dict_key_order_is_irrelevant():
    assert canon_encode({"a": 1, "b": 2}) == canon_encode({"b": 2, "a": 1})


@pytest.mark.parametrize("left,right", [
    (1, True),
    (0, False),
    ("1", 1),
    (b"1", "1"),
    ("", b""),
    (None, 0),
    ([1, 2], [[1], 2]),
    ([1, 2], (2, 1)),
    ({"a": 1}, [["a", 1]]),
    (-1, 1),
])
def test_distinct_values_encode_distinctly(left, right):
    assert canon_encode(left) != canon_encode(right)


def test_unsupported_type_raises():
    with pytest.raises(TypeError):
        canon_encode(1.5)
    with pytest.raises(TypeError):
        canon_encode({1: "a"})


def test_truncated_input_raises():
    encoded = canon_encode(["abc", 123])
    for cut in range(len(encoded)):
        with pytest.raises(ValueError):
            canon_decode(encoded[:cut])


def test_trailing_garbage_raises():
    with pytest.raises(ValueError):
        canon_decode(canon_encode(5) + b"x")


def test_digest_is_sha256_of_encoding():
    import hashlib

    value = {"k": [1, "two", b"three"]}
    assert digest(value) == hashlib.sha256(canon_encode(value)).digest()
