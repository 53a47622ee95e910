import base58
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memewatch.exceptions import AddressError, InputError
from memewatch.validation import (address_problem, b58decode, b58encode, check_scalar,
                                  is_valid_address, validate_address)


def test_evm_examples():
    assert is_valid_address("ethereum", "0x" + "a" * 40)
    assert address_problem("bsc", "0x000comingsoon") == "bad-length"
    assert address_problem("base", "0X" + "a" * 40) == "bad-prefix"
    assert address_problem("ethereum", "0x" + "g" * 40) == "bad-charset"
    assert address_problem("tron", "0x" + "a" * 40) == "bad-chain"


def test_solana_examples():
    assert is_valid_address("solana", "11111111111111111111111111111111")
    assert address_problem("solana", "0OIl") == "bad-charset"
    assert address_problem("solana", "1111") == "bad-decode"
    assert address_problem("solana", "") == "bad-charset"
    # pump.fun style mint addresses are ordinary base58 keys
    assert is_valid_address("solana", b58encode(bytes(range(32))))


def test_validate_address_raises_with_reason():
    with pytest.raises(AddressError) as info:
        validate_address("bsc", "0x000comingsoon")
    assert info.value.reason == "bad-length"
    assert isinstance(info.value, InputError)


def test_zero_key_matches_reference_decoder():
    text = "11111111111111111111111111111111"
    assert b58decode(text) == base58.b58decode(text) == bytes(32)


@given(st.binary(max_size=64))
def test_base58_matches_reference_codec(raw):
    assert b58encode(raw) == base58.b58encode(raw).decode()
    assert b58decode(b58encode(raw)) == raw


@given(st.binary(min_size=32, max_size=32))
def test_any_32_byte_key_is_a_valid_solana_address(raw):
    assert is_valid_address("solana", base58.b58encode(raw).decode())


@given(st.binary(min_size=1, max_size=64).filter(lambda b: len(b) != 32))
def test_other_lengths_fail_to_decode(raw):
    assert address_problem("solana", base58.b58encode(raw).decode()) == "bad-decode"


def test_check_scalar():
    assert check_scalar(5, "x", low=0, high=10) == 5
    with pytest.raises(InputError):
        check_scalar(0, "x", low=0, low_inclusive=False)
    with pytest.raises(InputError):
        check_scalar(2.5, "x", integer=True)
    with pytest.raises(InputError):
        check_scalar("a", "x")
