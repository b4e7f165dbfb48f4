import itertools

import numpy as np
import pytest

from src.errors import (
    DivisionByZero,
    FieldTooSmall,
    MismatchedFields,
    ModulusTooLarge,
    NotPrime,
)
from src.field import (
    MAX_MODULUS,
    FieldRole,
    FieldSpec,
    as_element,
    as_vector,
    check_modulus,
    check_modulus_bound,
    decode_shares,
    dot,
    encode_shares,
    field_op,
)


def test_arithmetic_wraps_modulo_q(gf7):
    a, b = gf7(5), gf7(4)
    assert a + b == 2
    assert a - b == 1
    assert b - a == 6
    assert a * b == 6
    assert -a == 2
    assert a ** 2 == 4
    assert a ** -1 == 3


def test_division_and_inverse(gf7):
    assert gf7(3).inverse() == 5
    assert gf7(6) / gf7(3) == 2
    with pytest.raises(DivisionByZero):
        gf7(0).inverse()
    with pytest.raises(ZeroDivisionError):
        gf7(1) / gf7(0)


def test_elements_of_different_fields_do_not_mix(gf7):
    with pytest.raises(MismatchedFields):
        gf7(1) + FieldSpec(11)(1)
    with pytest.raises(MismatchedFields):
        field_op(gf7(1), FieldSpec(11)(1), "mul")


def test_field_op_kinds(gf7):
    x, y = gf7(3), gf7(2)
    assert [field_op(x, y, k) for k in ("add", "sub", "mul", "div")] == [5, 1, 6, 5]
    with pytest.raises(ValueError):
        field_op(x, y, "pow")


def test_modulus_must_be_prime():
    with pytest.raises(NotPrime):
        FieldSpec(8)
    with pytest.raises(NotPrime):
        FieldSpec(1)


def test_elements_are_immutable_and_hashable(gf7):
    x = gf7(3)
    with pytest.raises(AttributeError):
        x.value = 4
    assert {gf7(3), gf7(10)} == {gf7(3)}
    assert int(x) == 3 and bool(gf7(0)) is False


def test_authentication_field_is_next_prime_above_bounds(gf7):
    F = FieldSpec.authentication_for(gf7, 3, 8)
    # max(7^3, 2^8) = 343
    assert F.modulus == 347
    assert F.role is FieldRole.AUTHENTICATION
    assert FieldSpec.authentication_for(gf7, 1, 8).modulus == 257


def test_modulus_bound():
    check_modulus_bound(FieldSpec(2 ** 61 - 1))
    big = FieldSpec(2 ** 64 + 13)
    assert big.modulus > MAX_MODULUS
    with pytest.raises(ModulusTooLarge):
        check_modulus_bound(big)


def test_dot_product(gf7):
    assert dot(gf7.vector([1, 2, 3]), gf7.vector([4, 5, 6])) == 32 % 7
    with pytest.raises(ValueError):
        dot(gf7.vector([1]), gf7.vector([1, 2]))


def test_share_encoding_is_base_q_little_endian(gf7):
    F = FieldSpec(347)
    encoded = encode_shares(gf7.vector([5, 0, 2]), F)
    assert encoded.value == 5 + 0 * 7 + 2 * 49
    assert decode_shares(encoded, gf7, 3) == gf7.vector([5, 0, 2])


def test_share_encoding_needs_a_large_enough_field(gf7):
    with pytest.raises(FieldTooSmall):
        encode_shares(gf7.vector([1, 2, 3]), FieldSpec(337))
    with pytest.raises(FieldTooSmall):
        decode_shares(FieldSpec(347)(346), gf7, 3)


def test_received_values_are_parsed_strictly(gf7):
    assert as_element(3, gf7) == 3
    assert as_element(7, gf7) is None
    assert as_element(True, gf7) is None
    assert as_element(FieldSpec(11)(3), gf7) is None
    assert as_vector((1, 2), gf7, 2) == gf7.vector([1, 2])
    assert as_vector([1, 2], gf7, 2) is None
    assert as_vector((1, 2), gf7, 3) is None


@pytest.mark.parametrize("modulus", [MAX_MODULUS, 18446744073709551629])
def test_moduli_from_two_to_the_64_are_rejected(modulus):
    with pytest.raises(ModulusTooLarge, match="authentication modulus"):
        check_modulus(modulus, FieldRole.AUTHENTICATION)
    assert check_modulus(MAX_MODULUS - 59) == MAX_MODULUS - 59


@pytest.mark.parametrize("modulus", [7, 2 ** 61 - 1])
def test_field_laws_hold_on_random_triples(modulus):
    spec = FieldSpec(modulus)
    rng = np.random.default_rng(modulus)
    for a, b, c in rng.integers(modulus, size=(1000, 3)).tolist():
        a, b, c = spec(a), spec(b), spec(c)
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a + b == b + a and a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert a + (-a) == 0 and a - b == a + (-b)
        if a:
            assert a * a.inverse() == 1
            assert (b / a) * a == b


def test_share_encoding_is_a_bijection_on_all_vectors():
    source = FieldSpec(3)
    target = FieldSpec(29, FieldRole.AUTHENTICATION)
    encodings = []
    for values in itertools.product(range(3), repeat=3):
        shares = source.vector(values)
        encoded = encode_shares(shares, target)
        assert decode_shares(encoded, source, 3) == shares
        encodings.append(encoded.value)
    assert sorted(encodings) == list(range(27))
