import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from betafreq.artifact import (
    Artifact,
    beta_from_json,
    beta_to_json,
    canonical,
    decode_digits,
    encode_digits,
    from_stream,
    loads,
    read,
)
from betafreq.dynamics import BetaContext, parse_beta
from betafreq.errors import ParseError
from betafreq.precision import Ordering, decide
from betafreq.synthesis import synthesize

F = Fraction


@pytest.fixture(scope="module")
def artifact():
    ctx = BetaContext.create(2, parse_beta("auto", 3), 3)
    stream = synthesize(ctx, F(5, 4), (F(1, 4), F(1, 4), F(1, 2)), 9000)
    return from_stream(stream)


def test_round_trip_is_byte_identical(artifact, tmp_path):
    path = tmp_path / "a.json"
    artifact.write(path)
    text = path.read_text()
    again = read(path)
    assert again.dumps() == text
    assert again.digits == artifact.digits
    assert again.targets == artifact.targets
    assert text.endswith("\n")


def test_chunking(artifact):
    obj = json.loads(artifact.dumps())
    assert obj["digits"]["length"] == len(artifact.digits)
    assert all(len(c) == obj["digits"]["chunk"] for c in obj["digits"]["chunks"][:-1])


def test_beta_specs_round_trip():
    for spec in ("3/2", "auto", "golden"):
        beta = parse_beta(spec, 2)
        back = beta_from_json(beta_to_json(beta))
        assert decide(back, beta) is Ordering.EQUAL
    assert beta_to_json(parse_beta("1.25")) == {"decimal": "5/4"}


def test_context_rebuilt(artifact):
    ctx = artifact.context()
    assert (ctx.M, ctx.n) == (2, 3)
    assert ctx.validated


@given(st.integers(min_value=1, max_value=35).flatmap(lambda M: st.tuples(st.just(M), st.binary(max_size=300))))
def test_digit_codec(case):
    M, raw = case
    digits = bytes(b % (M + 1) for b in raw)
    block = encode_digits(digits, chunk=64)
    assert decode_digits(block, M) == digits


def test_digit_codec_errors():
    with pytest.raises(ParseError):
        decode_digits({"length": 3, "chunks": ["012"]}, 1)
    with pytest.raises(ParseError):
        decode_digits({"length": 4, "chunks": ["010"]}, 1)
    with pytest.raises(ParseError):
        decode_digits({"chunks": ["010"]}, 1)


def test_malformed_files(artifact):
    with pytest.raises(ParseError):
        loads("{not json")
    with pytest.raises(ParseError):
        loads(canonical({"format": "something-else"}))
    obj = json.loads(artifact.dumps())
    del obj["header"]["x"]
    with pytest.raises(ParseError):
        loads(canonical(obj))
    obj = json.loads(artifact.dumps())
    obj["header"]["mode"] = "unknown"
    with pytest.raises(ParseError):
        loads(canonical(obj))


def test_canonical_form_is_stable():
    art = Artifact(1, 1, {"decimal": "3/2"}, F(1), "target", [(F(1, 2), F(1, 2))], bytes([0, 1, 1]))
    text = art.dumps()
    assert text == canonical(json.loads(text))
    assert " " not in text.strip()
