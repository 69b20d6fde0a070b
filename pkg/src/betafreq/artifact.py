"""Canonical JSON files for expansions.

Layout::

    {"format": "betafreq-expansion/1",
     "header": {"M", "n", "x", "mode", "targets", "beta": {"poly", "interval"} | {"decimal"}},
     "digits": {"length", "chunk", "chunks": ["0110...", ...]},
     "checkpoints": [{"N", "counts", "round", "kind", "target", "pair", "max_abs_discrepancy"}],
     "stats": {...}}

All rationals are strings (``"3/7"``), digits are base-36 characters, and the
file is written with sorted keys and fixed separators so that reading and
re-writing reproduces it byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .dynamics import _DIGIT_CHARS, BetaContext
from .errors import ParseError
from .precision import CertifiedReal, RootDescriptor, parse_rational

FORMAT = "betafreq-expansion/1"
CHUNK = 4096
_DIGIT_VALUE = {c: i for i, c in enumerate(_DIGIT_CHARS)}


def beta_to_json(beta: CertifiedReal) -> dict:
    q = beta.rational
    if q is not None:
        return {"decimal": str(q)}
    root = beta.root
    if root is None:
        raise ParseError("beta must be rational or an isolated polynomial root to be stored")
    return {"poly": [int(c) for c in root.coefficients], "interval": [str(root.lo), str(root.hi)]}


def beta_from_json(spec: dict) -> CertifiedReal:
    from .precision import isolate_root

    if not isinstance(spec, dict):
        raise ParseError("beta must be an object")
    if "decimal" in spec:
        return CertifiedReal.from_rational(_parse_q(spec["decimal"]))
    try:
        coeffs = [int(c) for c in spec["poly"]]
        lo, hi = (_parse_q(v) for v in spec["interval"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed beta specification: {exc}") from exc
    return CertifiedReal.from_root(isolate_root(coeffs, (lo, hi)))


def _parse_q(text) -> Fraction:
    if not isinstance(text, str):
        raise ParseError(f"expected a rational string, got {text!r}")
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}") from exc


def encode_digits(digits: bytes, chunk: int = CHUNK) -> dict:
    text = "".join(_DIGIT_CHARS[d] for d in digits)
    return {
        "length": len(digits),
        "chunk": chunk,
        "chunks": [text[i : i + chunk] for i in range(0, len(text), chunk)],
    }


def decode_digits(block: dict, M: int) -> bytes:
    try:
        chunks, length = block["chunks"], block["length"]
    except (KeyError, TypeError) as exc:
        raise ParseError("digit block needs 'chunks' and 'length'") from exc
    out = bytearray()
    for ci, chunk in enumerate(chunks):
        if not isinstance(chunk, str):
            raise ParseError(f"digit chunk {ci} is not a string")
        for c in chunk:
            v = _DIGIT_VALUE.get(c)
            if v is None or v > M:
                raise ParseError(f"invalid digit {c!r} at index {len(out)} (alphabet 0..{M})")
            out.append(v)
    if len(out) != length:
        raise ParseError(f"digit count {len(out)} does not match declared length {length}")
    return bytes(out)


@dataclass
class Artifact:
    """In-memory form of an expansion file."""

    M: int
    n: int
    beta: dict
    x: Fraction
    mode: str
    targets: list
    digits: bytes
    checkpoints: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    chunk: int = CHUNK

    def context(self) -> BetaContext:
        return BetaContext.create(self.M, beta_from_json(self.beta), self.n)

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "header": {
                "M": self.M,
                "n": self.n,
                "beta": self.beta,
                "x": str(self.x),
                "mode": self.mode,
                "targets": [[str(v) for v in t] for t in self.targets],
            },
            "digits": encode_digits(self.digits, self.chunk),
            "checkpoints": self.checkpoints,
            "stats": self.stats,
        }

    def dumps(self) -> str:
        return canonical(self.to_json())

    def write(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"


def _checkpoint_json(cp) -> dict:
    return {
        "N": cp.N,
        "counts": list(cp.counts),
        "round": cp.round,
        "kind": cp.kind,
        "target": cp.target,
        "pair": list(cp.pair) if cp.pair else None,
        "max_abs_discrepancy": str(cp.max_abs_discrepancy),
    }


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def from_stream(stream) -> Artifact:
    """Package an :class:`~betafreq.synthesis.ExpansionStream`."""
    ctx = stream.ctx
    return Artifact(
        M=ctx.M,
        n=ctx.n,
        beta=beta_to_json(ctx.beta),
        x=stream.x,
        mode=stream.mode,
        targets=[tuple(t) for t in stream.targets],
        digits=stream.digits,
        checkpoints=[_checkpoint_json(c) for c in stream.checkpoints],
        stats=_jsonable(stream.stats),
    )


def loads(text: str) -> Artifact:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("format") != FORMAT:
        raise ParseError(f"not a {FORMAT} file")
    try:
        h = obj["header"]
        M, n = h["M"], h["n"]
        if not isinstance(M, int) or not isinstance(n, int) or M < 1 or n < 1:
            raise ParseError("M and n must be positive integers")
        mode = h["mode"]
        if mode not in ("target", "oscillate"):
            raise ParseError(f"unknown mode {mode!r}")
        targets = [tuple(_parse_q(v) for v in t) for t in h["targets"]]
        x = _parse_q(h["x"])
        beta = h["beta"]
        digits = decode_digits(obj["digits"], M)
        chunk = obj["digits"].get("chunk", CHUNK)
        checkpoints = obj["checkpoints"]
        stats = obj.get("stats", {})
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from exc
    if not isinstance(checkpoints, list):
        raise ParseError("checkpoints must be a list")
    for cp in checkpoints:
        if not isinstance(cp, dict) or "N" not in cp or "counts" not in cp:
            raise ParseError("each checkpoint needs N and counts")
    return Artifact(M, n, beta, x, mode, targets, digits, checkpoints, stats, chunk)


def read(path) -> Artifact:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads(text)
