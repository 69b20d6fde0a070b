from fractions import Fraction
from itertools import islice, product

import pytest

from betafreq.artifact import from_stream, loads
from betafreq.balancer import init_balancer, step_balancer
from betafreq.dynamics import BetaContext, build_geometry, parse_beta
from betafreq.errors import DomainError, ParseError, PrecisionBudgetExceeded
from betafreq.oracle import branching_profile, enumerate_prefixes, replay_admissible, validate_expansion
from betafreq.synthesis import synthesize

F = Fraction


def brute_force(beta: Fraction, M: int, x: Fraction, depth: int) -> set:
    """All admissible words by exhaustive search in exact arithmetic."""
    top = M / (beta - 1)
    out = set()
    for w in product(range(M + 1), repeat=depth):
        y = x
        for d in w:
            y = beta * y - d
            if not 0 <= y <= top:
                break
        else:
            out.add(bytes(w))
    return out


def test_zero_has_one_branch():
    ctx = BetaContext.create(2, parse_beta("auto", 2), 2)
    tree = enumerate_prefixes(ctx, 0, 12)
    assert tree.counts == [1] * 12
    assert tree.prefixes(12) == [bytes(12)]


def test_top_has_one_branch():
    ctx = BetaContext.create(2, parse_beta("auto", 2), 2)
    tree = enumerate_prefixes(ctx, ctx.upper, 12)
    assert tree.counts == [1] * 12
    assert tree.prefixes(12) == [bytes([2] * 12)]


def test_golden_ratio_depth_two():
    ctx = BetaContext.create(1, parse_beta("golden"), 1)
    tree = enumerate_prefixes(ctx, 1, 2)
    assert set(tree.prefixes(2)) == {bytes((1, 0)), bytes((1, 1)), bytes((0, 1))}


@pytest.mark.parametrize("beta,M,x", [(F(3, 2), 2, F(7, 5)), (F(13, 10), 1, F(1, 2)), (F(7, 4), 3, F(2))])
def test_matches_exhaustive_search(beta, M, x):
    ctx = BetaContext.create(M, beta, 1)
    depth = 7 if M == 3 else 10
    tree = enumerate_prefixes(ctx, x, depth)
    assert set(tree.prefixes(depth)) == brute_force(beta, M, x, depth)


def test_irrational_base_matches_rational_neighbours():
    # 400-bit floats are far more accurate than 12 steps need; no ties occur at x = 7/10
    import mpmath

    with mpmath.workprec(400):
        expected = _golden_prefixes(mpmath)
    ctx = BetaContext.create(1, parse_beta("golden"), 1)
    tree = enumerate_prefixes(ctx, F(7, 10), 12)
    assert set(tree.prefixes(12)) == expected


def _golden_prefixes(mpmath):
    phi = (1 + mpmath.sqrt(5)) / 2
    expected = set()
    for w in product((0, 1), repeat=12):
        y = mpmath.mpf(7) / 10
        ok = True
        for d in w:
            y = phi * y - d
            if not 0 <= y <= phi:
                ok = False
                break
        if ok:
            expected.add(bytes(w))
    return expected


def test_levels_extend_previous_levels():
    ctx = BetaContext.create(2, F(3, 2), 1)
    tree = enumerate_prefixes(ctx, F(6, 5), 9)
    for d in range(1, 9):
        parents = set(tree.prefixes(d))
        assert all(child[:-1] in parents for child in tree.prefixes(d + 1))


def test_branching_grows_below_golden_constant():
    ctx = BetaContext.create(1, F(3, 2), 1)
    c = branching_profile(ctx, F(1), 15)
    assert c[-1] >= 2
    assert all(a <= b for a, b in zip(c, c[1:]))
    assert any(a < b for a, b in zip(c, c[1:]))


def test_near_unique_expansions_above_threshold():
    ctx = BetaContext.create(1, F(19, 10), 1)
    top = F(10, 9)
    found = [
        F(i, 200)
        for i in range(1, 222)
        if top / 4 <= F(i, 200) <= 3 * top / 4 and max(branching_profile(ctx, F(i, 200), 15)) == 1
    ]
    assert found


def test_enumeration_limits():
    ctx = BetaContext.create(1, F(3, 2), 1)
    with pytest.raises(PrecisionBudgetExceeded):
        enumerate_prefixes(ctx, 1, 30)
    with pytest.raises(DomainError):
        enumerate_prefixes(ctx, 3, 5)


def test_pair_restricted_tree_contains_balancer_stream():
    ctx = BetaContext.create(2, parse_beta("auto", 2), 2)
    g = build_geometry(ctx, 1, 2)
    x = (g.D_pair.lo.upper(128) + g.D_pair.hi.lower(128)) / 2
    state = init_balancer(ctx, 1, 2, F(1, 2), x)
    prefix = bytes(state.connector) + bytes(islice(step_balancer(state), 16))
    prefix = prefix[:16]
    tree = enumerate_prefixes(ctx, x, 16, alphabet=(1, 2), interval=g.I_pair)
    assert tree.contains(prefix)
    assert all(set(p) <= {1, 2} for p in tree.prefixes(16))


# --------------------------------------------------------------------------- validation


@pytest.fixture(scope="module")
def small_artifact():
    ctx = BetaContext.create(2, parse_beta("auto", 2), 2)
    stream = synthesize(ctx, F(3, 2), (F(1, 3), F(1, 3), F(1, 3)), 5000)
    return ctx, from_stream(stream)


def test_valid_artifact(small_artifact):
    ctx, art = small_artifact
    report = validate_expansion(ctx, art)
    assert report.ok
    assert report.reconstruction_ok and report.admissible
    assert report.checkpoint_mismatches == []
    assert report.to_json()["violations"] == []


def test_flipped_digit_detected(small_artifact):
    ctx, art = small_artifact
    digits = bytearray(art.digits)
    i = 2500
    digits[i] = 0 if digits[i] else 1
    bad = loads(art.dumps())
    bad.digits = bytes(digits)
    report = validate_expansion(ctx, bad)
    assert not report.ok
    assert not report.reconstruction_ok
    assert report.first_violation is not None and report.first_violation > i
    kinds = {v["kind"] for v in report.violations}
    assert {"admissibility", "reconstruction", "checkpoint"} <= kinds


def test_digit_above_alphabet_is_a_parse_error(small_artifact):
    _, art = small_artifact
    text = art.dumps()
    corrupted = text.replace('"chunks":["', '"chunks":["3', 1)
    with pytest.raises(ParseError):
        loads(corrupted)


def test_replay_reports_first_exit():
    ctx = BetaContext.create(1, F(3, 2), 1)
    assert replay_admissible(ctx, F(1), [1, 0, 1]) is None
    # 1 -> T_1 -> 1/2 -> T_1 -> -1/4
    assert replay_admissible(ctx, F(1), [1, 1, 0]) == 2
