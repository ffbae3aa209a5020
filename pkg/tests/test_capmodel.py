"""Model cap operator: mode counts, index conventions, gluing ledger."""

import math

import pytest

from brakeindex.capmodel import (
    NEGATIVE,
    POSITIVE,
    Boundary,
    CapSpec,
    GluePiece,
    cap_index,
    cap_kernel_cokernel,
    glue,
    riemann_roch_brake,
    slow_cap_check,
)
from brakeindex.core import HalfInt
from brakeindex.errors import BoundaryMismatch, OmegaResonant, ValidationError

TWO_PI = 2 * math.pi


def test_mode_counts_by_hand():
    # kernel counts integers 0 <= k < omega/2pi, cokernel the integers
    # omega/2pi < k <= -1
    table = [
        (1.0, 1, 0),
        (4.0, 1, 0),
        (7.0, 2, 0),      # 7/2pi ~ 1.11
        (-1.0, 0, 0),
        (-7.0, 0, 1),
        (-13.0, 0, 2),    # -13/2pi ~ -2.07
    ]
    for omega, ker, coker in table:
        assert cap_kernel_cokernel(CapSpec(omega)) == (ker, coker), omega
    assert cap_kernel_cokernel(CapSpec(7.0, rank=3)) == (6, 0)


def test_mode_counts_match_decay_integration():
    for omega in (1.0, 4.0, 7.0, -7.0):
        assert slow_cap_check(omega) == cap_kernel_cokernel(CapSpec(omega))


def test_resonant_rate_rejected():
    with pytest.raises(OmegaResonant):
        CapSpec(TWO_PI)
    with pytest.raises(OmegaResonant):
        CapSpec(-2 * TWO_PI)
    with pytest.raises(ValidationError):
        CapSpec(1.0, rank=0)


def test_index_minus_cokernel_matches_brake_index():
    # ker - coker = 1/2 + mu1 with mu1 = 1/2 + floor(omega/2pi)
    for omega in (1.0, 7.0, -1.0, -7.0, 13.0):
        ker, coker = cap_kernel_cokernel(CapSpec(omega))
        mu1 = HalfInt(1) + math.floor(omega / TWO_PI)
        assert HalfInt.from_int(ker - coker) == HalfInt(1) + mu1


def test_cap_index_conventions():
    mu = HalfInt(3)  # 3/2
    assert cap_index(POSITIVE, mu) == HalfInt(1) + mu          # 2
    assert cap_index(NEGATIVE, mu) == HalfInt(1) - mu          # -1
    assert cap_index(POSITIVE, mu, rank=2) == HalfInt(2) + mu  # 5/2
    cz = HalfInt.from_int(2)
    assert cap_index(POSITIVE, cz, is_pair=True) == HalfInt.from_int(3)
    assert cap_index(NEGATIVE, cz, is_pair=True) == HalfInt.from_int(-1)
    with pytest.raises(ValidationError):
        cap_index("sideways", mu)


def test_riemann_roch_table():
    assert riemann_roch_brake(0) == HalfInt.from_int(1)
    assert riemann_roch_brake(1) == HalfInt.from_int(0)
    assert riemann_roch_brake(2) == HalfInt.from_int(-1)
    assert riemann_roch_brake(0, c1=3) == HalfInt.from_int(4)
    assert riemann_roch_brake(0, rank=2) == HalfInt.from_int(2)


def test_glued_sphere_totals_one():
    mu_a, mu_b = HalfInt(1), HalfInt(3)
    cyl = mu_b - mu_a
    ledger = glue(
        GluePiece("cap_pos", cap_index(POSITIVE, mu_a),
                  (Boundary("a", POSITIVE, "brake", mu_a),)),
        GluePiece("cylinder", cyl,
                  (Boundary("a", NEGATIVE, "brake", mu_a),
                   Boundary("b", POSITIVE, "brake", mu_b))),
        GluePiece("cap_neg", cap_index(NEGATIVE, mu_b),
                  (Boundary("b", NEGATIVE, "brake", mu_b),)),
    )
    assert ledger.total == riemann_roch_brake(0) == HalfInt.from_int(1)
    assert not ledger.open_boundaries


def test_glue_reports_open_boundaries():
    piece = GluePiece("half", HalfInt(2),
                      (Boundary("loose", POSITIVE, "brake", HalfInt(1)),))
    ledger = glue(piece)
    assert [b.label for b in ledger.open_boundaries] == ["loose"]
    assert ledger.total == HalfInt(2)


def test_glue_rejects_mismatched_boundaries():
    a_pos = Boundary("a", POSITIVE, "brake", HalfInt(1))
    a_neg_wrong_value = Boundary("a", NEGATIVE, "brake", HalfInt(3))
    with pytest.raises(BoundaryMismatch):
        glue(GluePiece("p", HalfInt(0), (a_pos,)),
             GluePiece("q", HalfInt(0), (a_neg_wrong_value,)))
    a_pos_again = Boundary("a", POSITIVE, "brake", HalfInt(1))
    with pytest.raises(BoundaryMismatch):
        glue(GluePiece("p", HalfInt(0), (a_pos,)),
             GluePiece("q", HalfInt(0), (a_pos_again,)))
    a_pair = Boundary("a", NEGATIVE, "pair", HalfInt(1))
    with pytest.raises(BoundaryMismatch):
        glue(GluePiece("p", HalfInt(0), (a_pos,)),
             GluePiece("q", HalfInt(0), (a_pair,)))


def test_glue_rejects_triple_use():
    b = lambda sign: Boundary("a", sign, "brake", HalfInt(1))
    with pytest.raises(BoundaryMismatch):
        glue(GluePiece("p", HalfInt(0), (b(POSITIVE),)),
             GluePiece("q", HalfInt(0), (b(NEGATIVE),)),
             GluePiece("r", HalfInt(0), (b(NEGATIVE),)))


def test_boundary_validation():
    with pytest.raises(ValidationError):
        Boundary("x", "up", "brake", HalfInt(1))
    with pytest.raises(ValidationError):
        Boundary("x", POSITIVE, "mu1", HalfInt(1))
