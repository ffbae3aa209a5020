"""First-order operator discretization, kernels, and spectral flow."""

import math

import numpy as np
import pytest

from brakeindex.asymptotic import (
    BRAKE,
    FULL,
    AsymptoticOperator,
    OperatorFamily,
    SymmetricLoop,
    blend_family,
    cylinder_index,
    discretize,
    kernel_dimension,
    smoothstep,
    spectral_flow,
)
from brakeindex.core import HalfInt, rotation_path
from brakeindex.errors import (
    CrossingUnresolved,
    EndpointDegenerate,
    SymmetryViolated,
    TruncationUnstable,
    ValidationError,
)
from brakeindex.indices import brake_maslov, conley_zehnder

TWO_PI = 2 * math.pi


def test_constant_coefficient_spectra():
    # for S = omega I the eigenvalues are 2 pi k - omega, twice on the
    # full domain and once on the brake domain
    omega = 1.3
    K = 6
    loop = SymmetricLoop.constant(omega * np.eye(2))
    want = np.sort([TWO_PI * k - omega for k in range(-K, K + 1)])

    disc, _ = discretize(AsymptoticOperator(loop, FULL), K)
    assert np.allclose(np.sort(disc.eigenvalues), np.repeat(want, 2), atol=1e-9)

    disc_b, _ = discretize(AsymptoticOperator(loop, BRAKE), K)
    assert np.allclose(np.sort(disc_b.eigenvalues), want, atol=1e-9)


def test_constant_shift_moves_spectrum_rigidly():
    base = SymmetricLoop.constant(np.diag([0.4, 0.4]))
    shifted = SymmetricLoop.constant(np.diag([1.9, 1.9]))
    e0 = np.sort(discretize(AsymptoticOperator(base, FULL), 4)[0].eigenvalues)
    e1 = np.sort(discretize(AsymptoticOperator(shifted, FULL), 4)[0].eigenvalues)
    assert np.allclose(e1, e0 - 1.5, atol=1e-9)


def test_kernel_dimensions_at_resonance():
    res = SymmetricLoop.constant(TWO_PI * np.eye(2))
    assert kernel_dimension(AsymptoticOperator(res, FULL), K=8) == 2
    assert kernel_dimension(AsymptoticOperator(res, BRAKE), K=8) == 1
    off = SymmetricLoop.constant(1.0 * np.eye(2))
    assert kernel_dimension(AsymptoticOperator(off, FULL), K=8) == 0
    assert kernel_dimension(AsymptoticOperator(off, BRAKE), K=8) == 0


def test_fourier_loop_evaluates_series():
    c1 = np.array([[0.5, 0.1], [0.1, -0.2]])
    s2 = np.array([[0.0, 0.3], [0.3, 0.0]])
    loop = SymmetricLoop.fourier(np.eye(2), cos={1: c1}, sin={2: s2})
    t = 0.37
    want = np.eye(2) + c1 * math.cos(TWO_PI * t) + s2 * math.sin(2 * TWO_PI * t)
    assert np.max(np.abs(loop(t) - want)) < 1e-12
    assert loop.brake_residual() > 0.1  # the sin term breaks the symmetry


def test_loop_values_must_be_symmetric():
    with pytest.raises(ValidationError):
        SymmetricLoop(lambda t: np.array([[0.0, 1.0], [0.0, 0.0]]), 1)


def test_brake_domain_requires_symmetric_loop():
    loop = SymmetricLoop.fourier(np.eye(2), sin={1: np.eye(2)})
    AsymptoticOperator(loop, FULL)  # fine
    with pytest.raises(SymmetryViolated):
        AsymptoticOperator(loop, BRAKE)


def test_truncation_instability_detected():
    # a strong high-frequency term couples modes that K = 3 cannot see,
    # so a near-zero eigenvalue of the 2K problem has no K partner
    loop = SymmetricLoop.fourier(
        np.diag([1.0, 2.0]),
        cos={4: 30.0 * np.array([[1.0, 0.4], [0.4, -0.6]])},
    )
    with pytest.raises(TruncationUnstable):
        discretize(AsymptoticOperator(loop, FULL), 3)
    disc, _ = discretize(AsymptoticOperator(loop, FULL), 3, check_stability=False)
    assert disc.K == 3


def test_blend_family_interpolates_endpoints():
    lm = SymmetricLoop.constant(1.0 * np.eye(2))
    lp = SymmetricLoop.constant(7.0 * np.eye(2))
    fam = blend_family(lm, lp, domain=FULL)
    assert np.max(np.abs(fam.operator_at(fam.s_min).loop(0.2) - lm(0.2))) < 1e-12
    assert np.max(np.abs(fam.operator_at(fam.s_max).loop(0.2) - lp(0.2))) < 1e-12
    mid = fam.operator_at(0.0).loop(0.1)
    assert np.max(np.abs(mid - 4.0 * np.eye(2))) < 1e-12


def test_smoothstep_shape():
    assert smoothstep(0.0) == 0.0 and smoothstep(1.0) == 1.0
    assert smoothstep(0.5) == pytest.approx(0.5)
    assert smoothstep(-3.0) == 0.0 and smoothstep(4.0) == 1.0


def test_spectral_flow_counts_downward_crossings():
    lm = SymmetricLoop.constant(1.0 * np.eye(2))
    lp = SymmetricLoop.constant(7.0 * np.eye(2))
    flow_full = spectral_flow(blend_family(lm, lp, domain=FULL), K=16)
    assert flow_full.value == 2
    assert sum(j for _, j in flow_full.crossings) == 2
    # the eigenvalue 2 pi - omega(s) hits zero where the blend passes 2 pi
    x = (TWO_PI - 1.0) / 6.0
    s_star = None
    for cand in np.linspace(-1, 1, 200001):
        if smoothstep((cand + 1) / 2) >= x:
            s_star = cand
            break
    assert abs(flow_full.crossings[0][0] - s_star) < 1e-3

    flow_brake = spectral_flow(blend_family(lm, lp, domain=BRAKE), K=16)
    assert flow_brake.value == 1

    # reversing the family flips the sign
    back_full = spectral_flow(blend_family(lp, lm, domain=FULL), K=16)
    assert back_full.value == -2


def test_spectral_flow_equals_index_differences():
    pairs = [(1.0, 7.0), (0.5, 12.0), (-1.0, 5.0)]
    for om_a, om_b in pairs:
        lm = SymmetricLoop.constant(om_a * np.eye(2))
        lp = SymmetricLoop.constant(om_b * np.eye(2))
        flow_b = spectral_flow(blend_family(lm, lp, domain=BRAKE), K=16).value
        flow_f = spectral_flow(blend_family(lm, lp, domain=FULL), K=16).value
        mu = brake_maslov(rotation_path(om_b, samples=1024)) - \
            brake_maslov(rotation_path(om_a, samples=1024))
        cz = conley_zehnder(rotation_path(om_b, samples=1024)) - \
            conley_zehnder(rotation_path(om_a, samples=1024))
        assert HalfInt.from_int(flow_b) == mu
        assert HalfInt.from_int(flow_f) == cz


def test_spectral_flow_two_frequency_block():
    # independent blocks flow independently
    lm = SymmetricLoop.constant(np.diag([1.0, 5.0, 1.0, 5.0]))
    lp = SymmetricLoop.constant(np.diag([7.0, 13.0, 7.0, 13.0]))
    flow = spectral_flow(blend_family(lm, lp, domain=BRAKE), K=16)
    want = (math.floor(7.0 / TWO_PI) - math.floor(1.0 / TWO_PI)) + \
        (math.floor(13.0 / TWO_PI) - math.floor(5.0 / TWO_PI))
    assert flow.value == want


def test_multiplicity_cap_raises():
    lm = SymmetricLoop.constant(1.0 * np.eye(2))
    lp = SymmetricLoop.constant(7.0 * np.eye(2))
    with pytest.raises(CrossingUnresolved):
        spectral_flow(blend_family(lm, lp, domain=FULL), K=16, max_multiplicity=1)


def test_degenerate_endpoint_rejected():
    lm = SymmetricLoop.constant(TWO_PI * np.eye(2))
    lp = SymmetricLoop.constant(1.0 * np.eye(2))
    with pytest.raises(EndpointDegenerate):
        spectral_flow(blend_family(lm, lp, domain=FULL), K=16)


def test_cylinder_index_is_half_integer_flow():
    lm = SymmetricLoop.constant(math.pi * np.eye(2))
    lp = SymmetricLoop.constant(3 * math.pi * np.eye(2))
    idx = cylinder_index(blend_family(lm, lp, domain=BRAKE), K=16)
    assert idx == HalfInt.from_int(1)


def test_operator_family_samples_interval():
    lm = SymmetricLoop.constant(1.0 * np.eye(2))
    lp = SymmetricLoop.constant(2.0 * np.eye(2))
    fam = blend_family(lm, lp, interval=(0.0, 4.0), domain=FULL)
    assert (fam.s_min, fam.s_max) == (0.0, 4.0)
    op = fam.operator_at(2.0)
    assert isinstance(op, AsymptoticOperator)
    assert op.domain == FULL


def test_kernel_dimension_respects_zero_tol():
    # an eigenvalue at -1e-4 counts as kernel only with a loose tolerance
    loop = SymmetricLoop.constant((TWO_PI + 1e-4) * np.eye(2))
    assert kernel_dimension(AsymptoticOperator(loop, FULL), K=8, zero_tol=1e-6) == 0
    assert kernel_dimension(AsymptoticOperator(loop, FULL), K=8, zero_tol=1e-3) == 2
