"""Closed-form rate constants, envelopes, kernel bounds, and the classifier."""

import math

import numpy as np
import pytest

from consensus_certify.errors import DomainError
from consensus_certify.dynamics import LambdaWeight, RadialKernel, SystemSpec
from consensus_certify.certificates import (
    bounds_m,
    classify_flocking,
    contraction_sequence,
    eta,
    isc_block_periods,
    phi_envelope,
    position_bound,
    rate_ISC,
    rate_linear,
    rate_nonlinear,
    rate_PE,
    rate_second_order,
)


def test_eta_values():
    assert abs(eta(3, 3.0, 0.5) - 1.5 / 4.5) < 1e-15
    assert abs(eta(4, 4.0, 1.0 / 3.0) - 0.25) < 1e-15
    assert eta(2, 1.0, 1e-12) < 1e-12
    with pytest.raises(DomainError):
        eta(2, 0.0, 0.5)
    with pytest.raises(DomainError):
        eta(2, 1.0, -0.1)


def test_rate_linear_table_values():
    c3 = rate_linear(3, 3.0, 0.5, 2)
    # independent high-precision evaluation: (1/2) (1/3)^2 e^(-12)
    expected = 0.5 * (1.0 / 9.0) * math.exp(-12.0)
    assert abs(c3.one_minus_C - expected) < 1e-14 * expected
    assert abs(c3.one_minus_C - 3.4134e-7) / 3.4134e-7 < 1e-4
    c4 = rate_linear(4, 4.0, 1.0 / 3.0, 3)
    assert abs(c4.one_minus_C - 2.949e-13) / 2.949e-13 < 1e-3
    delta_expected = -(3.0 / 4.0) * math.log1p(-c3.one_minus_C)
    assert abs(c3.delta - delta_expected) < 1e-20
    assert abs(c3.delta - 2.560e-7) / 2.560e-7 < 1e-3
    assert c3.tau == 6.0


def test_rate_linear_validates_d_star():
    with pytest.raises(DomainError):
        rate_linear(3, 1.0, 0.5, 3)
    with pytest.raises(DomainError):
        rate_linear(3, 1.0, 0.5, 0)


def test_rate_linear_proof_constant_is_sharper():
    stated = rate_linear(4, 2.0, 0.5, 2)
    proof = rate_linear(4, 2.0, 0.5, 2, proof_constant=True)
    assert proof.C < stated.C


def test_bounds_m_identity():
    spec = SystemSpec(family="first_order_nonlinear", n_agents=3)
    b = bounds_m(spec, [0.0, 0.5, 1.0])
    assert (b.m_lower, b.m_upper, b.sampled) == (1.0, 1.0, False)


def test_bounds_m_power_law():
    spec = SystemSpec(family="first_order_nonlinear", n_agents=2,
                      kernel=RadialKernel("power_law", beta=0.5))
    b = bounds_m(spec, [0.0, 1.0])
    assert b.m_upper == 1.0
    assert abs(b.m_lower - (1.0 + 4.0) ** -0.5) < 1e-15
    assert not b.sampled


def test_bounds_m_beta_zero():
    spec = SystemSpec(family="first_order_nonlinear", n_agents=2,
                      kernel=RadialKernel("power_law", beta=0.0))
    b = bounds_m(spec, [0.0, 7.0])
    assert (b.m_lower, b.m_upper) == (1.0, 1.0)


def test_bounds_m_normalized_weights_sampled():
    spec = SystemSpec(family="first_order_nonlinear", n_agents=3,
                      kernel=RadialKernel("power_law", beta=0.5),
                      lam=LambdaWeight("degree_normalized"))
    b = bounds_m(spec, [0.0, 0.5, 1.0], n_samples=500, seed=1)
    assert b.sampled
    assert 0 < b.m_lower <= b.m_upper


def test_rate_nonlinear_reduces_to_linear():
    a = rate_nonlinear(5, 1.7, 0.3, 2, 1.0, 1.0)
    b = rate_linear(5, 1.7, 0.3, 2)
    for field in ("C", "one_minus_C", "tau", "delta", "eta", "d_star"):
        assert getattr(a, field) == getattr(b, field)


def test_rate_nonlinear_example_value():
    cert = rate_nonlinear(3, 3.0, 0.5, 2, 0.5, 1.0)
    expected = 0.5 * (0.75 / 3.75) ** 2 * math.exp(-12.0)
    assert abs(cert.one_minus_C - expected) < 1e-22
    assert abs(cert.one_minus_C - 1.2288e-7) / 1.2288e-7 < 1e-4


def test_rate_nonlinear_tau_scales_with_m_upper():
    cert = rate_nonlinear(3, 3.0, 0.5, 2, 0.5, 2.0)
    assert cert.tau == 2 * 3.0 / 2.0
    with pytest.raises(DomainError):
        rate_nonlinear(3, 3.0, 0.5, 2, 1.0, 0.5)


def test_rate_pe_value_and_limits():
    cert = rate_PE(2, 1.0, 1.0, 1.0, 1.0)
    expected = 1.0 - 0.5 * (1.0 / 3.0) * math.exp(-1.0)
    assert abs(cert.C - expected) < 1e-15
    assert cert.d_star == 1
    tiny = rate_PE(2, 1.0, 1.0, 1e-12, 1.0)
    assert tiny.one_minus_C < 1e-12
    assert 0.5 <= cert.C < 1.0 and 0.5 <= tiny.C <= 1.0


def test_rate_isc_values():
    assert isc_block_periods(2) == 4
    assert isc_block_periods(3) == 128
    assert isc_block_periods(4) == 3 * 2 ** 12
    cert = rate_ISC(2, 1.0, 1.0, 1.0, 1.0)
    expected = 1.0 - (1.0 / 3.0) * math.exp(-1.0)
    assert abs(cert.C - expected) < 1e-15
    assert cert.block_periods == 4
    assert cert.block_seconds == 4.0
    assert not cert.vacuous


def test_rate_isc_vacuous_for_larger_systems():
    c3 = rate_ISC(3, 1.0, 0.5, 1.0, 1.0)
    assert c3.vacuous and c3.C == 1.0
    assert math.isfinite(c3.log10_one_minus_C)
    c4 = rate_ISC(4, 1.0, 0.5, 1.0, 1.0)
    assert c4.vacuous and c4.one_minus_C == 0.0
    assert c4.log10_one_minus_C == -math.inf
    assert c4.block_periods == 12288


def test_certificate_range_randomized():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        T = float(rng.uniform(0.1, 5.0))
        mu = float(rng.uniform(0.01, 1.0))
        d_star = int(rng.integers(1, n))
        m_low = float(rng.uniform(0.05, 1.0))
        m_up = m_low + float(rng.uniform(0.0, 1.0))
        for cert in (
            rate_nonlinear(n, T, mu, d_star, m_low, m_up),
            rate_PE(n, T, mu, m_low, m_up),
            rate_ISC(n, T, mu, m_low, m_up),
        ):
            assert 0.5 <= cert.C <= 1.0
            assert cert.one_minus_C <= 0.5
            assert 0.0 < cert.eta < 1.0


def test_rate_linear_monotonicity():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(3, 9))
        T = float(rng.uniform(0.2, 3.0))
        mus = sorted(rng.uniform(0.05, 1.0, size=2))
        c_lo = rate_linear(n, T, mus[0], 2).C
        c_hi = rate_linear(n, T, mus[1], 2).C
        assert c_hi <= c_lo + 1e-15
        d1, d2 = sorted(rng.integers(1, n, size=2))
        assert rate_linear(n, T, mus[0], int(d2)).C >= rate_linear(n, T, mus[0], int(d1)).C - 1e-15


def test_envelope_continuity_and_shape():
    cert = rate_linear(3, 1.0, 0.5, 2)
    assert phi_envelope(cert, 0.0) == 1.0
    assert abs(phi_envelope(cert, cert.tau - cert.delta) - 1.0) < 1e-12
    assert abs(phi_envelope(cert, cert.tau) - cert.C) < 1e-12
    mid = cert.tau - cert.delta / 2
    assert cert.C <= phi_envelope(cert, mid) <= 1.0
    with pytest.raises(DomainError):
        phi_envelope(cert, cert.tau * 1.5)


def test_envelope_continuity_with_m_bounds():
    cert = rate_nonlinear(4, 1.0, 0.4, 2, 0.5, 2.0)
    assert abs(phi_envelope(cert, cert.tau - cert.delta) - 1.0) < 1e-12
    assert abs(phi_envelope(cert, cert.tau) - cert.C) < 1e-12


def test_rate_second_order_constant_kernel():
    kern = RadialKernel()
    expected = 1.0 - 0.5 * (1.0 / 3.0) * math.exp(-1.0)
    for n in range(4):
        assert abs(rate_second_order(2, 1.0, 1.0, 1, kern, 5.0, 3.0, n) - expected) < 1e-15


def test_rate_second_order_frozen_when_dv0_zero():
    kern = RadialKernel("power_law", beta=0.4)
    values = {rate_second_order(3, 1.0, 0.5, 2, kern, 2.0, 0.0, n) for n in range(5)}
    assert len(values) == 1


def test_rate_second_order_nondecreasing_in_n():
    kern = RadialKernel("power_law", beta=0.3)
    seq = contraction_sequence(4, 1.0, 0.4, 3, kern, 1.0, 1.0, 20)
    assert np.all(np.diff(seq) >= -1e-15)
    assert np.all((0.5 <= seq) & (seq < 1.0))


def test_position_bound_grows_with_blocks():
    kern = RadialKernel("power_law", beta=0.3)
    b5 = position_bound(4, 1.0, 0.4, 3, kern, 1.0, 1.0, 5)
    b10 = position_bound(4, 1.0, 0.4, 3, kern, 1.0, 1.0, 10)
    assert b10 >= b5 >= 1.0


@pytest.mark.parametrize(
    "d_star,alignment,flocking,boundary",
    [(3, True, True, False), (5, True, False, True), (7, False, False, False)],
)
def test_classifier_power_law_cases(d_star, alignment, flocking, boundary):
    kern = RadialKernel("power_law", beta=0.1)
    n = d_star + 1
    v = classify_flocking(kern, d_star, n, float(n), 1.0 / (n - 1))
    assert v.alignment_guaranteed == alignment
    assert v.flocking_guaranteed == flocking
    assert v.boundary_case == boundary
    assert v.criterion_value == pytest.approx(2 * 0.1 * d_star)


def test_classifier_constant_kernel_flocks():
    v = classify_flocking(RadialKernel(), 2, 3, 1.0, 0.5)
    assert v.alignment_guaranteed and v.flocking_guaranteed


def test_classifier_declared_facts_take_precedence():
    kern = RadialKernel("power_law", beta=0.2)
    facts = {"phi_power_nonintegrable": True, "flocking_trigger": False}
    v = classify_flocking(kern, 2, 3, 1.0, 0.5, declared_facts=facts)
    assert v.alignment_guaranteed and not v.flocking_guaranteed
    assert v.criterion_value is None and v.notes == "declared integrability facts"


def test_classifier_raabe_evidence_trend():
    kern = RadialKernel("power_law", beta=0.1)
    flocking = classify_flocking(kern, 3, 4, 4.0, 1.0 / 3.0)
    none = classify_flocking(kern, 7, 8, 8.0, 1.0 / 7.0)
    assert flocking.raabe_trend == "increasing"
    assert none.raabe_trend == "decreasing"


def test_certificate_json_round_trip_fields():
    cert = rate_nonlinear(3, 3.0, 0.5, 2, 0.5, 1.0)
    payload = cert.to_json_dict()
    assert payload["one_minus_C"] == cert.one_minus_C
    assert payload["condition"] == "moreau"
    assert isinstance(payload["derivation"], list) and payload["derivation"]
