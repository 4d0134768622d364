"""Contract solver tests: worked values, constraint patterns, oracle agreement."""

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from edgecontract import (
    AdmissibilityError,
    ContractBundle,
    ContractMenu,
    ContractParams,
    EmptyFeasibleSet,
    edge_utility,
    expected_system_utility,
    grid_search_oracle,
    random_admissible_params,
    solve_contract,
    solve_pooled_contract,
    teleoperator_utility,
    verify_feasibility,
)
from edgecontract.config import DEFAULT_CONTRACT
from edgecontract.errors import ConfigError

PARAMS = DEFAULT_CONTRACT

# Frozen from an independent transcription of the pricing formulas.
EXPECTED_PERF_LOW = 1.3946699141100893
EXPECTED_PERF_HIGH = 1.6535533905932738
EXPECTED_PRICE_LOW = 3.1587718058747436
EXPECTED_PRICE_HIGH = 5.281077173244953
EXPECTED_SYSTEM_UTILITY = 6.682155026296869
EXPECTED_POOLED_PERF = 1.6121320343559642
EXPECTED_POOLED_PRICE = 5.652133840199351


def mkparams(**overrides) -> ContractParams:
    fields = dict(
        theta_L=PARAMS.theta_L,
        theta_H=PARAMS.theta_H,
        beta_L=PARAMS.beta_L,
        beta_H=PARAMS.beta_H,
        eta1=PARAMS.eta1,
        eta2=PARAMS.eta2,
        eta3=PARAMS.eta3,
        I_r1=PARAMS.I_r1,
        I_r2=PARAMS.I_r2,
        delta_C=PARAMS.delta_C,
    )
    fields.update(overrides)
    return ContractParams(**fields)


@st.composite
def admissible_params(draw):
    theta_L = draw(st.floats(0.5, 2.0))
    theta_H = theta_L * draw(st.floats(1.05, 2.5))
    beta_H = draw(st.floats(0.05, 0.95))
    beta_L = 1.0 - beta_H
    eta1 = draw(st.floats(2.0, 10.0))
    eta3 = eta1 * draw(st.floats(0.1, 0.8))
    eta2 = draw(st.floats(20.0, 500.0))
    I_r1 = draw(st.floats(0.5, 2.0))
    I_r2 = I_r1 + draw(st.floats(0.05, 0.5))
    delta_C = draw(st.floats(0.0, 20.0))
    assume(theta_L > beta_H * theta_H)
    # keep the closed form self-consistent: the low bundle's log argument
    # must exceed one, otherwise the high type's rent would be negative
    assume(eta2 * (theta_L - beta_H * theta_H) / (beta_L * (eta1 - eta3)) > 1.0)
    return ContractParams(
        theta_L=theta_L,
        theta_H=theta_H,
        beta_L=beta_L,
        beta_H=beta_H,
        eta1=eta1,
        eta2=eta2,
        eta3=eta3,
        I_r1=I_r1,
        I_r2=I_r2,
        delta_C=delta_C,
    )


class TestTeleoperatorUtility:
    def test_log_argument_one(self):
        # perf = I_r1 + 1/eta2 makes the log term vanish
        perf = PARAMS.I_r1 + 1.0 / PARAMS.eta2
        assert teleoperator_utility(1.0, perf, 0.0, PARAMS) == pytest.approx(-0.096, abs=1e-12)

    def test_floor_at_threshold(self):
        assert teleoperator_utility(1.0, 1.3, 0.0, PARAMS) == -10.0
        assert teleoperator_utility(1.0, 1.2, 5.0, PARAMS) == -10.0
        assert teleoperator_utility(1.0, 1.3, 0.0, PARAMS, floor=-99.0) == -99.0

    def test_high_bundle_indifference_residual(self):
        # the high bundle is priced so the high type is exactly indifferent
        # between bundles; the residual of that equality is ~0
        menu = solve_contract(PARAMS)
        u_own = teleoperator_utility(PARAMS.theta_H, menu.high.perf, menu.high.price, PARAMS)
        u_other = teleoperator_utility(PARAMS.theta_H, menu.low.perf, menu.low.price, PARAMS)
        assert abs(u_own - u_other) < 1e-6
        # the low type keeps exactly zero surplus on its own bundle
        assert teleoperator_utility(PARAMS.theta_L, menu.low.perf, menu.low.price, PARAMS) == pytest.approx(0.0, abs=1e-9)

    @given(
        theta=st.floats(0.1, 5.0),
        perf=st.floats(1.31, 3.0),
        delta=st.floats(1e-6, 1.0),
        price=st.floats(-5.0, 5.0),
    )
    def test_monotone_in_perf_and_price(self, theta, perf, delta, price):
        low = teleoperator_utility(theta, perf, price, PARAMS)
        high = teleoperator_utility(theta, perf + delta, price, PARAMS)
        assert high > low
        assert teleoperator_utility(theta, perf, price + delta, PARAMS) < low + 1e-12


class TestEdgeUtility:
    def test_direct_arithmetic(self):
        bundle = ContractBundle(price=5.0, perf=1.5)
        assert edge_utility(bundle, PARAMS) == pytest.approx(7.5)

    def test_zero_case(self):
        bundle = ContractBundle(price=0.0, perf=0.0)
        assert edge_utility(bundle, mkparams(delta_C=0.0)) == 0.0

    def test_low_bundle_value(self):
        menu = solve_contract(PARAMS)
        assert edge_utility(menu.low, PARAMS) == pytest.approx(6.1854, abs=1e-3)


class TestSolveContract:
    def test_reference_parameters(self):
        menu = solve_contract(PARAMS)
        assert menu.low.perf == pytest.approx(1.39467, abs=1e-4)
        assert menu.high.perf == pytest.approx(1.65355, abs=1e-4)
        assert menu.low.price == pytest.approx(3.1587, abs=1e-3)
        assert menu.high.price == pytest.approx(5.2811, abs=1e-3)
        # tighter pin against the frozen independent evaluation
        assert menu.low.perf == pytest.approx(EXPECTED_PERF_LOW, abs=1e-12)
        assert menu.high.perf == pytest.approx(EXPECTED_PERF_HIGH, abs=1e-12)
        assert menu.low.price == pytest.approx(EXPECTED_PRICE_LOW, abs=1e-12)
        assert menu.high.price == pytest.approx(EXPECTED_PRICE_HIGH, abs=1e-12)

    def test_all_low_mix_limit(self):
        params = mkparams(beta_L=1.0, beta_H=0.0)
        menu = solve_contract(params)
        assert menu.low.perf == pytest.approx(
            params.I_r1 + params.theta_L / (params.eta1 - params.eta3), abs=1e-12
        )

    def test_vanishing_type_gap(self):
        eps = 1e-6
        params = mkparams(theta_H=PARAMS.theta_L * (1 + eps))
        menu = solve_contract(params)
        assert menu.high.perf - menu.low.perf == pytest.approx(0.0, abs=1e-4)
        assert menu.high.price - menu.low.price == pytest.approx(0.0, abs=1e-4)

    def test_admissibility_enforced(self):
        with pytest.raises(AdmissibilityError):
            solve_contract(mkparams(eta3=5.0))  # eta1 == eta3
        with pytest.raises(AdmissibilityError):
            solve_contract(mkparams(theta_L=0.5))  # theta_L <= beta_H * theta_H

    @given(admissible_params())
    def test_binding_equalities(self, params):
        menu = solve_contract(params)
        report = verify_feasibility(menu, params, tol=1e-9)
        assert abs(report.ir_L) <= 1e-9
        assert abs(report.ic_H) <= 1e-9

    @given(admissible_params())
    def test_screening_monotonicity(self, params):
        menu = solve_contract(params)
        assert menu.high.perf > menu.low.perf
        assert menu.high.price > menu.low.price

    @given(admissible_params())
    def test_high_type_rent_positive(self, params):
        report = verify_feasibility(solve_contract(params), params)
        assert report.ir_H > 0.0
        assert report.ic_L >= 0.0
        assert report.feasible

    @given(admissible_params(), st.floats(0.05, 0.95))
    def test_high_perf_independent_of_mix(self, params, other_beta_H):
        menu = solve_contract(params)
        remixed = mkparams(
            theta_L=params.theta_L,
            theta_H=params.theta_H,
            beta_L=1.0 - other_beta_H,
            beta_H=other_beta_H,
            eta1=params.eta1,
            eta2=params.eta2,
            eta3=params.eta3,
            I_r1=params.I_r1,
            I_r2=params.I_r2,
            delta_C=params.delta_C,
        )
        assume(remixed.admissible)
        assert solve_contract(remixed).high.perf == menu.high.perf


class TestExpectedSystemUtility:
    def test_reference_parameters(self):
        menu = solve_contract(PARAMS)
        value = expected_system_utility(menu, PARAMS)
        assert value == pytest.approx(6.6821, abs=1e-3)
        assert value == pytest.approx(EXPECTED_SYSTEM_UTILITY, abs=1e-12)

    def test_break_even_pricing(self):
        params = mkparams(delta_C=0.0)
        menu = ContractMenu(
            low=ContractBundle(price=params.eta1 * 1.5, perf=1.5),
            high=ContractBundle(price=params.eta1 * 1.7, perf=1.7),
        )
        assert expected_system_utility(menu, params) == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_mixture(self):
        params = mkparams(beta_L=1.0, beta_H=0.0)
        menu = ContractMenu(
            low=ContractBundle(price=3.0, perf=1.5),
            high=ContractBundle(price=9.9, perf=2.2),
        )
        expected = menu.low.price - params.eta1 * menu.low.perf + params.delta_C
        assert expected_system_utility(menu, params) == pytest.approx(expected, abs=1e-12)


class TestVerifyFeasibility:
    def test_closed_form_binding_pattern(self):
        report = verify_feasibility(solve_contract(PARAMS), PARAMS, tol=1e-6)
        assert report.feasible
        assert abs(report.ir_L) <= 1e-6
        assert abs(report.ic_H) <= 1e-6
        assert report.ir_H > 0.0
        assert report.ic_L > 0.0
        assert report.low_ir_binding
        assert report.high_ic_binding

    def test_inflated_low_price_breaks_participation(self):
        menu = solve_contract(PARAMS)
        bad = ContractMenu(
            low=ContractBundle(price=menu.low.price + 1.0, perf=menu.low.perf),
            high=menu.high,
        )
        report = verify_feasibility(bad, PARAMS, tol=1e-6)
        assert report.ir_L == pytest.approx(-1.0, abs=1e-9)
        assert not report.feasible

    def test_identical_bundles_have_zero_ic(self):
        bundle = ContractBundle(price=2.0, perf=1.5)
        report = verify_feasibility(ContractMenu(low=bundle, high=bundle), PARAMS)
        assert report.ic_L == 0.0
        assert report.ic_H == 0.0


class TestGridSearchOracle:
    def test_matches_closed_form(self):
        menu = solve_contract(PARAMS)
        oracle = grid_search_oracle(PARAMS, (1.301, 2.3), step=1e-3)
        assert oracle.low.perf == pytest.approx(menu.low.perf, abs=1e-3)
        assert oracle.high.perf == pytest.approx(menu.high.perf, abs=1e-3)
        gap = expected_system_utility(menu, PARAMS) - expected_system_utility(oracle, PARAMS)
        assert -1e-9 <= gap <= 1e-3

    def test_single_point_grid(self):
        # step wider than the range collapses the grid to its left edge
        menu = grid_search_oracle(PARAMS, (1.4, 1.4), step=1.0)
        assert menu.low.perf == menu.high.perf == pytest.approx(1.4)
        # the same degenerate grid hugging the threshold is infeasible
        with pytest.raises(EmptyFeasibleSet):
            grid_search_oracle(PARAMS, (1.301, 1.35), step=1.0)

    def test_inadmissible_parameters_still_searched(self):
        params = mkparams(theta_L=0.5)  # violates theta_L > beta_H * theta_H
        with pytest.raises(AdmissibilityError):
            solve_contract(params)
        menu = grid_search_oracle(params, (1.301, 1.9), step=1e-3)
        assert verify_feasibility(menu, params, tol=1e-9).feasible

    def test_rejects_bad_ranges(self):
        with pytest.raises(ConfigError):
            grid_search_oracle(PARAMS, (1.2, 2.0), step=1e-3)
        with pytest.raises(ConfigError):
            grid_search_oracle(PARAMS, (1.4, 2.0), step=0.0)

    def test_random_draws_never_beat_closed_form(self):
        rng = np.random.default_rng(2024)
        for _ in range(3):
            params = random_admissible_params(rng)
            span = params.theta_H / (params.eta1 - params.eta3) + 0.1
            oracle = grid_search_oracle(params, (params.I_r1 + 1e-3, params.I_r1 + span), step=1e-3)
            closed = expected_system_utility(solve_contract(params), params)
            grid = expected_system_utility(oracle, params)
            assert closed >= grid - 1e-3
            assert closed >= grid - 1e-9  # the closed form is the true optimum


class TestPooledContract:
    def test_reference_parameters(self):
        pooled = solve_pooled_contract(PARAMS)
        assert pooled.perf == pytest.approx(1.61213, abs=1e-4)
        assert pooled.price == pytest.approx(5.6521, abs=1e-3)
        assert pooled.perf == pytest.approx(EXPECTED_POOLED_PERF, abs=1e-12)
        assert pooled.price == pytest.approx(EXPECTED_POOLED_PRICE, abs=1e-12)

    def test_pure_low_mix(self):
        params = mkparams(beta_L=1.0, beta_H=0.0)
        pooled = solve_pooled_contract(params)
        perf = params.I_r1 + params.theta_L / (params.eta1 - params.eta3)
        assert pooled.perf == pytest.approx(perf, abs=1e-12)
        assert pooled.price == pytest.approx(
            teleoperator_utility(params.theta_L, perf, 0.0, params), abs=1e-12
        )

    def test_pure_high_mix(self):
        params = mkparams(beta_L=0.0, beta_H=1.0)
        pooled = solve_pooled_contract(params)
        assert pooled.perf == pytest.approx(
            params.I_r1 + params.theta_H / (params.eta1 - params.eta3), abs=1e-12
        )

    def test_requires_cost_spread(self):
        with pytest.raises(AdmissibilityError):
            solve_pooled_contract(mkparams(eta3=6.0))


class TestRandomAdmissibleParams:
    def test_draws_are_admissible_and_consistent(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            params = random_admissible_params(rng)
            assert params.admissible
            report = verify_feasibility(solve_contract(params), params)
            assert report.feasible
            assert report.ir_H > 0.0

    def test_reproducible(self):
        a = random_admissible_params(np.random.default_rng(11))
        b = random_admissible_params(np.random.default_rng(11))
        assert a == b
