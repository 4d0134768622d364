"""Two-type screening contract: closed-form solver plus a grid-search oracle.

Edge servers sell image-enhancement work as a menu of two bundles
(price, required model performance), one aimed at low-difficulty tasks and
one at high-difficulty tasks.  Buyers know their task's difficulty; sellers
only know the difficulty mix (beta_L, beta_H).  The optimal menu maximizes
the seller's expected utility subject to every buyer type accepting its own
bundle (individual rationality) and preferring it over the other type's
bundle (incentive compatibility).  At the optimum the low type is held at
zero surplus and the high type is exactly indifferent between bundles.

``grid_search_oracle`` re-derives the menu by brute force and is kept
deliberately ignorant of the closed form so the two can cross-check each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, ConfigError, EmptyFeasibleSet

# Utility reported when a performance score does not clear the log threshold
# I_r1 (the log term is undefined there).  Finite so settlement arithmetic
# stays finite, negative enough to always read as an IR violation.
DEFAULT_UTILITY_FLOOR = -10.0


@dataclass(frozen=True)
class ContractParams:
    """Scalar parameters of the pricing model.

    theta_L, theta_H   valuation of low / high difficulty tasks
    beta_L, beta_H     probability that a task is low / high difficulty
    eta1               edge-side cost per unit of required performance
    eta2               log-scale coefficient of the buyer utility
    eta3               linear quality coefficient of the buyer utility
    I_r1               performance threshold (log singularity at or below)
    I_r2               expected performance level
    delta_C            fixed compensation added to edge utility
    """

    theta_L: float
    theta_H: float
    beta_L: float
    beta_H: float
    eta1: float
    eta2: float
    eta3: float
    I_r1: float
    I_r2: float
    delta_C: float

    def validate(self) -> None:
        """Check the structural invariants; raises ConfigError."""
        if not (0.0 < self.beta_L < 1.0 and 0.0 < self.beta_H < 1.0):
            raise ConfigError("beta_L and beta_H must both lie in (0, 1)")
        if abs(self.beta_L + self.beta_H - 1.0) > 1e-12:
            raise ConfigError("beta_L + beta_H must equal 1")
        if not (self.theta_H > self.theta_L > 0.0):
            raise ConfigError("need theta_H > theta_L > 0")
        if not (self.I_r2 > self.I_r1 > 0.0):
            raise ConfigError("need I_r2 > I_r1 > 0")
        if min(self.eta1, self.eta2, self.eta3) <= 0.0:
            raise ConfigError("eta1, eta2, eta3 must be positive")

    @property
    def admissible(self) -> bool:
        """True when the closed-form solution applies."""
        return self.eta1 > self.eta3 and self.theta_L > self.beta_H * self.theta_H

    def require_admissible(self) -> None:
        if not self.eta1 > self.eta3:
            raise AdmissibilityError(
                f"eta1={self.eta1} must exceed eta3={self.eta3}"
            )
        if not self.theta_L > self.beta_H * self.theta_H:
            raise AdmissibilityError(
                f"theta_L={self.theta_L} must exceed "
                f"beta_H*theta_H={self.beta_H * self.theta_H}"
            )


@dataclass(frozen=True)
class ContractBundle:
    """One menu entry: pay ``price`` for required performance ``perf``."""

    price: float
    perf: float


@dataclass(frozen=True)
class ContractMenu:
    """The two-bundle menu; ``low`` targets low-difficulty tasks."""

    low: ContractBundle
    high: ContractBundle


@dataclass(frozen=True)
class FeasibilityReport:
    """Residuals of the four menu constraints.

    ir_* are participation residuals (own-bundle utility), ic_* are
    self-selection residuals (own-bundle utility minus other-bundle
    utility).  All four must be >= -tol for the menu to be feasible.
    ``low_ir_binding`` / ``high_ic_binding`` flag the two equalities that
    characterize the optimum.
    """

    ir_L: float
    ir_H: float
    ic_L: float
    ic_H: float
    feasible: bool
    low_ir_binding: bool
    high_ic_binding: bool


def teleoperator_utility(
    theta: float,
    perf: float,
    price: float,
    params: ContractParams,
    floor: float = DEFAULT_UTILITY_FLOOR,
) -> float:
    """Buyer-side utility of performance ``perf`` bought at ``price``.

    theta * ln(eta2 * (perf - I_r1)) + eta3 * (perf - I_r2) - price.
    At or below the threshold I_r1 the log term is undefined and the
    configured floor is returned instead.
    """
    if perf <= params.I_r1:
        return floor
    return (
        theta * math.log(params.eta2 * (perf - params.I_r1))
        + params.eta3 * (perf - params.I_r2)
        - price
    )


def edge_utility(bundle: ContractBundle, params: ContractParams) -> float:
    """Seller-side utility of one bundle: price - eta1 * perf + delta_C."""
    return bundle.price - params.eta1 * bundle.perf + params.delta_C


def solve_contract(params: ContractParams) -> ContractMenu:
    """Closed-form optimal menu.

    Low bundle performance is I_r1 + (theta_L - beta_H*theta_H) /
    (beta_L*(eta1 - eta3)), priced so the low type keeps zero surplus.
    High bundle performance is I_r1 + theta_H / (eta1 - eta3), priced so
    the high type is indifferent between the two bundles (it keeps a
    strictly positive information rent).

    Raises AdmissibilityError outside eta1 > eta3 and
    theta_L > beta_H * theta_H, where this solution is not guaranteed.
    """
    params.require_admissible()
    spread = params.eta1 - params.eta3
    perf_low = params.I_r1 + (params.theta_L - params.beta_H * params.theta_H) / (
        params.beta_L * spread
    )
    perf_high = params.I_r1 + params.theta_H / spread
    price_low = teleoperator_utility(params.theta_L, perf_low, 0.0, params)
    price_high = (
        teleoperator_utility(params.theta_H, perf_high, 0.0, params)
        - teleoperator_utility(params.theta_H, perf_low, 0.0, params)
        + price_low
    )
    return ContractMenu(
        low=ContractBundle(price=price_low, perf=perf_low),
        high=ContractBundle(price=price_high, perf=perf_high),
    )


def expected_system_utility(menu: ContractMenu, params: ContractParams) -> float:
    """Seller's expected utility of a menu under the difficulty mix."""
    return (
        params.beta_L * (menu.low.price - params.eta1 * menu.low.perf)
        + params.beta_H * (menu.high.price - params.eta1 * menu.high.perf)
        + params.delta_C
    )


def verify_feasibility(
    menu: ContractMenu,
    params: ContractParams,
    tol: float = 1e-9,
    floor: float = DEFAULT_UTILITY_FLOOR,
) -> FeasibilityReport:
    """Evaluate the four menu constraints for both buyer types."""
    u_ll = teleoperator_utility(params.theta_L, menu.low.perf, menu.low.price, params, floor)
    u_lh = teleoperator_utility(params.theta_L, menu.high.perf, menu.high.price, params, floor)
    u_hh = teleoperator_utility(params.theta_H, menu.high.perf, menu.high.price, params, floor)
    u_hl = teleoperator_utility(params.theta_H, menu.low.perf, menu.low.price, params, floor)
    ir_L = u_ll
    ir_H = u_hh
    ic_L = u_ll - u_lh
    ic_H = u_hh - u_hl
    feasible = all(r >= -tol for r in (ir_L, ir_H, ic_L, ic_H))
    return FeasibilityReport(
        ir_L=ir_L,
        ir_H=ir_H,
        ic_L=ic_L,
        ic_H=ic_H,
        feasible=feasible,
        low_ir_binding=abs(ir_L) <= tol,
        high_ic_binding=abs(ic_H) <= tol,
    )


def grid_search_oracle(
    params: ContractParams,
    perf_range: tuple[float, float],
    step: float,
    tol: float = 1e-9,
) -> ContractMenu:
    """Brute-force verification oracle for the menu problem.

    Enumerates every (low perf, high perf) pair on the grid, prices both
    bundles by the binding participation / self-selection equalities,
    rejects pairs violating any of the four constraints, and returns the
    feasible pair with the highest expected system utility.  Knows nothing
    about the closed form; does not require admissibility.
    """
    lo, hi = perf_range
    if not lo > params.I_r1:
        raise ConfigError(f"perf_range must start above I_r1={params.I_r1}")
    if step <= 0.0:
        raise ConfigError("step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = lo + step * np.arange(count)

    log_term = np.log(params.eta2 * (grid - params.I_r1))
    lin_term = params.eta3 * (grid - params.I_r2)
    gross_low = params.theta_L * log_term + lin_term
    gross_high = params.theta_H * log_term + lin_term
    price_low = gross_low  # participation binds for the low type

    best_obj = -math.inf
    best: tuple[int, int, float] | None = None
    for i in range(count):
        price_high = price_low[i] + gross_high - gross_high[i]
        ir_L = gross_low[i] - price_low[i]
        u_hl = gross_high[i] - price_low[i]
        ir_H = gross_high - price_high
        ic_H = ir_H - u_hl
        ic_L = ir_L - (gross_low - price_high)
        feasible = (ir_H >= -tol) & (ic_L >= -tol) & (ic_H >= -tol) & (ir_L >= -tol)
        if not feasible.any():
            continue
        objective = (
            params.beta_L * (price_low[i] - params.eta1 * grid[i])
            + params.beta_H * (price_high - params.eta1 * grid)
            + params.delta_C
        )
        objective = np.where(feasible, objective, -np.inf)
        j = int(np.argmax(objective))
        if objective[j] > best_obj:
            best_obj = float(objective[j])
            best = (i, j, float(price_high[j]))
    if best is None:
        raise EmptyFeasibleSet("no grid point satisfies the IR/IC constraints")
    i, j, p_high = best
    return ContractMenu(
        low=ContractBundle(price=float(price_low[i]), perf=float(grid[i])),
        high=ContractBundle(price=p_high, perf=float(grid[j])),
    )


def solve_pooled_contract(params: ContractParams) -> ContractBundle:
    """Single take-it-or-leave-it bundle for the no-screening baseline.

    Uses the population-average valuation theta_bar = beta_L*theta_L +
    beta_H*theta_H, requires perf = I_r1 + theta_bar/(eta1 - eta3), and
    prices at the average type's full willingness to pay.
    """
    if not params.eta1 > params.eta3:
        raise AdmissibilityError(f"eta1={params.eta1} must exceed eta3={params.eta3}")
    theta_bar = params.beta_L * params.theta_L + params.beta_H * params.theta_H
    perf = params.I_r1 + theta_bar / (params.eta1 - params.eta3)
    price = teleoperator_utility(theta_bar, perf, 0.0, params)
    return ContractBundle(price=price, perf=perf)


def random_admissible_params(rng, delta_C_range=(0.0, 20.0), max_tries=1000) -> ContractParams:
    """Draw parameters inside the closed form's comfort zone.

    Rejection-samples until eta1 > eta3, theta_L > beta_H * theta_H, and
    the implied low-bundle log argument exceeds one
    (eta2 * (perf_low - I_r1) > 1).  Outside that last region the binding
    prices would hand the high type negative surplus, so the closed form
    stops being the constrained optimum.
    """
    for _ in range(max_tries):
        theta_L = float(rng.uniform(0.5, 2.0))
        theta_H = theta_L * float(rng.uniform(1.05, 2.5))
        beta_H = float(rng.uniform(0.05, 0.95))
        beta_L = 1.0 - beta_H
        eta1 = float(rng.uniform(2.0, 10.0))
        eta3 = eta1 * float(rng.uniform(0.1, 0.8))
        eta2 = float(rng.uniform(20.0, 500.0))
        I_r1 = float(rng.uniform(0.5, 2.0))
        I_r2 = I_r1 + float(rng.uniform(0.05, 0.5))
        delta_C = float(rng.uniform(*delta_C_range))
        if not theta_L > beta_H * theta_H:
            continue
        perf_low_gap = (theta_L - beta_H * theta_H) / (beta_L * (eta1 - eta3))
        if eta2 * perf_low_gap <= 1.0:
            continue
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
    raise RuntimeError("failed to draw admissible contract parameters")
