"""Parameter sweeps behind the price, delta and conditional-fit figures.

Each sweep returns (header, rows) ready for ``csv_export.write_csv``:

- strike_maturity: Chebyshev (n = 10) prices on K in [0, 10] x T in [1/12, 1].
- spot_surface: Chebyshev (n = 15) prices on s1, s2 in [96, 106].
- delta2_surface: Chebyshev deltas on the same spot grid.
- converge: each method's error against the quadrature oracle as the order
  (and the trapezoid count N) grows.
- cond_fit: C(y) next to its Bernstein, Chebyshev and Taylor expansions on
  [-1.5, 1.5].

``SweepOptions`` carries the run flags (order, trapezoid points, window and
tail mode). Unset fields keep the defaults above; a sweep whose grid runs
over a field rejects an explicit value for it.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np

from app.config import get_settings
from app.services.pricing import bernstein, chebyshev
from app.services.pricing.bs_core import ConditionalPriceEvaluator
from app.services.pricing.errors import ParameterDomainError
from app.services.pricing.model import BasketContract, MarketModel, Window, conditional_law
from app.services.pricing.oracles import quad_price
from app.services.pricing.taylor import taylor_coeffs, taylor_price

logger = logging.getLogger(__name__)

Rows = list[tuple]
Table = tuple[tuple[str, ...], Rows]

STRIKES = tuple(float(k) for k in range(11))
MATURITIES = tuple(m / 12 for m in range(1, 13))
SPOTS = tuple(float(s) for s in range(96, 107))
CHEB_ORDERS = tuple(range(2, 21, 2))
CHEB_QUAD_POINTS = (20, 50, 100, 200)
BERNSTEIN_ORDERS = (10, 25, 50, 100)
FIT_BERNSTEIN_ORDERS = (4, 10, 100, 200)
FIT_CHEB_ORDERS = (4, 10, 15)
FIT_WINDOW = (-1.5, 1.5)
FIT_POINTS = 61


@dataclass(frozen=True)
class SweepOptions:
    """Run flags forwarded to a sweep; None keeps the sweep's default."""

    order: int | None = None
    quad_points: int | None = None
    window_a: float | None = None
    window_b: float | None = None
    tail: str = "truncate"

    def window(
        self, model: MarketModel, contract: BasketContract, default: tuple[float, float]
    ) -> Window:
        a = default[0] if self.window_a is None else self.window_a
        b = default[1] if self.window_b is None else self.window_b
        return Window.from_bounds(a, b, conditional_law(model, contract))

    def points(self) -> int:
        return get_settings().cheb_quad_points if self.quad_points is None else self.quad_points

    def reject(self, kind: str, *fields: str) -> None:
        given = [name for name in fields if getattr(self, name) is not None]
        if given:
            raise ParameterDomainError(f"Sweep '{kind}' runs over {given} and cannot fix them")


Sweep = Callable[[MarketModel, BasketContract, SweepOptions], Table]


def _default_bounds() -> tuple[float, float]:
    settings = get_settings()
    return settings.window_a, settings.window_b


def strike_maturity(model: MarketModel, contract: BasketContract, options: SweepOptions) -> Table:
    n = 10 if options.order is None else options.order
    quad_points = options.points()
    rows: Rows = []
    for maturity in MATURITIES:
        for strike in STRIKES:
            grid_contract = replace(contract, strike=strike, maturity=maturity)
            window = options.window(model, grid_contract, _default_bounds())
            price = chebyshev.cheb_price(
                model, grid_contract, n, quad_points, window, tail=options.tail
            )
            rows.append((strike, maturity, price.value))
    return ("strike", "maturity", "price"), rows


def spot_surface(model: MarketModel, contract: BasketContract, options: SweepOptions) -> Table:
    n = get_settings().cheb_order if options.order is None else options.order
    quad_points = options.points()
    window = options.window(model, contract, _default_bounds())
    rows: Rows = []
    for s1 in SPOTS:
        for s2 in SPOTS:
            shifted = model.with_spots(s1=s1, s2=s2)
            price = chebyshev.cheb_price(
                shifted, contract, n, quad_points, window, tail=options.tail
            )
            rows.append((s1, s2, price.value))
    return ("s1", "s2", "price"), rows


def delta2_surface(model: MarketModel, contract: BasketContract, options: SweepOptions) -> Table:
    n = get_settings().cheb_order if options.order is None else options.order
    quad_points = options.points()
    window = options.window(model, contract, _default_bounds())
    rows: Rows = []
    for s1 in SPOTS:
        for s2 in SPOTS:
            shifted = model.with_spots(s1=s1, s2=s2)
            deltas = [
                chebyshev.cheb_delta(
                    asset, shifted, contract, n, quad_points, window, tail=options.tail
                )
                for asset in (1, 2)
            ]
            rows.append((s1, s2, *deltas))
    return ("s1", "s2", "delta_s1", "delta_s2"), rows


def converge(model: MarketModel, contract: BasketContract, options: SweepOptions) -> Table:
    options.reject("converge", "order", "quad_points")
    reference = quad_price(model, contract)
    window = options.window(model, contract, _default_bounds())
    default_points = options.points()
    tail = options.tail
    rows: Rows = []

    for n in CHEB_ORDERS:
        price = chebyshev.cheb_price(model, contract, n, default_points, window, tail=tail).value
        rows.append(("chebyshev", n, default_points, price, price - reference))
    for quad_points in CHEB_QUAD_POINTS:
        price = chebyshev.cheb_price(model, contract, 15, quad_points, window, tail=tail).value
        rows.append(("chebyshev", 15, quad_points, price, price - reference))
    for n in BERNSTEIN_ORDERS:
        price = bernstein.bernstein_price(model, contract, n, window, tail=tail).value
        rows.append(("bernstein", n, None, price, price - reference))
    for order in (1, 2):
        price = taylor_price(model, contract, 0.0, order=order).value
        rows.append((f"taylor{order}", order, None, price, price - reference))

    logger.info("Convergence sweep against quadrature reference %.8f", reference)
    return ("method", "order", "quad_points", "price", "error"), rows


def cond_fit(model: MarketModel, contract: BasketContract, options: SweepOptions) -> Table:
    options.reject("cond_fit", "order")
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    window = options.window(model, contract, FIT_WINDOW)
    ys = np.linspace(window.a, window.b, FIT_POINTS)
    quad_points = options.points()

    columns: list[np.ndarray] = [ys, np.asarray(evaluator(ys))]
    header = ["y", "conditional"]
    for n in FIT_BERNSTEIN_ORDERS:
        expansion = bernstein.expand(evaluator, n, window, tail=options.tail)
        columns.append(np.asarray(bernstein.eval_expansion(expansion, ys)))
        header.append(f"bern{n}")
    for n in FIT_CHEB_ORDERS:
        expansion = chebyshev.fit(evaluator, n, quad_points, window, tail=options.tail)
        columns.append(np.asarray(chebyshev.eval_expansion(expansion, ys)))
        header.append(f"cheb{n}")
    taylor = taylor_coeffs(evaluator, evaluator.law.mean_y2)
    for order in (1, 2):
        columns.append(np.asarray(taylor(ys, order=order)))
        header.append(f"taylor{order}")

    rows = [tuple(float(col[i]) for col in columns) for i in range(len(ys))]
    return tuple(header), rows


SWEEPS: dict[str, Sweep] = {
    "strike_maturity": strike_maturity,
    "spot_surface": spot_surface,
    "delta2_surface": delta2_surface,
    "converge": converge,
    "cond_fit": cond_fit,
}


def run_sweep(
    kind: str,
    model: MarketModel,
    contract: BasketContract,
    options: SweepOptions | None = None,
) -> Table:
    """Run the named sweep around the given market and contract.

    Raises:
        ParameterDomainError: For an unknown sweep, or an option the sweep
            varies itself.
    """
    try:
        sweep = SWEEPS[kind]
    except KeyError:
        raise ParameterDomainError(
            f"Unknown sweep '{kind}', expected one of {sorted(SWEEPS)}"
        ) from None
    logger.info("Running sweep %s", kind)
    return sweep(model, contract, options or SweepOptions())
