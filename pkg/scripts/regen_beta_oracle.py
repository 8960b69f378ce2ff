#!/usr/bin/env python3
"""Regenerate the frozen Beta-quantile oracle values used by the
acceptance suite.

The oracle is independent of the package's own Beta code: the CDF is an
adaptive quadrature of the density, inverted by plain bisection.
"""

import json
import math
import pathlib

from scipy.integrate import quad

SHAPES_A = (0.5, 1.0, 2.0, 2.5, 10.0)
SHAPES_B = (0.5, 1.0, 3.0, 50.0, 97.0)
PROBS = (0.01, 0.25, 0.5, 0.9, 0.95, 0.99)


def beta_cdf_quad(a: float, b: float, x: float) -> float:
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)

    def density(t: float) -> float:
        return math.exp(log_norm + (a - 1) * math.log(t) + (b - 1) * math.log1p(-t))

    val, _ = quad(density, 0.0, x, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


def quantile_bisect(a: float, b: float, prob: float) -> float:
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if beta_cdf_quad(a, b, mid) < prob:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main() -> None:
    table = {}
    for a in SHAPES_A:
        for b in SHAPES_B:
            for p in PROBS:
                table[f"{a}:{b}:{p}"] = quantile_bisect(a, b, p)
    out = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "beta_quantiles.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(table, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(table)} oracle values to {out}")


if __name__ == "__main__":
    main()
