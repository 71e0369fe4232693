"""Model problems: manufactured linear and nonlinear cases, Fisher and Huxley."""

from __future__ import annotations

import math

import numpy as np

from fracfast.pde import ProblemSpec

PI = math.pi


def _bump(x):
    return x**4 * (PI - x) ** 4


def _manufactured(alpha: float):
    def exact(x, t):
        return _bump(x) * (np.exp(-x) * t ** (3.0 + alpha) + 1.0)

    return exact


def _linear_forcing(alpha: float):
    g4 = math.gamma(4.0 + alpha)

    def f(x, t):
        poly = (x**2 * (56.0 - 16.0 * x + x**2)
                - 2.0 * PI * x * (28.0 - 12.0 * x + x**2)
                + PI**2 * (12.0 - 8.0 * x + x**2))
        return (g4 * _bump(x) * np.exp(-x) * t**3 / 6.0
                - x**2 * (PI - x) ** 2 * (t ** (3.0 + alpha) * np.exp(-x) * poly
                                          + 4.0 * (3.0 * PI**2 - 14.0 * PI * x + 14.0 * x**2)))

    return f


def example31(alpha: float) -> ProblemSpec:
    """Linear forced problem on ``[0, pi]`` with a smooth manufactured solution."""
    exact = _manufactured(alpha)
    return ProblemSpec(
        name="example31", kind="linear-forced", alpha=alpha, a=0.0, b=PI,
        u0=_bump, boundary=exact, forcing=_linear_forcing(alpha), exact=exact,
    )


def logistic(u):
    return 0.01 * u * (1.0 - u)


def example41(alpha: float) -> ProblemSpec:
    """Nonlinear forced problem with ``f(u) = 0.01 u (1 - u)``.

    The initial data is the ``t = 0`` trace of the exact solution; a zero
    initial state would be incompatible with it.
    """
    exact = _manufactured(alpha)
    linear = _linear_forcing(alpha)

    def g(x, t):
        return linear(x, t) - logistic(exact(x, t))

    return ProblemSpec(
        name="example41", kind="nonlinear-forced", alpha=alpha, a=0.0, b=PI,
        u0=_bump, boundary=exact, forcing=g, nonlinearity=logistic, exact=exact,
    )


def fisher_term(u):
    return -u * (1.0 - u)


def huxley_term(u):
    return -0.1 * u * (1.0 - u) * (u - 0.001)


def fisher(alpha: float) -> ProblemSpec:
    def u0(x):
        return math.sqrt(10.0 / PI) * np.exp(-10.0 * x**2)

    return ProblemSpec(name="fisher", kind="fisher-abc", alpha=alpha, a=-6.0, b=6.0,
                       u0=u0, nonlinearity=fisher_term)


def huxley(alpha: float) -> ProblemSpec:
    def u0(x):
        return np.exp(-10.0 * (x - 0.5) ** 2) + np.exp(-10.0 * (x + 0.5) ** 2)

    return ProblemSpec(name="huxley", kind="huxley-abc", alpha=alpha, a=-8.0, b=8.0,
                       u0=u0, nonlinearity=huxley_term)


PROBLEMS = {"example31": example31, "example41": example41, "fisher": fisher, "huxley": huxley}


def make_problem(name: str, alpha: float) -> ProblemSpec:
    try:
        return PROBLEMS[name](alpha)
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; expected one of {sorted(PROBLEMS)}") from None
