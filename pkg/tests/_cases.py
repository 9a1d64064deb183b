"""Family instances shared by several test modules."""

from __future__ import annotations

# one instance per catalog family with a bounded density
BOUNDED = [
    ("uniform", {}), ("normal", {}), ("logistic", {}), ("laplace", {}), ("t", {"nu": 2.0}),
    ("t", {"nu": 0.5}), ("cauchy", {}), ("exponential", {}), ("reflected_exponential", {}),
    ("gumbel", {}), ("lognormal", {"sigma": 1.0}), ("lognormal", {"sigma": 2.0}),
    ("pareto", {"a": 1.0}), ("pareto", {"a": 0.3}), ("power", {"b": 1.0}), ("power", {"b": 2.0}),
    ("power", {"b": 5.0}), ("beta", {"a": 2.0, "b": 3.0}), ("betasym", {"b": 2.0}),
    ("gamma", {"k": 1.0}), ("gamma", {"k": 3.0}), ("chi2", {"nu": 4.0}),
    ("weibull", {"k": 1.0}), ("weibull", {"k": 2.5}), ("tukey", {"lam": 0.14}),
    ("tukey", {"lam": 2.0}), ("tukey", {"lam": -0.5}),
]

# families and parameters where both iteration engines are compared
ENGINE_CASES = [("normal", {}), ("cauchy", {}), ("exponential", {}), ("power", {"b": 2.0}),
                ("loglog", {})]


def case_id(case) -> str:
    name, kw = case
    return name + "".join(f"-{k}{v:g}" for k, v in kw.items())


# printed three-decimal rows: family spec -> (I(U:f*), I(f*:U), sigma0, sigma1, J,
# J / sigma1, sigma0 / sigma1)
TABLE1 = {
    "normal": (0.153, 0.097, 0.707, 0.354, 0.250, 0.707, 2.000),
    "logistic": (0.208, 0.125, 0.843, 0.393, 0.333, 0.848, 2.143),
    "laplace": (0.307, 0.193, 1.000, 0.500, 0.500, 1.000, 2.000),
    "t:nu=2": (0.391, 0.200, 1.264, 0.463, 0.591, 1.276, 2.728),
    "cauchy": (0.693, 0.307, 1.814, 0.538, 1.000, 1.857, 3.369),
    "exponential": (0.307, 0.193, 1.000, 0.500, 0.500, 1.000, 2.000),
    "gumbel": (0.191, 0.116, 0.803, 0.381, 0.307, 0.806, 2.109),
    "lognormal": (0.403, 0.222, 1.225, 0.500, 0.625, 1.250, 2.449),
    "pareto:a=1": (0.901, 0.432, 2.000, 0.667, 1.333, 2.000, 3.000),
}
