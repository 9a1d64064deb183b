"""The *-transform, *-order, reconstruction and pdQ CSV files."""

from __future__ import annotations

import io
import math

import numpy as np
import pytest

from pdqkit.catalog import make_family
from pdqkit.errors import NotSquareIntegrableError, PdqError, ReconstructionError
from pdqkit.pdq import (
    Pdq,
    StarOrder,
    pdq_from_callable,
    read_pdq_csv,
    reconstruct_cdf,
    star_order,
    star_transform,
    uniform_pdq,
)

U = np.linspace(0.01, 0.99, 981)

TABLE1 = ["normal", "logistic", "laplace", "t", "cauchy", "exponential", "gumbel",
          "lognormal", "pareto"]
SHAPES = [("chi2", {"nu": 3}), ("weibull", {"k": 1.5}), ("pareto", {"a": 0.5}),
          ("power", {"b": 2}), ("betasym", {"b": 2}), ("beta", {"a": 2, "b": 3}),
          ("tukey", {"lam": -0.3}), ("tukey", {"lam": 0.14}), ("lognormal", {"sigma": 0.5}),
          ("gamma", {"k": 0.8}), ("loglog", {})]


def grid_copy(g: Pdq) -> Pdq:
    """The same pdQ served only through its chart."""
    return Pdq(None, chart=g.chart, endpoint_exponents=g.endpoint_exponents, name=g.name)


class TestStarTransform:
    def test_uniform_fixed_point(self):
        g = star_transform(uniform_pdq())
        assert np.max(np.abs(g(U) - 1.0)) < 1e-8
        assert g.kappa_parent == pytest.approx(1.0, abs=1e-12)

    def test_uniform_law(self):
        g = star_transform(make_family("uniform"))
        assert np.max(np.abs(g(U) - 1.0)) < 1e-12

    @pytest.mark.parametrize("name", TABLE1)
    def test_non_uniform_is_not_fixed(self, name):
        g = star_transform(make_family(name))
        assert np.max(np.abs(star_transform(g)(U) - 1.0)) > 1e-3

    def test_reflected_exponential(self):
        g = star_transform(make_family("reflected_exponential"))
        assert np.allclose(g(U), 2 * U, rtol=1e-13)

    def test_power_three_quarters_chain(self):
        g1 = star_transform(make_family("power", b=0.75))
        assert np.allclose(g1(U), (2 / 3) * U ** (-1 / 3), rtol=1e-12)
        g2 = star_transform(g1)
        assert np.max(np.abs(g2(U) / (0.5 * U ** -0.5) - 1)) < 1e-8
        with pytest.raises(NotSquareIntegrableError):
            star_transform(g2)

    @pytest.mark.parametrize("exponents", [(-0.5, 0.0), (None, None)])
    def test_not_square_integrable_pdq(self, exponents):
        g = pdq_from_callable(lambda u: 0.5 / np.sqrt(u), endpoint_exponents=exponents)
        with pytest.raises(NotSquareIntegrableError):
            star_transform(g)

    @pytest.mark.parametrize("name", TABLE1)
    def test_grid_matches_closed_form(self, name):
        g = star_transform(make_family(name))
        assert np.max(np.abs(grid_copy(g)(U) - g(U))) < 1e-6

    @pytest.mark.parametrize("name,kw", [(n, {}) for n in TABLE1] + SHAPES)
    def test_normalised(self, name, kw):
        g = star_transform(make_family(name, **kw))
        assert g.integral(lambda u, d, lg: d) == pytest.approx(1.0, abs=1e-8)
        assert g.chart.power_integral(1.0) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("name,kw", [("normal", {}), ("cauchy", {}), ("gumbel", {}),
                                         ("weibull", {"k": 1.5})])
    def test_iterate_normalised(self, name, kw):
        g = star_transform(star_transform(make_family(name, **kw)))
        assert g.chart.power_integral(1.0) == pytest.approx(1.0, abs=1e-8)
        assert np.all(np.diff(g.cdf(U)) > 0)

    @pytest.mark.parametrize("name,kw", [(n, {}) for n in TABLE1] + SHAPES)
    def test_location_scale_free(self, name, kw):
        base = star_transform(make_family(name, **kw), numeric=True)
        moved = star_transform(make_family(name, loc=3, scale=5, **kw), numeric=True)
        assert np.max(np.abs(base(U) - moved(U))) < 1e-8

    def test_cdf_and_quantile_invert(self):
        for name in ("cauchy", "normal", "exponential"):
            g = star_transform(star_transform(make_family(name)))
            assert np.max(np.abs(g.cdf(g.quantile(U)) - U)) < 1e-9

    def test_cauchy_pdq_cdf(self):
        g = star_transform(make_family("cauchy"))
        assert np.allclose(g.cdf(U), U - np.sin(2 * np.pi * U) / (2 * np.pi), atol=1e-14)

    def test_kappa_parent_kept(self):
        g = star_transform(make_family("normal"))
        assert g.kappa_parent == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-14)
        assert star_transform(g).kappa_parent == pytest.approx(g.kappa, rel=1e-12)

    def test_sup_norm(self):
        assert star_transform(make_family("cauchy")).sup_norm == pytest.approx(2.0)
        assert star_transform(make_family("power", b=0.75)).sup_norm == math.inf


class TestStarOrder:
    @pytest.mark.parametrize("b,order", [(0.75, 2), (0.6, 1), (0.7, 2), (0.9, 8)])
    def test_power_recursion(self, b, order):
        assert star_order(make_family("power", b=b)).order == order

    @pytest.mark.parametrize("b", [1.0, 2.0, 5.0])
    def test_power_infinite(self, b):
        so = star_order(make_family("power", b=b))
        assert so.infinite and str(so) == "infinite"

    @pytest.mark.parametrize("name,kw", [("normal", {}), ("cauchy", {}), ("pareto", {"a": 1}),
                                         ("pareto", {"a": 0.3}), ("loglog", {})])
    def test_infinite_up_to_n(self, name, kw):
        so = star_order(make_family(name, **kw), max_n=10)
        assert so.infinite and str(so) == "infinite-up-to-10"

    def test_chi2_finite(self):
        so = star_order(make_family("chi2", nu=1.5))
        assert so.order is not None and 1 <= so.order
        assert so.order == 2

    def test_moment_test_agrees_with_recursion(self):
        # the Power(b) law has mu_n finite iff n (1 - b) < 1
        for b in (0.7, 0.8, 0.9):
            d = make_family("beta", a=b, b=1.0)
            n_first_div = math.floor(1 / (1 - b) + 1e-12)
            if abs(1 / (1 - b) - round(1 / (1 - b))) > 1e-9:
                n_first_div += 1
            assert star_order(d, max_n=20).order == n_first_div - 2

    def test_str(self):
        assert str(StarOrder(3, None, "closed_form")) == "3"


class TestReconstruction:
    def test_power_two(self):
        g = star_transform(make_family("power", b=2))
        law = reconstruct_cdf(g)
        x = np.linspace(0, 1, 2001)
        assert np.max(np.abs(law.cdf(x) - x ** 2)) < 1e-6
        back = star_transform(law)
        assert np.max(np.abs(back(U) - g(U))) < 1e-6

    def test_uniform(self):
        law = reconstruct_cdf(uniform_pdq())
        x = np.linspace(0, 1, 101)
        assert np.max(np.abs(law.cdf(x) - x)) < 1e-8

    @pytest.mark.parametrize("name,kw", [("beta", {"a": 2, "b": 3}), ("tukey", {"lam": 2}),
                                         ("power", {"b": 5})])
    def test_round_trip(self, name, kw):
        g = star_transform(make_family(name, **kw))
        back = star_transform(reconstruct_cdf(g))
        assert np.max(np.abs(back(U) - g(U))) < 1e-6

    def test_two_u_fails(self):
        with pytest.raises(ReconstructionError, match="reconstruction condition fails"):
            reconstruct_cdf(pdq_from_callable(lambda u: 2 * u))

    def test_unbounded_support_fails(self):
        with pytest.raises(ReconstructionError):
            reconstruct_cdf(star_transform(make_family("normal")))


class TestCsv:
    @pytest.mark.parametrize("name,kw", [("cauchy", {}), ("normal", {}), ("power", {"b": 0.75}),
                                         ("loglog", {})])
    def test_round_trip(self, name, kw):
        g = star_transform(make_family(name, **kw))
        back = read_pdq_csv(io.StringIO(g.to_csv()))
        assert np.max(np.abs(back(U) / g(U) - 1)) < 1e-4
        assert back.chart.power_integral(1.0) == pytest.approx(1.0, abs=1e-10)

    def test_header(self):
        text = uniform_pdq().to_csv()
        assert text.splitlines()[0] == "u,density"

    def test_rejects_bad_rows(self):
        with pytest.raises(PdqError, match="malformed"):
            read_pdq_csv(io.StringIO("u,density\n0.5,abc\n"))


def test_callable_pdq_normalised():
    g = pdq_from_callable(lambda u: 1 + u)
    assert g(np.array([0.0, 1.0])) == pytest.approx([2 / 3, 4 / 3])
