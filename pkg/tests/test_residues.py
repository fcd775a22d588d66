import math

import numpy as np
import pytest

from zetamellin import residues
from zetamellin.errors import FitResidualError, NonAnalyticError, OracleNotRunError, UnsupportedError
from zetamellin.residues import (
    ORACLE,
    PAPER,
    SubtractionPolynomial,
    fit_residue_polynomial,
    paper_polynomial,
    residue_oracle,
    subtraction_poly,
)
from zetamellin.specialfn import EULER_GAMMA, stieltjes, zeta


@pytest.mark.parametrize("F, expected", [
    (lambda s: 1 / (s - 1), 1.0),
    (lambda s: 1 / (s - 1) ** 2, 0.0),
    (lambda s: zeta(s), 1.0),
    (lambda s: zeta(s) * 2.0 ** s, 2.0),
    (lambda s: np.exp(s) / (s - 1) ** 3, math.e / 2),
])
@pytest.mark.parametrize("r", [0.1, 0.25])
def test_residue_oracle_known_laurent_data(F, expected, r):
    assert abs(residue_oracle(F, 1.0, r=r) - expected) < 1e-10


def test_residue_radius_invariance():
    F = residues.residue_integrand("lambda1", 1.0)
    assert abs(residue_oracle(F, 1.0, 0.1) - residue_oracle(F, 1.0, 0.25)) < 1e-10


def test_residue_oracle_detects_nonanalytic():
    # a second pole at s = 1.15 sits between the two test radii
    F = lambda s: 1 / (s - 1) + 1 / (s - 1.15)
    with pytest.raises(NonAnalyticError):
        residue_oracle(F, 1.0, r=0.25)


def test_residue_oracle_argument_checks():
    with pytest.raises(ValueError):
        residue_oracle(lambda s: s, 0.0, r=0.5)
    with pytest.raises(ValueError):
        residue_oracle(lambda s: s, 0.0, M=16)


def test_lambda1_fit_against_laurent_expansion():
    # pi^2 csc^2 = 1/w^2 + pi^2/3 + ..., zeta(1+w) = 1/w + g0 - g1 w + ...
    p = fit_residue_polynomial("lambda1")
    g0, g1 = stieltjes(0), stieltjes(1)
    assert abs(p.c2 - 0.5) < 1e-9
    assert abs(p.c1 - g0) < 1e-9
    assert abs(p.c0 - (-g1 + math.pi ** 2 / 3)) < 1e-9
    assert p.c3 == 0.0 and abs(p.raw_c3) < 1e-9
    assert p.fit_residual <= 1e-8
    assert p.provenance == ORACLE


def test_lambda2_fit_against_printed_bracket():
    oracle = fit_residue_polynomial("lambda2")
    paper = paper_polynomial("lambda2")
    for a, b in zip(oracle.coefficients, paper.coefficients):
        assert abs(a - b) < 1e-9
    assert abs(oracle.c3 + 1 / 3) < 1e-9


def test_paper_values_at_x_equal_one():
    p1 = subtraction_poly("lambda1", PAPER)
    assert abs(p1(0.0) - 0.5 * (-2 * stieltjes(1) + math.pi ** 2 / 3)) < 1e-14
    assert abs(p1(0.0) - 1.7177) < 1e-4
    p2 = subtraction_poly("lambda2", PAPER)
    assert abs(p2(0.0) - (-stieltjes(2) - EULER_GAMMA * math.pi ** 2)) < 1e-13
    assert abs(p2(0.0) + 5.688) < 1e-3


def test_oracle_not_run():
    residues._forget_fits()
    with pytest.raises(OracleNotRunError):
        subtraction_poly("lambda1", ORACLE, run_oracle=False)
    fit_residue_polynomial("lambda1")
    assert subtraction_poly("lambda1", "oracle", run_oracle=False).provenance == ORACLE


def test_polynomial_invariants_and_evaluation():
    with pytest.raises(ValueError):
        SubtractionPolynomial("lambda1", 0, 0, 0, 1.0, ORACLE)
    with pytest.raises(ValueError):
        SubtractionPolynomial("lambda2", 0, 0, 0, 0, "guess")
    with pytest.raises(ValueError):
        SubtractionPolynomial("lambda2", math.nan, 0, 0, 0, PAPER)
    with pytest.raises(UnsupportedError):
        SubtractionPolynomial("lambda3", 0, 0, 0, 0, PAPER)
    p = SubtractionPolynomial("lambda2", 1.0, 2.0, 3.0, 4.0, PAPER)
    assert p(2.0) == 1 + 4 + 12 + 32
    assert np.allclose(p(np.array([0.0, 1.0])), [1.0, 10.0])
    assert p.at_x(math.e) == pytest.approx(10.0)


def test_fit_residual_guard(monkeypatch):
    # a residue with a log^4 component cannot be a cubic
    monkeypatch.setattr(residues, "residue_integrand",
                        lambda kind, x: (lambda s: np.exp((s - 1) * math.log(x)) / (s - 1) ** 5))
    with pytest.raises(FitResidualError):
        fit_residue_polynomial("lambda2")
    residues._forget_fits()
