import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circadia import (
    BiasedCosine,
    Cosine,
    Custom,
    PolynomialEven,
    ValidationError,
    classify_asymptotics,
)

TWO_PI = 2.0 * math.pi


def all_kinds():
    phi = np.linspace(0.0, TWO_PI, 4001)
    return [
        Cosine(),
        BiasedCosine(math.pi / 3.0),
        PolynomialEven([0.0, 0.5]),
        PolynomialEven([0.1, -0.25, 0.03]),
        Custom(phi, -np.cos(phi)),
    ]


def test_cosine_values_and_periodicity():
    p = Cosine()
    assert p.u(0.0) == pytest.approx(-1.0, abs=1e-15)
    assert p.du(0.0) == pytest.approx(0.0, abs=1e-15)
    assert p.du(math.pi / 2.0) == pytest.approx(1.0, rel=1e-15)
    assert p.d2u(0.0) == pytest.approx(1.0, rel=1e-15)
    phi = np.linspace(-7.0, 7.0, 101)
    assert np.max(np.abs(p.u(phi + TWO_PI) - p.u(phi))) < 1e-12
    assert p.is_periodic
    assert p.symmetric


def test_biased_cosine_shifts_the_minimum():
    ext = 1.1
    p = BiasedCosine(ext)
    assert p.u(ext) == pytest.approx(-1.0, rel=1e-15)
    assert p.du(ext) == pytest.approx(0.0, abs=1e-15)
    assert p.is_periodic
    assert not BiasedCosine(math.pi / 3.0).symmetric
    assert BiasedCosine(0.0).symmetric


def test_polynomial_even_matches_direct_evaluation():
    p = PolynomialEven([0.25, -0.5, 0.125])
    phi = np.linspace(-3.0, 3.0, 41)
    expect = 0.25 - 0.5 * phi**2 + 0.125 * phi**4
    assert np.max(np.abs(p.u(phi) - expect)) < 1e-12
    d1 = -1.0 * phi + 0.5 * phi**3
    assert np.max(np.abs(p.du(phi) - d1)) < 1e-12
    d2 = -1.0 + 1.5 * phi**2
    assert np.max(np.abs(p.d2u(phi) - d2)) < 1e-12
    assert p.symmetric
    assert not p.is_periodic


def test_custom_tabulation_of_cosine_tracks_the_exact_kind():
    phi = np.linspace(-8.0, 8.0, 6001)
    p = Custom(phi, -np.cos(phi))
    dense = np.linspace(-7.5, 7.5, 2000)
    assert np.max(np.abs(p.u(dense) + np.cos(dense))) < 1e-8
    assert np.max(np.abs(p.du(dense) - np.sin(dense))) < 1e-6


def test_custom_refuses_extrapolation_and_unsorted_grids(tmp_path):
    phi = np.linspace(0.0, TWO_PI, 512)
    p = Custom(phi, -np.cos(phi))
    with pytest.raises(ValidationError):
        p.u(-1.0)
    with pytest.raises(ValidationError):
        p.u(TWO_PI + 0.5)
    bad = phi.copy()
    bad[10] = bad[12]
    with pytest.raises(ValidationError):
        Custom(bad, -np.cos(bad))
    csv = tmp_path / "pot.csv"
    lines = ["# phi,u"] + [f"{float(a)!r},{float(b)!r}"
                           for a, b in zip(phi, -np.cos(phi))]
    csv.write_text("\n".join(lines))
    q = Custom.from_csv(str(csv))
    probe = np.linspace(0.5, 5.5, 200)
    assert np.max(np.abs(q.u(probe) - p.u(probe))) < 1e-12


def test_eval_rejects_unknown_order():
    with pytest.raises(ValidationError):
        Cosine().eval(0.0, order=3)


@pytest.mark.parametrize("p", all_kinds(), ids=lambda p: type(p).__name__)
def test_first_derivative_matches_centered_differences(p):
    rng = np.random.default_rng(42)
    pts = rng.uniform(0.5, 5.5, size=24)
    h = 1e-5
    fd = (np.asarray(p.u(pts + h)) - np.asarray(p.u(pts - h))) / (2.0 * h)
    du = np.asarray(p.du(pts))
    scale = np.maximum(np.abs(du), 1.0)
    assert np.max(np.abs(du - fd) / scale) < 1e-6


@pytest.mark.parametrize("p", all_kinds(), ids=lambda p: type(p).__name__)
def test_second_derivative_matches_centered_differences(p):
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.5, 5.5, size=24)
    h = 1e-4
    fd = (np.asarray(p.u(pts + h)) - 2.0 * np.asarray(p.u(pts))
          + np.asarray(p.u(pts - h))) / h**2
    d2 = np.asarray(p.d2u(pts))
    scale = np.maximum(np.abs(d2), 1.0)
    assert np.max(np.abs(d2 - fd) / scale) < 1e-5


@given(phi=st.floats(-50.0, 50.0))
def test_cosine_derivatives_are_exact_trig(phi):
    p = Cosine()
    assert p.u(phi) == pytest.approx(-math.cos(phi), abs=1e-12)
    assert p.du(phi) == pytest.approx(math.sin(phi), abs=1e-12)
    assert p.d2u(phi) == pytest.approx(math.cos(phi), abs=1e-12)


def test_classification_bounded_kind_is_sublinear():
    report = classify_asymptotics(Cosine(), gamma_probe=1.0, phi_max=1e4)
    assert report.tag == "Sublinear1a"
    assert report.measured_tag == "Sublinear1a"


def test_classification_biased_kind_is_asymmetric_sublinear():
    report = classify_asymptotics(BiasedCosine(math.pi / 3.0),
                                  gamma_probe=0.5, phi_max=1e4)
    assert report.tag == "Sublinear1b"
    assert report.measured_tag == "Sublinear1b"


def test_classification_quartic_growth_is_superlinear():
    p = PolynomialEven([0.0, 0.0, 1.0])
    report = classify_asymptotics(p, gamma_probe=1.9, phi_max=1e4)
    assert report.tag == "Superlinear2"


def test_classification_quadratic_is_quasilinear():
    p = PolynomialEven([0.0, 0.5])
    report = classify_asymptotics(p, gamma_probe=1.0, phi_max=1e4)
    assert report.tag == "QuasilinearL"


def test_classification_finite_support_is_inapplicable():
    phi = np.linspace(0.0, TWO_PI, 512)
    report = classify_asymptotics(Custom(phi, -np.cos(phi)),
                                  gamma_probe=1.0, phi_max=1e4)
    assert report.tag == "Unclassified"
    assert "compact-domain" in report.diagnostic


def test_classification_user_tag_wins_over_measurement():
    p = Cosine(class_tag="Superlinear2")
    with pytest.warns(UserWarning, match="keeping the user tag"):
        report = classify_asymptotics(p, gamma_probe=1.0, phi_max=1e4)
    assert report.tag == "Superlinear2"
    assert report.measured_tag == "Sublinear1a"


def test_classification_validates_probe_arguments():
    with pytest.raises(ValidationError):
        classify_asymptotics(Cosine(), gamma_probe=1.0, phi_max=100.0)
    with pytest.raises(ValidationError):
        classify_asymptotics(Cosine(), gamma_probe=2.5, phi_max=1e4)


def test_unknown_class_tag_is_rejected():
    with pytest.raises(ValidationError):
        Cosine(class_tag="Type9")
