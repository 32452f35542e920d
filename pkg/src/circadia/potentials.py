"""Nonlinear inductive potentials u(phi) with exact derivatives.

A potential here is the adimensional shape u(phi) of the nonlinear element's
energy, U_NL = E_U * u; the reduction formulas need the triple (u, u', u'')
evaluated consistently, which every kind guarantees analytically except
Custom, which uses a single cubic spline for all three.

Asymptotic class tags (diagnostic only; a user-supplied tag always wins):
    Sublinear1a   symmetric, |u|/|phi|^gamma -> 0 for some gamma in (0,2)
    Sublinear1b   asymmetric, gamma in (0,1)
    Superlinear2  phi^2/u -> 0
    QuasilinearL  u/phi^2 -> finite nonzero constant
    Unclassified  none of the above certified by sampling
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline

from .errors import ValidationError

TAGS = ("Sublinear1a", "Sublinear1b", "Superlinear2", "QuasilinearL", "Unclassified")

# Geometric-grid shape used by classify_asymptotics.
_BINS_PER_DECADE = 8
_SAMPLES_PER_BIN = 16


class PotentialModel:
    """Base potential. Subclasses fill in _eval(phi, order)."""

    kind = "abstract"
    period: float | None = None  # 2*pi for the cosine kinds, None otherwise

    def __init__(self, class_tag: str = "Unclassified"):
        if class_tag not in TAGS:
            raise ValidationError(f"unknown class_tag {class_tag!r}")
        self.class_tag = class_tag

    # -- evaluation -------------------------------------------------------
    def eval(self, phi, order: int = 0):
        """u, u' or u'' at phi (scalar or array)."""
        if order not in (0, 1, 2):
            raise ValidationError(f"order must be 0, 1 or 2, got {order!r}")
        return self._eval(phi, order)

    def u(self, phi):
        return self._eval(phi, 0)

    def du(self, phi):
        return self._eval(phi, 1)

    def d2u(self, phi):
        return self._eval(phi, 2)

    def _eval(self, phi, order: int):
        raise NotImplementedError

    @property
    def is_periodic(self) -> bool:
        return self.period is not None

    @property
    def symmetric(self) -> bool:
        """u(phi) == u(-phi), checked by sampling."""
        probe = np.linspace(0.37, 11.3, 41)
        try:
            left = np.asarray(self._eval(-probe, 0), dtype=float)
            right = np.asarray(self._eval(probe, 0), dtype=float)
        except ValidationError:
            return False
        scale = np.max(np.abs(right)) + 1e-30
        return bool(np.max(np.abs(left - right)) <= 1e-10 * scale)


class Cosine(PotentialModel):
    """u(phi) = -cos(phi)."""

    kind = "Cosine"
    period = 2.0 * math.pi

    def __init__(self, class_tag: str = "Sublinear1a"):
        super().__init__(class_tag)

    def _eval(self, phi, order: int):
        if order == 0:
            return -np.cos(phi)
        if order == 1:
            return np.sin(phi)
        return np.cos(phi)


class BiasedCosine(PotentialModel):
    """u(phi) = -cos(phi - phi_ext); asymmetric unless phi_ext is 0 or pi."""

    kind = "BiasedCosine"
    period = 2.0 * math.pi

    def __init__(self, phi_ext: float, class_tag: str | None = None):
        if not math.isfinite(phi_ext):
            raise ValidationError("phi_ext must be finite")
        self.phi_ext = float(phi_ext)
        symmetric_bias = (
            math.isclose(math.sin(self.phi_ext), 0.0, abs_tol=1e-12))
        if class_tag is None:
            class_tag = "Sublinear1a" if symmetric_bias else "Sublinear1b"
        if class_tag == "Sublinear1a" and not symmetric_bias:
            raise ValidationError(
                "Sublinear1a requires a symmetric potential; "
                f"phi_ext={self.phi_ext!r} breaks u(phi)=u(-phi)")
        super().__init__(class_tag)

    def _eval(self, phi, order: int):
        arg = np.asarray(phi, dtype=float) - self.phi_ext
        if order == 0:
            out = -np.cos(arg)
        elif order == 1:
            out = np.sin(arg)
        else:
            out = np.cos(arg)
        return out if out.ndim else float(out)


class PolynomialEven(PotentialModel):
    """u(phi) = sum_k coeffs[k] * phi^(2k)."""

    kind = "PolynomialEven"

    def __init__(self, coeffs, class_tag: str | None = None):
        coeffs = [float(c) for c in coeffs]
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise ValidationError("coeffs must be a nonempty list of finite floats")
        full = np.zeros(2 * len(coeffs) - 1)
        full[::2] = coeffs
        self._poly = Polynomial(full)
        self._dpoly = self._poly.deriv(1)
        self._d2poly = self._poly.deriv(2)
        self.coeffs = tuple(coeffs)
        if class_tag is None:
            class_tag = self._default_tag()
        super().__init__(class_tag)

    def _default_tag(self) -> str:
        lead = 0
        for k in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[k] != 0.0:
                lead = k
                break
        if lead >= 2:
            return "Superlinear2"
        if lead == 1:
            return "QuasilinearL"
        return "Unclassified"  # constant: u/phi^gamma -> 0 but so does u''

    def _eval(self, phi, order: int):
        p = (self._poly, self._dpoly, self._d2poly)[order]
        return p(phi)


class Custom(PotentialModel):
    """Tabulated potential on a finite support, cubic-spline derivatives.

    Natural boundary conditions keep (u, u', u'') a consistent triple from
    one spline; evaluation outside the tabulated range refuses.
    """

    kind = "Custom"

    def __init__(self, phi_samples, u_samples, class_tag: str = "Unclassified"):
        phi_samples = np.asarray(phi_samples, dtype=float)
        u_samples = np.asarray(u_samples, dtype=float)
        if phi_samples.ndim != 1 or phi_samples.shape != u_samples.shape:
            raise ValidationError("phi and u samples must be equal-length 1D arrays")
        if phi_samples.size < 4:
            raise ValidationError("Custom needs at least 4 samples")
        if not np.all(np.isfinite(phi_samples)) or not np.all(np.isfinite(u_samples)):
            raise ValidationError("Custom samples must be finite")
        if not np.all(np.diff(phi_samples) > 0):
            raise ValidationError("phi samples must be strictly increasing")
        self.support = (float(phi_samples[0]), float(phi_samples[-1]))
        self._spline = CubicSpline(phi_samples, u_samples, bc_type="natural")
        super().__init__(class_tag)

    @classmethod
    def from_csv(cls, path: str, class_tag: str = "Unclassified") -> "Custom":
        """Two-column CSV (phi, u), strictly increasing phi; '#' comments ok."""
        try:
            table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except Exception as exc:
            raise ValidationError(f"cannot parse potential CSV {path}: {exc}") from exc
        if table.shape[1] != 2:
            raise ValidationError(f"potential CSV {path} must have 2 columns")
        return cls(table[:, 0], table[:, 1], class_tag=class_tag)

    def _eval(self, phi, order: int):
        arr = np.asarray(phi, dtype=float)
        lo, hi = self.support
        if np.any(arr < lo) or np.any(arr > hi):
            raise ValidationError(
                f"extrapolation: argument outside tabulated range [{lo}, {hi}]")
        out = self._spline(arr, nu=order)
        return out if out.ndim else float(out)


class ClassificationReport:
    """Outcome of classify_asymptotics.

    tag: the effective tag (user-supplied wins on mismatch);
    measured_tag: what sampling alone supports;
    diagnostic: one-line reason;
    bin_maxima: per-log-bin limsup estimates of the probed ratio.
    """

    def __init__(self, tag: str, measured_tag: str, diagnostic: str,
                 bin_maxima: list[float]):
        self.tag = tag
        self.measured_tag = measured_tag
        self.diagnostic = diagnostic
        self.bin_maxima = bin_maxima

    def __repr__(self):
        return (f"ClassificationReport(tag={self.tag!r}, "
                f"measured={self.measured_tag!r}, note={self.diagnostic!r})")


def _bin_maxima(values: np.ndarray, nbins: int) -> np.ndarray:
    return values.reshape(nbins, -1).max(axis=1)


def _decays_over_last_decade(maxima: np.ndarray) -> bool:
    last = maxima[-_BINS_PER_DECADE:]
    nonincreasing = bool(np.all(np.diff(last) <= 1e-12 * np.maximum(last[:-1], 1e-300)))
    return nonincreasing and last[-1] < last[0]


def classify_asymptotics(p: PotentialModel, gamma_probe: float,
                         phi_max: float) -> ClassificationReport:
    """Estimate the asymptotic class of u by geometric-grid sampling.

    Probes limsup |u|/|phi|^gamma_probe (and the superlinear and quasilinear
    ratios) on a geometric grid up to phi_max; a tag is assigned only when
    the relevant estimate decays monotonically over the last decade.
    """
    if phi_max < 1e3:
        raise ValidationError("phi_max must be >= 1e3 for a meaningful tail")
    if not (0.0 < gamma_probe < 2.0):
        raise ValidationError("gamma_probe must lie in (0, 2)")

    if isinstance(p, Custom):
        report = ClassificationReport(
            tag="Unclassified", measured_tag="Unclassified",
            diagnostic="compact-domain: classification inapplicable",
            bin_maxima=[])
        return _honor_user_tag(p, report)

    ndecades = int(math.ceil(math.log10(phi_max)))
    nbins = ndecades * _BINS_PER_DECADE
    edges = np.logspace(0.0, math.log10(phi_max), nbins * _SAMPLES_PER_BIN)
    u_pos = np.asarray(p.eval(edges, 0), dtype=float)
    u_neg = np.asarray(p.eval(-edges, 0), dtype=float)
    absu = np.maximum(np.abs(u_pos), np.abs(u_neg))

    sub = _bin_maxima(absu / edges**gamma_probe, nbins)
    if _decays_over_last_decade(sub):
        tag = "Sublinear1a" if p.symmetric else "Sublinear1b"
        if tag == "Sublinear1b" and gamma_probe >= 1.0:
            measured = ClassificationReport(
                "Unclassified", "Unclassified",
                "asymmetric tail decays but probe gamma >= 1; "
                "retry with gamma in (0,1)", list(sub))
            return _honor_user_tag(p, measured)
        return _honor_user_tag(p, ClassificationReport(
            tag, tag,
            f"|u|/|phi|^{gamma_probe} decays monotonically over the last decade",
            list(sub)))

    with np.errstate(divide="ignore"):
        sup = _bin_maxima(edges**2 / np.maximum(absu, 1e-300), nbins)
    if _decays_over_last_decade(sup):
        return _honor_user_tag(p, ClassificationReport(
            "Superlinear2", "Superlinear2",
            "phi^2/|u| decays monotonically over the last decade", list(sup)))

    # Quasilinear: u/phi^2 settles to a finite nonzero constant.
    ratio_pos = u_pos / edges**2
    last = ratio_pos[-_BINS_PER_DECADE * _SAMPLES_PER_BIN:]
    mean = float(np.mean(last))
    spread = float(np.max(np.abs(last - mean)))
    if mean != 0.0 and spread <= 1e-6 * abs(mean):
        return _honor_user_tag(p, ClassificationReport(
            "QuasilinearL", "QuasilinearL",
            f"u/phi^2 settles to {mean!r} over the last decade", list(sub)))

    return _honor_user_tag(p, ClassificationReport(
        "Unclassified", "Unclassified",
        "no probed ratio decays or settles monotonically", list(sub)))


def _honor_user_tag(p: PotentialModel,
                    report: ClassificationReport) -> ClassificationReport:
    if p.class_tag != "Unclassified" and p.class_tag != report.measured_tag:
        warnings.warn(
            f"classification measured {report.measured_tag!r} but the model "
            f"carries {p.class_tag!r}; keeping the user tag", stacklevel=3)
        report.tag = p.class_tag
    return report
