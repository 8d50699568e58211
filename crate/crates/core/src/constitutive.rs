//! Pointwise constitutive laws.
//!
//! The coupling function `h` enters the internal energy
//!
//! ```text
//! e = psi(theta, chi) = theta - chi * (h(theta) - theta * h'(theta))
//! ```
//!
//! and the phase equation. Admissible `h` must satisfy, for a constant `c_h > 1`,
//!
//! ```text
//! |h|_{W^{2,inf}} + sup |r h'(r)| <= c_h
//! 1/c_h <= 1 + r h''(r) s <= c_h       for all r, s in [0, 1]
//! ```
//!
//! which makes `psi` strictly increasing in `theta` with slope in `[1/c_h, c_h]`.
//! Only enumerated families are supported so that these bounds can be certified
//! by [`verify_h_bounds`].
//!
//! The phase constraint is the graph `beta = dI_[0,1] + log(1 + .)`, the
//! subdifferential of [`hatbeta`].

use std::fmt;

use crate::error::ConstitutiveError;

/// Default iteration budget of [`psi_inverse`].
pub const PSI_INVERSE_MAX_ITER: usize = 100;

/// Default absolute tolerance of [`psi_inverse`].
pub const PSI_INVERSE_TOL: f64 = 1e-12;

/// Admissible families for the coupling function `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HFamily {
    /// `h(r) = a * atan(r)`.
    Atan,
    /// `h(r) = a * tanh(r)`.
    Tanh,
}

impl HFamily {
    pub fn name(self) -> &'static str {
        match self {
            HFamily::Atan => "atan",
            HFamily::Tanh => "tanh",
        }
    }
}

impl fmt::Display for HFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for HFamily {
    type Err = ConstitutiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "atan" => Ok(HFamily::Atan),
            "tanh" => Ok(HFamily::Tanh),
            other => Err(ConstitutiveError::UnknownFamily(other.to_string())),
        }
    }
}

/// Which derivative of `h` to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HOrder {
    Value,
    First,
    Second,
}

/// A concrete coupling function together with its claimed constant `c_h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HSpec {
    pub family: HFamily,
    /// Multiplicative scale `a >= 0`; `a = 0` gives `h = 0`.
    pub scale: f64,
    /// Claimed bound constant, must exceed 1.
    pub c_h: f64,
}

impl Default for HSpec {
    fn default() -> Self {
        HSpec {
            family: HFamily::Atan,
            scale: 1.0,
            c_h: 4.0,
        }
    }
}

impl HSpec {
    pub fn new(family: HFamily, scale: f64, c_h: f64) -> Result<Self, ConstitutiveError> {
        let spec = HSpec { family, scale, c_h };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConstitutiveError> {
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(ConstitutiveError::InvalidSpec(format!(
                "h.scale must be finite and >= 0, got {}",
                self.scale
            )));
        }
        if !(self.c_h.is_finite() && self.c_h > 1.0) {
            return Err(ConstitutiveError::InvalidSpec(format!(
                "h.c_h must be finite and > 1, got {}",
                self.c_h
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn h(&self, r: f64) -> f64 {
        match self.family {
            HFamily::Atan => self.scale * r.atan(),
            HFamily::Tanh => self.scale * r.tanh(),
        }
    }

    #[inline]
    pub fn h_prime(&self, r: f64) -> f64 {
        match self.family {
            HFamily::Atan => self.scale / (1.0 + r * r),
            HFamily::Tanh => {
                let t = r.tanh();
                self.scale * (1.0 - t * t)
            }
        }
    }

    #[inline]
    pub fn h_second(&self, r: f64) -> f64 {
        match self.family {
            HFamily::Atan => {
                let q = 1.0 + r * r;
                -2.0 * self.scale * r / (q * q)
            }
            HFamily::Tanh => {
                let t = r.tanh();
                -2.0 * self.scale * t * (1.0 - t * t)
            }
        }
    }

    /// `r * h'(r)`, written to stay finite for huge `|r|`.
    #[inline]
    pub fn r_h_prime(&self, r: f64) -> f64 {
        match self.family {
            HFamily::Atan => {
                if r.abs() > 1.0 {
                    self.scale / (r + 1.0 / r)
                } else {
                    self.scale * r / (1.0 + r * r)
                }
            }
            HFamily::Tanh => r * self.h_prime(r),
        }
    }

    /// `r * h''(r)`, written to stay finite for huge `|r|`.
    #[inline]
    pub fn r_h_second(&self, r: f64) -> f64 {
        match self.family {
            HFamily::Atan => {
                if r.abs() > 1.0 {
                    let inv = 1.0 / r;
                    let d = r * (1.0 + inv * inv);
                    -2.0 * self.scale / (d * d)
                } else {
                    r * self.h_second(r)
                }
            }
            HFamily::Tanh => r * self.h_second(r),
        }
    }

    /// `psi(theta, chi)` without the range check on `chi`.
    #[inline]
    pub(crate) fn psi_unchecked(&self, theta: f64, chi: f64) -> f64 {
        theta - chi * (self.h(theta) - self.r_h_prime(theta))
    }

    /// `d psi / d theta = 1 + chi * theta * h''(theta)`.
    #[inline]
    pub(crate) fn psi_theta_unchecked(&self, theta: f64, chi: f64) -> f64 {
        1.0 + chi * self.r_h_second(theta)
    }
}

/// Evaluates `h`, `h'` or `h''` at `r`.
pub fn h_eval(r: f64, order: HOrder, spec: &HSpec) -> f64 {
    match order {
        HOrder::Value => spec.h(r),
        HOrder::First => spec.h_prime(r),
        HOrder::Second => spec.h_second(r),
    }
}

/// Which bound a sample violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HViolationKind {
    /// `|h|_{W^{2,inf}} + sup |r h'|` exceeded `c_h`.
    Norm,
    /// `1 + r h''(r) s` fell below `1/c_h`.
    JacobianLow,
    /// `1 + r h''(r) s` exceeded `c_h`.
    JacobianHigh,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HViolation {
    pub r: f64,
    pub s: f64,
    pub value: f64,
    pub kind: HViolationKind,
}

/// Outcome of [`verify_h_bounds`]. A failed certificate is data, not an error.
#[derive(Clone, Debug, PartialEq)]
pub struct HCertificate {
    pub passed: bool,
    pub c_h: f64,
    pub sup_h: f64,
    pub sup_h_prime: f64,
    pub sup_h_second: f64,
    pub sup_r_h_prime: f64,
    pub sup_r_h_second: f64,
    /// Sampled `|h|_{W^{2,inf}} + sup |r h'|`.
    pub norm_bound: f64,
    pub min_jacobian: f64,
    pub max_jacobian: f64,
    /// First violating samples (capped at [`MAX_REPORTED_VIOLATIONS`]).
    pub violations: Vec<HViolation>,
    pub violation_count: usize,
}

pub const MAX_REPORTED_VIOLATIONS: usize = 32;

/// Samples `h` over `0` and `+-10^k`, `k` in `[-8, 8]`, and checks both bounds.
///
/// `1 + r h''(r) s` is affine in `s`, so checking `s` on a coarse grid that
/// includes both endpoints is exhaustive in `s`.
pub fn verify_h_bounds(spec: &HSpec, samples: usize) -> Result<HCertificate, ConstitutiveError> {
    if samples < 1000 {
        return Err(ConstitutiveError::InvalidArgument(format!(
            "verify_h_bounds needs at least 1000 samples, got {samples}"
        )));
    }
    spec.validate()?;

    let half = samples / 2;
    let mut radii = Vec::with_capacity(2 * half + 1);
    radii.push(0.0);
    for k in 0..half {
        let exponent = -8.0 + 16.0 * k as f64 / (half - 1) as f64;
        let r = 10f64.powf(exponent);
        radii.push(r);
        radii.push(-r);
    }
    let s_values = [0.0, 0.25, 0.5, 0.75, 1.0];

    let mut cert = HCertificate {
        passed: true,
        c_h: spec.c_h,
        sup_h: 0.0,
        sup_h_prime: 0.0,
        sup_h_second: 0.0,
        sup_r_h_prime: 0.0,
        sup_r_h_second: 0.0,
        norm_bound: 0.0,
        min_jacobian: f64::INFINITY,
        max_jacobian: f64::NEG_INFINITY,
        violations: Vec::new(),
        violation_count: 0,
    };
    let lower = 1.0 / spec.c_h;

    let push = |cert: &mut HCertificate, v: HViolation| {
        cert.passed = false;
        cert.violation_count += 1;
        if cert.violations.len() < MAX_REPORTED_VIOLATIONS {
            cert.violations.push(v);
        }
    };

    let mut sup_r = 0.0;
    for &r in &radii {
        cert.sup_h = cert.sup_h.max(spec.h(r).abs());
        cert.sup_h_prime = cert.sup_h_prime.max(spec.h_prime(r).abs());
        cert.sup_h_second = cert.sup_h_second.max(spec.h_second(r).abs());
        let rh1 = spec.r_h_prime(r).abs();
        if rh1 > cert.sup_r_h_prime {
            cert.sup_r_h_prime = rh1;
            sup_r = r;
        }
        let rh2 = spec.r_h_second(r);
        cert.sup_r_h_second = cert.sup_r_h_second.max(rh2.abs());
        for &s in &s_values {
            let jac = 1.0 + rh2 * s;
            cert.min_jacobian = cert.min_jacobian.min(jac);
            cert.max_jacobian = cert.max_jacobian.max(jac);
            if jac < lower {
                push(
                    &mut cert,
                    HViolation { r, s, value: jac, kind: HViolationKind::JacobianLow },
                );
            } else if jac > spec.c_h {
                push(
                    &mut cert,
                    HViolation { r, s, value: jac, kind: HViolationKind::JacobianHigh },
                );
            }
        }
    }
    cert.norm_bound =
        cert.sup_h + cert.sup_h_prime + cert.sup_h_second + cert.sup_r_h_prime;
    if cert.norm_bound > spec.c_h {
        let value = cert.norm_bound;
        push(&mut cert, HViolation { r: sup_r, s: 0.0, value, kind: HViolationKind::Norm });
    }
    Ok(cert)
}

fn check_chi(chi: f64) -> Result<(), ConstitutiveError> {
    if (0.0..=1.0).contains(&chi) {
        Ok(())
    } else {
        Err(ConstitutiveError::ChiOutOfRange(chi))
    }
}

/// Internal energy `e = psi(theta, chi)`.
pub fn psi(theta: f64, chi: f64, spec: &HSpec) -> Result<f64, ConstitutiveError> {
    check_chi(chi)?;
    Ok(spec.psi_unchecked(theta, chi))
}

/// `d psi / d theta`, bounded in `[1/c_h, c_h]` under a valid certificate.
pub fn psi_theta(theta: f64, chi: f64, spec: &HSpec) -> Result<f64, ConstitutiveError> {
    check_chi(chi)?;
    Ok(spec.psi_theta_unchecked(theta, chi))
}

/// `d psi / d chi = -(h(theta) - theta h'(theta))`.
pub fn psi_chi(theta: f64, spec: &HSpec) -> f64 {
    -(spec.h(theta) - spec.r_h_prime(theta))
}

/// Inverts `psi(., chi)` with the default iteration budget.
pub fn psi_inverse(e: f64, chi: f64, spec: &HSpec, tol: f64) -> Result<f64, ConstitutiveError> {
    psi_inverse_with_budget(e, chi, spec, tol, PSI_INVERSE_MAX_ITER)
}

/// Newton iteration on `psi(theta, chi) = e`, safeguarded by bisection.
///
/// Since `|psi(theta, chi) - theta| <= c_h`, the root lies in `[e - c_h, e + c_h]`
/// when the certificate holds; the bracket is widened geometrically otherwise.
/// Widening steps count against `max_iter`.
pub fn psi_inverse_with_budget(
    e: f64,
    chi: f64,
    spec: &HSpec,
    tol: f64,
    max_iter: usize,
) -> Result<f64, ConstitutiveError> {
    check_chi(chi)?;
    if !(tol > 0.0) {
        return Err(ConstitutiveError::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    if !e.is_finite() {
        return Err(ConstitutiveError::InvalidArgument(format!("e must be finite, got {e}")));
    }
    if chi == 0.0 {
        return Ok(e);
    }
    let f = |theta: f64| spec.psi_unchecked(theta, chi) - e;
    // Residuals below a few ulps of |e| cannot be improved in floating point.
    let floor = tol.max(4.0 * f64::EPSILON * e.abs());

    let mut iter = 0usize;
    let mut width = spec.c_h.max(1.0);
    let mut lo = e - width;
    let mut hi = e + width;
    let mut f_lo = f(lo);
    while f_lo > 0.0 {
        iter += 1;
        if iter > max_iter {
            return Err(ConstitutiveError::PsiInverseNotConverged { e, chi, iterations: iter });
        }
        hi = lo;
        width *= 2.0;
        lo -= width;
        f_lo = f(lo);
    }
    let mut f_hi = f(hi);
    while f_hi < 0.0 {
        iter += 1;
        if iter > max_iter {
            return Err(ConstitutiveError::PsiInverseNotConverged { e, chi, iterations: iter });
        }
        lo = hi;
        width *= 2.0;
        hi += width;
        f_hi = f(hi);
    }

    let mut theta = e.clamp(lo, hi);
    while iter < max_iter {
        iter += 1;
        let ft = f(theta);
        if ft.abs() <= floor {
            return Ok(theta);
        }
        if ft < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let slope = spec.psi_theta_unchecked(theta, chi);
        let mut next = theta - ft / slope;
        if !(slope > 0.0) || !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == theta || hi - lo <= f64::EPSILON * theta.abs().max(f64::MIN_POSITIVE) {
            // bracket collapsed onto adjacent floats
            let best = if f(lo).abs() < f(hi).abs() { lo } else { hi };
            if f(best).abs() <= floor {
                return Ok(best);
            }
            break;
        }
        theta = next;
    }
    Err(ConstitutiveError::PsiInverseNotConverged { e, chi, iterations: iter })
}

/// A value of the extended real line `(-inf, +inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PlusInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PlusInfinity => None,
        }
    }
}

/// Convex potential of `beta`: `int_0^r log(1+s) ds` on `[0, 1]`, `+inf` elsewhere.
pub fn hatbeta(r: f64) -> ExtendedReal {
    if !(0.0..=1.0).contains(&r) {
        return ExtendedReal::PlusInfinity;
    }
    ExtendedReal::Finite(hatbeta_inner(r))
}

/// `(1 + r) log(1 + r) - r`, accurate near 0.
#[inline]
pub(crate) fn hatbeta_inner(r: f64) -> f64 {
    if r.abs() < 1e-4 {
        let r2 = r * r;
        r2 * (0.5 - r / 6.0 + r2 / 12.0)
    } else {
        (1.0 + r) * r.ln_1p() - r
    }
}

/// Decomposition of `xi in beta(chi)` into the smooth part and the normal-cone multiplier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaValue {
    pub chi: f64,
    pub xi: f64,
    /// `omega = xi - log(1 + chi)`, the `dI_[0,1]` component.
    pub multiplier: f64,
}

impl BetaValue {
    /// Builds `xi = omega + log(1 + chi)`, checking admissibility.
    pub fn from_multiplier(chi: f64, multiplier: f64) -> Result<Self, ConstitutiveError> {
        check_chi(chi)?;
        let xi = multiplier + chi.ln_1p();
        let value = BetaValue { chi, xi, multiplier };
        if cone_distance(chi, multiplier) > 0.0 {
            return Err(ConstitutiveError::NotInGraph { chi, xi });
        }
        Ok(value)
    }

    pub fn decompose(chi: f64, xi: f64) -> Result<Self, ConstitutiveError> {
        check_chi(chi)?;
        let multiplier = xi - chi.ln_1p();
        if cone_distance(chi, multiplier) > 0.0 {
            return Err(ConstitutiveError::NotInGraph { chi, xi });
        }
        Ok(BetaValue { chi, xi, multiplier })
    }
}

/// Distance of `omega` from the normal cone of `[0,1]` at `chi` (assumed in the box).
#[inline]
fn cone_distance(chi: f64, omega: f64) -> f64 {
    if chi <= 0.0 {
        omega.max(0.0)
    } else if chi >= 1.0 {
        (-omega).max(0.0)
    } else {
        omega.abs()
    }
}

/// Violation of `xi in beta(chi)`: the larger of the distance of `chi` from `[0,1]`
/// and the distance of `xi - log(1 + chi)` from the normal cone at the projected point.
pub fn beta_residual(chi: f64, xi: f64) -> f64 {
    if !chi.is_finite() || !xi.is_finite() {
        return f64::INFINITY;
    }
    let clamped = chi.clamp(0.0, 1.0);
    let box_dist = (chi - clamped).abs();
    let omega = xi - clamped.ln_1p();
    box_dist.max(cone_distance(clamped, omega))
}

/// `r - log r`, the convex entropy-like density used for the pressure variable.
#[inline]
pub fn entropy_density(r: f64) -> f64 {
    r - r.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

    #[test]
    fn h_eval_examples() {
        let spec = HSpec::default();
        assert_eq!(h_eval(0.0, HOrder::Value, &spec), 0.0);
        assert!((h_eval(1.0, HOrder::First, &spec) - 0.5).abs() < 1e-15);
        let mut sup: f64 = 0.0;
        for k in 0..=2000 {
            let r = -1e6 + 1e3 * k as f64;
            sup = sup.max(h_eval(r, HOrder::Value, &spec).abs());
        }
        assert!(sup <= FRAC_PI_2);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for spec in [
            HSpec::default(),
            HSpec::new(HFamily::Tanh, 0.7, 4.0).unwrap(),
        ] {
            for &r in &[-3.0, -0.4, 0.0, 0.3, 1.0, 2.5] {
                let eps = 1e-6;
                let d1 = (spec.h(r + eps) - spec.h(r - eps)) / (2.0 * eps);
                let d2 = (spec.h_prime(r + eps) - spec.h_prime(r - eps)) / (2.0 * eps);
                assert!((d1 - spec.h_prime(r)).abs() < 1e-8, "{spec:?} r={r}");
                assert!((d2 - spec.h_second(r)).abs() < 1e-8, "{spec:?} r={r}");
                assert!((spec.r_h_prime(r) - r * spec.h_prime(r)).abs() < 1e-14);
                assert!((spec.r_h_second(r) - r * spec.h_second(r)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn default_certificate_passes_with_analytic_suprema() {
        let cert = verify_h_bounds(&HSpec::default(), 4000).unwrap();
        assert!(cert.passed, "{cert:?}");
        // sup |r h''| = 1/2 at r = 1, sup |r h'| = 1/2 at r = 1
        assert!((cert.sup_r_h_second - 0.5).abs() < 1e-4);
        assert!((cert.sup_r_h_prime - 0.5).abs() < 1e-4);
        assert!(cert.min_jacobian >= 0.5 - 1e-12);
        assert!(cert.max_jacobian <= 1.5 + 1e-12);
    }

    #[test]
    fn large_scale_fails_certificate() {
        let spec = HSpec::new(HFamily::Atan, 10.0, 4.0).unwrap();
        let cert = verify_h_bounds(&spec, 2000).unwrap();
        assert!(!cert.passed);
        assert!(cert
            .violations
            .iter()
            .any(|v| v.kind == HViolationKind::JacobianLow && v.s > 0.0));
        assert!(cert.min_jacobian < 0.0);
    }

    #[test]
    fn zero_scale_passes_trivially() {
        let spec = HSpec::new(HFamily::Atan, 0.0, 4.0).unwrap();
        let cert = verify_h_bounds(&spec, 1000).unwrap();
        assert!(cert.passed);
        assert_eq!(cert.norm_bound, 0.0);
        assert_eq!(cert.min_jacobian, 1.0);
    }

    #[test]
    fn tanh_family_certifies() {
        let spec = HSpec::new(HFamily::Tanh, 1.0, 4.0).unwrap();
        assert!(verify_h_bounds(&spec, 2000).unwrap().passed);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(verify_h_bounds(&HSpec::default(), 999).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(HSpec::new(HFamily::Atan, 1.0, 1.0).is_err());
        assert!(HSpec::new(HFamily::Atan, -1.0, 4.0).is_err());
        assert!("cosh".parse::<HFamily>().is_err());
        assert_eq!("tanh".parse::<HFamily>().unwrap(), HFamily::Tanh);
    }

    #[test]
    fn psi_examples() {
        let spec = HSpec::default();
        assert_eq!(psi(3.7, 0.0, &spec).unwrap(), 3.7);
        let v = psi(1.0, 1.0, &spec).unwrap();
        assert!((v - (1.5 - FRAC_PI_4)).abs() < 1e-15);
        assert!((v - 0.714602).abs() < 1e-6);
        assert_eq!(psi(0.0, 0.3, &spec).unwrap(), 0.0);
        assert!(matches!(psi(1.0, 1.5, &spec), Err(ConstitutiveError::ChiOutOfRange(_))));
        assert!(psi(1.0, -0.1, &spec).is_err());
    }

    #[test]
    fn psi_inverse_examples() {
        let spec = HSpec::default();
        assert_eq!(psi_inverse(2.5, 0.0, &spec, 1e-12).unwrap(), 2.5);
        let theta = psi_inverse(1.5 - FRAC_PI_4, 1.0, &spec, 1e-12).unwrap();
        assert!((theta - 1.0).abs() < 4e-12);
        assert!(psi_inverse(0.0, 0.6, &spec, 1e-12).unwrap().abs() < 1e-12);
        assert!(psi_inverse(1.0, 0.5, &spec, 0.0).is_err());
    }

    #[test]
    fn psi_inverse_reports_exhausted_budget() {
        // a huge scale breaks monotonicity, so Newton and the bracket fight
        let spec = HSpec { family: HFamily::Atan, scale: 1e6, c_h: 4.0 };
        let res = psi_inverse_with_budget(1e12, 1.0, &spec, 1e-12, 3);
        assert!(matches!(res, Err(ConstitutiveError::PsiInverseNotConverged { .. })));
    }

    #[test]
    fn hatbeta_examples() {
        assert_eq!(hatbeta(0.0), ExtendedReal::Finite(0.0));
        let one = hatbeta(1.0).finite().unwrap();
        assert!((one - (2.0 * LN_2 - 1.0)).abs() < 1e-14);
        assert!((one - 0.386294).abs() < 1e-6);
        assert_eq!(hatbeta(1.5), ExtendedReal::PlusInfinity);
        assert_eq!(hatbeta(-1e-9), ExtendedReal::PlusInfinity);
        // series branch agrees with the closed form at the switch point
        let r = 0.999_999e-4;
        let direct = (1.0 + r) * f64::ln_1p(r) - r;
        assert!((hatbeta_inner(r) - direct).abs() < 1e-19);
    }

    #[test]
    fn beta_residual_examples() {
        assert_eq!(beta_residual(0.5, 1.5f64.ln()), 0.0);
        assert_eq!(beta_residual(1.0, LN_2 + 0.3), 0.0);
        assert!((beta_residual(0.0, 0.1) - 0.1).abs() < 1e-15);
        assert!((beta_residual(1.0, LN_2 - 0.2) - 0.2).abs() < 1e-15);
        assert!((beta_residual(1.25, LN_2 + 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(beta_residual(f64::NAN, 0.0), f64::INFINITY);
    }

    #[test]
    fn beta_value_decomposition() {
        let b = BetaValue::decompose(1.0, LN_2 + 0.5).unwrap();
        assert!((b.multiplier - 0.5).abs() < 1e-15);
        assert!(BetaValue::decompose(0.0, 0.2).is_err());
        let b = BetaValue::from_multiplier(0.0, -0.3).unwrap();
        assert_eq!(b.xi, -0.3);
        assert!(BetaValue::from_multiplier(0.5, 0.1).is_err());
    }
}
