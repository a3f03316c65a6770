//! The Newtonian model behind the standing waves: potential V and its
//! derivatives, conserved energy, limiting frequencies, and the
//! monotonicity-certificate functions P, A, B.

use crate::error::{Error, Result};

/// Standing-wave frequency. Even-branch waves exist for omega in
/// (omega_L, 1), odd-branch waves for omega in (Omega_L, 1); the peaked
/// closed forms accept omega = 1 exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency(pub f64);

impl Frequency {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// The two wave families, separated by the pair of homoclinic orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Branch {
    /// Positive even profiles inside one homoclinic loop; E in (0, E_omega).
    EvenInterior,
    /// Sign-changing odd profiles outside both loops; E in (E_omega, inf).
    OddExterior,
}

impl Branch {
    pub fn is_even(self) -> bool {
        matches!(self, Branch::EvenInterior)
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::EvenInterior => write!(f, "even"),
            Branch::OddExterior => write!(f, "odd"),
        }
    }
}

/// A turning point of the orbit, carried in both coordinates.
///
/// `s = 1 - phi^2` is the primary representation: near omega = 1 the outer
/// turning point satisfies 1 - M^2 ~ (1-omega) exp(-c/(1-omega)), which is a
/// perfectly normal double even when M itself rounds to 1.
#[derive(Debug, Clone, Copy)]
pub struct TurningPoint {
    pub phi: f64,
    pub s: f64,
}

impl TurningPoint {
    pub(crate) fn from_s(s: f64) -> Self {
        Self {
            phi: (1.0 - s).max(0.0).sqrt(),
            s,
        }
    }

    pub(crate) fn from_r(r: f64) -> Self {
        Self {
            phi: r.sqrt(),
            s: 1.0 - r,
        }
    }
}

/// One phase-plane periodic orbit: branch, frequency, energy level, and the
/// resolved turning points.
#[derive(Debug, Clone, Copy)]
pub struct Orbit {
    pub branch: Branch,
    pub omega: Frequency,
    /// Energy level E of Eq. E = phi'^2/2 + V(phi).
    pub energy: f64,
    /// |E - E_omega|, kept separately: it stays meaningful when `energy`
    /// rounds to the homoclinic level.
    pub delta_e: f64,
    /// Inner turning point m (even branch only).
    pub inner: Option<TurningPoint>,
    /// Outer turning point M.
    pub outer: TurningPoint,
}

impl Orbit {
    pub fn m(&self) -> Option<f64> {
        self.inner.map(|t| t.phi)
    }

    pub fn m_outer(&self) -> f64 {
        self.outer.phi
    }
}

/// Frozen frequency together with the potential of Newton's equation
/// phi'' = -V'(phi),
///
///   V(phi) = (omega - phi^2)/2 + (1-omega)/2 * log((1-omega)/(1-phi^2)).
#[derive(Debug, Clone, Copy)]
pub struct PotentialModel {
    pub omega: Frequency,
}

impl PotentialModel {
    pub fn new(omega: f64) -> Self {
        Self {
            omega: Frequency(omega),
        }
    }

    fn check_phi(&self, phi: f64) -> Result<()> {
        if !(phi.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "potential evaluated at |phi| >= 1 (phi = {phi})"
            )));
        }
        Ok(())
    }

    /// V(phi). At omega = 1 the logarithmic term vanishes and
    /// V(phi) = (1 - phi^2)/2.
    pub fn potential(&self, phi: f64) -> Result<f64> {
        self.check_phi(phi)?;
        let w = self.omega.0;
        let s = (1.0 - phi) * (1.0 + phi);
        if w == 1.0 {
            return Ok(0.5 * s);
        }
        Ok(0.5 * (w - phi * phi) + 0.5 * (1.0 - w) * ((-w).ln_1p() - s.ln()))
    }

    /// V', V'' or V''' by the closed forms
    ///   V'   = -phi (omega - phi^2) / (1 - phi^2)
    ///   V''  = -(omega + (omega-3) phi^2 + phi^4) / (1 - phi^2)^2
    ///   V''' = 2 (1-omega) phi (phi^2 + 3) / (1 - phi^2)^3
    pub fn potential_derivatives(&self, phi: f64, order: u8) -> Result<f64> {
        self.check_phi(phi)?;
        let w = self.omega.0;
        let p2 = phi * phi;
        let s = (1.0 - phi) * (1.0 + phi);
        match order {
            1 => Ok(-phi * (w - p2) / s),
            2 => Ok(-(w + (w - 3.0) * p2 + p2 * p2) / (s * s)),
            3 => Ok(2.0 * (1.0 - w) * phi * (p2 + 3.0) / (s * s * s)),
            _ => Err(Error::Domain(format!(
                "derivative order {order} not in 1..=3"
            ))),
        }
    }

    /// Conserved orbit energy E(phi, phi') = phi'^2/2 + V(phi).
    pub fn orbit_energy(&self, phi: f64, phip: f64) -> Result<f64> {
        Ok(0.5 * phip * phip + self.potential(phi)?)
    }

    /// E_omega = V(0) = omega/2 + (1-omega)/2 log(1-omega): the homoclinic
    /// level for omega in (0,1) and the center-point level for omega <= 0.
    pub fn homoclinic_energy(&self) -> Result<f64> {
        let w = self.omega.0;
        if !(w < 1.0) {
            return Err(Error::Domain(format!(
                "homoclinic energy needs omega < 1 (got {w})"
            )));
        }
        Ok(homoclinic_energy_raw(w))
    }

    /// Chicone certificate functions at t = phi^2:
    ///   A(t) = omega + (omega-3) t + t^2,
    ///   B(t) = omega - t + (1-omega) log((1-omega)/(1-t)),
    ///   P(t) = 3 t (omega-t)^2 A + [3 A^2 + 2 (1-omega) t (3+t)(omega-t)] B.
    pub fn chicone_functions(&self, t: f64) -> Result<ChiconeValues> {
        let w = self.omega.0;
        if !(0.0 < w && w < 1.0) {
            return Err(Error::Domain(format!(
                "Chicone functions need omega in (0,1) (got {w})"
            )));
        }
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, 1)")));
        }
        let a = w + (w - 3.0) * t + t * t;
        let b = b_fun(t, w);
        let g = 3.0 * a * a + 2.0 * (1.0 - w) * t * (3.0 + t) * (w - t);
        let p = 3.0 * t * (w - t) * (w - t) * a + g * b;
        Ok(ChiconeValues { a, b, p })
    }

    /// I''(phi) = P(phi^2) / (V'(phi)^4 (1-phi^2)^4), strictly positive on
    /// (0,1). At phi = sqrt(omega) the quadruple zero of P cancels the
    /// quartic zero of V'^4; the removable value is
    /// (9 - 6 omega - omega^2) / (6 (1-omega) omega^2).
    pub fn chicone_i_second(&self, phi: f64) -> Result<f64> {
        let w = self.omega.0;
        if !(0.0 < w && w < 1.0) {
            return Err(Error::Domain(format!(
                "I'' needs omega in (0,1) (got {w})"
            )));
        }
        if !(0.0 < phi && phi < 1.0) {
            return Err(Error::Domain(format!("phi = {phi} outside (0, 1)")));
        }
        let t = phi * phi;
        if (t - w).abs() < 1e-4 {
            return Ok((9.0 - 6.0 * w - w * w) / (6.0 * (1.0 - w) * w * w));
        }
        let p = self.chicone_functions(t)?.p;
        let vp = self.potential_derivatives(phi, 1)?;
        let s = (1.0 - phi) * (1.0 + phi);
        Ok(p / (vp.powi(4) * s.powi(4)))
    }
}

/// Values of the certificate functions at one t.
#[derive(Debug, Clone, Copy)]
pub struct ChiconeValues {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

pub(crate) fn homoclinic_energy_raw(w: f64) -> f64 {
    0.5 * w + 0.5 * (1.0 - w) * (-w).ln_1p()
}

// B(t) with the cancellation of the linear and logarithmic parts near t =
// omega replaced by the Taylor form B = sum_{k>=2} (t-omega)^k / (k (1-omega)^{k-1}).
fn b_fun(t: f64, w: f64) -> f64 {
    let d = t - w;
    if d.abs() < 1e-4 {
        let q = d / (1.0 - w);
        let mut term = d * q; // (t-w)^2 / (1-w)
        let mut sum = term / 2.0;
        let mut k = 2.0f64;
        loop {
            term *= q;
            k += 1.0;
            let add = term / k;
            sum += add;
            if add.abs() <= f64::EPSILON * sum.abs() || k > 40.0 {
                return sum;
            }
        }
    }
    w - t + (1.0 - w) * ((-w).ln_1p() - (-t).ln_1p())
}

/// Limiting frequencies of the two families at spatial period L:
/// omega_L = 2 pi^2 / (L^2 + 2 pi^2) and Omega_L = -4 pi^2 / L^2.
pub fn limiting_frequencies(l: f64) -> Result<(f64, f64)> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("period L must be positive (got {l})")));
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok((2.0 * pi2 / (l * l + 2.0 * pi2), -4.0 * pi2 / (l * l)))
}

/// Leading frequency correction omega_2 of the small-amplitude expansion
/// omega = omega_bif + omega_2 a^2 + O(a^4) along each branch.
pub fn bifurcation_omega2(branch: Branch, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("period L must be positive (got {l})")));
    }
    match branch {
        Branch::EvenInterior => {
            let (wl, _) = limiting_frequencies(l)?;
            Ok((9.0 - 6.0 * wl - wl * wl) / (6.0 * (1.0 - wl)))
        }
        Branch::OddExterior => {
            let k = 2.0 * std::f64::consts::PI / l;
            Ok(0.75 * (1.0 + k * k))
        }
    }
}

// ---------------------------------------------------------------------------
// Stable kernels shared by the orbit solvers and quadratures. All of them
// express energy differences without subtracting nearly equal logs.
// ---------------------------------------------------------------------------

/// D(r) = E_omega - V(phi) at r = phi^2:  D(r) = [r + (1-omega) log1p(-r)]/2.
/// Exact at r = 0 and conditioned for r near 0 and r near 1 alike.
pub(crate) fn d_fun(r: f64, w: f64) -> f64 {
    0.5 * (r + (1.0 - w) * (-r).ln_1p())
}

/// U(s) = E_omega - V(phi) at s = 1 - phi^2: U(s) = [(1-s) + (1-omega) log s]/2.
/// Monotone increasing on s in (0, 1-omega).
pub(crate) fn u_fun(s: f64, w: f64) -> f64 {
    0.5 * ((1.0 - s) + (1.0 - w) * s.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const W: f64 = 0.5;

    #[test]
    fn potential_center_and_origin() {
        let model = PotentialModel::new(W);
        // V(sqrt(omega)) = 0
        let v = model.potential(W.sqrt()).unwrap();
        assert!(v.abs() < 1e-15, "V(sqrt(w)) = {v}");
        // V(0) = 1/4 + 1/4 log(1/2)
        let v0 = model.potential(0.0).unwrap();
        let expect = 0.25 + 0.25 * 0.5f64.ln();
        assert!((v0 - expect).abs() < 1e-15);
        assert!((expect - 0.076_713_2).abs() < 1e-6);
        // monotone divergence toward phi = 1
        let a = model.potential(0.999).unwrap();
        let b = model.potential(0.999_999).unwrap();
        let c = model.potential(0.999_999_999_9).unwrap();
        assert!(a < b && b < c && c > 4.0);
        assert!(model.potential(1.0).is_err());
    }

    #[test]
    fn potential_center_grid() {
        // V(sqrt(w)) = 0 and V'(sqrt(w)) = 0 across a 100-point omega grid.
        for i in 1..=100 {
            let w = i as f64 / 101.0;
            let model = PotentialModel::new(w);
            let root = w.sqrt();
            assert!(model.potential(root).unwrap().abs() < 1e-14);
            assert!(model.potential_derivatives(root, 1).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_values() {
        let model = PotentialModel::new(W);
        assert!(model.potential_derivatives(W.sqrt(), 1).unwrap().abs() < 1e-15);
        // V''(sqrt(w)) = 2 w / (1 - w) = 2 at w = 1/2
        let v2 = model.potential_derivatives(W.sqrt(), 2).unwrap();
        assert!((v2 - 2.0).abs() < 1e-13);
        assert_eq!(model.potential_derivatives(0.0, 1).unwrap(), 0.0);
        assert!(model.potential_derivatives(0.5, 4).is_err());
        assert!(model.potential_derivatives(1.2, 1).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let model = PotentialModel::new(0.37);
        let h = 1e-5;
        for &phi in &[0.1, 0.35, 0.62, 0.9] {
            let vp = model.potential_derivatives(phi, 1).unwrap();
            let fd = (model.potential(phi + h).unwrap() - model.potential(phi - h).unwrap())
                / (2.0 * h);
            assert!((vp - fd).abs() < 1e-7 * (1.0 + vp.abs()), "V' at {phi}");
            let vpp = model.potential_derivatives(phi, 2).unwrap();
            let fd2 = (model.potential_derivatives(phi + h, 1).unwrap()
                - model.potential_derivatives(phi - h, 1).unwrap())
                / (2.0 * h);
            assert!((vpp - fd2).abs() < 1e-7 * (1.0 + vpp.abs()), "V'' at {phi}");
            let vppp = model.potential_derivatives(phi, 3).unwrap();
            let fd3 = (model.potential_derivatives(phi + h, 2).unwrap()
                - model.potential_derivatives(phi - h, 2).unwrap())
                / (2.0 * h);
            assert!((vppp - fd3).abs() < 1e-6 * (1.0 + vppp.abs()), "V''' at {phi}");
        }
    }

    #[test]
    fn orbit_energy_examples() {
        let model = PotentialModel::new(W);
        assert!(model.orbit_energy(W.sqrt(), 0.0).unwrap().abs() < 1e-15);
        let e = model.orbit_energy(0.0, 0.0).unwrap();
        assert!((e - model.homoclinic_energy().unwrap()).abs() < 1e-15);
        let ek = model.orbit_energy(0.0, 1.0).unwrap();
        assert!((ek - (0.5 + e)).abs() < 1e-15);
        // invariance under phi' -> -phi' and phi -> -phi
        let a = model.orbit_energy(0.3, 0.7).unwrap();
        assert_eq!(a, model.orbit_energy(0.3, -0.7).unwrap());
        assert_eq!(a, model.orbit_energy(-0.3, 0.7).unwrap());
    }

    #[test]
    fn homoclinic_energy_examples() {
        assert_eq!(PotentialModel::new(0.0).homoclinic_energy().unwrap(), 0.0);
        let e = PotentialModel::new(0.5).homoclinic_energy().unwrap();
        assert!((e - 0.076_713_2).abs() < 1e-6);
        let e = PotentialModel::new(-1.0).homoclinic_energy().unwrap();
        assert!((e - (-0.5 + 2.0f64.ln())).abs() < 1e-15);
        assert!(PotentialModel::new(1.0).homoclinic_energy().is_err());
    }

    #[test]
    fn limiting_frequency_examples() {
        let (wl, ol) = limiting_frequencies(2.0 * PI).unwrap();
        assert!((wl - 1.0 / 3.0).abs() < 1e-15);
        assert!((ol + 1.0).abs() < 1e-15);
        let (wl, ol) = limiting_frequencies(4.0 * PI).unwrap();
        assert!((wl - 1.0 / 9.0).abs() < 1e-15);
        assert!((ol + 0.25).abs() < 1e-15);
        // L -> infinity limits
        let (wl, ol) = limiting_frequencies(1e9).unwrap();
        assert!(wl.abs() < 1e-16 && ol.abs() < 1e-16);
        assert!(limiting_frequencies(0.0).is_err());
    }

    #[test]
    fn bifurcation_omega2_examples() {
        let even = bifurcation_omega2(Branch::EvenInterior, 2.0 * PI).unwrap();
        assert!((even - (9.0 - 2.0 - 1.0 / 9.0) / 4.0).abs() < 1e-14);
        let odd = bifurcation_omega2(Branch::OddExterior, 2.0 * PI).unwrap();
        assert!((odd - 1.5).abs() < 1e-14);
        let odd_inf = bifurcation_omega2(Branch::OddExterior, 1e12).unwrap();
        assert!((odd_inf - 0.75).abs() < 1e-12);
    }

    #[test]
    fn chicone_zero_at_center() {
        let model = PotentialModel::new(W);
        let v = model.chicone_functions(W).unwrap();
        assert!(v.b.abs() < 1e-16);
        assert!(v.p.abs() < 1e-16);
        assert!(v.a < 0.0);
        assert!(model.chicone_functions(-0.1).is_err());
        assert!(model.chicone_functions(1.0).is_err());
    }

    #[test]
    fn chicone_positive_away_from_center() {
        for &w in &[0.3, 0.5, 0.7] {
            let model = PotentialModel::new(w);
            for i in 1..=200 {
                let t = i as f64 / 201.0;
                if (t - w).abs() < 1e-3 {
                    continue;
                }
                let p = model.chicone_functions(t).unwrap().p;
                assert!(p > 0.0, "P({t}) = {p} at omega = {w}");
            }
        }
    }

    #[test]
    fn chicone_p_monotone_sides() {
        // P decreasing on (0, omega), increasing on (omega, 1).
        let model = PotentialModel::new(W);
        let mut prev = model.chicone_functions(0.01).unwrap().p;
        for i in 1..=60 {
            let t = 0.01 + (W - 0.02) * i as f64 / 60.0;
            let p = model.chicone_functions(t).unwrap().p;
            assert!(p < prev, "P not decreasing at t = {t}");
            prev = p;
        }
        let mut prev = model.chicone_functions(W + 0.01).unwrap().p;
        for i in 1..=60 {
            let t = W + 0.01 + (1.0 - W - 0.02) * i as f64 / 60.0;
            let p = model.chicone_functions(t).unwrap().p;
            assert!(p > prev, "P not increasing at t = {t}");
            prev = p;
        }
    }

    #[test]
    fn chicone_quadruple_zero_finite_differences() {
        // central differences of P at t = omega: orders 1..3 vanish under
        // refinement; the 4th converges to 4 (9 - 6w - w^2)/(1 - w).
        let model = PotentialModel::new(W);
        let p = |t: f64| model.chicone_functions(t).unwrap().p;
        let fourth_exact = 4.0 * (9.0 - 6.0 * W - W * W) / (1.0 - W);
        let mut prev_errs = [f64::INFINITY; 3];
        for &h in &[2e-2, 1e-2, 5e-3] {
            let d1 = (p(W + h) - p(W - h)) / (2.0 * h);
            let d2 = (p(W + h) - 2.0 * p(W) + p(W - h)) / (h * h);
            let d3 = (p(W + 2.0 * h) - 2.0 * p(W + h) + 2.0 * p(W - h) - p(W - 2.0 * h))
                / (2.0 * h * h * h);
            let errs = [d1.abs(), d2.abs(), d3.abs()];
            for k in 0..3 {
                assert!(errs[k] < prev_errs[k] + 1e-12, "order {} not shrinking", k + 1);
            }
            prev_errs = errs;
            let d4 = (p(W + 2.0 * h) - 4.0 * p(W + h) + 6.0 * p(W) - 4.0 * p(W - h)
                + p(W - 2.0 * h))
                / (h * h * h * h);
            assert!(
                (d4 - fourth_exact).abs() < 0.01 * fourth_exact,
                "4th difference {d4} vs {fourth_exact} at h = {h}"
            );
        }
    }

    #[test]
    fn b_bounds_lemma() {
        // (w-t)^2/(2(1-t)) <= B <= (w-t)^2/(2(1-w)) on (0,w);
        // B <= (w-t)^2/(2(1-t)) on (w,1).
        for &w in &[0.3, 0.5, 0.7] {
            let model = PotentialModel::new(w);
            for i in 1..=200 {
                let t = i as f64 / 201.0;
                let b = model.chicone_functions(t).unwrap().b;
                let lower = (w - t) * (w - t) / (2.0 * (1.0 - t));
                let upper = (w - t) * (w - t) / (2.0 * (1.0 - w));
                if t < w {
                    assert!(b >= lower - 1e-14 && b <= upper + 1e-14, "B bound at t={t}, w={w}");
                } else {
                    assert!(b <= lower + 1e-14, "B upper bound at t={t}, w={w}");
                }
            }
        }
    }

    #[test]
    fn i_second_positive_and_removable() {
        let model = PotentialModel::new(W);
        assert!(model.chicone_i_second(0.5).unwrap() > 0.0);
        assert!(model.chicone_i_second(0.9).unwrap() > 0.0);
        let limit = (9.0 - 6.0 * W - W * W) / (6.0 * (1.0 - W) * W * W);
        // approach sqrt(omega) from both sides; compare against the series limit
        let root = W.sqrt();
        for &eps in &[1e-3, 5e-4] {
            let a = model.chicone_i_second(root + eps).unwrap();
            let b = model.chicone_i_second(root - eps).unwrap();
            assert!((a - limit).abs() / limit < 2e-2, "I''({}) = {a} vs {limit}", root + eps);
            assert!((b - limit).abs() / limit < 2e-2);
        }
        assert!(model.chicone_i_second(0.0).is_err());
    }

    #[test]
    fn b_taylor_branch_continuity() {
        // the Taylor evaluation agrees with the direct log form at the
        // same t just outside the switch radius
        let w = 0.43;
        let model = PotentialModel::new(w);
        for &d in &[1.05e-4, 5e-4, 1e-3] {
            let t = w + d;
            let direct = w - t + (1.0 - w) * ((-w).ln_1p() - (-t).ln_1p());
            let b = model.chicone_functions(t).unwrap().b;
            assert!(
                ((b - direct) / direct).abs() < 1e-6,
                "B mismatch at offset {d}: {b} vs {direct}"
            );
        }
    }
}
