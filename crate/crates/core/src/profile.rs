//! Wave profiles phi(x) on one period: reconstruction by inverting the
//! quadrature maps x = F(phi), the omega = 1 peaked closed forms, and the
//! conserved-energy diagnostic.

use crate::error::{Error, Result};
use crate::family::FamilyPoint;
use crate::model::{d_fun, Branch, Orbit};
use crate::numerics::Tolerances;
use crate::period::{
    center_piece, even_half_integral, inner_piece, odd_half_integral, outer_piece, S_WALL,
};

/// Sampled profile on [-L/2, L/2] with its symmetry class.
///
/// Even branch: phi(-x) = phi(x) by mirrored construction, m <= phi <= M.
/// Odd branch: phi(-x) = -phi(x) and phi(L/2 - x) = phi(x) by construction.
#[derive(Debug, Clone)]
pub struct Profile {
    pub branch: Branch,
    pub l: f64,
    pub omega: f64,
    /// Orbit energy level the samples satisfy.
    pub energy: f64,
    pub xs: Vec<f64>,
    pub phis: Vec<f64>,
    // fundamental monotone piece: even [0, L/2] with phi decreasing M -> m,
    // odd [0, L/4] with phi increasing 0 -> M
    base_xs: Vec<f64>,
    base_phis: Vec<f64>,
}

/// Inverts x = F(phi) on a cosine-clustered phi grid between the turning
/// points and extends by the branch symmetries. The x samples concentrate
/// near the flat extrema where x(phi) has infinite slope.
pub fn reconstruct_profile(
    point: &FamilyPoint,
    n_samples: usize,
    tol: &Tolerances,
) -> Result<Profile> {
    if n_samples < 16 {
        return Err(Error::Domain(format!(
            "profile needs >= 16 samples (got {n_samples})"
        )));
    }
    let orbit = &point.orbit;
    let w = orbit.omega.value();
    let l = point.l;
    if orbit.outer.s < S_WALL {
        return Err(Error::Domain(format!(
            "turning point too close to phi = 1 for pointwise reconstruction \
             (1 - M^2 = {:.3e})",
            orbit.outer.s
        )));
    }

    let (base_xs, base_phis) = match orbit.branch {
        Branch::EvenInterior => {
            let m_in = orbit.inner.as_ref().expect("even orbit").phi;
            let m_out = orbit.outer.phi;
            if m_out - m_in < 1e-8 {
                return Err(Error::DegenerateOrbit(m_out - m_in));
            }
            even_base(orbit, w, m_in, m_out, n_samples, l, tol)?
        }
        Branch::OddExterior => {
            let m_out = orbit.outer.phi;
            if m_out < 1e-8 {
                return Err(Error::DegenerateOrbit(m_out));
            }
            odd_base(orbit, w, m_out, n_samples, l, tol)?
        }
    };

    let (xs, phis) = extend_by_symmetry(orbit.branch, l, &base_xs, &base_phis);
    Ok(Profile {
        branch: orbit.branch,
        l,
        omega: w,
        energy: orbit.energy,
        xs,
        phis,
        base_xs,
        base_phis,
    })
}

// x = F_even(phi) = int_phi^M dphi'/sqrt(2(E-V)) on a cosine grid in [m, M].
// The tabulated half period is rescaled onto [0, L/2] exactly; the relative
// correction is the round-trip defect of the family point, <= 1e-8.
fn even_base(
    orbit: &Orbit,
    w: f64,
    m_in: f64,
    m_out: f64,
    n: usize,
    l: f64,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let one = |_: f64, _: f64| 1.0;
    let inner = orbit.inner.as_ref().expect("even orbit");
    let split = w.sqrt();
    let half = even_half_integral(orbit, one, tol)?;

    // base runs x ascending, phi descending from M to m
    let mut xs = Vec::with_capacity(n);
    let mut phis = Vec::with_capacity(n);
    for i in 0..n {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        let phi = m_out - (m_out - m_in) * 0.5 * (1.0 - theta.cos());
        let x = if i == 0 {
            0.0
        } else if i == n - 1 {
            half
        } else if phi >= split {
            outer_piece(&orbit.outer, w, one, phi, tol)?
        } else {
            half - inner_piece(inner, w, one, phi, tol)?
        };
        xs.push(x);
        phis.push(phi);
    }
    let scale = (0.5 * l) / half;
    for x in &mut xs {
        *x *= scale;
    }
    Ok((xs, phis))
}

// x = F_odd(phi) = int_0^phi dphi'/sqrt(2(E-V)) on a cosine grid in [0, M],
// rescaled onto [0, L/4].
fn odd_base(
    orbit: &Orbit,
    w: f64,
    m_out: f64,
    n: usize,
    l: f64,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let one = |_: f64, _: f64| 1.0;
    let quarter = odd_half_integral(orbit, one, tol)?;
    let split = m_out / 2.0;

    let mut xs = Vec::with_capacity(n);
    let mut phis = Vec::with_capacity(n);
    for i in 0..n {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        let phi = m_out * 0.5 * (1.0 - theta.cos());
        let x = if i == 0 {
            0.0
        } else if i == n - 1 {
            quarter
        } else if phi <= split {
            center_piece(orbit.delta_e, w, one, 0.0, phi, tol)?
        } else {
            quarter - outer_piece(&orbit.outer, w, one, phi, tol)?
        };
        xs.push(x);
        phis.push(phi);
    }
    let scale = (0.25 * l) / quarter;
    for x in &mut xs {
        *x *= scale;
    }
    Ok((xs, phis))
}

fn extend_by_symmetry(
    branch: Branch,
    l: f64,
    base_xs: &[f64],
    base_phis: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = base_xs.len();
    match branch {
        Branch::EvenInterior => {
            let mut xs = Vec::with_capacity(2 * n - 1);
            let mut phis = Vec::with_capacity(2 * n - 1);
            for i in (1..n).rev() {
                xs.push(-base_xs[i]);
                phis.push(base_phis[i]);
            }
            xs.extend_from_slice(base_xs);
            phis.extend_from_slice(base_phis);
            (xs, phis)
        }
        Branch::OddExterior => {
            // right half [0, L/2] via phi(L/2 - x) = phi(x), then odd mirror
            let mut rx = base_xs.to_vec();
            let mut rp = base_phis.to_vec();
            for i in (0..n - 1).rev() {
                rx.push(0.5 * l - base_xs[i]);
                rp.push(base_phis[i]);
            }
            let m = rx.len();
            let mut xs = Vec::with_capacity(2 * m - 1);
            let mut phis = Vec::with_capacity(2 * m - 1);
            for i in (1..m).rev() {
                xs.push(-rx[i]);
                phis.push(-rp[i]);
            }
            xs.extend_from_slice(&rx);
            phis.extend_from_slice(&rp);
            (xs, phis)
        }
    }
}

// Piecewise two-point quintic Hermite on the fundamental piece, built from
// exact nodal data phi, phi' = sign sqrt(2(E-V)), phi'' = -V'(phi). Fifth
// order keeps the interpolation floor far below the O(dx^2) discretization
// errors of the operators built on resampled grids; each interval clamps to
// its endpoint range, preserving |phi| < 1 and monotonicity up to the
// interpolation error.
#[derive(Debug, Clone)]
struct QuinticHermite {
    xs: Vec<f64>,
    f: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl QuinticHermite {
    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.f[0];
        }
        if x >= self.xs[n - 1] {
            return self.f[n - 1];
        }
        let i = match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite abscissae"))
        {
            Ok(i) => return self.f[i],
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
        let v = self.f[i] * h00
            + self.d1[i] * h * h10
            + self.d2[i] * h * h * h20
            + self.f[i + 1] * h01
            + self.d1[i + 1] * h * h11
            + self.d2[i + 1] * h * h * h21;
        let (lo, hi) = if self.f[i] <= self.f[i + 1] {
            (self.f[i], self.f[i + 1])
        } else {
            (self.f[i + 1], self.f[i])
        };
        v.clamp(lo, hi)
    }
}

impl Profile {
    /// Builds a profile from a tabulated fundamental piece: even branch
    /// expects (x, phi) on [0, L/2] with phi decreasing, odd branch on
    /// [0, L/4] with phi increasing from 0. The full period is produced by
    /// the branch symmetries.
    pub fn from_base_table(
        branch: Branch,
        l: f64,
        omega: f64,
        energy: f64,
        base_xs: Vec<f64>,
        base_phis: Vec<f64>,
    ) -> Result<Self> {
        if base_xs.len() != base_phis.len() || base_xs.len() < 2 {
            return Err(Error::ResampleFailure(
                "base table needs >= 2 matched samples".into(),
            ));
        }
        let (xs, phis) = extend_by_symmetry(branch, l, &base_xs, &base_phis);
        Ok(Self {
            branch,
            l,
            omega,
            energy,
            xs,
            phis,
            base_xs,
            base_phis,
        })
    }

    fn base_interp(&self) -> Result<QuinticHermite> {
        let n = self.base_xs.len();
        if n < 2 {
            return Err(Error::ResampleFailure("base table too small".into()));
        }
        for w in self.base_xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::ResampleFailure(
                    "base abscissae must be strictly increasing".into(),
                ));
            }
        }
        let w = self.omega;
        let model = crate::model::PotentialModel::new(w);
        let delta_e = (self.energy - crate::model::homoclinic_energy_raw(w.min(1.0 - 1e-15))).abs();
        // phi' <= 0 on the even base piece (phi falls from M), >= 0 on the odd
        let slope_sign = match self.branch {
            Branch::EvenInterior => -1.0,
            Branch::OddExterior => 1.0,
        };
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for &phi in &self.base_phis {
            let emv = if self.omega == 1.0 {
                self.energy - 0.5 * (1.0 - phi * phi)
            } else {
                match self.branch {
                    Branch::EvenInterior => d_fun(phi * phi, w) - delta_e,
                    Branch::OddExterior => delta_e + d_fun(phi * phi, w),
                }
            };
            d1.push(slope_sign * (2.0 * emv.max(0.0)).sqrt());
            let vp = if self.omega == 1.0 {
                -phi
            } else {
                model.potential_derivatives(phi.clamp(-1.0 + 1e-15, 1.0 - 1e-15), 1)?
            };
            d2.push(-vp);
        }
        Ok(QuinticHermite {
            xs: self.base_xs.clone(),
            f: self.base_phis.clone(),
            d1,
            d2,
        })
    }

    fn eval_with(&self, interp: &QuinticHermite, x: f64) -> f64 {
        let l = self.l;
        match self.branch {
            Branch::EvenInterior => interp.eval(x.abs().min(0.5 * l)),
            Branch::OddExterior => {
                let sign = if x < 0.0 { -1.0 } else { 1.0 };
                let mut t = x.abs().min(0.5 * l);
                if t > 0.25 * l {
                    t = 0.5 * l - t;
                }
                sign * interp.eval(t)
            }
        }
    }

    /// phi at arbitrary x in [-L/2, L/2]: monotone cubic interpolation of the
    /// fundamental piece composed with the exact symmetries.
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_with(&self.base_interp()?, x))
    }

    /// Samples phi on the uniform periodic grid x_j = -L/2 + j L / n.
    pub fn resample_uniform(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if n < 4 {
            return Err(Error::ResampleFailure(format!("grid of {n} points too small")));
        }
        let interp = self.base_interp()?;
        let l = self.l;
        let mut xs = Vec::with_capacity(n);
        let mut phis = Vec::with_capacity(n);
        for j in 0..n {
            let x = -0.5 * l + l * j as f64 / n as f64;
            xs.push(x);
            phis.push(self.eval_with(&interp, x));
        }
        Ok((xs, phis))
    }

    /// phi'(x_j) recovered from |phi'| = sqrt(2 (E - V(phi))) with the sign
    /// fixed by the branch symmetry.
    pub fn phi_prime_samples(&self, xs: &[f64], phis: &[f64]) -> Vec<f64> {
        let w = self.omega;
        let l = self.l;
        let delta_e = (self.energy - crate::model::homoclinic_energy_raw(w)).abs();
        xs.iter()
            .zip(phis)
            .map(|(&x, &phi)| {
                let emv = match self.branch {
                    Branch::EvenInterior => d_fun(phi * phi, w) - delta_e,
                    Branch::OddExterior => delta_e + d_fun(phi * phi, w),
                };
                let mag = (2.0 * emv.max(0.0)).sqrt();
                let sign = match self.branch {
                    Branch::EvenInterior => -x.signum(),
                    Branch::OddExterior => {
                        if x.abs() < 0.25 * l {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                sign * mag
            })
            .collect()
    }
}

/// The omega = 1 peaked closed forms on the fundamental domain [-L/2, L/2]:
/// the cosh profile (even) or the three-piece sinh profile (odd).
pub fn peaked_profile(branch: Branch, l: f64, x: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("period L must be positive (got {l})")));
    }
    if x.abs() > 0.5 * l * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "x = {x} outside the fundamental domain [-L/2, L/2]; reduce modulo L"
        )));
    }
    match branch {
        Branch::EvenInterior => Ok((0.5 * l - x.abs()).cosh() / (0.5 * l).cosh()),
        Branch::OddExterior => {
            let s4 = (0.25 * l).sinh();
            if x < -0.25 * l {
                Ok(-(0.5 * l + x).sinh() / s4)
            } else if x <= 0.25 * l {
                Ok(x.sinh() / s4)
            } else {
                Ok((0.5 * l - x).sinh() / s4)
            }
        }
    }
}

/// Maximum deviation of the sampled conserved energy
/// phi'^2/2 + V(phi) - E_expected, phi' by 4th-order central differences on
/// a uniform resampling of the profile. Diagnostic only.
pub fn profile_energy_check(profile: &Profile, e_expected: f64) -> Result<f64> {
    let n = profile.xs.len();
    if n < 64 {
        return Err(Error::Domain(format!(
            "energy check needs >= 64 samples (got {n})"
        )));
    }
    let model = crate::model::PotentialModel::new(profile.omega);
    let (xs, phis) = profile.resample_uniform(n)?;
    let h = xs[1] - xs[0];
    let mut worst: f64 = 0.0;
    for j in 2..n - 2 {
        let dphi = (phis[j - 2] - 8.0 * phis[j - 1] + 8.0 * phis[j + 1] - phis[j + 2]) / (12.0 * h);
        let e = 0.5 * dphi * dphi + model.potential(phis[j].clamp(-1.0 + 1e-15, 1.0 - 1e-15))?;
        worst = worst.max((e - e_expected).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{peaked_energy, solve_energy_for_period};
    use crate::model::{Frequency, PotentialModel};
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn even_point(w: f64, l: f64) -> FamilyPoint {
        solve_energy_for_period(Branch::EvenInterior, Frequency(w), l, &tol()).unwrap()
    }

    fn odd_point(w: f64, l: f64) -> FamilyPoint {
        solve_energy_for_period(Branch::OddExterior, Frequency(w), l, &tol()).unwrap()
    }

    #[test]
    fn even_profile_shape() {
        let pt = even_point(0.6, 2.0 * PI);
        let prof = reconstruct_profile(&pt, 257, &tol()).unwrap();
        let n = prof.xs.len();
        for i in 0..n {
            assert_eq!(prof.phis[i], prof.phis[n - 1 - i]);
            assert_eq!(prof.xs[i], -prof.xs[n - 1 - i]);
        }
        let m_out = pt.orbit.m_outer();
        let m_in = pt.orbit.m().unwrap();
        let mid = n / 2;
        assert_eq!(prof.phis[mid], m_out);
        assert!((prof.xs[0] + PI).abs() < 1e-12);
        assert_eq!(prof.phis[0], m_in);
        for &p in &prof.phis {
            assert!(p >= m_in && p <= m_out);
        }
    }

    #[test]
    fn odd_profile_shape() {
        let l = 2.0 * PI;
        let pt = odd_point(0.5, l);
        let prof = reconstruct_profile(&pt, 129, &tol()).unwrap();
        let n = prof.xs.len();
        for i in 0..n {
            assert_eq!(prof.phis[i], -prof.phis[n - 1 - i]);
            assert_eq!(prof.xs[i], -prof.xs[n - 1 - i]);
        }
        let mid = n / 2;
        assert_eq!(prof.phis[mid], 0.0);
        let quarter_idx = prof
            .xs
            .iter()
            .position(|&x| (x - 0.25 * l).abs() < 1e-12)
            .unwrap();
        assert!((prof.phis[quarter_idx] - pt.orbit.m_outer()).abs() < 1e-14);
        assert!(prof.phis[mid - 3] < 0.0 && prof.phis[mid + 3] > 0.0);
    }

    #[test]
    fn profile_ode_residual_even() {
        let pt = even_point(0.6, 2.0 * PI);
        let prof = reconstruct_profile(&pt, 257, &tol()).unwrap();
        let model = PotentialModel::new(0.6);
        let (xs, phis) = prof.resample_uniform(513).unwrap();
        let h = xs[1] - xs[0];
        let mut worst: f64 = 0.0;
        for j in 2..xs.len() - 2 {
            let d2 = (-phis[j - 2] + 16.0 * phis[j - 1] - 30.0 * phis[j] + 16.0 * phis[j + 1]
                - phis[j + 2])
                / (12.0 * h * h);
            let rhs = -model.potential_derivatives(phis[j], 1).unwrap();
            worst = worst.max((d2 - rhs).abs());
        }
        assert!(worst <= 1e-4, "ODE residual {worst}");
    }

    #[test]
    fn energy_check_even_and_odd() {
        let pt = even_point(0.6, 2.0 * PI);
        let prof = reconstruct_profile(&pt, 513, &tol()).unwrap();
        let dev = profile_energy_check(&prof, pt.energy()).unwrap();
        assert!(dev <= 1e-4, "even energy deviation {dev}");

        let pt = odd_point(0.5, 2.0 * PI);
        let prof = reconstruct_profile(&pt, 513, &tol()).unwrap();
        let dev = profile_energy_check(&prof, pt.energy()).unwrap();
        assert!(dev <= 1e-4, "odd energy deviation {dev}");
    }

    #[test]
    fn energy_check_refines_with_samples() {
        let pt = even_point(0.6, 2.0 * PI);
        let coarse = reconstruct_profile(&pt, 129, &tol()).unwrap();
        let fine = reconstruct_profile(&pt, 257, &tol()).unwrap();
        let d_coarse = profile_energy_check(&coarse, pt.energy()).unwrap();
        let d_fine = profile_energy_check(&fine, pt.energy()).unwrap();
        assert!(
            d_fine * 4.0 <= d_coarse * 1.05,
            "refinement ratio: {d_coarse} -> {d_fine}"
        );
    }

    #[test]
    fn degenerate_orbit_rejected() {
        // odd orbit around the center at omega = -1 with radius ~ 9e-9,
        // below the 1e-8 threshold
        let orbit = crate::period::resolve_orbit_delta(Branch::OddExterior, -1.0, 4e-17).unwrap();
        assert!(orbit.m_outer() < 1e-8);
        let pt = FamilyPoint {
            orbit,
            l: 2.0 * PI,
            tilde_e: 0.0,
            q: None,
            dq_domega: None,
            stable: None,
        };
        assert!(matches!(
            reconstruct_profile(&pt, 64, &tol()),
            Err(Error::DegenerateOrbit(_))
        ));
    }

    #[test]
    fn near_bifurcation_profile_is_flat() {
        let w = 1.0 / 3.0 + 1e-4;
        let pt = even_point(w, 2.0 * PI);
        let prof = reconstruct_profile(&pt, 64, &tol()).unwrap();
        for &p in &prof.phis {
            assert!((p - w.sqrt()).abs() < 1e-2);
        }
    }

    #[test]
    fn peaked_profile_values() {
        let l = 2.0 * PI;
        assert_eq!(peaked_profile(Branch::EvenInterior, l, 0.0).unwrap(), 1.0);
        let edge = peaked_profile(Branch::EvenInterior, l, 0.5 * l).unwrap();
        assert!((edge - 1.0 / PI.cosh()).abs() < 1e-15);
        assert!((edge - 0.086_266).abs() < 1e-6);
        assert_eq!(peaked_profile(Branch::OddExterior, l, 0.25 * l).unwrap(), 1.0);
        assert_eq!(peaked_profile(Branch::OddExterior, l, 0.0).unwrap(), 0.0);
        for &x in &[0.3, 1.1, 2.2, 3.0] {
            let a = peaked_profile(Branch::OddExterior, l, x).unwrap();
            let b = peaked_profile(Branch::OddExterior, l, -x).unwrap();
            assert!((a + b).abs() < 1e-15);
        }
        assert!(peaked_profile(Branch::EvenInterior, l, 0.6 * l).is_err());
    }

    #[test]
    fn peaked_even_derivative_jump() {
        let l = 2.0 * PI;
        let h = 1e-7;
        let right = (peaked_profile(Branch::EvenInterior, l, h).unwrap()
            - peaked_profile(Branch::EvenInterior, l, 0.0).unwrap())
            / h;
        let left = (peaked_profile(Branch::EvenInterior, l, 0.0).unwrap()
            - peaked_profile(Branch::EvenInterior, l, -h).unwrap())
            / h;
        let jump = right - left;
        let expect = -2.0 * (0.5 * l).tanh();
        assert!((jump - expect).abs() < 1e-5, "jump {jump} vs {expect}");
    }

    #[test]
    fn peaked_profiles_satisfy_omega1_ode() {
        // phi'' = phi away from the peaks
        let l = 2.0 * PI;
        let h = 1e-5;
        for branch in [Branch::EvenInterior, Branch::OddExterior] {
            for i in 1..100 {
                let x = 0.25 * l * i as f64 / 101.0;
                let pm = peaked_profile(branch, l, x - h).unwrap();
                let p0 = peaked_profile(branch, l, x).unwrap();
                let pp = peaked_profile(branch, l, x + h).unwrap();
                let d2 = (pm - 2.0 * p0 + pp) / (h * h);
                assert!((d2 - p0).abs() < 1e-4, "{branch:?} x={x}: {d2} vs {p0}");
            }
        }
    }

    #[test]
    fn peaked_energy_matches_closed_forms() {
        // E(phi, phi') - E_omega(1) on the closed forms equals peaked_energy
        let l = 2.0 * PI;
        let x = 1.234f64;
        let phi = peaked_profile(Branch::EvenInterior, l, x).unwrap();
        let dphi = -(0.5 * l - x).sinh() / (0.5 * l).cosh();
        let e = 0.5 * dphi * dphi + 0.5 * (1.0 - phi * phi) - 0.5;
        let pe = peaked_energy(Branch::EvenInterior, l).unwrap();
        assert!((e - pe).abs() < 1e-12, "{e} vs {pe}");

        let phi = peaked_profile(Branch::OddExterior, l, x).unwrap();
        let dphi = x.cosh() / (0.25 * l).sinh();
        let e = 0.5 * dphi * dphi + 0.5 * (1.0 - phi * phi) - 0.5;
        let pe = peaked_energy(Branch::OddExterior, l).unwrap();
        assert!((e - pe).abs() < 1e-12, "{e} vs {pe}");
    }

    #[test]
    fn max_amplitude_grows_with_omega() {
        // max phi -> 1^- monotonically: tracked through s = 1 - M^2, which
        // stays meaningful after M itself saturates in f64
        let l = 2.0 * PI;
        for branch in [Branch::EvenInterior, Branch::OddExterior] {
            let mut prev_s = f64::INFINITY;
            for &w in &[0.5, 0.6, 0.7, 0.8, 0.9, 0.97] {
                let pt = if branch.is_even() {
                    even_point(w, l)
                } else {
                    odd_point(w, l)
                };
                let s = pt.orbit.outer.s;
                assert!(s > 0.0 && s < prev_s, "{branch:?} s = {s} at omega = {w}");
                prev_s = s;
            }
        }
    }

    #[test]
    fn phi_prime_signs() {
        let l = 2.0 * PI;
        let pt = odd_point(0.5, l);
        let prof = reconstruct_profile(&pt, 129, &tol()).unwrap();
        let (xs, phis) = prof.resample_uniform(64).unwrap();
        let dp = prof.phi_prime_samples(&xs, &phis);
        for (x, d) in xs.iter().zip(&dp) {
            if x.abs() < 0.24 * l && x.abs() > 0.01 {
                assert!(*d > 0.0, "phi' sign at x = {x}");
            }
            if x.abs() > 0.26 * l && x.abs() < 0.49 * l {
                assert!(*d < 0.0, "phi' sign at x = {x}");
            }
        }
    }
}
