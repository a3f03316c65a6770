//! Independent oracles for the quadrature pipeline: RK4 time-of-flight
//! integration of the Newton equation, a direct evaluation of the odd-branch
//! period derivative from its weakly singular integral form, and
//! bisection-only turning points. None of these share code paths with the
//! quadrature implementation they check.

use idd_waves::model::{Branch, Frequency, PotentialModel};
use idd_waves::numerics::{integrate_adaptive, Tolerances};
use idd_waves::period::{period_derivative, period_even, period_odd, resolve_orbit};

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Half period of the orbit through (M, 0) by RK4 integration of
/// phi'' = -V'(phi) until phi' returns to zero.
fn rk4_half_period(model: &PotentialModel, m_outer: f64) -> f64 {
    let f = |phi: f64, psi: f64| -> (f64, f64) {
        (psi, -model.potential_derivatives(phi, 1).unwrap())
    };
    // rough period scale to choose the step
    let scale = 40.0;
    let h = scale / 400_000.0;
    let mut x = 0.0;
    let mut phi = m_outer;
    let mut psi = 0.0f64;
    let mut steps = 0usize;
    loop {
        let (k1p, k1q) = f(phi, psi);
        let (k2p, k2q) = f(phi + 0.5 * h * k1p, psi + 0.5 * h * k1q);
        let (k3p, k3q) = f(phi + 0.5 * h * k2p, psi + 0.5 * h * k2q);
        let (k4p, k4q) = f(phi + h * k3p, psi + h * k3q);
        let phi_next = phi + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let psi_next = psi + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        steps += 1;
        assert!(steps < 60_000_000, "RK4 oracle did not close the orbit");
        // closing condition: phi' crosses zero from below after leaving M
        if steps > 10 && psi < 0.0 && psi_next >= 0.0 {
            // one Newton correction along the flow: dpsi/dx = -V'(phi)
            let slope = -model.potential_derivatives(phi_next, 1).unwrap();
            return x + h - psi_next / slope;
        }
        x += h;
        phi = phi_next;
        psi = psi_next;
    }
}

#[test]
fn period_matches_rk4_time_of_flight() {
    // 10-orbit spot grid across both branches, 1e-6 relative agreement
    let cases_even = [(0.3, 0.5), (0.5, 0.5), (0.5, 0.9), (0.7, 0.3), (0.9, 0.6)];
    for &(w, frac) in &cases_even {
        let model = PotentialModel::new(w);
        let e = frac * model.homoclinic_energy().unwrap();
        let sample = period_even(Frequency(w), e, &tol()).unwrap();
        let t_rk4 = 2.0 * rk4_half_period(&model, sample.orbit.m_outer());
        let rel = ((sample.t - t_rk4) / t_rk4).abs();
        assert!(rel < 1e-6, "even w={w}, E={e}: {} vs {t_rk4} (rel {rel:.2e})", sample.t);
    }
    let cases_odd = [(0.3, 1.5), (0.5, 2.0), (0.5, 4.0), (-0.5, 2.0), (0.8, 1.2)];
    for &(w, frac) in &cases_odd {
        let model = PotentialModel::new(w);
        let e = frac * model.homoclinic_energy().unwrap().abs() + model.homoclinic_energy().unwrap();
        let sample = period_odd(Frequency(w), e, &tol()).unwrap();
        let t_rk4 = 2.0 * rk4_half_period(&model, sample.orbit.m_outer());
        let rel = ((sample.t - t_rk4) / t_rk4).abs();
        assert!(rel < 1e-6, "odd w={w}, E={e}: {} vs {t_rk4} (rel {rel:.2e})", sample.t);
    }
}

#[test]
fn even_small_energy_convergence_order() {
    // T(E) - T(0) shrinks at least linearly in E
    let w = 0.5;
    let model = PotentialModel::new(w);
    let e_hom = model.homoclinic_energy().unwrap();
    let t0 = 2.0 * std::f64::consts::PI * ((1.0 - w) / (2.0 * w)).sqrt();
    let mut prev_err = f64::INFINITY;
    for &frac in &[1e-4, 1e-5, 1e-6] {
        let t = period_even(Frequency(w), frac * e_hom, &tol()).unwrap().t;
        let err = (t - t0).abs();
        assert!(err < 0.2 * prev_err, "order < 1: err {err} at frac {frac}");
        prev_err = err;
    }
}

/// The odd-branch dT/dE evaluated from the two weakly singular integrals of
/// the q = M^2 reformulation, with W(t) = V(sqrt(t)):
///   dT/dq = I1 / sqrt(2q) - sqrt(2q)/2 I2,   dT/dE = (dT/dq) / W'(q),
///   I1 = int_0^1 du / sqrt(u (W(q) - W(qu))),
///   I2 = int_0^1 (W'(q) - u W'(qu)) / sqrt(u (W(q) - W(qu))^3) du.
#[test]
fn odd_derivative_matches_singular_integral_form() {
    let w = 0.5f64;
    let model = PotentialModel::new(w);
    let e_hom = model.homoclinic_energy().unwrap();
    let energy = 2.0 * e_hom;
    let orbit = resolve_orbit(Branch::OddExterior, Frequency(w), energy).unwrap();
    let q = orbit.m_outer() * orbit.m_outer();

    let w_of = |t: f64| 0.5 * (w - t) + 0.5 * (1.0 - w) * ((-w).ln_1p() - (-t).ln_1p());
    let wp_of = |t: f64| (t - w) / (2.0 * (1.0 - t));
    let wq = w_of(q);
    let wpq = wp_of(q);

    let g1 = |u: f64| 1.0 / (u * (wq - w_of(q * u))).sqrt();
    let g2 = |u: f64| (wpq - u * wp_of(q * u)) / (u * (wq - w_of(q * u)).powi(3)).sqrt();
    // substitutions u = v^2 (left) and u = 1 - v^2 (right) remove the
    // endpoint singularities
    let split = 0.5f64.sqrt();
    let quad = |g: &dyn Fn(f64) -> f64| -> f64 {
        let left = integrate_adaptive(|v| 2.0 * v * g(v * v), 0.0, split, &tol())
            .unwrap()
            .value;
        let right = integrate_adaptive(|v| 2.0 * v * g(1.0 - v * v), 1e-9, split, &tol())
            .unwrap()
            .value;
        left + right
    };
    let i1 = quad(&g1);
    let i2 = quad(&g2);
    let dt_dq = i1 / (2.0 * q).sqrt() - 0.5 * (2.0 * q).sqrt() * i2;
    let oracle = dt_dq / wpq;

    let fd = period_derivative(Branch::OddExterior, Frequency(w), energy, &tol()).unwrap();
    let rel = ((oracle - fd) / fd).abs();
    assert!(rel < 1e-4, "oracle {oracle} vs finite difference {fd} (rel {rel:.2e})");
    assert!(oracle < 0.0);
}

#[test]
fn turning_points_match_bisection_oracle() {
    // pure bisection on V(phi) = E down to 1e-12 bracket width
    let w = 0.5f64;
    let model = PotentialModel::new(w);
    let e_hom = model.homoclinic_energy().unwrap();
    let bisect = |mut lo: f64, mut hi: f64, e: f64| -> f64 {
        let mut flo = model.potential(lo).unwrap() - e;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = model.potential(mid).unwrap() - e;
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        0.5 * (lo + hi)
    };

    let e = 0.5 * e_hom;
    let orbit = resolve_orbit(Branch::EvenInterior, Frequency(w), e).unwrap();
    let root = w.sqrt();
    let m_ref = bisect(1e-6, root, e);
    let big_m_ref = bisect(root, 1.0 - 1e-9, e);
    assert!((orbit.m().unwrap() - m_ref).abs() < 1e-11);
    assert!((orbit.m_outer() - big_m_ref).abs() < 1e-11);

    let e = 2.0 * e_hom;
    let orbit = resolve_orbit(Branch::OddExterior, Frequency(w), e).unwrap();
    let big_m_ref = bisect(root, 1.0 - 1e-9, e);
    assert!((orbit.m_outer() - big_m_ref).abs() < 1e-11);
    assert!(orbit.m_outer() > root && orbit.m_outer() < 1.0);
}
