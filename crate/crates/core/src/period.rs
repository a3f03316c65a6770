//! The period function T(E, omega) on both branches: turning-point
//! resolution, weakly singular quadrature in turning-point-anchored
//! coordinates, and the finite-difference E-derivative.
//!
//! All energy differences are expressed through the kernels
//! D(r) = E_omega - V at r = phi^2 and the anchored form
//! E - V = [-d + (1-omega) log1p(d/s_T)]/2 with d = s_phi - s_T supplied
//! exactly, so orbits remain resolvable when E - E_omega or 1 - M^2
//! underflow the naive expressions.

use crate::error::{Error, Result};
use crate::model::{
    d_fun, homoclinic_energy_raw, u_fun, Branch, Frequency, Orbit,
    TurningPoint,
};
use crate::numerics::{find_root_bracketed, integrate_adaptive, log1p_over, Tolerances};

/// Below this value of s_M = 1 - M^2 the outer turning point is treated as a
/// hard wall: the singular layer is integrated in logarithmic coordinates.
pub(crate) const S_WALL: f64 = 1e-12;
const S_CUT: f64 = 1e-10;

/// One evaluation of the period function at a resolved orbit.
#[derive(Debug, Clone, Copy)]
pub struct PeriodSample {
    pub orbit: Orbit,
    /// Spatial period T(E, omega).
    pub t: f64,
    /// dT/dE when requested; positive on the even branch, negative on the
    /// odd branch.
    pub dt_de: Option<f64>,
}

// --------------------------------------------------------------------------
// Turning points
// --------------------------------------------------------------------------

fn root_tol() -> Tolerances {
    Tolerances {
        abs_tol: 5e-14,
        rel_tol: 1e-15,
        max_depth: 60,
    }
}

/// Inner (even-branch) turning point: D(r) = delta_e on r in (0, omega),
/// solved in x = log r so that orbits hugging the saddle stay resolvable.
pub(crate) fn solve_inner_turning(delta_e: f64, w: f64) -> Result<TurningPoint> {
    let x_hi = (w * (1.0 - 5e-16)).ln();
    let mut x_lo = (delta_e / homoclinic_energy_raw(w)).ln() + w.ln() - 2.0;
    let mut guard = 0;
    while d_fun(x_lo.exp(), w) >= delta_e {
        x_lo -= 30.0;
        guard += 1;
        if guard > 40 {
            return Err(Error::BracketInvalid(
                "inner turning point bracket did not close".into(),
            ));
        }
    }
    let x = find_root_bracketed(|x| d_fun(x.exp(), w) - delta_e, x_lo, x_hi, &root_tol())?;
    Ok(TurningPoint::from_r(x.exp()))
}

/// Outer turning point: root of D(r) = target on r in (max(omega,0), 1),
/// where D is monotonically decreasing. `target` is +delta_e on the even
/// branch and -delta_e on the odd branch.
///
/// Roots with r <= 1/2 are found in x = log r; wall roots (s = 1-r < 1/2)
/// in x = log s via U(s) = target.
pub(crate) fn solve_outer_turning(target: f64, w: f64) -> Result<TurningPoint> {
    let r_lo = w.max(0.0) * (1.0 + 5e-16) + 1e-320;
    if r_lo < 0.5 && d_fun(0.5, w) <= target {
        let mut x_lo = r_lo.max(1e-310).ln();
        if w <= 0.0 {
            // small orbits around the center: bracket down from r = 1/2
            x_lo = 0.5f64.ln();
            let mut guard = 0;
            while d_fun(x_lo.exp(), w) <= target {
                x_lo -= 30.0;
                guard += 1;
                if guard > 40 {
                    return Err(Error::BracketInvalid(
                        "outer turning point bracket did not close".into(),
                    ));
                }
            }
        }
        let x = find_root_bracketed(|x| d_fun(x.exp(), w) - target, x_lo, 0.5f64.ln(), &root_tol())?;
        return Ok(TurningPoint::from_r(x.exp()));
    }

    // wall side: U(s) monotone increasing on (0, 1-omega)
    let x_hi = 0.5f64.min((1.0 - w) * (1.0 - 5e-16)).ln();
    let mut x_lo = x_hi - 30.0;
    let mut guard = 0;
    while u_fun(x_lo.exp(), w) > target {
        x_lo -= 60.0;
        guard += 1;
        if guard > 20 {
            return Err(Error::BracketInvalid(
                "outer turning point wall bracket did not close".into(),
            ));
        }
    }
    let x = find_root_bracketed(|x| u_fun(x.exp(), w) - target, x_lo, x_hi, &root_tol())?;
    Ok(TurningPoint::from_s(x.exp()))
}

/// Resolves the turning points of the orbit at energy E on the given branch.
pub fn resolve_orbit(branch: Branch, omega: Frequency, energy: f64) -> Result<Orbit> {
    let w = omega.value();
    if !(w < 1.0) {
        return Err(Error::Domain(format!("orbit needs omega < 1 (got {w})")));
    }
    let e_hom = homoclinic_energy_raw(w);
    let delta_e = match branch {
        Branch::EvenInterior => e_hom - energy,
        Branch::OddExterior => energy - e_hom,
    };
    if !(delta_e > 0.0) || (branch.is_even() && energy <= 0.0) {
        return Err(Error::EnergyOutOfRange {
            branch,
            omega: w,
            energy,
        });
    }
    resolve_orbit_delta(branch, w, delta_e)
}

/// Same as [`resolve_orbit`], with the energy given by its signed distance
/// |E - E_omega| from the homoclinic level. This is the precision-carrying
/// route used by the family solver.
pub(crate) fn resolve_orbit_delta(branch: Branch, w: f64, delta_e: f64) -> Result<Orbit> {
    let e_hom = homoclinic_energy_raw(w);
    match branch {
        Branch::EvenInterior => {
            if !(0.0 < w && w < 1.0) {
                return Err(Error::Domain(format!(
                    "even branch needs omega in (0,1) (got {w})"
                )));
            }
            // E below ~100 eps E_omega is unresolvable in f64: the turning
            // equation degenerates quadratically at the center
            if !(delta_e > 0.0 && e_hom - delta_e > 100.0 * f64::EPSILON * e_hom) {
                return Err(Error::EnergyOutOfRange {
                    branch,
                    omega: w,
                    energy: e_hom - delta_e,
                });
            }
            let inner = solve_inner_turning(delta_e, w)?;
            let outer = solve_outer_turning(delta_e, w)?;
            Ok(Orbit {
                branch,
                omega: Frequency(w),
                energy: e_hom - delta_e,
                delta_e,
                inner: Some(inner),
                outer,
            })
        }
        Branch::OddExterior => {
            if !(delta_e > 0.0) {
                return Err(Error::EnergyOutOfRange {
                    branch,
                    omega: w,
                    energy: e_hom + delta_e,
                });
            }
            let outer = solve_outer_turning(-delta_e, w)?;
            Ok(Orbit {
                branch,
                omega: Frequency(w),
                energy: e_hom + delta_e,
                delta_e,
                inner: None,
                outer,
            })
        }
    }
}

// --------------------------------------------------------------------------
// Quadrature pieces. Every piece integrates f(phi, s_phi) / sqrt(2 (E - V))
// over its sub-interval of the orbit.
// --------------------------------------------------------------------------

/// Piece adjacent to the outer turning point M: integrates over
/// [phi_from, M] via phi = M - u^2 with the exact d = u^2 (M + phi).
pub(crate) fn outer_piece<F: Fn(f64, f64) -> f64>(
    outer: &TurningPoint,
    w: f64,
    f: F,
    phi_from: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let m_out = outer.phi;
    let s_m = outer.s;
    if !(phi_from < m_out) {
        return Err(Error::BracketInvalid(format!(
            "outer piece needs phi_from < M ({phi_from} vs {m_out})"
        )));
    }
    let u_max = (m_out - phi_from).sqrt();
    let r = integrate_adaptive(
        |u| {
            let phi = m_out - u * u;
            let d = u * u * (m_out + phi);
            let z = d / s_m;
            let brk = (1.0 - w) * log1p_over(z) / s_m - 1.0;
            2.0 * f(phi, s_m + d) / ((m_out + phi) * brk).sqrt()
        },
        0.0,
        u_max,
        tol,
    )?;
    Ok(r.value)
}

/// Piece adjacent to the inner (even-branch) turning point m: integrates
/// over [m, phi_to] via phi = m + u^2.
pub(crate) fn inner_piece<F: Fn(f64, f64) -> f64>(
    inner: &TurningPoint,
    w: f64,
    f: F,
    phi_to: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let m_in = inner.phi;
    let s_m = inner.s;
    if !(phi_to > m_in) {
        return Err(Error::BracketInvalid(format!(
            "inner piece needs phi_to > m ({phi_to} vs {m_in})"
        )));
    }
    let u_max = (phi_to - m_in).sqrt();
    let r = integrate_adaptive(
        |u| {
            let phi = m_in + u * u;
            let d = -u * u * (m_in + phi);
            let z = d / s_m;
            let brk = 1.0 - (1.0 - w) * log1p_over(z) / s_m;
            2.0 * f(phi, s_m + d) / ((m_in + phi) * brk).sqrt()
        },
        0.0,
        u_max,
        tol,
    )?;
    Ok(r.value)
}

/// Regular odd-branch piece anchored at the center: E - V = delta_e + D(phi^2),
/// a sum of nonnegative terms on [0, M).
pub(crate) fn center_piece<F: Fn(f64, f64) -> f64>(
    delta_e: f64,
    w: f64,
    f: F,
    a: f64,
    b: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let r = integrate_adaptive(
        |phi| {
            let emv = delta_e + d_fun(phi * phi, w);
            f(phi, (1.0 - phi) * (1.0 + phi)) / (2.0 * emv).sqrt()
        },
        a,
        b,
        tol,
    )?;
    Ok(r.value)
}

/// Wall-regime regular piece in the s coordinate over [s_from, s_to],
/// anchored at the outer turning point.
fn sspace_piece<F: Fn(f64, f64) -> f64>(
    s_m: f64,
    w: f64,
    f: F,
    s_from: f64,
    s_to: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let ln_sm = s_m.ln();
    let r = integrate_adaptive(
        |s| {
            let emv = 0.5 * (-(s - s_m) + (1.0 - w) * (s.ln() - ln_sm));
            let phi = (1.0 - s).sqrt();
            f(phi, s) / (2.0 * phi * (2.0 * emv).sqrt())
        },
        s_from,
        s_to,
        tol,
    )?;
    Ok(r.value)
}

/// Wall-regime singular layer [s_M, s_cut] via s = s_M exp(v^2); the
/// transformed integrand is analytic at v = 0.
fn wall_tail<F: Fn(f64, f64) -> f64>(
    s_m: f64,
    w: f64,
    f: F,
    s_cut: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let v_max = (s_cut.ln() - s_m.ln()).sqrt();
    let r = integrate_adaptive(
        |v| {
            let v2 = v * v;
            let s = s_m * v2.exp();
            let em1_over = expm1_over(v2);
            // 2 (E - V) = (1-w) v^2 - s_M expm1(v^2) = v^2 [(1-w) - s_M expm1(v2)/v2]
            let bracket = (1.0 - w) - s_m * em1_over;
            let phi = (1.0 - s).sqrt();
            f(phi, s) * s / (phi * bracket.sqrt())
        },
        0.0,
        v_max,
        tol,
    )?;
    Ok(r.value)
}

fn expm1_over(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x * (0.5 + x / 6.0)
    } else {
        x.exp_m1() / x
    }
}

/// Integral of f(phi, s_phi) / sqrt(2 (E - V)) from phi = 0 to the outer
/// turning point on the odd branch, wall-aware.
pub(crate) fn odd_half_integral<F: Fn(f64, f64) -> f64 + Copy>(
    orbit: &Orbit,
    f: F,
    tol: &Tolerances,
) -> Result<f64> {
    let w = orbit.omega.value();
    let outer = &orbit.outer;
    if outer.s >= S_WALL {
        let split = outer.phi / 2.0;
        let a = center_piece(orbit.delta_e, w, f, 0.0, split, tol)?;
        let b = outer_piece(outer, w, f, split, tol)?;
        Ok(a + b)
    } else {
        // phi-space up to sqrt(3)/2 (s = 1/4), then s-space, then the layer
        let phi_split = (0.75f64).sqrt();
        let a = center_piece(orbit.delta_e, w, f, 0.0, phi_split, tol)?;
        let b = sspace_piece(outer.s, w, f, S_CUT, 0.25, tol)?;
        let c = wall_tail(outer.s, w, f, S_CUT, tol)?;
        Ok(a + b + c)
    }
}

/// Integral of f(phi, s_phi) / sqrt(2 (E - V)) from the inner to the outer
/// turning point on the even branch, split at the potential minimum
/// sqrt(omega), wall-aware on the outer side.
pub(crate) fn even_half_integral<F: Fn(f64, f64) -> f64 + Copy>(
    orbit: &Orbit,
    f: F,
    tol: &Tolerances,
) -> Result<f64> {
    let w = orbit.omega.value();
    let inner = orbit.inner.as_ref().expect("even orbit carries m");
    let outer = &orbit.outer;
    let split = w.sqrt();
    let left = inner_piece(inner, w, f, split, tol)?;
    let right = if outer.s >= S_WALL {
        outer_piece(outer, w, f, split, tol)?
    } else {
        // s at the split point is exactly 1 - omega
        let b = sspace_piece(outer.s, w, f, S_CUT, 1.0 - w, tol)?;
        let c = wall_tail(outer.s, w, f, S_CUT, tol)?;
        b + c
    };
    Ok(left + right)
}

/// T at an already resolved orbit.
pub fn period_of_orbit(orbit: &Orbit, tol: &Tolerances) -> Result<f64> {
    let one = |_phi: f64, _s: f64| 1.0;
    match orbit.branch {
        Branch::EvenInterior => Ok(2.0 * even_half_integral(orbit, one, tol)?),
        Branch::OddExterior => Ok(4.0 * odd_half_integral(orbit, one, tol)?),
    }
}

/// T(E, omega) for the even family: 2 int_m^M dphi / sqrt(2 (E - V)).
pub fn period_even(omega: Frequency, energy: f64, tol: &Tolerances) -> Result<PeriodSample> {
    let orbit = resolve_orbit(Branch::EvenInterior, omega, energy)?;
    let t = period_of_orbit(&orbit, tol)?;
    Ok(PeriodSample {
        orbit,
        t,
        dt_de: None,
    })
}

/// T(E, omega) for the odd family: 4 int_0^M dphi / sqrt(2 (E - V)).
pub fn period_odd(omega: Frequency, energy: f64, tol: &Tolerances) -> Result<PeriodSample> {
    let orbit = resolve_orbit(Branch::OddExterior, omega, energy)?;
    let t = period_of_orbit(&orbit, tol)?;
    Ok(PeriodSample {
        orbit,
        t,
        dt_de: None,
    })
}

pub(crate) fn period_of_delta(branch: Branch, w: f64, delta_e: f64, tol: &Tolerances) -> Result<f64> {
    let orbit = resolve_orbit_delta(branch, w, delta_e)?;
    period_of_orbit(&orbit, tol)
}

/// dT/dE by a central difference with the step adapted to the distance from
/// the homoclinic level, where T blows up.
pub fn period_derivative(
    branch: Branch,
    omega: Frequency,
    energy: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let orbit = resolve_orbit(branch, omega, energy)?;
    period_derivative_delta(branch, omega.value(), orbit.delta_e, tol)
}

/// dT/dE with the energy given as delta = |E - E_omega|.
pub(crate) fn period_derivative_delta(
    branch: Branch,
    w: f64,
    delta: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let e_hom = homoclinic_energy_raw(w);
    let energy = match branch {
        Branch::EvenInterior => e_hom - delta,
        Branch::OddExterior => e_hom + delta,
    };
    let h = match branch {
        Branch::EvenInterior => 1e-6 * energy.min(delta),
        Branch::OddExterior => (1e-6 * delta).max(1e-12),
    };
    if !(h > 0.0) || h <= 4.0 * f64::EPSILON * e_hom.abs().max(energy.abs()) {
        return Err(Error::StepUnderflow);
    }
    // steps taken in the delta coordinate: E + h shrinks delta on the even
    // branch and grows it on the odd branch
    let (d_plus, d_minus) = match branch {
        Branch::EvenInterior => (delta - h, delta + h),
        Branch::OddExterior => (delta + h, delta - h),
    };
    let t_plus = period_of_delta(branch, w, d_plus, tol)?;
    let t_minus = period_of_delta(branch, w, d_minus, tol)?;
    Ok((t_plus - t_minus) / (2.0 * h))
}
