//! Wave families at fixed spatial period: inversion of T(E, omega) = L,
//! continuation over omega grids, and the peaked-limit energy levels.

use crate::error::{Error, Result};
use crate::model::{homoclinic_energy_raw, limiting_frequencies, Branch, Frequency, Orbit};
use crate::numerics::{find_root_bracketed, Tolerances};
use crate::period::{period_of_delta, resolve_orbit_delta};

/// Continuation stops here by default: beyond, the outer turning point
/// approaches the logarithmic wall of V and the paper's own data ends.
pub const OMEGA_CAP: f64 = 0.99;

/// Frequencies above this draw a warning from the CLI layer.
pub const OMEGA_WARN: f64 = 0.97;

/// One continuation sample: the resolved orbit at the energy level
/// E_L(omega) where the period equals L.
#[derive(Debug, Clone)]
pub struct FamilyPoint {
    pub orbit: Orbit,
    pub l: f64,
    /// tilde E = E_L - E_omega, carried at full precision even when it is
    /// far below the rounding floor of E_L itself.
    pub tilde_e: f64,
    /// Mass Q(phi), filled by the observables pass.
    pub q: Option<f64>,
    /// dQ/domega, filled by the observables pass.
    pub dq_domega: Option<f64>,
    /// Energetic stability flag from the sign of dQ/domega.
    pub stable: Option<bool>,
}

impl FamilyPoint {
    pub fn omega(&self) -> f64 {
        self.orbit.omega.value()
    }

    pub fn energy(&self) -> f64 {
        self.orbit.energy
    }
}

/// A continuation curve at fixed branch and period.
#[derive(Debug, Clone)]
pub struct FamilyCurve {
    pub branch: Branch,
    pub l: f64,
    pub points: Vec<FamilyPoint>,
    /// (omega, reason) for grid points that failed to converge.
    pub failures: Vec<(f64, String)>,
}

fn admissible_lower(branch: Branch, l: f64) -> Result<f64> {
    let (omega_l, omega_big_l) = limiting_frequencies(l)?;
    Ok(match branch {
        Branch::EvenInterior => omega_l,
        Branch::OddExterior => omega_big_l,
    })
}

/// Solves T(E_L, omega) = L for the unique energy level on the given branch.
///
/// The root is found in y = log|E - E_omega|, where the period is a smooth,
/// nearly linear function near the homoclinic divergence; monotonicity of T
/// (increasing on the even branch, decreasing on the odd) guarantees a single
/// sign change.
pub fn solve_energy_for_period(
    branch: Branch,
    omega: Frequency,
    l: f64,
    tol: &Tolerances,
) -> Result<FamilyPoint> {
    let w = omega.value();
    let lo = admissible_lower(branch, l)?;
    if !(w > lo && w < 1.0) {
        return Err(Error::FrequencyOutOfRange {
            branch,
            omega: w,
            l,
            lo,
        });
    }
    let delta = solve_delta(branch, w, l, tol, None)?;
    point_from_delta(branch, w, l, delta)
}

fn point_from_delta(branch: Branch, w: f64, l: f64, delta: f64) -> Result<FamilyPoint> {
    let orbit = resolve_orbit_delta(branch, w, delta)?;
    let tilde_e = match branch {
        Branch::EvenInterior => -delta,
        Branch::OddExterior => delta,
    };
    Ok(FamilyPoint {
        orbit,
        l,
        tilde_e,
        q: None,
        dq_domega: None,
        stable: None,
    })
}

/// Root of T(delta) = L in y = log(delta), optionally warm-started from a
/// previous root.
pub(crate) fn solve_delta(
    branch: Branch,
    w: f64,
    l: f64,
    tol: &Tolerances,
    warm: Option<f64>,
) -> Result<f64> {
    let e_hom = homoclinic_energy_raw(w);
    let g = |y: f64| match period_of_delta(branch, w, y.exp(), tol) {
        Ok(t) => t - l,
        Err(_) => f64::NAN,
    };
    let y_tol = Tolerances {
        abs_tol: 2e-13,
        rel_tol: 1e-16,
        max_depth: 60,
    };

    if let Some(y_prev) = warm {
        let (a, b) = (y_prev - 0.75, y_prev + 0.75);
        let (ga, gb) = (g(a), g(b));
        if ga.is_finite() && gb.is_finite() && ga * gb < 0.0 {
            let y = find_root_bracketed(g, a, b, &y_tol)?;
            return Ok(y.exp());
        }
    }

    // T decreases along y on the even branch (larger delta means smaller E)
    // and also decreases along y on the odd branch (larger delta means larger
    // E, smaller T): the bracket always has g > 0 at the low end.
    let (mut y_lo, mut y_hi) = match branch {
        Branch::EvenInterior => {
            let mut y_hi = e_hom.ln() + (-1e-9f64).ln_1p();
            let mut tries = 0;
            while !(g(y_hi) < 0.0) {
                // wave exists but with E below 1e-9 E_omega: push closer to 0
                tries += 1;
                if tries > 2 {
                    return Err(Error::NonConvergence(tries));
                }
                y_hi = e_hom.ln() + (-(10f64.powi(-9 - 3 * tries as i32))).ln_1p();
            }
            (e_hom.ln() - 23.0, y_hi)
        }
        Branch::OddExterior => {
            let scale = e_hom.abs().max(1e-3);
            let mut y_hi = scale.ln();
            let mut guard = 0;
            while g(y_hi) > 0.0 {
                y_hi += 2.0;
                guard += 1;
                if guard > 300 {
                    return Err(Error::NonConvergence(guard));
                }
            }
            (scale.ln() - 23.0, y_hi)
        }
    };
    let mut guard = 0;
    while !(g(y_lo) > 0.0) {
        y_lo -= 18.0;
        guard += 1;
        if guard > 38 {
            return Err(Error::BracketInvalid(format!(
                "period bracket did not close at omega = {w}, L = {l}"
            )));
        }
    }
    if y_lo >= y_hi {
        y_hi = y_lo + 1e-6;
    }
    let y = find_root_bracketed(g, y_lo, y_hi, &y_tol)?;
    Ok(y.exp())
}

/// Runs continuation over an ascending omega grid; each solved point
/// warm-starts the next bracket. Failures are recorded and skipped.
pub fn continue_family(
    branch: Branch,
    l: f64,
    omega_grid: &[f64],
    tol: &Tolerances,
) -> Result<FamilyCurve> {
    let lo = admissible_lower(branch, l)?;
    for w in omega_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain(
                "omega grid must be strictly increasing".into(),
            ));
        }
    }
    if let (Some(first), Some(last)) = (omega_grid.first(), omega_grid.last()) {
        if !(*first > lo) || !(*last < 1.0) {
            return Err(Error::FrequencyOutOfRange {
                branch,
                omega: if *first <= lo { *first } else { *last },
                l,
                lo,
            });
        }
        if *last > OMEGA_CAP + 1e-12 {
            return Err(Error::Domain(format!(
                "omega grid exceeds the continuation cap {OMEGA_CAP}"
            )));
        }
    }

    let mut curve = FamilyCurve {
        branch,
        l,
        points: Vec::with_capacity(omega_grid.len()),
        failures: Vec::new(),
    };
    let mut warm: Option<f64> = None;
    for &w in omega_grid {
        match solve_delta(branch, w, l, tol, warm) {
            Ok(delta) => {
                warm = Some(delta.ln());
                match point_from_delta(branch, w, l, delta) {
                    Ok(pt) => curve.points.push(pt),
                    Err(e) => curve.failures.push((w, e.to_string())),
                }
            }
            Err(e) => curve.failures.push((w, e.to_string())),
        }
    }
    Ok(curve)
}

/// The peaked-limit energy level tilde E_L(omega -> 1) = lim (E_L - E_omega):
/// -1/(2 cosh^2(L/2)) on the even branch, +1/(2 sinh^2(L/4)) on the odd.
///
/// Both values equal the energy of the corresponding peaked closed-form
/// profile measured against the omega = 1 potential, and the family curves
/// converge to them, as the continuation data confirms.
pub fn peaked_energy(branch: Branch, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("period L must be positive (got {l})")));
    }
    Ok(match branch {
        Branch::EvenInterior => -0.5 / (0.5 * l).cosh().powi(2),
        Branch::OddExterior => 0.5 / (0.25 * l).sinh().powi(2),
    })
}

/// Monotone cubic interpolation between the last converged point of a curve
/// and the peaked limit at omega = 1, mirroring the dotted-line
/// reconstruction of the figures. Returns (omega, tilde_e) pairs.
pub fn interpolate_to_peak(curve: &FamilyCurve, n: usize) -> Result<Vec<(f64, f64)>> {
    let last = curve
        .points
        .last()
        .ok_or_else(|| Error::Domain("empty curve".into()))?;
    let peak = peaked_energy(curve.branch, curve.l)?;
    let w0 = last.omega();
    let xs = [w0, 1.0];
    let ys = [last.tilde_e, peak];
    let interp = crate::numerics::MonotoneCubic::new(&xs, &ys)?;
    Ok((0..n)
        .map(|i| {
            let w = w0 + (1.0 - w0) * i as f64 / (n - 1).max(1) as f64;
            (w, interp.eval(w))
        })
        .collect())
}
