//! Discretized Hessian operators L+/- on the periodic grid, Morse and
//! nullity index counts, the theta parameter, and the half-period-odd
//! subspace restriction used for the odd branch.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::family::FamilyPoint;
use crate::model::Branch;
use crate::numerics::Tolerances;
use crate::period::period_derivative_delta;
use crate::profile::Profile;

/// Which Hessian block the operator discretizes:
///   L+ = -d2/dx2 + 1 + (omega-1)(1+phi^2)/(1-phi^2)^2
///   L- = -d2/dx2 + 1 + (omega-1)/(1-phi^2)
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum HessianKind {
    LPlus,
    LMinus,
}

/// Periodic second-difference discretization of L+ or L- at a sampled wave.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub n: usize,
    pub dx: f64,
    pub which: HessianKind,
    pub matrix: DMatrix<f64>,
    /// Diagonal potential W(x_j) (without the Laplacian part).
    pub potential: Vec<f64>,
    /// Grid and wave samples the operator was built from.
    pub xs: Vec<f64>,
    pub phis: Vec<f64>,
    pub phi_primes: Vec<f64>,
    pub branch: Branch,
    pub omega: f64,
    pub l: f64,
}

/// Builds the symmetric periodic matrix -D2 + diag(W) at N uniform grid
/// points, with the wave resampled by monotone cubic interpolation.
pub fn build_operator(profile: &Profile, which: HessianKind, n: usize) -> Result<DiscreteOperator> {
    if n < 16 || n % 4 != 0 {
        return Err(Error::ResampleFailure(format!(
            "operator grid must be a multiple of 4 and >= 16 (got {n})"
        )));
    }
    let (xs, phis) = profile.resample_uniform(n)?;
    if phis.iter().any(|p| p.abs() >= 1.0) {
        return Err(Error::ResampleFailure(
            "resampled |phi| >= 1 at a grid node".into(),
        ));
    }
    let phi_primes = profile.phi_prime_samples(&xs, &phis);
    let w = profile.omega;
    let dx = profile.l / n as f64;
    let inv2 = 1.0 / (dx * dx);

    let potential: Vec<f64> = phis
        .iter()
        .map(|&p| {
            let s = (1.0 - p) * (1.0 + p);
            match which {
                HessianKind::LPlus => 1.0 + (w - 1.0) * (1.0 + p * p) / (s * s),
                HessianKind::LMinus => 1.0 + (w - 1.0) / s,
            }
        })
        .collect();

    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        matrix[(j, j)] = 2.0 * inv2 + potential[j];
        let right = (j + 1) % n;
        let left = (j + n - 1) % n;
        matrix[(j, right)] = -inv2;
        matrix[(j, left)] = -inv2;
    }

    Ok(DiscreteOperator {
        n,
        dx,
        which,
        matrix,
        potential,
        xs,
        phis,
        phi_primes,
        branch: profile.branch,
        omega: w,
        l: profile.l,
    })
}

impl DiscreteOperator {
    /// Default threshold separating the O(dx^2)-perturbed kernel from the
    /// O(1) nonzero eigenvalues: 10 max|W| dx^2.
    pub fn default_zero_tol(&self) -> f64 {
        let wmax = self.potential.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        10.0 * wmax * self.dx * self.dx
    }
}

/// Full symmetric eigensolve; returns (n, z) with n = #{lambda < -zero_tol}
/// and z = #{|lambda| <= zero_tol}.
pub fn count_indices(op: &DiscreteOperator, zero_tol: f64) -> Result<(usize, usize)> {
    let eigs = op.matrix.clone().symmetric_eigenvalues();
    Ok(count_from_eigenvalues(eigs.as_slice(), zero_tol))
}

fn count_from_eigenvalues(eigs: &[f64], zero_tol: f64) -> (usize, usize) {
    let n = eigs.iter().filter(|&&e| e < -zero_tol).count();
    let z = eigs.iter().filter(|&&e| e.abs() <= zero_tol).count();
    (n, z)
}

/// theta = dT/dE at E_L times V'(M)^2: positive on the even branch, negative
/// on the odd branch, matching the sign of the period derivative.
pub fn theta_value(point: &FamilyPoint, tol: &Tolerances) -> Result<f64> {
    let orbit = &point.orbit;
    let dt_de = period_derivative_delta(orbit.branch, orbit.omega.value(), orbit.delta_e, tol)?;
    let outer = &orbit.outer;
    let w = orbit.omega.value();
    // V'(M) = M (M^2 - omega) / (1 - M^2), with 1 - M^2 carried as s
    let vp = outer.phi * ((1.0 - outer.s) - w) / outer.s;
    Ok(dt_de * vp * vp)
}

/// Index counts of the operator restricted to the subspace Y of grid
/// functions odd under the half-period reflection x -> -x (equivalently odd
/// about x = L/2). Requires an odd-branch sampling with the exact symmetry.
pub fn restricted_indices(
    op: &DiscreteOperator,
    zero_tol: f64,
) -> Result<(usize, usize)> {
    let n = op.n;
    // verify the wave has the odd symmetry on the grid: phi(N-j) = -phi(j)
    let mut worst: f64 = op.phis[0].abs().max(op.phis[n / 2].abs());
    for j in 1..n / 2 {
        worst = worst.max((op.phis[n - j] + op.phis[j]).abs());
    }
    if worst > 1e-8 {
        return Err(Error::SymmetryViolation(format!(
            "profile is not odd under the half-period reflection (defect {worst:.3e})"
        )));
    }

    // orthonormal basis e_k = (delta_j - delta_{N-j})/sqrt(2), j = 1..N/2-1;
    // the projected matrix entries follow directly from the reflection
    let dim = n / 2 - 1;
    let mut proj = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..dim {
        let j = a + 1;
        for b in 0..dim {
            let k = b + 1;
            proj[(a, b)] = 0.5
                * (op.matrix[(j, k)] - op.matrix[(j, n - k)] - op.matrix[(n - j, k)]
                    + op.matrix[(n - j, n - k)]);
        }
    }
    let eigs = proj.symmetric_eigenvalues();
    Ok(count_from_eigenvalues(eigs.as_slice(), zero_tol))
}

/// Restricted counts for both operators on the odd branch.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RestrictedIndices {
    pub n_plus_y: usize,
    pub z_plus_y: usize,
    pub n_minus_y: usize,
    pub z_minus_y: usize,
}

/// Index counts, theta, and (odd branch) Y-restricted counts at one wave.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SpectrumReport {
    pub branch: Branch,
    pub omega: f64,
    pub l: f64,
    pub n_grid: usize,
    pub zero_tol: f64,
    pub n_plus: usize,
    pub z_plus: usize,
    pub n_minus: usize,
    pub z_minus: usize,
    pub theta: f64,
    pub restricted: Option<RestrictedIndices>,
}

/// Assembles the full spectral report at one family point.
pub fn spectrum_report(
    point: &FamilyPoint,
    profile: &Profile,
    n: usize,
    tol: &Tolerances,
) -> Result<SpectrumReport> {
    let plus = build_operator(profile, HessianKind::LPlus, n)?;
    let minus = build_operator(profile, HessianKind::LMinus, n)?;
    let zero_tol = plus.default_zero_tol().max(minus.default_zero_tol());
    let (n_plus, z_plus) = count_indices(&plus, plus.default_zero_tol())?;
    let (n_minus, z_minus) = count_indices(&minus, minus.default_zero_tol())?;
    let theta = theta_value(point, tol)?;
    let restricted = match point.orbit.branch {
        Branch::OddExterior => {
            let (npy, zpy) = restricted_indices(&plus, plus.default_zero_tol())?;
            let (nmy, zmy) = restricted_indices(&minus, minus.default_zero_tol())?;
            Some(RestrictedIndices {
                n_plus_y: npy,
                z_plus_y: zpy,
                n_minus_y: nmy,
                z_minus_y: zmy,
            })
        }
        Branch::EvenInterior => None,
    };
    Ok(SpectrumReport {
        branch: point.orbit.branch,
        omega: point.omega(),
        l: point.l,
        n_grid: n,
        zero_tol,
        n_plus,
        z_plus,
        n_minus,
        z_minus,
        theta,
        restricted,
    })
}
