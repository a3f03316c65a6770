//! Finite-difference Newton solver for bright solitons on a truncated line,
//! and the mass-curve scan that reproduces the coarse-grid discretization
//! artefact (the spurious extra branch of Q versus omega).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::solve_energy_for_period;
use crate::model::{limiting_frequencies, Branch, Frequency};
use crate::numerics::Tolerances;
use crate::observables::mass_quadrature;

/// Uniform grid on [-half_width, half_width] with Dirichlet ends.
#[derive(Debug, Clone)]
pub struct FdGrid {
    pub half_width: f64,
    pub dx: f64,
    pub n: usize,
    pub xs: Vec<f64>,
}

impl FdGrid {
    /// Default truncation half-width used throughout the scans.
    pub const DEFAULT_HALF_WIDTH: f64 = 20.0;

    pub fn new(half_width: f64, dx: f64) -> Result<Self> {
        if !(half_width > 0.0 && dx > 0.0 && dx < half_width) {
            return Err(Error::Domain(format!(
                "invalid grid: half_width = {half_width}, dx = {dx}"
            )));
        }
        let n = (2.0 * half_width / dx).round() as usize + 1;
        let dx = 2.0 * half_width / (n - 1) as f64;
        let xs = (0..n)
            .map(|j| -half_width + dx * j as f64)
            .collect();
        Ok(Self {
            half_width,
            dx,
            n,
            xs,
        })
    }
}

/// Converged (or abandoned) Newton solve at one frequency.
#[derive(Debug, Clone)]
pub struct FdSolveResult {
    pub omega: f64,
    pub phis: Vec<f64>,
    pub iterations: usize,
    pub final_residual_rms: f64,
    pub q_trapezoid: f64,
    pub converged: bool,
}

/// Residual R_j = (1 - phi_j^2)(D^2 phi)_j - (omega - phi_j^2) phi_j on the
/// interior nodes, central second differences.
pub fn fd_residual(phis: &[f64], omega: f64, grid: &FdGrid) -> Vec<f64> {
    let inv2 = 1.0 / (grid.dx * grid.dx);
    (1..grid.n - 1)
        .map(|j| {
            let p = phis[j];
            let d2 = (phis[j - 1] - 2.0 * p + phis[j + 1]) * inv2;
            (1.0 - p * p) * d2 - (omega - p * p) * p
        })
        .collect()
}

/// Tridiagonal matrix in banded form: sub[i] = A_{i+1,i}, diag[i] = A_{i,i},
/// sup[i] = A_{i,i+1}.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

/// Jacobian of the residual map on the interior nodes:
/// J_{j,j+-1} = (1 - phi_j^2)/dx^2,
/// J_{j,j} = -2(1 - phi_j^2)/dx^2 - 2 phi_j (D^2 phi)_j - omega + 3 phi_j^2.
pub fn fd_jacobian(phis: &[f64], omega: f64, grid: &FdGrid) -> Tridiagonal {
    let inv2 = 1.0 / (grid.dx * grid.dx);
    let m = grid.n - 2;
    let mut sub = vec![0.0; m - 1];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m - 1];
    for (i, j) in (1..grid.n - 1).enumerate() {
        let p = phis[j];
        let d2 = (phis[j - 1] - 2.0 * p + phis[j + 1]) * inv2;
        diag[i] = -2.0 * (1.0 - p * p) * inv2 - 2.0 * p * d2 - omega + 3.0 * p * p;
        let off = (1.0 - p * p) * inv2;
        if i > 0 {
            sub[i - 1] = off;
        }
        if i < m - 1 {
            sup[i] = off;
        }
    }
    Tridiagonal { sub, diag, sup }
}

// Band LU with partial pivoting (one fill-in superdiagonal).
fn solve_tridiagonal(tri: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = tri.diag.len();
    let mut b = tri.diag.clone();
    let mut c = {
        let mut c = tri.sup.clone();
        c.push(0.0);
        c
    };
    let mut d = vec![0.0; n]; // fill-in at column k+2
    let mut r = rhs.to_vec();

    for k in 0..n - 1 {
        let mut a_next = tri.sub[k];
        if a_next.abs() > b[k].abs() {
            // swap rows k and k+1
            std::mem::swap(&mut b[k], &mut a_next);
            let (tc, tb) = (c[k], b[k + 1]);
            c[k] = tb;
            b[k + 1] = tc;
            let tn = if k + 1 < n - 1 { c[k + 1] } else { 0.0 };
            d[k] = tn;
            if k + 1 < n - 1 {
                c[k + 1] = 0.0;
            }
            r.swap(k, k + 1);
        }
        if b[k] == 0.0 {
            return Err(Error::SingularSolve("zero pivot in tridiagonal LU".into()));
        }
        let m = a_next / b[k];
        b[k + 1] -= m * c[k];
        if k + 1 < n - 1 {
            c[k + 1] -= m * d[k];
        }
        r[k + 1] -= m * r[k];
    }
    if b[n - 1] == 0.0 {
        return Err(Error::SingularSolve("zero pivot in tridiagonal LU".into()));
    }

    let mut x = vec![0.0; n];
    x[n - 1] = r[n - 1] / b[n - 1];
    if n >= 2 {
        x[n - 2] = (r[n - 2] - c[n - 2] * x[n - 1]) / b[n - 2];
    }
    for k in (0..n.saturating_sub(2)).rev() {
        x[k] = (r[k] - c[k] * x[k + 1] - d[k] * x[k + 2]) / b[k];
    }
    Ok(x)
}

fn trapezoid_mass(phis: &[f64], dx: f64) -> f64 {
    let f: Vec<f64> = phis.iter().map(|&p| -(-(p * p)).ln_1p()).collect();
    let mut sum = 0.0;
    for i in 0..f.len() - 1 {
        sum += 0.5 * (f[i] + f[i + 1]);
    }
    sum * dx
}

/// sech-bump initial guess min{0.9, sqrt(2 omega)} sech(sqrt(omega) x).
pub fn initial_guess(omega: f64, grid: &FdGrid) -> Vec<f64> {
    let amp = 0.9f64.min((2.0 * omega).sqrt());
    let k = omega.sqrt();
    let mut phis: Vec<f64> = grid.xs.iter().map(|&x| amp / (k * x).cosh()).collect();
    phis[0] = 0.0;
    let n = grid.n;
    phis[n - 1] = 0.0;
    phis
}

const LINE_SEARCH_FLOOR: f64 = 9.313225746154785e-10; // 2^-30
const MAX_NEWTON_ITER: usize = 200;

fn newton_run(
    omega: f64,
    grid: &FdGrid,
    start: Vec<f64>,
    c_armijo: f64,
    eps_tol: f64,
) -> (FdSolveResult, Option<Error>) {
    let n = grid.n;
    let mut phis = start;
    let mut res = fd_residual(&phis, omega, grid);
    let mut obj = 0.5 * res.iter().map(|r| r * r).sum::<f64>();
    let rms = |o: f64| (2.0 * o / (n - 2) as f64).sqrt();

    let mut iterations = 0;
    let mut failure: Option<Error> = None;
    while rms(obj) > eps_tol {
        if iterations >= MAX_NEWTON_ITER {
            failure = Some(Error::MaxIterations(MAX_NEWTON_ITER));
            break;
        }
        let jac = fd_jacobian(&phis, omega, grid);
        let neg_res: Vec<f64> = res.iter().map(|r| -r).collect();
        let step = match solve_tridiagonal(&jac, &neg_res) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        // backtracking from a = 1 under the decrease condition
        // Phi(phi + a psi) <= Phi(phi) (1 - c a)
        let mut a = 1.0;
        let mut accepted = false;
        while a >= LINE_SEARCH_FLOOR {
            let mut trial = phis.clone();
            for (i, s) in step.iter().enumerate() {
                trial[i + 1] += a * s;
            }
            let trial_res = fd_residual(&trial, omega, grid);
            let trial_obj = 0.5 * trial_res.iter().map(|r| r * r).sum::<f64>();
            if trial_obj <= obj * (1.0 - c_armijo * a) {
                phis = trial;
                res = trial_res;
                obj = trial_obj;
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if !accepted {
            failure = Some(Error::LineSearchStall);
            break;
        }
        iterations += 1;
    }

    let converged = failure.is_none();
    let result = FdSolveResult {
        omega,
        q_trapezoid: trapezoid_mass(&phis, grid.dx),
        final_residual_rms: rms(obj),
        iterations,
        converged,
        phis,
    };
    (result, failure)
}

/// Damped Newton iteration for the soliton profile at one frequency from the
/// sech initial guess, with Armijo backtracking (c = 1e-4 by default) and
/// termination at ||T||/sqrt(N-2) <= eps_tol.
pub fn solve_soliton(
    omega: f64,
    grid: &FdGrid,
    c_armijo: f64,
    eps_tol: f64,
) -> Result<FdSolveResult> {
    if !(0.0 < omega && omega < 1.0) {
        return Err(Error::Domain(format!(
            "soliton solve needs omega in (0,1) (got {omega})"
        )));
    }
    let (result, failure) = newton_run(omega, grid, initial_guess(omega, grid), c_armijo, eps_tol);
    match failure {
        None => Ok(result),
        Some(e) => Err(e),
    }
}

/// Same as [`solve_soliton`] but starting from a supplied profile.
pub fn solve_soliton_from(
    omega: f64,
    grid: &FdGrid,
    start: &[f64],
    c_armijo: f64,
    eps_tol: f64,
) -> Result<FdSolveResult> {
    if start.len() != grid.n {
        return Err(Error::Domain(format!(
            "start profile length {} does not match grid {}",
            start.len(),
            grid.n
        )));
    }
    let (result, failure) = newton_run(omega, grid, start.to_vec(), c_armijo, eps_tol);
    match failure {
        None => Ok(result),
        Some(e) => Err(e),
    }
}

/// One point of a mass-curve scan.
#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub omega: f64,
    pub q: f64,
    pub iterations: usize,
    pub converged: bool,
    /// true when the cold sech start failed and the point was recovered by
    /// warm-starting from the nearest converged neighbor
    pub rescued: bool,
}

/// Mass curve at one grid spacing, with the quadratic extrapolation beyond
/// the last scanned frequency.
#[derive(Debug, Clone)]
pub struct ScanCurve {
    pub dx: f64,
    pub points: Vec<ScanPoint>,
    /// (omega, Q) on [omega_last, 1] from the quadratic through the last
    /// three converged points.
    pub extrapolated: Vec<(f64, f64)>,
}

/// 100 uniformly spaced frequencies on [0.005, 0.93].
pub fn default_omega_grid() -> Vec<f64> {
    (0..100)
        .map(|i| 0.005 + (0.93 - 0.005) * i as f64 / 99.0)
        .collect()
}

/// Runs the Newton solve across the omega grid for each spacing. Every point
/// is attempted cold from the sech guess first (per-point parallel); stalled
/// points are then rescued sequentially by warm starts from the nearest
/// converged neighbor to the left.
pub fn artefact_scan(
    dx_list: &[f64],
    omega_grid: &[f64],
    half_width: f64,
    c_armijo: f64,
    eps_tol: f64,
) -> Result<Vec<ScanCurve>> {
    if dx_list.is_empty() {
        return Err(Error::Domain("empty dx list".into()));
    }
    dx_list
        .iter()
        .map(|&dx| {
            let grid = FdGrid::new(half_width, dx)?;
            let cold: Vec<Option<FdSolveResult>> = omega_grid
                .par_iter()
                .map(|&w| {
                    let (result, failure) =
                        newton_run(w, &grid, initial_guess(w, &grid), c_armijo, eps_tol);
                    failure.is_none().then_some(result)
                })
                .collect();

            let mut points = Vec::with_capacity(omega_grid.len());
            let mut last_converged: Option<Vec<f64>> = None;
            for (i, &w) in omega_grid.iter().enumerate() {
                let (entry, rescued) = match &cold[i] {
                    Some(r) => (Some(r.clone()), false),
                    None => match &last_converged {
                        Some(prev) => {
                            let (r, failure) =
                                newton_run(w, &grid, prev.clone(), c_armijo, eps_tol);
                            (failure.is_none().then_some(r), true)
                        }
                        None => (None, false),
                    },
                };
                match entry {
                    Some(r) => {
                        last_converged = Some(r.phis.clone());
                        points.push(ScanPoint {
                            omega: w,
                            q: r.q_trapezoid,
                            iterations: r.iterations,
                            converged: true,
                            rescued,
                        });
                    }
                    None => points.push(ScanPoint {
                        omega: w,
                        q: f64::NAN,
                        iterations: 0,
                        converged: false,
                        rescued: false,
                    }),
                }
            }

            let extrapolated = quadratic_extrapolation(&points);
            Ok(ScanCurve {
                dx,
                points,
                extrapolated,
            })
        })
        .collect()
}

// quadratic through the last three converged points, evaluated on eight
// points spanning [omega_last, 1]
fn quadratic_extrapolation(points: &[ScanPoint]) -> Vec<(f64, f64)> {
    let conv: Vec<&ScanPoint> = points.iter().filter(|p| p.converged).collect();
    if conv.len() < 3 {
        return Vec::new();
    }
    let tail = &conv[conv.len() - 3..];
    let (x0, x1, x2) = (tail[0].omega, tail[1].omega, tail[2].omega);
    let (y0, y1, y2) = (tail[0].q, tail[1].q, tail[2].q);
    let lagrange = |x: f64| {
        y0 * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1))
    };
    (0..8)
        .map(|i| {
            let x = x2 + (1.0 - x2) * (i + 1) as f64 / 8.0;
            (x, lagrange(x))
        })
        .collect()
}

/// Converged-quadrature reference for the scan: the even-branch periodic
/// family at L = 40 as the soliton proxy. Frequencies at or below
/// omega_L(40) have no periodic wave and yield None.
pub fn quadrature_reference(
    omega_grid: &[f64],
    l: f64,
    tol: &Tolerances,
) -> Result<Vec<(f64, Option<f64>)>> {
    let (omega_l, _) = limiting_frequencies(l)?;
    let values: Vec<(f64, Option<f64>)> = omega_grid
        .par_iter()
        .map(|&w| {
            if w <= omega_l * (1.0 + 1e-6) {
                return (w, None);
            }
            let q = solve_energy_for_period(Branch::EvenInterior, Frequency(w), l, tol)
                .and_then(|pt| mass_quadrature(&pt, tol))
                .ok();
            (w, q)
        })
        .collect();
    Ok(values)
}
