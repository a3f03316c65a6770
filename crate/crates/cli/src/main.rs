//! Command-line front end: every pipeline as a subcommand with CSV/JSON
//! emission for figure reproduction.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use idd_waves::family::{continue_family, solve_energy_for_period, OMEGA_CAP, OMEGA_WARN};
use idd_waves::fdsoliton::{artefact_scan, quadrature_reference, FdGrid};
use idd_waves::model::{limiting_frequencies, Branch, Frequency, PotentialModel};
use idd_waves::numerics::Tolerances;
use idd_waves::observables::{mass_curve_and_verdicts, mass_peaked, mass_quadrature};
use idd_waves::period::{period_derivative, period_even, period_odd};
use idd_waves::profile::{peaked_profile, reconstruct_profile};
use idd_waves::spectrum::spectrum_report;

#[derive(Parser)]
#[command(
    name = "idd-waves",
    version,
    about = "Standing periodic waves of the NLS equation with intensity-dependent dispersion: \
             period functions, wave families, mass curves, Morse indices, stability verdicts"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Even,
    Odd,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Branch {
        match b {
            BranchArg::Even => Branch::EvenInterior,
            BranchArg::Odd => Branch::OddExterior,
        }
    }
}

#[derive(Args, Clone)]
struct TolArgs {
    /// Absolute quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol_abs: f64,
    /// Relative quadrature tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol_rel: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            abs_tol: self.tol_abs,
            rel_tol: self.tol_rel,
            max_depth: 60,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Period function T(E, omega) over the reference energy grids
    Period {
        #[arg(long, value_enum)]
        branch: BranchArg,
        /// Frequencies (repeatable or comma separated)
        #[arg(long, value_delimiter = ',', required = true)]
        omega: Vec<f64>,
        /// Skip the dT/dE column (faster)
        #[arg(long)]
        no_derivative: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Energy levels E_L(omega) at fixed period
    Family {
        #[arg(long, value_enum)]
        branch: BranchArg,
        /// Spatial period; accepts plain numbers or pi multiples like 2pi
        #[arg(long, value_parser = parse_period)]
        l: f64,
        /// Number of omega grid points
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Wave profile phi(x) on one period, with the peaked overlay column
    Profile {
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long)]
        omega: f64,
        #[arg(long, value_parser = parse_period)]
        l: f64,
        #[arg(long, default_value_t = 513)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Mass curve Q(omega) with dQ/domega and stability verdicts
    Mass {
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long, value_parser = parse_period)]
        l: f64,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Morse/nullity indices, theta, and the Y-restricted counts as JSON
    Spectrum {
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long)]
        omega: f64,
        #[arg(long, value_parser = parse_period)]
        l: f64,
        /// Grid size of the discretized operators
        #[arg(long = "N", default_value_t = 512)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Finite-difference soliton mass scan and its quadrature reference
    FdSoliton {
        /// Grid spacings (repeatable or comma separated)
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.1])]
        dx: Vec<f64>,
        #[arg(long, default_value_t = FdGrid::DEFAULT_HALF_WIDTH)]
        half_width: f64,
        #[arg(long, default_value_t = 0.005)]
        omega_min: f64,
        #[arg(long, default_value_t = 0.93)]
        omega_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Output directory for the per-dx and reference CSV files
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Peaked-mass table reproduction and the stability transition report
    Report {
        /// Print only the peaked-mass table
        #[arg(long)]
        table1: bool,
        #[arg(long, value_parser = parse_period, default_value = "2pi")]
        l: f64,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[command(flatten)]
        tol: TolArgs,
    },
}

fn parse_period(s: &str) -> Result<f64, String> {
    let t = s.trim().to_lowercase();
    let value = if let Some(mult) = t.strip_suffix("pi") {
        let m = if mult.is_empty() {
            1.0
        } else {
            mult.parse::<f64>().map_err(|e| e.to_string())?
        };
        m * std::f64::consts::PI
    } else {
        t.parse::<f64>().map_err(|e| e.to_string())?
    };
    if !(value > 0.0) {
        return Err(format!("period must be positive (got {value})"));
    }
    Ok(value)
}

struct CsvWriter {
    out: Box<dyn Write>,
}

impl CsvWriter {
    fn open(path: &Option<PathBuf>) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).with_context(|| format!("creating {p:?}"))?),
            None => Box::new(io::stdout()),
        };
        Ok(Self { out })
    }

    fn comment(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "# {text}")?;
        Ok(())
    }

    fn metadata(&mut self, tol: &Tolerances) -> Result<()> {
        self.comment(&format!(
            "idd-waves {} tol_abs={:e} tol_rel={:e}",
            env!("CARGO_PKG_VERSION"),
            tol.abs_tol,
            tol.rel_tol
        ))
    }

    fn header(&mut self, cols: &[&str]) -> Result<()> {
        writeln!(self.out, "{}", cols.join(","))?;
        Ok(())
    }

    fn row(&mut self, values: &[CsvValue]) -> Result<()> {
        let mut first = true;
        for v in values {
            if !first {
                write!(self.out, ",")?;
            }
            first = false;
            match v {
                CsvValue::Num(x) => write!(self.out, "{x:.16e}")?,
                CsvValue::Int(i) => write!(self.out, "{i}")?,
                CsvValue::Str(s) => write!(self.out, "{s}")?,
            }
        }
        writeln!(self.out)?;
        Ok(())
    }
}

enum CsvValue {
    Num(f64),
    Int(i64),
    Str(String),
}

fn num(x: f64) -> CsvValue {
    CsvValue::Num(x)
}

fn main() {
    if let Ok(threads) = std::env::var("IDD_WAVES_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_converged) => {
            if !all_converged {
                std::process::exit(1);
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Period {
            branch,
            omega,
            no_derivative,
            out,
            tol,
        } => cmd_period(branch.into(), &omega, !no_derivative, &out, &tol.tolerances()),
        Cmd::Family {
            branch,
            l,
            grid,
            omega_min,
            omega_max,
            out,
            tol,
        } => cmd_family(branch.into(), l, grid, omega_min, omega_max, &out, &tol.tolerances()),
        Cmd::Profile {
            branch,
            omega,
            l,
            samples,
            out,
            tol,
        } => cmd_profile(branch.into(), omega, l, samples, &out, &tol.tolerances()),
        Cmd::Mass {
            branch,
            l,
            grid,
            omega_min,
            omega_max,
            out,
            tol,
        } => cmd_mass(branch.into(), l, grid, omega_min, omega_max, &out, &tol.tolerances()),
        Cmd::Spectrum {
            branch,
            omega,
            l,
            n,
            out,
            tol,
        } => cmd_spectrum(branch.into(), omega, l, n, &out, &tol.tolerances()),
        Cmd::FdSoliton {
            dx,
            half_width,
            omega_min,
            omega_max,
            points,
            out_dir,
            tol,
        } => cmd_fd_soliton(&dx, half_width, omega_min, omega_max, points, &out_dir, &tol.tolerances()),
        Cmd::Report {
            table1,
            l,
            grid,
            tol,
        } => cmd_report(table1, l, grid, &tol.tolerances()),
    }
}

// Reference energy grids: dense refinement toward the homoclinic level where
// the period diverges, coarser elsewhere.
fn energy_grid(branch: Branch, w: f64) -> Vec<f64> {
    let e_hom = PotentialModel::new(w).homoclinic_energy().expect("omega < 1");
    let mut grid = Vec::new();
    match branch {
        Branch::EvenInterior => {
            let split = e_hom - 1e-3;
            if split > 0.0 {
                for j in 1..=300 {
                    grid.push(split * j as f64 / 300.0);
                }
            }
            let lo = split.max(0.0);
            for j in 0..2000 {
                grid.push(lo + (e_hom - lo) * (j as f64 + 0.5) / 2000.5);
            }
        }
        Branch::OddExterior => {
            for j in 0..100 {
                grid.push(e_hom + 1e-2 * (j as f64 + 0.5) / 100.0);
            }
            let lo = e_hom + 1e-2;
            let hi = 0.5f64.max(lo + 1e-2);
            for j in 1..=300 {
                grid.push(lo + (hi - lo) * j as f64 / 300.0);
            }
        }
    }
    grid
}

fn cmd_period(
    branch: Branch,
    omegas: &[f64],
    with_derivative: bool,
    out: &Option<PathBuf>,
    tol: &Tolerances,
) -> Result<bool> {
    if omegas.is_empty() {
        bail!("at least one --omega is required");
    }
    for &w in omegas {
        if !(w < 1.0) {
            bail!("omega must be < 1 (got {w})");
        }
        if branch.is_even() && !(w > 0.0) {
            bail!("even branch needs omega in (0,1) (got {w})");
        }
    }
    let mut writer = CsvWriter::open(out)?;
    writer.metadata(tol)?;
    writer.comment(&format!("period function, branch {branch}"))?;
    writer.header(&["omega", "E", "T", "dT_dE"])?;

    let mut all_ok = true;
    for &w in omegas {
        let grid = energy_grid(branch, w);
        let rows: Vec<(f64, Option<f64>, Option<f64>)> = grid
            .par_iter()
            .map(|&e| {
                let t = match branch {
                    Branch::EvenInterior => period_even(Frequency(w), e, tol),
                    Branch::OddExterior => period_odd(Frequency(w), e, tol),
                }
                .map(|s| s.t)
                .ok();
                let d = if with_derivative && t.is_some() {
                    period_derivative(branch, Frequency(w), e, tol).ok()
                } else {
                    None
                };
                (e, t, d)
            })
            .collect();
        for (e, t, d) in rows {
            match t {
                Some(t) => writer.row(&[
                    num(w),
                    num(e),
                    num(t),
                    num(d.unwrap_or(f64::NAN)),
                ])?,
                None => {
                    all_ok = false;
                }
            }
        }
    }
    Ok(all_ok)
}

fn omega_grid_for(
    branch: Branch,
    l: f64,
    n: usize,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
) -> Result<Vec<f64>> {
    let (wl, ol) = limiting_frequencies(l)?;
    let lo_limit = if branch.is_even() { wl } else { ol };
    let lo = omega_min.unwrap_or(lo_limit + 0.02 * (1.0 - lo_limit));
    let hi = omega_max.unwrap_or(OMEGA_CAP);
    if !(lo > lo_limit && hi < 1.0 && lo < hi) {
        bail!("omega range [{lo}, {hi}] not admissible for branch {branch} at L = {l} (limit {lo_limit})");
    }
    if hi > OMEGA_CAP + 1e-12 {
        bail!("omega_max {hi} beyond the continuation cap {OMEGA_CAP}");
    }
    if hi > OMEGA_WARN {
        eprintln!(
            "warning: continuation beyond omega = {OMEGA_WARN} loses accuracy as the wave peak approaches 1"
        );
    }
    if n < 2 {
        bail!("grid needs at least 2 points");
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn cmd_family(
    branch: Branch,
    l: f64,
    grid: usize,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    out: &Option<PathBuf>,
    tol: &Tolerances,
) -> Result<bool> {
    let omegas = omega_grid_for(branch, l, grid, omega_min, omega_max)?;
    let curve = continue_family(branch, l, &omegas, tol)?;
    let mut writer = CsvWriter::open(out)?;
    writer.metadata(tol)?;
    writer.comment(&format!("family curve, branch {branch}, L = {l:.16e}"))?;
    writer.comment(&format!(
        "peaked limit: tilde_E(omega -> 1) = {:.16e}",
        idd_waves::family::peaked_energy(branch, l)?
    ))?;
    writer.header(&["omega", "E_L", "tilde_E", "m", "M"])?;
    for pt in &curve.points {
        writer.row(&[
            num(pt.omega()),
            num(pt.energy()),
            num(pt.tilde_e),
            num(pt.orbit.m().unwrap_or(f64::NAN)),
            num(pt.orbit.m_outer()),
        ])?;
    }
    for (w, reason) in &curve.failures {
        writer.comment(&format!("failed at omega = {w}: {reason}"))?;
    }
    Ok(curve.failures.is_empty())
}

fn cmd_profile(
    branch: Branch,
    omega: f64,
    l: f64,
    samples: usize,
    out: &Option<PathBuf>,
    tol: &Tolerances,
) -> Result<bool> {
    let mut writer = CsvWriter::open(out)?;
    writer.metadata(tol)?;
    writer.comment(&format!(
        "profile, branch {branch}, omega = {omega:.16e}, L = {l:.16e}"
    ))?;
    writer.header(&["x", "phi", "phi_peaked"])?;
    if omega == 1.0 {
        // peaked closed form
        for i in 0..samples {
            let x = -0.5 * l + l * i as f64 / (samples - 1) as f64;
            let p = peaked_profile(branch, l, x)?;
            writer.row(&[num(x), num(p), num(p)])?;
        }
        return Ok(true);
    }
    let pt = solve_energy_for_period(branch, Frequency(omega), l, tol)?;
    let prof = reconstruct_profile(&pt, samples, tol)?;
    for (x, phi) in prof.xs.iter().zip(&prof.phis) {
        writer.row(&[num(*x), num(*phi), num(peaked_profile(branch, l, *x)?)])?;
    }
    Ok(true)
}

fn cmd_mass(
    branch: Branch,
    l: f64,
    grid: usize,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    out: &Option<PathBuf>,
    tol: &Tolerances,
) -> Result<bool> {
    let omegas = omega_grid_for(branch, l, grid, omega_min, omega_max)?;
    let mut curve = continue_family(branch, l, &omegas, tol)?;
    let report = mass_curve_and_verdicts(&mut curve, tol)?;
    let mut writer = CsvWriter::open(out)?;
    writer.metadata(tol)?;
    writer.comment(&format!("mass curve, branch {branch}, L = {l:.16e}"))?;
    writer.comment(&format!(
        "peaked mass Q(omega = 1) = {:.16e}",
        mass_peaked(branch, l)?
    ))?;
    match report.omega_star {
        Some(star) => writer.comment(&format!("stability transition omega_* = {star:.16e}"))?,
        None => writer.comment("no stability transition detected on this grid")?,
    }
    writer.header(&["omega", "E_L", "tilde_E", "m", "M", "Q", "dQ_domega", "verdict"])?;
    for (pt, v) in curve.points.iter().zip(&report.verdicts) {
        writer.row(&[
            num(pt.omega()),
            num(pt.energy()),
            num(pt.tilde_e),
            num(pt.orbit.m().unwrap_or(f64::NAN)),
            num(pt.orbit.m_outer()),
            num(v.q),
            num(v.dq_domega),
            CsvValue::Str(v.verdict.to_string()),
        ])?;
    }
    for (w, reason) in &curve.failures {
        writer.comment(&format!("failed at omega = {w}: {reason}"))?;
    }
    Ok(curve.failures.is_empty())
}

fn cmd_spectrum(
    branch: Branch,
    omega: f64,
    l: f64,
    n: usize,
    out: &Option<PathBuf>,
    tol: &Tolerances,
) -> Result<bool> {
    let pt = solve_energy_for_period(branch, Frequency(omega), l, tol)?;
    let prof = reconstruct_profile(&pt, (n + 1).max(513), tol)?;
    let report = spectrum_report(&pt, &prof, n, tol)?;
    let json = serde_json::to_string_pretty(&report)?;
    match out {
        Some(p) => std::fs::write(p, json + "\n").with_context(|| format!("writing {p:?}"))?,
        None => println!("{json}"),
    }
    Ok(true)
}

fn cmd_fd_soliton(
    dx_list: &[f64],
    half_width: f64,
    omega_min: f64,
    omega_max: f64,
    points: usize,
    out_dir: &PathBuf,
    tol: &Tolerances,
) -> Result<bool> {
    if dx_list.is_empty() {
        bail!("at least one --dx is required");
    }
    if !(0.0 < omega_min && omega_min < omega_max && omega_max < 1.0) {
        bail!("invalid omega range [{omega_min}, {omega_max}]");
    }
    std::fs::create_dir_all(out_dir)?;
    let omega_grid: Vec<f64> = (0..points)
        .map(|i| omega_min + (omega_max - omega_min) * i as f64 / (points - 1).max(1) as f64)
        .collect();

    let curves = artefact_scan(dx_list, &omega_grid, half_width, 1e-4, 1e-8)?;
    let mut all_ok = true;
    for curve in &curves {
        let path = out_dir.join(format!("fd_mass_dx{}.csv", curve.dx));
        let mut writer = CsvWriter::open(&Some(path))?;
        writer.metadata(tol)?;
        writer.comment(&format!(
            "finite-difference soliton masses, dx = {}, half width = {half_width}",
            curve.dx
        ))?;
        writer.header(&["omega", "dx", "Q", "iterations", "converged", "rescued"])?;
        for p in &curve.points {
            all_ok &= p.converged;
            writer.row(&[
                num(p.omega),
                num(curve.dx),
                num(p.q),
                CsvValue::Int(p.iterations as i64),
                CsvValue::Int(p.converged as i64),
                CsvValue::Int(p.rescued as i64),
            ])?;
        }
        writer.comment("quadratic extrapolation beyond the last scanned omega")?;
        for (w, q) in &curve.extrapolated {
            writer.row(&[
                num(*w),
                num(curve.dx),
                num(*q),
                CsvValue::Int(0),
                CsvValue::Int(0),
                CsvValue::Int(0),
            ])?;
        }
    }

    let reference = quadrature_reference(&omega_grid, 40.0, tol)?;
    let path = out_dir.join("fd_mass_reference.csv");
    let mut writer = CsvWriter::open(&Some(path))?;
    writer.metadata(tol)?;
    writer.comment("quadrature reference: even-branch periodic family at L = 40")?;
    writer.header(&["omega", "Q"])?;
    for (w, q) in &reference {
        match q {
            Some(q) => writer.row(&[num(*w), num(*q)])?,
            None => writer.comment(&format!(
                "omega = {w:.6} below omega_L(40): no periodic wave"
            ))?,
        }
    }
    Ok(all_ok)
}

fn cmd_report(table1_only: bool, l: f64, grid: usize, tol: &Tolerances) -> Result<bool> {
    println!("peaked-wave masses Q(phi) at omega = 1:");
    println!("{:>6} | {:>18} | {:>18}", "L", "Q (even)", "Q (odd)");
    println!("{:->6}-+-{:->18}-+-{:->18}", "", "", "");
    for mult in [2.0, 3.0, 4.0] {
        let lv = mult * std::f64::consts::PI;
        println!(
            "{:>5.0}pi | {:>18.14} | {:>18.14}",
            mult,
            mass_peaked(Branch::EvenInterior, lv)?,
            mass_peaked(Branch::OddExterior, lv)?
        );
    }
    if table1_only {
        return Ok(true);
    }

    println!();
    println!("stability transitions at L = {l:.6}:");
    let mut all_ok = true;
    for branch in [Branch::EvenInterior, Branch::OddExterior] {
        let omegas = omega_grid_for(branch, l, grid, None, None)?;
        let mut curve = continue_family(branch, l, &omegas, tol)?;
        all_ok &= curve.failures.is_empty();
        let report = mass_curve_and_verdicts(&mut curve, tol)?;
        match report.omega_star {
            Some(star) => println!("  {branch}: stable -> unstable at omega_* = {star:.6}"),
            None => println!("  {branch}: no transition found on the {grid}-point grid"),
        }
    }
    Ok(all_ok)
}
