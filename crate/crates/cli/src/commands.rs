use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use excited_vdw::dissimilar::{
    energy_a_dissimilar, energy_b_dissimilar, force_a_dissimilar, force_b_dissimilar, momentum_rate_dissimilar,
    net_force_dissimilar, DissimilarEmission, BLOCK_NAMES,
};
use excited_vdw::figure::{figure_net_force_curve, FigureSpec};
use excited_vdw::identical::{
    force_a_identical, force_b_identical, momentum_rate_identical, net_force_identical, IdenticalConfig,
    IdenticalEmission, IDENTICAL_BLOCK_NAMES,
};
use excited_vdw::options::EvalOptions;
use excited_vdw::orientation::{average_over_orientations, icosahedral_axes};
use excited_vdw::params::{check_validity, AtomPairConfig, Regime};
use excited_vdw::verification::{all_mandatory_passed, run_all, summary_table, GridSize, VerifySettings};
use nalgebra::{Vector3, Vector6};
use rayon::prelude::*;

use crate::config::{dipole_model, parse_range2, ConfigFile, DipoleChoice, Mode, PhysArgs, Resolved};
use crate::table::{vec_columns, Cell, Table};
use crate::CliError;

/// What a command hands back to `main`: data to print and an exit code.
pub struct Outcome {
    pub table: Table,
    /// Replaces the table in JSON output when set.
    pub json: Option<serde_json::Value>,
    pub exit_code: i32,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Outcome {
            table,
            json: None,
            exit_code: 0,
        }
    }
}

fn eval<T, F>(r: &Resolved, f: F) -> Result<T, CliError>
where
    T: Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(&AtomPairConfig) -> excited_vdw::Result<T>,
{
    if r.average {
        Ok(average_over_orientations(1.0, |u| f(&r.along(&u)))?)
    } else {
        Ok(f(&r.pair)?)
    }
}

const VALIDITY_COLUMNS: [&str; 5] = [
    "causal",
    "weak_interaction_ok",
    "weak_interaction_margin",
    "perturbative_ok",
    "perturbative_margin",
];

fn validity_cells(r: &Resolved) -> Result<Vec<Cell>, CliError> {
    let probe = if r.average { r.along(&Vector3::new(1.0, 1.0, 1.0)) } else { r.pair };
    let regime = match r.mode {
        Mode::Dissimilar => Regime::Dissimilar,
        Mode::Identical => Regime::IdenticalLimit,
    };
    let v = check_validity(&probe, r.t, regime)?;
    Ok(vec![
        v.causal.into(),
        v.weak_interaction.satisfied.into(),
        v.weak_interaction.margin.into(),
        v.perturbative.satisfied.into(),
        v.perturbative.margin.into(),
    ])
}

fn header(lead: &[&str], vectors: &[&str], scalars: &[&str]) -> Vec<String> {
    let mut cols: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    for v in vectors {
        cols.extend(vec_columns(v));
    }
    cols.extend(scalars.iter().map(|s| s.to_string()));
    cols.extend(VALIDITY_COLUMNS.iter().map(|s| s.to_string()));
    cols
}

fn vec_cells(v: &Vector3<f64>) -> [Cell; 3] {
    [v.x.into(), v.y.into(), v.z.into()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Which {
    A,
    B,
    Net,
}

/// Block names, block values and total of one force.
fn force_blocks(r: &Resolved, which: Which, opts: &EvalOptions) -> Result<(Vec<&'static str>, Vec<Vector3<f64>>, Vector3<f64>), CliError> {
    let t = r.t;
    match r.mode {
        Mode::Dissimilar => {
            let f = eval(r, |p| match which {
                Which::A => force_a_dissimilar(p, t, opts),
                Which::B => force_b_dissimilar(p, t, opts),
                Which::Net => net_force_dissimilar(p, t, opts),
            })?;
            Ok((BLOCK_NAMES.to_vec(), f.blocks().to_vec(), f.total))
        }
        Mode::Identical => {
            let f = eval(r, |p| {
                let c = IdenticalConfig::from_pair(p);
                match which {
                    Which::A => force_a_identical(&c, t, opts),
                    Which::B => force_b_identical(&c, t, opts),
                    Which::Net => net_force_identical(&c, t, opts),
                }
            })?;
            Ok((IDENTICAL_BLOCK_NAMES.to_vec(), f.blocks().to_vec(), f.total))
        }
    }
}

fn force_table(r: &Resolved, opts: &EvalOptions, which: &[(Which, &str)]) -> Result<Table, CliError> {
    let mut table: Option<Table> = None;
    for &(w, label) in which {
        let (names, blocks, total) = force_blocks(r, w, opts)?;
        let t = table.get_or_insert_with(|| {
            let mut vecs = names.clone();
            vecs.push("total");
            Table::new(header(&["record", "k0r", "T"], &vecs, &[]))
        });
        let mut row: Vec<Cell> = vec![label.into(), r.k0r().into(), r.t.t.into()];
        for b in blocks.iter().chain(std::iter::once(&total)) {
            row.extend(vec_cells(b));
        }
        row.extend(validity_cells(r)?);
        t.push(row);
    }
    Ok(table.expect("at least one record"))
}

pub fn cmd_force(r: &Resolved, opts: &EvalOptions) -> Result<Outcome, CliError> {
    Ok(force_table(r, opts, &[(Which::A, "atom_a"), (Which::B, "atom_b")])?.into())
}

pub fn cmd_net(r: &Resolved, opts: &EvalOptions) -> Result<Outcome, CliError> {
    Ok(force_table(r, opts, &[(Which::Net, "net")])?.into())
}

fn require_dissimilar(r: &Resolved, what: &str) -> Result<(), CliError> {
    if r.mode == Mode::Identical {
        return Err(CliError::Invalid(format!("{what} is only available in dissimilar mode")));
    }
    Ok(())
}

pub fn cmd_energy(r: &Resolved, opts: &EvalOptions) -> Result<Outcome, CliError> {
    require_dissimilar(r, "the interaction energy")?;
    let mut scalars = BLOCK_NAMES.to_vec();
    scalars.push("total");
    let mut table = Table::new(header(&["record", "k0r", "T"], &[], &scalars));
    for (label, b) in [("atom_a", false), ("atom_b", true)] {
        let e = eval(r, |p| if b { energy_b_dissimilar(p, r.t, opts) } else { energy_a_dissimilar(p, r.t, opts) })?;
        let mut row: Vec<Cell> = vec![label.into(), r.k0r().into(), r.t.t.into()];
        row.extend(e.blocks().iter().chain(std::iter::once(&e.total)).map(|&x| Cell::Num(x)));
        row.extend(validity_cells(r)?);
        table.push(row);
    }
    Ok(table.into())
}

#[derive(Debug, Clone, Args)]
pub struct EmissionArgs {
    /// Polar nodes (midpoints in θ measured from R̂)
    #[arg(long, default_value_t = 16)]
    pub theta_grid: usize,
    /// Azimuthal nodes
    #[arg(long, default_value_t = 8)]
    pub phi_grid: usize,
    /// Emit the photon momentum rate and the net force instead of the table
    #[arg(long)]
    pub moment: bool,
}

type Rate = Box<dyn Fn(&Vector3<f64>) -> excited_vdw::Result<f64> + Sync>;

fn emitters(r: &Resolved, opts: &EvalOptions) -> Result<Vec<Rate>, CliError> {
    let pairs: Vec<AtomPairConfig> = if r.average {
        icosahedral_axes().iter().map(|u| r.along(u)).collect()
    } else {
        vec![r.pair]
    };
    pairs
        .into_iter()
        .map(|p| -> Result<Rate, CliError> {
            Ok(match r.mode {
                Mode::Dissimilar => {
                    let em = DissimilarEmission::new(&p, r.t, opts)?;
                    Box::new(move |k| em.rate(k))
                }
                Mode::Identical => {
                    let em = IdenticalEmission::new(&IdenticalConfig::from_pair(&p), r.t, opts)?;
                    Box::new(move |k| em.rate(k))
                }
            })
        })
        .collect()
}

pub fn cmd_emission(r: &Resolved, opts: &EvalOptions, args: &EmissionArgs) -> Result<Outcome, CliError> {
    if args.moment {
        let pf = eval(r, |p| {
            let (mom, force) = match r.mode {
                Mode::Dissimilar => (momentum_rate_dissimilar(p, r.t, opts)?, net_force_dissimilar(p, r.t, opts)?.total),
                Mode::Identical => {
                    let c = IdenticalConfig::from_pair(p);
                    (momentum_rate_identical(&c, r.t, opts)?, net_force_identical(&c, r.t, opts)?.total)
                }
            };
            Ok((
                Vector6::new(mom.value.x, mom.value.y, mom.value.z, force.x, force.y, force.z),
                mom.error_estimate,
            ))
        }.map(|(v, e)| Pair(v, e)))?;
        let (p, f) = (pf.0.fixed_rows::<3>(0).into_owned(), pf.0.fixed_rows::<3>(3).into_owned());
        let mut table = Table::new(header(
            &["k0r", "T"],
            &["momentum_rate", "momentum_rate_error", "net_force"],
            &["conservation_residual"],
        ));
        let mut row: Vec<Cell> = vec![r.k0r().into(), r.t.t.into()];
        row.extend(vec_cells(&p));
        row.extend(vec_cells(&pf.1));
        row.extend(vec_cells(&f));
        let residual = if f.norm() == 0.0 { (p + f).norm() } else { (p + f).norm() / f.norm() };
        row.push(residual.into());
        row.extend(validity_cells(r)?);
        table.push(row);
        return Ok(table.into());
    }
    if args.theta_grid == 0 || args.phi_grid == 0 {
        return Err(CliError::Invalid("--theta-grid and --phi-grid must be positive".into()));
    }
    let axis = r.pair.axis();
    let e1 = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (e1 - axis * axis.dot(&e1)).normalize();
    let e2 = axis.cross(&e1);
    let rates = emitters(r, opts)?;
    let weight = 1.0 / rates.len() as f64;
    let validity = validity_cells(r)?;
    let mut table = Table::new(header(&["theta", "phi"], &["k"], &["rate"]));
    for i in 0..args.theta_grid {
        let theta = (i as f64 + 0.5) * PI / args.theta_grid as f64;
        for j in 0..args.phi_grid {
            let phi = 2.0 * PI * j as f64 / args.phi_grid as f64;
            let k = axis * theta.cos() + (e1 * phi.cos() + e2 * phi.sin()) * theta.sin();
            let mut rate = 0.0;
            for f in &rates {
                rate += weight * f(&k)?;
            }
            let mut row: Vec<Cell> = vec![theta.into(), phi.into()];
            row.extend(vec_cells(&k));
            row.push(rate.into());
            row.extend(validity.clone());
            table.push(row);
        }
    }
    Ok(table.into())
}

/// Sum-and-scale wrapper so a value and its error estimate average together.
struct Pair(Vector6<f64>, Vector3<f64>);

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, s: f64) -> Pair {
        Pair(self.0 * s, self.1 * s)
    }
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Γ₀T [default: 1]
    #[arg(long)]
    pub gamma_t: Option<f64>,
    /// Γ₀/ω₀ fixing the dipole magnitude [default: 1e-8]
    #[arg(long)]
    pub gamma_ratio: Option<f64>,
    /// Δ/ω₀ of the detuned curve [default: 1e-3]
    #[arg(long)]
    pub delta_ratio: Option<f64>,
    /// k₀R range "start:stop" [default: 0.5:8]
    #[arg(long = "kR-range", alias = "kr-range")]
    pub kr_range: Option<String>,
    /// Grid points [default: 512]
    #[arg(long)]
    pub points: Option<usize>,
    /// average (orientation average) or equal (fixed equal components)
    #[arg(long, value_enum)]
    pub dipoles: Option<DipoleChoice>,
}

pub fn cmd_figure(args: &FigureArgs, file: &ConfigFile, opts: &EvalOptions) -> Result<Outcome, CliError> {
    let d = FigureSpec::default();
    let (kr_min, kr_max) = match args.kr_range.as_ref().or(file.kr_range.as_ref()) {
        Some(s) => parse_range2(s)?,
        None => (d.kr_min, d.kr_max),
    };
    let spec = FigureSpec {
        gamma_t: args.gamma_t.or(file.gamma_t).unwrap_or(d.gamma_t),
        gamma_ratio: args.gamma_ratio.or(file.gamma_ratio).unwrap_or(d.gamma_ratio),
        delta_ratio: args.delta_ratio.or(file.delta_ratio).unwrap_or(d.delta_ratio),
        kr_min,
        kr_max,
        points: args.points.or(file.points).unwrap_or(d.points),
        dipoles: dipole_model(args.dipoles.or(file.dipoles))?,
    };
    let rows = figure_net_force_curve(&spec, opts)?;
    let mut table = Table::new(
        ["k0R", "net_identical_normalized", "net_dissimilar_normalized", "validity_flag"]
            .map(String::from)
            .to_vec(),
    );
    for r in rows {
        table.push(vec![
            r.k0r.into(),
            r.net_identical_normalized.into(),
            r.net_dissimilar_normalized.into(),
            r.validity_flag.into(),
        ]);
    }
    Ok(table.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridChoice {
    Default,
    Minimal,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Also write the JSON report here
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Treat checks broken by an as-printed option as informational
    #[arg(long)]
    pub allow_informational: bool,
    #[arg(long, value_enum, default_value = "default")]
    pub grid: GridChoice,
    /// Seed of the random gradient-check points
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn cmd_verify(args: &VerifyArgs, opts: &EvalOptions) -> Result<Outcome, CliError> {
    let mut settings = VerifySettings {
        opts: *opts,
        grid: match args.grid {
            GridChoice::Default => GridSize::Default,
            GridChoice::Minimal => GridSize::Minimal,
        },
        allow_informational: args.allow_informational,
        ..Default::default()
    };
    if let Some(seed) = args.seed {
        settings.seed = seed;
    }
    let reports = run_all(&settings)?;
    let json = serde_json::to_value(&reports).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&json).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    eprint!("{}", summary_table(&reports));
    let mut table = Table::new(
        ["name", "passed", "mandatory", "measured", "threshold", "context"]
            .map(String::from)
            .to_vec(),
    );
    for r in &reports {
        table.push(vec![
            r.name.as_str().into(),
            r.passed.into(),
            r.mandatory.into(),
            r.measured.into(),
            r.threshold.into(),
            r.context.as_str().into(),
        ]);
    }
    Ok(Outcome {
        table,
        json: Some(json),
        exit_code: if all_mandatory_passed(&reports) { 0 } else { 1 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVariable {
    #[value(name = "kR", alias = "kr")]
    Kr,
    #[value(name = "gammaT", alias = "gamma-t")]
    GammaT,
    #[value(name = "delta_ratio", alias = "delta-ratio")]
    DeltaRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepOutput {
    #[value(name = "force_a")]
    ForceA,
    #[value(name = "force_b")]
    ForceB,
    #[value(name = "net")]
    Net,
    #[value(name = "energy_a")]
    EnergyA,
    #[value(name = "energy_b")]
    EnergyB,
    #[value(name = "emission_moment")]
    EmissionMoment,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub variable: SweepVariable,
    /// "start:stop:count" or "start:stop:count:log"
    #[arg(long)]
    pub range: String,
    /// Comma-separated quantities
    #[arg(long, value_enum, value_delimiter = ',', default_value = "force_a,force_b,net")]
    pub outputs: Vec<SweepOutput>,
}

/// A one-parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
    pub outputs: Vec<SweepOutput>,
}

impl SweepSpec {
    pub fn parse(variable: SweepVariable, range: &str, outputs: Vec<SweepOutput>) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Invalid(format!("--range `{range}`: {why}"));
        let p: Vec<&str> = range.split(':').map(str::trim).collect();
        if !(p.len() == 3 || p.len() == 4) {
            return Err(bad("expected start:stop:count[:lin|log]"));
        }
        let start: f64 = p[0].parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = p[1].parse().map_err(|_| bad("bad stop"))?;
        let count: usize = p[2].parse().map_err(|_| bad("bad count"))?;
        let log = match p.get(3) {
            None | Some(&"lin") | Some(&"linear") => false,
            Some(&"log") => true,
            Some(_) => return Err(bad("spacing must be lin or log")),
        };
        let spec = SweepSpec {
            variable,
            start,
            stop,
            count,
            log,
            outputs,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::Invalid("sweep count must be at least 2".into()));
        }
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::Invalid("sweep needs finite start < stop".into()));
        }
        if self.log && self.start <= 0.0 {
            return Err(CliError::Invalid("log sweeps need a positive range".into()));
        }
        if self.outputs.is_empty() {
            return Err(CliError::Invalid("no sweep outputs selected".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / n as f64;
                if self.log {
                    (self.start.ln() + s * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + s * (self.stop - self.start)
                }
            })
            .collect()
    }
}

fn sweep_row(spec: &SweepSpec, base: &PhysArgs, x: f64, opts: &EvalOptions) -> Result<Vec<Cell>, CliError> {
    let mut p = base.clone();
    match spec.variable {
        SweepVariable::Kr => {
            p.kr = Some(x);
            p.separation = None;
        }
        SweepVariable::GammaT => {
            p.gamma_t = Some(x);
            p.t = None;
        }
        SweepVariable::DeltaRatio => {
            p.delta_ratio = Some(x);
            p.omega_b = None;
        }
    }
    let r = p.resolve()?;
    let mut row: Vec<Cell> = vec![x.into()];
    for out in &spec.outputs {
        match out {
            SweepOutput::ForceA => row.extend(vec_cells(&force_blocks(&r, Which::A, opts)?.2)),
            SweepOutput::ForceB => row.extend(vec_cells(&force_blocks(&r, Which::B, opts)?.2)),
            SweepOutput::Net => row.extend(vec_cells(&force_blocks(&r, Which::Net, opts)?.2)),
            SweepOutput::EnergyA => {
                require_dissimilar(&r, "energy_a")?;
                row.push(eval(&r, |c| energy_a_dissimilar(c, r.t, opts))?.total.into());
            }
            SweepOutput::EnergyB => {
                require_dissimilar(&r, "energy_b")?;
                row.push(eval(&r, |c| energy_b_dissimilar(c, r.t, opts))?.total.into());
            }
            SweepOutput::EmissionMoment => {
                let m = eval(&r, |c| match r.mode {
                    Mode::Dissimilar => Ok(momentum_rate_dissimilar(c, r.t, opts)?.value),
                    Mode::Identical => Ok(momentum_rate_identical(&IdenticalConfig::from_pair(c), r.t, opts)?.value),
                })?;
                row.extend(vec_cells(&m));
            }
        }
    }
    row.extend(validity_cells(&r)?);
    Ok(row)
}

pub fn cmd_sweep(args: &SweepArgs, base: &PhysArgs, opts: &EvalOptions) -> Result<Outcome, CliError> {
    let spec = SweepSpec::parse(args.variable, &args.range, args.outputs.clone())?;
    let var = match spec.variable {
        SweepVariable::Kr => "kR",
        SweepVariable::GammaT => "gammaT",
        SweepVariable::DeltaRatio => "delta_ratio",
    };
    let mut vectors = Vec::new();
    let mut scalars = Vec::new();
    let mut cols = vec![var.to_string()];
    for out in &spec.outputs {
        let name = out.to_possible_value().expect("named").get_name().to_string();
        match out {
            SweepOutput::EnergyA | SweepOutput::EnergyB => {
                cols.push(name.clone());
                scalars.push(name);
            }
            _ => {
                cols.extend(vec_columns(&name));
                vectors.push(name);
            }
        }
    }
    cols.extend(VALIDITY_COLUMNS.iter().map(|s| s.to_string()));
    let rows = spec
        .values()
        .par_iter()
        .map(|&x| sweep_row(&spec, base, x, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(cols);
    for row in rows {
        table.push(row);
    }
    Ok(table.into())
}
