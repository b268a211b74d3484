//! Command-line front end: argument parsing, run configuration and the five
//! commands.

use std::ffi::OsString;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::warn;

use crate::config::{parse_angle, parse_bool, parse_list, parse_value, ConfigFile, Settings};
use crate::error::{Error, Result};
use crate::fem::{InnerProductMode, InnerProductSpec, DEFAULT_SIGMA_FLOOR};
use crate::field::NodalField;
use crate::forward::{determinant_diagnostic, simulate_on_fine_mesh, CurrentFamily, ForwardModel};
use crate::illposed::{
    assemble_transfer_matrix, condition_table, measurement_set, ConditionEntry, ConditionTable, Pairing,
    TableSettings,
};
use crate::inversion::{add_noise, run_landweber, InitialGuess, ReconstructionConfig};
use crate::io::{
    iteration_log_csv, read_field_on_mesh, singular_values_csv, write_field_csv, write_mesh, write_text,
    write_vtk,
};
use crate::mesh::{generate_disk_mesh, BoundaryArc, Mesh};
use crate::phantom::{default_phantom, Disc, Inclusion, PhantomSpec, Shape};

#[derive(Debug, Parser)]
#[command(name = "aet", version, about = "Acousto-electric tomography toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the test conductivity on the reconstruction mesh.
    Phantom(Overrides),
    /// Simulate power densities on a fine mesh and add noise.
    Simulate(Overrides),
    /// Run the Landweber reconstruction.
    Reconstruct(Overrides),
    /// Assemble the transfer matrix and compute its singular values.
    Svd(Overrides),
    /// Condition numbers for every angle and current combination.
    ConditionTable(Overrides),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Phantom(_) => "phantom",
            Command::Simulate(_) => "simulate",
            Command::Reconstruct(_) => "reconstruct",
            Command::Svd(_) => "svd",
            Command::ConditionTable(_) => "condition-table",
        }
    }

    fn overrides(&self) -> &Overrides {
        match self {
            Command::Phantom(o)
            | Command::Simulate(o)
            | Command::Reconstruct(o)
            | Command::Svd(o)
            | Command::ConditionTable(o) => o,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Key-value configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Accessible arc, e.g. `2pi`, `3pi/2`, `75%`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Number of boundary currents.
    #[arg(long)]
    pub measurements: Option<usize>,
    /// Current family: trig or special.
    #[arg(long)]
    pub family: Option<String>,
    /// Adjoint inner product: l2, h2 or h2beta.
    #[arg(long)]
    pub adjoint: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Relative noise level.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Report s_1 / s_k instead of the full condition number.
    #[arg(long, value_name = "K")]
    pub truncate: Option<usize>,
    /// Approximate vertex count of the reconstruction mesh.
    #[arg(long)]
    pub vertices: Option<usize>,
    /// Any other configuration key, as `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Overrides {
    fn apply(&self, settings: &mut Settings) -> Result<()> {
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                settings.insert(k.to_owned(), v);
            }
        };
        put("alpha", self.alpha.clone());
        put("measurements", self.measurements.map(|v| v.to_string()));
        put("family", self.family.clone());
        put("adjoint", self.adjoint.clone());
        put("tau", self.tau.map(|v| v.to_string()));
        put("noise", self.noise.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("max_iter", self.max_iter.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("truncate", self.truncate.map(|v| v.to_string()));
        put("vertices", self.vertices.map(|v| v.to_string()));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{kv}'")))?;
            settings.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        Ok(())
    }
}

/// Fully resolved parameters of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub vertices: usize,
    pub fine_vertices: usize,
    pub alpha: f64,
    pub measurements: usize,
    pub family: CurrentFamily,
    pub adjoint: InnerProductMode,
    pub beta: [f64; 3],
    pub tau: f64,
    pub noise: f64,
    pub seed: u64,
    pub max_iter: usize,
    pub sigma0: f64,
    pub sigma_floor: f64,
    pub safeguard: bool,
    pub out: PathBuf,
    pub truncate: Option<usize>,
    pub pairing: Pairing,
    /// 1-based singular vector indices to export.
    pub vectors: Vec<usize>,
    pub phantom: PhantomSpec,
    /// Precomputed noisy data, one field CSV per measurement.
    pub data: Vec<PathBuf>,
    pub delta_abs: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            vertices: 2000,
            fine_vertices: 40_000,
            alpha: TAU,
            measurements: 3,
            family: CurrentFamily::TrigLimited,
            adjoint: InnerProductMode::H2Beta,
            beta: InnerProductSpec::default_h2_beta().weights(),
            tau: 1.0,
            noise: 0.05,
            seed: 0,
            max_iter: 1000,
            sigma0: 1.5,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            safeguard: true,
            out: PathBuf::from("out"),
            truncate: None,
            pairing: Pairing::Exact,
            vectors: Vec::new(),
            phantom: default_phantom(),
            data: Vec::new(),
            delta_abs: None,
        }
    }
}

/// `disc cx cy r plateau width` or `crescent ox oy or cx cy cr plateau width`.
fn parse_inclusion(s: &str) -> Result<Inclusion> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let nums = |xs: &[&str]| -> Result<Vec<f64>> { xs.iter().map(|x| parse_value("inclusion", x)).collect() };
    match parts.first().copied() {
        Some("disc") if parts.len() == 6 => {
            let v = nums(&parts[1..])?;
            Ok(Inclusion {
                shape: Shape::Disc(Disc {
                    center: [v[0], v[1]],
                    radius: v[2],
                }),
                plateau: v[3],
                ramp_width: v[4],
            })
        }
        Some("crescent") if parts.len() == 9 => {
            let v = nums(&parts[1..])?;
            Ok(Inclusion {
                shape: Shape::Crescent {
                    outer: Disc {
                        center: [v[0], v[1]],
                        radius: v[2],
                    },
                    cut: Disc {
                        center: [v[3], v[4]],
                        radius: v[5],
                    },
                },
                plateau: v[6],
                ramp_width: v[7],
            })
        }
        _ => Err(Error::Config(format!(
            "cannot parse inclusion '{s}' (expected 'disc cx cy r plateau width' or \
             'crescent ox oy or cx cy cr plateau width')"
        ))),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "vertices",
    "fine_vertices",
    "alpha",
    "measurements",
    "family",
    "adjoint",
    "beta",
    "tau",
    "noise",
    "seed",
    "max_iter",
    "sigma0",
    "sigma_floor",
    "safeguard",
    "out",
    "truncate",
    "pairing",
    "vectors",
    "background",
    "inclusion",
    "data",
    "delta_abs",
];

impl RunConfig {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let mut c = RunConfig::default();
        for (key, v) in settings {
            match key.as_str() {
                "vertices" => c.vertices = parse_value(key, v)?,
                "fine_vertices" => c.fine_vertices = parse_value(key, v)?,
                "alpha" => c.alpha = parse_angle(v)?,
                "measurements" => c.measurements = parse_value(key, v)?,
                "family" => c.family = v.parse()?,
                "adjoint" => c.adjoint = v.parse()?,
                "beta" => {
                    let b = parse_list(v, |s| parse_value::<f64>(key, s))?;
                    c.beta = b
                        .try_into()
                        .map_err(|_| Error::Config("beta needs three comma-separated weights".into()))?;
                }
                "tau" => c.tau = parse_value(key, v)?,
                "noise" => c.noise = parse_value(key, v)?,
                "seed" => c.seed = parse_value(key, v)?,
                "max_iter" => c.max_iter = parse_value(key, v)?,
                "sigma0" => c.sigma0 = parse_value(key, v)?,
                "sigma_floor" => c.sigma_floor = parse_value(key, v)?,
                "safeguard" => c.safeguard = parse_bool(key, v)?,
                "out" => c.out = PathBuf::from(v),
                "truncate" => c.truncate = Some(parse_value(key, v)?),
                "pairing" => c.pairing = v.parse()?,
                "vectors" => c.vectors = parse_list(v, |s| parse_value(key, s))?,
                "background" => c.phantom.background = parse_value(key, v)?,
                "inclusion" => {
                    c.phantom.inclusions = v.split(';').map(parse_inclusion).collect::<Result<_>>()?;
                }
                "data" => c.data = parse_list(v, |s| Ok(PathBuf::from(s)))?,
                "delta_abs" => c.delta_abs = Some(parse_value(key, v)?),
                other => {
                    return Err(Error::Config(format!(
                        "unknown key '{other}' (known: {})",
                        KNOWN_KEYS.join(", ")
                    )))
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.vertices < 7 || self.fine_vertices < 7 {
            return bad("mesh vertex counts must be at least 7".into());
        }
        if self.measurements == 0 {
            return bad("measurements must be at least 1".into());
        }
        if self.family == CurrentFamily::SpecialFull && self.measurements > 3 {
            return bad("the special family has only three currents".into());
        }
        if !(self.sigma_floor > 0.0) {
            return bad(format!("sigma_floor must be positive, got {}", self.sigma_floor));
        }
        if self.truncate == Some(0) {
            return bad("truncate must be at least 1".into());
        }
        BoundaryArc::new(self.alpha)?;
        for p in &self.data {
            if !p.is_file() {
                return bad(format!("data file {} does not exist", p.display()));
            }
        }
        if !self.data.is_empty() && self.data.len() != self.measurements {
            return bad(format!(
                "{} data files given for {} measurements",
                self.data.len(),
                self.measurements
            ));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<InnerProductSpec> {
        InnerProductSpec::from_mode(self.adjoint, self.beta)
    }

    pub fn arc(&self) -> Result<BoundaryArc> {
        BoundaryArc::new(self.alpha)
    }

    pub fn indices(&self) -> Vec<usize> {
        (1..=self.measurements).collect()
    }

    pub fn reconstruction(&self) -> Result<ReconstructionConfig> {
        Ok(ReconstructionConfig {
            tau: self.tau,
            delta_rel: self.noise,
            sigma0: InitialGuess::Constant(self.sigma0),
            max_iter: self.max_iter,
            spec: self.spec()?,
            sigma_floor: self.sigma_floor,
            rng_seed: self.seed,
            safeguard: self.safeguard,
        })
    }

    /// Config file (if any) for `command`, then flag overrides.
    pub fn resolve(command: &str, overrides: &Overrides) -> Result<Self> {
        let mut settings = match &overrides.config {
            Some(path) => ConfigFile::load(path)?.for_command(command),
            None => Settings::new(),
        };
        overrides.apply(&mut settings)?;
        Self::from_settings(&settings)
    }
}

fn fields_vtk<'a>(names: &'a [String], fields: &'a [NodalField]) -> Vec<(&'a str, &'a NodalField)> {
    names.iter().map(String::as_str).zip(fields).collect()
}

/// Noise-free and noisy power densities on the reconstruction mesh.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub exact: Vec<NodalField>,
    pub noisy: Vec<NodalField>,
    pub delta_abs: f64,
}

pub fn simulate_data(cfg: &RunConfig, mesh: &Mesh, model: &ForwardModel<'_>) -> Result<SimulatedData> {
    cfg.phantom.validate(cfg.sigma_floor)?;
    let fine = generate_disk_mesh(cfg.fine_vertices)?;
    let exact = simulate_on_fine_mesh(
        &fine,
        &cfg.phantom.on_mesh(&fine),
        model.measurements(),
        cfg.sigma_floor,
        mesh,
    )?;
    let (noisy, delta_abs) = add_noise(&exact, model.mass(), cfg.noise, cfg.seed)?;
    Ok(SimulatedData {
        exact,
        noisy,
        delta_abs,
    })
}

fn model_for<'m>(cfg: &RunConfig, mesh: &'m Mesh) -> Result<ForwardModel<'m>> {
    let ms = measurement_set(cfg.family, cfg.arc()?, &cfg.indices())?;
    ForwardModel::new(mesh, ms, cfg.sigma_floor)
}

/// Writes the phantom; returns the printed summary.
pub fn cmd_phantom(cfg: &RunConfig) -> Result<String> {
    cfg.phantom.validate(cfg.sigma_floor)?;
    let mesh = generate_disk_mesh(cfg.vertices)?;
    let field = cfg.phantom.on_mesh(&mesh);
    write_mesh(&cfg.out.join("mesh.txt"), &mesh)?;
    write_field_csv(&cfg.out.join("phantom.csv"), &mesh, &field)?;
    write_vtk(&cfg.out.join("phantom.vtk"), &mesh, "phantom", &[("sigma", &field)])?;
    let plateaus: Vec<String> = cfg.phantom.inclusions.iter().map(|i| i.plateau.to_string()).collect();
    Ok(format!(
        "vertices={} min={} max={} background={} plateaus={}",
        mesh.num_vertices(),
        field.min(),
        field.max(),
        cfg.phantom.background,
        plateaus.join(";")
    ))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<String> {
    let mesh = generate_disk_mesh(cfg.vertices)?;
    let model = model_for(cfg, &mesh)?;
    let data = simulate_data(cfg, &mesh, &model)?;
    let m = data.exact.len();
    for j in 0..m {
        write_field_csv(&cfg.out.join(format!("E_{}.csv", j + 1)), &mesh, &data.exact[j])?;
        write_field_csv(&cfg.out.join(format!("E_delta_{}.csv", j + 1)), &mesh, &data.noisy[j])?;
    }
    let names: Vec<String> = (1..=m)
        .map(|j| format!("E_{j}"))
        .chain((1..=m).map(|j| format!("E_delta_{j}")))
        .collect();
    let all: Vec<NodalField> = data.exact.iter().chain(&data.noisy).cloned().collect();
    write_vtk(&cfg.out.join("power_density.vtk"), &mesh, "power densities", &fields_vtk(&names, &all))?;
    write_mesh(&cfg.out.join("mesh.txt"), &mesh)?;

    let det_min = if m >= 2 {
        let state = model.solve(&cfg.phantom.on_mesh(&mesh))?;
        let p = state.potentials();
        Some(determinant_diagnostic(&mesh, &p[0], &p[1])?.1)
    } else {
        None
    };
    let mut summary = format!(
        "vertices={} fine_vertices={} alpha={} measurements={} noise={} seed={} delta_abs={}",
        mesh.num_vertices(),
        cfg.fine_vertices,
        cfg.alpha,
        m,
        cfg.noise,
        cfg.seed,
        data.delta_abs
    );
    if let Some(d) = det_min {
        let _ = write!(summary, " det_min={d}");
    }
    write_text(&cfg.out.join("simulate.txt"), &format!("{summary}\n"))?;
    Ok(summary)
}

pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<String> {
    let mesh = generate_disk_mesh(cfg.vertices)?;
    let model = model_for(cfg, &mesh)?;
    let truth = cfg.phantom.on_mesh(&mesh);
    let (data, delta_abs) = if cfg.data.is_empty() {
        let sim = simulate_data(cfg, &mesh, &model)?;
        (sim.noisy, sim.delta_abs)
    } else {
        let data = cfg
            .data
            .iter()
            .map(|p| read_field_on_mesh(p, &mesh))
            .collect::<Result<Vec<_>>>()?;
        let delta = cfg
            .delta_abs
            .ok_or_else(|| Error::Config("data files need delta_abs".into()))?;
        (data, delta)
    };
    let rec = run_landweber(&cfg.reconstruction()?, &model, &data, delta_abs, Some(&truth))?;
    write_field_csv(&cfg.out.join("reconstruction.csv"), &mesh, &rec.sigma)?;
    write_vtk(
        &cfg.out.join("reconstruction.vtk"),
        &mesh,
        "reconstruction",
        &[("sigma", &rec.sigma), ("truth", &truth)],
    )?;
    write_text(&cfg.out.join("iterations.csv"), &iteration_log_csv(&rec.log))?;
    let summary = format!(
        "stop={} iterations={} residual={} delta_abs={} initial_error={} final_error={}",
        rec.log.stop,
        rec.log.final_index(),
        rec.log.final_residual(),
        delta_abs,
        rec.log.initial_rel_error().unwrap_or(f64::NAN),
        rec.log.final_rel_error().unwrap_or(f64::NAN)
    );
    write_text(&cfg.out.join("reconstruct.txt"), &format!("{summary}\n"))?;
    Ok(summary)
}

pub fn cmd_svd(cfg: &RunConfig) -> Result<String> {
    let mesh = generate_disk_mesh(cfg.vertices)?;
    let model = model_for(cfg, &mesh)?;
    let sigma = cfg.phantom.on_mesh(&mesh);
    let t = assemble_transfer_matrix(&model, &sigma, cfg.pairing)?;
    let report = t.svd(!cfg.vectors.is_empty())?;
    write_text(&cfg.out.join("singular_values.csv"), &singular_values_csv(&report))?;
    let condition = match cfg.truncate {
        Some(k) if k > report.singular_values.len() => {
            warn!("truncation index {k} exceeds the number of singular values");
            report.condition_number()
        }
        Some(k) => report.truncated_condition(k)?,
        None => report.condition_number(),
    };
    let table = ConditionTable {
        entries: vec![ConditionEntry {
            alpha: cfg.alpha,
            functions: cfg.indices(),
            condition,
        }],
    };
    write_text(&cfg.out.join("condition_table.csv"), &table.to_csv())?;
    for &k in &cfg.vectors {
        if k == 0 || k > report.singular_values.len() {
            warn!(
                "singular vector {k} requested but only {} exist; skipped",
                report.singular_values.len()
            );
            continue;
        }
        let v = report.right_singular_vector(k)?;
        write_field_csv(&cfg.out.join(format!("v_{k}.csv")), &mesh, &v)?;
        write_vtk(&cfg.out.join(format!("v_{k}.vtk")), &mesh, &format!("v_{k}"), &[("v", &v)])?;
    }
    Ok(format!(
        "rows={} cols={} s_max={} s_min={} condition={}",
        t.nrows(),
        t.ncols(),
        report.singular_values[0],
        report.singular_values.last().copied().unwrap_or(f64::NAN),
        condition
    ))
}

pub fn cmd_condition_table(cfg: &RunConfig) -> Result<String> {
    let mesh = generate_disk_mesh(cfg.vertices)?;
    let sigma = cfg.phantom.on_mesh(&mesh);
    let settings = TableSettings {
        family: cfg.family,
        sigma_floor: cfg.sigma_floor,
        truncate: cfg.truncate,
        pairing: cfg.pairing,
        ..Default::default()
    };
    let table = condition_table(&mesh, &sigma, &settings)?;
    let csv = table.to_csv();
    write_text(&cfg.out.join("condition_table.csv"), &csv)?;
    Ok(csv.trim_end().to_owned())
}

pub fn run(command: &Command) -> Result<String> {
    let cfg = RunConfig::resolve(command.name(), command.overrides())?;
    match command {
        Command::Phantom(_) => cmd_phantom(&cfg),
        Command::Simulate(_) => cmd_simulate(&cfg),
        Command::Reconstruct(_) => cmd_reconstruct(&cfg),
        Command::Svd(_) => cmd_svd(&cfg),
        Command::ConditionTable(_) => cmd_condition_table(&cfg),
    }
}

/// One-line machine-readable error report.
pub fn error_line(kind: &str, message: &str) -> String {
    let flat: String = message.split_whitespace().collect::<Vec<_>>().join(" ");
    format!("error: kind={kind} message={flat}")
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return 2;
        }
    };
    match run(&cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            1
        }
    }
}
