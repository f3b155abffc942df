//! `hausdim [global flags] <radius|dim|study|table1|table2|table3>`
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for numeric
//! failures.

mod config;
mod report;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hausdim::spectral::cone_hypotheses;
use hausdim::{
    assemble, bracket_dimension, cone_membership, convergence_study, family_mesh, interpolation_bounds, ConeParams,
    DomainMode, ErrorModel, MapFamily, Mesh, RadiusEvaluator, SolverOptions,
};
use serde::Serialize;

use config::{domain_label, which_label, FamilySpec, Format, MeshSpec, RunConfig};
use report::{ConeReport, DimReport, EnclosureReport, Num, RadiusReport, Render, StudyReport, StudyRow};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(hausdim::Error),
}

impl From<hausdim::Error> for CliError {
    fn from(e: hausdim::Error) -> Self {
        use hausdim::Error::*;
        match e {
            EmptyFamily
            | NonPositiveDigit(_)
            | DuplicateDigit(_)
            | ParamOutOfRange { .. }
            | MeshTooSmall(_)
            | BadParams(_) => CliError::Config(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hausdim", version, about = "Certified Hausdorff dimension brackets for 1-D IFS attractors")]
struct Cli {
    /// Continued-fraction digits, e.g. `--cf 1,2`.
    #[arg(long, global = true, value_delimiter = ',', conflicts_with = "cantor")]
    cf: Option<Vec<f64>>,
    /// Perturbed middle-thirds Cantor maps with parameter a in [0, 1].
    #[arg(long, global = true)]
    cantor: Option<f64>,
    /// Mesh width(s); a comma list for `study`.
    #[arg(long, global = true, value_delimiter = ',', conflicts_with = "n")]
    h: Option<Vec<f64>>,
    /// Cell count(s) over the meshed domain.
    #[arg(long, global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Exponent for `radius` (default 1).
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Initial root-search interval.
    #[arg(long, global = true)]
    smin: Option<f64>,
    #[arg(long, global = true)]
    smax: Option<f64>,
    #[arg(long = "root-tol", global = true)]
    root_tol: Option<f64>,
    #[arg(long = "radius-tol", global = true)]
    radius_tol: Option<f64>,
    /// `full` or `reduced:k` (images of the domain under words of length k).
    #[arg(long, global = true, alias = "seed-domain")]
    domain: Option<String>,
    /// Matrices reported by `radius`, e.g. `--which A,B`.
    #[arg(long, global = true, value_delimiter = ',')]
    which: Option<Vec<String>>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (default 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiply preset mesh widths of `table1`/`table3` by this factor.
    #[arg(long, global = true)]
    scale: Option<f64>,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the assembled matrices of `radius` to this directory.
    #[arg(long = "dump-matrices", global = true)]
    dump_matrices: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Spectral radius enclosures of A_s, M_s and B_s at one s.
    Radius,
    /// Certified dimension bracket.
    Dim,
    /// Brackets on a sequence of mesh widths and the fitted convergence order.
    Study,
    /// Continued-fraction sets at preset widths.
    Table1,
    /// Higher-order collocation estimates.
    Table2,
    /// Perturbed Cantor sets at preset widths.
    Table3,
}

impl Cli {
    fn flags(&self) -> RunConfig {
        let family = match (&self.cf, self.cantor) {
            (Some(d), _) => Some(FamilySpec::Cf { digits: d.clone() }),
            (None, Some(a)) => Some(FamilySpec::Cantor { a }),
            _ => None,
        };
        let mesh = match (&self.h, &self.n) {
            (Some(h), _) => Some(MeshSpec::H(h.clone())),
            (None, Some(n)) => Some(MeshSpec::N(n.clone())),
            _ => None,
        };
        RunConfig {
            family,
            mesh,
            domain: self.domain.clone(),
            s: self.s,
            s_min: self.smin,
            s_max: self.smax,
            root_tol: self.root_tol,
            radius_tol: self.radius_tol,
            which: self.which.clone(),
            format: self.format,
            threads: self.threads,
            scale: self.scale,
        }
    }
}

fn solver_options(cfg: &RunConfig) -> Result<SolverOptions<f64>, CliError> {
    let d = SolverOptions::<f64>::default();
    let opts = SolverOptions {
        root_tol: cfg.positive("root-tol", cfg.root_tol, d.root_tol)?,
        radius_tol: cfg.positive("radius-tol", cfg.radius_tol, d.radius_tol)?,
        s_min: cfg.positive("smin", cfg.s_min, d.s_min)?,
        s_max: cfg.positive("smax", cfg.s_max, d.s_max)?,
        ..d
    };
    if opts.s_min >= opts.s_max {
        return Err(CliError::Config(format!("smin {} must be below smax {}", opts.s_min, opts.s_max)));
    }
    Ok(opts)
}

/// Width and cell count of the requested meshes, before building them.
fn mesh_widths(cfg: &RunConfig, family: &MapFamily<f64>, mode: DomainMode) -> Result<Vec<f64>, CliError> {
    let span = match mode {
        DomainMode::Full => family.domain().len(),
        DomainMode::Reduced(k) => family.reduce_domain(k).iter().map(|iv| iv.len()).sum(),
    };
    let widths: Vec<f64> = match &cfg.mesh {
        None => return Err(CliError::Config("give exactly one of --h or --n".into())),
        Some(MeshSpec::H(h)) => h.clone(),
        Some(MeshSpec::N(n)) => n.iter().map(|&n| if n == 0 { 0.0 } else { span / n as f64 }).collect(),
    };
    if widths.is_empty() || widths.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(CliError::Config("mesh widths and cell counts must be positive".into()));
    }
    Ok(widths)
}

fn build_mesh(cfg: &RunConfig, family: &MapFamily<f64>, mode: DomainMode, h: f64) -> Result<Mesh<f64>, CliError> {
    match (&cfg.mesh, mode) {
        (Some(MeshSpec::N(n)), DomainMode::Full) if n.len() == 1 => {
            let d = family.domain();
            Ok(Mesh::uniform(d.lo, d.hi, n[0])?)
        }
        _ => Ok(family_mesh(family, h, mode)?),
    }
}

fn single_width(cfg: &RunConfig, family: &MapFamily<f64>, mode: DomainMode, cmd: &str) -> Result<f64, CliError> {
    let w = mesh_widths(cfg, family, mode)?;
    if w.len() != 1 {
        return Err(CliError::Config(format!("{cmd} takes a single mesh; use study for a list")));
    }
    Ok(w[0])
}

/// Sampled sup of `|θ_j'|` over the domain.
fn map_lipschitz(family: &MapFamily<f64>) -> f64 {
    let d = family.domain();
    let k = 2000;
    family
        .maps()
        .iter()
        .flat_map(|m| (0..=k).map(move |i| m.jet(d.lo + d.len() * i as f64 / k as f64).d1.abs()))
        .fold(0.0, f64::max)
}

fn cmd_radius(cfg: &RunConfig, dump: Option<&PathBuf>) -> Result<RadiusReport, CliError> {
    let family = cfg.family()?;
    let mode = cfg.domain_mode()?;
    let s = cfg.positive("s", cfg.s, 1.0)?;
    let h = single_width(cfg, &family, mode, "radius")?;
    let radius_tol = cfg.positive("radius-tol", cfg.radius_tol, 1e-13)?;
    let which = cfg.which()?;
    // a too-coarse mesh is reported as a numeric failure before the mesh is built
    ErrorModel::for_family(&family, s, h)?;
    let mesh = build_mesh(cfg, &family, mode, h)?;
    let bounds = interpolation_bounds(&family, s)?;
    let ev = RadiusEvaluator::new(&family, &mesh, radius_tol);
    let cone = ConeParams { m: bounds.osc + 1.0, h: mesh.h() };
    let mut enclosures = Vec::with_capacity(which.len());
    for &w in &which {
        let e = ev.enclosure(s, w)?;
        enclosures.push(EnclosureReport {
            which: which_label(w).into(),
            r_lo: Num(e.r_lo),
            r_hi: Num(e.r_hi),
            iterations: e.iterations,
            converged: e.converged,
            in_cone: cone_membership(&e.eigvec, cone),
        });
    }
    if let Some(dir) = dump {
        let model = ErrorModel::for_family(&family, s, mesh.h())?;
        let t = assemble(&family, &mesh, s, &model)?;
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
        for (name, m) in [("A", &t.a), ("M", &t.m), ("B", &t.b)] {
            let path = dir.join(format!("{name}.txt"));
            std::fs::write(&path, m.dump(mesh.n(), s, &family.id()))
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        }
    }
    let (m1, m2, m) = (bounds.osc, bounds.osc + 1.0, std::f64::consts::LN_2 / mesh.h());
    let c = map_lipschitz(&family);
    let diag = cone_hypotheses(m, m2, c, mesh.h());
    Ok(RadiusReport {
        family: family.id(),
        domain: domain_label(mode),
        s: Num(s),
        h: Num(mesh.h()),
        dim: mesh.dim(),
        rigorous_bounds: bounds.rigorous,
        enclosures,
        cone: ConeReport {
            c: Num(c),
            m1: Num(m1),
            m2: Num(m2),
            m: Num(m),
            contraction_ok: diag.contraction_ok,
            width_ok: diag.width_ok,
        },
    })
}

fn cmd_dim(cfg: &RunConfig) -> Result<DimReport, CliError> {
    let family = cfg.family()?;
    let mode = cfg.domain_mode()?;
    let opts = solver_options(cfg)?;
    let h = single_width(cfg, &family, mode, "dim")?;
    let mesh = build_mesh(cfg, &family, mode, h)?;
    let b = bracket_dimension(&family, &mesh, &opts)?;
    Ok(DimReport {
        family: b.family_id.clone(),
        domain: domain_label(mode),
        h: Num(b.mesh_h),
        dim: mesh.dim(),
        s_lower: Num(b.s_lower),
        s_upper: Num(b.s_upper),
        width: Num(b.width()),
        evals: b.evals,
        certified: b.certified,
        decreasing_certified: b.decreasing_certified,
    })
}

fn cmd_study(cfg: &RunConfig) -> Result<StudyReport, CliError> {
    let family = cfg.family()?;
    let mode = cfg.domain_mode()?;
    let opts = solver_options(cfg)?;
    let meshes = mesh_widths(cfg, &family, mode)?
        .into_iter()
        .map(|h| Ok(family_mesh(&family, h, mode)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let st = convergence_study(&family, &meshes, &opts)?;
    Ok(StudyReport {
        family: family.id(),
        rows: st
            .rows
            .iter()
            .map(|b| StudyRow {
                h: Num(b.mesh_h),
                s_lower: Num(b.s_lower),
                s_upper: Num(b.s_upper),
                width: Num(b.width()),
            })
            .collect(),
        order: st.order.map(Num),
    })
}

fn emit<R: Serialize + Render>(r: &R, format: Format) -> Result<(), CliError> {
    let text = match format {
        Format::Json => {
            serde_json::to_string_pretty(r).map_err(|e| CliError::Config(format!("serialization: {e}")))? + "\n"
        }
        Format::Csv => r.csv(),
        Format::Text => r.text(),
    };
    print!("{text}");
    Ok(())
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let scale = cfg.positive("scale", cfg.scale, 1.0)?;
    let fmt = |default| cfg.format.unwrap_or(default);
    match cli.command {
        Command::Radius => emit(&cmd_radius(cfg, cli.dump_matrices.as_ref())?, fmt(Format::Json)),
        Command::Dim => emit(&cmd_dim(cfg)?, fmt(Format::Json)),
        Command::Study => emit(&cmd_study(cfg)?, fmt(Format::Csv)),
        Command::Table1 => emit(&tables::table1(scale, cfg.domain_mode()?, &solver_options(cfg)?)?, fmt(Format::Text)),
        Command::Table2 => emit(&tables::table2(cfg.domain_mode()?, &solver_options(cfg)?)?, fmt(Format::Text)),
        Command::Table3 => emit(&tables::table3(scale, cfg.domain_mode()?, &solver_options(cfg)?)?, fmt(Format::Text)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let file = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let cfg = file.merge(cli.flags());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads()?)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        pool.install(|| run(&cli, &cfg))
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hausdim: {e}");
            ExitCode::from(e.code())
        }
    }
}
