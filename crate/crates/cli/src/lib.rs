//! Command-line front end: argument parsing, preset and descriptor loading,
//! and deterministic JSON reports.

pub mod descriptor;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use ptlab_core::classgroup::{class_group, prime_to_p_report};
use ptlab_core::coeffring::is_prime;
use ptlab_core::fixtures;
use ptlab_core::logreg::{
    build_tower, d_class, is_maximal_sequence, kummer_regularity, omega_dim, preset, verify_tilt, BaseRing,
    LogRegPresentation,
};
use ptlab_core::monoid::{
    exact_embed_nd, is_exact_submonoid, layer_quotient, p_divide, AffineMonoid, MonoidDescriptor,
    DEFAULT_DEGREE_BOUND,
};
use ptlab_core::series::Cutoff;
use ptlab_core::tower::{
    inverse_perfection_is_perfect, tilt_mod_pillar_iso, verify_exactstilt, verify_frobenius_diagrams, DiagramReport,
    Tower, TowerDesc,
};
use serde_json::{json, Value};
use thiserror::Error;

pub use descriptor::{load_descriptor, parse_descriptor, save_descriptor, to_canonical_json, DescriptorError};

#[derive(Debug, Parser)]
#[command(name = "ptlab", version, about = "Monoids, Frobenius towers and their tilts over F_p")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Group,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Named preset instead of an input file.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true, default_value_t = 2)]
    pub p: u64,
    /// Number of free variables for `unramified_rlr`.
    #[arg(long, global = true, default_value_t = 2)]
    pub d: usize,
    #[arg(long, global = true, default_value_t = 2)]
    pub depth: usize,
    /// Degree cutoff `D`, an integer or a fraction `a/b`.
    #[arg(long, global = true, default_value = "4")]
    pub cutoff: String,
    /// Coefficient precision `N` (digits of `p`).
    #[arg(long, global = true, default_value_t = 2)]
    pub precision: u32,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Affine monoid computations.
    #[command(subcommand)]
    Monoid(MonoidCmd),
    /// Towers, axioms and tilts.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Differential criteria over unramified regular bases.
    #[command(subcommand)]
    Regularity(RegularityCmd),
}

#[derive(Debug, Subcommand)]
pub enum MonoidCmd {
    /// Generators, saturation and sharpness.
    Check { input: PathBuf },
    /// Hilbert basis of the saturation.
    Saturate { input: PathBuf },
    /// Layer quotient and exactness at level `i`.
    Divide {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        i: u32,
    },
    /// Facet normals of the cone.
    Embed { input: PathBuf },
    /// Class group and its prime-to-p part.
    Classgroup { input: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum TowerCmd {
    /// Build the tower of a presentation.
    Build { input: Option<PathBuf> },
    /// Check the tower axioms.
    Verify { input: Option<PathBuf> },
    /// Compare the tilt with the predicted tower.
    Tilt { input: Option<PathBuf> },
    /// Pillar tilts and their generator criterion.
    Exactstilt {
        input: Option<PathBuf>,
        /// Home level; all levels when omitted.
        #[arg(long)]
        level: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RegularityCmd {
    /// Dimension of the differential module.
    Omega {
        input: Option<PathBuf>,
        /// `zp` for `Z_p[[x_1..x_d]]`, `fp` for `F_p[[x_1..x_d]]`.
        #[arg(long, default_value = "zp")]
        base: String,
    },
    /// Whether a sequence is a regular system of parameters.
    Maximal { input: PathBuf },
    /// Regularity of a Kummer extension.
    Kummer { input: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

fn input_err(e: impl ToString) -> CliError {
    CliError::Input(e.to_string())
}

/// A report and whether every verification in it passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub pass: bool,
}

impl Outcome {
    fn info(report: Value) -> Self {
        Outcome { report, pass: true }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

impl RunConfig {
    pub fn validate(&self) -> Result<Cutoff, CliError> {
        if !is_prime(self.p) {
            return Err(input_err(format!("--p {} is not prime", self.p)));
        }
        if self.precision < 1 {
            return Err(input_err("--precision must be at least 1"));
        }
        let cutoff: Cutoff = self.cutoff.parse().map_err(|e| input_err(format!("--cutoff: {e}")))?;
        if cutoff.0 <= num_rational_zero() {
            return Err(input_err("--cutoff must be positive"));
        }
        Ok(cutoff)
    }
}

fn num_rational_zero() -> num_rational::BigRational {
    num_rational::BigRational::from_integer(0.into())
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cutoff = cli.config.validate()?;
    match &cli.command {
        Group::Monoid(cmd) => run_monoid(cmd),
        Group::Tower(cmd) => run_tower(cmd, &cli.config, &cutoff),
        Group::Regularity(cmd) => run_regularity(cmd, &cli.config),
    }
}

fn load_monoid(path: &Path) -> Result<AffineMonoid, CliError> {
    let (_, m) = load_descriptor::<MonoidDescriptor>(path)?;
    Ok(m)
}

fn matrix_rows(rows: &[Vec<num_bigint::BigInt>]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

fn run_monoid(cmd: &MonoidCmd) -> Result<Outcome, CliError> {
    match cmd {
        MonoidCmd::Check { input } => {
            let q = load_monoid(input)?;
            let sharp = q.is_sharp();
            let saturated = q.is_saturated().map_err(input_err)?;
            let mut report = json!({
                "monoid": q.descriptor(),
                "dimension": q.dimension(),
                "sharp": sharp,
                "saturated": saturated,
                "facets": matrix_rows(q.facets()),
            });
            if sharp {
                report["hilbert_basis"] = to_value(&q.saturate().map_err(input_err)?.generators());
            }
            Ok(Outcome::info(report))
        }
        MonoidCmd::Saturate { input } => {
            let q = load_monoid(input)?;
            let s = q.saturate().map_err(input_err)?;
            Ok(Outcome::info(to_value(&s.descriptor())))
        }
        MonoidCmd::Divide { input, i } => {
            let q = load_monoid(input)?;
            let lower = p_divide(&q, *i);
            let upper = p_divide(&q, i + 1);
            let exact = is_exact_submonoid(&lower, &upper, DEFAULT_DEGREE_BOUND).map_err(input_err)?;
            Ok(Outcome::info(json!({
                "divided": lower.descriptor(),
                "layer_quotient": layer_quotient(&q, *i),
                "layer_quotient_order": layer_quotient(&q, *i).order().map(|o| o.to_string()),
                "exact_in_next_layer": exact.exact,
                "exactness_certified": exact.certified,
            })))
        }
        MonoidCmd::Embed { input } => {
            let q = load_monoid(input)?;
            let e = exact_embed_nd(&q).map_err(input_err)?;
            let normals: Vec<Vec<num_bigint::BigInt>> =
                (0..e.normals.nrows()).map(|i| e.normals.row(i).to_vec()).collect();
            let images: Vec<Vec<String>> = q
                .generators()
                .iter()
                .map(|g| e.apply(g).map(|v| v.iter().map(ToString::to_string).collect()))
                .collect::<Option<_>>()
                .ok_or_else(|| input_err("generator outside its own lattice"))?;
            Ok(Outcome::info(json!({
                "facet_count": e.num_facets(),
                "lattice_basis": matrix_rows(&e.lattice.basis()),
                "normals": matrix_rows(&normals),
                "generator_images": images,
            })))
        }
        MonoidCmd::Classgroup { input } => {
            let q = load_monoid(input)?;
            let r = class_group(&q).map_err(input_err)?;
            let tp = prime_to_p_report(&r.group, q.scale_base());
            Ok(Outcome { pass: tp.finite, report: json!({ "class_group": r, "prime_to_p": tp }) })
        }
    }
}

/// Tower source: a named preset, a presentation file, or a tower file.
enum TowerSource {
    Presentation(LogRegPresentation),
    Tower(TowerDesc),
}

fn tower_source(input: &Option<PathBuf>, cfg: &RunConfig) -> Result<TowerSource, CliError> {
    match (input, &cfg.preset) {
        (Some(_), Some(_)) => Err(input_err("give either an input file or --preset, not both")),
        (None, None) => Err(input_err("an input file or --preset is required")),
        (None, Some(name)) => {
            if let Some(ax) = name.strip_prefix("sabotage_") {
                let c = ax.chars().next().filter(|_| ax.len() == 1);
                return c
                    .and_then(fixtures::sabotaged)
                    .map(TowerSource::Tower)
                    .ok_or_else(|| input_err(format!("unknown sabotage fixture {name:?}")));
            }
            match name.as_str() {
                "perfect" => Ok(TowerSource::Tower(fixtures::perfect_principal(cfg.p))),
                "perfect_zero" => Ok(TowerSource::Tower(fixtures::perfect_zero_ideal(cfg.p))),
                "nondomain" => Ok(TowerSource::Tower(fixtures::nondomain_torsion(cfg.p))),
                _ => Ok(TowerSource::Presentation(preset(name, cfg.p, cfg.d).map_err(input_err)?)),
            }
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Descriptor(DescriptorError::Io { path: path.display().to_string(), message: e.to_string() })
            })?;
            let is_tower = serde_json::from_str::<Value>(&text).ok().is_some_and(|v| v.get("levels").is_some());
            if is_tower {
                Ok(TowerSource::Tower(parse_descriptor::<TowerDesc>(&text)?.0))
            } else {
                Ok(TowerSource::Presentation(parse_descriptor::<LogRegPresentation>(&text)?.0))
            }
        }
    }
}

fn tower_desc(src: &TowerSource, cfg: &RunConfig, cutoff: &Cutoff) -> Result<TowerDesc, CliError> {
    match src {
        TowerSource::Tower(t) => Ok(t.clone()),
        TowerSource::Presentation(p) => build_tower(p, cfg.depth, cutoff, cfg.precision).map_err(input_err),
    }
}

fn run_tower(cmd: &TowerCmd, cfg: &RunConfig, cutoff: &Cutoff) -> Result<Outcome, CliError> {
    match cmd {
        TowerCmd::Build { input } => {
            let desc = tower_desc(&tower_source(input, cfg)?, cfg, cutoff)?;
            Tower::build(desc.clone()).map_err(input_err)?;
            Ok(Outcome::info(to_value(&desc)))
        }
        TowerCmd::Verify { input } => {
            let desc = tower_desc(&tower_source(input, cfg)?, cfg, cutoff)?;
            let tower = Tower::build(desc).map_err(input_err)?;
            info!("verifying {} levels", tower.depth() + 1);
            let report = tower.verify_all();
            let diagrams = verify_frobenius_diagrams(&tower);
            let pass = report.all_pass();
            let sections: BTreeMap<String, Value> =
                report.sections().into_iter().map(|(k, v)| (k, to_value(&v))).collect();
            Ok(Outcome {
                pass,
                report: json!({
                    "axioms": sections,
                    "failing": report.failing_axioms(),
                    "frobenius_diagrams": diagrams,
                    "frobenius_diagrams_pass": diagrams.iter().all(DiagramReport::pass),
                    "cutoff": tower.cutoff_info(),
                    "pass": pass,
                }),
            })
        }
        TowerCmd::Tilt { input } => match tower_source(input, cfg)? {
            TowerSource::Presentation(p) => {
                let r = verify_tilt(&p, cfg.depth, cutoff, cfg.precision).map_err(input_err)?;
                Ok(Outcome { pass: r.matches, report: to_value(&r) })
            }
            TowerSource::Tower(_) => Err(input_err("tilt prediction needs a log-regular presentation")),
        },
        TowerCmd::Exactstilt { input, level } => {
            let desc = tower_desc(&tower_source(input, cfg)?, cfg, cutoff)?;
            let tower = Tower::build(desc).map_err(input_err)?;
            let pillars = tower.pillar_system().map_err(input_err)?;
            let levels: Vec<usize> = match level {
                Some(j) if *j > tower.depth() => return Err(input_err(format!("--level {j} exceeds the depth"))),
                Some(j) => vec![*j],
                None => (0..=tower.depth()).collect(),
            };
            let mut pass = pillars.all_ok();
            let mut per_level = Vec::new();
            for j in levels {
                let ex = verify_exactstilt(&tower, j).map_err(input_err)?;
                let iso = tilt_mod_pillar_iso(&tower, j).map_err(input_err)?;
                let perfect = if j + 2 <= tower.depth() {
                    Some(inverse_perfection_is_perfect(&tower, j).map_err(input_err)?)
                } else {
                    None
                };
                pass &= ex.pass() && iso.bijective && perfect.as_ref().is_none_or(|r| r.pass());
                per_level.push(json!({ "level": j, "exactstilt": ex, "mod_pillar_iso": iso, "perfectness": perfect }));
            }
            Ok(Outcome { pass, report: json!({ "pillars": pillars, "levels": per_level, "pass": pass }) })
        }
    }
}

fn run_regularity(cmd: &RegularityCmd, cfg: &RunConfig) -> Result<Outcome, CliError> {
    use descriptor::RegularityInput;
    let load = |p: &PathBuf| -> Result<RegularityInput, CliError> { Ok(load_descriptor::<RegularityInput>(p)?.0) };
    match cmd {
        RegularityCmd::Omega { input, base } => {
            let b = match input {
                Some(p) => load(p)?.base,
                None => match base.as_str() {
                    "zp" => BaseRing::zp(cfg.p, cfg.d),
                    "fp" => BaseRing::fp(cfg.p, cfg.d),
                    other => return Err(input_err(format!("unknown base {other:?}; use zp or fp"))),
                },
            };
            Ok(Outcome::info(to_value(&omega_dim(&b).map_err(input_err)?)))
        }
        RegularityCmd::Maximal { input } => {
            let r = load(input)?;
            let classes = r.elements.iter().map(|f| d_class(&r.base, f)).collect::<Result<Vec<_>, _>>().map_err(input_err)?;
            let maximal = is_maximal_sequence(&r.base, &r.elements).map_err(input_err)?;
            Ok(Outcome::info(json!({ "maximal": maximal, "classes": classes, "omega": omega_dim(&r.base).map_err(input_err)? })))
        }
        RegularityCmd::Kummer { input } => {
            let r = load(input)?;
            let classes = r.elements.iter().map(|f| d_class(&r.base, f)).collect::<Result<Vec<_>, _>>().map_err(input_err)?;
            let regular = kummer_regularity(&r.base, &r.elements, &r.exponents).map_err(input_err)?;
            Ok(Outcome::info(json!({ "regular": regular, "classes": classes, "exponents": r.exponents })))
        }
    }
}

/// Sets the global thread pool size from `PTLAB_THREADS` when present.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PTLAB_THREADS") {
        let n: usize = v.parse().map_err(|_| input_err(format!("PTLAB_THREADS={v:?} is not a number")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input_err(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Serializes the outcome and writes it to `--output` or stdout.
pub fn emit(outcome: &Outcome, cfg: &RunConfig) -> Result<(), CliError> {
    let text = to_canonical_json(&outcome.report);
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| input_err(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
