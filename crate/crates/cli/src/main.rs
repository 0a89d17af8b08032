//! `legsphere`: run verification suites, export fronts and plot tables, and
//! manipulate open-book descriptors.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage error, 3 I/O error.

mod output;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use legsphere::constructions::{
    disk_front as disk_family_front, lambda_double, s_join_model, s_stab_model, spin_grid, spun_unknot_front, unknot_meridian, CornerRho,
    ExactLagrangianDisk, FrontSample,
};
use legsphere::isotopy::{build_h_family, q_n1_t, slope_h, IsotopyParams};
use legsphere::openbook::OpenBookDesc;
use legsphere::suites::{run_suite, Suite, SuiteConfig};
use legsphere::Report;
use output::{float, floats, render, Format, Meta, Row, Target};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "legsphere", version, about = "Legendrian sphere constructions and their numerical certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite and write its reports.
    Verify {
        suite: SuiteArg,
        #[command(flatten)]
        common: Common,
        /// Samples per parameter grid.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Write sampled front projections of a construction.
    ExportFront {
        construction: Construction,
        #[command(flatten)]
        common: Common,
        /// Samples per parameter axis (default 400 for n = 1, 64 otherwise).
        /// At n = 1 the unknot and lambda fronts are closed loops.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Tabulate q_{n+1,t} and the slope curve over the t-grid.
    ExportPlots {
        #[command(flatten)]
        common: Common,
    },
    /// Build, rewrite and canonicalise open-book descriptors.
    Openbook {
        op: OpenbookOp,
        /// Descriptor in the one-line text form.
        #[arg(long, conflicts_with = "fixture")]
        input: Option<String>,
        /// Start from a built-in descriptor instead of --input.
        #[arg(long, value_enum)]
        fixture: Option<Fixture>,
        /// Disk (stabilize) or sphere (surgery, inverse) to act on.
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Sphere dimension, 1 to 4.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Surgery parameter, in (0, 0.5).
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    eps: f64,
    /// Number of points in the t-grid on [-1, 1].
    #[arg(long = "t-grid", default_value_t = 101)]
    t_grid: usize,
    /// Output file; `-` for standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the default output file when --out is absent.
    #[arg(long, env = "LEGSPHERE_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Output format (default csv for export-plots, json otherwise; text only for openbook).
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Tolerance of the finite-difference Legendrian checks (verify only).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Jet,
    Surgery,
    Chart,
    Isotopy,
    Constructions,
    Openbook,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Jet => Suite::Jet,
            SuiteArg::Surgery => Suite::Surgery,
            SuiteArg::Chart => Suite::Chart,
            SuiteArg::Isotopy => Suite::Isotopy,
            SuiteArg::Constructions => Suite::Constructions,
            SuiteArg::Openbook => Suite::Openbook,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Construction {
    Unknot,
    Sjoin,
    Sstab,
    Lambda,
    DiskFamily,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpenbookOp {
    /// Print the starting descriptor.
    Fixture,
    Stabilize,
    Surgery,
    /// Compose with an inverse twist.
    Inverse,
    Canonical,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fixture {
    Trivial,
    CotangentSphere,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] legsphere::Error),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("{failed} of {total} checks failed")]
    Failed { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use legsphere::Error as E;
        match self {
            CliError::Failed { .. } => 1,
            CliError::Core(E::Construction(_) | E::Singular(_)) => 1,
            CliError::Usage(_) | CliError::Core(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

impl Common {
    fn validate(&self) -> CliResult<()> {
        SuiteConfig::new(self.n, self.eps)?;
        if self.t_grid < 2 {
            return Err(CliError::Usage(format!("--t-grid needs at least 2 points, got {}", self.t_grid)));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    fn meta(&self) -> Meta {
        Meta { n: self.n, eps: self.eps, seed: self.seed, version: VERSION }
    }

    fn data_format(&self, default: Format) -> CliResult<Format> {
        match self.format {
            None => Ok(default),
            Some(OutFormat::Json) => Ok(Format::Json),
            Some(OutFormat::Csv) => Ok(Format::Csv),
            Some(OutFormat::Text) => Err(CliError::Usage("--format text is only available for openbook".into())),
        }
    }

    fn target(&self, stem: &str, ext: &str) -> Target {
        Target::resolve(self.out.clone(), self.out_dir.clone(), &format!("{stem}.{ext}"))
    }

    fn emit<R: Row>(&self, stem: &str, records: &[R], default: Format) -> CliResult<()> {
        let format = self.data_format(default)?;
        let bytes = render(&self.meta(), records, format)?;
        self.target(stem, format.extension()).write(&bytes)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Records

struct ReportRow<'a>(&'a Report);

impl Serialize for ReportRow<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl Row for ReportRow<'_> {
    fn header(&self) -> Vec<String> {
        ["check", "pass", "max_residual", "tol", "samples", "excluded", "note"].map(String::from).to_vec()
    }
    fn cells(&self) -> Vec<String> {
        let r = self.0;
        vec![
            r.check.clone(),
            r.pass.to_string(),
            float(r.max_residual),
            float(r.tol),
            r.samples.to_string(),
            r.excluded.to_string(),
            r.note.clone(),
        ]
    }
}

#[derive(Serialize)]
struct FrontRecord {
    t: Option<f64>,
    x_params: Vec<f64>,
    q: Vec<f64>,
    z: f64,
    cusp: bool,
}

impl FrontRecord {
    fn new(t: Option<f64>, s: &FrontSample) -> Self {
        let (z, q) = s.front.split_last().expect("front has a z coordinate");
        Self { t, x_params: s.base.clone(), q: q.to_vec(), z: *z, cusp: s.cusp }
    }
}

impl Row for FrontRecord {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend(floats("x", &self.x_params).0);
        h.extend(floats("q", &self.q).0);
        h.extend(["z".to_string(), "cusp".to_string()]);
        h
    }
    fn cells(&self) -> Vec<String> {
        let mut c = vec![self.t.map(float).unwrap_or_default()];
        c.extend(floats("x", &self.x_params).1);
        c.extend(floats("q", &self.q).1);
        c.extend([float(self.z), self.cusp.to_string()]);
        c
    }
}

#[derive(Serialize)]
struct PlotRow {
    t: f64,
    q_n1: f64,
    slope: f64,
}

impl Row for PlotRow {
    fn header(&self) -> Vec<String> {
        ["t", "q_n1", "slope"].map(String::from).to_vec()
    }
    fn cells(&self) -> Vec<String> {
        vec![float(self.t), float(self.q_n1), float(self.slope)]
    }
}

#[derive(Serialize)]
struct OpenbookRecord {
    op: String,
    descriptor: String,
    canonical: String,
}

impl Row for OpenbookRecord {
    fn header(&self) -> Vec<String> {
        ["op", "descriptor", "canonical"].map(String::from).to_vec()
    }
    fn cells(&self) -> Vec<String> {
        vec![self.op.clone(), self.descriptor.clone(), self.canonical.clone()]
    }
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_verify(suite: SuiteArg, common: &Common, samples: usize) -> CliResult<()> {
    common.validate()?;
    let mut cfg = SuiteConfig::new(common.n, common.eps)?;
    cfg.t_count = common.t_grid;
    cfg.seed = common.seed;
    cfg.grid = samples;
    if let Some(tol) = common.tol {
        cfg.tol = tol;
    }
    let suite = Suite::from(suite);
    let reports = run_suite(suite, &cfg)?;
    for r in &reports {
        eprintln!("{}", r.line());
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    eprintln!("{} checks, {} failed", reports.len(), failed);
    let rows: Vec<ReportRow> = reports.iter().map(ReportRow).collect();
    common.emit(&format!("verify-{suite}"), &rows, Format::Json)?;
    if failed > 0 {
        return Err(CliError::Failed { failed, total: reports.len() });
    }
    Ok(())
}

fn front_records(construction: Construction, common: &Common, samples: Option<usize>) -> CliResult<Vec<FrontRecord>> {
    let n = common.n;
    let eps = common.eps;
    let axis = samples.unwrap_or(if n == 1 { 400 } else { 64 });
    if axis < 4 {
        return Err(CliError::Usage(format!("--samples needs at least 4, got {axis}")));
    }
    let count = axis.pow(n.min(2) as u32);
    let plain = |v: Vec<FrontSample>| v.iter().map(|s| FrontRecord::new(None, s)).collect::<Vec<_>>();
    Ok(match construction {
        Construction::Unknot if n == 1 => plain(unknot_meridian(1, axis)),
        Construction::Unknot => plain(spun_unknot_front(n, &spin_grid(n, axis, axis))?),
        Construction::Sjoin => {
            let h = build_h_family(eps, &[-1.0])?;
            plain(s_join_model(h.profile(-1.0)?, n, eps)?.front_samples(count))
        }
        Construction::Sstab => plain(s_stab_model(n, eps)?.front_samples(count)),
        Construction::Lambda => {
            let disk = ExactLagrangianDisk::standard_filling(n, 0.9)?;
            let double = lambda_double(disk, std::sync::Arc::new(CornerRho::default()))?;
            if n == 1 {
                plain(double.sphere.meridian(axis))
            } else {
                plain(double.sphere.front_samples(count))
            }
        }
        Construction::DiskFamily => {
            let params = IsotopyParams::new(n, eps)?;
            legsphere::grids::t_grid(common.t_grid)
                .into_iter()
                .flat_map(|t| disk_family_front(t, &params, count).into_iter().map(move |s| FrontRecord::new(Some(t), &s)))
                .collect()
        }
    })
}

fn cmd_export_front(construction: Construction, common: &Common, samples: Option<usize>) -> CliResult<()> {
    common.validate()?;
    common.data_format(Format::Json)?;
    let records = front_records(construction, common, samples)?;
    let stem = format!("front-{}", construction.to_possible_value().expect("named").get_name());
    common.emit(&stem, &records, Format::Json)
}

fn plot_rows(eps: f64, t_count: usize) -> Vec<PlotRow> {
    legsphere::grids::t_grid(t_count)
        .into_iter()
        .map(|t| PlotRow { t, q_n1: q_n1_t(t, eps), slope: slope_h(t, eps) })
        .collect()
}

fn cmd_export_plots(common: &Common) -> CliResult<()> {
    common.validate()?;
    common.emit("plots", &plot_rows(common.eps, common.t_grid), Format::Csv)
}

fn cmd_openbook(
    op: OpenbookOp,
    input: Option<&str>,
    fixture: Option<Fixture>,
    label: Option<&str>,
    common: &Common,
) -> CliResult<()> {
    common.validate()?;
    let start = match (input, fixture) {
        (Some(text), _) => text.parse::<OpenBookDesc>()?,
        (None, Some(Fixture::CotangentSphere)) => OpenBookDesc::cotangent_sphere(common.n),
        (None, _) => OpenBookDesc::trivial(common.n),
    };
    let need = |what: &str| label.ok_or_else(|| CliError::Usage(format!("{what} needs --label")));
    let result = match op {
        OpenbookOp::Fixture | OpenbookOp::Canonical => start,
        OpenbookOp::Stabilize => start.stabilize(need("stabilize")?)?,
        OpenbookOp::Surgery => start.surgery_rewrite(need("surgery")?)?,
        OpenbookOp::Inverse => start.twist(need("inverse")?, -1)?,
    };
    let record = OpenbookRecord {
        op: op.to_possible_value().expect("named").get_name().to_string(),
        descriptor: match op {
            OpenbookOp::Canonical => result.canonical_text(),
            _ => result.to_string(),
        },
        canonical: result.canonical_text(),
    };
    if common.format == Some(OutFormat::Text) {
        let line = format!("{}\n", record.descriptor);
        common.target("openbook", "txt").write(line.as_bytes())?;
        return Ok(());
    }
    common.emit("openbook", &[record], Format::Json)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Verify { suite, common, samples } => cmd_verify(suite, &common, samples),
        Command::ExportFront { construction, common, samples } => cmd_export_front(construction, &common, samples),
        Command::ExportPlots { common } => cmd_export_plots(&common),
        Command::Openbook { op, input, fixture, label, common } => {
            cmd_openbook(op, input.as_deref(), fixture, label.as_deref(), &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("legsphere: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_anchor_rows() {
        let rows = plot_rows(0.1, 101);
        let find = |t: f64| rows.iter().find(|r| r.t == t).unwrap();
        let (a, b, c) = (find(1.0), find(0.0), find(-1.0));
        assert!((a.q_n1 + 0.1).abs() < 1e-12 && a.slope.abs() < 1e-12);
        assert!(b.q_n1.abs() < 1e-12 && (b.slope - 1.0).abs() < 1e-12);
        assert!((c.q_n1 - 0.1).abs() < 1e-12 && c.slope.abs() < 1e-12);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(legsphere::Error::Argument("x".into())).exit_code(), 2);
        assert_eq!(CliError::Io(io::Error::other("x")).exit_code(), 3);
        assert_eq!(CliError::Failed { failed: 1, total: 2 }.exit_code(), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
