//! Runs a configured experiment and writes its tables.
//!
//! Files carry `#` header lines describing the measure and parameters but
//! nothing about the host or thread count, so repeated runs are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::asymptotics::{
    ball_average_series, gaussian_average_series, lau_b_norm, lau_m_norm, AsymptoticSeries, AsymptoticsError,
};
use crate::config::{density_values, ConfigError, DensitySpec, ExperimentConfig, MeasureSpec};
use crate::fourier::{ft_atomic, ft_self_similar, FourierError, TransformRequest};
use crate::geometry::{
    covering_number, minkowski_content, neighborhood_volume, packing_number, PointCloud, CONTENT_GRID_FRACTION,
};
use crate::hardy::{
    density_l2_sq, fractal_hardy_lhs, hardy_sum, hypothesis_note, verify_inequality, HardyError, HardySetup,
    TheoremId, VerdictReport,
};
use crate::measures::{AtomicMeasure, IfsMeasure, MeasureError, WeightedMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dimension,
    Geometry,
    Fourier,
    Asymptotics,
    Hardy,
    Verify,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dimension => "dimension",
            Command::Geometry => "geometry",
            Command::Fourier => "fourier",
            Command::Asymptotics => "asymptotics",
            Command::Hardy => "hardy",
            Command::Verify => "verify",
            Command::All => "all",
        }
    }

    fn includes(self, part: Command) -> bool {
        self == part || self == Command::All
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("computation budget exceeded: {0}")]
    Budget(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 2 for invalid input, 3 for budget, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Budget(_) => 3,
            RunError::Io { .. } => 4,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

fn invalid(line: usize, msg: impl ToString) -> RunError {
    RunError::Config(ConfigError::at(line, msg.to_string()))
}

fn from_fourier(e: FourierError) -> RunError {
    match e {
        FourierError::FrontierTooLarge(_) | FourierError::QuadratureBudget { .. } | FourierError::DepthExceeded(_) => {
            RunError::Budget(e.to_string())
        }
        other => invalid(0, other),
    }
}

fn from_asymptotics(e: AsymptoticsError) -> RunError {
    match e {
        AsymptoticsError::Fourier(f) => from_fourier(f),
        other => invalid(0, other),
    }
}

fn from_hardy(e: HardyError) -> RunError {
    match e {
        HardyError::Asymptotics(a) => from_asymptotics(a),
        other => invalid(0, other),
    }
}

/// Measure objects built from a config.
pub struct Prepared {
    pub ifs: Option<IfsMeasure>,
    pub weighted: WeightedMeasure,
    pub alpha: Option<f64>,
    pub summary: String,
}

impl Prepared {
    pub fn base(&self) -> &AtomicMeasure {
        self.weighted.base()
    }
}

/// Builds the measures, validating every theorem range before discretizing.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let measure_line = config.line_of("measure");
    let (ifs, alpha) = match &config.measure {
        MeasureSpec::Ifs { maps, weights, bbox, osc, .. } => {
            let ifs = IfsMeasure::new(maps.clone(), weights.clone(), bbox.clone(), *osc)
                .map_err(|e| invalid(measure_line, e))?;
            let alpha = config.alpha.unwrap_or(ifs.dimension());
            (Some(ifs), Some(alpha))
        }
        MeasureSpec::Atomic { .. } => (None, config.alpha),
    };
    config.check_theorems(alpha)?;
    let base = match (&config.measure, &ifs) {
        (MeasureSpec::Ifs { depth, .. }, Some(ifs)) => ifs.cylinder_approx(*depth, config.budget).map_err(|e| match e {
            MeasureError::BudgetExceeded { .. } => RunError::Budget(e.to_string()),
            other => invalid(config.line_of("depth"), other),
        })?,
        (MeasureSpec::Atomic { dim, locations, weights }, _) => {
            AtomicMeasure::new(*dim, locations.clone(), weights.clone()).map_err(|e| invalid(config.line_of("atom"), e))?
        }
        _ => unreachable!("ifs spec always builds an ifs measure"),
    };
    let density =
        density_values(&config.density, base.dim(), base.locations()).map_err(|m| invalid(config.line_of("density"), m))?;
    let atoms = base.len();
    let weighted = WeightedMeasure::new(base, density).map_err(|e| invalid(config.line_of("density"), e))?;
    let mut summary = match (&config.measure, &ifs) {
        (MeasureSpec::Ifs { depth, .. }, Some(ifs)) => format!(
            "ifs dim={} maps={} depth={depth} atoms={atoms} osc_asserted={}",
            ifs.dim(),
            ifs.maps().len(),
            ifs.osc_asserted()
        ),
        _ => format!("atomic dim={} atoms={atoms}", weighted.base().dim()),
    };
    if let Some(a) = alpha {
        let _ = write!(summary, " alpha={a:.12}");
    }
    Ok(Prepared { ifs, weighted, alpha, summary })
}

/// What a run produced.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub written: Vec<PathBuf>,
    pub reports: Vec<VerdictReport>,
    /// Every verdict stable with empirical C under the ceiling.
    pub all_pass: bool,
    pub summary: String,
}

struct Writer<'a> {
    root: &'a Path,
    header: Vec<String>,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, relative: &str, extra_header: &[String], body: &str) -> Result<()> {
        let path = self.root.join(relative);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
        }
        let mut text = String::new();
        for line in self.header.iter().chain(extra_header) {
            let _ = writeln!(text, "# {line}");
        }
        text.push_str(body);
        fs::write(&path, text).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }
}

fn density_label(spec: &DensitySpec) -> String {
    match spec {
        DensitySpec::Const(c) => format!("const {c}"),
        DensitySpec::List(v) => format!("list of {} values", v.len()),
        DensitySpec::Expr(src) => format!("expr {src}"),
    }
}

fn theorem_header(t: TheoremId, n: usize, alpha: f64, p: f64) -> Vec<String> {
    vec![format!("theorem: {t}"), format!("p = {p}, alpha = {alpha:.12}, k = {:.12}", t.exponent(n, alpha, p))]
}

/// Runs `command`; the output directory is `config.output`.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<RunOutcome> {
    let prepared = prepare(config)?;
    let mut w = Writer {
        root: &config.output,
        header: vec![
            format!("fraclab {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", command.name()),
            format!("measure: {}", prepared.summary),
            format!("density: {}", density_label(&config.density)),
        ],
        written: Vec::new(),
    };
    let mut outcome = RunOutcome { all_pass: true, ..Default::default() };
    let mut summary = String::new();

    if command.includes(Command::Dimension) {
        dimension_table(config, &prepared, &mut w, &mut summary)?;
    }
    if command.includes(Command::Geometry) {
        geometry_table(config, &prepared, &mut w, &mut summary)?;
    }
    if command.includes(Command::Fourier) {
        fourier_table(config, &prepared, &mut w, &mut summary)?;
    }
    if command.includes(Command::Asymptotics) {
        asymptotics_tables(config, &prepared, &mut w, &mut summary)?;
    }
    if command.includes(Command::Hardy) {
        hardy_table(config, &prepared, &mut w, &mut summary)?;
    }
    if command.includes(Command::Verify) {
        for &theorem in &config.theorems {
            let report = verdict(config, &prepared, theorem, &mut w)?;
            let pass = report.stable && report.empirical_c < config.ceiling;
            outcome.all_pass &= pass;
            let _ = writeln!(
                summary,
                "{theorem}: lhs {:.6e}, band [{:.6e}, {:.6e}], C {:.6e}, {}",
                report.lhs,
                report.rhs_series.liminf_est,
                report.rhs_series.limsup_est,
                report.empirical_c,
                if pass { "stable" } else { "UNSTABLE" }
            );
            outcome.reports.push(report);
        }
    }

    let mut meta = String::new();
    let _ = writeln!(meta, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(meta, "threads = {}", rayon::current_num_threads());
    let _ = writeln!(meta, "seed = {}", config.seed);
    let _ = writeln!(meta, "budget = {}", config.budget);
    let _ = writeln!(meta, "output = {}", config.output.display());
    for (key, value) in &config.resolved {
        let _ = writeln!(meta, "config.{key} = {value}");
    }
    w.write("meta.txt", &[], &meta)?;

    outcome.written = w.written;
    outcome.summary = summary;
    Ok(outcome)
}

fn dimension_table(config: &ExperimentConfig, prepared: &Prepared, w: &mut Writer, summary: &mut String) -> Result<()> {
    let ifs = prepared
        .ifs
        .as_ref()
        .ok_or_else(|| invalid(config.line_of("measure"), "the dimension command needs an ifs or cantor measure"))?;
    let mut body = String::from("map,ratio\n");
    for (j, m) in ifs.maps().iter().enumerate() {
        let _ = writeln!(body, "{j},{:.17e}", m.ratio());
    }
    let extra = vec![
        format!("similarity dimension = {:.17e}", ifs.dimension()),
        format!("moran residual = {:.3e}", ifs.moran_residual()),
    ];
    w.write("dimension.csv", &extra, &body)?;
    let _ = writeln!(summary, "similarity dimension {:.12} (residual {:.1e})", ifs.dimension(), ifs.moran_residual());
    Ok(())
}

fn geometry_table(config: &ExperimentConfig, prepared: &Prepared, w: &mut Writer, summary: &mut String) -> Result<()> {
    let cloud = if config.chaos_samples > 0 {
        let ifs = prepared
            .ifs
            .as_ref()
            .ok_or_else(|| invalid(config.line_of("chaos_samples"), "chaos_samples needs an ifs measure"))?;
        PointCloud::from_points(&ifs.chaos_game_sample(config.chaos_samples, config.seed))
    } else {
        PointCloud::from_measure(prepared.base())
    }
    .map_err(|e| invalid(0, e))?;
    let resolution = cloud.resolution();
    let epsilons: Vec<f64> = config.eps_grid.values().into_iter().filter(|&e| e > resolution).collect();
    if epsilons.len() < config.eps_grid.count {
        log::warn!(
            "dropped {} epsilons at or below the cloud resolution {resolution:e}",
            config.eps_grid.count - epsilons.len()
        );
    }
    if epsilons.is_empty() {
        return Err(invalid(config.line_of("eps_grid"), format!("every epsilon is below the cloud resolution {resolution:e}")));
    }
    let alpha = prepared.alpha.unwrap_or(0.0);
    let content = minkowski_content(&cloud, alpha, &epsilons).map_err(|e| invalid(config.line_of("alpha"), e))?;
    let mut body = String::from("epsilon,volume,covering,packing,content\n");
    for (eps, value) in epsilons.iter().zip(&content.values) {
        let volume = neighborhood_volume(&cloud, *eps, eps * CONTENT_GRID_FRACTION).map_err(|e| invalid(0, e))?;
        let cover = covering_number(&cloud, *eps).map_err(|e| invalid(0, e))?;
        let pack = packing_number(&cloud, *eps).map_err(|e| invalid(0, e))?;
        let _ = writeln!(body, "{eps:.17e},{volume:.17e},{cover},{pack},{value:.17e}");
    }
    let extra = vec![
        format!("points = {}, alpha = {alpha:.12}", cloud.len()),
        format!("content band over the last quarter: [{:.12e}, {:.12e}]", content.lower_est, content.upper_est),
    ];
    w.write("geometry.csv", &extra, &body)?;
    let _ = writeln!(summary, "minkowski content band [{:.6e}, {:.6e}]", content.lower_est, content.upper_est);
    Ok(())
}

fn fourier_table(config: &ExperimentConfig, prepared: &Prepared, w: &mut Writer, summary: &mut String) -> Result<()> {
    let base = prepared.base();
    let n = base.dim();
    let mut body = String::from("xi,re,im,abs,atomic_abs\n");
    let mut last = 0.0;
    for xi in config.xi_grid.values() {
        let mut point = vec![0.0; n];
        point[0] = xi;
        let atomic = ft_atomic(base, &point).map_err(from_fourier)?;
        let value = match &prepared.ifs {
            Some(ifs) => {
                ft_self_similar(ifs, &TransformRequest::new(point, config.ft_tol, config.ft_max_depth)).map_err(from_fourier)?
            }
            None => atomic,
        };
        last = value.norm();
        let _ = writeln!(body, "{xi:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", value.re, value.im, last, atomic.norm());
    }
    let extra = vec!["transform of the unweighted measure along the first axis".to_string()];
    w.write("fourier.csv", &extra, &body)?;
    let _ = writeln!(summary, "fourier sweep: {} frequencies, |mu^| = {last:.6e} at the largest", config.xi_grid.count);
    Ok(())
}

fn series_body(series: &AsymptoticSeries) -> String {
    // header lines are added by the writer
    let csv = series.to_csv(&[]);
    csv.lines().filter(|l| !l.starts_with('#')).fold(String::new(), |mut acc, l| {
        acc.push_str(l);
        acc.push('\n');
        acc
    })
}

fn ball_theorems(config: &ExperimentConfig) -> impl Iterator<Item = TheoremId> + '_ {
    config.theorems.iter().copied().filter(|t| *t != TheoremId::DiscreteHardy)
}

fn asymptotics_tables(config: &ExperimentConfig, prepared: &Prepared, w: &mut Writer, summary: &mut String) -> Result<()> {
    let grid = config.l_grid.values();
    let n = prepared.base().dim();
    let alpha = prepared.alpha.unwrap_or(0.0);
    for t in ball_theorems(config) {
        let k = t.exponent(n, alpha, config.p);
        let header = theorem_header(t, n, alpha, config.p);
        let ball = ball_average_series(&prepared.weighted, &grid, config.p, k, config.quadrature).map_err(from_asymptotics)?;
        w.write(&format!("{t}/series.csv"), &header, &series_body(&ball))?;
        let gauss =
            gaussian_average_series(&prepared.weighted, &grid, config.p, k, config.quadrature).map_err(from_asymptotics)?;
        w.write(&format!("{t}/gaussian.csv"), &header, &series_body(&gauss))?;
        let _ = writeln!(summary, "{t}: ball band [{:.6e}, {:.6e}]", ball.liminf_est, ball.limsup_est);
    }
    if prepared.alpha.is_some() {
        let product = prepared.weighted.product_measure();
        let mut body = String::from("norm,value\n");
        let b_grid: Vec<f64> = grid.iter().copied().filter(|&l| l >= 1.0).collect();
        if !b_grid.is_empty() {
            let b = lau_b_norm(&prepared.weighted, alpha, config.p, &b_grid, config.quadrature).map_err(from_asymptotics)?;
            let _ = writeln!(body, "B,{b:.17e}");
        }
        let deltas: Vec<f64> = config.eps_grid.values().into_iter().filter(|&d| d <= 1.0).collect();
        if !deltas.is_empty() {
            let m = lau_m_norm(&product, alpha, config.p, &deltas).map_err(from_asymptotics)?;
            let _ = writeln!(body, "M,{m:.17e}");
        }
        let extra = vec![format!("p = {}, alpha = {alpha:.12}; grid lower bounds for the sup norms", config.p)];
        w.write("norms.csv", &extra, &body)?;
    }
    Ok(())
}

fn lhs_of(theorem: TheoremId, measure: &WeightedMeasure, p: f64) -> Result<f64> {
    Ok(match theorem {
        TheoremId::DiscreteHardy => hardy_sum(measure.product_measure().weights(), p),
        TheoremId::FractalHardy => fractal_hardy_lhs(measure, p).map_err(from_hardy)?,
        TheoremId::L2Density => density_l2_sq(measure).map_err(from_hardy)?.powf(p / 2.0),
        _ => density_l2_sq(measure).map_err(from_hardy)?,
    })
}

fn hardy_table(config: &ExperimentConfig, prepared: &Prepared, w: &mut Writer, summary: &mut String) -> Result<()> {
    let mut body = String::from("theorem,p,lhs\n");
    for &t in &config.theorems {
        let lhs = lhs_of(t, &prepared.weighted, config.p)?;
        let _ = writeln!(body, "{t},{},{lhs:.17e}", config.p);
        let _ = writeln!(summary, "{t}: lhs {lhs:.12e}");
    }
    w.write("hardy.csv", &[format!("p = {}", config.p)], &body)
}

fn verdict(config: &ExperimentConfig, prepared: &Prepared, theorem: TheoremId, w: &mut Writer) -> Result<VerdictReport> {
    let n = prepared.base().dim();
    let alpha = prepared.alpha.unwrap_or(0.0);
    let mut setup = HardySetup::new(theorem, prepared.weighted.clone(), alpha, config.p, config.l_grid.values())
        .map_err(|e| invalid(config.line_of("theorem"), e))?;
    setup.quadrature = config.quadrature;
    setup.band_factor = config.band_factor;
    let mut report = verify_inequality(&setup).map_err(from_hardy)?;
    if theorem != TheoremId::DiscreteHardy {
        if let Some(ifs) = &prepared.ifs {
            report.notes.push(format!("open set condition asserted by the config: {}", ifs.osc_asserted()));
        }
        let product = prepared.weighted.product_measure();
        let epsilons: Vec<f64> = config.eps_grid.values();
        report.notes.push(hypothesis_note(&product, alpha, config.hypothesis_level, &epsilons));
    }
    let header = theorem_header(theorem, n, alpha, config.p);
    w.write(&format!("{theorem}/series.csv"), &header, &series_body(&report.rhs_series))?;
    w.write(
        &format!("{theorem}/verdict.csv"),
        &header,
        &format!("{}\n{}\n", VerdictReport::CSV_HEADER, report.csv_row()),
    )?;
    w.write(&format!("{theorem}/verdict.txt"), &header, &report.text())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str, out: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::parse(text).unwrap();
        c.output = out.to_path_buf();
        c
    }

    #[test]
    fn single_atom_discrete_hardy_run() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("measure = atomic\natom = 0 1\ntheorem = discrete-hardy\np = 1\nl_grid = 1 6\n", dir.path());
        let out = run(Command::Verify, &c).unwrap();
        assert!(out.all_pass);
        assert!((out.reports[0].empirical_c - 0.5).abs() < 1e-12);
        let verdict = fs::read_to_string(dir.path().join("discrete-hardy/verdict.csv")).unwrap();
        assert!(verdict.starts_with("# fraclab"));
        assert!(dir.path().join("meta.txt").exists());
    }

    #[test]
    fn budget_and_range_errors_map_to_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("measure = cantor\ndepth = 30\nbudget = 1000\n", dir.path());
        assert_eq!(run(Command::Hardy, &c).unwrap_err().exit_code(), 3);
        let c = config("measure = cantor\ntheorem = fractal-hardy\np = 3\n", dir.path());
        let err = run(Command::Verify, &c).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("p in [1,2]"));
    }

    #[test]
    fn all_command_writes_every_table() {
        let dir = tempfile::tempdir().unwrap();
        let text = "measure = cantor\ndepth = 6\ntheorem = lp-lower-bound fractal-hardy\np = 2\nl_grid = 16 4\n\
                    eps_grid = 1/9 3 1/3\nxi_grid = 1 4 10\n";
        let out = run(Command::All, &config(text, dir.path())).unwrap();
        for f in [
            "dimension.csv",
            "geometry.csv",
            "fourier.csv",
            "norms.csv",
            "hardy.csv",
            "lp-lower-bound/series.csv",
            "lp-lower-bound/gaussian.csv",
            "fractal-hardy/verdict.txt",
        ] {
            assert!(dir.path().join(f).exists(), "{f} missing");
        }
        assert_eq!(out.reports.len(), 2);
        let series = fs::read_to_string(dir.path().join("lp-lower-bound/series.csv")).unwrap();
        assert_eq!(series.lines().filter(|l| !l.starts_with('#')).count(), 5);
    }
}
