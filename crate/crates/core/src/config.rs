//! Experiment configuration: flat `key = value` lines, `#` comments.
//!
//! ```text
//! measure = ifs            # ifs | cantor | atomic
//! dim = 1
//! map = 1/3 0              # line: ratio shift [flip]
//! map = 1/3 2/3            # plane: ratio angle_deg tx ty [reflect]
//! depth = 10
//! density = const 1        # const c | list v1 v2 ... | expr <formula in x, y>
//! theorem = lp-lower-bound fractal-hardy
//! p = 2
//! l_grid = 16 11           # start count [ratio], ratio defaults to 2
//! ```
//!
//! Numbers may be written as fractions (`1/3`). Errors carry the line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::asymptotics::QuadratureSettings;
use crate::hardy::{TheoremId, DEFAULT_BAND_FACTOR};
use crate::measures::{BoundingBox, Similitude, DEFAULT_ATOM_BUDGET};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line, or 0 for whole-file problems.
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }

    pub fn global(message: impl Into<String>) -> Self {
        Self { line: 0, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    Ifs {
        maps: Vec<Similitude>,
        weights: Option<Vec<f64>>,
        bbox: Option<BoundingBox>,
        osc: bool,
        depth: u32,
    },
    Atomic {
        dim: usize,
        locations: Vec<f64>,
        weights: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Const(f64),
    List(Vec<f64>),
    /// Formula source, evaluated per atom with `x` (and `y` in the plane) bound.
    Expr(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub count: usize,
    pub ratio: f64,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        crate::numeric::geometric_grid(self.start, self.ratio, self.count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub measure: MeasureSpec,
    /// Overrides the similarity dimension; required for atomic measures
    /// unless only the discrete inequality is selected.
    pub alpha: Option<f64>,
    pub density: DensitySpec,
    pub theorems: Vec<TheoremId>,
    pub p: f64,
    pub l_grid: Grid,
    /// Decreasing scales for geometry and the M-norm.
    pub eps_grid: Grid,
    /// Frequencies for the transform sweep.
    pub xi_grid: Grid,
    pub quadrature: QuadratureSettings,
    pub ft_tol: f64,
    pub ft_max_depth: u32,
    pub band_factor: f64,
    pub ceiling: f64,
    pub hypothesis_level: u32,
    pub chaos_samples: usize,
    pub output: PathBuf,
    pub seed: u64,
    pub budget: usize,
    /// Resolved `key = value` pairs in file order, echoed into `meta.txt`.
    pub resolved: Vec<(String, String)>,
    /// First line of each key, for errors raised after parsing.
    pub key_lines: BTreeMap<String, usize>,
}

fn number(token: &str, line: usize) -> Result<f64> {
    let parsed = match token.split_once('/') {
        Some((a, b)) => match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(a), Ok(b)) if b != 0.0 => Ok(a / b),
            _ => Err(()),
        },
        None => token.parse::<f64>().map_err(|_| ()),
    };
    match parsed {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ConfigError::at(line, format!("'{token}' is not a finite number"))),
    }
}

fn numbers(value: &str, line: usize) -> Result<Vec<f64>> {
    value.split_whitespace().map(|t| number(t, line)).collect()
}

fn integer<T: std::str::FromStr>(value: &str, line: usize) -> Result<T> {
    value.trim().parse().map_err(|_| ConfigError::at(line, format!("'{value}' is not a nonnegative integer")))
}

fn flag(value: &str, line: usize) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::at(line, format!("'{value}' is not a boolean"))),
    }
}

const REPEATABLE: [&str; 2] = ["map", "atom"];
const KEYS: [&str; 27] = [
    "measure", "dim", "map", "weights", "osc", "box", "depth", "atom", "alpha", "density", "theorem", "p",
    "l_grid", "eps_grid", "xi_grid", "radial_samples", "samples_per_oscillation", "angular_order", "ft_tol",
    "ft_max_depth", "band_factor", "ceiling", "hypothesis_level", "chaos_samples", "output", "seed", "budget",
];

struct Entries {
    single: BTreeMap<String, (usize, String)>,
    repeated: BTreeMap<String, Vec<(usize, String)>>,
    ordered: Vec<(String, String)>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.single.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn all(&self, key: &str) -> &[(usize, String)] {
        self.repeated.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn line_of(&self, key: &str) -> usize {
        self.get(key).map(|(l, _)| l).or_else(|| self.all(key).first().map(|(l, _)| *l)).unwrap_or(0)
    }
}

fn scan(text: &str) -> Result<Entries> {
    let mut entries = Entries { single: BTreeMap::new(), repeated: BTreeMap::new(), ordered: Vec::new() };
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::at(line, format!("unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("key '{key}' has no value")));
        }
        entries.ordered.push((key.clone(), value.clone()));
        if REPEATABLE.contains(&key.as_str()) {
            entries.repeated.entry(key).or_default().push((line, value));
        } else if let Some((first, _)) = entries.single.get(&key) {
            return Err(ConfigError::at(line, format!("key '{key}' already set on line {first}")));
        } else {
            entries.single.insert(key, (line, value));
        }
    }
    Ok(entries)
}

fn parse_map(dim: usize, value: &str, line: usize) -> Result<Similitude> {
    let mut tokens: Vec<&str> = value.split_whitespace().collect();
    let mirrored = matches!(tokens.last(), Some(&("flip" | "reflect")));
    if mirrored {
        tokens.pop();
    }
    let v: Vec<f64> = tokens.iter().map(|t| number(t, line)).collect::<Result<_>>()?;
    let built = match (dim, v.as_slice()) {
        (1, [ratio, shift]) if mirrored => Similitude::line_flipped(*ratio, *shift),
        (1, [ratio, shift]) => Similitude::line(*ratio, *shift),
        (2, [ratio, angle, tx, ty]) => Similitude::planar(*ratio, angle.to_radians(), mirrored, [*tx, *ty]),
        (1, _) => return Err(ConfigError::at(line, "line maps are 'ratio shift [flip]'")),
        _ => return Err(ConfigError::at(line, "planar maps are 'ratio angle_deg tx ty [reflect]'")),
    };
    built.map_err(|e| ConfigError::at(line, e.to_string()))
}

fn parse_grid(value: &str, line: usize, default_ratio: f64) -> Result<Grid> {
    let v = numbers(value, line)?;
    let (start, count, ratio) = match v.as_slice() {
        [s, c] => (*s, *c, default_ratio),
        [s, c, r] => (*s, *c, *r),
        _ => return Err(ConfigError::at(line, "grids are 'start count [ratio]'")),
    };
    if !(start > 0.0) || count < 1.0 || count.fract() != 0.0 || !(ratio > 0.0) || ratio == 1.0 {
        return Err(ConfigError::at(line, "grid needs start > 0, integer count >= 1 and ratio > 0, != 1"));
    }
    Ok(Grid { start, count: count as usize, ratio })
}

fn parse_density(value: &str, line: usize) -> Result<DensitySpec> {
    let (kind, rest) = value.split_once(char::is_whitespace).unwrap_or((value, ""));
    let rest = rest.trim();
    match kind {
        "const" => {
            let c = number(rest, line)?;
            if c < 0.0 {
                return Err(ConfigError::at(line, "density must be nonnegative"));
            }
            Ok(DensitySpec::Const(c))
        }
        "list" => {
            let v = numbers(rest, line)?;
            if v.is_empty() || v.iter().any(|x| *x < 0.0) {
                return Err(ConfigError::at(line, "density list must be nonempty and nonnegative"));
            }
            Ok(DensitySpec::List(v))
        }
        "expr" => {
            evalexpr::build_operator_tree::<evalexpr::DefaultNumericTypes>(rest)
                .map_err(|e| ConfigError::at(line, format!("bad density expression: {e}")))?;
            Ok(DensitySpec::Expr(rest.to_string()))
        }
        _ => Err(ConfigError::at(line, "density is 'const c', 'list v1 v2 ...' or 'expr <formula>'")),
    }
}

/// Evaluates a density at every atom location.
pub fn density_values(spec: &DensitySpec, dim: usize, locations: &[f64]) -> std::result::Result<Vec<f64>, String> {
    let count = locations.len() / dim;
    match spec {
        DensitySpec::Const(c) => Ok(vec![*c; count]),
        DensitySpec::List(v) if v.len() == count => Ok(v.clone()),
        DensitySpec::List(v) => Err(format!("density list has {} values for {count} atoms", v.len())),
        DensitySpec::Expr(src) => {
            use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Value};
            let tree = evalexpr::build_operator_tree::<DefaultNumericTypes>(src).map_err(|e| e.to_string())?;
            let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
            locations
                .chunks_exact(dim)
                .map(|point| {
                    for (name, v) in ["x", "y"].iter().zip(point) {
                        ctx.set_value((*name).into(), Value::Float(*v)).map_err(|e| e.to_string())?;
                    }
                    let v = tree.eval_number_with_context(&ctx).map_err(|e| e.to_string())?;
                    if v.is_finite() && v >= 0.0 {
                        Ok(v)
                    } else {
                        Err(format!("density expression gives {v} at {point:?}"))
                    }
                })
                .collect()
        }
    }
}

fn parse_measure(e: &Entries) -> Result<MeasureSpec> {
    let (kind_line, kind) = e.get("measure").ok_or_else(|| ConfigError::global("missing key 'measure'"))?;
    let dim = match e.get("dim") {
        Some((l, v)) => {
            let d: usize = integer(v, l)?;
            if !(1..=2).contains(&d) {
                return Err(ConfigError::at(l, format!("dim must be 1 or 2, got {d}")));
            }
            d
        }
        None => 1,
    };
    let depth = match e.get("depth") {
        Some((l, v)) => integer(v, l)?,
        None => 8,
    };
    let forbid = |keys: &[&str]| -> Result<()> {
        for key in keys {
            if e.get(key).is_some() || !e.all(key).is_empty() {
                return Err(ConfigError::at(e.line_of(key), format!("key '{key}' does not apply to measure = {kind}")));
            }
        }
        Ok(())
    };
    match kind {
        "cantor" => {
            forbid(&["map", "weights", "box", "atom", "osc"])?;
            if dim != 1 {
                return Err(ConfigError::at(kind_line, "the Cantor measure lives on the line"));
            }
            let maps = vec![Similitude::line(1.0 / 3.0, 0.0), Similitude::line(1.0 / 3.0, 2.0 / 3.0)]
                .into_iter()
                .collect::<std::result::Result<Vec<_>, _>>()
                .expect("middle-thirds maps are valid");
            Ok(MeasureSpec::Ifs { maps, weights: None, bbox: None, osc: true, depth })
        }
        "ifs" => {
            forbid(&["atom"])?;
            let maps: Vec<Similitude> = e.all("map").iter().map(|(l, v)| parse_map(dim, v, *l)).collect::<Result<_>>()?;
            if maps.is_empty() {
                return Err(ConfigError::at(kind_line, "an ifs measure needs at least one 'map' line"));
            }
            let weights = e.get("weights").map(|(l, v)| numbers(v, l)).transpose()?;
            let bbox = match e.get("box") {
                Some((l, v)) => {
                    let b = numbers(v, l)?;
                    if b.len() != 2 * dim {
                        return Err(ConfigError::at(l, format!("box needs {} numbers: lo then hi", 2 * dim)));
                    }
                    Some(BoundingBox::new(b[..dim].to_vec(), b[dim..].to_vec()).map_err(|x| ConfigError::at(l, x.to_string()))?)
                }
                None => None,
            };
            let osc = e.get("osc").map(|(l, v)| flag(v, l)).transpose()?.unwrap_or(false);
            Ok(MeasureSpec::Ifs { maps, weights, bbox, osc, depth })
        }
        "atomic" => {
            forbid(&["map", "weights", "box", "osc", "depth"])?;
            let mut locations = Vec::new();
            let mut weights = Vec::new();
            for (l, v) in e.all("atom") {
                let values = numbers(v, *l)?;
                let (loc, w) = match values.len() {
                    x if x == dim + 1 => (&values[..dim], Complex64::new(values[dim], 0.0)),
                    x if x == dim + 2 => (&values[..dim], Complex64::new(values[dim], values[dim + 1])),
                    _ => return Err(ConfigError::at(*l, format!("atoms are {dim} coordinate(s), then weight re [im]"))),
                };
                locations.extend_from_slice(loc);
                weights.push(w);
            }
            if weights.is_empty() {
                return Err(ConfigError::at(kind_line, "an atomic measure needs at least one 'atom' line"));
            }
            Ok(MeasureSpec::Atomic { dim, locations, weights })
        }
        other => Err(ConfigError::at(kind_line, format!("unknown measure '{other}' (ifs, cantor, atomic)"))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let e = scan(text)?;
        let measure = parse_measure(&e)?;
        let num = |key: &str, default: f64| -> Result<f64> {
            e.get(key).map(|(l, v)| number(v.trim(), l)).transpose().map(|v| v.unwrap_or(default))
        };
        let int = |key: &str, default: u64| -> Result<u64> {
            e.get(key).map(|(l, v)| integer::<u64>(v, l)).transpose().map(|v| v.unwrap_or(default))
        };
        let alpha = e.get("alpha").map(|(l, v)| number(v, l)).transpose()?;
        let density = e.get("density").map(|(l, v)| parse_density(v, l)).transpose()?.unwrap_or(DensitySpec::Const(1.0));
        let theorems = match e.get("theorem") {
            Some((l, v)) => v
                .split_whitespace()
                .map(|t| t.parse::<TheoremId>().map_err(|m| ConfigError::at(l, m)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let grid = |key: &str, default: Grid, ratio: f64| -> Result<Grid> {
            e.get(key).map(|(l, v)| parse_grid(v, l, ratio)).transpose().map(|g| g.unwrap_or(default))
        };
        let defaults = QuadratureSettings::default();
        let quadrature = QuadratureSettings {
            radial_samples: int("radial_samples", defaults.radial_samples as u64)? as usize,
            samples_per_oscillation: num("samples_per_oscillation", defaults.samples_per_oscillation)?,
            angular_order: int("angular_order", defaults.angular_order as u64)? as usize,
        };
        let config = Self {
            measure,
            alpha,
            density,
            theorems,
            p: num("p", 2.0)?,
            l_grid: grid("l_grid", Grid { start: 16.0, count: 11, ratio: 2.0 }, 2.0)?,
            eps_grid: grid("eps_grid", Grid { start: 1.0 / 9.0, count: 5, ratio: 1.0 / 3.0 }, 0.5)?,
            xi_grid: grid("xi_grid", Grid { start: 1.0, count: 11, ratio: 4.0 }, 2.0)?,
            quadrature,
            ft_tol: num("ft_tol", 1e-12)?,
            ft_max_depth: int("ft_max_depth", 80)? as u32,
            band_factor: num("band_factor", DEFAULT_BAND_FACTOR)?,
            ceiling: num("ceiling", 1e12)?,
            hypothesis_level: int("hypothesis_level", 2)? as u32,
            chaos_samples: int("chaos_samples", 0)? as usize,
            output: e.get("output").map_or_else(|| PathBuf::from("out"), |(_, v)| PathBuf::from(v)),
            seed: int("seed", 0)?,
            budget: int("budget", DEFAULT_ATOM_BUDGET as u64)? as usize,
            resolved: e.ordered.clone(),
            key_lines: KEYS.iter().map(|k| (k.to_string(), e.line_of(k))).filter(|(_, l)| *l > 0).collect(),
        };
        config.check_ranges(&e)?;
        Ok(config)
    }

    fn check_ranges(&self, e: &Entries) -> Result<()> {
        let at = |key: &str, msg: String| Err(ConfigError::at(e.line_of(key), msg));
        if self.quadrature.radial_samples < 64 {
            return at("radial_samples", format!("radial_samples must be >= 64, got {}", self.quadrature.radial_samples));
        }
        if !(self.quadrature.samples_per_oscillation >= 2.0) {
            return at("samples_per_oscillation", "samples_per_oscillation must be >= 2".into());
        }
        if !(self.ft_tol > 0.0 && self.ft_tol < 1.0) {
            return at("ft_tol", format!("ft_tol must be in (0, 1), got {}", self.ft_tol));
        }
        if !(self.band_factor >= 1.0) {
            return at("band_factor", format!("band_factor must be >= 1, got {}", self.band_factor));
        }
        if !(self.ceiling > 0.0) {
            return at("ceiling", format!("ceiling must be positive, got {}", self.ceiling));
        }
        if !(self.p >= 1.0) {
            return at("p", format!("p must be at least 1, got {}", self.p));
        }
        if self.eps_grid.ratio >= 1.0 {
            return at("eps_grid", "eps_grid must decrease (ratio < 1)".into());
        }
        if self.l_grid.ratio <= 1.0 {
            return at("l_grid", "l_grid must increase (ratio > 1)".into());
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0 && a <= self.dim() as f64) {
                return at("alpha", format!("alpha must be in [0, {}], got {a}", self.dim()));
            }
        }
        Ok(())
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.key_lines.get(key).copied().unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        match &self.measure {
            MeasureSpec::Ifs { maps, .. } => maps[0].dim(),
            MeasureSpec::Atomic { dim, .. } => *dim,
        }
    }

    /// Checks each selected inequality's ranges for `p` and `alpha`, given the
    /// dimension actually used. Mirrors the checks of a verdict setup so a run
    /// fails before any expensive work.
    pub fn check_theorems(&self, alpha: Option<f64>) -> Result<()> {
        let e = self;
        let line = e.line_of("p").max(e.line_of("theorem"));
        let n = self.dim() as f64;
        for t in &self.theorems {
            if t.is_hardy() && !(1.0..=2.0).contains(&self.p) {
                return Err(ConfigError::at(line, format!("p = {} violates p in [1,2] required by {t}", self.p)));
            }
            if *t == TheoremId::DiscreteHardy {
                if n != 1.0 {
                    return Err(ConfigError::at(e.line_of("theorem"), format!("{t} needs a measure on the line")));
                }
                continue;
            }
            let a = alpha.ok_or_else(|| ConfigError::at(e.line_of("theorem"), format!("{t} needs 'alpha' for an atomic measure")))?;
            if !(a > 0.0 && a < n) {
                return Err(ConfigError::at(e.line_of("alpha").max(e.line_of("measure")), format!("alpha = {a} violates alpha in (0, n) required by {t}")));
            }
            if !t.is_hardy() && !(self.p >= 2.0 && self.p < 2.0 * n / a) {
                return Err(ConfigError::at(line, format!("p = {} violates p in [2, 2n/alpha) = [2, {}) required by {t}", self.p, 2.0 * n / a)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANTOR: &str = "\
# middle thirds
measure = ifs
map = 1/3 0
map = 1/3 2/3   # right piece
depth = 6
theorem = lp-lower-bound fractal-hardy
p = 2
l_grid = 16 5
";

    #[test]
    fn parses_a_cantor_config() {
        let c = ExperimentConfig::parse(CANTOR).unwrap();
        match &c.measure {
            MeasureSpec::Ifs { maps, depth, .. } => {
                assert_eq!(maps.len(), 2);
                assert_eq!(*depth, 6);
                assert!((maps[1].translation()[0] - 2.0 / 3.0).abs() < 1e-16);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.theorems, vec![TheoremId::LpLowerBound, TheoremId::FractalHardy]);
        assert_eq!(c.l_grid.values(), vec![16.0, 32.0, 64.0, 128.0, 256.0]);
        assert_eq!(c.density, DensitySpec::Const(1.0));
        assert_eq!(c.resolved.len(), 7);
    }

    #[test]
    fn errors_are_line_anchored() {
        let err = ExperimentConfig::parse("measure = cantor\nfoo = 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.to_string().starts_with("config line 2:"));
        let err = ExperimentConfig::parse("measure = cantor\np = two\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = ExperimentConfig::parse("measure = cantor\np = 2\np = 1\n").unwrap_err();
        assert!(err.message.contains("already set on line 2"));
        let err = ExperimentConfig::parse("measure = atomic\natom = 0 1\nmap = 1/3 0\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = ExperimentConfig::parse("p = 2\n").unwrap_err();
        assert_eq!(err.line, 0);
    }

    #[test]
    fn theorem_ranges_are_checked() {
        let text = "measure = cantor\ntheorem = fractal-hardy\np = 3\n";
        let c = ExperimentConfig::parse(text).unwrap();
        let err = c.check_theorems(Some(0.63)).unwrap_err();
        assert!(err.to_string().contains("p in [1,2]"), "{err}");
        assert_eq!(err.line, 3);
        let text = "measure = atomic\natom = 0 1\ntheorem = lp-lower-bound\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert!(c.check_theorems(None).unwrap_err().message.contains("alpha"));
    }

    #[test]
    fn atoms_and_densities() {
        let text = "measure = atomic\ndim = 2\natom = 0 0 1\natom = 1 0.5 0.25 -1\ndensity = expr x + 2 * y\n";
        let c = ExperimentConfig::parse(text).unwrap();
        let MeasureSpec::Atomic { locations, weights, .. } = &c.measure else { panic!() };
        assert_eq!(weights[1], Complex64::new(0.25, -1.0));
        assert_eq!(density_values(&c.density, 2, locations).unwrap(), vec![0.0, 2.0]);
        assert!(density_values(&DensitySpec::List(vec![1.0]), 2, locations).is_err());
        assert!(density_values(&DensitySpec::Expr("x - 5".into()), 2, locations).is_err());
        assert!(ExperimentConfig::parse("measure = cantor\ndensity = expr (((\n").is_err());
    }

    #[test]
    fn planar_maps() {
        let text = "measure = ifs\ndim = 2\nmap = 1/2 90 0 0\nmap = 1/2 0 1/2 0 reflect\nmap = 1/2 0 0 1/2\n";
        let c = ExperimentConfig::parse(text).unwrap();
        let MeasureSpec::Ifs { maps, .. } = &c.measure else { panic!() };
        assert_eq!(maps.len(), 3);
        assert!(ExperimentConfig::parse("measure = ifs\ndim = 2\nmap = 1/2 0 0\n").is_err());
    }

    #[test]
    fn fractions_and_grids() {
        assert_eq!(number("1/4", 1).unwrap(), 0.25);
        assert!(number("1/0", 1).is_err());
        assert!(parse_grid("0 3", 1, 2.0).is_err());
        assert!(parse_grid("1 2.5", 1, 2.0).is_err());
        assert_eq!(parse_grid("1/3 3 1/3", 1, 2.0).unwrap().values().len(), 3);
    }
}
