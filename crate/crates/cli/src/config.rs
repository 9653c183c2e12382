//! Scenario files: TOML text to a validated scenario or a list of
//! diagnostics with line numbers.

use std::fmt;

use layerheat::eigen::SpectralProblem;
use layerheat::field::{BumpField, GaussianBump};
use layerheat::heat::HeatScenario;
use layerheat::media::{InterfaceConditions, InterfaceCoupling, LayeredMedium};
use layerheat::quadrature::QuadratureSpec;
use layerheat::transforms::{calibrate, SpectralWeightMode};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line in the config text, when one can be pinned down.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    transverse_dim: usize,
    times: Vec<f64>,
    output: Option<String>,
    medium: RawMedium,
    coupling: Option<RawCoupling>,
    #[serde(default)]
    initial: Vec<RawBump>,
    probes: RawProbes,
    #[serde(default)]
    quadrature: RawQuadrature,
    #[serde(default)]
    weight: RawWeight,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMedium {
    #[serde(default)]
    interfaces: Vec<f64>,
    diffusivity: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawCoupling {
    Ideal { nu: f64 },
    Explicit { interface: Vec<RawConditions> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConditions {
    alpha: [[f64; 2]; 2],
    beta: [[f64; 2]; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBump {
    layer: usize,
    #[serde(default = "one")]
    amplitude: f64,
    center: Vec<f64>,
    sigma: OneOrMany,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Axis {
    List(Vec<f64>),
    Range { from: f64, to: f64, count: usize },
}

impl Axis {
    fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            Axis::List(v) if v.is_empty() => Err("empty coordinate list".into()),
            Axis::List(v) => Ok(v.clone()),
            Axis::Range { count: 0, .. } => Err("range count must be positive".into()),
            Axis::Range { from, count: 1, .. } => Ok(vec![*from]),
            Axis::Range { from, to, count } => {
                Ok((0..*count).map(|k| from + (to - from) * k as f64 / (*count - 1) as f64).collect())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbes {
    x: Option<Axis>,
    y: Option<Vec<Axis>>,
    points: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    finite_nodes: Option<usize>,
    rho_truncation: Option<f64>,
    rho_nodes: Option<usize>,
    alpha_nodes: Option<usize>,
    tau_schedule: Option<Vec<f64>>,
    t_schedule: Option<Vec<f64>>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    max_refinements: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    #[serde(default)]
    mode: WeightChoice,
    c: Option<f64>,
    p: Option<f64>,
}

/// How the inversion weight is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    /// Fit `(c, p)` with the calibration protocol, then self-test.
    #[default]
    Calibrated,
    /// `(1/2π) ρ^{m/2+1}` without fitting.
    Standard,
    PaperLiteral,
    Custom,
}

/// A parsed, validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub problem: SpectralProblem,
    pub initial: BumpField,
    pub times: Vec<f64>,
    pub points: Vec<(f64, Vec<f64>)>,
    pub spec: QuadratureSpec,
    pub weight: WeightChoice,
    /// Constants for [`WeightChoice::Custom`].
    pub custom: Option<(f64, f64)>,
    pub output: Option<String>,
}

impl ScenarioConfig {
    pub fn m(&self) -> usize {
        self.problem.medium.transverse_dim
    }

    /// The inversion weight, running calibration when asked to.
    pub fn weight_mode(&self) -> layerheat::Result<SpectralWeightMode> {
        let m = self.m();
        match self.weight {
            WeightChoice::Calibrated => {
                let report = calibrate(m, &self.spec)?;
                SpectralWeightMode::calibrated(report.best.0, report.best.1, m, &self.spec)
            }
            WeightChoice::Standard => SpectralWeightMode::standard(m, &self.spec),
            WeightChoice::PaperLiteral => Ok(SpectralWeightMode::PaperLiteral),
            WeightChoice::Custom => {
                let (c, p) = self.custom.expect("custom constants are checked at parse time");
                Ok(SpectralWeightMode::Calibrated { c, p })
            }
        }
    }

    pub fn scenario(&self, mode: SpectralWeightMode) -> layerheat::Result<HeatScenario<'_>> {
        HeatScenario::new(self.problem.clone(), &self.initial, self.times.clone(), &self.points, mode, self.spec.clone())
    }
}

/// Line of `key = …` inside the `occurrence`-th `[section]` or
/// `[[section]]` table, or of the table header when the key is absent.
fn locate(text: &str, section: &str, occurrence: usize, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut seen = 0usize;
    let mut header = None;
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section {
                seen += 1;
                if seen == occurrence + 1 {
                    header = Some(n + 1);
                }
            }
            continue;
        }
        let in_table = if section.is_empty() { current.is_empty() } else { current == section && seen == occurrence + 1 };
        if let (true, Some(k)) = (in_table, key) {
            if t.split('=').next().is_some_and(|lhs| lhs.trim() == k) && t.contains('=') {
                return Some(n + 1);
            }
        }
    }
    header
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parse and validate a scenario file. Never panics; every problem found
/// is reported.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let raw: Raw = toml::from_str(text).map_err(|e| {
        vec![ConfigError { line: e.span().map(|s| line_at(text, s.start)), message: e.message().trim().to_string() }]
    })?;
    let mut errors = Vec::new();
    let mut err = |line: Option<usize>, message: String| errors.push(ConfigError { line, message });
    let m = raw.transverse_dim;

    let medium = match LayeredMedium::new(raw.medium.interfaces.clone(), raw.medium.diffusivity.clone(), m) {
        Ok(md) => Some(md),
        Err(e) => {
            let key = if e.to_string().contains("transverse") { None } else { Some("interfaces") };
            let line = match key {
                Some(k) => locate(text, "medium", 0, Some(k)),
                None => locate(text, "", 0, Some("transverse_dim")),
            };
            err(line, format!("medium: {e}"));
            None
        }
    };
    let n_if = raw.medium.interfaces.len();
    let coupling = match &raw.coupling {
        None if n_if == 0 => Some(InterfaceCoupling { interfaces: vec![] }),
        None => {
            err(locate(text, "medium", 0, None), "a [coupling] table is required when the medium has interfaces".into());
            None
        }
        Some(RawCoupling::Ideal { nu }) => match InterfaceCoupling::ideal_contact(*nu, n_if) {
            Ok(c) => Some(c),
            Err(e) => {
                err(locate(text, "coupling", 0, Some("nu")), format!("coupling.nu: {e}"));
                None
            }
        },
        Some(RawCoupling::Explicit { interface }) => {
            if interface.len() != n_if {
                err(
                    locate(text, "coupling", 0, None),
                    format!("coupling lists {} interfaces, medium has {n_if}", interface.len()),
                );
                None
            } else {
                Some(InterfaceCoupling {
                    interfaces: interface.iter().map(|c| InterfaceConditions { alpha: c.alpha, beta: c.beta }).collect(),
                })
            }
        }
    };
    let problem = match (medium, coupling) {
        (Some(md), Some(c)) => match SpectralProblem::new(md, c) {
            Ok(p) => Some(p),
            Err(e) => {
                err(locate(text, "coupling", 0, None), format!("coupling: {e}"));
                None
            }
        },
        _ => None,
    };

    let mut bumps = Vec::new();
    for (i, b) in raw.initial.iter().enumerate() {
        let sigma = match &b.sigma {
            OneOrMany::One(s) => vec![*s; b.center.len()],
            OneOrMany::Many(v) => v.clone(),
        };
        bumps.push(GaussianBump { layer: b.layer, amplitude: b.amplitude, center: b.center.clone(), sigma });
        if let Some(p) = &problem {
            if b.layer >= p.medium.layer_count() {
                err(
                    locate(text, "initial", i, Some("layer")),
                    format!("initial[{i}].layer = {} but the medium has {} layers (ids start at 0)", b.layer, p.medium.layer_count()),
                );
            }
        }
    }
    let initial = match BumpField::new(m, bumps) {
        Ok(f) => Some(f),
        Err(e) => {
            err(locate(text, "initial", 0, None), format!("initial: {e}"));
            None
        }
    };

    let points = probe_points(&raw.probes, m).map_err(|e| err(locate(text, "probes", 0, None), format!("probes: {e}")));

    let mut spec = QuadratureSpec::default();
    let q = &raw.quadrature;
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = q.$f.clone() { spec.$f = v; })* };
    }
    set!(finite_nodes, rho_truncation, rho_nodes, alpha_nodes, tau_schedule, t_schedule, rel_tol, abs_tol, max_refinements);
    if let Err(e) = spec.validate() {
        err(locate(text, "quadrature", 0, None), format!("quadrature: {e}"));
    }

    let custom = match (raw.weight.mode, raw.weight.c, raw.weight.p) {
        (WeightChoice::Custom, Some(c), Some(p)) => Some((c, p)),
        (WeightChoice::Custom, _, _) => {
            err(locate(text, "weight", 0, Some("mode")), "weight mode \"custom\" needs both `c` and `p`".into());
            None
        }
        (_, None, None) => None,
        _ => {
            err(locate(text, "weight", 0, None), "`c` and `p` are only used with mode = \"custom\"".into());
            None
        }
    };

    if raw.times.is_empty() {
        err(locate(text, "", 0, Some("times")), "times: at least one time is required".into());
    }
    if let Some(t) = raw.times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        err(locate(text, "", 0, Some("times")), format!("times: {t} is not a positive time"));
    }

    if let (Some(p), Ok(pts)) = (&problem, &points) {
        for (x, y) in pts {
            if let Err(e) = p.medium.layer_index(*x) {
                err(locate(text, "probes", 0, None), format!("probe at x = {x}, y = {y:?}: {e}"));
            }
        }
    }

    match (problem, initial, points) {
        (Some(problem), Some(initial), Ok(points)) if errors.is_empty() => Ok(ScenarioConfig {
            problem,
            initial,
            times: raw.times,
            points,
            spec,
            weight: raw.weight.mode,
            custom,
            output: raw.output,
        }),
        _ => Err(errors),
    }
}

fn probe_points(p: &RawProbes, m: usize) -> Result<Vec<(f64, Vec<f64>)>, String> {
    let mut out = Vec::new();
    if let Some(points) = &p.points {
        for pt in points {
            if pt.len() != m + 1 {
                return Err(format!("point {pt:?} needs {} coordinates (x then y)", m + 1));
            }
            out.push((pt[0], pt[1..].to_vec()));
        }
    }
    match (&p.x, &p.y) {
        (Some(x), Some(y)) => {
            if y.len() != m {
                return Err(format!("y has {} axes, transverse_dim is {m}", y.len()));
            }
            let xs = x.values()?;
            let ys: Vec<Vec<f64>> = y.iter().map(Axis::values).collect::<Result<_, _>>()?;
            // x slowest, last y coordinate fastest
            let mut combos: Vec<Vec<f64>> = vec![vec![]];
            for axis in &ys {
                combos = combos.iter().flat_map(|c| axis.iter().map(move |v| [c.clone(), vec![*v]].concat())).collect();
            }
            for &x in &xs {
                for c in &combos {
                    out.push((x, c.clone()));
                }
            }
        }
        (None, None) => {}
        _ => return Err("grid probes need both `x` and `y`".into()),
    }
    if out.is_empty() {
        return Err("no probes given; use `points` or the `x` and `y` axes".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
transverse_dim = 1
times = [0.1]

[medium]
diffusivity = [1.0]

[[initial]]
layer = 0
center = [0.0, 0.0]
sigma = 0.5

[probes]
x = [-0.5, 0.5]
y = [[0.0]]
"#;

    const TWO_LAYER: &str = r#"
transverse_dim = 1
times = [0.05, 0.1]

[medium]
interfaces = [0.0]
diffusivity = [1.0, 2.0]

[coupling]
kind = "ideal"
nu = 1.5

[[initial]]
layer = 0
amplitude = 2.0
center = [-1.0, 0.2]
sigma = [0.3, 0.4]

[probes]
x = { from = -1.0, to = 1.0, count = 4 }
y = [[0.0, 0.5]]
points = [[0.3, -0.1]]

[weight]
mode = "standard"
"#;

    #[test]
    fn minimal_homogeneous_is_valid() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.problem.medium.layer_count(), 1);
        assert_eq!(c.points, vec![(-0.5, vec![0.0]), (0.5, vec![0.0])]);
        assert_eq!(c.weight, WeightChoice::Calibrated);
        assert_eq!(c.spec, QuadratureSpec::default());
    }

    #[test]
    fn two_layer_grid_and_points() {
        let c = parse_config(TWO_LAYER).unwrap();
        assert_eq!(c.points.len(), 1 + 4 * 2);
        assert_eq!(c.points[0], (0.3, vec![-0.1]));
        assert!((c.points[3].0 - (-1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(c.initial.bumps[0].sigma, vec![0.3, 0.4]);
        assert_eq!(c.weight, WeightChoice::Standard);
    }

    #[test]
    fn missing_nu_names_the_field() {
        let text = TWO_LAYER.replace("nu = 1.5\n", "");
        let errs = parse_config(&text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("nu"), "{}", errs[0]);
        assert!(errs[0].line.is_some());
    }

    #[test]
    fn interfaces_out_of_order_are_rejected_with_line() {
        let text = TWO_LAYER.replace("interfaces = [0.0]", "interfaces = [1.0, 0.0]").replace("[1.0, 2.0]", "[1.0, 2.0, 3.0]");
        let errs = parse_config(&text).unwrap_err();
        let e = errs.iter().find(|e| e.message.contains("medium")).expect("medium error");
        let line = text.lines().position(|l| l.starts_with("interfaces")).unwrap() + 1;
        assert_eq!(e.line, Some(line), "{e}");
    }

    #[test]
    fn every_problem_is_listed() {
        let text = TWO_LAYER
            .replace("times = [0.05, 0.1]", "times = [0.05, -1.0]")
            .replace("layer = 0", "layer = 5")
            .replace("mode = \"standard\"", "mode = \"custom\"");
        let errs = parse_config(&text).unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
    }

    #[test]
    fn malformed_input_never_panics() {
        for text in ["", "transverse_dim = ", "[medium", "transverse_dim = 1\ntimes = 3", "\u{0}\u{1}", "[[initial]]\nlayer = -1"] {
            assert!(parse_config(text).is_err());
        }
        let errs = parse_config("transverse_dim = 1\nbogus = 2\n").unwrap_err();
        assert!(errs[0].line.is_some());
    }

    #[test]
    fn probe_on_interface_is_rejected() {
        let text = TWO_LAYER.replace("points = [[0.3, -0.1]]", "points = [[0.0, -0.1]]");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs[0].message.contains("interface"), "{errs:?}");
    }

    #[test]
    fn explicit_coupling() {
        let text = TWO_LAYER.replace(
            "kind = \"ideal\"\nnu = 1.5",
            "kind = \"explicit\"\n[[coupling.interface]]\nalpha = [[0.0, 0.0], [1.0, 1.5]]\nbeta = [[1.0, 1.0], [0.0, 0.0]]",
        );
        let c = parse_config(&text).unwrap();
        let ideal = parse_config(TWO_LAYER).unwrap();
        assert_eq!(c.problem.coupling, ideal.problem.coupling);
    }
}
