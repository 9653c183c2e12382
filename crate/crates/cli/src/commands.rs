//! Subcommand bodies. Each returns the lines or files it produced, or a
//! [`Failure`] that maps onto the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use layerheat::eigen::SpectralProblem;
use layerheat::fd::{compare, fd_solve, ErrorReport, FdGrid};
use layerheat::field::{evaluate, GaussianBump, MirrorField};
use layerheat::heat::{reproduce_initial_grid, solve_grid, HeatScenario};
use layerheat::kernels::{phi_kj_closed_two_layer, phi_kj_integral, plane_wave_identity_check, ClosedForm, KernelQuery};
use layerheat::media::TwoLayerIdealParams;
use layerheat::transforms::{theorem1_residual, SpectralWeightMode};
use layerheat::Error;
use sha2::{Digest, Sha256};

use crate::config::{parse_config, ScenarioConfig};

pub const ROUNDTRIP_LIMIT: f64 = 5e-3;
pub const THEOREM1_LIMIT: f64 = 1e-3;
pub const KERNEL_LIMIT: f64 = 1e-6;
pub const PLANE_WAVE_LIMIT: f64 = 1e-8;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(Vec<String>),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn lines(&self) -> Vec<String> {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => vec![m.clone()],
            Failure::Validation(v) => v.clone(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::AmbiguousPoint { .. }
            | Error::Invalid(_)
            | Error::Unsupported(_)
            | Error::ProbeMismatch(_)
            | Error::Straddle { .. } => Failure::Validation(vec![e.to_string()]),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn io(e: std::io::Error, what: &Path) -> Failure {
    Failure::Usage(format!("{}: {e}", what.display()))
}

/// Config text, its parsed form and the text's SHA-256.
pub struct Loaded {
    pub config: ScenarioConfig,
    pub hash: String,
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io(e, path))?;
    let config = parse_config(&text)
        .map_err(|errs| Failure::Validation(errs.iter().map(|e| format!("{}: {e}", path.display())).collect()))?;
    let hash = Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });
    Ok(Loaded { config, hash })
}

fn mode_line(mode: SpectralWeightMode, m: usize) -> String {
    let (c, p) = mode.constants(m);
    format!("# weight_mode = {}, c = {c:e}, p = {p}", mode.label())
}

fn preamble(kind: &str, loaded: &Loaded, mode: SpectralWeightMode) -> String {
    let cfg = &loaded.config;
    let s = &cfg.spec;
    let mut out = String::new();
    let _ = writeln!(out, "# layerheat {} {kind}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# config_sha256 = {}", loaded.hash);
    let _ = writeln!(out, "{}", mode_line(mode, cfg.m()));
    let _ = writeln!(
        out,
        "# medium: interfaces = {:?}, diffusivity = {:?}, transverse_dim = {}",
        cfg.problem.medium.interfaces,
        cfg.problem.medium.diffusivity,
        cfg.m()
    );
    let _ = writeln!(
        out,
        "# quadrature: finite_nodes = {}, rho_truncation = {}, rho_nodes = {}, alpha_nodes = {}, rel_tol = {:e}, abs_tol = {:e}, max_refinements = {}",
        s.finite_nodes, s.rho_truncation, s.rho_nodes, s.alpha_nodes, s.rel_tol, s.abs_tol, s.max_refinements
    );
    out
}

fn y_headers(m: usize) -> String {
    (1..=m).map(|k| format!("y{k}")).collect::<Vec<_>>().join(",")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

/// Solve on the probe grid and write `solution.csv` into `out`.
pub fn solve(loaded: &Loaded, out: &Path) -> Result<String, Failure> {
    let cfg = &loaded.config;
    let mode = cfg.weight_mode()?;
    let sc = cfg.scenario(mode)?;
    let sol = solve_grid(&sc)?;
    let mut csv = preamble("solve", loaded, mode);
    let _ = writeln!(
        csv,
        "# rho_upper = {:e}, rho_nodes = {}, refinement_change = {:e}, converged = {}, imaginary_ratio = {:e}",
        sol.rho_upper, sol.rho_nodes, sol.refinement_change, sol.converged, sol.imaginary_ratio
    );
    let _ = writeln!(csv, "t,x,{},layer,u", y_headers(cfg.m()));
    for s in &sol.samples {
        let _ = writeln!(csv, "{:e},{:e},{},{},{:e}", s.t, s.probe.x, join(&s.probe.y), s.probe.layer, s.value);
    }
    fs::create_dir_all(out).map_err(|e| io(e, out))?;
    let path = out.join("solution.csv");
    fs::write(&path, csv).map_err(|e| io(e, &path))?;
    if !sol.converged {
        return Err(Failure::Numerical(format!(
            "spectral integral did not reach rel_tol (last change {:e}); results written to {}",
            sol.refinement_change,
            path.display()
        )));
    }
    Ok(format!("wrote {} ({} samples)", path.display(), sol.samples.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Roundtrip,
    Theorem1,
    Kernels,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

/// Two-layer ideal-contact parameters of the config medium with its
/// interface at the origin; a homogeneous medium counts as `a1 = a2`, `ν = 1`.
fn two_layer_params(problem: &SpectralProblem) -> Option<TwoLayerIdealParams> {
    let md = &problem.medium;
    match md.interfaces.as_slice() {
        [] => TwoLayerIdealParams::new(md.a(0), md.a(0), 1.0).ok(),
        [l] if *l == 0.0 => {
            let c = &problem.coupling.interfaces[0];
            let ideal = c.is_value_continuous() && c.beta[1] == [0.0, 0.0] && c.alpha[1][0] != 0.0;
            if ideal {
                TwoLayerIdealParams::new(md.a(0), md.a(1), c.alpha[1][1] / c.alpha[1][0]).ok()
            } else {
                None
            }
        }
        _ => None,
    }
}

fn roundtrip_suite(cfg: &ScenarioConfig, sc: &HeatScenario) -> Result<Verdict, Failure> {
    let got = reproduce_initial_grid(sc, &sc.probes)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (p, lim) in sc.probes.iter().zip(&got) {
        let want = evaluate(&cfg.initial, &cfg.problem.medium, p.x, &p.y)?;
        scale = scale.max(want.abs());
        worst = worst.max((lim.value.re - want).abs());
    }
    if scale == 0.0 {
        return Ok(Verdict::Skip("initial data vanish at every probe".into()));
    }
    let err = worst / scale;
    let msg = format!("t -> 0 reconstruction error / max |g| = {err:.3e} (limit {ROUNDTRIP_LIMIT:e})");
    Ok(if err <= ROUNDTRIP_LIMIT { Verdict::Pass(msg) } else { Verdict::Fail(msg) })
}

fn theorem1_suite(cfg: &ScenarioConfig) -> Result<Verdict, Failure> {
    let Some(params) = two_layer_params(&cfg.problem) else {
        return Ok(Verdict::Skip("needs a homogeneous or two-layer ideal-contact medium with the interface at 0".into()));
    };
    let m = cfg.m();
    let problem = SpectralProblem::two_layer(&params, m)?;
    let mut center = vec![0.0; m + 1];
    center[0] = -0.4;
    let field = MirrorField::new(&params, GaussianBump::isotropic(0, 1.0, center, 0.35).term());
    let y = vec![0.2; m];
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 1.0, 2.0] {
        for x in [-0.6, 0.7] {
            worst = worst.max(theorem1_residual(&field, lambda, x, &y, &problem, &cfg.spec)?);
        }
    }
    let msg = format!("max normalized residual {worst:.3e} over lambda in {{0.5, 1, 2}} (limit {THEOREM1_LIMIT:e})");
    Ok(if worst <= THEOREM1_LIMIT { Verdict::Pass(msg) } else { Verdict::Fail(msg) })
}

fn kernels_suite(cfg: &ScenarioConfig) -> Result<Verdict, Failure> {
    let Some(params) = two_layer_params(&cfg.problem) else {
        return Ok(Verdict::Skip("closed forms exist only for homogeneous or two-layer ideal contact".into()));
    };
    let m = cfg.m();
    let problem = SpectralProblem::two_layer(&params, m)?;
    let mut worst: f64 = 0.0;
    for rho in [0.5, 2.0] {
        for x in [-0.7, 0.9] {
            for xi in [-1.1, 0.4] {
                for s in [0.0, 0.8] {
                    let q = KernelQuery { rho, x, xi, s, k: usize::from(x > 0.0), j: usize::from(xi > 0.0), m };
                    let v = phi_kj_integral(&q, &problem, &cfg.spec)?;
                    let c = phi_kj_closed_two_layer(&q, &params, ClosedForm::Corrected)?;
                    worst = worst.max((v - c).norm() / c.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
    }
    let mut msg = format!("alpha integral vs closed forms: max relative difference {worst:.3e} (limit {KERNEL_LIMIT:e})");
    let mut pass = worst <= KERNEL_LIMIT;
    if m >= 2 {
        let mut pw: f64 = 0.0;
        for rho in [0.5, 1.0, 3.0] {
            for r in [0.5, 1.0, 5.0] {
                let y: Vec<f64> = (0..m).map(|k| if k == 0 { 0.6 * r } else { 0.8 * r / ((m - 1) as f64).sqrt() }).collect();
                let (l, rhs) = plane_wave_identity_check(rho, &y, &cfg.spec)?;
                pw = pw.max((l - rhs).abs() / (1.0 + l.abs()));
            }
        }
        let _ = write!(msg, "; plane-wave identity {pw:.3e} (limit {PLANE_WAVE_LIMIT:e})");
        pass &= pw <= PLANE_WAVE_LIMIT;
    }
    Ok(if pass { Verdict::Pass(msg) } else { Verdict::Fail(msg) })
}

/// Run the verification suites, returning one report line per suite.
pub fn verify(loaded: &Loaded, suite: Suite) -> Result<Vec<String>, Failure> {
    let cfg = &loaded.config;
    let mode = cfg.weight_mode()?;
    let mut results = Vec::new();
    if matches!(suite, Suite::All | Suite::Roundtrip) {
        let sc = cfg.scenario(mode)?;
        results.push(("roundtrip", roundtrip_suite(cfg, &sc)?));
    }
    if matches!(suite, Suite::All | Suite::Theorem1) {
        results.push(("theorem1", theorem1_suite(cfg)?));
    }
    if matches!(suite, Suite::All | Suite::Kernels) {
        results.push(("kernels", kernels_suite(cfg)?));
    }
    let mut lines = vec![mode_line(mode, cfg.m()).trim_start_matches("# ").to_string()];
    let mut failed = Vec::new();
    for (name, v) in results {
        let (tag, msg) = match &v {
            Verdict::Pass(m) => ("PASS", m),
            Verdict::Fail(m) => {
                failed.push(name);
                ("FAIL", m)
            }
            Verdict::Skip(m) => ("SKIP", m),
        };
        lines.push(format!("{name}: {tag} {msg}"));
    }
    if failed.is_empty() {
        Ok(lines)
    } else {
        lines.push(format!("failed suites: {}", failed.join(", ")));
        Err(Failure::Numerical(lines.join("\n")))
    }
}

fn report_csv(rep: &ErrorReport) -> String {
    let mut out = String::from("scope,samples,l2_rel,linf_rel\n");
    let total: usize = rep.per_layer.iter().map(|l| l.samples).sum();
    let _ = writeln!(out, "all,{total},{:e},{:e}", rep.l2_rel, rep.linf_rel);
    for l in &rep.per_layer {
        let _ = writeln!(out, "layer {},{},{:e},{:e}", l.layer, l.samples, l.l2_rel, l.linf_rel);
    }
    out
}

/// Spectral solution against the finite-difference oracle. Returns the CSV
/// report and a human-readable summary.
pub fn compare_fd(loaded: &Loaded, h: f64, dt: f64, tolerance: f64) -> Result<(String, String), Failure> {
    let cfg = &loaded.config;
    let mode = cfg.weight_mode()?;
    let sc = cfg.scenario(mode)?;
    let spectral = solve_grid(&sc)?;
    let grid = FdGrid::auto(&sc, h, h, dt)?;
    let (fd, warnings) = fd_solve(&sc, &grid)?;
    let rep = compare(&spectral.samples, &fd)?;
    let mut csv = preamble("compare", loaded, mode);
    let _ = writeln!(
        csv,
        "# fd: h = {h:e}, dt = {dt:e}, x = [{:e}, {:e}], y_lo = [{}], y_hi = [{}]",
        grid.x_lo,
        grid.x_hi,
        join(&grid.y_lo),
        join(&grid.y_hi)
    );
    csv.push_str(&report_csv(&rep));
    let mut summary = String::new();
    for w in &warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    let verdict = if rep.l2_rel <= tolerance { "within" } else { "above" };
    let _ = write!(
        summary,
        "spectral vs finite differences over {} samples: rel L2 {:.3e}, rel Linf {:.3e}, {verdict} tolerance {tolerance:e}",
        fd.len(),
        rep.l2_rel,
        rep.linf_rel
    );
    if rep.l2_rel <= tolerance {
        Ok((csv, summary))
    } else {
        Err(Failure::Numerical(format!("{csv}{summary}")))
    }
}

/// Values of one `name=…` entry of a kernel grid spec: a comma list or
/// `lo:hi:count`.
fn grid_values(name: &str, v: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("{name}: `{s}` is not a number"));
    let parts: Vec<&str> = v.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let n: usize = n.trim().parse().map_err(|_| format!("{name}: `{n}` is not a count"))?;
            let (lo, hi) = (num(lo)?, num(hi)?);
            match n {
                0 => Err(format!("{name}: count must be positive")),
                1 => Ok(vec![lo]),
                _ => Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()),
            }
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(format!("{name}: expected a comma list or lo:hi:count")),
    }
}

/// Parsed `rho=…;x=…;xi=…;s=…` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub rho: Vec<f64>,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub s: Vec<f64>,
}

pub fn parse_kernel_grid(spec: &str) -> Result<KernelGrid, String> {
    let (mut rho, mut x, mut xi, mut s) = (None, None, None, None);
    for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (name, v) = entry.split_once('=').ok_or_else(|| format!("`{entry}` is not name=values"))?;
        let name = name.trim();
        let slot = match name {
            "rho" => &mut rho,
            "x" => &mut x,
            "xi" => &mut xi,
            "s" => &mut s,
            _ => return Err(format!("unknown grid axis `{name}` (expected rho, x, xi, s)")),
        };
        *slot = Some(grid_values(name, v)?);
    }
    let need = |v: Option<Vec<f64>>, n: &str| v.ok_or_else(|| format!("grid axis `{n}` is missing"));
    Ok(KernelGrid { rho: need(rho, "rho")?, x: need(x, "x")?, xi: need(xi, "xi")?, s: need(s, "s")? })
}

/// Kernel table `φ_{k,j}(x, ξ, s, ρ)` as CSV, with closed forms when the
/// medium admits them.
pub fn kernels(loaded: &Loaded, grid: &KernelGrid) -> Result<String, Failure> {
    let cfg = &loaded.config;
    let problem = &cfg.problem;
    let md = &problem.medium;
    let m = cfg.m();
    let params = two_layer_params(problem).filter(|_| md.interface_count() == 1);
    let mut csv = String::new();
    let _ = writeln!(csv, "# layerheat {} kernels", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(csv, "# config_sha256 = {}", loaded.hash);
    let _ = writeln!(csv, "# medium: interfaces = {:?}, diffusivity = {:?}, transverse_dim = {m}", md.interfaces, md.diffusivity);
    let _ = writeln!(csv, "rho,x,xi,s,k,j,phi_re,phi_im,closed_corrected,closed_printed");
    for &rho in &grid.rho {
        for &x in &grid.x {
            let k = md.layer_index(x)?;
            for &xi in &grid.xi {
                let j = md.layer_index(xi)?;
                for &s in &grid.s {
                    let q = KernelQuery { rho, x, xi, s, k, j, m };
                    let v = phi_kj_integral(&q, problem, &cfg.spec)?;
                    let (cc, cp) = match &params {
                        Some(p) => (
                            format!("{:e}", phi_kj_closed_two_layer(&q, p, ClosedForm::Corrected)?),
                            format!("{:e}", phi_kj_closed_two_layer(&q, p, ClosedForm::Printed)?),
                        ),
                        None => (String::new(), String::new()),
                    };
                    let _ = writeln!(csv, "{rho:e},{x:e},{xi:e},{s:e},{k},{j},{:e},{:e},{cc},{cp}", v.re, v.im);
                }
            }
        }
    }
    Ok(csv)
}
