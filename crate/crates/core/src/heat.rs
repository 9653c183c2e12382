//! Heat flow in the layered medium from the spectral representation
//!
//! ```text
//! u_k(t, x, y) = c ∫_0^∞ e^{−ρ²t} ρ^p F[g](x, y, ρ) dρ
//! ```
//!
//! with `(c, p)` from the weight mode. One table of `F[g]` on the ρ rule
//! serves every probe and every time.

use crate::eigen::SpectralProblem;
use crate::field::ScalarField;
use crate::quadrature::{try_abel_limit, AbelLimit, QuadratureSpec, GAUSSIAN_TAIL_K};
use crate::transforms::{spectral_cutoff, spectral_panels, Probe, SourcePlan, SpectralTable, SpectralWeightMode};
use crate::{Error, Result};

pub struct HeatScenario<'a> {
    pub problem: SpectralProblem,
    pub initial: &'a dyn ScalarField,
    pub times: Vec<f64>,
    pub probes: Vec<Probe>,
    pub mode: SpectralWeightMode,
    pub spec: QuadratureSpec,
}

impl<'a> HeatScenario<'a> {
    pub fn new(
        problem: SpectralProblem,
        initial: &'a dyn ScalarField,
        times: Vec<f64>,
        points: &[(f64, Vec<f64>)],
        mode: SpectralWeightMode,
        spec: QuadratureSpec,
    ) -> Result<Self> {
        spec.validate()?;
        if let Some(t) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Domain(format!("time {t} must be positive")));
        }
        if initial.transverse_dim() != problem.medium.transverse_dim {
            return Err(Error::Domain("initial data and medium disagree on the transverse dimension".into()));
        }
        let probes = points
            .iter()
            .map(|(x, y)| Probe::new(&problem.medium, *x, y.clone()))
            .collect::<Result<_>>()?;
        Ok(Self { problem, initial, times, probes, mode, spec })
    }

    fn m(&self) -> usize {
        self.problem.medium.transverse_dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub probe: Probe,
    pub value: f64,
}

/// Solution samples in time-major order plus quadrature diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub samples: Vec<Sample>,
    pub rho_upper: f64,
    pub rho_nodes: usize,
    /// Largest change between the last two rule levels.
    pub refinement_change: f64,
    pub converged: bool,
    /// Largest imaginary part relative to the largest magnitude.
    pub imaginary_ratio: f64,
}

struct Sweep {
    /// `values[t][p]`.
    values: Vec<Vec<f64>>,
    rho_upper: f64,
    rho_nodes: usize,
    change: f64,
    converged: bool,
    imaginary_ratio: f64,
}

fn sweep(sc: &HeatScenario, probes: &[Probe], times: &[f64]) -> Result<Sweep> {
    let spec = &sc.spec;
    let medium = &sc.problem.medium;
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let mut upper = GAUSSIAN_TAIL_K / t_min.sqrt();
    if let Some(cut) = spectral_cutoff(sc.initial, medium) {
        upper = upper.min(cut);
    }
    let upper = upper.max(spec.rho_truncation);
    let plan = SourcePlan::new(sc.initial, medium, upper, spec)?;
    let (c, p) = sc.mode.constants(sc.m());
    let mut panels = spectral_panels(upper, plan.span(medium, probes), spec);
    let evaluate = |panels: usize| -> Result<Vec<Vec<num_complex::Complex64>>> {
        let table = SpectralTable::build(&plan, &sc.problem, probes, upper, panels, spec)?;
        Ok(times.iter().map(|&t| table.integrate(c, p, |r| (-r * r * t).exp())).collect())
    };
    let mut coarse = evaluate(panels)?;
    let mut change = f64::INFINITY;
    let mut converged = false;
    for _ in 0..spec.max_refinements.max(1) {
        let fine = evaluate(2 * panels)?;
        panels *= 2;
        let scale = fine.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        change = coarse
            .iter()
            .flatten()
            .zip(fine.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        coarse = fine;
        if change <= spec.rel_tol * scale + spec.abs_tol {
            converged = true;
            break;
        }
    }
    let scale = coarse.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let imag = coarse.iter().flatten().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(Sweep {
        values: coarse.into_iter().map(|row| row.into_iter().map(|v| v.re).collect()).collect(),
        rho_upper: upper,
        rho_nodes: panels * crate::quadrature::PANEL_ORDER,
        change,
        converged,
        imaginary_ratio: if scale > 0.0 { imag / scale } else { 0.0 },
    })
}

/// `u(t, x, y)` at one point.
pub fn solve_point(sc: &HeatScenario, t: f64, x: f64, y: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time {t} must be positive")));
    }
    let probe = Probe::new(&sc.problem.medium, x, y.to_vec())?;
    Ok(sweep(sc, &[probe], &[t])?.values[0][0])
}

/// `u` at every time and probe of the scenario, time-major.
pub fn solve_grid(sc: &HeatScenario) -> Result<GridSolution> {
    let s = sweep(sc, &sc.probes, &sc.times)?;
    let samples = sc
        .times
        .iter()
        .zip(&s.values)
        .flat_map(|(&t, row)| sc.probes.iter().zip(row).map(move |(p, &v)| Sample { t, probe: p.clone(), value: v }))
        .collect();
    Ok(GridSolution {
        samples,
        rho_upper: s.rho_upper,
        rho_nodes: s.rho_nodes,
        refinement_change: s.change,
        converged: s.converged,
        imaginary_ratio: s.imaginary_ratio,
    })
}

/// The `t → 0` limit at every probe, extrapolated over `t_schedule`.
pub fn reproduce_initial_grid(sc: &HeatScenario, probes: &[Probe]) -> Result<Vec<AbelLimit>> {
    let sched = &sc.spec.t_schedule;
    let s = sweep(sc, probes, sched)?;
    (0..probes.len())
        .map(|i| {
            let mut k = 0;
            try_abel_limit(
                |_| {
                    let v = s.values[k][i];
                    k += 1;
                    Ok(num_complex::Complex64::new(v, 0.0))
                },
                sched,
            )
        })
        .collect()
}

/// The `t → 0` limit of `u` at `(x, y)`, which should reproduce `g`.
pub fn reproduce_initial(sc: &HeatScenario, x: f64, y: &[f64]) -> Result<AbelLimit> {
    let probe = Probe::new(&sc.problem.medium, x, y.to_vec())?;
    Ok(reproduce_initial_grid(sc, &[probe])?.remove(0))
}
