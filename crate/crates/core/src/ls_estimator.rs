//! Log-Sobolev constants: numerical upper bounds, closed forms and analytic bounds.
//!
//! α_p = inf{ℰ_p(f)/Ent_p(f) : f > 0, Ent_p(f) ≠ 0}. The estimator minimizes
//! the ratio over f = exp(h). Every evaluated witness is feasible, so the
//! returned value is an upper bound on α_p, never a certified value.

use crate::dirichlet::{dirichlet_hat_p, dirichlet_p, spectral_gap, GapReport};
use crate::error::{invalid, Error, Result};
use crate::generators::{Family, Generator};
use crate::lp_space::{is_p_one, WeightedSpace};
use crate::operator::{c, CMatrix, Hermitian, C64};
use crate::optimize::{coordinate_refine, grid_then_golden, NelderMead};
use crate::prelude::*;
use crate::random::{normal, rng_from_seed};

/// Witnesses with Ent_p below this value (after normalizing λ_max(f) = 1) are discarded.
pub const ENT_FLOOR: f64 = 1e-10;
/// Relative slack for the partial-order verdicts.
pub const VERDICT_SLACK: f64 = 1e-4;

/// α₂ of the depolarizing generator, 2γ(1 − 2/d)/log(d − 1), and γ at d = 2.
pub fn depolarizing_alpha2(d: usize, gamma: f64) -> Result<f64> {
    if d < 2 {
        return Err(invalid("dim", "needs d ≥ 2"));
    }
    if d == 2 {
        return Ok(gamma);
    }
    let df = d as f64;
    Ok(2.0 * gamma * (1.0 - 2.0 / df) / (df - 1.0).ln())
}

/// Lower bound 2(1 − 2/d)λ/log(d − 1) on α₂ of a primitive unital generator.
pub fn unital_alpha2_lower(g: &Generator, lambda: f64) -> Result<f64> {
    if !g.flags().unital {
        return Err(Error::MissingProperty("unital"));
    }
    g.stationary()?;
    depolarizing_alpha2(g.dim(), lambda)
}

/// Upper bound log D·(4 + log log d)/(2 log(3d/4)) on α₂ of the lift of a
/// D-regular reversible unital channel.
pub fn expander_alpha2_upper(big_d: usize, d: usize) -> Result<f64> {
    if d <= 1 {
        return Err(invalid("dim", "needs d ≥ 2"));
    }
    if big_d < 2 {
        return Err(invalid("D", "needs D ≥ 2"));
    }
    let df = d as f64;
    Ok((big_d as f64).ln() * (4.0 + df.ln().ln()) / (2.0 * (3.0 * df / 4.0).ln()))
}

#[derive(Debug, Clone, Copy)]
pub struct EstimatorConfig {
    pub restarts: usize,
    /// Nelder–Mead evaluations per restart.
    pub max_evals: usize,
    pub seed: u64,
    /// Use ℰ̂_p (the form of L̂) in the numerator.
    pub use_hat: bool,
    /// Restrict to witnesses diagonal in the eigenbasis of σ. `None` selects it
    /// automatically for the unitarily invariant depolarizing family.
    pub diagonal: Option<bool>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            restarts: 24,
            max_evals: 2000,
            seed: 0,
            use_hat: true,
            diagonal: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalyticBounds {
    pub closed_form: Option<f64>,
    pub unital_lower: Option<f64>,
    pub expander_upper: Option<f64>,
    /// The spectral gap λ.
    pub gap_upper: f64,
}

#[derive(Debug, Clone)]
pub struct LSReport {
    pub p: f64,
    /// Smallest ratio found; an upper bound on α_p.
    pub alpha_estimate: f64,
    pub witness: Hermitian,
    /// λ_min/λ_max of the witness, recorded to audit boundary minimizers.
    pub witness_min_eig: f64,
    pub witness_ent: f64,
    pub restarts: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub use_hat: bool,
    pub diagonal: bool,
    pub analytic_bounds: AnalyticBounds,
}

/// Evaluates ℰ_p(e^h)/Ent_p(e^h) for a parameter vector.
enum Ratio<'a> {
    Matrix {
        g: &'a Generator,
        space: &'a WeightedSpace,
        p: f64,
        use_hat: bool,
        /// Eigenbasis of σ when restricted to diagonal witnesses.
        basis: Option<CMatrix>,
    },
    /// σ = 𝟙/d depolarizing with commuting witnesses: everything is classical.
    Classical { d: usize, gamma: f64, p: f64 },
}

/// Smallest admissible log-ratio λ_min(f)/λ_max(f), mirroring the positivity gate.
const LOG_GATE: f64 = -27.6;

impl<'a> Ratio<'a> {
    fn len(&self) -> usize {
        match self {
            Ratio::Matrix { g, basis, .. } => {
                if basis.is_some() {
                    g.dim()
                } else {
                    g.dim() * g.dim()
                }
            }
            Ratio::Classical { d, .. } => *d,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Ratio::Matrix { g, .. } => g.dim(),
            Ratio::Classical { d, .. } => *d,
        }
    }

    fn to_h(&self, x: &[f64]) -> Hermitian {
        let d = self.dim();
        match self {
            Ratio::Matrix { basis: None, .. } => params_to_hermitian(d, x),
            Ratio::Matrix { basis: Some(v), .. } => Hermitian::from_diagonal(x).conjugate_by(v),
            Ratio::Classical { .. } => Hermitian::from_diagonal(x),
        }
    }

    /// Parameters of a Hermitian direction in this parameterization.
    fn from_h(&self, h: &Hermitian) -> Vec<f64> {
        let d = self.dim();
        match self {
            Ratio::Matrix { basis: None, .. } => hermitian_to_params(h),
            Ratio::Matrix { basis: Some(v), .. } => {
                let m = v.adjoint() * h.as_matrix() * v;
                (0..d).map(|i| m[(i, i)].re).collect()
            }
            Ratio::Classical { .. } => (0..d).map(|i| h.as_matrix()[(i, i)].re).collect(),
        }
    }

    /// Normalized witness f = exp(h − λ_max(h)).
    fn witness(&self, x: &[f64]) -> Hermitian {
        let h = self.to_h(x);
        let e = h.eig();
        let top = e.max_eigenvalue();
        e.map_unchecked(|v| (v - top).exp())
    }

    /// (energy, entropy) of the witness, or None if it is infeasible.
    fn parts(&self, x: &[f64]) -> Option<(f64, f64)> {
        match self {
            Ratio::Classical { d, gamma, p } => {
                let top = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let y: Vec<f64> = x.iter().map(|v| v - top).collect();
                if y.iter().any(|&v| !(v > LOG_GATE)) {
                    return None;
                }
                let n = *d as f64;
                let f: Vec<f64> = y.iter().map(|v| v.exp()).collect();
                let m = f.iter().sum::<f64>() / n;
                if is_p_one(*p) {
                    let ent = f.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n - m * m.ln();
                    let en = 0.5 * gamma * f.iter().zip(&y).map(|(a, b)| (a - m) * b).sum::<f64>() / n;
                    Some((en, ent))
                } else {
                    let m2 = f.iter().map(|a| a * a).sum::<f64>() / n;
                    let ent = f.iter().zip(&y).map(|(a, b)| a * a * b).sum::<f64>() / n - 0.5 * m2 * m2.ln();
                    let en = gamma * (m2 - m * m);
                    Some((en, ent))
                }
            }
            Ratio::Matrix {
                g, space, p, use_hat, ..
            } => {
                let f = self.witness(x);
                let ent = space.ent_p(*p, &f).ok()?;
                let en = if *use_hat {
                    dirichlet_hat_p(g, *p, &f).ok()?
                } else {
                    dirichlet_p(g, *p, &f).ok()?
                };
                Some((en, ent))
            }
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self.parts(x) {
            Some((en, ent)) if ent > ENT_FLOOR && en.is_finite() => en / ent,
            _ => f64::INFINITY,
        }
    }
}

/// Packs a Hermitian matrix into d² reals: the diagonal, then (re, im) of the upper triangle.
pub fn hermitian_to_params(h: &Hermitian) -> Vec<f64> {
    let d = h.dim();
    let m = h.as_matrix();
    let mut x = Vec::with_capacity(d * d);
    for i in 0..d {
        x.push(m[(i, i)].re);
    }
    for i in 0..d {
        for j in i + 1..d {
            x.push(m[(i, j)].re);
            x.push(m[(i, j)].im);
        }
    }
    x
}

pub fn params_to_hermitian(d: usize, x: &[f64]) -> Hermitian {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c(x[i]);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = C64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    Hermitian::symmetrize(m)
}

fn normalize_direction(h: &Hermitian) -> Option<Hermitian> {
    let e = h.eig();
    let traceless = h.shift(-h.trace() / h.dim() as f64);
    let scale = e.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale < 1e-14 {
        return None;
    }
    Some(traceless.scale(1.0 / scale))
}

/// log-spaced amplitudes 1e−4 … 30.
fn amplitude_grid() -> Vec<f64> {
    let (lo, hi, n) = ((1e-4f64).ln(), 30f64.ln(), 48);
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

struct RunResult {
    x: Vec<f64>,
    value: f64,
    evaluations: usize,
    converged: bool,
}

fn run_start(r: &Ratio<'_>, dir: &[f64], max_evals: usize) -> RunResult {
    let grid = amplitude_grid();
    let mut evals = 0usize;
    let mut best_x = vec![0.0; dir.len()];
    let mut best_v = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let along = |s: f64| -> Vec<f64> {
            let t = sign * s.exp();
            dir.iter().map(|v| v * t).collect()
        };
        let (s, v) = grid_then_golden(
            |s| {
                evals += 1;
                r.eval(&along(s))
            },
            &grid,
            1e-6,
        );
        if v < best_v {
            best_v = v;
            best_x = along(s);
        }
    }
    if !best_v.is_finite() {
        return RunResult {
            x: best_x,
            value: best_v,
            evaluations: evals,
            converged: false,
        };
    }
    let scale = best_x.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-4);
    let nm = NelderMead {
        max_evals,
        ftol: 1e-12,
        step: 0.1 * scale,
    };
    let m = nm.minimize(|x| r.eval(x), &best_x);
    evals += m.evaluations;
    let (x, v) = if m.value < best_v { (m.x, m.value) } else { (best_x, best_v) };
    let refined = coordinate_refine(|x| r.eval(x), &x, v, 0.05 * scale, 1e-6 * scale, max_evals);
    evals += refined.evaluations;
    RunResult {
        x: refined.x,
        value: refined.value,
        evaluations: evals,
        converged: m.converged || refined.converged,
    }
}

/// Numerical upper bound on α_p for p ∈ {1, 2}.
pub fn estimate_alpha(g: &Generator, p: f64, config: &EstimatorConfig) -> Result<LSReport> {
    let gap = spectral_gap(g)?;
    estimate_alpha_with_gap(g, p, config, &gap)
}

pub fn estimate_alpha_with_gap(g: &Generator, p: f64, config: &EstimatorConfig, gap: &GapReport) -> Result<LSReport> {
    if !(is_p_one(p) || p == 2.0) {
        return Err(invalid("p", "only p = 1 and p = 2 are supported"));
    }
    let p = if is_p_one(p) { 1.0 } else { 2.0 };
    let space = g.stationary()?;
    let d = g.dim();
    let depolarizing = matches!(g.family(), Family::Depolarizing { .. });
    let diagonal = config.diagonal.unwrap_or(depolarizing);
    let ratio = match (g.family(), diagonal) {
        (Family::Depolarizing { gamma }, true) => Ratio::Classical { d, gamma: *gamma, p },
        (_, true) => Ratio::Matrix {
            g,
            space,
            p,
            use_hat: config.use_hat,
            basis: Some(space.sigma_eig().vectors.clone()),
        },
        (_, false) => Ratio::Matrix {
            g,
            space,
            p,
            use_hat: config.use_hat,
            basis: None,
        },
    };

    // starting directions: gap witness, spiked eigenprojectors of σ, Gaussians
    let mut rng = rng_from_seed(config.seed);
    let n = ratio.len();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = normalize_direction(&gap.witness) {
        starts.push(ratio.from_h(&w));
    }
    let vectors = &space.sigma_eig().vectors;
    for k in 0..d {
        if starts.len() >= config.restarts.max(1) {
            break;
        }
        let col = vectors.column(k);
        let proj = Hermitian::symmetrize(&col * col.adjoint());
        if let Some(w) = normalize_direction(&proj) {
            starts.push(ratio.from_h(&w));
        }
    }
    while starts.len() < config.restarts.max(1) {
        let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let h = ratio.to_h(&x);
        if let Some(w) = normalize_direction(&h) {
            starts.push(ratio.from_h(&w));
        }
    }

    let runs = run_all(&ratio, &starts, config.max_evals);
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one restart");

    let witness = ratio.witness(&best.x);
    let witness_eig = witness.eig();
    let witness_ent = ratio.parts(&best.x).map(|(_, e)| e).unwrap_or(0.0);
    let bounds = analytic_bounds(g, p, gap.lambda)?;
    Ok(LSReport {
        p,
        alpha_estimate: best.value,
        witness,
        witness_min_eig: witness_eig.values[0] / witness_eig.max_eigenvalue(),
        witness_ent,
        restarts: starts.len(),
        evaluations,
        converged: best.converged && best.value.is_finite(),
        use_hat: config.use_hat,
        diagonal,
        analytic_bounds: bounds,
    })
}

#[cfg(feature = "parallel")]
fn run_all(r: &Ratio<'_>, starts: &[Vec<f64>], max_evals: usize) -> Vec<RunResult> {
    use rayon::prelude::*;
    starts.par_iter().map(|s| run_start(r, s, max_evals)).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_all(r: &Ratio<'_>, starts: &[Vec<f64>], max_evals: usize) -> Vec<RunResult> {
    starts.iter().map(|s| run_start(r, s, max_evals)).collect()
}

fn analytic_bounds(g: &Generator, p: f64, lambda: f64) -> Result<AnalyticBounds> {
    let d = g.dim();
    let flags = g.flags();
    let closed_form = match g.family() {
        Family::Depolarizing { gamma } if p == 2.0 => Some(depolarizing_alpha2(d, *gamma)?),
        _ => None,
    };
    let unital_lower = (p == 2.0 && flags.unital).then(|| depolarizing_alpha2(d, lambda)).transpose()?;
    let kraus_rank = match g.family() {
        Family::RandomUnitary { kraus_rank, .. } | Family::ChannelLift { kraus_rank, lazy: false } => Some(*kraus_rank),
        _ => None,
    };
    let expander_upper = match kraus_rank {
        Some(k) if p == 2.0 && flags.unital && flags.reversible && k >= 2 && d >= 2 => {
            Some(expander_alpha2_upper(k, d)?)
        }
        _ => None,
    };
    Ok(AnalyticBounds {
        closed_form,
        unital_lower,
        expander_upper,
        gap_upper: lambda,
    })
}

/// Paired estimates of α₁, α₂ and λ with the partial-order checks.
#[derive(Debug, Clone)]
pub struct PartialOrderVerdict {
    pub alpha1: f64,
    pub alpha2: f64,
    pub lambda: f64,
    /// α₂ ≤ 2α₁, the weak-regularity ordering.
    pub ok_alpha2_le_2alpha1: bool,
    /// α₁ ≤ λ; `None` when neither reversibility nor unitality holds.
    pub ok_alpha1_le_lambda: Option<bool>,
    /// α₂ ≤ α₁, the strong-regularity ordering (informational).
    pub alpha2_le_alpha1: bool,
}

impl PartialOrderVerdict {
    pub fn all_ok(&self) -> bool {
        self.ok_alpha2_le_2alpha1 && self.ok_alpha1_le_lambda.unwrap_or(true)
    }
}

pub fn partial_order_verdict(g: &Generator, config: &EstimatorConfig) -> Result<PartialOrderVerdict> {
    let gap = spectral_gap(g)?;
    let a1 = estimate_alpha_with_gap(g, 1.0, config, &gap)?;
    let a2 = estimate_alpha_with_gap(g, 2.0, config, &gap)?;
    Ok(verdict_from(a1.alpha_estimate, a2.alpha_estimate, gap.lambda, g))
}

pub fn verdict_from(alpha1: f64, alpha2: f64, lambda: f64, g: &Generator) -> PartialOrderVerdict {
    let slack = 1.0 + VERDICT_SLACK;
    let flags = g.flags();
    let applies = flags.reversible || flags.unital;
    PartialOrderVerdict {
        alpha1,
        alpha2,
        lambda,
        ok_alpha2_le_2alpha1: alpha2 <= 2.0 * alpha1 * slack,
        ok_alpha1_le_lambda: applies.then_some(alpha1 <= lambda * slack),
        alpha2_le_alpha1: alpha2 <= alpha1 * slack,
    }
}
