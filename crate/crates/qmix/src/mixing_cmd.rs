use std::path::Path;

use qmix_core::dirichlet::spectral_gap_seeded;
use qmix_core::ls_estimator::{estimate_alpha_with_gap, EstimatorConfig};
use qmix_core::mixing::{
    bound_curves, chi2_crossing, ls_crossing, mixing_time, time_grid, BoundConstants, MixingCurve,
};
use qmix_core::regularity::regularity_profile;
use qmix_core::Generator;
use serde::Serialize;

use crate::analyze::REGULARITY_TIMES;
use crate::error::{CliError, CliResult};
use crate::report::{write_curve_csv, MixingCurveJson};

#[derive(Debug, Clone)]
pub struct MixingOptions {
    pub epsilon: f64,
    pub t_max: f64,
    pub grid_n: usize,
    pub states: usize,
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingSummary {
    pub epsilon: f64,
    pub tau_mix: f64,
    pub samples: usize,
    pub sigma_min: f64,
    pub lambda: f64,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    /// Rate used for the α₂ column: α₂ with strong-regularity evidence, α₂/2 with weak only.
    pub alpha2_rate: Option<f64>,
    pub chi2_crossing: f64,
    pub ls_crossing_a1: Option<f64>,
    pub ls_crossing_a2: Option<f64>,
    pub max_violation: f64,
    pub dominated: bool,
    pub seed: u64,
}

/// Computes the curve and its summary; the α₂ column is present only when
/// the h-criterion gives regularity evidence on the sampled probes.
pub fn mixing(g: &Generator, opts: &MixingOptions) -> CliResult<(MixingCurve, MixingSummary)> {
    if !(opts.epsilon > 0.0) {
        return Err(CliError::malformed("epsilon must be positive", "epsilon"));
    }
    if !(opts.t_max > 0.0) || opts.grid_n < 2 {
        return Err(CliError::malformed(
            "need t_max > 0 and grid_n ≥ 2",
            "t_max",
        ));
    }
    let space = g.stationary()?;
    let gap = spectral_gap_seeded(g, opts.seed)?;
    let cfg = EstimatorConfig {
        restarts: opts.budget.max(1),
        seed: opts.seed,
        ..EstimatorConfig::default()
    };
    let a1 = estimate_alpha_with_gap(g, 1.0, &cfg, &gap)
        .ok()
        .map(|r| r.alpha_estimate);
    let a2 = estimate_alpha_with_gap(g, 2.0, &cfg, &gap)
        .ok()
        .map(|r| r.alpha_estimate);
    let verdicts = regularity_profile(g, 10, &REGULARITY_TIMES, 101, opts.seed)
        .ok()
        .map(|p| p.verdicts);
    let weak = verdicts.as_ref().is_some_and(|v| v.weak());
    let strong = verdicts.as_ref().is_some_and(|v| v.strong());

    let consts = BoundConstants {
        lambda: Some(gap.lambda),
        alpha1: a1,
        alpha2: a2.filter(|_| weak),
        strong_regular: strong,
    };
    let times = time_grid(opts.t_max, opts.grid_n);
    let curve = bound_curves(g, &consts, &times, opts.states, opts.seed)?;
    let tau = mixing_time(g, opts.epsilon, opts.states, opts.seed)?;
    let smin = space.sigma_min();
    let a2_rate = consts.alpha2.map(|a| if strong { a } else { a / 2.0 });
    let summary = MixingSummary {
        epsilon: opts.epsilon,
        tau_mix: tau.tau,
        samples: tau.samples,
        sigma_min: smin,
        lambda: gap.lambda,
        alpha1: a1,
        alpha2: a2,
        alpha2_rate: a2_rate,
        chi2_crossing: chi2_crossing(smin, gap.lambda, opts.epsilon),
        ls_crossing_a1: a1.map(|a| ls_crossing(smin, a, opts.epsilon)),
        ls_crossing_a2: a2_rate.map(|a| ls_crossing(smin, a, opts.epsilon)),
        max_violation: curve.max_violation(),
        dominated: curve.dominated(),
        seed: opts.seed,
    };
    Ok((curve, summary))
}

/// `.json` selects the JSON form, anything else CSV.
pub fn write_curve(curve: &MixingCurve, path: &Path) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if json {
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &MixingCurveJson::from(curve))
            .map_err(|e| CliError::io(path, e))
    } else {
        write_curve_csv(curve, std::io::BufWriter::new(file)).map_err(|e| CliError::io(path, e))
    }
}
