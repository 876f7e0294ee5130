//! Fixed experiments with pass/fail tolerances.

use std::time::Instant;

use clap::ValueEnum;
use qmix_core::dirichlet::spectral_gap_seeded;
use qmix_core::generators::{depolarizing_lindblad_ops, qubit_davies, tensor_sum};
use qmix_core::ls_estimator::{
    depolarizing_alpha2, estimate_alpha, estimate_alpha_with_gap, expander_alpha2_upper,
    EstimatorConfig,
};
use qmix_core::mixing::entropy_production;
use qmix_core::operator::Hermitian;
use qmix_core::random::{random_density_mixed, rng_from_seed};
use qmix_core::regularity::regularity_profile;
use qmix_core::{Family, Generator};
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    DepolarizingTable,
    TensorQubit,
    Expander,
    DaviesQubit,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Reference value or bound the value is compared against.
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceReport {
    pub target: Target,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub budget: usize,
    pub seed: u64,
    /// Include the slow cases (three-qubit tensor product).
    pub full: bool,
}

fn within(name: String, value: f64, reference: f64, tolerance: f64, relative: bool) -> Check {
    let err = (value - reference).abs() / if relative { reference.abs() } else { 1.0 };
    Check {
        name,
        value,
        reference,
        tolerance,
        pass: err <= tolerance,
    }
}

fn at_most(name: String, value: f64, bound: f64) -> Check {
    Check {
        name,
        value,
        reference: bound,
        tolerance: 0.0,
        pass: value <= bound,
    }
}

pub fn reproduce(target: Target, opts: &ReproduceOptions) -> CliResult<ReproduceReport> {
    let start = Instant::now();
    let cfg = EstimatorConfig {
        restarts: opts.budget.max(1),
        seed: opts.seed,
        ..EstimatorConfig::default()
    };
    let mut checks = Vec::new();
    match target {
        Target::DepolarizingTable => {
            for d in 2..=8 {
                let g = Generator::depolarizing(d, 1.0)?;
                let gap = spectral_gap_seeded(&g, opts.seed)?;
                checks.push(within(format!("gap d={d}"), gap.lambda, 1.0, 1e-10, false));
                let est = estimate_alpha_with_gap(&g, 2.0, &cfg, &gap)?.alpha_estimate;
                checks.push(within(
                    format!("alpha2 d={d}"),
                    est,
                    depolarizing_alpha2(d, 1.0)?,
                    1e-3,
                    true,
                ));
            }
        }
        Target::TensorQubit => {
            let ns: &[usize] = if opts.full { &[2, 3] } else { &[2] };
            for &n in ns {
                let (h, ops) =
                    tensor_sum(&Hermitian::zeros(2), &depolarizing_lindblad_ops(2, 1.0), n);
                let g = Generator::lindblad(h, ops)?;
                let (c, tol) = if n >= 3 {
                    let big = EstimatorConfig {
                        restarts: 2 * cfg.restarts,
                        max_evals: 2 * cfg.max_evals,
                        ..cfg
                    };
                    (big, 5e-2)
                } else {
                    (cfg, 2e-2)
                };
                let est = estimate_alpha(&g, 2.0, &c)?.alpha_estimate;
                checks.push(within(format!("alpha2 N={n}"), est, 1.0, tol, false));
            }
        }
        Target::Expander => {
            for d in [4usize, 8, 16] {
                let g = Generator::random_unitary(d, 2, opts.seed.wrapping_add(d as u64), true)?;
                let rank = match g.family() {
                    Family::RandomUnitary { kraus_rank, .. } => *kraus_rank,
                    _ => 0,
                };
                let gap = spectral_gap_seeded(&g, opts.seed)?;
                let est = estimate_alpha_with_gap(&g, 2.0, &cfg, &gap)?.alpha_estimate;
                let upper = expander_alpha2_upper(2, d)?;
                let df = d as f64;
                let lower = 2.0 * (1.0 - 2.0 / df) * gap.lambda / (df - 1.0).ln() * (1.0 - 1e-3);
                checks.push(at_most(
                    format!("alpha2 <= upper d={d} kraus_rank={rank}"),
                    est,
                    upper,
                ));
                checks.push(at_most(
                    format!("unital lower <= alpha2 d={d} kraus_rank={rank}"),
                    lower,
                    est,
                ));
            }
        }
        Target::DaviesQubit => {
            let g = qubit_davies(1.0, 1.0)?;
            let mut rng = rng_from_seed(opts.seed);
            let (mut balance, mut min_pi) = (0.0f64, f64::INFINITY);
            for _ in 0..50 {
                let rho = random_density_mixed(&mut rng, 2, 0.05);
                let e = entropy_production(&g, &rho)?;
                balance = balance.max(e.balance_residual / (1.0 + e.pi.abs()));
                min_pi = min_pi.min(e.pi);
            }
            checks.push(within(
                "entropy balance residual".into(),
                balance,
                0.0,
                1e-8,
                false,
            ));
            checks.push(at_most("-min entropy production".into(), -min_pi, 1e-12));
            let prof = regularity_profile(&g, 100, &[0.1, 0.5, 2.0], 101, opts.seed)?;
            checks.push(Check {
                name: "strong regularity evidence".into(),
                value: prof.min_second_difference,
                reference: -1e-8,
                tolerance: 0.0,
                pass: prof.verdicts.strong() && prof.min_second_difference >= -1e-8,
            });
        }
    }
    Ok(ReproduceReport {
        target,
        pass: checks.iter().all(|c| c.pass),
        checks,
        seed: opts.seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
