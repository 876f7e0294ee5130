use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use clap::ValueEnum;
use qmix_core::dirichlet::spectral_gap_seeded;
use qmix_core::ls_estimator::{estimate_alpha_with_gap, verdict_from, EstimatorConfig};
use qmix_core::regularity::regularity_profile;
use qmix_core::Generator;

use crate::error::{CliError, CliResult};
use crate::report::{
    AnalysisReport, GapJson, GeneratorSummary, LsJson, LsPair, Provenance, RegularityJson,
    VerdictJson,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Section {
    Gap,
    Alpha1,
    Alpha2,
    Regularity,
    Verdicts,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// Estimator restarts per constant.
    pub budget: usize,
    pub seed: u64,
    pub skip: BTreeSet<Section>,
    pub regularity_probes: usize,
}

pub const REGULARITY_TIMES: [f64; 2] = [0.1, 1.0];

/// Runs the pipeline. A violated ordering verdict is returned alongside the
/// report so the caller can still write it before exiting with code 3.
pub fn analyze(
    g: &Generator,
    opts: &AnalyzeOptions,
) -> CliResult<(AnalysisReport, Option<CliError>)> {
    let start = Instant::now();
    let sigma_min = g.stationary()?.sigma_min();
    let mut missing = BTreeMap::new();
    let skipped = |s: Section, missing: &mut BTreeMap<String, String>| {
        let hit = opts.skip.contains(&s);
        if hit {
            missing.insert(section_name(s).to_string(), "skipped".to_string());
        }
        hit
    };

    // the estimator needs a gap witness even when the gap section is skipped
    let gap = spectral_gap_seeded(g, opts.seed)?;
    let gap_json = (!skipped(Section::Gap, &mut missing)).then(|| GapJson::from(&gap));

    let cfg = EstimatorConfig {
        restarts: opts.budget.max(1),
        seed: opts.seed,
        ..EstimatorConfig::default()
    };
    let estimate = |p: f64, section: Section, missing: &mut BTreeMap<String, String>| {
        if skipped(section, missing) {
            return None;
        }
        match estimate_alpha_with_gap(g, p, &cfg, &gap) {
            Ok(r) => Some(r),
            Err(e) => {
                missing.insert(section_name(section).to_string(), e.to_string());
                None
            }
        }
    };
    let a1 = estimate(1.0, Section::Alpha1, &mut missing);
    let a2 = estimate(2.0, Section::Alpha2, &mut missing);

    let regularity = if skipped(Section::Regularity, &mut missing) {
        None
    } else {
        match regularity_profile(
            g,
            opts.regularity_probes.max(1),
            &REGULARITY_TIMES,
            101,
            opts.seed,
        ) {
            Ok(p) => Some(RegularityJson::from(&p)),
            Err(e) => {
                missing.insert("regularity".to_string(), e.to_string());
                None
            }
        }
    };

    let verdict = match (&a1, &a2) {
        _ if skipped(Section::Verdicts, &mut missing) => None,
        (Some(a1), Some(a2)) => Some(verdict_from(
            a1.alpha_estimate,
            a2.alpha_estimate,
            gap.lambda,
            g,
        )),
        _ => {
            missing.insert(
                "verdicts".to_string(),
                "needs both alpha1 and alpha2".to_string(),
            );
            None
        }
    };
    let violation = verdict.as_ref().filter(|v| !v.all_ok()).map(|v| {
        CliError::Verdict(format!(
            "ordering violated: alpha1={}, alpha2={}, lambda={}",
            v.alpha1, v.alpha2, v.lambda
        ))
    });

    let report = AnalysisReport {
        generator: GeneratorSummary::of(g),
        sigma_min,
        gap: gap_json,
        ls: LsPair {
            alpha1: a1.as_ref().map(LsJson::from),
            alpha2: a2.as_ref().map(LsJson::from),
        },
        regularity,
        verdicts: verdict.as_ref().map(VerdictJson::from),
        missing,
        provenance: Provenance {
            seed: opts.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time: start.elapsed().as_secs_f64(),
        },
    };
    Ok((report, violation))
}

fn section_name(s: Section) -> &'static str {
    match s {
        Section::Gap => "gap",
        Section::Alpha1 => "alpha1",
        Section::Alpha2 => "alpha2",
        Section::Regularity => "regularity",
        Section::Verdicts => "verdicts",
    }
}
