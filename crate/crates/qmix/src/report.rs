//! Serializable mirrors of the core result types.

use std::collections::BTreeMap;

use qmix_core::dirichlet::GapReport;
use qmix_core::generators::LindbladData;
use qmix_core::ls_estimator::{AnalyticBounds, LSReport, PartialOrderVerdict};
use qmix_core::mixing::MixingCurve;
use qmix_core::regularity::{RegularityProfile, ScanRecord};
use qmix_core::{Family, Generator};
use serde::{Deserialize, Serialize};

use crate::spec::{matrix_to_json, MatrixJson};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FlagsJson {
    pub unital: bool,
    pub reversible: bool,
    pub primitive: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeneratorSummary {
    pub family: String,
    pub dim: usize,
    pub flags: FlagsJson,
    /// Numerical Kraus rank for channel-based families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus_rank: Option<usize>,
}

impl GeneratorSummary {
    pub fn of(g: &Generator) -> Self {
        let f = g.flags();
        let kraus_rank = match g.family() {
            Family::ChannelLift { kraus_rank, .. } | Family::RandomUnitary { kraus_rank, .. } => {
                Some(*kraus_rank)
            }
            _ => None,
        };
        GeneratorSummary {
            family: g.family().name().to_string(),
            dim: g.dim(),
            flags: FlagsJson {
                unital: f.unital,
                reversible: f.reversible,
                primitive: f.primitive,
            },
            kraus_rank,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GapJson {
    pub lambda: f64,
    pub method: String,
    pub residual: f64,
    pub validation_min_ratio: f64,
    pub validation_samples: usize,
}

impl From<&GapReport> for GapJson {
    fn from(r: &GapReport) -> Self {
        GapJson {
            lambda: r.lambda,
            method: r.method.name().to_string(),
            residual: r.residual,
            validation_min_ratio: r.validation_min_ratio,
            validation_samples: r.validation_samples,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoundsJson {
    pub closed_form: Option<f64>,
    pub unital_lower: Option<f64>,
    pub expander_upper: Option<f64>,
    pub gap_upper: f64,
}

impl From<&AnalyticBounds> for BoundsJson {
    fn from(b: &AnalyticBounds) -> Self {
        BoundsJson {
            closed_form: b.closed_form,
            unital_lower: b.unital_lower,
            expander_upper: b.expander_upper,
            gap_upper: b.gap_upper,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LsJson {
    pub p: f64,
    /// Upper bound on the true constant: the smallest ratio found.
    pub alpha_estimate: f64,
    pub witness: MatrixJson,
    pub witness_min_eig: f64,
    pub witness_ent: f64,
    pub restarts: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub use_hat: bool,
    pub diagonal: bool,
    pub analytic_bounds: BoundsJson,
}

impl From<&LSReport> for LsJson {
    fn from(r: &LSReport) -> Self {
        LsJson {
            p: r.p,
            alpha_estimate: r.alpha_estimate,
            witness: matrix_to_json(r.witness.as_matrix()),
            witness_min_eig: r.witness_min_eig,
            witness_ent: r.witness_ent,
            restarts: r.restarts,
            evaluations: r.evaluations,
            converged: r.converged,
            use_hat: r.use_hat,
            diagonal: r.diagonal,
            analytic_bounds: (&r.analytic_bounds).into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LsPair {
    pub alpha1: Option<LsJson>,
    pub alpha2: Option<LsJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RegularityJson {
    pub convex: bool,
    pub symmetric: bool,
    pub completely_monotone_to_order: usize,
    pub weak_evidence: bool,
    pub strong_evidence: bool,
    pub min_second_difference: f64,
    pub max_asymmetry: f64,
    pub endpoint_error: f64,
    pub probes: usize,
    pub worst_t: f64,
    pub worst_probe: MatrixJson,
    pub failures: Vec<String>,
}

impl From<&RegularityProfile> for RegularityJson {
    fn from(p: &RegularityProfile) -> Self {
        RegularityJson {
            convex: p.verdicts.convex,
            symmetric: p.verdicts.symmetric,
            completely_monotone_to_order: p.verdicts.completely_monotone_to_order,
            weak_evidence: p.verdicts.weak(),
            strong_evidence: p.verdicts.strong(),
            min_second_difference: p.min_second_difference,
            max_asymmetry: p.max_asymmetry,
            endpoint_error: p.endpoint_error,
            probes: p.probes,
            worst_t: p.t,
            worst_probe: matrix_to_json(p.g.as_matrix()),
            failures: p.failures.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerdictJson {
    pub alpha1: f64,
    pub alpha2: f64,
    pub lambda: f64,
    pub alpha2_le_2alpha1: bool,
    /// Absent when the generator is neither reversible nor unital.
    pub alpha1_le_lambda: Option<bool>,
    pub alpha2_le_alpha1: bool,
    pub all_ok: bool,
}

impl From<&PartialOrderVerdict> for VerdictJson {
    fn from(v: &PartialOrderVerdict) -> Self {
        VerdictJson {
            alpha1: v.alpha1,
            alpha2: v.alpha2,
            lambda: v.lambda,
            alpha2_le_2alpha1: v.ok_alpha2_le_2alpha1,
            alpha1_le_lambda: v.ok_alpha1_le_lambda,
            alpha2_le_alpha1: v.alpha2_le_alpha1,
            all_ok: v.all_ok(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    pub version: String,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnalysisReport {
    pub generator: GeneratorSummary,
    pub sigma_min: f64,
    pub gap: Option<GapJson>,
    pub ls: LsPair,
    pub regularity: Option<RegularityJson>,
    pub verdicts: Option<VerdictJson>,
    /// Reason for every null section: skipped on request or failed.
    pub missing: BTreeMap<String, String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MixingCurveJson {
    pub times: Vec<f64>,
    pub trace_dist: Vec<f64>,
    pub chi2: Vec<f64>,
    pub rel_ent: Vec<f64>,
    pub chi2_bound: Option<Vec<f64>>,
    pub ls_bound_a1: Option<Vec<f64>>,
    pub ls_bound_a2: Option<Vec<f64>>,
    pub sigma_min: f64,
    pub initial_states: usize,
}

impl From<&MixingCurve> for MixingCurveJson {
    fn from(c: &MixingCurve) -> Self {
        MixingCurveJson {
            times: c.times.clone(),
            trace_dist: c.trace_dist.clone(),
            chi2: c.chi2.clone(),
            rel_ent: c.rel_ent.clone(),
            chi2_bound: c.chi2_bound.clone(),
            ls_bound_a1: c.ls_bound_a1.clone(),
            ls_bound_a2: c.ls_bound_a2.clone(),
            sigma_min: c.sigma_min,
            initial_states: c.initial_states,
        }
    }
}

pub const CSV_HEADER: [&str; 7] = [
    "t",
    "trace_dist",
    "chi2",
    "rel_ent",
    "chi2_bound",
    "ls_bound_a1",
    "ls_bound_a2",
];

/// CSV rows; missing bound columns are left empty.
pub fn write_curve_csv<W: std::io::Write>(curve: &MixingCurve, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let cell = |col: &Option<Vec<f64>>, i: usize| {
        col.as_ref().map(|v| v[i].to_string()).unwrap_or_default()
    };
    for i in 0..curve.times.len() {
        w.write_record([
            curve.times[i].to_string(),
            curve.trace_dist[i].to_string(),
            curve.chi2[i].to_string(),
            curve.rel_ent[i].to_string(),
            cell(&curve.chi2_bound, i),
            cell(&curve.ls_bound_a1, i),
            cell(&curve.ls_bound_a2, i),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReproductionJson {
    pub hamiltonian: MatrixJson,
    pub lindblad_ops: Vec<MatrixJson>,
}

impl From<&LindbladData> for ReproductionJson {
    fn from(d: &LindbladData) -> Self {
        ReproductionJson {
            hamiltonian: matrix_to_json(d.hamiltonian.as_matrix()),
            lindblad_ops: d.ops.iter().map(matrix_to_json).collect(),
        }
    }
}

/// One JSONL line of a conjecture scan. NaN margins (non-primitive draws)
/// serialize as null.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScanLine {
    pub seed: u64,
    pub index: u64,
    pub instance_seed: u64,
    pub kind: String,
    pub dim: usize,
    pub primitive: bool,
    pub reversible: bool,
    pub convex: bool,
    pub symmetric: bool,
    pub completely_monotone_to_order: usize,
    pub min_second_difference: Option<f64>,
    pub min_weak_margin: Option<f64>,
    pub min_strong_margin: Option<f64>,
    pub weak_violation: bool,
    pub strong_violation: bool,
    pub label: String,
    pub reproduction: Option<ReproductionJson>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl ScanLine {
    pub fn new(seed: u64, r: &ScanRecord) -> Self {
        ScanLine {
            seed,
            index: r.index,
            instance_seed: r.instance_seed,
            kind: r.kind.name().to_string(),
            dim: r.dim,
            primitive: r.primitive,
            reversible: r.reversible,
            convex: r.convex,
            symmetric: r.symmetric,
            completely_monotone_to_order: r.completely_monotone_to_order,
            min_second_difference: finite(r.min_second_difference),
            min_weak_margin: finite(r.min_weak_margin),
            min_strong_margin: finite(r.min_strong_margin),
            weak_violation: r.weak_violation,
            strong_violation: r.strong_violation,
            label: r.label.to_string(),
            reproduction: r.reproduction.as_ref().map(Into::into),
        }
    }

    /// Weak violations anywhere, or strong violations of a reversible instance.
    pub fn contradicts_conjecture(&self) -> bool {
        self.weak_violation || (self.reversible && self.strong_violation)
    }
}
