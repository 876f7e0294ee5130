//! The trace functional h(s) and L_p-regularity evidence.
//!
//! h(s) = tr[σ^{s/4} g^{2−s} σ^{s/4} T_t(σ^{−s/4} g^s σ^{−s/4})] on s ∈ [0, 2].
//! Convexity of h is sufficient for weak regularity, symmetry about s = 1 plus
//! complete monotonicity for strong regularity. All verdicts here are evidence
//! over sampled probes, never certificates.
//!
//! The convexity argument yields the weak inequalities for ℰ̂_p (the Dirichlet
//! form of L̂), with ℰ̂_p(f) ≥ ℰ₂(I_{2,p}f) for p ≤ 2 and
//! ℰ̂_p(f) ≥ ℰ₂(I_{2,p}f)/(p−1) for p ≥ 2. The strong one is
//! ℰ_p(f) ≥ (2/p)·ℰ₂(I_{2,p}f).

use crate::dirichlet::{dirichlet_hat_p, dirichlet_p};
use crate::error::{invalid, Result};
use crate::generators::{random_davies, random_lindblad, random_reversible, Generator, LindbladData};
use crate::lp_space::{require_positive, WeightedSpace};
use crate::operator::{CMatrix, Hermitian, HermitianEigen, Superoperator};
use crate::prelude::*;
use crate::random::{gaussian_hermitian, random_ket, random_positive, rng_from_seed, SeededRng};

/// Tolerance on second differences and asymmetry, relative to h(0).
pub const CONVEXITY_TOL: f64 = 1e-8;
/// Tolerance on direct-check margins, relative to max(1, ℰ₂(I_{2,p}f)).
pub const MARGIN_TOL: f64 = 1e-8;
pub const DEFAULT_P_GRID: [f64; 9] = [1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0];
/// Highest finite-difference order used for complete monotonicity.
pub const MONOTONE_ORDER: usize = 6;

/// T_t as a reusable map on observables.
enum Semigroup<'a> {
    Dense(Superoperator),
    Lazy(&'a Generator, f64),
}

impl<'a> Semigroup<'a> {
    fn new(g: &'a Generator, t: f64) -> Result<Self> {
        if g.has_dense() {
            Ok(Semigroup::Dense(g.super_l()?.expm(t)?))
        } else {
            Ok(Semigroup::Lazy(g, t))
        }
    }

    fn apply(&self, f: &Hermitian) -> Result<Hermitian> {
        match self {
            Semigroup::Dense(s) => Ok(s.apply_hermitian(f)),
            Semigroup::Lazy(g, t) => g.evolve_observable(f, *t),
        }
    }
}

/// Precomputed spectral data of (σ, g) for repeated evaluation of h.
struct HEvaluator<'a> {
    space: &'a WeightedSpace,
    g_eig: HermitianEigen,
    semigroup: Semigroup<'a>,
}

impl<'a> HEvaluator<'a> {
    fn new(gen: &'a Generator, g: &Hermitian, t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid("t", "must be finite and ≥ 0"));
        }
        let space = gen.stationary()?;
        if g.dim() != gen.dim() {
            return Err(crate::Error::DimensionMismatch {
                expected: gen.dim(),
                found: g.dim(),
            });
        }
        let g_eig = require_positive(g)?;
        Ok(HEvaluator {
            space,
            g_eig,
            semigroup: Semigroup::new(gen, t)?,
        })
    }

    fn eval(&self, s: f64) -> Result<f64> {
        let left_g = self.g_eig.map_unchecked(|x| x.powf(2.0 - s));
        let right_g = self.g_eig.map_unchecked(|x| x.powf(s));
        let a = self.space.sigma_power(s / 4.0);
        let a_inv = self.space.sigma_power(-s / 4.0);
        let left = left_g.sandwich(&a);
        let right = right_g.sandwich(&a_inv);
        let evolved = self.semigroup.apply(&right)?;
        Ok(left.trace_with(&evolved))
    }
}

/// h(s) for a positive definite probe g.
pub fn h_functional(gen: &Generator, g: &Hermitian, t: f64, s: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&s) {
        return Err(invalid("s", "must lie in [0, 2]"));
    }
    HEvaluator::new(gen, g, t)?.eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularityVerdicts {
    pub convex: bool,
    pub symmetric: bool,
    /// Highest even order k ≤ 6 such that all even differences up to k are nonnegative.
    pub completely_monotone_to_order: usize,
}

impl RegularityVerdicts {
    pub fn weak(&self) -> bool {
        self.convex
    }

    pub fn strong(&self) -> bool {
        self.convex && self.symmetric && self.completely_monotone_to_order >= MONOTONE_ORDER
    }
}

/// Worst case of h over probes and times.
#[derive(Debug, Clone)]
pub struct RegularityProfile {
    pub s_grid: Vec<f64>,
    /// h on `s_grid` for the worst probe.
    pub h_values: Vec<f64>,
    pub t: f64,
    pub g: Hermitian,
    pub verdicts: RegularityVerdicts,
    /// Smallest second central difference over all probes, divided by h(0).
    pub min_second_difference: f64,
    /// Largest |h(s) − h(2−s)|/h(0).
    pub max_asymmetry: f64,
    /// Largest |h(0) − h(2)|/h(0), an internal consistency check.
    pub endpoint_error: f64,
    pub probes: usize,
    /// Probes whose evaluation failed numerically.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
struct SingleProfile {
    h: Vec<f64>,
    min_second: f64,
    asymmetry: f64,
    endpoint: f64,
    monotone_order: usize,
}

/// Grid of `grid_n` equally spaced points on [0, 2].
pub fn s_grid(grid_n: usize) -> Vec<f64> {
    let n = grid_n.max(3);
    (0..n).map(|k| 2.0 * k as f64 / (n - 1) as f64).collect()
}

fn profile_single(eval: &HEvaluator<'_>, grid: &[f64]) -> Result<SingleProfile> {
    let h = grid.iter().map(|&s| eval.eval(s)).collect::<Result<Vec<f64>>>()?;
    let scale = h[0].abs().max(f64::MIN_POSITIVE);
    let n = h.len();
    let min_second = (1..n - 1)
        .map(|i| (h[i - 1] - 2.0 * h[i] + h[i + 1]) / scale)
        .fold(f64::INFINITY, f64::min);
    let asymmetry = (0..n).map(|i| (h[i] - h[n - 1 - i]).abs() / scale).fold(0.0, f64::max);
    let endpoint = (h[0] - h[n - 1]).abs() / scale;
    Ok(SingleProfile {
        monotone_order: monotone_order(&h, scale),
        h,
        min_second,
        asymmetry,
        endpoint,
    })
}

/// Even-order forward differences, each compared against a rounding floor
/// that grows as 2^k with the order k.
fn monotone_order(h: &[f64], scale: f64) -> usize {
    let mut diff = h.to_vec();
    let mut passed = 0;
    for k in 1..=MONOTONE_ORDER {
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
        if k % 2 == 1 {
            continue;
        }
        let floor = (1u64 << k) as f64 * 1e-13 * scale;
        if diff.iter().all(|&v| v >= -floor) {
            passed = k;
        } else {
            break;
        }
    }
    passed
}

/// Probe family: exp(GUE) for even indices, ε𝟙 + |ψ⟩⟨ψ| for odd ones.
pub fn probe(rng: &mut SeededRng, d: usize, index: usize) -> Hermitian {
    if index % 2 == 0 {
        random_positive(rng, d, 1.0)
    } else {
        let psi = random_ket(rng, d);
        let v = CMatrix::from_column_slice(d, 1, &psi);
        let proj = Hermitian::symmetrize(&v * v.adjoint());
        proj.shift(1e-3)
    }
}

pub fn regularity_profile(
    gen: &Generator,
    probes: usize,
    times: &[f64],
    grid_n: usize,
    seed: u64,
) -> Result<RegularityProfile> {
    gen.stationary()?;
    if times.is_empty() || probes == 0 {
        return Err(invalid("probes", "need at least one probe and one time"));
    }
    let grid = s_grid(grid_n);
    let mut rng = rng_from_seed(seed);
    let d = gen.dim();
    let gs: Vec<Hermitian> = (0..probes).map(|k| probe(&mut rng, d, k)).collect();

    let mut worst: Option<(SingleProfile, f64, Hermitian)> = None;
    let mut verdicts = RegularityVerdicts {
        convex: true,
        symmetric: true,
        completely_monotone_to_order: MONOTONE_ORDER,
    };
    let (mut max_asym, mut max_end) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for &t in times {
        for (k, g) in gs.iter().enumerate() {
            let res = HEvaluator::new(gen, g, t).and_then(|e| profile_single(&e, &grid));
            let p = match res {
                Ok(p) => p,
                Err(e) => {
                    failures.push(format!("probe {k} at t={t}: {e}"));
                    continue;
                }
            };
            verdicts.convex &= p.min_second >= -CONVEXITY_TOL;
            verdicts.symmetric &= p.asymmetry <= CONVEXITY_TOL;
            verdicts.completely_monotone_to_order = verdicts.completely_monotone_to_order.min(p.monotone_order);
            max_asym = max_asym.max(p.asymmetry);
            max_end = max_end.max(p.endpoint);
            if worst.as_ref().map_or(true, |w| p.min_second < w.0.min_second) {
                worst = Some((p, t, g.clone()));
            }
        }
    }
    let (w, t, g) = worst.ok_or_else(|| crate::Error::InvalidState("every probe failed".to_string()))?;
    Ok(RegularityProfile {
        s_grid: grid,
        h_values: w.h,
        t,
        g,
        verdicts,
        min_second_difference: w.min_second,
        max_asymmetry: max_asym,
        endpoint_error: max_end,
        probes: probes * times.len(),
        failures,
    })
}

/// Weak-condition factor c(p) in ℰ̂_p ≥ c(p)·ℰ₂(I_{2,p}f).
pub fn weak_factor(p: f64) -> f64 {
    if p <= 2.0 {
        1.0
    } else {
        1.0 / (p - 1.0)
    }
}

/// The weak factor exactly as first stated, (p − 1) for p ≥ 2. It is violated
/// near f = 𝟙 for every p > 2 and is kept for comparison only.
pub fn literal_weak_factor(p: f64) -> f64 {
    if p <= 2.0 {
        1.0
    } else {
        p - 1.0
    }
}

pub fn strong_factor(p: f64) -> f64 {
    2.0 / p
}

/// Margins of the direct regularity inequalities at one (p, f).
#[derive(Debug, Clone, Copy)]
pub struct PointMargins {
    pub p: f64,
    /// ℰ̂_p(f) − c(p)·ℰ₂(I_{2,p}f).
    pub weak: f64,
    /// ℰ_p(f) − c(p)·ℰ₂(I_{2,p}f), the same bound with L in place of L̂.
    pub weak_plain: f64,
    /// ℰ_p(f) − (2/p)·ℰ₂(I_{2,p}f).
    pub strong: f64,
    /// ℰ₂(I_{2,p}f), used to scale the tolerance.
    pub reference: f64,
}

pub fn point_margins(gen: &Generator, p: f64, f: &Hermitian) -> Result<PointMargins> {
    let space = gen.stationary()?;
    let i = space.power_operator(2.0, p, f)?;
    let e2 = dirichlet_p(gen, 2.0, &i)?;
    let ep = dirichlet_p(gen, p, f)?;
    let ehat = dirichlet_hat_p(gen, p, f)?;
    Ok(PointMargins {
        p,
        weak: ehat - weak_factor(p) * e2,
        weak_plain: ep - weak_factor(p) * e2,
        strong: ep - strong_factor(p) * e2,
        reference: e2,
    })
}

#[derive(Debug, Clone)]
pub struct DirectRegularityReport {
    pub p_grid: Vec<f64>,
    /// Worst normalized margin per p (margin / max(1, reference)).
    pub weak_margins: Vec<f64>,
    pub weak_plain_margins: Vec<f64>,
    pub strong_margins: Vec<f64>,
    pub min_weak: f64,
    pub min_strong: f64,
    pub weak_violation: bool,
    pub strong_violation: bool,
    /// Probe attaining the smallest weak margin.
    pub worst_probe: Option<Hermitian>,
    pub probes: usize,
}

pub fn direct_regularity_check(
    gen: &Generator,
    p_grid: &[f64],
    probes: usize,
    seed: u64,
) -> Result<DirectRegularityReport> {
    gen.stationary()?;
    let mut rng = rng_from_seed(seed);
    let d = gen.dim();
    let fs: Vec<Hermitian> = (0..probes).map(|k| probe(&mut rng, d, k)).collect();
    let n = p_grid.len();
    let mut weak = vec![f64::INFINITY; n];
    let mut weak_plain = vec![f64::INFINITY; n];
    let mut strong = vec![f64::INFINITY; n];
    let mut worst: Option<(f64, Hermitian)> = None;
    for f in &fs {
        for (k, &p) in p_grid.iter().enumerate() {
            let m = point_margins(gen, p, f)?;
            let scale = m.reference.abs().max(1.0);
            let w = m.weak / scale;
            weak[k] = weak[k].min(w);
            weak_plain[k] = weak_plain[k].min(m.weak_plain / scale);
            strong[k] = strong[k].min(m.strong / scale);
            if worst.as_ref().map_or(true, |(v, _)| w < *v) {
                worst = Some((w, f.clone()));
            }
        }
    }
    let min_weak = weak.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_strong = strong.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DirectRegularityReport {
        p_grid: p_grid.to_vec(),
        weak_margins: weak,
        weak_plain_margins: weak_plain,
        strong_margins: strong,
        min_weak,
        min_strong,
        weak_violation: min_weak < -MARGIN_TOL,
        strong_violation: min_strong < -MARGIN_TOL,
        worst_probe: worst.map(|(_, f)| f),
        probes,
    })
}

/// Instance families drawn by the conjecture scan, cycled by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Generic,
    Reversible,
    Davies,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 3] = [InstanceKind::Generic, InstanceKind::Reversible, InstanceKind::Davies];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Generic => "generic",
            InstanceKind::Reversible => "reversible",
            InstanceKind::Davies => "davies",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub dims: Vec<usize>,
    pub kinds: Vec<InstanceKind>,
    pub probes: usize,
    pub times: Vec<f64>,
    pub grid_n: usize,
    pub p_grid: Vec<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            dims: vec![2, 3],
            kinds: InstanceKind::ALL.to_vec(),
            probes: 10,
            times: vec![0.1, 1.0],
            grid_n: 101,
            p_grid: DEFAULT_P_GRID.to_vec(),
        }
    }
}

/// One line of a conjecture scan.
#[derive(Debug, Clone)]
pub struct ScanRecord {
    pub index: u64,
    /// Seed that regenerates this instance alone.
    pub instance_seed: u64,
    pub kind: InstanceKind,
    pub dim: usize,
    pub primitive: bool,
    pub reversible: bool,
    pub convex: bool,
    pub symmetric: bool,
    pub completely_monotone_to_order: usize,
    pub min_second_difference: f64,
    pub min_weak_margin: f64,
    pub min_strong_margin: f64,
    pub weak_violation: bool,
    pub strong_violation: bool,
    pub label: &'static str,
    /// Hamiltonian and jump operators, retained when a violation is recorded.
    pub reproduction: Option<LindbladData>,
}

/// Classification of h-evidence against the direct check.
pub fn regularity_label(convex: bool, weak_violation: bool) -> &'static str {
    match (convex, weak_violation) {
        (_, true) => "weak-violation",
        (true, false) => "regular-h",
        (false, false) => "inconclusive-h / regular-direct",
    }
}

pub fn instance_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Draws instance `index` of a scan; `None` when the draw is not primitive.
pub fn scan_instance_generator(config: &ScanConfig, seed: u64, index: u64) -> Result<(InstanceKind, usize, u64, Generator)> {
    if config.dims.is_empty() || config.kinds.is_empty() {
        return Err(invalid("dims", "scan needs at least one dimension and one family"));
    }
    let n_dims = config.dims.len() as u64;
    let d = config.dims[(index % n_dims) as usize];
    let kind = config.kinds[((index / n_dims) % config.kinds.len() as u64) as usize];
    let s = instance_seed(seed, index);
    let mut rng = rng_from_seed(s);
    let g = match kind {
        InstanceKind::Generic => random_lindblad(&mut rng, d, 2, 1.0)?,
        InstanceKind::Reversible => random_reversible(&mut rng, d)?,
        InstanceKind::Davies => random_davies(&mut rng, d)?,
    };
    Ok((kind, d, s, g))
}

pub fn scan_instance(config: &ScanConfig, seed: u64, index: u64) -> Result<ScanRecord> {
    let (kind, dim, s, g) = scan_instance_generator(config, seed, index)?;
    let mut rec = ScanRecord {
        index,
        instance_seed: s,
        kind,
        dim,
        primitive: g.is_primitive(),
        reversible: g.flags().reversible,
        convex: false,
        symmetric: false,
        completely_monotone_to_order: 0,
        min_second_difference: f64::NAN,
        min_weak_margin: f64::NAN,
        min_strong_margin: f64::NAN,
        weak_violation: false,
        strong_violation: false,
        label: "not-primitive",
        reproduction: None,
    };
    if !rec.primitive {
        return Ok(rec);
    }
    let profile = regularity_profile(&g, config.probes, &config.times, config.grid_n, s)?;
    let direct = direct_regularity_check(&g, &config.p_grid, config.probes, s.wrapping_add(1))?;
    rec.convex = profile.verdicts.convex;
    rec.symmetric = profile.verdicts.symmetric;
    rec.completely_monotone_to_order = profile.verdicts.completely_monotone_to_order;
    rec.min_second_difference = profile.min_second_difference;
    rec.min_weak_margin = direct.min_weak;
    rec.min_strong_margin = direct.min_strong;
    rec.weak_violation = direct.weak_violation;
    rec.strong_violation = direct.strong_violation;
    rec.label = regularity_label(rec.convex, rec.weak_violation);
    if rec.weak_violation || rec.strong_violation {
        rec.reproduction = g.lindblad_data().cloned();
    }
    Ok(rec)
}

/// Runs instances `0..n_instances` of a scan.
pub fn conjecture_scan(n_instances: u64, config: &ScanConfig, seed: u64) -> Result<Vec<ScanRecord>> {
    (0..n_instances).map(|i| scan_instance(config, seed, i)).collect()
}

/// Random Gaussian-exponential positive probe, exposed for external drivers.
pub fn gaussian_probe(rng: &mut SeededRng, d: usize, scale: f64) -> Hermitian {
    let h = gaussian_hermitian(rng, d, scale);
    h.eig().map_unchecked(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{qubit_davies, random_projection, random_unital};

    #[test]
    fn endpoints_equal_squared_norm() {
        let mut rng = rng_from_seed(1);
        let g = random_reversible(&mut rng, 3).unwrap();
        let space = g.stationary().unwrap();
        for k in 0..6 {
            let p = probe(&mut rng, 3, k);
            let f = space.gamma_power(-0.5, &p).unwrap();
            let n2 = space.lp_norm(2.0, &f).unwrap().powi(2);
            for t in [0.1, 1.0] {
                let h0 = h_functional(&g, &p, t, 0.0).unwrap();
                let h2 = h_functional(&g, &p, t, 2.0).unwrap();
                assert!((h0 - n2).abs() < 1e-9 * n2);
                assert!((h2 - n2).abs() < 1e-9 * n2);
            }
        }
    }

    #[test]
    fn unital_diagonal_probe_matches_exponential_sum() {
        let mut rng = rng_from_seed(2);
        let g = random_unital(&mut rng, 3, 2).unwrap();
        let t = 0.7;
        let probe = Hermitian::from_diagonal(&[0.3, 1.1, 2.4]);
        // M_kl = ⟨k|T_t(|l⟩⟨l|)|k⟩
        let mut m = [[0.0; 3]; 3];
        for l in 0..3 {
            let mut e = [0.0; 3];
            e[l] = 1.0;
            let img = g.evolve_observable(&Hermitian::from_diagonal(&e), t).unwrap();
            for k in 0..3 {
                m[k][l] = img.as_matrix()[(k, k)].re;
            }
        }
        let gk: [f64; 3] = [0.3, 1.1, 2.4];
        for s in [0.0, 0.3, 1.0, 1.7, 2.0] {
            let mut expect = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    expect += gk[k] * gk[k] * (gk[l] / gk[k]).powf(s) * m[k][l];
                }
            }
            let h = h_functional(&g, &probe, t, s).unwrap();
            assert!((h - expect).abs() < 1e-10 * expect.abs().max(1.0), "{h} {expect}");
        }
    }

    #[test]
    fn projection_closed_form() {
        let mut rng = rng_from_seed(3);
        let gamma = 0.8;
        let g = random_projection(&mut rng, 3, gamma).unwrap();
        let space = g.stationary().unwrap();
        let probe = random_positive(&mut rng, 3, 0.7);
        let t = 0.6;
        let e = (-t * gamma).exp();
        let pe = probe.eig();
        let se = space.sigma_eig();
        for s in [0.0, 0.4, 1.0, 1.5, 2.0] {
            let a = se.map_unchecked(|x| x.powf(s / 2.0));
            let b = se.map_unchecked(|x| x.powf(1.0 - s / 2.0));
            let ga = pe.map_unchecked(|x| x.powf(2.0 - s));
            let gb = pe.map_unchecked(|x| x.powf(s));
            let g2 = pe.map_unchecked(|x| x * x);
            let expect = (1.0 - e) * a.trace_with(&ga) * b.trace_with(&gb) + e * g2.trace();
            let h = h_functional(&g, &probe, t, s).unwrap();
            assert!((h - expect).abs() < 1e-10 * expect, "{h} {expect}");
        }
    }

    #[test]
    fn projection_form_with_full_sigma_exponents_breaks_endpoint() {
        let mut rng = rng_from_seed(3);
        let g = random_projection(&mut rng, 3, 0.8).unwrap();
        let space = g.stationary().unwrap();
        let probe = random_positive(&mut rng, 3, 0.7);
        let t = 0.6;
        let e = (-t * 0.8f64).exp();
        let pe = probe.eig();
        let se = space.sigma_eig();
        let s = 2.0;
        let a = se.map_unchecked(|x| x.powf(s));
        let b = se.map_unchecked(|x| x.powf(1.0 - s));
        let g2 = pe.map_unchecked(|x| x * x).trace();
        let literal = (1.0 - e) * a.trace_with(&pe.map_unchecked(|x| x.powf(2.0 - s))) * b.trace_with(&pe.map_unchecked(|x| x.powf(s))) + e * g2;
        let h2 = h_functional(&g, &probe, t, s).unwrap();
        assert!((h2 - g2).abs() < 1e-9 * g2);
        assert!((literal - g2).abs() > 1e-3 * g2);
    }

    #[test]
    fn rejects_non_positive_probe() {
        let g = Generator::depolarizing(2, 1.0).unwrap();
        let bad = Hermitian::from_diagonal(&[1.0, -0.5]);
        assert!(h_functional(&g, &bad, 0.5, 1.0).is_err());
        assert!(h_functional(&g, &Hermitian::identity(2), 0.5, 2.5).is_err());
    }

    #[test]
    fn depolarizing_profile_is_strong() {
        let g = Generator::depolarizing(3, 1.0).unwrap();
        let prof = regularity_profile(&g, 20, &[0.1, 0.5, 2.0], 101, 4).unwrap();
        assert!(prof.verdicts.strong(), "{:?} {}", prof.verdicts, prof.max_asymmetry);
        assert!(prof.endpoint_error < 1e-9);
        assert!(prof.failures.is_empty());
    }

    #[test]
    fn qubit_davies_profile_is_strong() {
        let g = qubit_davies(1.0, 0.8).unwrap();
        let prof = regularity_profile(&g, 20, &[0.1, 0.5, 2.0], 101, 5).unwrap();
        assert!(prof.verdicts.strong(), "{:?}", prof.verdicts);
    }

    #[test]
    fn non_reversible_unital_is_convex() {
        let mut rng = rng_from_seed(6);
        let g = random_unital(&mut rng, 3, 2).unwrap();
        assert!(!g.flags().reversible);
        let prof = regularity_profile(&g, 20, &[0.2, 1.0], 101, 7).unwrap();
        assert!(prof.verdicts.convex, "{}", prof.min_second_difference);
    }

    #[test]
    fn margin_vanishes_at_p_two() {
        let mut rng = rng_from_seed(8);
        let g = random_lindblad(&mut rng, 3, 2, 1.0).unwrap();
        for k in 0..10 {
            let f = probe(&mut rng, 3, k);
            let m = point_margins(&g, 2.0, &f).unwrap();
            assert!(m.strong.abs() <= 1e-10 * m.reference.max(1.0));
            assert!(m.weak_plain.abs() <= 1e-10 * m.reference.max(1.0));
            assert!(m.weak.abs() <= 1e-10 * m.reference.max(1.0));
        }
    }

    #[test]
    fn depolarizing_strong_margins() {
        let g = Generator::depolarizing(3, 1.0).unwrap();
        let r = direct_regularity_check(&g, &[1.25, 1.5, 3.0, 4.0], 20, 9).unwrap();
        assert!(r.min_strong >= -1e-8, "{:?}", r.strong_margins);
        assert!(!r.weak_violation);
    }

    #[test]
    fn literal_weak_factor_fails_near_identity() {
        let g = Generator::depolarizing(3, 1.0).unwrap();
        let mut rng = rng_from_seed(10);
        let dir = gaussian_hermitian(&mut rng, 3, 1.0);
        let f = dir.scale(1e-3).eig().map_unchecked(f64::exp);
        for p in [3.0, 4.0] {
            let space = g.stationary().unwrap();
            let i = space.power_operator(2.0, p, &f).unwrap();
            let e2 = dirichlet_p(&g, 2.0, &i).unwrap();
            let ep = dirichlet_hat_p(&g, p, &f).unwrap();
            assert!(ep < literal_weak_factor(p) * e2);
            assert!(ep >= weak_factor(p) * e2);
            // near the identity the ratio tends to 2/p
            assert!((ep / e2 - 2.0 / p).abs() < 1e-2);
        }
    }

    #[test]
    fn convexity_implies_hat_weak_margins() {
        let mut rng = rng_from_seed(11);
        for _ in 0..4 {
            let g = random_lindblad(&mut rng, 2, 2, 1.0).unwrap();
            if !g.is_primitive() {
                continue;
            }
            let prof = regularity_profile(&g, 10, &[0.1, 1.0], 101, 12).unwrap();
            let direct = direct_regularity_check(&g, &DEFAULT_P_GRID, 10, 13).unwrap();
            if prof.verdicts.convex {
                assert!(direct.min_weak >= -1e-7, "{}", direct.min_weak);
            }
        }
    }

    #[test]
    fn scan_is_deterministic_and_labelled() {
        let cfg = ScanConfig {
            dims: vec![2],
            probes: 4,
            times: vec![0.5],
            grid_n: 51,
            ..ScanConfig::default()
        };
        let a = conjecture_scan(3, &cfg, 99).unwrap();
        let b = scan_instance(&cfg, 99, 1).unwrap();
        assert_eq!(a[1].instance_seed, b.instance_seed);
        assert_eq!(a[1].min_weak_margin.to_bits(), b.min_weak_margin.to_bits());
        assert_eq!(a[0].kind, InstanceKind::Generic);
        assert_eq!(a[1].kind, InstanceKind::Reversible);
        for r in &a {
            assert!(!r.weak_violation);
        }
        assert_eq!(regularity_label(false, false), "inconclusive-h / regular-direct");
    }

    #[test]
    fn probe_family_is_positive() {
        let mut rng = rng_from_seed(14);
        for k in 0..8 {
            let p = probe(&mut rng, 4, k);
            assert!(p.min_eigenvalue() > 0.0);
        }
    }
}
