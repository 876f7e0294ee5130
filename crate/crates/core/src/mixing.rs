//! Distances to the stationary state, semigroup evolution and mixing bounds.
//!
//! Trace distance is the full trace norm ‖ρ − σ‖_tr = tr|ρ − σ|.
//! χ²(ρ, σ) = tr[(ρ−σ)σ^{−1/2}(ρ−σ)σ^{−1/2}] and D(ρ‖σ) = tr[ρ(log ρ − log σ)].

use crate::dirichlet::{dirichlet_hat_p, spectral_gap};
use crate::error::{invalid, Error, Result};
use crate::generators::{Family, Generator};
use crate::lp_space::{require_positive, WeightedSpace};
use crate::operator::{c, vec_of, CMatrix, Hermitian, Superoperator};
use crate::optimize::NelderMead;
use crate::prelude::*;
use crate::random::{gaussian_hermitian, ginibre, random_pure_state, rng_from_seed, SeededRng};

/// Slack for trace-one and positivity checks on states.
pub const STATE_TOL: f64 = 1e-10;
/// Slack when comparing empirical distances with bound curves.
pub const DOMINATION_SLACK: f64 = 1e-7;
/// Haar-random pure states added to σ's eigenprojectors in worst-case searches.
pub const DEFAULT_HAAR_STATES: usize = 50;

pub fn trace_norm(a: &Hermitian) -> f64 {
    a.eig().values.iter().map(|v| v.abs()).sum()
}

/// Checks trace one and positivity to `STATE_TOL`.
pub fn validate_density(rho: &Hermitian) -> Result<()> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min = rho.min_eigenvalue();
    if min < -STATE_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    pub trace: f64,
    pub chi2: f64,
    pub rel_ent: f64,
}

pub fn chi2_divergence(rho: &Hermitian, space: &WeightedSpace) -> Result<f64> {
    let diff = rho.sub(space.sigma());
    let w = space.weight_general(-0.5, -0.5, diff.as_matrix());
    let v = crate::operator::trace_product_re(diff.as_matrix(), &w);
    Ok(v.max(0.0))
}

pub fn distances(rho: &Hermitian, space: &WeightedSpace) -> Result<Distances> {
    validate_density(rho)?;
    let trace = trace_norm(&rho.sub(space.sigma()));
    let chi2 = chi2_divergence(rho, space)?;
    let rel_ent = space.relative_entropy(rho)?;
    debug_assert!(trace * trace <= chi2 * (1.0 + 1e-9) + 1e-12);
    debug_assert!(trace * trace <= 2.0 * rel_ent * (1.0 + 1e-9) + 1e-12);
    Ok(Distances { trace, chi2, rel_ent })
}

/// ρ^σ = Γ_σ⁻¹(ρ), the relative density of a state.
#[derive(Debug, Clone)]
pub struct RelativeDensity {
    pub value: Hermitian,
}

impl RelativeDensity {
    pub fn from_state(rho: &Hermitian, space: &WeightedSpace) -> Result<Self> {
        validate_density(rho)?;
        Ok(RelativeDensity {
            value: space.gamma_inv(rho)?,
        })
    }

    pub fn to_state(&self, space: &WeightedSpace) -> Result<Hermitian> {
        space.gamma(&self.value)
    }
}

/// ρ_t = e^{tL*}(ρ₀).
pub fn evolve(g: &Generator, rho0: &Hermitian, t: f64) -> Result<Hermitian> {
    if !(t >= 0.0) {
        return Err(invalid("t", "must be ≥ 0"));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    g.evolve_state(rho0, t)
}

enum Kind {
    Closed { gamma: f64 },
    /// e^{tL*} = left·diag(e^{tμ})·right.
    Spectral { left: CMatrix, values: Vec<f64>, right: CMatrix },
    Expm(Superoperator),
}

/// Reusable state propagator t ↦ e^{tL*}.
pub struct Propagator {
    dim: usize,
    kind: Kind,
}

/// State map at one time.
pub struct StateMap {
    dim: usize,
    inner: StateMapKind,
}

enum StateMapKind {
    Closed { decay: f64 },
    Dense(Superoperator),
}

impl StateMap {
    pub fn apply(&self, rho: &Hermitian) -> Hermitian {
        match &self.inner {
            StateMapKind::Closed { decay } => {
                let tr = rho.trace();
                rho.scale(*decay).shift((1.0 - decay) * tr / self.dim as f64)
            }
            StateMapKind::Dense(s) => s.apply_hermitian(rho),
        }
    }
}

impl Propagator {
    pub fn new(g: &Generator) -> Result<Self> {
        let d = g.dim();
        if !g.has_dense() {
            if let Family::Depolarizing { gamma } = g.family() {
                return Ok(Propagator {
                    dim: d,
                    kind: Kind::Closed { gamma: *gamma },
                });
            }
        }
        let space = g.stationary()?;
        if g.flags().reversible {
            let q = crate::dirichlet::similarity_transform(g, space)?;
            let eig = Hermitian::symmetrize(q).eig();
            let q4 = space.sigma_power(0.25);
            let iq4 = space.sigma_power(-0.25);
            let s = Superoperator::sandwich(q4.as_matrix(), q4.as_matrix())?;
            let s_inv = Superoperator::sandwich(iq4.as_matrix(), iq4.as_matrix())?;
            let left = s.matrix() * &eig.vectors;
            let right = eig.vectors.adjoint() * s_inv.matrix();
            return Ok(Propagator {
                dim: d,
                kind: Kind::Spectral {
                    left,
                    values: eig.values,
                    right,
                },
            });
        }
        Ok(Propagator {
            dim: d,
            kind: Kind::Expm(g.super_lstar()?.clone()),
        })
    }

    pub fn at(&self, t: f64) -> Result<StateMap> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid("t", "must be finite and ≥ 0"));
        }
        let inner = match &self.kind {
            Kind::Closed { gamma, .. } => StateMapKind::Closed {
                decay: (-gamma * t).exp(),
            },
            Kind::Spectral { left, values, right } => {
                let mut r = right.clone();
                for (i, v) in values.iter().enumerate() {
                    let e = c((t * v.min(0.0)).exp());
                    r.row_mut(i).scale_mut(e.re);
                }
                StateMapKind::Dense(Superoperator::from_matrix(self.dim, left * r)?)
            }
            Kind::Expm(l) => StateMapKind::Dense(l.expm(t)?),
        };
        Ok(StateMap { dim: self.dim, inner })
    }
}

/// Initial states for worst-case searches: eigenprojectors of σ (smallest
/// eigenvalue first) followed by Haar-random pure states.
pub fn initial_states(space: &WeightedSpace, n_haar: usize, seed: u64) -> Vec<Hermitian> {
    let d = space.dim();
    let vecs = &space.sigma_eig().vectors;
    let mut out: Vec<Hermitian> = (0..d)
        .map(|k| {
            let col = vecs.column(k);
            Hermitian::symmetrize(&col * col.adjoint())
        })
        .collect();
    let mut rng = rng_from_seed(seed);
    out.extend((0..n_haar).map(|_| random_pure_state(&mut rng, d)));
    out
}

/// Constants feeding the bound columns; absent constants omit their column.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundConstants {
    pub lambda: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    /// Strong regularity allows e^{−α₂t}; otherwise the weak rate e^{−α₂t/2} is used.
    pub strong_regular: bool,
}

#[derive(Debug, Clone)]
pub struct MixingCurve {
    pub times: Vec<f64>,
    /// Worst case over the initial-state sample.
    pub trace_dist: Vec<f64>,
    pub chi2: Vec<f64>,
    pub rel_ent: Vec<f64>,
    pub chi2_bound: Option<Vec<f64>>,
    pub ls_bound_a1: Option<Vec<f64>>,
    pub ls_bound_a2: Option<Vec<f64>>,
    pub sigma_min: f64,
    pub initial_states: usize,
}

impl MixingCurve {
    /// Pointwise min of the available bounds, if any.
    pub fn best_bound(&self, i: usize) -> Option<f64> {
        [&self.chi2_bound, &self.ls_bound_a1, &self.ls_bound_a2]
            .iter()
            .filter_map(|c| c.as_ref().map(|v| v[i]))
            .reduce(f64::min)
    }

    /// Largest excess of the empirical trace distance over each available bound.
    pub fn max_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for col in [&self.chi2_bound, &self.ls_bound_a1, &self.ls_bound_a2].into_iter().flatten() {
            for (e, b) in self.trace_dist.iter().zip(col) {
                worst = worst.max(e - b);
            }
        }
        worst
    }

    pub fn dominated(&self) -> bool {
        self.max_violation() <= DOMINATION_SLACK
    }
}

pub fn chi2_bound_value(sigma_min: f64, lambda: f64, t: f64) -> f64 {
    (1.0 / sigma_min).sqrt() * (-lambda * t).exp()
}

pub fn ls_bound_value(sigma_min: f64, rate: f64, t: f64) -> f64 {
    (2.0 * (1.0 / sigma_min).ln()).sqrt() * (-rate * t).exp()
}

/// First time a bound prefactor·e^{−rate·t} falls to ε.
pub fn bound_crossing(prefactor: f64, rate: f64, epsilon: f64) -> f64 {
    if prefactor <= epsilon {
        0.0
    } else {
        (prefactor / epsilon).ln() / rate
    }
}

pub fn chi2_crossing(sigma_min: f64, lambda: f64, epsilon: f64) -> f64 {
    bound_crossing((1.0 / sigma_min).sqrt(), lambda, epsilon)
}

pub fn ls_crossing(sigma_min: f64, alpha: f64, epsilon: f64) -> f64 {
    bound_crossing((2.0 * (1.0 / sigma_min).ln()).sqrt(), alpha, epsilon)
}

/// Worst-case distances over `states` at each time.
pub fn empirical_worst(g: &Generator, states: &[Hermitian], times: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let space = g.stationary()?;
    let prop = Propagator::new(g)?;
    let (mut tr, mut chi, mut ent) = (Vec::new(), Vec::new(), Vec::new());
    for &t in times {
        let map = prop.at(t)?;
        let (mut a, mut b, mut e) = (0.0f64, 0.0f64, 0.0f64);
        for rho in states {
            let rt = map.apply(rho);
            let dist = distances(&rt, space)?;
            a = a.max(dist.trace);
            b = b.max(dist.chi2);
            e = e.max(dist.rel_ent);
        }
        tr.push(a);
        chi.push(b);
        ent.push(e);
    }
    Ok((tr, chi, ent))
}

pub fn bound_curves(
    g: &Generator,
    constants: &BoundConstants,
    times: &[f64],
    n_haar: usize,
    seed: u64,
) -> Result<MixingCurve> {
    let space = g.stationary()?;
    let states = initial_states(space, n_haar, seed);
    let (trace_dist, chi2, rel_ent) = empirical_worst(g, &states, times)?;
    let smin = space.sigma_min();
    let col = |rate: Option<f64>, f: fn(f64, f64, f64) -> f64| rate.map(|r| times.iter().map(|&t| f(smin, r, t)).collect());
    let a2_rate = constants
        .alpha2
        .map(|a| if constants.strong_regular { a } else { a / 2.0 });
    Ok(MixingCurve {
        times: times.to_vec(),
        trace_dist,
        chi2,
        rel_ent,
        chi2_bound: col(constants.lambda, chi2_bound_value),
        ls_bound_a1: col(constants.alpha1, ls_bound_value),
        ls_bound_a2: col(a2_rate, ls_bound_value),
        sigma_min: smin,
        initial_states: states.len(),
    })
}

/// Evenly spaced grid on [0, t_max].
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct MixingTime {
    pub tau: f64,
    pub epsilon: f64,
    /// Size of the initial-state sample; τ is exact only over this sample.
    pub samples: usize,
}

/// τ_mix(ε) over σ's eigenprojectors plus `n_haar` Haar pure states.
pub fn mixing_time(g: &Generator, epsilon: f64, n_haar: usize, seed: u64) -> Result<MixingTime> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    let space = g.stationary()?;
    let states = initial_states(space, n_haar, seed);
    let samples = states.len();
    if epsilon >= 2.0 {
        return Ok(MixingTime { tau: 0.0, epsilon, samples });
    }
    let prop = Propagator::new(g)?;
    let worst = |t: f64| -> Result<f64> {
        let map = prop.at(t)?;
        let mut w = 0.0f64;
        for rho in &states {
            w = w.max(trace_norm(&map.apply(rho).sub(space.sigma())));
        }
        Ok(w)
    };
    if worst(0.0)? <= epsilon {
        return Ok(MixingTime { tau: 0.0, epsilon, samples });
    }
    let lambda = spectral_gap(g)?.lambda.max(1e-12);
    let mut hi = 1.0 / lambda;
    let mut doublings = 0;
    while worst(hi)? > epsilon {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::InvalidState("trace distance does not reach ε".to_string()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if worst(mid)? > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MixingTime { tau: hi, epsilon, samples })
}

#[derive(Debug, Clone)]
pub struct EntropyDecayReport {
    pub times: Vec<f64>,
    /// e^{−2λt}Var(f₀) − Var(f_t).
    pub variance_margins: Vec<f64>,
    /// e^{−2α₁t}Ent₁(f₀) − Ent₁(f_t).
    pub entropy_margins: Vec<f64>,
    /// |d/dt Ent₁(f_t) + 2ℰ̂₁(f_t)| / max(1, |ℰ̂₁(f_t)|) at interior grid points.
    pub derivative_errors: Vec<f64>,
    pub ok: bool,
}

pub fn entropy_decay_check(
    g: &Generator,
    lambda: f64,
    alpha1: f64,
    f0: &RelativeDensity,
    times: &[f64],
) -> Result<EntropyDecayReport> {
    let space = g.stationary()?;
    let rho0 = f0.to_state(space)?;
    let prop = Propagator::new(g)?;
    let var0 = space.variance(&f0.value)?;
    // Ent₁(Γ⁻¹ρ) = D(ρ‖σ), which also covers rank-deficient inputs
    let ent0 = space.relative_entropy(&rho0)?;
    let state_at = |t: f64| -> Result<Hermitian> { Ok(prop.at(t)?.apply(&rho0)) };
    let ent_at = |t: f64| -> Result<f64> { space.relative_entropy(&state_at(t)?) };
    let mut var_m = Vec::new();
    let mut ent_m = Vec::new();
    let mut der = Vec::new();
    let h = 1e-4;
    for &t in times {
        let rt = state_at(t)?;
        let ft = space.gamma_inv(&rt)?;
        var_m.push((-2.0 * lambda * t).exp() * var0 - space.variance(&ft)?);
        ent_m.push((-2.0 * alpha1 * t).exp() * ent0 - space.relative_entropy(&rt)?);
        if t > h && require_positive(&ft).is_ok() {
            let plus = ent_at(t + h)?;
            let minus = ent_at(t - h)?;
            let fd = (plus - minus) / (2.0 * h);
            let e = dirichlet_hat_p(g, 1.0, &ft)?;
            der.push((fd + 2.0 * e).abs() / e.abs().max(1.0));
        }
    }
    let ok = var_m.iter().chain(&ent_m).all(|&m| m >= -DOMINATION_SLACK) && der.iter().all(|&e| e <= 1e-4);
    Ok(EntropyDecayReport {
        times: times.to_vec(),
        variance_margins: var_m,
        entropy_margins: ent_m,
        derivative_errors: der,
        ok,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EntropyProduction {
    /// Π = 2ℰ̂₁(ρ^σ).
    pub pi: f64,
    /// dS/dt = −tr[L*(ρ) log ρ].
    pub ds_dt: f64,
    /// Φ = tr[L*(ρ) log σ].
    pub phi: f64,
    /// |Π − (dS/dt + Φ)|.
    pub balance_residual: f64,
}

pub fn entropy_production(g: &Generator, rho: &Hermitian) -> Result<EntropyProduction> {
    let space = g.stationary()?;
    validate_density(rho)?;
    let e = require_positive(rho)?;
    let log_rho = e.map(f64::ln, crate::operator::default_eig_floor(&e))?;
    let lrho = g.apply_lstar_herm(rho);
    let ds_dt = -lrho.trace_with(&log_rho);
    let phi = lrho.trace_with(space.log_sigma());
    let f = space.gamma_inv(rho)?;
    let pi = 2.0 * dirichlet_hat_p(g, 1.0, &f)?;
    Ok(EntropyProduction {
        pi,
        ds_dt,
        phi,
        balance_residual: (pi - ds_dt - phi).abs(),
    })
}

/// Heisenberg-picture T_t = e^{tL} as a superoperator.
pub fn semigroup_map(g: &Generator, t: f64) -> Result<Superoperator> {
    g.super_l()?.expm(t)
}

/// T̂ = Γ_σ⁻¹∘T*∘Γ_σ.
pub fn hat_map(t: &Superoperator, space: &WeightedSpace) -> Superoperator {
    let r = space.sigma_power(0.5);
    let ir = space.sigma_power(-0.5);
    t.adjoint()
        .after_sandwich(r.as_matrix(), r.as_matrix())
        .then_sandwich(ir.as_matrix(), ir.as_matrix())
}

#[derive(Debug, Clone)]
pub struct PqNorm {
    /// Largest ratio found; a lower bound on ‖T‖_{(p,σ)→(q,σ)}.
    pub value: f64,
    pub witness: Hermitian,
    pub restarts: usize,
}

/// Multi-start maximization of ‖T(f)‖_{q,σ}/‖f‖_{p,σ} over positive f.
pub fn pq_norm(t: &Superoperator, space: &WeightedSpace, p: f64, q: f64, restarts: usize, seed: u64) -> Result<PqNorm> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(invalid("p", "p and q must be ≥ 1"));
    }
    let d = space.dim();
    let ratio = |x: &[f64]| -> f64 {
        let h = crate::ls_estimator::params_to_hermitian(d, x);
        let e = h.eig();
        let top = e.max_eigenvalue();
        let f = e.map_unchecked(|v| (v - top).exp());
        let num = space.lp_norm(q, &t.apply_hermitian(&f));
        let den = space.lp_norm(p, &f);
        match (num, den) {
            (Ok(a), Ok(b)) if b > 0.0 => -(a / b),
            _ => f64::INFINITY,
        }
    };
    let mut rng = rng_from_seed(seed);
    let n = d * d;
    let mut best_x = vec![0.0; n];
    let mut best = ratio(&best_x);
    let nm = NelderMead {
        max_evals: 400 * n.max(4),
        ftol: 1e-12,
        step: 0.5,
    };
    for k in 0..restarts.max(1) {
        let x0: Vec<f64> = if k == 0 {
            vec![0.0; n]
        } else {
            let h = gaussian_hermitian(&mut rng, d, 1.0);
            crate::ls_estimator::hermitian_to_params(&h)
        };
        let m = nm.minimize(ratio, &x0);
        if m.value < best {
            best = m.value;
            best_x = m.x;
        }
    }
    let h = crate::ls_estimator::params_to_hermitian(d, &best_x);
    let e = h.eig();
    let top = e.max_eigenvalue();
    Ok(PqNorm {
        value: -best,
        witness: e.map_unchecked(|v| (v - top).exp()),
        restarts: restarts.max(1),
    })
}

/// ‖T_t − T_∞‖_{(2,σ)→(2,σ)}, computed exactly as a spectral norm.
pub fn two_two_decay(g: &Generator, t: f64) -> Result<f64> {
    let space = g.stationary()?;
    let tt = semigroup_map(g, t)?;
    let d = g.dim();
    let one = vec_of(&CMatrix::identity(d, d));
    let sig = vec_of(space.sigma().as_matrix());
    let t_inf = &one * sig.adjoint();
    let diff = Superoperator::from_matrix(d, tt.matrix() - t_inf)?;
    let q4 = space.sigma_power(0.25);
    let iq4 = space.sigma_power(-0.25);
    let m = diff
        .after_sandwich(iq4.as_matrix(), iq4.as_matrix())
        .then_sandwich(q4.as_matrix(), q4.as_matrix());
    let svd = m.into_matrix().svd(false, false);
    Ok(svd.singular_values.iter().cloned().fold(0.0, f64::max))
}

/// Largest ‖T_t f‖_{p(t),σ}/‖f‖_{2,σ} with p(t) = 1 + e^{2αt} over random positive probes.
pub fn hypercontractivity_ratio(g: &Generator, alpha: f64, t: f64, probes: usize, seed: u64) -> Result<f64> {
    let space = g.stationary()?;
    let p = 1.0 + (2.0 * alpha * t).exp();
    let map = semigroup_map(g, t)?;
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for k in 0..probes {
        let f = crate::regularity::probe(&mut rng, g.dim(), k);
        let r = space.lp_norm(p, &map.apply_hermitian(&f))? / space.lp_norm(2.0, &f)?;
        worst = worst.max(r);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy)]
pub struct DiscreteContinuous {
    pub n: usize,
    pub chi2_discrete: f64,
    pub chi2_continuous: f64,
}

impl DiscreteContinuous {
    pub fn holds(&self) -> bool {
        self.chi2_discrete <= self.chi2_continuous + 1e-9
    }
}

/// A reversible lazy channel in the Heisenberg picture with its lifted generator.
pub struct LazyChannel {
    pub channel: Superoperator,
    pub generator: Generator,
    /// Smallest eigenvalue of Γ^{1/2}∘T∘Γ^{−1/2}.
    pub min_eigenvalue: f64,
}

impl LazyChannel {
    pub fn new(channel: Superoperator) -> Result<Self> {
        let generator = Generator::lift_superoperator(&channel)?;
        let space = generator.stationary()?.clone();
        if !generator.flags().reversible {
            return Err(Error::MissingProperty("reversible"));
        }
        let q4 = space.sigma_power(0.25);
        let iq4 = space.sigma_power(-0.25);
        let m = channel
            .after_sandwich(iq4.as_matrix(), iq4.as_matrix())
            .then_sandwich(q4.as_matrix(), q4.as_matrix());
        let min_eigenvalue = Hermitian::symmetrize(m.into_matrix()).eig().values[0];
        if min_eigenvalue < -1e-10 {
            return Err(Error::MissingProperty("lazy"));
        }
        Ok(LazyChannel {
            channel,
            generator,
            min_eigenvalue,
        })
    }

    pub fn compare(&self, n: usize, rho0: &Hermitian) -> Result<DiscreteContinuous> {
        validate_density(rho0)?;
        let space = self.generator.stationary()?;
        let schr = self.channel.adjoint();
        let mut rho = rho0.clone();
        for _ in 0..n {
            rho = schr.apply_hermitian(&rho);
        }
        let cont = evolve(&self.generator, rho0, n as f64)?;
        Ok(DiscreteContinuous {
            n,
            chi2_discrete: chi2_divergence(&rho, space)?,
            chi2_continuous: chi2_divergence(&cont, space)?,
        })
    }
}

pub fn discrete_vs_continuous(channel: &Superoperator, n: usize, rho0: &Hermitian) -> Result<DiscreteContinuous> {
    LazyChannel::new(channel.clone())?.compare(n, rho0)
}

/// ½(id + S).
pub fn lazy_version(s: &Superoperator) -> Superoperator {
    Superoperator::identity(s.dim()).add(s).scale(0.5)
}

/// Random reversible unital-in-Heisenberg channel ½(T + T̂) from random Kraus operators.
pub fn random_reversible_channel(rng: &mut SeededRng, d: usize, n_kraus: usize) -> Result<Superoperator> {
    let gs: Vec<CMatrix> = (0..n_kraus.max(1)).map(|_| ginibre(rng, d)).collect();
    let mut sum = CMatrix::zeros(d, d);
    for k in &gs {
        sum += k.adjoint() * k;
    }
    // normalize Σ K†K = 𝟙 via the inverse square root
    let e = Hermitian::symmetrize(sum).eig();
    let inv_root = e.map(|v| 1.0 / v.sqrt(), 0.0)?;
    let kraus: Vec<CMatrix> = gs.iter().map(|k| k * inv_root.as_matrix()).collect();
    // Heisenberg picture: X ↦ Σ K† X K
    let terms: Vec<(CMatrix, CMatrix)> = kraus.iter().map(|k| (k.adjoint(), k.clone())).collect();
    let t = Superoperator::from_terms(d, &terms)?;
    let lifted = Generator::lift_superoperator(&t)?;
    let space = lifted.stationary()?;
    Ok(t.add(&hat_map(&t, space)).scale(0.5))
}

#[derive(Debug, Clone, Copy)]
pub struct Chi2GapPoint {
    pub c: f64,
    pub t: f64,
    pub worst_chi2: f64,
    pub bound: f64,
}

/// Worst χ²(T*_tρ, σ) at t = log log(1/σ_min)/(2α₂) + c/λ against e^{2(1−c)}.
pub fn chi2_gap_bound_check(
    g: &Generator,
    alpha2: f64,
    lambda: f64,
    cs: &[f64],
    n_haar: usize,
    seed: u64,
) -> Result<Vec<Chi2GapPoint>> {
    let space = g.stationary()?;
    let states = initial_states(space, n_haar, seed);
    let prop = Propagator::new(g)?;
    let ll = (1.0 / space.sigma_min()).ln().ln();
    cs.iter()
        .map(|&c| {
            let t = (ll / (2.0 * alpha2) + c / lambda).max(0.0);
            let map = prop.at(t)?;
            let mut worst = 0.0f64;
            for rho in &states {
                worst = worst.max(chi2_divergence(&map.apply(rho), space)?);
            }
            Ok(Chi2GapPoint {
                c,
                t,
                worst_chi2: worst,
                bound: (2.0 * (1.0 - c)).exp(),
            })
        })
        .collect()
}
