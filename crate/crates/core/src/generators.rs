//! Liouvillians in the Heisenberg picture and the standard families.
//!
//! A generator acts on observables, L(f) = i[H,f] + Σ L_i† f L_i − ½{L_i†L_i, f},
//! and its Hilbert–Schmidt adjoint L* acts on states. Dense d²×d² matrices are
//! kept for both up to [`DENSE_MAX_DIM`]; the depolarizing family also works
//! matrix-free beyond that.

use crate::error::{invalid, Error, Result};
use crate::lp_space::WeightedSpace;
use crate::operator::{
    c, check_dim, check_square, max_abs, max_abs_diff, unvec, CMatrix, Hermitian, Superoperator,
    C64, DENSE_MAX_DIM, ONE,
};
use crate::prelude::*;
use crate::random::{self, SeededRng};
use rand::Rng;

/// Tolerance for L(𝟙) = 0 and L*(𝟙) = 0, relative to max(1, ‖L‖_max).
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;
/// Tolerance for Γ_σ∘L = L*∘Γ_σ, relative to max(1, ‖L‖_max).
pub const REVERSIBILITY_TOL: f64 = 1e-8;
/// Relative singular-value threshold for the null space of L*.
pub const NULL_SPACE_TOL: f64 = 1e-9;
/// Relative singular-value threshold for counting independent Kraus operators.
pub const KRAUS_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    pub unital: bool,
    pub reversible: bool,
    pub primitive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Generic,
    Depolarizing { gamma: f64 },
    Projection { gamma: f64 },
    Davies { beta: f64 },
    ChannelLift { kraus_rank: usize, lazy: bool },
    RandomUnitary { unitaries: usize, seed: u64, kraus_rank: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Generic => "generic",
            Family::Depolarizing { .. } => "depolarizing",
            Family::Projection { .. } => "projection",
            Family::Davies { .. } => "davies",
            Family::ChannelLift { .. } => "channel_lift",
            Family::RandomUnitary { .. } => "random_unitary",
        }
    }
}

/// Hamiltonian and jump operators of a Lindblad generator.
#[derive(Debug, Clone)]
pub struct LindbladData {
    pub hamiltonian: Hermitian,
    pub ops: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
struct DenseMaps {
    l: Superoperator,
    lstar: Superoperator,
}

/// A Liouvillian with cached superoperators, classification flags and, when
/// primitive, its stationary state.
#[derive(Debug, Clone)]
pub struct Generator {
    dim: usize,
    lindblad: Option<LindbladData>,
    dense: Option<DenseMaps>,
    flags: Flags,
    stationary: Option<WeightedSpace>,
    primitivity_note: Option<String>,
    family: Family,
}

/// What a family constructor knows about the fixed point.
enum Fixed {
    /// Solve the null space of L*.
    Solve,
    /// σ is known and unique by construction; only the residual is checked.
    Known(WeightedSpace),
}

/// Superoperator of X ↦ i[H,X] + Σ L_i† X L_i − ½{L_i†L_i, X}.
pub fn lindblad_superoperator(h: &Hermitian, ops: &[CMatrix]) -> Result<Superoperator> {
    let d = h.dim();
    let id = CMatrix::identity(d, d);
    let ih = h.as_matrix() * C64::new(0.0, 1.0);
    let mut k = CMatrix::zeros(d, d);
    let mut terms = vec![(ih.clone(), id.clone()), (id.clone(), -ih)];
    for op in ops {
        check_dim(d, check_square(op)?)?;
        let adj = op.adjoint();
        k += &adj * op;
        terms.push((adj, op.clone()));
    }
    terms.push((&k * c(-0.5), id.clone()));
    terms.push((id, &k * c(-0.5)));
    Superoperator::from_terms(d, &terms)
}

impl Generator {
    /// Generic Lindblad generator from a Hamiltonian and jump operators.
    pub fn lindblad(h: Hermitian, ops: Vec<CMatrix>) -> Result<Self> {
        Self::lindblad_with_family(h, ops, Family::Generic)
    }

    fn lindblad_with_family(h: Hermitian, ops: Vec<CMatrix>, family: Family) -> Result<Self> {
        let d = h.dim();
        if d > DENSE_MAX_DIM {
            return Err(Error::TooLarge {
                dim: d,
                max: DENSE_MAX_DIM,
            });
        }
        let l = lindblad_superoperator(&h, &ops)?;
        let data = LindbladData { hamiltonian: h, ops };
        Self::finish(d, Some(data), Some(l), family, Fixed::Solve)
    }

    /// Generator from a dense Heisenberg-picture superoperator.
    pub fn from_superoperator(l: Superoperator) -> Result<Self> {
        let d = l.dim();
        Self::finish(d, None, Some(l), Family::Generic, Fixed::Solve)
    }

    fn finish(
        dim: usize,
        lindblad: Option<LindbladData>,
        l: Option<Superoperator>,
        family: Family,
        fixed: Fixed,
    ) -> Result<Self> {
        let dense = l.map(|l| {
            let lstar = l.adjoint();
            DenseMaps { l, lstar }
        });
        let mut g = Generator {
            dim,
            lindblad,
            dense,
            flags: Flags::default(),
            stationary: None,
            primitivity_note: None,
            family,
        };
        g.classify(fixed)?;
        Ok(g)
    }

    fn scale(&self) -> f64 {
        match &self.dense {
            Some(m) => m.l.max_abs().max(1.0),
            None => match self.family {
                Family::Depolarizing { gamma } => gamma.max(1.0),
                _ => 1.0,
            },
        }
    }

    fn classify(&mut self, fixed: Fixed) -> Result<()> {
        let d = self.dim;
        let id = CMatrix::identity(d, d);
        let scale = self.scale();
        let tp = max_abs(&self.apply_l(&id));
        if tp > TRACE_PRESERVATION_TOL * scale {
            return Err(invalid(
                "generator",
                "L(𝟙) ≠ 0: the Schrödinger-picture evolution is not trace preserving",
            ));
        }
        self.flags.unital = max_abs(&self.apply_lstar(&id)) <= TRACE_PRESERVATION_TOL * scale;

        match fixed {
            Fixed::Known(space) => {
                let res = max_abs(&self.apply_lstar(space.sigma().as_matrix()));
                if res > 1e-9 * scale {
                    return Err(invalid("sigma", "supplied state is not stationary"));
                }
                self.stationary = Some(space);
            }
            Fixed::Solve => match self.solve_stationary() {
                Ok(space) => self.stationary = Some(space),
                Err(Error::NotPrimitive(note)) => self.primitivity_note = Some(note),
                Err(e) => return Err(e),
            },
        }
        self.flags.primitive = self.stationary.is_some();
        self.flags.reversible = match (&self.stationary, &self.dense) {
            (Some(space), Some(m)) => reversibility_defect(&m.l, &m.lstar, space) <= REVERSIBILITY_TOL * scale,
            // closed-form families without dense maps are self-adjoint w.r.t. 𝟙/d
            (Some(_), None) => true,
            _ => false,
        };
        Ok(())
    }

    /// Null space of L*: unique, full-rank and positive, or `NotPrimitive`.
    fn solve_stationary(&self) -> Result<WeightedSpace> {
        let m = &self.dense.as_ref().ok_or(Error::TooLarge {
            dim: self.dim,
            max: DENSE_MAX_DIM,
        })?;
        let d = self.dim;
        let svd = nalgebra::SVD::new(m.lstar.matrix().clone(), false, true);
        let v_t = svd.v_t.as_ref().ok_or(Error::Singular("SVD of L*"))?;
        let s = &svd.singular_values;
        let smax = s.iter().cloned().fold(0.0, f64::max);
        let tol = NULL_SPACE_TOL * smax.max(1.0);
        let null: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= tol).collect();
        if null.len() != 1 {
            let mut note = String::from("stationary subspace has dimension ");
            note.push_str(&usize_str(null.len()));
            return Err(Error::NotPrimitive(note));
        }
        let row = v_t.row(null[0]);
        let v = nalgebra::DVector::from_iterator(d * d, row.iter().map(|z| z.conj()));
        let x = unvec(&v, d);
        let tr = crate::operator::trace(&x);
        if tr.norm() < 1e-12 {
            return Err(Error::NotPrimitive("stationary operator is traceless".to_string()));
        }
        let x = x * (ONE / tr);
        let sigma = Hermitian::symmetrize(x);
        WeightedSpace::normalized(sigma)
            .map_err(|_| Error::NotPrimitive("stationary state is not full rank".to_string()))
    }

    /// Depolarizing generator L(f) = γ(tr f/d·𝟙 − f).
    pub fn depolarizing(d: usize, gamma: f64) -> Result<Self> {
        if d < 2 {
            return Err(invalid("dim", "depolarizing generator needs d ≥ 2"));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid("gamma", "must be positive"));
        }
        let dense = (d <= DENSE_MAX_DIM).then(|| {
            let n = d * d;
            let mut m = CMatrix::zeros(n, n);
            let diag_idx: Vec<usize> = (0..d).map(|i| i * d + i).collect();
            for &i in &diag_idx {
                for &j in &diag_idx {
                    m[(i, j)] = c(gamma / d as f64);
                }
            }
            for i in 0..n {
                m[(i, i)] -= c(gamma);
            }
            Superoperator::from_matrix(d, m).expect("square by construction")
        });
        let space = WeightedSpace::maximally_mixed(d);
        Self::finish(d, None, dense, Family::Depolarizing { gamma }, Fixed::Known(space))
    }

    /// Projection generator L(f) = γ(tr[σf]𝟙 − f).
    pub fn projection(space: WeightedSpace, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid("gamma", "must be positive"));
        }
        let d = space.dim();
        if d > DENSE_MAX_DIM {
            return Err(Error::TooLarge {
                dim: d,
                max: DENSE_MAX_DIM,
            });
        }
        let n = d * d;
        let sigma = space.sigma().as_matrix();
        // vec(𝟙) vec(σ)† − I
        let mut m = CMatrix::zeros(n, n);
        for i in 0..d {
            for j in 0..n {
                let (a, b) = (j % d, j / d);
                m[(i * d + i, j)] = sigma[(a, b)].conj() * gamma;
            }
        }
        for i in 0..n {
            m[(i, i)] -= c(gamma);
        }
        let l = Superoperator::from_matrix(d, m)?;
        Self::finish(d, None, Some(l), Family::Projection { gamma }, Fixed::Known(space))
    }

    /// Thermal (Davies) generator with flat KMS rates.
    pub fn davies(spec: &DaviesSpec) -> Result<Self> {
        let h = spec.effective_hamiltonian();
        let ops = spec.lindblad_ops()?;
        let mut g = Self::lindblad_with_family(h, ops, Family::Davies { beta: spec.beta })?;
        if !g.flags.primitive {
            return Err(Error::NotPrimitive(
                g.primitivity_note.take().unwrap_or_default(),
            ));
        }
        let gibbs = spec.gibbs_state()?;
        let dev = max_abs_diff(
            g.stationary.as_ref().expect("primitive").sigma().as_matrix(),
            gibbs.sigma().as_matrix(),
        );
        if dev > 1e-9 {
            return Err(Error::InvalidState(
                "stationary state of the thermal generator differs from the Gibbs state".to_string(),
            ));
        }
        g.stationary = Some(gibbs);
        Ok(g)
    }

    /// L = T − id for a channel with Heisenberg action T(f) = Σ K_i† f K_i;
    /// with `lazy`, T is replaced by ½(id + T).
    pub fn lift_channel(kraus: &[CMatrix], lazy: bool) -> Result<Self> {
        let (ops, rank) = channel_lindblad_ops(kraus, lazy)?;
        let d = ops[0].nrows();
        Self::lindblad_with_family(
            Hermitian::zeros(d),
            ops,
            Family::ChannelLift {
                kraus_rank: rank,
                lazy,
            },
        )
    }

    /// Lift of the random-unitary channel drawn from `count` Haar unitaries,
    /// symmetrized to ½(T + T*) when `reversible` is set.
    pub fn random_unitary(d: usize, count: usize, seed: u64, reversible: bool) -> Result<Self> {
        let kraus = random_unitary_kraus(d, count, seed, reversible)?;
        let (ops, rank) = channel_lindblad_ops(&kraus, false)?;
        Self::lindblad_with_family(
            Hermitian::zeros(d),
            ops,
            Family::RandomUnitary {
                unitaries: count,
                seed,
                kraus_rank: rank,
            },
        )
    }

    /// L = T − id for a channel given by its Heisenberg-picture superoperator.
    pub fn lift_superoperator(t: &Superoperator) -> Result<Self> {
        let l = t.sub(&Superoperator::identity(t.dim()));
        Self::finish(t.dim(), None, Some(l), Family::Generic, Fixed::Solve)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn lindblad_data(&self) -> Option<&LindbladData> {
        self.lindblad.as_ref()
    }

    /// Reason the generator failed the primitivity test, if it did.
    pub fn primitivity_note(&self) -> Option<&str> {
        self.primitivity_note.as_deref()
    }

    pub fn is_primitive(&self) -> bool {
        self.flags.primitive
    }

    pub fn stationary(&self) -> Result<&WeightedSpace> {
        self.stationary.as_ref().ok_or_else(|| {
            Error::NotPrimitive(
                self.primitivity_note
                    .clone()
                    .unwrap_or_else(|| "no stationary state".to_string()),
            )
        })
    }

    pub fn require_reversible(&self) -> Result<()> {
        if self.flags.reversible {
            Ok(())
        } else {
            Err(Error::MissingProperty("reversible"))
        }
    }

    pub fn has_dense(&self) -> bool {
        self.dense.is_some()
    }

    /// Heisenberg-picture superoperator.
    pub fn super_l(&self) -> Result<&Superoperator> {
        self.dense.as_ref().map(|m| &m.l).ok_or(Error::TooLarge {
            dim: self.dim,
            max: DENSE_MAX_DIM,
        })
    }

    /// Schrödinger-picture superoperator.
    pub fn super_lstar(&self) -> Result<&Superoperator> {
        self.dense.as_ref().map(|m| &m.lstar).ok_or(Error::TooLarge {
            dim: self.dim,
            max: DENSE_MAX_DIM,
        })
    }

    /// Closed form of a self-adjoint depolarizing action, if that is how this
    /// generator is stored.
    fn depolarizing_action(&self, f: &CMatrix) -> Option<CMatrix> {
        match (&self.dense, &self.family) {
            (None, Family::Depolarizing { gamma }) => {
                let d = self.dim;
                let tr = crate::operator::trace(f) / c(d as f64);
                let mut out = f * c(-gamma);
                for i in 0..d {
                    out[(i, i)] += tr * *gamma;
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn apply_l(&self, f: &CMatrix) -> CMatrix {
        match &self.dense {
            Some(m) => m.l.apply(f),
            None => self.depolarizing_action(f).expect("matrix-free generators are depolarizing"),
        }
    }

    pub fn apply_lstar(&self, rho: &CMatrix) -> CMatrix {
        match &self.dense {
            Some(m) => m.lstar.apply(rho),
            None => self.depolarizing_action(rho).expect("matrix-free generators are depolarizing"),
        }
    }

    pub fn apply_l_herm(&self, f: &Hermitian) -> Hermitian {
        Hermitian::symmetrize(self.apply_l(f.as_matrix()))
    }

    pub fn apply_lstar_herm(&self, rho: &Hermitian) -> Hermitian {
        Hermitian::symmetrize(self.apply_lstar(rho.as_matrix()))
    }

    /// L̂(f) = Γ_σ⁻¹(L*(Γ_σ(f))).
    pub fn apply_hat(&self, f: &Hermitian) -> Result<Hermitian> {
        let space = self.stationary()?;
        let gf = space.gamma(f)?;
        let img = self.apply_lstar_herm(&gf);
        space.gamma_inv(&img)
    }

    /// The σ-weighted dual L̂ = Γ_σ⁻¹∘L*∘Γ_σ as a generator in its own right.
    pub fn hat(&self) -> Result<Generator> {
        let space = self.stationary()?.clone();
        if self.flags.reversible {
            return Ok(self.clone());
        }
        let lstar = self.super_lstar()?;
        let root = space.sigma_power(0.5);
        let inv_root = space.sigma_power(-0.5);
        let m = lstar
            .after_sandwich(root.as_matrix(), root.as_matrix())
            .then_sandwich(inv_root.as_matrix(), inv_root.as_matrix());
        let family = Family::Generic;
        let mut g = Self::finish(self.dim, None, Some(m), family, Fixed::Known(space))?;
        g.flags.reversible = false;
        g.flags.unital = self.flags.unital;
        Ok(g)
    }

    /// Additive symmetrization ½(L + L̂), reversible with respect to the same σ.
    pub fn symmetrized(&self) -> Result<Generator> {
        let space = self.stationary()?.clone();
        if self.flags.reversible {
            return Ok(self.clone());
        }
        let hat = self.hat()?;
        let m = self.super_l()?.add(hat.super_l()?).scale(0.5);
        Self::finish(self.dim, None, Some(m), Family::Generic, Fixed::Known(space))
    }

    /// Semigroup propagator e^{tL*} applied to a state.
    pub fn evolve_state(&self, rho: &Hermitian, t: f64) -> Result<Hermitian> {
        if let (None, Family::Depolarizing { gamma }) = (&self.dense, &self.family) {
            let d = self.dim as f64;
            let e = (-gamma * t).exp();
            let tr = rho.trace();
            return Ok(rho.scale(e).shift((1.0 - e) * tr / d));
        }
        let p = self.super_lstar()?.expm(t)?;
        Ok(p.apply_hermitian(rho))
    }

    /// T_t(f) = e^{tL}(f).
    pub fn evolve_observable(&self, f: &Hermitian, t: f64) -> Result<Hermitian> {
        if self.dense.is_none() {
            // matrix-free depolarizing is self-adjoint
            return self.evolve_state(f, t);
        }
        let p = self.super_l()?.expm(t)?;
        Ok(p.apply_hermitian(f))
    }
}

/// max |Γ_σ∘L − L*∘Γ_σ| over superoperator entries.
pub fn reversibility_defect(l: &Superoperator, lstar: &Superoperator, space: &WeightedSpace) -> f64 {
    let root = space.sigma_power(0.5);
    let r = root.as_matrix();
    let left = l.then_sandwich(r, r);
    let right = lstar.after_sandwich(r, r);
    left.max_abs_diff(&right)
}

fn usize_str(n: usize) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    let _ = write!(s, "{n}");
    s
}

/// Numerical rank of the span of `ops` at threshold 1e−8·s_max.
pub fn operator_rank(ops: &[CMatrix]) -> usize {
    if ops.is_empty() {
        return 0;
    }
    let d2 = ops[0].len();
    let m = CMatrix::from_fn(d2, ops.len(), |i, k| ops[k].as_slice()[i]);
    let s = m.singular_values();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > KRAUS_RANK_TOL * smax).count()
}

/// Checks Σ K†K = 𝟙 and returns the Lindblad operators of the lifted
/// generator together with the Kraus rank of the (possibly lazy) channel.
pub fn channel_lindblad_ops(kraus: &[CMatrix], lazy: bool) -> Result<(Vec<CMatrix>, usize)> {
    let first = kraus.first().ok_or_else(|| invalid("kraus", "empty Kraus list"))?;
    let d = check_square(first)?;
    let mut closure = CMatrix::zeros(d, d);
    for k in kraus {
        check_dim(d, check_square(k)?)?;
        closure += k.adjoint() * k;
    }
    let dev = max_abs_diff(&closure, &CMatrix::identity(d, d));
    if dev > 1e-10 {
        return Err(Error::NotTracePreserving(dev));
    }
    let ops: Vec<CMatrix> = if lazy {
        let h = c(core::f64::consts::FRAC_1_SQRT_2);
        let mut v = vec![CMatrix::identity(d, d) * h];
        v.extend(kraus.iter().map(|k| k * h));
        v
    } else {
        kraus.to_vec()
    };
    let rank = operator_rank(&ops);
    Ok((ops, rank))
}

/// Kraus operators of the random-unitary channel (1/D)Σ U_i X U_i† built
/// from `count` Haar unitaries. With `symmetric`, the channel is replaced by
/// ½(T + T*), whose Kraus set is {U_i, U_i†}/√(2D).
pub fn random_unitary_kraus(d: usize, count: usize, seed: u64, symmetric: bool) -> Result<Vec<CMatrix>> {
    if d < 2 {
        return Err(invalid("dim", "needs d ≥ 2"));
    }
    if count < 1 {
        return Err(invalid("D", "needs D ≥ 1"));
    }
    let mut rng = random::rng_from_seed(seed);
    let unitaries: Vec<CMatrix> = (0..count).map(|_| random::haar_unitary(&mut rng, d)).collect();
    if !symmetric {
        let w = c((1.0 / count as f64).sqrt());
        return Ok(unitaries.into_iter().map(|u| u * w).collect());
    }
    let w = c((0.5 / count as f64).sqrt());
    let mut out = Vec::with_capacity(2 * count);
    for u in unitaries {
        out.push(u.adjoint() * w);
        out.push(u * w);
    }
    Ok(out)
}

/// Lindblad operators √(γ/d)·E_ij realizing the depolarizing generator.
pub fn depolarizing_lindblad_ops(d: usize, gamma: f64) -> Vec<CMatrix> {
    let w = c((gamma / d as f64).sqrt());
    let mut ops = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(i, j)] = w;
            ops.push(e);
        }
    }
    ops
}

/// Lindblad data of the tensor sum Σ_k 𝟙⊗…⊗L⊗…⊗𝟙 over `n` copies.
pub fn tensor_sum(h: &Hermitian, ops: &[CMatrix], n: usize) -> (Hermitian, Vec<CMatrix>) {
    let d = h.dim();
    let total = d.pow(n as u32);
    let embed = |a: &CMatrix, site: usize| -> CMatrix {
        let left = CMatrix::identity(d.pow(site as u32), d.pow(site as u32));
        let rest = n - site - 1;
        let right = CMatrix::identity(d.pow(rest as u32), d.pow(rest as u32));
        left.kronecker(a).kronecker(&right)
    };
    let mut h_total = CMatrix::zeros(total, total);
    let mut all_ops = Vec::new();
    for site in 0..n {
        h_total += embed(h.as_matrix(), site);
        for op in ops {
            all_ops.push(embed(op, site));
        }
    }
    (Hermitian::symmetrize(h_total), all_ops)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateModel {
    /// η(ω) = 1 for ω ≥ 0 and e^{βω} for ω < 0.
    #[default]
    FlatKms,
}

/// Input data of a thermal generator.
#[derive(Debug, Clone)]
pub struct DaviesSpec {
    pub hamiltonian: Hermitian,
    pub couplings: Vec<Hermitian>,
    pub beta: f64,
    /// Frequency grouping tolerance; defaults to 1e−9·‖H‖_max.
    pub bohr_tol: Option<f64>,
    pub rate_model: RateModel,
    /// Include the coherent term i[H,f]. It is antisymmetric for ⟨·,·⟩_σ, so
    /// the generator then no longer satisfies Γ_σ∘L = L*∘Γ_σ.
    pub coherent: bool,
}

/// One Fourier component S_k(ω) of a coupling operator.
#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub coupling: usize,
    pub omega: f64,
    pub op: CMatrix,
}

impl DaviesSpec {
    pub fn new(hamiltonian: Hermitian, couplings: Vec<Hermitian>, beta: f64) -> Self {
        DaviesSpec {
            hamiltonian,
            couplings,
            beta,
            bohr_tol: None,
            rate_model: RateModel::FlatKms,
            coherent: false,
        }
    }

    pub fn rate(&self, omega: f64) -> f64 {
        match self.rate_model {
            RateModel::FlatKms => {
                if omega >= 0.0 {
                    1.0
                } else {
                    (self.beta * omega).exp()
                }
            }
        }
    }

    fn tol(&self) -> f64 {
        self.bohr_tol
            .unwrap_or_else(|| 1e-9 * max_abs(self.hamiltonian.as_matrix()).max(1e-300))
    }

    fn validate(&self) -> Result<usize> {
        let d = self.hamiltonian.dim();
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", "must be a finite real ≥ 0"));
        }
        if self.couplings.is_empty() {
            return Err(invalid("couplings", "at least one coupling operator is required"));
        }
        for s in &self.couplings {
            check_dim(d, s.dim())?;
        }
        Ok(d)
    }

    /// Energy levels (grouped within tolerance) with their spectral projectors.
    fn levels(&self) -> Vec<(f64, CMatrix)> {
        let e = self.hamiltonian.eig();
        let d = e.dim();
        let tol = self.tol();
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for k in 0..d {
            match out.last_mut() {
                Some((energy, idx)) if (e.values[k] - *energy).abs() <= tol => idx.push(k),
                _ => out.push((e.values[k], vec![k])),
            }
        }
        out.into_iter()
            .map(|(_, idx)| {
                let energy = idx.iter().map(|&k| e.values[k]).sum::<f64>() / idx.len() as f64;
                let mut p = CMatrix::zeros(d, d);
                for &k in &idx {
                    let v = e.vectors.column(k);
                    p += &v * v.adjoint();
                }
                (energy, p)
            })
            .collect()
    }

    /// S_k(ω) = Σ_{E_b − E_a = ω} P_a S_k P_b for every coupling and Bohr frequency.
    pub fn jump_operators(&self) -> Result<Vec<JumpOperator>> {
        let d = self.validate()?;
        let levels = self.levels();
        let tol = self.tol();
        let mut freqs: Vec<f64> = Vec::new();
        for (ea, _) in &levels {
            for (eb, _) in &levels {
                let w = eb - ea;
                if !freqs.iter().any(|f| (f - w).abs() <= tol) {
                    freqs.push(w);
                }
            }
        }
        freqs.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        for (k, s) in self.couplings.iter().enumerate() {
            for &w in &freqs {
                let mut op = CMatrix::zeros(d, d);
                for (ea, pa) in &levels {
                    for (eb, pb) in &levels {
                        if ((eb - ea) - w).abs() <= tol {
                            op += pa * s.as_matrix() * pb;
                        }
                    }
                }
                if max_abs(&op) > 1e-14 * (1.0 + max_abs(s.as_matrix())) {
                    out.push(JumpOperator {
                        coupling: k,
                        omega: w,
                        op,
                    });
                }
            }
        }
        Ok(out)
    }

    /// √η(ω)·S_k(ω) for every jump.
    pub fn lindblad_ops(&self) -> Result<Vec<CMatrix>> {
        Ok(self
            .jump_operators()?
            .into_iter()
            .map(|j| j.op * c(self.rate(j.omega).sqrt()))
            .collect())
    }

    fn effective_hamiltonian(&self) -> Hermitian {
        if self.coherent {
            self.hamiltonian.clone()
        } else {
            Hermitian::zeros(self.hamiltonian.dim())
        }
    }

    /// σ_β = e^{−βH}/tr e^{−βH}.
    pub fn gibbs_state(&self) -> Result<WeightedSpace> {
        let e = self.hamiltonian.eig();
        let emin = e.values[0];
        let unnorm = e.map_unchecked(|x| (-self.beta * (x - emin)).exp());
        WeightedSpace::normalized(unnorm)
    }
}

/// Random primitive Lindblad generator: GUE Hamiltonian and Ginibre jumps.
pub fn random_lindblad(rng: &mut SeededRng, d: usize, n_ops: usize, h_scale: f64) -> Result<Generator> {
    let h = random::gaussian_hermitian(rng, d, h_scale);
    let ops: Vec<CMatrix> = (0..n_ops)
        .map(|_| random::ginibre(rng, d) * c(1.0 / (d as f64).sqrt()))
        .collect();
    Generator::lindblad(h, ops)
}

/// Random reversible generator: ½(L + L̂) of a random primitive L.
pub fn random_reversible(rng: &mut SeededRng, d: usize) -> Result<Generator> {
    loop {
        let g = random_lindblad(rng, d, 2, 1.0)?;
        if g.is_primitive() {
            return g.symmetrized();
        }
    }
}

/// Random unital generator with Hermitian-free jumps; generically not reversible.
pub fn random_unital(rng: &mut SeededRng, d: usize, n_unitaries: usize) -> Result<Generator> {
    let h = random::gaussian_hermitian(rng, d, 1.0);
    let ops: Vec<CMatrix> = (0..n_unitaries)
        .map(|_| random::haar_unitary(rng, d) * c((1.0 / n_unitaries as f64).sqrt()))
        .collect();
    Generator::lindblad(h, ops)
}

/// Random thermal generator: GUE Hamiltonian, one GUE coupling, β ∈ [0.2, 2].
pub fn random_davies(rng: &mut SeededRng, d: usize) -> Result<Generator> {
    loop {
        let h = random::gaussian_hermitian(rng, d, 1.0);
        let s = random::gaussian_hermitian(rng, d, 1.0);
        let beta = rng.random_range(0.2..2.0);
        match Generator::davies(&DaviesSpec::new(h, vec![s], beta)) {
            Ok(g) => return Ok(g),
            Err(Error::NotPrimitive(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Projection generator onto a random full-rank state.
pub fn random_projection(rng: &mut SeededRng, d: usize, gamma: f64) -> Result<Generator> {
    let sigma = random::random_density_mixed(rng, d, 0.1);
    Generator::projection(WeightedSpace::new(sigma)?, gamma)
}

/// Qubit thermal generator with H = ω₀/2·Z and coupling X.
pub fn qubit_davies(omega0: f64, beta: f64) -> Result<Generator> {
    let h = Hermitian::from_diagonal(&[omega0 / 2.0, -omega0 / 2.0]);
    let x = Hermitian::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])?;
    Generator::davies(&DaviesSpec::new(h, vec![x], beta))
}

/// Qutrit thermal generator with equally spaced levels and a real symmetric coupling.
pub fn qutrit_davies(beta: f64) -> Result<Generator> {
    let h = Hermitian::from_diagonal(&[-1.0, 0.0, 1.3]);
    let s = Hermitian::from_real_rows(&[&[0.0, 1.0, 0.4], &[1.0, 0.0, 1.0], &[0.4, 1.0, 0.0]])?;
    Generator::davies(&DaviesSpec::new(h, vec![s], beta))
}
