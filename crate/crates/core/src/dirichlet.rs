//! L_p Dirichlet forms and the spectral gap.
//!
//! ℰ_p(f) = −p/(2(p−1))·⟨I_{q,p}(f), L(f)⟩_σ with the closed forms
//! ℰ₂(f) = −⟨f, L(f)⟩_σ and ℰ₁(f) = −½tr[Γ_σ(L f)(log Γ_σ(f) − log σ)].
//! The hat variants replace L by L̂ = Γ_σ⁻¹∘L*∘Γ_σ.

use crate::error::{invalid, Result};
use crate::generators::{Family, Generator};
use crate::lp_space::{holder_conjugate, is_p_one, require_positive, WeightedSpace};
use crate::operator::{c, default_eig_floor, trace, CMatrix, Hermitian, C64};
use crate::prelude::*;
use crate::random::{gaussian_hermitian, rng_from_seed};

/// Number of random witnesses used to validate a spectral gap.
pub const GAP_VALIDATION_SAMPLES: usize = 200;

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid("p", "must be a finite real ≥ 1"));
    }
    Ok(())
}

/// Dirichlet form of an arbitrary action `lf = A(f)` in the space of σ.
pub fn dirichlet_form_of(space: &WeightedSpace, p: f64, f: &Hermitian, lf: &Hermitian) -> Result<f64> {
    check_p(p)?;
    if is_p_one(p) {
        require_positive(f)?;
        let gf = space.gamma(f)?;
        let e = gf.eig();
        let log_gf = e.map(f64::ln, default_eig_floor(&e))?;
        let glf = space.gamma(lf)?;
        return Ok(-0.5 * glf.trace_with(&log_gf.sub(space.log_sigma())));
    }
    if p == 2.0 {
        return Ok(-space.inner(f, lf)?);
    }
    let q = holder_conjugate(p);
    let i = space.power_operator(q, p, f)?;
    Ok(-p / (2.0 * (p - 1.0)) * space.inner(&i, lf)?)
}

/// ℰ_p(f) for the generator L.
pub fn dirichlet_p(g: &Generator, p: f64, f: &Hermitian) -> Result<f64> {
    let space = g.stationary()?;
    let lf = g.apply_l_herm(f);
    dirichlet_form_of(space, p, f, &lf)
}

/// ℰ̂_p(f), the Dirichlet form of L̂.
pub fn dirichlet_hat_p(g: &Generator, p: f64, f: &Hermitian) -> Result<f64> {
    let space = g.stationary()?;
    let lf = g.apply_hat(f)?;
    dirichlet_form_of(space, p, f, &lf)
}

/// −tr[σ^{1/2} f σ^{1/2} L(f)] without discarding the imaginary part.
pub fn dirichlet2_complex(g: &Generator, f: &Hermitian) -> Result<C64> {
    let space = g.stationary()?;
    let gf = space.gamma(f)?;
    let lf = g.apply_l(f.as_matrix());
    Ok(-trace(&(gf.as_matrix() * lf)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMethod {
    /// Smallest nonzero eigenvalue of the σ-symmetrized generator.
    EigenSymmetrization,
    /// A random witness beat the eigensolver and its ratio was reported.
    VariationalRefine,
    /// Exact value of a matrix-free family.
    ClosedForm,
}

impl GapMethod {
    pub fn name(&self) -> &'static str {
        match self {
            GapMethod::EigenSymmetrization => "eigen_symmetrization",
            GapMethod::VariationalRefine => "variational_refine",
            GapMethod::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub lambda: f64,
    /// Minimizer g of ℰ₂(g)/Var_σ(g).
    pub witness: Hermitian,
    pub method: GapMethod,
    /// |ℰ₂(witness)/Var_σ(witness) − λ|.
    pub residual: f64,
    /// Smallest ratio seen among the random validation witnesses.
    pub validation_min_ratio: f64,
    pub validation_samples: usize,
}

/// ℰ₂(g)/Var_σ(g), or +∞ when the variance vanishes.
pub fn gap_ratio(g: &Generator, w: &Hermitian) -> Result<f64> {
    let space = g.stationary()?;
    let var = space.variance(w)?;
    if var <= 1e-300 {
        return Ok(f64::INFINITY);
    }
    Ok(dirichlet_p(g, 2.0, w)? / var)
}

/// Spectral gap of a primitive generator.
///
/// The σ-similarity transform Q = Γ^{1/2}∘L∘Γ^{−1/2} turns ℰ₂ into the
/// Hilbert–Schmidt form of −½(Q + Q†). Its smallest eigenvalue on the
/// complement of √σ is λ. The result is then checked against random
/// variational witnesses.
pub fn spectral_gap(g: &Generator) -> Result<GapReport> {
    spectral_gap_seeded(g, 0x5eed)
}

pub fn spectral_gap_seeded(g: &Generator, seed: u64) -> Result<GapReport> {
    let space = g.stationary()?.clone();
    let d = g.dim();
    let (mut lambda, mut witness, mut method) = if !g.has_dense() {
        let gamma = match g.family() {
            Family::Depolarizing { gamma } => *gamma,
            _ => unreachable!("only the depolarizing family is matrix-free"),
        };
        let mut diag = vec![0.0; d];
        diag[0] = 1.0;
        diag[1] = -1.0;
        (gamma, Hermitian::from_diagonal(&diag), GapMethod::ClosedForm)
    } else {
        let (lambda, witness) = symmetrized_gap(g, &space)?;
        (lambda, witness, GapMethod::EigenSymmetrization)
    };

    let mut rng = rng_from_seed(seed);
    let mut min_ratio = f64::INFINITY;
    let samples = if g.has_dense() { GAP_VALIDATION_SAMPLES } else { 20 };
    for _ in 0..samples {
        let w = gaussian_hermitian(&mut rng, d, 1.0);
        let r = gap_ratio(g, &w)?;
        if r < min_ratio {
            min_ratio = r;
            if r < lambda * (1.0 - 1e-6) {
                lambda = r;
                witness = w;
                method = GapMethod::VariationalRefine;
            }
        }
    }
    let residual = (gap_ratio(g, &witness)? - lambda).abs();
    Ok(GapReport {
        lambda,
        witness,
        method,
        residual,
        validation_min_ratio: min_ratio,
        validation_samples: samples,
    })
}

/// Q = Γ_σ^{1/2}∘L∘Γ_σ^{−1/2} as a d²×d² matrix.
pub fn similarity_transform(g: &Generator, space: &WeightedSpace) -> Result<CMatrix> {
    let q4 = space.sigma_power(0.25);
    let iq4 = space.sigma_power(-0.25);
    let l = g.super_l()?;
    Ok(l.after_sandwich(iq4.as_matrix(), iq4.as_matrix())
        .then_sandwich(q4.as_matrix(), q4.as_matrix())
        .into_matrix())
}

fn symmetrized_gap(g: &Generator, space: &WeightedSpace) -> Result<(f64, Hermitian)> {
    let d = g.dim();
    let n = d * d;
    let q = similarity_transform(g, space)?;
    let mut m = (&q + q.adjoint()) * c(-0.5);
    // deflate the stationary direction vec(√σ) by lifting it out of the way
    let root = space.sigma_power(0.5);
    let v = crate::operator::vec_of(root.as_matrix());
    let shift = 1.0 + 2.0 * m.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    m += &v * v.adjoint() * c(shift);
    let eig = Hermitian::symmetrize(m).eig();
    let lambda = eig.values[0];
    let x = crate::operator::unvec(&eig.vectors.column(0).into_owned(), d);
    // Q preserves Hermiticity, so one of the Hermitian or anti-Hermitian parts
    // is an eigenvector as well.
    let herm = Hermitian::symmetrize(x.clone());
    let anti = Hermitian::symmetrize(&x * C64::new(0.0, -1.0));
    let pick = if crate::operator::max_abs(herm.as_matrix()) >= crate::operator::max_abs(anti.as_matrix()) {
        herm
    } else {
        anti
    };
    let witness = space.gamma_power(-0.5, &pick)?;
    Ok((lambda, witness))
}
