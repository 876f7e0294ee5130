//! σ-weighted non-commutative L_p spaces.
//!
//! For a full-rank state σ the weighting map is Γ_σ^p(f) = σ^{p/2} f σ^{p/2}
//! and ‖f‖_{p,σ} = (tr|Γ_σ^{1/p}(f)|^p)^{1/p}. All functionals here take
//! Hermitian arguments and return real numbers or Hermitian matrices.

use crate::error::{invalid, Error, Result};
use crate::operator::{
    c, check_dim, default_eig_floor, trace_product_re, CMatrix, Hermitian, HermitianEigen,
};
use crate::prelude::*;

/// Smallest admissible eigenvalue of a reference state.
pub const RANK_TOL: f64 = 1e-10;
/// Relative positivity gate for arguments of S_p and Ent_p.
pub const POSITIVITY_GATE: f64 = 1e-12;
/// Width of the window around p = 1 routed to the dedicated p = 1 formulas.
pub const P_ONE_WINDOW: f64 = 1e-6;

/// Hölder conjugate p/(p−1); infinite at p = 1.
pub fn holder_conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

pub(crate) fn is_p_one(p: f64) -> bool {
    (p - 1.0).abs() < P_ONE_WINDOW
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid("p", "must be a finite real ≥ 1"));
    }
    Ok(())
}

/// Eigendecomposition of `f`, rejecting it unless λ_min > 1e−12·λ_max.
pub fn require_positive(f: &Hermitian) -> Result<HermitianEigen> {
    let e = f.eig();
    let min = e.values[0];
    let max = e.max_eigenvalue();
    if !(max > 0.0) || !(min > POSITIVITY_GATE * max) {
        return Err(Error::NotPositiveDefinite { min_eig: min });
    }
    Ok(e)
}

fn log_of(e: &HermitianEigen) -> Result<Hermitian> {
    e.map(f64::ln, default_eig_floor(e))
}

fn x_log_x(e: &HermitianEigen) -> Result<Hermitian> {
    e.map(|x| x * x.ln(), default_eig_floor(e))
}

/// A full-rank reference state σ with its cached spectral data.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    sigma: Hermitian,
    eig: HermitianEigen,
    log_sigma: Hermitian,
}

impl WeightedSpace {
    /// Requires σ ⪰ 0, tr σ = 1 to 1e−12 and λ_min(σ) > 1e−10.
    pub fn new(sigma: Hermitian) -> Result<Self> {
        let tr = sigma.trace();
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format_args_string(
                "trace deviates from 1 by ",
                (tr - 1.0).abs(),
            )));
        }
        Self::build(sigma)
    }

    /// Divides σ by its trace before validating.
    pub fn normalized(sigma: Hermitian) -> Result<Self> {
        let tr = sigma.trace();
        if !(tr > 0.0) {
            return Err(Error::InvalidState("trace must be positive".to_string()));
        }
        Self::build(sigma.scale(1.0 / tr))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::build(Hermitian::identity(dim).scale(1.0 / dim as f64))
            .expect("maximally mixed state is full rank")
    }

    fn build(sigma: Hermitian) -> Result<Self> {
        let eig = sigma.eig();
        let min = eig.values[0];
        if !(min > RANK_TOL) {
            return Err(Error::InvalidState(format_args_string(
                "not full rank, smallest eigenvalue ",
                min,
            )));
        }
        let log_sigma = eig.map_unchecked(f64::ln);
        Ok(WeightedSpace {
            sigma,
            eig,
            log_sigma,
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &Hermitian {
        &self.sigma
    }

    pub fn sigma_eig(&self) -> &HermitianEigen {
        &self.eig
    }

    pub fn sigma_min(&self) -> f64 {
        self.eig.values[0]
    }

    pub fn log_sigma(&self) -> &Hermitian {
        &self.log_sigma
    }

    /// σ^s.
    pub fn sigma_power(&self, s: f64) -> Hermitian {
        self.eig.map_unchecked(|x| x.powf(s))
    }

    fn check(&self, f: &Hermitian) -> Result<()> {
        check_dim(self.dim(), f.dim())
    }

    /// V† f V in the eigenbasis of σ.
    pub(crate) fn to_eigenbasis(&self, f: &CMatrix) -> CMatrix {
        self.eig.vectors.adjoint() * f * &self.eig.vectors
    }

    pub(crate) fn from_eigenbasis(&self, f: &CMatrix) -> CMatrix {
        &self.eig.vectors * f * self.eig.vectors.adjoint()
    }

    /// σ^{a} X σ^{b} for an arbitrary (not necessarily Hermitian) X.
    pub fn weight_general(&self, a: f64, b: f64, x: &CMatrix) -> CMatrix {
        let mut y = self.to_eigenbasis(x);
        let l = &self.eig.values;
        let n = self.dim();
        for j in 0..n {
            let wj = l[j].powf(b);
            for i in 0..n {
                y[(i, j)] *= c(l[i].powf(a) * wj);
            }
        }
        self.from_eigenbasis(&y)
    }

    /// Γ_σ^p(f) = σ^{p/2} f σ^{p/2}.
    pub fn gamma_power(&self, p: f64, f: &Hermitian) -> Result<Hermitian> {
        self.check(f)?;
        if p == 0.0 {
            return Ok(f.clone());
        }
        Ok(Hermitian::symmetrize(
            self.weight_general(p / 2.0, p / 2.0, f.as_matrix()),
        ))
    }

    pub fn gamma(&self, f: &Hermitian) -> Result<Hermitian> {
        self.gamma_power(1.0, f)
    }

    pub fn gamma_inv(&self, f: &Hermitian) -> Result<Hermitian> {
        self.gamma_power(-1.0, f)
    }

    /// ‖f‖_{p,σ}.
    pub fn lp_norm(&self, p: f64, f: &Hermitian) -> Result<f64> {
        check_p(p)?;
        let x = self.gamma_power(1.0 / p, f)?;
        let e = x.eig();
        let sum: f64 = e.values.iter().map(|v| v.abs().powf(p)).sum();
        Ok(sum.powf(1.0 / p))
    }

    /// ⟨f,g⟩_σ = tr[σ^{1/2} f σ^{1/2} g].
    pub fn inner(&self, f: &Hermitian, g: &Hermitian) -> Result<f64> {
        self.check(g)?;
        let gf = self.gamma_power(1.0, f)?;
        Ok(trace_product_re(gf.as_matrix(), g.as_matrix()))
    }

    /// Var_σ(g) = tr[Γ_σ(g) g] − tr[Γ_σ(g)]², clamped at 0.
    pub fn variance(&self, g: &Hermitian) -> Result<f64> {
        let gg = self.gamma(g)?;
        let mean = gg.trace();
        let v = trace_product_re(gg.as_matrix(), g.as_matrix()) - mean * mean;
        Ok(v.max(0.0))
    }

    /// tr[σ g], the σ-expectation of an observable.
    pub fn expectation(&self, g: &Hermitian) -> Result<f64> {
        self.check(g)?;
        Ok(self.sigma.trace_with(g))
    }

    /// I_{p,q}(f) = Γ_σ^{−1/p}[|Γ_σ^{1/q}(f)|^{q/p}].
    pub fn power_operator(&self, p: f64, q: f64, f: &Hermitian) -> Result<Hermitian> {
        check_p(p)?;
        check_p(q)?;
        let y = self.gamma_power(1.0 / q, f)?;
        let r = q / p;
        let powered = y.eig().map_unchecked(|x| x.abs().powf(r));
        self.gamma_power(-1.0 / p, &powered)
    }

    /// S_p(f) = Γ^{−1/p}[Γ^{1/p}(f) log Γ^{1/p}(f)] − (1/2p){f, log σ}.
    pub fn op_relative_entropy(&self, p: f64, f: &Hermitian) -> Result<Hermitian> {
        check_p(p)?;
        self.check(f)?;
        require_positive(f)?;
        let y = self.gamma_power(1.0 / p, f)?;
        let ylogy = x_log_x(&y.eig())?;
        let first = self.gamma_power(-1.0 / p, &ylogy)?;
        let fl = f.as_matrix() * self.log_sigma.as_matrix();
        let anti = Hermitian::symmetrize(fl * c(2.0)); // {f, log σ}
        Ok(first.sub(&anti.scale(1.0 / (2.0 * p))))
    }

    /// Ent_p(f) for positive definite f; p ≈ 1 and p = 2 use closed forms.
    pub fn ent_p(&self, p: f64, f: &Hermitian) -> Result<f64> {
        check_p(p)?;
        if is_p_one(p) {
            return self.ent1(f);
        }
        if p == 2.0 {
            return self.ent2(f);
        }
        let q = holder_conjugate(p);
        let s = self.op_relative_entropy(p, f)?;
        let i = self.power_operator(q, p, f)?;
        let norm = self.lp_norm(p, f)?;
        let v = self.inner(&i, &s)? - norm.powf(p) * norm.ln();
        Ok(v.max(0.0))
    }

    /// Ent₁(f) = tr[Γf(log Γf − log σ)] − tr Γf · log tr Γf.
    pub fn ent1(&self, f: &Hermitian) -> Result<f64> {
        self.check(f)?;
        require_positive(f)?;
        let gf = self.gamma(f)?;
        let lg = log_of(&gf.eig())?;
        let tr = gf.trace();
        let v = gf.trace_with(&lg.sub(&self.log_sigma)) - tr * tr.ln();
        Ok(v.max(0.0))
    }

    /// Ent₂(f) = tr[X² log X] − ½tr[X² log σ] − ½‖f‖² log ‖f‖², X = Γ^{1/2}(f).
    pub fn ent2(&self, f: &Hermitian) -> Result<f64> {
        self.check(f)?;
        require_positive(f)?;
        let x = self.gamma_power(0.5, f)?;
        let e = x.eig();
        let x2 = e.map_unchecked(|v| v * v);
        let x2logx = e.map(|v| v * v * v.ln(), default_eig_floor(&e))?;
        let n2 = x2.trace();
        let v = x2logx.trace() - 0.5 * x2.trace_with(&self.log_sigma) - 0.5 * n2 * n2.ln();
        Ok(v.max(0.0))
    }

    /// Quantum relative entropy D(ρ‖σ) = tr[ρ(log ρ − log σ)] with 0·log 0 = 0.
    pub fn relative_entropy(&self, rho: &Hermitian) -> Result<f64> {
        self.check(rho)?;
        let e = rho.eig();
        let mut neg_entropy = 0.0;
        for &v in &e.values {
            if v > 0.0 {
                neg_entropy += v * v.ln();
            }
        }
        let cross = rho.trace_with(&self.log_sigma);
        Ok((neg_entropy - cross).max(0.0))
    }

    /// Finite-difference and analytic sides of
    /// d/dt ‖f‖^{p(t)}_{p(t),σ} = ṗ ⟨I_{q,p}(f), S_p(f)⟩_σ.
    ///
    /// `path` returns (p(t), ṗ(t)); the difference quotient is central with step `h`.
    pub fn norm_derivative_check(
        &self,
        f: &Hermitian,
        path: impl Fn(f64) -> (f64, f64),
        t: f64,
        h: f64,
    ) -> Result<(f64, f64)> {
        require_positive(f)?;
        let powered = |s: f64| -> Result<f64> {
            let p = path(s).0;
            Ok(self.lp_norm(p, f)?.powf(p))
        };
        let lhs = (powered(t + h)? - powered(t - h)?) / (2.0 * h);
        let (p, pdot) = path(t);
        if pdot == 0.0 {
            return Ok((lhs, 0.0));
        }
        let inner = if is_p_one(p) {
            // q → ∞: I_{∞,1}(f) = 𝟙 and the pairing reduces to tr[Γ(S₁(f))]
            let s = self.op_relative_entropy(1.0, f)?;
            self.gamma(&s)?.trace()
        } else {
            let q = holder_conjugate(p);
            let s = self.op_relative_entropy(p, f)?;
            let i = self.power_operator(q, p, f)?;
            self.inner(&i, &s)?
        };
        Ok((lhs, pdot * inner))
    }
}

fn format_args_string(prefix: &str, value: f64) -> String {
    use core::fmt::Write;
    let mut s = String::from(prefix);
    let _ = write!(s, "{value:e}");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs_diff;
    use crate::random::{gaussian_hermitian, random_density, random_positive, rng_from_seed};

    fn diag(v: &[f64]) -> Hermitian {
        Hermitian::from_diagonal(v)
    }

    #[test]
    fn gamma_power_zero_and_flat() {
        let mut rng = rng_from_seed(1);
        let s = WeightedSpace::new(random_density(&mut rng, 3)).unwrap();
        let f = gaussian_hermitian(&mut rng, 3, 1.0);
        assert_eq!(s.gamma_power(0.0, &f).unwrap(), f);

        let flat = WeightedSpace::maximally_mixed(4);
        let f = gaussian_hermitian(&mut rng, 4, 1.0);
        let g = flat.gamma_power(1.0, &f).unwrap();
        assert!(max_abs_diff(g.as_matrix(), f.scale(0.25).as_matrix()) < 1e-14);
    }

    #[test]
    fn gamma_inverse_round_trip() {
        let mut rng = rng_from_seed(2);
        for _ in 0..10 {
            let s = WeightedSpace::new(random_density(&mut rng, 4)).unwrap();
            let f = gaussian_hermitian(&mut rng, 4, 1.0);
            let back = s.gamma_power(-1.0, &s.gamma_power(1.0, &f).unwrap()).unwrap();
            assert!(max_abs_diff(back.as_matrix(), f.as_matrix()) < 1e-10);
        }
    }

    #[test]
    fn identity_has_unit_norm() {
        let mut rng = rng_from_seed(3);
        let s = WeightedSpace::new(random_density(&mut rng, 3)).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            assert!((s.lp_norm(p, &Hermitian::identity(3)).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((s.inner(&Hermitian::identity(3), &Hermitian::identity(3)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_two_norm() {
        let s = WeightedSpace::maximally_mixed(2);
        let n = s.lp_norm(2.0, &diag(&[2.0, 0.0])).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_p_below_one() {
        let s = WeightedSpace::maximally_mixed(2);
        assert!(s.lp_norm(0.5, &Hermitian::identity(2)).is_err());
    }

    #[test]
    fn rejects_rank_deficient_state() {
        assert!(WeightedSpace::new(diag(&[1.0, 0.0])).is_err());
        assert!(WeightedSpace::new(diag(&[0.7, 0.7])).is_err());
    }

    #[test]
    fn variance_examples() {
        let s = WeightedSpace::maximally_mixed(2);
        let z = diag(&[1.0, -1.0]);
        assert!((s.variance(&z).unwrap() - 1.0).abs() < 1e-14);
        assert!(s.variance(&Hermitian::identity(2).scale(3.0)).unwrap() < 1e-14);

        let mut rng = rng_from_seed(4);
        let s = WeightedSpace::new(random_density(&mut rng, 3)).unwrap();
        let g = gaussian_hermitian(&mut rng, 3, 1.0);
        let a = s.variance(&g).unwrap();
        let b = s.variance(&g.shift(3.0)).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn inner_two_routes() {
        let mut rng = rng_from_seed(5);
        let s = WeightedSpace::new(random_density(&mut rng, 3)).unwrap();
        let f = gaussian_hermitian(&mut rng, 3, 1.0);
        let g = gaussian_hermitian(&mut rng, 3, 1.0);
        let root = s.sigma_power(0.5);
        let direct = crate::operator::trace(&(root.as_matrix() * f.as_matrix() * root.as_matrix() * g.as_matrix())).re;
        assert!((s.inner(&f, &g).unwrap() - direct).abs() < 1e-12);
        assert!((s.inner(&f, &g).unwrap() - s.inner(&g, &f).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn power_operator_identity_and_flat_case() {
        let mut rng = rng_from_seed(6);
        let s = WeightedSpace::new(random_density(&mut rng, 3)).unwrap();
        let f = random_positive(&mut rng, 3, 0.5);
        let same = s.power_operator(2.7, 2.7, &f).unwrap();
        assert!(max_abs_diff(same.as_matrix(), f.as_matrix()) < 1e-10);

        let flat = WeightedSpace::maximally_mixed(3);
        let (p, q) = (1.5, 3.0);
        let got = flat.power_operator(p, q, &f).unwrap();
        let expect = f.eig().map_unchecked(|x| x.powf(q / p));
        assert!(max_abs_diff(got.as_matrix(), expect.as_matrix()) < 1e-10);

        let cst = 1.7;
        let a = s.power_operator(2.0, 4.0, &f.scale(cst)).unwrap();
        let b = s.power_operator(2.0, 4.0, &f).unwrap().scale(cst * cst);
        assert!(max_abs_diff(a.as_matrix(), b.as_matrix()) < 1e-10);
    }

    #[test]
    fn relative_entropy_of_identity_vanishes() {
        let s = WeightedSpace::maximally_mixed(3);
        let r = s.op_relative_entropy(2.0, &Hermitian::identity(3)).unwrap();
        assert!(crate::operator::max_abs(r.as_matrix()) < 1e-13);
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert!(s.ent_p(p, &Hermitian::identity(3)).unwrap() < 1e-13);
        }
    }

    #[test]
    fn op_relative_entropy_diagonal_reduction() {
        let s = WeightedSpace::new(diag(&[0.3, 0.7])).unwrap();
        let f = diag(&[2.0, 0.5]);
        for p in [1.0, 2.0, 3.5] {
            let got = s.op_relative_entropy(p, &f).unwrap();
            for (k, (&sk, &fk)) in [0.3f64, 0.7].iter().zip(&[2.0f64, 0.5]).enumerate() {
                let y = sk.powf(1.0 / p) * fk;
                let expect = sk.powf(-1.0 / p) * y * y.ln() - fk * sk.ln() / p;
                assert!((got.as_matrix()[(k, k)].re - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn op_relative_entropy_rejects_non_positive() {
        let s = WeightedSpace::maximally_mixed(2);
        let err = s.op_relative_entropy(2.0, &diag(&[1.0, 0.0])).unwrap_err();
        assert!(err.to_string().contains("requires f ∈ 𝒜_d⁺"));
        assert!(s.ent_p(1.0, &diag(&[1.0, -0.1])).is_err());
    }

    #[test]
    fn op_relative_entropy_is_minus_p_times_power_derivative() {
        let mut rng = rng_from_seed(7);
        let s = WeightedSpace::new(random_density(&mut rng, 3)).unwrap();
        let f = random_positive(&mut rng, 3, 0.5);
        let p = 2.0;
        let h = 1e-5;
        let shifted = s.power_operator(p + h, p, &f).unwrap();
        let fd = shifted.sub(&f).scale(-p / h);
        let exact = s.op_relative_entropy(p, &f).unwrap();
        assert!(max_abs_diff(fd.as_matrix(), exact.as_matrix()) < 1e-4);
    }

    #[test]
    fn ent2_closed_form_matches_general_definition() {
        let mut rng = rng_from_seed(8);
        let s = WeightedSpace::new(random_density(&mut rng, 3)).unwrap();
        for _ in 0..10 {
            let f = random_positive(&mut rng, 3, 0.7);
            let closed = s.ent2(&f).unwrap();
            let sp = s.op_relative_entropy(2.0, &f).unwrap();
            let n = s.lp_norm(2.0, &f).unwrap();
            let general = s.inner(&f, &sp).unwrap() - n * n * n.ln();
            assert!((closed - general).abs() < 1e-10 * (1.0 + closed));
        }
    }

    #[test]
    fn ent1_of_relative_density_is_relative_entropy() {
        let mut rng = rng_from_seed(9);
        for _ in 0..10 {
            let s = WeightedSpace::new(random_density(&mut rng, 3)).unwrap();
            let rho = random_density(&mut rng, 3);
            let f = s.gamma_inv(&rho).unwrap();
            let a = s.ent1(&f).unwrap();
            let b = s.relative_entropy(&rho).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn norm_derivative_constant_path() {
        let mut rng = rng_from_seed(10);
        let s = WeightedSpace::new(random_density(&mut rng, 2)).unwrap();
        let f = random_positive(&mut rng, 2, 0.5);
        let (lhs, rhs) = s.norm_derivative_check(&f, |_| (2.0, 0.0), 0.3, 1e-5).unwrap();
        assert!(lhs.abs() < 1e-9 && rhs == 0.0);
    }

    #[test]
    fn norm_derivative_exponential_path() {
        let mut rng = rng_from_seed(11);
        let s = WeightedSpace::new(random_density(&mut rng, 2)).unwrap();
        let f = random_positive(&mut rng, 2, 0.5);
        let path = |t: f64| (1.0 + (2.0 * t).exp(), 2.0 * (2.0 * t).exp());
        let (lhs, rhs) = s.norm_derivative_check(&f, path, 0.3, 1e-5).unwrap();
        assert!((lhs - rhs).abs() <= 1e-5 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }
}
