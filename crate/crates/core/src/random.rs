//! Seeded random matrix ensembles.

use crate::operator::{c, CMatrix, Hermitian, C64};
use crate::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Ginibre matrix with i.i.d. entries of unit variance.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(d, d, |_, _| C64::new(normal(rng) * s, normal(rng) * s))
}

/// GUE-distributed Hermitian matrix scaled by `scale`.
pub fn gaussian_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> Hermitian {
    let g = ginibre(rng, d);
    Hermitian::symmetrize(g * c(scale))
}

/// Haar-distributed unitary via phase-corrected QR of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let n = diag.norm();
        let phase = if n > 0.0 { diag / n } else { c(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random unit vector, uniform on the complex sphere.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| C64::new(normal(rng), normal(rng))).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// |ψ⟩⟨ψ| for a Haar-random ψ.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Hermitian {
    let v = random_ket(rng, d);
    Hermitian::symmetrize(CMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj()))
}

/// Full-rank density matrix G G† / tr(G G†) from the Ginibre ensemble.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Hermitian {
    let g = ginibre(rng, d);
    let m = &g * g.adjoint();
    let tr = crate::operator::trace(&m).re;
    Hermitian::symmetrize(m * c(1.0 / tr))
}

/// Density matrix mixed with the maximally mixed state, weight `mix` on 𝟙/d.
/// Keeps λ_min ≥ mix/d.
pub fn random_density_mixed<R: Rng + ?Sized>(rng: &mut R, d: usize, mix: f64) -> Hermitian {
    let rho = random_density(rng, d);
    rho.scale(1.0 - mix).shift(mix / d as f64)
}

/// exp(h) for Gaussian Hermitian h of the given scale: a positive definite probe.
pub fn random_positive<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> Hermitian {
    gaussian_hermitian(rng, d, scale).eig().map_unchecked(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs_diff;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(4);
        for d in 1..7 {
            let u = haar_unitary(&mut rng, d);
            let uu = u.adjoint() * &u;
            assert!(max_abs_diff(&uu, &CMatrix::identity(d, d)) < 1e-12);
        }
    }

    #[test]
    fn densities_are_states() {
        let mut rng = rng_from_seed(8);
        for d in 1..6 {
            for rho in [
                random_density(&mut rng, d),
                random_pure_state(&mut rng, d),
                random_density_mixed(&mut rng, d, 0.2),
            ] {
                assert!((rho.trace() - 1.0).abs() < 1e-12);
                assert!(rho.min_eigenvalue() > -1e-12);
            }
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a = ginibre(&mut rng_from_seed(99), 3);
        let b = ginibre(&mut rng_from_seed(99), 3);
        assert_eq!(a, b);
    }
}
