//! Dense complex matrix primitives.
//!
//! Superoperators act on column-stacked operators:
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. Every map in the crate is built on top of
//! this convention.

use crate::error::{invalid, Error, Result};
use crate::prelude::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest operator dimension for which dense d²×d² superoperators are built.
pub const DENSE_MAX_DIM: usize = 32;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn ensure_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            expected: m.nrows().max(1),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Re tr(A B) without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let x = a[(i, k)];
            let y = b[(k, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// A Hermitian matrix, stored exactly symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Accepts `m` when ‖m − m†‖_max ≤ 1e−12·‖m‖_max and stores (m+m†)/2.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        ensure_finite(&m, "Hermitian::new")?;
        let scale = max_abs(&m);
        let deviation = max_abs_diff(&m, &m.adjoint());
        if deviation > 1e-12 * scale.max(f64::MIN_POSITIVE) && deviation > 0.0 {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrize(m))
    }

    /// (m+m†)/2 without a tolerance check. Use for matrices that are
    /// Hermitian by construction up to rounding.
    pub fn symmetrize(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Hermitian((m + adj) * c(0.5))
    }

    pub fn identity(dim: usize) -> Self {
        Hermitian(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(CMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x)));
        Hermitian(CMatrix::from_diagonal(&v))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = CMatrix::from_fn(n, n, |i, j| c(rows[i][j]));
        Hermitian::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        trace(&self.0).re
    }

    pub fn scale(&self, s: f64) -> Self {
        Hermitian(&self.0 * c(s))
    }

    pub fn add(&self, other: &Hermitian) -> Self {
        Hermitian(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Hermitian) -> Self {
        Hermitian(&self.0 - &other.0)
    }

    /// self + s·𝟙
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c(s);
        }
        Hermitian(m)
    }

    /// Re tr(self · other).
    pub fn trace_with(&self, other: &Hermitian) -> f64 {
        trace_product_re(&self.0, &other.0)
    }

    pub fn eig(&self) -> HermitianEigen {
        eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().values[0]
    }

    /// X A X† for arbitrary X.
    pub fn conjugate_by(&self, x: &CMatrix) -> Hermitian {
        Hermitian::symmetrize(x * &self.0 * x.adjoint())
    }

    /// X A X for Hermitian X.
    pub fn sandwich(&self, x: &Hermitian) -> Hermitian {
        Hermitian::symmetrize(&x.0 * &self.0 * &x.0)
    }
}

/// Eigendecomposition A = V diag(λ) V† with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    /// V diag(f(λ)) V†, no clamping and no finiteness check.
    pub fn map_unchecked(&self, mut f: impl FnMut(f64) -> f64) -> Hermitian {
        let n = self.dim();
        let v = &self.vectors;
        let fx: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = CMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += v[(i, k)] * v[(j, k)].conj() * fx[k];
                }
                out[(i, j)] = acc;
            }
        }
        Hermitian::symmetrize(out)
    }

    /// V diag(f(max(λ, floor))) V†.
    pub fn map(&self, f: impl Fn(f64) -> f64, eig_floor: f64) -> Result<Hermitian> {
        let mut bad = false;
        let out = self.map_unchecked(|x| {
            let y = f(x.max(eig_floor));
            if !y.is_finite() {
                bad = true;
            }
            y
        });
        if bad {
            return Err(Error::NonFinite("matrix_function"));
        }
        Ok(out)
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.map_unchecked(|x| x)
    }
}

pub fn eig_hermitian(a: &Hermitian) -> HermitianEigen {
    let n = a.dim();
    let eig = nalgebra::SymmetricEigen::new(a.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    HermitianEigen { values, vectors }
}

/// Default eigenvalue floor, 1e−14·λ_max.
pub fn default_eig_floor(eig: &HermitianEigen) -> f64 {
    1e-14 * eig.max_eigenvalue().abs()
}

/// Applies a real scalar function through the spectral decomposition,
/// clamping eigenvalues below `eig_floor` first.
pub fn matrix_function(a: &Hermitian, f: impl Fn(f64) -> f64, eig_floor: f64) -> Result<Hermitian> {
    a.eig().map(f, eig_floor)
}

/// Column-stacking vectorization.
pub fn vec_of(x: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(x.as_slice())
}

pub fn unvec(v: &DVector<C64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// A linear map 𝓜_d → 𝓜_d as a d²×d² matrix acting on column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        check_dim(dim * dim, matrix.nrows())?;
        check_dim(dim * dim, matrix.ncols())?;
        Ok(Superoperator { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Superoperator {
            dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Superoperator {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// X ↦ A X B.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let d = check_square(a)?;
        check_dim(d, check_square(b)?)?;
        Ok(Superoperator {
            dim: d,
            matrix: kron(&b.transpose(), a),
        })
    }

    /// X ↦ Σ_k A_k X B_k.
    pub fn from_terms(dim: usize, terms: &[(CMatrix, CMatrix)]) -> Result<Self> {
        let mut out = Superoperator::zeros(dim);
        for (a, b) in terms {
            check_dim(dim, check_square(a)?)?;
            let s = Superoperator::sandwich(a, b)?;
            out.matrix += s.matrix;
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let v = vec_of(x);
        unvec(&(&self.matrix * v), self.dim)
    }

    pub fn apply_hermitian(&self, x: &Hermitian) -> Hermitian {
        Hermitian::symmetrize(self.apply(x.as_matrix()))
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Hilbert–Schmidt adjoint.
    pub fn adjoint(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn add(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn scale(&self, s: f64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix * c(s),
        }
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// (X ↦ A X B) ∘ self, in O(d⁵) rather than a d⁶ matrix product.
    pub fn then_sandwich(&self, a: &CMatrix, b: &CMatrix) -> Superoperator {
        let d = self.dim;
        let n = d * d;
        let mut out = CMatrix::zeros(n, n);
        for k in 0..n {
            let col = CMatrix::from_column_slice(d, d, self.matrix.column(k).as_slice());
            let img = a * col * b;
            out.column_mut(k).copy_from_slice(img.as_slice());
        }
        Superoperator { dim: d, matrix: out }
    }

    /// self ∘ (X ↦ A X B), via the transpose of [`Self::then_sandwich`].
    pub fn after_sandwich(&self, a: &CMatrix, b: &CMatrix) -> Superoperator {
        let t = Superoperator {
            dim: self.dim,
            matrix: self.matrix.transpose(),
        };
        let r = t.then_sandwich(&a.transpose(), &b.transpose());
        Superoperator {
            dim: self.dim,
            matrix: r.matrix.transpose(),
        }
    }

    /// exp(t·self).
    pub fn expm(&self, t: f64) -> Result<Superoperator> {
        expm(self, t)
    }

    /// Choi matrix Σ_ij E_ij ⊗ Φ(E_ij) of the map.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = ONE;
                let img = self.apply(&e);
                for a in 0..d {
                    for b in 0..d {
                        out[(i * d + a, j * d + b)] = img[(a, b)];
                    }
                }
            }
        }
        out
    }
}

/// Scaling-and-squaring exponential of t·S.
pub fn expm(s: &Superoperator, t: f64) -> Result<Superoperator> {
    if !t.is_finite() {
        return Err(invalid("t", "time must be finite"));
    }
    let a = &s.matrix * c(t);
    Ok(Superoperator {
        dim: s.dim,
        matrix: expm_matrix(&a)?,
    })
}

fn norm_one(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// Backward-error bounds θ_m for the [m/m] Padé approximants.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential via degree-13 Padé with scaling and squaring (lower
/// degrees when the norm allows).
pub fn expm_matrix(a: &CMatrix) -> Result<CMatrix> {
    let n = check_square(a)?;
    let norm = norm_one(a);
    if !norm.is_finite() {
        return Err(Error::Overflow { norm });
    }
    let id = CMatrix::identity(n, n);
    if norm == 0.0 {
        return Ok(id);
    }
    for &(m, theta) in THETA.iter() {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(a, b, &id);
            return solve_pade(&u, &v);
        }
    }
    let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
    if s > 1000 {
        return Err(Error::Overflow { norm });
    }
    let scaled = a * c(2f64.powi(-s));
    let (u, v) = pade13(&scaled, &id);
    let mut r = solve_pade(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    ensure_finite(&r, "expm").map_err(|_| Error::Overflow { norm })?;
    Ok(r)
}

fn pade_low(a: &CMatrix, b: &[f64], id: &CMatrix) -> (CMatrix, CMatrix) {
    let a2 = a * a;
    let mut pow = id.clone();
    let mut u = id * c(b[1]);
    let mut v = id * c(b[0]);
    let mut k = 2;
    while k < b.len() {
        pow = &pow * &a2;
        v += &pow * c(b[k]);
        u += &pow * c(b[k + 1]);
        k += 2;
    }
    (a * u, v)
}

fn pade13(a: &CMatrix, id: &CMatrix) -> (CMatrix, CMatrix) {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let u = a
        * (&a6 * inner_u + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + id * c(b[1]));
    let inner_v = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let v = &a6 * inner_v + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + id * c(b[0]);
    (u, v)
}

fn solve_pade(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or(Error::Singular("Padé denominator"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_hermitian, rng_from_seed};

    fn pauli_x() -> Hermitian {
        Hermitian::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn identity_eigenvalues() {
        let e = eig_hermitian(&Hermitian::identity(2));
        assert_eq!(e.values.len(), 2);
        for v in &e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let e = eig_hermitian(&Hermitian::from_diagonal(&[3.0, 1.0]));
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        // eigenvector for 1 is e_2
        assert!(e.vectors[(1, 0)].norm() > 1.0 - 1e-12);
    }

    #[test]
    fn pauli_x_eigenvectors() {
        let e = eig_hermitian(&pauli_x());
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        // (1, -1)/√2 up to phase
        let v0 = e.vectors.column(0);
        let overlap = (v0[0] * s - v0[1] * s).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_and_unitarity() {
        let mut rng = rng_from_seed(7);
        for d in 1..6 {
            let a = gaussian_hermitian(&mut rng, d, 2.0);
            let e = a.eig();
            let err = max_abs_diff(e.reconstruct().as_matrix(), a.as_matrix());
            assert!(err <= 1e-10 * (1.0 + max_abs(a.as_matrix())));
            let vv = e.vectors.adjoint() * &e.vectors;
            assert!(max_abs_diff(&vv, &CMatrix::identity(d, d)) < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn matrix_function_identity_and_log() {
        let mut rng = rng_from_seed(1);
        let a = gaussian_hermitian(&mut rng, 4, 1.0);
        let same = matrix_function(&a, |x| x, f64::NEG_INFINITY).unwrap();
        assert!(max_abs_diff(same.as_matrix(), a.as_matrix()) < 1e-12);

        let e = core::f64::consts::E;
        let d = Hermitian::from_diagonal(&[e, e * e]);
        let l = matrix_function(&d, f64::ln, 0.0).unwrap();
        assert!(max_abs_diff(l.as_matrix(), Hermitian::from_diagonal(&[1.0, 2.0]).as_matrix()) < 1e-14);
    }

    #[test]
    fn sqrt_round_trip() {
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let g = gaussian_hermitian(&mut rng, 4, 1.0);
            let psd = Hermitian::symmetrize(g.as_matrix() * g.as_matrix());
            let root = matrix_function(&psd, f64::sqrt, 0.0).unwrap();
            let back = Hermitian::symmetrize(root.as_matrix() * root.as_matrix());
            assert!(max_abs_diff(back.as_matrix(), psd.as_matrix()) < 1e-10);
        }
    }

    #[test]
    fn matrix_function_rejects_non_finite() {
        let a = Hermitian::from_diagonal(&[0.0, 1.0]);
        assert!(matrix_function(&a, f64::ln, 0.0).is_err());
        assert!(matrix_function(&a, f64::ln, 1e-14).is_ok());
    }

    #[test]
    fn identity_map_vectorizes_to_identity() {
        let id = CMatrix::identity(2, 2);
        let s = Superoperator::sandwich(&id, &id).unwrap();
        assert_eq!(s.matrix(), &CMatrix::identity(4, 4));
    }

    #[test]
    fn left_multiplication_by_diagonal() {
        let (a, b) = (2.5, -0.75);
        let am = Hermitian::from_diagonal(&[a, b]).into_matrix();
        let s = Superoperator::sandwich(&am, &CMatrix::identity(2, 2)).unwrap();
        let expect = Hermitian::from_diagonal(&[a, b, a, b]).into_matrix();
        assert_eq!(s.matrix(), &expect);
    }

    #[test]
    fn vectorization_convention() {
        let mut rng = rng_from_seed(11);
        let d = 3;
        let a = crate::random::ginibre(&mut rng, d);
        let b = crate::random::ginibre(&mut rng, d);
        let s = Superoperator::sandwich(&a, &b).unwrap();
        for _ in 0..20 {
            let x = crate::random::ginibre(&mut rng, d);
            let direct = &a * &x * &b;
            assert!(max_abs_diff(&s.apply(&x), &direct) <= 1e-12);
        }
    }

    #[test]
    fn structured_compositions_match_dense_products() {
        let mut rng = rng_from_seed(12);
        let d = 3;
        let m = Superoperator::from_matrix(d, crate::random::ginibre(&mut rng, d * d)).unwrap();
        let a = crate::random::ginibre(&mut rng, d);
        let b = crate::random::ginibre(&mut rng, d);
        let s = Superoperator::sandwich(&a, &b).unwrap();
        assert!(m.then_sandwich(&a, &b).max_abs_diff(&s.compose(&m)) < 1e-12);
        assert!(m.after_sandwich(&a, &b).max_abs_diff(&m.compose(&s)) < 1e-12);
    }

    #[test]
    fn expm_zero_time_and_scalar() {
        let mut rng = rng_from_seed(5);
        let s = Superoperator::from_matrix(2, crate::random::ginibre(&mut rng, 4)).unwrap();
        let e0 = s.expm(0.0).unwrap();
        assert!(e0.max_abs_diff(&Superoperator::identity(2)) < 1e-15);

        let gamma = 1.7;
        let t = 0.9;
        let minus = Superoperator::identity(3).scale(-gamma);
        let e = minus.expm(t).unwrap();
        let expect = Superoperator::identity(3).scale((-gamma * t).exp());
        assert!(e.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn expm_semigroup_property() {
        let mut rng = rng_from_seed(9);
        for _ in 0..5 {
            let s = Superoperator::from_matrix(3, crate::random::ginibre(&mut rng, 9)).unwrap();
            let (t1, t2) = (0.37, 1.21);
            let lhs = s.expm(t1).unwrap().compose(&s.expm(t2).unwrap());
            let rhs = s.expm(t1 + t2).unwrap();
            let scale = 1.0 + rhs.max_abs();
            assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * scale);
        }
    }

    #[test]
    fn expm_matches_taylor_on_small_matrix() {
        let mut rng = rng_from_seed(2);
        let a = crate::random::ginibre(&mut rng, 5) * c(0.05);
        let mut term = CMatrix::identity(5, 5);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a * c(1.0 / k as f64);
            sum += &term;
        }
        assert!(max_abs_diff(&expm_matrix(&a).unwrap(), &sum) < 1e-14);
    }

    #[test]
    fn expm_overflow_is_reported() {
        let a = CMatrix::from_element(2, 2, c(f64::MAX));
        assert!(matches!(expm_matrix(&a), Err(Error::Overflow { .. })));
    }

    #[test]
    fn hermitian_exp_matches_left_multiplication_exponential() {
        let mut rng = rng_from_seed(21);
        let a = gaussian_hermitian(&mut rng, 2, 1.0);
        let via_fn = matrix_function(&a, f64::exp, f64::NEG_INFINITY).unwrap();
        let left = Superoperator::sandwich(a.as_matrix(), &CMatrix::identity(2, 2)).unwrap();
        let applied = left.expm(1.0).unwrap().apply(&CMatrix::identity(2, 2));
        assert!(max_abs_diff(&applied, via_fn.as_matrix()) < 1e-12);
    }

    #[test]
    fn choi_of_identity_is_rank_one() {
        let choi = Superoperator::identity(2).choi();
        let h = Hermitian::new(choi).unwrap();
        let e = h.eig();
        assert!((e.values[3] - 2.0).abs() < 1e-12);
        assert!(e.values[..3].iter().all(|v| v.abs() < 1e-12));
    }
}
