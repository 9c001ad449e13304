//! Dense real/complex matrix utilities shared by every theory instance.
//!
//! Subsystem ordering follows the usual convention: in `kron(a, b)` the left
//! factor is the slower-varying index, so `|i⟩⊗|j⟩` sits at `i·d₂ + j`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Max |h - h†| tolerated before an operator is rejected as non-Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default Frobenius residual for matrix equality.
pub const MATRIX_TOL: f64 = 1e-9;

/// Seeded generator used everywhere randomness is needed.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Row matrix holding the entries of `v`.
pub fn row(v: &RVector) -> RMatrix {
    RMatrix::from_row_slice(1, v.len(), v.as_slice())
}

/// Column matrix holding the entries of `v`.
pub fn col(v: &RVector) -> RMatrix {
    RMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    CVector::from_iterator(a.len() * b.len(), a.iter().flat_map(|x| b.iter().map(move |y| x * y)))
}

/// Euclidean distance between two complex vectors.
pub fn vdiff(a: &CVector, b: &CVector) -> f64 {
    (a - b).norm()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn rkron(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.kronecker(b)
}

pub fn kron_all(mats: &[CMatrix]) -> CMatrix {
    mats.iter()
        .fold(CMatrix::identity(1, 1), |acc, m| kron(&acc, m))
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Tr(a† b), the Hilbert–Schmidt inner product.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    frobenius(&(a - b))
}

pub fn rdiff(a: &RMatrix, b: &RMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).norm()
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    hermiticity_deviation(m) <= tol
}

pub fn ket(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis_projector(d: usize, i: usize) -> CMatrix {
    projector(&ket(d, i))
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Dimension of the null space of a real matrix (singular values ≤ `tol`).
pub fn nullity(m: &RMatrix, tol: f64) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    // pad so the SVD sees at least as many rows as columns
    let mut padded = RMatrix::zeros(m.nrows().max(m.ncols()), m.ncols());
    padded.view_mut((0, 0), m.shape()).copy_from(m);
    let sv = padded.singular_values();
    sv.iter().filter(|&&s| s <= tol).count()
}

/// Partial trace keeping the subsystems listed in `keep` (in increasing order).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, subsystem dimensions {:?} need side {}",
            m.nrows(),
            m.ncols(),
            dims,
            total
        )));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!(
            "keep set {:?} out of range for {} subsystems",
            keep,
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    let mut digits = vec![0usize; dims.len()];
    let index_of = |kept_idx: usize, env_idx: usize, digits: &mut Vec<usize>| {
        scatter(kept_idx, &kept_dims, &keep, digits);
        scatter(env_idx, &traced_dims, &traced, digits);
        gather(digits, dims)
    };

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for r in 0..out_dim {
        for col in 0..out_dim {
            let mut acc = c(0.0, 0.0);
            for e in 0..env_dim {
                let i = index_of(r, e, &mut digits);
                let j = index_of(col, e, &mut digits);
                acc += m[(i, j)];
            }
            out[(r, col)] = acc;
        }
    }
    Ok(out)
}

fn scatter(mut idx: usize, sub_dims: &[usize], positions: &[usize], digits: &mut [usize]) {
    for k in (0..sub_dims.len()).rev() {
        digits[positions[k]] = idx % sub_dims[k];
        idx /= sub_dims[k];
    }
}

fn gather(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// For a tensor product with factor sizes `dims`, returns `map` such that the
/// basis vector at new index `k` is the old basis vector `map[k]`, where the
/// new ordering of factors is `perm` (new position `p` holds old factor
/// `perm[p]`).
pub fn subsystem_permutation(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = Vec::with_capacity(total);
    let mut new_digits = vec![0usize; dims.len()];
    let mut old_digits = vec![0usize; dims.len()];
    for k in 0..total {
        let mut idx = k;
        for p in (0..new_dims.len()).rev() {
            new_digits[p] = idx % new_dims[p];
            idx /= new_dims[p];
        }
        for (p, &old) in perm.iter().enumerate() {
            old_digits[old] = new_digits[p];
        }
        map.push(gather(&old_digits, dims));
    }
    map
}

/// Real permutation matrix reordering tensor factors (see [`subsystem_permutation`]).
pub fn permutation_matrix(dims: &[usize], perm: &[usize]) -> RMatrix {
    let map = subsystem_permutation(dims, perm);
    let n = map.len();
    let mut p = RMatrix::zeros(n, n);
    for (new, &old) in map.iter().enumerate() {
        p[(new, old)] = 1.0;
    }
    p
}

/// Orthonormal Hermitian operator basis: identity/√d first, then the
/// generalized Gell-Mann matrices (symmetric/antisymmetric pairs, then
/// diagonals). For products of several factors the elements are Kronecker
/// products of the factor bases, identity still first.
#[derive(Debug, Clone)]
pub struct HermBasis {
    pub dim: usize,
    pub elements: Vec<CMatrix>,
}

pub fn herm_basis(d: usize) -> HermBasis {
    assert!(d >= 1, "Hilbert dimension must be positive");
    let mut elements = Vec::with_capacity(d * d);
    elements.push(CMatrix::identity(d, d) * c(1.0 / (d as f64).sqrt(), 0.0));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = c(s, 0.0);
            sym[(k, j)] = c(s, 0.0);
            elements.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = c(0.0, -s);
            anti[(k, j)] = c(0.0, s);
            elements.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for m in 0..l {
            diag[(m, m)] = c(norm, 0.0);
        }
        diag[(l, l)] = c(-(l as f64) * norm, 0.0);
        elements.push(diag);
    }
    HermBasis { dim: d, elements }
}

impl HermBasis {
    /// Product basis for a tensor product of Hilbert spaces.
    pub fn product(dims: &[usize]) -> HermBasis {
        let mut basis = herm_basis(1);
        for &d in dims {
            let factor = herm_basis(d);
            let mut elements = Vec::with_capacity(basis.elements.len() * factor.elements.len());
            for a in &basis.elements {
                for b in &factor.elements {
                    elements.push(kron(a, b));
                }
            }
            basis = HermBasis { dim: basis.dim * d, elements };
        }
        basis
    }

    /// Cached product basis; bases are immutable so sharing is safe.
    pub fn shared(dims: &[usize]) -> Arc<HermBasis> {
        static CACHE: OnceLock<Mutex<HashMap<Vec<usize>, Arc<HermBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard
            .entry(dims.to_vec())
            .or_insert_with(|| Arc::new(HermBasis::product(dims)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Coordinates of an arbitrary (not necessarily Hermitian) operator; complex
    /// in general.
    pub fn complex_coords(&self, m: &CMatrix) -> Vec<C64> {
        self.elements.iter().map(|b| hs_inner(b, m)).collect()
    }
}

pub fn to_real(h: &CMatrix, basis: &HermBasis) -> Result<RVector> {
    if h.nrows() != basis.dim || h.ncols() != basis.dim {
        return Err(Error::Dimension(format!(
            "operator is {}x{}, basis dimension {}",
            h.nrows(),
            h.ncols(),
            basis.dim
        )));
    }
    let deviation = hermiticity_deviation(h);
    if deviation > HERMITICITY_TOL {
        return Err(Error::Hermiticity { deviation });
    }
    Ok(RVector::from_iterator(
        basis.len(),
        basis.elements.iter().map(|b| hs_inner(b, h).re),
    ))
}

pub fn from_real(v: &RVector, basis: &HermBasis) -> Result<CMatrix> {
    if v.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "vector of length {} for a basis of {} elements",
            v.len(),
            basis.len()
        )));
    }
    let mut out = CMatrix::zeros(basis.dim, basis.dim);
    for (coef, b) in v.iter().zip(&basis.elements) {
        if *coef != 0.0 {
            out += b * c(*coef, 0.0);
        }
    }
    Ok(out)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal folded back into Q.
pub fn sample_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = gaussian_matrix(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unitary(d: usize, seed: u64) -> CMatrix {
    sample_unitary(d, &mut rng_from_seed(seed))
}

pub fn sample_pure_vector(d: usize, rng: &mut impl Rng) -> CVector {
    let g = gaussian_matrix(d, 1, rng);
    let n = frobenius(&g);
    CVector::from_iterator(d, g.iter().map(|z| z / n))
}

pub fn sample_pure(d: usize, rng: &mut impl Rng) -> CMatrix {
    projector(&sample_pure_vector(d, rng))
}

/// Random density matrix of the given rank (Wishart construction).
pub fn sample_density(d: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(rank >= 1 && rank <= d, "rank must lie in 1..=d");
    let g = gaussian_matrix(d, rank, rng);
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    let rho = rho / c(tr, 0.0);
    // exact Hermitian symmetrization
    (&rho + rho.adjoint()) * c(0.5, 0.0)
}

pub fn random_density(d: usize, rank: usize, seed: u64) -> CMatrix {
    sample_density(d, rank, &mut rng_from_seed(seed))
}
