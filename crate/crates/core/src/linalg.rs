//! Dense complex linear algebra helpers: tensor-index bookkeeping for multi-wire
//! density matrices and seeded Haar-random unitaries.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Entrywise distance of `U†U` from the identity.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Projector `|v><v|`.
pub fn outer(v: &[C64]) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

/// Haar-distributed unitary of side `dim`, deterministic in `seed`.
///
/// Entries of a complex Ginibre matrix are drawn from ChaCha20 seeded with
/// `seed`, the matrix is QR-factorized, and the columns of `Q` are rephased by
/// `r_ii / |r_ii|` so the distribution is exactly Haar.
pub fn haar_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Fill row by row so the draw order is independent of nalgebra's storage order.
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for e in entries.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *e = c(re * scale, im * scale);
    }
    let g = CMatrix::from_row_slice(dim, dim, &entries);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Row-major tensor layout over an ordered list of subsystem dimensions.
///
/// Subsystem 0 is the most significant digit of a flat index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Layout {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total = dims.iter().product();
        Layout { dims, strides, total }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn digit(&self, index: usize, k: usize) -> usize {
        (index / self.strides[k]) % self.dims[k]
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|k| self.digit(index, k)).collect()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Layout with subsystem `k` removed.
    pub fn without(&self, k: usize) -> Layout {
        let mut dims = self.dims.clone();
        dims.remove(k);
        Layout::new(dims)
    }

    /// Split a flat index into (digit of subsystem `k`, flat index in `self.without(k)`).
    pub fn split(&self, index: usize, k: usize) -> (usize, usize) {
        let digit = self.digit(index, k);
        let high = index / (self.strides[k] * self.dims[k]);
        let low = index % self.strides[k];
        (digit, high * self.strides[k] + low)
    }

    /// Inverse of [`Layout::split`].
    pub fn join(&self, digit: usize, rest: usize, k: usize) -> usize {
        let high = rest / self.strides[k];
        let low = rest % self.strides[k];
        (high * self.dims[k] + digit) * self.strides[k] + low
    }
}

/// Embed an operator acting on the subsystems `targets` (in that order) into the full layout.
pub fn embed(op: &CMatrix, layout: &Layout, targets: &[usize]) -> CMatrix {
    let n = layout.total();
    let sub_dims: Vec<usize> = targets.iter().map(|&k| layout.dims()[k]).collect();
    let sub = Layout::new(sub_dims);
    assert_eq!(op.nrows(), sub.total());
    let others: Vec<usize> = (0..layout.len()).filter(|k| !targets.contains(k)).collect();
    let mut full = CMatrix::zeros(n, n);
    for i in 0..n {
        let di = layout.digits(i);
        let si = sub.index(&targets.iter().map(|&k| di[k]).collect::<Vec<_>>());
        for j in 0..n {
            let dj = layout.digits(j);
            if others.iter().any(|&k| di[k] != dj[k]) {
                continue;
            }
            let sj = sub.index(&targets.iter().map(|&k| dj[k]).collect::<Vec<_>>());
            full[(i, j)] = op[(si, sj)];
        }
    }
    full
}

/// `tr_k[(A ⊗ 𝕀) ρ]` where `A` acts on subsystem `k`.
pub fn contract_subsystem(rho: &CMatrix, layout: &Layout, k: usize, a: &CMatrix) -> CMatrix {
    let rest = layout.without(k);
    let d = layout.dims()[k];
    let m = rest.total();
    let mut out = CMatrix::zeros(m, m);
    for r in 0..m {
        for s in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..d {
                let row_b = layout.join(b, s, k);
                for x in 0..d {
                    let coeff = a[(b, x)];
                    if coeff == C64::new(0.0, 0.0) {
                        continue;
                    }
                    acc += coeff * rho[(layout.join(x, r, k), row_b)];
                }
            }
            out[(r, s)] = acc;
        }
    }
    out
}

/// Partial trace over subsystem `k`.
pub fn partial_trace(rho: &CMatrix, layout: &Layout, k: usize) -> CMatrix {
    let rest = layout.without(k);
    let d = layout.dims()[k];
    let m = rest.total();
    CMatrix::from_fn(m, m, |r, s| {
        (0..d).map(|a| rho[(layout.join(a, r, k), layout.join(a, s, k))]).sum()
    })
}

/// Insert `sigma` as subsystem `k` of a product state with `rest_state`,
/// where `layout` is the layout after insertion.
pub fn insert_subsystem(rest_state: &CMatrix, sigma: &CMatrix, layout: &Layout, k: usize) -> CMatrix {
    let n = layout.total();
    CMatrix::from_fn(n, n, |i, j| {
        let (a, r) = layout.split(i, k);
        let (b, s) = layout.split(j, k);
        sigma[(a, b)] * rest_state[(r, s)]
    })
}
