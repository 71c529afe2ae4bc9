//! SIC-POVMs: built-in Weyl–Heisenberg fiducials for small dimensions, a seeded
//! numerical fiducial search for the rest, and validation against the defining
//! overlap conditions.
//!
//! Outcomes are indexed `x = p·d + q` (0-based) over the displacement labels
//! `(p, q)`; files and the CLI present them 1-based.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c, identity, max_abs_diff, outer, trace, trace_of_product, CMatrix, C64};

/// Tolerance used for the built-in analytic SICs.
pub const ANALYTIC_TOL: f64 = 1e-10;
/// Tolerance used for numerically searched SICs.
pub const SEARCH_TOL: f64 = 1e-7;

/// A unit vector whose Weyl–Heisenberg orbit is (ideally) a SIC.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiducial {
    amplitudes: Vec<C64>,
}

impl Fiducial {
    /// Wraps `amplitudes`, rejecting vectors whose norm differs from 1 by more than 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("fiducial must have dimension ≥ 1".into()));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("fiducial norm is {norm}, expected 1")));
        }
        Ok(Fiducial { amplitudes })
    }

    /// Normalizes `amplitudes` first.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Fiducial::new(amplitudes.into_iter().map(|a| a / n).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Same vector times `e^{iφ}`.
    pub fn with_phase(&self, phi: f64) -> Fiducial {
        let ph = C64::from_polar(1.0, phi);
        Fiducial {
            amplitudes: self.amplitudes.iter().map(|a| a * ph).collect(),
        }
    }

    /// Text form: the dimension on the first line, then one `re im` pair per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.dim());
        for a in &self.amplitudes {
            s.push_str(&format!("{:e} {:e}\n", a.re, a.im));
        }
        s
    }

    /// Parses [`Fiducial::to_text`] output. Lines starting with `#` are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let dim: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty fiducial file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("fiducial dimension: {e}")))?;
        let mut amps = Vec::with_capacity(dim);
        for line in lines {
            let mut parts = line.split_whitespace();
            let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("expected `re im`, got `{line}`")));
            };
            let re: f64 = re.parse().map_err(|e| Error::Parse(format!("{e}: `{re}`")))?;
            let im: f64 = im.parse().map_err(|e| Error::Parse(format!("{e}: `{im}`")))?;
            amps.push(c(re, im));
        }
        if amps.len() != dim {
            return Err(Error::Parse(format!(
                "fiducial declares dimension {dim} but lists {} amplitudes",
                amps.len()
            )));
        }
        Fiducial::new(amps)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Fiducial::parse_text(&text)
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// The `d²` rank-one projectors `Π_x`; the POVM elements are `Π_x / d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SicPovm {
    dim: usize,
    projectors: Vec<CMatrix>,
}

impl SicPovm {
    /// Builds a POVM from explicit projectors. Only shapes are checked; use
    /// [`validate_sic`] for the SIC conditions.
    pub fn from_projectors(dim: usize, projectors: Vec<CMatrix>) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if projectors.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} projectors, got {}",
                dim * dim,
                projectors.len()
            )));
        }
        if let Some(bad) = projectors.iter().find(|p| p.shape() != (dim, dim)) {
            return Err(Error::InvalidArgument(format!(
                "projector has shape {:?}, expected ({dim}, {dim})",
                bad.shape()
            )));
        }
        Ok(SicPovm { dim, projectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_count(&self) -> usize {
        self.projectors.len()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, x: usize) -> &CMatrix {
        &self.projectors[x]
    }

    /// `P(x) = tr(ρ Π_x / d)`.
    pub fn probability(&self, rho: &CMatrix, x: usize) -> f64 {
        trace_of_product(rho, &self.projectors[x]).re / self.dim as f64
    }

    /// Gram matrix `tr(Π_x Π_x')`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.projectors.len();
        DMatrix::from_fn(n, n, |i, j| {
            trace_of_product(&self.projectors[i], &self.projectors[j]).re
        })
    }
}

/// Clock-and-shift displacement `X^p Z^q`, with `X|j> = |j+1>` and `Z|j> = ω^j |j>`.
pub fn displacement(d: usize, p: usize, q: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * PI * ((q * j) % d) as f64 / d as f64;
        m[((j + p) % d, j)] = C64::from_polar(1.0, phase);
    }
    m
}

/// Exact fiducials for `d = 2` (tetrahedron) and `d = 3` (Hesse configuration).
pub fn known_fiducial(d: usize) -> Result<Fiducial> {
    match d {
        2 => {
            let s3 = 3f64.sqrt();
            let a = ((3.0 + s3) / 6.0).sqrt();
            let b = ((3.0 - s3) / 6.0).sqrt();
            Fiducial::normalized(vec![c(a, 0.0), C64::from_polar(b, PI / 4.0)])
        }
        3 => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            Fiducial::normalized(vec![c(0.0, 0.0), c(h, 0.0), c(-h, 0.0)])
        }
        _ => Err(Error::NoBuiltinFiducial(d)),
    }
}

pub fn known_sic(d: usize) -> Result<SicPovm> {
    Ok(wh_povm_from_fiducial(&known_fiducial(d)?))
}

/// Weyl–Heisenberg orbit `Π_{p,q} = D_{p,q}|f><f|D_{p,q}†`. No SIC check is made.
pub fn wh_povm_from_fiducial(f: &Fiducial) -> SicPovm {
    let d = f.dim();
    let v = DVector::from_column_slice(f.amplitudes());
    let mut projectors = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in 0..d {
            let moved = displacement(d, p, q) * &v;
            projectors.push(outer(moved.as_slice()));
        }
    }
    SicPovm { dim: d, projectors }
}

/// Frame potential `Σ_{(p,q)≠(0,0)} |<f|D_{p,q}|f>|⁴`; its minimum over unit
/// vectors, `(d−1)/(d+1)`, is attained exactly at SIC fiducials.
pub fn frame_potential(f: &Fiducial) -> f64 {
    overlaps(f.amplitudes()).iter().map(|o| o * o).sum()
}

/// `|<v|D_{p,q}|v>|² / |v|⁴` for every non-trivial displacement.
fn overlaps(v: &[C64]) -> Vec<f64> {
    let d = v.len();
    let n2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let mut out = Vec::with_capacity(d * d - 1);
    for p in 0..d {
        for q in 0..d {
            if p == 0 && q == 0 {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                let phase = 2.0 * PI * ((q * j) % d) as f64 / d as f64;
                acc += v[(j + p) % d].conj() * C64::from_polar(1.0, phase) * v[j];
            }
            out.push(acc.norm_sqr() / (n2 * n2));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SicValidationReport {
    pub max_gram_error: f64,
    pub max_identity_error: f64,
    pub max_projector_error: f64,
    pub pass: bool,
    pub tolerance: f64,
}

pub fn validate_sic(povm: &SicPovm, tol: f64) -> SicValidationReport {
    let d = povm.dim;
    let df = d as f64;
    let mut projector_err: f64 = 0.0;
    let mut sum = CMatrix::zeros(d, d);
    for p in &povm.projectors {
        let herm = max_abs_diff(p, &p.adjoint());
        let idem = max_abs_diff(&(p * p), p);
        let tr = (trace(p) - c(1.0, 0.0)).norm();
        projector_err = projector_err.max(herm).max(idem).max(tr);
        sum += p;
    }
    let identity_err = max_abs_diff(&(sum / c(df, 0.0)), &identity(d));
    let mut gram_err: f64 = 0.0;
    let n = povm.projectors.len();
    for i in 0..n {
        for j in i..n {
            let expect = if i == j { 1.0 } else { 1.0 / (df + 1.0) };
            let got = trace_of_product(&povm.projectors[i], &povm.projectors[j]);
            gram_err = gram_err.max((got - c(expect, 0.0)).norm());
        }
    }
    if n != d * d {
        gram_err = f64::INFINITY;
    }
    let nan_safe = |e: f64| if e.is_nan() { f64::INFINITY } else { e };
    let (g, i, p) = (nan_safe(gram_err), nan_safe(identity_err), nan_safe(projector_err));
    SicValidationReport {
        max_gram_error: g,
        max_identity_error: i,
        max_projector_error: p,
        pass: g <= tol && i <= tol && p <= tol,
        tolerance: tol,
    }
}

/// Iterations allowed for one restart before drawing a new starting point.
const ITERS_PER_RESTART: usize = 400;

/// Seeded numerical search for a Weyl–Heisenberg SIC fiducial.
///
/// Each restart draws a Gaussian starting vector and drives the overlap
/// residuals `|<f|D_{p,q}|f>|² − 1/(d+1)` to zero with damped Gauss–Newton
/// (Levenberg–Marquardt) steps; driving every residual to zero is the same as
/// reaching the frame-potential minimum. The first candidate whose orbit
/// passes [`validate_sic`] at `tol` is returned. `max_iter` bounds the total
/// number of damped steps across all restarts.
pub fn search_fiducial(d: usize, seed: u64, tol: f64, max_iter: usize) -> Result<Fiducial> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("fiducial search needs d ≥ 2, got {d}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let target = 1.0 / (d as f64 + 1.0);
    let mut used = 0usize;
    let mut best_potential = f64::INFINITY;

    while used < max_iter {
        let mut params: Vec<f64> = (0..2 * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let budget = ITERS_PER_RESTART.min(max_iter - used);
        let steps = levenberg_marquardt(&mut params, target, tol * 1e-3, budget);
        used += steps;

        let Ok(candidate) = Fiducial::normalized(to_complex(&params)) else {
            continue;
        };
        best_potential = best_potential.min(frame_potential(&candidate));
        let report = validate_sic(&wh_povm_from_fiducial(&candidate), tol);
        if report.pass {
            return Ok(candidate);
        }
    }
    Err(Error::SearchFailed {
        iterations: used,
        best_potential,
    })
}

fn to_complex(params: &[f64]) -> Vec<C64> {
    let d = params.len() / 2;
    (0..d).map(|j| c(params[j], params[d + j])).collect()
}

fn residuals(params: &[f64], target: f64) -> DVector<f64> {
    let v = to_complex(params);
    let o = overlaps(&v);
    DVector::from_iterator(o.len(), o.into_iter().map(|x| x - target))
}

/// Returns the number of iterations spent.
fn levenberg_marquardt(params: &mut [f64], target: f64, stop: f64, budget: usize) -> usize {
    let n = params.len();
    let mut lambda = 1e-3;
    let mut r = residuals(params, target);
    let mut cost = r.norm_squared();
    let h = 1e-7;
    for iter in 0..budget {
        if r.amax() < stop {
            return iter;
        }
        // Central-difference Jacobian; the residuals are scale-invariant in the
        // parameters so the Jacobian is always rank-deficient by the gauge
        // directions and the damping term keeps the normal equations solvable.
        let mut jac = DMatrix::<f64>::zeros(r.len(), n);
        let mut probe = params.to_vec();
        for k in 0..n {
            let scale = h * (1.0 + params[k].abs());
            probe[k] = params[k] + scale;
            let up = residuals(&probe, target);
            probe[k] = params[k] - scale;
            let down = residuals(&probe, target);
            probe[k] = params[k];
            jac.set_column(k, &((up - down) / (2.0 * scale)));
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * (jtj[(k, k)] + 1e-12);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&jtr)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e12 {
                        return iter + 1;
                    }
                    continue;
                }
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            let tr = residuals(&trial, target);
            let tc = tr.norm_squared();
            if tc < cost {
                params.copy_from_slice(&trial);
                // keep the parameter vector near unit norm
                let nrm = params.iter().map(|x| x * x).sum::<f64>().sqrt();
                params.iter_mut().for_each(|x| *x /= nrm);
                r = residuals(params, target);
                cost = r.norm_squared();
                lambda = (lambda / 3.0).max(1e-15);
                break;
            }
            lambda *= 4.0;
            if lambda > 1e12 {
                return iter + 1;
            }
        }
    }
    budget
}
