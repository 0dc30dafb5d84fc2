//! Brute-force reference computations used to cross-check the hierarchies:
//! tensor Gauss–Legendre quadrature, sampling and grid minimization, and
//! bisection on pencils.

use nalgebra::Cholesky;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;

use crate::error::{Error, Result};
use crate::momentmatrix::SymMatrix;
use crate::poly::MultiPoly;
use crate::problem::{FlatPoly, Problem, SetKind};
use crate::scalar::Coefficient;

/// Largest dimension accepted by tensor quadrature.
pub const QUAD_MAX_DIM: usize = 6;
/// Largest number of points accepted by [`grid_min`].
pub const GRID_MAX_POINTS: u128 = 100_000_000;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, exact for degree `≤ 2k − 1`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_legendre(k: usize) -> Self {
        let mut nodes = vec![0.0; k];
        let mut weights = vec![0.0; k];
        for i in 0..k.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(k, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(k, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[k - 1 - i] = x;
            weights[i] = w;
            weights[k - 1 - i] = w;
        }
        QuadratureRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(P_k(x), P_k'(x))` by the three-term recurrence.
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=k {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor Gauss–Legendre integral of `f` over `[-1, 1]^n`.
pub fn quad_integral_fn(f: impl Fn(&[f64]) -> f64, n: usize, nodes: usize) -> Result<f64> {
    if n > QUAD_MAX_DIM {
        return Err(Error::SizeCap {
            what: "quadrature dimension",
            size: n,
            cap: QUAD_MAX_DIM,
        });
    }
    if nodes == 0 {
        return Err(Error::Invalid("quadrature needs at least one node".into()));
    }
    let rule = QuadratureRule::gauss_legendre(nodes);
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut sum = 0.0;
    loop {
        let mut w = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            x[k] = rule.nodes[i];
            w *= rule.weights[i];
        }
        sum += w * f(&x);
        let mut k = 0;
        loop {
            if k == n {
                return Ok(sum);
            }
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Tensor Gauss–Legendre integral of a polynomial over `[-1, 1]^n`.
pub fn quad_integral<C: Coefficient>(p: &MultiPoly<C>, nodes: usize) -> Result<f64> {
    let flat = FlatPoly::new(p);
    quad_integral_fn(|x| flat.eval(x), p.nvars(), nodes)
}

/// Smallest objective value over `samples` seeded random points of `K`.
///
/// Points where a denominator is exactly zero are skipped; a negative
/// denominator is a contract violation.
pub fn monte_carlo_min(problem: &Problem, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    let eval = problem.evaluator();
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut x = vec![0.0; problem.n];
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        sample_point(problem.set, &mut rng, &mut x);
        if let Some(v) = eval.eval(&x)? {
            best = best.min(v);
        }
    }
    Ok(best)
}

fn sample_point(set: SetKind, rng: &mut Pcg64, x: &mut [f64]) {
    match set {
        SetKind::Box => x.iter_mut().for_each(|v| *v = rng.random_range(-1.0..=1.0)),
        SetKind::Sphere => loop {
            x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                x.iter_mut().for_each(|v| *v /= norm);
                return;
            }
        },
    }
}

/// Smallest objective value on the uniform grid with `resolution` points per
/// axis, endpoints included; `resolution = 1` is the center.
pub fn grid_min(problem: &Problem, resolution: usize) -> Result<f64> {
    if problem.set != SetKind::Box {
        return Err(Error::Invalid("grid search is defined on the box only".into()));
    }
    if resolution == 0 {
        return Err(Error::Invalid("resolution must be positive".into()));
    }
    let total = (resolution as u128).checked_pow(problem.n as u32).unwrap_or(u128::MAX);
    if total > GRID_MAX_POINTS {
        return Err(Error::SizeCap {
            what: "grid points",
            size: usize::try_from(total).unwrap_or(usize::MAX),
            cap: GRID_MAX_POINTS as usize,
        });
    }
    let coord = |i: usize| {
        if resolution == 1 {
            0.0
        } else {
            -1.0 + 2.0 * i as f64 / (resolution - 1) as f64
        }
    };
    let eval = problem.evaluator();
    let n = problem.n;
    let mut idx = vec![0usize; n];
    let mut x = vec![coord(0); n];
    let mut best = f64::INFINITY;
    loop {
        if let Some(v) = eval.eval(&x)? {
            best = best.min(v);
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(best);
            }
            idx[k] += 1;
            if idx[k] < resolution {
                x[k] = coord(idx[k]);
                break;
            }
            idx[k] = 0;
            x[k] = coord(0);
            k += 1;
        }
    }
}

/// `sup{a : A − aB ⪰ 0}` by bisection with a Cholesky feasibility test.
///
/// The bracket is widened geometrically until `lo` is feasible and `hi` is not.
pub fn bisection_pencil(
    a: &SymMatrix<f64>,
    b: &SymMatrix<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (ad, bd) = (a.to_dense(), b.to_dense());
    let feasible = |t: f64| Cholesky::new(&ad - &bd * t).is_some();
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let mut width = (hi - lo).max(1.0);
    let mut tries = 0;
    while !feasible(lo) {
        hi = lo;
        lo -= width;
        width *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::NonConvergence {
                what: "bisection bracket (no feasible point)",
                iterations: tries,
            });
        }
    }
    while feasible(hi) {
        lo = hi;
        hi += width;
        width *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::NonConvergence {
                what: "bisection bracket (no infeasible point)",
                iterations: tries,
            });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
