//! Symmetric eigenvalues and the symmetric-definite pencil `sup{a : A ⪰ aB}`.
//!
//! The pencil is reduced by a congruence `T` built from a diagonally pivoted
//! Cholesky factorization of `B`, so that `Tᵀ B T = diag(I_r, 0)`. The same
//! code runs in `f64` and in multiprecision; exact moment matrices are
//! reduced in multiprecision and only the reduced matrix is rounded.

use std::fmt::Debug;

use dashu_base::SquareRoot;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::momentmatrix::SymMatrix;
use crate::scalar::{Field, Mp};

/// Minimal real-field interface for the generic reduction.
pub trait Real: Clone + PartialOrd + Debug {
    fn zero(prec: usize) -> Self;
    fn from_f64(x: f64, prec: usize) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn sqrt(&self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Real for f64 {
    fn zero(_: usize) -> Self {
        0.0
    }
    fn from_f64(x: f64, _: usize) -> Self {
        x
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Real for Mp {
    fn zero(prec: usize) -> Self {
        Mp::ZERO.with_precision(prec).value()
    }
    fn from_f64(x: f64, prec: usize) -> Self {
        Mp::try_from(x).expect("finite").with_precision(prec).value()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn sqrt(&self) -> Self {
        SquareRoot::sqrt(self)
    }
    fn to_f64(&self) -> f64 {
        Mp::to_f64(self).value()
    }
}

/// Eigenvalues in ascending order, with eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<f64>>,
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn sym_eig(m: &SymMatrix<f64>, want_vectors: bool) -> Result<Eigen> {
    if !m.is_finite() {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    if m.dim() == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: want_vectors.then(|| DMatrix::zeros(0, 0)),
        });
    }
    let iters = 1000 * m.dim().max(10);
    let se = SymmetricEigen::try_new(m.to_dense(), f64::EPSILON, iters).ok_or(
        Error::NonConvergence {
            what: "symmetric eigensolver",
            iterations: iters,
        },
    )?;
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = want_vectors
        .then(|| DMatrix::from_fn(m.dim(), m.dim(), |i, j| se.eigenvectors[(i, order[j])]));
    Ok(Eigen { values, vectors })
}

pub fn min_eig(m: &SymMatrix<f64>) -> Result<f64> {
    Ok(sym_eig(m, false)?.values.first().copied().unwrap_or(f64::INFINITY))
}

/// Outcome of [`cholesky`].
#[derive(Clone, Debug)]
pub enum CholeskyReport {
    /// `M = L Lᵀ` with `L` lower triangular.
    Full { factor: DMatrix<f64> },
    /// Numerical rank `r < m` and an `m × r` matrix `R` with `M ≈ R Rᵀ`,
    /// whose columns span the range of `M`.
    Deficient { rank: usize, range: DMatrix<f64> },
}

/// Pivoted Cholesky with pivot threshold `tol · max diagonal`.
pub fn cholesky(m: &SymMatrix<f64>, tol: f64) -> CholeskyReport {
    let red = PivotedCholesky::<f64>::factor(m, tol, 0);
    let dim = m.dim();
    if red.rank == dim && dim > 0 {
        if let Some(l) = m.to_dense().cholesky() {
            return CholeskyReport::Full { factor: l.l() };
        }
    }
    let mut range = DMatrix::zeros(dim, red.rank);
    for i in 0..dim {
        for k in 0..red.rank.min(i + 1) {
            range[(red.perm[i], k)] = red.l[i][k];
        }
    }
    if red.rank == dim {
        CholeskyReport::Full { factor: range }
    } else {
        CholeskyReport::Deficient {
            rank: red.rank,
            range,
        }
    }
}

/// Diagonally pivoted Cholesky `Pᵀ B P ≈ L Lᵀ` with `L` of size `m × r`.
#[derive(Clone, Debug)]
pub struct PivotedCholesky<R> {
    dim: usize,
    pub rank: usize,
    /// Row `i` of the permuted matrix is row `perm[i]` of the original.
    pub perm: Vec<usize>,
    /// `l[i]` holds columns `0..min(i+1, rank)` of row `i`.
    pub l: Vec<Vec<R>>,
    /// Largest diagonal entry of `B`.
    pub scale: f64,
    /// Smallest accepted pivot relative to `scale`.
    pub min_pivot: f64,
    /// Largest magnitude in the unfactored trailing block, relative to `scale`.
    pub residual: f64,
}

impl<R: Real> PivotedCholesky<R> {
    /// Factors `b`; pivots at or below `tol · max diagonal` end the factorization.
    pub fn factor(b: &SymMatrix<R>, tol: f64, prec: usize) -> Self {
        let m = b.dim();
        let mut w: Vec<Vec<R>> = (0..m)
            .map(|i| (0..=i).map(|j| b.get(i, j).clone()).collect())
            .collect();
        let mut perm: Vec<usize> = (0..m).collect();
        let scale = (0..m).map(|i| w[i][i].to_f64()).fold(0.0f64, f64::max);
        let thresh = R::from_f64(tol * scale, prec);
        let mut l: Vec<Vec<R>> = vec![Vec::new(); m];
        let mut min_pivot = f64::INFINITY;
        let mut rank = 0;
        if scale > 0.0 {
            for k in 0..m {
                let mut p = k;
                for j in k + 1..m {
                    if w[j][j] > w[p][p] {
                        p = j;
                    }
                }
                if w[p][p] <= thresh {
                    break;
                }
                if p != k {
                    swap_sym(&mut w, k, p);
                    perm.swap(k, p);
                    l.swap(k, p);
                }
                min_pivot = min_pivot.min(w[k][k].to_f64() / scale);
                let lkk = w[k][k].sqrt();
                l[k].push(lkk.clone());
                for i in k + 1..m {
                    let v = w[i][k].div(&lkk);
                    l[i].push(v);
                }
                for i in k + 1..m {
                    let lik = l[i][k].clone();
                    for j in k + 1..=i {
                        w[i][j] = w[i][j].sub(&lik.mul(&l[j][k]));
                    }
                }
                rank += 1;
            }
        }
        let mut residual = 0.0f64;
        for i in rank..m {
            for j in rank..=i {
                let v = w[i][j].to_f64();
                // Negative diagonals and any off-diagonal mass signal indefiniteness.
                let mag = if i == j { (-v).max(0.0) } else { v.abs() };
                residual = residual.max(mag);
            }
        }
        if scale > 0.0 {
            residual /= scale;
        } else {
            residual = b.map(Real::to_f64).max_abs();
        }
        PivotedCholesky {
            dim: m,
            rank,
            perm,
            l,
            scale,
            min_pivot: if rank == 0 { 0.0 } else { min_pivot },
            residual,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Tᵀ A T` in permuted coordinates, where `Tᵀ B T = diag(I_r, 0)`.
    pub fn transform(&self, a: &SymMatrix<R>) -> SymMatrix<R> {
        let m = self.dim;
        let r = self.rank;
        let ap = |i: usize, j: usize| a.get(self.perm[i], self.perm[j]);
        // Y = A_p T, row by row.
        let mut y: Vec<Vec<R>> = Vec::with_capacity(m);
        for i in 0..m {
            let mut row: Vec<R> = Vec::with_capacity(m);
            // Columns 0..r: solve L1 z = (A_p[i, 0..r])ᵀ.
            for k in 0..r {
                let mut s = ap(i, k).clone();
                for t in 0..k {
                    s = s.sub(&self.l[k][t].mul(&row[t]));
                }
                row.push(s.div(&self.l[k][k]));
            }
            // Columns r..m: A_p[i, j] - Y[i, 0..r] · L2[j]ᵀ.
            for j in r..m {
                let mut s = ap(i, j).clone();
                for t in 0..r {
                    s = s.sub(&row[t].mul(&self.l[j][t]));
                }
                row.push(s);
            }
            y.push(row);
        }
        // A' = Tᵀ Y; only the lower triangle is formed.
        let mut top: Vec<Vec<R>> = vec![Vec::new(); r];
        for k in 0..r {
            let mut row = Vec::with_capacity(m);
            for j in 0..m {
                let mut s = y[k][j].clone();
                for t in 0..k {
                    s = s.sub(&self.l[k][t].mul(&top[t][j]));
                }
                row.push(s.div(&self.l[k][k]));
            }
            top[k] = row;
        }
        SymMatrix::from_lower_fn(m, |i, j| {
            if i < r {
                top[i][j].clone()
            } else {
                let mut s = y[i][j].clone();
                for t in 0..r {
                    s = s.sub(&self.l[i][t].mul(&top[t][j]));
                }
                s
            }
        })
    }
}

/// Symmetric swap of index `k < p` in lower-triangular row storage.
fn swap_sym<R: Clone>(w: &mut [Vec<R>], k: usize, p: usize) {
    debug_assert!(k < p);
    for j in 0..k {
        let t = w[k][j].clone();
        w[k][j] = std::mem::replace(&mut w[p][j], t);
    }
    let t = w[k][k].clone();
    w[k][k] = std::mem::replace(&mut w[p][p], t);
    for j in k + 1..p {
        let t = w[j][k].clone();
        w[j][k] = std::mem::replace(&mut w[p][j], t);
    }
    for i in p + 1..w.len() {
        let t = w[i][k].clone();
        w[i][k] = std::mem::replace(&mut w[i][p], t);
    }
}

/// Pair `(A, B)` defining the family `A − aB`.
#[derive(Clone, Debug)]
pub struct Pencil {
    pub a: SymMatrix<f64>,
    pub b: SymMatrix<f64>,
}

/// How `sup{a : A − aB ⪰ 0}` came out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PencilStatus {
    Finite,
    /// `B` vanishes and `A ⪰ 0`: every `a` is feasible.
    Unbounded,
    /// No `a` is feasible: `A` fails to be PSD where `B` vanishes.
    Infeasible,
}

/// Result of a pencil solve with conditioning diagnostics.
#[derive(Clone, Debug)]
pub struct GenEig {
    /// `+∞` when unbounded, `−∞` when infeasible.
    pub value: f64,
    pub status: PencilStatus,
    pub dim: usize,
    /// Numerical rank of `B`.
    pub rank: usize,
    /// Smallest accepted Cholesky pivot of `B`, relative to its largest diagonal.
    pub min_pivot: f64,
    /// Working precision in bits (53 for the float path).
    pub precision_bits: usize,
    /// False when adaptive precision hit its cap before two levels agreed.
    pub converged: bool,
}

/// Default rank tolerance, relative to the largest diagonal of `B`.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// `sup{a : A − aB ⪰ 0}` in double precision.
pub fn gen_eig_min(pencil: &Pencil, tol: f64) -> Result<GenEig> {
    let (a, b) = (&pencil.a, &pencil.b);
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let red = PivotedCholesky::<f64>::factor(b, tol, 0);
    check_definite(&red, tol.sqrt())?;
    let at = red.transform(a);
    let (value, status) = finish(&at, red.rank)?;
    Ok(GenEig {
        value,
        status,
        dim: a.dim(),
        rank: red.rank,
        min_pivot: red.min_pivot,
        precision_bits: 53,
        converged: true,
    })
}

fn check_definite<R: Real>(red: &PivotedCholesky<R>, tol: f64) -> Result<()> {
    if red.residual > tol {
        return Err(Error::IndefiniteDenominator {
            pivot: -red.residual * red.scale.max(1e-300),
            scale: red.scale,
        });
    }
    Ok(())
}

/// Minimum eigenvalue of the reduced pencil `Tᵀ A T` against `diag(I_r, 0)`.
fn finish(at: &SymMatrix<impl Real>, r: usize) -> Result<(f64, PencilStatus)> {
    let m = at.dim();
    let af = at.map(Real::to_f64);
    if !af.is_finite() {
        return Err(Error::Invalid("reduced pencil overflowed double precision".into()));
    }
    let scale = af.max_abs().max(1e-300);
    let ztol = 1e-10 * scale;
    if r == m {
        return Ok((min_eig(&af)?, PencilStatus::Finite));
    }
    if r == 0 {
        let lo = min_eig(&af)?;
        return Ok(if lo >= -ztol {
            (f64::INFINITY, PencilStatus::Unbounded)
        } else {
            (f64::NEG_INFINITY, PencilStatus::Infeasible)
        });
    }
    let k = m - r;
    let a22 = SymMatrix::from_lower_fn(k, |i, j| *af.get(r + i, r + j));
    let e22 = sym_eig(&a22, true)?;
    let v = e22.vectors.expect("requested");
    if e22.values[0] < -ztol {
        return Ok((f64::NEG_INFINITY, PencilStatus::Infeasible));
    }
    let a12 = DMatrix::from_fn(r, k, |i, j| *af.get(i, r + j));
    let w = &a12 * &v;
    let mut c = DMatrix::from_fn(r, r, |i, j| *af.get(i, j));
    for (t, &lam) in e22.values.iter().enumerate() {
        let col = w.column(t);
        if lam <= ztol {
            if col.norm() > (ztol * scale).sqrt() {
                return Ok((f64::NEG_INFINITY, PencilStatus::Infeasible));
            }
            continue;
        }
        c -= (col * col.transpose()) / lam;
    }
    let lam = min_eig(&SymMatrix::from_dense(&c))?;
    Ok((lam, PencilStatus::Finite))
}

/// Settings for [`gen_eig_min_exact`].
#[derive(Clone, Debug)]
pub struct PrecisionPolicy {
    pub start_bits: usize,
    pub max_bits: usize,
    /// Relative agreement required between consecutive precision levels.
    pub agreement: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            start_bits: 128,
            max_bits: 4096,
            agreement: 1e-11,
        }
    }
}

/// Pencil solve on exactly known matrices, in adaptive multiprecision.
///
/// Precision doubles until two consecutive levels report the same rank and
/// values agreeing to `policy.agreement`.
pub fn gen_eig_min_exact<V: Field>(
    a: &SymMatrix<V>,
    b: &SymMatrix<V>,
    policy: &PrecisionPolicy,
) -> Result<GenEig> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut prec = policy.start_bits;
    let mut prev: Option<GenEig> = None;
    loop {
        let cur = gen_eig_min_at(a, b, prec)?;
        if let Some(p) = &prev {
            let same = p.rank == cur.rank
                && p.status == cur.status
                && (p.value == cur.value
                    || (p.value - cur.value).abs()
                        <= policy.agreement * cur.value.abs().max(1.0));
            if same {
                return Ok(cur);
            }
        }
        if prec * 2 > policy.max_bits {
            log::warn!(
                "pencil of size {} did not stabilize below {} bits",
                a.dim(),
                policy.max_bits
            );
            return Ok(GenEig {
                converged: false,
                ..cur
            });
        }
        prev = Some(cur);
        prec *= 2;
    }
}

/// One multiprecision reduction at `prec` bits.
pub fn gen_eig_min_at<V: Field>(a: &SymMatrix<V>, b: &SymMatrix<V>, prec: usize) -> Result<GenEig> {
    let am = a.map(|v| v.to_mp(prec));
    let bm = b.map(|v| v.to_mp(prec));
    let tol = (-(prec as f64) / 2.0).exp2();
    let red = PivotedCholesky::<Mp>::factor(&bm, tol, prec);
    check_definite(&red, tol.sqrt())?;
    let at = red.transform(&am);
    let (mut value, status) = finish(&at, red.rank)?;
    if red.rank == a.dim() && a.dim() > 0 {
        value = refine_by_inverse_pencil(&am, &bm, &at, value, prec);
    }
    Ok(GenEig {
        value,
        status,
        dim: a.dim(),
        rank: red.rank,
        min_pivot: red.min_pivot,
        precision_bits: prec,
        converged: true,
    })
}

/// Sharpens `estimate ≈ min eig(at)` when `at` has a wide spectrum.
///
/// With `s` below the answer, `A − sB` is positive definite and
/// `1/(a* − s)` is the largest eigenvalue of `(B, A − sB)`; a largest
/// eigenvalue is computed to full relative accuracy in double precision.
fn refine_by_inverse_pencil(
    am: &SymMatrix<Mp>,
    bm: &SymMatrix<Mp>,
    at: &SymMatrix<Mp>,
    estimate: f64,
    prec: usize,
) -> f64 {
    let m = am.dim();
    let spread = at.map(Real::to_f64).max_abs();
    let err = 4.0 * m as f64 * f64::EPSILON * spread;
    if err <= 1e-15 * (1.0 + estimate.abs()) {
        return estimate;
    }
    let tol = (-(prec as f64) / 2.0).exp2();
    let mut delta = (4.0 * err).max(1e-8 * (1.0 + estimate.abs()));
    for _ in 0..12 {
        let s = estimate - delta;
        let sm = <Mp as Real>::from_f64(s, prec);
        let c = SymMatrix::from_lower_fn(m, |i, j| am.get(i, j).sub(&sm.mul(bm.get(i, j))));
        let red = PivotedCholesky::<Mp>::factor(&c, tol, prec);
        if red.rank == m {
            let bt = red.transform(bm).map(Real::to_f64);
            if let Ok(e) = sym_eig(&bt, false) {
                let mu = e.values[m - 1];
                if mu > 0.0 {
                    return s + 1.0 / mu;
                }
            }
        }
        delta *= 16.0;
    }
    log::warn!("inverse-pencil refinement failed; keeping estimate {estimate}");
    estimate
}

/// Matrices brought to a common frame by a congruence normalizing a reference.
#[derive(Clone, Debug)]
pub struct Congruent {
    /// `Tᵀ M T` for each input, rounded to double.
    pub mats: Vec<SymMatrix<f64>>,
    /// Rank of the reference; `Tᵀ R T = diag(I_rank, ~0)`.
    pub rank: usize,
    pub min_pivot: f64,
}

/// Applies the pivoted-Cholesky congruence of `reference` to `mats` at `prec` bits.
///
/// `T` is invertible regardless of the reference's rank, so PSD constraints
/// keep their feasible sets.
pub fn congruence_to_f64<V: Field>(
    reference: &SymMatrix<V>,
    mats: &[&SymMatrix<V>],
    prec: usize,
) -> Result<Congruent> {
    let rm = reference.map(|v| v.to_mp(prec));
    let tol = (-(prec as f64) / 2.0).exp2();
    let red = PivotedCholesky::<Mp>::factor(&rm, tol, prec);
    let mats = mats
        .iter()
        .map(|m| {
            if m.dim() != reference.dim() {
                return Err(Error::DimensionMismatch {
                    expected: reference.dim(),
                    found: m.dim(),
                });
            }
            let t = red.transform(&m.map(|v| v.to_mp(prec)));
            Ok(t.map(Real::to_f64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Congruent {
        mats,
        rank: red.rank,
        min_pivot: red.min_pivot,
    })
}

/// True when pivoted Cholesky of `m` leaves no indefinite remainder above `tol`,
/// relative to the largest diagonal entry.
pub fn is_psd(m: &SymMatrix<f64>, tol: f64) -> bool {
    let red = PivotedCholesky::<f64>::factor(m, tol, 0);
    if red.scale <= 0.0 {
        return (0..m.dim()).all(|i| *m.get(i, i) >= 0.0) && m.max_abs() == 0.0;
    }
    red.residual <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use dashu_ratio::RBig;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_pcg::Pcg64;

    fn random_pd(rng: &mut Pcg64, n: usize, shift: f64) -> SymMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let m = &g * g.transpose() + DMatrix::identity(n, n) * shift;
        SymMatrix::from_dense(&m)
    }

    fn random_sym(rng: &mut Pcg64, n: usize) -> SymMatrix<f64> {
        SymMatrix::from_lower_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn eig_examples() {
        assert_eq!(sym_eig(&SymMatrix::identity(3), false).unwrap().values, vec![1.0; 3]);
        let v = sym_eig(&SymMatrix::diag(&[3.0, 1.0, 2.0]), false).unwrap().values;
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
        let v = sym_eig(&SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]), false)
            .unwrap()
            .values;
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eig_residuals_are_small() {
        let mut rng = Pcg64::seed_from_u64(7);
        for n in [1, 2, 5, 20] {
            let m = random_sym(&mut rng, n);
            let e = sym_eig(&m, true).unwrap();
            let d = m.to_dense();
            let v = e.vectors.unwrap();
            let norm = d.norm();
            for k in 0..n {
                let col = v.column(k);
                let res = (&d * col - col * e.values[k]).norm();
                assert!(res <= 1e-10 * norm.max(1.0));
            }
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn cholesky_examples() {
        match cholesky(&SymMatrix::identity(3), 1e-12) {
            CholeskyReport::Full { factor } => assert_eq!(factor, DMatrix::identity(3, 3)),
            _ => panic!("identity is PD"),
        }
        match cholesky(&SymMatrix::diag(&[1.0, 0.0]), 1e-12) {
            CholeskyReport::Deficient { rank, range } => {
                assert_eq!(rank, 1);
                assert_eq!(range.column(0).as_slice(), &[1.0, 0.0]);
            }
            _ => panic!("rank one"),
        }
        let m = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 2.0]]);
        match cholesky(&m, 1e-12) {
            CholeskyReport::Full { factor } => {
                let expect = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]);
                assert!((factor - expect).norm() < 1e-14);
            }
            _ => panic!("PD"),
        }
    }

    #[test]
    fn deficient_range_reproduces_matrix() {
        let mut rng = Pcg64::seed_from_u64(3);
        let g = DMatrix::from_fn(6, 3, |_, _| rng.random_range(-1.0..1.0));
        let m = SymMatrix::from_dense(&(&g * g.transpose()));
        match cholesky(&m, 1e-12) {
            CholeskyReport::Deficient { rank, range } => {
                assert_eq!(rank, 3);
                assert!((&range * range.transpose() - m.to_dense()).norm() < 1e-12);
            }
            _ => panic!("rank three"),
        }
    }

    #[test]
    fn pencil_examples() {
        let i3 = SymMatrix::identity(3);
        let p = Pencil {
            a: i3.clone(),
            b: i3,
        };
        assert!((gen_eig_min(&p, DEFAULT_RANK_TOL).unwrap().value - 1.0).abs() < 1e-14);
        let p = Pencil {
            a: SymMatrix::diag(&[2.0, 5.0]),
            b: SymMatrix::diag(&[1.0, 2.0]),
        };
        assert!((gen_eig_min(&p, DEFAULT_RANK_TOL).unwrap().value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pencil_equal_to_itself_is_one() {
        let mut rng = Pcg64::seed_from_u64(11);
        for n in 1..8 {
            let b = random_pd(&mut rng, n, 0.1);
            let p = Pencil { a: b.clone(), b };
            assert!((gen_eig_min(&p, DEFAULT_RANK_TOL).unwrap().value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_deficient_b() {
        // B = diag(1, 0): feasibility needs A22 ≥ 0; value is the Schur complement.
        let b = SymMatrix::diag(&[1.0, 0.0]);
        let a = SymMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]);
        let g = gen_eig_min(&Pencil { a, b: b.clone() }, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(g.rank, 1);
        assert!((g.value - 2.5).abs() < 1e-12);
        let a = SymMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, -1.0]]);
        let g = gen_eig_min(&Pencil { a, b: b.clone() }, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(g.status, PencilStatus::Infeasible);
        let a = SymMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 0.0]]);
        let g = gen_eig_min(&Pencil { a, b }, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(g.status, PencilStatus::Infeasible);
        let zero = SymMatrix::zeros(2);
        let g = gen_eig_min(&Pencil { a: SymMatrix::identity(2), b: zero }, 1e-12).unwrap();
        assert_eq!(g.status, PencilStatus::Unbounded);
        assert_eq!(g.value, f64::INFINITY);
    }

    #[test]
    fn indefinite_b_is_an_error() {
        let b = SymMatrix::diag(&[1.0, -1.0]);
        let r = gen_eig_min(&Pencil { a: SymMatrix::identity(2), b }, DEFAULT_RANK_TOL);
        assert!(matches!(r, Err(Error::IndefiniteDenominator { .. })));
    }

    #[test]
    fn exact_path_matches_float_path() {
        let mut rng = Pcg64::seed_from_u64(5);
        for n in 1..7 {
            let a = random_sym(&mut rng, n);
            let b = random_pd(&mut rng, n, 0.5);
            let f = gen_eig_min(&Pencil { a: a.clone(), b: b.clone() }, 1e-12).unwrap();
            let e = gen_eig_min_exact(&a, &b, &PrecisionPolicy::default()).unwrap();
            assert!((f.value - e.value).abs() < 1e-10 * f.value.abs().max(1.0));
            assert!(e.converged);
        }
    }

    #[test]
    fn exact_rational_hilbert_pencil() {
        // Hilbert matrices defeat double precision at this size.
        let n = 14;
        let h = SymMatrix::from_lower_fn(n, |i, j| {
            RBig::from(1) / RBig::from((i + j + 1) as i64)
        });
        let a = h.add(&SymMatrix::identity(n).scale(&(RBig::from(3) / RBig::from(7))));
        let e = gen_eig_min_exact(&a, &h, &PrecisionPolicy::default()).unwrap();
        // A = H + cI, so a* = 1 + c / λmax(H).
        let mp = 400;
        let hm = h.map(|v| v.to_mp(mp));
        let lmax = sym_eig(&hm.map(Real::to_f64), false).unwrap().values[n - 1];
        let expect = 1.0 + (3.0 / 7.0) / lmax;
        assert!((e.value - expect).abs() < 1e-9, "{} vs {}", e.value, expect);
        assert_eq!(e.rank, n);
    }

    #[test]
    fn congruence_normalizes_reference() {
        let mut rng = Pcg64::seed_from_u64(9);
        let b = random_pd(&mut rng, 5, 0.2);
        let a = random_sym(&mut rng, 5);
        let c = congruence_to_f64(&b, &[&b, &a], 200).unwrap();
        let eye = SymMatrix::<f64>::identity(5);
        assert!(c.mats[0].sub(&eye).max_abs() < 1e-14);
        let direct = gen_eig_min(&Pencil { a, b }, 1e-12).unwrap().value;
        assert!((min_eig(&c.mats[1]).unwrap() - direct).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn congruence_and_shift_invariance(seed in 0u64..10_000, n in 1usize..8, t in -3.0f64..3.0) {
            let mut rng = Pcg64::seed_from_u64(seed);
            let a = random_sym(&mut rng, n);
            let b = random_pd(&mut rng, n, 0.3);
            let base = gen_eig_min(&Pencil { a: a.clone(), b: b.clone() }, 1e-12).unwrap().value;
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
            let da = SymMatrix::from_lower_fn(n, |i, j| a.get(i, j) * d[i] * d[j]);
            let db = SymMatrix::from_lower_fn(n, |i, j| b.get(i, j) * d[i] * d[j]);
            let scaled = gen_eig_min(&Pencil { a: da, b: db }, 1e-12).unwrap().value;
            prop_assert!((scaled - base).abs() <= 1e-8 * base.abs().max(1.0));
            let shifted = gen_eig_min(&Pencil { a: a.add(&b.scale(&t)), b: b.clone() }, 1e-12).unwrap().value;
            prop_assert!((shifted - (base + t)).abs() <= 1e-9);
            let eps = 1e-6 * (1.0 + base.abs());
            prop_assert!(is_psd(&a.sub(&b.scale(&(base - eps))), 1e-14));
            prop_assert!(!is_psd(&a.sub(&b.scale(&(base + eps))), 1e-14));
        }
    }
}
