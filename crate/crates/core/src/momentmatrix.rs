//! Moment and localizing matrices over a graded monomial basis.

use std::fmt;

use dashu_ratio::RBig;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::moments::{MomentOracle, MomentTable, MomentValue};
use crate::poly::MultiPoly;
use crate::scalar::{Coefficient, Field};

/// Exponents of total degree at most `order`, graded-lex ordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    mvars: usize,
    order: u32,
    exps: Vec<Vec<u32>>,
}

/// Basis of all monomials of total degree `≤ d` in `mvars` variables.
///
/// Lower degrees come first; within a degree, larger leading exponents come
/// first, so `make_basis(2, 1)` is `[(0,0), (1,0), (0,1)]`.
pub fn make_basis(mvars: usize, d: u32) -> Basis {
    let mut exps = Vec::new();
    let mut cur = vec![0u32; mvars];
    for deg in 0..=d {
        compositions(&mut cur, 0, deg, &mut exps);
    }
    Basis {
        mvars,
        order: d,
        exps,
    }
}

fn compositions(cur: &mut Vec<u32>, k: usize, rest: u32, out: &mut Vec<Vec<u32>>) {
    if k + 1 == cur.len() {
        cur[k] = rest;
        out.push(cur.clone());
        cur[k] = 0;
        return;
    }
    if cur.is_empty() {
        if rest == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=rest).rev() {
        cur[k] = e;
        compositions(cur, k + 1, rest - e, out);
    }
    cur[k] = 0;
}

impl Basis {
    pub fn mvars(&self) -> usize {
        self.mvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exps
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.exps[i]
    }
}

/// Dense symmetric matrix stored as its packed lower triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl<T: Clone> SymMatrix<T> {
    pub fn filled(dim: usize, v: T) -> Self {
        SymMatrix {
            dim,
            data: vec![v; dim * (dim + 1) / 2],
        }
    }

    /// Builds from `f(i, j)` evaluated for `j ≤ i`.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                data.push(f(i, j));
            }
        }
        SymMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[packed(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[packed(i, j)] = v;
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> SymMatrix<U> {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Leading principal submatrix of size `k`.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k <= self.dim);
        SymMatrix {
            dim: k,
            data: self.data[..k * (k + 1) / 2].to_vec(),
        }
    }

    /// Principal submatrix on the given index list.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_lower_fn(idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }
}

impl<T: Coefficient> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self::filled(dim, T::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_lower_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn to_f64(&self) -> SymMatrix<f64> {
        self.map(Coefficient::to_f64)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub_ref(b)).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|a| a.mul_ref(s))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Coefficient::is_zero)
    }
}

impl SymMatrix<f64> {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        Self::from_lower_fn(rows.len(), |i, j| 0.5 * (rows[i][j] + rows[j][i]))
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_lower_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| *self.get(i, j))
    }

    /// Symmetrizes a dense matrix.
    pub fn from_dense(m: &nalgebra::DMatrix<f64>) -> Self {
        Self::from_lower_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Whitespace-separated rows, for debugging.
impl<T: Coefficient> fmt::Display for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| self.get(i, j).fmt_coef()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Anything that can supply moments `y_alpha`.
pub trait MomentSource<V> {
    fn nvars(&self) -> usize;
    fn moment(&self, exps: &[u32]) -> Result<V>;
}

/// Base-measure moments straight from the closed-form oracle.
#[derive(Clone, Copy, Debug)]
pub struct OracleSource {
    pub oracle: MomentOracle,
}

impl<V: Field> MomentSource<V> for OracleSource {
    fn nvars(&self) -> usize {
        self.oracle.n()
    }
    fn moment(&self, exps: &[u32]) -> Result<V> {
        Ok(V::from_rbig(&self.oracle.exact_moment(exps)))
    }
}

impl<V: MomentValue> MomentSource<V> for MomentTable<V> {
    fn nvars(&self) -> usize {
        self.mvars()
    }
    fn moment(&self, exps: &[u32]) -> Result<V> {
        self.get(exps).cloned().ok_or_else(|| Error::TableTooShallow {
            degree: exps.iter().sum(),
            depth: self.depth(),
        })
    }
}

/// A finite sequence `y_alpha` given explicitly, e.g. symbolic test data.
#[derive(Clone, Debug, Default)]
pub struct ExplicitSource<V> {
    pub nvars: usize,
    pub values: FxHashMap<Vec<u32>, V>,
}

impl<V: Clone> MomentSource<V> for ExplicitSource<V> {
    fn nvars(&self) -> usize {
        self.nvars
    }
    fn moment(&self, exps: &[u32]) -> Result<V> {
        self.values
            .get(exps)
            .cloned()
            .ok_or_else(|| Error::TableTooShallow {
                degree: exps.iter().sum(),
                depth: 0,
            })
    }
}

fn check_source<V, S: MomentSource<V> + ?Sized>(src: &S, nvars: usize) -> Result<()> {
    if src.nvars() != nvars {
        return Err(Error::DimensionMismatch {
            expected: src.nvars(),
            found: nvars,
        });
    }
    Ok(())
}

/// `M_d(y)(i, j) = y_{b_i + b_j}`.
pub fn moment_matrix<V: Field, S: MomentSource<V> + ?Sized>(
    src: &S,
    basis: &Basis,
) -> Result<SymMatrix<V>> {
    localizing_matrix(&MultiPoly::one(basis.mvars()), src, basis)
}

/// `M_d(q y)(i, j) = Σ_γ q_γ y_{γ + b_i + b_j}`.
pub fn localizing_matrix<V: Field, S: MomentSource<V> + ?Sized>(
    q: &MultiPoly<V>,
    src: &S,
    basis: &Basis,
) -> Result<SymMatrix<V>> {
    check_source(src, basis.mvars())?;
    check_source(src, q.nvars())?;
    let m = basis.mvars();
    let terms: Vec<(Vec<u32>, V)> = q
        .sorted_terms()
        .into_iter()
        .map(|(e, c)| (e, c.clone()))
        .collect();
    // Entries depend only on b_i + b_j.
    let mut memo: FxHashMap<Vec<u32>, V> = FxHashMap::default();
    let mut key = vec![0u32; m];
    let mut shifted = vec![0u32; m];
    let mut out = Vec::with_capacity(basis.len() * (basis.len() + 1) / 2);
    for i in 0..basis.len() {
        for j in 0..=i {
            for k in 0..m {
                key[k] = basis.exps[i][k] + basis.exps[j][k];
            }
            if let Some(v) = memo.get(&key) {
                out.push(v.clone());
                continue;
            }
            let mut acc = V::zero();
            for (g, c) in &terms {
                for k in 0..m {
                    shifted[k] = g[k] + key[k];
                }
                acc.add_mul_assign(c, &src.moment(&shifted)?);
            }
            memo.insert(key.clone(), acc.clone());
            out.push(acc);
        }
    }
    Ok(SymMatrix {
        dim: basis.len(),
        data: out,
    })
}

/// The image-variable monomial `u^e` as an exact polynomial in `mvars` variables.
pub fn image_monomial(mvars: usize, exps: &[u32]) -> MultiPoly<RBig> {
    debug_assert_eq!(exps.len(), mvars);
    MultiPoly::monomial(exps, RBig::ONE).expect("small exponent")
}
