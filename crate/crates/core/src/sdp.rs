//! Dense primal-dual interior-point solver for small block LMI problems,
//! and builders for the sum-of-fractions hierarchies.
//!
//! Problems are stated as `maximize cᵀx  s.t.  F0 + Σ x_j F_j ⪰ 0` per block.
//! Internally this is the dual of the standard form
//! `min ⟨C,X⟩ s.t. ⟨A_j,X⟩ = b_j, X ⪰ 0` with `C = F0`, `A_j = −F_j`, `b = c`.

use std::io::Write;

use dashu_ratio::RBig;
use nalgebra::{Cholesky, DMatrix, DVector};

use crate::eigsolve::{congruence_to_f64, min_eig, sym_eig};
use crate::error::{Error, Result};
use crate::moments::{MomentTable, MomentValue};
use crate::momentmatrix::{localizing_matrix, make_basis, MomentSource, SymMatrix};
use crate::poly::MultiPoly;
use crate::scalar::Field;

/// One constraint `F0 + Σ x_j F_j ⪰ 0`; `coeffs` lists only the variables present.
#[derive(Clone, Debug)]
pub struct LmiBlock<T> {
    pub f0: SymMatrix<T>,
    pub coeffs: Vec<(usize, SymMatrix<T>)>,
}

/// `maximize objective·x` subject to every block being PSD.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub nvars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

impl SdpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::Unbounded => "unbounded",
            SdpStatus::MaxIter => "maxiter",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<f64>,
    /// `objective·x` at the returned point.
    pub objective: f64,
    /// Relative primal-dual objective gap.
    pub gap: f64,
    /// Largest LMI violation `max(0, −λmin(F(x)))`, relative to block scale.
    pub primal_residual: f64,
    pub iterations: usize,
}

/// Non-improving iterations tolerated before a near-optimal point is accepted.
const STALL_ITERATIONS: usize = 5;

#[derive(Clone, Debug)]
pub struct SdpOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Largest admissible block dimension.
    pub max_dim: usize,
    /// Largest admissible number of variables.
    pub max_vars: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            gap_tol: 1e-7,
            feas_tol: 1e-8,
            max_iter: 200,
            max_dim: 500,
            max_vars: 500,
        }
    }
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: self.objective.len(),
            });
        }
        for b in &self.blocks {
            for (j, f) in &b.coeffs {
                if *j >= self.nvars {
                    return Err(Error::Invalid(format!("variable index {j} out of range")));
                }
                if f.dim() != b.f0.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: b.f0.dim(),
                        found: f.dim(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `F0 + Σ x_j F_j` for block `k`.
    pub fn block_at(&self, k: usize, x: &[f64]) -> SymMatrix<f64> {
        let b = &self.blocks[k];
        let mut m = b.f0.clone();
        for (j, f) in &b.coeffs {
            m = m.add(&f.scale(&x[*j]));
        }
        m
    }

    /// Largest relative PSD violation over all blocks at `x`.
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..self.blocks.len() {
            let m = self.block_at(k, x);
            let scale = m.max_abs().max(1.0);
            worst = worst.max((-min_eig(&m)?).max(0.0) / scale);
        }
        Ok(worst)
    }

    /// Writes the problem in SDPA sparse format.
    ///
    /// SDPA minimizes `c'ᵀx` s.t. `Σ x_j F'_j − F'_0 ⪰ 0`, so the file holds
    /// `c' = −c`, `F'_0 = −F0` and `F'_j = F_j`.
    pub fn write_sdpa(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "\"pfmin LMI: {} variables, {} blocks\"", self.nvars, self.blocks.len())?;
        writeln!(w, "{}", self.nvars)?;
        writeln!(w, "{}", self.blocks.len())?;
        let dims: Vec<String> = self.blocks.iter().map(|b| b.f0.dim().to_string()).collect();
        writeln!(w, "{}", dims.join(" "))?;
        let c: Vec<String> = self.objective.iter().map(|v| format!("{:?}", -v)).collect();
        writeln!(w, "{}", c.join(" "))?;
        for (k, b) in self.blocks.iter().enumerate() {
            write_sparse(w, 0, k + 1, &b.f0, -1.0)?;
            for (j, f) in &b.coeffs {
                write_sparse(w, j + 1, k + 1, f, 1.0)?;
            }
        }
        Ok(())
    }
}

fn write_sparse(
    w: &mut impl Write,
    mat: usize,
    block: usize,
    m: &SymMatrix<f64>,
    sign: f64,
) -> Result<()> {
    for i in 0..m.dim() {
        for j in i..m.dim() {
            let v = *m.get(i, j);
            if v != 0.0 {
                writeln!(w, "{mat} {block} {} {} {:?}", i + 1, j + 1, sign * v)?;
            }
        }
    }
    Ok(())
}

/// Dense symmetric-part inner product `tr(A P)` for symmetric `A`.
fn dot(a: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    a.component_mul(p).sum()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α` with `X + α ΔX ⪰ 0`, capped at `cap`.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>, cap: f64) -> f64 {
    let Some(ch) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let l = ch.l();
    let Some(linv) = l.clone().try_inverse() else {
        return 0.0;
    };
    let m = &linv * dx * linv.transpose();
    let lam = min_eig(&SymMatrix::from_dense(&m)).unwrap_or(f64::NEG_INFINITY);
    if lam >= 0.0 {
        cap
    } else {
        (-1.0 / lam).min(cap)
    }
}

struct Block {
    c: DMatrix<f64>,
    /// `(j, A_j)` with `A_j = −F_j / scale_j`.
    a: Vec<(usize, DMatrix<f64>)>,
}

/// Solves `maximize cᵀx s.t. F0 + Σ x_j F_j ⪰ 0` by an infeasible-start
/// primal-dual path-following method with HKM search directions and
/// Mehrotra predictor-corrector steps.
///
/// Variables whose coefficient matrices are linearly dependent on others
/// are fixed at zero first; this leaves the set of reachable `F(x)` unchanged.
pub fn sdp_solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let keep = independent_variables(p);
    if keep.len() == p.nvars {
        return solve_full(p, opts);
    }
    log::debug!("sdp: {} of {} variables are dependent", p.nvars - keep.len(), p.nvars);
    let mut index = vec![usize::MAX; p.nvars];
    for (new, &old) in keep.iter().enumerate() {
        index[old] = new;
    }
    let reduced = SdpProblem {
        nvars: keep.len(),
        objective: keep.iter().map(|&j| p.objective[j]).collect(),
        blocks: p
            .blocks
            .iter()
            .map(|b| LmiBlock {
                f0: b.f0.clone(),
                coeffs: b
                    .coeffs
                    .iter()
                    .filter(|(j, _)| index[*j] != usize::MAX)
                    .map(|(j, f)| (index[*j], f.clone()))
                    .collect(),
            })
            .collect(),
    };
    let sol = solve_full(&reduced, opts)?;
    let mut x = vec![0.0; p.nvars];
    for (new, &old) in keep.iter().enumerate() {
        x[old] = sol.x[new];
    }
    Ok(SdpSolution {
        primal_residual: p.violation(&x)?,
        x,
        ..sol
    })
}

/// Relative residual below which a variable counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-6;

/// A maximal set of variables with linearly independent coefficient
/// matrices, chosen greedily by modified Gram–Schmidt; variables with a
/// nonzero objective coefficient are taken first.
fn independent_variables(p: &SdpProblem) -> Vec<usize> {
    let offsets: Vec<usize> = p
        .blocks
        .iter()
        .scan(0, |acc, b| {
            let o = *acc;
            *acc += b.f0.dim() * (b.f0.dim() + 1) / 2;
            Some(o)
        })
        .collect();
    let len = p.blocks.iter().map(|b| b.f0.dim() * (b.f0.dim() + 1) / 2).sum::<usize>();
    // Columns are trace-inner-product isometric vectorizations.
    let mut cols = vec![vec![0.0f64; len]; p.nvars];
    for (b, &off) in p.blocks.iter().zip(&offsets) {
        for (j, f) in &b.coeffs {
            let mut k = off;
            for r in 0..f.dim() {
                for c in 0..=r {
                    let w = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
                    cols[*j][k] = w * f.get(r, c);
                    k += 1;
                }
            }
        }
    }
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    for (c, &n) in cols.iter_mut().zip(&norms) {
        if n > 0.0 {
            c.iter_mut().for_each(|v| *v /= n);
        }
    }
    let mut remaining: Vec<usize> = (0..p.nvars).filter(|&j| norms[j] > 0.0).collect();
    let mut keep = Vec::new();
    let mut residual: Vec<f64> = (0..p.nvars).map(|j| if norms[j] > 0.0 { 1.0 } else { 0.0 }).collect();
    while !remaining.is_empty() {
        let pick = remaining
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let pa = (p.objective[a] != 0.0, residual[a]);
                let pb = (p.objective[b] != 0.0, residual[b]);
                pa.partial_cmp(&pb).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty");
        if residual[pick] <= DEPENDENCE_TOL {
            if p.objective[pick] == 0.0 {
                break;
            }
            keep.push(pick);
            remaining.retain(|&j| j != pick);
            continue;
        }
        let q: Vec<f64> = {
            let n = cols[pick].iter().map(|v| v * v).sum::<f64>().sqrt();
            cols[pick].iter().map(|v| v / n).collect()
        };
        keep.push(pick);
        remaining.retain(|&j| j != pick);
        for &j in &remaining {
            let dot: f64 = cols[j].iter().zip(&q).map(|(a, b)| a * b).sum();
            cols[j].iter_mut().zip(&q).for_each(|(a, b)| *a -= dot * b);
            residual[j] = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        }
    }
    keep.sort_unstable();
    keep
}

fn solve_full(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    if let Some(b) = p.blocks.iter().find(|b| b.f0.dim() > opts.max_dim) {
        return Err(Error::SizeCap {
            what: "SDP block dimension",
            size: b.f0.dim(),
            cap: opts.max_dim,
        });
    }
    if p.nvars > opts.max_vars {
        return Err(Error::SizeCap {
            what: "SDP variables",
            size: p.nvars,
            cap: opts.max_vars,
        });
    }
    let m = p.nvars;
    // Variable scaling: each column of coefficient matrices gets unit norm.
    let mut vscale = vec![0.0f64; m];
    for b in &p.blocks {
        for (j, f) in &b.coeffs {
            vscale[*j] = vscale[*j].max(f.frobenius());
        }
    }
    for s in vscale.iter_mut() {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let blocks: Vec<Block> = p
        .blocks
        .iter()
        .map(|b| Block {
            c: b.f0.to_dense(),
            a: b
                .coeffs
                .iter()
                .map(|(j, f)| (*j, f.to_dense() * (-1.0 / vscale[*j])))
                .collect(),
        })
        .collect();
    let bvec = DVector::from_iterator(m, (0..m).map(|j| p.objective[j] / vscale[j]));
    let ntot: usize = blocks.iter().map(|b| b.c.nrows()).sum();
    let bnorm = bvec.norm();
    let cnorm = blocks.iter().map(|b| b.c.norm_squared()).sum::<f64>().sqrt();
    let anorm = blocks
        .iter()
        .flat_map(|b| b.a.iter().map(|(_, a)| a.norm()))
        .fold(0.0f64, f64::max);

    let nroot = (ntot as f64).sqrt();
    let xi = 10.0f64.max(nroot * (1.0 + bvec.amax()) / (1.0 + anorm));
    let eta = 10.0f64.max(nroot).max(cnorm).max(anorm);
    let mut xs: Vec<DMatrix<f64>> = blocks
        .iter()
        .map(|b| DMatrix::identity(b.c.nrows(), b.c.nrows()) * xi)
        .collect();
    let mut ss: Vec<DMatrix<f64>> = blocks
        .iter()
        .map(|b| DMatrix::identity(b.c.nrows(), b.c.nrows()) * eta)
        .collect();
    let mut y = DVector::<f64>::zeros(m);

    let apply_a = |ps: &[DMatrix<f64>]| -> DVector<f64> {
        let mut out = DVector::zeros(m);
        for (b, pk) in blocks.iter().zip(ps) {
            for (j, a) in &b.a {
                out[*j] += dot(a, pk);
            }
        }
        out
    };
    let apply_at = |v: &DVector<f64>| -> Vec<DMatrix<f64>> {
        blocks
            .iter()
            .map(|b| {
                let n = b.c.nrows();
                let mut acc = DMatrix::zeros(n, n);
                for (j, a) in &b.a {
                    acc += a * v[*j];
                }
                acc
            })
            .collect()
    };

    let mut status = SdpStatus::MaxIter;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    // Iterations since the gap last shrank by 10%.
    let mut stalled = 0usize;
    let mut best_gap = f64::INFINITY;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let aty = apply_at(&y);
        let rd: Vec<DMatrix<f64>> = blocks
            .iter()
            .zip(&ss)
            .zip(&aty)
            .map(|((b, s), at)| &b.c - s - at)
            .collect();
        let ax = apply_a(&xs);
        let rp = &bvec - &ax;
        let pobj: f64 = blocks.iter().zip(&xs).map(|(b, x)| dot(&b.c, x)).sum();
        let dobj = bvec.dot(&y);
        let xs_dot: f64 = xs.iter().zip(&ss).map(|(x, s)| dot(x, s)).sum();
        let mu = xs_dot / ntot as f64;
        // Complementarity gap. The objective difference also carries the
        // residual terms, which roundoff keeps at |y|·‖r_p‖ once X·S vanishes.
        gap = xs_dot.max(0.0) / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.norm() / (1.0 + bnorm);
        let dinf = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + cnorm);
        log::trace!("sdp it {it}: pobj {pobj:.10e} dobj {dobj:.10e} gap {gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e} |y| {:.2e} |X| {:.2e}", y.amax(), xs.iter().map(|x| x.amax()).fold(0.0, f64::max));
        if gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = SdpStatus::Optimal;
            break;
        }
        if gap < 0.9 * best_gap {
            best_gap = gap;
            stalled = 0;
        } else {
            stalled += 1;
        }
        // Roundoff floor: the slack side is feasible, the gap is within a
        // decade of the target and the multiplier residual is stuck within
        // two decades of its target.
        if stalled >= STALL_ITERATIONS
            && gap <= 10.0 * opts.gap_tol
            && dinf <= opts.feas_tol
            && pinf <= 100.0 * opts.feas_tol
        {
            log::debug!("sdp: stalled at gap {gap:.2e}, pinf {pinf:.2e}; accepting");
            status = SdpStatus::Optimal;
            break;
        }
        let ynorm = y.amax();
        let xnorm = xs.iter().map(|x| x.amax()).fold(0.0, f64::max);
        if dinf <= opts.feas_tol.sqrt() && ynorm > 1e12 && dobj > 1e10 * (1.0 + pobj.abs().min(1e300)) {
            status = SdpStatus::Unbounded;
            break;
        }
        if pinf <= opts.feas_tol.sqrt() && xnorm > 1e12 && pobj < -1e10 {
            status = SdpStatus::Infeasible;
            break;
        }

        let mut sinv = Vec::with_capacity(blocks.len());
        for s in &ss {
            match Cholesky::new(s.clone()) {
                Some(ch) => sinv.push(ch.inverse()),
                None => {
                    log::debug!("sdp: slack lost definiteness at iteration {it}");
                    return finish(p, &y, &vscale, SdpStatus::MaxIter, gap, iterations);
                }
            }
        }
        // Schur complement M_ij = Σ_k tr(A_ik X_k A_jk S_k⁻¹).
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for ((b, x), si) in blocks.iter().zip(&xs).zip(&sinv) {
            for (j, aj) in &b.a {
                let g = x * aj * si;
                for (i, ai) in &b.a {
                    schur[(*i, *j)] += dot(ai, &g);
                }
            }
        }
        let schur = sym(schur);
        let Some(solver) = SchurSolver::new(schur) else {
            log::debug!("sdp: singular Schur complement at iteration {it}");
            return finish(p, &y, &vscale, SdpStatus::MaxIter, gap, iterations);
        };
        let x_rd_sinv: Vec<DMatrix<f64>> = xs
            .iter()
            .zip(&rd)
            .zip(&sinv)
            .map(|((x, r), si)| x * r * si)
            .collect();
        let a_x_rd_sinv = apply_a(&x_rd_sinv);
        let a_sinv = apply_a(&sinv);

        let direction = |sigma_mu: f64,
                         corr: Option<&[DMatrix<f64>]>|
         -> (DVector<f64>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
            let mut rhs = &bvec - &a_sinv * sigma_mu + &a_x_rd_sinv;
            let qsinv: Option<Vec<DMatrix<f64>>> =
                corr.map(|q| q.iter().zip(&sinv).map(|(q, si)| q * si).collect());
            if let Some(qs) = &qsinv {
                rhs += apply_a(qs);
            }
            let dy = solver.solve(&rhs);
            let atdy = apply_at(&dy);
            let ds: Vec<DMatrix<f64>> = rd.iter().zip(&atdy).map(|(r, a)| r - a).collect();
            let dx: Vec<DMatrix<f64>> = (0..blocks.len())
                .map(|k| {
                    let mut d = &sinv[k] * sigma_mu - &xs[k] - &xs[k] * &ds[k] * &sinv[k];
                    if let Some(qs) = &qsinv {
                        d -= &qs[k];
                    }
                    sym(d)
                })
                .collect();
            (dy, dx, ds)
        };

        let (_, dxa, dsa) = direction(0.0, None);
        let ap = xs.iter().zip(&dxa).map(|(x, d)| max_step(x, d, 1.0)).fold(1.0, f64::min);
        let ad = ss.iter().zip(&dsa).map(|(s, d)| max_step(s, d, 1.0)).fold(1.0, f64::min);
        let mu_aff: f64 = (0..blocks.len())
            .map(|k| dot(&(&xs[k] + &dxa[k] * ap), &(&ss[k] + &dsa[k] * ad)))
            .sum::<f64>()
            / ntot as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let q: Vec<DMatrix<f64>> = dxa.iter().zip(&dsa).map(|(a, b)| a * b).collect();
        let (dy, dx, ds) = direction(sigma * mu, Some(&q));
        let gamma = 0.98;
        let ap = xs
            .iter()
            .zip(&dx)
            .map(|(x, d)| max_step(x, d, 1.0 / gamma))
            .fold(1.0 / gamma, f64::min)
            * gamma;
        let ad = ss
            .iter()
            .zip(&ds)
            .map(|(s, d)| max_step(s, d, 1.0 / gamma))
            .fold(1.0 / gamma, f64::min)
            * gamma;
        let ap = ap.min(1.0);
        let ad = ad.min(1.0);
        for k in 0..blocks.len() {
            xs[k] = sym(&xs[k] + &dx[k] * ap);
            ss[k] = sym(&ss[k] + &ds[k] * ad);
        }
        y += dy * ad;
    }
    finish(p, &y, &vscale, status, gap, iterations)
}

fn finish(
    p: &SdpProblem,
    y: &DVector<f64>,
    vscale: &[f64],
    status: SdpStatus,
    gap: f64,
    iterations: usize,
) -> Result<SdpSolution> {
    let x: Vec<f64> = y.iter().zip(vscale).map(|(v, s)| v / s).collect();
    let objective = x.iter().zip(&p.objective).map(|(a, b)| a * b).sum();
    let primal_residual = p.violation(&x)?;
    Ok(SdpSolution {
        status,
        x,
        objective,
        gap,
        primal_residual,
        iterations,
    })
}

/// Solver for the (positive definite in theory) Schur system.
struct SchurSolver {
    m: DMatrix<f64>,
    factor: SchurFactor,
}

enum SchurFactor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurSolver {
    /// Dependent variables make `m` singular; small diagonal shifts are
    /// tried before falling back to LU.
    fn new(m: DMatrix<f64>) -> Option<Self> {
        let factor = Self::factor(&m)?;
        Some(SchurSolver { m, factor })
    }

    fn factor(m: &DMatrix<f64>) -> Option<SchurFactor> {
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(SchurFactor::Chol(c));
        }
        let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
        for rel in [1e-14, 1e-12, 1e-10] {
            let shifted = m + DMatrix::identity(m.nrows(), m.ncols()) * (rel * scale);
            if let Some(c) = Cholesky::new(shifted) {
                return Some(SchurFactor::Chol(c));
            }
        }
        let lu = m.clone().lu();
        lu.is_invertible().then_some(SchurFactor::Lu(lu))
    }

    fn solve_once(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.factor {
            SchurFactor::Chol(c) => c.solve(rhs),
            SchurFactor::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
        }
    }

    /// Solve with two steps of iterative refinement against the unshifted matrix.
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.solve_once(rhs);
        for _ in 0..2 {
            let r = rhs - &self.m * &x;
            x += self.solve_once(&r);
        }
        x
    }
}

/// Which polynomial multiplies the `h_i` terms in the first constraint of
/// the pushforward sum hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FirstConstraint {
    /// `M_d(h_i v_1 y#)`, mirroring `g_1` in the original-space hierarchy.
    #[default]
    V1,
    /// `M_d(h_i u_1 y#)`, the literal alternative form.
    U1,
}

/// LMI data before rounding: exact blocks plus a reference matrix per block
/// used to precondition by congruence.
#[derive(Clone, Debug)]
pub struct ExactLmi<V> {
    pub nvars: usize,
    pub blocks: Vec<(LmiBlock<V>, SymMatrix<V>)>,
}

impl<V: Field> ExactLmi<V> {
    /// Rounds to double after the congruence that maps each block's
    /// reference matrix to (nearly) the identity.
    pub fn precondition(&self, prec: usize) -> Result<SdpProblem> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (b, reference) in &self.blocks {
            let mut mats: Vec<&SymMatrix<V>> = vec![&b.f0];
            mats.extend(b.coeffs.iter().map(|(_, f)| f));
            let c = congruence_to_f64(reference, &mats, prec)?;
            let dim = reference.dim();
            let mut out = c.mats;
            // Drop the reference's kernel when every matrix vanishes on it.
            if c.rank < dim {
                let tiny = (-(prec as f64) / 4.0).exp2();
                let negligible = out.iter().all(|m| {
                    let scale = m.max_abs().max(f64::MIN_POSITIVE);
                    (c.rank..dim).all(|i| (0..=i).all(|j| m.get(i, j).abs() <= tiny * scale))
                });
                if negligible {
                    out = out.iter().map(|m| m.leading(c.rank)).collect();
                } else {
                    log::debug!("LMI block keeps {} directions outside the reference range", dim - c.rank);
                }
            }
            let mut it = out.into_iter();
            let f0 = it.next().expect("f0");
            let coeffs = b.coeffs.iter().map(|(j, _)| *j).zip(it).collect();
            blocks.push(LmiBlock { f0, coeffs });
        }
        let mut objective = vec![0.0; self.nvars];
        objective[0] = 1.0;
        Ok(SdpProblem {
            nvars: self.nvars,
            objective,
            blocks,
        })
    }

    /// Rounds to double without preconditioning.
    pub fn to_f64(&self) -> SdpProblem {
        let mut objective = vec![0.0; self.nvars];
        objective[0] = 1.0;
        SdpProblem {
            nvars: self.nvars,
            objective,
            blocks: self
                .blocks
                .iter()
                .map(|(b, _)| LmiBlock {
                    f0: b.f0.to_f64(),
                    coeffs: b.coeffs.iter().map(|(j, f)| (*j, f.to_f64())).collect(),
                })
                .collect(),
        }
    }
}

/// Shared assembly for both sum hierarchies, in the variables of `src`.
///
/// Block 0: `M(num_1) − a M(den_1) − Σ_{i≥2} M(h_i w) ⪰ 0`.
/// Block i: `M(num_i) + M(h_i den_i) ⪰ 0`, with `h_i` of degree `≤ s`.
fn build_sum_lmi<V: Field, S: MomentSource<V> + ?Sized>(
    nums: &[MultiPoly<V>],
    dens: &[MultiPoly<V>],
    w: &MultiPoly<V>,
    src: &S,
    d: u32,
    s: u32,
) -> Result<ExactLmi<V>> {
    let nfrac = nums.len();
    if nfrac == 0 || dens.len() != nfrac {
        return Err(Error::Invalid("sum hierarchy needs matching numerators and denominators".into()));
    }
    let mv = src.nvars();
    let basis = make_basis(mv, d);
    let hbasis = make_basis(mv, s);
    let hlen = hbasis.len();
    let nvars = 1 + (nfrac - 1) * hlen;
    let var = |i: usize, k: usize| 1 + (i - 1) * hlen + k;
    let loc = |q: &MultiPoly<V>| localizing_matrix(q, src, &basis);
    let mono = |k: usize| MultiPoly::<V>::monomial(hbasis.get(k), V::one());

    let ref0 = loc(&dens[0])?;
    let mut coeffs0 = vec![(0, ref0.scale(&V::one().neg_ref()))];
    for i in 1..nfrac {
        for k in 0..hlen {
            let q = mono(k)?.checked_mul(w)?;
            coeffs0.push((var(i, k), loc(&q)?.scale(&V::one().neg_ref())));
        }
    }
    let mut blocks = vec![(
        LmiBlock {
            f0: loc(&nums[0])?,
            coeffs: coeffs0,
        },
        ref0,
    )];
    for i in 1..nfrac {
        let mut coeffs = Vec::with_capacity(hlen);
        for k in 0..hlen {
            let q = mono(k)?.checked_mul(&dens[i])?;
            coeffs.push((var(i, k), loc(&q)?));
        }
        blocks.push((
            LmiBlock {
                f0: loc(&nums[i])?,
                coeffs,
            },
            loc(&dens[i])?,
        ));
    }
    Ok(ExactLmi { nvars, blocks })
}

/// Original-space sum hierarchy at orders `(d, s)` over `src` (base-measure moments).
pub fn build_sum_standard_exact<V: Field, S: MomentSource<V> + ?Sized>(
    fractions: &[(MultiPoly<V>, MultiPoly<V>)],
    src: &S,
    d: u32,
    s: u32,
) -> Result<ExactLmi<V>> {
    let nums: Vec<_> = fractions.iter().map(|(f, _)| f.clone()).collect();
    let dens: Vec<_> = fractions.iter().map(|(_, g)| g.clone()).collect();
    let w = dens.first().cloned().ok_or_else(|| Error::Invalid("no fractions".into()))?;
    build_sum_lmi(&nums, &dens, &w, src, d, s)
}

/// Image-space sum hierarchy over a `2N`-variable pushforward table.
pub fn build_sum_pushforward_exact<V: MomentValue>(
    table: &MomentTable<V>,
    d: u32,
    s: u32,
    first: FirstConstraint,
) -> Result<ExactLmi<V>> {
    let mv = table.mvars();
    if !mv.is_multiple_of(2) {
        return Err(Error::Invalid("pushforward sum table needs 2N variables".into()));
    }
    let need = 2 * d + s + 1;
    if table.depth() < need {
        return Err(Error::TableTooShallow {
            degree: need,
            depth: table.depth(),
        });
    }
    let var = |k: usize| MultiPoly::<V>::var(mv, k);
    let nums: Vec<_> = (0..mv / 2).map(|i| var(2 * i)).collect();
    let dens: Vec<_> = (0..mv / 2).map(|i| var(2 * i + 1)).collect();
    let w = match first {
        FirstConstraint::V1 => dens[0].clone(),
        FirstConstraint::U1 => nums[0].clone(),
    };
    build_sum_lmi(&nums, &dens, &w, table, d, s)
}

/// Default working precision for preconditioning congruences.
pub const PRECONDITION_BITS: usize = 256;

/// Original-space sum hierarchy as a preconditioned double-precision SDP.
pub fn build_sum_standard<S: MomentSource<RBig> + ?Sized>(
    fractions: &[(MultiPoly<RBig>, MultiPoly<RBig>)],
    src: &S,
    d: u32,
    s: u32,
) -> Result<SdpProblem> {
    build_sum_standard_exact(fractions, src, d, s)?.precondition(PRECONDITION_BITS)
}

/// Image-space sum hierarchy as a preconditioned double-precision SDP.
pub fn build_sum_pushforward<V: MomentValue>(
    table: &MomentTable<V>,
    d: u32,
    s: u32,
    first: FirstConstraint,
) -> Result<SdpProblem> {
    build_sum_pushforward_exact(table, d, s, first)?.precondition(PRECONDITION_BITS)
}

/// Largest eigenvalue, used by tests and diagnostics.
pub fn max_eig(m: &SymMatrix<f64>) -> Result<f64> {
    Ok(*sym_eig(m, false)?.values.last().unwrap_or(&f64::NEG_INFINITY))
}
