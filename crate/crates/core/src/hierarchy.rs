//! Drivers that assemble and solve each hierarchy at a given order.
//!
//! Single-fraction methods reduce to one pencil solve per order and yield
//! certified upper bounds. Sum methods solve an LMI problem whose values
//! converge from above only asymptotically.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use dashu_ratio::RBig;

use crate::eigsolve::{gen_eig_min_exact, GenEig, PencilStatus, PrecisionPolicy};
use crate::error::{Error, Result};
use crate::moments::{provenance_hash, MomentOracle, MomentTable, MomentValue, TableLayout, TableOptions};
use crate::momentmatrix::{localizing_matrix, make_basis, moment_matrix, OracleSource};
use crate::poly::MultiPoly;
use crate::problem::{Fraction, Problem, SetKind};
use crate::scalar::{Coefficient, Field};
use crate::sdp::{
    build_sum_pushforward_exact, build_sum_standard_exact, sdp_solve, ExactLmi, FirstConstraint,
    SdpOptions, SdpStatus, PRECONDITION_BITS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Polynomial objective, original variables.
    Poly,
    /// Polynomial objective, univariate pushforward.
    PolyPush,
    /// Single fraction, original variables.
    Std,
    /// Single fraction, bivariate pushforward.
    Push,
    /// Sum of fractions, original variables.
    StdSum,
    /// Sum of fractions, `2N`-variate pushforward.
    PushSum,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Poly,
        Method::PolyPush,
        Method::Std,
        Method::Push,
        Method::StdSum,
        Method::PushSum,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::Poly => "poly",
            Method::PolyPush => "poly-push",
            Method::Std => "std",
            Method::Push => "push",
            Method::StdSum => "std-sum",
            Method::PushSum => "push-sum",
        }
    }

    pub fn is_sum(&self) -> bool {
        matches!(self, Method::StdSum | Method::PushSum)
    }

    /// Whether each order's value is a proven upper bound.
    pub fn is_certified(&self) -> bool {
        !self.is_sum()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown method {s:?}")))
    }
}

/// How coefficients and moments are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoeffMode {
    /// Exact rationals end to end; matrices are rounded only inside the solvers.
    #[default]
    Exact,
    /// Double precision moment tables and matrices.
    Float,
}

impl FromStr for CoeffMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CoeffMode::Exact),
            "float" => Ok(CoeffMode::Float),
            _ => Err(Error::Invalid(format!("unknown coefficient mode {s:?}"))),
        }
    }
}

/// Truncation order of the sum hierarchies as a function of `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SRule {
    #[default]
    EqualD,
    Fixed(u32),
}

impl SRule {
    pub fn at(&self, d: u32) -> u32 {
        match *self {
            SRule::EqualD => d,
            SRule::Fixed(s) => s,
        }
    }
}

impl FromStr for SRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "d" {
            return Ok(SRule::EqualD);
        }
        s.parse()
            .map(SRule::Fixed)
            .map_err(|_| Error::Invalid(format!("s must be an integer or \"d\", got {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct HierarchyOptions {
    pub coeff: CoeffMode,
    pub precision: PrecisionPolicy,
    /// Rescale moment tables to unit mass.
    pub normalize: bool,
    pub first_constraint: FirstConstraint,
    pub sdp: SdpOptions,
    pub table: TableOptions,
    /// Working precision of the congruence applied before rounding LMI data.
    pub precondition_bits: usize,
    /// Directory for persisted moment tables.
    pub cache_dir: Option<PathBuf>,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            coeff: CoeffMode::Exact,
            precision: PrecisionPolicy::default(),
            normalize: true,
            first_constraint: FirstConstraint::V1,
            sdp: SdpOptions {
                gap_tol: 1e-8,
                ..SdpOptions::default()
            },
            table: TableOptions::default(),
            precondition_bits: PRECONDITION_BITS,
            cache_dir: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Unbounded,
    Infeasible,
    MaxIter,
    Failed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Unbounded => "unbounded",
            Status::Infeasible => "infeasible",
            Status::MaxIter => "maxiter",
            Status::Failed => "failed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    /// Dimension of the (first) matrix block.
    pub matrix_dim: usize,
    /// Numerical rank of the `B`-side matrix.
    pub rank: Option<usize>,
    /// Smallest accepted Cholesky pivot of the `B`-side matrix, relative.
    pub min_pivot: Option<f64>,
    pub precision_bits: Option<usize>,
    pub iterations: Option<usize>,
    pub gap: Option<f64>,
    pub note: Option<String>,
}

/// One order of one hierarchy.
#[derive(Clone, Debug)]
pub struct HierarchyResult {
    pub method: Method,
    pub n_fractions: usize,
    pub n: usize,
    pub d: u32,
    pub s: Option<u32>,
    pub value: f64,
    pub moment_time: Duration,
    pub solve_time: Duration,
    pub status: Status,
    pub certified: bool,
    pub diagnostics: Diagnostics,
}

impl HierarchyResult {
    pub fn total_time(&self) -> Duration {
        self.moment_time + self.solve_time
    }
}

/// Stateful runner for one problem and method; moment tables persist across
/// orders and are only ever extended.
pub struct Sweep<'a> {
    problem: &'a Problem,
    method: Method,
    opts: HierarchyOptions,
    engine: Engine,
    warnings: Vec<String>,
}

enum Engine {
    Exact(State<RBig>),
    Float(State<f64>),
}

struct State<V: MomentValue> {
    fractions: Vec<(MultiPoly<V>, MultiPoly<V>)>,
    table: Option<MomentTable<V>>,
}

/// Points used by the denominator spot check.
pub const SPOT_CHECK_POINTS: usize = 1000;

impl<'a> Sweep<'a> {
    pub fn new(problem: &'a Problem, method: Method, opts: HierarchyOptions) -> Result<Self> {
        let nf = problem.num_fractions();
        if !method.is_sum() && nf != 1 {
            return Err(Error::Invalid(format!(
                "method {method} handles a single fraction, the problem has {nf}"
            )));
        }
        if matches!(method, Method::Poly | Method::PolyPush) {
            constant_denominator(&problem.fractions[0])?;
        }
        let warnings = problem.denominator_warnings(SPOT_CHECK_POINTS);
        for w in &warnings {
            log::warn!("{w}");
        }
        let engine = match opts.coeff {
            CoeffMode::Exact => Engine::Exact(State::new(problem)),
            CoeffMode::Float => Engine::Float(State::new(problem)),
        };
        Ok(Sweep {
            problem,
            method,
            opts,
            engine,
            warnings,
        })
    }

    /// Denominator positivity warnings from the spot check.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Solves order `d` (and `s` for sum methods, default `s = d`).
    pub fn solve(&mut self, d: u32, s: Option<u32>) -> Result<HierarchyResult> {
        let s = self.method.is_sum().then(|| s.unwrap_or(d));
        let mut r = match &mut self.engine {
            Engine::Exact(st) => st.solve(self.problem, self.method, d, s, &self.opts),
            Engine::Float(st) => st.solve(self.problem, self.method, d, s, &self.opts),
        }?;
        r.certified = self.method.is_certified() && r.status == Status::Optimal;
        Ok(r)
    }

    /// Solves every order in `ds`; a failing order is recorded in its row.
    pub fn run(&mut self, ds: impl IntoIterator<Item = u32>, s_rule: SRule) -> Vec<HierarchyResult> {
        ds.into_iter()
            .map(|d| {
                let s = Some(s_rule.at(d));
                self.solve(d, s).unwrap_or_else(|e| {
                    log::error!("{} at d = {d}: {e}", self.method);
                    HierarchyResult {
                        method: self.method,
                        n_fractions: self.problem.num_fractions(),
                        n: self.problem.n,
                        d,
                        s: self.method.is_sum().then_some(s_rule.at(d)),
                        value: f64::NAN,
                        moment_time: Duration::ZERO,
                        solve_time: Duration::ZERO,
                        status: Status::Failed,
                        certified: false,
                        diagnostics: Diagnostics {
                            note: Some(e.to_string()),
                            ..Diagnostics::default()
                        },
                    }
                })
            })
            .collect()
    }
}

fn constant_denominator(f: &Fraction) -> Result<RBig> {
    let c = f.den.coeff(&vec![0; f.den.nvars()]);
    if f.den.degree() != 0 || c.is_negative() || c.is_zero() {
        return Err(Error::Invalid(
            "polynomial methods need a positive constant denominator".into(),
        ));
    }
    Ok(c)
}

impl<V: MomentValue> State<V> {
    fn new(problem: &Problem) -> Self {
        State {
            fractions: problem
                .fractions
                .iter()
                .map(|f| (f.num.map_coeffs(V::from_rbig), f.den.map_coeffs(V::from_rbig)))
                .collect(),
            table: None,
        }
    }

    fn solve(
        &mut self,
        problem: &Problem,
        method: Method,
        d: u32,
        s: Option<u32>,
        opts: &HierarchyOptions,
    ) -> Result<HierarchyResult> {
        let oracle = problem.oracle();
        let src = OracleSource { oracle };
        let t0 = Instant::now();
        let result = |value: f64, status: Status, moment: Duration, solve: Duration, diag| {
            HierarchyResult {
                method,
                n_fractions: problem.num_fractions(),
                n: problem.n,
                d,
                s,
                value,
                moment_time: moment,
                solve_time: solve,
                status,
                certified: false,
                diagnostics: diag,
            }
        };
        match method {
            Method::Poly | Method::Std => {
                let (f, g) = &self.fractions[0];
                let basis = make_basis(problem.n, d);
                let a = localizing_matrix(f, &src, &basis)?;
                let b = if method == Method::Poly {
                    moment_matrix(&src, &basis)?.scale(&g.coeff(&vec![0; problem.n]))
                } else {
                    localizing_matrix(g, &src, &basis)?
                };
                let moment = t0.elapsed();
                let t1 = Instant::now();
                let e = gen_eig_min_exact(&a, &b, &opts.precision)?;
                let (value, status, diag) = pencil_outcome(&e);
                Ok(result(value, status, moment, t1.elapsed(), diag))
            }
            Method::PolyPush | Method::Push => {
                let (layout, gens) = if method == Method::PolyPush {
                    let f = &problem.fractions[0];
                    let c = constant_denominator(f)?;
                    (TableLayout::Univariate, vec![f.num.scale(&(RBig::ONE / c))])
                } else {
                    let f = &problem.fractions[0];
                    (TableLayout::Fractions(1), vec![f.num.clone(), f.den.clone()])
                };
                let table = self.table(layout, gens, 2 * d + 1, &oracle, opts)?;
                let mv = layout.mvars();
                let basis = make_basis(mv, d);
                let u = MultiPoly::<V>::var(mv, 0);
                let a = localizing_matrix(&u, table, &basis)?;
                let b = if method == Method::PolyPush {
                    moment_matrix(table, &basis)?
                } else {
                    localizing_matrix(&MultiPoly::<V>::var(mv, 1), table, &basis)?
                };
                let moment = t0.elapsed();
                let t1 = Instant::now();
                let e = gen_eig_min_exact(&a, &b, &opts.precision)?;
                let (value, status, diag) = pencil_outcome(&e);
                Ok(result(value, status, moment, t1.elapsed(), diag))
            }
            Method::StdSum | Method::PushSum => {
                let s = s.expect("sum methods carry s");
                let lmi = if method == Method::StdSum {
                    build_sum_standard_exact(&self.fractions, &src, d, s)?
                } else {
                    let nf = problem.num_fractions();
                    let gens = problem
                        .fractions
                        .iter()
                        .flat_map(|f| [f.num.clone(), f.den.clone()])
                        .collect();
                    let table =
                        self.table(TableLayout::Fractions(nf), gens, 2 * d + s + 1, &oracle, opts)?;
                    build_sum_pushforward_exact(table, d, s, opts.first_constraint)?
                };
                let moment = t0.elapsed();
                let t1 = Instant::now();
                let (value, status, diag) = solve_lmi(&lmi, opts)?;
                Ok(result(value, status, moment, t1.elapsed(), diag))
            }
        }
    }

    /// The persistent table, built, loaded or extended to at least `depth`.
    fn table(
        &mut self,
        layout: TableLayout,
        gens: Vec<MultiPoly<RBig>>,
        depth: u32,
        oracle: &MomentOracle,
        opts: &HierarchyOptions,
    ) -> Result<&MomentTable<V>> {
        let cache = opts.cache_dir.as_ref().map(|dir| {
            dir.join(format!(
                "{}.moments",
                provenance_hash(layout, &gens, oracle, V::KIND)
            ))
        });
        let mut changed = false;
        if self.table.is_none() {
            let loaded = cache.as_ref().filter(|p| p.exists()).and_then(|p| {
                MomentTable::load(p, layout, gens.clone(), oracle, opts.table.clone())
                    .map_err(|e| log::warn!("ignoring cached table {}: {e}", p.display()))
                    .ok()
            });
            let t = match loaded {
                Some(t) => t,
                None => {
                    changed = true;
                    MomentTable::build(layout, gens, depth, oracle, opts.table.clone())?
                }
            };
            self.table = Some(t);
        }
        let t = self.table.as_mut().expect("table present");
        if t.depth() < depth {
            t.extend_to(depth)?;
            changed = true;
        }
        if opts.normalize {
            t.normalize();
        }
        if changed {
            if let Some(path) = &cache {
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                t.save(path)?;
            }
        }
        Ok(t)
    }
}

fn pencil_outcome(e: &GenEig) -> (f64, Status, Diagnostics) {
    let status = match e.status {
        PencilStatus::Finite => Status::Optimal,
        PencilStatus::Unbounded => Status::Unbounded,
        PencilStatus::Infeasible => Status::Infeasible,
    };
    let note = (!e.converged).then(|| {
        format!(
            "precision levels did not agree below {} bits",
            e.precision_bits
        )
    });
    let note = match (note, e.rank < e.dim) {
        (Some(n), true) => Some(format!("{n}; B-side rank {} of {}", e.rank, e.dim)),
        (None, true) => Some(format!("B-side rank {} of {}", e.rank, e.dim)),
        (n, false) => n,
    };
    (
        e.value,
        status,
        Diagnostics {
            matrix_dim: e.dim,
            rank: Some(e.rank),
            min_pivot: Some(e.min_pivot),
            precision_bits: Some(e.precision_bits),
            note,
            ..Diagnostics::default()
        },
    )
}

fn solve_lmi<V: Field>(lmi: &ExactLmi<V>, opts: &HierarchyOptions) -> Result<(f64, Status, Diagnostics)> {
    let p = lmi.precondition(opts.precondition_bits)?;
    let sol = sdp_solve(&p, &opts.sdp)?;
    let status = match sol.status {
        SdpStatus::Optimal => Status::Optimal,
        SdpStatus::Infeasible => Status::Infeasible,
        SdpStatus::Unbounded => Status::Unbounded,
        SdpStatus::MaxIter => Status::MaxIter,
    };
    let note = (sol.primal_residual > opts.sdp.feas_tol)
        .then(|| format!("LMI violation {:.2e} at returned point", sol.primal_residual));
    Ok((
        sol.objective,
        status,
        Diagnostics {
            matrix_dim: p.blocks.first().map_or(0, |b| b.f0.dim()),
            iterations: Some(sol.iterations),
            gap: Some(sol.gap),
            note,
            ..Diagnostics::default()
        },
    ))
}

fn set_of(oracle: &MomentOracle) -> SetKind {
    match oracle {
        MomentOracle::Box { .. } => SetKind::Box,
        MomentOracle::Sphere { .. } => SetKind::Sphere,
    }
}

fn single(
    f: &MultiPoly<RBig>,
    g: &MultiPoly<RBig>,
    oracle: &MomentOracle,
    method: Method,
    d: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult> {
    let n = oracle.n();
    let p = Problem::new(n, set_of(oracle), vec![Fraction::new(f.clone(), g.clone())])?;
    Sweep::new(&p, method, opts.clone())?.solve(d, None)
}

/// `sup{a : M_d(f y) ⪰ a M_d(y)}`.
pub fn upper_bound_poly(
    f: &MultiPoly<RBig>,
    oracle: &MomentOracle,
    d: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult> {
    single(f, &MultiPoly::one(f.nvars()), oracle, Method::Poly, d, opts)
}

/// Univariate pushforward bound: Hankel pencil over the moments of `f`.
pub fn upper_bound_poly_pushforward(
    f: &MultiPoly<RBig>,
    oracle: &MomentOracle,
    d: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult> {
    single(f, &MultiPoly::one(f.nvars()), oracle, Method::PolyPush, d, opts)
}

/// `sup{a : M_d(f y) ⪰ a M_d(g y)}`, a certified upper bound on `min f/g`.
pub fn upper_bound_rational(
    f: &MultiPoly<RBig>,
    g: &MultiPoly<RBig>,
    oracle: &MomentOracle,
    d: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult> {
    single(f, g, oracle, Method::Std, d, opts)
}

/// Bivariate pushforward bound over the image of `(f, g)`.
pub fn upper_bound_rational_pushforward(
    f: &MultiPoly<RBig>,
    g: &MultiPoly<RBig>,
    oracle: &MomentOracle,
    d: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult> {
    single(f, g, oracle, Method::Push, d, opts)
}

pub fn upper_bound_sum(problem: &Problem, d: u32, s: u32, opts: &HierarchyOptions) -> Result<HierarchyResult> {
    Sweep::new(problem, Method::StdSum, opts.clone())?.solve(d, Some(s))
}

pub fn upper_bound_sum_pushforward(
    problem: &Problem,
    d: u32,
    s: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult> {
    Sweep::new(problem, Method::PushSum, opts.clone())?.solve(d, Some(s))
}

/// Runs `method` for every order in `ds`, reusing moment tables.
pub fn run_sweep(
    problem: &Problem,
    method: Method,
    ds: impl IntoIterator<Item = u32>,
    s_rule: SRule,
    opts: &HierarchyOptions,
) -> Result<Vec<HierarchyResult>> {
    Ok(Sweep::new(problem, method, opts.clone())?.run(ds, s_rule))
}
