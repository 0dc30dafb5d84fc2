//! Minimization problems `Σ f_i / g_i` over a box or sphere, and their JSON form.

use std::collections::BTreeMap;
use std::path::Path;

use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::MomentOracle;
use crate::poly::MultiPoly;
use crate::scalar::{parse_rational, Coefficient};

/// The feasible set `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    /// `[-1, 1]^n`.
    Box,
    /// The unit sphere in `R^n`.
    Sphere,
}

impl SetKind {
    pub fn oracle(&self, n: usize) -> MomentOracle {
        match self {
            SetKind::Box => MomentOracle::Box { n },
            SetKind::Sphere => MomentOracle::Sphere { n },
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SetKind::Box => "box",
            SetKind::Sphere => "sphere",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fraction {
    pub num: MultiPoly<RBig>,
    pub den: MultiPoly<RBig>,
}

impl Fraction {
    pub fn new(num: MultiPoly<RBig>, den: MultiPoly<RBig>) -> Self {
        Fraction { num, den }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub n: usize,
    pub set: SetKind,
    pub fractions: Vec<Fraction>,
    /// Known or estimated global minimum, when available.
    pub known_min: Option<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl Problem {
    pub fn new(n: usize, set: SetKind, fractions: Vec<Fraction>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("problem needs at least one variable".into()));
        }
        if fractions.is_empty() {
            return Err(Error::Invalid("problem needs at least one fraction".into()));
        }
        for f in &fractions {
            for p in [&f.num, &f.den] {
                if p.nvars() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: p.nvars(),
                    });
                }
            }
            if f.den.is_zero() {
                return Err(Error::Invalid("zero denominator".into()));
            }
        }
        Ok(Problem {
            n,
            set,
            fractions,
            known_min: None,
            metadata: BTreeMap::new(),
        })
    }

    pub fn oracle(&self) -> MomentOracle {
        self.set.oracle(self.n)
    }

    pub fn num_fractions(&self) -> usize {
        self.fractions.len()
    }

    pub fn fraction_pairs(&self) -> Vec<(MultiPoly<RBig>, MultiPoly<RBig>)> {
        self.fractions
            .iter()
            .map(|f| (f.num.clone(), f.den.clone()))
            .collect()
    }

    /// Double-precision evaluator for repeated use.
    pub fn evaluator(&self) -> Evaluator {
        Evaluator {
            n: self.n,
            fractions: self
                .fractions
                .iter()
                .map(|f| (FlatPoly::new(&f.num), FlatPoly::new(&f.den)))
                .collect(),
        }
    }

    /// Quasi-random spot check of `g_i > 0` on `K`; returns one warning per
    /// fraction that is negative somewhere. Isolated zeros are tolerated since
    /// denominators such as `∏ x_i^2` vanish on a null set. Not a proof of
    /// positivity.
    pub fn denominator_warnings(&self, points: usize) -> Vec<String> {
        let dens: Vec<FlatPoly> = self.fractions.iter().map(|f| FlatPoly::new(&f.den)).collect();
        let mut bad = vec![None; dens.len()];
        let mut x = vec![0.0; self.n];
        for k in 1..=points {
            halton_point(k, &mut x);
            if self.set == SetKind::Sphere && !project_to_sphere(&mut x) {
                continue;
            }
            for (i, g) in dens.iter().enumerate() {
                if bad[i].is_none() {
                    let v = g.eval(&x);
                    if v < 0.0 {
                        bad[i] = Some((x.clone(), v));
                    }
                }
            }
        }
        bad.into_iter()
            .enumerate()
            .filter_map(|(i, b)| {
                b.map(|(x, v)| format!("denominator {} is {v:.3e} at {x:?}", i + 1))
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.into_problem()
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Canonical JSON: terms in graded-lex order, coefficients as exact strings.
    pub fn to_json(&self) -> String {
        let file = ProblemFile {
            n: self.n,
            set: self.set,
            fractions: self
                .fractions
                .iter()
                .map(|f| FractionFile {
                    num: terms_of(&f.num),
                    den: terms_of(&f.den),
                })
                .collect(),
            known_min: self.known_min,
            metadata: self.metadata.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("serializable");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Polynomial flattened for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct FlatPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl FlatPoly {
    pub fn new<C: Coefficient>(p: &MultiPoly<C>) -> Self {
        FlatPoly {
            terms: p
                .sorted_terms()
                .into_iter()
                .map(|(e, c)| (c.to_f64(), e))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }
}

/// Evaluates `Σ f_i(x) / g_i(x)`.
#[derive(Clone, Debug)]
pub struct Evaluator {
    n: usize,
    fractions: Vec<(FlatPoly, FlatPoly)>,
}

impl Evaluator {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `Ok(None)` when some denominator is exactly zero; an error when negative.
    pub fn eval(&self, x: &[f64]) -> Result<Option<f64>> {
        let mut sum = 0.0;
        for (f, g) in &self.fractions {
            let gv = g.eval(x);
            if gv < 0.0 {
                return Err(Error::ContractViolation(format!(
                    "denominator is {gv:.3e} < 0 at {x:?}"
                )));
            }
            if gv == 0.0 {
                return Ok(None);
            }
            sum += f.eval(x) / gv;
        }
        Ok(Some(sum))
    }
}

/// `k`-th point of the Halton sequence mapped to `[-1, 1]^n`.
fn halton_point(k: usize, x: &mut [f64]) {
    const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    for (i, xi) in x.iter_mut().enumerate() {
        let base = PRIMES[i % PRIMES.len()];
        let (mut f, mut r, mut j) = (1.0, 0.0, k);
        while j > 0 {
            f /= base as f64;
            r += f * (j % base) as f64;
            j /= base;
        }
        *xi = 2.0 * r - 1.0;
    }
}

fn project_to_sphere(x: &mut [f64]) -> bool {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    n: usize,
    set: SetKind,
    fractions: Vec<FractionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    known_min: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct FractionFile {
    num: Vec<TermFile>,
    den: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    coef: Coef,
    exps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coef {
    Text(String),
    Number(serde_json::Number),
}

fn terms_of(p: &MultiPoly<RBig>) -> Vec<TermFile> {
    p.sorted_terms()
        .into_iter()
        .map(|(exps, c)| TermFile {
            coef: Coef::Text(c.fmt_coef()),
            exps,
        })
        .collect()
}

impl ProblemFile {
    fn into_problem(self) -> Result<Problem> {
        let n = self.n;
        let poly = |terms: &[TermFile], what: String| -> Result<MultiPoly<RBig>> {
            let mut parsed = Vec::with_capacity(terms.len());
            for (k, t) in terms.iter().enumerate() {
                if t.exps.len() != n {
                    return Err(Error::Invalid(format!(
                        "{what}, term {}: {} exponents for n = {n}",
                        k + 1,
                        t.exps.len()
                    )));
                }
                let text = match &t.coef {
                    Coef::Text(s) => s.clone(),
                    Coef::Number(x) => x.to_string(),
                };
                let c = parse_rational(&text).ok_or_else(|| {
                    Error::Invalid(format!("{what}, term {}: bad coefficient {text:?}", k + 1))
                })?;
                parsed.push((t.exps.clone(), c));
            }
            MultiPoly::from_terms(n, parsed)
        };
        let mut fractions = Vec::with_capacity(self.fractions.len());
        for (i, f) in self.fractions.iter().enumerate() {
            fractions.push(Fraction::new(
                poly(&f.num, format!("fraction {} numerator", i + 1))?,
                poly(&f.den, format!("fraction {} denominator", i + 1))?,
            ));
        }
        let mut p = Problem::new(n, self.set, fractions)?;
        p.known_min = self.known_min;
        p.metadata = self.metadata;
        Ok(p)
    }
}
