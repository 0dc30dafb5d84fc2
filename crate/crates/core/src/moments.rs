//! Closed-form base-measure moments and pushforward moment tables.
//!
//! Box moments are with respect to Lebesgue measure on `[-1,1]^n`. Sphere
//! moments are stored exactly in units of the total surface area, so the
//! native sphere mass is 1; [`MomentOracle::unit_mass`] converts back to
//! unnormalized surface measure. Hierarchy values do not depend on the unit.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use rustc_hash::FxHashMap;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::scalar::{parse_rational, Coefficient, Field};

/// Reference measure on a simple compact set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentOracle {
    /// Lebesgue measure on `[-1,1]^n`.
    Box { n: usize },
    /// Rotation-invariant measure on the unit sphere in `R^n`.
    Sphere { n: usize },
}

impl MomentOracle {
    pub fn n(&self) -> usize {
        match *self {
            MomentOracle::Box { n } | MomentOracle::Sphere { n } => n,
        }
    }

    /// Exact moment of `x^alpha` in native units.
    pub fn exact_moment(&self, alpha: &[u32]) -> RBig {
        match self {
            MomentOracle::Box { .. } => box_monomial_moment(alpha),
            MomentOracle::Sphere { .. } => sphere_normalized_moment(alpha),
        }
    }

    /// Factor converting native units to the reference measure.
    pub fn unit_mass(&self) -> f64 {
        match *self {
            MomentOracle::Box { .. } => 1.0,
            MomentOracle::Sphere { n } => sphere_area(n),
        }
    }

    /// Moment of `x^alpha` with respect to the reference measure.
    pub fn moment_f64(&self, alpha: &[u32]) -> f64 {
        match self {
            MomentOracle::Box { .. } => box_monomial_moment(alpha).to_f64().value(),
            MomentOracle::Sphere { .. } => sphere_monomial_moment(alpha),
        }
    }

    pub fn tag(&self) -> String {
        match *self {
            MomentOracle::Box { n } => format!("box:{n}"),
            MomentOracle::Sphere { n } => format!("sphere:{n}"),
        }
    }

    fn check(&self, nvars: usize) -> Result<()> {
        if nvars != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: nvars,
            });
        }
        Ok(())
    }
}

/// `∫_{[-1,1]^n} x^alpha dx`: zero if any exponent is odd, else `∏ 2/(alpha_i+1)`.
pub fn box_monomial_moment(alpha: &[u32]) -> RBig {
    if alpha.iter().any(|a| a % 2 == 1) {
        return RBig::ZERO;
    }
    let den = alpha
        .iter()
        .fold(UBig::ONE, |acc, &a| acc * UBig::from(a + 1));
    RBig::from_parts(IBig::from(UBig::ONE << alpha.len()), den)
}

/// Surface-measure moment `∫_{S^{n-1}} x^alpha dσ` with `n = alpha.len()`.
pub fn sphere_monomial_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    sphere_normalized_moment(alpha).to_f64().value() * sphere_area(alpha.len())
}

/// Moment with respect to the uniform probability measure on the sphere.
///
/// Equals `∏ (alpha_i - 1)!! / ∏_{k < |alpha|/2} (n + 2k)`, a rational number.
pub fn sphere_normalized_moment(alpha: &[u32]) -> RBig {
    if alpha.iter().any(|a| a % 2 == 1) {
        return RBig::ZERO;
    }
    let n = alpha.len() as u64;
    let mut num = UBig::ONE;
    for &a in alpha {
        let mut k = a as u64;
        while k > 1 {
            k -= 1;
            num *= UBig::from(k);
            k -= 1;
        }
    }
    let half: u64 = alpha.iter().map(|&a| a as u64).sum::<u64>() / 2;
    let den = (0..half).fold(UBig::ONE, |acc, k| acc * UBig::from(n + 2 * k));
    RBig::from_parts(IBig::from(num), den)
}

/// Surface area of the unit sphere in `R^n`, by `|S^{n-1}| = 2π/(n-2) |S^{n-3}|`.
pub fn sphere_area(n: usize) -> f64 {
    let mut area = if n.is_multiple_of(2) { 2.0 * std::f64::consts::PI } else { 2.0 };
    let mut k = if n.is_multiple_of(2) { 2 } else { 1 };
    while k < n {
        k += 2;
        area *= 2.0 * std::f64::consts::PI / (k - 2) as f64;
    }
    area
}

/// Riesz functional `Σ p_γ · moment(γ)` in native units.
pub fn integrate<C: Field>(p: &MultiPoly<C>, oracle: &MomentOracle) -> Result<C> {
    oracle.check(p.nvars())?;
    let n = p.nvars();
    let mut acc = C::zero();
    for (m, c) in p.iter() {
        let alpha = m.exponents(n);
        if alpha.iter().any(|a| a % 2 == 1) {
            continue;
        }
        acc.add_mul_assign(c, &C::from_rbig(&oracle.exact_moment(&alpha)));
    }
    Ok(acc)
}

/// Riesz functional with respect to the reference measure, as a float.
pub fn integrate_reference<C: Field>(p: &MultiPoly<C>, oracle: &MomentOracle) -> Result<f64> {
    Ok(integrate(p, oracle)?.to_f64() * oracle.unit_mass())
}

/// Exact integral of an integer polynomial in native units.
///
/// Terms are bucketed by the moment denominator so the sum needs only one
/// rational reduction per distinct denominator.
pub fn integrate_int(p: &MultiPoly<IBig>, oracle: &MomentOracle) -> Result<RBig> {
    oracle.check(p.nvars())?;
    let n = p.nvars();
    match oracle {
        MomentOracle::Box { .. } => {
            let mut buckets: FxHashMap<u128, IBig> = FxHashMap::default();
            let mut overflow = RBig::ZERO;
            'terms: for (m, c) in p.iter() {
                let mut den: u128 = 1;
                for i in 0..n {
                    let a = m.exponent(i);
                    if a % 2 == 1 {
                        continue 'terms;
                    }
                    match den.checked_mul(a as u128 + 1) {
                        Some(d) => den = d,
                        None => {
                            let alpha = m.exponents(n);
                            overflow += RBig::from(c.clone()) * box_monomial_moment(&alpha);
                            continue 'terms;
                        }
                    }
                }
                *buckets.entry(den).or_insert(IBig::ZERO) += c;
            }
            let mut sum = RBig::ZERO;
            for (den, num) in buckets {
                sum += RBig::from_parts(num, UBig::from(den));
            }
            Ok(sum * RBig::from(IBig::from(UBig::ONE << n)) + overflow)
        }
        MomentOracle::Sphere { .. } => {
            let mut buckets: FxHashMap<UBig, IBig> = FxHashMap::default();
            for (m, c) in p.iter() {
                let alpha = m.exponents(n);
                if alpha.iter().any(|a| a % 2 == 1) {
                    continue;
                }
                let (num, den) = sphere_normalized_moment(&alpha).into_parts();
                *buckets.entry(den).or_insert(IBig::ZERO) += c * num;
            }
            let mut sum = RBig::ZERO;
            for (den, num) in buckets {
                sum += RBig::from_parts(num, den);
            }
            Ok(sum)
        }
    }
}

/// Value type of a moment table.
///
/// Exact tables expand products over integers and rescale; float tables
/// expand in floating point (user opt-in for very large instances).
pub trait MomentValue: Field {
    type Work: Coefficient;
    const KIND: &'static str;
    /// Splits `p = scale * P` with `P` over the working ring.
    fn prepare(p: &MultiPoly<RBig>) -> (MultiPoly<Self::Work>, Self);
    fn integrate_work(p: &MultiPoly<Self::Work>, oracle: &MomentOracle) -> Result<Self>;
    fn write_value(&self) -> String;
    fn read_value(s: &str) -> Option<Self>;
}

impl MomentValue for RBig {
    type Work = IBig;
    const KIND: &'static str = "exact";
    fn prepare(p: &MultiPoly<RBig>) -> (MultiPoly<IBig>, RBig) {
        p.integer_part()
    }
    fn integrate_work(p: &MultiPoly<IBig>, oracle: &MomentOracle) -> Result<RBig> {
        integrate_int(p, oracle)
    }
    fn write_value(&self) -> String {
        format!("{}/{}", self.numerator(), self.denominator())
    }
    fn read_value(s: &str) -> Option<Self> {
        parse_rational(s)
    }
}

impl MomentValue for f64 {
    type Work = f64;
    const KIND: &'static str = "float";
    fn prepare(p: &MultiPoly<RBig>) -> (MultiPoly<f64>, f64) {
        (p.to_f64(), 1.0)
    }
    fn integrate_work(p: &MultiPoly<f64>, oracle: &MomentOracle) -> Result<f64> {
        integrate(p, oracle)
    }
    fn write_value(&self) -> String {
        format!("{self:?}")
    }
    fn read_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

/// How the image variables of a table relate to the generating polynomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableLayout {
    /// One variable `u = f`.
    Univariate,
    /// `2N` variables `(u_1, v_1, ..., u_N, v_N) = (f_1, g_1, ..., f_N, g_N)`.
    Fractions(usize),
}

impl TableLayout {
    pub fn mvars(&self) -> usize {
        match *self {
            TableLayout::Univariate => 1,
            TableLayout::Fractions(n) => 2 * n,
        }
    }

    fn tag(&self) -> String {
        match *self {
            TableLayout::Univariate => "univariate".into(),
            TableLayout::Fractions(n) => format!("fractions:{n}"),
        }
    }
}

/// Number of exponents of total degree at most `depth` in `mvars` variables.
pub fn planned_entries(mvars: usize, depth: u32) -> u128 {
    let mut b: u128 = 1;
    for k in 1..=mvars as u128 {
        b = b * (depth as u128 + k) / k;
    }
    b
}

/// Tuning knobs for table construction.
#[derive(Clone, Debug)]
pub struct TableOptions {
    /// Refuse tables with more entries than this.
    pub max_entries: u128,
    /// Keep the last product of each chain for later extension while the
    /// cached term count stays below this bound. Exact terms of deep chains
    /// cost close to a kilobyte each, so the bound is a memory budget.
    pub chain_cache_terms: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            max_entries: 50_000_000,
            chain_cache_terms: 250_000,
        }
    }
}

/// Pushforward moments `∫ ∏ U_k(x)^{e_k} dλ` for `|e| ≤ depth`.
#[derive(Clone, Debug)]
pub struct MomentTable<V: MomentValue> {
    layout: TableLayout,
    oracle: MomentOracle,
    depth: u32,
    values: FxHashMap<Vec<u32>, V>,
    generators: Vec<MultiPoly<RBig>>,
    work: Vec<MultiPoly<V::Work>>,
    scales: Vec<V>,
    mass_divisor: Option<V>,
    provenance: String,
    options: TableOptions,
    /// Prefix of all but the last exponent -> prefix product times the last
    /// generator raised to the highest exponent reached so far.
    chain_cache: Option<FxHashMap<Vec<u32>, MultiPoly<V::Work>>>,
}

/// `y_{i,j} = ∫ f^i g^j dλ` for `i + j ≤ depth`, exact.
pub fn pushforward_table_single(
    f: &MultiPoly<RBig>,
    g: &MultiPoly<RBig>,
    depth: u32,
    oracle: &MomentOracle,
) -> Result<MomentTable<RBig>> {
    MomentTable::build(
        TableLayout::Fractions(1),
        vec![f.clone(), g.clone()],
        depth,
        oracle,
        TableOptions::default(),
    )
}

/// Moments of the 2N-variable image `(f_1, g_1, ..., f_N, g_N)`, exact.
pub fn pushforward_table_multi(
    fractions: &[(MultiPoly<RBig>, MultiPoly<RBig>)],
    depth: u32,
    oracle: &MomentOracle,
) -> Result<MomentTable<RBig>> {
    let gens = fractions
        .iter()
        .flat_map(|(f, g)| [f.clone(), g.clone()])
        .collect();
    MomentTable::build(
        TableLayout::Fractions(fractions.len()),
        gens,
        depth,
        oracle,
        TableOptions::default(),
    )
}

/// `y_k = ∫ f^k dλ` for `k ≤ depth`, exact.
pub fn pushforward_table_univariate(
    f: &MultiPoly<RBig>,
    depth: u32,
    oracle: &MomentOracle,
) -> Result<MomentTable<RBig>> {
    MomentTable::build(
        TableLayout::Univariate,
        vec![f.clone()],
        depth,
        oracle,
        TableOptions::default(),
    )
}

/// Content hash identifying a table's inputs.
pub fn provenance_hash(
    layout: TableLayout,
    generators: &[MultiPoly<RBig>],
    oracle: &MomentOracle,
    kind: &str,
) -> String {
    let mut h = Sha256::new();
    let mut s = format!("oracle={};layout={};kind={kind}", oracle.tag(), layout.tag());
    for (i, g) in generators.iter().enumerate() {
        let _ = write!(s, ";gen{i}={g}");
    }
    h.update(s.as_bytes());
    format!("{:x}", h.finalize())
}

impl<V: MomentValue> MomentTable<V> {
    fn empty(
        layout: TableLayout,
        generators: Vec<MultiPoly<RBig>>,
        oracle: &MomentOracle,
        options: TableOptions,
    ) -> Result<Self> {
        if generators.len() != layout.mvars() {
            return Err(Error::DimensionMismatch {
                expected: layout.mvars(),
                found: generators.len(),
            });
        }
        for g in &generators {
            oracle.check(g.nvars())?;
        }
        let (work, scales) = generators.iter().map(V::prepare).unzip();
        let provenance = provenance_hash(layout, &generators, oracle, V::KIND);
        Ok(MomentTable {
            layout,
            oracle: *oracle,
            depth: 0,
            values: FxHashMap::default(),
            generators,
            work,
            scales,
            mass_divisor: None,
            provenance,
            options,
            chain_cache: Some(FxHashMap::default()),
        })
    }

    /// Builds all entries of total degree at most `depth`.
    pub fn build(
        layout: TableLayout,
        generators: Vec<MultiPoly<RBig>>,
        depth: u32,
        oracle: &MomentOracle,
        options: TableOptions,
    ) -> Result<Self> {
        let mut t = Self::empty(layout, generators, oracle, options)?;
        t.fill(None, depth)?;
        Ok(t)
    }

    pub fn layout(&self) -> TableLayout {
        self.layout
    }

    pub fn mvars(&self) -> usize {
        self.layout.mvars()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn oracle(&self) -> &MomentOracle {
        &self.oracle
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn generators(&self) -> &[MultiPoly<RBig>] {
        &self.generators
    }

    pub fn is_normalized(&self) -> bool {
        self.mass_divisor.is_some()
    }

    pub fn get(&self, exps: &[u32]) -> Option<&V> {
        self.values.get(exps)
    }

    /// Entries sorted in graded-lex order of their exponents.
    pub fn entries_sorted(&self) -> Vec<(&Vec<u32>, &V)> {
        let mut v: Vec<_> = self.values.iter().collect();
        v.sort_by(|a, b| grlex(a.0, b.0));
        v
    }

    /// Adds the entries of total degree in `(depth, new_depth]`.
    pub fn extend_to(&mut self, new_depth: u32) -> Result<()> {
        if new_depth <= self.depth && !self.values.is_empty() {
            return Ok(());
        }
        let old = if self.values.is_empty() {
            None
        } else {
            Some(self.depth)
        };
        self.fill(old, new_depth)
    }

    /// Rescales every entry (present and future) so the mass entry is 1.
    pub fn normalize(&mut self) {
        if self.mass_divisor.is_some() {
            return;
        }
        let zero = vec![0; self.mvars()];
        let mass = self.values[&zero].clone();
        for v in self.values.values_mut() {
            *v = v.div_ref(&mass);
        }
        self.mass_divisor = Some(mass);
    }

    fn fill(&mut self, old: Option<u32>, new: u32) -> Result<()> {
        let m = self.mvars();
        let planned = planned_entries(m, new);
        if planned > self.options.max_entries {
            return Err(Error::SizeCap {
                what: "moment table entries",
                size: planned.min(usize::MAX as u128) as usize,
                cap: self.options.max_entries.min(usize::MAX as u128) as usize,
            });
        }
        log::debug!(
            "moment table {}: depth {:?} -> {new}, {planned} entries",
            self.layout.tag(),
            old
        );
        let mut scale_pows: Vec<Vec<V>> = Vec::with_capacity(m);
        for s in &self.scales {
            let mut row = vec![V::one()];
            for e in 1..=new as usize {
                let next = row[e - 1].mul_ref(s);
                row.push(next);
            }
            scale_pows.push(row);
        }
        let mut cache = match (old, self.chain_cache.take()) {
            (None, _) => FxHashMap::default(),
            (Some(_), Some(c)) => c,
            (Some(_), None) => FxHashMap::default(),
        };
        let one = MultiPoly::<V::Work>::one(self.oracle.n());
        let mut exps = vec![0u32; m];
        let mut ctx = FillCtx {
            old,
            new,
            scale_pows: &scale_pows,
            cached_terms: cache.values().map(MultiPoly::len).sum(),
            cache: &mut cache,
            cache_cap: self.options.chain_cache_terms,
        };
        self.dfs(0, 0, &one, &mut exps, &mut ctx)?;
        // A partial cache is fine: missing chains are recomputed from scratch.
        self.chain_cache = Some(cache);
        self.depth = new;
        Ok(())
    }

    fn record(&mut self, exps: &[u32], prod: &MultiPoly<V::Work>, pows: &[Vec<V>]) -> Result<()> {
        let mut v = V::integrate_work(prod, &self.oracle)?;
        for (k, &e) in exps.iter().enumerate() {
            if e > 0 {
                v = v.mul_ref(&pows[k][e as usize]);
            }
        }
        if let Some(mass) = &self.mass_divisor {
            v = v.div_ref(mass);
        }
        self.values.insert(exps.to_vec(), v);
        Ok(())
    }

    fn dfs(
        &mut self,
        k: usize,
        deg: u32,
        prod: &MultiPoly<V::Work>,
        exps: &mut Vec<u32>,
        ctx: &mut FillCtx<'_, V>,
    ) -> Result<()> {
        let m = exps.len();
        let room = ctx.new - deg;
        if k + 1 == m {
            // Last coordinate: walk the chain prod * U^e, resuming from the cache.
            let prefix = exps[..k].to_vec();
            let cached = ctx.cache.remove(&prefix);
            if let Some(c) = &cached {
                ctx.cached_terms -= c.len();
            }
            let (mut cur, start) = match (ctx.old, cached) {
                (Some(old), Some(c)) if deg <= old => (c, old - deg),
                _ => (prod.clone(), 0),
            };
            for e in start..=room {
                exps[k] = e;
                if ctx.old.is_none_or(|o| deg + e > o) {
                    self.record(exps, &cur, ctx.scale_pows)?;
                }
                if e < room {
                    cur = cur.checked_mul(&self.work[k])?;
                }
            }
            exps[k] = 0;
            if ctx.cached_terms + cur.len() <= ctx.cache_cap {
                ctx.cached_terms += cur.len();
                ctx.cache.insert(prefix, cur);
            }
            return Ok(());
        }
        let mut cur = prod.clone();
        for e in 0..=room {
            exps[k] = e;
            self.dfs(k + 1, deg + e, &cur, exps, ctx)?;
            if e < room {
                cur = cur.checked_mul(&self.work[k])?;
            }
        }
        exps[k] = 0;
        Ok(())
    }

    /// Writes the table as text: a header, then one `alpha... beta... value` line per entry.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "pfmin-moment-table 1")?;
        writeln!(w, "mvars {}", self.mvars())?;
        writeln!(w, "depth {}", self.depth)?;
        writeln!(w, "provenance {}", self.provenance)?;
        writeln!(w, "normalized {}", u8::from(self.is_normalized()))?;
        for (exps, v) in self.entries_sorted() {
            let mut line = String::new();
            for e in self.display_order(exps) {
                let _ = write!(line, "{e} ");
            }
            line.push_str(&v.write_value());
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Exponents with all `u` exponents first, then all `v` exponents.
    fn display_order(&self, exps: &[u32]) -> Vec<u32> {
        match self.layout {
            TableLayout::Univariate => exps.to_vec(),
            TableLayout::Fractions(_) => exps
                .iter()
                .step_by(2)
                .chain(exps.iter().skip(1).step_by(2))
                .copied()
                .collect(),
        }
    }

    fn storage_order(&self, shown: &[u32]) -> Vec<u32> {
        match self.layout {
            TableLayout::Univariate => shown.to_vec(),
            TableLayout::Fractions(n) => (0..2 * n)
                .map(|k| if k % 2 == 0 { shown[k / 2] } else { shown[n + k / 2] })
                .collect(),
        }
    }

    /// Loads a cached table, rejecting it unless its provenance matches the inputs.
    pub fn load(
        path: &Path,
        layout: TableLayout,
        generators: Vec<MultiPoly<RBig>>,
        oracle: &MomentOracle,
        options: TableOptions,
    ) -> Result<Self> {
        let mut t = Self::empty(layout, generators, oracle, options)?;
        t.chain_cache = None;
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut depth = None;
        let mut normalized = false;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let perr = |message: String| Error::Parse {
                line: lineno + 1,
                column: 1,
                message,
            };
            let mut parts = line.split_whitespace();
            let Some(first) = parts.next() else { continue };
            match first {
                "pfmin-moment-table" => {}
                "mvars" => {
                    let m: usize = parts.next().and_then(|s| s.parse().ok()).unwrap_or(0);
                    if m != t.mvars() {
                        return Err(Error::DimensionMismatch {
                            expected: t.mvars(),
                            found: m,
                        });
                    }
                }
                "depth" => depth = parts.next().and_then(|s| s.parse().ok()),
                "provenance" => {
                    if parts.next() != Some(t.provenance.as_str()) {
                        return Err(Error::Invalid(format!(
                            "cached table {} does not match the requested inputs",
                            path.display()
                        )));
                    }
                }
                "normalized" => normalized = parts.next() == Some("1"),
                _ => {
                    let fields: Vec<&str> = std::iter::once(first).chain(parts).collect();
                    if fields.len() != t.mvars() + 1 {
                        return Err(perr(format!(
                            "expected {} fields, found {}",
                            t.mvars() + 1,
                            fields.len()
                        )));
                    }
                    let shown = fields[..t.mvars()]
                        .iter()
                        .map(|s| s.parse::<u32>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| perr(e.to_string()))?;
                    let v = V::read_value(fields[t.mvars()])
                        .ok_or_else(|| perr(format!("bad value {}", fields[t.mvars()])))?;
                    let key = t.storage_order(&shown);
                    t.values.insert(key, v);
                }
            }
        }
        let depth = depth.ok_or_else(|| Error::Invalid("missing depth header".into()))?;
        if planned_entries(t.mvars(), depth) != t.values.len() as u128 {
            return Err(Error::Invalid(format!(
                "cached table has {} entries, expected {}",
                t.values.len(),
                planned_entries(t.mvars(), depth)
            )));
        }
        t.depth = depth;
        if normalized {
            let zero = vec![0; t.mvars()];
            let mut raw = Self::empty(layout, t.generators.clone(), oracle, TableOptions::default())?;
            raw.fill(None, 0)?;
            t.mass_divisor = Some(raw.values[&zero].clone());
        }
        Ok(t)
    }
}

struct FillCtx<'a, V: MomentValue> {
    old: Option<u32>,
    new: u32,
    scale_pows: &'a [Vec<V>],
    cache: &'a mut FxHashMap<Vec<u32>, MultiPoly<V::Work>>,
    /// Terms currently held in `cache`; insertions stop at the cap.
    cached_terms: usize,
    cache_cap: usize,
}

/// Graded-lex comparison on plain exponent vectors.
pub fn grlex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}
