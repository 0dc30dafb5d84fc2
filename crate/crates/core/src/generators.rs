//! Built-in benchmark instances.
//!
//! Random coefficients are drawn from a uniform grid with spacing 1/4096 so
//! generated problems stay exact with small denominators. The generator is
//! PCG64 (`rand_pcg::Pcg64`) seeded with `seed_from_u64`.

use dashu_ratio::RBig;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::eigsolve::min_eig;
use crate::error::{Error, Result};
use crate::momentmatrix::SymMatrix;
use crate::oracle::monte_carlo_min;
use crate::poly::MultiPoly;
use crate::problem::{Fraction, Problem, SetKind};

/// Denominator of the coefficient grid.
pub const COEF_GRID: i64 = 4096;
/// Smallest eigenvalue enforced on generated `B` matrices.
pub const MIN_B_EIGENVALUE: f64 = 1e-3;
/// Monte-Carlo minima are rounded to this many fractional bits before shifting.
pub const SHIFT_BITS: u32 = 32;

/// `Σ x_i^{2n} / ∏ x_i^2` on `[-1, 1]^n`, whose minimum is `n`.
pub fn gen_example1(n: usize) -> Result<Problem> {
    if n < 2 {
        return Err(Error::Invalid("example1 needs n >= 2".into()));
    }
    let f = MultiPoly::from_terms(
        n,
        (0..n).map(|i| {
            let mut e = vec![0; n];
            e[i] = 2 * n as u32;
            (e, RBig::ONE)
        }),
    )?;
    let g = MultiPoly::monomial(&vec![2; n], RBig::ONE)?;
    let mut p = Problem::new(n, SetKind::Box, vec![Fraction::new(f, g)])?;
    p.known_min = Some(n as f64);
    p.metadata.insert("generator".into(), "example1".into());
    Ok(p)
}

/// Symmetric matrix with entries on the coefficient grid in `[-1, 1]`.
fn grid_symmetric(n: usize, rng: &mut Pcg64) -> Vec<Vec<RBig>> {
    let mut m = vec![vec![RBig::ZERO; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v = RBig::from(rng.random_range(-COEF_GRID..=COEF_GRID)) / RBig::from(COEF_GRID);
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    m
}

/// Grid-symmetric matrix shifted by a grid multiple of `I` so that its
/// smallest eigenvalue is at least [`MIN_B_EIGENVALUE`]. Returns the shift.
fn grid_positive_definite(n: usize, rng: &mut Pcg64) -> Result<(Vec<Vec<RBig>>, RBig)> {
    let mut m = grid_symmetric(n, rng);
    let dense = DMatrix::from_fn(n, n, |i, j| m[i][j].to_f64().value());
    let lam = min_eig(&SymMatrix::from_dense(&dense))?;
    let delta = (MIN_B_EIGENVALUE - lam).max(0.0);
    // Round up to the grid, plus one step to absorb eigenvalue error.
    let steps = if delta > 0.0 {
        (delta * COEF_GRID as f64).ceil() as i64 + 1
    } else {
        0
    };
    let shift = RBig::from(steps) / RBig::from(COEF_GRID);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += &shift;
    }
    Ok((m, shift))
}

/// `xᵀ M x` as a polynomial.
fn quadratic_form(m: &[Vec<RBig>]) -> Result<MultiPoly<RBig>> {
    let n = m.len();
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = vec![0; n];
            e[i] += 1;
            e[j] += 1;
            terms.push((e, m[i][j].clone()));
        }
    }
    MultiPoly::from_terms(n, terms)
}

/// Rounds to a multiple of `2^-SHIFT_BITS`.
fn round_shift(v: f64) -> RBig {
    let scale = (1u64 << SHIFT_BITS) as f64;
    RBig::from((v * scale).round() as i64) / RBig::from(1i64 << SHIFT_BITS)
}

/// Random generalized Rayleigh quotient `xᵀAx / xᵀBx` on the box, shifted
/// by its Monte-Carlo minimum so the true minimum is close to 0.
pub fn gen_random_rayleigh(n: usize, seed: u64, mc_samples: usize) -> Result<Problem> {
    if n < 2 {
        return Err(Error::Invalid("rayleigh needs n >= 2".into()));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let a = grid_symmetric(n, &mut rng);
    let (b, shift) = grid_positive_definite(n, &mut rng)?;
    let fhat = quadratic_form(&a)?;
    let g = quadratic_form(&b)?;
    let mut p = shifted(n, vec![Fraction::new(fhat, g)], seed, mc_samples)?;
    p.metadata.insert("generator".into(), "rayleigh".into());
    p.metadata.insert("b_shift".into(), shift.to_string());
    Ok(p)
}

/// Random sum `Σ xᵀA_i x / (1 + xᵀB_i x)` on the box, with the first
/// numerator shifted by the Monte-Carlo minimum of the sum.
pub fn gen_random_sum(nfrac: usize, n: usize, seed: u64, mc_samples: usize) -> Result<Problem> {
    if nfrac == 0 || n == 0 {
        return Err(Error::Invalid("sum generator needs N >= 1 and n >= 1".into()));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut fractions = Vec::with_capacity(nfrac);
    let mut shifts = Vec::with_capacity(nfrac);
    for _ in 0..nfrac {
        let a = grid_symmetric(n, &mut rng);
        let (b, shift) = grid_positive_definite(n, &mut rng)?;
        let g = quadratic_form(&b)?.checked_add(&MultiPoly::one(n))?;
        fractions.push(Fraction::new(quadratic_form(&a)?, g));
        shifts.push(shift.to_string());
    }
    let mut p = shifted(n, fractions, seed, mc_samples)?;
    p.metadata.insert("generator".into(), "sum".into());
    p.metadata.insert("b_shift".into(), shifts.join(","));
    Ok(p)
}

/// Replaces `f_1` by `f_1 − ρ̂ g_1` where `ρ̂` is the rounded sampled minimum.
fn shifted(n: usize, mut fractions: Vec<Fraction>, seed: u64, mc_samples: usize) -> Result<Problem> {
    let unshifted = Problem::new(n, SetKind::Box, fractions.clone())?;
    let rho_hat = monte_carlo_min(&unshifted, mc_samples, seed)?;
    let rho_q = round_shift(rho_hat);
    let f0 = &mut fractions[0];
    f0.num = f0.num.checked_sub(&f0.den.scale(&rho_q))?;
    let mut p = Problem::new(n, SetKind::Box, fractions)?;
    p.metadata.insert("seed".into(), seed.to_string());
    p.metadata.insert("mc_samples".into(), mc_samples.to_string());
    p.metadata.insert("rho_hat".into(), format!("{rho_hat:?}"));
    p.metadata.insert("rho_hat_rounded".into(), rho_q.to_string());
    p.metadata.insert(
        "b_construction".into(),
        format!("grid-symmetric entries in [-1,1] step 1/{COEF_GRID}, plus delta*I with lambda_min >= {MIN_B_EIGENVALUE}"),
    );
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rpoly;

    #[test]
    fn example1_shapes() {
        let p = gen_example1(2).unwrap();
        assert_eq!(p.fractions[0].num, rpoly(2, &[(1, &[4, 0]), (1, &[0, 4])]));
        assert_eq!(p.fractions[0].den, rpoly(2, &[(1, &[2, 2])]));
        assert_eq!(p.known_min, Some(2.0));
        let p = gen_example1(3).unwrap();
        assert_eq!(
            p.fractions[0].num,
            rpoly(3, &[(1, &[6, 0, 0]), (1, &[0, 6, 0]), (1, &[0, 0, 6])])
        );
        assert_eq!(p.known_min, Some(3.0));
        assert_eq!(p.fractions[0].den.eval(&[1.0; 3]).unwrap(), 1.0);
        assert!(gen_example1(1).is_err());
    }

    #[test]
    fn rayleigh_is_deterministic_and_shifted() {
        let p = gen_random_rayleigh(3, 42, 20_000).unwrap();
        let q = gen_random_rayleigh(3, 42, 20_000).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.to_json(), q.to_json());
        let again = monte_carlo_min(&p, 20_000, 42).unwrap();
        assert!(again.abs() < 1e-9, "{again}");
    }

    #[test]
    fn generated_b_is_positive_definite() {
        for seed in 0..20 {
            let mut rng = Pcg64::seed_from_u64(seed);
            let (b, _) = grid_positive_definite(4, &mut rng).unwrap();
            let dense = DMatrix::from_fn(4, 4, |i, j| b[i][j].to_f64().value());
            assert!(min_eig(&SymMatrix::from_dense(&dense)).unwrap() >= MIN_B_EIGENVALUE * 0.99);
        }
    }

    #[test]
    fn sum_generator_properties() {
        let p = gen_random_sum(2, 3, 7, 20_000).unwrap();
        assert_eq!(p.num_fractions(), 2);
        for f in &p.fractions {
            assert_eq!(f.den.eval(&[0.0; 3]).unwrap(), 1.0);
        }
        let again = monte_carlo_min(&p, 20_000, 7).unwrap();
        assert!(again.abs() < 1e-9, "{again}");
        assert_eq!(p, gen_random_sum(2, 3, 7, 20_000).unwrap());
    }

    #[test]
    fn single_sum_matches_rayleigh_recipe_with_offset() {
        let p = gen_random_sum(1, 2, 3, 1000).unwrap();
        assert_eq!(p.num_fractions(), 1);
        let den = &p.fractions[0].den;
        assert_eq!(den.coeff(&[0, 0]), RBig::ONE);
        assert_eq!(den.degree(), 2);
    }
}
