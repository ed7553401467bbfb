//! Seeded random instances and set-cover reduction instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{InhomogeneousInstance, Instance};
use crate::scalar::Scalar;
use crate::trop::{ExtScalar, TropMatrix, TropVector};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomParams {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// Multiplicities are drawn from `1..=mu_max` before rebalancing.
    pub mu_max: u64,
    /// Inclusive range of finite entries.
    pub lo: i64,
    pub hi: i64,
    /// Probability that an entry is finite.
    pub density: f64,
    pub seed: u64,
    /// Spread entries by a factor of 64 and add distinct offsets so that
    /// tropical determinants are attained uniquely with high probability.
    pub perturb: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { n: 3, m: 2, p: 2, mu_max: 2, lo: -3, hi: 3, density: 0.6, seed: 0, perturb: false }
    }
}

const PERTURB_SPREAD: i64 = 64;

/// Deterministic for a fixed seed. Every row gets at least one finite entry
/// and the multiplicities are rebalanced: a deficit on the `μ⁻` side is
/// added to the last `μ⁻`, a deficit on the `μ⁺` side to the last `μ⁺`.
/// Without objective rows all `μ⁻` are zero.
pub fn gen_random<T: Scalar>(params: &RandomParams) -> Result<Instance<T>> {
    let RandomParams { n, m, p, mu_max, lo, hi, density, seed, perturb } = *params;
    if n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    if lo > hi {
        return Err(Error::InvalidParams(format!("empty entry range {lo}..={hi}")));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParams(format!("density {density} is not a probability")));
    }
    if mu_max == 0 {
        return Err(Error::InvalidParams("mu_max must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = std::collections::HashSet::new();
    let mut entry = |rng: &mut ChaCha8Rng| -> T {
        let v = rng.gen_range(lo..=hi);
        if !perturb {
            return T::from_i64(v);
        }
        loop {
            let w = v * PERTURB_SPREAD + rng.gen_range(0..PERTURB_SPREAD);
            if used.insert(w) || used.len() as i64 >= (hi - lo + 1) * PERTURB_SPREAD {
                return T::from_i64(w);
            }
        }
    };
    let matrix = |rows: usize, rng: &mut ChaCha8Rng, entry: &mut dyn FnMut(&mut ChaCha8Rng) -> T| {
        let mut dense = vec![vec![None; n]; rows];
        for row in dense.iter_mut() {
            for slot in row.iter_mut() {
                if rng.gen_bool(density) {
                    *slot = Some(entry(rng));
                }
            }
        }
        dense
    };
    let mut c = matrix(p, &mut rng, &mut entry);
    let mut ap = matrix(m, &mut rng, &mut entry);
    let mut am = matrix(m, &mut rng, &mut entry);
    for row in c.iter_mut() {
        if row.iter().all(Option::is_none) {
            let j = rng.gen_range(0..n);
            row[j] = Some(entry(&mut rng));
        }
    }
    for i in 0..m {
        if ap[i].iter().chain(am[i].iter()).all(Option::is_none) {
            let j = rng.gen_range(0..n);
            let v = Some(entry(&mut rng));
            if rng.gen_bool(0.5) {
                ap[i][j] = v;
            } else {
                am[i][j] = v;
            }
        }
    }
    let mut mu_plus: Vec<u64> = (0..p).map(|_| rng.gen_range(1..=mu_max)).collect();
    let mut mu_minus: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=mu_max)).collect();
    if p == 0 {
        mu_minus.iter_mut().for_each(|v| *v = 0);
    } else {
        let (sp, sm): (u64, u64) = (mu_plus.iter().sum(), mu_minus.iter().sum());
        if sp > sm {
            *mu_minus.last_mut().expect("n > 0") += sp - sm;
        } else {
            *mu_plus.last_mut().expect("p > 0") += sm - sp;
        }
    }
    Instance::new(
        TropMatrix::from_options(n, ap)?,
        TropMatrix::from_options(n, am)?,
        TropMatrix::from_options(n, c)?,
        mu_plus,
        mu_minus,
    )
}

/// A set-cover instance as a program, with `scale` set to `N` for the
/// non-degenerate variant.
#[derive(Debug, Clone, PartialEq)]
pub struct SetCoverReduction<T> {
    pub instance: InhomogeneousInstance<T>,
    /// Whether the subsets cover the ground set; otherwise the program is
    /// infeasible.
    pub coverable: bool,
    pub scale: Option<T>,
}

fn check_subsets(ground: usize, subsets: &[Vec<usize>]) -> Result<bool> {
    if subsets.is_empty() {
        return Err(Error::InvalidParams("at least one subset is required".into()));
    }
    let mut covered = vec![false; ground];
    for s in subsets {
        for &e in s {
            if e >= ground {
                return Err(Error::InvalidParams(format!("element {e} is outside the ground set of size {ground}")));
            }
            covered[e] = true;
        }
    }
    Ok(covered.into_iter().all(|c| c))
}

/// Minimize `x_1 ⊗ … ⊗ x_n` subject to `⊕_{I_j ∋ i} x_j ≥ 1` for every
/// element `i` and `x_j ≥ 0`. Elements are `0..ground`.
pub fn gen_setcover<T: Scalar>(ground: usize, subsets: &[Vec<usize>]) -> Result<SetCoverReduction<T>> {
    let coverable = check_subsets(ground, subsets)?;
    build_setcover(ground, subsets, coverable, |_, _| Ok(T::zero()), |_| Ok(T::from_i64(1)), |_| Ok(T::zero()), None)
}

/// The variant whose homogenization is non-degenerate: with 1-based `i, j`,
/// element rows read `⊕ (−2^{i(n+1)+j}) ⊗ x_j ≥ −2^{i(n+1)} + N` and the
/// bound rows `(−2^j) ⊗ x_j ≥ 0`, where `N = 2^{mn+m+n+⌈log₂ n⌉}`.
pub fn gen_setcover_nondegenerate<T: Scalar>(ground: usize, subsets: &[Vec<usize>]) -> Result<SetCoverReduction<T>> {
    let coverable = check_subsets(ground, subsets)?;
    let (n, m) = (subsets.len() as u32, ground as u32);
    let log_n = if n <= 1 { 0 } else { u32::BITS - (n - 1).leading_zeros() };
    let big_n = T::pow2(m * n + m + n + log_n)?;
    let neg_pow = |e: u32| T::pow2(e)?.checked_neg().ok_or(Error::Overflow);
    let n1 = n + 1;
    let rhs = |i: usize| {
        neg_pow((i as u32 + 1) * n1)?
            .checked_add(&big_n)
            .ok_or(Error::Overflow)
    };
    build_setcover(
        ground,
        subsets,
        coverable,
        |i, j| neg_pow((i as u32 + 1) * n1 + j as u32 + 1),
        rhs,
        |j| neg_pow(j as u32 + 1),
        Some(big_n.clone()),
    )
}

fn build_setcover<T: Scalar>(
    ground: usize,
    subsets: &[Vec<usize>],
    coverable: bool,
    elem_coef: impl Fn(usize, usize) -> Result<T>,
    elem_rhs: impl Fn(usize) -> Result<T>,
    bound_coef: impl Fn(usize) -> Result<T>,
    scale: Option<T>,
) -> Result<SetCoverReduction<T>> {
    let n = subsets.len();
    let rows = ground + n;
    let mut ap = vec![vec![ExtScalar::NegInf; n]; rows];
    let mut b_minus = Vec::with_capacity(rows);
    for i in 0..ground {
        for (j, s) in subsets.iter().enumerate() {
            if s.contains(&i) {
                ap[i][j] = ExtScalar::Finite(elem_coef(i, j)?);
            }
        }
        b_minus.push(ExtScalar::Finite(elem_rhs(i)?));
    }
    for j in 0..n {
        ap[ground + j][j] = ExtScalar::Finite(bound_coef(j)?);
        b_minus.push(ExtScalar::zero());
    }
    let c = (0..n)
        .map(|k| (0..n).map(|j| if j == k { ExtScalar::zero() } else { ExtScalar::NegInf }).collect())
        .collect();
    let base = Instance::new(
        TropMatrix::from_dense(n, ap)?,
        TropMatrix::neg_inf(rows, n),
        TropMatrix::from_dense(n, c)?,
        vec![1; n],
        vec![0; n],
    )?;
    let instance = InhomogeneousInstance::new(
        base,
        TropVector::neg_inf(rows),
        TropVector::new(b_minus),
        TropVector::neg_inf(n),
    )?;
    Ok(SetCoverReduction { instance, coverable, scale })
}

/// Size of a smallest cover by exhaustive search, `None` if there is none.
pub fn min_cover_size(ground: usize, subsets: &[Vec<usize>]) -> Option<usize> {
    let n = subsets.len();
    assert!(n < 32, "exhaustive cover search is limited to 31 subsets");
    let masks: Vec<u64> = subsets.iter().map(|s| s.iter().fold(0u64, |acc, &e| acc | 1 << e)).collect();
    let full = if ground == 64 { u64::MAX } else { (1u64 << ground) - 1 };
    (0u32..1 << n)
        .filter(|pick| {
            let cover = (0..n).filter(|j| pick >> j & 1 == 1).fold(0u64, |acc, j| acc | masks[j]);
            cover & full == full
        })
        .map(|pick| pick.count_ones() as usize)
        .min()
}
