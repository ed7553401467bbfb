//! Two-sided system `A⁺ ⊗ x ≥ A⁻ ⊗ x` by a decreasing fixed-point iteration.
//!
//! Starting from `x = 0`, every violated row lowers the columns attaining its
//! right-hand maximum until the row holds with equality. The iterates stay
//! above the greatest solution below `0`, so an entry that drops under
//! `-2nM` can never be finite in any solution and is sent to `-inf`. In
//! integer mode each update lowers an entry by at least one, which bounds
//! the work by `n(2nM + 1)` entry decrements.

use crate::error::{Error, Result};
use crate::instance::{is_feasible, Instance};
use crate::scalar::{NumMode, Scalar};
use crate::trop::{ExtScalar, TropVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityStatus<T> {
    Feasible(TropVector<T>),
    /// The greatest solution is `-inf` at the listed required columns.
    InfeasibleForSupport { x: TropVector<T>, missing: Vec<usize> },
    IterationLimit { x: TropVector<T> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityResult<T> {
    pub status: FeasibilityStatus<T>,
    /// Violated-row visits.
    pub iterations: u64,
    /// Entry decrements.
    pub entries_touched: u64,
}

impl<T: Scalar> FeasibilityResult<T> {
    pub fn solution(&self) -> Option<&TropVector<T>> {
        match &self.status {
            FeasibilityStatus::Feasible(x) => Some(x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityConfig {
    /// Cap on row updates; only enforced in float mode.
    pub max_updates: u64,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        FeasibilityConfig { max_updates: 1_000_000 }
    }
}

pub fn solve_feasibility<T: Scalar>(inst: &Instance<T>, required: &[usize]) -> Result<FeasibilityResult<T>> {
    solve_feasibility_with(inst, required, FeasibilityConfig::default())
}

pub fn solve_feasibility_with<T: Scalar>(
    inst: &Instance<T>,
    required: &[usize],
    cfg: FeasibilityConfig,
) -> Result<FeasibilityResult<T>> {
    let (n, m, tol) = (inst.n(), inst.m(), inst.tol());
    let two_n = i64::try_from(2 * n).map_err(|_| Error::Overflow)?;
    let floor = inst
        .max_abs_constraints()?
        .checked_mul_int(two_n)
        .and_then(|v| v.checked_neg())
        .ok_or(Error::Overflow)?;

    let (ap, am) = (inst.a_plus(), inst.a_minus());
    let col_rows = inst.a().column_rows();
    let mut x = TropVector::zeros(n);
    let mut lhs = (0..m).map(|i| ap.row_max(i, &x)).collect::<Result<Vec<_>>>()?;
    let mut rhs = (0..m).map(|i| am.row_max(i, &x)).collect::<Result<Vec<_>>>()?;
    let mut iterations = 0u64;
    let mut touched = 0u64;
    let mut lowered: Vec<usize> = Vec::new();

    loop {
        let mut any = false;
        for i in 0..m {
            // a -inf right-hand side never exceeds anything
            if !rhs[i].exceeds(&lhs[i], tol) {
                continue;
            }
            any = true;
            iterations += 1;
            if T::MODE == NumMode::Float && iterations > cfg.max_updates {
                return Ok(FeasibilityResult {
                    status: FeasibilityStatus::IterationLimit { x },
                    iterations,
                    entries_touched: touched,
                });
            }
            lowered.clear();
            for (j, a) in am.row(i) {
                let xj = match &x[*j] {
                    ExtScalar::Finite(v) => v,
                    ExtScalar::NegInf => continue,
                };
                let t = ExtScalar::Finite(a.checked_add(xj).ok_or(Error::Overflow)?);
                if t.tied(&rhs[i], tol) {
                    lowered.push(*j);
                }
            }
            for &j in &lowered {
                let a = am.get(i, j);
                let a = a.finite().expect("argmax column has a finite coefficient");
                let next = match &lhs[i] {
                    ExtScalar::Finite(l) => {
                        let v = l.checked_sub(a).ok_or(Error::Overflow)?;
                        if v < floor {
                            ExtScalar::NegInf
                        } else {
                            ExtScalar::Finite(v)
                        }
                    }
                    ExtScalar::NegInf => ExtScalar::NegInf,
                };
                debug_assert!(next < x[j], "iteration must be monotone");
                x.set(j, next);
                touched += 1;
            }
            for &j in &lowered {
                for &r in &col_rows[j] {
                    lhs[r] = ap.row_max(r, &x)?;
                    rhs[r] = am.row_max(r, &x)?;
                }
            }
        }
        if !any {
            break;
        }
    }

    if !is_feasible(inst, &x)? {
        return Err(Error::Internal("feasibility iteration returned an infeasible point".into()));
    }
    let missing: Vec<usize> = required.iter().copied().filter(|&j| !x[j].is_finite()).collect();
    let status = if missing.is_empty() {
        FeasibilityStatus::Feasible(x)
    } else {
        FeasibilityStatus::InfeasibleForSupport { x, missing }
    };
    Ok(FeasibilityResult { status, iterations, entries_touched: touched })
}

/// Shift so the largest finite entry is zero.
pub fn normalize<T: Scalar>(x: &TropVector<T>) -> Result<TropVector<T>> {
    let top = x.max_finite().ok_or(Error::AllNegInf)?;
    let shift = top.checked_neg().ok_or(Error::Overflow)?;
    crate::trop::scale(&shift, x)
}
