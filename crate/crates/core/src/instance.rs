//! Problem data: `minimize (C ⊗ x)^{⊗μ⁺} ⊘ x^{⊗μ⁻}` subject to
//! `A⁺ ⊗ x ≥ A⁻ ⊗ x`, plus validation, homogenization and the brute-force
//! degeneracy test.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, DEFAULT_TOL};
use crate::trop::{mat_vec, multi_power, trop_det_with, ExtScalar, TropMatrix, TropVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    a_plus: TropMatrix<T>,
    a_minus: TropMatrix<T>,
    c: TropMatrix<T>,
    mu_plus: Vec<u64>,
    mu_minus: Vec<u64>,
    a: TropMatrix<T>,
    tol: f64,
}

impl<T: Scalar> Instance<T> {
    pub fn new(
        a_plus: TropMatrix<T>,
        a_minus: TropMatrix<T>,
        c: TropMatrix<T>,
        mu_plus: Vec<u64>,
        mu_minus: Vec<u64>,
    ) -> Result<Self> {
        let n = c.cols();
        let dim = |expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, got })
            }
        };
        dim(n, a_plus.cols())?;
        dim(n, a_minus.cols())?;
        dim(a_plus.rows(), a_minus.rows())?;
        dim(c.rows(), mu_plus.len())?;
        dim(n, mu_minus.len())?;
        let a = a_plus.join(&a_minus)?;
        Ok(Instance { a_plus, a_minus, c, mu_plus, mu_minus, a, tol: DEFAULT_TOL })
    }

    /// Tolerance used for tightness in float mode.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn n(&self) -> usize {
        self.c.cols()
    }

    pub fn m(&self) -> usize {
        self.a_plus.rows()
    }

    pub fn p(&self) -> usize {
        self.c.rows()
    }

    pub fn a_plus(&self) -> &TropMatrix<T> {
        &self.a_plus
    }

    pub fn a_minus(&self) -> &TropMatrix<T> {
        &self.a_minus
    }

    /// `A⁺ ⊕ A⁻`.
    pub fn a(&self) -> &TropMatrix<T> {
        &self.a
    }

    pub fn c(&self) -> &TropMatrix<T> {
        &self.c
    }

    pub fn mu_plus(&self) -> &[u64] {
        &self.mu_plus
    }

    pub fn mu_minus(&self) -> &[u64] {
        &self.mu_minus
    }

    /// Degree `D = Σ μ⁻`.
    pub fn degree(&self) -> u64 {
        self.mu_minus.iter().sum()
    }

    pub fn degree_plus(&self) -> u64 {
        self.mu_plus.iter().sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.degree() == self.degree_plus()
    }

    pub fn check_balanced(&self) -> Result<()> {
        if self.is_balanced() {
            Ok(())
        } else {
            Err(Error::Unbalanced { plus: self.degree_plus(), minus: self.degree() })
        }
    }

    /// Largest absolute finite coefficient of `A⁺`, `A⁻` and `C`.
    pub fn max_abs(&self) -> Result<T> {
        let a = self.max_abs_constraints()?;
        let c = self.c.max_abs()?;
        Ok(a.max(c))
    }

    /// Largest absolute finite coefficient of `A⁺` and `A⁻`.
    pub fn max_abs_constraints(&self) -> Result<T> {
        Ok(self.a_plus.max_abs()?.max(self.a_minus.max_abs()?))
    }

    /// Finite entries in `A⁺` and `A⁻`.
    pub fn r_a(&self) -> usize {
        self.a_plus.finite_count() + self.a_minus.finite_count()
    }

    pub fn r_c(&self) -> usize {
        self.c.finite_count()
    }

    /// Columns that must stay finite: `{j : μ⁻_j > 0}`.
    pub fn required_support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.mu_minus[j] > 0).collect()
    }

    /// Sub-instance on the given columns and rows, in the given order.
    pub fn restrict(&self, cols: &[usize], c_rows: &[usize], a_rows: &[usize]) -> Result<Self> {
        Instance::new(
            self.a_plus.submatrix(a_rows, cols),
            self.a_minus.submatrix(a_rows, cols),
            self.c.submatrix(c_rows, cols),
            c_rows.iter().map(|&k| self.mu_plus[k]).collect(),
            cols.iter().map(|&j| self.mu_minus[j]).collect(),
        )
        .map(|i| i.with_tol(self.tol))
    }

    /// Stacked coefficient matrix `[C; A]`.
    pub fn stacked(&self) -> Result<TropMatrix<T>> {
        self.c.vstack(&self.a)
    }
}

/// Objective value `Σ_k μ⁺_k (C⊗x)_k − Σ_j μ⁻_j x_j`.
pub fn objective<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>) -> Result<T> {
    if x.len() != inst.n() {
        return Err(Error::DimensionMismatch { expected: inst.n(), got: x.len() });
    }
    let cx = mat_vec(inst.c(), x)?;
    let num = multi_power(&cx, inst.mu_plus())?;
    let den = multi_power(x, inst.mu_minus())?;
    match (num, den) {
        (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.checked_sub(&b).ok_or(Error::Overflow),
        (ExtScalar::NegInf, _) => Err(Error::UndefinedObjective(
            "a weighted row of C ⊗ x is -inf".into(),
        )),
        (_, ExtScalar::NegInf) => Err(Error::UndefinedObjective(
            "x is -inf at a column with positive muMinus".into(),
        )),
    }
}

/// `A⁺ ⊗ x ≥ A⁻ ⊗ x` rowwise (within tolerance in float mode).
pub fn is_feasible<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>) -> Result<bool> {
    if x.len() != inst.n() {
        return Err(Error::DimensionMismatch { expected: inst.n(), got: x.len() });
    }
    for i in 0..inst.m() {
        let lhs = inst.a_plus().row_max(i, x)?;
        let rhs = inst.a_minus().row_max(i, x)?;
        if rhs.exceeds(&lhs, inst.tol()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InhomogeneousInstance<T> {
    pub base: Instance<T>,
    pub b_plus: TropVector<T>,
    pub b_minus: TropVector<T>,
    pub d: TropVector<T>,
}

impl<T: Scalar> InhomogeneousInstance<T> {
    pub fn new(base: Instance<T>, b_plus: TropVector<T>, b_minus: TropVector<T>, d: TropVector<T>) -> Result<Self> {
        for (expected, got) in [(base.m(), b_plus.len()), (base.m(), b_minus.len()), (base.p(), d.len())] {
            if expected != got {
                return Err(Error::DimensionMismatch { expected, got });
            }
        }
        Ok(InhomogeneousInstance { base, b_plus, b_minus, d })
    }

    /// `(C ⊗ x ⊕ d)^{⊗μ⁺} ⊘ x^{⊗μ⁻}`.
    pub fn objective(&self, x: &TropVector<T>) -> Result<T> {
        let inst = &self.base;
        let mut cx = mat_vec(inst.c(), x)?.into_entries();
        for (v, d) in cx.iter_mut().zip(self.d.iter()) {
            if d > v {
                *v = d.clone();
            }
        }
        let num = multi_power(&TropVector::new(cx), inst.mu_plus())?;
        let den = multi_power(x, inst.mu_minus())?;
        match (num, den) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.checked_sub(&b).ok_or(Error::Overflow),
            _ => Err(Error::UndefinedObjective("objective is not finite at x".into())),
        }
    }

    /// `A⁺ ⊗ x ⊕ b⁺ ≥ A⁻ ⊗ x ⊕ b⁻`.
    pub fn is_feasible(&self, x: &TropVector<T>) -> Result<bool> {
        let inst = &self.base;
        for i in 0..inst.m() {
            let lhs = inst.a_plus().row_max(i, x)?.max(self.b_plus[i].clone());
            let rhs = inst.a_minus().row_max(i, x)?.max(self.b_minus[i].clone());
            if rhs.exceeds(&lhs, inst.tol()) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Result of homogenization: the new variable sits at column `extra_col`,
/// the appended objective row at `extra_row`.
#[derive(Debug, Clone, PartialEq)]
pub struct Homogenized<T> {
    pub instance: Instance<T>,
    pub extra_col: usize,
    pub extra_row: usize,
}

impl<T: Scalar> Homogenized<T> {
    /// `(x, 0)`.
    pub fn lift(&self, x: &TropVector<T>) -> TropVector<T> {
        let mut e = x.entries().to_vec();
        e.push(ExtScalar::zero());
        TropVector::new(e)
    }

    /// `(−x_{n+1}) ⊗ x`; `None` when the extra coordinate is `-inf`.
    pub fn project(&self, xt: &TropVector<T>) -> Result<Option<TropVector<T>>> {
        let last = match &xt[self.extra_col] {
            ExtScalar::Finite(v) => v.clone(),
            ExtScalar::NegInf => return Ok(None),
        };
        let neg = last.checked_neg().ok_or(Error::Overflow)?;
        let head = TropVector::new(xt.entries()[..self.extra_col].to_vec());
        crate::trop::scale(&neg, &head).map(Some)
    }
}

pub fn homogenize<T: Scalar>(inh: &InhomogeneousInstance<T>) -> Result<Homogenized<T>> {
    let base = &inh.base;
    let n = base.n();
    let a_plus = base.a_plus().with_column(&inh.b_plus)?;
    let a_minus = base.a_minus().with_column(&inh.b_minus)?;
    let mut last = TropVector::neg_inf(n + 1);
    last.set(n, ExtScalar::zero());
    let c = base.c().with_column(&inh.d)?.with_row(&last)?;

    let nu = base.degree() as i128 - base.degree_plus() as i128;
    let mut mu_plus = base.mu_plus().to_vec();
    mu_plus.push(nu.max(0) as u64);
    let mut mu_minus = base.mu_minus().to_vec();
    mu_minus.push((-nu).max(0) as u64);

    let instance = Instance::new(a_plus, a_minus, c, mu_plus, mu_minus)?.with_tol(base.tol());
    debug_assert!(instance.is_balanced());
    Ok(Homogenized { instance, extra_col: n, extra_row: base.p() })
}

/// A connected piece of the pattern graph with index maps into the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Component<T> {
    pub instance: Instance<T>,
    pub cols: Vec<usize>,
    pub c_rows: Vec<usize>,
    pub a_rows: Vec<usize>,
    pub balanced: bool,
}

impl<T: Scalar> Component<T> {
    /// Write a component solution into a full-length vector.
    pub fn embed(&self, sub: &TropVector<T>, full: &mut TropVector<T>) {
        for (k, &j) in self.cols.iter().enumerate() {
            full.set(j, sub[k].clone());
        }
    }

    pub fn project(&self, full: &TropVector<T>) -> TropVector<T> {
        TropVector::new(self.cols.iter().map(|&j| full[j].clone()).collect())
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Split into connected components of the pattern graph on `U ∪ V ∪ W`.
///
/// Components are ordered by their smallest column. Every row must carry a
/// finite entry.
pub fn validate<T: Scalar>(inst: &Instance<T>) -> Result<Vec<Component<T>>> {
    for k in 0..inst.p() {
        if inst.c().row(k).is_empty() {
            return Err(Error::EmptyRow { which: "C", row: k });
        }
    }
    for i in 0..inst.m() {
        if inst.a().row(i).is_empty() {
            return Err(Error::EmptyRow { which: "A", row: i });
        }
    }
    split_components(inst)
}

pub(crate) fn split_components<T: Scalar>(inst: &Instance<T>) -> Result<Vec<Component<T>>> {
    let (n, p) = (inst.n(), inst.p());
    // vertex ids: columns 0..n, C rows n..n+p, A rows n+p..
    let mut uf = UnionFind::new(n + p + inst.m());
    for k in 0..p {
        for (j, _) in inst.c().row(k) {
            uf.union(*j, n + k);
        }
    }
    for i in 0..inst.m() {
        for (j, _) in inst.a().row(i) {
            uf.union(*j, n + p + i);
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut comp_of = vec![usize::MAX; n];
    for j in 0..n {
        let r = uf.find(j);
        let idx = roots.iter().position(|&x| x == r).unwrap_or_else(|| {
            roots.push(r);
            roots.len() - 1
        });
        comp_of[j] = idx;
    }
    let mut out = Vec::with_capacity(roots.len());
    for &r in &roots {
        let cols: Vec<usize> = (0..n).filter(|&j| uf.find(j) == r).collect();
        let c_rows: Vec<usize> = (0..p).filter(|&k| uf.find(n + k) == r).collect();
        let a_rows: Vec<usize> = (0..inst.m()).filter(|&i| uf.find(n + p + i) == r).collect();
        let sub = inst.restrict(&cols, &c_rows, &a_rows)?;
        let balanced = sub.is_balanced();
        out.push(Component { instance: sub, cols, c_rows, a_rows, balanced });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegeneracyCap {
    pub max_side: usize,
    pub max_submatrices: u64,
}

impl Default for DegeneracyCap {
    fn default() -> Self {
        DegeneracyCap { max_side: 7, max_submatrices: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Degeneracy {
    NonDegenerate,
    /// Rows index the stacked matrix `[C; A]`.
    Degenerate { rows: Vec<usize>, cols: Vec<usize> },
    CapExceeded,
}

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    r
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order; stops
/// early when `f` returns true.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if k > n {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return true;
        }
        let mut i = k;
        let pos = loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if idx[i] < i + n - k {
                break i;
            }
        };
        idx[pos] += 1;
        let i = pos;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Enumerate every square submatrix of `[C; A]` and look for a singular one
/// with finite determinant.
pub fn degeneracy_check_bruteforce<T: Scalar>(inst: &Instance<T>, cap: DegeneracyCap) -> Result<Degeneracy> {
    let q = inst.stacked()?;
    let (rows, n) = (q.rows(), q.cols());
    let side = rows.min(n);
    if side > cap.max_side {
        return Ok(Degeneracy::CapExceeded);
    }
    let total: u64 = (2..=side).map(|s| binom(rows, s).saturating_mul(binom(n, s))).sum();
    if total > cap.max_submatrices {
        return Ok(Degeneracy::CapExceeded);
    }
    let dense = q.dense();
    let mut err = None;
    let mut found = None;
    for s in 2..=side {
        let hit = for_each_combination(rows, s, |rsel| {
            for_each_combination(n, s, |csel| {
                // an all -inf row or column forces det = -inf
                if rsel.iter().any(|&i| csel.iter().all(|&j| !dense[i][j].is_finite()))
                    || csel.iter().any(|&j| rsel.iter().all(|&i| !dense[i][j].is_finite()))
                {
                    return false;
                }
                match trop_det_with(&q.submatrix(rsel, csel), side, inst.tol()) {
                    Ok(d) if d.singular => {
                        found = Some((rsel.to_vec(), csel.to_vec()));
                        true
                    }
                    Ok(_) => false,
                    Err(e) => {
                        err = Some(e);
                        true
                    }
                }
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        if hit {
            let (rows, cols) = found.expect("hit implies witness");
            return Ok(Degeneracy::Degenerate { rows, cols });
        }
    }
    Ok(Degeneracy::NonDegenerate)
}
