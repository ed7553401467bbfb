//! Max-plus scalars, vectors and sparse matrices.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, DEFAULT_TOL};

/// Default side limit for determinant enumeration.
pub const DET_CAP: usize = 10;

/// An element of the max-plus semiring: a finite value or the tropical zero.
///
/// The derived order puts `NegInf` below every finite value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtScalar<T> {
    NegInf,
    Finite(T),
}

impl<T: Scalar> ExtScalar<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtScalar::Finite(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            ExtScalar::Finite(v) => Some(v),
            ExtScalar::NegInf => None,
        }
    }

    pub fn zero() -> Self {
        ExtScalar::Finite(T::zero())
    }

    pub fn from_i64(v: i64) -> Self {
        ExtScalar::Finite(T::from_i64(v))
    }

    /// Tightness comparison; two `NegInf` are tied.
    pub fn tied(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.tied(b, tol),
            (ExtScalar::NegInf, ExtScalar::NegInf) => true,
            _ => false,
        }
    }

    pub fn exceeds(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.exceeds(b, tol),
            (ExtScalar::Finite(_), ExtScalar::NegInf) => true,
            _ => false,
        }
    }
}

impl<T: Scalar> fmt::Display for ExtScalar<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtScalar::NegInf => f.write_str("-inf"),
            ExtScalar::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// A nonnegative quantity that may be `+inf`: distances, step sizes, gaps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extent<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> Extent<T> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Extent::Infinity)
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Extent::Finite(v) => Some(v),
            Extent::Infinity => None,
        }
    }

    pub fn min_with(self, v: T) -> Self {
        match self {
            Extent::Finite(cur) if cur <= v => Extent::Finite(cur),
            _ => Extent::Finite(v),
        }
    }
}

impl<T: Scalar> fmt::Display for Extent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(v) => write!(f, "{v}"),
            Extent::Infinity => f.write_str("inf"),
        }
    }
}

pub fn trop_add<T: Scalar>(a: &ExtScalar<T>, b: &ExtScalar<T>) -> ExtScalar<T> {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn trop_mul<T: Scalar>(a: &ExtScalar<T>, b: &ExtScalar<T>) -> Result<ExtScalar<T>> {
    match (a, b) {
        (ExtScalar::Finite(x), ExtScalar::Finite(y)) => {
            x.checked_add(y).map(ExtScalar::Finite).ok_or(Error::Overflow)
        }
        _ => Ok(ExtScalar::NegInf),
    }
}

pub fn trop_div<T: Scalar>(a: &ExtScalar<T>, b: &ExtScalar<T>) -> Result<ExtScalar<T>> {
    match (a, b) {
        (_, ExtScalar::NegInf) => Err(Error::DivisionByNegInf),
        (ExtScalar::NegInf, _) => Ok(ExtScalar::NegInf),
        (ExtScalar::Finite(x), ExtScalar::Finite(y)) => {
            x.checked_sub(y).map(ExtScalar::Finite).ok_or(Error::Overflow)
        }
    }
}

/// `a ⊗ b` where `b` is a finite matrix coefficient.
pub(crate) fn term<T: Scalar>(coef: &T, x: &ExtScalar<T>) -> Result<ExtScalar<T>> {
    match x {
        ExtScalar::Finite(v) => coef.checked_add(v).map(ExtScalar::Finite).ok_or(Error::Overflow),
        ExtScalar::NegInf => Ok(ExtScalar::NegInf),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TropVector<T>(Vec<ExtScalar<T>>);

impl<T: Scalar> TropVector<T> {
    pub fn new(entries: Vec<ExtScalar<T>>) -> Self {
        TropVector(entries)
    }

    pub fn from_finite(values: Vec<T>) -> Self {
        TropVector(values.into_iter().map(ExtScalar::Finite).collect())
    }

    pub fn neg_inf(n: usize) -> Self {
        TropVector(vec![ExtScalar::NegInf; n])
    }

    pub fn zeros(n: usize) -> Self {
        TropVector(vec![ExtScalar::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[ExtScalar<T>] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<ExtScalar<T>> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ExtScalar<T>> {
        self.0.iter()
    }

    pub fn set(&mut self, j: usize, v: ExtScalar<T>) {
        self.0[j] = v;
    }

    pub fn is_all_finite(&self) -> bool {
        self.0.iter().all(ExtScalar::is_finite)
    }

    /// `x + delta * chi_J`.
    pub fn shifted(&self, cols: &[usize], delta: &T) -> Result<Self> {
        let mut out = self.clone();
        for &j in cols {
            if let ExtScalar::Finite(v) = &out.0[j] {
                out.0[j] = ExtScalar::Finite(v.checked_add(delta).ok_or(Error::Overflow)?);
            }
        }
        Ok(out)
    }

    /// Largest finite entry.
    pub fn max_finite(&self) -> Option<&T> {
        self.0.iter().filter_map(ExtScalar::finite).max()
    }

    pub fn min_finite(&self) -> Option<&T> {
        self.0.iter().filter_map(ExtScalar::finite).min()
    }
}

impl<T> Index<usize> for TropVector<T> {
    type Output = ExtScalar<T>;

    fn index(&self, j: usize) -> &ExtScalar<T> {
        &self.0[j]
    }
}

impl<T: Scalar> fmt::Display for TropVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (j, v) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Sparse max-plus matrix: each row keeps its finite entries sorted by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, T)>>,
    finite: usize,
}

impl<T: Scalar> TropMatrix<T> {
    pub fn neg_inf(rows: usize, cols: usize) -> Self {
        TropMatrix { rows, cols, data: vec![Vec::new(); rows], finite: 0 }
    }

    pub fn from_dense(cols: usize, dense: Vec<Vec<ExtScalar<T>>>) -> Result<Self> {
        let rows = dense.len();
        let mut m = Self::neg_inf(rows, cols);
        for (i, row) in dense.into_iter().enumerate() {
            check_len(cols, row.len())?;
            for (j, v) in row.into_iter().enumerate() {
                if let ExtScalar::Finite(v) = v {
                    m.data[i].push((j, v));
                    m.finite += 1;
                }
            }
        }
        Ok(m)
    }

    /// Convenience for literals: `None` is `-inf`.
    pub fn from_options(cols: usize, dense: Vec<Vec<Option<T>>>) -> Result<Self> {
        Self::from_dense(
            cols,
            dense
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.map_or(ExtScalar::NegInf, ExtScalar::Finite)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of finite entries.
    pub fn finite_count(&self) -> usize {
        self.finite
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> ExtScalar<T> {
        match self.data[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(pos) => ExtScalar::Finite(self.data[i][pos].1.clone()),
            Err(_) => ExtScalar::NegInf,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: ExtScalar<T>) {
        let row = &mut self.data[i];
        match (row.binary_search_by_key(&j, |(c, _)| *c), v) {
            (Ok(pos), ExtScalar::Finite(v)) => row[pos].1 = v,
            (Ok(pos), ExtScalar::NegInf) => {
                row.remove(pos);
                self.finite -= 1;
            }
            (Err(pos), ExtScalar::Finite(v)) => {
                row.insert(pos, (j, v));
                self.finite += 1;
            }
            (Err(_), ExtScalar::NegInf) => {}
        }
    }

    pub fn dense(&self) -> Vec<Vec<ExtScalar<T>>> {
        (0..self.rows)
            .map(|i| {
                let mut r = vec![ExtScalar::NegInf; self.cols];
                for (j, v) in &self.data[i] {
                    r[*j] = ExtScalar::Finite(v.clone());
                }
                r
            })
            .collect()
    }

    /// Entrywise maximum.
    pub fn join(&self, other: &Self) -> Result<Self> {
        check_len(self.rows, other.rows)?;
        check_len(self.cols, other.cols)?;
        let mut out = self.clone();
        for i in 0..other.rows {
            for (j, v) in &other.data[i] {
                let cur = out.get(i, *j);
                let cand = ExtScalar::Finite(v.clone());
                if cand > cur {
                    out.set(i, *j, cand);
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute value over the finite entries (zero when none).
    pub fn max_abs(&self) -> Result<T> {
        let mut best = T::zero();
        for row in &self.data {
            for (_, v) in row {
                let a = v.checked_abs().ok_or(Error::Overflow)?;
                if a > best {
                    best = a;
                }
            }
        }
        Ok(best)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::neg_inf(rows.len(), cols.len());
        for (ni, &i) in rows.iter().enumerate() {
            for (nj, &j) in cols.iter().enumerate() {
                out.set(ni, nj, self.get(i, j));
            }
        }
        out
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        check_len(self.cols, other.cols)?;
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(TropMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
            finite: self.finite + other.finite,
        })
    }

    /// Append a column on the right.
    pub fn with_column(&self, col: &TropVector<T>) -> Result<Self> {
        check_len(self.rows, col.len())?;
        let mut out = self.clone();
        out.cols += 1;
        for i in 0..self.rows {
            out.set(i, self.cols, col[i].clone());
        }
        Ok(out)
    }

    pub fn with_row(&self, row: &TropVector<T>) -> Result<Self> {
        check_len(self.cols, row.len())?;
        let mut out = self.clone();
        out.rows += 1;
        out.data.push(Vec::new());
        for j in 0..self.cols {
            out.set(self.rows, j, row[j].clone());
        }
        Ok(out)
    }

    /// For each column, the rows holding a finite entry in it.
    pub fn column_rows(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            for (j, _) in row {
                out[*j].push(i);
            }
        }
        out
    }

    /// `(A ⊗ x)_i`.
    pub fn row_max(&self, i: usize, x: &TropVector<T>) -> Result<ExtScalar<T>> {
        let mut best = ExtScalar::NegInf;
        for (j, a) in &self.data[i] {
            let t = term(a, &x[*j])?;
            if t > best {
                best = t;
            }
        }
        Ok(best)
    }
}

pub fn mat_vec<T: Scalar>(a: &TropMatrix<T>, x: &TropVector<T>) -> Result<TropVector<T>> {
    check_len(a.cols(), x.len())?;
    (0..a.rows()).map(|i| a.row_max(i, x)).collect::<Result<Vec<_>>>().map(TropVector)
}

pub fn vec_join<T: Scalar>(x: &TropVector<T>, y: &TropVector<T>) -> Result<TropVector<T>> {
    check_len(x.len(), y.len())?;
    Ok(TropVector(x.iter().zip(y.iter()).map(|(a, b)| trop_add(a, b)).collect()))
}

pub fn vec_meet<T: Scalar>(x: &TropVector<T>, y: &TropVector<T>) -> Result<TropVector<T>> {
    check_len(x.len(), y.len())?;
    Ok(TropVector(x.iter().zip(y.iter()).map(|(a, b)| a.min(b).clone()).collect()))
}

/// `x^{⊗μ} = Σ μ_j x_j`; zero exponents ignore `-inf` entries.
pub fn multi_power<T: Scalar>(x: &TropVector<T>, mu: &[u64]) -> Result<ExtScalar<T>> {
    check_len(x.len(), mu.len())?;
    let mut acc = T::zero();
    for (v, &k) in x.iter().zip(mu) {
        if k == 0 {
            continue;
        }
        match v {
            ExtScalar::NegInf => return Ok(ExtScalar::NegInf),
            ExtScalar::Finite(v) => {
                let k = i64::try_from(k).map_err(|_| Error::Overflow)?;
                let p = v.checked_mul_int(k).ok_or(Error::Overflow)?;
                acc = acc.checked_add(&p).ok_or(Error::Overflow)?;
            }
        }
    }
    Ok(ExtScalar::Finite(acc))
}

pub fn scale<T: Scalar>(alpha: &T, x: &TropVector<T>) -> Result<TropVector<T>> {
    x.iter().map(|v| term(alpha, v)).collect::<Result<Vec<_>>>().map(TropVector)
}

pub fn support<T: Scalar>(x: &TropVector<T>) -> Vec<usize> {
    x.iter().enumerate().filter(|(_, v)| v.is_finite()).map(|(j, _)| j).collect()
}

pub fn trop_distance<T: Scalar>(x: &TropVector<T>, y: &TropVector<T>) -> Result<Extent<T>> {
    check_len(x.len(), y.len())?;
    let mut best = T::zero();
    for (a, b) in x.iter().zip(y.iter()) {
        match (a, b) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => {
                let d = a.checked_sub(b).and_then(|d| d.checked_abs()).ok_or(Error::Overflow)?;
                if d > best {
                    best = d;
                }
            }
            (ExtScalar::NegInf, ExtScalar::NegInf) => {}
            _ => return Ok(Extent::Infinity),
        }
    }
    Ok(Extent::Finite(best))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetResult<T> {
    pub value: ExtScalar<T>,
    pub singular: bool,
    /// Up to two optimal permutations, `perm[row] = col`.
    pub witnesses: Vec<Vec<usize>>,
}

pub fn trop_det<T: Scalar>(p: &TropMatrix<T>) -> Result<DetResult<T>> {
    trop_det_with(p, DET_CAP, DEFAULT_TOL)
}

/// Tropical determinant by enumerating every permutation in Heap's order.
pub fn trop_det_with<T: Scalar>(p: &TropMatrix<T>, cap: usize, tol: f64) -> Result<DetResult<T>> {
    let n = p.rows();
    check_len(n, p.cols())?;
    if n > cap {
        return Err(Error::SizeExceeded { side: n, cap });
    }
    let dense = p.dense();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = ExtScalar::NegInf;
    let mut witnesses: Vec<Vec<usize>> = Vec::new();

    let mut visit = |perm: &[usize]| -> Result<()> {
        let mut sum = ExtScalar::zero();
        for (i, &j) in perm.iter().enumerate() {
            sum = trop_mul(&sum, &dense[i][j])?;
            if !sum.is_finite() {
                return Ok(());
            }
        }
        if sum.exceeds(&best, tol) {
            best = sum;
            witnesses.clear();
            witnesses.push(perm.to_vec());
        } else if sum.tied(&best, tol) && witnesses.len() < 2 {
            witnesses.push(perm.to_vec());
        }
        Ok(())
    };

    visit(&perm)?;
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm)?;
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let singular = best.is_finite() && witnesses.len() >= 2;
    if !best.is_finite() {
        witnesses.clear();
    }
    Ok(DetResult { value: best, singular, witnesses })
}

/// Tropical determinant by dynamic programming over column subsets, counting
/// optimal permutations up to two. Returns `(value, singular)`.
pub fn trop_det_dp<T: Scalar>(p: &TropMatrix<T>, tol: f64) -> Result<(ExtScalar<T>, bool)> {
    let n = p.rows();
    check_len(n, p.cols())?;
    if n >= 24 {
        return Err(Error::SizeExceeded { side: n, cap: 23 });
    }
    let dense = p.dense();
    let full = 1usize << n;
    let mut best: Vec<ExtScalar<T>> = vec![ExtScalar::NegInf; full];
    let mut count = vec![0u8; full];
    best[0] = ExtScalar::zero();
    count[0] = 1;
    for mask in 0..full {
        if count[mask] == 0 {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == n {
            continue;
        }
        for col in 0..n {
            if mask & (1 << col) != 0 || !dense[row][col].is_finite() {
                continue;
            }
            let cand = trop_mul(&best[mask], &dense[row][col])?;
            let next = mask | (1 << col);
            if count[next] == 0 || cand.exceeds(&best[next], tol) {
                best[next] = cand;
                count[next] = count[mask];
            } else if cand.tied(&best[next], tol) {
                count[next] = (count[next] + count[mask]).min(2);
            }
        }
    }
    let value = best[full - 1].clone();
    Ok((value.clone(), value.is_finite() && count[full - 1] >= 2))
}
