//! Dense integer matrices and Smith-normal-form machinery over ℤ.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("integer overflow during elimination")]
    Overflow,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Row-major dense integer matrix.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix { rows: r, cols: c, data: rows.concat() }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    /// Column vector.
    pub fn column(v: &[i64]) -> Self {
        IntMatrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, k: i64) -> Self {
        IntMatrix { data: self.data.iter().map(|x| x * k).collect(), ..self.clone() }
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs[(k, j)];
                    if b != 0 {
                        let prod = a.checked_mul(b).ok_or(LinalgError::Overflow)?;
                        let cell = &mut out.data[i * rhs.cols + j];
                        *cell = cell.checked_add(prod).ok_or(LinalgError::Overflow)?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Kronecker product; the right factor's index varies fastest.
    pub fn kron(&self, rhs: &IntMatrix) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0 {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Copy `block` into `self` with its top-left corner at `(r, c)`.
    pub fn set_block(&mut self, r: usize, c: usize, block: &IntMatrix) {
        assert!(r + block.rows <= self.rows && c + block.cols <= self.cols);
        for i in 0..block.rows {
            let dst = (r + i) * self.cols + c;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] += k * row[src]`.
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: i64) -> Result<(), LinalgError> {
        if k == 0 {
            return Ok(());
        }
        for j in 0..self.cols {
            let s = self.data[src * self.cols + j];
            if s != 0 {
                let cell = &mut self.data[dst * self.cols + j];
                *cell = s
                    .checked_mul(k)
                    .and_then(|p| cell.checked_add(p))
                    .ok_or(LinalgError::Overflow)?;
            }
        }
        Ok(())
    }

    /// `col[dst] += k * col[src]`.
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: i64) -> Result<(), LinalgError> {
        if k == 0 {
            return Ok(());
        }
        for i in 0..self.rows {
            let s = self.data[i * self.cols + src];
            if s != 0 {
                let cell = &mut self.data[i * self.cols + dst];
                *cell = s
                    .checked_mul(k)
                    .and_then(|p| cell.checked_add(p))
                    .ok_or(LinalgError::Overflow)?;
            }
        }
        Ok(())
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.data[i * self.cols..(i + 1) * self.cols] {
            *x = -*x;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = i64;

    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.checked_mul(rhs).expect("matrix product")
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// A diagonalization `left · A · right = diagonal` by unimodular matrices.
///
/// The diagonal entries are not normalized into a divisibility chain; use
/// [`invariant_factors`] for that.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub left: IntMatrix,
    pub diagonal: IntMatrix,
    pub right: IntMatrix,
}

/// Elimination state shared by every entry point. Row operations are mirrored
/// on `left` (any width, same row count); column operations on `right`.
struct Eliminator {
    m: IntMatrix,
    left: Option<IntMatrix>,
    right: Option<IntMatrix>,
}

impl Eliminator {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap_rows(a, b);
        if let Some(l) = &mut self.left {
            l.swap_rows(a, b);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.m.swap_cols(a, b);
        if let Some(r) = &mut self.right {
            r.swap_cols(a, b);
        }
    }

    fn add_row(&mut self, dst: usize, src: usize, k: i64) -> Result<(), LinalgError> {
        self.m.add_row_multiple(dst, src, k)?;
        if let Some(l) = &mut self.left {
            l.add_row_multiple(dst, src, k)?;
        }
        Ok(())
    }

    fn add_col(&mut self, dst: usize, src: usize, k: i64) -> Result<(), LinalgError> {
        self.m.add_col_multiple(dst, src, k)?;
        if let Some(r) = &mut self.right {
            r.add_col_multiple(dst, src, k)?;
        }
        Ok(())
    }

    fn negate_row(&mut self, i: usize) {
        self.m.negate_row(i);
        if let Some(l) = &mut self.left {
            l.negate_row(i);
        }
    }

    /// Smallest nonzero entry of the trailing submatrix, preferring sparse rows.
    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(i64, usize, usize, usize)> = None;
        for i in t..self.m.rows {
            let row = &self.m.row(i)[t..];
            let nnz = row.iter().filter(|&&x| x != 0).count();
            if nnz == 0 {
                continue;
            }
            for (dj, &x) in row.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let key = (x.abs(), nnz, i, t + dj);
                if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                    best = Some(key);
                }
            }
            if best.is_some_and(|b| b.0 == 1 && b.1 == 1) {
                break;
            }
        }
        best.map(|(_, _, i, j)| (i, j))
    }

    /// Reduce to diagonal form; returns the rank.
    fn diagonalize(&mut self) -> Result<usize, LinalgError> {
        let (rows, cols) = self.m.shape();
        let mut t = 0;
        while t < rows.min(cols) {
            let Some((pi, pj)) = self.find_pivot(t) else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let p = self.m[(t, t)];
                let mut dirty = false;
                for i in t + 1..rows {
                    let x = self.m[(i, t)];
                    if x != 0 {
                        self.add_row(i, t, -x.div_euclid(p))?;
                        dirty |= self.m[(i, t)] != 0;
                    }
                }
                for j in t + 1..cols {
                    let x = self.m[(t, j)];
                    if x != 0 {
                        self.add_col(j, t, -x.div_euclid(p))?;
                        dirty |= self.m[(t, j)] != 0;
                    }
                }
                if !dirty {
                    break;
                }
                // A remainder survived; move the smallest entry of row/column t
                // to the pivot position and repeat.
                let mut best = (p.abs(), t, t);
                for i in t + 1..rows {
                    let x = self.m[(i, t)].abs();
                    if x != 0 && x < best.0 {
                        best = (x, i, t);
                    }
                }
                for j in t + 1..cols {
                    let x = self.m[(t, j)].abs();
                    if x != 0 && x < best.0 {
                        best = (x, t, j);
                    }
                }
                self.swap_rows(t, best.1);
                self.swap_cols(t, best.2);
            }
            if self.m[(t, t)] < 0 {
                self.negate_row(t);
            }
            t += 1;
        }
        Ok(t)
    }
}

pub fn diagonalize(a: &IntMatrix) -> Result<Diagonalization, LinalgError> {
    let mut e = Eliminator {
        m: a.clone(),
        left: Some(IntMatrix::identity(a.rows)),
        right: Some(IntMatrix::identity(a.cols)),
    };
    e.diagonalize()?;
    Ok(Diagonalization { left: e.left.unwrap(), diagonal: e.m, right: e.right.unwrap() })
}

/// Nonzero invariant factors `d₁ | d₂ | … | d_rank`, all positive.
pub fn invariant_factors(a: &IntMatrix) -> Result<Vec<i64>, LinalgError> {
    let mut e = Eliminator { m: a.clone(), left: None, right: None };
    let rank = e.diagonalize()?;
    let diag: Vec<i64> = (0..rank).map(|i| e.m[(i, i)]).collect();
    normalize_divisibility(diag)
}

/// Turn the diagonal of a diagonal matrix into its divisibility chain by
/// repeatedly replacing `(a, b)` with `(gcd, lcm)`.
fn normalize_divisibility(mut d: Vec<i64>) -> Result<Vec<i64>, LinalgError> {
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let (a, b) = (d[i], d[j]);
            if b % a != 0 {
                let g = gcd(a, b);
                d[i] = g;
                d[j] = (a / g).checked_mul(b).ok_or(LinalgError::Overflow)?;
            }
        }
    }
    Ok(d)
}

pub fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

pub fn rank(a: &IntMatrix) -> Result<usize, LinalgError> {
    Ok(invariant_factors(a)?.len())
}

/// True iff `a` is square and invertible over ℤ (determinant ±1).
pub fn is_unimodular(a: &IntMatrix) -> Result<bool, LinalgError> {
    if a.rows != a.cols {
        return Ok(false);
    }
    let f = invariant_factors(a)?;
    Ok(f.len() == a.rows && f.iter().all(|&x| x == 1))
}

/// Find an integer solution of `A x = b`, or `None` when none exists.
pub fn solve_integer(a: &IntMatrix, b: &[i64]) -> Result<Option<Vec<i64>>, LinalgError> {
    if b.len() != a.rows {
        return Err(LinalgError::Shape(format!(
            "right-hand side has length {} but the matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    let mut e = Eliminator {
        m: a.clone(),
        left: Some(IntMatrix::column(b)),
        right: Some(IntMatrix::identity(a.cols)),
    };
    let rank = e.diagonalize()?;
    let ub = e.left.unwrap();
    let mut y = vec![0i64; a.cols];
    for i in 0..a.rows {
        let rhs = ub[(i, 0)];
        if i < rank {
            let d = e.m[(i, i)];
            if rhs % d != 0 {
                return Ok(None);
            }
            y[i] = rhs / d;
        } else if rhs != 0 {
            return Ok(None);
        }
    }
    let v = e.right.unwrap();
    let mut x = vec![0i64; a.cols];
    for (i, xi) in x.iter_mut().enumerate() {
        let mut acc: i64 = 0;
        for (j, &yj) in y.iter().enumerate().take(rank) {
            let term = v[(i, j)].checked_mul(yj).ok_or(LinalgError::Overflow)?;
            acc = acc.checked_add(term).ok_or(LinalgError::Overflow)?;
        }
        *xi = acc;
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Determinant by cofactor expansion; only for tiny matrices.
    fn det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum()
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    /// Invariant factors through determinantal divisors: `d_k = Δ_k / Δ_{k-1}`
    /// with `Δ_k` the gcd of all k×k minors.
    fn determinantal_invariants(a: &IntMatrix) -> Vec<i64> {
        let mut out = Vec::new();
        let mut prev = 1i64;
        for k in 1..=a.rows().min(a.cols()) {
            let mut g = 0i64;
            for rs in subsets(a.rows(), k) {
                for cs in subsets(a.cols(), k) {
                    let minor: Vec<Vec<i64>> =
                        rs.iter().map(|&i| cs.iter().map(|&j| a[(i, j)]).collect()).collect();
                    g = gcd(g, det(&minor));
                }
            }
            if g == 0 {
                break;
            }
            out.push(g / prev);
            prev = g;
        }
        out
    }

    #[test]
    fn known_invariants() {
        let a = IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(invariant_factors(&a).unwrap(), vec![2, 6, 12]);
        let a = IntMatrix::from_rows(&[vec![2]]);
        assert_eq!(invariant_factors(&a).unwrap(), vec![2]);
        assert_eq!(invariant_factors(&IntMatrix::zeros(3, 2)).unwrap(), Vec::<i64>::new());
    }

    #[test]
    fn gcd_lcm_normalization() {
        // diag(4, 6) ~ diag(2, 12)
        let a = IntMatrix::from_rows(&[vec![4, 0], vec![0, 6]]);
        assert_eq!(invariant_factors(&a).unwrap(), vec![2, 12]);
    }

    #[test]
    fn solve_detects_parity_obstruction() {
        // 2x = 1 has a rational but no integer solution.
        let a = IntMatrix::from_rows(&[vec![2]]);
        assert_eq!(solve_integer(&a, &[1]).unwrap(), None);
        assert_eq!(solve_integer(&a, &[4]).unwrap(), Some(vec![2]));
        // Inconsistent zero row.
        let a = IntMatrix::from_rows(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(solve_integer(&a, &[1, 2]).unwrap(), None);
    }

    #[test]
    fn unimodular_checks() {
        assert!(is_unimodular(&IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])).unwrap());
        assert!(!is_unimodular(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]])).unwrap());
        assert!(!is_unimodular(&IntMatrix::zeros(2, 3)).unwrap());
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-6i64..7, r * c)
                .prop_map(move |data| IntMatrix::from_vec(r, c, data).unwrap())
        })
    }

    proptest! {
        #[test]
        fn diagonalization_is_a_unimodular_factorization(a in small_matrix()) {
            let dz = diagonalize(&a).unwrap();
            prop_assert_eq!(&(&dz.left * &a) * &dz.right, dz.diagonal.clone());
            prop_assert!(is_unimodular(&dz.left).unwrap());
            prop_assert!(is_unimodular(&dz.right).unwrap());
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    if i != j {
                        prop_assert_eq!(dz.diagonal[(i, j)], 0);
                    }
                }
            }
        }

        #[test]
        fn invariants_match_determinantal_divisors(a in small_matrix()) {
            prop_assert_eq!(invariant_factors(&a).unwrap(), determinantal_invariants(&a));
        }

        #[test]
        fn solutions_satisfy_system(a in small_matrix(), x in proptest::collection::vec(-3i64..4, 4)) {
            let x = &x[..a.cols()];
            let b = a.mul_vec(x);
            let sol = solve_integer(&a, &b).unwrap().expect("b is in the image");
            prop_assert_eq!(a.mul_vec(&sol), b);
        }
    }
}
