//! Commutative Frobenius algebras over ℤ presented by structure constants,
//! and their twists by invertible elements.

use std::fmt;

use thiserror::Error;

use crate::linalg::{solve_integer, IntMatrix, LinalgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unknown builtin algebra `{0}` (expected `kh` or `lee`)")]
    UnknownBuiltin(String),
    #[error("element {0} is not invertible")]
    NotInvertible(AlgebraElement),
    #[error("element has {got} coordinates but the algebra has rank {rank}")]
    ElementLength { got: usize, rank: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Coordinates of an element in the algebra's fixed basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement(pub Vec<i64>);

impl AlgebraElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        AlgebraElement(v)
    }
}

impl From<Vec<i64>> for AlgebraElement {
    fn from(v: Vec<i64>) -> Self {
        AlgebraElement(v)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxiomFailure {
    Commutativity,
    Associativity,
    LeftUnit,
    RightUnit,
    Coassociativity,
    LeftCounit,
    RightCounit,
    /// `Δ∘μ ≠ (μ⊗id)∘(id⊗Δ)`
    FrobeniusLeft,
    /// `Δ∘μ ≠ (id⊗μ)∘(Δ⊗id)`
    FrobeniusRight,
}

/// Structure constants with index conventions `mult[i][j][k]` = coefficient
/// of `e_k` in `e_i·e_j`, and `comult[i][j][k]` = coefficient of `e_j⊗e_k`
/// in `Δ(e_i)`. Both are stored flattened, `k` fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusAlgebra {
    rank: usize,
    unit: Vec<i64>,
    counit: Vec<i64>,
    mult: Vec<i64>,
    comult: Vec<i64>,
}

impl FrobeniusAlgebra {
    pub fn new(
        unit: Vec<i64>,
        counit: Vec<i64>,
        mult: Vec<Vec<Vec<i64>>>,
        comult: Vec<Vec<Vec<i64>>>,
    ) -> Result<Self, AlgebraError> {
        let r = unit.len();
        if r == 0 {
            return Err(AlgebraError::Shape("rank must be at least 1".into()));
        }
        if counit.len() != r {
            return Err(AlgebraError::Shape(format!("counit has length {}, expected {r}", counit.len())));
        }
        let flatten = |name: &str, t: Vec<Vec<Vec<i64>>>| -> Result<Vec<i64>, AlgebraError> {
            let ok = t.len() == r && t.iter().all(|m| m.len() == r && m.iter().all(|v| v.len() == r));
            if !ok {
                return Err(AlgebraError::Shape(format!("{name} must be an {r}x{r}x{r} tensor")));
            }
            Ok(t.into_iter().flatten().flatten().collect())
        };
        let mult = flatten("mult", mult)?;
        let comult = flatten("comult", comult)?;
        Ok(FrobeniusAlgebra { rank: r, unit, counit, mult, comult })
    }

    /// `kh`: basis {1, X} with X² = 0. `lee`: basis {1, X} with X² = 1.
    pub fn builtin(name: &str) -> Result<Self, AlgebraError> {
        let x_squared = match name {
            "kh" => 0,
            "lee" => 1,
            _ => return Err(AlgebraError::UnknownBuiltin(name.to_string())),
        };
        // 1·1 = 1, 1·X = X·1 = X, X·X = x_squared·1
        let mult = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![x_squared, 0]]];
        // Δ(1) = 1⊗X + X⊗1, Δ(X) = X⊗X + x_squared·1⊗1
        let comult = vec![vec![vec![0, 1], vec![1, 0]], vec![vec![x_squared, 0], vec![0, 1]]];
        FrobeniusAlgebra::new(vec![1, 0], vec![0, 1], mult, comult)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement(self.unit.clone())
    }

    pub fn counit(&self) -> &[i64] {
        &self.counit
    }

    pub fn mult_coeff(&self, i: usize, j: usize, k: usize) -> i64 {
        let r = self.rank;
        self.mult[(i * r + j) * r + k]
    }

    pub fn comult_coeff(&self, i: usize, j: usize, k: usize) -> i64 {
        let r = self.rank;
        self.comult[(i * r + j) * r + k]
    }

    pub fn mult_tensor(&self) -> Vec<Vec<Vec<i64>>> {
        self.unflatten(&self.mult)
    }

    pub fn comult_tensor(&self) -> Vec<Vec<Vec<i64>>> {
        self.unflatten(&self.comult)
    }

    fn unflatten(&self, t: &[i64]) -> Vec<Vec<Vec<i64>>> {
        let r = self.rank;
        t.chunks(r * r).map(|m| m.chunks(r).map(<[i64]>::to_vec).collect()).collect()
    }

    fn check_len(&self, x: &AlgebraElement) -> Result<(), AlgebraError> {
        if x.0.len() != self.rank {
            return Err(AlgebraError::ElementLength { got: x.0.len(), rank: self.rank });
        }
        Ok(())
    }

    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        let r = self.rank;
        let mut out = vec![0; r];
        for i in 0..r {
            for j in 0..r {
                let ab = a.0[i] * b.0[j];
                if ab != 0 {
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += ab * self.mult_coeff(i, j, k);
                    }
                }
            }
        }
        AlgebraElement(out)
    }

    /// `μ: A⊗A → A` as an `r × r²` matrix.
    pub fn mult_matrix(&self) -> IntMatrix {
        let r = self.rank;
        let mut m = IntMatrix::zeros(r, r * r);
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    m[(k, i * r + j)] = self.mult_coeff(i, j, k);
                }
            }
        }
        m
    }

    /// `Δ: A → A⊗A` as an `r² × r` matrix.
    pub fn comult_matrix(&self) -> IntMatrix {
        let r = self.rank;
        let mut m = IntMatrix::zeros(r * r, r);
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    m[(j * r + k, i)] = self.comult_coeff(i, j, k);
                }
            }
        }
        m
    }

    pub fn unit_matrix(&self) -> IntMatrix {
        IntMatrix::column(&self.unit)
    }

    pub fn counit_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(std::slice::from_ref(&self.counit))
    }

    /// Multiplication by `x` as an `r × r` matrix.
    pub fn left_mul_matrix(&self, x: &AlgebraElement) -> IntMatrix {
        let r = self.rank;
        let mut m = IntMatrix::zeros(r, r);
        for i in 0..r {
            let col = self.mul(x, &AlgebraElement::basis(r, i));
            for (k, v) in col.0.into_iter().enumerate() {
                m[(k, i)] = v;
            }
        }
        m
    }

    /// Every axiom of a commutative Frobenius algebra that fails, as an exact
    /// tensor identity.
    pub fn validate_axioms(&self) -> Vec<AxiomFailure> {
        let r = self.rank;
        let id = IntMatrix::identity(r);
        let mu = self.mult_matrix();
        let delta = self.comult_matrix();
        let eta = self.unit_matrix();
        let eps = self.counit_matrix();
        let swap = swap_matrix(r);
        let mut failures = Vec::new();
        let mut expect = |ok: bool, f: AxiomFailure| {
            if !ok {
                failures.push(f);
            }
        };
        expect(&mu * &swap == mu, AxiomFailure::Commutativity);
        expect(&mu * &mu.kron(&id) == &mu * &id.kron(&mu), AxiomFailure::Associativity);
        expect(&mu * &eta.kron(&id) == id, AxiomFailure::LeftUnit);
        expect(&mu * &id.kron(&eta) == id, AxiomFailure::RightUnit);
        expect(&delta.kron(&id) * &delta == &id.kron(&delta) * &delta, AxiomFailure::Coassociativity);
        expect(&eps.kron(&id) * &delta == id, AxiomFailure::LeftCounit);
        expect(&id.kron(&eps) * &delta == id, AxiomFailure::RightCounit);
        let dm = &delta * &mu;
        expect(dm == &mu.kron(&id) * &id.kron(&delta), AxiomFailure::FrobeniusLeft);
        expect(dm == &id.kron(&mu) * &delta.kron(&id), AxiomFailure::FrobeniusRight);
        failures
    }

    /// The integral inverse of `theta`, if one exists.
    pub fn invert(&self, theta: &AlgebraElement) -> Result<Option<AlgebraElement>, AlgebraError> {
        self.check_len(theta)?;
        let m = self.left_mul_matrix(theta);
        Ok(solve_integer(&m, &self.unit)?.map(AlgebraElement))
    }

    /// `θ^k`, with negative powers through the inverse.
    pub fn power(&self, theta: &AlgebraElement, k: i64) -> Result<AlgebraElement, AlgebraError> {
        self.check_len(theta)?;
        let base = if k < 0 {
            self.invert(theta)?.ok_or_else(|| AlgebraError::NotInvertible(theta.clone()))?
        } else {
            theta.clone()
        };
        let mut acc = self.unit();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        Ok(acc)
    }

    /// `A^θ`: same algebra, counit `x ↦ ε(θx)` and comultiplication
    /// `x ↦ Δ(θ⁻¹x)`.
    pub fn twist(&self, theta: &AlgebraElement) -> Result<FrobeniusAlgebra, AlgebraError> {
        self.check_len(theta)?;
        let inv = self.invert(theta)?.ok_or_else(|| AlgebraError::NotInvertible(theta.clone()))?;
        let r = self.rank;
        let counit = self.counit_matrix();
        let new_counit = (&counit * &self.left_mul_matrix(theta)).row(0).to_vec();
        let new_comult_m = &self.comult_matrix() * &self.left_mul_matrix(&inv);
        let mut comult = vec![0; r * r * r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    comult[(i * r + j) * r + k] = new_comult_m[(j * r + k, i)];
                }
            }
        }
        Ok(FrobeniusAlgebra { rank: r, unit: self.unit.clone(), counit: new_counit, mult: self.mult.clone(), comult })
    }

    /// Both comparison squares between `A^θ` and `A` for exponents `p`, `q`.
    pub fn check_twist_comparison(
        &self,
        theta: &AlgebraElement,
        p: i64,
        q: i64,
    ) -> Result<bool, AlgebraError> {
        let twisted = self.twist(theta)?;
        self.check_twist_comparison_against(&twisted, theta, p, q)
    }

    /// As [`check_twist_comparison`](Self::check_twist_comparison) but against
    /// an arbitrary candidate for the twisted algebra:
    /// `Δ∘θ^{p+q−1} = (θ^p⊗θ^q)∘Δ'` and `θ^{p+q}∘μ = μ∘(θ^p⊗θ^q)`.
    pub fn check_twist_comparison_against(
        &self,
        twisted: &FrobeniusAlgebra,
        theta: &AlgebraElement,
        p: i64,
        q: i64,
    ) -> Result<bool, AlgebraError> {
        if twisted.rank != self.rank {
            return Err(AlgebraError::Shape("twisted algebra has a different rank".into()));
        }
        let l = |k: i64| self.power(theta, k).map(|x| self.left_mul_matrix(&x));
        let tp_tq = l(p)?.kron(&l(q)?);
        let split_ok = &self.comult_matrix() * &l(p + q - 1)? == &tp_tq * &twisted.comult_matrix();
        let merge_ok = &l(p + q)? * &twisted.mult_matrix() == &self.mult_matrix() * &tp_tq;
        Ok(split_ok && merge_ok)
    }
}

/// The flip `a⊗b ↦ b⊗a` on `A⊗A`.
fn swap_matrix(r: usize) -> IntMatrix {
    let mut s = IntMatrix::zeros(r * r, r * r);
    for i in 0..r {
        for j in 0..r {
            s[(j * r + i, i * r + j)] = 1;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(v: &[i64]) -> AlgebraElement {
        AlgebraElement(v.to_vec())
    }

    #[test]
    fn builtins_are_frobenius() {
        for name in ["kh", "lee"] {
            assert!(FrobeniusAlgebra::builtin(name).unwrap().validate_axioms().is_empty(), "{name}");
        }
        assert_eq!(
            FrobeniusAlgebra::builtin("foo"),
            Err(AlgebraError::UnknownBuiltin("foo".into()))
        );
    }

    #[test]
    fn builtin_products() {
        let kh = FrobeniusAlgebra::builtin("kh").unwrap();
        let lee = FrobeniusAlgebra::builtin("lee").unwrap();
        assert_eq!(kh.mul(&el(&[0, 1]), &el(&[0, 1])), el(&[0, 0]));
        assert_eq!(lee.mul(&el(&[0, 1]), &el(&[0, 1])), el(&[1, 0]));
    }

    #[test]
    fn zeroed_counit_breaks_counit_law() {
        let kh = FrobeniusAlgebra::builtin("kh").unwrap();
        let bad = FrobeniusAlgebra::new(vec![1, 0], vec![0, 0], kh.mult_tensor(), kh.comult_tensor()).unwrap();
        let f = bad.validate_axioms();
        assert!(f.contains(&AxiomFailure::LeftCounit));
        assert!(f.contains(&AxiomFailure::RightCounit));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            FrobeniusAlgebra::new(vec![1, 0], vec![0], vec![], vec![]),
            Err(AlgebraError::Shape(_))
        ));
        let kh = FrobeniusAlgebra::builtin("kh").unwrap();
        assert!(matches!(
            FrobeniusAlgebra::new(vec![1, 0], vec![0, 1], kh.mult_tensor(), vec![vec![vec![0]]]),
            Err(AlgebraError::Shape(_))
        ));
        assert!(matches!(kh.invert(&el(&[1])), Err(AlgebraError::ElementLength { .. })));
    }

    #[test]
    fn inverses() {
        let kh = FrobeniusAlgebra::builtin("kh").unwrap();
        let lee = FrobeniusAlgebra::builtin("lee").unwrap();
        assert_eq!(kh.invert(&el(&[1, 1])).unwrap(), Some(el(&[1, -1])));
        assert_eq!(lee.invert(&el(&[0, 1])).unwrap(), Some(el(&[0, 1])));
        assert_eq!(kh.invert(&el(&[0, 1])).unwrap(), None);
        // 2 is invertible over ℚ but not over ℤ.
        assert_eq!(kh.invert(&el(&[2, 0])).unwrap(), None);
    }

    #[test]
    fn powers() {
        let kh = FrobeniusAlgebra::builtin("kh").unwrap();
        let t = el(&[1, 1]);
        assert_eq!(kh.power(&t, 0).unwrap(), kh.unit());
        assert_eq!(kh.power(&t, 2).unwrap(), el(&[1, 2]));
        assert_eq!(kh.power(&t, -1).unwrap(), el(&[1, -1]));
        assert!(matches!(kh.power(&el(&[0, 1]), -1), Err(AlgebraError::NotInvertible(_))));
        for k in -3..=3 {
            let a = kh.power(&t, k).unwrap();
            let b = kh.power(&t, -k).unwrap();
            assert_eq!(kh.mul(&a, &b), kh.unit());
        }
    }

    #[test]
    fn twist_examples() {
        let kh = FrobeniusAlgebra::builtin("kh").unwrap();
        assert_eq!(kh.twist(&kh.unit()).unwrap(), kh);
        let t = el(&[1, 1]);
        let tw = kh.twist(&t).unwrap();
        // Δ^θ(1) = 1⊗X + X⊗1 − X⊗X, ε^θ(1) = 1
        assert_eq!(tw.comult_tensor()[0], vec![vec![0, 1], vec![1, -1]]);
        assert_eq!(tw.counit()[0], 1);
        let inv = kh.invert(&t).unwrap().unwrap();
        assert_eq!(tw.twist(&inv).unwrap(), kh);
        assert!(matches!(kh.twist(&el(&[0, 1])), Err(AlgebraError::NotInvertible(_))));
    }

    fn sample_invertibles(a: &FrobeniusAlgebra) -> Vec<AlgebraElement> {
        let mut out = Vec::new();
        for x in -2..=2 {
            for y in -2..=2 {
                let t = el(&[x, y]);
                if a.invert(&t).unwrap().is_some() {
                    out.push(t);
                }
            }
        }
        out
    }

    #[test]
    fn twisting_preserves_axioms_and_composes() {
        for name in ["kh", "lee"] {
            let a = FrobeniusAlgebra::builtin(name).unwrap();
            let thetas = sample_invertibles(&a);
            assert!(thetas.len() >= 2, "{name}");
            for t in &thetas {
                let tw = a.twist(t).unwrap();
                assert!(tw.validate_axioms().is_empty(), "{name} {t}");
                for s in &thetas {
                    assert_eq!(tw.twist(s).unwrap(), a.twist(&a.mul(t, s)).unwrap());
                }
            }
        }
    }

    #[test]
    fn comparison_squares() {
        let kh = FrobeniusAlgebra::builtin("kh").unwrap();
        let t = el(&[1, 1]);
        assert!(kh.check_twist_comparison(&kh.unit(), 3, -2).unwrap());
        assert!(kh.check_twist_comparison(&t, 0, 1).unwrap());
        // Counit twisted but Δ left alone.
        let fake = FrobeniusAlgebra::new(
            vec![1, 0],
            kh.twist(&t).unwrap().counit().to_vec(),
            kh.mult_tensor(),
            kh.comult_tensor(),
        )
        .unwrap();
        assert!(!kh.check_twist_comparison_against(&fake, &t, 0, 1).unwrap());
        assert!(matches!(kh.check_twist_comparison(&el(&[0, 1]), 0, 0), Err(AlgebraError::NotInvertible(_))));
    }

    #[test]
    fn comparison_squares_small_range() {
        for name in ["kh", "lee"] {
            let a = FrobeniusAlgebra::builtin(name).unwrap();
            for t in sample_invertibles(&a) {
                for p in -2..=2 {
                    for q in -2..=2 {
                        assert!(a.check_twist_comparison(&t, p, q).unwrap(), "{name} {t} {p} {q}");
                    }
                }
            }
        }
    }
}
