//! The cube of free modules `V_{D;A}`, its signed chain complex, the
//! comparison maps `θ̂^ν` between twisted and untwisted complexes, and
//! homology over ℤ.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{DiagramError, EdgeId, LinkDiagram, SaddleKind, State};
use crate::frobenius::{AlgebraElement, AlgebraError, AxiomFailure, FrobeniusAlgebra};
use crate::linalg::{self, IntMatrix, LinalgError};
use crate::weights::{all_saddles, check_weight, TwistingWeight, WeightError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CubeError {
    #[error("algebra fails the Frobenius axioms: {0:?}")]
    InvalidAlgebra(Vec<AxiomFailure>),
    #[error("{} cube faces do not commute", .0.len())]
    NonCommuting(Vec<Face>),
    #[error("d∘d is nonzero starting in degree {0}")]
    NotAComplex(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("weight is not a twisting weight ({0} violations)")]
    InvalidWeight(usize),
    #[error("θ̂^ν fails the chain-map identity")]
    NotAChainMap,
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// The square spanned by crossings `c1 < c2` at a state containing neither.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub state: State,
    pub c1: usize,
    pub c2: usize,
}

/// Per state, the tensor legs (ascending canonical id) of `⊗_C A_C`, and per
/// cube edge the structure map `ξ_c`.
#[derive(Clone, Debug)]
pub struct CubeOfModules {
    crossing_count: usize,
    algebra_rank: usize,
    legs: Vec<Vec<EdgeId>>,
    /// `[state mask][crossing]`, `None` when the crossing is in the state.
    maps: Vec<Vec<Option<IntMatrix>>>,
}

impl CubeOfModules {
    pub fn crossing_count(&self) -> usize {
        self.crossing_count
    }

    pub fn algebra_rank(&self) -> usize {
        self.algebra_rank
    }

    pub fn legs(&self, s: State) -> &[EdgeId] {
        &self.legs[s.mask() as usize]
    }

    pub fn module_rank(&self, s: State) -> usize {
        self.algebra_rank.pow(self.legs(s).len() as u32)
    }

    /// `ξ_c : V(S) → V(S ∪ {c})`, or `None` when `c ∈ S`.
    pub fn map(&self, s: State, c: usize) -> Option<&IntMatrix> {
        self.maps[s.mask() as usize][c].as_ref()
    }

    pub fn states(&self) -> impl Iterator<Item = State> {
        State::all(self.crossing_count)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainComplex {
    /// `rank C^i` for `i = 0..=n`.
    pub ranks: Vec<usize>,
    /// `d_i : C^i → C^{i+1}` for `i = 0..n`.
    pub differentials: Vec<IntMatrix>,
}

impl ChainComplex {
    pub fn degrees(&self) -> usize {
        self.ranks.len()
    }

    /// The differential out of degree `i`, zero past the top degree.
    pub fn differential(&self, i: usize) -> IntMatrix {
        self.differentials.get(i).cloned().unwrap_or_else(|| IntMatrix::zeros(0, self.ranks[i]))
    }

    pub fn is_complex(&self) -> Result<bool, CubeError> {
        Ok(self.first_nonzero_square()?.is_none())
    }

    fn first_nonzero_square(&self) -> Result<Option<usize>, CubeError> {
        for i in 0..self.differentials.len().saturating_sub(1) {
            if !self.differentials[i + 1].checked_mul(&self.differentials[i])?.is_zero() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    /// `f_i : source^i → target^i`.
    pub components: Vec<IntMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub degree: usize,
    pub rank: usize,
    pub torsion: Vec<i64>,
}

fn tensor_index(digits: &[usize], r: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * r + d)
}

fn tensor_digits(mut idx: usize, len: usize, r: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = idx % r;
        idx /= r;
    }
    out
}

/// Build every module and structure map. Splits apply `Δ` with the
/// lower-id child as the first factor; merges apply `μ` to the lower-id
/// parent times the higher.
pub fn build_cube(d: &LinkDiagram, a: &FrobeniusAlgebra) -> Result<CubeOfModules, CubeError> {
    let failures = a.validate_axioms();
    if !failures.is_empty() {
        return Err(CubeError::InvalidAlgebra(failures));
    }
    let r = a.rank();
    let table = d.all_resolutions();
    let saddles = all_saddles(d, &table)?;
    let legs: Vec<Vec<EdgeId>> = table.iter().map(|res| res.ids()).collect();

    let maps = d
        .states()
        .map(|s| {
            saddles[s.mask() as usize]
                .iter()
                .enumerate()
                .map(|(c, saddle)| {
                    let saddle = saddle.as_ref()?;
                    let k = legs[s.mask() as usize].len();
                    let m = legs[s.with(c).mask() as usize].len();
                    let mut out = IntMatrix::zeros(r.pow(m as u32), r.pow(k as u32));
                    let mut tgt = vec![0usize; m];
                    for col in 0..out.cols() {
                        let src = tensor_digits(col, k, r);
                        for &(i, j) in &saddle.untouched {
                            tgt[j] = src[i];
                        }
                        match saddle.kind {
                            SaddleKind::Split { parent, children: [c1, c2] } => {
                                for x in 0..r {
                                    for y in 0..r {
                                        let coeff = a.comult_coeff(src[parent], x, y);
                                        if coeff != 0 {
                                            tgt[c1] = x;
                                            tgt[c2] = y;
                                            out[(tensor_index(&tgt, r), col)] += coeff;
                                        }
                                    }
                                }
                            }
                            SaddleKind::Merge { parents: [p1, p2], child } => {
                                for z in 0..r {
                                    let coeff = a.mult_coeff(src[p1], src[p2], z);
                                    if coeff != 0 {
                                        tgt[child] = z;
                                        out[(tensor_index(&tgt, r), col)] += coeff;
                                    }
                                }
                            }
                        }
                    }
                    Some(out)
                })
                .collect()
        })
        .collect();
    Ok(CubeOfModules { crossing_count: d.crossing_count(), algebra_rank: r, legs, maps })
}

/// Faces where `ξ_{c2}∘ξ_{c1} ≠ ξ_{c1}∘ξ_{c2}`.
pub fn non_commuting_faces(cube: &CubeOfModules) -> Vec<Face> {
    let n = cube.crossing_count;
    let mut bad = Vec::new();
    for s in cube.states() {
        let free: Vec<usize> = s.non_members().collect();
        for (i, &c1) in free.iter().enumerate() {
            for &c2 in &free[i + 1..] {
                let one = cube.map(s.with(c1), c2).unwrap() * cube.map(s, c1).unwrap();
                let two = cube.map(s.with(c2), c1).unwrap() * cube.map(s, c2).unwrap();
                if one != two {
                    bad.push(Face { state: s, c1, c2 });
                }
            }
        }
    }
    debug_assert!(bad.iter().all(|f| f.state.len() == n));
    bad
}

/// States of size `i`, ascending by mask, with their offsets in `C^i`.
fn degree_layout(cube: &CubeOfModules) -> Vec<Vec<(State, usize)>> {
    let n = cube.crossing_count;
    let mut layout: Vec<Vec<(State, usize)>> = vec![Vec::new(); n + 1];
    let mut fill = vec![0usize; n + 1];
    for s in cube.states() {
        let i = s.size();
        layout[i].push((s, fill[i]));
        fill[i] += cube.module_rank(s);
    }
    layout
}

fn degree_ranks(cube: &CubeOfModules, layout: &[Vec<(State, usize)>]) -> Vec<usize> {
    layout.iter().map(|states| states.iter().map(|&(s, _)| cube.module_rank(s)).sum()).collect()
}

/// `C^i = ⊕_{|S|=i} V(S)` with `d = Σ ±ξ_c`, sign `(−1)^{#{c' ∈ S : c' < c}}`.
pub fn assemble_complex(cube: &CubeOfModules) -> Result<ChainComplex, CubeError> {
    let bad = non_commuting_faces(cube);
    if !bad.is_empty() {
        return Err(CubeError::NonCommuting(bad));
    }
    let n = cube.crossing_count;
    let layout = degree_layout(cube);
    let ranks = degree_ranks(cube, &layout);
    let mut offset_of = vec![0usize; 1 << n];
    for states in &layout {
        for &(s, off) in states {
            offset_of[s.mask() as usize] = off;
        }
    }
    let mut differentials = Vec::with_capacity(n);
    for i in 0..n {
        let mut di = IntMatrix::zeros(ranks[i + 1], ranks[i]);
        for &(s, col) in &layout[i] {
            for c in s.non_members() {
                let below = s.members().filter(|&m| m < c).count();
                let block = cube.map(s, c).unwrap();
                let row = offset_of[s.with(c).mask() as usize];
                let signed = if below % 2 == 1 { block.scaled(-1) } else { block.clone() };
                di.set_block(row, col, &signed);
            }
        }
        differentials.push(di);
    }
    let complex = ChainComplex { ranks, differentials };
    if let Some(i) = complex.first_nonzero_square()? {
        return Err(CubeError::NotAComplex(i));
    }
    Ok(complex)
}

/// `C(D; A)` in one step.
pub fn complex_of(d: &LinkDiagram, a: &FrobeniusAlgebra) -> Result<ChainComplex, CubeError> {
    assemble_complex(&build_cube(d, a)?)
}

/// Per-degree block-diagonal matrices of `⊗_C θ^{exponent(S, C)}·`.
fn theta_components(
    d: &LinkDiagram,
    a: &FrobeniusAlgebra,
    theta: &AlgebraElement,
    nu: &TwistingWeight,
    sign: i64,
) -> Result<Vec<IntMatrix>, CubeError> {
    nu.check_domain(d)?;
    let cube = build_cube(d, a)?;
    let layout = degree_layout(&cube);
    let ranks = degree_ranks(&cube, &layout);
    let mut out = Vec::with_capacity(layout.len());
    for (states, &rank) in layout.iter().zip(&ranks) {
        let mut f = IntMatrix::zeros(rank, rank);
        for &(s, off) in states {
            let mut block = IntMatrix::identity(1);
            for &v in nu.values(s) {
                let leg = a.left_mul_matrix(&a.power(theta, sign * v)?);
                block = block.kron(&leg);
            }
            f.set_block(off, off, &block);
        }
        out.push(f);
    }
    Ok(out)
}

/// `θ̂^ν : C(D; A^θ) → C(D; A)` without checking `ν`.
pub fn theta_map(
    d: &LinkDiagram,
    a: &FrobeniusAlgebra,
    theta: &AlgebraElement,
    nu: &TwistingWeight,
) -> Result<ChainMap, CubeError> {
    let twisted = a.twist(theta)?;
    Ok(ChainMap {
        source: complex_of(d, &twisted)?,
        target: complex_of(d, a)?,
        components: theta_components(d, a, theta, nu, 1)?,
    })
}

/// `θ̂^ν` for a checked twisting weight, re-verified as a chain map.
pub fn build_theta_iso(
    d: &LinkDiagram,
    a: &FrobeniusAlgebra,
    theta: &AlgebraElement,
    nu: &TwistingWeight,
) -> Result<ChainMap, CubeError> {
    let report = check_weight(d, nu)?;
    if !report.is_empty() {
        return Err(CubeError::InvalidWeight(report.len()));
    }
    let f = theta_map(d, a, theta, nu)?;
    if !verify_chain_map(&f)? {
        return Err(CubeError::NotAChainMap);
    }
    Ok(f)
}

/// The inverse of `θ̂^ν`: exponents `−ν` on every leg, `C(D; A) → C(D; A^θ)`.
pub fn theta_inverse(
    d: &LinkDiagram,
    a: &FrobeniusAlgebra,
    theta: &AlgebraElement,
    nu: &TwistingWeight,
) -> Result<ChainMap, CubeError> {
    let twisted = a.twist(theta)?;
    Ok(ChainMap {
        source: complex_of(d, a)?,
        target: complex_of(d, &twisted)?,
        components: theta_components(d, a, theta, nu, -1)?,
    })
}

fn check_shapes(f: &ChainMap) -> Result<(), CubeError> {
    let (s, t) = (&f.source, &f.target);
    if s.ranks.len() != t.ranks.len() || f.components.len() != s.ranks.len() {
        return Err(CubeError::Shape("complexes and map have different numbers of degrees".into()));
    }
    for (i, m) in f.components.iter().enumerate() {
        if m.shape() != (t.ranks[i], s.ranks[i]) {
            return Err(CubeError::Shape(format!(
                "component {i} is {:?}, expected {:?}",
                m.shape(),
                (t.ranks[i], s.ranks[i])
            )));
        }
    }
    Ok(())
}

/// `f_{i+1}∘d_i = d'_i∘f_i` in every degree.
pub fn verify_chain_map(f: &ChainMap) -> Result<bool, CubeError> {
    check_shapes(f)?;
    for i in 0..f.source.differentials.len() {
        let lhs = f.components[i + 1].checked_mul(&f.source.differentials[i])?;
        let rhs = f.target.differentials[i].checked_mul(&f.components[i])?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A chain map whose every component is invertible over ℤ.
pub fn verify_iso(f: &ChainMap) -> Result<bool, CubeError> {
    if !verify_chain_map(f)? {
        return Ok(false);
    }
    for m in &f.components {
        if m.rows() != m.cols() || !linalg::is_unimodular(m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `H^i = ker d_i / im d_{i−1}`: free rank and torsion invariant factors.
pub fn homology_snf(c: &ChainComplex) -> Result<Vec<HomologyGroup>, CubeError> {
    if let Some(i) = c.first_nonzero_square()? {
        return Err(CubeError::NotAComplex(i));
    }
    for (i, di) in c.differentials.iter().enumerate() {
        if di.shape() != (c.ranks[i + 1], c.ranks[i]) {
            return Err(CubeError::Shape(format!("d_{i} has shape {:?}", di.shape())));
        }
    }
    let factors: Vec<Vec<i64>> =
        c.differentials.iter().map(linalg::invariant_factors).collect::<Result<_, _>>()?;
    Ok((0..c.ranks.len())
        .map(|i| {
            let out_rank = factors.get(i).map_or(0, Vec::len);
            let (in_rank, torsion) = match i.checked_sub(1) {
                Some(p) => (factors[p].len(), factors[p].iter().copied().filter(|&x| x > 1).collect()),
                None => (0, Vec::new()),
            };
            HomologyGroup { degree: i, rank: c.ranks[i] - out_rank - in_rank, torsion }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;
    use crate::weights::construct;

    const TREFOIL: &str = "X 4 2 5 1\nX 6 4 1 3\nX 2 6 3 5\n";

    fn kh() -> FrobeniusAlgebra {
        FrobeniusAlgebra::builtin("kh").unwrap()
    }

    fn theta() -> AlgebraElement {
        AlgebraElement(vec![1, 1])
    }

    #[test]
    fn trefoil_ranks() {
        let d = parse_pd(TREFOIL).unwrap();
        let cube = build_cube(&d, &kh()).unwrap();
        let ranks: Vec<usize> = cube.states().map(|s| cube.module_rank(s)).collect();
        // masks 0..8: ∅, {1}, {2}, {1,2}, {3}, {1,3}, {2,3}, {1,2,3}
        assert_eq!(ranks, vec![4, 2, 2, 4, 2, 4, 4, 8]);
        assert!(non_commuting_faces(&cube).is_empty());
        let c = assemble_complex(&cube).unwrap();
        assert_eq!(c.ranks, vec![4, 6, 12, 8]);
    }

    #[test]
    fn single_crossing_has_positive_sign() {
        let d = parse_pd("X 1 2 2 1").unwrap();
        let a = kh();
        let cube = build_cube(&d, &a).unwrap();
        let c = assemble_complex(&cube).unwrap();
        assert_eq!(c.ranks, vec![2, 4]);
        assert_eq!(c.differentials[0], a.comult_matrix());
    }

    #[test]
    fn merge_leg_order() {
        // ∅ has circles {1,3,5} and {2,4,6}; crossing 0 merges them.
        let d = parse_pd(TREFOIL).unwrap();
        let a = kh();
        let cube = build_cube(&d, &a).unwrap();
        assert_eq!(cube.legs(d.empty_state()), &[EdgeId(1), EdgeId(2)]);
        assert_eq!(cube.map(d.empty_state(), 0).unwrap(), &a.mult_matrix());
    }

    #[test]
    fn broken_algebra_rejected() {
        let d = parse_pd(TREFOIL).unwrap();
        let bad = FrobeniusAlgebra::new(
            vec![1, 0],
            vec![0, 0],
            vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![0, 0]]],
            vec![vec![vec![0, 1], vec![1, 0]], vec![vec![0, 0], vec![0, 1]]],
        )
        .unwrap();
        assert!(matches!(build_cube(&d, &bad), Err(CubeError::InvalidAlgebra(_))));
    }

    #[test]
    fn free_loop_homology() {
        let d = parse_pd("O 1").unwrap();
        let c = complex_of(&d, &kh()).unwrap();
        assert_eq!(c.ranks, vec![2]);
        let h = homology_snf(&c).unwrap();
        assert_eq!(h, vec![HomologyGroup { degree: 0, rank: 2, torsion: vec![] }]);
    }

    #[test]
    fn two_torsion() {
        let c = ChainComplex { ranks: vec![1, 1], differentials: vec![IntMatrix::from_rows(&[vec![2]])] };
        let h = homology_snf(&c).unwrap();
        assert_eq!(h[0], HomologyGroup { degree: 0, rank: 0, torsion: vec![] });
        assert_eq!(h[1], HomologyGroup { degree: 1, rank: 0, torsion: vec![2] });
    }

    #[test]
    fn homology_rejects_non_complex() {
        let one = IntMatrix::from_rows(&[vec![1]]);
        let c = ChainComplex { ranks: vec![1, 1, 1], differentials: vec![one.clone(), one] };
        assert_eq!(homology_snf(&c), Err(CubeError::NotAComplex(0)));
    }

    #[test]
    fn trefoil_iso_and_inverse() {
        let d = parse_pd(TREFOIL).unwrap();
        let a = kh();
        let nu = construct(&d).unwrap();
        let f = build_theta_iso(&d, &a, &theta(), &nu).unwrap();
        assert!(verify_iso(&f).unwrap());
        let g = theta_inverse(&d, &a, &theta(), &nu).unwrap();
        assert!(verify_chain_map(&g).unwrap());
        for (fi, gi) in f.components.iter().zip(&g.components) {
            assert_eq!(fi * gi, IntMatrix::identity(fi.rows()));
        }
        assert_eq!(homology_snf(&f.source).unwrap(), homology_snf(&f.target).unwrap());
    }

    #[test]
    fn unit_theta_gives_identity() {
        let d = parse_pd(TREFOIL).unwrap();
        let a = kh();
        let nu = construct(&d).unwrap();
        let f = build_theta_iso(&d, &a, &a.unit(), &nu).unwrap();
        for m in &f.components {
            assert_eq!(m, &IntMatrix::identity(m.rows()));
        }
    }

    #[test]
    fn zero_weight_is_not_a_chain_map() {
        let d = parse_pd(TREFOIL).unwrap();
        let a = kh();
        let zero = TwistingWeight::zero(&d);
        assert!(!verify_chain_map(&theta_map(&d, &a, &theta(), &zero).unwrap()).unwrap());
        assert!(matches!(build_theta_iso(&d, &a, &theta(), &zero), Err(CubeError::InvalidWeight(_))));
    }

    #[test]
    fn zeroed_component_breaks_chain_map() {
        let d = parse_pd(TREFOIL).unwrap();
        let a = kh();
        let nu = construct(&d).unwrap();
        let mut f = build_theta_iso(&d, &a, &theta(), &nu).unwrap();
        let (r, c) = f.components[1].shape();
        f.components[1] = IntMatrix::zeros(r, c);
        assert!(!verify_chain_map(&f).unwrap());
        assert!(!verify_iso(&f).unwrap());
    }

    #[test]
    fn identity_is_iso() {
        let d = parse_pd(TREFOIL).unwrap();
        let c = complex_of(&d, &kh()).unwrap();
        let f = ChainMap {
            source: c.clone(),
            target: c.clone(),
            components: c.ranks.iter().map(|&r| IntMatrix::identity(r)).collect(),
        };
        assert!(verify_iso(&f).unwrap());
    }
}
