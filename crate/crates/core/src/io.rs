//! JSON wire formats for weights, pins, violation reports, algebras,
//! complexes, chain maps and homology tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cube::{ChainComplex, ChainMap, HomologyGroup};
use crate::diagram::{DiagramError, EdgeId, LinkDiagram, State};
use crate::frobenius::{AlgebraElement, AlgebraError, FrobeniusAlgebra};
use crate::linalg::IntMatrix;
use crate::weights::{PartialAssignment, StateWeight, TwistingWeight, Violation, ViolationKind, ViolationReport};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Domain(String),
    #[error("invalid θ `{0}`: expected comma-separated integers")]
    Theta(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleRecord {
    pub id: EdgeId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeId>,
    #[serde(default)]
    pub nu: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRecord {
    pub bits: String,
    pub circles: Vec<CircleRecord>,
}

/// `{"states":[{"bits":"010","circles":[{"id":1,"edges":[...],"nu":0}]}]}`
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightFile {
    pub states: Vec<StateRecord>,
}

pub fn weight_to_file(d: &LinkDiagram, nu: &TwistingWeight) -> Result<WeightFile, IoError> {
    nu.check_domain(d).map_err(|e| IoError::Domain(e.to_string()))?;
    let states = d
        .states()
        .map(|s| {
            let res = d.resolve(s)?;
            let circles = res
                .circles
                .iter()
                .zip(nu.values(s))
                .map(|(c, &v)| CircleRecord { id: c.canonical_id, edges: c.edges.clone(), nu: Some(v) })
                .collect();
            Ok(StateRecord { bits: s.to_bits(), circles })
        })
        .collect::<Result<_, IoError>>()?;
    Ok(WeightFile { states })
}

fn parse_state(d: &LinkDiagram, bits: &str) -> Result<State, IoError> {
    let s = State::parse_bits(bits).ok_or_else(|| IoError::Domain(format!("bad state bits `{bits}`")))?;
    if s.len() != d.crossing_count() {
        return Err(IoError::Domain(format!(
            "state `{bits}` has length {}, diagram has {} crossings",
            s.len(),
            d.crossing_count()
        )));
    }
    Ok(s)
}

/// Pins from a file in weight shape; states, circles and `nu` may be missing.
/// Circle ids (and edge lists when given) must match the diagram.
pub fn pins_from_file(d: &LinkDiagram, file: &WeightFile) -> Result<PartialAssignment, IoError> {
    let mut pins = PartialAssignment::new();
    for rec in &file.states {
        let s = parse_state(d, &rec.bits)?;
        let res = d.resolve(s)?;
        for c in &rec.circles {
            let k = res
                .index_of_id(c.id)
                .ok_or_else(|| IoError::Domain(format!("state {}: no circle with id {}", rec.bits, c.id)))?;
            if !c.edges.is_empty() {
                let mut edges = c.edges.clone();
                edges.sort_unstable();
                if edges != res.circles[k].edges {
                    return Err(IoError::Domain(format!("state {}: circle {} has different edges", rec.bits, c.id)));
                }
            }
            if let Some(v) = c.nu {
                if pins.insert(s, c.id, v).is_some() {
                    return Err(IoError::Domain(format!("state {}: circle {} given twice", rec.bits, c.id)));
                }
            }
        }
    }
    Ok(pins)
}

/// A complete weight; every circle of every state must carry a value.
pub fn weight_from_file(d: &LinkDiagram, file: &WeightFile) -> Result<TwistingWeight, IoError> {
    let pins = pins_from_file(d, file)?;
    let states = d
        .states()
        .map(|s| {
            let ids = d.resolve(s)?.ids();
            let values = ids
                .iter()
                .map(|&id| {
                    pins.get(s, id).ok_or_else(|| {
                        IoError::Domain(format!("state {}: circle {id} has no value", s.to_bits()))
                    })
                })
                .collect::<Result<_, _>>()?;
            Ok(StateWeight { ids, values })
        })
        .collect::<Result<_, IoError>>()?;
    TwistingWeight::from_parts(d, states).map_err(|e| IoError::Domain(e.to_string()))
}

pub fn pins_to_file(d: &LinkDiagram, pins: &PartialAssignment) -> Result<WeightFile, IoError> {
    let mut states: Vec<StateRecord> = Vec::new();
    for (s, id, v) in pins.iter() {
        let res = d.resolve(s)?;
        let k = res.index_of_id(id).ok_or_else(|| IoError::Domain(format!("no circle {id}")))?;
        let rec = CircleRecord { id, edges: res.circles[k].edges.clone(), nu: Some(v) };
        match states.last_mut() {
            Some(last) if last.bits == s.to_bits() => last.circles.push(rec),
            _ => states.push(StateRecord { bits: s.to_bits(), circles: vec![rec] }),
        }
    }
    Ok(WeightFile { states })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub state: String,
    pub crossing: usize,
    pub kind: String,
    pub lhs: i64,
    pub rhs: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationFile {
    pub violations: Vec<ViolationRecord>,
}

impl From<&ViolationReport> for ViolationFile {
    fn from(r: &ViolationReport) -> Self {
        ViolationFile {
            violations: r
                .violations
                .iter()
                .map(|v| ViolationRecord {
                    state: v.state.to_bits(),
                    crossing: v.crossing,
                    kind: v.kind.to_string(),
                    lhs: v.lhs,
                    rhs: v.rhs,
                })
                .collect(),
        }
    }
}

impl TryFrom<&ViolationFile> for ViolationReport {
    type Error = IoError;

    fn try_from(f: &ViolationFile) -> Result<Self, IoError> {
        let violations = f
            .violations
            .iter()
            .map(|r| {
                let state = State::parse_bits(&r.state)
                    .ok_or_else(|| IoError::Domain(format!("bad state bits `{}`", r.state)))?;
                let kind = match r.kind.as_str() {
                    "split" => ViolationKind::Split,
                    "merge" => ViolationKind::Merge,
                    "identity" => ViolationKind::Identity,
                    other => return Err(IoError::Domain(format!("unknown violation kind `{other}`"))),
                };
                Ok(Violation { state, crossing: r.crossing, kind, lhs: r.lhs, rhs: r.rhs })
            })
            .collect::<Result<_, _>>()?;
        Ok(ViolationReport { violations })
    }
}

/// `{"rank":r,"unit":[..],"counit":[..],"mult":[[[..]]],"comult":[[[..]]]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub rank: usize,
    pub unit: Vec<i64>,
    pub counit: Vec<i64>,
    pub mult: Vec<Vec<Vec<i64>>>,
    pub comult: Vec<Vec<Vec<i64>>>,
}

impl From<&FrobeniusAlgebra> for AlgebraFile {
    fn from(a: &FrobeniusAlgebra) -> Self {
        AlgebraFile {
            rank: a.rank(),
            unit: a.unit().0,
            counit: a.counit().to_vec(),
            mult: a.mult_tensor(),
            comult: a.comult_tensor(),
        }
    }
}

impl TryFrom<AlgebraFile> for FrobeniusAlgebra {
    type Error = IoError;

    fn try_from(f: AlgebraFile) -> Result<Self, IoError> {
        if f.unit.len() != f.rank {
            return Err(IoError::Domain(format!("unit has length {}, rank is {}", f.unit.len(), f.rank)));
        }
        Ok(FrobeniusAlgebra::new(f.unit, f.counit, f.mult, f.comult)?)
    }
}

pub fn parse_algebra(text: &str) -> Result<FrobeniusAlgebra, IoError> {
    serde_json::from_str::<AlgebraFile>(text)?.try_into()
}

/// `"1,1"` → `(1, 1)`.
pub fn parse_theta(text: &str) -> Result<AlgebraElement, IoError> {
    text.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| IoError::Theta(text.to_string())))
        .collect::<Result<Vec<_>, _>>()
        .map(AlgebraElement)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub degree: usize,
    pub rank: usize,
    /// `d_i`, absent in the top degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub differential: Option<IntMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub degrees: Vec<DegreeRecord>,
}

impl From<&ChainComplex> for ComplexFile {
    fn from(c: &ChainComplex) -> Self {
        ComplexFile {
            degrees: c
                .ranks
                .iter()
                .enumerate()
                .map(|(i, &rank)| DegreeRecord { degree: i, rank, differential: c.differentials.get(i).cloned() })
                .collect(),
        }
    }
}

impl From<&ComplexFile> for ChainComplex {
    fn from(f: &ComplexFile) -> Self {
        ChainComplex {
            ranks: f.degrees.iter().map(|d| d.rank).collect(),
            differentials: f.degrees.iter().filter_map(|d| d.differential.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapComponent {
    pub degree: usize,
    pub matrix: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainMapFile {
    pub source: ComplexFile,
    pub target: ComplexFile,
    pub components: Vec<MapComponent>,
}

impl From<&ChainMap> for ChainMapFile {
    fn from(f: &ChainMap) -> Self {
        ChainMapFile {
            source: (&f.source).into(),
            target: (&f.target).into(),
            components: f
                .components
                .iter()
                .enumerate()
                .map(|(degree, m)| MapComponent { degree, matrix: m.clone() })
                .collect(),
        }
    }
}

impl From<&ChainMapFile> for ChainMap {
    fn from(f: &ChainMapFile) -> Self {
        ChainMap {
            source: (&f.source).into(),
            target: (&f.target).into(),
            components: f.components.iter().map(|c| c.matrix.clone()).collect(),
        }
    }
}

pub fn homology_to_json(h: &[HomologyGroup]) -> serde_json::Value {
    serde_json::to_value(h).expect("homology serializes")
}

pub fn homology_from_json(text: &str) -> Result<Vec<HomologyGroup>, IoError> {
    Ok(serde_json::from_str(text)?)
}

/// Result of an oracle run: `"feasible"` with a weight, or `"infeasible"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoReport {
    pub theta: Vec<i64>,
    pub chain_map: bool,
    pub iso: bool,
    pub homology_twisted: Vec<HomologyGroup>,
    pub homology: Vec<HomologyGroup>,
    pub homology_equal: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{build_theta_iso, complex_of, homology_snf};
    use crate::diagram::parse_pd;
    use crate::weights::{check_weight, construct};

    const TREFOIL: &str = "X 4 2 5 1\nX 6 4 1 3\nX 2 6 3 5\n";

    #[test]
    fn weight_round_trip() {
        let d = parse_pd(TREFOIL).unwrap();
        let nu = construct(&d).unwrap();
        let text = serde_json::to_string(&weight_to_file(&d, &nu).unwrap()).unwrap();
        let back = weight_from_file(&d, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, nu);
    }

    #[test]
    fn weight_json_shape() {
        let d = parse_pd("X 1 2 2 1").unwrap();
        let nu = construct(&d).unwrap();
        let v = serde_json::to_value(weight_to_file(&d, &nu).unwrap()).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"states":[
                {"bits":"0","circles":[{"id":1,"edges":[1,2],"nu":0}]},
                {"bits":"1","circles":[{"id":1,"edges":[1],"nu":1},{"id":2,"edges":[2],"nu":0}]}
            ]})
        );
    }

    #[test]
    fn pins_allow_gaps_but_weights_do_not() {
        let d = parse_pd(TREFOIL).unwrap();
        let text = r#"{"states":[{"bits":"000","circles":[{"id":1,"nu":0},{"id":2,"nu":null}]}]}"#;
        let file: WeightFile = serde_json::from_str(text).unwrap();
        let pins = pins_from_file(&d, &file).unwrap();
        assert_eq!(pins.len(), 1);
        assert!(weight_from_file(&d, &file).is_err());
        let back = pins_from_file(&d, &pins_to_file(&d, &pins).unwrap()).unwrap();
        assert_eq!(back, pins);
    }

    #[test]
    fn pins_are_validated() {
        let d = parse_pd(TREFOIL).unwrap();
        for text in [
            r#"{"states":[{"bits":"000","circles":[{"id":3,"nu":0}]}]}"#,
            r#"{"states":[{"bits":"00","circles":[]}]}"#,
            r#"{"states":[{"bits":"000","circles":[{"id":1,"edges":[1,2],"nu":0}]}]}"#,
            r#"{"states":[{"bits":"0x0","circles":[]}]}"#,
        ] {
            let file: WeightFile = serde_json::from_str(text).unwrap();
            assert!(pins_from_file(&d, &file).is_err(), "{text}");
        }
    }

    #[test]
    fn violations_round_trip() {
        let d = parse_pd(TREFOIL).unwrap();
        let report = check_weight(&d, &TwistingWeight::zero(&d)).unwrap();
        let file = ViolationFile::from(&report);
        let text = serde_json::to_string(&file).unwrap();
        let back = ViolationReport::try_from(&serde_json::from_str::<ViolationFile>(&text).unwrap()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn algebra_round_trip() {
        for name in ["kh", "lee"] {
            let a = FrobeniusAlgebra::builtin(name).unwrap();
            let text = serde_json::to_string(&AlgebraFile::from(&a)).unwrap();
            assert_eq!(parse_algebra(&text).unwrap(), a);
        }
        assert!(parse_algebra(r#"{"rank":2,"unit":[1],"counit":[0,1],"mult":[],"comult":[]}"#).is_err());
    }

    #[test]
    fn theta_parsing() {
        assert_eq!(parse_theta("1, -1").unwrap(), AlgebraElement(vec![1, -1]));
        assert!(parse_theta("1,x").is_err());
        assert!(parse_theta("").is_err());
    }

    #[test]
    fn complex_map_and_homology_round_trip() {
        let d = parse_pd(TREFOIL).unwrap();
        let a = FrobeniusAlgebra::builtin("kh").unwrap();
        let c = complex_of(&d, &a).unwrap();
        let text = serde_json::to_string(&ComplexFile::from(&c)).unwrap();
        assert_eq!(ChainComplex::from(&serde_json::from_str::<ComplexFile>(&text).unwrap()), c);

        let nu = construct(&d).unwrap();
        let f = build_theta_iso(&d, &a, &AlgebraElement(vec![1, 1]), &nu).unwrap();
        let text = serde_json::to_string(&ChainMapFile::from(&f)).unwrap();
        assert_eq!(ChainMap::from(&serde_json::from_str::<ChainMapFile>(&text).unwrap()), f);

        let h = homology_snf(&c).unwrap();
        let text = homology_to_json(&h).to_string();
        assert!(text.contains(r#""degree":0"#));
        assert_eq!(homology_from_json(&text).unwrap(), h);
    }
}
