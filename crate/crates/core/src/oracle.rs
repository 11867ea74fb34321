//! Twisting-weight existence as an integer linear system, decided by Smith
//! normal form. The cube edges are derived here from raw edge-set partitions
//! rather than through the diagram's saddle classifier.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::diagram::{DiagramError, EdgeId, LinkDiagram, State};
use crate::linalg::{self, IntMatrix, LinalgError};
use crate::weights::{check_weight, PartialAssignment, StateWeight, TwistingWeight, WeightError};

pub const DEFAULT_ORACLE_CAP: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{crossings} crossings exceeds the oracle cap of {cap}")]
    TooLarge { crossings: usize, cap: usize },
    #[error("invalid pins: {0}")]
    Pins(WeightError),
    #[error("cube edge ({state}, {crossing}) changes the circle count by {delta}")]
    NonPlanar { state: State, crossing: usize, delta: i64 },
    #[error("solution fails the checker ({0} violations)")]
    Unsound(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// `matrix · x = rhs`, one unknown per `(state, circle)`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub variables: Vec<(State, EdgeId)>,
    pub matrix: IntMatrix,
    pub rhs: Vec<i64>,
}

type Partition = Vec<Vec<EdgeId>>;

fn partitions(d: &LinkDiagram) -> Vec<Partition> {
    d.states()
        .map(|s| {
            let res = d.resolve(s).expect("state of d");
            res.circles.into_iter().map(|c| c.edges).collect()
        })
        .collect()
}

/// Equations from every cube edge, then one row per pin.
pub fn build_system(d: &LinkDiagram, pins: &PartialAssignment) -> Result<LinearSystem, OracleError> {
    pins.validate(d).map_err(OracleError::Pins)?;
    let parts = partitions(d);
    let mut variables = Vec::new();
    let mut index: BTreeMap<(State, EdgeId), usize> = BTreeMap::new();
    for s in d.states() {
        for circle in &parts[s.mask() as usize] {
            index.insert((s, circle[0]), variables.len());
            variables.push((s, circle[0]));
        }
    }

    let mut rows: Vec<BTreeMap<usize, i64>> = Vec::new();
    let mut rhs = Vec::new();
    for s in d.states() {
        let src = &parts[s.mask() as usize];
        for c in s.non_members() {
            let t = s.with(c);
            let dst = &parts[t.mask() as usize];
            let (moved_src, moved_dst): (Vec<_>, Vec<_>) =
                (src.iter().filter(|x| !dst.contains(x)).collect(), dst.iter().filter(|x| !src.contains(x)).collect());
            for kept in src.iter().filter(|x| dst.contains(x)) {
                let mut row = BTreeMap::new();
                row.insert(index[&(s, kept[0])], 1);
                *row.entry(index[&(t, kept[0])]).or_insert(0) -= 1;
                rows.push(row);
                rhs.push(0);
            }
            // Split-count of a single saddle is (out − in + 1) / 2.
            let delta = moved_dst.len() as i64 - moved_src.len() as i64;
            if delta.abs() != 1 {
                return Err(OracleError::NonPlanar { state: s, crossing: c, delta });
            }
            let gamma = (delta + 1) / 2;
            let mut row = BTreeMap::new();
            for x in moved_src {
                *row.entry(index[&(s, x[0])]).or_insert(0) += 1;
            }
            for y in moved_dst {
                *row.entry(index[&(t, y[0])]).or_insert(0) -= 1;
            }
            rows.push(row);
            rhs.push(-gamma);
        }
    }
    for (s, id, v) in pins.iter() {
        let mut row = BTreeMap::new();
        row.insert(index[&(s, id)], 1);
        rows.push(row);
        rhs.push(v);
    }

    let mut matrix = IntMatrix::zeros(rows.len(), variables.len());
    for (i, row) in rows.iter().enumerate() {
        for (&j, &v) in row {
            matrix[(i, j)] = v;
        }
    }
    Ok(LinearSystem { variables, matrix, rhs })
}

/// An integral twisting weight agreeing with `pins`, if one exists.
pub fn oracle_solve(d: &LinkDiagram, pins: &PartialAssignment) -> Result<Option<TwistingWeight>, OracleError> {
    oracle_solve_with_cap(d, pins, DEFAULT_ORACLE_CAP)
}

pub fn oracle_solve_with_cap(
    d: &LinkDiagram,
    pins: &PartialAssignment,
    cap: usize,
) -> Result<Option<TwistingWeight>, OracleError> {
    if d.crossing_count() > cap {
        return Err(OracleError::TooLarge { crossings: d.crossing_count(), cap });
    }
    let system = build_system(d, pins)?;
    let Some(x) = linalg::solve_integer(&system.matrix, &system.rhs)? else {
        return Ok(None);
    };

    let mut per_state: Vec<StateWeight> =
        d.states().map(|_| StateWeight { ids: Vec::new(), values: Vec::new() }).collect();
    for (&(s, id), v) in system.variables.iter().zip(x) {
        let sw = &mut per_state[s.mask() as usize];
        sw.ids.push(id);
        sw.values.push(v);
    }
    let nu = TwistingWeight::from_parts(d, per_state).map_err(OracleError::Pins)?;
    let report = check_weight(d, &nu).map_err(OracleError::Pins)?;
    if !report.is_empty() {
        return Err(OracleError::Unsound(report.len()));
    }
    Ok(Some(nu))
}
