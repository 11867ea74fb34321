//! Twisting weights: integer labels on every circle of every smoothing,
//! subject to the split (`ν(C) = ν(C'₁) + ν(C'₂) − 1`), merge
//! (`ν(C₁) + ν(C₂) = ν(C')`) and identity conditions along each cube edge.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diagram::{gamma_from_counts, DiagramError, EdgeId, LinkDiagram, Resolution, Saddle, SaddleKind, State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("weight domain does not match the diagram: {0}")]
    DomainMismatch(String),
    #[error("the empty state must resolve into a single circle (found {0})")]
    InitialNotConnected(usize),
    #[error("value at state {state} circle {circle} depends on the chosen crossing ({first} vs {second}); non-planar input?")]
    InconsistentExtension { state: State, circle: EdgeId, first: i64, second: i64 },
    #[error("state {state}: {detail}; non-planar input?")]
    CaseAnalysis { state: State, detail: String },
    #[error("edge {edge} is not incident to crossing {crossing}")]
    EdgeNotIncident { edge: EdgeId, crossing: usize },
    #[error("input weight is not a twisting weight ({0} violations)")]
    InvalidInput(usize),
    #[error("constructed weight fails verification ({0} violations)")]
    Unsound(usize),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Values on one state's circles, ordered by ascending canonical id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateWeight {
    pub ids: Vec<EdgeId>,
    pub values: Vec<i64>,
}

/// A map `(state, circle) ↦ ℤ` covering every circle of every state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistingWeight {
    crossing_count: usize,
    /// Indexed by state mask.
    states: Vec<StateWeight>,
}

impl TwistingWeight {
    /// Build from per-state values; `f` receives each state's resolution.
    pub fn from_fn(d: &LinkDiagram, mut f: impl FnMut(State, &Resolution) -> Vec<i64>) -> Self {
        let states = d
            .states()
            .map(|s| {
                let res = d.resolve(s).expect("state of d");
                let values = f(s, &res);
                assert_eq!(values.len(), res.len());
                StateWeight { ids: res.ids(), values }
            })
            .collect();
        TwistingWeight { crossing_count: d.crossing_count(), states }
    }

    pub fn zero(d: &LinkDiagram) -> Self {
        Self::from_fn(d, |_, r| vec![0; r.len()])
    }

    /// Assemble from raw parts; the domain is validated against `d`.
    pub fn from_parts(d: &LinkDiagram, states: Vec<StateWeight>) -> Result<Self, WeightError> {
        let w = TwistingWeight { crossing_count: d.crossing_count(), states };
        w.check_domain(d)?;
        Ok(w)
    }

    pub fn crossing_count(&self) -> usize {
        self.crossing_count
    }

    pub fn state(&self, s: State) -> &StateWeight {
        &self.states[s.mask() as usize]
    }

    pub fn values(&self, s: State) -> &[i64] {
        &self.states[s.mask() as usize].values
    }

    pub fn get(&self, s: State, id: EdgeId) -> Option<i64> {
        let sw = self.states.get(s.mask() as usize)?;
        sw.ids.binary_search(&id).ok().map(|k| sw.values[k])
    }

    pub fn set(&mut self, s: State, id: EdgeId, value: i64) -> bool {
        let sw = &mut self.states[s.mask() as usize];
        match sw.ids.binary_search(&id) {
            Ok(k) => {
                sw.values[k] = value;
                true
            }
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (State, &StateWeight)> {
        let n = self.crossing_count;
        self.states.iter().enumerate().map(move |(m, sw)| (State::from_mask(m as u64, n), sw))
    }

    /// Add `k` to every value.
    pub fn offset(&self, k: i64) -> Self {
        let mut w = self.clone();
        for sw in &mut w.states {
            sw.values.iter_mut().for_each(|v| *v += k);
        }
        w
    }

    pub fn check_domain(&self, d: &LinkDiagram) -> Result<(), WeightError> {
        if self.crossing_count != d.crossing_count() {
            return Err(WeightError::DomainMismatch(format!(
                "weight has {} crossings, diagram has {}",
                self.crossing_count,
                d.crossing_count()
            )));
        }
        if self.states.len() != 1usize << d.crossing_count() {
            return Err(WeightError::DomainMismatch(format!("expected {} states", 1usize << d.crossing_count())));
        }
        for s in d.states() {
            let res = d.resolve(s)?;
            let sw = self.state(s);
            if sw.ids != res.ids() || sw.values.len() != sw.ids.len() {
                return Err(WeightError::DomainMismatch(format!("circles differ at state {}", s.to_bits())));
            }
        }
        Ok(())
    }
}

/// Values on some subset of the `(state, circle)` domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    pub values: BTreeMap<(State, EdgeId), i64>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: State, id: EdgeId, value: i64) -> Option<i64> {
        self.values.insert((s, id), value)
    }

    pub fn get(&self, s: State, id: EdgeId) -> Option<i64> {
        self.values.get(&(s, id)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (State, EdgeId, i64)> + '_ {
        self.values.iter().map(|(&(s, id), &v)| (s, id, v))
    }

    /// Every key names an existing circle of a state of `d`.
    pub fn validate(&self, d: &LinkDiagram) -> Result<(), WeightError> {
        for (s, id, _) in self.iter() {
            if s.len() != d.crossing_count() {
                return Err(WeightError::DomainMismatch(format!("state {} has the wrong length", s.to_bits())));
            }
            if d.resolve(s)?.index_of_id(id).is_none() {
                return Err(WeightError::DomainMismatch(format!("no circle {id} in state {}", s.to_bits())));
            }
        }
        Ok(())
    }
}

impl From<&TwistingWeight> for PartialAssignment {
    fn from(w: &TwistingWeight) -> Self {
        let mut p = PartialAssignment::new();
        for (s, sw) in w.iter() {
            for (&id, &v) in sw.ids.iter().zip(&sw.values) {
                p.insert(s, id, v);
            }
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Split,
    Merge,
    Identity,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Split => "split",
            ViolationKind::Merge => "merge",
            ViolationKind::Identity => "identity",
        })
    }
}

/// One failed condition on the cube edge `(state, crossing)`.
///
/// Split: `lhs = ν(C)`, `rhs = ν(C'₁) + ν(C'₂) − 1`. Merge:
/// `lhs = ν(C₁) + ν(C₂)`, `rhs = ν(C')`. Identity: `lhs = ν(C)`, `rhs = ν(C')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: State,
    pub crossing: usize,
    pub kind: ViolationKind,
    pub lhs: i64,
    pub rhs: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

/// Every cube edge saddle, indexed `[state mask][crossing]` (None for `c ∈ S`).
pub(crate) fn all_saddles(
    d: &LinkDiagram,
    table: &[Resolution],
) -> Result<Vec<Vec<Option<Saddle>>>, DiagramError> {
    let n = d.crossing_count();
    d.states()
        .map(|s| {
            (0..n)
                .map(|c| {
                    if s.contains(c) {
                        return Ok(None);
                    }
                    let t = s.with(c);
                    d.saddle_between(&table[s.mask() as usize], &table[t.mask() as usize], c).map(Some)
                })
                .collect()
        })
        .collect()
}

fn edge_violations(s: State, c: usize, saddle: &Saddle, src: &[i64], dst: &[i64], out: &mut Vec<Violation>) {
    let mut push = |kind, lhs, rhs| {
        if lhs != rhs {
            out.push(Violation { state: s, crossing: c, kind, lhs, rhs });
        }
    };
    match saddle.kind {
        SaddleKind::Split { parent, children: [a, b] } => {
            push(ViolationKind::Split, src[parent], dst[a] + dst[b] - 1)
        }
        SaddleKind::Merge { parents: [a, b], child } => push(ViolationKind::Merge, src[a] + src[b], dst[child]),
    }
    for &(i, j) in &saddle.untouched {
        push(ViolationKind::Identity, src[i], dst[j]);
    }
}

/// Check every condition on every cube edge and report all failures.
pub fn check_weight(d: &LinkDiagram, nu: &TwistingWeight) -> Result<ViolationReport, WeightError> {
    nu.check_domain(d)?;
    let table = d.all_resolutions();
    let mut violations = Vec::new();
    for s in d.states() {
        for c in s.non_members() {
            let t = s.with(c);
            let saddle = d.saddle_between(&table[s.mask() as usize], &table[t.mask() as usize], c)?;
            edge_violations(s, c, &saddle, nu.values(s), nu.values(t), &mut violations);
        }
    }
    Ok(ViolationReport { violations })
}

/// Whether per-circle values on `D_S` and `D_{S∪{c}}` are compatible with the
/// saddle at `c`: on each component, out-sum = in-sum + γ, with γ = 1 for a
/// split and 0 otherwise.
pub fn compatible_pair(
    d: &LinkDiagram,
    s: State,
    c: usize,
    nu_s: &[i64],
    nu_t: &[i64],
) -> Result<bool, WeightError> {
    let saddle = d.classify(s, c)?;
    let src = d.resolve(s)?;
    let dst = d.resolve(s.with(c))?;
    if nu_s.len() != src.len() || nu_t.len() != dst.len() {
        return Err(WeightError::DomainMismatch(format!(
            "expected {} and {} values, got {} and {}",
            src.len(),
            dst.len(),
            nu_s.len(),
            nu_t.len()
        )));
    }
    let saddle_ok = match saddle.kind {
        SaddleKind::Split { parent, children: [a, b] } => nu_t[a] + nu_t[b] == nu_s[parent] + 1,
        SaddleKind::Merge { parents: [a, b], child } => nu_t[child] == nu_s[a] + nu_s[b],
    };
    Ok(saddle_ok && saddle.untouched.iter().all(|&(i, j)| nu_s[i] == nu_t[j]))
}

/// Which branch of the inductive step produced each state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstructionTrace {
    /// States handled by summing inputs of a component with a sole output.
    pub case_one: Vec<State>,
    /// States with a hub circle adjacent to every crossing.
    pub case_two: Vec<State>,
}

/// Build a twisting weight on a diagram whose empty state is one circle,
/// level by level in `|S|`.
pub fn construct_connected(d: &LinkDiagram) -> Result<TwistingWeight, WeightError> {
    construct_connected_traced(d).map(|(w, _)| w)
}

pub fn construct_connected_traced(d: &LinkDiagram) -> Result<(TwistingWeight, ConstructionTrace), WeightError> {
    let n = d.crossing_count();
    let table = d.all_resolutions();
    let k0 = table[0].len();
    if k0 != 1 {
        return Err(WeightError::InitialNotConnected(k0));
    }
    let mut values: Vec<Vec<i64>> = table.iter().map(|r| vec![0; r.len()]).collect();
    let mut trace = ConstructionTrace::default();

    let mut by_level: Vec<Vec<State>> = vec![Vec::new(); n + 1];
    for s in d.states() {
        by_level[s.size()].push(s);
    }

    // |S| = 1: the child holding the smallest edge gets 1 on a split.
    for &s in by_level.get(1).into_iter().flatten() {
        let c = s.members().next().unwrap();
        let e = d.empty_state();
        let saddle = d.saddle_between(&table[0], &table[s.mask() as usize], c)?;
        let v = &mut values[s.mask() as usize];
        if let SaddleKind::Split { children: [a, _], .. } = saddle.kind {
            // children are ascending by canonical id, so `a` holds the minimum edge
            v[a] = 1;
        }
        debug_assert!(s.without(c) == e);
    }

    for level in by_level.iter().skip(2) {
        for &s in level {
            let res = &table[s.mask() as usize];
            let members: Vec<usize> = s.members().collect();
            let saddles: Vec<Saddle> = members
                .iter()
                .map(|&c| {
                    let p = s.without(c);
                    d.saddle_between(&table[p.mask() as usize], res, c)
                })
                .collect::<Result<_, _>>()?;

            // Candidate values from every crossing whose saddle has a
            // component with this circle as its sole output.
            let mut candidates: Vec<Vec<i64>> = vec![Vec::new(); res.len()];
            for (&c, saddle) in members.iter().zip(&saddles) {
                let prev = &values[s.without(c).mask() as usize];
                for &(i, j) in &saddle.untouched {
                    candidates[j].push(prev[i]);
                }
                if let SaddleKind::Merge { parents: [a, b], child } = saddle.kind {
                    candidates[child].push(prev[a] + prev[b]);
                }
            }
            let case_one = candidates.iter().all(|v| !v.is_empty());

            let hubs: Vec<usize> = (0..res.len())
                .filter(|&h| {
                    members.iter().all(|&c| {
                        let adj = res.adjacent(d, c);
                        adj.len() == 2 && adj.contains(&h)
                    })
                })
                .collect();
            let case_two = !hubs.is_empty();

            if case_one == case_two {
                return Err(WeightError::CaseAnalysis {
                    state: s,
                    detail: format!("case one {case_one}, hub circles {hubs:?}"),
                });
            }

            let mut out = vec![0i64; res.len()];
            if case_one {
                for (j, cand) in candidates.iter().enumerate() {
                    if let Some(&other) = cand.iter().find(|&&x| x != cand[0]) {
                        return Err(WeightError::InconsistentExtension {
                            state: s,
                            circle: res.circles[j].canonical_id,
                            first: cand[0],
                            second: other,
                        });
                    }
                    out[j] = cand[0];
                }
                trace.case_one.push(s);
            } else {
                if hubs.len() != 1 {
                    return Err(WeightError::CaseAnalysis {
                        state: s,
                        detail: format!("{} hub circles, expected one", hubs.len()),
                    });
                }
                let hub = hubs[0];
                // Non-hub circles copy their value through any crossing they
                // are not adjacent to, where the saddle leaves them untouched.
                let mut rest = 0i64;
                for (j, slot) in out.iter_mut().enumerate() {
                    if j == hub {
                        continue;
                    }
                    let cand = &candidates[j];
                    let Some(&first) = cand.first() else {
                        return Err(WeightError::CaseAnalysis {
                            state: s,
                            detail: format!("circle {} is adjacent to every crossing", res.circles[j].canonical_id),
                        });
                    };
                    if let Some(&other) = cand.iter().find(|&&x| x != first) {
                        return Err(WeightError::InconsistentExtension {
                            state: s,
                            circle: res.circles[j].canonical_id,
                            first,
                            second: other,
                        });
                    }
                    *slot = first;
                    rest += first;
                }
                let gamma = gamma_from_counts(k0 as i64, res.len() as i64, s).ok_or(DiagramError::Parity(s))?;
                out[hub] = gamma - rest;
                trace.case_two.push(s);
            }
            values[s.mask() as usize] = out;
        }
    }

    let states = table
        .iter()
        .zip(values)
        .map(|(r, values)| StateWeight { ids: r.ids(), values })
        .collect();
    let nu = TwistingWeight { crossing_count: n, states };
    let report = check_weight(d, &nu)?;
    if !report.is_empty() {
        return Err(WeightError::Unsound(report.len()));
    }
    Ok((nu, trace))
}

fn check_incident(d: &LinkDiagram, c0: usize, e: EdgeId) -> Result<(), WeightError> {
    let x = d.crossings().get(c0).ok_or(DiagramError::CrossingIndex(c0))?;
    if !x.slots.contains(&e) {
        return Err(WeightError::EdgeNotIncident { edge: e, crossing: c0 });
    }
    Ok(())
}

/// Relabel `nu` from `d` onto `crossing_change(d, c0)` and add
/// `sign · [e ∈ C]` on circles of states selected by `select`.
fn shift_across_change(
    d: &LinkDiagram,
    nu: &TwistingWeight,
    c0: usize,
    e: EdgeId,
    select: impl Fn(State) -> bool,
    sign: i64,
) -> (LinkDiagram, TwistingWeight) {
    let changed = d.crossing_change(c0);
    let states = changed
        .states()
        .map(|s| {
            // D'_S and D_{S Δ {c0}} are the same partition of the edges.
            let src = nu.state(s.toggled(c0));
            let mut sw = src.clone();
            if select(s) {
                let res = changed.resolve(s).expect("state of changed diagram");
                let k = res.circle_of_edge(e).expect("incident edge");
                sw.values[k] += sign;
            }
            sw
        })
        .collect();
    let w = TwistingWeight { crossing_count: nu.crossing_count, states };
    (changed, w)
}

/// Carry a twisting weight on `d_plus` across a crossing change at `c0`.
///
/// On `D₋ = crossing_change(D₊, c0)` the new value is
/// `ν'(S, C) = ν(S Δ {c0}, C) + φ(S, C)` with `φ = 1` iff `c0 ∈ S` and `e ∈ C`.
pub fn transfer(
    d_plus: &LinkDiagram,
    nu: &TwistingWeight,
    c0: usize,
    e: EdgeId,
) -> Result<TwistingWeight, WeightError> {
    check_incident(d_plus, c0, e)?;
    let report = check_weight(d_plus, nu)?;
    if !report.is_empty() {
        return Err(WeightError::InvalidInput(report.len()));
    }
    let (d_minus, out) = shift_across_change(d_plus, nu, c0, e, |s| s.contains(c0), 1);
    let report = check_weight(&d_minus, &out)?;
    if !report.is_empty() {
        return Err(WeightError::Unsound(report.len()));
    }
    Ok(out)
}

/// Exact inverse of [`transfer`]: given `ν'` on `D₋`, recover `ν` on
/// `D₊ = crossing_change(D₋, c0)` via `ν(T, C) = ν'(T Δ {c0}, C) − [c0 ∉ T][e ∈ C]`.
pub fn transfer_back(
    d_minus: &LinkDiagram,
    nu: &TwistingWeight,
    c0: usize,
    e: EdgeId,
) -> Result<TwistingWeight, WeightError> {
    check_incident(d_minus, c0, e)?;
    nu.check_domain(d_minus)?;
    let (_, out) = shift_across_change(d_minus, nu, c0, e, |t| !t.contains(c0), -1);
    Ok(out)
}

/// A twisting weight on any diagram.
///
/// Each connected component is moved to a state with a single circle, its
/// crossings in that state are changed so the new empty state is connected,
/// the inductive construction runs there, and the result is transferred
/// back one crossing at a time in ascending order.
pub fn construct(d: &LinkDiagram) -> Result<TwistingWeight, WeightError> {
    let n = d.crossing_count();
    let mut parts: Vec<(Vec<usize>, LinkDiagram, TwistingWeight)> = Vec::new();
    for (comp, crossings) in d.components() {
        let w = if comp.crossing_count() == 0 {
            TwistingWeight::zero(&comp)
        } else {
            let s = comp.find_connected_state()?;
            let members: Vec<usize> = s.members().collect();
            let mut current = comp.clone();
            for &c in &members {
                current = current.crossing_change(c);
            }
            let mut w = construct_connected(&current)?;
            for &c in &members {
                let e = current.crossings()[c].min_edge();
                let (next, shifted) = shift_across_change(&current, &w, c, e, |t| t.contains(c), 1);
                current = next;
                w = shifted;
            }
            debug_assert_eq!(current, comp);
            w
        };
        parts.push((crossings, comp, w));
    }

    // Every circle lives in exactly one component; look up its value there.
    let mut owner: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for (k, (_, comp, _)) in parts.iter().enumerate() {
        for &e in comp.edges() {
            owner.insert(e, k);
        }
    }
    let nu = TwistingWeight::from_fn(d, |s, res| {
        res.circles
            .iter()
            .map(|circle| {
                let k = owner[&circle.canonical_id];
                let (crossings, comp, w) = &parts[k];
                let local: Vec<usize> =
                    crossings.iter().enumerate().filter(|&(_, &g)| s.contains(g)).map(|(l, _)| l).collect();
                let ls = State::from_indices(&local, comp.crossing_count());
                w.get(ls, circle.canonical_id).expect("component circle")
            })
            .collect()
    });
    debug_assert_eq!(nu.crossing_count(), n);
    let report = check_weight(d, &nu)?;
    if !report.is_empty() {
        return Err(WeightError::Unsound(report.len()));
    }
    Ok(nu)
}
