//! Link diagrams given by PD codes, their smoothings, and the combinatorics of
//! the cube of resolutions.
//!
//! A crossing is a quadruple of edge labels in slot order `(0, 1, 2, 3)`.
//! With `flip == false` a crossing outside the state is smoothed by pairing
//! slots `(0,1)` and `(2,3)`; a crossing inside the state pairs `(0,3)` and
//! `(1,2)`. Setting `flip` exchanges the two smoothings, which is how a
//! crossing change acts on the cube.
//!
//! ```text
//!     3   2          3   2          3   2
//!      \ /           |___|           \_/
//!       X     c∉S    ‾‾‾‾‾    c∈S    / \
//!      / \           |   |          /   \     (schematic)
//!     0   1          0   1          0   1
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard limit imposed by the `u64` state mask.
pub const MAX_CROSSINGS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("edge {edge} occurs {count} times (expected exactly 2)")]
    EdgeMultiplicity { edge: EdgeId, count: usize },
    #[error("free loop {0} collides with a crossing edge or another free loop")]
    LoopCollision(EdgeId),
    #[error("edge ids must be positive")]
    ZeroEdge,
    #[error("{0} crossings exceed the supported maximum of {MAX_CROSSINGS}")]
    TooManyCrossings(usize),
    #[error("state has length {state} but the diagram has {crossings} crossings")]
    StateLength { state: usize, crossings: usize },
    #[error("crossing {0} is out of range")]
    CrossingIndex(usize),
    #[error("crossing {0} already belongs to the state")]
    CrossingInState(usize),
    #[error("crossing indices must be distinct (got {0} twice)")]
    EqualCrossings(usize),
    #[error("saddle at crossing {crossing} changes the circle count by {delta}; the diagram is not planar")]
    NonPlanarSaddle { crossing: usize, delta: isize },
    #[error("circle-count parity violated at state {0}")]
    Parity(State),
    #[error("diagram is not connected")]
    Disconnected,
}

/// Label of an unoriented arc of the diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub slots: [EdgeId; 4],
    pub flip: bool,
}

impl Crossing {
    pub fn new(slots: [u32; 4]) -> Self {
        Crossing { slots: slots.map(EdgeId), flip: false }
    }

    /// The two slot pairings used when the crossing is (or is not) in the state.
    pub fn pairing(&self, in_state: bool) -> [[EdgeId; 2]; 2] {
        let [a, b, c, d] = self.slots;
        if in_state != self.flip {
            [[a, d], [b, c]]
        } else {
            [[a, b], [c, d]]
        }
    }

    pub fn min_edge(&self) -> EdgeId {
        *self.slots.iter().min().unwrap()
    }
}

/// A subset of the crossings, bit `i` set iff crossing `i` is in the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    mask: u64,
    len: u8,
}

impl State {
    pub fn empty(len: usize) -> Self {
        assert!(len <= MAX_CROSSINGS);
        State { mask: 0, len: len as u8 }
    }

    pub fn full(len: usize) -> Self {
        let mut s = State::empty(len);
        s.mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        s
    }

    pub fn from_mask(mask: u64, len: usize) -> Self {
        assert!(len <= MAX_CROSSINGS);
        assert!(len == 64 || mask >> len == 0, "mask has bits beyond length");
        State { mask, len: len as u8 }
    }

    pub fn from_indices(indices: &[usize], len: usize) -> Self {
        let mut s = State::empty(len);
        for &i in indices {
            s = s.with(i);
        }
        s
    }

    /// Parse an `n`-character 0/1 string, bit 0 first.
    pub fn parse_bits(text: &str) -> Option<Self> {
        if text.len() > MAX_CROSSINGS {
            return None;
        }
        let mut mask = 0u64;
        for (i, ch) in text.chars().enumerate() {
            match ch {
                '1' => mask |= 1 << i,
                '0' => {}
                _ => return None,
            }
        }
        Some(State { mask, len: text.len() as u8 })
    }

    pub fn to_bits(&self) -> String {
        (0..self.len()).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// Number of crossings in the state.
    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn contains(&self, c: usize) -> bool {
        c < self.len() && self.mask >> c & 1 == 1
    }

    pub fn with(self, c: usize) -> Self {
        assert!(c < self.len());
        State { mask: self.mask | 1 << c, ..self }
    }

    pub fn without(self, c: usize) -> Self {
        assert!(c < self.len());
        State { mask: self.mask & !(1 << c), ..self }
    }

    pub fn toggled(self, c: usize) -> Self {
        assert!(c < self.len());
        State { mask: self.mask ^ 1 << c, ..self }
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.contains(i))
    }

    pub fn non_members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.contains(i))
    }

    /// All `2^len` states in ascending mask order.
    pub fn all(len: usize) -> impl Iterator<Item = State> {
        assert!(len < 64, "cannot enumerate 2^64 states");
        (0..1u64 << len).map(move |m| State::from_mask(m, len))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = self.members().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", members.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circle {
    pub canonical_id: EdgeId,
    /// Sorted ascending; the first entry is the canonical id.
    pub edges: Vec<EdgeId>,
}

impl Circle {
    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }
}

/// The circles of a smoothing `D_S`, sorted by canonical id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub circles: Vec<Circle>,
    /// Sorted by edge id; the second entry indexes `circles`.
    circle_of: Vec<(EdgeId, usize)>,
}

impl Resolution {
    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    pub fn circle_of_edge(&self, e: EdgeId) -> Option<usize> {
        self.circle_of
            .binary_search_by_key(&e, |&(id, _)| id)
            .ok()
            .map(|k| self.circle_of[k].1)
    }

    pub fn ids(&self) -> Vec<EdgeId> {
        self.circles.iter().map(|c| c.canonical_id).collect()
    }

    pub fn index_of_id(&self, id: EdgeId) -> Option<usize> {
        self.circles.binary_search_by_key(&id, |c| c.canonical_id).ok()
    }

    fn circle_at(&self, dense: usize) -> usize {
        self.circle_of[dense].1
    }

    /// Circles touched by crossing `c`, ascending, one or two entries.
    pub fn adjacent(&self, d: &LinkDiagram, c: usize) -> Vec<usize> {
        let mut v: Vec<usize> = d.dense_slots(c).iter().map(|&k| self.circle_at(k)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn disjoint(&self, d: &LinkDiagram, c1: usize, c2: usize) -> bool {
        let a = self.adjacent(d, c1);
        let b = self.adjacent(d, c2);
        !a.iter().any(|x| b.contains(x))
    }

    pub fn parallel(&self, d: &LinkDiagram, c1: usize, c2: usize) -> bool {
        let a = self.adjacent(d, c1);
        a.len() == 2 && a == self.adjacent(d, c2)
    }

    /// Whether three crossings, each touching two distinct circles, sit on
    /// the three sides of a triangle of three distinct circles.
    pub fn triangle(&self, d: &LinkDiagram, c1: usize, c2: usize, c3: usize) -> bool {
        let pairs = [self.adjacent(d, c1), self.adjacent(d, c2), self.adjacent(d, c3)];
        if pairs.iter().any(|p| p.len() != 2) {
            return false;
        }
        if pairs[0] == pairs[1] || pairs[1] == pairs[2] || pairs[0] == pairs[2] {
            return false;
        }
        let mut all: Vec<usize> = pairs.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len() == 3
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SaddleKind {
    /// Indices: `parent` into the source resolution, `children` (ascending)
    /// into the target.
    Split { parent: usize, children: [usize; 2] },
    /// Indices: `parents` (ascending) into the source, `child` into the target.
    Merge { parents: [usize; 2], child: usize },
}

/// The saddle cobordism `D_S -> D_{S ∪ {c}}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Saddle {
    pub kind: SaddleKind,
    /// `(source index, target index)` for circles away from the crossing.
    pub untouched: Vec<(usize, usize)>,
}

impl Saddle {
    pub fn is_split(&self) -> bool {
        matches!(self.kind, SaddleKind::Split { .. })
    }

    /// Target index of the untouched image of source circle `i`.
    pub fn image_of(&self, i: usize) -> Option<usize> {
        self.untouched.iter().find(|&&(s, _)| s == i).map(|&(_, t)| t)
    }

    /// Source index of the untouched preimage of target circle `j`.
    pub fn preimage_of(&self, j: usize) -> Option<usize> {
        self.untouched.iter().find(|&&(_, t)| t == j).map(|&(s, _)| s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkDiagram {
    crossings: Vec<Crossing>,
    free_loops: Vec<EdgeId>,
    /// Every edge id (crossing edges and free loops), sorted.
    edges: Vec<EdgeId>,
    /// Per crossing, the dense index of each slot edge.
    slot_index: Vec<[usize; 4]>,
}

impl LinkDiagram {
    pub fn new(crossings: Vec<Crossing>, free_loops: Vec<EdgeId>) -> Result<Self, DiagramError> {
        if crossings.len() > MAX_CROSSINGS {
            return Err(DiagramError::TooManyCrossings(crossings.len()));
        }
        let mut counts: BTreeMap<EdgeId, usize> = BTreeMap::new();
        for x in &crossings {
            for &e in &x.slots {
                if e.0 == 0 {
                    return Err(DiagramError::ZeroEdge);
                }
                *counts.entry(e).or_default() += 1;
            }
        }
        if let Some((&edge, &count)) = counts.iter().find(|(_, &n)| n != 2) {
            return Err(DiagramError::EdgeMultiplicity { edge, count });
        }
        let mut loops = free_loops;
        loops.sort_unstable();
        for w in loops.windows(2) {
            if w[0] == w[1] {
                return Err(DiagramError::LoopCollision(w[0]));
            }
        }
        for &l in &loops {
            if l.0 == 0 {
                return Err(DiagramError::ZeroEdge);
            }
            if counts.contains_key(&l) {
                return Err(DiagramError::LoopCollision(l));
            }
        }
        let mut edges: Vec<EdgeId> = counts.keys().copied().chain(loops.iter().copied()).collect();
        edges.sort_unstable();
        let slot_index = crossings
            .iter()
            .map(|x| x.slots.map(|e| edges.binary_search(&e).unwrap()))
            .collect();
        Ok(LinkDiagram { crossings, free_loops: loops, edges, slot_index })
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn free_loops(&self) -> &[EdgeId] {
        &self.free_loops
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn empty_state(&self) -> State {
        State::empty(self.crossing_count())
    }

    pub fn states(&self) -> impl Iterator<Item = State> {
        State::all(self.crossing_count())
    }

    fn dense_slots(&self, c: usize) -> [usize; 4] {
        self.slot_index[c]
    }

    fn check_state(&self, s: State) -> Result<(), DiagramError> {
        if s.len() != self.crossing_count() {
            return Err(DiagramError::StateLength { state: s.len(), crossings: self.crossing_count() });
        }
        Ok(())
    }

    fn check_crossing(&self, c: usize) -> Result<(), DiagramError> {
        if c >= self.crossing_count() {
            return Err(DiagramError::CrossingIndex(c));
        }
        Ok(())
    }

    /// Smooth every crossing according to `s` and trace the circles.
    pub fn resolve(&self, s: State) -> Result<Resolution, DiagramError> {
        self.check_state(s)?;
        Ok(self.resolve_unchecked(s))
    }

    fn resolve_unchecked(&self, s: State) -> Resolution {
        let mut uf = UnionFind::new(self.edges.len());
        for (i, x) in self.crossings.iter().enumerate() {
            let slots = self.slot_index[i];
            let [a, b, c, d] = slots;
            if s.contains(i) != x.flip {
                uf.union(a, d);
                uf.union(b, c);
            } else {
                uf.union(a, b);
                uf.union(c, d);
            }
        }
        // Edges are sorted, so the first edge met in each class is its minimum.
        let mut root_to_circle: BTreeMap<usize, usize> = BTreeMap::new();
        let mut circles: Vec<Circle> = Vec::new();
        let mut circle_of = Vec::with_capacity(self.edges.len());
        for (k, &e) in self.edges.iter().enumerate() {
            let r = uf.find(k);
            let idx = *root_to_circle.entry(r).or_insert_with(|| {
                circles.push(Circle { canonical_id: e, edges: Vec::new() });
                circles.len() - 1
            });
            circles[idx].edges.push(e);
            circle_of.push((e, idx));
        }
        Resolution { circles, circle_of }
    }

    /// Resolutions of every state, indexed by state mask.
    pub fn all_resolutions(&self) -> Vec<Resolution> {
        self.states().map(|s| self.resolve_unchecked(s)).collect()
    }

    /// Classify the saddle `D_S -> D_{S ∪ {c}}`.
    pub fn classify(&self, s: State, c: usize) -> Result<Saddle, DiagramError> {
        self.check_state(s)?;
        self.check_crossing(c)?;
        if s.contains(c) {
            return Err(DiagramError::CrossingInState(c));
        }
        let src = self.resolve_unchecked(s);
        let dst = self.resolve_unchecked(s.with(c));
        self.saddle_between(&src, &dst, c)
    }

    /// Classify the saddle at `c` between two precomputed resolutions
    /// `src = D_S` and `dst = D_{S ∪ {c}}`.
    pub fn saddle_between(
        &self,
        src: &Resolution,
        dst: &Resolution,
        c: usize,
    ) -> Result<Saddle, DiagramError> {
        let touched_src = src.adjacent(self, c);
        let touched_dst = dst.adjacent(self, c);
        let delta = dst.len() as isize - src.len() as isize;
        let kind = match (touched_src.as_slice(), touched_dst.as_slice()) {
            (&[p], &[a, b]) if delta == 1 => SaddleKind::Split { parent: p, children: [a, b] },
            (&[a, b], &[ch]) if delta == -1 => SaddleKind::Merge { parents: [a, b], child: ch },
            _ => return Err(DiagramError::NonPlanarSaddle { crossing: c, delta }),
        };
        let mut untouched = Vec::with_capacity(src.len().saturating_sub(1));
        for (i, circle) in src.circles.iter().enumerate() {
            if touched_src.contains(&i) {
                continue;
            }
            let j = dst.index_of_id(circle.canonical_id);
            match j {
                Some(j) if dst.circles[j].edges == circle.edges => untouched.push((i, j)),
                _ => return Err(DiagramError::NonPlanarSaddle { crossing: c, delta }),
            }
        }
        Ok(Saddle { kind, untouched })
    }

    /// `γ(W_S) = (|π₀(D_S)| − |π₀(D_∅)| + |S|) / 2`.
    pub fn gamma_state(&self, s: State) -> Result<i64, DiagramError> {
        self.check_state(s)?;
        let k0 = self.resolve_unchecked(self.empty_state()).len() as i64;
        let ks = self.resolve_unchecked(s).len() as i64;
        gamma_from_counts(k0, ks, s).ok_or(DiagramError::Parity(s))
    }

    /// The same diagram with crossing `c`'s smoothing convention exchanged.
    ///
    /// Panics if `c` is out of range.
    pub fn crossing_change(&self, c: usize) -> LinkDiagram {
        let mut d = self.clone();
        d.crossings[c].flip = !d.crossings[c].flip;
        d
    }

    /// Connected components with the original crossing indices of each.
    ///
    /// Components appear in order of their smallest crossing index, followed
    /// by one singleton per free loop.
    pub fn components(&self) -> Vec<(LinkDiagram, Vec<usize>)> {
        let n = self.crossing_count();
        let mut uf = UnionFind::new(n);
        let mut first_seen: BTreeMap<EdgeId, usize> = BTreeMap::new();
        for (i, x) in self.crossings.iter().enumerate() {
            for &e in &x.slots {
                if let Some(&j) = first_seen.get(&e) {
                    uf.union(i, j);
                } else {
                    first_seen.insert(e, i);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            groups.entry(uf.find(i)).or_default().push(i);
        }
        let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
        groups.sort_by_key(|g| g[0]);
        let mut out: Vec<(LinkDiagram, Vec<usize>)> = groups
            .into_iter()
            .map(|g| {
                let xs = g.iter().map(|&i| self.crossings[i]).collect();
                (LinkDiagram::new(xs, vec![]).expect("component of a valid diagram"), g)
            })
            .collect();
        for &l in &self.free_loops {
            out.push((LinkDiagram::new(vec![], vec![l]).unwrap(), vec![]));
        }
        out
    }

    pub fn split_components(&self) -> Vec<LinkDiagram> {
        self.components().into_iter().map(|(d, _)| d).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    pub fn disjoint_in(&self, s: State, c1: usize, c2: usize) -> Result<bool, DiagramError> {
        self.pair_precheck(s, c1, c2)?;
        Ok(self.resolve_unchecked(s).disjoint(self, c1, c2))
    }

    pub fn parallel_in(&self, s: State, c1: usize, c2: usize) -> Result<bool, DiagramError> {
        self.pair_precheck(s, c1, c2)?;
        Ok(self.resolve_unchecked(s).parallel(self, c1, c2))
    }

    fn pair_precheck(&self, s: State, c1: usize, c2: usize) -> Result<(), DiagramError> {
        self.check_state(s)?;
        self.check_crossing(c1)?;
        self.check_crossing(c2)?;
        if c1 == c2 {
            return Err(DiagramError::EqualCrossings(c1));
        }
        Ok(())
    }

    /// Triangles formed by crossings of `s` in `D_S`, as ascending triples.
    pub fn triangles_in(&self, s: State) -> Result<Vec<[usize; 3]>, DiagramError> {
        self.check_state(s)?;
        let res = self.resolve_unchecked(s);
        let members: Vec<usize> = s.members().collect();
        let mut out = Vec::new();
        for (x, &a) in members.iter().enumerate() {
            for (y, &b) in members.iter().enumerate().skip(x + 1) {
                for &c in &members[y + 1..] {
                    if res.triangle(self, a, b, c) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        Ok(out)
    }

    /// A state whose smoothing is a single circle, reached by repeatedly
    /// toggling the lowest crossing that touches two distinct circles.
    pub fn find_connected_state(&self) -> Result<State, DiagramError> {
        if !self.free_loops.is_empty() || self.crossings.is_empty() || !self.is_connected() {
            return Err(DiagramError::Disconnected);
        }
        let mut s = self.empty_state();
        loop {
            let res = self.resolve_unchecked(s);
            if res.len() == 1 {
                return Ok(s);
            }
            let c = (0..self.crossing_count())
                .find(|&c| res.adjacent(self, c).len() == 2)
                .ok_or(DiagramError::Disconnected)?;
            let next = s.toggled(c);
            if self.resolve_unchecked(next).len() + 1 != res.len() {
                return Err(DiagramError::NonPlanarSaddle { crossing: c, delta: 0 });
            }
            s = next;
        }
    }
}

pub(crate) fn gamma_from_counts(initial: i64, current: i64, s: State) -> Option<i64> {
    let num = current - initial + s.size() as i64;
    if num % 2 != 0 || num < 0 {
        None
    } else {
        Some(num / 2)
    }
}

/// Parse the PD-code text format: `X a b c d` for crossings, `O k` for free
/// loops, `#` comments, blank lines ignored.
pub fn parse_pd(text: &str) -> Result<LinkDiagram, DiagramError> {
    let mut crossings = Vec::new();
    let mut loops = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| DiagramError::Malformed { line: lineno + 1, message };
        let mut tokens = line.split_whitespace();
        let tag = tokens.next().unwrap();
        let nums = tokens
            .map(|t| t.parse::<u32>().map_err(|_| malformed(format!("invalid edge id `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        match (tag, nums.as_slice()) {
            ("X", &[a, b, c, d]) => crossings.push(Crossing::new([a, b, c, d])),
            ("O", &[k]) => loops.push(EdgeId(k)),
            ("X", _) => return Err(malformed("crossing needs exactly four edge ids".into())),
            ("O", _) => return Err(malformed("free loop needs exactly one edge id".into())),
            _ => return Err(malformed(format!("unknown item `{tag}`"))),
        }
    }
    LinkDiagram::new(crossings, loops)
}

impl fmt::Display for LinkDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.crossings {
            let [a, b, c, d] = x.slots;
            if x.flip {
                writeln!(f, "X {b} {c} {d} {a}")?;
            } else {
                writeln!(f, "X {a} {b} {c} {d}")?;
            }
        }
        for l in &self.free_loops {
            writeln!(f, "O {l}")?;
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
