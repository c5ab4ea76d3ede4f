//! Weighted train tracks with ordered branch ends.
//!
//! A switch carries two ordered lists of branch ends: the incoming list (order
//! `<i`) and the outgoing list (order `<o`). Each branch has a tail end (the left
//! side of its rectangle) and a head end (the right side). A tail placed in an
//! outgoing list, or a head placed in an incoming list, is glued straight; the
//! other two placements are glued after a rotation by pi. That second case is
//! how loops with both ends on one side of a switch are encoded.
//!
//! Lists are ordered from the bottom of the switch interval to the top.

mod builders;
mod cover;
pub mod pieces;
mod render;

pub use builders::{build_t, build_t1, build_t1_with, build_t_star, build_t_star_with, StarOrders, T1Orders, T1_NOTE};
pub use cover::{covering_projection, cyclic_cover};
pub use render::{to_dot, to_svg};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{format_rational, parse_rational, Rational};

pub type SwitchId = usize;
pub type BranchId = usize;

/// Errors raised while building or querying tracks.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrackError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown branch {0:?}")]
    UnknownBranch(String),
    #[error("unknown switch {0:?}")]
    UnknownSwitch(String),
    #[error("malformed track: {0}")]
    Malformed(String),
}

/// Which end of a branch: the tail sits at `from`, the head at `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum End {
    Tail,
    Head,
}

impl End {
    pub fn other(self) -> End {
        match self {
            End::Tail => End::Head,
            End::Head => End::Tail,
        }
    }
}

/// The two sides of a switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Incoming,
    Outgoing,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Incoming => Side::Outgoing,
            Side::Outgoing => Side::Incoming,
        }
    }
}

/// A reference to one end of a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndRef {
    pub branch: BranchId,
    pub end: End,
}

/// Where an end sits: switch, side and index within that side's list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndPlace {
    pub switch: SwitchId,
    pub side: Side,
    pub index: usize,
}

impl EndPlace {
    /// True when this end is glued after a rotation by pi.
    pub fn flipped(&self, end: End) -> bool {
        matches!((end, self.side), (End::Tail, Side::Incoming) | (End::Head, Side::Outgoing))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub name: String,
    pub from: SwitchId,
    pub to: SwitchId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Switch {
    pub name: String,
    pub incoming: Vec<EndRef>,
    pub outgoing: Vec<EndRef>,
}

impl Switch {
    pub fn side(&self, side: Side) -> &[EndRef] {
        match side {
            Side::Incoming => &self.incoming,
            Side::Outgoing => &self.outgoing,
        }
    }
}

/// Label attached to the singular points of a switch, with an optional level
/// index used by depth-bounded censuses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularLabel {
    pub name: String,
    pub level: Option<u32>,
}

/// A train track: switches with ordered incoming/outgoing branch ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainTrack {
    switches: Vec<Switch>,
    branches: Vec<Branch>,
    places: Vec<[EndPlace; 2]>,
    switch_index: HashMap<String, SwitchId>,
    branch_index: HashMap<String, BranchId>,
    frontier: BTreeSet<SwitchId>,
    /// Designated cycle (for example the bigon) used by cyclic covers.
    pub cycle: Option<Vec<BranchId>>,
    /// Names for the singular points at selected switches.
    pub labels: BTreeMap<SwitchId, SingularLabel>,
    /// Free-form provenance notes (assumptions made by a builder).
    pub notes: Vec<String>,
}

/// Branch weights indexed by branch id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSystem {
    pub weights: Vec<Rational>,
}

impl WeightSystem {
    pub fn get(&self, b: BranchId) -> &Rational {
        &self.weights[b]
    }

    pub fn by_name(&self, track: &TrainTrack, name: &str) -> Result<&Rational, TrackError> {
        Ok(&self.weights[track.branch_id(name)?])
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: &Rational) -> WeightSystem {
        WeightSystem { weights: self.weights.iter().map(|w| w * factor).collect() }
    }
}

/// One oriented step of a train path. `forward` means tail to head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub branch: BranchId,
    pub forward: bool,
}

impl Step {
    pub fn reversed(self) -> Step {
        Step { branch: self.branch, forward: !self.forward }
    }
    pub fn exit_end(self) -> End {
        if self.forward {
            End::Head
        } else {
            End::Tail
        }
    }
    pub fn entry_end(self) -> End {
        self.exit_end().other()
    }
}

/// An oriented finite train path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TrainPath {
    pub steps: Vec<Step>,
}

impl TrainPath {
    pub fn new(steps: Vec<Step>) -> Self {
        Self { steps }
    }
    pub fn len(&self) -> usize {
        self.steps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
    pub fn reversed(&self) -> TrainPath {
        TrainPath { steps: self.steps.iter().rev().map(|s| s.reversed()).collect() }
    }
    pub fn branch_ids(&self) -> Vec<BranchId> {
        self.steps.iter().map(|s| s.branch).collect()
    }
    pub fn names(&self, track: &TrainTrack) -> Vec<String> {
        self.steps.iter().map(|s| track.branch(s.branch).name.clone()).collect()
    }
}

/// A switch whose weights do not balance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchViolation {
    pub switch: String,
    #[serde(with = "crate::numerics::serde_rational")]
    pub incoming: Rational,
    #[serde(with = "crate::numerics::serde_rational")]
    pub outgoing: Rational,
}

impl TrainTrack {
    pub fn switches(&self) -> &[Switch] {
        &self.switches
    }
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }
    pub fn switch(&self, s: SwitchId) -> &Switch {
        &self.switches[s]
    }
    pub fn branch(&self, b: BranchId) -> &Branch {
        &self.branches[b]
    }
    pub fn num_switches(&self) -> usize {
        self.switches.len()
    }
    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }
    pub fn frontier(&self) -> &BTreeSet<SwitchId> {
        &self.frontier
    }
    pub fn is_frontier(&self, s: SwitchId) -> bool {
        self.frontier.contains(&s)
    }
    pub fn place(&self, b: BranchId, end: End) -> EndPlace {
        self.places[b][end as usize]
    }
    pub fn branch_id(&self, name: &str) -> Result<BranchId, TrackError> {
        self.branch_index.get(name).copied().ok_or_else(|| TrackError::UnknownBranch(name.to_string()))
    }
    pub fn switch_id(&self, name: &str) -> Result<SwitchId, TrackError> {
        self.switch_index.get(name).copied().ok_or_else(|| TrackError::UnknownSwitch(name.to_string()))
    }
    pub fn has_branch(&self, name: &str) -> bool {
        self.branch_index.contains_key(name)
    }

    /// Switch reached when leaving a branch through `step`.
    pub fn exit_place(&self, step: Step) -> EndPlace {
        self.place(step.branch, step.exit_end())
    }

    /// Switch at which `step` starts.
    pub fn entry_place(&self, step: Step) -> EndPlace {
        self.place(step.branch, step.entry_end())
    }

    /// True when `b` may follow `a` smoothly: `a` leaves a switch on one side
    /// and `b` departs the same switch from the other side.
    pub fn follows(&self, a: Step, b: Step) -> bool {
        let out = self.exit_place(a);
        let inn = self.entry_place(b);
        out.switch == inn.switch && out.side != inn.side
    }

    /// All oriented continuations of a step.
    pub fn continuations(&self, a: Step) -> Vec<Step> {
        let p = self.exit_place(a);
        self.switches[p.switch].side(p.side.other()).iter().map(|e| Step { branch: e.branch, forward: e.end == End::Tail }).collect()
    }

    /// Checks an oriented path.
    pub fn is_oriented_train_path(&self, path: &TrainPath) -> bool {
        path.steps.windows(2).all(|w| self.follows(w[0], w[1]))
    }

    /// Checks an unoriented branch sequence: true iff some choice of
    /// orientations makes it a train path.
    pub fn is_train_path(&self, seq: &[&str]) -> Result<bool, TrackError> {
        let ids = seq.iter().map(|n| self.branch_id(n)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.orient(&ids).is_some())
    }

    /// Finds an orientation making `ids` a train path, if one exists.
    pub fn orient(&self, ids: &[BranchId]) -> Option<TrainPath> {
        if ids.is_empty() {
            return Some(TrainPath::default());
        }
        for first in [true, false] {
            let mut steps = vec![Step { branch: ids[0], forward: first }];
            let mut ok = true;
            for &b in &ids[1..] {
                let last = *steps.last().unwrap();
                let cands: Vec<Step> = [true, false].into_iter().map(|f| Step { branch: b, forward: f }).filter(|s| self.follows(last, *s)).collect();
                match cands.first() {
                    Some(s) => steps.push(*s),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Some(TrainPath::new(steps));
            }
        }
        None
    }

    /// Converts an oriented path given as `name` or `name'` tokens
    /// (apostrophe meaning head to tail).
    pub fn parse_path(&self, tokens: &[&str]) -> Result<TrainPath, TrackError> {
        let steps = tokens
            .iter()
            .map(|t| {
                let (name, fwd) = match t.strip_suffix('\'') {
                    Some(n) => (n, false),
                    None => (*t, true),
                };
                Ok(Step { branch: self.branch_id(name)?, forward: fwd })
            })
            .collect::<Result<Vec<_>, TrackError>>()?;
        Ok(TrainPath::new(steps))
    }

    /// Lists every non-frontier switch whose weights do not balance, and every
    /// switch adjacent to a negative weight.
    pub fn check_switch_conditions(&self, w: &WeightSystem) -> Vec<SwitchViolation> {
        let mut out = Vec::new();
        for (s, sw) in self.switches.iter().enumerate() {
            if self.is_frontier(s) {
                continue;
            }
            let sum = |l: &[EndRef]| l.iter().fold(Rational::zero(), |a, e| a + &w.weights[e.branch]);
            let (i, o) = (sum(&sw.incoming), sum(&sw.outgoing));
            let negative = sw.incoming.iter().chain(&sw.outgoing).any(|e| w.weights[e.branch].is_negative());
            if i != o || negative {
                out.push(SwitchViolation { switch: sw.name.clone(), incoming: i, outgoing: o });
            }
        }
        out
    }

    /// Solves the switch conditions for the branches not listed in `fixed`.
    ///
    /// `extra` adds linear conditions `sum coeff * w(b) = value`. Fails when
    /// the system is inconsistent or leaves some weight undetermined.
    pub fn solve_weights(&self, fixed: &HashMap<BranchId, Rational>, extra: &[(Vec<(BranchId, Rational)>, Rational)]) -> Result<WeightSystem, TrackError> {
        let unknown: Vec<BranchId> = (0..self.branches.len()).filter(|b| !fixed.contains_key(b)).collect();
        let col: HashMap<BranchId, usize> = unknown.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let n = unknown.len();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let mut push = |terms: &[(BranchId, Rational)], value: Rational| {
            let mut row = vec![Rational::zero(); n + 1];
            let mut rhs = value;
            for (b, c) in terms {
                match col.get(b) {
                    Some(&j) => row[j] += c,
                    None => rhs -= c * &fixed[b],
                }
            }
            row[n] = rhs;
            rows.push(row);
        };
        for (s, sw) in self.switches.iter().enumerate() {
            if self.is_frontier(s) {
                continue;
            }
            let mut terms: Vec<(BranchId, Rational)> = Vec::new();
            for e in &sw.incoming {
                terms.push((e.branch, Rational::from_integer(1.into())));
            }
            for e in &sw.outgoing {
                terms.push((e.branch, Rational::from_integer((-1).into())));
            }
            push(&terms, Rational::zero());
        }
        for (terms, value) in extra {
            push(terms, value.clone());
        }
        // Gauss-Jordan elimination over the rationals.
        let mut rank = 0;
        for c in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
                return Err(TrackError::Domain(format!("weight of {} is not determined", self.branches[unknown[c]].name)));
            };
            rows.swap(rank, p);
            let piv = rows[rank][c].clone();
            for x in rows[rank].iter_mut() {
                *x /= &piv;
            }
            for r in 0..rows.len() {
                if r != rank && !rows[r][c].is_zero() {
                    let f = rows[r][c].clone();
                    let pivot_row = rows[rank].clone();
                    for (x, p) in rows[r][c..=n].iter_mut().zip(&pivot_row[c..=n]) {
                        *x -= p * &f;
                    }
                }
            }
            rank += 1;
        }
        if rows[rank..].iter().any(|r| !r[n].is_zero()) {
            return Err(TrackError::Domain("switch conditions are inconsistent with the given weights".into()));
        }
        let mut weights = vec![Rational::zero(); self.branches.len()];
        for (b, w) in fixed {
            weights[*b] = w.clone();
        }
        for (i, &b) in unknown.iter().enumerate() {
            weights[b] = rows[i][n].clone();
        }
        Ok(WeightSystem { weights })
    }

    /// Breadth-first distance (in switches) from the frontier; `None` when the
    /// track has no frontier component reachable.
    pub fn frontier_distance(&self) -> Vec<Option<usize>> {
        let mut adj: Vec<Vec<SwitchId>> = vec![Vec::new(); self.switches.len()];
        for b in &self.branches {
            adj[b.from].push(b.to);
            adj[b.to].push(b.from);
        }
        let mut dist = vec![None; self.switches.len()];
        let mut queue: std::collections::VecDeque<SwitchId> = self.frontier.iter().copied().collect();
        for &f in &self.frontier {
            dist[f] = Some(0);
        }
        while let Some(s) = queue.pop_front() {
            let d = dist[s].unwrap();
            for &t in &adj[s] {
                if dist[t].is_none() {
                    dist[t] = Some(d + 1);
                    queue.push_back(t);
                }
            }
        }
        dist
    }
}

/// Incremental constructor validating that every end is placed exactly once.
#[derive(Debug, Default, Clone)]
pub struct TrackBuilder {
    switches: Vec<String>,
    branches: Vec<(String, String, String, Rational)>,
    incoming: HashMap<String, Vec<(String, End)>>,
    outgoing: HashMap<String, Vec<(String, End)>>,
    frontier: Vec<String>,
    cycle: Option<Vec<String>>,
    labels: Vec<(String, SingularLabel)>,
    notes: Vec<String>,
}

impl TrackBuilder {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn switch(&mut self, name: &str) -> &mut Self {
        self.switches.push(name.to_string());
        self
    }
    pub fn branch(&mut self, name: &str, from: &str, to: &str, weight: Rational) -> &mut Self {
        self.branches.push((name.to_string(), from.to_string(), to.to_string(), weight));
        self
    }
    pub fn incoming(&mut self, sw: &str, ends: &[(&str, End)]) -> &mut Self {
        self.incoming.insert(sw.to_string(), ends.iter().map(|(n, e)| (n.to_string(), *e)).collect());
        self
    }
    pub fn outgoing(&mut self, sw: &str, ends: &[(&str, End)]) -> &mut Self {
        self.outgoing.insert(sw.to_string(), ends.iter().map(|(n, e)| (n.to_string(), *e)).collect());
        self
    }
    pub fn incoming_owned(&mut self, sw: &str, ends: Vec<(String, End)>) -> &mut Self {
        self.incoming.insert(sw.to_string(), ends);
        self
    }
    pub fn outgoing_owned(&mut self, sw: &str, ends: Vec<(String, End)>) -> &mut Self {
        self.outgoing.insert(sw.to_string(), ends);
        self
    }
    pub fn frontier(&mut self, sw: &str) -> &mut Self {
        self.frontier.push(sw.to_string());
        self
    }
    pub fn cycle(&mut self, names: &[&str]) -> &mut Self {
        self.cycle = Some(names.iter().map(|s| s.to_string()).collect());
        self
    }
    pub fn label(&mut self, sw: &str, name: &str, level: Option<u32>) -> &mut Self {
        self.labels.push((sw.to_string(), SingularLabel { name: name.to_string(), level }));
        self
    }
    pub fn note(&mut self, note: &str) -> &mut Self {
        self.notes.push(note.to_string());
        self
    }

    pub fn build(&self) -> Result<(TrainTrack, WeightSystem), TrackError> {
        let mut switch_index = HashMap::new();
        for (i, s) in self.switches.iter().enumerate() {
            if switch_index.insert(s.clone(), i).is_some() {
                return Err(TrackError::Malformed(format!("duplicate switch {s}")));
            }
        }
        let sid = |n: &str| switch_index.get(n).copied().ok_or_else(|| TrackError::UnknownSwitch(n.to_string()));
        let mut branch_index = HashMap::new();
        let mut branches = Vec::new();
        let mut weights = Vec::new();
        for (i, (n, f, t, w)) in self.branches.iter().enumerate() {
            if branch_index.insert(n.clone(), i).is_some() {
                return Err(TrackError::Malformed(format!("duplicate branch {n}")));
            }
            branches.push(Branch { name: n.clone(), from: sid(f)?, to: sid(t)? });
            weights.push(w.clone());
        }
        let bid = |n: &str| branch_index.get(n).copied().ok_or_else(|| TrackError::UnknownBranch(n.to_string()));
        let mut switches: Vec<Switch> = self.switches.iter().map(|n| Switch { name: n.clone(), incoming: Vec::new(), outgoing: Vec::new() }).collect();
        let mut places: Vec<[Option<EndPlace>; 2]> = vec![[None, None]; branches.len()];
        for (side, table) in [(Side::Incoming, &self.incoming), (Side::Outgoing, &self.outgoing)] {
            let mut keys: Vec<&String> = table.keys().collect();
            keys.sort();
            for sw in keys {
                let s = sid(sw)?;
                for (index, (bn, end)) in table[sw].iter().enumerate() {
                    let b = bid(bn)?;
                    let expected = if *end == End::Tail { branches[b].from } else { branches[b].to };
                    if expected != s {
                        return Err(TrackError::Malformed(format!("end {bn}:{end:?} listed at {sw}")));
                    }
                    if places[b][*end as usize].is_some() {
                        return Err(TrackError::Malformed(format!("end {bn}:{end:?} listed twice")));
                    }
                    places[b][*end as usize] = Some(EndPlace { switch: s, side, index });
                    let r = EndRef { branch: b, end: *end };
                    match side {
                        Side::Incoming => switches[s].incoming.push(r),
                        Side::Outgoing => switches[s].outgoing.push(r),
                    }
                }
            }
        }
        let places = places
            .into_iter()
            .enumerate()
            .map(|(b, p)| match p {
                [Some(a), Some(c)] => Ok([a, c]),
                _ => Err(TrackError::Malformed(format!("branch {} has an unplaced end", branches[b].name))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let frontier = self.frontier.iter().map(|n| sid(n)).collect::<Result<BTreeSet<_>, _>>()?;
        for (s, sw) in switches.iter().enumerate() {
            if !frontier.contains(&s) && (sw.incoming.is_empty() || sw.outgoing.is_empty()) {
                return Err(TrackError::Malformed(format!("switch {} has an empty side", sw.name)));
            }
        }
        let cycle = match &self.cycle {
            Some(c) => Some(c.iter().map(|n| bid(n)).collect::<Result<Vec<_>, _>>()?),
            None => None,
        };
        let mut labels = BTreeMap::new();
        for (sw, l) in &self.labels {
            labels.insert(sid(sw)?, l.clone());
        }
        let track = TrainTrack { switches, branches, places, switch_index, branch_index, frontier, cycle, labels, notes: self.notes.clone() };
        Ok((track, WeightSystem { weights }))
    }
}

/// JSON interchange form. List entries are branch names; a trailing `~` marks
/// an end glued after rotation by pi (a tail in an incoming list or a head in
/// an outgoing list).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackJson {
    pub switches: Vec<String>,
    pub branches: Vec<BranchJson>,
    pub incoming: BTreeMap<String, Vec<String>>,
    pub outgoing: BTreeMap<String, Vec<String>>,
    pub weights: BTreeMap<String, String>,
    pub frontier: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, SingularLabel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchJson {
    pub name: String,
    pub from: String,
    pub to: String,
}

fn end_token(track: &TrainTrack, e: EndRef, side: Side) -> String {
    let name = &track.branch(e.branch).name;
    let straight = matches!((e.end, side), (End::Tail, Side::Outgoing) | (End::Head, Side::Incoming));
    if straight {
        name.clone()
    } else {
        format!("{name}~")
    }
}

fn parse_end_token(tok: &str, side: Side) -> (String, End) {
    let (name, flipped) = match tok.strip_suffix('~') {
        Some(n) => (n, true),
        None => (tok, false),
    };
    let straight = match side {
        Side::Outgoing => End::Tail,
        Side::Incoming => End::Head,
    };
    (name.to_string(), if flipped { straight.other() } else { straight })
}

impl TrackJson {
    pub fn from_track(track: &TrainTrack, w: &WeightSystem) -> Self {
        let mut incoming = BTreeMap::new();
        let mut outgoing = BTreeMap::new();
        for sw in &track.switches {
            incoming.insert(sw.name.clone(), sw.incoming.iter().map(|e| end_token(track, *e, Side::Incoming)).collect());
            outgoing.insert(sw.name.clone(), sw.outgoing.iter().map(|e| end_token(track, *e, Side::Outgoing)).collect());
        }
        TrackJson {
            switches: track.switches.iter().map(|s| s.name.clone()).collect(),
            branches: track
                .branches
                .iter()
                .map(|b| BranchJson { name: b.name.clone(), from: track.switches[b.from].name.clone(), to: track.switches[b.to].name.clone() })
                .collect(),
            incoming,
            outgoing,
            weights: track.branches.iter().zip(&w.weights).map(|(b, x)| (b.name.clone(), format_rational(x))).collect(),
            frontier: track.frontier.iter().map(|&s| track.switches[s].name.clone()).collect(),
            cycle: track.cycle.as_ref().map(|c| c.iter().map(|&b| track.branches[b].name.clone()).collect()),
            labels: track.labels.iter().map(|(&s, l)| (track.switches[s].name.clone(), l.clone())).collect(),
            notes: track.notes.clone(),
        }
    }

    pub fn to_track(&self) -> Result<(TrainTrack, WeightSystem), TrackError> {
        let mut b = TrackBuilder::new();
        for s in &self.switches {
            b.switch(s);
        }
        for br in &self.branches {
            let w = self.weights.get(&br.name).ok_or_else(|| TrackError::Malformed(format!("no weight for {}", br.name)))?;
            let w = parse_rational(w).map_err(|e| TrackError::Malformed(e.to_string()))?;
            b.branch(&br.name, &br.from, &br.to, w);
        }
        for (sw, l) in &self.incoming {
            b.incoming_owned(sw, l.iter().map(|t| parse_end_token(t, Side::Incoming)).collect());
        }
        for (sw, l) in &self.outgoing {
            b.outgoing_owned(sw, l.iter().map(|t| parse_end_token(t, Side::Outgoing)).collect());
        }
        for f in &self.frontier {
            b.frontier(f);
        }
        if let Some(c) = &self.cycle {
            let names: Vec<&str> = c.iter().map(|s| s.as_str()).collect();
            b.cycle(&names);
        }
        for (sw, l) in &self.labels {
            b.label(sw, &l.name, l.level);
        }
        for n in &self.notes {
            b.note(n);
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn bigon() -> (TrainTrack, WeightSystem) {
        let mut b = TrackBuilder::new();
        b.switch("s").switch("t");
        b.branch("x", "s", "t", rat(1, 3)).branch("y", "s", "t", rat(2, 3)).branch("z", "t", "s", rat(1, 1));
        b.outgoing("s", &[("x", End::Tail), ("y", End::Tail)]).incoming("s", &[("z", End::Head)]);
        b.incoming("t", &[("x", End::Head), ("y", End::Head)]).outgoing("t", &[("z", End::Tail)]);
        b.build().unwrap()
    }

    #[test]
    fn train_paths_on_small_track() {
        let (t, w) = bigon();
        assert!(t.check_switch_conditions(&w).is_empty());
        assert!(t.is_train_path(&["x", "z", "y"]).unwrap());
        assert!(!t.is_train_path(&["x", "y"]).unwrap());
        assert!(t.is_train_path(&["x"]).unwrap());
        assert!(t.is_train_path(&["nope"]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let (t, w) = bigon();
        let j = TrackJson::from_track(&t, &w);
        let s = serde_json::to_string(&j).unwrap();
        let back: TrackJson = serde_json::from_str(&s).unwrap();
        let (t2, w2) = back.to_track().unwrap();
        assert_eq!(TrackJson::from_track(&t2, &w2), j);
    }

    #[test]
    fn duplicate_end_is_rejected() {
        let mut b = TrackBuilder::new();
        b.switch("s");
        b.branch("x", "s", "s", rat(1, 1));
        b.outgoing("s", &[("x", End::Tail), ("x", End::Tail)]);
        assert!(b.build().is_err());
    }

    #[test]
    fn perturbed_weight_is_reported() {
        let (t, mut w) = bigon();
        w.weights[0] = rat(1, 2);
        let v = t.check_switch_conditions(&w);
        let names: Vec<&str> = v.iter().map(|v| v.switch.as_str()).collect();
        assert_eq!(names, vec!["s", "t"]);
    }
}
