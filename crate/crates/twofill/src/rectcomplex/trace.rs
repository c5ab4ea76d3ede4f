//! Horizontal leaf tracing through the rectangle complex.
//!
//! A leaf is followed by its state inside one rectangle: the oriented branch,
//! the exact height `h` in that rectangle's own coordinates and a side offset
//! `sigma`. A nonzero `sigma` stands for the leaf at height `h + sigma * eps`,
//! which is how a leaf passes a singularity on a chosen side; `sigma = 0` is
//! the exact leaf at `h`, which stops when it lands on a singular point.

use num_traits::Zero;
use serde::Serialize;

use super::{ComplexError, RectComplex};
use crate::numerics::{format_rational, Rational};
use crate::traintrack::{BranchId, End, Step, SwitchId, TrainPath};

/// Which side a leaf keeps to when it meets a singularity, relative to the
/// direction of travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LeafLimit {
    /// The exact leaf; stops at singular points.
    Exact,
    Left,
    Right,
}

/// Position of a traced leaf inside one rectangle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Leaf {
    pub step: Step,
    pub height: Rational,
    pub sigma: i8,
}

impl Leaf {
    pub fn new(branch: BranchId, height: Rational, forward: bool, limit: LeafLimit) -> Leaf {
        let up = if forward { 1 } else { -1 };
        let sigma = match limit {
            LeafLimit::Exact => 0,
            LeafLimit::Left => up,
            LeafLimit::Right => -up,
        };
        Leaf { step: Step { branch, forward }, height, sigma }
    }

    /// The same leaf travelled the other way.
    pub fn reversed(&self) -> Leaf {
        Leaf { step: self.step.reversed(), height: self.height.clone(), sigma: self.sigma }
    }
}

/// One rectangle crossed by a leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItineraryStep {
    pub branch: BranchId,
    pub forward: bool,
    pub entry: Rational,
    pub exit: Rational,
}

/// A singular point passed at infinitesimal distance, on side `sigma` of the
/// switch interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Passage {
    pub singular: usize,
    pub sigma: i8,
    /// Index of the itinerary step after which the passage happens.
    pub after_step: usize,
}

/// How a trace ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminal {
    SingularityHit(usize),
    FrontierHit(SwitchId),
    StepBudgetExhausted,
    ClosedUp,
    /// The leaf left `G` through an extremity of a switch interval.
    BoundaryExit(SwitchId),
    /// The requested number of singular passages was reached.
    PassageLimit,
}

/// The rectangles crossed by a leaf and how the trace ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafItinerary {
    pub steps: Vec<ItineraryStep>,
    pub passages: Vec<Passage>,
    pub terminal: Terminal,
}

impl LeafItinerary {
    pub fn path(&self) -> TrainPath {
        TrainPath::new(self.steps.iter().map(|s| Step { branch: s.branch, forward: s.forward }).collect())
    }

    pub fn branch_names(&self, g: &RectComplex) -> Vec<String> {
        self.steps.iter().map(|s| g.track.branch(s.branch).name.clone()).collect()
    }

    /// Names of the singularities met, in order, including a final hit.
    pub fn singular_names(&self, g: &RectComplex) -> Vec<String> {
        let mut v: Vec<String> = self.passages.iter().map(|p| g.singular[p.singular].name.clone()).collect();
        if let Terminal::SingularityHit(s) = self.terminal {
            v.push(g.singular[s].name.clone());
        }
        v
    }

    /// JSON array of `{branch, entry, exit}` records.
    pub fn to_json(&self, g: &RectComplex) -> serde_json::Value {
        serde_json::Value::Array(
            self.steps
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "branch": g.track.branch(s.branch).name,
                        "forward": s.forward,
                        "entry": format_rational(&s.entry),
                        "exit": format_rational(&s.exit),
                    })
                })
                .collect(),
        )
    }
}

/// Result of crossing one switch.
pub(crate) enum Crossing {
    Next(Leaf, Option<(usize, i8)>),
    Stop(Terminal),
}

impl RectComplex {
    /// Moves a leaf across the switch at its exit end.
    pub(crate) fn cross(&self, leaf: &Leaf) -> Crossing {
        let end = leaf.step.exit_end();
        let (s, side, pos, flipped) = self.position(leaf.step.branch, end, &leaf.height);
        if self.track.is_frontier(s) {
            return Crossing::Stop(Terminal::FrontierHit(s));
        }
        let sigma = if flipped { -leaf.sigma } else { leaf.sigma };
        let sing = self.singular_at(s, &pos);
        if let (0, Some(p)) = (sigma, sing) {
            return Crossing::Stop(Terminal::SingularityHit(p));
        }
        let other = side.other();
        let Some(piece) = self.piece_at(s, other, &pos, sigma) else {
            return Crossing::Stop(Terminal::BoundaryExit(s));
        };
        let e = self.track.switch(s).side(other)[piece];
        let pl = self.track.place(e.branch, e.end);
        let flip2 = pl.flipped(e.end);
        let lo = self.offset(e.branch, e.end);
        let h = if flip2 { lo + self.height(e.branch) - &pos } else { &pos - lo };
        let sigma2 = if flip2 { -sigma } else { sigma };
        let next = Leaf { step: Step { branch: e.branch, forward: e.end == End::Tail }, height: h, sigma: sigma2 };
        Crossing::Next(next, sing.map(|i| (i, sigma)))
    }

    /// Follows the leaf through at most `max_steps` rectangles.
    pub fn trace_leaf(&self, start: &Leaf, max_steps: usize) -> Result<LeafItinerary, ComplexError> {
        self.trace_leaf_until(start, max_steps, usize::MAX)
    }

    /// Like [`RectComplex::trace_leaf`], stopping once `max_passages`
    /// singular points have been passed.
    pub fn trace_leaf_until(&self, start: &Leaf, max_steps: usize, max_passages: usize) -> Result<LeafItinerary, ComplexError> {
        let w = self.height(start.step.branch);
        if start.height < Rational::zero() || &start.height > w {
            return Err(ComplexError::Domain(format!(
                "height {} outside rectangle {} of height {}",
                format_rational(&start.height),
                self.track.branch(start.step.branch).name,
                format_rational(w)
            )));
        }
        let mut steps = Vec::new();
        let mut passages = Vec::new();
        let mut cur = start.clone();
        loop {
            steps.push(ItineraryStep { branch: cur.step.branch, forward: cur.step.forward, entry: cur.height.clone(), exit: cur.height.clone() });
            if steps.len() >= max_steps {
                return Ok(LeafItinerary { steps, passages, terminal: Terminal::StepBudgetExhausted });
            }
            match self.cross(&cur) {
                Crossing::Stop(t) => return Ok(LeafItinerary { steps, passages, terminal: t }),
                Crossing::Next(next, pass) => {
                    if let Some((singular, sigma)) = pass {
                        passages.push(Passage { singular, sigma, after_step: steps.len() - 1 });
                        if passages.len() >= max_passages {
                            return Ok(LeafItinerary { steps, passages, terminal: Terminal::PassageLimit });
                        }
                    }
                    if &next == start {
                        return Ok(LeafItinerary { steps, passages, terminal: Terminal::ClosedUp });
                    }
                    cur = next;
                }
            }
        }
    }

    /// The germs of leaves leaving a singular point, one per prong. Each is
    /// an exact leaf starting at the switch and moving away from it.
    pub fn prongs(&self, singular: usize) -> Vec<Leaf> {
        let sp = &self.singular[singular];
        let mut out = Vec::new();
        for side in [crate::traintrack::Side::Incoming, crate::traintrack::Side::Outgoing] {
            let b = self.bounds(sp.switch, side);
            let k = b.partition_point(|t| t < &sp.position);
            let on = k < b.len() && b[k] == sp.position;
            let pieces: Vec<usize> = if on { vec![k - 1, k] } else { vec![k - 1] };
            for piece in pieces {
                let e = self.track.switch(sp.switch).side(side)[piece];
                let pl = self.track.place(e.branch, e.end);
                let lo = self.offset(e.branch, e.end);
                let h = if pl.flipped(e.end) { lo + self.height(e.branch) - &sp.position } else { &sp.position - lo };
                out.push(Leaf { step: Step { branch: e.branch, forward: e.end == End::Tail }, height: h, sigma: 0 });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;
    use crate::traintrack::build_t;

    fn g(depth: usize) -> RectComplex {
        let (t, w) = build_t(depth).unwrap();
        RectComplex::new(&t, &w).unwrap()
    }

    #[test]
    fn p0_separatrix_reaches_q0() {
        let g = g(12);
        let p0 = g.singular_by_name("P0").unwrap();
        let hits: Vec<String> = g
            .prongs(p0)
            .iter()
            .filter_map(|l| match g.trace_leaf(l, 10_000).unwrap().terminal {
                Terminal::SingularityHit(s) => Some(g.singular[s].name.clone()),
                _ => None,
            })
            .collect();
        assert!(hits.iter().any(|n| n == "Q0"), "{hits:?}");
    }

    #[test]
    fn reversal_returns_reversed_itinerary() {
        let g = g(12);
        let b3 = g.track.branch_id("b3").unwrap();
        let start = Leaf::new(b3, rat(5, 96), true, LeafLimit::Exact);
        let fwd = g.trace_leaf(&start, 40).unwrap();
        let last = fwd.steps.last().unwrap();
        let back = Leaf { step: Step { branch: last.branch, forward: !last.forward }, height: last.exit.clone(), sigma: 0 };
        let bwd = g.trace_leaf(&back, 40).unwrap();
        let a: Vec<_> = fwd.steps.iter().map(|s| (s.branch, s.entry.clone())).collect();
        let mut b: Vec<_> = bwd.steps.iter().map(|s| (s.branch, s.entry.clone())).collect();
        b.reverse();
        assert_eq!(a, b);
    }

    #[test]
    fn itineraries_are_train_paths() {
        let g = g(10);
        for (i, name) in ["b2", "c3", "e2", "d1"].iter().enumerate() {
            let b = g.track.branch_id(name).unwrap();
            let h = g.height(b) * rat(2 * i as i64 + 1, 11);
            let it = g.trace_leaf(&Leaf::new(b, h, i % 2 == 0, LeafLimit::Exact), 200).unwrap();
            assert!(g.track.is_oriented_train_path(&it.path()));
        }
    }

    #[test]
    fn outside_height_is_rejected() {
        let g = g(4);
        let b = g.track.branch_id("b1").unwrap();
        assert!(g.trace_leaf(&Leaf::new(b, rat(3, 4), true, LeafLimit::Exact), 5).is_err());
    }
}
