//! The union of foliated rectangles built from a weighted track.
//!
//! Each branch `b` contributes a rectangle `R(b)` of width one and height
//! `w(b)`. At a switch the interval `I(v)` has length equal to the common
//! weight sum; the outgoing ends subdivide it in `<o` order and the incoming
//! ends in `<i` order, bottom to top. A straight end at offset `o` maps height
//! `h` to position `o + h`; an end glued after rotation maps it to `o + w - h`.
//!
//! A singular point is a position of `I(v)` that is an interior breakpoint on
//! at least one side, so that three or more rectangle pieces meet there.

mod census;
mod rays;
mod trace;
mod unzip;

pub use census::{accumulates, boundary_leaf_through, boundary_paths, saddle_connection_census, BoundaryOptions, BoundaryPath, Corner, SaddleConnection};
pub use rays::{alpha_entries, alpha_ray, beta_ray, cut_candidates, entry_shift, is_long, search_red_set, RedSetSearch};
pub use trace::{ItineraryStep, Leaf, LeafItinerary, LeafLimit, Passage, Terminal};
pub use unzip::{complex_isomorphism, unzip, Isomorphism, UnzipResult};

use std::collections::HashMap;

use num_traits::Zero;
use thiserror::Error;

use crate::numerics::{format_rational, Rational};
use crate::traintrack::{BranchId, End, Side, Step, SwitchId, TrainPath, TrainTrack, WeightSystem};

/// Errors raised by complex construction and tracing.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("switch condition fails at {0}")]
    SwitchCondition(String),
}

/// A point of some `I(v)` where at least three rectangle pieces meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularPoint {
    pub name: String,
    pub level: Option<u32>,
    pub switch: SwitchId,
    pub position: Rational,
}

/// The foliated rectangle complex of a weighted track.
#[derive(Debug, Clone)]
pub struct RectComplex {
    pub track: TrainTrack,
    pub weights: WeightSystem,
    /// Offset of each branch end inside its switch interval.
    offsets: Vec<[Rational; 2]>,
    /// Per switch and side, the breakpoints `0 = t0 < t1 < ... < tk = total`.
    bounds: Vec<[Vec<Rational>; 2]>,
    pub singular: Vec<SingularPoint>,
    singular_index: HashMap<(SwitchId, Rational), usize>,
}

fn side_ix(side: Side) -> usize {
    match side {
        Side::Incoming => 0,
        Side::Outgoing => 1,
    }
}

impl RectComplex {
    /// Builds the complex; fails if any non-frontier switch condition fails.
    pub fn new(track: &TrainTrack, weights: &WeightSystem) -> Result<RectComplex, ComplexError> {
        if let Some(v) = track.check_switch_conditions(weights).first() {
            return Err(ComplexError::SwitchCondition(v.switch.clone()));
        }
        let mut offsets = vec![[Rational::zero(), Rational::zero()]; track.num_branches()];
        let mut bounds = Vec::with_capacity(track.num_switches());
        for sw in track.switches() {
            let mut pair: [Vec<Rational>; 2] = [Vec::new(), Vec::new()];
            for side in [Side::Incoming, Side::Outgoing] {
                let mut acc = Rational::zero();
                let mut bs = vec![acc.clone()];
                for e in sw.side(side) {
                    offsets[e.branch][e.end as usize] = acc.clone();
                    acc += weights.get(e.branch);
                    bs.push(acc.clone());
                }
                pair[side_ix(side)] = bs;
            }
            bounds.push(pair);
        }
        let mut singular = Vec::new();
        let mut singular_index = HashMap::new();
        for (s, sw) in track.switches().iter().enumerate() {
            if track.is_frontier(s) {
                continue;
            }
            let mut pts: Vec<Rational> = Vec::new();
            for b in &bounds[s] {
                if b.len() > 2 {
                    pts.extend(b[1..b.len() - 1].iter().cloned());
                }
            }
            pts.sort();
            pts.dedup();
            let label = track.labels.get(&s);
            let many = pts.len() > 1;
            for (k, p) in pts.into_iter().enumerate() {
                let name = match label {
                    Some(l) if !many => l.name.clone(),
                    Some(l) => format!("{}#{}", l.name, k),
                    None => format!("{}@{}", sw.name, format_rational(&p)),
                };
                singular_index.insert((s, p.clone()), singular.len());
                singular.push(SingularPoint { name, level: label.and_then(|l| l.level), switch: s, position: p });
            }
        }
        Ok(RectComplex { track: track.clone(), weights: weights.clone(), offsets, bounds, singular, singular_index })
    }

    pub fn height(&self, b: BranchId) -> &Rational {
        self.weights.get(b)
    }

    pub fn offset(&self, b: BranchId, end: End) -> &Rational {
        &self.offsets[b][end as usize]
    }

    /// Breakpoints of one side of a switch, including both ends of `I(v)`.
    pub fn bounds(&self, s: SwitchId, side: Side) -> &[Rational] {
        &self.bounds[s][side_ix(side)]
    }

    /// Length of `I(v)`.
    pub fn switch_length(&self, s: SwitchId) -> &Rational {
        let [a, b] = &self.bounds[s];
        a.last().unwrap().max(b.last().unwrap())
    }

    pub fn singular_at(&self, s: SwitchId, p: &Rational) -> Option<usize> {
        self.singular_index.get(&(s, p.clone())).copied()
    }

    pub fn singular_by_name(&self, name: &str) -> Option<usize> {
        self.singular.iter().position(|x| x.name == name)
    }

    /// Position in `I(v)` of height `h` at the given end of `b`, and whether
    /// the gluing reverses orientation.
    pub fn position(&self, b: BranchId, end: End, h: &Rational) -> (SwitchId, Side, Rational, bool) {
        let pl = self.track.place(b, end);
        let flipped = pl.flipped(end);
        let off = self.offset(b, end);
        let p = if flipped { off + self.height(b) - h } else { off + h };
        (pl.switch, pl.side, p, flipped)
    }

    /// Index of the piece of `side` containing `p + sigma * eps`. With
    /// `sigma == 0` the position must lie strictly inside a piece or at an
    /// extremity of `I(v)`.
    pub fn piece_at(&self, s: SwitchId, side: Side, p: &Rational, sigma: i8) -> Option<usize> {
        let b = self.bounds(s, side);
        let k = b.len() - 1;
        if k == 0 {
            return None;
        }
        // Number of breakpoints strictly below p, and whether p is a breakpoint.
        let idx = b.partition_point(|t| t < p);
        let on = idx < b.len() && &b[idx] == p;
        let piece = if on {
            match sigma {
                1 => idx,
                -1 => idx.checked_sub(1)?,
                _ => {
                    if idx == 0 {
                        0
                    } else if idx == k {
                        k - 1
                    } else {
                        return None;
                    }
                }
            }
        } else {
            idx.checked_sub(1)?
        };
        (piece < k).then_some(piece)
    }

    /// Sub-bands of the band of heights `[lo, hi]` in the rectangle of
    /// `step`, one for each continuation across the exit switch that the band
    /// meets with positive width. Heights are given in each rectangle's own
    /// coordinates. A frontier switch has no continuations.
    pub fn band_children(&self, step: Step, lo: &Rational, hi: &Rational) -> Vec<(Step, Rational, Rational)> {
        let end = step.exit_end();
        let pl = self.track.place(step.branch, end);
        if self.track.is_frontier(pl.switch) {
            return Vec::new();
        }
        let off = self.offset(step.branch, end);
        let w = self.height(step.branch);
        let (a, b) = if pl.flipped(end) { (off + w - hi, off + w - lo) } else { (off + lo, off + hi) };
        let other = pl.side.other();
        let bs = self.bounds(pl.switch, other);
        let mut out = Vec::new();
        for (k, e) in self.track.switch(pl.switch).side(other).iter().enumerate() {
            let x = if bs[k] > a { bs[k].clone() } else { a.clone() };
            let y = if bs[k + 1] < b { bs[k + 1].clone() } else { b.clone() };
            if x >= y {
                continue;
            }
            let off2 = self.offset(e.branch, e.end);
            let next = Step { branch: e.branch, forward: e.end == End::Tail };
            if self.track.place(e.branch, e.end).flipped(e.end) {
                let top = off2 + self.height(e.branch);
                out.push((next, &top - &y, &top - &x));
            } else {
                out.push((next, &x - off2, &y - off2));
            }
        }
        out
    }

    /// Oriented train paths of `len` rectangles starting with `start`, with
    /// the total height of the band of leaves following each.
    pub fn cylinders(&self, start: Step, len: usize) -> Vec<(TrainPath, Rational)> {
        let mut out = Vec::new();
        let mut stack = vec![(vec![start], Rational::zero(), self.height(start.branch).clone())];
        while let Some((path, lo, hi)) = stack.pop() {
            if path.len() == len {
                out.push((TrainPath::new(path), hi - lo));
                continue;
            }
            for (s, a, b) in self.band_children(*path.last().unwrap(), &lo, &hi) {
                let mut p = path.clone();
                p.push(s);
                stack.push((p, a, b));
            }
        }
        out.sort_by(|a, b| a.0.steps.cmp(&b.0.steps));
        out
    }

    /// Number of named singularities.
    pub fn num_singular(&self) -> usize {
        self.singular.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;
    use crate::traintrack::{build_t, TrackBuilder};

    #[test]
    fn heights_and_singularities_of_g() {
        let (t, w) = build_t(8).unwrap();
        let g = RectComplex::new(&t, &w).unwrap();
        assert_eq!(g.height(t.branch_id("d2").unwrap()), &rat(1, 8));
        let p0 = g.singular_by_name("P0").unwrap();
        assert_eq!(g.singular[p0].position, rat(1, 2));
        for n in 0..8 {
            assert!(g.singular_by_name(&format!("P{n}")).is_some());
            assert!(g.singular_by_name(&format!("Q{n}")).is_some());
        }
    }

    #[test]
    fn single_branch_has_no_singularity() {
        let mut b = TrackBuilder::new();
        b.switch("a").switch("b").branch("x", "a", "b", rat(1, 1));
        b.outgoing("a", &[("x", End::Tail)]).incoming("b", &[("x", End::Head)]);
        b.frontier("a").frontier("b");
        let (t, w) = b.build().unwrap();
        assert_eq!(RectComplex::new(&t, &w).unwrap().num_singular(), 0);
    }

    #[test]
    fn cylinder_measures_add_up() {
        let (t, w) = build_t(12).unwrap();
        let g = RectComplex::new(&t, &w).unwrap();
        let b2 = t.branch_id("b2").unwrap();
        for len in 1..6 {
            let total: Rational = g.cylinders(Step { branch: b2, forward: false }, len).into_iter().map(|c| c.1).sum();
            assert_eq!(total, rat(1, 4));
        }
    }

    #[test]
    fn gluing_measure_is_conserved() {
        let (t, w) = build_t(12).unwrap();
        let g = RectComplex::new(&t, &w).unwrap();
        for s in 0..t.num_switches() {
            if !t.is_frontier(s) {
                assert_eq!(g.bounds(s, Side::Incoming).last(), g.bounds(s, Side::Outgoing).last());
            }
        }
    }
}
