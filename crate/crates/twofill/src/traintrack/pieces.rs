//! Train paths through a piece of a track with stops.
//!
//! A piece is a finite set of branches of the collapsed track T* together
//! with stop branches, the chain branches crossed by the boundary curves of
//! the piece. A path through the piece enters along one stop branch, runs
//! through interior branches only, and leaves along a stop branch.
//!
//! Two enumerations are offered. [`piece_paths_in`] lists the path types that
//! leaves of the foliated complex actually follow, found by pushing bands of
//! leaves through the switches. [`combinatorial_piece_paths`] lists every
//! smooth edge path up to a length bound, which may be unbounded when the
//! piece contains two loops a path can bounce between.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;

use super::{build_t_star, Step, TrackError, TrainTrack, WeightSystem};
use crate::rectcomplex::RectComplex;

/// The two kinds of three-holed piece cut out by the pants curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Piece {
    /// The piece holding the bigon around the puncture.
    V,
    /// The repeating piece, the same at every index.
    U,
}

/// A stop: a chain branch crossed by a boundary curve, entered in the
/// direction `forward` when a path comes into the piece across it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stop {
    pub branch: String,
    pub forward: bool,
    pub boundary: String,
}

/// A piece of T* given by its interior branches and stops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PieceModel {
    pub piece: Piece,
    pub interior: Vec<String>,
    pub stops: Vec<Stop>,
}

fn stop(branch: &str, forward: bool, boundary: &str) -> Stop {
    Stop { branch: branch.into(), forward, boundary: boundary.into() }
}

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl PieceModel {
    /// The piece between the curves crossing `f0*` and `f-2*`.
    pub fn v() -> Self {
        PieceModel {
            piece: Piece::V,
            interior: owned(&["e1*", "e2*", "b0*", "b-1*", "d0*", "b1*", "c1*", "d1*", "f-1*", "h2*"]),
            stops: vec![stop("f0*", true, "C0"), stop("f-2*", false, "C-1")],
        }
    }

    /// The positive piece of index `k >= 1`, between the curves crossing
    /// `f(2k)*` and `f(2k-2)*`.
    pub fn u_positive(k: usize) -> Self {
        let k = k.max(1) as i64;
        PieceModel {
            piece: Piece::U,
            interior: vec![format!("f{}*", 2 * k - 1), format!("h{}*", 2 * k - 1), format!("c{}*", 2 * k), format!("d{}*", 2 * k)],
            stops: vec![
                Stop { branch: format!("f{}*", 2 * k), forward: true, boundary: format!("C{k}") },
                Stop { branch: format!("f{}*", 2 * k - 2), forward: false, boundary: format!("C{}", k - 1) },
            ],
        }
    }

    /// The negative piece of index `k >= 1`, between the curves crossing
    /// `f(-2k)*` and `f(-2k-2)*`.
    pub fn u_negative(k: usize) -> Self {
        let k = k.max(1) as i64;
        PieceModel {
            piece: Piece::U,
            interior: vec![format!("f{}*", -2 * k - 1), format!("h{}*", 2 * k + 2), format!("c{}*", 2 * k + 1), format!("d{}*", 2 * k + 1)],
            stops: vec![
                Stop { branch: format!("f{}*", -2 * k), forward: true, boundary: format!("C{}", -k) },
                Stop { branch: format!("f{}*", -2 * k - 2), forward: false, boundary: format!("C{}", -k - 1) },
            ],
        }
    }

    /// The model used for `piece`.
    pub fn of(piece: Piece) -> Self {
        match piece {
            Piece::V => Self::v(),
            Piece::U => Self::u_positive(1),
        }
    }
}

/// A train path through a piece, stored in the orientation whose step list
/// is lexicographically least, so a path and its reverse coincide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PiecePath {
    pub branches: Vec<String>,
    pub entry: String,
    pub exit: String,
}

impl PiecePath {
    /// True when the path enters and leaves through the same boundary curve.
    pub fn self_returning(&self) -> bool {
        self.entry == self.exit
    }

    /// True when the path runs along some branch that is not a stop.
    pub fn has_interior_branch(&self) -> bool {
        self.branches.len() > 2
    }
}

struct Resolved {
    interior: BTreeSet<usize>,
    stops: Vec<(Step, String)>,
}

fn resolve(t: &TrainTrack, m: &PieceModel) -> Result<Resolved, TrackError> {
    let interior = m.interior.iter().map(|n| t.branch_id(n)).collect::<Result<_, _>>()?;
    let stops =
        m.stops.iter().map(|s| Ok((Step { branch: t.branch_id(&s.branch)?, forward: s.forward }, s.boundary.clone()))).collect::<Result<_, TrackError>>()?;
    Ok(Resolved { interior, stops })
}

fn canonical(t: &TrainTrack, r: &Resolved, path: &[Step]) -> PiecePath {
    let fwd: Vec<(usize, bool)> = path.iter().map(|s| (s.branch, s.forward)).collect();
    let bwd: Vec<(usize, bool)> = path.iter().rev().map(|s| (s.branch, !s.forward)).collect();
    let label = |s: Step| r.stops.iter().find(|(st, _)| st.branch == s.branch).map(|(_, b)| b.clone()).unwrap_or_default();
    let (first, last) = (path[0], *path.last().unwrap());
    let (steps, entry, exit) = if fwd <= bwd { (fwd, label(first), label(last)) } else { (bwd, label(last), label(first)) };
    let branches = steps.iter().map(|(b, f)| if *f { t.branch(*b).name.clone() } else { format!("{}'", t.branch(*b).name) }).collect();
    PiecePath { branches, entry, exit }
}

/// Path types through `model` followed by leaves of the foliated complex of
/// `(t, w)`. Each stop band is pushed through the switches; a sub-band that
/// reaches a stop yields its path. Sub-bands still inside the piece after
/// `max_len` rectangles are dropped and counted in the second return value.
pub fn piece_paths_in(t: &TrainTrack, w: &WeightSystem, model: &PieceModel, max_len: usize) -> Result<(Vec<PiecePath>, usize), TrackError> {
    let g = RectComplex::new(t, w).map_err(|e| TrackError::Domain(e.to_string()))?;
    let r = resolve(t, model)?;
    let is_stop = |b: usize| r.stops.iter().any(|(s, _)| s.branch == b);
    let mut found = BTreeSet::new();
    let mut dropped = 0;
    for (st, _) in &r.stops {
        let mut stack = vec![(vec![*st], Zero::zero(), g.height(st.branch).clone())];
        while let Some((path, lo, hi)) = stack.pop() {
            if path.len() > max_len {
                dropped += 1;
                continue;
            }
            for (next, a, b) in g.band_children(*path.last().unwrap(), &lo, &hi) {
                let mut p = path.clone();
                p.push(next);
                if is_stop(next.branch) {
                    found.insert(canonical(t, &r, &p));
                } else if r.interior.contains(&next.branch) {
                    stack.push((p, a, b));
                }
            }
        }
    }
    Ok((found.into_iter().collect(), dropped))
}

/// Every smooth edge path through `model` of at most `max_len` branches.
/// The flag reports whether some path was still inside at the bound.
pub fn combinatorial_piece_paths(t: &TrainTrack, model: &PieceModel, max_len: usize) -> Result<(Vec<PiecePath>, bool), TrackError> {
    let r = resolve(t, model)?;
    let is_stop = |b: usize| r.stops.iter().any(|(s, _)| s.branch == b);
    let mut found = BTreeSet::new();
    let mut truncated = false;
    for (st, _) in &r.stops {
        let mut stack = vec![vec![*st]];
        while let Some(path) = stack.pop() {
            if path.len() >= max_len {
                truncated = true;
                continue;
            }
            for next in t.continuations(*path.last().unwrap()) {
                let mut p = path.clone();
                p.push(next);
                if is_stop(next.branch) {
                    found.insert(canonical(t, &r, &p));
                } else if r.interior.contains(&next.branch) {
                    stack.push(p);
                }
            }
        }
    }
    Ok((found.into_iter().collect(), truncated))
}

/// Path types through the named piece of T*, as followed by leaves.
pub fn enumerate_paths_through_piece(piece: Piece) -> Result<Vec<PiecePath>, TrackError> {
    let (t, w) = build_t_star(8)?;
    Ok(piece_paths_in(&t, &w, &PieceModel::of(piece), 64)?.0)
}
