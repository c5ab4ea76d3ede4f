//! Saddle connections, boundary paths and the accumulation surrogate.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::trace::{Leaf, LeafItinerary, Terminal};
use super::RectComplex;
use crate::traintrack::{Step, TrainPath};

/// A horizontal segment joining two singular points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaddleConnection {
    pub from: usize,
    pub to: usize,
    pub prong: usize,
    pub itinerary: LeafItinerary,
}

/// One side of a singular point: the leaf at `position + sigma * eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Corner {
    pub singular: usize,
    pub sigma: i8,
}

/// A boundary path, identified by the corners its singular leaf passes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPath {
    pub corners: Vec<Corner>,
    /// The branches crossed by the leaf through the anchor corner, centred on it.
    pub window: TrainPath,
    /// Singular points passed along the window, in order.
    pub singular_names: Vec<String>,
}

fn level_ok(g: &RectComplex, s: usize, max_level: u32) -> bool {
    g.singular[s].level.is_some_and(|l| l <= max_level)
}

/// Traces every prong of every named singularity of level at most `max_level`
/// and keeps the prongs that end on a singular point.
pub fn saddle_connection_census(g: &RectComplex, max_level: u32, max_steps: usize) -> Vec<SaddleConnection> {
    let seeds: Vec<usize> = (0..g.num_singular()).filter(|&s| level_ok(g, s, max_level)).collect();
    let run = |&s: &usize| -> Vec<SaddleConnection> {
        g.prongs(s)
            .iter()
            .enumerate()
            .filter_map(|(k, leaf)| {
                let it = g.trace_leaf(leaf, max_steps).ok()?;
                match it.terminal {
                    Terminal::SingularityHit(t) => Some(SaddleConnection { from: s, to: t, prong: k, itinerary: it }),
                    _ => None,
                }
            })
            .collect()
    };
    crate::par::flat_map(&seeds, run)
}

/// The two half-leaves through a corner, leaving the switch on either side.
fn corner_half_leaves(g: &RectComplex, c: Corner) -> [Option<Leaf>; 2] {
    use crate::traintrack::{End, Side};
    let sp = &g.singular[c.singular];
    let mut out = [None, None];
    for (i, side) in [Side::Incoming, Side::Outgoing].into_iter().enumerate() {
        let Some(piece) = g.piece_at(sp.switch, side, &sp.position, c.sigma) else { continue };
        let e = g.track.switch(sp.switch).side(side)[piece];
        let pl = g.track.place(e.branch, e.end);
        let flip = pl.flipped(e.end);
        let lo = g.offset(e.branch, e.end);
        let h = if flip { lo + g.height(e.branch) - &sp.position } else { &sp.position - lo };
        let sigma = if flip { -c.sigma } else { c.sigma };
        out[i] = Some(Leaf { step: Step { branch: e.branch, forward: e.end == End::Tail }, height: h, sigma });
    }
    out
}

/// The leaf through a corner: the half leaving through the incoming side
/// reversed, then the half leaving through the outgoing side.
fn corner_leaf(g: &RectComplex, c: Corner, half: usize, passages: usize) -> (TrainPath, Vec<Corner>, Vec<String>) {
    let [a, b] = corner_half_leaves(g, c);
    let trace = |l: &Option<Leaf>| l.as_ref().map(|l| g.trace_leaf_until(l, half, passages).expect("corner leaf inside rectangle"));
    let (ta, tb) = (trace(&a), trace(&b));
    let mut steps = Vec::new();
    let mut corners = Vec::new();
    let mut names = Vec::new();
    if let Some(t) = &ta {
        steps.extend(t.path().reversed().steps);
        for ps in t.passages.iter().rev() {
            corners.push(Corner { singular: ps.singular, sigma: ps.sigma });
            names.push(g.singular[ps.singular].name.clone());
        }
    }
    corners.push(c);
    names.push(g.singular[c.singular].name.clone());
    if let Some(t) = &tb {
        steps.extend(t.path().steps);
        for ps in &t.passages {
            corners.push(Corner { singular: ps.singular, sigma: ps.sigma });
            names.push(g.singular[ps.singular].name.clone());
        }
    }
    (TrainPath::new(steps), corners, names)
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Parameters of the boundary-path census.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryOptions {
    /// Singular points up to this level seed corners.
    pub max_level: u32,
    /// Only components containing a corner up to this level are reported.
    pub core_level: u32,
    /// Rectangles a half-leaf may cross while looking for its next passage.
    pub step_budget: usize,
    /// Rectangles on each side of the anchor in the reported window.
    pub window: usize,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions { max_level: 10, core_level: 5, step_budget: 1 << 16, window: 256 }
    }
}

fn level(g: &RectComplex, s: usize) -> u32 {
    g.singular[s].level.unwrap_or(0)
}

/// Boundary paths of `G`.
///
/// Every singular point has two corners, the leaves just above and just below
/// it on its switch interval. The leaf through a corner passes further
/// singular points on one side, and all corners on one such leaf lie on the
/// same boundary path. Each half-leaf through a seed corner is followed up
/// to its first passage; seeds are unioned along these links and every
/// component reaching the core levels is one boundary path. Unlabelled
/// singular points count as level zero.
pub fn boundary_paths(g: &RectComplex, opts: &BoundaryOptions) -> Vec<BoundaryPath> {
    let seeds: Vec<usize> = (0..g.num_singular()).filter(|&s| level(g, s) <= opts.max_level).collect();
    let corners: Vec<Corner> = seeds.iter().flat_map(|&s| [Corner { singular: s, sigma: 1 }, Corner { singular: s, sigma: -1 }]).collect();
    let index: HashMap<Corner, usize> = corners.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let links = crate::par::map(&corners, |c| corner_leaf(g, *c, opts.step_budget, 1).1);
    let mut dsu = Dsu((0..corners.len()).collect());
    for (i, met) in links.iter().enumerate() {
        for c in met {
            if let Some(&j) = index.get(c) {
                dsu.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..corners.len() {
        groups.entry(dsu.find(i)).or_default().push(i);
    }
    let kept: Vec<Vec<usize>> = groups.into_values().filter(|m| m.iter().any(|&i| level(g, corners[i].singular) <= opts.core_level)).collect();
    let mut out = crate::par::map(&kept, |members| {
        let anchor = *members
            .iter()
            .min_by(|&&a, &&b| {
                let na = &g.singular[corners[a].singular].name;
                let nb = &g.singular[corners[b].singular].name;
                na.cmp(nb).then(corners[a].sigma.cmp(&corners[b].sigma))
            })
            .unwrap();
        let (window, _, names) = corner_leaf(g, corners[anchor], opts.window, usize::MAX);
        let set: BTreeSet<Corner> = members.iter().map(|&i| corners[i]).collect();
        BoundaryPath { corners: set.into_iter().collect(), window, singular_names: names }
    });
    out.sort_by(|a, b| a.corners.cmp(&b.corners));
    out
}

/// The leaf through one corner, with `half` rectangles on each side.
pub fn boundary_leaf_through(g: &RectComplex, c: Corner, half: usize) -> BoundaryPath {
    let (window, corners, names) = corner_leaf(g, c, half, usize::MAX);
    BoundaryPath { corners, window, singular_names: names }
}

/// True iff every subpath of `b` of length at most `k` occurs in `a`, up to
/// orientation.
pub fn accumulates(a: &TrainPath, b: &TrainPath, k: usize) -> bool {
    let ids_a = a.branch_ids();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for len in 1..=k {
        for w in ids_a.windows(len) {
            seen.insert(w.to_vec());
            seen.insert(w.iter().rev().copied().collect());
        }
    }
    let ids_b = b.branch_ids();
    (1..=k.min(ids_b.len())).all(|len| ids_b.windows(len).all(|w| seen.contains(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traintrack::build_t;

    fn g(depth: usize) -> RectComplex {
        let (t, w) = build_t(depth).unwrap();
        RectComplex::new(&t, &w).unwrap()
    }

    fn has(g: &RectComplex, sc: &[SaddleConnection], a: &str, b: &str) -> bool {
        sc.iter().any(|c| g.singular[c.from].name == a && g.singular[c.to].name == b)
    }

    #[test]
    fn census_of_g_contains_the_known_connections() {
        let g = g(16);
        let sc = saddle_connection_census(&g, 10, 100_000);
        for n in 0..=10 {
            assert!(has(&g, &sc, &format!("P{n}"), &format!("Q{n}")), "P{n}->Q{n}");
            assert!(has(&g, &sc, &format!("P{n}"), &format!("P{n}")), "P{n} loop");
        }
        assert!(has(&g, &sc, "Q1", "Q0"));
        for n in 2..=10 {
            assert!(has(&g, &sc, &format!("Q{n}"), &format!("Q{}", n - 2)), "Q{n}->Q{}", n - 2);
        }
    }

    #[test]
    fn three_boundary_paths_in_g() {
        let g = g(32);
        assert_eq!(boundary_paths(&g, &BoundaryOptions::default()).len(), 3);
    }

    #[test]
    fn a_path_accumulates_onto_itself() {
        let g = g(8);
        let b = g.track.branch_id("b2").unwrap();
        let it = g.trace_leaf(&Leaf::new(b, crate::numerics::rat(1, 7), true, super::super::LeafLimit::Exact), 300).unwrap();
        let p = it.path();
        assert!(accumulates(&p, &p, 5));
    }
}
