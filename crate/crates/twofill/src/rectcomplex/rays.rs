//! Rays from the cusps of the complementary polygon of a cyclic cover of
//! T1, and the search for a cut set whose unzipping rescales the complex.

use std::collections::BTreeSet;

use serde::Serialize;

use super::census::{saddle_connection_census, SaddleConnection};
use super::trace::{Leaf, Terminal};
use super::unzip::{complex_isomorphism, unzip};
use super::RectComplex;
use crate::numerics::{format_rational, Rational};
use crate::traintrack::{covering_projection, BranchId};

/// The ray leaving the cusp `cusp-R.i` away from the polygon. It starts in
/// the lift `r.i` of the branch `r`; in the base track the cusp is `cusp-R`.
pub fn alpha_ray(g: &RectComplex, i: usize, n: usize) -> Option<Leaf> {
    let name = if n == 1 { "cusp-R#0".to_string() } else { format!("cusp-R.{i}#0") };
    let s = g.singular_by_name(&name)?;
    g.prongs(s).into_iter().find(|l| covering_projection(&g.track.branch(l.step.branch).name) == "r")
}

/// The ray leaving `cusp-L.i` away from the polygon, along a lift of `x`.
pub fn beta_ray(g: &RectComplex, i: usize, n: usize) -> Option<Leaf> {
    let name = if n == 1 { "cusp-L#0".to_string() } else { format!("cusp-L.{i}#0") };
    let s = g.singular_by_name(&name)?;
    g.prongs(s).into_iter().find(|l| covering_projection(&g.track.branch(l.step.branch).name) == "x")
}

fn lift_index(name: &str) -> Option<usize> {
    name.rsplit_once('.').and_then(|(_, k)| k.parse().ok())
}

/// For each lift `i`, the index of the first rectangle `r.j` with `j != i`
/// crossed by the ray `alpha_i`, within `budget` rectangles.
pub fn alpha_entries(g: &RectComplex, n: usize, budget: usize) -> Vec<Option<usize>> {
    let idx: Vec<usize> = (0..n).collect();
    crate::par::map(&idx, |&i| {
        let start = alpha_ray(g, i, n)?;
        let it = g.trace_leaf(&start, budget).ok()?;
        it.steps.iter().find_map(|s| {
            let name = &g.track.branch(s.branch).name;
            (covering_projection(name) == "r").then(|| lift_index(name)).flatten().filter(|&j| j != i)
        })
    })
}

/// The constant shift `s` with `alpha_i` entering `R(i+s mod n)` for all `i`,
/// if there is one. The sign of `s` depends on which deck generator labels
/// the lifts, so a pattern with shift `-1` is the same pattern read with the
/// inverse generator.
pub fn entry_shift(entries: &[Option<usize>]) -> Option<usize> {
    let n = entries.len();
    let shifts: BTreeSet<usize> = entries.iter().enumerate().map(|(i, e)| e.map(|j| (j + n - i) % n)).collect::<Option<_>>()?;
    (shifts.len() == 1).then(|| *shifts.iter().next().unwrap())
}

/// Outcome of a search for a cut set whose unzipping is the original
/// complex with all heights multiplied by `scale`.
#[derive(Debug, Clone, Serialize)]
pub struct RedSetSearch {
    pub candidates: usize,
    pub subsets_tried: usize,
    pub unzips_built: usize,
    /// Indices into the candidate list of the first cut set that works.
    pub found: Option<Vec<usize>>,
    pub scale: String,
}

fn canonical_cut(sc: &SaddleConnection) -> Vec<(BranchId, Rational)> {
    let mut v: Vec<(BranchId, Rational)> = sc.itinerary.steps.iter().map(|s| (s.branch, s.entry.clone())).collect();
    v.sort();
    v
}

/// Saddle connections among singular points up to `max_level`, one per
/// segment.
pub fn cut_candidates(g: &RectComplex, max_level: u32, max_steps: usize) -> Vec<SaddleConnection> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for sc in saddle_connection_census(g, max_level, max_steps) {
        if seen.insert(canonical_cut(&sc)) {
            out.push(sc);
        }
    }
    out
}

/// Tries every set of at most `max_cut` candidates. A set succeeds when the
/// unzipped complex matches `g` with heights times `scale`, rooted at
/// `root`, away from `margin` switches of the frontier.
pub fn search_red_set(g: &RectComplex, candidates: &[SaddleConnection], root: BranchId, scale: &Rational, max_cut: usize, margin: usize) -> RedSetSearch {
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(s) = stack.pop() {
        if !s.is_empty() {
            subsets.push(s.clone());
        }
        if s.len() < max_cut {
            let from = s.last().map_or(0, |&x| x + 1);
            for k in from..candidates.len() {
                let mut t = s.clone();
                t.push(k);
                stack.push(t);
            }
        }
    }
    subsets.sort();
    let target = g.height(root) * scale;
    let trial = |set: &Vec<usize>| -> (bool, bool) {
        let cuts: Vec<SaddleConnection> = set.iter().map(|&k| candidates[k].clone()).collect();
        let Ok(u) = unzip(g, &cuts) else { return (false, false) };
        let nt = &u.complex.track;
        let ok = (0..nt.num_branches())
            .filter(|&b| u.complex.height(b) == &target)
            .any(|b| complex_isomorphism((&g.track, &g.weights), (nt, &u.complex.weights), root, b, scale, margin).is_ok());
        (true, ok)
    };
    let results = crate::par::map(&subsets, trial);
    let unzips_built = results.iter().filter(|r| r.0).count();
    let found = results.iter().position(|r| r.1).map(|k| subsets[k].clone());
    RedSetSearch { candidates: candidates.len(), subsets_tried: subsets.len(), unzips_built, found, scale: format_rational(scale) }
}

/// True when the ray stays inside the complex for the whole budget.
pub fn is_long(g: &RectComplex, leaf: &Leaf, budget: usize) -> bool {
    g.trace_leaf(leaf, budget).is_ok_and(|it| it.terminal == Terminal::StepBudgetExhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traintrack::{build_t1, cyclic_cover};

    #[test]
    fn alpha_reaches_a_neighbouring_lift_and_beta_escapes() {
        let (t1, w1) = build_t1(24).unwrap();
        for n in 2..=4 {
            let (t, w) = cyclic_cover(&t1, &w1, n).unwrap();
            let g = RectComplex::new(&t, &w).unwrap();
            let e = alpha_entries(&g, n, 4096);
            let s = entry_shift(&e).unwrap();
            assert!(s == 1 || s == n - 1, "n={n} {e:?}");
            for i in 0..n {
                assert!(is_long(&g, &alpha_ray(&g, i, n).unwrap(), 4096));
                assert!(!is_long(&g, &beta_ray(&g, i, n).unwrap(), 4096));
            }
        }
    }

    #[test]
    fn shift_of_a_rotation() {
        assert_eq!(entry_shift(&[Some(1), Some(2), Some(0)]), Some(1));
        assert_eq!(entry_shift(&[Some(2), Some(0), Some(1)]), Some(2));
        assert_eq!(entry_shift(&[Some(1), Some(0), Some(1)]), None);
        assert_eq!(entry_shift(&[None, Some(0)]), None);
    }
}
