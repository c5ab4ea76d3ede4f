//! Unzipping a rectangle complex along saddle connections, and isomorphism
//! of weighted tracks up to a scale factor.
//!
//! Cutting along a horizontal segment splits every rectangle it crosses at
//! the crossing height and every switch interval it crosses at the crossing
//! position. At an endpoint the switch interval is split only when the point
//! is a breakpoint on both sides after the rectangle cuts; otherwise the
//! singular point survives. Switches left with a single piece on each side
//! are then erased by joining their two rectangles.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::Zero;

use super::census::SaddleConnection;
use super::{ComplexError, RectComplex};
use crate::numerics::Rational;
use crate::traintrack::{BranchId, End, EndRef, Side, SwitchId, TrackBuilder, TrainTrack, WeightSystem};

/// The unzipped complex with bookkeeping from old to new branches.
#[derive(Debug, Clone)]
pub struct UnzipResult {
    pub complex: RectComplex,
    /// For every branch of the result, the pieces of old branches it is made
    /// of, in order from tail to head, as `(old branch, low, high, forward)`.
    pub pieces: Vec<Vec<(BranchId, Rational, Rational, bool)>>,
}

impl UnzipResult {
    /// Branches of the result containing a piece of `old` that covers height `h`.
    pub fn branches_over(&self, old: BranchId, h: &Rational) -> Vec<BranchId> {
        (0..self.pieces.len()).filter(|&b| self.pieces[b].iter().any(|(o, lo, hi, _)| *o == old && lo <= h && h <= hi)).collect()
    }
}

/// A piece of an old branch between two cut heights.
#[derive(Debug, Clone)]
struct Piece {
    old: BranchId,
    lo: Rational,
    hi: Rational,
}

/// A switch of the unzipped track with the old switch it lies on and its
/// piece ends on both sides. The flag marks frontier switches.
type NewSwitch = (SwitchId, Vec<(usize, End)>, Vec<(usize, End)>, bool);

/// Unzips `g` along the given saddle connections.
pub fn unzip(g: &RectComplex, cuts: &[SaddleConnection]) -> Result<UnzipResult, ComplexError> {
    let t = &g.track;
    let nb = t.num_branches();
    let mut heights: Vec<BTreeSet<Rational>> = vec![BTreeSet::new(); nb];
    let mut positions: Vec<BTreeSet<Rational>> = vec![BTreeSet::new(); t.num_switches()];
    let mut endpoints: Vec<BTreeSet<Rational>> = vec![BTreeSet::new(); t.num_switches()];
    for sc in cuts {
        let it = &sc.itinerary;
        if !matches!(it.terminal, super::Terminal::SingularityHit(x) if x == sc.to) {
            return Err(ComplexError::Domain("cut is not a saddle connection of this complex".into()));
        }
        let from = &g.singular[sc.from];
        endpoints[from.switch].insert(from.position.clone());
        let to = &g.singular[sc.to];
        endpoints[to.switch].insert(to.position.clone());
        for (k, st) in it.steps.iter().enumerate() {
            let w = g.height(st.branch);
            if st.entry > Rational::zero() && &st.entry < w {
                heights[st.branch].insert(st.entry.clone());
            }
            if k + 1 < it.steps.len() {
                let end = if st.forward { End::Head } else { End::Tail };
                let (s, _, p, _) = g.position(st.branch, end, &st.entry);
                positions[s].insert(p);
            }
        }
    }

    // Pieces of every old branch, bottom to top.
    let mut pieces: Vec<Piece> = Vec::new();
    let mut first_piece = vec![0usize; nb];
    for b in 0..nb {
        first_piece[b] = pieces.len();
        let mut lo = Rational::zero();
        for h in heights[b].iter().chain(std::iter::once(g.height(b))) {
            pieces.push(Piece { old: b, lo: lo.clone(), hi: h.clone() });
            lo = h.clone();
        }
    }
    let count = |b: BranchId| heights[b].len() + 1;

    // Sub-ends at every old switch side, bottom to top, with their switch
    // positions.
    let side_pieces = |s: SwitchId, side: Side| -> Vec<(usize, End, Rational, Rational)> {
        let mut out = Vec::new();
        for e in t.switch(s).side(side) {
            let pl = t.place(e.branch, e.end);
            let off = g.offset(e.branch, e.end);
            let w = g.height(e.branch);
            let mut here: Vec<(usize, End, Rational, Rational)> = (0..count(e.branch))
                .map(|k| {
                    let p = &pieces[first_piece[e.branch] + k];
                    let (a, b) = if pl.flipped(e.end) { (off + w - &p.hi, off + w - &p.lo) } else { (off + &p.lo, off + &p.hi) };
                    (first_piece[e.branch] + k, e.end, a, b)
                })
                .collect();
            here.sort_by(|x, y| x.2.cmp(&y.2));
            out.extend(here);
        }
        out
    };

    // Split positions per switch: crossings always, endpoints when clean.
    let mut new_switches: Vec<NewSwitch> = Vec::new();
    for s in 0..t.num_switches() {
        let inc = side_pieces(s, Side::Incoming);
        let out = side_pieces(s, Side::Outgoing);
        let clean = |p: &Rational| inc.iter().chain(out.iter()).all(|(_, _, a, b)| !(a < p && p < b));
        let mut cutsat: Vec<Rational> = positions[s].iter().cloned().collect();
        for p in &cutsat {
            if !clean(p) {
                return Err(ComplexError::Domain(format!("cut crosses {} inside a piece", t.switch(s).name)));
            }
        }
        for p in &endpoints[s] {
            if clean(p) && !cutsat.contains(p) {
                cutsat.push(p.clone());
            }
        }
        cutsat.sort();
        let frontier = t.is_frontier(s);
        let mut lo = Rational::zero();
        for hi in cutsat.iter().cloned().chain(std::iter::once(g.switch_length(s).clone())) {
            let pick = |v: &Vec<(usize, End, Rational, Rational)>| -> Vec<(usize, End)> {
                v.iter().filter(|(_, _, a, b)| &lo <= a && b <= &hi).map(|(p, e, _, _)| (*p, *e)).collect()
            };
            let (i, o) = (pick(&inc), pick(&out));
            if !i.is_empty() || !o.is_empty() {
                new_switches.push((s, i, o, frontier));
            }
            lo = hi;
        }
    }

    // Erase valence-two switches by chaining pieces into new branches.
    let np = pieces.len();
    let mut at: Vec<[Option<(usize, Side)>; 2]> = vec![[None, None]; np];
    for (k, (_, i, o, _)) in new_switches.iter().enumerate() {
        for (p, e) in i {
            at[*p][*e as usize] = Some((k, Side::Incoming));
        }
        for (p, e) in o {
            at[*p][*e as usize] = Some((k, Side::Outgoing));
        }
    }
    let erasable: Vec<bool> = new_switches.iter().map(|(_, i, o, fr)| !fr && i.len() == 1 && o.len() == 1).collect();
    let mut used = vec![false; np];
    let mut chains: Vec<Vec<(usize, bool)>> = Vec::new();
    for p in 0..np {
        if used[p] {
            continue;
        }
        let forward = if !erasable[at[p][End::Tail as usize].expect("placed").0] {
            true
        } else if !erasable[at[p][End::Head as usize].expect("placed").0] {
            false
        } else {
            continue;
        };
        let mut chain = Vec::new();
        let (mut q, mut fwd) = (p, forward);
        loop {
            used[q] = true;
            chain.push((q, fwd));
            let exit = if fwd { End::Head } else { End::Tail };
            let (k, side) = at[q][exit as usize].expect("placed");
            if !erasable[k] {
                break;
            }
            let (_, i, o, _) = &new_switches[k];
            let (nq, e) = if side == Side::Incoming { o[0] } else { i[0] };
            q = nq;
            fwd = e == End::Tail;
        }
        chains.push(chain);
    }
    if used.iter().any(|u| !u) {
        return Err(ComplexError::Domain("unzipping produced a closed annulus".into()));
    }

    // Assemble the new track: a chain's tail is the entry end of its first
    // piece and its head the exit end of its last piece.
    let mut bld = TrackBuilder::new();
    let sw_name = |k: usize| format!("{}#{}", t.switch(new_switches[k].0).name, k);
    for k in (0..new_switches.len()).filter(|&k| !erasable[k]) {
        bld.switch(&sw_name(k));
    }
    let mut end_of: HashMap<(usize, End), (String, End)> = HashMap::new();
    let mut out_pieces = Vec::new();
    for (c, chain) in chains.iter().enumerate() {
        let (p0, f0) = chain[0];
        let (pl, fl) = *chain.last().unwrap();
        let entry = if f0 { End::Tail } else { End::Head };
        let exit = if fl { End::Head } else { End::Tail };
        let name = format!("{}~{c}", t.branch(pieces[p0].old).name);
        let from = sw_name(at[p0][entry as usize].unwrap().0);
        let to = sw_name(at[pl][exit as usize].unwrap().0);
        bld.branch(&name, &from, &to, &pieces[p0].hi - &pieces[p0].lo);
        end_of.insert((p0, entry), (name.clone(), End::Tail));
        end_of.insert((pl, exit), (name, End::Head));
        out_pieces.push(chain.iter().map(|(p, f)| (pieces[*p].old, pieces[*p].lo.clone(), pieces[*p].hi.clone(), *f)).collect());
    }
    for (k, (_, i, o, fr)) in new_switches.iter().enumerate() {
        if erasable[k] {
            continue;
        }
        let name = sw_name(k);
        bld.incoming_owned(&name, i.iter().map(|pe| end_of[pe].clone()).collect());
        bld.outgoing_owned(&name, o.iter().map(|pe| end_of[pe].clone()).collect());
        if *fr {
            bld.frontier(&name);
        }
    }
    let (nt, nw) = bld.build().map_err(|e| ComplexError::Domain(e.to_string()))?;
    let complex = RectComplex::new(&nt, &nw)?;
    Ok(UnzipResult { complex, pieces: out_pieces })
}

/// Result of comparing two weighted tracks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    /// Branch of the second track matched to each branch of the first, and
    /// whether the match reverses its direction.
    pub branch_map: HashMap<BranchId, (BranchId, bool)>,
    /// Switch of the second track matched to each switch of the first, and
    /// whether the match exchanges its sides.
    pub switch_map: HashMap<SwitchId, (SwitchId, bool)>,
}

/// Searches for an isomorphism of foliated complexes from `a` to `b` taking
/// `root_a` to `root_b`, with `w_b = scale * w_a` on matched branches.
///
/// Branch directions and the labelling of switch sides are conventions, so a
/// match may reverse a branch or turn a switch around (exchanging its sides
/// and reversing both orders). Matching stops at switches of `a` closer than
/// `margin` to its frontier, so truncated tracks can be compared on their
/// common core. Returns the matching or a description of the first mismatch.
pub fn complex_isomorphism(
    a: (&TrainTrack, &WeightSystem),
    b: (&TrainTrack, &WeightSystem),
    root_a: BranchId,
    root_b: BranchId,
    scale: &Rational,
    margin: usize,
) -> Result<Isomorphism, String> {
    let (ta, wa) = a;
    let (tb, wb) = b;
    let dist_a = ta.frontier_distance();
    for reverse_root in [false, true] {
        let mut iso = Isomorphism { branch_map: HashMap::new(), switch_map: HashMap::new() };
        let mut queue = VecDeque::new();
        let res = (|| -> Result<(), String> {
            pair_branch(ta, wa, tb, wb, scale, root_a, root_b, reverse_root, &mut iso, &mut queue)?;
            while let Some((x, y, rev)) = queue.pop_front() {
                for end in [End::Tail, End::Head] {
                    let pa = ta.place(x, end);
                    let pb = tb.place(y, if rev { end.other() } else { end });
                    let turn = pa.side != pb.side;
                    let la = ta.switch(pa.switch).side(pa.side).len();
                    let lb = tb.switch(pb.switch).side(pb.side).len();
                    let idx = if turn { lb - 1 - pb.index } else { pb.index };
                    if la != lb || idx != pa.index {
                        return Err(format!("end of {} sits differently", ta.branch(x).name));
                    }
                    if let Some(&(s, t)) = iso.switch_map.get(&pa.switch) {
                        if (s, t) != (pb.switch, turn) {
                            return Err(format!("switch {} matched inconsistently", ta.switch(pa.switch).name));
                        }
                        continue;
                    }
                    iso.switch_map.insert(pa.switch, (pb.switch, turn));
                    if ta.is_frontier(pa.switch) || dist_a[pa.switch].is_some_and(|d| d < margin) {
                        continue;
                    }
                    if tb.is_frontier(pb.switch) {
                        return Err(format!("{} meets the frontier of the second track", ta.switch(pa.switch).name));
                    }
                    for side in [Side::Incoming, Side::Outgoing] {
                        let la: &[EndRef] = ta.switch(pa.switch).side(side);
                        let side_b = if turn { side.other() } else { side };
                        let lb: &[EndRef] = tb.switch(pb.switch).side(side_b);
                        if la.len() != lb.len() {
                            return Err(format!("valence differs at {}", ta.switch(pa.switch).name));
                        }
                        for (i, ea) in la.iter().enumerate() {
                            let eb = lb[if turn { lb.len() - 1 - i } else { i }];
                            pair_branch(ta, wa, tb, wb, scale, ea.branch, eb.branch, ea.end != eb.end, &mut iso, &mut queue)?;
                        }
                    }
                }
            }
            Ok(())
        })();
        match res {
            Ok(()) => return Ok(iso),
            Err(e) if reverse_root => return Err(e),
            Err(_) => {}
        }
    }
    unreachable!()
}

#[allow(clippy::too_many_arguments)]
fn pair_branch(
    ta: &TrainTrack,
    wa: &WeightSystem,
    tb: &TrainTrack,
    wb: &WeightSystem,
    scale: &Rational,
    x: BranchId,
    y: BranchId,
    rev: bool,
    iso: &mut Isomorphism,
    queue: &mut VecDeque<(BranchId, BranchId, bool)>,
) -> Result<(), String> {
    if let Some(&m) = iso.branch_map.get(&x) {
        return if m == (y, rev) { Ok(()) } else { Err(format!("{} matched twice", ta.branch(x).name)) };
    }
    if &(wa.get(x) * scale) != wb.get(y) {
        return Err(format!("weights differ on {} and {}", ta.branch(x).name, tb.branch(y).name));
    }
    iso.branch_map.insert(x, (y, rev));
    queue.push_back((x, y, rev));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traintrack::build_t;
    use num_traits::One;

    #[test]
    fn empty_cut_is_identity() {
        let (t, w) = build_t(8).unwrap();
        let g = RectComplex::new(&t, &w).unwrap();
        let u = unzip(&g, &[]).unwrap();
        let nt = &u.complex.track;
        assert_eq!(nt.num_branches(), t.num_branches());
        let e1 = t.branch_id("e1").unwrap();
        let root = (0..nt.num_branches()).find(|&b| u.pieces[b][0].0 == e1).unwrap();
        let iso = complex_isomorphism((&t, &w), (nt, &u.complex.weights), e1, root, &Rational::one(), 0).unwrap();
        assert_eq!(iso.branch_map.len(), t.num_branches());
    }
}
