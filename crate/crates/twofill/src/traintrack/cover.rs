//! Cyclic covers of a track along its designated cycle.
//!
//! The cover is built from a voltage assignment in `Z/n`: the last branch of
//! the designated cycle carries voltage 1 and every other branch carries 0.
//! A lifted branch `(b, k)` runs from `(from, k)` to `(to, k + voltage(b))`.
//! Because the designated cycle is a bigon made of two branches with parallel
//! orientation, its lifts close up into one cycle of length `2n`, which covers
//! the base cycle with degree `n`; every other branch has exactly `n` lifts.

use super::{End, EndRef, TrackBuilder, TrackError, TrainTrack, WeightSystem};

fn lift_name(name: &str, k: usize) -> String {
    format!("{name}.{k}")
}

/// Strips the sheet suffix added by [`cyclic_cover`].
pub fn covering_projection(name: &str) -> &str {
    match name.rsplit_once('.') {
        Some((base, k)) if k.chars().all(|c| c.is_ascii_digit()) => base,
        _ => name,
    }
}

/// The degree-`n` cyclic cover in which the designated cycle has one lift.
pub fn cyclic_cover(base: &TrainTrack, w: &WeightSystem, n: usize) -> Result<(TrainTrack, WeightSystem), TrackError> {
    if n == 0 {
        return Err(TrackError::Domain("cover degree must be positive".into()));
    }
    let cycle = base.cycle.as_ref().ok_or_else(|| TrackError::Domain("track has no designated cycle".into()))?;
    let hot = *cycle.last().ok_or_else(|| TrackError::Domain("designated cycle is empty".into()))?;
    if n == 1 {
        return Ok((base.clone(), w.clone()));
    }
    let volt = |b: usize| usize::from(b == hot);
    let mut bld = TrackBuilder::new();
    for k in 0..n {
        for s in base.switches() {
            bld.switch(&lift_name(&s.name, k));
        }
    }
    for k in 0..n {
        for (b, br) in base.branches().iter().enumerate() {
            let from = lift_name(&base.switch(br.from).name, k);
            let to = lift_name(&base.switch(br.to).name, (k + volt(b)) % n);
            bld.branch(&lift_name(&br.name, k), &from, &to, w.get(b).clone());
        }
    }
    // The end of lifted branch (b, j) sitting on sheet k of a switch.
    let sheet_end = |e: &EndRef, k: usize| -> (String, End) {
        let j = match e.end {
            End::Tail => k,
            End::Head => (k + n - volt(e.branch)) % n,
        };
        (lift_name(&base.branch(e.branch).name, j), e.end)
    };
    for k in 0..n {
        for (s, sw) in base.switches().iter().enumerate() {
            let name = lift_name(&sw.name, k);
            bld.incoming_owned(&name, sw.incoming.iter().map(|e| sheet_end(e, k)).collect());
            bld.outgoing_owned(&name, sw.outgoing.iter().map(|e| sheet_end(e, k)).collect());
            if base.is_frontier(s) {
                bld.frontier(&name);
            }
            if let Some(l) = base.labels.get(&s) {
                bld.label(&name, &lift_name(&l.name, k), l.level);
            }
        }
    }
    let mut lifted_cycle = Vec::new();
    for k in 0..n {
        for &b in cycle {
            lifted_cycle.push(lift_name(&base.branch(b).name, k));
        }
    }
    let refs: Vec<&str> = lifted_cycle.iter().map(|s| s.as_str()).collect();
    bld.cycle(&refs);
    for note in &base.notes {
        bld.note(note);
    }
    bld.note(&format!("cyclic cover of degree {n}"));
    bld.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traintrack::build_t;

    #[test]
    fn cover_pulls_back_weights_and_conditions() {
        let (t, w) = build_t(6).unwrap();
        for n in 1..=3 {
            let (c, wc) = cyclic_cover(&t, &w, n).unwrap();
            assert!(c.check_switch_conditions(&wc).is_empty());
            assert_eq!(c.num_branches(), n * t.num_branches());
            for (b, br) in c.branches().iter().enumerate() {
                let base = t.branch_id(covering_projection(&br.name)).unwrap();
                assert_eq!(wc.get(b), w.get(base));
            }
        }
    }

    #[test]
    fn degree_one_is_identity() {
        let (t, w) = build_t(4).unwrap();
        let (c, wc) = cyclic_cover(&t, &w, 1).unwrap();
        assert_eq!(c, t);
        assert_eq!(wc, w);
    }
}
