//! Builders for the specific infinite tracks, truncated at a requested depth.

use num_traits::One;

use super::{End, TrackBuilder, TrackError, TrainTrack, WeightSystem};
use crate::numerics::{int, inv_pow2, inv_pow4, rat, Rational};

use End::{Head, Tail};

/// The track T truncated after branch index `depth`.
///
/// Head: the bigon `e1 < e2` runs from `sL` to `sR`; `b0` enters `sL`, `b-1`
/// leaves `sR` towards the fold switch `u0`, where both ends of the loop `d0`
/// sit on the outgoing side. Chain: `bn` runs from `v(n+1)` to `vn`, and `cn`
/// runs from `un` to `vn`. At `un` both ends of `dn` sit on the incoming side.
/// At `vn` the incoming order is `bn < cn` for odd `n` and `cn < bn` for even
/// `n`. The switch `v(depth+1)` is the frontier.
pub fn build_t(depth: usize) -> Result<(TrainTrack, WeightSystem), TrackError> {
    if depth < 2 {
        return Err(TrackError::Domain(format!("buildT needs depth >= 2, got {depth}")));
    }
    let mut b = TrackBuilder::new();
    for s in ["sL", "sR", "u0"] {
        b.switch(s);
    }
    for n in 1..=depth {
        b.switch(&format!("u{n}")).switch(&format!("v{n}"));
    }
    let last = format!("v{}", depth + 1);
    b.switch(&last).frontier(&last);

    b.branch("e1", "sL", "sR", rat(1, 3)).branch("e2", "sL", "sR", rat(2, 3));
    b.branch("b0", "v1", "sL", int(1)).branch("b-1", "sR", "u0", int(1));
    b.branch("d0", "u0", "u0", rat(1, 2));
    b.outgoing("sL", &[("e1", Tail), ("e2", Tail)]).incoming("sL", &[("b0", Head)]);
    b.incoming("sR", &[("e1", Head), ("e2", Head)]).outgoing("sR", &[("b-1", Tail)]);
    b.incoming("u0", &[("b-1", Head)]).outgoing("u0", &[("d0", Tail), ("d0", Head)]);
    b.label("u0", "P0", Some(0)).label("sL", "cusp-L", Some(0)).label("sR", "cusp-R", Some(0));

    for n in 1..=depth {
        let (bn, cn, dn) = (format!("b{n}"), format!("c{n}"), format!("d{n}"));
        let (un, vn, vnext) = (format!("u{n}"), format!("v{n}"), format!("v{}", n + 1));
        let w = inv_pow2(n as u32);
        b.branch(&bn, &vnext, &vn, w.clone());
        b.branch(&cn, &un, &vn, w);
        b.branch(&dn, &un, &un, inv_pow2(n as u32 + 1));
        b.outgoing_owned(&un, vec![(cn.clone(), Tail)]);
        b.incoming_owned(&un, vec![(dn.clone(), Head), (dn.clone(), Tail)]);
        let prev = format!("b{}", n - 1);
        b.outgoing_owned(&vn, vec![(prev, Tail)]);
        let inc = if n % 2 == 1 { vec![(bn.clone(), Head), (cn.clone(), Head)] } else { vec![(cn.clone(), Head), (bn.clone(), Head)] };
        b.incoming_owned(&vn, inc);
        b.label(&un, &format!("P{n}"), Some(n as u32));
        b.label(&vn, &format!("Q{}", n - 1), Some(n as u32 - 1));
    }
    b.outgoing_owned(&last, vec![(format!("b{depth}"), Tail)]);
    b.cycle(&["e1", "e2"]);
    b.build()
}

/// Switch orders of T* that the published description leaves implicit.
///
/// `z0_b1_low`: at `z0` the outgoing order is `b1* < f-1*` (else reversed).
/// `pos_c_low[k % 2]`: at `z(2k-1)` the incoming order is `c(2k)* < f(2k-1)*`.
/// `neg_c_low[k % 2]`: at `z(-2k)` the outgoing order is `c(2k+1)* < f(-2k-1)*`.
/// Loops `hn*` always straddle the chain branch at their switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarOrders {
    pub z0_b1_low: bool,
    pub pos_c_low: [bool; 2],
    pub neg_c_low: [bool; 2],
}

impl Default for StarOrders {
    fn default() -> Self {
        // The unique candidate for which leaf measures of G* agree with the
        // measures carried from G; see `carrying::resolve_star_orders`.
        StarOrders { z0_b1_low: true, pos_c_low: [true, true], neg_c_low: [false, false] }
    }
}

/// The track T* with its default switch orders.
pub fn build_t_star(depth: usize) -> Result<(TrainTrack, WeightSystem), TrackError> {
    build_t_star_with(depth, StarOrders::default())
}

fn f_star_weight(i: i64) -> Rational {
    if i == 0 {
        Rational::one()
    } else if i > 0 {
        let k = ((i + 1) / 2) as u32;
        if i % 2 == 0 {
            inv_pow4(k)
        } else {
            int(3) * inv_pow4(k)
        }
    } else {
        inv_pow2((-i) as u32)
    }
}

fn fs(i: i64) -> String {
    format!("f{i}*")
}

/// The track T* truncated so that `z(depth+1)` and `z(-depth-1)` are frontier.
///
/// The chain `fi*` runs from `z(i+1)` to `zi`. On the positive side `z(2k-1)`
/// receives `c(2k)*` and `z(2k)` carries the loop `h(2k-1)*` on its incoming
/// side; on the negative side `z(-(2k-1))` carries `h(2k)*` on its outgoing
/// side and `z(-2k)` emits `c(2k+1)*`. The head copies the head of T.
pub fn build_t_star_with(depth: usize, ord: StarOrders) -> Result<(TrainTrack, WeightSystem), TrackError> {
    if depth < 2 {
        return Err(TrackError::Domain(format!("buildTStar needs depth >= 2, got {depth}")));
    }
    let d = depth as i64;
    let mut b = TrackBuilder::new();
    for s in ["sL*", "sR*", "u0*", "v1*", "u1*"] {
        b.switch(s);
    }
    for i in -(d + 1)..=(d + 1) {
        b.switch(&format!("z{i}"));
    }
    b.frontier(&format!("z{}", d + 1)).frontier(&format!("z{}", -(d + 1)));

    b.branch("e1*", "sL*", "sR*", rat(1, 3)).branch("e2*", "sL*", "sR*", rat(2, 3));
    b.branch("b0*", "v1*", "sL*", int(1)).branch("b-1*", "sR*", "u0*", int(1));
    b.branch("d0*", "u0*", "u0*", rat(1, 2));
    b.branch("b1*", "z0", "v1*", rat(1, 2)).branch("c1*", "u1*", "v1*", rat(1, 2));
    b.branch("d1*", "u1*", "u1*", rat(1, 4));
    b.outgoing("sL*", &[("e1*", Tail), ("e2*", Tail)]).incoming("sL*", &[("b0*", Head)]);
    b.incoming("sR*", &[("e1*", Head), ("e2*", Head)]).outgoing("sR*", &[("b-1*", Tail)]);
    b.incoming("u0*", &[("b-1*", Head)]).outgoing("u0*", &[("d0*", Tail), ("d0*", Head)]);
    b.outgoing("v1*", &[("b0*", Tail)]).incoming("v1*", &[("b1*", Head), ("c1*", Head)]);
    b.outgoing("u1*", &[("c1*", Tail)]).incoming("u1*", &[("d1*", Head), ("d1*", Tail)]);
    b.label("u0*", "P0*", Some(0)).label("u1*", "P1*", Some(1)).label("v1*", "Q0*", Some(0));
    b.label("sL*", "cusp-L*", Some(0)).label("sR*", "cusp-R*", Some(0));

    for i in -(d + 1)..=d {
        b.branch(&fs(i), &format!("z{}", i + 1), &format!("z{i}"), f_star_weight(i));
    }
    let z0_out = if ord.z0_b1_low { vec![("b1*".to_string(), Tail), (fs(-1), Tail)] } else { vec![(fs(-1), Tail), ("b1*".to_string(), Tail)] };
    b.incoming_owned("z0", vec![(fs(0), Head)]).outgoing_owned("z0", z0_out);
    b.label("z0", "Z0", Some(0));

    for i in 1..=d {
        let z = format!("z{i}");
        b.outgoing_owned(&z, vec![(fs(i - 1), Tail)]);
        b.label(&z, &format!("Z{i}"), Some(i as u32));
        if i % 2 == 1 {
            let k = (i + 1) / 2;
            let n = 2 * k;
            let (c, dd, u) = (format!("c{n}*"), format!("d{n}*"), format!("u{n}*"));
            b.switch(&u);
            b.branch(&c, &u, &z, inv_pow2(n as u32)).branch(&dd, &u, &u, inv_pow2(n as u32 + 1));
            b.outgoing_owned(&u, vec![(c.clone(), Tail)]).incoming_owned(&u, vec![(dd.clone(), Head), (dd.clone(), Tail)]);
            b.label(&u, &format!("P{n}*"), Some(n as u32));
            let inc = if ord.pos_c_low[(k % 2) as usize] { vec![(c, Head), (fs(i), Head)] } else { vec![(fs(i), Head), (c, Head)] };
            b.incoming_owned(&z, inc);
        } else {
            let n = i - 1;
            let h = format!("h{n}*");
            b.branch(&h, &z, &z, inv_pow2(n as u32 + 1));
            b.incoming_owned(&z, vec![(h.clone(), Head), (fs(i), Head), (h, Tail)]);
        }
    }
    for j in 1..=d {
        let i = -j;
        let z = format!("z{i}");
        b.incoming_owned(&z, vec![(fs(i), Head)]);
        b.label(&z, &format!("Z{i}"), Some(j as u32));
        if j % 2 == 1 {
            let n = j + 1;
            let h = format!("h{n}*");
            b.branch(&h, &z, &z, inv_pow2(n as u32 + 1));
            b.outgoing_owned(&z, vec![(h.clone(), Tail), (fs(i - 1), Tail), (h, Head)]);
        } else {
            let k = j / 2;
            let n = 2 * k + 1;
            let (c, dd, u) = (format!("c{n}*"), format!("d{n}*"), format!("u{n}*"));
            b.switch(&u);
            b.branch(&c, &z, &u, inv_pow2(n as u32)).branch(&dd, &u, &u, inv_pow2(n as u32 + 1));
            b.incoming_owned(&u, vec![(c.clone(), Head)]).outgoing_owned(&u, vec![(dd.clone(), Tail), (dd.clone(), Head)]);
            b.label(&u, &format!("P{n}*"), Some(n as u32));
            let out = if ord.neg_c_low[(k % 2) as usize] { vec![(c, Tail), (fs(i - 1), Tail)] } else { vec![(fs(i - 1), Tail), (c, Tail)] };
            b.outgoing_owned(&z, out);
        }
    }
    b.outgoing_owned(&format!("z{}", d + 1), vec![(fs(d), Tail)]);
    b.incoming_owned(&format!("z{}", -(d + 1)), vec![(fs(-(d + 1)), Head)]);
    b.cycle(&["e1*", "e2*"]);
    b.build()
}

/// Provenance note recorded on every T1 built by [`build_t1`].
pub const T1_NOTE: &str = "T1 combinatorics reconstructed from the stated weights; see the builder documentation";

/// Switch orders of T1 left open by the stated weights.
///
/// `r_low_at_sr`: at `sR` the outgoing order is `r < y` (else `y < r`).
/// `r_low_at_sl`: at `sL` the incoming order is `r < x` (else `x < r`).
/// `y_low_at_w`: at `w` the incoming order is `y < x` (else `x < y`).
/// `straddle`: the quadrivalent loop at `v(2k-1)` has its ends on both sides
/// of `b(2k-1)`; otherwise `h_low` puts both ends below it (else above).
/// `c_low`: at `v(2k)` the incoming order is `c(2k) < b(2k)` (else reversed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct T1Orders {
    pub r_low_at_sr: bool,
    pub r_low_at_sl: bool,
    pub y_low_at_w: bool,
    pub straddle: bool,
    pub h_low: bool,
    pub c_low: bool,
}

impl Default for T1Orders {
    fn default() -> Self {
        T1Orders { r_low_at_sr: true, r_low_at_sl: false, y_low_at_w: false, straddle: false, h_low: false, c_low: true }
    }
}

/// The track T1 with its default switch orders.
pub fn build_t1(depth: usize) -> Result<(TrainTrack, WeightSystem), TrackError> {
    build_t1_with(depth, T1Orders::default())
}

/// The track T1 truncated so that `v(depth+1)` is the frontier.
///
/// Head: the bigon `e1 < e2` runs from `sL` to `sR`. The branch `r` runs from
/// `sR` back to `sL`. The branch `y` runs from `sR` to `w` and `x` from `w` to
/// `sL`; both have an end on the incoming side of `w`, whose outgoing side is
/// the head of `b0`. Chain: `bn` runs from `v(n+1)` to `vn`. For even `n` the
/// switch `vn` receives `cn` from `un`, which carries the trivalent loop `dn`.
/// For odd `n` the quadrivalent loop `hn` sits on the incoming side of `vn`.
/// Loop `n` has weight `1/2^(n+1)`: these are the given families `1/(8*4^k)`
/// and `1/4^k`. With the bigon they are the only given weights. The rest come
/// from the switch conditions together with one condition for the cut: the
/// frontier branch carries twice the total weight of the loops beyond it.
pub fn build_t1_with(depth: usize, ord: T1Orders) -> Result<(TrainTrack, WeightSystem), TrackError> {
    if depth < 2 {
        return Err(TrackError::Domain(format!("buildT1 needs depth >= 2, got {depth}")));
    }
    let zero = Rational::from_integer(0.into());
    let mut b = TrackBuilder::new();
    for s in ["sL", "sR", "w"] {
        b.switch(s);
    }
    for n in 1..=depth {
        if n % 2 == 0 {
            b.switch(&format!("u{n}"));
        }
        b.switch(&format!("v{n}"));
    }
    let last = format!("v{}", depth + 1);
    b.switch(&last).frontier(&last);

    b.branch("e1", "sL", "sR", rat(1, 3)).branch("e2", "sL", "sR", rat(2, 3));
    b.branch("r", "sR", "sL", zero.clone()).branch("y", "sR", "w", zero.clone()).branch("x", "w", "sL", zero.clone());
    b.branch("b0", "v1", "w", zero.clone());
    b.outgoing("sL", &[("e1", Tail), ("e2", Tail)]);
    let sl_in = if ord.r_low_at_sl { [("r", Head), ("x", Head)] } else { [("x", Head), ("r", Head)] };
    b.incoming("sL", &sl_in);
    b.incoming("sR", &[("e1", Head), ("e2", Head)]);
    let sr_out = if ord.r_low_at_sr { [("r", Tail), ("y", Tail)] } else { [("y", Tail), ("r", Tail)] };
    b.outgoing("sR", &sr_out);
    let w_in = if ord.y_low_at_w { [("y", Head), ("x", Tail)] } else { [("x", Tail), ("y", Head)] };
    b.incoming("w", &w_in).outgoing("w", &[("b0", Head)]);
    b.label("sL", "cusp-L", Some(0)).label("sR", "cusp-R", Some(0)).label("w", "W", Some(0));
    b.note(T1_NOTE);

    let mut loops = Vec::new();
    for n in 1..=depth {
        let (bn, vn, vnext) = (format!("b{n}"), format!("v{n}"), format!("v{}", n + 1));
        b.branch(&bn, &vnext, &vn, zero.clone());
        b.outgoing_owned(&vn, vec![(format!("b{}", n - 1), Tail)]);
        b.label(&vn, &format!("Q{}", n - 1), Some(n as u32 - 1));
        let loop_w = inv_pow2(n as u32 + 1);
        if n % 2 == 0 {
            let (cn, dn, un) = (format!("c{n}"), format!("d{n}"), format!("u{n}"));
            b.branch(&cn, &un, &vn, zero.clone()).branch(&dn, &un, &un, loop_w.clone());
            b.outgoing_owned(&un, vec![(cn.clone(), Tail)]);
            b.incoming_owned(&un, vec![(dn.clone(), Head), (dn.clone(), Tail)]);
            let inc = if ord.c_low { vec![(cn, Head), (bn, Head)] } else { vec![(bn, Head), (cn, Head)] };
            b.incoming_owned(&vn, inc);
            b.label(&un, &format!("P{n}"), Some(n as u32));
            loops.push((dn, loop_w));
        } else {
            let hn = format!("h{n}");
            b.branch(&hn, &vn, &vn, loop_w.clone());
            let inc = if ord.straddle {
                vec![(hn.clone(), Head), (bn, Head), (hn.clone(), Tail)]
            } else if ord.h_low {
                vec![(hn.clone(), Head), (hn.clone(), Tail), (bn, Head)]
            } else {
                vec![(bn, Head), (hn.clone(), Head), (hn.clone(), Tail)]
            };
            b.incoming_owned(&vn, inc);
            loops.push((hn, loop_w));
        }
    }
    b.outgoing_owned(&last, vec![(format!("b{depth}"), Tail)]);
    b.cycle(&["e1", "e2"]);
    let (t, _) = b.build()?;

    let mut fixed = std::collections::HashMap::new();
    fixed.insert(t.branch_id("e1")?, rat(1, 3));
    fixed.insert(t.branch_id("e2")?, rat(2, 3));
    for (name, w) in &loops {
        fixed.insert(t.branch_id(name)?, w.clone());
    }
    // Loops beyond the cut have weights 1/2^(n+1) for n > depth.
    let cut = vec![(t.branch_id(&format!("b{depth}"))?, Rational::one())];
    let w = t.solve_weights(&fixed, &[(cut, inv_pow2(depth as u32))])?;
    Ok((t, w))
}
