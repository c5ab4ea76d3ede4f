//! The verification suite: one check per property of the constructions,
//! each with the statement it tests, run independently and collected into a
//! report.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carrying::{covering_identity, image_windows, induced_weight, leaves_chain, missing_path_window, CarryingMap};
use crate::flatdyn::{
    build_f, build_iet, build_sigma, dyadic_leaf_heights, hitting_histograms, return_to_transversal, singular_orbit, trace_separatrix, Dir, FlatTerminal,
};
use crate::numerics::{format_rational, inv_pow2, rat, Rational};
use crate::raycalc::{
    alpha_seq, crosses_loop, default_sequences, fixed_word_prefix, gamma_family, loop_words, monotonicity_check, order_of_loops, strictly_increasing,
    substitution_f, Crossing, RayLimit,
};
use crate::rectcomplex::{
    alpha_entries, boundary_leaf_through, boundary_paths, cut_candidates, entry_shift, saddle_connection_census, search_red_set, BoundaryOptions, Corner,
    RectComplex,
};
use crate::traintrack::pieces::{enumerate_paths_through_piece, Piece};
use crate::traintrack::{build_t, build_t1, build_t_star, cyclic_cover, TrainTrack, WeightSystem};

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Verified,
    Refuted,
    UnknownAtDepth,
    Skipped,
}

/// Parameters shared by all checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    /// Truncation depth of tracks and flat systems where a check does not
    /// pin its own.
    pub depth: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { depth: 16 }
    }
}

/// Result of one check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    pub details: String,
    /// A minimal input reproducing a refutation.
    pub reproducer: Option<String>,
    pub wall_clock_ms: Option<u64>,
}

/// A complete run of a suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub config: Config,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }

    /// False iff some check was refuted.
    pub fn ok(&self) -> bool {
        self.count(Status::Refuted) == 0
    }

    /// One line per check.
    pub fn to_text(&self) -> String {
        let mut out = format!("suite {} depth {}\n", self.suite, self.config.depth);
        for c in &self.checks {
            let ms = c.wall_clock_ms.map(|m| format!(" ({m} ms)")).unwrap_or_default();
            out.push_str(&format!("{:<16} {:<15} {}{}\n", c.id, format!("{:?}", c.status), c.details, ms));
            if let Some(r) = &c.reproducer {
                out.push_str(&format!("{:<16} reproduce: {r}\n", ""));
            }
        }
        out.push_str(&format!(
            "verified {} refuted {} unknown {} skipped {}\n",
            self.count(Status::Verified),
            self.count(Status::Refuted),
            self.count(Status::UnknownAtDepth),
            self.count(Status::Skipped)
        ));
        out
    }
}

/// What a check returns.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub details: String,
    pub reproducer: Option<String>,
}

impl Outcome {
    fn verified(details: impl Into<String>) -> Outcome {
        Outcome { status: Status::Verified, details: details.into(), reproducer: None }
    }

    fn refuted(details: impl Into<String>, reproducer: impl Into<String>) -> Outcome {
        Outcome { status: Status::Refuted, details: details.into(), reproducer: Some(reproducer.into()) }
    }

    fn from_failures(ok_details: impl Into<String>, failures: Vec<(String, String)>) -> Outcome {
        match failures.into_iter().next() {
            None => Outcome::verified(ok_details),
            Some((d, r)) => Outcome::refuted(d, r),
        }
    }

    fn error(e: impl std::fmt::Display, reproducer: impl Into<String>) -> Outcome {
        Outcome::refuted(format!("error: {e}"), reproducer)
    }
}

/// One check of the suite.
pub struct Check {
    pub id: &'static str,
    pub anchor: &'static str,
    pub run: fn(&Config) -> Outcome,
}

/// All checks, in report order.
pub fn all_checks() -> Vec<Check> {
    vec![
        Check { id: "track.switch", anchor: "switch conditions of T, T*, T1 and its covers", run: check_switch },
        Check { id: "carry.weights", anchor: "listed induced weights w*", run: check_weights },
        Check { id: "complex.boundary", anchor: "three boundary paths; leaf l0 through P6 and Q6", run: check_boundary },
        Check { id: "complex.saddles", anchor: "saddle connections Pn->Qn, Q1->Q0, Qn->Qn-2, Pn->Pn", run: check_saddles },
        Check { id: "flat.orbits", anchor: "orbits of singularities under phi", run: check_orbits },
        Check { id: "flat.dyadic", anchor: "separatrix of p_i meets heights j/2^(i+1)", run: check_dyadic },
        Check { id: "flat.iet", anchor: "second return to the transversal is the exchange f", run: check_iet },
        Check { id: "flat.histogram", anchor: "equidistribution of returns", run: check_histogram },
        Check { id: "ray.subst", anchor: "f(alpha_k) = alpha_(k+2); fixed word", run: check_subst },
        Check { id: "ray.order", anchor: "order of loops; monotonicity; reversed convergence", run: check_order },
        Check { id: "carry.missing", anchor: "covering identity; the path f* is not an image", run: check_missing },
        Check { id: "track.pieces", anchor: "17 train paths through V, 3 through U", run: check_pieces },
        Check { id: "complex.unzip", anchor: "unzipping quarters the complex; alpha_i enters R_(i+1)", run: check_unzip },
        Check { id: "ray.crosses", anchor: "gamma crosses every short loop", run: check_crosses },
    ]
}

/// Runs the checks whose id starts with `prefix`, in parallel.
pub fn run_suite(name: &str, prefix: &str, config: &Config, timing: bool) -> VerificationReport {
    let checks: Vec<Check> = all_checks().into_iter().filter(|c| c.id.starts_with(prefix)).collect();
    let checks = crate::par::map(&checks, |c| {
        let t = Instant::now();
        let o = (c.run)(config);
        CheckResult {
            id: c.id.to_string(),
            anchor: c.anchor.to_string(),
            status: o.status,
            details: o.details,
            reproducer: o.reproducer,
            wall_clock_ms: timing.then(|| t.elapsed().as_millis() as u64),
        }
    });
    VerificationReport { suite: name.to_string(), config: config.clone(), checks }
}

fn switch_failures(label: &str, tw: Result<(TrainTrack, WeightSystem), impl std::fmt::Display>) -> Vec<(String, String)> {
    match tw {
        Err(e) => vec![(format!("{label}: {e}"), label.to_string())],
        Ok((t, w)) => {
            t.check_switch_conditions(&w).into_iter().take(1).map(|v| (format!("{label}: switch {} unbalanced", v.switch), label.to_string())).collect()
        }
    }
}

fn check_switch(_: &Config) -> Outcome {
    let mut f = Vec::new();
    f.extend(switch_failures("build_t(32)", build_t(32)));
    f.extend(switch_failures("build_t_star(32)", build_t_star(32)));
    f.extend(switch_failures("build_t1(16)", build_t1(16)));
    if let Ok((t1, w1)) = build_t1(16) {
        for n in [2, 3] {
            f.extend(switch_failures(&format!("cyclic_cover(build_t1(16), {n})"), cyclic_cover(&t1, &w1, n)));
        }
    }
    Outcome::from_failures("all switch conditions hold exactly", f)
}

fn check_weights(_: &Config) -> Outcome {
    let mut expected: Vec<(String, Rational)> = vec![
        ("f0*".into(), rat(1, 1)),
        ("f1*".into(), rat(3, 4)),
        ("f2*".into(), rat(1, 4)),
        ("f3*".into(), rat(3, 16)),
        ("f4*".into(), rat(1, 16)),
        ("f5*".into(), rat(3, 64)),
        ("e1*".into(), rat(1, 3)),
        ("e2*".into(), rat(2, 3)),
        ("b-1*".into(), rat(1, 1)),
        ("b0*".into(), rat(1, 1)),
        ("b1*".into(), rat(1, 2)),
    ];
    for n in 1..=8u32 {
        expected.push((format!("f-{n}*"), inv_pow2(n)));
        expected.push((format!("h{n}*"), inv_pow2(n + 1)));
        expected.push((format!("c{n}*"), inv_pow2(n)));
        expected.push((format!("d{n}*"), inv_pow2(n + 1)));
    }
    let f = expected
        .iter()
        .filter_map(|(b, want)| match induced_weight(b) {
            Ok(got) if &got == want => None,
            Ok(got) => Some((format!("w*({b}) = {} not {}", format_rational(&got), format_rational(want)), format!("carry weights --branch {b}"))),
            Err(e) => Some((format!("w*({b}): {e}"), format!("carry weights --branch {b}"))),
        })
        .collect();
    Outcome::from_failures(format!("{} listed weights exact", expected.len()), f)
}

fn complex_of(tw: Result<(TrainTrack, WeightSystem), crate::traintrack::TrackError>) -> Result<RectComplex, String> {
    let (t, w) = tw.map_err(|e| e.to_string())?;
    RectComplex::new(&t, &w).map_err(|e| e.to_string())
}

fn covered(n: usize, depth: usize) -> Result<RectComplex, String> {
    let (t1, w1) = build_t1(depth).map_err(|e| e.to_string())?;
    complex_of(cyclic_cover(&t1, &w1, n))
}

/// The leaf l0 from P5 to P6 as a list of singular points.
pub const L0_CHAIN: [&str; 24] =
    ["P5", "Q5", "Q3", "P3", "P3", "Q3", "Q1", "P1", "P1", "Q1", "Q0", "P0", "P0", "Q0", "Q2", "P2", "P2", "Q2", "Q4", "P4", "P4", "Q4", "Q6", "P6"];

fn check_boundary(_: &Config) -> Outcome {
    let mut f = Vec::new();
    let mut counts = Vec::new();
    for (label, expected) in [("G", 3usize), ("G*", 3), ("G2", 6), ("G3", 9)] {
        let mut at = Vec::new();
        for depth in [32usize, 64] {
            let g = match label {
                "G" => complex_of(build_t(depth)),
                "G*" => complex_of(build_t_star(depth)),
                "G2" => covered(2, depth),
                _ => covered(3, depth),
            };
            match g {
                Ok(g) => at.push(boundary_paths(&g, &BoundaryOptions::default()).len()),
                Err(e) => f.push((format!("{label} at depth {depth}: {e}"), format!("complex boundary {label} --depth {depth}"))),
            }
        }
        if at.iter().any(|&c| c != expected) {
            f.push((format!("{label}: counts {at:?} at depths 32, 64, expected {expected}"), format!("complex boundary {label} --depth 64")));
        }
        counts.push(format!("{label}={at:?}"));
    }
    match complex_of(build_t(32)) {
        Ok(g) => {
            let p0 = g.singular.iter().position(|s| s.name == "P0");
            let names = p0.map(|s| boundary_leaf_through(&g, Corner { singular: s, sigma: 1 }, 1024).singular_names).unwrap_or_default();
            let found = names.windows(L0_CHAIN.len()).any(|w| w == L0_CHAIN);
            if !found {
                f.push((format!("leaf through P0 reads {names:?}"), "complex boundary G --depth 32".into()));
            }
        }
        Err(e) => f.push((e, "complex boundary G --depth 32".into())),
    }
    Outcome::from_failures(format!("counts {}; l0 window matches", counts.join(" ")), f)
}

fn check_saddles(config: &Config) -> Outcome {
    let g = match complex_of(build_t(config.depth.max(16))) {
        Ok(g) => g,
        Err(e) => return Outcome::error(e, "complex saddles"),
    };
    let sc = saddle_connection_census(&g, 10, 100_000);
    let has = |a: &str, b: &str| sc.iter().any(|c| g.singular[c.from].name == a && g.singular[c.to].name == b);
    let mut want: Vec<(String, String)> = vec![("Q1".into(), "Q0".into())];
    for n in 0..=10 {
        want.push((format!("P{n}"), format!("Q{n}")));
        want.push((format!("P{n}"), format!("P{n}")));
        if n >= 2 {
            want.push((format!("Q{n}"), format!("Q{}", n - 2)));
        }
    }
    let f = want.iter().filter(|(a, b)| !has(a, b)).map(|(a, b)| (format!("missing {a} -> {b}"), "complex saddles --max-level 10".into())).collect();
    Outcome::from_failures(format!("{} connections found among {}", want.len(), sc.len()), f)
}

/// The four orbit chains of singular points, six steps each.
pub fn orbit_chains() -> Vec<(&'static str, Vec<String>)> {
    let run = |pre: &str, from: i64| (0..6).map(|k| format!("{pre}{}", from + 2 * k)).collect::<Vec<_>>();
    vec![("a1", run("p", 0)), ("a0", run("p", 1)), ("q-1", run("q", 1)), ("b0", run("q", -2))]
}

fn check_orbits(config: &Config) -> Outcome {
    let sys = match build_sigma(config.depth.max(16)) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e, "flat orbit"),
    };
    let f = orbit_chains()
        .into_iter()
        .filter_map(|(start, want)| match singular_orbit(&sys, start, 6) {
            Ok(got) if got == want => None,
            Ok(got) => Some((format!("orbit of {start} is {got:?}"), format!("flat orbit {start} --steps 6"))),
            Err(e) => Some((format!("orbit of {start}: {e}"), format!("flat orbit {start} --steps 6"))),
        })
        .collect();
    Outcome::from_failures("four chains of six steps", f)
}

fn check_dyadic(config: &Config) -> Outcome {
    let sys = match build_f(config.depth.max(16)) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e, "flat leaf"),
    };
    let idx: Vec<u32> = (0..=10).collect();
    let f = crate::par::map(&idx, |&i| {
        let leaf = trace_separatrix(&sys, i as usize, 4096);
        let ok = leaf.heights() == dyadic_leaf_heights(i) && matches!(leaf.terminal, FlatTerminal::Infinite(_));
        (!ok).then(|| (format!("separatrix of p{i} ends {:?} after {} segments", leaf.terminal, leaf.segments.len()), format!("flat leaf --separatrix {i}")))
    })
    .into_iter()
    .flatten()
    .collect();
    Outcome::from_failures("i = 0..10", f)
}

/// `count` heights with reduced denominator `2^10 3`, drawn from a fixed
/// seed, away from the breakpoints of the exchange at level `n`. Dyadic
/// heights are excluded because they lie on singular leaves.
pub fn iet_sample(count: usize, seed: u64, n: usize) -> Vec<Rational> {
    let iet = build_iet(n).expect("exchange level");
    let denom = 3 * 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let x = rat(rng.gen_range(1..denom), denom);
        if x.denom() == &denom.into() && iet.apply(&x).is_ok() && !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn check_iet(config: &Config) -> Outcome {
    let n = config.depth.max(24);
    let (sys, iet) = match (build_f(n), build_iet(n)) {
        (Ok(s), Ok(f)) => (s, f),
        (Err(e), _) => return Outcome::error(e, "flat iet"),
        (_, Err(e)) => return Outcome::error(e, "flat iet"),
    };
    let (src, img) = iet.total_lengths();
    let mut f = Vec::new();
    if src != img {
        f.push((format!("lengths {} vs {}", format_rational(&src), format_rational(&img)), "flat iet".to_string()));
    }
    let xs = iet_sample(100, 7, n);
    let returns = crate::par::map(&xs, |x| return_to_transversal(&sys, x, Dir::Left, 2));
    for (x, r) in xs.iter().zip(returns) {
        let fx = iet.apply(x);
        if r.as_ref().ok() != fx.as_ref().ok() {
            f.push((format!("at {}: return {r:?}, exchange {fx:?}", format_rational(x)), format!("flat iet --at {}", format_rational(x))));
        }
    }
    Outcome::from_failures(format!("100 heights agree; total length {}", format_rational(&src)), f)
}

fn check_histogram(_: &Config) -> Outcome {
    let sys = match build_f(40) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e, "flat histogram"),
    };
    let seeds = [rat(1, 7), rat(2, 5), rat(3, 11)];
    let (returns, bins) = (100_000usize, 8usize);
    let expected = returns as f64 / bins as f64;
    let mut worst = 0.0f64;
    let mut f = Vec::new();
    for h in hitting_histograms(&sys, &seeds, returns, bins) {
        let dev = h.counts.iter().map(|&c| (c as f64 - expected).abs() / expected).fold(0.0, f64::max);
        worst = worst.max(dev);
        if h.terminal.is_some() || dev >= 0.05 {
            let s = format_rational(&h.start);
            f.push((
                format!("seed {s}: counts {:?} terminal {:?}", h.counts, h.terminal),
                format!("flat histogram --seed {s} --returns {returns} --bins {bins}"),
            ));
        }
    }
    Outcome::from_failures(format!("worst bin deviation {:.4}", worst), f)
}

fn check_subst(_: &Config) -> Outcome {
    let mut f = Vec::new();
    for k in 1..=12 {
        if substitution_f(&alpha_seq(k)) != alpha_seq(k + 2) {
            f.push((format!("f(alpha_{k}) differs from alpha_{}", k + 2), format!("ray subst --alpha {k}")));
        }
    }
    let limit = RayLimit::gamma().prefix(4095);
    if limit != fixed_word_prefix(4095) {
        f.push(("odd alpha limit differs from the fixed word".into(), "ray subst --iter 6".into()));
    }
    Outcome::from_failures("k = 1..12; prefix 4095", f)
}

fn check_order(_: &Config) -> Outcome {
    let mut f = Vec::new();
    for m in 1..=6 {
        if !strictly_increasing(&order_of_loops(m)) {
            f.push((format!("loop pattern fails at m = {m}"), format!("ray order --loops {m}")));
        }
    }
    let depth = 1 << 10;
    let mut counts = [0usize; 3];
    for n in 1..=3usize {
        let (p, q) = default_sequences(n, 6);
        let fam = match gamma_family(n, &p, &q, 9) {
            Ok(x) => x,
            Err(e) => return Outcome::error(e, format!("ray gamma -n {n} -j 9")),
        };
        for k in 1..=4 {
            let rep = monotonicity_check(&fam, k, depth);
            counts[0] += rep.count(Status::Verified);
            counts[1] += rep.count(Status::Refuted);
            counts[2] += rep.count(Status::UnknownAtDepth);
            for c in rep.checks.iter().filter(|c| c.status != Status::Verified).take(1) {
                f.push((
                    format!("n={n} k={k} {}: {} {} {} is {:?}", c.id, c.left, c.relation, c.right, c.status),
                    format!("ray verify -n {n} -k {k} --depth {depth}"),
                ));
            }
        }
    }
    Outcome::from_failures(format!("{} inequalities verified, {} refuted, {} unknown", counts[0], counts[1], counts[2]), f)
}

fn check_missing(_: &Config) -> Outcome {
    let mut f = Vec::new();
    for i in -8i64..=8 {
        match covering_identity(i, 24) {
            Ok((a, b)) if a == b => {}
            Ok((a, b)) => f.push((format!("f{i}*: stack {} vs w* {}", format_rational(&a), format_rational(&b)), format!("carry weights --branch f{i}*"))),
            Err(e) => f.push((format!("f{i}*: {e}"), format!("carry weights --branch f{i}*"))),
        }
    }
    let c = match CarryingMap::new(12) {
        Ok(c) => c,
        Err(e) => return Outcome::error(e, "carry missing --depth 8"),
    };
    match missing_path_window(8, &c.t_star) {
        Ok(m) if m.is_train_path && m.only_f => {}
        Ok(m) => f.push((format!("window {:?}", m.window), "carry missing --depth 8".into())),
        Err(e) => f.push((e.to_string(), "carry missing --depth 8".into())),
    }
    let seeds: Vec<Rational> = (1..=16).map(|j| rat(2 * j - 1, 37)).collect();
    match image_windows(&c, &seeds, 17) {
        Ok(ws) => {
            if let Some(k) = ws.iter().position(|w| !leaves_chain(w, &c.t_star)) {
                f.push((format!("image of the leaf at {} stays in f*", format_rational(&seeds[k])), "carry translate".into()));
            }
        }
        Err(e) => f.push((e.to_string(), "carry translate".into())),
    }
    Outcome::from_failures("identity for |i| <= 8; window only f*; 16 image windows leave f*", f)
}

fn check_pieces(_: &Config) -> Outcome {
    let mut f = Vec::new();
    let mut found = Vec::new();
    for (piece, total, returning) in [(Piece::V, 17usize, 8usize), (Piece::U, 3, 2)] {
        match enumerate_paths_through_piece(piece) {
            Ok(p) => {
                let r = p.iter().filter(|x| x.self_returning()).count();
                found.push(format!("{piece:?}: {} ({r} returning)", p.len()));
                if (p.len(), r) != (total, returning) {
                    f.push((format!("{piece:?}: {} paths, {r} returning; expected {total}, {returning}", p.len()), format!("track paths --piece {piece:?}")));
                }
            }
            Err(e) => f.push((e.to_string(), format!("track paths --piece {piece:?}"))),
        }
    }
    Outcome::from_failures(found.join("; "), f)
}

fn check_unzip(_: &Config) -> Outcome {
    let mut f = Vec::new();
    let mut notes = Vec::new();
    for n in [2usize, 3] {
        let g = match covered(n, 16) {
            Ok(g) => g,
            Err(e) => return Outcome::error(e, format!("complex unzip --cover {n}")),
        };
        let shift = entry_shift(&alpha_entries(&g, n, 4096));
        if !matches!(shift, Some(s) if s == 1 || s == n - 1) {
            f.push((format!("G{n}: entry shift {shift:?}"), format!("complex trace --alpha --cover {n}")));
        }
        let Ok(root) = g.track.branch_id("e1.0") else {
            f.push((format!("G{n}: no branch e1.0"), format!("complex unzip --cover {n}")));
            continue;
        };
        let cands = cut_candidates(&g, 2, 256);
        let s = search_red_set(&g, &cands, root, &rat(1, 4), 2, 4);
        notes.push(format!("G{n}: shift {shift:?}, {} cut sets tried", s.subsets_tried));
        if s.found.is_none() {
            f.push((
                format!("G{n}: none of {} cut sets of at most 2 saddle connections quarters the complex", s.subsets_tried),
                format!("complex unzip --cover {n} --max-cut 2"),
            ));
        }
    }
    Outcome::from_failures(notes.join("; "), f)
}

fn check_crosses(_: &Config) -> Outcome {
    let gamma = fixed_word_prefix(1 << 12);
    let ray = RayLimit::new("gamma", move |j| gamma.prefix((j * 64).min(1 << 12)));
    let loops = loop_words(7, 2);
    let results = crate::par::map(&loops, |l| crosses_loop(&ray, l, 64));
    let f = loops
        .iter()
        .zip(results)
        .filter_map(|(l, r)| match r {
            Ok(Crossing::Crosses { .. }) => None,
            Ok(Crossing::NoCrossingFound) => Some((format!("no crossing with {l}"), format!("ray crosses \"{l}\" --depth 64"))),
            Err(e) => Some((e.to_string(), format!("ray crosses \"{l}\""))),
        })
        .collect();
    Outcome::from_failures(format!("{} loops crossed", loops.len()), f)
}
