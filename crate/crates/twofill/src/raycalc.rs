//! Loops and rays from the puncture as reduced words, the circular order on
//! the conical circle, concatenation at the puncture, the two-step family of
//! loops converging to disjoint rays, and the substitution on the loops `r_i`,
//! `l_i`.
//!
//! Generator `g_k` is the loop around the `k`-th block of the Cantor set. At
//! every lift of the puncture the letter directions sit on one cycle:
//!
//! ```text
//!   ... g3 g3' g1 g1' g0 g0' g2 g2' g4 g4' ...
//! ```
//!
//! with the two ends accumulating at a single gap, the direction of the ray
//! `tau` down the chain of blocks. At the base point the cycle is cut at that
//! gap. After a prefix ending in the letter `x`, the cycle is cut at `x'`,
//! the direction back along the prefix, and the cusp where the prefix ends
//! sits at the gap. Loops towards `tau` from the right are `r_i = g(2i-2)'`
//! and from the left `l_i = g(2i-1)`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::verify::Status;

/// Errors of the word calculus.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RayError {
    #[error("cannot parse letter {0:?}")]
    Parse(String),
    #[error("word is not reduced at position {0}")]
    NotReduced(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unexpected cancellation: {0}")]
    Cancellation(String),
}

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Letter {
    pub gen: u32,
    pub inv: bool,
}

impl Letter {
    pub fn g(gen: u32) -> Letter {
        Letter { gen, inv: false }
    }

    pub fn inverse(self) -> Letter {
        Letter { gen: self.gen, inv: !self.inv }
    }

    /// Place on the cycle of directions, increasing from the gap.
    fn key(self) -> (i64, u8) {
        let k = self.gen as i64;
        (if k % 2 == 1 { -k } else { k }, self.inv as u8)
    }

    /// The same letter in the display alphabet, `r1`, `L2` and so on.
    pub fn display_rl(self) -> String {
        let (base, i) = if self.gen.is_multiple_of(2) { ('r', self.gen / 2 + 1) } else { ('l', self.gen.div_ceil(2)) };
        let bar = if base == 'r' { !self.inv } else { self.inv };
        let c = if bar { base.to_ascii_uppercase() } else { base };
        format!("{c}{i}")
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}{}", self.gen, if self.inv { "'" } else { "" })
    }
}

fn parse_letter(tok: &str) -> Result<Letter, RayError> {
    let err = || RayError::Parse(tok.to_string());
    if let Some(rest) = tok.strip_prefix('g') {
        let (num, inv) = match rest.strip_suffix('\'') {
            Some(n) => (n, true),
            None => (rest, false),
        };
        return Ok(Letter { gen: num.parse().map_err(|_| err())?, inv });
    }
    let mut chars = tok.chars();
    let c = chars.next().ok_or_else(err)?;
    let i: u32 = chars.as_str().parse().map_err(|_| err())?;
    if i == 0 {
        return Err(err());
    }
    match c {
        'r' => Ok(Letter { gen: 2 * i - 2, inv: true }),
        'R' => Ok(Letter { gen: 2 * i - 2, inv: false }),
        'l' => Ok(Letter { gen: 2 * i - 1, inv: false }),
        'L' => Ok(Letter { gen: 2 * i - 1, inv: true }),
        _ => Err(err()),
    }
}

/// A reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    /// The empty word.
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    /// A word from letters that must already be reduced.
    pub fn new(letters: Vec<Letter>) -> Result<Word, RayError> {
        if let Some(i) = letters.windows(2).position(|w| w[1] == w[0].inverse()) {
            return Err(RayError::NotReduced(i + 1));
        }
        Ok(Word(letters))
    }

    /// The free reduction of `letters`.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letter(l: Letter) -> Word {
        Word(vec![l])
    }

    /// Parses `"g0 g1' g0'"` or `"r1 l1 R1"`; the two styles may be mixed.
    pub fn parse(s: &str) -> Result<Word, RayError> {
        let letters = s.split_whitespace().map(parse_letter).collect::<Result<Vec<_>, _>>()?;
        Word::new(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The loop traversed backwards.
    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// The first `n` letters.
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// True when the first and last letters do not cancel.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(a), Some(b)) => self.0.len() == 1 || *a != b.inverse(),
            _ => false,
        }
    }

    /// The word in the display alphabet of the loops `r_i`, `l_i`.
    pub fn display_rl(&self) -> String {
        self.0.iter().map(|l| l.display_rl()).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The loop `u` followed by `v` at the puncture, freely reduced, and
/// whether any letters cancelled.
pub fn concat_at_infinity(u: &Word, v: &Word) -> (Word, bool) {
    let w = Word::reduce(u.0.iter().chain(v.0.iter()).copied());
    let cancelled = w.len() != u.len() + v.len();
    (w, cancelled)
}

/// Concatenation that must not cancel.
pub fn concat_strict(parts: &[&Word]) -> Result<Word, RayError> {
    let mut out: Vec<Letter> = Vec::new();
    for p in parts {
        if let (Some(a), Some(b)) = (out.last(), p.0.first()) {
            if *b == a.inverse() {
                return Err(RayError::Cancellation(format!("{a} meets {b}")));
            }
        }
        out.extend_from_slice(&p.0);
    }
    Ok(Word(out))
}

/// The loops `r_i` and `l_i`.
pub fn build_approaching_loops(i: u32) -> Result<(Word, Word), RayError> {
    if i == 0 {
        return Err(RayError::Domain("loop index starts at 1".into()));
    }
    Ok((r_loop(i), l_loop(i)))
}

/// `r_i`, around block `2i-2` clockwise.
pub fn r_loop(i: u32) -> Word {
    Word::letter(Letter { gen: 2 * i - 2, inv: true })
}

/// `l_i`, around block `2i-1` counterclockwise.
pub fn l_loop(i: u32) -> Word {
    Word::letter(Letter { gen: 2 * i - 1, inv: false })
}

/// A ray given as the union of a chain of words, each a prefix of the next.
#[derive(Clone)]
pub struct RayLimit {
    pub name: String,
    producer: Arc<dyn Fn(usize) -> Word + Send + Sync>,
}

impl fmt::Debug for RayLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RayLimit({})", self.name)
    }
}

impl RayLimit {
    /// `producer(j)` is the `j`-th word of the chain, for `j >= 1`.
    pub fn new(name: &str, producer: impl Fn(usize) -> Word + Send + Sync + 'static) -> RayLimit {
        RayLimit { name: name.to_string(), producer: Arc::new(producer) }
    }

    /// The first `len` letters, or fewer if the chain stops growing within
    /// `len` words. Panics if some word is not a prefix of the next.
    pub fn prefix(&self, len: usize) -> Word {
        let mut cur = (self.producer)(1);
        let mut j = 1;
        while cur.len() < len && j <= len + 1 {
            j += 1;
            let next = (self.producer)(j);
            assert!(cur.is_prefix_of(&next), "{}: word {} is not a prefix of word {}", self.name, j - 1, j);
            cur = next;
        }
        cur.prefix(len)
    }

    /// The limit of the odd loops `alpha(2k-1)`.
    pub fn gamma() -> RayLimit {
        RayLimit::new("gamma", |j| alpha_seq(2 * j as u32 - 1))
    }

    /// The ray winding around `loop` forever, `loop loop loop ...`.
    pub fn power(lp: &Word) -> RayLimit {
        let w = lp.clone();
        RayLimit::new("power", move |j| Word::reduce(std::iter::repeat_n(w.0.iter().copied(), j).flatten()))
    }
}

/// A point of the circle known only through words converging to it:
/// `lower` increases towards it, `upper` decreases towards it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutRay {
    pub lower: Vec<Word>,
    pub upper: Vec<Word>,
}

/// Witnesses for the gap `tau` where the circle is cut: the loops `l_i`
/// decrease to the lower end and the loops `r_i` increase to the upper end.
pub fn tau_witnesses(m: u32) -> (Vec<Word>, Vec<Word>) {
    ((1..=m).map(l_loop).collect(), (1..=m).map(r_loop).collect())
}

/// Anything placed on the conical circle.
#[derive(Debug, Clone)]
pub enum RayLike {
    Loop(Word),
    Ray(RayLimit),
    Cut(CutRay),
}

/// Result of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cmp {
    Less,
    Greater,
    Equal,
    UnknownAtDepth,
}

impl Cmp {
    fn from_ordering(o: Ordering) -> Cmp {
        match o {
            Ordering::Less => Cmp::Less,
            Ordering::Greater => Cmp::Greater,
            Ordering::Equal => Cmp::Equal,
        }
    }

    fn flip(self) -> Cmp {
        match self {
            Cmp::Less => Cmp::Greater,
            Cmp::Greater => Cmp::Less,
            c => c,
        }
    }
}

/// Where a sequence goes after the common prefix.
#[derive(Debug, Clone, Copy)]
enum Slot {
    Letter(Letter),
    Cusp,
}

fn ordinal(anchor: Option<Letter>, slot: Slot) -> (u8, (i64, u8)) {
    match (anchor, slot) {
        (None, Slot::Cusp) => (0, (0, 0)),
        (None, Slot::Letter(l)) => (1, l.key()),
        (Some(_), Slot::Cusp) => (1, (0, 0)),
        (Some(a), Slot::Letter(l)) => {
            if l.key() > a.key() {
                (0, l.key())
            } else {
                (2, l.key())
            }
        }
    }
}

/// Compares two letter sequences; `*_finite` tells whether a sequence ends
/// at a cusp or is only a prefix of a ray.
fn compare_sequences(a: &[Letter], a_finite: bool, b: &[Letter], b_finite: bool, depth: usize) -> Cmp {
    let n = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    if a_finite && b_finite && a.len() == n && b.len() == n {
        return Cmp::Equal;
    }
    if n >= depth {
        return Cmp::UnknownAtDepth;
    }
    let slot = |s: &[Letter], finite: bool| {
        if n < s.len() {
            Some(Slot::Letter(s[n]))
        } else if finite {
            Some(Slot::Cusp)
        } else {
            None
        }
    };
    let (Some(sa), Some(sb)) = (slot(a, a_finite), slot(b, b_finite)) else { return Cmp::UnknownAtDepth };
    let anchor = (n > 0).then(|| a[n - 1].inverse());
    Cmp::from_ordering(ordinal(anchor, sa).cmp(&ordinal(anchor, sb)))
}

/// Compares two words on the circle cut at `tau`.
pub fn compare_words(a: &Word, b: &Word) -> Cmp {
    compare_sequences(&a.0, true, &b.0, true, usize::MAX)
}

fn compare_with_cut(x: &RayLike, c: &CutRay, depth: usize) -> Cmp {
    let below = c.lower.iter().any(|w| matches!(order_compare(x, &RayLike::Loop(w.clone()), depth), Cmp::Less | Cmp::Equal));
    let above = c.upper.iter().any(|w| matches!(order_compare(x, &RayLike::Loop(w.clone()), depth), Cmp::Greater | Cmp::Equal));
    match (below, above) {
        (true, false) => Cmp::Less,
        (false, true) => Cmp::Greater,
        _ => Cmp::UnknownAtDepth,
    }
}

/// Compares two objects on the circle. Loops are known completely and are
/// compared exactly; rays are read to `depth` letters.
pub fn order_compare(a: &RayLike, b: &RayLike, depth: usize) -> Cmp {
    use RayLike::*;
    match (a, b) {
        (Loop(x), Loop(y)) => compare_sequences(&x.0, true, &y.0, true, usize::MAX),
        (Loop(x), Ray(r)) => compare_sequences(&x.0, true, &r.prefix(depth + 1).0, false, depth),
        (Ray(r), Loop(y)) => compare_sequences(&r.prefix(depth + 1).0, false, &y.0, true, depth),
        (Ray(r), Ray(s)) => compare_sequences(&r.prefix(depth + 1).0, false, &s.prefix(depth + 1).0, false, depth),
        (Cut(c), Cut(d)) => {
            if c == d {
                Cmp::Equal
            } else {
                let sep = |lo: &CutRay, hi: &CutRay| {
                    lo.upper.iter().any(|u| hi.lower.iter().any(|l| matches!(order_compare(&Loop(u.clone()), &Loop(l.clone()), depth), Cmp::Less | Cmp::Equal)))
                };
                if sep(c, d) {
                    Cmp::Less
                } else if sep(d, c) {
                    Cmp::Greater
                } else {
                    Cmp::UnknownAtDepth
                }
            }
        }
        (x, Cut(c)) => compare_with_cut(x, c, depth),
        (Cut(c), y) => compare_with_cut(y, c, depth).flip(),
    }
}

/// True iff the words are strictly increasing in the circular order.
pub fn strictly_increasing(words: &[Word]) -> bool {
    words.windows(2).all(|w| compare_words(&w[0], &w[1]) == Cmp::Less)
}

/// The pattern `l_m < L_m < ... < l_1 < L_1 < R_1 < r_1 < ... < R_m < r_m`.
pub fn order_of_loops(m: u32) -> Vec<Word> {
    let mut out = Vec::new();
    for i in (1..=m).rev() {
        out.push(l_loop(i));
        out.push(l_loop(i).reverse());
    }
    for i in 1..=m {
        out.push(r_loop(i).reverse());
        out.push(r_loop(i));
    }
    out
}

/// The substitution `r1 -> r1 l1 R1 r2 r1 L1 R1`, `r_i -> r_(i+1)` for
/// `i >= 2`, `l_i -> l_(i+1)`, extended to inverses and words.
pub fn substitution_f(w: &Word) -> Word {
    let r1_image = Word::parse("r1 l1 R1 r2 r1 L1 R1").expect("literal word");
    let parts: Vec<Word> =
        w.0.iter()
            .map(|&l| match (l.gen, l.inv) {
                (0, true) => r1_image.clone(),
                (0, false) => r1_image.reverse(),
                (g, inv) => Word::letter(Letter { gen: g + 2, inv }),
            })
            .collect();
    concat_at_infinity_many(&parts)
}

/// `alpha_1 = r1`, `alpha_2k = alpha_(2k-1) l_k A_(2k-1)`,
/// `alpha_(2k-1) = alpha_(2k-2) r_k A_(2k-2)`.
pub fn alpha_seq(k: u32) -> Word {
    assert!(k >= 1, "alpha index starts at 1");
    let mut a = r_loop(1);
    for j in 2..=k {
        let mid = if j % 2 == 0 { l_loop(j / 2) } else { r_loop(j.div_ceil(2)) };
        let rev = a.reverse();
        a = concat_strict(&[&a, &mid, &rev]).expect("alpha recursion cancels");
    }
    a
}

/// The prefix of length `len` of the fixed word of the substitution
/// starting with `r1`.
pub fn fixed_word_prefix(len: usize) -> Word {
    let mut w = r_loop(1);
    while w.len() < len {
        let next = substitution_f(&w);
        assert!(w.is_prefix_of(&next), "iterates are not nested");
        w = next;
    }
    w.prefix(len)
}

/// Loops `alpha^(i)_j` and `gamma^(i)_j` of the two-step construction.
/// Both tables are indexed `[j][i]` with `j >= 1`, `1 <= i <= n`; row and
/// column zero are empty.
#[derive(Debug, Clone, Serialize)]
pub struct GammaFamily {
    pub n: usize,
    pub p: Vec<u32>,
    pub q: Vec<u32>,
    pub alpha: Vec<Vec<Word>>,
    pub gamma: Vec<Vec<Word>>,
}

impl GammaFamily {
    pub fn alpha(&self, i: usize, j: usize) -> &Word {
        &self.alpha[j][i]
    }

    pub fn gamma(&self, i: usize, j: usize) -> &Word {
        &self.gamma[j][i]
    }

    pub fn max_j(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// The loops of the construction up to index `j_max`, over the abstract
/// loops `ell_m = l_m` and `r_m`. `p[k-1]` and `q[k-1]` hold `p_k`, `q_k`.
pub fn gamma_family(n: usize, p: &[u32], q: &[u32], j_max: usize) -> Result<GammaFamily, RayError> {
    if n == 0 || j_max == 0 {
        return Err(RayError::Domain("need n >= 1 and j >= 1".into()));
    }
    for s in [p, q] {
        if s.first().is_some_and(|&x| x == 0) || s.windows(2).any(|w| w[1] < w[0] + n as u32) {
            return Err(RayError::Domain(format!("sequence {s:?} must be positive with gaps at least {n}")));
        }
    }
    let need = j_max / 2 + 1;
    if p.len() < need || q.len() < need {
        return Err(RayError::Domain(format!("need {need} terms of p and q for j = {j_max}")));
    }
    let blank = vec![Word::empty(); n + 1];
    let mut alpha = vec![blank.clone()];
    let mut gamma = vec![blank.clone()];
    for j in 1..=j_max {
        let mut a = blank.clone();
        let mut g = blank.clone();
        if j % 2 == 1 {
            let k = j.div_ceil(2);
            for i in 1..=n {
                let r = r_loop(q[k - 1] + i as u32 - 1);
                a[i] = if j == 1 {
                    r
                } else {
                    let prev = &gamma[j - 1][i];
                    concat_strict(&[prev, &r, &prev.reverse()])?
                };
            }
            g[1] = a[1].clone();
            for i in 2..=n {
                g[i] = concat_strict(&[&a[i], &g[i - 1]])?;
            }
        } else {
            let k = j / 2;
            for i in 0..n {
                let prev = &gamma[j - 1][n - i];
                let l = l_loop(p[k - 1] + i as u32);
                a[n - i] = concat_strict(&[prev, &l, &prev.reverse()])?;
            }
            g[n] = a[n].clone();
            for i in 1..n {
                g[n - i] = concat_strict(&[&a[n - i], &g[n - i + 1]])?;
            }
        }
        alpha.push(a);
        gamma.push(g);
    }
    Ok(GammaFamily { n, p: p.to_vec(), q: q.to_vec(), alpha, gamma })
}

/// The sequences `p_k = q_k = n k`, the smallest with gaps `n`.
pub fn default_sequences(n: usize, terms: usize) -> (Vec<u32>, Vec<u32>) {
    let s: Vec<u32> = (1..=terms as u32).map(|k| k * n as u32).collect();
    (s.clone(), s)
}

/// One inequality of a chain, with its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct OrderCheck {
    pub id: String,
    pub left: String,
    pub relation: String,
    pub right: String,
    pub status: Status,
}

/// Verdicts on the order statements for one family.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub n: usize,
    pub k: usize,
    pub depth: usize,
    pub checks: Vec<OrderCheck>,
}

impl MonotonicityReport {
    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }
}

struct Chain {
    id: String,
    items: Vec<(String, Word)>,
    /// `true` for `<=` between consecutive items, else `<`.
    weak: Vec<bool>,
    /// Chains written with `>` are checked reversed.
    descending: bool,
}

fn check_chain(c: &Chain, depth: usize, out: &mut Vec<OrderCheck>) {
    for (idx, pair) in c.items.windows(2).enumerate() {
        let (lo, hi) = if c.descending { (&pair[1], &pair[0]) } else { (&pair[0], &pair[1]) };
        let weak = c.weak[idx];
        let cmp = order_compare(&RayLike::Loop(lo.1.clone()), &RayLike::Loop(hi.1.clone()), depth);
        let status = match cmp {
            Cmp::Less => Status::Verified,
            Cmp::Equal if weak => Status::Verified,
            Cmp::UnknownAtDepth => Status::UnknownAtDepth,
            _ => Status::Refuted,
        };
        out.push(OrderCheck {
            id: format!("{}.{}", c.id, idx + 1),
            left: lo.0.clone(),
            relation: if weak { "<=".into() } else { "<".into() },
            right: hi.0.clone(),
            status,
        });
    }
}

/// Evaluates, for the given `k`, the chains of the monotonicity statements
/// (the ordered chains and the chains of each bullet on the circle order),
/// and the reversed order and reversed convergence chains, by direct
/// comparison at `depth`. Needs the family up to index `2k+1`.
pub fn monotonicity_check(f: &GammaFamily, k: usize, depth: usize) -> MonotonicityReport {
    let n = f.n;
    assert!(f.max_j() > 2 * k, "family too short for k = {k}");
    let g = |i: usize, j: usize| f.gamma(i, j).clone();
    let a = |i: usize, j: usize| f.alpha(i, j).clone();
    let name = |s: &str, i: usize, j: usize| format!("{s}({i})_{j}");
    let bar = |w: Word| w.reverse();
    let (pk, qk, qk1) = (f.p[k - 1], f.q[k - 1], f.q[k]);
    let mut chains: Vec<Chain> = Vec::new();
    for i in 1..=n {
        if k > 1 {
            chains.push(Chain {
                id: format!("monotone.even.i{i}"),
                items: vec![
                    (name("gamma", i, 2 * k - 1), g(i, 2 * k - 1)),
                    (name("gamma", i, 2 * k), g(i, 2 * k)),
                    (name("alpha", i, 2 * k), a(i, 2 * k)),
                    (name("Alpha", i, 2 * k), bar(a(i, 2 * k))),
                    (name("gamma", i, 2 * k - 2), g(i, 2 * k - 2)),
                ],
                weak: vec![false, true, false, false],
                descending: false,
            });
        }
        chains.push(Chain {
            id: format!("monotone.odd.i{i}"),
            items: vec![
                (name("gamma", i, 2 * k - 1), g(i, 2 * k - 1)),
                (name("Alpha", i, 2 * k + 1), bar(a(i, 2 * k + 1))),
                (name("alpha", i, 2 * k + 1), a(i, 2 * k + 1)),
                (name("gamma", i, 2 * k + 1), g(i, 2 * k + 1)),
                (name("gamma", i, 2 * k), g(i, 2 * k)),
            ],
            weak: vec![false, false, true, false],
            descending: false,
        });
    }

    let lbar_pn = l_loop(pk + n as u32).reverse();
    let rbar_q1 = r_loop(qk1).reverse();
    let mut items = vec![(format!("L{}", pk + n as u32), lbar_pn.clone())];
    for i in 1..=n {
        items.push((name("alpha", i, 2 * k), a(i, 2 * k)));
        items.push((name("Alpha", i, 2 * k), bar(a(i, 2 * k))));
    }
    items.push((format!("R{qk1}"), rbar_q1.clone()));
    let len = items.len();
    chains.push(Chain { id: "order.alpha.even".into(), items, weak: vec![false; len - 1], descending: false });

    let mut items = vec![(format!("L{}", pk + n as u32), lbar_pn)];
    for i in 1..=n {
        items.push((name("gamma", i, 2 * k), g(i, 2 * k)));
    }
    for i in (1..=n).rev() {
        items.push((name("Gamma", i, 2 * k), bar(g(i, 2 * k))));
    }
    items.push((format!("R{qk1}"), rbar_q1));
    let len = items.len();
    chains.push(Chain { id: "order.gamma.even".into(), items, weak: vec![false; len - 1], descending: false });

    let lbar_p = l_loop(pk).reverse();
    let rbar_qn = r_loop(qk + n as u32).reverse();
    let mut items = vec![(format!("L{pk}"), lbar_p.clone())];
    for i in 1..=n {
        items.push((name("Alpha", i, 2 * k - 1), bar(a(i, 2 * k - 1))));
        items.push((name("alpha", i, 2 * k - 1), a(i, 2 * k - 1)));
    }
    items.push((format!("R{}", qk + n as u32), rbar_qn.clone()));
    let len = items.len();
    chains.push(Chain { id: "order.alpha.odd".into(), items, weak: vec![false; len - 1], descending: false });

    let mut items = vec![(format!("L{pk}"), lbar_p)];
    for i in (1..=n).rev() {
        items.push((name("Gamma", i, 2 * k - 1), bar(g(i, 2 * k - 1))));
    }
    for i in 1..=n {
        items.push((name("gamma", i, 2 * k - 1), g(i, 2 * k - 1)));
    }
    items.push((format!("R{}", qk + n as u32), rbar_qn));
    let len = items.len();
    chains.push(Chain { id: "order.gamma.odd".into(), items, weak: vec![false; len - 1], descending: false });

    // Reversed order: products of consecutive alphas read backwards.
    for i in 1..=n {
        for j in i..=n {
            if k > 1 {
                let mut items = Vec::new();
                for m in (i..=j).rev() {
                    let parts: Vec<Word> = (m..=j).map(|t| a(t, 2 * k)).collect();
                    let prod = concat_at_infinity_many(&parts);
                    items.push((format!("bar(alpha({m}..{j})_{})", 2 * k), bar(prod)));
                }
                items.push((name("gamma", j, 2 * k - 2), g(j, 2 * k - 2)));
                let len = items.len();
                chains.push(Chain { id: format!("reversed.even.i{i}.j{j}"), items, weak: vec![false; len - 1], descending: false });
            }
            let mut items = Vec::new();
            for m in i..=j {
                let parts: Vec<Word> = (i..=m).rev().map(|t| a(t, 2 * k + 1)).collect();
                let prod = concat_at_infinity_many(&parts);
                items.push((format!("bar(alpha({m}..{i})_{})", 2 * k + 1), bar(prod)));
            }
            items.push((name("gamma", i, 2 * k - 1), g(i, 2 * k - 1)));
            let len = items.len();
            chains.push(Chain { id: format!("reversed.odd.i{i}.j{j}"), items, weak: vec![false; len - 1], descending: true });
        }
    }

    // Reversed convergence.
    for i in 1..=n {
        chains.push(Chain {
            id: format!("convergence.odd.i{i}"),
            items: vec![
                (name("gamma", 1, 2 * k - 1), g(1, 2 * k - 1)),
                (name("Gamma", i, 2 * k + 1), bar(g(i, 2 * k + 1))),
                (name("Gamma", 1, 2 * k + 1), bar(g(1, 2 * k + 1))),
                (name("gamma", 1, 2 * k + 1), g(1, 2 * k + 1)),
            ],
            weak: vec![false, true, false],
            descending: false,
        });
        if k > 1 {
            chains.push(Chain {
                id: format!("convergence.even.i{i}"),
                items: vec![
                    (name("gamma", n, 2 * k), g(n, 2 * k)),
                    (name("Gamma", n, 2 * k), bar(g(n, 2 * k))),
                    (name("Gamma", i, 2 * k), bar(g(i, 2 * k))),
                    (name("gamma", n, 2 * k - 2), g(n, 2 * k - 2)),
                ],
                weak: vec![false, true, false],
                descending: false,
            });
        }
    }

    let mut checks = Vec::new();
    for c in &chains {
        check_chain(c, depth, &mut checks);
    }
    MonotonicityReport { n, k, depth, checks }
}

fn concat_at_infinity_many(parts: &[Word]) -> Word {
    Word::reduce(parts.iter().flat_map(|w| w.0.iter().copied()))
}

/// Outcome of the crossing search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Crossing {
    /// The lift of the loop from the cusp `lift` to the cusp `lift loop`
    /// separates the end of the ray from the base point; `prefix` is the
    /// prefix of the ray next to that lift.
    Crosses {
        prefix: Word,
        lift: Word,
    },
    NoCrossingFound,
}

/// Looks for a lift of `lp` that links with the ray. For each prefix `u` of
/// the ray of length `1..=search_depth`, the lifts tried are those passing
/// through `u`, starting at `u s` for each suffix `s` of the reversed loop.
/// A lift from `v` to `v lp` links with the ray when the ray ends strictly
/// between `v` and `v lp` and neither is the base cusp. No witness proves
/// nothing.
pub fn crosses_loop(ray: &RayLimit, lp: &Word, search_depth: usize) -> Result<Crossing, RayError> {
    if lp.is_empty() || !lp.is_cyclically_reduced() {
        return Err(RayError::Domain(format!("loop {lp} must be nonempty and cyclically reduced")));
    }
    let horizon = search_depth + 2 * lp.len() + 2;
    let pre = ray.prefix(horizon + 1);
    let back = lp.reverse();
    for m in 1..=search_depth.min(pre.len()) {
        let u = pre.prefix(m);
        for s in 0..=back.len() {
            let v = concat_at_infinity(&u, &Word(back.0[back.len() - s..].to_vec())).0;
            let vl = concat_at_infinity(&v, lp).0;
            if v.is_empty() || vl.is_empty() {
                continue;
            }
            let cv = compare_sequences(&v.0, true, &pre.0, false, horizon);
            let cl = compare_sequences(&vl.0, true, &pre.0, false, horizon);
            if matches!((cv, cl), (Cmp::Less, Cmp::Greater) | (Cmp::Greater, Cmp::Less)) {
                return Ok(Crossing::Crosses { prefix: u, lift: v });
            }
        }
    }
    Ok(Crossing::NoCrossingFound)
}

/// True when no two lifts of `lp` starting at cusps of length at most
/// `depth` interleave on the circle. A simple loop passes at every depth.
pub fn lifts_unlinked(lp: &Word, depth: usize) -> bool {
    let gens = lp.0.iter().map(|l| l.gen + 1).max().unwrap_or(1) + 1;
    let mut cusps = vec![Word::empty()];
    for k in 1..=depth {
        cusps.extend(all_words(gens, k));
    }
    let chords: Vec<(Word, Word)> = cusps.iter().map(|v| (v.clone(), concat_at_infinity(v, lp).0)).collect();
    let lt = |a: &Word, b: &Word| compare_words(a, b) == Cmp::Less;
    chords.iter().all(|(a, b)| {
        let (a, b) = if lt(a, b) { (a, b) } else { (b, a) };
        chords.iter().all(|(c, d)| {
            let inside = |x: &Word| lt(a, x) && lt(x, b);
            let outside = |x: &Word| lt(x, a) || lt(b, x);
            !(inside(c) && outside(d) || inside(d) && outside(c))
        })
    })
}

fn all_words(gens: u32, len: usize) -> Vec<Word> {
    let letters: Vec<Letter> = (0..gens).flat_map(|k| [Letter::g(k), Letter::g(k).inverse()]).collect();
    let mut layer = vec![Word::empty()];
    for _ in 0..len {
        let mut next = Vec::new();
        for u in &layer {
            for &l in &letters {
                if u.0.last() != Some(&l.inverse()) {
                    let mut v = u.0.clone();
                    v.push(l);
                    next.push(Word(v));
                }
            }
        }
        layer = next;
    }
    layer
}

/// Cyclically reduced nonempty words of length at most `max_len` over the
/// generators `g0 .. g(gens-1)`.
pub fn loop_words(gens: u32, max_len: usize) -> Vec<Word> {
    (1..=max_len).flat_map(|k| all_words(gens, k)).filter(|w| w.is_cyclically_reduced()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("r1 l1 R1").to_string(), "g0' g1 g0");
        assert_eq!(w("g0' g1 g0").display_rl(), "r1 l1 R1");
        assert_eq!(w("L2 r3").display_rl(), "L2 r3");
        assert!(Word::parse("g0 g0'").is_err());
        assert!(Word::parse("x1").is_err());
    }

    #[test]
    fn concatenation_examples() {
        assert_eq!(concat_at_infinity(&w("g0"), &w("g1")), (w("g0 g1"), false));
        assert_eq!(concat_at_infinity(&w("g0"), &w("g0'")), (Word::empty(), true));
    }

    #[test]
    fn loops_sit_in_the_stated_order() {
        for m in 1..=6 {
            assert!(strictly_increasing(&order_of_loops(m)), "m = {m}");
        }
        assert_eq!(r_loop(1).letters()[0].gen, 0);
        assert_eq!(l_loop(1).letters()[0].gen, 1);
        assert_eq!(r_loop(2).letters()[0].gen, 2);
    }

    #[test]
    fn divergence_after_a_common_letter() {
        // After g0 the cycle is cut at g0', so g2 (key 2) comes before g1 (key -1).
        assert_eq!(compare_words(&w("g0 g2"), &w("g0 g1")), Cmp::Less);
        let a = RayLike::Loop(w("g0 g1"));
        let b = RayLike::Loop(w("g0 g2"));
        assert_eq!(order_compare(&a, &b, 4), Cmp::Greater);
        assert_eq!(order_compare(&a, &a, 4), Cmp::Equal);
        assert_eq!(order_compare(&a, &b, 1), Cmp::Greater);
        let r = RayLike::Ray(RayLimit::power(&w("g0 g1")));
        let s = RayLike::Ray(RayLimit::power(&w("g0 g1 g0 g2")));
        assert_eq!(order_compare(&r, &s, 2), Cmp::UnknownAtDepth);
        assert_eq!(order_compare(&r, &s, 4), Cmp::Greater);
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(substitution_f(&w("r2")), w("r3"));
        assert_eq!(substitution_f(&w("L3")), w("L4"));
        assert_eq!(substitution_f(&alpha_seq(1)), alpha_seq(3));
        assert_eq!(alpha_seq(3), w("r1 l1 R1 r2 r1 L1 R1"));
        assert_eq!(substitution_f(&w("R1")), w("r1 l1 R1 R2 r1 L1 R1"));
    }

    #[test]
    fn alpha_lengths_and_prefixes() {
        assert_eq!(alpha_seq(2), w("r1 l1 R1"));
        for k in 1..12 {
            assert_eq!(alpha_seq(k + 1).len(), 2 * alpha_seq(k).len() + 1);
            assert!(alpha_seq(k).is_prefix_of(&alpha_seq(k + 1)));
        }
    }

    #[test]
    fn fixed_word_starts_as_displayed() {
        let shown = w("r1 l1 R1 r2 r1 L1 R1 l2 r1 l1 R1 R2 r1 L1 R1 r3");
        assert!(shown.is_prefix_of(&fixed_word_prefix(64)));
    }

    #[test]
    fn family_small_cases() {
        let (p, q) = default_sequences(1, 8);
        let f = gamma_family(1, &p, &q, 8).unwrap();
        for j in 1..=8 {
            assert_eq!(f.gamma(1, j), &alpha_seq(j as u32));
        }
        let f = gamma_family(2, &[2, 4], &[1, 3], 1).unwrap();
        assert_eq!(f.gamma(1, 1), &r_loop(1));
        assert_eq!(f.gamma(2, 1), &concat_strict(&[&r_loop(2), &r_loop(1)]).unwrap());
        assert!(gamma_family(2, &[1, 2], &[1, 3], 2).is_err());
    }

    #[test]
    fn family_prefix_chains() {
        for n in 1..=3 {
            let (p, q) = default_sequences(n, 6);
            let f = gamma_family(n, &p, &q, 9).unwrap();
            for i in 1..=n {
                for j in 1..=8 {
                    assert!(f.gamma(i, j).is_prefix_of(f.gamma(i, j + 1)), "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn first_monotonicity_cases() {
        let f = gamma_family(1, &[1, 2, 3], &[1, 2, 3], 5).unwrap();
        let rep = monotonicity_check(&f, 1, 1 << 10);
        let first = rep.checks.iter().find(|c| c.id == "monotone.odd.i1.4").unwrap();
        assert_eq!(first.status, Status::Verified);
        assert_eq!(rep.count(Status::Refuted), 0);
        let c = order_compare(&RayLike::Loop(f.gamma(1, 1).clone()), &RayLike::Loop(f.gamma(1, 2).clone()), 1 << 10);
        assert_eq!(c, Cmp::Less);
    }

    #[test]
    fn gamma_crosses_r1_but_not_its_own_axis() {
        let g = RayLimit::gamma();
        assert!(matches!(crosses_loop(&g, &r_loop(1), 6).unwrap(), Crossing::Crosses { .. }));
        for lp in loop_words(4, 2).into_iter().filter(|l| lifts_unlinked(l, 2)) {
            assert_eq!(crosses_loop(&RayLimit::power(&lp), &lp, 32).unwrap(), Crossing::NoCrossingFound, "{lp}");
        }
        assert!(crosses_loop(&g, &w("g0 g1 g0'"), 4).is_err());
    }

    #[test]
    fn crossing_matches_a_brute_force_chord_search() {
        // Oracle: every chord between cusps of length at most 4 is tested
        // against a long prefix of the ray.
        let e = fixed_word_prefix(64);
        let words: Vec<Word> = std::iter::once(Word::empty()).chain(loop_words(3, 4)).chain((1..=4).map(|m| e.prefix(m))).collect();
        for lp in loop_words(3, 1) {
            let mut brute = false;
            for v in &words {
                let vl = Word::reduce(v.0.iter().chain(lp.0.iter()).copied());
                if v.is_empty() || vl.is_empty() || v.len() > 4 {
                    continue;
                }
                let cv = compare_sequences(&v.0, true, &e.0, false, 60);
                let cl = compare_sequences(&vl.0, true, &e.0, false, 60);
                brute |= matches!((cv, cl), (Cmp::Less, Cmp::Greater) | (Cmp::Greater, Cmp::Less));
            }
            let found = matches!(crosses_loop(&RayLimit::gamma(), &lp, 6).unwrap(), Crossing::Crosses { .. });
            assert!(!brute || found, "{lp}");
        }
        assert_eq!(loop_words(2, 2).len(), 16);
    }

    #[test]
    fn simple_loops_among_short_words() {
        assert!(lifts_unlinked(&w("g2"), 3));
        assert!(lifts_unlinked(&w("g1 g0"), 3));
        assert!(!lifts_unlinked(&w("g0 g1"), 3));
        assert!(!lifts_unlinked(&w("g1 g1"), 3));
    }

    #[test]
    fn cut_ray_comparisons() {
        let c = CutRay { lower: vec![w("g3 g1")], upper: vec![w("g3 g2")] };
        let cut = RayLike::Cut(c.clone());
        assert_eq!(order_compare(&RayLike::Loop(r_loop(2)), &cut, 8), Cmp::Greater);
        assert_eq!(order_compare(&RayLike::Loop(l_loop(3)), &cut, 8), Cmp::Less);
        assert_eq!(order_compare(&cut, &cut, 8), Cmp::Equal);
        let (l, r) = tau_witnesses(5);
        let mut ends = l.clone();
        ends.reverse();
        assert!(strictly_increasing(&ends));
        assert!(strictly_increasing(&r));
        assert_eq!(compare_words(&l[0], &r[0]), Cmp::Less);
    }

    fn arb_word(gens: u32, max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec((0..gens, any::<bool>()), 0..=max).prop_map(|v| Word::reduce(v.into_iter().map(|(gen, inv)| Letter { gen, inv })))
    }

    proptest! {
        #[test]
        fn reversal_is_an_anti_homomorphism(u in arb_word(4, 8), v in arb_word(4, 8)) {
            let lhs = concat_at_infinity(&u, &v).0.reverse();
            let rhs = concat_at_infinity(&v.reverse(), &u.reverse()).0;
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(u.reverse().reverse(), u);
        }

        #[test]
        fn substitution_commutes_with_reversal(u in arb_word(6, 6)) {
            prop_assert_eq!(substitution_f(&u.reverse()), substitution_f(&u).reverse());
        }
    }

    #[test]
    fn order_is_total_on_short_words() {
        let gens = [Letter::g(0), Letter::g(1), Letter::g(2)];
        let mut all = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        for _ in 0..5 {
            let mut next = Vec::new();
            for u in &frontier {
                for g in gens {
                    for l in [g, g.inverse()] {
                        if u.letters().last() != Some(&l.inverse()) {
                            let mut v = u.letters().to_vec();
                            v.push(l);
                            next.push(Word(v));
                        }
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        all.sort_by(|a, b| match compare_words(a, b) {
            Cmp::Less => Ordering::Less,
            Cmp::Greater => Ordering::Greater,
            _ => Ordering::Equal,
        });
        for (i, a) in all.iter().enumerate() {
            assert_eq!(compare_words(a, a), Cmp::Equal);
            if let Some(b) = all.get(i + 1) {
                assert_eq!(compare_words(a, b), Cmp::Less);
                assert_eq!(compare_words(b, a), Cmp::Greater);
            }
        }
        // Transitivity on a sample of triples.
        for a in all.iter().step_by(37) {
            for b in all.iter().step_by(41) {
                for c in all.iter().step_by(43) {
                    if compare_words(a, b) == Cmp::Less && compare_words(b, c) == Cmp::Less {
                        assert_eq!(compare_words(a, c), Cmp::Less);
                    }
                }
            }
        }
    }
}
