//! The square foliation F, the flat sphere Σ, the square map φ and the
//! interval exchange on the vertical transversal through x = 1/2.
//!
//! Points are exact pairs of rationals in the closed unit square. Side
//! identifications are rotations by π about a centre on one side; in the
//! coordinate running along that side they are reflections `t -> 2c - t`.
//! Leaves of F are followed one horizontal crossing at a time.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{format_rational, int, is_dyadic, rat, serde_rational, Rational};
use crate::par;

/// Errors raised by the flat-surface operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlatError {
    #[error("truncation level {0} is too small (need at least {1})")]
    Level(usize, usize),
    #[error("unknown marked point {0}")]
    UnknownPoint(String),
    #[error("{0} is a breakpoint of the interval exchange")]
    SingularPoint(String),
    #[error("{0} lies beyond the truncation")]
    Truncated(String),
    #[error("orbit leaves the truncation after {partial:?}")]
    OrbitTruncated { partial: Vec<String> },
    #[error("image of {0} is not a marked point")]
    NotMarked(String),
    #[error("point ({0}) is outside the square")]
    Outside(String),
    #[error("leaf-flow oracle disagrees with the interval exchange on piece {0}")]
    Orientation(i64),
}

/// A point of the closed unit square.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "serde_rational")]
    pub x: Rational,
    #[serde(with = "serde_rational")]
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", format_rational(&self.x), format_rational(&self.y))
    }
}

/// `y_n` for `n >= -2`: `y_-2 = 1`, `y_-1 = 0`, `y_n = (y_{n-1} + y_{n-2}) / 2`.
pub fn y_seq(n: i64) -> Rational {
    assert!(n >= -2, "y is indexed from -2");
    let (mut a, mut b) = (Rational::one(), Rational::zero());
    if n == -2 {
        return a;
    }
    for _ in -1..n {
        let c = (&a + &b) / int(2);
        a = b;
        b = c;
    }
    b
}

/// `x_0 = 1/2`, `x_n = (y_{n-1} + y_{n-3}) / 2` for `n >= 1`.
pub fn x_seq(n: i64) -> Rational {
    assert!(n >= 0, "x is indexed from 0");
    if n == 0 {
        rat(1, 2)
    } else {
        (y_seq(n - 1) + y_seq(n - 3)) / int(2)
    }
}

/// Which of the two square quotients a system describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    /// Vertical sides identified, horizontal sides left as boundary leaves.
    F,
    /// All four sides identified.
    Sigma,
}

/// A side of the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

/// A rotation by π about a point of one side, exchanging `[lo, centre]`
/// with `[centre, hi]` in the coordinate running along the side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideIdentification {
    pub side: Side,
    pub centre_name: String,
    #[serde(with = "serde_rational")]
    pub centre: Rational,
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

impl SideIdentification {
    fn contains(&self, t: &Rational) -> bool {
        &self.lo <= t && t <= &self.hi
    }

    /// The partner of the side coordinate `t`.
    pub fn apply(&self, t: &Rational) -> Rational {
        int(2) * &self.centre - t
    }
}

/// A named marked point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub name: String,
    pub point: Point,
}

/// The unit square with its identifications and marked points up to level `N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquareSystem {
    pub surface: Surface,
    pub level: usize,
    pub identifications: Vec<SideIdentification>,
    pub marked: Vec<MarkedPoint>,
    /// `y_n` for `n = -2..=level + 2`, stored from index 0.
    #[serde(skip)]
    ys: Vec<Rational>,
    /// `x_n` for `n = 0..=level`.
    #[serde(skip)]
    xs: Vec<Rational>,
}

fn side_coord(side: Side, p: &Point) -> &Rational {
    match side {
        Side::Left | Side::Right => &p.y,
        Side::Top | Side::Bottom => &p.x,
    }
}

fn on_side(side: Side, t: Rational) -> Point {
    match side {
        Side::Left => Point::new(Rational::zero(), t),
        Side::Right => Point::new(Rational::one(), t),
        Side::Top => Point::new(t, Rational::one()),
        Side::Bottom => Point::new(t, Rational::zero()),
    }
}

fn sides_of(p: &Point) -> Vec<Side> {
    let mut v = vec![];
    if p.x.is_zero() {
        v.push(Side::Left);
    }
    if p.x.is_one() {
        v.push(Side::Right);
    }
    if p.y.is_one() {
        v.push(Side::Top);
    }
    if p.y.is_zero() {
        v.push(Side::Bottom);
    }
    v
}

fn in_square(p: &Point) -> bool {
    !(p.x < Rational::zero() || p.x > Rational::one() || p.y < Rational::zero() || p.y > Rational::one())
}

impl SquareSystem {
    fn new(surface: Surface, level: usize) -> Result<Self, FlatError> {
        if level < 3 {
            return Err(FlatError::Level(level, 3));
        }
        let n_max = level as i64;
        let ys: Vec<Rational> = (-2..=n_max + 2).map(y_seq).collect();
        let xs: Vec<Rational> = (0..=n_max).map(x_seq).collect();
        let mut sys = SquareSystem { surface, level, identifications: vec![], marked: vec![], ys, xs };
        let one = Rational::one();
        let half = rat(1, 2);
        sys.identifications.push(SideIdentification {
            side: Side::Right,
            centre_name: "p0".into(),
            centre: half.clone(),
            lo: Rational::zero(),
            hi: one.clone(),
        });
        for n in 1..=n_max {
            let (a, b) = (sys.y(n - 1), sys.y(n - 3));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            sys.identifications.push(SideIdentification { side: Side::Left, centre_name: format!("p{n}"), centre: sys.x(n), lo, hi });
        }
        sys.marked.push(MarkedPoint { name: "p0".into(), point: Point::new(one.clone(), half.clone()) });
        for n in 1..=n_max {
            sys.marked.push(MarkedPoint { name: format!("p{n}"), point: Point::new(Rational::zero(), sys.x(n)) });
        }
        for n in -2..=n_max {
            sys.marked.push(MarkedPoint { name: format!("q{n}"), point: Point::new(Rational::zero(), sys.y(n)) });
        }
        sys.marked.push(MarkedPoint { name: "r".into(), point: Point::new(Rational::zero(), rat(1, 3)) });
        if surface == Surface::Sigma {
            sys.identifications.push(SideIdentification {
                side: Side::Bottom,
                centre_name: "a0".into(),
                centre: half.clone(),
                lo: Rational::zero(),
                hi: one.clone(),
            });
            for n in 1..=n_max {
                let (a, b) = (&one - sys.y(n - 1), &one - sys.y(n - 3));
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                sys.identifications.push(SideIdentification { side: Side::Top, centre_name: format!("a{n}"), centre: &one - sys.x(n), lo, hi });
            }
            sys.marked.push(MarkedPoint { name: "a0".into(), point: Point::new(half, Rational::zero()) });
            for n in 1..=n_max {
                sys.marked.push(MarkedPoint { name: format!("a{n}"), point: Point::new(&one - sys.x(n), one.clone()) });
            }
            for n in -2..=n_max {
                sys.marked.push(MarkedPoint { name: format!("b{n}"), point: Point::new(&one - sys.y(n), one.clone()) });
            }
        }
        Ok(sys)
    }

    /// `y_n`, precomputed for `-2 <= n <= level + 2`.
    pub fn y(&self, n: i64) -> Rational {
        self.ys[(n + 2) as usize].clone()
    }

    /// `x_n`, precomputed for `0 <= n <= level`.
    pub fn x(&self, n: i64) -> Rational {
        self.xs[n as usize].clone()
    }

    fn y_ref(&self, n: i64) -> &Rational {
        &self.ys[(n + 2) as usize]
    }

    /// Looks up a marked point by name.
    pub fn marked_point(&self, name: &str) -> Result<&Point, FlatError> {
        self.marked.iter().find(|m| m.name == name).map(|m| &m.point).ok_or_else(|| FlatError::UnknownPoint(name.into()))
    }

    /// The first marked point (in list order) sitting exactly at `p`.
    pub fn name_of(&self, p: &Point) -> Option<&str> {
        self.marked.iter().find(|m| &m.point == p).map(|m| m.name.as_str())
    }

    /// The identification acting on the side coordinate `t` of `side`, if
    /// `t` lies in its domain. Interior points of a segment have exactly one.
    pub fn identification_at(&self, side: Side, t: &Rational) -> Option<&SideIdentification> {
        self.identifications.iter().find(|s| s.side == side && s.contains(t))
    }

    /// The partner of a boundary point under the side identifications, or
    /// `None` for interior points, points on unidentified sides, and points
    /// inside the untruncated gap around `r`.
    pub fn partner(&self, p: &Point) -> Option<Point> {
        sides_of(p).into_iter().find_map(|side| {
            let t = side_coord(side, p);
            self.identification_at(side, t).map(|s| on_side(side, s.apply(t)))
        })
    }

    /// True when `p` and `q` are the same point after one identification.
    pub fn equivalent(&self, p: &Point, q: &Point) -> bool {
        p == q || self.partner(p).as_ref() == Some(q)
    }

    /// The left-side segment pair containing `t` strictly inside, searched
    /// out to the truncation level. Returns `None` in the gap around 1/3.
    fn left_centre(&self, t: &Rational) -> Option<Rational> {
        let third = rat(1, 3);
        let start = if *t > third { 1 } else { 2 };
        let mut n = start;
        while n <= self.level as i64 {
            // The pair at p_n spans y_{n-1} .. y_{n-3}; outer ends move towards 1/3.
            let inner = self.y_ref(n - 1);
            let inside = if *t > third { t >= inner } else { t <= inner };
            if inside {
                return Some(self.x(n));
            }
            n += 2;
        }
        None
    }
}

/// Builds the square foliation F with marked points up to index `n`.
pub fn build_f(n: usize) -> Result<SquareSystem, FlatError> {
    SquareSystem::new(Surface::F, n)
}

/// Builds the flat surface Σ with marked points up to index `n`.
pub fn build_sigma(n: usize) -> Result<SquareSystem, FlatError> {
    SquareSystem::new(Surface::Sigma, n)
}

/// One column of the square map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    A,
    B,
    C,
    D,
}

impl Column {
    const ALL: [Column; 4] = [Column::A, Column::B, Column::C, Column::D];

    fn index(self) -> i64 {
        self as i64
    }

    /// Image of a point of this column: stretch by 4 horizontally, squash by
    /// 4 vertically, rotate B and D by π, then stack D, A, B, C bottom to top.
    pub fn map(self, p: &Point) -> Point {
        let four = int(4);
        let q = rat(1, 4);
        let one = Rational::one();
        match self {
            Column::A => Point::new(&four * &p.x, &q + &p.y * &q),
            Column::B => Point::new(int(2) - &four * &p.x, rat(1, 2) + (&one - &p.y) * &q),
            Column::C => Point::new(&four * &p.x - int(2), rat(3, 4) + &p.y * &q),
            Column::D => Point::new(&four - &four * &p.x, (&one - &p.y) * &q),
        }
    }
}

/// The columns whose closed strip contains `p`, rightmost first.
pub fn columns_of(p: &Point) -> Vec<Column> {
    let k = &p.x * int(4);
    let mut v: Vec<Column> = Column::ALL.into_iter().filter(|c| k >= int(c.index()) && k <= int(c.index() + 1)).collect();
    v.reverse();
    v
}

/// Every image of `p` under φ, one per column containing it, rightmost first.
/// Points on a cut between two columns have two images which agree on Σ.
pub fn phi_candidates(p: &Point) -> Result<Vec<Point>, FlatError> {
    if !in_square(p) {
        return Err(FlatError::Outside(p.to_string()));
    }
    Ok(columns_of(p).into_iter().map(|c| c.map(p)).collect())
}

/// φ with the column tie broken to the right.
pub fn apply_phi(p: &Point) -> Result<Point, FlatError> {
    Ok(phi_candidates(p)?.remove(0))
}

/// Follows a marked point for `steps` applications of φ. On a cut the
/// rightmost image that is itself a marked point is taken.
pub fn singular_orbit(sys: &SquareSystem, start: &str, steps: usize) -> Result<Vec<String>, FlatError> {
    let mut p = sys.marked_point(start)?.clone();
    let mut out = vec![];
    for _ in 0..steps {
        let cands = phi_candidates(&p)?;
        let hit = cands.iter().find_map(|c| sys.name_of(c).map(|n| (n.to_string(), c.clone())));
        match hit {
            Some((name, q)) => {
                out.push(name);
                p = q;
            }
            None => {
                // The image is a marked point of higher index than the system holds.
                let deeper = build_sigma(sys.level + 8)?;
                if cands.iter().any(|c| deeper.name_of(c).is_some()) {
                    return Err(FlatError::OrbitTruncated { partial: out });
                }
                return Err(FlatError::NotMarked(p.to_string()));
            }
        }
    }
    Ok(out)
}

/// Heights `j / 2^(i+1)` for odd `j`, the horizontal segments of the saddle
/// connection from the image of `p_i` to the image of `r` in F.
pub fn dyadic_leaf_heights(i: u32) -> BTreeSet<Rational> {
    let d = 1i64 << (i + 1);
    (1..d).step_by(2).map(|j| rat(j, d)).collect()
}

/// Horizontal direction of travel along a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dir {
    Right,
    Left,
}

/// How a leaf trace in F ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlatTerminal {
    /// Reached a 1-pronged point `p_n`.
    OnePronged(String),
    /// Reached the image of `r`; the name records the representative hit.
    Infinite(String),
    /// Reached a corner of the square, which lies on the boundary leaves.
    Corner,
    /// Reached the left side inside the gap the truncation leaves around 1/3.
    Frontier,
    StepBudgetExhausted,
}

/// One full or partial horizontal crossing of the square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(with = "serde_rational")]
    pub height: Rational,
    pub dir: Dir,
}

/// A traced leaf of F.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatLeaf {
    pub segments: Vec<Segment>,
    pub terminal: FlatTerminal,
}

impl FlatLeaf {
    /// The set of heights visited.
    pub fn heights(&self) -> BTreeSet<Rational> {
        self.segments.iter().map(|s| s.height.clone()).collect()
    }
}

/// Steps a leaf of F from side to side.
struct Walker<'a> {
    sys: &'a SquareSystem,
    height: Rational,
    dir: Dir,
}

impl<'a> Walker<'a> {
    /// Crosses to the far side and through its identification. Returns the
    /// new segment, or how the leaf ends on that side.
    fn step(&mut self) -> Result<(), FlatTerminal> {
        let h = &self.height;
        if h.is_zero() || h.is_one() {
            return Err(FlatTerminal::Corner);
        }
        match self.dir {
            Dir::Right => {
                if *h == rat(1, 2) {
                    return Err(FlatTerminal::OnePronged("p0".into()));
                }
                self.height = Rational::one() - h;
                self.dir = Dir::Left;
            }
            Dir::Left => {
                if !is_dyadic(h) {
                    let c = self.sys.left_centre(h).ok_or(FlatTerminal::Frontier)?;
                    self.height = int(2) * c - h;
                    self.dir = Dir::Right;
                    return Ok(());
                }
                if let Some(n) = (-2..=self.sys.level as i64).find(|&n| self.sys.y_ref(n) == h) {
                    return Err(FlatTerminal::Infinite(format!("q{n}")));
                }
                if *h == rat(1, 3) {
                    return Err(FlatTerminal::Infinite("r".into()));
                }
                if let Some(n) = (1..=self.sys.level as i64).find(|&n| self.sys.xs[n as usize] == *h) {
                    return Err(FlatTerminal::OnePronged(format!("p{n}")));
                }
                match self.sys.left_centre(h) {
                    Some(c) => {
                        self.height = int(2) * c - h;
                        self.dir = Dir::Right;
                    }
                    None => return Err(FlatTerminal::Frontier),
                }
            }
        }
        Ok(())
    }
}

/// Traces a leaf of F starting at height `height` in direction `dir`.
/// The first segment is the one through the start point; each later
/// segment is a full crossing. At most `max_segments` are recorded.
pub fn trace_leaf(sys: &SquareSystem, height: &Rational, dir: Dir, max_segments: usize) -> FlatLeaf {
    let mut w = Walker { sys, height: height.clone(), dir };
    let mut segments = vec![Segment { height: height.clone(), dir }];
    while segments.len() < max_segments {
        if let Err(t) = w.step() {
            return FlatLeaf { segments, terminal: t };
        }
        segments.push(Segment { height: w.height.clone(), dir: w.dir });
    }
    FlatLeaf { segments, terminal: FlatTerminal::StepBudgetExhausted }
}

/// Traces the separatrix leaving the 1-pronged point `p_i`.
pub fn trace_separatrix(sys: &SquareSystem, i: usize, max_segments: usize) -> FlatLeaf {
    if i == 0 {
        trace_leaf(sys, &rat(1, 2), Dir::Left, max_segments)
    } else {
        trace_leaf(sys, &sys.x(i as i64), Dir::Right, max_segments)
    }
}

/// Height of the `k`-th crossing of the transversal `{1/2} x [0,1]` by the
/// leaf through `(1/2, x)` travelling in direction `dir`.
pub fn return_to_transversal(sys: &SquareSystem, x: &Rational, dir: Dir, k: usize) -> Result<Rational, FlatError> {
    let leaf = trace_leaf(sys, x, dir, k + 1);
    match leaf.segments.get(k) {
        Some(s) => Ok(s.height.clone()),
        None => match leaf.terminal {
            FlatTerminal::Frontier => Err(FlatError::Truncated(format_rational(x))),
            _ => Err(FlatError::SingularPoint(format_rational(x))),
        },
    }
}

/// One piece of the interval exchange: the open interval between `y_n` and
/// `y_{n+2}`, moved onto the interval between `1 - y_n` and `1 - y_{n+2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IetPiece {
    pub n: i64,
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    #[serde(with = "serde_rational")]
    pub image_lo: Rational,
    #[serde(with = "serde_rational")]
    pub image_hi: Rational,
    /// True for a translation, false for a flip.
    pub order_preserving: bool,
}

impl IetPiece {
    fn apply(&self, x: &Rational) -> Rational {
        if self.order_preserving {
            x - &self.lo + &self.image_lo
        } else {
            &self.image_hi - (x - &self.lo)
        }
    }
}

/// The interval exchange on the transversal, truncated at level `N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalExchange {
    pub level: usize,
    pub pieces: Vec<IetPiece>,
}

/// Builds the interval exchange with pieces `n = -2 ..= N - 3`. The
/// orientation of each piece is read off the leaf flow of F: the second
/// return to the transversal travelling left, sampled at four interior
/// points. Pieces disagreeing with both orientations are an error.
pub fn build_iet(n: usize) -> Result<IntervalExchange, FlatError> {
    if n < 4 {
        return Err(FlatError::Level(n, 4));
    }
    let sys = build_f(n)?;
    let one = Rational::one();
    let mut pieces = vec![];
    for k in -2..=(n as i64 - 3) {
        let (a, b) = (sys.y(k), sys.y(k + 2));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (image_lo, image_hi) = (&one - &hi, &one - &lo);
        let mut piece = IetPiece { n: k, lo, hi, image_lo, image_hi, order_preserving: true };
        let samples: Vec<Rational> = (1..=4).map(|j| &piece.lo + (&piece.hi - &piece.lo) * rat(j, 5)).collect();
        let flow: Vec<Rational> = samples.iter().map(|s| return_to_transversal(&sys, s, Dir::Left, 2)).collect::<Result<_, _>>()?;
        let fits = |p: &IetPiece| samples.iter().zip(&flow).all(|(s, f)| &p.apply(s) == f);
        if !fits(&piece) {
            piece.order_preserving = false;
            if !fits(&piece) {
                return Err(FlatError::Orientation(k));
            }
        }
        pieces.push(piece);
    }
    Ok(IntervalExchange { level: n, pieces })
}

impl IntervalExchange {
    /// The image of `x`. Breakpoints, including 1/3, raise an error.
    pub fn apply(&self, x: &Rational) -> Result<Rational, FlatError> {
        if *x == rat(1, 3) || self.pieces.iter().any(|p| &p.lo == x || &p.hi == x) {
            return Err(FlatError::SingularPoint(format_rational(x)));
        }
        self.pieces.iter().find(|p| &p.lo < x && x < &p.hi).map(|p| p.apply(x)).ok_or_else(|| FlatError::Truncated(format_rational(x)))
    }

    /// Sum of source lengths and sum of image lengths.
    pub fn total_lengths(&self) -> (Rational, Rational) {
        let src = self.pieces.iter().fold(Rational::zero(), |acc, p| acc + (&p.hi - &p.lo));
        let img = self.pieces.iter().fold(Rational::zero(), |acc, p| acc + (&p.image_hi - &p.image_lo));
        (src, img)
    }

    /// Applies the exchange to many points; uses the thread pool when enabled.
    pub fn apply_all(&self, xs: &[Rational]) -> Vec<Result<Rational, FlatError>> {
        par::map(xs, |x| self.apply(x))
    }
}

/// Visits of a leaf to the transversal, binned uniformly by height.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    #[serde(with = "serde_rational")]
    pub start: Rational,
    pub returns: usize,
    pub counts: Vec<u64>,
    /// Set when the leaf ended before `returns` visits.
    pub terminal: Option<FlatTerminal>,
}

fn bin_of(h: &Rational, bins: usize) -> usize {
    let k: BigInt = (h.numer() * BigInt::from(bins)) / h.denom();
    k.to_usize().unwrap_or(0).min(bins - 1)
}

/// Counts the first `returns` crossings of the transversal by the leaf
/// through `(1/2, x)` travelling right, in `bins` equal bins.
pub fn hitting_histogram(sys: &SquareSystem, x: &Rational, returns: usize, bins: usize) -> Histogram {
    let bins = bins.max(1);
    let mut counts = vec![0u64; bins];
    let mut w = Walker { sys, height: x.clone(), dir: Dir::Right };
    for _ in 0..returns {
        if let Err(t) = w.step() {
            return Histogram { start: x.clone(), returns, counts, terminal: Some(t) };
        }
        counts[bin_of(&w.height, bins)] += 1;
    }
    Histogram { start: x.clone(), returns, counts, terminal: None }
}

/// Histograms for several seeds; uses the thread pool when enabled.
pub fn hitting_histograms(sys: &SquareSystem, seeds: &[Rational], returns: usize, bins: usize) -> Vec<Histogram> {
    par::map(seeds, |x| hitting_histogram(sys, x, returns, bins))
}

/// Second returns travelling left for many heights; uses the thread pool when enabled.
pub fn second_returns(sys: &SquareSystem, xs: &[Rational]) -> Vec<Result<Rational, FlatError>> {
    par::map(xs, |x| return_to_transversal(sys, x, Dir::Left, 2))
}

/// SVG drawing of the square with its marked points and identification centres.
pub fn render_svg(sys: &SquareSystem, size: u32) -> String {
    let s = size as f64;
    let pad = 20.0;
    let f = |r: &Rational| r.to_f64().unwrap_or(0.0);
    let px = |p: &Point| (pad + f(&p.x) * s, pad + (1.0 - f(&p.y)) * s);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{w}\">\n<rect x=\"{pad}\" y=\"{pad}\" width=\"{s}\" height=\"{s}\" fill=\"none\" stroke=\"black\"/>\n",
        w = s + 2.0 * pad
    );
    for k in 1..4 {
        let x = pad + s * k as f64 / 4.0;
        out.push_str(&format!("<line x1=\"{x}\" y1=\"{pad}\" x2=\"{x}\" y2=\"{}\" stroke=\"#bbb\" stroke-dasharray=\"4\"/>\n", pad + s));
    }
    for id in &sys.identifications {
        let (a, b) = (on_side(id.side, id.lo.clone()), on_side(id.side, id.hi.clone()));
        let ((x1, y1), (x2, y2)) = (px(&a), px(&b));
        out.push_str(&format!("<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#36c\" stroke-width=\"2\" opacity=\"0.4\"/>\n"));
    }
    for m in &sys.marked {
        let (x, y) = px(&m.point);
        let colour = if m.name.starts_with('p') || m.name.starts_with('a') { "#c33" } else { "#333" };
        out.push_str(&format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"{colour}\"><title>{}</title></circle>\n", m.name));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms_of_the_sequences() {
        assert_eq!(y_seq(0), rat(1, 2));
        assert_eq!(y_seq(1), rat(1, 4));
        assert_eq!(y_seq(2), rat(3, 8));
        assert_eq!(x_seq(1), rat(3, 4));
        assert_eq!(x_seq(2), rat(1, 8));
    }

    #[test]
    fn closed_forms_hold() {
        for n in 1..=16i64 {
            let e = inv(2 * n as u32 + 1);
            assert_eq!(y_seq(2 * n) - y_seq(2 * n - 1), e);
            assert_eq!(y_seq(2 * n - 1) - x_seq(2 * n), e);
            let o = inv(2 * n as u32 + 2);
            assert_eq!(y_seq(2 * n) - y_seq(2 * n + 1), o.clone());
            assert_eq!(x_seq(2 * n + 1) - y_seq(2 * n), o);
        }
        let gap = y_seq(20) - rat(1, 3);
        assert!(gap < rat(1, 100_000) && gap > rat(-1, 100_000));
    }

    fn inv(k: u32) -> Rational {
        crate::numerics::inv_pow2(k)
    }

    #[test]
    fn level_too_small() {
        assert_eq!(build_f(2).unwrap_err(), FlatError::Level(2, 3));
        assert!(build_iet(3).is_err());
    }

    #[test]
    fn identifications_are_involutions() {
        let sys = build_sigma(8).unwrap();
        for id in &sys.identifications {
            for j in 1..10 {
                let t = &id.lo + (&id.hi - &id.lo) * rat(j, 10);
                assert_eq!(id.apply(&id.apply(&t)), t);
                let u = id.apply(&t);
                assert!(id.contains(&u));
            }
        }
    }

    #[test]
    fn phi_of_named_points() {
        let sys = build_sigma(8).unwrap();
        let pt = |n: &str| sys.marked_point(n).unwrap().clone();
        assert_eq!(apply_phi(&pt("p0")).unwrap(), pt("p2"));
        assert_eq!(apply_phi(&pt("q0")).unwrap(), pt("q2"));
        assert_eq!(apply_phi(&pt("a0")).unwrap(), pt("p1"));
        assert!(phi_candidates(&pt("a1")).unwrap().iter().all(|c| *c == pt("p0")));
    }

    use num_traits::Signed;

    #[test]
    fn phi_preserves_area_columnwise() {
        // Each column is a 1/4 x 1 strip going to a 1 x 1/4 strip.
        for c in Column::ALL {
            let k = c.index();
            let lo = Point::new(rat(k, 4), Rational::zero());
            let hi = Point::new(rat(k + 1, 4), Rational::one());
            let (a, b) = (c.map(&lo), c.map(&hi));
            let w = (&b.x - &a.x) * (&b.y - &a.y);
            assert_eq!(w.abs(), rat(1, 4));
        }
    }

    #[test]
    fn short_orbits() {
        let sys = build_sigma(8).unwrap();
        assert_eq!(singular_orbit(&sys, "p0", 3).unwrap(), ["p2", "p4", "p6"]);
        assert_eq!(singular_orbit(&sys, "q-1", 3).unwrap(), ["q1", "q3", "q5"]);
        assert_eq!(singular_orbit(&sys, "b0", 2).unwrap(), ["q-2", "q0"]);
        assert!(matches!(singular_orbit(&sys, "p0", 5), Err(FlatError::OrbitTruncated { .. })));
        assert!(matches!(singular_orbit(&sys, "z9", 1), Err(FlatError::UnknownPoint(_))));
    }

    #[test]
    fn first_dyadic_heights() {
        assert_eq!(dyadic_leaf_heights(0), [rat(1, 2)].into_iter().collect());
        assert_eq!(dyadic_leaf_heights(1), [rat(1, 4), rat(3, 4)].into_iter().collect());
        let sys = build_f(8).unwrap();
        let leaf = trace_separatrix(&sys, 2, 100);
        assert_eq!(leaf.heights(), dyadic_leaf_heights(2));
        assert!(matches!(leaf.terminal, FlatTerminal::Infinite(_)));
    }

    #[test]
    fn reversing_a_leaf_retraces_it() {
        let sys = build_f(12).unwrap();
        let leaf = trace_leaf(&sys, &rat(2, 7), Dir::Right, 20);
        let last = leaf.segments.last().unwrap();
        let back_dir = if last.dir == Dir::Right { Dir::Left } else { Dir::Right };
        let back = trace_leaf(&sys, &last.height, back_dir, 20);
        let fwd: Vec<_> = leaf.segments.iter().map(|s| s.height.clone()).collect();
        let mut rev: Vec<_> = back.segments.iter().map(|s| s.height.clone()).collect();
        rev.reverse();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn iet_example_piece() {
        let f = build_iet(8).unwrap();
        let p = f.pieces.iter().find(|p| p.n == 2).unwrap();
        assert_eq!((p.lo.clone(), p.hi.clone()), (rat(11, 32), rat(3, 8)));
        assert_eq!((p.image_lo.clone(), p.image_hi.clone()), (rat(5, 8), rat(21, 32)));
        assert!(p.order_preserving);
        assert_eq!(f.apply(&rat(1, 3)), Err(FlatError::SingularPoint("1/3".into())));
        assert!(f.apply(&rat(3, 8)).is_err());
        let (s, i) = f.total_lengths();
        assert_eq!(s, i);
    }

    #[test]
    fn rightward_second_return_inverts_the_exchange() {
        let sys = build_f(16).unwrap();
        let f = build_iet(16).unwrap();
        for j in [1i64, 2, 4, 5, 7, 8, 10] {
            let x = rat(j, 11);
            let fx = f.apply(&x).unwrap();
            assert_eq!(return_to_transversal(&sys, &fx, Dir::Right, 2).unwrap(), x);
        }
    }

    #[test]
    fn histogram_total_mass() {
        let sys = build_f(40).unwrap();
        let h = hitting_histogram(&sys, &rat(1, 7), 500, 1);
        assert_eq!(h.counts, vec![500]);
        assert!(h.terminal.is_none());
    }

    #[test]
    fn dyadic_seed_hits_a_prong() {
        let sys = build_f(40).unwrap();
        let h = hitting_histogram(&sys, &rat(173, 1024), 100_000, 8);
        assert!(h.terminal.is_some());
    }
}
