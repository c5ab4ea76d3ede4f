//! The carrying map from T to T*, the induced weights and path translation.
//!
//! Each branch of T is carried by a finite train path of T*. The listings
//! below are written the way they are usually displayed, which reads T*
//! against the orientation of the T branch: the oriented image of `b` run
//! from tail to head is the listing read right to left.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::numerics::{format_rational, int, sum_geometric_tail, GeometricTail, Rational};
use crate::rectcomplex::{Leaf, LeafLimit, RectComplex};
use crate::traintrack::{build_t, build_t_star_with, StarOrders, Step, TrackError, TrainPath, TrainTrack, WeightSystem};

/// Errors raised by the carrying map.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CarryError {
    #[error("unknown branch {0}")]
    UnknownBranch(String),
    #[error("branch {0} lies beyond the truncation")]
    BeyondTruncation(String),
    #[error("cannot close form for {0}: tail is not geometric at the requested depth")]
    NotGeometric(String),
    #[error("not a train path: {0}")]
    NotTrainPath(String),
    #[error(transparent)]
    Track(#[from] TrackError),
}

fn fs(i: i64) -> String {
    format!("f{i}*")
}

/// A branch name of T split into family letter and index.
fn parse_t_branch(name: &str) -> Result<(char, i64), CarryError> {
    let mut chars = name.chars();
    let fam = chars.next().ok_or_else(|| CarryError::UnknownBranch(name.into()))?;
    let idx: i64 = chars.as_str().parse().map_err(|_| CarryError::UnknownBranch(name.into()))?;
    let ok = match fam {
        'e' => idx == 1 || idx == 2,
        'b' => idx >= -1,
        'c' => idx >= 1,
        'd' => idx >= 0,
        _ => false,
    };
    if ok {
        Ok((fam, idx))
    } else {
        Err(CarryError::UnknownBranch(name.into()))
    }
}

/// The displayed image of a branch of T, as T* branch names.
pub fn zeta_listing(name: &str) -> Result<Vec<String>, CarryError> {
    let (fam, n) = parse_t_branch(name)?;
    let star = |s: &str| format!("{s}*");
    Ok(match (fam, n) {
        ('e', _) | ('d', _) => vec![star(name)],
        ('b', -1) | ('b', 0) => vec![star(name)],
        ('b', 1) => vec!["b1*".into(), fs(0)],
        ('b', n) if n % 2 == 0 => {
            let mut v = vec![fs(n - 1), format!("h{}*", n - 1)];
            v.extend((-n + 1..=n - 1).rev().map(fs));
            v
        }
        ('b', n) => {
            let mut v = vec![format!("h{}*", n - 1)];
            v.extend((-n + 2..=n - 1).map(fs));
            v
        }
        ('c', 1) => vec!["c1*".into()],
        ('c', n) if n % 2 == 0 => vec![star(name)],
        ('c', n) => vec![fs(-n + 1), star(name)],
        _ => unreachable!(),
    })
}

/// Names of the branches of T at one level.
fn t_branches_at(level: i64) -> Vec<String> {
    match level {
        0 => ["e1", "e2", "b-1", "b0", "d0"].iter().map(|s| s.to_string()).collect(),
        n => vec![format!("b{n}"), format!("c{n}"), format!("d{n}")],
    }
}

fn t_weight(name: &str) -> Rational {
    let (fam, n) = parse_t_branch(name).expect("known branch");
    match (fam, n) {
        ('e', 1) => Rational::new(1.into(), 3.into()),
        ('e', _) => Rational::new(2.into(), 3.into()),
        ('b', -1) | ('b', 0) => Rational::one(),
        ('d', n) => crate::numerics::inv_pow2(n as u32 + 1),
        (_, n) => crate::numerics::inv_pow2(n as u32),
    }
}

/// Number of times `star` occurs in the image of the level-`n` branches,
/// weighted by their weights.
fn level_term(star: &str, n: i64) -> Rational {
    t_branches_at(n)
        .iter()
        .map(|b| {
            let k = zeta_listing(b).unwrap().iter().filter(|x| x.as_str() == star).count();
            int(k as i64) * t_weight(b)
        })
        .sum()
}

/// The smallest level of T whose image can contain `star`.
fn first_level(star: &str) -> i64 {
    let core = star.trim_end_matches('*');
    let idx: i64 = core[1..].parse().unwrap_or(0);
    idx.abs().saturating_sub(1)
}

/// The induced weight `w*(star) = sum over b of (occurrences in image) * w(b)`.
///
/// Terms are grouped by level. Once three consecutive term ratios agree the
/// tail is summed in closed form; otherwise the sum is reported as open.
pub fn induced_weight(star: &str) -> Result<Rational, CarryError> {
    let start = first_level(star);
    let horizon = start + 8;
    let terms: Vec<Rational> = (0..=horizon).map(|n| level_term(star, n)).collect();
    let head: Rational = terms.iter().cloned().sum();
    let last = &terms[terms.len() - 4..];
    if last.iter().all(|t| t.is_zero()) {
        return Ok(head);
    }
    if last.iter().any(|t| t.is_zero()) {
        return Err(CarryError::NotGeometric(star.into()));
    }
    let r = &last[1] / &last[0];
    if &last[2] / &last[1] != r || &last[3] / &last[2] != r {
        return Err(CarryError::NotGeometric(star.into()));
    }
    let tail = GeometricTail::new(&last[3] * &r, r);
    let rest = sum_geometric_tail(&tail).map_err(|_| CarryError::NotGeometric(star.into()))?;
    Ok(head + rest)
}

/// Induced weights for every branch of a truncated T*.
pub fn induced_weights(track: &TrainTrack) -> Result<WeightSystem, CarryError> {
    let weights = track.branches().iter().map(|b| induced_weight(&b.name)).collect::<Result<Vec<_>, _>>()?;
    Ok(WeightSystem { weights })
}

/// The sum, over branches `b` of T whose image contains `star`, of
/// multiplicity times weight, truncated after level `depth`, plus the exact
/// geometric remainder. Returned with the preimage list itself.
pub fn preimage(star: &str, depth: i64) -> Vec<(String, usize)> {
    (0..=depth)
        .flat_map(t_branches_at)
        .filter_map(|b| {
            let k = zeta_listing(&b).unwrap().iter().filter(|x| x.as_str() == star).count();
            (k > 0).then_some((b, k))
        })
        .collect()
}

/// Checks that the preimages of `f_i*` stack to exactly `w*(f_i*)`: the
/// finite part up to level `depth` plus the closed-form remainder.
pub fn covering_identity(i: i64, depth: i64) -> Result<(Rational, Rational), CarryError> {
    let star = fs(i);
    let finite: Rational = preimage(&star, depth).iter().map(|(b, k)| int(*k as i64) * t_weight(b)).sum();
    let next = level_term(&star, depth + 1);
    let after = level_term(&star, depth + 2);
    let rest = if next.is_zero() {
        Rational::zero()
    } else {
        sum_geometric_tail(&GeometricTail::new(next.clone(), &after / &next)).map_err(|_| CarryError::NotGeometric(star.clone()))?
    };
    Ok((finite + rest, induced_weight(&star)?))
}

/// The pair T, T* with the carrying map between them.
#[derive(Debug, Clone)]
pub struct CarryingMap {
    pub t: TrainTrack,
    pub w: WeightSystem,
    pub t_star: TrainTrack,
    pub w_star: WeightSystem,
    images: Vec<TrainPath>,
}

impl CarryingMap {
    /// T truncated at `depth` and T* truncated one level further.
    pub fn new(depth: usize) -> Result<CarryingMap, CarryError> {
        Self::with_orders(depth, StarOrders::default())
    }

    pub fn with_orders(depth: usize, orders: StarOrders) -> Result<CarryingMap, CarryError> {
        let (t, w) = build_t(depth)?;
        let (t_star, w_star) = build_t_star_with(depth + 1, orders)?;
        let mut images = Vec::with_capacity(t.num_branches());
        for br in t.branches() {
            let listing = zeta_listing(&br.name)?;
            let ids = listing.iter().rev().map(|s| t_star.branch_id(s).map_err(|_| CarryError::BeyondTruncation(s.clone()))).collect::<Result<Vec<_>, _>>()?;
            let path = if ids.len() == 1 {
                TrainPath::new(vec![Step { branch: ids[0], forward: true }])
            } else {
                t_star.orient(&ids).ok_or_else(|| CarryError::NotTrainPath(listing.join(" ")))?
            };
            images.push(path);
        }
        Ok(CarryingMap { t, w, t_star, w_star, images })
    }

    /// The oriented image of one oriented step of T.
    pub fn zeta(&self, step: Step) -> TrainPath {
        let p = &self.images[step.branch];
        if step.forward {
            p.clone()
        } else {
            p.reversed()
        }
    }

    /// Replaces every branch of a train path on T by its image.
    pub fn xi_translate(&self, path: &TrainPath) -> Result<TrainPath, CarryError> {
        if !self.t.is_oriented_train_path(path) {
            return Err(CarryError::NotTrainPath(path.names(&self.t).join(" ")));
        }
        let steps: Vec<Step> = path.steps.iter().flat_map(|s| self.zeta(*s).steps).collect();
        let out = TrainPath::new(steps);
        if !self.t_star.is_oriented_train_path(&out) {
            return Err(CarryError::NotTrainPath(out.names(&self.t_star).join(" ")));
        }
        Ok(out)
    }

    /// Largest discrepancy between the leaf measure of an oriented T* path of
    /// length `k` in G* and the measure of the leaves of G carried onto it,
    /// over all paths starting on branches of level at most `max_level`.
    ///
    /// The carrying map sends leaves of G to leaves of G*, so the two
    /// measures agree exactly on the untruncated tracks; on truncations they
    /// differ by at most the weight that leaks out of the truncated part.
    pub fn cylinder_discrepancy(&self, k: usize, max_level: u32) -> Result<Rational, CarryError> {
        let g = RectComplex::new(&self.t, &self.w).map_err(|e| CarryError::NotTrainPath(e.to_string()))?;
        let gs = RectComplex::new(&self.t_star, &self.w_star).map_err(|e| CarryError::NotTrainPath(e.to_string()))?;
        let level_of = |name: &str| -> u32 {
            let core = name.trim_end_matches('*');
            core[1..].parse::<i64>().map(|v| v.unsigned_abs() as u32).unwrap_or(0)
        };
        let mut pushed: HashMap<Vec<Step>, Rational> = HashMap::new();
        for b in 0..self.t.num_branches() {
            for forward in [true, false] {
                let s = Step { branch: b, forward };
                let img = self.zeta(s).steps;
                for j in 0..img.len() {
                    if level_of(&self.t_star.branch(img[j].branch).name) > max_level {
                        continue;
                    }
                    let mut stack = vec![(vec![s], img[j..].to_vec(), Rational::zero(), self.w.get(b).clone())];
                    while let Some((tp, word, lo, hi)) = stack.pop() {
                        if word.len() >= k {
                            *pushed.entry(word[..k].to_vec()).or_insert_with(Rational::zero) += hi - lo;
                            continue;
                        }
                        for (n, a, c) in g.band_children(*tp.last().unwrap(), &lo, &hi) {
                            let mut w2 = word.clone();
                            w2.extend(self.zeta(n).steps);
                            let mut tp2 = tp.clone();
                            tp2.push(n);
                            stack.push((tp2, w2, a, c));
                        }
                    }
                }
            }
        }
        let mut worst = Rational::zero();
        for (bs, br) in self.t_star.branches().iter().enumerate() {
            if level_of(&br.name) > max_level {
                continue;
            }
            for forward in [true, false] {
                for (p, m) in gs.cylinders(Step { branch: bs, forward }, k) {
                    let other = pushed.get(&p.steps).cloned().unwrap_or_else(Rational::zero);
                    let d = num_traits::Signed::abs(&(m - other));
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// The switch orders of T* that make leaf measures agree with their
/// preimages in G. All candidates are scored at depth `depth`; the unique
/// best candidate is returned with every candidate's discrepancy.
pub fn resolve_star_orders(depth: usize, k: usize) -> Result<(StarOrders, Vec<(StarOrders, Rational)>), CarryError> {
    let cands: Vec<StarOrders> =
        (0..32u32).map(|m| StarOrders { z0_b1_low: m & 1 != 0, pos_c_low: [m & 2 != 0, m & 4 != 0], neg_c_low: [m & 8 != 0, m & 16 != 0] }).collect();
    let scores = crate::par::map(&cands, |o| CarryingMap::with_orders(depth, *o).and_then(|c| c.cylinder_discrepancy(k, 6)).map(|d| (*o, d)));
    let scores = scores.into_iter().collect::<Result<Vec<_>, _>>()?;
    let best = scores.iter().min_by(|a, b| a.1.cmp(&b.1)).unwrap().0;
    Ok((best, scores))
}

/// The leaf of G* that no leaf of G is carried onto, as a finite window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingPath {
    pub window: Vec<String>,
    pub is_train_path: bool,
    pub only_f: bool,
}

/// The window `f(-d)* ... f(d)*` of the missing path.
pub fn missing_path_window(depth: usize, t_star: &TrainTrack) -> Result<MissingPath, CarryError> {
    let d = depth as i64;
    let window: Vec<String> = (-d..=d).map(fs).collect();
    let refs: Vec<&str> = window.iter().map(|s| s.as_str()).collect();
    let is_train_path = t_star.is_train_path(&refs)?;
    let only_f = window.iter().all(|s| s.starts_with('f'));
    Ok(MissingPath { window, is_train_path, only_f })
}

/// True if a T* path uses some branch outside the chain `f*`.
pub fn leaves_chain(path: &TrainPath, t_star: &TrainTrack) -> bool {
    path.steps.iter().any(|s| !t_star.branch(s.branch).name.starts_with('f'))
}

/// Images of leaf windows of G: for each seed height in `R(b0)`, the window of
/// `len` branches of T followed by the leaf, translated to T*.
pub fn image_windows(c: &CarryingMap, seeds: &[Rational], len: usize) -> Result<Vec<TrainPath>, CarryError> {
    let g = RectComplex::new(&c.t, &c.w).map_err(|e| CarryError::NotTrainPath(e.to_string()))?;
    let b0 = c.t.branch_id("b0")?;
    let paths = crate::par::map(seeds, |h| {
        g.trace_leaf(&Leaf::new(b0, h.clone(), true, LeafLimit::Left), len).map(|it| it.path()).map_err(|e| CarryError::NotTrainPath(e.to_string()))
    });
    paths.into_iter().map(|p| c.xi_translate(&p?)).collect()
}

/// The induced weight table as `name -> "p/q"`.
pub fn weight_table(track: &TrainTrack) -> Result<BTreeMap<String, String>, CarryError> {
    track.branches().iter().map(|b| Ok((b.name.clone(), format_rational(&induced_weight(&b.name)?)))).collect()
}
