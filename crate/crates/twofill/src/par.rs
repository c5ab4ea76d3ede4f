//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the maps run on the rayon thread pool;
//! without it they are plain iterator maps. Output order always follows
//! input order, so results do not depend on the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Maps `f` over `items` and concatenates the results in order.
pub fn flat_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Vec<U> + Sync + Send) -> Vec<U> {
    map(items, f).into_iter().flatten().collect()
}

/// Whether the crate was built with the parallel backend.
pub const PARALLEL: bool = cfg!(feature = "parallel");

#[cfg(test)]
mod tests {
    #[test]
    fn order_is_preserved() {
        let v: Vec<u64> = (0..1000).collect();
        assert_eq!(super::map(&v, |x| x * x), v.iter().map(|x| x * x).collect::<Vec<_>>());
        assert_eq!(super::flat_map(&v[..3], |&x| vec![x; x as usize]), vec![1, 2, 2]);
    }
}
