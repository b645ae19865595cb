//! Execution helpers: data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) [`map_collect`] fans work out over
//! the rayon thread pool; without it, the same call compiles to a plain
//! sequential map. [`map_collect_serial`] is always sequential so the two
//! strategies can be benchmarked against each other in one build. Output
//! order always matches input order, keeping results deterministic under
//! either strategy.

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Sequential map regardless of feature flags.
pub fn map_collect_serial<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_serial_agree_in_order() {
        let input: Vec<u64> = (0..1000).collect();
        let f = |x: u64| x * x + 1;
        assert_eq!(map_collect(input.clone(), f), map_collect_serial(input, f));
    }
}
