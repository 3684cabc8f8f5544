//! Data-parallel mapping with a sequential fallback.
//!
//! Batch work (classifier sweeps, per-sector transfer integrations) routes
//! through [`par_map`], which fans out across threads when the `parallel`
//! feature is enabled (the default) and degrades to a plain loop without
//! it. [`seq_map`] is always sequential, kept as the baseline the bench
//! suite compares against. Both preserve input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(&f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(&f).collect()
    }
}

pub fn seq_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(&f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let items: Vec<u64> = (0..500).collect();
        let f = |x: &u64| x * x + 1;
        assert_eq!(par_map(&items, f), seq_map(&items, f));
    }

    #[test]
    fn empty_input_yields_empty_output() {
        let items: Vec<u64> = vec![];
        assert!(par_map(&items, |x| *x).is_empty());
    }
}
