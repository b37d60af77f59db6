//! Data-parallel helpers with a sequential fallback.
//!
//! `Exec::Parallel` uses rayon when the `parallel` feature is enabled and
//! degrades to sequential execution otherwise. Results are always returned in
//! index order, so both modes produce identical output for pure closures.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map<T: Send>(self, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps over a slice, preserving order.
    pub fn map_slice<S: Sync, T: Send>(self, items: &[S], f: impl Fn(&S) -> T + Sync + Send) -> Vec<T> {
        self.map(items.len(), |i| f(&items[i]))
    }
}
