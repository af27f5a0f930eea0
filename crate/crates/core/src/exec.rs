//! Execution strategy for the data-parallel loops (per-k, per-z, per-frame).
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it every strategy runs sequentially. Results are always returned
//! in input order, and each task is computed independently, so both
//! strategies give bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Like [`Execution::map`] but hands every task a private scratch value
    /// created by `init` (one per worker, reused across tasks).
    pub fn map_with<T, S, R, I, F>(self, items: &[T], init: I, f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map_init(&init, |s, t| f(s, t)).collect(),
            _ => {
                let mut scratch = init();
                items.iter().map(|t| f(&mut scratch, t)).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let data: Vec<f64> = (0..1000).map(|i| i as f64 * 0.37).collect();
        let f = |x: &f64| (x.sin() * 1e3).exp().ln();
        let a = Execution::Sequential.map(&data, f);
        let b = Execution::Parallel.map(&data, f);
        assert_eq!(a, b);
        let c = Execution::Parallel.map_with(
            &data,
            || 0usize,
            |n, x| {
                *n += 1;
                f(x)
            },
        );
        assert_eq!(a, c);
    }
}
