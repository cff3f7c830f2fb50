//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the work is spread over the current rayon
//! pool; without it everything runs on the calling thread. Each item is
//! computed by the same code path either way, so results are bit-identical
//! regardless of worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Parallel when the crate is built with `parallel`, sequential otherwise.
    #[default]
    Auto,
    Sequential,
    Parallel,
}

impl Execution {
    fn parallel(self) -> bool {
        match self {
            Execution::Sequential => false,
            Execution::Auto | Execution::Parallel => cfg!(feature = "parallel"),
        }
    }
}

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec.parallel();
    items.iter().map(f).collect()
}

pub fn map_range<R, F>(exec: Execution, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec.parallel();
    (0..len).map(f).collect()
}

/// Number of workers the current pool would use.
pub fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
