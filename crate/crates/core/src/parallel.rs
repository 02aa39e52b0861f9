//! Data-parallel maps over cells and interfaces.
//!
//! With the `parallel` feature, [`Execution::Parallel`] runs on the rayon
//! thread pool. Without it, both variants run sequentially. Each output slot
//! is written by exactly one closure call, so results do not depend on the
//! execution mode.

use crate::error::{Error, Result};

/// How per-cell and per-interface work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether parallel execution is compiled in.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Smallest chunk handed to one worker; keeps small meshes sequential in
/// practice.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 256;

/// Error raised while filling slot `index`.
#[derive(Debug)]
pub struct IndexedError {
    pub index: usize,
    pub error: Error,
}

/// `out[k] = f(k)` for every slot.
pub fn fill<T, F>(execution: Execution, out: &mut [T], f: F) -> Result<(), IndexedError>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let run_one = |(k, slot): (usize, &mut T)| match f(k) {
        Ok(v) => {
            *slot = v;
            Ok(())
        }
        Err(error) => Err(IndexedError { index: k, error }),
    };
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().with_min_len(MIN_CHUNK).try_for_each(run_one)
        }
        _ => out.iter_mut().enumerate().try_for_each(run_one),
    }
}

/// `items.map(f)` collected in order.
pub fn map<I, R, F>(execution: Execution, items: &[I], f: F) -> Vec<R>
where
    I: Sync,
    R: Send,
    F: Fn(&I) -> R + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Caps the global worker pool at `threads`. Only the first call in a
/// process takes effect; later calls return an error.
pub fn configure_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(Error::Config("thread count must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure {threads} threads: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_matches_in_both_modes() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut out = vec![0usize; 1000];
            fill(exec, &mut out, |k| Ok(k * k)).unwrap();
            assert!(out.iter().enumerate().all(|(k, v)| *v == k * k));
        }
    }

    #[test]
    fn fill_reports_failing_index() {
        let mut out = vec![0.0; 10];
        let err = fill(Execution::Sequential, &mut out, |k| {
            if k == 7 {
                Err(Error::Mesh("boom".into()))
            } else {
                Ok(1.0)
            }
        })
        .unwrap_err();
        assert_eq!(err.index, 7);
    }

    #[test]
    fn map_keeps_order() {
        let items: Vec<i32> = (0..500).collect();
        let doubled = map(Execution::Parallel, &items, |x| 2 * x);
        assert_eq!(doubled, items.iter().map(|x| 2 * x).collect::<Vec<_>>());
    }

    #[test]
    fn zero_threads_rejected() {
        assert!(configure_threads(0).is_err());
    }
}
