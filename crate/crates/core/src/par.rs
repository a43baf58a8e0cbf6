//! Index-parallel map with a sequential fallback.
//!
//! Results are always returned in index order, so any reduction done by the
//! caller sees the same sequence regardless of how the work was scheduled.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Serial,
    /// Uses rayon when the `parallel` feature is enabled, serial otherwise.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work will actually be distributed over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map_indexed<T, F>(n: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = execution;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let serial = map_indexed(257, Execution::Serial, |i| i * i);
        let parallel = map_indexed(257, Execution::Parallel, |i| i * i);
        assert_eq!(serial, parallel);
        assert_eq!(serial[16], 256);
    }
}
