// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Execution policy for data-parallel loops.
//!
//! Everything parallel in this crate goes through [`ExecPolicy::map`], which
//! preserves input order so results never depend on scheduling. Without the
//! `parallel` feature every policy runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecPolicy {
    Sequential,
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// True when this policy actually fans out work in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == ExecPolicy::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == ExecPolicy::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}
