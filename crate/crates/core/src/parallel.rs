//! Data-parallel execution backend.
//!
//! Numerical kernels are pure per-cell functions: they read shared immutable
//! inputs and write exactly one output slot. The backend decides how index
//! ranges are split into work units; results never depend on that split.
//!
//! The global maximum (needed every step for the CFL bound) is found with a
//! two-level reduction: each work unit reduces its own chunk, then a single
//! final pass reduces the per-chunk results.

use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BackendKind {
    #[serde(rename = "serial")]
    Serial,
    #[serde(rename = "parallel")]
    DataParallel,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Serial => f.write_str("serial"),
            BackendKind::DataParallel => f.write_str("parallel"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub lanes: usize,
    pub chunk: usize,
    pub deterministic_reduction: bool,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self::serial()
    }
}

impl BackendConfig {
    pub fn serial() -> Self {
        Self {
            kind: BackendKind::Serial,
            lanes: 1,
            chunk: DEFAULT_CHUNK,
            deterministic_reduction: true,
        }
    }

    pub fn parallel(lanes: usize) -> Self {
        Self {
            kind: BackendKind::DataParallel,
            lanes,
            chunk: DEFAULT_CHUNK,
            deterministic_reduction: true,
        }
    }

    pub fn with_chunk(mut self, chunk: usize) -> Self {
        self.chunk = chunk;
        self
    }
}

/// Executes per-cell kernels according to a [`BackendConfig`].
#[derive(Clone)]
pub struct Backend {
    config: BackendConfig,
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl fmt::Debug for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Backend").field("config", &self.config).finish()
    }
}

impl Backend {
    pub fn new(config: BackendConfig) -> Result<Self> {
        if config.lanes == 0 {
            return Err(Error::Config("backend lanes must be >= 1".into()));
        }
        if config.chunk == 0 {
            return Err(Error::Config("backend chunk must be >= 1".into()));
        }
        let pool = match config.kind {
            BackendKind::Serial => None,
            BackendKind::DataParallel => Some(Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.lanes)
                    .thread_name(|k| format!("twophase-lane-{k}"))
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?,
            )),
        };
        Ok(Self { config, pool })
    }

    pub fn serial() -> Self {
        Self {
            config: BackendConfig::serial(),
            pool: None,
        }
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// Applies `kernel` to every index in `0..n` and collects the results in
    /// index order.
    pub fn par_map<T, F>(&self, n: usize, kernel: F) -> Vec<T>
    where
        T: Send + Clone + Default,
        F: Fn(usize) -> T + Sync,
    {
        let mut out = vec![T::default(); n];
        self.fill(&mut out, kernel);
        out
    }

    /// Overwrites `out[k]` with `kernel(k)` for every slot.
    ///
    /// A panicking kernel is re-raised with the failing index in the message.
    pub fn fill<T, F>(&self, out: &mut [T], kernel: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let chunk = self.config.chunk;
        let run_chunk = |base: usize, slots: &mut [T]| {
            let mut current = base;
            let res = panic::catch_unwind(AssertUnwindSafe(|| {
                for (k, slot) in slots.iter_mut().enumerate() {
                    current = base + k;
                    *slot = kernel(current);
                }
            }));
            if let Err(payload) = res {
                let msg = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "unknown panic".to_string());
                panic!("kernel panicked at cell {current}: {msg}");
            }
        };
        match &self.pool {
            None => {
                for (c, slots) in out.chunks_mut(chunk).enumerate() {
                    run_chunk(c * chunk, slots);
                }
            }
            Some(pool) => pool.install(|| {
                out.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(c, slots)| run_chunk(c * chunk, slots));
            }),
        }
    }

    /// Exact maximum of `values`.
    pub fn reduce_max(&self, values: &[f64]) -> Result<f64> {
        self.map_reduce_max(values.len(), |k| values[k])
    }

    /// Maximum of `kernel(k)` over `0..n` without materialising the field.
    ///
    /// Uses the IEEE total order, so the result is bitwise independent of how
    /// the range is split (a NaN anywhere wins and surfaces to the caller).
    pub fn map_reduce_max<F>(&self, n: usize, kernel: F) -> Result<f64>
    where
        F: Fn(usize) -> f64 + Sync,
    {
        if n == 0 {
            return Err(Error::EmptyReduction);
        }
        let chunk = self.config.chunk;
        let chunk_max = |c: usize| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(n);
            (lo..hi).map(&kernel).fold(f64::NEG_INFINITY, total_max)
        };
        let n_chunks = n.div_ceil(chunk);
        let result = match &self.pool {
            None => (0..n_chunks).map(chunk_max).fold(f64::NEG_INFINITY, total_max),
            Some(pool) if self.config.deterministic_reduction => {
                // level 1: one maximum per work unit
                let partial: Vec<f64> =
                    pool.install(|| (0..n_chunks).into_par_iter().map(chunk_max).collect());
                // level 2: a single pass over the per-unit maxima
                partial.into_iter().fold(f64::NEG_INFINITY, total_max)
            }
            Some(pool) => pool.install(|| {
                (0..n)
                    .into_par_iter()
                    .with_min_len(chunk)
                    .map(&kernel)
                    .reduce(|| f64::NEG_INFINITY, total_max)
            }),
        };
        Ok(result)
    }
}

#[inline]
fn total_max(a: f64, b: f64) -> f64 {
    if b.total_cmp(&a).is_gt() {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backends() -> Vec<Backend> {
        let mut out = vec![Backend::serial()];
        for lanes in [1, 2, 8] {
            for chunk in [1, 3, 4096] {
                out.push(Backend::new(BackendConfig::parallel(lanes).with_chunk(chunk)).unwrap());
            }
        }
        out
    }

    #[test]
    fn identity_and_square_kernels() {
        let input = [1.0, 2.0, 3.0];
        for b in backends() {
            assert_eq!(b.par_map(3, |k| input[k]), vec![1.0, 2.0, 3.0]);
            assert_eq!(b.par_map(3, |k| input[k] * input[k]), vec![1.0, 4.0, 9.0]);
        }
    }

    #[test]
    fn lanes_do_not_change_map_output() {
        let kernel = |k: usize| ((k as f64) * 0.37).sin() / (1.0 + k as f64).sqrt();
        let one = Backend::new(BackendConfig::parallel(1)).unwrap().par_map(10_000, kernel);
        let eight = Backend::new(BackendConfig::parallel(8).with_chunk(7))
            .unwrap()
            .par_map(10_000, kernel);
        assert!(one.iter().zip(&eight).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn reduce_max_small_cases() {
        for b in backends() {
            assert_eq!(b.reduce_max(&[3., 1., 4., 1., 5., 9., 2., 6.]).unwrap(), 9.0);
            assert_eq!(b.reduce_max(&[7.0]).unwrap(), 7.0);
            assert!(matches!(b.reduce_max(&[]), Err(Error::EmptyReduction)));
        }
    }

    #[test]
    fn nan_surfaces_from_reduction() {
        let b = Backend::serial();
        assert!(b.reduce_max(&[1.0, f64::NAN, 2.0]).unwrap().is_nan());
    }

    #[test]
    #[should_panic(expected = "kernel panicked at cell 5")]
    fn kernel_panic_reports_index() {
        let b = Backend::new(BackendConfig::parallel(2).with_chunk(2)).unwrap();
        b.par_map(8, |k| {
            if k == 5 {
                panic!("boom");
            }
            k as f64
        });
    }

    #[test]
    fn rejects_zero_lanes_and_chunk() {
        let mut cfg = BackendConfig::parallel(0);
        assert!(Backend::new(cfg).is_err());
        cfg.lanes = 2;
        cfg.chunk = 0;
        assert!(Backend::new(cfg).is_err());
    }
}
