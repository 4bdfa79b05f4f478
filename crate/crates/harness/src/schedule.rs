//! Parallel execution of independent tasks with an order-fixed reduction.
//!
//! Results are gathered by task index and reduced sequentially, so every
//! summary is bitwise independent of the worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::HarnessError;

pub const WORKERS_ENV: &str = "DLAB_WORKERS";

/// Worker count from the flag, then `DLAB_WORKERS`, then the machine.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize, HarnessError> {
    if let Some(w) = flag {
        return check(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let w = v
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("{WORKERS_ENV}='{v}' is not a worker count")))?;
            check(w)
        }
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn check(w: usize) -> Result<usize, HarnessError> {
    if w == 0 {
        Err(HarnessError::Config("workers must be >= 1".into()))
    } else {
        Ok(w)
    }
}

/// Runs `f` inside a pool of `workers` threads.
pub fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(check(workers)?)
        .build()
        .map_err(|e| HarnessError::Worker(e.to_string()))?;
    Ok(pool.install(f))
}

/// Evaluates `f(0..tasks)` in parallel; panics and errors become `Err` entries
/// at their own index.
pub fn run_tasks<T: Send>(
    tasks: usize,
    workers: usize,
    f: impl Fn(usize) -> Result<T, String> + Sync + Send,
) -> Result<Vec<Result<T, String>>, HarnessError> {
    with_pool(workers, || {
        (0..tasks)
            .into_par_iter()
            .map(|i| match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| f(i))) {
                Ok(r) => r,
                Err(p) => Err(panic_message(p)),
            })
            .collect()
    })
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = p.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".into()
    }
}

/// Sums, sums of squares and extrema over the surviving draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub tasks: usize,
    pub ok: usize,
    pub failed: Vec<usize>,
    pub sum: f64,
    pub sum_sq: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub stderr: f64,
}

impl Summary {
    pub fn reduce(values: &[Option<f64>]) -> Summary {
        let mut s = Summary {
            tasks: values.len(),
            ok: 0,
            failed: Vec::new(),
            sum: 0.0,
            sum_sq: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            mean: f64::NAN,
            stderr: f64::NAN,
        };
        for (i, v) in values.iter().enumerate() {
            match v {
                Some(x) => {
                    s.ok += 1;
                    s.sum += x;
                    s.sum_sq += x * x;
                    s.min = s.min.min(*x);
                    s.max = s.max.max(*x);
                }
                None => s.failed.push(i),
            }
        }
        if s.ok > 0 {
            let n = s.ok as f64;
            s.mean = s.sum / n;
            if s.ok > 1 {
                let var = ((s.sum_sq - n * s.mean * s.mean) / (n - 1.0)).max(0.0);
                s.stderr = (var / n).sqrt();
            }
        }
        s
    }

    pub fn all_ok(&self) -> bool {
        self.failed.is_empty()
    }
}
