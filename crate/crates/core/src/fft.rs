use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, forward: bool) -> Plan {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

// Below this many points the rayon overhead dominates.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Unnormalized in-place DFT over every axis of a row-major grid array.
pub fn dft_in_place(grid: &Grid, data: &mut [Complex64], forward: bool) {
    let n = grid.points();
    let dim = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let fft = plan(n, forward);
    let parallel = data.len() >= PARALLEL_THRESHOLD;

    // Last axis: contiguous lines.
    if parallel {
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); fft.get_inplace_scratch_len()],
            |scratch, line| fft.process_with_scratch(line, scratch),
        );
    } else {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for line in data.chunks_mut(n) {
            fft.process_with_scratch(line, &mut scratch);
        }
    }

    // Remaining axes: strided lines, handled slab by slab.
    for axis in (0..dim.saturating_sub(1)).rev() {
        let stride = n.pow((dim - 1 - axis) as u32);
        let slab = stride * n;
        let work = |block: &mut [Complex64], line: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>| {
            for offset in 0..stride {
                for (m, v) in line.iter_mut().enumerate() {
                    *v = block[offset + m * stride];
                }
                fft.process_with_scratch(line, scratch);
                for (m, v) in line.iter().enumerate() {
                    block[offset + m * stride] = *v;
                }
            }
        };
        if parallel && data.len() / slab > 1 {
            data.par_chunks_mut(slab).for_each_init(
                || {
                    (
                        vec![Complex64::default(); n],
                        vec![Complex64::default(); fft.get_inplace_scratch_len()],
                    )
                },
                |(line, scratch), block| work(block, line, scratch),
            );
        } else if parallel {
            // Single slab (first axis): split the strided offsets across threads.
            strided_parallel(data, n, stride, &fft);
        } else {
            let mut line = vec![Complex64::default(); n];
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for block in data.chunks_mut(slab) {
                work(block, &mut line, &mut scratch);
            }
        }
    }
}

fn strided_parallel(data: &mut [Complex64], n: usize, stride: usize, fft: &Plan) {
    let lines: Vec<Vec<Complex64>> = (0..stride)
        .into_par_iter()
        .map_init(
            || vec![Complex64::default(); fft.get_inplace_scratch_len()],
            |scratch, offset| {
                let mut line: Vec<Complex64> = (0..n).map(|m| data[offset + m * stride]).collect();
                fft.process_with_scratch(&mut line, scratch);
                line
            },
        )
        .collect();
    for (offset, line) in lines.into_iter().enumerate() {
        for (m, v) in line.into_iter().enumerate() {
            data[offset + m * stride] = v;
        }
    }
}
