//! Multi-dimensional complex FFT built from per-axis 1D transforms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::exec;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, inverse: bool) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

const LINES_PER_TASK: usize = 64;

/// Unnormalized in-place transform of an `n^dim` array stored x-fastest.
pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let p = plan(n, inverse);
    let lines = data.len() / n;

    exec::for_each_chunk_mut(data, n * LINES_PER_TASK, |_, chunk| p.process(chunk));

    for axis in 1..dim {
        let stride = n.pow(axis as u32);
        let tasks = lines.div_ceil(LINES_PER_TASK);
        let src: &[Complex64] = data;
        let batches = exec::map_range(tasks, |t| {
            let lo = t * LINES_PER_TASK;
            let hi = (lo + LINES_PER_TASK).min(lines);
            let mut buf = Vec::with_capacity((hi - lo) * n);
            for l in lo..hi {
                let base = line_base(l, stride, n);
                buf.extend((0..n).map(|k| src[base + k * stride]));
            }
            p.process(&mut buf);
            buf
        });
        for (t, buf) in batches.into_iter().enumerate() {
            let lo = t * LINES_PER_TASK;
            for (j, line) in buf.chunks_exact(n).enumerate() {
                let base = line_base(lo + j, stride, n);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}

fn line_base(l: usize, stride: usize, n: usize) -> usize {
    let low = l % stride;
    let high = l / stride;
    high * stride * n + low
}
