//! `Fft2d` on top of rustfft: rows, transpose, rows again, transpose back.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use blab_core::solver::Fft2d;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

#[derive(Default)]
pub struct RustFft2d {
    plans: Mutex<HashMap<(usize, bool), Plan>>,
}

impl RustFft2d {
    pub fn new() -> Self {
        Self::default()
    }

    fn plan(&self, m: usize, forward: bool) -> Plan {
        let mut plans = self.plans.lock().unwrap_or_else(|e| e.into_inner());
        plans
            .entry((m, forward))
            .or_insert_with(|| {
                let dir = if forward { FftDirection::Forward } else { FftDirection::Inverse };
                FftPlanner::new().plan_fft(m, dir)
            })
            .clone()
    }

    fn run(&self, data: &mut [Complex64], m: usize, forward: bool) {
        assert_eq!(data.len(), m * m, "2-D FFT buffer is not {m} x {m}");
        let plan = self.plan(m, forward);
        let rows = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(m).for_each_init(
                || vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()],
                |scratch, row| plan.process_with_scratch(row, scratch),
            );
        };
        rows(data);
        transpose(data, m);
        rows(data);
        transpose(data, m);
    }
}

fn transpose(data: &mut [Complex64], m: usize) {
    const B: usize = 32;
    for bi in (0..m).step_by(B) {
        for bj in (bi..m).step_by(B) {
            for i in bi..(bi + B).min(m) {
                let j0 = if bi == bj { i + 1 } else { bj };
                for j in j0..(bj + B).min(m) {
                    data.swap(i * m + j, j * m + i);
                }
            }
        }
    }
}

impl Fft2d for RustFft2d {
    fn forward(&self, data: &mut [Complex64], m: usize) {
        self.run(data, m, true);
    }

    fn inverse(&self, data: &mut [Complex64], m: usize) {
        self.run(data, m, false);
        let s = 1.0 / (m * m) as f64;
        data.par_iter_mut().for_each(|v| *v *= s);
    }
}
