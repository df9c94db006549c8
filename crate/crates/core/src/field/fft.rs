use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::GridSpec;

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, PlanCache)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((n, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Unnormalized separable transform over every axis.
fn transform_axes(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let dim = grid.dim();
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // Last axis is contiguous.
    fft.process_with_scratch(data, &mut scratch);
    if dim == 1 {
        return;
    }
    let total = data.len();
    let mut lines = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let outer = total / (n * stride);
        // Gather every line along `axis` into contiguous storage.
        let mut w = 0;
        for o in 0..outer {
            let base = o * n * stride;
            for i in 0..stride {
                for j in 0..n {
                    lines[w] = data[base + i + j * stride];
                    w += 1;
                }
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        let mut r = 0;
        for o in 0..outer {
            let base = o * n * stride;
            for i in 0..stride {
                for j in 0..n {
                    data[base + i + j * stride] = lines[r];
                    r += 1;
                }
            }
        }
    }
}

/// Multiplies sample `j` by `scale·(-1)^{Σ j_a}`, the phase that moves the
/// grid origin to the centre of the box.
fn checkerboard(grid: &GridSpec, data: &mut [Complex64], scale: f64) {
    let n = grid.n();
    let dim = grid.dim();
    let mut idx = [0usize; 3];
    let mut parity = 0usize;
    for v in data.iter_mut() {
        *v *= if parity & 1 == 0 { scale } else { -scale };
        for a in (0..dim).rev() {
            idx[a] += 1;
            parity += 1;
            if idx[a] < n {
                break;
            }
            // Wrapping subtracts n (even) from the coordinate sum.
            idx[a] = 0;
        }
    }
}

/// Physical samples to spectrum values, in place.
pub fn forward_in_place(grid: &GridSpec, data: &mut [Complex64]) {
    transform_axes(grid, data, false);
    checkerboard(grid, data, grid.cell());
}

/// Spectrum values to physical samples, in place.
pub fn inverse_in_place(grid: &GridSpec, data: &mut [Complex64]) {
    checkerboard(grid, data, grid.freq_cell());
    transform_axes(grid, data, true);
}
