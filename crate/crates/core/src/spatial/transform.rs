//! Type-I discrete sine transform on the interior nodes of a Dirichlet grid.
//!
//! With nodes `x_i = iL/(n+1)`, the pair
//!
//! ```text
//! û_k = 2/(n+1) · Σ_i u_i sin(kπ i/(n+1))      (forward)
//! u_i = Σ_k û_k sin(kπ i/(n+1))                (inverse)
//! ```
//! is exact, and `û_k` are the coefficients of `u(x) = Σ_k û_k sin(kπx/L)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustdct::{DctPlanner, Dst1};

fn planner() -> &'static Mutex<DctPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<DctPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(DctPlanner::new()))
}

fn plan(n: usize) -> Arc<dyn Dst1<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<dyn Dst1<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("sine transform cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| planner().lock().expect("dct planner poisoned").plan_dst1(n))
        .clone()
}

/// Reusable DST-I with its own scratch space. Not `Sync`; each worker owns one.
pub(crate) struct SineTransform {
    plan: Arc<dyn Dst1<f64>>,
    scratch: Vec<f64>,
    n: usize,
}

impl SineTransform {
    pub(crate) fn new(n: usize) -> Self {
        let plan = plan(n);
        let scratch = vec![0.0; plan.get_scratch_len()];
        Self { plan, scratch, n }
    }

    /// Nodal values to sine coefficients, in place.
    pub(crate) fn forward_in_place(&mut self, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.plan.process_dst1_with_scratch(buf, &mut self.scratch);
        let scale = 2.0 / (self.n as f64 + 1.0);
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// Sine coefficients to nodal values, in place.
    pub(crate) fn inverse_in_place(&mut self, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.plan.process_dst1_with_scratch(buf, &mut self.scratch);
    }

    pub(crate) fn forward(&mut self, values: &[f64]) -> Vec<f64> {
        let mut buf = values.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    pub(crate) fn inverse(&mut self, modes: &[f64]) -> Vec<f64> {
        let mut buf = modes.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }
}
