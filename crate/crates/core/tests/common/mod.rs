#![allow(dead_code)]

use std::path::PathBuf;

use double_phase::cli::{Instance, RunConfig};
use double_phase::parallel::Execution;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn load(name: &str) -> RunConfig {
    RunConfig::load(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn instance(name: &str) -> Instance {
    Instance::new(load(name), Execution::default()).unwrap()
}

/// Positive radial solution of `-Lap u = u^3` on the unit ball in R^3 by
/// shooting: `w'' + 2 w' / s + w^3 = 0`, `w(0) = 1`, first zero `s0`, then
/// `u(s) = s0 w(s0 s)`.
pub struct LaneEmden {
    pub first_zero: f64,
    step: f64,
    start: f64,
    table: Vec<f64>,
}

impl LaneEmden {
    pub fn solve() -> Self {
        let h = 1e-5;
        let start: f64 = 1e-3;
        // series w = 1 - s^2/6 + s^4/40 + O(s^6)
        let mut s = start;
        let mut w = 1.0 - s * s / 6.0 + s.powi(4) / 40.0;
        let mut dw = -s / 3.0 + s.powi(3) / 10.0;
        let rhs = |s: f64, w: f64, dw: f64| -2.0 * dw / s - w * w * w;
        let mut table = vec![w];
        loop {
            let k1 = (dw, rhs(s, w, dw));
            let k2 = (dw + 0.5 * h * k1.1, rhs(s + 0.5 * h, w + 0.5 * h * k1.0, dw + 0.5 * h * k1.1));
            let k3 = (dw + 0.5 * h * k2.1, rhs(s + 0.5 * h, w + 0.5 * h * k2.0, dw + 0.5 * h * k2.1));
            let k4 = (dw + h * k3.1, rhs(s + h, w + h * k3.0, dw + h * k3.1));
            let wn = w + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            let dn = dw + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            if wn <= 0.0 {
                // cubic Hermite root on the last step
                let (a, b) = (w, wn);
                let mut lo = 0.0;
                let mut hi = 1.0;
                let herm = |t: f64| {
                    let (t2, t3) = (t * t, t * t * t);
                    (2.0 * t3 - 3.0 * t2 + 1.0) * a
                        + (t3 - 2.0 * t2 + t) * h * dw
                        + (-2.0 * t3 + 3.0 * t2) * b
                        + (t3 - t2) * h * dn
                };
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if herm(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                table.push(wn);
                return Self {
                    first_zero: s + lo * h,
                    step: h,
                    start,
                    table,
                };
            }
            s += h;
            w = wn;
            dw = dn;
            table.push(w);
        }
    }

    fn w(&self, x: f64) -> f64 {
        if x <= self.start {
            return 1.0 - x * x / 6.0 + x.powi(4) / 40.0;
        }
        let t = (x - self.start) / self.step;
        let i = (t.floor() as usize).min(self.table.len() - 2);
        let f = t - i as f64;
        self.table[i] * (1.0 - f) + self.table[i + 1] * f
    }

    /// `u(s)` on the unit ball.
    pub fn eval(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        self.first_zero * self.w(self.first_zero * s)
    }
}
