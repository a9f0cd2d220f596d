use crate::energy::Functional;
use crate::error::{Error, Result};
use crate::radial::RadialFunction;

const BRACKET_START: f64 = 1e-10;
const BISECTIONS: usize = 200;

fn mismatch(f: &Functional, u0: f64) -> Option<f64> {
    let v = *f.march(u0).last().unwrap();
    (!v.is_nan()).then_some(v)
}

/// Refines a near-critical point by shooting on its value at the origin:
/// the march solves every interior equation exactly, and bisection drives
/// the boundary value to zero. Returns the refined point and its residual.
pub fn shooting_refine(f: &Functional, u: &RadialFunction) -> Result<(RadialFunction, f64)> {
    let c = u.values()[0];
    let fail = |why: &str| Error::Certificate(format!("shooting from u(0) = {c:e}: {why}"));
    if c == 0.0 {
        return Err(fail("zero start"));
    }
    let fc = mismatch(f, c).ok_or_else(|| fail("march overflow"))?;
    let (mut a, mut b) = (c, c);
    let mut fa = fc;
    if fc != 0.0 {
        let mut delta = BRACKET_START * c.abs();
        let mut found = false;
        while delta <= 0.5 * c.abs() && !found {
            for x in [c + delta, c - delta] {
                if let Some(fx) = mismatch(f, x) {
                    if fx.signum() != fc.signum() {
                        b = x;
                        found = true;
                        break;
                    }
                }
            }
            delta *= 2.0;
        }
        if !found {
            return Err(fail("no sign change in the boundary value"));
        }
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            match mismatch(f, mid) {
                Some(fm) if fm.signum() == fa.signum() => {
                    a = mid;
                    fa = fm;
                }
                Some(_) => b = mid,
                None => return Err(fail("march overflow")),
            }
        }
    }
    let mut best: Option<(RadialFunction, f64)> = None;
    for x in [a, b] {
        let v = RadialFunction::from_values(f.march(x)).with_dirichlet();
        if let Ok(r) = f.residual(&v) {
            if best.as_ref().is_none_or(|(_, br)| r < *br) {
                best = Some((v, r));
            }
        }
    }
    best.ok_or_else(|| fail("no admissible endpoint"))
}
