use crate::error::{Error, Result};
use crate::C64;

/// Step-size control settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 20_000_000 }
    }
}

impl Tolerances {
    pub fn tightened(self, factor: f64) -> Self {
        Self { rtol: self.rtol * factor, atol: self.atol * factor, ..self }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of `dy/dt = f(t, y)` over `grid`.
///
/// `grid[0]` is the initial time; steps are shortened to land on every grid
/// point, where `observe(index, t, y)` is called (including index 0).
pub fn integrate<F, O>(mut f: F, y0: &[C64], grid: &[f64], tol: &Tolerances, mut observe: O) -> Result<StepStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = grid[0];
    let mut stats = StepStats::default();
    observe(0, t, &y)?;
    if grid.len() == 1 {
        return Ok(stats);
    }

    let zero = C64::new(0.0, 0.0);
    let mut k: Vec<Vec<C64>> = vec![vec![zero; n]; 7];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];

    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(&y, &k[0], tol, grid[grid.len() - 1] - t);
    let mut next = 1;

    while next < grid.len() {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::TooManySteps { t, max_steps: tol.max_steps });
        }
        let target = grid[next];
        let landing = t + h >= target - 1e-12 * target.abs().max(1.0);
        let step = if landing { target - t } else { h };
        if step <= 1e-13 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h: step });
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (r, row) in k.iter().enumerate().take(s) {
                    let a = A[s][r];
                    if a != 0.0 {
                        acc += row[i] * (a * step);
                    }
                }
                tmp[i] = acc;
            }
            if s == 6 {
                y_new.copy_from_slice(&tmp);
            }
            f(t + C[s] * step, &tmp, &mut k[s]);
            stats.evaluations += 1;
        }

        let mut err2 = 0.0;
        for i in 0..n {
            let mut e = zero;
            for (r, row) in k.iter().enumerate() {
                if E[r] != 0.0 {
                    e += row[i] * E[r];
                }
            }
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err2 += (e.norm() * step / sc).powi(2);
        }
        let err = (err2 / n.max(1) as f64).sqrt();

        if err <= 1.0 {
            stats.accepted += 1;
            t = if landing { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            // First-same-as-last: the final stage is f at the new point.
            let last = k.pop().unwrap();
            k.insert(0, last);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let proposed = step * factor;
            h = if landing { h.max(proposed) } else { proposed };
            if landing {
                observe(next, t, &y)?;
                next += 1;
            }
        } else {
            stats.rejected += 1;
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(stats)
}

fn initial_step(y: &[C64], f0: &[C64], tol: &Tolerances, span: f64) -> f64 {
    let sc = |z: &C64| tol.atol + tol.rtol * z.norm();
    let n = y.len().max(1) as f64;
    let d0 = (y.iter().map(|z| (z.norm() / sc(z)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(y).map(|(d, z)| (d.norm() / sc(z)).powi(2)).sum::<f64>() / n).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12)
}
