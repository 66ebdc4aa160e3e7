//! Accelerated proximal gradient for a smooth convex loss plus a linear
//! penalty on nonnegative coordinates.

use crate::error::{Result, SrgmError};

/// Consecutive iterations with relative objective change below `tol_obj`
/// after which the loop gives up on reaching the KKT tolerance.
const STALL_WINDOW: usize = 50;

pub(crate) trait Smooth {
    fn dim(&self) -> usize;
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

/// Per-coordinate role in the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Coord {
    /// Unconstrained, unpenalized.
    Free,
    /// Constrained to `x >= 0` with linear penalty `weight * x`.
    NonNeg { weight: f64 },
    /// Held at its starting value.
    Fixed,
}

pub(crate) struct Settings {
    pub max_iters: usize,
    pub tol_obj: f64,
    pub tol_kkt: f64,
    pub accel: bool,
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub smooth: f64,
    pub objective: f64,
    pub kkt: f64,
    pub iters: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

pub(crate) struct Problem<'a, F: Smooth> {
    pub f: &'a F,
    pub coords: &'a [Coord],
    /// Diagonal metric: the step along coordinate `i` is `step * metric[i]`.
    pub metric: &'a [f64],
    /// KKT components along coordinate `i` are divided by `kkt_scale[i]`.
    pub kkt_scale: &'a [f64],
}

impl<F: Smooth> Problem<'_, F> {
    fn penalty(&self, x: &[f64]) -> f64 {
        self.coords
            .iter()
            .zip(x)
            .map(|(c, &v)| match c {
                Coord::NonNeg { weight } => weight * v,
                _ => 0.0,
            })
            .sum()
    }

    pub fn kkt_residual(&self, x: &[f64], grad: &[f64]) -> f64 {
        let mut r: f64 = 0.0;
        for (i, c) in self.coords.iter().enumerate() {
            let v = match *c {
                Coord::Free => grad[i].abs(),
                Coord::NonNeg { weight } if x[i] > 0.0 => (grad[i] + weight).abs(),
                Coord::NonNeg { weight } => (-grad[i] - weight).max(0.0),
                Coord::Fixed => 0.0,
            };
            r = r.max(v / self.kkt_scale[i]);
        }
        r
    }

    fn prox_step(&self, y: &[f64], grad: &[f64], step: f64, out: &mut [f64]) {
        for (i, c) in self.coords.iter().enumerate() {
            let t = step * self.metric[i];
            out[i] = match *c {
                Coord::Free => y[i] - t * grad[i],
                Coord::NonNeg { weight } => (y[i] - t * (grad[i] + weight)).max(0.0),
                Coord::Fixed => y[i],
            };
        }
    }

    pub fn solve(&self, x0: &[f64], s: &Settings) -> Result<Outcome> {
        let dim = self.f.dim();
        let mut x: Vec<f64> = x0
            .iter()
            .zip(self.coords)
            .map(|(&v, c)| match c {
                Coord::NonNeg { .. } => v.max(0.0),
                _ => v,
            })
            .collect();
        let mut gx = vec![0.0; dim];
        let mut fx = self.f.value_grad(&x, &mut gx);
        if !fx.is_finite() {
            return Err(SrgmError::NumericalFailure {
                iter: 0,
                detail: "objective is not finite at the starting point".into(),
            });
        }
        let mut obj_x = fx + self.penalty(&x);
        let mut kkt = self.kkt_residual(&x, &gx);
        let mut trace = vec![obj_x];

        let mut y = x.clone();
        let mut fy = fx;
        let mut gy = gx.clone();
        let mut momentum_on = false;
        let mut t_k: f64 = 1.0;
        let mut step = s.initial_step;
        let mut z = vec![0.0; dim];
        let mut gz = vec![0.0; dim];
        let mut iters = 0;
        let mut stalled = 0;

        while iters < s.max_iters && kkt > s.tol_kkt {
            iters += 1;
            let fz = loop {
                self.prox_step(&y, &gy, step, &mut z);
                let fz = self.f.value_grad(&z, &mut gz);
                let mut lin = 0.0;
                let mut quad = 0.0;
                for i in 0..dim {
                    let d = z[i] - y[i];
                    lin += gy[i] * d;
                    quad += d * d / self.metric[i];
                }
                let model = fy + lin + (1.0 - s.sufficient_decrease) * quad / (2.0 * step);
                if fz.is_finite() && fz <= model + 1e-12 * fy.abs().max(1.0) {
                    break fz;
                }
                step *= s.shrink;
                if step < 1e-30 {
                    return Err(SrgmError::NumericalFailure {
                        iter: iters,
                        detail: "step size underflow in backtracking".into(),
                    });
                }
            };
            let obj_z = fz + self.penalty(&z);
            if !obj_z.is_finite() {
                return Err(SrgmError::NumericalFailure {
                    iter: iters,
                    detail: "objective is not finite".into(),
                });
            }
            // Differences of a few ulps are rounding noise, not an increase.
            let slack = 4.0 * f64::EPSILON * obj_x.abs().max(1.0);
            if obj_z > obj_x + slack {
                if momentum_on {
                    // Restart from the last accepted point without momentum.
                    y.copy_from_slice(&x);
                    fy = fx;
                    gy.copy_from_slice(&gx);
                    momentum_on = false;
                    t_k = 1.0;
                    continue;
                }
                // No decrease even from x itself: rounding floor reached.
                break;
            }
            let rel = (obj_x - obj_z).max(0.0) / obj_z.abs().max(1.0);
            let t_next = if s.accel {
                (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt()) / 2.0
            } else {
                1.0
            };
            let beta = (t_k - 1.0) / t_next;
            t_k = t_next;

            if beta > 0.0 {
                for i in 0..dim {
                    y[i] = z[i] + beta * (z[i] - x[i]);
                    if let Coord::Fixed = self.coords[i] {
                        y[i] = z[i];
                    }
                }
            }
            std::mem::swap(&mut x, &mut z);
            std::mem::swap(&mut gx, &mut gz);
            fx = fz;
            obj_x = obj_z;
            trace.push(obj_x);
            kkt = self.kkt_residual(&x, &gx);

            if beta > 0.0 {
                fy = self.f.value_grad(&y, &mut gy);
                momentum_on = true;
            } else {
                y.copy_from_slice(&x);
                fy = fx;
                gy.copy_from_slice(&gx);
                momentum_on = false;
            }

            if rel <= s.tol_obj {
                stalled += 1;
                if stalled >= STALL_WINDOW {
                    break;
                }
            } else {
                stalled = 0;
            }
        }

        Ok(Outcome {
            converged: kkt <= s.tol_kkt,
            x,
            smooth: fx,
            objective: obj_x,
            kkt,
            iters,
            trace,
        })
    }
}
