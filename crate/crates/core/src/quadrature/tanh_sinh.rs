use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const T_MAX: f64 = 6.0;
/// Nodes closer than this to an endpoint may return non-finite values.
const EDGE: f64 = 1e-100;

#[derive(Debug, Clone, Copy)]
struct Node {
    /// Position in (0, 1).
    x: f64,
    /// `1 - x`, computed without cancellation.
    xc: f64,
    w: f64,
}

/// Tanh-sinh (double exponential) rule on the unit interval at step
/// `h = 2^-level`.
///
/// Nodes cluster doubly exponentially at both endpoints, so integrable
/// algebraic endpoint singularities are handled without special casing.
#[derive(Debug, Clone)]
pub struct TanhSinhRule {
    level: u32,
    nodes: Vec<Node>,
}

impl TanhSinhRule {
    pub fn new(level: u32) -> Self {
        let h = 0.5f64.powi(level as i32);
        let k_max = (T_MAX / h).ceil() as i64;
        let mut nodes = Vec::with_capacity(2 * k_max as usize + 1);
        for k in -k_max..=k_max {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            // x = 1 / (1 + e^{-2u}), 1 - x = 1 / (1 + e^{2u})
            let e = (-2.0 * u.abs()).exp();
            let (x, xc) = if u >= 0.0 {
                (1.0 / (1.0 + e), e / (1.0 + e))
            } else {
                (e / (1.0 + e), 1.0 / (1.0 + e))
            };
            // dx/dt = (pi/2) cosh t sech^2 u / 2, with sech^2 u = 4 e / (1 + e)^2
            let w = h * FRAC_PI_2 * t.cosh() * 2.0 * e / ((1.0 + e) * (1.0 + e));
            if x > 0.0 && xc > 0.0 && w > 0.0 && w.is_finite() {
                nodes.push(Node { x, xc, w });
            }
        }
        Self { level, nodes }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`. Abscissae close to `a` are formed as
    /// `a + (b - a) x`, so a singularity at the left endpoint keeps full
    /// relative precision. Non-finite values within a relative distance
    /// `1e-100` of an endpoint are dropped.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let len = b - a;
        let mut sum = 0.0;
        for node in &self.nodes {
            let x = if node.x <= 0.5 {
                a + len * node.x
            } else {
                b - len * node.xc
            };
            if x <= a || x >= b {
                continue;
            }
            let v = f(x);
            if !v.is_finite() && node.x.min(node.xc) < EDGE {
                // Overflow in the last few nodes of an integrable endpoint
                // singularity; their weight is far below double precision.
                continue;
            }
            if v != 0.0 {
                sum += node.w * v;
            }
        }
        sum * len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEstimate {
    pub level: u32,
    pub value: f64,
    /// Change from the previous level (`NaN` for the first).
    pub delta: f64,
}

/// Sequence of level estimates ending at convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub value: f64,
    pub error: f64,
    pub levels: Vec<LevelEstimate>,
}

impl Refinement {
    /// Relative change between the last two levels.
    pub fn last_relative_change(&self) -> f64 {
        self.error / self.value.abs().max(f64::MIN_POSITIVE)
    }
}

/// Evaluates `estimate(level)` for `start, start + 1, ...` until two
/// successive values differ by less than `max(abs_tol, rel_tol |value|)`,
/// allowing at most `max_refinements` refinements.
pub fn refine_levels<F: FnMut(u32) -> f64>(
    start: u32,
    max_refinements: usize,
    rel_tol: f64,
    abs_tol: f64,
    mut estimate: F,
) -> Result<Refinement> {
    let mut levels = Vec::new();
    let mut prev = estimate(start);
    levels.push(LevelEstimate {
        level: start,
        value: prev,
        delta: f64::NAN,
    });
    for k in 1..=max_refinements as u32 {
        let level = start + k;
        let value = estimate(level);
        let delta = (value - prev).abs();
        levels.push(LevelEstimate {
            level,
            value,
            delta,
        });
        if !value.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite estimate at level {level}"
            )));
        }
        // Require at least two refinements so the diagnostics show a trend.
        if k >= 2 && delta <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Refinement {
                value,
                error: delta,
                levels,
            });
        }
        prev = value;
    }
    let last = levels.last().copied().expect("non-empty");
    Err(Error::Quadrature(format!(
        "no convergence after {max_refinements} refinements: last change {:e} at value {:e}",
        last.delta, last.value
    )))
}
