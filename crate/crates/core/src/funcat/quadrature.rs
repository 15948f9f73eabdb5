//! Double-exponential quadrature over finite and half-infinite intervals.
//!
//! Finite pieces use the tanh-sinh map, half-infinite pieces the exp-sinh
//! map. Both turn integrable endpoint singularities and exponential tails
//! into doubly exponential decay, after which the trapezoidal rule converges
//! geometrically in the number of nodes.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Largest |x| visited on the trapezoidal grid.
const X_MAX: f64 = 6.5;
/// Initial step; halved each level.
const H0: f64 = 0.5;
/// Levels computed before convergence is trusted.
const MIN_LEVELS: usize = 3;

/// An integration interval. Endpoints may be infinite.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Outcome {
    pub value: f64,
    pub nodes: usize,
}

/// Integrates `g` over `iv` until two successive step halvings agree to
/// `rel_tol / 10`, spending at most `max_nodes` evaluations.
pub(crate) fn integrate(
    g: &dyn Fn(f64) -> f64,
    iv: Interval,
    rel_tol: f64,
    max_nodes: usize,
) -> Result<Outcome> {
    if iv.lo >= iv.hi {
        return Ok(Outcome { value: 0.0, nodes: 0 });
    }
    let map = Map::for_interval(iv);
    let mut nodes = 0;
    let mut prev = f64::NAN;
    let mut h = H0;
    let mut level = 0;
    loop {
        let (value, used) = trapezoid(g, &map, h);
        nodes += used;
        level += 1;
        let change = (value - prev).abs();
        if level >= MIN_LEVELS && change <= 0.1 * rel_tol * value.abs().max(f64::MIN_POSITIVE) {
            return Ok(Outcome { value, nodes });
        }
        if level >= MIN_LEVELS && value == 0.0 && prev == 0.0 {
            return Ok(Outcome { value, nodes });
        }
        if nodes >= max_nodes {
            return Err(Error::Quadrature {
                tolerance: rel_tol,
                nodes,
                estimate: value,
                change,
            });
        }
        prev = value;
        h *= 0.5;
    }
}

enum Map {
    TanhSinh { mid: f64, half: f64 },
    ExpSinhUp { from: f64 },
    ExpSinhDown { to: f64 },
    /// Whole line: split at zero into two exp-sinh halves.
    Line,
}

impl Map {
    fn for_interval(iv: Interval) -> Map {
        match (iv.lo.is_finite(), iv.hi.is_finite()) {
            (true, true) => Map::TanhSinh {
                mid: 0.5 * (iv.lo + iv.hi),
                half: 0.5 * (iv.hi - iv.lo),
            },
            (true, false) => Map::ExpSinhUp { from: iv.lo },
            (false, true) => Map::ExpSinhDown { to: iv.hi },
            (false, false) => Map::Line,
        }
    }

    /// Abscissas and weights (including the Jacobian) at grid point `x`.
    fn points(&self, x: f64, out: &mut Vec<(f64, f64)>) {
        let u = FRAC_PI_2 * x.sinh();
        let du = FRAC_PI_2 * x.cosh();
        match *self {
            Map::TanhSinh { mid, half } => {
                let ch = u.cosh();
                let w = half * du / (ch * ch);
                // Offset from the nearer endpoint, computed without cancellation.
                let off = half / (u.abs().exp() * ch);
                let v = if u >= 0.0 { mid + half - off } else { mid - half + off };
                out.push((v, w));
            }
            Map::ExpSinhUp { from } => {
                let e = u.exp();
                out.push((from + e, du * e));
            }
            Map::ExpSinhDown { to } => {
                let e = u.exp();
                out.push((to - e, du * e));
            }
            Map::Line => {
                let e = u.exp();
                out.push((e, du * e));
                out.push((-e, du * e));
            }
        }
    }
}

fn trapezoid(g: &dyn Fn(f64) -> f64, map: &Map, h: f64) -> (f64, usize) {
    let mut pts = Vec::with_capacity(2);
    let eval_at = |x: f64, pts: &mut Vec<(f64, f64)>| -> Option<f64> {
        pts.clear();
        map.points(x, pts);
        let mut acc = 0.0;
        for &(v, w) in pts.iter() {
            if w == 0.0 || !w.is_finite() || !v.is_finite() {
                return None;
            }
            let y = g(v);
            if !y.is_finite() {
                return None;
            }
            acc += w * y;
        }
        Some(acc)
    };

    let mut nodes = 1;
    let mut sum = eval_at(0.0, &mut pts).unwrap_or(0.0);
    for dir in [1.0, -1.0] {
        let mut k = 1;
        loop {
            let x = dir * k as f64 * h;
            if x.abs() > X_MAX {
                break;
            }
            nodes += 1;
            match eval_at(x, &mut pts) {
                Some(term) => {
                    sum += term;
                    if x.abs() > 1.0 && term.abs() <= 1e-18 * sum.abs() {
                        break;
                    }
                }
                None => break,
            }
            k += 1;
        }
    }
    (h * sum, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        integrate(g, Interval { lo, hi }, 1e-10, 100_000).unwrap().value
    }

    #[test]
    fn polynomial_on_finite_interval() {
        let v = run(&|x| x * x, 0.0, 3.0);
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let v = run(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0);
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn exponential_tails() {
        let v = run(&|x: f64| (-x).exp(), 0.0, f64::INFINITY);
        assert!((v - 1.0).abs() < 1e-12);
        let v = run(&|x: f64| x.exp(), f64::NEG_INFINITY, 0.0);
        assert!((v - 1.0).abs() < 1e-12);
        // ∫ sech² = 2
        let v = run(&|x: f64| 1.0 / (x.cosh() * x.cosh()), f64::NEG_INFINITY, f64::INFINITY);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slow_exponential_tail() {
        // ∫_{-∞}^0 e^{0.05 v} dv = 20
        let v = run(&|x: f64| (0.05 * x).exp(), f64::NEG_INFINITY, 0.0);
        assert!((v - 20.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn empty_interval() {
        assert_eq!(run(&|_| 1.0, 2.0, 2.0), 0.0);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let err = integrate(&|x: f64| (50.0 * x).sin(), Interval { lo: 0.0, hi: 10.0 }, 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
