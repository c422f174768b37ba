//! 2x2 tensor algebra and the face jump/average operators.

use crate::geometry::Point;
use thiserror::Error;

/// Row-major 2x2 tensor, `t[i][j]`.
pub type Tensor = [[f64; 2]; 2];

pub const ZERO: Tensor = [[0.0; 2]; 2];
pub const IDENTITY: Tensor = [[1.0, 0.0], [0.0, 1.0]];

#[inline]
pub fn trace(t: &Tensor) -> f64 {
    t[0][0] + t[1][1]
}

#[inline]
pub fn dev(t: &Tensor) -> Tensor {
    let h = 0.5 * trace(t);
    [[t[0][0] - h, t[0][1]], [t[1][0], t[1][1] - h]]
}

/// The single independent skew component (t12 - t21) / 2.
#[inline]
pub fn skew2(t: &Tensor) -> f64 {
    0.5 * (t[0][1] - t[1][0])
}

#[inline]
pub fn sym(t: &Tensor) -> Tensor {
    let o = 0.5 * (t[0][1] + t[1][0]);
    [[t[0][0], o], [o, t[1][1]]]
}

#[inline]
pub fn ddot(a: &Tensor, b: &Tensor) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

#[inline]
pub fn apply(t: &Tensor, n: Point) -> Point {
    [t[0][0] * n[0] + t[0][1] * n[1], t[1][0] * n[0] + t[1][1] * n[1]]
}

#[inline]
pub fn outer(v: Point, n: Point) -> Tensor {
    [[v[0] * n[0], v[0] * n[1]], [v[1] * n[0], v[1] * n[1]]]
}

#[inline]
pub fn add(a: &Tensor, b: &Tensor) -> Tensor {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

#[inline]
pub fn scaled(a: &Tensor, s: f64) -> Tensor {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

#[inline]
pub fn norm2(a: &Tensor) -> f64 {
    ddot(a, a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceValue {
    Scalar(f64),
    Vector(Point),
    Tensor(Tensor),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpAverage {
    /// Scalar -> vector, vector -> tensor (v ⊗ n), tensor -> vector (τ n).
    pub jump: TraceValue,
    /// Normal jump of a vector field, v⁺·n⁺ + v⁻·n⁻.
    pub jump_n: Option<f64>,
    pub average: TraceValue,
}

#[derive(Debug, Error, PartialEq)]
#[error("trace kinds on the two sides differ")]
pub struct TraceMismatch;

/// Jumps and averages across a face whose normal `n_plus` points out of the `plus` side.
/// Boundary faces pass `minus = None`.
pub fn jump_average(n_plus: Point, plus: TraceValue, minus: Option<TraceValue>) -> Result<JumpAverage, TraceMismatch> {
    let n_minus = [-n_plus[0], -n_plus[1]];
    let half = if minus.is_some() { 0.5 } else { 1.0 };
    match (plus, minus) {
        (TraceValue::Scalar(a), m) => {
            let b = match m {
                None => 0.0,
                Some(TraceValue::Scalar(b)) => b,
                _ => return Err(TraceMismatch),
            };
            Ok(JumpAverage {
                jump: TraceValue::Vector([a * n_plus[0] + b * n_minus[0], a * n_plus[1] + b * n_minus[1]]),
                jump_n: None,
                average: TraceValue::Scalar(half * (a + b)),
            })
        }
        (TraceValue::Vector(a), m) => {
            let b = match m {
                None => [0.0; 2],
                Some(TraceValue::Vector(b)) => b,
                _ => return Err(TraceMismatch),
            };
            Ok(JumpAverage {
                jump: TraceValue::Tensor(add(&outer(a, n_plus), &outer(b, n_minus))),
                jump_n: Some(a[0] * n_plus[0] + a[1] * n_plus[1] + b[0] * n_minus[0] + b[1] * n_minus[1]),
                average: TraceValue::Vector([half * (a[0] + b[0]), half * (a[1] + b[1])]),
            })
        }
        (TraceValue::Tensor(a), m) => {
            let b = match m {
                None => ZERO,
                Some(TraceValue::Tensor(b)) => b,
                _ => return Err(TraceMismatch),
            };
            let (ja, jb) = (apply(&a, n_plus), apply(&b, n_minus));
            Ok(JumpAverage {
                jump: TraceValue::Vector([ja[0] + jb[0], ja[1] + jb[1]]),
                jump_n: None,
                average: TraceValue::Tensor(scaled(&add(&a, &b), half)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_ops_examples() {
        let t = [[2.0, 0.0], [0.0, 0.0]];
        assert_eq!(dev(&t), [[1.0, 0.0], [0.0, -1.0]]);
        assert_eq!(trace(&t), 2.0);
        assert_eq!(skew2(&t), 0.0);
        let r = [[0.0, 1.0], [-1.0, 0.0]];
        assert_eq!(dev(&r), r);
        assert_eq!(skew2(&r), 1.0);
        assert_eq!(dev(&IDENTITY), ZERO);
        assert_eq!(trace(&IDENTITY), 2.0);
    }

    #[test]
    fn jump_examples() {
        let c = [1.5, -2.0];
        let ja = jump_average([0.3, 0.4], TraceValue::Vector(c), Some(TraceValue::Vector(c))).unwrap();
        assert_eq!(ja.jump, TraceValue::Tensor(ZERO));
        assert_eq!(ja.average, TraceValue::Vector(c));

        let ja = jump_average([1.0, 0.0], TraceValue::Scalar(1.0), Some(TraceValue::Scalar(0.0))).unwrap();
        assert_eq!(ja.jump, TraceValue::Vector([1.0, 0.0]));
        assert_eq!(ja.average, TraceValue::Scalar(0.5));

        let ja = jump_average([0.0, 1.0], TraceValue::Vector([2.0, 0.0]), None).unwrap();
        assert_eq!(ja.jump, TraceValue::Tensor([[0.0, 2.0], [0.0, 0.0]]));
        assert_eq!(ja.jump_n, Some(0.0));

        assert_eq!(
            jump_average([1.0, 0.0], TraceValue::Scalar(1.0), Some(TraceValue::Vector([0.0, 0.0]))),
            Err(TraceMismatch)
        );
    }
}
