//! Quadrature on polygons (centroid fan of collapsed Gauss rules) and on segments.

use crate::geometry::{self, Point};
use thiserror::Error;

pub const MAX_EXACTNESS: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("unsupported exactness degree {0} (maximum {MAX_EXACTNESS})")]
    UnsupportedDegree(usize),
    #[error("zero-length face")]
    DegenerateFace,
    #[error("polygon is not star-shaped with respect to the given center")]
    NotStarShaped,
}

#[derive(Debug, Clone, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn unit_interval(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// Collapsed-coordinate product rule on a triangle, exact up to `degree`.
pub fn triangle_rule(a: Point, b: Point, c: Point, degree: usize) -> Result<QuadratureRule, QuadratureError> {
    if degree > MAX_EXACTNESS {
        return Err(QuadratureError::UnsupportedDegree(degree));
    }
    // the (1-u) Jacobian raises the degree in u by one
    let (u, wu) = unit_interval((degree + 2).div_ceil(2));
    let (v, wv) = unit_interval((degree + 1).div_ceil(2));
    let area2 = geometry::cross(geometry::sub(b, a), geometry::sub(c, a)).abs();
    let mut rule = QuadratureRule::default();
    for (ui, wui) in u.iter().zip(&wu) {
        for (vj, wvj) in v.iter().zip(&wv) {
            let r = *ui;
            let s = vj * (1.0 - ui);
            rule.points.push([
                a[0] + r * (b[0] - a[0]) + s * (c[0] - a[0]),
                a[1] + r * (b[1] - a[1]) + s * (c[1] - a[1]),
            ]);
            rule.weights.push(area2 * wui * wvj * (1.0 - ui));
        }
    }
    Ok(rule)
}

/// Rule on a polygon star-shaped with respect to `center`, built from its fan triangles.
pub fn cell_quadrature(poly: &[Point], center: Point, degree: usize) -> Result<QuadratureRule, QuadratureError> {
    if degree > MAX_EXACTNESS {
        return Err(QuadratureError::UnsupportedDegree(degree));
    }
    if !geometry::star_shaped_wrt(poly, center, 1e-12) {
        return Err(QuadratureError::NotStarShaped);
    }
    let mut rule = QuadratureRule::default();
    let n = poly.len();
    for i in 0..n {
        let t = triangle_rule(center, poly[i], poly[(i + 1) % n], degree)?;
        rule.points.extend(t.points);
        rule.weights.extend(t.weights);
    }
    Ok(rule)
}

/// Gauss rule on the segment [a, b], exact up to `degree`.
pub fn face_quadrature(a: Point, b: Point, degree: usize) -> Result<QuadratureRule, QuadratureError> {
    if degree > MAX_EXACTNESS {
        return Err(QuadratureError::UnsupportedDegree(degree));
    }
    let len = geometry::dist(a, b);
    if len == 0.0 {
        return Err(QuadratureError::DegenerateFace);
    }
    let (s, w) = unit_interval((degree + 1).div_ceil(2));
    Ok(QuadratureRule {
        points: s.iter().map(|&t| geometry::lerp(a, b, t)).collect(),
        weights: w.iter().map(|&wi| wi * len).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_small_cases() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
        for n in 1..12 {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_square_integrals() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let q = cell_quadrature(&sq, [0.5, 0.5], 0).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        let q = cell_quadrature(&sq, [0.5, 0.5], 4).unwrap();
        let v = q.integrate(|x| x[0] * x[0] * x[1] * x[1]);
        assert!((v - 1.0 / 9.0).abs() < 1e-15);
        assert!(q.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn pentagon_area() {
        let pent: Vec<Point> = (0..5)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                [a.cos(), a.sin()]
            })
            .collect();
        let q = cell_quadrature(&pent, [0.0, 0.0], 3).unwrap();
        let exact = 2.5 * (2.0 * std::f64::consts::PI / 5.0).sin();
        assert!((q.integrate(|_| 1.0) - exact).abs() < 1e-14);
    }

    #[test]
    fn face_rules() {
        let q = face_quadrature([0.0, 0.0], [2.0, 0.0], 0).unwrap();
        assert!((q.integrate(|_| 1.0) - 2.0).abs() < 1e-15);
        let q = face_quadrature([0.0, 0.0], [1.0, 0.0], 3).unwrap();
        assert_eq!(q.len(), 2);
        assert!((q.integrate(|x| x[0].powi(3)) - 0.25).abs() < 1e-15);
        assert_eq!(face_quadrature([1.0, 1.0], [1.0, 1.0], 2).unwrap_err(), QuadratureError::DegenerateFace);
    }

    #[test]
    fn degree_guard() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(
            cell_quadrature(&sq, [0.5, 0.5], 21).unwrap_err(),
            QuadratureError::UnsupportedDegree(21)
        );
        assert!(cell_quadrature(&sq, [0.5, 0.5], 20).is_ok());
    }
}
