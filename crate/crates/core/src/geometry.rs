//! Small planar geometry kit shared by the mesh, quadrature and assembly code.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn lerp(a: Point, b: Point, s: f64) -> Point {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// Signed area of a closed polygon (positive when counter-clockwise).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * s
}

/// Area centroid of a polygon with nonzero area.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    // shift to the first vertex to limit cancellation on far-away cells
    let o = poly[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = sub(poly[i], o);
        let q = sub(poly[(i + 1) % n], o);
        let c = cross(p, q);
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
}

/// Largest vertex-to-vertex distance.
pub fn diameter(poly: &[Point]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            h = h.max(dist(poly[i], poly[j]));
        }
    }
    h
}

pub fn bounding_box(poly: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in poly {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

pub fn perimeter(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| dist(poly[i], poly[(i + 1) % n])).sum()
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = cross(sub(b, a), sub(c, a));
    let o2 = cross(sub(b, a), sub(d, a));
    let o3 = cross(sub(d, c), sub(a, c));
    let o4 = cross(sub(d, c), sub(b, c));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// True when no two non-adjacent edges of the loop intersect.
pub fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(a, b, poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Every fan triangle (c, v_i, v_{i+1}) has strictly positive area.
pub fn star_shaped_wrt(poly: &[Point], c: Point, rel_tol: f64) -> bool {
    let n = poly.len();
    let a = signed_area(poly).abs();
    (0..n).all(|i| cross(sub(poly[i], c), sub(poly[(i + 1) % n], c)) > rel_tol * a)
}

/// Point-in-polygon by winding number; points on the boundary may go either way.
pub fn contains(poly: &[Point], x: Point) -> bool {
    let n = poly.len();
    let mut wn = 0i32;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = cross(sub(b, a), sub(x, a));
        if a[1] <= x[1] {
            if b[1] > x[1] && side > 0.0 {
                wn += 1;
            }
        } else if b[1] <= x[1] && side < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

/// Clip a convex polygon against the half-plane {x : (x - p)·n <= 0}.
pub fn clip_halfplane(poly: &[Point], p: Point, n: Point) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let m = poly.len();
    for i in 0..m {
        let a = poly[i];
        let b = poly[(i + 1) % m];
        let da = dot(sub(a, p), n);
        let db = dot(sub(b, p), n);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            out.push(lerp(a, b, da / (da - db)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_measures() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!((signed_area(&sq) - 1.0).abs() < 1e-15);
        let c = centroid(&sq);
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
        assert!((diameter(&sq) - 2f64.sqrt()).abs() < 1e-15);
        assert!(is_simple(&sq));
        assert!(star_shaped_wrt(&sq, c, 1e-12));
        assert!(contains(&sq, [0.3, 0.9]));
        assert!(!contains(&sq, [1.3, 0.9]));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bt = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(!is_simple(&bt));
    }

    #[test]
    fn clipping_halves_square() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let h = clip_halfplane(&sq, [0.5, 0.0], [1.0, 0.0]);
        assert!((signed_area(&h) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn l_shape_not_star_wrt_centroid() {
        // thin L: centroid falls outside the polygon
        let l = [
            [0.0, 0.0],
            [10.0, 0.0],
            [10.0, 0.1],
            [0.1, 0.1],
            [0.1, 10.0],
            [0.0, 10.0],
        ];
        let c = centroid(&l);
        assert!(!star_shaped_wrt(&l, c, 1e-12));
    }
}
