use super::{layout_for, CellBasis, DgSpace, SpaceError};
use crate::geometry::{self, Point};
use crate::mesh::PolyMesh;
use crate::quadrature::{cell_quadrature, face_quadrature};
use rayon::prelude::*;

/// Basis values and gradients at the quadrature points of one cell (row = point).
#[derive(Debug, Clone)]
pub struct CellTab {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub n: usize,
    pub phi: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
}

impl CellTab {
    #[inline]
    pub fn phi_at(&self, q: usize) -> &[f64] {
        &self.phi[q * self.n..(q + 1) * self.n]
    }

    #[inline]
    pub fn grad_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grad[q * self.n..(q + 1) * self.n]
    }
}

#[derive(Debug, Clone)]
pub struct FaceSide {
    pub cell: usize,
    pub n: usize,
    pub phi: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
}

impl FaceSide {
    #[inline]
    pub fn phi_at(&self, q: usize) -> &[f64] {
        &self.phi[q * self.n..(q + 1) * self.n]
    }

    #[inline]
    pub fn grad_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grad[q * self.n..(q + 1) * self.n]
    }
}

#[derive(Debug, Clone)]
pub struct FaceTab {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Side 0 is the first adjacent cell of the face.
    pub sides: Vec<FaceSide>,
}

/// Mesh, space and every tabulated quadrature rule, shared by assembly and analysis.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: PolyMesh,
    pub space: DgSpace,
    pub cells: Vec<CellTab>,
    pub faces: Vec<FaceTab>,
    pub exactness: usize,
}

fn tabulate(basis: &CellBasis, points: &[Point]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let n = basis.n_modes();
    let mut phi = vec![0.0; points.len() * n];
    let mut grad = vec![[0.0; 2]; points.len() * n];
    for (q, &x) in points.iter().enumerate() {
        basis.eval_into(x, &mut phi[q * n..(q + 1) * n], &mut grad[q * n..(q + 1) * n]);
    }
    (phi, grad)
}

impl Discretization {
    /// Default quadrature exactness 2 max(p_p, p_f) + 2.
    pub fn new(mesh: PolyMesh, degree_p: usize, degree_f: usize) -> Result<Self, SpaceError> {
        let k = 2 * degree_p.max(degree_f) + 2;
        Self::with_exactness(mesh, degree_p, degree_f, k)
    }

    pub fn with_exactness(mesh: PolyMesh, degree_p: usize, degree_f: usize, exactness: usize) -> Result<Self, SpaceError> {
        if degree_p < 1 || degree_f < 1 {
            return Err(SpaceError::Degree(degree_p, degree_f));
        }
        let degree_of = |c: usize| match mesh.cells[c].region {
            crate::mesh::Region::Poro => degree_p,
            crate::mesh::Region::Fluid => degree_f,
        };
        let built: Vec<(CellBasis, CellTab)> = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let poly = mesh.cell_points(c);
                let p = degree_of(c);
                let rule = cell_quadrature(&poly, mesh.cells[c].centroid, exactness.max(2 * p))
                    .map_err(|source| SpaceError::Quadrature { cell: c, source })?;
                let (lo, hi) = geometry::bounding_box(&poly);
                let basis = CellBasis::new(p, lo, hi, &rule);
                let (phi, grad) = tabulate(&basis, &rule.points);
                let n = basis.n_modes();
                Ok((basis, CellTab { points: rule.points, weights: rule.weights, n, phi, grad }))
            })
            .collect::<Result<_, SpaceError>>()?;
        let (bases, cells): (Vec<_>, Vec<_>) = built.into_iter().unzip();
        let faces = mesh
            .faces
            .par_iter()
            .enumerate()
            .map(|(fi, f)| {
                let rule = face_quadrature(f.a, f.b, exactness).map_err(|source| SpaceError::FaceQuadrature { face: fi, source })?;
                let mut sides = Vec::with_capacity(2);
                for c in std::iter::once(f.cells.0).chain(f.cells.1) {
                    let (phi, grad) = tabulate(&bases[c], &rule.points);
                    sides.push(FaceSide { cell: c, n: bases[c].n_modes(), phi, grad });
                }
                Ok(FaceTab { points: rule.points, weights: rule.weights, sides })
            })
            .collect::<Result<_, SpaceError>>()?;
        let layout = layout_for(&mesh, degree_p, degree_f);
        Ok(Discretization { space: DgSpace { degree_p, degree_f, bases, layout }, mesh, cells, faces, exactness })
    }

    pub fn ndof(&self) -> usize {
        self.space.layout.ndof()
    }

    /// L² projection of a scalar function onto the first `n` modes of cell `c`.
    pub fn project_scalar(&self, c: usize, n: usize, f: impl Fn(Point) -> f64) -> Vec<f64> {
        let t = &self.cells[c];
        let mut out = vec![0.0; n];
        for q in 0..t.weights.len() {
            let v = t.weights[q] * f(t.points[q]);
            let phi = t.phi_at(q);
            for i in 0..n {
                out[i] += v * phi[i];
            }
        }
        out
    }

    /// Cellwise L² projection of a vector field onto a p-vector block (U, W, V or Z).
    pub fn project_pvec(&self, f: impl Fn(Point) -> [f64; 2] + Sync) -> Vec<f64> {
        let l = &self.space.layout;
        let mut out = vec![0.0; 2 * l.n_pcells * l.n_p];
        for c in self.mesh.cells_in(crate::mesh::Region::Poro) {
            for a in 0..2 {
                let v = self.project_scalar(c, l.n_p, |x| f(x)[a]);
                let o = l.pvec(c, a);
                out[o..o + l.n_p].copy_from_slice(&v);
            }
        }
        out
    }

    /// Cellwise L² projection of a tensor field onto the S block.
    pub fn project_ften(&self, f: impl Fn(Point) -> [[f64; 2]; 2] + Sync) -> Vec<f64> {
        let l = &self.space.layout;
        let mut out = vec![0.0; 4 * l.n_fcells * l.n_f];
        for c in self.mesh.cells_in(crate::mesh::Region::Fluid) {
            for a in 0..2 {
                for b in 0..2 {
                    let v = self.project_scalar(c, l.n_f, |x| f(x)[a][b]);
                    let o = l.ften(c, a, b);
                    out[o..o + l.n_f].copy_from_slice(&v);
                }
            }
        }
        out
    }

    /// Cellwise L² projection of a scalar field onto the R block.
    pub fn project_fr(&self, f: impl Fn(Point) -> f64 + Sync) -> Vec<f64> {
        let l = &self.space.layout;
        let mut out = vec![0.0; l.n_fcells * l.n_r];
        for c in self.mesh.cells_in(crate::mesh::Region::Fluid) {
            let v = self.project_scalar(c, l.n_r, &f);
            let o = l.fr(c);
            out[o..o + l.n_r].copy_from_slice(&v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_cartesian, RegionBox};
    use crate::space::Block;

    #[test]
    fn layout_sizes() {
        let mesh = generate_cartesian(&RegionBox::manufactured_pair(), 2, 2).unwrap();
        let d = Discretization::new(mesh, 2, 3).unwrap();
        let l = &d.space.layout;
        assert_eq!(l.n_p, 6);
        assert_eq!(l.n_f, 10);
        assert_eq!(l.n_r, 6);
        assert_eq!(l.block_len(Block::U), 4 * 2 * 6);
        assert_eq!(l.block_len(Block::S), 4 * 4 * 10);
        assert_eq!(l.block_len(Block::R), 4 * 6);
        assert_eq!(l.ndof(), 4 * 48 + 160 + 24);
        for w in l.offsets.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn degree_zero_rejected() {
        let mesh = generate_cartesian(&RegionBox::manufactured_pair(), 1, 1).unwrap();
        assert_eq!(Discretization::new(mesh, 0, 1).unwrap_err(), SpaceError::Degree(0, 1));
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let mesh = generate_cartesian(&RegionBox::manufactured_pair(), 1, 1).unwrap();
        let d = Discretization::new(mesh, 2, 2).unwrap();
        let f = |x: Point| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1] - x[1] * x[1];
        let c = d.project_scalar(0, 6, f);
        let (v, _) = d.space.bases[0].eval([-0.3, 0.7]);
        let val: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((val - f([-0.3, 0.7])).abs() < 1e-12);
    }
}
