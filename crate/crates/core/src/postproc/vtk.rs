//! Legacy ASCII VTK (v3.0) unstructured grid with polygon cells.

use super::{FieldSnapshot, PointFields, PostError};
use crate::mesh::{PolyMesh, Region};
use crate::space::Discretization;
use std::fmt::Write as _;
use std::path::Path;

const VTK_POLYGON: u8 = 7;

type Getter = fn(&PointFields) -> Option<[f64; 3]>;

fn v(o: Option<[f64; 2]>) -> Option<[f64; 3]> {
    o.map(|x| [x[0], x[1], 0.0])
}

fn s(o: Option<f64>) -> Option<[f64; 3]> {
    o.map(|x| [x, 0.0, 0.0])
}

fn fields() -> Vec<(&'static str, bool, Getter)> {
    vec![
        ("u_p", true, |f| v(f.u)),
        ("w_p", true, |f| v(f.w)),
        ("u_p_rate", true, |f| v(f.u_dot)),
        ("w_p_rate", true, |f| v(f.w_dot)),
        ("u_f", true, |f| v(f.u_f)),
        ("p_p", false, |f| s(f.p_p)),
        ("p_f", false, |f| s(f.p_f)),
    ]
}

/// Write the mesh and, if given, cell-averaged and vertex-sampled fields.
/// Vertex values average the traces of all incident cells where the field is defined.
pub fn export_vtk(mesh: &PolyMesh, fields_of: Option<(&Discretization, &FieldSnapshot)>, path: &Path) -> Result<(), PostError> {
    let mut o = String::new();
    let title = match fields_of {
        Some((_, s)) => format!("polydg t={:.6} k={}", s.t, s.k),
        None => "polydg mesh".to_string(),
    };
    let _ = writeln!(o, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(o, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(o, "{:.16e} {:.16e} 0", v[0], v[1]);
    }
    let total: usize = mesh.cells.iter().map(|c| c.verts.len() + 1).sum();
    let _ = writeln!(o, "CELLS {} {}", mesh.n_cells(), total);
    for c in &mesh.cells {
        let _ = write!(o, "{}", c.verts.len());
        for v in &c.verts {
            let _ = write!(o, " {v}");
        }
        o.push('\n');
    }
    let _ = writeln!(o, "CELL_TYPES {}", mesh.n_cells());
    for _ in &mesh.cells {
        let _ = writeln!(o, "{VTK_POLYGON}");
    }
    let _ = writeln!(o, "CELL_DATA {}", mesh.n_cells());
    let _ = writeln!(o, "SCALARS region int 1\nLOOKUP_TABLE default");
    for c in &mesh.cells {
        let _ = writeln!(o, "{}", if c.region == Region::Poro { 0 } else { 1 });
    }
    if let Some((d, snap)) = fields_of {
        let means: Vec<PointFields> = (0..mesh.n_cells()).map(|c| snap.cell_mean(d, c)).collect();
        for (name, vector, get) in fields() {
            write_values(&mut o, name, vector, means.iter().map(|m| get(m).unwrap_or([0.0; 3])));
        }
        let mut sums = vec![vec![([0.0; 3], 0usize); mesh.vertices.len()]; fields().len()];
        for (c, cell) in mesh.cells.iter().enumerate() {
            for &v in &cell.verts {
                let pf = snap.eval(d, c, mesh.vertices[v]);
                for (k, (_, _, get)) in fields().iter().enumerate() {
                    if let Some(val) = get(&pf) {
                        let e = &mut sums[k][v];
                        for i in 0..3 {
                            e.0[i] += val[i];
                        }
                        e.1 += 1;
                    }
                }
            }
        }
        let _ = writeln!(o, "POINT_DATA {}", mesh.vertices.len());
        for (k, (name, vector, _)) in fields().into_iter().enumerate() {
            let vals = sums[k].iter().map(|(s, n)| if *n == 0 { [0.0; 3] } else { s.map(|x| x / *n as f64) });
            write_values(&mut o, name, vector, vals);
        }
    }
    std::fs::write(path, o).map_err(|source| PostError::Io { path: path.display().to_string(), source })
}

fn write_values(o: &mut String, name: &str, vector: bool, vals: impl Iterator<Item = [f64; 3]>) {
    if vector {
        let _ = writeln!(o, "VECTORS {name} double");
        for v in vals {
            let _ = writeln!(o, "{:.10e} {:.10e} {:.10e}", v[0], v[1], v[2]);
        }
    } else {
        let _ = writeln!(o, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in vals {
            let _ = writeln!(o, "{:.10e}", v[0]);
        }
    }
}
