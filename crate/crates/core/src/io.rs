//! File formats: field CSV, OBJ/PLY meshes and JSON reports. All writes go
//! through a temporary file in the target directory and a rename.

use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Axis, Grid, ScalarField};
use crate::geometry::SurfaceMesh;

/// Write `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text with header `x1,x2,value,valid`, rows of constant x2 in order.
pub fn field_to_csv(field: &ScalarField) -> String {
    let g = &field.grid;
    let mut out = String::with_capacity(g.len() * 72);
    out.push_str("x1,x2,value,valid\n");
    for j in 0..g.n2() {
        for i in 0..g.n1() {
            let k = g.idx(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                num(g.x1.at(i)),
                num(g.x2.at(j)),
                num(field.values[k]),
                field.valid[k]
            );
        }
    }
    out
}

pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<()> {
    write_atomic(path, field_to_csv(field).as_bytes())
}

pub fn read_field_csv(path: &Path) -> Result<ScalarField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    field_from_csv(&text).map_err(|msg| Error::Parse {
        path: path.display().to_string(),
        msg,
    })
}

fn axis_from(samples: &[f64]) -> std::result::Result<Axis, String> {
    let n = samples.len();
    if n == 1 {
        return Ok(Axis::from_len(samples[0], 1.0, 1));
    }
    let step = (samples[n - 1] - samples[0]) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err("axis is not strictly increasing".into());
    }
    let axis = Axis::from_len(samples[0], step, n);
    for (k, &x) in samples.iter().enumerate() {
        if (x - axis.at(k)).abs() > 1e-6 * step {
            return Err(format!("axis sample {x} breaks uniform spacing"));
        }
    }
    Ok(axis)
}

pub fn field_from_csv(text: &str) -> std::result::Result<ScalarField, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x1", "x2", "value", "valid"] {
        return Err(format!("unexpected header {headers:?}"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let f = |k: usize| rec[k].trim().parse::<f64>().map_err(|e| format!("{}: {e}", &rec[k]));
        let valid = match rec[3].trim() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => return Err(format!("bad valid flag '{other}'")),
        };
        rows.push((f(0)?, f(1)?, f(2)?, valid));
    }
    if rows.is_empty() {
        return Err("no rows".into());
    }
    let n1 = rows.iter().take_while(|r| r.1 == rows[0].1).count();
    if rows.len() % n1 != 0 {
        return Err("row count is not a multiple of the row length".into());
    }
    let n2 = rows.len() / n1;
    let x1: Vec<f64> = rows[..n1].iter().map(|r| r.0).collect();
    let x2: Vec<f64> = (0..n2).map(|j| rows[j * n1].1).collect();
    let grid = Grid::new(axis_from(&x1)?, axis_from(&x2)?);
    for (k, r) in rows.iter().enumerate() {
        let (i, j) = grid.ij(k);
        if r.0 != x1[i] || r.1 != x2[j] {
            return Err(format!("row {} is out of grid order", k + 2));
        }
    }
    Ok(ScalarField::new(
        grid,
        rows.iter().map(|r| r.2).collect(),
        rows.iter().map(|r| r.3).collect(),
    ))
}

/// Valid vertices in row-major order and triangles of fully valid cells.
fn triangulate(mesh: &SurfaceMesh) -> (Vec<usize>, Vec<[usize; 3]>) {
    let g = &mesh.grid;
    let mut index = vec![usize::MAX; g.len()];
    let mut verts = Vec::new();
    for k in 0..g.len() {
        if mesh.valid[k] {
            index[k] = verts.len();
            verts.push(k);
        }
    }
    let mut tris = Vec::new();
    for j in 0..g.n2().saturating_sub(1) {
        for i in 0..g.n1().saturating_sub(1) {
            let c = [g.idx(i, j), g.idx(i + 1, j), g.idx(i + 1, j + 1), g.idx(i, j + 1)];
            if c.iter().all(|&k| mesh.valid[k]) {
                let v = c.map(|k| index[k]);
                tris.push([v[0], v[1], v[2]]);
                tris.push([v[0], v[2], v[3]]);
            }
        }
    }
    (verts, tris)
}

pub fn mesh_to_obj(mesh: &SurfaceMesh) -> String {
    let (verts, tris) = triangulate(mesh);
    let mut out = String::new();
    let _ = writeln!(out, "# s={} nodes={}x{}", mesh.s, mesh.grid.n1(), mesh.grid.n2());
    for k in verts {
        let p = mesh.points[k];
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    for t in tris {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn mesh_to_ply(mesh: &SurfaceMesh) -> String {
    let (verts, tris) = triangulate(mesh);
    let mut out = String::new();
    let _ = write!(
        out,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        verts.len(),
        tris.len()
    );
    for k in verts {
        let p = mesh.points[k];
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    for t in tris {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn write_obj(path: &Path, mesh: &SurfaceMesh) -> Result<()> {
    write_atomic(path, mesh_to_obj(mesh).as_bytes())
}

pub fn write_ply(path: &Path, mesh: &SurfaceMesh) -> Result<()> {
    write_atomic(path, mesh_to_ply(mesh).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{unit_sphere, Vec3};

    #[test]
    fn csv_round_trip_is_exact() {
        let g = Grid::rect(-1.0, 1.0, -0.5, 0.5, 0.1).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (x + y < 0.7).then(|| (x * 3.1).sin() / 7.0 + y));
        let back = field_from_csv(&field_to_csv(&f)).unwrap();
        assert!(back.grid.same_nodes(&g));
        assert_eq!(back.valid, f.valid);
        for k in 0..g.len() {
            if f.valid[k] {
                assert_eq!(back.values[k].to_bits(), f.values[k].to_bits());
            }
        }
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(field_from_csv("a,b\n1,2\n").is_err());
        assert!(field_from_csv("x1,x2,value,valid\n0,0,1,maybe\n").is_err());
    }

    #[test]
    fn obj_skips_invalid_cells() {
        let g = Grid::rect(0.0, 2.0, 0.0, 1.0, 1.0).unwrap();
        let mut m = unit_sphere(&g);
        assert_eq!(mesh_to_obj(&m).matches("\nf ").count(), 4);
        m.valid[0] = false;
        m.points[0] = Vec3::from_element(f64::NAN);
        let obj = mesh_to_obj(&m);
        assert_eq!(obj.matches("\nf ").count(), 2);
        assert_eq!(obj.matches("\nv ").count(), 5);
        assert!(!obj.contains("NaN"));
    }
}
