//! Mesh generation and file output.
//!
//! Generating curves sweep into tensor-grid meshes (rotate by phi or
//! translate by t), project to 3-space through the stereographic map, and
//! export as OBJ. Trajectories export as CSV and portraits/analyses as JSON.
//! All floats print in their shortest round-trip form, so identical inputs
//! produce byte-identical files, and every writer goes through a temp file
//! plus rename.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::analyze::{CurveAnalysis, PhasePortrait};
use crate::charts::{chart_point, ChartKind, SurfaceChart};
use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::oracle::ResidualSample;
use crate::par;

/// Tensor-grid mesh with vertices still in R^4.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 4]>,
    /// Quad corner indices, consistently wound.
    pub faces: Vec<[u32; 4]>,
    pub rows: usize,
    pub cols: usize,
    /// Sweep coordinate of each column.
    pub w_values: Vec<f64>,
    /// Optional per-vertex scalar (mean curvature or residual).
    pub scalars: Option<Vec<f64>>,
}

/// Mesh after stereographic projection to 3-space.
#[derive(Debug, Clone)]
pub struct ProjectedMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 4]>,
    /// Vertices too close to the projection pole; faces touching them were
    /// dropped.
    pub flagged_vertices: Vec<u32>,
    pub dropped_faces: usize,
}

/// Vertex positions too close to the pole are flagged rather than mapped.
/// Looser than the hard error threshold of `ambient::stereographic`.
pub const MESH_POLE_TOL: f64 = 1e-6;
const _: () = assert!(MESH_POLE_TOL > crate::ambient::POLE_TOL);

fn face_area4(q: [&[f64; 4]; 4]) -> f64 {
    // Split into two triangles; area from the cross-product norms in R^4
    // computed via the Gram determinant.
    let tri = |a: &[f64; 4], b: &[f64; 4], c: &[f64; 4]| -> f64 {
        let u: [f64; 4] = std::array::from_fn(|i| b[i] - a[i]);
        let v: [f64; 4] = std::array::from_fn(|i| c[i] - a[i]);
        let uu: f64 = u.iter().map(|x| x * x).sum();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let uv: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
        0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
    };
    tri(q[0], q[1], q[2]) + tri(q[0], q[2], q[3])
}

/// Sweep a sampled generating curve over the chart's sweep parameter.
///
/// When the range covers a full turn of a rotational chart the grid closes
/// up and the last column of quads wraps around to the first.
pub fn sweep(chart: &SurfaceChart, range: (f64, f64), samples: usize) -> Result<SurfaceMesh> {
    if samples < 2 {
        return Err(Error::usage("sweep needs at least two samples"));
    }
    if range.1 <= range.0 {
        return Err(Error::usage("empty sweep range"));
    }
    let closed = chart.kind == ChartKind::Rotational
        && (range.1 - range.0 - 2.0 * std::f64::consts::PI).abs() < 1e-12;
    let rows = chart.curve.len();
    let cols = samples;
    let dw = if closed {
        (range.1 - range.0) / cols as f64
    } else {
        (range.1 - range.0) / (cols - 1) as f64
    };
    let w_values: Vec<f64> = (0..cols).map(|j| range.0 + dw * j as f64).collect();

    let row_idx: Vec<usize> = (0..rows).collect();
    let row_verts: Vec<Result<Vec<[f64; 4]>>> = par::map_collect(&row_idx, |&i| {
        let st = &chart.curve[i];
        w_values
            .iter()
            .map(|&w| Ok(chart_point(chart.kind, st.u, st.v, w)?.coords()))
            .collect()
    });
    let mut vertices = Vec::with_capacity(rows * cols);
    for row in row_verts {
        vertices.extend(row?);
    }

    let mut faces = Vec::new();
    let wrap = if closed { cols } else { cols - 1 };
    for i in 0..rows - 1 {
        for j in 0..wrap {
            let jn = (j + 1) % cols;
            let f = [
                (i * cols + j) as u32,
                ((i + 1) * cols + j) as u32,
                ((i + 1) * cols + jn) as u32,
                (i * cols + jn) as u32,
            ];
            let quad = [
                &vertices[f[0] as usize],
                &vertices[f[1] as usize],
                &vertices[f[2] as usize],
                &vertices[f[3] as usize],
            ];
            if face_area4(quad) < 1e-12 {
                return Err(Error::regularity(format!(
                    "degenerate face at grid cell ({i}, {j})"
                )));
            }
            faces.push(f);
        }
    }
    Ok(SurfaceMesh { vertices, faces, rows, cols, w_values, scalars: None })
}

impl SurfaceMesh {
    /// Attach the finite-difference soliton residual magnitude per vertex.
    pub fn with_residual_scalars(mut self, residuals: &[ResidualSample]) -> Result<Self> {
        if residuals.len() != self.vertices.len() {
            return Err(Error::usage(format!(
                "{} residual samples for {} vertices",
                residuals.len(),
                self.vertices.len()
            )));
        }
        self.scalars = Some(residuals.iter().map(|r| r.residual_fd.abs()).collect());
        Ok(self)
    }
}

/// Stereographic projection of a raw mesh. Vertices within `MESH_POLE_TOL`
/// of the pole are flagged and their faces dropped.
pub fn project_mesh(mesh: &SurfaceMesh) -> ProjectedMesh {
    let mut vertices = Vec::with_capacity(mesh.vertices.len());
    let mut flagged = Vec::new();
    for (i, v) in mesh.vertices.iter().enumerate() {
        let d = 1.0 - v[2];
        if d.abs() < MESH_POLE_TOL {
            flagged.push(i as u32);
            vertices.push([f64::NAN, f64::NAN, v[3]]);
        } else {
            vertices.push([v[0] / d, v[1] / d, v[3]]);
        }
    }
    let mut faces = Vec::with_capacity(mesh.faces.len());
    let mut dropped = 0;
    for f in &mesh.faces {
        if f.iter().any(|&i| flagged.binary_search(&i).is_ok()) {
            dropped += 1;
        } else {
            faces.push(*f);
        }
    }
    ProjectedMesh { vertices, faces, flagged_vertices: flagged, dropped_faces: dropped }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// OBJ text for a projected mesh: `v x y z` lines then 1-based `f` rows,
/// quads by default or triangles when `triangulate` is set.
pub fn obj_string(mesh: &ProjectedMesh, triangulate: bool) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        if v[0].is_nan() {
            // Flagged pole vertex: keep indexing stable with a placeholder.
            out.push_str("v 0 0 0\n");
        } else {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
    }
    for f in &mesh.faces {
        let (a, b, c, d) = (f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1);
        if triangulate {
            let _ = writeln!(out, "f {a} {b} {c}");
            let _ = writeln!(out, "f {a} {c} {d}");
        } else {
            let _ = writeln!(out, "f {a} {b} {c} {d}");
        }
    }
    out
}

pub fn export_mesh_obj(mesh: &ProjectedMesh, path: &Path, triangulate: bool) -> Result<()> {
    write_atomic(path, obj_string(mesh, triangulate).as_bytes())
}

/// Trajectory CSV: header `s,u,v,theta` (or `s,u,theta` for planar runs),
/// one row per accepted step.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str(traj.csv_header());
    out.push('\n');
    for i in 0..traj.len() {
        let _ = write!(out, "{}", traj.s_values()[i]);
        for x in traj.state(i) {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

pub fn export_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    write_atomic(path, trajectory_csv(traj).as_bytes())
}

/// Parse a trajectory CSV produced by [`trajectory_csv`] back into rows.
/// Returns the header fields and the numeric rows.
pub fn parse_trajectory_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::usage("empty trajectory csv"))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::usage(format!("csv line {}: {e}", ln + 2)))?;
        if row.len() != header.len() {
            return Err(Error::usage(format!(
                "csv line {} has {} fields, expected {}",
                ln + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Residual report CSV: `s,w,H_closed,H_fd,NX,residual` where the NX and
/// residual columns come from the finite-difference route.
pub fn residual_csv(samples: &[ResidualSample]) -> String {
    let mut out = String::from("s,w,H_closed,H_fd,NX,residual\n");
    for r in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.s, r.w, r.h_closed, r.h_fd, r.n_dot_x, r.residual_fd
        );
    }
    out
}

pub fn export_residual_csv(samples: &[ResidualSample], path: &Path) -> Result<()> {
    write_atomic(path, residual_csv(samples).as_bytes())
}

pub fn export_portrait_json(portrait: &PhasePortrait, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(portrait)
        .map_err(|e| Error::numerical(format!("portrait serialization: {e}")))?;
    write_atomic(path, text.as_bytes())
}

pub fn export_analysis_json<T: serde::Serialize>(analysis: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(analysis)
        .map_err(|e| Error::numerical(format!("analysis serialization: {e}")))?;
    write_atomic(path, text.as_bytes())
}

/// JSON dump of a raw mesh (vertices in R^4).
pub fn export_mesh_json(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    #[derive(serde::Serialize)]
    struct MeshDump<'a> {
        rows: usize,
        cols: usize,
        w_values: &'a [f64],
        vertices: &'a [[f64; 4]],
        faces: &'a [[u32; 4]],
        #[serde(skip_serializing_if = "Option::is_none")]
        scalars: &'a Option<Vec<f64>>,
    }
    let dump = MeshDump {
        rows: mesh.rows,
        cols: mesh.cols,
        w_values: &mesh.w_values,
        vertices: &mesh.vertices,
        faces: &mesh.faces,
        scalars: &mesh.scalars,
    };
    let text = serde_json::to_string_pretty(&dump)
        .map_err(|e| Error::numerical(format!("mesh serialization: {e}")))?;
    write_atomic(path, text.as_bytes())
}

pub fn export_curve_analysis(analysis: &CurveAnalysis, path: &Path) -> Result<()> {
    export_analysis_json(analysis, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{CurveState, ExactSolution};
    use crate::integrate::{integrate, IntegrationConfig};
    use crate::systems::SystemId;
    use std::f64::consts::PI;

    #[test]
    fn full_turn_sweep_closes_the_tube() {
        let chart = ExactSolution::CylinderC.chart(21).unwrap();
        let mesh = sweep(&chart, (0.0, 2.0 * PI), 64).unwrap();
        assert_eq!(mesh.vertices.len(), 21 * 64);
        assert_eq!(mesh.faces.len(), 20 * 64);
        let max_idx = mesh.faces.iter().flatten().max().copied().unwrap();
        assert!((max_idx as usize) < mesh.vertices.len());
        // Wrap column present: some face links column 63 back to column 0.
        assert!(mesh
            .faces
            .iter()
            .any(|f| f.iter().any(|&i| i % 64 == 63) && f.iter().any(|&i| i % 64 == 0)));
    }

    #[test]
    fn partial_sweep_is_an_open_grid() {
        let chart = ExactSolution::Slice { t0: 0.0 }.chart(11).unwrap();
        let mesh = sweep(&chart, (0.0, PI), 16).unwrap();
        assert_eq!(mesh.vertices.len(), 11 * 16);
        assert_eq!(mesh.faces.len(), 10 * 15);
    }

    #[test]
    fn two_by_two_grid_exports_four_vertices_one_face() {
        let curve = vec![
            CurveState { s: 0.0, u: 0.0, v: 0.0, theta: 0.0 },
            CurveState { s: 1.0, u: 0.5, v: 0.2, theta: 0.0 },
        ];
        let chart = SurfaceChart::new(ChartKind::Rotational, curve).unwrap();
        let mesh = sweep(&chart, (0.0, 1.0), 2).unwrap();
        let projected = project_mesh(&mesh);
        let obj = obj_string(&projected, false);
        let v_lines = obj.lines().filter(|l| l.starts_with("v ")).count();
        let f_lines = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(v_lines, 4);
        assert_eq!(f_lines, 1);

        let tri = obj_string(&projected, true);
        assert_eq!(tri.lines().filter(|l| l.starts_with("f ")).count(), 2);
    }

    #[test]
    fn cylinder_projects_to_the_unit_tube() {
        let chart = ExactSolution::CylinderC.chart(9).unwrap();
        let mesh = sweep(&chart, (0.0, 2.0 * PI), 32).unwrap();
        let projected = project_mesh(&mesh);
        assert!(projected.flagged_vertices.is_empty());
        for v in &projected.vertices {
            let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-12, "projected radius {r}");
        }
    }

    #[test]
    fn faces_near_the_pole_are_dropped_with_flags() {
        // Latitudes pushed against the pole: 1 - sin(u) < 1e-6 for the top rows.
        let mut curve = Vec::new();
        for i in 0..12 {
            let u = 1.52 + (1.5706 - 1.52) * i as f64 / 11.0;
            curve.push(CurveState { s: i as f64, u, v: 0.0, theta: 0.0 });
        }
        let chart = SurfaceChart::new(ChartKind::Rotational, curve).unwrap();
        let mesh = sweep(&chart, (0.0, 1.0), 4).unwrap();
        let projected = project_mesh(&mesh);
        assert!(!projected.flagged_vertices.is_empty());
        assert!(projected.dropped_faces > 0);
        assert_eq!(
            projected.faces.len() + projected.dropped_faces,
            mesh.faces.len()
        );
    }

    #[test]
    fn projected_coordinates_respect_the_latitude_bound() {
        let cfg = IntegrationConfig {
            span: (-20.0, 20.0),
            equilibrium_radius: None,
            ..IntegrationConfig::default()
        };
        let traj = integrate(SystemId::S11, &[0.0, 0.0, 0.0], &cfg).unwrap();
        let mut u_max = 0.0f64;
        let curve: Vec<CurveState> = (0..traj.len())
            .map(|i| {
                let st = traj.state(i);
                u_max = u_max.max(st[0].abs());
                CurveState { s: traj.s_values()[i], u: st[0], v: st[1], theta: st[2] }
            })
            .collect();
        let chart = SurfaceChart::new(ChartKind::Rotational, curve).unwrap();
        let mesh = sweep(&chart, (0.0, 2.0 * PI), 24).unwrap();
        let projected = project_mesh(&mesh);
        let bound = 1.0 / (1.0 - u_max.sin()) + 1e-9;
        for v in &projected.vertices {
            assert!(v[0].abs() <= bound && v[1].abs() <= bound);
        }
    }

    #[test]
    fn sweep_agrees_with_chart_point() {
        let chart = ExactSolution::Slice { t0: 0.3 }.chart(7).unwrap();
        let mesh = sweep(&chart, (0.0, 1.0), 5).unwrap();
        for (i, st) in chart.curve.iter().enumerate() {
            for j in 0..5 {
                let w = j as f64 * 0.25;
                let p = chart_point(chart.kind, st.u, st.v, w).unwrap().coords();
                let v = mesh.vertices[i * 5 + j];
                for d in 0..4 {
                    assert!((p[d] - v[d]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn trajectory_csv_round_trips_bitwise() {
        let cfg = IntegrationConfig {
            span: (0.0, 15.0),
            equilibrium_radius: None,
            ..IntegrationConfig::default()
        };
        let traj = integrate(SystemId::S11, &[0.0, 0.0, 0.0], &cfg).unwrap();
        let text = trajectory_csv(&traj);
        let (header, rows) = parse_trajectory_csv(&text).unwrap();
        assert_eq!(header, ["s", "u", "v", "theta"]);
        assert_eq!(rows.len(), traj.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row[0].to_bits(), traj.s_values()[i].to_bits());
            for d in 0..3 {
                assert_eq!(row[d + 1].to_bits(), traj.state(i)[d].to_bits());
            }
        }
        // Determinism: regenerating gives identical bytes.
        assert_eq!(text, trajectory_csv(&traj));
    }

    #[test]
    fn atomic_export_writes_files() {
        let dir = std::env::temp_dir().join(format!("sphereline-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let chart = ExactSolution::CylinderC.chart(5).unwrap();
        let mesh = sweep(&chart, (0.0, 2.0 * PI), 8).unwrap();
        let path = dir.join("tube.obj");
        export_mesh_obj(&project_mesh(&mesh), &path, false).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"v "));
        fs::remove_dir_all(&dir).unwrap();
    }

}
