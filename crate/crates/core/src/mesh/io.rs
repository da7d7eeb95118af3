use super::SpatialMesh;
use crate::error::{HdgError, Result};
use std::io::{BufRead, Write};

pub const MESH_HEADER: &str = "tri-mesh 2";

/// Reads the ASCII mesh format:
///
/// ```text
/// tri-mesh 2
/// <vertex count>
/// x y            (one line per vertex)
/// <triangle count>
/// i j k          (0-based vertex indices)
/// ```
pub fn read_mesh(reader: impl BufRead) -> Result<SpatialMesh> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|s| (i + 1, s)))
        .filter(|r| r.as_ref().map(|(_, s)| !s.trim().is_empty()).unwrap_or(true));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some(r) => Ok(r?),
            None => Err(HdgError::Parse { line: 0, message: format!("unexpected end of file, expected {what}") }),
        }
    };
    let (line, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != MESH_HEADER.split_whitespace().collect::<Vec<_>>() {
        return Err(HdgError::Parse { line, message: format!("expected header '{MESH_HEADER}'") });
    }
    let count = |(line, s): (usize, String)| -> Result<usize> {
        s.trim().parse().map_err(|_| HdgError::Parse { line, message: format!("invalid count '{}'", s.trim()) })
    };
    let nv = count(next("vertex count")?)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, s) = next("vertex")?;
        let v: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| HdgError::Parse { line, message: e.to_string() })?;
        if v.len() != 2 {
            return Err(HdgError::Parse { line, message: "vertex needs two coordinates".into() });
        }
        vertices.push([v[0], v[1]]);
    }
    let nt = count(next("triangle count")?)?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, s) = next("triangle")?;
        let t: Vec<usize> = s
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| HdgError::Parse { line, message: e.to_string() })?;
        if t.len() != 3 {
            return Err(HdgError::Parse { line, message: "triangle needs three vertex indices".into() });
        }
        triangles.push([t[0], t[1], t[2]]);
    }
    SpatialMesh::new(vertices, triangles)
}

/// Writes a mesh in the format accepted by [`read_mesh`]. Coordinates use the
/// shortest representation that parses back to the same `f64`.
pub fn write_mesh(mesh: &SpatialMesh, mut out: impl Write) -> Result<()> {
    writeln!(out, "{MESH_HEADER}")?;
    writeln!(out, "{}", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(out, "{:?} {:?}", p[0], p[1])?;
    }
    writeln!(out, "{}", mesh.n_elements())?;
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rectangle;

    #[test]
    fn parse_minimal_file() {
        let text = "tri-mesh 2\n4\n0 0\n1 0\n1 1\n0 1\n2\n0 1 2\n0 2 3\n";
        let m = read_mesh(text.as_bytes()).unwrap();
        assert_eq!(m.n_elements(), 2);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn write_then_read() {
        let m = SpatialMesh::build_uniform(3, Rectangle { min: [-0.3, 0.1], max: [0.7, 1.0 / 3.0] }).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
    }

    #[test]
    fn bad_header_and_counts() {
        assert!(matches!(read_mesh("quad-mesh 2\n".as_bytes()), Err(HdgError::Parse { line: 1, .. })));
        assert!(matches!(
            read_mesh("tri-mesh 2\n2\n0 0\n".as_bytes()),
            Err(HdgError::Parse { .. })
        ));
        assert!(matches!(
            read_mesh("tri-mesh 2\n3\n0 0\n1 0\n0 1\n1\n0 1 5\n".as_bytes()),
            Err(HdgError::InvalidArgument(_))
        ));
    }
}
