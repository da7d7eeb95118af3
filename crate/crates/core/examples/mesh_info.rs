//! Builtin crisscross meshes, quality metrics under refinement and the ASCII
//! mesh format round trip.
//!
//! `cargo run --example mesh_info -- [n]`

use sthdg::mesh::{build_face_topology, mesh_metrics, read_mesh, write_mesh};
use sthdg::{Rectangle, SpatialMesh};

fn main() -> sthdg::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    println!("n    elements  faces  h            shape        face_lower   face_upper");
    let mut mesh = SpatialMesh::build_uniform(n, Rectangle::unit_square())?;
    for _ in 0..3 {
        let faces = build_face_topology(&mesh)?;
        let m = mesh_metrics(&mesh, &faces);
        println!(
            "{:<4} {:<9} {:<6} {:.6e} {:.6e} {:.6e} {:.6e}",
            ((mesh.n_elements() / 2) as f64).sqrt() as usize,
            m.n_elements,
            faces.n_faces(),
            m.h,
            m.shape_regularity,
            m.face_lower,
            m.face_upper
        );
        mesh = mesh.refine_uniform();
    }

    let coarse = SpatialMesh::build_uniform(2, Rectangle::unit_square())?;
    let mut text = Vec::new();
    write_mesh(&coarse, &mut text)?;
    let back = read_mesh(text.as_slice())?;
    println!("\nASCII form of the n = 2 mesh:\n{}", String::from_utf8_lossy(&text));
    println!("round trip preserves vertices and triangles: {}", back.vertices() == coarse.vertices() && back.triangles() == coarse.triangles());
    Ok(())
}
