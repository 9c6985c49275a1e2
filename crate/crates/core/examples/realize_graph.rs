//! Realizes a drawn "Y" as the Poincaré-Reeb graph of a polynomial domain.

use algdomain::realize::{realize_domain, EmbeddedGraph, TubeSpec};

const Y: &str = r#"{
  "vertices": [
    {"id": 0, "x": -1.0, "y": 0.0},
    {"id": 1, "x": 0.0, "y": 0.0},
    {"id": 2, "x": 1.0, "y": 0.6},
    {"id": 3, "x": 1.0, "y": -0.6}
  ],
  "edges": [
    {"a": 0, "b": 1},
    {"a": 1, "b": 2, "polyline": [[0.0, 0.0], [0.1, 0.3], [0.3, 0.55], [0.5, 0.6], [1.0, 0.6]]},
    {"a": 1, "b": 3, "polyline": [[0.0, 0.0], [0.1, -0.3], [0.3, -0.55], [0.5, -0.6], [1.0, -0.6]]}
  ]
}"#;

fn main() -> algdomain::Result<()> {
    let g = EmbeddedGraph::from_json(Y)?;
    let r = realize_domain(&g, &TubeSpec::default())?;
    println!("tube degree {}, {} tube poles", r.degree, r.tube_poles.len());
    for c in &r.circles {
        println!("{:?} disk at {} radius {:.4} for vertex {}", c.role, c.center, c.radius, c.vertex);
    }
    println!("realized graph: {} vertices, {} edges", r.realized_graph.vertices.len(), r.realized_graph.edges.len());
    Ok(())
}
