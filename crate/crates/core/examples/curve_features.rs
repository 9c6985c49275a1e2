//! Inflections, bitangents and curvature vertices of the double-well quartic
//! y = x^4 - 2x^2.

use algdomain::curvegeo::{find_bitangents, find_curvature_vertices, find_inflections, trace_curve};
use algdomain::{Box2, Poly2};

fn main() -> algdomain::Result<()> {
    let f = Poly2::from_terms([(0, 1, 1.0), (4, 0, -1.0), (2, 0, 2.0)]);
    let curve = trace_curve(&f, &Box2::centered(2.0), 0.01)?;
    let tol = 1e-10;
    for p in find_inflections(&curve, tol)? {
        println!("inflection       {}", p.location);
    }
    for p in find_curvature_vertices(&curve, tol)? {
        println!("curvature vertex {}", p.location);
    }
    for b in find_bitangents(&curve, tol)? {
        println!("bitangent        {:?} touching {} and {}", b.line.implicit, b.contacts[0], b.contacts[1]);
    }
    Ok(())
}
