//! Poincaré-Reeb graph of a disk with two holes, printed as DOT.

use algdomain::domain::{build_domain, Scene};
use algdomain::reeb::poincare_reeb;
use algdomain::{Axis, Box2, Point, Poly2};

fn main() -> algdomain::Result<()> {
    let scene = Scene::new(
        vec![
            Poly2::ellipse(Point::new(0.0, 0.0), 1.4, 1.0, 0.2),
            Poly2::circle(Point::new(-0.6, 0.1), 0.3),
            Poly2::circle(Point::new(0.5, -0.2), 0.35),
        ],
        Box2::centered(2.0),
        Point::new(0.0, 0.6),
    );
    let domain = build_domain(&scene)?;
    let g = poincare_reeb(&domain, Axis::X)?;
    println!("{} vertices, {} edges, first Betti number {}", g.vertices.len(), g.edges.len(), g.betti1());
    print!("{}", g.to_dot("reeb_x"));
    Ok(())
}
