//! Certified intersection points of two ellipses.

use algdomain::systems::{solve_pair, SolveOptions};
use algdomain::{Box2, Point, Poly2};

fn main() -> algdomain::Result<()> {
    let f = Poly2::ellipse(Point::new(0.0, 0.0), 1.0, 0.5, 0.0);
    let g = Poly2::ellipse(Point::new(0.3, 0.1), 0.8, 0.6, 0.7);
    let pts = solve_pair(&f, &g, &Box2::centered(2.0), &SolveOptions::default())?;
    println!("{} intersection points", pts.len());
    for p in &pts {
        println!("  {}  radius {:.1e}  residual {:.1e}", p.point(), p.radius, p.residual);
    }
    Ok(())
}
