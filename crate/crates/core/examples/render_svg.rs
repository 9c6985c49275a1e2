//! Writes an SVG of a domain with its poles and bitangent lines.
//!
//! Usage: `cargo run --example render_svg -- out.svg`

use algdomain::domain::{build_domain, Scene};
use algdomain::render::{render_svg, Overlay, RenderStyle};
use algdomain::{Axis, Box2, Point, Poly2};

fn main() -> algdomain::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "domain.svg".into());
    let quartic = Poly2::from_terms([(0, 1, 1.0), (4, 0, -1.0), (2, 0, 2.0)]).rigid_motion(0.3, Point::new(0.0, 0.0));
    let scene = Scene::new(
        vec![quartic, Poly2::circle(Point::new(0.0, 0.0), 2.5)],
        Box2::centered(3.0),
        Point::new(-0.15, 0.48),
    );
    let domain = build_domain(&scene)?;
    let mut points = domain.characteristic_set(Axis::X);
    points.extend(domain.characteristic_set(Axis::Y));
    let lines = domain.bitangents()?.iter().map(|b| (b.line.base, b.line.direction)).collect();
    let svg = render_svg(&domain, &RenderStyle::default(), &Overlay { points, disks: Vec::new(), lines })?;
    std::fs::write(&path, svg)?;
    println!("wrote {path}");
    Ok(())
}
