//! Removes the four curvature vertices of a tilted ellipse.

use std::f64::consts::PI;

use algdomain::domain::{build_domain, FlagOptions, Scene};
use algdomain::surgery::{desingularize, graphs, Mode};
use algdomain::{Box2, Point, Poly2};

fn main() -> algdomain::Result<()> {
    let o = Point::new(0.0, 0.0);
    let scene = Scene::new(vec![Poly2::ellipse(o, 1.0, 0.5, PI / 6.0)], Box2::centered(2.0), o);
    let domain = build_domain(&scene)?;
    let out = desingularize(&domain, Mode::Ncv, FlagOptions::default())?;
    for plan in &out.plans {
        println!("{:?}: disk at {} radius {:.4}", plan.case, plan.center, plan.radius());
    }
    let [gx, gy] = graphs(&out.domain)?;
    println!("after: {} curves, x graph {} edges, y graph {} edges", out.domain.scene.curves.len(), gx.edges.len(), gy.edges.len());
    Ok(())
}
