#![allow(dead_code)]

use std::f64::consts::PI;

use algdomain::domain::Scene;
use algdomain::realize::EmbeddedGraph;
use algdomain::{Box2, Point, Poly2};
use rand::Rng;

pub fn origin() -> Point {
    Point::new(0.0, 0.0)
}

pub fn unit_disk() -> Scene {
    Scene::new(vec![Poly2::circle(origin(), 1.0)], Box2::centered(1.5), origin())
}

pub fn annulus() -> Scene {
    Scene::new(
        vec![Poly2::circle(origin(), 1.0), Poly2::circle(origin(), 0.5)],
        Box2::centered(1.5),
        Point::new(0.75, 0.0),
    )
}

/// Three lines through the origin inside a circle.
pub fn triple_point() -> Scene {
    let lines = [
        Poly2::from_terms([(0, 1, 1.0), (1, 0, -1.0)]),
        Poly2::from_terms([(0, 1, 1.0), (1, 0, 1.0)]),
        Poly2::from_terms([(0, 1, 1.0), (1, 0, -3.0)]),
    ];
    let mut curves = lines.to_vec();
    curves.push(Poly2::circle(origin(), 1.0));
    Scene::new(curves, Box2::centered(1.5), Point::new(0.5, 0.2))
}

/// y = x^3 - x inside a circle; the domain lies above the cubic.
pub fn cubic() -> Scene {
    let c = Poly2::from_terms([(0, 1, 1.0), (3, 0, -1.0), (1, 0, 1.0)]);
    Scene::new(vec![c, Poly2::circle(origin(), 2.0)], Box2::centered(2.5), Point::new(0.0, 1.0))
}

pub fn quartic_poly() -> Poly2 {
    Poly2::from_terms([(0, 1, 1.0), (4, 0, -1.0), (2, 0, 2.0)])
}

/// The double-well quartic, turned so its bitangent contacts are not poles.
pub fn quartic() -> Scene {
    let angle = 0.3;
    let q = quartic_poly().rigid_motion(angle, origin());
    let seed = Point::new(-angle.sin(), angle.cos()) * 0.5;
    Scene::new(vec![q, Poly2::circle(origin(), 2.5)], Box2::centered(3.0), seed)
}

pub fn tilted_ellipse() -> Scene {
    Scene::new(vec![Poly2::ellipse(origin(), 1.0, 0.5, PI / 6.0)], Box2::centered(2.0), origin())
}

pub fn path_graph() -> EmbeddedGraph {
    EmbeddedGraph::straight(&[Point::new(-1.0, 0.0), Point::new(1.0, 0.0)], &[(0, 1)]).unwrap()
}

/// Two tails joined by the upper and lower halves of a circle.
pub fn cycle_graph() -> EmbeddedGraph {
    let mut g = EmbeddedGraph::straight(
        &[Point::new(-1.0, 0.0), Point::new(-0.5, 0.0), Point::new(0.5, 0.0), Point::new(1.0, 0.0)],
        &[(0, 1), (1, 2), (1, 2), (2, 3)],
    )
    .unwrap();
    let arc = |sign: f64| -> Vec<Point> {
        (0..=32)
            .map(|k| {
                let a = PI * (1.0 - k as f64 / 32.0);
                Point::new(0.5 * a.cos(), sign * 0.5 * a.sin())
            })
            .collect()
    };
    g.edges[1].polyline = arc(1.0);
    g.edges[2].polyline = arc(-1.0);
    g.validate().unwrap();
    g
}

/// Root at height -1, fork at 0, two tips at 1.
pub fn y_graph() -> EmbeddedGraph {
    let mut g = EmbeddedGraph::straight(
        &[Point::new(-1.0, 0.0), Point::new(0.0, 0.0), Point::new(1.0, 0.5), Point::new(1.0, -0.5)],
        &[(0, 1), (1, 2), (1, 3)],
    )
    .unwrap();
    let branch = |sign: f64| -> Vec<Point> {
        let mut pts: Vec<Point> = (0..=16)
            .map(|k| {
                let a = 0.5 * PI * k as f64 / 16.0;
                Point::new(0.5 * (1.0 - a.cos()), sign * 0.5 * a.sin())
            })
            .collect();
        pts.push(Point::new(1.0, sign * 0.5));
        pts
    };
    g.edges[1].polyline = branch(1.0);
    g.edges[2].polyline = branch(-1.0);
    g.validate().unwrap();
    g
}

/// One to three random ellipses in the box [-2, 2]^2, with the seed inside
/// the first one.
pub fn random_conics(rng: &mut impl Rng) -> Scene {
    let n = rng.gen_range(1..=3);
    let mut curves = Vec::with_capacity(n);
    let mut seed = origin();
    for k in 0..n {
        let c = Point::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
        let a = rng.gen_range(0.4..1.1);
        let b = rng.gen_range(0.3..a);
        let angle = rng.gen_range(0.0..PI);
        if k == 0 {
            seed = c;
        }
        curves.push(Poly2::ellipse(c, a, b, angle));
    }
    Scene::new(curves, Box2::centered(2.0), seed)
}

pub fn write_json(dir: &std::path::Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}
