//! Compares certified graphs and curve features with the raster oracle.

use algdomain::cli::graph_matches_oracle;
use algdomain::domain::{build_domain, Scene};
use algdomain::oracle::sampled_diffgeo_scan;
use algdomain::curvegeo::{find_bitangents, find_curvature_vertices, find_inflections};
use algdomain::{Axis, Box2, Point, Poly2};

fn main() -> algdomain::Result<()> {
    let scene = Scene::new(
        vec![Poly2::ellipse(Point::new(0.1, 0.0), 1.2, 0.7, 0.5), Poly2::ellipse(Point::new(-0.4, 0.2), 0.6, 0.4, 1.9)],
        Box2::centered(2.0),
        Point::new(0.6, 0.0),
    );
    let domain = build_domain(&scene)?;
    for axis in Axis::both() {
        println!("{} graph matches raster at 1024: {}", axis.name(), graph_matches_oracle(&domain, axis, 1024)?);
    }
    for curve in &domain.curves {
        let sampled = sampled_diffgeo_scan(curve.poly(), &scene.bbox, 1024);
        println!(
            "curve {}: certified {}/{}/{}, sampled {}/{}/{} (inflections/vertices/bitangents)",
            curve.index,
            find_inflections(curve, 1e-10)?.len(),
            find_curvature_vertices(curve, 1e-10)?.len(),
            find_bitangents(curve, 1e-10)?.len(),
            sampled.inflection_count,
            sampled.cv_count,
            sampled.bitangent_count
        );
    }
    Ok(())
}
