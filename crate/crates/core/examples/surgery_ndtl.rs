//! Removes double tangencies of a tilted double-well quartic, under both
//! readings of the flag.

use algdomain::domain::{build_domain, FlagOptions, Scene};
use algdomain::surgery::{desingularize, Mode};
use algdomain::{Box2, Point, Poly2};

fn main() -> algdomain::Result<()> {
    let angle = 0.3;
    let quartic = Poly2::from_terms([(0, 1, 1.0), (4, 0, -1.0), (2, 0, 2.0)]).rigid_motion(angle, Point::new(0.0, 0.0));
    let seed = Point::new(-angle.sin(), angle.cos()) * 0.5;
    let scene = Scene::new(vec![quartic, Poly2::circle(Point::new(0.0, 0.0), 2.5)], Box2::centered(3.0), seed);
    let domain = build_domain(&scene)?;
    for same_curve in [false, true] {
        let opts = FlagOptions { ndtl_same_curve_only: same_curve };
        let out = desingularize(&domain, Mode::Ndtl, opts)?;
        println!(
            "same curve only = {same_curve}: {} defects, {} disks, ndtl after = {}",
            out.initial_defects,
            out.plans.len(),
            out.domain.check_flags(opts)?.ndtl
        );
    }
    Ok(())
}
