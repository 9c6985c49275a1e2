//! Removes the inflection of a cubic boundary by cutting out a disk.

use algdomain::domain::{build_domain, FlagOptions, Scene};
use algdomain::surgery::{desingularize, Mode};
use algdomain::{Box2, Point, Poly2};

fn main() -> algdomain::Result<()> {
    let cubic = Poly2::from_terms([(0, 1, 1.0), (3, 0, -1.0), (1, 0, 1.0)]);
    let scene = Scene::new(
        vec![cubic, Poly2::circle(Point::new(0.0, 0.0), 2.0)],
        Box2::centered(2.5),
        Point::new(0.0, 1.0),
    );
    let domain = build_domain(&scene)?;
    let out = desingularize(&domain, Mode::Nip, FlagOptions::default())?;
    for plan in &out.plans {
        println!("disk at {} radius {:.4} for the inflection at {}", plan.center, plan.radius(), plan.target.location);
    }
    println!("nip after surgery: {}", out.domain.check_flags(FlagOptions::default())?.nip);
    println!("{}", out.domain.scene.to_json());
    Ok(())
}
