//! Characteristic sets, Morse classification and flags of an annulus.

use algdomain::domain::{build_domain, FlagOptions, Scene};
use algdomain::{Axis, Box2, Point, Poly2};

fn main() -> algdomain::Result<()> {
    let o = Point::new(0.0, 0.0);
    let scene = Scene::new(
        vec![Poly2::circle(o, 1.0), Poly2::ellipse(o, 0.5, 0.3, 0.4)],
        Box2::centered(1.5),
        Point::new(0.75, 0.0),
    );
    let domain = build_domain(&scene)?;
    for axis in Axis::both() {
        println!("{} characteristic set:", axis.name());
        for p in domain.characteristic_set(axis) {
            println!("  {:?} at {}", p.kind, p.location);
        }
    }
    let morse = domain.classify_morse();
    println!("morse: {}  g-morse: {}", morse.morse, morse.g_morse);
    let flags = domain.check_flags(FlagOptions::default())?;
    println!("nip {}  ndtl {}  ncv {}", flags.nip, flags.ndtl, flags.ncv);
    Ok(())
}
