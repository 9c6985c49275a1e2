//! Isolates the real roots of a polynomial with a double root.

use algdomain::poly::Poly1;
use algdomain::roots::isolate_univariate_roots;

fn main() -> algdomain::Result<()> {
    // (t - 0.5)^2 (t + 0.25) (t - 0.9) (t + 0.7)
    let p = Poly1::from_roots(&[0.5, 0.5, -0.25, 0.9, -0.7], 1.0);
    for iv in isolate_univariate_roots(&p, -1.0, 1.0, 1e-12)? {
        println!("[{:+.12}, {:+.12}]  {:?}", iv.lo, iv.hi, iv.parity);
    }
    Ok(())
}
