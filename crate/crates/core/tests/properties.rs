mod common;

use algdomain::domain::{build_domain, Scene};
use algdomain::poly::Poly1;
use algdomain::reeb::poincare_reeb;
use algdomain::roots::{isolate_univariate_roots, Parity};
use algdomain::{Axis, Point, Poly2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Up to six roots in (-1, 1), pairwise at least 0.05 apart.
fn planted_roots() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.95f64..0.95, 1..=6).prop_filter("roots too close", |rs| {
        let mut s = rs.clone();
        s.sort_by(f64::total_cmp);
        s.windows(2).all(|w| w[1] - w[0] > 0.05)
    })
}

fn unit_poly2() -> impl Strategy<Value = Poly2> {
    prop::collection::vec((0u32..=3, 0u32..=3, -1.0f64..1.0), 1..10).prop_map(Poly2::from_terms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn planted_roots_are_isolated(roots in planted_roots(), lead in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0]) {
        let p = Poly1::from_roots(&roots, lead);
        let found = isolate_univariate_roots(&p, -1.0, 1.0, 1e-12).unwrap();
        let c = p.coeffs();
        let dp = p.derivative();
        for r in &roots {
            // Expanding the roots rounds the coefficients, which moves each root
            // by about eps * sum|c_i| / |p'(r)|.
            let slack = 8.0 * f64::EPSILON * c.iter().map(|v| v.abs()).sum::<f64>() / dp.eval(*r).abs();
            let hits = found.iter().filter(|iv| iv.lo - slack <= *r && *r <= iv.hi + slack).count();
            prop_assert_eq!(hits, 1, "root {} in {:?}", r, found);
        }
        prop_assert_eq!(found.len(), roots.len());
    }

    #[test]
    fn odd_intervals_carry_a_sign_change(roots in planted_roots(), shift in -0.5f64..0.5) {
        // Shifting the constant term moves roots off the planted values.
        let mut c = Poly1::from_roots(&roots, 1.0).coeffs().to_vec();
        c[0] += shift * 0.01;
        let p = Poly1::new(c);
        for iv in isolate_univariate_roots(&p, -1.0, 1.0, 1e-12).unwrap() {
            if iv.parity == Parity::Odd {
                prop_assert!(p.eval(iv.lo) * p.eval(iv.hi) < 0.0, "{:?}", iv);
            }
        }
    }

    #[test]
    fn derivatives_match_central_differences(f in unit_poly2(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let h = 1e-5;
        let p = Point::new(x, y);
        for (axis, e) in [(Axis::X, Point::new(h, 0.0)), (Axis::Y, Point::new(0.0, h))] {
            let exact = f.differentiate(axis, 1).eval(p);
            let fd = (f.eval(p + e) - f.eval(p - e)) / (2.0 * h);
            prop_assert!((exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()), "{} vs {}", exact, fd);
        }
    }

    #[test]
    fn scene_json_round_trips(seed in any::<u64>()) {
        let scene = common::random_conics(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = scene.to_json();
        prop_assert_eq!(Scene::from_json(&text).unwrap().to_json(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graph_edges_point_upward(seed in any::<u64>()) {
        let scene = common::random_conics(&mut ChaCha8Rng::seed_from_u64(seed));
        let Ok(d) = build_domain(&scene) else { return Ok(()) };
        if !d.classify_morse().morse {
            return Ok(());
        }
        for axis in Axis::both() {
            let g = poincare_reeb(&d, axis).unwrap();
            for e in &g.edges {
                prop_assert!(g.vertices[e.from].height < g.vertices[e.to].height);
            }
        }
    }
}
