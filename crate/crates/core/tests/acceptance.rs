//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use algdomain::curvegeo::{curvature_at, find_bitangents, find_curvature_vertices, find_inflections, trace_curve};
use algdomain::domain::{build_domain, Domain, FlagOptions, Scene};
use algdomain::oracle::{grid_mask, grid_reeb, sampled_diffgeo_scan};
use algdomain::realize::{realize_domain, CircleRole, TubeSpec};
use algdomain::reeb::{homeomorphic, poincare_reeb, vdigraph_isomorphic, IsoMode, VDigraph};
use algdomain::surgery::{desingularize, graphs, Mode};
use algdomain::{Axis, Box2, Point, Poly2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn conic_facts() -> Outcome {
    let bb = Box2::centered(2.0);
    let tol = 1e-10;
    let circle = Poly2::circle(origin(), 1.0);
    let line = Poly2::from_terms([(0, 1, 1.0), (1, 0, -0.5), (0, 0, -0.2)]);
    for (name, f) in [("circle", &circle), ("line", &line)] {
        let c = trace_curve(f, &bb, 0.01).map_err(err)?;
        let counts = (
            find_inflections(&c, tol).map_err(err)?.len(),
            find_bitangents(&c, tol).map_err(err)?.len(),
            find_curvature_vertices(&c, tol).map_err(err)?.len(),
        );
        ensure!(counts == (0, 0, 0), "{name}: inflections/bitangents/vertices = {counts:?}");
    }
    let (a, b) = (1.0, 0.5);
    let ellipse = Poly2::ellipse(origin(), a, b, 0.0);
    let c = trace_curve(&ellipse, &bb, 0.01).map_err(err)?;
    ensure!(find_inflections(&c, tol).map_err(err)?.is_empty(), "ellipse has inflections");
    ensure!(find_bitangents(&c, tol).map_err(err)?.is_empty(), "ellipse has bitangents");
    let cvs = find_curvature_vertices(&c, tol).map_err(err)?;
    ensure!(cvs.len() == 4, "ellipse has {} curvature vertices", cvs.len());
    for want in [Point::new(a, 0.0), Point::new(-a, 0.0), Point::new(0.0, b), Point::new(0.0, -b)] {
        let d = cvs.iter().map(|p| p.location.dist(want)).fold(f64::INFINITY, f64::min);
        ensure!(d < 1e-6, "no curvature vertex within 1e-6 of {want} (nearest {d:e})");
    }
    Ok("circle and line empty; ellipse 0/0/4 at its axis ends".into())
}

fn analytic_bitangent() -> Outcome {
    let bb = Box2::centered(2.0);
    let c = trace_curve(&quartic_poly(), &bb, 0.01).map_err(err)?;
    let bts = find_bitangents(&c, 1e-12).map_err(err)?;
    ensure!(bts.len() == 1, "found {} bitangents", bts.len());
    let bt = &bts[0];
    // y = -1 has implicit form (0, 1, 1) up to sign.
    let [p, q, r] = bt.line.implicit;
    let s = q.signum();
    let dist = (p * s).abs().max((q * s - 1.0).abs()).max((r * s - 1.0).abs());
    ensure!(dist < 1e-8, "line {:?} is not y = -1", bt.line.implicit);
    let mut xs: Vec<Point> = bt.contacts.to_vec();
    xs.sort_by(|a, b| a.x.total_cmp(&b.x));
    ensure!(
        xs[0].dist(Point::new(-1.0, -1.0)) < 1e-8 && xs[1].dist(Point::new(1.0, -1.0)) < 1e-8,
        "contacts {xs:?}"
    );
    let scan = sampled_diffgeo_scan(&quartic_poly(), &bb, 800);
    ensure!(scan.bitangent_count == 1, "tangent-pair scan found {} bitangents", scan.bitangent_count);
    Ok("one bitangent y = -1 touching at (±1, -1); scan agrees".into())
}

fn matches_grid(d: &Domain, res: usize) -> Result<(), String> {
    for axis in Axis::both() {
        let g = poincare_reeb(d, axis).map_err(err)?;
        let o = grid_reeb(&d.scene, axis, res);
        let tol = 2.0 * d.scene.bbox.range(axis).width() / res as f64;
        ensure!(homeomorphic(&g, &o, IsoMode::HeightOrder, tol).map_err(err)?, "{} graph differs from the raster graph", axis.name());
    }
    Ok(())
}

fn reeb_correctness() -> Outcome {
    let disk = build_domain(&unit_disk()).map_err(err)?;
    for axis in Axis::both() {
        let g = poincare_reeb(&disk, axis).map_err(err)?;
        let want = VDigraph::from_parts(&[-1.0, 1.0], &[(0, 1)]).map_err(err)?;
        ensure!(vdigraph_isomorphic(&g, &want, IsoMode::ExactHeight, 1e-9).map_err(err)?, "disk {} graph {g:?}", axis.name());
    }
    matches_grid(&disk, 1024)?;
    let ann = build_domain(&annulus()).map_err(err)?;
    let want = VDigraph::from_parts(&[-1.0, -0.5, 0.5, 1.0], &[(0, 1), (1, 2), (1, 2), (2, 3)]).map_err(err)?;
    for axis in Axis::both() {
        let g = poincare_reeb(&ann, axis).map_err(err)?;
        ensure!(vdigraph_isomorphic(&g, &want, IsoMode::ExactHeight, 1e-9).map_err(err)?, "annulus {} graph {g:?}", axis.name());
    }
    matches_grid(&ann, 1024)?;
    Ok("disk path and annulus cycle, exact heights, raster graphs agree at 1024".into())
}

/// Runs a surgery and checks the properties shared by all three modes.
fn surgery_end_to_end(scene: &Scene, mode: Mode, flags: FlagOptions) -> Result<usize, String> {
    let d = build_domain(scene).map_err(err)?;
    let out = desingularize(&d, mode, flags).map_err(err)?;
    let after = &out.domain;
    let report = after.check_flags(flags).map_err(err)?;
    let fixed = match mode {
        Mode::Nip => report.nip,
        Mode::Ndtl => report.ndtl,
        Mode::Ncv => report.ncv,
    };
    ensure!(fixed, "{} flag still false after {} insertions", mode.name(), out.plans.len());
    let n = scene.curves.len();
    ensure!(after.scene.curves[..n] == scene.curves[..], "original curves were not kept");
    let (m0, m1) = (grid_mask(&d.scene, 400), grid_mask(&after.scene, 400));
    for iy in 0..m1.resolution {
        for ix in 0..m1.resolution {
            ensure!(!m1.get(ix, iy) || m0.get(ix, iy), "new domain leaves the old one at {}", m1.center(ix, iy));
        }
    }
    let tol = 10.0 * scene.tol.solver * scene.length_scale();
    let (g0, g1) = (graphs(&d).map_err(err)?, graphs(after).map_err(err)?);
    for axis in Axis::both() {
        let k = axis as usize;
        ensure!(homeomorphic(&g0[k], &g1[k], IsoMode::HeightOrder, tol).map_err(err)?, "{} graph changed", axis.name());
    }
    Ok(out.plans.len())
}

fn no_inflections() -> Outcome {
    let n = surgery_end_to_end(&cubic(), Mode::Nip, FlagOptions::default())?;
    Ok(format!("{n} insertion(s), graphs preserved"))
}

fn no_double_tangents() -> Outcome {
    let strict = surgery_end_to_end(&quartic(), Mode::Ndtl, FlagOptions::default())?;
    let relaxed = surgery_end_to_end(&quartic(), Mode::Ndtl, FlagOptions { ndtl_same_curve_only: true })?;
    Ok(format!("strict {strict} insertion(s), relaxed {relaxed}, graphs preserved"))
}

fn no_curvature_vertices() -> Outcome {
    let n = surgery_end_to_end(&tilted_ellipse(), Mode::Ncv, FlagOptions::default())?;
    ensure!(n == 4, "{n} insertions instead of 4");
    Ok("4 insertions, graphs preserved".into())
}

fn realization() -> Outcome {
    let spec = TubeSpec::default();
    let mut notes = Vec::new();
    for (name, g) in [("path", path_graph()), ("cycle", cycle_graph()), ("Y", y_graph())] {
        let r = realize_domain(&g, &spec).map_err(|e| format!("{name}: {e}"))?;
        ensure!(r.domain.classify_morse().morse, "{name}: realized domain is not Morse");
        ensure!(
            homeomorphic(&g.to_vdigraph(), &r.realized_graph, IsoMode::HeightOrder, 1e-9).map_err(err)?,
            "{name}: graph mismatch"
        );
        let want: usize = g
            .vertices
            .iter()
            .map(|v| {
                let (i, o) = g.in_out(v.id);
                if i + o == 1 {
                    1
                } else {
                    i.saturating_sub(1) + o.saturating_sub(1)
                }
            })
            .sum();
        ensure!(r.tube_poles.len() == want, "{name}: {} tube poles, expected {want}", r.tube_poles.len());
        let saddles = r.circles.iter().filter(|c| c.role == CircleRole::Saddle).count();
        notes.push(format!("{name} (degree {}, {saddles} saddle disk(s))", r.degree));
    }
    Ok(notes.join(", "))
}

/// A raster of `res` cells cannot order critical values closer than a few
/// cells, so such scenes say nothing about the certified graph.
fn resolvable(d: &Domain, res: usize) -> Result<bool, algdomain::Error> {
    for axis in Axis::both() {
        let g = poincare_reeb(d, axis)?.suppress_pass_through();
        let mut hs: Vec<f64> = g.vertices.iter().map(|v| v.height).collect();
        hs.sort_by(f64::total_cmp);
        let gap = 4.0 * d.scene.bbox.range(axis).width() / res as f64;
        if hs.windows(2).any(|w| w[1] - w[0] < gap) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn random_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut accepted, mut rejected, mut unresolvable) = (0, 0, 0);
    while accepted < 50 {
        let scene = random_conics(&mut rng);
        let Ok(d) = build_domain(&scene) else {
            rejected += 1;
            continue;
        };
        if !d.classify_morse().morse {
            rejected += 1;
            continue;
        }
        if !resolvable(&d, 1024).map_err(err)? {
            unresolvable += 1;
            continue;
        }
        matches_grid(&d, 1024).map_err(|e| format!("scene {}: {e}\n{}", accepted + 1, scene.to_json()))?;
        accepted += 1;
    }
    Ok(format!(
        "50/50 scenes agree ({rejected} draws were not valid Morse scenes, {unresolvable} had critical values closer than 4 cells)"
    ))
}

/// Curvature through three consecutive polyline points.
fn menger(a: Point, b: Point, c: Point) -> f64 {
    2.0 * (b - a).cross(c - a).abs() / (a.dist(b) * b.dist(c) * c.dist(a))
}

fn numeric_hygiene() -> Outcome {
    let bb = Box2::centered(2.0);
    let conics = [
        Poly2::circle(origin(), 1.0),
        Poly2::ellipse(Point::new(0.1, -0.2), 1.2, 0.6, 0.4),
        Poly2::from_terms([(0, 1, 1.0), (2, 0, -1.0), (0, 0, 0.5)]),
        Poly2::from_terms([(2, 0, 1.0), (0, 2, -1.0), (0, 0, -0.5)]),
    ];
    let mut worst: f64 = 0.0;
    for f in &conics {
        let c = trace_curve(f, &bb, 2e-3).map_err(err)?;
        for pl in &c.components {
            for w in pl.points.windows(3).step_by(7) {
                let k = curvature_at(f, w[1]).map_err(err)?.abs();
                let fd = menger(w[0], w[1], w[2]);
                let rel = (k - fd).abs() / k.max(1e-12);
                worst = worst.max(rel);
            }
        }
    }
    ensure!(worst < 1e-4, "curvature disagrees by {worst:e} relative");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = 1e-5;
    let mut worst_d: f64 = 0.0;
    for _ in 0..20 {
        use rand::Rng;
        let terms: Vec<(u32, u32, f64)> =
            (0..8).map(|_| (rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(-2.0..2.0))).collect();
        let f = Poly2::from_terms(terms);
        let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for (axis, e) in [(Axis::X, Point::new(h, 0.0)), (Axis::Y, Point::new(0.0, h))] {
            let exact = f.differentiate(axis, 1).eval(p);
            let fd = (f.eval(p + e) - f.eval(p - e)) / (2.0 * h);
            worst_d = worst_d.max((exact - fd).abs() / exact.abs().max(1.0));
        }
    }
    ensure!(worst_d < 1e-6, "derivative disagrees by {worst_d:e}");
    Ok(format!("curvature within {worst:.1e}, derivatives within {worst_d:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("conic facts", conic_facts),
        ("analytic bitangent", analytic_bitangent),
        ("Reeb correctness", reeb_correctness),
        ("inflection removal", no_inflections),
        ("double tangent removal", no_double_tangents),
        ("curvature vertex removal", no_curvature_vertices),
        ("realization", realization),
        ("randomized oracle equivalence", random_oracle_equivalence),
        ("numeric hygiene", numeric_hygiene),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => println!("criterion {} PASS {name} [{secs:.1}s]: {note}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name} [{secs:.1}s]: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
}
