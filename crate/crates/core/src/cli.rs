//! The four commands behind the `algdomain` binary.
//!
//! Each command reads its input, writes its artifacts into an output
//! directory and returns a summary. Errors carry the process exit code
//! through [`Error::exit_code`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::curvegeo::{find_bitangents, find_curvature_vertices, find_inflections, CharPoint};
use crate::domain::{build_domain, Domain, FlagOptions, FlagReport, Located, MorseReport, Scene};
use crate::error::{Error, Result};
use crate::geom::Axis;
use crate::oracle::{grid_reeb, sampled_diffgeo_scan, DiffGeoCounts};
use crate::realize::{realize_domain, CircleRole, EmbeddedGraph, TubeSpec};
use crate::reeb::{homeomorphic, poincare_reeb, IsoMode, VDigraph};
use crate::render::{render_svg, Overlay, RenderStyle};
use crate::surgery::{desingularize, graphs, Mode};

/// Which projections to report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AxisChoice {
    X,
    Y,
    #[default]
    Both,
}

impl AxisChoice {
    pub fn axes(self) -> Vec<Axis> {
        match self {
            AxisChoice::X => vec![Axis::X],
            AxisChoice::Y => vec![Axis::Y],
            AxisChoice::Both => Axis::both().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    pub axis: AxisChoice,
    /// Overrides the scene's solver tolerance.
    pub tol: Option<f64>,
    pub flags: FlagOptions,
}

pub fn read_scene(path: &Path, tol: Option<f64>) -> Result<Scene> {
    let mut scene = Scene::from_json(&fs::read_to_string(path)?)?;
    if let Some(t) = tol {
        scene.tol.solver = t;
        scene.validate()?;
    }
    Ok(scene)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf> {
    write(dir, name, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn graph_json(g: &VDigraph) -> Value {
    json!({
        "vertices": g.vertices,
        "edges": g.edges,
        "betti1": g.betti1(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub morse: MorseReport,
    pub flags: FlagReport,
    pub crossings: Vec<Located>,
    pub poles_x: Vec<Located>,
    pub poles_y: Vec<Located>,
    pub bitangents: Vec<crate::curvegeo::Bitangent>,
    pub warnings: Vec<String>,
    /// Per requested axis; absent when the domain is not Morse.
    #[serde(skip)]
    pub graphs: Vec<(Axis, VDigraph)>,
}

/// Characteristic sets, flags, Poincaré-Reeb graphs and a figure.
pub fn analyze(scene_path: &Path, out_dir: &Path, opts: &AnalyzeOptions) -> Result<AnalyzeReport> {
    let scene = read_scene(scene_path, opts.tol)?;
    let domain = build_domain(&scene)?;
    let morse = domain.classify_morse();
    let flags = domain.check_flags(opts.flags)?;
    let mut report = AnalyzeReport {
        crossings: domain.crossings.clone(),
        poles_x: domain.poles[0].clone(),
        poles_y: domain.poles[1].clone(),
        bitangents: domain.bitangents()?,
        warnings: domain.warnings.clone(),
        graphs: Vec::new(),
        morse,
        flags,
    };
    if report.morse.morse {
        for axis in opts.axis.axes() {
            let g = poincare_reeb(&domain, axis)?;
            let tag = axis.name().to_ascii_lowercase();
            write_json(out_dir, &format!("reeb_{tag}.json"), &g)?;
            write(out_dir, &format!("reeb_{tag}.dot"), &g.to_dot(&format!("reeb_{tag}")))?;
            report.graphs.push((axis, g));
        }
    } else {
        report.warnings.push("domain is not Morse; Poincaré-Reeb graphs were not built".into());
    }
    let mut value = serde_json::to_value(&report)?;
    value["graphs"] = report.graphs.iter().map(|(a, g)| (a.name().to_ascii_lowercase(), graph_json(g))).collect();
    write_json(out_dir, "report.json", &value)?;

    let mut points: Vec<CharPoint> = domain.crossings.iter().map(|l| l.point.clone()).collect();
    for axis in opts.axis.axes() {
        points.extend(domain.characteristic_set(axis).into_iter().filter(|p| !matches!(p.kind, crate::curvegeo::CharKind::Crossing)));
    }
    points.extend(report.flags.inflections.iter().cloned());
    points.extend(report.flags.curvature_vertices.iter().cloned());
    let overlay = Overlay {
        points,
        disks: Vec::new(),
        lines: report.bitangents.iter().map(|b| (b.line.base, b.line.direction)).collect(),
    };
    write(out_dir, "domain.svg", &render_svg(&domain, &RenderStyle::default(), &overlay)?)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SurgeryReport {
    pub mode: Mode,
    pub initial_defects: usize,
    pub insertions: usize,
    pub flags_after: FlagReport,
    /// Verdict per axis: graphs before and after agree in height order.
    pub graph_preserved: [bool; 2],
}

/// Runs the surgery for `mode` and writes the new scene with a log.
pub fn surgery(scene_path: &Path, mode: Mode, out_dir: &Path, flags: FlagOptions, tol: Option<f64>) -> Result<SurgeryReport> {
    let scene = read_scene(scene_path, tol)?;
    let domain = build_domain(&scene)?;
    let result = desingularize(&domain, mode, flags)?;
    let after = &result.domain;
    let tol = 10.0 * scene.tol.solver * scene.length_scale();
    let (g0, g1) = (graphs(&domain)?, graphs(after)?);
    let mut preserved = [false; 2];
    for k in 0..2 {
        preserved[k] = homeomorphic(&g0[k], &g1[k], IsoMode::HeightOrder, tol)?;
    }
    let report = SurgeryReport {
        mode,
        initial_defects: result.initial_defects,
        insertions: result.plans.len(),
        flags_after: after.check_flags(flags)?,
        graph_preserved: preserved,
    };
    write(out_dir, "scene_prime.json", &(after.scene.to_json() + "\n"))?;
    write_json(out_dir, "surgery_log.json", &json!({ "report": report, "plans": result.plans }))?;
    let before_overlay = Overlay { points: crate::surgery::defects(&domain, mode, flags)?, ..Overlay::default() };
    write(out_dir, "before.svg", &render_svg(&domain, &RenderStyle::default(), &before_overlay)?)?;
    let after_overlay = Overlay {
        disks: result.plans.iter().map(|p| (p.center, p.radius())).collect(),
        ..Overlay::default()
    };
    write(out_dir, "after.svg", &render_svg(after, &RenderStyle::default(), &after_overlay)?)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizeReport {
    pub matched: bool,
    pub morse: bool,
    pub degree: u32,
    pub tube_poles: usize,
    pub saddle_circles: usize,
    pub extremum_circles: usize,
    pub input: VDigraph,
    pub realized: VDigraph,
}

/// Builds a domain realizing the drawn graph.
pub fn realize(graph_path: &Path, out_dir: &Path, spec: &TubeSpec) -> Result<RealizeReport> {
    let g = EmbeddedGraph::from_json(&fs::read_to_string(graph_path)?)?;
    let r = realize_domain(&g, spec)?;
    let report = RealizeReport {
        matched: true,
        morse: r.domain.classify_morse().morse,
        degree: r.degree,
        tube_poles: r.tube_poles.len(),
        saddle_circles: r.circles.iter().filter(|c| c.role == CircleRole::Saddle).count(),
        extremum_circles: r.circles.iter().filter(|c| c.role == CircleRole::Extremum).count(),
        input: r.graph.clone(),
        realized: r.realized_graph.clone(),
    };
    write(out_dir, "scene.json", &(r.domain.scene.to_json() + "\n"))?;
    write_json(out_dir, "realize_report.json", &json!({ "report": report, "circles": r.circles }))?;
    let overlay = Overlay {
        points: r.domain.characteristic_set(Axis::X),
        disks: r.circles.iter().map(|c| (c.center, c.radius)).collect(),
        lines: Vec::new(),
    };
    write(out_dir, "realized.svg", &render_svg(&r.domain, &RenderStyle::default(), &overlay)?)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveCheck {
    pub curve: usize,
    pub certified: DiffGeoCounts,
    pub sampled: DiffGeoCounts,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub resolution: usize,
    /// Per axis: certified graph matches the raster graph.
    pub graphs_match: Vec<(String, bool)>,
    pub curves: Vec<CurveCheck>,
    pub mismatches: Vec<String>,
}

/// Cross-checks the certified computations against the raster oracle.
pub fn check(scene_path: &Path, out_dir: Option<&Path>, resolution: usize, tol: Option<f64>) -> Result<CheckReport> {
    let scene = read_scene(scene_path, tol)?;
    let domain = build_domain(&scene)?;
    let mut report = CheckReport { resolution, graphs_match: Vec::new(), curves: Vec::new(), mismatches: Vec::new() };
    if domain.classify_morse().morse {
        for axis in Axis::both() {
            let ok = graph_matches_oracle(&domain, axis, resolution)?;
            if !ok {
                report.mismatches.push(format!("{} graph differs from the raster graph", axis.name()));
            }
            report.graphs_match.push((axis.name().to_string(), ok));
        }
    }
    for curve in &domain.curves {
        let tol = scene.tol.solver;
        let certified = DiffGeoCounts {
            inflection_count: find_inflections(curve, tol)?.len(),
            cv_count: find_curvature_vertices(curve, tol)?.len(),
            bitangent_count: find_bitangents(curve, tol)?.len(),
        };
        let sampled = sampled_diffgeo_scan(curve.poly(), &scene.bbox, resolution);
        if certified != sampled {
            report.mismatches.push(format!("curve {}: certified {certified:?}, sampled {sampled:?}", curve.index));
        }
        report.curves.push(CurveCheck { curve: curve.index, certified, sampled });
    }
    if let Some(dir) = out_dir {
        write_json(dir, "check.json", &report)?;
    }
    if !report.mismatches.is_empty() {
        return Err(Error::OracleMismatch(report.mismatches.join("; ")));
    }
    Ok(report)
}

/// Height tolerance of two raster cells.
pub fn graph_matches_oracle(domain: &Domain, axis: Axis, resolution: usize) -> Result<bool> {
    let g = poincare_reeb(domain, axis)?;
    let o = grid_reeb(&domain.scene, axis, resolution);
    let tol = 2.0 * domain.scene.bbox.range(axis).width() / resolution as f64;
    homeomorphic(&g, &o, IsoMode::HeightOrder, tol)
}

/// The machine-readable form of an error.
pub fn error_json(e: &Error) -> Value {
    json!({ "error": e.code(), "message": e.to_string(), "exit_code": e.exit_code() })
}
