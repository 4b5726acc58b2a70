//! One function per subcommand.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use gradproj::dyadic::Dyadic;
use gradproj::mesh::bench::{closure_benchmark, MarkingPolicy};
use gradproj::mesh::distance::{element_report_tsv, grading_of, level_gap, mesh_size, Adjacency, ElementDistance};
use gradproj::mesh::{io, SimplicialMesh};
use gradproj::polyspace::{FeSpace, SpaceKind};
use gradproj::projection::decay::{adjacency_for, decay_profile, decay_tsv};
use gradproj::projection::{certify as certify_op, OperatorC, Projector, SpectralCertificate};
use gradproj::stability::measure::no_growth;
use gradproj::stability::range::{cr_dimension_thresholds, preset, q_new_table_tsv, stability_table_tsv};
use gradproj::stability::{stability_range, Degree, NormKind};

use crate::output::{emit, no_tolerances, CliError, Meta};
use crate::{
    CertifyArgs, ClosureBenchArgs, CrCheckArgs, DecayArgs, GradingArgs, MeshArgs, RefineArgs, StabilityArgs, TablesArgs,
};

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn single_simplex(d: usize) -> Result<SimplicialMesh, CliError> {
    let mut coords = vec![vec![Dyadic::ZERO; d]];
    for i in 0..d {
        let mut p = vec![Dyadic::ZERO; d];
        for c in p.iter_mut().take(i + 1) {
            *c = Dyadic::from_int(1);
        }
        coords.push(p);
    }
    Ok(SimplicialMesh::from_parts(d, coords, vec![((0..=d as u32).collect(), d, 0)], vec![])?)
}

/// The mesh and a label for certificates.
fn load_mesh(a: &MeshArgs) -> Result<(SimplicialMesh, String), CliError> {
    if let Some(path) = &a.mesh {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
        return Ok((io::from_json(&text)?, path.clone()));
    }
    if a.single {
        return Ok((single_simplex(a.dim)?, format!("single simplex, d={}", a.dim)));
    }
    Ok((SimplicialMesh::kuhn(a.dim, a.cells)?, format!("kuhn d={} cells={}", a.dim, a.cells)))
}

fn space_kind(degree: &str, zero_trace: bool) -> Result<SpaceKind, CliError> {
    Ok(match (degree.parse::<Degree>()?, zero_trace) {
        (Degree::K(k), false) => SpaceKind::Lagrange { degree: k },
        (Degree::K(k), true) => SpaceKind::LagrangeZeroTrace { degree: k },
        (Degree::Cr, false) => SpaceKind::CrouzeixRaviart,
        (Degree::Cr, true) => SpaceKind::CrouzeixRaviartZeroTrace,
        (Degree::Infinite, _) => return Err(CliError::Input("a finite degree or CR is required".into())),
    })
}

fn parse_p(s: &str) -> Result<f64, CliError> {
    let p = match s.trim() {
        "inf" | "∞" | "infinity" => f64::INFINITY,
        t => t.parse::<f64>().map_err(|_| CliError::Input(format!("invalid exponent {s:?}")))?,
    };
    if !(p >= 1.0) {
        return Err(CliError::Input(format!("exponent {p} is below 1")));
    }
    Ok(p)
}

fn adjacency(s: &str) -> Result<Adjacency, CliError> {
    match s {
        "vertex" => Ok(Adjacency::Vertex),
        "face" => Ok(Adjacency::Face),
        _ => Err(CliError::Input(format!("adjacency must be vertex or face, got {s:?}"))),
    }
}

#[derive(Serialize)]
struct RoundRow {
    round: usize,
    marked: usize,
    elements: usize,
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct GradingReport {
    elements: usize,
    vertices: usize,
    max_level: u32,
    h_grading: f64,
    h_grading_bound: f64,
    level_gap: u32,
    limited_grading: bool,
    closure_ratio: Option<f64>,
    rounds: Vec<RoundRow>,
}

pub fn refine(a: &RefineArgs, config: &Value) -> Result<(), CliError> {
    let (mesh0, _) = load_mesh(&a.mesh)?;
    let policy: MarkingPolicy = a.policy.parse()?;
    let (mesh, bench) = closure_benchmark(&mesh0, policy, a.rounds, a.alpha, a.seed)?;
    let d = mesh.dim();
    let dist = ElementDistance::new(&mesh, Adjacency::Vertex);
    let h_grading = grading_of(&mesh_size(&mesh), &dist)?;
    let h_grading_bound = 2f64.powf(a.alpha as f64 / d as f64);
    let limited_grading = mesh.check_limited_grading(a.alpha).is_ok();
    let report = GradingReport {
        elements: mesh.num_active(),
        vertices: mesh.num_vertices(),
        max_level: mesh.max_level(),
        h_grading,
        h_grading_bound,
        level_gap: level_gap(&mesh, &dist),
        limited_grading,
        closure_ratio: bench.ratio(),
        rounds: bench
            .rounds
            .iter()
            .map(|r| RoundRow {
                round: r.round,
                marked: r.marked,
                elements: r.elements,
                ratio: r.ratio,
            })
            .collect(),
    };
    let meta = Meta::new(config, json!({ "h_grading_relative": 1e-12 }));
    emit(Some(&a.out), &io::to_json(&mesh))?;
    let report_path = a.report.clone().unwrap_or_else(|| format!("{}.report.json", a.out));
    emit(Some(&report_path), &meta.wrap_json("report", &report))?;
    if !limited_grading {
        return Err(CliError::Violation(format!("limited grading with α={} fails", a.alpha)));
    }
    if h_grading > h_grading_bound * (1.0 + 1e-12) {
        return Err(CliError::Violation(format!("grading of h is {h_grading} > {h_grading_bound}")));
    }
    Ok(())
}

fn certify_mesh(mesh: &SimplicialMesh, kind: SpaceKind, label: &str) -> Result<SpectralCertificate, CliError> {
    let proj = Projector::new(FeSpace::new(mesh, kind)?)?;
    let op = OperatorC::new(&proj)?;
    Ok(certify_op(&op, label)?)
}

pub fn certify(a: &CertifyArgs, config: &Value) -> Result<(), CliError> {
    let (mut mesh, label) = load_mesh(&a.mesh)?;
    let kind = space_kind(&a.degree, a.zero_trace)?;
    if a.zero_trace {
        mesh.set_gamma_all();
    }
    let cert = certify_mesh(&mesh, kind, &label)?;
    let meta = Meta::new(config, json!({ "kappa": a.tol_kappa }));
    emit(a.out.as_deref(), &meta.wrap_json("certificate", &cert))?;
    if !cert.within_bound(a.tol_kappa) {
        return Err(CliError::Violation(format!("κ = {} exceeds {}", cert.kappa, cert.bound_kappa)));
    }
    Ok(())
}

pub fn decay(a: &DecayArgs, config: &Value) -> Result<(), CliError> {
    let (mesh, _) = load_mesh(&a.mesh)?;
    let kind = space_kind(&a.degree, false)?;
    let proj = Projector::new(FeSpace::new(&mesh, kind)?)?;
    let dist = ElementDistance::new(&mesh, adjacency_for(&proj));
    if a.origin >= dist.len() {
        return Err(CliError::Input(format!("origin {} outside 0..{}", a.origin, dist.len())));
    }
    let rows = decay_profile(&proj, &dist, &[a.origin], a.max_delta, a.trials, a.seed)?;
    let within = rows.iter().all(|r| r.measured() <= r.bound + a.tol_decay);
    // The sets {δ ≥ delta} are nested, so exact norms cannot increase.
    let monotone = rows
        .windows(2)
        .all(|w| match (w[0].exact, w[1].exact) {
            (Some(x), Some(y)) => y <= x + a.tol_decay,
            _ => true,
        });
    let meta = Meta::new(config, json!({ "decay": a.tol_decay, "monotone": a.tol_decay }));
    let mut out = meta.tsv_header();
    out.push_str(&format!("# within_bound {within}\n# monotone {monotone}\n"));
    out.push_str(&decay_tsv(&rows));
    emit(a.out.as_deref(), &out)?;
    if !within {
        return Err(CliError::Violation("decay bound exceeded".into()));
    }
    if !monotone {
        return Err(CliError::Violation("measured decay increases with δ".into()));
    }
    Ok(())
}

pub fn tables(a: &TablesArgs, config: &Value) -> Result<(), CliError> {
    let dir = Path::new(&a.out_dir);
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", a.out_dir)))?;
    let meta = Meta::new(config, json!({ "decimals": 4 }));
    let th = cr_dimension_thresholds(a.probe_limit);
    let cr = format!(
        "quantity\tvalue\nlp_all_p_max_d\t{}\nw1p_all_p_max_d\t{}\nw12_all_d\t{}\nprobe_limit\t{}\n",
        th.lp_all_p_max_d, th.w1p_all_p_max_d, th.w12_all_d, th.probe_limit
    );
    let files = [
        ("q_new.tsv", q_new_table_tsv()),
        ("stability_2d.tsv", stability_table_tsv(2)),
        ("stability_3d.tsv", stability_table_tsv(3)),
        ("cr_thresholds.tsv", cr),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        emit(Some(&path.to_string_lossy()), &(meta.tsv_header() + &body))?;
    }
    Ok(())
}

pub fn stability(a: &StabilityArgs, config: &Value) -> Result<(), CliError> {
    let degree: Degree = a.degree.parse()?;
    let kind: NormKind = a.norm.parse()?;
    let gamma_h = match (&a.gamma_h, &a.preset) {
        (Some(g), None) => *g,
        (None, Some(name)) => preset(name, a.dim, a.alpha).ok_or_else(|| CliError::Input(format!("unknown preset {name:?}")))?,
        _ => return Err(CliError::Input("give exactly one of --gamma-h and --preset".into())),
    };
    if !(gamma_h >= 1.0 && gamma_h.is_finite()) || !(a.gamma_rho >= 1.0 && a.gamma_rho.is_finite()) {
        return Err(CliError::Input("gradings must be finite and at least 1".into()));
    }
    if a.dim == 0 {
        return Err(input("dimension must be positive"));
    }
    let p = a.p.as_deref().map(parse_p).transpose()?;
    let verdict = stability_range(a.dim, degree, gamma_h, a.gamma_rho, kind, p);
    let meta = Meta::new(config, no_tolerances());
    let body = json!({ "verdict": verdict, "p_interval_text": verdict.p_interval.to_string() });
    emit(a.out.as_deref(), &meta.wrap_json("result", body))
}

pub fn cr_check(a: &CrCheckArgs, config: &Value) -> Result<(), CliError> {
    let mut certs = Vec::new();
    for d in [2, 3] {
        let mesh0 = SimplicialMesh::kuhn(d, a.cells)?;
        let (mesh, _) = closure_benchmark(&mesh0, MarkingPolicy::Corner, a.rounds, 1, 0)?;
        let label = format!("kuhn d={d} cells={} corner rounds={}", a.cells, a.rounds);
        certs.push(certify_mesh(&mesh, SpaceKind::CrouzeixRaviart, &label)?);
    }
    let th = cr_dimension_thresholds(a.probe_limit);
    let meta = Meta::new(config, json!({ "kappa": a.tol_kappa }));
    emit(a.out.as_deref(), &meta.wrap_json("result", json!({ "certificates": certs, "thresholds": th })))?;
    if let Some(c) = certs.iter().find(|c| !c.within_bound(a.tol_kappa)) {
        return Err(CliError::Violation(format!("CR κ = {} exceeds {} in d={}", c.kappa, c.bound_kappa, c.d)));
    }
    Ok(())
}

pub fn closure_bench(a: &ClosureBenchArgs, config: &Value) -> Result<(), CliError> {
    let (mesh0, _) = load_mesh(&a.mesh)?;
    let policy: MarkingPolicy = a.policy.parse()?;
    let (mesh, bench) = closure_benchmark(&mesh0, policy, a.rounds, a.alpha, a.seed)?;
    let ratios: Vec<f64> = bench.rounds.iter().filter_map(|r| r.ratio).collect();
    let meta = Meta::new(config, json!({ "no_growth_factor": 1.05 }));
    let mut out = meta.tsv_header();
    let ratio = bench.ratio().map_or_else(|| "no-op".to_string(), |r| format!("{r:.6}"));
    out.push_str(&format!("# closure_ratio {ratio}\n# no_growth {}\n", no_growth(&ratios)));
    out.push_str(&bench.to_tsv());
    emit(a.out.as_deref(), &out)?;
    mesh.check_limited_grading(a.alpha)
        .map_err(|e| CliError::Violation(e.to_string()))
}

pub fn grading(a: &GradingArgs, config: &Value) -> Result<(), CliError> {
    let (mesh, _) = load_mesh(&a.mesh)?;
    let dist = ElementDistance::new(&mesh, adjacency(&a.adjacency)?);
    let g = grading_of(&mesh_size(&mesh), &dist)?;
    let meta = Meta::new(config, no_tolerances());
    let mut out = meta.tsv_header();
    out.push_str(&format!("# h_grading {g}\n# level_gap {}\n", level_gap(&mesh, &dist)));
    out.push_str(&element_report_tsv(&mesh, &dist));
    emit(a.out.as_deref(), &out)
}
