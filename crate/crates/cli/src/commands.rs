use std::collections::BTreeMap;
use std::fs;

use hypervol::catalog::prism_235;
use hypervol::glue::{self, Certificate, GluingSolution, SolveOptions};
use hypervol::graph::{plan_from_trace, reduce, FaceId, Move, PlanarTrivalentGraph, Strategy};
use hypervol::kr::{self, GrowthSeries, InvariantValue, ScanPoint};
use hypervol::tetra::{self, EdgeParameter, TetrahedronShape};
use serde::Serialize;

use crate::error::CliError;
use crate::input::{self, load_polyhedron, load_script};
use crate::output::{opt_sig6, print_json, sig6, write_csv};
use crate::{KrArgs, ScanArgs, ScanMode, VolumeArgs};

#[derive(Serialize)]
struct TetReport {
    #[serde(rename = "type")]
    kind: String,
    symbol: String,
    volume: String,
    volume_raw: f64,
    signature: String,
    /// Recovered angles at the length slots, 1-based slot order.
    angles: [Option<f64>; 6],
    euclidean_degenerate: bool,
    params: [EdgeParameter; 6],
}

pub fn tet_volume(params: &[EdgeParameter], json: bool) -> Result<(), CliError> {
    let params: [EdgeParameter; 6] = params
        .try_into()
        .map_err(|_| CliError::validation("exactly six parameters are required"))?;
    let shape = TetrahedronShape::new(params);
    let ev = tetra::evaluate(&shape)?;
    let report = TetReport {
        kind: format!("{:?}", ev.kind),
        symbol: ev.kind.symbol(),
        volume: sig6(ev.volume),
        volume_raw: ev.volume,
        signature: ev.signature.to_string(),
        angles: ev.length_angles,
        euclidean_degenerate: ev.signature.is_euclidean(),
        params,
    };
    if json {
        return print_json(&report);
    }
    println!("type:      {} ({})", report.kind, report.symbol);
    println!("volume:    {}", report.volume);
    println!("signature: {}", report.signature);
    for (k, a) in report.angles.iter().enumerate() {
        if let Some(a) = a {
            println!("angle at length slot {}: {}", k + 1, sig6(*a));
        }
    }
    if report.euclidean_degenerate {
        println!("note: Euclidean degenerate shape, the hyperbolic volume is zero");
    }
    Ok(())
}

fn strategy(trace: Option<&std::path::Path>) -> Result<Strategy, CliError> {
    Ok(match trace {
        Some(p) => Strategy::Script(load_script(p)?),
        None => Strategy::Default,
    })
}

#[derive(Serialize)]
struct VolumeReport {
    polyhedron: String,
    expected_volume: Option<f64>,
    moves: Vec<Move>,
    tetrahedron_types: BTreeMap<String, usize>,
    volume: String,
    volume_raw: f64,
    /// Finite-difference gradient of the potential at the solution.
    potential_gradient: Vec<f64>,
    certificate: Certificate,
    solution: GluingSolution,
}

#[derive(Serialize)]
struct LengthRow {
    face_a: FaceId,
    face_b: FaceId,
    length: f64,
}

fn solve_volume(
    graph: &PlanarTrivalentGraph,
    strategy: &Strategy,
    opts: &SolveOptions,
) -> Result<
    (
        Vec<Move>,
        glue::GluingSolution,
        Vec<f64>,
        BTreeMap<String, usize>,
    ),
    CliError,
> {
    let trace = reduce(graph, strategy)?;
    let plan = plan_from_trace(graph, &trace)?;
    let solution = glue::solve(&plan, opts)?;
    let gradient = glue::potential_gradient_fd(&plan, &solution.length_vector(), 1e-5)?;
    let types = plan
        .type_counts()
        .into_iter()
        .map(|(k, n)| (format!("{k:?}"), n))
        .collect();
    Ok((trace.moves, solution, gradient, types))
}

pub fn volume(args: &VolumeArgs, json: bool) -> Result<(), CliError> {
    let loaded = load_polyhedron(&args.polyhedron)?;
    let strategy = strategy(args.trace.as_deref())?;
    if let Some(dot) = &args.dot {
        let trace = reduce(&loaded.graph, &strategy)?;
        fs::write(dot, trace.to_dot(&loaded.graph))?;
    }
    let opts = SolveOptions {
        tol: args.tol,
        seed: args.seed,
        ..SolveOptions::default()
    };
    let (moves, solution, gradient, types) = solve_volume(&loaded.graph, &strategy, &opts)?;
    if let Some(path) = &args.csv {
        let rows: Vec<LengthRow> = solution
            .lengths
            .iter()
            .map(|l| LengthRow {
                face_a: l.faces.0,
                face_b: l.faces.1,
                length: l.length,
            })
            .collect();
        write_csv(path, &rows)?;
    }
    let report = VolumeReport {
        polyhedron: loaded.name,
        expected_volume: loaded.expected_volume,
        moves,
        tetrahedron_types: types,
        volume: sig6(solution.volume),
        volume_raw: solution.volume,
        potential_gradient: gradient,
        certificate: glue::width_uniform_certificate(&solution, args.tol),
        solution,
    };
    if json {
        return print_json(&report);
    }
    println!("polyhedron: {}", report.polyhedron);
    let moves: Vec<String> = report.moves.iter().map(|m| m.to_string()).collect();
    println!("reduction:  {} moves: {}", moves.len(), moves.join(", "));
    let types: Vec<String> = report
        .tetrahedron_types
        .iter()
        .map(|(k, n)| format!("{k}×{n}"))
        .collect();
    println!(
        "tetrahedra: {} ({})",
        report.solution.tetrahedra.len(),
        types.join(", ")
    );
    for l in &report.solution.lengths {
        println!("  length p{},{} = {}", l.faces.0, l.faces.1, sig6(l.length));
    }
    match report.expected_volume {
        Some(e) => println!("volume:     {} (catalog value {})", report.volume, sig6(e)),
        None => println!("volume:     {}", report.volume),
    }
    println!("residual:   {:.2e}", report.solution.max_residual());
    for alt in &report.solution.multiplicity_note {
        println!("  further solution with volume {}", sig6(alt.volume));
    }
    for f in &report.certificate.flags {
        println!("warning: {f}");
    }
    Ok(())
}

#[derive(Serialize)]
struct KrLevel {
    r: u32,
    value: String,
    raw: InvariantValue,
}

#[derive(Serialize)]
struct KrReport {
    polyhedron: String,
    method: &'static str,
    levels: Vec<KrLevel>,
    series: GrowthSeries,
    geometric_volume: Option<f64>,
}

#[derive(Serialize)]
struct KrRow {
    r: u32,
    value: f64,
}

pub fn kr(args: &KrArgs, json: bool) -> Result<(), CliError> {
    let loaded = load_polyhedron(&args.polyhedron)?;
    let strategy = strategy(args.trace.as_deref())?;
    let closed_form =
        !args.network && args.trace.is_none() && loaded.graph.same_combinatorics(&prism_235());
    let mut values = Vec::with_capacity(args.levels.len());
    for &r in &args.levels {
        let v = if closed_form {
            kr::prism_invariant(r)?
        } else {
            let coloring = kr::coloring_sequence(&loaded.graph, r)?;
            kr::evaluate_network(&loaded.graph, &coloring, r, &strategy)?
        };
        values.push(v);
    }
    let series = kr::growth_series(&values);
    let geometric_volume = if args.no_volume {
        None
    } else {
        solve_volume(&loaded.graph, &Strategy::Default, &SolveOptions::default())
            .ok()
            .map(|s| s.1.volume)
    };
    if let Some(path) = &args.csv {
        let rows: Vec<KrRow> = series
            .points
            .iter()
            .map(|p| KrRow {
                r: p.r,
                value: p.value,
            })
            .collect();
        write_csv(path, &rows)?;
    }
    let report = KrReport {
        polyhedron: loaded.name,
        method: if closed_form {
            "prism closed form"
        } else {
            "network recoupling"
        },
        levels: values
            .into_iter()
            .map(|v| KrLevel {
                r: v.r,
                value: sig6(v.growth),
                raw: v,
            })
            .collect(),
        series,
        geometric_volume,
    };
    if json {
        return print_json(&report);
    }
    println!("polyhedron: {} ({})", report.polyhedron, report.method);
    println!("{:>6}  {:>10}  {:>9}  {:>5}", "r", "V(r)", "phase", "bits");
    for l in &report.levels {
        println!(
            "{:>6}  {:>10}  {:>9.5}  {:>5}",
            l.r, l.value, l.raw.phase, l.raw.precision_bits
        );
    }
    if let Some(x) = &report.series.extrapolation {
        println!(
            "fit V ≈ {} + ({})/r, residual {:.1e}",
            sig6(x.limit),
            sig6(x.slope),
            x.residual
        );
    }
    if !report.series.excluded.is_empty() {
        println!("vanishing at r = {:?}", report.series.excluded);
    }
    println!("volume: {}", opt_sig6(report.geometric_volume));
    Ok(())
}

#[derive(Serialize)]
struct ScanReport {
    mode: &'static str,
    r: i64,
    k: Option<u32>,
    j_range: Option<kr::JRange>,
    max_deviation: Option<f64>,
    points: Vec<ScanPoint>,
}

pub fn scan(args: &ScanArgs, json: bool) -> Result<(), CliError> {
    let level = kr::Level::new(args.r)?;
    if args.step == 0 {
        return Err(CliError::validation("--step must be positive"));
    }
    let last = args.to.unwrap_or(level.max_color() / 2);
    let spins: Vec<u32> = (args.from..=last).step_by(args.step as usize).collect();
    let report = match args.mode {
        ScanMode::Sixj => {
            let points = kr::single_sixj_scan(args.r, &spins)?;
            ScanReport {
                mode: "sixj",
                r: args.r,
                k: None,
                j_range: None,
                max_deviation: kr::max_deviation(&points),
                points,
            }
        }
        ScanMode::DoublyTruncated => {
            let k = match args.k {
                Some(k) => k,
                None if (args.r - 3) % 3 == 0 => (args.r as u32 - 3) / 3,
                None => {
                    return Err(CliError::validation(
                        "(r−3) is not divisible by 3; pass --k",
                    ))
                }
            };
            let range = args.j_range.into();
            let points = kr::doubly_truncated_scan(args.r, k, &spins, range)?;
            let max_deviation = kr::max_deviation(&points);
            ScanReport {
                mode: "doubly-truncated",
                r: args.r,
                k: Some(k),
                j_range: Some(range),
                max_deviation,
                points,
            }
        }
    };
    if let Some(path) = &args.csv {
        write_csv(path, &report.points)?;
    }
    if json {
        return print_json(&report);
    }
    println!(
        "{:>5}  {:>8}  {:>10}  {:>10}",
        "k", "angle", "value", "reference"
    );
    for p in &report.points {
        println!(
            "{:>5}  {:>8.5}  {:>10}  {:>10}",
            p.k,
            p.angle,
            opt_sig6(p.value),
            opt_sig6(p.reference)
        );
    }
    println!("max deviation: {}", opt_sig6(report.max_deviation));
    Ok(())
}

#[derive(Serialize)]
struct CatalogLine {
    name: String,
    faces: usize,
    expected_volume: Option<f64>,
    notes: String,
}

pub fn catalog(name: Option<&str>, json: bool) -> Result<(), CliError> {
    let entries = input::catalog_entries()?;
    if let Some(name) = name {
        let entry = match entries.into_iter().find(|e| e.name == name) {
            Some(e) => e,
            None => hypervol::catalog::lookup(name)?,
        };
        return print_json(&entry);
    }
    let lines: Vec<CatalogLine> = entries
        .into_iter()
        .map(|e| CatalogLine {
            faces: e.polyhedron.faces.len(),
            name: e.name,
            expected_volume: e.expected_volume,
            notes: e.notes,
        })
        .collect();
    if json {
        return print_json(&lines);
    }
    for l in &lines {
        println!(
            "{:<28} {:>2} faces  {:>8}  {}",
            l.name,
            l.faces,
            opt_sig6(l.expected_volume),
            l.notes
        );
    }
    Ok(())
}
