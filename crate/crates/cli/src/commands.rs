//! One function per subcommand. Each returns the files it wrote and a JSON
//! blob of derived results for the summary.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use qwalk_core::analysis::{alpha_vs_p, fit_large_n, prefactor_sweep, Group, Model, ScalingFit};
use qwalk_core::coin::{grover, hadamard, CoinAssignment};
use qwalk_core::engine::{
    classical_walk_line, localized_state, observe, vertex_probabilities, Shift, SquareInit, Walker,
};
use qwalk_core::ensemble::{ensemble_sweep, EnsembleRow};
use qwalk_core::graph::{build_lattice, Family, LatticeSpec};
use qwalk_core::search::{default_t_max, run_search, search_experiment, SearchRow};
use qwalk_core::C64;

use crate::output::{write_csv, write_json};
use crate::{
    Cli, Command, ConnectivityArgs, DepthArgs, FitArgs, PercolationArgs, SearchArgs, ShiftArg, TunnelArgs,
    WalkArgs, WalkLattice,
};

pub struct Report {
    pub outputs: Vec<String>,
    pub results: Value,
}

struct Out<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> Out<'a> {
    fn new(dir: &'a Path) -> Self {
        Out { dir, written: Vec::new() }
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        write_csv(&self.dir.join(name), rows)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(&self.dir.join(name), value)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(self, results: Value) -> Report {
        Report { outputs: self.written, results }
    }
}

pub fn dispatch(cli: &Cli) -> Result<Report> {
    let out = Out::new(&cli.out);
    match &cli.command {
        Command::Walk(a) => walk(a, cli.seed, out),
        Command::Search(a) => search(a, cli.seed, out),
        Command::TunnelSweep(a) => tunnel_sweep(a, cli.seed, out),
        Command::DepthSweep(a) => depth_sweep(a, cli.seed, out),
        Command::ConnectivitySweep(a) => connectivity_sweep(a, cli.seed, out),
        Command::Percolation(a) => percolation(a, cli.seed, out),
        Command::Fit(a) => fit_command(a, out),
    }
}

#[derive(Serialize)]
struct LineRow {
    x: i64,
    probability: f64,
}

#[derive(Serialize)]
struct PlaneRow {
    x: i64,
    y: i64,
    probability: f64,
}

#[derive(Serialize)]
struct WalkTraceRow {
    t: usize,
    origin_probability: f64,
    spread: f64,
}

fn walk(args: &WalkArgs, seed: u64, mut out: Out) -> Result<Report> {
    let steps = args.steps;
    let shift = match args.shift {
        ShiftArg::Moving => Shift::Moving,
        ShiftArg::FlipFlop => Shift::FlipFlop,
    };
    let (spec, weights): (LatticeSpec, Vec<C64>) = match args.lattice {
        WalkLattice::Line => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let w = match args.init.as_deref().unwrap_or("skewed") {
                "skewed" => vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                "symmetric" => vec![C64::new(s, 0.0), C64::new(0.0, s)],
                other => bail!("line walks take --init skewed or symmetric, not `{other}`"),
            };
            (LatticeSpec::cube(Family::Line, 2 * steps + 3), w)
        }
        WalkLattice::Square2d => {
            let init: SquareInit = args.init.as_deref().unwrap_or("sym").parse()?;
            let side = args.side.unwrap_or(2 * steps + 3);
            (LatticeSpec::cube(Family::Square2d, side), init.weights().to_vec())
        }
    };
    let graph = build_lattice(&spec)?;
    let coins = match args.lattice {
        WalkLattice::Line => CoinAssignment::uniform(graph.num_vertices(), hadamard()),
        WalkLattice::Square2d => CoinAssignment::uniform(graph.num_vertices(), grover(4)?),
    };
    let origin = spec.center_vertex();
    let distances = graph.shortest_distances(origin)?;
    let mut state = localized_state(&graph, origin, &weights)?;
    let mut walker = Walker::new(&graph, &coins, shift)?;

    let mut trace = Vec::with_capacity(steps + 1);
    let record = |trace: &mut Vec<WalkTraceRow>, s: &qwalk_core::engine::WalkState| -> Result<()> {
        let obs = observe(s, origin, &distances)?;
        trace.push(WalkTraceRow { t: s.time(), origin_probability: obs.origin_probability, spread: obs.spread });
        Ok(())
    };
    record(&mut trace, &state)?;
    for _ in 0..steps {
        walker.step(&mut state)?;
        record(&mut trace, &state)?;
    }
    let probs = vertex_probabilities(&state);
    let last = trace.last().map(|r| (r.origin_probability, r.spread)).unwrap_or_default();

    match args.lattice {
        WalkLattice::Line => {
            let centre = origin as i64;
            let rows: Vec<LineRow> = (0..graph.num_vertices())
                .map(|v| LineRow { x: v as i64 - centre, probability: probs[v] })
                .filter(|r| r.x.unsigned_abs() as usize <= steps)
                .collect();
            let mean: f64 = rows.iter().map(|r| r.x as f64 * r.probability).sum();
            let var = rows.iter().map(|r| (r.x as f64 - mean).powi(2) * r.probability).sum::<f64>();
            out.csv("walk_line_quantum.csv", &rows)?;
            out.csv("walk_line_trace.csv", &trace)?;
            let mut results = json!({
                "steps": steps,
                "origin_probability": last.0,
                "spread": last.1,
                "quantum_mean": mean,
                "quantum_variance": var,
            });
            if args.classical_iters > 0 {
                let hist = classical_walk_line(steps, args.classical_iters, seed);
                let rows: Vec<LineRow> = hist.positions().map(|(x, p)| LineRow { x, probability: p }).collect();
                out.csv("walk_line_classical.csv", &rows)?;
                results["classical_iterations"] = json!(args.classical_iters);
                results["classical_mean"] = json!(hist.mean());
                results["classical_variance"] = json!(hist.variance());
            }
            Ok(out.finish(results))
        }
        WalkLattice::Square2d => {
            let c = spec.coords_of(origin);
            let rows: Vec<PlaneRow> = (0..graph.num_vertices())
                .map(|v| {
                    let xy = spec.coords_of(v);
                    PlaneRow { x: xy[0] as i64 - c[0] as i64, y: xy[1] as i64 - c[1] as i64, probability: probs[v] }
                })
                .collect();
            out.csv("walk_square2d.csv", &rows)?;
            out.csv("walk_square2d_trace.csv", &trace)?;
            Ok(out.finish(json!({
                "steps": steps,
                "side": spec.extents[0],
                "origin_probability": last.0,
                "spread": last.1,
            })))
        }
    }
}

fn cube_specs(family: Family, sides: &[usize], tunnelling: bool) -> Result<Vec<LatticeSpec>> {
    sides
        .iter()
        .map(|&s| {
            let spec = LatticeSpec::cube(family, s).with_tunnelling(tunnelling);
            spec.validate().with_context(|| format!("{family} with side {s}"))?;
            Ok(spec)
        })
        .collect()
}

fn fit_or_error<K: Clone + std::fmt::Debug + Serialize>(
    groups: &[Group<K>],
    model: Model,
) -> Value {
    match prefactor_sweep(groups, model) {
        Ok(sweep) => serde_json::to_value(sweep).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Time and probability prefactor fits of search rows, grouped by `key`.
fn scaling_results<K, F>(rows: &[SearchRow], key: F) -> Value
where
    K: Clone + std::fmt::Debug + PartialEq + Serialize,
    F: Fn(&SearchRow) -> K,
{
    let mut time: Vec<Group<K>> = Vec::new();
    let mut prob: Vec<Group<K>> = Vec::new();
    for r in rows {
        let k = key(r);
        let pos = match time.iter().position(|(g, _)| *g == k) {
            Some(i) => i,
            None => {
                time.push((k.clone(), Vec::new()));
                prob.push((k, Vec::new()));
                time.len() - 1
            }
        };
        let n = r.n as f64;
        time[pos].1.push((n, r.success.then_some(r.peak_time as f64)));
        prob[pos].1.push((n, r.success.then_some(r.peak_prob)));
    }
    let prob_model = if rows.first().map_or(2, |r| r.family.dims()) <= 2 { Model::LogPrefactor } else { Model::Constant };
    json!({
        "time": fit_or_error(&time, Model::SqrtPrefactor),
        "time_power_law": fit_or_error(&time, Model::PowerLaw),
        "probability": fit_or_error(&prob, prob_model),
    })
}

#[derive(Serialize)]
struct TraceRow {
    family: Family,
    #[serde(rename = "N")]
    n: usize,
    p_tunnel: Option<f64>,
    t: usize,
    marked_probability: f64,
}

fn p_list(p: &Option<crate::Probs>) -> Vec<Option<f64>> {
    match p {
        Some(ps) => ps.0.iter().map(|&p| Some(p)).collect(),
        None => vec![None],
    }
}

fn search(args: &SearchArgs, seed: u64, mut out: Out) -> Result<Report> {
    let specs = cube_specs(args.family, &args.sizes.0, args.p_tunnel.is_some())?;
    let ps = p_list(&args.p_tunnel);
    let rows = search_experiment(&specs, &ps, args.t_max, seed)?;
    out.csv("search.csv", &rows)?;
    if args.trace {
        let cells: Vec<(&LatticeSpec, Option<f64>)> =
            specs.iter().flat_map(|s| ps.iter().map(move |&p| (s, p))).collect();
        let traces: Vec<Vec<TraceRow>> = cells
            .par_iter()
            .map(|&(spec, p)| {
                let graph = build_lattice(spec)?;
                let n = graph.present_vertex_count();
                let t_max = args.t_max.unwrap_or_else(|| default_t_max(n));
                let tr = run_search(&graph, spec.center_vertex(), p, t_max)?;
                Ok(tr
                    .marked_probability
                    .into_iter()
                    .enumerate()
                    .map(|(t, x)| TraceRow { family: spec.family, n, p_tunnel: p, t, marked_probability: x })
                    .collect())
            })
            .collect::<Result<_>>()?;
        out.csv("search_trace.csv", &traces.into_iter().flatten().collect::<Vec<_>>())?;
    }
    Ok(out.finish(scaling_results(&rows, |r| r.p_tunnel)))
}

fn tunnel_sweep(args: &TunnelArgs, seed: u64, mut out: Out) -> Result<Report> {
    let target = args
        .from
        .interpolation_target()
        .with_context(|| format!("{} has no tunnelling interpolation", args.from))?;
    let specs = cube_specs(target, &args.sizes.0, true)?;
    let ps: Vec<Option<f64>> = args.p_tunnel.0.iter().map(|&p| Some(p)).collect();
    let rows = search_experiment(&specs, &ps, args.t_max, seed)?;
    out.csv("tunnel_sweep.csv", &rows)?;
    let mut results = scaling_results(&rows, |r| r.p_tunnel);
    results["from"] = json!(args.from);
    results["to"] = json!(target);
    Ok(out.finish(results))
}

/// Linear interpolation of `y` against `ln N`, clamped to the end points.
pub fn interpolate_log(points: &[(f64, f64)], n: f64) -> Option<f64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (first, last) = (pts.first()?, pts.last()?);
    if n <= first.0 {
        return Some(first.1);
    }
    if n >= last.0 {
        return Some(last.1);
    }
    let i = pts.iter().position(|p| p.0 >= n)?;
    let (a, b) = (pts[i - 1], pts[i]);
    let w = (n.ln() - a.0.ln()) / (b.0.ln() - a.0.ln());
    Some(a.1 + w * (b.1 - a.1))
}

fn depth_sweep(args: &DepthArgs, seed: u64, mut out: Out) -> Result<Report> {
    let side = args.side;
    let square = LatticeSpec::cube(Family::Square2d, side);
    let slabs: Vec<LatticeSpec> = args.depths.0.iter().map(|&l| LatticeSpec::new(Family::Slab3d, [side, side, l])).collect();
    let cubic_sides: Vec<usize> = match &args.cubic_sides {
        Some(s) => s.0.clone(),
        None => args
            .depths
            .0
            .iter()
            .map(|&l| (((side * side * l) as f64).cbrt().round() as usize).max(2))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let cubes = cube_specs(Family::Cubic3d, &cubic_sides, false)?;
    let mut specs = vec![square];
    specs.extend(slabs);
    specs.extend(cubes);
    for s in &specs {
        s.validate()?;
    }
    let rows = search_experiment(&specs, &[None], args.t_max, seed)?;
    out.csv("depth_sweep.csv", &rows)?;

    let square_row = &rows[0];
    let cubic: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.family == Family::Cubic3d && r.success)
        .map(|r| (r.n as f64, r.peak_prob))
        .collect();
    let slab_results: Vec<Value> = rows
        .iter()
        .filter(|r| r.family == Family::Slab3d)
        .map(|r| {
            let depth = r.n / (side * side);
            json!({
                "depth": depth,
                "N": r.n,
                "peak_prob": r.peak_prob,
                "peak_time": r.peak_time,
                "cubic_peak_prob": interpolate_log(&cubic, r.n as f64),
                "ratio_to_square2d": r.peak_prob / square_row.peak_prob,
            })
        })
        .collect();
    Ok(out.finish(json!({
        "square2d": { "N": square_row.n, "peak_prob": square_row.peak_prob, "peak_time": square_row.peak_time },
        "slabs": slab_results,
    })))
}

pub fn connectivity_chain(dim: u8) -> [Family; 4] {
    if dim == 2 {
        [Family::Hex2d, Family::Square2d, Family::Triangular2d, Family::SquareDiag2d]
    } else {
        [Family::Hex3d, Family::Cubic3d, Family::CubicDiag1, Family::CubicDiag2]
    }
}

fn connectivity_sweep(args: &ConnectivityArgs, seed: u64, mut out: Out) -> Result<Report> {
    let chain = connectivity_chain(args.dim);
    let mut specs = Vec::new();
    for fam in chain {
        specs.extend(cube_specs(fam, &args.sizes.0, false)?);
    }
    let mut rows = search_experiment(&specs, &[None], args.t_max, seed)?;
    if args.p_tunnel.is_some() {
        let mut link_specs = Vec::new();
        for fam in &chain[1..] {
            link_specs.extend(cube_specs(*fam, &args.sizes.0, true)?);
        }
        rows.extend(search_experiment(&link_specs, &p_list(&args.p_tunnel), args.t_max, seed)?);
    }
    out.csv("connectivity.csv", &rows)?;
    let by_size: Vec<Value> = args
        .sizes
        .0
        .iter()
        .map(|&s| {
            let times: Vec<Value> = chain
                .iter()
                .filter_map(|f| {
                    rows.iter().find(|r| r.family == *f && r.p_tunnel.is_none() && r.extents == LatticeSpec::cube(*f, s).descriptor())
                })
                .map(|r| json!({ "family": r.family, "degree": r.family.degree(), "peak_time": r.peak_time, "peak_prob": r.peak_prob }))
                .collect();
            json!({ "side": s, "runs": times })
        })
        .collect();
    Ok(out.finish(json!({
        "by_size": by_size,
        "fits": scaling_results(&rows, |r| (r.family, r.p_tunnel)),
    })))
}

fn percolation(args: &PercolationArgs, seed: u64, mut out: Out) -> Result<Report> {
    let family = if args.dim == 2 { Family::Square2d } else { Family::Cubic3d };
    if args.m == 0 {
        bail!("--m must be at least 1");
    }
    let results = ensemble_sweep(family, &args.sizes.0, &args.p.0, args.m, seed)?;
    let rows: Vec<EnsembleRow> = results.iter().map(EnsembleRow::from).collect();
    out.csv("percolation.csv", &rows)?;
    if args.dump {
        for r in &results {
            let name = format!("percolation_members_N{}_p{}.csv", r.base_size(), r.percolation_probability);
            out.csv(&name, &r.members)?;
        }
    }
    let alpha = match alpha_vs_p(&results) {
        Ok(a) => serde_json::to_value(a)?,
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(out.finish(json!({ "family": family, "alpha_vs_p": alpha })))
}

#[derive(Serialize)]
struct FitEntry {
    group: Option<String>,
    #[serde(flatten)]
    fit: ScalingFit,
    large_n: Option<ScalingFit>,
}

fn fit_command(args: &FitArgs, mut out: Out) -> Result<Report> {
    let mut reader = csv::Reader::from_path(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).with_context(|| {
            format!("schema mismatch: no column `{name}` in {} (has {})", args.input.display(), headers.iter().collect::<Vec<_>>().join(","))
        })
    };
    let xi = column(&args.x)?;
    let yi = column(&args.y)?;
    let gi = args.group_by.as_deref().map(column).transpose()?;
    let si = headers.iter().position(|h| h == "success");

    let mut groups: Vec<Group<Option<String>>> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let at = |i: usize| rec.get(i).unwrap_or("");
        let x: f64 = at(xi)
            .parse()
            .with_context(|| format!("schema mismatch: row {} has non-numeric {} `{}`", line + 2, args.x, at(xi)))?;
        let failed = si.is_some_and(|i| at(i) == "false");
        let y = match at(yi) {
            "none" | "" => None,
            s => Some(s.parse::<f64>().with_context(|| {
                format!("schema mismatch: row {} has non-numeric {} `{s}`", line + 2, args.y)
            })?),
        }
        .filter(|_| !failed);
        let key = gi.map(|i| at(i).to_string());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((x, y)),
            None => groups.push((key, vec![(x, y)])),
        }
    }
    if groups.is_empty() {
        bail!("{} has no data rows", args.input.display());
    }
    let sweep = prefactor_sweep(&groups, args.model)?;
    let fits: Vec<FitEntry> = sweep
        .series
        .into_iter()
        .map(|(group, f)| {
            let pts: Vec<(f64, f64)> = groups
                .iter()
                .find(|(k, _)| *k == group)
                .map(|(_, p)| p.iter().map(|&(x, y)| (x, y.unwrap_or(0.0))).collect())
                .unwrap_or_default();
            FitEntry { group, fit: f, large_n: fit_large_n(args.model, &pts).ok() }
        })
        .collect();
    let report = json!({
        "input": args.input,
        "x": args.x,
        "y": args.y,
        "group_by": args.group_by,
        "fits": fits,
        "excluded": sweep.excluded,
    });
    out.json("fit_report.json", &report)?;
    Ok(out.finish(report))
}
