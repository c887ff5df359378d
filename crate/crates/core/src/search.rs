//! Marked-vertex search: uniform start, phase-inverted coin on the target,
//! flip-flop shift, and first-peak detection on the marked probability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::{assemble_coins, tunnelling_parameter};
use crate::engine::{uniform_state, weighted_tunnelling_state, Shift, Walker, WalkState};
use crate::graph::{build_lattice, Family, LatticeSpec, PortGraph};
use crate::Result;

/// Marked-vertex probability for `t = 0..=t_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchTrace {
    pub marked: usize,
    pub present_vertices: usize,
    pub marked_probability: Vec<f64>,
}

impl SearchTrace {
    /// `2 / present vertex count`.
    pub fn default_threshold(&self) -> f64 {
        default_threshold(self.present_vertices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub peak_time: usize,
    pub peak_probability: f64,
    pub success: bool,
    pub threshold_used: f64,
}

impl SearchResult {
    fn failure(threshold: f64) -> Self {
        SearchResult { peak_time: 0, peak_probability: 0.0, success: false, threshold_used: threshold }
    }
}

pub fn default_threshold(present_vertices: usize) -> f64 {
    2.0 / present_vertices as f64
}

/// `⌈4·√N⌉ + 20` steps.
pub fn default_t_max(present_vertices: usize) -> usize {
    (4.0 * (present_vertices as f64).sqrt()).ceil() as usize + 20
}

/// Streaming first-peak detector.
///
/// The trace on bipartite lattices climbs in period-2 stairs and on
/// non-bipartite ones in a zig-zag, so the local-maximum test runs on the
/// two-step envelope `e(t) = max(p[t−1], p[t])`: the peak is the first
/// `t ≥ 1` with `e(t) ≥ threshold`, `e(t) ≥ e(t−1)` and `e(t+1) < e(t)`.
/// The reported time is the earliest sample of the run of values equal to
/// `e(t)`.
#[derive(Debug, Clone)]
pub struct PeakDetector {
    threshold: f64,
    samples: Vec<f64>,
    peak: Option<(usize, f64)>,
}

impl PeakDetector {
    pub fn new(threshold: f64) -> Self {
        PeakDetector { threshold, samples: Vec::new(), peak: None }
    }

    fn envelope(&self, t: usize) -> f64 {
        let p = &self.samples;
        if t == 0 {
            p[0]
        } else {
            p[t].max(p[t - 1])
        }
    }

    /// Feed the next sample (the first call is `t = 0`). Returns `true` once
    /// the peak is confirmed; later samples are ignored.
    pub fn push(&mut self, value: f64) -> bool {
        if self.peak.is_some() {
            return true;
        }
        self.samples.push(value);
        let n = self.samples.len();
        if n < 3 {
            return false;
        }
        let t = n - 2;
        let e = self.envelope(t);
        if e >= self.threshold && e >= self.envelope(t - 1) && self.envelope(t + 1) < e {
            let mut k = if self.samples[t] == e { t } else { t - 1 };
            while k > 1 && self.samples[k - 1] == e {
                k -= 1;
            }
            self.peak = Some((k.max(1), e));
        }
        self.peak.is_some()
    }

    pub fn is_closed(&self) -> bool {
        self.peak.is_some()
    }

    pub fn finish(&self) -> SearchResult {
        match self.peak {
            Some((t, p)) => SearchResult { peak_time: t, peak_probability: p, success: true, threshold_used: self.threshold },
            None => SearchResult::failure(self.threshold),
        }
    }
}

pub fn find_first_peak(trace: &[f64], threshold: f64) -> SearchResult {
    let mut det = PeakDetector::new(threshold);
    for &x in trace {
        if det.push(x) {
            break;
        }
    }
    det.finish()
}

fn prepare(graph: &PortGraph, marked: usize, p_tunnel: Option<f64>) -> Result<(crate::coin::CoinAssignment, WalkState)> {
    let c = p_tunnel.map(|p| tunnelling_parameter(p, graph.degree()));
    let coins = assemble_coins(graph, Some(marked), c)?;
    let state = match p_tunnel {
        Some(p) => weighted_tunnelling_state(graph, p)?,
        None => uniform_state(graph)?,
    };
    Ok((coins, state))
}

/// Record the marked-vertex probability for `t = 0..=t_max`.
pub fn run_search(graph: &PortGraph, marked: usize, p_tunnel: Option<f64>, t_max: usize) -> Result<SearchTrace> {
    graph.check_vertex(marked)?;
    let (coins, mut state) = prepare(graph, marked, p_tunnel)?;
    let mut walker = Walker::new(graph, &coins, Shift::FlipFlop)?;
    let mut trace = Vec::with_capacity(t_max + 1);
    trace.push(state.vertex_probability(marked));
    walker.evolve(&mut state, t_max, |s| trace.push(s.vertex_probability(marked)))?;
    Ok(SearchTrace { marked, present_vertices: graph.present_vertex_count(), marked_probability: trace })
}

/// Run until the first peak is confirmed or `t_max` steps have elapsed.
pub fn search_first_peak(
    graph: &PortGraph,
    marked: usize,
    p_tunnel: Option<f64>,
    t_max: usize,
    threshold: f64,
) -> Result<SearchResult> {
    graph.check_vertex(marked)?;
    let (coins, mut state) = prepare(graph, marked, p_tunnel)?;
    let mut walker = Walker::new(graph, &coins, Shift::FlipFlop)?;
    let mut det = PeakDetector::new(threshold);
    det.push(state.vertex_probability(marked));
    for _ in 0..t_max {
        walker.step(&mut state)?;
        if det.push(state.vertex_probability(marked)) {
            break;
        }
    }
    Ok(det.finish())
}

/// One row of a search experiment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRow {
    pub family: Family,
    #[serde(rename = "N")]
    pub n: usize,
    pub extents: String,
    pub p_tunnel: Option<f64>,
    pub peak_time: usize,
    pub peak_prob: f64,
    pub success: bool,
    pub threshold: f64,
    pub t_max: usize,
    pub seed: u64,
}

/// Search at the centre vertex of `spec` with default threshold.
pub fn search_cell(spec: &LatticeSpec, p_tunnel: Option<f64>, t_max: Option<usize>, seed: u64) -> Result<SearchRow> {
    let graph = build_lattice(spec)?;
    let n = graph.present_vertex_count();
    let t_max = t_max.unwrap_or_else(|| default_t_max(n));
    let threshold = default_threshold(n);
    let trace = run_search(&graph, spec.center_vertex(), p_tunnel, t_max)?;
    let res = find_first_peak(&trace.marked_probability, threshold);
    Ok(SearchRow {
        family: spec.family,
        n,
        extents: spec.descriptor(),
        p_tunnel,
        peak_time: res.peak_time,
        peak_prob: res.peak_probability,
        success: res.success,
        threshold,
        t_max,
        seed,
    })
}

/// Cross product of lattices and tunnelling probabilities, one row each,
/// ordered by lattice then probability.
pub fn search_experiment(
    specs: &[LatticeSpec],
    p_tunnel: &[Option<f64>],
    t_max: Option<usize>,
    seed: u64,
) -> Result<Vec<SearchRow>> {
    let cells: Vec<(&LatticeSpec, Option<f64>)> =
        specs.iter().flat_map(|s| p_tunnel.iter().map(move |&p| (s, p))).collect();
    cells.par_iter().map(|&(s, p)| search_cell(s, p, t_max, seed)).collect()
}
