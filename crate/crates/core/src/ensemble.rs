//! Search averaged over many site-percolated lattices.
//!
//! Failures count as zero probability and zero reciprocal time; the ensemble
//! time is the reciprocal of the mean reciprocal time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::graph::{build_lattice, Family, LatticeSpec, PortGraph};
use crate::search::{default_threshold, search_first_peak};
use crate::Result;

/// Per-member outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub index: usize,
    pub present_count: usize,
    pub peak_time: usize,
    pub peak_prob: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub base: LatticeSpec,
    pub percolation_probability: f64,
    pub seed: u64,
    pub mean_peak_probability: f64,
    /// `None` when every member failed.
    pub aggregated_time: Option<f64>,
    pub success_rate: f64,
    pub members: Vec<MemberRecord>,
}

impl EnsembleResult {
    pub fn n_lattices(&self) -> usize {
        self.members.len()
    }

    pub fn base_size(&self) -> usize {
        self.base.num_vertices()
    }
}

/// Independent per-member seed (SplitMix64 of the master seed and index).
pub fn member_seed(master: u64, index: usize) -> u64 {
    let mut z = master ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Budget for a disordered run: `⌈2·N_present⌉`.
pub fn ensemble_t_max(present_vertices: usize) -> usize {
    2 * present_vertices
}

/// `(mean probability, aggregated time, success rate)` from member records.
pub fn aggregate(members: &[MemberRecord]) -> (f64, Option<f64>, f64) {
    let m = members.len() as f64;
    let mean_prob = members.iter().map(|r| if r.success { r.peak_prob } else { 0.0 }).sum::<f64>() / m;
    let mean_rate = members
        .iter()
        .map(|r| if r.success && r.peak_time > 0 { 1.0 / r.peak_time as f64 } else { 0.0 })
        .sum::<f64>()
        / m;
    let successes = members.iter().filter(|r| r.success).count() as f64;
    let time = (mean_rate > 0.0).then(|| 1.0 / mean_rate);
    (mean_prob, time, successes / m)
}

fn run_member(base: &PortGraph, marked: usize, p: f64, seed: u64, index: usize) -> Result<MemberRecord> {
    let graph = base.percolate_sites(p, marked, member_seed(seed, index))?;
    let present = graph.present_vertex_count();
    let mut rec = MemberRecord { index, present_count: present, peak_time: 0, peak_prob: 0.0, success: false };
    if graph.present_arc_count() == 0 {
        return Ok(rec);
    }
    let res = search_first_peak(&graph, marked, None, ensemble_t_max(present), default_threshold(present))?;
    rec.peak_time = res.peak_time;
    rec.peak_prob = res.peak_probability;
    rec.success = res.success;
    Ok(rec)
}

/// Search on `m` percolated copies of `base`, marked vertex at the centre.
pub fn run_percolation_ensemble(base: &LatticeSpec, p: f64, m: usize, seed: u64) -> Result<EnsembleResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(crate::Error::InvalidLattice(format!("site probability {p} outside [0, 1]")));
    }
    if m == 0 {
        return Err(crate::Error::InvalidLattice("ensemble needs at least one member".into()));
    }
    let graph = build_lattice(base)?;
    let marked = base.center_vertex();
    let members: Vec<MemberRecord> =
        (0..m).into_par_iter().map(|i| run_member(&graph, marked, p, seed, i)).collect::<Result<_>>()?;
    let (mean_peak_probability, aggregated_time, success_rate) = aggregate(&members);
    Ok(EnsembleResult {
        base: base.clone(),
        percolation_probability: p,
        seed,
        mean_peak_probability,
        aggregated_time,
        success_rate,
        members,
    })
}

fn none_sentinel<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("none"),
    }
}

/// One ensemble table row; `agg_time` is written as `none` when all members failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRow {
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub mean_peak_prob: f64,
    #[serde(serialize_with = "none_sentinel")]
    pub agg_time: Option<f64>,
    pub success_rate: f64,
    pub seed: u64,
}

impl From<&EnsembleResult> for EnsembleRow {
    fn from(r: &EnsembleResult) -> Self {
        EnsembleRow {
            dim: r.base.family.dims(),
            n: r.base_size(),
            p: r.percolation_probability,
            m: r.n_lattices(),
            mean_peak_prob: r.mean_peak_probability,
            agg_time: r.aggregated_time,
            success_rate: r.success_rate,
            seed: r.seed,
        }
    }
}

/// Every `(side, p)` combination, ordered by side then `p`.
pub fn ensemble_sweep(family: Family, sides: &[usize], ps: &[f64], m: usize, seed: u64) -> Result<Vec<EnsembleResult>> {
    let cells: Vec<(usize, f64)> = sides.iter().flat_map(|&s| ps.iter().map(move |&p| (s, p))).collect();
    cells
        .par_iter()
        .map(|&(side, p)| run_percolation_ensemble(&LatticeSpec::cube(family, side), p, m, seed))
        .collect()
}
