//! Walk state, coin + shift evolution and observables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coin::CoinAssignment;
use crate::graph::PortGraph;
use crate::{Error, Result, C64};

/// How amplitude leaving along an arc lands at the far vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Shift {
    /// Land on the paired (reverse) arc, so the walker points back where it
    /// came from. Absent arcs keep their amplitude in place. This is the
    /// shift used for search.
    #[default]
    FlipFlop,
    /// Land on the arc continuing in the same direction (`|x,0⟩ → |x−1,0⟩`
    /// on the line). Only defined when every arc is present.
    Moving,
}

/// Complex amplitude on every `(vertex, port)` arc.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    degree: usize,
    amplitudes: Vec<C64>,
    time: usize,
}

impl WalkState {
    pub fn zeros(graph: &PortGraph) -> Self {
        WalkState { degree: graph.degree(), amplitudes: vec![C64::default(); graph.num_arcs()], time: 0 }
    }

    pub fn from_amplitudes(degree: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if degree == 0 || !amplitudes.len().is_multiple_of(degree) {
            return Err(Error::DimensionMismatch { expected: degree, found: amplitudes.len() });
        }
        Ok(WalkState { degree, amplitudes, time: 0 })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, v: usize, p: usize) -> C64 {
        self.amplitudes[v * self.degree + p]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Σ over ports of |amplitude|² at `v`.
    pub fn vertex_probability(&self, v: usize) -> f64 {
        self.amplitudes[v * self.degree..(v + 1) * self.degree].iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &WalkState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a /= norm);
    }
}

/// Equal amplitude on every present arc.
pub fn uniform_state(graph: &PortGraph) -> Result<WalkState> {
    let arcs = graph.present_arc_count();
    if arcs == 0 {
        return Err(Error::NoPresentArcs);
    }
    let amp = C64::new(1.0 / (arcs as f64).sqrt(), 0.0);
    let mut state = WalkState::zeros(graph);
    for (a, &present) in graph.arc_presence().iter().enumerate() {
        if present {
            state.amplitudes[a] = amp;
        }
    }
    Ok(state)
}

/// Amplitude `α` on normal arcs and `p·α` on tunnelling arcs with
/// `(d − t)·α + t·p·α = 1/√N`, renormalised to unit norm over the present arcs.
pub fn weighted_tunnelling_state(graph: &PortGraph, p: f64) -> Result<WalkState> {
    let t = graph.tunnelling_ports();
    if t == 0 {
        return Err(Error::InvalidCoin("weighted start needs tunnelling ports".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidCoin(format!("tunnelling probability {p} outside [0, 1]")));
    }
    let d = graph.degree() as f64;
    let alpha = 1.0 / ((graph.num_vertices() as f64).sqrt() * ((d - t as f64) + t as f64 * p));
    let mut state = WalkState::zeros(graph);
    for (a, &present) in graph.arc_presence().iter().enumerate() {
        if present {
            let w = if graph.is_tunnelling_port(a % graph.degree()) { p * alpha } else { alpha };
            state.amplitudes[a] = C64::new(w, 0.0);
        }
    }
    if state.norm_sqr() == 0.0 {
        return Err(Error::NoPresentArcs);
    }
    state.normalize();
    Ok(state)
}

/// All amplitude on the arcs of `v`, weighted by `coin_weights` (one per port).
pub fn localized_state(graph: &PortGraph, v: usize, coin_weights: &[C64]) -> Result<WalkState> {
    graph.check_vertex(v)?;
    if coin_weights.len() != graph.degree() {
        return Err(Error::DimensionMismatch { expected: graph.degree(), found: coin_weights.len() });
    }
    let mut norm = 0.0;
    for (p, w) in coin_weights.iter().enumerate() {
        if graph.is_arc_present(v, p) {
            norm += w.norm_sqr();
        } else if w.norm_sqr() > 0.0 {
            return Err(Error::Unnormalized(f64::NAN));
        }
    }
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized(norm));
    }
    let mut state = WalkState::zeros(graph);
    let base = graph.arc(v, 0);
    state.amplitudes[base..base + graph.degree()].copy_from_slice(coin_weights);
    Ok(state)
}

/// Coin states for a square-lattice walker started on one vertex, in port
/// order (left, right, down, up), for use with the direction-preserving shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SquareInit {
    /// `(1, 1, i, i)/2`: most of the probability stays at the origin.
    Sym,
    /// `(1, 1, −1, −1)/2`: spreads ballistically with no origin peak.
    Max,
}

impl SquareInit {
    pub fn weights(self) -> [C64; 4] {
        let h = 0.5;
        match self {
            SquareInit::Sym => [C64::new(h, 0.0), C64::new(h, 0.0), C64::new(0.0, h), C64::new(0.0, h)],
            SquareInit::Max => [C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(-h, 0.0)],
        }
    }
}

impl std::str::FromStr for SquareInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(SquareInit::Sym),
            "max" => Ok(SquareInit::Max),
            _ => Err(Error::InvalidCoin(format!("unknown initial coin state `{s}`"))),
        }
    }
}

/// Applies coin-then-shift steps on a fixed graph and coin assignment.
pub struct Walker<'a> {
    coins: &'a CoinAssignment,
    targets: &'a [u32],
    scratch: Vec<C64>,
}

impl<'a> Walker<'a> {
    pub fn new(graph: &'a PortGraph, coins: &'a CoinAssignment, shift: Shift) -> Result<Self> {
        if coins.degree() != graph.degree() {
            return Err(Error::DimensionMismatch { expected: graph.degree(), found: coins.degree() });
        }
        if coins.num_vertices() != graph.num_vertices() {
            return Err(Error::DimensionMismatch { expected: graph.num_vertices(), found: coins.num_vertices() });
        }
        let targets = match shift {
            Shift::FlipFlop => graph.pairing(),
            Shift::Moving if graph.all_arcs_present() => graph.moving_targets(),
            Shift::Moving => {
                return Err(Error::InvalidShift("direction-preserving shift needs every arc present".into()))
            }
        };
        Ok(Walker { coins, targets, scratch: vec![C64::default(); graph.num_arcs()] })
    }

    /// One coin application followed by one shift, in place.
    pub fn step(&mut self, state: &mut WalkState) -> Result<()> {
        if state.amplitudes.len() != self.targets.len() {
            return Err(Error::DimensionMismatch { expected: self.targets.len(), found: state.amplitudes.len() });
        }
        let d = state.degree;
        let (table, index) = self.coins.table();
        for ((input, out), &ci) in state
            .amplitudes
            .chunks_exact(d)
            .zip(self.scratch.chunks_exact_mut(d))
            .zip(index)
        {
            table[ci as usize].apply(input, out);
        }
        for (&amp, &dest) in self.scratch.iter().zip(self.targets) {
            state.amplitudes[dest as usize] = amp;
        }
        state.time += 1;
        Ok(())
    }

    /// Apply `steps` steps, calling `observer` after each.
    pub fn evolve(
        &mut self,
        state: &mut WalkState,
        steps: usize,
        mut observer: impl FnMut(&WalkState),
    ) -> Result<()> {
        for _ in 0..steps {
            self.step(state)?;
            observer(state);
        }
        Ok(())
    }
}

/// Single step without keeping a [`Walker`] around.
pub fn step(state: &WalkState, graph: &PortGraph, coins: &CoinAssignment, shift: Shift) -> Result<WalkState> {
    let mut next = state.clone();
    Walker::new(graph, coins, shift)?.step(&mut next)?;
    Ok(next)
}

pub fn evolve(
    state: &WalkState,
    graph: &PortGraph,
    coins: &CoinAssignment,
    shift: Shift,
    steps: usize,
    observer: impl FnMut(&WalkState),
) -> Result<WalkState> {
    let mut next = state.clone();
    Walker::new(graph, coins, shift)?.evolve(&mut next, steps, observer)?;
    Ok(next)
}

pub fn vertex_probabilities(state: &WalkState) -> Vec<f64> {
    state
        .amplitudes
        .chunks_exact(state.degree)
        .map(|c| c.iter().map(|a| a.norm_sqr()).sum())
        .collect()
}

/// Probability-weighted mean hop distance `⟨r⟩ = Σ pᵢ sᵢ`.
pub fn spread(state: &WalkState, distances: &[Option<u32>]) -> Result<f64> {
    vertex_probabilities(state)
        .iter()
        .zip(distances)
        .enumerate()
        .try_fold(0.0, |acc, (v, (&prob, dist))| match dist {
            Some(s) => Ok(acc + prob * f64::from(*s)),
            None if prob > 0.0 => Err(Error::Unreachable(v)),
            None => Ok(acc),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    pub vertex_probability: Vec<f64>,
    pub origin_probability: f64,
    pub spread: f64,
}

/// Measure `state` relative to the walk's starting vertex.
pub fn observe(state: &WalkState, origin: usize, distances: &[Option<u32>]) -> Result<Observables> {
    Ok(Observables {
        vertex_probability: vertex_probabilities(state),
        origin_probability: state.vertex_probability(origin),
        spread: spread(state, distances)?,
    })
}

/// Position histogram of an unbiased ±1 random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalHistogram {
    pub steps: usize,
    pub iterations: usize,
    /// `counts[i]` is the number of walkers ending at position `i − steps`.
    pub counts: Vec<u64>,
}

impl ClassicalHistogram {
    pub fn positions(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.iterations as f64;
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - self.steps as i64, c as f64 / n))
    }

    pub fn probability(&self, position: i64) -> f64 {
        let idx = position + self.steps as i64;
        if idx < 0 || idx as usize >= self.counts.len() {
            return 0.0;
        }
        self.counts[idx as usize] as f64 / self.iterations as f64
    }

    pub fn mean(&self) -> f64 {
        self.positions().map(|(x, p)| x as f64 * p).sum()
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.iterations as f64;
        let mean = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * (i as f64 - self.steps as f64 - mean).powi(2))
            .sum();
        ss / (n - 1.0)
    }
}

pub fn classical_walk_line(steps: usize, iterations: usize, seed: u64) -> ClassicalHistogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; 2 * steps + 1];
    for _ in 0..iterations {
        let right: usize = (0..steps).filter(|_| rng.gen::<bool>()).count();
        // position = right - left = 2·right − steps, offset by +steps
        counts[2 * right] += 1;
    }
    ClassicalHistogram { steps, iterations, counts }
}
