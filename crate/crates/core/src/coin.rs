//! Coin operators and their per-vertex assignment.
//!
//! Every coin used here is a real orthogonal matrix, so entries are stored as
//! `f64` and applied to complex amplitudes.

use std::collections::HashMap;
use std::fmt;

use crate::graph::{PortGraph, PortMask};
use crate::{Error, Result, C64};

/// A dense `dim × dim` real unitary, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl CoinMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
        }
        Ok(CoinMatrix { dim, entries: rows.concat() })
    }

    fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        CoinMatrix { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn negated(&self) -> Self {
        CoinMatrix { dim: self.dim, entries: self.entries.iter().map(|x| -x).collect() }
    }

    pub fn matmul(&self, rhs: &CoinMatrix) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        Self::from_fn(n, |i, j| (0..n).map(|k| self.get(i, k) * rhs.get(k, j)).sum())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    /// Largest elementwise deviation of `C·C†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.matmul(&self.transpose());
        let id = CoinMatrix::identity(self.dim);
        prod.max_abs_diff(&id)
    }

    pub fn max_abs_diff(&self, other: &CoinMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `out = C · input`.
    #[inline]
    pub fn apply(&self, input: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for (row, o) in self.entries.chunks_exact(n).zip(out.iter_mut()) {
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &x) in row.iter().zip(input) {
                acc += x * c;
            }
            *o = acc;
        }
    }
}

impl fmt::Display for CoinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks_exact(self.dim) {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.12}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn hadamard() -> CoinMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CoinMatrix { dim: 2, entries: vec![h, h, h, -h] }
}

/// `G = (2/d)·J − I`.
pub fn grover(d: usize) -> Result<CoinMatrix> {
    if d < 2 {
        return Err(Error::InvalidCoin(format!("grover coin needs d >= 2, got {d}")));
    }
    Ok(grover_unchecked(d))
}

fn grover_unchecked(d: usize) -> CoinMatrix {
    let off = 2.0 / d as f64;
    CoinMatrix::from_fn(d, |i, j| if i == j { off - 1.0 } else { off })
}

/// Phase-inverted Grover coin placed on the marked vertex.
pub fn marked_coin(d: usize) -> Result<CoinMatrix> {
    grover(d).map(|g| g.negated())
}

/// Convert a tunnelling probability in `[0, 1]` to the coin parameter
/// `c ∈ [0, 2/d]`.
pub fn tunnelling_parameter(probability: f64, d: usize) -> f64 {
    probability * 2.0 / d as f64
}

/// Block coin coupling `d − t` normal ports to `t` tunnelling ports with
/// strength `c`. The normal block is `a` on the diagonal and `b` off it, the
/// tunnelling block `e`/`f`, and every cross entry is `c`.
///
/// `c = 0` decouples the blocks; `c = 2/d` gives the Grover coin. `t = 0`
/// also gives the Grover coin.
pub fn tunnelling_coin(d: usize, t: usize, c: f64) -> Result<CoinMatrix> {
    if d < 2 {
        return Err(Error::InvalidCoin(format!("degree {d} below 2")));
    }
    if 2 * t > d {
        return Err(Error::InvalidCoin(format!("{t} tunnelling ports exceed half of degree {d}")));
    }
    let c_max = 2.0 / d as f64;
    if !(0.0..=c_max * (1.0 + 1e-12)).contains(&c) {
        return Err(Error::InvalidCoin(format!("tunnelling parameter {c} outside [0, {c_max}]")));
    }
    if t == 0 {
        return Ok(grover_unchecked(d));
    }
    let normal = (d - t) as f64;
    let tun = t as f64;
    let disc = 1.0 - normal * tun * c * c;
    if disc < 0.0 {
        return Err(Error::InvalidCoin(format!("negative discriminant {disc}")));
    }
    let root = disc.sqrt();
    let b = (1.0 + root) / normal;
    let a = b - 1.0;
    let f = (1.0 - root) / tun;
    let e = f - 1.0;
    let split = d - t;
    Ok(CoinMatrix::from_fn(d, |i, j| match (i < split, j < split) {
        (true, true) if i == j => a,
        (true, true) => b,
        (false, false) if i == j => e,
        (false, false) => f,
        _ => c,
    }))
}

/// Grover coin on the present ports of `mask`, identity on the absent ones.
pub fn percolation_coin(d: usize, mask: PortMask) -> Result<CoinMatrix> {
    if d < 2 {
        return Err(Error::InvalidCoin(format!("degree {d} below 2")));
    }
    let k = (0..d).filter(|&p| mask.contains(p)).count();
    let off = if k == 0 { 0.0 } else { 2.0 / k as f64 };
    Ok(CoinMatrix::from_fn(d, |i, j| {
        match (mask.contains(i), mask.contains(j)) {
            (true, true) if i == j => off - 1.0,
            (true, true) => off,
            (false, false) if i == j => 1.0,
            _ => 0.0,
        }
    }))
}

/// Per-vertex coins, stored as a table of distinct matrices plus an index.
#[derive(Debug, Clone)]
pub struct CoinAssignment {
    degree: usize,
    coins: Vec<CoinMatrix>,
    index: Vec<u32>,
}

impl CoinAssignment {
    /// The same coin on every vertex.
    pub fn uniform(num_vertices: usize, coin: CoinMatrix) -> Self {
        CoinAssignment { degree: coin.dim(), coins: vec![coin], index: vec![0; num_vertices] }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_vertices(&self) -> usize {
        self.index.len()
    }

    pub fn coin_for(&self, v: usize) -> &CoinMatrix {
        &self.coins[self.index[v] as usize]
    }

    /// Number of distinct matrices in the table.
    pub fn distinct(&self) -> usize {
        self.coins.len()
    }

    pub(crate) fn table(&self) -> (&[CoinMatrix], &[u32]) {
        (&self.coins, &self.index)
    }

    /// Replace the coin at `v`.
    pub fn set_override(&mut self, v: usize, coin: CoinMatrix) -> Result<()> {
        if coin.dim() != self.degree {
            return Err(Error::DimensionMismatch { expected: self.degree, found: coin.dim() });
        }
        self.coins.push(coin);
        self.index[v] = (self.coins.len() - 1) as u32;
        Ok(())
    }
}

/// Assign each vertex its coin:
///
/// * any absent port: [`percolation_coin`] for its mask;
/// * tunnelling graph with `tunnelling_c` given: [`tunnelling_coin`];
/// * otherwise [`grover`].
///
/// The marked vertex gets the negation of whatever it would otherwise have.
pub fn assemble_coins(
    graph: &PortGraph,
    marked: Option<usize>,
    tunnelling_c: Option<f64>,
) -> Result<CoinAssignment> {
    let d = graph.degree();
    let t = graph.tunnelling_ports();
    if let Some(m) = marked {
        graph.check_vertex(m)?;
    }
    if tunnelling_c.is_some() && t == 0 {
        return Err(Error::InvalidCoin("tunnelling parameter given for a graph without tunnelling ports".into()));
    }
    let full = PortMask::full(d);
    let regular = match tunnelling_c {
        Some(c) => tunnelling_coin(d, t, c)?,
        None => grover(d)?,
    };

    let mut table: HashMap<(PortMask, bool), u32> = HashMap::new();
    let mut coins = Vec::new();
    let mut index = Vec::with_capacity(graph.num_vertices());
    for v in 0..graph.num_vertices() {
        let mask = graph.port_mask(v);
        let key = (mask, Some(v) == marked);
        let idx = match table.get(&key) {
            Some(&i) => i,
            None => {
                let base = if mask == full { regular.clone() } else { percolation_coin(d, mask)? };
                coins.push(if key.1 { base.negated() } else { base });
                let i = (coins.len() - 1) as u32;
                table.insert(key, i);
                i
            }
        };
        index.push(idx);
    }
    Ok(CoinAssignment { degree: d, coins, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice, Family, LatticeSpec};

    fn assert_close(a: &CoinMatrix, rows: &[Vec<f64>], tol: f64) {
        let b = CoinMatrix::from_rows(rows).unwrap();
        let diff = a.max_abs_diff(&b);
        assert!(diff <= tol, "deviation {diff}\n{a}");
    }

    #[test]
    fn hadamard_basics() {
        let h = hadamard();
        let mut out = [C64::default(); 2];
        h.apply(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &mut out);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0].re - r).abs() < 1e-15 && (out[1].re - r).abs() < 1e-15);
        assert!(h.matmul(&h).max_abs_diff(&CoinMatrix::identity(2)) < 1e-15);
        for j in 0..2 {
            let norm: f64 = (0..2).map(|i| h.get(i, j).powi(2)).sum();
            assert!((norm - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn grover_entries() {
        let g4 = grover(4).unwrap();
        assert_close(&g4, &[
            vec![-0.5, 0.5, 0.5, 0.5],
            vec![0.5, -0.5, 0.5, 0.5],
            vec![0.5, 0.5, -0.5, 0.5],
            vec![0.5, 0.5, 0.5, -0.5],
        ], 0.0);
        assert_close(&grover(2).unwrap(), &[vec![0.0, 1.0], vec![1.0, 0.0]], 0.0);
        let g3 = grover(3).unwrap();
        assert!((g3.get(0, 0) + 1.0 / 3.0).abs() < 1e-15);
        assert!((g3.get(0, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!(grover(1).is_err());
    }

    #[test]
    fn marked_coin_is_negated_grover() {
        let m = marked_coin(4).unwrap();
        assert_eq!(m.get(0, 0), 0.5);
        assert_eq!(m.get(0, 1), -0.5);
        for d in 2..9 {
            let sum = marked_coin(d).unwrap().entries().iter()
                .zip(grover(d).unwrap().entries())
                .map(|(a, b)| (a + b).abs())
                .fold(0.0, f64::max);
            assert_eq!(sum, 0.0);
        }
        assert!(marked_coin(7).unwrap().unitarity_error() < 1e-12);
        assert!(marked_coin(0).is_err());
    }

    #[test]
    fn tunnelling_limits() {
        let c0 = tunnelling_coin(6, 2, 0.0).unwrap();
        let g4 = grover(4).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = match (i < 4, j < 4) {
                    (true, true) => g4.get(i, j),
                    (false, false) if i == j => -1.0,
                    _ => 0.0,
                };
                assert!((c0.get(i, j) - want).abs() < 1e-15);
            }
        }
        for d in 2..=14 {
            for t in 0..=d / 2 {
                let tc = tunnelling_coin(d, t, 2.0 / d as f64).unwrap();
                assert!(tc.max_abs_diff(&grover(d).unwrap()) < 1e-12, "d={d} t={t}");
            }
        }
    }

    #[test]
    fn tunnelling_rejects_bad_parameters() {
        assert!(tunnelling_coin(6, 4, 0.1).is_err());
        assert!(tunnelling_coin(6, 2, 0.5).is_err());
        assert!(tunnelling_coin(6, 2, -0.1).is_err());
        assert!(tunnelling_coin(1, 0, 0.0).is_err());
        assert!(tunnelling_coin(4, 1, 0.3).unwrap().unitarity_error() < 1e-12);
    }

    #[test]
    fn percolation_masks() {
        let full = percolation_coin(4, PortMask::full(4)).unwrap();
        assert!(full.max_abs_diff(&grover(4).unwrap()) == 0.0);
        let none = percolation_coin(4, PortMask(0)).unwrap();
        assert_eq!(none, CoinMatrix::identity(4));
        let single = percolation_coin(4, PortMask(0b0100)).unwrap();
        assert_eq!(single, CoinMatrix::identity(4));
        for d in 2..=6 {
            for m in 0..1u32 << d {
                let c = percolation_coin(d, PortMask(m)).unwrap();
                assert!(c.unitarity_error() < 1e-12);
                for p in (0..d).filter(|&p| m >> p & 1 == 0) {
                    for q in 0..d {
                        let id = if p == q { 1.0 } else { 0.0 };
                        assert_eq!(c.get(p, q), id);
                        assert_eq!(c.get(q, p), id);
                    }
                }
            }
        }
    }

    #[test]
    fn assemble_square_marked() {
        let g = build_lattice(&LatticeSpec::cube(Family::Square2d, 20)).unwrap();
        let coins = assemble_coins(&g, Some(190), None).unwrap();
        let g4 = grover(4).unwrap();
        let unmarked = (0..400).filter(|&v| *coins.coin_for(v) == g4).count();
        assert_eq!(unmarked, 399);
        assert_eq!(*coins.coin_for(190), marked_coin(4).unwrap());
        assert!(assemble_coins(&g, None, Some(0.1)).is_err());
        assert!(assemble_coins(&g, Some(400), None).is_err());
    }

    #[test]
    fn assemble_stacked_grover_limit() {
        let g = build_lattice(&LatticeSpec::cube(Family::Stacked2d, 4)).unwrap();
        let coins = assemble_coins(&g, Some(5), Some(2.0 / 6.0)).unwrap();
        let g6 = grover(6).unwrap();
        for v in (0..64).filter(|&v| v != 5) {
            assert!(coins.coin_for(v).max_abs_diff(&g6) < 1e-12);
        }
        let plain = assemble_coins(&g, None, Some(0.1)).unwrap();
        let marked = assemble_coins(&g, Some(9), Some(0.1)).unwrap();
        assert_eq!(*marked.coin_for(9), plain.coin_for(9).negated());
    }

    #[test]
    fn assemble_percolated_unitary() {
        let g = build_lattice(&LatticeSpec::cube(Family::Cubic3d, 6)).unwrap();
        let p = g.percolate_sites(0.6, 0, 3).unwrap();
        let coins = assemble_coins(&p, Some(0), None).unwrap();
        assert!(coins.distinct() > 1);
        for v in 0..p.num_vertices() {
            assert!(coins.coin_for(v).unitarity_error() < 1e-12);
        }
        let absent = (0..p.num_vertices()).find(|&v| !p.is_present(v)).unwrap();
        assert!(matches!(assemble_coins(&p, Some(absent), None), Err(Error::AbsentVertex(_))));
    }

    #[test]
    fn display_is_row_major() {
        let text = grover(2).unwrap().to_string();
        assert_eq!(text, "0.000000000000 1.000000000000\n1.000000000000 0.000000000000\n");
    }
}
