//! Port-labelled lattices with periodic boundaries.
//!
//! Every vertex owns `degree` ordered ports. The walk state lives on arcs
//! `(vertex, port)`, and each present arc is paired with exactly one arc on
//! the far side of its edge. The pairing is an involution: following it twice
//! returns to the starting arc. Absent arcs (missing edge or missing far
//! vertex) are paired with themselves.
//!
//! Tunnelling ports, when a family is built as an interpolation, are always
//! the last `t` port indices of every vertex.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lattice families understood by [`build_lattice`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Cycle graph, ports (left, right).
    Line,
    /// Brick-wall honeycomb, degree 3.
    Hex2d,
    /// Square lattice, degree 4.
    Square2d,
    /// Square lattice plus the SW/NE diagonal, degree 6.
    Triangular2d,
    /// Square lattice plus both diagonals, degree 8.
    SquareDiag2d,
    /// Cubic lattice with one alternating z-edge per vertex, degree 5.
    Hex3d,
    /// Simple cubic lattice, degree 6.
    Cubic3d,
    /// Cubic lattice plus the xy-face diagonals, degree 10.
    CubicDiag1,
    /// Cubic lattice plus the xy- and xz-face diagonals, degree 14.
    CubicDiag2,
    /// Cubic lattice of independent width, height and depth, open along the
    /// depth axis; depth 1 is the square lattice.
    Slab3d,
    /// Stack of square lattices joined by tunnelling z-edges, degree 6.
    Stacked2d,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Line,
        Family::Hex2d,
        Family::Square2d,
        Family::Triangular2d,
        Family::SquareDiag2d,
        Family::Hex3d,
        Family::Cubic3d,
        Family::CubicDiag1,
        Family::CubicDiag2,
        Family::Slab3d,
        Family::Stacked2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Line => "line",
            Family::Hex2d => "hex2d",
            Family::Square2d => "square2d",
            Family::Triangular2d => "triangular2d",
            Family::SquareDiag2d => "square_diag2d",
            Family::Hex3d => "hex3d",
            Family::Cubic3d => "cubic3d",
            Family::CubicDiag1 => "cubic_diag1",
            Family::CubicDiag2 => "cubic_diag2",
            Family::Slab3d => "slab3d",
            Family::Stacked2d => "stacked2d",
        }
    }

    /// Spatial dimension, i.e. the number of extents.
    pub fn dims(self) -> usize {
        match self {
            Family::Line => 1,
            Family::Hex2d | Family::Square2d | Family::Triangular2d | Family::SquareDiag2d => 2,
            _ => 3,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Family::Line => 2,
            Family::Hex2d => 3,
            Family::Square2d => 4,
            Family::Hex3d => 5,
            Family::Triangular2d | Family::Cubic3d | Family::Slab3d | Family::Stacked2d => 6,
            Family::SquareDiag2d => 8,
            Family::CubicDiag1 => 10,
            Family::CubicDiag2 => 14,
        }
    }

    /// Number of tunnelling ports when the family is built as the target of an
    /// interpolation. Zero for families that are never an interpolation target.
    pub fn interpolation_ports(self) -> usize {
        match self {
            Family::Square2d | Family::Cubic3d => 1,
            Family::Triangular2d | Family::SquareDiag2d | Family::Stacked2d => 2,
            Family::CubicDiag1 | Family::CubicDiag2 => 4,
            Family::Line | Family::Hex2d | Family::Hex3d | Family::Slab3d => 0,
        }
    }

    /// The family reached by switching on tunnelling edges on top of `self`.
    ///
    /// `Stacked2d` is special: it already is the interpolating family (its
    /// z-edges tunnel), and fully tunnelling it gives the cubic lattice.
    pub fn interpolation_target(self) -> Option<Family> {
        match self {
            Family::Hex2d => Some(Family::Square2d),
            Family::Square2d => Some(Family::Triangular2d),
            Family::Triangular2d => Some(Family::SquareDiag2d),
            Family::Hex3d => Some(Family::Cubic3d),
            Family::Cubic3d => Some(Family::CubicDiag1),
            Family::CubicDiag1 => Some(Family::CubicDiag2),
            Family::Stacked2d => Some(Family::Stacked2d),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// What to build: a family, its side lengths and boundary handling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub family: Family,
    pub extents: Vec<usize>,
    /// Wrap every axis except the depth axis of a slab, which is always open.
    pub periodic: bool,
    /// Flag the ports the family adds over its predecessor as tunnelling.
    /// Always on for [`Family::Stacked2d`].
    pub tunnelling: bool,
}

impl LatticeSpec {
    pub fn new(family: Family, extents: impl Into<Vec<usize>>) -> Self {
        LatticeSpec {
            family,
            extents: extents.into(),
            periodic: true,
            tunnelling: family == Family::Stacked2d,
        }
    }

    /// Equal side length in every dimension of the family.
    pub fn cube(family: Family, side: usize) -> Self {
        LatticeSpec::new(family, vec![side; family.dims()])
    }

    pub fn with_tunnelling(mut self, tunnelling: bool) -> Self {
        self.tunnelling = tunnelling || self.family == Family::Stacked2d;
        self
    }

    pub fn with_periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.extents.iter().product()
    }

    /// Number of tunnelling ports per vertex this spec produces.
    pub fn tunnelling_ports(&self) -> usize {
        if self.tunnelling {
            self.family.interpolation_ports()
        } else {
            0
        }
    }

    /// Extents joined with `x`, e.g. `20x20`.
    pub fn descriptor(&self) -> String {
        self.extents
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn validate(&self) -> Result<()> {
        let fam = self.family;
        if self.extents.len() != fam.dims() {
            return Err(Error::InvalidLattice(format!(
                "{fam} needs {} extents, got {}",
                fam.dims(),
                self.extents.len()
            )));
        }
        for (axis, &e) in self.extents.iter().enumerate() {
            let min = if fam == Family::Slab3d && axis == 2 { 1 } else { 2 };
            if e < min {
                return Err(Error::InvalidLattice(format!(
                    "{fam} extent {e} on axis {axis} is below {min}"
                )));
            }
        }
        if matches!(fam, Family::Hex2d | Family::Hex3d)
            || (self.tunnelling && matches!(fam, Family::Square2d | Family::Cubic3d))
        {
            if let Some(e) = self.extents.iter().find(|&&e| e % 2 == 1) {
                return Err(Error::InvalidLattice(format!(
                    "brick-wall construction needs even sides, got {e}"
                )));
            }
        }
        if self.tunnelling && fam.interpolation_ports() == 0 {
            return Err(Error::InvalidLattice(format!(
                "{fam} is not an interpolation target"
            )));
        }
        if self.num_vertices() > u32::MAX as usize / fam.degree() {
            return Err(Error::InvalidLattice("lattice too large".into()));
        }
        Ok(())
    }

    /// Vertex with coordinates `extent / 2` on every axis.
    pub fn center_vertex(&self) -> usize {
        let coords: Vec<usize> = self.extents.iter().map(|e| e / 2).collect();
        self.vertex_at(&coords)
    }

    /// Row-major index with the first axis fastest: `x + w·(y + h·z)`.
    pub fn vertex_at(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.extents)
            .rev()
            .fold(0, |acc, (&c, &e)| acc * e + c)
    }

    pub fn coords_of(&self, mut v: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for (axis, &e) in self.extents.iter().enumerate() {
            out[axis] = v % e;
            v /= e;
        }
        out
    }
}

type Dir = [i64; 3];

const fn d(x: i64, y: i64, z: i64) -> Dir {
    [x, y, z]
}

fn neg(dir: Dir) -> Dir {
    [-dir[0], -dir[1], -dir[2]]
}

/// Ordered port directions at the vertex with coordinates `c`.
fn port_directions(spec: &LatticeSpec, c: [usize; 3]) -> Vec<Dir> {
    const SQUARE: [Dir; 4] = [d(-1, 0, 0), d(1, 0, 0), d(0, -1, 0), d(0, 1, 0)];
    const CUBIC: [Dir; 6] = [
        d(-1, 0, 0),
        d(1, 0, 0),
        d(0, -1, 0),
        d(0, 1, 0),
        d(0, 0, -1),
        d(0, 0, 1),
    ];
    // brick-wall vertical: up on even parity sites
    let parity = |sum: usize| if sum.is_multiple_of(2) { 1 } else { -1 };
    let sxy = parity(c[0] + c[1]);
    let sxyz = parity(c[0] + c[1] + c[2]);

    let mut dirs = Vec::with_capacity(spec.family.degree());
    match spec.family {
        Family::Line => dirs.extend([d(-1, 0, 0), d(1, 0, 0)]),
        Family::Hex2d => dirs.extend([d(-1, 0, 0), d(1, 0, 0), d(0, sxy, 0)]),
        Family::Square2d if spec.tunnelling => {
            dirs.extend([d(-1, 0, 0), d(1, 0, 0), d(0, sxy, 0), d(0, -sxy, 0)])
        }
        Family::Square2d => dirs.extend(SQUARE),
        Family::Triangular2d => {
            dirs.extend(SQUARE);
            dirs.extend([d(-1, -1, 0), d(1, 1, 0)]);
        }
        Family::SquareDiag2d => {
            dirs.extend(SQUARE);
            dirs.extend([d(-1, -1, 0), d(1, 1, 0), d(1, -1, 0), d(-1, 1, 0)]);
        }
        Family::Hex3d => {
            dirs.extend(&CUBIC[..4]);
            dirs.push(d(0, 0, sxyz));
        }
        Family::Cubic3d if spec.tunnelling => {
            dirs.extend(&CUBIC[..4]);
            dirs.extend([d(0, 0, sxyz), d(0, 0, -sxyz)]);
        }
        Family::Cubic3d | Family::Slab3d | Family::Stacked2d => dirs.extend(CUBIC),
        Family::CubicDiag1 => {
            dirs.extend(CUBIC);
            dirs.extend([d(-1, -1, 0), d(1, 1, 0), d(1, -1, 0), d(-1, 1, 0)]);
        }
        Family::CubicDiag2 => {
            dirs.extend(CUBIC);
            dirs.extend([d(-1, -1, 0), d(1, 1, 0), d(1, -1, 0), d(-1, 1, 0)]);
            dirs.extend([d(-1, 0, -1), d(1, 0, 1), d(1, 0, -1), d(-1, 0, 1)]);
        }
    }
    dirs
}

/// Set of present ports at a vertex; bit `p` is port `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortMask(pub u32);

impl PortMask {
    pub fn full(degree: usize) -> Self {
        PortMask(((1u64 << degree) - 1) as u32)
    }

    pub fn contains(self, port: usize) -> bool {
        self.0 >> port & 1 == 1
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Parse a string like `1101`, where the first character is port 0.
    pub fn parse(s: &str) -> Result<Self> {
        if s.len() > 32 {
            return Err(Error::InvalidCoin(format!("mask `{s}` longer than 32 ports")));
        }
        s.chars().enumerate().try_fold(PortMask(0), |m, (i, ch)| match ch {
            '1' => Ok(PortMask(m.0 | 1 << i)),
            '0' => Ok(m),
            _ => Err(Error::InvalidCoin(format!("bad mask character `{ch}`"))),
        })
    }

    /// Render as a `degree`-character string, port 0 first.
    pub fn render(self, degree: usize) -> String {
        (0..degree)
            .map(|p| if self.contains(p) { '1' } else { '0' })
            .collect()
    }
}

/// A port-labelled graph with an arc-pairing involution.
#[derive(Debug, Clone, PartialEq)]
pub struct PortGraph {
    spec: Option<LatticeSpec>,
    num_vertices: usize,
    degree: usize,
    tunnelling: usize,
    /// arc -> paired arc (the reverse arc across the edge)
    neighbor: Vec<u32>,
    /// arc -> arc continuing in the same direction at the far vertex
    moving: Vec<u32>,
    vertex_present: Vec<bool>,
    arc_present: Vec<bool>,
}

/// Build the lattice described by `spec`, with every vertex present.
pub fn build_lattice(spec: &LatticeSpec) -> Result<PortGraph> {
    spec.validate()?;
    let n = spec.num_vertices();
    let deg = spec.family.degree();
    let ext = {
        let mut e = [1usize; 3];
        e[..spec.extents.len()].copy_from_slice(&spec.extents);
        e
    };

    let dirs: Vec<Vec<Dir>> = (0..n).map(|v| port_directions(spec, spec.coords_of(v))).collect();
    debug_assert!(dirs.iter().all(|ds| ds.len() == deg));

    let mut neighbor = vec![0u32; n * deg];
    let mut moving = vec![0u32; n * deg];
    let mut arc_present = vec![true; n * deg];

    for v in 0..n {
        let c = spec.coords_of(v);
        for (p, &dir) in dirs[v].iter().enumerate() {
            let arc = v * deg + p;
            let mut target = [0usize; 3];
            let mut outside = false;
            for axis in 0..3 {
                let raw = c[axis] as i64 + dir[axis];
                let e = ext[axis] as i64;
                let wraps = spec.periodic && !(spec.family == Family::Slab3d && axis == 2);
                if !(0..e).contains(&raw) && !wraps {
                    outside = true;
                }
                target[axis] = raw.rem_euclid(e) as usize;
            }
            if outside {
                neighbor[arc] = arc as u32;
                moving[arc] = arc as u32;
                arc_present[arc] = false;
                continue;
            }
            let u = spec.vertex_at(&target[..spec.extents.len()]);
            let back = dirs[u].iter().position(|&q| q == neg(dir)).ok_or_else(|| {
                Error::InvalidLattice(format!("no reverse port for ({v},{p}) at vertex {u}"))
            })?;
            let ahead = dirs[u].iter().position(|&q| q == dir).unwrap_or(back);
            neighbor[arc] = (u * deg + back) as u32;
            moving[arc] = (u * deg + ahead) as u32;
        }
    }

    Ok(PortGraph {
        spec: Some(spec.clone()),
        num_vertices: n,
        degree: deg,
        tunnelling: spec.tunnelling_ports(),
        neighbor,
        moving,
        vertex_present: vec![true; n],
        arc_present,
    })
}

/// Parameters of one site-percolated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolationSpec {
    pub base: LatticeSpec,
    pub site_probability: f64,
    pub seed: u64,
    /// Always retained.
    pub marked_vertex: usize,
}

impl PercolationSpec {
    pub fn generate(&self) -> Result<PortGraph> {
        build_lattice(&self.base)?.percolate_sites(self.site_probability, self.marked_vertex, self.seed)
    }
}

impl PortGraph {
    pub fn spec(&self) -> Option<&LatticeSpec> {
        self.spec.as_ref()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_arcs(&self) -> usize {
        self.num_vertices * self.degree
    }

    /// Tunnelling ports per vertex (`t`).
    pub fn tunnelling_ports(&self) -> usize {
        self.tunnelling
    }

    pub fn is_tunnelling_port(&self, port: usize) -> bool {
        port >= self.degree - self.tunnelling
    }

    #[inline]
    pub fn arc(&self, v: usize, p: usize) -> usize {
        v * self.degree + p
    }

    pub fn neighbor(&self, v: usize, p: usize) -> (usize, usize) {
        let a = self.neighbor[self.arc(v, p)] as usize;
        (a / self.degree, a % self.degree)
    }

    /// Flat arc pairing, indexed by `v * degree + p`.
    pub fn pairing(&self) -> &[u32] {
        &self.neighbor
    }

    /// Flat direction-preserving successor of each arc.
    pub fn moving_targets(&self) -> &[u32] {
        &self.moving
    }

    pub fn is_present(&self, v: usize) -> bool {
        self.vertex_present[v]
    }

    pub fn is_arc_present(&self, v: usize, p: usize) -> bool {
        self.arc_present[self.arc(v, p)]
    }

    pub fn arc_presence(&self) -> &[bool] {
        &self.arc_present
    }

    pub fn present_vertex_count(&self) -> usize {
        self.vertex_present.iter().filter(|&&b| b).count()
    }

    pub fn present_arc_count(&self) -> usize {
        self.arc_present.iter().filter(|&&b| b).count()
    }

    pub fn all_arcs_present(&self) -> bool {
        self.arc_present.iter().all(|&b| b)
    }

    pub fn port_mask(&self, v: usize) -> PortMask {
        let base = v * self.degree;
        PortMask(
            self.arc_present[base..base + self.degree]
                .iter()
                .enumerate()
                .fold(0, |m, (p, &b)| if b { m | 1 << p } else { m }),
        )
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.num_vertices {
            return Err(Error::VertexOutOfRange { vertex: v, num_vertices: self.num_vertices });
        }
        if !self.vertex_present[v] {
            return Err(Error::AbsentVertex(v));
        }
        Ok(())
    }

    /// Retain each vertex other than `marked` independently with probability
    /// `site_probability`; arcs touching a removed vertex become absent.
    pub fn percolate_sites(&self, site_probability: f64, marked: usize, seed: u64) -> Result<PortGraph> {
        if marked >= self.num_vertices {
            return Err(Error::VertexOutOfRange { vertex: marked, num_vertices: self.num_vertices });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for v in 0..self.num_vertices {
            let keep = rng.gen::<f64>() < site_probability;
            out.vertex_present[v] = self.vertex_present[v] && (keep || v == marked);
        }
        for a in 0..self.num_arcs() {
            let far = self.neighbor[a] as usize;
            let ok = self.arc_present[a]
                && out.vertex_present[a / self.degree]
                && out.vertex_present[far / self.degree];
            if !ok {
                out.arc_present[a] = false;
                out.neighbor[a] = a as u32;
                out.moving[a] = a as u32;
            }
        }
        Ok(out)
    }

    /// Breadth-first hop counts over present arcs; `None` for unreachable.
    pub fn shortest_distances(&self, source: usize) -> Result<Vec<Option<u32>>> {
        self.check_vertex(source)?;
        let mut dist = vec![None; self.num_vertices];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let next = dist[v].map(|x| x + 1);
            for p in 0..self.degree {
                let a = self.arc(v, p);
                if !self.arc_present[a] {
                    continue;
                }
                let u = self.neighbor[a] as usize / self.degree;
                if dist[u].is_none() {
                    dist[u] = next;
                    queue.push_back(u);
                }
            }
        }
        Ok(dist)
    }

    /// One line per arc: `v p -> v' p' [T] [absent]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for v in 0..self.num_vertices {
            for p in 0..self.degree {
                let (u, q) = self.neighbor(v, p);
                let _ = write!(out, "{v} {p} -> {u} {q}");
                if self.is_tunnelling_port(p) {
                    out.push_str(" T");
                }
                if !self.is_arc_present(v, p) {
                    out.push_str(" absent");
                }
                out.push('\n');
            }
        }
        out
    }
}
