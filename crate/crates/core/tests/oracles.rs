//! Cross-checks against brute-force constructions that share no code with
//! the library's lattice builder or walker.

use qwalk_core::coin::{hadamard, CoinAssignment};
use qwalk_core::engine::{localized_state, spread, Shift, Walker};
use qwalk_core::graph::{build_lattice, Family, LatticeSpec};
use qwalk_core::search::run_search;
use qwalk_core::C64;

type Dense = Vec<Vec<f64>>;

fn matvec(m: &Dense, v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0.0 {
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

/// Search unitary on the 4×4 torus: Grover coins, −Grover on `marked`,
/// flip-flop shift. Ports are (−x, +x, −y, +y).
fn search_unitary_4x4(marked: usize) -> Dense {
    let side = 4usize;
    let n = side * side * 4;
    let dirs: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
    let reverse = [1usize, 0, 3, 2];
    let mut shift = vec![vec![0.0; n]; n];
    let mut coin = vec![vec![0.0; n]; n];
    for y in 0..side {
        for x in 0..side {
            let v = x + side * y;
            let sign = if v == marked { -1.0 } else { 1.0 };
            for p in 0..4 {
                for q in 0..4 {
                    let g = 0.5 - if p == q { 1.0 } else { 0.0 };
                    coin[4 * v + p][4 * v + q] = sign * g;
                }
                let (dx, dy) = dirs[p];
                let nx = (x as i64 + dx).rem_euclid(side as i64) as usize;
                let ny = (y as i64 + dy).rem_euclid(side as i64) as usize;
                let u = nx + side * ny;
                shift[4 * u + reverse[p]][4 * v + p] = 1.0;
            }
        }
    }
    matmul(&shift, &coin)
}

#[test]
fn search_trace_matches_dense_powers() {
    let marked = 10;
    let u = search_unitary_4x4(marked);
    let mut power = (0..64).map(|i| (0..64).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect::<Dense>();
    let psi0 = vec![1.0 / 8.0; 64];

    let spec = LatticeSpec::cube(Family::Square2d, 4);
    let graph = build_lattice(&spec).unwrap();
    let trace = run_search(&graph, marked, None, 50).unwrap().marked_probability;

    for (t, &got) in trace.iter().enumerate() {
        let psi = matvec(&power, &psi0);
        let want: f64 = psi[4 * marked..4 * marked + 4].iter().map(|a| a * a).sum();
        assert!((got - want).abs() <= 1e-10, "t={t}: {got} vs {want}");
        power = matmul(&u, &power);
    }
}

#[test]
fn hadamard_spread_matches_dense_oracle() {
    let steps = 100;
    let width = 2 * steps + 1;
    let origin = steps;
    // index 2x + c; coin 0 moves to x−1, coin 1 to x+1
    let n = 2 * width;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = vec![vec![0.0; n]; n];
    for x in 0..width {
        let left = (x + width - 1) % width;
        let right = (x + 1) % width;
        // H = [[1, 1], [1, −1]]/√2, column = incoming coin
        u[2 * left][2 * x] = s;
        u[2 * left][2 * x + 1] = s;
        u[2 * right + 1][2 * x] = s;
        u[2 * right + 1][2 * x + 1] = -s;
    }
    let mut psi = vec![0.0; n];
    psi[2 * origin] = 1.0;
    for _ in 0..steps {
        psi = matvec(&u, &psi);
    }
    let oracle: f64 = (0..width)
        .map(|x| (psi[2 * x].powi(2) + psi[2 * x + 1].powi(2)) * (x as f64 - origin as f64).abs())
        .sum();

    let graph = build_lattice(&LatticeSpec::cube(Family::Line, width)).unwrap();
    let coins = CoinAssignment::uniform(width, hadamard());
    let mut state = localized_state(&graph, origin, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
    Walker::new(&graph, &coins, Shift::Moving).unwrap().evolve(&mut state, steps, |_| {}).unwrap();
    let got = spread(&state, &graph.shortest_distances(origin).unwrap()).unwrap();

    assert!((got / steps as f64 - oracle / steps as f64).abs() <= 1e-10, "{got} vs {oracle}");
    // ballistic: well above the classical √t
    assert!(got / steps as f64 > 0.5);
}

/// Hop distances by repeated boolean multiplication with the adjacency matrix.
fn adjacency_power_distances(adj: &[Vec<bool>], source: usize) -> Vec<Option<u32>> {
    let n = adj.len();
    let mut dist = vec![None; n];
    let mut reach = vec![false; n];
    reach[source] = true;
    dist[source] = Some(0);
    for k in 1..=n as u32 {
        let next: Vec<bool> = (0..n).map(|j| reach[j] || (0..n).any(|i| reach[i] && adj[i][j])).collect();
        for j in 0..n {
            if next[j] && dist[j].is_none() {
                dist[j] = Some(k);
            }
        }
        if next == reach {
            break;
        }
        reach = next;
    }
    dist
}

#[test]
fn hex_distances_match_adjacency_powers() {
    let side = 8usize;
    let n = side * side;
    let mut adj = vec![vec![false; n]; n];
    for y in 0..side {
        for x in 0..side {
            let v = x + side * y;
            let vy = if (x + y) % 2 == 0 { (y + 1) % side } else { (y + side - 1) % side };
            for u in [(x + 1) % side + side * y, (x + side - 1) % side + side * y, x + side * vy] {
                adj[v][u] = true;
                adj[u][v] = true;
            }
        }
    }
    let graph = build_lattice(&LatticeSpec::cube(Family::Hex2d, side)).unwrap();
    for source in [0, 9, 27, 63] {
        assert_eq!(graph.shortest_distances(source).unwrap(), adjacency_power_distances(&adj, source));
    }
}

#[test]
fn percolated_distances_match_adjacency_powers() {
    let spec = LatticeSpec::cube(Family::Triangular2d, 10);
    let base = build_lattice(&spec).unwrap();
    for seed in 0..5 {
        let g = base.percolate_sites(0.7, 55, seed).unwrap();
        let n = g.num_vertices();
        let mut adj = vec![vec![false; n]; n];
        for v in 0..n {
            for p in 0..g.degree() {
                if g.is_arc_present(v, p) {
                    adj[v][g.neighbor(v, p).0] = true;
                }
            }
        }
        assert_eq!(g.shortest_distances(55).unwrap(), adjacency_power_distances(&adj, 55));
    }
}
