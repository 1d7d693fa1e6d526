//! Reference implementations that share no code with the library: brute-force
//! classical axioms, the combinatorial Lipschitz constant, and the
//! Kantorovich distance by enumerating vertices of the dual polytope.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;

/// Distance matrix with `d[x][y]`.
pub type Dist = Vec<Vec<f64>>;

/// Zero diagonal, positive off the diagonal, symmetric, triangle inequality.
pub fn is_classical_metric(d: &Dist, tol: f64) -> bool {
    let n = d.len();
    for x in 0..n {
        if d[x][x].abs() > tol {
            return false;
        }
        for y in 0..n {
            if (d[x][y] - d[y][x]).abs() > tol {
                return false;
            }
            if x != y && d[x][y] <= tol {
                return false;
            }
            for z in 0..n {
                if d[x][y] > d[x][z] + d[z][y] + tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Shortest-path closure of random positive weights: always a metric.
pub fn random_metric(rng: &mut impl Rng, n: usize) -> Dist {
    let mut d = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in 0..x {
            let w = rng.random_range(0.2..3.0);
            d[x][y] = w;
            d[y][x] = w;
        }
    }
    for k in 0..n {
        for x in 0..n {
            for y in 0..n {
                if d[x][k] + d[k][y] < d[x][y] {
                    d[x][y] = d[x][k] + d[k][y];
                }
            }
        }
    }
    d
}

/// A symmetric nonnegative matrix that is not a metric: either one pair is
/// pushed past a detour, or one off-diagonal pair is set to 0.
pub fn random_non_metric(rng: &mut impl Rng, n: usize) -> Dist {
    assert!(n >= 2);
    let mut d = random_metric(rng, n);
    let x = rng.random_range(0..n);
    let mut y = rng.random_range(0..n - 1);
    if y >= x {
        y += 1;
    }
    if n >= 3 && rng.random_bool(0.6) {
        let z = (0..n).find(|&z| z != x && z != y).unwrap();
        let v = d[x][z] + d[z][y] + rng.random_range(0.05..1.0);
        d[x][y] = v;
        d[y][x] = v;
    } else {
        d[x][y] = 0.0;
        d[y][x] = 0.0;
    }
    d
}

pub fn flatten(d: &Dist) -> Vec<f64> {
    d.iter().flatten().copied().collect()
}

/// `max_{x≠y} |f(x) − f(y)| / d(x, y)`.
pub fn lipschitz_constant(d: &Dist, f: &[f64]) -> f64 {
    let n = d.len();
    let mut best = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                best = best.max((f[x] - f[y]).abs() / d[x][y]);
            }
        }
    }
    best
}

pub fn random_distribution(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64).powi(2)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Decodes a Prüfer sequence into the edge list of a labelled tree.
fn prufer_edges(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).unwrap();
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// `max Σ f(x)(p(x) − q(x))` over 1-Lipschitz `f`, computed as the best
/// feasible vertex. Each vertex is fixed by a spanning tree of tight edges
/// `f(v) − f(u) = ±d(u, v)` with `f(0) = 0`.
pub fn kantorovich_by_vertices(d: &Dist, p: &[f64], q: &[f64]) -> f64 {
    let n = d.len();
    if n == 1 {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    let seqs = n.pow((n - 2) as u32);
    for code in 0..seqs {
        let mut seq = vec![0; n - 2];
        let mut c = code;
        for s in seq.iter_mut() {
            *s = c % n;
            c /= n;
        }
        let edges = prufer_edges(&seq, n);
        let mut adjacency = vec![Vec::new(); n];
        for (k, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push((v, k));
            adjacency[v].push((u, k));
        }
        for signs in 0..(1u64 << (n - 1)) {
            let mut f = vec![f64::NAN; n];
            f[0] = 0.0;
            let mut stack = vec![0];
            while let Some(u) = stack.pop() {
                for &(v, k) in &adjacency[u] {
                    if f[v].is_nan() {
                        let s = if signs >> k & 1 == 1 { 1.0 } else { -1.0 };
                        f[v] = f[u] + s * d[u][v];
                        stack.push(v);
                    }
                }
            }
            if lipschitz_constant(d, &f) <= 1.0 + 1e-12 {
                let value: f64 = (0..n).map(|x| f[x] * (p[x] - q[x])).sum();
                best = best.max(value);
            }
        }
    }
    best
}
