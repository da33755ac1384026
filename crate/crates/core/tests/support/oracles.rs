//! Independent reference computations for the property and acceptance
//! suites. Nothing here calls into the code paths it is used to check.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

/// `-Σ p log2 p` straight from the definition.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `Σ q log2(q/p)` straight from the definition.
pub fn kl(q: &[f64], p: &[f64]) -> f64 {
    q.iter().zip(p).filter(|(&a, _)| a > 0.0).map(|(&a, &b)| a * (a / b).log2()).sum()
}

/// Outer product of the two marginals of a row-major `rows × cols` joint.
pub fn product_of_marginals(joint: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let px: Vec<f64> = (0..rows).map(|i| (0..cols).map(|j| joint[i * cols + j]).sum()).collect();
    let py: Vec<f64> = (0..cols).map(|j| (0..rows).map(|i| joint[i * cols + j]).sum()).collect();
    let mut out = Vec::with_capacity(rows * cols);
    for x in &px {
        out.extend(py.iter().map(|y| x * y));
    }
    out
}

/// Interaction information as a single expectation over cells:
/// `Σ p(xyz) log2[ p(xy) p(xz) p(yz) / (p(x) p(y) p(z) p(xyz)) ]`,
/// with every marginal accumulated by explicit loops.
pub fn interaction_information_by_enumeration(joint: &[f64], shape: [usize; 3]) -> f64 {
    let [nx, ny, nz] = shape;
    let at = |x: usize, y: usize, z: usize| joint[(x * ny + y) * nz + z];
    let mut px = vec![0.0; nx];
    let mut py = vec![0.0; ny];
    let mut pz = vec![0.0; nz];
    let mut pxy = vec![0.0; nx * ny];
    let mut pxz = vec![0.0; nx * nz];
    let mut pyz = vec![0.0; ny * nz];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let p = at(x, y, z);
                px[x] += p;
                py[y] += p;
                pz[z] += p;
                pxy[x * ny + y] += p;
                pxz[x * nz + z] += p;
                pyz[y * nz + z] += p;
            }
        }
    }
    let mut total = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let p = at(x, y, z);
                if p == 0.0 {
                    continue;
                }
                let num = pxy[x * ny + y] * pxz[x * nz + z] * pyz[y * nz + z];
                let den = px[x] * py[y] * pz[z] * p;
                total += p * (num / den).log2();
            }
        }
    }
    total
}

/// Betweenness by enumerating every simple path between every pair and
/// keeping the minimal ones. `lengths[(a, b)]` gives the edge length.
pub fn brute_force_betweenness(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, len) in edges {
        adj[a].push((b, len));
        adj[b].push((a, len));
    }
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in (s + 1)..n {
            let mut paths: Vec<(f64, Vec<usize>)> = Vec::new();
            let mut visited = vec![false; n];
            let mut path = vec![s];
            visited[s] = true;
            collect_paths(&adj, s, t, 0.0, &mut visited, &mut path, &mut paths);
            if paths.is_empty() {
                continue;
            }
            let best = paths.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let shortest: Vec<&Vec<usize>> =
                paths.iter().filter(|p| (p.0 - best).abs() <= 1e-9 * best.max(1.0)).map(|p| &p.1).collect();
            let count = shortest.len() as f64;
            for p in shortest {
                for &v in &p[1..p.len() - 1] {
                    score[v] += 1.0 / count;
                }
            }
        }
    }
    score
}

fn collect_paths(
    adj: &[Vec<(usize, f64)>],
    at: usize,
    target: usize,
    len: f64,
    visited: &mut [bool],
    path: &mut Vec<usize>,
    out: &mut Vec<(f64, Vec<usize>)>,
) {
    if at == target {
        out.push((len, path.clone()));
        return;
    }
    for &(next, l) in &adj[at] {
        if visited[next] {
            continue;
        }
        visited[next] = true;
        path.push(next);
        collect_paths(adj, next, target, len + l, visited, path, out);
        path.pop();
        visited[next] = false;
    }
}

/// Whether the graph on `n` nodes is connected.
pub fn connected(n: usize, edges: &[(usize, usize, f64)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b, _) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// A strictly positive random distribution over `n` cells.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// A random distribution in which each cell is zero with probability
/// `zero_rate` (at least one cell stays positive).
pub fn random_sparse_distribution<R: Rng>(rng: &mut R, n: usize, zero_rate: f64) -> Vec<f64> {
    let mut raw: Vec<f64> =
        (0..n).map(|_| if rng.gen_bool(zero_rate) { 0.0 } else { rng.gen_range(0.01..1.0) }).collect();
    if raw.iter().all(|&x| x == 0.0) {
        raw[rng.gen_range(0..n)] = 1.0;
    }
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random partition of `0..n` into `1..=max_groups` non-empty groups.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize, max_groups: usize) -> Vec<Vec<usize>> {
    let k = rng.gen_range(1..=max_groups.min(n));
    let mut items: Vec<usize> = (0..n).collect();
    items.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = (0..k).map(|g| vec![items[g]]).collect();
    for &i in &items[k..] {
        groups[rng.gen_range(0..k)].push(i);
    }
    groups
}

/// Random points in the plane, pairwise at least `min_gap` apart.
pub fn random_planar_points<R: Rng>(rng: &mut R, n: usize, min_gap: f64) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)];
        if pts.iter().all(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() >= min_gap) {
            pts.push(p);
        }
    }
    pts
}

/// Random symmetric dissimilarities in `[lo, hi)` with zero diagonal.
pub fn random_dissimilarities<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let x = rng.gen_range(lo..hi);
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    d
}

/// Random graph on `n` nodes, each edge present with probability `density`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64, weighted: bool) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen_bool(density) {
                let w = if weighted { f64::from(rng.gen_range(1..4)) } else { 1.0 };
                edges.push((a, b, w));
            }
        }
    }
    edges
}

/// Two 5-cliques `A0..A4` (0..5) and `C0..C4` (5..10) plus broker `B` (10).
/// Slice 1: cliques disjoint, B hangs off A0. Slice 2: B adjacent to every
/// clique member and the only bridge. Slice 3: as slice 2 plus direct
/// `A_i–C_i` edges.
pub fn broker_scenario() -> Vec<Vec<(usize, usize, f64)>> {
    const B: usize = 10;
    let mut cliques = Vec::new();
    for base in [0, 5] {
        for a in 0..5 {
            for b in (a + 1)..5 {
                cliques.push((base + a, base + b, 1.0));
            }
        }
    }
    let mut t1 = cliques.clone();
    t1.push((0, B, 1.0));
    let mut t2 = cliques.clone();
    t2.extend((0..10).map(|i| (i, B, 1.0)));
    let mut t3 = t2.clone();
    t3.extend((0..5).map(|i| (i, i + 5, 1.0)));
    vec![t1, t2, t3]
}
