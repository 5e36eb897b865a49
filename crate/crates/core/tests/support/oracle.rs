//! Brute-force oracles that share no code with the library's algorithms.

use std::collections::{BTreeSet, HashSet, VecDeque};

pub type P = Vec<i64>;

fn pair(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `m ∈ σ∨` iff `⟨m, v⟩ ≥ 0` for each ray generator `v` of `σ`.
pub fn in_dual(m: &[i64], rays: &[P]) -> bool {
    rays.iter().all(|v| pair(m, v) >= 0)
}

/// All integer points of `[−b, b]^n`.
pub fn box_points(n: usize, b: i64) -> Vec<P> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: P| {
                (-b..=b).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Points reachable from 0 by adding generators without leaving the box.
pub fn reachable(gens: &[P], n: usize, b: i64) -> HashSet<P> {
    let mut seen: HashSet<P> = HashSet::new();
    let mut queue = VecDeque::from([vec![0; n]]);
    seen.insert(vec![0; n]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q: P = p.iter().zip(g).map(|(x, y)| x + y).collect();
            if q.iter().all(|x| x.abs() <= b) && seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen
}

pub struct HilbertVerdict {
    pub generated: bool,
    pub minimal: bool,
    /// For full-dimensional cones, the brute-force irreducible set.
    pub irreducibles: Option<BTreeSet<P>>,
}

/// Generation: every point of `σ∨` in the test box is reached from 0 by
/// adding generators. Minimality: no generator is reached from the others.
/// For pointed `σ∨` the irreducibles of the box are computed directly.
pub fn check_hilbert(rays: &[P], n: usize, gens: &[P]) -> HilbertVerdict {
    let gmax = gens.iter().flatten().map(|x| x.abs()).max().unwrap_or(1).max(1);
    let b = 2 * gmax;
    let big = 3 * b;
    let reach = reachable(gens, n, big);
    let generated = box_points(n, b)
        .iter()
        .filter(|p| in_dual(p, rays))
        .all(|p| reach.contains(p));
    let minimal = (0..gens.len()).all(|i| {
        let others: Vec<P> = gens
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, g)| g.clone())
            .collect();
        !reachable(&others, n, big).contains(&gens[i])
    });
    let full = rank(rays) == n;
    let irreducibles = full.then(|| {
        let pts: Vec<P> = box_points(n, b)
            .into_iter()
            .filter(|p| in_dual(p, rays) && p.iter().any(|&x| x != 0))
            .collect();
        let set: HashSet<&P> = pts.iter().collect();
        pts.iter()
            .filter(|p| {
                !pts.iter().any(|q| {
                    q != *p && {
                        let d: P = p.iter().zip(q).map(|(x, y)| x - y).collect();
                        d.iter().any(|&x| x != 0) && set.contains(&d)
                    }
                })
            })
            .cloned()
            .collect()
    });
    HilbertVerdict {
        generated,
        minimal,
        irreducibles,
    }
}

/// Rank over ℚ by fraction-free elimination.
pub fn rank(rows: &[P]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                for k in 0..cols {
                    m[i][k] = m[i][k] * a - m[r][k] * b;
                }
            }
        }
        r += 1;
    }
    r
}
