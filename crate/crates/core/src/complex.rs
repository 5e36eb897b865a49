//! The simplicial ball model built from flags, the orbit cell complex, and
//! the gluing and regularity checks.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bary::{enumerate_flags, flag_intersection};
use crate::charts::Atlas;
use crate::fan::Fan;
use crate::homeo::{param_boundary_point, BaryPoint};
use crate::verify::Check;

/// Vertex of the ball model standing for the origin. Nonzero cones use their
/// own index, which is never 0.
pub const ORIGIN: usize = 0;

/// The order complex of the nonzero cones, coned from the origin. A flag
/// `F` contributes the interior simplex `{origin} ∪ F` and the simplex `F`
/// at infinity.
#[derive(Debug, Clone, Serialize)]
pub struct BallModel {
    pub dim: usize,
    /// Simplices by dimension, each a sorted vertex list.
    pub simplices: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PseudomanifoldReport {
    pub passed: bool,
    pub interior_ridges: usize,
    pub boundary_ridges: usize,
    pub violations: Vec<String>,
}

impl BallModel {
    pub fn build(fan: &Fan) -> Self {
        let n = fan.dim();
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for f in enumerate_flags(fan, false) {
            let mut s = f.cones().to_vec();
            s.sort_unstable();
            if !s.is_empty() {
                set.insert(s.clone());
            }
            s.insert(0, ORIGIN);
            set.insert(s);
        }
        let mut simplices = vec![Vec::new(); n + 1];
        for s in set {
            let d = s.len() - 1;
            if d >= simplices.len() {
                simplices.resize(d + 1, Vec::new());
            }
            simplices[d].push(s);
        }
        Self { dim: n, simplices }
    }

    pub fn count(&self, d: usize) -> usize {
        self.simplices.get(d).map_or(0, Vec::len)
    }

    pub fn maximal(&self) -> &[Vec<usize>] {
        self.simplices.get(self.dim).map_or(&[], Vec::as_slice)
    }

    fn is_boundary(s: &[usize]) -> bool {
        s.first() != Some(&ORIGIN)
    }

    pub fn euler_characteristic(&self) -> i64 {
        alternating(self.simplices.iter().map(Vec::len))
    }

    pub fn boundary_counts(&self) -> Vec<usize> {
        self.simplices
            .iter()
            .map(|v| v.iter().filter(|s| Self::is_boundary(s)).count())
            .collect()
    }

    pub fn boundary_euler_characteristic(&self) -> i64 {
        alternating(self.boundary_counts().into_iter())
    }

    /// Closed under faces: every codimension-one face of every simplex is a
    /// simplex.
    pub fn is_closed(&self) -> bool {
        let all: BTreeSet<&Vec<usize>> = self.simplices.iter().flatten().collect();
        self.simplices.iter().flatten().all(|s| {
            s.len() == 1
                || (0..s.len()).all(|i| {
                    let mut f = s.clone();
                    f.remove(i);
                    all.contains(&f)
                })
        })
    }

    /// Ridges in two top simplices (one for ridges at infinity), the boundary
    /// a closed pseudomanifold, purity, and a connected dual graph.
    pub fn pseudomanifold_check(&self) -> PseudomanifoldReport {
        let n = self.dim;
        let mut rep = PseudomanifoldReport::default();
        let top = self.maximal();
        let top_set: BTreeSet<&Vec<usize>> = top.iter().collect();
        for (d, layer) in self.simplices.iter().enumerate().take(n) {
            for s in layer {
                let covered = top_set.iter().any(|t| is_subset(s, t));
                if !covered {
                    rep.violations
                        .push(format!("{d}-simplex {s:?} lies in no {n}-simplex"));
                }
            }
        }
        if top.iter().any(|t| t.len() != n + 1) {
            rep.violations.push("top simplex of the wrong size".to_string());
        }
        let mut ridge_cofaces: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ti, t) in top.iter().enumerate() {
            for i in 0..t.len() {
                let mut r = t.clone();
                r.remove(i);
                ridge_cofaces.entry(r).or_default().push(ti);
            }
        }
        if n >= 1 {
            for r in &self.simplices[n - 1] {
                let k = ridge_cofaces.get(r).map_or(0, Vec::len);
                let want = if Self::is_boundary(r) { 1 } else { 2 };
                if Self::is_boundary(r) {
                    rep.boundary_ridges += 1;
                } else {
                    rep.interior_ridges += 1;
                }
                if k != want {
                    rep.violations.push(format!(
                        "ridge {r:?} lies in {k} top simplices, expected {want}"
                    ));
                }
            }
            let bdry_top: Vec<&Vec<usize>> = self.simplices[n - 1]
                .iter()
                .filter(|s| Self::is_boundary(s))
                .collect();
            if n == 1 {
                if bdry_top.len() != 2 {
                    rep.violations.push(format!(
                        "boundary of a 1-ball has {} points",
                        bdry_top.len()
                    ));
                }
            } else {
                let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
                for t in &bdry_top {
                    for i in 0..t.len() {
                        let mut r = (*t).clone();
                        r.remove(i);
                        *counts.entry(r).or_default() += 1;
                    }
                }
                for (r, k) in counts {
                    if k != 2 {
                        rep.violations.push(format!(
                            "boundary ridge {r:?} lies in {k} boundary facets, expected 2"
                        ));
                    }
                }
            }
        }
        if !top.is_empty() {
            let mut adj = vec![Vec::new(); top.len()];
            for cof in ridge_cofaces.values() {
                if let [a, b] = cof.as_slice() {
                    adj[*a].push(*b);
                    adj[*b].push(*a);
                }
            }
            let mut seen = vec![false; top.len()];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(k) = stack.pop() {
                for &j in &adj[k] {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            if !seen.iter().all(|&s| s) {
                rep.violations.push("dual graph is disconnected".to_string());
            }
        } else {
            rep.violations.push("no top simplices".to_string());
        }
        rep.passed = rep.violations.is_empty();
        rep
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

fn alternating(counts: impl Iterator<Item = usize>) -> i64 {
    counts
        .enumerate()
        .map(|(d, c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum()
}

/// One cell of dimension `n − dim σ` per cone `σ`; the closure of the cell
/// of `σ` contains the cell of `τ` iff `σ ⊆ τ`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitComplex {
    pub dim: usize,
    pub cell_dims: Vec<usize>,
    /// `(σ, τ)` with `σ ⊊ τ`: the cell of `τ` lies in the closure of the
    /// cell of `σ`.
    pub incidences: Vec<(usize, usize)>,
}

impl OrbitComplex {
    pub fn build(fan: &Fan) -> Self {
        let n = fan.dim();
        let cell_dims = fan.cones().iter().map(|c| n - c.dim).collect();
        let mut incidences = Vec::new();
        for t in 0..fan.num_cones() {
            for &s in fan.faces(t) {
                if s != t {
                    incidences.push((s, t));
                }
            }
        }
        Self {
            dim: n,
            cell_dims,
            incidences,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cell_dims
            .iter()
            .map(|&d| if d % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    pub fn top_cells(&self) -> usize {
        self.cell_dims.iter().filter(|&&d| d == self.dim).count()
    }

    /// Dimension strictly decreases along incidences and the incidence
    /// relation is transitive.
    pub fn is_graded_poset(&self) -> bool {
        let set: BTreeSet<(usize, usize)> = self.incidences.iter().copied().collect();
        self.incidences.iter().all(|&(s, t)| {
            self.cell_dims[s] > self.cell_dims[t]
                && self
                    .incidences
                    .iter()
                    .filter(|&&(a, _)| a == t)
                    .all(|&(_, u)| set.contains(&(s, u)))
        })
    }
}

/// Barycentric sample on the positions `support` of a simplex with `k + 1`
/// vertices, often with some support coordinates set to zero.
fn sample_xi(rng: &mut ChaCha8Rng, k: usize, support: &[usize]) -> Vec<f64> {
    let mut xi = vec![0.0; k + 1];
    let mut total = 0.0;
    for &i in support {
        let zero = support.len() > 1 && rng.random_bool(0.3);
        let v = if zero {
            0.0
        } else {
            -rng.random::<f64>().max(1e-300).ln()
        };
        xi[i] = v;
        total += v;
    }
    if total == 0.0 {
        let i = support[rng.random_range(0..support.len())];
        xi[i] = 1.0;
        total = 1.0;
    }
    for x in &mut xi {
        *x /= total;
    }
    let sum: f64 = xi.iter().sum();
    let last = support.last().copied().unwrap_or(0);
    xi[last] += 1.0 - sum;
    xi[last] = xi[last].max(0.0);
    xi
}

/// Checks the intersection theorem on pairs of maximal flags. Shared-face
/// samples must give equal points through both charts; samples of
/// `C̄_{F1}` at least `0.1` away from `C̄_{F1∩F2}` in barycentric mass must
/// not be members of `C̄_{F2}` (and symmetrically).
pub fn verify_gluing(atlas: &Atlas, samples: usize, tol: f64, seed: u64) -> (Check, Check) {
    let charts = atlas.charts();
    let m = charts.len();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if m <= 200 {
        for i in 0..m {
            for j in i..m {
                pairs.push((i, j));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..500 {
            pairs.push((rng.random_range(0..m), rng.random_range(0..m)));
        }
    }
    let results: Vec<PairResult> = pairs
        .par_iter()
        .map(|&(i, j)| glue_pair(atlas, i, j, samples, tol, seed))
        .collect();
    let mut shared = Check::new("gluing.shared_faces_equal", Some(tol));
    let mut distinct = Check::new("gluing.off_face_points_distinct", None);
    for r in results {
        shared.absorb(r.shared_count, r.shared_worst, r.shared_bad);
        distinct.absorb(r.distinct_count, None, r.distinct_bad);
    }
    (shared.finish(), distinct.finish())
}

struct PairResult {
    shared_count: usize,
    shared_worst: Option<f64>,
    shared_bad: Vec<serde_json::Value>,
    distinct_count: usize,
    distinct_bad: Vec<serde_json::Value>,
}

fn glue_pair(atlas: &Atlas, i: usize, j: usize, samples: usize, tol: f64, seed: u64) -> PairResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((i as u64) << 32 | j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (c1, c2) = (atlas.chart(i), atlas.chart(j));
    let n = c1.n();
    let common = flag_intersection(&c1.flag, &c2.flag);
    let pos1: Vec<usize> = common.cones().iter().map(|&c| c1.flag.position(c).unwrap() + 1).collect();
    let pos2: Vec<usize> = common.cones().iter().map(|&c| c2.flag.position(c).unwrap() + 1).collect();
    let mut res = PairResult {
        shared_count: 0,
        shared_worst: None,
        shared_bad: Vec::new(),
        distinct_count: 0,
        distinct_bad: Vec::new(),
    };
    let mut support = vec![0];
    support.extend(&pos1);
    for _ in 0..samples {
        let xi1 = sample_xi(&mut rng, n, &support);
        let mut xi2 = vec![0.0; n + 1];
        xi2[0] = xi1[0];
        for (a, b) in pos1.iter().zip(&pos2) {
            xi2[*b] = xi1[*a];
        }
        let p = param_boundary_point(atlas, i, &BaryPoint::new(xi1.clone()).expect("sampled on the simplex"));
        let q = param_boundary_point(atlas, j, &BaryPoint::new(xi2).expect("sampled on the simplex"));
        let (p, q) = (p.expect("valid chart"), q.expect("valid chart"));
        let d = atlas.point_distance(&p, &q).unwrap_or(f64::INFINITY);
        res.shared_count += 1;
        res.shared_worst = Some(res.shared_worst.map_or(d, |w: f64| w.max(d)));
        if !(d <= tol) {
            res.shared_bad.push(json!({"flags": [i, j], "xi": xi1, "distance": d}));
        }
    }
    if i != j {
        for (a, b, pos) in [(i, j, &pos1), (j, i, &pos2)] {
            let off: Vec<usize> = (1..=n).filter(|k| !pos.contains(k)).collect();
            for _ in 0..samples {
                let Some(xi) = sample_off_face(&mut rng, n, &off) else {
                    break;
                };
                let p = param_boundary_point(atlas, a, &BaryPoint::new(xi.clone()).expect("on simplex"))
                    .expect("valid chart");
                res.distinct_count += 1;
                if let Ok(w) = atlas.chart_member(&p, b, tol) {
                    res.distinct_bad.push(json!({
                        "flags": [a, b], "xi": xi, "preimage": w.coords()
                    }));
                }
            }
        }
    }
    res
}

/// A point of the closed simplex with mass at least `0.1` on `off`, with
/// frequent zeros elsewhere (including `ξ_0 = 0`).
fn sample_off_face(rng: &mut ChaCha8Rng, n: usize, off: &[usize]) -> Option<Vec<f64>> {
    if off.is_empty() {
        return None;
    }
    let all: Vec<usize> = (0..=n).collect();
    loop {
        let xi = sample_xi(rng, n, &all);
        let mass: f64 = off.iter().map(|&k| xi[k]).sum();
        if mass >= 0.1 {
            return Some(xi);
        }
    }
}

/// Per nonzero cone: the star fan's ball model is a combinatorial ball of
/// dimension `n − dim σ`.
pub fn verify_regularity(fan: &Fan) -> Check {
    let results: Vec<(usize, Option<serde_json::Value>)> = (1..fan.num_cones())
        .into_par_iter()
        .map(|s| {
            let cone = fan.cone(s);
            let bad = |why: String| Some(json!({"cone": cone.rays, "reason": why}));
            let star = match fan.star_fan(s) {
                Ok(f) => f,
                Err(e) => return (s, bad(e.to_string())),
            };
            if let Err(e) = star.is_complete() {
                return (s, bad(e.to_string()));
            }
            let d = fan.dim() - cone.dim;
            if star.dim() != d {
                return (s, bad(format!("star fan has rank {}", star.dim())));
            }
            let model = BallModel::build(&star);
            let chi = model.euler_characteristic();
            let chi_b = model.boundary_euler_characteristic();
            let want_b = if d == 0 { 0 } else { 1 + (-1i64).pow((d - 1) as u32) };
            let pm = model.pseudomanifold_check();
            if chi != 1 || chi_b != want_b || !pm.passed {
                return (
                    s,
                    bad(format!(
                        "chi {chi}, boundary chi {chi_b}, pseudomanifold {:?}",
                        pm.violations
                    )),
                );
            }
            (s, None)
        })
        .collect();
    let mut check = Check::new("regularity.star_fans_are_balls", None);
    for (_, bad) in results {
        check.absorb(1, None, bad.into_iter().collect());
    }
    check.finish()
}
