//! Dual cones, semigroup generators and the triangular generator selection
//! used to build flag charts.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bary::Flag;
use crate::exact::{
    self, add_int, pair_int, rank, rank_int, sub_int, to_rat_vec, IntVec, LatticeBasisChange, Rat,
    RatVec,
};
use crate::fan::Fan;

/// Vertex description of a polyhedral cone: `cone(rays) + span(lineality)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VRep {
    pub rays: Vec<IntVec>,
    pub lineality: Vec<IntVec>,
}

/// Double description: converts `{x : ⟨a, x⟩ ≥ 0 for all a}` into a [`VRep`].
///
/// Starts from the whole space (all lineality) and intersects one half-space
/// at a time. Redundant rays are pruned after every step with the algebraic
/// extremality test, so no adjacency bookkeeping is needed.
pub fn polar_vrep(ineqs: &[IntVec], dim: usize) -> VRep {
    let mut lin: Vec<RatVec> = (0..dim)
        .map(|i| (0..dim).map(|j| exact::rat(i64::from(i == j))).collect())
        .collect();
    let mut rays: Vec<RatVec> = Vec::new();
    let mut processed: Vec<RatVec> = Vec::new();

    for a in ineqs {
        let a = to_rat_vec(a);
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        if let Some(idx) = lin.iter().position(|l| !exact::dot(&a, l).is_zero()) {
            let mut l0 = lin.remove(idx);
            let mut d0 = exact::dot(&a, &l0);
            if d0.is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
                d0 = -d0;
            }
            for v in lin.iter_mut().chain(rays.iter_mut()) {
                let f = exact::dot(&a, v) / &d0;
                if !f.is_zero() {
                    for (x, y) in v.iter_mut().zip(&l0) {
                        *x -= &f * y;
                    }
                }
            }
            rays.push(l0);
        } else {
            let vals: Vec<Rat> = rays.iter().map(|r| exact::dot(&a, r)).collect();
            let mut next: Vec<RatVec> = Vec::new();
            for (r, v) in rays.iter().zip(&vals) {
                if !v.is_negative() {
                    next.push(r.clone());
                }
            }
            for (p, vp) in rays.iter().zip(&vals) {
                if !vp.is_positive() {
                    continue;
                }
                for (q, vq) in rays.iter().zip(&vals) {
                    if !vq.is_negative() {
                        continue;
                    }
                    let combo: RatVec = q
                        .iter()
                        .zip(p)
                        .map(|(qi, pi)| vp * qi - vq * pi)
                        .collect();
                    next.push(combo);
                }
            }
            rays = next;
        }
        processed.push(a);
        rays = prune_rays(rays, &processed);
    }

    VRep {
        rays: rays.iter().map(|r| exact::primitive(r)).collect(),
        lineality: lin.iter().map(|l| exact::primitive(l)).collect(),
    }
}

fn prune_rays(rays: Vec<RatVec>, processed: &[RatVec]) -> Vec<RatVec> {
    let full_rank = rank(processed);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for r in rays {
        let tight: Vec<usize> = processed
            .iter()
            .enumerate()
            .filter(|(_, a)| exact::dot(a, &r).is_zero())
            .map(|(i, _)| i)
            .collect();
        if tight.len() == processed.len() {
            // lies in the lineality space (or is zero)
            continue;
        }
        let rows: Vec<RatVec> = tight.iter().map(|&i| processed[i].clone()).collect();
        if rank(&rows) + 1 != full_rank {
            continue;
        }
        if seen.insert(tight) {
            out.push(r);
        }
    }
    out
}

/// Rays of the dual of a full-dimensional cone given by generators in `ℤ^r`.
pub(crate) fn full_dim_dual_rays(local_gens: &[IntVec], r: usize) -> Vec<IntVec> {
    let mut rays = polar_vrep(local_gens, r).rays;
    rays.sort();
    rays
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("the zero face has no relative interior lattice point")]
    ZeroFace,
    #[error("triangular generator check failed at position {0}")]
    TriangularCheck(usize),
    #[error("flag is not maximal")]
    NotMaximal,
}

/// `σ∨` for a cone `σ` of a fan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualCone {
    pub cone: usize,
    /// Primitive rays of the pointed part, lifted to `M` with zero component
    /// along `σ^⊥`.
    pub rays: Vec<IntVec>,
    /// Lattice basis of `σ^⊥ ∩ M`; the lineality space of `σ∨`.
    pub lineality: Vec<IntVec>,
    /// Inner normals of `σ∨`: the ray generators `v_ρ` of `σ`.
    pub facet_normals: Vec<IntVec>,
}

impl DualCone {
    pub fn contains(&self, alpha: &[i64]) -> bool {
        self.facet_normals.iter().all(|v| pair_int(alpha, v) >= 0)
    }

    /// All generators of the cone, lineality taken with both signs.
    pub fn generators(&self) -> Vec<IntVec> {
        let mut out = self.rays.clone();
        for l in &self.lineality {
            out.push(l.clone());
            out.push(l.iter().map(|x| -x).collect());
        }
        out
    }
}

pub fn dual_cone(fan: &Fan, cone: usize) -> DualCone {
    let c = fan.cone(cone);
    let basis = &c.basis;
    let local: Vec<IntVec> = c.generators.iter().map(|g| basis.local_coords(g)).collect();
    let mut rays: Vec<IntVec> = if c.dim == 0 {
        Vec::new()
    } else {
        full_dim_dual_rays(&local, c.dim)
            .iter()
            .map(|h| basis.lift_m(h))
            .collect()
    };
    rays.sort();
    DualCone {
        cone,
        rays,
        lineality: basis.annihilator().to_vec(),
        facet_normals: c.generators.clone(),
    }
}

/// A minimal generating set of the semigroup `S_σ = σ∨ ∩ M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemigroupGens {
    pub cone: usize,
    /// Hilbert basis of the pointed part (lifted), followed by `+l, −l` for each
    /// lineality basis vector `l`.
    pub elements: Vec<IntVec>,
    pub pointed_count: usize,
    pub lineality: Vec<IntVec>,
    /// Additive relations `a + b = c + d` (or `a + b = c`) among elements.
    pub relations: Vec<Relation>,
    #[serde(skip)]
    basis: LatticeBasisChange,
    #[serde(skip)]
    local_pointed: Vec<IntVec>,
    #[serde(skip)]
    facet_local: Vec<IntVec>,
    #[serde(skip)]
    grading: IntVec,
    #[serde(skip)]
    local_grading: IntVec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
}

impl SemigroupGens {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, m: &[i64]) -> Option<usize> {
        self.elements.iter().position(|e| e.as_slice() == m)
    }

    /// Degree with respect to the barycenter of the cone; positive on the
    /// pointed part of `σ∨`, zero on `σ^⊥`.
    pub fn degree(&self, m: &[i64]) -> i64 {
        pair_int(m, &self.grading)
    }

    pub fn contains(&self, m: &[i64]) -> bool {
        let local = self.basis.local_coords_m(m);
        self.facet_local.iter().all(|f| pair_int(f, &local) >= 0)
    }

    /// Writes `m ∈ S_σ` as a nonnegative integer combination of the elements.
    /// Returns `None` when `m ∉ S_σ`.
    pub fn decompose(&self, m: &[i64]) -> Option<Vec<u32>> {
        if !self.contains(m) {
            return None;
        }
        let target = self.basis.local_coords_m(m);
        let mut coeffs = vec![0u32; self.elements.len()];
        let mut counts = vec![0u32; self.pointed_count];
        if !self.search(&target, 0, &mut counts) {
            return None;
        }
        coeffs[..self.pointed_count].copy_from_slice(&counts);
        // remainder lies in σ^⊥ ∩ M; read its coordinates in the lineality basis
        let mut rest = m.to_vec();
        for (c, e) in counts.iter().zip(&self.elements) {
            rest = sub_int(&rest, &exact::scale_int(e, i64::from(*c)));
        }
        for (j, n_vec) in self.basis.basis_n[self.basis.span_rank..].iter().enumerate() {
            let k = pair_int(&rest, n_vec);
            let slot = self.pointed_count + 2 * j + usize::from(k < 0);
            coeffs[slot] = u32::try_from(k.unsigned_abs()).expect("coefficient overflow");
        }
        Some(coeffs)
    }

    fn search(&self, target: &[i64], start: usize, counts: &mut [u32]) -> bool {
        if target.iter().all(|&x| x == 0) {
            return true;
        }
        if start == self.pointed_count {
            return false;
        }
        let deg = pair_int(target, &self.local_grading);
        let h = &self.local_pointed[start];
        let hdeg = pair_int(h, &self.local_grading);
        let max = deg / hdeg;
        for k in (0..=max).rev() {
            let rest = sub_int(target, &exact::scale_int(h, k));
            if !self.facet_local.iter().all(|f| pair_int(f, &rest) >= 0) {
                continue;
            }
            counts[start] = k as u32;
            if self.search(&rest, start + 1, counts) {
                return true;
            }
        }
        counts[start] = 0;
        false
    }

    /// Checks that `S_σ ∩ box` is generated, for the box
    /// `max |coord| ≤ 2 · max |generator coord|`.
    pub fn certify_generation(&self) -> Result<usize, IntVec> {
        let bound = 2 * self
            .elements
            .iter()
            .flatten()
            .map(|x| x.abs())
            .max()
            .unwrap_or(1)
            .max(1);
        let dim = self.basis.dim;
        let mut checked = 0;
        let mut point = vec![-bound; dim];
        loop {
            if self.contains(&point) {
                checked += 1;
                if self.decompose(&point).is_none() {
                    return Err(point);
                }
            }
            let mut i = 0;
            loop {
                if i == dim {
                    return Ok(checked);
                }
                point[i] += 1;
                if point[i] > bound {
                    point[i] = -bound;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    /// Checks that no pointed element is a nonnegative combination of the
    /// others and that the lineality part is a lattice basis.
    pub fn certify_minimality(&self) -> Result<(), IntVec> {
        for i in 0..self.pointed_count {
            let mut others = self.clone();
            others.local_pointed.remove(i);
            others.elements.remove(i);
            others.pointed_count -= 1;
            if others.decompose(&self.elements[i]).is_some() {
                return Err(self.elements[i].clone());
            }
        }
        if rank_int(&self.lineality) != self.lineality.len() {
            return Err(self.lineality.first().cloned().unwrap_or_default());
        }
        Ok(())
    }
}

/// Hilbert basis of `σ∨ ∩ M`.
///
/// The pointed part of `σ∨` (full-dimensional in the dual of the saturated
/// span of `σ`) is covered by simplicial subcones spanned by linearly
/// independent subsets of its rays. Lattice points of every fundamental
/// parallelepiped together with the rays generate the semigroup; the
/// irreducible ones form the Hilbert basis.
pub fn hilbert_basis(fan: &Fan, cone: usize) -> SemigroupGens {
    let c = fan.cone(cone);
    let basis = c.basis.clone();
    let r = c.dim;
    let local_gens: Vec<IntVec> = c.generators.iter().map(|g| basis.local_coords(g)).collect();
    let grading = fan.barycenter(cone);
    let local_grading: IntVec = basis.basis_m[..r]
        .iter()
        .map(|m| pair_int(m, &grading))
        .collect();

    let local_pointed = if r == 0 {
        Vec::new()
    } else {
        let rays = full_dim_dual_rays(&local_gens, r);
        pointed_hilbert_basis(&rays, &local_gens, r)
    };

    let mut elements: Vec<IntVec> = local_pointed.iter().map(|h| basis.lift_m(h)).collect();
    let lineality = basis.annihilator().to_vec();
    for l in &lineality {
        elements.push(l.clone());
        elements.push(l.iter().map(|x| -x).collect());
    }
    let mut gens = SemigroupGens {
        cone,
        pointed_count: local_pointed.len(),
        elements,
        lineality,
        relations: Vec::new(),
        facet_local: local_gens,
        local_pointed,
        basis,
        grading,
        local_grading,
    };
    gens.relations = find_relations(&gens.elements);
    gens
}

fn pointed_hilbert_basis(rays: &[IntVec], facets: &[IntVec], r: usize) -> Vec<IntVec> {
    let in_cone = |p: &[i64]| facets.iter().all(|f| pair_int(f, p) >= 0);
    let mut candidates: BTreeSet<IntVec> = rays.iter().cloned().collect();
    for subset in independent_subsets(rays, r) {
        for p in parallelepiped_points(&subset, r) {
            if p.iter().any(|&x| x != 0) {
                candidates.insert(p);
            }
        }
    }
    let cands: Vec<IntVec> = candidates.into_iter().collect();
    let mut out: Vec<IntVec> = cands
        .iter()
        .filter(|c| {
            !cands.iter().any(|h| {
                h != *c && {
                    let d = sub_int(c, h);
                    d.iter().any(|&x| x != 0) && in_cone(&d)
                }
            })
        })
        .cloned()
        .collect();
    out.sort();
    out
}

fn independent_subsets(rays: &[IntVec], r: usize) -> Vec<Vec<IntVec>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = Vec::with_capacity(r);
    fn rec(
        rays: &[IntVec],
        r: usize,
        start: usize,
        idx: &mut Vec<usize>,
        out: &mut Vec<Vec<IntVec>>,
    ) {
        if idx.len() == r {
            let sub: Vec<IntVec> = idx.iter().map(|&i| rays[i].clone()).collect();
            if rank_int(&sub) == r {
                out.push(sub);
            }
            return;
        }
        for i in start..rays.len() {
            idx.push(i);
            rec(rays, r, i + 1, idx, out);
            idx.pop();
        }
    }
    rec(rays, r, 0, &mut idx, &mut out);
    out
}

/// Lattice points of `{Σ λ_i v_i : 0 ≤ λ_i < 1}` for linearly independent `v_i`.
fn parallelepiped_points(basis: &[IntVec], r: usize) -> Vec<IntVec> {
    let lo: IntVec = (0..r)
        .map(|k| basis.iter().map(|v| v[k].min(0)).sum())
        .collect();
    let hi: IntVec = (0..r)
        .map(|k| basis.iter().map(|v| v[k].max(0)).sum())
        .collect();
    let cols: Vec<RatVec> = basis.iter().map(|v| to_rat_vec(v)).collect();
    let mut out = Vec::new();
    let mut p = lo.clone();
    loop {
        let coords = exact::coordinates_in(&cols, &to_rat_vec(&p)).expect("full rank basis");
        if coords
            .iter()
            .all(|l| !l.is_negative() && *l < exact::rat(1))
        {
            out.push(p.clone());
        }
        let mut i = 0;
        loop {
            if i == r {
                return out;
            }
            p[i] += 1;
            if p[i] > hi[i] {
                p[i] = lo[i];
                i += 1;
            } else {
                break;
            }
        }
    }
}

fn find_relations(elements: &[IntVec]) -> Vec<Relation> {
    let m = elements.len();
    let mut sums: Vec<(IntVec, Vec<usize>)> = Vec::new();
    for i in 0..m {
        for j in i..m {
            sums.push((add_int(&elements[i], &elements[j]), vec![i, j]));
        }
    }
    let mut rels = Vec::new();
    for a in 0..sums.len() {
        for b in a + 1..sums.len() {
            if sums[a].0 == sums[b].0 {
                rels.push(Relation {
                    lhs: sums[a].1.clone(),
                    rhs: sums[b].1.clone(),
                });
            }
        }
        for (k, e) in elements.iter().enumerate() {
            if &sums[a].0 == e {
                rels.push(Relation {
                    lhs: sums[a].1.clone(),
                    rhs: vec![k],
                });
            }
        }
    }
    rels
}

/// A lattice point in the relative interior of the face of a pointed cone
/// spanned by the given primitive rays: their sum.
pub fn relative_interior_point(face_rays: &[IntVec]) -> Result<IntVec, ConeError> {
    let first = face_rays.first().ok_or(ConeError::ZeroFace)?;
    let mut sum = vec![0; first.len()];
    for r in face_rays {
        sum = add_int(&sum, r);
    }
    Ok(sum)
}

/// The distinguished generators `α_1..α_n` for a maximal flag
/// `σ_1 ⊂ … ⊂ σ_n`: `α_1` interior to `σ_n∨`, and `α_{i+1}` interior to the
/// face of `σ_n∨` annihilating `σ_i`.
pub fn triangular_generators(fan: &Fan, flag: &Flag) -> Result<Vec<IntVec>, ConeError> {
    let n = fan.dim();
    if flag.len() != n {
        return Err(ConeError::NotMaximal);
    }
    let top = *flag.cones().last().expect("nonempty flag");
    let dual = dual_cone(fan, top);
    let mut alphas = Vec::with_capacity(n);
    alphas.push(relative_interior_point(&dual.rays)?);
    for &sigma in &flag.cones()[..n - 1] {
        let gens = &fan.cone(sigma).generators;
        let face: Vec<IntVec> = dual
            .rays
            .iter()
            .filter(|a| gens.iter().all(|v| pair_int(a, v) == 0))
            .cloned()
            .collect();
        alphas.push(relative_interior_point(&face)?);
    }
    let bary: Vec<IntVec> = flag.cones().iter().map(|&c| fan.barycenter(c)).collect();
    for (i, a) in alphas.iter().enumerate() {
        for (j, b) in bary.iter().enumerate().take(i + 1) {
            let c = pair_int(a, b);
            let ok = if j < i { c == 0 } else { c > 0 };
            if !ok {
                return Err(ConeError::TriangularCheck(i));
            }
        }
    }
    Ok(alphas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn set(v: &[IntVec]) -> BTreeSet<IntVec> {
        v.iter().cloned().collect()
    }

    fn single_cone_fan(rays: Vec<IntVec>) -> Fan {
        let n = rays[0].len();
        let idx: Vec<usize> = (0..rays.len()).collect();
        Fan::new(n, rays, vec![idx]).unwrap()
    }

    #[test]
    fn polar_of_orthant() {
        let v = polar_vrep(&[vec![1, 0], vec![0, 1]], 2);
        assert_eq!(set(&v.rays), set(&[vec![1, 0], vec![0, 1]]));
        assert!(v.lineality.is_empty());
    }

    #[test]
    fn polar_of_half_plane_keeps_lineality() {
        let v = polar_vrep(&[vec![1, 0]], 2);
        assert_eq!(v.rays, vec![vec![1, 0]]);
        assert_eq!(v.lineality.len(), 1);
        assert_eq!(v.lineality[0][0], 0);
    }

    #[test]
    fn dual_cone_examples() {
        let f = single_cone_fan(vec![vec![1, 0], vec![0, 1]]);
        let top = f.maximal()[0];
        assert_eq!(set(&dual_cone(&f, top).rays), set(&[vec![1, 0], vec![0, 1]]));

        let f = single_cone_fan(vec![vec![1, 0], vec![1, 2]]);
        let top = f.maximal()[0];
        assert_eq!(set(&dual_cone(&f, top).rays), set(&[vec![0, 1], vec![2, -1]]));

        let f = single_cone_fan(vec![vec![1, 0], vec![0, 1]]);
        let ray = f.cone_index(&[0]).unwrap();
        let d = dual_cone(&f, ray);
        assert_eq!(d.rays, vec![vec![1, 0]]);
        assert_eq!(d.lineality.len(), 1);
        assert_eq!(d.lineality[0][0], 0);
        assert_eq!(d.lineality[0][1].abs(), 1);
    }

    #[test]
    fn hilbert_basis_examples() {
        let f = single_cone_fan(vec![vec![1, 0], vec![0, 1]]);
        let hb = hilbert_basis(&f, f.maximal()[0]);
        assert_eq!(set(&hb.elements), set(&[vec![1, 0], vec![0, 1]]));

        let f = single_cone_fan(vec![vec![1, 0], vec![1, 2]]);
        let hb = hilbert_basis(&f, f.maximal()[0]);
        assert_eq!(
            set(&hb.elements),
            set(&[vec![0, 1], vec![1, 0], vec![2, -1]])
        );

        let f = single_cone_fan(vec![vec![1, 0], vec![0, 1]]);
        let hb = hilbert_basis(&f, f.cone_index(&[0]).unwrap());
        assert_eq!(
            set(&hb.elements),
            set(&[vec![1, 0], vec![0, 1], vec![0, -1]])
        );
    }

    #[test]
    fn decompose_singular_cone() {
        let f = single_cone_fan(vec![vec![1, 0], vec![1, 2]]);
        let hb = hilbert_basis(&f, f.maximal()[0]);
        let c = hb.decompose(&[3, 1]).unwrap();
        let mut sum = vec![0, 0];
        for (k, e) in c.iter().zip(&hb.elements) {
            sum = add_int(&sum, &exact::scale_int(e, i64::from(*k)));
        }
        assert_eq!(sum, vec![3, 1]);
        assert!(hb.decompose(&[0, -1]).is_none());
    }

    #[test]
    fn decompose_with_lineality() {
        let f = single_cone_fan(vec![vec![1, 0], vec![0, 1]]);
        let hb = hilbert_basis(&f, f.cone_index(&[0]).unwrap());
        let c = hb.decompose(&[2, -3]).unwrap();
        let mut sum = vec![0, 0];
        for (k, e) in c.iter().zip(&hb.elements) {
            sum = add_int(&sum, &exact::scale_int(e, i64::from(*k)));
        }
        assert_eq!(sum, vec![2, -3]);
    }

    #[test]
    fn relative_interior_examples() {
        assert_eq!(relative_interior_point(&[vec![0, 1]]).unwrap(), vec![0, 1]);
        assert_eq!(
            relative_interior_point(&[vec![0, 1], vec![2, -1]]).unwrap(),
            vec![2, 0]
        );
        assert_eq!(
            relative_interior_point(&[vec![1, 0], vec![0, 1]]).unwrap(),
            vec![1, 1]
        );
        assert_eq!(relative_interior_point(&[]), Err(ConeError::ZeroFace));
    }

    #[test]
    fn triangular_generators_examples() {
        let p2 = bundled::fan("p2");
        let f = Flag::from_rays(&p2, &[&[0], &[0, 1]]).unwrap();
        assert_eq!(
            triangular_generators(&p2, &f).unwrap(),
            vec![vec![1, 1], vec![0, 1]]
        );

        let p1 = bundled::fan("p1");
        let f = Flag::from_rays(&p1, &[&[0]]).unwrap();
        assert_eq!(triangular_generators(&p1, &f).unwrap(), vec![vec![1]]);

        let q = bundled::fan("p1xp1");
        let f = Flag::from_rays(&q, &[&[1], &[0, 1]]).unwrap();
        assert_eq!(
            triangular_generators(&q, &f).unwrap(),
            vec![vec![1, 1], vec![1, 0]]
        );
    }

    #[test]
    fn relations_of_singular_cone() {
        let f = single_cone_fan(vec![vec![1, 0], vec![1, 2]]);
        let hb = hilbert_basis(&f, f.maximal()[0]);
        // (0,1) + (2,-1) = 2·(1,0)
        assert!(!hb.relations.is_empty());
    }
}
