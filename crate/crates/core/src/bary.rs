//! Barycentric subdivision of a fan: barycenters, flags and the simplicial
//! cones `C_F` they span.

use std::collections::BTreeSet;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{
    coordinates_in, dual_basis, rat, rat_frac, rat_vec_to_f64, to_rat_vec, IntVec, Rat, RatMat,
    RatVec,
};
use crate::fan::Fan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaryError {
    #[error("the zero cone has no barycenter")]
    ZeroCone,
    #[error("cone {0} is not in the fan")]
    UnknownCone(usize),
    #[error("ray set {0:?} is not a cone of the fan")]
    UnknownRaySet(Vec<usize>),
    #[error("flag is not a strictly increasing chain at position {0}")]
    NotAChain(usize),
    #[error("point is not in the flag cone; simplicial coordinates {coords:?}")]
    NotInCone { coords: Vec<String> },
    #[error("point is not in the linear span of the flag cone")]
    OutsideSpan,
    #[error("flag barycenters are linearly dependent")]
    Degenerate,
}

/// A strictly increasing chain of nonzero cones, stored by cone index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Flag(Vec<usize>);

impl Flag {
    pub fn new(fan: &Fan, cones: Vec<usize>) -> Result<Self, BaryError> {
        for (i, &c) in cones.iter().enumerate() {
            if c >= fan.num_cones() {
                return Err(BaryError::UnknownCone(c));
            }
            if c == fan.zero_cone() {
                return Err(BaryError::ZeroCone);
            }
            if i > 0 && (cones[i - 1] == c || !fan.is_face(cones[i - 1], c)) {
                return Err(BaryError::NotAChain(i));
            }
        }
        Ok(Self(cones))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a flag from the ray-index sets of its members.
    pub fn from_rays(fan: &Fan, members: &[&[usize]]) -> Result<Self, BaryError> {
        let cones = members
            .iter()
            .map(|r| {
                fan.cone_index(r)
                    .ok_or_else(|| BaryError::UnknownRaySet(r.to_vec()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(fan, cones)
    }

    pub fn cones(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Face lattices of polyhedral cones are graded, so a chain is maximal
    /// exactly when it has one member per dimension.
    pub fn is_maximal(&self, fan: &Fan) -> bool {
        self.len() == fan.dim()
    }

    pub fn position(&self, cone: usize) -> Option<usize> {
        self.0.iter().position(|&c| c == cone)
    }

    pub fn is_subflag_of(&self, other: &Flag) -> bool {
        self.0.iter().all(|c| other.0.contains(c))
    }

    pub fn barycenters(&self, fan: &Fan) -> Vec<IntVec> {
        self.0.iter().map(|&c| fan.barycenter(c)).collect()
    }

    pub fn ray_sets(&self, fan: &Fan) -> Vec<Vec<usize>> {
        self.0.iter().map(|&c| fan.cone(c).rays.clone()).collect()
    }
}

/// `B_σ` for a nonzero cone.
pub fn barycenter(fan: &Fan, cone: usize) -> Result<IntVec, BaryError> {
    if cone >= fan.num_cones() {
        return Err(BaryError::UnknownCone(cone));
    }
    if fan.cone(cone).dim == 0 {
        return Err(BaryError::ZeroCone);
    }
    Ok(fan.barycenter(cone))
}

fn descend(fan: &Fan, chain: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let last = *chain.last().expect("chain starts at a maximal cone");
    let mut facets: Vec<usize> = fan
        .facets(last)
        .into_iter()
        .filter(|&f| f != fan.zero_cone())
        .collect();
    if facets.is_empty() {
        let mut c = chain.clone();
        c.reverse();
        out.push(c);
        return;
    }
    facets.sort_by(|&a, &b| fan.cone(a).rays.cmp(&fan.cone(b).rays));
    for f in facets {
        chain.push(f);
        descend(fan, chain, out);
        chain.pop();
    }
}

fn sort_flags(fan: &Fan, flags: &mut [Flag]) {
    flags.sort_by_cached_key(|f| f.ray_sets(fan));
}

/// All flags of the fan (the empty flag included), or only the maximal ones,
/// in lexicographic order of their ray-index sets.
pub fn enumerate_flags(fan: &Fan, only_maximal: bool) -> Vec<Flag> {
    let mut chains = Vec::new();
    for &m in fan.maximal() {
        if fan.cone(m).dim == 0 {
            continue;
        }
        descend(fan, &mut vec![m], &mut chains);
    }
    let mut flags: Vec<Flag> = if only_maximal {
        chains
            .into_iter()
            .filter(|c| c.len() == fan.dim())
            .map(Flag)
            .collect()
    } else {
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in &chains {
            for mask in 0u64..(1u64 << c.len()) {
                let sub: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &x)| x)
                    .collect();
                all.insert(sub);
            }
        }
        if all.is_empty() {
            all.insert(Vec::new());
        }
        all.into_iter().map(Flag).collect()
    };
    sort_flags(fan, &mut flags);
    flags
}

/// The flag of cones common to both.
pub fn flag_intersection(a: &Flag, b: &Flag) -> Flag {
    Flag(a.0.iter().copied().filter(|c| b.0.contains(c)).collect())
}

/// The simplicial cone `C_F` with its barycentric generators.
#[derive(Debug, Clone)]
pub struct FlagCone {
    pub flag: Flag,
    pub generators: Vec<IntVec>,
    dual: Option<RatMat>,
    dual_f64: Option<Vec<Vec<f64>>>,
}

impl FlagCone {
    pub fn new(fan: &Fan, flag: &Flag) -> Result<Self, BaryError> {
        let generators = flag.barycenters(fan);
        let rows: Vec<RatVec> = generators.iter().map(|g| to_rat_vec(g)).collect();
        if crate::exact::rank(&rows) != rows.len() {
            return Err(BaryError::Degenerate);
        }
        let (dual, dual_f64) = if flag.len() == fan.dim() && !rows.is_empty() {
            let d = dual_basis(&rows).map_err(|_| BaryError::Degenerate)?;
            let f = d.iter().map(|r| rat_vec_to_f64(r)).collect();
            (Some(d), Some(f))
        } else {
            (None, None)
        };
        Ok(Self {
            flag: flag.clone(),
            generators,
            dual,
            dual_f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Coordinates `u` with `x = Σ u_j B_{σ_j}`, without a sign check.
    pub fn coordinates(&self, x: &[Rat]) -> Result<RatVec, BaryError> {
        match &self.dual {
            Some(d) => Ok(d.iter().map(|b| crate::exact::dot(b, x)).collect()),
            None => {
                if self.generators.is_empty() {
                    return if x.iter().all(|v| v == &rat(0)) {
                        Ok(Vec::new())
                    } else {
                        Err(BaryError::OutsideSpan)
                    };
                }
                let rows: Vec<RatVec> = self.generators.iter().map(|g| to_rat_vec(g)).collect();
                coordinates_in(&rows, x).map_err(|_| BaryError::OutsideSpan)
            }
        }
    }

    /// Simplicial coordinates of a point of `C_F`.
    pub fn simplicial_coords(&self, x: &[Rat]) -> Result<RatVec, BaryError> {
        let u = self.coordinates(x)?;
        if u.iter().any(Signed::is_negative) {
            return Err(BaryError::NotInCone {
                coords: u.iter().map(ToString::to_string).collect(),
            });
        }
        Ok(u)
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.simplicial_coords(x).is_ok()
    }

    /// Floating-point coordinates; available for maximal flags.
    pub fn coordinates_f64(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.dual_f64.as_ref().map(|d| {
            d.iter()
                .map(|b| b.iter().zip(x).map(|(p, q)| p * q).sum())
                .collect()
        })
    }

    /// The point `Σ u_j B_{σ_j}`.
    pub fn point_f64(&self, u: &[f64]) -> Vec<f64> {
        let n = self.generators.first().map_or(0, Vec::len);
        let mut x = vec![0.0; n];
        for (g, &c) in self.generators.iter().zip(u) {
            for (xi, &gi) in x.iter_mut().zip(g) {
                *xi += c * gi as f64;
            }
        }
        x
    }
}

/// The maximal flags of a fan together with their simplicial cones.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub flags: Vec<Flag>,
    pub cones: Vec<FlagCone>,
}

impl Subdivision {
    pub fn new(fan: &Fan) -> Result<Self, BaryError> {
        let flags = enumerate_flags(fan, true);
        let cones = flags
            .iter()
            .map(|f| FlagCone::new(fan, f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { flags, cones })
    }

    /// Index of the first maximal flag whose cone contains `x`, exactly.
    pub fn locate_exact(&self, x: &[Rat]) -> Option<usize> {
        self.cones.iter().position(|c| c.contains(x))
    }

    /// Index of the first maximal flag whose cone contains `x` up to `tol`
    /// on the simplicial coordinates; falls back to the flag with the least
    /// negative coordinate.
    pub fn locate(&self, x: &[f64], tol: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.cones.iter().enumerate() {
            let u = c.coordinates_f64(x)?;
            let worst = u.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= -tol {
                return Some(i);
            }
            if best.is_none_or(|(_, w)| worst > w) {
                best = Some((i, worst));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Sample points for covering checks: a seeded integer box, all barycenters
/// and all pairwise midpoints of barycenters.
pub fn cover_samples(fan: &Fan, samples: usize, seed: u64) -> Vec<RatVec> {
    let n = fan.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<RatVec> = (0..samples)
        .map(|_| (0..n).map(|_| rat(rng.random_range(-20..=20))).collect())
        .collect();
    let bary: Vec<IntVec> = (1..fan.num_cones()).map(|c| fan.barycenter(c)).collect();
    for (i, a) in bary.iter().enumerate() {
        pts.push(to_rat_vec(a));
        for b in &bary[i + 1..] {
            pts.push(a.iter().zip(b).map(|(x, y)| rat_frac(x + y, 2)).collect());
        }
    }
    pts
}

/// Checks that every sample point lies in some maximal flag cone. Returns the
/// first uncovered point on failure.
pub fn cover_check(fan: &Fan, samples: usize, seed: u64) -> Result<usize, RatVec> {
    let sub = Subdivision::new(fan).map_err(|_| vec![])?;
    let pts = cover_samples(fan, samples, seed);
    for p in &pts {
        if sub.locate_exact(p).is_none() {
            return Err(p.clone());
        }
    }
    Ok(pts.len())
}
