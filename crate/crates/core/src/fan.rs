//! Complete rational fans: validation, the face lattice, completeness and
//! star fans.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{full_dim_dual_rays, polar_vrep};
use crate::exact::{is_primitive, pair_int, quotient_projection, rank_int, IntVec, LatticeBasisChange};

/// On-disk description of a fan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanDescription {
    pub dim: usize,
    pub rays: Vec<IntVec>,
    pub max_cones: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("could not parse fan description: {0}")]
    Parse(String),
    #[error("malformed fan: {0}")]
    Malformed(String),
    #[error("ray {index} is not a primitive lattice vector")]
    NotPrimitiveRay { index: usize },
    #[error("cone {cone:?} is not strongly convex")]
    NotStronglyConvex { cone: Vec<usize> },
    #[error("ray {ray} does not span an extremal ray of cone {cone:?}")]
    RedundantGenerator { cone: Vec<usize>, ray: usize },
    #[error("cones {a:?} and {b:?} do not meet in a common face")]
    FaceIntersectionViolation { a: Vec<usize>, b: Vec<usize> },
    #[error("fan is not complete: {0}")]
    Incomplete(CompletenessViolation),
    #[error("cone {0:?} is not in the fan")]
    UnknownCone(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompletenessViolation {
    LowDimensionalMaximalCone { cone: Vec<usize> },
    UnpairedFacet { facet: Vec<usize>, maximal_cones: usize },
    Disconnected,
}

impl std::fmt::Display for CompletenessViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::LowDimensionalMaximalCone { cone } => {
                write!(f, "maximal cone {cone:?} is not full-dimensional")
            }
            Self::UnpairedFacet {
                facet,
                maximal_cones,
            } => write!(
                f,
                "codimension-one cone {facet:?} lies in {maximal_cones} maximal cones"
            ),
            Self::Disconnected => write!(f, "maximal cones are not connected through facets"),
        }
    }
}

/// A cone of the fan, stored by its ray-index set. `{0}` is the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    pub rays: Vec<usize>,
    pub dim: usize,
    pub generators: Vec<IntVec>,
    /// Inward facet normals in `M`, vanishing on `σ^⊥`-complement lift.
    pub facet_normals: Vec<IntVec>,
    pub basis: LatticeBasisChange,
    /// Indices of all faces, `{0}` and the cone itself included.
    pub faces: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Fan {
    dim: usize,
    rays: Vec<IntVec>,
    max_cones: Vec<Vec<usize>>,
    cones: Vec<Cone>,
    index: BTreeMap<Vec<usize>, usize>,
    maximal: Vec<usize>,
}

struct ConeData {
    dim: usize,
    generators: Vec<IntVec>,
    facet_normals: Vec<IntVec>,
    basis: LatticeBasisChange,
    face_sets: BTreeSet<Vec<usize>>,
}

fn analyze_cone(ray_idx: &[usize], rays: &[IntVec], n: usize) -> Result<ConeData, FanError> {
    let generators: Vec<IntVec> = ray_idx.iter().map(|&i| rays[i].clone()).collect();
    let basis = quotient_projection(&generators, n);
    let r = basis.span_rank;
    let local: Vec<IntVec> = generators.iter().map(|g| basis.local_coords(g)).collect();
    let mut face_sets = BTreeSet::new();
    face_sets.insert(ray_idx.to_vec());
    if r == 0 {
        return Ok(ConeData {
            dim: 0,
            generators,
            facet_normals: Vec::new(),
            basis,
            face_sets,
        });
    }
    let facets_local = full_dim_dual_rays(&local, r);
    if rank_int(&facets_local) != r {
        return Err(FanError::NotStronglyConvex {
            cone: ray_idx.to_vec(),
        });
    }
    for (g, &ri) in local.iter().zip(ray_idx) {
        let tight: Vec<IntVec> = facets_local
            .iter()
            .filter(|f| pair_int(f, g) == 0)
            .cloned()
            .collect();
        if rank_int(&tight) + 1 != r {
            return Err(FanError::RedundantGenerator {
                cone: ray_idx.to_vec(),
                ray: ri,
            });
        }
    }
    let zero_sets: Vec<Vec<usize>> = facets_local
        .iter()
        .map(|f| {
            ray_idx
                .iter()
                .zip(&local)
                .filter(|(_, g)| pair_int(f, g) == 0)
                .map(|(&i, _)| i)
                .collect()
        })
        .collect();
    let mut queue: VecDeque<Vec<usize>> = VecDeque::from([ray_idx.to_vec()]);
    while let Some(face) = queue.pop_front() {
        for z in &zero_sets {
            let meet: Vec<usize> = face.iter().filter(|i| z.contains(i)).copied().collect();
            if face_sets.insert(meet.clone()) {
                queue.push_back(meet);
            }
        }
    }
    Ok(ConeData {
        dim: r,
        facet_normals: facets_local.iter().map(|f| basis.lift_m(f)).collect(),
        generators,
        basis,
        face_sets,
    })
}

impl Fan {
    /// Validates the fan axioms (primitive rays, strongly convex cones meeting
    /// along common faces) and enumerates the face lattice. Completeness is
    /// not required here; see [`Fan::is_complete`] and [`parse_and_validate`].
    pub fn new(dim: usize, rays: Vec<IntVec>, max_cones: Vec<Vec<usize>>) -> Result<Self, FanError> {
        if dim == 0 {
            if !rays.is_empty() || max_cones.iter().any(|c| !c.is_empty()) {
                return Err(FanError::Malformed(
                    "a rank-0 fan has no rays".to_string(),
                ));
            }
            let cone = Cone {
                rays: Vec::new(),
                dim: 0,
                generators: Vec::new(),
                facet_normals: Vec::new(),
                basis: LatticeBasisChange::identity(0),
                faces: vec![0],
            };
            return Ok(Self {
                dim,
                rays,
                max_cones: vec![Vec::new()],
                cones: vec![cone],
                index: BTreeMap::from([(Vec::new(), 0)]),
                maximal: vec![0],
            });
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(FanError::Malformed(format!(
                    "ray {i} has length {}, expected {dim}",
                    r.len()
                )));
            }
            if !is_primitive(r) {
                return Err(FanError::NotPrimitiveRay { index: i });
            }
        }
        let distinct: BTreeSet<&IntVec> = rays.iter().collect();
        if distinct.len() != rays.len() {
            return Err(FanError::Malformed("duplicate rays".to_string()));
        }
        if max_cones.is_empty() {
            return Err(FanError::Malformed("no maximal cones".to_string()));
        }
        let mut normalized: Vec<Vec<usize>> = Vec::new();
        for c in &max_cones {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            if c.is_empty() {
                return Err(FanError::Malformed("empty maximal cone".to_string()));
            }
            if let Some(&bad) = c.iter().find(|&&i| i >= rays.len()) {
                return Err(FanError::Malformed(format!("ray index {bad} out of range")));
            }
            normalized.push(c);
        }
        let used: BTreeSet<usize> = normalized.iter().flatten().copied().collect();
        if used.len() != rays.len() {
            return Err(FanError::Malformed(
                "every ray must belong to some cone".to_string(),
            ));
        }
        for (i, a) in normalized.iter().enumerate() {
            for (j, b) in normalized.iter().enumerate() {
                if i != j && a.iter().all(|x| b.contains(x)) {
                    return Err(FanError::Malformed(format!(
                        "cone {a:?} is contained in cone {b:?}"
                    )));
                }
            }
        }

        let mut data: BTreeMap<Vec<usize>, ConeData> = BTreeMap::new();
        for c in &normalized {
            let d = analyze_cone(c, &rays, dim)?;
            for face in d.face_sets.iter() {
                if !data.contains_key(face) && face != c {
                    let fd = analyze_cone(face, &rays, dim)?;
                    data.insert(face.clone(), fd);
                }
            }
            data.insert(c.clone(), d);
        }

        for (i, a) in normalized.iter().enumerate() {
            for b in normalized.iter().skip(i + 1) {
                check_intersection(a, b, &data, &rays, dim)?;
            }
        }

        let mut keys: Vec<Vec<usize>> = data.keys().cloned().collect();
        keys.sort_by(|x, y| {
            data[x]
                .dim
                .cmp(&data[y].dim)
                .then_with(|| x.cmp(y))
        });
        let index: BTreeMap<Vec<usize>, usize> =
            keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let cones: Vec<Cone> = keys
            .iter()
            .map(|k| {
                let d = &data[k];
                let mut faces: Vec<usize> = d.face_sets.iter().map(|f| index[f]).collect();
                faces.sort_unstable();
                Cone {
                    rays: k.clone(),
                    dim: d.dim,
                    generators: d.generators.clone(),
                    facet_normals: d.facet_normals.clone(),
                    basis: d.basis.clone(),
                    faces,
                }
            })
            .collect();
        let mut maximal: Vec<usize> = normalized.iter().map(|c| index[c]).collect();
        maximal.sort_by(|&a, &b| cones[a].rays.cmp(&cones[b].rays));
        let max_cones = maximal.iter().map(|&i| cones[i].rays.clone()).collect();
        Ok(Self {
            dim,
            rays,
            max_cones,
            cones,
            index,
            maximal,
        })
    }

    pub fn from_description(desc: &FanDescription) -> Result<Self, FanError> {
        Self::new(desc.dim, desc.rays.clone(), desc.max_cones.clone())
    }

    pub fn from_json(text: &str) -> Result<Self, FanError> {
        let desc: FanDescription =
            serde_json::from_str(text).map_err(|e| FanError::Parse(e.to_string()))?;
        Self::from_description(&desc)
    }

    pub fn description(&self) -> FanDescription {
        FanDescription {
            dim: self.dim,
            rays: self.rays.clone(),
            max_cones: self.max_cones.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn cone(&self, idx: usize) -> &Cone {
        &self.cones[idx]
    }

    pub fn num_cones(&self) -> usize {
        self.cones.len()
    }

    /// Indices of the maximal cones, ordered by ray-index set.
    pub fn maximal(&self) -> &[usize] {
        &self.maximal
    }

    pub fn cone_index(&self, rays: &[usize]) -> Option<usize> {
        let mut key = rays.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    /// The cone `{0}`; always index 0.
    pub fn zero_cone(&self) -> usize {
        0
    }

    /// Face test; in a fan the face relation is inclusion of ray sets.
    pub fn is_face(&self, face: usize, of: usize) -> bool {
        self.cones[of].faces.binary_search(&face).is_ok()
    }

    pub fn faces(&self, cone: usize) -> &[usize] {
        &self.cones[cone].faces
    }

    /// Faces of codimension one.
    pub fn facets(&self, cone: usize) -> Vec<usize> {
        let d = self.cones[cone].dim;
        self.cones[cone]
            .faces
            .iter()
            .copied()
            .filter(|&f| self.cones[f].dim + 1 == d)
            .collect()
    }

    /// Cones containing `cone` as a face.
    pub fn cofaces(&self, cone: usize) -> Vec<usize> {
        (0..self.cones.len())
            .filter(|&c| self.is_face(cone, c))
            .collect()
    }

    pub fn intersect(&self, a: usize, b: usize) -> usize {
        let common: Vec<usize> = self.cones[a]
            .rays
            .iter()
            .filter(|r| self.cones[b].rays.contains(r))
            .copied()
            .collect();
        self.index[&common]
    }

    /// `B_σ`: the sum of the primitive ray generators of `σ`.
    pub fn barycenter(&self, cone: usize) -> IntVec {
        let mut b = vec![0; self.dim];
        for g in &self.cones[cone].generators {
            for (x, y) in b.iter_mut().zip(g) {
                *x += y;
            }
        }
        b
    }

    /// `Σ_σ (−1)^{n − dim σ}`; equals 1 for complete fans.
    pub fn euler_sum(&self) -> i64 {
        self.cones
            .iter()
            .map(|c| if (self.dim - c.dim).is_multiple_of(2) { 1 } else { -1 })
            .sum()
    }

    /// Facet-pairing completeness test with a certificate on failure.
    pub fn is_complete(&self) -> Result<(), CompletenessViolation> {
        let n = self.dim;
        if n == 0 {
            return Ok(());
        }
        for &m in &self.maximal {
            if self.cones[m].dim != n {
                return Err(CompletenessViolation::LowDimensionalMaximalCone {
                    cone: self.cones[m].rays.clone(),
                });
            }
        }
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.maximal.len()];
        for (ci, c) in self.cones.iter().enumerate() {
            if c.dim + 1 != n {
                continue;
            }
            let containing: Vec<usize> = (0..self.maximal.len())
                .filter(|&k| self.is_face(ci, self.maximal[k]))
                .collect();
            if containing.len() != 2 {
                return Err(CompletenessViolation::UnpairedFacet {
                    facet: c.rays.clone(),
                    maximal_cones: containing.len(),
                });
            }
            adjacency[containing[0]].push(containing[1]);
            adjacency[containing[1]].push(containing[0]);
        }
        let mut seen = vec![false; self.maximal.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for &j in &adjacency[k] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(CompletenessViolation::Disconnected)
        }
    }

    /// The fan of the orbit closure of `σ`: images in `N/⟨σ⟩` of the cones
    /// containing `σ`.
    pub fn star_fan(&self, sigma: usize) -> Result<Fan, FanError> {
        let s = self
            .cones
            .get(sigma)
            .ok_or_else(|| FanError::UnknownCone(vec![]))?;
        let proj = &s.basis;
        let k = s.dim;
        let cofaces = self.cofaces(sigma);
        let star_ray_cones: Vec<usize> = cofaces
            .iter()
            .copied()
            .filter(|&t| self.cones[t].dim == k + 1)
            .collect();
        let rays: Vec<IntVec> = star_ray_cones
            .iter()
            .map(|&t| {
                let extra = self.cones[t]
                    .rays
                    .iter()
                    .find(|r| !s.rays.contains(r))
                    .expect("coface has an extra ray");
                let img = proj.project(&self.rays[*extra]);
                let g = crate::exact::gcd_vec(&img);
                img.iter().map(|x| x / g).collect()
            })
            .collect();
        let max_cones: Vec<Vec<usize>> = self
            .maximal
            .iter()
            .copied()
            .filter(|&m| self.is_face(sigma, m))
            .map(|m| {
                star_ray_cones
                    .iter()
                    .enumerate()
                    .filter(|(_, &t)| self.is_face(t, m))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Fan::new(proj.target_rank(), rays, max_cones)
    }
}

fn check_intersection(
    a: &[usize],
    b: &[usize],
    data: &BTreeMap<Vec<usize>, ConeData>,
    rays: &[IntVec],
    dim: usize,
) -> Result<(), FanError> {
    let violation = || FanError::FaceIntersectionViolation {
        a: a.to_vec(),
        b: b.to_vec(),
    };
    let common: Vec<usize> = a.iter().filter(|x| b.contains(x)).copied().collect();
    let da = &data[a];
    let db = &data[b];
    if !da.face_sets.contains(&common) || !db.face_sets.contains(&common) {
        return Err(violation());
    }
    let mut ineqs: Vec<IntVec> = Vec::new();
    for d in [da, db] {
        ineqs.extend(d.facet_normals.iter().cloned());
        for l in d.basis.annihilator() {
            ineqs.push(l.clone());
            ineqs.push(l.iter().map(|x| -x).collect());
        }
    }
    let v = polar_vrep(&ineqs, dim);
    if !v.lineality.is_empty() {
        return Err(violation());
    }
    let got: BTreeSet<IntVec> = v.rays.into_iter().collect();
    let want: BTreeSet<IntVec> = common.iter().map(|&i| rays[i].clone()).collect();
    if got != want {
        return Err(violation());
    }
    Ok(())
}

/// Parses a fan description and requires the fan to be complete.
pub fn parse_and_validate(text: &str) -> Result<Fan, FanError> {
    let fan = Fan::from_json(text)?;
    fan.is_complete().map_err(FanError::Incomplete)?;
    Ok(fan)
}
