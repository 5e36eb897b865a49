//! Charts for maximal flags: the exponent matrices `c` and `b`, the monomial
//! map `ψ` on `Δ_n` and its inverse, the exponential embedding, and points of
//! `X≥0` as semigroup homomorphisms.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bary::{BaryError, Flag, FlagCone, Subdivision};
use crate::cones::{dual_cone, hilbert_basis, triangular_generators, ConeError, SemigroupGens};
use crate::exact::{add_int, pair_int, pair_int_f64, scale_int, IntVec, RatMat};
use crate::fan::Fan;

/// Default absolute tolerance on chart coordinates.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Bary(#[from] BaryError),
    #[error("chart invariant violated: {0}")]
    Invariant(String),
    #[error("point is not in the image of Δ_n (residual {residual:e})")]
    NotInImage { residual: f64 },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point does not lie in the open set of the requested face")]
    NotInOpenSet,
    #[error("{0:?} is not in Δ_n")]
    NotInDelta(Vec<f64>),
    #[error("cone {face} is not a face of cone {of}")]
    NotAFace { face: usize, of: usize },
}

/// A point `0 ≤ w_1 ≤ … ≤ w_n ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaPoint(Vec<f64>);

impl DeltaPoint {
    pub fn new(w: Vec<f64>, tol: f64) -> Result<Self, ChartError> {
        let ok = w.first().is_none_or(|&x| x >= -tol)
            && w.windows(2).all(|p| p[0] <= p[1] + tol)
            && w.last().is_none_or(|&x| x <= 1.0 + tol);
        if ok {
            Ok(Self(w))
        } else {
            Err(ChartError::NotInDelta(w))
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `ξ_0 = w_1`, `ξ_j = w_{j+1} − w_j`, `ξ_n = 1 − w_n`.
    pub fn barycentric(&self) -> Vec<f64> {
        let mut xi = Vec::with_capacity(self.0.len() + 1);
        let mut prev = 0.0;
        for &w in &self.0 {
            xi.push(w - prev);
            prev = w;
        }
        xi.push(1.0 - prev);
        xi
    }
}

/// `θ_j(z) = Π_{i ≥ j} z_i`.
pub fn theta(z: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; z.len()];
    let mut acc = 1.0;
    for j in (0..z.len()).rev() {
        acc *= z[j];
        w[j] = acc;
    }
    w
}

/// A preimage of `w ∈ Δ_n` in `[0,1]^n`: `z_j = w_j / w_{j+1}`, `z_n = w_n`,
/// and `z_j = 1` wherever `w_{j+1} = 0`.
pub fn theta_preimage(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    (0..n)
        .map(|j| {
            if j + 1 == n {
                w[j]
            } else if w[j + 1] == 0.0 {
                1.0
            } else {
                w[j] / w[j + 1]
            }
        })
        .collect()
}

/// `exp_F(u)_j = e^{−2π u_j}`.
pub fn exp_f(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| (-2.0 * PI * x).exp()).collect()
}

fn powi(x: f64, e: i64) -> f64 {
    if e == 0 {
        1.0
    } else {
        x.powi(i32::try_from(e).expect("exponent fits in i32"))
    }
}

/// `w ↦ (Π_j w_j^{b_ij})_i`, with `0^0 = 1`. The first `n` rows must be
/// upper triangular with positive diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonomialMap {
    pub b: Vec<IntVec>,
}

impl MonomialMap {
    pub fn n(&self) -> usize {
        self.b.first().map_or(0, Vec::len)
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn eval(&self, w: &[f64]) -> Vec<f64> {
        self.b
            .iter()
            .map(|row| row.iter().zip(w).map(|(&e, &x)| powi(x, e)).product())
            .collect()
    }

    /// Recovers `w ∈ Δ_n` from `ψ(w)` by back-substitution through the
    /// triangular rows, zero entries handled by the largest-zero-index rule.
    /// All `m` coordinates are then checked against `ψ(w)`.
    pub fn invert(&self, y: &[f64], tol: f64) -> Result<DeltaPoint, ChartError> {
        let n = self.n();
        if y.len() != self.m() {
            return Err(ChartError::DimensionMismatch {
                expected: self.m(),
                got: y.len(),
            });
        }
        let last_zero = (0..n).rev().find(|&i| y[i] <= 0.0);
        let start = last_zero.map_or(0, |i| i + 1);
        let mut w = vec![0.0; n];
        for j in (start..n).rev() {
            let known: f64 = (j + 1..n).map(|l| powi(w[l], self.b[j][l])).product();
            let d = self.b[j][j] as f64;
            w[j] = (y[j] / known).powf(1.0 / d);
        }
        let image = self.eval(&w);
        let residual = image
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !residual.is_finite() || residual > tol {
            return Err(ChartError::NotInImage { residual });
        }
        DeltaPoint::new(w, tol).map_err(|_| ChartError::NotInImage { residual })
    }

    /// Human-readable monomial formulas, one per coordinate.
    pub fn formulas(&self) -> Vec<String> {
        self.b
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let factors: Vec<String> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e != 0)
                    .map(|(j, &e)| {
                        if e == 1 {
                            format!("w{}", j + 1)
                        } else {
                            format!("w{}^{}", j + 1, e)
                        }
                    })
                    .collect();
                let rhs = if factors.is_empty() {
                    "1".to_string()
                } else {
                    factors.join("*")
                };
                format!("y{} = {}", i + 1, rhs)
            })
            .collect()
    }
}

/// The chart of a maximal flag `σ_1 ⊂ … ⊂ σ_n`.
#[derive(Debug, Clone, Serialize)]
pub struct Chart {
    pub index: usize,
    pub flag: Flag,
    pub top: usize,
    /// `α_1..α_n` (triangular) followed by the remaining Hilbert basis
    /// elements of `σ_n∨ ∩ M`.
    pub generators: Vec<IntVec>,
    /// Position in `generators` of each Hilbert basis element of the top cone.
    pub hilbert_positions: Vec<usize>,
    pub barycenters: Vec<IntVec>,
    #[serde(skip)]
    pub dual_basis: RatMat,
    pub c: Vec<IntVec>,
    pub psi: MonomialMap,
}

impl Chart {
    pub fn n(&self) -> usize {
        self.flag.len()
    }

    pub fn m(&self) -> usize {
        self.generators.len()
    }

    pub fn b(&self) -> &[IntVec] {
        &self.psi.b
    }

    pub fn psi_eval(&self, w: &[f64]) -> Vec<f64> {
        self.psi.eval(w)
    }

    pub fn psi_invert(&self, y: &[f64], tol: f64) -> Result<DeltaPoint, ChartError> {
        self.psi.invert(y, tol)
    }

    /// Checks the exponent-matrix invariants exactly.
    pub fn check_invariants(&self) -> Result<(), ChartError> {
        let n = self.n();
        let fail = |s: String| Err(ChartError::Invariant(s));
        for (i, (crow, brow)) in self.c.iter().zip(&self.psi.b).enumerate() {
            let mut acc = 0;
            for k in 0..n {
                if crow[k] < 0 {
                    return fail(format!("c[{i}][{k}] < 0"));
                }
                if k > 0 && crow[k] < crow[k - 1] {
                    return fail(format!("row {i} of c decreases at {k}"));
                }
                if brow[k] < 0 {
                    return fail(format!("b[{i}][{k}] < 0"));
                }
                acc += brow[k];
                if acc != crow[k] {
                    return fail(format!("partial sums of b row {i} differ from c at {k}"));
                }
                if i < n && k < i && brow[k] != 0 {
                    return fail(format!("b[{i}][{k}] is nonzero below the diagonal"));
                }
                if i < n && k == i && brow[k] <= 0 {
                    return fail(format!("b[{i}][{i}] is not positive"));
                }
            }
        }
        Ok(())
    }

    /// The same chart with `b[row][col]` shifted by `delta`; a negative
    /// control for the commutativity check.
    pub fn perturbed(&self, row: usize, col: usize, delta: i64) -> Self {
        let mut c = self.clone();
        c.psi.b[row][col] += delta;
        c
    }

    /// `sup |ψ(θ(exp_F(u))) − expi(x)|` for `x = Σ u_j B_{σ_j}`.
    pub fn commutativity_residual(&self, u: &[f64]) -> Result<f64, ChartError> {
        if u.len() != self.n() {
            return Err(ChartError::DimensionMismatch {
                expected: self.n(),
                got: u.len(),
            });
        }
        if u.iter().any(|&x| x < 0.0) {
            return Err(BaryError::NotInCone {
                coords: u.iter().map(ToString::to_string).collect(),
            }
            .into());
        }
        let x = point_of(&self.barycenters, u);
        let lhs = self.psi.eval(&theta(&exp_f(u)));
        let rhs = expi_values(&x, &self.generators);
        Ok(lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Values of a chart point on the Hilbert basis of the top cone.
    pub fn toric_point(&self, y: &[f64], tag: impl Into<String>) -> ToricPoint {
        ToricPoint {
            carrier: self.top,
            values: self.hilbert_positions.iter().map(|&p| y[p]).collect(),
            tag: tag.into(),
        }
    }
}

fn point_of(gens: &[IntVec], u: &[f64]) -> Vec<f64> {
    let n = gens.first().map_or(0, Vec::len);
    let mut x = vec![0.0; n];
    for (g, &c) in gens.iter().zip(u) {
        for (xi, &gi) in x.iter_mut().zip(g) {
            *xi += c * gi as f64;
        }
    }
    x
}

/// `(e^{−2π⟨α, x⟩})_α`.
pub fn expi_values(x: &[f64], gens: &[IntVec]) -> Vec<f64> {
    gens.iter()
        .map(|a| (-2.0 * PI * pair_int_f64(a, x)).exp())
        .collect()
}

/// The image of `x ∈ N_ℝ` in `X>0`, as a homomorphism on `S_σ`.
pub fn expi_embed(x: &[f64], gens: &SemigroupGens) -> ToricPoint {
    ToricPoint {
        carrier: gens.cone,
        values: expi_values(x, &gens.elements),
        tag: "expi".to_string(),
    }
}

/// Builds the chart of a maximal flag and verifies its invariants.
pub fn build_chart(
    fan: &Fan,
    flag: &Flag,
    hilbert: &SemigroupGens,
    index: usize,
) -> Result<Chart, ChartError> {
    let cone = FlagCone::new(fan, flag)?;
    if !flag.is_maximal(fan) {
        return Err(ConeError::NotMaximal.into());
    }
    let top = flag.top().ok_or(ConeError::NotMaximal)?;
    let alphas = triangular_generators(fan, flag)?;
    let mut generators = alphas;
    let mut hilbert_positions = Vec::with_capacity(hilbert.len());
    for e in &hilbert.elements {
        match generators.iter().position(|g| g == e) {
            Some(p) => hilbert_positions.push(p),
            None => {
                hilbert_positions.push(generators.len());
                generators.push(e.clone());
            }
        }
    }
    let barycenters = cone.generators.clone();
    let c: Vec<IntVec> = generators
        .iter()
        .map(|a| barycenters.iter().map(|b| pair_int(a, b)).collect())
        .collect();
    let b: Vec<IntVec> = c
        .iter()
        .map(|row| {
            (0..row.len())
                .map(|j| if j == 0 { row[0] } else { row[j] - row[j - 1] })
                .collect()
        })
        .collect();
    let dual_basis = crate::exact::dual_basis(
        &barycenters
            .iter()
            .map(|g| crate::exact::to_rat_vec(g))
            .collect::<Vec<_>>(),
    )
    .map_err(|_| BaryError::Degenerate)?;
    let chart = Chart {
        index,
        flag: flag.clone(),
        top,
        generators,
        hilbert_positions,
        barycenters,
        dual_basis,
        c,
        psi: MonomialMap { b },
    };
    chart.check_invariants()?;
    Ok(chart)
}

/// A point of `X≥0`: a semigroup homomorphism `S_σ → ℝ≥0` recorded by its
/// values on the Hilbert basis of `S_σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToricPoint {
    pub carrier: usize,
    pub values: Vec<f64>,
    pub tag: String,
}

impl ToricPoint {
    /// Largest violation of the multiplicative law over the additive
    /// relations recorded for the carrier's generators.
    pub fn relation_residual(&self, gens: &SemigroupGens) -> f64 {
        gens.relations
            .iter()
            .map(|r| {
                let l: f64 = r.lhs.iter().map(|&i| self.values[i]).product();
                let rr: f64 = r.rhs.iter().map(|&i| self.values[i]).product();
                (l - rr).abs() / l.abs().max(rr.abs()).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Precomputed passage from `S_σ` to `S_τ` for a face `τ ≤ σ`.
#[derive(Debug, Clone)]
struct Localization {
    /// `α` (vanishing exactly on `τ`) in the Hilbert basis of `S_σ`.
    cut: Vec<u32>,
    /// For each Hilbert basis element `m` of `S_τ`: `m + kα` in the Hilbert
    /// basis of `S_σ`, and `k`.
    targets: Vec<(Vec<u32>, u32)>,
}

fn monomial(values: &[f64], exps: &[u32]) -> f64 {
    values
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e != 0)
        .map(|(&v, &e)| v.powi(e as i32))
        .product()
}

/// Charts for all maximal flags together with the semigroup data needed to
/// compare points across charts.
#[derive(Debug, Clone)]
pub struct Atlas {
    fan: Fan,
    semigroups: Vec<SemigroupGens>,
    subdivision: Subdivision,
    charts: Vec<Chart>,
    localizations: HashMap<(usize, usize), Localization>,
    /// `(face, chart)` ↦ chart generators in the Hilbert basis of the face.
    restrictions: HashMap<(usize, usize), Vec<Vec<u32>>>,
}

fn localization(fan: &Fan, sg: &[SemigroupGens], sigma: usize, tau: usize) -> Localization {
    let dual = dual_cone(fan, sigma);
    let tau_gens = &fan.cone(tau).generators;
    let mut alpha = vec![0; fan.dim()];
    for r in &dual.rays {
        if tau_gens.iter().all(|v| pair_int(r, v) == 0) {
            alpha = add_int(&alpha, r);
        }
    }
    let src = &sg[sigma];
    let cut = src.decompose(&alpha).expect("cut functional lies in S_σ");
    let outside: Vec<&IntVec> = fan
        .cone(sigma)
        .generators
        .iter()
        .filter(|v| !tau_gens.contains(v))
        .collect();
    let targets = sg[tau]
        .elements
        .iter()
        .map(|m| {
            let mut k = 0i64;
            for v in &outside {
                let a = pair_int(&alpha, v);
                let mv = pair_int(m, v);
                if mv < 0 {
                    k = k.max((-mv + a - 1) / a);
                }
            }
            let shifted = add_int(m, &scale_int(&alpha, k));
            let coeffs = src.decompose(&shifted).expect("shifted element lies in S_σ");
            (coeffs, k as u32)
        })
        .collect();
    Localization { cut, targets }
}

impl Atlas {
    pub fn new(fan: &Fan) -> Result<Self, ChartError> {
        let semigroups: Vec<SemigroupGens> = (0..fan.num_cones())
            .into_par_iter()
            .map(|c| hilbert_basis(fan, c))
            .collect();
        let subdivision = Subdivision::new(fan)?;
        let charts = subdivision
            .flags
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let top = f.top().ok_or(ConeError::NotMaximal)?;
                build_chart(fan, f, &semigroups[top], i)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let pairs: Vec<(usize, usize)> = (0..fan.num_cones())
            .flat_map(|s| fan.faces(s).iter().map(move |&t| (s, t)))
            .collect();
        let localizations = pairs
            .par_iter()
            .map(|&(s, t)| ((s, t), localization(fan, &semigroups, s, t)))
            .collect();
        let restriction_keys: Vec<(usize, usize)> = charts
            .iter()
            .flat_map(|c| fan.faces(c.top).iter().map(move |&f| (f, c.index)))
            .collect();
        let restrictions = restriction_keys
            .par_iter()
            .map(|&(face, ci)| {
                let exps = charts[ci]
                    .generators
                    .iter()
                    .map(|g| {
                        semigroups[face]
                            .decompose(g)
                            .expect("S_σ is contained in S_τ for faces τ")
                    })
                    .collect();
                ((face, ci), exps)
            })
            .collect();
        Ok(Self {
            fan: fan.clone(),
            semigroups,
            subdivision,
            charts,
            localizations,
            restrictions,
        })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, i: usize) -> &Chart {
        &self.charts[i]
    }

    pub fn subdivision(&self) -> &Subdivision {
        &self.subdivision
    }

    pub fn semigroup(&self, cone: usize) -> &SemigroupGens {
        &self.semigroups[cone]
    }

    pub fn semigroups(&self) -> &[SemigroupGens] {
        &self.semigroups
    }

    /// Index of the chart of a maximal flag.
    pub fn chart_of(&self, flag: &Flag) -> Option<usize> {
        self.subdivision.flags.iter().position(|f| f == flag)
    }

    /// Extends `p` from `S_σ` to `S_τ = S_σ + ℤ≥0·(−α)`, where `α` cuts out
    /// `τ`; fails when `p(α) = 0`.
    pub fn localize(&self, p: &ToricPoint, tau: usize) -> Result<ToricPoint, ChartError> {
        let loc = self
            .localizations
            .get(&(p.carrier, tau))
            .ok_or(ChartError::NotAFace {
                face: tau,
                of: p.carrier,
            })?;
        let a = monomial(&p.values, &loc.cut);
        if a <= 0.0 {
            return Err(ChartError::NotInOpenSet);
        }
        let values = loc
            .targets
            .iter()
            .map(|(e, k)| monomial(&p.values, e) / a.powi(*k as i32))
            .collect();
        Ok(ToricPoint {
            carrier: tau,
            values,
            tag: p.tag.clone(),
        })
    }

    /// Equality of points of `X≥0`: both must lie in `U_{σ_p ∩ σ_q}` and agree
    /// there, up to `tol · max(1, |value|)`.
    pub fn points_equal(&self, p: &ToricPoint, q: &ToricPoint, tol: f64) -> bool {
        self.point_distance(p, q).is_some_and(|d| d <= tol)
    }

    /// Scaled sup-distance on the common open set, or `None` when one of the
    /// points lies outside it.
    pub fn point_distance(&self, p: &ToricPoint, q: &ToricPoint) -> Option<f64> {
        let common = self.fan.intersect(p.carrier, q.carrier);
        let lp = self.localize(p, common).ok()?;
        let lq = self.localize(q, common).ok()?;
        Some(
            lp.values
                .iter()
                .zip(&lq.values)
                .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
                .fold(0.0, f64::max),
        )
    }

    /// Coordinates in chart `chart` of a point, when it lies in the chart's
    /// affine open set.
    pub fn chart_coordinates(&self, p: &ToricPoint, chart: usize) -> Result<Vec<f64>, ChartError> {
        let top = self.charts[chart].top;
        let common = self.fan.intersect(p.carrier, top);
        let lp = self.localize(p, common)?;
        let exps = &self.restrictions[&(common, chart)];
        Ok(exps.iter().map(|e| monomial(&lp.values, e)).collect())
    }

    /// The `Δ_n` parameter of `p` in `C̄_F` for the chart's flag, or an error
    /// when `p ∉ C̄_F`.
    pub fn chart_member(&self, p: &ToricPoint, chart: usize, tol: f64) -> Result<DeltaPoint, ChartError> {
        let y = self.chart_coordinates(p, chart)?;
        self.charts[chart].psi_invert(&y, tol)
    }
}
