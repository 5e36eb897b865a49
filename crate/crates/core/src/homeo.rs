//! The rescaling homeomorphism `Φ` of `N_ℝ` and its extension to the ball
//! through barycentric coordinates on the compactified flag cones.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::bary::{BaryError, FlagCone, Subdivision};
use crate::charts::{exp_f, theta, Atlas, ChartError, ToricPoint};
use crate::exact::{rat, Rat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomeoError {
    #[error("barycentric coordinates {0:?} are not on the simplex")]
    NotOnSimplex(Vec<f64>),
    #[error("expected {expected} barycentric coordinates, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("the probe needs a flag of length at least 2")]
    ProbeDimension,
    #[error(transparent)]
    Bary(#[from] BaryError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// `φ_{j,k}(u) = (1/2π) log((1 + Σ_{i≤j} u_i) / (1 + Σ_{i<j} u_i))`, with
/// `j` counted from 1.
pub fn phi_jk(u: &[f64], j: usize) -> f64 {
    assert!(j >= 1 && j <= u.len(), "index {j} outside 1..={}", u.len());
    let before: f64 = u[..j - 1].iter().sum();
    (u[j - 1] / (1.0 + before)).ln_1p() / (2.0 * PI)
}

/// `Φ_F` in simplicial coordinates.
pub fn phi_flag(u: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len());
    let mut before = 0.0;
    for &x in u {
        out.push((x / (1.0 + before)).ln_1p() / (2.0 * PI));
        before += x;
    }
    out
}

/// `u_j = (e^{2π v_j} − 1) e^{2π Σ_{i<j} v_i}`.
pub fn phi_flag_inverse(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut before = 0.0;
    for &x in v {
        out.push((2.0 * PI * x).exp_m1() * (2.0 * PI * before).exp());
        before += x;
    }
    out
}

/// `Φ_F(x)` for `x ∈ C_F`, as a point of `N_ℝ`. Coordinates down to `−tol`
/// are accepted as zero.
pub fn phi_on_cone(cone: &FlagCone, x: &[f64], tol: f64) -> Result<Vec<f64>, HomeoError> {
    let u = cone
        .coordinates_f64(x)
        .ok_or(BaryError::Degenerate)?;
    if u.iter().any(|&c| c < -tol) {
        return Err(BaryError::NotInCone {
            coords: u.iter().map(ToString::to_string).collect(),
        }
        .into());
    }
    let u: Vec<f64> = u.into_iter().map(|c| c.max(0.0)).collect();
    Ok(cone.point_f64(&phi_flag(&u)))
}

/// `Φ(x)`, evaluated in the least maximal flag cone containing `x`. Returns
/// the flag index and the image.
pub fn phi_global(sub: &Subdivision, x: &[f64], tol: f64) -> (usize, Vec<f64>) {
    let i = sub.locate(x, tol).expect("a complete fan has a maximal flag");
    let cone = &sub.cones[i];
    let u: Vec<f64> = cone
        .coordinates_f64(x)
        .expect("maximal flag cone")
        .into_iter()
        .map(|c| c.max(0.0))
        .collect();
    (i, cone.point_f64(&phi_flag(&u)))
}

/// `θ ∘ exp_F ∘ Φ_F` in closed form: `w_j = (1 + Σ_{i<j} u_i) / (1 + Σ u_i)`.
pub fn composite(u: &[f64]) -> Vec<f64> {
    let total: f64 = 1.0 + u.iter().sum::<f64>();
    let mut before = 1.0;
    let mut out = Vec::with_capacity(u.len());
    for &x in u {
        out.push(before / total);
        before += x;
    }
    out
}

/// `w_j = Σ_{i<j} ξ_i`: the point of `Δ_n` with barycentric coordinates `ξ`.
pub fn partial_sums(xi: &[f64]) -> Vec<f64> {
    let n = xi.len().saturating_sub(1);
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &x in &xi[..n] {
        acc += x;
        out.push(acc);
    }
    out
}

/// Exact partial sums for rational barycentric coordinates.
pub fn partial_sums_exact(xi: &[Rat]) -> Vec<Rat> {
    let n = xi.len().saturating_sub(1);
    let mut acc = rat(0);
    xi[..n]
        .iter()
        .map(|x| {
            acc += x;
            acc.clone()
        })
        .collect()
}

/// Barycentric coordinates `ξ_0..ξ_k` on the compactified flag cone; `ξ_0`
/// is the weight of the origin and `ξ_0 = 0` is the face at infinity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaryPoint(Vec<f64>);

impl BaryPoint {
    pub const TOL: f64 = 1e-12;

    pub fn new(xi: Vec<f64>) -> Result<Self, HomeoError> {
        let sum: f64 = xi.iter().sum();
        if xi.is_empty()
            || xi.iter().any(|&x| !(x >= 0.0) || !x.is_finite())
            || (sum - 1.0).abs() > Self::TOL
        {
            return Err(HomeoError::NotOnSimplex(xi));
        }
        Ok(Self(xi))
    }

    /// `ξ_0 = 1/(1 + Σu)`, `ξ_j = u_j/(1 + Σu)`.
    pub fn from_simplicial(u: &[f64]) -> Self {
        let total: f64 = 1.0 + u.iter().sum::<f64>();
        let mut xi = Vec::with_capacity(u.len() + 1);
        xi.push(1.0 / total);
        xi.extend(u.iter().map(|x| x / total));
        Self(xi)
    }

    /// `u_j = ξ_j / ξ_0`, defined off the face at infinity.
    pub fn to_simplicial(&self) -> Option<Vec<f64>> {
        let x0 = self.0[0];
        (x0 > 0.0).then(|| self.0[1..].iter().map(|x| x / x0).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_at_infinity(&self) -> bool {
        self.0[0] == 0.0
    }
}

/// `Φ̄_F(ξ)`: partial sums into `Δ_n`, then the chart's `ψ`. Defined on the
/// whole closed simplex, the face at infinity included.
pub fn param_boundary_point(
    atlas: &Atlas,
    chart: usize,
    xi: &BaryPoint,
) -> Result<ToricPoint, HomeoError> {
    let ch = atlas.chart(chart);
    if xi.k() != ch.n() {
        return Err(HomeoError::WrongLength {
            expected: ch.n() + 1,
            got: xi.coords().len(),
        });
    }
    let w = partial_sums(xi.coords());
    let y = ch.psi_eval(&w);
    Ok(ch.toric_point(&y, format!("chart {chart}")))
}

/// The naive exponential embedding along the path `u = (s, c, …, c)`, in the
/// chart's `θ ∘ exp_F` coordinates. For `n = 2` the second coordinate is
/// `e^{−2πc}` for every `s`, while the barycentric position tends to
/// `(0, 1, 0)` as `s → ∞`: the limit depends on `c`.
pub fn nonextension_probe(n: usize, c: f64, s: f64) -> Result<Vec<f64>, HomeoError> {
    if n < 2 {
        return Err(HomeoError::ProbeDimension);
    }
    let mut u = vec![c; n];
    u[0] = s;
    Ok(theta(&exp_f(&u)))
}

/// The naive embedding written in barycentric coordinates with `ξ_0 > 0`.
pub fn naive_barycentric(xi: &BaryPoint) -> Option<Vec<f64>> {
    xi.to_simplicial().map(|u| theta(&exp_f(&u)))
}
