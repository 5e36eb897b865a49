//! Exact rational linear algebra and integer lattice utilities.
//!
//! Everything combinatorial in this crate (cones, dual cones, flags, Hilbert
//! bases) is computed with arbitrary precision rationals or machine integers.
//! Floating point only enters through the analytic maps in `charts` and
//! `homeo`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;
pub type RatVec = Vec<Rat>;
pub type RatMat = Vec<RatVec>;
pub type IntVec = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("input vectors are linearly dependent")]
    Singular,
    #[error("vector is not in the span of the basis")]
    NotInSpan,
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_rat_vec(v: &[i64]) -> RatVec {
    v.iter().map(|&x| rat(x)).collect()
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    })
}

pub fn rat_vec_to_f64(v: &[Rat]) -> Vec<f64> {
    v.iter().map(rat_to_f64).collect()
}

/// The pairing between `M` and `N`.
pub fn pair(alpha: &[Rat], x: &[Rat]) -> Result<Rat, ExactError> {
    if alpha.len() != x.len() {
        return Err(ExactError::DimensionMismatch(alpha.len(), x.len()));
    }
    Ok(alpha
        .iter()
        .zip(x)
        .fold(Rat::zero(), |acc, (a, b)| acc + a * b))
}

/// Integer pairing; callers guarantee equal lengths.
pub fn pair_int(alpha: &[i64], x: &[i64]) -> i64 {
    debug_assert_eq!(alpha.len(), x.len());
    alpha.iter().zip(x).map(|(a, b)| a * b).sum()
}

pub fn pair_int_f64(alpha: &[i64], x: &[f64]) -> f64 {
    debug_assert_eq!(alpha.len(), x.len());
    alpha.iter().zip(x).map(|(&a, b)| a as f64 * b).sum()
}

pub(crate) fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add_int(a: &[i64], b: &[i64]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_int(a: &[i64], b: &[i64]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_int(a: &[i64], k: i64) -> IntVec {
    a.iter().map(|x| x * k).collect()
}

pub fn sum_int(vs: &[&[i64]], dim: usize) -> IntVec {
    let mut out = vec![0; dim];
    for v in vs {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += x;
        }
    }
    out
}

pub fn gcd_vec(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn is_primitive(v: &[i64]) -> bool {
    gcd_vec(v) == 1
}

/// Scales a nonzero rational vector to the primitive integer vector on the same ray.
pub fn primitive(v: &[Rat]) -> IntVec {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return vec![0; v.len()];
    }
    ints.iter()
        .map(|x| (x / &g).to_i64().expect("lattice coordinate overflows i64"))
        .collect()
}

/// Reduces `m` in place to reduced row echelon form and returns the pivot columns.
pub(crate) fn rref(m: &mut RatMat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[RatVec]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

pub fn rank_int(rows: &[IntVec]) -> usize {
    let m: RatMat = rows.iter().map(|r| to_rat_vec(r)).collect();
    rank(&m)
}

pub fn inverse(m: &[RatVec]) -> Result<RatMat, ExactError> {
    let n = m.len();
    if let Some(bad) = m.iter().find(|r| r.len() != n) {
        return Err(ExactError::DimensionMismatch(n, bad.len()));
    }
    let mut aug: RatMat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return Err(ExactError::Singular);
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// The basis `β` of `M_ℚ` dual to the given basis of `N_ℚ`: `⟨β_i, b_j⟩ = δ_ij`.
pub fn dual_basis(basis: &[RatVec]) -> Result<RatMat, ExactError> {
    let n = basis.len();
    if let Some(bad) = basis.iter().find(|b| b.len() != n) {
        return Err(ExactError::DimensionMismatch(n, bad.len()));
    }
    // Columns of the matrix are the basis vectors; rows of its inverse are the β_i.
    let cols: RatMat = (0..n)
        .map(|r| basis.iter().map(|b| b[r].clone()).collect())
        .collect();
    inverse(&cols)
}

/// Coordinates `u` with `x = Σ u_j basis_j`, for linearly independent `basis`
/// (possibly fewer vectors than the ambient dimension).
pub fn coordinates_in(basis: &[RatVec], x: &[Rat]) -> Result<RatVec, ExactError> {
    let k = basis.len();
    let n = x.len();
    if let Some(bad) = basis.iter().find(|b| b.len() != n) {
        return Err(ExactError::DimensionMismatch(n, bad.len()));
    }
    let mut aug: RatMat = (0..n)
        .map(|r| {
            let mut row: RatVec = basis.iter().map(|b| b[r].clone()).collect();
            row.push(x[r].clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&k) {
        return Err(ExactError::NotInSpan);
    }
    if pivots.len() < k {
        return Err(ExactError::Singular);
    }
    Ok((0..k).map(|i| aug[i][k].clone()).collect())
}

/// A rational basis of `{x : row · x = 0 for all rows}`.
pub fn nullspace(rows: &[RatVec], dim: usize) -> RatMat {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); dim];
            v[f] = Rat::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// A unimodular change of basis adapted to the saturation of a sublattice.
///
/// `basis_n` is a basis of `N` whose first `span_rank` vectors span the
/// saturation of the generated sublattice; `basis_m` is the dual basis of `M`.
/// The quotient projection `N → ℤ^{n−k}` reads off the last `n − k`
/// coordinates, so its kernel is exactly the saturated span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasisChange {
    pub dim: usize,
    pub span_rank: usize,
    pub basis_n: Vec<IntVec>,
    pub basis_m: Vec<IntVec>,
}

impl LatticeBasisChange {
    pub fn identity(dim: usize) -> Self {
        let id: Vec<IntVec> = (0..dim)
            .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
            .collect();
        Self {
            dim,
            span_rank: 0,
            basis_n: id.clone(),
            basis_m: id,
        }
    }

    pub fn target_rank(&self) -> usize {
        self.dim - self.span_rank
    }

    /// Image of `x ∈ N` in the quotient lattice.
    pub fn project(&self, x: &[i64]) -> IntVec {
        self.basis_m[self.span_rank..]
            .iter()
            .map(|m| pair_int(m, x))
            .collect()
    }

    pub fn project_rat(&self, x: &[Rat]) -> RatVec {
        self.basis_m[self.span_rank..]
            .iter()
            .map(|m| dot(&to_rat_vec(m), x))
            .collect()
    }

    /// The rows of the projection matrix.
    pub fn projection_rows(&self) -> &[IntVec] {
        &self.basis_m[self.span_rank..]
    }

    /// Coordinates of a vector of the saturated span in the adapted basis.
    pub fn local_coords(&self, x: &[i64]) -> IntVec {
        self.basis_m[..self.span_rank]
            .iter()
            .map(|m| pair_int(m, x))
            .collect()
    }

    /// Coordinates of a character `m ∈ M` restricted to the saturated span.
    pub fn local_coords_m(&self, m: &[i64]) -> IntVec {
        self.basis_n[..self.span_rank]
            .iter()
            .map(|n| pair_int(m, n))
            .collect()
    }

    /// Lifts a local character (a functional on the saturated span) to `M`,
    /// with zero component along the annihilator of the span.
    pub fn lift_m(&self, local: &[i64]) -> IntVec {
        let mut out = vec![0; self.dim];
        for (c, m) in local.iter().zip(&self.basis_m) {
            for (o, x) in out.iter_mut().zip(m) {
                *o += c * x;
            }
        }
        out
    }

    /// Lattice basis of the annihilator `span^⊥ ∩ M`.
    pub fn annihilator(&self) -> &[IntVec] {
        &self.basis_m[self.span_rank..]
    }

    /// Preimage in `N` of the `i`-th unit vector of the quotient.
    pub fn section(&self, i: usize) -> &IntVec {
        &self.basis_n[self.span_rank + i]
    }

    /// Lattice basis of the saturated span (the kernel of the projection).
    pub fn kernel_basis(&self) -> &[IntVec] {
        &self.basis_n[..self.span_rank]
    }
}

/// Builds the quotient projection `N → N/⟨gens⟩_sat` by integer column reduction.
///
/// An empty generator list (or all-zero generators) gives the identity map.
pub fn quotient_projection(gens: &[IntVec], dim: usize) -> LatticeBasisChange {
    let mut a: Vec<IntVec> = gens.to_vec();
    // v holds the accumulated unimodular column operations; its columns are in M.
    let mut v: Vec<IntVec> = LatticeBasisChange::identity(dim).basis_n;
    let col_op = |a: &mut Vec<IntVec>, v: &mut Vec<IntVec>, dst: usize, src: usize, q: i64| {
        for row in a.iter_mut() {
            row[dst] -= q * row[src];
        }
        for row in v.iter_mut() {
            row[dst] -= q * row[src];
        }
    };
    let col_swap = |a: &mut Vec<IntVec>, v: &mut Vec<IntVec>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
    };
    let mut p = 0;
    for r in 0..a.len() {
        if p == dim {
            break;
        }
        loop {
            let nonzero: Vec<usize> = (p..dim).filter(|&c| a[r][c] != 0).collect();
            if nonzero.len() <= 1 {
                if let Some(&c) = nonzero.first() {
                    col_swap(&mut a, &mut v, p, c);
                    p += 1;
                }
                break;
            }
            let &best = nonzero
                .iter()
                .min_by_key(|&&c| a[r][c].abs())
                .expect("nonempty");
            col_swap(&mut a, &mut v, p, best);
            for c in p + 1..dim {
                if a[r][c] != 0 {
                    let q = a[r][c].div_euclid(a[r][p]);
                    col_op(&mut a, &mut v, c, p, q);
                }
            }
        }
    }
    let span_rank = p;
    let basis_m: Vec<IntVec> = (0..dim).map(|c| v.iter().map(|row| row[c]).collect()).collect();
    // basis_n = rows of v^{-1}; v is unimodular so the inverse is integral.
    let v_rat: RatMat = v.iter().map(|r| to_rat_vec(r)).collect();
    let inv = inverse(&v_rat).expect("column operations are unimodular");
    let basis_n: Vec<IntVec> = inv
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    debug_assert!(x.is_integer());
                    x.to_integer().to_i64().expect("lattice coordinate overflows i64")
                })
                .collect()
        })
        .collect();
    LatticeBasisChange {
        dim,
        span_rank,
        basis_n,
        basis_m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[i64]) -> RatVec {
        to_rat_vec(v)
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(&rv(&[1, 0]), &rv(&[1, 2])).unwrap(), rat(1));
        assert_eq!(pair(&rv(&[0, 1]), &rv(&[1, 2])).unwrap(), rat(2));
        assert_eq!(pair(&rv(&[2, -1]), &rv(&[1, 2])).unwrap(), rat(0));
        assert_eq!(
            pair(&rv(&[1]), &rv(&[1, 2])),
            Err(ExactError::DimensionMismatch(1, 2))
        );
    }

    #[test]
    fn dual_basis_examples() {
        let beta = dual_basis(&[rv(&[1, 0]), rv(&[1, 1])]).unwrap();
        assert_eq!(beta, vec![rv(&[1, -1]), rv(&[0, 1])]);
        let beta = dual_basis(&[rv(&[1, 0, 0]), rv(&[0, 1, 0]), rv(&[0, 0, 1])]).unwrap();
        assert_eq!(beta, vec![rv(&[1, 0, 0]), rv(&[0, 1, 0]), rv(&[0, 0, 1])]);
        let beta = dual_basis(&[rv(&[2])]).unwrap();
        assert_eq!(beta, vec![vec![rat_frac(1, 2)]]);
        assert_eq!(
            dual_basis(&[rv(&[1, 1]), rv(&[2, 2])]),
            Err(ExactError::Singular)
        );
    }

    #[test]
    fn coordinates_in_partial_basis() {
        let u = coordinates_in(&[rv(&[1, 0]), rv(&[1, 1])], &rv(&[3, 2])).unwrap();
        assert_eq!(u, rv(&[1, 2]));
        let u = coordinates_in(&[rv(&[1, 1, 0])], &rv(&[2, 2, 0])).unwrap();
        assert_eq!(u, rv(&[2]));
        assert_eq!(
            coordinates_in(&[rv(&[1, 1, 0])], &rv(&[2, 1, 0])),
            Err(ExactError::NotInSpan)
        );
    }

    #[test]
    fn quotient_by_coordinate_ray() {
        let q = quotient_projection(&[vec![1, 0]], 2);
        assert_eq!(q.target_rank(), 1);
        assert_eq!(q.project(&[5, 7]), vec![7]);
    }

    #[test]
    fn quotient_by_diagonal_ray() {
        let q = quotient_projection(&[vec![1, 1]], 2);
        let rows = q.projection_rows();
        assert_eq!(rows.len(), 1);
        assert!(rows[0] == vec![1, -1] || rows[0] == vec![-1, 1]);
        assert_eq!(q.project(&[1, 1]), vec![0]);
    }

    #[test]
    fn quotient_by_zero_cone_is_identity() {
        let q = quotient_projection(&[], 3);
        assert_eq!(q.target_rank(), 3);
        assert_eq!(q.project(&[1, -2, 3]), vec![1, -2, 3]);
    }

    #[test]
    fn quotient_saturates_the_span() {
        // ⟨(2,0,0),(0,2,2)⟩ is not saturated; its saturation contains (0,1,1).
        let q = quotient_projection(&[vec![2, 0, 0], vec![0, 2, 2]], 3);
        assert_eq!(q.span_rank, 2);
        assert_eq!(q.project(&[0, 1, 1]), vec![0]);
        assert_eq!(q.project(&[1, 0, 0]), vec![0]);
        let img = q.project(q.section(0));
        assert_eq!(img, vec![1]);
    }

    #[test]
    fn primitive_scaling() {
        assert_eq!(primitive(&[rat_frac(1, 2), rat_frac(-3, 4)]), vec![2, -3]);
        assert_eq!(primitive(&[rat(4), rat(6)]), vec![2, 3]);
    }

    #[test]
    fn nullspace_of_plane() {
        let ns = nullspace(&[rv(&[1, 1, 1])], 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(v, &rv(&[1, 1, 1])).is_zero());
        }
    }
}
