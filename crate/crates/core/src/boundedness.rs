//! Lower-boundedness ladder for polyhedral ranges.
//!
//! For a range `M = ∪ conv(Vᵢ) + cone(Rᵢ)` and an ordering cone `K` the
//! four notions form a chain
//!
//! ```text
//! K-lower bounded ⇒ quasi K-lower bounded ⇒ k*(H)-lower bounded ⇒ H-lower bounded
//! ```
//!
//! and each implication is strict. The checks used here:
//!
//! * quasi `K`-lower bounded iff every recession ray lies in `K`. If so,
//!   `M ⊂ conv(all vertices) + K`. If some ray `r ∉ K`, then `K` is closed and
//!   `B` bounded, so `v + s·r` leaves every `B + K` for large `s`.
//! * `K`-lower bounded additionally needs one `b` with `v − b ∈ K` for all
//!   vertices, an LP in `b`.
//! * `k*(H)`: an LP for `k*` with `k*·g ≥ 0`, `k*·h ≥ 1` (the `δ` of `H^{+s}`
//!   fixed to 1), and `k*·r ≥ 0` on every ray, so `inf k*(M)` is the minimum
//!   over vertices.
//! * `H`-lower bounded is existential over `(y₀, ε)`; candidates are tested
//!   and the answer is "witness found" or "unknown", never "no".

use num_traits::{One, Zero};
use thiserror::Error;

use crate::geometry::{
    cone_contains, union_disjoint_from, zero_notin_h_plus_k, ConeGen, GeometryError, Polytope,
    VPolyhedralUnion,
};
use crate::lp::{self, Backend, LinearProgram, LpStatus};
use crate::rational::{dot, int, Rat, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundednessError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no (y0, epsilon) candidates supplied")]
    NoCandidates,
    #[error("0 ∈ H + K; scalar lower bounds through H are undefined")]
    ZeroInHPlusK,
    #[error("dimension mismatch between range ({range}) and cone ({cone})")]
    Dimension { range: usize, cone: usize },
}

impl From<lp::LpError> for BoundednessError {
    fn from(e: lp::LpError) -> Self {
        BoundednessError::Geometry(GeometryError::Lp(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub y0: Vector,
    pub epsilon: Rat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HLower {
    Witness(Candidate),
    Unknown,
}

impl HLower {
    pub fn is_witness(&self) -> bool {
        matches!(self, HLower::Witness(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    /// `b` with `M ⊂ b + K`, when one exists.
    pub k_lower: Option<Vector>,
    pub quasi_k_lower: bool,
    /// `k* ∈ K⁺ ∩ H^{+s}` bounded below on `M`.
    pub kstar: Option<Vector>,
    pub h_lower: HLower,
    pub ladder_consistent: bool,
}

impl BoundednessReport {
    pub fn is_k_lower(&self) -> bool {
        self.k_lower.is_some()
    }
}

fn check_dims(m: &VPolyhedralUnion, k: &ConeGen) -> Result<(), BoundednessError> {
    if m.dim() != k.dim() {
        return Err(BoundednessError::Dimension {
            range: m.dim(),
            cone: k.dim(),
        });
    }
    Ok(())
}

fn rays_in_cone(m: &VPolyhedralUnion, k: &ConeGen, backend: Backend) -> Result<bool, BoundednessError> {
    for r in m.all_rays() {
        if !cone_contains(k, r, backend)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_quasi_k_lower_bounded(
    m: &VPolyhedralUnion,
    k: &ConeGen,
    backend: Backend,
) -> Result<bool, BoundednessError> {
    check_dims(m, k)?;
    rays_in_cone(m, k, backend)
}

/// Returns `b` with `M ⊂ b + K`, or `None`.
pub fn is_k_lower_bounded(
    m: &VPolyhedralUnion,
    k: &ConeGen,
    backend: Backend,
) -> Result<Option<Vector>, BoundednessError> {
    check_dims(m, k)?;
    if !rays_in_cone(m, k, backend)? {
        return Ok(None);
    }
    let n = k.dim();
    let gens = k.generators();
    let vertices: Vec<&Vector> = m.all_vertices().collect();
    // Variables: b (free, n) then one block of generator weights per vertex.
    let num_vars = n + vertices.len() * gens.len();
    let mut lp = LinearProgram::new(num_vars);
    for i in 0..n {
        lp = lp.free(i);
    }
    for (vi, v) in vertices.iter().enumerate() {
        let block = n + vi * gens.len();
        for coord in 0..n {
            let mut row = vec![Rat::zero(); num_vars];
            row[coord] = Rat::one();
            for (j, g) in gens.iter().enumerate() {
                row[block + j] = g[coord].clone();
            }
            lp.add_eq(row, v[coord].clone());
        }
    }
    match lp::solve(&lp, backend)?.status {
        LpStatus::Feasible { witness, .. } => Ok(Some(witness[..n].to_vec())),
        _ => Ok(None),
    }
}

/// Finds `k*` with `k* ∈ K⁺`, `k*·h ≥ 1` on every vertex of `H`, and
/// `k*·r ≥ 0` on every ray of `M`.
///
/// The LP minimizes `Σ_h k*·h`, which on the worked examples picks the
/// normalized functional. With `h = None` the `H` block is dropped and a
/// nonzero `k* ∈ K⁺` is sought instead, trying `±k*ᵢ ≥ 1` coordinate by
/// coordinate (the feasible set is a cone, so this loses nothing).
pub fn find_kstar(
    m: &VPolyhedralUnion,
    k: &ConeGen,
    h: Option<&Polytope>,
    backend: Backend,
) -> Result<Option<Vector>, BoundednessError> {
    check_dims(m, k)?;
    let n = k.dim();
    let base = || {
        let mut lp = LinearProgram::new(n);
        for i in 0..n {
            lp = lp.free(i);
        }
        for g in k.generators().iter().chain(m.all_rays()) {
            lp.add_ge(g.clone(), Rat::zero());
        }
        lp
    };

    match h {
        Some(h) => {
            if h.dim() != n {
                return Err(GeometryError::Dimension {
                    expected: n,
                    got: h.dim(),
                }
                .into());
            }
            if !zero_notin_h_plus_k(h, k)? {
                return Err(BoundednessError::ZeroInHPlusK);
            }
            let mut lp = base();
            for v in h.vertices() {
                lp.add_ge(v.clone(), Rat::one());
            }
            let mut c = vec![Rat::zero(); lp.num_vars()];
            for v in h.vertices() {
                for (ci, vi) in c.iter_mut().zip(v) {
                    *ci += vi;
                }
            }
            let lp = lp.minimize(c);
            match lp::solve(&lp, backend)?.status {
                LpStatus::Feasible { witness, .. } => Ok(Some(witness[..n].to_vec())),
                // Unbounded cannot happen (objective ≥ |H|), but a feasible
                // direction still exists; fall back to plain feasibility.
                LpStatus::Unbounded => {
                    let mut lp = lp;
                    lp.set_objective(lp::Objective::Feasibility);
                    Ok(lp::solve(&lp, backend)?.witness().map(|w| w[..n].to_vec()))
                }
                LpStatus::Infeasible => Ok(None),
            }
        }
        None => {
            for i in 0..n {
                for sign in [1, -1] {
                    let mut lp = base();
                    let mut e = vec![Rat::zero(); n];
                    e[i] = int(sign);
                    lp.add_ge(e, Rat::one());
                    if let Some(w) = lp::solve(&lp, backend)?.witness() {
                        return Ok(Some(w[..n].to_vec()));
                    }
                }
            }
            Ok(None)
        }
    }
}

/// `inf k*(M)` for a `k*` that is nonnegative on every ray.
pub fn kstar_infimum(m: &VPolyhedralUnion, kstar: &[Rat]) -> Rat {
    m.all_vertices()
        .map(|v| dot(kstar, v))
        .min()
        .expect("unions are nonempty")
}

/// The explicit disjointness scale for `y` given a valid `k*`:
/// `ε = max(k*·y − inf k*(M), 0) + 1`, which exceeds `(k*·y − inf k*(M)) / δ`
/// because `δ = min_h k*·h ≥ 1`.
pub fn kstar_epsilon_bound(m: &VPolyhedralUnion, kstar: &[Rat], y: &[Rat]) -> Rat {
    let gap = dot(kstar, y) - kstar_infimum(m, kstar);
    let gap = if gap < Rat::zero() { Rat::zero() } else { gap };
    gap + Rat::one()
}

pub fn is_h_lower_bounded(
    m: &VPolyhedralUnion,
    k: &ConeGen,
    h: &Polytope,
    candidates: &[Candidate],
    backend: Backend,
) -> Result<HLower, BoundednessError> {
    if candidates.is_empty() {
        return Err(BoundednessError::NoCandidates);
    }
    check_dims(m, k)?;
    for c in candidates {
        if c.epsilon <= Rat::zero() {
            return Err(GeometryError::NonPositiveEpsilon(c.epsilon.clone()).into());
        }
    }
    for c in candidates {
        if union_disjoint_from(m, &c.y0, &c.epsilon, h, k, backend)? {
            return Ok(HLower::Witness(c.clone()));
        }
    }
    Ok(HLower::Unknown)
}

/// Runs all four checks. When a `k*` is found, the explicit candidate
/// `(0, kstar_epsilon_bound(0))` is tried after the supplied ones.
pub fn classify(
    m: &VPolyhedralUnion,
    k: &ConeGen,
    h: &Polytope,
    candidates: &[Candidate],
    backend: Backend,
) -> Result<BoundednessReport, BoundednessError> {
    if candidates.is_empty() {
        return Err(BoundednessError::NoCandidates);
    }
    let k_lower = is_k_lower_bounded(m, k, backend)?;
    let quasi_k_lower = is_quasi_k_lower_bounded(m, k, backend)?;
    let kstar = find_kstar(m, k, Some(h), backend)?;

    let mut all = candidates.to_vec();
    if let Some(ks) = &kstar {
        let origin = vec![Rat::zero(); k.dim()];
        let epsilon = kstar_epsilon_bound(m, ks, &origin);
        all.push(Candidate { y0: origin, epsilon });
    }
    let h_lower = is_h_lower_bounded(m, k, h, &all, backend)?;

    // The last link is checkable because the derived candidate is
    // guaranteed to work whenever k* exists.
    let ladder_consistent = (k_lower.is_none() || quasi_k_lower)
        && (!quasi_k_lower || kstar.is_some())
        && (kstar.is_none() || h_lower.is_witness());
    Ok(BoundednessReport {
        k_lower,
        quasi_k_lower,
        kstar,
        h_lower,
        ladder_consistent,
    })
}
