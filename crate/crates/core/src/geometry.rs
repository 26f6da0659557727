//! Polyhedral sets and the Minkowski-membership oracles built on them.
//!
//! Everything is generator-represented: an ordering cone is
//! `K = cone{g₁..g_m}`, a perturbation set is `H = conv{h₁..h_p}`, and each
//! piece of a range is `conv{v..} + cone{r..}`. Every membership question
//! reduces to one LP of the form
//!
//! ```text
//! target = Σ_hulls Σ_i λ_i p_i + Σ_j μ_j r_j,   λ ≥ 0 summing to 1 per hull,   μ ≥ 0
//! ```
//!
//! Polytopes plus finitely generated cones are closed, so the vector
//! closure and the topological closure of `H + K` both equal `H + K` here.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::lp::{self, Backend, LinearProgram, LpError};
use crate::rational::{dot, int, is_zero_vector, neg, scale, Rat, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("cone generator {0} is the zero vector")]
    ZeroGenerator(usize),
    #[error("a polytope needs at least one vertex")]
    EmptyPolytope,
    #[error("a polyhedral union needs at least one piece")]
    EmptyUnion,
    #[error("piece {0} has no vertices")]
    EmptyPiece(usize),
    #[error("scale must be nonnegative, got {0}")]
    NegativeScale(Rat),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(Rat),
    #[error("vertex {0} of H does not lie in K")]
    VertexOutsideCone(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

fn check_dim(expected: usize, v: &[Rat]) -> Result<(), GeometryError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(GeometryError::Dimension {
            expected,
            got: v.len(),
        })
    }
}

/// Finitely generated convex cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeGen {
    dim: usize,
    generators: Vec<Vector>,
    pointed: bool,
    nontrivial: bool,
}

impl ConeGen {
    /// Validates the generators and records pointedness (`K ∩ −K = {0}`)
    /// and nontriviality (`K ≠ {0}`, `K ≠ Rⁿ`) with exact LPs.
    pub fn new(dim: usize, generators: Vec<Vector>) -> Result<Self, GeometryError> {
        for (i, g) in generators.iter().enumerate() {
            check_dim(dim, g)?;
            if is_zero_vector(g) {
                return Err(GeometryError::ZeroGenerator(i));
            }
        }
        let mut cone = ConeGen {
            dim,
            generators,
            pointed: true,
            nontrivial: true,
        };
        cone.pointed = !cone.has_lineality()?;
        cone.nontrivial = !cone.generators.is_empty() && !cone.is_whole_space()?;
        Ok(cone)
    }

    /// The nonnegative orthant `Rⁿ₊`.
    pub fn orthant(dim: usize) -> Self {
        let generators = (0..dim)
            .map(|i| (0..dim).map(|j| int((i == j) as i64)).collect())
            .collect();
        ConeGen {
            dim,
            generators,
            pointed: true,
            nontrivial: dim > 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn is_pointed(&self) -> bool {
        self.pointed
    }

    pub fn is_nontrivial(&self) -> bool {
        self.nontrivial
    }

    // Σλg = 0 with Σλ = 1, λ ≥ 0
    fn has_lineality(&self) -> Result<bool, GeometryError> {
        if self.generators.is_empty() {
            return Ok(false);
        }
        let zero = vec![Rat::zero(); self.dim];
        Ok(hull_sum_contains(
            std::slice::from_ref(&self.generators),
            &[],
            &zero,
            Backend::Exact,
        )?)
    }

    fn is_whole_space(&self) -> Result<bool, GeometryError> {
        for i in 0..self.dim {
            for sign in [1, -1] {
                let e: Vector = (0..self.dim)
                    .map(|j| if i == j { int(sign) } else { Rat::zero() })
                    .collect();
                if !cone_contains(self, &e, Backend::Exact)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Vertex-represented polytope; the set is the convex hull of the list.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vector>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vector>) -> Result<Self, GeometryError> {
        let dim = vertices.first().ok_or(GeometryError::EmptyPolytope)?.len();
        for v in &vertices {
            check_dim(dim, v)?;
        }
        Ok(Polytope { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    /// Vertices of `t·H`.
    pub fn scaled_vertices(&self, t: &Rat) -> Vec<Vector> {
        self.vertices.iter().map(|v| scale(t, v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub vertices: Vec<Vector>,
    pub rays: Vec<Vector>,
}

/// Finite union of pieces `conv(vertices) + cone(rays)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolyhedralUnion {
    dim: usize,
    pieces: Vec<Piece>,
}

impl VPolyhedralUnion {
    pub fn new(pieces: Vec<Piece>) -> Result<Self, GeometryError> {
        let first = pieces.first().ok_or(GeometryError::EmptyUnion)?;
        let dim = first
            .vertices
            .first()
            .ok_or(GeometryError::EmptyPiece(0))?
            .len();
        for (i, piece) in pieces.iter().enumerate() {
            if piece.vertices.is_empty() {
                return Err(GeometryError::EmptyPiece(i));
            }
            for v in piece.vertices.iter().chain(&piece.rays) {
                check_dim(dim, v)?;
            }
        }
        Ok(VPolyhedralUnion { dim, pieces })
    }

    /// A finite point set (every piece a single vertex, no rays).
    pub fn from_points(points: Vec<Vector>) -> Result<Self, GeometryError> {
        Self::new(
            points
                .into_iter()
                .map(|p| Piece {
                    vertices: vec![p],
                    rays: vec![],
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn all_vertices(&self) -> impl Iterator<Item = &Vector> {
        self.pieces.iter().flat_map(|p| p.vertices.iter())
    }

    pub fn all_rays(&self) -> impl Iterator<Item = &Vector> {
        self.pieces.iter().flat_map(|p| p.rays.iter())
    }
}

/// Whether `target ∈ conv(hulls[0]) + … + conv(hulls[k]) + cone(rays)`.
pub fn hull_sum_contains(
    hulls: &[Vec<Vector>],
    rays: &[Vector],
    target: &[Rat],
    backend: Backend,
) -> Result<bool, LpError> {
    let dim = target.len();
    let hull_vars: usize = hulls.iter().map(Vec::len).sum();
    let num_vars = hull_vars + rays.len();
    let mut lp = LinearProgram::new(num_vars);

    for (coord, t) in target.iter().enumerate() {
        let mut row = Vec::with_capacity(num_vars);
        for p in hulls.iter().flatten().chain(rays) {
            if p.len() != dim {
                return Err(LpError::Structural(format!(
                    "point of dimension {} in a {dim}-dimensional sum",
                    p.len()
                )));
            }
            row.push(p[coord].clone());
        }
        lp.add_eq(row, t.clone());
    }
    let mut offset = 0;
    for hull in hulls {
        let mut row = vec![Rat::zero(); num_vars];
        for slot in &mut row[offset..offset + hull.len()] {
            *slot = Rat::one();
        }
        offset += hull.len();
        lp.add_eq(row, Rat::one());
    }
    lp::is_feasible(&lp, backend)
}

/// `y ∈ K`: some nonnegative combination of the generators equals `y`.
pub fn cone_contains(k: &ConeGen, y: &[Rat], backend: Backend) -> Result<bool, GeometryError> {
    check_dim(k.dim, y)?;
    Ok(hull_sum_contains(&[], &k.generators, y, backend)?)
}

/// `l ∈ K⁺`: `l · g ≥ 0` for every generator.
pub fn dual_cone_contains(k: &ConeGen, l: &[Rat]) -> Result<bool, GeometryError> {
    check_dim(k.dim, l)?;
    Ok(k.generators.iter().all(|g| dot(l, g) >= Rat::zero()))
}

/// `v ∈ s·H + K`.
pub fn in_scaled_h_plus_k(
    h: &Polytope,
    k: &ConeGen,
    v: &[Rat],
    s: &Rat,
    backend: Backend,
) -> Result<bool, GeometryError> {
    check_dim(k.dim, v)?;
    check_dim(h.dim, v)?;
    Ok(hull_sum_contains(
        &[h.scaled_vertices(s)],
        &k.generators,
        v,
        backend,
    )?)
}

/// `y ∈ t·H − K` for a fixed `t`; the feasibility test behind the
/// separation functional.
pub fn scaled_h_minus_k_contains(
    h: &Polytope,
    k: &ConeGen,
    y: &[Rat],
    t: &Rat,
    backend: Backend,
) -> Result<bool, GeometryError> {
    check_dim(k.dim, y)?;
    check_dim(h.dim, y)?;
    let rays: Vec<Vector> = k.generators.iter().map(|g| neg(g)).collect();
    Ok(hull_sum_contains(&[h.scaled_vertices(t)], &rays, y, backend)?)
}

/// `0 ∉ H + K`, certified with the exact backend.
pub fn zero_notin_h_plus_k(h: &Polytope, k: &ConeGen) -> Result<bool, GeometryError> {
    let zero = vec![Rat::zero(); k.dim];
    Ok(!in_scaled_h_plus_k(h, k, &zero, &Rat::one(), Backend::Exact)?)
}

/// Checks `d₁H + d₂H ⊂ (d₁+d₂)H + K` on every vertex pair, which by
/// convexity covers the whole sum.
pub fn triangle_property_check(
    h: &Polytope,
    k: &ConeGen,
    d1: &Rat,
    d2: &Rat,
    backend: Backend,
) -> Result<bool, GeometryError> {
    for d in [d1, d2] {
        if *d < Rat::zero() {
            return Err(GeometryError::NegativeScale(d.clone()));
        }
    }
    if h.dim != k.dim {
        return Err(GeometryError::Dimension {
            expected: k.dim,
            got: h.dim,
        });
    }
    let total = d1 + d2;
    for hi in &h.vertices {
        for hj in &h.vertices {
            let point: Vector = hi
                .iter()
                .zip(hj)
                .map(|(a, b)| d1 * a + d2 * b)
                .collect();
            if !in_scaled_h_plus_k(h, k, &point, &total, backend)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `M ∩ (y₀ − εH − K) = ∅`, checked piece by piece. A piece meets the
/// target set iff `y₀ ∈ piece + εH + K`.
pub fn union_disjoint_from(
    m: &VPolyhedralUnion,
    y0: &[Rat],
    epsilon: &Rat,
    h: &Polytope,
    k: &ConeGen,
    backend: Backend,
) -> Result<bool, GeometryError> {
    if *epsilon <= Rat::zero() {
        return Err(GeometryError::NonPositiveEpsilon(epsilon.clone()));
    }
    check_dim(k.dim, y0)?;
    check_dim(h.dim, y0)?;
    check_dim(m.dim, y0)?;
    let h_scaled = h.scaled_vertices(epsilon);
    for piece in &m.pieces {
        let rays: Vec<Vector> = piece.rays.iter().chain(&k.generators).cloned().collect();
        let hulls = [piece.vertices.clone(), h_scaled.clone()];
        if hull_sum_contains(&hulls, &rays, y0, backend)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every vertex of `H` lies in `K`.
pub fn validate_h_in_k(h: &Polytope, k: &ConeGen) -> Result<(), GeometryError> {
    if h.dim != k.dim {
        return Err(GeometryError::Dimension {
            expected: k.dim,
            got: h.dim,
        });
    }
    for (i, v) in h.vertices.iter().enumerate() {
        if !cone_contains(k, v, Backend::Exact)? {
            return Err(GeometryError::VertexOutsideCone(i));
        }
    }
    Ok(())
}
