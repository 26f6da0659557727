//! Seeded generators for random instances, used by the test suites and
//! benchmarks.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::evp::{EvpProblem, FiniteMetricSpace, Mode, SetValuedMapTable};
use crate::geometry::{ConeGen, Piece, Polytope, VPolyhedralUnion};
use crate::rational::{dot, int, l1_norm, rat, sub, Rat, Vector};

pub use rand_chacha::ChaCha8Rng as InstanceRng;

pub fn seeded(seed: u64) -> InstanceRng {
    use rand::SeedableRng;
    InstanceRng::seed_from_u64(seed)
}

/// `p/q` with `q ∈ 1..=max_denom` and the value in `[lo, hi]`.
pub fn random_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64, max_denom: i64) -> Rat {
    let q = rng.gen_range(1..=max_denom);
    let p = rng.gen_range(lo * q..=hi * q);
    rat(p, q)
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64, max_denom: i64) -> Vector {
    (0..n).map(|_| random_rational(rng, lo, hi, max_denom)).collect()
}

fn random_int_vector<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> Vector {
    (0..n).map(|_| int(rng.gen_range(lo..=hi))).collect()
}

/// A pointed cone with `1..=max_gens` integer generators in `[−bound, bound]`.
/// Generators are drawn on the positive side of a random direction, which
/// makes pointedness hold by construction; the constructor still verifies it.
pub fn random_pointed_cone<R: Rng>(rng: &mut R, n: usize, max_gens: usize, bound: i64) -> ConeGen {
    loop {
        let c = loop {
            let c = random_int_vector(rng, n, -3, 3);
            if !c.iter().all(Zero::is_zero) {
                break c;
            }
        };
        let count = rng.gen_range(1..=max_gens);
        let mut gens = Vec::with_capacity(count);
        while gens.len() < count {
            let g = random_int_vector(rng, n, -bound, bound);
            if dot(&c, &g) > Rat::zero() {
                gens.push(g);
            }
        }
        if let Ok(k) = ConeGen::new(n, gens) {
            if k.is_pointed() {
                return k;
            }
        }
    }
}

/// A polytope whose vertices are nonzero nonnegative combinations of the
/// generators of a pointed `k`, with coordinates in `[−bound, bound]`.
/// Weights are multiples of `1/weight_denom` up to 1.
pub fn random_polytope_in_cone<R: Rng>(
    rng: &mut R,
    k: &ConeGen,
    max_vertices: usize,
    bound: i64,
    weight_denom: i64,
) -> Polytope {
    let gens = k.generators();
    let count = rng.gen_range(1..=max_vertices);
    let limit = int(bound);
    let mut vertices = Vec::with_capacity(count);
    while vertices.len() < count {
        let mut v = vec![Rat::zero(); k.dim()];
        for g in gens {
            let w = rat(rng.gen_range(0..=weight_denom), weight_denom);
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi += &w * gi;
            }
        }
        if v.iter().all(Zero::is_zero) || v.iter().any(|c| *c > limit || -c > limit) {
            continue;
        }
        vertices.push(v);
    }
    Polytope::new(vertices).expect("nonempty vertex list of consistent dimension")
}

/// A union of `1..=max_pieces` pieces. Each ray is a generator of `k`
/// with probability `ray_in_k`, otherwise a random integer vector, so both
/// bounded and unbounded ranges occur.
pub fn random_union<R: Rng>(
    rng: &mut R,
    k: &ConeGen,
    max_pieces: usize,
    max_vertices: usize,
    max_rays: usize,
    ray_in_k: f64,
) -> VPolyhedralUnion {
    let n = k.dim();
    let pieces = (0..rng.gen_range(1..=max_pieces))
        .map(|_| {
            let vertices = (0..rng.gen_range(1..=max_vertices))
                .map(|_| random_vector(rng, n, -10, 10, 3))
                .collect();
            let mut rays = Vec::new();
            for _ in 0..rng.gen_range(0..=max_rays) {
                let r = if rng.gen_bool(ray_in_k) {
                    k.generators().choose(rng).expect("nonempty").clone()
                } else {
                    random_int_vector(rng, n, -5, 5)
                };
                if !r.iter().all(Zero::is_zero) {
                    rays.push(r);
                }
            }
            Piece { vertices, rays }
        })
        .collect();
    VPolyhedralUnion::new(pieces).expect("valid pieces")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Plain,
    Scaled,
    Efficiency,
}

#[derive(Debug, Clone)]
pub struct EvpConfig {
    pub max_points: usize,
    pub max_values: usize,
    pub max_dim: usize,
    pub mode: ModeKind,
}

impl Default for EvpConfig {
    fn default() -> Self {
        EvpConfig { max_points: 12, max_values: 4, max_dim: 3, mode: ModeKind::Plain }
    }
}

/// Points of `Z²` in a small box with the L1 metric.
pub fn random_metric<R: Rng>(rng: &mut R, points: usize) -> FiniteMetricSpace {
    let mut cells: Vec<(i64, i64)> = (0..5).flat_map(|a| (0..5).map(move |b| (a, b))).collect();
    cells.shuffle(rng);
    let coords: Vec<Vector> = cells[..points].iter().map(|&(a, b)| vec![int(a), int(b)]).collect();
    let labels = (0..points).map(|i| format!("p{i}")).collect();
    let dist = coords
        .iter()
        .map(|u| coords.iter().map(|v| l1_norm(&sub(u, v))).collect())
        .collect();
    FiniteMetricSpace::new(labels, dist).expect("L1 distances form a metric")
}

/// A random EVP instance. `ε` starts at 1/2 and doubles until condition
/// (ii) holds, giving up after a fixed number of rounds.
pub fn random_evp<R: Rng>(rng: &mut R, cfg: &EvpConfig) -> Option<EvpProblem> {
    let n = rng.gen_range(1..=cfg.max_dim);
    let points = rng.gen_range(cfg.max_points.div_ceil(2)..=cfg.max_points);
    let space = random_metric(rng, points);
    let k = if rng.gen_bool(0.5) {
        ConeGen::orthant(n)
    } else {
        random_pointed_cone(rng, n, 4, 3)
    };
    let h = random_polytope_in_cone(rng, &k, 3, 3, 4);
    let entries: HashMap<String, Vec<Vector>> = space
        .labels()
        .iter()
        .map(|l| {
            let count = rng.gen_range(1..=cfg.max_values);
            (l.clone(), (0..count).map(|_| random_vector(rng, n, -12, 12, 2)).collect())
        })
        .collect();
    let map = SetValuedMapTable::new(&space, entries, n).ok()?;
    let x0 = space.labels().choose(rng).expect("nonempty").clone();

    let scale_pick = [rat(1, 8), rat(1, 4), rat(1, 2), Rat::one()];
    let factor = scale_pick.choose(rng).expect("nonempty").clone();
    let feasible: Option<Vec<String>> = match cfg.mode {
        ModeKind::Efficiency => Some(
            space
                .labels()
                .iter()
                .filter(|l| **l == x0 || rng.gen_bool(0.75))
                .cloned()
                .collect(),
        ),
        _ => None,
    };

    let mut epsilon = rat(1, 2);
    for _ in 0..16 {
        let mode = match cfg.mode {
            ModeKind::Plain => Mode::Plain,
            // λ chosen so the scale ε/λ equals `factor`
            ModeKind::Scaled => Mode::Scaled { epsilon: epsilon.clone(), lambda: &epsilon / &factor },
            ModeKind::Efficiency => Mode::Efficiency { gamma: factor.clone() },
        };
        let mut p = EvpProblem::new(space.clone(), map.clone(), k.clone(), h.clone(), &x0, epsilon.clone(), mode).ok()?;
        if let Some(f) = &feasible {
            p = p.with_feasible_set(f).ok()?;
        }
        if p.condition_ii_witness().ok()?.is_some() {
            return Some(p);
        }
        epsilon *= int(2);
    }
    None
}
