use evp_core::evp::{EvpProblem, PointId};
use evp_core::random::{random_evp, seeded, EvpConfig, ModeKind};
use evp_core::scalarization::ExtendedReal;
use evp_core::Rat;
use proptest::prelude::*;

/// Pairwise dominance table, computed once per instance.
fn dominance_table(p: &EvpProblem) -> Vec<Vec<bool>> {
    let n = p.space().len();
    (0..n)
        .map(|i| (0..n).map(|j| p.dominates(PointId(i), PointId(j)).unwrap()).collect())
        .collect()
}

/// `{x ∈ S(x₀) : S(x) = {x}}` by enumeration over the table.
fn brute_force_minimal(p: &EvpProblem, table: &[Vec<bool>]) -> Vec<PointId> {
    let feasible: Vec<PointId> = p.feasible_points().collect();
    feasible
        .iter()
        .copied()
        .filter(|&x| table[x.0][p.x0().0] || x == p.x0())
        .filter(|&x| feasible.iter().all(|&z| z == x || !table[z.0][x.0]))
        .collect()
}

fn instance(seed: u64, mode: ModeKind) -> Option<EvpProblem> {
    let cfg = EvpConfig { max_points: 8, max_values: 3, max_dim: 3, mode };
    random_evp(&mut seeded(seed), &cfg)
}

fn mode_from(i: u8) -> ModeKind {
    match i % 3 {
        0 => ModeKind::Plain,
        1 => ModeKind::Scaled,
        _ => ModeKind::Efficiency,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dominance_is_a_preorder(seed in any::<u64>(), m in 0u8..3) {
        let Some(p) = instance(seed, mode_from(m)) else { return Ok(()) };
        let t = dominance_table(&p);
        let n = t.len();
        for i in 0..n {
            prop_assert!(t[i][i]);
            for j in 0..n {
                for k in 0..n {
                    if t[i][j] && t[j][k] {
                        prop_assert!(t[i][k], "{} ⪯ {} ⪯ {} but not {} ⪯ {}", i, j, k, i, k);
                    }
                }
            }
        }
    }

    #[test]
    fn no_cycles_inside_the_initial_section(seed in any::<u64>(), m in 0u8..3) {
        let Some(p) = instance(seed, mode_from(m)) else { return Ok(()) };
        let t = dominance_table(&p);
        let section = p.lower_section(p.x0()).unwrap();
        for &a in &section {
            for &b in &section {
                if a != b {
                    prop_assert!(!(t[a.0][b.0] && t[b.0][a.0]));
                }
            }
        }
    }

    #[test]
    fn solver_lands_in_the_minimal_set(seed in any::<u64>(), m in 0u8..3) {
        let Some(p) = instance(seed, mode_from(m)) else { return Ok(()) };
        let t = dominance_table(&p);
        let cert = p.solve().unwrap();
        let xbar = p.point(&cert.xbar).unwrap();
        prop_assert!(brute_force_minimal(&p, &t).contains(&xbar));
        // (a) and (b) straight from the table
        prop_assert!(t[xbar.0][p.x0().0]);
        for x in p.feasible_points() {
            prop_assert!(x == xbar || !t[x.0][xbar.0]);
        }
        let report = p.verify_certificate(&cert).unwrap();
        prop_assert!(report.a && report.b && report.chain, "{:?}", report);
        if m % 3 == 1 {
            prop_assert_eq!(report.c, Some(true));
        }
    }

    #[test]
    fn descent_inequality_along_chains(seed in any::<u64>(), m in 0u8..3) {
        let Some(p) = instance(seed, mode_from(m)) else { return Ok(()) };
        let cert = p.solve().unwrap();
        for step in p.descent_steps(&cert).unwrap() {
            prop_assert!(step.holds, "{:?}", step);
        }
    }

    #[test]
    fn descent_inequality_off_the_chain(seed in any::<u64>()) {
        // x ∈ S(x₀) \ {x₀} with finite inf ξ∘f(x), x' ∈ S(x) \ {x}
        let Some(p) = instance(seed, ModeKind::Plain) else { return Ok(()) };
        let y0 = p.condition_ii_witness().unwrap().unwrap();
        let scale = p.scale();
        for x in p.lower_section(p.x0()).unwrap() {
            if x == p.x0() {
                continue;
            }
            let ExtendedReal::Finite(vx) = p.inf_xi(x, &y0).unwrap() else { continue };
            for xp in p.lower_section(x).unwrap() {
                if xp == x {
                    continue;
                }
                let vxp = p.inf_xi(xp, &y0).unwrap();
                let bound = ExtendedReal::Finite(&vx - &scale * p.space().dist(x, xp));
                prop_assert!(vxp <= bound);
            }
        }
    }

    #[test]
    fn initial_section_values_are_bounded(seed in any::<u64>(), m in 0u8..3) {
        let Some(p) = instance(seed, mode_from(m)) else { return Ok(()) };
        let y0 = p.condition_ii_witness().unwrap().unwrap();
        let mut low = ExtendedReal::PlusInfinity;
        for x in p.lower_section(p.x0()).unwrap() {
            low = low.min(p.inf_xi(x, &y0).unwrap());
        }
        let low = low.finite().cloned().expect("f(x0) contains y0");
        prop_assert!(low <= Rat::from_integer(0.into()));
        prop_assert!(low >= -p.epsilon().clone());
    }

    #[test]
    fn efficiency_link(seed in any::<u64>()) {
        let Some(p) = instance(seed, ModeKind::Efficiency) else { return Ok(()) };
        prop_assert!(p.ae_efficient(p.x0(), p.epsilon()).unwrap().is_some());
        let cert = p.solve().unwrap();
        let report = p.verify_certificate(&cert).unwrap();
        prop_assert!(report.a && report.b);
        prop_assert_eq!(report.c, Some(true));
        prop_assert_eq!(report.gap, Some(true));
    }
}

/// The argmin over `S(x₀)` is already minimal: anything below it would lie
/// in `S(x₀)` with a strictly smaller value. So every chain has at most one
/// move, and it has one exactly when `S(x₀) ≠ {x₀}`.
#[test]
fn argmin_descent_takes_at_most_one_move() {
    let mut built = 0;
    let mut moved = 0;
    for seed in 0..40 {
        let Some(p) = instance(seed, ModeKind::Scaled) else { continue };
        built += 1;
        let cert = p.solve().unwrap();
        let section = p.lower_section(p.x0()).unwrap();
        assert!(cert.chain.len() <= 2, "seed {seed}: {:?}", cert.chain);
        assert_eq!(cert.chain.len() == 2, section.len() > 1, "seed {seed}");
        if cert.chain.len() == 2 {
            moved += 1;
        }
    }
    assert!(built >= 30, "only {built} instances satisfied condition (ii)");
    assert!(moved >= 10, "only {moved} instances needed a move");
}
