use evp_core::lp::{self, Backend, LinearProgram, LpStatus};
use evp_core::random::{random_rational, seeded};
use evp_core::rational::{dot, int, Rat, Vector};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

/// Solves `A_S·x = b` for the columns `cols`; `None` unless the columns are
/// independent and the system is consistent.
fn solve_restricted(rows: &[Vector], rhs: &[Rat], cols: &[usize]) -> Option<Vec<Rat>> {
    let m = rows.len();
    let k = cols.len();
    let mut a: Vec<Vec<Rat>> = (0..m)
        .map(|i| {
            let mut r: Vec<Rat> = cols.iter().map(|&j| rows[i][j].clone()).collect();
            r.push(rhs[i].clone());
            r
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..k {
        let p = (pivot_row..m).find(|&r| !a[r][c].is_zero())?;
        a.swap(pivot_row, p);
        let inv = Rat::one() / &a[pivot_row][c];
        for v in a[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m {
            if r != pivot_row && !a[r][c].is_zero() {
                let factor = a[r][c].clone();
                for j in 0..=k {
                    let delta = &factor * &a[pivot_row][j];
                    a[r][j] -= delta;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if a[pivot_row..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    Some(pivots.iter().map(|&r| a[r][k].clone()).collect())
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|mask| mask.count_ones() as usize <= max)
        .map(|mask| (0..n).filter(|j| mask & (1 << j) != 0).collect())
        .collect()
}

/// Minimum over all basic feasible solutions, or `None` if there are none.
fn vertex_enumeration(lp: &LinearProgram, c: &[Rat]) -> Option<Rat> {
    let n = lp.num_vars();
    let mut best: Option<Rat> = None;
    for cols in subsets(n, lp.rows().len()) {
        let Some(xs) = solve_restricted(lp.rows(), lp.rhs(), &cols) else { continue };
        if xs.iter().any(Signed::is_negative) {
            continue;
        }
        let mut x = vec![Rat::zero(); n];
        for (&j, v) in cols.iter().zip(xs) {
            x[j] = v;
        }
        let value = dot(c, &x);
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value);
        }
    }
    best
}

/// A bounded program: random equality rows plus `Σx ≤ 20`, with a slack.
fn bounded_lp(seed: u64) -> (LinearProgram, Vector) {
    let mut rng = seeded(seed);
    let n = 1 + (seed % 4) as usize;
    let m = (seed / 4 % 3) as usize;
    let mut lp = LinearProgram::new(n);
    for _ in 0..m {
        let row: Vector = (0..n).map(|_| random_rational(&mut rng, -4, 4, 2)).collect();
        lp.add_eq(row, random_rational(&mut rng, -6, 6, 1));
    }
    lp.add_le(vec![int(1); n], int(20));
    let mut c: Vector = (0..n).map(|_| random_rational(&mut rng, -5, 5, 3)).collect();
    c.push(Rat::zero());
    (lp, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let (lp, c) = bounded_lp(seed);
        let lp = lp.minimize(c.clone());
        let result = lp::solve(&lp, Backend::Exact).unwrap();
        match (result.status, vertex_enumeration(&lp, &c)) {
            (LpStatus::Feasible { value, witness }, Some(best)) => {
                prop_assert_eq!(&value, &best);
                prop_assert!(lp.is_satisfied_by(&witness, &Rat::zero()));
                prop_assert_eq!(dot(&c, &witness), value);
            }
            (LpStatus::Infeasible, None) => {}
            (status, oracle) => prop_assert!(false, "simplex {:?} vs enumeration {:?}", status, oracle),
        }
    }

    #[test]
    fn backends_agree_unless_marginal(seed in any::<u64>()) {
        let (lp, c) = bounded_lp(seed);
        let lp = lp.minimize(c);
        let exact = lp::solve(&lp, Backend::Exact).unwrap();
        let float = lp::solve(&lp, Backend::float()).unwrap();
        if !float.marginal {
            prop_assert_eq!(exact.is_feasible(), float.is_feasible());
            if let (Some(a), Some(b)) = (exact.value(), float.value()) {
                let (a, b) = (evp_core::rational::to_f64(a), evp_core::rational::to_f64(b));
                prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn witness_resolves_as_feasible(seed in any::<u64>()) {
        let (lp, _) = bounded_lp(seed);
        let result = lp::solve(&lp, Backend::Exact).unwrap();
        if let Some(w) = result.witness() {
            let mut pinned = LinearProgram::new(lp.num_vars());
            for (row, b) in lp.rows().iter().zip(lp.rhs()) {
                pinned.add_eq(row.clone(), b.clone());
            }
            for (j, v) in w.iter().enumerate() {
                let mut unit = vec![Rat::zero(); lp.num_vars()];
                unit[j] = Rat::one();
                pinned.add_eq(unit, v.clone());
            }
            prop_assert!(lp::is_feasible(&pinned, Backend::Exact).unwrap());
        }
    }
}

#[test]
fn float_witnesses_within_tolerance() {
    for seed in 0..100 {
        let (lp, c) = bounded_lp(seed);
        let lp = lp.minimize(c);
        let result = lp::solve(&lp, Backend::float()).unwrap();
        if let Some(w) = result.witness() {
            let tol = evp_core::rational::from_f64(1e-6).unwrap();
            assert!(lp.is_satisfied_by(w, &tol), "seed {seed}");
        }
    }
}
