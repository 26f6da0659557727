//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or overruns its time budget.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use evp_cli::problem::problem_json;
use evp_core::boundedness::{classify, find_kstar, kstar_epsilon_bound, Candidate, HLower};
use evp_core::evp::{tiny3, EvpProblem, Mode, PointId};
use evp_core::geometry::{cone_contains, union_disjoint_from, ConeGen, Piece, Polytope, VPolyhedralUnion};
use evp_core::lp::Backend;
use evp_core::random::{
    random_evp, random_pointed_cone, random_polytope_in_cone, random_rational, random_union, random_vector,
    seeded, EvpConfig, ModeKind,
};
use evp_core::rational::{add, int, ivec, rat, scale, sub, to_f64, Rat};
use evp_core::scalarization::{ExtendedReal, SeparationFunctional};
use evp_core::EvpCertificate;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn two_vertex_h() -> SeparationFunctional {
    let h = Polytope::new(vec![ivec(&[1, 1]), vec![rat(1, 2), rat(1, 2)]]).unwrap();
    SeparationFunctional::new(h, ConeGen::orthant(2)).unwrap()
}

fn finite(v: ExtendedReal) -> Option<Rat> {
    v.finite().cloned()
}

fn criterion_1() -> Check {
    let exact = two_vertex_h();
    let float = two_vertex_h().with_backend(Backend::float());
    for (y, want) in [(ivec(&[1, 1]), int(1)), (ivec(&[-1, -1]), int(-2)), (ivec(&[0, 0]), int(0))] {
        let got = exact.evaluate(&y).map_err(|e| e.to_string())?;
        ensure(got == ExtendedReal::Finite(want.clone()), || format!("exact φ{y:?} = {got}, want {want}"))?;
        let f = finite(float.evaluate(&y).map_err(|e| e.to_string())?).ok_or("float value infinite")?;
        ensure((to_f64(&f) - to_f64(&want)).abs() <= 1e-9, || format!("float φ{y:?} = {f}"))?;
    }
    let (y1, y2) = (ivec(&[1, 1]), ivec(&[-1, -1]));
    let sum = finite(exact.evaluate(&add(&y1, &y2)).unwrap()).unwrap();
    let parts = finite(exact.evaluate(&y1).unwrap()).unwrap() + finite(exact.evaluate(&y2).unwrap()).unwrap();
    ensure(sum == int(0) && parts == int(-1) && sum > parts, || format!("φ(y1+y2) = {sum}, φ(y1)+φ(y2) = {parts}"))?;
    Ok("φ(1,1)=1, φ(-1,-1)=-2, φ(0,0)=0 exact and float; mixed-sign gap 0 > -1".into())
}

fn random_functional(seed: u64) -> SeparationFunctional {
    let mut rng = seeded(seed);
    let n = 1 + (seed % 4) as usize;
    let k = random_pointed_cone(&mut rng, n, 6, 10);
    let h = random_polytope_in_cone(&mut rng, &k, 6, 10, 3);
    SeparationFunctional::new(h, k).expect("admissible by construction")
}

fn criterion_2() -> Check {
    let mut checked = 0usize;
    for seed in 0..500u64 {
        let phi = random_functional(1_000 + seed);
        let n = phi.dim();
        let mut rng = seeded(seed);
        let eval = |y: &[Rat]| phi.evaluate(y).map_err(|e| format!("instance {seed}: {e}"));
        let zero = vec![Rat::from_integer(0.into()); n];
        ensure(eval(&zero)? == ExtendedReal::Finite(zero[0].clone()), || format!("instance {seed}: φ(0) ≠ 0"))?;

        let y1 = random_vector(&mut rng, n, -10, 10, 4);
        let y2 = random_vector(&mut rng, n, -10, 10, 4);
        let (v1, v2) = (eval(&y1)?, eval(&y2)?);

        let alpha = random_rational(&mut rng, 0, 5, 3);
        let scaled = eval(&scale(&alpha, &y1))?;
        let expected = match &v1 {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(&alpha * v),
            ExtendedReal::PlusInfinity if alpha > zero[0] => ExtendedReal::PlusInfinity,
            ExtendedReal::PlusInfinity => ExtendedReal::Finite(zero[0].clone()),
        };
        ensure(scaled == expected, || format!("instance {seed}: homogeneity fails at α = {alpha}"))?;

        if let (Some(a), Some(b)) = (v1.finite(), v2.finite()) {
            let same_sign = (*a < zero[0] && *b < zero[0]) || (*a > zero[0] && *b > zero[0]);
            if same_sign {
                let s = eval(&add(&y1, &y2))?;
                ensure(s <= ExtendedReal::Finite(a + b), || format!("instance {seed}: subadditivity fails"))?;
            }
        }

        let mut y3 = y1.clone();
        for g in phi.k().generators() {
            y3 = add(&y3, &scale(&random_rational(&mut rng, 0, 2, 2), g));
        }
        debug_assert!(cone_contains(phi.k(), &sub(&y3, &y1), Backend::Exact).unwrap());
        ensure(v1 <= eval(&y3)?, || format!("instance {seed}: monotonicity fails"))?;

        for (y, v) in [(&y1, &v1), (&y2, &v2)] {
            if v.is_finite() {
                ensure(phi.attainment_check(y).map_err(|e| e.to_string())?, || format!("instance {seed}: not attained"))?;
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} instances, zero violations"))
}

fn criterion_3() -> Check {
    let mut queries = 0usize;
    let mut seed = 0u64;
    let mut worst = 0f64;
    while queries < 500 {
        let phi = random_functional(5_000 + seed);
        let y = random_vector(&mut seeded(seed), phi.dim(), -10, 10, 4);
        seed += 1;
        let Some(v) = finite(phi.evaluate(&y).map_err(|e| e.to_string())?) else { continue };
        let b = phi.evaluate_bisection(&y).map_err(|e| e.to_string())?;
        let b = b.value.finite().ok_or_else(|| format!("query {queries}: bisection infinite, φ = {v}"))?.clone();
        let gap = (to_f64(&b) - to_f64(&v)).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-6, || format!("query {queries}: φ = {v}, bisection = {}", to_f64(&b)))?;
        queries += 1;
    }
    Ok(format!("{queries} finite queries, max gap {worst:.2e}"))
}

fn criterion_4() -> Check {
    let e = Backend::Exact;
    let k1 = ConeGen::new(2, vec![ivec(&[1, 0])]).unwrap();
    let segment = VPolyhedralUnion::new(vec![Piece { vertices: vec![ivec(&[0, -1]), ivec(&[0, 1])], rays: vec![ivec(&[1, 0])] }]).unwrap();
    let origin = ivec(&[0, 0]);
    let cand = [Candidate { y0: origin.clone(), epsilon: int(1) }];
    let r = classify(&segment, &k1, &Polytope::new(vec![ivec(&[1, 0])]).unwrap(), &cand, e).map_err(|e| e.to_string())?;
    ensure(r.quasi_k_lower && r.k_lower.is_none(), || format!("segment + ray: {r:?}"))?;

    let k = ConeGen::orthant(2);
    let diag = VPolyhedralUnion::new(vec![
        Piece { vertices: vec![origin.clone()], rays: vec![ivec(&[1, 1])] },
        Piece { vertices: vec![origin.clone()], rays: vec![ivec(&[1, -1])] },
    ])
    .unwrap();
    let h = Polytope::new(vec![ivec(&[1, 0]), ivec(&[0, 1])]).unwrap();
    let r = classify(&diag, &k, &h, &cand, e).map_err(|e| e.to_string())?;
    let ks = r.kstar.clone().ok_or("diagonal rays: no k*")?;
    ensure(!r.quasi_k_lower && ks[0] > int(0) && ks[0] == ks[1], || format!("diagonal rays: {r:?}"))?;

    let axes = VPolyhedralUnion::new(
        [[1, 0], [-1, 0], [0, 1], [0, -1]]
            .iter()
            .map(|d| Piece { vertices: vec![origin.clone()], rays: vec![ivec(d)] })
            .collect(),
    )
    .unwrap();
    let h = Polytope::new(vec![ivec(&[1, 1]), ivec(&[2, 1])]).unwrap();
    let r = classify(&axes, &k, &h, &cand, e).map_err(|e| e.to_string())?;
    ensure(r.kstar.is_none(), || "axis rays: unexpected k*".into())?;
    match &r.h_lower {
        HLower::Witness(c) if c.y0 == origin && c.epsilon == int(1) => {}
        other => return Err(format!("axis rays: H-lower {other:?}")),
    }
    ensure(union_disjoint_from(&axes, &origin, &int(1), &h, &k, e).unwrap(), || "witness does not verify".into())?;
    Ok(format!("segment+ray quasi ∧ ¬K-lower; diagonal rays k* = ({}, {}); axis rays no k*, witness ((0,0),1)", ks[0], ks[1]))
}

fn criterion_5() -> Check {
    let mut with_kstar = 0;
    for seed in 0..200u64 {
        let mut rng = seeded(20_000 + seed);
        let n = 1 + (seed % 3) as usize;
        let k = if seed % 2 == 0 { ConeGen::orthant(n) } else { random_pointed_cone(&mut rng, n, 4, 5) };
        let h = random_polytope_in_cone(&mut rng, &k, 4, 6, 2);
        let m = random_union(&mut rng, &k, 3, 3, 2, 0.6);
        let origin = vec![int(0); n];
        let r = classify(&m, &k, &h, &[Candidate { y0: origin, epsilon: int(1) }], Backend::Exact)
            .map_err(|e| e.to_string())?;
        ensure(r.k_lower.is_none() || r.quasi_k_lower, || format!("instance {seed}: K-lower without quasi"))?;
        ensure(!r.quasi_k_lower || r.kstar.is_some(), || format!("instance {seed}: quasi without k*"))?;
        ensure(r.kstar.is_none() || r.h_lower.is_witness(), || format!("instance {seed}: k* without H-lower"))?;
        if let Some(ks) = find_kstar(&m, &k, Some(&h), Backend::Exact).map_err(|e| e.to_string())? {
            with_kstar += 1;
            for _ in 0..2 {
                let y = random_vector(&mut rng, n, -10, 10, 2);
                let eps = kstar_epsilon_bound(&m, &ks, &y);
                ensure(union_disjoint_from(&m, &y, &eps, &h, &k, Backend::Exact).unwrap(), || {
                    format!("instance {seed}: explicit ε = {eps} does not separate at {y:?}")
                })?;
            }
        }
    }
    Ok(format!("200 instances, ladder respected; {with_kstar} with k*, explicit ε bound separates"))
}

fn dominance_table(p: &EvpProblem) -> Result<Vec<Vec<bool>>, String> {
    let n = p.space().len();
    (0..n)
        .map(|i| (0..n).map(|j| p.dominates(PointId(i), PointId(j)).map_err(|e| e.to_string())).collect())
        .collect()
}

fn criterion_6() -> Check {
    let mut built = 0;
    let mut seed = 0u64;
    let mut triples = 0usize;
    while built < 100 {
        let mode = [ModeKind::Plain, ModeKind::Scaled, ModeKind::Efficiency][(seed % 3) as usize];
        let cfg = EvpConfig { max_points: 8, max_values: 4, max_dim: 3, mode };
        let p = random_evp(&mut seeded(30_000 + seed), &cfg);
        seed += 1;
        let Some(p) = p else { continue };
        built += 1;
        let t = dominance_table(&p)?;
        let n = t.len();
        for i in 0..n {
            ensure(t[i][i], || format!("problem {seed}: not reflexive at {i}"))?;
            for j in 0..n {
                for k in 0..n {
                    triples += 1;
                    ensure(!(t[i][j] && t[j][k]) || t[i][k], || format!("problem {seed}: {i} ⪯ {j} ⪯ {k} but not {i} ⪯ {k}"))?;
                }
            }
        }
    }
    Ok(format!("{built} problems, {triples} triples, reflexive and transitive"))
}

struct Solved {
    problem: EvpProblem,
    cert: EvpCertificate,
    minimal: Vec<PointId>,
}

fn criterion_7_instances() -> Vec<EvpProblem> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < 100 {
        let mode = [ModeKind::Plain, ModeKind::Scaled, ModeKind::Efficiency][(seed % 3) as usize];
        let cfg = EvpConfig { max_points: 12, max_values: 4, max_dim: 3, mode };
        if let Some(p) = random_evp(&mut seeded(40_000 + seed), &cfg) {
            out.push(p);
        }
        seed += 1;
    }
    out
}

fn criterion_7(instances: &[EvpProblem], solved: &mut Vec<Solved>) -> Check {
    let mut moved = 0;
    let mut scaled = 0;
    for (idx, p) in instances.iter().enumerate() {
        let t = dominance_table(p)?;
        let feasible: Vec<PointId> = p.feasible_points().collect();
        let minimal: Vec<PointId> = feasible
            .iter()
            .copied()
            .filter(|&x| x == p.x0() || t[x.0][p.x0().0])
            .filter(|&x| feasible.iter().all(|&z| z == x || !t[z.0][x.0]))
            .collect();
        let cert = p.solve().map_err(|e| format!("problem {idx}: {e}"))?;
        let xbar = p.point(&cert.xbar).unwrap();
        ensure(minimal.contains(&xbar), || format!("problem {idx}: x̄ = {} not minimal", cert.xbar))?;
        let report = p.verify_certificate(&cert).map_err(|e| e.to_string())?;
        ensure(report.a && report.b, || format!("problem {idx}: {:?}", report.failures))?;
        if let Mode::Scaled { epsilon, .. } = p.mode() {
            // the distance bound is guaranteed when condition (ii) uses the same ε
            if epsilon == p.epsilon() {
                scaled += 1;
                ensure(report.c == Some(true), || format!("problem {idx}: d(x0, x̄) exceeds λ"))?;
            }
        }
        if cert.chain.len() > 1 {
            moved += 1;
        }
        solved.push(Solved { problem: p.clone(), cert, minimal });
    }
    Ok(format!("{} problems, x̄ minimal and (a),(b) verified; {scaled} scaled with (c); {moved} needed a move", instances.len()))
}

fn criterion_8(solved: &[Solved]) -> Check {
    let mut steps = 0;
    for (idx, s) in solved.iter().enumerate() {
        let p = &s.problem;
        let ids: Vec<PointId> = s.cert.chain.iter().map(|l| p.point(l).unwrap()).collect();
        for w in ids.windows(2) {
            let a = finite(p.inf_xi(w[0], &s.cert.y0).unwrap()).ok_or("infinite value on chain")?;
            let b = finite(p.inf_xi(w[1], &s.cert.y0).unwrap()).ok_or("infinite value on chain")?;
            let need = p.scale() * p.space().dist(w[0], w[1]);
            ensure(&a - &b >= need, || format!("problem {idx}: {a} - {b} < {need}"))?;
            steps += 1;
        }
    }
    Ok(format!("{steps} chain steps over {} chains, zero violations", solved.len()))
}

fn evp_bin() -> &'static str {
    env!("CARGO_BIN_EXE_evp")
}

fn run_evp(args: &[&str]) -> Result<i32, String> {
    let out = Command::new(evp_bin()).args(args).env_remove("EVP_BACKEND").output().map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| "terminated by signal".into())
}

fn problems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn criterion_9() -> Check {
    let p = tiny3(int(5), Mode::Plain);
    let cert = p.solve().map_err(|e| e.to_string())?;
    ensure(cert.xbar == "c", || format!("x̄ = {}", cert.xbar))?;
    ensure(p.verify_certificate(&cert).unwrap().passed(), || "certificate fails".into())?;
    let tight = problems_dir().join("tiny3_tight.json");
    let code = run_evp(&["solve", &tight.to_string_lossy()])?;
    ensure(code == 4, || format!("ε = 1 exits {code}"))?;
    let a = p.point("a").unwrap();
    ensure(p.ae_efficient(a, &int(5)).unwrap() == Some(ivec(&[4, 4])), || "ae_efficient(a, 5) has no witness".into())?;
    ensure(p.ae_efficient(a, &int(3)).unwrap().is_none(), || "ae_efficient(a, 3) has a witness".into())?;
    Ok("x̄ = c verified; ε = 1 exits 4; ae_efficient(a,5) = (4,4), ae_efficient(a,3) = none".into())
}

fn criterion_10(solved: &[Solved]) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut forged = 0;
    for (idx, s) in solved.iter().enumerate() {
        let file = dir.path().join(format!("p{idx}.json"));
        let cert = dir.path().join(format!("p{idx}.cert.json"));
        std::fs::write(&file, problem_json(&s.problem).to_string()).map_err(|e| e.to_string())?;
        let (f, c) = (file.to_string_lossy().into_owned(), cert.to_string_lossy().into_owned());
        let code = run_evp(&["solve", &f, "--certificate", &c])?;
        ensure(code == 0, || format!("problem {idx}: solve exits {code}"))?;
        let code = run_evp(&["verify", &f, &c])?;
        ensure(code == 0, || format!("problem {idx}: verify exits {code}"))?;

        // replace x̄ by a feasible point outside the minimal set
        let p = &s.problem;
        if let Some(bad) = p.feasible_points().find(|x| !s.minimal.contains(x)) {
            let text = std::fs::read_to_string(&cert).unwrap();
            let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
            let label = p.label(bad).to_string();
            doc["xbar"] = label.clone().into();
            doc["chain"] = serde_json::json!([p.label(p.x0()), label]);
            let forged_path = dir.path().join(format!("p{idx}.forged.json"));
            std::fs::write(&forged_path, doc.to_string()).unwrap();
            let code = run_evp(&["verify", &f, &forged_path.to_string_lossy()])?;
            ensure(code == 1, || format!("problem {idx}: forged certificate exits {code}"))?;
            forged += 1;
        }
    }
    ensure(forged > 0, || "no instance admitted a forgery".into())?;
    Ok(format!("{} solve→verify round trips exit 0; {forged} forged certificates exit 1", solved.len()))
}

fn report(id: usize, budget: Option<Duration>, name: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let over = budget.is_some_and(|b| elapsed > b);
    let limit = budget.map_or(String::new(), |b| format!(" / {}s", b.as_secs_f64()));
    match (&result, over) {
        (Ok(msg), false) => {
            println!("criterion {id:>2} PASS  {name}: {msg} ({:.2}s{limit})", elapsed.as_secs_f64());
            true
        }
        (Ok(msg), true) => {
            println!("criterion {id:>2} FAIL  {name}: {msg}, but took {:.2}s{limit}", elapsed.as_secs_f64());
            false
        }
        (Err(msg), _) => {
            println!("criterion {id:>2} FAIL  {name}: {msg} ({:.2}s{limit})", elapsed.as_secs_f64());
            false
        }
    }
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let s = Duration::from_secs;
    let mut ok = true;
    ok &= report(1, Some(s(1)), "separation functional on the two-vertex example", criterion_1);
    ok &= report(2, Some(s(60)), "functional properties on 500 random instances", criterion_2);
    ok &= report(3, Some(s(60)), "LP value vs bisection oracle", criterion_3);
    ok &= report(4, Some(s(5)), "boundedness worked examples", criterion_4);
    ok &= report(5, Some(s(60)), "boundedness ladder on 200 random instances", criterion_5);
    ok &= report(6, Some(s(60)), "pre-order laws", criterion_6);

    let instances = criterion_7_instances();
    let mut solved = Vec::new();
    ok &= report(7, Some(s(300)), "solver vs brute-force minimal set", || criterion_7(&instances, &mut solved));
    ok &= report(8, None, "descent inequality along solver chains", || criterion_8(&solved));
    ok &= report(9, Some(s(1)), "three-point instance end to end", criterion_9);
    ok &= report(10, None, "CLI round trip and forged certificates", || criterion_10(&solved));
    if !ok {
        std::process::exit(1);
    }
}
