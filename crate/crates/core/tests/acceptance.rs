//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;
use tlfacp::descent::{descent_solve, descent_solve_tree, Certificate, DescentConfig, DescentStatus, Method, TREE_OPS_FACTOR};
use tlfacp::feasibility::{solve_feasibility, FeasibilityStatus};
use tlfacp::generate::{gen_random, gen_setcover, gen_setcover_nondegenerate, min_cover_size, RandomParams};
use tlfacp::instance::{degeneracy_check_bruteforce, homogenize, validate, Degeneracy, DegeneracyCap};
use tlfacp::io::vector_from_json;
use tlfacp::mincut::{find_direction_mincut, MincutMode, MincutOutcome, DEFAULT_SUBGRAPH_CAP};
use tlfacp::oracle::{
    enumerate_directions, global_opt_bruteforce, local_opt_check, transport_opt, GlobalOutcome, LocalVerdict,
    OracleLimits, TransportOutcome,
};
use tlfacp::solve::{solve, RunConfig, SolveStatus};
use tlfacp::tangent::{build_tangent, has_cycle, step_size};
use tlfacp::tree::{find_direction_tree, TreeOutcome};
use tlfacp::trop::{scale, trop_add, trop_mul, vec_join, vec_meet, Extent};
use tlfacp::{is_feasible, objective, ExtScalar, Instance, TropVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Duration, run: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = run();
    let took = start.elapsed();
    if took > limit {
        o.pass = false;
        o.detail.push_str(&format!("; over the {}s limit", limit.as_secs()));
    }
    o.detail.push_str(&format!(" [{:.2}s]", took.as_secs_f64()));
    o
}

fn random_ext(r: &mut impl Rng) -> ExtScalar<i64> {
    if r.gen_bool(0.15) {
        ExtScalar::NegInf
    } else {
        ExtScalar::Finite(r.gen_range(-1000..=1000))
    }
}

fn semiring_and_lconvexity() -> Outcome {
    let mut r = common::rng(1);
    let mul = |a: &ExtScalar<i64>, b: &ExtScalar<i64>| trop_mul(a, b).unwrap();
    let mut bad = 0;
    let laws = 10_000;
    for _ in 0..laws {
        let (a, b, c) = (random_ext(&mut r), random_ext(&mut r), random_ext(&mut r));
        let ok = trop_add(&a, &b) == trop_add(&b, &a)
            && trop_add(&trop_add(&a, &b), &c) == trop_add(&a, &trop_add(&b, &c))
            && trop_add(&a, &a) == a
            && mul(&a, &b) == mul(&b, &a)
            && mul(&mul(&a, &b), &c) == mul(&a, &mul(&b, &c))
            && mul(&a, &trop_add(&b, &c)) == trop_add(&mul(&a, &b), &mul(&a, &c))
            && mul(&a, &ExtScalar::zero()) == a
            && mul(&a, &ExtScalar::NegInf) == ExtScalar::NegInf
            && trop_add(&a, &ExtScalar::NegInf) == a;
        bad += usize::from(!ok);
    }

    let (mut shift_checks, mut sub_checks) = (0, 0);
    for seed in 0..1000u64 {
        let inst = common::random_instance(seed, 5, 0, 4, 5, false);
        let n = inst.n();
        let x = common::random_point(&mut r, n, -10, 10);
        let y = common::random_point(&mut r, n, -10, 10);
        let f = |z: &TropVector<i64>| objective(&inst, z).unwrap();
        let alpha = r.gen_range(-20..=20);
        let excess = inst.degree_plus() as i64 - inst.degree() as i64;
        bad += usize::from(f(&scale(&alpha, &x).unwrap()) != f(&x) + alpha * excess);
        shift_checks += 1;
        bad += usize::from(f(&x) + f(&y) < f(&vec_join(&x, &y).unwrap()) + f(&vec_meet(&x, &y).unwrap()));
        sub_checks += 1;
    }

    let mut cone_checks = 0;
    let mut seed = 0u64;
    while cone_checks < 1000 {
        seed += 1;
        let inst = common::random_instance(seed, 4, 4, 2, 3, false);
        let Some(x0) = common::full_support_point(&inst) else { continue };
        let pts = common::feasible_points(&inst, &[x0], 3, &mut r);
        for x in &pts {
            for y in &pts {
                let alpha = r.gen_range(-20..=20);
                let ok = is_feasible(&inst, &scale(&alpha, x).unwrap()).unwrap()
                    && is_feasible(&inst, &vec_join(x, y).unwrap()).unwrap();
                bad += usize::from(!ok);
                cone_checks += 1;
            }
        }
    }
    outcome(
        bad == 0,
        format!("{laws} law checks, {shift_checks} shift, {sub_checks} submodularity, {cone_checks} cone closure; {bad} failures"),
    )
}

/// Full-support feasibility by scanning `{-2nM, …, 0}ⁿ` on dense rows.
fn grid_feasible(inst: &Instance<i64>) -> bool {
    let n = inst.n();
    let lo = -2 * n as i64 * inst.max_abs_constraints().unwrap();
    let rows: Vec<(Vec<(usize, i64)>, Vec<(usize, i64)>)> = (0..inst.m())
        .map(|i| (inst.a_plus().row(i).to_vec(), inst.a_minus().row(i).to_vec()))
        .collect();
    let side = |terms: &[(usize, i64)], x: &[i64]| terms.iter().map(|(j, a)| a + x[*j]).max();
    let mut x = vec![lo; n];
    loop {
        if rows.iter().all(|(plus, minus)| side(minus, &x) <= side(plus, &x)) {
            return true;
        }
        let mut j = 0;
        while j < n && x[j] == 0 {
            x[j] = lo;
            j += 1;
        }
        if j == n {
            return false;
        }
        x[j] += 1;
    }
}

fn feasibility_grid() -> Outcome {
    let mut r = common::rng(2);
    let (mut feasible, mut bad) = (0, 0);
    let total = 600;
    for seed in 0..total {
        let params = RandomParams {
            n: r.gen_range(1..=4),
            m: r.gen_range(1..=4),
            p: 1,
            mu_max: 2,
            lo: -3,
            hi: 3,
            density: r.gen_range(0.4..0.9),
            seed,
            perturb: false,
        };
        let inst = gen_random::<i64>(&params).unwrap();
        let all: Vec<usize> = (0..inst.n()).collect();
        let res = solve_feasibility(&inst, &all).unwrap();
        let verdict = match &res.status {
            FeasibilityStatus::Feasible(x) => {
                bad += usize::from(!is_feasible(&inst, x).unwrap() || !x.is_all_finite());
                feasible += 1;
                true
            }
            FeasibilityStatus::InfeasibleForSupport { .. } => false,
            FeasibilityStatus::IterationLimit { .. } => {
                bad += 1;
                continue;
            }
        };
        bad += usize::from(verdict != grid_feasible(&inst));
    }
    outcome(bad == 0, format!("{total} instances ({feasible} feasible); {bad} disagreements"))
}

fn local_equivalence() -> Outcome {
    let mut r = common::rng(3);
    let (mut instances, mut points, mut found, mut bad) = (0, 0, 0, 0);
    let mut seed = 0u64;
    while instances < 300 && seed < 20_000 {
        seed += 1;
        let inst = common::random_instance(seed, 5, 5, 5, 3, false);
        if inst.degree() > 8 {
            continue;
        }
        let Some(x0) = common::full_support_point(&inst) else { continue };
        let pts = common::feasible_points(&inst, &[x0], 5, &mut r);
        if pts.len() < 5 {
            continue;
        }
        instances += 1;
        for x in &pts {
            points += 1;
            let verdict = local_opt_check(&inst, x, 20).unwrap();
            match find_direction_mincut(&inst, x, MincutMode::CertifyAll, DEFAULT_SUBGRAPH_CAP).unwrap() {
                MincutOutcome::Found { direction, .. } => {
                    found += 1;
                    let listed = enumerate_directions(&inst, x, 20).unwrap().contains(&direction.cols);
                    bad += usize::from(verdict == LocalVerdict::LocallyOptimal || !listed);
                }
                MincutOutcome::LocallyOptimal { .. } => bad += usize::from(verdict != LocalVerdict::LocallyOptimal),
                MincutOutcome::CapExceeded { .. } => bad += 1,
            }
        }
    }
    outcome(
        bad == 0 && instances >= 300,
        format!("{instances} instances, {points} points, {found} with a descent direction; {bad} disagreements"),
    )
}

/// Random single-component, non-degenerate instances with a full-support
/// feasible point.
fn nondegenerate_instances(count: usize) -> Vec<(Instance<i64>, TropVector<i64>)> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count && seed < 50_000 {
        seed += 1;
        let inst = common::random_instance(seed, 5, 4, 3, 3, true);
        if validate(&inst).unwrap().len() != 1 {
            continue;
        }
        if degeneracy_check_bruteforce(&inst, DegeneracyCap::default()).unwrap() != Degeneracy::NonDegenerate {
            continue;
        }
        if let Some(x0) = common::full_support_point(&inst) {
            out.push((inst, x0));
        }
    }
    out
}

fn tree_agreement(cases: &[(Instance<i64>, TropVector<i64>)]) -> Outcome {
    let (mut visited, mut cycles, mut bad) = (0, 0, 0);
    for (inst, x0) in cases {
        common::tree_walk(inst, x0, 10_000, |x, g| {
            visited += 1;
            if has_cycle(g) {
                cycles += 1;
                return;
            }
            let tree = !matches!(find_direction_tree(inst, x).unwrap(), TreeOutcome::Found { .. });
            let cut = matches!(
                find_direction_mincut(inst, x, MincutMode::CertifyAll, DEFAULT_SUBGRAPH_CAP).unwrap(),
                MincutOutcome::LocallyOptimal { .. }
            );
            let oracle = local_opt_check(inst, x, 20).unwrap() == LocalVerdict::LocallyOptimal;
            bad += usize::from(tree != cut || cut != oracle);
        });
    }
    outcome(
        bad == 0 && cycles == 0 && cases.len() >= 300,
        format!("{} instances, {visited} tree points; {cycles} cyclic digraphs, {bad} disagreements", cases.len()),
    )
}

fn complexity_bounds(cases: &[(Instance<i64>, TropVector<i64>)]) -> Outcome {
    let (mut runs, mut iterations, mut violations) = (0, 0u64, Vec::new());
    let mut worst_ratio: f64 = 0.0;
    let mut fixtures = vec![(common::fixture("i4.json"), TropVector::zeros(2))];
    fixtures.extend(cases.iter().cloned());
    for (inst, x0) in &fixtures {
        let cfg = DescentConfig { method: Method::Tree, ..Default::default() };
        let run = descent_solve_tree(inst, x0, cfg).unwrap();
        runs += 1;
        iterations += run.iterations;
        let (n, m, d) = (inst.n() as u64, inst.max_abs().unwrap() as u64, inst.degree());
        if run.iterations > (4 * n - 2) * m * d {
            violations.push(format!("{} iterations", run.iterations));
        }
        if matches!(run.status, DescentStatus::DegeneracyDetected | DescentStatus::IterationLimit) {
            violations.push(format!("run ended with {:?}", run.status));
        }
        let size = (inst.r_a() + inst.r_c()) as f64;
        for s in &run.trace {
            worst_ratio = worst_ratio.max(s.ops as f64 / size);
        }
        violations.extend(run.bound_violations);
    }
    for v in &violations {
        eprintln!("  violation: {v}");
    }
    let pass = violations.is_empty() && worst_ratio <= TREE_OPS_FACTOR as f64;
    outcome(
        pass,
        format!(
            "{runs} tree runs, {iterations} iterations, worst ops/(r_A+r_C) = {worst_ratio:.2} (limit {TREE_OPS_FACTOR}); {} violations",
            violations.len()
        ),
    )
}

fn transport_duality() -> Outcome {
    let (mut matched, mut unbounded, mut bad) = (0, 0, 0);
    let mut seed = 0u64;
    while matched < 200 && seed < 10_000 {
        seed += 1;
        let inst = common::random_instance(seed, 5, 0, 5, 4, false);
        if inst.degree() > 10 {
            continue;
        }
        let best = transport_opt(inst.c(), inst.mu_plus(), inst.mu_minus()).unwrap();
        let mut ok = true;
        for method in [Method::Auto, Method::Mincut] {
            let r = solve(&inst, &RunConfig { method, ..Default::default() }).unwrap();
            ok &= match (&best, &r.status) {
                (TransportOutcome::Optimal { value, .. }, SolveStatus::LocalOptimum) => {
                    r.value == Some(*value)
                        && local_opt_check(&inst, r.x.as_ref().unwrap(), 20).unwrap() == LocalVerdict::LocallyOptimal
                }
                (TransportOutcome::Infeasible, SolveStatus::Unbounded { .. }) => true,
                _ => false,
            };
        }
        match best {
            TransportOutcome::Optimal { .. } => matched += usize::from(ok),
            TransportOutcome::Infeasible => unbounded += usize::from(ok),
        }
        bad += usize::from(!ok);
    }
    outcome(
        bad == 0 && matched >= 200,
        format!("{matched} instances with equal optimum, {unbounded} unbounded with no transport plan; {bad} mismatches"),
    )
}

fn combinations(items: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items < k {
        return vec![];
    }
    let mut out = combinations(items - 1, k);
    for mut c in combinations(items - 1, k - 1) {
        c.push(items - 1);
        out.push(c);
    }
    out
}

fn families(ground: usize, max_subsets: usize) -> Vec<Vec<Vec<usize>>> {
    let subsets: Vec<Vec<usize>> =
        (1u32..1 << ground).map(|mask| (0..ground).filter(|e| mask >> e & 1 == 1).collect()).collect();
    (1..=max_subsets)
        .flat_map(|k| combinations(subsets.len(), k))
        .map(|pick| pick.iter().map(|&s| subsets[s].clone()).collect())
        .collect()
}

#[derive(Default)]
struct CoverTally {
    plain: usize,
    scaled: usize,
    certified: usize,
    bad: usize,
    notes: Vec<String>,
}

fn check_family(ground: usize, fam: &[Vec<usize>], t: &mut CoverTally) {
    let limits = OracleLimits::default();
    let k = min_cover_size(ground, fam);
    let red = gen_setcover::<i64>(ground, fam).unwrap();
    let h = homogenize(&red.instance).unwrap();
    let got = match global_opt_bruteforce(&h.instance, limits).unwrap().outcome {
        GlobalOutcome::Optimum { value, .. } => Some(value as usize),
        GlobalOutcome::Infeasible => None,
        other => {
            t.bad += 1;
            t.notes.push(format!("{fam:?}: {other:?}"));
            return;
        }
    };
    t.plain += 1;
    if got != k {
        t.bad += 1;
        t.notes.push(format!("{fam:?}: oracle {got:?}, cover {k:?}"));
    }

    let nd = gen_setcover_nondegenerate::<i64>(ground, fam).unwrap();
    let big = nd.scale.expect("scale");
    let hn = homogenize(&nd.instance).unwrap();
    let v = match global_opt_bruteforce(&hn.instance, limits).unwrap().outcome {
        GlobalOutcome::Optimum { value, .. } => Some(value),
        GlobalOutcome::Infeasible => None,
        other => {
            t.bad += 1;
            t.notes.push(format!("{fam:?}: scaled {other:?}"));
            return;
        }
    };
    t.scaled += 1;
    let ok = match (v, k) {
        (Some(v), Some(k)) => big * k as i64 <= v && v < big * (k as i64 + 1),
        (None, None) => true,
        _ => false,
    };
    if !ok {
        t.bad += 1;
        t.notes.push(format!("{fam:?}: scaled value {v:?}, cover {k:?}"));
    }
    if fam.len() <= 2 && ground <= 3 {
        match degeneracy_check_bruteforce(&hn.instance, DegeneracyCap::default()).unwrap() {
            Degeneracy::NonDegenerate => t.certified += 1,
            Degeneracy::CapExceeded => {}
            Degeneracy::Degenerate { .. } => {
                t.bad += 1;
                t.notes.push(format!("{fam:?}: homogenized scaled instance is degenerate"));
            }
        }
    }
}

fn setcover_reduction() -> Outcome {
    let work: Vec<(usize, Vec<Vec<usize>>)> =
        (1..=4).flat_map(|ground| families(ground, 4).into_iter().map(move |f| (ground, f))).collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(16);
    let chunk = work.len().div_ceil(threads);
    let tallies: Vec<CoverTally> = std::thread::scope(|scope| {
        let handles: Vec<_> = work
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    let mut t = CoverTally::default();
                    for (ground, fam) in part {
                        check_family(*ground, fam, &mut t);
                    }
                    t
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut total = CoverTally::default();
    for t in tallies {
        total.plain += t.plain;
        total.scaled += t.scaled;
        total.certified += t.certified;
        total.bad += t.bad;
        total.notes.extend(t.notes);
    }
    let mut detail = format!(
        "{} families exact, {} scaled within [Nk, N(k+1)), {} scaled variants certified non-degenerate; {} failures",
        total.plain, total.scaled, total.certified, total.bad
    );
    if let Some(first) = total.notes.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    outcome(total.bad == 0 && total.certified > 0, detail)
}

fn expected(name: &str) -> Value {
    let text = std::fs::read_to_string(common::fixture_path(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn worked_fixtures() -> Outcome {
    let mut problems = Vec::new();
    let i4 = common::fixture("i4.json");
    let x0 = TropVector::zeros(2);
    let run = descent_solve(&i4, &x0, DescentConfig::default()).unwrap();
    let step = run.trace.first();
    let ok = run.iterations == 1
        && step.is_some_and(|s| s.cols == vec![0] && s.delta == 1 && s.cut_capacity == Some(1))
        && run.value == 1
        && run.x == TropVector::from_finite(vec![0, -1])
        && run.status == DescentStatus::LocalOptimum(Certificate::MinCut { capacities: vec![2], degree: 2 });
    if !ok {
        problems.push(format!("I4 min-cut run {run:?}"));
    }
    let tree = descent_solve_tree(&i4, &x0, DescentConfig { method: Method::Tree, ..Default::default() }).unwrap();
    if tree.iterations != 1 || tree.value != 1 || tree.trace[0].cols != vec![0] {
        problems.push(format!("I4 tree run {tree:?}"));
    }

    let trap = common::fixture("local_trap.json");
    let exp = expected("local_trap.expected.json");
    let local_x: TropVector<i64> = vector_from_json(&exp["local"]["x"]).unwrap();
    let global_x: TropVector<i64> = vector_from_json(&exp["global"]["x"]).unwrap();
    let (local_v, global_v) = (exp["local"]["value"].as_i64().unwrap(), exp["global"]["value"].as_i64().unwrap());
    let solved = solve(&trap, &RunConfig::default()).unwrap();
    if solved.status != SolveStatus::LocalOptimum || solved.value != Some(local_v) || solved.x.as_ref() != Some(&local_x) {
        problems.push(format!("trap solve gave {:?} at {:?}", solved.value, solved.x));
    }
    if local_opt_check(&trap, &local_x, 20).unwrap() != LocalVerdict::LocallyOptimal {
        problems.push("recorded local point is not locally optimal".into());
    }
    match global_opt_bruteforce(&trap, OracleLimits::default()).unwrap().outcome {
        GlobalOutcome::Optimum { x, value } if value == global_v && x == global_x && value < local_v => {}
        other => problems.push(format!("trap oracle gave {other:?}")),
    }
    if objective(&trap, &global_x).unwrap() != global_v || !is_feasible(&trap, &global_x).unwrap() {
        problems.push("recorded global point does not evaluate to its value".into());
    }
    let detail = if problems.is_empty() {
        format!("I4: one step J={{1}}, delta 1, cuts 1 then 2, value 1; trap: local {local_v} > global {global_v}")
    } else {
        problems.join("; ")
    };
    outcome(problems.is_empty(), detail)
}

fn unboundedness() -> Outcome {
    let i2 = common::fixture("i2.json");
    let r = solve(&i2, &RunConfig::default()).unwrap();
    let SolveStatus::Unbounded { direction } = &r.status else {
        return outcome(false, format!("status {:?}", r.status));
    };
    let x = r.x.clone().unwrap();
    let f0 = objective(&i2, &x).unwrap();
    let infinite = step_size(&i2, &x, direction).unwrap() == Extent::Infinity;
    let mut last = f0;
    let mut decreasing = true;
    for delta in [1i64, 10, 100] {
        let y = x.shifted(direction, &delta).unwrap();
        let f = objective(&i2, &y).unwrap();
        decreasing &= f < last && is_feasible(&i2, &y).unwrap();
        last = f;
    }
    let g = build_tangent(&i2, &x).unwrap();
    let rate = tlfacp::tangent::mu_rate(&i2, &g, direction);
    outcome(
        infinite && decreasing && rate < 0,
        format!("J = {:?} (0-based), rate {rate}, step size infinite: {infinite}, decreasing at 1/10/100: {decreasing}", direction),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id}. {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    };
    report(1, "semiring laws and L-convexity", timed(Duration::from_secs(10), semiring_and_lconvexity));
    report(2, "feasibility against grid search", timed(Duration::from_secs(60), feasibility_grid));
    report(3, "min-cut against subset oracle", timed(Duration::from_secs(300), local_equivalence));
    let cases = nondegenerate_instances(300);
    report(4, "tree, min-cut and oracle agree", timed(Duration::from_secs(300), || tree_agreement(&cases)));
    report(5, "iteration and operation bounds", timed(Duration::from_secs(300), || complexity_bounds(&cases)));
    report(6, "transportation duality", timed(Duration::from_secs(300), transport_duality));
    report(7, "set-cover reductions", timed(Duration::from_secs(600), setcover_reduction));
    report(8, "worked fixtures", timed(Duration::from_secs(60), worked_fixtures));
    report(9, "unboundedness witness", timed(Duration::from_secs(60), unboundedness));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
