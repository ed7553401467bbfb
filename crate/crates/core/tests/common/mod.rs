#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tlfacp::feasibility::{normalize, solve_feasibility};
use tlfacp::generate::{gen_random, RandomParams};
use tlfacp::trop::{scale, vec_join};
use tlfacp::{is_feasible, Instance, TropVector};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> Instance<i64> {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    tlfacp::io::parse_instance(&text).expect("fixture parses")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random integer instance with sizes drawn up to the given maxima.
pub fn random_instance(seed: u64, max_n: usize, max_m: usize, max_p: usize, m_abs: i64, perturb: bool) -> Instance<i64> {
    let mut r = rng(seed ^ 0x5eed);
    let params = RandomParams {
        n: r.gen_range(2..=max_n),
        m: r.gen_range(0..=max_m),
        p: r.gen_range(1..=max_p),
        mu_max: 2,
        lo: -m_abs,
        hi: m_abs,
        density: r.gen_range(0.4..0.9),
        seed,
        perturb,
    };
    gen_random(&params).expect("valid parameters")
}

/// The greatest feasible point with every column finite, if any.
pub fn full_support_point(inst: &Instance<i64>) -> Option<TropVector<i64>> {
    let all: Vec<usize> = (0..inst.n()).collect();
    let res = solve_feasibility(inst, &all).ok()?;
    res.solution().map(|x| normalize(x).unwrap())
}

/// Greatest feasible point below `y`. Only call this when a full-support
/// solution exists: a shifted copy of it bounds the iteration from below.
pub fn project_below(inst: &Instance<i64>, y: &TropVector<i64>) -> TropVector<i64> {
    let mut x: Vec<i64> = y.iter().map(|v| *v.finite().expect("finite target")).collect();
    loop {
        let z = TropVector::from_finite(x.clone());
        let mut changed = false;
        for i in 0..inst.m() {
            let lhs = inst.a_plus().row_max(i, &z).unwrap();
            let rhs = inst.a_minus().row_max(i, &z).unwrap();
            if rhs <= lhs {
                continue;
            }
            let bound = *lhs.finite().expect("feasible full-support point exists");
            for (j, a) in inst.a_minus().row(i) {
                if x[*j] + a > bound {
                    x[*j] = bound - a;
                    changed = true;
                }
            }
        }
        if !changed {
            return TropVector::from_finite(x);
        }
    }
}

/// Distinct feasible full-support points: `seed_points`, projections of
/// random targets, and tropical combinations `(a ⊗ x) ⊕ y`.
pub fn feasible_points(
    inst: &Instance<i64>,
    seed_points: &[TropVector<i64>],
    want: usize,
    r: &mut ChaCha8Rng,
) -> Vec<TropVector<i64>> {
    let mut out: Vec<TropVector<i64>> = Vec::new();
    let push = |x: TropVector<i64>, out: &mut Vec<TropVector<i64>>| {
        let x = normalize(&x).unwrap();
        assert!(is_feasible(inst, &x).unwrap());
        if x.is_all_finite() && !out.contains(&x) {
            out.push(x);
        }
    };
    for x in seed_points {
        push(x.clone(), &mut out);
    }
    if out.is_empty() {
        return out;
    }
    let n = inst.n();
    let spread = 2 * n as i64 * inst.max_abs().unwrap().max(1);
    for round in 0..want * 20 {
        if out.len() >= want {
            break;
        }
        let z = if round % 2 == 0 {
            // stays above a shifted copy of a known solution, so the
            // projection keeps every entry finite
            project_below(inst, &random_point(r, n, -spread, 0))
        } else {
            let x = &out[r.gen_range(0..out.len())];
            let y = &out[r.gen_range(0..out.len())];
            let a = r.gen_range(-spread..=spread);
            vec_join(&scale(&a, x).unwrap(), y).unwrap()
        };
        push(z, &mut out);
    }
    out
}

pub fn random_point(r: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> TropVector<i64> {
    TropVector::from_finite((0..n).map(|_| r.gen_range(lo..=hi)).collect())
}

/// Tree-method walk from `x0`: connect, then follow tree directions. Calls
/// `visit` at every tree point reached; stops at a local optimum, a ray, a
/// cycle or after `max_steps`.
pub fn tree_walk(
    inst: &Instance<i64>,
    x0: &TropVector<i64>,
    max_steps: usize,
    mut visit: impl FnMut(&TropVector<i64>, &tlfacp::tangent::TangentDigraph<i64>),
) {
    use tlfacp::tangent::{build_tangent, make_connected, ConnectedResult};
    use tlfacp::tree::{find_direction_tree, TreeOutcome};
    use tlfacp::trop::Extent;

    let mut x = x0.clone();
    for _ in 0..max_steps {
        let mut g = build_tangent(inst, &x).unwrap();
        if !g.is_connected() {
            match make_connected(inst, &x).unwrap() {
                ConnectedResult::Connected { x: y, .. } => x = normalize(&y).unwrap(),
                ConnectedResult::Unbounded { .. } => return,
            }
            g = build_tangent(inst, &x).unwrap();
        }
        visit(&x, &g);
        match find_direction_tree(inst, &x).unwrap() {
            TreeOutcome::Found { direction, .. } => match direction.delta {
                Extent::Finite(d) => x = normalize(&x.shifted(&direction.cols, &d).unwrap()).unwrap(),
                Extent::Infinity => return,
            },
            _ => return,
        }
    }
}
