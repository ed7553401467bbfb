use tlfacp::generate::{gen_random, RandomParams};
use tlfacp::oracle::{global_opt_bruteforce, GlobalOutcome, OracleLimits};
use tlfacp::solve::{solve, RunConfig, SolveStatus};

fn main() {
    for seed in 0..20000u64 {
        for (n, m, p) in [(3, 2, 2), (3, 3, 2), (4, 2, 2), (3, 2, 1)] {
            let params = RandomParams { n, m, p, mu_max: 2, lo: -3, hi: 3, density: 0.7, seed, perturb: false };
            let Ok(inst) = gen_random::<i64>(&params) else { continue };
            let Ok(r) = solve(&inst, &RunConfig::default()) else { continue };
            if r.status != SolveStatus::LocalOptimum {
                continue;
            }
            let Ok(g) = global_opt_bruteforce(&inst, OracleLimits::default()) else { continue };
            if let GlobalOutcome::Optimum { value, x } = g.outcome {
                let local = r.value.unwrap();
                if local > value && r.x.as_ref().unwrap().is_all_finite() {
                    println!("seed {seed} n{n} m{m} p{p}: local {local} at {} global {value} at {x}", r.x.unwrap());
                    println!("{}", tlfacp::io::instance_to_json(&inst));
                    return;
                }
            }
        }
    }
}
