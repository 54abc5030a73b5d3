//! Nonnegative factorization of the 64×64 unique-disjointness matrix at its
//! nonnegative rank 27. Prints the discrepancy every 50 iterations.

use mpfactor::problems::{build, udisj, verify, BuildOptions, Method};
use mpfactor::solver::{solve, SolveConfig};

fn main() -> mpfactor::Result<()> {
    let inst = udisj(4)?;
    let opts = BuildOptions { k: Some(27), g: 0.8, h: 0.8, ..BuildOptions::default() };
    let problem = build(&inst, Method::RankLimited, &opts)?;
    let cfg = SolveConfig { beta: 0.2, g: 0.8, h: 0.8, max_iter: 20_000, trace_every: Some(50), ..SolveConfig::default() };
    let out = solve(problem.as_ref(), problem.initial(0), &cfg)?;
    for r in &out.trace {
        println!("{:>6} {:.3e}", r.iter, r.delta);
    }
    println!("{:?} after {} iterations", out.status, out.iterations);
    println!("verdict: {:?}", verify(&inst, &problem.candidate_of(&out)));
    Ok(())
}
