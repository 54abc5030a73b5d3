//! Exact nonnegative factorization of a designed instance with a planted
//! nonnegative factor pair, using the rank-limited construction.

use mpfactor::matcore::max_abs;
use mpfactor::problems::{build, gen_nmf_designed, verify, BuildOptions, Candidate, Method};
use mpfactor::solver::{solve, SolveConfig};

fn main() -> mpfactor::Result<()> {
    let (m, k) = (30, 15);
    let inst = gen_nmf_designed(m, m, k, 0.5, 4)?;
    let opts = BuildOptions { g: 1.2, h: 1.2, t: 10, ..BuildOptions::default() };
    let problem = build(&inst, Method::RankLimited, &opts)?;
    let cfg = SolveConfig { beta: 0.2, g: 1.2, h: 1.2, max_iter: 20_000, ..SolveConfig::default() };
    let out = solve(problem.as_ref(), problem.initial(0), &cfg)?;
    println!("{:?} after {} iterations, delta {:.2e}", out.status, out.iterations, out.final_delta);

    let cand = problem.candidate_of(&out);
    println!("verdict: {:?}", verify(&inst, &cand));
    if let Candidate::Factors { x, y: Some(y) } = cand {
        println!("min entry X {:.2e}, Y {:.2e}", x.min(), y.min());
        println!("max |XY - C| = {:.2e}", max_abs(&(&x * &y - &inst.c)));
    }
    Ok(())
}
