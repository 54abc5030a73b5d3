//! Recover a ±1 matrix from its Gram matrix `X Xᵀ`.

use mpfactor::problems::{build, gen_gram, verify, BuildOptions, Candidate, Method};
use mpfactor::solver::{solve, SolveConfig};

fn main() -> mpfactor::Result<()> {
    let inst = gen_gram(12, 12, 7)?;
    let problem = build(&inst, Method::Gram, &BuildOptions::default())?;
    let cfg = SolveConfig { beta: 0.2, max_iter: 200_000, ..SolveConfig::default() };
    let out = solve(problem.as_ref(), problem.initial(1), &cfg)?;
    println!("{:?} after {} iterations", out.status, out.iterations);

    let cand = problem.candidate_of(&out);
    println!("verdict: {:?}", verify(&inst, &cand));
    if let Candidate::Factors { x, .. } = cand {
        println!("X =\n{}", mpfactor::matcore::format_matrix(&x));
    }
    Ok(())
}
