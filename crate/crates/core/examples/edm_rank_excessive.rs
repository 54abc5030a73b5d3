//! Nonnegative factorization of the 8×8 linear Euclidean distance matrix
//! `C_ij = (i - j)²` at inner dimension 6, above its rank of 3.

use mpfactor::problems::{build, edm, summands_of, verify, BuildOptions, Candidate, InitKind, Method};
use mpfactor::solver::{solve, SolveConfig};

fn main() -> mpfactor::Result<()> {
    let inst = edm(8)?;
    let opts = BuildOptions { k: Some(6), g: 0.5, h: 0.5, init: InitKind::Special, ..BuildOptions::default() };
    let problem = build(&inst, Method::RankExcessive, &opts)?;
    let cfg = SolveConfig { beta: 1.0, g: 0.5, h: 0.5, max_iter: 50_000, ..SolveConfig::default() };
    let out = solve(problem.as_ref(), problem.initial(0), &cfg)?;
    println!("{:?} after {} iterations", out.status, out.iterations);

    let cand = problem.candidate_of(&out);
    println!("verdict: {:?}", verify(&inst, &cand));
    if let Candidate::Factors { x, y: Some(y) } = cand {
        for (l, z) in summands_of(&x, &y).iter().enumerate() {
            println!("summand {l}:\n{}", mpfactor::matcore::format_matrix(&z.map(f64::round)));
        }
    }
    Ok(())
}
