//! Search for a 12×12 Hadamard matrix: ±1 entries with `H Hᵀ = 12 I`.

use mpfactor::problems::{build, gen_hadamard, verify, BuildOptions, Candidate, Method};
use mpfactor::solver::{solve, SolveConfig};

fn main() -> mpfactor::Result<()> {
    let inst = gen_hadamard(12)?;
    let problem = build(&inst, Method::Gram, &BuildOptions::default())?;
    let cfg = SolveConfig { beta: 0.2, max_iter: 500_000, ..SolveConfig::default() };
    let out = solve(problem.as_ref(), problem.initial(3), &cfg)?;
    println!("{:?} after {} iterations", out.status, out.iterations);

    let cand = problem.candidate_of(&out);
    println!("verdict: {:?}", verify(&inst, &cand));
    if let Candidate::Factors { x, .. } = cand {
        for row in x.row_iter() {
            let line: String = row.iter().map(|v| if *v > 0.0 { '+' } else { '-' }).collect();
            println!("{line}");
        }
    }
    Ok(())
}
