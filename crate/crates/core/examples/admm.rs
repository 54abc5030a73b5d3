//! RRR and ADMM on the same Gram instance and starting point.

use mpfactor::problems::{build, gen_gram, BuildOptions, Method};
use mpfactor::solver::{solve, Algorithm, SolveConfig};

fn main() -> mpfactor::Result<()> {
    let inst = gen_gram(10, 10, 2)?;
    let problem = build(&inst, Method::Gram, &BuildOptions::default())?;
    let runs = [
        ("rrr beta=0.2", SolveConfig { beta: 0.2, ..SolveConfig::default() }),
        ("rrr beta=1 swapped", SolveConfig { beta: 1.0, swap_projections: true, ..SolveConfig::default() }),
        ("admm alpha=1", SolveConfig { algorithm: Algorithm::Admm, alpha: 1.0, ..SolveConfig::default() }),
        ("admm alpha=0.5", SolveConfig { algorithm: Algorithm::Admm, alpha: 0.5, ..SolveConfig::default() }),
    ];
    for (name, cfg) in runs {
        let out = solve(problem.as_ref(), problem.initial(5), &SolveConfig { max_iter: 100_000, ..cfg })?;
        println!("{name:<20} {:?} after {}", out.status, out.iterations);
    }
    Ok(())
}
