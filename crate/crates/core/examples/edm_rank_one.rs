//! Split `C_ij = (i - j)²` (6×6) into five nonnegative integer rank-one
//! summands, comparing the integer-simplex and plain-simplex projections.

use mpfactor::compound::StructureKind;
use mpfactor::problems::{build, edm, verify, BuildOptions, Method};
use mpfactor::solver::{solve, SolveConfig};

fn main() -> mpfactor::Result<()> {
    let inst = edm(6)?;
    let cfg = SolveConfig { beta: 1.0, max_iter: 50_000, ..SolveConfig::default() };
    for structure in [StructureKind::Integer, StructureKind::Nonnegative] {
        let opts = BuildOptions { k: Some(5), rank1_structure: structure, ..BuildOptions::default() };
        let problem = build(&inst, Method::Rank1, &opts)?;
        let mut iters = Vec::new();
        let mut stalled = 0;
        for seed in 0..10 {
            let out = solve(problem.as_ref(), problem.initial(seed), &SolveConfig { seed, ..cfg.clone() })?;
            if out.solved() && verify(&inst, &problem.candidate_of(&out)).accepted() {
                iters.push(out.iterations);
            } else {
                stalled += 1;
            }
        }
        println!("{structure:?}: solved {:?}, stalled {stalled}", iters);
    }
    Ok(())
}
