//! Any pair of projections can be handed to the solver. Here: unit-norm
//! vectors against vectors whose entries are 0 or 1/2, which meet at
//! points with exactly four entries equal to 1/2.

use mpfactor::matcore::Matrix;
use mpfactor::solver::{solve, FnPair, SolveConfig, SplitVariables};
use mpfactor::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vector(v: Matrix) -> SplitVariables {
    SplitVariables::new(vec![("v".into(), v)])
}

fn main() -> Result<()> {
    let sphere = |x: &SplitVariables| -> Result<SplitVariables> {
        let v = x.component(0);
        let n = v.norm();
        Ok(vector(if n > 0.0 { v / n } else { v.map(|_| 1.0 / 3.0) }))
    };
    let half_grid = |x: &SplitVariables| -> Result<SplitVariables> {
        Ok(vector(x.component(0).map(|e| if e > 0.25 { 0.5 } else { 0.0 })))
    };
    let pair = FnPair { p1: sphere, p2: half_grid };

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let init = vector(Matrix::from_fn(9, 1, |_, _| rng.gen_range(-1.0..1.0)));
    let out = solve(&pair, init, &SolveConfig { beta: 0.5, ..SolveConfig::default() })?;
    println!("{:?} after {} iterations", out.status, out.iterations);
    println!("{:?}", out.p2_image.as_slice());
    Ok(())
}
