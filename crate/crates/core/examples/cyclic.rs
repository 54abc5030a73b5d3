//! Factor the degree-22 cyclic polynomial `c23` into two ±1 polynomials.
//! The product constraint is handled frequency by frequency in Fourier space.

use mpfactor::problems::{build, c23_instance, cyclic_product, verify, BuildOptions, Candidate, Method};
use mpfactor::solver::{solve, SolveConfig};

fn main() -> mpfactor::Result<()> {
    let inst = c23_instance();
    let opts = BuildOptions { t: 1, ..BuildOptions::default() };
    let problem = build(&inst, Method::Cyclic, &opts)?;
    let cfg = SolveConfig { beta: 0.2, t: 1, max_iter: 300_000, ..SolveConfig::default() };
    let out = solve(problem.as_ref(), problem.initial(0), &cfg)?;
    println!("{:?} after {} iterations", out.status, out.iterations);

    let cand = problem.candidate_of(&out);
    println!("verdict: {:?}", verify(&inst, &cand));
    if let Candidate::Factors { x, y: Some(y) } = cand {
        let (x, y) = (x.as_slice().to_vec(), y.as_slice().to_vec());
        println!("x = {x:?}\ny = {y:?}");
        println!("x*y = {:?}", cyclic_product(&x, &y)?);
    }
    Ok(())
}
