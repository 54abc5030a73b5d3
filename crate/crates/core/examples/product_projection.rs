//! Projection onto `X Y = C` for a 3×3 invertible `C` and 3×5 / 5×3 factors.
//! More refinement cycles give a closer feasible point.

use mpfactor::matcore::{max_abs, Matrix};
use mpfactor::projections::{proj_product_fullrank, FactorPair, FullRankConstraint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mpfactor::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = Matrix::from_fn(3, 3, |i, j| if i == j { 4.0 } else { rng.gen_range(-1.0..1.0) });
    let anchor = FactorPair::new(
        Matrix::from_fn(3, 5, |_, _| rng.gen_range(-2.0..2.0)),
        Matrix::from_fn(5, 3, |_, _| rng.gen_range(-2.0..2.0)),
    );
    for t in [0, 1, 2, 5, 10, 50] {
        let fc = FullRankConstraint::new(c.clone(), 5, t)?;
        let p = proj_product_fullrank(&fc, &anchor)?;
        println!(
            "T={t:>2}: distance {:.6}, residual {:.1e}",
            p.sq_dist(&anchor).sqrt(),
            max_abs(&(&p.x * &p.y - &c))
        );
    }
    Ok(())
}
