//! The planar flow of the iteration for `x y = c` against the integer
//! lattice. Integer nodes with zero flow are the factorizations of `c`.

use mpfactor::problems::int2d_projections;
use mpfactor::solver::{flow_field, Grid};

fn main() -> mpfactor::Result<()> {
    let grid = Grid { xmin: 2.0, xmax: 6.0, ymin: 2.0, ymax: 6.0, step: 0.05 };
    for c in [15.0, 16.0] {
        let (hyperbola, round) = int2d_projections(c, 10);
        let field = flow_field(hyperbola, round, &grid)?;
        let fixed: Vec<_> = field
            .iter()
            .filter(|s| s.x.fract() == 0.0 && s.y.fract() == 0.0 && s.vx.hypot(s.vy) < 1e-9)
            .map(|s| (s.x, s.y))
            .collect();
        let longest = field.iter().map(|s| s.vx.hypot(s.vy)).fold(0.0, f64::max);
        println!("c={c}: {} nodes, zero flow at {fixed:?}, max speed {longest:.3}", field.len());
    }
    Ok(())
}
