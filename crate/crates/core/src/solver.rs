//! Split-iteration engines.
//!
//! A problem is a pair of projections on a flat vector of variables
//! ([`SplitVariables`]). [`solve`] drives either
//!
//! ```text
//! RRR:   x1 = P1(x);  x2 = P2(2 x1 - x);  x' = x + β (x2 - x1)
//! ADMM:  x1 = P1(x2 + x);  x2' = P2(x1 - x);  x' = x + α (x2' - x1)
//! ```
//!
//! and watches the discrepancy `Δ = ‖x1 − x2‖ / √M`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::Matrix;

/// Generator behind every seeded draw in the crate.
pub const PRNG_ID: &str = "chacha8";

/// The generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `t` in a batch started from `seed`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    seed ^ t
}

#[derive(Debug, PartialEq, Eq)]
pub struct Layout {
    pub names: Vec<String>,
    pub shapes: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    len: usize,
}

impl Layout {
    pub fn new(names: Vec<String>, shapes: Vec<(usize, usize)>) -> Self {
        assert_eq!(names.len(), shapes.len());
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut len = 0;
        for (r, c) in &shapes {
            offsets.push(len);
            len += r * c;
        }
        Layout {
            names,
            shapes,
            offsets,
            len,
        }
    }
}

/// Named matrices flattened into one vector (column-major per component).
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVariables {
    layout: Arc<Layout>,
    data: Vec<f64>,
}

impl SplitVariables {
    pub fn new(components: Vec<(String, Matrix)>) -> Self {
        let layout = Arc::new(Layout::new(
            components.iter().map(|(n, _)| n.clone()).collect(),
            components.iter().map(|(_, m)| m.shape()).collect(),
        ));
        let mut data = Vec::with_capacity(layout.len);
        for (_, m) in &components {
            data.extend_from_slice(m.as_slice());
        }
        SplitVariables { layout, data }
    }

    pub fn from_layout(layout: Arc<Layout>, data: Vec<f64>) -> Result<Self> {
        if data.len() != layout.len {
            return Err(Error::InvalidInput(format!(
                "{} values for a layout of {}",
                data.len(),
                layout.len
            )));
        }
        Ok(SplitVariables { layout, data })
    }

    pub fn zeros(layout: Arc<Layout>) -> Self {
        let data = vec![0.0; layout.len];
        SplitVariables { layout, data }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Total scalar count `M`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn num_components(&self) -> usize {
        self.layout.shapes.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn component(&self, i: usize) -> Matrix {
        let (r, c) = self.layout.shapes[i];
        let o = self.layout.offsets[i];
        Matrix::from_column_slice(r, c, &self.data[o..o + r * c])
    }

    pub fn component_by_name(&self, name: &str) -> Option<Matrix> {
        self.layout.names.iter().position(|n| n == name).map(|i| self.component(i))
    }

    pub fn components(&self) -> Vec<Matrix> {
        (0..self.num_components()).map(|i| self.component(i)).collect()
    }

    /// Same layout, new values.
    pub fn with_components(&self, mats: &[Matrix]) -> Result<Self> {
        if mats.len() != self.num_components() {
            return Err(Error::InvalidInput(format!(
                "{} components for a layout of {}",
                mats.len(),
                self.num_components()
            )));
        }
        let mut data = Vec::with_capacity(self.layout.len);
        for (i, m) in mats.iter().enumerate() {
            if m.shape() != self.layout.shapes[i] {
                return Err(Error::InvalidInput(format!(
                    "component {} is {:?}, expected {:?}",
                    self.layout.names[i],
                    m.shape(),
                    self.layout.shapes[i]
                )));
            }
            data.extend_from_slice(m.as_slice());
        }
        Ok(SplitVariables {
            layout: self.layout.clone(),
            data,
        })
    }

    /// Euclidean distance over all components.
    pub fn dist(&self, other: &SplitVariables) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &SplitVariables, b: f64) -> SplitVariables {
        SplitVariables {
            layout: self.layout.clone(),
            data: self.data.iter().zip(&other.data).map(|(p, q)| a * p + b * q).collect(),
        }
    }
}

/// The two projections of a feasibility problem, plus an optional exact
/// acceptance test.
pub trait ConstraintPair {
    fn project1(&self, x: &SplitVariables) -> Result<SplitVariables>;
    fn project2(&self, x: &SplitVariables) -> Result<SplitVariables>;

    /// Exact check of the current images (`p1` from `project1`, `p2` from
    /// `project2`). Returning `true` ends the solve as solved.
    fn accept(&self, _p1: &SplitVariables, _p2: &SplitVariables) -> bool {
        false
    }

    /// Fresh starting point for a restart, if the problem supports it.
    fn reinit(&self, _seed: u64) -> Option<SplitVariables> {
        None
    }
}

/// Projections given as closures; handy for toys.
pub struct FnPair<F, G> {
    pub p1: F,
    pub p2: G,
}

impl<F, G> ConstraintPair for FnPair<F, G>
where
    F: Fn(&SplitVariables) -> Result<SplitVariables>,
    G: Fn(&SplitVariables) -> Result<SplitVariables>,
{
    fn project1(&self, x: &SplitVariables) -> Result<SplitVariables> {
        (self.p1)(x)
    }
    fn project2(&self, x: &SplitVariables) -> Result<SplitVariables> {
        (self.p2)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Rrr,
    Admm,
}

/// Restart when the discrepancy has stopped moving without a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StallConfig {
    /// Iterations in the variance window.
    pub window: usize,
    /// Restart when the variance of `Δ` over the window drops below this.
    pub variance_tol: f64,
    pub max_restarts: usize,
}

impl Default for StallConfig {
    fn default() -> Self {
        StallConfig {
            window: 1000,
            variance_tol: 1e-6,
            max_restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub algorithm: Algorithm,
    /// RRR relaxation, `0 < β < 2`.
    pub beta: f64,
    /// ADMM step, `α > 0`.
    pub alpha: f64,
    /// Tangent-space refinement cycles of the product projection.
    pub t: usize,
    /// Metric parameters of compound constructions.
    pub g: f64,
    pub h: f64,
    pub max_iter: usize,
    pub delta_tol: f64,
    pub seed: u64,
    pub swap_projections: bool,
    /// Trace sampling period; `None` samples every iteration up to 10⁵ and
    /// every tenth after that.
    pub trace_every: Option<usize>,
    pub stall: Option<StallConfig>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            algorithm: Algorithm::Rrr,
            beta: 0.5,
            alpha: 1.0,
            t: crate::projections::DEFAULT_REFINEMENT_CYCLES,
            g: 1.0,
            h: 1.0,
            max_iter: 100_000,
            delta_tol: 1e-10,
            seed: 0,
            swap_projections: false,
            trace_every: None,
            stall: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        match self.algorithm {
            Algorithm::Rrr if !(self.beta > 0.0 && self.beta < 2.0) => Err(Error::InvalidInput(
                format!("RRR needs 0 < beta < 2, got {}", self.beta),
            )),
            Algorithm::Admm if !(self.alpha > 0.0 && self.alpha.is_finite()) => Err(
                Error::InvalidInput(format!("ADMM needs alpha > 0, got {}", self.alpha)),
            ),
            _ if self.trace_every == Some(0) => {
                Err(Error::InvalidInput("trace period must be positive".into()))
            }
            _ if self.delta_tol.is_nan() || self.delta_tol < 0.0 => Err(Error::InvalidInput(format!(
                "delta tolerance must be >= 0, got {}",
                self.delta_tol
            ))),
            _ => Ok(()),
        }
    }

    fn records(&self, iter: usize) -> bool {
        match self.trace_every {
            Some(p) => iter % p == 0,
            None => iter <= 100_000 || iter % 10 == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Solved,
    MaxIter,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Solved => "solved",
            Status::MaxIter => "max_iter",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: Status,
    /// Index of the iteration whose images ended the run; equals the number
    /// of updates applied.
    pub iterations: usize,
    pub final_delta: f64,
    /// Last image of `project1`; the solution when solved.
    pub p1_image: SplitVariables,
    /// Last image of `project2`.
    pub p2_image: SplitVariables,
    pub trace: Vec<TraceRecord>,
    pub restarts: usize,
    pub error: Option<String>,
}

impl SolveOutcome {
    pub fn solved(&self) -> bool {
        self.status == Status::Solved
    }
}

/// `Δ = ‖a − b‖ / √M`.
pub fn discrepancy(a: &SplitVariables, b: &SplitVariables) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.dist(b) / (a.len() as f64).sqrt()
}

struct Images {
    first: SplitVariables,
    second: SplitVariables,
    delta: f64,
}

fn rrr_images(
    x: &SplitVariables,
    pf: &dyn Fn(&SplitVariables) -> Result<SplitVariables>,
    ps: &dyn Fn(&SplitVariables) -> Result<SplitVariables>,
) -> Result<Images> {
    let first = pf(x)?;
    let second = ps(&first.lincomb(2.0, x, -1.0))?;
    let delta = discrepancy(&first, &second);
    Ok(Images { first, second, delta })
}

fn admm_images(
    x: &SplitVariables,
    x2: &SplitVariables,
    pf: &dyn Fn(&SplitVariables) -> Result<SplitVariables>,
    ps: &dyn Fn(&SplitVariables) -> Result<SplitVariables>,
) -> Result<Images> {
    let first = pf(&x2.lincomb(1.0, x, 1.0))?;
    let second = ps(&first.lincomb(1.0, x, -1.0))?;
    let delta = discrepancy(&first, &second);
    Ok(Images { first, second, delta })
}

/// One RRR update; returns `(x', Δ)`.
pub fn rrr_step(
    x: &SplitVariables,
    p1: &dyn Fn(&SplitVariables) -> Result<SplitVariables>,
    p2: &dyn Fn(&SplitVariables) -> Result<SplitVariables>,
    beta: f64,
) -> Result<(SplitVariables, f64)> {
    let im = rrr_images(x, p1, p2)?;
    Ok((x.lincomb(1.0, &im.second.lincomb(1.0, &im.first, -1.0), beta), im.delta))
}

/// One ADMM update; returns `(x', x2', Δ)`.
pub fn admm_step(
    x: &SplitVariables,
    x2: &SplitVariables,
    p1: &dyn Fn(&SplitVariables) -> Result<SplitVariables>,
    p2: &dyn Fn(&SplitVariables) -> Result<SplitVariables>,
    alpha: f64,
) -> Result<(SplitVariables, SplitVariables, f64)> {
    let im = admm_images(x, x2, p1, p2)?;
    let xn = x.lincomb(1.0, &im.second.lincomb(1.0, &im.first, -1.0), alpha);
    Ok((xn, im.second, im.delta))
}

fn variance(window: &std::collections::VecDeque<f64>) -> f64 {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    window.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n
}

/// Iterates from `init` until the problem accepts, `Δ <= delta_tol`, or
/// `max_iter` updates have been applied.
///
/// For ADMM `init` is the starting `x2`; the accumulator starts at zero.
/// The trace holds the sampled `(iter, Δ)` of every evaluated iteration
/// before the last, plus the last one.
pub fn solve(problem: &dyn ConstraintPair, init: SplitVariables, cfg: &SolveConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let p1 = |v: &SplitVariables| problem.project1(v);
    let p2 = |v: &SplitVariables| problem.project2(v);
    let (pf, ps): (&dyn Fn(&SplitVariables) -> Result<SplitVariables>, &dyn Fn(&SplitVariables) -> Result<SplitVariables>) =
        if cfg.swap_projections { (&p2, &p1) } else { (&p1, &p2) };

    let fresh = |start: SplitVariables| match cfg.algorithm {
        Algorithm::Rrr => (start, None),
        Algorithm::Admm => (SplitVariables::zeros(start.layout().clone()), Some(start)),
    };
    let (mut x, mut x2) = fresh(init.clone());
    let mut trace = Vec::new();
    let mut window = std::collections::VecDeque::new();
    let mut restarts = 0;
    let mut last: Option<Images> = None;

    let mut iter = 0;
    let status = loop {
        let im = match &x2 {
            None => rrr_images(&x, pf, ps),
            Some(x2v) => admm_images(&x, x2v, pf, ps),
        };
        let im = match im {
            Ok(im) => im,
            Err(e) => {
                let (a, b) = match last {
                    Some(l) => (l.first, l.second),
                    None => (x.clone(), x.clone()),
                };
                let (p1_image, p2_image) = if cfg.swap_projections { (b, a) } else { (a, b) };
                trace.push(TraceRecord {
                    iter,
                    delta: f64::NAN,
                });
                return Ok(SolveOutcome {
                    status: Status::Failed,
                    iterations: iter,
                    final_delta: f64::NAN,
                    p1_image,
                    p2_image,
                    trace,
                    restarts,
                    error: Some(format!("iteration {iter}: {e}")),
                });
            }
        };
        let (i1, i2) = if cfg.swap_projections {
            (&im.second, &im.first)
        } else {
            (&im.first, &im.second)
        };
        if problem.accept(i1, i2) || im.delta <= cfg.delta_tol {
            last = Some(im);
            break Status::Solved;
        }
        if iter == cfg.max_iter {
            last = Some(im);
            break Status::MaxIter;
        }
        if cfg.records(iter) {
            trace.push(TraceRecord {
                iter,
                delta: im.delta,
            });
        }

        let step = im.second.lincomb(1.0, &im.first, -1.0);
        match &mut x2 {
            None => x = x.lincomb(1.0, &step, cfg.beta),
            Some(x2v) => {
                x = x.lincomb(1.0, &step, cfg.alpha);
                *x2v = im.second.clone();
            }
        }

        if let Some(stall) = &cfg.stall {
            window.push_back(im.delta);
            if window.len() > stall.window {
                window.pop_front();
            }
            if window.len() == stall.window
                && restarts < stall.max_restarts
                && variance(&window) < stall.variance_tol
            {
                let seed = cfg.seed ^ ((restarts as u64 + 1) << 32);
                if let Some(start) = problem.reinit(seed) {
                    (x, x2) = fresh(start);
                    restarts += 1;
                    window.clear();
                }
            }
        }
        last = Some(im);
        iter += 1;
    };

    let im = last.expect("at least one evaluation");
    trace.push(TraceRecord {
        iter,
        delta: im.delta,
    });
    let (p1_image, p2_image) = if cfg.swap_projections {
        (im.second, im.first)
    } else {
        (im.first, im.second)
    };
    Ok(SolveOutcome {
        status,
        iterations: iter,
        final_delta: im.delta,
        p1_image,
        p2_image,
        trace,
        restarts,
        error: None,
    })
}

/// Distribution of the entries of a random starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Uniform01,
    UniformRange(f64, f64),
    Gaussian,
}

/// Random variables of the given named shapes. Values are drawn in
/// component order, row-major within each component, from the seeded
/// generator.
pub fn init_random(shapes: &[(String, (usize, usize))], seed: u64, sampler: Sampler) -> SplitVariables {
    let mut rng = rng_from_seed(seed);
    init_random_with(shapes, &mut rng, sampler)
}

/// [`init_random`] drawing from an existing generator.
pub fn init_random_with(
    shapes: &[(String, (usize, usize))],
    rng: &mut ChaCha8Rng,
    sampler: Sampler,
) -> SplitVariables {
    let comps = shapes
        .iter()
        .map(|(name, (r, c))| {
            let mut m = Matrix::zeros(*r, *c);
            for i in 0..*r {
                for j in 0..*c {
                    m[(i, j)] = match sampler {
                        Sampler::Uniform01 => rng.gen::<f64>(),
                        Sampler::UniformRange(lo, hi) => lo + (hi - lo) * rng.gen::<f64>(),
                        Sampler::Gaussian => StandardNormal.sample(rng),
                    };
                }
            }
            (name.clone(), m)
        })
        .collect();
    SplitVariables::new(comps)
}

/// One node of a planar flow field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl FlowSample {
    pub fn is_degenerate(&self) -> bool {
        !(self.vx.is_finite() && self.vy.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub step: f64,
}

impl Grid {
    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| {
                let v = lo + i as f64 * step;
                // Keep integer nodes exact so they can be looked up.
                if (v - v.round()).abs() < 1e-9 * step {
                    v.round()
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.xmin, self.xmax, self.step)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.ymin, self.ymax, self.step)
    }
}

/// The planar RRR flow `P1(2 P2(p) − p) − P2(p)` on a grid, rows of constant
/// `y` in increasing order. A projection returning `None` marks the node
/// degenerate (NaN vector).
pub fn flow_field(
    p1: impl Fn(f64, f64) -> Option<(f64, f64)>,
    p2: impl Fn(f64, f64) -> Option<(f64, f64)>,
    grid: &Grid,
) -> Result<Vec<FlowSample>> {
    if !(grid.step > 0.0) || !(grid.xmax >= grid.xmin) || !(grid.ymax >= grid.ymin) {
        return Err(Error::InvalidInput(format!("bad grid {grid:?}")));
    }
    let xs = grid.xs();
    let mut out = Vec::new();
    for y in grid.ys() {
        for &x in &xs {
            let v = p2(x, y).and_then(|(ax, ay)| {
                p1(2.0 * ax - x, 2.0 * ay - y).map(|(bx, by)| (bx - ax, by - ay))
            });
            let (vx, vy) = match v {
                Some((vx, vy)) if vx.is_finite() && vy.is_finite() => (vx, vy),
                _ => (f64::NAN, f64::NAN),
            };
            out.push(FlowSample { x, y, vx, vy });
        }
    }
    Ok(out)
}
