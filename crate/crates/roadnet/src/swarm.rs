//! Continuous swarm optimizers adapted to the discrete tile domain.
//!
//! Candidates live as height x width x 16 logit tensors. Decoding runs a
//! per-cell stable softmax, samples one code per cell, then repairs the
//! result. Particle swarm moves logits with inertia plus cognitive and
//! social pulls; grey wolf contracts the pack toward the mean of its
//! three reference wolves with a small uniform perturbation. Both
//! minimize the same fitness and retain the best decoded grid ever seen.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fitness::{evaluate, FitnessValue, FitnessWeights};
use crate::grid::Grid;
use crate::num::Scalar;
use crate::repair::{default_budget, enforce_coverage, repair_full};
use crate::tiles::TileCode;

/// Number of tile types a cell can hold.
pub const TILE_TYPES: usize = 16;

/// Which position-update rule drives the swarm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwarmMethod {
    Pso,
    Gwo,
}

/// Shared configuration for both swarm methods.
#[derive(Clone, Debug)]
pub struct SwarmConfig<R> {
    pub population: usize,
    pub generations: usize,
    /// PSO inertia weight.
    pub inertia: R,
    /// PSO pull toward the personal best.
    pub cognitive: R,
    /// PSO pull toward the global best.
    pub social: R,
    /// Per-element velocity bound.
    pub velocity_clamp: R,
    /// Amplitude of the uniform perturbation in the wolf update.
    pub gwo_noise: R,
    /// Use the third-best wolf as the third reference instead of the
    /// literal worst.
    pub gwo_third_best: bool,
    /// Sample only non-empty codes and refill cells the repair emptied,
    /// so decoded grids keep full coverage.
    pub full_coverage: bool,
    /// Run connectivity repair on every decoded grid.
    pub repair_after_decode: bool,
    pub seed: u64,
}

impl<R: Scalar> Default for SwarmConfig<R> {
    fn default() -> Self {
        SwarmConfig {
            population: 40,
            generations: 200,
            inertia: R::from_f64_lossy(0.7),
            cognitive: R::from_f64_lossy(1.5),
            social: R::from_f64_lossy(1.5),
            velocity_clamp: R::from_f64_lossy(8.0),
            gwo_noise: R::from_f64_lossy(0.1),
            gwo_third_best: false,
            full_coverage: true,
            repair_after_decode: true,
            seed: 0,
        }
    }
}

/// Height x width x 16 tensor of per-cell tile-type scores.
#[derive(Clone, Debug, PartialEq)]
pub struct LogitField<R> {
    height: usize,
    width: usize,
    values: Vec<R>,
}

impl<R: Scalar> LogitField<R> {
    pub fn zeros(height: usize, width: usize) -> LogitField<R> {
        LogitField {
            height,
            width,
            values: vec![R::zero(); height * width * TILE_TYPES],
        }
    }

    /// Independent uniform draws in `[lo, hi]` for every element.
    pub fn uniform(
        height: usize,
        width: usize,
        lo: f64,
        hi: f64,
        rng: &mut ChaCha8Rng,
    ) -> LogitField<R> {
        let values = (0..height * width * TILE_TYPES)
            .map(|_| R::from_f64_lossy(lo + rng.random::<f64>() * (hi - lo)))
            .collect();
        LogitField {
            height,
            width,
            values,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    /// The 16 scores of one cell.
    pub fn cell(&self, row: usize, col: usize) -> &[R] {
        let base = (row * self.width + col) * TILE_TYPES;
        &self.values[base..base + TILE_TYPES]
    }

    pub fn set(&mut self, row: usize, col: usize, code: usize, value: R) {
        self.values[(row * self.width + col) * TILE_TYPES + code] = value;
    }

    /// Per-cell softmax, shifted by the cell maximum for stability; the
    /// result holds probabilities in place of logits.
    pub fn softmax(&self) -> LogitField<R> {
        let mut out = self.clone();
        for chunk in out.values.chunks_mut(TILE_TYPES) {
            softmax_in_place(chunk);
        }
        out
    }
}

fn softmax_in_place<R: Scalar>(scores: &mut [R]) {
    let max = scores
        .iter()
        .copied()
        .fold(R::neg_infinity(), |a, b| if b > a { b } else { a });
    let mut total = R::zero();
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total = total + *s;
    }
    for s in scores.iter_mut() {
        *s = *s / total;
    }
}

/// Samples one grid from the categorical decode of `field`, repairing
/// and refilling it per the configuration.
pub fn decode_sample<R: Scalar>(
    field: &LogitField<R>,
    cfg: &SwarmConfig<R>,
    rng: &mut ChaCha8Rng,
) -> Grid {
    let first = if cfg.full_coverage { 1 } else { 0 };
    let mut cells = Vec::with_capacity(field.height * field.width);
    for chunk in field.values.chunks(TILE_TYPES) {
        let allowed = &chunk[first..];
        let max = allowed
            .iter()
            .copied()
            .fold(R::neg_infinity(), |a, b| if b > a { b } else { a });
        let mut total = R::zero();
        let mut weights = [R::zero(); TILE_TYPES];
        for (k, &logit) in allowed.iter().enumerate() {
            let w = (logit - max).exp();
            weights[k] = w;
            total = total + w;
        }
        let mut u = R::from_f64_lossy(rng.random::<f64>()) * total;
        let mut picked = allowed.len() - 1;
        for (k, &w) in weights[..allowed.len()].iter().enumerate() {
            if u < w {
                picked = k;
                break;
            }
            u = u - w;
        }
        cells.push(TileCode::new((first + picked) as u8).expect("code in range"));
    }
    let grid = Grid::new(field.height, field.width, cells).expect("field shape is a grid");
    if !cfg.repair_after_decode {
        return grid;
    }
    let repaired = repair_full(&grid, default_budget(field.height, field.width)).grid;
    if cfg.full_coverage {
        enforce_coverage(&repaired)
    } else {
        repaired
    }
}

struct Particle<R> {
    position: LogitField<R>,
    velocity: LogitField<R>,
    best_position: LogitField<R>,
    best_fitness: FitnessValue<R>,
}

/// Final state of a swarm run.
#[derive(Clone, Debug)]
pub struct SwarmRun<R> {
    pub grid: Grid,
    pub fitness: FitnessValue<R>,
    /// Best-ever fitness after initialization and after each generation.
    pub trace: Vec<R>,
}

/// A stepping swarm; `run_swarm` drives it to completion.
pub struct Swarm<R> {
    method: SwarmMethod,
    cfg: SwarmConfig<R>,
    weights: FitnessWeights<R>,
    rng: ChaCha8Rng,
    particles: Vec<Particle<R>>,
    current: Vec<FitnessValue<R>>,
    best_position: LogitField<R>,
    best_grid: Grid,
    best_fitness: FitnessValue<R>,
    trace: Vec<R>,
    generation: usize,
}

impl<R: Scalar> Swarm<R> {
    /// Initializes positions and velocities uniformly in [-1, 1] and
    /// evaluates the starting population.
    pub fn new(
        method: SwarmMethod,
        height: usize,
        width: usize,
        cfg: SwarmConfig<R>,
        weights: FitnessWeights<R>,
    ) -> Swarm<R> {
        assert!(cfg.population >= 2, "swarm needs at least two particles");
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut particles = Vec::with_capacity(cfg.population);
        let mut current = Vec::with_capacity(cfg.population);
        let mut best_fitness = FitnessValue::invalid();
        let mut best_position = LogitField::zeros(height, width);
        let mut best_grid = Grid::filled(height, width, TileCode::EMPTY);
        let mut best_seen = false;
        for _ in 0..cfg.population {
            let position = LogitField::uniform(height, width, -1.0, 1.0, &mut rng);
            let velocity = LogitField::uniform(height, width, -1.0, 1.0, &mut rng);
            let grid = decode_sample(&position, &cfg, &mut rng);
            let (_, fit) = evaluate(&grid, &weights);
            if !best_seen || fit.better_than(best_fitness) {
                best_seen = true;
                best_fitness = fit;
                best_position = position.clone();
                best_grid = grid;
            }
            current.push(fit);
            particles.push(Particle {
                best_position: position.clone(),
                velocity,
                position,
                best_fitness: fit,
            });
        }
        let trace = vec![best_fitness.value()];
        Swarm {
            method,
            cfg,
            weights,
            rng,
            particles,
            current,
            best_position,
            best_grid,
            best_fitness,
            trace,
            generation: 0,
        }
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn best_fitness(&self) -> FitnessValue<R> {
        self.best_fitness
    }

    pub fn best_grid(&self) -> &Grid {
        &self.best_grid
    }

    pub fn trace(&self) -> &[R] {
        &self.trace
    }

    /// Advances one generation.
    pub fn step(&mut self) {
        match self.method {
            SwarmMethod::Pso => self.step_pso(),
            SwarmMethod::Gwo => self.step_gwo(),
        }
        self.generation += 1;
        self.trace.push(self.best_fitness.value());
    }

    fn step_pso(&mut self) {
        let SwarmConfig {
            inertia,
            cognitive,
            social,
            velocity_clamp,
            ..
        } = self.cfg;
        for i in 0..self.particles.len() {
            {
                let p = &mut self.particles[i];
                let gbest = &self.best_position;
                for j in 0..p.position.values.len() {
                    let r1 = R::from_f64_lossy(self.rng.random::<f64>());
                    let r2 = R::from_f64_lossy(self.rng.random::<f64>());
                    let x = p.position.values[j];
                    let v = inertia * p.velocity.values[j]
                        + cognitive * r1 * (p.best_position.values[j] - x)
                        + social * r2 * (gbest.values[j] - x);
                    let v = v.min(velocity_clamp).max(-velocity_clamp);
                    p.velocity.values[j] = v;
                    p.position.values[j] = x + v;
                }
            }
            self.evaluate_particle(i);
        }
    }

    fn step_gwo(&mut self) {
        let n = self.particles.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.current[a]
                .value()
                .partial_cmp(&self.current[b].value())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let alpha = self.particles[order[0]].position.clone();
        let beta = self.particles[order[1.min(n - 1)]].position.clone();
        let third = if self.cfg.gwo_third_best {
            order[2.min(n - 1)]
        } else {
            order[n - 1]
        };
        let omega = self.particles[third].position.clone();
        let three = R::from_f64_lossy(3.0);
        let amp = self.cfg.gwo_noise;
        for i in 0..n {
            {
                let p = &mut self.particles[i];
                for j in 0..p.position.values.len() {
                    // Mean of the three references, written so that a
                    // fully converged pack is an exact fixed point.
                    let a = alpha.values[j];
                    let mean = a + ((beta.values[j] - a) + (omega.values[j] - a)) / three;
                    let eps = amp * R::from_f64_lossy(self.rng.random::<f64>() * 2.0 - 1.0);
                    p.position.values[j] = mean + eps;
                }
            }
            self.evaluate_particle(i);
        }
    }

    /// Decodes particle `i`, then refreshes its personal best and the
    /// global best on strict improvement.
    fn evaluate_particle(&mut self, i: usize) {
        let grid = decode_sample(&self.particles[i].position, &self.cfg, &mut self.rng);
        let (_, fit) = evaluate(&grid, &self.weights);
        self.current[i] = fit;
        let p = &mut self.particles[i];
        if fit.better_than(p.best_fitness) {
            p.best_fitness = fit;
            p.best_position = p.position.clone();
        }
        if fit.better_than(self.best_fitness) {
            self.best_fitness = fit;
            self.best_position = self.particles[i].position.clone();
            self.best_grid = grid;
        }
    }

    /// Runs the configured number of generations.
    pub fn run(mut self) -> SwarmRun<R> {
        for _ in 0..self.cfg.generations {
            self.step();
        }
        SwarmRun {
            grid: self.best_grid,
            fitness: self.best_fitness,
            trace: self.trace,
        }
    }
}

/// Builds and runs a swarm in one call.
pub fn run_swarm<R: Scalar>(
    method: SwarmMethod,
    height: usize,
    width: usize,
    cfg: &SwarmConfig<R>,
    weights: &FitnessWeights<R>,
) -> SwarmRun<R> {
    Swarm::new(method, height, width, cfg.clone(), *weights).run()
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::metrics;

    fn small_cfg(seed: u64) -> SwarmConfig<f64> {
        SwarmConfig {
            population: 8,
            generations: 15,
            seed,
            ..SwarmConfig::default()
        }
    }

    #[test]
    fn softmax_rows_are_simplexes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let field = LogitField::<f64>::uniform(3, 4, -6.0, 6.0, &mut rng);
        let probs = field.softmax();
        for r in 0..3 {
            for c in 0..4 {
                let cell = probs.cell(r, c);
                let sum: f64 = cell.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
                assert!(cell.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let mut a = LogitField::<f64>::zeros(1, 1);
        let mut b = LogitField::<f64>::zeros(1, 1);
        for k in 0..TILE_TYPES {
            a.set(0, 0, k, k as f64 * 0.25);
            b.set(0, 0, k, k as f64 * 0.25 + 1000.0);
        }
        let (pa, pb) = (a.softmax(), b.softmax());
        for k in 0..TILE_TYPES {
            assert!((pa.cell(0, 0)[k] - pb.cell(0, 0)[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_survives_extreme_logits() {
        let mut field = LogitField::<f64>::zeros(1, 1);
        field.set(0, 0, 3, 50.0);
        let probs = field.softmax();
        let p = probs.cell(0, 0)[3];
        assert!(p >= 1.0 - 1e-9);
        assert!((probs.cell(0, 0).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // Very negative logits must not produce NaN.
        let mut cold = LogitField::<f64>::zeros(1, 1);
        for k in 0..TILE_TYPES {
            cold.set(0, 0, k, -1e6);
        }
        let p2 = cold.softmax();
        assert!((p2.cell(0, 0).iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flat_logits_decode_uniformly() {
        let field = LogitField::<f64>::zeros(2, 2);
        let cfg = SwarmConfig {
            full_coverage: false,
            repair_after_decode: false,
            ..SwarmConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0u64; TILE_TYPES];
        let draws = 2500;
        for _ in 0..draws {
            let g = decode_sample(&field, &cfg, &mut rng);
            for cell in g.cells() {
                counts[cell.value() as usize] += 1;
            }
        }
        let total = (draws * 4) as f64;
        let expected = total / TILE_TYPES as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 99.9th percentile of chi-squared with 15 degrees of freedom.
        assert!(chi2 < 37.70, "chi2 {chi2}, counts {counts:?}");
    }

    #[test]
    fn dominant_logits_decode_to_argmax() {
        let mut field = LogitField::<f64>::zeros(3, 3);
        for r in 0..3 {
            for c in 0..3 {
                field.set(r, c, (r * 3 + c) % 15 + 1, 60.0);
            }
        }
        let cfg = SwarmConfig {
            full_coverage: false,
            repair_after_decode: false,
            ..SwarmConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = decode_sample(&field, &cfg, &mut rng);
            for r in 0..3 {
                for c in 0..3 {
                    assert_eq!(g.get(r, c).value() as usize, (r * 3 + c) % 15 + 1);
                }
            }
        }
    }

    #[test]
    fn full_coverage_decode_never_samples_empty() {
        let field = LogitField::<f64>::zeros(4, 4);
        let cfg = SwarmConfig {
            repair_after_decode: false,
            ..SwarmConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let g = decode_sample(&field, &cfg, &mut rng);
            assert_eq!(g.occupied(), 16);
        }
    }

    #[test]
    fn default_decode_is_valid_and_covering() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let field = LogitField::<f64>::uniform(6, 6, -1.0, 1.0, &mut rng);
        let cfg = SwarmConfig::default();
        let g = decode_sample(&field, &cfg, &mut rng);
        assert_eq!(g.mismatch_count(), 0);
        assert_eq!(metrics::boundary_violations(&g), 0);
        assert_eq!(metrics::coverage(&g), 1.0);
    }

    #[test]
    fn pso_trace_is_monotone_and_deterministic() {
        let a = run_swarm(
            SwarmMethod::Pso,
            5,
            5,
            &small_cfg(77),
            &FitnessWeights::default(),
        );
        let b = run_swarm(
            SwarmMethod::Pso,
            5,
            5,
            &small_cfg(77),
            &FitnessWeights::default(),
        );
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.grid, b.grid);
        assert_eq!(a.trace.len(), 16);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        let c = run_swarm(
            SwarmMethod::Pso,
            5,
            5,
            &small_cfg(78),
            &FitnessWeights::default(),
        );
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn gwo_trace_is_monotone_and_deterministic() {
        let a = run_swarm(
            SwarmMethod::Gwo,
            5,
            5,
            &small_cfg(31),
            &FitnessWeights::default(),
        );
        let b = run_swarm(
            SwarmMethod::Gwo,
            5,
            5,
            &small_cfg(31),
            &FitnessWeights::default(),
        );
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.grid, b.grid);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn swarm_outputs_stay_valid_and_full() {
        for (method, seed) in [(SwarmMethod::Pso, 1u64), (SwarmMethod::Gwo, 2)] {
            let run = run_swarm(method, 6, 6, &small_cfg(seed), &FitnessWeights::default());
            assert_eq!(run.grid.mismatch_count(), 0);
            assert_eq!(metrics::boundary_violations(&run.grid), 0);
            assert_eq!(metrics::coverage(&run.grid), 1.0);
            assert!(run.fitness.is_valid());
        }
    }

    #[test]
    fn velocities_respect_the_clamp() {
        let cfg = SwarmConfig {
            velocity_clamp: 0.5,
            ..small_cfg(4)
        };
        let mut swarm = Swarm::new(
            SwarmMethod::Pso,
            4,
            4,
            cfg,
            FitnessWeights::<f64>::default(),
        );
        for _ in 0..5 {
            swarm.step();
            for p in &swarm.particles {
                assert!(p.velocity.values.iter().all(|v| v.abs() <= 0.5));
            }
        }
    }

    #[test]
    fn stationary_pack_with_zero_noise_stays_put() {
        let cfg = SwarmConfig {
            population: 3,
            generations: 1,
            gwo_noise: 0.0,
            ..SwarmConfig::default()
        };
        let mut swarm = Swarm::new(
            SwarmMethod::Gwo,
            3,
            3,
            cfg,
            FitnessWeights::<f64>::default(),
        );
        let shared = swarm.particles[0].position.clone();
        for p in swarm.particles.iter_mut() {
            p.position = shared.clone();
        }
        swarm.step();
        for p in &swarm.particles {
            assert_eq!(p.position, shared);
        }
    }

    #[test]
    fn gwo_reference_switch_changes_the_search() {
        let base = small_cfg(12);
        let literal = run_swarm(SwarmMethod::Gwo, 5, 5, &base, &FitnessWeights::default());
        let canonical = run_swarm(
            SwarmMethod::Gwo,
            5,
            5,
            &SwarmConfig {
                gwo_third_best: true,
                ..base
            },
            &FitnessWeights::default(),
        );
        assert_ne!(literal.trace, canonical.trace);
    }

    #[test]
    fn f32_instantiation_runs_the_full_pipeline() {
        let cfg = SwarmConfig::<f32> {
            population: 4,
            generations: 5,
            seed: 6,
            ..SwarmConfig::default()
        };
        let run = run_swarm(SwarmMethod::Pso, 4, 4, &cfg, &FitnessWeights::default());
        assert_eq!(run.grid.mismatch_count(), 0);
        assert_eq!(metrics::coverage(&run.grid), 1.0);
        assert!(run.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
