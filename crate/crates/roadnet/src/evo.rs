//! Evolutionary search with tournament selection and two mutation
//! operators, plus an optional MAP-Elites archive over behavior niches.
//!
//! Offspring go through tile-change mutation (a rate-sized batch of cells
//! redrawn from non-empty codes; large batches restructure but cannot
//! fine-tune, so the default stays small), crossing insertion (one cell
//! set to a random 3+ degree code), repair, and re-evaluation. Survivors
//! are the best mu of parents and offspring, parents winning ties. With
//! the archive enabled, every offspring competes for its niche; niches
//! only ever improve.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitness::{evaluate, FitnessValue, FitnessWeights};
use crate::grid::Grid;
use crate::metrics::{behavior_descriptor, BehaviorDescriptor};
use crate::num::Scalar;
use crate::repair::{default_budget, enforce_coverage, repair_full};
use crate::stats;
use crate::tiles::TileCode;

/// Candidate solution with its cached evaluation.
#[derive(Clone, Debug)]
pub struct Individual<R> {
    pub grid: Grid,
    pub fitness: FitnessValue<R>,
    pub descriptor: BehaviorDescriptor,
}

/// Quantized archive coordinates: a 25-way cyclomatic bin and four
/// binary bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NicheIndex {
    pub cyclomatic: u8,
    pub components: u8,
    pub dangling: u8,
    pub adjacent_crossings: u8,
    pub adjacent_turns: u8,
}

/// Cyclomatic bins 0..=24; larger values saturate into the last bin.
pub const CYCLOMATIC_BINS: usize = 25;

/// Upper bound on simultaneously occupied niches.
pub const MAX_NICHES: usize = CYCLOMATIC_BINS * 16;

/// Maps a behavior descriptor onto its niche.
pub fn quantize(b: &BehaviorDescriptor) -> NicheIndex {
    let binary = |n: usize| (n != 0) as u8;
    NicheIndex {
        cyclomatic: b.cyclomatic.min(CYCLOMATIC_BINS - 1) as u8,
        components: binary(b.components.saturating_sub(1)),
        dangling: binary(b.dangling),
        adjacent_crossings: binary(b.adjacent_crossings),
        adjacent_turns: binary(b.adjacent_turns),
    }
}

/// Best individual seen per niche.
#[derive(Clone, Debug, Default)]
pub struct EliteArchive<R> {
    entries: BTreeMap<NicheIndex, Individual<R>>,
}

impl<R: Scalar> EliteArchive<R> {
    pub fn new() -> EliteArchive<R> {
        EliteArchive {
            entries: BTreeMap::new(),
        }
    }

    /// Offers an individual to its niche. Stores it when the niche is
    /// empty or the incumbent is strictly worse; returns true on store.
    pub fn consider(&mut self, candidate: Individual<R>) -> bool {
        let niche = quantize(&candidate.descriptor);
        match self.entries.get(&niche) {
            Some(elite) if !candidate.fitness.better_than(elite.fitness) => false,
            _ => {
                self.entries.insert(niche, candidate);
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, niche: &NicheIndex) -> Option<&Individual<R>> {
        self.entries.get(niche)
    }

    /// Niches and elites in index order.
    pub fn iter(&self) -> impl Iterator<Item = (&NicheIndex, &Individual<R>)> {
        self.entries.iter()
    }

    /// The lowest-fitness elite, if any.
    pub fn best(&self) -> Option<&Individual<R>> {
        self.entries.values().min_by(|a, b| {
            a.fitness
                .value()
                .partial_cmp(&b.fitness.value())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

/// Errors from archive analytics.
#[derive(Debug, Error)]
pub enum EvoError {
    #[error("archive is empty")]
    EmptyArchive,
}

/// Spread of one descriptor axis across archive elites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadStats {
    pub min: usize,
    pub max: usize,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

/// Occupancy plus per-axis spread of an archive.
#[derive(Clone, Debug, Serialize)]
pub struct ArchiveSpread {
    pub occupied: usize,
    pub components: SpreadStats,
    pub cyclomatic: SpreadStats,
    pub dangling: SpreadStats,
    pub adjacent_crossings: SpreadStats,
    pub adjacent_turns: SpreadStats,
}

/// Computes descriptor spread statistics over the archive elites.
pub fn archive_spread<R: Scalar>(archive: &EliteArchive<R>) -> Result<ArchiveSpread, EvoError> {
    if archive.is_empty() {
        return Err(EvoError::EmptyArchive);
    }
    let axis = |pick: fn(&BehaviorDescriptor) -> usize| {
        let values: Vec<usize> = archive
            .entries
            .values()
            .map(|e| pick(&e.descriptor))
            .collect();
        let floats: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let (q1, _, q3) = stats::quartiles(&floats);
        SpreadStats {
            min: *values.iter().min().expect("non-empty"),
            max: *values.iter().max().expect("non-empty"),
            q1,
            q3,
            iqr: q3 - q1,
        }
    };
    Ok(ArchiveSpread {
        occupied: archive.len(),
        components: axis(|d| d.components),
        cyclomatic: axis(|d| d.cyclomatic),
        dangling: axis(|d| d.dangling),
        adjacent_crossings: axis(|d| d.adjacent_crossings),
        adjacent_turns: axis(|d| d.adjacent_turns),
    })
}

/// Run settings for the evolutionary algorithm and its MAP-Elites
/// extension.
#[derive(Clone, Debug)]
pub struct EvoConfig<R> {
    /// Parent population size.
    pub mu: usize,
    /// Offspring per generation.
    pub lambda: usize,
    pub generations: usize,
    pub tournament_size: usize,
    /// Probability the tile-change operator fires on an offspring.
    pub p_tile_change: R,
    /// Probability the crossing-insertion operator fires.
    pub p_crossing_insert: R,
    /// Fraction of cells one tile-change application redraws (at least
    /// one cell; the default redraws four cells on a 12x12 grid).
    pub mutation_rate: R,
    /// Maintain the behavior archive.
    pub map_elites: bool,
    pub seed: u64,
}

impl<R: Scalar> Default for EvoConfig<R> {
    fn default() -> Self {
        EvoConfig {
            mu: 40,
            lambda: 40,
            generations: 200,
            tournament_size: 3,
            p_tile_change: R::from_f64_lossy(0.7),
            p_crossing_insert: R::from_f64_lossy(0.5),
            mutation_rate: R::from_f64_lossy(0.028),
            map_elites: false,
            seed: 0,
        }
    }
}

/// Selects the strict-best of `k` uniform draws (with replacement);
/// ties keep the earliest-sampled contender.
pub fn tournament_select<'a, R: Scalar>(
    population: &'a [Individual<R>],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> &'a Individual<R> {
    assert!(!population.is_empty(), "empty population");
    assert!(k >= 1, "tournament needs at least one contender");
    let mut best = rng.random_range(0..population.len());
    for _ in 1..k {
        let challenger = rng.random_range(0..population.len());
        if population[challenger]
            .fitness
            .better_than(population[best].fitness)
        {
            best = challenger;
        }
    }
    &population[best]
}

fn finish_individual<R: Scalar>(grid: Grid, weights: &FitnessWeights<R>) -> Individual<R> {
    let repaired = repair_full(&grid, default_budget(grid.height(), grid.width())).grid;
    let full = enforce_coverage(&repaired);
    let (report, fitness) = evaluate(&full, weights);
    Individual {
        grid: full,
        fitness,
        descriptor: behavior_descriptor(&report),
    }
}

fn random_individual<R: Scalar>(
    height: usize,
    width: usize,
    weights: &FitnessWeights<R>,
    rng: &mut ChaCha8Rng,
) -> Individual<R> {
    let cells = (0..height * width)
        .map(|_| TileCode::new(rng.random_range(1..=15)).expect("non-empty code"))
        .collect();
    let grid = Grid::new(height, width, cells).expect("shape is consistent");
    finish_individual(grid, weights)
}

/// Applies both mutation operators to a copy of `parent`, then repairs
/// and re-evaluates it.
pub fn mutate<R: Scalar>(
    parent: &Individual<R>,
    cfg: &EvoConfig<R>,
    weights: &FitnessWeights<R>,
    rng: &mut ChaCha8Rng,
) -> Individual<R> {
    let mut grid = parent.grid.clone();
    let cell_count = grid.height() * grid.width();
    if rng.random_bool(probability(cfg.p_tile_change)) {
        let batch = tile_change_batch(cfg.mutation_rate, cell_count);
        for idx in rand::seq::index::sample(rng, cell_count, batch) {
            let (r, c) = (idx / grid.width(), idx % grid.width());
            let current = grid.get(r, c).value();
            // Uniform over the non-empty codes differing from the
            // current one.
            let code = if current == 0 {
                rng.random_range(1..=15)
            } else {
                let draw = rng.random_range(1..=14);
                if draw >= current {
                    draw + 1
                } else {
                    draw
                }
            };
            grid.set(r, c, TileCode::new(code).expect("code in range"));
        }
    }
    if rng.random_bool(probability(cfg.p_crossing_insert)) {
        let idx = rng.random_range(0..cell_count);
        let code = TileCode::CROSSINGS[rng.random_range(0..TileCode::CROSSINGS.len())];
        grid.set(idx / grid.width(), idx % grid.width(), code);
    }
    finish_individual(grid, weights)
}

/// Cells redrawn by one tile-change application: `round(rate * cells)`,
/// clamped to `1..=cells`.
fn tile_change_batch<R: Scalar>(rate: R, cell_count: usize) -> usize {
    let batch = (rate.to_f64().expect("rate fits f64") * cell_count as f64)
        .round()
        .max(1.0) as usize;
    batch.min(cell_count)
}

fn probability<R: Scalar>(p: R) -> f64 {
    p.to_f64().expect("probability fits f64").clamp(0.0, 1.0)
}

/// A stepping evolutionary run; `evolve` drives it to completion.
pub struct Evolution<R> {
    cfg: EvoConfig<R>,
    weights: FitnessWeights<R>,
    rng: ChaCha8Rng,
    population: Vec<Individual<R>>,
    archive: EliteArchive<R>,
    best: Individual<R>,
    trace: Vec<R>,
    generation: usize,
}

impl<R: Scalar> Evolution<R> {
    /// Seeds mu random full-coverage individuals. The initial population
    /// is not offered to the archive; only offspring compete.
    pub fn new(
        height: usize,
        width: usize,
        cfg: EvoConfig<R>,
        weights: FitnessWeights<R>,
    ) -> Evolution<R> {
        assert!(
            cfg.mu >= 1 && cfg.lambda >= 1,
            "degenerate population sizes"
        );
        assert!(cfg.tournament_size >= 1, "degenerate tournament");
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let population: Vec<Individual<R>> = (0..cfg.mu)
            .map(|_| random_individual(height, width, &weights, &mut rng))
            .collect();
        let best = population
            .iter()
            .fold(None::<&Individual<R>>, |acc, ind| match acc {
                Some(b) if !ind.fitness.better_than(b.fitness) => Some(b),
                _ => Some(ind),
            })
            .expect("mu >= 1")
            .clone();
        let trace = vec![best.fitness.value()];
        Evolution {
            cfg,
            weights,
            rng,
            population,
            archive: EliteArchive::new(),
            best,
            trace,
            generation: 0,
        }
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population(&self) -> &[Individual<R>] {
        &self.population
    }

    pub fn archive(&self) -> &EliteArchive<R> {
        &self.archive
    }

    pub fn best(&self) -> &Individual<R> {
        &self.best
    }

    pub fn trace(&self) -> &[R] {
        &self.trace
    }

    /// Breeds lambda offspring, archives them if enabled, and keeps the
    /// best mu of parents and offspring (parents win ties).
    pub fn step(&mut self) {
        let mut offspring = Vec::with_capacity(self.cfg.lambda);
        for _ in 0..self.cfg.lambda {
            let parent =
                tournament_select(&self.population, self.cfg.tournament_size, &mut self.rng);
            let child = mutate(parent, &self.cfg, &self.weights, &mut self.rng);
            if self.cfg.map_elites {
                self.archive.consider(child.clone());
            }
            if child.fitness.better_than(self.best.fitness) {
                self.best = child.clone();
            }
            offspring.push(child);
        }
        let mut pool = std::mem::take(&mut self.population);
        pool.extend(offspring);
        pool.sort_by(|a, b| {
            a.fitness
                .value()
                .partial_cmp(&b.fitness.value())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        pool.truncate(self.cfg.mu);
        self.population = pool;
        self.generation += 1;
        self.trace.push(self.best.fitness.value());
    }
}

/// Final state of an evolutionary run.
pub struct EvoResult<R> {
    pub population: Vec<Individual<R>>,
    pub archive: EliteArchive<R>,
    pub best: Individual<R>,
    /// Best-ever fitness after initialization and after each generation.
    pub trace: Vec<R>,
}

/// Runs the configured number of generations.
pub fn evolve<R: Scalar>(
    height: usize,
    width: usize,
    cfg: &EvoConfig<R>,
    weights: &FitnessWeights<R>,
) -> EvoResult<R> {
    let mut evolution = Evolution::new(height, width, cfg.clone(), *weights);
    for _ in 0..cfg.generations {
        evolution.step();
    }
    EvoResult {
        population: evolution.population,
        archive: evolution.archive,
        best: evolution.best,
        trace: evolution.trace,
    }
}
