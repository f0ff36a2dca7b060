//! Discrete-time SI spreading and the symptom observation model.
//!
//! At every step each susceptible node with `r` infected neighbours becomes
//! infected with probability `1 - (1 - beta)^r`; all transitions of a step
//! are decided against the state at the start of that step. Spreading stops
//! at the first step where the infected fraction reaches `stop_fraction`,
//! and that step is cut short so the snapshot holds exactly
//! `ceil(stop_fraction * n)` infected nodes: its transmission attempts (one
//! per infected–susceptible edge, each succeeding with probability `beta`)
//! are played in uniformly random order until the target is met.
//! Each infected node of the snapshot is then observed independently with
//! probability `theta`; the infected nodes that were not observed are the
//! asymptomatic ones.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{generate_ba, generate_ws, GenParamsBA, GenParamsWS, Graph};
use crate::rng::{derive_seed, rng_from_seed, role_rng};
use crate::{Error, Result};

/// Infection rates an instance draws from uniformly.
pub const DEFAULT_BETA_CHOICES: [f64; 3] = [0.1, 0.3, 0.5];
/// Infected fraction at which the snapshot is taken.
pub const DEFAULT_STOP_FRACTION: f64 = 0.2;
/// The spreading loop fails after `STEP_CAP_PER_NODE * n` steps.
pub const STEP_CAP_PER_NODE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceChoice {
    Fixed(usize),
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicConfig {
    pub beta: f64,
    pub stop_fraction: f64,
    pub source: SourceChoice,
    pub seed: u64,
}

impl EpidemicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::invalid(format!("beta {} outside [0, 1]", self.beta)));
        }
        if !(self.stop_fraction > 0.0 && self.stop_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "stop fraction {} outside (0, 1]",
                self.stop_fraction
            )));
        }
        Ok(())
    }
}

/// Result of one SI run up to the snapshot step.
#[derive(Debug, Clone, PartialEq)]
pub struct SiRun {
    pub source: usize,
    /// Snapshot step: the first step at which the stop fraction was reached.
    pub t_h: u32,
    /// Step at which each node was infected, `None` if still susceptible.
    pub infection_step: Vec<Option<u32>>,
}

impl SiRun {
    /// Infected node ids at the snapshot, ascending.
    pub fn infected(&self) -> Vec<usize> {
        self.infection_step
            .iter()
            .enumerate()
            .filter_map(|(v, t)| t.map(|_| v))
            .collect()
    }
}

fn reached(count: usize, n: usize, stop_fraction: f64) -> bool {
    count as f64 / n as f64 >= stop_fraction
}

/// Mutable SI state on a fixed graph, advanced one synchronous step at a
/// time.
#[derive(Debug, Clone)]
pub struct SiState<'g> {
    graph: &'g Graph,
    infection_step: Vec<Option<u32>>,
    /// Infected-neighbour count r(v, t).
    pressure: Vec<u32>,
    on_boundary: Vec<bool>,
    /// Susceptible nodes with at least one infected neighbour (may hold stale
    /// entries until the next step prunes them).
    boundary: Vec<usize>,
    newly: Vec<usize>,
    infected_count: usize,
    t: u32,
}

impl<'g> SiState<'g> {
    /// State at step 0 with `initial` infected.
    pub fn new(graph: &'g Graph, initial: &[usize]) -> Self {
        let n = graph.node_count();
        let mut state = SiState {
            graph,
            infection_step: vec![None; n],
            pressure: vec![0; n],
            on_boundary: vec![false; n],
            boundary: Vec::new(),
            newly: Vec::new(),
            infected_count: 0,
            t: 0,
        };
        for &v in initial {
            if state.infection_step[v].is_none() {
                state.infect(v);
            }
        }
        state
    }

    fn infect(&mut self, v: usize) {
        self.infection_step[v] = Some(self.t);
        self.infected_count += 1;
        for &w in self.graph.neighbors(v) {
            self.pressure[w] += 1;
            if self.infection_step[w].is_none() && !self.on_boundary[w] {
                self.on_boundary[w] = true;
                self.boundary.push(w);
            }
        }
    }

    /// Advances one step and returns the nodes infected in it, ascending.
    /// Random draws are made for boundary nodes in ascending id order.
    pub fn step<R: Rng>(&mut self, beta: f64, rng: &mut R) -> &[usize] {
        let infection_step = &self.infection_step;
        self.boundary.retain(|&v| infection_step[v].is_none());
        self.boundary.sort_unstable();
        self.newly.clear();
        for &v in &self.boundary {
            let p = 1.0 - (1.0 - beta).powi(self.pressure[v] as i32);
            if rng.random::<f64>() < p {
                self.newly.push(v);
            }
        }
        self.t += 1;
        let newly = std::mem::take(&mut self.newly);
        for &v in &newly {
            self.on_boundary[v] = false;
            self.infect(v);
        }
        self.newly = newly;
        &self.newly
    }

    /// Like [`SiState::step`], but never takes the infected count past
    /// `cap`. If the step could overshoot, its transmission attempts (node
    /// `v` gets `r(v, t)` of them) are shuffled and played in order, each
    /// succeeding with probability `beta`, until `cap` is reached or the
    /// attempts run out. Every susceptible node still gets exactly `r(v, t)`
    /// independent attempts unless the cap stops the step early.
    pub fn step_capped<R: Rng>(&mut self, beta: f64, rng: &mut R, cap: usize) -> &[usize] {
        let infection_step = &self.infection_step;
        self.boundary.retain(|&v| infection_step[v].is_none());
        let room = cap.saturating_sub(self.infected_count);
        if self.boundary.len() <= room {
            return self.step(beta, rng);
        }
        self.boundary.sort_unstable();
        let mut attempts: Vec<usize> = self
            .boundary
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, self.pressure[v] as usize))
            .collect();
        attempts.shuffle(rng);
        self.newly.clear();
        for v in attempts {
            if self.newly.len() == room {
                break;
            }
            if self.on_boundary[v] && rng.random::<f64>() < beta {
                self.on_boundary[v] = false;
                self.newly.push(v);
            }
        }
        self.newly.sort_unstable();
        self.t += 1;
        let newly = std::mem::take(&mut self.newly);
        for &v in &newly {
            self.on_boundary[v] = false;
            self.infect(v);
        }
        self.newly = newly;
        &self.newly
    }

    pub fn time(&self) -> u32 {
        self.t
    }

    pub fn infected_count(&self) -> usize {
        self.infected_count
    }

    pub fn is_infected(&self, v: usize) -> bool {
        self.infection_step[v].is_some()
    }

    /// Number of infected neighbours of `v`.
    pub fn pressure(&self, v: usize) -> u32 {
        self.pressure[v]
    }

    fn has_frontier(&self) -> bool {
        self.boundary.iter().any(|&v| self.infection_step[v].is_none())
    }
}

/// Runs the SI process on `g` until the infected fraction reaches
/// `cfg.stop_fraction`.
pub fn simulate_si(g: &Graph, cfg: &EpidemicConfig) -> Result<SiRun> {
    cfg.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::invalid("cannot run an epidemic on an empty graph"));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let source = match cfg.source {
        SourceChoice::Fixed(s) if s < n => s,
        SourceChoice::Fixed(s) => {
            return Err(Error::invalid(format!("source {s} out of range for n = {n}")))
        }
        SourceChoice::Uniform => rng.random_range(0..n),
    };
    let target = (1..=n).find(|&c| reached(c, n, cfg.stop_fraction)).unwrap_or(n);
    let step_cap = STEP_CAP_PER_NODE * n;

    let mut state = SiState::new(g, &[source]);
    while !reached(state.infected_count(), n, cfg.stop_fraction) {
        if state.time() as usize >= step_cap || !state.has_frontier() {
            return Err(Error::StepCapExceeded {
                steps: state.time() as usize,
                target,
            });
        }
        state.step_capped(cfg.beta, &mut rng, target);
    }

    Ok(SiRun {
        source,
        t_h: state.time(),
        infection_step: state.infection_step,
    })
}

/// Observes each node of `infected` independently with probability `theta`.
/// Draws happen in the order of `infected`; the result keeps that order.
pub fn apply_observation(infected: &[usize], theta: f64, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!("theta {theta} outside [0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    Ok(infected
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < theta)
        .collect())
}

/// Random network family with its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NetworkModel {
    Ba { m: usize },
    Ws { k: usize, p: f64 },
}

impl NetworkModel {
    pub const DEFAULT_BA: NetworkModel = NetworkModel::Ba { m: 4 };
    pub const DEFAULT_WS: NetworkModel = NetworkModel::Ws { k: 8, p: 0.3 };

    pub fn name(&self) -> &'static str {
        match self {
            NetworkModel::Ba { .. } => "ba",
            NetworkModel::Ws { .. } => "ws",
        }
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<Graph> {
        match *self {
            NetworkModel::Ba { m } => generate_ba(&GenParamsBA { n, m, seed }),
            NetworkModel::Ws { k, p } => generate_ws(&GenParamsWS { n, k, p, seed }),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            NetworkModel::Ba { m } => GenParamsBA { n, m, seed: 0 }.validate(),
            NetworkModel::Ws { k, p } => GenParamsWS { n, k, p, seed: 0 }.validate(),
        }
    }
}

/// Everything needed to draw an instance besides its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub model: NetworkModel,
    pub n: usize,
    pub theta: f64,
    pub beta_choices: Vec<f64>,
    pub stop_fraction: f64,
}

impl InstanceSpec {
    /// Default infection rates and stop fraction.
    pub fn new(model: NetworkModel, n: usize, theta: f64) -> Self {
        InstanceSpec {
            model,
            n,
            theta,
            beta_choices: DEFAULT_BETA_CHOICES.to_vec(),
            stop_fraction: DEFAULT_STOP_FRACTION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate(self.n)?;
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::invalid(format!("theta {} outside [0, 1]", self.theta)));
        }
        if self.beta_choices.is_empty() {
            return Err(Error::invalid("no infection rates to choose from"));
        }
        for &beta in &self.beta_choices {
            EpidemicConfig {
                beta,
                stop_fraction: self.stop_fraction,
                source: SourceChoice::Uniform,
                seed: 0,
            }
            .validate()?;
        }
        Ok(())
    }
}

/// One snapshot problem: the network, the epidemic state at `t_h`, and which
/// infected nodes were observed.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicInstance {
    pub graph: Graph,
    pub source: usize,
    pub beta: f64,
    pub theta: f64,
    pub t_h: u32,
    /// Ascending.
    pub infected: Vec<usize>,
    /// Ascending subset of `infected`.
    pub observed: Vec<usize>,
}

impl EpidemicInstance {
    pub fn n(&self) -> usize {
        self.graph.node_count()
    }

    pub fn observed_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        for &v in &self.observed {
            mask[v] = true;
        }
        mask
    }

    /// Infected but unobserved nodes, ascending.
    pub fn asymptomatic(&self) -> Vec<usize> {
        let observed = self.observed_mask();
        self.infected.iter().copied().filter(|&v| !observed[v]).collect()
    }

    /// Ground truth per node: 1 for asymptomatic, 0 otherwise.
    pub fn labels(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        for v in self.asymptomatic() {
            y[v] = 1.0;
        }
        y
    }

    /// Evaluation pool: every node not observed as infected, ascending.
    pub fn pool(&self) -> Vec<usize> {
        let observed = self.observed_mask();
        (0..self.n()).filter(|&v| !observed[v]).collect()
    }

    /// Checks the structural invariants; `stop_fraction` bounds the infected
    /// count from below.
    pub fn validate(&self, stop_fraction: f64) -> Result<()> {
        let n = self.n();
        let sorted_unique = |ids: &[usize]| ids.windows(2).all(|w| w[0] < w[1]);
        if !sorted_unique(&self.infected) || !sorted_unique(&self.observed) {
            return Err(Error::Format("node sets must be strictly ascending".into()));
        }
        if self.infected.last().is_some_and(|&v| v >= n) {
            return Err(Error::Format("infected id out of range".into()));
        }
        if self.infected.binary_search(&self.source).is_err() {
            return Err(Error::Format(format!("source {} is not infected", self.source)));
        }
        if let Some(v) = self.observed.iter().find(|v| self.infected.binary_search(v).is_err()) {
            return Err(Error::Format(format!("observed node {v} is not infected")));
        }
        if !reached(self.infected.len(), n, stop_fraction) {
            return Err(Error::Format(format!(
                "{} infected of {n} is below the stop fraction {stop_fraction}",
                self.infected.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.beta) || !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Format("beta and theta must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Seed roles used by [`generate_instance`].
pub mod roles {
    pub const GRAPH: &str = "graph";
    pub const SOURCE: &str = "source";
    pub const BETA: &str = "beta";
    pub const EPIDEMIC: &str = "epidemic";
    pub const OBSERVATION: &str = "observation";
}

/// Draws one instance: network, uniform source, uniform rate from
/// `spec.beta_choices`, SI run to the stop fraction, then observation.
/// Each of the five parts uses its own sub-seed of `seed`.
pub fn generate_instance(spec: &InstanceSpec, seed: u64) -> Result<EpidemicInstance> {
    spec.validate()?;
    let graph = spec.model.generate(spec.n, derive_seed(seed, roles::GRAPH, 0))?;
    let source = role_rng(seed, roles::SOURCE).random_range(0..spec.n);
    let beta_index = role_rng(seed, roles::BETA).random_range(0..spec.beta_choices.len());
    let beta = spec.beta_choices[beta_index];
    let run = simulate_si(
        &graph,
        &EpidemicConfig {
            beta,
            stop_fraction: spec.stop_fraction,
            source: SourceChoice::Fixed(source),
            seed: derive_seed(seed, roles::EPIDEMIC, 0),
        },
    )?;
    let infected = run.infected();
    let observed = apply_observation(&infected, spec.theta, derive_seed(seed, roles::OBSERVATION, 0))?;
    Ok(EpidemicInstance {
        graph,
        source,
        beta,
        theta: spec.theta,
        t_h: run.t_h,
        infected,
        observed,
    })
}
