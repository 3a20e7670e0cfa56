//! Trip and epoch lifecycle of the agent population.
//!
//! Every trip, each agent anticipates a utility for both modes, adds the
//! conformity bonus, chooses by softmax, then experiences a freshly sampled
//! trip on the chosen mode. The realized perceived utilities (without any
//! conformity bonus) go into the agent's epoch ledger. After
//! `trips_per_epoch` trips every non-stabilized agent updates its semantic
//! distances.
//!
//! All randomness comes from per-(agent, trip, purpose) ChaCha streams
//! derived from the master seed, so results do not depend on evaluation
//! order and agents can be processed in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identity::{
    is_stabilized, perceived_utility, update_distances, AdaptationParams, EpochLedger,
    IdentityProfile, Schema,
};
use crate::network::{conformity_bonus, generate_erdos_renyi, neighbor_fraction, SocialGraph};
use crate::transit::{
    default_value_schema, observe_trip, perceive, PerceptionParams, TransitMode, TransitParams,
    TripObservation, Value, OBSERVABLES,
};

const MODES: usize = 2;

/// Uniform range `[lo, hi]` for an initial semantic distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct DistanceRange {
    pub lo: f64,
    pub hi: f64,
}

impl DistanceRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        DistanceRange { lo, hi }
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl From<[f64; 2]> for DistanceRange {
    fn from([lo, hi]: [f64; 2]) -> Self {
        DistanceRange { lo, hi }
    }
}

impl From<DistanceRange> for [f64; 2] {
    fn from(r: DistanceRange) -> Self {
        [r.lo, r.hi]
    }
}

/// Initial distance range per value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialDistances {
    pub frugalism: DistanceRange,
    pub idealism: DistanceRange,
    pub individualism: DistanceRange,
    pub pragmatism: DistanceRange,
}

impl Default for InitialDistances {
    fn default() -> Self {
        Self::uniform(DistanceRange::new(0.0, 4.0))
    }
}

impl InitialDistances {
    pub fn uniform(range: DistanceRange) -> Self {
        InitialDistances {
            frugalism: range,
            idealism: range,
            individualism: range,
            pragmatism: range,
        }
    }

    /// All values from `U[0, 4]` except `reduced`, drawn from `U[0, 2]`.
    pub fn reduced(reduced: Value) -> Self {
        let mut init = Self::default();
        *init.get_mut(reduced) = DistanceRange::new(0.0, 2.0);
        init
    }

    pub fn get(&self, value: Value) -> DistanceRange {
        match value {
            Value::Frugalism => self.frugalism,
            Value::Idealism => self.idealism,
            Value::Individualism => self.individualism,
            Value::Pragmatism => self.pragmatism,
        }
    }

    pub fn get_mut(&mut self, value: Value) -> &mut DistanceRange {
        match value {
            Value::Frugalism => &mut self.frugalism,
            Value::Idealism => &mut self.idealism,
            Value::Individualism => &mut self.individualism,
            Value::Pragmatism => &mut self.pragmatism,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphParams {
    pub edge_probability: f64,
    /// Defaults to a seed derived from the master seed.
    pub seed: Option<u64>,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            edge_probability: 0.02,
            seed: None,
        }
    }
}

/// How an agent forms its expectation of each mode before choosing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anticipation {
    /// One freshly sampled prospective trip per mode.
    #[default]
    Sample,
    /// The trip at mean travel time and mean occupancy.
    Expected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub n_agents: usize,
    pub gamma: f64,
    pub initial_distances: InitialDistances,
    pub trips_per_epoch: usize,
    pub max_epochs: usize,
    pub adaptation: AdaptationParams,
    pub perception: PerceptionParams,
    pub modes: TransitParams,
    pub graph: GraphParams,
    pub cf: f64,
    pub choice_temperature: f64,
    pub anticipation: Anticipation,
    pub master_seed: u64,
    /// Keep every per-agent trip record in memory.
    pub record_trips: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_agents: 500,
            gamma: 0.8,
            initial_distances: InitialDistances::default(),
            trips_per_epoch: 10,
            max_epochs: 200,
            adaptation: AdaptationParams::default(),
            perception: PerceptionParams::default(),
            modes: TransitParams::default(),
            graph: GraphParams::default(),
            cf: 0.0,
            choice_temperature: 0.15,
            anticipation: Anticipation::Sample,
            master_seed: 20_250_101,
            record_trips: false,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(Error::validation("n_agents", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::validation("gamma", "must lie in [0, 1]"));
        }
        if self.trips_per_epoch < 1 {
            return Err(Error::validation("trips_per_epoch", "must be at least 1"));
        }
        if !(self.choice_temperature > 0.0 && self.choice_temperature.is_finite()) {
            return Err(Error::validation("choice_temperature", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.cf) {
            return Err(Error::validation("cf", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.graph.edge_probability) {
            return Err(Error::validation(
                "graph.edge_probability",
                "must lie in [0, 1]",
            ));
        }
        self.adaptation.validate()?;
        self.perception.validate()?;
        self.modes.validate()?;
        for value in Value::ALL {
            let r = self.initial_distances.get(value);
            let field = format!("initial_distances.{value}");
            if !(r.lo.is_finite() && r.hi.is_finite()) || r.lo > r.hi {
                return Err(Error::validation(
                    field,
                    format!("invalid range [{}, {}]", r.lo, r.hi),
                ));
            }
            if r.lo < self.adaptation.d_min || r.hi > self.adaptation.d_max {
                return Err(Error::validation(
                    field,
                    format!(
                        "range [{}, {}] leaves [d_min, d_max] = [{}, {}]",
                        r.lo, r.hi, self.adaptation.d_min, self.adaptation.d_max
                    ),
                ));
            }
        }
        if self.gamma == 0.0
            && Value::ALL
                .iter()
                .all(|&v| self.initial_distances.get(v).hi > 0.0)
        {
            return Err(Error::validation(
                "gamma",
                "gamma = 0 needs at least one value initialized at distance 0",
            ));
        }
        Ok(())
    }

    pub fn graph_seed(&self) -> u64 {
        self.graph
            .seed
            .unwrap_or_else(|| mix(self.master_seed ^ 0x6772_6170_685f_7365))
    }
}

/// Purpose of a random stream.
#[derive(Clone, Copy, Debug)]
enum Stream {
    Init = 1,
    AnticipateBus = 2,
    AnticipateTaxi = 3,
    Choice = 4,
    Realized = 5,
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_rng(master_seed: u64, agent: usize, trip: u64, stream: Stream) -> ChaCha8Rng {
    let seed = mix(mix(mix(master_seed) ^ agent as u64) ^ trip) ^ stream as u64;
    ChaCha8Rng::seed_from_u64(mix(seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub profile: IdentityProfile,
    pub ledger: EpochLedger,
    pub last_choice: Option<TransitMode>,
    /// Per epoch, which distances changed.
    pub change_history: Vec<Vec<bool>>,
    pub stabilized: bool,
}

impl AgentState {
    pub fn new(profile: IdentityProfile) -> Self {
        let m = profile.len();
        AgentState {
            profile,
            ledger: EpochLedger::new(m),
            last_choice: None,
            change_history: Vec::new(),
            stabilized: false,
        }
    }
}

/// Draws every agent's initial profile and, unless `with_graph` is false,
/// the social graph.
pub fn initialize_population(
    config: &SimulationConfig,
    with_graph: bool,
) -> Result<(Vec<AgentState>, Option<SocialGraph>)> {
    config.validate()?;
    let labels: Vec<String> = Value::ALL.iter().map(|v| v.name().to_string()).collect();
    let agents = (0..config.n_agents)
        .map(|id| {
            let mut rng = stream_rng(config.master_seed, id, u64::MAX, Stream::Init);
            let distances = Value::ALL
                .iter()
                .map(|&v| {
                    let r = config.initial_distances.get(v);
                    r.lo + (r.hi - r.lo) * rng.random::<f64>()
                })
                .collect();
            IdentityProfile::new(labels.clone(), distances, config.gamma).map(AgentState::new)
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = if with_graph {
        Some(generate_erdos_renyi(
            config.n_agents,
            config.graph.edge_probability,
            config.graph_seed(),
        )?)
    } else {
        None
    };
    Ok((agents, graph))
}

/// Per-mode anticipated utilities, indexed by [`TransitMode::index`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anticipated {
    /// Identity-mediated utility, before conformity.
    pub identity: [f64; MODES],
    pub bonus: [f64; MODES],
}

impl Anticipated {
    pub fn total(&self) -> [f64; MODES] {
        [
            self.identity[0] + self.bonus[0],
            self.identity[1] + self.bonus[1],
        ]
    }
}

/// Shared read-only context for evaluating agents during one trip.
pub struct TripContext<'a> {
    pub config: &'a SimulationConfig,
    pub schema: &'a Schema,
    pub graph: Option<&'a SocialGraph>,
    /// Everyone's choice on the previous trip; `None` before the first trip.
    pub previous_choices: Option<&'a [TransitMode]>,
    pub trip_index: u64,
}

impl TripContext<'_> {
    fn fraction(&self, agent_id: usize, mode: TransitMode) -> Result<f64> {
        match self.graph {
            Some(g) => neighbor_fraction(g, agent_id, mode, self.previous_choices),
            None => Ok(crate::network::NO_INFORMATION_FRACTION),
        }
    }
}

/// Anticipated utility of each mode for one agent, conformity included.
///
/// In sampling mode each mode is evaluated on one prospective trip drawn
/// from its own stream.
pub fn anticipated_utilities(
    agent_id: usize,
    agent: &AgentState,
    ctx: &TripContext<'_>,
) -> Result<Anticipated> {
    let config = ctx.config;
    let mut identity = [0.0; MODES];
    let mut bonus = [0.0; MODES];
    for mode in TransitMode::ALL {
        let observation = match config.anticipation {
            Anticipation::Sample => {
                let stream = match mode {
                    TransitMode::Bus => Stream::AnticipateBus,
                    TransitMode::Taxi => Stream::AnticipateTaxi,
                };
                let mut rng = stream_rng(config.master_seed, agent_id, ctx.trip_index, stream);
                observe_trip(mode, &config.modes, &mut rng)
            }
            Anticipation::Expected => TripObservation::expected(&config.modes, mode),
        };
        let utils = perceive(&observation, &config.perception);
        identity[mode.index()] = perceived_utility(&agent.profile, ctx.schema, &utils)?;
        bonus[mode.index()] = conformity_bonus(config.cf, ctx.fraction(agent_id, mode)?);
    }
    Ok(Anticipated { identity, bonus })
}

/// Softmax probabilities `exp(u / T) / sum exp(u / T)`, max-subtracted.
pub fn choice_probabilities(utilities: &[f64], temperature: f64) -> Vec<f64> {
    let max = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = utilities
        .iter()
        .map(|u| ((u - max) / temperature).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Picks the mode at which a uniform draw falls in the softmax CDF.
pub fn choose<R: Rng + ?Sized>(
    utilities: &[f64; MODES],
    temperature: f64,
    rng: &mut R,
) -> TransitMode {
    let probabilities = choice_probabilities(utilities, temperature);
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return TransitMode::from_index(i).expect("two modes");
        }
    }
    TransitMode::from_index(MODES - 1).expect("two modes")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripRecord {
    pub trip_index: u64,
    pub agent_id: usize,
    /// Total per-mode utility the choice was made on.
    pub anticipated_utilities: [f64; MODES],
    pub conformity_bonuses: [f64; MODES],
    pub chosen: TransitMode,
    pub realized_observation: TripObservation,
    pub realized_perceived: [f64; OBSERVABLES],
}

/// One agent's full trip: anticipate, choose, experience.
fn agent_trip(agent_id: usize, agent: &AgentState, ctx: &TripContext<'_>) -> Result<TripRecord> {
    let config = ctx.config;
    let anticipated = anticipated_utilities(agent_id, agent, ctx)?;
    let totals = anticipated.total();
    let mut choice_rng = stream_rng(config.master_seed, agent_id, ctx.trip_index, Stream::Choice);
    let chosen = choose(&totals, config.choice_temperature, &mut choice_rng);
    let mut realized_rng = stream_rng(
        config.master_seed,
        agent_id,
        ctx.trip_index,
        Stream::Realized,
    );
    let realized_observation = observe_trip(chosen, &config.modes, &mut realized_rng);
    let realized_perceived = perceive(&realized_observation, &config.perception);
    Ok(TripRecord {
        trip_index: ctx.trip_index,
        agent_id,
        anticipated_utilities: totals,
        conformity_bonuses: anticipated.bonus,
        chosen,
        realized_observation,
        realized_perceived,
    })
}

/// Runs one trip for the whole population. Choices are made against the
/// frozen `previous_choices` snapshot; `last_choice` is updated only after
/// every agent has chosen.
pub fn run_trip(agents: &mut [AgentState], ctx: &TripContext<'_>) -> Result<Vec<TripRecord>> {
    let records = agents
        .par_iter()
        .enumerate()
        .map(|(id, agent)| agent_trip(id, agent, ctx))
        .collect::<Result<Vec<_>>>()?;
    for (agent, record) in agents.iter_mut().zip(&records) {
        agent
            .ledger
            .record_run(ctx.schema, &record.realized_perceived)?;
        agent.last_choice = Some(record.chosen);
    }
    Ok(records)
}

/// Epoch-boundary adaptation. Stabilized agents keep their distances.
pub fn end_epoch(agents: &mut [AgentState], config: &SimulationConfig) -> Result<()> {
    agents.par_iter_mut().try_for_each(|agent| -> Result<()> {
        if !agent.stabilized {
            let (profile, changed) = update_distances(
                &agent.profile,
                &agent.ledger,
                &config.adaptation,
                config.trips_per_epoch,
            )?;
            agent.profile = profile;
            agent.change_history.push(changed);
            agent.stabilized = is_stabilized(&agent.change_history, &config.adaptation);
        }
        agent.ledger.reset();
        Ok(())
    })
}

/// Mean distances of a group of agents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupDistances {
    pub count: usize,
    /// Per value, in [`Value::ALL`] order. NaN when the group is empty.
    pub mean_distance: [f64; 4],
}

impl GroupDistances {
    fn of<'a>(agents: impl Iterator<Item = &'a AgentState>) -> Self {
        let mut sum = [0.0; 4];
        let mut count = 0;
        for a in agents {
            for (s, d) in sum.iter_mut().zip(a.profile.distances()) {
                *s += d;
            }
            count += 1;
        }
        GroupDistances {
            count,
            mean_distance: sum.map(|s| {
                if count > 0 {
                    s / count as f64
                } else {
                    f64::NAN
                }
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subpopulation {
    All,
    Bus,
    Taxi,
}

impl Subpopulation {
    pub const ALL: [Subpopulation; 3] =
        [Subpopulation::All, Subpopulation::Bus, Subpopulation::Taxi];

    pub fn name(self) -> &'static str {
        match self {
            Subpopulation::All => "all",
            Subpopulation::Bus => "bus",
            Subpopulation::Taxi => "taxi",
        }
    }
}

/// Population state after an epoch (epoch 0 is the initial state).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub stabilized_fraction: f64,
    /// Whole population, then grouped by last choice.
    pub all: GroupDistances,
    pub bus: GroupDistances,
    pub taxi: GroupDistances,
}

impl EpochMetrics {
    fn snapshot(epoch: usize, agents: &[AgentState]) -> Self {
        let by =
            |mode| GroupDistances::of(agents.iter().filter(move |a| a.last_choice == Some(mode)));
        EpochMetrics {
            epoch,
            stabilized_fraction: agents.iter().filter(|a| a.stabilized).count() as f64
                / agents.len() as f64,
            all: GroupDistances::of(agents.iter()),
            bus: by(TransitMode::Bus),
            taxi: by(TransitMode::Taxi),
        }
    }

    pub fn group(&self, sub: Subpopulation) -> &GroupDistances {
        match sub {
            Subpopulation::All => &self.all,
            Subpopulation::Bus => &self.bus,
            Subpopulation::Taxi => &self.taxi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripMetrics {
    pub trip_index: u64,
    pub epoch: usize,
    pub bus_fraction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    AllStabilized,
    MaxEpochs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub epochs_run: usize,
    pub halt_reason: HaltReason,
    pub stabilized_count: usize,
    pub stabilized_fraction: f64,
    /// Share of stabilized agents whose last choice was the bus; `None`
    /// when no agent stabilized.
    pub public_transit_share_stabilized: Option<f64>,
    /// Share of all agents whose last choice was the bus.
    pub public_transit_share_all: f64,
}

impl RunSummary {
    /// Public-transit share among stabilized agents, or among everyone
    /// when nobody stabilized.
    pub fn public_transit_share(&self) -> f64 {
        self.public_transit_share_stabilized
            .unwrap_or(self.public_transit_share_all)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationMetrics {
    pub trips: Vec<TripMetrics>,
    pub epochs: Vec<EpochMetrics>,
    pub summary: RunSummary,
}

pub struct SimulationOutput {
    pub metrics: PopulationMetrics,
    /// Per-agent trip records, kept only when `record_trips` is set.
    pub records: Vec<TripRecord>,
    pub agents: Vec<AgentState>,
    pub graph: Option<SocialGraph>,
}

/// A population evolving trip by trip.
pub struct Simulation {
    config: SimulationConfig,
    schema: Schema,
    graph: Option<SocialGraph>,
    agents: Vec<AgentState>,
    trip_index: u64,
    epoch: usize,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        Self::build(config, true)
    }

    /// A population with no social graph; every neighbour fraction is 0.5.
    pub fn without_graph(config: SimulationConfig) -> Result<Self> {
        Self::build(config, false)
    }

    fn build(config: SimulationConfig, with_graph: bool) -> Result<Self> {
        let (agents, graph) = initialize_population(&config, with_graph)?;
        Ok(Simulation {
            config,
            schema: default_value_schema(),
            graph,
            agents,
            trip_index: 0,
            epoch: 0,
        })
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn graph(&self) -> Option<&SocialGraph> {
        self.graph.as_ref()
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn step_trip(&mut self) -> Result<Vec<TripRecord>> {
        let previous: Option<Vec<TransitMode>> = if self.trip_index == 0 {
            None
        } else {
            self.agents.iter().map(|a| a.last_choice).collect()
        };
        let ctx = TripContext {
            config: &self.config,
            schema: &self.schema,
            graph: self.graph.as_ref(),
            previous_choices: previous.as_deref(),
            trip_index: self.trip_index,
        };
        let records = run_trip(&mut self.agents, &ctx)?;
        self.trip_index += 1;
        Ok(records)
    }

    pub fn end_epoch(&mut self) -> Result<()> {
        end_epoch(&mut self.agents, &self.config)?;
        self.epoch += 1;
        Ok(())
    }

    pub fn all_stabilized(&self) -> bool {
        self.agents.iter().all(|a| a.stabilized)
    }

    /// Runs epochs until everyone is stabilized or `max_epochs` is reached.
    pub fn run(mut self) -> Result<SimulationOutput> {
        let n = self.agents.len() as f64;
        let mut trips = Vec::new();
        let mut epochs = vec![EpochMetrics::snapshot(0, &self.agents)];
        let mut records = Vec::new();
        let mut halt_reason = HaltReason::MaxEpochs;
        while self.epoch < self.config.max_epochs {
            if self.all_stabilized() {
                halt_reason = HaltReason::AllStabilized;
                break;
            }
            for _ in 0..self.config.trips_per_epoch {
                let trip_index = self.trip_index;
                let trip_records = self.step_trip()?;
                let bus = trip_records
                    .iter()
                    .filter(|r| r.chosen == TransitMode::Bus)
                    .count();
                trips.push(TripMetrics {
                    trip_index,
                    epoch: self.epoch + 1,
                    bus_fraction: bus as f64 / n,
                });
                if self.config.record_trips {
                    records.extend(trip_records);
                }
            }
            self.end_epoch()?;
            epochs.push(EpochMetrics::snapshot(self.epoch, &self.agents));
        }
        if self.epoch == self.config.max_epochs && self.all_stabilized() {
            halt_reason = HaltReason::AllStabilized;
        }

        let stabilized: Vec<&AgentState> = self.agents.iter().filter(|a| a.stabilized).collect();
        let bus_share = |group: &[&AgentState]| {
            group
                .iter()
                .filter(|a| a.last_choice == Some(TransitMode::Bus))
                .count() as f64
                / group.len() as f64
        };
        let everyone: Vec<&AgentState> = self.agents.iter().collect();
        let summary = RunSummary {
            epochs_run: self.epoch,
            halt_reason,
            stabilized_count: stabilized.len(),
            stabilized_fraction: stabilized.len() as f64 / n,
            public_transit_share_stabilized: (!stabilized.is_empty())
                .then(|| bus_share(&stabilized)),
            public_transit_share_all: bus_share(&everyone),
        };
        Ok(SimulationOutput {
            metrics: PopulationMetrics {
                trips,
                epochs,
                summary,
            },
            records,
            agents: self.agents,
            graph: self.graph,
        })
    }
}

pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationOutput> {
    Simulation::new(config.clone())?.run()
}
