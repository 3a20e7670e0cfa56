//! Experiment files, run planning, and the CSV/JSON outputs.
//!
//! Layout of an output directory:
//!
//! ```text
//! manifest.json
//! semantic_trends.csv        (baseline)
//! init_final.csv             (baseline, init)
//! conformity_heatmap.csv     (conformity)
//! runs/<run>/trips.csv
//! runs/<run>/epochs.csv
//! runs/<run>/summary.csv
//! runs/<run>/graph.edges     (write_graph)
//! runs/<run>/records.csv     (simulation.record_trips)
//! ```
//!
//! Aggregate files are computed by reading the per-run CSVs back, so they can
//! be recomputed offline with [`aggregate`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    run_simulation, DistanceRange, InitialDistances, SimulationConfig, SimulationOutput,
    Subpopulation,
};
use crate::error::{Error, Result};
use crate::transit::{TransitMode, Value, OBSERVABLE_NAMES};

pub const MANIFEST: &str = "manifest.json";
pub const SEMANTIC_TRENDS: &str = "semantic_trends.csv";
pub const INIT_FINAL: &str = "init_final.csv";
pub const CONFORMITY_HEATMAP: &str = "conformity_heatmap.csv";
pub const RUNS_DIR: &str = "runs";

const MANIFEST_FORMAT: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// One population under the base configuration.
    #[default]
    Baseline,
    /// One population per init config, each with one value's initial
    /// distances drawn from the reduced range.
    Init,
    /// Every init config crossed with every conformity factor.
    Conformity,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(ExperimentKind::Baseline),
            "init" => Ok(ExperimentKind::Init),
            "conformity" => Ok(ExperimentKind::Conformity),
            other => Err(Error::validation(
                "experiment",
                format!("unknown experiment `{other}` (baseline|init|conformity)"),
            )),
        }
    }
}

/// Initial-distance configuration: the base ranges, or the base with one
/// value's range replaced by the reduced range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitConfig {
    Baseline,
    Frugalism,
    Idealism,
    Individualism,
    Pragmatism,
}

impl InitConfig {
    pub fn reduced_value(self) -> Option<Value> {
        match self {
            InitConfig::Baseline => None,
            InitConfig::Frugalism => Some(Value::Frugalism),
            InitConfig::Idealism => Some(Value::Idealism),
            InitConfig::Individualism => Some(Value::Individualism),
            InitConfig::Pragmatism => Some(Value::Pragmatism),
        }
    }

    pub fn name(self) -> &'static str {
        match self.reduced_value() {
            None => "baseline",
            Some(v) => v.name(),
        }
    }

    pub fn apply(self, base: &InitialDistances, reduced: DistanceRange) -> InitialDistances {
        let mut init = base.clone();
        if let Some(v) = self.reduced_value() {
            *init.get_mut(v) = reduced;
        }
        init
    }
}

impl fmt::Display for InitConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully resolved experiment, as read from a YAML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub replications: usize,
    pub output_dir: PathBuf,
    /// Conformity factors swept by the conformity experiment.
    pub cf_grid: Vec<f64>,
    /// Init configs used by the init and conformity experiments.
    pub init_configs: Vec<InitConfig>,
    pub reduced_range: DistanceRange,
    /// Dump each run's social graph as an edge list.
    pub write_graph: bool,
    pub simulation: SimulationConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            experiment: ExperimentKind::Baseline,
            replications: 1,
            output_dir: PathBuf::from("results"),
            cf_grid: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            init_configs: vec![
                InitConfig::Frugalism,
                InitConfig::Idealism,
                InitConfig::Individualism,
                InitConfig::Pragmatism,
            ],
            reduced_range: DistanceRange::new(0.0, 2.0),
            write_graph: false,
            simulation: SimulationConfig::default(),
        }
    }
}

/// One simulation within an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub name: String,
    pub init: InitConfig,
    pub cf: f64,
    pub replication: usize,
    #[serde(skip)]
    pub config: SimulationConfig,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::validation("replications", "must be at least 1"));
        }
        if let Some(cf) = self.cf_grid.iter().find(|cf| !(0.0..=1.0).contains(*cf)) {
            return Err(Error::validation("cf_grid", format!("{cf} outside [0, 1]")));
        }
        if self.experiment == ExperimentKind::Conformity && self.cf_grid.is_empty() {
            return Err(Error::validation(
                "cf_grid",
                "conformity sweep needs at least one cf",
            ));
        }
        if self.experiment != ExperimentKind::Baseline && self.init_configs.is_empty() {
            return Err(Error::validation(
                "init_configs",
                "needs at least one init config",
            ));
        }
        let r = self.reduced_range;
        if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
            return Err(Error::validation(
                "reduced_range",
                format!("invalid range [{}, {}]", r.lo, r.hi),
            ));
        }
        self.simulation.validate()?;
        for run in self.plan() {
            run.config.validate()?;
        }
        Ok(())
    }

    /// Every run of the experiment. Replication `k` uses master seed
    /// `simulation.master_seed + k`.
    pub fn plan(&self) -> Vec<RunPlan> {
        let (inits, cfs): (Vec<InitConfig>, Vec<f64>) = match self.experiment {
            ExperimentKind::Baseline => (vec![InitConfig::Baseline], vec![self.simulation.cf]),
            ExperimentKind::Init => (self.init_configs.clone(), vec![self.simulation.cf]),
            ExperimentKind::Conformity => (self.init_configs.clone(), self.cf_grid.clone()),
        };
        let mut runs = Vec::new();
        for replication in 0..self.replications {
            for &init in &inits {
                for &cf in &cfs {
                    let mut config = self.simulation.clone();
                    config.master_seed =
                        self.simulation.master_seed.wrapping_add(replication as u64);
                    config.initial_distances =
                        init.apply(&self.simulation.initial_distances, self.reduced_range);
                    config.cf = cf;
                    let name = match self.experiment {
                        ExperimentKind::Baseline => format!("baseline-r{replication}"),
                        ExperimentKind::Init => format!("init-{init}-r{replication}"),
                        ExperimentKind::Conformity => {
                            format!("conformity-{init}-cf{cf:.3}-r{replication}")
                        }
                    };
                    runs.push(RunPlan {
                        name,
                        init,
                        cf,
                        replication,
                        config,
                    });
                }
            }
        }
        runs
    }
}

/// Parses a YAML experiment file. An empty file yields every default.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = if text.trim().is_empty() {
        ExperimentSpec::default()
    } else {
        serde_yaml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads an experiment file, or the `config` recorded in a manifest.
pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(manifest) = serde_json::from_str::<Manifest>(&text) {
        manifest.config.validate()?;
        return Ok(manifest.config);
    }
    parse_config_str(&text, path)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRun {
    pub name: String,
    pub init: InitConfig,
    pub cf: f64,
    pub replication: usize,
    pub master_seed: u64,
    pub graph_seed: u64,
    pub dir: PathBuf,
}

/// Everything needed to regenerate the outputs with the same binary.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub manifest_format: u32,
    pub program: String,
    pub version: String,
    pub config: ExperimentSpec,
    pub runs: Vec<ManifestRun>,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TripRow {
    trip_index: u64,
    epoch: usize,
    bus_fraction: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct EpochRow {
    epoch: usize,
    value: String,
    subpopulation: String,
    mean_distance: String,
    count: usize,
    stabilized_fraction: String,
}

/// Per-run summary, one row.
#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub epochs_run: usize,
    pub halt_reason: String,
    pub stabilized_count: usize,
    pub stabilized_fraction: String,
    /// Empty when no agent stabilized.
    pub public_transit_share_stabilized: String,
    pub public_transit_share_all: String,
    pub public_transit_share: String,
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn parse_num(s: &str, file: &Path) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse {
        path: file.to_path_buf(),
        message: format!("`{s}` is not a number"),
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(Error::from)
}

/// Writes the trips, epochs and summary streams of one run into `dir`.
pub fn write_run(dir: &Path, output: &SimulationOutput, write_graph: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let metrics = &output.metrics;

    let mut w = csv_writer(&dir.join("trips.csv"))?;
    for t in &metrics.trips {
        w.serialize(TripRow {
            trip_index: t.trip_index,
            epoch: t.epoch,
            bus_fraction: num(t.bus_fraction),
        })?;
    }
    if metrics.trips.is_empty() {
        w.write_record(["trip_index", "epoch", "bus_fraction"])?;
    }
    w.flush().map_err(|e| Error::io(dir.join("trips.csv"), e))?;

    let mut w = csv_writer(&dir.join("epochs.csv"))?;
    for e in &metrics.epochs {
        for sub in Subpopulation::ALL {
            let group = e.group(sub);
            if group.count == 0 {
                continue;
            }
            for value in Value::ALL {
                w.serialize(EpochRow {
                    epoch: e.epoch,
                    value: value.name().into(),
                    subpopulation: sub.name().into(),
                    mean_distance: num(group.mean_distance[value.index()]),
                    count: group.count,
                    stabilized_fraction: num(e.stabilized_fraction),
                })?;
            }
        }
    }
    w.flush()
        .map_err(|e| Error::io(dir.join("epochs.csv"), e))?;

    let s = &metrics.summary;
    let mut w = csv_writer(&dir.join("summary.csv"))?;
    w.serialize(SummaryRow {
        epochs_run: s.epochs_run,
        halt_reason: serde_json::to_value(s.halt_reason)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        stabilized_count: s.stabilized_count,
        stabilized_fraction: num(s.stabilized_fraction),
        public_transit_share_stabilized: s
            .public_transit_share_stabilized
            .map(num)
            .unwrap_or_default(),
        public_transit_share_all: num(s.public_transit_share_all),
        public_transit_share: num(s.public_transit_share()),
    })?;
    w.flush()
        .map_err(|e| Error::io(dir.join("summary.csv"), e))?;

    if write_graph {
        if let Some(graph) = &output.graph {
            graph.save_edge_list(&dir.join("graph.edges"))?;
        }
    }

    if !output.records.is_empty() {
        write_records(&dir.join("records.csv"), output)?;
    }
    Ok(())
}

fn write_records(path: &Path, output: &SimulationOutput) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec![
        "trip_index".to_string(),
        "agent_id".into(),
        "utility_bus".into(),
        "utility_taxi".into(),
        "bonus_bus".into(),
        "bonus_taxi".into(),
        "chosen".into(),
    ];
    header.extend(OBSERVABLE_NAMES.iter().map(|o| format!("observed_{o}")));
    header.extend(OBSERVABLE_NAMES.iter().map(|o| format!("perceived_{o}")));
    w.write_record(&header)?;
    for r in &output.records {
        let o = &r.realized_observation;
        let mut row = vec![
            r.trip_index.to_string(),
            r.agent_id.to_string(),
            num(r.anticipated_utilities[TransitMode::Bus.index()]),
            num(r.anticipated_utilities[TransitMode::Taxi.index()]),
            num(r.conformity_bonuses[TransitMode::Bus.index()]),
            num(r.conformity_bonuses[TransitMode::Taxi.index()]),
            r.chosen.name().to_string(),
        ];
        row.extend([o.cost, o.time, o.congestion, o.carbon].map(num));
        row.extend(r.realized_perceived.map(num));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(Error::from)
}

pub fn read_summary(run_dir: &Path) -> Result<SummaryRow> {
    let path = run_dir.join("summary.csv");
    read_rows::<SummaryRow>(&path)?
        .pop()
        .ok_or_else(|| Error::Parse {
            path,
            message: "empty summary".into(),
        })
}

/// Public-transit share of a run, from its summary file.
pub fn read_public_share(run_dir: &Path) -> Result<f64> {
    let path = run_dir.join("summary.csv");
    parse_num(&read_summary(run_dir)?.public_transit_share, &path)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Per-run epoch rows keyed by (epoch, value, subpopulation).
type EpochTable = BTreeMap<(usize, usize, usize), f64>;

fn read_epoch_table(run_dir: &Path) -> Result<EpochTable> {
    let path = run_dir.join("epochs.csv");
    let mut table = EpochTable::new();
    for row in read_rows::<EpochRow>(&path)? {
        let value = Value::ALL
            .iter()
            .position(|v| v.name() == row.value)
            .ok_or_else(|| Error::Parse {
                path: path.clone(),
                message: format!("unknown value `{}`", row.value),
            })?;
        let sub = Subpopulation::ALL
            .iter()
            .position(|s| s.name() == row.subpopulation)
            .ok_or_else(|| Error::Parse {
                path: path.clone(),
                message: format!("unknown subpopulation `{}`", row.subpopulation),
            })?;
        table.insert(
            (row.epoch, value, sub),
            parse_num(&row.mean_distance, &path)?,
        );
    }
    Ok(table)
}

/// Writes the aggregate CSVs for `spec` into `out`, reading the run
/// directories under `out/runs`. Returns the files written.
pub fn aggregate(spec: &ExperimentSpec, out: &Path) -> Result<Vec<PathBuf>> {
    let runs = spec.plan();
    let run_dir = |r: &RunPlan| out.join(RUNS_DIR).join(&r.name);
    let mut written = Vec::new();

    if spec.experiment == ExperimentKind::Baseline {
        let tables = runs
            .iter()
            .map(|r| read_epoch_table(&run_dir(r)))
            .collect::<Result<Vec<_>>>()?;
        let mut cells: BTreeMap<(usize, usize, usize), Vec<f64>> = BTreeMap::new();
        for table in &tables {
            for (&key, &d) in table {
                cells.entry(key).or_default().push(d);
            }
        }
        let path = out.join(SEMANTIC_TRENDS);
        let mut w = csv_writer(&path)?;
        w.write_record([
            "epoch",
            "value",
            "mean_distance",
            "subpopulation",
            "std_distance",
            "replications",
        ])?;
        for ((epoch, value, sub), ds) in &cells {
            let (mean, std) = mean_std(ds);
            w.write_record([
                epoch.to_string(),
                Value::ALL[*value].name().to_string(),
                num(mean),
                Subpopulation::ALL[*sub].name().to_string(),
                num(std),
                ds.len().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(PathBuf::from(SEMANTIC_TRENDS));
    }

    if matches!(
        spec.experiment,
        ExperimentKind::Baseline | ExperimentKind::Init
    ) {
        let path = out.join(INIT_FINAL);
        let mut w = csv_writer(&path)?;
        w.write_record([
            "config",
            "value",
            "initial_mean",
            "final_mean",
            "public_transit_pct",
            "public_transit_std",
            "replications",
        ])?;
        let mut inits: Vec<InitConfig> = Vec::new();
        for r in &runs {
            if !inits.contains(&r.init) {
                inits.push(r.init);
            }
        }
        for init in inits {
            let group: Vec<&RunPlan> = runs.iter().filter(|r| r.init == init).collect();
            let mut initial = vec![Vec::new(); 4];
            let mut fin = vec![Vec::new(); 4];
            let mut shares = Vec::new();
            for r in &group {
                let dir = run_dir(r);
                let table = read_epoch_table(&dir)?;
                let last = table.keys().map(|k| k.0).max().unwrap_or(0);
                for v in 0..4 {
                    if let Some(&d) = table.get(&(0, v, 0)) {
                        initial[v].push(d);
                    }
                    if let Some(&d) = table.get(&(last, v, 0)) {
                        fin[v].push(d);
                    }
                }
                shares.push(100.0 * read_public_share(&dir)?);
            }
            let (pct, pct_std) = mean_std(&shares);
            for value in Value::ALL {
                let i = value.index();
                w.write_record([
                    init.name().to_string(),
                    value.name().to_string(),
                    num(mean_std(&initial[i]).0),
                    num(mean_std(&fin[i]).0),
                    num(pct),
                    num(pct_std),
                    group.len().to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(PathBuf::from(INIT_FINAL));
    }

    if spec.experiment == ExperimentKind::Conformity {
        let path = out.join(CONFORMITY_HEATMAP);
        let mut w = csv_writer(&path)?;
        w.write_record([
            "init_config",
            "cf",
            "public_transit_pct",
            "public_transit_std",
            "replications",
        ])?;
        for &init in &spec.init_configs {
            for &cf in &spec.cf_grid {
                let shares = runs
                    .iter()
                    .filter(|r| r.init == init && r.cf == cf)
                    .map(|r| read_public_share(&run_dir(r)).map(|s| 100.0 * s))
                    .collect::<Result<Vec<_>>>()?;
                let (pct, std) = mean_std(&shares);
                w.write_record([
                    init.name().to_string(),
                    num(cf),
                    num(pct),
                    num(std),
                    shares.len().to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(PathBuf::from(CONFORMITY_HEATMAP));
    }
    Ok(written)
}

/// Result of [`run_experiment`].
#[derive(Debug)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub runs: Vec<(RunPlan, SummaryRow)>,
    pub files: Vec<PathBuf>,
}

/// Runs every planned simulation and writes per-run files, aggregates and the
/// manifest into `spec.output_dir`.
///
/// Everything is first written to a staging directory inside the output
/// directory and moved into place only once all runs succeeded, so a failed
/// experiment leaves no partial files behind.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let out = &spec.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".staging-")
        .tempdir_in(out)
        .map_err(|e| Error::io(out, e))?;
    let stage = staging.path();

    let plan = spec.plan();
    log::info!("running {} simulations into {}", plan.len(), out.display());
    plan.par_iter().try_for_each(|run| -> Result<()> {
        let output = run_simulation(&run.config)?;
        write_run(
            &stage.join(RUNS_DIR).join(&run.name),
            &output,
            spec.write_graph,
        )?;
        log::debug!("finished {}", run.name);
        Ok(())
    })?;

    let mut files = aggregate(spec, stage)?;
    for run in &plan {
        let dir = Path::new(RUNS_DIR).join(&run.name);
        let mut names: Vec<PathBuf> = fs::read_dir(stage.join(&dir))
            .map_err(|e| Error::io(stage.join(&dir), e))?
            .map(|entry| entry.map(|e| dir.join(e.file_name())))
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(stage.join(&dir), e))?;
        names.sort();
        files.extend(names);
    }

    let manifest = Manifest {
        manifest_format: MANIFEST_FORMAT,
        program: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: spec.clone(),
        runs: plan
            .iter()
            .map(|r| ManifestRun {
                name: r.name.clone(),
                init: r.init,
                cf: r.cf,
                replication: r.replication,
                master_seed: r.config.master_seed,
                graph_seed: r.config.graph_seed(),
                dir: Path::new(RUNS_DIR).join(&r.name),
            })
            .collect(),
        files: files.clone(),
    };
    let manifest_path = stage.join(MANIFEST);
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )
    .map_err(|e| Error::io(&manifest_path, e))?;

    let summaries = plan
        .iter()
        .map(|r| read_summary(&stage.join(RUNS_DIR).join(&r.name)))
        .collect::<Result<Vec<_>>>()?;

    publish(stage, out)?;
    Ok(ExperimentReport {
        output_dir: out.clone(),
        runs: plan.into_iter().zip(summaries).collect(),
        files,
    })
}

/// Moves the staged top-level entries into `out`, replacing existing ones.
fn publish(stage: &Path, out: &Path) -> Result<()> {
    let entries = fs::read_dir(stage).map_err(|e| Error::io(stage, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(stage, e))?;
        let target = out.join(entry.file_name());
        if entry.file_name() == RUNS_DIR {
            fs::create_dir_all(&target).map_err(|e| Error::io(&target, e))?;
            publish(&entry.path(), &target)?;
            continue;
        }
        if target.is_dir() {
            fs::remove_dir_all(&target).map_err(|e| Error::io(&target, e))?;
        } else if target.exists() {
            fs::remove_file(&target).map_err(|e| Error::io(&target, e))?;
        }
        fs::rename(entry.path(), &target).map_err(|e| Error::io(&target, e))?;
    }
    Ok(())
}
