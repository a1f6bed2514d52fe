/*
  Copyright 2026 The a3kit Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/
//! `a3kit` command-line front end.

mod debug;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use a3kit::dataset::{build_dataset, write_annotations, write_dataset, write_json, DatasetConfig, TaskMultipliers};
use a3kit::fixtures::load_corpus;
use a3kit::model_io::{PredictionSource, RemoteVlmClient};
use a3kit::primitives::{
    choose_contact, plan_trajectory, select_primitive, slide_distance, Direction, PlanParams, TrajectoryExport,
};
use a3kit::sim::{evaluate, write_episodes_csv, EvalConfig};
use a3kit::urdf::{forward_kinematics, middle_joint_values};
use a3kit::{annotation::fit_link, annotation::SemanticLabel, Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "a3kit", version, about = "Articulation triads, instruction data and primitive evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-view triad records and scene manifests.
    Annotate(ViewArgs),
    /// Annotations plus instruction samples and a summary.
    BuildDataset {
        #[command(flatten)]
        views: ViewArgs,
        #[command(flatten)]
        multipliers: MultiplierArgs,
    },
    /// Primitive trajectories for one movable link.
    Plan(PlanArgs),
    /// Closed-loop evaluation of a prediction source.
    Eval(EvalArgs),
    /// SVG overlay and PLY point cloud per view.
    RenderDebug(ViewArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// A single URDF file.
    #[arg(long)]
    urdf: Option<PathBuf>,
    /// A directory of URDFs or a PartNet-Mobility checkout.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

impl Input {
    fn path(&self) -> &Path {
        self.urdf.as_deref().or(self.corpus.as_deref()).expect("clap enforces one input")
    }
}

#[derive(Debug, Args)]
struct ViewArgs {
    #[command(flatten)]
    input: Input,
    /// Views per object.
    #[arg(long, default_value_t = a3kit::dataset::DEFAULT_VIEWS_PER_OBJECT)]
    views: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long, default_value = "out")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct MultiplierArgs {
    #[arg(long, default_value_t = 1.0)]
    detection_mult: f64,
    #[arg(long, default_value_t = 1.0)]
    rec_link_mult: f64,
    #[arg(long, default_value_t = 1.0)]
    reg_joint_mult: f64,
    #[arg(long, default_value_t = 1.0)]
    rec_action_mult: f64,
}

impl MultiplierArgs {
    fn to_multipliers(&self) -> TaskMultipliers {
        TaskMultipliers {
            detection: self.detection_mult,
            rec_link: self.rec_link_mult,
            reg_joint: self.reg_joint_mult,
            rec_action: self.rec_action_mult,
        }
    }
}

/// Overrides of the evaluation and planning defaults.
#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    detach_eps: Option<f64>,
    #[arg(long)]
    attempts: Option<usize>,
    #[arg(long)]
    attach_tol: Option<f64>,
    #[arg(long)]
    max_slide: Option<f64>,
    #[arg(long)]
    view_retries: Option<usize>,
    /// Rotate/Scroll sweep in degrees.
    #[arg(long)]
    arc_deg: Option<f64>,
    #[arg(long)]
    waypoints: Option<usize>,
}

impl ConfigArgs {
    fn to_config(&self) -> Result<EvalConfig> {
        let mut c = EvalConfig::default();
        c.sigma = self.sigma.unwrap_or(c.sigma);
        c.detach_eps = self.detach_eps.unwrap_or(c.detach_eps);
        c.attempts = self.attempts.unwrap_or(c.attempts);
        c.attach_tol = self.attach_tol.unwrap_or(c.attach_tol);
        c.max_slide = self.max_slide.unwrap_or(c.max_slide);
        c.view_retries = self.view_retries.unwrap_or(c.view_retries);
        c.plan.arc_deg = self.arc_deg.unwrap_or(c.plan.arc_deg);
        c.plan.n_waypoints = self.waypoints.unwrap_or(c.plan.n_waypoints);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long)]
    urdf: PathBuf,
    /// Movable link to plan for.
    #[arg(long)]
    link: String,
    /// Joint value overrides, `name=value`; others stay at their middle value.
    #[arg(long = "joint", value_parser = parse_joint)]
    joints: Vec<(String, f64)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON file.
    #[arg(short, long, default_value = "plan.json")]
    output: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Predictor {
    GroundTruth,
    Perturbed,
    Remote,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = Predictor::GroundTruth)]
    predictor: Predictor,
    /// Gaussian std on normalized coordinates for `perturbed`.
    #[arg(long, default_value_t = 0.05)]
    noise_std: f64,
    /// Inference endpoint for `remote`.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value_t = 60.0)]
    timeout_s: f64,
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    /// First episode seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Episodes per object, seeded `seed, seed+1, ...`.
    #[arg(long, default_value_t = 8)]
    episodes: u64,
    #[arg(short, long, default_value = "out")]
    output: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

fn parse_joint(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad joint value `{value}`: {e}"))?;
    Ok((name.trim().to_owned(), value))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return report(&e);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &Error) -> ExitCode {
    eprintln!("error: {}: {e}", e.kind());
    ExitCode::FAILURE
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("A3KIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("A3KIT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Annotate(args) => {
            let (config, objects) = prepare(&args, TaskMultipliers::default())?;
            let outputs = build_dataset(&objects, &config)?;
            write_annotations(&args.output, &outputs)?;
            println!("annotated {} views of {} objects -> {}", outputs.len(), objects.len(), args.output.display());
        }
        Command::BuildDataset { views, multipliers } => {
            let (config, objects) = prepare(&views, multipliers.to_multipliers())?;
            let outputs = build_dataset(&objects, &config)?;
            let summary = write_dataset(&views.output, &outputs)?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        Command::Plan(args) => plan(&args)?,
        Command::Eval(args) => eval(&args)?,
        Command::RenderDebug(args) => {
            let (config, objects) = prepare(&args, TaskMultipliers::default())?;
            let outputs = build_dataset(&objects, &config)?;
            for (o, object) in outputs.iter().map(|o| (o, objects.iter().find(|x| x.id == o.spec.object_id))) {
                let object = object.expect("outputs come from these objects");
                debug::write_view(&args.output, object, o)?;
            }
            println!("rendered {} views -> {}", outputs.len(), args.output.display());
        }
    }
    Ok(())
}

/// Validates the dataset flags, then loads the corpus.
fn prepare(args: &ViewArgs, multipliers: TaskMultipliers) -> Result<(DatasetConfig, Vec<a3kit::annotation::ArticulatedObject>)> {
    let config = DatasetConfig {
        views_per_object: args.views,
        master_seed: args.seed,
        multipliers,
        ..DatasetConfig::default()
    };
    config.validate()?;
    let objects = load_corpus(args.input.path(), args.seed)?;
    Ok((config, objects))
}

#[derive(Serialize)]
struct PlanOutput {
    object_id: String,
    link: String,
    primitive: a3kit::primitives::PrimitiveKind,
    box_vertices: Vec<[f64; 3]>,
    axis: [[f64; 3]; 2],
    trajectories: Vec<TrajectoryExport>,
}

fn plan(args: &PlanArgs) -> Result<()> {
    let cfg = args.config.to_config()?;
    let object = load_corpus(&args.urdf, args.seed)?.remove(0);
    let mut joints = middle_joint_values(&object.tree);
    for (name, value) in &args.joints {
        joints.set(name.clone(), *value);
    }
    joints.validate(&object.tree)?;
    let poses = forward_kinematics(&object.tree, &joints)?;
    let (bbox, axis) = fit_link(&object, &poses, &args.link)?;
    let joint = object.tree.parent_joint(&args.link).expect("fit_link checked the joint");
    let label = SemanticLabel {
        joint_kind: axis.kind,
        link_name: a3kit::skills::semantic_name(&args.link),
        actions: Vec::new(),
    };
    let kind = select_primitive(&label);

    let lg = object.geometry.link(&args.link).expect("fit_link checked the geometry");
    let pose = poses[&args.link];
    let surface: Vec<_> = lg.samples.iter().map(|p| pose * p).collect();
    let contact = choose_contact(&bbox, &surface, kind, &axis, args.seed)?;

    let value = joints.get(&joint.name).unwrap_or_default();
    let slide_m = match joint.travel_range() {
        Some(l) if l.span().is_finite() => slide_distance(value, l.lower, l.upper, cfg.max_slide),
        _ => cfg.max_slide,
    };
    let params = PlanParams { slide_m, ..cfg.plan };
    let trajectories = [Direction::Forward, Direction::Backward]
        .iter()
        .map(|d| plan_trajectory(kind, &contact, &axis, &params, *d).map(|t| TrajectoryExport::from(&t)))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let out = PlanOutput {
        object_id: object.id.clone(),
        link: args.link.clone(),
        primitive: kind,
        box_vertices: bbox.vertices().iter().map(|v| [v.x, v.y, v.z]).collect(),
        axis: [axis.p0, axis.p1].map(|p| [p.x, p.y, p.z]),
        trajectories,
    };
    write_json(&args.output, &out)?;
    println!("{} {} -> {}", out.link, kind.as_str(), args.output.display());
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let cfg = args.config.to_config()?;
    if args.episodes == 0 {
        return Err(Error::Config("--episodes must be at least 1".into()));
    }
    let source = match args.predictor {
        Predictor::GroundTruth => PredictionSource::GroundTruth,
        Predictor::Perturbed => {
            if !(args.noise_std.is_finite() && args.noise_std >= 0.0) {
                return Err(Error::Config(format!("--noise-std must be non-negative, got {}", args.noise_std)));
            }
            PredictionSource::Perturbed {
                std: args.noise_std,
                seed: args.seed,
            }
        }
        Predictor::Remote => {
            let endpoint = args
                .endpoint
                .clone()
                .ok_or_else(|| Error::Config("--predictor remote needs --endpoint".into()))?;
            if !(args.timeout_s.is_finite() && args.timeout_s > 0.0) || args.max_in_flight == 0 {
                return Err(Error::Config("--timeout-s and --max-in-flight must be positive".into()));
            }
            PredictionSource::Remote(RemoteVlmClient::new(
                endpoint,
                Duration::from_secs_f64(args.timeout_s),
                args.max_in_flight,
            ))
        }
    };
    let objects = load_corpus(args.input.path(), args.seed)?;
    let seeds: Vec<u64> = (0..args.episodes).map(|k| args.seed.wrapping_add(k)).collect();
    let report = evaluate(&objects, &source, &cfg, &seeds)?;
    write_json(&args.output.join("report.json"), &report)?;
    write_episodes_csv(&args.output.join("episodes.csv"), &report.episodes)?;
    for (category, stats) in &report.per_category {
        println!("{category:<20} {:>3}/{:<3} {:.2}", stats.successes, stats.n, stats.rate);
    }
    println!("average {:.2} ({})", report.average, report.predictor);
    Ok(())
}
