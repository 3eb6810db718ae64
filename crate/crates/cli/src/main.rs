use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use epsnet::builder::{build_family, build_net, DEFAULT_BETA};
use epsnet::dual::dual_stats;
use epsnet::envelope::diagnose_family;
use epsnet::experiments::{elekes_demo, generate_in_box, scaling_sweep, Generator, SweepConfig, DEFAULT_BOX};
use epsnet::io::{write_json, write_sweep_csv, Instance, NetFile};
use epsnet::oracle::verify_net;
use epsnet::pipeline::{run_pipeline, PipelineConfig};
use epsnet::{BuildConfig, Frac, Mode, PointSet, Side, SubnetMethod};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "epsnet", version, about = "Small epsilon-nets for points and halfspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded point set in general position.
    Gen(GenArgs),
    /// Build a net and certify it with the exact verifier.
    Build(BuildArgs),
    /// Check a net file against an instance.
    Verify(VerifyArgs),
    /// Envelope, degree and pocket diagnostics of the selected families (3D).
    DiagnoseEnvelope(DiagArgs),
    /// Levels, crossing distances and ball packing of the families (3D).
    DiagnoseDual(DiagArgs),
    /// Run the dual sampling construction (3D).
    PipelineDual(PipelineArgs),
    /// The grid and line family with k^3 heavy, nearly disjoint lines.
    Elekes(ElekesArgs),
    /// Build and verify nets over a grid of epsilons and seeds, as CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "cube_uniform")]
    kind: Generator,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long)]
    seed: u64,
    /// Coordinates are drawn from [0, box]^dim.
    #[arg(long = "box", default_value_t = DEFAULT_BOX)]
    box_size: i64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    SingleScale,
    Doubling,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubnetArg {
    Greedy,
    Sample,
}

#[derive(Args)]
struct BuildArgs {
    /// Instance JSON file.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    eps: Frac,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: Frac,
    #[arg(long, value_enum, default_value_t = ModeArg::SingleScale)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SubnetArg::Greedy)]
    subnet: SubnetArg,
    #[arg(long)]
    seed: u64,
    /// Net JSON file; the net is printed when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Net JSON file.
    #[arg(long)]
    net: PathBuf,
    /// Overrides the epsilon stored in the net file.
    #[arg(long)]
    eps: Option<Frac>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Lower,
    Upper,
    Both,
}

impl SideArg {
    fn sides(self) -> Vec<Side> {
        match self {
            SideArg::Lower => vec![Side::Lower],
            SideArg::Upper => vec![Side::Upper],
            SideArg::Both => vec![Side::Lower, Side::Upper],
        }
    }
}

#[derive(Args)]
struct DiagArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    eps: Frac,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: Frac,
    #[arg(long, value_enum, default_value_t = SideArg::Both)]
    side: SideArg,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    eps: Frac,
    #[arg(long, default_value = "1/16")]
    beta: Frac,
    /// Sample size multiplier a in a (1/eps^2) ln(1/eps).
    #[arg(long, default_value_t = 4.0)]
    multiplier: f64,
    #[arg(long)]
    seed: u64,
    /// Net JSON file.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ElekesArgs {
    #[arg(long)]
    k: usize,
    /// Print only the counts, not the list of lines.
    #[arg(long)]
    summary: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "cube_uniform")]
    generator: Generator,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Comma separated epsilons.
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<Frac>,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: Frac,
    /// Comma separated instance seeds.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Also record the size of a verified random-sample net.
    #[arg(long)]
    baseline: bool,
    /// CSV file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<epsnet::Error>().map_or(2, epsnet::Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Build(a) => build(a),
        Command::Verify(a) => verify(a),
        Command::DiagnoseEnvelope(a) => diagnose_envelope(a),
        Command::DiagnoseDual(a) => diagnose_dual(a),
        Command::PipelineDual(a) => pipeline_dual(a),
        Command::Elekes(a) => elekes(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn load(path: &Path) -> Result<PointSet> {
    let inst = Instance::load(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(inst.to_point_set()?)
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

/// Exit status for a report whose checks are all in `checks`.
fn status(checks: &Value) -> u8 {
    let all = checks.as_object().map_or(true, |m| m.values().all(|v| v.as_bool() != Some(false)));
    if all {
        0
    } else {
        1
    }
}

fn gen(a: GenArgs) -> Result<u8> {
    let inst = generate_in_box(a.kind, a.n, a.dim, a.seed, a.box_size)?;
    match a.out {
        Some(path) => inst.save(&path).with_context(|| format!("writing {}", path.display()))?,
        None => emit(&serde_json::to_value(&inst)?),
    }
    Ok(0)
}

fn build(a: BuildArgs) -> Result<u8> {
    let ps = load(&a.input)?;
    let mode = match a.mode {
        ModeArg::SingleScale => Mode::SingleScale,
        ModeArg::Doubling => Mode::Doubling,
    };
    let method = match a.subnet {
        SubnetArg::Greedy => SubnetMethod::GreedyHittingSet,
        SubnetArg::Sample => SubnetMethod::SampleAndVerify,
    };
    let config = BuildConfig::new(a.eps)
        .with_beta(a.beta)
        .with_mode(mode)
        .with_subnet_method(method)
        .with_seed(a.seed);
    let report = build_net(&ps, &config)?;
    let file = NetFile::from(&report);
    match a.out {
        Some(path) => {
            file.save(&path).with_context(|| format!("writing {}", path.display()))?;
            emit(&json!({
                "config": config,
                "n": report.n,
                "net_size": report.net.len(),
                "stats": report.stats,
                "valid": report.verdict.valid,
            }));
        }
        None => emit(&serde_json::to_value(&file)?),
    }
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<u8> {
    let ps = load(&a.input)?;
    let file = NetFile::load(&a.net).with_context(|| format!("reading {}", a.net.display()))?;
    let eps = a.eps.unwrap_or(file.epsilon);
    let verdict = verify_net(&ps, &file.net, eps)?;
    emit(&json!({
        "epsilon": eps,
        "n": ps.len(),
        "net_size": file.net.len(),
        "valid": verdict.valid,
        "witness": verdict.witness.as_ref().map(|w| w.indices()),
    }));
    Ok(if verdict.valid { 0 } else { 1 })
}

fn diagnose_envelope(a: DiagArgs) -> Result<u8> {
    let ps = load(&a.input)?;
    let n = ps.len();
    let mut sides = Vec::new();
    let mut code = 0;
    for side in a.side.sides() {
        let fam = build_family(&ps, a.eps, a.beta, side, SubnetMethod::GreedyHittingSet, a.seed)?;
        let d = diagnose_family(&ps, &fam, a.seed)?;
        let t = fam.len();
        let s = &d.structure;
        let low: Vec<_> = s.faces_with_degree_at_most(11).collect();
        // |pocket| >= (1 - 11 beta) eps n whenever 11 beta < 1
        let (p, q) = (a.beta.numer(), a.beta.denom());
        let pocket_bound = if q > 11 * p { Frac::new(q - 11 * p, q).mul(a.eps).ceil_mul(n) } else { 0 };
        let checks = json!({
            "all_on_envelope": a.beta >= Frac::new(1, 3) || d.membership.iter().all(|&b| b),
            "degree_sum_below_6t": t == 0 || s.degree_sum() < 6 * t,
            "half_faces_degree_at_most_11": 2 * low.len() >= t,
            "low_degree_pockets_large": low.iter().all(|f| f.pocket.len() >= pocket_bound),
            "pockets_disjoint": s.pockets_disjoint(),
            "pockets_match_neighbors": s.pockets_match_neighbors(),
            "birth_pockets_disjoint": d.incremental.runs.iter().all(|r| r.pockets_disjoint()),
        });
        code = code.max(status(&checks));
        sides.push(json!({
            "side": side,
            "t": t,
            "membership": d.membership,
            "degrees": s.faces.iter().map(|f| f.degree).collect::<Vec<_>>(),
            "degree_sum": s.degree_sum(),
            "envelope_edges": s.edges,
            "pocket_sizes": s.faces.iter().map(|f| f.pocket.len()).collect::<Vec<_>>(),
            "pocket_bound": pocket_bound,
            "peeling_layers": d.peeling.sizes(),
            "peeling_average_degree": d.peeling.average_degree(),
            "incremental_mean_degree": d.incremental.mean_degree,
            "checks": checks,
        }));
    }
    emit(&json!({
        "config": {"eps": a.eps, "beta": a.beta, "seed": a.seed, "input": a.input},
        "n": n,
        "sides": sides,
    }));
    Ok(code)
}

fn diagnose_dual(a: DiagArgs) -> Result<u8> {
    let ps = load(&a.input)?;
    let mut sides = Vec::new();
    let mut code = 0;
    for side in a.side.sides() {
        let fam = build_family(&ps, a.eps, a.beta, side, SubnetMethod::GreedyHittingSet, a.seed)?;
        let st = dual_stats(&ps, &fam, a.seed)?;
        let checks = json!({
            "levels_match_traces": st.levels_match_traces(),
            "levels_in_range": st.levels_in_range(),
            "separated": st.separated(),
            "triangle_inequality": st.triangle_inequality,
            "balls_disjoint": st.balls_disjoint,
            "ball_levels_in_range": st.ball_levels_in_range,
            "packing_holds": st.packing_holds(),
        });
        code = code.max(status(&checks));
        sides.push(json!({
            "side": side,
            "min_distance": st.min_distance(),
            "shallow_constant": st.shallow_constant(),
            "ball_constant": st.ball_constant(),
            "stats": st,
            "checks": checks,
        }));
    }
    emit(&json!({
        "config": {"eps": a.eps, "beta": a.beta, "seed": a.seed, "input": a.input},
        "n": ps.len(),
        "sides": sides,
    }));
    Ok(code)
}

fn pipeline_dual(a: PipelineArgs) -> Result<u8> {
    let ps = load(&a.input)?;
    let config = PipelineConfig::new(a.eps)
        .with_beta(a.beta)
        .with_multiplier(a.multiplier)
        .with_seed(a.seed);
    let trace = run_pipeline(&ps, &config)?;
    if let Some(path) = &a.out {
        let file = NetFile {
            epsilon: a.eps,
            beta: a.beta,
            net: trace.net.clone(),
            families: Vec::new(),
            valid: trace.verdict.valid,
        };
        write_json(path, &file).with_context(|| format!("writing {}", path.display()))?;
    }
    let sides: Vec<Value> = trace
        .sides
        .iter()
        .map(|s| {
            json!({
                "side": s.side,
                "sample_size": s.sample.indices.len(),
                "redraws": s.sample.redraws,
                "max_discrepancy": s.sample.max_discrepancy,
                "shallow_vertices": s.shallow,
                "radius": s.radius,
                "members": s.members.len(),
                "max_member_level": s.max_member_level(),
            })
        })
        .collect();
    emit(&json!({
        "config": config,
        "n": trace.n,
        "retries": trace.retries,
        "family_size": trace.family_size(),
        "family_size_times_eps": trace.family_size() as f64 * a.eps.to_f64(),
        "net_size": trace.net.len(),
        "net": trace.net,
        "valid": trace.verdict.valid,
        "sides": sides,
    }));
    Ok(0)
}

fn elekes(a: ElekesArgs) -> Result<u8> {
    let r = elekes_demo(a.k)?;
    let mut v = serde_json::to_value(&r)?;
    if a.summary {
        if let Some(m) = v.as_object_mut() {
            m.remove("lines");
            m.remove("counts");
        }
    }
    emit(&v);
    Ok(0)
}

fn sweep(a: SweepArgs) -> Result<u8> {
    let config = SweepConfig {
        generator: a.generator,
        n: a.n,
        dim: a.dim,
        eps: a.eps,
        beta: a.beta,
        seeds: a.seeds,
        baseline: a.baseline,
    };
    let rows = scaling_sweep(&config)?;
    match a.out {
        Some(path) => {
            let f = std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
            write_sweep_csv(&rows, f)?;
        }
        None => write_sweep_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(if rows.iter().all(|r| r.valid) { 0 } else { 1 })
}
