//! `dhm` — build scaled body models, inspect the joint chain, compute
//! endurance times, rerun resistance regressions, and evaluate work
//! scenarios end to end.
//!
//! Exit codes: 0 success, 2 input/schema error, 3 analysis error.

mod scenario_file;

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use dhm_core::anthro::{scale_segments, Anthropometry, Gender};
use dhm_core::data::DataSet;
use dhm_core::fatigue::{
    group_statistics, regress_fatigue_resistance, FatigueParams, MetModel, MuscleGroup,
};
use dhm_core::kinematics::{build_chain, ResolvedLength};
use dhm_core::{report, status};

use scenario_file::ScenarioFile;

const EXIT_SCHEMA: u8 = 2;
const EXIT_ANALYSIS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dhm",
    about = "Digital human fatigue analysis for static manual work",
    version
)]
struct Cli {
    /// Directory overriding bundled data files (also: DHM_DATA_DIR).
    #[arg(long, global = true, env = "DHM_DATA_DIR")]
    data_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one or more work scenarios and write report files.
    Evaluate(EvaluateArgs),
    /// Maximum endurance time for a relative load.
    Met(MetArgs),
    /// Regress fatigue resistances from an endurance-model file.
    Regress(RegressArgs),
    /// Print the resolved 28-row joint table for a given stature.
    ChainDump(ChainDumpArgs),
    /// Query a joint strength profile.
    Strength(StrengthArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    /// Scenario files (TOML).
    #[arg(required = true)]
    scenarios: Vec<PathBuf>,
    /// Output directory (overrides the scenario's own setting).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Evaluate scenarios in parallel with this many workers.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct MetArgs {
    /// Relative load f_MVC in (0, 1].
    #[arg(long)]
    fmvc: f64,
    /// Fatigue resistance m in minutes.
    #[arg(long, conflicts_with = "joint")]
    resistance: Option<f64>,
    /// Muscle group whose registry mean resistance to use
    /// (general, shoulder, elbow, hip_back).
    #[arg(long)]
    joint: Option<String>,
}

#[derive(Args)]
struct RegressArgs {
    /// Endurance-model definition file (TOML).
    models: PathBuf,
    /// Use the sample (n−1) standard deviation for group statistics
    /// instead of the population one.
    #[arg(long)]
    sample_std: bool,
}

#[derive(Args)]
struct ChainDumpArgs {
    /// Stature in meters.
    #[arg(long)]
    stature: f64,
    /// Body weight in kg (reported alongside; the table itself depends on
    /// stature only).
    #[arg(long, default_value_t = 70.0)]
    weight: f64,
}

#[derive(Args)]
struct StrengthArgs {
    /// Profile joint: shoulder or elbow.
    #[arg(long)]
    joint: String,
    #[arg(long, default_value = "male")]
    gender: String,
    /// Shoulder flexion angle, degrees.
    #[arg(long)]
    shoulder_flexion: f64,
    /// Elbow flexion angle, degrees.
    #[arg(long)]
    elbow_flexion: f64,
    /// Population position in standard deviations about the mean.
    #[arg(long, default_value_t = 0.0)]
    z: f64,
}

enum CliError {
    /// Bad input: malformed file, unknown key, out-of-range argument.
    Schema(String),
    /// The computation itself cannot proceed or reports a failure.
    Analysis(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Analysis(_) => EXIT_ANALYSIS,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Schema(m) | CliError::Analysis(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let data = match load_data(cli.data_dir.as_deref()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("dhm: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    let result = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(&data, args),
        Command::Met(args) => cmd_met(&data, args),
        Command::Regress(args) => cmd_regress(args),
        Command::ChainDump(args) => cmd_chain_dump(&data, args),
        Command::Strength(args) => cmd_strength(&data, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dhm: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn load_data(dir: Option<&Path>) -> Result<DataSet, CliError> {
    let data = match dir {
        Some(d) => DataSet::from_dir(d),
        None => DataSet::bundled(),
    };
    data.map_err(|e| CliError::Schema(e.to_string()))
}

// ---------------------------------------------------------------------------
// evaluate

fn cmd_evaluate(data: &DataSet, args: EvaluateArgs) -> Result<(), CliError> {
    let jobs = args.jobs.max(1).min(args.scenarios.len().max(1));
    // with several scenarios, a shared --out-dir gets one subdirectory per
    // scenario so reports cannot clobber each other
    let many = args.scenarios.len() > 1;
    let queue: Mutex<VecDeque<PathBuf>> = Mutex::new(args.scenarios.iter().cloned().collect());
    let failures: Mutex<Vec<(PathBuf, CliError)>> = Mutex::new(Vec::new());

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let Some(path) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let out_dir = args.out_dir.as_deref().map(|d| {
                    if many {
                        d.join(path.file_stem().unwrap_or_default())
                    } else {
                        d.to_path_buf()
                    }
                });
                if let Err(e) = evaluate_one(data, &path, out_dir.as_deref()) {
                    failures.lock().unwrap().push((path, e));
                }
            });
        }
    });

    let failures = failures.into_inner().unwrap();
    if failures.is_empty() {
        return Ok(());
    }
    let mut worst = EXIT_SCHEMA;
    let mut message = String::new();
    for (path, err) in &failures {
        message.push_str(&format!("{}: {}\n", path.display(), err.message()));
        worst = worst.max(err.code());
    }
    let message = message.trim_end().to_string();
    Err(if worst == EXIT_ANALYSIS {
        CliError::Analysis(message)
    } else {
        CliError::Schema(message)
    })
}

fn evaluate_one(data: &DataSet, path: &Path, out_dir: Option<&Path>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
    let file = ScenarioFile::parse(&text).map_err(CliError::Schema)?;

    // apply per-scenario joint-limit overrides to a local copy of the data
    let data = if file.limits_deg.is_empty() {
        data.clone()
    } else {
        let mut patched = data.clone();
        for row in dhm_core::data::limits_from_map(&file.limits_deg) {
            match patched.limits.limits.iter_mut().find(|l| l.joint == row.joint) {
                Some(existing) => *existing = row,
                None => {
                    return Err(CliError::Schema(format!(
                        "limits_deg: unknown joint `{}`",
                        row.joint
                    )))
                }
            }
        }
        patched
    };

    let (spec, output) = file.into_spec().map_err(CliError::Schema)?;
    let report = status::evaluate_scenario(&spec, &data)
        .map_err(|e| CliError::Analysis(e.to_string()))?;

    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| {
            PathBuf::from("out").join(path.file_stem().unwrap_or_default())
        });
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Analysis(format!("cannot create {}: {e}", dir.display())))?;

    let render = |what: &str, result: dhm_core::Result<String>| -> Result<String, CliError> {
        result.map_err(|e| CliError::Analysis(format!("{what}: {e}")))
    };
    write_atomic(&dir.join("report.toml"), &render("report", report::report_toml(&report))?)?;
    write_atomic(&dir.join("summary.txt"), &report::summary_text(&report))?;
    write_atomic(
        &dir.join("timeseries.csv"),
        &render("time series", report::timeseries_csv(&report))?,
    )?;
    for joint in &report.joints {
        write_atomic(
            &dir.join(format!("met_grid_{}.csv", joint.label)),
            &render("met grid", report::met_grid_csv(&joint.met_grid))?,
        )?;
        write_atomic(
            &dir.join(format!("reduction_grid_{}.csv", joint.label)),
            &render("reduction grid", report::reduction_grid_csv(&joint.reduction_grid))?,
        )?;
    }

    println!(
        "{}: evaluated {} joint(s), {} s of work; reports in {}",
        path.display(),
        report.joints.len(),
        report.total_duration_s,
        dir.display()
    );
    for warning in &report.warnings {
        eprintln!("{}: warning: {warning}", path.display());
    }

    // a subject-level overload means the scenario itself is not feasible
    if report.joints.iter().any(|j| j.overloaded) {
        return Err(CliError::Analysis(format!(
            "{}: joint load exceeds fresh capacity for the scenario subject (reports written)",
            path.display()
        )));
    }
    Ok(())
}

fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let unique = COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = path.with_extension(format!("tmp.{}.{unique}", std::process::id()));
    std::fs::write(&tmp, content)
        .map_err(|e| CliError::Analysis(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Analysis(format!("cannot move {} into place: {e}", tmp.display())))
}

// ---------------------------------------------------------------------------
// met

fn cmd_met(data: &DataSet, args: MetArgs) -> Result<(), CliError> {
    if !(args.fmvc > 0.0 && args.fmvc <= 1.0) {
        return Err(CliError::Schema(format!(
            "--fmvc must lie in (0, 1], got {}",
            args.fmvc
        )));
    }
    let resistance = match (args.resistance, &args.joint) {
        (Some(m), _) => m,
        (None, Some(joint)) => {
            let group = MuscleGroup::parse(joint).ok_or_else(|| {
                CliError::Schema(format!(
                    "unknown muscle group `{joint}` (general, shoulder, elbow, hip_back)"
                ))
            })?;
            data.resistance(group)
                .map_err(|e| CliError::Schema(e.to_string()))?
                .mean_min
        }
        (None, None) => {
            return Err(CliError::Schema(
                "pass --resistance <minutes> or --joint <muscle group>".into(),
            ))
        }
    };
    if resistance <= 0.0 || resistance.is_nan() {
        return Err(CliError::Schema(format!(
            "--resistance must be > 0, got {resistance}"
        )));
    }
    // capacity magnitude cancels out of the relative-load formulation
    let params = FatigueParams::from_resistance(1.0, resistance)
        .map_err(|e| CliError::Schema(e.to_string()))?;
    let met_min = params
        .met_min(args.fmvc)
        .map_err(|e| CliError::Analysis(e.to_string()))?;
    println!("MET: {:.2} s ({:.4} min)", met_min * 60.0, met_min);
    Ok(())
}

// ---------------------------------------------------------------------------
// regress

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelsFile {
    schema_version: u32,
    models: Vec<ModelRow>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRow {
    name: String,
    expression: String,
    #[serde(default = "default_domain")]
    domain: [f64; 2],
    #[serde(default)]
    subjects: String,
}

fn default_domain() -> [f64; 2] {
    [0.16, 0.99]
}

fn cmd_regress(args: RegressArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.models)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", args.models.display())))?;
    let file: ModelsFile =
        toml::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
    if file.schema_version != 1 {
        return Err(CliError::Schema(format!(
            "unsupported schema_version {}",
            file.schema_version
        )));
    }

    let mut resistances = Vec::with_capacity(file.models.len());
    for row in &file.models {
        let model = MetModel::parse(
            &row.name,
            &row.expression,
            (row.domain[0], row.domain[1]),
            &row.subjects,
        )
        .map_err(|e| CliError::Schema(format!("model `{}`: {e}", row.name)))?;
        let m = regress_fatigue_resistance(&model)
            .map_err(|e| CliError::Analysis(format!("model `{}`: {e}", row.name)))?;
        println!("{}: m = {:.6} min", row.name, m);
        resistances.push(m);
    }
    let (mean, sigma) = group_statistics(&resistances, args.sample_std);
    let kind = if args.sample_std { "sample" } else { "population" };
    println!(
        "group: mean m = {:.6} min, sigma_m = {:.6} min ({kind}, n = {})",
        mean,
        sigma,
        resistances.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// chain-dump

fn cmd_chain_dump(data: &DataSet, args: ChainDumpArgs) -> Result<(), CliError> {
    let anthro = Anthropometry {
        stature_m: args.stature,
        body_weight_kg: args.weight,
        gender: Gender::Male,
        strength_percentile: 50.0,
    };
    let geometry =
        scale_segments(&anthro, &data.anthro).map_err(|e| CliError::Schema(e.to_string()))?;
    let chain = build_chain(
        &data.chain,
        &data.limits,
        &geometry,
        &data.anthro.extensions,
        args.stature,
    )
    .map_err(|e| CliError::Analysis(e.to_string()))?;

    println!(
        "joint table for stature {} m, weight {} kg (lengths m, angles rad)",
        args.stature, args.weight
    );
    println!(
        "{:>2} {:>6} {:>2} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}  name",
        "j", "a(j)", "u", "sigma", "gamma", "b", "alpha", "d", "r", "q_ini"
    );
    for row in &chain.rows {
        println!(
            "{:>2} {:>6} {:>2} {:>5} {:>8.4} {:>8} {:>8.4} {:>8} {:>8} {:>8.4}  {}",
            row.j,
            row.parent,
            row.branch as u8,
            row.sigma,
            row.gamma_rad,
            fmt_len(row.b),
            row.alpha_rad,
            fmt_len(row.d),
            fmt_len(row.r),
            row.q_ini_rad,
            row.name,
        );
    }
    Ok(())
}

fn fmt_len(value: ResolvedLength) -> String {
    match value {
        ResolvedLength::Value(v) => format!("{v:.4}"),
        ResolvedLength::RootX => "X_r".to_string(),
        ResolvedLength::RootY => "Y_r".to_string(),
        ResolvedLength::RootZ => "Z_r".to_string(),
    }
}

// ---------------------------------------------------------------------------
// strength

fn cmd_strength(data: &DataSet, args: StrengthArgs) -> Result<(), CliError> {
    let gender = match args.gender.as_str() {
        "male" => Gender::Male,
        "female" => Gender::Female,
        other => {
            return Err(CliError::Schema(format!(
                "unknown gender `{other}` (male, female)"
            )))
        }
    };
    let profile = data
        .strength_profile(&args.joint, gender)
        .map_err(|e| CliError::Schema(e.to_string()))?;

    // validate the query against the declared domain up front
    let [s_lo, s_hi] = profile.domain.shoulder_flexion_deg;
    let [e_lo, e_hi] = profile.domain.elbow_flexion_deg;
    if !(s_lo..=s_hi).contains(&args.shoulder_flexion) {
        return Err(CliError::Schema(format!(
            "--shoulder-flexion {} deg outside profile domain [{s_lo}, {s_hi}] deg",
            args.shoulder_flexion
        )));
    }
    if !(e_lo..=e_hi).contains(&args.elbow_flexion) {
        return Err(CliError::Schema(format!(
            "--elbow-flexion {} deg outside profile domain [{e_lo}, {e_hi}] deg",
            args.elbow_flexion
        )));
    }

    let angles = dhm_core::strength::angles(args.shoulder_flexion, args.elbow_flexion);
    let spread = profile
        .spread(&angles)
        .map_err(|e| CliError::Analysis(e.to_string()))?;
    let value = spread
        .percentile_strength(args.z)
        .map_err(|e| CliError::Analysis(e.to_string()))?;
    println!(
        "{} {} strength at shoulder {} deg / elbow {} deg: {:.3} N*m (mean {:.3} N*m, sigma {:.3} N*m, z = {})",
        args.gender, args.joint, args.shoulder_flexion, args.elbow_flexion,
        value, spread.mean_nm, spread.sigma_nm, args.z
    );
    Ok(())
}
