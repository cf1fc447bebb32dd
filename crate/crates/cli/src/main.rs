//! `billiard-lab`: runs commutation, caustic, germ and perturbation experiments from JSON configs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use spaceform_billiards::harness::{
    caustic_test, commutation_test, commuting_implies_caustic_check, discover_nested_pair, local_germ_test,
    perturbation_scan, valid_member_intervals, write_csv, write_summary_json, DefectReport, ExperimentConfig,
    HarnessError, HarnessResult, ScanRow,
};
use spaceform_billiards::{ModelKind, Workers};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "BILLIARD_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "billiard-lab", version, about = "Confocal billiard experiments in E^d, S^d and H^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Commutation defects of the two billiard maps on sampled chords.
    CommuteTest(Common),
    /// Tangency defects of reflected lines tangent to the inner member.
    CausticTest(Common),
    /// Local test on geodesics near a reference line tangent to U.
    GermTest(Common),
    /// Commutation defects for a grid of perturbation sizes.
    PerturbScan(Common),
    /// Global eigenvalues, convex member intervals and confocal parameters.
    PencilInfo(InfoArgs),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $BILLIARD_OUT_DIR, then the config, then ./out).
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Leave wall-clock time and timestamps out of the JSON summary.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct InfoArgs {
    #[arg(long)]
    config: PathBuf,
}

/// A failed bound; maps to exit code 1.
struct Verdict {
    passed: bool,
    messages: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            passed: true,
            messages: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: String) {
        if !ok {
            self.passed = false;
            self.messages.push(msg);
        }
    }
}

fn load(common: &Common) -> HarnessResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> HarnessResult<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn report_json(report: &DefectReport, timing: bool) -> Value {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    if !timing {
        if let Value::Object(m) = &mut v {
            m.remove("wall_clock_seconds");
        }
    }
    v
}

fn write_summary(dir: &Path, name: &str, mut summary: Value, cfg: &ExperimentConfig, common: &Common, verdict: &Verdict) -> HarnessResult<()> {
    if let Value::Object(m) = &mut summary {
        m.insert("config".into(), serde_json::to_value(cfg).expect("configs serialize"));
        m.insert("passed".into(), json!(verdict.passed));
        m.insert("failures".into(), json!(verdict.messages));
        if !common.no_timing {
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            m.insert("generated_unix".into(), json!(now));
        }
    }
    write_summary_json(&dir.join(format!("{name}.json")), &summary)
}

fn bound_confocal(v: &mut Verdict, r: &DefectReport, cfg: &ExperimentConfig) {
    let t = &cfg.thresholds;
    v.check(r.accepted > 0, "no accepted samples".into());
    v.check(r.max_raw <= t.max_raw, format!("max raw defect {:e} exceeds {:e}", r.max_raw, t.max_raw));
    v.check(
        r.max_normalized <= t.max_normalized,
        format!("max normalized defect {:.3} exceeds {}", r.max_normalized, t.max_normalized),
    );
}

fn bound_sensitive(v: &mut Verdict, r: &DefectReport, cfg: &ExperimentConfig) {
    let t = &cfg.thresholds;
    v.check(r.accepted > 0, "no accepted samples".into());
    v.check(
        r.median_normalized >= t.min_median_normalized,
        format!(
            "median normalized defect {:.3e} below {:e} for a non-confocal pair",
            r.median_normalized, t.min_median_normalized
        ),
    );
}

fn print_report(r: &DefectReport) {
    println!(
        "{} {} d={} seed={}: accepted {}/{} max_raw {:.3e} median_raw {:.3e} floor {:.3e} max/floor {:.3e} median/floor {:.3e}",
        r.experiment,
        r.model.name(),
        r.dim,
        r.seed,
        r.accepted,
        r.requested,
        r.max_raw,
        r.median_raw,
        r.noise_floor,
        r.max_normalized,
        r.median_normalized
    );
    for (reason, count) in &r.rejected {
        println!("  rejected {reason}: {count}");
    }
    for (key, value) in &r.extra {
        println!("  {key}: {value:e}");
    }
}

fn single(common: &Common, name: &str, run: impl FnOnce(&ExperimentConfig, Workers) -> HarnessResult<(DefectReport, bool)>) -> HarnessResult<Verdict> {
    let cfg = load(common)?;
    let dir = out_dir(common, &cfg)?;
    let (report, confocal) = run(&cfg, Workers::from_count(common.workers))?;
    report.check_rejection_budget()?;
    let mut verdict = Verdict::new();
    if confocal {
        bound_confocal(&mut verdict, &report, &cfg);
        if let Some(&shift) = report.extra.get("parameter_max_shift") {
            let limit = cfg.thresholds.max_parameter_shift;
            verdict.check(shift <= limit, format!("tangent parameters moved by {shift:e}, above {limit:e}"));
        }
    } else {
        bound_sensitive(&mut verdict, &report, &cfg);
    }
    print_report(&report);
    write_csv(&dir.join(format!("{name}.csv")), &report)?;
    write_summary(&dir, name, json!({ "report": report_json(&report, !common.no_timing) }), &cfg, common, &verdict)?;
    Ok(verdict)
}

fn commute(common: &Common) -> HarnessResult<Verdict> {
    single(common, "commute", |cfg, w| {
        let setup = cfg.build_experiment_pair()?;
        let r = commutation_test(&setup.inner, &setup.outer, cfg.samples, cfg.seed, w)?;
        Ok((r, cfg.perturbation.is_none()))
    })
}

fn caustic(common: &Common) -> HarnessResult<Verdict> {
    single(common, "caustic", |cfg, w| {
        let setup = cfg.build_experiment_pair()?;
        if cfg.perturbation.is_none() {
            Ok((caustic_test(&setup, cfg.samples, cfg.seed, w)?, true))
        } else {
            let r = commuting_implies_caustic_check(&setup.inner, &setup.outer, cfg.samples, cfg.seed, w)?;
            Ok((r, false))
        }
    })
}

fn germ(common: &Common) -> HarnessResult<Verdict> {
    single(common, "germ", |cfg, w| {
        let setup = cfg.build_germ()?;
        Ok((local_germ_test(&setup, cfg.samples, cfg.seed, w)?, cfg.germ.v_perturbation.is_none()))
    })
}

fn scan(common: &Common) -> HarnessResult<Verdict> {
    let cfg = load(common)?;
    let spec = cfg
        .scan
        .clone()
        .ok_or_else(|| HarnessError::Config("perturb-scan needs a \"scan\" section".into()))?;
    let dir = out_dir(common, &cfg)?;
    let setup = cfg.build_pair()?;
    let axes = cfg.inner_semiaxes(&setup)?;
    let workers = Workers::from_count(common.workers);
    let rows = perturbation_scan(&setup, &axes, &spec.modes, &spec.epsilons, cfg.samples, cfg.seed, workers)?;
    let mut verdict = Verdict::new();
    let mut curves = Vec::new();
    for &mode in &spec.modes {
        let mine: Vec<&ScanRow> = rows.iter().filter(|r| r.mode == mode).collect();
        let medians: Vec<f64> = mine.iter().map(|r| r.report.median_normalized).collect();
        let monotone = medians.windows(2).all(|w| w[1] >= w[0]);
        if !monotone {
            log::warn!("{}: medians not monotone in ε", mode.name());
        }
        for row in &mine {
            row.report.check_rejection_budget()?;
            if row.epsilon != 0.0 {
                bound_sensitive(&mut verdict, &row.report, &cfg);
            }
            println!("{} ε={:e}:", mode.name(), row.epsilon);
            print_report(&row.report);
            write_csv(&dir.join(format!("scan_{}_{:e}.csv", mode.name(), row.epsilon)), &row.report)?;
        }
        curves.push(json!({
            "mode": mode,
            "monotone": monotone,
            "rows": mine
                .iter()
                .map(|r| json!({ "epsilon": r.epsilon, "report": report_json(&r.report, !common.no_timing) }))
                .collect::<Vec<_>>(),
        }));
    }
    write_summary(&dir, "scan", json!({ "curves": curves }), &cfg, common, &verdict)?;
    Ok(verdict)
}

fn pencil_info(args: &InfoArgs) -> HarnessResult<Verdict> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let pencil = cfg.build_pencil()?;
    let kind = pencil.form().kind();
    let euclidean = kind == ModelKind::Euclidean;
    println!("model {} d={}", kind.name(), pencil.form().dim());
    println!("global eigenvalues λ: {:?}", pencil.global_eigenvalues());
    if euclidean {
        let mu: Vec<f64> = pencil.global_eigenvalues().iter().map(|l| -l).collect();
        println!("global eigenvalues μ = -λ: {mu:?}");
    }
    for (a, b) in valid_member_intervals(&pencil) {
        println!("convex members for λ in [{a:.6}, {b:.6}] (grid estimate)");
    }
    match discover_nested_pair(&pencil) {
        Ok(p) => println!("discovered nested pair λ_inner={:.6} λ_outer={:.6}", p.inner, p.outer),
        Err(e) => println!("no nested pair: {e}"),
    }
    if let Some(y) = cfg.probe_point()? {
        let roots = pencil.confocal_parameters_through(&y)?;
        println!("members through probe, λ: {roots:?}");
        if euclidean {
            let mu: Vec<f64> = roots.iter().map(|l| -l).collect();
            println!("members through probe, μ: {mu:?}");
        }
    }
    Ok(Verdict::new())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::CommuteTest(c) => commute(c),
        Command::CausticTest(c) => caustic(c),
        Command::GermTest(c) => germ(c),
        Command::PerturbScan(c) => scan(c),
        Command::PencilInfo(a) => pencil_info(a),
    };
    match result {
        Ok(v) if v.passed => ExitCode::SUCCESS,
        Ok(v) => {
            for m in &v.messages {
                eprintln!("assertion failed: {m}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
