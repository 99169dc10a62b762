use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use betapoly::geometry::{umax, umax_bruteforce};
use betapoly::kernels::{
    analyze_kernel, kernel_for, reference_det_neg_g, reference_radial_partial, FiniteDifference,
    DEFAULT_GRADIENT_STEP, DEFAULT_HESSIAN_STEP, DEFAULT_RADIAL_STEP,
};
use betapoly::limits::law_for;
use betapoly::montecarlo::{
    ecdf_rows, run_trials, summarize, tail_probe, EmpiricalCdf, SimConfig, DEFAULT_FIT_WINDOW,
};
use betapoly::output;
use betapoly::sampler::{sample_batch, BetaParams, SeedPolicy};
use serde_json::json;

use crate::args::{
    Cli, Command, ConstantsArgs, SampleArgs, SimulateArgs, TailprobeArgs, UmaxArgs, VerifyArgs,
};
use crate::config::{require, switch, FileConfig};
use crate::CliError;

const DEFAULT_DELTA: f64 = 0.01;

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Validation("--threads must be at least 1".into()));
    }
    // zero lets rayon pick the available parallelism
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    log::debug!("running {} on {} threads", cli.command.name(), pool.current_num_threads());
    pool.install(|| run_command(cli.command, &file))
}

fn run_command(command: Command, file: &FileConfig) -> Result<(), CliError> {
    match command {
        Command::Sample(a) => sample(a, file),
        Command::Umax(a) => umax_cmd(a, file),
        Command::Constants(a) => constants(a, file),
        Command::Verify(a) => verify(a, file),
        Command::Simulate(a) => simulate(a, file),
        Command::Tailprobe(a) => tailprobe(a, file),
    }
}

/// Library errors about the inputs are validation failures; the rest are
/// runtime failures.
fn lib_err(e: betapoly::Error) -> CliError {
    use betapoly::Error as E;
    match e {
        E::InvalidBeta(_) | E::Domain { .. } | E::TooFewPoints { .. } | E::BruteForceGuard { .. } => {
            CliError::Validation(e.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| io_err(path, e))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| io_err(path, e))
}

fn print_json(value: &serde_json::Value) {
    println!("{value}");
}

fn make_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn sample(a: SampleArgs, f: &FileConfig) -> Result<(), CliError> {
    let beta = require(a.beta, f.beta, "beta")?;
    let count = require(a.count, f.count, "count")?;
    let seed = require(a.seed, f.seed, "seed")?;
    let out = require(a.out, f.out.clone(), "out")?;
    let params = BetaParams::new(beta).map_err(lib_err)?;
    let count = usize::try_from(count)
        .map_err(|_| CliError::Validation(format!("--count {count} is too large")))?;
    let points = sample_batch(params, count, SeedPolicy::new(seed), 0).map_err(lib_err)?;
    if out.as_os_str() == "-" {
        let stdout = std::io::stdout();
        output::write_points(stdout.lock(), &points).map_err(lib_err)
    } else {
        output::write_points(create(&out)?, &points).map_err(lib_err)?;
        log::info!("wrote {} points to {}", points.len(), out.display());
        Ok(())
    }
}

fn umax_cmd(a: UmaxArgs, f: &FileConfig) -> Result<(), CliError> {
    let input = require(a.input, f.input.clone(), "in")?;
    let n = require(a.n, f.n, "n")?;
    let objective = require(a.objective, f.objective, "objective")?;
    let brute = switch(a.brute_force, f.brute_force);
    let file = File::open(&input).map_err(|e| CliError::Validation(format!("{}: {e}", input.display())))?;
    let points = output::read_points(std::io::BufReader::new(file)).map_err(|e| {
        CliError::Validation(format!("{}: {e}", input.display()))
    })?;
    let result = if brute {
        umax_bruteforce(&points, n, objective)
    } else {
        umax(&points, n, objective)
    }
    .map_err(lib_err)?;
    print_json(&json!({
        "value": result.value,
        "vertex_indices": result.vertex_indices,
        "vertex_count": result.vertex_count,
    }));
    Ok(())
}

fn constants(a: ConstantsArgs, f: &FileConfig) -> Result<(), CliError> {
    let objective = require(a.objective, f.objective, "objective")?;
    let n = require(a.n, f.n, "n")?;
    let beta = require(a.beta, f.beta, "beta")?;
    let law = law_for(objective, n, beta).map_err(lib_err)?;
    let fields = [
        ("M", law.m),
        ("A", law.a),
        ("B", law.b),
        ("C", law.c),
        ("K_n", law.k_n),
        ("I", law.i),
    ];
    if switch(a.json, f.json) {
        let map: serde_json::Map<String, serde_json::Value> =
            fields.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        print_json(&serde_json::Value::Object(map));
    } else {
        for (k, v) in fields {
            println!("{k} = {}", output::fmt17(v));
        }
    }
    Ok(())
}

fn verify(a: VerifyArgs, f: &FileConfig) -> Result<(), CliError> {
    let objective = require(a.kernel, f.kernel, "kernel")?;
    let n = require(a.n, f.n, "n")?;
    let mut fd = FiniteDifference {
        gradient_step: DEFAULT_GRADIENT_STEP,
        hessian_step: DEFAULT_HESSIAN_STEP,
        radial_step: DEFAULT_RADIAL_STEP,
        richardson: switch(a.richardson, f.richardson),
    };
    if let Some(step) = a.step.or(f.step) {
        if !(step > 0.0 && step < 0.5) {
            return Err(CliError::Validation(format!("--step must lie in (0, 0.5) (got {step})")));
        }
        fd.gradient_step = step;
        fd.hessian_step = step;
        fd.radial_step = step;
    }
    let spec = kernel_for::<f64>(objective, n).map_err(lib_err)?;
    let analyses = analyze_kernel(&spec, &fd).map_err(lib_err)?;
    let first = &analyses[0];
    let residual = analyses
        .iter()
        .map(|x| x.gradient_residual())
        .fold(0.0, f64::max);
    let report = json!({
        "gradient_residual": residual,
        "det_negG": first.det_neg_g,
        "analytic_det": reference_det_neg_g(objective, n),
        "radial_partials": first.radial_partials,
        "analytic_partials": vec![reference_radial_partial(objective, n); n],
        "A6_pass": analyses.iter().all(|x| x.a6_pass),
        "A7_pass": analyses.iter().all(|x| x.a7_pass),
    });
    if switch(a.json, f.json) {
        print_json(&report);
    } else if let serde_json::Value::Object(map) = report {
        for (k, v) in map {
            println!("{k} = {v}");
        }
    }
    Ok(())
}

fn simulate(a: SimulateArgs, f: &FileConfig) -> Result<(), CliError> {
    let config = SimConfig {
        objective: require(a.objective, f.objective, "objective")?,
        n: require(a.n, f.n, "n")?,
        beta: require(a.beta, f.beta, "beta")?,
        sample_sizes: require(a.sample_sizes, f.sample_sizes.clone(), "N")?,
        trials: require(a.trials, f.trials, "trials")?,
        master_seed: require(a.seed, f.seed, "seed")?,
        record_timing: switch(a.timing, f.timing),
    };
    let out_dir = require(a.out_dir, f.out_dir.clone(), "out-dir")?;
    let delta = a.delta.or(f.delta).unwrap_or(DEFAULT_DELTA);
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CliError::Validation(format!("--delta must be positive (got {delta})")));
    }
    let window = match a.fit_window.or(f.fit_window.clone()) {
        None => DEFAULT_FIT_WINDOW,
        Some(w) if w.len() == 2 && 0.0 < w[0] && w[0] < w[1] && w[1] < 1.0 => (w[0], w[1]),
        Some(w) => {
            return Err(CliError::Validation(format!(
                "--fit-window needs LO,HI with 0 < LO < HI < 1 (got {w:?})"
            )))
        }
    };
    config.validate().map_err(lib_err)?;
    make_dir(&out_dir)?;

    log::info!(
        "simulating {} trials at N = {:?} on {} threads",
        config.trials,
        config.sample_sizes,
        rayon::current_num_threads()
    );
    let records = run_trials(&config).map_err(lib_err)?;
    let summary = summarize(&config, &records, window, delta).map_err(lib_err)?;

    let trials_path = out_dir.join("trials.csv");
    output::write_trials(create(&trials_path)?, &records).map_err(lib_err)?;
    write_json(&out_dir.join("summary.json"), &summary)?;

    let largest = *config.sample_sizes.iter().max().expect("validated");
    let ts: Vec<f64> = records
        .iter()
        .filter(|r| r.sample_size == largest)
        .map(|r| r.t)
        .collect();
    let ecdf = EmpiricalCdf::new(ts).map_err(lib_err)?;
    let rows = ecdf_rows(&ecdf, &summary.law);
    output::write_ecdf(create(&out_dir.join("ecdf.csv"))?, &rows).map_err(lib_err)?;
    log::info!("wrote results to {}", out_dir.display());
    Ok(())
}

fn tailprobe(a: TailprobeArgs, f: &FileConfig) -> Result<(), CliError> {
    let objective = require(a.objective, f.objective, "objective")?;
    let n = require(a.n, f.n, "n")?;
    let beta = require(a.beta, f.beta, "beta")?;
    let eps = require(a.eps, f.eps.clone(), "eps")?;
    let draws = require(a.draws, f.draws, "draws")?;
    let seed = require(a.seed, f.seed, "seed")?;
    let out_dir = require(a.out_dir, f.out_dir.clone(), "out-dir")?;
    law_for(objective, n, beta).map_err(lib_err)?;
    make_dir(&out_dir)?;

    let result = tail_probe(objective, n, beta, &eps, draws, seed).map_err(lib_err)?;
    output::write_tail(create(&out_dir.join("tail.csv"))?, &result.rows).map_err(lib_err)?;
    write_json(&out_dir.join("tail_summary.json"), &result)?;
    log::info!("wrote results to {}", out_dir.display());
    Ok(())
}
