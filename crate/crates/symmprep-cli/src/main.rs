//! Command-line front end. Every run is driven by a resolved `Settings`
//! value built from an optional JSON config file plus flag overrides, so
//! identical inputs produce byte-identical outputs.
//!
//! Exit codes are a stable contract: 0 success, 2 configuration error,
//! 3 numerical failure.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use symmprep::classify::classify;
use symmprep::encoder::encode;
use symmprep::fock::{fock_route_prepare, pulses_to_json, ChirpProfile};
use symmprep::schedule::{
    execute, make_schedule, physical_units, single_step_trace, Backend, ExecOptions, Schedule,
};
use symmprep::state::{assemble_staircase, fidelity, SymmetricCoefficients};

// ---------------------------------------------------------------------------
// errors

#[derive(Debug)]
struct CliError {
    code: u8,
    err: anyhow::Error,
}

type CliResult<T> = Result<T, CliError>;

fn config_err(err: impl Into<anyhow::Error>) -> CliError {
    CliError { code: 2, err: err.into() }
}

fn config_msg(msg: impl Into<String>) -> CliError {
    config_err(anyhow::anyhow!(msg.into()))
}

fn lib_err(err: symmprep::Error) -> CliError {
    let code = match err {
        symmprep::Error::Numerical(_) => 3,
        _ => 2,
    };
    CliError { code, err: err.into() }
}

// ---------------------------------------------------------------------------
// command line

#[derive(Parser)]
#[command(name = "symmprep", version, about = "Pulse-schedule compiler and simulator for symmetric N-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the staircase encoding circuit for a target and verify it
    Encode(CommonOpts),
    /// Compile the sideband schedule and simulate the preparation
    Prepare(PrepareOpts),
    /// Synthesize the bosonic-mode route and score its fidelity
    FockRoute(CommonOpts),
    /// Report the degeneracy configuration of a symmetric state
    Classify(CommonOpts),
}

#[derive(Args)]
struct CommonOpts {
    /// JSON config file; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target state: "ghz", "w", "dicke:K", or comma-separated amplitudes
    /// like "1,2,3,4,5" or "1,0,0,0.5-0.5i"
    #[arg(long)]
    target: Option<String>,
    /// Number of qubits (inferred from an amplitude list when omitted)
    #[arg(long)]
    n: Option<usize>,
    /// Simulation backend
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Second drive rate, units of g1
    #[arg(long)]
    g2: Option<f64>,
    /// First drive detuning, units of g1
    #[arg(long)]
    delta1: Option<f64>,
    /// Bus (or mode) truncation dimension
    #[arg(long)]
    truncation: Option<usize>,
    /// Directory for output files (summary goes to stdout regardless)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Physical first-drive rate, e.g. "2pi*20kHz" or "125.6krad/s"
    #[arg(long)]
    physical_g1: Option<String>,
    /// Skip steps whose target component is zero
    #[arg(long)]
    skip_zero: bool,
}

#[derive(Args)]
struct PrepareOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Also emit the parameter/fidelity table for the compiled schedule
    #[arg(long)]
    reference_table2: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Effective,
    Full,
}

// ---------------------------------------------------------------------------
// config file

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    target: Option<TargetField>,
    n: Option<usize>,
    backend: Option<String>,
    g2: Option<f64>,
    delta1: Option<f64>,
    truncation: Option<usize>,
    samples_per_step: Option<usize>,
    out_dir: Option<PathBuf>,
    physical_g1: Option<FreqField>,
    skip_zero: Option<bool>,
    chirp: Option<ChirpField>,
    sweep_durations: Option<Vec<f64>>,
}

/// Inline amplitudes may be a grammar string or an explicit array; the
/// array form must already be normalized to 1e-6 (it is then renormalized
/// exactly), since committed configs are meant to be reproducibility
/// artifacts rather than ratio shorthands.
#[derive(Deserialize)]
#[serde(untagged)]
enum TargetField {
    Spec(String),
    Amplitudes(Vec<AmpField>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AmpField {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FreqField {
    RadiansPerSecond(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChirpField {
    g0: Option<f64>,
    span_factor: Option<f64>,
    duration: Option<f64>,
    dt: Option<f64>,
}

// ---------------------------------------------------------------------------
// resolved settings

struct Settings {
    target: Option<SymmetricCoefficients>,
    backend: Backend,
    g2: f64,
    delta1: f64,
    truncation: Option<usize>,
    samples_per_step: usize,
    out_dir: Option<PathBuf>,
    physical_g1: Option<f64>,
    skip_zero: bool,
    chirp: ChirpProfile,
    sweep_durations: Vec<f64>,
}

fn load_config(path: &Path) -> CliResult<FileConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))
        .map_err(config_err)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing config file {}", path.display()))
        .map_err(config_err)
}

fn resolve(opts: &CommonOpts) -> CliResult<Settings> {
    let file = match &opts.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };

    let n = opts.n.or(file.n);
    let target = match (&opts.target, &file.target) {
        (Some(spec), _) => Some(parse_target(spec, n)?),
        (None, Some(TargetField::Spec(spec))) => Some(parse_target(spec, n)?),
        (None, Some(TargetField::Amplitudes(amps))) => Some(amplitudes_target(amps, n)?),
        (None, None) => None,
    };

    let backend = match (&opts.backend, &file.backend) {
        (Some(BackendArg::Effective), _) => Backend::Effective,
        (Some(BackendArg::Full), _) => Backend::Full,
        (None, Some(s)) => match s.as_str() {
            "effective" => Backend::Effective,
            "full" => Backend::Full,
            other => return Err(config_msg(format!("unknown backend '{other}'"))),
        },
        (None, None) => Backend::Effective,
    };

    let physical_g1 = match (&opts.physical_g1, &file.physical_g1) {
        (Some(s), _) => Some(parse_angular_frequency(s).map_err(config_msg)?),
        (None, Some(FreqField::RadiansPerSecond(v))) => Some(*v),
        (None, Some(FreqField::Text(s))) => Some(parse_angular_frequency(s).map_err(config_msg)?),
        (None, None) => None,
    };

    let defaults = ChirpProfile::default();
    let chirp = match &file.chirp {
        Some(c) => ChirpProfile {
            g0: c.g0.unwrap_or(defaults.g0),
            span_factor: c.span_factor.unwrap_or(defaults.span_factor),
            duration: c.duration.unwrap_or(defaults.duration),
            dt: c.dt.unwrap_or(defaults.dt),
        },
        None => defaults,
    };

    Ok(Settings {
        target,
        backend,
        g2: opts.g2.or(file.g2).unwrap_or(0.1),
        delta1: opts.delta1.or(file.delta1).unwrap_or(20.0),
        truncation: opts.truncation.or(file.truncation),
        samples_per_step: file.samples_per_step.unwrap_or(24),
        out_dir: opts.out_dir.clone().or(file.out_dir),
        physical_g1,
        skip_zero: opts.skip_zero || file.skip_zero.unwrap_or(false),
        chirp,
        sweep_durations: file.sweep_durations.unwrap_or_default(),
    })
}

fn amplitudes_target(amps: &[AmpField], n: Option<usize>) -> CliResult<SymmetricCoefficients> {
    let c: Vec<C64> = amps
        .iter()
        .map(|a| match a {
            AmpField::Real(x) => C64::new(*x, 0.0),
            AmpField::Pair([re, im]) => C64::new(*re, *im),
        })
        .collect();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(config_msg(format!(
            "config coefficient array must be normalized (‖c‖ = {norm:.8}); \
             use the string form for unnormalized ratios"
        )));
    }
    check_n(c.len(), n)?;
    SymmetricCoefficients::normalized(c).map_err(lib_err)
}

fn check_n(len: usize, n: Option<usize>) -> CliResult<()> {
    if let Some(n) = n {
        if len != n + 1 {
            return Err(config_msg(format!(
                "amplitude list has {len} entries but --n {n} needs {}",
                n + 1
            )));
        }
    }
    Ok(())
}

fn parse_target(spec: &str, n: Option<usize>) -> CliResult<SymmetricCoefficients> {
    let s = spec.trim();
    let lower = s.to_lowercase();
    let need_n =
        || n.ok_or_else(|| config_msg(format!("named target '{s}' needs --n")));
    if lower == "ghz" {
        return SymmetricCoefficients::ghz(need_n()?).map_err(lib_err);
    }
    if lower == "w" {
        return SymmetricCoefficients::w_state(need_n()?).map_err(lib_err);
    }
    if let Some(k) = lower.strip_prefix("dicke:") {
        let k: usize = k
            .parse()
            .map_err(|_| config_msg(format!("bad excitation count in '{s}'")))?;
        return SymmetricCoefficients::dicke(need_n()?, k).map_err(lib_err);
    }
    let amps: Vec<C64> = s
        .split(',')
        .map(parse_complex)
        .collect::<Result<_, _>>()
        .map_err(config_msg)?;
    if amps.len() < 2 {
        return Err(config_msg(format!("target '{s}' is neither a named state nor a list")));
    }
    check_n(amps.len(), n)?;
    SymmetricCoefficients::normalized(amps).map_err(lib_err)
}

/// "1.5", "-2i", "0.3-0.1i", "1e-3+2e-3j" → complex amplitude.
fn parse_complex(s: &str) -> Result<C64, String> {
    let t = s.trim();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(C64::new(x, 0.0));
    }
    let body = t
        .strip_suffix(['i', 'j'])
        .ok_or_else(|| format!("bad amplitude '{s}'"))?;
    match body {
        "" | "+" => return Ok(C64::new(0.0, 1.0)),
        "-" => return Ok(C64::new(0.0, -1.0)),
        _ => {}
    }
    if let Ok(y) = body.parse::<f64>() {
        return Ok(C64::new(0.0, y));
    }
    // split real±imag at the last sign that is neither leading nor part of
    // an exponent
    for (idx, ch) in body.char_indices().rev() {
        if (ch == '+' || ch == '-') && idx > 0 {
            let prev = body.as_bytes()[idx - 1];
            if prev == b'e' || prev == b'E' {
                continue;
            }
            let re: f64 =
                body[..idx].parse().map_err(|_| format!("bad amplitude '{s}'"))?;
            let imag = &body[idx..];
            let im: f64 = match imag {
                "+" => 1.0,
                "-" => -1.0,
                _ => imag.parse().map_err(|_| format!("bad amplitude '{s}'"))?,
            };
            return Ok(C64::new(re, im));
        }
    }
    Err(format!("bad amplitude '{s}'"))
}

/// Angular frequency in rad/s. Hz-family units pick up the 2π exactly once,
/// so "20kHz" and "2pi*20kHz" both mean 2π·20·10³ rad/s; "rad/s" values and
/// bare numbers pass through.
fn parse_angular_frequency(raw: &str) -> Result<f64, String> {
    let cleaned = raw.trim().replace([' ', '_'], "").to_lowercase();
    let (body, had_2pi) = match cleaned.strip_prefix("2pi*").or_else(|| cleaned.strip_prefix("2π*"))
    {
        Some(rest) => (rest, true),
        None => (cleaned.as_str(), false),
    };
    const UNITS: [(&str, f64, bool); 6] = [
        ("ghz", 1e9, true),
        ("mhz", 1e6, true),
        ("khz", 1e3, true),
        ("hz", 1.0, true),
        ("krad/s", 1e3, false),
        ("rad/s", 1.0, false),
    ];
    for (suffix, scale, is_hz) in UNITS {
        if let Some(num) = body.strip_suffix(suffix) {
            let v: f64 = num
                .parse()
                .map_err(|_| format!("bad frequency '{raw}'"))?;
            return if is_hz {
                Ok(TAU * v * scale)
            } else if had_2pi {
                Err(format!("'2pi*' prefix only applies to Hz-family units in '{raw}'"))
            } else {
                Ok(v * scale)
            };
        }
    }
    let v: f64 = body.parse().map_err(|_| format!("bad frequency '{raw}'"))?;
    Ok(if had_2pi { TAU * v } else { v })
}

// ---------------------------------------------------------------------------
// output plumbing

fn write_out(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(config_err)?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(config_err)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn require_target(s: &Settings) -> CliResult<&SymmetricCoefficients> {
    s.target
        .as_ref()
        .ok_or_else(|| config_msg("no target given; pass --target or set it in the config"))
}

fn json_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serialization");
    out.push('\n');
    out
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------------------
// encode

#[derive(Serialize)]
struct EncodeReport {
    n_qubits: usize,
    gate_count: usize,
    verification_residual: f64,
    trivial_circuit: bool,
}

fn cmd_encode(settings: &Settings) -> CliResult<()> {
    let target = require_target(settings)?;
    let (circuit, encoded) = encode(target).map_err(lib_err)?;
    let reference = assemble_staircase(target);
    let residual = (1.0 - fidelity(&encoded, &reference).map_err(lib_err)?).abs();
    let report = EncodeReport {
        n_qubits: circuit.n_qubits,
        gate_count: circuit.gates.len(),
        verification_residual: residual,
        trivial_circuit: circuit.gates.iter().all(|g| g.pair().is_identity()),
    };
    println!(
        "encoding circuit: {} qubits, {} gates{}",
        report.n_qubits,
        report.gate_count,
        if report.trivial_circuit { " (no effect: target is the ground component)" } else { "" }
    );
    println!("verification residual: {:.3e}", report.verification_residual);
    let circuit_json = with_newline(circuit.to_json());
    if let Some(dir) = &settings.out_dir {
        write_out(dir, "circuit.json", &circuit_json)?;
        write_out(dir, "encode_report.json", &json_pretty(&report))?;
    } else {
        print!("{circuit_json}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// prepare

#[derive(Serialize)]
struct FidelityReport {
    units: &'static str,
    backend: &'static str,
    per_step_fidelity: Vec<f64>,
    final_fidelity: f64,
    max_norm_drift: f64,
    max_excitation_drift: f64,
}

#[derive(Serialize)]
struct BackendComparison {
    effective_per_step: Vec<f64>,
    full_per_step: Vec<f64>,
    effective_final: f64,
    full_final: f64,
    max_population_deviation: f64,
}

#[derive(Serialize)]
struct TimingReport {
    g1_radians_per_second: f64,
    total_seconds: f64,
    per_step_seconds: Vec<f64>,
}

fn reference_target() -> SymmetricCoefficients {
    SymmetricCoefficients::normalized(
        [1.0, 2.0, 3.0, 4.0, 5.0].iter().map(|&x| C64::new(x, 0.0)).collect(),
    )
    .expect("reference coefficients")
}

fn warn_if_marginal(schedule: &Schedule) {
    for step in &schedule.steps {
        if let Some(msg) = schedule.drive_config(step).dispersive_warning() {
            eprintln!("warning: {msg}");
            return;
        }
    }
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Effective => "effective",
        Backend::Full => "full",
    }
}

fn cmd_prepare(settings: &Settings, table: bool) -> CliResult<()> {
    // the four-qubit ramp target is the canonical demonstration, so a bare
    // `prepare` compiles exactly that
    let owned;
    let target = match &settings.target {
        Some(t) => t,
        None => {
            owned = reference_target();
            &owned
        }
    };
    let truncation = settings.truncation.unwrap_or(8);
    if matches!(settings.backend, Backend::Full) && truncation < 2 {
        return Err(config_msg(format!(
            "full backend needs --truncation ≥ 2 (got {truncation})"
        )));
    }
    let schedule = make_schedule(
        target.n_qubits(),
        target,
        settings.g2,
        settings.delta1,
        settings.skip_zero,
    )
    .map_err(lib_err)?;
    warn_if_marginal(&schedule);

    let opts = ExecOptions { samples_per_step: settings.samples_per_step, boson_dim: truncation };
    let report = execute(&schedule, settings.backend, &opts).map_err(lib_err)?;

    println!("# rates in units of g1");
    println!(
        "schedule: {} qubits, {} steps, total duration {:.4}",
        schedule.n_qubits,
        schedule.steps.len(),
        schedule.total_duration()
    );
    println!("backend: {}", backend_name(settings.backend));
    println!(
        "per-step fidelity: {}",
        report.per_step_fidelity.iter().map(|f| format!("{f:.6}")).collect::<Vec<_>>().join(" ")
    );
    println!("final fidelity: {:.6}", report.final_fidelity);

    let fidelities = FidelityReport {
        units: "rates in units of g1",
        backend: backend_name(settings.backend),
        per_step_fidelity: report.per_step_fidelity.clone(),
        final_fidelity: report.final_fidelity,
        max_norm_drift: report.max_norm_drift,
        max_excitation_drift: report.max_excitation_drift,
    };

    let comparison = if matches!(settings.backend, Backend::Full) {
        let eff = execute(&schedule, Backend::Effective, &opts).map_err(lib_err)?;
        let mut worst = 0.0f64;
        for (a, b) in eff.trajectories.iter().zip(report.trajectories.iter()) {
            for i in 0..a.times.len() {
                worst = worst
                    .max((a.source[i] - b.source[i]).abs())
                    .max((a.target[i] - b.target[i]).abs())
                    .max((a.formed[i] - b.formed[i]).abs());
            }
        }
        println!(
            "effective-backend final fidelity: {:.6} (max tracked-population deviation {:.4})",
            eff.final_fidelity, worst
        );
        Some(BackendComparison {
            effective_per_step: eff.per_step_fidelity.clone(),
            full_per_step: report.per_step_fidelity.clone(),
            effective_final: eff.final_fidelity,
            full_final: report.final_fidelity,
            max_population_deviation: worst,
        })
    } else {
        None
    };

    let timing = match settings.physical_g1 {
        Some(g1) => {
            let (t, per_step) = physical_units(&schedule, g1).map_err(lib_err)?;
            println!("total preparation time: {:.4} ms", t.total_seconds * 1e3);
            Some(TimingReport {
                g1_radians_per_second: t.g1_radians_per_second,
                total_seconds: t.total_seconds,
                per_step_seconds: per_step,
            })
        }
        None => None,
    };

    let table_text = if table {
        let text = schedule.table2_report(&report.per_step_fidelity);
        print!("{text}");
        Some(text)
    } else {
        None
    };

    if let Some(dir) = &settings.out_dir {
        write_out(dir, "schedule.json", &with_newline(schedule.to_json()))?;
        write_out(dir, "fidelities.json", &json_pretty(&fidelities))?;
        for (i, traj) in report.trajectories.iter().enumerate() {
            write_out(dir, &format!("protocol_step_{:02}.csv", i + 1), &traj.to_csv())?;
        }
        for i in 0..schedule.steps.len() {
            let traj =
                single_step_trace(&schedule, i, settings.backend, &opts).map_err(lib_err)?;
            write_out(dir, &format!("isolated_step_{:02}.csv", i + 1), &traj.to_csv())?;
        }
        if let Some(c) = &comparison {
            write_out(dir, "backend_comparison.json", &json_pretty(c))?;
        }
        if let Some(t) = &timing {
            write_out(dir, "timing.json", &json_pretty(t))?;
        }
        if let Some(text) = &table_text {
            write_out(dir, "table2.csv", text)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// fock route

#[derive(Serialize)]
struct FockReport {
    units: &'static str,
    pulse_count: usize,
    fidelity_raw: f64,
    fidelity_phase_corrected: f64,
}

fn cmd_fock_route(settings: &Settings) -> CliResult<()> {
    let target = require_target(settings)?;
    let n = target.n_qubits();
    let mode_dim = settings.truncation.unwrap_or(n + 2);
    let report = fock_route_prepare(target, &settings.chirp, mode_dim).map_err(lib_err)?;
    println!("mode route: {} pulses, mode truncation {}", report.pulses.len(), mode_dim);
    println!("raw fidelity: {:.6}", report.fidelity_raw);
    println!("phase-corrected fidelity: {:.6}", report.fidelity_phase_corrected);

    let sweep = if settings.sweep_durations.is_empty() {
        None
    } else {
        let mut rows = String::from("# rates in units of g1\nduration,fidelity\n");
        let mut fids = Vec::new();
        for &t in &settings.sweep_durations {
            let profile = ChirpProfile { duration: t, ..settings.chirp };
            let r = fock_route_prepare(target, &profile, mode_dim).map_err(lib_err)?;
            rows.push_str(&format!("{t},{:.9}\n", r.fidelity_phase_corrected));
            fids.push(r.fidelity_phase_corrected);
        }
        let monotone = fids.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        println!(
            "duration sweep over {:?}: fidelity {} with duration",
            settings.sweep_durations,
            if monotone { "non-decreasing" } else { "NOT monotone" }
        );
        Some(rows)
    };

    if let Some(dir) = &settings.out_dir {
        write_out(dir, "pulses.json", &with_newline(pulses_to_json(&report.pulses)))?;
        let wire = FockReport {
            units: "rates in units of g1",
            pulse_count: report.pulses.len(),
            fidelity_raw: report.fidelity_raw,
            fidelity_phase_corrected: report.fidelity_phase_corrected,
        };
        write_out(dir, "fock_report.json", &json_pretty(&wire))?;
        if let Some(rows) = &sweep {
            write_out(dir, "sweep.csv", rows)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classify

fn cmd_classify(settings: &Settings) -> CliResult<()> {
    let target = require_target(settings)?;
    let classification = classify(target).map_err(lib_err)?;
    let json = with_newline(classification.to_json());
    print!("{json}");
    if let Some(dir) = &settings.out_dir {
        write_out(dir, "class.json", &json)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Encode(opts) => cmd_encode(&resolve(opts)?),
        Command::Prepare(opts) => cmd_prepare(&resolve(&opts.common)?, opts.reference_table2),
        Command::FockRoute(opts) => cmd_fock_route(&resolve(opts)?),
        Command::Classify(opts) => cmd_classify(&resolve(opts)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.err);
            ExitCode::from(e.code)
        }
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_grammar() {
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), C64::new(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("0.3-0.1i").unwrap(), C64::new(0.3, -0.1));
        assert_eq!(parse_complex("1e-3+2e-3j").unwrap(), C64::new(1e-3, 2e-3));
        assert_eq!(parse_complex("-1.5-i").unwrap(), C64::new(-1.5, -1.0));
        assert!(parse_complex("one").is_err());
        assert!(parse_complex("1+2").is_err());
    }

    #[test]
    fn frequency_grammar() {
        let f = parse_angular_frequency("2pi*20kHz").unwrap();
        assert!((f - TAU * 20e3).abs() < 1e-9);
        // the 2π of an Hz-family unit is applied exactly once
        assert_eq!(parse_angular_frequency("20kHz").unwrap(), f);
        assert_eq!(parse_angular_frequency("125.6rad/s").unwrap(), 125.6);
        assert_eq!(parse_angular_frequency("0.125krad/s").unwrap(), 125.0);
        assert_eq!(parse_angular_frequency("7.5").unwrap(), 7.5);
        assert!((parse_angular_frequency("2pi*5").unwrap() - TAU * 5.0).abs() < 1e-12);
        assert!((parse_angular_frequency("0.02MHz").unwrap() - TAU * 20e3).abs() < 1e-9);
        assert!(parse_angular_frequency("2pi*3rad/s").is_err());
        assert!(parse_angular_frequency("fast").is_err());
    }

    #[test]
    fn target_grammar() {
        let ghz = parse_target("ghz", Some(4)).unwrap();
        assert_eq!(ghz.n_qubits(), 4);
        assert!(parse_target("ghz", None).is_err());
        let ramp = parse_target("1,2,3,4,5", None).unwrap();
        assert_eq!(ramp.n_qubits(), 4);
        assert!((ramp.get(4).re - 5.0 / 55.0f64.sqrt()).abs() < 1e-15);
        assert!(parse_target("1,2,3", Some(4)).is_err());
        let d = parse_target("dicke:2", Some(6)).unwrap();
        assert_eq!(d.n_qubits(), 6);
        assert!(parse_target("dicke:x", Some(6)).is_err());
    }

    #[test]
    fn config_arrays_must_be_normalized() {
        let half = 0.5f64;
        let amps: Vec<AmpField> = (0..4).map(|_| AmpField::Real(half)).collect();
        assert!(amplitudes_target(&amps, Some(3)).is_ok());
        let bad: Vec<AmpField> = (0..4).map(|_| AmpField::Real(1.0)).collect();
        let err = amplitudes_target(&bad, None).unwrap_err();
        assert_eq!(err.code, 2);
    }
}
