//! Command-line front end: one subcommand per engine, CSV/JSON outputs, and a
//! provenance manifest next to every output file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::channels::{DecoyPolicy, DetectorNoise, EveOverlapLaw, Modulation, PhotonBudget};
use crate::linkbudget;
use crate::montecarlo::{simulate, SimConfig};
use crate::secrecy::{optimize_decoy, sweep, Scenario, ScenarioSpec};
use crate::squeezed::{squeezed_qq_rate, SqueezeBudget};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser)]
#[command(
    name = "owsec",
    version,
    about = "Secrecy capacities of binary optical wiretap channels and secure link design"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the optimized secrecy rate at one (gamma, n_bob) point.
    Capacity(CapacityArgs),
    /// Optimize the rate over a (gamma, n_bob) grid and write a CSV table.
    Sweep(SweepArgs),
    /// Design an inter-satellite link around its security link margin.
    Link(LinkArgs),
    /// Compare squeezed against coherent signaling for the QQ scenario.
    Squeezed(SqueezedArgs),
    /// Monte Carlo cross-validation of the closed-form channels.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct ScenarioFlags {
    #[arg(long, value_enum)]
    modulation: Modulation,
    #[arg(long, value_enum)]
    scenario: Scenario,
    /// Mean noise photons per pulse at Bob's photon counter.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Dark-count probability per gate.
    #[arg(long, default_value_t = 1e-6)]
    p_dark: f64,
    /// Hold (a, b) = (0, 1) and optimize the prior only.
    #[arg(long)]
    no_decoys: bool,
    /// Overlap law for Eve's intercepted pair.
    #[arg(long, value_enum, default_value_t = EveOverlapLaw::OnOff)]
    eve_law: EveOverlapLaw,
}

impl ScenarioFlags {
    fn spec(&self, gamma: f64, n_bob: f64) -> Result<ScenarioSpec> {
        let budget = PhotonBudget::new(n_bob, gamma)
            .map_err(|e| Error::Config(format!("--gamma/--n-bob: {e}")))?;
        let noise = DetectorNoise::new(self.p_dark, self.delta)
            .map_err(|e| Error::Config(format!("--p-dark/--delta: {e}")))?;
        Ok(ScenarioSpec::new(self.modulation, self.scenario, budget)
            .with_noise(noise)
            .with_decoys(!self.no_decoys)
            .with_eve_law(self.eve_law))
    }
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    n_bob: f64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Gamma grid as lo:hi:n.
    #[arg(long)]
    gamma_grid: String,
    /// Photon-number grid as lo:hi:n.
    #[arg(long)]
    n_grid: String,
    /// Space the photon-number grid logarithmically.
    #[arg(long)]
    log_n: bool,
    #[arg(long, short, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct LinkArgs {
    /// Flat key = value file with the link parameters.
    #[arg(long)]
    config: PathBuf,
    /// Range grid in meters as lo:hi:n.
    #[arg(long, default_value = "100e3:5000e3:50")]
    range_grid: String,
    /// Target mean photons per pulse at the operating point.
    #[arg(long, default_value_t = 1.0)]
    n_b_star: f64,
    /// Override the config's Eve fraction.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, short, default_value = "link.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SqueezedArgs {
    /// Squeezing fraction xi in [0, 1).
    #[arg(long)]
    xi: f64,
    #[arg(long, value_enum)]
    modulation: Modulation,
    #[arg(long)]
    gamma_grid: String,
    #[arg(long)]
    n_grid: String,
    #[arg(long)]
    log_n: bool,
    #[arg(long, short, default_value = "squeezed.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    n_bob: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 0.5)]
    q_v0: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Provenance record written as <output>.manifest.json next to each output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub outputs: Vec<String>,
    pub duration_ms: u128,
    pub created_unix_ms: u128,
}

impl RunManifest {
    fn new(subcommand: &str, parameters: serde_json::Value) -> (Self, Instant) {
        (
            Self {
                tool: "owsec",
                version: env!("CARGO_PKG_VERSION"),
                subcommand: subcommand.to_string(),
                parameters,
                outputs: Vec::new(),
                duration_ms: 0,
                created_unix_ms: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or(0),
            },
            Instant::now(),
        )
    }

    fn write(mut self, started: Instant, primary_output: &Path) -> Result<()> {
        self.duration_ms = started.elapsed().as_millis();
        let path = manifest_path(primary_output);
        std::fs::write(path, serde_json::to_string_pretty(&self)?)?;
        Ok(())
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Parses a lo:hi:n grid specification.
fn parse_grid(spec: &str, flag: &str, log: bool) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("{flag}: expected lo:hi:n, got {spec:?}")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Config(format!("{flag}: bad lower bound {:?}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("{flag}: bad upper bound {:?}", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::Config(format!("{flag}: bad point count {:?}", parts[2])))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::Config(format!("{flag}: degenerate grid {spec:?}")));
    }
    if log {
        if lo <= 0.0 {
            return Err(Error::Config(format!("{flag}: log spacing needs lo > 0")));
        }
        return Ok(crate::secrecy::log_spaced(lo, hi, n));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Nine significant digits, stable across runs.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[derive(Serialize)]
struct CapacityOutput {
    rate: f64,
    rate_clamped: f64,
    secure: bool,
    policy: DecoyPolicy,
    i_bob: f64,
    i_eve: f64,
    degraded: bool,
    converged: bool,
}

fn cmd_capacity(args: &CapacityArgs) -> Result<()> {
    let spec = args.scenario.spec(args.gamma, args.n_bob)?;
    let r = optimize_decoy(&spec);
    let out = CapacityOutput {
        rate: r.rate,
        rate_clamped: r.rate.max(0.0),
        secure: r.rate > 0.0,
        policy: r.policy_star,
        i_bob: r.i_bob,
        i_eve: r.i_eve_or_holevo,
        degraded: r.degraded,
        converged: r.converged,
    };
    let rendered = serde_json::to_string_pretty(&out)?;
    match &args.out {
        Some(path) => {
            let (mut manifest, started) =
                RunManifest::new("capacity", json!({ "spec": spec, "out": path }));
            write_output(path, &rendered)?;
            manifest.outputs.push(path.display().to_string());
            manifest.write(started, path)?;
        }
        None => println!("{rendered}"),
    }
    if !out.secure {
        eprintln!("note: rate <= 0, not secure at this operating point");
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let template = args.scenario.spec(0.0, 1.0)?;
    let gammas = parse_grid(&args.gamma_grid, "--gamma-grid", false)?;
    let ns = parse_grid(&args.n_grid, "--n-grid", args.log_n)?;
    let (mut manifest, started) = RunManifest::new(
        "sweep",
        json!({
            "spec": template,
            "gamma_grid": args.gamma_grid,
            "n_grid": args.n_grid,
            "log_n": args.log_n,
            "out": args.out,
        }),
    );

    let rows = sweep(&template, &gammas, &ns)?;
    let mut csv = String::from("gamma,n_bob,rate,a,b,q_v0,i_bob,i_eve\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            sig9(row.gamma),
            sig9(row.n_bob),
            sig9(row.rate),
            sig9(row.policy.a),
            sig9(row.policy.b),
            sig9(row.policy.q_v0),
            sig9(row.i_bob),
            sig9(row.i_eve),
        );
    }
    write_output(&args.out, &csv)?;
    manifest.outputs.push(args.out.display().to_string());
    manifest.write(started, &args.out)?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_link(args: &LinkArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("--config {}: {e}", args.config.display())))?;
    let mut params = linkbudget::parse_link_config(&text)?;
    if let Some(gamma) = args.gamma {
        if !(gamma >= 0.0) {
            return Err(Error::Config(format!("--gamma = {gamma} must be >= 0")));
        }
        params.gamma = gamma;
    }
    if !(args.n_b_star > 0.0) {
        return Err(Error::Config(format!("--n-b-star = {} must be > 0", args.n_b_star)));
    }
    let ranges = parse_grid(&args.range_grid, "--range-grid", false)?;

    let (mut manifest, started) = RunManifest::new(
        "link",
        json!({
            "config": args.config,
            "params": params,
            "range_grid": args.range_grid,
            "n_b_star": args.n_b_star,
            "out": args.out,
        }),
    );

    let design = linkbudget::design(&params, args.n_b_star)?;
    let rows = linkbudget::required_transmit(&params, args.n_b_star, &ranges)?;
    let mut csv = String::from("R_m,n_t,power_W,eta,slm\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            sig9(row.range_m),
            sig9(row.n_t),
            sig9(row.power_w),
            sig9(row.eta),
            sig9(row.slm),
        );
    }
    write_output(&args.out, &csv)?;
    println!("{}", serde_json::to_string_pretty(&design)?);
    manifest.outputs.push(args.out.display().to_string());
    manifest.write(started, &args.out)?;
    Ok(())
}

fn cmd_squeezed(args: &SqueezedArgs) -> Result<()> {
    if !(0.0..1.0).contains(&args.xi) {
        return Err(Error::Config(format!("--xi = {} must lie in [0, 1)", args.xi)));
    }
    let gammas = parse_grid(&args.gamma_grid, "--gamma-grid", false)?;
    let ns = parse_grid(&args.n_grid, "--n-grid", args.log_n)?;
    let (mut manifest, started) = RunManifest::new(
        "squeezed",
        json!({
            "xi": args.xi,
            "modulation": args.modulation,
            "gamma_grid": args.gamma_grid,
            "n_grid": args.n_grid,
            "log_n": args.log_n,
            "out": args.out,
        }),
    );

    let mut csv = String::from("gamma,n_bob,rate_coherent,rate_squeezed,relative_gain\n");
    for &gamma in &gammas {
        for &n in &ns {
            let coherent =
                crate::secrecy::secrecy_capacity_qq(args.modulation, PhotonBudget::new(n, gamma)?);
            let squeezed =
                squeezed_qq_rate(args.modulation, SqueezeBudget::new(n, args.xi)?, gamma)?;
            let gain = if coherent.rate.abs() > 1e-15 {
                (squeezed.rate - coherent.rate) / coherent.rate
            } else {
                0.0
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                sig9(gamma),
                sig9(n),
                sig9(coherent.rate),
                sig9(squeezed.rate),
                sig9(gain),
            );
        }
    }
    write_output(&args.out, &csv)?;
    manifest.outputs.push(args.out.display().to_string());
    manifest.write(started, &args.out)?;
    eprintln!("wrote {} rows to {}", gammas.len() * ns.len(), args.out.display());
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let spec = args.scenario.spec(args.gamma, args.n_bob)?;
    let policy = DecoyPolicy::new(args.a, args.b, args.q_v0)
        .map_err(|e| Error::Config(format!("--a/--b/--q-v0: {e}")))?;
    if args.samples == 0 {
        return Err(Error::Config("--samples must be >= 1".into()));
    }
    let cfg = SimConfig { spec, policy, n_samples: args.samples, seed: args.seed };
    let report = simulate(&cfg)?;
    let rendered = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => {
            let (mut manifest, started) =
                RunManifest::new("simulate", serde_json::to_value(&cfg)?);
            write_output(path, &rendered)?;
            manifest.outputs.push(path.display().to_string());
            manifest.write(started, path)?;
        }
        None => println!("{rendered}"),
    }
    Ok(())
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage errors
            e.exit();
        }
    };
    let result = match &cli.command {
        Command::Capacity(args) => cmd_capacity(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Link(args) => cmd_link(args),
        Command::Squeezed(args) => cmd_squeezed(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e @ (Error::Config(_) | Error::Domain(_))) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NUMERICAL
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3", "--g", false).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:9:1", "--g", false).unwrap(), vec![2.0]);
        let log = parse_grid("0.01:10:4", "--g", true).unwrap();
        assert!((log[0] - 0.01).abs() < 1e-12);
        assert!((log[3] - 10.0).abs() < 1e-9);
        assert!(parse_grid("1:0:5", "--g", false).is_err());
        assert!(parse_grid("1:2", "--g", false).is_err());
        assert!(parse_grid("0:1:0", "--g", false).is_err());
        assert!(parse_grid("-1:1:5", "--g", true).is_err());
    }

    #[test]
    fn sig9_is_nine_significant_digits() {
        assert_eq!(sig9(0.2575962996985862), "2.57596300e-1");
        assert_eq!(sig9(6.407889861770738e-9), "6.40788986e-9");
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("out/sweep.csv")),
            PathBuf::from("out/sweep.csv.manifest.json")
        );
    }
}
