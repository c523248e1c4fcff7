//! The five subcommands: table generation, key-rate evaluation, distance
//! sweeps, attack scenarios, and the oracle cross-checks.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use qmdiqkd_core::attacks::{
    four_dim_counterexample, joint_inputs, key_leak_overlap, orthogonal_source_scenario,
    single_bell_merge, verify_strategy,
};
use qmdiqkd_core::bound::{
    adversary_sampling, baseline_key_rate, epsilon_search, key_rate, xi_of, zeta_of, BoundConfig,
    BoundError,
};
use qmdiqkd_core::channel::{closed_form_table, monte_carlo_table, DetectorParams};
use qmdiqkd_core::tables::{ideal_bb84_table, joint_sender_table, OutcomeTable};

use crate::formats::{
    bound_result_to_json, encoding_set_to_json, table_from_json_str, table_to_json_string,
};
use crate::io::{emit, read_to_string};
use crate::{exit_codes, CliError};

/// Security-bound calculator for measurement-device-independent QKD with
/// uncharacterized qubit sources.
#[derive(Debug, Parser)]
#[command(name = "qmdiqkd", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an announcement table p(z|x,y) from detector parameters.
    Table(TableArgs),
    /// Compute the phase-error bound and secret-key rate for a table.
    Keyrate(KeyrateArgs),
    /// Sweep key rates over relay distance and emit CSV.
    Sweep(SweepArgs),
    /// Construct an insecurity scenario and verify its claims.
    Attack(AttackArgs),
    /// Cross-check the oracles against each other.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DetectorArgs {
    /// Sender-to-relay fiber length in km.
    #[arg(long = "l-km", default_value_t = 0.0)]
    pub l_km: f64,
    /// Detector efficiency in \[0,1\].
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Dark-count probability per detector per gate.
    #[arg(long, default_value_t = 0.0)]
    pub dark: f64,
}

impl DetectorArgs {
    fn params(&self) -> Result<DetectorParams, CliError> {
        DetectorParams::new(self.l_km, self.eta, self.dark).map_err(CliError::from)
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Grid steps for the two angle parameters.
    #[arg(long = "grid-u", default_value_t = 181)]
    pub grid_u: usize,
    /// Grid steps for the two overlap parameters.
    #[arg(long = "grid-r", default_value_t = 41)]
    pub grid_r: usize,
    /// Local refinement rounds around each branch maximum.
    #[arg(long, default_value_t = 2)]
    pub refine: usize,
    /// Safety padding on ε: the bound uses ε·(1+pad).
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub pad: f64,
    /// Minimum admissible squared branch denominator.
    #[arg(long = "denom-floor", default_value_t = 1e-12)]
    pub denom_floor: f64,
    /// Feasibility slack for the constraint checks.
    #[arg(long = "feas-tol", default_value_t = 1e-9)]
    pub feas_tol: f64,
}

impl BoundArgs {
    fn config(&self) -> Result<BoundConfig, CliError> {
        let cfg = BoundConfig {
            grid_u: self.grid_u,
            grid_r: self.grid_r,
            refine_rounds: self.refine,
            denom_floor: self.denom_floor,
            feas_tol: self.feas_tol,
            grid_pad: self.pad,
        };
        cfg.validate().map_err(CliError::from)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Sample the table with the Monte-Carlo event oracle instead of the
    /// closed form.
    #[arg(long)]
    pub mc: bool,
    /// Monte-Carlo rounds per sender pair.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Monte-Carlo seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Emit CSV (`x,y,p0,p1,p2`) instead of JSON.
    #[arg(long)]
    pub csv: bool,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KeyrateArgs {
    /// Load the table from a JSON file instead of the channel model.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[command(flatten)]
    pub bound: BoundArgs,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// First relay distance in km.
    #[arg(long = "l-min-km", default_value_t = 0.0)]
    pub l_min_km: f64,
    /// Last relay distance in km.
    #[arg(long = "l-max-km", default_value_t = 100.0)]
    pub l_max_km: f64,
    /// Number of sweep points (at least 2).
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    /// Detector efficiency in \[0,1\].
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Dark-count probability per detector per gate.
    #[arg(long, default_value_t = 1e-5)]
    pub dark: f64,
    #[command(flatten)]
    pub bound: BoundArgs,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Four-dimensional joint-source counterexample.
    FourDim,
    /// Single-identified-Bell-state relay with an orthogonal source.
    SingleBell,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Which insecurity scenario to run.
    #[arg(value_enum)]
    pub scenario: Scenario,
    #[command(flatten)]
    pub bound: BoundArgs,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Monte-Carlo rounds per pair for the channel-oracle check.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Sampled adversary strategies for the envelope check.
    #[arg(long = "adv-samples", default_value_t = 2_000)]
    pub adv_samples: u64,
    /// Seed for both sampling checks.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub bound: BoundArgs,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Table(args) => cmd_table(args),
        Command::Keyrate(args) => cmd_keyrate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

pub fn cmd_table(args: TableArgs) -> Result<i32, CliError> {
    let params = args.detector.params()?;
    let table = if args.mc {
        monte_carlo_table(&params, args.samples, args.seed)?
    } else {
        closed_form_table(&params)?
    };
    let payload = if args.csv {
        crate::formats::table_to_csv(&table)
    } else {
        table_to_json_string(&table)
    };
    emit(args.out.as_deref(), &payload)?;
    Ok(exit_codes::OK)
}

fn load_or_model(table: Option<&PathBuf>, detector: &DetectorArgs) -> Result<OutcomeTable, CliError> {
    match table {
        Some(path) => Ok(table_from_json_str(&read_to_string(path)?)?),
        None => {
            let params = detector.params()?;
            Ok(closed_form_table(&params)?)
        }
    }
}

pub fn cmd_keyrate(args: KeyrateArgs) -> Result<i32, CliError> {
    let table = load_or_model(args.table.as_ref(), &args.detector)?;
    let cfg = args.bound.config()?;
    match key_rate(&table, &cfg) {
        Ok(result) => {
            let mut value = bound_result_to_json(&result);
            value["xi_at_argmax"] = json!(xi_of(&table, &result.argmax));
            value["zeta_at_argmax"] = json!(zeta_of(&table, &result.argmax));
            let payload = serde_json::to_string_pretty(&value)
                .expect("json value serializes")
                + "\n";
            emit(args.out.as_deref(), &payload)?;
            Ok(if result.rate > 0.0 {
                exit_codes::OK
            } else {
                exit_codes::ZERO_RATE
            })
        }
        Err(BoundError::ZeroGain) => {
            let payload = serde_json::to_string_pretty(&json!({
                "rate": 0.0,
                "note": "no conclusive basis-0 announcements (zero gain)",
            }))
            .expect("json value serializes")
                + "\n";
            emit(args.out.as_deref(), &payload)?;
            Ok(exit_codes::ZERO_RATE)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_sweep(args: SweepArgs) -> Result<i32, CliError> {
    if args.steps < 2 {
        return Err(CliError::Usage("sweep needs at least 2 steps".into()));
    }
    if !(args.l_min_km.is_finite() && args.l_max_km.is_finite() && args.l_min_km < args.l_max_km) {
        return Err(CliError::Usage("--l-min-km must be below --l-max-km".into()));
    }
    let cfg = args.bound.config()?;
    let step = (args.l_max_km - args.l_min_km) / (args.steps - 1) as f64;
    let rows: Result<Vec<String>, CliError> = (0..args.steps)
        .into_par_iter()
        .map(|i| {
            let l = if i + 1 == args.steps {
                args.l_max_km
            } else {
                args.l_min_km + i as f64 * step
            };
            let params = DetectorParams::new(l, args.eta, args.dark)?;
            let table = closed_form_table(&params)?;
            let result = key_rate(&table, &cfg)?;
            let baseline = baseline_key_rate(&table)?;
            Ok(format!(
                "{},{},{},{},{},{}",
                l, result.rate, baseline, result.e_b, result.e_p, result.epsilon
            ))
        })
        .collect();
    let mut csv = String::from("l_km,rate_qmdi,rate_baseline,e_b,e_p,epsilon\n");
    for row in rows? {
        csv += &row;
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(exit_codes::OK)
}

pub fn cmd_attack(args: AttackArgs) -> Result<i32, CliError> {
    let cfg = args.bound.config()?;
    let (payload, pass) = match args.scenario {
        Scenario::FourDim => {
            let (joint, strategy) = four_dim_counterexample()?;
            let relations = joint.verify_relations();
            let induced = strategy
                .table()
                .map_err(|e| CliError::Usage(format!("strategy table invalid: {e}")))?;
            let target = joint_sender_table();
            let table_match = induced.max_abs_diff(&target) <= 1e-9;
            let eve_info = key_leak_overlap(&strategy).unwrap_or(f64::NAN);
            let report = verify_strategy(&strategy, &joint_inputs(&joint), Some(&target));
            let violations: Vec<String> = relations
                .iter()
                .cloned()
                .chain(report.violations.iter().map(|v| v.to_string()))
                .collect();
            let pass = table_match && eve_info <= 1e-9 && violations.is_empty();
            (
                json!({
                    "scenario": "four-dim",
                    "table_match": table_match,
                    "eve_info": eve_info,
                    "ancilla_dim": strategy.ancilla_dim(),
                    "violations": violations,
                }),
                pass,
            )
        }
        Scenario::SingleBell => {
            let scenario = orthogonal_source_scenario();
            let merged = single_bell_merge(&ideal_bb84_table());
            let indistinguishable = scenario.observed.max_abs_diff(&merged) == 0.0;
            let recovery = scenario.eve_bit_recovery_prob();
            let bound = key_rate(&scenario.observed, &cfg)?;
            let mut violations = Vec::new();
            if !indistinguishable {
                violations.push("observed table differs from honest merged table".to_string());
            }
            if recovery < 1.0 {
                violations.push(format!("relay operator bit recovery only {recovery}"));
            }
            if bound.rate != 0.0 {
                violations.push(format!("bound engine reports positive rate {}", bound.rate));
            }
            let pass = violations.is_empty();
            (
                json!({
                    "scenario": "single-bell",
                    "indistinguishable": indistinguishable,
                    "table_match": indistinguishable,
                    "eve_info": 1.0 - recovery,
                    "degenerate": bound.degenerate,
                    "rate": bound.rate,
                    "alice_encoding": encoding_set_to_json(&scenario.alice),
                    "bob_encoding": encoding_set_to_json(&scenario.bob),
                    "violations": violations,
                }),
                pass,
            )
        }
    };
    let text = serde_json::to_string_pretty(&payload).expect("json value serializes") + "\n";
    emit(args.out.as_deref(), &text)?;
    Ok(if pass { exit_codes::OK } else { exit_codes::FAILURE })
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn cmd_verify(args: VerifyArgs) -> Result<i32, CliError> {
    let cfg = args.bound.config()?;
    let mut checks = Vec::new();

    // Monte-Carlo event oracle vs closed form, 4 binomial σ per entry.
    {
        let points = [
            (0.0, 1.0, 0.0),
            (0.0, 0.1, 1e-5),
            (25.0, 0.1, 1e-5),
            (10.0, 0.5, 1e-4),
            (50.0, 0.2, 1e-3),
        ];
        let mut worst: f64 = 0.0;
        let mut pass = true;
        for (i, (l, eta, dark)) in points.iter().enumerate() {
            let params = DetectorParams::new(*l, *eta, *dark)?;
            let cf = closed_form_table(&params)?;
            let mc = monte_carlo_table(&params, args.samples, args.seed + i as u64)?;
            for pair in qmdiqkd_core::tables::SenderPair::ALL {
                for z in 0..3 {
                    let expect = cf.p_idx(z, pair.x(), pair.y());
                    let got = mc.p_idx(z, pair.x(), pair.y());
                    let sigma = (expect * (1.0 - expect) / args.samples as f64).sqrt();
                    let sigmas = if sigma > 0.0 {
                        (got - expect).abs() / sigma
                    } else if got == expect {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    worst = worst.max(sigmas);
                    if sigmas > 4.0 {
                        pass = false;
                    }
                }
            }
        }
        checks.push(Check {
            name: "mc-vs-closed-form",
            pass,
            detail: format!("worst deviation {worst:.2} sigma over 5 parameter points"),
        });
    }

    // The ε envelope must dominate both the raw grid maximum and every
    // explicitly sampled adversary strategy.
    {
        let params = DetectorParams::new(25.0, 0.1, 1e-5)?;
        let table = closed_form_table(&params)?;
        let out = epsilon_search(&table, &cfg)?;
        let eps_safe = out.epsilon * (1.0 + cfg.grid_pad);
        let sampled = adversary_sampling(&table, &cfg, args.adv_samples, args.seed)?;
        let pass = sampled <= eps_safe + cfg.feas_tol && out.epsilon <= eps_safe + cfg.feas_tol;
        checks.push(Check {
            name: "epsilon-envelope",
            pass,
            detail: format!(
                "epsilon {:.6e}, padded {:.6e}, sampled adversary max {:.6e}",
                out.epsilon, eps_safe, sampled
            ),
        });
    }

    // Refinement may only push the grid maximum up.
    {
        let params = DetectorParams::new(40.0, 0.1, 1e-5)?;
        let table = closed_form_table(&params)?;
        let base_cfg = BoundConfig { refine_rounds: 0, ..cfg.clone() };
        let base = epsilon_search(&table, &base_cfg)?.epsilon;
        let refined = epsilon_search(&table, &cfg)?.epsilon;
        checks.push(Check {
            name: "refinement-monotonicity",
            pass: refined >= base - cfg.feas_tol,
            detail: format!("base {base:.6e}, refined {refined:.6e}"),
        });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let payload = json!({
        "all_pass": all_pass,
        "checks": checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
            .collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&payload).expect("json value serializes") + "\n";
    emit(args.out.as_deref(), &text)?;
    Ok(if all_pass { exit_codes::OK } else { exit_codes::FAILURE })
}
