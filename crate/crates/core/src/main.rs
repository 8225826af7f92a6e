//! Batch experiment runner: certifies the adversarial lower bound, the
//! uniformity and consistency checks, the shattering bound, the baseline
//! learner guarantee, and the secret-sharing primitives from the command
//! line, emitting machine-parseable reports.
//!
//! Exit codes: 0 = ok, 1 = an asserted property failed, 2 = bad config.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use itertools::Itertools;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use otplab::adversary::{
    build_instances, check_consistency_ladder, enumerate_draws, run_experiment, verify_uniformity,
    Mode,
};
use otplab::hypotheses::enumerate_class;
use otplab::regularization::{builtin_family, load_regularizer, RegularizerTable};
use otplab::shattering::{ds_dimension_upto, is_ds_shattered, restrict};
use otplab::secretsharing::{
    otp_reconstruct, otp_share, shamir_reconstruct, shamir_share, verify_secrecy, OtpShares,
    ShamirShare,
};
use otplab::strings::BitString;
use otplab::transduction::{
    transductive_error, BaselineLearner, TransductiveInstance,
};

#[derive(Parser)]
#[command(name = "otplab", version, about = "Verification lab for local-regularization lower bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled-instance experiment and certify the 1/4 bound.
    Adversary(AdversaryArgs),
    /// Check conditional uniformity of x_test and the consistency ladder.
    Verify(VerifyArgs),
    /// Search for DS-shattered point subsequences.
    Dsdim(DsdimArgs),
    /// Sweep the baseline learner over all instances at a given dimension.
    Learner(LearnerArgs),
    /// Secret-sharing primitives: share, reconstruct, verify.
    Secret(SecretArgs),
}

#[derive(Args)]
struct AdversaryArgs {
    /// Construction parameter d (strings have length 2d); a single value or
    /// an inclusive range "1..4".
    #[arg(long)]
    d: String,
    /// Regularizer specs, comma separated: "name:seed" (random, hash,
    /// prefer-tag0, prefer-tag1, constant) or a path to a JSON table.
    #[arg(long)]
    reg: String,
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Complete a non-injective table by stable-id tie-break before use.
    #[arg(long)]
    complete: bool,
    /// Exit 1 when an exhaustive mean falls below 1/4.
    #[arg(long)]
    assert_bound: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    d: usize,
    /// "all" or a comma-separated subset of 1..4.
    #[arg(long, default_value = "all")]
    families: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DsdimArgs {
    #[arg(long)]
    d: usize,
    /// Inclusive point range, e.g. "0..3".
    #[arg(long)]
    points: String,
    #[arg(long, default_value_t = 3)]
    kmax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LearnerArgs {
    #[arg(long)]
    d: Option<usize>,
    /// Sweep every hypothesis and every duplicate-free point subset of
    /// 0..d.
    #[arg(long)]
    exhaustive: bool,
    /// Evaluate the baseline on a single instance file instead.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SecretArgs {
    #[command(subcommand)]
    action: SecretAction,
}

#[derive(Subcommand)]
enum SecretAction {
    /// Share a secret: --secret for OTP bit strings, --k for Shamir.
    Share {
        #[arg(long)]
        secret: Option<String>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value_t = 2)]
        t: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reconstruct from "j:value" tokens (Shamir) or bit strings (OTP).
    Reconstruct {
        #[arg(long)]
        shares: String,
        #[arg(long, default_value_t = 2)]
        t: usize,
        #[arg(long, default_value_t = 7)]
        q: u64,
    },
    /// Exhaustively verify perfect secrecy of the (t, n) scheme mod q.
    Verify {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
    },
}

enum Outcome {
    Ok,
    AssertionFailed(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionFailed(msg)) => {
            eprintln!("FAILED: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Adversary(args) => cmd_adversary(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Dsdim(args) => cmd_dsdim(args),
        Command::Learner(args) => cmd_learner(args),
        Command::Secret(args) => cmd_secret(args),
    }
}

fn parse_range(spec: &str) -> anyhow::Result<Vec<usize>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse()?;
        let hi: usize = hi.trim().parse()?;
        anyhow::ensure!(lo <= hi, "empty range {spec:?}");
        Ok((lo..=hi).collect())
    } else {
        Ok(vec![spec.trim().parse()?])
    }
}

fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os("OTPLAB_OUT_DIR") {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(resolve_out(path), text)?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Builds a regularizer for the adversary at parameter d: the class is
/// enumerate_class(2d) and the point domain is 0..2d.
fn build_reg(spec: &str, d: usize, complete: bool) -> anyhow::Result<RegularizerTable> {
    let is_path = spec.ends_with(".json") || spec.contains('/');
    let table = if is_path {
        load_regularizer(Path::new(spec))?
    } else {
        let (name, seed) = match spec.split_once(':') {
            Some((name, seed)) => (name, seed.parse()?),
            None => (spec, 0u64),
        };
        let class = Arc::new(enumerate_class(2 * d)?);
        builtin_family(name, class, 2 * d, seed)?
    };
    if table.is_locally_injective() {
        Ok(table)
    } else if complete {
        Ok(table.complete_by_id()?)
    } else {
        anyhow::bail!(
            "regularizer {spec:?} is not locally injective; pass --complete to \
             break ties by hypothesis id"
        )
    }
}

fn cmd_adversary(args: AdversaryArgs) -> anyhow::Result<Outcome> {
    let mode = match args.mode.as_str() {
        "exhaustive" => Mode::Exhaustive,
        "monte-carlo" => Mode::MonteCarlo,
        other => anyhow::bail!("unknown mode {other:?}"),
    };
    let ds = parse_range(&args.d)?;
    anyhow::ensure!(!ds.is_empty() && ds[0] >= 1, "d must be at least 1");
    if mode == Mode::Exhaustive {
        anyhow::ensure!(
            *ds.iter().max().unwrap() <= 4,
            "exhaustive mode supports d <= 4; use --mode monte-carlo beyond"
        );
    }
    let regs: Vec<&str> = args.reg.split(',').map(str::trim).collect();
    let quarter = Ratio::new(1u64, 4u64);
    let mut reports = Vec::new();
    let mut violations = Vec::new();
    for &d in &ds {
        for reg in &regs {
            let table = build_reg(reg, d, args.complete)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let report = run_experiment(d, &table, mode, args.trials, &mut rng, args.workers)?;
            if args.assert_bound && mode == Mode::Exhaustive && report.mean_exact < quarter {
                violations.push(format!("d={d} reg={reg}: mean {} < 1/4", report.mean));
            }
            let mut value = serde_json::to_value(&report)?;
            value["config"] = json!({
                "d": d,
                "reg": reg,
                "mode": args.mode,
                "trials": args.trials,
                "seed": args.seed,
                "workers": args.workers,
                "complete": args.complete,
            });
            reports.push((d, reg.to_string(), value));
        }
    }
    let text = match args.format.as_str() {
        "json" => {
            if reports.len() == 1 {
                serde_json::to_string_pretty(&reports[0].2)?
            } else {
                let values: Vec<_> = reports.iter().map(|(_, _, v)| v).collect();
                serde_json::to_string_pretty(&values)?
            }
        }
        "csv" => {
            let mut rows = vec![
                "d,reg,mode,draws,mean,family_mean_1,family_mean_2,family_mean_3,family_mean_4,cycle_failures"
                    .to_string(),
            ];
            for (d, reg, v) in &reports {
                rows.push(format!(
                    "{d},{reg},{},{},{},{},{},{},{},{}",
                    v["mode"].as_str().unwrap(),
                    v["draws"],
                    v["mean"].as_str().unwrap(),
                    v["family_means"][0].as_str().unwrap(),
                    v["family_means"][1].as_str().unwrap(),
                    v["family_means"][2].as_str().unwrap(),
                    v["family_means"][3].as_str().unwrap(),
                    v["cycle_failures"],
                ));
            }
            rows.join("\n") + "\n"
        }
        other => anyhow::bail!("unknown format {other:?}"),
    };
    emit(&args.out, &text)?;
    if violations.is_empty() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::AssertionFailed(violations.join("; ")))
    }
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<Outcome> {
    anyhow::ensure!(args.d >= 1 && args.d <= 4, "verify supports 1 <= d <= 4");
    let families: Vec<usize> = if args.families == "all" {
        vec![1, 2, 3, 4]
    } else {
        args.families
            .split(',')
            .map(|f| f.trim().parse::<usize>())
            .collect::<Result<_, _>>()?
    };
    let mut failures = Vec::new();
    let mut family_summaries = Vec::new();
    for &family in &families {
        let report = verify_uniformity(args.d, family)?;
        if !report.all_uniform {
            failures.push(format!("family {family} not uniform"));
        }
        family_summaries.push(json!({
            "family": family,
            "groups": report.groups,
            "all_uniform": report.all_uniform,
        }));
    }
    let mut ladder_ok = true;
    for dr in enumerate_draws(args.d)? {
        let ci = build_instances(&dr)?;
        if check_consistency_ladder(&ci).is_err() {
            ladder_ok = false;
            failures.push(format!("consistency ladder failed at {dr:?}"));
            break;
        }
    }
    let text = serde_json::to_string_pretty(&json!({
        "d": args.d,
        "families": family_summaries,
        "consistency_ladder": ladder_ok,
    }))?;
    emit(&args.out, &text)?;
    if failures.is_empty() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::AssertionFailed(failures.join("; ")))
    }
}

fn cmd_dsdim(args: DsdimArgs) -> anyhow::Result<Outcome> {
    let points: Vec<u64> = parse_range(&args.points)?
        .into_iter()
        .map(|p| p as u64)
        .collect();
    let class = enumerate_class(args.d)?;
    let k = ds_dimension_upto(&class, &points, args.kmax)?;
    let witness: Option<Vec<u64>> = if k > 0 {
        points
            .iter()
            .copied()
            .combinations(k)
            .find(|subset| {
                restrict(&class, subset)
                    .map(|t| is_ds_shattered(&t))
                    .unwrap_or(false)
            })
    } else {
        None
    };
    let text = serde_json::to_string_pretty(&json!({
        "d": args.d,
        "kmax": args.kmax,
        "k": k,
        "witness_points": witness,
    }))?;
    emit(&args.out, &text)?;
    Ok(Outcome::Ok)
}

fn cmd_learner(args: LearnerArgs) -> anyhow::Result<Outcome> {
    if let Some(path) = &args.instance {
        let inst = TransductiveInstance::from_json(&std::fs::read_to_string(path)?)?;
        let err = transductive_error(&BaselineLearner, &inst)?;
        let text = serde_json::to_string_pretty(&json!({
            "instance": serde_json::from_str::<serde_json::Value>(&inst.to_json()?)?,
            "error": otplab::transduction::ratio_string(err),
        }))?;
        emit(&args.out, &text)?;
        return Ok(Outcome::Ok);
    }
    anyhow::ensure!(args.exhaustive, "pass --exhaustive or --instance");
    let d = args.d.ok_or_else(|| anyhow::anyhow!("--d required with --exhaustive"))?;
    let class = enumerate_class(d)?;
    // Split pairs -- two points carrying the two different labels -- are
    // tracked apart: no deterministic learner can err fewer than twice on
    // them, so the one-mistake bound is asserted over everything else.
    let mut max_mistakes = 0u64;
    let mut witness = None;
    let mut split_pairs = 0u64;
    let mut split_pair_ok = true;
    let mut instances = 0u64;
    for m in class.iter() {
        let h = *m.as_otp().unwrap();
        for n in 1..=d {
            for points in (0..d as u64).combinations(n) {
                let inst = TransductiveInstance::new(points, h)?;
                let labels = otplab::transduction::label_instance(&inst);
                let distinct: std::collections::BTreeSet<_> =
                    labels.examples.iter().map(|(_, y)| *y).collect();
                let err = transductive_error(&BaselineLearner, &inst)?;
                let mistakes = err.numer() * (n as u64) / err.denom();
                instances += 1;
                if n == 2 && distinct.len() == 2 {
                    split_pairs += 1;
                    split_pair_ok &= mistakes == 2;
                    continue;
                }
                if mistakes > max_mistakes || witness.is_none() {
                    max_mistakes = mistakes;
                    witness = Some(inst);
                }
            }
        }
    }
    let witness = witness.expect("at least one instance");
    let text = serde_json::to_string_pretty(&json!({
        "d": d,
        "instances": instances,
        "max_n_error": max_mistakes,
        "split_pairs": split_pairs,
        "witness": serde_json::from_str::<serde_json::Value>(&witness.to_json()?)?,
    }))?;
    emit(&args.out, &text)?;
    if max_mistakes <= 1 && split_pair_ok {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::AssertionFailed(format!(
            "baseline bound violated: max n*error = {max_mistakes}"
        )))
    }
}

fn parse_shamir_shares(spec: &str) -> anyhow::Result<Vec<ShamirShare>> {
    spec.split(',')
        .map(|tok| {
            let (j, v) = tok
                .trim()
                .split_once(':')
                .ok_or_else(|| anyhow::anyhow!("bad share token {tok:?}, expected j:value"))?;
            Ok(ShamirShare { index: j.parse()?, value: v.parse()? })
        })
        .collect()
}

fn cmd_secret(args: SecretArgs) -> anyhow::Result<Outcome> {
    match args.action {
        SecretAction::Share { secret, k, t, n, q, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match (secret, k) {
                (Some(bits), None) => {
                    let secret: BitString = bits.parse()?;
                    let shares = otp_share(&secret, &mut rng)?;
                    println!(
                        "{}",
                        json!({"scheme": "otp", "share1": shares.share1.to_string(),
                               "share2": shares.share2.to_string()})
                    );
                }
                (None, Some(k)) => {
                    let shares = shamir_share(k, t, n, q, &mut rng)?;
                    let tokens: Vec<String> =
                        shares.iter().map(|s| format!("{}:{}", s.index, s.value)).collect();
                    println!(
                        "{}",
                        json!({"scheme": "shamir", "t": t, "n": n, "q": q, "shares": tokens})
                    );
                }
                _ => anyhow::bail!("pass exactly one of --secret (OTP) or --k (Shamir)"),
            }
            Ok(Outcome::Ok)
        }
        SecretAction::Reconstruct { shares, t, q } => {
            if shares.contains(':') {
                let shares = parse_shamir_shares(&shares)?;
                let k = shamir_reconstruct(&shares, t, q)?;
                println!("{}", json!({"scheme": "shamir", "secret": k}));
            } else {
                let parts: Vec<&str> = shares.split(',').map(str::trim).collect();
                anyhow::ensure!(parts.len() == 2, "OTP reconstruction needs two bit strings");
                let s = OtpShares { share1: parts[0].parse()?, share2: parts[1].parse()? };
                println!(
                    "{}",
                    json!({"scheme": "otp", "secret": otp_reconstruct(&s)?.to_string()})
                );
            }
            Ok(Outcome::Ok)
        }
        SecretAction::Verify { t, n, q } => {
            let report = verify_secrecy(t, n, q)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if report.holds {
                Ok(Outcome::Ok)
            } else {
                Ok(Outcome::AssertionFailed(format!(
                    "secrecy violated for (t={t}, n={n}, q={q})"
                )))
            }
        }
    }
}
