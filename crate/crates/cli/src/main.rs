use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qlde::experiment::{demo_advice, demo_advice_exact, parse_bits, SIGMA_GATE};
use qlde::gf::{Fe, Field, FieldParams};
use qlde::ldt::{agreement_lower_bound_check, qldt_accept_exact, qldt_accept_sampled, DeterministicOracle, LdtReport};
use qlde::mpoly::{interpolate_lde, DataFile, DataTable, LdeParams};
use qlde::qpcp::{self, accept_prob_exact, decode_and_score, verify_once, FailureStage, Outcome, ProofFile, QpcpContext};
use qlde::qsim::build_qlde_state;
use qlde::retrieve::{adversary_by_name, exact_r1_distribution, exact_r2_distribution, run_r1, run_r2, Verdict};
use qlde::stats::{self, Estimate};
use qlde::{run_experiment, Error, ExperimentConfig, GapInstance, QuantumState, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "qlde", version, about = "Quantum low-degree extensions, retrieval, the quantum low-degree test and a one-query QPCP, simulated exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a data table as its quantum low-degree extension state.
    Encode {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the retrieval protocol (R1, or R2 with --w2) on sampled measurements.
    Retrieve(RetrieveArgs),
    /// Exact verdict distribution of the retrieval protocol.
    RetrieveExact(RetrieveArgs),
    /// Quantum low-degree test, exact and sampled.
    Qldt(QldtArgs),
    /// Exact acceptance probability of the quantum low-degree test.
    QldtExact(QldtArgs),
    #[command(subcommand)]
    Qpcp(QpcpCommand),
    /// Decide membership from a truth-table advice state via retrieval.
    DemoAdvice {
        /// Truth table as a 0/1 string of length 2^ν.
        #[arg(long)]
        table: String,
        /// ν-bit query string.
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "honest")]
        strategy: String,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report the exact acceptance probability instead of one run.
        #[arg(long)]
        exact: bool,
    },
    /// Run an experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Print CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct FieldArgs {
    /// Extension degree a of GF(2^a).
    #[arg(long, default_value_t = 4)]
    a: u32,
    /// Modulus bits including the leading term; defaults per degree.
    #[arg(long)]
    modulus: Option<u32>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 4)]
    h_size: usize,
    /// Degree bound; defaults to d(|H| − 1).
    #[arg(long)]
    r: Option<usize>,
}

impl FieldArgs {
    fn params(&self) -> Result<(LdeParams, usize)> {
        let fp = match self.modulus {
            Some(m) => FieldParams { a: self.a, modulus_bits: m },
            None => FieldParams::default_for(self.a)?,
        };
        let params = LdeParams::new(Field::new(fp)?, self.d, self.h_size)?;
        let r = self.r.unwrap_or_else(|| params.default_degree_bound());
        Ok((params, r))
    }
}

#[derive(Args)]
struct RetrieveArgs {
    #[arg(long)]
    data: PathBuf,
    /// Marked point, comma separated.
    #[arg(long, value_parser = parse_point)]
    w: PointArg,
    /// Second marked point for R2.
    #[arg(long, value_parser = parse_point)]
    w2: Option<PointArg>,
    #[arg(long, default_value = "honest")]
    adversary: String,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct QldtArgs {
    /// Data table whose LDE restrictions form the line oracle.
    #[arg(long)]
    data: PathBuf,
    /// State to test; defaults to the data's quantum LDE.
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum QpcpCommand {
    /// Build a proof (state and blocks) from an assignment.
    Prove {
        #[arg(long)]
        instance: PathBuf,
        /// Variable values, comma separated.
        #[arg(long, value_delimiter = ',')]
        assignment: Vec<u16>,
        #[command(flatten)]
        field: QpcpFieldArgs,
        /// Build blocks even when the assignment leaves predicates unsatisfied.
        #[arg(long)]
        formatted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verifier on sampled randomness.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact acceptance probability of a proof.
    Exact {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        proof: PathBuf,
    },
    /// Decode an assignment from the blocks and score it.
    Decode {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        /// Assert the γ⁴/100 bound, taking its hypothesis as satisfied.
        #[arg(long)]
        assert_lemma: bool,
    },
}

#[derive(Args)]
struct QpcpFieldArgs {
    #[arg(long, default_value_t = 4)]
    a: u32,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    h_size: usize,
    #[arg(long)]
    r: Option<usize>,
}

/// A point of F^d written as comma-separated encodings.
#[derive(Clone, Debug)]
struct PointArg(Vec<Fe>);

fn parse_point(s: &str) -> std::result::Result<PointArg, String> {
    s.split(',').map(|x| x.trim().parse::<u16>().map(Fe).map_err(|e| format!("{x:?}: {e}"))).collect::<std::result::Result<_, _>>().map(PointArg)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_data(path: &Path) -> Result<(LdeParams, DataTable)> {
    let file: DataFile = read_json(path)?;
    let table = DataTable::new(&file.params, file.values)?;
    Ok((file.params, table))
}

fn retrieve(args: &RetrieveArgs, exact: bool) -> Result<bool> {
    let (params, data) = load_data(&args.data)?;
    let f = &params.field;
    let r = args.r.unwrap_or_else(|| params.default_degree_bound());
    let lde = interpolate_lde(&params, &data)?;
    let state = build_qlde_state(&params, &data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let strategy = adversary_by_name(&args.adversary, &lde, f, r, &mut rng)?;
    let w = &args.w.0;
    let w2 = args.w2.as_ref().map(|p| &p.0);
    let truth = match w2 {
        None => Verdict::Value(lde.evaluate(f, w)?),
        Some(w2) => Verdict::Pair(lde.evaluate(f, w)?, lde.evaluate(f, w2)?),
    };
    let dist = if exact {
        match w2 {
            None => exact_r1_distribution(&state, w, strategy.as_ref(), r)?,
            Some(w2) => exact_r2_distribution(&state, w, w2, strategy.as_ref(), r)?,
        }
    } else {
        let verdicts = stats::run_trials(args.trials, args.seed, |rng| match w2 {
            None => run_r1(&state, w, strategy.as_ref(), r, rng),
            Some(w2) => run_r2(&state, w, w2, strategy.as_ref(), r, rng),
        });
        let mut counts = std::collections::BTreeMap::new();
        for v in verdicts {
            *counts.entry(v?).or_insert(0usize) += 1;
        }
        qlde::VerdictDistribution(counts.into_iter().map(|(v, c)| (v, c as f64 / args.trials as f64)).collect())
    };
    let wrong = dist.wrong_prob(&truth);
    let passed = args.adversary != "honest" || dist.prob(&truth) == 1.0;
    emit(&json!({ "truth": truth, "distribution": dist, "wrong": wrong, "passed": passed }), None)?;
    Ok(passed)
}

fn qldt(args: &QldtArgs, sampled: bool) -> Result<bool> {
    let (params, data) = load_data(&args.data)?;
    let f = &params.field;
    let r = args.r.unwrap_or_else(|| params.default_degree_bound());
    let lde = interpolate_lde(&params, &data)?;
    let state = match &args.state {
        Some(p) => read_json::<QuantumState>(p)?,
        None => build_qlde_state(&params, &data)?,
    };
    if state.field() != f || state.d() != params.d {
        return Err(Error::Parameter("state and data live over different spaces".into()));
    }
    let oracle = DeterministicOracle::restriction(f, &lde, r)?;
    let exact = qldt_accept_exact(&state, &oracle)?.gamma;
    let lb = agreement_lower_bound_check(&state, &oracle)?;
    let mut report = LdtReport {
        gamma_exact: exact,
        gamma_sampled: None,
        stderr: None,
        agr_fg: Some(lb.agr_fg),
        bound_rhs: Some(lb.bound_rhs),
        holds: lb.holds,
    };
    let mut passed = lb.holds != Some(false);
    if sampled {
        let s = qldt_accept_sampled(&state, &oracle, args.trials, args.seed)?;
        report.gamma_sampled = Some(s.gamma);
        report.stderr = s.stderr;
        let est = Estimate::new((s.gamma * args.trials as f64).round() as usize, args.trials);
        passed &= est.within_sigma(exact, SIGMA_GATE);
    }
    emit(&report, None)?;
    Ok(passed)
}

fn load_proof(instance: &Path, proof: &Path) -> Result<(QpcpContext, ProofFile)> {
    let inst: GapInstance = read_json(instance)?;
    let file: ProofFile = read_json(proof)?;
    let ctx = QpcpContext::new(&inst, &file.params, file.r)?;
    Ok((ctx, file))
}

fn qpcp(cmd: &QpcpCommand) -> Result<bool> {
    match cmd {
        QpcpCommand::Prove { instance, assignment, field, formatted, out } => {
            let inst: GapInstance = read_json(instance)?;
            let params = LdeParams::new(Field::with_degree(field.a)?, field.d, field.h_size)?;
            let r = field.r.unwrap_or_else(|| params.default_degree_bound());
            let build = if *formatted { qpcp::build_formatted_proof } else { qpcp::build_correct_proof };
            let (state, blocks) = build(&inst, assignment, &params, r)?;
            emit(&ProofFile { params, r, state, blocks }, out.as_deref())?;
            Ok(true)
        }
        QpcpCommand::Verify { instance, proof, trials, seed } => {
            let (ctx, file) = load_proof(instance, proof)?;
            let runs = stats::run_trials(*trials, *seed, |rng| verify_once(&ctx, &file.state, &file.blocks, rng));
            let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
            let count = |s: FailureStage| runs.iter().filter(|v| v.failure_stage == s).count();
            let accepted = runs.iter().filter(|v| v.outcome == Outcome::Accept).count();
            let est = Estimate::new(accepted, *trials);
            let one_query = file.blocks.reads() == *trials && runs.iter().all(|v| v.blocks_read == 1);
            emit(
                &json!({
                    "accept": est,
                    "block_degree": count(FailureStage::BlockDegree),
                    "block_predicate": count(FailureStage::BlockPredicate),
                    "projection": count(FailureStage::Projection),
                    "blocks_read": file.blocks.reads(),
                    "one_query": one_query,
                }),
                None,
            )?;
            Ok(one_query)
        }
        QpcpCommand::Exact { instance, proof } => {
            let (ctx, file) = load_proof(instance, proof)?;
            let gamma = accept_prob_exact(&ctx, &file.state, &file.blocks)?;
            emit(&json!({ "gamma": gamma }), None)?;
            Ok(true)
        }
        QpcpCommand::Decode { instance, proof, assert_lemma } => {
            let (ctx, file) = load_proof(instance, proof)?;
            let rep = decode_and_score(&ctx, &file.state, &file.blocks, *assert_lemma)?;
            emit(&rep, None)?;
            Ok(!rep.asserted || rep.holds)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Encode { data, out } => {
            let (params, table) = load_data(&data)?;
            emit(&build_qlde_state(&params, &table)?, out.as_deref())?;
            Ok(true)
        }
        Command::Retrieve(args) => retrieve(&args, false),
        Command::RetrieveExact(args) => retrieve(&args, true),
        Command::Qldt(args) => qldt(&args, true),
        Command::QldtExact(args) => qldt(&args, false),
        Command::Qpcp(cmd) => qpcp(&cmd),
        Command::DemoAdvice { table, query, strategy, field, seed, exact } => {
            let (params, r) = field.params()?;
            let bits = parse_bits(&table)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if exact {
                let p = demo_advice_exact(&params, &bits, &query, &strategy, r, &mut rng)?;
                emit(&json!({ "accept_prob": p }), None)?;
            } else {
                emit(&demo_advice(&params, &bits, &query, &strategy, r, &mut rng)?, None)?;
            }
            Ok(true)
        }
        Command::Experiment { config, csv } => {
            let cfg: ExperimentConfig = read_json(&config)?;
            let report = run_experiment(&cfg)?;
            if csv {
                print!("{}", report.to_csv()?);
            } else {
                print!("{}", report.to_json()?);
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
