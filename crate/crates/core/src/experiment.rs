//! Seeded experiment orchestration, report emission and the advice demo.
//!
//! A report depends only on its config: every random choice is drawn from
//! ChaCha8 streams derived from `seed`, and exact sums are accumulated in a
//! fixed order, so re-running a config reproduces the output bytes.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::geom::{self, direction_count, random_point};
use crate::gf::{Fe, Field, FieldParams};
use crate::ldt::{self, agreement_lower_bound_check, qldt_accept_exact, qldt_accept_sampled, DeterministicOracle, LineOracle};
use crate::mpoly::{interpolate_lde, DataTable, LdeParams, MultiPoly};
use crate::qpcp::{self, accept_prob_exact, decode_and_score, verify_once, GapInstance, Outcome, QpcpContext};
use crate::qsim::{build_qlde_state, qlde_state_from_poly, random_dense_state, superpose, QuantumState};
use crate::retrieve::{adversary_by_name, exact_r1_distribution, run_r1, Verdict, ADVERSARY_NAMES};
use crate::stats::{self, Estimate};

/// Sampled-vs-exact tolerance in standard errors.
pub const SIGMA_GATE: f64 = 4.0;

pub const QLDT_VARIANTS: [&str; 4] = ["honest", "noisy-state", "corrupted-oracle", "random-state"];
pub const QPCP_VARIANTS: [&str; 4] = ["correct", "zero-blocks", "shifted-state", "noisy-state"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Retrieve,
    Qldt,
    Qpcp,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled,
    #[default]
    Both,
}

impl Mode {
    fn exact(self) -> bool {
        self != Mode::Sampled
    }

    fn sampled(self) -> bool {
        self != Mode::Exact
    }
}

/// Experiment description. Unset geometry falls back to the defaults of the
/// experiment kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub a: Option<u32>,
    #[serde(default)]
    pub modulus: Option<u32>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub h_size: Option<usize>,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Retrieval adversaries, or test variants for qldt and qpcp; empty means all.
    #[serde(default)]
    pub adversaries: Vec<String>,
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default)]
    pub assignment: Option<Vec<u16>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub mode: Mode,
    /// Treat the decoding lemma's hypothesis as satisfied and assert its bound.
    #[serde(default)]
    pub assert_lemma: bool,
}

fn default_trials() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            a: None,
            modulus: None,
            d: None,
            h_size: None,
            r: None,
            seed: 0,
            trials: default_trials(),
            adversaries: Vec::new(),
            instance: None,
            assignment: None,
            output: None,
            mode: Mode::Both,
            assert_lemma: false,
        }
    }

    /// Field, LDE parameters and degree bound after applying defaults.
    pub fn resolve(&self) -> Result<(LdeParams, usize)> {
        let (a, d, h) = match self.experiment {
            ExperimentKind::Retrieve => (4, 2, 4),
            ExperimentKind::Qldt => (2, 2, 2),
            ExperimentKind::Qpcp => (4, 3, 2),
        };
        let a = self.a.unwrap_or(a);
        let fp = match self.modulus {
            Some(m) => FieldParams { a, modulus_bits: m },
            None => FieldParams::default_for(a).map_err(config)?,
        };
        let field = Field::new(fp).map_err(config)?;
        let params = LdeParams::new(field, self.d.unwrap_or(d), self.h_size.unwrap_or(h)).map_err(config)?;
        let r = self.r.unwrap_or_else(|| params.default_degree_bound());
        if self.trials == 0 && self.mode.sampled() {
            return Err(Error::Config("sampled mode needs trials ≥ 1".into()));
        }
        Ok((params, r))
    }

    fn variants(&self, all: &[&str]) -> Result<Vec<String>> {
        if self.adversaries.is_empty() {
            return Ok(all.iter().map(|s| s.to_string()).collect());
        }
        for a in &self.adversaries {
            if !all.contains(&a.as_str()) {
                return Err(Error::Config(format!("unknown variant {a:?}; expected one of {all:?}")));
            }
        }
        Ok(self.adversaries.clone())
    }
}

fn config(e: Error) -> Error {
    Error::Config(e.to_string())
}

/// One measured quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub metric: String,
    pub exact: Option<f64>,
    pub sampled: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: Option<usize>,
}

impl ReportRow {
    fn new(label: &str, metric: &str) -> Self {
        ReportRow { label: label.into(), metric: metric.into(), exact: None, sampled: None, stderr: None, trials: None }
    }

    fn with_estimate(mut self, e: &Estimate) -> Self {
        self.sampled = Some(e.p_hat);
        self.stderr = Some(e.stderr);
        self.trials = Some(e.trials);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl TrialReport {
    fn new(config: &ExperimentConfig) -> Self {
        TrialReport { config: config.clone(), rows: Vec::new(), criteria: Vec::new(), passed: true }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool) {
        self.passed &= passed;
        self.criteria.push(CriterionResult { name: name.into(), passed });
    }

    fn agreement(&mut self, row: &ReportRow) {
        if let (Some(p), Some(s), Some(n)) = (row.exact, row.sampled, row.trials) {
            let est = Estimate::new((s * n as f64).round() as usize, n);
            self.check(format!("sampled-matches-exact:{}:{}", row.label, row.metric), est.within_sigma(p, SIGMA_GATE));
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "metric", "exact", "sampled", "stderr", "trials"]).map_err(csv_err)?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let trials = r.trials.map(|t| t.to_string()).unwrap_or_default();
            w.write_record([r.label.as_str(), &r.metric, &opt(r.exact), &opt(r.sampled), &opt(r.stderr), &trials])
                .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Writes `<output>.json` and `<output>.csv` when an output path is configured.
    pub fn write(&self) -> Result<()> {
        if let Some(out) = &self.config.output {
            std::fs::write(out.with_extension("json"), self.to_json()?)?;
            std::fs::write(out.with_extension("csv"), self.to_csv()?)?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Independent stream for the `i`-th sub-experiment.
fn sub_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn random_table(params: &LdeParams, rng: &mut impl Rng) -> Result<DataTable> {
    let q = params.field.order();
    let values = (0..params.domain_size()?).map(|_| Fe(rng.gen_range(0..q) as u16)).collect();
    DataTable::new(params, values)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<TrialReport> {
    let (params, r) = config.resolve()?;
    let report = match config.experiment {
        ExperimentKind::Retrieve => retrieve_experiment(config, &params, r)?,
        ExperimentKind::Qldt => qldt_experiment(config, &params, r)?,
        ExperimentKind::Qpcp => qpcp_experiment(config, &params, r)?,
    };
    report.write()?;
    Ok(report)
}

fn retrieve_experiment(config: &ExperimentConfig, params: &LdeParams, r: usize) -> Result<TrialReport> {
    let names = config.variants(&ADVERSARY_NAMES)?;
    let f = &params.field;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let data = random_table(params, &mut rng)?;
    let lde = interpolate_lde(params, &data)?;
    let state = build_qlde_state(params, &data)?;
    let w = random_point(f, params.d, &mut rng);
    let truth = Verdict::Value(lde.eval(f, &w));
    let qd = (f.order() as f64).powi(params.d as i32);
    let stated = r as f64 / f.order() as f64 + 1.0 / qd;
    let tight = (direction_count(f, params.d) * r) as f64 / qd;
    let mut report = TrialReport::new(config);
    for (i, name) in names.iter().enumerate() {
        let strategy = adversary_by_name(name, &lde, f, r, &mut rng)?;
        let mut wrong = ReportRow::new(name, "wrong");
        let mut err = ReportRow::new(name, "err");
        if config.mode.exact() {
            let dist = exact_r1_distribution(&state, &w, strategy.as_ref(), r)?;
            wrong.exact = Some(dist.wrong_prob(&truth));
            err.exact = Some(dist.prob(&Verdict::Err));
        }
        if config.mode.sampled() {
            let verdicts = stats::run_trials(config.trials, sub_seed(config.seed, i), |rng| {
                run_r1(&state, &w, strategy.as_ref(), r, rng).expect("marked point checked")
            });
            let n_err = verdicts.iter().filter(|v| **v == Verdict::Err).count();
            let n_wrong = verdicts.iter().filter(|v| **v != Verdict::Err && **v != truth).count();
            wrong = wrong.with_estimate(&Estimate::new(n_wrong, config.trials));
            err = err.with_estimate(&Estimate::new(n_err, config.trials));
        }
        let p_wrong = wrong.exact.or(wrong.sampled).expect("some mode ran");
        if name == "honest" {
            let p_err = err.exact.or(err.sampled).expect("some mode ran");
            report.check("completeness:honest", p_wrong == 0.0 && p_err == 0.0 && wrong.sampled.unwrap_or(0.0) == 0.0);
        } else if wrong.exact.is_some() {
            report.check(format!("soundness:{name}"), p_wrong <= stated + ldt::SLACK);
            report.check(format!("line-count-bound:{name}"), p_wrong <= tight + ldt::SLACK);
        }
        report.agreement(&wrong);
        report.agreement(&err);
        report.rows.push(wrong);
        report.rows.push(err);
    }
    Ok(report)
}

/// State and line oracle for a named qldt variant.
pub fn qldt_variant(name: &str, params: &LdeParams, r: usize, rng: &mut ChaCha8Rng) -> Result<(QuantumState, Box<dyn LineOracle>)> {
    let f = &params.field;
    let d = params.d;
    let data = random_table(params, rng)?;
    let lde = interpolate_lde(params, &data)?;
    let correct = qlde_state_from_poly(f, d, &lde)?;
    let honest = || DeterministicOracle::restriction(f, &lde, r);
    Ok(match name {
        "honest" => (correct, Box::new(honest()?)),
        "noisy-state" => {
            let noise = random_dense_state(f, d, true, rng)?;
            let theta: f64 = rng.gen_range(0.3..1.2);
            let state = superpose(&correct, Complex64::new(theta.cos(), 0.0), &noise, Complex64::from_polar(theta.sin(), 1.0))?;
            (state, Box::new(honest()?))
        }
        "corrupted-oracle" => {
            let mut oracle = honest()?;
            for line in geom::all_lines(f, d)? {
                if rng.gen_bool(0.5) {
                    let g = oracle.get(&line).expect("every line").clone();
                    let shift = Fe(rng.gen_range(1..f.order()) as u16);
                    oracle.set(&line, g.add(&crate::mpoly::UniPoly::constant(shift)))?;
                }
            }
            (correct, Box::new(oracle))
        }
        "random-state" => (random_dense_state(f, d, true, rng)?, Box::new(honest()?)),
        other => return Err(Error::Config(format!("unknown qldt variant {other:?}"))),
    })
}

fn qldt_experiment(config: &ExperimentConfig, params: &LdeParams, r: usize) -> Result<TrialReport> {
    let names = config.variants(&QLDT_VARIANTS)?;
    let inv_q = 1.0 / params.field.order() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = TrialReport::new(config);
    for (i, name) in names.iter().enumerate() {
        let (state, oracle) = qldt_variant(name, params, r, &mut rng)?;
        let mut row = ReportRow::new(name, "accept");
        if config.mode.exact() {
            let gamma = qldt_accept_exact(&state, oracle.as_ref())?.gamma;
            row.exact = Some(gamma);
            if name == "honest" {
                report.check("completeness:honest", (gamma - 1.0).abs() <= 1e-12);
            }
            let lb = agreement_lower_bound_check(&state, oracle.as_ref())?;
            let mut agr = ReportRow::new(name, "agr_fG");
            agr.exact = Some(lb.agr_fg);
            report.rows.push(agr);
            if gamma >= inv_q {
                report.check(format!("agreement-lower-bound:{name}"), lb.holds == Some(true));
            }
        }
        if config.mode.sampled() {
            let s = qldt_accept_sampled(&state, oracle.as_ref(), config.trials, sub_seed(config.seed, i))?;
            row.sampled = Some(s.gamma);
            row.stderr = s.stderr;
            row.trials = s.trials;
        }
        report.agreement(&row);
        report.rows.push(row);
    }
    Ok(report)
}

fn qpcp_experiment(config: &ExperimentConfig, params: &LdeParams, r: usize) -> Result<TrialReport> {
    let names = config.variants(&QPCP_VARIANTS)?;
    let f = &params.field;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (instance, assignment) = match &config.instance {
        Some(path) => {
            let inst: GapInstance = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            let a = config
                .assignment
                .clone()
                .ok_or_else(|| Error::Config("an instance file needs an assignment to build the proof from".into()))?;
            (inst, a)
        }
        None => {
            let (inst, planted) = qpcp::planted_instance(4.min(params.domain_size()?), 2, 1, 3, &mut rng)?;
            (inst, config.assignment.clone().unwrap_or(planted))
        }
    };
    let ctx = QpcpContext::new(&instance, params, r).map_err(config_err)?;
    let (state, blocks) = qpcp::build_formatted_proof(&instance, &assignment, params, r)?;
    let values: Vec<Fe> = assignment.iter().map(|&v| Fe(v)).collect();
    let rho = instance.satisfied_fraction(&values);
    let mut report = TrialReport::new(config);
    for (i, name) in names.iter().enumerate() {
        let (st, bl) = match name.as_str() {
            "correct" => (state.clone(), blocks.clone()),
            "zero-blocks" => (state.clone(), blocks.map_contents(|_, b| MultiPoly::zero(b.nvars()))),
            "shifted-state" => (state.shift_y(Fe::ONE), blocks.clone()),
            "noisy-state" => {
                let noise = random_dense_state(f, params.d, true, &mut rng)?;
                (superpose(&state, Complex64::new(0.8, 0.0), &noise, Complex64::new(0.0, 0.6))?, blocks.clone())
            }
            other => return Err(Error::Config(format!("unknown qpcp variant {other:?}"))),
        };
        let mut row = ReportRow::new(name, "accept");
        if config.mode.exact() {
            let gamma = accept_prob_exact(&ctx, &st, &bl)?;
            row.exact = Some(gamma);
            if name == "correct" {
                if rho == 1.0 {
                    report.check("completeness:correct", (gamma - 1.0).abs() <= 1e-12);
                } else {
                    report.check("soundness:correct", gamma < 1.0);
                }
                let dec = decode_and_score(&ctx, &st, &bl, config.assert_lemma)?;
                let mut drow = ReportRow::new(name, "decoded_fraction");
                drow.exact = Some(dec.satisfied_fraction);
                report.rows.push(drow);
                if dec.certified {
                    report.check("decode:matches-assignment", dec.satisfied_fraction == rho);
                }
                if config.assert_lemma {
                    report.check("decode:gamma4-over-100", dec.holds);
                }
            }
        }
        if config.mode.sampled() {
            let before = bl.reads();
            let runs = stats::run_trials(config.trials, sub_seed(config.seed, i), |rng| {
                verify_once(&ctx, &st, &bl, rng).expect("matching parameters")
            });
            let accepted = runs.iter().filter(|v| v.outcome == Outcome::Accept).count();
            row = row.with_estimate(&Estimate::new(accepted, config.trials));
            report.check(
                format!("one-query:{name}"),
                bl.reads() - before == config.trials && runs.iter().all(|v| v.blocks_read == 1),
            );
        }
        report.agreement(&row);
        report.rows.push(row);
    }
    Ok(report)
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    }
}

/// Verifier's decision in the advice demo.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdviceOutcome {
    pub verdict: Verdict,
    pub accept: bool,
}

/// Truth table of length 2^ν as the advice state, and the marked point π⁻¹(query).
pub fn advice_setup(params: &LdeParams, table: &[bool], query: &str) -> Result<(QuantumState, MultiPoly, Vec<Fe>)> {
    let n = table.len();
    if !n.is_power_of_two() {
        return Err(param_err!("truth table length {n} is not a power of two"));
    }
    if n > params.domain_size()? {
        return Err(param_err!("2^ν = {n} entries exceed |H|^d"));
    }
    let nu = n.trailing_zeros() as usize;
    if query.len() != nu || !query.chars().all(|c| c == '0' || c == '1') {
        return Err(param_err!("query must be a {nu}-bit string"));
    }
    let index = if nu == 0 { 0 } else { usize::from_str_radix(query, 2).expect("checked bits") };
    let mut values = vec![Fe::ZERO; params.domain_size()?];
    for (i, &bit) in table.iter().enumerate() {
        values[i] = Fe(bit as u16);
    }
    let data = DataTable::new(params, values)?;
    let lde = interpolate_lde(params, &data)?;
    let state = build_qlde_state(params, &data)?;
    Ok((state, lde, params.pi_inv(index)?))
}

fn advice_accepts(v: &Verdict) -> bool {
    *v == Verdict::Value(Fe::ONE)
}

/// One run of R1 at the query's point; accepts iff the retrieved value is 1.
pub fn demo_advice(
    params: &LdeParams,
    table: &[bool],
    query: &str,
    strategy: &str,
    r: usize,
    rng: &mut ChaCha8Rng,
) -> Result<AdviceOutcome> {
    let (state, lde, w) = advice_setup(params, table, query)?;
    let s = adversary_by_name(strategy, &lde, &params.field, r, rng)?;
    let verdict = run_r1(&state, &w, s.as_ref(), r, rng)?;
    Ok(AdviceOutcome { verdict, accept: advice_accepts(&verdict) })
}

/// Exact acceptance probability of the advice demo.
pub fn demo_advice_exact(
    params: &LdeParams,
    table: &[bool],
    query: &str,
    strategy: &str,
    r: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let (state, lde, w) = advice_setup(params, table, query)?;
    let s = adversary_by_name(strategy, &lde, &params.field, r, rng)?;
    let dist = exact_r1_distribution(&state, &w, s.as_ref(), r)?;
    Ok(dist.0.iter().filter(|(v, _)| advice_accepts(v)).fold(0.0, |a, (_, p)| a + p))
}

/// Parses a truth table written as a string of '0'/'1' characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(param_err!("truth table must consist of 0 and 1, found {c:?}")),
        })
        .collect()
}
