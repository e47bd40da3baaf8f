//! Command-line front end. `run` parses arguments, executes one subcommand
//! and maps the outcome to an exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::extract::{
    extract_evidence, parse_geo_events, parse_spouse_scores, parse_user_names, ExtractInputs, NameGenderTable,
    US_STATES,
};
use crate::harness::{
    build_kb, em_dataset, evaluate, learn_dataset, mention_rules, model_rules_to_string, synth_generate, Dataset,
    Engine, EvalOptions, EvalReport, LatentOptions, LearnOptions, PlantedRule, Setting, SynthParams, Task,
    FRIEND_HOMOPHILY, LOCATION_HOMOPHILY, PREFERENCE_PRIOR, SPOUSE_HOMOPHILY,
};
use crate::logic::{
    ground_with, parse_category_file, parse_evidence, parse_rule_file, parse_schema_file, read_text, EvidenceMap,
    GroundedProgram, GroundingOptions, KnowledgeBase, Role,
};
use crate::mln::{self, EmConfig, InferenceMode, MlnConfig, TrainingInstance};
use crate::psl::{self, PslConfig, SoftProgram};
use crate::social::{declare_category_predicates, default_schema, parse_follow_edges, CategorySet, STATE_SORT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "netlogic", version, about = "Weighted first-order logic over social networks")]
pub struct Cli {
    /// Worker threads; defaults to the available cores. Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ground a rule file and print program statistics.
    Ground(GroundCmd),
    /// Marginals (MLN) or MPE values (PSL) for every open atom.
    Infer(InferCmd),
    /// Learn rule weights and write the updated rule file.
    Learn(LearnCmd),
    /// Turn raw geo, name, spouse and follow files into evidence.
    Extract(ExtractCmd),
    /// Generate a synthetic dataset from a planted model.
    Synth(SynthCmd),
    /// Friend-observed or friend-latent evaluation report.
    Eval(EvalCmd),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Mln,
    Psl,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exact,
    Gibbs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SettingArg {
    Observed,
    Latent,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Likecat,
    Location,
    All,
}

/// Knowledge base and evidence inputs.
#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Predicate declarations; the built-in social schema when omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub rules: PathBuf,
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    /// `entity<TAB>category` labels.
    #[arg(long)]
    pub categories: Option<PathBuf>,
    /// Category labels, one per line, for the built-in schema.
    #[arg(long)]
    pub category_set: Option<PathBuf>,
    /// Keep ground rules already decided by evidence.
    #[arg(long)]
    pub no_prune: bool,
    /// Keep groundings that mix entity categories.
    #[arg(long)]
    pub no_cutoff: bool,
}

#[derive(Args, Debug, Clone)]
pub struct MlnArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Largest component enumerated exactly (at most 25).
    #[arg(long, default_value_t = 20)]
    pub max_exact: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 10.0)]
    pub weight_cap: f64,
}

impl MlnArgs {
    fn config(&self, seed: u64) -> MlnConfig {
        MlnConfig {
            mode: match self.mode {
                ModeArg::Auto => InferenceMode::Auto,
                ModeArg::Exact => InferenceMode::Exact,
                ModeArg::Gibbs => InferenceMode::Gibbs,
            },
            samples: self.samples,
            burn_in: self.burn_in,
            chains: self.chains,
            max_exact_atoms: self.max_exact,
            epochs: self.epochs,
            l2: self.l2,
            weight_cap: self.weight_cap,
            seed,
            ..MlnConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct PslArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
}

impl PslArgs {
    fn config(&self, seed: u64) -> PslConfig {
        PslConfig {
            tolerance: self.tolerance,
            max_iters: self.max_iters,
            rho: self.rho,
            seed,
            ..PslConfig::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct GroundCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InferCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = EngineArg::Mln)]
    pub engine: EngineArg,
    /// Only report atoms of these predicates.
    #[arg(long, value_delimiter = ',')]
    pub query: Vec<String>,
    #[command(flatten)]
    pub mln: MlnArgs,
    #[command(flatten)]
    pub psl: PslArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LearnCmd {
    /// Rule file with starting weights.
    #[arg(long)]
    pub rules: PathBuf,
    /// Dataset directory written by `synth` (or in the same layout).
    #[arg(long, conflicts_with_all = ["evidence", "schema"])]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TaskArg::Likecat)]
    pub task: TaskArg,
    /// Training world: query-predicate atoms are the targets, the rest is
    /// evidence.
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub categories: Option<PathBuf>,
    /// Treat category preferences as latent and learn from mentions.
    #[arg(long, requires = "dataset")]
    pub em: bool,
    #[arg(long, default_value_t = 100)]
    pub em_rounds: usize,
    /// Learn a separate weight for every category copy of a rule.
    #[arg(long)]
    pub no_tie: bool,
    #[command(flatten)]
    pub mln: MlnArgs,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExtractCmd {
    /// `user<TAB>state<TAB>YYYY-MM` geotag lines.
    #[arg(long)]
    pub geo: Option<PathBuf>,
    /// `name<TAB>male_count<TAB>female_count` lines.
    #[arg(long, requires = "user_names")]
    pub names: Option<PathBuf>,
    /// `user<TAB>first name` lines.
    #[arg(long, requires = "names")]
    pub user_names: Option<PathBuf>,
    /// `user<TAB>user<TAB>score` lines.
    #[arg(long)]
    pub spouse: Option<PathBuf>,
    /// `follower<TAB>followee<TAB>followee_follower_count` lines.
    #[arg(long)]
    pub follows: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthCmd {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub users: usize,
    #[arg(long, default_value_t = 5)]
    pub block_size: usize,
    #[arg(long, default_value_t = 0.6)]
    pub density: f64,
    #[arg(long, default_value_t = 0.5)]
    pub spouse_rate: f64,
    #[arg(long, default_value_t = 3)]
    pub entities: usize,
    /// Weight of the per-category preference prior.
    #[arg(long, default_value_t = 0.0)]
    pub prior: f64,
    /// Friend homophily weight.
    #[arg(long, default_value_t = 2.0)]
    pub homophily: f64,
    /// Spouse homophily weight; omitted when 0.
    #[arg(long, default_value_t = 0.0)]
    pub spouse_homophily: f64,
    /// Mention probability of a held preference.
    #[arg(long, default_value_t = 0.5)]
    pub report_prob: f64,
    #[arg(long, default_value_t = 0.3)]
    pub dislike_rate: f64,
    #[arg(long, default_value_t = 0.8)]
    pub home_rate: f64,
}

#[derive(Args, Debug)]
pub struct EvalCmd {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub rules: PathBuf,
    /// Engines to run; repeat or comma-separate for both.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [EngineArg::Mln])]
    pub engine: Vec<EngineArg>,
    #[arg(long, value_enum, default_value_t = SettingArg::Observed)]
    pub setting: SettingArg,
    #[arg(long, value_enum, default_value_t = TaskArg::All)]
    pub task: TaskArg,
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
    /// Share of target atoms evaluated (and hidden when latent).
    #[arg(long, default_value_t = 0.2)]
    pub hidden_fraction: f64,
    /// Update hidden users one at a time in a shuffled order.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub no_baselines: bool,
    /// `Condition:Target` unary predicate pairs for the rule report.
    #[arg(long = "ratio")]
    pub ratios: Vec<String>,
    #[command(flatten)]
    pub mln: MlnArgs,
    #[command(flatten)]
    pub psl: PslArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON summary with accuracy, precision, recall and F1 per result.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Messages go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_solver_failure() {
        EXIT_SOLVER
    } else if matches!(e, Error::Config(_)) {
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Ground(c) => ground_cmd(c),
        Command::Infer(c) => infer_cmd(c, cli.seed),
        Command::Learn(c) => learn_cmd(c, cli.seed),
        Command::Extract(c) => extract_cmd(c),
        Command::Synth(c) => synth_cmd(c, cli.seed),
        Command::Eval(c) => eval_cmd(c, cli.seed),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_opt(path: Option<&PathBuf>) -> Result<Option<String>> {
    path.map(read_text).transpose()
}

/// Knowledge base, evidence and whether the built-in schema was used.
fn load_model(
    schema: Option<&PathBuf>,
    rules: &Path,
    evidence: Option<&PathBuf>,
    categories: Option<&PathBuf>,
    category_set: Option<&PathBuf>,
) -> Result<(KnowledgeBase, EvidenceMap, bool)> {
    let schema = read_opt(schema)?;
    let evidence = read_opt(evidence)?;
    let categories = read_opt(categories)?;
    let category_set = read_opt(category_set)?;
    model_from_texts(
        schema.as_deref(),
        &read_text(rules)?,
        evidence.as_deref(),
        categories.as_deref(),
        category_set.as_deref(),
    )
}

/// Builds a knowledge base from file contents. Without a schema the
/// built-in social schema is used, with `category_set` (one label per
/// line) or the default categories and the 50 state constants. Returns the
/// evidence and whether the built-in schema was used.
pub fn model_from_texts(
    schema: Option<&str>,
    rules: &str,
    evidence: Option<&str>,
    categories: Option<&str>,
    category_set: Option<&str>,
) -> Result<(KnowledgeBase, EvidenceMap, bool)> {
    let evidence = match evidence {
        Some(t) => parse_evidence(t)?,
        None => EvidenceMap::new(),
    };
    let labels = categories.map(parse_category_file).transpose()?.unwrap_or_default();
    let (mut kb, builtin) = match schema {
        Some(t) => {
            let mut kb = KnowledgeBase::new();
            parse_schema_file(t, &mut kb)?;
            (kb, false)
        }
        None => {
            let cats = match category_set {
                Some(t) => {
                    let lines: Vec<&str> = t.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
                    CategorySet::new(&lines)?
                }
                None => CategorySet::default(),
            };
            let mut kb = default_schema();
            declare_category_predicates(&mut kb, &cats, Role::Query)?;
            for st in US_STATES {
                kb.add_constant(STATE_SORT, st);
            }
            (kb, true)
        }
    };
    parse_rule_file(rules, &mut kb)?;
    for (e, c) in &labels {
        kb.add_constant(crate::logic::ENTITY_SORT, e);
        kb.set_category(e, c);
    }
    kb.absorb_evidence(&evidence)?;
    Ok((kb, evidence, builtin))
}

fn grounding(no_prune: bool, no_cutoff: bool) -> GroundingOptions {
    GroundingOptions {
        prune: !no_prune,
        cutoff: !no_cutoff,
    }
}

fn load_program(m: &ModelArgs) -> Result<(KnowledgeBase, GroundedProgram)> {
    let (kb, evidence, _) = load_model(
        m.schema.as_ref(),
        &m.rules,
        m.evidence.as_ref(),
        m.categories.as_ref(),
        m.category_set.as_ref(),
    )?;
    let program = ground_with(&kb, &evidence, &grounding(m.no_prune, m.no_cutoff), &[])?;
    Ok((kb, program))
}

fn ground_cmd(c: &GroundCmd) -> Result<()> {
    let (_, program) = load_program(&c.model)?;
    let free = program.free_atoms().len();
    let mut out = String::new();
    let _ = writeln!(out, "atoms\t{}", program.num_atoms());
    let _ = writeln!(out, "free_atoms\t{free}");
    let _ = writeln!(out, "evidence_atoms\t{}", program.num_atoms() - free);
    let _ = writeln!(out, "ground_rules\t{}", program.rules().len());
    for (i, n) in program.groundings_per_rule().iter().enumerate() {
        let _ = writeln!(out, "rule\t{i}\t{n}\t{}", program.rule_text(i));
    }
    write_output(c.output.as_deref(), &out)
}

fn infer_cmd(c: &InferCmd, seed: u64) -> Result<()> {
    let (_, program) = load_program(&c.model)?;
    let values = match c.engine {
        EngineArg::Mln => mln::infer(&program, &c.mln.config(seed))?.marginals,
        EngineArg::Psl => {
            let soft = SoftProgram::from_program(&program)?;
            psl::mpe_infer(&soft, &c.psl.config(seed))?.values
        }
    };
    let mut lines: Vec<String> = program
        .free_atoms()
        .into_iter()
        .filter(|&a| c.query.is_empty() || c.query.iter().any(|q| *q == program.atom(a).predicate))
        .map(|a| format!("{}\t{}\n", program.atom(a), values[a]))
        .collect();
    lines.sort();
    write_output(c.output.as_deref(), &lines.concat())
}

fn tasks(t: TaskArg) -> Vec<Task> {
    match t {
        TaskArg::Likecat => vec![Task::LikeCat],
        TaskArg::Location => vec![Task::Location],
        TaskArg::All => vec![Task::LikeCat, Task::Location],
    }
}

fn learn_cmd(c: &LearnCmd, seed: u64) -> Result<()> {
    let cfg = c.mln.config(seed);
    let opts = LearnOptions {
        tie_categories: !c.no_tie,
        ..LearnOptions::default()
    };
    let mut header = String::new();
    let text = if let Some(dir) = &c.dataset {
        let dataset = Dataset::load(dir)?;
        let mut kb = build_kb(&dataset, &read_text(&c.rules)?)?;
        if c.em {
            let em = EmConfig {
                max_rounds: c.em_rounds,
                ..EmConfig::default()
            };
            let report = em_dataset(&kb, &dataset, &cfg, &em, &opts)?;
            kb.set_weights(&report.weights)?;
            let _ = writeln!(header, "# em rounds {} converged {}", report.rounds, report.converged);
            for (cat, s) in report.model.categories.iter().zip(&report.model.report_prob) {
                let _ = writeln!(header, "# report_prob\t{cat}\t{s}");
            }
        } else {
            for task in tasks(c.task) {
                let report = learn_dataset(&kb, &dataset, task, &cfg, &opts)?;
                kb.set_weights(&report.weights)?;
                let _ = writeln!(
                    header,
                    "# {} epochs {} converged {}",
                    task.name(),
                    report.epochs,
                    report.converged
                );
            }
        }
        model_rules_to_string(&kb)
    } else {
        if c.em {
            return Err(Error::Config("--em needs --dataset".into()));
        }
        let evidence_path = c
            .evidence
            .as_ref()
            .ok_or_else(|| Error::Config("learn needs --dataset or --evidence".into()))?;
        let (mut kb, evidence, builtin) =
            load_model(c.schema.as_ref(), &c.rules, Some(evidence_path), c.categories.as_ref(), None)?;
        let is_query = |p: &str| kb.schema(p).is_some_and(|s| s.role == Role::Query);
        let (truth_map, observed): (EvidenceMap, EvidenceMap) =
            evidence.into_iter().partition(|(a, _)| is_query(&a.predicate));
        let program = ground_with(&kb, &observed, &GroundingOptions::default(), &[])?;
        let truth = (0..program.num_atoms())
            .map(|a| truth_map.get(program.atom(a)).is_some_and(|&v| v >= 0.5))
            .collect();
        let report = mln::learn_weights(&[TrainingInstance { program, truth }], &cfg, None)?;
        kb.set_weights(&report.weights)?;
        let _ = writeln!(header, "# epochs {} converged {}", report.epochs, report.converged);
        if builtin {
            let skip = default_schema().rules().len();
            kb.rules()[skip..].iter().map(|r| format!("{r}\n")).collect()
        } else {
            kb.rules_to_string()
        }
    };
    let out = format!("{header}{text}");
    fs::write(&c.output, out).map_err(|e| Error::io(&c.output, e))
}

fn extract_cmd(c: &ExtractCmd) -> Result<()> {
    let inputs = ExtractInputs {
        geo: read_opt(c.geo.as_ref())?
            .map(|t| parse_geo_events(&t))
            .transpose()?
            .unwrap_or_default(),
        names: read_opt(c.names.as_ref())?
            .map(|t| NameGenderTable::parse(&t))
            .transpose()?,
        user_names: read_opt(c.user_names.as_ref())?
            .map(|t| parse_user_names(&t))
            .transpose()?
            .unwrap_or_default(),
        spouse_scores: read_opt(c.spouse.as_ref())?
            .map(|t| parse_spouse_scores(&t))
            .transpose()?
            .unwrap_or_default(),
        follows: read_opt(c.follows.as_ref())?
            .map(|t| parse_follow_edges(&t))
            .transpose()?
            .unwrap_or_default(),
    };
    let evidence = extract_evidence(&inputs)?;
    let mut out = String::new();
    for (a, v) in &evidence {
        let _ = writeln!(out, "{a} {v}");
    }
    fs::write(&c.output, out).map_err(|e| Error::io(&c.output, e))
}

fn synth_cmd(c: &SynthCmd, seed: u64) -> Result<()> {
    let mut planted = vec![
        PlantedRule::new(PREFERENCE_PRIOR, c.prior),
        PlantedRule::new(FRIEND_HOMOPHILY, c.homophily),
    ];
    if c.spouse_homophily != 0.0 {
        planted.push(PlantedRule::new(SPOUSE_HOMOPHILY, c.spouse_homophily));
    }
    let params = SynthParams {
        users: c.users,
        block_size: c.block_size,
        density: c.density,
        spouse_rate: c.spouse_rate,
        entities_per_category: c.entities,
        planted,
        dislike_rate: c.dislike_rate,
        home_rate: c.home_rate,
        seed,
        ..SynthParams::default()
    }
    .with_report_prob(c.report_prob);
    let data = synth_generate(&params)?;
    data.dataset.save(&c.output)?;
    let model = format!(
        "{}{}0: {LOCATION_HOMOPHILY}\n",
        data.template_rules,
        mention_rules(&data.dataset.graph, 0.0)
    );
    for (name, text) in [
        ("planted.rules", data.planted_rules.as_str()),
        ("template.rules", data.template_rules.as_str()),
        ("model.rules", model.as_str()),
    ] {
        let p = c.output.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

fn eval_cmd(c: &EvalCmd, seed: u64) -> Result<()> {
    let dataset = Dataset::load(&c.dataset)?;
    let kb = build_kb(&dataset, &read_text(&c.rules)?)?;
    let mut engines = Vec::new();
    for e in &c.engine {
        let engine = match e {
            EngineArg::Mln => Engine::Mln(c.mln.config(seed)),
            EngineArg::Psl => Engine::Psl(c.psl.config(seed)),
        };
        if !engines.iter().any(|x: &Engine| x.name() == engine.name()) {
            engines.push(engine);
        }
    }
    let ratios = c
        .ratios
        .iter()
        .map(|r| {
            r.split_once(':')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("--ratio `{r}` is not Condition:Target")))
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = EvalOptions {
        setting: match c.setting {
            SettingArg::Observed => Setting::Observed,
            SettingArg::Latent => Setting::Latent,
        },
        tasks: tasks(c.task),
        engines,
        latent: LatentOptions {
            hidden_fraction: c.hidden_fraction,
            rounds: c.rounds,
            seed,
            sequential: c.sequential,
        },
        baselines: !c.no_baselines,
        ratios,
        ..EvalOptions::default()
    };
    let report = evaluate(&kb, &dataset, &opts)?;
    write_output(c.output.as_deref(), &report.to_tsv())?;
    if let Some(p) = &c.summary {
        let text = summary_json(&report)?;
        fs::write(p, text).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

fn summary_json(report: &EvalReport) -> Result<String> {
    let mut results = serde_json::Map::new();
    for (name, m) in &report.results {
        let mut entry = serde_json::Map::new();
        entry.insert("accuracy".into(), m.accuracy().into());
        entry.insert("f1".into(), m.f1().into());
        if let crate::harness::Metrics::Binary(c) = m {
            entry.insert("precision".into(), c.precision().into());
            entry.insert("recall".into(), c.recall().into());
        }
        results.insert(name.clone(), entry.into());
    }
    let meta: serde_json::Map<String, serde_json::Value> = report
        .meta
        .iter()
        .map(|(k, v)| (k.clone(), v.clone().into()))
        .collect();
    let ratios: serde_json::Map<String, serde_json::Value> = report
        .rule_ratios
        .iter()
        .map(|(k, v)| (k.clone(), (*v).into()))
        .collect();
    let doc = serde_json::json!({ "meta": meta, "results": results, "rule_ratios": ratios });
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Data(e.to_string()))
}
