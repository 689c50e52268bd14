use crate::config::ServiceConfig;
use crate::response::{queries_from_json, run_query, QueryResponse};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use r3_core::allergen::{infer, AllergenLexicon, EmbeddingTable, DEFAULT_INFER_THRESHOLD};
use r3_core::corpus::{CorpusError, EMBEDDINGS_FILE, LEXICON_FILE, VERBS_FILE};
use r3_core::eval::{
    allergen_table, capability_matrix, capability_table, comparison_table, derive_truth,
    generate_queries, load_annotations, run_eval, BaselineRetriever, GroundTruth, System,
    DEFAULT_QUERY_COUNT,
};
use r3_core::ingest::{ingest, unique_id, Lexicons, RawRecipe, VerbLexicon};
use r3_core::plan::export_plan;
use r3_core::query::{
    parse_text_query, GridDescriptor, Query, QueryKind, Retriever, StepUnit, DEFAULT_THRESHOLD,
};
use r3_core::{load_corpus, parse_recipe, to_canonical_json, validate_recipe, ValidationContext};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "r3",
    version,
    about = "Recipes as plans: validate, ingest, query and evaluate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CorpusArg {
    /// Corpus directory.
    #[arg(long, env = "R3_CORPUS", default_value = "corpus")]
    pub corpus: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a corpus directory or a single recipe file.
    Validate {
        path: PathBuf,
        /// Allergen lexicon for single files (corpora use their own).
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Convert a plain-text recipe (JSON with title, ingredients, steps) into a draft.
    Ingest {
        raw: PathBuf,
        /// Directory to write the draft into; prints it when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
        /// Verb list, one per line (defaults to the corpus or built-in list).
        #[arg(long)]
        verbs: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Show the allergen classes of an ingredient.
    Allergen {
        ingredient: String,
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long, default_value_t = DEFAULT_INFER_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        json: bool,
    },
    /// Retrieve recipes matching typed text, an image, or JSON queries.
    Query(QueryArgs),
    /// Score retrieval against ground truth.
    Eval(EvalArgs),
    /// Derive ground truth for a seeded query suite from hand annotations.
    Truth {
        #[command(flatten)]
        corpus: CorpusArg,
        /// Defaults to `<corpus>/truth/annotations.json`.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_QUERY_COUNT)]
        queries: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a recipe as a plan trace.
    ExportPlan {
        /// Recipe id in the corpus, or path to a recipe file.
        recipe: String,
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP API.
    Serve {
        /// TOML config; `R3_*` variables and flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ImageKind {
    Ingredient,
    Dish,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Typed request, e.g. "without maize allergen".
    #[arg(long)]
    pub text: Option<String>,
    /// Query image file.
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ingredient")]
    pub image_kind: ImageKind,
    /// Query JSON (object or array), or `@file`.
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value = "task")]
    pub step_unit: StepUnit,
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Proposed,
    Baseline,
    Both,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_QUERY_COUNT)]
    pub queries: usize,
    /// Ground-truth file.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub retriever: Which,
    /// Original recipe texts for the baseline; defaults to `<corpus>/raw`.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    /// Where to write the machine-readable report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

/// Runs a parsed command. `Err` means a domain failure (exit 1).
pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate {
            path,
            lexicon,
            json,
        } => validate(&path, lexicon.as_deref(), json),
        Command::Ingest {
            raw,
            out,
            corpus,
            verbs,
            json,
        } => ingest_cmd(&raw, out.as_deref(), &corpus.corpus, verbs.as_deref(), json),
        Command::Allergen {
            ingredient,
            corpus,
            threshold,
            json,
        } => allergen(&ingredient, &corpus.corpus, threshold, json),
        Command::Query(args) => query(args),
        Command::Eval(args) => eval(args),
        Command::Truth {
            corpus,
            annotations,
            seed,
            queries,
            out,
        } => truth(&corpus.corpus, annotations, seed, queries, out.as_deref()),
        Command::ExportPlan {
            recipe,
            corpus,
            json,
        } => plan(&recipe, &corpus.corpus, json),
        Command::Serve {
            config,
            corpus,
            bind,
        } => {
            let mut config = ServiceConfig::load(config.as_deref())?;
            if let Some(c) = corpus {
                config.corpus_path = c;
            }
            if let Some(b) = bind {
                config.bind_address = b;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::service::serve(config))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn validate(path: &Path, lexicon: Option<&Path>, json: bool) -> Result<ExitCode> {
    let problems: Vec<String> = if path.is_dir() {
        match load_corpus(path) {
            Ok(c) => {
                if json {
                    print_json(&json!({"valid": true, "recipes": c.len(), "problems": []}))?;
                } else {
                    println!("ok: {} recipes valid", c.len());
                }
                return Ok(ExitCode::SUCCESS);
            }
            Err(CorpusError::Invalid(problems)) => {
                problems.iter().map(ToString::to_string).collect()
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let lex = lexicon.map(AllergenLexicon::load).transpose()?;
        match parse_recipe(&text) {
            Err(e) => vec![e.to_string()],
            Ok(r) => {
                let ctx = ValidationContext {
                    lexicon: lex.as_ref(),
                    media_root: None,
                };
                validate_recipe(&r, &ctx)
                    .iter()
                    .map(ToString::to_string)
                    .collect()
            }
        }
    };
    if json {
        print_json(&json!({"valid": problems.is_empty(), "problems": problems}))?;
    } else if problems.is_empty() {
        println!("ok: {} is valid", path.display());
    } else {
        for p in &problems {
            println!("{p}");
        }
        println!("{} problem(s)", problems.len());
    }
    Ok(if problems.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

struct LoadedLexicons {
    allergens: AllergenLexicon,
    embeddings: Option<EmbeddingTable>,
    verbs: VerbLexicon,
}

fn load_lexicons(corpus: &Path, verbs: Option<&Path>) -> Result<LoadedLexicons> {
    let allergens = AllergenLexicon::load(&corpus.join(LEXICON_FILE))?;
    let emb_path = corpus.join(EMBEDDINGS_FILE);
    let embeddings = if emb_path.exists() {
        Some(EmbeddingTable::load(&emb_path)?)
    } else {
        None
    };
    let corpus_verbs = corpus.join(VERBS_FILE);
    let verbs = match verbs {
        Some(p) => VerbLexicon::load(p)?,
        None if corpus_verbs.exists() => VerbLexicon::load(&corpus_verbs)?,
        None => VerbLexicon::builtin(),
    };
    Ok(LoadedLexicons {
        allergens,
        embeddings,
        verbs,
    })
}

fn ingest_cmd(
    raw: &Path,
    out: Option<&Path>,
    corpus: &Path,
    verbs: Option<&Path>,
    json: bool,
) -> Result<ExitCode> {
    let lex = load_lexicons(corpus, verbs)?;
    let recipe = RawRecipe::load(raw)?;
    let lexicons = Lexicons {
        allergens: &lex.allergens,
        embeddings: lex.embeddings.as_ref(),
        verbs: &lex.verbs,
    };
    let mut report = ingest(&recipe, lexicons)?;
    let written = match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
            let id = unique_id(&report.draft.id, |c| dir.join(format!("{c}.json")).exists());
            report.draft.id = id.clone();
            let path = dir.join(format!("{id}.json"));
            std::fs::write(&path, to_canonical_json(&report.draft))
                .with_context(|| format!("cannot write {}", path.display()))?;
            Some(path)
        }
        None => None,
    };
    if json {
        print_json(
            &json!({"path": written, "draft": report.draft, "unresolved": report.unresolved}),
        )?;
    } else {
        match &written {
            Some(p) => println!("wrote {}", p.display()),
            None => print!("{}", to_canonical_json(&report.draft)),
        }
        println!("{} unresolved field(s)", report.unresolved.len());
        for u in &report.unresolved {
            println!("  {}: {}", u.field_path, u.reason);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn allergen(ingredient: &str, corpus: &Path, threshold: f64, json: bool) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&threshold) {
        bail!("threshold must lie in [0, 1], found {threshold}");
    }
    let lex = load_lexicons(corpus, None)?;
    let exact = lex.allergens.lookup(ingredient);
    let inference = match (&lex.embeddings, exact.is_empty()) {
        (Some(e), true) => Some(infer(ingredient, &lex.allergens, e, threshold)),
        _ => None,
    };
    if json {
        print_json(&json!({"ingredient": ingredient, "exact": exact, "inferred": inference}))?;
        return Ok(ExitCode::SUCCESS);
    }
    for a in &exact {
        println!("{} (id {}) lexicon member", a.category, a.allergen_id);
    }
    if let Some(inf) = &inference {
        for m in &inf.matches {
            println!(
                "{} (id {}) inferred, score {:.3} via {:?}",
                m.info.category, m.info.allergen_id, m.score, m.nearest_member
            );
        }
        if inf.note.is_some() {
            println!("no token of {ingredient:?} is in the embedding vocabulary");
        }
    }
    if exact.is_empty() && inference.as_ref().is_none_or(|i| i.matches.is_empty()) {
        println!("no allergen class found for {ingredient:?}");
    }
    Ok(ExitCode::SUCCESS)
}

fn build_queries(args: &QueryArgs) -> Result<Vec<Query>> {
    let threshold = args.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let mut queries = Vec::new();
    if let Some(text) = &args.text {
        queries.extend(parse_text_query(text)?);
    }
    if let Some(q) = &args.query {
        let source = match q.strip_prefix('@') {
            Some(file) => {
                std::fs::read_to_string(file).with_context(|| format!("cannot read {file}"))?
            }
            None => q.clone(),
        };
        let value = serde_json::from_str(&source).context("--query is not JSON")?;
        queries.extend(queries_from_json(value, threshold)?);
    }
    if let Some(path) = &args.image {
        let bytes =
            std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        let kind = match args.image_kind {
            ImageKind::Ingredient => QueryKind::ImageIngredient,
            ImageKind::Dish => QueryKind::ImageDish,
        };
        queries.push(Query::image(kind, bytes));
    }
    if queries.is_empty() {
        bail!("give at least one of --text, --image or --query");
    }
    if let Some(t) = args.threshold {
        queries = queries.into_iter().map(|q| q.with_threshold(t)).collect();
    }
    Ok(queries)
}

fn retriever(corpus: &Path, step_unit: StepUnit) -> Result<Retriever> {
    let corpus = load_corpus(corpus)?;
    let r = Retriever::with_provider(corpus, step_unit, Box::new(GridDescriptor));
    for s in r.skipped_media() {
        eprintln!("warning: skipped media {}: {}", s.path, s.reason);
    }
    Ok(r)
}

fn query(args: QueryArgs) -> Result<ExitCode> {
    let queries = build_queries(&args)?;
    let r = retriever(&args.corpus.corpus, args.step_unit)?;
    let response: QueryResponse = run_query(&r, &queries)?;
    if args.json {
        print_json(&response)?;
        return Ok(ExitCode::SUCCESS);
    }
    println!(
        "{} match(es) for {}",
        response.matches.len(),
        response.query.join(" AND ")
    );
    for m in &response.matches {
        let allergens = if m.card.allergens.is_empty() {
            "none".to_owned()
        } else {
            m.card.allergens.join(", ")
        };
        println!(
            "{:.3}  {:<22} {:<24} steps {:>2}  {:>3} min  allergens: {allergens}",
            m.score, m.card.id, m.card.name, m.card.step_count, m.card.total_time
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn eval(args: EvalArgs) -> Result<ExitCode> {
    let root = &args.corpus.corpus;
    let proposed = retriever(root, StepUnit::Task)?;
    let suite = generate_queries(args.seed, args.queries, proposed.corpus());
    if let Some(w) = &suite.warning {
        eprintln!("warning: {w}");
    }
    let truth = GroundTruth::load(&args.truth)?;
    truth.check_against(proposed.corpus())?;
    let raw_dir = args.raw.clone().unwrap_or_else(|| root.join("raw"));
    let want_baseline = args.retriever != Which::Proposed;
    let baseline = if want_baseline {
        Some(BaselineRetriever::load(&raw_dir)?)
    } else {
        None
    };

    let proposed_report = match args.retriever {
        Which::Baseline => None,
        _ => Some(run_eval(
            System::Proposed(&proposed),
            &suite.queries,
            &truth,
        )?),
    };
    let baseline_report = match &baseline {
        Some(b) => Some(run_eval(System::Baseline(b), &suite.queries, &truth)?),
        None => None,
    };
    let capabilities = capability_matrix(&proposed);
    let report = json!({
        "seed": args.seed,
        "requested": args.queries,
        "queries": suite.queries,
        "warning": suite.warning,
        "proposed": proposed_report,
        "baseline": baseline_report,
        "capabilities": capabilities,
    });
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if args.json {
        print_json(&report)?;
        return Ok(ExitCode::SUCCESS);
    }
    println!("{} queries, seed {}\n", suite.queries.len(), args.seed);
    for r in proposed_report.iter().chain(&baseline_report) {
        println!("{}", r.results_table());
    }
    if let (Some(p), Some(b)) = (&proposed_report, &baseline_report) {
        println!("{}", comparison_table(b, p));
        println!("{}", allergen_table(b, p));
    }
    print!("{}", capability_table(&capabilities));
    Ok(ExitCode::SUCCESS)
}

fn truth(
    corpus: &Path,
    annotations: Option<PathBuf>,
    seed: u64,
    n: usize,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let c = load_corpus(corpus)?;
    let annotations = annotations.unwrap_or_else(|| corpus.join("truth/annotations.json"));
    let anns = load_annotations(&annotations)?;
    let suite = generate_queries(seed, n, &c);
    if let Some(w) = &suite.warning {
        eprintln!("warning: {w}");
    }
    let truth = derive_truth(&suite.queries, &anns);
    truth.check_against(&c)?;
    match out {
        Some(p) => {
            std::fs::write(p, truth.to_json())
                .with_context(|| format!("cannot write {}", p.display()))?;
            println!("wrote {} entries to {}", truth.len(), p.display());
        }
        None => print!("{}", truth.to_json()),
    }
    Ok(ExitCode::SUCCESS)
}

fn plan(recipe: &str, corpus: &Path, json: bool) -> Result<ExitCode> {
    let path = Path::new(recipe);
    let r = if path.is_file() {
        parse_recipe(&std::fs::read_to_string(path)?)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?
    } else {
        let c = load_corpus(corpus)?;
        c.get(recipe)
            .cloned()
            .ok_or_else(|| anyhow!("no recipe `{recipe}` in {}", corpus.display()))?
    };
    let trace = export_plan(&r)?;
    if json {
        print_json(&trace)?;
    } else {
        print!("{}", trace.to_text());
    }
    Ok(ExitCode::SUCCESS)
}
