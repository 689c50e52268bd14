//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use r3_core::allergen::{AllergenLexicon, EmbeddingTable};
use r3_core::corpus::{json_files, EMBEDDINGS_FILE, LEXICON_FILE};
use r3_core::eval::{
    capability_matrix, cvg, derive_truth, generate_queries, iou, load_annotations, run_eval,
    value_pools, Annotation, BaselineRetriever, EvalQuery, GroundTruth, QueryClass, QueryValue,
    System,
};
use r3_core::ingest::{ingest, Lexicons, RawRecipe, VerbLexicon, UNRESOLVED};
use r3_core::plan::export_plan;
use r3_core::query::image::read_image;
use r3_core::query::{
    image_descriptor, levenshtein_similarity, Query, QueryKind, Retriever, DEFAULT_THRESHOLD,
};
use r3_core::{load_corpus, parse_recipe, to_canonical_json, Corpus};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

struct Fixture {
    corpus: Corpus,
    retriever: Retriever,
    baseline: BaselineRetriever,
    annotations: Vec<Annotation>,
    truth: GroundTruth,
}

impl Fixture {
    fn load() -> Result<Self, String> {
        let corpus = load_corpus(&root()).map_err(|e| e.to_string())?;
        let retriever = Retriever::new(corpus.clone());
        let baseline = BaselineRetriever::load(&root().join("raw")).map_err(|e| e.to_string())?;
        let annotations =
            load_annotations(&root().join("truth/annotations.json")).map_err(|e| e.to_string())?;
        let truth =
            GroundTruth::load(&root().join("truth/seed42-n50.json")).map_err(|e| e.to_string())?;
        Ok(Self {
            corpus,
            retriever,
            baseline,
            annotations,
            truth,
        })
    }

    fn suite(&self) -> Vec<EvalQuery> {
        generate_queries(42, 50, &self.corpus).queries
    }

    /// Every value of the pools for `kinds`, as one query each, with truth
    /// derived from the annotations.
    fn exhaustive(&self, kinds: &[QueryKind]) -> (Vec<EvalQuery>, GroundTruth) {
        let pools = value_pools(&self.corpus);
        let mut queries = Vec::new();
        for kind in kinds {
            for value in pools.get(kind).into_iter().flatten() {
                queries.push(EvalQuery::new(
                    format!("x{:03}", queries.len()),
                    *kind,
                    value.clone(),
                ));
            }
        }
        let truth = derive_truth(&queries, &self.annotations);
        (queries, truth)
    }
}

// ---------------------------------------------------------------------------

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let set = |mask: u32| -> BTreeSet<u32> { (0..6).filter(|b| mask & (1 << b) != 0).collect() };
    let mut cases = 0;
    for r in 0u32..64 {
        for t in 0u32..64 {
            let both = (r & t).count_ones();
            let either = (r | t).count_ones();
            let want_cvg = match t.count_ones() {
                0 if r == 0 => 1.0,
                0 => 0.0,
                n => f64::from(both) / f64::from(n),
            };
            let want_iou = if either == 0 {
                1.0
            } else {
                f64::from(both) / f64::from(either)
            };
            let (rs, ts) = (set(r), set(t));
            if cvg(&rs, &ts) != want_cvg || iou(&rs, &ts) != want_iou {
                return Err(format!("mismatch at retrieved={r:06b} truth={t:06b}"));
            }
            cases += 1;
        }
    }
    let took = start.elapsed();
    if took >= Duration::from_secs(1) {
        return Err(format!("{cases} cases took {took:?}"));
    }
    Ok(format!("{cases} subset pairs agree, {took:?}"))
}

fn forced_rows(f: &Fixture) -> Outcome {
    let kinds = [
        QueryKind::LengthAtMost,
        QueryKind::NameMatch,
        QueryKind::IngredientInclude,
    ];
    let mut notes = Vec::new();

    let seeded = run_eval(System::Proposed(&f.retriever), &f.suite(), &f.truth)
        .map_err(|e| e.to_string())?;
    let (queries, truth) = f.exhaustive(&kinds);
    let full =
        run_eval(System::Proposed(&f.retriever), &queries, &truth).map_err(|e| e.to_string())?;
    for (label, report) in [("seeded", &seeded), ("exhaustive", &full)] {
        for kind in kinds {
            let agg = report
                .per_kind
                .get(&kind)
                .ok_or(format!("{label}: no {kind} queries"))?;
            if agg.cvg != 1.0 || agg.iou != 1.0 {
                return Err(format!(
                    "{label} {kind}: CVG {:.3} IOU {:.3}",
                    agg.cvg, agg.iou
                ));
            }
            notes.push(format!("{label} {kind} n={}", agg.queries));
        }
    }
    Ok(format!("CVG = IOU = 1.00 for {}", notes.join(", ")))
}

fn explicit_allergen_baseline(f: &Fixture) -> Outcome {
    let seeded =
        run_eval(System::Baseline(&f.baseline), &f.suite(), &f.truth).map_err(|e| e.to_string())?;
    let (queries, truth) = f.exhaustive(&[QueryKind::AllergenExcludeExplicit]);
    let full =
        run_eval(System::Baseline(&f.baseline), &queries, &truth).map_err(|e| e.to_string())?;
    for (label, report) in [("seeded", &seeded), ("exhaustive", &full)] {
        let agg = report
            .explicit_allergen
            .as_ref()
            .ok_or(format!("{label}: no explicit allergen queries"))?;
        if agg.cvg != 0.0 || agg.iou != 0.0 {
            return Err(format!("{label}: CVG {:.3} IOU {:.3}", agg.cvg, agg.iou));
        }
    }
    Ok(format!(
        "CVG = IOU = 0.00 over {} seeded and {} exhaustive queries",
        seeded.explicit_allergen.map_or(0, |a| a.queries),
        full.explicit_allergen.map_or(0, |a| a.queries)
    ))
}

fn directional_superiority(f: &Fixture) -> Outcome {
    let suite = f.suite();
    if suite.len() != 50 {
        return Err(format!("suite has {} queries", suite.len()));
    }
    let p =
        run_eval(System::Proposed(&f.retriever), &suite, &f.truth).map_err(|e| e.to_string())?;
    let b = run_eval(System::Baseline(&f.baseline), &suite, &f.truth).map_err(|e| e.to_string())?;
    let (p, b) = (
        p.overall.ok_or("empty proposed report")?,
        b.overall.ok_or("empty baseline report")?,
    );
    let summary = format!(
        "proposed {:.2}/{:.2} vs baseline {:.2}/{:.2}",
        p.cvg, p.iou, b.cvg, b.iou
    );
    if p.cvg > b.cvg && p.iou > b.iou && p.cvg >= 0.85 && p.iou >= 0.85 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn capability_flags(f: &Fixture) -> Outcome {
    let expected_baseline: BTreeSet<QueryClass> =
        [QueryClass::Ingredient, QueryClass::Text, QueryClass::Name]
            .into_iter()
            .collect();
    let rows = capability_matrix(&f.retriever);
    let classes: BTreeSet<QueryClass> = rows.iter().map(|r| r.class).collect();
    if classes != QueryClass::ALL.into_iter().collect() {
        return Err(format!("matrix covers {classes:?}"));
    }
    for row in &rows {
        if !row.proposed {
            return Err(format!("proposed fails {}", row.class));
        }
        if row.baseline != expected_baseline.contains(&row.class) {
            return Err(format!(
                "baseline flag for {} is {}",
                row.class, row.baseline
            ));
        }
    }
    Ok("proposed supports all six classes; baseline exactly Ingredient, Text, Name".into())
}

/// Full-matrix edit distance, independent of the two-row version.
fn dp_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1)
                .min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[char] = &['a', 'b', 'c', 'A', 'B', 'e', 'é', 'É', ' ', 'ß', 'x', 'y'];
    let len = rng.random_range(0..12);
    (0..len)
        .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())])
        .collect()
}

fn levenshtein_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 0..1000 {
        let a = random_word(&mut rng);
        let b = if n % 5 == 0 {
            a.to_uppercase()
        } else {
            random_word(&mut rng)
        };
        let s = levenshtein_similarity(&a, &b);
        if s != levenshtein_similarity(&b, &a) {
            return Err(format!("asymmetric on {a:?}, {b:?}"));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(format!("{s} out of range on {a:?}, {b:?}"));
        }
        let (fa, fb) = (a.to_lowercase(), b.to_lowercase());
        if (s == 1.0) != (fa == fb) {
            return Err(format!("identity fails on {a:?}, {b:?}"));
        }
        let max = fa.chars().count().max(fb.chars().count());
        let want = if max == 0 {
            1.0
        } else {
            1.0 - dp_distance(&fa, &fb) as f64 / max as f64
        };
        if s != want {
            return Err(format!("{a:?} vs {b:?}: {s} but oracle says {want}"));
        }
    }
    Ok("1000 random pairs: symmetric, in [0, 1], identical iff equal after folding, equal to DP oracle".into())
}

fn perturb(rng: &mut ChaCha8Rng, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.random_range(0..3) {
        if chars.is_empty() {
            break;
        }
        let i = rng.random_range(0..chars.len());
        match rng.random_range(0..3) {
            0 => {
                chars.remove(i);
            }
            1 => chars.insert(i, 'q'),
            _ => chars[i] = 'z',
        }
    }
    chars.into_iter().collect()
}

fn threshold_monotonicity(f: &Fixture) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pools = value_pools(&f.corpus);
    let kinds: Vec<QueryKind> = pools
        .keys()
        .copied()
        .filter(|k| k.is_similarity_based())
        .collect();
    let mut image_cache: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let run = |q: &Query| -> Result<BTreeSet<String>, String> {
        let r = f
            .retriever
            .execute(std::slice::from_ref(q))
            .map_err(|e| e.to_string())?;
        Ok(r.ids().map(str::to_owned).collect())
    };
    let mut per_kind: BTreeMap<QueryKind, usize> = BTreeMap::new();
    for _ in 0..100 {
        let kind = kinds[rng.random_range(0..kinds.len())];
        let pool = &pools[&kind];
        let QueryValue::Text(value) = &pool[rng.random_range(0..pool.len())] else {
            return Err(format!("{kind} pool holds a number"));
        };
        let base = match kind {
            QueryKind::ImageIngredient | QueryKind::ImageDish => {
                let bytes = image_cache
                    .entry(value.clone())
                    .or_insert_with(|| std::fs::read(root().join(value)).unwrap_or_default())
                    .clone();
                Query::image(kind, bytes)
            }
            _ => Query::text(kind, perturb(&mut rng, value)),
        };
        let t1 = rng.random_range(0.05..0.95);
        let t2 = rng.random_range(t1..1.0);
        let low = run(&base.clone().with_threshold(t1))?;
        let high = run(&base.clone().with_threshold(t2))?;
        // exclusion kinds keep recipes with no match above the threshold, so
        // they grow as the threshold rises
        let ok = if kind.is_exclusion() {
            low.is_subset(&high)
        } else {
            high.is_subset(&low)
        };
        if !ok {
            return Err(format!(
                "{kind} {value:?}: t1={t1:.3} gives {low:?}, t2={t2:.3} gives {high:?}"
            ));
        }
        *per_kind.entry(kind).or_default() += 1;
    }
    let spread: Vec<String> = per_kind.iter().map(|(k, n)| format!("{k} {n}")).collect();
    Ok(format!(
        "100 queries nest as the threshold rises ({})",
        spread.join(", ")
    ))
}

fn image_determinism() -> Outcome {
    let golden_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/descriptor_golden.json");
    let text = std::fs::read_to_string(&golden_path).map_err(|e| e.to_string())?;
    let golden: BTreeMap<String, Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (rel, want) in &golden {
        let image = read_image(&root().join(rel)).map_err(|e| e.to_string())?;
        let first = image_descriptor(&image).map_err(|e| e.to_string())?;
        let again = image_descriptor(&read_image(&root().join(rel)).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let bits = |d: &[f64]| d.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        if bits(first.as_slice()) != bits(again.as_slice()) {
            return Err(format!("{rel}: two runs differ"));
        }
        if first.as_slice().len() != want.len() {
            return Err(format!(
                "{rel}: {} components, golden has {}",
                first.as_slice().len(),
                want.len()
            ));
        }
        for (got, want) in first.as_slice().iter().zip(want) {
            worst = worst.max((got - want).abs());
        }
        if worst > 1e-9 {
            return Err(format!("{rel}: deviates from golden by {worst:e}"));
        }
        if first.similarity(&again) != 1.0 {
            return Err(format!(
                "{rel}: self-similarity {}",
                first.similarity(&again)
            ));
        }
    }
    Ok(format!(
        "{} fixtures bit-stable, max golden deviation {worst:e}, self-similarity 1.0",
        golden.len()
    ))
}

fn round_trip() -> Outcome {
    let files = json_files(&root().join("recipes")).map_err(|e| e.to_string())?;
    let mut tasks = 0;
    for path in &files {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let recipe = parse_recipe(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let canonical = to_canonical_json(&recipe);
        let again = parse_recipe(&canonical).map_err(|e| format!("{}: {e}", path.display()))?;
        if again != recipe || to_canonical_json(&again) != canonical {
            return Err(format!("{} does not round-trip", path.display()));
        }
        let plan = export_plan(&recipe).map_err(|e| e.to_string())?;
        if plan.steps.len() != recipe.task_count() {
            return Err(format!(
                "{}: {} plan steps for {} tasks",
                recipe.id,
                plan.steps.len(),
                recipe.task_count()
            ));
        }
        tasks += recipe.task_count();
    }
    Ok(format!(
        "{} recipes round-trip; plans total {tasks} steps, one per task",
        files.len()
    ))
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const PIECES: &[&str] = &[
        "egg",
        "2 cups",
        "flour",
        "½",
        "1 1/2",
        "tbsp",
        "then",
        "and",
        ",",
        ".",
        "it",
        "them",
        "chop",
        "stir",
        "bake",
        " ",
        "\n",
        "é",
        "🥚",
        "\u{0}",
        "\u{200b}",
        "--",
        "0.5",
        "of",
        "salt",
        "into",
        "  ",
        "Ω",
        "ζ",
        ";",
        "!",
        "?",
        "the",
        "with",
        "3/0",
        "99999999999999999999",
    ];
    let mut s = String::new();
    for _ in 0..rng.random_range(0..12) {
        if rng.random_range(0..4) == 0 {
            s.push(char::from_u32(rng.random_range(0..0x11_0000)).unwrap_or('\u{fffd}'));
        } else {
            s.push_str(PIECES[rng.random_range(0..PIECES.len())]);
        }
    }
    s
}

fn ingest_fuzz() -> Outcome {
    let lexicon = AllergenLexicon::load(&root().join(LEXICON_FILE)).map_err(|e| e.to_string())?;
    let embeddings =
        EmbeddingTable::load(&root().join(EMBEDDINGS_FILE)).map_err(|e| e.to_string())?;
    let verbs = VerbLexicon::builtin();
    let lexicons = Lexicons {
        allergens: &lexicon,
        embeddings: Some(&embeddings),
        verbs: &verbs,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut drafts, mut rejected) = (0, 0);
    for n in 0..10_000 {
        let raw = if n % 10 == 0 {
            // arbitrary text through the JSON front door
            match RawRecipe::from_json(&random_text(&mut rng)) {
                Ok(raw) => raw,
                Err(_) => {
                    rejected += 1;
                    continue;
                }
            }
        } else {
            RawRecipe {
                title: random_text(&mut rng),
                ingredients: (0..rng.random_range(0..4))
                    .map(|_| random_text(&mut rng))
                    .collect(),
                steps: (0..rng.random_range(0..4))
                    .map(|_| random_text(&mut rng))
                    .collect(),
                step_images: None,
                cuisine: None,
                prep_time: None,
                cook_time: None,
                servings: None,
            }
        };
        let outcome = catch_unwind(AssertUnwindSafe(|| ingest(&raw, lexicons)))
            .map_err(|_| format!("panic on input {n}: {raw:?}"))?;
        match outcome {
            Err(_) => rejected += 1,
            Ok(report) => {
                let json = to_canonical_json(&report.draft);
                let has_placeholder = json.contains(UNRESOLVED);
                if has_placeholder && report.unresolved.is_empty() {
                    return Err(format!("input {n} has placeholders but no flags: {raw:?}"));
                }
                // no times were given, so they must be flagged
                if !report
                    .unresolved
                    .iter()
                    .any(|u| u.field_path == "cook_time")
                {
                    return Err(format!("input {n}: missing cook_time not flagged"));
                }
                drafts += 1;
            }
        }
    }
    Ok(format!(
        "10000 inputs, no panics: {drafts} flagged drafts, {rejected} typed rejections"
    ))
}

fn main() {
    let fixture = Fixture::load();
    let with = |check: fn(&Fixture) -> Outcome| -> Outcome {
        match &fixture {
            Ok(f) => check(f),
            Err(e) => Err(format!("cannot load the sample corpus: {e}")),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("metric oracle equivalence", metric_oracle()),
        (
            "exact rows score 1.00 (Length, Name, Ingredient)",
            with(forced_rows),
        ),
        (
            "explicit-allergen baseline scores 0.00",
            with(explicit_allergen_baseline),
        ),
        (
            "directional superiority on the seeded 50-query suite",
            with(directional_superiority),
        ),
        ("query-support matrix", with(capability_flags)),
        ("Levenshtein properties", levenshtein_properties()),
        ("threshold monotonicity", with(threshold_monotonicity)),
        ("image pipeline determinism", image_determinism()),
        ("round-trip and plan step counts", round_trip()),
        ("ingest fuzz", ingest_fuzz()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "{} passed, {failed} failed (default threshold {DEFAULT_THRESHOLD})",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
