//! Runs the five stages over documents and corpora, with optional tracing.

mod sentences;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::complex_phraser::{
    build_complex_phrases, collapse_verb_groups, entity_structures, render_complex_phrases, seed_structures,
    EntityStructure,
};
use crate::event_matcher::{fill_of, match_with_seeds};
use crate::merger::{merge_document, MergeDecision};
use crate::pattern_compiler::{parse_rules, CompileError, CompiledPatternBase, RuleSet};
use crate::phrase_chunker::{chunk_with, PhraseGrammar};
use crate::template::TemplateStructure;
use crate::tokenizer::{
    contextual_name_typing, recognize_entities, tokenize, ContextRules, Lexicon, LexiconError, Span, Token,
};

pub use sentences::{sanitize, split_sentences};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub rules: Vec<PathBuf>,
    /// Extra lexicon files layered over the built-in word list.
    pub lexicons: Vec<PathBuf>,
    pub beta: f64,
    pub format: OutputFormat,
    pub trace: bool,
    /// Documents without any Stage 4 match produce no templates.
    pub relevance_filter: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            rules: Vec::new(),
            lexicons: Vec::new(),
            beta: 1.0,
            format: OutputFormat::Json,
            trace: false,
            relevance_filter: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("cannot access {path}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {error}")]
    Rules { path: String, error: CompileError },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// Everything compiled once and shared, read-only, by all documents.
#[derive(Debug, Clone)]
pub struct Engine {
    pub lexicon: Lexicon,
    pub grammar: PhraseGrammar,
    pub rules: RuleSet,
    pub patterns: CompiledPatternBase,
    pub seeds: CompiledPatternBase,
    pub context: ContextRules,
    pub relevance_filter: bool,
    abbreviations: BTreeSet<String>,
}

impl Engine {
    pub fn new(lexicon: Lexicon, rules: RuleSet) -> Result<Engine, CompileError> {
        let grammar = if rules.phrases.is_empty() { PhraseGrammar::builtin() } else { rules.phrases.clone() };
        let patterns = rules.compile_patterns()?;
        let seeds = rules.compile_seeds()?;
        let abbreviations = lexicon.abbreviations();
        Ok(Engine {
            lexicon,
            grammar,
            rules,
            patterns,
            seeds,
            context: ContextRules::default(),
            relevance_filter: true,
            abbreviations,
        })
    }

    /// Built-in lexicon plus the given rule text.
    pub fn from_rules_text(text: &str) -> Result<Engine, CompileError> {
        Engine::new(Lexicon::builtin(), parse_rules(text)?)
    }

    pub fn from_config(cfg: &PipelineConfig) -> Result<Engine, PipelineError> {
        let mut lexicon = Lexicon::builtin();
        for path in &cfg.lexicons {
            lexicon.extend_from_str(&read(path)?)?;
        }
        let mut rules = RuleSet::default();
        for path in &cfg.rules {
            let rule_err = |error: CompileError| PipelineError::Rules { path: path.display().to_string(), error };
            let parsed = parse_rules(&read(path)?).map_err(|e| rule_err(e.into()))?;
            rules.merge_from(parsed).map_err(rule_err)?;
        }
        let mut engine = Engine::new(lexicon, rules)?;
        engine.relevance_filter = cfg.relevance_filter;
        Ok(engine)
    }

    pub fn abbreviations(&self) -> &BTreeSet<String> {
        &self.abbreviations
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(io(path))
}

/// Seconds spent in each stage, summed over sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub stage1: f64,
    pub stage2: f64,
    pub stage3: f64,
    pub stage4: f64,
    pub stage5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub stage: String,
    pub sentence: Option<usize>,
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentResult {
    pub id: String,
    /// The sanitized text all spans refer to.
    pub text: String,
    pub sentences: Vec<Span>,
    /// Stage 4 output before merging, seeds already absorbed.
    pub stage4: Vec<TemplateStructure>,
    /// Seed structures no Stage 4 match absorbed.
    pub seeds: Vec<TemplateStructure>,
    pub templates: Vec<TemplateStructure>,
    pub entities: Vec<EntityStructure>,
    pub audit: Vec<MergeDecision>,
    pub timings: StageTimings,
    pub trace: Vec<TraceRecord>,
}

impl DocumentResult {
    /// The merged templates as a JSON array.
    pub fn templates_json(&self) -> Value {
        Value::Array(self.templates.iter().map(TemplateStructure::to_json).collect())
    }

    pub fn trace_jsonl(&self) -> String {
        self.trace.iter().map(|r| serde_json::to_string(r).expect("trace serializes") + "\n").collect()
    }

    pub fn render_tables(&self, engine: &Engine) -> String {
        self.templates.iter().map(|t| t.render_table(&engine.rules.templates)).collect::<Vec<_>>().join("\n")
    }
}

/// Tokens of one sentence with spans in document coordinates.
pub fn tokenize_sentence(text: &str, span: Span, lexicon: &Lexicon) -> Vec<Token> {
    let mut tokens = tokenize(span.slice(text), lexicon);
    for t in &mut tokens {
        t.span = Span::new(t.span.start + span.start, t.span.end + span.start);
    }
    tokens
}

fn since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Stages 1 to 5 over one document. `trace` only adds records; it never
/// changes the extraction.
pub fn run_document(id: &str, raw: &str, engine: &Engine, trace: bool) -> DocumentResult {
    let text = sanitize(raw);
    let spans = split_sentences(&text, &engine.abbreviations);
    let mut timings = StageTimings::default();
    let mut records = Vec::new();
    let mut record = |stage: &str, sentence: Option<usize>, data: Value| {
        if trace {
            records.push(TraceRecord { stage: stage.into(), sentence, data });
        }
    };
    let (mut stage4, mut seeds, mut entities) = (Vec::new(), Vec::new(), Vec::new());
    let mut any_match = false;
    for (si, span) in spans.iter().enumerate() {
        let t = Instant::now();
        let tokens = tokenize_sentence(&text, *span, &engine.lexicon);
        let mentions = recognize_entities(&tokens, &engine.lexicon);
        let mentions = contextual_name_typing(&tokens, &mentions, &engine.context);
        timings.stage1 += since(t);
        if trace {
            let toks: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
            let ms: Vec<Value> = mentions
                .iter()
                .map(|m| json!({"kind": format!("{:?}", m.kind), "text": m.span.slice(&text), "normalized": m.normalized}))
                .collect();
            record("stage1", Some(si), json!({"tokens": toks, "mentions": ms}));
        }

        let t = Instant::now();
        let phrases = chunk_with(&engine.grammar, &tokens, &mentions);
        timings.stage2 += since(t);
        if trace {
            let ps: Vec<Value> = phrases.iter().map(|p| json!({"kind": p.kind.label(), "text": p.text})).collect();
            record("stage2", Some(si), json!({"phrases": ps}));
        }

        let t = Instant::now();
        let cps = collapse_verb_groups(build_complex_phrases(phrases), &engine.rules.verb_groups, &engine.rules.classes);
        let sentence_seeds = seed_structures(&cps, &engine.seeds, si);
        let sentence_entities = entity_structures(&cps, &engine.rules.entities, &engine.rules.classes, si);
        timings.stage3 += since(t);
        if trace {
            let seed_json: Vec<Value> = sentence_seeds.iter().map(|s| s.structure.to_json()).collect();
            let ents = serde_json::to_value(&sentence_entities).expect("entities serialize");
            let complex = render_complex_phrases(&cps);
            record("stage3", Some(si), json!({"complex_phrases": complex, "seeds": seed_json, "entities": ents}));
        }

        let t = Instant::now();
        let (mut structures, left, matches, stats) = match_with_seeds(&cps, &engine.patterns, si, sentence_seeds);
        for s in &mut structures {
            engine.rules.templates.order(s);
        }
        timings.stage4 += since(t);
        any_match |= !matches.is_empty();
        if trace {
            let branches: Vec<Value> = matches
                .iter()
                .map(|m| {
                    let bindings: serde_json::Map<String, Value> = m
                        .bindings
                        .iter()
                        .map(|(k, b)| (k.clone(), fill_of(b, &cps).map_or(Value::Null, |v| v.to_json())))
                        .collect();
                    let resolutions: Vec<Value> =
                        m.resolutions.iter().map(|(p, v)| json!({"phrase": p, "voice": format!("{v:?}")})).collect();
                    json!({
                        "rule": m.rule_name,
                        "span": [m.span.start, m.span.end],
                        "text": m.span.slice(&text),
                        "bindings": bindings,
                        "resolutions": resolutions,
                        "subject_missing": m.subject_missing,
                    })
                })
                .collect();
            let out: Vec<Value> = structures.iter().map(TemplateStructure::to_json).collect();
            let stats = serde_json::to_value(stats).expect("stats serialize");
            record("stage4", Some(si), json!({"branches": branches, "stats": stats, "structures": out}));
        }
        stage4.extend(structures);
        seeds.extend(left.into_iter().map(|mut s| {
            engine.rules.templates.order(&mut s.structure);
            s.structure
        }));
        entities.extend(sentence_entities);
    }

    let t = Instant::now();
    let mut premerge: Vec<TemplateStructure> = stage4.iter().chain(&seeds).cloned().collect();
    premerge.sort_by_key(|s| s.first_position());
    if engine.relevance_filter && !any_match {
        premerge.clear();
    }
    let outcome = merge_document(premerge, entities, &engine.rules.merge, &engine.rules.templates);
    timings.stage5 += since(t);
    if trace {
        let audit = serde_json::to_value(&outcome.audit).expect("audit serializes");
        let out: Vec<Value> = outcome.templates.iter().map(TemplateStructure::to_json).collect();
        record("stage5", None, json!({"audit": audit, "templates": out}));
    }
    DocumentResult {
        id: id.to_string(),
        text,
        sentences: spans,
        stage4,
        seeds,
        templates: outcome.templates,
        entities: outcome.entities,
        audit: outcome.audit,
        timings,
        trace: records,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileError {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub id: String,
    pub words: usize,
    pub templates: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub documents: Vec<DocumentSummary>,
    pub errors: Vec<FileError>,
    pub words: usize,
    pub seconds: f64,
    pub words_per_minute: f64,
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Every regular file in `dir`, processed in parallel. With `out_dir`, each
/// document's templates are written to `<stem>.json` there. Unreadable files
/// are reported and skipped.
pub fn run_corpus(dir: &Path, engine: &Engine, out_dir: Option<&Path>) -> Result<CorpusReport, PipelineError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if let Some(out) = out_dir {
        std::fs::create_dir_all(out).map_err(io(out))?;
    }
    let start = Instant::now();
    let results: Vec<Result<DocumentSummary, FileError>> = files
        .par_iter()
        .map(|path| {
            let fail = |message: String| FileError { file: path.display().to_string(), message };
            let bytes = std::fs::read(path).map_err(|e| fail(e.to_string()))?;
            let text = String::from_utf8_lossy(&bytes);
            let id = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            let result = run_document(&id, &text, engine, false);
            if let Some(out) = out_dir {
                let body = serde_json::to_string_pretty(&result.templates_json()).expect("templates serialize");
                std::fs::write(out.join(format!("{id}.json")), body + "\n").map_err(|e| fail(e.to_string()))?;
            }
            Ok(DocumentSummary { id, words: word_count(&text), templates: result.templates.len() })
        })
        .collect();
    let seconds = start.elapsed().as_secs_f64();
    let mut report = CorpusReport { seconds, ..CorpusReport::default() };
    for r in results {
        match r {
            Ok(d) => {
                report.words += d.words;
                report.documents.push(d);
            }
            Err(e) => report.errors.push(e),
        }
    }
    report.words_per_minute = if seconds > 0.0 { report.words as f64 / seconds * 60.0 } else { 0.0 };
    Ok(report)
}
