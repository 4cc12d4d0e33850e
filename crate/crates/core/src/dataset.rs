//! Corpus orchestration: ingest, render, mutate, and the JSON manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grid::fit_transform;
use crate::mutation::{
    derive_seed, mutate, MutationError, MutationLog, MutationSpec, SEED_DERIVATION,
};
use crate::palette::AminoAcidPalette;
use crate::render::{render_protein, RenderConfig, RenderError, PNG_ENCODER_SETTINGS};
use crate::structure::{
    deduplicate, id_from_path, read_structure_file, IngestError, ParseReport, ProteinStructure,
};

pub const MANIFEST_VERSION: &str = "1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("output directory {path} is not writable: {source}")]
    OutputNotWritable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no input produced a dataset entry")]
    AllInputsFailed,
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("need at least 2 real/mutant pairs to split, found {0}")]
    TooFewEntries(usize),
    #[error("manifest references missing file {0}")]
    MissingFile(PathBuf),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error("structure {0} has no standard residues after deduplication")]
    NoResidues(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Mutated,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Mutated => "mutated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub protein_id: String,
    pub label: Label,
    /// Relative to the manifest directory.
    pub image: String,
    pub source: String,
    pub residue_count: usize,
    pub seed: Option<u64>,
    pub mutation_log: Option<String>,
    pub mutated_residues: Option<usize>,
    pub clamped_points: usize,
    pub unknown_residues: usize,
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub source: String,
    pub protein_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderSettings {
    #[serde(flatten)]
    pub config: RenderConfig,
    pub png_encoder: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationSettings {
    pub probability: f64,
    pub seed: u64,
    pub rng_algorithm: String,
    pub seed_derivation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSettings {
    pub test_fraction: f64,
    pub seed: u64,
    pub test_pairs: usize,
    pub train_pairs: usize,
    pub rule: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub real: usize,
    pub mutated: usize,
    pub failures: usize,
    pub train: usize,
    pub test: usize,
    pub unassigned: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: String,
    pub generator: String,
    pub generated_at_unix: u64,
    pub mode: String,
    pub palette_fingerprint: String,
    pub render: RenderSettings,
    pub mutation: MutationSettings,
    pub entries: Vec<ManifestEntry>,
    pub failures: Vec<FailureRecord>,
    pub split: Option<SplitSettings>,
    pub summary: Summary,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        let mut text = serde_json::to_vec_pretty(self)?;
        text.push(b'\n');
        write_atomic(path, &text)?;
        Ok(())
    }

    /// Same manifest with the timestamp zeroed, for comparisons.
    pub fn without_timestamp(&self) -> Self {
        DatasetManifest {
            generated_at_unix: 0,
            ..self.clone()
        }
    }

    fn refresh_summary(&mut self) {
        let mut s = Summary {
            failures: self.failures.len(),
            ..Summary::default()
        };
        for e in &self.entries {
            match e.label {
                Label::Real => s.real += 1,
                Label::Mutated => s.mutated += 1,
            }
            match e.split {
                Some(Split::Train) => s.train += 1,
                Some(Split::Test) => s.test += 1,
                None => s.unassigned += 1,
            }
        }
        self.summary = s;
    }
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub probability: f64,
    pub render: RenderConfig,
    pub palette: AminoAcidPalette,
}

impl DatasetConfig {
    pub fn new(out_dir: impl Into<PathBuf>, seed: u64) -> Self {
        DatasetConfig {
            out_dir: out_dir.into(),
            seed,
            probability: crate::mutation::DEFAULT_MUTATION_PROBABILITY,
            render: RenderConfig::default(),
            palette: AminoAcidPalette::default(),
        }
    }
}

/// Writes via a sibling temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn image_name(protein_id: &str, label: Label) -> String {
    format!("{protein_id}_{}.png", label.as_str())
}

pub fn log_name(protein_id: &str) -> String {
    format!("{protein_id}_mutated.mutation.json")
}

/// A parsed, deduplicated structure ready for rendering.
pub struct Ingested {
    pub structure: ProteinStructure<f64>,
    pub report: ParseReport,
}

pub fn ingest_file(path: &Path) -> Result<Ingested, DatasetError> {
    let id = id_from_path(path);
    let (raw, report) = read_structure_file::<f64>(path, &id)?;
    let structure = deduplicate(&raw);
    if structure.is_empty() {
        return Err(DatasetError::NoResidues(id));
    }
    Ok(Ingested { structure, report })
}

/// Renders the real image of a structure into `out_dir`.
pub fn write_real(ingested: &Ingested, cfg: &DatasetConfig) -> Result<ManifestEntry, DatasetError> {
    let s = &ingested.structure;
    let transform = fit_transform(s).map_err(RenderError::from)?;
    let rendered = render_protein(s, &cfg.palette, &transform, &cfg.render)?;
    let image = image_name(&s.id, Label::Real);
    write_atomic(&cfg.out_dir.join(&image), &rendered.image.encode_png()?)?;
    Ok(ManifestEntry {
        protein_id: s.id.clone(),
        label: Label::Real,
        image,
        source: s.source_path.clone(),
        residue_count: s.len(),
        seed: None,
        mutation_log: None,
        mutated_residues: None,
        clamped_points: rendered.clamped,
        unknown_residues: ingested.report.unknown_residues,
        split: None,
    })
}

/// Mutates a structure with its derived seed and writes the negative image and log.
pub fn write_mutated(
    ingested: &Ingested,
    cfg: &DatasetConfig,
) -> Result<(ManifestEntry, MutationLog), DatasetError> {
    let s = &ingested.structure;
    let seed = derive_seed(cfg.seed, &s.id);
    let spec = MutationSpec::new(cfg.probability, seed)?;
    let (mutant, log) = mutate(s, &spec)?;
    // geometry is unchanged, so the real structure's transform applies
    let transform = fit_transform(s).map_err(RenderError::from)?;
    let rendered = render_protein(&mutant, &cfg.palette, &transform, &cfg.render)?;
    let image = image_name(&s.id, Label::Mutated);
    let log_file = log_name(&s.id);
    write_atomic(&cfg.out_dir.join(&image), &rendered.image.encode_png()?)?;
    let mut log_json = serde_json::to_vec_pretty(&log)?;
    log_json.push(b'\n');
    write_atomic(&cfg.out_dir.join(&log_file), &log_json)?;
    let entry = ManifestEntry {
        protein_id: s.id.clone(),
        label: Label::Mutated,
        image,
        source: s.source_path.clone(),
        residue_count: s.len(),
        seed: Some(seed),
        mutation_log: Some(log_file),
        mutated_residues: Some(log.entries.len()),
        clamped_points: rendered.clamped,
        unknown_residues: ingested.report.unknown_residues,
        split: None,
    };
    Ok((entry, log))
}

fn ensure_writable(dir: &Path) -> Result<(), DatasetError> {
    let wrap = |source| DatasetError::OutputNotWritable {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(wrap)?;
    let probe = dir.join(format!(".write-probe{}", std::process::id()));
    fs::write(&probe, b"").map_err(wrap)?;
    fs::remove_file(&probe).map_err(wrap)?;
    Ok(())
}

fn process_one(path: &Path, cfg: &DatasetConfig) -> Result<[ManifestEntry; 2], DatasetError> {
    let ingested = ingest_file(path)?;
    let real = write_real(&ingested, cfg)?;
    let (mutated, _) = write_mutated(&ingested, cfg)?;
    Ok([real, mutated])
}

/// Builds a paired dataset: one real and one mutated image per input.
///
/// Per-input failures are recorded in the manifest and never abort the batch.
/// The manifest is written last.
pub fn build_dataset(
    inputs: &[PathBuf],
    cfg: &DatasetConfig,
) -> Result<DatasetManifest, DatasetError> {
    if inputs.is_empty() {
        return Err(DatasetError::AllInputsFailed);
    }
    MutationSpec::new(cfg.probability, cfg.seed)?;
    ensure_writable(&cfg.out_dir)?;

    let mut seen = BTreeSet::new();
    let mut failures = Vec::new();
    let mut jobs = Vec::new();
    for path in inputs {
        let id = id_from_path(path);
        if seen.insert(id.clone()) {
            jobs.push((id, path));
        } else {
            failures.push(FailureRecord {
                source: path.display().to_string(),
                protein_id: id,
                error: "duplicate protein id".into(),
            });
        }
    }

    let results: Vec<_> = jobs
        .par_iter()
        .map(|(id, path)| (id, path, process_one(path, cfg)))
        .collect();

    let mut entries = Vec::new();
    for (id, path, result) in results {
        match result {
            Ok(pair) => entries.extend(pair),
            Err(e) => failures.push(FailureRecord {
                source: path.display().to_string(),
                protein_id: id.clone(),
                error: e.to_string(),
            }),
        }
    }
    entries.sort_by(|a, b| (&a.protein_id, a.label).cmp(&(&b.protein_id, b.label)));
    failures.sort_by(|a, b| (&a.protein_id, &a.source).cmp(&(&b.protein_id, &b.source)));

    for e in &entries {
        for rel in std::iter::once(&e.image).chain(e.mutation_log.iter()) {
            let p = cfg.out_dir.join(rel);
            if !p.is_file() {
                return Err(DatasetError::MissingFile(p));
            }
        }
    }

    let mut manifest = DatasetManifest {
        version: MANIFEST_VERSION.to_string(),
        generator: format!("protview {}", env!("CARGO_PKG_VERSION")),
        generated_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        mode: "paired".to_string(),
        palette_fingerprint: cfg.palette.fingerprint(),
        render: RenderSettings {
            config: cfg.render.clone(),
            png_encoder: PNG_ENCODER_SETTINGS.to_string(),
        },
        mutation: MutationSettings {
            probability: cfg.probability,
            seed: cfg.seed,
            rng_algorithm: crate::mutation::RNG_ALGORITHM.to_string(),
            seed_derivation: SEED_DERIVATION.to_string(),
        },
        entries,
        failures,
        split: None,
        summary: Summary::default(),
    };
    manifest.refresh_summary();
    manifest.save(&cfg.out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Number of test pairs: `round(pairs * fraction)` with halves up, kept within `1..pairs`.
pub fn test_pair_count(pairs: usize, test_fraction: f64) -> usize {
    let k = (pairs as f64 * test_fraction).round() as usize;
    k.clamp(1, pairs - 1)
}

fn split_rank(seed: u64, protein_id: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(protein_id.as_bytes());
    hasher.finalize().into()
}

/// Pair-aware train/test assignment: every entry of a protein goes to the same side.
pub fn split(
    manifest: &DatasetManifest,
    test_fraction: f64,
    seed: u64,
) -> Result<DatasetManifest, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(test_fraction));
    }
    let ids: BTreeSet<&str> = manifest
        .entries
        .iter()
        .map(|e| e.protein_id.as_str())
        .collect();
    if ids.len() < 2 {
        return Err(DatasetError::TooFewEntries(ids.len()));
    }
    let mut ranked: Vec<(&str, [u8; 32])> =
        ids.iter().map(|&id| (id, split_rank(seed, id))).collect();
    ranked.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(b.0)));
    let k = test_pair_count(ranked.len(), test_fraction);
    let assignment: BTreeMap<&str, Split> = ranked
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (*id, if i < k { Split::Test } else { Split::Train }))
        .collect();

    let mut out = manifest.clone();
    for e in &mut out.entries {
        e.split = Some(assignment[e.protein_id.as_str()]);
    }
    out.split = Some(SplitSettings {
        test_fraction,
        seed,
        test_pairs: k,
        train_pairs: ranked.len() - k,
        rule: "test pairs = round_half_up(pairs * fraction) clamped to [1, pairs-1]; \
               pairs ordered by sha256(le_u64(seed) || utf8(protein_id))"
            .to_string(),
    });
    out.refresh_summary();
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub entries: usize,
    pub by_label: BTreeMap<String, usize>,
    pub by_split: BTreeMap<String, usize>,
    pub failures: usize,
    /// Sum of residue counts over all entries.
    pub total_residues: usize,
    /// Sum over real entries only (distinct proteins).
    pub real_residues: usize,
    pub residue_counts: Distribution,
    pub mutated_residues: usize,
    pub clamped_points: usize,
    pub unknown_residues: usize,
}

pub fn stats(manifest: &DatasetManifest) -> StatsReport {
    let mut r = StatsReport {
        entries: manifest.entries.len(),
        failures: manifest.failures.len(),
        ..StatsReport::default()
    };
    let mut real_counts = Vec::new();
    for e in &manifest.entries {
        *r.by_label.entry(e.label.as_str().to_string()).or_default() += 1;
        let split = match e.split {
            Some(Split::Train) => "train",
            Some(Split::Test) => "test",
            None => "unassigned",
        };
        *r.by_split.entry(split.to_string()).or_default() += 1;
        r.total_residues += e.residue_count;
        r.clamped_points += e.clamped_points;
        r.mutated_residues += e.mutated_residues.unwrap_or(0);
        if e.label == Label::Real {
            r.real_residues += e.residue_count;
            r.unknown_residues += e.unknown_residues;
            real_counts.push(e.residue_count);
        }
    }
    if !real_counts.is_empty() {
        real_counts.sort_unstable();
        let n = real_counts.len();
        r.residue_counts = Distribution {
            min: real_counts[0],
            max: real_counts[n - 1],
            mean: real_counts.iter().sum::<usize>() as f64 / n as f64,
            median: if n % 2 == 1 {
                real_counts[n / 2] as f64
            } else {
                (real_counts[n / 2 - 1] + real_counts[n / 2]) as f64 / 2.0
            },
        };
    }
    r
}
