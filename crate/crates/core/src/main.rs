use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use protview::dataset::{
    self, ingest_file, write_mutated, write_real, DatasetConfig, DatasetError, DatasetManifest,
    MANIFEST_FILE,
};
use protview::palette::AminoAcidPalette;
use protview::render::RenderConfig;
use protview::structure::{id_from_path, read_structure_file};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "protview",
    version,
    about = "Multiview projection images of protein structures"
)]
struct Cli {
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Dataset seed (mutation seeds are derived per protein)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Per-residue mutation probability
    #[arg(long, global = true, default_value_t = protview::mutation::DEFAULT_MUTATION_PROBABILITY)]
    prob: f64,
    /// Output image edge length in pixels
    #[arg(long, global = true, default_value_t = protview::render::DEFAULT_TARGET_SIZE)]
    size: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Palette override (JSON)
    #[arg(long, global = true)]
    palette: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate one structure file
    Ingest { file: PathBuf },
    /// Render one structure to <ID>_real.png
    Render { file: PathBuf },
    /// Write a mutated image and its mutation log
    Mutate { file: PathBuf },
    /// Build a paired dataset from files and/or directories
    Build {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Assign train/test partitions in place
    Split {
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
    },
    /// Summarize a manifest
    Stats { manifest: PathBuf },
    /// Dump the amino acid palette
    Palette,
}

const EXIT_PARTIAL: u8 = 1;
const EXIT_FATAL: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FATAL)
        }
    }
}

fn emit<T: Serialize>(
    format: Format,
    value: &T,
    text: impl FnOnce() -> String,
) -> Result<(), DatasetError> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value)?),
        Format::Text => print!("{}", text()),
    }
    Ok(())
}

fn config(cli: &Cli) -> Result<DatasetConfig, DatasetError> {
    let mut cfg = DatasetConfig::new(&cli.out, cli.seed);
    cfg.probability = cli.prob;
    cfg.render = RenderConfig::with_size(cli.size);
    if let Some(path) = &cli.palette {
        cfg.palette =
            AminoAcidPalette::from_json(&std::fs::read_to_string(path)?).map_err(|e| {
                DatasetError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e))
            })?;
    }
    Ok(cfg)
}

fn is_structure_file(path: &Path) -> bool {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    name.ends_with(".xml") || name.ends_with(".xml.gz")
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, DatasetError> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(input)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_structure_file(p))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct IngestSummary {
    id: String,
    source: String,
    atom_sites: usize,
    raw_records: usize,
    residues: usize,
    chains: BTreeMap<String, usize>,
    non_polymer_atoms: usize,
    unknown_residues: usize,
    unknown_names: BTreeMap<String, usize>,
    composition: BTreeMap<String, usize>,
}

fn run(cli: &Cli) -> Result<u8, DatasetError> {
    match &cli.command {
        Command::Ingest { file } => {
            let id = id_from_path(file);
            let (raw, report) = read_structure_file::<f64>(file, &id)?;
            let s = protview::deduplicate(&raw);
            let mut chains = BTreeMap::new();
            let mut composition = BTreeMap::new();
            for r in &s.residues {
                *chains.entry(r.key.chain_id.clone()).or_default() += 1;
                *composition
                    .entry(r.amino_acid.code().to_string())
                    .or_default() += 1;
            }
            let summary = IngestSummary {
                id,
                source: file.display().to_string(),
                atom_sites: report.atom_sites,
                raw_records: raw.len(),
                residues: s.len(),
                chains,
                non_polymer_atoms: report.non_polymer_atoms,
                unknown_residues: report.unknown_residues,
                unknown_names: report.unknown_names,
                composition,
            };
            emit(cli.format, &summary, || {
                let chains: Vec<String> = summary
                    .chains
                    .iter()
                    .map(|(c, n)| format!("{c}:{n}"))
                    .collect();
                format!(
                    "{} ({})\n  atom sites       {}\n  residue records  {}\n  residues         {}\n  chains           {}\n  non-polymer atoms {}\n  unknown residues {}\n",
                    summary.id,
                    summary.source,
                    summary.atom_sites,
                    summary.raw_records,
                    summary.residues,
                    chains.join(" "),
                    summary.non_polymer_atoms,
                    summary.unknown_residues,
                )
            })?;
            Ok(0)
        }
        Command::Render { file } => {
            let cfg = config(cli)?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let entry = write_real(&ingest_file(file)?, &cfg)?;
            let path = cfg.out_dir.join(&entry.image);
            emit(cli.format, &entry, || format!("{}\n", path.display()))?;
            Ok(0)
        }
        Command::Mutate { file } => {
            let cfg = config(cli)?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let (entry, log) = write_mutated(&ingest_file(file)?, &cfg)?;
            emit(cli.format, &entry, || {
                format!(
                    "{}\n{} of {} residues mutated (seed {})\n",
                    cfg.out_dir.join(&entry.image).display(),
                    log.entries.len(),
                    log.total_residues,
                    entry.seed.unwrap_or_default()
                )
            })?;
            Ok(0)
        }
        Command::Build { inputs } => {
            let cfg = config(cli)?;
            let files = expand_inputs(inputs)?;
            let manifest = dataset::build_dataset(&files, &cfg)?;
            let s = &manifest.summary;
            emit(cli.format, s, || {
                let mut out = format!(
                    "{}: {} real, {} mutated, {} failures\n",
                    cfg.out_dir.join(MANIFEST_FILE).display(),
                    s.real,
                    s.mutated,
                    s.failures
                );
                for f in &manifest.failures {
                    out.push_str(&format!("  failed {}: {}\n", f.source, f.error));
                }
                out
            })?;
            Ok(if s.failures > 0 { EXIT_PARTIAL } else { 0 })
        }
        Command::Split {
            manifest: path,
            test_fraction,
        } => {
            let manifest = DatasetManifest::load(path)?;
            let split = dataset::split(&manifest, *test_fraction, cli.seed)?;
            split.save(path)?;
            let s = &split.summary;
            emit(cli.format, s, || {
                format!("{} train, {} test entries\n", s.train, s.test)
            })?;
            Ok(0)
        }
        Command::Stats { manifest } => {
            let report = dataset::stats(&DatasetManifest::load(manifest)?);
            emit(cli.format, &report, || {
                let mut out = format!("entries          {}\n", report.entries);
                for (k, v) in report.by_label.iter().chain(&report.by_split) {
                    out.push_str(&format!("  {k:<14} {v}\n"));
                }
                out.push_str(&format!(
                    "failures         {}\ntotal residues   {}\nreal residues    {}\nresidues/protein min {} max {} mean {:.1} median {:.1}\nmutated residues {}\nclamped points   {}\nunknown residues {}\n",
                    report.failures,
                    report.total_residues,
                    report.real_residues,
                    report.residue_counts.min,
                    report.residue_counts.max,
                    report.residue_counts.mean,
                    report.residue_counts.median,
                    report.mutated_residues,
                    report.clamped_points,
                    report.unknown_residues,
                ));
                out
            })?;
            Ok(0)
        }
        Command::Palette => {
            let palette = config(cli)?.palette;
            let table = palette.to_table();
            emit(cli.format, &table, || {
                let mut out = String::new();
                for row in &table {
                    out.push_str(&format!(
                        "{} {:<14} {:>8} {} ({:>3}, {:>3}, {:>3})\n",
                        row.key, row.name, row.code, row.hex, row.rgb[0], row.rgb[1], row.rgb[2]
                    ));
                }
                out.push_str(&format!("fingerprint {}\n", palette.fingerprint()));
                out
            })?;
            Ok(0)
        }
    }
}
