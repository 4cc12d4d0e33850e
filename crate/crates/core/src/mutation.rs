//! Seeded recoloring of residues to build "false protein" negatives.
//!
//! Draw discipline: residues are visited in `(chain_id, seq_num)` order and each
//! consumes one 64-bit output of `ChaCha8Rng` for the mutate/keep decision; a
//! mutated residue consumes a second output to pick its replacement among the
//! other nineteen amino acids (canonical order). A 64-bit output `x` is turned
//! into a uniform variate as `(x >> 11) * 2^-53`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::amino::AminoAcid;
use crate::scalar::Scalar;
use crate::structure::{ProteinStructure, ResidueKey};

pub const DEFAULT_MUTATION_PROBABILITY: f64 = 0.05;

pub const RNG_ALGORITHM: &str =
    "chacha8 (rand_chacha 0.9 ChaCha8Rng::seed_from_u64); u = (next_u64 >> 11) * 2^-53";

pub const SEED_DERIVATION: &str =
    "first 8 bytes, little endian, of sha256(le_u64(dataset_seed) || utf8(protein_id))";

#[derive(Debug, Error, PartialEq)]
pub enum MutationError {
    #[error("mutation probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("log references residue {0} which is not in the structure")]
    UnknownResidueReference(ResidueKey),
    #[error("log expects {expected} at {key} but the structure has {found}")]
    ResidueMismatch {
        key: ResidueKey,
        expected: AminoAcid,
        found: AminoAcid,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationSpec {
    pub probability: f64,
    pub seed: u64,
    pub rng_algorithm: String,
}

impl MutationSpec {
    pub fn new(probability: f64, seed: u64) -> Result<Self, MutationError> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(MutationError::InvalidProbability(probability));
        }
        Ok(MutationSpec {
            probability,
            seed,
            rng_algorithm: RNG_ALGORITHM.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    #[serde(flatten)]
    pub key: ResidueKey,
    pub original: AminoAcid,
    pub mutated: AminoAcid,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationLog {
    pub entries: Vec<Substitution>,
    pub total_residues: usize,
}

/// Per-protein seed mixed from the dataset seed and the protein id.
pub fn derive_seed(dataset_seed: u64, protein_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(dataset_seed.to_le_bytes());
    hasher.update(protein_id.as_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn mutate<T: Scalar>(
    structure: &ProteinStructure<T>,
    spec: &MutationSpec,
) -> Result<(ProteinStructure<T>, MutationLog), MutationError> {
    if !(0.0..=1.0).contains(&spec.probability) {
        return Err(MutationError::InvalidProbability(spec.probability));
    }
    let mut order: Vec<usize> = (0..structure.residues.len()).collect();
    order.sort_by(|&a, &b| structure.residues[a].key.cmp(&structure.residues[b].key));

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = structure.clone();
    let mut log = MutationLog {
        entries: Vec::new(),
        total_residues: structure.residues.len(),
    };
    for idx in order {
        let residue = &mut out.residues[idx];
        if unit(&mut rng) >= spec.probability {
            continue;
        }
        let pick = unit(&mut rng);
        let original = residue.amino_acid;
        let others: Vec<AminoAcid> = AminoAcid::STANDARD
            .iter()
            .copied()
            .filter(|&aa| aa != original)
            .collect();
        let choice = ((pick * others.len() as f64) as usize).min(others.len() - 1);
        let mutated = others[choice];
        residue.amino_acid = mutated;
        log.entries.push(Substitution {
            key: residue.key.clone(),
            original,
            mutated,
        });
    }
    Ok((out, log))
}

/// Re-applies a log without touching the RNG.
pub fn replay<T: Scalar>(
    structure: &ProteinStructure<T>,
    log: &MutationLog,
) -> Result<ProteinStructure<T>, MutationError> {
    let mut out = structure.clone();
    for sub in &log.entries {
        let residue = out
            .residues
            .iter_mut()
            .find(|r| r.key == sub.key)
            .ok_or_else(|| MutationError::UnknownResidueReference(sub.key.clone()))?;
        if residue.amino_acid != sub.original {
            return Err(MutationError::ResidueMismatch {
                key: sub.key.clone(),
                expected: sub.original,
                found: residue.amino_acid,
            });
        }
        residue.amino_acid = sub.mutated;
    }
    Ok(out)
}
