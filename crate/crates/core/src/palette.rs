//! Bijective amino acid <-> RGB palette.
//!
//! Colors are 24-bit integer codes read as `0xRRGGBB`. Black (`0`) is reserved
//! for the image background and is never assigned to an amino acid.
//!
//! The built-in table keeps the three published codes (Alanine `128`, Glycine
//! `65280`, Lysine `8421376`) and fills the remaining seventeen entries from the
//! lattice of channel levels `{0, 128, 255}`, so every pair of colors differs by at
//! least 127 in some channel.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::amino::AminoAcid;

/// Minimum per-channel separation required between any two default palette colors.
pub const MIN_CHANNEL_SEPARATION: u8 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);

    pub fn from_code(code: u32) -> Rgb {
        Rgb((code >> 16) as u8, (code >> 8) as u8, code as u8)
    }

    pub fn code(self) -> u32 {
        (u32::from(self.0) << 16) | (u32::from(self.1) << 8) | u32::from(self.2)
    }

    pub fn is_black(self) -> bool {
        self == Rgb::BLACK
    }

    /// Largest absolute per-channel difference.
    pub fn max_channel_distance(self, other: Rgb) -> u8 {
        [
            self.0.abs_diff(other.0),
            self.1.abs_diff(other.1),
            self.2.abs_diff(other.2),
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:06X}", self.code())
    }
}

/// Result of a reverse palette lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    Amino(AminoAcid),
    NotInPalette,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PaletteError {
    #[error("amino acid {0} has no palette color")]
    UnknownAminoAcid(AminoAcid),
    #[error("palette is missing {0}")]
    Missing(AminoAcid),
    #[error("palette assigns the reserved background color to {0}")]
    Background(AminoAcid),
    #[error("palette code {code:#08X} for {aa} exceeds 24 bits")]
    OutOfRange { aa: AminoAcid, code: u32 },
    #[error("{0} and {1} share the same color")]
    Duplicate(AminoAcid, AminoAcid),
    #[error("palette entry `{0}` is not a standard amino acid")]
    NotStandard(String),
    #[error("malformed palette file: {0}")]
    Malformed(String),
}

const DEFAULT_CODES: [(AminoAcid, u32); 20] = [
    (AminoAcid::Ala, 0x00_00_80),
    (AminoAcid::Arg, 0x00_00_FF),
    (AminoAcid::Asn, 0x00_80_00),
    (AminoAcid::Asp, 0x00_80_80),
    (AminoAcid::Cys, 0x00_80_FF),
    (AminoAcid::Gln, 0x00_FF_80),
    (AminoAcid::Glu, 0x00_FF_FF),
    (AminoAcid::Gly, 0x00_FF_00),
    (AminoAcid::His, 0x80_00_00),
    (AminoAcid::Ile, 0x80_00_80),
    (AminoAcid::Leu, 0x80_00_FF),
    (AminoAcid::Lys, 0x80_80_00),
    (AminoAcid::Met, 0x80_80_80),
    (AminoAcid::Phe, 0x80_80_FF),
    (AminoAcid::Pro, 0x80_FF_00),
    (AminoAcid::Ser, 0x80_FF_80),
    (AminoAcid::Thr, 0x80_FF_FF),
    (AminoAcid::Trp, 0xFF_00_00),
    (AminoAcid::Tyr, 0xFF_00_80),
    (AminoAcid::Val, 0xFF_00_FF),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AminoAcidPalette {
    // indexed by `AminoAcid::index()`
    codes: [u32; 20],
    reverse: BTreeMap<u32, AminoAcid>,
}

impl Default for AminoAcidPalette {
    fn default() -> Self {
        default_palette()
    }
}

/// The built-in palette.
pub fn default_palette() -> AminoAcidPalette {
    AminoAcidPalette::from_entries(DEFAULT_CODES).expect("built-in palette is valid")
}

impl AminoAcidPalette {
    /// Builds a palette, checking it is total, injective and avoids black.
    pub fn from_entries<I>(entries: I) -> Result<Self, PaletteError>
    where
        I: IntoIterator<Item = (AminoAcid, u32)>,
    {
        let mut codes: [Option<u32>; 20] = [None; 20];
        for (aa, code) in entries {
            let idx = aa
                .index()
                .ok_or_else(|| PaletteError::NotStandard(aa.code().to_string()))?;
            if code > 0xFF_FF_FF {
                return Err(PaletteError::OutOfRange { aa, code });
            }
            if code == 0 {
                return Err(PaletteError::Background(aa));
            }
            codes[idx] = Some(code);
        }
        let mut out = [0u32; 20];
        let mut reverse = BTreeMap::new();
        for (idx, code) in codes.iter().enumerate() {
            let aa = AminoAcid::STANDARD[idx];
            let code = code.ok_or(PaletteError::Missing(aa))?;
            if let Some(&other) = reverse.get(&code) {
                return Err(PaletteError::Duplicate(other, aa));
            }
            reverse.insert(code, aa);
            out[idx] = code;
        }
        Ok(AminoAcidPalette {
            codes: out,
            reverse,
        })
    }

    pub fn code(&self, aa: AminoAcid) -> Result<u32, PaletteError> {
        aa.index()
            .map(|i| self.codes[i])
            .ok_or(PaletteError::UnknownAminoAcid(aa))
    }

    pub fn encode(&self, aa: AminoAcid) -> Result<Rgb, PaletteError> {
        self.code(aa).map(Rgb::from_code)
    }

    pub fn decode(&self, rgb: Rgb) -> Decoded {
        match self.reverse.get(&rgb.code()) {
            Some(&aa) => Decoded::Amino(aa),
            None => Decoded::NotInPalette,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (AminoAcid, u32)> + '_ {
        AminoAcid::STANDARD
            .iter()
            .zip(self.codes.iter())
            .map(|(&aa, &code)| (aa, code))
    }

    /// Smallest pairwise max-channel distance over all color pairs.
    pub fn min_separation(&self) -> u8 {
        let colors: Vec<Rgb> = self.codes.iter().map(|&c| Rgb::from_code(c)).collect();
        let mut min = u8::MAX;
        for (i, a) in colors.iter().enumerate() {
            for b in &colors[i + 1..] {
                min = min.min(a.max_channel_distance(*b));
            }
        }
        min
    }

    /// `sha256:` digest of the canonical `CODE=decimal` table, one line per entry.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (aa, code) in self.entries() {
            hasher.update(format!("{}={}\n", aa.code(), code).as_bytes());
        }
        format!("sha256:{}", hex_lower(&hasher.finalize()))
    }

    pub fn to_table(&self) -> Vec<PaletteRow> {
        self.entries()
            .map(|(aa, code)| {
                let rgb = Rgb::from_code(code);
                PaletteRow {
                    key: aa,
                    name: aa.name().to_string(),
                    code,
                    hex: format!("#{code:06X}"),
                    rgb: [rgb.0, rgb.1, rgb.2],
                }
            })
            .collect()
    }

    /// Parses an override file: a JSON object `{"ALA": 128, ...}` or a table
    /// as produced by [`AminoAcidPalette::to_table`].
    pub fn from_json(text: &str) -> Result<Self, PaletteError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PaletteError::Malformed(e.to_string()))?;
        let mut entries = Vec::new();
        match value {
            serde_json::Value::Object(map) => {
                for (key, code) in map {
                    let aa = standard_from_key(&key)?;
                    let code = code
                        .as_u64()
                        .and_then(|c| u32::try_from(c).ok())
                        .ok_or_else(|| PaletteError::Malformed(format!("bad code for {key}")))?;
                    entries.push((aa, code));
                }
            }
            serde_json::Value::Array(_) => {
                let rows: Vec<PaletteRow> = serde_json::from_value(value)
                    .map_err(|e| PaletteError::Malformed(e.to_string()))?;
                for row in rows {
                    if !row.key.is_standard() {
                        return Err(PaletteError::NotStandard(row.key.code().to_string()));
                    }
                    entries.push((row.key, row.code));
                }
            }
            _ => return Err(PaletteError::Malformed("expected object or array".into())),
        }
        AminoAcidPalette::from_entries(entries)
    }
}

fn standard_from_key(key: &str) -> Result<AminoAcid, PaletteError> {
    match AminoAcid::from_code(key) {
        AminoAcid::Unknown => Err(PaletteError::NotStandard(key.to_string())),
        aa => Ok(aa),
    }
}

/// One line of the palette dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteRow {
    pub key: AminoAcid,
    pub name: String,
    pub code: u32,
    pub hex: String,
    pub rgb: [u8; 3],
}

pub(crate) fn hex_lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
