//! The twenty standard amino acids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AminoAcid {
    Ala,
    Arg,
    Asn,
    Asp,
    Cys,
    Gln,
    Glu,
    Gly,
    His,
    Ile,
    Leu,
    Lys,
    Met,
    Phe,
    Pro,
    Ser,
    Thr,
    Trp,
    Tyr,
    Val,
    /// Any residue name outside the standard twenty. Never rendered.
    Unknown,
}

impl AminoAcid {
    /// The standard amino acids in canonical (alphabetical three-letter) order.
    pub const STANDARD: [AminoAcid; 20] = [
        AminoAcid::Ala,
        AminoAcid::Arg,
        AminoAcid::Asn,
        AminoAcid::Asp,
        AminoAcid::Cys,
        AminoAcid::Gln,
        AminoAcid::Glu,
        AminoAcid::Gly,
        AminoAcid::His,
        AminoAcid::Ile,
        AminoAcid::Leu,
        AminoAcid::Lys,
        AminoAcid::Met,
        AminoAcid::Phe,
        AminoAcid::Pro,
        AminoAcid::Ser,
        AminoAcid::Thr,
        AminoAcid::Trp,
        AminoAcid::Tyr,
        AminoAcid::Val,
    ];

    /// Maps a residue name (three-letter code, case-insensitive) to an amino acid.
    /// Anything that is not one of the standard twenty becomes `Unknown`.
    pub fn from_code(code: &str) -> AminoAcid {
        let code = code.trim();
        AminoAcid::STANDARD
            .iter()
            .copied()
            .find(|aa| aa.code().eq_ignore_ascii_case(code))
            .unwrap_or(AminoAcid::Unknown)
    }

    pub fn code(self) -> &'static str {
        match self {
            AminoAcid::Ala => "ALA",
            AminoAcid::Arg => "ARG",
            AminoAcid::Asn => "ASN",
            AminoAcid::Asp => "ASP",
            AminoAcid::Cys => "CYS",
            AminoAcid::Gln => "GLN",
            AminoAcid::Glu => "GLU",
            AminoAcid::Gly => "GLY",
            AminoAcid::His => "HIS",
            AminoAcid::Ile => "ILE",
            AminoAcid::Leu => "LEU",
            AminoAcid::Lys => "LYS",
            AminoAcid::Met => "MET",
            AminoAcid::Phe => "PHE",
            AminoAcid::Pro => "PRO",
            AminoAcid::Ser => "SER",
            AminoAcid::Thr => "THR",
            AminoAcid::Trp => "TRP",
            AminoAcid::Tyr => "TYR",
            AminoAcid::Val => "VAL",
            AminoAcid::Unknown => "UNK",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AminoAcid::Ala => "Alanine",
            AminoAcid::Arg => "Arginine",
            AminoAcid::Asn => "Asparagine",
            AminoAcid::Asp => "Aspartic acid",
            AminoAcid::Cys => "Cysteine",
            AminoAcid::Gln => "Glutamine",
            AminoAcid::Glu => "Glutamic acid",
            AminoAcid::Gly => "Glycine",
            AminoAcid::His => "Histidine",
            AminoAcid::Ile => "Isoleucine",
            AminoAcid::Leu => "Leucine",
            AminoAcid::Lys => "Lysine",
            AminoAcid::Met => "Methionine",
            AminoAcid::Phe => "Phenylalanine",
            AminoAcid::Pro => "Proline",
            AminoAcid::Ser => "Serine",
            AminoAcid::Thr => "Threonine",
            AminoAcid::Trp => "Tryptophan",
            AminoAcid::Tyr => "Tyrosine",
            AminoAcid::Val => "Valine",
            AminoAcid::Unknown => "Unknown",
        }
    }

    pub fn is_standard(self) -> bool {
        self != AminoAcid::Unknown
    }

    /// Position in [`AminoAcid::STANDARD`], `None` for `Unknown`.
    pub fn index(self) -> Option<usize> {
        AminoAcid::STANDARD.iter().position(|&aa| aa == self)
    }
}

impl fmt::Display for AminoAcid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AminoAcid {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(AminoAcid::from_code(s))
    }
}

impl Serialize for AminoAcid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for AminoAcid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        match AminoAcid::from_code(&code) {
            AminoAcid::Unknown if !code.eq_ignore_ascii_case("UNK") => Err(
                serde::de::Error::custom(format!("unknown amino acid code `{code}`")),
            ),
            aa => Ok(aa),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for aa in AminoAcid::STANDARD {
            assert_eq!(AminoAcid::from_code(aa.code()), aa);
            assert_eq!(AminoAcid::from_code(&aa.code().to_lowercase()), aa);
        }
    }

    #[test]
    fn non_standard_names_are_unknown() {
        for name in ["HOH", "MSE", "DA", "", "SEC"] {
            assert_eq!(AminoAcid::from_code(name), AminoAcid::Unknown);
        }
    }

    #[test]
    fn standard_order_matches_enum_order() {
        let mut sorted = AminoAcid::STANDARD;
        sorted.sort();
        assert_eq!(sorted, AminoAcid::STANDARD);
        assert_eq!(AminoAcid::Unknown.index(), None);
        assert_eq!(AminoAcid::Val.index(), Some(19));
    }
}
