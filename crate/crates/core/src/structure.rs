//! PDBx/XML ingest: atom sites to one representative point per residue.
//!
//! Each polymer residue is represented by its alpha carbon (`CA`); residues
//! without a `CA` fall back to the centroid of their atoms. Alternate locations
//! yield one record per `alt_id` (shared atoms with a blank `alt_id` are included
//! in every alternative); [`deduplicate`] then resolves them.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Cursor, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amino::AminoAcid;
use crate::scalar::{Scalar, Vec3};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("no atom_site records found")]
    NoAtomSites,
    #[error("atom_site {id}: {reason}")]
    MalformedAtomSite { id: String, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Identifies a residue within a structure. Orders by chain, number, insertion code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResidueKey {
    pub chain_id: String,
    pub seq_num: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ins_code: Option<char>,
}

impl ResidueKey {
    pub fn new(chain_id: impl Into<String>, seq_num: i32) -> Self {
        ResidueKey {
            chain_id: chain_id.into(),
            seq_num,
            ins_code: None,
        }
    }
}

impl std::fmt::Display for ResidueKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.chain_id, self.seq_num)?;
        if let Some(c) = self.ins_code {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueRecord<T> {
    pub key: ResidueKey,
    pub amino_acid: AminoAcid,
    pub position: Vec3<T>,
    pub occupancy: T,
    pub alt_loc: Option<char>,
    pub model_num: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProteinStructure<T> {
    pub id: String,
    pub residues: Vec<ResidueRecord<T>>,
    pub source_path: String,
}

impl<T: Scalar> ProteinStructure<T> {
    pub fn new(id: impl Into<String>, residues: Vec<ResidueRecord<T>>) -> Self {
        ProteinStructure {
            id: id.into(),
            residues,
            source_path: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Applies `f` to every position.
    pub fn map_positions(&self, f: impl Fn(Vec3<T>) -> Vec3<T>) -> Self {
        let mut out = self.clone();
        for r in &mut out.residues {
            r.position = f(r.position);
        }
        out
    }
}

/// Counters collected while parsing one file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub atom_sites: usize,
    /// Atoms skipped because they belong to water, ligands or ions.
    pub non_polymer_atoms: usize,
    /// Polymer residue records dropped because their name is not a standard amino acid.
    pub unknown_residues: usize,
    pub unknown_names: BTreeMap<String, usize>,
}

/// One `atom_site` element; `None` values are present but nil.
#[derive(Debug, Default)]
struct AtomSite {
    id: String,
    fields: HashMap<String, Option<String>>,
}

impl AtomSite {
    fn get(&self, name: &str) -> Option<&str> {
        self.fields
            .get(name)
            .and_then(|v| v.as_deref())
            .map(str::trim)
            .filter(|s| !s.is_empty() && *s != "?" && *s != ".")
    }

    fn first(&self, names: &[&str]) -> Option<&str> {
        names.iter().find_map(|n| self.get(n))
    }

    fn is_polymer(&self) -> bool {
        match self.fields.get("label_seq_id") {
            Some(Some(v)) => {
                let v = v.trim();
                !v.is_empty() && v != "." && v != "?"
            }
            Some(None) => false,
            None => self.get("group_PDB") != Some("HETATM"),
        }
    }

    fn err(&self, reason: impl Into<String>) -> IngestError {
        IngestError::MalformedAtomSite {
            id: self.id.clone(),
            reason: reason.into(),
        }
    }

    fn number<T: Scalar>(&self, name: &str) -> Result<T, IngestError> {
        let raw = self
            .get(name)
            .ok_or_else(|| self.err(format!("missing {name}")))?;
        let v: T = raw
            .parse()
            .map_err(|_| self.err(format!("{name} is not a number: `{raw}`")))?;
        if !v.is_finite() {
            return Err(self.err(format!("{name} is not finite")));
        }
        Ok(v)
    }
}

struct Atom<T> {
    name: String,
    alt: Option<char>,
    position: Vec3<T>,
    occupancy: T,
    comp: String,
}

type AtomGroupKey = (u32, ResidueKey);

/// Reads a whole stream, transparently inflating gzip input.
pub fn read_maybe_gzip<R: Read>(mut input: R) -> Result<Vec<u8>, IngestError> {
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        MultiGzDecoder::new(Cursor::new(raw))
            .read_to_end(&mut out)
            .map_err(|e| IngestError::MalformedXml(format!("gzip: {e}")))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Parses PDBx/XML (optionally gzip-compressed) into raw, not yet deduplicated residues.
pub fn parse_structure<T: Scalar, R: Read>(
    input: R,
    id: &str,
) -> Result<(ProteinStructure<T>, ParseReport), IngestError> {
    let bytes = read_maybe_gzip(input)?;
    let sites = read_atom_sites(BufReader::new(Cursor::new(bytes)))?;
    if sites.is_empty() {
        return Err(IngestError::NoAtomSites);
    }

    let mut report = ParseReport {
        atom_sites: sites.len(),
        ..ParseReport::default()
    };
    let mut groups: BTreeMap<AtomGroupKey, Vec<Atom<T>>> = BTreeMap::new();
    for site in &sites {
        if !site.is_polymer() {
            report.non_polymer_atoms += 1;
            continue;
        }
        let chain_id = site
            .first(&["auth_asym_id", "label_asym_id"])
            .ok_or_else(|| site.err("missing chain id"))?
            .to_string();
        let seq_raw = site
            .first(&["auth_seq_id", "label_seq_id"])
            .ok_or_else(|| site.err("missing residue number"))?;
        let seq_num: i32 = seq_raw
            .parse()
            .map_err(|_| site.err(format!("bad residue number `{seq_raw}`")))?;
        let model_num: u32 = match site.get("pdbx_PDB_model_num") {
            Some(m) => m
                .parse()
                .map_err(|_| site.err(format!("bad model number `{m}`")))?,
            None => 1,
        };
        let occupancy = match site.get("occupancy") {
            Some(_) => site.number::<T>("occupancy")?,
            None => T::one(),
        };
        let atom = Atom {
            name: site
                .first(&["auth_atom_id", "label_atom_id"])
                .unwrap_or("")
                .to_string(),
            alt: site.get("label_alt_id").and_then(|s| s.chars().next()),
            position: [
                site.number("Cartn_x")?,
                site.number("Cartn_y")?,
                site.number("Cartn_z")?,
            ],
            occupancy,
            comp: site
                .first(&["auth_comp_id", "label_comp_id"])
                .ok_or_else(|| site.err("missing residue name"))?
                .to_string(),
        };
        let key = ResidueKey {
            chain_id,
            seq_num,
            ins_code: site.get("pdbx_PDB_ins_code").and_then(|s| s.chars().next()),
        };
        groups.entry((model_num, key)).or_default().push(atom);
    }

    let mut residues = Vec::new();
    for ((model_num, key), atoms) in groups {
        for record in residue_alternatives(model_num, key, &atoms) {
            if record.amino_acid.is_standard() {
                residues.push(record);
            } else {
                report.unknown_residues += 1;
                let name = atoms
                    .iter()
                    .find(|a| a.alt.is_none() || a.alt == record.alt_loc)
                    .map(|a| a.comp.to_uppercase())
                    .unwrap_or_default();
                *report.unknown_names.entry(name).or_default() += 1;
            }
        }
    }

    Ok((
        ProteinStructure {
            id: id.to_string(),
            residues,
            source_path: String::new(),
        },
        report,
    ))
}

/// Opens and parses a structure file, recording its path.
pub fn read_structure_file<T: Scalar>(
    path: &Path,
    id: &str,
) -> Result<(ProteinStructure<T>, ParseReport), IngestError> {
    let file = std::fs::File::open(path)?;
    let (mut s, report) = parse_structure(file, id)?;
    s.source_path = path.display().to_string();
    Ok((s, report))
}

/// Protein id implied by a file name: `5afr.xml.gz` -> `5AFR`.
pub fn id_from_path(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut stem = name.as_str();
    for ext in [".gz", ".xml", ".pdbml"] {
        if stem.len() > ext.len() && stem.to_ascii_lowercase().ends_with(ext) {
            stem = &stem[..stem.len() - ext.len()];
        }
    }
    stem.to_ascii_uppercase()
}

fn residue_alternatives<T: Scalar>(
    model_num: u32,
    key: ResidueKey,
    atoms: &[Atom<T>],
) -> Vec<ResidueRecord<T>> {
    let mut alts: Vec<Option<char>> = atoms.iter().filter_map(|a| a.alt).map(Some).collect();
    alts.sort();
    alts.dedup();
    if alts.is_empty() {
        alts.push(None);
    }
    alts.into_iter()
        .filter_map(|alt| {
            let members: Vec<&Atom<T>> = atoms
                .iter()
                .filter(|a| a.alt.is_none() || a.alt == alt)
                .collect();
            let first = members.first()?;
            // the alternative's own atoms name the residue when names disagree
            let comp = members
                .iter()
                .find(|a| a.alt.is_some())
                .unwrap_or(first)
                .comp
                .as_str();
            let (position, occupancy) = match members.iter().find(|a| a.name == "CA") {
                Some(ca) => (ca.position, ca.occupancy),
                None => centroid(&members),
            };
            Some(ResidueRecord {
                key: key.clone(),
                amino_acid: AminoAcid::from_code(comp),
                position,
                occupancy,
                alt_loc: alt,
                model_num,
            })
        })
        .collect()
}

fn centroid<T: Scalar>(atoms: &[&Atom<T>]) -> (Vec3<T>, T) {
    let n = T::from_usize(atoms.len()).unwrap_or_else(T::one);
    let mut sum = [T::zero(); 3];
    let mut occ = T::zero();
    for a in atoms {
        for (acc, v) in sum.iter_mut().zip(a.position) {
            *acc = *acc + v;
        }
        occ = occ + a.occupancy;
    }
    ([sum[0] / n, sum[1] / n, sum[2] / n], occ / n)
}

fn local_name(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.local_name().as_ref()).into_owned()
}

fn is_nil(e: &BytesStart<'_>) -> bool {
    e.attributes()
        .flatten()
        .any(|a| a.key.local_name().as_ref() == b"nil" && a.value.as_ref() == b"true")
}

fn attr(e: &BytesStart<'_>, name: &[u8]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.local_name().as_ref() == name)
        .map(|a| String::from_utf8_lossy(&a.value).into_owned())
}

fn read_atom_sites<R: BufRead>(input: R) -> Result<Vec<AtomSite>, IngestError> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().trim_text(true);
    let malformed = |e: &dyn std::fmt::Display, pos: u64| {
        IngestError::MalformedXml(format!("{e} at byte {pos}"))
    };

    let mut buf = Vec::new();
    let mut depth = 0usize;
    let mut seen_root = false;
    let mut sites = Vec::new();
    // (depth of atom_site element, record)
    let mut current: Option<(usize, AtomSite)> = None;
    let mut field: Option<String> = None;

    loop {
        let pos = reader.buffer_position();
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| malformed(&e, pos))?;
        match event {
            Event::Start(e) => {
                if depth == 0 {
                    if seen_root {
                        return Err(IngestError::MalformedXml("multiple root elements".into()));
                    }
                    seen_root = true;
                }
                depth += 1;
                let name = local_name(&e);
                match &mut current {
                    None if name == "atom_site" => {
                        current = Some((
                            depth,
                            AtomSite {
                                id: attr(&e, b"id").unwrap_or_default(),
                                fields: HashMap::new(),
                            },
                        ));
                    }
                    Some((site_depth, site)) if depth == *site_depth + 1 => {
                        let value = if is_nil(&e) {
                            None
                        } else {
                            Some(String::new())
                        };
                        site.fields.insert(name.clone(), value);
                        field = Some(name);
                    }
                    _ => {}
                }
            }
            Event::Empty(e) => {
                if depth == 0 {
                    if seen_root {
                        return Err(IngestError::MalformedXml("multiple root elements".into()));
                    }
                    seen_root = true;
                }
                let name = local_name(&e);
                match &mut current {
                    Some((site_depth, site)) if depth == *site_depth => {
                        let value = if is_nil(&e) {
                            None
                        } else {
                            Some(String::new())
                        };
                        site.fields.insert(name, value);
                    }
                    None if name == "atom_site" => sites.push(AtomSite {
                        id: attr(&e, b"id").unwrap_or_default(),
                        fields: HashMap::new(),
                    }),
                    _ => {}
                }
            }
            Event::Text(t) => {
                let text = t.decode().map_err(|e| malformed(&e, pos))?;
                if depth == 0 {
                    if !text.trim().is_empty() {
                        return Err(IngestError::MalformedXml(format!(
                            "text outside the root element at byte {pos}"
                        )));
                    }
                    continue;
                }
                if let (Some((_, site)), Some(name)) = (&mut current, &field) {
                    if let Some(Some(value)) = site.fields.get_mut(name) {
                        value.push_str(&text);
                    }
                }
            }
            Event::CData(t) => {
                if let (Some((_, site)), Some(name)) = (&mut current, &field) {
                    if let Some(Some(value)) = site.fields.get_mut(name) {
                        value.push_str(&String::from_utf8_lossy(&t));
                    }
                }
            }
            Event::End(_) => {
                if depth == 0 {
                    return Err(IngestError::MalformedXml(format!(
                        "unbalanced end tag at byte {pos}"
                    )));
                }
                if let Some((site_depth, _)) = &current {
                    if depth == *site_depth {
                        let (_, site) = current.take().expect("checked above");
                        sites.push(site);
                    } else if depth == *site_depth + 1 {
                        field = None;
                    }
                }
                depth -= 1;
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if depth != 0 {
        return Err(IngestError::MalformedXml(
            "unexpected end of document".into(),
        ));
    }
    if !seen_root {
        return Err(IngestError::MalformedXml("no root element".into()));
    }
    Ok(sites)
}

/// Keeps model 1 and resolves alternate locations: highest occupancy wins, ties
/// go to the smallest `alt_loc` (blank sorts first). Output is sorted by residue key.
pub fn deduplicate<T: Scalar>(structure: &ProteinStructure<T>) -> ProteinStructure<T> {
    let mut best: BTreeMap<&ResidueKey, &ResidueRecord<T>> = BTreeMap::new();
    for r in &structure.residues {
        if r.model_num != 1 || !r.amino_acid.is_standard() {
            continue;
        }
        best.entry(&r.key)
            .and_modify(|cur| {
                if prefer(r, cur) {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    ProteinStructure {
        id: structure.id.clone(),
        residues: best.into_values().cloned().collect(),
        source_path: structure.source_path.clone(),
    }
}

fn prefer<T: Scalar>(candidate: &ResidueRecord<T>, current: &ResidueRecord<T>) -> bool {
    if candidate.occupancy != current.occupancy {
        return candidate.occupancy > current.occupancy;
    }
    if candidate.alt_loc != current.alt_loc {
        return candidate.alt_loc < current.alt_loc;
    }
    // identical keys and occupancy: fall back to content so the result is order-free
    let a = (candidate.amino_acid, position_bits(candidate.position));
    let b = (current.amino_acid, position_bits(current.position));
    a < b
}

fn position_bits<T: Scalar>(p: Vec3<T>) -> [u64; 3] {
    p.map(|v| v.to_f64_lossy().to_bits())
}


#[cfg(test)]
mod tests {
    use super::fixtures::{pdbml, Site};
    use super::*;

    fn parse(xml: &str) -> (ProteinStructure<f64>, ParseReport) {
        parse_structure(xml.as_bytes(), "TEST").unwrap()
    }

    fn record(
        chain: &str,
        seq: i32,
        occ: f64,
        alt: Option<char>,
        model: u32,
    ) -> ResidueRecord<f64> {
        ResidueRecord {
            key: ResidueKey::new(chain, seq),
            amino_acid: AminoAcid::Ala,
            position: [seq as f64, occ, 0.0],
            occupancy: occ,
            alt_loc: alt,
            model_num: model,
        }
    }

    #[test]
    fn single_alanine_uses_alpha_carbon() {
        let xml = pdbml(
            "T1",
            &[
                Site::new("A", 1, "ALA", "N", [0.5, 1.5, 2.5]),
                Site::new("A", 1, "ALA", "CA", [1.0, 2.0, 3.0]),
                Site::new("A", 1, "ALA", "C", [1.5, 2.5, 3.5]),
            ],
        );
        let (s, report) = parse(&xml);
        assert_eq!(s.residues.len(), 1);
        assert_eq!(s.residues[0].position, [1.0, 2.0, 3.0]);
        assert_eq!(s.residues[0].amino_acid, AminoAcid::Ala);
        assert_eq!(report.atom_sites, 3);
    }

    #[test]
    fn missing_alpha_carbon_uses_centroid() {
        let xml = pdbml(
            "T2",
            &[
                Site::new("A", 1, "GLY", "N", [0.0, 0.0, 0.0]),
                Site::new("A", 1, "GLY", "C", [2.0, 0.0, 0.0]),
            ],
        );
        let (s, _) = parse(&xml);
        assert_eq!(s.residues[0].position, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_atom_site_list_is_an_error() {
        let xml = pdbml("T3", &[]);
        assert!(matches!(
            parse_structure::<f64, _>(xml.as_bytes(), "T3"),
            Err(IngestError::NoAtomSites)
        ));
    }

    #[test]
    fn garbage_is_malformed() {
        for input in ["", "not xml at all", "<a><b></a>", "<a>", "<a/><b/>"] {
            let r = parse_structure::<f64, _>(input.as_bytes(), "X");
            assert!(
                matches!(r, Err(IngestError::MalformedXml(_))),
                "{input:?}: {r:?}"
            );
        }
    }

    #[test]
    fn non_polymer_excluded_and_unknown_counted() {
        let mut water = Site::new("A", 101, "HOH", "O", [9.0, 9.0, 9.0]);
        water.polymer = false;
        let xml = pdbml(
            "T4",
            &[
                Site::new("A", 1, "ALA", "CA", [0.0, 0.0, 0.0]),
                Site::new("A", 2, "MSE", "CA", [1.0, 0.0, 0.0]),
                water,
            ],
        );
        let (s, report) = parse(&xml);
        assert_eq!(s.residues.len(), 1);
        assert_eq!(report.non_polymer_atoms, 1);
        assert_eq!(report.unknown_residues, 1);
        assert_eq!(report.unknown_names.get("MSE"), Some(&1));
    }

    #[test]
    fn alternate_locations_share_blank_atoms() {
        let mut ca = Site::new("A", 5, "SER", "CA", [1.0, 1.0, 1.0]);
        ca.occupancy = 1.0;
        let mut og_a = Site::new("A", 5, "SER", "OG", [2.0, 0.0, 0.0]);
        og_a.alt = Some('A');
        og_a.occupancy = 0.6;
        let mut og_b = Site::new("A", 5, "SER", "OG", [0.0, 2.0, 0.0]);
        og_b.alt = Some('B');
        og_b.occupancy = 0.4;
        let (s, _) = parse(&pdbml("T5", &[ca, og_a, og_b]));
        assert_eq!(s.residues.len(), 2);
        assert!(s.residues.iter().all(|r| r.position == [1.0, 1.0, 1.0]));
        let d = deduplicate(&s);
        assert_eq!(d.residues.len(), 1);
        assert_eq!(d.residues[0].alt_loc, Some('A'));
    }

    #[test]
    fn gzip_input_is_detected() {
        use flate2::write::GzEncoder;
        use std::io::Write;
        let xml = pdbml("T6", &[Site::new("B", 3, "LYS", "CA", [1.0, 2.0, 3.0])]);
        let mut enc = GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(xml.as_bytes()).unwrap();
        let gz = enc.finish().unwrap();
        let (s, _) = parse_structure::<f32, _>(gz.as_slice(), "T6").unwrap();
        assert_eq!(s.residues[0].key, ResidueKey::new("B", 3));
        assert_eq!(s.residues[0].position, [1.0f32, 2.0, 3.0]);
    }

    #[test]
    fn bad_coordinate_reports_site() {
        let xml = pdbml("T7", &[Site::new("A", 1, "ALA", "CA", [1.0, 2.0, 3.0])]).replace(
            "<PDBx:Cartn_x>1</PDBx:Cartn_x>",
            "<PDBx:Cartn_x>abc</PDBx:Cartn_x>",
        );
        let r = parse_structure::<f64, _>(xml.as_bytes(), "T7");
        assert!(
            matches!(r, Err(IngestError::MalformedAtomSite { .. })),
            "{r:?}"
        );
    }

    #[test]
    fn dedup_keeps_highest_occupancy() {
        let s = ProteinStructure::new(
            "D1",
            vec![
                record("A", 10, 0.4, Some('B'), 1),
                record("A", 10, 0.6, Some('A'), 1),
            ],
        );
        let d = deduplicate(&s);
        assert_eq!(d.residues.len(), 1);
        assert_eq!(d.residues[0].occupancy, 0.6);
    }

    #[test]
    fn dedup_tie_prefers_smallest_alt() {
        let s = ProteinStructure::new(
            "D2",
            vec![
                record("A", 1, 0.5, Some('B'), 1),
                record("A", 1, 0.5, Some('A'), 1),
            ],
        );
        assert_eq!(deduplicate(&s).residues[0].alt_loc, Some('A'));
    }

    #[test]
    fn dedup_drops_other_models() {
        let s = ProteinStructure::new("D3", vec![record("A", 1, 1.0, None, 2)]);
        assert!(deduplicate(&s).residues.is_empty());
    }

    #[test]
    fn dedup_identity_on_unique_sorted_input() {
        let s = ProteinStructure::new(
            "D4",
            vec![
                record("A", 1, 1.0, None, 1),
                record("A", 2, 1.0, None, 1),
                record("B", 1, 1.0, None, 1),
            ],
        );
        assert_eq!(deduplicate(&s), s);
    }

    #[test]
    fn id_from_file_names() {
        assert_eq!(id_from_path(Path::new("/x/5afr.xml.gz")), "5AFR");
        assert_eq!(id_from_path(Path::new("6AGX.xml")), "6AGX");
    }
}
