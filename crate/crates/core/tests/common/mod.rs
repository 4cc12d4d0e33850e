//! Synthetic PDBx/XML fixtures and helpers shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use protview::{AminoAcid, ProteinStructure64, ResidueKey, ResidueRecord64};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Atom {
    pub group: &'static str,
    pub comp: String,
    pub atom: &'static str,
    pub chain: String,
    pub seq: i32,
    pub xyz: [f64; 3],
    pub alt: Option<char>,
    pub occupancy: f64,
    pub model: u32,
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Helical chains with full backbones, one alternate-location residue, a
/// second model copy of a few residues, waters and a ligand.
pub fn synthetic_atoms(seed: u64, residues_per_chain: usize, chains: usize) -> Vec<Atom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = Vec::new();
    for c in 0..chains {
        let chain = ((b'A' + c as u8) as char).to_string();
        let offset = [
            c as f64 * 18.0 + unit(&mut rng) * 5.0,
            unit(&mut rng) * 10.0 - 5.0,
            c as f64 * 7.0,
        ];
        for i in 0..residues_per_chain {
            let t = i as f64 * 100f64.to_radians();
            let ca = [
                offset[0] + 2.3 * t.cos() + 0.05 * i as f64,
                offset[1] + 2.3 * t.sin(),
                offset[2] + 1.5 * i as f64,
            ];
            let comp = AminoAcid::STANDARD[(rng.next_u64() % 20) as usize]
                .code()
                .to_string();
            let seq = i as i32 + 1;
            for (name, d) in [
                ("N", [-0.5, 1.1, -0.4]),
                ("CA", [0.0, 0.0, 0.0]),
                ("C", [1.2, 0.4, 0.5]),
                ("O", [1.6, 1.4, 0.9]),
            ] {
                let xyz = [ca[0] + d[0], ca[1] + d[1], ca[2] + d[2]];
                atoms.push(Atom {
                    group: "ATOM",
                    comp: comp.clone(),
                    atom: name,
                    chain: chain.clone(),
                    seq,
                    xyz,
                    alt: None,
                    occupancy: 1.0,
                    model: 1,
                });
            }
            if i == 3 {
                for (alt, occ, dx) in [('A', 0.7, 0.8), ('B', 0.3, -0.8)] {
                    atoms.push(Atom {
                        group: "ATOM",
                        comp: comp.clone(),
                        atom: "CB",
                        chain: chain.clone(),
                        seq,
                        xyz: [ca[0] + dx, ca[1] - 1.0, ca[2]],
                        alt: Some(alt),
                        occupancy: occ,
                        model: 1,
                    });
                }
            }
        }
        for w in 0..3 {
            atoms.push(Atom {
                group: "HETATM",
                comp: "HOH".into(),
                atom: "O",
                chain: chain.clone(),
                seq: 1000 + w,
                xyz: [
                    offset[0] - 30.0 - w as f64,
                    offset[1] + 40.0,
                    offset[2] - 25.0,
                ],
                alt: None,
                occupancy: 1.0,
                model: 1,
            });
        }
    }
    atoms.push(Atom {
        group: "HETATM",
        comp: "ATP".into(),
        atom: "PG",
        chain: "A".into(),
        seq: 900,
        xyz: [100.0, 100.0, 100.0],
        alt: None,
        occupancy: 1.0,
        model: 1,
    });
    let model2: Vec<Atom> = atoms
        .iter()
        .filter(|a| a.group == "ATOM" && a.seq <= 2 && a.chain == "A")
        .map(|a| Atom {
            group: a.group,
            comp: a.comp.clone(),
            atom: a.atom,
            chain: a.chain.clone(),
            seq: a.seq,
            xyz: [a.xyz[0] + 50.0, a.xyz[1], a.xyz[2]],
            alt: a.alt,
            occupancy: a.occupancy,
            model: 2,
        })
        .collect();
    atoms.extend(model2);
    atoms
}

pub fn to_pdbml(id: &str, atoms: &[Atom]) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "<?xml version=\"1.0\" encoding=\"UTF-8\" ?>\n<PDBx:datablock datablockName=\"{id}\" \
         xmlns:PDBx=\"http://pdbml.pdb.org/schema/pdbx-v50.xsd\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\">\n  <PDBx:atom_siteCategory>\n"
    );
    for (i, a) in atoms.iter().enumerate() {
        let alt = match a.alt {
            Some(c) => format!("<PDBx:label_alt_id>{c}</PDBx:label_alt_id>"),
            None => "<PDBx:label_alt_id xsi:nil=\"true\" />".into(),
        };
        let label_seq = if a.group == "ATOM" {
            format!("<PDBx:label_seq_id>{}</PDBx:label_seq_id>", a.seq)
        } else {
            "<PDBx:label_seq_id xsi:nil=\"true\" />".into()
        };
        let _ = write!(
            s,
            "    <PDBx:atom_site id=\"{n}\">\n      <PDBx:B_iso_or_equiv>20.00</PDBx:B_iso_or_equiv>\n      \
             <PDBx:Cartn_x>{x:.3}</PDBx:Cartn_x>\n      <PDBx:Cartn_y>{y:.3}</PDBx:Cartn_y>\n      \
             <PDBx:Cartn_z>{z:.3}</PDBx:Cartn_z>\n      <PDBx:auth_asym_id>{chain}</PDBx:auth_asym_id>\n      \
             <PDBx:auth_atom_id>{atom}</PDBx:auth_atom_id>\n      <PDBx:auth_comp_id>{comp}</PDBx:auth_comp_id>\n      \
             <PDBx:auth_seq_id>{seq}</PDBx:auth_seq_id>\n      <PDBx:group_PDB>{group}</PDBx:group_PDB>\n      \
             {alt}\n      <PDBx:label_asym_id>{chain}</PDBx:label_asym_id>\n      <PDBx:label_atom_id>{atom}</PDBx:label_atom_id>\n      \
             <PDBx:label_comp_id>{comp}</PDBx:label_comp_id>\n      {label_seq}\n      \
             <PDBx:occupancy>{occ:.2}</PDBx:occupancy>\n      <PDBx:pdbx_PDB_model_num>{model}</PDBx:pdbx_PDB_model_num>\n      \
             <PDBx:type_symbol>{elem}</PDBx:type_symbol>\n    </PDBx:atom_site>\n",
            n = i + 1,
            x = a.xyz[0],
            y = a.xyz[1],
            z = a.xyz[2],
            chain = a.chain,
            atom = a.atom,
            comp = a.comp,
            seq = a.seq,
            group = a.group,
            occ = a.occupancy,
            model = a.model,
            elem = &a.atom[..1],
        );
    }
    s.push_str("  </PDBx:atom_siteCategory>\n</PDBx:datablock>\n");
    s
}

/// Writes `count` synthetic fixture files named `SYN<n>.xml` into `dir`.
pub fn write_synthetic_corpus(dir: &Path, count: usize, residues_per_chain: usize) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir).unwrap();
    (0..count)
        .map(|i| {
            let id = format!("SYN{i}");
            let atoms = synthetic_atoms(1000 + i as u64, residues_per_chain + 7 * i, 1 + i % 3);
            let path = dir.join(format!("{id}.xml"));
            std::fs::write(&path, to_pdbml(&id, &atoms)).unwrap();
            path
        })
        .collect()
}

/// In-memory structure with `n` residues at three-decimal coordinates.
pub fn random_structure(rng: &mut ChaCha8Rng, n: usize, span: f64) -> ProteinStructure64 {
    ProteinStructure64::new(
        "RND",
        (0..n)
            .map(|i| ResidueRecord64 {
                key: ResidueKey::new(if i % 2 == 0 { "A" } else { "B" }, i as i32),
                amino_acid: AminoAcid::STANDARD[(rng.next_u64() % 20) as usize],
                position: [0, 1, 2].map(|_| ((unit(rng) - 0.5) * span * 1000.0).round() / 1000.0),
                occupancy: 1.0,
                alt_loc: None,
                model_num: 1,
            })
            .collect(),
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    unit(rng)
}

/// Accessions shown in the published figure of example renderings.
pub const FIGURE_ACCESSIONS: [&str; 4] = ["5AFR", "5AGU", "6ABO", "6AGX"];

/// Locates real PDBx/XML files for the figure accessions, if present.
pub fn real_fixture_dir() -> PathBuf {
    std::env::var_os("PROTVIEW_PDBX_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/pdbx"))
}

pub fn find_real_fixture(id: &str) -> Option<PathBuf> {
    let dir = real_fixture_dir();
    [
        format!("{id}.xml.gz"),
        format!("{id}.xml"),
        format!("{}.xml.gz", id.to_lowercase()),
        format!("{}.xml", id.to_lowercase()),
    ]
    .into_iter()
    .map(|n| dir.join(n))
    .find(|p| p.is_file())
}
