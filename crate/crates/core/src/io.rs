//! File formats: complexes, maps, iota-complexes, knot complexes and
//! hyperboxes as structured JSON text. Serialization is canonical
//! (sorted entries, exact half-integer gradings as strings) and
//! round-trips bit-exactly.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complex::{ChainMap, FreeComplex, Generator, SparseMat};
use crate::error::{Error, Result};
use crate::grading::{gr_len, parse_half, render_half, Gr};
use crate::hypercube::Hyperbox;
use crate::involutive::IotaComplex;
use crate::knots::IotaKComplex;
use crate::ring::{Coefficient, Mode};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorDoc {
    pub name: String,
    pub gr: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryDoc {
    pub from: String,
    pub to: String,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub mode: String,
    pub generators: Vec<GeneratorDoc>,
    pub differential: Vec<EntryDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapDoc {
    pub degree: Vec<String>,
    pub equivariance: String,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FileDoc {
    #[serde(rename = "complex")]
    Complex { complex: ComplexDoc },
    #[serde(rename = "iota")]
    Iota { complex: ComplexDoc, iota: MapDoc },
    #[serde(rename = "knot")]
    Knot {
        complex: ComplexDoc,
        alexander: Vec<AlexanderDoc>,
        iota_k: MapDoc,
        /// the opposite-orientation involution flavor; carried and
        /// validated, nothing is derived from it
        #[serde(skip_serializing_if = "Option::is_none")]
        iota_k_minus: Option<MapDoc>,
        #[serde(skip_serializing_if = "Option::is_none")]
        flip_maps: Option<Vec<FlipDoc>>,
    },
    #[serde(rename = "hyperbox")]
    Hyperbox {
        size: Vec<usize>,
        cells: Vec<CellDoc>,
        arrows: Vec<ArrowDoc>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlexanderDoc {
    pub name: String,
    pub a: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlipDoc {
    pub m: i32,
    pub s: i32,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellDoc {
    pub eps: Vec<usize>,
    pub complex: ComplexDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrowDoc {
    pub from_eps: Vec<usize>,
    pub to_eps: Vec<usize>,
    pub entries: Vec<EntryDoc>,
}

/// Parsed content of an input file.
pub enum Parsed {
    Complex(Arc<FreeComplex>),
    Iota(IotaComplex),
    Knot {
        complex: IotaKComplex,
        /// the other involution flavor, when the file carries one
        minus: Option<IotaKComplex>,
        /// supplied flip maps as (m, s, matrix) triples
        flips: Vec<(i32, i32, SparseMat)>,
    },
    Hyperbox(Hyperbox),
}

fn gr_to_doc(gr: &Gr) -> Vec<String> {
    gr.iter().map(|&g| render_half(g)).collect()
}

fn gr_from_doc(mode: Mode, doc: &[String]) -> Result<Gr> {
    if doc.len() != gr_len(mode) {
        return Err(Error::Parse(format!(
            "grading vector of length {} in mode {mode}",
            doc.len()
        )));
    }
    doc.iter().map(|s| parse_half(s)).collect()
}

pub fn complex_to_doc(c: &FreeComplex) -> ComplexDoc {
    let generators = c
        .gens
        .iter()
        .map(|g| GeneratorDoc {
            name: g.name.clone(),
            gr: gr_to_doc(&g.gr),
        })
        .collect();
    let differential = mat_to_entries(&c.d, c);
    ComplexDoc {
        mode: c.mode.as_str(),
        generators,
        differential,
    }
}

fn mat_to_entries(m: &SparseMat, c: &FreeComplex) -> Vec<EntryDoc> {
    let mut out: Vec<EntryDoc> = m
        .iter()
        .map(|(&(r, col), v)| EntryDoc {
            from: c.gens[col].name.clone(),
            to: c.gens[r].name.clone(),
            coeff: v.render(),
        })
        .collect();
    out.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
    out
}

fn mat_to_entries_between(m: &SparseMat, src: &FreeComplex, tgt: &FreeComplex) -> Vec<EntryDoc> {
    let mut out: Vec<EntryDoc> = m
        .iter()
        .map(|(&(r, col), v)| EntryDoc {
            from: src.gens[col].name.clone(),
            to: tgt.gens[r].name.clone(),
            coeff: v.render(),
        })
        .collect();
    out.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
    out
}

pub fn complex_from_doc(doc: &ComplexDoc) -> Result<Arc<FreeComplex>> {
    let mode = Mode::parse(&doc.mode)?;
    let mut gens = Vec::with_capacity(doc.generators.len());
    for g in &doc.generators {
        gens.push(Generator::new(g.name.clone(), gr_from_doc(mode, &g.gr)?));
    }
    let lookup = |name: &str| -> Result<usize> {
        gens.iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::Parse(format!("unknown generator `{name}`")))
    };
    // entries are (from = source, to = target); the matrix is (row = to)
    let mut d = SparseMat::zero(gens.len(), gens.len());
    for e in &doc.differential {
        let c = Coefficient::parse(mode, &e.coeff)?;
        d.add_to(lookup(&e.to)?, lookup(&e.from)?, &c)?;
    }
    FreeComplex::new(mode, gens, d).map(Arc::new)
}

fn map_from_doc(
    doc: &MapDoc,
    src: &Arc<FreeComplex>,
    tgt: &Arc<FreeComplex>,
) -> Result<ChainMap> {
    let mode = src.mode;
    let skew = match doc.equivariance.as_str() {
        "plain" => false,
        "skew" => true,
        other => {
            return Err(Error::Parse(format!(
                "equivariance must be `plain` or `skew`, got `{other}`"
            )))
        }
    };
    let deg = gr_from_doc(mode, &doc.degree)?;
    let mut mat = SparseMat::zero(tgt.rank(), src.rank());
    for e in &doc.entries {
        let col = src
            .gen_index(&e.from)
            .ok_or_else(|| Error::Parse(format!("unknown generator `{}`", e.from)))?;
        let row = tgt
            .gen_index(&e.to)
            .ok_or_else(|| Error::Parse(format!("unknown generator `{}`", e.to)))?;
        mat.add_to(row, col, &Coefficient::parse(mode, &e.coeff)?)?;
    }
    ChainMap::new(Arc::clone(src), Arc::clone(tgt), deg, skew, mat)
}

fn map_to_doc(m: &ChainMap) -> MapDoc {
    MapDoc {
        degree: gr_to_doc(&m.deg),
        equivariance: if m.skew { "skew" } else { "plain" }.into(),
        entries: mat_to_entries_between(&m.mat, &m.source, &m.target),
    }
}

pub fn iota_to_doc(c: &IotaComplex) -> FileDoc {
    FileDoc::Iota {
        complex: complex_to_doc(&c.base),
        iota: map_to_doc(&c.iota),
    }
}

pub fn knot_to_doc(k: &IotaKComplex, flips: &[(i32, i32, SparseMat)]) -> FileDoc {
    knot_to_doc_full(k, None, flips)
}

pub fn knot_to_doc_full(
    k: &IotaKComplex,
    minus: Option<&IotaKComplex>,
    flips: &[(i32, i32, SparseMat)],
) -> FileDoc {
    let alexander = k
        .base
        .gens
        .iter()
        .map(|g| AlexanderDoc {
            name: g.name.clone(),
            a: render_half(g.gr[2]),
        })
        .collect();
    let flip_maps = if flips.is_empty() {
        None
    } else {
        Some(
            flips
                .iter()
                .map(|(m, s, mat)| FlipDoc {
                    m: *m,
                    s: *s,
                    entries: mat_to_entries(mat, &k.base),
                })
                .collect(),
        )
    };
    FileDoc::Knot {
        complex: complex_to_doc(&k.base),
        alexander,
        iota_k: map_to_doc(&k.iota_k),
        iota_k_minus: minus.map(|v| map_to_doc(&v.iota_k)),
        flip_maps,
    }
}

pub fn complex_to_file(c: &FreeComplex) -> FileDoc {
    FileDoc::Complex {
        complex: complex_to_doc(c),
    }
}

pub fn hyperbox_to_doc(h: &Hyperbox) -> FileDoc {
    let cells = h
        .cells
        .iter()
        .map(|(eps, c)| CellDoc {
            eps: eps.clone(),
            complex: complex_to_doc(c),
        })
        .collect();
    let arrows = h
        .arrows
        .iter()
        .map(|((from, to), m)| ArrowDoc {
            from_eps: from.clone(),
            to_eps: to.clone(),
            entries: mat_to_entries_between(m, &h.cells[from], &h.cells[to]),
        })
        .collect();
    FileDoc::Hyperbox {
        size: h.size.clone(),
        cells,
        arrows,
    }
}

pub fn parse_doc(doc: &FileDoc) -> Result<Parsed> {
    match doc {
        FileDoc::Complex { complex } => Ok(Parsed::Complex(complex_from_doc(complex)?)),
        FileDoc::Iota { complex, iota } => {
            let base = complex_from_doc(complex)?;
            let m = map_from_doc(iota, &base, &base)?;
            Ok(Parsed::Iota(IotaComplex::new(base, m)?))
        }
        FileDoc::Knot {
            complex,
            alexander,
            iota_k,
            iota_k_minus,
            flip_maps,
        } => {
            let base = complex_from_doc(complex)?;
            if base.mode != Mode::Uv(1) {
                return Err(Error::Parse(format!(
                    "knot files carry mode UV complexes, got {}",
                    base.mode
                )));
            }
            // cross-check the redundant Alexander block
            for a in alexander {
                let idx = base
                    .gen_index(&a.name)
                    .ok_or_else(|| Error::Parse(format!("unknown generator `{}`", a.name)))?;
                let declared = parse_half(&a.a)?;
                let derived = base.gens[idx].gr[2];
                if declared != derived {
                    return Err(Error::Grading(format!(
                        "Alexander grading of `{}`: declared {}, (gr_u - gr_v)/2 gives {}",
                        a.name,
                        render_half(declared),
                        render_half(derived)
                    )));
                }
            }
            if alexander.len() != base.rank() {
                return Err(Error::Parse(
                    "alexander block must list every generator".into(),
                ));
            }
            let m = map_from_doc(iota_k, &base, &base)?;
            let minus = match iota_k_minus {
                None => None,
                Some(doc) => Some(IotaKComplex::new(
                    Arc::clone(&base),
                    map_from_doc(doc, &base, &base)?,
                )?),
            };
            let complex = IotaKComplex::new(base, m)?;
            let mut flips = Vec::new();
            if let Some(fm) = flip_maps {
                for f in fm {
                    let mut mat = SparseMat::zero(complex.base.rank(), complex.base.rank());
                    for e in &f.entries {
                        let col = complex.base.gen_index(&e.from).ok_or_else(|| {
                            Error::Parse(format!("unknown generator `{}`", e.from))
                        })?;
                        let row = complex.base.gen_index(&e.to).ok_or_else(|| {
                            Error::Parse(format!("unknown generator `{}`", e.to))
                        })?;
                        mat.add_to(row, col, &Coefficient::parse(Mode::U, &e.coeff)?)?;
                    }
                    flips.push((f.m, f.s, mat));
                }
            }
            Ok(Parsed::Knot { complex, minus, flips })
        }
        FileDoc::Hyperbox { size, cells, arrows } => {
            let mut h = Hyperbox::new(size.clone());
            for c in cells {
                h.set_cell(c.eps.clone(), complex_from_doc(&c.complex)?);
            }
            for a in arrows {
                let src = h.cell(&a.from_eps)?.clone();
                let tgt = h.cell(&a.to_eps)?.clone();
                let mut mat = SparseMat::zero(tgt.rank(), src.rank());
                for e in &a.entries {
                    let col = src
                        .gen_index(&e.from)
                        .ok_or_else(|| Error::Parse(format!("unknown generator `{}`", e.from)))?;
                    let row = tgt
                        .gen_index(&e.to)
                        .ok_or_else(|| Error::Parse(format!("unknown generator `{}`", e.to)))?;
                    mat.add_to(row, col, &Coefficient::parse(src.mode, &e.coeff)?)?;
                }
                h.set_arrow(a.from_eps.clone(), a.to_eps.clone(), mat);
            }
            Ok(Parsed::Hyperbox(h))
        }
    }
}

/// Canonical rendering: pretty JSON plus trailing newline.
pub fn render(doc: &FileDoc) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_str(text: &str) -> Result<Parsed> {
    let doc: FileDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    parse_doc(&doc)
}

pub fn doc_from_str(text: &str) -> Result<FileDoc> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Re-render a parsed value canonically.
pub fn render_parsed(p: &Parsed) -> String {
    let doc = match p {
        Parsed::Complex(c) => complex_to_file(c),
        Parsed::Iota(c) => iota_to_doc(c),
        Parsed::Knot {
            complex,
            minus,
            flips,
        } => knot_to_doc_full(complex, minus.as_ref(), flips),
        Parsed::Hyperbox(h) => hyperbox_to_doc(h),
    };
    render(&doc)
}

/// Serialize a chain map with its own source/target context stripped;
/// used for solver certificates.
pub fn map_doc_for(m: &ChainMap) -> MapDoc {
    map_to_doc(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn knot_file_round_trip_is_bit_exact() {
        let k = fixtures::trefoil();
        let doc = knot_to_doc(&k, &[]);
        let text = render(&doc);
        let parsed = parse_str(&text).unwrap();
        let text2 = render_parsed(&parsed);
        assert_eq!(text, text2);
        match parsed {
            Parsed::Knot { complex, .. } => {
                assert_eq!(complex.base, k.base);
                assert_eq!(complex.iota_k.mat, k.iota_k.mat);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn hyperbox_round_trip() {
        let h = fixtures::handle_square_w1();
        let text = render(&hyperbox_to_doc(&h));
        match parse_str(&text).unwrap() {
            Parsed::Hyperbox(h2) => assert_eq!(h, h2),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn unknown_generator_reference_is_a_parse_error() {
        let k = fixtures::unknot();
        let doc = knot_to_doc(&k, &[]);
        let mut text = render(&doc);
        text = text.replace("\"differential\": []",
            "\"differential\": [{\"from\": \"ghost\", \"to\": \"u\", \"coeff\": \"1\"}]");
        match parse_str(&text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("ghost")),
            other => panic!("expected parse error, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn alexander_mismatch_is_a_grading_error() {
        let k = fixtures::trefoil();
        let doc = knot_to_doc(&k, &[]);
        let text = render(&doc).replace("\"a\": \"1\"", "\"a\": \"2\"");
        assert!(matches!(parse_str(&text), Err(Error::Grading(_))));
    }

    #[test]
    fn shipped_fixture_files_round_trip_bit_exactly() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if !path.is_file() {
                continue;
            }
            let text = std::fs::read_to_string(&path).unwrap();
            let parsed = parse_str(&text).unwrap();
            assert_eq!(
                render_parsed(&parsed),
                text,
                "{} is not in canonical form",
                path.display()
            );
            seen += 1;
        }
        assert!(seen >= 8);
    }

    #[test]
    fn both_involution_flavors_round_trip() {
        let k = fixtures::trefoil();
        let text = render(&knot_to_doc_full(&k, Some(&k), &[]));
        let parsed = parse_str(&text).unwrap();
        match &parsed {
            Parsed::Knot { minus, .. } => {
                let other = minus.as_ref().expect("minus flavor carried");
                assert!(other.validate().passed());
            }
            _ => panic!("wrong kind"),
        }
        assert_eq!(render_parsed(&parsed), text);
    }

    #[test]
    fn iota_file_round_trip() {
        let c = fixtures::s3_iota();
        let text = render(&iota_to_doc(&c));
        match parse_str(&text).unwrap() {
            Parsed::Iota(c2) => {
                assert_eq!(c2.base, c.base);
                assert_eq!(c2.iota.mat, c.iota.mat);
            }
            _ => panic!("wrong kind"),
        }
    }
}
