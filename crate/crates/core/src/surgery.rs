//! The surgery mapping cone: Alexander-diagonal subquotients A_s, B_s,
//! B~_s of a knot complex, the flip equivalences, the truncated cone
//! X_n(K), its involutive refinement XI_2n(K), and the 2-handle
//! cobordism map J into BI_n(K).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complex::{ChainMap, FreeComplex, Generator, SparseMat};
use crate::error::{Error, Result};
use crate::homology::{homology, GradedHomology, HomologyBasis};
use crate::involutive::{cfi_cone_raw, infer_degree, IotaComplex};
use crate::knots::IotaKComplex;
use crate::ring::{Coefficient, Mode, Monomial};
use crate::solve::{find_homotopy_inverse, homotopy_solve, homotopy_to};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FlagKind {
    A,
    B,
    BTilde,
}

/// A flagged subquotient of the knot complex: for each generator x the
/// minimal ambient monomial u^i v^j x satisfying the region constraints,
/// with the induced F[U]-differential.
#[derive(Debug, Clone)]
pub struct FlaggedSubcomplex {
    pub kind: FlagKind,
    pub s: i32,
    /// per-generator ambient offsets (i_x, j_x), j_x = i_x - A(x)
    pub offsets: Vec<(i32, i32)>,
    pub complex: Arc<FreeComplex>,
}

/// Alexander grading of a knot generator as a plain integer.
fn alexander_int(k: &IotaKComplex, gen: usize) -> Result<i32> {
    let a2 = k.base.gens[gen].gr[2];
    if a2 % 2 != 0 {
        return Err(Error::grading(format!(
            "generator {} has non-integral Alexander grading",
            k.base.gens[gen].name
        )));
    }
    Ok(a2 / 2)
}

pub fn extract_flagged(k: &IotaKComplex, kind: FlagKind, s: i32) -> Result<FlaggedSubcomplex> {
    if k.base.mode != Mode::Uv(1) {
        return Err(Error::invalid(
            "flagged extraction needs a single-component knot complex",
        ));
    }
    let n = k.base.rank();
    let mut offsets = Vec::with_capacity(n);
    let mut gens = Vec::with_capacity(n);
    for g in 0..n {
        let a = alexander_int(k, g)?;
        let i = match kind {
            FlagKind::A => 0.max(a - s),
            FlagKind::B => 0,
            FlagKind::BTilde => a - s,
        };
        let j = i - a;
        offsets.push((i, j));
        // Maslov of u^i v^j x on the diagonal: gr_u - 2i = gr_v - 2j.
        let m2 = k.base.gens[g].gr[0] - 4 * i;
        debug_assert_eq!(m2, k.base.gens[g].gr[1] - 4 * j);
        gens.push(Generator::new(k.base.gens[g].name.clone(), vec![m2]));
    }
    let mut d = SparseMat::zero(n, n);
    for (&(r, c), v) in k.base.d.iter() {
        let mut out = Coefficient::zero(Mode::U);
        for m in v.terms() {
            let (a, b) = m.uv[0];
            let cu = offsets[c].0 + a as i32 - offsets[r].0;
            let cv = offsets[c].1 + b as i32 - offsets[r].1;
            debug_assert_eq!(cu, cv, "differential does not preserve the diagonal");
            if cu < 0 {
                return Err(Error::grading(format!(
                    "induced exponent {} in entry {} -> {} of {:?}_{} is negative",
                    cu, k.base.gens[c].name, k.base.gens[r].name, kind, s
                )));
            }
            out.toggle(Monomial::u_pow(Mode::U, cu as u32));
        }
        if !out.is_zero() {
            d.set(r, c, out);
        }
    }
    let complex = Arc::new(FreeComplex::new(Mode::U, gens, d)?);
    debug_assert!(complex.is_valid());
    Ok(FlaggedSubcomplex {
        kind,
        s,
        offsets,
        complex,
    })
}

/// The canonical inclusion A_s -> B_s or A_s -> B~_s as a diagonal
/// matrix of U-powers.
pub fn inclusion(src: &FlaggedSubcomplex, dst: &FlaggedSubcomplex) -> Result<SparseMat> {
    let n = src.complex.rank();
    if dst.complex.rank() != n {
        return Err(Error::shape("flagged inclusion rank"));
    }
    let mut m = SparseMat::zero(n, n);
    for g in 0..n {
        let p = src.offsets[g].0 - dst.offsets[g].0;
        if p < 0 {
            return Err(Error::grading(format!(
                "inclusion exponent negative at generator {}",
                src.complex.gens[g].name
            )));
        }
        m.set(g, g, Coefficient::u_pow(Mode::U, p as u32));
    }
    Ok(m)
}

/// The flagged rendering of ambient U^t o (skew conjugation by iota_K)
/// from one flagged complex to another. Errors if the image leaves the
/// target region (negative induced exponents), which signals inconsistent
/// input data.
pub fn conjugate_through(
    src: &FlaggedSubcomplex,
    dst: &FlaggedSubcomplex,
    iota_k: &ChainMap,
    t: i32,
) -> Result<SparseMat> {
    let n = src.complex.rank();
    let mut out = SparseMat::zero(n, n);
    for (&(r, c), v) in iota_k.mat.iter() {
        let mut acc = Coefficient::zero(Mode::U);
        for m in v.terms() {
            let (p, q) = m.uv[0];
            // u^i v^j x |-> U^t u^(j+p) v^(i+q) z
            let cu = src.offsets[c].1 + p as i32 + t - dst.offsets[r].0;
            let cv = src.offsets[c].0 + q as i32 + t - dst.offsets[r].1;
            debug_assert_eq!(cu, cv, "skew image leaves the diagonal");
            if cu < 0 {
                return Err(Error::grading(format!(
                    "conjugated entry {} -> {} has negative exponent {} ({:?}_{} -> {:?}_{}, twist {})",
                    src.complex.gens[c].name,
                    dst.complex.gens[r].name,
                    cu,
                    src.kind,
                    src.s,
                    dst.kind,
                    dst.s,
                    t
                )));
            }
            acc.toggle(Monomial::u_pow(Mode::U, cu as u32));
        }
        if !acc.is_zero() {
            out.add_to(r, c, &acc)?;
        }
    }
    Ok(out)
}

/// Homotopy-equivalence data of a flip map.
#[derive(Debug, Clone)]
pub struct Flip {
    pub s: i32,
    pub map: ChainMap,
}

/// Tower anchor of a flagged complex; errors when the homology is not a
/// single free tower (the flip construction needs honest knot data).
fn single_tower(basis: &HomologyBasis) -> Result<&crate::homology::HClass> {
    if basis.towers.len() != 1 || !basis.torsion.is_empty() {
        return Err(Error::Unsolvable(format!(
            "no homotopy equivalence: homology has {} towers and {} torsion summands",
            basis.towers.len(),
            basis.torsion.len()
        )));
    }
    Ok(&basis.towers[0])
}

/// A homotopy equivalence between two flagged complexes, built from the
/// Smith reductions on both sides: project to the source tower, include
/// the target tower. Validated by a joint homotopy-inverse certificate.
pub fn flip_between(src: &Arc<FreeComplex>, dst: &Arc<FreeComplex>) -> Result<ChainMap> {
    if src.rank() == 0 && dst.rank() == 0 {
        return ChainMap::new(
            Arc::clone(src),
            Arc::clone(dst),
            vec![0],
            false,
            SparseMat::zero(0, 0),
        );
    }
    let hs = homology(src)?;
    let hd = homology(dst)?;
    let ts = single_tower(&hs)?;
    let td = single_tower(&hd)?;
    let functional = hs.class_coordinate_row(ts.slot);
    let mut mat = SparseMat::zero(dst.rank(), src.rank());
    for (r, rep) in td.rep.iter().enumerate() {
        if rep.is_zero() {
            continue;
        }
        for (c, f) in functional.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            mat.add_to(r, c, &rep.mul(f)?)?;
        }
    }
    let deg = vec![td.gr - ts.gr];
    let map = ChainMap::new(Arc::clone(src), Arc::clone(dst), deg, false, mat)?;
    if !map.is_chain_map() || !map.is_homogeneous() {
        return Err(Error::invalid(
            "constructed flip is not a homogeneous chain map",
        ));
    }
    if find_homotopy_inverse(&map)?.is_none() {
        return Err(Error::Unsolvable(
            "constructed flip has no homotopy inverse".into(),
        ));
    }
    Ok(map)
}

/// The flip F_m: B~_s -> B_(s+m). A supplied candidate matrix is
/// validated (chain map, homogeneous, homotopy invertible) and used
/// instead of the built one.
pub fn build_flip(
    k: &IotaKComplex,
    m: i32,
    s: i32,
    supplied: Option<&SparseMat>,
) -> Result<Flip> {
    let bt = extract_flagged(k, FlagKind::BTilde, s)?;
    let b = extract_flagged(k, FlagKind::B, s + m)?;
    let map = match supplied {
        None => flip_between(&bt.complex, &b.complex)?,
        Some(mat) => {
            let deg = infer_degree(mat, &bt.complex, &b.complex)
                .ok_or_else(|| Error::invalid("supplied flip is zero"))?;
            let cand = ChainMap::new(
                Arc::clone(&bt.complex),
                Arc::clone(&b.complex),
                deg,
                false,
                mat.clone(),
            )?;
            if !cand.is_chain_map() || !cand.is_homogeneous() {
                return Err(Error::invalid(
                    "supplied flip is not a homogeneous chain map",
                ));
            }
            if find_homotopy_inverse(&cand)?.is_none() {
                return Err(Error::invalid(
                    "supplied flip fails the homotopy equivalence check",
                ));
            }
            cand
        }
    };
    Ok(Flip { s, map })
}

/// One cell of the assembled cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub kind: FlagKind,
    pub s: i32,
    pub start: usize,
    pub len: usize,
    /// doubled grading offset added to the internal Maslov grading
    pub sigma: i32,
}

/// The truncated surgery cone, with the involutive layer when built by
/// [`build_involutive_cone`].
pub struct SurgeryCone {
    pub framing: i32,
    pub b: i32,
    pub cells: Vec<Cell>,
    pub total: Arc<FreeComplex>,
    /// The involution iota_X on the total complex (involutive mode only).
    pub iota_x: Option<ChainMap>,
    /// The F[U,Q]/Q^2 involutive cone (involutive mode only).
    pub uq_total: Option<Arc<FreeComplex>>,
    /// Solver certificates: the H maps keyed by s.
    pub h_maps: BTreeMap<i32, ChainMap>,
    /// Homotopy witnessing iota_X^2 ~ id (involutive mode only).
    pub iota_sq_homotopy: Option<ChainMap>,
    pub flips: BTreeMap<i32, Flip>,
}

impl SurgeryCone {
    pub fn cell(&self, kind: FlagKind, s: i32) -> Option<&Cell> {
        self.cells.iter().find(|c| c.kind == kind && c.s == s)
    }

    /// Spin^c sector of a cell index: s mod |framing|, normalized.
    pub fn sector_of(&self, s: i32) -> i32 {
        let m = self.framing.abs();
        ((s % m) + m) % m
    }

    /// Restrict the total complex to the sectors {c, -c}: the conjugation
    /// pair. Returns the restricted complex and the restriction of
    /// iota_X when present.
    pub fn restrict_sector_pair(&self, c: i32) -> Result<(Arc<FreeComplex>, Option<SparseMat>)> {
        let m = self.framing.abs();
        let c = ((c % m) + m) % m;
        let cbar = (m - c) % m;
        let keep: Vec<&Cell> = self
            .cells
            .iter()
            .filter(|cell| {
                let s = self.sector_of(cell.s);
                s == c || s == cbar
            })
            .collect();
        let mut index_map: BTreeMap<usize, usize> = BTreeMap::new();
        let mut gens = Vec::new();
        for cell in &keep {
            for i in 0..cell.len {
                index_map.insert(cell.start + i, gens.len());
                gens.push(self.total.gens[cell.start + i].clone());
            }
        }
        let mut d = SparseMat::zero(gens.len(), gens.len());
        for (&(r, col), v) in self.total.d.iter() {
            if let (Some(&r2), Some(&c2)) = (index_map.get(&r), index_map.get(&col)) {
                d.set(r2, c2, v.clone());
            }
        }
        let restricted = Arc::new(FreeComplex::new(Mode::U, gens, d)?);
        let iota = match &self.iota_x {
            None => None,
            Some(ix) => {
                let mut m2 = SparseMat::zero(restricted.rank(), restricted.rank());
                for (&(r, col), v) in ix.mat.iter() {
                    match (index_map.get(&r), index_map.get(&col)) {
                        (Some(&r2), Some(&c2)) => m2.set(r2, c2, v.clone()),
                        (None, None) => {}
                        _ => {
                            return Err(Error::invalid(
                                "iota_X does not preserve the sector pair",
                            ))
                        }
                    }
                }
                Some(m2)
            }
        };
        Ok((restricted, iota))
    }

    /// The sector-pair piece as an iota-complex candidate (validated by
    /// the caller).
    pub fn sector_iota_complex(&self, c: i32) -> Result<IotaComplex> {
        let (restricted, iota) = self.restrict_sector_pair(c)?;
        let iota = iota.ok_or_else(|| Error::invalid("cone has no involutive layer"))?;
        let map = ChainMap::new(
            Arc::clone(&restricted),
            Arc::clone(&restricted),
            vec![0],
            false,
            iota,
        )?;
        IotaComplex::new(restricted, map)
    }

    /// Homology summary per sector of the plain cone.
    pub fn sector_homology(&self) -> Result<BTreeMap<i32, GradedHomology>> {
        let m = self.framing.abs();
        let mut out = BTreeMap::new();
        for c in 0..m {
            let keep: Vec<&Cell> = self
                .cells
                .iter()
                .filter(|cell| self.sector_of(cell.s) == c)
                .collect();
            let mut index_map: BTreeMap<usize, usize> = BTreeMap::new();
            let mut gens = Vec::new();
            for cell in &keep {
                for i in 0..cell.len {
                    index_map.insert(cell.start + i, gens.len());
                    gens.push(self.total.gens[cell.start + i].clone());
                }
            }
            let mut d = SparseMat::zero(gens.len(), gens.len());
            for (&(r, col), v) in self.total.d.iter() {
                if let (Some(&r2), Some(&c2)) = (index_map.get(&r), index_map.get(&col)) {
                    d.set(r2, c2, v.clone());
                }
            }
            let restricted = Arc::new(FreeComplex::new(Mode::U, gens, d)?);
            out.insert(c, homology(&restricted)?.summary());
        }
        Ok(out)
    }
}

pub fn max_alexander(k: &IotaKComplex) -> Result<i32> {
    let mut g = 0;
    for i in 0..k.base.rank() {
        g = g.max(alexander_int(k, i)?.abs());
    }
    Ok(g)
}

pub fn default_truncation(k: &IotaKComplex, n: i32) -> Result<i32> {
    Ok(max_alexander(k)? + n.abs() + 1)
}

struct ConeSkeleton {
    a_cells: BTreeMap<i32, FlaggedSubcomplex>,
    b_cells: BTreeMap<i32, FlaggedSubcomplex>,
    bt_cells: BTreeMap<i32, FlaggedSubcomplex>,
    flips: BTreeMap<i32, Flip>,
    sigma_a: BTreeMap<i32, i32>,
    b_range: (i32, i32),
}

/// Flip degree e_s (doubled) between the internal gradings of B~_s and
/// B_(s+m), read off the tower anchors.
fn flip_degree(bt: &FlaggedSubcomplex, b: &FlaggedSubcomplex) -> Result<i32> {
    let hs = homology(&bt.complex)?;
    let hd = homology(&b.complex)?;
    Ok(single_tower(&hd)?.gr - single_tower(&hs)?.gr)
}

fn build_skeleton(
    k: &IotaKComplex,
    n: i32,
    b: i32,
    flip_source: &BTreeMap<i32, SparseMat>,
) -> Result<ConeSkeleton> {
    if n == 0 {
        return Err(Error::invalid("framing zero is not supported"));
    }
    let g = max_alexander(k)?;
    if b < g + 1 {
        return Err(Error::invalid(format!(
            "truncation b = {b} below max |A| + 1 = {}",
            g + 1
        )));
    }
    let b_lo = -b + n;
    let b_hi = b;
    if b_lo > b_hi {
        return Err(Error::invalid(format!(
            "truncation b = {b} too small for framing {n}"
        )));
    }
    let mut a_cells = BTreeMap::new();
    let mut bt_cells = BTreeMap::new();
    for s in -b..=b {
        a_cells.insert(s, extract_flagged(k, FlagKind::A, s)?);
    }
    let mut b_cells = BTreeMap::new();
    for s in b_lo..=b_hi {
        b_cells.insert(s, extract_flagged(k, FlagKind::B, s)?);
    }
    // flips where a chain s -> s+n stays inside the A-range, plus the
    // h-map range; for the involutive layer the caller extends this.
    let mut flips = BTreeMap::new();
    for s in -b..=b {
        if s + n < b_lo || s + n > b_hi {
            continue;
        }
        bt_cells
            .entry(s)
            .or_insert(extract_flagged(k, FlagKind::BTilde, s)?);
        let flip = build_flip(k, n, s, flip_source.get(&s))?;
        flips.insert(s, flip);
    }
    // sigma anchors per mod-|n| class, representative of minimal |s|.
    // The anchors must cover the B-range too, which sticks out below the
    // A-range for negative framings; propagate over the union.
    let lo = (-b).min(b_lo);
    let hi = b.max(b_hi);
    let m = n.abs();
    let mut sigma_a: BTreeMap<i32, i32> = BTreeMap::new();
    for class in 0..m {
        let members: Vec<i32> = (-b..=b)
            .filter(|s| ((s % m) + m) % m == class)
            .collect();
        let rep = *members
            .iter()
            .min_by_key(|&&s| (s.abs(), s < 0))
            .expect("class nonempty for b >= |n|");
        sigma_a.insert(rep, 0);
        // propagate along s -> s + n using e_s
        let mut cur = rep;
        while cur + n >= lo && cur + n <= hi {
            let e = chain_degree(k, n, cur, &flips)?;
            let v = sigma_a[&cur] - e;
            sigma_a.insert(cur + n, v);
            cur += n;
        }
        let mut cur = rep;
        while cur - n >= lo && cur - n <= hi {
            let e = chain_degree(k, n, cur - n, &flips)?;
            let v = sigma_a[&cur] + e;
            sigma_a.insert(cur - n, v);
            cur -= n;
        }
    }
    Ok(ConeSkeleton {
        a_cells,
        b_cells,
        bt_cells,
        flips,
        sigma_a,
        b_range: (b_lo, b_hi),
    })
}

/// e_s for the anchor recurrence, via the stored flip when present and
/// the tower anchors otherwise.
fn chain_degree(k: &IotaKComplex, n: i32, s: i32, flips: &BTreeMap<i32, Flip>) -> Result<i32> {
    if let Some(f) = flips.get(&s) {
        return Ok(f.map.deg[0]);
    }
    let bt = extract_flagged(k, FlagKind::BTilde, s)?;
    let b = extract_flagged(k, FlagKind::B, s + n)?;
    flip_degree(&bt, &b)
}

/// The plain truncated cone X_n(K).
pub fn build_cone(k: &IotaKComplex, n: i32, b: i32) -> Result<SurgeryCone> {
    build_cone_with_flips(k, n, b, &BTreeMap::new())
}

pub fn build_cone_with_flips(
    k: &IotaKComplex,
    n: i32,
    b: i32,
    flip_source: &BTreeMap<i32, SparseMat>,
) -> Result<SurgeryCone> {
    let sk = build_skeleton(k, n, b, flip_source)?;
    let (cells, total) = assemble_plain(&sk, n)?;
    Ok(SurgeryCone {
        framing: n,
        b,
        cells,
        total,
        iota_x: None,
        uq_total: None,
        h_maps: BTreeMap::new(),
        iota_sq_homotopy: None,
        flips: sk.flips,
    })
}

fn assemble_plain(sk: &ConeSkeleton, n: i32) -> Result<(Vec<Cell>, Arc<FreeComplex>)> {
    let mut cells = Vec::new();
    let mut gens: Vec<Generator> = Vec::new();
    for (&s, fc) in &sk.a_cells {
        let sigma = sk.sigma_a[&s];
        let start = gens.len();
        for g in &fc.complex.gens {
            gens.push(Generator::new(
                format!("A[{s}].{}", g.name),
                vec![g.gr[0] + sigma],
            ));
        }
        cells.push(Cell {
            kind: FlagKind::A,
            s,
            start,
            len: fc.complex.rank(),
            sigma,
        });
    }
    for (&s, fc) in &sk.b_cells {
        let sigma = sk.sigma_a[&s] - 2;
        let start = gens.len();
        for g in &fc.complex.gens {
            gens.push(Generator::new(
                format!("B[{s}].{}", g.name),
                vec![g.gr[0] + sigma],
            ));
        }
        cells.push(Cell {
            kind: FlagKind::B,
            s,
            start,
            len: fc.complex.rank(),
            sigma,
        });
    }
    let total_rank = gens.len();
    let mut d = SparseMat::zero(total_rank, total_rank);
    let cell_of = |kind: FlagKind, s: i32| cells.iter().find(|c| c.kind == kind && c.s == s);
    for (&s, fc) in &sk.a_cells {
        let a_cell = cell_of(FlagKind::A, s).unwrap();
        for (&(r, c), v) in fc.complex.d.iter() {
            d.add_to(a_cell.start + r, a_cell.start + c, v)?;
        }
        // v_s: A_s -> B_s
        if let Some(b_cell) = cell_of(FlagKind::B, s) {
            let incl = inclusion(fc, &sk.b_cells[&s])?;
            for (&(r, c), v) in incl.iter() {
                d.add_to(b_cell.start + r, a_cell.start + c, v)?;
            }
        }
        // h_s = flip o vtilde: A_s -> B_(s+n)
        if let Some(flip) = sk.flips.get(&s) {
            if let Some(b_cell) = cell_of(FlagKind::B, s + n) {
                let vt = inclusion(fc, &sk.bt_cells[&s])?;
                let h = flip.map.mat.compose(&vt, false)?;
                for (&(r, c), v) in h.iter() {
                    d.add_to(b_cell.start + r, a_cell.start + c, v)?;
                }
            }
        }
    }
    for (&s, fc) in &sk.b_cells {
        let b_cell = cell_of(FlagKind::B, s).unwrap();
        for (&(r, c), v) in fc.complex.d.iter() {
            d.add_to(b_cell.start + r, b_cell.start + c, v)?;
        }
    }
    let total = Arc::new(FreeComplex::new(Mode::U, gens, d)?);
    let rep = total.validate();
    if !rep.passed() {
        return Err(Error::invalid(format!(
            "assembled cone fails validation:\n{rep}"
        )));
    }
    Ok((cells, total))
}

/// The involutive cone XI_2n(K) for even framing 2n, n != 0: the plain
/// cone for framing 2n, the involution iota_X = iota_A + iota_B + H vt,
/// and the F[U,Q]/Q^2 total complex.
pub fn build_involutive_cone(k: &IotaKComplex, n: i32, b: i32) -> Result<SurgeryCone> {
    build_involutive_cone_with_flips(k, n, b, &BTreeMap::new())
}

/// The anchor recurrence fixes gradings within each mod-|m| class, but
/// the involution maps class c to class -c; for non-self-conjugate pairs
/// the second class must be re-anchored so the conjugation blocks are
/// grading preserving. The shift is read off one conjugation block.
fn link_conjugate_anchors(
    k: &IotaKComplex,
    m: i32,
    b: i32,
    sk: &mut ConeSkeleton,
) -> Result<()> {
    let ma = m.abs();
    for c in 1..ma {
        let cbar = (ma - c) % ma;
        if c >= cbar {
            continue;
        }
        let rep = *(-b..=b)
            .filter(|s| ((s % ma) + ma) % ma == c)
            .collect::<Vec<_>>()
            .iter()
            .min_by_key(|&&s| (s.abs(), s < 0))
            .expect("class nonempty");
        let src = &sk.a_cells[&rep];
        let dst = &sk.a_cells[&-rep];
        let block = conjugate_through(src, dst, &k.iota_k, rep)?;
        let Some((&(r, col), v)) = block.iter().next() else {
            continue;
        };
        let a = v.terms().next().expect("entry nonzero").uv[0].0 as i32;
        // degree-0 requirement: m2_dst + sigma(-rep) - 4a = m2_src + sigma(rep)
        let required = src.complex.gens[col].gr[0] + sk.sigma_a[&rep] + 4 * a
            - dst.complex.gens[r].gr[0];
        let delta = required - sk.sigma_a[&-rep];
        if delta != 0 {
            for (s, v) in sk.sigma_a.iter_mut() {
                if ((s % ma) + ma) % ma == cbar {
                    *v += delta;
                }
            }
        }
    }
    Ok(())
}

pub fn build_involutive_cone_with_flips(
    k: &IotaKComplex,
    n: i32,
    b: i32,
    flip_source: &BTreeMap<i32, SparseMat>,
) -> Result<SurgeryCone> {
    if n == 0 {
        return Err(Error::invalid("framing zero is not supported"));
    }
    let m = 2 * n;
    let krep = k.validate();
    if !krep.passed() {
        return Err(Error::invalid(format!("not an iota_K-complex:\n{krep}")));
    }
    let mut sk = build_skeleton(k, m, b, flip_source)?;
    // B~ cells and flips for every index the involutive layer touches.
    let (b_lo, b_hi) = sk.b_range;
    for w in b_lo..=b_hi {
        let s = -w;
        if let std::collections::btree_map::Entry::Vacant(e) = sk.bt_cells.entry(s) {
            e.insert(extract_flagged(k, FlagKind::BTilde, s)?);
        }
        if let std::collections::btree_map::Entry::Vacant(e) = sk.flips.entry(s) {
            e.insert(build_flip(k, m, s, flip_source.get(&s))?);
        }
    }
    for s in -b..=b {
        if -s < b_lo || -s > b_hi {
            continue;
        }
        if let std::collections::btree_map::Entry::Vacant(e) = sk.bt_cells.entry(s) {
            e.insert(extract_flagged(k, FlagKind::BTilde, s)?);
        }
    }
    link_conjugate_anchors(k, m, b, &mut sk)?;
    let (cells, total) = assemble_plain(&sk, m)?;

    // iota_A blocks.
    let mut iota_mat = SparseMat::zero(total.rank(), total.rank());
    let cell_of = |kind: FlagKind, s: i32| cells.iter().find(|c| c.kind == kind && c.s == s);
    for (&s, fc) in &sk.a_cells {
        let src = cell_of(FlagKind::A, s).unwrap();
        let dst = cell_of(FlagKind::A, -s).unwrap();
        let block = conjugate_through(fc, &sk.a_cells[&-s], &k.iota_k, s)?;
        for (&(r, c), v) in block.iter() {
            iota_mat.add_to(dst.start + r, src.start + c, v)?;
        }
    }
    // iota_B blocks: B_w -> B~_(-w) -> B_(m-w).
    for (&w, fc) in &sk.b_cells {
        let src = cell_of(FlagKind::B, w).unwrap();
        let dst = cell_of(FlagKind::B, m - w)
            .ok_or_else(|| Error::invalid(format!("B_{} missing for iota_B", m - w)))?;
        let kappa = conjugate_through(fc, &sk.bt_cells[&-w], &k.iota_k, w)?;
        let flip = &sk.flips[&-w];
        let block = flip.map.mat.compose(&kappa, false)?;
        for (&(r, c), v) in block.iter() {
            iota_mat.add_to(dst.start + r, src.start + c, v)?;
        }
    }
    // H_s: B~_s -> B_(-s) solving [d, H_s] = kappa_s + F kappa'_(s+m) F,
    // then the diagonal H_s o vtilde_s: A_s -> B_(-s).
    let mut h_maps = BTreeMap::new();
    for s in -b..=b {
        let Some(bdst) = cell_of(FlagKind::B, -s) else { continue };
        let bt_s = &sk.bt_cells[&s];
        let b_dst = &sk.b_cells[&-s];
        let kappa_s = conjugate_through(bt_s, b_dst, &k.iota_k, s)?;
        // F_m o kappa'_(s+m) o F_m
        let f1 = &sk.flips[&s];
        let b_mid = &sk.b_cells[&(s + m)];
        let bt_mid = &sk.bt_cells[&(-s - m)];
        let kappa_p = conjugate_through(b_mid, bt_mid, &k.iota_k, s + m)?;
        let f2 = &sk.flips[&(-s - m)];
        let second = f2.map.mat.compose(&kappa_p.compose(&f1.map.mat, false)?, false)?;
        let rhs_mat = kappa_s.add(&second)?;
        let h = solve_h(&bt_s.complex, &b_dst.complex, rhs_mat, s)?;
        // diagonal into the total involution
        let vt = inclusion(&sk.a_cells[&s], bt_s)?;
        let diag = h.compose(&vt, false)?;
        let src = cell_of(FlagKind::A, s).unwrap();
        for (&(r, c), v) in diag.iter() {
            iota_mat.add_to(bdst.start + r, src.start + c, v)?;
        }
        let h_map = ChainMap::new(
            Arc::clone(&bt_s.complex),
            Arc::clone(&b_dst.complex),
            infer_degree(&h, &bt_s.complex, &b_dst.complex).unwrap_or(vec![0]),
            false,
            h,
        )?;
        h_maps.insert(s, h_map);
    }

    let iota_x = ChainMap::new(Arc::clone(&total), Arc::clone(&total), vec![0], false, iota_mat)?;
    if !iota_x.is_homogeneous() {
        return Err(Error::invalid(
            "iota_X is not homogeneous for the anchor gradings",
        ));
    }
    if !iota_x.is_chain_map() {
        return Err(Error::invalid("iota_X is not a chain map"));
    }
    let sq = iota_x.compose(&iota_x)?;
    let Some(iota_sq_homotopy) = homotopy_solve(&sq, &ChainMap::identity(&total))? else {
        return Err(Error::Unsolvable(
            "iota_X^2 is not homotopic to the identity".into(),
        ));
    };
    let uq_total = Arc::new(cfi_cone_raw(&total, &iota_x.mat)?);
    let uqrep = uq_total.validate();
    if !uqrep.passed() {
        return Err(Error::invalid(format!(
            "involutive cone fails validation:\n{uqrep}"
        )));
    }
    Ok(SurgeryCone {
        framing: m,
        b,
        cells,
        total,
        iota_x: Some(iota_x),
        uq_total: Some(uq_total),
        h_maps,
        iota_sq_homotopy: Some(iota_sq_homotopy),
        flips: sk.flips,
    })
}

/// Solve the H-equation for one s; a zero right-hand side short-circuits
/// to the zero map.
fn solve_h(
    src: &Arc<FreeComplex>,
    dst: &Arc<FreeComplex>,
    rhs_mat: SparseMat,
    s: i32,
) -> Result<SparseMat> {
    if rhs_mat.is_zero() {
        return Ok(rhs_mat);
    }
    let deg = infer_degree(&rhs_mat, src, dst)
        .ok_or_else(|| Error::invalid("H equation right-hand side is malformed"))?;
    let rhs = ChainMap::new(Arc::clone(src), Arc::clone(dst), deg, false, rhs_mat)?;
    if !rhs.is_homogeneous() {
        return Err(Error::grading(format!(
            "H equation right-hand side at s = {s} is not homogeneous"
        )));
    }
    match homotopy_to(&rhs)? {
        Some(h) => Ok(h.mat),
        None => Err(Error::Unsolvable(format!(
            "H equation has no solution at s = {s}; iota_K or flip data is inconsistent"
        ))),
    }
}

/// The 2-handle cobordism map J = v_n P^A_n + Q P^B_n iota_X from the
/// involutive cone XI_2n into BI_n = Cone(Q(id + iota_B): B_n -> QB_n).
pub struct CobordismJ {
    pub map: ChainMap,
    pub bi: Arc<FreeComplex>,
    /// iota_B restricted to B_n, the involution of the target cone.
    pub iota_b_n: SparseMat,
}

pub fn cobordism_map_j(cone: &SurgeryCone) -> Result<CobordismJ> {
    let m = cone.framing;
    if m % 2 != 0 {
        return Err(Error::invalid(
            "the cobordism map needs the involutive cone of an even framing",
        ));
    }
    let n = m / 2;
    let uq = cone
        .uq_total
        .as_ref()
        .ok_or_else(|| Error::invalid("cone has no involutive layer"))?;
    let iota_x = cone.iota_x.as_ref().unwrap();
    let a_n = cone
        .cell(FlagKind::A, n)
        .ok_or_else(|| Error::invalid("A_n outside truncation"))?;
    let a_mn = cone
        .cell(FlagKind::A, -n)
        .ok_or_else(|| Error::invalid("A_-n outside truncation"))?;
    let b_n = cone
        .cell(FlagKind::B, n)
        .ok_or_else(|| Error::invalid("B_n outside truncation"))?;

    // Standalone B_n with the cone's gradings.
    let gens: Vec<Generator> = (0..b_n.len)
        .map(|i| {
            let g = &cone.total.gens[b_n.start + i];
            Generator::new(g.name.replace(&format!("B[{n}]."), ""), g.gr.clone())
        })
        .collect();
    let mut d = SparseMat::zero(b_n.len, b_n.len);
    for (&(r, c), v) in cone.total.d.iter() {
        if r >= b_n.start && r < b_n.start + b_n.len && c >= b_n.start && c < b_n.start + b_n.len {
            d.set(r - b_n.start, c - b_n.start, v.clone());
        }
    }
    let b_complex = Arc::new(FreeComplex::new(Mode::U, gens, d)?);
    let mut iota_b_n = SparseMat::zero(b_n.len, b_n.len);
    for (&(r, c), v) in iota_x.mat.iter() {
        if r >= b_n.start && r < b_n.start + b_n.len && c >= b_n.start && c < b_n.start + b_n.len {
            iota_b_n.set(r - b_n.start, c - b_n.start, v.clone());
        }
    }
    let bi = Arc::new(cfi_cone_raw(&b_complex, &iota_b_n)?);

    let q = Coefficient::q(Mode::UQ);
    let mut mat = SparseMat::zero(bi.rank(), uq.rank());
    // v_n on the A_n columns (both Q-levels, which the UQ encoding
    // carries implicitly).
    for i in 0..a_n.len {
        let src_gr = cone.total.gens[a_n.start + i].gr[0];
        let dst_gr = cone.total.gens[b_n.start + i].gr[0];
        let p = (dst_gr - src_gr + 2) / 4;
        if p < 0 {
            return Err(Error::grading("v_n exponent negative"));
        }
        mat.add_to(i, a_n.start + i, &Coefficient::u_pow(Mode::UQ, p as u32))?;
    }
    // Q * (components of iota_X into B_n): from A_(-n) via the diagonal
    // and from B_n via iota_B.
    for (&(r, c), v) in iota_x.mat.iter() {
        if r < b_n.start || r >= b_n.start + b_n.len {
            continue;
        }
        let from_a = c >= a_mn.start && c < a_mn.start + a_mn.len;
        let from_b = c >= b_n.start && c < b_n.start + b_n.len;
        if from_a || from_b {
            mat.add_to(r - b_n.start, c, &q.mul(&v.with_mode(Mode::UQ)?)?)?;
        }
    }
    let map = ChainMap::new(Arc::clone(uq), Arc::clone(&bi), vec![-2], false, mat)?;
    let lhs = bi.d.compose(&map.mat, false)?;
    let rhs = map.mat.compose(&uq.d, false)?;
    if lhs.add(&rhs)?.is_zero() {
        Ok(CobordismJ {
            map,
            bi,
            iota_b_n,
        })
    } else {
        Err(Error::invalid(
            "J does not commute with the differentials",
        ))
    }
}

/// The matrix of J on the homology tower classes of the expansions:
/// rows indexed by target towers, columns by source towers.
pub fn induced_on_towers(
    j: &CobordismJ,
    src: &crate::involutive::CfiHomology,
    tgt: &crate::involutive::CfiHomology,
) -> Result<Vec<Vec<Coefficient>>> {
    let n_src = j.map.source.rank();
    let n_tgt = j.bi.rank();
    let mut out =
        vec![vec![Coefficient::zero(Mode::U); src.basis.towers.len()]; tgt.basis.towers.len()];
    for (si, cls) in src.basis.towers.iter().enumerate() {
        // expansion vector -> F[U,Q]/Q^2 vector: level 1 entries carry Q
        let mut v = vec![Coefficient::zero(Mode::UQ); n_src];
        for (i, c) in cls.rep.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let lifted = c.with_mode(Mode::UQ)?;
            if i < n_src {
                v[i] = v[i].add(&lifted)?;
            } else {
                v[i - n_src] = v[i - n_src].add(&Coefficient::q(Mode::UQ).mul(&lifted)?)?;
            }
        }
        let jv = j.map.mat.apply(&v, false)?;
        let mut w = vec![Coefficient::zero(Mode::U); 2 * n_tgt];
        for (i, c) in jv.iter().enumerate() {
            for m in c.terms() {
                let plain = Coefficient::from_monomial(
                    Mode::U,
                    Monomial {
                        uv: m.uv.clone(),
                        q: false,
                    },
                );
                if m.q {
                    w[n_tgt + i] = w[n_tgt + i].add(&plain)?;
                } else {
                    w[i] = w[i].add(&plain)?;
                }
            }
        }
        let (_torsion, towers) = tgt.basis.express(&w)?;
        for (ti, c) in towers.into_iter().enumerate() {
            out[ti][si] = c;
        }
    }
    Ok(out)
}

/// Regression-friendly summary of the homology of X_n restricted to each
/// sector, with the stability check at b + 1.
pub fn cone_homology_with_stability(
    k: &IotaKComplex,
    n: i32,
    b: i32,
) -> Result<(BTreeMap<i32, GradedHomology>, bool)> {
    let cone = build_cone(k, n, b)?;
    let h = cone.sector_homology()?;
    let cone2 = build_cone(k, n, b + 1)?;
    let h2 = cone2.sector_homology()?;
    Ok((h.clone(), h == h2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn unknot_flagged_pieces() {
        let k = fixtures::unknot();
        for s in -2..=2 {
            let a = extract_flagged(&k, FlagKind::A, s).unwrap();
            assert_eq!(a.offsets[0].0, 0.max(-s));
            let b = extract_flagged(&k, FlagKind::B, s).unwrap();
            let v = inclusion(&a, &b).unwrap();
            let expect = 0.max(0 - s).max(0) as u32;
            assert_eq!(
                v.get(0, 0).unwrap(),
                &Coefficient::u_pow(Mode::U, expect)
            );
            let bt = extract_flagged(&k, FlagKind::BTilde, s).unwrap();
            let vt = inclusion(&a, &bt).unwrap();
            assert_eq!(
                vt.get(0, 0).unwrap(),
                &Coefficient::u_pow(Mode::U, 0.max(s) as u32)
            );
        }
    }

    #[test]
    fn b_cells_do_not_depend_on_s() {
        let k = fixtures::trefoil();
        let b0 = extract_flagged(&k, FlagKind::B, 0).unwrap();
        let b5 = extract_flagged(&k, FlagKind::B, 5).unwrap();
        assert_eq!(b0.offsets, b5.offsets);
        assert_eq!(b0.complex.d, b5.complex.d);
    }

    #[test]
    fn trefoil_a0_matches_the_constraint_oracle() {
        // oracle: minimal (i, j) with A(x) + j - i = 0, i >= 0, j >= 0
        let k = fixtures::trefoil();
        let a0 = extract_flagged(&k, FlagKind::A, 0).unwrap();
        let names: Vec<&str> = a0.complex.gens.iter().map(|g| g.name.as_str()).collect();
        let expect: Vec<(i32, i32)> = names
            .iter()
            .map(|n| {
                let g = k.base.gen_index(n).unwrap();
                let a = k.base.gens[g].gr[2] / 2;
                let mut best = None;
                for i in 0..10i32 {
                    let j = i - a;
                    if i >= 0 && j >= 0 {
                        best = Some((i, j));
                        break;
                    }
                }
                best.unwrap()
            })
            .collect();
        assert_eq!(a0.offsets, expect);
        // induced differential: d b = a + c with no U factor
        let b = a0.complex.gen_index("b").unwrap();
        let a = a0.complex.gen_index("a").unwrap();
        let c = a0.complex.gen_index("c").unwrap();
        assert!(a0.complex.d.get(a, b).unwrap().is_one());
        assert!(a0.complex.d.get(c, b).unwrap().is_one());
    }

    #[test]
    fn unknot_cone_tower_counts_follow_the_framing() {
        let k = fixtures::unknot();
        for f in 1..=4 {
            let b = default_truncation(&k, f).unwrap();
            let cone = build_cone(&k, f, b).unwrap();
            let h = homology(&cone.total).unwrap().summary();
            assert_eq!(h.towers.len() as i32, f, "framing {f}");
            assert!(h.torsion.is_empty());
        }
    }

    #[test]
    fn unknot_cone_is_stable_under_truncation_growth() {
        let k = fixtures::unknot();
        let b = default_truncation(&k, 2).unwrap();
        let (_, stable) = cone_homology_with_stability(&k, 2, b).unwrap();
        assert!(stable);
    }

    #[test]
    fn trefoil_cone_framing_two() {
        let k = fixtures::trefoil();
        let b = default_truncation(&k, 2).unwrap();
        let cone = build_cone(&k, 2, b).unwrap();
        let h = cone.sector_homology().unwrap();
        // regression: +2 surgery on the right-handed trefoil has one
        // tower per sector; torsion profile frozen after the first run
        assert_eq!(h.len(), 2);
        for (_, s) in &h {
            assert_eq!(s.towers.len(), 1);
        }
    }

    #[test]
    fn involutive_unknot_cone() {
        let k = fixtures::unknot();
        let b = default_truncation(&k, 1).unwrap();
        let cone = build_involutive_cone(&k, 1, b).unwrap();
        assert!(cone.h_maps.values().all(|h| h.is_zero()));
        assert!(cone.iota_sq_homotopy.as_ref().unwrap().is_zero());
        let uq = cone.uq_total.as_ref().unwrap();
        let ch = crate::involutive::cfi_homology(uq).unwrap();
        assert_eq!(ch.basis.summary().towers.len(), 4);
        assert_eq!(ch.towers_per_level(), (2, 2));
    }

    #[test]
    fn involutive_trefoil_cone_and_j_map() {
        let k = fixtures::trefoil();
        let b = default_truncation(&k, 1).unwrap();
        let cone = build_involutive_cone(&k, 1, b).unwrap();
        let j = cobordism_map_j(&cone).unwrap();
        assert!(!j.map.is_zero());
    }

    #[test]
    fn flip_on_the_unknot_is_the_identity() {
        let k = fixtures::unknot();
        for s in -2..=2 {
            let f = build_flip(&k, 2, s, None).unwrap();
            assert_eq!(f.map.mat, SparseMat::identity(1, Mode::U));
        }
    }

    #[test]
    fn bad_supplied_flips_are_rejected() {
        let k = fixtures::unknot();
        // multiplication by U is a chain map but not an equivalence
        let mut by_u = SparseMat::zero(1, 1);
        by_u.set(0, 0, Coefficient::u_pow(Mode::U, 1));
        assert!(build_flip(&k, 2, 0, Some(&by_u)).is_err());
        let zero = SparseMat::zero(1, 1);
        assert!(build_flip(&k, 2, 0, Some(&zero)).is_err());
    }

    #[test]
    fn trefoil_surgery_profiles_are_frozen() {
        // regression fixtures: +2 is a lens-space-like surgery with one
        // tower per sector, -2 has one extra U-torsion class
        let k = fixtures::trefoil();
        let b = default_truncation(&k, 2).unwrap();
        let plus = build_cone(&k, 2, b).unwrap().sector_homology().unwrap();
        assert_eq!(plus[&0].towers, vec![-4]);
        assert_eq!(plus[&1].towers, vec![0]);
        assert!(plus[&0].torsion.is_empty() && plus[&1].torsion.is_empty());
        let minus = build_cone(&k, -2, b).unwrap().sector_homology().unwrap();
        assert_eq!(minus[&0].towers, vec![-2]);
        assert_eq!(minus[&0].torsion, vec![(-2, 1)]);
        assert_eq!(minus[&1].towers, vec![2]);
        assert!(minus[&1].torsion.is_empty());
    }

    #[test]
    fn j_map_tower_profiles_are_frozen() {
        for (k, expect) in [
            (
                fixtures::unknot(),
                vec![vec!["1", "0", "0", "0"], vec!["0", "0", "1", "0"]],
            ),
            (
                fixtures::trefoil(),
                vec![vec!["0", "0", "1", "0"], vec!["0", "0", "0", "1"]],
            ),
        ] {
            let b = default_truncation(&k, 2).unwrap();
            let cone = build_involutive_cone(&k, 1, b).unwrap();
            let j = cobordism_map_j(&cone).unwrap();
            let src = crate::involutive::cfi_homology(cone.uq_total.as_ref().unwrap()).unwrap();
            let tgt = crate::involutive::cfi_homology(&j.bi).unwrap();
            let profile = induced_on_towers(&j, &src, &tgt).unwrap();
            let rendered: Vec<Vec<String>> = profile
                .iter()
                .map(|row| row.iter().map(|c| c.render()).collect())
                .collect();
            let expect: Vec<Vec<String>> = expect
                .iter()
                .map(|row| row.iter().map(|s| s.to_string()).collect())
                .collect();
            assert_eq!(rendered, expect);
            // J hits every tower of the target: surjective on towers
            for (ti, row) in profile.iter().enumerate() {
                assert!(row.iter().any(|c| c.is_one()), "target tower {ti} missed");
            }
        }
    }

    #[test]
    fn involutive_cones_with_paired_sectors_assemble() {
        // framing 4 has the conjugate sector pair {1, 3}, which needs the
        // anchors of the two classes linked through the involution
        for k in [fixtures::trefoil(), fixtures::figure_eight()] {
            let b = default_truncation(&k, 4).unwrap();
            let cone = build_involutive_cone(&k, 2, b).unwrap();
            assert!(cone.iota_x.as_ref().unwrap().is_homogeneous());
            let j = cobordism_map_j(&cone).unwrap();
            assert!(!j.map.is_zero());
            for c in [0, 2] {
                let (pair, iota) = cone.restrict_sector_pair(c).unwrap();
                let sector = crate::involutive::cfi_cone_raw(&pair, &iota.unwrap()).unwrap();
                let h = crate::involutive::cfi_homology(&sector).unwrap();
                assert_eq!(h.towers_per_level(), (1, 1), "sector [{c}]");
            }
        }
    }

    #[test]
    fn odd_framing_is_rejected_for_the_involutive_cone() {
        let k = fixtures::unknot();
        // framing m = 2n is forced by the signature; the CLI layer
        // rejects odd framings before calling in. Internally n = 0 fails.
        assert!(build_involutive_cone(&k, 0, 3).is_err());
    }
}
