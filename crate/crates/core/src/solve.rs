//! Homotopy and chain-map equations reduced to F2 linear algebra.
//!
//! Grading homogeneity pins every unknown matrix entry to a finite set of
//! admissible monomials (usually one), so equations like d h + h d = f + g
//! become F2-linear systems in the monomial coefficients. The solver picks
//! the lexicographically-first pivot solution (free variables zero), which
//! keeps every produced certificate reproducible.

// indexed loops mirror the matrix algebra throughout this module
#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::complex::{ChainMap, FreeComplex, SparseMat};
use crate::error::{Error, Result};
use crate::grading::{admissible_monomials, diff_degree, gr_neg, gr_skew, gr_sub, Gr};
use crate::ring::{Coefficient, Monomial};

#[derive(Debug, Clone)]
pub struct MapShape {
    pub source: Arc<FreeComplex>,
    pub target: Arc<FreeComplex>,
    pub deg: Gr,
    pub skew: bool,
}

impl MapShape {
    pub fn of(m: &ChainMap) -> Self {
        MapShape {
            source: Arc::clone(&m.source),
            target: Arc::clone(&m.target),
            deg: m.deg.clone(),
            skew: m.skew,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(usize);

/// One term of a linear map equation: left o (var) o right, with optional
/// u/v conjugation applied to the variable's monomials or the right
/// factor's entries (the skew composition rule).
pub struct Term<'a> {
    pub var: VarId,
    pub left: Option<&'a SparseMat>,
    pub right: Option<&'a SparseMat>,
    pub conj_var: bool,
    pub conj_right: bool,
}

impl<'a> Term<'a> {
    pub fn plain(var: VarId) -> Self {
        Term {
            var,
            left: None,
            right: None,
            conj_var: false,
            conj_right: false,
        }
    }
    pub fn left(var: VarId, l: &'a SparseMat) -> Self {
        Term {
            var,
            left: Some(l),
            right: None,
            conj_var: false,
            conj_right: false,
        }
    }
    pub fn right(var: VarId, r: &'a SparseMat, conj_right: bool) -> Self {
        Term {
            var,
            left: None,
            right: Some(r),
            conj_var: false,
            conj_right,
        }
    }
}

type EqKey = (u32, usize, usize, Monomial);

/// A system of F2-linear equations whose unknowns are chain-map matrices
/// with grading-forced monomial entries.
pub struct MapSystem {
    vars: Vec<MapShape>,
    slots: Vec<(usize, usize, usize, Monomial)>,
    slot_index: HashMap<(usize, usize, usize, Monomial), usize>,
    rows: BTreeMap<EqKey, (Vec<u64>, bool)>,
    sealed: bool,
}

impl MapSystem {
    pub fn new() -> Self {
        MapSystem {
            vars: Vec::new(),
            slots: Vec::new(),
            slot_index: HashMap::new(),
            rows: BTreeMap::new(),
            sealed: false,
        }
    }

    pub fn add_unknown(&mut self, shape: MapShape) -> VarId {
        assert!(!self.sealed, "unknowns must be declared before equations");
        let vid = self.vars.len();
        let mode = shape.source.mode;
        for c in 0..shape.source.rank() {
            let src_gr = if shape.skew {
                gr_skew(mode, &shape.source.gens[c].gr)
            } else {
                shape.source.gens[c].gr.clone()
            };
            for r in 0..shape.target.rank() {
                for m in admissible_monomials(mode, &src_gr, &shape.target.gens[r].gr, &shape.deg)
                {
                    let key = (vid, r, c, m.clone());
                    self.slot_index.insert(key, self.slots.len());
                    self.slots.push((vid, r, c, m));
                }
            }
        }
        self.vars.push(shape);
        VarId(vid)
    }

    fn words(&self) -> usize {
        self.slots.len().div_ceil(64)
    }

    fn row_mut(&mut self, key: EqKey) -> &mut (Vec<u64>, bool) {
        let w = self.words();
        self.rows.entry(key).or_insert_with(|| (vec![0u64; w], false))
    }

    fn toggle_slot(&mut self, key: EqKey, slot: usize) {
        let row = self.row_mut(key);
        row.0[slot / 64] ^= 1u64 << (slot % 64);
    }

    /// Add the equation  sum(terms) = rhs  as a family of F2 equations,
    /// one per (row, col, monomial) of the resulting matrix.
    pub fn equation(&mut self, group: u32, terms: &[Term<'_>], rhs: Option<&SparseMat>) {
        self.sealed = true;
        for t in terms {
            let shape = self.vars[t.var.0].clone();
            let nslots = self.slots.len();
            for slot in 0..nslots {
                let (vid, r, c, ref m) = self.slots[slot];
                if vid != t.var.0 {
                    continue;
                }
                let m = if t.conj_var { m.conj() } else { m.clone() };
                // Left factor rows hitting var's target row r.
                let lefts: Vec<(usize, Coefficient)> = match t.left {
                    None => vec![(r, Coefficient::one(shape.source.mode))],
                    Some(l) => l
                        .iter()
                        .filter(|(&(_, k), _)| k == r)
                        .map(|(&(rr, _), v)| (rr, v.clone()))
                        .collect(),
                };
                let rights: Vec<(usize, Coefficient)> = match t.right {
                    None => vec![(c, Coefficient::one(shape.source.mode))],
                    Some(rm) => rm
                        .iter()
                        .filter(|(&(k, _), _)| k == c)
                        .map(|(&(_, cc), v)| {
                            (cc, if t.conj_right { v.conj() } else { v.clone() })
                        })
                        .collect(),
                };
                for (rr, lv) in &lefts {
                    for (cc, rv) in &rights {
                        for lm in lv.terms() {
                            for rmon in rv.terms() {
                                if let Some(p1) = lm.mul(&m) {
                                    if let Some(p) = p1.mul(rmon) {
                                        self.toggle_slot((group, *rr, *cc, p), slot);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        if let Some(rhs) = rhs {
            for (&(r, c), v) in rhs.iter() {
                for m in v.terms() {
                    let row = self.row_mut((group, r, c, m.clone()));
                    row.1 = !row.1;
                }
            }
        }
    }

    /// Gaussian elimination; returns one solution (free variables zero)
    /// or `None` when inconsistent.
    pub fn solve(&self) -> Option<Vec<SparseMat>> {
        let assignment = self.solve_bits()?;
        Some(self.extract(&assignment))
    }

    fn extract(&self, bits: &[bool]) -> Vec<SparseMat> {
        let mut out: Vec<SparseMat> = self
            .vars
            .iter()
            .map(|s| SparseMat::zero(s.target.rank(), s.source.rank()))
            .collect();
        for (slot, &(vid, r, c, ref m)) in self.slots.iter().enumerate() {
            if bits[slot] {
                let mode = self.vars[vid].source.mode;
                let mut cur = out[vid]
                    .get(r, c)
                    .cloned()
                    .unwrap_or_else(|| Coefficient::zero(mode));
                cur.toggle(m.clone());
                out[vid].set(r, c, cur);
            }
        }
        out
    }

    fn solve_bits(&self) -> Option<Vec<bool>> {
        let n = self.slots.len();
        let mut rows: Vec<(Vec<u64>, bool)> = self.rows.values().cloned().collect();
        let mut pivots: Vec<(usize, usize)> = Vec::new(); // (col, row index)
        let mut rank = 0usize;
        for col in 0..n {
            let word = col / 64;
            let mask = 1u64 << (col % 64);
            let mut pivot = None;
            for (i, row) in rows.iter().enumerate().skip(rank) {
                if row.0[word] & mask != 0 {
                    pivot = Some(i);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            rows.swap(rank, p);
            let (pr, prhs) = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row.0[word] & mask != 0 {
                    for (w, pw) in row.0.iter_mut().zip(&pr) {
                        *w ^= pw;
                    }
                    row.1 ^= prhs;
                }
            }
            pivots.push((col, rank));
            rank += 1;
        }
        // Inconsistent iff some zero row has rhs 1.
        for row in rows.iter().skip(rank) {
            if row.1 {
                return None;
            }
        }
        let mut bits = vec![false; n];
        for &(col, r) in &pivots {
            bits[col] = rows[r].1;
        }
        Some(bits)
    }

    /// Basis of the homogeneous solution space (rhs ignored), as slot
    /// assignments. Used to sample chain maps.
    pub fn nullspace(&self) -> Vec<Vec<SparseMat>> {
        let n = self.slots.len();
        let mut rows: Vec<Vec<u64>> = self.rows.values().map(|(r, _)| r.clone()).collect();
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
        let mut rank = 0usize;
        for col in 0..n {
            let word = col / 64;
            let mask = 1u64 << (col % 64);
            let mut pivot = None;
            for (i, row) in rows.iter().enumerate().skip(rank) {
                if row[word] & mask != 0 {
                    pivot = Some(i);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            rows.swap(rank, p);
            let pr = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row[word] & mask != 0 {
                    for (w, pw) in row.iter_mut().zip(&pr) {
                        *w ^= pw;
                    }
                }
            }
            pivot_of_col[col] = Some(rank);
            rank += 1;
        }
        let mut basis = Vec::new();
        for free in 0..n {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut bits = vec![false; n];
            bits[free] = true;
            for col in 0..n {
                if let Some(r) = pivot_of_col[col] {
                    let word = free / 64;
                    if rows[r][word] & (1u64 << (free % 64)) != 0 {
                        bits[col] = true;
                    }
                }
            }
            basis.push(self.extract(&bits));
        }
        basis
    }
}

impl Default for MapSystem {
    fn default() -> Self {
        Self::new()
    }
}

/// Solve d h + h d = f + g. Returns the found homotopy, or `None` if the
/// maps are not chain homotopic at this degree.
pub fn homotopy_solve(f: &ChainMap, g: &ChainMap) -> Result<Option<ChainMap>> {
    if !f.same_shape(g) {
        return Err(Error::shape(
            "homotopy between maps of different shape",
        ));
    }
    let rhs = f.add(g)?;
    homotopy_to(&rhs)
}

/// Solve d h + h d = t for a single map t.
pub fn homotopy_to(t: &ChainMap) -> Result<Option<ChainMap>> {
    let mode = t.mode();
    let h_shape = MapShape {
        source: Arc::clone(&t.source),
        target: Arc::clone(&t.target),
        deg: gr_sub(&t.deg, &diff_degree(mode)),
        skew: t.skew,
    };
    let mut sys = MapSystem::new();
    let h = sys.add_unknown(h_shape.clone());
    sys.equation(
        0,
        &[
            Term::left(h, &t.target.d),
            Term::right(h, &t.source.d, t.skew),
        ],
        Some(&t.mat),
    );
    Ok(sys.solve().map(|mats| ChainMap {
        source: h_shape.source,
        target: h_shape.target,
        deg: h_shape.deg,
        skew: h_shape.skew,
        mat: mats.into_iter().next().unwrap(),
    }))
}

/// Certificate for a homotopy equivalence: inverse plus both homotopies.
#[derive(Debug, Clone)]
pub struct EquivalenceCert {
    pub inverse: ChainMap,
    pub h_source: ChainMap,
    pub h_target: ChainMap,
}

/// Find (g, k, k') with g f + id = d k + k d and f g + id = d k' + k' d.
/// Joint linear system in (g, k, k'); returns `None` when f is not a
/// homotopy equivalence at the complementary degree.
pub fn find_homotopy_inverse(f: &ChainMap) -> Result<Option<EquivalenceCert>> {
    if !f.is_chain_map() {
        return Err(Error::invalid(
            "homotopy inverse of a map that is not a chain map",
        ));
    }
    let mode = f.mode();
    let g_deg = if f.skew {
        gr_neg(&gr_skew(mode, &f.deg))
    } else {
        gr_neg(&f.deg)
    };
    let g_shape = MapShape {
        source: Arc::clone(&f.target),
        target: Arc::clone(&f.source),
        deg: g_deg,
        skew: f.skew,
    };
    let k_shape = MapShape {
        source: Arc::clone(&f.source),
        target: Arc::clone(&f.source),
        deg: gr_neg(&diff_degree(mode)),
        skew: false,
    };
    let k2_shape = MapShape {
        source: Arc::clone(&f.target),
        target: Arc::clone(&f.target),
        deg: gr_neg(&diff_degree(mode)),
        skew: false,
    };
    let mut sys = MapSystem::new();
    let g = sys.add_unknown(g_shape.clone());
    let k = sys.add_unknown(k_shape.clone());
    let k2 = sys.add_unknown(k2_shape.clone());

    // g is a chain map: d g + g d = 0
    sys.equation(
        0,
        &[
            Term::left(g, &f.source.d),
            Term::right(g, &f.target.d, g_shape.skew),
        ],
        None,
    );
    // g f + d k + k d = id
    let id_src = SparseMat::identity(f.source.rank(), mode);
    let id_tgt = SparseMat::identity(f.target.rank(), mode);
    sys.equation(
        1,
        &[
            Term::right(g, &f.mat, g_shape.skew),
            Term::left(k, &f.source.d),
            Term::right(k, &f.source.d, false),
        ],
        Some(&id_src),
    );
    // f g + d k' + k' d = id; f applied after g conjugates g's entries
    // when f is skew.
    sys.equation(
        2,
        &[
            Term {
                var: g,
                left: Some(&f.mat),
                right: None,
                conj_var: f.skew,
                conj_right: false,
            },
            Term::left(k2, &f.target.d),
            Term::right(k2, &f.target.d, false),
        ],
        Some(&id_tgt),
    );
    let Some(mut mats) = sys.solve() else {
        return Ok(None);
    };
    let k2_mat = mats.pop().unwrap();
    let k_mat = mats.pop().unwrap();
    let g_mat = mats.pop().unwrap();
    Ok(Some(EquivalenceCert {
        inverse: ChainMap {
            source: g_shape.source,
            target: g_shape.target,
            deg: g_shape.deg,
            skew: g_shape.skew,
            mat: g_mat,
        },
        h_source: ChainMap {
            source: k_shape.source,
            target: k_shape.target,
            deg: k_shape.deg,
            skew: false,
            mat: k_mat,
        },
        h_target: ChainMap {
            source: k2_shape.source,
            target: k2_shape.target,
            deg: k2_shape.deg,
            skew: false,
            mat: k2_mat,
        },
    }))
}

/// Basis of the space of (possibly skew) chain maps of a given degree.
pub fn chain_map_basis(
    source: &Arc<FreeComplex>,
    target: &Arc<FreeComplex>,
    deg: Gr,
    skew: bool,
) -> Vec<ChainMap> {
    let shape = MapShape {
        source: Arc::clone(source),
        target: Arc::clone(target),
        deg,
        skew,
    };
    let mut sys = MapSystem::new();
    let v = sys.add_unknown(shape.clone());
    sys.equation(
        0,
        &[
            Term::left(v, &target.d),
            Term::right(v, &source.d, skew),
        ],
        None,
    );
    sys.nullspace()
        .into_iter()
        .map(|mats| ChainMap {
            source: Arc::clone(source),
            target: Arc::clone(target),
            deg: shape.deg.clone(),
            skew,
            mat: mats.into_iter().next().unwrap(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{FreeComplex, Generator};
    use crate::ring::Mode;

    fn cone_u(k: u32) -> Arc<FreeComplex> {
        // d x = U^k y with gr(x) = 1 - 2k, gr(y) = 0
        let gens = vec![
            Generator::new("x", vec![2 - 4 * k as i32]),
            Generator::new("y", vec![0]),
        ];
        let mut d = SparseMat::zero(2, 2);
        d.set(1, 0, Coefficient::u_pow(Mode::U, k));
        Arc::new(FreeComplex::new(Mode::U, gens, d).unwrap())
    }

    #[test]
    fn homotopy_of_map_with_itself_is_zero() {
        let c = cone_u(2);
        let id = ChainMap::identity(&c);
        let h = homotopy_solve(&id, &id).unwrap().unwrap();
        assert!(h.is_zero());
    }

    #[test]
    fn identity_has_trivial_inverse() {
        let c = cone_u(1);
        let id = ChainMap::identity(&c);
        let cert = find_homotopy_inverse(&id).unwrap().unwrap();
        assert!(cert.inverse.mat == SparseMat::identity(2, Mode::U));
    }

    #[test]
    fn multiplication_by_u_is_not_an_equivalence() {
        // F[U] in one generator; f = U * id has no homotopy inverse
        let gens = vec![Generator::new("x", vec![0])];
        let c = Arc::new(FreeComplex::new(Mode::U, gens, SparseMat::zero(1, 1)).unwrap());
        let mut mat = SparseMat::zero(1, 1);
        mat.set(0, 0, Coefficient::u_pow(Mode::U, 1));
        let f = ChainMap::new(Arc::clone(&c), Arc::clone(&c), vec![-4], false, mat).unwrap();
        assert!(find_homotopy_inverse(&f).unwrap().is_none());
    }

    #[test]
    fn deformation_retract_has_inverse() {
        // inclusion F[U] -> F[U] (+) acyclic cone(1)
        let tower = Arc::new(
            FreeComplex::new(
                Mode::U,
                vec![Generator::new("t", vec![0])],
                SparseMat::zero(1, 1),
            )
            .unwrap(),
        );
        let gens = vec![
            Generator::new("t", vec![0]),
            Generator::new("a", vec![1]),
            Generator::new("b", vec![3]),
        ];
        let mut d = SparseMat::zero(3, 3);
        d.set(0 + 1, 2, Coefficient::one(Mode::U)); // d b = a
        let big = Arc::new(FreeComplex::new(Mode::U, gens, d).unwrap());
        let mut mat = SparseMat::zero(3, 1);
        mat.set(0, 0, Coefficient::one(Mode::U));
        let incl = ChainMap::new(Arc::clone(&tower), Arc::clone(&big), vec![0], false, mat)
            .unwrap();
        assert!(incl.is_chain_map());
        let cert = find_homotopy_inverse(&incl).unwrap().unwrap();
        assert!(cert.inverse.compose(&incl).unwrap().is_chain_map());
    }
}
