//! Iota-complexes and their dg-category of enhanced morphisms, the
//! involutive mapping cone over F2[U,Q]/Q^2, the equivalence between
//! enhanced morphisms and 2-cubes, and the basepoint-twist automorphism
//! Id + Q*Phi.

use std::sync::Arc;

use crate::complex::{ChainMap, FreeComplex, SparseMat, ValidationReport};
use crate::error::{Error, Result};
use crate::grading::{gr_add, zero_degree};
use crate::homology::{expand_uq, homology, q_action, towers_per_q_level, QAction};
use crate::hypercube::Hyperbox;
use crate::ring::{Coefficient, Mode, Monomial};
use crate::solve::{homotopy_solve, homotopy_to};

/// A free F2[U]-complex with a grading-preserving homotopy involution.
#[derive(Debug, Clone, PartialEq)]
pub struct IotaComplex {
    pub base: Arc<FreeComplex>,
    pub iota: ChainMap,
}

impl IotaComplex {
    pub fn new(base: Arc<FreeComplex>, iota: ChainMap) -> Result<Self> {
        if iota.source != base || iota.target != base {
            return Err(Error::shape("iota is not an endomorphism of the base"));
        }
        Ok(IotaComplex { base, iota })
    }

    /// The three axioms: graded base complex over F[U], exactly one free
    /// tower after inverting U, and a grading-preserving chain involution
    /// up to homotopy.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        if self.base.mode != Mode::U {
            rep.check(
                "base complex is a free F[U]-complex",
                false,
                format!("mode {}", self.base.mode),
            );
            return rep;
        }
        rep.check("base complex is a free F[U]-complex", true, String::new());
        rep.merge(self.base.validate());
        if !rep.passed() {
            return rep;
        }
        let grading_ok = self.iota.deg == zero_degree(Mode::U) && !self.iota.skew;
        rep.check(
            "iota is grading preserving",
            grading_ok && self.iota.is_homogeneous(),
            String::new(),
        );
        rep.check("iota is a chain map", self.iota.is_chain_map(), String::new());
        match homology(&self.base) {
            Ok(h) => {
                let s = h.summary();
                rep.check(
                    "localized homology is a single U-tower",
                    s.towers.len() == 1,
                    format!("found {} towers", s.towers.len()),
                );
            }
            Err(e) => rep.check("localized homology is a single U-tower", false, e.to_string()),
        }
        if rep.passed() {
            let sq = self.iota.compose(&self.iota).unwrap();
            let id = ChainMap::identity(&self.base);
            match homotopy_solve(&sq, &id) {
                Ok(Some(h)) => rep.check(
                    "iota squares to the identity up to homotopy",
                    true,
                    if h.is_zero() {
                        "iota^2 = id exactly".into()
                    } else {
                        format!("homotopy: {h}")
                    },
                ),
                Ok(None) => rep.check(
                    "iota squares to the identity up to homotopy",
                    false,
                    "no homotopy exists".into(),
                ),
                Err(e) => rep.check(
                    "iota squares to the identity up to homotopy",
                    false,
                    e.to_string(),
                ),
            }
        }
        rep
    }
}

/// An enhanced morphism (F, h): a map of the underlying complexes plus a
/// homotopy degree one above it.
#[derive(Debug, Clone)]
pub struct EnhancedMorphism {
    pub src: Arc<IotaComplex>,
    pub tgt: Arc<IotaComplex>,
    pub f: ChainMap,
    pub h: ChainMap,
}

impl EnhancedMorphism {
    pub fn new(
        src: Arc<IotaComplex>,
        tgt: Arc<IotaComplex>,
        f: ChainMap,
        h: ChainMap,
    ) -> Result<Self> {
        if f.source != src.base || f.target != tgt.base {
            return Err(Error::shape("F component source/target"));
        }
        if h.source != src.base || h.target != tgt.base {
            return Err(Error::shape("h component source/target"));
        }
        if h.deg != gr_add(&f.deg, &vec![2]) {
            return Err(Error::shape(
                "h component must sit one degree above F",
            ));
        }
        if f.skew || h.skew {
            return Err(Error::shape("enhanced morphisms are plain-equivariant"));
        }
        Ok(EnhancedMorphism { src, tgt, f, h })
    }

    pub fn identity(c: &Arc<IotaComplex>) -> Self {
        EnhancedMorphism {
            src: Arc::clone(c),
            tgt: Arc::clone(c),
            f: ChainMap::identity(&c.base),
            h: ChainMap::zero(&c.base, &c.base, vec![2], false),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.h.is_zero()
    }
}

/// The dg-differential on enhanced morphisms:
/// d(F, h) = (d F + F d, F iota + iota' F + d h + h d).
pub fn mor_differential(m: &EnhancedMorphism) -> Result<EnhancedMorphism> {
    let df = m.f.boundary()?;
    let commutator = m
        .tgt
        .iota
        .compose(&m.f)?
        .add(&m.f.compose(&m.src.iota)?)?;
    let dh = m.h.boundary()?;
    // d h has the degree of F's boundary shifted up by one; reconcile the
    // declared degrees before adding.
    let second = ChainMap {
        source: Arc::clone(&commutator.source),
        target: Arc::clone(&commutator.target),
        deg: gr_add(&df.deg, &vec![2]),
        skew: false,
        mat: commutator.mat.add(&dh.mat)?,
    };
    EnhancedMorphism::new(
        Arc::clone(&m.src),
        Arc::clone(&m.tgt),
        df,
        second,
    )
}

/// A morphism is an enhanced homomorphism when its dg-differential is
/// (0, 0).
pub fn is_enhanced_homomorphism(m: &EnhancedMorphism) -> Result<bool> {
    Ok(mor_differential(m)?.is_zero())
}

/// Solve d_Mor(J, j) = (f_part, h_part) jointly; the two components are
/// one linear system since the h-equation couples j to J.
pub fn mor_homotopy_to(
    src: &Arc<IotaComplex>,
    tgt: &Arc<IotaComplex>,
    f_part: &ChainMap,
    h_part: &ChainMap,
) -> Result<Option<EnhancedMorphism>> {
    use crate::solve::{MapShape, MapSystem, Term};
    let mode = f_part.mode();
    let j_shape = MapShape {
        source: Arc::clone(&src.base),
        target: Arc::clone(&tgt.base),
        deg: gr_add(&f_part.deg, &crate::grading::gr_neg(&crate::grading::diff_degree(mode))),
        skew: false,
    };
    let jj_shape = MapShape {
        deg: gr_add(&j_shape.deg, &vec![2]),
        ..j_shape.clone()
    };
    let mut sys = MapSystem::new();
    let big_j = sys.add_unknown(j_shape.clone());
    let small_j = sys.add_unknown(jj_shape.clone());
    sys.equation(
        0,
        &[
            Term::left(big_j, &tgt.base.d),
            Term::right(big_j, &src.base.d, false),
        ],
        Some(&f_part.mat),
    );
    sys.equation(
        1,
        &[
            Term::left(big_j, &tgt.iota.mat),
            Term::right(big_j, &src.iota.mat, false),
            Term::left(small_j, &tgt.base.d),
            Term::right(small_j, &src.base.d, false),
        ],
        Some(&h_part.mat),
    );
    let Some(mut mats) = sys.solve() else {
        return Ok(None);
    };
    let j_mat = mats.pop().unwrap();
    let big_mat = mats.pop().unwrap();
    let f = ChainMap::new(
        Arc::clone(&src.base),
        Arc::clone(&tgt.base),
        j_shape.deg,
        false,
        big_mat,
    )?;
    let h = ChainMap::new(
        Arc::clone(&src.base),
        Arc::clone(&tgt.base),
        jj_shape.deg,
        false,
        j_mat,
    )?;
    Ok(Some(EnhancedMorphism::new(
        Arc::clone(src),
        Arc::clone(tgt),
        f,
        h,
    )?))
}

/// Composition (F, h) o (F', h') = (F F', h F' + F h'): the composite of
/// the maps, with the homotopy spread over the two factors.
pub fn compose_enhanced(m2: &EnhancedMorphism, m1: &EnhancedMorphism) -> Result<EnhancedMorphism> {
    if m1.tgt.base != m2.src.base {
        return Err(Error::shape("enhanced composition source/target"));
    }
    let f = m2.f.compose(&m1.f)?;
    let h = m2.h.compose(&m1.f)?.add(&m2.f.compose(&m1.h)?)?;
    EnhancedMorphism::new(Arc::clone(&m1.src), Arc::clone(&m2.tgt), f, h)
}

/// The involutive mapping cone of Q(id + iota) as an F2[U,Q]/Q^2 complex:
/// same generators, differential d + Q(id + iota). No axioms are checked;
/// see [`build_cfi`] for the validated entry point.
pub fn cfi_cone_raw(base: &FreeComplex, iota: &SparseMat) -> Result<FreeComplex> {
    if base.mode != Mode::U {
        return Err(Error::invalid("cone input must be an F[U]-complex"));
    }
    let n = base.rank();
    let mut d = SparseMat::zero(n, n);
    for (&(r, c), v) in base.d.iter() {
        d.set(r, c, v.with_mode(Mode::UQ)?);
    }
    let q = Coefficient::q(Mode::UQ);
    for i in 0..n {
        d.add_to(i, i, &q)?;
    }
    for (&(r, c), v) in iota.iter() {
        d.add_to(r, c, &q.mul(&v.with_mode(Mode::UQ)?)?)?;
    }
    FreeComplex::new(Mode::UQ, base.gens.clone(), d)
}

/// Validated involutive cone of an iota-complex.
pub fn build_cfi(c: &IotaComplex) -> Result<FreeComplex> {
    let rep = c.validate();
    if !rep.passed() {
        return Err(Error::invalid(format!("not an iota-complex:\n{rep}")));
    }
    let out = cfi_cone_raw(&c.base, &c.iota.mat)?;
    debug_assert!(out.is_valid());
    Ok(out)
}

/// Homology data of an F2[U,Q]/Q^2 complex: towers and torsion of the
/// rank-2N expansion plus the induced Q-action.
pub struct CfiHomology {
    pub expansion: Arc<FreeComplex>,
    pub basis: crate::homology::HomologyBasis,
    pub q: QAction,
}

pub fn cfi_homology(c: &FreeComplex) -> Result<CfiHomology> {
    let (exp, q_mult, _) = expand_uq(c)?;
    let basis = homology(&exp)?;
    let q = q_action(&basis, &q_mult)?;
    Ok(CfiHomology {
        expansion: exp,
        basis,
        q,
    })
}

impl CfiHomology {
    pub fn towers_per_level(&self) -> (usize, usize) {
        towers_per_q_level(&self.q)
    }
}

/// Translate an enhanced morphism into the F2[U,Q]/Q^2-equivariant map
/// F + Q h between the involutive cones.
pub fn enhanced_to_uq_map(
    m: &EnhancedMorphism,
    src_cone: &Arc<FreeComplex>,
    tgt_cone: &Arc<FreeComplex>,
) -> Result<ChainMap> {
    let q = Coefficient::q(Mode::UQ);
    let mut mat = SparseMat::zero(tgt_cone.rank(), src_cone.rank());
    for (&(r, c), v) in m.f.mat.iter() {
        mat.add_to(r, c, &v.with_mode(Mode::UQ)?)?;
    }
    for (&(r, c), v) in m.h.mat.iter() {
        mat.add_to(r, c, &q.mul(&v.with_mode(Mode::UQ)?)?)?;
    }
    ChainMap::new(
        Arc::clone(src_cone),
        Arc::clone(tgt_cone),
        m.f.deg.clone(),
        false,
        mat,
    )
}

/// The basepoint-twist automorphism Id + Q*Phi of the involutive cone.
/// Returns the map together with the cone it acts on.
pub struct TwistData {
    pub cone: Arc<FreeComplex>,
    pub map: ChainMap,
    /// Solver homotopy between the twist and the identity, when one exists.
    pub homotopy_to_id: Option<ChainMap>,
}

pub fn twist_automorphism(c: &IotaComplex) -> Result<TwistData> {
    let cone = Arc::new(build_cfi(c)?);
    let phi = crate::complex::phi(&c.base, 0)?;
    let q = Coefficient::q(Mode::UQ);
    let mut mat = SparseMat::identity(cone.rank(), Mode::UQ);
    for (&(r, col), v) in phi.mat.iter() {
        mat.add_to(r, col, &q.mul(&v.with_mode(Mode::UQ)?)?)?;
    }
    let map = ChainMap::new(Arc::clone(&cone), Arc::clone(&cone), vec![0], false, mat)?;
    if !map.is_chain_map() {
        return Err(Error::invalid(
            "twist endomorphism does not commute with the cone differential",
        ));
    }
    let sq = map.compose(&map)?;
    if sq.mat != SparseMat::identity(cone.rank(), Mode::UQ) {
        return Err(Error::invalid("twist automorphism does not square to Id"));
    }
    let id = ChainMap::identity(&cone);
    let homotopy_to_id = homotopy_solve(&map, &id)?;
    Ok(TwistData {
        cone,
        map,
        homotopy_to_id,
    })
}

/// Report produced by [`enhanced_square_to_cube`].
pub struct CubeReport {
    pub cube_valid: bool,
    pub pieces_are_homomorphisms: [bool; 4],
    pub relation_holds: bool,
}

impl CubeReport {
    /// The two sides of the encoded equivalence agree.
    pub fn equivalence_confirmed(&self) -> bool {
        let rhs = self.pieces_are_homomorphisms.iter().all(|&b| b) && self.relation_holds;
        self.cube_valid == rhs
    }
}

/// Assemble the 3-cube encoding two compositions of enhanced morphisms
/// around a square of iota-complexes:
///
///   corners A, B, C, D with (I,i): A->B, (G,g): A->C, (H,h): B->D,
///   (F,f): C->D, and (J,j) filling F o G + H o I.
///
/// Axes: 0 = I/F direction, 1 = G/H direction, 2 = involution direction.
/// Returns the box and a report checking the equivalence between the cube
/// relations and the morphism-level relations.
pub fn enhanced_square_to_cube(
    ff: &EnhancedMorphism,
    gg: &EnhancedMorphism,
    hh: &EnhancedMorphism,
    ii: &EnhancedMorphism,
    jj: &EnhancedMorphism,
) -> Result<(Hyperbox, CubeReport)> {
    let a = &ii.src;
    let b = &ii.tgt;
    let c = &gg.tgt;
    let d = &ff.tgt;
    if gg.src.base != a.base || hh.src.base != b.base || ff.src.base != c.base {
        return Err(Error::shape("cube corners do not match"));
    }
    if hh.tgt.base != d.base || jj.src.base != a.base || jj.tgt.base != d.base {
        return Err(Error::shape("cube corners do not match"));
    }
    let mut box3 = Hyperbox::new(vec![1, 1, 1]);
    for z in 0..=1usize {
        box3.set_cell(vec![0, 0, z], Arc::clone(&a.base));
        box3.set_cell(vec![1, 0, z], Arc::clone(&b.base));
        box3.set_cell(vec![0, 1, z], Arc::clone(&c.base));
        box3.set_cell(vec![1, 1, z], Arc::clone(&d.base));
    }
    for z in 0..=1usize {
        box3.set_arrow(vec![0, 0, z], vec![1, 0, z], ii.f.mat.clone());
        box3.set_arrow(vec![0, 1, z], vec![1, 1, z], ff.f.mat.clone());
        box3.set_arrow(vec![0, 0, z], vec![0, 1, z], gg.f.mat.clone());
        box3.set_arrow(vec![1, 0, z], vec![1, 1, z], hh.f.mat.clone());
        box3.set_arrow(vec![0, 0, z], vec![1, 1, z], jj.f.mat.clone());
    }
    box3.set_arrow(vec![0, 0, 0], vec![0, 0, 1], a.iota.mat.clone());
    box3.set_arrow(vec![1, 0, 0], vec![1, 0, 1], b.iota.mat.clone());
    box3.set_arrow(vec![0, 1, 0], vec![0, 1, 1], c.iota.mat.clone());
    box3.set_arrow(vec![1, 1, 0], vec![1, 1, 1], d.iota.mat.clone());
    box3.set_arrow(vec![0, 0, 0], vec![1, 0, 1], ii.h.mat.clone());
    box3.set_arrow(vec![0, 1, 0], vec![1, 1, 1], ff.h.mat.clone());
    box3.set_arrow(vec![0, 0, 0], vec![0, 1, 1], gg.h.mat.clone());
    box3.set_arrow(vec![1, 0, 0], vec![1, 1, 1], hh.h.mat.clone());
    box3.set_arrow(vec![0, 0, 0], vec![1, 1, 1], jj.h.mat.clone());

    let cube_valid = box3.is_valid();
    let pieces = [
        is_enhanced_homomorphism(ff)?,
        is_enhanced_homomorphism(gg)?,
        is_enhanced_homomorphism(hh)?,
        is_enhanced_homomorphism(ii)?,
    ];
    let lhs_f = compose_enhanced(ff, gg)?;
    let lhs_h = compose_enhanced(hh, ii)?;
    let sum = EnhancedMorphism::new(
        Arc::clone(a),
        Arc::clone(d),
        lhs_f.f.add(&lhs_h.f)?,
        lhs_f.h.add(&lhs_h.h)?,
    )?;
    let dj = mor_differential(jj)?;
    let relation_holds = sum.f.mat == dj.f.mat && sum.h.mat == dj.h.mat;
    Ok((
        box3,
        CubeReport {
            cube_valid,
            pieces_are_homomorphisms: pieces,
            relation_holds,
        },
    ))
}

/// Quick constructor for the simplest fixtures: an iota-complex from a
/// base and an involution matrix.
pub fn iota_complex(base: Arc<FreeComplex>, iota_mat: SparseMat) -> Result<IotaComplex> {
    let iota = ChainMap::new(
        Arc::clone(&base),
        Arc::clone(&base),
        zero_degree(base.mode),
        false,
        iota_mat,
    )?;
    IotaComplex::new(base, iota)
}

/// Convenience: is the map null-homotopic?
pub fn null_homotopic(m: &ChainMap) -> Result<bool> {
    Ok(homotopy_to(m)?.is_some())
}

/// Build the 2-cube encoding of an enhanced morphism (used by tests and
/// by the S^2 x S^2 pipeline): size (1,1), axis 0 the map direction,
/// axis 1 the involution direction.
pub fn enhanced_to_square(m: &EnhancedMorphism) -> Hyperbox {
    let mut sq = Hyperbox::new(vec![1, 1]);
    sq.set_cell(vec![0, 0], Arc::clone(&m.src.base));
    sq.set_cell(vec![1, 0], Arc::clone(&m.tgt.base));
    sq.set_cell(vec![0, 1], Arc::clone(&m.src.base));
    sq.set_cell(vec![1, 1], Arc::clone(&m.tgt.base));
    sq.set_arrow(vec![0, 0], vec![1, 0], m.f.mat.clone());
    sq.set_arrow(vec![0, 1], vec![1, 1], m.f.mat.clone());
    // verticals Q(1 + iota) carry the (1 + iota) matrix; the Q is implicit
    // in the level
    let id0 = SparseMat::identity(m.src.base.rank(), m.src.base.mode);
    let id1 = SparseMat::identity(m.tgt.base.rank(), m.tgt.base.mode);
    sq.set_arrow(
        vec![0, 0],
        vec![0, 1],
        id0.add(&m.src.iota.mat).unwrap(),
    );
    sq.set_arrow(
        vec![1, 0],
        vec![1, 1],
        id1.add(&m.tgt.iota.mat).unwrap(),
    );
    sq.set_arrow(vec![0, 0], vec![1, 1], m.h.mat.clone());
    sq
}

/// Read a (1,1)-cube whose axis 1 is the involution direction back into
/// the F2[U,Q]/Q^2 endomorphism data (F, h) |-> F + Q h, as a map between
/// the involutive cones of its vertical edges.
pub fn square_to_uq_map(sq: &Hyperbox) -> Result<(ChainMap, Arc<FreeComplex>, Arc<FreeComplex>)> {
    if sq.size != vec![1, 1] {
        return Err(Error::shape("expected a (1,1)-cube"));
    }
    let src_base = sq.cell(&vec![0, 0])?;
    let tgt_base = sq.cell(&vec![1, 0])?;
    if sq.cell(&vec![0, 1])? != src_base || sq.cell(&vec![1, 1])? != tgt_base {
        return Err(Error::shape(
            "involution direction must repeat the underlying complexes",
        ));
    }
    let id0 = SparseMat::identity(src_base.rank(), src_base.mode);
    let id1 = SparseMat::identity(tgt_base.rank(), tgt_base.mode);
    let iota0 = sq.arrow(&vec![0, 0], &vec![0, 1])?.add(&id0)?;
    let iota1 = sq.arrow(&vec![1, 0], &vec![1, 1])?.add(&id1)?;
    let f_top = sq.arrow(&vec![0, 0], &vec![1, 0])?;
    let f_bot = sq.arrow(&vec![0, 1], &vec![1, 1])?;
    if f_top != f_bot {
        return Err(Error::invalid(
            "the two levels carry different maps; not of the form F + Qh",
        ));
    }
    let h = sq.arrow(&vec![0, 0], &vec![1, 1])?;
    let src_cone = Arc::new(cfi_cone_raw(src_base, &iota0)?);
    let tgt_cone = Arc::new(cfi_cone_raw(tgt_base, &iota1)?);
    let q = Coefficient::q(Mode::UQ);
    let mut mat = SparseMat::zero(tgt_cone.rank(), src_cone.rank());
    for (&(r, c), v) in f_top.iter() {
        mat.add_to(r, c, &v.with_mode(Mode::UQ)?)?;
    }
    for (&(r, c), v) in h.iter() {
        mat.add_to(r, c, &q.mul(&v.with_mode(Mode::UQ)?)?)?;
    }
    // degree inferred from any nonzero entry; zero maps get degree 0
    let deg = infer_degree(&mat, &src_cone, &tgt_cone).unwrap_or(vec![0]);
    Ok((
        ChainMap::new(Arc::clone(&src_cone), Arc::clone(&tgt_cone), deg, false, mat)?,
        src_cone,
        tgt_cone,
    ))
}

/// Infer the degree of a homogeneous nonzero matrix between two graded
/// single-variable complexes.
pub fn infer_degree(
    mat: &SparseMat,
    src: &Arc<FreeComplex>,
    tgt: &Arc<FreeComplex>,
) -> Option<crate::grading::Gr> {
    if src.mode.allows_v() {
        return None;
    }
    let (&(r, c), v) = mat.iter().next()?;
    let m: &Monomial = v.terms().next()?;
    // dst + drop(m) = src + deg
    let drop = 4 * m.uv[0].0 as i32 + if m.q { 2 } else { 0 };
    Some(vec![tgt.gens[r].gr[0] - drop - src.gens[c].gr[0]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Generator;

    fn s3() -> Arc<IotaComplex> {
        let base = Arc::new(
            FreeComplex::new(
                Mode::U,
                vec![Generator::new("x", vec![0])],
                SparseMat::zero(1, 1),
            )
            .unwrap(),
        );
        let iota = SparseMat::identity(1, Mode::U);
        Arc::new(iota_complex(base, iota).unwrap())
    }

    #[test]
    fn s3_is_a_valid_iota_complex() {
        let rep = s3().validate();
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn two_towers_fail_axiom_two() {
        // the S^1 x S^2 model: two generators, zero differential
        let base = Arc::new(
            FreeComplex::new(
                Mode::U,
                vec![
                    Generator::new("top", vec![1]),
                    Generator::new("bot", vec![-1]),
                ],
                SparseMat::zero(2, 2),
            )
            .unwrap(),
        );
        assert!(base.is_valid());
        let c = iota_complex(Arc::clone(&base), SparseMat::identity(2, Mode::U)).unwrap();
        let rep = c.validate();
        assert!(!rep.passed());
    }

    #[test]
    fn non_grading_preserving_iota_is_rejected() {
        let base = Arc::new(
            FreeComplex::new(
                Mode::U,
                vec![Generator::new("x", vec![0])],
                SparseMat::zero(1, 1),
            )
            .unwrap(),
        );
        let mut m = SparseMat::zero(1, 1);
        m.set(0, 0, Coefficient::u_pow(Mode::U, 1));
        // a degree-0 endomorphism whose only entry needs U: not homogeneous
        let c = iota_complex(base, m).unwrap();
        assert!(!c.validate().passed());
    }

    #[test]
    fn cfi_of_s3_has_one_tower_per_q_level() {
        let cone = build_cfi(&s3()).unwrap();
        let h = cfi_homology(&cone).unwrap();
        assert_eq!(h.basis.summary().towers.len(), 2);
        assert_eq!(h.towers_per_level(), (1, 1));
    }

    #[test]
    fn cone_over_swap_involution() {
        // two towers in the same grading with the swap involution; not an
        // iota-complex, but the raw cone is still a complex with two
        // towers per level
        let base = Arc::new(
            FreeComplex::new(
                Mode::U,
                vec![Generator::new("x", vec![0]), Generator::new("y", vec![0])],
                SparseMat::zero(2, 2),
            )
            .unwrap(),
        );
        let mut swap = SparseMat::zero(2, 2);
        swap.set(0, 1, Coefficient::one(Mode::U));
        swap.set(1, 0, Coefficient::one(Mode::U));
        let cone = cfi_cone_raw(&base, &swap).unwrap();
        assert!(cone.is_valid());
        let h = cfi_homology(&cone).unwrap();
        assert_eq!(h.basis.summary().towers.len(), 2);
        assert_eq!(h.basis.summary().torsion.len(), 0);
    }

    #[test]
    fn identity_morphism_is_a_homomorphism_and_a_unit() {
        let c = s3();
        let id = EnhancedMorphism::identity(&c);
        assert!(is_enhanced_homomorphism(&id).unwrap());
        let m = EnhancedMorphism::new(
            Arc::clone(&c),
            Arc::clone(&c),
            ChainMap::identity(&c.base),
            ChainMap::zero(&c.base, &c.base, vec![2], false),
        )
        .unwrap();
        let left = compose_enhanced(&id, &m).unwrap();
        assert_eq!(left.f.mat, m.f.mat);
        assert_eq!(left.h.mat, m.h.mat);
    }

    #[test]
    fn twist_on_s3_is_homotopic_to_identity() {
        let data = twist_automorphism(&s3()).unwrap();
        assert!(data.homotopy_to_id.is_some());
        // Phi = 0 on a zero differential, so the twist is exactly Id
        assert_eq!(
            data.map.mat,
            SparseMat::identity(data.cone.rank(), Mode::UQ)
        );
    }

    #[test]
    fn trivial_cube_from_identities() {
        let c = s3();
        let id = EnhancedMorphism::identity(&c);
        let zero = EnhancedMorphism::new(
            Arc::clone(&c),
            Arc::clone(&c),
            ChainMap::zero(&c.base, &c.base, vec![0], false),
            ChainMap::zero(&c.base, &c.base, vec![2], false),
        )
        .unwrap();
        let (cube, rep) = enhanced_square_to_cube(&id, &id, &id, &id, &zero).unwrap();
        assert!(cube.is_valid());
        assert!(rep.cube_valid && rep.relation_holds);
        assert!(rep.equivalence_confirmed());
    }

    use crate::ring::Coefficient;
}
