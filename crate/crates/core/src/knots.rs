//! Knot and link complexes over F2[u,v] (one variable pair per
//! component) with their skew-equivariant involutions.

use std::sync::Arc;

use crate::complex::{phi, psi, ChainMap, FreeComplex, ValidationReport};
use crate::error::{Error, Result};
use crate::grading::zero_degree;
use crate::involutive::IotaComplex;
use crate::ring::Mode;
use crate::solve::homotopy_solve;

/// A free complex over the knot or link ring together with a
/// skew-equivariant endomorphism satisfying the involutive axiom
/// iota^2 ~ (id + Phi_l Psi_l) o ... o (id + Phi_1 Psi_1).
#[derive(Debug, Clone, PartialEq)]
pub struct IotaKComplex {
    pub base: Arc<FreeComplex>,
    pub iota_k: ChainMap,
}

impl IotaKComplex {
    pub fn new(base: Arc<FreeComplex>, iota_k: ChainMap) -> Result<Self> {
        if iota_k.source != base || iota_k.target != base {
            return Err(Error::shape(
                "iota_K is not an endomorphism of the base",
            ));
        }
        if !iota_k.skew {
            return Err(Error::invalid("iota_K must be skew-equivariant"));
        }
        Ok(IotaKComplex { base, iota_k })
    }

    pub fn components(&self) -> usize {
        self.base.mode.pairs()
    }

    /// Alexander grading of a generator (doubled), knot case.
    pub fn alexander(&self, gen: usize) -> i32 {
        self.base.gens[gen].gr[2]
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        if !self.base.mode.allows_v() {
            rep.check(
                "base complex over the two-variable ring",
                false,
                format!("mode {}", self.base.mode),
            );
            return rep;
        }
        rep.check("base complex over the two-variable ring", true, String::new());
        rep.merge(self.base.validate());
        if !rep.passed() {
            return rep;
        }
        rep.check(
            "iota_K is a skew chain map exchanging (gr_u, gr_v)",
            self.iota_k.skew
                && self.iota_k.deg == zero_degree(self.base.mode)
                && self.iota_k.is_homogeneous()
                && self.iota_k.is_chain_map(),
            String::new(),
        );
        if !rep.passed() {
            return rep;
        }
        match self.square_defect() {
            Ok((sq, target)) => match homotopy_solve(&sq, &target) {
                Ok(Some(h)) => rep.check(
                    "iota_K^2 agrees with the Dehn-twist product up to homotopy",
                    true,
                    if h.is_zero() {
                        "equality is exact".into()
                    } else {
                        format!("homotopy: {h}")
                    },
                ),
                Ok(None) => rep.check(
                    "iota_K^2 agrees with the Dehn-twist product up to homotopy",
                    false,
                    "no homotopy exists".into(),
                ),
                Err(e) => rep.check(
                    "iota_K^2 agrees with the Dehn-twist product up to homotopy",
                    false,
                    e.to_string(),
                ),
            },
            Err(e) => rep.check(
                "iota_K^2 agrees with the Dehn-twist product up to homotopy",
                false,
                e.to_string(),
            ),
        }
        rep
    }

    /// (iota_K^2, target product), both plain endomorphisms of the base.
    pub fn square_defect(&self) -> Result<(ChainMap, ChainMap)> {
        let sq = self.iota_k.compose(&self.iota_k)?;
        let target = link_square_target(&self.base)?;
        Ok((sq, target))
    }
}

/// The ordered product (id + Phi_l Psi_l) o ... o (id + Phi_1 Psi_1),
/// the diffeomorphism map for a Dehn twist on each component.
pub fn link_square_target(base: &Arc<FreeComplex>) -> Result<ChainMap> {
    if !base.mode.allows_v() {
        return Err(Error::invalid(format!(
            "Dehn-twist product needs a two-variable complex, got mode {}",
            base.mode
        )));
    }
    let mut acc = ChainMap::identity(base);
    for pair in 0..base.mode.pairs() {
        let f = phi(base, pair)?;
        let g = psi(base, pair)?;
        let fg = f.compose(&g)?;
        let factor = ChainMap::identity(base).add(&ChainMap {
            deg: zero_degree(base.mode),
            ..fg
        })?;
        acc = factor.compose(&acc)?;
    }
    Ok(acc)
}

/// The Alexander-diagonal slice at s = 0 as a finitely generated
/// F[U]-complex with its induced involution; the induced data is
/// validated against the iota-complex axioms, not assumed.
pub fn collapse_to_u(c: &IotaKComplex) -> Result<(IotaComplex, ValidationReport)> {
    if c.base.mode != Mode::Uv(1) {
        return Err(Error::invalid(
            "collapse is defined for single-component knot complexes",
        ));
    }
    let a0 = crate::surgery::extract_flagged(c, crate::surgery::FlagKind::A, 0)?;
    let iota_mat = crate::surgery::conjugate_through(&a0, &a0, &c.iota_k, 0)?;
    let iota = ChainMap::new(
        Arc::clone(&a0.complex),
        Arc::clone(&a0.complex),
        vec![0],
        false,
        iota_mat,
    )?;
    let out = IotaComplex::new(Arc::clone(&a0.complex), iota)?;
    let rep = out.validate();
    Ok((out, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn unknot_is_a_valid_iota_k_complex() {
        let k = fixtures::unknot();
        let rep = k.validate();
        assert!(rep.passed(), "{rep}");
        let (sq, target) = k.square_defect().unwrap();
        // one generator, iota = id, Phi Psi = 0
        assert_eq!(sq.mat, target.mat);
    }

    #[test]
    fn trefoil_axiom_holds_exactly() {
        let k = fixtures::trefoil();
        let rep = k.validate();
        assert!(rep.passed(), "{rep}");
        let (sq, target) = k.square_defect().unwrap();
        assert_eq!(sq.mat, target.mat, "iota_K^2 = id + Phi Psi exactly");
        let h = homotopy_solve(&sq, &target).unwrap().unwrap();
        assert!(h.is_zero());
    }

    #[test]
    fn figure_eight_axiom_is_solver_verified() {
        let k = fixtures::figure_eight();
        let rep = k.validate();
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn trefoil_phi_psi_match_termwise_derivatives() {
        let k = fixtures::trefoil();
        let f = phi(&k.base, 0).unwrap();
        let g = psi(&k.base, 0).unwrap();
        let b = k.base.gen_index("b").unwrap();
        let a = k.base.gen_index("a").unwrap();
        let c = k.base.gen_index("c").unwrap();
        assert!(f.mat.get(a, b).unwrap().is_one());
        assert!(f.mat.get(c, b).is_none());
        assert!(g.mat.get(c, b).unwrap().is_one());
        assert_eq!(f.mat.iter().count(), 1);
        assert_eq!(g.mat.iter().count(), 1);
    }

    #[test]
    fn link_square_target_is_identity_for_trefoil() {
        let k = fixtures::trefoil();
        let t = link_square_target(&k.base).unwrap();
        assert_eq!(t.mat, crate::complex::SparseMat::identity(3, Mode::Uv(1)));
    }

    #[test]
    fn two_component_square_target_is_a_chain_map() {
        let l = fixtures::two_component_link();
        assert!(l.is_valid());
        let t = link_square_target(&l).unwrap();
        assert!(t.is_chain_map());
    }

    #[test]
    fn link_mode_unlink_satisfies_the_axiom() {
        let l = fixtures::two_component_unlink();
        assert!(l.validate().passed());
    }

    #[test]
    fn mixed_pair_derivatives_anticommute_up_to_homotopy() {
        let l = fixtures::two_component_link();
        let f1 = phi(&l, 0).unwrap();
        let g2 = psi(&l, 1).unwrap();
        let a = f1.compose(&g2).unwrap();
        let b = g2.compose(&f1).unwrap();
        let sum = a.add(&b).unwrap();
        assert!(crate::involutive::null_homotopic(&sum).unwrap());
    }

    #[test]
    fn validation_is_stable_under_generator_permutation() {
        let k = fixtures::trefoil();
        let p = fixtures::permuted(&k, &[2, 0, 1]);
        assert!(p.validate().passed());
    }

    #[test]
    fn collapse_of_unknot_is_the_trivial_tower() {
        let k = fixtures::unknot();
        let (c, rep) = collapse_to_u(&k).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(c.base.rank(), 1);
        assert!(c.base.d.is_zero());
    }

    #[test]
    fn collapse_of_trefoil_has_one_tower() {
        let k = fixtures::trefoil();
        let (c, rep) = collapse_to_u(&k).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(c.base.rank(), 3);
        let h = crate::homology::homology(&c.base).unwrap().summary();
        assert_eq!(h.towers.len(), 1);
    }

    #[test]
    fn collapse_of_empty_complex_is_empty() {
        let base = Arc::new(FreeComplex::empty(Mode::Uv(1)));
        let iota = ChainMap::new(
            Arc::clone(&base),
            Arc::clone(&base),
            zero_degree(Mode::Uv(1)),
            true,
            crate::complex::SparseMat::zero(0, 0),
        )
        .unwrap();
        let k = IotaKComplex::new(base, iota).unwrap();
        let (c, _) = collapse_to_u(&k).unwrap();
        assert_eq!(c.base.rank(), 0);
    }
}
