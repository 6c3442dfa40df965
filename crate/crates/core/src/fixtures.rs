//! Built-in fixtures: small knot complexes with their involutions, the
//! standard one- and two-tower F[U]-complexes, and the two 2-handle
//! squares whose stack computes the closed 4-manifold map.
//!
//! The knot involutions are shipped data validated against the axioms by
//! the test suite; the axioms do not determine them uniquely.

use std::sync::Arc;

use crate::complex::{ChainMap, FreeComplex, Generator, SparseMat};
use crate::grading::zero_degree;
use crate::hypercube::Hyperbox;
use crate::involutive::{iota_complex, IotaComplex};
use crate::knots::IotaKComplex;
use crate::ring::{Coefficient, Mode};

fn uv(s: &str) -> Coefficient {
    Coefficient::parse(Mode::Uv(1), s).unwrap()
}

fn knot_complex(
    gens: Vec<(&str, [i32; 3])>,
    diff: Vec<(&str, &str, &str)>,
    iota: Vec<(&str, &str, &str)>,
) -> IotaKComplex {
    let gs: Vec<Generator> = gens
        .iter()
        .map(|(n, g)| Generator::new(*n, g.to_vec()))
        .collect();
    let idx = |n: &str| gs.iter().position(|g| g.name == n).unwrap();
    let mut d = SparseMat::zero(gs.len(), gs.len());
    for (from, to, c) in diff {
        d.set(idx(to), idx(from), uv(c));
    }
    let base = Arc::new(FreeComplex::new(Mode::Uv(1), gs, d).unwrap());
    let mut im = SparseMat::zero(base.rank(), base.rank());
    for (from, to, c) in iota {
        im.set(
            base.gen_index(to).unwrap(),
            base.gen_index(from).unwrap(),
            uv(c),
        );
    }
    let iota_k = ChainMap::new(
        Arc::clone(&base),
        Arc::clone(&base),
        zero_degree(Mode::Uv(1)),
        true,
        im,
    )
    .unwrap();
    IotaKComplex::new(base, iota_k).unwrap()
}

/// The unknot: one generator, zero differential, iota the identity.
pub fn unknot() -> IotaKComplex {
    knot_complex(
        vec![("u", [0, 0, 0])],
        vec![],
        vec![("u", "u", "1")],
    )
}

/// The right-handed trefoil staircase d b = u a + v c with the involution
/// exchanging the two ends.
pub fn trefoil() -> IotaKComplex {
    knot_complex(
        vec![("a", [0, -4, 2]), ("b", [-2, -2, 0]), ("c", [-4, 0, -2])],
        vec![("b", "a", "u"), ("b", "c", "v")],
        vec![("a", "c", "1"), ("c", "a", "1"), ("b", "b", "1")],
    )
}

/// The figure-eight: a box (n, e, w, s) plus the tower dot v. The
/// involution exchanges the box sides and mixes the dot with the box
/// corners; with this model the involutive axiom holds exactly.
pub fn figure_eight() -> IotaKComplex {
    knot_complex(
        vec![
            ("v", [0, 0, 0]),
            ("n", [0, 0, 0]),
            ("s", [0, 0, 0]),
            ("e", [-2, 2, -2]),
            ("w", [2, -2, 2]),
        ],
        vec![
            ("e", "n", "u"),
            ("w", "n", "v"),
            ("s", "w", "u"),
            ("s", "e", "v"),
        ],
        vec![
            ("e", "w", "1"),
            ("w", "e", "1"),
            ("n", "n", "1"),
            ("s", "s", "1"),
            ("s", "v", "1"),
            ("v", "v", "1"),
            ("v", "n", "1"),
        ],
    )
}

/// Reindex the generators of a knot complex; validation must not depend
/// on the basis order.
pub fn permuted(k: &IotaKComplex, perm: &[usize]) -> IotaKComplex {
    let n = k.base.rank();
    assert_eq!(perm.len(), n);
    let gens: Vec<Generator> = perm.iter().map(|&i| k.base.gens[i].clone()).collect();
    let inv: Vec<usize> = {
        let mut v = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            v[old] = new;
        }
        v
    };
    let mut d = SparseMat::zero(n, n);
    for (&(r, c), v) in k.base.d.iter() {
        d.set(inv[r], inv[c], v.clone());
    }
    let base = Arc::new(FreeComplex::new(k.base.mode, gens, d).unwrap());
    let mut im = SparseMat::zero(n, n);
    for (&(r, c), v) in k.iota_k.mat.iter() {
        im.set(inv[r], inv[c], v.clone());
    }
    let iota_k = ChainMap::new(
        Arc::clone(&base),
        Arc::clone(&base),
        zero_degree(k.base.mode),
        true,
        im,
    )
    .unwrap();
    IotaKComplex::new(base, iota_k).unwrap()
}

/// A two-component fixture whose differential mixes both variable pairs
/// (a tensor square of one-step complexes). It carries no involution.
pub fn two_component_link() -> Arc<FreeComplex> {
    let mode = Mode::Uv(2);
    let gens = vec![
        Generator::new("a", vec![-4, 4, -2, -2]),
        Generator::new("b", vec![-2, 2, 0, -2]),
        Generator::new("c", vec![-2, 2, -2, 0]),
        Generator::new("d", vec![0, 0, 0, 0]),
    ];
    let c = |s: &str| Coefficient::parse(mode, s).unwrap();
    let mut d = SparseMat::zero(4, 4);
    d.set(1, 0, c("u1"));
    d.set(2, 0, c("u2"));
    d.set(3, 1, c("u2"));
    d.set(3, 2, c("u1"));
    Arc::new(FreeComplex::new(mode, gens, d).unwrap())
}

/// The two-component unlink with the identity involution.
pub fn two_component_unlink() -> IotaKComplex {
    let mode = Mode::Uv(2);
    let gens = vec![Generator::new("p", vec![0, 0, 0, 0])];
    let base = Arc::new(FreeComplex::new(mode, gens, SparseMat::zero(1, 1)).unwrap());
    let iota_k = ChainMap::new(
        Arc::clone(&base),
        Arc::clone(&base),
        zero_degree(mode),
        true,
        SparseMat::identity(1, mode),
    )
    .unwrap();
    IotaKComplex::new(base, iota_k).unwrap()
}

/// One F[U]-tower with zero differential.
pub fn tower(name: &str, gr2: i32) -> Arc<FreeComplex> {
    Arc::new(
        FreeComplex::new(
            Mode::U,
            vec![Generator::new(name, vec![gr2])],
            SparseMat::zero(1, 1),
        )
        .unwrap(),
    )
}

/// The three-sphere fixture: F[U] in grading zero with iota = id.
pub fn s3_iota() -> IotaComplex {
    let base = tower("e", 0);
    let id = SparseMat::identity(1, Mode::U);
    iota_complex(base, id).unwrap()
}

/// The two-tower model (gradings +-1/2) with zero differential; a valid
/// complex but not an iota-complex.
pub fn s1s2_complex() -> Arc<FreeComplex> {
    Arc::new(
        FreeComplex::new(
            Mode::U,
            vec![
                Generator::new("theta+", vec![1]),
                Generator::new("theta-", vec![-1]),
            ],
            SparseMat::zero(2, 2),
        )
        .unwrap(),
    )
}

/// A three-generator iota-complex with a U^3 differential entry, the
/// smallest fixture on which the twist automorphism acts nontrivially.
pub fn u_cubed_iota() -> IotaComplex {
    let gens = vec![
        Generator::new("x", vec![-10]),
        Generator::new("y", vec![0]),
        Generator::new("z", vec![0]),
    ];
    let mut d = SparseMat::zero(3, 3);
    d.set(1, 0, Coefficient::u_pow(Mode::U, 3));
    let base = Arc::new(FreeComplex::new(Mode::U, gens, d).unwrap());
    iota_complex(base, SparseMat::identity(3, Mode::U)).unwrap()
}

fn arrow_1x2(from_named: &str, c: &Arc<FreeComplex>, target: &str) -> SparseMat {
    // map from a 1-generator complex into c hitting `target`
    let mut m = SparseMat::zero(c.rank(), 1);
    let _ = from_named;
    m.set(c.gen_index(target).unwrap(), 0, Coefficient::one(Mode::U));
    m
}

/// The first 2-handle square: CF(S^3) -> CF(S^1 x S^2), horizontal
/// e -> theta-, verticals 1 + iota = 0, diagonal e -> theta+ (the Q is
/// carried by the level). Axis 0 is the cobordism direction, axis 1 the
/// involution direction.
pub fn handle_square_w1() -> Hyperbox {
    let s3 = tower("e", 0);
    let s1s2 = s1s2_complex();
    let mut sq = Hyperbox::new(vec![1, 1]);
    sq.set_cell(vec![0, 0], Arc::clone(&s3));
    sq.set_cell(vec![1, 0], Arc::clone(&s1s2));
    sq.set_cell(vec![0, 1], Arc::clone(&s3));
    sq.set_cell(vec![1, 1], Arc::clone(&s1s2));
    sq.set_arrow(vec![0, 0], vec![1, 0], arrow_1x2("e", &s1s2, "theta-"));
    sq.set_arrow(vec![0, 1], vec![1, 1], arrow_1x2("e", &s1s2, "theta-"));
    sq.set_arrow(vec![0, 0], vec![1, 1], arrow_1x2("e", &s1s2, "theta+"));
    sq
}

/// The second 2-handle square: CF(S^1 x S^2) -> CF(S^3), horizontal
/// theta+ -> e, theta- -> 0, verticals and diagonal zero.
pub fn handle_square_w2() -> Hyperbox {
    let s3 = tower("e", 0);
    let s1s2 = s1s2_complex();
    let mut sq = Hyperbox::new(vec![1, 1]);
    sq.set_cell(vec![0, 0], Arc::clone(&s1s2));
    sq.set_cell(vec![1, 0], Arc::clone(&s3));
    sq.set_cell(vec![0, 1], Arc::clone(&s1s2));
    sq.set_cell(vec![1, 1], Arc::clone(&s3));
    let mut h = SparseMat::zero(1, 2);
    h.set(0, s1s2.gen_index("theta+").unwrap(), Coefficient::one(Mode::U));
    sq.set_arrow(vec![0, 0], vec![1, 0], h.clone());
    sq.set_arrow(vec![0, 1], vec![1, 1], h);
    sq
}
