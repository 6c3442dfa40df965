//! Seeded synthetic inputs for property suites: random homogeneous
//! complexes with known decomposition, random chain maps and homotopies,
//! and random valid hyperboxes built by stacking conjugated cubes.
//!
//! Everything is driven by an explicit seed; identical seeds give
//! identical fixtures.

use std::sync::Arc;

use crate::complex::{ChainMap, FreeComplex, Generator, SparseMat};
use crate::grading::{admissible_monomials, gr_add, Gr};
use crate::hypercube::{points, Hyperbox};
use crate::ring::{Coefficient, Mode, Monomial};

/// Minimal xorshift generator; deterministic and dependency-free.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.wrapping_mul(0x9E3779B97F4A7C15).max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn flip(&mut self, num: u32, den: u32) -> bool {
        (self.next_u64() % den as u64) < num as u64
    }
}

/// A random homogeneous F[U]-complex: elementary pieces (free towers and
/// U^k cones) conjugated by random homogeneous basis changes. Returns the
/// complex; its decomposition is the construction data, so homology is
/// known by design.
pub fn random_complex(rng: &mut Rng, n_gens: usize) -> Arc<FreeComplex> {
    let mut gens = Vec::with_capacity(n_gens);
    let mut d = SparseMat::zero(n_gens, n_gens);
    let mut i = 0;
    while i < n_gens {
        let anchor = (rng.below(9) as i32 - 4) * 2; // even doubled gradings
        if i + 1 < n_gens && rng.flip(3, 5) {
            let k = rng.below(3) as u32 + rng.below(2) as u32; // 0..=3
            gens.push(Generator::new(
                format!("g{}", i),
                vec![anchor + 2 - 4 * k as i32],
            ));
            gens.push(Generator::new(format!("g{}", i + 1), vec![anchor]));
            d.set(i + 1, i, Coefficient::u_pow(Mode::U, k));
            i += 2;
        } else {
            gens.push(Generator::new(format!("g{}", i), vec![anchor]));
            i += 1;
        }
    }
    let mut c = FreeComplex::new(Mode::U, gens, d).unwrap();
    // random homogeneous unitriangular conjugations e_j += U^a e_i
    for _ in 0..3 * n_gens {
        let i = rng.below(n_gens.max(1));
        let j = rng.below(n_gens.max(1));
        if i == j {
            continue;
        }
        let diff = c.gens[i].gr[0] - c.gens[j].gr[0];
        if diff < 0 || diff % 4 != 0 {
            continue;
        }
        basis_op(&mut c, j, i, (diff / 4) as u32);
    }
    debug_assert!(c.is_valid());
    Arc::new(c)
}

/// In-place change of basis e_j := e_j + U^a e_i, updating the
/// differential by the matching column and row operations.
fn basis_op(c: &mut FreeComplex, j: usize, i: usize, a: u32) {
    let coef = Coefficient::u_pow(Mode::U, a);
    let n = c.rank();
    // column j += coef * column i
    for r in 0..n {
        if let Some(v) = c.d.get(r, i).cloned() {
            c.d.add_to(r, j, &coef.mul(&v).unwrap()).unwrap();
        }
    }
    // row i += coef * row j
    for col in 0..n {
        if let Some(v) = c.d.get(j, col).cloned() {
            c.d.add_to(i, col, &coef.mul(&v).unwrap()).unwrap();
        }
    }
}

/// A random matrix with admissible monomial entries at the given degree;
/// not a chain map in general.
pub fn random_map_matrix(
    rng: &mut Rng,
    src: &Arc<FreeComplex>,
    tgt: &Arc<FreeComplex>,
    deg: &Gr,
) -> SparseMat {
    let mut m = SparseMat::zero(tgt.rank(), src.rank());
    for c in 0..src.rank() {
        for r in 0..tgt.rank() {
            for mon in admissible_monomials(src.mode, &src.gens[c].gr, &tgt.gens[r].gr, deg) {
                if rng.flip(1, 2) {
                    let mut cur = m
                        .get(r, c)
                        .cloned()
                        .unwrap_or_else(|| Coefficient::zero(src.mode));
                    cur.toggle(mon);
                    m.set(r, c, cur);
                }
            }
        }
    }
    m
}

/// A random chain map sampled from the nullspace of the chain-map
/// equation.
pub fn random_chain_map(
    rng: &mut Rng,
    src: &Arc<FreeComplex>,
    tgt: &Arc<FreeComplex>,
    deg: Gr,
) -> ChainMap {
    let basis = crate::solve::chain_map_basis(src, tgt, deg.clone(), false);
    let mut mat = SparseMat::zero(tgt.rank(), src.rank());
    for b in &basis {
        if rng.flip(1, 2) {
            mat = mat.add(&b.mat).unwrap();
        }
    }
    ChainMap::new(Arc::clone(src), Arc::clone(tgt), deg, false, mat).unwrap()
}

/// A pair (f, g) of chain maps differing by the boundary of a random
/// homotopy; homotopy_solve must succeed on it.
pub fn homotopic_pair(
    rng: &mut Rng,
    c: &Arc<FreeComplex>,
    deg: Gr,
) -> (ChainMap, ChainMap) {
    let g = random_chain_map(rng, c, c, deg.clone());
    let h_mat = random_map_matrix(rng, c, c, &gr_add(&deg, &vec![2]));
    let dh = c.d.compose(&h_mat, false).unwrap();
    let hd = h_mat.compose(&c.d, false).unwrap();
    let f_mat = g.mat.add(&dh.add(&hd).unwrap()).unwrap();
    let f = ChainMap::new(Arc::clone(c), Arc::clone(c), deg, false, f_mat).unwrap();
    (f, g)
}

/// A random hyperbox of the given size, built by stacking slabs of
/// conjugated copies along each axis in turn. Cells carry gradings making
/// every length-l arrow homogeneous of in-cell degree l - 1.
pub fn random_hyperbox(rng: &mut Rng, size: &[usize], gens_per_cell: usize) -> Hyperbox {
    if size.is_empty() {
        let mut h = Hyperbox::new(vec![]);
        h.set_cell(vec![], random_complex(rng, gens_per_cell));
        return h;
    }
    let inner = random_hyperbox(rng, &size[1..], gens_per_cell);
    let mut layers: Vec<Hyperbox> = vec![inner];
    let mut connectors: Vec<TotalMap> = Vec::new();
    for _ in 0..size[0] {
        let prev = layers.last().unwrap();
        let (next, f) = extend_layer(rng, prev);
        layers.push(next);
        connectors.push(f);
    }
    // assemble: cell (t, eps) from layer t, arrows within layers plus the
    // connector blocks
    let mut out = Hyperbox::new({
        let mut s = vec![size[0]];
        s.extend_from_slice(&size[1..]);
        s
    });
    for (t, layer) in layers.iter().enumerate() {
        for (eps, c) in &layer.cells {
            let mut e = vec![t];
            e.extend_from_slice(eps);
            out.set_cell(e, Arc::clone(c));
        }
        for ((from, to), m) in &layer.arrows {
            let mut f = vec![t];
            f.extend_from_slice(from);
            let mut t2 = vec![t];
            t2.extend_from_slice(to);
            out.set_arrow(f, t2, m.clone());
        }
    }
    for (t, f) in connectors.iter().enumerate() {
        for ((from, to), m) in &f.blocks {
            let mut fr = vec![t];
            fr.extend_from_slice(from);
            let mut to2 = vec![t + 1];
            to2.extend_from_slice(to);
            out.set_arrow(fr, to2, m.clone());
        }
    }
    // sprinkle boundary-commutator noise over the full unit diagonals;
    // those arrows appear in exactly one structure relation, where the
    // added [d, T] cancels itself
    let pts: Vec<Vec<usize>> = out.cells.keys().cloned().collect();
    for a in &pts {
        for b in &pts {
            let full_diagonal = a.iter().zip(b).all(|(x, y)| *y == *x + 1);
            let len = a.len();
            if !full_diagonal || len < 2 || !rng.flip(1, 2) {
                continue;
            }
            let src = Arc::clone(&out.cells[a]);
            let tgt = Arc::clone(&out.cells[b]);
            let t = random_map_matrix(rng, &src, &tgt, &vec![2 * len as i32]);
            let noise = tgt
                .d
                .compose(&t, false)
                .unwrap()
                .add(&t.compose(&src.d, false).unwrap())
                .unwrap();
            if !noise.is_zero() {
                let cur = out.arrow(a, b).unwrap();
                out.set_arrow(a.clone(), b.clone(), cur.add(&noise).unwrap());
            }
        }
    }
    out
}

/// A box morphism stored blockwise.
struct TotalMap {
    blocks: std::collections::BTreeMap<(Vec<usize>, Vec<usize>), SparseMat>,
}

/// Produce a conjugated copy of a layer plus a connecting morphism
/// F = P + D' T + T D for cell-diagonal random P (unitriangular,
/// homogeneous) and T.
fn extend_layer(rng: &mut Rng, layer: &Hyperbox) -> (Hyperbox, TotalMap) {
    let pts = points(&layer.size);
    // cell-diagonal invertible P and its inverse, as per-cell matrices
    let mut p_cells = std::collections::BTreeMap::new();
    let mut p_inv_cells = std::collections::BTreeMap::new();
    for eps in &pts {
        let c = &layer.cells[eps];
        let (p, p_inv) = random_unitriangular(rng, c);
        p_cells.insert(eps.clone(), p);
        p_inv_cells.insert(eps.clone(), p_inv);
    }
    // conjugated layer: arrows D'(a,b) = P_b o D(a,b) o P_a^-1
    let mut next = Hyperbox::new(layer.size.clone());
    for eps in &pts {
        let c = &layer.cells[eps];
        let d2 = p_cells[eps]
            .compose(&c.d.compose(&p_inv_cells[eps], false).unwrap(), false)
            .unwrap();
        next.set_cell(
            eps.clone(),
            Arc::new(FreeComplex::new(c.mode, c.gens.clone(), d2).unwrap()),
        );
    }
    for ((from, to), m) in &layer.arrows {
        let conj = p_cells[to]
            .compose(&m.compose(&p_inv_cells[from], false).unwrap(), false)
            .unwrap();
        next.set_arrow(from.clone(), to.clone(), conj);
    }
    // connector F = P + D_next o T + T o D_prev with cell-diagonal T of
    // in-cell degree 0 (one above a length-1 arrow)
    let mut blocks = std::collections::BTreeMap::new();
    let mut t_cells = std::collections::BTreeMap::new();
    for eps in &pts {
        let c = &layer.cells[eps];
        let t = random_map_matrix(rng, c, &next.cells[eps], &vec![2]);
        t_cells.insert(eps.clone(), t);
    }
    for a in &pts {
        for b in &pts {
            if !a.iter().zip(b).all(|(x, y)| x <= y) {
                continue;
            }
            let mut acc = SparseMat::zero(
                next.cells[b].rank(),
                layer.cells[a].rank(),
            );
            if a == b {
                acc = acc.add(&p_cells[a]).unwrap();
            }
            // (D_next o T)(a -> b): arrows of next from a to b composed
            // with T at a
            let d_next_ab = next.arrow(a, b).unwrap();
            acc = acc
                .add(&d_next_ab.compose(&t_cells[a], false).unwrap())
                .unwrap();
            // (T o D_prev)(a -> b): T at b composed with arrows of layer
            let d_prev_ab = layer.arrow(a, b).unwrap();
            acc = acc
                .add(&t_cells[b].compose(&d_prev_ab, false).unwrap())
                .unwrap();
            if !acc.is_zero() {
                blocks.insert((a.clone(), b.clone()), acc);
            }
        }
    }
    (next, TotalMap { blocks })
}

/// Random invertible unitriangular homogeneous endomorphism and its
/// inverse.
fn random_unitriangular(rng: &mut Rng, c: &Arc<FreeComplex>) -> (SparseMat, SparseMat) {
    let n = c.rank();
    let mut p = SparseMat::identity(n, c.mode);
    // a few strictly-lower elementary ops in a fixed order; the product
    // of elementaries and its inverse are easy to accumulate
    // strictly triangular elementary ops e_j += m e_i with j < i; each is
    // an involution in characteristic 2, so the inverse product is the
    // reversed product
    let mut ops: Vec<(usize, usize, Monomial)> = Vec::new();
    for _ in 0..n {
        let i = rng.below(n.max(1));
        let j = rng.below(n.max(1));
        if j >= i {
            continue;
        }
        // entry at (row i, col j): e_j gains m e_i, so the monomial drop
        // is gr_i - gr_j
        let mons = admissible_monomials(c.mode, &c.gens[j].gr, &c.gens[i].gr, &vec![0]);
        if let Some(m) = mons.into_iter().next() {
            ops.push((j, i, m));
        }
    }
    ops.sort();
    ops.dedup_by(|a, b| (a.0, a.1) == (b.0, b.1));
    for (j, i, m) in &ops {
        let mut e = SparseMat::identity(n, c.mode);
        e.set(*i, *j, Coefficient::from_monomial(c.mode, m.clone()));
        p = e.compose(&p, false).unwrap();
    }
    let mut p_inv = SparseMat::identity(n, c.mode);
    for (j, i, m) in &ops {
        let mut e = SparseMat::identity(n, c.mode);
        e.set(*i, *j, Coefficient::from_monomial(c.mode, m.clone()));
        p_inv = p_inv.compose(&e, false).unwrap();
    }
    debug_assert!({
        let prod = p.compose(&p_inv, false).unwrap();
        prod == SparseMat::identity(n, c.mode)
    });
    (p, p_inv)
}
