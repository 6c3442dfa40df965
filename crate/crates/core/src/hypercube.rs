//! Hyperboxes of chain complexes: the structure relation, stacking along
//! an axis, and compression to a hypercube by iterated function
//! composition.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complex::{FreeComplex, SparseMat, ValidationReport};
use crate::error::{Error, Result};
use crate::ring::Mode;

pub type Eps = Vec<usize>;

/// A hyperbox of size d: complexes at the points of E(d) = prod {0..d_i},
/// arrows D(eps, eps') for eps <= eps' with sup-distance at most one.
/// The arrow from a point to itself is the cell's internal differential
/// and lives in the cell, not in `arrows`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperbox {
    pub size: Vec<usize>,
    pub cells: BTreeMap<Eps, Arc<FreeComplex>>,
    pub arrows: BTreeMap<(Eps, Eps), SparseMat>,
}

pub fn points(size: &[usize]) -> Vec<Eps> {
    let mut out = vec![vec![]];
    for &d in size {
        let mut next = Vec::with_capacity(out.len() * (d + 1));
        for p in &out {
            for i in 0..=d {
                let mut q = p.clone();
                q.push(i);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn leq(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn sup_dist(a: &[usize], b: &[usize]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.max(y) - x.min(y))
        .max()
        .unwrap_or(0)
}

impl Hyperbox {
    pub fn new(size: Vec<usize>) -> Self {
        Hyperbox {
            size,
            cells: BTreeMap::new(),
            arrows: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.size.len()
    }

    pub fn mode(&self) -> Option<Mode> {
        self.cells.values().next().map(|c| c.mode)
    }

    pub fn is_cube(&self) -> bool {
        self.size.iter().all(|&d| d == 1)
    }

    pub fn cell(&self, eps: &Eps) -> Result<&Arc<FreeComplex>> {
        self.cells
            .get(eps)
            .ok_or_else(|| Error::invalid(format!("missing cell at {eps:?}")))
    }

    pub fn set_cell(&mut self, eps: Eps, c: Arc<FreeComplex>) {
        self.cells.insert(eps, c);
    }

    pub fn set_arrow(&mut self, from: Eps, to: Eps, mat: SparseMat) {
        if mat.is_zero() {
            self.arrows.remove(&(from, to));
        } else {
            self.arrows.insert((from, to), mat);
        }
    }

    /// The arrow from `from` to `to`, the internal differential when the
    /// two coincide, zero when absent.
    pub fn arrow(&self, from: &Eps, to: &Eps) -> Result<SparseMat> {
        if from == to {
            return Ok(self.cell(from)?.d.clone());
        }
        match self.arrows.get(&(from.clone(), to.clone())) {
            Some(m) => Ok(m.clone()),
            None => Ok(SparseMat::zero(
                self.cell(to)?.rank(),
                self.cell(from)?.rank(),
            )),
        }
    }

    /// Structure relation: for every pair eps <= eps'' at sup-distance at
    /// most one, the sum over intermediate points of composed arrows
    /// vanishes.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        let pts = points(&self.size);
        let mut missing = Vec::new();
        for p in &pts {
            if !self.cells.contains_key(p) {
                missing.push(format!("{p:?}"));
            }
        }
        rep.check("every lattice point carries a complex", missing.is_empty(), missing.join(", "));
        if !missing.is_empty() {
            return rep;
        }

        let mut shape_bad = Vec::new();
        for ((from, to), mat) in &self.arrows {
            if !leq(from, to) || sup_dist(from, to) > 1 || from == to {
                shape_bad.push(format!("{from:?} -> {to:?} is not a unit-box arrow"));
                continue;
            }
            let (s, t) = (self.cells[from].rank(), self.cells[to].rank());
            if mat.cols != s || mat.rows != t {
                shape_bad.push(format!("{from:?} -> {to:?} has wrong dimensions"));
            }
        }
        rep.check("arrows respect the unit-box support", shape_bad.is_empty(), shape_bad.join("; "));
        if !shape_bad.is_empty() {
            return rep;
        }

        let mut violations = Vec::new();
        for a in &pts {
            for b in &pts {
                if !leq(a, b) || sup_dist(a, b) > 1 {
                    continue;
                }
                let mut acc = SparseMat::zero(self.cells[b].rank(), self.cells[a].rank());
                for mid in &pts {
                    if leq(a, mid) && leq(mid, b) {
                        let first = self.arrow(a, mid).unwrap();
                        let second = self.arrow(mid, b).unwrap();
                        if let Ok(piece) = second.compose(&first, false) {
                            acc = acc.add(&piece).unwrap();
                        }
                    }
                }
                if !acc.is_zero() {
                    violations.push(format!("relation fails for {a:?} <= {b:?}"));
                }
            }
        }
        rep.check(
            "hypercube structure relation (sum of double composites is zero)",
            violations.is_empty(),
            violations.join("; "),
        );
        rep
    }

    pub fn is_valid(&self) -> bool {
        self.validate().passed()
    }

    /// The boundary face at the given axis and index, as a hyperbox of one
    /// dimension less.
    pub fn face(&self, axis: usize, index: usize) -> Hyperbox {
        let mut size = self.size.clone();
        size.remove(axis);
        let mut out = Hyperbox::new(size);
        for (eps, c) in &self.cells {
            if eps[axis] == index {
                let mut e = eps.clone();
                e.remove(axis);
                out.set_cell(e, Arc::clone(c));
            }
        }
        for ((from, to), m) in &self.arrows {
            if from[axis] == index && to[axis] == index {
                let mut f = from.clone();
                f.remove(axis);
                let mut t = to.clone();
                t.remove(axis);
                out.set_arrow(f, t, m.clone());
            }
        }
        out
    }
}

/// Stack two hyperboxes along an axis. The facing boundary faces must be
/// identical (same cells and same arrows, compared structurally).
pub fn stack(h1: &Hyperbox, h2: &Hyperbox, axis: usize) -> Result<Hyperbox> {
    if h1.dim() != h2.dim() || axis >= h1.dim() {
        return Err(Error::shape("stack: dimension mismatch"));
    }
    for (i, (a, b)) in h1.size.iter().zip(&h2.size).enumerate() {
        if i != axis && a != b {
            return Err(Error::shape(format!("stack: size mismatch on axis {i}")));
        }
    }
    let d1 = h1.size[axis];
    let f1 = h1.face(axis, d1);
    let f2 = h2.face(axis, 0);
    if f1 != f2 {
        return Err(Error::invalid(
            "stack: facing boundary faces differ",
        ));
    }
    let mut size = h1.size.clone();
    size[axis] += h2.size[axis];
    let mut out = Hyperbox::new(size);
    for (eps, c) in &h1.cells {
        out.set_cell(eps.clone(), Arc::clone(c));
    }
    for (eps, c) in &h2.cells {
        let mut e = eps.clone();
        e[axis] += d1;
        out.set_cell(e, Arc::clone(c));
    }
    for ((from, to), m) in &h1.arrows {
        out.set_arrow(from.clone(), to.clone(), m.clone());
    }
    for ((from, to), m) in &h2.arrows {
        let mut f = from.clone();
        f[axis] += d1;
        let mut t = to.clone();
        t[axis] += d1;
        out.set_arrow(f, t, m.clone());
    }
    Ok(out)
}

/// Compress a hyperbox to a hypercube, one axis at a time. The default
/// axis order is last to first; the order used is returned with the box.
pub fn compress(h: &Hyperbox, axis_order: Option<Vec<usize>>) -> Result<(Hyperbox, Vec<usize>)> {
    let rep = h.validate();
    if !rep.passed() {
        return Err(Error::invalid(format!("compress of invalid hyperbox:\n{rep}")));
    }
    let order = match axis_order {
        Some(o) => {
            let mut seen = vec![false; h.dim()];
            for &a in &o {
                if a >= h.dim() || seen[a] {
                    return Err(Error::invalid("axis order is not a permutation"));
                }
                seen[a] = true;
            }
            if !seen.iter().all(|&s| s) {
                return Err(Error::invalid("axis order is not a permutation"));
            }
            o
        }
        None => (0..h.dim()).rev().collect(),
    };
    let mut cur = h.clone();
    for &axis in &order {
        cur = compress_axis(&cur, axis)?;
    }
    Ok((cur, order))
}

/// Collapse one axis to length one by composing the levelwise total maps
/// within each unit sub-box transverse to the axis.
fn compress_axis(h: &Hyperbox, axis: usize) -> Result<Hyperbox> {
    let d = h.size[axis];
    if d == 1 {
        return Ok(h.clone());
    }
    let mut size = h.size.clone();
    size[axis] = 1;
    let mut out = Hyperbox::new(size.clone());
    // Faces at axis levels 0 and d survive unchanged.
    for (eps, c) in &h.cells {
        if eps[axis] == 0 {
            out.set_cell(eps.clone(), Arc::clone(c));
        } else if eps[axis] == d {
            let mut e = eps.clone();
            e[axis] = 1;
            out.set_cell(e, Arc::clone(c));
        }
    }
    for ((from, to), m) in &h.arrows {
        if from[axis] == 0 && to[axis] == 0 {
            out.set_arrow(from.clone(), to.clone(), m.clone());
        } else if from[axis] == d && to[axis] == d {
            let mut f = from.clone();
            f[axis] = 1;
            let mut t = to.clone();
            t[axis] = 1;
            out.set_arrow(f, t, m.clone());
        }
    }
    // Other axes tile into unit segments; each sub-box is compressed by
    // function composition of its levelwise totals.
    let rest_axes: Vec<usize> = (0..h.dim()).filter(|&a| a != axis).collect();
    let mut corners_rest = vec![vec![]];
    for &a in &rest_axes {
        let mut next = Vec::new();
        for c in &corners_rest {
            for start in 0..h.size[a].max(1) {
                let mut q: Vec<usize> = c.clone();
                q.push(start);
                next.push(q);
            }
        }
        corners_rest = next;
    }
    for corner in corners_rest {
        compress_sub_box(h, axis, &rest_axes, &corner, &mut out)?;
    }
    Ok(out)
}

/// One unit sub-box: `corner` holds the lower index per non-axis
/// direction. Computes the long composite of the levelwise maps and
/// writes its blocks as arrows of the compressed box.
fn compress_sub_box(
    h: &Hyperbox,
    axis: usize,
    rest_axes: &[usize],
    corner: &[usize],
    out: &mut Hyperbox,
) -> Result<()> {
    let d = h.size[axis];
    // corners of the transverse unit cube, as full eps with axis value 0
    let n_rest = rest_axes.len();
    let mut rel_corners: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n_rest {
        let mut next = Vec::new();
        for c in &rel_corners {
            for b in 0..=1usize {
                let mut q = c.clone();
                q.push(b);
                next.push(q);
            }
        }
        rel_corners = next;
    }
    let full_eps = |rel: &[usize], level: usize| -> Eps {
        let mut e = vec![0; h.dim()];
        e[axis] = level;
        for (k, &a) in rest_axes.iter().enumerate() {
            e[a] = corner[k] + rel[k];
        }
        e
    };
    // basis offsets of the levelwise total complex
    let offsets_at = |level: usize| -> Result<(Vec<usize>, usize)> {
        let mut offs = Vec::with_capacity(rel_corners.len());
        let mut total = 0usize;
        for rel in &rel_corners {
            offs.push(total);
            total += h.cell(&full_eps(rel, level))?.rank();
        }
        Ok((offs, total))
    };
    // long composite of levelwise maps
    let mut composite: Option<SparseMat> = None;
    for level in 0..d {
        let (src_offs, src_total) = offsets_at(level)?;
        let (dst_offs, dst_total) = offsets_at(level + 1)?;
        let mut f = SparseMat::zero(dst_total, src_total);
        for (si, srel) in rel_corners.iter().enumerate() {
            for (ti, trel) in rel_corners.iter().enumerate() {
                if !leq(srel, trel) {
                    continue;
                }
                let from = full_eps(srel, level);
                let to = full_eps(trel, level + 1);
                let block = h.arrow(&from, &to)?;
                for (&(r, c), v) in block.iter() {
                    f.add_to(dst_offs[ti] + r, src_offs[si] + c, v)?;
                }
            }
        }
        composite = Some(match composite {
            None => f,
            Some(prev) => f.compose(&prev, false)?,
        });
    }
    let composite = composite.expect("d >= 2 here");
    // extract blocks into compressed arrows
    let (src_offs, _) = offsets_at(0)?;
    let (dst_offs, _) = offsets_at(d)?;
    for (si, srel) in rel_corners.iter().enumerate() {
        for (ti, trel) in rel_corners.iter().enumerate() {
            if !leq(srel, trel) {
                continue;
            }
            let from = full_eps(srel, 0);
            let mut to = full_eps(trel, d);
            to[axis] = 1;
            let rows = h.cell(&full_eps(trel, d))?.rank();
            let cols = h.cell(&full_eps(srel, 0))?.rank();
            let mut block = SparseMat::zero(rows, cols);
            for (&(r, c), v) in composite.iter() {
                if r >= dst_offs[ti]
                    && r < dst_offs[ti] + rows
                    && c >= src_offs[si]
                    && c < src_offs[si] + cols
                {
                    block.set(r - dst_offs[ti], c - src_offs[si], v.clone());
                }
            }
            let mut from_out = from.clone();
            from_out[axis] = 0;
            if !block.is_zero() {
                if let Some(existing) = out.arrows.get(&(from_out.clone(), to.clone())) {
                    debug_assert_eq!(
                        existing, &block,
                        "overlapping sub-boxes disagree on a shared face"
                    );
                }
                out.set_arrow(from_out, to, block);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Generator;
    use crate::ring::Coefficient;

    fn fu(name: &str, gr: i32) -> Arc<FreeComplex> {
        Arc::new(
            FreeComplex::new(
                Mode::U,
                vec![Generator::new(name, vec![gr])],
                SparseMat::zero(1, 1),
            )
            .unwrap(),
        )
    }

    fn one_by_one(c: &Coefficient) -> SparseMat {
        let mut m = SparseMat::zero(1, 1);
        m.set(0, 0, c.clone());
        m
    }

    /// 1-dimensional box of length n on single-generator complexes with
    /// maps multiplication by U^k.
    fn chain_box(powers: &[u32]) -> Hyperbox {
        let mut h = Hyperbox::new(vec![powers.len()]);
        for i in 0..=powers.len() {
            h.set_cell(vec![i], fu(&format!("x{i}"), 0));
        }
        for (i, &k) in powers.iter().enumerate() {
            h.set_arrow(
                vec![i],
                vec![i + 1],
                one_by_one(&Coefficient::u_pow(Mode::U, k)),
            );
        }
        h
    }

    #[test]
    fn one_dim_compression_is_function_composition() {
        let h = chain_box(&[1, 2, 3]);
        assert!(h.is_valid());
        let (c, order) = compress(&h, None).unwrap();
        assert_eq!(order, vec![0]);
        assert!(c.is_cube());
        let arrow = c.arrow(&vec![0], &vec![1]).unwrap();
        assert_eq!(
            arrow.get(0, 0).unwrap(),
            &Coefficient::u_pow(Mode::U, 6)
        );
    }

    #[test]
    fn compress_of_stack_is_composition_of_compressions() {
        let a = chain_box(&[1, 2]);
        let b = chain_box(&[3]);
        // rename b's cells so faces match a's right face
        let mut b2 = Hyperbox::new(vec![1]);
        b2.set_cell(vec![0], fu("x2", 0));
        b2.set_cell(vec![1], fu("y", 0));
        b2.set_arrow(vec![0], vec![1], one_by_one(&Coefficient::u_pow(Mode::U, 3)));
        drop(b);
        let stacked = stack(&a, &b2, 0).unwrap();
        assert!(stacked.is_valid());
        let (ca, _) = compress(&a, None).unwrap();
        let (cs, _) = compress(&stacked, None).unwrap();
        let left = ca.arrow(&vec![0], &vec![1]).unwrap();
        let right = b2.arrow(&vec![0], &vec![1]).unwrap();
        let expect = right.compose(&left, false).unwrap();
        assert_eq!(cs.arrow(&vec![0], &vec![1]).unwrap(), expect);
    }

    #[test]
    fn stack_rejects_mismatched_faces() {
        let a = chain_box(&[1]);
        let mut b = Hyperbox::new(vec![1]);
        b.set_cell(vec![0], fu("other", 2));
        b.set_cell(vec![1], fu("y", 0));
        assert!(stack(&a, &b, 0).is_err());
    }

    #[test]
    fn size_one_box_compresses_to_itself() {
        let h = chain_box(&[2]);
        let (c, _) = compress(&h, None).unwrap();
        assert_eq!(c, h);
    }

    #[test]
    fn commuting_square_without_diagonal_fails_when_faces_disagree() {
        // square with d = 0 cells, horizontal U, vertical U, but one
        // vertical replaced by U^2: relation fails
        let mut h = Hyperbox::new(vec![1, 1]);
        for (e, n) in [
            (vec![0, 0], "a"),
            (vec![1, 0], "b"),
            (vec![0, 1], "c"),
            (vec![1, 1], "d"),
        ] {
            h.set_cell(e, fu(n, 0));
        }
        let u = one_by_one(&Coefficient::u_pow(Mode::U, 1));
        let u2 = one_by_one(&Coefficient::u_pow(Mode::U, 2));
        h.set_arrow(vec![0, 0], vec![1, 0], u.clone());
        h.set_arrow(vec![0, 1], vec![1, 1], u.clone());
        h.set_arrow(vec![0, 0], vec![0, 1], u.clone());
        h.set_arrow(vec![1, 0], vec![1, 1], u2);
        assert!(!h.is_valid());
        h.set_arrow(vec![1, 0], vec![1, 1], u);
        assert!(h.is_valid());
    }
}
