//! Free graded chain complexes with sparse monomial differentials, and
//! chain maps between them (plain or skew-equivariant).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grading::{
    admissible_monomials, check_gr, diff_degree, gr_add, gr_len, gr_skew, phi_degree, psi_degree,
    render_half, zero_degree, Gr,
};
use crate::ring::{Coefficient, Mode};

/// Sparse matrix of coefficients. Entry keys are (row, col) = (target
/// generator, source generator); zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), Coefficient>,
}

impl SparseMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize, mode: Mode) -> Self {
        let mut m = SparseMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, Coefficient::one(mode));
        }
        m
    }

    pub fn set(&mut self, row: usize, col: usize, c: Coefficient) {
        debug_assert!(row < self.rows && col < self.cols);
        if c.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), c);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Coefficient> {
        self.entries.get(&(row, col))
    }

    pub fn add_to(&mut self, row: usize, col: usize, c: &Coefficient) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        let cur = match self.entries.remove(&(row, col)) {
            Some(prev) => prev.add(c)?,
            None => c.clone(),
        };
        self.set(row, col, cur);
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Coefficient)> {
        self.entries.iter()
    }

    pub fn add(&self, other: &SparseMat) -> Result<SparseMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(format!(
                "matrix sum {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (&(r, c), v) in &other.entries {
            out.add_to(r, c, v)?;
        }
        Ok(out)
    }

    /// self o rhs, conjugating (u <-> v) the right factor's entries when
    /// `conj_rhs` is set — the composition rule for skew left factors.
    pub fn compose(&self, rhs: &SparseMat, conj_rhs: bool) -> Result<SparseMat> {
        if self.cols != rhs.rows {
            return Err(Error::shape(format!(
                "matrix product {}x{} o {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut by_row: BTreeMap<usize, Vec<(usize, &Coefficient)>> = BTreeMap::new();
        for (&(r, c), v) in &rhs.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut out = SparseMat::zero(self.rows, rhs.cols);
        for (&(r, k), a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(c, b) in row {
                    let b = if conj_rhs { b.conj() } else { b.clone() };
                    out.add_to(r, c, &a.mul(&b)?)?;
                }
            }
        }
        Ok(out)
    }

    pub fn conj(&self) -> SparseMat {
        SparseMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|(&k, v)| (k, v.conj()))
                .collect(),
        }
    }

    /// Left-multiply every entry by a fixed coefficient (e.g. Q).
    pub fn scale(&self, c: &Coefficient) -> Result<SparseMat> {
        let mut out = SparseMat::zero(self.rows, self.cols);
        for (&(r, col), v) in &self.entries {
            out.add_to(r, col, &c.mul(v)?)?;
        }
        Ok(out)
    }

    /// Apply to a column vector of coefficients.
    pub fn apply(&self, v: &[Coefficient], conj_input: bool) -> Result<Vec<Coefficient>> {
        if v.len() != self.cols {
            return Err(Error::shape("vector length"));
        }
        let mode = v
            .iter()
            .map(|c| c.mode())
            .next()
            .unwrap_or(Mode::U);
        let mut out = vec![Coefficient::zero(mode); self.rows];
        for (&(r, c), a) in &self.entries {
            let x = if conj_input { v[c].conj() } else { v[c].clone() };
            out[r] = out[r].add(&a.mul(&x)?)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub gr: Gr,
}

impl Generator {
    pub fn new(name: impl Into<String>, gr: Gr) -> Self {
        Generator {
            name: name.into(),
            gr,
        }
    }
}

/// A finitely generated free graded chain complex with sparse monomial
/// differential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeComplex {
    pub mode: Mode,
    pub gens: Vec<Generator>,
    pub d: SparseMat,
}

impl FreeComplex {
    pub fn new(mode: Mode, gens: Vec<Generator>, d: SparseMat) -> Result<Self> {
        if d.rows != gens.len() || d.cols != gens.len() {
            return Err(Error::shape("differential dimensions"));
        }
        for g in &gens {
            check_gr(mode, &g.gr)?;
        }
        Ok(FreeComplex { mode, gens, d })
    }

    pub fn empty(mode: Mode) -> Self {
        FreeComplex {
            mode,
            gens: vec![],
            d: SparseMat::zero(0, 0),
        }
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// The differential as a chain map (plain, degree -1).
    pub fn differential(self: &Arc<Self>) -> ChainMap {
        ChainMap {
            source: Arc::clone(self),
            target: Arc::clone(self),
            deg: diff_degree(self.mode),
            skew: false,
            mat: self.d.clone(),
        }
    }

    /// Diagnostic validation: d^2 = 0 and homogeneity of every entry.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        let mut names_ok = true;
        for (i, g) in self.gens.iter().enumerate() {
            if g.name.is_empty() || self.gens[..i].iter().any(|h| h.name == g.name) {
                names_ok = false;
            }
        }
        rep.check("generator names unique and nonempty", names_ok, String::new());

        let ddeg = diff_degree(self.mode);
        let mut bad_entries = Vec::new();
        for (&(r, c), v) in self.d.iter() {
            if v.mode() != self.mode {
                bad_entries.push(format!("entry ({},{}) has mode {}", r, c, v.mode()));
                continue;
            }
            let allowed =
                admissible_monomials(self.mode, &self.gens[c].gr, &self.gens[r].gr, &ddeg);
            for m in v.terms() {
                if !allowed.contains(m) {
                    bad_entries.push(format!(
                        "d[{} -> {}] term {} violates grading homogeneity",
                        self.gens[c].name,
                        self.gens[r].name,
                        Coefficient::from_monomial(self.mode, m.clone()).render()
                    ));
                }
            }
        }
        rep.check(
            "differential homogeneous for the grading",
            bad_entries.is_empty(),
            bad_entries.join("; "),
        );

        match self.d.compose(&self.d, false) {
            Ok(sq) => {
                let mut bad = Vec::new();
                for (&(r, c), v) in sq.iter() {
                    if !v.is_zero() {
                        bad.push(format!(
                            "(d o d)[{} -> {}] = {}",
                            self.gens[c].name,
                            self.gens[r].name,
                            v.render()
                        ));
                    }
                }
                rep.check("d o d = 0", bad.is_empty(), bad.join("; "));
            }
            Err(e) => rep.check("d o d = 0", false, e.to_string()),
        }
        rep
    }

    pub fn is_valid(&self) -> bool {
        self.validate().passed()
    }
}

/// A chain map between free complexes. `skew` marks skew-equivariant maps
/// (u and v exchanged when coefficients move past the map); the stored
/// matrix is plain, the conjugation is applied during composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    pub source: Arc<FreeComplex>,
    pub target: Arc<FreeComplex>,
    pub deg: Gr,
    pub skew: bool,
    pub mat: SparseMat,
}

impl ChainMap {
    pub fn new(
        source: Arc<FreeComplex>,
        target: Arc<FreeComplex>,
        deg: Gr,
        skew: bool,
        mat: SparseMat,
    ) -> Result<Self> {
        if mat.rows != target.rank() || mat.cols != source.rank() {
            return Err(Error::shape(format!(
                "map matrix {}x{} between complexes of rank {} and {}",
                mat.rows,
                mat.cols,
                source.rank(),
                target.rank()
            )));
        }
        if source.mode != target.mode {
            return Err(Error::ModeMismatch(source.mode, target.mode));
        }
        if deg.len() != gr_len(source.mode) {
            return Err(Error::grading("degree vector length"));
        }
        if skew && !source.mode.allows_v() {
            return Err(Error::invalid(
                "skew maps only exist in two-variable mode",
            ));
        }
        Ok(ChainMap {
            source,
            target,
            deg,
            skew,
            mat,
        })
    }

    pub fn identity(c: &Arc<FreeComplex>) -> Self {
        ChainMap {
            source: Arc::clone(c),
            target: Arc::clone(c),
            deg: zero_degree(c.mode),
            skew: false,
            mat: SparseMat::identity(c.rank(), c.mode),
        }
    }

    pub fn zero(source: &Arc<FreeComplex>, target: &Arc<FreeComplex>, deg: Gr, skew: bool) -> Self {
        ChainMap {
            source: Arc::clone(source),
            target: Arc::clone(target),
            deg,
            skew,
            mat: SparseMat::zero(target.rank(), source.rank()),
        }
    }

    pub fn mode(&self) -> Mode {
        self.source.mode
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }

    pub fn same_shape(&self, other: &ChainMap) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.deg == other.deg
            && self.skew == other.skew
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        if !self.same_shape(other) {
            return Err(Error::shape(
                "sum of maps with different source/target/degree/equivariance",
            ));
        }
        Ok(ChainMap {
            source: Arc::clone(&self.source),
            target: Arc::clone(&self.target),
            deg: self.deg.clone(),
            skew: self.skew,
            mat: self.mat.add(&other.mat)?,
        })
    }

    /// self o rhs.
    pub fn compose(&self, rhs: &ChainMap) -> Result<ChainMap> {
        if rhs.target != self.source {
            return Err(Error::shape("composition source/target mismatch"));
        }
        let rhs_deg = if self.skew {
            gr_skew(self.mode(), &rhs.deg)
        } else {
            rhs.deg.clone()
        };
        Ok(ChainMap {
            source: Arc::clone(&rhs.source),
            target: Arc::clone(&self.target),
            deg: gr_add(&self.deg, &rhs_deg),
            skew: self.skew ^ rhs.skew,
            mat: self.mat.compose(&rhs.mat, self.skew)?,
        })
    }

    /// d_target o f + f o d_source; zero exactly when f is a chain map.
    pub fn boundary(&self) -> Result<ChainMap> {
        let df = self.target.d.compose(&self.mat, false)?;
        let fd = self.mat.compose(&self.source.d, self.skew)?;
        Ok(ChainMap {
            source: Arc::clone(&self.source),
            target: Arc::clone(&self.target),
            deg: gr_add(&self.deg, &diff_degree(self.mode())),
            skew: self.skew,
            mat: df.add(&fd)?,
        })
    }

    pub fn is_chain_map(&self) -> bool {
        self.boundary().map(|b| b.is_zero()).unwrap_or(false)
    }

    /// Homogeneity check: every entry term admissible for this degree.
    pub fn is_homogeneous(&self) -> bool {
        for (&(r, c), v) in self.mat.iter() {
            let src = if self.skew {
                gr_skew(self.mode(), &self.source.gens[c].gr)
            } else {
                self.source.gens[c].gr.clone()
            };
            let allowed =
                admissible_monomials(self.mode(), &src, &self.target.gens[r].gr, &self.deg);
            for m in v.terms() {
                if !allowed.contains(m) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for ChainMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mat.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(r, c), v) in self.mat.iter() {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(
                f,
                "{} -> ({})*{}",
                self.source.gens[c].name,
                v.render(),
                self.target.gens[r].name
            )?;
        }
        Ok(())
    }
}

/// Formal derivative of the differential with respect to u_pair.
pub fn phi(c: &Arc<FreeComplex>, pair: usize) -> Result<ChainMap> {
    if pair >= c.mode.pairs() {
        return Err(Error::invalid(format!("no variable pair {pair}")));
    }
    let mut mat = SparseMat::zero(c.rank(), c.rank());
    for (&(r, col), v) in c.d.iter() {
        for m in v.terms() {
            if let Some(dm) = m.du(pair) {
                let mut one = Coefficient::zero(c.mode);
                one.toggle(dm);
                mat.add_to(r, col, &one)?;
            }
        }
    }
    ChainMap::new(
        Arc::clone(c),
        Arc::clone(c),
        phi_degree(c.mode, pair),
        false,
        mat,
    )
}

/// Formal derivative of the differential with respect to v_pair
/// (two-variable mode only).
pub fn psi(c: &Arc<FreeComplex>, pair: usize) -> Result<ChainMap> {
    if !c.mode.allows_v() {
        return Err(Error::invalid(format!(
            "psi requested in single-variable mode {}",
            c.mode
        )));
    }
    if pair >= c.mode.pairs() {
        return Err(Error::invalid(format!("no variable pair {pair}")));
    }
    let mut mat = SparseMat::zero(c.rank(), c.rank());
    for (&(r, col), v) in c.d.iter() {
        for m in v.terms() {
            if let Some(dm) = m.dv(pair) {
                let mut one = Coefficient::zero(c.mode);
                one.toggle(dm);
                mat.add_to(r, col, &one)?;
            }
        }
    }
    ChainMap::new(
        Arc::clone(c),
        Arc::clone(c),
        psi_degree(c.mode, pair),
        false,
        mat,
    )
}

/// Mapping cone of a verified chain map. Source generators keep their
/// gradings; target generators are shifted so the connecting block has
/// the degree of a differential.
pub fn mapping_cone(f: &ChainMap) -> Result<FreeComplex> {
    if !f.is_chain_map() {
        return Err(Error::invalid("cone of a map that is not a chain map"));
    }
    if f.skew {
        return Err(Error::invalid("cone of a skew map is not supported"));
    }
    let mode = f.mode();
    let shift = crate::grading::gr_sub(&diff_degree(mode), &f.deg);
    let n_src = f.source.rank();
    let n_tgt = f.target.rank();
    let mut gens = Vec::with_capacity(n_src + n_tgt);
    gens.extend(f.source.gens.iter().cloned());
    for g in &f.target.gens {
        let mut name = g.name.clone();
        while gens.iter().any(|h| h.name == name) {
            name.push('\'');
        }
        gens.push(Generator::new(name, gr_add(&g.gr, &shift)));
    }
    let mut d = SparseMat::zero(n_src + n_tgt, n_src + n_tgt);
    for (&(r, c), v) in f.source.d.iter() {
        d.set(r, c, v.clone());
    }
    for (&(r, c), v) in f.target.d.iter() {
        d.set(n_src + r, n_src + c, v.clone());
    }
    for (&(r, c), v) in f.mat.iter() {
        d.add_to(n_src + r, c, v)?;
    }
    FreeComplex::new(mode, gens, d)
}

/// Outcome of a diagnostic validation pass: one line per check.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub lines: Vec<CheckLine>,
}

#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport::default()
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.lines.push(CheckLine {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.lines.extend(other.lines);
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(
                f,
                "[{}] {}{}",
                if line.passed { "ok" } else { "FAIL" },
                line.name,
                if line.detail.is_empty() {
                    String::new()
                } else {
                    format!(": {}", line.detail)
                }
            )?;
        }
        Ok(())
    }
}

/// Pretty-print a generator with its grading for reports.
pub fn show_gen(mode: Mode, g: &Generator) -> String {
    match mode {
        Mode::U | Mode::UQ => format!("{} (gr {})", g.name, render_half(g.gr[0])),
        Mode::Uv(_) => format!(
            "{} (gr_u {}, gr_v {})",
            g.name,
            render_half(g.gr[0]),
            render_half(g.gr[1])
        ),
    }
}
