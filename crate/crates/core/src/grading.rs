//! Grading vectors.
//!
//! All gradings are stored doubled, so half-integer gradings stay exact.
//! Layout per mode:
//!   U / UQ  — `[2*maslov]`
//!   Uv(l)   — `[2*gr_u, 2*gr_v, 2*A_1, ..., 2*A_l]`
//! where `gr_u`/`gr_v` are the global u- and v-gradings and `A_i` the
//! per-pair Alexander gradings, with `sum(2*A_i) = gr_u - gr_v`.

use crate::error::{Error, Result};
use crate::ring::{Mode, Monomial};

pub type Gr = Vec<i32>;

pub fn gr_len(mode: Mode) -> usize {
    match mode {
        Mode::U | Mode::UQ => 1,
        Mode::Uv(l) => 2 + l as usize,
    }
}

pub fn zero_degree(mode: Mode) -> Gr {
    vec![0; gr_len(mode)]
}

/// Degree of the differential: Maslov -1, or (-1, -1) with Alexander
/// gradings preserved.
pub fn diff_degree(mode: Mode) -> Gr {
    match mode {
        Mode::U | Mode::UQ => vec![-2],
        Mode::Uv(l) => {
            let mut d = vec![0; 2 + l as usize];
            d[0] = -2;
            d[1] = -2;
            d
        }
    }
}

/// Degree of the formal derivative in u_pair of the differential.
pub fn phi_degree(mode: Mode, pair: usize) -> Gr {
    match mode {
        Mode::U | Mode::UQ => vec![2],
        Mode::Uv(l) => {
            let mut d = vec![0; 2 + l as usize];
            d[0] = 2;
            d[1] = -2;
            d[2 + pair] = 2;
            d
        }
    }
}

/// Degree of the formal derivative in v_pair of the differential.
pub fn psi_degree(mode: Mode, pair: usize) -> Gr {
    match mode {
        Mode::Uv(l) => {
            let mut d = vec![0; 2 + l as usize];
            d[0] = -2;
            d[1] = 2;
            d[2 + pair] = -2;
            d
        }
        _ => unreachable!("psi only exists in two-variable mode"),
    }
}

pub fn gr_add(a: &Gr, b: &Gr) -> Gr {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn gr_sub(a: &Gr, b: &Gr) -> Gr {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn gr_neg(a: &Gr) -> Gr {
    a.iter().map(|x| -x).collect()
}

/// The grading a skew map reads off its source: u/v exchanged, Alexander
/// gradings negated.
pub fn gr_skew(mode: Mode, g: &Gr) -> Gr {
    match mode {
        Mode::U | Mode::UQ => g.clone(),
        Mode::Uv(_) => {
            let mut out = g.clone();
            out.swap(0, 1);
            for a in &mut out[2..] {
                *a = -*a;
            }
            out
        }
    }
}

/// Validate a grading vector for the mode; for Uv the Alexander gradings
/// must satisfy sum(2 A_i) = gr_u - gr_v.
pub fn check_gr(mode: Mode, g: &Gr) -> Result<()> {
    if g.len() != gr_len(mode) {
        return Err(Error::grading(format!(
            "grading vector of length {} in mode {mode}",
            g.len()
        )));
    }
    if let Mode::Uv(_) = mode {
        // A_i = (gr_u - gr_v)/2 summed over pairs, all stored doubled
        let alex_sum: i32 = g[2..].iter().sum();
        if 2 * alex_sum != g[0] - g[1] {
            return Err(Error::grading(format!(
                "Alexander gradings {:?} inconsistent with (gr_u, gr_v) = ({}, {})",
                &g[2..],
                g[0],
                g[1]
            )));
        }
    }
    Ok(())
}

/// Render a doubled grading as an exact string: "3", "-1/2", ...
pub fn render_half(doubled: i32) -> String {
    if doubled % 2 == 0 {
        format!("{}", doubled / 2)
    } else {
        format!("{doubled}/2")
    }
}

pub fn parse_half(s: &str) -> Result<i32> {
    let s = s.trim();
    if let Some(num) = s.strip_suffix("/2") {
        num.parse::<i32>()
            .map_err(|_| Error::Parse(format!("bad grading `{s}`")))
    } else {
        s.parse::<i32>()
            .map(|v| 2 * v)
            .map_err(|_| Error::Parse(format!("bad grading `{s}`")))
    }
}

/// All monomials a map entry may carry, given source and target gradings
/// and the map's degree. In modes U, UQ and Uv(1) the answer has at most
/// one element; for links the distribution of the total u- and v-powers
/// over the pairs may have several solutions.
///
/// `src_gr` must already be skew-adjusted (see [`gr_skew`]) for skew maps.
pub fn admissible_monomials(mode: Mode, src_gr: &Gr, dst_gr: &Gr, deg: &Gr) -> Vec<Monomial> {
    match mode {
        Mode::U | Mode::UQ => {
            // gr(dst) + deg(monomial) = gr(src) + deg(map), with the
            // monomial dropping 4a + 2q in doubled units.
            let t = dst_gr[0] - src_gr[0] - deg[0];
            if t < 0 || t % 2 != 0 {
                return vec![];
            }
            let q = (t / 2) % 2 == 1;
            if q && !mode.allows_q() {
                return vec![];
            }
            let rem = t - if q { 2 } else { 0 };
            if rem % 4 != 0 {
                return vec![];
            }
            let mut m = Monomial::u_pow(mode, (rem / 4) as u32);
            m.q = q;
            vec![m]
        }
        Mode::Uv(l) => {
            let l = l as usize;
            let ta = dst_gr[0] - src_gr[0] - deg[0];
            let tb = dst_gr[1] - src_gr[1] - deg[1];
            if ta < 0 || tb < 0 || ta % 4 != 0 || tb % 4 != 0 {
                return vec![];
            }
            let total_a = (ta / 4) as i64;
            let total_b = (tb / 4) as i64;
            // b_i - a_i per pair, from the Alexander gradings.
            let mut diffs = Vec::with_capacity(l);
            for i in 0..l {
                let d = src_gr[2 + i] + deg[2 + i] - dst_gr[2 + i];
                if d % 2 != 0 {
                    return vec![];
                }
                diffs.push((d / 2) as i64);
            }
            if total_a + diffs.iter().sum::<i64>() != total_b {
                return vec![];
            }
            let mut out = Vec::new();
            let mut a = vec![0i64; l];
            enumerate_exponents(mode, total_a, &diffs, 0, &mut a, &mut out);
            out
        }
    }
}

fn enumerate_exponents(
    mode: Mode,
    remaining: i64,
    diffs: &[i64],
    i: usize,
    a: &mut Vec<i64>,
    out: &mut Vec<Monomial>,
) {
    let l = diffs.len();
    if i == l {
        if remaining != 0 {
            return;
        }
        let mut m = Monomial::one(mode);
        for (p, &ai) in a.iter().enumerate() {
            let bi = ai + diffs[p];
            debug_assert!(bi >= 0);
            m.uv[p] = (ai as u32, bi as u32);
        }
        out.push(m);
        return;
    }
    // a_i >= 0 and b_i = a_i + diff_i >= 0
    let lo = 0.max(-diffs[i]);
    for ai in lo..=remaining {
        a[i] = ai;
        enumerate_exponents(mode, remaining - ai, diffs, i + 1, a, out);
    }
    a[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_monomial_single_variable() {
        // d x = U y forces gr(x) = gr(y) - 1 (doubled -2)
        let got = admissible_monomials(Mode::U, &vec![-2], &vec![0], &diff_degree(Mode::U));
        assert_eq!(got, vec![Monomial::u_pow(Mode::U, 1)]);
        // a grading-preserving differential entry needs Q
        assert!(admissible_monomials(Mode::U, &vec![0], &vec![0], &diff_degree(Mode::U)).is_empty());
        let got = admissible_monomials(Mode::UQ, &vec![0], &vec![0], &diff_degree(Mode::UQ));
        assert_eq!(got.len(), 1);
        assert!(got[0].q);
        assert_eq!(got[0].uv[0].0, 0);
    }

    #[test]
    fn forced_monomial_two_variable() {
        // trefoil edge: entry u from b (gr (-1,-1,0)) to a (gr (0,-2,1))
        let got = admissible_monomials(
            Mode::Uv(1),
            &vec![-2, -2, 0],
            &vec![0, -4, 2],
            &diff_degree(Mode::Uv(1)),
        );
        assert_eq!(got, vec![Monomial::uv_pow(Mode::Uv(1), 0, 1, 0)]);
    }

    #[test]
    fn link_mode_can_have_several_admissible_monomials() {
        // two pairs: a degree-0 entry into a generator sitting (2,2)
        // higher may carry u1*v1 or u2*v2
        let src = vec![0, 0, 0, 0];
        let dst = vec![4, 4, 0, 0];
        let deg = vec![0, 0, 0, 0];
        let got = admissible_monomials(Mode::Uv(2), &src, &dst, &deg);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn half_rendering() {
        assert_eq!(render_half(3), "3/2");
        assert_eq!(render_half(-4), "-2");
        assert_eq!(parse_half("3/2").unwrap(), 3);
        assert_eq!(parse_half("-2").unwrap(), -4);
    }
}
