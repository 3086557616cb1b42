//! Brute-force and transfer-matrix evaluation of the DWBC partition sum.
//!
//! Edge arrows are booleans: horizontal `true` = pointing right, vertical
//! `true` = pointing up. Rows are numbered from the top.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logscaled::LogScaledValue;
use crate::params::VertexWeights;
use crate::scalar::{ComplexFn, Real};

pub const MAX_ENUMERATION_N: usize = 6;
pub const MAX_DP_N: usize = 14;

/// Vertex type `1..=6` for the arrows `(left, right, top, bottom)`, or
/// `None` if the ice rule is violated.
///
/// | type | left | right | top | bottom |
/// |------|------|-------|-----|--------|
/// | 1    | →    | →     | ↑   | ↑      |
/// | 2    | ←    | ←     | ↓   | ↓      |
/// | 3    | →    | →     | ↓   | ↓      |
/// | 4    | ←    | ←     | ↑   | ↑      |
/// | 5    | →    | ←     | ↑   | ↓      |
/// | 6    | ←    | →     | ↓   | ↑      |
pub fn vertex_type(left: bool, right: bool, top: bool, bottom: bool) -> Option<usize> {
    match (left, right, top, bottom) {
        (true, true, true, true) => Some(1),
        (false, false, false, false) => Some(2),
        (true, true, false, false) => Some(3),
        (false, false, true, true) => Some(4),
        (true, false, true, false) => Some(5),
        (false, true, false, true) => Some(6),
        _ => None,
    }
}

/// Bottom arrow forced by the ice rule, if any.
fn forced_bottom(left: bool, right: bool, top: bool) -> Option<bool> {
    let b = right as i8 + top as i8 - left as i8;
    match b {
        0 => Some(false),
        1 => Some(true),
        _ => None,
    }
}

fn check_n(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::SizeLimit {
            what,
            got: n,
            max,
        });
    }
    Ok(())
}

/// One DWBC arrow configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeConfig {
    n: usize,
    /// `h_edges[row][col]`, `col = 0..=N`; column 0 is the left boundary.
    pub h_edges: Vec<Vec<bool>>,
    /// `v_edges[level][col]`, `level = 0..=N`; level 0 is the top boundary.
    pub v_edges: Vec<Vec<bool>>,
}

impl LatticeConfig {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn vertex(&self, row: usize, col: usize) -> Option<usize> {
        vertex_type(
            self.h_edges[row][col],
            self.h_edges[row][col + 1],
            self.v_edges[row][col],
            self.v_edges[row + 1][col],
        )
    }

    /// Counts `(n1, …, n6)`; panics on an ice-rule violation.
    pub fn type_counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for r in 0..self.n {
            for c in 0..self.n {
                let t = self.vertex(r, c).expect("ice rule violated");
                counts[t - 1] += 1;
            }
        }
        counts
    }

    pub fn satisfies_dwbc(&self) -> bool {
        let n = self.n;
        self.v_edges[0].iter().all(|&u| !u)
            && self.v_edges[n].iter().all(|&u| u)
            && self.h_edges.iter().all(|row| !row[0] && row[n])
    }

    pub fn satisfies_ice_rule(&self) -> bool {
        (0..self.n).all(|r| (0..self.n).all(|c| self.vertex(r, c).is_some()))
    }

    pub fn weight<T: Real>(&self, w: &VertexWeights<T>) -> Complex<T> {
        let counts = self.type_counts();
        let mut acc = Complex::one();
        for (k, &m) in counts.iter().enumerate() {
            acc = acc * w.w[k].cpowi(m as i64);
        }
        acc
    }

    /// ASCII arrow grid: edge rows of `^`/`v` alternate with vertex rows of
    /// `<`/`>` separated by `+`.
    pub fn to_ascii(&self) -> String {
        let n = self.n;
        let mut out = String::new();
        let vline = |level: usize| -> String {
            let cells: Vec<&str> = self.v_edges[level]
                .iter()
                .map(|&u| if u { "^" } else { "v" })
                .collect();
            format!("  {}\n", cells.join("   "))
        };
        for r in 0..n {
            out.push_str(&vline(r));
            let mut line = String::new();
            for c in 0..=n {
                line.push(if self.h_edges[r][c] { '>' } else { '<' });
                if c < n {
                    line.push_str(" + ");
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str(&vline(n));
        out
    }

    /// Token grid for JSON dumps.
    pub fn to_tokens(&self) -> ArrowGrid {
        let tok = |b: bool, t: &'static str, f: &'static str| if b { t } else { f };
        ArrowGrid {
            n: self.n,
            horizontal: self
                .h_edges
                .iter()
                .map(|row| row.iter().map(|&b| tok(b, ">", "<").to_string()).collect())
                .collect(),
            vertical: self
                .v_edges
                .iter()
                .map(|row| row.iter().map(|&b| tok(b, "^", "v").to_string()).collect())
                .collect(),
            types: (0..self.n)
                .map(|r| (0..self.n).map(|c| self.vertex(r, c).unwrap_or(0)).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArrowGrid {
    pub n: usize,
    pub horizontal: Vec<Vec<String>>,
    pub vertical: Vec<Vec<String>>,
    pub types: Vec<Vec<usize>>,
}

/// Depth-first walk over the vertices in row-major order, trying the
/// rightward arrow first.
pub struct ConfigIter {
    n: usize,
    h: Vec<Vec<bool>>,
    v: Vec<Vec<bool>>,
    // choice stack: one entry per vertex, the right-arrow value tried
    stack: Vec<bool>,
    started: bool,
    done: bool,
}

impl ConfigIter {
    fn pos(&self, k: usize) -> (usize, usize) {
        (k / self.n, k % self.n)
    }

    /// Tries to place vertex `k` with right arrow `right`.
    fn place(&mut self, k: usize, right: bool) -> bool {
        let n = self.n;
        let (r, c) = self.pos(k);
        if c == n - 1 && !right {
            return false;
        }
        let left = self.h[r][c];
        let top = self.v[r][c];
        let Some(bottom) = forced_bottom(left, right, top) else {
            return false;
        };
        if r == n - 1 && !bottom {
            return false;
        }
        self.h[r][c + 1] = right;
        self.v[r + 1][c] = bottom;
        true
    }

    /// Extends the stack greedily from its current length; backtracks on
    /// failure. Returns false when the search space is exhausted.
    fn descend(&mut self) -> bool {
        let total = self.n * self.n;
        loop {
            if self.stack.len() == total {
                return true;
            }
            let k = self.stack.len();
            if self.place(k, true) {
                self.stack.push(true);
                continue;
            }
            if self.place(k, false) {
                self.stack.push(false);
                continue;
            }
            if !self.backtrack() {
                return false;
            }
        }
    }

    /// Switches the deepest `true` choice that admits `false`.
    fn backtrack(&mut self) -> bool {
        while let Some(choice) = self.stack.pop() {
            if choice {
                let k = self.stack.len();
                if self.place(k, false) {
                    self.stack.push(false);
                    return true;
                }
            }
        }
        false
    }
}

impl Iterator for ConfigIter {
    type Item = LatticeConfig;

    fn next(&mut self) -> Option<LatticeConfig> {
        if self.done {
            return None;
        }
        let ok = if !self.started {
            self.started = true;
            self.descend()
        } else {
            self.backtrack() && self.descend()
        };
        if !ok {
            self.done = true;
            return None;
        }
        Some(LatticeConfig {
            n: self.n,
            h_edges: self.h.clone(),
            v_edges: self.v.clone(),
        })
    }
}

pub fn config_iterator(n: usize) -> Result<ConfigIter> {
    check_n("enumeration lattice size", n, MAX_ENUMERATION_N)?;
    let mut h = vec![vec![false; n + 1]; n];
    for row in h.iter_mut() {
        row[n] = true;
    }
    let mut v = vec![vec![false; n]; n + 1];
    v[n] = vec![true; n];
    Ok(ConfigIter {
        n,
        h,
        v,
        stack: Vec::with_capacity(n * n),
        started: false,
        done: false,
    })
}

#[derive(Clone, Debug)]
pub struct EnumerationResult<T> {
    pub config_count: u64,
    pub z_value: LogScaledValue<T>,
    /// Number of configurations for each distinct `(n1, …, n6)`, sorted.
    pub type_histogram: Vec<([usize; 6], u64)>,
}

pub fn enumerate_configs<T: Real>(n: usize, w: &VertexWeights<T>) -> Result<EnumerationResult<T>> {
    let mut z = Complex::<T>::zero();
    let mut count = 0u64;
    let mut hist = std::collections::BTreeMap::<[usize; 6], u64>::new();
    for cfg in config_iterator(n)? {
        let counts = cfg.type_counts();
        debug_assert_eq!(counts.iter().sum::<usize>(), n * n);
        debug_assert_eq!(counts[5] as i64 - counts[4] as i64, n as i64);
        *hist.entry(counts).or_default() += 1;
        z = z + cfg.weight(w);
        count += 1;
    }
    Ok(EnumerationResult {
        config_count: count,
        z_value: LogScaledValue::from_complex(&z),
        type_histogram: hist.into_iter().collect(),
    })
}

/// Row-transfer evaluation with a broken profile: the state holds the `N`
/// vertical arrows under the processed part of the row and above the rest,
/// plus the current horizontal arrow.
pub fn partition_dp<T: Real>(n: usize, w: &VertexWeights<T>) -> Result<LogScaledValue<T>> {
    check_n("transfer-matrix lattice size", n, MAX_DP_N)?;
    let width = 1usize << n;
    // index = profile | (horizontal << n)
    let mut cur = vec![Complex::<T>::zero(); 2 * width];
    let mut next = cur.clone();
    let mut log_scale = T::zero();
    cur[0] = Complex::one();
    for r in 0..n {
        // start of row: left boundary arrow points left
        for s in width..2 * width {
            cur[s] = Complex::zero();
        }
        for c in 0..n {
            for x in next.iter_mut() {
                *x = Complex::zero();
            }
            let bit = 1usize << c;
            for (s, val) in cur.iter().enumerate() {
                if val.is_zero() {
                    continue;
                }
                let profile = s & (width - 1);
                let left = s >= width;
                let top = profile & bit != 0;
                for right in [true, false] {
                    if c == n - 1 && !right {
                        continue;
                    }
                    let Some(bottom) = forced_bottom(left, right, top) else {
                        continue;
                    };
                    if r == n - 1 && !bottom {
                        continue;
                    }
                    let t = vertex_type(left, right, top, bottom).expect("ice rule");
                    let np = if bottom { profile | bit } else { profile & !bit };
                    let ns = np | if right { width } else { 0 };
                    next[ns] = next[ns].clone() + val.clone() * w.w[t - 1].clone();
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        // end of row: right arrow is forced; fold it back to the left state
        for s in 0..width {
            let v = cur[s + width].clone();
            cur[s] = v;
            cur[s + width] = Complex::zero();
        }
        let m = cur
            .iter()
            .map(|z| z.cabs())
            .fold(T::zero(), |a, b| a.max_of(b));
        if m.is_zero() {
            return Ok(LogScaledValue::zero());
        }
        log_scale = log_scale + m.ln();
        for z in cur.iter_mut() {
            *z = z.rscale(&(T::one() / m.clone()));
        }
    }
    let z = cur[width - 1].clone();
    Ok(LogScaledValue::from_complex(&z) * LogScaledValue::from_parts(log_scale, Complex::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cf;

    #[test]
    fn lookup_covers_exactly_six_tuples() {
        let mut found = Vec::new();
        for bits in 0..16u8 {
            let t = (bits & 1 != 0, bits & 2 != 0, bits & 4 != 0, bits & 8 != 0);
            if let Some(k) = vertex_type(t.0, t.1, t.2, t.3) {
                // two in, two out: in = left→, right←, top↓, bottom↑
                let ins = t.0 as u8 + !t.1 as u8 + !t.2 as u8 + t.3 as u8;
                assert_eq!(ins, 2);
                found.push(k);
            }
        }
        found.sort();
        assert_eq!(found, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn single_vertex_is_type_six() {
        let cfgs: Vec<_> = config_iterator(1).unwrap().collect();
        assert_eq!(cfgs.len(), 1);
        assert_eq!(cfgs[0].type_counts(), [0, 0, 0, 0, 0, 1]);
        let w = VertexWeights::<f64>::new(std::array::from_fn(|k| cf(k as f64 + 1.0, 0.5)));
        let z = partition_dp(1, &w).unwrap().to_complex();
        assert!((z - cf(6.0, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn counts_match_asm_numbers() {
        let ones = VertexWeights::<f64>::from_real([1.0; 6]);
        for (n, expected) in [(1, 1u64), (2, 2), (3, 7), (4, 42), (5, 429)] {
            let res = enumerate_configs(n, &ones).unwrap();
            assert_eq!(res.config_count, expected);
            assert!((res.z_value.to_complex().re - expected as f64).abs() < 1e-9);
        }
        let dp = partition_dp(6, &ones).unwrap().to_complex();
        assert!((dp.re - 7436.0).abs() < 1e-8);
    }

    #[test]
    fn every_config_is_valid() {
        for cfg in config_iterator(4).unwrap() {
            assert!(cfg.satisfies_dwbc());
            assert!(cfg.satisfies_ice_rule());
            let k = cfg.type_counts();
            assert_eq!(k[5] - k[4], 4);
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(config_iterator(7), Err(Error::SizeLimit { .. })));
        let ones = VertexWeights::<f64>::from_real([1.0; 6]);
        assert!(matches!(partition_dp(15, &ones), Err(Error::SizeLimit { .. })));
        assert!(partition_dp(0, &ones).is_err());
    }

    #[test]
    fn ascii_dump_shape() {
        let cfg = config_iterator(2).unwrap().next().unwrap();
        let s = cfg.to_ascii();
        assert_eq!(s.lines().count(), 5);
        assert!(s.lines().next().unwrap().contains('v'));
        assert!(s.lines().last().unwrap().contains('^'));
    }
}
