//! Equations of motion of the truncated density-matrix hierarchy.

use std::io::Write;

use num_complex::Complex64;

use super::{element_count, index, SystemParams};
use crate::error::{Error, Result};

/// Full generator `dρ/dt = L ρ` in coordinate form over all `4(N+1)²`
/// elements.
#[derive(Debug, Clone)]
pub struct Generator {
    pub n_max: usize,
    pub dim: usize,
    /// `(row, col, value)`, rows sorted; duplicate coordinates already merged.
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl Generator {
    pub fn apply(&self, rho: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.entries {
            out[r] += v * rho[c];
        }
        out
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries
            .iter()
            .find(|&&(r, c, _)| r == row && c == col)
            .map(|e| e.2)
            .unwrap_or_default()
    }
}

/// Linear system obtained by eliminating `ρ_{0,1;0,1}` through the trace:
/// `matrix · x = rhs`, where `x` holds every other element in index order
/// (position `k - 1` for full index `k`).
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub n_max: usize,
    pub dim: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
    pub rhs: Vec<Complex64>,
}

impl ReducedSystem {
    /// Writes the matrix as `row col re im` lines followed by the
    /// inhomogeneity as `row rhs re im` lines.
    pub fn write_coordinates<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# dim {} n_max {}", self.dim, self.n_max)?;
        for &(r, c, v) in &self.entries {
            writeln!(out, "{r} {c} {:e} {:e}", v.re, v.im)?;
        }
        for (r, v) in self.rhs.iter().enumerate() {
            if *v != Complex64::new(0.0, 0.0) {
                writeln!(out, "{r} rhs {:e} {:e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Re-inserts the eliminated element and returns the full element vector.
    pub fn expand(&self, reduced: &[Complex64]) -> Vec<Complex64> {
        let mut full = Vec::with_capacity(self.dim + 1);
        let mut rest = Complex64::new(0.0, 0.0);
        for n in 0..=self.n_max {
            for i in 0..2 {
                let k = index(self.n_max, n, i, n, i);
                if k != 0 {
                    rest += reduced[k - 1];
                }
            }
        }
        full.push(Complex64::new(1.0, 0.0) - rest);
        full.extend_from_slice(reduced);
        full
    }
}

struct Rows {
    n_max: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl Rows {
    /// Adds `coeff · ρ_{n,i;m,j}` to `row`; elements beyond the truncation
    /// (or below zero photons) are dropped.
    fn add(&mut self, row: usize, n: isize, i: usize, m: isize, j: usize, coeff: Complex64) {
        let top = self.n_max as isize;
        if coeff == Complex64::new(0.0, 0.0) || n < 0 || m < 0 || n > top || m > top {
            return;
        }
        self.entries.push((row, index(self.n_max, n as usize, i, m as usize, j), coeff));
    }
}

/// Assembles the generator of the master equation
///
/// `dρ/dt = -i[H, ρ] + Γ/2 L[A12] + κ/2 L[a] + Γ_D/2 L[A22] + P_x/2 L[A21] + P_c/2 L[a†]`
///
/// with `H = δx A22 + Ω(A12 + A21) + δc a†a + g(a†A12 + A21 a)` and
/// `L[O]ρ = 2OρO† − {O†O, ρ}`, written element by element.
pub fn generator(params: &SystemParams, n_max: usize) -> Result<Generator> {
    if n_max < 1 {
        return Err(Error::Truncation(n_max));
    }
    params.validate()?;
    let SystemParams { gamma, gamma_d, p_x, p_c, kappa, g, rabi, delta_x, delta_c } = *params;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mi = |x: f64| c(0.0, -x);
    let top = n_max as isize;
    // Diagonal of the truncated a a†: (n + 1) below the cutoff, 0 at it.
    let aad = |k: isize| if k < top { (k + 1) as f64 } else { 0.0 };

    let mut rows = Rows { n_max, entries: Vec::with_capacity(element_count(n_max) * 9) };
    for n in 0..=top {
        for i in 0..2 {
            for m in 0..=top {
                for j in 0..2 {
                    let row = index(n_max, n as usize, i, m as usize, j);
                    let (fn_, fm) = (n as f64, m as f64);
                    let energy = |k: f64, l: usize| delta_c * k + if l == 1 { delta_x } else { 0.0 };

                    // Diagonal: free evolution and all decay terms.
                    let mut diag = mi(energy(fn_, i) - energy(fm, j));
                    diag -= 0.5 * kappa * (fn_ + fm);
                    diag -= 0.5 * gamma * (i + j) as f64;
                    if i != j {
                        diag -= 0.5 * gamma_d;
                        diag -= 0.5 * p_x;
                    } else if i == 0 {
                        diag -= p_x;
                    }
                    diag -= 0.5 * p_c * (aad(n) + aad(m));
                    rows.add(row, n, i, m, j, diag);

                    // Laser drive: -iΩ(ρ_{n,ī;m,j} − ρ_{n,i;m,j̄}).
                    rows.add(row, n, 1 - i, m, j, mi(rabi));
                    rows.add(row, n, i, m, 1 - j, c(0.0, rabi));

                    // Coupling: -ig[(Hρ) − (ρH)].
                    if i == 0 {
                        rows.add(row, n - 1, 1, m, j, mi(g * fn_.sqrt()));
                    } else {
                        rows.add(row, n + 1, 0, m, j, mi(g * (fn_ + 1.0).sqrt()));
                    }
                    if j == 0 {
                        rows.add(row, n, i, m - 1, 1, c(0.0, g * fm.sqrt()));
                    } else {
                        rows.add(row, n, i, m + 1, 0, c(0.0, g * (fm + 1.0).sqrt()));
                    }

                    // Cavity loss feeding from n+1, m+1.
                    rows.add(row, n + 1, i, m + 1, j, c(kappa * ((fn_ + 1.0) * (fm + 1.0)).sqrt(), 0.0));
                    // Spontaneous emission into the ground state.
                    if i == 0 && j == 0 {
                        rows.add(row, n, 1, m, 1, c(gamma, 0.0));
                    }
                    // Incoherent emitter pump into the excited state.
                    if i == 1 && j == 1 {
                        rows.add(row, n, 0, m, 0, c(p_x, 0.0));
                    }
                    // Incoherent cavity pump feeding from n-1, m-1.
                    rows.add(row, n - 1, i, m - 1, j, c(p_c * (fn_ * fm).sqrt(), 0.0));
                }
            }
        }
    }

    let mut entries = rows.entries;
    entries.sort_by_key(|&(r, c, _)| (r, c));
    entries.dedup_by(|later, kept| {
        if later.0 == kept.0 && later.1 == kept.1 {
            kept.2 += later.2;
            true
        } else {
            false
        }
    });
    entries.retain(|e| e.2 != Complex64::new(0.0, 0.0));
    Ok(Generator { n_max, dim: element_count(n_max), entries })
}

/// Coefficient matrix and inhomogeneity of the steady-state equations with
/// `ρ_{0,1;0,1} = 1 − Σ_{other diagonal} ρ` substituted and its own equation
/// dropped. The matrix has size `4(N+1)² − 1`.
pub fn build_liouvillian(params: &SystemParams, n_max: usize) -> Result<ReducedSystem> {
    let gen = generator(params, n_max)?;
    let dim = gen.dim - 1;
    let is_diag = {
        let mut d = vec![false; gen.dim];
        for n in 0..=n_max {
            for i in 0..2 {
                d[index(n_max, n, i, n, i)] = true;
            }
        }
        d
    };
    // Column 0 coefficients per row, to be folded into the diagonal columns.
    let mut col0 = vec![Complex64::new(0.0, 0.0); gen.dim];
    for &(r, c, v) in &gen.entries {
        if c == 0 {
            col0[r] = v;
        }
    }

    let mut entries = Vec::with_capacity(gen.entries.len());
    let mut rhs = vec![Complex64::new(0.0, 0.0); dim];
    let mut row_start = 0;
    while row_start < gen.entries.len() {
        let r = gen.entries[row_start].0;
        let mut row_end = row_start;
        while row_end < gen.entries.len() && gen.entries[row_end].0 == r {
            row_end += 1;
        }
        if r != 0 {
            let mut merged: Vec<(usize, Complex64)> = gen.entries[row_start..row_end]
                .iter()
                .filter(|e| e.1 != 0)
                .map(|&(_, c, v)| (c, v))
                .collect();
            let fold = col0[r];
            if fold != Complex64::new(0.0, 0.0) {
                rhs[r - 1] = -fold;
                for (k, _) in is_diag.iter().enumerate().skip(1).filter(|(_, &d)| d) {
                    match merged.iter_mut().find(|(c, _)| *c == k) {
                        Some(slot) => slot.1 -= fold,
                        None => merged.push((k, -fold)),
                    }
                }
                merged.sort_by_key(|e| e.0);
            }
            entries.extend(
                merged.into_iter().filter(|e| e.1 != Complex64::new(0.0, 0.0)).map(|(c, v)| (r - 1, c - 1, v)),
            );
        }
        row_start = row_end;
    }
    Ok(ReducedSystem { n_max, dim, entries, rhs })
}
