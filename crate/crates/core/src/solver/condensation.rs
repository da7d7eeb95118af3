//! Static condensation: element unknowns are eliminated block by block and
//! only facet unknowns and multipliers enter the global sparse solve.

use rayon::prelude::*;

use crate::error::{HdgError, Result};
use crate::linalg::{solve_sparse, CsrMatrix, DenseLu, Entry};
use crate::spaces::SlabSpace;

/// Local elimination data of one element.
struct ElementSchur {
    /// Global (compact) columns coupled to the element.
    columns: Vec<usize>,
    /// `A_ee^{-1} [A_eg | b_e]`, row-major `n_e x (columns + 1)`.
    solved: Vec<f64>,
    schur: Vec<Entry>,
    rhs: Vec<(usize, f64)>,
}

/// Solves `a x = b` on the slab layout of `space` by eliminating each
/// element block. Element blocks may couple only to facet unknowns and
/// multipliers.
pub fn solve_condensed(a: &CsrMatrix, b: &[f64], space: &SlabSpace) -> Result<Vec<f64>> {
    let n = a.n_rows();
    if a.n_cols() != n || b.len() != n || n != space.n_dofs() {
        return Err(HdgError::InvalidArgument("system does not match the slab layout".into()));
    }
    let ne = space.n_elements();
    let g0 = if ne == 0 { 0 } else { space.element_range(ne - 1).end };
    let ng = n - g0;
    let at = a.transpose();

    let locals: Vec<Result<ElementSchur>> = (0..ne)
        .into_par_iter()
        .map(|k| {
            let r = space.element_range(k);
            let nl = r.len();
            let mut aee = vec![0.0; nl * nl];
            let mut aeg: Vec<(usize, usize, f64)> = Vec::new();
            for (li, i) in r.clone().enumerate() {
                for (j, v) in a.row(i) {
                    if r.contains(&j) {
                        aee[li * nl + (j - r.start)] = v;
                    } else if j >= g0 {
                        aeg.push((li, j - g0, v));
                    } else if v != 0.0 {
                        return Err(HdgError::Precondition(format!("element {k} couples directly to another element")));
                    }
                }
            }
            let mut age: Vec<(usize, usize, f64)> = Vec::new();
            for (lj, j) in r.clone().enumerate() {
                for (i, v) in at.row(j) {
                    if i >= g0 {
                        age.push((i - g0, lj, v));
                    } else if !r.contains(&i) && v != 0.0 {
                        return Err(HdgError::Precondition(format!("element {k} couples directly to another element")));
                    }
                }
            }
            let mut columns: Vec<usize> = aeg.iter().map(|e| e.1).collect();
            columns.sort_unstable();
            columns.dedup();
            let nc = columns.len() + 1;
            let mut rhs_block = vec![0.0; nl * nc];
            for &(li, gj, v) in &aeg {
                let c = columns.binary_search(&gj).expect("collected column");
                rhs_block[li * nc + c] += v;
            }
            for (li, i) in r.clone().enumerate() {
                rhs_block[li * nc + nc - 1] = b[i];
            }
            let lu = DenseLu::new(nl, &aee)?;
            let solved = lu.solve_many(nc, &rhs_block)?;
            let mut rows: Vec<usize> = age.iter().map(|e| e.0).collect();
            rows.sort_unstable();
            rows.dedup();
            let mut coupling = vec![0.0; rows.len() * nl];
            for &(gi, lj, v) in &age {
                let r = rows.binary_search(&gi).expect("collected row");
                coupling[r * nl + lj] += v;
            }
            let mut block = vec![0.0; rows.len() * nc];
            for (r, out) in block.chunks_exact_mut(nc).enumerate() {
                for (lj, &v) in coupling[r * nl..(r + 1) * nl].iter().enumerate() {
                    if v != 0.0 {
                        for (o, s) in out.iter_mut().zip(&solved[lj * nc..(lj + 1) * nc]) {
                            *o -= v * s;
                        }
                    }
                }
            }
            let mut schur = Vec::with_capacity(rows.len() * columns.len());
            let mut rhs = Vec::with_capacity(rows.len());
            for (r, &gi) in rows.iter().enumerate() {
                let out = &block[r * nc..(r + 1) * nc];
                schur.extend(columns.iter().zip(out).map(|(&gc, &v)| (gi, gc, v)));
                rhs.push((gi, out[nc - 1]));
            }
            Ok(ElementSchur { columns, solved, schur, rhs })
        })
        .collect();
    let locals: Vec<ElementSchur> = locals.into_iter().collect::<Result<_>>()?;

    let mut entries: Vec<Entry> = Vec::new();
    for i in g0..n {
        entries.extend(a.row(i).filter(|&(j, _)| j >= g0).map(|(j, v)| (i - g0, j - g0, v)));
    }
    let mut rhs: Vec<f64> = b[g0..].to_vec();
    for l in &locals {
        entries.extend_from_slice(&l.schur);
        for &(i, v) in &l.rhs {
            rhs[i] += v;
        }
    }
    let schur = CsrMatrix::from_entries(ng, ng, entries);
    let xg = solve_sparse(&schur, &rhs)?;

    let mut x = vec![0.0; n];
    x[g0..].copy_from_slice(&xg);
    for (k, l) in locals.iter().enumerate() {
        let r = space.element_range(k);
        let nc = l.columns.len() + 1;
        for (li, i) in r.enumerate() {
            let row = &l.solved[li * nc..(li + 1) * nc];
            let coupled: f64 = l.columns.iter().enumerate().map(|(c, &gc)| row[c] * xg[gc]).sum();
            x[i] = row[nc - 1] - coupled;
        }
    }
    Ok(x)
}
