//! Evaluation of `Δ_k(g)` through derivative tensors only.
//!
//! With `a_1 = e_1` and `a_k = (0, â_k)` the polynomials
//!
//! ```text
//! L_1 = Dg·a_1,
//! P_k = Σ_{j=1}^{k−1} (j/k)·D(L_{k−j})·a_j,
//! L_k = P_k + Dg·a_k,
//! ```
//!
//! satisfy `Δ_k(g) = P_k(g)(y)` and `Λ_k(g) = L_k(g)(y)`, where `â_k`
//! solves `Dĝ(y)·â_k = −P_k(ĝ)(y)`. Every `L_k` is a linear combination of
//! directional derivatives `D^m g[a_{i_1}, …, a_{i_m}]` with
//! `i_1 + ⋯ + i_m = k`, so the recursion is carried out on multisets of
//! indices and evaluated with the derivative tensors of the model (which,
//! for a [`crate::polycore::NormalizedFrame`], are obtained by the chain
//! rule without expanding `g`).

use std::collections::BTreeMap;

use crate::error::{MzError, Result};
use crate::polycore::{CTensor, LocalModel};
use crate::numkit::solve_vec;
use crate::C64;

/// `Δ_k(g)`, `Λ_k(g)` and `a_k` for `k = 1 … K`.
#[derive(Clone, Debug)]
pub struct ChainRuleDeltas {
    /// `deltas[k − 1] = Δ_k(g)` (all components); `Δ_1(g) = ∂g/∂X_1`.
    pub deltas: Vec<Vec<C64>>,
    /// `lambda_values[k − 1] = Λ_k(g) = Δ_k(g) + Dg·a_k`.
    pub lambda_values: Vec<Vec<C64>>,
    /// `a[k − 1] = a_k`.
    pub a: Vec<Vec<C64>>,
}

impl ChainRuleDeltas {
    /// `Δ_k(g_i)`.
    pub fn delta(&self, k: usize, i: usize) -> C64 {
        self.deltas[k - 1][i]
    }
}

type Terms = BTreeMap<Vec<usize>, f64>;

fn eval_terms(
    terms: &Terms,
    tensors: &mut Vec<Option<CTensor>>,
    model: &(impl LocalModel + ?Sized),
    y: &[C64],
    a: &[Vec<C64>],
) -> Result<Vec<C64>> {
    let n = model.nvars();
    let deg = model.degree() as usize;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (idx, &c) in terms {
        let m = idx.len();
        if m > deg {
            continue;
        }
        if tensors.len() <= m {
            tensors.resize(m + 1, None);
        }
        if tensors[m].is_none() {
            tensors[m] = Some(model.derivative_tensor_at(y, m)?);
        }
        let t = tensors[m].as_ref().expect("tensor cached above");
        let vs: Vec<&[C64]> = idx.iter().map(|&i| a[i - 1].as_slice()).collect();
        let v = t.apply(&vs);
        for (o, x) in out.iter_mut().zip(v) {
            *o += x * c;
        }
    }
    Ok(out)
}

/// Computes `Δ_k(g)` for `k = 1 … max_order` at `y` for a model in
/// normalized coordinates (kernel direction `X_1`, `Dĝ(y)` given by rows
/// `1…n−1` and columns `2…n` of the Jacobian).
///
/// Errors: [`MzError::Singular`] if `Dĝ(y)` is singular.
pub fn chainrule_lk<M: LocalModel + ?Sized>(model: &M, y: &[C64], max_order: usize) -> Result<ChainRuleDeltas> {
    let n = model.nvars();
    if y.len() != n {
        return Err(MzError::DimensionMismatch { expected: n, got: y.len() });
    }
    if max_order == 0 {
        return Err(MzError::InvalidArgument("max_order must be at least 1".into()));
    }
    let jac = model.jacobian_at(y)?;
    let dfh = if n > 1 { Some(jac.view((0, 1), (n - 1, n - 1)).into_owned()) } else { None };
    let mut tensors: Vec<Option<CTensor>> = Vec::new();

    let mut e1 = vec![C64::new(0.0, 0.0); n];
    e1[0] = C64::new(1.0, 0.0);
    let mut a: Vec<Vec<C64>> = vec![e1];
    let mut ls: Vec<Terms> = vec![Terms::new()];
    ls[0].insert(vec![1], 1.0);

    let d1: Vec<C64> = (0..n).map(|i| jac[(i, 0)]).collect();
    let mut deltas = vec![d1.clone()];
    let mut lambda_values = vec![d1];

    for k in 2..=max_order {
        let mut p = Terms::new();
        for j in 1..k {
            for (idx, &c) in &ls[k - j - 1] {
                let mut nid = idx.clone();
                let pos = nid.partition_point(|&v| v <= j);
                nid.insert(pos, j);
                *p.entry(nid).or_insert(0.0) += (j as f64 / k as f64) * c;
            }
        }
        let pv = eval_terms(&p, &mut tensors, model, y, &a)?;
        let mut ak = vec![C64::new(0.0, 0.0); n];
        if let Some(dfh) = &dfh {
            let rhs: Vec<C64> = pv[..n - 1].iter().map(|c| -c).collect();
            let sol = solve_vec(dfh, &rhs)?;
            ak[1..].copy_from_slice(&sol);
        }
        let lam: Vec<C64> =
            (0..n).map(|i| pv[i] + (1..n).map(|j| jac[(i, j)] * ak[j]).sum::<C64>()).collect();
        let mut lk = p;
        lk.insert(vec![k], 1.0);
        ls.push(lk);
        a.push(ak);
        deltas.push(pv);
        lambda_values.push(lam);
    }
    Ok(ChainRuleDeltas { deltas, lambda_values, a })
}
