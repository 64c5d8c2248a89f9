//! Tensor-factor bookkeeping: labeled system layouts, partial traces,
//! factor permutations and embeddings.

use super::op::{Operator, C64};
use crate::error::{Error, Result};

/// Ordered tensor factors with labels, e.g. `R (x) A (x) B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemLayout {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl SystemLayout {
    pub fn new(labels: &[&str], dims: &[usize]) -> Result<Self> {
        if labels.len() != dims.len() || labels.is_empty() {
            return Err(Error::BadLayout("labels and dims must align".into()));
        }
        if dims.contains(&0) {
            return Err(Error::BadLayout("zero factor dimension".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::BadLayout(format!("duplicate label {l}")));
            }
        }
        Ok(Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            dims: dims.to_vec(),
        })
    }

    pub fn labels(&self) -> Vec<&str> {
        self.labels.iter().map(|s| s.as_str()).collect()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::BadLayout(format!("unknown label {label}")))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    pub fn check_operator(&self, op: &Operator) -> Result<()> {
        if op.dim() != self.total_dim() {
            return Err(Error::BadLayout(format!(
                "operator dim {} != layout dim {}",
                op.dim(),
                self.total_dim()
            )));
        }
        Ok(())
    }

    /// Layout of the `n`-fold copy, labels suffixed with the copy index.
    pub fn tensor_power(&self, n: usize) -> SystemLayout {
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        for k in 0..n {
            for (l, &d) in self.labels.iter().zip(self.dims.iter()) {
                labels.push(format!("{l}{k}"));
                dims.push(d);
            }
        }
        SystemLayout { labels, dims }
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn unravel(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Trace out every factor not in `keep`; kept factors preserve their
/// original relative order.
pub fn partial_trace(
    op: &Operator,
    layout: &SystemLayout,
    keep: &[&str],
) -> Result<(Operator, SystemLayout)> {
    layout.check_operator(op)?;
    let keep_pos: Vec<usize> = {
        let mut pos: Vec<usize> = keep
            .iter()
            .map(|l| layout.position(l))
            .collect::<Result<_>>()?;
        pos.sort_unstable();
        pos.dedup();
        if pos.len() != keep.len() {
            return Err(Error::BadLayout("duplicate kept label".into()));
        }
        pos
    };
    let trace_pos: Vec<usize> = (0..layout.dims.len())
        .filter(|p| !keep_pos.contains(p))
        .collect();
    let keep_dims: Vec<usize> = keep_pos.iter().map(|&p| layout.dims[p]).collect();
    let trace_dims: Vec<usize> = trace_pos.iter().map(|&p| layout.dims[p]).collect();
    let keep_total: usize = keep_dims.iter().product();
    let trace_total: usize = trace_dims.iter().product::<usize>().max(1);
    let full_strides = strides(&layout.dims);

    let mut out = Operator::zeros(keep_total);
    let mut keep_idx = vec![0usize; keep_dims.len()];
    let mut keep_jdx = vec![0usize; keep_dims.len()];
    let mut tr_idx = vec![0usize; trace_dims.len()];
    for i in 0..keep_total {
        unravel(i, &keep_dims, &mut keep_idx);
        for j in 0..keep_total {
            unravel(j, &keep_dims, &mut keep_jdx);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..trace_total {
                unravel(t, &trace_dims, &mut tr_idx);
                let mut row = 0usize;
                let mut col = 0usize;
                for (k, &p) in keep_pos.iter().enumerate() {
                    row += keep_idx[k] * full_strides[p];
                    col += keep_jdx[k] * full_strides[p];
                }
                for (k, &p) in trace_pos.iter().enumerate() {
                    row += tr_idx[k] * full_strides[p];
                    col += tr_idx[k] * full_strides[p];
                }
                acc += op.get(row, col);
            }
            out.set(i, j, acc);
        }
    }

    let kept_labels: Vec<&str> = keep_pos
        .iter()
        .map(|&p| layout.labels[p].as_str())
        .collect();
    let out_layout = SystemLayout::new(&kept_labels, &keep_dims)?;
    Ok((out, out_layout))
}

/// Reorder tensor factors to `new_order`.
pub fn permute_systems(
    op: &Operator,
    layout: &SystemLayout,
    new_order: &[&str],
) -> Result<(Operator, SystemLayout)> {
    layout.check_operator(op)?;
    if new_order.len() != layout.dims.len() {
        return Err(Error::BadLayout(
            "permutation must cover all factors".into(),
        ));
    }
    let perm: Vec<usize> = new_order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    {
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != perm.len() {
            return Err(Error::BadLayout("duplicate label in permutation".into()));
        }
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| layout.dims[p]).collect();
    let new_strides = strides(&new_dims);
    let total = layout.total_dim();

    // map old full index -> new full index
    let mut index_map = vec![0usize; total];
    let mut idx = vec![0usize; layout.dims.len()];
    for i in 0..total {
        unravel(i, &layout.dims, &mut idx);
        let mut ni = 0;
        for (k, &p) in perm.iter().enumerate() {
            ni += idx[p] * new_strides[k];
        }
        index_map[i] = ni;
    }
    let mut out = Operator::zeros(total);
    for i in 0..total {
        for j in 0..total {
            out.set(index_map[i], index_map[j], op.get(i, j));
        }
    }
    let out_layout = SystemLayout::new(new_order, &new_dims)?;
    Ok((out, out_layout))
}

/// Embed an operator acting on the factors `on` (in that order) into the full
/// space described by `layout`, acting as the identity elsewhere.
pub fn embed(op: &Operator, layout: &SystemLayout, on: &[&str]) -> Result<Operator> {
    let on_pos: Vec<usize> = on
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    let on_dims: Vec<usize> = on_pos.iter().map(|&p| layout.dims[p]).collect();
    let sub_total: usize = on_dims.iter().product();
    if op.dim() != sub_total {
        return Err(Error::DimMismatch(format!(
            "operator dim {} != subsystem dim {sub_total}",
            op.dim()
        )));
    }
    let rest_pos: Vec<usize> = (0..layout.dims.len())
        .filter(|p| !on_pos.contains(p))
        .collect();
    let rest_dims: Vec<usize> = rest_pos.iter().map(|&p| layout.dims[p]).collect();
    let rest_total: usize = rest_dims.iter().product::<usize>().max(1);
    let full_strides = strides(&layout.dims);

    let mut out = Operator::zeros(layout.total_dim());
    let mut a_idx = vec![0usize; on_dims.len()];
    let mut b_idx = vec![0usize; on_dims.len()];
    let mut r_idx = vec![0usize; rest_dims.len()];
    for r in 0..rest_total {
        unravel(r, &rest_dims, &mut r_idx);
        let mut base = 0usize;
        for (k, &p) in rest_pos.iter().enumerate() {
            base += r_idx[k] * full_strides[p];
        }
        for a in 0..sub_total {
            unravel(a, &on_dims, &mut a_idx);
            let mut row = base;
            for (k, &p) in on_pos.iter().enumerate() {
                row += a_idx[k] * full_strides[p];
            }
            for b in 0..sub_total {
                unravel(b, &on_dims, &mut b_idx);
                let mut col = base;
                for (k, &p) in on_pos.iter().enumerate() {
                    col += b_idx[k] * full_strides[p];
                }
                out.set(row, col, op.get(a, b));
            }
        }
    }
    Ok(out)
}
