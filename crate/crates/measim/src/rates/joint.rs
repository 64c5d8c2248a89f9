//! Entropy calculus on states with several classical variables and a
//! labeled quantum factor, stored block-diagonally.

use std::collections::BTreeMap;

use crate::cq::ClassicalQuantumState;
use crate::error::{Error, Result};
use crate::qcore::{self, partial_trace, shannon_entropy, Operator, SystemLayout};
use crate::tol;

/// A group of subsystems: classical variable names plus quantum factor labels.
pub type Group<'a> = (&'a [&'a str], &'a [&'a str]);

/// `sum p(v) |v><v| (x) theta_v` with `v` ranging over tuples of classical
/// values and `theta_v` on a labeled quantum factor.
#[derive(Debug, Clone)]
pub struct JointCqState {
    class_names: Vec<String>,
    blocks: Vec<(Vec<usize>, Operator)>,
    q_layout: SystemLayout,
}

impl JointCqState {
    pub fn new(
        class_names: Vec<String>,
        blocks: Vec<(Vec<usize>, Operator)>,
        q_layout: SystemLayout,
    ) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidOperator("no blocks".into()));
        }
        for (vals, op) in &blocks {
            if vals.len() != class_names.len() {
                return Err(Error::BadLayout("tuple arity mismatch".into()));
            }
            q_layout.check_operator(op)?;
        }
        let total: f64 = blocks.iter().map(|(_, op)| op.trace().re).sum();
        if (total - 1.0).abs() > 1e-7 {
            return Err(Error::InvalidOperator(format!("weights sum to {total}")));
        }
        Ok(Self {
            class_names,
            blocks,
            q_layout,
        })
    }

    /// Lift a single-classical-variable cq state; `var` names the label.
    pub fn from_cq(cq: &ClassicalQuantumState, var: &str, q_label: &str) -> Result<Self> {
        let q_layout = match cq.layout() {
            Some(l) => l.clone(),
            None => SystemLayout::new(&[q_label], &[cq.weighted_block(0).dim()])?,
        };
        let blocks = (0..cq.len())
            .map(|i| (vec![i], cq.weighted_block(i).clone()))
            .collect();
        Self::new(vec![var.to_string()], blocks, q_layout)
    }

    fn class_positions(&self, vars: &[&str]) -> Result<Vec<usize>> {
        vars.iter()
            .map(|v| {
                self.class_names
                    .iter()
                    .position(|n| n == v)
                    .ok_or_else(|| Error::BadLayout(format!("unknown classical variable {v}")))
            })
            .collect()
    }

    /// Von Neumann entropy of the reduced state on a group, in bits.
    /// For a cq state this is `H(classical marginal) + sum_v p(v) H(theta_v)`.
    pub fn entropy_of(&self, group: Group) -> Result<f64> {
        let (cvars, qlabels) = group;
        let cpos = self.class_positions(cvars)?;
        let keep_quantum = !qlabels.is_empty();

        let mut grouped: BTreeMap<Vec<usize>, Operator> = BTreeMap::new();
        let mut weights: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (vals, op) in &self.blocks {
            let key: Vec<usize> = cpos.iter().map(|&p| vals[p]).collect();
            let w = op.trace().re;
            *weights.entry(key.clone()).or_insert(0.0) += w;
            if keep_quantum {
                let (reduced, _) = partial_trace(op, &self.q_layout, qlabels)?;
                grouped
                    .entry(key)
                    .and_modify(|acc| *acc = acc.add(&reduced))
                    .or_insert(reduced);
            }
        }

        let pmf: Vec<f64> = weights.values().map(|&w| w.max(0.0)).collect();
        let mut h = shannon_entropy(&pmf);
        if keep_quantum {
            for (key, op) in &grouped {
                let w = weights[key];
                if w > tol::TRACE {
                    h += w * qcore::entropy_of_psd(op)?;
                }
            }
        }
        Ok(h)
    }

    fn union<'a>(a: Group<'a>, b: Group<'a>) -> (Vec<&'a str>, Vec<&'a str>) {
        let mut c: Vec<&str> = a.0.to_vec();
        c.extend_from_slice(b.0);
        let mut q: Vec<&str> = a.1.to_vec();
        q.extend_from_slice(b.1);
        (c, q)
    }

    /// `H(S|T) = H(ST) - H(T)`.
    pub fn conditional(&self, s: Group, t: Group) -> Result<f64> {
        let (c, q) = Self::union(s, t);
        Ok(self.entropy_of((&c, &q))? - self.entropy_of(t)?)
    }

    /// `I(S;T) = H(S) + H(T) - H(ST)`.
    pub fn mutual(&self, s: Group, t: Group) -> Result<f64> {
        let (c, q) = Self::union(s, t);
        Ok(self.entropy_of(s)? + self.entropy_of(t)? - self.entropy_of((&c, &q))?)
    }

    /// `I(S;T|U) = H(SU) + H(TU) - H(STU) - H(U)`.
    pub fn mutual_conditioned(&self, s: Group, t: Group, u: Group) -> Result<f64> {
        let (su_c, su_q) = Self::union(s, u);
        let (tu_c, tu_q) = Self::union(t, u);
        let (st_c, st_q) = Self::union(s, t);
        let (stu_c, stu_q) = Self::union((&st_c, &st_q), u);
        Ok(
            self.entropy_of((&su_c, &su_q))? + self.entropy_of((&tu_c, &tu_q))?
                - self.entropy_of((&stu_c, &stu_q))?
                - self.entropy_of(u)?,
        )
    }
}
