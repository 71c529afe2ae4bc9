//! Exact joint distributions over node outcomes, stored as dense row-major tables.
//!
//! Outcomes are 0-based in memory and 1-based in CSV files.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::Layout;

/// Probabilities must sum to one within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Negative entries down to this value are float noise and are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;
/// Default cut-off below which conditioning cells are treated as empty.
pub const DEFAULT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub outcomes: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, outcomes: usize) -> Self {
        Variable {
            name: name.into(),
            outcomes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    vars: Vec<Variable>,
    layout: Layout,
    probs: Vec<f64>,
}

/// Result of [`JointDistribution::condition`].
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned {
    pub dist: JointDistribution,
    /// Set when the conditioning event had zero probability and the uniform
    /// distribution was substituted.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub u: Vec<String>,
    pub v: Vec<String>,
    pub w: Vec<String>,
    /// `max |P(uv|w) − P(u|w)P(v|w)|` over cells with `P(w) > epsilon`.
    pub residual: f64,
    pub epsilon: f64,
    /// Conditioning cells skipped because `P(w) ≤ epsilon`.
    pub skipped_cells: usize,
}

impl JointDistribution {
    pub fn new(vars: Vec<Variable>, mut probs: Vec<f64>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in &vars {
            if v.outcomes == 0 {
                return Err(Error::InvalidDistribution(format!(
                    "variable `{}` has no outcomes",
                    v.name
                )));
            }
            if !seen.insert(v.name.as_str()) {
                return Err(Error::InvalidDistribution(format!("duplicate variable `{}`", v.name)));
            }
        }
        let layout = Layout::new(vars.iter().map(|v| v.outcomes).collect());
        if probs.len() != layout.total() {
            return Err(Error::InvalidDistribution(format!(
                "table has {} entries, signature needs {}",
                probs.len(),
                layout.total()
            )));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -NEGATIVE_CLAMP {
                return Err(Error::InvalidDistribution(format!("invalid probability {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(JointDistribution { vars, layout, probs })
    }

    /// Uniform distribution over the given signature.
    pub fn uniform(vars: Vec<Variable>) -> Self {
        let n: usize = vars.iter().map(|v| v.outcomes).product();
        JointDistribution::new(vars, vec![1.0 / n as f64; n]).expect("uniform table is valid")
    }

    /// The distribution over no variables.
    pub fn scalar() -> Self {
        JointDistribution::uniform(Vec::new())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub(crate) fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Probability of a full outcome tuple.
    pub fn prob(&self, outcomes: &[usize]) -> f64 {
        self.probs[self.layout.index(outcomes)]
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub(crate) fn positions<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.position(n.as_ref())).collect()
    }

    /// Dense marginal table over `positions`, in the given order.
    pub(crate) fn marginal_table(&self, positions: &[usize]) -> (Layout, Vec<f64>) {
        let sub = Layout::new(positions.iter().map(|&k| self.vars[k].outcomes).collect());
        let mut out = vec![0.0; sub.total()];
        let mut digits = vec![0usize; positions.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (slot, &k) in digits.iter_mut().zip(positions) {
                *slot = self.layout.digit(i, k);
            }
            out[sub.index(&digits)] += p;
        }
        (sub, out)
    }

    /// Sums out every variable not in `keep`. Kept variables stay in their original order.
    pub fn marginalize<S: AsRef<str>>(&self, keep: &[S]) -> Result<JointDistribution> {
        let mut positions = self.positions(keep)?;
        positions.sort_unstable();
        positions.dedup();
        let (_, table) = self.marginal_table(&positions);
        let vars = positions.iter().map(|&k| self.vars[k].clone()).collect();
        JointDistribution::new(vars, table)
    }

    /// Restricts to `assignment` and renormalizes; conditioned variables are dropped.
    /// A zero-probability assignment yields the uniform distribution with `degenerate` set.
    pub fn condition<S: AsRef<str>>(&self, assignment: &[(S, usize)]) -> Result<Conditioned> {
        let mut fixed: Vec<(usize, usize)> = Vec::with_capacity(assignment.len());
        for (name, value) in assignment {
            let k = self.position(name.as_ref())?;
            if *value >= self.vars[k].outcomes {
                return Err(Error::InvalidArgument(format!(
                    "outcome {} out of range for `{}`",
                    value + 1,
                    self.vars[k].name
                )));
            }
            if let Some(&(_, prev)) = fixed.iter().find(|(p, _)| *p == k) {
                if prev != *value {
                    return Err(Error::InvalidArgument(format!(
                        "conflicting values for `{}`",
                        self.vars[k].name
                    )));
                }
                continue;
            }
            fixed.push((k, *value));
        }
        let rest: Vec<usize> = (0..self.vars.len())
            .filter(|k| !fixed.iter().any(|(p, _)| p == k))
            .collect();
        let vars: Vec<Variable> = rest.iter().map(|&k| self.vars[k].clone()).collect();
        let sub = Layout::new(vars.iter().map(|v| v.outcomes).collect());
        let mut table = vec![0.0; sub.total()];
        let mut digits = vec![0usize; rest.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            if fixed.iter().any(|&(k, v)| self.layout.digit(i, k) != v) {
                continue;
            }
            for (slot, &k) in digits.iter_mut().zip(&rest) {
                *slot = self.layout.digit(i, k);
            }
            table[sub.index(&digits)] += p;
        }
        let mass: f64 = table.iter().sum();
        if mass <= 0.0 {
            return Ok(Conditioned {
                dist: JointDistribution::uniform(vars),
                degenerate: true,
            });
        }
        table.iter_mut().for_each(|p| *p /= mass);
        Ok(Conditioned {
            dist: JointDistribution::new(vars, table)?,
            degenerate: false,
        })
    }

    /// Largest deviation from `P(uv|w) = P(u|w)P(v|w)`.
    pub fn max_ci_violation<S: AsRef<str>>(&self, u: &[S], v: &[S], w: &[S], eps: f64) -> Result<IndependenceReport> {
        let (pu, pv, pw) = (self.positions(u)?, self.positions(v)?, self.positions(w)?);
        let all: Vec<usize> = pu.iter().chain(&pv).chain(&pw).copied().collect();
        let distinct: BTreeSet<usize> = all.iter().copied().collect();
        if distinct.len() != all.len() {
            return Err(Error::Overlap("u, v and w must be disjoint".into()));
        }
        let (residual, skipped) = self.ci_residual(&pu, &pv, &pw, eps);
        let names = |ps: &[usize]| ps.iter().map(|&k| self.vars[k].name.clone()).collect();
        Ok(IndependenceReport {
            u: names(&pu),
            v: names(&pv),
            w: names(&pw),
            residual,
            epsilon: eps,
            skipped_cells: skipped,
        })
    }

    /// Residual and skipped-cell count for disjoint position sets.
    pub(crate) fn ci_residual(&self, pu: &[usize], pv: &[usize], pw: &[usize], eps: f64) -> (f64, usize) {
        let order: Vec<usize> = pu.iter().chain(pv).chain(pw).copied().collect();
        let (_, table) = self.marginal_table(&order);
        let nu: usize = pu.iter().map(|&k| self.vars[k].outcomes).product();
        let nv: usize = pv.iter().map(|&k| self.vars[k].outcomes).product();
        let nw: usize = pw.iter().map(|&k| self.vars[k].outcomes).product();
        let at = |a: usize, b: usize, c: usize| table[(a * nv + b) * nw + c];
        let mut residual: f64 = 0.0;
        let mut skipped = 0;
        for c in 0..nw {
            let p_w: f64 = (0..nu)
                .flat_map(|a| (0..nv).map(move |b| (a, b)))
                .map(|(a, b)| at(a, b, c))
                .sum();
            if p_w <= eps {
                skipped += 1;
                continue;
            }
            let p_uw: Vec<f64> = (0..nu).map(|a| (0..nv).map(|b| at(a, b, c)).sum()).collect();
            let p_vw: Vec<f64> = (0..nv).map(|b| (0..nu).map(|a| at(a, b, c)).sum()).collect();
            for (a, &pa) in p_uw.iter().enumerate() {
                for (b, &pb) in p_vw.iter().enumerate() {
                    let joint = at(a, b, c) / p_w;
                    let product = (pa / p_w) * (pb / p_w);
                    residual = residual.max((joint - product).abs());
                }
            }
        }
        (residual, skipped)
    }

    /// Total-variation distance; signatures must match exactly.
    pub fn tv_distance(&self, other: &JointDistribution) -> Result<f64> {
        if self.vars != other.vars {
            return Err(Error::SignatureMismatch(format!(
                "{:?} vs {:?}",
                self.names(),
                other.names()
            )));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Same distribution with variables permuted into `order`.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<JointDistribution> {
        let positions = self.positions(order)?;
        let distinct: BTreeSet<usize> = positions.iter().copied().collect();
        if positions.len() != self.vars.len() || distinct.len() != positions.len() {
            return Err(Error::SignatureMismatch(
                "reorder must list every variable exactly once".into(),
            ));
        }
        let (_, table) = self.marginal_table(&positions);
        let vars = positions.iter().map(|&k| self.vars[k].clone()).collect();
        Ok(JointDistribution {
            layout: Layout::new(positions.iter().map(|&k| self.vars[k].outcomes).collect()),
            vars,
            probs: table,
        })
    }

    /// CSV body: one column per variable (1-based outcomes) and a `probability`
    /// column with 17 significant digits, rows in row-major order.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let mut header: Vec<&str> = self.names();
        header.push("probability");
        s.push_str(&header.join(","));
        s.push('\n');
        for (i, p) in self.probs.iter().enumerate() {
            for d in self.layout.digits(i) {
                s.push_str(&(d + 1).to_string());
                s.push(',');
            }
            s.push_str(&format!("{p:.16e}\n"));
        }
        s
    }

    /// Parses [`JointDistribution::to_csv`] output; `#` lines are comments.
    /// Outcome counts are the largest label seen in each column.
    pub fn from_csv(text: &str) -> Result<JointDistribution> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Parse("empty distribution file".into()))?
            .split(',')
            .map(str::trim)
            .collect();
        if header.last() != Some(&"probability") {
            return Err(Error::Parse("last column must be `probability`".into()));
        }
        let nvars = header.len() - 1;
        let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();
        for line in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != header.len() {
                return Err(Error::Parse(format!("row `{line}` has wrong column count")));
            }
            let mut outcome = Vec::with_capacity(nvars);
            for cell in &cells[..nvars] {
                let x: usize = cell
                    .parse()
                    .map_err(|e| Error::Parse(format!("outcome `{cell}`: {e}")))?;
                if x == 0 {
                    return Err(Error::Parse("outcomes are 1-based".into()));
                }
                outcome.push(x - 1);
            }
            let p: f64 = cells[nvars]
                .parse()
                .map_err(|e| Error::Parse(format!("probability `{}`: {e}", cells[nvars])))?;
            rows.push((outcome, p));
        }
        let counts: Vec<usize> = (0..nvars)
            .map(|k| rows.iter().map(|(o, _)| o[k] + 1).max().unwrap_or(0))
            .collect();
        let vars: Vec<Variable> = header[..nvars]
            .iter()
            .zip(&counts)
            .map(|(n, &c)| Variable::new(*n, c))
            .collect();
        let layout = Layout::new(counts);
        if rows.len() != layout.total() {
            return Err(Error::Parse(format!(
                "expected {} rows, found {}",
                layout.total(),
                rows.len()
            )));
        }
        let mut probs = Vec::with_capacity(rows.len());
        for (i, (outcome, p)) in rows.into_iter().enumerate() {
            if layout.index(&outcome) != i {
                return Err(Error::Parse(format!("row {} is out of row-major order", i + 1)));
            }
            probs.push(p);
        }
        JointDistribution::new(vars, probs)
    }
}
