use std::fmt;

use serde::Serialize;

use super::{LpModel, LpSolution};
use crate::error::{Error, Result};

/// Distance table and cost breakdown read off an optimal LP solution.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub model: String,
    pub objective: f64,
    pub elements: Vec<String>,
    /// `table[i][j]` is the bracket between elements `i` and `j`; `None`
    /// for pairs the model leaves undefined.
    pub table: Vec<Vec<Option<f64>>>,
    pub costs: Vec<(String, f64)>,
    pub tight: Vec<String>,
    /// Nonzero duals by constraint name.
    pub duals: Vec<(String, f64)>,
    pub max_triangle_violation: f64,
    pub max_violation: f64,
}

const TIGHT_TOL: f64 = 1e-7;

pub fn extract_witness(solution: &LpSolution, model: &LpModel) -> Result<Witness> {
    if !solution.is_optimal() {
        return Err(Error::NotOptimal(format!("{:?}", solution.status)));
    }
    let x = &solution.values;
    let n = model.elements.len();
    let mut table = vec![vec![None; n]; n];
    for (i, row) in table.iter_mut().enumerate() {
        row[i] = (!model.elements[i].multiset).then_some(0.0);
    }
    let mut costs = Vec::new();
    for (j, v) in model.vars.iter().enumerate() {
        match model.var_pair(j) {
            Some((a, b)) => {
                let ia = model.elements.iter().position(|e| e == a).unwrap();
                let ib = model.elements.iter().position(|e| e == b).unwrap();
                table[ia][ib] = Some(x[j]);
                table[ib][ia] = Some(x[j]);
            }
            None => costs.push((v.name.clone(), x[j])),
        }
    }
    let tri = model.constraints.iter().filter(|c| c.class() == "tri").map(|c| c.violation(x)).fold(0.0, f64::max);
    Ok(Witness {
        model: model.name.clone(),
        objective: solution.objective_value,
        elements: model.elements.iter().map(|e| e.name.clone()).collect(),
        table,
        costs,
        tight: model.constraints.iter().filter(|c| c.slack(x).abs() <= TIGHT_TOL).map(|c| c.name.clone()).collect(),
        duals: model
            .constraints
            .iter()
            .zip(&solution.duals)
            .filter(|(_, &y)| y.abs() > TIGHT_TOL)
            .map(|(c, &y)| (c.name.clone(), y))
            .collect(),
        max_triangle_violation: tri,
        max_violation: model.max_violation(x),
    })
}

impl Witness {
    pub fn distance(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.elements.iter().position(|e| e == a)?;
        let j = self.elements.iter().position(|e| e == b)?;
        self.table[i][j]
    }

    pub fn cost(&self, name: &str) -> Option<f64> {
        self.costs.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: objective {:.9}", self.model, self.objective)?;
        write!(f, "{:>6}", "")?;
        for e in &self.elements {
            write!(f, "{e:>8}")?;
        }
        writeln!(f)?;
        for (e, row) in self.elements.iter().zip(&self.table) {
            write!(f, "{e:>6}")?;
            for v in row {
                match v {
                    Some(v) => write!(f, "{v:>8.4}")?,
                    None => write!(f, "{:>8}", "-")?,
                }
            }
            writeln!(f)?;
        }
        for (n, v) in &self.costs {
            writeln!(f, "{n} = {v:.6}")?;
        }
        writeln!(f, "tight: {}", self.tight.join(" "))
    }
}
