//! Linear programs in maximization form, solved with HiGHS.
//!
//! Every optimal answer is re-checked against the original rows and bounds.
//! A violation above [`TOLERANCE`] triggers one retry without presolve and
//! then surfaces as [`LpStatus::NumericalFailure`].

use std::fmt::{self, Write as _};

use highs::{HighsModelStatus, RowProblem, Sense};
use thiserror::Error;

/// Absolute feasibility tolerance.
pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("LP solver error: {0}")]
    Solver(String),
    #[error("LP did not reach an optimum: {0:?}")]
    NotOptimal(LpStatus),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub row: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    fn activity(&self, values: &[f64]) -> f64 {
        self.row.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `maximize c·x` subject to sparse rows and variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// The solution itself when optimal, an error otherwise.
    pub fn optimal(self) -> Result<Self, LpError> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            s => Err(LpError::NotOptimal(s)),
        }
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, lower: f64, upper: f64, objective: f64) -> VarId {
        self.variables.push(Variable { lower, upper, objective });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(&mut self, row: Vec<(VarId, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { row, relation, rhs });
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for (i, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper || !v.objective.is_finite() {
                return Err(LpError::Malformed(format!("variable {i} has bounds [{}, {}]", v.lower, v.upper)));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("constraint {i} has rhs {}", c.rhs)));
            }
            for &(v, a) in &c.row {
                if v.0 >= self.variables.len() {
                    return Err(LpError::Malformed(format!("constraint {i} references unknown variable {}", v.0)));
                }
                if !a.is_finite() {
                    return Err(LpError::Malformed(format!("constraint {i} has coefficient {a}")));
                }
            }
        }
        Ok(())
    }

    /// Largest absolute violation of any row or bound by `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0));
        let rows = self.constraints.iter().map(|c| c.violation(values));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables.iter().zip(values).map(|(v, x)| v.objective * x).sum()
    }

    /// Writes the program in CPLEX LP format.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::from("Maximize\n obj:");
        let obj: Vec<(VarId, f64)> = self
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.objective != 0.0)
            .map(|(i, v)| (VarId(i), v.objective))
            .collect();
        write_terms(&mut out, &obj);
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            write_terms(&mut out, &c.row);
            let op = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for (i, v) in self.variables.iter().enumerate() {
            let lo = if v.lower.is_finite() { v.lower.to_string() } else { "-inf".into() };
            let hi = if v.upper.is_finite() { v.upper.to_string() } else { "+inf".into() };
            let _ = writeln!(out, " {lo} <= x{i} <= {hi}");
        }
        out.push_str("End\n");
        out
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        solve(self)
    }
}

fn write_terms(out: &mut String, terms: &[(VarId, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0 x0");
    }
    for &(v, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} x{}", a.abs(), v.0);
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_lp_format())
    }
}

/// Solves `lp`. Deterministic for a fixed program.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    if lp.variables.is_empty() {
        let feasible = lp.constraints.iter().all(|c| c.violation(&[]) <= TOLERANCE);
        return Ok(LpSolution {
            status: if feasible { LpStatus::Optimal } else { LpStatus::Infeasible },
            values: Vec::new(),
            objective: 0.0,
        });
    }
    let first = run_highs(lp, true)?;
    match first {
        Outcome::Solved(values) if lp.max_violation(&values) <= TOLERANCE => Ok(finish(lp, values)),
        Outcome::Status(s) if s != LpStatus::NumericalFailure => Ok(no_solution(lp, s)),
        _ => match run_highs(lp, false)? {
            Outcome::Solved(values) if lp.max_violation(&values) <= TOLERANCE => Ok(finish(lp, values)),
            Outcome::Status(s @ (LpStatus::Infeasible | LpStatus::Unbounded)) => Ok(no_solution(lp, s)),
            _ => Ok(no_solution(lp, LpStatus::NumericalFailure)),
        },
    }
}

enum Outcome {
    Solved(Vec<f64>),
    Status(LpStatus),
}

fn finish(lp: &LinearProgram, values: Vec<f64>) -> LpSolution {
    // Snap values onto their bounds to remove solver noise.
    let values: Vec<f64> = values
        .into_iter()
        .zip(&lp.variables)
        .map(|(x, v)| x.clamp(v.lower, v.upper))
        .collect();
    LpSolution { status: LpStatus::Optimal, objective: lp.objective_value(&values), values }
}

fn no_solution(lp: &LinearProgram, status: LpStatus) -> LpSolution {
    LpSolution { status, values: vec![0.0; lp.variables.len()], objective: f64::NAN }
}

fn run_highs(lp: &LinearProgram, presolve: bool) -> Result<Outcome, LpError> {
    let mut problem = RowProblem::default();
    let cols: Vec<_> = lp
        .variables
        .iter()
        .map(|v| problem.add_column(v.objective, v.lower..=v.upper))
        .collect();
    for c in &lp.constraints {
        let row = c.row.iter().map(|&(v, a)| (cols[v.0], a));
        match c.relation {
            Relation::Le => problem.add_row(..=c.rhs, row),
            Relation::Ge => problem.add_row(c.rhs.., row),
            Relation::Eq => problem.add_row(c.rhs..=c.rhs, row),
        }
    }
    let mut model = problem
        .try_optimise(Sense::Maximise)
        .map_err(|s| LpError::Solver(format!("{s:?}")))?;
    model.make_quiet();
    model.set_option("solver", "simplex");
    model.set_option("threads", 1);
    model.set_option("presolve", if presolve { "on" } else { "off" });
    let solved = model.try_solve().map_err(|s| LpError::Solver(format!("{s:?}")))?;
    Ok(match solved.status() {
        HighsModelStatus::Optimal => Outcome::Solved(solved.get_solution().columns().to_vec()),
        HighsModelStatus::Infeasible => Outcome::Status(LpStatus::Infeasible),
        HighsModelStatus::Unbounded => Outcome::Status(LpStatus::Unbounded),
        _ => Outcome::Status(LpStatus::NumericalFailure),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_variable() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(0.0, 10.0, 1.0);
        lp.add_constraint(vec![(x, 1.0)], Relation::Le, 3.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value(x) - 3.0).abs() < 1e-6);
        assert!((s.objective - 3.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_optimum() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(0.0, 1.0, 1.0);
        let y = lp.add_variable(0.0, 1.0, 1.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-6);
        assert!(lp.max_violation(&s.values) <= TOLERANCE);
    }

    /// Two nodes a→b with edge weight 3/4, communities {a} and {b}, k = 1.
    /// Reach bound for b is x_b + (3/4) x_a once x_a + x_b ≤ 1.
    #[test]
    fn two_node_fairness() {
        let mut lp = LinearProgram::new();
        let xa = lp.add_variable(0.0, 1.0, 0.0);
        let xb = lp.add_variable(0.0, 1.0, 0.0);
        let la = lp.add_variable(0.0, 1.0, 1.0);
        let lb = lp.add_variable(0.0, 1.0, 1.0);
        lp.add_constraint(vec![(xa, 1.0), (xb, 1.0)], Relation::Le, 1.0);
        lp.add_constraint(vec![(la, 1.0), (xa, -1.0)], Relation::Eq, 0.0);
        lp.add_constraint(vec![(lb, 1.0), (xa, -0.75), (xb, -1.0)], Relation::Eq, 0.0);
        lp.add_constraint(vec![(la, 1.0), (lb, -1.0)], Relation::Eq, 0.0);
        let s = lp.solve().unwrap();
        assert!(s.is_optimal());
        assert!((s.value(xa) - 0.8).abs() < 1e-6);
        assert!((s.value(xb) - 0.2).abs() < 1e-6);
        assert!((s.value(la) - 0.8).abs() < 1e-6);
        assert!((s.value(lb) - 0.8).abs() < 1e-6);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(0.0, 1.0, 1.0);
        lp.add_constraint(vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
        assert!(lp.solve().unwrap().optimal().is_err());

        let mut lp = LinearProgram::new();
        let x = lp.add_variable(0.0, f64::INFINITY, 1.0);
        lp.add_constraint(vec![(x, 1.0)], Relation::Ge, 1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn malformed_programs_are_rejected() {
        let mut lp = LinearProgram::new();
        lp.add_variable(1.0, 0.0, 1.0);
        assert!(matches!(lp.solve(), Err(LpError::Malformed(_))));
        let mut lp = LinearProgram::new();
        lp.add_variable(0.0, 1.0, 1.0);
        lp.add_constraint(vec![(VarId(3), 1.0)], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(LpError::Malformed(_))));
    }

    #[test]
    fn deterministic_and_thread_safe() {
        let mut lp = LinearProgram::new();
        let vars: Vec<_> = (0..30).map(|i| lp.add_variable(0.0, 1.0, 1.0 + (i % 3) as f64)).collect();
        lp.add_constraint(vars.iter().map(|&v| (v, 1.0)).collect(), Relation::Le, 4.5);
        for w in vars.windows(2) {
            lp.add_constraint(vec![(w[0], 1.0), (w[1], -1.0)], Relation::Ge, -0.1);
        }
        let reference = lp.solve().unwrap();
        let results: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..8).map(|_| s.spawn(|| lp.solve().unwrap())).collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for r in results {
            assert_eq!(r, reference);
        }
    }

    #[test]
    fn lp_text_export() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(0.0, 1.0, 2.0);
        let y = lp.add_variable(0.0, 1.0, 0.0);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Eq, 0.0);
        let text = lp.to_lp_format();
        assert!(text.starts_with("Maximize\n obj: + 2 x0\n"));
        assert!(text.contains(" c0: + 1 x0 - 1 x1 = 0\n"));
        assert!(text.contains(" 0 <= x1 <= 1\n"));
        assert!(text.ends_with("End\n"));
    }

    /// Brute force for two variables in the unit box: the optimum lies on a
    /// vertex formed by two tight lines among rows and box edges.
    fn vertex_oracle(c: (f64, f64), rows: &[(f64, f64, f64)]) -> Option<f64> {
        let mut lines: Vec<(f64, f64, f64)> = rows.to_vec();
        lines.extend([(1.0, 0.0, 0.0), (1.0, 0.0, 1.0), (0.0, 1.0, 0.0), (0.0, 1.0, 1.0)]);
        let feasible = |x: f64, y: f64| {
            (-1e-9..=1.0 + 1e-9).contains(&x)
                && (-1e-9..=1.0 + 1e-9).contains(&y)
                && rows.iter().all(|&(a, b, r)| a * x + b * y <= r + 1e-9)
        };
        let mut best: Option<f64> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, r1) = lines[i];
                let (a2, b2, r2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-9 {
                    continue;
                }
                let x = (r1 * b2 - r2 * b1) / det;
                let y = (a1 * r2 - a2 * r1) / det;
                if feasible(x, y) {
                    let v = c.0 * x + c.1 * y;
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_vertex_enumeration(
            c in (-1.0f64..1.0, -1.0f64..1.0),
            rows in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -0.5f64..1.0), 0..5),
        ) {
            let mut lp = LinearProgram::new();
            let x = lp.add_variable(0.0, 1.0, c.0);
            let y = lp.add_variable(0.0, 1.0, c.1);
            for &(a, b, r) in &rows {
                lp.add_constraint(vec![(x, a), (y, b)], Relation::Le, r);
            }
            let s = lp.solve().unwrap();
            match vertex_oracle(c, &rows) {
                Some(best) => {
                    prop_assert_eq!(s.status, LpStatus::Optimal);
                    prop_assert!((s.objective - best).abs() < 1e-6, "{} vs {}", s.objective, best);
                    prop_assert!(lp.max_violation(&s.values) <= TOLERANCE);
                }
                None => prop_assert_eq!(s.status, LpStatus::Infeasible),
            }
        }
    }
}
