//! Linear feasibility and optimization oracle.
//!
//! Programs are stated over exact rationals in equality form
//! `A x = b` with a per-variable nonnegativity flag. Two backends solve them:
//!
//! * [`Backend::Exact`] runs a dense two-phase simplex over [`Rat`] with
//!   Bland's rule, so infeasibility and unboundedness are certified.
//! * [`Backend::Float`] runs the same tableau code over `f64`, treating
//!   anything within `tol` of zero as zero. Results whose decisive quantity
//!   lands near that threshold are flagged [`LpResult::marginal`].
//!
//! Free variables are split as `x = x⁺ − x⁻` internally; witnesses are
//! always reported in the caller's variables.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{from_f64, to_f64, Rat, Vector};

/// Default float tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

const FLOAT_ITERATION_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Backend {
    #[default]
    Exact,
    Float {
        tol: f64,
    },
}

impl Backend {
    pub fn float() -> Self {
        Backend::Float {
            tol: DEFAULT_TOLERANCE,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Backend::Exact)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Feasibility,
    Minimize(Vector),
    Maximize(Vector),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Structural(String),
    #[error("float simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("float backend produced a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    rows: Vec<Vector>,
    rhs: Vector,
    nonneg: Vec<bool>,
    objective: Objective,
}

impl LinearProgram {
    /// A feasibility program over `num_vars` nonnegative variables and no rows.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            rows: Vec::new(),
            rhs: Vec::new(),
            nonneg: vec![true; num_vars],
            objective: Objective::Feasibility,
        }
    }

    /// Builds a program from raw parts, checking dimensions.
    pub fn from_parts(
        num_vars: usize,
        rows: Vec<Vector>,
        rhs: Vector,
        nonneg: Vec<bool>,
        objective: Objective,
    ) -> Result<Self, LpError> {
        let lp = LinearProgram {
            num_vars,
            rows,
            rhs,
            nonneg,
            objective,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn rhs(&self) -> &[Rat] {
        &self.rhs
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Marks variable `var` as free (unrestricted in sign).
    pub fn free(mut self, var: usize) -> Self {
        self.nonneg[var] = false;
        self
    }

    /// Appends a fresh variable and returns its index.
    pub fn add_var(&mut self, nonneg: bool) -> usize {
        self.num_vars += 1;
        self.nonneg.push(nonneg);
        for row in &mut self.rows {
            row.push(Rat::zero());
        }
        if let Objective::Minimize(c) | Objective::Maximize(c) = &mut self.objective {
            c.push(Rat::zero());
        }
        self.num_vars - 1
    }

    pub fn add_eq(&mut self, coeffs: Vector, rhs: Rat) {
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    /// `coeffs · x ≥ rhs`, realized with a fresh nonnegative surplus variable.
    pub fn add_ge(&mut self, mut coeffs: Vector, rhs: Rat) {
        let surplus = self.add_var(true);
        coeffs.resize(self.num_vars, Rat::zero());
        coeffs[surplus] = -Rat::one();
        self.add_eq(coeffs, rhs);
    }

    /// `coeffs · x ≤ rhs`, realized with a fresh nonnegative slack variable.
    pub fn add_le(&mut self, mut coeffs: Vector, rhs: Rat) {
        let slack = self.add_var(true);
        coeffs.resize(self.num_vars, Rat::zero());
        coeffs[slack] = Rat::one();
        self.add_eq(coeffs, rhs);
    }

    pub fn minimize(mut self, c: Vector) -> Self {
        self.objective = Objective::Minimize(c);
        self
    }

    pub fn maximize(mut self, c: Vector) -> Self {
        self.objective = Objective::Maximize(c);
        self
    }

    pub fn set_objective(&mut self, objective: Objective) {
        self.objective = objective;
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.rows.len() != self.rhs.len() {
            return Err(LpError::Structural(format!(
                "{} rows but {} right-hand sides",
                self.rows.len(),
                self.rhs.len()
            )));
        }
        if self.nonneg.len() != self.num_vars {
            return Err(LpError::Structural(format!(
                "{} sign flags for {} variables",
                self.nonneg.len(),
                self.num_vars
            )));
        }
        if let Some((i, row)) = self
            .rows
            .iter()
            .enumerate()
            .find(|(_, row)| row.len() != self.num_vars)
        {
            return Err(LpError::Structural(format!(
                "row {i} has width {} but the program has {} variables",
                row.len(),
                self.num_vars
            )));
        }
        if let Objective::Minimize(c) | Objective::Maximize(c) = &self.objective {
            if c.len() != self.num_vars {
                return Err(LpError::Structural(format!(
                    "objective has {} coefficients for {} variables",
                    c.len(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    /// Largest constraint violation of `x`, counting sign restrictions.
    pub fn max_violation(&self, x: &[Rat]) -> Rat {
        let mut worst = Rat::zero();
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            let lhs = row.iter().zip(x).fold(Rat::zero(), |acc, (a, v)| acc + a * v);
            let gap = (lhs - b).abs();
            if gap > worst {
                worst = gap;
            }
        }
        for (v, &nn) in x.iter().zip(&self.nonneg) {
            if nn && v.is_negative() && -v > worst {
                worst = -v;
            }
        }
        worst
    }

    /// Whether `x` satisfies every constraint within `tol` (exactly for zero).
    pub fn is_satisfied_by(&self, x: &[Rat], tol: &Rat) -> bool {
        x.len() == self.num_vars && self.max_violation(x) <= *tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus {
    Feasible { value: Rat, witness: Vector },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Float backend only: the outcome was decided by a quantity within
    /// three decades of the tolerance, so it should not be trusted blindly.
    pub marginal: bool,
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, LpStatus::Feasible { .. })
    }

    pub fn value(&self) -> Option<&Rat> {
        match &self.status {
            LpStatus::Feasible { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&[Rat]> {
        match &self.status {
            LpStatus::Feasible { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

pub fn solve(lp: &LinearProgram, backend: Backend) -> Result<LpResult, LpError> {
    lp.validate()?;
    let std_form = StandardForm::from_program(lp);
    match backend {
        Backend::Exact => {
            let outcome = simplex(
                &std_form.a,
                &std_form.b,
                std_form.cost.as_deref(),
                Rat::zero(),
                usize::MAX,
            )?;
            Ok(LpResult {
                status: std_form.lift(outcome, |v| v.clone()),
                marginal: false,
            })
        }
        Backend::Float { tol } => {
            let a: Vec<Vec<f64>> = std_form
                .a
                .iter()
                .map(|row| row.iter().map(to_f64).collect())
                .collect();
            let b: Vec<f64> = std_form.b.iter().map(to_f64).collect();
            let cost: Option<Vec<f64>> = std_form
                .cost
                .as_ref()
                .map(|c| c.iter().map(to_f64).collect());
            let outcome = simplex(&a, &b, cost.as_deref(), tol, FLOAT_ITERATION_LIMIT)?;

            let mut marginal = near_threshold(outcome.phase_one_residual, tol);
            let status = std_form.try_lift(outcome)?;
            if let LpStatus::Feasible { witness, .. } = &status {
                let violation = to_f64(&lp.max_violation(witness));
                marginal |= violation > tol * 1e-3;
            }
            Ok(LpResult { status, marginal })
        }
    }
}

/// Feasibility-only shortcut.
pub fn is_feasible(lp: &LinearProgram, backend: Backend) -> Result<bool, LpError> {
    Ok(solve(lp, backend)?.is_feasible())
}

fn near_threshold(value: f64, tol: f64) -> bool {
    value > tol * 1e-3 && value < tol * 1e3
}

/// `A x = b, x ≥ 0, b ≥ 0` with columns mapped back to caller variables.
struct StandardForm {
    a: Vec<Vector>,
    b: Vector,
    /// Minimization cost; `None` for feasibility.
    cost: Option<Vector>,
    /// For each caller variable: (positive column, negative column if free).
    columns: Vec<(usize, Option<usize>)>,
    negate_value: bool,
}

impl StandardForm {
    fn from_program(lp: &LinearProgram) -> Self {
        let mut columns = Vec::with_capacity(lp.num_vars);
        let mut next = 0;
        for &nn in &lp.nonneg {
            if nn {
                columns.push((next, None));
                next += 1;
            } else {
                columns.push((next, Some(next + 1)));
                next += 2;
            }
        }
        let expand = |coeffs: &[Rat]| -> Vector {
            let mut out = vec![Rat::zero(); next];
            for (c, &(pos, negc)) in coeffs.iter().zip(&columns) {
                out[pos] = c.clone();
                if let Some(n) = negc {
                    out[n] = -c;
                }
            }
            out
        };

        let mut a = Vec::with_capacity(lp.rows.len());
        let mut b = Vec::with_capacity(lp.rows.len());
        for (row, rhs) in lp.rows.iter().zip(&lp.rhs) {
            let mut row = expand(row);
            let mut rhs = rhs.clone();
            if rhs.is_negative() {
                row.iter_mut().for_each(|v| *v = -v.clone());
                rhs = -rhs;
            }
            a.push(row);
            b.push(rhs);
        }
        let (cost, negate_value) = match &lp.objective {
            Objective::Feasibility => (None, false),
            Objective::Minimize(c) => (Some(expand(c)), false),
            Objective::Maximize(c) => (Some(expand(&c.iter().map(|v| -v).collect::<Vec<_>>())), true),
        };
        StandardForm {
            a,
            b,
            cost,
            columns,
            negate_value,
        }
    }

    fn lift<T>(&self, outcome: SimplexOutcome<T>, conv: impl Fn(&T) -> Rat) -> LpStatus {
        match outcome.status {
            SimplexStatus::Infeasible => LpStatus::Infeasible,
            SimplexStatus::Unbounded => LpStatus::Unbounded,
            SimplexStatus::Optimal { value, x } => {
                let x: Vec<Rat> = x.iter().map(&conv).collect();
                let witness = self
                    .columns
                    .iter()
                    .map(|&(p, n)| match n {
                        Some(n) => &x[p] - &x[n],
                        None => x[p].clone(),
                    })
                    .collect();
                let value = conv(&value);
                LpStatus::Feasible {
                    value: if self.negate_value { -value } else { value },
                    witness,
                }
            }
        }
    }

    fn try_lift(&self, outcome: SimplexOutcome<f64>) -> Result<LpStatus, LpError> {
        if let SimplexStatus::Optimal { value, x } = &outcome.status {
            if !value.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite);
            }
        }
        Ok(self.lift(outcome, |v| from_f64(*v).unwrap_or_else(Rat::zero)))
    }
}

enum SimplexStatus<T> {
    Optimal { value: T, x: Vec<T> },
    Infeasible,
    Unbounded,
}

struct SimplexOutcome<T> {
    status: SimplexStatus<T>,
    phase_one_residual: f64,
}

trait Residual {
    fn residual(&self) -> f64;
}

impl Residual for Rat {
    fn residual(&self) -> f64 {
        to_f64(self)
    }
}

impl Residual for f64 {
    fn residual(&self) -> f64 {
        *self
    }
}

/// Dense tableau: `rows[i]` holds the constraint coefficients followed by
/// the right-hand side; `obj` holds reduced costs followed by the negated
/// objective value.
struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    tol: T,
    snap: T,
}

impl<T> Tableau<T>
where
    T: Clone + Signed + PartialOrd,
{
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn is_pos(&self, v: &T) -> bool {
        *v > self.tol
    }

    fn clean(&self, v: T) -> T {
        if v.abs() <= self.snap {
            T::zero()
        } else {
            v
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let rhs_col = self.width();
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        self.rows[r][c] = T::one();
        let pivot_row = self.rows[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..=rhs_col {
                if pivot_row[j].is_zero() {
                    continue;
                }
                let v = self.rows[i][j].clone() - factor.clone() * pivot_row[j].clone();
                self.rows[i][j] = self.clean(v);
            }
            self.rows[i][c] = T::zero();
        }
        let factor = self.obj[c].clone();
        if !factor.is_zero() {
            for j in 0..=rhs_col {
                if pivot_row[j].is_zero() {
                    continue;
                }
                let v = self.obj[j].clone() - factor.clone() * pivot_row[j].clone();
                self.obj[j] = self.clean(v);
            }
            self.obj[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Bland's rule: lowest-index improving column, lowest-index basic
    /// variable among ratio-test ties. Returns `false` if unbounded.
    fn run(&mut self, allowed: usize, limit: usize) -> Result<bool, LpError> {
        let rhs_col = self.width();
        let neg_tol = -self.tol.clone();
        for _ in 0..limit {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j] < neg_tol) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !self.is_pos(a) {
                    continue;
                }
                let ratio = self.rows[i][rhs_col].clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((best_i, best)) => {
                        let diff = ratio.clone() - best.clone();
                        diff < neg_tol
                            || (diff.abs() <= self.tol && self.basis[i] < self.basis[*best_i])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        Err(LpError::IterationLimit(limit))
    }
}

fn simplex<T>(
    a: &[Vec<T>],
    b: &[T],
    cost: Option<&[T]>,
    tol: T,
    limit: usize,
) -> Result<SimplexOutcome<T>, LpError>
where
    T: Clone + Signed + PartialOrd + Residual,
{
    let m = a.len();
    let n = a.first().map_or_else(
        || cost.map_or(0, |c| c.len()),
        |row| row.len(),
    );
    let width = n + m;

    let mut rows = Vec::with_capacity(m);
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        let mut full = Vec::with_capacity(width + 1);
        full.extend(row.iter().cloned());
        full.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        full.push(rhs.clone());
        rows.push(full);
    }
    let mut obj = vec![T::zero(); width + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] = obj[j].clone() - row[j].clone();
        }
        obj[width] = obj[width].clone() - row[width].clone();
    }
    let snap = tol.clone() * tol_snap_factor::<T>();
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..width).collect(),
        tol,
        snap,
    };

    // Phase one.
    t.run(width, limit)?;
    let residual = -t.obj[width].clone();
    let phase_one_residual = residual.residual();
    if t.is_pos(&residual) {
        return Ok(SimplexOutcome {
            status: SimplexStatus::Infeasible,
            phase_one_residual,
        });
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // redundant and dropped.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            let col = (0..n).find(|&j| t.rows[i][j].abs() > t.tol);
            match col {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let Some(cost) = cost else {
        return Ok(SimplexOutcome {
            status: SimplexStatus::Optimal {
                value: T::zero(),
                x: t.extract(n),
            },
            phase_one_residual,
        });
    };

    // Phase two: reduced costs for the real objective.
    let mut obj = vec![T::zero(); width + 1];
    obj[..n].clone_from_slice(cost);
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        let cb = cost[bv].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..n {
            obj[j] = obj[j].clone() - cb.clone() * row[j].clone();
        }
        obj[width] = obj[width].clone() - cb.clone() * row[width].clone();
    }
    t.obj = obj;
    if !t.run(n, limit)? {
        return Ok(SimplexOutcome {
            status: SimplexStatus::Unbounded,
            phase_one_residual,
        });
    }
    Ok(SimplexOutcome {
        status: SimplexStatus::Optimal {
            value: -t.obj[width].clone(),
            x: t.extract(n),
        },
        phase_one_residual,
    })
}

fn tol_snap_factor<T: Signed + Clone>() -> T {
    // tol * 10^-3 with only ring operations available
    let ten = T::one() + T::one() + T::one() + T::one() + T::one() + T::one() + T::one() + T::one()
        + T::one()
        + T::one();
    T::one() / (ten.clone() * ten.clone() * ten)
}

impl<T: Clone + Signed + PartialOrd> Tableau<T> {
    fn extract(&self, n: usize) -> Vec<T> {
        let rhs_col = self.width();
        let mut x = vec![T::zero(); n];
        for (row, &bv) in self.rows.iter().zip(&self.basis) {
            if bv < n {
                x[bv] = row[rhs_col].clone();
            }
        }
        x
    }
}
