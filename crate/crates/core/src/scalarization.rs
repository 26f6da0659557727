//! The nonconvex separation functional
//!
//! ```text
//! φ(y) = inf { t ∈ R : y ∈ t·H − K }      (+∞ if no such t exists)
//! ```
//!
//! for a polytope `H ⊂ K \ −K` with `0 ∉ H + K`. Under those conditions the
//! value is never `−∞`, the feasible `t` form a closed half-line, and the
//! infimum is attained.
//!
//! [`SeparationFunctional::evaluate`] computes `φ` exactly with two LPs. For
//! `t ≥ 0` substitute `μ = t·λ`, so `y = Σμᵢhᵢ − Σνⱼgⱼ` and `t = Σμᵢ` is
//! minimized. For `t < 0` substitute `μ' = −t·λ`, so `y = −Σμ'ᵢhᵢ − Σνⱼgⱼ`
//! and `t = −Σμ'ᵢ` is minimized by maximizing `Σμ'ᵢ`.
//!
//! [`SeparationFunctional::evaluate_bisection`] is an independent oracle:
//! it brackets the threshold by doubling and bisects on the fixed-`t`
//! feasibility test, relying only on monotonicity in `t`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::geometry::{
    cone_contains, scaled_h_minus_k_contains, validate_h_in_k, zero_notin_h_plus_k, ConeGen,
    GeometryError, Polytope,
};
use crate::lp::{self, Backend, LinearProgram, LpStatus, DEFAULT_TOLERANCE};
use crate::rational::{format_rational, from_f64, int, neg, sub, to_f64, Rat, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarizationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("vertex {0} of H lies in −K")]
    VertexInNegativeCone(usize),
    #[error("0 ∈ H + K, so the functional takes the value −∞")]
    ZeroInHPlusK,
    #[error("T_max must be positive")]
    BadBracket,
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("internal consistency: {0}")]
    Internal(String),
    #[error("feasible at t = −T_max; no lower bracket within [−{0}, {0}]")]
    BracketExhausted(Rat),
    #[error("the functional is +∞ at this point")]
    InfiniteValue,
}

impl From<lp::LpError> for ScalarizationError {
    fn from(e: lp::LpError) -> Self {
        ScalarizationError::Geometry(GeometryError::Lp(e))
    }
}

/// `R ∪ {+∞}`; `−∞` cannot occur for a validated functional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtendedReal {
    Finite(Rat),
    PlusInfinity,
}

impl ExtendedReal {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PlusInfinity => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn min(self, other: ExtendedReal) -> ExtendedReal {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), PlusInfinity) => Ordering::Less,
            (PlusInfinity, Finite(_)) => Ordering::Greater,
            (PlusInfinity, PlusInfinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => f.write_str(&format_rational(v)),
            ExtendedReal::PlusInfinity => f.write_str("+inf"),
        }
    }
}

/// Result of the bisection oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Bisection {
    /// Smallest feasible `t` found; within `tol` above the true value.
    pub value: ExtendedReal,
    /// No feasible `t ≤ T_max` was found, so `+∞` is not certified.
    pub unconfirmed: bool,
    pub feasibility_checks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationFunctional {
    h: Polytope,
    k: ConeGen,
    t_max: Rat,
    tol: Rat,
    backend: Backend,
}

impl SeparationFunctional {
    /// Rejects anything outside the configuration `H ⊂ K \ −K`, `0 ∉ H + K`.
    pub fn new(h: Polytope, k: ConeGen) -> Result<Self, ScalarizationError> {
        validate_h_in_k(&h, &k)?;
        for (i, v) in h.vertices().iter().enumerate() {
            if cone_contains(&k, &neg(v), Backend::Exact)? {
                return Err(ScalarizationError::VertexInNegativeCone(i));
            }
        }
        if !zero_notin_h_plus_k(&h, &k)? {
            return Err(ScalarizationError::ZeroInHPlusK);
        }
        Ok(SeparationFunctional {
            h,
            k,
            t_max: int(1 << 20),
            tol: from_f64(DEFAULT_TOLERANCE).expect("finite"),
            backend: Backend::Exact,
        })
    }

    pub fn with_t_max(mut self, t_max: Rat) -> Result<Self, ScalarizationError> {
        if !t_max.is_positive() {
            return Err(ScalarizationError::BadBracket);
        }
        self.t_max = t_max;
        Ok(self)
    }

    pub fn with_tolerance(mut self, tol: Rat) -> Result<Self, ScalarizationError> {
        if !tol.is_positive() {
            return Err(ScalarizationError::BadTolerance);
        }
        if let Backend::Float { .. } = self.backend {
            self.backend = Backend::Float { tol: to_f64(&tol) };
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn h(&self) -> &Polytope {
        &self.h
    }

    pub fn k(&self) -> &ConeGen {
        &self.k
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn tolerance(&self) -> &Rat {
        &self.tol
    }

    pub fn t_max(&self) -> &Rat {
        &self.t_max
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    fn check_dim(&self, y: &[Rat]) -> Result<(), ScalarizationError> {
        if y.len() == self.dim() {
            Ok(())
        } else {
            Err(GeometryError::Dimension {
                expected: self.dim(),
                got: y.len(),
            }
            .into())
        }
    }

    /// Exact value via the two-branch LP decomposition.
    pub fn evaluate(&self, y: &[Rat]) -> Result<ExtendedReal, ScalarizationError> {
        self.check_dim(y)?;
        let p = self.h.vertices().len();
        let m = self.k.generators().len();
        let dim = self.dim();

        // Variables: μ (one per H vertex) then ν (one per generator).
        let branch = |sign: i64| -> LinearProgram {
            let mut lp = LinearProgram::new(p + m);
            for coord in 0..dim {
                let mut row = Vec::with_capacity(p + m);
                row.extend(self.h.vertices().iter().map(|h| int(sign) * &h[coord]));
                row.extend(self.k.generators().iter().map(|g| -&g[coord]));
                lp.add_eq(row, y[coord].clone());
            }
            lp
        };
        let mut weights = vec![Rat::one(); p];
        weights.extend(std::iter::repeat_n(Rat::zero(), m));

        let threshold = match self.backend {
            Backend::Exact => Rat::zero(),
            Backend::Float { tol } => from_f64(tol).unwrap_or_else(Rat::zero),
        };

        // t < 0 branch: maximize Σμ'.
        let negative = branch(-1).maximize(weights.clone());
        match lp::solve(&negative, self.backend)?.status {
            LpStatus::Unbounded => {
                return Err(ScalarizationError::Internal(
                    "t < 0 branch unbounded although 0 ∉ H + K".into(),
                ))
            }
            LpStatus::Feasible { value, .. } if value > threshold => {
                return Ok(ExtendedReal::Finite(-value));
            }
            _ => {}
        }

        // t ≥ 0 branch: minimize Σμ.
        let nonnegative = branch(1).minimize(weights);
        match lp::solve(&nonnegative, self.backend)?.status {
            LpStatus::Feasible { value, .. } => {
                let value = if value.is_negative() { Rat::zero() } else { value };
                Ok(ExtendedReal::Finite(value))
            }
            LpStatus::Infeasible => Ok(ExtendedReal::PlusInfinity),
            LpStatus::Unbounded => Err(ScalarizationError::Internal(
                "minimizing a nonnegative sum was unbounded".into(),
            )),
        }
    }

    fn feasible_at(&self, y: &[Rat], t: &Rat) -> Result<bool, ScalarizationError> {
        Ok(scaled_h_minus_k_contains(
            &self.h, &self.k, y, t, self.backend,
        )?)
    }

    /// Doubling bracket on `[−T_max, T_max]`, then bisection to width `tol`.
    pub fn evaluate_bisection(&self, y: &[Rat]) -> Result<Bisection, ScalarizationError> {
        self.check_dim(y)?;
        let mut checks = 0usize;
        let mut feasible = |t: &Rat| -> Result<bool, ScalarizationError> {
            checks += 1;
            self.feasible_at(y, t)
        };

        let two = int(2);
        // Upper end: smallest power of two (capped at T_max) that is feasible.
        let mut hi = Rat::one().min(self.t_max.clone());
        let mut lo: Option<Rat> = None;
        loop {
            if feasible(&hi)? {
                break;
            }
            if hi >= self.t_max {
                return Ok(Bisection {
                    value: ExtendedReal::PlusInfinity,
                    unconfirmed: true,
                    feasibility_checks: checks,
                });
            }
            lo = Some(hi.clone());
            hi = (&hi * &two).min(self.t_max.clone());
        }
        // Lower end: walk down until infeasible.
        let mut lo = match lo {
            Some(lo) => lo,
            None => {
                let mut candidate = -Rat::one();
                if candidate < -self.t_max.clone() {
                    candidate = -self.t_max.clone();
                }
                loop {
                    if !feasible(&candidate)? {
                        break candidate;
                    }
                    if candidate <= -self.t_max.clone() {
                        return Err(ScalarizationError::BracketExhausted(self.t_max.clone()));
                    }
                    hi = candidate.clone();
                    candidate = (&candidate * &two).max(-self.t_max.clone());
                }
            }
        };
        while &hi - &lo > self.tol {
            let mid = (&hi + &lo) / &two;
            if feasible(&mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Bisection {
            value: ExtendedReal::Finite(hi),
            unconfirmed: false,
            feasibility_checks: checks,
        })
    }

    /// `ξ(y) = φ(y − y₀)`.
    pub fn xi(&self, y: &[Rat], y0: &[Rat]) -> Result<ExtendedReal, ScalarizationError> {
        self.check_dim(y0)?;
        self.check_dim(y)?;
        self.evaluate(&sub(y, y0))
    }

    /// `y ∈ φ(y)·H − K`. Always true for polyhedral data; a `false` means a bug.
    pub fn attainment_check(&self, y: &[Rat]) -> Result<bool, ScalarizationError> {
        match self.evaluate(y)? {
            ExtendedReal::Finite(t) => self.feasible_at(y, &t),
            ExtendedReal::PlusInfinity => Err(ScalarizationError::InfiniteValue),
        }
    }
}

/// `min_{y ∈ values} φ(y − y₀)`; `+∞` for an empty list.
pub fn inf_xi(
    f: &SeparationFunctional,
    values: &[Vector],
    y0: &[Rat],
) -> Result<ExtendedReal, ScalarizationError> {
    let mut best = ExtendedReal::PlusInfinity;
    for y in values {
        best = best.min(f.xi(y, y0)?);
    }
    Ok(best)
}
