//! Set-valued Ekeland descent on finite metric spaces.
//!
//! For a set-valued map `f: X → 2^Y` with finite values, an ordering cone
//! `K` and a polytope `H ⊂ K` with `0 ∉ H + K`, points are pre-ordered by
//!
//! ```text
//! x' ⪯ x  ⟺  f(x) ⊂ f(x') + s·d(x, x')·H + K
//! ```
//!
//! where the scale `s` is 1 (plain), `ε/λ` (scaled) or `γ` (efficiency).
//! `S(x) = {x' : x' ⪯ x}` is the lower section. Given `y₀ ∈ f(x₀)` with
//! `y₀ ∉ f(S(x₀)) + εH + K`, the solver descends along
//! `ξ(y) = φ(y − y₀)`: from `z` it moves to the point of `S(z) \ {z}` with the
//! smallest `inf ξ∘f` (ties by label), and stops at a point whose section is a singleton.
//! The result `x̄` satisfies
//!
//! * (a) `f(x₀) ⊂ f(x̄) + s·d(x₀, x̄)·H + K`, and
//! * (b) `f(x̄) ⊄ f(x) + s·d(x̄, x)·H + K` for every `x ≠ x̄`.
//!
//! On a finite space completeness and dynamic closedness hold trivially,
//! and every step strictly shrinks the section, so the descent ends after
//! at most `|X|` moves.

use std::collections::HashMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::geometry::{
    in_scaled_h_plus_k, zero_notin_h_plus_k, ConeGen, GeometryError, Polytope,
};
use crate::lp::Backend;
use crate::rational::{format_vector, int, sub, Rat, Vector};
use crate::scalarization::{inf_xi, ExtendedReal, ScalarizationError, SeparationFunctional};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvpError {
    #[error("invalid metric space: {0}")]
    Metric(String),
    #[error("invalid set-valued map: {0}")]
    Map(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Scalarization(#[from] ScalarizationError),
    #[error("hypothesis violated: no y0 in f(x0) escapes f(S(x0)) + εH + K ({})", describe_blockers(.0))]
    HypothesisViolated(Vec<Blocker>),
    #[error("internal consistency: {0}")]
    Internal(String),
}

impl From<GeometryError> for EvpError {
    fn from(e: GeometryError) -> Self {
        EvpError::Scalarization(e.into())
    }
}

/// Why a candidate `y₀` fails: `y₀ ∈ y + εH + K` with `y ∈ f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocker {
    pub y0: Vector,
    pub x: String,
    pub y: Vector,
}

fn describe_blockers(blockers: &[Blocker]) -> String {
    blockers
        .iter()
        .map(|b| format!("y0={} blocked by f({})∋{}", format_vector(&b.y0), b.x, format_vector(&b.y)))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Rat>>,
    index: HashMap<String, usize>,
}

impl FiniteMetricSpace {
    /// Checks the metric axioms, including every triangle inequality.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rat>>) -> Result<Self, EvpError> {
        let n = labels.len();
        if n == 0 {
            return Err(EvpError::Metric("the space has no points".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(EvpError::Metric(format!("duplicate label {l:?}")));
            }
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(EvpError::Metric(format!("distance matrix must be {n}×{n}")));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(EvpError::Metric(format!("d({0},{0}) ≠ 0", labels[i])));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(EvpError::Metric(format!(
                        "d({},{}) ≠ d({},{})",
                        labels[i], labels[j], labels[j], labels[i]
                    )));
                }
                if i != j && dist[i][j] <= Rat::zero() {
                    return Err(EvpError::Metric(format!(
                        "d({},{}) must be positive",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return Err(EvpError::Metric(format!(
                            "triangle inequality fails: d({},{}) > d({},{}) + d({},{})",
                            labels[i], labels[k], labels[i], labels[j], labels[j], labels[k]
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { labels, dist, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: PointId) -> &str {
        &self.labels[p.0]
    }

    pub fn point(&self, label: &str) -> Result<PointId, EvpError> {
        self.index
            .get(label)
            .map(|&i| PointId(i))
            .ok_or_else(|| EvpError::UnknownLabel(label.to_string()))
    }

    pub fn dist(&self, a: PointId, b: PointId) -> &Rat {
        &self.dist[a.0][b.0]
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.labels.len()).map(PointId)
    }
}

/// Finite nonempty value lists, one per point of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct SetValuedMapTable {
    dim: usize,
    values: Vec<Vec<Vector>>,
}

impl SetValuedMapTable {
    pub fn new(
        space: &FiniteMetricSpace,
        mut entries: HashMap<String, Vec<Vector>>,
        dim: usize,
    ) -> Result<Self, EvpError> {
        let mut values = Vec::with_capacity(space.len());
        for label in space.labels() {
            let vs = entries
                .remove(label)
                .ok_or_else(|| EvpError::Map(format!("no value for {label:?}")))?;
            if vs.is_empty() {
                return Err(EvpError::Map(format!("f({label}) is empty")));
            }
            if let Some(v) = vs.iter().find(|v| v.len() != dim) {
                return Err(EvpError::Map(format!(
                    "f({label}) contains a vector of dimension {} (expected {dim})",
                    v.len()
                )));
            }
            values.push(vs);
        }
        if let Some(extra) = entries.keys().next() {
            return Err(EvpError::UnknownLabel(extra.clone()));
        }
        Ok(SetValuedMapTable { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self, p: PointId) -> &[Vector] {
        &self.values[p.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Plain,
    /// Scale `ε/λ`; conclusion (c) `d(x₀, x̄) ≤ λ`.
    Scaled { epsilon: Rat, lambda: Rat },
    /// Scale `γ` on the feasible set; condition (ii) in the approximate
    /// efficiency form, and the extra distance and gap checks.
    Efficiency { gamma: Rat },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvpProblem {
    space: FiniteMetricSpace,
    map: SetValuedMapTable,
    functional: SeparationFunctional,
    x0: PointId,
    epsilon: Rat,
    mode: Mode,
    feasible: Vec<bool>,
    backend: Backend,
}

impl EvpProblem {
    pub fn new(
        space: FiniteMetricSpace,
        map: SetValuedMapTable,
        k: ConeGen,
        h: Polytope,
        x0: &str,
        epsilon: Rat,
        mode: Mode,
    ) -> Result<Self, EvpError> {
        if map.dim() != k.dim() || h.dim() != k.dim() {
            return Err(EvpError::Parameter(format!(
                "dimensions disagree: map {}, K {}, H {}",
                map.dim(),
                k.dim(),
                h.dim()
            )));
        }
        if epsilon <= Rat::zero() {
            return Err(EvpError::Parameter("epsilon must be positive".into()));
        }
        match &mode {
            Mode::Plain => {}
            Mode::Scaled { epsilon, lambda } => {
                if *epsilon <= Rat::zero() || *lambda <= Rat::zero() {
                    return Err(EvpError::Parameter(
                        "scaled mode needs positive epsilon and lambda".into(),
                    ));
                }
            }
            Mode::Efficiency { gamma } => {
                if *gamma <= Rat::zero() {
                    return Err(EvpError::Parameter("gamma must be positive".into()));
                }
            }
        }
        let x0 = space.point(x0)?;
        let functional = SeparationFunctional::new(h, k)?;
        let feasible = vec![true; space.len()];
        Ok(EvpProblem {
            space,
            map,
            functional,
            x0,
            epsilon,
            mode,
            feasible,
            backend: Backend::Exact,
        })
    }

    /// Restricts the problem to a feasible subset; `x₀` must belong to it.
    pub fn with_feasible_set(mut self, labels: &[String]) -> Result<Self, EvpError> {
        let mut feasible = vec![false; self.space.len()];
        for l in labels {
            feasible[self.space.point(l)?.0] = true;
        }
        if !feasible[self.x0.0] {
            return Err(EvpError::Parameter(format!(
                "x0 = {:?} is not in the feasible set",
                self.space.label(self.x0)
            )));
        }
        self.feasible = feasible;
        Ok(self)
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self.functional = self.functional.with_backend(backend);
        self
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn map(&self) -> &SetValuedMapTable {
        &self.map
    }

    pub fn functional(&self) -> &SeparationFunctional {
        &self.functional
    }

    pub fn h(&self) -> &Polytope {
        self.functional.h()
    }

    pub fn k(&self) -> &ConeGen {
        self.functional.k()
    }

    pub fn x0(&self) -> PointId {
        self.x0
    }

    pub fn epsilon(&self) -> &Rat {
        &self.epsilon
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn point(&self, label: &str) -> Result<PointId, EvpError> {
        self.space.point(label)
    }

    pub fn label(&self, p: PointId) -> &str {
        self.space.label(p)
    }

    pub fn is_feasible(&self, p: PointId) -> bool {
        self.feasible[p.0]
    }

    pub fn feasible_points(&self) -> impl Iterator<Item = PointId> + '_ {
        self.space.points().filter(|&p| self.feasible[p.0])
    }

    /// Multiplier applied to distances in the pre-order.
    pub fn scale(&self) -> Rat {
        match &self.mode {
            Mode::Plain => Rat::one(),
            Mode::Scaled { epsilon, lambda } => epsilon / lambda,
            Mode::Efficiency { gamma } => gamma.clone(),
        }
    }

    /// The bound `d(x₀, x̄) ≤ λ` asserted by conclusion (c), if the mode has one.
    pub fn distance_bound(&self) -> Option<Rat> {
        match &self.mode {
            Mode::Plain => None,
            Mode::Scaled { lambda, .. } => Some(lambda.clone()),
            Mode::Efficiency { gamma } => Some(&self.epsilon / gamma),
        }
    }

    /// Warnings about parameter combinations the guarantees do not cover.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Mode::Scaled { epsilon, .. } = &self.mode {
            if *epsilon != self.epsilon {
                out.push(format!(
                    "scaled-mode epsilon {} differs from condition (ii) epsilon {}; \
                     d(x0, xbar) <= lambda is not guaranteed",
                    epsilon, self.epsilon
                ));
            }
        }
        if let Mode::Efficiency { .. } = &self.mode {
            if !self.k().is_pointed() {
                out.push("efficiency mode assumes a pointed cone".into());
            }
        }
        out
    }

    /// `v ∈ s·H + K`.
    pub fn in_perturbed_cone(&self, v: &[Rat], s: &Rat) -> Result<bool, EvpError> {
        Ok(in_scaled_h_plus_k(self.h(), self.k(), v, s, self.backend)?)
    }

    /// `x' ⪯ x`: every `y ∈ f(x)` lies in `y' + s·d(x,x')·H + K` for some
    /// `y' ∈ f(x')`.
    pub fn dominates(&self, x_prime: PointId, x: PointId) -> Result<bool, EvpError> {
        let s = self.scale() * self.space.dist(x, x_prime);
        for y in self.map.values(x) {
            let mut covered = false;
            for y_prime in self.map.values(x_prime) {
                if self.in_perturbed_cone(&sub(y, y_prime), &s)? {
                    covered = true;
                    break;
                }
            }
            if !covered {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn dominates_labels(&self, x_prime: &str, x: &str) -> Result<bool, EvpError> {
        self.dominates(self.point(x_prime)?, self.point(x)?)
    }

    /// `S(x)` within the feasible set, in index order. Always contains `x`
    /// when `x` is feasible.
    pub fn lower_section(&self, x: PointId) -> Result<Vec<PointId>, EvpError> {
        let mut out = Vec::new();
        for p in self.feasible_points() {
            if p == x || self.dominates(p, x)? {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Candidates `y₀ ∈ f(x₀)` in order; returns the first whose every
    /// translate `y₀ − y` (`y ∈ f(x)`, `x` in `pool`) misses `εH + K`.
    fn escaping_value(
        &self,
        pool: &[PointId],
        epsilon: &Rat,
        x0: PointId,
    ) -> Result<Result<Vector, Vec<Blocker>>, EvpError> {
        let mut blockers = Vec::new();
        'candidates: for y0 in self.map.values(x0) {
            for &x in pool {
                for y in self.map.values(x) {
                    if self.in_perturbed_cone(&sub(y0, y), epsilon)? {
                        blockers.push(Blocker {
                            y0: y0.clone(),
                            x: self.label(x).to_string(),
                            y: y.clone(),
                        });
                        continue 'candidates;
                    }
                }
            }
            return Ok(Ok(y0.clone()));
        }
        Ok(Err(blockers))
    }

    /// Condition (ii): some `y₀ ∈ f(x₀)` with `y₀ ∉ f(S(x₀)) + εH + K`. In
    /// efficiency mode the pool is the whole feasible set.
    pub fn condition_ii_witness(&self) -> Result<Option<Vector>, EvpError> {
        Ok(self.condition_ii()?.ok())
    }

    fn condition_ii(&self) -> Result<Result<Vector, Vec<Blocker>>, EvpError> {
        match self.mode {
            Mode::Efficiency { .. } => {
                let pool: Vec<PointId> = self.feasible_points().collect();
                self.escaping_value(&pool, &self.epsilon, self.x0)
            }
            _ => {
                let section = self.lower_section(self.x0)?;
                self.escaping_value(&section, &self.epsilon, self.x0)
            }
        }
    }

    /// Approximate efficiency of `x`: some `y₀ ∈ f(x)` with
    /// `(f(S) − y₀) ∩ (−εH − K) = ∅`.
    pub fn ae_efficient(&self, x: PointId, epsilon: &Rat) -> Result<Option<Vector>, EvpError> {
        if *epsilon <= Rat::zero() {
            return Err(EvpError::Parameter("epsilon must be positive".into()));
        }
        if !self.is_feasible(x) {
            return Err(EvpError::Parameter(format!(
                "{:?} is not in the feasible set",
                self.label(x)
            )));
        }
        let pool: Vec<PointId> = self.feasible_points().collect();
        Ok(self.escaping_value(&pool, epsilon, x)?.ok())
    }

    /// `inf_{y ∈ f(x)} φ(y − y₀)`.
    pub fn inf_xi(&self, x: PointId, y0: &[Rat]) -> Result<ExtendedReal, EvpError> {
        Ok(inf_xi(&self.functional, self.map.values(x), y0)?)
    }

    /// Runs the descent. Fails with [`EvpError::HypothesisViolated`] when
    /// condition (ii) has no witness.
    pub fn solve(&self) -> Result<EvpCertificate, EvpError> {
        let y0 = match self.condition_ii()? {
            Ok(y0) => y0,
            Err(blockers) => return Err(EvpError::HypothesisViolated(blockers)),
        };

        let section0 = self.lower_section(self.x0)?;
        self.check_step_one_bound(&section0, &y0)?;

        let mut chain = vec![self.x0];
        let mut trace = vec![self.inf_xi(self.x0, &y0)?];
        let mut current = self.x0;
        let mut section = section0;
        loop {
            let mut best: Option<(ExtendedReal, PointId)> = None;
            for &p in section.iter().filter(|&&p| p != current) {
                let value = self.inf_xi(p, &y0)?;
                let better = match &best {
                    None => true,
                    Some((b, q)) => value < *b || (value == *b && self.label(p) < self.label(*q)),
                };
                if better {
                    best = Some((value, p));
                }
            }
            let Some((value, next)) = best else { break };
            if chain.contains(&next) {
                return Err(EvpError::Internal(format!(
                    "descent revisited {:?}; the pre-order has a cycle",
                    self.label(next)
                )));
            }
            chain.push(next);
            trace.push(value);
            current = next;
            section = self.lower_section(current)?;
        }

        Ok(EvpCertificate {
            xbar: self.label(current).to_string(),
            y0,
            chain: chain.iter().map(|&p| self.label(p).to_string()).collect(),
            xi_trace: trace,
        })
    }

    // −ε ≤ inf ξ∘f(S(x₀)) ≤ 0
    fn check_step_one_bound(&self, section: &[PointId], y0: &[Rat]) -> Result<(), EvpError> {
        let mut low = ExtendedReal::PlusInfinity;
        for &p in section {
            low = low.min(self.inf_xi(p, y0)?);
        }
        let ok = match low.finite() {
            Some(v) => {
                let slack = self.float_slack();
                *v >= -&self.epsilon - &slack && *v <= slack
            }
            None => false,
        };
        if ok {
            Ok(())
        } else {
            Err(EvpError::Internal(format!(
                "inf ξ∘f(S(x0)) = {low} outside [−ε, 0]"
            )))
        }
    }

    fn float_slack(&self) -> Rat {
        match self.backend {
            Backend::Exact => Rat::zero(),
            Backend::Float { tol } => {
                crate::rational::from_f64(tol * 1e3).unwrap_or_else(Rat::zero)
            }
        }
    }

    /// Brute-force check of the certificate's conclusions, using only the
    /// pre-order and the metric.
    pub fn verify_certificate(&self, cert: &EvpCertificate) -> Result<VerificationReport, EvpError> {
        let xbar = self.point(&cert.xbar)?;
        if cert.y0.len() != self.map.dim() {
            return Err(EvpError::Parameter(format!(
                "certificate y0 has dimension {}, problem has {}",
                cert.y0.len(),
                self.map.dim()
            )));
        }
        let chain: Vec<PointId> = cert
            .chain
            .iter()
            .map(|l| self.point(l))
            .collect::<Result<_, _>>()?;

        let mut report = VerificationReport {
            y0_in_f_x0: self.map.values(self.x0).contains(&cert.y0),
            ..Default::default()
        };
        if !report.y0_in_f_x0 {
            report.failures.push("y0: not an element of f(x0)".into());
        }

        report.chain = chain.first() == Some(&self.x0)
            && chain.last() == Some(&xbar)
            && chain.iter().all(|&p| self.is_feasible(p));
        if report.chain {
            for w in chain.windows(2) {
                if !self.dominates(w[1], w[0])? {
                    report.chain = false;
                    break;
                }
            }
        }
        if !report.chain {
            report
                .failures
                .push("chain: must run from x0 to xbar through successive lower sections".into());
        }

        report.a = self.is_feasible(xbar) && self.dominates(xbar, self.x0)?;
        if !report.a {
            report.failures.push(format!(
                "(a): f(x0) ⊄ f({}) + s·d(x0, xbar)·H + K",
                cert.xbar
            ));
        }

        report.b = self.is_feasible(xbar);
        for x in self.feasible_points().filter(|&x| x != xbar) {
            if self.dominates(x, xbar)? {
                report.b = false;
                report.failures.push(format!(
                    "(b): f({}) ⊂ f({}) + s·d·H + K",
                    cert.xbar,
                    self.label(x)
                ));
                break;
            }
        }

        if let Some(bound) = self.distance_bound() {
            let ok = *self.space.dist(self.x0, xbar) <= bound;
            if !ok {
                report
                    .failures
                    .push(format!("(c): d(x0, {}) exceeds {}", cert.xbar, bound));
            }
            report.c = Some(ok);
        }

        if let Mode::Efficiency { gamma } = &self.mode {
            let gap = self.efficiency_gap_check(xbar, &self.epsilon, gamma, DEFAULT_GRID_DEPTH)?;
            if !gap.found {
                report
                    .failures
                    .push("(gap): no h with d(x0,xbar)·h ∉ (ε/γ)(H+K) found (search exhausted)".into());
            }
            report.gap = Some(gap.found);
        }
        Ok(report)
    }

    /// Searches for `h ∈ H` with `d(x₀, x̄)·h ∉ (ε/γ)(H + K)`; such an `h`
    /// lies in `d(x₀,x̄)·H ∩ (ε/γ)(cone(C_H) \ C_H)` for `C_H = H + K`.
    /// Vertices are tried first, then barycentric grids with denominators
    /// `2, 4, …, 2^depth`.
    pub fn efficiency_gap_check(
        &self,
        xbar: PointId,
        epsilon: &Rat,
        gamma: &Rat,
        depth: u32,
    ) -> Result<SearchOutcome, EvpError> {
        if *gamma <= Rat::zero() {
            return Err(EvpError::Parameter("gamma must be positive".into()));
        }
        let d = self.space.dist(self.x0, xbar).clone();
        let ratio = epsilon / gamma;
        let vertices = self.h().vertices();
        let mut tried = 0usize;

        let mut test = |h: &Vector| -> Result<bool, EvpError> {
            tried += 1;
            let point: Vector = h.iter().map(|c| &d * c).collect();
            Ok(!self.in_perturbed_cone(&point, &ratio)?)
        };

        for v in vertices {
            if test(v)? {
                return Ok(SearchOutcome { found: true, candidates_tried: tried, witness: Some(v.clone()) });
            }
        }
        for level in 1..=depth {
            let denom = 1u32 << level;
            let mut weights = vec![0u32; vertices.len()];
            let mut found = None;
            for_each_composition(&mut weights, 0, denom, &mut |w| {
                if found.is_some() {
                    return Ok(());
                }
                let h: Vector = (0..vertices[0].len())
                    .map(|c| {
                        w.iter()
                            .zip(vertices)
                            .fold(Rat::zero(), |acc, (&wi, v)| acc + Rat::new(wi.into(), denom.into()) * &v[c])
                    })
                    .collect();
                if test(&h)? {
                    found = Some(h);
                }
                Ok(())
            })?;
            if let Some(h) = found {
                return Ok(SearchOutcome { found: true, candidates_tried: tried, witness: Some(h) });
            }
        }
        Ok(SearchOutcome { found: false, candidates_tried: tried, witness: None })
    }

    /// Recomputes `inf ξ∘f` along the certificate chain and checks
    /// `inf ξ∘f(zᵢ) − inf ξ∘f(zᵢ₊₁) ≥ s·d(zᵢ, zᵢ₊₁)` for every step.
    pub fn descent_steps(&self, cert: &EvpCertificate) -> Result<Vec<DescentStep>, EvpError> {
        let chain: Vec<PointId> = cert
            .chain
            .iter()
            .map(|l| self.point(l))
            .collect::<Result<_, _>>()?;
        let scale = self.scale();
        let mut steps = Vec::new();
        for w in chain.windows(2) {
            let from_value = self.inf_xi(w[0], &cert.y0)?;
            let to_value = self.inf_xi(w[1], &cert.y0)?;
            let required = &scale * self.space.dist(w[0], w[1]);
            let holds = match (from_value.finite(), to_value.finite()) {
                (Some(a), Some(b)) => a - b >= &required - self.float_slack(),
                _ => false,
            };
            steps.push(DescentStep {
                from: self.label(w[0]).to_string(),
                to: self.label(w[1]).to_string(),
                from_value,
                to_value,
                required,
                holds,
            });
        }
        Ok(steps)
    }
}

pub const DEFAULT_GRID_DEPTH: u32 = 3;

fn for_each_composition(
    weights: &mut Vec<u32>,
    idx: usize,
    remaining: u32,
    visit: &mut dyn FnMut(&[u32]) -> Result<(), EvpError>,
) -> Result<(), EvpError> {
    if idx + 1 == weights.len() {
        weights[idx] = remaining;
        return visit(weights);
    }
    for w in 0..=remaining {
        weights[idx] = w;
        for_each_composition(weights, idx + 1, remaining - w, visit)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub found: bool,
    pub candidates_tried: usize,
    pub witness: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentStep {
    pub from: String,
    pub to: String,
    pub from_value: ExtendedReal,
    pub to_value: ExtendedReal,
    pub required: Rat,
    pub holds: bool,
}

/// Solver output: the endpoint, the condition-(ii) witness and the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct EvpCertificate {
    pub xbar: String,
    pub y0: Vector,
    pub chain: Vec<String>,
    /// `inf ξ∘f(zᵢ)` for each chain point.
    pub xi_trace: Vec<ExtendedReal>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub a: bool,
    pub b: bool,
    pub c: Option<bool>,
    pub gap: Option<bool>,
    pub chain: bool,
    pub y0_in_f_x0: bool,
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.a && self.b && self.chain && self.y0_in_f_x0 && self.c != Some(false) && self.gap != Some(false)
    }
}

/// The three-point instance used throughout the docs and tests:
/// `X = {a, b, c}` on a line, `K = R²₊`, `H = {(1,1)}`,
/// `f(a) = {(4,4)}`, `f(b) = {(2,2)}`, `f(c) = {(0,0)}`, `x₀ = a`.
pub fn tiny3(epsilon: Rat, mode: Mode) -> EvpProblem {
    let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let dist = vec![
        vec![int(0), int(1), int(2)],
        vec![int(1), int(0), int(1)],
        vec![int(2), int(1), int(0)],
    ];
    let space = FiniteMetricSpace::new(labels, dist).expect("valid metric");
    let entries: HashMap<String, Vec<Vector>> = [("a", 4), ("b", 2), ("c", 0)]
        .iter()
        .map(|&(l, v)| (l.to_string(), vec![vec![int(v), int(v)]]))
        .collect();
    let map = SetValuedMapTable::new(&space, entries, 2).expect("valid map");
    let h = Polytope::new(vec![vec![int(1), int(1)]]).expect("valid polytope");
    EvpProblem::new(space, map, ConeGen::orthant(2), h, "a", epsilon, mode).expect("valid problem")
}

/// `0 ∉ H + K` for the problem's perturbation (always true once built).
pub fn perturbation_is_separated(p: &EvpProblem) -> Result<bool, EvpError> {
    Ok(zero_notin_h_plus_k(p.h(), p.k())?)
}
