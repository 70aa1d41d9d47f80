//! Coefficients, boundary data and the exponential weight function.

use std::fmt;
use std::sync::Arc;

use crate::mesh::Mesh1D;
use crate::quadrature::gauss_rule;
use crate::{Error, Result};

/// Number of sample points used to check coefficient signs during validation.
pub const VALIDATION_SAMPLES: usize = 101;

/// A scalar coefficient, either constant or a function of position.
#[derive(Clone)]
pub enum Field {
    Constant(f64),
    Variable(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Field {
    pub fn variable<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Field::Variable(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Field::Constant(c) => *c,
            Field::Variable(f) => f(x),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Field::Constant(c) => Some(*c),
            Field::Variable(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Field::Constant(_))
    }
}

impl From<f64> for Field {
    fn from(c: f64) -> Self {
        Field::Constant(c)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(c) => write!(f, "Constant({c})"),
            Field::Variable(_) => write!(f, "Variable(..)"),
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }
}

/// Velocity `v`, diffusivity `k`, forcing `f` and the domain.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub velocity: Field,
    pub diffusivity: Field,
    pub forcing: Field,
    pub domain: Interval,
}

impl ProblemSpec {
    pub fn new(velocity: impl Into<Field>, diffusivity: impl Into<Field>, forcing: impl Into<Field>, domain: Interval) -> Self {
        ProblemSpec {
            velocity: velocity.into(),
            diffusivity: diffusivity.into(),
            forcing: forcing.into(),
            domain,
        }
    }

    /// Constant coefficients on the unit interval.
    pub fn constant(v: f64, k: f64, f: f64) -> Self {
        Self::new(v, k, f, Interval::UNIT)
    }

    /// Element Péclet number `v h / (2 k)` with coefficients sampled at the
    /// element midpoint.
    pub fn peclet_element(&self, x_left: f64, h: f64) -> f64 {
        let mid = x_left + 0.5 * h;
        self.velocity.eval(mid) * h / (2.0 * self.diffusivity.eval(mid))
    }

    pub fn is_constant(&self) -> bool {
        self.velocity.is_constant() && self.diffusivity.is_constant() && self.forcing.is_constant()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Dirichlet value `u^p` or Neumann diffusive flux `t^p = k du/dn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub kind: BcKind,
    pub value: f64,
}

impl BoundaryCondition {
    pub fn dirichlet(value: f64) -> Self {
        BoundaryCondition { kind: BcKind::Dirichlet, value }
    }

    pub fn neumann(flux: f64) -> Self {
        BoundaryCondition { kind: BcKind::Neumann, value: flux }
    }

    pub fn is_dirichlet(&self) -> bool {
        self.kind == BcKind::Dirichlet
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

impl BoundaryConditions {
    pub fn new(left: BoundaryCondition, right: BoundaryCondition) -> Self {
        BoundaryConditions { left, right }
    }

    pub fn homogeneous_dirichlet() -> Self {
        Self::new(BoundaryCondition::dirichlet(0.0), BoundaryCondition::dirichlet(0.0))
    }

    pub fn at(&self, end: End) -> BoundaryCondition {
        match end {
            End::Left => self.left,
            End::Right => self.right,
        }
    }
}

/// A validated problem. Construct with [`validate`].
#[derive(Debug, Clone)]
pub struct Problem {
    spec: ProblemSpec,
    bcs: BoundaryConditions,
    constant: bool,
}

/// Checks the domain, the sign of `k` on a sample grid and the boundary data.
pub fn validate(spec: ProblemSpec, bcs: BoundaryConditions) -> Result<Problem> {
    let Interval { lo, hi } = spec.domain;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::EmptyDomain { lo, hi });
    }
    for i in 0..VALIDATION_SAMPLES {
        let x = lo + (hi - lo) * i as f64 / (VALIDATION_SAMPLES - 1) as f64;
        let k = spec.diffusivity.eval(x);
        if !k.is_finite() {
            return Err(Error::NonFiniteCoefficient { name: "k", x });
        }
        if k <= 0.0 {
            return Err(Error::NonPositiveDiffusivity { x, k });
        }
        if !spec.velocity.eval(x).is_finite() {
            return Err(Error::NonFiniteCoefficient { name: "v", x });
        }
        if !spec.forcing.eval(x).is_finite() {
            return Err(Error::NonFiniteCoefficient { name: "f", x });
        }
    }
    if !bcs.left.is_dirichlet() && !bcs.right.is_dirichlet() {
        return Err(Error::NoDirichletEnd);
    }
    let constant = spec.is_constant();
    Ok(Problem { spec, bcs, constant })
}

impl Problem {
    /// Constant coefficients on the unit interval, homogeneous Dirichlet data.
    pub fn model(v: f64, k: f64, f: f64) -> Result<Self> {
        validate(ProblemSpec::constant(v, k, f), BoundaryConditions::homogeneous_dirichlet())
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn bcs(&self) -> &BoundaryConditions {
        &self.bcs
    }

    pub fn domain(&self) -> Interval {
        self.spec.domain
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// `(v, k, f)` when all three are constant.
    pub fn constants(&self) -> Option<(f64, f64, f64)> {
        Some((
            self.spec.velocity.as_constant()?,
            self.spec.diffusivity.as_constant()?,
            self.spec.forcing.as_constant()?,
        ))
    }

    pub fn v(&self, x: f64) -> f64 {
        self.spec.velocity.eval(x)
    }

    pub fn k(&self, x: f64) -> f64 {
        self.spec.diffusivity.eval(x)
    }

    pub fn f(&self, x: f64) -> f64 {
        self.spec.forcing.eval(x)
    }

    pub fn peclet_element(&self, x_left: f64, h: f64) -> f64 {
        self.spec.peclet_element(x_left, h)
    }

    /// True when `v` is the constant zero field.
    pub fn velocity_vanishes(&self) -> bool {
        self.spec.velocity.as_constant() == Some(0.0)
    }

    /// Same problem with different boundary data.
    pub fn with_bcs(&self, bcs: BoundaryConditions) -> Result<Self> {
        validate(self.spec.clone(), bcs)
    }
}

#[derive(Clone)]
enum LogAlpha {
    /// `-v (x - origin) / k`
    Linear { v: f64, k: f64, origin: f64 },
    /// Node values of `-∫_{x_lo}^{x} v/k`, refined inside elements by Gauss
    /// quadrature of `v/k` from the element's left node.
    Tabulated { nodes: Vec<f64>, values: Vec<f64>, velocity: Field, diffusivity: Field },
}

/// `α(x) = exp(log_alpha(x)) * normalization`, strictly positive.
///
/// The normalization is stored as its logarithm (`log_scale`) since it can lie
/// outside the `f64` range for strongly advective problems.
#[derive(Clone)]
pub struct WeightFunction {
    repr: LogAlpha,
    log_scale: f64,
}

/// Gauss points for the cumulative `∫ v/k` inside the weight function.
const LOG_ALPHA_POINTS: usize = 5;

impl WeightFunction {
    /// `α(x) = exp(rate (x - origin))` with unit normalization.
    pub fn linear(rate: f64, origin: f64) -> Self {
        WeightFunction { repr: LogAlpha::Linear { v: -rate, k: 1.0, origin }, log_scale: 0.0 }
    }

    /// The weight making the advection-diffusion operator of `problem`
    /// symmetric, normalized so its maximum over the domain is 1.
    ///
    /// For constant `v`, `k` the mesh is not consulted.
    pub fn for_problem(problem: &Problem, mesh: &Mesh1D) -> Self {
        let dom = problem.domain();
        let spec = problem.spec();
        let repr = match (spec.velocity.as_constant(), spec.diffusivity.as_constant()) {
            (Some(v), Some(k)) => LogAlpha::Linear { v, k, origin: dom.lo },
            _ => {
                let rule = gauss_rule(LOG_ALPHA_POINTS).expect("fixed order");
                let nodes = mesh.nodes().to_vec();
                let mut values = Vec::with_capacity(nodes.len());
                let mut acc = 0.0;
                values.push(acc);
                for w in nodes.windows(2) {
                    acc -= rule.integrate(w[0], w[1], |x| problem.v(x) / problem.k(x));
                    values.push(acc);
                }
                LogAlpha::Tabulated {
                    nodes,
                    values,
                    velocity: spec.velocity.clone(),
                    diffusivity: spec.diffusivity.clone(),
                }
            }
        };
        let max_log = match &repr {
            LogAlpha::Linear { v, k, origin } => {
                (-v * (dom.lo - origin) / k).max(-v * (dom.hi - origin) / k)
            }
            LogAlpha::Tabulated { values, .. } => values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        };
        WeightFunction { repr, log_scale: -max_log }
    }

    /// Unnormalized `log_alpha(x)`.
    pub fn log_alpha(&self, x: f64) -> f64 {
        match &self.repr {
            LogAlpha::Linear { v, k, origin } => -v * (x - origin) / k,
            LogAlpha::Tabulated { nodes, values, velocity, diffusivity } => {
                let e = element_containing(nodes, x);
                let x0 = nodes[e];
                if x == x0 {
                    return values[e];
                }
                let rule = gauss_rule(LOG_ALPHA_POINTS).expect("fixed order");
                values[e] - rule.integrate(x0, x, |s| velocity.eval(s) / diffusivity.eval(s))
            }
        }
    }

    /// `ln α(x)`, including the normalization.
    pub fn ln_alpha(&self, x: f64) -> f64 {
        self.log_alpha(x) + self.log_scale
    }

    pub fn alpha_at(&self, x: f64) -> f64 {
        self.ln_alpha(x).exp()
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn normalization(&self) -> f64 {
        self.log_scale.exp()
    }

    /// The same weight multiplied by `factor > 0`.
    pub fn rescaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0, "weight normalization must be positive");
        WeightFunction { repr: self.repr.clone(), log_scale: self.log_scale + factor.ln() }
    }

    /// `ln α` at given node positions. Exact tabulated values are used when the
    /// positions are the tabulation nodes.
    pub fn ln_alpha_nodes(&self, nodes: &[f64]) -> Vec<f64> {
        match &self.repr {
            LogAlpha::Tabulated { nodes: tab, values, .. } if tab.as_slice() == nodes => {
                values.iter().map(|v| v + self.log_scale).collect()
            }
            _ => nodes.iter().map(|&x| self.ln_alpha(x)).collect(),
        }
    }

    /// The exponent rate when `log_alpha` is linear in `x`.
    pub fn linear_rate(&self) -> Option<f64> {
        match self.repr {
            LogAlpha::Linear { v, k, .. } => Some(-v / k),
            LogAlpha::Tabulated { .. } => None,
        }
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            LogAlpha::Linear { v, k, origin } => f
                .debug_struct("WeightFunction")
                .field("rate", &(-v / k))
                .field("origin", origin)
                .field("log_scale", &self.log_scale)
                .finish(),
            LogAlpha::Tabulated { nodes, .. } => f
                .debug_struct("WeightFunction")
                .field("tabulated_nodes", &nodes.len())
                .field("log_scale", &self.log_scale)
                .finish(),
        }
    }
}

/// Index of the element `[nodes[e], nodes[e+1]]` containing `x` (clamped).
fn element_containing(nodes: &[f64], x: f64) -> usize {
    let last = nodes.len() - 2;
    match nodes.partition_point(|&n| n <= x) {
        0 => 0,
        p => (p - 1).min(last),
    }
}
