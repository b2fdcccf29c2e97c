//! Decay-exponent bookkeeping for the linear and semilinear problems.
//!
//! Every Lebesgue exponent is carried through its reciprocal, so that `q = ∞`
//! enters all formulas as `1/q = 0` without special cases.

use core::fmt;

use crate::error::{CoreError, Result};

/// Absolute tolerance used to decide whether a condition holds with equality.
pub const EQ_TOL: f64 = 1e-12;

/// Fractional orders of the elastic and damping terms and the space dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ModelParams {
    pub sigma: f64,
    pub theta: f64,
    pub n: u32,
}

impl ModelParams {
    pub fn new(sigma: f64, theta: f64, n: u32) -> Result<Self> {
        let p = ModelParams { sigma, theta, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(CoreError::Domain("sigma must be positive and finite"));
        }
        if !(self.theta >= 0.0 && self.theta <= self.sigma) {
            return Err(CoreError::Domain("theta must lie in [0, sigma]"));
        }
        if self.n == 0 {
            return Err(CoreError::Domain("space dimension must be at least 1"));
        }
        Ok(())
    }

    /// `sigma < 2 theta <= 2 sigma`.
    pub fn is_noneffective(&self) -> bool {
        2.0 * self.theta > self.sigma && self.theta <= self.sigma
    }

    pub fn require_noneffective(&self) -> Result<()> {
        self.validate()?;
        if self.is_noneffective() {
            Ok(())
        } else {
            Err(CoreError::EffectiveDamping { sigma: self.sigma, theta: self.theta })
        }
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }
}

/// A Lebesgue exponent in `[1, ∞]`, stored as its reciprocal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lebesgue {
    inv: f64,
}

impl Lebesgue {
    pub const ONE: Lebesgue = Lebesgue { inv: 1.0 };
    pub const TWO: Lebesgue = Lebesgue { inv: 0.5 };
    pub const INFINITY: Lebesgue = Lebesgue { inv: 0.0 };

    pub fn finite(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(Self::INFINITY);
        }
        if !(p >= 1.0) {
            return Err(CoreError::Domain("Lebesgue exponent must be at least 1"));
        }
        Ok(Lebesgue { inv: 1.0 / p })
    }

    pub fn from_reciprocal(inv: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&inv) {
            return Err(CoreError::Domain("reciprocal exponent must lie in [0, 1]"));
        }
        Ok(Lebesgue { inv })
    }

    pub fn recip(self) -> f64 {
        self.inv
    }

    pub fn is_infinite(self) -> bool {
        self.inv == 0.0
    }

    pub fn value(self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            1.0 / self.inv
        }
    }

    pub fn conjugate(self) -> Self {
        Lebesgue { inv: 1.0 - self.inv }
    }
}

impl fmt::Display for Lebesgue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.value())
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Lebesgue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.value())
        }
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Lebesgue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Lebesgue;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> core::result::Result<Lebesgue, E> {
                Lebesgue::finite(v).map_err(E::custom)
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> core::result::Result<Lebesgue, E> {
                self.visit_f64(v as f64)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> core::result::Result<Lebesgue, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> core::result::Result<Lebesgue, E> {
                match v {
                    "inf" | "infinity" | "Infinity" | "∞" => Ok(Lebesgue::INFINITY),
                    other => other
                        .parse::<f64>()
                        .map_err(E::custom)
                        .and_then(|p| Lebesgue::finite(p).map_err(E::custom)),
                }
            }
        }
        d.deserialize_any(Visitor)
    }
}

/// Exponents `(p, q)` together with the derivative orders of a linear estimate:
/// `beta` is the length of the spatial multi-index, `b` the fractional Laplacian
/// order and `ell` the number of time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct EstimateSpec {
    pub p: Lebesgue,
    pub q: Lebesgue,
    #[cfg_attr(feature = "serde", serde(default))]
    pub beta: u32,
    #[cfg_attr(feature = "serde", serde(default))]
    pub b: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub ell: u32,
}

impl EstimateSpec {
    pub fn new(p: Lebesgue, q: Lebesgue, beta: u32, b: f64, ell: u32) -> Result<Self> {
        let s = EstimateSpec { p, q, beta, b, ell };
        s.validate()?;
        Ok(s)
    }

    pub fn plain(p: Lebesgue, q: Lebesgue) -> Self {
        EstimateSpec { p, q, beta: 0, b: 0.0, ell: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.recip() < self.q.recip() {
            return Err(CoreError::Domain("need p <= q"));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(CoreError::Domain("fractional derivative order must be nonnegative"));
        }
        Ok(())
    }

    /// `1/p - 1/q`.
    pub fn gap(&self) -> f64 {
        self.p.recip() - self.q.recip()
    }

    /// `max{1/2 - 1/p, 1/q - 1/2}`, never below `-1/2`.
    pub fn lattice_excess(&self) -> f64 {
        (0.5 - self.p.recip()).max(self.q.recip() - 0.5)
    }

    /// `|beta| + b`.
    pub fn derivative_order(&self) -> f64 {
        self.beta as f64 + self.b
    }

    /// `1 < p <= 2 <= q < ∞`, the range in which Hausdorff-Young removes the log.
    pub fn in_hausdorff_young_range(&self) -> bool {
        let ip = self.p.recip();
        let iq = self.q.recip();
        ip < 1.0 && ip >= 0.5 && iq <= 0.5 && iq > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ConditionTag {
    Strict,
    Equality,
    Violated,
}

/// A scalar condition `value < threshold` evaluated with [`EQ_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Condition {
    pub value: f64,
    pub threshold: f64,
    pub tag: ConditionTag,
}

impl Condition {
    fn compare(value: f64, threshold: f64) -> Self {
        let tag = if (value - threshold).abs() <= EQ_TOL {
            ConditionTag::Equality
        } else if value < threshold {
            ConditionTag::Strict
        } else {
            ConditionTag::Violated
        };
        Condition { value, threshold, tag }
    }
}

/// Which estimate produced a decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Branch {
    /// Dyadic splitting of the low-frequency kernel, strict inequality.
    Split,
    /// Dyadic splitting on the boundary of its range.
    SplitEquality,
    /// Diffusive tail estimate beyond the splitting range.
    Diffusive,
    /// Diffusive tail estimate in the endpoint cases without log loss.
    DiffusiveNoLog,
    /// Crude summation of the dyadic pieces; valid but far from optimal.
    CoarseFallback,
    NotCovered,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Split => "split",
            Branch::SplitEquality => "split-equality",
            Branch::Diffusive => "diffusive",
            Branch::DiffusiveNoLog => "diffusive-no-log",
            Branch::CoarseFallback => "coarse-fallback",
            Branch::NotCovered => "not-covered",
        }
    }
}

/// Predicted power `(1+t)^exponent`, possibly times `log(e+t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatePrediction {
    pub exponent: f64,
    pub log_loss: bool,
    pub theorem: Branch,
    pub covered: bool,
    pub non_optimal: bool,
}

/// `2 sigma / (n - sigma)`, infinite when `n <= sigma`.
pub fn alpha0(sigma: f64, n: u32) -> f64 {
    let nf = n as f64;
    if nf <= sigma {
        f64::INFINITY
    } else {
        2.0 * sigma / (nf - sigma)
    }
}

/// `sigma / n`.
pub fn alpha1(sigma: f64, n: u32) -> f64 {
    sigma / n as f64
}

/// Positive root of `m^2 - (3 sigma - 2) m - 2 sigma = 0`.
pub fn nbar(sigma: f64) -> f64 {
    let lin = 3.0 * sigma - 2.0;
    let disc = libm::sqrt(lin * lin + 8.0 * sigma);
    if lin >= 0.0 {
        0.5 * (lin + disc)
    } else {
        4.0 * sigma / (disc - lin)
    }
}

/// Closed form of [`nbar`] in factored shape; valid for `sigma > 2/3`.
pub fn nbar_closed_form(sigma: f64) -> f64 {
    let lin = 3.0 * sigma - 2.0;
    lin * (1.0 + 0.5 * (libm::sqrt(1.0 + 8.0 * sigma / (lin * lin)) - 1.0))
}

/// Value `(n/sigma)(1/p-1/q) + n max{1/2-1/p, 1/q-1/2}` compared against 1.
pub fn pair_condition(spec: &EstimateSpec, params: &ModelParams) -> Result<Condition> {
    spec.validate()?;
    params.validate()?;
    let n = params.dim();
    let value = n / params.sigma * spec.gap() + n * spec.lattice_excess();
    Ok(Condition::compare(value, 1.0))
}

/// The same condition written separately above and below the conjugate line.
pub fn pair_condition_by_region(spec: &EstimateSpec, params: &ModelParams) -> Result<ConditionTag> {
    spec.validate()?;
    params.validate()?;
    let n = params.dim();
    let ip = spec.p.recip();
    let iq = spec.q.recip();
    let head = n / params.sigma * (ip - iq);
    // q >= 2 and p in [q', q] versus p <= 2 and q in [p, p'].
    let upper = iq <= 0.5 && ip <= 1.0 - iq;
    let value = if upper { head + n * (0.5 - ip) } else { head + n * (iq - 0.5) };
    Ok(Condition::compare(value, 1.0).tag)
}

/// Condition with derivatives: `pair_condition value + (|beta|+b)/sigma` against `1 - ell`.
pub fn derivative_condition(spec: &EstimateSpec, params: &ModelParams) -> Result<Condition> {
    let base = pair_condition(spec, params)?;
    let value = base.value + spec.derivative_order() / params.sigma;
    Ok(Condition::compare(value, 1.0 - spec.ell as f64))
}

/// `n(1/p-1/q) + |beta| + b + sigma (n max{..} + ell - 1)`.
pub fn diffusive_order(spec: &EstimateSpec, params: &ModelParams) -> f64 {
    let n = params.dim();
    n * spec.gap()
        + spec.derivative_order()
        + params.sigma * (n * spec.lattice_excess() + spec.ell as f64 - 1.0)
}

/// `n max{1/2-1/p, 1/q-1/2} < 1`.
pub fn small_lattice_excess(spec: &EstimateSpec, params: &ModelParams) -> bool {
    params.dim() * spec.lattice_excess() < 1.0 - EQ_TOL
}

/// Low-frequency decay rate of `∂_x^beta (-Δ)^{b/2} ∂_t^ell K_0 * g` from `L^p` to `L^q`.
pub fn predict_low_rate(spec: &EstimateSpec, params: &ModelParams) -> Result<RatePrediction> {
    params.require_noneffective()?;
    let with_derivatives = derivative_condition(spec, params)?;
    let n = params.dim();
    let sigma = params.sigma;
    let split = 1.0 - n / sigma * spec.gap() - spec.derivative_order() / sigma - spec.ell as f64;
    match with_derivatives.tag {
        ConditionTag::Strict => Ok(RatePrediction {
            exponent: split,
            log_loss: false,
            theorem: Branch::Split,
            covered: true,
            non_optimal: false,
        }),
        ConditionTag::Equality => Ok(RatePrediction {
            exponent: split,
            log_loss: !spec.in_hausdorff_young_range(),
            theorem: Branch::SplitEquality,
            covered: true,
            non_optimal: false,
        }),
        ConditionTag::Violated => {
            let a = diffusive_order(spec, params);
            let two_theta = 2.0 * params.theta;
            if small_lattice_excess(spec, params) {
                let endpoint = endpoint_pair(spec) && a > 0.0;
                let log_loss = !(spec.in_hausdorff_young_range() || endpoint);
                Ok(RatePrediction {
                    exponent: n * spec.lattice_excess() - a / two_theta,
                    log_loss,
                    theorem: if log_loss { Branch::Diffusive } else { Branch::DiffusiveNoLog },
                    covered: true,
                    non_optimal: false,
                })
            } else {
                let order = n * spec.gap() + spec.derivative_order() + sigma * spec.ell as f64;
                let exponent = n * spec.lattice_excess() - order / two_theta;
                if !exponent.is_finite() {
                    return Ok(RatePrediction {
                        exponent: f64::NAN,
                        log_loss: false,
                        theorem: Branch::NotCovered,
                        covered: false,
                        non_optimal: false,
                    });
                }
                Ok(RatePrediction {
                    exponent,
                    log_loss: (n * spec.lattice_excess() - 1.0).abs() <= EQ_TOL,
                    theorem: Branch::CoarseFallback,
                    covered: false,
                    non_optimal: true,
                })
            }
        }
    }
}

/// `(p, q)` is `(1, 2)` or `(2, ∞)`.
fn endpoint_pair(spec: &EstimateSpec) -> bool {
    let ip = spec.p.recip();
    let iq = spec.q.recip();
    (ip == 1.0 && iq == 0.5) || (ip == 0.5 && iq == 0.0)
}

/// Smallest admissible number of extra derivatives `delta` on the data for the
/// high-frequency estimate from `H^{delta, r}` to `L^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HighDelta {
    pub delta: f64,
    /// The admissible set is open, so `delta` is its infimum plus a margin.
    pub open_bound: bool,
}

/// Margin added to the infimum when the admissible set of `delta` is open.
pub const DELTA_MARGIN: f64 = 1e-3;

pub fn predict_high_delta(
    r: Lebesgue,
    q: Lebesgue,
    beta: u32,
    b: f64,
    ell: u32,
    params: &ModelParams,
) -> Result<HighDelta> {
    params.require_noneffective()?;
    if r.recip() < q.recip() {
        return Err(CoreError::Domain("need r <= q"));
    }
    let n = params.dim();
    let a = n * (r.recip() - q.recip()) + beta as f64 + b;
    let two_theta = 2.0 * params.theta;
    let endpoint = r.recip() == 1.0 || q.is_infinite();
    let ell = ell as f64;
    let bound = if a <= two_theta {
        ell - 1.0 + a / two_theta
    } else if params.theta < params.sigma {
        ell + (a - two_theta) / (2.0 * (params.sigma - params.theta))
    } else {
        return Err(CoreError::NotCovered(
            "derivative order above 2 theta needs theta < sigma",
        ));
    };
    if bound < 0.0 || (bound == 0.0 && !endpoint) {
        return Ok(HighDelta { delta: 0.0, open_bound: false });
    }
    if endpoint {
        Ok(HighDelta { delta: bound + DELTA_MARGIN, open_bound: true })
    } else {
        Ok(HighDelta { delta: bound, open_bound: false })
    }
}

/// `L^1 -> L^q` decay exponent of `∂_t^j` of the solution under effective damping.
pub fn predict_effective_rate(j: u32, q: Lebesgue, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if 2.0 * params.theta >= params.sigma {
        return Err(CoreError::Domain("effective rate needs 2 theta < sigma"));
    }
    let n = params.dim();
    let spread = 1.0 - q.recip();
    let (sigma, theta) = (params.sigma, params.theta);
    let j = j as f64;
    if n * spread >= 2.0 * theta {
        Ok(-j - n / (2.0 * (sigma - theta)) * spread + theta / (sigma - theta))
    } else {
        Ok(-j - n / (2.0 * theta) * spread + 1.0)
    }
}

/// Which unknown carries the power nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Problem {
    /// Source term `|u|^{1+alpha}`.
    UPower,
    /// Source term `|u_t|^{1+alpha}`.
    UtPower,
}

/// Range `(0, upper)` of powers for which small-data global solutions cannot exist.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NonexistenceRange {
    /// `f64::INFINITY` when every positive power is included.
    pub upper: f64,
    /// The endpoint itself is included (integer orders only).
    pub critical_included: bool,
}

pub fn nonexistence_range(params: &ModelParams, problem: Problem) -> Result<NonexistenceRange> {
    params.validate()?;
    let n = params.dim();
    let m = (2.0 * params.theta).min(params.sigma);
    let upper = match problem {
        Problem::UPower if n <= m => f64::INFINITY,
        Problem::UPower => 2.0 * params.sigma / (n - m),
        Problem::UtPower => m / n,
    };
    let integral = libm::trunc(params.sigma) == params.sigma && libm::trunc(params.theta) == params.theta;
    Ok(NonexistenceRange { upper, critical_included: integral && upper.is_finite() })
}

/// Data space `L^{lower} ∩ L^{upper}` used for global existence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DataSpace {
    pub lower: f64,
    pub upper: f64,
}

pub fn required_data_space(problem: Problem, alpha: f64, params: &ModelParams) -> Result<DataSpace> {
    params.validate()?;
    if !(alpha > 0.0) {
        return Err(CoreError::Domain("power must be positive"));
    }
    let upper = match problem {
        Problem::UPower => (params.dim() / (2.0 * params.theta)).max(2.0),
        Problem::UtPower => 1.0 + alpha,
    };
    Ok(DataSpace { lower: 1.0, upper })
}

/// Decay exponents of the linear solution with `L^1 ∩ L^2` data.
pub mod linear_rates {
    use super::ModelParams;

    /// `‖(-Δ)^{sigma/2} u‖_2` and `‖u_t‖_2` decay like `(1+t)^{-n/(4 theta)}`.
    pub fn energy(params: &ModelParams) -> f64 {
        -params.dim() / (4.0 * params.theta)
    }

    /// `‖u‖_2`; the second value is true at `n = 2 sigma`, where the rate is a pure log.
    pub fn l2(params: &ModelParams) -> (f64, bool) {
        let n = params.dim();
        let two_sigma = 2.0 * params.sigma;
        if (n - two_sigma).abs() <= super::EQ_TOL {
            (0.0, true)
        } else if n < two_sigma {
            (1.0 - n / two_sigma, false)
        } else {
            (-(n - two_sigma) / (4.0 * params.theta), false)
        }
    }

    /// `‖u‖_q` for `q` in `[2, ∞]` given through `1/q`.
    pub fn u_lq(inv_q: f64, params: &ModelParams) -> f64 {
        1.0 - params.dim() / params.sigma * (1.0 - inv_q)
    }

    /// `‖u_t‖_q` for `q` in `(1, ∞]` given through `1/q`.
    pub fn ut_lq(inv_q: f64, params: &ModelParams) -> f64 {
        -params.dim() / params.sigma * (1.0 - inv_q)
    }
}

/// One row of a condition table over the `(1/p, 1/q)` lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeRow {
    pub inv_p: f64,
    pub inv_q: f64,
    pub condition: Condition,
    pub prediction: RatePrediction,
}

/// Evaluates [`derivative_condition`] and [`predict_low_rate`] on `steps + 1` points per axis with `p <= q`.
pub fn lattice_table(
    params: &ModelParams,
    steps: u32,
    beta: u32,
    b: f64,
    ell: u32,
) -> Result<alloc::vec::Vec<LatticeRow>> {
    params.require_noneffective()?;
    if steps == 0 {
        return Err(CoreError::Domain("lattice needs at least one step"));
    }
    let mut rows = alloc::vec::Vec::new();
    for i in 0..=steps {
        let inv_p = i as f64 / steps as f64;
        for j in 0..=i {
            let inv_q = j as f64 / steps as f64;
            let spec = EstimateSpec {
                p: Lebesgue::from_reciprocal(inv_p)?,
                q: Lebesgue::from_reciprocal(inv_q)?,
                beta,
                b,
                ell,
            };
            rows.push(LatticeRow {
                inv_p,
                inv_q,
                condition: derivative_condition(&spec, params)?,
                prediction: predict_low_rate(&spec, params)?,
            });
        }
    }
    Ok(rows)
}
