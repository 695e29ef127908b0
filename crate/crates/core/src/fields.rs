//! Closed-form test functions, antisymmetrization, and the two weighted norms
//! used to classify them.
//!
//! A [`FieldSpec`] is an immutable description of a function on ℝⁿ together
//! with [`FieldMeta`] (antisymmetry, growth, support, smoothness). Metadata is
//! declared per family so that convergence of every integral can be decided
//! before any quadrature runs.
//!
//! Random data use SplitMix64 seeded directly with the user seed. Each draw
//! `z` is mapped to a uniform number in [0, 1) as `(z >> 11) · 2⁻⁵³`.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Feature, Hemisphere, Polar, RayWeight, TailModel};
use crate::{Estimate, Params, Point, QuadSpec};

/// Values below this are treated as zero when declaring effective supports.
pub const NEGLIGIBLE: f64 = 1e-16;

/// Regularity class of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Smoothness {
    Measurable,
    Lipschitz,
    /// At least C² (all built-in continuous families).
    Smooth,
}

/// Declared properties of a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMeta {
    pub antisymmetric: bool,
    /// `p` with `|u(y)| ≤ C (1 + |y|)^p`.
    pub decay_exponent: f64,
    /// `u = 0` (or below [`NEGLIGIBLE`]) outside this ball about the origin.
    pub support_radius: Option<f64>,
    pub smoothness: Smoothness,
}

impl FieldMeta {
    /// Growth exponent seen by tail estimates; compact fields have none.
    pub fn tail(&self, extra_decay: f64) -> TailModel<f64> {
        match self.support_radius {
            Some(r) => TailModel::compact(r),
            None => TailModel::decaying(extra_decay - self.decay_exponent, 1.0),
        }
    }

    pub fn growth(&self) -> quad::Growth<f64> {
        quad::Growth { exponent: self.decay_exponent, support_radius: self.support_radius }
    }
}

/// A function that can be integrated by the quadrature engine.
pub trait ScalarField: Sync {
    /// Value at `x`; the caller guarantees `x` has the field's dimension.
    fn value(&self, x: &Point) -> f64;
    fn meta(&self) -> FieldMeta;
    /// Where the field changes character in ℝⁿ (panel-placement hints).
    fn features(&self, n: usize) -> Vec<Feature<f64>>;
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn value(&self, x: &Point) -> f64 {
        (**self).value(x)
    }
    fn meta(&self) -> FieldMeta {
        (**self).meta()
    }
    fn features(&self, n: usize) -> Vec<Feature<f64>> {
        (**self).features(n)
    }
}

/// Isotropic Gaussian `amplitude · exp(-|x - center|² / width²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: Point,
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    fn eval(&self, x: &Point) -> f64 {
        self.amplitude * (-x.dist_sq(&self.center) / (self.width * self.width)).exp()
    }

    fn eval_mirrored(&self, x: &Point) -> f64 {
        self.eval(x) - self.eval(&x.reflect())
    }

    fn reach(&self) -> f64 {
        let a = self.amplitude.abs();
        let spread = if a > NEGLIGIBLE { self.width * (a / NEGLIGIBLE).ln().sqrt() } else { 0.0 };
        self.center.norm() + spread
    }

    fn feature(&self) -> Feature<f64> {
        let w = self.width;
        Feature::sphere(self.center, vec![0.5 * w, w, 2.0 * w, 4.0 * w])
    }

    fn validate(&self, positive_half: bool) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::Domain(format!("bump width must be positive, got {}", self.width)));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Domain(format!("bump amplitude must be non-negative, got {}", self.amplitude)));
        }
        if !self.center.is_finite() {
            return Err(Error::Domain("bump center must be finite".into()));
        }
        if positive_half && !(self.center.x1() > 0.0) {
            return Err(Error::Domain(format!("antisymmetric bump center needs x₁ > 0, got {}", self.center.x1())));
        }
        Ok(())
    }
}

/// Seeded sum of mirrored Gaussian bumps, non-negative on ℝⁿ₊.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MirrorBumpsParams", into = "MirrorBumpsParams")]
pub struct MirrorBumps {
    params: MirrorBumpsParams,
    bumps: Vec<Bump>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorBumpsParams {
    pub seed: u64,
    pub count: usize,
    pub box_radius: f64,
    pub dim: usize,
}

/// Smallest admissible x₁ of a bump center.
pub const MIN_CENTER_X1: f64 = 0.2;

fn uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl TryFrom<MirrorBumpsParams> for MirrorBumps {
    type Error = Error;
    fn try_from(params: MirrorBumpsParams) -> Result<Self> {
        let MirrorBumpsParams { seed, count, box_radius, dim } = params;
        if count == 0 {
            return Err(Error::Domain("bump count must be at least 1".into()));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::Domain(format!("dimension {dim} must be 1, 2 or 3")));
        }
        if !(box_radius > 2.0 * MIN_CENTER_X1 && box_radius.is_finite()) {
            return Err(Error::Domain(format!("box radius must exceed {}, got {box_radius}", 2.0 * MIN_CENTER_X1)));
        }
        let mut rng = SplitMix64::seed_from_u64(seed);
        let mut bumps = Vec::with_capacity(count);
        for _ in 0..count {
            let center = loop {
                let mut c = [0.0; 3];
                c[0] = MIN_CENTER_X1 + uniform(&mut rng) * (box_radius - MIN_CENTER_X1);
                for ck in c.iter_mut().take(dim).skip(1) {
                    *ck = box_radius * (2.0 * uniform(&mut rng) - 1.0);
                }
                let p = Point::new(&c[..dim]).expect("valid dimension");
                if p.norm() <= box_radius {
                    break p;
                }
            };
            let width = 0.5 * center.x1() * (0.4 + 0.6 * uniform(&mut rng));
            let amplitude = 0.5 + uniform(&mut rng);
            bumps.push(Bump { center, width, amplitude });
        }
        Ok(MirrorBumps { params, bumps })
    }
}

impl From<MirrorBumps> for MirrorBumpsParams {
    fn from(m: MirrorBumps) -> Self {
        m.params
    }
}

impl MirrorBumps {
    pub fn params(&self) -> &MirrorBumpsParams {
        &self.params
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }
}

/// One term of a linear combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coefficient: f64,
    pub field: FieldSpec,
}

/// C² smoothstep: 0 for t ≤ 0, 1 for t ≥ 1, `t³(10 - 15t + 6t²)` between.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Default transition width of [`Family::CutoffZeta1`].
pub const ZETA1_TRANSITION: f64 = 0.05;
/// Default outer radius of [`Family::CutoffZeta2`].
pub const ZETA2_OUTER_RADIUS: f64 = 0.55;
/// Default transition half-width of [`Family::OddCutoff`].
pub const ODD_CUTOFF_TRANSITION: f64 = 2.0;

/// Built-in function families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", deny_unknown_fields)]
pub enum Family {
    /// u(x) = x₁.
    #[serde(rename = "Monomial_x1")]
    MonomialX1,
    Constant {
        value: f64,
    },
    GaussianBump(Bump),
    /// Bump minus its mirror image; center in ℝⁿ₊.
    AntisymGaussianBump(Bump),
    MirrorBumpSum(MirrorBumps),
    /// amplitude · x₁³ · exp(-|x|²/width²): odd, vanishing slope at 0.
    CubicOddBump {
        width: f64,
        amplitude: f64,
    },
    /// 0 on {x₁ ≥ 0}, 1 on {x₁ ≤ -transition}, smoothstep between.
    CutoffZeta1 {
        transition: f64,
    },
    /// 1 on B_{1/2}(-2e₁), 0 outside B_{outer_radius}(-2e₁).
    CutoffZeta2 {
        outer_radius: f64,
        dim: usize,
    },
    /// sign(x₁) · smoothstep(|x₁| / transition).
    OddCutoff {
        transition: f64,
    },
    /// `inner` outside B_radius(center), 0 inside.
    ExteriorRestriction {
        inner: Box<FieldSpec>,
        center: Point,
        radius: f64,
    },
    /// inner(x) - inner(x_*).
    Antisymmetrized {
        inner: Box<FieldSpec>,
    },
    Combination {
        terms: Vec<Term>,
    },
}

/// A closed-form field with its metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFieldSpec", into = "RawFieldSpec")]
pub struct FieldSpec {
    family: Family,
    meta: FieldMeta,
    dim: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawFieldSpec {
    #[serde(flatten)]
    family: Family,
    #[serde(default)]
    meta: Option<FieldMeta>,
}

impl TryFrom<RawFieldSpec> for FieldSpec {
    type Error = Error;
    fn try_from(raw: RawFieldSpec) -> Result<Self> {
        let spec = FieldSpec::new(raw.family)?;
        if let Some(meta) = raw.meta {
            if meta != spec.meta {
                return Err(Error::Usage(format!(
                    "declared metadata {meta:?} disagrees with the family's {:?}",
                    spec.meta
                )));
            }
        }
        Ok(spec)
    }
}

impl From<FieldSpec> for RawFieldSpec {
    fn from(f: FieldSpec) -> Self {
        RawFieldSpec { family: f.family, meta: Some(f.meta) }
    }
}

fn merge_dims(a: Option<usize>, b: Option<usize>) -> Result<Option<usize>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::DimensionMismatch { expected: x, got: y }),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        _ => Ok(None),
    }
}

fn cubic_reach(width: f64, amplitude: f64) -> f64 {
    // |x|³ exp(-|x|²/w²) decreases beyond w√1.5.
    let a = amplitude.abs();
    if a == 0.0 {
        return 0.0;
    }
    let mut r = width * 1.5f64.sqrt();
    while a * r.powi(3) * (-(r * r) / (width * width)).exp() >= NEGLIGIBLE {
        r += 0.05 * width;
    }
    r
}

impl FieldSpec {
    /// Validates the family and derives its metadata.
    pub fn new(family: Family) -> Result<Self> {
        let smooth = Smoothness::Smooth;
        let (meta, dim) = match &family {
            Family::MonomialX1 => {
                (FieldMeta { antisymmetric: true, decay_exponent: 1.0, support_radius: None, smoothness: smooth }, None)
            }
            Family::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::Domain("constant must be finite".into()));
                }
                let support = if *value == 0.0 { Some(0.0) } else { None };
                (
                    FieldMeta {
                        antisymmetric: *value == 0.0,
                        decay_exponent: 0.0,
                        support_radius: support,
                        smoothness: smooth,
                    },
                    None,
                )
            }
            Family::GaussianBump(b) => {
                b.validate(false)?;
                (
                    FieldMeta {
                        antisymmetric: false,
                        decay_exponent: 0.0,
                        support_radius: Some(b.reach()),
                        smoothness: smooth,
                    },
                    Some(b.center.dim()),
                )
            }
            Family::AntisymGaussianBump(b) => {
                b.validate(true)?;
                (
                    FieldMeta {
                        antisymmetric: true,
                        decay_exponent: 0.0,
                        support_radius: Some(b.reach()),
                        smoothness: smooth,
                    },
                    Some(b.center.dim()),
                )
            }
            Family::MirrorBumpSum(m) => {
                let reach = m.bumps.iter().map(Bump::reach).fold(0.0, f64::max);
                (
                    FieldMeta {
                        antisymmetric: true,
                        decay_exponent: 0.0,
                        support_radius: Some(reach),
                        smoothness: smooth,
                    },
                    Some(m.params.dim),
                )
            }
            Family::CubicOddBump { width, amplitude } => {
                if !(*width > 0.0 && width.is_finite() && amplitude.is_finite()) {
                    return Err(Error::Domain("cubic bump needs positive width and finite amplitude".into()));
                }
                (
                    FieldMeta {
                        antisymmetric: true,
                        decay_exponent: 0.0,
                        support_radius: Some(cubic_reach(*width, *amplitude)),
                        smoothness: smooth,
                    },
                    None,
                )
            }
            Family::CutoffZeta1 { transition } => {
                if !(*transition > 0.0 && *transition <= 1.0) {
                    return Err(Error::Domain(format!("ζ₁ transition must lie in (0, 1], got {transition}")));
                }
                (
                    FieldMeta { antisymmetric: false, decay_exponent: 0.0, support_radius: None, smoothness: smooth },
                    None,
                )
            }
            Family::CutoffZeta2 { outer_radius, dim } => {
                if !(*outer_radius > 0.5 && *outer_radius <= 2.0) {
                    return Err(Error::Domain(format!("ζ₂ outer radius must lie in (0.5, 2], got {outer_radius}")));
                }
                if !(1..=3).contains(dim) {
                    return Err(Error::Domain(format!("dimension {dim} must be 1, 2 or 3")));
                }
                (
                    FieldMeta {
                        antisymmetric: false,
                        decay_exponent: 0.0,
                        support_radius: Some(2.0 + outer_radius),
                        smoothness: smooth,
                    },
                    Some(*dim),
                )
            }
            Family::OddCutoff { transition } => {
                if !(*transition > 0.0 && transition.is_finite()) {
                    return Err(Error::Domain("odd cutoff transition must be positive".into()));
                }
                (FieldMeta { antisymmetric: true, decay_exponent: 0.0, support_radius: None, smoothness: smooth }, None)
            }
            Family::ExteriorRestriction { inner, center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Domain(format!("restriction radius must be positive, got {radius}")));
                }
                let m = inner.meta;
                let meta = FieldMeta {
                    antisymmetric: m.antisymmetric && center.x1() == 0.0,
                    decay_exponent: m.decay_exponent,
                    support_radius: m.support_radius,
                    smoothness: Smoothness::Measurable,
                };
                (meta, merge_dims(inner.dim, Some(center.dim()))?)
            }
            Family::Antisymmetrized { inner } => {
                let m = inner.meta;
                (FieldMeta { antisymmetric: true, ..m }, inner.dim)
            }
            Family::Combination { terms } => {
                let mut meta = FieldMeta {
                    antisymmetric: true,
                    decay_exponent: f64::NEG_INFINITY,
                    support_radius: Some(0.0),
                    smoothness: smooth,
                };
                let mut dim = None;
                for t in terms {
                    if !t.coefficient.is_finite() {
                        return Err(Error::Domain("combination coefficients must be finite".into()));
                    }
                    let m = t.field.meta;
                    meta.antisymmetric &= m.antisymmetric;
                    meta.decay_exponent = meta.decay_exponent.max(m.decay_exponent);
                    meta.support_radius = match (meta.support_radius, m.support_radius) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        _ => None,
                    };
                    meta.smoothness = meta.smoothness.min(m.smoothness);
                    dim = merge_dims(dim, t.field.dim)?;
                }
                if terms.is_empty() {
                    meta.decay_exponent = 0.0;
                }
                (meta, dim)
            }
        };
        Ok(FieldSpec { family, meta, dim })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Dimension fixed by the family's geometry, if any.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn monomial_x1() -> Self {
        FieldSpec::new(Family::MonomialX1).expect("valid family")
    }

    pub fn constant(value: f64) -> Result<Self> {
        FieldSpec::new(Family::Constant { value })
    }

    pub fn zero() -> Self {
        FieldSpec::new(Family::Constant { value: 0.0 }).expect("valid family")
    }

    pub fn gaussian_bump(center: Point, width: f64, amplitude: f64) -> Result<Self> {
        FieldSpec::new(Family::GaussianBump(Bump { center, width, amplitude }))
    }

    pub fn antisym_gaussian_bump(center: Point, width: f64, amplitude: f64) -> Result<Self> {
        FieldSpec::new(Family::AntisymGaussianBump(Bump { center, width, amplitude }))
    }

    pub fn cubic_odd_bump(width: f64, amplitude: f64) -> Result<Self> {
        FieldSpec::new(Family::CubicOddBump { width, amplitude })
    }

    pub fn zeta1(transition: f64) -> Result<Self> {
        FieldSpec::new(Family::CutoffZeta1 { transition })
    }

    pub fn zeta2(outer_radius: f64, dim: usize) -> Result<Self> {
        FieldSpec::new(Family::CutoffZeta2 { outer_radius, dim })
    }

    pub fn odd_cutoff(transition: f64) -> Result<Self> {
        FieldSpec::new(Family::OddCutoff { transition })
    }

    pub fn exterior_restriction(inner: FieldSpec, center: Point, radius: f64) -> Result<Self> {
        FieldSpec::new(Family::ExteriorRestriction { inner: Box::new(inner), center, radius })
    }

    pub fn combination(terms: Vec<(f64, FieldSpec)>) -> Result<Self> {
        FieldSpec::new(Family::Combination {
            terms: terms.into_iter().map(|(coefficient, field)| Term { coefficient, field }).collect(),
        })
    }

    /// `λ·self`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        FieldSpec::combination(vec![(lambda, self.clone())])
    }

    /// Checks that `x` has a dimension this field accepts.
    pub fn check_point(&self, x: &Point) -> Result<()> {
        match self.dim {
            Some(d) => x.check_dim(d),
            None => Ok(()),
        }
    }

    /// Value at `x`, with a dimension check.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.value(x))
    }

    fn eval(&self, x: &Point) -> f64 {
        match &self.family {
            Family::MonomialX1 => x.x1(),
            Family::Constant { value } => *value,
            Family::GaussianBump(b) => b.eval(x),
            Family::AntisymGaussianBump(b) => b.eval_mirrored(x),
            Family::MirrorBumpSum(m) => m.bumps.iter().map(|b| b.eval_mirrored(x)).sum(),
            Family::CubicOddBump { width, amplitude } => {
                let t = x.x1();
                amplitude * t * t * t * (-x.norm_sq() / (width * width)).exp()
            }
            Family::CutoffZeta1 { transition } => smoothstep(-x.x1() / transition),
            Family::CutoffZeta2 { outer_radius, dim } => {
                let d = x.dist(&Point::on_axis(*dim, -2.0));
                1.0 - smoothstep((d - 0.5) / (outer_radius - 0.5))
            }
            Family::OddCutoff { transition } => {
                let t = x.x1();
                let v = smoothstep(t.abs() / transition);
                if t < 0.0 {
                    -v
                } else {
                    v
                }
            }
            Family::ExteriorRestriction { inner, center, radius } => {
                if x.dist(center) >= *radius {
                    inner.eval(x)
                } else {
                    0.0
                }
            }
            Family::Antisymmetrized { inner } => inner.eval(x) - inner.eval(&x.reflect()),
            Family::Combination { terms } => terms.iter().map(|t| t.coefficient * t.field.eval(x)).sum(),
        }
    }

    fn feature_list(&self, n: usize, out: &mut Vec<Feature<f64>>) {
        match &self.family {
            Family::MonomialX1 | Family::Constant { .. } => {}
            Family::GaussianBump(b) => out.push(b.feature()),
            Family::AntisymGaussianBump(b) => {
                out.push(b.feature());
                out.push(b.feature().reflected());
            }
            Family::MirrorBumpSum(m) => {
                for b in &m.bumps {
                    out.push(b.feature());
                    out.push(b.feature().reflected());
                }
            }
            Family::CubicOddBump { width, .. } => {
                let w = *width;
                out.push(Feature::sphere(Point::origin(n), vec![0.5 * w, w, 2.0 * w, 4.0 * w]));
            }
            Family::CutoffZeta1 { transition } => {
                out.push(Feature::Plane { x1: 0.0 });
                out.push(Feature::Plane { x1: -transition });
            }
            Family::CutoffZeta2 { outer_radius, dim } => {
                out.push(Feature::sphere(Point::on_axis(*dim, -2.0), vec![0.5, *outer_radius]));
            }
            Family::OddCutoff { transition } => {
                for x1 in [-transition, 0.0, *transition] {
                    out.push(Feature::Plane { x1 });
                }
            }
            Family::ExteriorRestriction { inner, center, radius } => {
                inner.feature_list(n, out);
                out.push(Feature::sphere(*center, vec![*radius]));
            }
            Family::Antisymmetrized { inner } => {
                let start = out.len();
                inner.feature_list(n, out);
                let mirrored: Vec<_> = out[start..].iter().map(Feature::reflected).collect();
                out.extend(mirrored);
            }
            Family::Combination { terms } => {
                for t in terms {
                    t.field.feature_list(n, out);
                }
            }
        }
    }
}

impl ScalarField for FieldSpec {
    fn value(&self, x: &Point) -> f64 {
        self.eval(x)
    }

    fn meta(&self) -> FieldMeta {
        self.meta
    }

    fn features(&self, n: usize) -> Vec<Feature<f64>> {
        let mut out = Vec::new();
        self.feature_list(n, &mut out);
        out
    }
}

/// `f(x) - f(x_*)`.
pub fn antisymmetrize(f: &FieldSpec) -> FieldSpec {
    FieldSpec::new(Family::Antisymmetrized { inner: Box::new(f.clone()) }).expect("antisymmetrization is always valid")
}

/// Seeded non-negative antisymmetric data: `count` mirrored bumps with
/// centers in {x₁ ≥ 0.2} ∩ B₅ and widths at most x₁/2 of their center.
pub fn random_nonneg_antisym(seed: u64, count: usize, p: &Params) -> Result<FieldSpec> {
    random_nonneg_antisym_in(seed, count, 5.0, p)
}

/// [`random_nonneg_antisym`] with a custom center box radius.
pub fn random_nonneg_antisym_in(seed: u64, count: usize, box_radius: f64, p: &Params) -> Result<FieldSpec> {
    let m = MirrorBumps::try_from(MirrorBumpsParams { seed, count, box_radius, dim: p.n() })?;
    FieldSpec::new(Family::MirrorBumpSum(m))
}

fn divergent(what: &str, exponent: f64, limit: f64) -> Error {
    Error::Divergent { what: what.into(), exponent, limit }
}

/// ‖u‖_𝒜ₛ = ∫_{ℝⁿ₊} x₁|u(x)| / (1 + |x|^{n+2s+2}) dx.
///
/// Converges when `u` grows slower than |x|^{1+2s}.
pub fn anorm(u: &impl ScalarField, p: &Params, q: &QuadSpec) -> Result<Estimate> {
    q.validate()?;
    let meta = u.meta();
    let n = p.n();
    let limit = 1.0 + 2.0 * p.s();
    if meta.support_radius.is_none() && !(meta.decay_exponent < limit) {
        return Err(divergent("𝒜ₛ-norm", meta.decay_exponent, limit));
    }
    let k = p.kernel_exponent() + 2.0;
    let tail = meta.tail(k - 1.0);
    let features = u.features(n);
    quad::integrate_halfspace_weighted(
        |x| x.x1() * u.value(x).abs() / (1.0 + x.norm().powf(k)),
        p,
        q,
        &tail,
        &features,
        None,
    )
}

/// ‖u‖_ℒₛ = ∫_{ℝⁿ} |u(x)| / (1 + |x|^{n+2s}) dx.
///
/// Converges when `u` grows slower than |x|^{2s}.
pub fn lsnorm(u: &impl ScalarField, p: &Params, q: &QuadSpec) -> Result<Estimate> {
    q.validate()?;
    let meta = u.meta();
    let n = p.n();
    let limit = 2.0 * p.s();
    if meta.support_radius.is_none() && !(meta.decay_exponent < limit) {
        return Err(divergent("ℒₛ-norm", meta.decay_exponent, limit));
    }
    let k = p.kernel_exponent();
    let job = Polar {
        origin: Point::origin(n),
        region: Hemisphere::Full,
        inner_radius: 0.0,
        weight: RayWeight::None,
        tail: meta.tail(k),
        features: &u.features(n),
        near_power: None,
    };
    quad::integrate_polar(&job, p, q, |x| u.value(x).abs() / (1.0 + x.norm().powf(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn family_examples() {
        assert_eq!(FieldSpec::monomial_x1().evaluate(&pt(&[0.3, 0.7])).unwrap(), 0.3);
        let b = FieldSpec::antisym_gaussian_bump(pt(&[2.0, 0.0]), 1.0, 1.0).unwrap();
        assert_eq!(b.evaluate(&pt(&[0.0, 0.0])).unwrap(), 0.0);
        let z2 = FieldSpec::zeta2(ZETA2_OUTER_RADIUS, 2).unwrap();
        assert_eq!(z2.evaluate(&pt(&[-2.0, 0.0])).unwrap(), 1.0);
        let z1 = FieldSpec::zeta1(ZETA1_TRANSITION).unwrap();
        assert_eq!(z1.value(&pt(&[0.5])), 0.0);
        assert_eq!(z1.value(&pt(&[-1.0])), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_a_usage_error() {
        let b = FieldSpec::gaussian_bump(pt(&[1.0, 0.0]), 1.0, 1.0).unwrap();
        let e = b.evaluate(&pt(&[1.0])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn splitmix_reference_stream() {
        // Published first outputs of SplitMix64 from state 0.
        let mut rng = SplitMix64::seed_from_u64(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn random_data_is_reproducible_and_constrained() {
        let p = Params::new(2, 0.5).unwrap();
        let a = random_nonneg_antisym(7, 5, &p).unwrap();
        let b = random_nonneg_antisym(7, 5, &p).unwrap();
        assert_eq!(a, b);
        let Family::MirrorBumpSum(m) = a.family() else { unreachable!() };
        for bump in m.bumps() {
            assert!(bump.center.x1() >= MIN_CENTER_X1 && bump.center.norm() <= 5.0);
            assert!(bump.width <= bump.center.x1() / 2.0);
            assert!(bump.amplitude > 0.0);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = Params::new(2, 0.5).unwrap();
        let fields = vec![
            FieldSpec::monomial_x1(),
            random_nonneg_antisym(3, 4, &p).unwrap(),
            FieldSpec::exterior_restriction(FieldSpec::zeta1(0.2).unwrap(), pt(&[2.0, 0.0]), 1.0).unwrap(),
            antisymmetrize(&FieldSpec::gaussian_bump(pt(&[1.0, 1.0]), 0.5, 2.0).unwrap()),
        ];
        for f in fields {
            let json = serde_json::to_string(&f).unwrap();
            let back: FieldSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, f, "{json}");
        }
        let bare: FieldSpec = serde_json::from_str(r#"{"family":"Monomial_x1"}"#).unwrap();
        assert_eq!(bare, FieldSpec::monomial_x1());
        let lying = r#"{"family":"Monomial_x1","meta":{"antisymmetric":false,"decay_exponent":1.0,"support_radius":null,"smoothness":"Smooth"}}"#;
        assert!(serde_json::from_str::<FieldSpec>(lying).is_err());
    }

    #[test]
    fn antisymmetrizing_an_even_function_gives_zero() {
        let even = FieldSpec::gaussian_bump(pt(&[0.0, 1.0]), 0.7, 1.0).unwrap();
        let z = antisymmetrize(&even);
        for x in [pt(&[0.3, 0.2]), pt(&[-1.0, 2.0])] {
            assert_eq!(z.value(&x), 0.0);
        }
    }

    #[test]
    fn norm_examples() {
        let q = QuadSpec::default();
        let p = Params::new(1, 0.5).unwrap();
        let a = anorm(&FieldSpec::monomial_x1(), &p, &q).unwrap();
        assert_relative_eq!(a.value, std::f64::consts::PI / (2.0 * 2f64.sqrt()), max_relative = 1e-8);
        let l = lsnorm(&FieldSpec::constant(1.0).unwrap(), &p, &q).unwrap();
        assert_relative_eq!(l.value, std::f64::consts::PI, max_relative = 1e-8);
        assert_eq!(anorm(&FieldSpec::zero(), &p, &q).unwrap().value, 0.0);
        assert_eq!(lsnorm(&FieldSpec::zero(), &p, &q).unwrap().value, 0.0);
        assert!(matches!(lsnorm(&FieldSpec::monomial_x1(), &p, &q), Err(Error::Divergent { .. })));
    }
}
