//! The group 𝒢 = 𝕋^d × C⁰(𝕋^d, SL_m(ℝ)) of quasiperiodic cocycles.
//!
//! Maps come in three tiers: constant matrices, real trigonometric
//! polynomials (exact evaluation and exact derivatives), and callables.
//! Group operations close over their operands instead of expanding
//! products symbolically, so composites and inverses are callable-tier.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, det, inverse, op_norm, Matrix};
use crate::measure::{Magnitude, Metric};
use crate::record::{Sig17, sig17_vec};
use crate::rng::RngStream;
use crate::torus::{check_dim, Frequency, TorusPoint};

/// Allowed |det − 1| for a map to count as SL_m-valued.
pub const DET_TOLERANCE: f64 = 1e-6;
/// Grid used when cocycles serve as atoms of a metric space.
pub const METRIC_GRID: usize = 64;

const VALIDATION_GRID: usize = 32;
const VALIDATION_RANDOM: usize = 100;
const VALIDATION_SEED: u64 = 0x5eed_c0c0;

/// One Fourier mode: cos(2π⟨k,θ⟩)·C + sin(2π⟨k,θ⟩)·S.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigMode {
    pub k: Vec<i64>,
    pub cos: Matrix,
    pub sin: Matrix,
}

/// Matrix-valued real trigonometric polynomial on 𝕋^d.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    d: usize,
    constant: Matrix,
    modes: Vec<TrigMode>,
}

impl TrigPolynomial {
    pub fn new(d: usize, constant: Matrix, modes: Vec<TrigMode>) -> Result<Self> {
        if d == 0 {
            return Err(invalid("torus dimension must be at least 1"));
        }
        if !constant.is_square() {
            return Err(invalid("coefficients must be square"));
        }
        let shape = constant.shape();
        for mode in &modes {
            check_dim(d, mode.k.len())?;
            if mode.cos.shape() != shape || mode.sin.shape() != shape {
                return Err(invalid("coefficient shapes differ"));
            }
        }
        if !all_finite(&constant) || modes.iter().any(|m| !all_finite(&m.cos) || !all_finite(&m.sin)) {
            return Err(Error::NonFinite("trig coefficient".into()));
        }
        Ok(Self { d, constant, modes })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> usize {
        self.constant.nrows()
    }

    pub fn constant(&self) -> &Matrix {
        &self.constant
    }

    pub fn modes(&self) -> &[TrigMode] {
        &self.modes
    }

    pub fn degree(&self) -> i64 {
        self.modes
            .iter()
            .map(|m| m.k.iter().map(|x| x.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    fn phase(k: &[i64], theta: &[f64]) -> f64 {
        2.0 * PI * k.iter().zip(theta).map(|(&ki, x)| ki as f64 * x).sum::<f64>()
    }

    pub fn eval(&self, theta: &[f64]) -> Matrix {
        let mut out = self.constant.clone();
        for mode in &self.modes {
            let (s, c) = Self::phase(&mode.k, theta).sin_cos();
            out += &mode.cos * c;
            out += &mode.sin * s;
        }
        out
    }

    /// Exact partial derivative along `axis`.
    pub fn partial(&self, theta: &[f64], axis: usize) -> Matrix {
        let m = self.size();
        let mut out = Matrix::zeros(m, m);
        for mode in &self.modes {
            let scale = 2.0 * PI * mode.k[axis] as f64;
            if scale == 0.0 {
                continue;
            }
            let (s, c) = Self::phase(&mode.k, theta).sin_cos();
            out += &mode.cos * (-scale * s);
            out += &mode.sin * (scale * c);
        }
        out
    }

    /// θ ↦ a·P(θ), still a trigonometric polynomial.
    pub fn left_multiply(&self, a: &Matrix) -> Self {
        Self {
            d: self.d,
            constant: a * &self.constant,
            modes: self
                .modes
                .iter()
                .map(|m| TrigMode {
                    k: m.k.clone(),
                    cos: a * &m.cos,
                    sin: a * &m.sin,
                })
                .collect(),
        }
    }

    /// Upper bound on sup_θ ‖P(θ)‖ from the coefficients.
    fn coefficient_bound(&self) -> f64 {
        self.modes
            .iter()
            .fold(self.constant.norm(), |acc, m| acc + m.cos.norm() + m.sin.norm())
    }
}

pub type MapFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// A continuous map 𝕋^d → SL_m(ℝ).
#[derive(Clone)]
pub enum TorusMatrixMap {
    Constant { d: usize, matrix: Matrix },
    Trig(TrigPolynomial),
    /// θ ↦ outer(θ + shift) · inner(θ).
    Composed {
        outer: Arc<TorusMatrixMap>,
        shift: TorusPoint,
        inner: Arc<TorusMatrixMap>,
    },
    /// θ ↦ base(θ + shift)⁻¹.
    Inverted {
        base: Arc<TorusMatrixMap>,
        shift: TorusPoint,
    },
    /// Black box; must be safe to evaluate concurrently.
    Callable { d: usize, m: usize, f: MapFn },
}

impl fmt::Debug for TorusMatrixMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { matrix, .. } => f.debug_tuple("Constant").field(matrix).finish(),
            Self::Trig(p) => f.debug_tuple("Trig").field(p).finish(),
            Self::Composed { outer, shift, inner } => f
                .debug_struct("Composed")
                .field("outer", outer)
                .field("shift", shift)
                .field("inner", inner)
                .finish(),
            Self::Inverted { base, shift } => f
                .debug_struct("Inverted")
                .field("base", base)
                .field("shift", shift)
                .finish(),
            Self::Callable { d, m, .. } => write!(f, "Callable(d={d}, m={m})"),
        }
    }
}

fn shifted(theta: &[f64], shift: &TorusPoint) -> Vec<f64> {
    theta.iter().zip(shift.coords()).map(|(a, b)| a + b).collect()
}

impl TorusMatrixMap {
    pub fn dim(&self) -> usize {
        match self {
            Self::Constant { d, .. } | Self::Callable { d, .. } => *d,
            Self::Trig(p) => p.dim(),
            Self::Composed { inner, .. } => inner.dim(),
            Self::Inverted { base, .. } => base.dim(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Self::Constant { matrix, .. } => matrix.nrows(),
            Self::Trig(p) => p.size(),
            Self::Callable { m, .. } => *m,
            Self::Composed { inner, .. } => inner.size(),
            Self::Inverted { base, .. } => base.size(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Trig(_) => "trigonometric",
            Self::Composed { .. } => "composed",
            Self::Inverted { .. } => "inverted",
            Self::Callable { .. } => "callable",
        }
    }

    /// A(θ) for raw coordinates (need not be reduced mod 1).
    pub fn eval(&self, theta: &[f64]) -> Result<Matrix> {
        match self {
            Self::Constant { matrix, .. } => Ok(matrix.clone()),
            Self::Trig(p) => Ok(p.eval(theta)),
            Self::Composed { outer, shift, inner } => {
                let a = outer.eval(&shifted(theta, shift))?;
                Ok(a * inner.eval(theta)?)
            }
            Self::Inverted { base, shift } => inverse(&base.eval(&shifted(theta, shift))?),
            Self::Callable { f, .. } => Ok(f(theta)),
        }
    }

    /// ∂A/∂θ_axis, available for constant and trigonometric maps.
    pub fn partial(&self, theta: &[f64], axis: usize) -> Result<Matrix> {
        match self {
            Self::Constant { matrix, .. } => Ok(Matrix::zeros(matrix.nrows(), matrix.ncols())),
            Self::Trig(p) => Ok(p.partial(theta, axis)),
            other => Err(Error::NotDifferentiable(other.kind())),
        }
    }

    /// Upper bound on sup_θ ‖A(θ)‖ (callables: max over a coarse grid).
    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::Constant { matrix, .. } => op_norm(matrix),
            Self::Trig(p) => p.coefficient_bound(),
            Self::Composed { outer, inner, .. } => outer.sup_bound() * inner.sup_bound(),
            // ‖B⁻¹‖ ≤ ‖B‖^{m−1} when det B = 1
            Self::Inverted { base, .. } => base.sup_bound().powi(base.size() as i32 - 1),
            Self::Callable { d, .. } => grid_points(*d, 16)
                .iter()
                .map(|t| self.eval(t).map(|a| op_norm(&a)).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max),
        }
    }

    /// θ ↦ a·A(θ), keeping the constant or trigonometric tier when possible.
    pub fn left_multiply(&self, a: &Matrix) -> Self {
        match self {
            Self::Constant { d, matrix } => Self::Constant {
                d: *d,
                matrix: a * matrix,
            },
            Self::Trig(p) => Self::Trig(p.left_multiply(a)),
            other => Self::Composed {
                outer: Arc::new(Self::Constant {
                    d: other.dim(),
                    matrix: a.clone(),
                }),
                shift: TorusPoint::origin(other.dim()),
                inner: Arc::new(other.clone()),
            },
        }
    }
}

/// Lattice {j/per_axis}^d.
pub fn grid_points(d: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let total = per_axis.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|_| {
                    let j = idx % per_axis;
                    idx /= per_axis;
                    j as f64 / per_axis as f64
                })
                .collect()
        })
        .collect()
}

fn validation_points(d: usize) -> Vec<Vec<f64>> {
    let axes = d.min(2);
    let mut pts: Vec<Vec<f64>> = grid_points(axes, VALIDATION_GRID)
        .into_iter()
        .map(|mut p| {
            p.resize(d, 0.0);
            p
        })
        .collect();
    let mut rng = RngStream::new(VALIDATION_SEED, d as u64);
    pts.extend((0..VALIDATION_RANDOM).map(|_| (0..d).map(|_| rng.uniform()).collect()));
    pts
}

fn validate_sl(map: &TorusMatrixMap) -> Result<()> {
    let m = map.size();
    for theta in validation_points(map.dim()) {
        let a = map.eval(&theta)?;
        if a.shape() != (m, m) {
            return Err(invalid(format!("map returned a {:?} matrix, expected {m}×{m}", a.shape())));
        }
        let dt = det(&a);
        if !dt.is_finite() || (dt - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::NotSpecialLinear(format!("det = {dt} at θ = {theta:?}")));
        }
    }
    Ok(())
}

fn check_det_one(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(invalid("matrix must be square"));
    }
    let dt = det(a);
    if !dt.is_finite() || (dt - 1.0).abs() > DET_TOLERANCE {
        return Err(Error::NotSpecialLinear(format!("det = {dt}")));
    }
    Ok(())
}

/// An element (α, A) of 𝒢.
#[derive(Clone, Debug)]
pub struct QpCocycle {
    freq: Frequency,
    map: Arc<TorusMatrixMap>,
}

impl QpCocycle {
    /// Validated constructor: dimensions agree and A is SL_m-valued on
    /// the validation sample.
    pub fn new(freq: Frequency, map: TorusMatrixMap) -> Result<Self> {
        check_dim(map.dim(), freq.dim())?;
        validate_sl(&map)?;
        Ok(Self {
            freq,
            map: Arc::new(map),
        })
    }

    pub fn constant(freq: Frequency, matrix: Matrix) -> Result<Self> {
        check_det_one(&matrix)?;
        let d = freq.dim();
        Ok(Self {
            freq,
            map: Arc::new(TorusMatrixMap::Constant { d, matrix }),
        })
    }

    pub fn trig(freq: Frequency, poly: TrigPolynomial) -> Result<Self> {
        Self::new(freq, TorusMatrixMap::Trig(poly))
    }

    pub fn callable<F>(freq: Frequency, m: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        let d = freq.dim();
        Self::new(freq, TorusMatrixMap::Callable { d, m, f: Arc::new(f) })
    }

    pub fn identity(d: usize, m: usize) -> Self {
        Self {
            freq: TorusPoint::origin(d),
            map: Arc::new(TorusMatrixMap::Constant {
                d,
                matrix: Matrix::identity(m, m),
            }),
        }
    }

    pub fn freq(&self) -> &Frequency {
        &self.freq
    }

    pub fn map(&self) -> &TorusMatrixMap {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.freq.dim()
    }

    pub fn size(&self) -> usize {
        self.map.size()
    }

    pub fn evaluate(&self, theta: &TorusPoint) -> Result<Matrix> {
        check_dim(self.dim(), theta.dim())?;
        self.map.eval(theta.coords())
    }

    #[inline]
    pub(crate) fn eval_coords(&self, theta: &[f64]) -> Result<Matrix> {
        self.map.eval(theta)
    }

    /// (α, a·A) for a constant a ∈ SL_m.
    pub fn left_multiply(&self, a: &Matrix) -> Result<Self> {
        check_det_one(a)?;
        if a.nrows() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                found: a.nrows(),
            });
        }
        Ok(Self {
            freq: self.freq.clone(),
            map: Arc::new(self.map.left_multiply(a)),
        })
    }

    /// Same map, different frequency.
    pub fn with_frequency(&self, freq: Frequency) -> Result<Self> {
        check_dim(self.dim(), freq.dim())?;
        Ok(Self {
            freq,
            map: self.map.clone(),
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        check_dim(self.size(), other.size())
    }
}

/// (α, A) ∘ (β, B) = (α + β, (A ∘ τ_β) B).
pub fn compose(g: &QpCocycle, h: &QpCocycle) -> Result<QpCocycle> {
    g.check_compatible(h)?;
    let freq = g.freq.add(&h.freq)?;
    let map = match (&*g.map, &*h.map) {
        (TorusMatrixMap::Constant { d, matrix: a }, TorusMatrixMap::Constant { matrix: b, .. }) => {
            TorusMatrixMap::Constant { d: *d, matrix: a * b }
        }
        _ => TorusMatrixMap::Composed {
            outer: g.map.clone(),
            shift: h.freq.clone(),
            inner: h.map.clone(),
        },
    };
    Ok(QpCocycle {
        freq,
        map: Arc::new(map),
    })
}

/// (α, A)⁻¹ = (−α, (A ∘ τ_{−α})⁻¹).
pub fn invert(g: &QpCocycle) -> Result<QpCocycle> {
    let freq = g.freq.neg();
    let map = match &*g.map {
        TorusMatrixMap::Constant { d, matrix } => TorusMatrixMap::Constant {
            d: *d,
            matrix: inverse(matrix)?,
        },
        _ => {
            let inv = TorusMatrixMap::Inverted {
                base: g.map.clone(),
                shift: freq.clone(),
            };
            // surfaces singular evaluations now rather than mid-iteration
            validate_sl(&inv)?;
            inv
        }
    };
    Ok(QpCocycle {
        freq,
        map: Arc::new(map),
    })
}

/// Circle distance of frequencies plus the max over a grid^d lattice of
/// ‖A(θ) − B(θ)‖. Grid-approximate.
pub fn distance(g: &QpCocycle, h: &QpCocycle, grid: usize) -> Result<f64> {
    if grid == 0 {
        return Err(invalid("grid must be at least 1"));
    }
    g.check_compatible(h)?;
    let freq_part = g.freq.distance(&h.freq);
    if Arc::ptr_eq(&g.map, &h.map) {
        return Ok(freq_part);
    }
    if let (TorusMatrixMap::Constant { matrix: a, .. }, TorusMatrixMap::Constant { matrix: b, .. }) =
        (&*g.map, &*h.map)
    {
        return Ok(freq_part + op_norm(&(a - b)));
    }
    let mut worst: f64 = 0.0;
    for theta in grid_points(g.dim(), grid) {
        let diff = g.map.eval(&theta)? - h.map.eval(&theta)?;
        worst = worst.max(op_norm(&diff));
    }
    Ok(freq_part + worst)
}

/// Bound L ≥ 1 defining C¹_L.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C1Bound(f64);

impl C1Bound {
    pub fn new(l: f64) -> Result<Self> {
        if !(l >= 1.0) || !l.is_finite() {
            return Err(invalid("C¹ bound must be a finite number ≥ 1"));
        }
        Ok(Self(l))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Checks ‖A‖₀ + ‖DA‖₀ ≤ L and the same for θ ↦ A(θ)⁻¹ on a grid^d lattice.
/// ‖DA(θ)‖ is the largest operator norm among the partial derivatives.
pub fn c1_norm_check(g: &QpCocycle, bound: C1Bound, grid: usize) -> Result<bool> {
    if grid == 0 {
        return Err(invalid("grid must be at least 1"));
    }
    let map = g.map();
    if !matches!(map, TorusMatrixMap::Constant { .. } | TorusMatrixMap::Trig(_)) {
        return Err(Error::NotDifferentiable(map.kind()));
    }
    let d = g.dim();
    let mut worst_direct: f64 = 0.0;
    let mut worst_inverse: f64 = 0.0;
    for theta in grid_points(d, grid) {
        let a = map.eval(&theta)?;
        let a_inv = inverse(&a)?;
        let mut da: f64 = 0.0;
        let mut da_inv: f64 = 0.0;
        for axis in 0..d {
            let p = map.partial(&theta, axis)?;
            da = da.max(op_norm(&p));
            // D(A⁻¹) = −A⁻¹ (DA) A⁻¹
            da_inv = da_inv.max(op_norm(&(&a_inv * &p * &a_inv)));
        }
        worst_direct = worst_direct.max(op_norm(&a) + da);
        worst_inverse = worst_inverse.max(op_norm(&a_inv) + da_inv);
    }
    Ok(worst_direct <= bound.0 && worst_inverse <= bound.0)
}

/// Random SL₂ trigonometric cocycle of degree ≤ `max_degree`: a shear
/// [[1, p], [0, 1]] or Schrödinger [[p, −1], [1, 0]] form with a random
/// scalar polynomial p, left-multiplied by a random constant SL₂ matrix.
pub fn random_sl2_trig(rng: &mut RngStream, d: usize, max_degree: i64) -> QpCocycle {
    let shear_form = rng.uniform() < 0.5;
    let place = |x: f64| {
        if shear_form {
            Matrix::from_row_slice(2, 2, &[0.0, x, 0.0, 0.0])
        } else {
            Matrix::from_row_slice(2, 2, &[x, 0.0, 0.0, 0.0])
        }
    };
    let constant = if shear_form {
        Matrix::from_row_slice(2, 2, &[1.0, rng.uniform_in(-1.0, 1.0), 0.0, 1.0])
    } else {
        Matrix::from_row_slice(2, 2, &[rng.uniform_in(-1.0, 1.0), -1.0, 1.0, 0.0])
    };
    let n_modes = 1 + rng.below(3);
    let modes = (0..n_modes)
        .map(|_| {
            let mut k: Vec<i64> = (0..d)
                .map(|_| rng.below(2 * max_degree as usize + 1) as i64 - max_degree)
                .collect();
            if k.iter().all(|&x| x == 0) {
                k[0] = 1 + rng.below(max_degree.max(1) as usize) as i64;
            }
            TrigMode {
                k,
                cos: place(rng.uniform_in(-1.0, 1.0)),
                sin: place(rng.uniform_in(-1.0, 1.0)),
            }
        })
        .collect();
    let a = rng.uniform_in(0.5, 1.5) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
    let (b, c) = (rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0));
    let left = Matrix::from_row_slice(2, 2, &[a, b, c, (1.0 + b * c) / a]);
    let poly = TrigPolynomial::new(d, constant, modes).expect("consistent shapes");
    let freq = TorusPoint::new((0..d).map(|_| rng.uniform()).collect()).expect("finite");
    QpCocycle {
        freq,
        map: Arc::new(TorusMatrixMap::Trig(poly.left_multiply(&left))),
    }
}

/// Largest gap between two cocycles: circle distance of frequencies and
/// max entrywise difference over the grid^d lattice.
pub fn max_pointwise_gap(g: &QpCocycle, h: &QpCocycle, grid: usize) -> Result<f64> {
    g.check_compatible(h)?;
    let mut worst = g.freq.distance(&h.freq);
    for theta in grid_points(g.dim(), grid) {
        let diff = g.map.eval(&theta)? - h.map.eval(&theta)?;
        worst = worst.max(diff.abs().max());
    }
    Ok(worst)
}

impl Metric for QpCocycle {
    fn distance(&self, other: &Self) -> f64 {
        distance(self, other, METRIC_GRID).unwrap_or(f64::INFINITY)
    }

    fn same_space(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.size() == other.size()
    }
}

impl Magnitude for QpCocycle {
    fn magnitude(&self) -> f64 {
        self.freq.magnitude().max(self.map.sup_bound())
    }
}

/// Serialized form of constant and trigonometric cocycles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleRecord {
    pub frequency: Vec<Sig17>,
    pub map: MapRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapRecord {
    Constant {
        matrix: Vec<Vec<Sig17>>,
    },
    TrigPolynomial {
        constant: Vec<Vec<Sig17>>,
        modes: Vec<ModeRecord>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeRecord {
    pub k: Vec<i64>,
    pub cos: Vec<Vec<Sig17>>,
    pub sin: Vec<Vec<Sig17>>,
}

pub fn matrix_rows(a: &Matrix) -> Vec<Vec<Sig17>> {
    a.row_iter()
        .map(|r| sig17_vec(&r.iter().copied().collect::<Vec<_>>()))
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<Sig17>]) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(invalid("matrix rows must form a nonempty square"));
    }
    let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().map(|x| x.0)).collect();
    Ok(Matrix::from_row_slice(n, n, &flat))
}

impl TryFrom<&QpCocycle> for CocycleRecord {
    type Error = Error;

    fn try_from(g: &QpCocycle) -> Result<Self> {
        let map = match g.map() {
            TorusMatrixMap::Constant { matrix, .. } => MapRecord::Constant {
                matrix: matrix_rows(matrix),
            },
            TorusMatrixMap::Trig(p) => MapRecord::TrigPolynomial {
                constant: matrix_rows(p.constant()),
                modes: p
                    .modes()
                    .iter()
                    .map(|m| ModeRecord {
                        k: m.k.clone(),
                        cos: matrix_rows(&m.cos),
                        sin: matrix_rows(&m.sin),
                    })
                    .collect(),
            },
            other => {
                return Err(invalid(format!("{} maps are not serializable", other.kind())));
            }
        };
        Ok(Self {
            frequency: sig17_vec(g.freq().coords()),
            map,
        })
    }
}

impl TryFrom<CocycleRecord> for QpCocycle {
    type Error = Error;

    fn try_from(rec: CocycleRecord) -> Result<Self> {
        let freq = TorusPoint::new(rec.frequency.iter().map(|x| x.0).collect())?;
        match rec.map {
            MapRecord::Constant { matrix } => QpCocycle::constant(freq, matrix_from_rows(&matrix)?),
            MapRecord::TrigPolynomial { constant, modes } => {
                let modes = modes
                    .into_iter()
                    .map(|m| {
                        Ok(TrigMode {
                            k: m.k,
                            cos: matrix_from_rows(&m.cos)?,
                            sin: matrix_from_rows(&m.sin)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let d = freq.dim();
                QpCocycle::trig(freq, TrigPolynomial::new(d, matrix_from_rows(&constant)?, modes)?)
            }
        }
    }
}

impl Serialize for QpCocycle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CocycleRecord::try_from(self)
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QpCocycle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = CocycleRecord::deserialize(d)?;
        QpCocycle::try_from(rec).map_err(serde::de::Error::custom)
    }
}
