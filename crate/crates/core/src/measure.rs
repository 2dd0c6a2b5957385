//! Compactly supported probability measures: finite atomic measures and
//! seeded samplers, with products, pushforwards and the order-1
//! Wasserstein distance between atomic measures.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{op_norm, Matrix};
use crate::record::{plain_vec, sig17_vec, Sig17};
use crate::rng::RngStream;
use crate::torus::TorusPoint;
use crate::transport::min_cost_transport;

/// Atoms closer than this are considered the same point.
pub const MERGE_TOLERANCE: f64 = 1e-12;
/// Default cap on the total atom count accepted by [`wasserstein1`].
pub const DEFAULT_ATOM_CAP: usize = 512;

/// Ground metric of a point space.
pub trait Metric {
    fn distance(&self, other: &Self) -> f64;

    fn same_space(&self, _other: &Self) -> bool {
        true
    }
}

/// Distance from a fixed origin; used to certify sampler support bounds.
pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Metric for f64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Metric for usize {
    fn distance(&self, other: &Self) -> f64 {
        (*self as f64 - *other as f64).abs()
    }
}

impl Magnitude for usize {
    fn magnitude(&self) -> f64 {
        *self as f64
    }
}

impl Metric for TorusPoint {
    fn distance(&self, other: &Self) -> f64 {
        TorusPoint::distance(self, other)
    }

    fn same_space(&self, other: &Self) -> bool {
        self.dim() == other.dim()
    }
}

impl Magnitude for TorusPoint {
    fn magnitude(&self) -> f64 {
        self.distance(&TorusPoint::origin(self.dim()))
    }
}

impl Metric for Matrix {
    fn distance(&self, other: &Self) -> f64 {
        op_norm(&(self - other))
    }

    fn same_space(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }
}

impl Magnitude for Matrix {
    fn magnitude(&self) -> f64 {
        op_norm(self)
    }
}

/// Sum metric on products.
impl<A: Metric, B: Metric> Metric for (A, B) {
    fn distance(&self, other: &Self) -> f64 {
        self.0.distance(&other.0) + self.1.distance(&other.1)
    }

    fn same_space(&self, other: &Self) -> bool {
        self.0.same_space(&other.0) && self.1.same_space(&other.1)
    }
}

impl<A: Magnitude, B: Magnitude> Magnitude for (A, B) {
    fn magnitude(&self) -> f64 {
        self.0.magnitude().max(self.1.magnitude())
    }
}

/// Finite probability measure Σ w_j δ_{x_j}.
#[derive(Clone, Debug)]
pub struct AtomicMeasure<T> {
    atoms: Vec<T>,
    weights: Vec<f64>,
    cdf: Vec<f64>,
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

impl<T> AtomicMeasure<T> {
    pub(crate) fn from_parts_unchecked(atoms: Vec<T>, weights: Vec<f64>) -> Self {
        let cdf = cumulative(&weights);
        Self {
            atoms,
            weights,
            cdf,
        }
    }

    pub fn dirac(x: T) -> Self {
        Self::from_parts_unchecked(vec![x], vec![1.0])
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    /// Inverse-CDF draw of an atom index. Always consumes exactly one
    /// uniform, so streams stay aligned across measures with merged atoms.
    #[inline]
    pub fn sample_index(&self, rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        self.cdf.partition_point(|&c| c <= u).min(self.atoms.len() - 1)
    }

    pub fn sample_ref(&self, rng: &mut RngStream) -> &T {
        &self.atoms[self.sample_index(rng)]
    }

    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Vec<T>
    where
        T: Clone,
    {
        (0..n).map(|_| self.sample_ref(rng).clone()).collect()
    }

    /// Atomic product measure with multiplied weights.
    pub fn product<U: Clone>(&self, other: &AtomicMeasure<U>) -> AtomicMeasure<(T, U)>
    where
        T: Clone,
    {
        let mut atoms = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (a, wa) in self.iter() {
            for (b, wb) in other.iter() {
                atoms.push((a.clone(), b.clone()));
                weights.push(wa * wb);
            }
        }
        AtomicMeasure::from_parts_unchecked(atoms, weights)
    }

    /// f_*μ; atoms that collide under `f` are merged and their weights summed.
    pub fn pushforward<U: Metric, F: Fn(&T) -> U>(&self, f: F) -> AtomicMeasure<U> {
        let mut atoms: Vec<U> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, w) in self.iter() {
            let y = f(x);
            match atoms.iter().position(|a| a.distance(&y) <= MERGE_TOLERANCE) {
                Some(i) => weights[i] += w,
                None => {
                    atoms.push(y);
                    weights.push(w);
                }
            }
        }
        AtomicMeasure::from_parts_unchecked(atoms, weights)
    }

    /// Fallible pushforward (e.g. when building atoms can fail).
    pub fn try_pushforward<U: Metric, F: Fn(&T) -> Result<U>>(&self, f: F) -> Result<AtomicMeasure<U>> {
        let mut atoms: Vec<U> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, w) in self.iter() {
            let y = f(x)?;
            match atoms.iter().position(|a| a.distance(&y) <= MERGE_TOLERANCE) {
                Some(i) => weights[i] += w,
                None => {
                    atoms.push(y);
                    weights.push(w);
                }
            }
        }
        Ok(AtomicMeasure::from_parts_unchecked(atoms, weights))
    }
}

impl<T: Metric> AtomicMeasure<T> {
    /// Validated constructor: positive weights summing to 1 within 1e-12,
    /// pairwise distinct atoms in a common space.
    pub fn new(atoms: Vec<T>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidMeasure("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        for i in 0..atoms.len() {
            for j in 0..i {
                if !atoms[i].same_space(&atoms[j]) {
                    return Err(Error::InvalidMeasure("atoms from different spaces".into()));
                }
                if atoms[i].distance(&atoms[j]) <= MERGE_TOLERANCE {
                    return Err(Error::InvalidMeasure(format!("atoms {j} and {i} coincide")));
                }
            }
        }
        Ok(Self::from_parts_unchecked(atoms, weights))
    }

    pub fn uniform(atoms: Vec<T>) -> Result<Self> {
        let w = 1.0 / atoms.len().max(1) as f64;
        let n = atoms.len();
        Self::new(atoms, vec![w; n])
    }
}

impl<T: Magnitude> AtomicMeasure<T> {
    pub fn support_radius(&self) -> f64 {
        self.atoms.iter().map(|a| a.magnitude()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct AtomicRecord<T> {
    atoms: Vec<T>,
    weights: Vec<Sig17>,
}

impl<T: Serialize> Serialize for AtomicMeasure<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Borrowed<'a, T> {
            atoms: &'a [T],
            weights: Vec<Sig17>,
        }
        Borrowed {
            atoms: &self.atoms,
            weights: sig17_vec(&self.weights),
        }
        .serialize(s)
    }
}

impl<'de, T: Deserialize<'de> + Metric> Deserialize<'de> for AtomicMeasure<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = AtomicRecord::<T>::deserialize(d)?;
        AtomicMeasure::new(rec.atoms, plain_vec(&rec.weights)).map_err(serde::de::Error::custom)
    }
}

type DrawFn<T> = Arc<dyn Fn(&mut RngStream) -> Result<T> + Send + Sync>;

/// Measure given only through a seeded sampler, with a certified bound on
/// the magnitude of its support.
#[derive(Clone)]
pub struct SamplerMeasure<T> {
    draw: DrawFn<T>,
    support_bound: f64,
    magnitude: fn(&T) -> f64,
}

impl<T> std::fmt::Debug for SamplerMeasure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SamplerMeasure")
            .field("support_bound", &self.support_bound)
            .finish_non_exhaustive()
    }
}

impl<T: Magnitude> SamplerMeasure<T> {
    pub fn new<F>(draw: F, support_bound: f64) -> Self
    where
        F: Fn(&mut RngStream) -> T + Send + Sync + 'static,
    {
        Self::try_new(move |rng| Ok(draw(rng)), support_bound)
    }

    /// Sampler whose draws may fail (e.g. a pushforward that validates).
    pub fn try_new<F>(draw: F, support_bound: f64) -> Self
    where
        F: Fn(&mut RngStream) -> Result<T> + Send + Sync + 'static,
    {
        Self {
            draw: Arc::new(draw),
            support_bound,
            magnitude: <T as Magnitude>::magnitude,
        }
    }
}

impl SamplerMeasure<f64> {
    /// Uniform law on [lo, hi].
    pub fn uniform_interval(lo: f64, hi: f64) -> Self {
        let bound = lo.abs().max(hi.abs());
        Self::new(move |rng| rng.uniform_in(lo, hi), bound)
    }
}

impl<T> SamplerMeasure<T> {
    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    /// One draw; fails if it escapes the certified support ball.
    pub fn draw(&self, rng: &mut RngStream) -> Result<T> {
        let x = (self.draw)(rng)?;
        let mag = (self.magnitude)(&x);
        if !(mag <= self.support_bound * (1.0 + 1e-12) + 1e-12) {
            return Err(Error::InvalidMeasure(format!(
                "sample of magnitude {mag} escapes support bound {}",
                self.support_bound
            )));
        }
        Ok(x)
    }

    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Result<Vec<T>> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// Either kind of compactly supported measure.
#[derive(Clone, Debug)]
pub enum Measure<T> {
    Atomic(AtomicMeasure<T>),
    Sampler(SamplerMeasure<T>),
}

impl<T> From<AtomicMeasure<T>> for Measure<T> {
    fn from(m: AtomicMeasure<T>) -> Self {
        Measure::Atomic(m)
    }
}

impl<T> From<SamplerMeasure<T>> for Measure<T> {
    fn from(m: SamplerMeasure<T>) -> Self {
        Measure::Sampler(m)
    }
}

impl<T: Clone + Send + Sync + 'static> Measure<T> {
    pub fn draw(&self, rng: &mut RngStream) -> Result<T> {
        match self {
            Measure::Atomic(a) => Ok(a.sample_ref(rng).clone()),
            Measure::Sampler(s) => s.draw(rng),
        }
    }

    /// n i.i.d. draws.
    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Result<Vec<T>> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        match self {
            Measure::Atomic(a) => Ok(a.sample(rng, n)),
            Measure::Sampler(s) => s.sample(rng, n),
        }
    }

    pub fn as_atomic(&self) -> Option<&AtomicMeasure<T>> {
        match self {
            Measure::Atomic(a) => Some(a),
            Measure::Sampler(_) => None,
        }
    }
}

impl<T: Clone + Magnitude + Send + Sync + 'static> Measure<T> {
    /// Radius of a ball certified to contain the support.
    pub fn support_bound(&self) -> f64 {
        match self {
            Measure::Atomic(a) => a.support_radius(),
            Measure::Sampler(s) => s.support_bound,
        }
    }

    /// μ × ν. Atomic if both factors are; otherwise a sampler drawing the
    /// first coordinate then the second from the same stream.
    pub fn product<U: Clone + Magnitude + Send + Sync + 'static>(&self, other: &Measure<U>) -> Measure<(T, U)> {
        if let (Measure::Atomic(a), Measure::Atomic(b)) = (self, other) {
            return Measure::Atomic(a.product(b));
        }
        let bound = self.support_bound().max(other.support_bound());
        let (x, y) = (self.clone(), other.clone());
        Measure::Sampler(SamplerMeasure::try_new(
            move |rng| {
                let a = x.draw(rng)?;
                let b = y.draw(rng)?;
                Ok((a, b))
            },
            bound,
        ))
    }

    /// f_*μ. For samplers the caller certifies the image support bound.
    pub fn pushforward<U, F>(&self, f: F, image_bound: f64) -> Measure<U>
    where
        U: Clone + Metric + Magnitude + Send + Sync + 'static,
        F: Fn(&T) -> U + Send + Sync + 'static,
    {
        match self {
            Measure::Atomic(a) => Measure::Atomic(a.pushforward(f)),
            Measure::Sampler(s) => {
                let s = s.clone();
                Measure::Sampler(SamplerMeasure::try_new(move |rng| Ok(f(&s.draw(rng)?)), image_bound))
            }
        }
    }

    /// Fallible f_*μ; atomic images are built eagerly, sampler images
    /// report failures at draw time.
    pub fn try_pushforward<U, F>(&self, f: F, image_bound: f64) -> Result<Measure<U>>
    where
        U: Clone + Metric + Magnitude + Send + Sync + 'static,
        F: Fn(&T) -> Result<U> + Send + Sync + 'static,
    {
        match self {
            Measure::Atomic(a) => Ok(Measure::Atomic(a.try_pushforward(f)?)),
            Measure::Sampler(s) => {
                let s = s.clone();
                Ok(Measure::Sampler(SamplerMeasure::try_new(move |rng| f(&s.draw(rng)?), image_bound)))
            }
        }
    }
}

/// Order-1 Wasserstein distance between atomic measures, with the default
/// atom cap.
pub fn wasserstein1<T: Metric>(mu: &AtomicMeasure<T>, nu: &AtomicMeasure<T>) -> Result<f64> {
    wasserstein1_capped(mu, nu, DEFAULT_ATOM_CAP)
}

/// Exact W₁ as the optimal transport cost over the atom-pair cost matrix.
pub fn wasserstein1_capped<T: Metric>(
    mu: &AtomicMeasure<T>,
    nu: &AtomicMeasure<T>,
    cap: usize,
) -> Result<f64> {
    let total = mu.len() + nu.len();
    if total > cap {
        return Err(Error::AtomCap { found: total, cap });
    }
    if !mu.atoms[0].same_space(&nu.atoms[0]) {
        return Err(Error::InvalidMeasure("measures live on different spaces".into()));
    }
    let cost: Vec<f64> = mu
        .atoms
        .iter()
        .flat_map(|x| nu.atoms.iter().map(move |y| x.distance(y)))
        .collect();
    let cost_t: Vec<f64> = nu
        .atoms
        .iter()
        .flat_map(|y| mu.atoms.iter().map(move |x| y.distance(x)))
        .collect();
    // solving both orientations and averaging makes the result exactly symmetric
    let forward = min_cost_transport(&mu.weights, &nu.weights, &cost).cost;
    let backward = min_cost_transport(&nu.weights, &mu.weights, &cost_t).cost;
    Ok((0.5 * (forward + backward)).max(0.0))
}
