//! Two-dimensional cosine coefficient grids over `I⁺_N = {0..N₁}×{0..N₂}`.
//!
//! Layout is row-major with `n₂` fastest: `flat(n) = n₁·(N₂+1) + n₂`. Every
//! module (FFT buffers, matrix blocks, dumps) uses this convention.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::interval::{ComplexInterval, Interval};
use crate::scalar::Scalar;

/// Layout tag written into dumps and certificates.
pub const LAYOUT_TAG: &str = "row-major;n2-fastest;flat=n1*(N2+1)+n2";

const MAGIC: &[u8; 8] = b"BWCOEFF1";

/// Index pair `(n₁, n₂)`; also used for every truncation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct IndexPair(pub usize, pub usize);

impl IndexPair {
    pub const ZERO: IndexPair = IndexPair(0, 0);

    pub fn splat(n: usize) -> Self {
        IndexPair(n, n)
    }

    /// Number of entries in `I⁺_N`.
    pub fn box_len(&self) -> usize {
        (self.0 + 1) * (self.1 + 1)
    }

    /// Componentwise `<=`.
    pub fn le(&self, other: &IndexPair) -> bool {
        self.0 <= other.0 && self.1 <= other.1
    }

    pub fn contains(&self, n1: usize, n2: usize) -> bool {
        n1 <= self.0 && n2 <= self.1
    }

    pub fn flat(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.1 + 1) + n2
    }

    pub fn unflat(&self, i: usize) -> (usize, usize) {
        (i / (self.1 + 1), i % (self.1 + 1))
    }

    pub fn plus(&self, other: IndexPair) -> IndexPair {
        IndexPair(self.0 + other.0, self.1 + other.1)
    }

    pub fn max(&self, other: IndexPair) -> IndexPair {
        IndexPair(self.0.max(other.0), self.1.max(other.1))
    }

    /// Iterates `I⁺_N` in flat order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> {
        let n2 = self.1;
        (0..=self.0).flat_map(move |a| (0..=n2).map(move |b| (a, b)))
    }
}

impl std::fmt::Display for IndexPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// Symmetry weight: 1 at the origin, 2 on the axes, 4 elsewhere.
pub fn gamma(n1: usize, n2: usize) -> u32 {
    match (n1 == 0, n2 == 0) {
        (true, true) => 1,
        (true, false) | (false, true) => 2,
        (false, false) => 4,
    }
}

/// The four reflections `h₁..h₄` of `k`.
pub fn reflections(k1: i64, k2: i64) -> [(i64, i64); 4] {
    [(k1, k2), (-k1, k2), (k1, -k2), (-k1, -k2)]
}

/// The distinct elements among `h₁(k)..h₄(k)` (1, 2 or 4 of them).
///
/// `Σ_{distinct}` equals `(γ_k/4) Σᵢ` for every summand.
pub fn distinct_reflections(k1: usize, k2: usize) -> impl Iterator<Item = (i64, i64)> {
    let (a, b) = (k1 as i64, k2 as i64);
    let r = reflections(a, b);
    let take = gamma(k1, k2) as usize;
    let pick: [usize; 4] = match (k1 == 0, k2 == 0) {
        (true, true) => [0, 0, 0, 0],
        (true, false) => [0, 2, 0, 0],
        (false, true) => [0, 1, 0, 0],
        (false, false) => [0, 1, 2, 3],
    };
    (0..take).map(move |i| r[pick[i]])
}

/// Values that can live in a coefficient grid.
pub trait CoeffValue:
    Copy + Default + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    /// Exact embedding of small dyadic constants (weights such as 1/4).
    fn from_dyadic(x: f64) -> Self;
}

/// Enclosure of `|v|`.
pub trait AbsEnclose<T: Scalar> {
    fn abs_enclosure(&self) -> Interval<T>;
}

macro_rules! float_values {
    ($($t:ty),*) => {$(
        impl CoeffValue for $t {
            fn from_dyadic(x: f64) -> Self {
                x as $t
            }
        }
        impl AbsEnclose<$t> for $t {
            fn abs_enclosure(&self) -> Interval<$t> {
                Interval::point(self.abs())
            }
        }
    )*};
}
float_values!(f32, f64);

impl<T: Scalar> CoeffValue for Interval<T> {
    fn from_dyadic(x: f64) -> Self {
        Interval::from_f64(x)
    }
}

impl<T: Scalar> AbsEnclose<T> for Interval<T> {
    fn abs_enclosure(&self) -> Interval<T> {
        self.abs()
    }
}

impl<T: Scalar> CoeffValue for ComplexInterval<T> {
    fn from_dyadic(x: f64) -> Self {
        ComplexInterval::from_real(Interval::from_f64(x))
    }
}

impl<T: Scalar> AbsEnclose<T> for ComplexInterval<T> {
    fn abs_enclosure(&self) -> Interval<T> {
        Interval::from_ordered(T::zero(), self.abs_upper())
    }
}

impl<T: Scalar> CoeffValue for Complex<T> {
    fn from_dyadic(x: f64) -> Self {
        Complex::new(T::lit(x), T::zero())
    }
}

/// Finite grid of cosine coefficients; reads outside `I⁺_N` return zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffGrid<V> {
    dims: IndexPair,
    data: Vec<V>,
}

impl<V: CoeffValue> CoeffGrid<V> {
    pub fn zeros(dims: IndexPair) -> Self {
        CoeffGrid { dims, data: vec![V::default(); dims.box_len()] }
    }

    pub fn from_vec(dims: IndexPair, data: Vec<V>) -> Self {
        assert_eq!(data.len(), dims.box_len(), "grid data length does not match dims {dims}");
        CoeffGrid { dims, data }
    }

    pub fn from_fn(dims: IndexPair, f: impl Fn(usize, usize) -> V) -> Self {
        let data = dims.iter().map(|(a, b)| f(a, b)).collect();
        CoeffGrid { dims, data }
    }

    /// Unit vector `e_k`.
    pub fn unit(dims: IndexPair, k1: usize, k2: usize) -> Self {
        let mut g = Self::zeros(dims);
        g.set(k1, k2, V::from_dyadic(1.0));
        g
    }

    pub fn dims(&self) -> IndexPair {
        self.dims
    }

    pub fn data(&self) -> &[V] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [V] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<V> {
        self.data
    }

    #[inline]
    pub fn get(&self, n1: usize, n2: usize) -> V {
        if self.dims.contains(n1, n2) {
            self.data[self.dims.flat(n1, n2)]
        } else {
            V::default()
        }
    }

    /// Value at `|n|` for a signed index.
    #[inline]
    pub fn get_signed(&self, n1: i64, n2: i64) -> V {
        self.get(n1.unsigned_abs() as usize, n2.unsigned_abs() as usize)
    }

    pub fn set(&mut self, n1: usize, n2: usize, v: V) {
        assert!(self.dims.contains(n1, n2), "index ({n1},{n2}) outside {}", self.dims);
        let i = self.dims.flat(n1, n2);
        self.data[i] = v;
    }

    /// Copy into a grid of different dims (truncating or zero padding).
    pub fn resized(&self, dims: IndexPair) -> Self {
        Self::from_fn(dims, |a, b| self.get(a, b))
    }

    pub fn map<W: CoeffValue>(&self, f: impl Fn(V) -> W) -> CoeffGrid<W> {
        CoeffGrid { dims: self.dims, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

impl<T: Scalar> CoeffGrid<T> {
    pub fn to_intervals(&self) -> CoeffGrid<Interval<T>> {
        self.map(Interval::point)
    }

    /// Largest `|a_n|`.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Smallest box containing every nonzero entry.
    pub fn support(&self) -> IndexPair {
        let mut s = IndexPair::ZERO;
        for (i, v) in self.data.iter().enumerate() {
            if *v != T::zero() {
                let (a, b) = self.dims.unflat(i);
                s = s.max(IndexPair(a, b));
            }
        }
        s
    }
}

impl<T: Scalar> CoeffGrid<Interval<T>> {
    pub fn midpoints(&self) -> CoeffGrid<T> {
        CoeffGrid { dims: self.dims, data: self.data.iter().map(|v| v.mid()).collect() }
    }
}

/// Geometric weights `ν = (ν₁, ν₂)` with cached power tables.
///
/// The base may be an interval (for example `ν̄ = e^{ρ̄}`).
#[derive(Clone, Debug)]
pub struct Weights<T: Scalar = f64> {
    base: [Interval<T>; 2],
    pow: [Vec<Interval<T>>; 2],
}

impl<T: Scalar> Weights<T> {
    /// Tables cover indices up to `max`; larger indices are computed on demand.
    pub fn new(nu: [T; 2], max: IndexPair) -> Self {
        assert!(nu[0] >= T::one() && nu[1] >= T::one(), "weights must satisfy nu >= 1");
        Self::from_intervals([Interval::point(nu[0]), Interval::point(nu[1])], max)
    }

    pub fn from_intervals(base: [Interval<T>; 2], max: IndexPair) -> Self {
        let table = |x: Interval<T>, n: usize| {
            let mut v = Vec::with_capacity(n + 1);
            let mut p = Interval::one();
            for _ in 0..=n {
                v.push(p);
                p = p * x;
            }
            v
        };
        Weights { base, pow: [table(base[0], max.0), table(base[1], max.1)] }
    }

    pub fn base(&self) -> [Interval<T>; 2] {
        self.base
    }

    /// Enclosure of `ν_j^n`.
    pub fn pow(&self, j: usize, n: usize) -> Interval<T> {
        match self.pow[j].get(n) {
            Some(p) => *p,
            None => self.base[j].powi(n as u32),
        }
    }

    /// `ν^n = ν₁^{n₁} ν₂^{n₂}`.
    pub fn nu_pow(&self, n1: usize, n2: usize) -> Interval<T> {
        self.pow(0, n1) * self.pow(1, n2)
    }

    /// `ω_n = γ_n ν^n`.
    pub fn omega(&self, n1: usize, n2: usize) -> Interval<T> {
        self.nu_pow(n1, n2) * Interval::from_f64(gamma(n1, n2) as f64)
    }
}

/// `‖a‖_ν = Σ |a_n| ω_n`, summed in flat order.
pub fn norm_ell1_nu<T: Scalar, V: CoeffValue + AbsEnclose<T>>(a: &CoeffGrid<V>, w: &Weights<T>) -> Interval<T> {
    let d = a.dims();
    d.iter().fold(Interval::zero(), |acc, (n1, n2)| acc + a.get(n1, n2).abs_enclosure() * w.omega(n1, n2))
}

/// `(a∗b)_n = Σ_{m∈ℤ²} a_{|m|} b_{|n−m|}` on `I⁺_{N_a+N_b}`.
///
/// Each output entry is summed in a fixed order, so results do not depend
/// on the number of threads.
pub fn convolve<V: CoeffValue>(a: &CoeffGrid<V>, b: &CoeffGrid<V>) -> CoeffGrid<V> {
    convolve_into(a, b, a.dims().plus(b.dims()))
}

/// Convolution restricted to the output box `out`.
pub fn convolve_into<V: CoeffValue>(a: &CoeffGrid<V>, b: &CoeffGrid<V>, out: IndexPair) -> CoeffGrid<V> {
    let (da, db) = (a.dims(), b.dims());
    let (a1, a2) = (da.0 as i64, da.1 as i64);
    let (b1, b2) = (db.0 as i64, db.1 as i64);
    let data: Vec<V> = (0..out.box_len())
        .into_par_iter()
        .map(|i| {
            let (n1, n2) = out.unflat(i);
            let (n1, n2) = (n1 as i64, n2 as i64);
            let mut acc = V::default();
            for m1 in (-a1).max(n1 - b1)..=a1.min(n1 + b1) {
                for m2 in (-a2).max(n2 - b2)..=a2.min(n2 + b2) {
                    acc = acc + a.get_signed(m1, m2) * b.get_signed(n1 - m1, n2 - m2);
                }
            }
            acc
        })
        .collect();
    CoeffGrid::from_vec(out, data)
}

/// `Σ_{n∈I⁺_N} (γ_n/4) Σᵢ f(hᵢ(n))`, which equals `Σ_{n∈[−N,N]} f(n)`.
pub fn reflect_sum<V: CoeffValue>(dims: IndexPair, f: impl Fn(i64, i64) -> V) -> V {
    let mut acc = V::default();
    for (n1, n2) in dims.iter() {
        let q = V::from_dyadic(gamma(n1, n2) as f64 / 4.0);
        let mut inner = V::default();
        for (h1, h2) in reflections(n1 as i64, n2 as i64) {
            inner = inner + f(h1, h2);
        }
        acc = acc + q * inner;
    }
    acc
}

/// `u(x) = Σ γ_n a_n cos(n₁q₁x₁) cos(n₂q₂x₂)` in plain floating point.
pub fn evaluate_u<T: Scalar>(a: &CoeffGrid<T>, q: [T; 2], x: [T; 2]) -> T {
    let d = a.dims();
    let c1: Vec<T> = (0..=d.0).map(|n| (T::from_usize_exact(n) * q[0] * x[0]).cos()).collect();
    let c2: Vec<T> = (0..=d.1).map(|n| (T::from_usize_exact(n) * q[1] * x[1]).cos()).collect();
    let mut s = T::zero();
    for (n1, n2) in d.iter() {
        let v = a.get(n1, n2);
        if v != T::zero() {
            s = s + T::lit(gamma(n1, n2) as f64) * v * c1[n1] * c2[n2];
        }
    }
    s
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a coefficient dump (bad magic)")]
    BadMagic,
    #[error("unsupported layout tag {0:?}")]
    BadLayout(String),
    #[error("checksum mismatch: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },
    #[error("malformed dump: {0}")]
    Malformed(String),
}

/// Values with a fixed little-endian binary encoding.
pub trait DumpValue: CoeffValue {
    const KIND: u8;
    const WIDTH: usize;
    fn write_le(&self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
    fn csv_fields(&self) -> String;
    const CSV_HEADER: &'static str;
}

impl DumpValue for f64 {
    const KIND: u8 = 0;
    const WIDTH: usize = 8;
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
    }
    fn csv_fields(&self) -> String {
        format!("{:e}", self)
    }
    const CSV_HEADER: &'static str = "n1,n2,value";
}

impl DumpValue for Interval<f64> {
    const KIND: u8 = 1;
    const WIDTH: usize = 16;
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.lo().to_le_bytes());
        out.extend_from_slice(&self.hi().to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        let lo = f64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"));
        let hi = f64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        Interval::new(lo, hi).unwrap_or_else(|_| Interval::entire())
    }
    fn csv_fields(&self) -> String {
        let s = self.to_string();
        let inner = &s[1..s.len() - 1];
        inner.to_string()
    }
    const CSV_HEADER: &'static str = "n1,n2,lo,hi";
}

impl<V: DumpValue> CoeffGrid<V> {
    fn payload(&self) -> Vec<u8> {
        let mut p = Vec::with_capacity(self.data.len() * V::WIDTH);
        for v in &self.data {
            v.write_le(&mut p);
        }
        p
    }

    /// Hex SHA-256 of the binary payload (dims and layout included).
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(LAYOUT_TAG.as_bytes());
        h.update((self.dims.0 as u64).to_le_bytes());
        h.update((self.dims.1 as u64).to_le_bytes());
        h.update([V::KIND]);
        h.update(self.payload());
        hex::encode(h.finalize())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(V::CSV_HEADER);
        s.push('\n');
        for (n1, n2) in self.dims.iter() {
            let _ = writeln!(s, "{n1},{n2},{}", self.get(n1, n2).csv_fields());
        }
        s
    }

    /// Binary dump: magic, dims, value kind, layout tag, checksum, payload.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dims.0 as u64).to_le_bytes());
        out.extend_from_slice(&(self.dims.1 as u64).to_le_bytes());
        out.push(V::KIND);
        out.extend_from_slice(&(LAYOUT_TAG.len() as u32).to_le_bytes());
        out.extend_from_slice(LAYOUT_TAG.as_bytes());
        out.extend_from_slice(&hex::decode(self.digest()).expect("hex digest"));
        out.extend_from_slice(&self.payload());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DumpError> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(DumpError::BadMagic);
        }
        let mut u64b = [0u8; 8];
        r.read_exact(&mut u64b)?;
        let n1 = u64::from_le_bytes(u64b) as usize;
        r.read_exact(&mut u64b)?;
        let n2 = u64::from_le_bytes(u64b) as usize;
        let mut kind = [0u8; 1];
        r.read_exact(&mut kind)?;
        if kind[0] != V::KIND {
            return Err(DumpError::Malformed(format!("value kind {} where {} expected", kind[0], V::KIND)));
        }
        let mut lenb = [0u8; 4];
        r.read_exact(&mut lenb)?;
        let len = u32::from_le_bytes(lenb) as usize;
        if len > 1024 {
            return Err(DumpError::Malformed("layout tag too long".into()));
        }
        let mut tag = vec![0u8; len];
        r.read_exact(&mut tag)?;
        let tag = String::from_utf8_lossy(&tag).into_owned();
        if tag != LAYOUT_TAG {
            return Err(DumpError::BadLayout(tag));
        }
        let mut sum = [0u8; 32];
        r.read_exact(&mut sum)?;
        let dims = IndexPair(n1, n2);
        let need = dims.box_len() * V::WIDTH;
        if r.len() != need {
            return Err(DumpError::Malformed(format!("payload has {} bytes, expected {need}", r.len())));
        }
        let data = r.chunks_exact(V::WIDTH).map(V::read_le).collect();
        let g = CoeffGrid { dims, data };
        let computed = g.digest();
        let stored = hex::encode(sum);
        if computed != stored {
            return Err(DumpError::Checksum { stored, computed });
        }
        Ok(g)
    }

    pub fn write_binary(&self, path: &Path) -> Result<(), DumpError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self, DumpError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

impl CoeffGrid<f64> {
    /// Parses the `n1,n2,value` CSV written by [`CoeffGrid::to_csv`].
    pub fn from_csv(s: &str) -> Result<Self, DumpError> {
        let mut entries = Vec::new();
        let mut dims = IndexPair::ZERO;
        for (line_no, line) in s.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || DumpError::Malformed(format!("line {}: {line:?}", line_no + 1));
            let mut it = line.split(',');
            let n1: usize = it.next().and_then(|t| t.trim().parse().ok()).ok_or_else(bad)?;
            let n2: usize = it.next().and_then(|t| t.trim().parse().ok()).ok_or_else(bad)?;
            let v: f64 = it.next().and_then(|t| t.trim().parse().ok()).ok_or_else(bad)?;
            dims = dims.max(IndexPair(n1, n2));
            entries.push((n1, n2, v));
        }
        let mut g = CoeffGrid::zeros(dims);
        for (n1, n2, v) in entries {
            g.set(n1, n2, v);
        }
        Ok(g)
    }
}
