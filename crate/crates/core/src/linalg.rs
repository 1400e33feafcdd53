//! Complex amplitudes, basis strings, sparse state vectors and small dense
//! unitaries.
//!
//! Bit order is big-endian throughout: the leftmost character of a
//! [`BasisString`] is the top wire and the most significant bit of the
//! matrix index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Amplitudes with modulus below this are treated as exact zeros and dropped.
pub const PRUNE_TOLERANCE: f64 = 1e-12;

/// Default tolerance for comparing amplitudes and probabilities.
pub const TOLERANCE: f64 = 1e-9;

pub const ZERO: Amplitude = Complex64::new(0.0, 0.0);
pub const ONE: Amplitude = Complex64::new(1.0, 0.0);

/// Componentwise amplitude distance, `max(|Δre|, |Δim|)`.
pub fn amp_distance(a: Amplitude, b: Amplitude) -> f64 {
    (a.re - b.re).abs().max((a.im - b.im).abs())
}

/// A fixed-width string of bits, leftmost bit first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisString(Vec<u8>);

impl BasisString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidBits(format!("{bits:?}")));
        }
        Ok(Self(bits))
    }

    pub fn zeros(width: usize) -> Self {
        assert!(width >= 1, "basis strings have at least one bit");
        Self(vec![0; width])
    }

    /// The string whose big-endian value is `index`.
    pub fn from_index(index: usize, width: usize) -> Self {
        assert!(width >= 1, "basis strings have at least one bit");
        assert!(width >= usize::BITS as usize || index >> width == 0, "index {index} does not fit in {width} bits");
        Self((0..width).map(|i| ((index >> (width - 1 - i)) & 1) as u8).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn prefix(&self, k: usize) -> BasisString {
        Self(self.0[..k].to_vec())
    }

    pub fn concat(&self, other: &BasisString) -> BasisString {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Self(bits)
    }

    /// Copy with `bit` inserted before position `at`.
    pub fn insert(&self, at: usize, bit: u8) -> BasisString {
        assert!(bit <= 1);
        let mut bits = self.0.clone();
        bits.insert(at, bit);
        Self(bits)
    }

    pub fn with_bit(&self, i: usize, bit: u8) -> BasisString {
        assert!(bit <= 1);
        let mut bits = self.0.clone();
        bits[i] = bit;
        Self(bits)
    }

    /// All strings of the given width in increasing index order.
    pub fn all(width: usize) -> impl Iterator<Item = BasisString> {
        (0..1usize << width).map(move |i| BasisString::from_index(i, width))
    }
}

impl FromStr for BasisString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidBits(s.to_string())),
            })
            .collect::<Result<Vec<u8>>>()?;
        if bits.is_empty() {
            return Err(Error::InvalidBits(s.to_string()));
        }
        Ok(Self(bits))
    }
}

impl fmt::Display for BasisString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BasisString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}⟩")
    }
}

impl Serialize for BasisString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BasisString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sparse state over basis strings of one width. Zero amplitudes are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: BTreeMap<BasisString, Amplitude>,
}

impl StateVector {
    pub fn basis(b: BasisString) -> Self {
        let width = b.width();
        Self { width, amps: BTreeMap::from([(b, ONE)]) }
    }

    /// Sums duplicate entries, then prunes near-zero amplitudes.
    pub fn from_entries(width: usize, entries: impl IntoIterator<Item = (BasisString, Amplitude)>) -> Result<Self> {
        let mut amps = BTreeMap::new();
        for (b, a) in entries {
            if b.width() != width {
                return Err(Error::Dimension { expected: width, found: b.width() });
            }
            *amps.entry(b).or_insert(ZERO) += a;
        }
        amps.retain(|_, a: &mut Amplitude| a.norm() >= PRUNE_TOLERANCE);
        Ok(Self { width, amps })
    }

    pub fn from_dense(width: usize, amps: &[Amplitude]) -> Result<Self> {
        if amps.len() != 1 << width {
            return Err(Error::Dimension { expected: 1 << width, found: amps.len() });
        }
        Self::from_entries(width, amps.iter().enumerate().map(|(i, &a)| (BasisString::from_index(i, width), a)))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitude(&self, b: &BasisString) -> Amplitude {
        self.amps.get(b).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisString, &Amplitude)> {
        self.amps.iter()
    }

    /// Number of basis strings with a stored (non-negligible) amplitude.
    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_dense(&self) -> Vec<Amplitude> {
        let mut out = vec![ZERO; 1 << self.width];
        for (b, &a) in &self.amps {
            out[b.index()] = a;
        }
        out
    }

    pub fn scaled(&self, factor: Amplitude) -> StateVector {
        Self::from_entries(self.width, self.amps.iter().map(|(b, &a)| (b.clone(), a * factor)))
            .expect("widths unchanged")
    }

    /// Product state with `self` on the leading bits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let entries = self.amps.iter().flat_map(|(a, &x)| other.amps.iter().map(move |(b, &y)| (a.concat(b), x * y)));
        Self::from_entries(self.width + other.width, entries).expect("widths add")
    }

    /// Largest componentwise amplitude difference over the union of supports.
    pub fn max_deviation(&self, other: &StateVector) -> f64 {
        if self.width != other.width {
            return f64::INFINITY;
        }
        self.amps
            .keys()
            .chain(other.amps.keys())
            .map(|b| amp_distance(self.amplitude(b), other.amplitude(b)))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.max_deviation(other) <= tol
    }
}

/// Dense `2^width × 2^width` matrix. Column index is the input basis string,
/// row index the output.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    width: usize,
    dim: usize,
    entries: Vec<Amplitude>,
}

impl UnitaryMatrix {
    /// Builds a matrix from row-major entries and checks `U†U = I` within
    /// [`TOLERANCE`].
    pub fn new(width: usize, entries: Vec<Amplitude>) -> Result<Self> {
        let dim = 1usize << width;
        if entries.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, found: entries.len() });
        }
        let m = Self { width, dim, entries };
        let deviation = m.unitarity_deviation();
        if deviation > TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(m)
    }

    /// Skips the unitarity check. Callers guarantee unitarity structurally
    /// (tensor products of unitaries, permutation matrices).
    pub(crate) fn from_entries_unchecked(width: usize, entries: Vec<Amplitude>) -> Self {
        let dim = 1usize << width;
        debug_assert_eq!(entries.len(), dim * dim);
        Self { width, dim, entries }
    }

    pub fn identity(width: usize) -> Self {
        let dim = 1usize << width;
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self::from_entries_unchecked(width, entries)
    }

    /// `(1/√2)·[[1, 1], [1, −1]]`
    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_entries_unchecked(1, vec![h, h, h, -h])
    }

    pub fn pauli_x() -> Self {
        Self::from_entries_unchecked(1, vec![ZERO, ONE, ONE, ZERO])
    }

    /// `H ⊗ … ⊗ H` on `width` wires, built by repeated tensoring.
    pub fn hadamard_n(width: usize) -> Self {
        assert!(width >= 1);
        let h = Self::hadamard();
        (1..width).fold(h.clone(), |acc, _| acc.tensor(&h))
    }

    /// Permutation matrix sending basis index `c` to `perm(c)`.
    pub(crate) fn permutation(width: usize, perm: impl Fn(usize) -> usize) -> Self {
        let dim = 1usize << width;
        let mut entries = vec![ZERO; dim * dim];
        let mut hit = vec![false; dim];
        for col in 0..dim {
            let row = perm(col);
            assert!(row < dim && !hit[row], "not a permutation");
            hit[row] = true;
            entries[row * dim + col] = ONE;
        }
        Self::from_entries_unchecked(width, entries)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    /// Non-negligible entries of one column as `(row, amplitude)`.
    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, Amplitude)> + '_ {
        (0..self.dim).map(move |row| (row, self.get(row, col))).filter(|(_, a)| a.norm() > PRUNE_TOLERANCE)
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|a| a.norm() > PRUNE_TOLERANCE).count()
    }

    /// Kronecker product; `self` acts on the more significant (left) bits.
    pub fn tensor(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        let width = self.width + other.width;
        let dim = self.dim * other.dim;
        let mut entries = vec![ZERO; dim * dim];
        for ar in 0..self.dim {
            for ac in 0..self.dim {
                let a = self.get(ar, ac);
                if a == ZERO {
                    continue;
                }
                for br in 0..other.dim {
                    let row = ar * other.dim + br;
                    for bc in 0..other.dim {
                        let col = ac * other.dim + bc;
                        entries[row * dim + col] = a * other.get(br, bc);
                    }
                }
            }
        }
        Self::from_entries_unchecked(width, entries)
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim != other.dim {
            return Err(Error::Dimension { expected: self.dim, found: other.dim });
        }
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(Self::from_entries_unchecked(self.width, entries))
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.get(i, j).conj();
            }
        }
        Self::from_entries_unchecked(self.width, entries)
    }

    /// `max |(U†U − I)ᵢⱼ|`
    pub fn unitarity_deviation(&self) -> f64 {
        let product = self.adjoint().matmul(self).expect("same dimension");
        product.deviation_from_identity()
    }

    pub fn deviation_from_identity(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let target = if i == j { ONE } else { ZERO };
                (self.get(i, j) - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// True when every entry is exactly 0 or 1 on the identity pattern.
    pub fn is_exact_identity(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| self.get(i, j) == if i == j { ONE } else { ZERO }))
    }

    pub fn max_entry_deviation(&self, other: &UnitaryMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries.iter().zip(&other.entries).map(|(&a, &b)| amp_distance(a, b)).fold(0.0, f64::max)
    }

    /// `U·s`, pruning entries below [`PRUNE_TOLERANCE`].
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if s.width() != self.width {
            return Err(Error::Dimension { expected: self.dim, found: 1 << s.width() });
        }
        let mut out = vec![ZERO; self.dim];
        for (b, &a) in s.iter() {
            let col = b.index();
            for (row, u) in out.iter_mut().enumerate() {
                *u += self.get(row, col) * a;
            }
        }
        StateVector::from_dense(self.width, &out)
    }
}
