//! Dense integer and rational matrices with exact arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    /// Panics if `entries.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, entries: Vec<Int>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        IntMatrix { rows, cols, entries }
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.as_ref().len(), c, "ragged rows");
            entries.extend(row.as_ref().iter().map(|&x| Int::from(x)));
        }
        IntMatrix { rows: r, cols: c, entries }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Int>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn diagonal(rows: usize, cols: usize, diag: &[Int]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Int] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> Vec<Int> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn column_vectors(&self) -> Vec<Vec<Int>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Int::zero();
                for (k, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc += &self[(i, k)] * x;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &Int) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|a| a * c).collect() }
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        IntMatrix { rows: self.rows + other.rows, cols: self.cols, entries }
    }

    pub fn block_diag(&self, other: &IntMatrix) -> IntMatrix {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// Rows `r0..r1` and columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> IntMatrix {
        let mut out = Self::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out[(i - r0, j - c0)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn max_abs(&self) -> Int {
        self.entries.iter().map(|x| x.abs()).max().unwrap_or_else(Int::zero)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(p) => {
                        a.swap_rows(k, p);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += c * row[source]
    pub fn add_row_multiple(&mut self, target: usize, source: usize, c: &Int) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self[(source, j)] * c;
            self[(target, j)] += v;
        }
    }

    /// col[target] += c * col[source]
    pub fn add_col_multiple(&mut self, target: usize, source: usize, c: &Int) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self[(i, source)] * c;
            self[(i, target)] += v;
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix::from_vec(self.rows, self.cols, self.entries.iter().map(|x| Rat::from_integer(x.clone())).collect())
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Integers serialize as JSON numbers while they fit in an i64 and as
/// decimal strings beyond that.
pub(crate) mod int_repr {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(crate) enum IntRepr {
        Small(i64),
        Big(String),
    }

    impl From<&Int> for IntRepr {
        fn from(x: &Int) -> Self {
            match x.to_i64() {
                Some(v) => IntRepr::Small(v),
                None => IntRepr::Big(x.to_string()),
            }
        }
    }

    impl IntRepr {
        pub(crate) fn into_int<E: serde::de::Error>(self) -> Result<Int, E> {
            match self {
                IntRepr::Small(v) => Ok(Int::from(v)),
                IntRepr::Big(s) => s.parse::<Int>().map_err(|_| E::custom(format!("invalid integer {s:?}"))),
            }
        }
    }

    pub(crate) fn serialize_vec<S: Serializer>(v: &[Int], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<IntRepr> = v.iter().map(IntRepr::from).collect();
        reprs.serialize(s)
    }

    pub(crate) fn deserialize_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Int>, D::Error> {
        let reprs = Vec::<IntRepr>::deserialize(d)?;
        reprs.into_iter().map(IntRepr::into_int).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntMatrixWire {
    rows: usize,
    cols: usize,
    #[serde(serialize_with = "int_repr::serialize_vec", deserialize_with = "int_repr::deserialize_vec")]
    entries: Vec<Int>,
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IntMatrixWire { rows: self.rows, cols: self.cols, entries: self.entries.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = IntMatrixWire::deserialize(d)?;
        if w.entries.len() != w.rows * w.cols {
            return Err(D::Error::custom(format!(
                "matrix declares {}x{} but has {} entries",
                w.rows,
                w.cols,
                w.entries.len()
            )));
        }
        Ok(IntMatrix { rows: w.rows, cols: w.cols, entries: w.entries })
    }
}

/// Row-major matrix of exact rationals. Used for dimension maps and rotation data.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, entries: vec![Rat::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, entries: Vec<Rat>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        RatMatrix { rows, cols, entries }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Rat>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn mul_int(&self, other: &IntMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows(), "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols() {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * Rat::from_integer(b.clone());
                    }
                }
            }
        }
        out
    }

    pub fn mul_int_vec(&self, v: &[Int]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for (k, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc += &self[(i, k)] * Rat::from_integer(x.clone());
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        RatMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        RatMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn neg(&self) -> RatMatrix {
        RatMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|a| -a).collect() }
    }

    pub fn hstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn submatrix_cols(&self, c0: usize, c1: usize) -> RatMatrix {
        let mut out = Self::zeros(self.rows, c1 - c0);
        for i in 0..self.rows {
            for j in c0..c1 {
                out[(i, j - c0)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Unique solution of a square system by Gaussian elimination, `None` if singular.
    pub fn solve_square(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, self.cols, "solve_square needs a square matrix");
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        for k in 0..n {
            let p = (k..n).find(|&i| !a[(i, k)].is_zero())?;
            if p != k {
                for j in 0..n {
                    a.entries.swap(k * n + j, p * n + j);
                }
                rhs.swap(k, p);
            }
            let piv = a[(k, k)].clone();
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let f = &a[(i, k)] / &piv;
                for j in k..n {
                    let v = &f * &a[(k, j)];
                    a[(i, j)] -= v;
                }
                let v = &f * &rhs[k];
                rhs[i] -= v;
            }
        }
        let mut x = vec![Rat::zero(); n];
        for k in (0..n).rev() {
            let mut acc = rhs[k].clone();
            for j in k + 1..n {
                acc -= &a[(k, j)] * &x[j];
            }
            x[k] = acc / &a[(k, k)];
        }
        Some(x)
    }

    /// Least common multiple of all denominators.
    pub fn common_denominator(&self) -> Int {
        self.entries.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// `(N, d)` with `self = N / d` and `N` integral.
    pub fn clear_denominators(&self) -> (IntMatrix, Int) {
        let d = self.common_denominator();
        let entries = self.entries.iter().map(|x| (x * Rat::from_integer(d.clone())).to_integer()).collect();
        (IntMatrix::from_vec(self.rows, self.cols, entries), d)
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Rationals serialize as `"p/q"` strings (or plain integers).
/// Parses `"p/q"`, an integer, or an exact decimal literal such as `-1.25e-3`.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    rat_repr::parse(s)
}

/// `"p/q"`, or just `"p"` for integers.
pub fn format_rat(x: &Rat) -> String {
    rat_repr::to_string(x)
}

pub(crate) mod rat_repr {
    use super::*;

    pub(crate) fn to_string(x: &Rat) -> String {
        if x.is_integer() {
            x.numer().to_string()
        } else {
            format!("{}/{}", x.numer(), x.denom())
        }
    }

    pub(crate) fn parse(s: &str) -> Result<Rat, String> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: Int = n.trim().parse().map_err(|_| format!("invalid rational {s:?}"))?;
            let d: Int = d.trim().parse().map_err(|_| format!("invalid rational {s:?}"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            return Ok(Rat::new(n, d));
        }
        parse_decimal(s)
    }

    /// Exact value of a decimal literal such as `-1.25e-3`.
    pub(crate) fn parse_decimal(s: &str) -> Result<Rat, String> {
        let err = || format!("invalid decimal {s:?}");
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| err())?),
            None => (s, 0),
        };
        let (neg, mantissa) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let n: Int = digits.parse().map_err(|_| err())?;
        let scale = exp - frac_part.len() as i32;
        let ten = Int::from(10);
        let mut r = if scale >= 0 {
            Rat::from_integer(n * num_traits::pow(ten, scale as usize))
        } else {
            Rat::new(n, num_traits::pow(ten, (-scale) as usize))
        };
        if neg {
            r = -r;
        }
        Ok(r)
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum RatWire {
        Int(i64),
        Str(String),
    }

    pub(crate) fn serialize<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
        to_string(x).serialize(s)
    }

    pub(crate) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        match RatWire::deserialize(d)? {
            RatWire::Int(v) => Ok(Rat::from_integer(Int::from(v))),
            RatWire::Str(s) => parse(&s).map_err(D::Error::custom),
        }
    }

    pub(crate) fn serialize_vec<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(to_string).collect();
        strs.serialize(s)
    }

    pub(crate) fn deserialize_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let wires = Vec::<RatWire>::deserialize(d)?;
        wires
            .into_iter()
            .map(|w| match w {
                RatWire::Int(v) => Ok(Rat::from_integer(Int::from(v))),
                RatWire::Str(s) => parse(&s).map_err(D::Error::custom),
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatMatrixWire {
    rows: usize,
    cols: usize,
    #[serde(serialize_with = "rat_repr::serialize_vec", deserialize_with = "rat_repr::deserialize_vec")]
    entries: Vec<Rat>,
}

impl Serialize for RatMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RatMatrixWire { rows: self.rows, cols: self.cols, entries: self.entries.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = RatMatrixWire::deserialize(d)?;
        if w.entries.len() != w.rows * w.cols {
            return Err(D::Error::custom("rational matrix entry count does not match shape"));
        }
        Ok(RatMatrix { rows: w.rows, cols: w.cols, entries: w.entries })
    }
}

pub fn int(x: i64) -> Int {
    Int::from(x)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn ints(xs: &[i64]) -> Vec<Int> {
    xs.iter().map(|&x| Int::from(x)).collect()
}

pub fn is_zero_vec(v: &[Int]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Nearest integer, ties rounded away from zero.
pub fn round_rat(x: &Rat) -> Int {
    x.round().to_integer()
}

pub fn abs_rat(x: &Rat) -> Rat {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = IntMatrix::from_rows(&[[2, -1, 0], [1, 3, 4], [0, 5, -2]]);
        // 2*(3*-2 - 4*5) - (-1)*(1*-2 - 0) + 0
        assert_eq!(m.determinant(), int(2 * (-6 - 20) - 2));
        assert_eq!(IntMatrix::identity(4).determinant(), int(1));
        assert_eq!(IntMatrix::from_rows(&[[0, 1], [1, 0]]).determinant(), int(-1));
    }

    #[test]
    fn json_round_trip_keeps_big_entries() {
        let mut m = IntMatrix::from_rows(&[[1, 2], [3, 4]]);
        m[(0, 0)] = "123456789012345678901234567890".parse().unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"123456789012345678901234567890\""));
        let back: IntMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_bad_shape_and_unknown_fields() {
        assert!(serde_json::from_str::<IntMatrix>(r#"{"rows":2,"cols":2,"entries":[1,2,3]}"#).is_err());
        assert!(serde_json::from_str::<IntMatrix>(r#"{"rows":1,"cols":1,"entries":[1],"x":0}"#).is_err());
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(rat_repr::parse("0.25").unwrap(), rat(1, 4));
        assert_eq!(rat_repr::parse("-1.5e-1").unwrap(), rat(-3, 20));
        assert_eq!(rat_repr::parse("3/6").unwrap(), rat(1, 2));
        assert!(rat_repr::parse("1/0").is_err());
        assert!(rat_repr::parse("abc").is_err());
    }
}
