//! Gelfand-Tsetlin tableaux, shift vectors and classification.
//!
//! A tableau of size `n` is a triangular array of `N = n(n+1)/2` rational
//! entries indexed by positions `(k, i)` with `1 <= i <= k <= n`; row `n`
//! is the top row. Shift vectors are integer tableaux with zero top row
//! and act on tableaux by entrywise addition.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// A position `(row, col)` with `1 <= col <= row <= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub fn new(row: usize, col: usize, n: usize) -> Result<Self> {
        if col >= 1 && col <= row && row <= n {
            Ok(Position { row, col })
        } else {
            Err(Error::InvalidPosition { row, col, n })
        }
    }
}

/// Flat enumeration of positions: `phi(i, j)` maps position `(i, j)` of a
/// size-`n` tableau to an index in `1..=n(n+1)/2`, walking columns from the
/// right so that interlacing inequalities always compare a larger index
/// against a smaller one.
pub fn phi_index(row: usize, col: usize, n: usize) -> Result<usize> {
    Position::new(row, col, n)?;
    let nj = n - col;
    Ok((row - col + 1) + nj * (nj + 1) / 2)
}

/// A singular pair of positions `(k,i)` and `(k,j)` in the same row,
/// `1 <= i < j <= k < n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SingularPair {
    pub row: usize,
    pub i: usize,
    pub j: usize,
}

impl SingularPair {
    pub fn new(row: usize, i: usize, j: usize, n: usize) -> Result<Self> {
        if i >= 1 && i < j && j <= row && row < n {
            Ok(SingularPair { row, i, j })
        } else {
            Err(Error::InvalidSpec(format!(
                "singular pair ({row},{i},{j}) must satisfy 1 <= i < j <= k < n = {n}"
            )))
        }
    }

    /// The involution on positions that swaps `(k,i)` and `(k,j)`.
    pub fn tau_pos(&self, pos: Position) -> Position {
        if pos.row == self.row && pos.col == self.i {
            Position { row: self.row, col: self.j }
        } else if pos.row == self.row && pos.col == self.j {
            Position { row: self.row, col: self.i }
        } else {
            pos
        }
    }
}

impl Serialize for SingularPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.row, self.i, self.j].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SingularPair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [row, i, j] = <[usize; 3]>::deserialize(deserializer)?;
        if i >= 1 && i < j && j <= row {
            Ok(SingularPair { row, i, j })
        } else {
            Err(D::Error::custom(format!(
                "singular pair [{row},{i},{j}] must satisfy 1 <= i < j <= k"
            )))
        }
    }
}

/// A rational point of the tableau space.
///
/// Rows are stored bottom-up: `rows[k-1]` is row `k` and has `k` entries.
/// The JSON form lists rows top-first:
/// `{"n": 3, "rows": [["2","0","-2"],["1","1"],["1"]]}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tableau {
    n: usize,
    rows: Vec<Vec<Rat>>,
}

impl Tableau {
    /// Builds a tableau from rows listed bottom-up (`rows[k-1]` = row `k`).
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidTableau(format!(
                "tableau needs n >= 2, got n = {n}"
            )));
        }
        for (idx, row) in rows.iter().enumerate() {
            if row.len() != idx + 1 {
                return Err(Error::InvalidTableau(format!(
                    "row {} must have {} entries, got {}",
                    idx + 1,
                    idx + 1,
                    row.len()
                )));
            }
        }
        Ok(Tableau { n, rows })
    }

    /// Builds a tableau from rows listed top-first (row `n` first), the
    /// order used in JSON payloads.
    pub fn from_rows_top_first(mut rows: Vec<Vec<Rat>>) -> Result<Self> {
        rows.reverse();
        Tableau::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, pos: Position) -> &Rat {
        &self.rows[pos.row - 1][pos.col - 1]
    }

    /// Entry at `(row, col)`, 1-based.
    pub fn entry(&self, row: usize, col: usize) -> &Rat {
        &self.rows[row - 1][col - 1]
    }

    pub fn row(&self, row: usize) -> &[Rat] {
        &self.rows[row - 1]
    }

    pub(crate) fn set_entry(&mut self, row: usize, col: usize, value: Rat) {
        self.rows[row - 1][col - 1] = value;
    }

    /// Entrywise sum with a shift vector; the top row is unchanged.
    pub fn apply_shift(&self, z: &ShiftVector) -> Result<Tableau> {
        if z.n() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: z.n() });
        }
        let mut rows = self.rows.clone();
        for k in 1..self.n {
            for i in 1..=k {
                rows[k - 1][i - 1] += &Rat::from_int(z.entry(k, i));
            }
        }
        Ok(Tableau { n: self.n, rows })
    }

    /// Adds `delta` to the entry at `(row, col)`.
    pub fn bump(&self, row: usize, col: usize, delta: i64) -> Tableau {
        let mut out = self.clone();
        out.rows[row - 1][col - 1] += &Rat::from_int(delta);
        out
    }

    /// Swaps the entries of the singular pair.
    pub fn tau_apply(&self, pair: &SingularPair) -> Tableau {
        let mut out = self.clone();
        out.rows[pair.row - 1].swap(pair.i - 1, pair.j - 1);
        out
    }

    /// True iff all entries are integers.
    pub fn is_integral(&self) -> bool {
        self.rows.iter().flatten().all(|e| e.is_integer())
    }

    /// Interlacing test: `v[k][i] - v[k-1][i]` a non-negative integer and
    /// `v[k-1][i] - v[k][i+1]` a positive integer, for all `1 <= i < k <= n`.
    pub fn is_standard(&self) -> bool {
        for k in 2..=self.n {
            for i in 1..k {
                let upper_left = self.entry(k, i) - self.entry(k - 1, i);
                if !upper_left.is_nonneg_integer() {
                    return false;
                }
                let upper_right = self.entry(k - 1, i) - self.entry(k, i + 1);
                if !upper_right.is_positive_integer() {
                    return false;
                }
            }
        }
        true
    }

    pub fn classify(&self) -> Classification {
        classify(self)
    }
}

impl fmt::Debug for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows: Vec<String> = Vec::new();
        for row in self.rows.iter().rev() {
            let entries: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            rows.push(entries.join(","));
        }
        write!(f, "({})", rows.join("; "))
    }
}

impl Serialize for Tableau {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            rows: Vec<Vec<&'a Rat>>,
        }
        let rows = self
            .rows
            .iter()
            .rev()
            .map(|row| row.iter().collect())
            .collect();
        Repr { n: self.n, rows }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Tableau {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            n: usize,
            rows: Vec<Vec<Rat>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        if repr.rows.len() != repr.n {
            return Err(D::Error::custom(format!(
                "expected {} rows, got {}",
                repr.n,
                repr.rows.len()
            )));
        }
        let t = Tableau::from_rows_top_first(repr.rows)
            .map_err(|e| D::Error::custom(e.to_string()))?;
        Ok(t)
    }
}

/// An integer shift with zero top row.
///
/// Rows `1..=n-1` are stored bottom-up; row `n` is implicitly zero. The
/// JSON form lists rows top-first (row `n-1` first) with the top row
/// omitted: `{"n": 3, "rows": [["1","0"],["0"]]}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShiftVector {
    n: usize,
    rows: Vec<Vec<i64>>,
}

impl ShiftVector {
    pub fn zero(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidTableau(format!(
                "shift vector needs n >= 2, got n = {n}"
            )));
        }
        let rows = (1..n).map(|k| vec![0; k]).collect();
        Ok(ShiftVector { n, rows })
    }

    /// Builds a shift from rows `1..=n-1` listed bottom-up.
    pub fn from_rows(n: usize, rows: Vec<Vec<i64>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidTableau(format!(
                "shift vector needs n >= 2, got n = {n}"
            )));
        }
        if rows.len() != n - 1 {
            return Err(Error::InvalidTableau(format!(
                "shift vector for n={} must have {} rows, got {}",
                n,
                n - 1,
                rows.len()
            )));
        }
        for (idx, row) in rows.iter().enumerate() {
            if row.len() != idx + 1 {
                return Err(Error::InvalidTableau(format!(
                    "shift row {} must have {} entries, got {}",
                    idx + 1,
                    idx + 1,
                    row.len()
                )));
            }
        }
        Ok(ShiftVector { n, rows })
    }

    /// The delta shift with a single 1 at `(row, col)`; `row < n` so the
    /// top row stays zero.
    pub fn delta(n: usize, row: usize, col: usize) -> Result<Self> {
        if row >= n {
            return Err(Error::InvalidPosition { row, col, n });
        }
        Position::new(row, col, n)?;
        let mut z = ShiftVector::zero(n)?;
        z.rows[row - 1][col - 1] = 1;
        Ok(z)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at `(row, col)`, 1-based; row `n` reads as zero.
    pub fn entry(&self, row: usize, col: usize) -> i64 {
        if row == self.n {
            0
        } else {
            self.rows[row - 1][col - 1]
        }
    }

    pub(crate) fn set_entry(&mut self, row: usize, col: usize, value: i64) {
        self.rows[row - 1][col - 1] = value;
    }

    /// Adds `delta` to the entry at `(row, col)`.
    pub fn bump(&self, row: usize, col: usize, delta: i64) -> ShiftVector {
        let mut out = self.clone();
        out.rows[row - 1][col - 1] += delta;
        out
    }

    pub fn add(&self, other: &ShiftVector) -> Result<ShiftVector> {
        if other.n != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: other.n });
        }
        let mut out = self.clone();
        for (a, b) in out.rows.iter_mut().zip(other.rows.iter()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += y;
            }
        }
        Ok(out)
    }

    pub fn negate(&self) -> ShiftVector {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|x| -x).collect())
            .collect();
        ShiftVector { n: self.n, rows }
    }

    /// Sum of absolute values of the entries.
    pub fn norm1(&self) -> i64 {
        self.rows.iter().flatten().map(|x| x.abs()).sum()
    }

    /// Swaps the entries of the singular pair.
    pub fn tau_apply(&self, pair: &SingularPair) -> ShiftVector {
        let mut out = self.clone();
        out.rows[pair.row - 1].swap(pair.i - 1, pair.j - 1);
        out
    }

    /// True iff the shift is fixed by the pair involution.
    pub fn is_tau_fixed(&self, pair: &SingularPair) -> bool {
        self.entry(pair.row, pair.i) == self.entry(pair.row, pair.j)
    }
}

impl fmt::Debug for ShiftVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows: Vec<String> = Vec::new();
        for row in self.rows.iter().rev() {
            let entries: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            rows.push(entries.join(","));
        }
        write!(f, "[{}]", rows.join("; "))
    }
}

impl Serialize for ShiftVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            n: usize,
            rows: Vec<Vec<String>>,
        }
        let rows = self
            .rows
            .iter()
            .rev()
            .map(|row| row.iter().map(|x| x.to_string()).collect())
            .collect();
        Repr { n: self.n, rows }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ShiftVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            n: usize,
            rows: Vec<Vec<String>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut rows = Vec::with_capacity(repr.rows.len());
        for row in repr.rows.into_iter().rev() {
            let mut parsed = Vec::with_capacity(row.len());
            for s in row {
                let x: i64 = s
                    .parse()
                    .map_err(|_| D::Error::custom(format!("invalid integer `{s}`")))?;
                parsed.push(x);
            }
            rows.push(parsed);
        }
        ShiftVector::from_rows(repr.n, rows).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// The taxonomy of a tableau. Generic/singular/critical pairs are only
/// examined in rows `k < n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub integral: bool,
    pub standard: bool,
    pub generic: bool,
    pub singular_pairs: Vec<SingularPair>,
    pub critical_pairs: Vec<SingularPair>,
    pub is_1_singular: bool,
    pub is_1_critical: bool,
}

/// Classifies a tableau: integrality, standardness (interlacing), and the
/// singular/critical pairs of rows below the top.
pub fn classify(v: &Tableau) -> Classification {
    let n = v.n();
    let mut singular_pairs = Vec::new();
    let mut critical_pairs = Vec::new();
    for k in 1..n {
        for i in 1..=k {
            for j in (i + 1)..=k {
                let diff = v.entry(k, i) - v.entry(k, j);
                if diff.is_integer() {
                    let pair = SingularPair { row: k, i, j };
                    singular_pairs.push(pair);
                    if diff.is_zero() {
                        critical_pairs.push(pair);
                    }
                }
            }
        }
    }
    Classification {
        integral: v.is_integral(),
        standard: v.is_standard(),
        generic: singular_pairs.is_empty(),
        is_1_singular: singular_pairs.len() == 1,
        is_1_critical: critical_pairs.len() == 1 && singular_pairs.len() == 1,
        singular_pairs,
        critical_pairs,
    }
}
