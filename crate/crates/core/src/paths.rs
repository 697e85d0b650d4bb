//! The exponent set `A_n` of the product expansion
//! `S_n = x_1 (x_1 + x_2)(x_2 + x_3) ... (x_{n-1} + x_n)`, its lattice-path
//! picture, and the "move a diagonal point down" operation.
//!
//! A path starts at `(1, 1)`. Exponent `a_k` (for `k < n`) is a step one unit
//! right and `2 - a_k` units up, so the height at column `k` is
//! `h_k = 2k - 1 - (a_1 + ... + a_{k-1})`. Paths stay between the diagonal and
//! the diagonal shifted one unit down, and `a_k` equals the number of path
//! points lying on the horizontal line `y = k`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

/// Largest `n` accepted by the enumerators (`2^{n-1}` vectors).
pub const MAX_ENUMERATION_N: usize = 24;
/// Largest `n` accepted by [`expand_and_verify_identity`].
pub const MAX_IDENTITY_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("n = {n} outside the supported range 1..={max}")]
    Size { n: usize, max: usize },
    #[error("exponent vector violates {clause}")]
    InvalidExponents { clause: String },
    #[error("lattice path violates {clause}")]
    InvalidPath { clause: String },
    #[error("cannot move point ({col}, {col}) down: the path does not touch the diagonal there")]
    IllegalMove { col: usize },
    #[error("input {index} is not strictly positive")]
    NonPositive { index: usize },
}

/// An element of `A_n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<u8>);

impl fmt::Debug for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExponentVector({self})")
    }
}

/// Digit string, e.g. `2110`.
impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl ExponentVector {
    /// Validates every membership clause of `A_n`.
    pub fn new(a: Vec<u8>) -> Result<Self, PathError> {
        validate_exponents(&a)?;
        Ok(Self(a))
    }

    pub(crate) fn new_unchecked(a: Vec<u8>) -> Self {
        debug_assert!(validate_exponents(&a).is_ok(), "{a:?}");
        Self(a)
    }

    /// The diagonal path `(1, ..., 1)`.
    pub fn all_ones(n: usize) -> Result<Self, PathError> {
        check_size(n, MAX_ENUMERATION_N.max(64))?;
        Ok(Self(vec![1; n]))
    }

    /// The bottom path `(2, 1, ..., 1, 0)` (or `(1)` when `n = 1`).
    pub fn bottom(n: usize) -> Result<Self, PathError> {
        check_size(n, MAX_ENUMERATION_N.max(64))?;
        if n == 1 {
            return Ok(Self(vec![1]));
        }
        let mut a = vec![1; n];
        a[0] = 2;
        a[n - 1] = 0;
        Ok(Self(a))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }
}

fn check_size(n: usize, max: usize) -> Result<(), PathError> {
    if n == 0 || n > max {
        Err(PathError::Size { n, max })
    } else {
        Ok(())
    }
}

fn bad(clause: impl Into<String>) -> PathError {
    PathError::InvalidExponents { clause: clause.into() }
}

fn validate_exponents(a: &[u8]) -> Result<(), PathError> {
    let n = a.len();
    if n == 0 {
        return Err(bad("n >= 1"));
    }
    if n == 1 {
        return if a[0] == 1 { Ok(()) } else { Err(bad("A_1 = {(1)}")) };
    }
    if !(1..=2).contains(&a[0]) {
        return Err(bad(format!("a_1 in {{1,2}} (a_1 = {})", a[0])));
    }
    if a[n - 1] > 1 {
        return Err(bad(format!("a_n in {{0,1}} (a_{n} = {})", a[n - 1])));
    }
    for (j, &x) in a.iter().enumerate().take(n - 1).skip(1) {
        if x > 2 {
            return Err(bad(format!("a_j in {{0,1,2}} for 1 < j < n (a_{} = {x})", j + 1)));
        }
    }
    let mut partial = 0usize;
    for (i, &x) in a.iter().enumerate().take(n - 1) {
        partial += x as usize;
        let i1 = i + 1;
        if partial != i1 && partial != i1 + 1 {
            return Err(bad(format!(
                "partial sum a_1 + ... + a_{i1} in {{{i1}, {}}} (got {partial})",
                i1 + 1
            )));
        }
    }
    let total: usize = a.iter().map(|&x| x as usize).sum();
    if total != n {
        return Err(bad(format!("a_1 + ... + a_n = n (got {total}, n = {n})")));
    }
    for i in 1..n.saturating_sub(2) {
        let s = a[i] + a[i + 1];
        if !(1..=3).contains(&s) {
            return Err(bad(format!("a_i + a_(i+1) in {{1,2,3}} at i = {} (got {s})", i + 1)));
        }
    }
    let head = a[0] + a[1];
    if !(2..=3).contains(&head) {
        return Err(bad(format!("a_1 + a_2 in {{2,3}} (got {head})")));
    }
    let tail = a[n - 2] + a[n - 1];
    if !(1..=2).contains(&tail) {
        return Err(bad(format!("a_(n-1) + a_n in {{1,2}} (got {tail})")));
    }
    Ok(())
}

/// Heights `h_1, ..., h_n` of a lattice path from `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePath(Vec<usize>);

impl LatticePath {
    pub fn new(heights: Vec<usize>) -> Result<Self, PathError> {
        let n = heights.len();
        let err = |clause: String| Err(PathError::InvalidPath { clause });
        if n == 0 {
            return err("n >= 1".into());
        }
        if heights[0] != 1 {
            return err(format!("h_1 = 1 (got {})", heights[0]));
        }
        for (i, &h) in heights.iter().enumerate().skip(1) {
            let k = i + 1;
            if h != k && h + 1 != k {
                return err(format!("h_{k} in {{{}, {k}}} (got {h})", k - 1));
            }
            let step = h as isize - heights[i - 1] as isize;
            if !(0..=2).contains(&step) {
                return err(format!("h_{k} - h_{} in {{0,1,2}} (got {step})", k - 1));
            }
        }
        Ok(Self(heights))
    }

    pub fn heights(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }
}

/// Maps `a` to its path using the step rule: exponent `e` moves `2 - e` up.
pub fn path_of(a: &ExponentVector) -> LatticePath {
    let mut h = Vec::with_capacity(a.n());
    let mut y = 1usize;
    h.push(y);
    for &e in &a.0[..a.n() - 1] {
        y = y + 2 - e as usize;
        h.push(y);
    }
    LatticePath(h)
}

/// Inverse of [`path_of`], by counting the path points on each line `y = k`.
pub fn exponent_of(path: &LatticePath) -> Result<ExponentVector, PathError> {
    let h = &path.0;
    let n = h.len();
    let a = (1..=n)
        .map(|k| {
            let on_diag = (h[k - 1] == k) as u8;
            let below = (k < n && h[k] == k) as u8;
            on_diag + below
        })
        .collect();
    ExponentVector::new(a)
}

/// Indices `i` (1-based, `1 <= i <= n - 1`) such that the path passes through
/// the diagonal point `(i + 1, i + 1)`; exactly the legal arguments of
/// [`move_down`].
pub fn diagonal_touch_points(a: &ExponentVector) -> Vec<usize> {
    let h = path_of(a);
    (1..a.n()).filter(|&i| h.0[i] == i + 1).collect()
}

/// Moves the diagonal point `(i + 1, i + 1)` one unit down: `a_i += 1`,
/// `a_{i+1} -= 1`. Covers the endpoint `i + 1 = n` by the same rule.
pub fn move_down(a: &ExponentVector, i: usize) -> Result<ExponentVector, PathError> {
    let n = a.n();
    if i == 0 || i >= n || path_of(a).0[i] != i + 1 {
        return Err(PathError::IllegalMove { col: i + 1 });
    }
    let mut b = a.0.clone();
    b[i - 1] += 1;
    b[i] -= 1;
    ExponentVector::new(b)
}

/// Depth-first walk over `A_n` following the inductive construction
/// `A_{m+1} = {(a_1..a_{m-1}, a_m + 1, 0)} ∪ {(a_1..a_m, 1)}`.
///
/// Vectors are visited in descending lexicographic order, the order of the
/// `n = 4` picture (`2110, 2101, 2020, ..., 1111`).
pub fn for_each_exponent_vector<F: FnMut(&[u8])>(n: usize, mut visit: F) -> Result<(), PathError> {
    check_size(n, MAX_ENUMERATION_N)?;
    fn extend<F: FnMut(&[u8])>(buf: &mut Vec<u8>, n: usize, visit: &mut F) {
        if buf.len() == n {
            visit(buf);
            return;
        }
        let last = buf.len() - 1;
        buf[last] += 1;
        buf.push(0);
        extend(buf, n, visit);
        buf.pop();
        buf[last] -= 1;
        buf.push(1);
        extend(buf, n, visit);
        buf.pop();
    }
    let mut buf = Vec::with_capacity(n);
    buf.push(1);
    extend(&mut buf, n, &mut visit);
    Ok(())
}

/// The full set `A_n`, descending lexicographic. `A_1 = {(1)}`.
pub fn enumerate_exponent_vectors(n: usize) -> Result<Vec<ExponentVector>, PathError> {
    let mut out = Vec::with_capacity(1usize << (n.clamp(1, MAX_ENUMERATION_N) - 1));
    for_each_exponent_vector(n, |a| out.push(ExponentVector::new_unchecked(a.to_vec())))?;
    Ok(out)
}

/// Breadth-first closure of `{(1, ..., 1)}` under [`move_down`].
pub fn reachable_by_moves(n: usize) -> Result<HashSet<ExponentVector>, PathError> {
    check_size(n, MAX_ENUMERATION_N)?;
    let start = ExponentVector::all_ones(n)?;
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(a) = queue.pop_front() {
        for i in diagonal_touch_points(&a) {
            let b = move_down(&a, i)?;
            if seen.insert(b.clone()) {
                queue.push_back(b);
            }
        }
    }
    Ok(seen)
}

/// Evaluates both sides of `S_n = Σ_{a ∈ A_n} Π x_j^{a_j}`.
///
/// Generic over any exact field (`BigRational` in practice); the right-hand
/// side reuses prefix products between consecutive vectors of the
/// enumeration, so the cost is about two multiplications per vector.
pub fn expand_and_verify_identity<T>(xs: &[T]) -> Result<(T, T), PathError>
where
    T: Clone + Zero + One + PartialOrd,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T> + std::ops::Add<&'a T, Output = T>,
{
    let n = xs.len();
    if !(2..=MAX_IDENTITY_N).contains(&n) {
        return Err(PathError::Size { n, max: MAX_IDENTITY_N });
    }
    if let Some(index) = xs.iter().position(|x| !(*x > T::zero())) {
        return Err(PathError::NonPositive { index });
    }
    let mut lhs = xs[0].clone();
    for k in 1..n {
        lhs = &lhs * &(&xs[k] + &xs[k - 1]);
    }

    let squares: Vec<T> = xs.iter().map(|x| x * x).collect();
    let power = |j: usize, e: u8| -> T {
        match e {
            0 => T::one(),
            1 => xs[j].clone(),
            _ => squares[j].clone(),
        }
    };
    // prefix[j] = Π_{i<j} x_i^{a_i} for the previously visited vector
    let mut prefix: Vec<T> = vec![T::one(); n + 1];
    let mut previous: Vec<u8> = Vec::new();
    let mut rhs = T::zero();
    for_each_exponent_vector(n, |a| {
        let common = previous.iter().zip(a).take_while(|(p, q)| p == q).count();
        for j in common..n {
            prefix[j + 1] = &prefix[j] * &power(j, a[j]);
        }
        rhs = &rhs + &prefix[n];
        previous.clear();
        previous.extend_from_slice(a);
    })?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn ev(s: &str) -> ExponentVector {
        ExponentVector::new(s.bytes().map(|b| b - b'0').collect()).unwrap()
    }

    #[test]
    fn small_sets() {
        assert_eq!(enumerate_exponent_vectors(1).unwrap(), vec![ev("1")]);
        assert_eq!(enumerate_exponent_vectors(2).unwrap(), vec![ev("20"), ev("11")]);
        let four: Vec<String> =
            enumerate_exponent_vectors(4).unwrap().iter().map(|a| a.to_string()).collect();
        assert_eq!(four, ["2110", "2101", "2020", "2011", "1210", "1201", "1120", "1111"]);
        assert_eq!(enumerate_exponent_vectors(10).unwrap().len(), 512);
    }

    #[test]
    fn size_errors() {
        assert!(matches!(enumerate_exponent_vectors(0), Err(PathError::Size { .. })));
        assert!(matches!(enumerate_exponent_vectors(25), Err(PathError::Size { .. })));
    }

    #[test]
    fn validation_names_the_clause() {
        let err = ExponentVector::new(vec![0, 2, 1, 1]).unwrap_err().to_string();
        assert!(err.contains("a_1 in {1,2}"), "{err}");
        let err = ExponentVector::new(vec![2, 1, 0, 2]).unwrap_err().to_string();
        assert!(err.contains("a_n in {0,1}"), "{err}");
        let err = ExponentVector::new(vec![1, 0, 2, 1]).unwrap_err().to_string();
        assert!(err.contains("partial sum"), "{err}");
        let err = ExponentVector::new(vec![1, 1, 1]).map(|_| ()).and(ExponentVector::new(vec![1, 1, 2]));
        assert!(err.is_err());
    }

    #[test]
    fn paths_and_exponents() {
        assert_eq!(path_of(&ev("1111")).heights(), &[1, 2, 3, 4]);
        assert_eq!(path_of(&ev("2110")).heights(), &[1, 1, 2, 3]);
        assert_eq!(exponent_of(&LatticePath::new(vec![1, 1, 3, 4]).unwrap()).unwrap(), ev("2011"));
        assert!(LatticePath::new(vec![1, 3, 3]).is_err());
        assert!(LatticePath::new(vec![2, 2]).is_err());
        for a in enumerate_exponent_vectors(8).unwrap() {
            assert_eq!(exponent_of(&path_of(&a)).unwrap(), a);
        }
    }

    #[test]
    fn touch_points_and_moves() {
        assert_eq!(diagonal_touch_points(&ev("1111")), vec![1, 2, 3]);
        assert!(diagonal_touch_points(&ev("2110")).is_empty());
        assert!(diagonal_touch_points(&ExponentVector::bottom(9).unwrap()).is_empty());
        assert_eq!(diagonal_touch_points(&ev("2011")), vec![2, 3]);
        assert_eq!(move_down(&ev("1111"), 1).unwrap(), ev("2011"));
        assert_eq!(move_down(&ev("1111"), 3).unwrap(), ev("1120"));
        assert!(matches!(move_down(&ev("2110"), 1), Err(PathError::IllegalMove { .. })));
        assert!(move_down(&ev("1111"), 0).is_err());
        assert!(move_down(&ev("1111"), 4).is_err());
    }

    #[test]
    fn move_changes_adjacent_sums_as_expected() {
        for n in 3..=9 {
            for a in enumerate_exponent_vectors(n).unwrap() {
                for i in diagonal_touch_points(&a) {
                    let b = move_down(&a, i).unwrap();
                    for k in 1..n {
                        let before = a.as_slice()[k - 1] as i32 + a.as_slice()[k] as i32;
                        let after = b.as_slice()[k - 1] as i32 + b.as_slice()[k] as i32;
                        let want = if k + 1 == i {
                            1
                        } else if k == i + 1 {
                            -1
                        } else {
                            0
                        };
                        assert_eq!(after - before, want, "a={a} i={i} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn identity_small_cases() {
        let q = |n: i64| BigRational::from_integer(BigInt::from(n));
        let (l, r) = expand_and_verify_identity(&[q(1), q(1)]).unwrap();
        assert_eq!((l.clone(), r), (q(2), q(2)));
        let (l, r) = expand_and_verify_identity(&[q(1), q(2), q(3), q(4)]).unwrap();
        assert_eq!(l, q(105));
        assert_eq!(r, q(105));
        assert!(matches!(
            expand_and_verify_identity(&[q(1), q(0), q(2)]),
            Err(PathError::NonPositive { index: 1 })
        ));
        assert!(expand_and_verify_identity(&[q(1)]).is_err());
    }
}
