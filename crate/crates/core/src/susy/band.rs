//! Real banded matrices and a symmetric band eigensolver (inertia-count
//! bisection plus inverse iteration) for the few lowest eigenpairs of large
//! grid Hamiltonians.

/// Real `n × n` matrix with `lower` sub- and `upper` super-diagonals.
/// Row-major band storage.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), 0, 0);
        m.data.copy_from_slice(d);
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    /// Translation-invariant stencil `Σ_o w_o f_{j+o}`, truncated at the
    /// edges (values outside the grid are zero).
    pub fn from_stencil(n: usize, stencil: &[(isize, f64)]) -> Self {
        let lower = stencil.iter().map(|&(o, _)| (-o).max(0) as usize).max().unwrap_or(0);
        let upper = stencil.iter().map(|&(o, _)| o.max(0) as usize).max().unwrap_or(0);
        let mut m = Self::zeros(n, lower, upper);
        for i in 0..n {
            for &(o, w) in stencil {
                let j = i as isize + o;
                if (0..n as isize).contains(&j) {
                    m.add_to(i, j as usize, w);
                }
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.lower >= i && j <= i + self.upper
    }

    /// Columns that may hold nonzeros in row `i`.
    pub fn row_columns(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.lower)..(i + self.upper + 1).min(self.n)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[i * self.width() + j + self.lower - i]
        } else {
            0.0
        }
    }

    /// Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.lower - i] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_columns(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.upper, self.lower);
        for i in 0..self.n {
            for j in self.row_columns(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Matrix product; the band widths add.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut p = Self::zeros(self.n, self.lower + other.lower, self.upper + other.upper);
        for i in 0..self.n {
            for k in self.row_columns(i) {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in other.row_columns(k) {
                    p.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        p
    }

    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n, self.lower.max(other.lower), self.upper.max(other.upper));
        for i in 0..self.n {
            for j in out.row_columns(i) {
                out.set(i, j, f(self.get(i, j), other.get(i, j)));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.n);
        let mut out = self.clone();
        for (i, v) in d.iter().enumerate() {
            out.add_to(i, i, *v);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `max |a_ij − a_ji|` over rows `rows`.
    pub fn asymmetry(&self, rows: std::ops::Range<usize>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in rows {
            for j in self.row_columns(i) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest absolute row sum (the induced ∞-norm).
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row_columns(i).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing every eigenvalue of a symmetric matrix.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let r: f64 = self.row_columns(i).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum();
            lo = lo.min(self.get(i, i) - r);
            hi = hi.max(self.get(i, i) + r);
        }
        (lo, hi)
    }
}

/// Number of eigenvalues of the symmetric band matrix `m` strictly below
/// `sigma`, from the signs of the `LDLᵀ` pivots of `m − σ` (Sylvester's law
/// of inertia).
pub fn count_below(m: &BandMatrix, sigma: f64) -> usize {
    let n = m.n();
    let b = m.lower().max(m.upper());
    let tiny = f64::EPSILON * m.inf_norm().max(1.0);
    // l[i][k] holds L[i][i - b + k]
    let mut l = vec![0.0; n * b.max(1)];
    let mut d = vec![0.0; n];
    let mut negatives = 0;
    let lidx = |i: usize, j: usize| i * b.max(1) + (j + b - i);
    for k in 0..n {
        let start = k.saturating_sub(b);
        // rows i > k need a_ik − Σ_j L_ij L_kj d_j; compute L_kj first
        let mut dk = m.get(k, k) - sigma;
        for j in start..k {
            let lkj = l[lidx(k, j)];
            dk -= lkj * lkj * d[j];
        }
        if dk.abs() < tiny {
            dk = tiny;
        }
        d[k] = dk;
        if dk < 0.0 {
            negatives += 1;
        }
        for i in (k + 1)..(k + b + 1).min(n) {
            let mut s = m.get(i, k);
            for j in i.saturating_sub(b)..k {
                s -= l[lidx(i, j)] * l[lidx(k, j)] * d[j];
            }
            l[lidx(i, k)] = s / dk;
        }
    }
    negatives
}

/// `k`-th smallest eigenvalue (0-based) of a symmetric band matrix by
/// bisection on [`count_below`], searching inside `[lo, hi]`.
pub fn eigenvalue_by_bisection(m: &BandMatrix, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(k < m.n());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(m, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// LU factorization with partial pivoting of a general band matrix, in
/// column-major band storage with room for pivoting fill.
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab() + self.kl + self.ku + i - j
    }

    fn factor(m: &BandMatrix, shift: f64) -> Self {
        let (n, kl, ku) = (m.n(), m.lower(), m.upper());
        let mut lu = Self {
            n,
            kl,
            ku,
            ab: vec![0.0; n * (2 * kl + ku + 1)],
            ipiv: vec![0; n],
        };
        for i in 0..n {
            for j in m.row_columns(i) {
                let v = m.get(i, j) - if i == j { shift } else { 0.0 };
                let at = lu.idx(i, j);
                lu.ab[at] = v;
            }
        }
        let tiny = f64::EPSILON * m.inf_norm().max(1.0);
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let p = (j..=last_row)
                .max_by(|&a, &b| lu.ab[lu.idx(a, j)].abs().total_cmp(&lu.ab[lu.idx(b, j)].abs()))
                .expect("non-empty pivot range");
            lu.ipiv[j] = p;
            let last_col = (j + ku + kl).min(n - 1);
            if p != j {
                for c in j..=last_col {
                    let (a, b) = (lu.idx(j, c), lu.idx(p, c));
                    lu.ab.swap(a, b);
                }
            }
            let pivot_at = lu.idx(j, j);
            if lu.ab[pivot_at].abs() < tiny {
                lu.ab[pivot_at] = tiny;
            }
            let pivot = lu.ab[pivot_at];
            for i in (j + 1)..=last_row {
                let li = lu.idx(i, j);
                let l = lu.ab[li] / pivot;
                lu.ab[li] = l;
                if l == 0.0 {
                    continue;
                }
                for c in (j + 1)..=last_col {
                    let (t, s) = (lu.idx(i, c), lu.idx(j, c));
                    lu.ab[t] -= l * lu.ab[s];
                }
            }
        }
        lu
    }

    #[allow(clippy::needless_range_loop)]
    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            b.swap(j, self.ipiv[j]);
            let bj = b[j];
            for i in (j + 1)..=(j + self.kl).min(n - 1) {
                b[i] -= self.ab[self.idx(i, j)] * bj;
            }
        }
        for j in (0..n).rev() {
            let mut s = b[j];
            for c in (j + 1)..=(j + self.ku + self.kl).min(n - 1) {
                s -= self.ab[self.idx(j, c)] * b[c];
            }
            b[j] = s / self.ab[self.idx(j, j)];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Unit eigenvector for an eigenvalue estimate by shifted inverse
/// iteration, kept orthogonal to `deflate` (vectors of a near-degenerate
/// cluster that were already found). The sign is fixed so the largest
/// component is positive.
pub fn inverse_iteration(m: &BandMatrix, lambda: f64, deflate: &[Vec<f64>]) -> Vec<f64> {
    let n = m.n();
    let lu = BandLu::factor(m, lambda);
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (0.7 * i as f64 + 0.3).sin()).collect();
    for _ in 0..4 {
        for q in deflate {
            let c = dot(&x, q);
            x.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        normalize(&mut x);
        lu.solve(&mut x);
    }
    for q in deflate {
        let c = dot(&x, q);
        x.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
    }
    normalize(&mut x);
    let pivot = x.iter().copied().fold(0.0, |best: f64, v| if v.abs() > best.abs() { v } else { best });
    if pivot < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    x
}

/// Lowest eigenpairs of a symmetric band matrix, computed on demand in
/// ascending order.
#[derive(Debug, Clone)]
pub struct LowestEigenpairs<'a> {
    m: &'a BandMatrix,
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl<'a> LowestEigenpairs<'a> {
    pub fn new(m: &'a BandMatrix) -> Self {
        let (lo, hi) = m.gershgorin();
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        Self {
            m,
            lo: lo - pad,
            hi: hi + pad,
            values: Vec::new(),
            vectors: Vec::new(),
        }
    }

    /// Eigenpair `k`, computing any earlier ones first.
    pub fn pair(&mut self, k: usize) -> (f64, &[f64]) {
        while self.values.len() <= k {
            let idx = self.values.len();
            let lo = self.values.last().copied().unwrap_or(self.lo);
            let value = eigenvalue_by_bisection(self.m, idx, lo.min(self.hi), self.hi);
            let cluster_tol = 1e-10 * self.m.inf_norm().max(1.0);
            let deflate: Vec<Vec<f64>> = self
                .values
                .iter()
                .zip(&self.vectors)
                .filter(|(v, _)| (value - **v).abs() <= cluster_tol)
                .map(|(_, q)| q.clone())
                .collect();
            let vector = inverse_iteration(self.m, value, &deflate);
            self.values.push(value);
            self.vectors.push(vector);
        }
        (self.values[k], &self.vectors[k])
    }

    pub fn value(&mut self, k: usize) -> f64 {
        self.pair(k).0
    }

    pub fn dim(&self) -> usize {
        self.m.n()
    }
}
