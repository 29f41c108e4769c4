//! Dimension tables, growth exponents, explicit linear bounds, the cyclic
//! filtration lemma, `Z_p`-cohomology and product multiplicativity.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{span_dim, FpMatrix};
use crate::tree::{
    bar_r_invariants, containment_check, invariant_dims, level_dim, required_truncation, PiTruncation,
};
use crate::weights::{invariants, InducedRep, KRep, SymRep, VerifyOptions, Weight};
use crate::zq::{double_coset_count, double_coset_formula, ipow, Family, SubgroupSpec};

/// Largest quotient dimension accepted for invariant tables.
pub const QUOTIENT_DIM_CAP: usize = 2500;
/// Largest Kronecker dimension accepted by [`product_invariants`].
pub const KRON_DIM_CAP: usize = 10_000;

/// Which dimension a growth table records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableFamily {
    /// `dim Ind_{K_0(p^n)}^K σ_n`.
    Ind,
    /// `dim R̄_n`.
    BarR,
    /// `dim π(r, λ, ω^a)^{Γ_n}`.
    Invariants,
    /// `dim (R̄_n)^Γ`.
    BarRInvariants,
    /// `|K_0(p^n) \ K / K_0(p^n)|`.
    Cosets,
}

impl TableFamily {
    pub const ALL: [TableFamily; 5] = [
        TableFamily::Ind,
        TableFamily::BarR,
        TableFamily::Invariants,
        TableFamily::BarRInvariants,
        TableFamily::Cosets,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableFamily::Ind => "ind",
            TableFamily::BarR => "barR",
            TableFamily::Invariants => "invariants",
            TableFamily::BarRInvariants => "barR-invariants",
            TableFamily::Cosets => "cosets",
        }
    }
}

impl fmt::Display for TableFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.to_ascii_lowercase();
        let fam = match t.as_str() {
            "ind" | "ind-dims" => TableFamily::Ind,
            "barr" | "bar-r" => TableFamily::BarR,
            "invariants" | "ps-invariants" | "ss-invariants" => TableFamily::Invariants,
            "barr-invariants" | "bar-r-invariants" => TableFamily::BarRInvariants,
            "cosets" | "double-cosets" => TableFamily::Cosets,
            _ => return Err(Error::MalformedInput(format!("unknown table family '{s}'"))),
        };
        Ok(fam)
    }
}

/// Parameters of one table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableParams {
    pub p: u32,
    pub r: u32,
    pub lambda: u32,
    pub a: u32,
    pub subgroup: Family,
    /// Truncation override; defaults to `n + 1`.
    pub m: Option<u32>,
    /// Precision override; defaults to `m + 3`.
    pub precision: Option<u32>,
    /// Re-run each invariant cell at `m + 1` and `N + 1`.
    pub stability: bool,
    pub seed: u64,
}

impl TableParams {
    pub fn new(p: u32, r: u32, lambda: u32) -> Self {
        TableParams {
            p,
            r,
            lambda,
            a: 0,
            subgroup: Family::Kn,
            m: None,
            precision: None,
            stability: false,
            seed: VerifyOptions::default().seed,
        }
    }

    pub fn weight(&self) -> Result<Weight> {
        Weight::new(self.p, self.r, self.a as i64)
    }

    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            seed: self.seed,
            ..VerifyOptions::default()
        }
    }

    /// Reducible parameters, for which the principal-series count is not asserted.
    pub fn is_degenerate(&self) -> bool {
        let edge_r = self.r == 0 || self.r == self.p - 1;
        let unit_lambda = self.lambda == 1 || self.lambda == self.p - 1;
        edge_r && unit_lambda
    }
}

/// A pass/fail verdict with the compared values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, expected: impl fmt::Display, actual: impl fmt::Display, pass: bool) -> Self {
        Check {
            name: name.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            pass,
        }
    }

    pub fn equal<T: fmt::Display + PartialEq>(name: impl Into<String>, expected: T, actual: T) -> Self {
        let pass = expected == actual;
        Self::new(name, expected, actual, pass)
    }
}

/// `log_p` of a ratio of consecutive dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    /// The ratio is exactly `p^k`.
    Exact(i64),
    Approx(f64),
}

impl Exponent {
    pub fn value(&self) -> f64 {
        match *self {
            Exponent::Exact(k) => k as f64,
            Exponent::Approx(x) => x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Exponent::Exact(_))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Exponent::Exact(k) => write!(f, "{k}"),
            Exponent::Approx(x) => f.write_str(&format_significant(x, 12)),
        }
    }
}

/// `x` rounded to `digits` significant digits, without exponent notation.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `k` with `num / den = p^k`, if the ratio is an exact power of `p`.
fn exact_log(num: usize, den: usize, p: u32) -> Option<i64> {
    let (mut a, mut b, mut k) = (num as u128, den as u128, 0i64);
    let p = p as u128;
    while a > b {
        if a % p != 0 {
            return None;
        }
        a /= p;
        k += 1;
    }
    while b > a {
        if b % p != 0 {
            return None;
        }
        b /= p;
        k -= 1;
    }
    (a == b).then_some(k)
}

/// Per-step exponents `log_p(d_{i+1} / d_i)` and the last of them.
pub fn growth_exponent(dims: &[usize], p: u32) -> Result<(Vec<Exponent>, Exponent)> {
    if dims.len() < 2 {
        return Err(Error::MalformedInput("growth exponents need at least two rows".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Domain("dimensions must be positive".into()));
    }
    let steps: Vec<Exponent> = dims
        .windows(2)
        .map(|w| match exact_log(w[1], w[0], p) {
            Some(k) => Exponent::Exact(k),
            None => Exponent::Approx((w[1] as f64 / w[0] as f64).ln() / (p as f64).ln()),
        })
        .collect();
    let last = *steps.last().expect("nonempty");
    Ok((steps, last))
}

/// `d_n ≤ C n` for every row `(n, d_n)`.
pub fn check_linear_bound(rows: &[(u32, usize)], c: u64) -> Result<bool> {
    if c == 0 {
        return Err(Error::Domain("the constant must be positive".into()));
    }
    Ok(rows.iter().all(|&(n, d)| d as u64 <= c * n as u64))
}

/// One row of a growth table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub n: u32,
    pub dim: usize,
}

#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub family: TableFamily,
    pub params: TableParams,
    pub rows: Vec<Row>,
    pub exponents: Vec<Exponent>,
    pub checks: Vec<Check>,
}

impl GrowthReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.dim).collect()
    }
}

/// Rough work estimate for one invariant cell: cube of the quotient dimension.
pub fn cell_cost(params: &TableParams, n: u32) -> Result<usize> {
    let w = params.weight()?;
    let m = params.m.unwrap_or(n + 1);
    Ok(level_dim(&w, m))
}

fn check_cap(params: &TableParams, family: TableFamily, ns: &[u32]) -> Result<()> {
    let w = params.weight()?;
    let worst = match family {
        TableFamily::Ind | TableFamily::Cosets => {
            let n = ns.iter().copied().max().unwrap_or(0);
            if n > 8 {
                return Err(Error::Capacity(format!("level n={n} exceeds the cap of 8")));
            }
            return Ok(());
        }
        TableFamily::BarR | TableFamily::BarRInvariants => {
            let n = ns.iter().copied().max().unwrap_or(0).max(1);
            level_dim(&w, params.m.unwrap_or(n).max(n))
        }
        TableFamily::Invariants => ns
            .iter()
            .map(|&n| cell_cost(params, n))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(0),
    };
    if worst > QUOTIENT_DIM_CAP {
        let ops = (worst as f64).powi(3);
        return Err(Error::Capacity(format!(
            "quotient dimension {worst} exceeds the cap of {QUOTIENT_DIM_CAP} (estimated cost ~{ops:.1e} field operations per cell)"
        )));
    }
    Ok(())
}

fn subgroup_at(params: &TableParams, n: u32) -> Result<SubgroupSpec> {
    SubgroupSpec::new(params.subgroup, n, params.p)
}

struct Cell {
    row: Row,
    checks: Vec<Check>,
}

fn invariant_cell(params: &TableParams, n: u32) -> Result<Cell> {
    let w = params.weight()?;
    let spec = subgroup_at(params, n)?;
    let opts = params.verify_options();
    let m = params.m.unwrap_or(required_truncation(&spec)?);
    let prec = params.precision.unwrap_or(m + 3);
    let pt = PiTruncation::new(w, params.lambda, m, prec)?;
    let inv = invariant_dims(&pt, &spec, &opts, params.stability)?;
    let (p, d) = (params.p as usize, inv.dim);
    let mut checks = Vec::new();
    let tag = |s: &str| format!("{s}[n={n}]");
    let level = spec.principal_level().unwrap_or(1);
    let morra = (p + 1) * p.pow(level - 1);
    if params.lambda != 0 {
        let kn_like = matches!(params.subgroup, Family::Kn) || (params.subgroup == Family::T1 && n == 1);
        if kn_like && !params.is_degenerate() {
            checks.push(Check::equal(tag("ps_dim_eq_(p+1)p^(n-1)"), morra, d));
        }
        if params.subgroup == Family::Kn {
            let ok = containment_check(&pt, n, &opts)?;
            checks.push(Check::new(tag("inside_barR_n"), true, ok, ok));
        }
    } else {
        if params.subgroup == Family::T1 {
            let bound = 4 * p * p * n as usize;
            checks.push(Check::new(tag("leq_4p2n"), format!("<={bound}"), d, d <= bound));
        }
        if params.subgroup == Family::Kn && params.r >= 1 {
            let bound = 2 * morra;
            checks.push(Check::new(tag("leq_2(p+1)p^(n-1)"), format!("<={bound}"), d, d <= bound));
            let ok = containment_check(&pt, n, &opts)?;
            checks.push(Check::new(tag("inside_barR_n+barR_n+1"), true, ok, ok));
        }
    }
    if let Some(s) = inv.stable_m {
        checks.push(Check::new(tag("stable_m+1"), true, s, s));
    }
    if let Some(s) = inv.stable_n {
        checks.push(Check::new(tag("stable_N+1"), true, s, s));
    }
    Ok(Cell {
        row: Row { n, dim: d },
        checks,
    })
}

fn bar_r_invariant_cell(params: &TableParams, pt: &PiTruncation, n: u32) -> Result<Cell> {
    let spec = match params.subgroup {
        Family::H | Family::Z1 | Family::K | Family::K1 => subgroup_at(params, 0)?,
        _ => subgroup_at(params, n)?,
    };
    let d = bar_r_invariants(pt, n, &spec, &params.verify_options())?.dim;
    let mut checks = Vec::new();
    if params.subgroup == Family::H {
        let bound = 2 * (params.r as usize + 1) * params.p as usize * n.max(1) as usize;
        checks.push(Check::new(format!("leq_2dpn[n={n}]"), format!("<={bound}"), d, d <= bound));
    }
    Ok(Cell {
        row: Row { n, dim: d },
        checks,
    })
}

/// Runs `f` over the cells on a pool of `threads` workers; output order is
/// the input order.
fn run_cells<T: Send>(threads: usize, ns: &[u32], f: impl Fn(u32) -> Result<T> + Sync) -> Result<Vec<T>> {
    if threads <= 1 {
        return ns.iter().map(|&n| f(n)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    pool.install(|| ns.par_iter().map(|&n| f(n)).collect())
}

/// Builds one table; cells run on `threads` workers and are merged in `n`
/// order, so the report does not depend on the thread count.
pub fn dims_table(family: TableFamily, params: &TableParams, ns: &[u32], threads: usize) -> Result<GrowthReport> {
    if ns.is_empty() {
        return Err(Error::MalformedInput("empty n range".into()));
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    check_cap(params, family, &ns)?;
    let w = params.weight()?;
    let p = params.p;
    let cells: Vec<Cell> = match family {
        TableFamily::Ind => run_cells(threads, &ns, |n| {
            let ind = InducedRep::new(w, n, n + 1)?;
            let d = ind.dim();
            Ok(Cell {
                row: Row { n, dim: d },
                checks: vec![Check::equal(format!("ind_dim_formula[n={n}]"), InducedRep::formula_dim(&w, n), d)],
            })
        })?,
        TableFamily::Cosets => run_cells(threads, &ns, |n| {
            let d = double_coset_count(p, n)?;
            Ok(Cell {
                row: Row { n, dim: d },
                checks: vec![Check::equal(format!("coset_formula[n={n}]"), double_coset_formula(p, n), d)],
            })
        })?,
        TableFamily::BarR => {
            let top = *ns.last().expect("nonempty");
            let m = params.m.unwrap_or(top).max(top).max(1);
            let pt = PiTruncation::new(w, params.lambda, m, params.precision.unwrap_or(m + 3))?;
            ns.iter()
                .map(|&n| {
                    let d = pt.bar_r_basis(n)?.cols();
                    let mut checks = Vec::new();
                    if params.lambda != 0 {
                        checks.push(Check::equal(format!("barR_eq_dim_R[n={n}]"), level_dim(&w, n), d));
                    } else if params.r >= 1 {
                        let expected = w.dim() * (p as usize).pow(n);
                        checks.push(Check::equal(format!("barR_eq_(r+1)p^n[n={n}]"), expected, d));
                    }
                    Ok(Cell {
                        row: Row { n, dim: d },
                        checks,
                    })
                })
                .collect::<Result<_>>()?
        }
        TableFamily::BarRInvariants => {
            let top = *ns.last().expect("nonempty");
            let m = params.m.unwrap_or(top).max(top).max(1);
            let pt = PiTruncation::new(w, params.lambda, m, params.precision.unwrap_or(m + 3))?;
            run_cells(threads, &ns, |n| bar_r_invariant_cell(params, &pt, n))?
        }
        TableFamily::Invariants => run_cells(threads, &ns, |n| invariant_cell(params, n))?,
    };
    let rows: Vec<Row> = cells.iter().map(|c| c.row.clone()).collect();
    let mut checks: Vec<Check> = cells.into_iter().flat_map(|c| c.checks).collect();
    let dims: Vec<usize> = rows.iter().map(|r| r.dim).collect();
    let exponents = if dims.len() >= 2 && dims.iter().all(|&d| d > 0) {
        growth_exponent(&dims, p)?.0
    } else {
        Vec::new()
    };
    if family == TableFamily::Invariants && !params.is_degenerate() {
        let consecutive = rows.windows(2).all(|w| w[1].n == w[0].n + 1);
        if consecutive {
            for (w, e) in rows.windows(2).zip(&exponents) {
                let ok = e.value() <= 1.0 + 1e-12;
                checks.push(Check::new(format!("exponent_leq_1[n={}]", w[1].n), "<=1", e, ok));
            }
        }
    }
    Ok(GrowthReport {
        family,
        params: *params,
        rows,
        exponents,
        checks,
    })
}

/// The ideal chain of the cyclic-group lemma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarshallReport {
    /// Non-increasing exponents with `Σ p^{α_i} = d`.
    pub alphas: Vec<u32>,
    /// Dimensions of `L_1 ⊂ L_2 ⊂ ...`.
    pub chain_dims: Vec<usize>,
    pub verified: bool,
}

/// Base-`p` digits of `d` expanded into a non-increasing list of exponents.
pub fn base_p_alphas(d: usize, p: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut rest = d;
    let mut k = 0u32;
    while rest > 0 {
        let digit = rest % p as usize;
        out.extend(std::iter::repeat_n(k, digit));
        rest /= p as usize;
        k += 1;
    }
    out.reverse();
    out
}

/// The `d`-dimensional submodule `L` of `F_p[x]/(x^{p^{n-1}})` (the group
/// algebra of the cyclic group `K_1/K_1(p^n)`, `x = σ - 1`) together with a
/// chain `L_i` whose subquotients are cyclic of dimension `p^{α_i}`. Each
/// step is checked directly on matrices.
pub fn marshall_filtration(d: usize, p: u32, n: u32) -> Result<MarshallReport> {
    crate::gf::validate_prime(p as u64)?;
    if !(1..=6).contains(&n) {
        return Err(Error::Domain(format!("n={n} outside 1..=6")));
    }
    let big = ipow(p, n - 1) as usize;
    if d < 1 || d > big {
        return Err(Error::Domain(format!("d={d} outside 1..={big}")));
    }
    // x = P - 1 with P the regular cyclic shift.
    let shift = FpMatrix::from_fn(p, big, big, |i, j| u32::from(i == (j + 1) % big));
    let x = shift.sub_scalar_identity(1)?;
    let power = |k: usize| x.pow(k as u64);
    let ideal = |dim: usize| -> Result<FpMatrix> { Ok(power(big - dim)?.column_basis()) };
    let alphas = base_p_alphas(d, p);
    let mut chain_dims = Vec::new();
    let mut verified = alphas.iter().map(|&a| (p as usize).pow(a)).sum::<usize>() == d;
    verified &= x.pow(big as u64)?.is_zero();
    let mut prev = FpMatrix::zeros(p, big, 0);
    let mut s = 0usize;
    for &a in &alphas {
        let q = (p as usize).pow(a);
        s += q;
        let cur = ideal(s)?;
        chain_dims.push(cur.cols());
        verified &= cur.cols() == s;
        verified &= span_dim(&cur, &prev)? == cur.cols();
        let base = prev.cols();
        let mut moved = cur.clone();
        for k in 0..=q {
            let dim = span_dim(&moved, &prev)? - base;
            verified &= dim == q - k;
            moved = x.mul(&moved)?;
        }
        prev = cur;
    }
    let whole = ideal(d)?;
    verified &= span_dim(&whole, &prev)? == d && prev.cols() == d;
    Ok(MarshallReport {
        alphas,
        chain_dims,
        verified,
    })
}

/// `(dim H^0(Z_p, W), dim H^1(Z_p, W))` for the generator acting as `u`.
pub fn zp_cohomology(u: &FpMatrix) -> Result<(usize, usize)> {
    if !u.is_square() {
        return Err(Error::MalformedInput("u must be square".into()));
    }
    let dim = u.rows();
    let p = u.p();
    if u.rank() != dim {
        return Err(Error::Domain("u is not invertible".into()));
    }
    let mut order_bound = 1u64;
    while (order_bound as usize) < dim.max(1) {
        order_bound *= p as u64;
    }
    if !u.pow(order_bound)?.is_identity() {
        return Err(Error::Domain("u does not have p-power order".into()));
    }
    let rank = u.sub_scalar_identity(1)?.rank();
    let h0 = dim - rank;
    let h1 = dim - rank;
    Ok((h0, h1))
}

/// A random unipotent matrix: a unitriangular matrix conjugated by a random
/// invertible one.
pub fn random_unipotent<R: Rng>(p: u32, dim: usize, rng: &mut R) -> FpMatrix {
    let upper = FpMatrix::from_fn(p, dim, dim, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => 1,
        std::cmp::Ordering::Less => rng.gen_range(0..p),
        std::cmp::Ordering::Greater => 0,
    });
    loop {
        let c = FpMatrix::from_fn(p, dim, dim, |_, _| rng.gen_range(0..p));
        if let Ok(ci) = c.inverse() {
            return c.mul(&upper).and_then(|x| x.mul(&ci)).expect("square");
        }
    }
}

/// One factor of a product computation.
pub struct Factor<'a> {
    pub rep: &'a dyn KRep,
    pub spec: SubgroupSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductReport {
    pub factor_dims: Vec<usize>,
    pub dim_kron: usize,
    pub dim_product: usize,
}

impl ProductReport {
    pub fn multiplicative(&self) -> bool {
        self.dim_kron == self.dim_product
    }
}

/// Applies `ρ_1(g) ⊗ 1` (`left`) or `1 ⊗ ρ_2(h)` to columns indexed by
/// `(i, j) -> i * d2 + j`.
fn kron_apply(mat: &FpMatrix, left: bool, d1: usize, d2: usize, vectors: &FpMatrix) -> Result<FpMatrix> {
    let p = vectors.p();
    let mut out = FpMatrix::zeros(p, vectors.rows(), vectors.cols());
    let mt = if left { None } else { Some(mat.transpose()) };
    for c in 0..vectors.cols() {
        let x = FpMatrix::from_fn(p, d1, d2, |i, j| vectors.get(i * d2 + j, c));
        let y = match &mt {
            None => mat.mul(&x)?,
            Some(bt) => x.mul(bt)?,
        };
        for i in 0..d1 {
            for j in 0..d2 {
                out.set(i * d2 + j, c, y.get(i, j));
            }
        }
    }
    Ok(out)
}

/// Invariants of `Γ_1 × Γ_2` on `V_1 ⊗ V_2` by kernel intersection over the
/// generator pairs `(g, 1)`, `(1, h)`, verified on random pairs, compared
/// with the product of the factor invariant dimensions.
pub fn product_invariants(first: &Factor, second: &Factor, opts: &VerifyOptions) -> Result<ProductReport> {
    let (d1, d2) = (first.rep.dim(), second.rep.dim());
    let p = first.rep.p();
    if second.rep.p() != p {
        return Err(Error::MalformedInput("factors over different primes".into()));
    }
    if d1 * d2 > KRON_DIM_CAP {
        return Err(Error::Capacity(format!(
            "Kronecker dimension {} exceeds the cap of {KRON_DIM_CAP}",
            d1 * d2
        )));
    }
    let f1 = invariants(first.rep, &first.spec, opts)?.dim;
    let f2 = invariants(second.rep, &second.spec, opts)?.dim;
    let mut ops: Vec<(FpMatrix, bool)> = Vec::new();
    for g in first.rep.generator_matrices(&first.spec)?.iter() {
        ops.push((g.clone(), true));
    }
    for h in second.rep.generator_matrices(&second.spec)?.iter() {
        ops.push((h.clone(), false));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    for _ in 0..=opts.retries {
        let mut current = FpMatrix::identity(p, d1 * d2);
        for (m, left) in &ops {
            if current.cols() == 0 {
                break;
            }
            let image = kron_apply(m, *left, d1, d2, &current)?.sub(&current)?;
            if image.is_zero() {
                continue;
            }
            current = current.mul(&image.nullspace())?;
        }
        let mut failure = None;
        for _ in 0..opts.samples {
            if current.cols() == 0 {
                break;
            }
            let g = first.rep.act(&first.spec.random_member(first.rep.precision(), &mut rng))?;
            let h = second.rep.act(&second.spec.random_member(second.rep.precision(), &mut rng))?;
            let moved = kron_apply(&h, false, d1, d2, &kron_apply(&g, true, d1, d2, &current)?)?;
            if moved != current {
                failure = Some((g, h));
                break;
            }
        }
        match failure {
            None => {
                return Ok(ProductReport {
                    factor_dims: vec![f1, f2],
                    dim_kron: current.cols(),
                    dim_product: f1 * f2,
                })
            }
            Some((g, h)) => {
                ops.push((g, true));
                ops.push((h, false));
            }
        }
    }
    Err(Error::Consistency("product invariants failed verification".into()))
}

/// Convenience: the trivial one-dimensional factor.
pub fn trivial_rep(p: u32, precision: u32) -> Result<SymRep> {
    Ok(SymRep::new(Weight::trivial(p)?, precision))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_examples() {
        let (steps, last) = growth_exponent(&[6, 30, 150], 5).unwrap();
        assert_eq!(steps, vec![Exponent::Exact(1), Exponent::Exact(1)]);
        assert_eq!(last, Exponent::Exact(1));
        assert_eq!(growth_exponent(&[4, 4, 4], 5).unwrap().1, Exponent::Exact(0));
        assert_eq!(growth_exponent(&[2, 10, 50], 5).unwrap().1, Exponent::Exact(1));
        let (steps, _) = growth_exponent(&[8, 24], 5).unwrap();
        assert!(!steps[0].is_exact());
        assert_eq!(steps[0].to_string(), "0.682606194486");
        assert!(growth_exponent(&[0, 1], 5).is_err());
        assert!(growth_exponent(&[1], 5).is_err());
    }

    #[test]
    fn linear_bound_examples() {
        assert!(check_linear_bound(&[(1, 1), (2, 2), (3, 3)], 1).unwrap());
        assert!(!check_linear_bound(&[(1, 2)], 1).unwrap());
        assert!(check_linear_bound(&[(1, 1)], 0).is_err());
    }

    #[test]
    fn marshall_examples() {
        let r = marshall_filtration(7, 5, 3).unwrap();
        assert_eq!(r.alphas, vec![1, 0, 0]);
        assert_eq!(r.chain_dims, vec![5, 6, 7]);
        assert!(r.verified);
        let r = marshall_filtration(25, 5, 3).unwrap();
        assert_eq!(r.alphas, vec![2]);
        assert!(r.verified);
        let r = marshall_filtration(13, 5, 3).unwrap();
        assert_eq!(r.alphas, vec![1, 1, 0, 0, 0]);
        assert!(r.verified);
        assert!(marshall_filtration(1, 5, 1).unwrap().verified);
        assert!(marshall_filtration(26, 5, 3).is_err());
        assert!(marshall_filtration(0, 5, 3).is_err());
    }

    #[test]
    fn zp_examples() {
        assert_eq!(zp_cohomology(&FpMatrix::identity(5, 2)).unwrap(), (2, 2));
        let j = FpMatrix::from_rows(5, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(zp_cohomology(&j).unwrap(), (1, 1));
        let d = FpMatrix::from_rows(5, &[vec![2, 0], vec![0, 1]]).unwrap();
        assert!(zp_cohomology(&d).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in 1..=6 {
            let u = random_unipotent(5, dim, &mut rng);
            let (h0, h1) = zp_cohomology(&u).unwrap();
            assert_eq!(h0, h1);
        }
    }

    #[test]
    fn tables() {
        let mut params = TableParams::new(5, 2, 0);
        let ind = dims_table(TableFamily::Ind, &params, &[1, 2], 1).unwrap();
        assert_eq!(ind.dims(), vec![18, 90]);
        params.r = 1;
        let bar = dims_table(TableFamily::BarR, &params, &[0, 1, 2], 1).unwrap();
        assert_eq!(bar.dims(), vec![2, 10, 50]);
        assert!(bar.all_pass());
        params.lambda = 1;
        let inv = dims_table(TableFamily::Invariants, &params, &[1, 2], 2).unwrap();
        assert_eq!(inv.dims(), vec![6, 30]);
        assert!(inv.all_pass(), "{:?}", inv.checks);
        assert_eq!(inv.exponents, vec![Exponent::Exact(1)]);
        let serial = dims_table(TableFamily::Invariants, &params, &[1, 2], 1).unwrap();
        assert_eq!(serial.checks, inv.checks);
        params.r = 4;
        assert!(matches!(
            dims_table(TableFamily::Invariants, &params, &[1, 2, 3, 4], 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn product_small() {
        let opts = VerifyOptions::default();
        let p = 5;
        let pt = PiTruncation::with_default_precision(Weight::new(p, 1, 0).unwrap(), 1, 2).unwrap();
        let k1 = SubgroupSpec::k1(p).unwrap();
        let triv = trivial_rep(p, pt.precision()).unwrap();
        let rep = product_invariants(
            &Factor { rep: &triv, spec: k1 },
            &Factor { rep: &pt, spec: k1 },
            &opts,
        )
        .unwrap();
        assert_eq!(rep.dim_kron, 6);
        assert!(rep.multiplicative());
    }
}
