//! Truncated compact induction on the Bruhat–Tits tree, the Hecke operator,
//! and the quotients `π(r, λ, ω^a)` restricted to `K`.
//!
//! Basis of `V_m`: vertices of level `≤ m` in [`Vertex::at_level`] order,
//! each carrying the `r + 1` monomials of `Sym^r`. The function `[g, v]`
//! satisfies `[g k, v] = [g, Sym^r(k) v]` for `k ∈ K` and `[p g, v] = [g, v]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{self, columns_in_span, pow_mod, FpMatrix};
use crate::weights::{invariants, invariants_in_subspace, sym_matrix, GeneratorCache, Invariants, KRep, VerifyOptions, Weight};
use crate::zq::{ipow, vertex_canonicalize, SubgroupSpec, Vertex, ZMat2};

/// `dim R_k`: `r + 1` at the origin, `(r + 1)(p + 1)p^{k-1}` beyond.
pub fn level_dim(w: &Weight, k: u32) -> usize {
    w.dim() * Vertex::count_at_level(w.p, k)
}

/// `dim V_m = Σ_{k ≤ m} dim R_k`.
pub fn truncation_dim(w: &Weight, m: u32) -> usize {
    (0..=m).map(|k| level_dim(w, k)).sum()
}

/// Sparse action of one group element on `V_m`: vertex `v` goes to
/// `target[v]` with coefficient block `blocks[v]`.
#[derive(Debug, Clone)]
pub struct VertexAction {
    pub p: u32,
    pub block: usize,
    pub target: Vec<usize>,
    pub blocks: Vec<FpMatrix>,
}

impl VertexAction {
    /// `ρ(g) X` for `X` with rows indexed by the first `X.rows() / block`
    /// vertices, which must form a union of full levels.
    pub fn apply_left(&self, x: &FpMatrix) -> Result<FpMatrix> {
        let b = self.block;
        let nv = x.rows() / b;
        let mut out = FpMatrix::zeros(self.p, x.rows(), x.cols());
        for v in 0..nv {
            let t = self.target[v];
            if t >= nv {
                return Err(Error::MalformedInput("rows do not cover whole levels".into()));
            }
            let blk = &self.blocks[v];
            for s in 0..b {
                for i in 0..b {
                    let c = blk.get(s, i);
                    if c == 0 {
                        continue;
                    }
                    for col in 0..x.cols() {
                        let val = x.get(v * b + i, col);
                        if val != 0 {
                            let cur = out.get(t * b + s, col);
                            out.set(t * b + s, col, (cur + c * val) % self.p);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `X ρ(g)` for `X` with columns indexed by the first `X.cols() / block`
    /// vertices.
    pub fn apply_right(&self, x: &FpMatrix) -> Result<FpMatrix> {
        let b = self.block;
        let nv = x.cols() / b;
        let mut out = FpMatrix::zeros(self.p, x.rows(), x.cols());
        for v in 0..nv {
            let t = self.target[v];
            if t >= nv {
                return Err(Error::MalformedInput("columns do not cover whole levels".into()));
            }
            let blk = &self.blocks[v];
            for i in 0..b {
                for s in 0..b {
                    let c = blk.get(s, i);
                    if c == 0 {
                        continue;
                    }
                    for row in 0..x.rows() {
                        let val = x.get(row, t * b + s);
                        if val != 0 {
                            let cur = out.get(row, v * b + i);
                            out.set(row, v * b + i, (cur + c * val) % self.p);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self, vertices: usize) -> FpMatrix {
        let b = self.block;
        let mut out = FpMatrix::zeros(self.p, vertices * b, vertices * b);
        for v in 0..vertices {
            let t = self.target[v];
            for s in 0..b {
                for i in 0..b {
                    out.set(t * b + s, v * b + i, self.blocks[v].get(s, i));
                }
            }
        }
        out
    }
}

/// `V_m = ⊕_{k ≤ m} R_k` with its `K`-action read mod `p^precision`.
#[derive(Debug)]
pub struct TruncatedCInd {
    pub weight: Weight,
    pub m: u32,
    pub precision: u32,
    vertices: Vec<Vertex>,
    level_start: Vec<usize>,
    cache: GeneratorCache,
}

impl TruncatedCInd {
    pub fn new(weight: Weight, m: u32, precision: u32) -> Result<Self> {
        if precision < m + 3 {
            return Err(Error::Precision(format!(
                "truncation at m={m} needs precision >= {}, got {precision}",
                m + 3
            )));
        }
        let mut vertices = Vec::new();
        let mut level_start = Vec::new();
        for k in 0..=m {
            level_start.push(vertices.len());
            vertices.extend(Vertex::at_level(weight.p, k));
        }
        level_start.push(vertices.len());
        Ok(TruncatedCInd {
            weight,
            m,
            precision,
            vertices,
            level_start,
            cache: GeneratorCache::default(),
        })
    }

    pub fn block(&self) -> usize {
        self.weight.dim()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Coordinate range of `R_k`.
    pub fn level_range(&self, k: u32) -> std::ops::Range<usize> {
        let b = self.block();
        self.level_start[k as usize] * b..self.level_start[k as usize + 1] * b
    }

    /// `dim V_k`.
    pub fn dim_upto(&self, k: u32) -> usize {
        self.level_start[k as usize + 1] * self.block()
    }

    fn vertex_index(&self, v: &Vertex) -> usize {
        self.level_start[v.level as usize] + v.position_in_level(self.weight.p)
    }

    /// `g · [g_v, w] = [g_{v'}, det(g)^a Sym^r(k2) w]` where
    /// `g g_v = p^e g_{v'} k2`.
    pub fn vertex_action(&self, g: &ZMat2) -> Result<VertexAction> {
        let p = self.weight.p;
        let g = g.reduce(ipow(p, self.precision));
        if !g.is_unit_det(p) {
            return Err(Error::Domain(format!("{g:?} is not in GL_2(Z_p)")));
        }
        let twist = pow_mod(gf::reduce_signed(g.det(), p) as u64, self.weight.a as u64, p as u64) as u32;
        let plain = self.weight.untwisted();
        let mut target = Vec::with_capacity(self.vertices.len());
        let mut blocks = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let c = vertex_canonicalize(&g.mul(&v.matrix(p)), p)?;
            if c.vertex.level != v.level {
                return Err(Error::Consistency(format!("{g:?} moved {v:?} to another level")));
            }
            target.push(self.vertex_index(&c.vertex));
            blocks.push(sym_matrix(&c.k2, &plain).scale(twist));
        }
        Ok(VertexAction {
            p,
            block: self.block(),
            target,
            blocks,
        })
    }

    /// `T : V_{m-1} -> V_m` as a `dim V_m x dim V_{m-1}` matrix.
    ///
    /// `T[g, v] = Σ_μ [g β_μ, Sym^r([[1, -μ], [0, p]]) v] + [g diag(1, p), Sym^r(diag(p, 1)) v]`
    /// with `β_μ = [[p, μ], [0, 1]]`; matrices read mod `p` inside `Sym^r`.
    pub fn hecke_matrix(&self) -> Result<FpMatrix> {
        if self.m == 0 {
            return Err(Error::Domain("the Hecke operator needs m >= 1".into()));
        }
        let p = self.weight.p;
        let pi = p as i128;
        let plain = self.weight.untwisted();
        let b = self.block();
        let mut moves: Vec<(ZMat2, FpMatrix)> = (0..pi)
            .map(|mu| (ZMat2::new(pi, mu, 0, 1), sym_matrix(&ZMat2::new(1, -mu, 0, pi), &plain)))
            .collect();
        moves.push((ZMat2::diag(1, pi), sym_matrix(&ZMat2::diag(pi, 1), &plain)));
        let src = self.level_start[self.m as usize];
        let mut t = FpMatrix::zeros(p, self.dim(), src * b);
        for (vi, v) in self.vertices[..src].iter().enumerate() {
            let gv = v.matrix(p);
            for (beta, transport) in &moves {
                let c = vertex_canonicalize(&gv.mul(beta), p)?;
                let ti = self.vertex_index(&c.vertex);
                let blk = sym_matrix(&c.k2, &plain).mul(transport)?;
                for s in 0..b {
                    for i in 0..b {
                        let (row, col) = (ti * b + s, vi * b + i);
                        t.set(row, col, (t.get(row, col) + blk.get(s, i)) % p);
                    }
                }
            }
        }
        Ok(t)
    }
}

impl KRep for TruncatedCInd {
    fn p(&self) -> u32 {
        self.weight.p
    }

    fn dim(&self) -> usize {
        self.vertices.len() * self.block()
    }

    fn precision(&self) -> u32 {
        self.precision
    }

    fn act(&self, g: &ZMat2) -> Result<FpMatrix> {
        Ok(self.vertex_action(g)?.to_dense(self.vertices.len()))
    }

    fn act_on(&self, g: &ZMat2, vectors: &FpMatrix) -> Result<FpMatrix> {
        self.vertex_action(g)?.apply_left(vectors)
    }

    fn basis_labels(&self) -> Vec<String> {
        let r = self.weight.r;
        let mut out = Vec::with_capacity(self.dim());
        for v in &self.vertices {
            for j in 0..=r {
                out.push(format!("L{}B{}J{}:X^{}Y^{}", v.level, v.branch, v.index, r - j, j));
            }
        }
        out
    }

    fn generator_cache(&self) -> Option<&GeneratorCache> {
        Some(&self.cache)
    }
}

/// The level-`k` block `R_k` of the tree as a representation of `K`.
#[derive(Debug)]
pub struct TreeLevel {
    tree: TruncatedCInd,
    level: u32,
}

impl TreeLevel {
    pub fn new(weight: Weight, level: u32, precision: u32) -> Result<Self> {
        Ok(TreeLevel {
            tree: TruncatedCInd::new(weight, level, precision)?,
            level,
        })
    }
}

impl KRep for TreeLevel {
    fn p(&self) -> u32 {
        self.tree.weight.p
    }

    fn dim(&self) -> usize {
        level_dim(&self.tree.weight, self.level)
    }

    fn precision(&self) -> u32 {
        self.tree.precision
    }

    fn act(&self, g: &ZMat2) -> Result<FpMatrix> {
        let full = self.tree.act(g)?;
        let r = self.tree.level_range(self.level);
        Ok(full.block(r.start, r.start, r.len(), r.len()))
    }
}

/// Outcome of the structural checks on `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeckeReport {
    pub equivariant: bool,
    pub graded: bool,
    pub raising_injective: bool,
    pub lowering_surjective: bool,
    /// `λ` values for which `T - λ` fails to be injective on `V_{m-1}`.
    pub lambda_kernel_failures: Vec<u32>,
}

impl HeckeReport {
    pub fn all_pass(&self) -> bool {
        self.equivariant
            && self.graded
            && self.raising_injective
            && self.lowering_surjective
            && self.lambda_kernel_failures.is_empty()
    }
}

/// Equivariance on `samples` random elements of `K`, level grading, ranks of
/// `T^+|R_k` and `T^-|R_k`, and injectivity of `T - λ` for every `λ ∈ F_p`.
pub fn hecke_structure(tree: &TruncatedCInd, samples: usize, seed: u64) -> Result<HeckeReport> {
    let p = tree.weight.p;
    let m = tree.m;
    let t = tree.hecke_matrix()?;
    let k = SubgroupSpec::k(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut equivariant = true;
    for _ in 0..samples {
        let g = k.random_member(tree.precision, &mut rng);
        let act = tree.vertex_action(&g)?;
        if act.apply_left(&t)? != act.apply_right(&t)? {
            equivariant = false;
            break;
        }
    }
    let mut graded = true;
    let mut raising_injective = true;
    let mut lowering_surjective = true;
    for src in 0..m {
        let cols = tree.level_range(src);
        for dst in 0..=m {
            let rows = tree.level_range(dst);
            let blk = t.block(rows.start, cols.start, rows.len(), cols.len());
            let adjacent = dst + 1 == src || src + 1 == dst;
            if !adjacent && !blk.is_zero() {
                graded = false;
            }
            if dst == src + 1 && blk.rank() != cols.len() {
                raising_injective = false;
            }
            if dst + 1 == src && blk.rank() != rows.len() {
                lowering_surjective = false;
            }
        }
    }
    let mut lambda_kernel_failures = Vec::new();
    for lam in 0..p {
        if relation_matrix(&t, lam)?.rank() != t.cols() {
            lambda_kernel_failures.push(lam);
        }
    }
    Ok(HeckeReport {
        equivariant,
        graded,
        raising_injective,
        lowering_surjective,
        lambda_kernel_failures,
    })
}

/// Rows spanning `W = (T - λι)(V_{m-1})` in `V_m` coordinates.
fn relation_matrix(t: &FpMatrix, lambda: u32) -> Result<FpMatrix> {
    let p = t.p();
    let mut w = t.transpose();
    let shift = (p - lambda % p) % p;
    for i in 0..w.rows() {
        w.set(i, i, (w.get(i, i) + shift) % p);
    }
    Ok(w)
}

/// `π(r, λ, ω^a)^{(m)} = V_m / (T - λ)(V_{m-1})` with its `K`-action.
///
/// The relation space is kept in reduced row echelon form; quotient
/// coordinates are the non-pivot columns of `V_m`.
#[derive(Debug)]
pub struct PiTruncation {
    pub tree: TruncatedCInd,
    pub lambda: u32,
    free: Vec<usize>,
    /// Quotient position of each free coordinate, `usize::MAX` for pivots.
    free_pos: Vec<usize>,
    /// Relation row of each pivot coordinate, `usize::MAX` for free ones.
    pivot_row: Vec<usize>,
    /// `e_c ≡ reducer[pivot_row[c]]` in quotient coordinates for pivot `c`.
    reducer: FpMatrix,
    cache: GeneratorCache,
}

impl PiTruncation {
    pub fn new(weight: Weight, lambda: u32, m: u32, precision: u32) -> Result<Self> {
        let p = weight.p;
        if lambda >= p {
            return Err(Error::Domain(format!("λ={lambda} is not a residue mod {p}")));
        }
        if m == 0 {
            return Err(Error::Domain("truncation needs m >= 1".into()));
        }
        let tree = TruncatedCInd::new(weight, m, precision)?;
        let t = tree.hecke_matrix()?;
        let rref = relation_matrix(&t, lambda)?.rref();
        if rref.rank() != t.cols() {
            return Err(Error::Consistency(format!(
                "T - {lambda} has a kernel on V_{} (rank {} < {})",
                m - 1,
                rref.rank(),
                t.cols()
            )));
        }
        let dim_v = tree.dim();
        let mut pivot_row = vec![usize::MAX; dim_v];
        for (row, &c) in rref.pivots.iter().enumerate() {
            pivot_row[c] = row;
        }
        let free: Vec<usize> = (0..dim_v).filter(|&c| pivot_row[c] == usize::MAX).collect();
        let mut free_pos = vec![usize::MAX; dim_v];
        for (i, &c) in free.iter().enumerate() {
            free_pos[c] = i;
        }
        let reducer = rref
            .matrix
            .block(0, 0, rref.rank(), dim_v)
            .select_columns(&free)
            .scale(p - 1);
        Ok(PiTruncation {
            tree,
            lambda,
            free,
            free_pos,
            pivot_row,
            reducer,
            cache: GeneratorCache::default(),
        })
    }

    /// Construction at the default precision `m + 3`.
    pub fn with_default_precision(weight: Weight, lambda: u32, m: u32) -> Result<Self> {
        Self::new(weight, lambda, m, m + 3)
    }

    pub fn weight(&self) -> Weight {
        self.tree.weight
    }

    pub fn m(&self) -> u32 {
        self.tree.m
    }

    /// Adds `coeff · [e_c]` to a quotient-coordinate row vector.
    fn accumulate(&self, out: &mut [u32], c: usize, coeff: u32) {
        let p = self.tree.weight.p;
        if self.free_pos[c] != usize::MAX {
            let i = self.free_pos[c];
            out[i] = (out[i] + coeff) % p;
        } else {
            for (o, &x) in out.iter_mut().zip(self.reducer.row(self.pivot_row[c])) {
                *o = (*o + coeff * x) % p;
            }
        }
    }

    /// Images of the coordinates `cols` of `V_m`, as quotient columns.
    pub fn project_basis_vectors(&self, cols: impl IntoIterator<Item = usize>) -> FpMatrix {
        let dq = self.free.len();
        let mut rows = Vec::new();
        for c in cols {
            let mut v = vec![0u32; dq];
            self.accumulate(&mut v, c, 1);
            rows.extend(v);
        }
        let n = rows.len() / dq.max(1);
        FpMatrix::from_vec(self.tree.weight.p, n, dq, rows)
            .expect("consistent shape")
            .transpose()
    }

    /// Column basis of `R̄_k`, the image of `R_k` in the quotient.
    pub fn bar_r_basis(&self, k: u32) -> Result<FpMatrix> {
        if k > self.m() {
            return Err(Error::Domain(format!("level {k} exceeds the truncation m={}", self.m())));
        }
        Ok(self.project_basis_vectors(self.tree.level_range(k)).column_basis())
    }

    /// `[dim R̄_0, ..., dim R̄_m]`.
    pub fn bar_r_dims(&self) -> Result<Vec<usize>> {
        (0..=self.m()).map(|k| Ok(self.bar_r_basis(k)?.cols())).collect()
    }

    /// Matrix of `g` on the quotient, built from the sparse vertex action.
    pub fn quotient_action(&self, action: &VertexAction) -> FpMatrix {
        let p = self.tree.weight.p;
        let b = self.tree.block();
        let dq = self.free.len();
        let mut rows = vec![0u32; dq * dq];
        for (j, &c) in self.free.iter().enumerate() {
            let (v, i) = (c / b, c % b);
            let t = action.target[v];
            let out = &mut rows[j * dq..(j + 1) * dq];
            for s in 0..b {
                let coeff = action.blocks[v].get(s, i);
                if coeff != 0 {
                    self.accumulate(out, t * b + s, coeff);
                }
            }
        }
        FpMatrix::from_vec(p, dq, dq, rows).expect("consistent shape").transpose()
    }
}

impl KRep for PiTruncation {
    fn p(&self) -> u32 {
        self.tree.weight.p
    }

    fn dim(&self) -> usize {
        self.free.len()
    }

    fn precision(&self) -> u32 {
        self.tree.precision
    }

    fn act(&self, g: &ZMat2) -> Result<FpMatrix> {
        Ok(self.quotient_action(&self.tree.vertex_action(g)?))
    }

    fn basis_labels(&self) -> Vec<String> {
        let labels = self.tree.basis_labels();
        self.free.iter().map(|&c| labels[c].clone()).collect()
    }

    fn generator_cache(&self) -> Option<&GeneratorCache> {
        Some(&self.cache)
    }
}

pub fn pi_truncation(w: Weight, lambda: u32, m: u32, precision: u32) -> Result<PiTruncation> {
    PiTruncation::new(w, lambda, m, precision)
}

/// Even and odd parts of a supersingular truncation.
#[derive(Debug, Clone)]
pub struct EvenOddSplit {
    pub even: FpMatrix,
    pub odd: FpMatrix,
    /// Sum of the two parts is direct and fills the quotient.
    pub direct: bool,
    /// Both parts are stable under the generators of `K`.
    pub stable: bool,
}

/// Images of the even-level and odd-level blocks of a `λ = 0` truncation.
pub fn split_even_odd(pt: &PiTruncation) -> Result<EvenOddSplit> {
    if pt.lambda != 0 {
        return Err(Error::Domain("the even/odd split needs λ = 0".into()));
    }
    let part = |parity: u32| {
        let cols: Vec<usize> = (0..=pt.m())
            .filter(|k| k % 2 == parity)
            .flat_map(|k| pt.tree.level_range(k))
            .collect();
        pt.project_basis_vectors(cols).column_basis()
    };
    let (even, odd) = (part(0), part(1));
    let direct = even.cols() + odd.cols() == pt.dim() && gf::span_dim(&even, &odd)? == pt.dim();
    let mut stable = true;
    for g in SubgroupSpec::k(pt.p())?.generators(pt.precision())? {
        let rho = pt.act(&g)?;
        for basis in [&even, &odd] {
            if !columns_in_span(basis, &rho.mul(basis)?)? {
                stable = false;
            }
        }
    }
    Ok(EvenOddSplit {
        even,
        odd,
        direct,
        stable,
    })
}

/// Invariant dimension of `π` under a leveled subgroup, with optional
/// stability re-runs.
#[derive(Debug, Clone)]
pub struct InvariantDims {
    pub dim: usize,
    pub basis: FpMatrix,
    /// Same dimension at truncation `m + 1`.
    pub stable_m: Option<bool>,
    /// Same dimension at precision `N + 1`.
    pub stable_n: Option<bool>,
}

/// `(dim Π_0^Γ, dim Π_1^Γ)` for the even and odd summands of a `λ = 0`
/// truncation with `m ≥ n + 1`.
pub fn split_invariant_dims(pt: &PiTruncation, spec: &SubgroupSpec, opts: &VerifyOptions) -> Result<(usize, usize)> {
    let need = required_truncation(spec)?;
    if pt.m() < need {
        return Err(Error::Domain(format!("{spec} needs truncation m >= {need}, got m={}", pt.m())));
    }
    let split = split_even_odd(pt)?;
    let even = invariants_in_subspace(pt, spec, &split.even, opts)?.dim;
    let odd = invariants_in_subspace(pt, spec, &split.odd, opts)?.dim;
    Ok((even, odd))
}

/// Smallest truncation holding all `Γ`-invariants: `n + 1` for `Γ ⊇ K_n`.
pub fn required_truncation(spec: &SubgroupSpec) -> Result<u32> {
    spec.principal_level()
        .map(|n| n + 1)
        .ok_or_else(|| Error::Unsupported(format!("{spec} contains no principal congruence subgroup")))
}

/// `dim π^Γ`, computed in the truncation `pt`, which must have `m ≥ n + 1`.
pub fn invariant_dims(
    pt: &PiTruncation,
    spec: &SubgroupSpec,
    opts: &VerifyOptions,
    check_stability: bool,
) -> Result<InvariantDims> {
    let need = required_truncation(spec)?;
    if pt.m() < need {
        return Err(Error::Domain(format!("{spec} needs truncation m >= {need}, got m={}", pt.m())));
    }
    let inv = invariants(pt, spec, opts)?;
    let (mut stable_m, mut stable_n) = (None, None);
    if check_stability {
        let w = pt.weight();
        let up_m = PiTruncation::new(w, pt.lambda, pt.m() + 1, pt.precision() + 1)?;
        stable_m = Some(invariants(&up_m, spec, opts)?.dim == inv.dim);
        let up_n = PiTruncation::new(w, pt.lambda, pt.m(), pt.precision() + 1)?;
        stable_n = Some(invariants(&up_n, spec, opts)?.dim == inv.dim);
    }
    Ok(InvariantDims {
        dim: inv.dim,
        basis: inv.basis,
        stable_m,
        stable_n,
    })
}

/// Checks `π^{K_n} ⊆ R̄_n ⊕ R̄_{n+1}` (`λ = 0`) or `π^{K_n} ⊆ R̄_n` (`λ ≠ 0`).
pub fn containment_check(pt: &PiTruncation, n: u32, opts: &VerifyOptions) -> Result<bool> {
    if n < 1 {
        return Err(Error::Domain("containment needs n >= 1".into()));
    }
    let spec = SubgroupSpec::kn(pt.p(), n)?;
    let inv = invariant_dims(pt, &spec, opts, false)?;
    let mut target = pt.bar_r_basis(n)?;
    if pt.lambda == 0 {
        target = target.hstack(&pt.bar_r_basis(n + 1)?)?;
    }
    columns_in_span(&target, &inv.basis)
}

/// `Γ`-invariants inside `R̄_k`.
pub fn bar_r_invariants(pt: &PiTruncation, k: u32, spec: &SubgroupSpec, opts: &VerifyOptions) -> Result<Invariants> {
    invariants_in_subspace(pt, spec, &pt.bar_r_basis(k)?, opts)
}

/// `(dim π(r,0,1)^Γ, dim π(p-1-r,0,1)^Γ)` at truncation `n + 1`.
pub fn twist_symmetry_check(p: u32, r: u32, spec: &SubgroupSpec, opts: &VerifyOptions) -> Result<(usize, usize)> {
    if !spec.inside_k1() {
        return Err(Error::Domain(format!("{spec} is not contained in K_1")));
    }
    let m = required_truncation(spec)?;
    let dim_for = |r: u32| -> Result<usize> {
        let pt = PiTruncation::with_default_precision(Weight::new(p, r, 0)?, 0, m)?;
        Ok(invariant_dims(&pt, spec, opts, false)?.dim)
    };
    Ok((dim_for(r)?, dim_for(p - 1 - r)?))
}

/// Brute-force invariants over every element of `Γ` mod `p^{m+1}`, the
/// level through which the action on `V_m` factors.
pub fn invariants_by_enumeration(pt: &PiTruncation, spec: &SubgroupSpec) -> Result<Invariants> {
    crate::weights::invariants_by_enumeration(pt, spec, pt.m() + 1)
}

/// `dim π^{(m)} = dim V_m - dim V_{m-1} = dim R_m`, independent of `λ`.
pub fn quotient_dim(w: &Weight, m: u32) -> usize {
    level_dim(w, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{find_invertible, hom_space, InducedRep};
    use crate::zq::Family;

    fn w(p: u32, r: u32) -> Weight {
        Weight::new(p, r, 0).unwrap()
    }

    #[test]
    fn truncation_dims() {
        let t = TruncatedCInd::new(w(5, 1), 2, 5).unwrap();
        assert_eq!(t.dim(), 74);
        assert_eq!(TruncatedCInd::new(w(5, 0), 1, 4).unwrap().dim(), 7);
        assert!(t.act(&ZMat2::IDENTITY).unwrap().is_identity());
        assert!(TruncatedCInd::new(w(5, 1), 2, 4).is_err());
    }

    #[test]
    fn tree_action_is_homomorphism() {
        let t = TruncatedCInd::new(Weight::new(5, 2, 1).unwrap(), 2, 5).unwrap();
        let k = SubgroupSpec::k(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = ipow(5, 5);
        for _ in 0..20 {
            let g = k.random_member(5, &mut rng);
            let h = k.random_member(5, &mut rng);
            let lhs = t.act(&g.mul_mod(&h, m)).unwrap();
            let rhs = t.act(&g).unwrap().mul(&t.act(&h).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn hecke_examples() {
        let t0 = TruncatedCInd::new(w(5, 0), 1, 4).unwrap();
        let h0 = t0.hecke_matrix().unwrap();
        let col = h0.col_vec(0);
        assert_eq!(col.iter().filter(|&&x| x == 1).count(), 6);
        assert_eq!(col.iter().filter(|&&x| x != 0).count(), 6);

        let t1 = TruncatedCInd::new(w(5, 1), 1, 4).unwrap();
        let h1 = t1.hecke_matrix().unwrap();
        // Level 1 vertices: β_0..β_4 then β_∞, two coordinates each.
        let x_col = h1.col_vec(0);
        let y_col = h1.col_vec(1);
        for mu in 0..5usize {
            let base = 2 + 2 * mu;
            assert_eq!((x_col[base], x_col[base + 1]), (1, 0));
            assert_eq!((y_col[base], y_col[base + 1]), (((5 - mu) % 5) as u32, 0));
        }
        assert_eq!((x_col[12], x_col[13]), (0, 0));
        assert_eq!((y_col[12], y_col[13]), (0, 1));
    }

    #[test]
    fn hecke_structure_small() {
        for r in [0, 1, 4] {
            let t = TruncatedCInd::new(w(5, r), 2, 5).unwrap();
            let rep = hecke_structure(&t, 20, 7).unwrap();
            assert!(rep.all_pass(), "r={r}: {rep:?}");
        }
    }

    #[test]
    fn pi_truncation_examples() {
        let pt = PiTruncation::with_default_precision(w(5, 1), 0, 2).unwrap();
        assert_eq!(pt.dim(), 60);
        assert_eq!(pt.bar_r_dims().unwrap(), vec![2, 10, 50]);
        let pt1 = PiTruncation::with_default_precision(w(5, 1), 1, 2).unwrap();
        assert_eq!(pt1.dim(), 60);
        assert_eq!(pt1.bar_r_dims().unwrap(), vec![2, 12, 60]);
        assert_eq!(PiTruncation::with_default_precision(w(5, 0), 0, 1).unwrap().dim(), 6);
        let pt2 = PiTruncation::with_default_precision(w(5, 2), 0, 1).unwrap();
        assert_eq!(pt2.bar_r_dims().unwrap(), vec![3, 15]);
    }

    #[test]
    fn quotient_action_is_homomorphism() {
        let pt = PiTruncation::with_default_precision(Weight::new(5, 1, 2).unwrap(), 0, 2).unwrap();
        let k = SubgroupSpec::k(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = ipow(5, pt.precision());
        assert!(pt.act(&ZMat2::IDENTITY).unwrap().is_identity());
        for _ in 0..20 {
            let g = k.random_member(pt.precision(), &mut rng);
            let h = k.random_member(pt.precision(), &mut rng);
            let lhs = pt.act(&g.mul_mod(&h, m)).unwrap();
            let rhs = pt.act(&g).unwrap().mul(&pt.act(&h).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn even_odd_split() {
        let pt = PiTruncation::with_default_precision(w(5, 1), 0, 2).unwrap();
        let s = split_even_odd(&pt).unwrap();
        assert_eq!((s.even.cols(), s.odd.cols()), (50, 10));
        assert!(s.direct && s.stable);
        let pt2 = PiTruncation::with_default_precision(w(5, 2), 0, 1).unwrap();
        let s2 = split_even_odd(&pt2).unwrap();
        assert_eq!((s2.even.cols(), s2.odd.cols()), (3, 15));
        let pt3 = PiTruncation::with_default_precision(w(5, 1), 1, 1).unwrap();
        assert!(split_even_odd(&pt3).is_err());
    }

    #[test]
    fn principal_series_invariants() {
        let opts = VerifyOptions::default();
        let pt = PiTruncation::with_default_precision(w(5, 1), 1, 2).unwrap();
        let k1 = SubgroupSpec::kn(5, 1).unwrap();
        let inv = invariant_dims(&pt, &k1, &opts, true).unwrap();
        assert_eq!(inv.dim, 6);
        assert_eq!((inv.stable_m, inv.stable_n), (Some(true), Some(true)));
        let t1 = SubgroupSpec::t1(5, 1).unwrap();
        assert_eq!(invariant_dims(&pt, &t1, &opts, false).unwrap().dim, 6);
        assert!(containment_check(&pt, 1, &opts).unwrap());
        let k2 = SubgroupSpec::kn(5, 2).unwrap();
        assert!(invariant_dims(&pt, &k2, &opts, false).is_err());
    }

    #[test]
    fn supersingular_invariants_against_enumeration() {
        let opts = VerifyOptions::default();
        let pt = PiTruncation::with_default_precision(w(5, 1), 0, 2).unwrap();
        for spec in [SubgroupSpec::z1(5).unwrap(), SubgroupSpec::h(5).unwrap()] {
            let fast = invariants(&pt, &spec, &opts).unwrap();
            let brute = invariants_by_enumeration(&pt, &spec).unwrap();
            assert_eq!(fast.dim, brute.dim, "{spec}");
        }
        let k1 = SubgroupSpec::kn(5, 1).unwrap();
        assert!(invariant_dims(&pt, &k1, &opts, false).unwrap().dim <= 12);
        assert!(containment_check(&pt, 1, &opts).unwrap());
        assert!(containment_check(&pt, 0, &opts).is_err());
    }

    #[test]
    fn twist_symmetry_small() {
        let opts = VerifyOptions::default();
        let t1 = SubgroupSpec::t1(5, 1).unwrap();
        let (a, b) = twist_symmetry_check(5, 1, &t1, &opts).unwrap();
        assert_eq!(a, b);
        let (a, b) = twist_symmetry_check(5, 2, &t1, &opts).unwrap();
        assert_eq!(a, b);
        assert!(twist_symmetry_check(5, 1, &SubgroupSpec::k(5).unwrap(), &opts).is_err());
    }

    #[test]
    fn level_one_block_is_induced() {
        let lvl = TreeLevel::new(w(5, 1), 1, 4).unwrap();
        let ind = InducedRep::new(w(5, 1), 1, 4).unwrap();
        let hom = hom_space(&lvl, &ind).unwrap();
        assert!(hom.dim >= 1);
        assert!(find_invertible(&hom, 20, 1).is_some());
    }

    #[test]
    fn h_invariants_of_bar_r() {
        let opts = VerifyOptions::default();
        let pt = PiTruncation::with_default_precision(w(5, 1), 0, 2).unwrap();
        let h = SubgroupSpec::new(Family::H, 0, 5).unwrap();
        for k in 1..=2 {
            let d = bar_r_invariants(&pt, k, &h, &opts).unwrap().dim;
            assert!(d <= 2 * 2 * 5 * k as usize, "k={k} d={d}");
        }
    }
}
