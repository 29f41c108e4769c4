//! Symmetric-power weights, induced representations of `K = GL_2(Z_p)`, and
//! the generic invariants engine.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{self, kernels_in_subspace, pow_mod, FpMatrix};
use crate::zq::{coset_decompose, ipow, p1_points, P1Point, SubgroupSpec, ZMat2};

/// `Sym^r F_p^2 ⊗ det^a` as a representation of `GL_2(F_p)`.
///
/// Basis `X^{r-j} Y^j`, `j = 0..=r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight {
    pub r: u32,
    pub a: u32,
    pub p: u32,
}

impl Weight {
    pub fn new(p: u32, r: u32, a: i64) -> Result<Self> {
        let p = gf::validate_prime(p as u64)?;
        if r > p - 1 {
            return Err(Error::Domain(format!("weight r={r} outside [0, {}]", p - 1)));
        }
        let a = a.rem_euclid(p as i64 - 1) as u32;
        Ok(Weight { r, a, p })
    }

    pub fn trivial(p: u32) -> Result<Self> {
        Self::new(p, 0, 0)
    }

    pub fn dim(&self) -> usize {
        self.r as usize + 1
    }

    /// The same symmetric power without the determinant twist.
    pub fn untwisted(&self) -> Weight {
        Weight { a: 0, ..*self }
    }
}

/// Coefficients (by power of `Y`) of the product of two binary forms.
fn poly_mul(f: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0u32; f.len() + g.len() - 1];
    for (i, &x) in f.iter().enumerate() {
        for (j, &y) in g.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// Matrix of `g` on `Sym^r ⊗ det^a` for the action
/// `(g·f)(X, Y) = det(g)^a f(aX + cY, bX + dY)`, entries read mod `p`.
///
/// Multiplicative on all integral matrices, including singular ones mod `p`.
pub fn sym_matrix(g: &ZMat2, w: &Weight) -> FpMatrix {
    let p = w.p;
    let r = w.r as usize;
    let red = |x: i128| gf::reduce_signed(x, p);
    let first = [red(g.a), red(g.c)];
    let second = [red(g.b), red(g.d)];
    let twist = if w.a == 0 {
        1
    } else {
        pow_mod(red(g.det()) as u64, w.a as u64, p as u64) as u32
    };
    let mut powers_first = vec![vec![1u32]];
    let mut powers_second = vec![vec![1u32]];
    for k in 1..=r {
        powers_first.push(poly_mul(&powers_first[k - 1], &first, p));
        powers_second.push(poly_mul(&powers_second[k - 1], &second, p));
    }
    let mut m = FpMatrix::zeros(p, r + 1, r + 1);
    for j in 0..=r {
        let col = poly_mul(&powers_first[r - j], &powers_second[j], p);
        for (i, &v) in col.iter().enumerate() {
            m.set(i, j, v * twist % p);
        }
    }
    m
}

/// The twisted weight `σ_n` of `K_0(p^n)`:
/// `σ_n([[a, b], [p^n c, d]]) = σ([[d, c], [p^n b, a]])`.
///
/// `g` is read mod `p^prec`, which must be at least `n + 1` so that `c` is
/// known mod `p`.
pub fn sigma_n_matrix(g: &ZMat2, w: &Weight, n: u32, prec: u32) -> Result<FpMatrix> {
    if n < 1 || prec < n + 1 {
        return Err(Error::Precision(format!("σ_n needs n >= 1 and precision >= n + 1 (n={n}, prec={prec})")));
    }
    let m = ipow(w.p, prec);
    let q = ipow(w.p, n);
    let g = g.reduce(m);
    if g.c % q != 0 {
        return Err(Error::Domain(format!("{g:?} is not in K_0(p^{n})")));
    }
    let swapped = ZMat2::new(g.d, g.c / q, q * g.b, g.a);
    Ok(sym_matrix(&swapped, w))
}

/// Generator matrices per subgroup, computed once per representation.
#[derive(Debug, Default)]
pub struct GeneratorCache {
    inner: RwLock<HashMap<SubgroupSpec, Arc<Vec<FpMatrix>>>>,
}

impl GeneratorCache {
    pub fn get_or_compute(
        &self,
        spec: &SubgroupSpec,
        compute: impl FnOnce() -> Result<Vec<FpMatrix>>,
    ) -> Result<Arc<Vec<FpMatrix>>> {
        if let Some(v) = self.inner.read().expect("cache lock").get(spec) {
            return Ok(v.clone());
        }
        let v = Arc::new(compute()?);
        self.inner
            .write()
            .expect("cache lock")
            .entry(*spec)
            .or_insert_with(|| v.clone());
        Ok(v)
    }
}

/// A finite-dimensional representation of `K` factoring through `K` mod
/// `p^precision`.
pub trait KRep: Sync {
    fn p(&self) -> u32;
    fn dim(&self) -> usize;
    /// Group elements are read modulo `p^precision`.
    fn precision(&self) -> u32;
    fn act(&self, g: &ZMat2) -> Result<FpMatrix>;

    fn basis_labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("e{i}")).collect()
    }

    /// `act(g) * vectors`; implementations with sparse actions override this.
    fn act_on(&self, g: &ZMat2, vectors: &FpMatrix) -> Result<FpMatrix> {
        self.act(g)?.mul(vectors)
    }

    fn generator_cache(&self) -> Option<&GeneratorCache> {
        None
    }

    fn generator_matrices(&self, spec: &SubgroupSpec) -> Result<Arc<Vec<FpMatrix>>> {
        let compute = || {
            spec.generators(self.precision())?
                .iter()
                .map(|g| self.act(g))
                .collect::<Result<Vec<_>>>()
        };
        match self.generator_cache() {
            Some(cache) => cache.get_or_compute(spec, compute),
            None => Ok(Arc::new(compute()?)),
        }
    }
}

/// `Sym^r ⊗ det^a` inflated from `GL_2(F_p)` to `K`.
#[derive(Debug)]
pub struct SymRep {
    pub weight: Weight,
    pub precision: u32,
    cache: GeneratorCache,
}

impl SymRep {
    pub fn new(weight: Weight, precision: u32) -> Self {
        SymRep {
            weight,
            precision,
            cache: GeneratorCache::default(),
        }
    }
}

impl KRep for SymRep {
    fn p(&self) -> u32 {
        self.weight.p
    }

    fn dim(&self) -> usize {
        self.weight.dim()
    }

    fn precision(&self) -> u32 {
        self.precision
    }

    fn act(&self, g: &ZMat2) -> Result<FpMatrix> {
        Ok(sym_matrix(g, &self.weight))
    }

    fn basis_labels(&self) -> Vec<String> {
        let r = self.weight.r;
        (0..=r).map(|j| format!("X^{}Y^{}", r - j, j)).collect()
    }

    fn generator_cache(&self) -> Option<&GeneratorCache> {
        Some(&self.cache)
    }
}

/// `Ind_{K_0(p^n)}^K σ_n`, realized on functions supported on right cosets
/// `K_0(p^n) γ_x`, `x ∈ P^1(Z/p^n)`.
///
/// The block in row `y`, column `x` of `act(g)` is `σ_n(k0)` where
/// `γ_y g = k0 γ_x`.
#[derive(Debug)]
pub struct InducedRep {
    pub weight: Weight,
    pub n: u32,
    pub precision: u32,
    points: Vec<P1Point>,
    cache: GeneratorCache,
}

impl InducedRep {
    pub fn new(weight: Weight, n: u32, precision: u32) -> Result<Self> {
        if precision < n + 1 {
            return Err(Error::Precision(format!(
                "Ind from K_0(p^{n}) needs precision >= {}, got {precision}",
                n + 1
            )));
        }
        Ok(InducedRep {
            weight,
            n,
            precision,
            points: p1_points(weight.p, n)?,
            cache: GeneratorCache::default(),
        })
    }

    /// `(r + 1)(p + 1) p^{n-1}`.
    pub fn formula_dim(weight: &Weight, n: u32) -> usize {
        weight.dim() * P1Point::count(weight.p, n)
    }
}

impl KRep for InducedRep {
    fn p(&self) -> u32 {
        self.weight.p
    }

    fn dim(&self) -> usize {
        self.weight.dim() * self.points.len()
    }

    fn precision(&self) -> u32 {
        self.precision
    }

    fn act(&self, g: &ZMat2) -> Result<FpMatrix> {
        let p = self.weight.p;
        let m = ipow(p, self.precision);
        let b = self.weight.dim();
        let mut out = FpMatrix::zeros(p, self.dim(), self.dim());
        for y in &self.points {
            let h = y.representative().mul_mod(g, m);
            let (x, k0) = coset_decompose(&h, p, self.n, self.precision)?;
            let block = sigma_n_matrix(&k0, &self.weight, self.n, self.precision)?;
            let (r0, c0) = (y.index() * b, x.index() * b);
            for i in 0..b {
                for j in 0..b {
                    out.set(r0 + i, c0 + j, block.get(i, j));
                }
            }
        }
        Ok(out)
    }

    fn basis_labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dim());
        for x in &self.points {
            for j in 0..self.weight.dim() {
                out.push(format!("{:?}{}:{j}", x.kind, x.coord));
            }
        }
        out
    }

    fn generator_cache(&self) -> Option<&GeneratorCache> {
        Some(&self.cache)
    }
}

pub fn induced_rep(w: Weight, n: u32, precision: u32) -> Result<InducedRep> {
    InducedRep::new(w, n, precision)
}

/// Randomized verification settings for [`invariants`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// How many times failed samples may be appended as generators.
    pub retries: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 200,
            seed: 1,
            retries: 8,
        }
    }
}

/// Invariant subspace, as columns in the representation's coordinates.
#[derive(Debug, Clone)]
pub struct Invariants {
    pub dim: usize,
    pub basis: FpMatrix,
    /// Sampled elements that had to be added to the generator list.
    pub appended_generators: usize,
}

/// `rep^Γ` for `Γ` the congruence image described by `spec`: the common
/// fixed space of the generator matrices, then checked against random members
/// of the full image. A sample that moves the candidate space is appended to
/// the generator list and the intersection recomputed.
pub fn invariants(rep: &dyn KRep, spec: &SubgroupSpec, opts: &VerifyOptions) -> Result<Invariants> {
    invariants_in_subspace(rep, spec, &FpMatrix::identity(rep.p(), rep.dim()), opts)
}

/// Invariants inside a `Γ`-stable subspace spanned by the columns of `basis`.
pub fn invariants_in_subspace(
    rep: &dyn KRep,
    spec: &SubgroupSpec,
    basis: &FpMatrix,
    opts: &VerifyOptions,
) -> Result<Invariants> {
    if spec.p != rep.p() {
        return Err(Error::MalformedInput("subgroup and representation use different primes".into()));
    }
    let n_needed = spec.n + 1;
    if rep.precision() < n_needed {
        return Err(Error::Precision(format!(
            "{spec} needs precision >= {n_needed}, representation has {}",
            rep.precision()
        )));
    }
    let gens = rep.generator_matrices(spec)?;
    let mut extra: Vec<FpMatrix> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..=opts.retries {
        let mut all: Vec<FpMatrix> = gens.iter().cloned().collect();
        all.extend(extra.iter().cloned());
        let candidate = kernels_in_subspace(&all, basis, true)?;
        let mut moved = None;
        for _ in 0..opts.samples {
            let g = spec.random_member(rep.precision(), &mut rng);
            if candidate.cols() == 0 {
                break;
            }
            if rep.act_on(&g, &candidate)? != candidate {
                moved = Some(g);
                break;
            }
        }
        match moved {
            None => {
                return Ok(Invariants {
                    dim: candidate.cols(),
                    basis: candidate,
                    appended_generators: extra.len(),
                })
            }
            Some(g) => extra.push(rep.act(&g)?),
        }
    }
    Err(Error::Consistency(format!(
        "invariants of {spec} failed verification after {} retries; the generator set is incomplete",
        opts.retries
    )))
}

/// Invariants by brute force over every element of the congruence image mod
/// `p^prec`. Independent of the generator lists; only feasible for small
/// images. `prec` may be below the representation's precision when the
/// action is known to factor through `K` mod `p^prec`.
pub fn invariants_by_enumeration(rep: &dyn KRep, spec: &SubgroupSpec, prec: u32) -> Result<Invariants> {
    let elements = spec.enumerate_image(prec)?;
    let mut current = FpMatrix::identity(rep.p(), rep.dim());
    for g in &elements {
        if current.cols() == 0 {
            break;
        }
        let image = rep.act_on(g, &current)?;
        if image == current {
            continue;
        }
        let coeffs = image.sub(&current)?.nullspace();
        current = current.mul(&coeffs)?;
    }
    Ok(Invariants {
        dim: current.cols(),
        basis: current,
        appended_generators: 0,
    })
}

/// Largest number of unknowns accepted by [`hom_space`]. The equivariance
/// system is dense and square in the number of unknowns.
pub const HOM_SPACE_CAP: usize = 4096;

/// Space of `K`-equivariant maps `A -> B`, as a list of `dim B x dim A`
/// matrices.
#[derive(Debug, Clone)]
pub struct HomSpace {
    pub dim: usize,
    pub basis: Vec<FpMatrix>,
}

/// Solves `X ρ_A(g) = ρ_B(g) X` over the generators of `K` mod `p^N`.
pub fn hom_space(rep_a: &dyn KRep, rep_b: &dyn KRep) -> Result<HomSpace> {
    let (da, db) = (rep_a.dim(), rep_b.dim());
    let unknowns = da * db;
    if unknowns > HOM_SPACE_CAP {
        return Err(Error::Capacity(format!(
            "Hom space with {unknowns} unknowns exceeds the cap of {HOM_SPACE_CAP}"
        )));
    }
    let p = rep_a.p();
    if rep_b.p() != p {
        return Err(Error::MalformedInput("representations over different primes".into()));
    }
    let prec = rep_a.precision().min(rep_b.precision());
    let k = SubgroupSpec::k(p)?;
    let mut systems = Vec::new();
    for g in k.generators(prec)? {
        let a = rep_a.act(&g)?;
        let b = rep_b.act(&g)?;
        // Unknown X[i][j] sits at position i * da + j.
        let mut sys = FpMatrix::zeros(p, unknowns, unknowns);
        for i in 0..db {
            for j in 0..da {
                let row = i * da + j;
                for t in 0..da {
                    let v = a.get(t, j);
                    if v != 0 {
                        let col = i * da + t;
                        sys.set(row, col, (sys.get(row, col) + v) % p);
                    }
                }
                for t in 0..db {
                    let v = b.get(i, t);
                    if v != 0 {
                        let col = t * da + j;
                        sys.set(row, col, (sys.get(row, col) + p - v) % p);
                    }
                }
            }
        }
        systems.push(sys);
    }
    let sol = kernels_in_subspace(&systems, &FpMatrix::identity(p, unknowns), false)?;
    let basis = (0..sol.cols())
        .map(|c| FpMatrix::from_fn(p, db, da, |i, j| sol.get(i * da + j, c)))
        .collect();
    Ok(HomSpace {
        dim: sol.cols(),
        basis,
    })
}

/// Searches random combinations of a Hom-space basis for an invertible map.
pub fn find_invertible(hom: &HomSpace, attempts: usize, seed: u64) -> Option<FpMatrix> {
    use rand::Rng;
    let first = hom.basis.first()?;
    if !first.is_square() {
        return None;
    }
    let p = first.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let mut x = FpMatrix::zeros(p, first.rows(), first.cols());
        for b in &hom.basis {
            x = x.add(&b.scale(rng.gen_range(0..p))).ok()?;
        }
        if x.rank() == x.rows() {
            return Some(x);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zq::Family;
    use rand::Rng;

    fn random_k(p: u32, prec: u32, rng: &mut ChaCha8Rng) -> ZMat2 {
        SubgroupSpec::k(p).unwrap().random_member(prec, rng)
    }

    fn assert_homomorphism(rep: &dyn KRep, pairs: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = ipow(rep.p(), rep.precision());
        assert!(rep.act(&ZMat2::IDENTITY).unwrap().is_identity());
        for _ in 0..pairs {
            let g = random_k(rep.p(), rep.precision(), &mut rng);
            let h = random_k(rep.p(), rep.precision(), &mut rng);
            let lhs = rep.act(&g.mul_mod(&h, m)).unwrap();
            let rhs = rep.act(&g).unwrap().mul(&rep.act(&h).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn sym_examples() {
        let p = 5;
        let w1 = Weight::new(p, 1, 0).unwrap();
        assert!(sym_matrix(&ZMat2::IDENTITY, &w1).is_identity());
        let d = sym_matrix(&ZMat2::diag(2, 3), &w1);
        assert_eq!(d, FpMatrix::from_rows(p, &[vec![2, 0], vec![0, 3]]).unwrap());
        let w2 = Weight::new(p, 2, 0).unwrap();
        let u = ZMat2::upper(1);
        let s = sym_matrix(&u, &w2);
        // Columns: X^2 -> X^2, XY -> X^2 + XY, Y^2 -> X^2 + 2XY + Y^2.
        let expected = FpMatrix::from_rows(p, &[vec![1, 1, 1], vec![0, 1, 2], vec![0, 0, 1]]).unwrap();
        assert_eq!(s, expected);
        assert_eq!(s.mul(&s).unwrap(), sym_matrix(&u.mul(&u), &w2));
    }

    #[test]
    fn sym_multiplicative_including_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for r in 0..7 {
            let w = Weight::new(7, r, 3).unwrap();
            for _ in 0..50 {
                let mut rand_mat = || {
                    ZMat2::new(
                        rng.gen_range(-20..20),
                        rng.gen_range(-20..20),
                        rng.gen_range(-20..20),
                        rng.gen_range(-20..20),
                    )
                };
                let (g, h) = (rand_mat(), rand_mat());
                let lhs = sym_matrix(&g.mul(&h), &w);
                let rhs = sym_matrix(&g, &w).mul(&sym_matrix(&h, &w)).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn sigma_n_examples() {
        let p = 5;
        let w = Weight::new(p, 2, 0).unwrap();
        assert!(sigma_n_matrix(&ZMat2::IDENTITY, &w, 1, 2).unwrap().is_identity());
        assert_eq!(
            sigma_n_matrix(&ZMat2::diag(2, 3), &w, 2, 3).unwrap(),
            sym_matrix(&ZMat2::diag(3, 2), &w)
        );
        assert!(sigma_n_matrix(&ZMat2::lower(1), &w, 1, 2).is_err());
        assert!(sigma_n_matrix(&ZMat2::IDENTITY, &w, 2, 2).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k0 = SubgroupSpec::k0(p, 2).unwrap();
        let m = ipow(p, 3);
        for _ in 0..100 {
            let g = k0.random_member(3, &mut rng);
            let h = k0.random_member(3, &mut rng);
            let lhs = sigma_n_matrix(&g.mul_mod(&h, m), &w, 2, 3).unwrap();
            let rhs = sigma_n_matrix(&g, &w, 2, 3)
                .unwrap()
                .mul(&sigma_n_matrix(&h, &w, 2, 3).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn induced_dims_and_homomorphism() {
        let p = 5;
        for (r, n, dim) in [(1, 1, 12), (2, 2, 90), (0, 3, 150)] {
            let w = Weight::new(p, r, 0).unwrap();
            let ind = InducedRep::new(w, n, n + 1).unwrap();
            assert_eq!(ind.dim(), dim);
            assert_eq!(InducedRep::formula_dim(&w, n), dim);
        }
        let ind = InducedRep::new(Weight::new(p, 2, 1).unwrap(), 2, 3).unwrap();
        assert_homomorphism(&ind, 50, 4);
        assert!(InducedRep::new(Weight::new(p, 2, 1).unwrap(), 2, 2).is_err());
    }

    #[test]
    fn invariants_examples() {
        let p = 5;
        let opts = VerifyOptions::default();
        let ind = InducedRep::new(Weight::trivial(p).unwrap(), 1, 2).unwrap();
        let h = SubgroupSpec::h(p).unwrap();
        assert_eq!(invariants(&ind, &h, &opts).unwrap().dim, 6);
        for r in 0..p {
            let sym = SymRep::new(Weight::new(p, r, 0).unwrap(), 2);
            let k1 = SubgroupSpec::k1(p).unwrap();
            assert_eq!(invariants(&sym, &k1, &opts).unwrap().dim, r as usize + 1);
        }
        let triv = SymRep::new(Weight::trivial(p).unwrap(), 3);
        for f in Family::ALL {
            let s = SubgroupSpec::new(f, 1, p).unwrap();
            assert_eq!(invariants(&triv, &s, &opts).unwrap().dim, 1);
        }
    }

    #[test]
    fn invariants_match_enumeration_and_are_stable() {
        let p = 5;
        let opts = VerifyOptions::default();
        let w = Weight::new(p, 1, 0).unwrap();
        let ind = InducedRep::new(w, 1, 2).unwrap();
        let ind3 = InducedRep::new(w, 1, 3).unwrap();
        for f in Family::ALL {
            let s = SubgroupSpec::new(f, 1, p).unwrap();
            let fast = invariants(&ind, &s, &opts).unwrap();
            let brute = invariants_by_enumeration(&ind, &s, 2).unwrap();
            assert_eq!(fast.dim, brute.dim, "{s}");
            assert_eq!(fast.dim, invariants(&ind3, &s, &opts).unwrap().dim, "{s}");
        }
    }

    #[test]
    fn invariants_monotone_in_subgroup() {
        let p = 5;
        let opts = VerifyOptions::default();
        for n in 1..=2 {
            let ind = InducedRep::new(Weight::new(p, 2, 0).unwrap(), n, n + 1).unwrap();
            let dh = invariants(&ind, &SubgroupSpec::h(p).unwrap(), &opts).unwrap().dim;
            let dt = invariants(&ind, &SubgroupSpec::t1(p, n).unwrap(), &opts).unwrap().dim;
            let dk = invariants(&ind, &SubgroupSpec::k(p).unwrap(), &opts).unwrap().dim;
            assert!(dh >= dt && dt >= dk, "{dh} {dt} {dk}");
        }
    }

    #[test]
    fn hom_space_examples() {
        let p = 5;
        let triv = SymRep::new(Weight::trivial(p).unwrap(), 2);
        assert_eq!(hom_space(&triv, &triv).unwrap().dim, 1);
        let s1 = SymRep::new(Weight::new(p, 1, 0).unwrap(), 2);
        let hom = hom_space(&s1, &s1).unwrap();
        assert_eq!(hom.dim, 1);
        assert!(find_invertible(&hom, 10, 0).is_some());
        let s2 = SymRep::new(Weight::new(p, 2, 0).unwrap(), 2);
        assert_eq!(hom_space(&s1, &s2).unwrap().dim, 0);
        let big = InducedRep::new(Weight::new(p, 4, 0).unwrap(), 2, 3).unwrap();
        assert!(matches!(hom_space(&big, &big), Err(Error::Capacity(_))));
    }
}
