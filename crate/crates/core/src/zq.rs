//! Exact 2x2 integer matrices read p-adically: congruence subgroups, the
//! projective line over `Z/p^n`, and canonical vertex representatives of the
//! Bruhat-Tits tree.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::validate_prime;

/// `p^e` as an exact integer.
pub fn ipow(p: u32, e: u32) -> i128 {
    (p as i128).pow(e)
}

/// p-adic valuation; `None` for zero.
pub fn valuation(x: i128, p: u32) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let p = p as i128;
    let mut x = x;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// Inverse of `a` modulo `m`, when `gcd(a, m) = 1`.
pub fn inv_mod_i128(a: i128, m: i128) -> Option<i128> {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m))
}

/// 2x2 matrix `[[a, b], [c, d]]` with exact integer entries.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZMat2 {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl fmt::Debug for ZMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl ZMat2 {
    pub const IDENTITY: ZMat2 = ZMat2 {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    pub const fn new(a: i128, b: i128, c: i128, d: i128) -> Self {
        ZMat2 { a, b, c, d }
    }

    pub const fn diag(a: i128, d: i128) -> Self {
        ZMat2::new(a, 0, 0, d)
    }

    pub const fn upper(x: i128) -> Self {
        ZMat2::new(1, x, 0, 1)
    }

    pub const fn lower(x: i128) -> Self {
        ZMat2::new(1, 0, x, 1)
    }

    pub fn mul(&self, o: &ZMat2) -> ZMat2 {
        ZMat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn det(&self) -> i128 {
        self.a * self.d - self.b * self.c
    }

    /// Adjugate: `adj(A) * A = det(A) * I`.
    pub fn adjugate(&self) -> ZMat2 {
        ZMat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn scale(&self, s: i128) -> ZMat2 {
        ZMat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn entries(&self) -> [i128; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Entries reduced into `[0, m)`.
    pub fn reduce(&self, m: i128) -> ZMat2 {
        ZMat2::new(
            self.a.rem_euclid(m),
            self.b.rem_euclid(m),
            self.c.rem_euclid(m),
            self.d.rem_euclid(m),
        )
    }

    pub fn mul_mod(&self, o: &ZMat2, m: i128) -> ZMat2 {
        self.mul(o).reduce(m)
    }

    pub fn congruent(&self, o: &ZMat2, m: i128) -> bool {
        self.entries()
            .iter()
            .zip(o.entries())
            .all(|(x, y)| (x - y).rem_euclid(m) == 0)
    }

    pub fn is_unit_det(&self, p: u32) -> bool {
        self.det().rem_euclid(p as i128) != 0
    }

    /// Inverse modulo `m`, for a determinant prime to `m`.
    pub fn inverse_mod(&self, m: i128) -> Option<ZMat2> {
        let di = inv_mod_i128(self.det(), m)?;
        Some(self.adjugate().scale(di).reduce(m))
    }

    /// Smallest valuation among the entries; `None` for the zero matrix.
    pub fn min_valuation(&self, p: u32) -> Option<u32> {
        self.entries().iter().filter_map(|&x| valuation(x, p)).min()
    }
}

/// Congruence subgroup families of `GL_2(Z_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `GL_2(Z_p)`.
    K,
    /// `K_0(p^n)`: lower-left entry in `p^n Z_p`.
    K0,
    /// `K_1`: the first principal congruence subgroup.
    K1,
    /// `K_n`: congruent to the identity mod `p^n`.
    Kn,
    /// `K_1(p^n) = K_1 ∩ K_0(p^n)`.
    K1pn,
    /// `T_1(p^n)`: diagonal in `1 + pZ_p`, off-diagonal in `p^n Z_p`.
    T1,
    /// `H = diag(1, 1 + pZ_p)`.
    H,
    /// `Z_1`: scalars in `1 + pZ_p`.
    Z1,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::K,
        Family::K0,
        Family::K1,
        Family::Kn,
        Family::K1pn,
        Family::T1,
        Family::H,
        Family::Z1,
    ];

    pub fn is_leveled(self) -> bool {
        matches!(self, Family::K0 | Family::Kn | Family::K1pn | Family::T1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::K => "K",
            Family::K0 => "K0",
            Family::K1 => "K1",
            Family::Kn => "Kn",
            Family::K1pn => "K1pn",
            Family::T1 => "T1",
            Family::H => "H",
            Family::Z1 => "Z1",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::MalformedInput(format!("unknown subgroup family '{s}'")))
    }
}

/// A congruence subgroup: family, level and prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupSpec {
    pub family: Family,
    pub n: u32,
    pub p: u32,
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.family.is_leveled() {
            write!(f, "{}(p^{})", self.family, self.n)
        } else {
            write!(f, "{}", self.family)
        }
    }
}

impl SubgroupSpec {
    pub fn new(family: Family, n: u32, p: u32) -> Result<Self> {
        let p = validate_prime(p as u64)?;
        if family.is_leveled() && n < 1 {
            return Err(Error::Domain(format!("{family} requires level n >= 1")));
        }
        let n = if family.is_leveled() { n } else { 0 };
        Ok(SubgroupSpec { family, n, p })
    }

    pub fn k(p: u32) -> Result<Self> {
        Self::new(Family::K, 0, p)
    }

    pub fn k0(p: u32, n: u32) -> Result<Self> {
        Self::new(Family::K0, n, p)
    }

    pub fn k1(p: u32) -> Result<Self> {
        Self::new(Family::K1, 0, p)
    }

    pub fn kn(p: u32, n: u32) -> Result<Self> {
        Self::new(Family::Kn, n, p)
    }

    pub fn k1pn(p: u32, n: u32) -> Result<Self> {
        Self::new(Family::K1pn, n, p)
    }

    pub fn t1(p: u32, n: u32) -> Result<Self> {
        Self::new(Family::T1, n, p)
    }

    pub fn h(p: u32) -> Result<Self> {
        Self::new(Family::H, 0, p)
    }

    pub fn z1(p: u32) -> Result<Self> {
        Self::new(Family::Z1, 0, p)
    }

    /// Level of the principal congruence subgroup `K_l` contained in this
    /// group, or `None` when there is none (`H`, `Z_1`).
    pub fn principal_level(&self) -> Option<u32> {
        match self.family {
            Family::K | Family::K1 => Some(1),
            Family::K0 | Family::Kn | Family::K1pn | Family::T1 => Some(self.n),
            Family::H | Family::Z1 => None,
        }
    }

    /// True when the group lies inside `K_1`.
    pub fn inside_k1(&self) -> bool {
        match self.family {
            Family::K | Family::K0 => false,
            // K_1(p^n), T_1(p^n) ⊆ K_1, and K_n ⊆ K_1 for n >= 1.
            _ => true,
        }
    }

    fn min_precision(&self) -> u32 {
        self.n.max(1)
    }

    /// Membership of `g` (entries read mod `p^prec`) in the congruence image.
    pub fn contains(&self, g: &ZMat2, prec: u32) -> Result<bool> {
        if prec < self.min_precision() {
            return Err(Error::Precision(format!(
                "{self} needs precision >= {}, got {prec}",
                self.min_precision()
            )));
        }
        let p = self.p;
        let full = ipow(p, prec);
        let g = g.reduce(full);
        let divisible = |x: i128, e: u32| x.rem_euclid(ipow(p, e.min(prec))) == 0;
        let one_mod = |x: i128, e: u32| divisible(x - 1, e);
        Ok(g.is_unit_det(p)
            && match self.family {
                Family::K => true,
                Family::K0 => divisible(g.c, self.n),
                Family::K1 => one_mod(g.a, 1) && one_mod(g.d, 1) && divisible(g.b, 1) && divisible(g.c, 1),
                Family::Kn => {
                    one_mod(g.a, self.n) && one_mod(g.d, self.n) && divisible(g.b, self.n) && divisible(g.c, self.n)
                }
                Family::K1pn => one_mod(g.a, 1) && one_mod(g.d, 1) && divisible(g.b, 1) && divisible(g.c, self.n),
                Family::T1 => {
                    one_mod(g.a, 1) && one_mod(g.d, 1) && divisible(g.b, self.n) && divisible(g.c, self.n)
                }
                Family::H => one_mod(g.a, prec) && divisible(g.b, prec) && divisible(g.c, prec) && one_mod(g.d, 1),
                Family::Z1 => {
                    one_mod(g.a, 1) && divisible(g.a - g.d, prec) && divisible(g.b, prec) && divisible(g.c, prec)
                }
            })
    }

    /// Topological generators of the group, lifted to integers in `[0, p^prec)`.
    ///
    /// For each family the listed elements generate the full image mod
    /// `p^prec`: clear the lower-left entry with a lower unipotent power, the
    /// upper-right with an upper unipotent power, then the diagonal, whose
    /// entries live in a cyclic group (`1 + p^k Z/p^N` is cyclic, generated by
    /// `1 + p^k`, for odd `p`).
    pub fn generators(&self, prec: u32) -> Result<Vec<ZMat2>> {
        if self.family.is_leveled() && prec < self.n + 1 {
            return Err(Error::Precision(format!(
                "{self} generators need precision >= {}, got {prec}",
                self.n + 1
            )));
        }
        if prec < 2 {
            return Err(Error::Precision("generators need precision >= 2".into()));
        }
        let p = self.p as i128;
        let q = ipow(self.p, self.n);
        let m = ipow(self.p, prec);
        let g = primitive_root_mod_p2(self.p) as i128;
        let gens = match self.family {
            Family::K => vec![ZMat2::upper(1), ZMat2::lower(1), ZMat2::diag(g, 1)],
            Family::K0 => vec![ZMat2::upper(1), ZMat2::lower(q), ZMat2::diag(g, 1), ZMat2::diag(1, g)],
            Family::K1 => vec![
                ZMat2::diag(1 + p, 1),
                ZMat2::diag(1, 1 + p),
                ZMat2::upper(p),
                ZMat2::lower(p),
            ],
            Family::Kn => vec![
                ZMat2::diag(1 + q, 1),
                ZMat2::diag(1, 1 + q),
                ZMat2::upper(q),
                ZMat2::lower(q),
            ],
            Family::K1pn => vec![
                ZMat2::diag(1 + p, 1),
                ZMat2::diag(1, 1 + p),
                ZMat2::upper(p),
                ZMat2::lower(q),
            ],
            Family::T1 => vec![
                ZMat2::diag(1 + p, 1),
                ZMat2::diag(1, 1 + p),
                ZMat2::upper(q),
                ZMat2::lower(q),
            ],
            Family::H => vec![ZMat2::diag(1, 1 + p)],
            Family::Z1 => vec![ZMat2::diag(1 + p, 1 + p)],
        };
        Ok(gens.into_iter().map(|x| x.reduce(m)).collect())
    }

    /// Uniformly random member of the congruence image mod `p^prec`.
    pub fn random_member<R: Rng>(&self, prec: u32, rng: &mut R) -> ZMat2 {
        let p = self.p as i128;
        let m = ipow(self.p, prec);
        let q = ipow(self.p, self.n);
        let mut any = |step: i128| step * rng.gen_range(0..m / step);
        loop {
            let g = match self.family {
                Family::K => ZMat2::new(any(1), any(1), any(1), any(1)),
                Family::K0 => ZMat2::new(any(1), any(1), any(q), any(1)),
                Family::K1 => ZMat2::new(1 + any(p), any(p), any(p), 1 + any(p)),
                Family::Kn => ZMat2::new(1 + any(q), any(q), any(q), 1 + any(q)),
                Family::K1pn => ZMat2::new(1 + any(p), any(p), any(q), 1 + any(p)),
                Family::T1 => ZMat2::new(1 + any(p), any(q), any(q), 1 + any(p)),
                Family::H => ZMat2::diag(1, 1 + any(p)),
                Family::Z1 => {
                    let s = 1 + any(p);
                    ZMat2::diag(s, s)
                }
            }
            .reduce(m);
            if g.is_unit_det(self.p) {
                return g;
            }
        }
    }

    /// Every element of the congruence image mod `p^prec`, by direct
    /// enumeration of the congruence shape.
    pub fn enumerate_image(&self, prec: u32) -> Result<Vec<ZMat2>> {
        let p = self.p as i128;
        let m = ipow(self.p, prec);
        let q = ipow(self.p, self.n);
        let range = |start: i128, step: i128| -> Vec<i128> {
            (0..m / step).map(|i| (start + i * step).rem_euclid(m)).collect()
        };
        let (aa, bb, cc, dd) = match self.family {
            Family::K => (range(0, 1), range(0, 1), range(0, 1), range(0, 1)),
            Family::K0 => (range(0, 1), range(0, 1), range(0, q), range(0, 1)),
            Family::K1 => (range(1, p), range(0, p), range(0, p), range(1, p)),
            Family::Kn => (range(1, q), range(0, q), range(0, q), range(1, q)),
            Family::K1pn => (range(1, p), range(0, p), range(0, q), range(1, p)),
            Family::T1 => (range(1, p), range(0, q), range(0, q), range(1, p)),
            Family::H => (vec![1], vec![0], vec![0], range(1, p)),
            Family::Z1 => {
                return Ok(range(1, p).into_iter().map(|s| ZMat2::diag(s, s)).collect());
            }
        };
        let size = aa.len() * bb.len() * cc.len() * dd.len();
        if size > 50_000_000 {
            return Err(Error::Capacity(format!("image of {self} mod p^{prec} has {size} candidates")));
        }
        let mut out = Vec::new();
        for &a in &aa {
            for &b in &bb {
                for &c in &cc {
                    for &d in &dd {
                        let g = ZMat2::new(a, b, c, d);
                        if g.is_unit_det(self.p) {
                            out.push(g);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Smallest generator of `(Z/p^2)^×`, hence of `(Z/p^N)^×` for every `N`.
pub fn primitive_root_mod_p2(p: u32) -> u32 {
    let m = (p * p) as u64;
    let order = (p * (p - 1)) as u64;
    let mut factors = vec![p as u64];
    let mut x = (p - 1) as u64;
    let mut f = 2;
    while x > 1 {
        if x.is_multiple_of(f) {
            factors.push(f);
            while x.is_multiple_of(f) {
                x /= f;
            }
        }
        f += 1;
    }
    (2..m)
        .find(|&g| g % p as u64 != 0 && factors.iter().all(|&q| crate::gf::pow_mod(g, order / q, m) != 1))
        .expect("a primitive root exists") as u32
}

/// Closure of a generator set under multiplication mod `p^prec` (BFS).
pub fn closure_size(gens: &[ZMat2], prec: u32, p: u32, cap: usize) -> Result<usize> {
    let m = ipow(p, prec);
    let mut seen: HashSet<ZMat2> = HashSet::new();
    let mut frontier = vec![ZMat2::IDENTITY];
    seen.insert(ZMat2::IDENTITY);
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = x.mul_mod(g, m);
            if seen.insert(y) {
                if seen.len() > cap {
                    return Err(Error::Capacity(format!("group closure exceeds {cap} elements")));
                }
                frontier.push(y);
            }
        }
    }
    Ok(seen.len())
}

/// The Teichmüller lift of a nonzero residue: the `(p-1)`-th root of unity
/// mod `p^prec` congruent to `lam` mod `p`.
pub fn teichmuller(lam: i128, p: u32, prec: u32) -> Result<i128> {
    if lam.rem_euclid(p as i128) == 0 {
        return Err(Error::Domain("Teichmüller lift of 0 is undefined".into()));
    }
    let m = ipow(p, prec);
    let mut x = lam.rem_euclid(p as i128);
    // Each application of x -> x^p gains one p-adic digit.
    for _ in 0..prec {
        let mut y = 1i128;
        for _ in 0..p {
            y = y * x % m;
        }
        x = y;
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum P1Kind {
    /// `[c : 1]`, `c` mod `p^n`.
    Affine,
    /// `[1 : d]`, `d ∈ pZ/p^n`.
    InfiniteBranch,
}

/// A point of `P^1(Z/p^n)`, indexing a right coset `K_0(p^n) γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct P1Point {
    pub kind: P1Kind,
    pub coord: i128,
    pub n: u32,
    pub p: u32,
}

impl P1Point {
    pub fn count(p: u32, n: u32) -> usize {
        ((p + 1) as usize) * (p as usize).pow(n - 1)
    }

    /// Position in the order returned by [`p1_points`].
    pub fn index(&self) -> usize {
        match self.kind {
            P1Kind::Affine => self.coord as usize,
            P1Kind::InfiniteBranch => ipow(self.p, self.n) as usize + (self.coord / self.p as i128) as usize,
        }
    }

    /// Canonical coset representative: `[[1,0],[c,1]]` or `[[0,-1],[1,d]]`.
    pub fn representative(&self) -> ZMat2 {
        match self.kind {
            P1Kind::Affine => ZMat2::lower(self.coord),
            P1Kind::InfiniteBranch => ZMat2::new(0, -1, 1, self.coord),
        }
    }

    /// Point of the row vector `(c, d)`, which must be primitive mod `p`.
    pub fn from_row(c: i128, d: i128, p: u32, n: u32) -> Result<Self> {
        let q = ipow(p, n);
        let pi = p as i128;
        if d.rem_euclid(pi) != 0 {
            let di = inv_mod_i128(d, q).expect("unit");
            Ok(P1Point {
                kind: P1Kind::Affine,
                coord: (c * di).rem_euclid(q),
                n,
                p,
            })
        } else if c.rem_euclid(pi) != 0 {
            let ci = inv_mod_i128(c, q).expect("unit");
            Ok(P1Point {
                kind: P1Kind::InfiniteBranch,
                coord: (d * ci).rem_euclid(q),
                n,
                p,
            })
        } else {
            Err(Error::Domain(format!("row ({c}, {d}) is not primitive mod {p}")))
        }
    }
}

/// All points of `P^1(Z/p^n)`: affine points `[c:1]` for `c = 0..p^n`, then
/// `[1:d]` for `d = p, 2p, ..` below `p^n`.
pub fn p1_points(p: u32, n: u32) -> Result<Vec<P1Point>> {
    if n < 1 {
        return Err(Error::Domain("P^1(Z/p^n) needs n >= 1".into()));
    }
    let q = ipow(p, n);
    let pi = p as i128;
    let mut pts: Vec<P1Point> = (0..q)
        .map(|c| P1Point {
            kind: P1Kind::Affine,
            coord: c,
            n,
            p,
        })
        .collect();
    pts.extend((0..q / pi).map(|k| P1Point {
        kind: P1Kind::InfiniteBranch,
        coord: k * pi,
        n,
        p,
    }));
    Ok(pts)
}

/// Writes `g ≡ k0 · γ_x (mod p^n)` with `k0 ∈ K_0(p^n)`. The returned `k0` is
/// exact modulo `p^prec`, where `g` is read.
pub fn coset_decompose(g: &ZMat2, p: u32, n: u32, prec: u32) -> Result<(P1Point, ZMat2)> {
    if n < 1 || prec < n {
        return Err(Error::Precision(format!("coset decomposition needs 1 <= n <= prec, got n={n}, prec={prec}")));
    }
    if !g.is_unit_det(p) {
        return Err(Error::Domain(format!("{g:?} is not invertible mod {p}")));
    }
    let m = ipow(p, prec);
    let x = P1Point::from_row(g.c, g.d, p, n)?;
    let gamma_inv = x.representative().inverse_mod(m).expect("unit determinant");
    let k0 = g.mul_mod(&gamma_inv, m);
    debug_assert!(k0.c.rem_euclid(ipow(p, n)) == 0);
    Ok((x, k0))
}

/// Number of orbits of `H = diag(1, 1+pZ_p)` acting on the right of
/// `K_0(p^n) \ K`, i.e. `|K_0(p^n) \ K / H|`.
pub fn double_coset_count(p: u32, n: u32) -> Result<usize> {
    validate_prime(p as u64)?;
    let pts = p1_points(p, n)?;
    let q = ipow(p, n);
    let u = 1 + p as i128;
    let mut seen = vec![false; pts.len()];
    let mut orbits = 0;
    for start in &pts {
        if seen[start.index()] {
            continue;
        }
        orbits += 1;
        let mut x = *start;
        while !seen[x.index()] {
            seen[x.index()] = true;
            let g = x.representative();
            // Bottom row (c, d) * diag(1, u) = (c, d u).
            x = P1Point::from_row(g.c, (g.d * u).rem_euclid(q), p, n)?;
        }
    }
    Ok(orbits)
}

pub fn double_coset_formula(p: u32, n: u32) -> usize {
    (2 * n as usize - 1) * (p as usize - 1) + 2
}

/// Outcome of conjugating `K_1(p^n)` by `D = diag(1, p^⌊n/2⌋)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConjugationReport {
    pub n: u32,
    /// Largest `n'` with `D^{-1} K_1(p^n) D ⊆ T_1(p^{n'})`.
    pub n_prime: u32,
    /// `[T_1(p^{n'}) : D^{-1} K_1(p^n) D]`.
    pub index: u64,
    pub upper_valuation: u32,
    pub lower_valuation: u32,
}

impl ConjugationReport {
    pub fn index_at_most_p(&self, p: u32) -> bool {
        self.index <= p as u64
    }

    /// `|n' - n/2| <= 1`.
    pub fn level_close_to_half(&self) -> bool {
        (2 * self.n_prime as i64 - self.n as i64).abs() <= 2
    }
}

/// `D^{-1} [[a,b],[c,d]] D = [[a, b p^s], [c p^{-s}, d]]` with `s = ⌊n/2⌋`, so
/// the conjugate of `K_1(p^n)` has off-diagonal valuations `1 + s` (upper) and
/// `n - s` (lower), with unconstrained units beyond those.
pub fn conjugation_report(p: u32, n: u32) -> Result<ConjugationReport> {
    validate_prime(p as u64)?;
    if n < 1 {
        return Err(Error::Domain("n >= 1 required".into()));
    }
    let s = n / 2;
    let upper = 1 + s;
    let lower = n - s;
    let n_prime = upper.min(lower);
    let index = (p as u64).pow((upper - n_prime) + (lower - n_prime));
    Ok(ConjugationReport {
        n,
        n_prime,
        index,
        upper_valuation: upper,
        lower_valuation: lower,
    })
}

/// `D^{-1} g D = [[a, b p^s], [c / p^s, d]]` for `D = diag(1, p^s)`; the
/// lower-left entry of `g` must be divisible by `p^s`.
pub fn conjugate_by_d(g: &ZMat2, p: u32, s: u32) -> Result<ZMat2> {
    let q = ipow(p, s);
    if g.c % q != 0 {
        return Err(Error::Domain("lower-left entry not divisible by p^s".into()));
    }
    Ok(ZMat2::new(g.a, g.b * q, g.c / q, g.d))
}

/// Canonical vertex representatives: `g^0_{k,j} = [[p^k, j], [0, 1]]` with
/// `j` mod `p^k`, and `g^1_{k,j} = [[1, 0], [p j, p^k]]` with `j` mod `p^{k-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub level: u32,
    pub branch: u8,
    pub index: i128,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex {
        level: 0,
        branch: 0,
        index: 0,
    };

    pub fn matrix(&self, p: u32) -> ZMat2 {
        let q = ipow(p, self.level);
        match self.branch {
            0 => ZMat2::new(q, self.index, 0, 1),
            _ => ZMat2::new(1, 0, p as i128 * self.index, q),
        }
    }

    /// Number of vertices at distance `k` from the origin.
    pub fn count_at_level(p: u32, k: u32) -> usize {
        if k == 0 {
            1
        } else {
            (p as usize + 1) * (p as usize).pow(k - 1)
        }
    }

    /// Vertices at distance `k`, branch 0 first.
    pub fn at_level(p: u32, k: u32) -> Vec<Vertex> {
        if k == 0 {
            return vec![Vertex::ORIGIN];
        }
        let mut out: Vec<Vertex> = (0..ipow(p, k))
            .map(|j| Vertex {
                level: k,
                branch: 0,
                index: j,
            })
            .collect();
        out.extend((0..ipow(p, k - 1)).map(|j| Vertex {
            level: k,
            branch: 1,
            index: j,
        }));
        out
    }

    /// Position of this vertex among [`Vertex::at_level`] of its level.
    pub fn position_in_level(&self, p: u32) -> usize {
        match self.branch {
            0 => self.index as usize,
            _ => ipow(p, self.level) as usize + self.index as usize,
        }
    }
}

/// `A = p^{e0} · g^t_{k,j} · k2` with `k2` integral of unit determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalVertex {
    pub p_power: u32,
    pub vertex: Vertex,
    pub k2: ZMat2,
}

pub fn vertex_canonicalize(a: &ZMat2, p: u32) -> Result<CanonicalVertex> {
    let det = a.det();
    if det == 0 {
        return Err(Error::Domain("singular matrix has no vertex".into()));
    }
    let e0 = a.min_valuation(p).expect("nonzero det");
    let scale = ipow(p, e0);
    let a1 = ZMat2::new(a.a / scale, a.b / scale, a.c / scale, a.d / scale);
    let k = valuation(a1.det(), p).expect("nonzero det");
    if k == 0 {
        return Ok(CanonicalVertex {
            p_power: e0,
            vertex: Vertex::ORIGIN,
            k2: a1,
        });
    }
    let q = ipow(p, k);
    let pi = p as i128;
    // Rows of adj(A1) annihilate the lattice A1 Z_p^2 modulo p^k; a primitive
    // one generates the annihilator.
    let adj = a1.adjugate();
    let rows = [(adj.a, adj.b), (adj.c, adj.d)];
    let &(r1, r2) = rows
        .iter()
        .find(|(x, y)| x.rem_euclid(pi) != 0 || y.rem_euclid(pi) != 0)
        .ok_or_else(|| Error::Consistency("matrix not primitive after removing p-power".into()))?;
    let vertex = if r1.rem_euclid(pi) != 0 {
        // Functional (1, -j).
        let j = (-r2 * inv_mod_i128(r1, q).expect("unit")).rem_euclid(q);
        Vertex {
            level: k,
            branch: 0,
            index: j,
        }
    } else {
        // Functional (-p j, 1).
        let pj = (-r1 * inv_mod_i128(r2, q).expect("unit")).rem_euclid(q);
        Vertex {
            level: k,
            branch: 1,
            index: pj / pi,
        }
    };
    let g = vertex.matrix(p);
    let num = g.adjugate().mul(&a1);
    if num.entries().iter().any(|x| x % q != 0) {
        return Err(Error::Consistency(format!("{a:?} does not factor through vertex {vertex:?}")));
    }
    let k2 = ZMat2::new(num.a / q, num.b / q, num.c / q, num.d / q);
    Ok(CanonicalVertex {
        p_power: e0,
        vertex,
        k2,
    })
}
