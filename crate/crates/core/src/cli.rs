//! The `gl2rep` command line: argument resolution, report assembly and
//! rendering. Exit codes: 0 all checks pass, 1 a mathematical check failed,
//! 2 usage or feasibility error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::growth::{
    self, dims_table, marshall_filtration, product_invariants, random_unipotent, zp_cohomology, Check, Factor,
    GrowthReport, TableFamily, TableParams,
};
use crate::tree::{hecke_structure, twist_symmetry_check, PiTruncation, TruncatedCInd};
use crate::weights::{KRep, VerifyOptions, Weight};
use crate::zq::{double_coset_count, double_coset_formula, Family, SubgroupSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "gl2rep", version, about = "Exact mod-p computations for GL_2(Q_p) representations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Prime, 5 or 7.
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Symmetric power degree, 0..=p-1.
    #[arg(long, global = true)]
    pub r: Option<u32>,
    /// Hecke eigenvalue in F_p.
    #[arg(long, global = true)]
    pub lambda: Option<u32>,
    /// Determinant twist exponent.
    #[arg(long, global = true)]
    pub a: Option<u32>,
    /// Subgroup family: K, K0, K1, Kn, K1pn, T1, H, Z1.
    #[arg(long, global = true)]
    pub subgroup: Option<String>,
    /// Level range: `3`, `1..4` (inclusive) or `1,2,4`.
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// Truncation override.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Precision override.
    #[arg(long = "N", global = true)]
    pub precision: Option<u32>,
    /// Worker threads; falls back to GL2REP_THREADS, then 1.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for all random sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Table family: ind, barR, invariants, barR-invariants, cosets.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// `key=value` file supplying defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verification suites.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Dimension table for one family.
    Dims,
    /// Invariant dimensions with bound, containment and stability checks.
    Invariants {
        /// Skip the m+1 / N+1 recomputation.
        #[arg(long)]
        no_stability: bool,
        /// Also compare with the twin parameter p-1-r (λ = 0 only).
        #[arg(long)]
        twist_symmetry: bool,
    },
    /// Equivariance, grading and rank checks for the Hecke operator.
    HeckeCheck {
        /// Random group elements for the equivariance check.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Dimension table with growth exponents.
    Growth,
    /// Cyclic ideal filtration of F_p[x]/(x^{p^{n-1}}).
    Filtration {
        /// Submodule dimension; random when omitted.
        #[arg(long)]
        d: Option<usize>,
        /// Number of random (d, n) cases when `--d` is omitted.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// H^0 = H^1 on random unipotent matrices.
    Zp {
        /// Largest matrix size.
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Invariants of a two-factor product against the product of factors.
    Product {
        #[arg(long)]
        r2: Option<u32>,
        #[arg(long)]
        lambda2: Option<u32>,
        #[arg(long)]
        subgroup2: Option<String>,
        /// Use the trivial representation as the first factor.
        #[arg(long)]
        trivial_first: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyWhat {
    /// Double-coset counts against (2n-1)(p-1)+2.
    Cosets,
}

/// Flags after merging command line, config file and defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub p: u32,
    pub r: u32,
    pub lambda: u32,
    pub a: u32,
    pub subgroup: Family,
    pub ns: Option<Vec<u32>>,
    pub m: Option<u32>,
    pub precision: Option<u32>,
    pub threads: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub family: Option<String>,
}

/// A failure that maps to an exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Consistency(_) => EXIT_CHECK_FAILED,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `3`, `1..4`, `1..=4` or `1,2,4`.
pub fn parse_n_range(s: &str) -> CliResult<Vec<u32>> {
    let bad = || CliError::usage(format!("cannot parse n range '{s}'"));
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
    let out: Vec<u32> = if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(bad());
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(num).collect::<CliResult<_>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn read_config(path: &PathBuf) -> CliResult<BTreeMap<String, String>> {
    const KEYS: [&str; 13] = [
        "p", "r", "lambda", "a", "subgroup", "n", "m", "N", "threads", "seed", "format", "out", "family",
    ];
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::usage(format!("config line {}: unknown key '{k}'", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn pick<T: std::str::FromStr>(flag: Option<T>, cfg: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("config value for '{key}' is invalid: '{v}'"))),
    }
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> CliResult<Self> {
        let cfg = match &cli.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let p = pick(cli.p, &cfg, "p")?.unwrap_or(5);
        if p != 5 && p != 7 {
            return Err(CliError::usage(format!("--p must be 5 or 7, got {p}")));
        }
        let r = pick(cli.r, &cfg, "r")?.unwrap_or(1);
        if r > p - 1 {
            return Err(CliError::usage(format!("--r must lie in 0..={}", p - 1)));
        }
        let lambda = pick(cli.lambda, &cfg, "lambda")?.unwrap_or(0);
        if lambda >= p {
            return Err(CliError::usage(format!("--lambda must lie in 0..={}", p - 1)));
        }
        let a = pick(cli.a, &cfg, "a")?.unwrap_or(0);
        let subgroup: String = pick(cli.subgroup.clone(), &cfg, "subgroup")?.unwrap_or_else(|| "Kn".into());
        let subgroup = subgroup.parse::<Family>().map_err(|e| CliError::usage(e.to_string()))?;
        let ns = match pick(cli.n.clone(), &cfg, "n")? {
            Some(s) => Some(parse_n_range(&s)?),
            None => None,
        };
        let threads = match pick(cli.threads, &cfg, "threads")? {
            Some(t) => t,
            None => match std::env::var("GL2REP_THREADS") {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::usage(format!("GL2REP_THREADS is not a number: '{v}'")))?,
                Err(_) => 1,
            },
        }
        .max(1);
        let format = match cli.format {
            Some(f) => f,
            None => match cfg.get("format").map(String::as_str) {
                None | Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some(other) => return Err(CliError::usage(format!("unknown format '{other}'"))),
            },
        };
        Ok(RunConfig {
            p,
            r,
            lambda,
            a,
            subgroup,
            ns,
            m: pick(cli.m, &cfg, "m")?,
            precision: pick(cli.precision, &cfg, "N")?,
            threads,
            seed: pick(cli.seed, &cfg, "seed")?.unwrap_or(VerifyOptions::default().seed),
            format,
            out: pick(cli.out.clone(), &cfg, "out")?,
            family: pick(cli.family.clone(), &cfg, "family")?,
        })
    }

    fn ns_or(&self, default: &[u32]) -> Vec<u32> {
        self.ns.clone().unwrap_or_else(|| default.to_vec())
    }

    fn table_params(&self) -> TableParams {
        TableParams {
            p: self.p,
            r: self.r,
            lambda: self.lambda,
            a: self.a,
            subgroup: self.subgroup,
            m: self.m,
            precision: self.precision,
            stability: false,
            seed: self.seed,
        }
    }

    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            seed: self.seed,
            ..VerifyOptions::default()
        }
    }
}

/// A rendered-ready report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub rows: Vec<growth::Row>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub exponents: Vec<Value>,
}

impl Report {
    fn new(command: &str, cfg: &RunConfig, family: &str) -> Self {
        let mut params = BTreeMap::new();
        params.insert("p".into(), json!(cfg.p));
        params.insert("r".into(), json!(cfg.r));
        params.insert("lambda".into(), json!(cfg.lambda));
        params.insert("a".into(), json!(cfg.a));
        params.insert("family".into(), json!(family));
        params.insert("subgroup".into(), json!(cfg.subgroup.name()));
        params.insert("seed".into(), json!(cfg.seed));
        if let Some(m) = cfg.m {
            params.insert("m".into(), json!(m));
        }
        if let Some(n) = cfg.precision {
            params.insert("N".into(), json!(n));
        }
        Report {
            command: command.into(),
            params,
            rows: Vec::new(),
            checks: Vec::new(),
            exponents: Vec::new(),
        }
    }

    fn absorb(&mut self, g: GrowthReport, with_exponents: bool) {
        self.rows = g.rows;
        self.checks = g.checks;
        if with_exponents {
            self.exponents = g
                .exponents
                .iter()
                .map(|e| match e {
                    growth::Exponent::Exact(k) => json!(k),
                    growth::Exponent::Approx(_) => {
                        serde_json::from_str::<Value>(&e.to_string()).unwrap_or(Value::Null)
                    }
                })
                .collect();
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn param(&self, key: &str) -> String {
        match self.params.get(key) {
            Some(Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
            None => String::new(),
        }
    }

    /// CSV rendering: the row table, then (except for `dims`) a check table.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let with_exp = !self.exponents.is_empty();
        s.push_str("p,r,lambda,a,family,n,dim");
        if with_exp {
            s.push_str(",exponent");
        }
        s.push('\n');
        let prefix = format!(
            "{},{},{},{},{}",
            self.param("p"),
            self.param("r"),
            self.param("lambda"),
            self.param("a"),
            self.param("family")
        );
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(s, "{prefix},{},{}", row.n, row.dim);
            if with_exp {
                let e = if i == 0 { String::new() } else { self.exponents[i - 1].to_string() };
                let _ = write!(s, ",{e}");
            }
            s.push('\n');
        }
        if self.command != "dims" && !self.checks.is_empty() {
            s.push_str("\ncheck,expected,actual,pass\n");
            for c in &self.checks {
                let _ = writeln!(s, "{},{},{},{}", csv_field(&c.name), csv_field(&c.expected), csv_field(&c.actual), c.pass);
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_verify_cosets(cfg: &RunConfig) -> CliResult<Report> {
    let mut rep = Report::new("verify cosets", cfg, "cosets");
    for n in cfg.ns_or(&[1, 2, 3, 4]) {
        if n == 0 {
            return Err(CliError::usage("n must be at least 1"));
        }
        let count = double_coset_count(cfg.p, n)?;
        rep.rows.push(growth::Row { n, dim: count });
        rep.checks
            .push(Check::equal(format!("coset_formula[n={n}]"), double_coset_formula(cfg.p, n), count));
    }
    Ok(rep)
}

fn table_family(cfg: &RunConfig, default: TableFamily) -> CliResult<TableFamily> {
    match &cfg.family {
        Some(f) => f.parse().map_err(|e: Error| CliError::usage(e.to_string())),
        None => Ok(default),
    }
}

fn cmd_dims(cfg: &RunConfig, command: &str, with_exponents: bool) -> CliResult<Report> {
    let family = table_family(cfg, TableFamily::Ind)?;
    let default_ns: &[u32] = match family {
        TableFamily::BarR => &[0, 1, 2],
        _ => &[1, 2],
    };
    let g = dims_table(family, &cfg.table_params(), &cfg.ns_or(default_ns), cfg.threads)?;
    let mut rep = Report::new(command, cfg, family.name());
    rep.absorb(g, with_exponents);
    Ok(rep)
}

fn cmd_invariants(cfg: &RunConfig, stability: bool, twist: bool) -> CliResult<Report> {
    let mut params = cfg.table_params();
    params.stability = stability;
    let ns = cfg.ns_or(&[1, 2]);
    if stability {
        for &n in &ns {
            let mut up = params;
            up.m = Some(params.m.unwrap_or(n + 1) + 1);
            if growth::cell_cost(&up, n)? > growth::QUOTIENT_DIM_CAP {
                return Err(CliError::usage(format!(
                    "stability re-run at n={n} exceeds the quotient cap of {}; pass --no-stability",
                    growth::QUOTIENT_DIM_CAP
                )));
            }
        }
    }
    let g = dims_table(TableFamily::Invariants, &params, &ns, cfg.threads)?;
    let mut rep = Report::new("invariants", cfg, "invariants");
    rep.params.insert("stability".into(), json!(stability));
    rep.absorb(g, true);
    if twist {
        if cfg.lambda != 0 {
            return Err(CliError::usage("--twist-symmetry needs --lambda 0"));
        }
        let opts = cfg.verify_options();
        for &n in &ns {
            let spec = SubgroupSpec::new(cfg.subgroup, n, cfg.p)?;
            let (d, twin) = twist_symmetry_check(cfg.p, cfg.r, &spec, &opts)?;
            rep.checks.push(Check::equal(
                format!("twist_symmetry_r={}_vs_{}[n={n}]", cfg.r, cfg.p - 1 - cfg.r),
                d,
                twin,
            ));
        }
    }
    Ok(rep)
}

fn cmd_hecke_check(cfg: &RunConfig, samples: usize) -> CliResult<Report> {
    let m = cfg.m.unwrap_or(2);
    if m == 0 || m > 4 {
        return Err(CliError::usage("hecke-check needs 1 <= m <= 4"));
    }
    let w = Weight::new(cfg.p, cfg.r, cfg.a as i64)?;
    let tree = TruncatedCInd::new(w, m, cfg.precision.unwrap_or(m + 3))?;
    let report = hecke_structure(&tree, samples, cfg.seed)?;
    let mut rep = Report::new("hecke-check", cfg, "hecke");
    rep.params.insert("m".into(), json!(m));
    for k in 0..=m {
        rep.rows.push(growth::Row {
            n: k,
            dim: tree.level_range(k).len(),
        });
    }
    rep.checks.push(Check::new("equivariance", true, report.equivariant, report.equivariant));
    rep.checks.push(Check::new("level_grading", true, report.graded, report.graded));
    rep.checks.push(Check::new("rank_T+_eq_dim_R_k", true, report.raising_injective, report.raising_injective));
    rep.checks.push(Check::new("rank_T-_eq_dim_R_k-1", true, report.lowering_surjective, report.lowering_surjective));
    let failures = format!("{:?}", report.lambda_kernel_failures);
    rep.checks.push(Check::new("ker_T-lambda_trivial", "[]", failures, report.lambda_kernel_failures.is_empty()));
    if cfg.r == 0 {
        let t = tree.hecke_matrix()?;
        let weight = t.col_vec(0).iter().filter(|&&x| x != 0).count();
        let units = t.col_vec(0).iter().filter(|&&x| x == 1).count();
        rep.checks.push(Check::new(
            "adjacency_origin_column",
            cfg.p + 1,
            weight,
            weight == cfg.p as usize + 1 && units == weight,
        ));
    }
    Ok(rep)
}

fn cmd_filtration(cfg: &RunConfig, d: Option<usize>, samples: usize) -> CliResult<Report> {
    use rand::Rng;
    let mut rep = Report::new("filtration", cfg, "filtration");
    let mut cases = Vec::new();
    match d {
        Some(d) => {
            let ns = cfg.ns_or(&[3]);
            for n in ns {
                cases.push((d, n));
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let ns = cfg.ns_or(&[1, 2, 3, 4]);
            for _ in 0..samples {
                let n = ns[rng.gen_range(0..ns.len())];
                let top = (cfg.p as usize).pow(n.saturating_sub(1));
                cases.push((rng.gen_range(1..=top), n));
            }
        }
    }
    for (i, &(d, n)) in cases.iter().enumerate() {
        let r = marshall_filtration(d, cfg.p, n)?;
        if cases.len() == 1 {
            for (k, &dim) in r.chain_dims.iter().enumerate() {
                rep.rows.push(growth::Row { n: k as u32 + 1, dim });
            }
        } else {
            rep.rows.push(growth::Row { n, dim: d });
        }
        rep.checks.push(Check::new(
            format!("filtration[case={i};d={d};n={n}]"),
            format!("alphas={:?}", growth::base_p_alphas(d, cfg.p)),
            format!("alphas={:?}", r.alphas),
            r.verified,
        ));
    }
    Ok(rep)
}

fn cmd_zp(cfg: &RunConfig, max_dim: usize, samples: usize) -> CliResult<Report> {
    use rand::Rng;
    if max_dim == 0 || max_dim > 64 {
        return Err(CliError::usage("--max-dim must lie in 1..=64"));
    }
    let mut rep = Report::new("zp", cfg, "zp");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..samples {
        let dim = rng.gen_range(1..=max_dim);
        let u = random_unipotent(cfg.p, dim, &mut rng);
        let (h0, h1) = zp_cohomology(&u)?;
        rep.rows.push(growth::Row { n: dim as u32, dim: h0 });
        rep.checks.push(Check::equal(format!("h0_eq_h1[sample={i}]"), h0, h1));
    }
    Ok(rep)
}

fn cmd_product(
    cfg: &RunConfig,
    r2: Option<u32>,
    lambda2: Option<u32>,
    subgroup2: Option<String>,
    trivial_first: bool,
) -> CliResult<Report> {
    let n = cfg.ns_or(&[1])[0];
    let spec1 = SubgroupSpec::new(cfg.subgroup, n, cfg.p)?;
    let family2 = match subgroup2 {
        Some(s) => s.parse::<Family>().map_err(|e| CliError::usage(e.to_string()))?,
        None => cfg.subgroup,
    };
    let spec2 = SubgroupSpec::new(family2, n, cfg.p)?;
    let m = cfg.m.unwrap_or(crate::tree::required_truncation(&spec1)?.max(crate::tree::required_truncation(&spec2)?));
    let prec = cfg.precision.unwrap_or(m + 3);
    let (r2, l2) = (r2.unwrap_or(cfg.r), lambda2.unwrap_or(cfg.lambda));
    if r2 > cfg.p - 1 || l2 >= cfg.p {
        return Err(CliError::usage("second factor parameters out of range"));
    }
    let second = PiTruncation::new(Weight::new(cfg.p, r2, cfg.a as i64)?, l2, m, prec)?;
    let first_pi;
    let first_triv;
    let first: &dyn KRep = if trivial_first {
        first_triv = growth::trivial_rep(cfg.p, prec)?;
        &first_triv
    } else {
        first_pi = PiTruncation::new(Weight::new(cfg.p, cfg.r, cfg.a as i64)?, cfg.lambda, m, prec)?;
        &first_pi
    };
    let d = first.dim() * second.dim();
    if d > growth::KRON_DIM_CAP {
        return Err(CliError::usage(format!(
            "Kronecker dimension {d} exceeds the cap of {} (estimated cost ~{:.1e} field operations)",
            growth::KRON_DIM_CAP,
            (d as f64).powi(3)
        )));
    }
    let res = product_invariants(
        &Factor { rep: first, spec: spec1 },
        &Factor { rep: &second, spec: spec2 },
        &cfg.verify_options(),
    )?;
    let mut rep = Report::new("product", cfg, "product");
    rep.params.insert("r2".into(), json!(r2));
    rep.params.insert("lambda2".into(), json!(l2));
    rep.params.insert("subgroup2".into(), json!(family2.name()));
    rep.params.insert("trivial_first".into(), json!(trivial_first));
    rep.rows.push(growth::Row { n: 1, dim: res.factor_dims[0] });
    rep.rows.push(growth::Row { n: 2, dim: res.factor_dims[1] });
    rep.checks.push(Check::equal("kron_eq_product", res.dim_product, res.dim_kron));
    Ok(rep)
}

/// Runs the parsed command and returns the report.
pub fn execute(cli: &Cli) -> CliResult<(Report, RunConfig)> {
    let cfg = RunConfig::resolve(cli)?;
    let report = match &cli.command {
        Command::Verify { what: VerifyWhat::Cosets } => cmd_verify_cosets(&cfg)?,
        Command::Dims => cmd_dims(&cfg, "dims", false)?,
        Command::Growth => cmd_dims(&cfg, "growth", true)?,
        Command::Invariants {
            no_stability,
            twist_symmetry,
        } => cmd_invariants(&cfg, !no_stability, *twist_symmetry)?,
        Command::HeckeCheck { samples } => cmd_hecke_check(&cfg, *samples)?,
        Command::Filtration { d, samples } => cmd_filtration(&cfg, *d, *samples)?,
        Command::Zp { max_dim, samples } => cmd_zp(&cfg, *max_dim, *samples)?,
        Command::Product {
            r2,
            lambda2,
            subgroup2,
            trivial_first,
        } => cmd_product(&cfg, *r2, *lambda2, subgroup2.clone(), *trivial_first)?,
    };
    Ok((report, cfg))
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
        Ok((report, cfg)) => {
            let text = match cfg.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(),
            };
            match &cfg.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                }
                None => print!("{text}"),
            }
            if report.all_pass() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_ranges() {
        assert_eq!(parse_n_range("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_n_range("1..=2").unwrap(), vec![1, 2]);
        assert_eq!(parse_n_range("3").unwrap(), vec![3]);
        assert_eq!(parse_n_range("1,3").unwrap(), vec![1, 3]);
        assert!(parse_n_range("4..1").is_err());
        assert!(parse_n_range("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["gl2rep", "verify", "cosets", "--p", "4"]), EXIT_USAGE);
        assert_eq!(run(["gl2rep", "dims", "--family", "nope"]), EXIT_USAGE);
        assert_eq!(run(["gl2rep", "bogus"]), EXIT_USAGE);
    }
}
