use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::sync::Arc;

use elemsub::bridge::{bridge_check, BridgeReport};
use elemsub::evariety::{self, r_max, Budget, EnumError, PointSet, RootType};
use elemsub::orbits::{
    assemble_census, census_prime, table_report, InvariantKey, MergeProbe, OrbitCensus, OrbitError, OrbitRecord,
    PrimeCensus,
};
use elemsub::springer::SuiteReport;
use elemsub::{orbit_partition, springer_identity_suite, AmbientAlgebra, Family, FieldCtx, GroupGenerators, SpringerMap};
use serde::Serialize;
use thiserror::Error;

use crate::cache::{self, CacheError, CacheHeader};
use crate::{Cli, Command, Format, MethodArg, Opts};

#[derive(Debug, Error)]
pub enum CmdError {
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Math(String),
    #[error("{0}")]
    Resource(String),
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Math(_) => 1,
            CmdError::Usage(_) => 2,
            CmdError::Resource(_) => 3,
        }
    }
}

impl From<EnumError> for CmdError {
    fn from(e: EnumError) -> Self {
        match e {
            EnumError::LineBudget { .. } | EnumError::ScanLimit { .. } | EnumError::FormCap { .. } => {
                CmdError::Resource(e.to_string())
            }
            EnumError::Unsupported(_) | EnumError::Lie(_) => CmdError::Usage(e.to_string()),
        }
    }
}

impl From<OrbitError> for CmdError {
    fn from(e: OrbitError) -> Self {
        match e {
            OrbitError::Enum(inner) => inner.into(),
            OrbitError::FormCap { .. } => CmdError::Resource(e.to_string()),
            OrbitError::Unsupported(_) | OrbitError::BadPrimes { .. } | OrbitError::Lie(_) => {
                CmdError::Usage(e.to_string())
            }
            _ => CmdError::Math(e.to_string()),
        }
    }
}

impl From<CacheError> for CmdError {
    fn from(e: CacheError) -> Self {
        CmdError::Resource(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CmdError>;

pub fn run(cli: &Cli) -> Result<()> {
    let o = &cli.opts;
    if o.budget_lines == 0 || o.budget_forms == 0 {
        return Err(CmdError::Usage("budgets must be positive".into()));
    }
    if o.d == 0 {
        return Err(CmdError::Usage("--d must be at least 1".into()));
    }
    match cli.command {
        Command::VerifySpringer => verify_springer(o),
        Command::Enumerate => enumerate(o),
        Command::Orbits => orbits(o),
        Command::Census => census(o),
        Command::Bridge => bridge(o),
        Command::Rmax => rmax(o),
        Command::Report => report(o),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| CmdError::Usage(format!("--{flag} is required")))
}

fn budget(o: &Opts) -> Budget {
    Budget { lines: o.budget_lines, forms: o.budget_forms }
}

fn field(p: u32, d: u32) -> Result<FieldCtx> {
    FieldCtx::new(p, d).map_err(|e| CmdError::Usage(e.to_string()))
}

fn algebra(o: &Opts) -> Result<Arc<AmbientAlgebra>> {
    let n = need(o.n, "n")?;
    let f = field(need(o.p, "p")?, o.d)?;
    AmbientAlgebra::new(o.family, n, &f).map(Arc::new).map_err(|e| CmdError::Usage(e.to_string()))
}

fn emit(o: &Opts, text: &str) -> Result<()> {
    match &o.out {
        Some(path) => fs::write(path, text).map_err(|e| CmdError::Resource(format!("{}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CmdError::Resource(e.to_string()))
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn rows_text(rows: &[Vec<u32>]) -> String {
    let rows: Vec<String> =
        rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
    rows.join("; ")
}

fn verify_springer(o: &Opts) -> Result<()> {
    let n = need(o.n, "n")?;
    let f = field(need(o.p, "p")?, o.d)?;
    let map = SpringerMap::new(&f, n).map_err(|e| CmdError::Usage(e.to_string()))?;
    let trials = o.trials.unwrap_or(1000);
    if trials == 0 {
        eprintln!("warning: 0 trials requested; the suite passes vacuously");
    }
    let report = springer_identity_suite(&map, trials, o.seed);
    emit(o, &render_suite(o.format, &report))?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CmdError::Math(format!("{} failing trial(s)", report.total_failures())))
    }
}

fn render_suite(format: Format, report: &SuiteReport) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let mut s = String::from("check,trials,passed,failed\n");
            for c in &report.checks {
                let _ = writeln!(s, "{},{},{},{}", c.name, c.trials, c.passed, c.failed);
            }
            s
        }
        Format::Md => {
            let mut s = format!("n={}, p={}, d={}, seed={}\n\n", report.n, report.p, report.d, report.seed);
            s.push_str("| check | trials | passed | failed |\n|---|---|---|---|\n");
            for c in &report.checks {
                let _ = writeln!(s, "| {} | {} | {} | {} |", c.name, c.trials, c.passed, c.failed);
            }
            s
        }
    }
}

fn point_set(o: &Opts, alg: &Arc<AmbientAlgebra>, r: usize) -> Result<PointSet> {
    let b = budget(o);
    let seeded = match o.method {
        MethodArg::Auto => alg.family() != Family::So,
        MethodArg::Seeded => true,
        MethodArg::Naive => false,
    };
    Ok(if seeded { evariety::enumerate_seeded(alg, r, &b)? } else { evariety::enumerate_naive(alg, r, &b)? })
}

fn enumerate(o: &Opts) -> Result<()> {
    let alg = algebra(o)?;
    let r = need(o.r, "r")?;
    let pts = point_set(o, &alg, r)?;
    let text = match o.format {
        Format::Json => {
            let mut buf = Vec::new();
            pts.write_json_lines(&mut buf).map_err(|e| CmdError::Resource(e.to_string()))?;
            String::from_utf8(buf).expect("JSON is UTF-8")
        }
        Format::Csv => {
            let mut s = String::from("index,basis\n");
            for (i, sub) in pts.subspaces().enumerate() {
                let _ = writeln!(s, "{i},{}", rows_text(&sub.to_int_rows()));
            }
            s
        }
        Format::Md => format!("| algebra | r | points |\n|---|---|---|\n| {} | {r} | {} |\n", alg.descriptor(), pts.len()),
    };
    emit(o, &text)?;
    if o.out.is_some() {
        eprintln!("{} points", pts.len());
    }
    Ok(())
}

#[derive(Serialize)]
struct OrbitOut {
    size: u64,
    stabilizer_order: Option<String>,
    representative: Vec<Vec<u32>>,
    invariant_key: InvariantKey,
}

#[derive(Serialize)]
struct OrbitsOut {
    family: Family,
    n: usize,
    r: usize,
    q: u32,
    total_points: usize,
    group_order: Option<String>,
    orbits: Vec<OrbitOut>,
}

fn orbit_out(rec: &OrbitRecord) -> OrbitOut {
    OrbitOut {
        size: rec.size,
        stabilizer_order: rec.stabilizer_order.map(|s| s.to_string()),
        representative: rec.representative.space().to_int_rows(),
        invariant_key: rec.invariant_key.clone(),
    }
}

fn orbits(o: &Opts) -> Result<()> {
    let alg = algebra(o)?;
    let r = need(o.r, "r")?;
    let gens = match alg.family() {
        Family::Gl | Family::Sl => GroupGenerators::gl(alg.n(), alg.field()),
        Family::U => GroupGenerators::unitriangular(alg.n(), alg.field()),
        Family::So => return Err(CmdError::Usage("orbits need a gl, sl or u algebra".into())),
    };
    let pts = point_set(o, &alg, r)?;
    let recs = orbit_partition(&pts, &gens)?;
    let out = OrbitsOut {
        family: alg.family(),
        n: alg.n(),
        r,
        q: alg.field().q(),
        total_points: pts.len(),
        group_order: gens.group_order().map(|g| g.to_string()),
        orbits: recs.iter().map(orbit_out).collect(),
    };
    let text = match o.format {
        Format::Json => json(&out),
        Format::Csv => {
            let mut s = String::from("index,size,stabilizer_order,representative\n");
            for (i, rec) in out.orbits.iter().enumerate() {
                let stab = rec.stabilizer_order.clone().unwrap_or_default();
                let _ = writeln!(s, "{i},{},{stab},{}", rec.size, rows_text(&rec.representative));
            }
            s
        }
        Format::Md => {
            let mut s = format!("{} points of rank {r} in {}\n\n", out.total_points, alg.descriptor());
            s.push_str("| size | stabilizer | representative |\n|---|---|---|\n");
            for rec in &out.orbits {
                let stab = rec.stabilizer_order.clone().unwrap_or_else(|| "-".into());
                let _ = writeln!(s, "| {} | {stab} | {} |", rec.size, rows_text(&rec.representative));
            }
            s
        }
    };
    emit(o, &text)
}

fn probe(o: &Opts) -> MergeProbe {
    let mut probe = MergeProbe { seed: o.seed, ..MergeProbe::default() };
    if let Some(t) = o.trials {
        probe.trials = t.min(u32::MAX as usize) as u32;
    }
    probe
}

/// Loads the census for one prime from the cache, or computes and stores it.
fn prime_census(o: &Opts, family: Family, n: usize, r: usize, p: u32, probe: &MergeProbe) -> Result<PrimeCensus> {
    let f = field(p, 1)?;
    let header = CacheHeader::new(family, n, r, &f, probe);
    let path = cache::path_for(&o.cache_dir, family, n, r, p);
    if path.exists() && !o.force {
        let (_, snap) = cache::load(&path, Some(&header))?;
        return PrimeCensus::from_snapshot(&snap)
            .map_err(|e| CmdError::Resource(format!("cache file {} is corrupt: {e}", path.display())));
    }
    let pc = census_prime(family, n, r, p, &budget(o), probe)?;
    cache::store(&path, &header, &pc.snapshot(family, n, r))?;
    Ok(pc)
}

#[derive(Serialize)]
struct FamilyOut {
    sizes: Vec<(u32, u64)>,
    polynomial: Option<String>,
    coefficients: Option<Vec<String>>,
    degree: Option<usize>,
    verified: bool,
    classes_fused: usize,
}

#[derive(Serialize)]
struct CensusOut {
    family: Family,
    n: usize,
    r: usize,
    primes: Vec<u32>,
    total_points: Vec<(u32, u64)>,
    degree_bound: usize,
    /// Number of G(F_p)-classes before fusing over extensions.
    class_counts: Vec<(u32, usize)>,
    count_flags: Vec<u32>,
    orbit_count: usize,
    max_degree: Option<usize>,
    verified: bool,
    families: Vec<FamilyOut>,
}

fn census_out(c: &OrbitCensus) -> CensusOut {
    CensusOut {
        family: c.family,
        n: c.n,
        r: c.r,
        primes: c.primes.clone(),
        total_points: c.per_prime.iter().map(|pc| (pc.p, pc.total_points)).collect(),
        degree_bound: c.degree_bound,
        class_counts: c.primes.iter().copied().zip(c.class_counts.iter().copied()).collect(),
        count_flags: c.count_flags.clone(),
        orbit_count: c.orbit_count(),
        max_degree: c.max_degree(),
        verified: c.all_verified(),
        families: c
            .families
            .iter()
            .map(|f| FamilyOut {
                sizes: f.sizes.clone(),
                polynomial: f.polynomial.as_ref().map(|p| p.to_string()),
                coefficients: f.polynomial.as_ref().map(|p| p.coeffs().iter().map(|c| c.to_string()).collect()),
                degree: f.degree,
                verified: f.verified,
                classes_fused: f.invariant_keys.len(),
            })
            .collect(),
    }
}

fn census(o: &Opts) -> Result<()> {
    let n = need(o.n, "n")?;
    let r = need(o.r, "r")?;
    if o.primes.is_empty() {
        return Err(CmdError::Usage("--primes is required".into()));
    }
    if o.d != 1 {
        return Err(CmdError::Usage("censuses run over prime fields; use --d 1".into()));
    }
    if let Some(&bad) = o.primes.iter().find(|&&p| (p as usize) < n) {
        return Err(CmdError::Usage(format!("prime {bad} is below n = {n}")));
    }
    let probe = probe(o);
    let per = o
        .primes
        .iter()
        .map(|&p| prime_census(o, o.family, n, r, p, &probe))
        .collect::<Result<Vec<_>>>()?;
    let c = assemble_census(o.family, n, r, per)?;
    let out = census_out(&c);
    let text = match o.format {
        Format::Json => json(&out),
        Format::Csv => {
            let mut s = String::from("family_index,p,size,polynomial,degree,verified\n");
            for (i, f) in out.families.iter().enumerate() {
                for (p, size) in &f.sizes {
                    let poly = f.polynomial.clone().unwrap_or_default();
                    let deg = f.degree.map_or(String::new(), |d| d.to_string());
                    let _ = writeln!(s, "{i},{p},{size},{poly},{deg},{}", f.verified);
                }
            }
            s
        }
        Format::Md => table_report(std::slice::from_ref(&c)).to_markdown(),
    };
    emit(o, &text)
}

#[derive(Serialize)]
struct BridgeOut {
    family: Family,
    n: usize,
    r: usize,
    p: u32,
    d: u32,
    #[serde(flatten)]
    report: BridgeReport,
    passed: bool,
}

fn bridge(o: &Opts) -> Result<()> {
    let alg = algebra(o)?;
    let r = need(o.r, "r")?;
    let pts = point_set(o, &alg, r)?;
    let points: Vec<_> = pts.points().collect();
    let report = bridge_check(&points);
    let passed = report.all_passed();
    let out = BridgeOut { family: alg.family(), n: alg.n(), r, p: alg.field().p(), d: alg.field().d(), report, passed };
    let text = match o.format {
        Format::Json => json(&out),
        Format::Csv => format!(
            "points,distinct_images,rank_failures,linearity_failures,round_trip_failures,passed\n{},{},{},{},{},{}\n",
            out.report.points,
            out.report.distinct_images,
            out.report.rank_failures,
            out.report.linearity_failures,
            out.report.round_trip_failures,
            passed
        ),
        Format::Md => format!(
            "| points | distinct images | rank failures | linearity failures | round-trip failures | passed |\n\
             |---|---|---|---|---|---|\n| {} | {} | {} | {} | {} | {} |\n",
            out.report.points,
            out.report.distinct_images,
            out.report.rank_failures,
            out.report.linearity_failures,
            out.report.round_trip_failures,
            passed
        ),
    };
    emit(o, &text)?;
    if passed {
        Ok(())
    } else {
        Err(CmdError::Math("bridge is not a bijection on the enumerated points".into()))
    }
}

#[derive(Serialize)]
struct RmaxOut {
    #[serde(rename = "type")]
    root_type: String,
    r_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    enumerated: Option<usize>,
}

fn rmax(o: &Opts) -> Result<()> {
    let (root, tabulated) = match &o.root_type {
        Some(t) => {
            let root: RootType = t.parse().map_err(|e: evariety::RootTypeError| CmdError::Usage(e.to_string()))?;
            let v = r_max(root).map_err(|e| CmdError::Usage(e.to_string()))?;
            (root, v)
        }
        None => {
            let n = need(o.n, "n")?;
            if o.family != Family::Gl || n < 2 {
                return Err(CmdError::Usage("without --type, rmax needs --family gl and --n >= 2".into()));
            }
            let root = RootType::A(n - 1);
            (root, r_max(root).map_err(|e| CmdError::Usage(e.to_string()))?)
        }
    };
    let enumerated = match (o.n, o.p) {
        (Some(n), Some(_)) if o.root_type.is_none() => Some(largest_nonempty(o, n)?),
        _ => None,
    };
    let out = RmaxOut { root_type: root.to_string(), r_max: tabulated, enumerated };
    let text = match o.format {
        Format::Json => json(&out),
        Format::Csv => format!(
            "type,r_max,enumerated\n{},{},{}\n",
            out.root_type,
            out.r_max,
            enumerated.map_or(String::new(), |e| e.to_string())
        ),
        Format::Md => format!(
            "| type | r_max | enumerated |\n|---|---|---|\n| {} | {} | {} |\n",
            out.root_type,
            out.r_max,
            enumerated.map_or("-".to_string(), |e| e.to_string())
        ),
    };
    emit(o, &text)?;
    match enumerated {
        Some(e) if e != tabulated => Err(CmdError::Math(format!("enumeration gives {e}, table gives {tabulated}"))),
        _ => Ok(()),
    }
}

/// Largest `r` with `E(r, gl_n)(F_p)` nonempty, found by stepping `r` upward.
fn largest_nonempty(o: &Opts, n: usize) -> Result<usize> {
    let alg = algebra(o)?;
    let mut last = 0;
    for r in 1..=n * n {
        let seeds = evariety::seed_points(&alg, r, &budget(o))?;
        if seeds.is_empty() {
            break;
        }
        last = r;
    }
    Ok(last)
}

fn report(o: &Opts) -> Result<()> {
    let mut groups: BTreeMap<(Family, usize, usize), Vec<PrimeCensus>> = BTreeMap::new();
    for path in cache::list(&o.cache_dir)? {
        let (header, snap) = cache::load(&path, None)?;
        if header.family != o.family {
            continue;
        }
        let pc = PrimeCensus::from_snapshot(&snap)
            .map_err(|e| CmdError::Resource(format!("cache file {} is corrupt: {e}", path.display())))?;
        groups.entry((header.family, header.n, header.r)).or_default().push(pc);
    }
    if groups.is_empty() {
        eprintln!("warning: no cached censuses for family {} in {}", o.family, o.cache_dir.display());
    }
    let censuses = groups
        .into_iter()
        .map(|((family, n, r), per)| assemble_census(family, n, r, per))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let table = table_report(&censuses);
    let text = match o.format {
        Format::Json => json(&table),
        Format::Csv => table.to_csv(),
        Format::Md => table.to_markdown(),
    };
    emit(o, &text)
}
