//! Batch front end for the toric-charges toolkit: parse fan descriptions,
//! run verification suites, evaluate central charges, and emit JSON reports.
//!
//! Exit codes: 0 on success, 1 on verification failure, 2 on input errors.

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

use toric_charges::arith::{Q, Z};
use toric_charges::cohomology::Cohomology;
use toric_charges::duality;
use toric_charges::hypergeometric::{
    b_central_charge, termwise_bbgkz_check, LogBranch, SeriesTruncation,
};
use toric_charges::io;
use toric_charges::ktheory::KClass;
use toric_charges::lattice::{LatticePoint, StackyFan};
use toric_charges::periods::{
    a_central_charge, asymptotics_check, bbgkz_residual, QuadratureSpec,
};

#[derive(Parser)]
#[command(
    name = "toric-charges",
    version,
    about = "Central charges on toric Calabi-Yau stacks: describe fans, \
             evaluate A/B-brane charges, and run verification suites"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Bbgkz,
    Asymptotics,
    Pairing,
    Main,
    Volume,
    Beta,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    #[value(alias = "A")]
    A,
    #[value(alias = "B")]
    B,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    /// Plain f64 accumulation.
    Double,
    /// Compensated (Kahan-Babuska) summation in quadrature and series
    /// reductions; still f64 arithmetic, not a wider float type.
    Extended,
}

#[derive(clap::Args)]
struct NumericOpts {
    /// Series truncation: l^1 bound on kernel-lattice coordinates.
    #[arg(long)]
    trunc: Option<i64>,
    #[arg(long, value_enum, default_value = "double")]
    precision: Precision,
    /// Relative quadrature tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Minimum quadrature box half-width (grown automatically).
    #[arg(long)]
    box_radius: Option<f64>,
    /// Maximum number of adaptive quadrature subdivisions.
    #[arg(long)]
    max_subdiv: Option<usize>,
}

impl NumericOpts {
    fn truncation(&self) -> SeriesTruncation {
        let mut t = SeriesTruncation::default();
        if let Some(k) = self.trunc {
            t.degree_bound = k;
        }
        t.compensated = self.precision == Precision::Extended;
        t
    }

    fn quadrature(&self) -> QuadratureSpec {
        let mut q = QuadratureSpec::default();
        if let Some(r) = self.rel_tol {
            q.rel_tol = r;
        }
        if let Some(a) = self.abs_tol {
            q.abs_tol = a;
        }
        if let Some(r) = self.box_radius {
            q.box_radius = r;
        }
        if let Some(m) = self.max_subdiv {
            q.max_subdivisions = m;
        }
        q.compensated = self.precision == Precision::Extended;
        q
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Summarize a fan: twisted sectors, cohomology dimensions, volumes.
    Describe {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exit 0 iff every check passes.
    Verify {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long, value_enum)]
        suite: Suite,
        /// Pass/fail tolerance where the suite is numeric.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        numeric: NumericOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a central charge Z^A_c(x) or Z^B_c(x).
    Charge {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long, value_enum)]
        side: Side,
        /// Lattice point, comma-separated: --c 0,0,1
        #[arg(long)]
        c: String,
        /// Evaluation point, comma-separated positive reals: --x 1,1,1,9
        #[arg(long)]
        x: Option<String>,
        /// Alternatively, a point on the curve x_i = t^{-psi_i}.
        #[arg(long)]
        t: Option<f64>,
        /// K-class file (side B only); defaults to the structure sheaf.
        #[arg(long)]
        e: Option<PathBuf>,
        #[command(flatten)]
        numeric: NumericOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the exact xi-coefficient table for a generic direction.
    XiTable {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare Z^A along the curve x_i = t^{-psi_i} with its predicted
    /// leading asymptotics.
    Asymptotics {
        #[arg(long)]
        fan: PathBuf,
        /// Lattice point, comma-separated.
        #[arg(long)]
        c: String,
        /// t grid, comma-separated.
        #[arg(long, default_value = "20,40,80,160")]
        t: String,
        /// Bound on the final deviation of the ratio from 1.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[command(flatten)]
        numeric: NumericOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

/// Input-side failures (exit 2); verification results use the Ok path.
type InputResult<T> = Result<T, String>;

fn run(cli: Cli) -> InputResult<ExitCode> {
    match cli.cmd {
        Cmd::Describe { fan, out } => {
            let fan = load_fan(&fan)?;
            let report = describe(&fan);
            emit(&report, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify {
            fan,
            suite,
            tol,
            numeric,
            out,
        } => {
            let fan = load_fan(&fan)?;
            let report = verify(&fan, suite, tol, &numeric);
            let pass = report["pass"].as_bool().unwrap_or(false);
            emit(&report, out.as_deref())?;
            Ok(exit_pass(pass))
        }
        Cmd::Charge {
            fan,
            side,
            c,
            x,
            t,
            e,
            numeric,
            out,
        } => {
            let fan = load_fan(&fan)?;
            let c = parse_point(&c, fan.rank)?;
            let x = eval_point(&fan, x.as_deref(), t)?;
            let e = match &e {
                None => KClass::structure_sheaf(fan.n_points()),
                Some(path) => io::load_kclass(path, fan.n_points()).map_err(|e| e.to_string())?,
            };
            if side == Side::A && e.terms != KClass::structure_sheaf(fan.n_points()).terms {
                return Err("--e applies to side B only".into());
            }
            match charge(&fan, side, &c, &x, &e, &numeric) {
                Ok(report) => {
                    emit(&report, out.as_deref())?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(msg) => {
                    eprintln!("charge evaluation failed: {msg}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::XiTable { fan, out } => {
            let fan = load_fan(&fan)?;
            let v = duality::generic_direction(&fan).map_err(|e| e.to_string())?;
            let table = duality::build_xi_table(&fan, &v).map_err(|e| e.to_string())?;
            let report = json!({
                "v": v.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "entries": table.entries.iter().map(|e| json!({
                    "c": lattice_json(&e.c),
                    "d": lattice_json(&e.d),
                    "I": e.i_set.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "xi": e.xi,
                    "vol": e.vol.to_string(),
                })).collect::<Vec<_>>(),
            });
            emit(&report, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Asymptotics {
            fan,
            c,
            t,
            tol,
            numeric,
            out,
        } => {
            let fan = load_fan(&fan)?;
            let c = parse_point(&c, fan.rank)?;
            let t_grid = parse_f64_list(&t)?;
            let coh = Cohomology::new(&fan);
            match asymptotics_check(&coh, &c, &t_grid, &numeric.quadrature(), tol) {
                Ok(rep) => {
                    let report = json!({
                        "c": lattice_json(&c),
                        "t": rep.t_grid,
                        "ratio": rep.ratios.iter().map(complex_json).collect::<Vec<_>>(),
                        "final_deviation": rep.final_deviation,
                        "pass": rep.pass,
                    });
                    let pass = rep.pass;
                    emit(&report, out.as_deref())?;
                    Ok(exit_pass(pass))
                }
                Err(e) => {
                    eprintln!("asymptotics failed: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn exit_pass(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn load_fan(path: &PathBuf) -> InputResult<StackyFan> {
    io::load_fan(path).map_err(|e| e.to_string())
}

fn parse_point(s: &str, rank: usize) -> InputResult<LatticePoint> {
    let coords: Vec<i64> = s
        .trim_matches(|ch| ch == '(' || ch == ')')
        .split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|_| format!("bad lattice point {s:?}")))
        .collect::<Result<_, _>>()?;
    if coords.len() != rank {
        return Err(format!(
            "lattice point {s:?} has {} coordinates, expected {rank}",
            coords.len()
        ));
    }
    Ok(LatticePoint::from_i64(&coords))
}

fn parse_f64_list(s: &str) -> InputResult<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number list {s:?}")))
        .collect()
}

fn eval_point(fan: &StackyFan, x: Option<&str>, t: Option<f64>) -> InputResult<Vec<f64>> {
    match (x, t) {
        (Some(_), Some(_)) => Err("give either --x or --t, not both".into()),
        (Some(s), None) => {
            let x = parse_f64_list(s)?;
            if x.len() != fan.n_points() {
                return Err(format!(
                    "--x has {} entries but the fan has {} points",
                    x.len(),
                    fan.n_points()
                ));
            }
            if x.iter().any(|&v| v <= 0.0) {
                return Err("--x entries must be positive".into());
            }
            Ok(x)
        }
        (None, Some(t)) => {
            if t <= 1.0 {
                return Err("--t must exceed 1".into());
            }
            Ok(duality::curve_point(fan, t))
        }
        (None, None) => Err("one of --x or --t is required".into()),
    }
}

fn lattice_json(p: &LatticePoint) -> serde_json::Value {
    json!(p
        .coords
        .iter()
        .map(|c| c.to_string().parse::<i64>().unwrap())
        .collect::<Vec<_>>())
}

fn complex_json(z: &Complex64) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

fn emit(report: &serde_json::Value, out: Option<&std::path::Path>) -> InputResult<()> {
    let text = serde_json::to_string_pretty(report).expect("serializable report");
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {path:?}: {e}"))
        }
    }
}

// -- describe ----------------------------------------------------------------

fn describe(fan: &StackyFan) -> serde_json::Value {
    let coh = Cohomology::new(fan);
    let sectors: Vec<_> = (0..coh.n_sectors())
        .map(|s| {
            let ring = coh.ring(s);
            let module = coh.module(s);
            json!({
                "gamma": lattice_json(&ring.sector.gamma),
                "sigma": ring.sector.sigma.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "box_order": fan.box_order(&ring.sector),
                "dim_h": ring.dim,
                "dim_h_compact": module.dim,
                "top_degree": ring.top_degree,
            })
        })
        .collect();
    json!({
        "rank": fan.rank,
        "n_points": fan.n_points(),
        "points": fan.points.iter().map(lattice_json).collect::<Vec<_>>(),
        "psi": fan.psi.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
        "delta_volume": fan.delta_volume().to_string(),
        "n_sectors": coh.n_sectors(),
        "sectors": sectors,
        "k_rank": fan.delta_volume().to_string(),
    })
}

// -- verify ------------------------------------------------------------------

/// Lattice points of C (interior if requested) with degree in 1..=max_deg.
fn cone_points(fan: &StackyFan, max_deg: i64, interior: bool) -> Vec<LatticePoint> {
    let d = fan.rank - 1;
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for p in &fan.points {
        for r in 0..d {
            let c: i64 = p.coords[r].to_string().parse().expect("small coordinate");
            lo[r] = lo[r].min(c * max_deg).min(0);
            hi[r] = hi[r].max(c * max_deg).max(0);
        }
    }
    let mut out = Vec::new();
    let mut cur = lo.clone();
    'outer: loop {
        for deg in 1..=max_deg {
            let mut coords = cur.clone();
            coords.push(deg);
            let p = LatticePoint::from_i64(&coords);
            let keep = if interior {
                fan.contains_interior(&p)
            } else {
                fan.contains(&p)
            };
            if keep {
                out.push(p);
            }
        }
        let mut r = 0;
        loop {
            if r == d {
                break 'outer;
            }
            cur[r] += 1;
            if cur[r] <= hi[r] {
                break;
            }
            cur[r] = lo[r];
            r += 1;
        }
    }
    out.sort_by_key(|p| (p.deg(), p.coords.clone()));
    out
}

fn verify(fan: &StackyFan, suite: Suite, tol: Option<f64>, numeric: &NumericOpts) -> serde_json::Value {
    let mut results: Vec<serde_json::Value> = Vec::new();
    let coh = Cohomology::new(fan);
    let trunc = numeric.truncation();
    let qspec = numeric.quadrature();
    let run_all = suite == Suite::All;
    if run_all || suite == Suite::Bbgkz {
        results.extend(suite_bbgkz(fan, &trunc, &qspec, tol.unwrap_or(1e-4)));
    }
    if run_all || suite == Suite::Asymptotics {
        results.extend(suite_asymptotics(&coh, &qspec, tol.unwrap_or(0.05)));
    }
    if run_all || suite == Suite::Pairing {
        results.extend(suite_pairing(&coh, &trunc, tol.unwrap_or(1e-6)));
    }
    if run_all || suite == Suite::Main {
        results.extend(suite_main(&coh, &trunc, &qspec, tol.unwrap_or(1e-4)));
    }
    if run_all || suite == Suite::Volume {
        results.extend(suite_volume(&coh));
    }
    if run_all || suite == Suite::Beta {
        results.extend(suite_beta(&qspec, tol.unwrap_or(1e-7)));
    }
    let pass = results.iter().all(|r| r["pass"].as_bool() == Some(true));
    json!({ "suite": suite_name(suite), "results": results, "pass": pass })
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Bbgkz => "bbgkz",
        Suite::Asymptotics => "asymptotics",
        Suite::Pairing => "pairing",
        Suite::Main => "main",
        Suite::Volume => "volume",
        Suite::Beta => "beta",
        Suite::All => "all",
    }
}

fn check(name: &str, pass: bool, detail: String) -> serde_json::Value {
    json!({ "name": name, "pass": pass, "detail": detail })
}

fn suite_bbgkz(
    fan: &StackyFan,
    trunc: &SeriesTruncation,
    qspec: &QuadratureSpec,
    tol: f64,
) -> Vec<serde_json::Value> {
    let mut out = Vec::new();
    // Exact termwise membership for every interior c of degree at most 3
    // (the compactly supported series is indexed by the open cone).
    let cs = cone_points(fan, 3, true);
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for c in &cs {
        match termwise_bbgkz_check(fan, c, trunc) {
            Ok(rep) => {
                checked += rep.checked;
                failures.extend(rep.failures);
            }
            Err(e) => failures.push(format!("c={:?}: {e}", c.coords)),
        }
    }
    out.push(check(
        "bbgkz-termwise",
        failures.is_empty(),
        format!("{} exact identities over {} charge points; {:?}", checked, cs.len(), failures),
    ));
    // Finite-difference residuals on the quadrature-backed Z^A.
    if let Some(c) = cone_points(fan, fan.rank as i64, true).first() {
        let x = vec![1.0; fan.n_points()];
        let charge = |cc: &LatticePoint, xx: &[f64]| Ok(a_central_charge(fan, cc, xx, qspec)?.value);
        let res = |h: f64| -> Result<f64, String> {
            let rep = bbgkz_residual(fan, charge, c, &x, h).map_err(|e| e.to_string())?;
            Ok(rep
                .derivative_residuals
                .iter()
                .chain(rep.linear_residuals.iter())
                .fold(0.0f64, |a, &b| a.max(b)))
        };
        match (res(0.05), res(0.025)) {
            (Ok(r1), Ok(r2)) => {
                let quadratic = r2 <= r1 * 0.35 + 1e-12;
                out.push(check(
                    "bbgkz-finite-difference",
                    r2 < tol && quadratic,
                    format!("residual {r1:.3e} at h=0.05, {r2:.3e} at h=0.025"),
                ));
            }
            (Err(e), _) | (_, Err(e)) => {
                out.push(check("bbgkz-finite-difference", false, e));
            }
        }
    }
    out
}

fn suite_asymptotics(coh: &Cohomology, qspec: &QuadratureSpec, tol: f64) -> Vec<serde_json::Value> {
    let fan = &coh.fan;
    let eligible: Vec<LatticePoint> = cone_points(fan, fan.rank as i64, true)
        .into_iter()
        .filter(|c| {
            fan.decompose_point(c)
                .map(|d| d.asymptotics_eligible)
                .unwrap_or(false)
        })
        .take(1)
        .collect();
    if eligible.is_empty() {
        return vec![check("asymptotics", false, "no eligible charge point".into())];
    }
    let t_grid = [20.0, 40.0, 80.0, 160.0];
    eligible
        .iter()
        .map(|c| match asymptotics_check(coh, c, &t_grid, qspec, tol) {
            Ok(rep) => check(
                "asymptotics",
                rep.pass,
                format!("c={:?}, final deviation {:.3e}", c.coords, rep.final_deviation),
            ),
            Err(e) => check("asymptotics", false, format!("c={:?}: {e}", c.coords)),
        })
        .collect()
}

fn suite_pairing(coh: &Cohomology, trunc: &SeriesTruncation, tol: f64) -> Vec<serde_json::Value> {
    let fan = &coh.fan;
    let mut out = Vec::new();
    let v = match duality::generic_direction(fan) {
        Ok(v) => v,
        Err(e) => return vec![check("pairing", false, e.to_string())],
    };
    let table = match duality::build_xi_table(fan, &v) {
        Ok(t) => t,
        Err(e) => return vec![check("pairing", false, e.to_string())],
    };
    match duality::constancy_check(coh, &table, &[25.0, 40.0, 60.0, 85.0, 120.0], trunc, tol) {
        Ok(rep) => out.push(check(
            "pairing-constancy",
            rep.pass,
            format!("spread {:.3e} over {} samples", rep.spread, rep.t_grid.len()),
        )),
        Err(e) => out.push(check("pairing-constancy", false, e.to_string())),
    }
    let x = duality::curve_point(fan, 50.0);
    match duality::euler_inverse_check(coh, &table, &x, trunc, tol) {
        Ok(rep) => out.push(check(
            "pairing-euler-inverse",
            rep.pass,
            format!("{0}x{0} deviation {1:.3e}", rep.dim, rep.deviation),
        )),
        Err(e) => out.push(check("pairing-euler-inverse", false, e.to_string())),
    }
    out
}

fn suite_main(
    coh: &Cohomology,
    trunc: &SeriesTruncation,
    qspec: &QuadratureSpec,
    tol: f64,
) -> Vec<serde_json::Value> {
    let fan = &coh.fan;
    let cs: Vec<LatticePoint> = cone_points(fan, fan.rank as i64, true)
        .into_iter()
        .take(3)
        .collect();
    if cs.is_empty() {
        return vec![check("main-theorem", false, "no interior charge point".into())];
    }
    let xs: Vec<Vec<f64>> = [40.0, 80.0]
        .iter()
        .map(|&t| duality::curve_point(fan, t))
        .collect();
    let o = KClass::structure_sheaf(fan.n_points());
    match duality::main_theorem_check(coh, &o, &vec![0; fan.n_points()], &cs, &xs, trunc, qspec, tol)
    {
        Ok(rep) => vec![check(
            "main-theorem",
            rep.pass(),
            format!(
                "{} comparisons, max relative difference {:.3e}; {:?}",
                rep.checked, rep.max_rel, rep.failures
            ),
        )],
        Err(e) => vec![check("main-theorem", false, e.to_string())],
    }
}

fn suite_volume(coh: &Cohomology) -> Vec<serde_json::Value> {
    let fan = &coh.fan;
    let bs = [
        Q::new(Z::from(0), Z::from(1)),
        Q::new(Z::from(1), Z::from(4)),
        Q::new(Z::from(-1), Z::from(5)),
        Q::new(Z::from(1), Z::from(7)),
    ];
    let cs = cone_points(fan, fan.rank as i64, true);
    let mut checked = 0usize;
    let mut failures: Vec<String> = Vec::new();
    let interior_cones: Vec<Vec<usize>> = fan
        .cones
        .iter()
        .filter(|c| !c.is_empty() && fan.is_interior_cone(c))
        .cloned()
        .collect();
    for qj in &interior_cones {
        for &q in qj {
            let j_set: Vec<usize> = qj.iter().copied().filter(|&j| j != q).collect();
            for (bi, b0) in bs.iter().enumerate() {
                let b: Vec<Q> = (0..j_set.len())
                    .map(|k| if k == 0 { b0.clone() } else { bs[(bi + k) % bs.len()].clone() })
                    .collect();
                for c in &cs {
                    match duality::volume_formula_check(coh, c, q, &j_set, &b) {
                        Ok(rep) => {
                            checked += 1;
                            if !rep.pass {
                                failures.push(format!(
                                    "c={:?} q={} J={:?}: {} vs {}",
                                    c.coords,
                                    q + 1,
                                    j_set.iter().map(|j| j + 1).collect::<Vec<_>>(),
                                    rep.oracle,
                                    rep.cohomological
                                ));
                            }
                        }
                        Err(duality::DualityError::FormulaInapplicable(_)) => {}
                        Err(e) => failures.push(e.to_string()),
                    }
                }
            }
        }
    }
    vec![check(
        "volume-formula",
        checked >= 1 && failures.is_empty(),
        format!("{checked} exact rational comparisons; {failures:?}"),
    )]
}

fn suite_beta(qspec: &QuadratureSpec, tol: f64) -> Vec<serde_json::Value> {
    let cases: [&[f64]; 3] = [&[1.0, 1.0], &[0.5, 0.5], &[1.0 / 3.0, 0.5, 2.0]];
    let mut spec = *qspec;
    spec.rel_tol = spec.rel_tol.max(1e-8);
    cases
        .iter()
        .map(|a| match duality::beta_identity_check(a, &spec, tol) {
            Ok(rep) => check(
                "beta-identity",
                rep.pass,
                format!("a={a:?}: lhs {:.9e} rhs {:.9e}", rep.lhs, rep.rhs),
            ),
            Err(e) => check("beta-identity", false, format!("a={a:?}: {e}")),
        })
        .collect()
}

// -- charge ------------------------------------------------------------------

fn charge(
    fan: &StackyFan,
    side: Side,
    c: &LatticePoint,
    x: &[f64],
    e: &KClass,
    numeric: &NumericOpts,
) -> Result<serde_json::Value, String> {
    match side {
        Side::A => {
            let rep = a_central_charge(fan, c, x, &numeric.quadrature()).map_err(|e| e.to_string())?;
            Ok(json!({
                "side": "A",
                "c": lattice_json(c),
                "x": x,
                "value": complex_json(&rep.value),
                "err_est": rep.err_est,
                "cells": rep.cells,
            }))
        }
        Side::B => {
            let coh = Cohomology::new(fan);
            let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let branch = LogBranch::principal(&xc);
            let z = b_central_charge(&coh, e, c, &branch, &numeric.truncation())
                .map_err(|e| e.to_string())?;
            Ok(json!({
                "side": "B",
                "c": lattice_json(c),
                "x": x,
                "value": complex_json(&z),
            }))
        }
    }
}
