//! The xi-coefficient pairing between the cohomology-valued series and the
//! numerical periods, together with the verification suites built on it.
//!
//! The pairing is a finite bilinear sum indexed by splittings v_I = c + d
//! over the full-dimensional index sets I: the lattice points c of the
//! half-open parallelepiped spanned by {v_i : i in I}, with boundary
//! resolved by a fixed generic direction v.

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

use crate::arith::{det, solve, Q, Z};
use crate::cohomology::{Cohomology, CompactClass, SectorClass};
use crate::hypergeometric::{
    b_central_charge, branch_shift_equivalence, gamma_series, gamma_series_compact, LogBranch,
    SeriesError, SeriesTruncation,
};
use crate::ktheory::{self, KClass, KError};
use crate::lattice::{residual_volume_oracle, FanError, LatticePoint, StackyFan};
use crate::periods::{a_central_charge, integrate_box, PeriodError, QuadratureSpec};
use crate::scalar::q_to_f64;
use crate::special::ln_gamma;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DualityError {
    #[error("reference direction v is not generic for this fan")]
    NonGenericV,
    #[error("formula inapplicable: {0}")]
    FormulaInapplicable(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error("k-theory: {0}")]
    KTheory(#[from] KError),
}

// -- xi table ----------------------------------------------------------------

/// One splitting v_I = c + d contributing xi * vol * prod_{i in I} x_i *
/// Phi_c * Psi_d to the pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiEntry {
    pub c: LatticePoint,
    pub d: LatticePoint,
    pub i_set: Vec<usize>,
    /// (-1)^{deg c}.
    pub xi: i64,
    /// Normalized volume |det(v_i : i in I)|.
    pub vol: Z,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiTable {
    pub rank: usize,
    /// The generic reference direction, in lattice coordinates.
    pub v: Vec<Q>,
    pub entries: Vec<XiEntry>,
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    if r > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // Advance the lexicographically smallest successor.
        let mut j = r;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if cur[j] + 1 <= n - (r - j) {
                cur[j] += 1;
                for k in j + 1..r {
                    cur[k] = cur[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Matrix with columns v_i, i in `i_set`, as rows-of-rank vectors over Q.
fn cone_matrix(fan: &StackyFan, i_set: &[usize]) -> Vec<Vec<Q>> {
    (0..fan.rank)
        .map(|r| {
            i_set
                .iter()
                .map(|&i| Q::from_integer(fan.points[i].coords[r].clone()))
                .collect()
        })
        .collect()
}

/// A deterministic generic reference direction: a positive rational
/// combination of the fan points such that no barycentric coordinate with
/// respect to any full-dimensional index set vanishes.
pub fn generic_direction(fan: &StackyFan) -> Result<Vec<Q>, DualityError> {
    let n = fan.n_points();
    let full: Vec<Vec<usize>> = combinations(n, fan.rank)
        .into_iter()
        .filter(|i_set| !det(&cone_matrix(fan, i_set)).is_zero())
        .collect();
    for attempt in 0u64..64 {
        let mut v = vec![Q::zero(); fan.rank];
        for (i, p) in fan.points.iter().enumerate() {
            let num = ((attempt * 31 + i as u64 * 17 + 7) % 61 + 1) as i64;
            let lam = Q::new(Z::from(num), Z::from(64));
            for (vr, c) in v.iter_mut().zip(p.coords.iter()) {
                *vr += &lam * Q::from_integer(c.clone());
            }
        }
        let generic = full.iter().all(|i_set| {
            let a = cone_matrix(fan, i_set);
            solve(&a, &v)
                .map(|w| w.iter().all(|x| !x.is_zero()))
                .unwrap_or(false)
        });
        if generic {
            return Ok(v);
        }
    }
    Err(DualityError::NonGenericV)
}

/// Enumerate all pairing entries for the given generic direction.
pub fn build_xi_table(fan: &StackyFan, v: &[Q]) -> Result<XiTable, DualityError> {
    let n = fan.n_points();
    let rank = fan.rank;
    let mut entries = Vec::new();
    for i_set in combinations(n, rank) {
        let a = cone_matrix(fan, &i_set);
        let dv = det(&a);
        if dv.is_zero() {
            continue;
        }
        let w = solve(&a, v).ok_or(DualityError::NonGenericV)?;
        if w.iter().any(|x| x.is_zero()) {
            return Err(DualityError::NonGenericV);
        }
        let vol = dv.abs().to_integer();
        // Integer bounding box of the parallelepiped {sum alpha_j v_j}.
        let mut lo = vec![0i64; rank];
        let mut hi = vec![0i64; rank];
        for &i in &i_set {
            for r in 0..rank {
                let c = fan.points[i].coords[r].to_i64().expect("small coordinate");
                if c < 0 {
                    lo[r] += c;
                } else {
                    hi[r] += c;
                }
            }
        }
        let v_i: Vec<Z> = (0..rank)
            .map(|r| i_set.iter().map(|&i| fan.points[i].coords[r].clone()).sum())
            .collect();
        let mut cur = lo.clone();
        'points: loop {
            let c_q: Vec<Q> = cur.iter().map(|&x| Q::from_integer(Z::from(x))).collect();
            let alpha = solve(&a, &c_q).expect("nonsingular");
            let inside = alpha.iter().zip(w.iter()).all(|(aj, wj)| {
                (aj.is_positive() && aj < &Q::one())
                    || (aj.is_zero() && wj.is_positive())
                    || (aj == &Q::one() && wj.is_negative())
            });
            if inside {
                let c = LatticePoint::from_i64(&cur);
                let d = LatticePoint::new(
                    v_i.iter().zip(c.coords.iter()).map(|(s, x)| s - x).collect(),
                );
                let xi = if c.deg().to_i64().unwrap_or(0) % 2 == 0 { 1 } else { -1 };
                entries.push(XiEntry {
                    c,
                    d,
                    i_set: i_set.clone(),
                    xi,
                    vol: vol.clone(),
                });
            }
            // Advance the box counter.
            let mut r = 0;
            loop {
                if r == rank {
                    break 'points;
                }
                cur[r] += 1;
                if cur[r] <= hi[r] {
                    break;
                }
                cur[r] = lo[r];
                r += 1;
            }
        }
    }
    entries.sort_by(|a, b| (&a.i_set, &a.c).cmp(&(&b.i_set, &b.c)));
    Ok(XiTable {
        rank,
        v: v.to_vec(),
        entries,
    })
}

// -- the pairing -------------------------------------------------------------

/// <Phi, Psi>(x) = sum over entries of xi * vol * prod_{i in I} x_i *
/// Phi(c) * Psi(d), with Phi vector-valued and Psi scalar-valued. Values
/// are cached per lattice point.
pub fn pairing<FP, FS>(
    table: &XiTable,
    x: &[f64],
    mut phi: FP,
    mut psi: FS,
) -> Result<Vec<Complex64>, DualityError>
where
    FP: FnMut(&LatticePoint) -> Result<Vec<Complex64>, DualityError>,
    FS: FnMut(&LatticePoint) -> Result<Complex64, DualityError>,
{
    let mut phi_cache: BTreeMap<LatticePoint, Vec<Complex64>> = BTreeMap::new();
    let mut psi_cache: BTreeMap<LatticePoint, Complex64> = BTreeMap::new();
    let mut out: Vec<Complex64> = Vec::new();
    for e in &table.entries {
        if !phi_cache.contains_key(&e.c) {
            phi_cache.insert(e.c.clone(), phi(&e.c)?);
        }
        if !psi_cache.contains_key(&e.d) {
            psi_cache.insert(e.d.clone(), psi(&e.d)?);
        }
        let pv = &phi_cache[&e.c];
        let sv = psi_cache[&e.d];
        if out.is_empty() {
            out = vec![Complex64::zero(); pv.len()];
        }
        let mono: f64 = e.i_set.iter().map(|&i| x[i]).product();
        let w = e.xi as f64 * e.vol.to_f64().expect("small volume") * mono;
        for (o, p) in out.iter_mut().zip(pv.iter()) {
            *o += w * p * sv;
        }
    }
    Ok(out)
}

/// Rank-one accumulation sum xi * vol * x^I * Phi(c) Psi(d)^T for
/// matrix-valued checks; both sides vector-valued.
fn pairing_outer<FP, FS>(
    table: &XiTable,
    x: &[f64],
    mut phi: FP,
    mut psi: FS,
) -> Result<Vec<Vec<Complex64>>, DualityError>
where
    FP: FnMut(&LatticePoint) -> Result<Vec<Complex64>, DualityError>,
    FS: FnMut(&LatticePoint) -> Result<Vec<Complex64>, DualityError>,
{
    let mut phi_cache: BTreeMap<LatticePoint, Vec<Complex64>> = BTreeMap::new();
    let mut psi_cache: BTreeMap<LatticePoint, Vec<Complex64>> = BTreeMap::new();
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for e in &table.entries {
        if !phi_cache.contains_key(&e.c) {
            phi_cache.insert(e.c.clone(), phi(&e.c)?);
        }
        if !psi_cache.contains_key(&e.d) {
            psi_cache.insert(e.d.clone(), psi(&e.d)?);
        }
        let pv = &phi_cache[&e.c];
        let sv = &psi_cache[&e.d];
        if out.is_empty() {
            out = vec![vec![Complex64::zero(); sv.len()]; pv.len()];
        }
        let mono: f64 = e.i_set.iter().map(|&i| x[i]).product();
        let w = e.xi as f64 * e.vol.to_f64().expect("small volume") * mono;
        for (row, p) in out.iter_mut().zip(pv.iter()) {
            for (o, s) in row.iter_mut().zip(sv.iter()) {
                *o += w * p * s;
            }
        }
    }
    Ok(out)
}

/// Concatenate the per-sector coefficient vectors in sector order.
pub fn flatten_sector_classes(cls: &[SectorClass<Complex64>]) -> Vec<Complex64> {
    cls.iter().flat_map(|c| c.coeffs.iter().copied()).collect()
}

pub fn flatten_compact_classes(cls: &[CompactClass<Complex64>]) -> Vec<Complex64> {
    cls.iter().flat_map(|c| c.coeffs.iter().copied()).collect()
}

/// The point x_i = t^{-psi_i} on the large-volume curve.
pub fn curve_point(fan: &StackyFan, t: f64) -> Vec<f64> {
    fan.psi.iter().map(|p| t.powf(-q_to_f64(p))).collect()
}

// -- constancy of the pairing ------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConstancyReport {
    pub t_grid: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
    /// Largest componentwise variation across the samples, relative to the
    /// largest component magnitude (floored at 1).
    pub spread: f64,
    pub pass: bool,
}

/// The pairing of the cohomology-valued series against Z^B for the structure
/// sheaf, sampled along the curve x = t^{-psi}; the result must not depend
/// on t.
pub fn constancy_check(
    coh: &Cohomology,
    table: &XiTable,
    ts: &[f64],
    trunc: &SeriesTruncation,
    tol: f64,
) -> Result<ConstancyReport, DualityError> {
    let o = KClass::structure_sheaf(coh.fan.n_points());
    let mut values = Vec::new();
    for &t in ts {
        let x = curve_point(&coh.fan, t);
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let branch = LogBranch::principal(&xc);
        let v = pairing(
            table,
            &x,
            |c| Ok(flatten_sector_classes(&gamma_series(coh, c, &branch, trunc)?)),
            |d| Ok(b_central_charge(coh, &o, d, &branch, trunc)?),
        )?;
        values.push(v);
    }
    let scale = values
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(1.0f64, f64::max);
    let mut spread = 0.0f64;
    if let Some(first) = values.first() {
        for v in &values[1..] {
            for (a, b) in first.iter().zip(v.iter()) {
                spread = spread.max((a - b).norm());
            }
        }
    }
    spread /= scale;
    Ok(ConstancyReport {
        t_grid: ts.to_vec(),
        values,
        spread,
        pass: spread <= tol,
    })
}

// -- inverse of the Euler pairing --------------------------------------------

#[derive(Debug, Clone)]
pub struct InverseReport {
    pub dim: usize,
    /// max |(2 pi i)^{rk} P E^T - Id| entrywise.
    pub deviation: f64,
    pub pass: bool,
}

/// The pairing matrix of the two series solution bases inverts the Euler
/// pairing: with P = sum xi vol x^I Gamma_c (Gamma°_d)^T in the flattened
/// sector bases and E the Euler matrix of the basis classes,
/// (2 pi i)^{rk N} P E^T = Id.
pub fn euler_inverse_check(
    coh: &Cohomology,
    table: &XiTable,
    x: &[f64],
    trunc: &SeriesTruncation,
    tol: f64,
) -> Result<InverseReport, DualityError> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let branch = LogBranch::principal(&xc);
    let p = pairing_outer(
        table,
        x,
        |c| Ok(flatten_sector_classes(&gamma_series(coh, c, &branch, trunc)?)),
        |d| Ok(flatten_compact_classes(&gamma_series_compact(coh, d, &branch, trunc)?)),
    )?;
    let m = p.len();
    // Flattened index maps: (sector, local index) for rings and modules.
    let mut ring_units: Vec<Vec<SectorClass<Complex64>>> = Vec::new();
    let mut module_units: Vec<Vec<CompactClass<Complex64>>> = Vec::new();
    for s in 0..coh.n_sectors() {
        for k in 0..coh.ring(s).dim {
            let mut cls: Vec<SectorClass<Complex64>> = (0..coh.n_sectors())
                .map(|t| SectorClass {
                    sector: t,
                    coeffs: coh.ring(t).zero(),
                })
                .collect();
            cls[s].coeffs[k] = Complex64::one();
            ring_units.push(cls);
        }
        for k in 0..coh.module(s).dim {
            let mut cls: Vec<CompactClass<Complex64>> = (0..coh.n_sectors())
                .map(|t| CompactClass {
                    sector: t,
                    coeffs: coh.module(t).zero(),
                })
                .collect();
            cls[s].coeffs[k] = Complex64::one();
            module_units.push(cls);
        }
    }
    assert_eq!(ring_units.len(), m, "pairing rows match the flattened basis");
    assert_eq!(module_units.len(), m);
    let mut e = vec![vec![Complex64::zero(); m]; m];
    for (i, a) in ring_units.iter().enumerate() {
        for (j, b) in module_units.iter().enumerate() {
            e[i][j] = ktheory::euler_pairing(coh, a, b)?;
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let scale = two_pi_i.powi(coh.fan.rank as i32);
    let mut deviation = 0.0f64;
    for i in 0..m {
        for k in 0..m {
            let mut acc = Complex64::zero();
            for j in 0..m {
                acc += p[i][j] * e[k][j];
            }
            acc *= scale;
            let id = if i == k { Complex64::one() } else { Complex64::zero() };
            deviation = deviation.max((acc - id).norm());
        }
    }
    Ok(InverseReport {
        dim: m,
        deviation,
        pass: deviation <= tol,
    })
}

// -- equality of the two central charges -------------------------------------

#[derive(Debug, Clone)]
pub struct MainTheoremReport {
    pub checked: usize,
    pub failures: Vec<String>,
    pub max_rel: f64,
}

impl MainTheoremReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For a = 0: Z^A_c(x) agrees with Z^B_c(x) for the structure sheaf at every
/// sample point. For a != 0: the branch log x - 2 pi i a transports Z^B(E)
/// to Z^B of E twisted by the corresponding monodromy multiplier, classwise
/// and for the scalar charge.
pub fn main_theorem_check(
    coh: &Cohomology,
    e: &KClass,
    a: &[i64],
    c_list: &[LatticePoint],
    xs: &[Vec<f64>],
    trunc: &SeriesTruncation,
    qspec: &QuadratureSpec,
    tol: f64,
) -> Result<MainTheoremReport, DualityError> {
    let mut report = MainTheoremReport {
        checked: 0,
        failures: Vec::new(),
        max_rel: 0.0,
    };
    let shifted_class = if a.iter().any(|&x| x != 0) {
        let exps: Vec<i64> = a.iter().map(|&x| -x).collect();
        Some(e.product(&KClass::monomial(exps, None))?)
    } else {
        None
    };
    for x in xs {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let branch = LogBranch::principal(&xc);
        for c in c_list {
            report.checked += 1;
            match &shifted_class {
                None => {
                    let za = a_central_charge(&coh.fan, c, x, qspec)?.value;
                    let zb = b_central_charge(coh, e, c, &branch, trunc)?;
                    let rel = (za - zb).norm() / zb.norm().max(1e-300);
                    report.max_rel = report.max_rel.max(rel);
                    if rel > tol {
                        report
                            .failures
                            .push(format!("c={:?} x={:?}: |Z^A - Z^B| rel {rel:.3e}", c.coords, x));
                    }
                }
                Some(te) => {
                    let classwise = branch_shift_equivalence(coh, c, a, &branch, trunc, tol)?;
                    if !classwise.pass() {
                        report
                            .failures
                            .push(format!("c={:?}: classwise shift failed", c.coords));
                    }
                    let lhs = b_central_charge(coh, e, c, &branch.shifted(a), trunc)?;
                    let rhs = b_central_charge(coh, te, c, &branch, trunc)?;
                    let rel = (lhs - rhs).norm() / rhs.norm().max(1e-300);
                    report.max_rel = report.max_rel.max(rel);
                    if rel > tol {
                        report
                            .failures
                            .push(format!("c={:?}: monodromy transport rel {rel:.3e}", c.coords));
                    }
                }
            }
        }
    }
    Ok(report)
}

// -- residual volume formula -------------------------------------------------

#[derive(Debug, Clone)]
pub struct VolumeReport {
    pub oracle: Q,
    pub cohomological: Q,
    pub pass: bool,
}

/// The residual volume of the tie polytope E^{q,J}(b) equals an exact
/// rational integral over the twisted sector of c:
///
///   |Box(q u J)| / |Box(sigma(gamma(c)))| *
///     int_{gamma(c)} e^{sum_i psi_i D_i - sum_{j in J} b_j D_j}
///       prod_{i in (q u J) \ sigma(c)} D_i . F_{I_c}
///
/// Valid for interior c, interior cone q u J containing sigma(c), and b
/// small enough not to change the tie combinatorics.
pub fn volume_formula_check(
    coh: &Cohomology,
    c: &LatticePoint,
    q: usize,
    j_set: &[usize],
    b: &[Q],
) -> Result<VolumeReport, DualityError> {
    let fan = &coh.fan;
    let mut qj: Vec<usize> = j_set.to_vec();
    qj.push(q);
    qj.sort_unstable();
    qj.dedup();
    if qj.len() != j_set.len() + 1 {
        return Err(DualityError::FormulaInapplicable(
            "q must not lie in J".into(),
        ));
    }
    if !fan.is_interior_cone(&qj) {
        return Err(DualityError::FormulaInapplicable(format!(
            "{qj:?} is not an interior cone"
        )));
    }
    let decomp = fan
        .decompose_point(c)
        .map_err(|e| DualityError::FormulaInapplicable(format!("bad c: {e}")))?;
    if !decomp.interior {
        return Err(DualityError::FormulaInapplicable(
            "c must be interior".into(),
        ));
    }
    if !decomp.sigma_c.iter().all(|i| qj.contains(i)) {
        return Err(DualityError::FormulaInapplicable(
            "sigma(c) must be contained in q u J".into(),
        ));
    }
    let s = decomp.sector;
    let ring = coh.ring(s);
    let module = coh.module(s);
    let sigma = &ring.sector.sigma;
    let k_rel: Vec<usize> = decomp
        .i_c
        .iter()
        .copied()
        .filter(|i| !sigma.contains(i))
        .collect();
    let cohomological = match module.generator_class::<Q>(&k_rel) {
        None => Q::zero(),
        Some(f) => {
            // exp(sum psi_i D_i - sum_J b_j D_j), exactly over Q.
            let nf = ring.free_vars.len();
            let mut form = vec![Q::zero(); nf];
            for i in 0..fan.n_points() {
                let mut w = fan.psi[i].clone();
                if let Some(pos) = j_set.iter().position(|&j| j == i) {
                    w -= &b[pos];
                }
                if w.is_zero() {
                    continue;
                }
                for (fo, dl) in form.iter_mut().zip(ring.d_linear[i].iter()) {
                    *fo += &w * dl;
                }
            }
            let expo = ring.exp_class::<Q>(&ring.linear_form_class(&form));
            let mut cls = expo;
            for &i in qj.iter().filter(|i| !decomp.sigma_c.contains(i)) {
                cls = ring.mul(&cls, &ring.d_class::<Q>(i));
            }
            let val = module.integrate::<Q>(&module.act(&cls, &f));
            let mult_qj = fan.box_of_cone(&qj).len();
            let weight = fan.box_order(&ring.sector);
            val * Q::new(Z::from(mult_qj as i64), Z::from(weight as i64))
        }
    };
    let poly = fan.tropical_polytope(q, j_set, b);
    let oracle = residual_volume_oracle(&poly).map_err(|e: FanError| {
        DualityError::FormulaInapplicable(format!("oracle: {e}"))
    })?;
    let pass = oracle == cohomological;
    Ok(VolumeReport {
        oracle,
        cohomological,
        pass,
    })
}

// -- Gamma product identity --------------------------------------------------

#[derive(Debug, Clone)]
pub struct BetaReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
}

/// Gamma(a_1)...Gamma(a_n) / Gamma(a_1 + ... + a_n) equals the sum over q of
/// integrals over the unit cube, the local-chart decomposition of a global
/// Beta-type integral. Each chart is integrated after the substitution
/// t_i = u_i^{1/a_i}, which makes the measure constant.
pub fn beta_identity_check(
    a: &[f64],
    spec: &QuadratureSpec,
    tol: f64,
) -> Result<BetaReport, DualityError> {
    assert!(a.iter().all(|&x| x > 0.0), "parameters must be positive");
    let n = a.len();
    let total: f64 = a.iter().sum();
    let lhs = (a.iter().map(|&x| ln_gamma(x)).sum::<f64>() - ln_gamma(total)).exp();
    let mut rhs = 0.0f64;
    for q in 0..n {
        let others: Vec<f64> = (0..n).filter(|&i| i != q).map(|i| a[i]).collect();
        let jac: f64 = others.iter().map(|x| 1.0 / x).product();
        let f = |u: &[f64]| {
            let s: f64 = u
                .iter()
                .zip(others.iter())
                .map(|(&ui, &ai)| ui.powf(1.0 / ai))
                .sum();
            (1.0 + s).powf(-total)
        };
        let lo = vec![0.0; n - 1];
        let hi = vec![1.0; n - 1];
        let (v, _, _) = integrate_box(&f, &lo, &hi, spec)?;
        rhs += jac * v;
    }
    let rel_err = (lhs - rhs).abs() / lhs.abs().max(1e-300);
    Ok(BetaReport {
        lhs,
        rhs,
        rel_err,
        pass: rel_err <= tol,
    })
}
