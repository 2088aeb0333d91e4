//! A-brane central charges as numerical period integrals.
//!
//! The integrals live over R^d in logarithmic coordinates y = log z; the
//! integrand e^{<c-bar, y>} / f(e^y)^{deg c} is smooth and, for interior c,
//! decays exponentially at a rate read off from the tropicalization of f.
//! Quadrature is adaptive tensor-product Gauss-Kronrod over a truncated box
//! whose radius is grown until the tropical tail bound is below tolerance.

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BinaryHeap;

use crate::arith::Q;
use crate::cohomology::Cohomology;
use crate::lattice::{LatticePoint, StackyFan};
use crate::scalar::q_to_f64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PeriodError {
    #[error("integral does not converge for this c (not interior) or x")]
    NotConvergent,
    #[error("quadrature failed to reach the requested tolerance")]
    ToleranceNotReached,
    #[error("point is outside the asymptotic regime (some coefficient > 1)")]
    NotEligible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Minimum half-width of the truncation box in y-coordinates; grown
    /// automatically until the tail bound is below abs_tol.
    pub box_radius: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Use compensated (Kahan-Babuska) summation in the quadrature
    /// reductions instead of plain f64 accumulation.
    pub compensated: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            box_radius: 8.0,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 30_000,
            compensated: false,
        }
    }
}

/// Neumaier-variant compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// A posteriori quadrature error estimate plus the tropical tail bound,
    /// in the units of `value`.
    pub err_est: f64,
    pub tail_est: f64,
    pub cells: usize,
}

/// True iff Z^A_c converges absolutely: c lies in the interior of the
/// support cone (equivalently c-bar/deg(c) is interior to the polytope).
pub fn convergence_check(fan: &StackyFan, c: &LatticePoint) -> bool {
    c.deg() >= One::one() && fan.contains_interior(c)
}

// -- Gauss-Kronrod 7/15 nodes on [-1, 1] ------------------------------------

const XGK: [f64; 15] = [
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];

const WGK: [f64; 15] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];

/// Gauss-7 weights aligned with the odd Kronrod nodes (indices 1,3,...,13).
const WG: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

#[derive(Debug, Clone)]
struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Tensor-product G7/K15 on one box: returns (Kronrod value, |K - G|).
fn gk_cell(
    f: &impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    compensated: bool,
) -> (f64, f64) {
    if compensated {
        let mut k_sum = Compensated::default();
        let mut g_sum = Compensated::default();
        gk_cell_impl(f, lo, hi, |s: &mut Compensated, x| s.add(x), &mut k_sum, &mut g_sum);
        return finish_gk(lo, hi, k_sum.value(), g_sum.value());
    }
    let mut k_sum = 0.0f64;
    let mut g_sum = 0.0f64;
    gk_cell_impl(f, lo, hi, |s: &mut f64, x| *s += x, &mut k_sum, &mut g_sum);
    finish_gk(lo, hi, k_sum, g_sum)
}

fn finish_gk(lo: &[f64], hi: &[f64], k_sum: f64, g_sum: f64) -> (f64, f64) {
    let jac: f64 = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).product();
    (k_sum * jac, (k_sum - g_sum).abs() * jac)
}

fn gk_cell_impl<S>(
    f: &impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    mut add: impl FnMut(&mut S, f64),
    k_sum: &mut S,
    g_sum: &mut S,
) {
    let d = lo.len();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mut idx = vec![0usize; d];
    let mut y = vec![0.0f64; d];
    loop {
        let mut wk = 1.0;
        let mut wg = 1.0;
        let mut on_gauss = true;
        for j in 0..d {
            let i = idx[j];
            y[j] = mid[j] + half[j] * XGK[i];
            wk *= WGK[i];
            if i % 2 == 1 {
                wg *= WG[i / 2];
            } else {
                on_gauss = false;
            }
        }
        let fy = f(&y);
        add(k_sum, wk * fy);
        if on_gauss {
            add(g_sum, wg * fy);
        }
        // Advance the mixed-radix counter.
        let mut j = 0;
        loop {
            if j == d {
                return;
            }
            idx[j] += 1;
            if idx[j] < 15 {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Adaptive integration of `f` over the box [-r, r]^d.
fn adaptive_box(
    f: &impl Fn(&[f64]) -> f64,
    d: usize,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64, usize), PeriodError> {
    integrate_box(f, &vec![-r; d], &vec![r; d], spec)
}

/// Adaptive tensor-product Gauss-Kronrod integration over an axis-aligned
/// box, returning (value, error estimate, cell count).
pub fn integrate_box(
    f: &impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64, usize), PeriodError> {
    let (lo, hi) = (lo.to_vec(), hi.to_vec());
    let (v, e) = gk_cell(f, &lo, &hi, spec.compensated);
    let mut heap = BinaryHeap::new();
    heap.push(Cell {
        lo,
        hi,
        value: v,
        error: e,
    });
    let mut cells = 1usize;
    loop {
        let (total_value, total_error) = if spec.compensated {
            let mut v = Compensated::default();
            let mut e = Compensated::default();
            for c in heap.iter() {
                v.add(c.value);
                e.add(c.error);
            }
            (v.value(), e.value())
        } else {
            (
                heap.iter().map(|c| c.value).sum(),
                heap.iter().map(|c| c.error).sum(),
            )
        };
        let tol = spec.abs_tol.max(spec.rel_tol * total_value.abs());
        if total_error <= tol {
            return Ok((total_value, total_error, cells));
        }
        if cells >= spec.max_subdivisions {
            return Err(PeriodError::ToleranceNotReached);
        }
        let worst = heap.pop().expect("nonempty heap");
        // Split along the widest dimension.
        let (j, _) = worst
            .lo
            .iter()
            .zip(worst.hi.iter())
            .map(|(a, b)| b - a)
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, w)| if w > acc.1 { (i, w) } else { acc });
        let m = 0.5 * (worst.lo[j] + worst.hi[j]);
        for half in 0..2 {
            let mut lo = worst.lo.clone();
            let mut hi = worst.hi.clone();
            if half == 0 {
                hi[j] = m;
            } else {
                lo[j] = m;
            }
            let (v, e) = gk_cell(f, &lo, &hi, spec.compensated);
            heap.push(Cell {
                lo,
                hi,
                value: v,
                error: e,
            });
        }
        cells += 1;
    }
}

/// Exponent data of the period integrand for fixed c and x.
struct Integrand {
    d: usize,
    deg_c: i32,
    c_bar: Vec<f64>,
    /// Per monomial: (x_i, v-bar_i).
    monomials: Vec<(f64, Vec<f64>)>,
}

impl Integrand {
    fn new(fan: &StackyFan, c: &LatticePoint, x: &[f64]) -> Self {
        let d = fan.rank - 1;
        Integrand {
            d,
            deg_c: c.deg().to_i32().expect("small degree"),
            c_bar: (0..d).map(|k| c.coords[k].to_f64().unwrap()).collect(),
            monomials: fan
                .points
                .iter()
                .zip(x.iter())
                .map(|(v, &xi)| {
                    (xi, (0..d).map(|k| v.coords[k].to_f64().unwrap()).collect())
                })
                .collect(),
        }
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let mut f = 0.0;
        for (xi, vb) in &self.monomials {
            let e: f64 = vb.iter().zip(y).map(|(a, b)| a * b).sum();
            f += xi * e.exp();
        }
        let num: f64 = self.c_bar.iter().zip(y).map(|(a, b)| a * b).sum();
        num.exp() / f.powi(self.deg_c)
    }

    /// log of the dominant-monomial upper bound
    /// min_i [ <c-bar - deg(c) v-bar_i, y> - deg(c) log x_i ].
    fn log_bound(&self, y: &[f64]) -> f64 {
        let num: f64 = self.c_bar.iter().zip(y).map(|(a, b)| a * b).sum();
        self.monomials
            .iter()
            .map(|(xi, vb)| {
                let e: f64 = vb.iter().zip(y).map(|(a, b)| a * b).sum();
                num - self.deg_c as f64 * (e + xi.ln())
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimal decay rate of the bound over unit directions (sampled): a
    /// positive number for interior c.
    fn decay_rate(&self) -> f64 {
        let dirs = unit_directions(self.d);
        let mut rate = f64::INFINITY;
        for u in &dirs {
            // max_i <deg(c) v-bar_i - c-bar, u>
            let r = self
                .monomials
                .iter()
                .map(|(_, vb)| {
                    let e: f64 = vb.iter().zip(u).map(|(a, b)| a * b).sum();
                    self.deg_c as f64 * e
                        - self.c_bar.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            rate = rate.min(r);
        }
        rate
    }

    /// Conservative bound on the integral outside the box [-r, r]^d.
    fn tail_bound(&self, r: f64, rate: f64) -> f64 {
        // Max of the dominant-monomial bound on the box boundary (sampled),
        // decaying at least at `rate` beyond it.
        let mut m: f64 = f64::NEG_INFINITY;
        let dirs = unit_directions(self.d);
        for u in &dirs {
            let linf = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let y: Vec<f64> = u.iter().map(|c| c * (r / linf)).collect();
            m = m.max(self.log_bound(&y));
        }
        let surface = 2.0 * self.d as f64 * (2.0 * r).powi(self.d as i32 - 1);
        // Extra slack factor 4 for the sampling of the boundary maximum.
        4.0 * m.exp() * surface / rate
    }
}

fn unit_directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..240)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 240.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            // Coarse sphere sampling: normalized +-1/0 grid directions.
            let mut out = Vec::new();
            let mut g = vec![0i32; d];
            loop {
                if g.iter().any(|&x| x != 0) {
                    let n = (g.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
                    out.push(g.iter().map(|&x| x as f64 / n).collect());
                }
                let mut j = 0;
                loop {
                    if j == d {
                        return out;
                    }
                    g[j] += 1;
                    if g[j] <= 1 {
                        break;
                    }
                    g[j] = -1;
                    j += 1;
                }
            }
        }
    }
}

/// Z^A_c(x) by adaptive quadrature, with the constant
/// (-1)^d (2 pi i)^{-(d+1)} (-1)^{deg c - 1} (deg c - 1)! included.
pub fn a_central_charge(
    fan: &StackyFan,
    c: &LatticePoint,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult, PeriodError> {
    if !convergence_check(fan, c) || x.iter().any(|&xi| xi <= 0.0) {
        return Err(PeriodError::NotConvergent);
    }
    let integrand = Integrand::new(fan, c, x);
    let rate = integrand.decay_rate();
    assert!(rate > 0.0, "interior c must give a positive decay rate");
    // Grow the box until the tail bound clears abs_tol.
    let mut r = spec.box_radius;
    let mut tail = integrand.tail_bound(r, rate);
    while tail > spec.abs_tol && r < spec.box_radius + 400.0 / rate {
        r *= 1.3;
        tail = integrand.tail_bound(r, rate);
    }
    let d = integrand.d;
    let f = |y: &[f64]| integrand.eval(y);
    let (raw, err, cells) = adaptive_box(&f, d, r, spec)?;
    let deg = integrand.deg_c;
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut fact = 1.0f64;
    for k in 2..deg {
        fact *= k as f64;
    }
    let sign = if (d as i32 + deg - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let prefactor = sign * fact / two_pi_i.powi(d as i32 + 1);
    Ok(QuadratureResult {
        value: prefactor * raw,
        err_est: (err + tail) * prefactor.norm(),
        tail_est: tail * prefactor.norm(),
        cells,
    })
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub h: f64,
    /// |(Z_c(x+h e_i) - Z_c(x-h e_i))/2h - Z_{c+v_i}(x)| per i.
    pub derivative_residuals: Vec<f64>,
    /// |sum_i <mu, v_i> x_i d_i Z_c + <mu, c> Z_c| per lattice coordinate mu.
    pub linear_residuals: Vec<f64>,
}

/// Finite-difference verification that a charge function satisfies the
/// bbGKZ system: derivative equations d_i Z_c = Z_{c+v_i} and the linear
/// (homogeneity) equations for the coordinate functionals mu.
pub fn bbgkz_residual<F>(
    fan: &StackyFan,
    charge: F,
    c: &LatticePoint,
    x: &[f64],
    h: f64,
) -> Result<ResidualReport, PeriodError>
where
    F: Fn(&LatticePoint, &[f64]) -> Result<Complex64, PeriodError>,
{
    let n = fan.n_points();
    let base = charge(c, x)?;
    let mut deriv = Vec::with_capacity(n);
    let mut derivative_residuals = Vec::with_capacity(n);
    for i in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let di = (charge(c, &xp)? - charge(c, &xm)?) / (2.0 * h);
        deriv.push(di);
        let ci = LatticePoint {
            coords: c
                .coords
                .iter()
                .zip(fan.points[i].coords.iter())
                .map(|(a, b)| a + b)
                .collect(),
        };
        let shifted = charge(&ci, x)?;
        derivative_residuals.push((di - shifted).norm());
    }
    let mut linear_residuals = Vec::with_capacity(fan.rank);
    for k in 0..fan.rank {
        let mut acc = Complex64::new(c.coords[k].to_f64().unwrap(), 0.0) * base;
        for i in 0..n {
            let vk = fan.points[i].coords[k].to_f64().unwrap();
            acc += vk * x[i] * deriv[i];
        }
        linear_residuals.push(acc.norm());
    }
    Ok(ResidualReport {
        h,
        derivative_residuals,
        linear_residuals,
    })
}

// -- tropical cover ---------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TropicalRegion {
    pub q: usize,
    pub k: Vec<usize>,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct TropicalCover {
    pub t: f64,
    pub eps: Q,
    pub regions: Vec<TropicalRegion>,
}

/// Feasibility of {p : A p <= b} by exact Fourier-Motzkin elimination.
fn fm_feasible(mut rows: Vec<(Vec<Q>, Q)>, dim: usize) -> bool {
    for var in (0..dim).rev() {
        let mut lower: Vec<(Vec<Q>, Q)> = Vec::new(); // coeff on var < 0
        let mut upper: Vec<(Vec<Q>, Q)> = Vec::new();
        let mut rest: Vec<(Vec<Q>, Q)> = Vec::new();
        for (a, b) in rows {
            if a[var].is_zero() {
                rest.push((a, b));
            } else if a[var].is_positive() {
                upper.push((a, b));
            } else {
                lower.push((a, b));
            }
        }
        for (al, bl) in &lower {
            for (au, bu) in &upper {
                // Combine to eliminate `var`: au[var] * lower + |al[var]| * upper.
                let cu = au[var].clone();
                let cl = -al[var].clone();
                let a: Vec<Q> = al
                    .iter()
                    .zip(au.iter())
                    .map(|(x, y)| &(&cu * x) + &(&cl * y))
                    .collect();
                let b = &(&cu * bl) + &(&cl * bu);
                rest.push((a, b));
            }
        }
        rows = rest;
    }
    rows.iter().all(|(_, b)| !b.is_negative())
}

/// The regions U^{q,K} of the tropical cover: where the monomial of q
/// dominates, those of K tie within eps, and all others lag by at least eps.
pub fn tropical_cover(fan: &StackyFan, t: f64, eps: &Q) -> TropicalCover {
    assert!(t > 1.0 && eps.is_positive(), "need t > 1 and eps > 0");
    let n = fan.n_points();
    let d = fan.rank - 1;
    use itertools::Itertools;
    // beta_i(p) = <v-bar_i, p> - psi(v_i); constraints are differences.
    let beta = |i: usize| -> (Vec<Q>, Q) {
        (
            (0..d)
                .map(|k| Q::from_integer(fan.points[i].coords[k].clone()))
                .collect(),
            -fan.psi[i].clone(),
        )
    };
    let mut regions = Vec::new();
    for q in 0..n {
        let others: Vec<usize> = (0..n).filter(|&i| i != q).collect();
        for size in 0..=d.min(others.len()) {
            for k_set in others.iter().copied().combinations(size) {
                let mut rows: Vec<(Vec<Q>, Q)> = Vec::new();
                let (aq, bq) = beta(q);
                for &i in &others {
                    let (ai, bi) = beta(i);
                    // beta_i <= beta_q  <=>  (ai - aq) p <= bq - bi... careful:
                    // beta_i = <ai,p> + bi, so beta_i - beta_q <= 0 gives
                    // (ai - aq) p <= bq - bi.
                    let diff: Vec<Q> = ai.iter().zip(aq.iter()).map(|(x, y)| x - y).collect();
                    let rhs = &bq - &bi;
                    if k_set.contains(&i) {
                        // Tie within eps: beta_q - beta_i <= eps too.
                        let neg: Vec<Q> = diff.iter().map(|x| -x).collect();
                        rows.push((neg, eps - &rhs));
                        rows.push((diff, rhs));
                    } else {
                        // Lag: beta_i <= beta_q - eps.
                        rows.push((diff, &rhs - eps));
                    }
                }
                let feasible = fm_feasible(rows, d);
                regions.push(TropicalRegion {
                    q,
                    k: k_set,
                    feasible,
                });
            }
        }
    }
    TropicalCover {
        t,
        eps: eps.clone(),
        regions,
    }
}

// -- asymptotics ------------------------------------------------------------

/// The leading term of Z^A_c along x_i = t^{-psi(v_i)}: a power of t times a
/// polynomial in log t.
#[derive(Debug, Clone)]
pub struct LeadingTerm {
    pub psi_c: Q,
    /// Coefficients of powers of (log t / 2 pi i), scalar after integration.
    pub log_coeffs: Vec<Complex64>,
}

impl LeadingTerm {
    pub fn eval(&self, t: f64) -> Complex64 {
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let u = Complex64::new(t.ln(), 0.0) / two_pi_i;
        let mut acc = Complex64::zero();
        let mut pow = Complex64::one();
        for c in &self.log_coeffs {
            acc += c * pow;
            pow *= u;
        }
        t.powf(q_to_f64(&self.psi_c)) * acc
    }
}

/// t^{psi(c)} (-1)^{rk N - deg c} (2 pi i)^{-|sigma(c)|} |Box|^{-1}
/// int t^omega Gamma-hat F_{I_c}, with omega = (2 pi i)^{-1} sum psi(v_i) D_i.
pub fn asymptotic_leading_term(
    coh: &Cohomology,
    c: &LatticePoint,
) -> Result<LeadingTerm, PeriodError> {
    let fan = &coh.fan;
    let decomp = fan
        .decompose_point(c)
        .map_err(|_| PeriodError::NotConvergent)?;
    if !decomp.asymptotics_eligible {
        return Err(PeriodError::NotEligible);
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
    let f = module
        .generator_class::<Complex64>(&k_rel)
        .unwrap_or_else(|| module.zero());
    // omega expanded as a class: sum_i psi(v_i) D_i, in units of 2 pi i.
    let mut omega = ring.zero::<Complex64>();
    for i in 0..fan.n_points() {
        let di = ring.d_class::<Complex64>(i);
        let w = Complex64::new(q_to_f64(&fan.psi[i]), 0.0);
        for (o, x) in omega.iter_mut().zip(di.iter()) {
            *o += w * x;
        }
    }
    let gamma = coh.gamma_class(s, false);
    let base = module.act(&gamma.coeffs, &f);
    // t^omega = sum_k (log t / 2 pi i)^k omega^k / k!; collect the scalar
    // integral per power of log t.
    let mut log_coeffs = Vec::new();
    let mut pow = base.clone();
    let mut fact = 1.0f64;
    let rk = fan.rank as i32;
    let deg_c = c.deg().to_i32().unwrap();
    let sign = if (rk - deg_c) % 2 == 0 { 1.0 } else { -1.0 };
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let norm = sign
        / (two_pi_i.powi(decomp.sigma_c.len() as i32)
            * fan.box_order(&ring.sector) as f64);
    for k in 0..=module.top_degree {
        if k > 0 {
            pow = module.act(&omega, &pow);
            fact *= k as f64;
        }
        log_coeffs.push(norm * module.integrate::<Complex64>(&pow) / fact);
    }
    Ok(LeadingTerm {
        psi_c: fan.psi_value(&decomp),
        log_coeffs,
    })
}

#[derive(Debug, Clone)]
pub struct AsymptoticsReport {
    pub t_grid: Vec<f64>,
    pub ratios: Vec<Complex64>,
    pub final_deviation: f64,
    pub pass: bool,
}

/// Ratio of the quadrature value along x_i = t^{-psi(v_i)} to the predicted
/// leading term; passes when the deviation shrinks toward the largest t and
/// ends below `bound`.
pub fn asymptotics_check(
    coh: &Cohomology,
    c: &LatticePoint,
    t_grid: &[f64],
    spec: &QuadratureSpec,
    bound: f64,
) -> Result<AsymptoticsReport, PeriodError> {
    let lead = asymptotic_leading_term(coh, c)?;
    let fan = &coh.fan;
    let mut ratios = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let x: Vec<f64> = fan.psi.iter().map(|p| t.powf(-q_to_f64(p))).collect();
        let z = a_central_charge(fan, c, &x, spec)?;
        let l = lead.eval(t);
        if l.norm() == 0.0 {
            return Err(PeriodError::NotEligible);
        }
        ratios.push(z.value / l);
    }
    let devs: Vec<f64> = ratios.iter().map(|r| (r - Complex64::one()).norm()).collect();
    let final_deviation = *devs.last().expect("nonempty grid");
    let trend_ok = devs.windows(2).all(|w| w[1] <= 1.1 * w[0] + 1e-8);
    Ok(AsymptoticsReport {
        t_grid: t_grid.to_vec(),
        ratios,
        final_deviation,
        pass: final_deviation < bound && trend_ok,
    })
}
