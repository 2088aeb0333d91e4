//! Per-sector cohomology rings and compactly supported modules.
//!
//! Each twisted sector gamma carries a finite-dimensional graded ring H_gamma
//! presented by Stanley–Reisner products over non-cones of the star together
//! with the linear relations sum_i mu(v_i) D_i = 0, and a module H^c_gamma
//! generated by classes F_K indexed by interior cones of the star. Both are
//! built by degreewise exact row reduction over the rationals; series (Todd,
//! Gamma, exponentials) truncate exactly by nilpotency.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::arith::{self, Q, Z};
use crate::lattice::{QuotientFan, StackyFan, TwistedSector};
use crate::scalar::{q_to_f64, Scalar};
use crate::special;

pub type Monomial = Vec<u8>;

/// One graded degree of a presented algebra/module: the ambient columns, the
/// reduced relation rows, and which columns survive as basis elements.
#[derive(Debug, Clone)]
struct GradedPiece {
    /// Reduced relation rows (dense over the degree's columns).
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
    /// Columns that are standard (basis) elements, in column order.
    standard: Vec<usize>,
    /// Global basis index of standard[k].
    basis_index: Vec<usize>,
}

impl GradedPiece {
    /// Reduce a dense vector over this degree's columns to global basis
    /// coordinates, accumulating into `out`.
    fn reduce_into(&self, mut dense: Vec<Q>, out: &mut [Q]) {
        for (row, &piv) in self.rows.iter().zip(self.pivots.iter()) {
            if dense[piv].is_zero() {
                continue;
            }
            let f = std::mem::replace(&mut dense[piv], Q::zero());
            for (x, r) in dense.iter_mut().zip(row.iter()) {
                *x = &*x - &(&f * r);
            }
            // The pivot entry is 1 in a reduced row; restore exact zero.
            dense[piv] = Q::zero();
        }
        for (&col, &gi) in self.standard.iter().zip(self.basis_index.iter()) {
            if !dense[col].is_zero() {
                out[gi] = &out[gi] + &dense[col];
            }
        }
    }
}

fn build_piece(relations: &[Vec<Q>], col_order: &[usize], basis_start: usize) -> GradedPiece {
    let (rows, pivots) = arith::rref_ordered(relations, col_order);
    let mut standard: Vec<usize> = col_order
        .iter()
        .copied()
        .filter(|c| !pivots.contains(c))
        .collect();
    standard.sort_unstable();
    let basis_index = (0..standard.len()).map(|k| basis_start + k).collect();
    GradedPiece {
        rows,
        pivots,
        standard,
        basis_index,
    }
}

// ---------------------------------------------------------------------------
// Sector ring
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SectorRing {
    pub sector_index: usize,
    pub sector: TwistedSector,
    pub star: QuotientFan,
    /// Global ray indices of the free (non-pivot) variables; the ring basis
    /// consists of normal-form monomials in these.
    pub free_vars: Vec<usize>,
    /// For every global ray i: D_i as a linear form over the free variables.
    pub d_linear: Vec<Vec<Q>>,
    /// Basis monomials (degree, exponents over free_vars), ordered by degree
    /// then by the deterministic monomial order.
    pub basis: Vec<(usize, Monomial)>,
    pieces: Vec<GradedPiece>,
    monomials_by_degree: Vec<Vec<Monomial>>,
    mult_table: Vec<Vec<Vec<Q>>>,
    pub dim: usize,
    /// Largest degree with a nonzero graded piece.
    pub top_degree: usize,
}

/// Degree-k monomials over `nf` variables in a fixed deterministic order
/// (first exponent decreasing, then recursively).
fn monomials_of_degree(nf: usize, k: usize) -> Vec<Monomial> {
    if nf == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    if nf == 1 {
        return vec![vec![k as u8]];
    }
    let mut out = Vec::new();
    for e0 in (0..=k).rev() {
        for rest in monomials_of_degree(nf - 1, k - e0) {
            let mut m = Vec::with_capacity(nf);
            m.push(e0 as u8);
            m.extend(rest);
            out.push(m);
        }
    }
    out
}

fn monomial_index(monomials: &[Monomial], m: &Monomial) -> usize {
    monomials
        .iter()
        .position(|x| x == m)
        .expect("monomial present in its degree")
}

/// Multiply two polynomials given as dense degree-homogeneous vectors,
/// returning a dense vector in the product degree.
fn poly_mul_dense(
    a: &[Q],
    deg_a: usize,
    b: &[Q],
    deg_b: usize,
    by_degree: &[Vec<Monomial>],
) -> Vec<Q> {
    let ma = &by_degree[deg_a];
    let mb = &by_degree[deg_b];
    let mc = &by_degree[deg_a + deg_b];
    let mut out = vec![Q::zero(); mc.len()];
    for (ia, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (ib, cb) in b.iter().enumerate() {
            if cb.is_zero() {
                continue;
            }
            let prod: Monomial = ma[ia]
                .iter()
                .zip(mb[ib].iter())
                .map(|(x, y)| x + y)
                .collect();
            let ic = monomial_index(mc, &prod);
            out[ic] = &out[ic] + &(ca * cb);
        }
    }
    out
}

pub fn build_sector_ring(fan: &StackyFan, sector_index: usize) -> SectorRing {
    let sector = fan.box_sectors[sector_index].clone();
    let star = fan
        .star_and_quotient(&sector.sigma)
        .expect("sector cone is a cone of the fan");
    let n = fan.n_points();

    // Support of the ring: rays of cones containing sigma, plus sigma itself.
    let mut support: Vec<usize> = sector.sigma.clone();
    support.extend(star.star_rays.iter().copied());
    support.sort_unstable();

    // Linear relations sum_i v_i[k] D_i = 0 restricted to the support;
    // pivot preference: sigma columns first, then ascending ray index.
    let rel_rows: Vec<Vec<Q>> = (0..fan.rank)
        .map(|k| {
            support
                .iter()
                .map(|&i| Q::from_integer(fan.points[i].coords[k].clone()))
                .collect()
        })
        .collect();
    let mut col_order: Vec<usize> = Vec::new();
    for (c, &i) in support.iter().enumerate() {
        if sector.sigma.contains(&i) {
            col_order.push(c);
        }
    }
    for (c, &i) in support.iter().enumerate() {
        if !sector.sigma.contains(&i) {
            col_order.push(c);
        }
    }
    let (rr, pivots) = arith::rref_ordered(&rel_rows, &col_order);
    // Sigma columns are independent, so they are always eliminated.
    for (c, &i) in support.iter().enumerate() {
        if sector.sigma.contains(&i) {
            debug_assert!(pivots.contains(&c));
        }
    }
    let free_cols: Vec<usize> = (0..support.len()).filter(|c| !pivots.contains(c)).collect();
    let free_vars: Vec<usize> = free_cols.iter().map(|&c| support[c]).collect();
    let nf = free_vars.len();

    let mut d_linear = vec![vec![Q::zero(); nf]; n];
    for (f, &c) in free_cols.iter().enumerate() {
        d_linear[support[c]][f] = Q::one();
    }
    for (row, &p) in rr.iter().zip(pivots.iter()) {
        let i = support[p];
        for (f, &c) in free_cols.iter().enumerate() {
            d_linear[i][f] = -row[c].clone();
        }
    }

    // Stanley–Reisner generators: minimal non-faces of the star, substituted
    // into the free variables.
    let star_rel_rays = star.star_rays.clone();
    let mut sr_gens: Vec<Vec<usize>> = Vec::new(); // subsets of star_rel_rays
    for size in 1..=star_rel_rays.len() {
        use itertools::Itertools;
        for j in star_rel_rays.iter().copied().combinations(size) {
            let mut full: Vec<usize> = sector.sigma.iter().copied().chain(j.iter().copied()).collect();
            full.sort_unstable();
            full.dedup();
            if fan.is_cone(&full) {
                continue;
            }
            if sr_gens.iter().any(|g| g.iter().all(|x| j.contains(x))) {
                continue; // non-minimal
            }
            sr_gens.push(j);
        }
    }

    // Substituted generator polynomials (dense by degree).
    let max_deg = star.dim + 1;
    let monomials_by_degree: Vec<Vec<Monomial>> =
        (0..=2 * star.dim + 2).map(|k| monomials_of_degree(nf, k)).collect();
    let sr_polys: Vec<(usize, Vec<Q>)> = sr_gens
        .iter()
        .filter(|j| j.len() <= 2 * star.dim + 2)
        .map(|j| {
            let mut deg = 0usize;
            let mut poly = vec![Q::one()]; // degree-0 constant 1
            for &ray in j.iter() {
                let lin: Vec<Q> = d_linear[ray].clone();
                poly = poly_mul_dense(&poly, deg, &lin, 1, &monomials_by_degree);
                deg += 1;
            }
            (deg, poly)
        })
        .collect();

    // Degreewise reduction.
    let mut pieces: Vec<GradedPiece> = Vec::new();
    let mut basis: Vec<(usize, Monomial)> = Vec::new();
    let mut top_degree = 0usize;
    for k in 0..=max_deg {
        let cols = monomials_by_degree[k].len();
        let mut relations: Vec<Vec<Q>> = Vec::new();
        for (dg, g) in &sr_polys {
            if *dg > k {
                continue;
            }
            for m in &monomials_by_degree[k - dg] {
                let mut mv = vec![Q::zero(); monomials_by_degree[k - dg].len()];
                mv[monomial_index(&monomials_by_degree[k - dg], m)] = Q::one();
                let prod = poly_mul_dense(&mv, k - dg, g, *dg, &monomials_by_degree);
                relations.push(prod);
            }
        }
        let order: Vec<usize> = (0..cols).collect();
        let piece = build_piece(&relations, &order, basis.len());
        let empty = piece.standard.is_empty();
        for &c in &piece.standard {
            basis.push((k, monomials_by_degree[k][c].clone()));
        }
        if !empty {
            top_degree = k;
        }
        pieces.push(piece);
        if empty {
            break;
        }
    }
    assert!(
        top_degree <= star.dim,
        "sector ring degree exceeds the quotient-fan dimension"
    );
    assert!(
        pieces.len() <= star.dim + 1 || pieces[star.dim + 1].standard.is_empty(),
        "sector ring is not nilpotent past the top degree"
    );

    let dim = basis.len();
    let mut ring = SectorRing {
        sector_index,
        sector,
        star,
        free_vars,
        d_linear,
        basis,
        pieces,
        monomials_by_degree,
        mult_table: Vec::new(),
        dim,
        top_degree,
    };
    // Structure constants.
    let mut table = vec![vec![vec![Q::zero(); dim]; dim]; dim];
    for p in 0..dim {
        for q in 0..dim {
            table[p][q] = ring.reduce_monomial_product(p, q);
        }
    }
    ring.mult_table = table;
    ring
}

impl SectorRing {
    fn reduce_monomial_product(&self, p: usize, q: usize) -> Vec<Q> {
        let (dp, mp) = &self.basis[p];
        let (dq, mq) = &self.basis[q];
        let k = dp + dq;
        let mut out = vec![Q::zero(); self.dim];
        if k >= self.pieces.len() {
            return out;
        }
        let prod: Monomial = mp.iter().zip(mq.iter()).map(|(a, b)| a + b).collect();
        let cols = self.monomials_by_degree[k].len();
        let mut dense = vec![Q::zero(); cols];
        dense[monomial_index(&self.monomials_by_degree[k], &prod)] = Q::one();
        self.pieces[k].reduce_into(dense, &mut out);
        out
    }

    pub fn zero<K: Scalar>(&self) -> Vec<K> {
        vec![K::zero(); self.dim]
    }

    pub fn one<K: Scalar>(&self) -> Vec<K> {
        let mut v = self.zero::<K>();
        v[0] = K::one();
        v
    }

    pub fn mul<K: Scalar>(&self, a: &[K], b: &[K]) -> Vec<K> {
        let mut out = self.zero::<K>();
        for (p, ap) in a.iter().enumerate() {
            if ap.is_zero() {
                continue;
            }
            for (q, bq) in b.iter().enumerate() {
                if bq.is_zero() {
                    continue;
                }
                let f = ap.clone() * bq.clone();
                for (o, t) in out.iter_mut().zip(self.mult_table[p][q].iter()) {
                    *o = o.clone() + f.clone() * K::from_q(t);
                }
            }
        }
        out
    }

    pub fn add<K: Scalar>(&self, a: &[K], b: &[K]) -> Vec<K> {
        a.iter().zip(b.iter()).map(|(x, y)| x.clone() + y.clone()).collect()
    }

    pub fn scale<K: Scalar>(&self, s: &K, a: &[K]) -> Vec<K> {
        a.iter().map(|x| s.clone() * x.clone()).collect()
    }

    /// The class of a linear form `sum_f form[f] * D_{free_vars[f]}`.
    pub fn linear_form_class<K: Scalar>(&self, form: &[Q]) -> Vec<K> {
        let mut out = self.zero::<K>();
        if self.pieces.len() <= 1 {
            return out;
        }
        let cols = self.monomials_by_degree[1].len();
        let mut dense = vec![Q::zero(); cols];
        for (f, c) in form.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut m = vec![0u8; self.free_vars.len()];
            m[f] = 1;
            let ix = monomial_index(&self.monomials_by_degree[1], &m);
            dense[ix] = &dense[ix] + c;
        }
        let mut out_q = vec![Q::zero(); self.dim];
        self.pieces[1].reduce_into(dense, &mut out_q);
        for (o, x) in out.iter_mut().zip(out_q.iter()) {
            *o = K::from_q(x);
        }
        out
    }

    /// Class of D_i (any global ray index).
    pub fn d_class<K: Scalar>(&self, i: usize) -> Vec<K> {
        self.linear_form_class(&self.d_linear[i])
    }

    /// sum_k series[k] * base^k, truncated by nilpotency.
    pub fn apply_series<K: Scalar>(&self, series: &[K], base: &[K]) -> Vec<K> {
        let mut out = self.zero::<K>();
        let mut pow = self.one::<K>();
        for (k, c) in series.iter().enumerate() {
            if k > 0 {
                pow = self.mul(&pow, base);
            }
            for (o, p) in out.iter_mut().zip(pow.iter()) {
                *o = o.clone() + c.clone() * p.clone();
            }
        }
        out
    }

    /// exp(base) with exact rational series, truncated by nilpotency.
    pub fn exp_class<K: Scalar>(&self, base: &[K]) -> Vec<K> {
        let mut fact = Q::one();
        let series: Vec<K> = (0..=self.top_degree)
            .map(|k| {
                if k > 0 {
                    fact = &fact * Q::from_integer(Z::from(k as i64));
                }
                K::from_q(&(Q::one() / &fact))
            })
            .collect();
        self.apply_series(&series, base)
    }

    pub fn degree_of(&self, basis_index: usize) -> usize {
        self.basis[basis_index].0
    }
}

// ---------------------------------------------------------------------------
// Compact module
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CompactModule {
    pub sector_index: usize,
    /// Generator index sets K (relative to sigma, i.e. disjoint from it);
    /// cone(K + sigma) is an interior cone of the star.
    pub generators: Vec<Vec<usize>>,
    /// Basis elements (module degree, ring basis index, generator index).
    pub basis: Vec<(usize, usize, usize)>,
    /// Columns per degree: (ring basis index, generator index).
    columns: Vec<Vec<(usize, usize)>>,
    pieces: Vec<GradedPiece>,
    /// Action of each ring basis element on the module basis
    /// (matrix column j = image of basis element j).
    ring_action: Vec<Vec<Vec<Q>>>,
    /// Coordinates of each generator F_K in the module basis.
    pub gen_class: Vec<Vec<Q>>,
    /// The integration functional over the module basis.
    pub integral: Vec<Q>,
    pub dim: usize,
    pub top_degree: usize,
}

pub fn build_compact_module(fan: &StackyFan, ring: &SectorRing) -> CompactModule {
    let sector = &ring.sector;
    let star = &ring.star;
    // Generators: relative cones K with cone(K + sigma) interior.
    let generators: Vec<Vec<usize>> = star
        .star_cones
        .iter()
        .filter(|k| {
            let full: Vec<usize> = sector
                .sigma
                .iter()
                .copied()
                .chain(k.iter().copied())
                .collect();
            fan.is_interior_cone(&full)
        })
        .cloned()
        .collect();

    let max_deg = star.dim + 1;
    // Columns by module degree.
    let mut columns: Vec<Vec<(usize, usize)>> = vec![Vec::new(); max_deg + 1];
    for (g, k_set) in generators.iter().enumerate() {
        for (p, (dp, _)) in ring.basis.iter().enumerate() {
            let deg = dp + k_set.len();
            if deg <= max_deg {
                columns[deg].push((p, g));
            }
        }
    }
    // Deterministic column order: non-pure columns first so that pure
    // generators survive as standard basis elements.
    for cols in columns.iter_mut() {
        cols.sort_by_key(|&(p, g)| (usize::from(p == 0), g, p));
    }

    // Base relations: for each generator K and ray i not in K + sigma with
    // D_i nonzero on the star: D_i F_K - F_{K+i} (or D_i F_K when K+i is not
    // a cone).
    struct BaseRel {
        gen: usize,
        d_class: Vec<Q>,
        target: Option<usize>,
    }
    let mut base_rels: Vec<BaseRel> = Vec::new();
    for (g, k_set) in generators.iter().enumerate() {
        for &i in star.star_rays.iter() {
            if k_set.contains(&i) {
                continue;
            }
            let mut k_plus: Vec<usize> = k_set.iter().copied().chain([i]).collect();
            k_plus.sort_unstable();
            let full: Vec<usize> = sector
                .sigma
                .iter()
                .copied()
                .chain(k_plus.iter().copied())
                .collect();
            let target = if fan.is_cone(&full) {
                Some(
                    generators
                        .iter()
                        .position(|x| x == &k_plus)
                        .expect("supersets of interior cones are interior"),
                )
            } else {
                None
            };
            let d_class_q: Vec<Q> = {
                let c: Vec<Q> = ring.d_class::<Q>(i);
                c
            };
            base_rels.push(BaseRel {
                gen: g,
                d_class: d_class_q,
                target,
            });
        }
    }

    // Degreewise reduction.
    let mut pieces: Vec<GradedPiece> = Vec::new();
    let mut basis: Vec<(usize, usize, usize)> = Vec::new();
    let mut top_degree = 0usize;
    for deg in 0..=max_deg {
        let cols = &columns[deg];
        let col_of = |p: usize, g: usize| -> usize {
            cols.iter().position(|&c| c == (p, g)).expect("column present")
        };
        let mut relations: Vec<Vec<Q>> = Vec::new();
        for rel in &base_rels {
            let k_len = generators[rel.gen].len();
            // Multiply the base relation by every ring basis element m_p with
            // deg(m_p) + 1 + |K| = deg.
            for (p, (dp, _)) in ring.basis.iter().enumerate() {
                if dp + 1 + k_len != deg {
                    continue;
                }
                let mut unit = vec![Q::zero(); ring.dim];
                unit[p] = Q::one();
                let prod = ring.mul::<Q>(&unit, &rel.d_class);
                let mut dense = vec![Q::zero(); cols.len()];
                for (p2, c) in prod.iter().enumerate() {
                    if !c.is_zero() {
                        dense[col_of(p2, rel.gen)] = c.clone();
                    }
                }
                if let Some(tg) = rel.target {
                    dense[col_of(p, tg)] = &dense[col_of(p, tg)] - &Q::one();
                }
                relations.push(dense);
            }
        }
        let order: Vec<usize> = (0..cols.len()).collect();
        let piece = build_piece(&relations, &order, basis.len());
        let empty = piece.standard.is_empty();
        for &c in &piece.standard {
            let (p, g) = cols[c];
            basis.push((deg, p, g));
        }
        if !empty {
            top_degree = deg;
        }
        pieces.push(piece);
    }
    assert!(
        top_degree <= star.dim,
        "compact module degree exceeds the quotient-fan dimension"
    );
    assert!(
        pieces[star.dim + 1].standard.is_empty(),
        "compact module is not nilpotent past the top degree"
    );

    let dim = basis.len();
    let mut module = CompactModule {
        sector_index: ring.sector_index,
        generators,
        basis,
        columns,
        pieces,
        ring_action: Vec::new(),
        gen_class: Vec::new(),
        integral: Vec::new(),
        dim,
        top_degree,
    };

    // Generator coordinates.
    module.gen_class = (0..module.generators.len())
        .map(|g| {
            let deg = module.generators[g].len();
            let mut dense = vec![Q::zero(); module.columns[deg].len()];
            let c = module.columns[deg]
                .iter()
                .position(|&x| x == (0, g))
                .expect("pure generator column");
            dense[c] = Q::one();
            let mut out = vec![Q::zero(); module.dim];
            module.pieces[deg].reduce_into(dense, &mut out);
            out
        })
        .collect();

    // Ring action matrices.
    let mut action = Vec::with_capacity(ring.dim);
    for p in 0..ring.dim {
        let mut unit = vec![Q::zero(); ring.dim];
        unit[p] = Q::one();
        let mut mat = vec![vec![Q::zero(); module.dim]; module.dim];
        for (j, &(deg_b, pb, g)) in module.basis.iter().enumerate() {
            let mut unit_b = vec![Q::zero(); ring.dim];
            unit_b[pb] = Q::one();
            let prod = ring.mul::<Q>(&unit, &unit_b);
            let target_deg = ring.degree_of(p) + deg_b;
            let mut out = vec![Q::zero(); module.dim];
            if target_deg < module.columns.len() {
                let cols = &module.columns[target_deg];
                let mut dense = vec![Q::zero(); cols.len()];
                for (p2, c) in prod.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let col = cols
                        .iter()
                        .position(|&x| x == (p2, g))
                        .expect("product column present");
                    dense[col] = c.clone();
                }
                module.pieces[target_deg].reduce_into(dense, &mut out);
            }
            for (row, val) in mat.iter_mut().zip(out.iter()) {
                row[j] = val.clone();
            }
        }
        action.push(mat);
    }
    module.ring_action = action;

    // Integration: the unique functional vanishing below the top degree and
    // taking 1/Vol on each top-dimensional generator.
    let top_positions: Vec<usize> = module
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &(d, _, _))| d == star.dim)
        .map(|(j, _)| j)
        .collect();
    let mut integral = vec![Q::zero(); module.dim];
    if !top_positions.is_empty() {
        let top_gens: Vec<usize> = (0..module.generators.len())
            .filter(|&g| module.generators[g].len() == star.dim)
            .collect();
        assert!(
            !top_gens.is_empty(),
            "top graded piece must be reachable from top generators"
        );
        let rows: Vec<Vec<Q>> = top_gens
            .iter()
            .map(|&g| top_positions.iter().map(|&j| module.gen_class[g][j].clone()).collect())
            .collect();
        let rhs: Vec<Q> = top_gens
            .iter()
            .map(|&g| {
                let vol = star.cone_volume(&fan.points, &module.generators[g]);
                Q::one() / Q::from_integer(vol)
            })
            .collect();
        let (_, piv) = arith::rref(&rows);
        assert_eq!(
            piv.len(),
            top_positions.len(),
            "integration functional must be determined by the top generators"
        );
        let phi = arith::solve(&rows, &rhs).expect("consistent integration values");
        for (&j, v) in top_positions.iter().zip(phi.iter()) {
            integral[j] = v.clone();
        }
    }
    module.integral = integral;
    module
}

impl CompactModule {
    pub fn zero<K: Scalar>(&self) -> Vec<K> {
        vec![K::zero(); self.dim]
    }

    /// Coordinates of F_K for a relative cone K; `None` when K is not a
    /// generator (boundary cone or non-cone): the class is zero.
    pub fn generator_class<K: Scalar>(&self, k_rel: &[usize]) -> Option<Vec<K>> {
        let mut key = k_rel.to_vec();
        key.sort_unstable();
        let g = self.generators.iter().position(|x| x == &key)?;
        Some(self.gen_class[g].iter().map(|x| K::from_q(x)).collect())
    }

    /// Act by a ring class on a module class.
    pub fn act<K: Scalar>(&self, ring_class: &[K], x: &[K]) -> Vec<K> {
        let mut out = self.zero::<K>();
        for (p, a) in ring_class.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mat = &self.ring_action[p];
            for (i, row) in mat.iter().enumerate() {
                let mut acc = K::zero();
                for (m, xj) in row.iter().zip(x.iter()) {
                    if !m.is_zero() && !xj.is_zero() {
                        acc = acc + K::from_q(m) * xj.clone();
                    }
                }
                out[i] = out[i].clone() + a.clone() * acc;
            }
        }
        out
    }

    pub fn integrate<K: Scalar>(&self, x: &[K]) -> K {
        let mut acc = K::zero();
        for (v, xi) in self.integral.iter().zip(x.iter()) {
            if !v.is_zero() {
                acc = acc + K::from_q(v) * xi.clone();
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// The per-fan container and characteristic classes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SectorClass<K> {
    pub sector: usize,
    pub coeffs: Vec<K>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompactClass<K> {
    pub sector: usize,
    pub coeffs: Vec<K>,
}

#[derive(Debug, Clone)]
pub struct Cohomology {
    pub fan: StackyFan,
    pub rings: Vec<SectorRing>,
    pub modules: Vec<CompactModule>,
    /// dual[s] = index of the dual sector.
    pub dual: Vec<usize>,
}

impl Cohomology {
    pub fn new(fan: &StackyFan) -> Self {
        let rings: Vec<SectorRing> = (0..fan.box_sectors.len())
            .map(|s| build_sector_ring(fan, s))
            .collect();
        let modules: Vec<CompactModule> = rings
            .iter()
            .map(|r| build_compact_module(fan, r))
            .collect();
        let dual: Vec<usize> = fan
            .box_sectors
            .iter()
            .map(|s| {
                let d = fan.dual_sector(s);
                fan.sector_index(&d.gamma).expect("dual sector is a box element")
            })
            .collect();
        // Dual sectors share sigma, hence the same presentation; the
        // involution below relies on the bases being literally identical.
        for (s, &ds) in dual.iter().enumerate() {
            debug_assert_eq!(rings[s].basis, rings[ds].basis);
        }
        Cohomology {
            fan: fan.clone(),
            rings,
            modules,
            dual,
        }
    }

    pub fn n_sectors(&self) -> usize {
        self.rings.len()
    }

    pub fn ring(&self, s: usize) -> &SectorRing {
        &self.rings[s]
    }

    pub fn module(&self, s: usize) -> &CompactModule {
        &self.modules[s]
    }

    /// The involution: D_i -> -D_i on coefficients, sector -> dual sector.
    pub fn involution<K: Scalar>(&self, x: &SectorClass<K>) -> SectorClass<K> {
        let ring = &self.rings[x.sector];
        let coeffs = x
            .coeffs
            .iter()
            .enumerate()
            .map(|(p, c)| {
                if ring.degree_of(p) % 2 == 1 {
                    -c.clone()
                } else {
                    c.clone()
                }
            })
            .collect();
        SectorClass {
            sector: self.dual[x.sector],
            coeffs,
        }
    }

    /// Todd class of the sector: product over the star's relative rays of
    /// D_i / (1 - e^{-D_i}), an exact rational series in nilpotents.
    pub fn todd_class(&self, s: usize) -> SectorClass<Q> {
        let ring = &self.rings[s];
        let series = todd_series(ring.top_degree);
        let mut acc = ring.one::<Q>();
        for &i in &ring.star.star_rays {
            let d = ring.d_class::<Q>(i);
            let f = ring.apply_series(&series, &d);
            acc = ring.mul(&acc, &f);
        }
        SectorClass { sector: s, coeffs: acc }
    }

    /// Determinant factor of the sector's normal directions,
    /// prod_{i in sigma(gamma)} (1 - e^{-2 pi i gamma_i} e^{-D_i}); equals 1
    /// on untwisted sectors.  The constant part is nonzero because
    /// gamma_i in (0, 1) for i in sigma(gamma).
    pub fn twisted_det_class(&self, s: usize) -> Vec<Complex64> {
        let ring = &self.rings[s];
        let mut acc = ring.one::<Complex64>();
        let exp = exp_series_c(ring.top_degree);
        for &i in &ring.sector.sigma {
            let g = q_to_f64(&ring.sector.frac[i]);
            let z = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * g);
            let d = ring.d_class::<Complex64>(i);
            let minus_d = ring.scale(&Complex64::new(-1.0, 0.0), &d);
            let e = ring.apply_series(&exp, &minus_d);
            let mut factor = ring.one::<Complex64>();
            for (f, x) in factor.iter_mut().zip(e.iter()) {
                *f -= z * x;
            }
            acc = ring.mul(&acc, &factor);
        }
        acc
    }

    /// Todd class including the twisted-sector factors
    /// prod_{i in sigma(gamma)} (1 - e^{-2 pi i gamma_i} e^{-D_i})^{-1};
    /// agrees with `todd_class` on untwisted sectors.
    pub fn todd_class_twisted(&self, s: usize) -> SectorClass<Complex64> {
        let ring = &self.rings[s];
        let base: Vec<Complex64> = self
            .todd_class(s)
            .coeffs
            .iter()
            .map(|x| Complex64::new(q_to_f64(x), 0.0))
            .collect();
        let det = self.twisted_det_class(s);
        let coeffs = ring.mul(&base, &invert_unit_class(ring, &det));
        SectorClass { sector: s, coeffs }
    }

    /// Gamma class: product of Gamma(gamma_i + D_i/(2 pi i)) over sigma and
    /// Gamma(1 + D_i/(2 pi i)) over the star's relative rays. `conj` applies
    /// the involution.
    pub fn gamma_class(&self, s: usize, conj: bool) -> SectorClass<Complex64> {
        let ring = &self.rings[s];
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let mut acc = ring.one::<Complex64>();
        let mut factors: Vec<(usize, f64)> = Vec::new();
        for &i in &ring.sector.sigma {
            factors.push((i, q_to_f64(&ring.sector.frac[i])));
        }
        for &i in &ring.star.star_rays {
            factors.push((i, 1.0));
        }
        for (i, a) in factors {
            assert!(a > 0.0, "polygamma at a nonpositive integer");
            let log_series = log_gamma_series(a, ring.top_degree);
            // Gamma(a + x) with x = D_i/2пi.
            let d = ring.d_class::<Complex64>(i);
            let x = ring.scale(&(Complex64::new(1.0, 0.0) / two_pi_i), &d);
            let mut log_cls = ring.zero::<Complex64>();
            let mut pow = ring.one::<Complex64>();
            for c in log_series.iter().skip(1) {
                pow = ring.mul(&pow, &x);
                for (l, p) in log_cls.iter_mut().zip(pow.iter()) {
                    *l += Complex64::new(*c, 0.0) * p;
                }
            }
            let exp_series: Vec<Complex64> = exp_series_c(ring.top_degree);
            let factor = ring.apply_series(&exp_series, &log_cls);
            let factor = ring.scale(&Complex64::new(special::gamma(a), 0.0), &factor);
            acc = ring.mul(&acc, &factor);
        }
        let cls = SectorClass { sector: s, coeffs: acc };
        if conj {
            self.involution(&cls)
        } else {
            cls
        }
    }

    pub fn integrate<K: Scalar>(&self, x: &CompactClass<K>) -> K {
        self.modules[x.sector].integrate(&x.coeffs)
    }
}

/// Coefficients of x/(1 - e^{-x}) up to degree `top` (exact rationals).
pub fn todd_series(top: usize) -> Vec<Q> {
    // x/(1-e^{-x}) = sum_k b_k x^k with b_k from the recurrence given by
    // (1-e^{-x})/x = sum_{j>=0} (-1)^j x^j/(j+1)!.
    let mut denom: Vec<Q> = Vec::with_capacity(top + 1);
    let mut fact = Q::one();
    for j in 0..=top {
        fact = if j == 0 { Q::one() } else { &fact * Q::from_integer(Z::from(j as i64 + 1)) };
        let sign = if j % 2 == 0 { Q::one() } else { -Q::one() };
        denom.push(sign / &fact);
    }
    // denom[j] = (-1)^j / (j+1)!; invert the power series.
    let mut out = vec![Q::zero(); top + 1];
    out[0] = Q::one();
    for k in 1..=top {
        let mut acc = Q::zero();
        for j in 1..=k {
            acc += &denom[j] * &out[k - j];
        }
        out[k] = -acc;
    }
    out
}

/// Inverse of a class whose constant term is nonzero (geometric series in
/// the nilpotent part).
fn invert_unit_class(ring: &SectorRing, c: &[Complex64]) -> Vec<Complex64> {
    let a0 = c[0];
    assert!(a0.norm() > 0.0, "class has no invertible constant term");
    let inv0 = Complex64::new(1.0, 0.0) / a0;
    // m = 1 - c/a0 is nilpotent; 1/c = (1/a0) * sum_k m^k.
    let mut m = ring.scale(&(-inv0), c);
    m[0] += Complex64::new(1.0, 0.0);
    let ones = vec![Complex64::new(1.0, 0.0); ring.top_degree + 1];
    ring.scale(&inv0, &ring.apply_series(&ones, &m))
}

fn exp_series_c(top: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(top + 1);
    let mut fact = 1.0f64;
    for k in 0..=top {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(Complex64::new(1.0 / fact, 0.0));
    }
    out
}

/// Series coefficients of log Gamma(a + x) in x, degree 0..top, at real a>0.
pub(crate) fn log_gamma_series(a: f64, top: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(top + 1);
    out.push(special::ln_gamma(a));
    if top >= 1 {
        out.push(special::digamma(a));
    }
    let mut fact = 1.0f64;
    for k in 2..=top {
        fact *= k as f64;
        out.push(special::polygamma(k - 1, a) / fact);
    }
    out
}
