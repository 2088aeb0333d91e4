//! Combinatorial K-groups, Chern characters, and the Euler pairing.
//!
//! K-classes are formal integer combinations of monomials in the line-bundle
//! generators R_i, optionally multiplied by a compactly supported generator
//! G_I. They are never reduced symbolically; finite dimensionality lives on
//! the cohomology side, reached through the Chern characters.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::Q;
use crate::cohomology::{Cohomology, CompactClass, SectorClass};
use crate::scalar::q_to_f64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KError {
    #[error("class contains a compactly supported generator, not in K0")]
    ClassNotInK0,
    #[error("class lacks a compactly supported generator, not in K0c")]
    ClassNotInK0c,
    #[error("generator index set is not an interior cone: {0:?}")]
    InvalidGeneratorSet(Vec<usize>),
    #[error("sector decompositions have different lengths")]
    SectorMismatch,
}

/// One monomial `coef * prod_i R_i^{exps[i]} * G_I` (G absent when `g` is
/// `None`). Serialized with 0-based `G` indices; the file format shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTerm {
    pub coef: i64,
    pub exps: Vec<i64>,
    #[serde(rename = "G", default)]
    pub g: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KClass {
    pub terms: Vec<KTerm>,
}

impl KClass {
    pub fn structure_sheaf(n: usize) -> Self {
        KClass {
            terms: vec![KTerm {
                coef: 1,
                exps: vec![0; n],
                g: None,
            }],
        }
    }

    pub fn monomial(exps: Vec<i64>, g: Option<Vec<usize>>) -> Self {
        KClass {
            terms: vec![KTerm { coef: 1, exps, g }],
        }
    }

    /// Formal product of two classes; at most one factor may carry G.
    pub fn product(&self, other: &KClass) -> Result<KClass, KError> {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let g = match (&a.g, &b.g) {
                    (Some(_), Some(_)) => return Err(KError::ClassNotInK0),
                    (Some(g), None) | (None, Some(g)) => Some(g.clone()),
                    (None, None) => None,
                };
                terms.push(KTerm {
                    coef: a.coef * b.coef,
                    exps: a.exps.iter().zip(b.exps.iter()).map(|(x, y)| x + y).collect(),
                    g,
                });
            }
        }
        Ok(KClass { terms })
    }
}

/// The sector-ring class of `prod_i ch_gamma(R_i)^{l_i}`: the root-of-unity
/// prefactor `e^{2 pi i <l, gamma>}` times `exp(sum_i l_i D_i)`, where the
/// D_i for i in sigma(gamma) are the solved nilpotent logarithms.
fn ch_monomial(coh: &Cohomology, s: usize, exps: &[i64]) -> Vec<Complex64> {
    let ring = coh.ring(s);
    let mut phase_arg = 0.0f64;
    let nf = ring.free_vars.len();
    let mut form = vec![Q::zero(); nf];
    for (i, &l) in exps.iter().enumerate() {
        if l == 0 {
            continue;
        }
        phase_arg += l as f64 * q_to_f64(&ring.sector.frac[i]);
        let lq = Q::from_integer(l.into());
        for (f, c) in form.iter_mut().zip(ring.d_linear[i].iter()) {
            *f = &*f + &(&lq * c);
        }
    }
    let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase_arg);
    let lin = ring.linear_form_class::<Complex64>(&form);
    ring.scale(&phase, &ring.exp_class(&lin))
}

pub fn chern_character(
    coh: &Cohomology,
    e: &KClass,
) -> Result<Vec<SectorClass<Complex64>>, KError> {
    if e.terms.iter().any(|t| t.g.is_some()) {
        return Err(KError::ClassNotInK0);
    }
    let mut out = Vec::with_capacity(coh.n_sectors());
    for s in 0..coh.n_sectors() {
        let ring = coh.ring(s);
        let mut acc = ring.zero::<Complex64>();
        for t in &e.terms {
            let m = ch_monomial(coh, s, &t.exps);
            let c = Complex64::new(t.coef as f64, 0.0);
            acc = ring.add(&acc, &ring.scale(&c, &m));
        }
        out.push(SectorClass {
            sector: s,
            coeffs: acc,
        });
    }
    Ok(out)
}

pub fn chern_character_compact(
    coh: &Cohomology,
    e: &KClass,
) -> Result<Vec<CompactClass<Complex64>>, KError> {
    for t in &e.terms {
        let g = t.g.as_ref().ok_or(KError::ClassNotInK0c)?;
        if !coh.fan.is_interior_cone(g) {
            return Err(KError::InvalidGeneratorSet(g.clone()));
        }
    }
    let mut out = Vec::with_capacity(coh.n_sectors());
    for s in 0..coh.n_sectors() {
        let ring = coh.ring(s);
        let module = coh.module(s);
        // Each generator ray of G_I contributes a Koszul factor (1 - R_i^{-1}):
        // for i in sigma(gamma) its Chern character is the determinant
        // constant (1 - e^{-2 pi i gamma_i} e^{-D_i}) that cancels the
        // matching factor of the twisted Todd class; for the remaining rays
        // it is (1 - e^{-D_i}) = [(1 - e^{-D_i})/D_i] . D_i with the D_i
        // absorbed by the module relation D_i F_I = F_{I u {i}}, leaving the
        // series factor.  Both are invisible against top-degree generators.
        let det = coh.twisted_det_class(s);
        let kos: Vec<Complex64> = {
            let mut fact = 1.0f64;
            (0..=ring.top_degree)
                .map(|k| {
                    fact *= (k + 1) as f64;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::new(sign / fact, 0.0)
                })
                .collect()
        };
        let mut acc = module.zero::<Complex64>();
        for t in &e.terms {
            let i_set = t.g.as_ref().expect("checked above");
            if !ring.sector.sigma.iter().all(|i| i_set.contains(i)) {
                continue;
            }
            let k_rel: Vec<usize> = i_set
                .iter()
                .copied()
                .filter(|i| !ring.sector.sigma.contains(i))
                .collect();
            let Some(f) = module.generator_class::<Complex64>(&k_rel) else {
                continue;
            };
            let mut m = ring.mul(&ch_monomial(coh, s, &t.exps), &det);
            for &i in &k_rel {
                let d = ring.d_class::<Complex64>(i);
                m = ring.mul(&m, &ring.apply_series(&kos, &d));
            }
            let v = module.act(&m, &f);
            let c = Complex64::new(t.coef as f64, 0.0);
            for (a, x) in acc.iter_mut().zip(v.iter()) {
                *a += c * x;
            }
        }
        out.push(CompactClass {
            sector: s,
            coeffs: acc,
        });
    }
    Ok(out)
}

/// chi(a, b) = sum_gamma |Box(sigma(gamma))|^{-1} int_{gamma^v}
/// Td(gamma^v) a_gamma^* b_{gamma^v}.
pub fn euler_pairing(
    coh: &Cohomology,
    a: &[SectorClass<Complex64>],
    b: &[CompactClass<Complex64>],
) -> Result<Complex64, KError> {
    if a.len() != coh.n_sectors() || b.len() != coh.n_sectors() {
        return Err(KError::SectorMismatch);
    }
    let mut total = Complex64::zero();
    for s in 0..coh.n_sectors() {
        let ds = coh.dual[s];
        let ring = coh.ring(ds);
        let module = coh.module(ds);
        let a_conj = coh.involution(&a[s]);
        debug_assert_eq!(a_conj.sector, ds);
        let td = coh.todd_class_twisted(ds).coeffs;
        let factor = ring.mul(&td, &a_conj.coeffs);
        let weight = 1.0 / coh.fan.box_order(&ring.sector) as f64;
        let val = module.integrate::<Complex64>(&module.act(&factor, &b[ds].coeffs));
        total += weight * val;
    }
    Ok(total)
}

/// chi(v) = sum_gamma |Box(sigma(gamma))|^{-1} int_gamma ch^c_gamma(v)
/// Td(gamma); agrees with euler_pairing(ch(O), ch^c(v)).
pub fn euler_characteristic(coh: &Cohomology, v: &KClass) -> Result<Complex64, KError> {
    let chc = chern_character_compact(coh, v)?;
    let mut total = Complex64::zero();
    for s in 0..coh.n_sectors() {
        let ring = coh.ring(s);
        let module = coh.module(s);
        let td = coh.todd_class_twisted(s).coeffs;
        let weight = 1.0 / coh.fan.box_order(&ring.sector) as f64;
        total += weight * module.integrate::<Complex64>(&module.act(&td, &chc[s].coeffs));
    }
    Ok(total)
}

/// ch(O(-sum a_i D_i)) = ch(prod R_i^{-a_i}), the sectorwise monodromy
/// multiplier.
pub fn monodromy_multiplier(coh: &Cohomology, a: &[i64]) -> Vec<SectorClass<Complex64>> {
    let exps: Vec<i64> = a.iter().map(|x| -x).collect();
    chern_character(coh, &KClass::monomial(exps, None)).expect("monomial class is in K0")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfans;
    use num_traits::One;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn ch_of_structure_sheaf_is_one() {
        for (_, fan) in testfans::all_fans() {
            let coh = Cohomology::new(&fan);
            let ch = chern_character(&coh, &KClass::structure_sheaf(fan.n_points())).unwrap();
            for (s, cls) in ch.iter().enumerate() {
                let mut expect = coh.ring(s).zero::<Complex64>();
                expect[0] = Complex64::one();
                for (a, b) in cls.coeffs.iter().zip(expect.iter()) {
                    assert!(close(*a, *b, 1e-14));
                }
            }
        }
    }

    #[test]
    fn ch_twisted_root_of_unity() {
        let fan = testfans::c3_z3();
        let coh = Cohomology::new(&fan);
        let r1 = KClass::monomial(vec![1, 0, 0], None);
        let ch = chern_character(&coh, &r1).unwrap();
        let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let mut seen = Vec::new();
        for s in 1..3 {
            assert_eq!(ch[s].coeffs.len(), 1);
            seen.push(ch[s].coeffs[0]);
        }
        assert!(seen.iter().any(|&x| close(x, omega, 1e-12)));
        assert!(seen.iter().any(|&x| close(x, omega * omega, 1e-12)));
        // Untwisted sector: nilpotents vanish on the point ring, so ch = 1.
        assert!(close(ch[0].coeffs[0], Complex64::one(), 1e-12));
    }

    #[test]
    fn ch_respects_k_relations() {
        // prod_i ch_gamma(R_i)^{v_i[k]} = 1 for every lattice coordinate k.
        for (name, fan) in testfans::all_fans() {
            let coh = Cohomology::new(&fan);
            for k in 0..fan.rank {
                let exps: Vec<i64> = fan
                    .points
                    .iter()
                    .map(|p| {
                        use num_traits::ToPrimitive;
                        p.coords[k].to_i64().unwrap()
                    })
                    .collect();
                let ch = chern_character(&coh, &KClass::monomial(exps, None)).unwrap();
                for (s, cls) in ch.iter().enumerate() {
                    let one = {
                        let mut v = coh.ring(s).zero::<Complex64>();
                        v[0] = Complex64::one();
                        v
                    };
                    for (a, b) in cls.coeffs.iter().zip(one.iter()) {
                        assert!(
                            close(*a, *b, 1e-12),
                            "relation {k} broken on {name} sector {s}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn ch_multiplicative() {
        let fan = testfans::local_p2();
        let coh = Cohomology::new(&fan);
        let a = KClass::monomial(vec![1, 0, 2, -1], None);
        let b = KClass::monomial(vec![0, 3, -1, 1], None);
        let prod = a.product(&b).unwrap();
        let cha = chern_character(&coh, &a).unwrap();
        let chb = chern_character(&coh, &b).unwrap();
        let chp = chern_character(&coh, &prod).unwrap();
        for s in 0..coh.n_sectors() {
            let m = coh.ring(s).mul(&cha[s].coeffs, &chb[s].coeffs);
            for (x, y) in m.iter().zip(chp[s].coeffs.iter()) {
                assert!(close(*x, *y, 1e-12));
            }
        }
    }

    #[test]
    fn ch_compact_examples() {
        // local P^2: ch^c(R_4 G_{4}) = e^{D_4} (1 - e^{-D_4})/D_4 . F_{4} at
        // gamma = 0 (0-based: ray 3); the Koszul factor of the generator ray
        // makes chi integral on non-top cones.
        let fan = testfans::local_p2();
        let coh = Cohomology::new(&fan);
        let e = KClass::monomial(vec![0, 0, 0, 1], Some(vec![3]));
        let chc = chern_character_compact(&coh, &e).unwrap();
        let ring = coh.ring(0);
        let module = coh.module(0);
        let f = module.generator_class::<Complex64>(&[3]).unwrap();
        let d = ring.d_class::<Complex64>(3);
        // (1 - e^{-x})/x = 1 - x/2 + x^2/6 - ...
        let kos = ring.apply_series(
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(-0.5, 0.0),
                Complex64::new(1.0 / 6.0, 0.0),
                Complex64::new(-1.0 / 24.0, 0.0),
            ][..ring.top_degree + 1],
            &d,
        );
        let expect = module.act(&ring.mul(&ring.exp_class(&d), &kos), &f);
        for (x, y) in chc[0].coeffs.iter().zip(expect.iter()) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn euler_pairing_skyscrapers() {
        // chi(O, G_{top cone}) = 1 on all fixtures, including the orbifold
        // point of C^3/Z_3 through the 1/3-weighted sector sum.
        for (name, fan) in testfans::all_fans() {
            let coh = Cohomology::new(&fan);
            let o = KClass::structure_sheaf(fan.n_points());
            let cho = chern_character(&coh, &o).unwrap();
            let top = fan.max_cones[0].clone();
            let g = KClass::monomial(vec![0; fan.n_points()], Some(top));
            let chg = chern_character_compact(&coh, &g).unwrap();
            let chi = euler_pairing(&coh, &cho, &chg).unwrap();
            assert!(
                close(chi, Complex64::one(), 1e-10),
                "chi(O, G_top) = {chi} on {name}"
            );
            // euler_characteristic computes the same number directly.
            let chi2 = euler_characteristic(&coh, &g).unwrap();
            assert!(close(chi, chi2, 1e-10));
        }
    }

    #[test]
    fn pairing_matrix_integral_and_invertible() {
        // On C^3/Z_3: basis {1, R_1, R_1^2} against {G, R_1 G, R_1^2 G} with
        // G on the full cone. Entries must be integers and the matrix
        // invertible of size vol(Delta) = 3.
        let fan = testfans::c3_z3();
        let coh = Cohomology::new(&fan);
        let mut mat = Vec::new();
        for j in 0..3i64 {
            let a = KClass::monomial(vec![j, 0, 0], None);
            let cha = chern_character(&coh, &a).unwrap();
            let mut row = Vec::new();
            for k in 0..3i64 {
                let b = KClass::monomial(vec![k, 0, 0], Some(vec![0, 1, 2]));
                let chb = chern_character_compact(&coh, &b).unwrap();
                let chi = euler_pairing(&coh, &cha, &chb).unwrap();
                assert!(chi.im.abs() < 1e-10, "non-real pairing {chi}");
                let r = chi.re.round();
                assert!((chi.re - r).abs() < 1e-9, "non-integer pairing {chi}");
                row.push(r as i64);
            }
            mat.push(row);
        }
        let det: f64 = {
            let m = &mat;
            (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) as f64
        };
        assert!(det != 0.0, "singular pairing matrix {mat:?}");
    }

    #[test]
    fn monodromy_composition() {
        let fan = testfans::local_p2();
        let coh = Cohomology::new(&fan);
        let a = [1i64, 0, 0, 2];
        let b = [0i64, 1, -1, 0];
        let sum: Vec<i64> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
        let ma = monodromy_multiplier(&coh, &a);
        let mb = monodromy_multiplier(&coh, &b);
        let ms = monodromy_multiplier(&coh, &sum);
        for s in 0..coh.n_sectors() {
            let prod = coh.ring(s).mul(&ma[s].coeffs, &mb[s].coeffs);
            for (x, y) in prod.iter().zip(ms[s].coeffs.iter()) {
                assert!(close(*x, *y, 1e-12));
            }
        }
        // d = 1 fan, a = (1,0): ch_0(R_1^{-1}) = e^{-D_1}; the segment ring
        // is a point, so this is just 1.
        let seg = testfans::segment();
        let coh = Cohomology::new(&seg);
        let m = monodromy_multiplier(&coh, &[1, 0]);
        assert!(close(m[0].coeffs[0], Complex64::one(), 1e-14));
    }

    #[test]
    fn k0_k0c_guards() {
        let fan = testfans::segment();
        let coh = Cohomology::new(&fan);
        let with_g = KClass::monomial(vec![0, 0], Some(vec![0, 1]));
        let without_g = KClass::structure_sheaf(2);
        assert_eq!(chern_character(&coh, &with_g), Err(KError::ClassNotInK0));
        assert_eq!(
            chern_character_compact(&coh, &without_g),
            Err(KError::ClassNotInK0c)
        );
        let bad = KClass::monomial(vec![0, 0], Some(vec![0]));
        assert_eq!(
            chern_character_compact(&coh, &bad),
            Err(KError::InvalidGeneratorSet(vec![0]))
        );
    }
}
