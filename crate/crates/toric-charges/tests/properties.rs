//! Randomized structural invariants: exact ring axioms over the rationals,
//! the involution, multiplicativity of the Chern character, and bilinearity
//! of the Euler pairing.

use num_complex::Complex64;
use proptest::prelude::*;

use toric_charges::arith::{Q, Z};
use toric_charges::cohomology::{Cohomology, CompactClass, SectorClass};
use toric_charges::io::parse_fan_str;
use toric_charges::ktheory::{
    chern_character, chern_character_compact, euler_pairing, KClass,
};
use toric_charges::lattice::StackyFan;

fn fans() -> Vec<StackyFan> {
    [
        include_str!("../../../fans/d1.json"),
        include_str!("../../../fans/local_p2.json"),
        include_str!("../../../fans/c3_z3.toml"),
    ]
    .iter()
    .map(|t| parse_fan_str(t).expect("fixture"))
    .collect()
}

fn q(n: i32) -> Q {
    Q::from_integer(Z::from(n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_product_is_associative_and_commutative(
        fan_ix in 0usize..3,
        seed in proptest::collection::vec(-4i32..=4, 30),
    ) {
        let fan = &fans()[fan_ix];
        let coh = Cohomology::new(fan);
        for s in 0..coh.n_sectors() {
            let ring = coh.ring(s);
            let dim = ring.dim;
            let take = |off: usize| -> Vec<Q> {
                (0..dim).map(|i| q(seed[(off + i) % seed.len()])).collect()
            };
            let (a, b, c) = (take(0), take(7), take(13));
            prop_assert_eq!(ring.mul(&a, &b), ring.mul(&b, &a));
            prop_assert_eq!(
                ring.mul(&ring.mul(&a, &b), &c),
                ring.mul(&a, &ring.mul(&b, &c))
            );
        }
    }

    #[test]
    fn involution_squares_to_identity(
        fan_ix in 0usize..3,
        seed in proptest::collection::vec(-4i32..=4, 30),
    ) {
        let fan = &fans()[fan_ix];
        let coh = Cohomology::new(fan);
        for s in 0..coh.n_sectors() {
            let dim = coh.ring(s).dim;
            let coeffs: Vec<Q> = (0..dim).map(|i| q(seed[i % seed.len()])).collect();
            let x = SectorClass { sector: s, coeffs };
            let back = coh.involution(&coh.involution(&x));
            prop_assert_eq!(back.sector, x.sector);
            prop_assert_eq!(back.coeffs, x.coeffs);
        }
    }

    #[test]
    fn chern_character_is_multiplicative(
        fan_ix in 0usize..3,
        e1 in proptest::collection::vec(-2i64..=2, 4),
        e2 in proptest::collection::vec(-2i64..=2, 4),
    ) {
        let fan = &fans()[fan_ix];
        let n = fan.n_points();
        let coh = Cohomology::new(fan);
        let a = KClass::monomial(e1[..n].to_vec(), None);
        let b = KClass::monomial(e2[..n].to_vec(), None);
        let cha = chern_character(&coh, &a).unwrap();
        let chb = chern_character(&coh, &b).unwrap();
        let chab = chern_character(&coh, &a.product(&b).unwrap()).unwrap();
        for s in 0..coh.n_sectors() {
            let prod = coh.ring(s).mul(&cha[s].coeffs, &chb[s].coeffs);
            for (x, y) in prod.iter().zip(chab[s].coeffs.iter()) {
                prop_assert!((x - y).norm() < 1e-9, "sector {}: {} vs {}", s, x, y);
            }
        }
    }

    #[test]
    fn euler_pairing_is_bilinear(
        fan_ix in 0usize..3,
        seed in proptest::collection::vec(-3i32..=3, 40),
        lam_re in -2.0f64..2.0,
        lam_im in -2.0f64..2.0,
    ) {
        let fan = &fans()[fan_ix];
        let coh = Cohomology::new(fan);
        let lam = Complex64::new(lam_re, lam_im);
        let sector_classes = |off: usize| -> Vec<SectorClass<Complex64>> {
            (0..coh.n_sectors())
                .map(|s| SectorClass {
                    sector: s,
                    coeffs: (0..coh.ring(s).dim)
                        .map(|i| Complex64::new(seed[(off + 3 * s + i) % seed.len()] as f64, 0.0))
                        .collect(),
                })
                .collect()
        };
        let compact_classes = |off: usize| -> Vec<CompactClass<Complex64>> {
            (0..coh.n_sectors())
                .map(|s| CompactClass {
                    sector: s,
                    coeffs: (0..coh.module(s).dim)
                        .map(|i| Complex64::new(seed[(off + 5 * s + i) % seed.len()] as f64, 0.0))
                        .collect(),
                })
                .collect()
        };
        let (a1, a2) = (sector_classes(0), sector_classes(11));
        let b = compact_classes(23);
        let combo: Vec<SectorClass<Complex64>> = (0..coh.n_sectors())
            .map(|s| SectorClass {
                sector: s,
                coeffs: a1[s]
                    .coeffs
                    .iter()
                    .zip(a2[s].coeffs.iter())
                    .map(|(x, y)| x + lam * y)
                    .collect(),
            })
            .collect();
        let lhs = euler_pairing(&coh, &combo, &b).unwrap();
        let rhs = euler_pairing(&coh, &a1, &b).unwrap()
            + lam * euler_pairing(&coh, &a2, &b).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9, "{} vs {}", lhs, rhs);
    }
}

#[test]
fn euler_pairing_integral_on_k_lattice_samples() {
    // chi on random K-lattice pairs is an integer on every fixture.
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for fan in fans() {
        let coh = Cohomology::new(&fan);
        let n = fan.n_points();
        for _ in 0..8 {
            let ea: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            let eb: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            // A random interior cone for the generator.
            let interior: Vec<Vec<usize>> = fan
                .cones
                .iter()
                .filter(|c| !c.is_empty() && fan.is_interior_cone(c))
                .cloned()
                .collect();
            let g = interior[rng.gen_range(0..interior.len())].clone();
            let a = chern_character(&coh, &KClass::monomial(ea, None)).unwrap();
            let b = chern_character_compact(&coh, &KClass::monomial(eb, Some(g.clone()))).unwrap();
            let chi = euler_pairing(&coh, &a, &b).unwrap();
            assert!(chi.im.abs() < 1e-9, "non-real chi {chi} (G {g:?})");
            assert!(
                (chi.re - chi.re.round()).abs() < 1e-9,
                "non-integer chi {chi} (G {g:?})"
            );
        }
    }
}
