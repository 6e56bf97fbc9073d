use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use specnet_core::novikov::{wall_matrix, Coeff, Crossing, NovikovElement, NovikovMatrix};

type Q = BigRational;
type E = NovikovElement<Q>;

const C: f64 = 5.0;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn element(cutoff: f64) -> impl Strategy<Value = E> {
    // quarter-integer exponents keep sums exact
    prop::collection::vec((0u32..40, -5i64..=5), 0..5).prop_map(move |terms| {
        E::new(
            terms.into_iter().map(|(e, k)| (e as f64 * 0.25, q(k))).collect(),
            cutoff,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn addition_is_commutative_and_associative(a in element(C), b in element(C), d in element(C)) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().add(&d).unwrap(), a.add(&b.add(&d).unwrap()).unwrap());
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn multiplication_is_a_ring(a in element(C), b in element(C), d in element(C)) {
        let one = E::one(C);
        prop_assert_eq!(a.mul(&one).unwrap(), a.clone());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&d).unwrap(), a.mul(&b.mul(&d).unwrap()).unwrap());
        prop_assert_eq!(
            a.mul(&b.add(&d).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&d).unwrap()).unwrap()
        );
    }

    #[test]
    fn truncation_is_a_ring_map(a in element(f64::INFINITY), b in element(f64::INFINITY)) {
        let t = |x: &E| x.truncate(C).unwrap();
        prop_assert_eq!(t(&a.mul(&b).unwrap()), t(&a).mul(&t(&b)).unwrap());
        prop_assert_eq!(t(&a.add(&b).unwrap()), t(&a).add(&t(&b)).unwrap());
        prop_assert!(t(&a).terms().iter().all(|(e, _)| *e < C));
    }

    #[test]
    fn wall_matrices_are_unipotent(i in 0usize..3, j in 0usize..3, m in 0.0f64..6.0, a in -4i64..=4) {
        prop_assume!(i != j);
        let p = wall_matrix(3, (i, j), m, &q(a), Crossing::Positive, C).unwrap();
        let n = wall_matrix(3, (i, j), m, &q(a), Crossing::Negative, C).unwrap();
        prop_assert!(p.mul(&n).unwrap().is_identity());
        let d = p.sub(&NovikovMatrix::identity(3, C)).unwrap();
        prop_assert!(d.mul(&d).unwrap().approx_eq(&NovikovMatrix::zero(3, C), 0.0));
    }

    #[test]
    fn commutator_of_chained_walls(m1 in 0.25f64..2.0, m2 in 0.25f64..2.0, a in -3i64..=3, b in -3i64..=3) {
        // [I + a T^m1 E01, I + b T^m2 E12] = I + ab T^{m1+m2} E02
        let x = wall_matrix(3, (0, 1), m1, &q(a), Crossing::Positive, C).unwrap();
        let y = wall_matrix(3, (1, 2), m2, &q(b), Crossing::Positive, C).unwrap();
        let xi = wall_matrix(3, (0, 1), m1, &q(a), Crossing::Negative, C).unwrap();
        let yi = wall_matrix(3, (1, 2), m2, &q(b), Crossing::Negative, C).unwrap();
        let k = x.mul(&y).unwrap().mul(&xi).unwrap().mul(&yi).unwrap();
        let expect = wall_matrix(3, (0, 2), m1 + m2, &q(a * b), Crossing::Positive, C).unwrap();
        prop_assert_eq!(k, expect);
    }
}

#[test]
fn chained_product_needs_the_child() {
    // X Y = Y Z X with Z = I + ab T^{m1+m2} E02
    let (a, b) = (q(1), q(-1));
    let x = wall_matrix(3, (0, 1), 1.0, &a, Crossing::Positive, 4.0).unwrap();
    let y = wall_matrix(3, (1, 2), 1.5, &b, Crossing::Positive, 4.0).unwrap();
    let z = wall_matrix(3, (0, 2), 2.5, &a.mul(&b), Crossing::Positive, 4.0).unwrap();
    assert_ne!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
    assert_eq!(x.mul(&y).unwrap(), y.mul(&z).unwrap().mul(&x).unwrap());
    // below the cutoff of the child, the walls commute
    let xt = x.truncate(2.0).unwrap();
    let yt = y.truncate(2.0).unwrap();
    assert_eq!(xt.mul(&yt).unwrap(), yt.mul(&xt).unwrap());
}
