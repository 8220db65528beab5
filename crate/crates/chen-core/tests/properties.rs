//! Property tests for the algebra kernels, plus an independent
//! matrix-representation oracle for the Clifford supertrace.

use chen_core::clifford::{cl_exp, d_map, dr_element, supertrace, CliffordElement, SkewMatrix};
use chen_core::curvature::CurvatureTensor;
use chen_core::forms::FormElement;
use chen_core::tensor::{Cap, TensorSeries};
use chen_core::word::Word;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_series(cap: Cap, d: u8) -> impl Strategy<Value = TensorSeries> {
    let letters = prop::collection::vec(0u8..=d, 0..=3);
    prop::collection::vec((letters, -2.0..2.0f64), 0..6).prop_map(move |terms| {
        let mut s = TensorSeries::zero(cap);
        for (letters, c) in terms {
            s.add_term(Word::from_letters(&letters), c);
        }
        s
    })
}

proptest! {
    #[test]
    fn tensor_mul_associative_and_unital(
        a in small_series(Cap::ByDegree(5), 3),
        b in small_series(Cap::ByDegree(5), 3),
        c in small_series(Cap::ByDegree(5), 3),
    ) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);

        let unit = TensorSeries::unit(Cap::ByDegree(5));
        prop_assert!(a.mul(&unit).unwrap().max_abs_diff(&a) < 1e-15);
        prop_assert!(unit.mul(&a).unwrap().max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn exp_log_inverse_within_cap(mut a in small_series(Cap::ByDegree(4), 2)) {
        // force a zero constant term
        let unit_gap = a.coeff(&Word::empty());
        a.add_term(Word::empty(), -unit_gap);
        let e = a.exp().unwrap();
        prop_assert!(e.log().unwrap().max_abs_diff(&a) < 1e-10);
    }
}

fn small_clifford(d: u8) -> impl Strategy<Value = CliffordElement> {
    prop::collection::vec((0u32..(1u32 << d), -2.0..2.0f64, -2.0..2.0f64), 0..6).prop_map(
        move |terms| {
            let mut s = CliffordElement::zero(d);
            for (mask, re, im) in terms {
                s.add_term(mask, Complex64::new(re, im));
            }
            s
        },
    )
}

proptest! {
    #[test]
    fn clifford_mul_associative(
        a in small_clifford(6),
        b in small_clifford(6),
        c in small_clifford(6),
    ) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn wedge_graded_commutative(
        am in 0u32..64,
        bm in 0u32..64,
        ca in -2.0..2.0f64,
        cb in -2.0..2.0f64,
    ) {
        let mut a = FormElement::zero(6);
        a.add_term(am, ca);
        let mut b = FormElement::zero(6);
        b.add_term(bm, cb);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let sign = if am.count_ones() * bm.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        prop_assert!(ab.max_abs_diff(&ba.scale(sign)) < 1e-13);
    }
}

fn random_skew(d: u8, rng: &mut ChaCha8Rng) -> SkewMatrix {
    let n = d as usize;
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(-1.0..1.0);
            m[i * n + j] = v;
            m[j * n + i] = -v;
        }
    }
    SkewMatrix::new(d, m).unwrap()
}

#[test]
fn d_map_is_a_lie_algebra_morphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for d in [4u8, 6] {
        for _ in 0..100 {
            let p1 = random_skew(d, &mut rng);
            let p2 = random_skew(d, &mut rng);
            let lhs = d_map(&p1.commutator(&p2).unwrap());
            let d1 = d_map(&p1);
            let d2 = d_map(&p2);
            let rhs = d1.mul(&d2).unwrap().sub(&d2.mul(&d1).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        }
    }
}

#[test]
fn d_map_linear_and_injective_on_basis() {
    // D(E_ij - E_ji) = e_i e_j / ... : images of the standard skew basis are
    // linearly independent (distinct bivectors), so the kernel is trivial.
    let d = 5u8;
    let n = d as usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = vec![0.0; n * n];
            m[i * n + j] = 1.0;
            m[j * n + i] = -1.0;
            let img = d_map(&SkewMatrix::new(d, m).unwrap());
            assert!(img.is_pure_grade(2));
            // exactly one basis bivector is hit
            let mask = (1u32 << i) | (1u32 << j);
            assert!(img.coeff(mask).l1_norm() > 0.0);
            assert_eq!(img.iter().count(), 1);
        }
    }
}

#[test]
fn grade_cancellation_below_half_dimension() {
    // A product of k grade-2 elements has grade at most 2k, so its
    // supertrace vanishes identically for k < d/2.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let d = 6u8;
    for _ in 0..50 {
        let a = d_map(&random_skew(d, &mut rng));
        let b = d_map(&random_skew(d, &mut rng));
        let p = a.mul(&b).unwrap(); // k = 2 < 3 = d/2
        assert_eq!(supertrace(&p).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(supertrace(&a).unwrap(), Complex64::new(0.0, 0.0));
    }
}

#[test]
fn dr_element_matches_space_form_and_antisymmetry() {
    let r = CurvatureTensor::constant_curvature(2, 1.3);
    let e = dr_element(&r, 1, 2).unwrap();
    // (kappa/2) e_1 e_2
    assert!((e.coeff(0b11).re - 0.65).abs() < 1e-14);
    assert!(e.is_pure_grade(2));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = CurvatureTensor::random_bianchi(4, &mut rng);
    for i in 1..=4u8 {
        for j in (i + 1)..=4u8 {
            let fwd = dr_element(&r, i, j).unwrap();
            let bwd = dr_element(&r, j, i).unwrap();
            assert!(fwd.add(&bwd).unwrap().max_abs_diff(&CliffordElement::zero(4)) < 1e-14);
        }
    }
    assert!(dr_element(&r, 1, 1).is_err());
    assert!(dr_element(&r, 0, 2).is_err());

    let z = CurvatureTensor::zero(4);
    assert_eq!(dr_element(&z, 1, 2).unwrap(), CliffordElement::zero(4));
}

// ---- matrix representation oracle for the supertrace ----

/// Dense complex matrix, row-major.
#[derive(Clone)]
struct CMat {
    n: usize,
    a: Vec<Complex64>,
}

impl CMat {
    fn zeros(n: usize) -> Self {
        CMat {
            n,
            a: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }
    fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }
    fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let v = self.a[i * n + k];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += v * other.a[k * n + j];
                }
            }
        }
        out
    }
    fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.n, other.n);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                for k in 0..m {
                    for l in 0..m {
                        out.a[(i * m + k) * (n * m) + (j * m + l)] =
                            self.a[i * n + j] * other.a[k * m + l];
                    }
                }
            }
        }
        out
    }
    fn scale(&self, c: Complex64) -> Self {
        CMat {
            n: self.n,
            a: self.a.iter().map(|v| c * v).collect(),
        }
    }
    fn add_assign(&mut self, other: &Self, c: Complex64) {
        for (s, o) in self.a.iter_mut().zip(&other.a) {
            *s += c * o;
        }
    }
    fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }
}

fn pauli(k: usize) -> CMat {
    let i = Complex64::new(0.0, 1.0);
    let o = Complex64::new(0.0, 0.0);
    let u = Complex64::new(1.0, 0.0);
    let a = match k {
        1 => vec![o, u, u, o],
        2 => vec![o, -i, i, o],
        3 => vec![u, o, o, -u],
        _ => unreachable!(),
    };
    CMat { n: 2, a }
}

/// Generators `e_i = i * gamma_i` on the spinor module (dimension `2^{d/2}`)
/// and the grading operator, for d = 2 and d = 4.
fn spinor_rep(d: u8) -> (Vec<CMat>, CMat) {
    let i = Complex64::new(0.0, 1.0);
    match d {
        2 => {
            let gens = vec![pauli(1).scale(i), pauli(2).scale(i)];
            (gens, pauli(3))
        }
        4 => {
            let one = CMat::eye(2);
            let gammas = vec![
                pauli(1).kron(&one),
                pauli(2).kron(&one),
                pauli(3).kron(&pauli(1)),
                pauli(3).kron(&pauli(2)),
            ];
            let gens: Vec<CMat> = gammas.iter().map(|g| g.scale(i)).collect();
            (gens, pauli(3).kron(&pauli(3)))
        }
        _ => panic!("representation built only for d = 2, 4"),
    }
}

fn to_matrix(a: &CliffordElement, gens: &[CMat]) -> CMat {
    let n = gens[0].n;
    let mut out = CMat::zeros(n);
    for (mask, c) in a.iter() {
        let mut mono = CMat::eye(n);
        for i in 0..gens.len() {
            if mask & (1 << i) != 0 {
                mono = mono.mul(&gens[i]);
            }
        }
        out.add_assign(&mono, c);
    }
    out
}

#[test]
fn spinor_rep_satisfies_the_relations() {
    for d in [2u8, 4] {
        let (gens, grading) = spinor_rep(d);
        let n = gens[0].n;
        for (i, gi) in gens.iter().enumerate() {
            for (j, gj) in gens.iter().enumerate() {
                let mut anti = gi.mul(gj);
                anti.add_assign(&gj.mul(gi), Complex64::new(1.0, 0.0));
                let expected = if i == j { -2.0 } else { 0.0 };
                for r in 0..n {
                    for c in 0..n {
                        let want = if r == c {
                            Complex64::new(expected, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        assert!((anti.a[r * n + c] - want).l1_norm() < 1e-14);
                    }
                }
            }
            // grading anticommutes with each generator
            let mut swap = grading.mul(gi);
            swap.add_assign(&gi.mul(&grading), Complex64::new(1.0, 0.0));
            assert!(swap.a.iter().all(|v| v.l1_norm() < 1e-14));
        }
    }
}

#[test]
fn supertrace_matches_spinor_module_trace() {
    // Str a = Tr_{S+} a - Tr_{S-} a = Tr(grading * a) on the explicit
    // representation, for random elements in d = 2 and d = 4.
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    for d in [2u8, 4] {
        let (gens, grading) = spinor_rep(d);
        for _ in 0..25 {
            let mut a = CliffordElement::zero(d);
            for mask in 0..(1u32 << d) {
                a.add_term(
                    mask,
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                );
            }
            let formula = supertrace(&a).unwrap();
            let graded_trace = grading.mul(&to_matrix(&a, &gens)).trace();
            assert!(
                (formula - graded_trace).l1_norm() < 1e-12,
                "d={d}: {formula} vs {graded_trace}"
            );
        }
    }
}

#[test]
fn exp_inverse_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let a = d_map(&random_skew(4, &mut rng));
        let e = cl_exp(&a, 128).unwrap();
        let inv = cl_exp(&a.scale_re(-1.0), 128).unwrap();
        let p = e.mul(&inv).unwrap();
        assert!(p.max_abs_diff(&CliffordElement::one(4)) < 1e-12);
    }
}
