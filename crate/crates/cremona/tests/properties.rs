//! Cross-cutting properties: the presentation of H, group laws of the word
//! layer, functoriality of form transport, and decomposition round-trips.

use cremona::forms::{omega0, pushforward, pullback, RationalTwoForm};
use cremona::maps::{
    compose, diag_map, equal, identity, invert_quadratic, q_map, swap_map,
    symplectic_automorphism_decompose,
};
use cremona::poly::{qi, qr};
use cremona::words::{
    conjugate_swap, eval, format, invert, is_identity, parse, pushforward_word, qword_eval,
    reduce, Gen, QuadraticWord, Word,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::new(
        (0..len)
            .map(|_| {
                let g = match rng.gen_range(0..3) {
                    0 => Gen::C,
                    1 => Gen::I,
                    _ => Gen::P,
                };
                let mut e = 0;
                while e == 0 {
                    e = rng.gen_range(-4i64..=4);
                }
                (g, e)
            })
            .collect(),
    )
}

/// Products of conjugated relators are trivial in H; the reducer must agree.
#[test]
fn presentation_consequences() {
    let relators: Vec<Word> = ["I^4", "C^3", "C I^2 C^-1 I^-2", "P^5", "P C P I^-1"]
        .iter()
        .map(|s| parse(s).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..200 {
        let mut w = Word::empty();
        for _ in 0..rng.gen_range(1..=3) {
            let r = &relators[rng.gen_range(0..relators.len())];
            let r = if rng.gen_bool(0.5) { invert(r) } else { r.clone() };
            let g = random_word(&mut rng, 2);
            w = w.concat(&g).concat(&r).concat(&invert(&g));
        }
        assert!(
            is_identity(&w).unwrap(),
            "case {}: relator consequence {:?} did not reduce to 1",
            case,
            w
        );
    }
}

#[test]
fn word_group_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..60 {
        let u = random_word(&mut rng, 4);
        let v = random_word(&mut rng, 4);
        assert!(equal(
            &eval(&u.concat(&v)),
            &compose(&eval(&u), &eval(&v))
        ));
        assert!(equal(
            &compose(&eval(&u), &eval(&invert(&u))),
            &identity()
        ));
        // parse/format round-trip
        assert_eq!(parse(&format(&u)).unwrap(), u);
    }
}

#[test]
fn reduce_gives_catalog_normal_forms() {
    // values of degree ≤ 2 come back as a plain catalog spelling
    let red = reduce(&parse("I I P").unwrap()).unwrap();
    assert_eq!(format(&red.word), "I^2 P");
    assert!(!red.flagged);
    let red = reduce(&parse("P P").unwrap()).unwrap();
    assert_eq!(format(&red.word), "P^2");
    let red = reduce(&parse("C^2 P C").unwrap()).unwrap();
    assert!(equal(&eval(&red.word), &eval(&parse("C^2 P C").unwrap())));
    assert_eq!(red.value_degree, 2);
}

#[test]
fn swap_conjugation_preserves_values() {
    let tau = swap_map();
    for i in 1..=12u8 {
        for b in 0..3u8 {
            let q = QuadraticWord::new(0, i, b);
            let c = conjugate_swap(&q);
            assert!(equal(
                &qword_eval(&c),
                &compose(&tau, &compose(&qword_eval(&q), &tau))
            ));
        }
    }
}

#[test]
fn transport_functoriality() {
    let w0 = omega0();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..25 {
        let u = random_word(&mut rng, 3);
        let v = random_word(&mut rng, 3);
        let f = eval(&u);
        let g = eval(&v);
        // pullback is contravariant: (f∘g)^* = g^* ∘ f^*
        let lhs = pullback(&compose(&f, &g), &w0);
        let rhs = pullback(&g, &pullback(&f, &w0));
        assert_eq!(lhs.a(), rhs.a());
        assert_eq!(lhs.b(), rhs.b());
        // pushforward along words is covariant and inverts pullback
        let uv = u.concat(&v);
        let one = pushforward_word(&uv, &w0);
        let two = pushforward_word(&u, &pushforward_word(&v, &w0));
        assert_eq!(one.a(), two.a());
        assert_eq!(one.b(), two.b());
        let back = pushforward_word(&u, &pullback(&f, &w0));
        assert_eq!(back.a(), w0.a());
        assert_eq!(back.b(), w0.b());
    }
}

#[test]
fn transport_on_general_forms() {
    // a non-trivial form: ω = (A/B)·ω₀ with A = X²+YZ, B = XY+Z²
    let a = cremona::poly::HomPoly::from_terms(2, [([2, 0, 0], qi(1)), ([0, 1, 1], qi(1))]);
    let b = cremona::poly::HomPoly::from_terms(2, [([1, 1, 0], qi(1)), ([0, 0, 2], qi(1))]);
    let w = RationalTwoForm::new(a, b).unwrap();
    for i in [1usize, 4, 10, 12] {
        let f = q_map(i);
        let pulled = pullback(&f, &w);
        let back = pushforward(&f, &pulled).unwrap();
        assert_eq!(back.a(), w.a());
        assert_eq!(back.b(), w.b());
    }
}

#[test]
fn automorphism_decomposition_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..40 {
        let a = qr(rng.gen_range(1i64..=9), rng.gen_range(1i64..=9));
        let b = qr(rng.gen_range(1i64..=9), rng.gen_range(1i64..=9));
        let rot = rng.gen_range(0i64..3);
        let f = compose(&diag_map(&a, &b).unwrap(), &cremona::maps::c_pow(rot));
        let dec = symplectic_automorphism_decompose(&f).unwrap();
        assert!(dec.symplectic);
        assert_eq!(dec.scaling, (a, b));
    }
}

#[test]
fn quadratic_inverse_roundtrip() {
    for i in [3usize, 4, 5, 10, 11] {
        let f = q_map(i);
        let inv = invert_quadratic(&f).unwrap();
        assert!(equal(&compose(&inv, &f), &identity()));
        assert!(equal(&compose(&f, &inv), &identity()));
    }
}
