//! Values frozen from an independent 150-digit evaluation (mpmath): the
//! continued fraction summed from 420 digits, `θ_k = q_kα - p_k` directly,
//! and `β = Σ_{k square} θ_k` summed to `k = 400`.

use num_rational::BigRational;
use statchar::cf::{Budget, CfDigits, ConvergentTable, DigitRule, NormEngine};
use statchar::density::IndexSet;
use statchar::enclosure::{parse_rational, Enclosure};
use statchar::ostrowski::{decode, OstrowskiDigits};

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

/// The decimal `s` truncated at its last digit, as an enclosure.
fn near(s: &str, slack: &str) -> Enclosure {
    Enclosure::point(q(s)).widen(&q(slack))
}

fn prop34() -> CfDigits {
    CfDigits::rule(DigitRule::SquareSpikes)
}

const GOLDEN_ALPHA: &str = "0.61803398874989484820458683436563811772030918";
const PROP34_ALPHA: &str = "0.221502635756763303183194746920787201995137985";
const GOLDEN_BETA: &str = "-0.299650318212370211335770157129482595711697339";
const PROP34_BETA: &str = "-0.110118125012544926055095293232236616640149083";

#[test]
fn alpha_enclosures_meet_the_oracle() {
    for (d, v) in [(CfDigits::golden(), GOLDEN_ALPHA), (prop34(), PROP34_ALPHA)] {
        let e = ConvergentTable::new(d).alpha_enclosure(100).unwrap();
        assert!(e.width() < q("1e-40"));
        assert!(e.intersects(&near(v, "1e-44")));
    }
}

#[test]
fn theta_values() {
    let cases = [
        (CfDigits::golden(), 10, "0.005024998740641490208228258541792477107517", "1e-42"),
        (CfDigits::golden(), 30, "0.0000003321873975409129145932631052029191879246", "1e-46"),
        (prop34(), 10, "0.00001338308192810496030836353168671686056312", "1e-44"),
        (prop34(), 30, "6.697842001691409451486506168597856002368e-13", "1e-52"),
    ];
    for (d, n, v, slack) in cases {
        let mut t = ConvergentTable::new(d);
        let th = t.theta(n, &q("1e-50"), &Budget::default()).unwrap();
        assert!(th.enclosure.intersects(&near(v, slack)), "theta_{n}");
    }
}

#[test]
fn decode_of_square_support() {
    for (d, v) in [(CfDigits::golden(), GOLDEN_BETA), (prop34(), PROP34_BETA)] {
        let beta = OstrowskiDigits::ones_on(&d, IndexSet::Squares);
        let e = decode(&beta, 400, &q("1e-40")).unwrap();
        assert!(e.intersects(&near(v, "1e-44")), "{d:?}");
    }
}

#[test]
fn square_support_norms() {
    let golden = [
        (3, "0.101049045362889365992689528612"),
        (10, "0.331121679099051191116456015476"),
        (24, "0.265123883075105466156038639432"),
        (50, "0.277456762359320417739366886441"),
        (99, "0.276304488940278998313843591658"),
    ];
    let p34 = [
        (3, "0.00893687488709566550414236090987"),
        (10, "0.380949010833341546638732761403"),
        (24, "0.00581576818371233176788765664401"),
        (50, "0.380782543971750468216012447726"),
        (99, "0.00153972983695940285449176104939"),
    ];
    for (d, cases) in [(CfDigits::golden(), golden), (prop34(), p34)] {
        let beta = OstrowskiDigits::ones_on(&d, IndexSet::Squares);
        let eng = NormEngine::new(&beta, 100, Budget::default()).unwrap();
        for (n, v) in cases {
            let e = eng.norm(n, &q("1e-25")).unwrap();
            assert!(e.width() <= q("1e-25"));
            assert!(e.intersects(&near(v, "1e-30")), "{d:?} n={n}: {e:?}");
        }
    }
}

#[test]
fn multiple_norms_inside_spike_blocks() {
    let cases = [
        (3, 1, "0.00893687488709566550414236090987"),
        (3, 8, "0.071494999096765324033138887279"),
        (3, 16, "0.142989998193530648066277774558"),
        (8, 20, "0.223850193693658290671327505733"),
        (15, 33, "0.273889745476204406054806564297"),
        (15, 64, "0.468819887561300545833102420758"),
    ];
    let beta = OstrowskiDigits::ones_on(&prop34(), IndexSet::Squares);
    let eng = NormEngine::new(&beta, 20, Budget::default()).unwrap();
    for (n, r, v) in cases {
        let e = eng.multiple_norm(n, r, &q("1e-25")).unwrap();
        assert!(e.intersects(&near(v, "1e-30")), "n={n} r={r}");
    }
}

#[test]
fn silver_denominators_are_pell_numbers() {
    let t = ConvergentTable::with_depth(&CfDigits::silver(), 80).unwrap();
    let (mut a, mut b) = (1u128, 2u128);
    for n in 0..=80isize {
        assert_eq!(t.q(n), &a.into());
        let c = 2 * b + a;
        a = b;
        b = c;
    }
}
