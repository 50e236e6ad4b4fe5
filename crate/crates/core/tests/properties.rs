//! Property tests over adversarial inputs: modulus reduction on arbitrary
//! period pairs, congruence under lattice translates, and the round trip of
//! the complex-number grammar.

use num_complex::Complex64;
use proptest::prelude::*;

use greenpol::lattice::{Lattice, LatticeError};
use greenpol::report::parse_complex;

fn finite_range() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1e3f64..1e3).prop_filter("nonzero scale", |x| x.abs() > 1e-6),
        (-1.0f64..1.0),
    ]
}

proptest! {
    /// Reduction either produces a modulus in the fundamental domain with a
    /// unimodular basis change spanning the same lattice, or rejects the
    /// input with a typed error.
    #[test]
    fn reduction_invariants(
        a in finite_range(), b in finite_range(),
        c in finite_range(), d in finite_range(),
    ) {
        let omega1 = Complex64::new(a, b);
        let omega2 = Complex64::new(c, d);
        match Lattice::reduce(omega1, omega2) {
            Ok((lattice, m)) => {
                let tau = lattice.tau();
                prop_assert!(tau.im > 0.0);
                prop_assert!(tau.re.abs() <= 0.5 + 1e-9);
                prop_assert!(tau.norm() >= 1.0 - 1e-9);
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                prop_assert!(det == 1 || det == -1);
                // the original periods are integer combinations of the new
                // basis: lattice coordinates are integral
                for original in [omega1, omega2] {
                    let (s, t) = lattice.coords(original);
                    prop_assert!((s - s.round()).abs() < 1e-6, "s = {s}");
                    prop_assert!((t - t.round()).abs() < 1e-6, "t = {t}");
                }
            }
            Err(
                LatticeError::Degenerate | LatticeError::ZeroPeriod | LatticeError::PrecisionLoss,
            ) => {}
        }
    }

    /// Congruence is invariant under integer lattice translates and
    /// rejects genuinely distinct points.
    #[test]
    fn congruence_under_translates(
        s in 0.0f64..1.0, t in 0.0f64..1.0,
        m in -7i32..7, n in -7i32..7,
    ) {
        let lattice = Lattice::normalized(Complex64::new(-0.2, 1.6)).unwrap();
        let z = lattice.from_coords(s, t);
        let w = z + f64::from(m) * lattice.omega1() + f64::from(n) * lattice.omega2();
        prop_assert!(lattice.is_congruent(z, w, 1e-9));
        let off = z + 0.37 * lattice.omega1();
        prop_assert!(!lattice.is_congruent(z, off, 1e-3));
    }

    /// Printing a complex number in the documented grammar and parsing it
    /// back is the identity.
    #[test]
    fn complex_grammar_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let rendered = if im >= 0.0 {
            format!("{re}+{im}i")
        } else {
            format!("{re}{im}i")
        };
        let parsed = parse_complex(&rendered).unwrap();
        prop_assert_eq!(parsed.re, re);
        prop_assert_eq!(parsed.im, im);
        // scientific notation round trip
        let sci = if im >= 0.0 {
            format!("{re:e}+{im:e}i")
        } else {
            format!("{re:e}{im:e}i")
        };
        let parsed_sci = parse_complex(&sci).unwrap();
        prop_assert_eq!(parsed_sci.re, re);
        prop_assert_eq!(parsed_sci.im, im);
    }
}
