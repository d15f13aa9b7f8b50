//! Randomised invariants of the modes, brackets, τ and the discrete operator.

use std::f64::consts::PI;

use proptest::prelude::*;
use ptwg_core::asymptotics::{bracket_beta_vj, bracket_ode_oracle, predict, tau, CaseTag, Existence};
use ptwg_core::fd::{assemble, transverse_matrix, StripGrid};
use ptwg_core::transverse::ModeBasis;
use ptwg_core::{PerturbationProfile, Piece, QuadratureSpec, Regime, WaveguideParams};

fn admissible() -> impl Strategy<Value = WaveguideParams> {
    (0.5f64..3.5, -3.0f64..3.0)
        .prop_filter_map("forbidden coupling", |(d, r)| {
            // keep clear of integer ratios, where tangents blow up
            let frac = r.abs().fract();
            (r == 0.0 || (frac > 0.03 && frac < 0.97)).then(|| WaveguideParams::new(d, r * PI / d).unwrap())
        })
}

fn piece() -> impl Strategy<Value = Piece> {
    (-2.0f64..2.0, 0.3f64..1.5, 0.2f64..1.5, any::<bool>())
        .prop_map(|(c, w, a, neg)| Piece::bump(c, w, if neg { -a } else { a }))
}

fn profile() -> impl Strategy<Value = PerturbationProfile> {
    prop::collection::vec(piece(), 1..4).prop_map(|p| PerturbationProfile::new(p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brackets_positive_and_bounded(params in admissible(), beta in profile(), j in 1usize..40) {
        let b = bracket_beta_vj(&params, &beta, j, &QuadratureSpec::new(24, 2)).unwrap();
        prop_assert!(b.value > 0.0);
        prop_assert!(b.value <= b.tail_error * (1.0 + 1e-12));
    }

    #[test]
    fn bracket_matches_ode(params in admissible(), beta in profile(), j in 1usize..6) {
        let q = bracket_beta_vj(&params, &beta, j, &QuadratureSpec::new(48, 2)).unwrap();
        let o = bracket_ode_oracle(&params, &beta, j, 3000).unwrap();
        prop_assert!((q.value - o.value).abs() <= 1e-6 * o.value, "{} vs {}", q.value, o.value);
    }

    #[test]
    fn gram_is_identity(params in admissible()) {
        let g = ModeBasis::new(params, 8).unwrap().biortho_gram(&QuadratureSpec::new(120, 2));
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let t = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v - t).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn neumann_tau_negative(d in 0.5f64..3.5, beta in profile()) {
        let params = WaveguideParams::new(d, 0.0).unwrap();
        let t = tau(&params, &beta, 48, &QuadratureSpec::new(24, 2)).unwrap();
        prop_assert!(t.value < 0.0);
        prop_assert!(t.converged);
    }

    #[test]
    fn nonzero_mean_sign_decides_existence(params in admissible(), beta in profile(), eps in 0.01f64..0.5) {
        prop_assume!(params.regime() == Regime::Subcritical);
        let pr = predict(&params, &beta, eps).unwrap();
        let m = params.alpha0 * pr.mean;
        let scale = beta.moments(&QuadratureSpec::default()).l2norm_sq.sqrt();
        prop_assume!(pr.mean.abs() > 1e-6 * scale);
        if m < 0.0 {
            prop_assert_eq!(pr.exists, Existence::Yes);
            prop_assert_eq!(pr.case_tag, CaseTag::SubcriticalAttractive);
            prop_assert!(pr.lambda_coeffs[1] < 0.0);
        } else {
            prop_assert_eq!(pr.exists, Existence::No);
        }
    }

    #[test]
    fn reversed_coupling_conjugates_matrix(a0 in -2.0f64..2.0, amp in -1.0f64..1.0) {
        let params = WaveguideParams::new(1.0, a0).unwrap();
        let flipped = WaveguideParams::new(1.0, -a0).unwrap();
        prop_assume!(params.ensure_admissible().is_ok());
        let beta = PerturbationProfile::bump(0.3, 0.8, amp);
        let grid = StripGrid::new(3.0, 29, 7, 1.0).unwrap();
        let a = assemble(&params, |x| a0 + beta.value(x), &grid).unwrap();
        let b = assemble(&flipped, |x| -a0 - beta.value(x), &grid).unwrap();
        prop_assert_eq!(b.to_dense(), a.conj().to_dense());
        let t = transverse_matrix(a0, 1.0, 7).to_dense();
        let u = transverse_matrix(-a0, 1.0, 7).conj().to_dense();
        prop_assert_eq!(t, u);
    }
}
