//! Serialization and unit-conversion round trips.

use enstrophy_cert::certify::{CertificateMetadata, CertificateReport, DefaultCCheck, Verdict};
use enstrophy_cert::sampling::random_field;
use enstrophy_cert::{small_data_check, ConstantsLedger, Scaling, SpectralField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report(
    values: [f64; 8],
    n_modes: usize,
    intervals: usize,
    certified: bool,
    with_default: bool,
) -> CertificateReport {
    let verdict = if certified {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    CertificateReport {
        schema: "enstrophy-cert/certificate".into(),
        version: 1,
        verdict,
        lhs: values[0],
        rhs: values[1],
        initial_gap: values[2],
        residual_integral: values[3],
        integral_i: values[4],
        t_star: values[5],
        quadrature_error_estimate: values[6],
        metadata: CertificateMetadata {
            n_modes,
            dt: values[7],
            intervals,
            quadrature: "gauss-legendre-2".into(),
            quadrature_degree: 3,
        },
        constants: ConstantsLedger::default(),
        default_c: with_default.then_some(DefaultCCheck {
            c_const: values[0] + 1.0,
            rhs: values[1],
            verdict,
        }),
    }
}

proptest! {
    #[test]
    fn certificate_json_round_trip_is_exact(
        values in proptest::array::uniform8(0.0f64..1e300),
        n_modes in 0usize..100_000,
        intervals in 0usize..1_000_000,
        certified: bool,
        with_default: bool,
    ) {
        let r = report(values, n_modes, intervals, certified, with_default);
        let back = CertificateReport::from_json(&r.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn field_text_round_trip_is_exact(seed: u64, truncation in 1usize..4, enstrophy in 1e-12f64..1e6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_field(truncation, enstrophy, &mut rng);
        let back = SpectralField::read_text(u.to_text().as_bytes()).unwrap();
        prop_assert_eq!(back, u);
    }
}

#[test]
fn scaling_round_trip_and_small_data_verdict() {
    let scaling = Scaling::new(1.0, 0.01).unwrap();
    let ledger = ConstantsLedger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut verdicts = Vec::new();
    for enstrophy in [1e-12, 1e-9, 1e-6, 1e-3, 1.0] {
        let physical = random_field(3, enstrophy, &mut rng);
        let back = scaling.to_physical(&scaling.to_nondimensional(&physical));
        let scale = physical.max_coefficient();
        for ((_, a), (_, b)) in physical.iter().zip(back.iter()) {
            for d in 0..3 {
                assert!((a[d] - b[d]).norm() <= 1e-14 * scale);
            }
        }
        let nondim = scaling.to_nondimensional(&physical);
        let verdict = scaling.physical_small_data_check(&physical, &ledger);
        assert_eq!(verdict, small_data_check(&nondim, &ledger));
        verdicts.push(verdict);
    }
    assert!(verdicts.contains(&true) && verdicts.contains(&false));
}
