use hypolab_core::coeff::alpha_family;
use hypolab_core::mp::{fedii_rate, mp_check, MpConfig};
use hypolab_core::Verdict;

#[test]
fn mp_and_rate_agree_on_alpha_family() {
    let cfg = MpConfig::default();
    for alpha in [0.25, 0.5, 0.8, 1.25, 2.0, 4.0] {
        for p in [0.5, 1.0, 2.0] {
            let a = alpha_family(alpha).unwrap();
            let m = mp_check(&a, p, 0.25, &cfg).unwrap();
            let f = fedii_rate(&a, p).unwrap();
            let margin = (alpha - 1.0 / p).abs();
            println!(
                "alpha {alpha:5} p {p:4}: mp {:12} S_K {:10.3e} levels {:3} slope {:?} | rate {:5} limit {}",
                m.verdict.to_string(),
                m.s_curve.last().unwrap().s,
                m.levels,
                m.decisive_slope,
                f.verdict.to_string(),
                f.limit
            );
            if margin >= 0.2 && m.verdict != Verdict::Inconclusive {
                assert_eq!(m.verdict, f.verdict, "alpha {alpha} p {p}");
            }
            if margin < 1e-12 {
                assert_ne!(m.verdict, Verdict::Holds);
                assert_ne!(f.verdict, Verdict::Holds);
            }
            if margin >= 0.2 {
                let s = m.decisive_slope.expect("decisive slope");
                assert_eq!(s > 0.0, 1.0 / p > alpha, "alpha {alpha} p {p} slope {s}");
            }
        }
    }
}
