use proptest::prelude::*;

use pvolume::refpairs::{eval_pair, eval_pair_curvature, wronskian, Bc, RefPairSpec};

fn specs() -> Vec<RefPairSpec<f64>> {
    let mut v = Vec::new();
    for l in [0u32, 1, 3, 5, 7] {
        v.push(RefPairSpec::bc2(l));
        v.push(RefPairSpec::bc2k(l, 0.37).unwrap());
        v.push(RefPairSpec::bc2k(l, 1e-3).unwrap());
        v.push(RefPairSpec::bc23(l, 1.6).unwrap());
        v.push(RefPairSpec::bc23(l, 0.05).unwrap());
    }
    v
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
}

#[test]
fn wronskian_constant_over_range() {
    for spec in specs() {
        let w = wronskian(&spec).unwrap();
        for x in log_grid(0.1, 1e3, 120) {
            let e = eval_pair(&spec, x).unwrap();
            let scale = (e.phi * e.dpsi).abs().max((e.dphi * e.psi).abs());
            assert!(
                (e.wronskian() - w).abs() <= 1e-10 * scale.max(w.abs()),
                "{:?} at x = {x}: {} vs {w}",
                spec,
                e.wronskian()
            );
        }
    }
}

#[test]
fn pairs_solve_reference_equation() {
    for spec in specs() {
        let l = spec.l as f64;
        for x in log_grid(0.1, 1e3, 60) {
            let (e, c) = eval_pair_curvature(&spec, x).unwrap();
            let w = l * (l + 1.0) / (x * x) + spec.potential(x) - spec.energy();
            for (f, d2) in [(e.phi, c.d2phi), (e.psi, c.d2psi)] {
                let resid = d2 - w * f;
                let scale = d2.abs().max((w * f).abs()).max(f.abs() * spec.energy());
                assert!(resid.abs() <= 1e-8 * scale, "{:?} at x = {x}: residual {resid}", spec);
            }
        }
    }
}

#[test]
fn bc23_tends_to_bc2_as_reference_vanishes() {
    for l in [1u32, 3] {
        let weak = RefPairSpec::bc23(l, 1e-6).unwrap();
        let free = RefPairSpec::<f64>::bc2(l);
        for x in [0.5f64, 3.0, 40.0] {
            let (a, b) = (eval_pair(&weak, x).unwrap(), eval_pair(&free, x).unwrap());
            assert!((a.phi / b.phi - 1.0).abs() < 1e-4, "phi l={l} x={x}");
            assert!((a.psi / b.psi - 1.0).abs() < 1e-4, "psi l={l} x={x}");
        }
    }
}

#[test]
fn bc2k_matches_power_law_at_small_argument() {
    // ρ j_l → ρ^{l+1}/(2l+1)!!, −ρ y_l → (2l−1)!!/ρ^l
    let k = 1e-4;
    let spec = RefPairSpec::bc2k(1, k).unwrap();
    let e = eval_pair(&spec, 10.0).unwrap();
    let rho: f64 = k * 10.0;
    assert!((e.phi / (rho * rho / 3.0) - 1.0).abs() < 1e-6);
    assert!((e.psi * rho - 1.0).abs() < 1e-6);
}

#[test]
fn invalid_inputs() {
    assert!(eval_pair(&RefPairSpec::bc2(1), -1.0).is_err());
    assert!(RefPairSpec::bc23(9, 1.0).is_err());
    assert!(RefPairSpec::bc2k(13, 1.0).is_err());
    assert!("bc5".parse::<Bc>().is_err());
    assert_eq!("bc23".parse::<Bc>().unwrap(), Bc::Bc23);
}

proptest! {
    #[test]
    fn bc23_wronskian_any_strength(c3f in 1e-3f64..10.0, x in 0.05f64..500.0) {
        let spec = RefPairSpec::bc23(1, c3f).unwrap();
        let e = eval_pair(&spec, x).unwrap();
        let scale = (e.phi * e.dpsi).abs().max(3.0);
        prop_assert!((e.wronskian() + 3.0).abs() <= 1e-10 * scale);
    }

    #[test]
    fn bc2k_wronskian_any_energy(k in 1e-4f64..3.0, x in 0.1f64..300.0, l in 0u32..8) {
        let spec = RefPairSpec::bc2k(l, k).unwrap();
        let e = eval_pair(&spec, x).unwrap();
        let scale = (e.phi * e.dpsi).abs().max(k);
        prop_assert!((e.wronskian() + k).abs() <= 1e-10 * scale);
    }
}
