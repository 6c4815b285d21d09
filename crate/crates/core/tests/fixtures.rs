//! Regression values. Each was first checked against an independent computation
//! (closed form where one exists, a separate prototype otherwise) and then frozen.

use approx::assert_relative_eq;
use hjselect::adjoint::{approximate_mather, test_function_dictionary, MatherOptions};
use hjselect::ergodic::estimate_ergodic_constant;
use hjselect::verify::{VerifySettings, Verifier};
use hjselect::{GeneralizedDiscount, HamiltonianModel, Potential, SolverConfig, TorusGrid};

fn well_hbar(p: f64) -> f64 {
    let s = VerifySettings::default();
    let h = HamiltonianModel::double_well(p, Potential::tent(0.25, 0.5).unwrap());
    let g = TorusGrid::new(s.n_points).unwrap();
    estimate_ergodic_constant(&h, g, &s.eps_ladder, &SolverConfig::default()).unwrap().hbar
}

#[test]
fn double_well_constants_at_default_resolution() {
    assert_relative_eq!(well_hbar(0.5), 0.4276128865262371, max_relative = 1e-8);
    assert_relative_eq!(well_hbar(1.5), 1.4425737473861573, max_relative = 1e-8);
}

#[test]
fn identity_residuals_at_two_resolutions() {
    let v = Verifier::new(VerifySettings::default()).unwrap();
    let rows = v.identity_residuals().unwrap();
    let frozen = [
        ("flat", [1.8129087935087876e-4, 4.277116862503414e-3, 4.8497713626288406e-5, 1.32581884008917e-3]),
        ("well_outer", [4.0675580317064096e-5, 4.129344011805647e-4, 2.0461698891989304e-5, 2.0164260997328903e-4]),
    ];
    assert_eq!(rows.len(), frozen.len());
    for ((label, got), (want_label, want)) in rows.iter().zip(frozen) {
        assert_eq!(label, want_label);
        for (a, b) in got.iter().zip(want) {
            assert_relative_eq!(*a, b, max_relative = 1e-6);
        }
    }
}

#[test]
fn flat_pairing_table() {
    let g = TorusGrid::new(256).unwrap();
    let h = HamiltonianModel::flat(Potential::triangular_bump(0.1).unwrap());
    let gd = GeneralizedDiscount::from_hamiltonian(&h, 1.0);
    let m = approximate_mather(&gd, g.nearest(0.5), &[1.6e-2, 8e-3, 4e-3], g, &MatherOptions::default()).unwrap();
    let labels: Vec<String> = test_function_dictionary().iter().map(|f| f.label()).collect();
    let last = &m.extrapolated.last().unwrap().1;
    // Mass pairs to one up to round-off.
    assert!((last[0] - 1.0).abs() < 1e-10);
    let frozen = [
        ("p^0*cos1", -0.8891513068688648),
        ("p^0*sin1", 0.02008674743249267),
        ("p^0*cos2", 1.0322266273546383),
        ("p^0*sin2", 0.1284353449780806),
        ("p^0*cos3", -0.5699704855830251),
        ("p^0*sin3", -0.18185855185578598),
        ("p^1*1", -0.0899577373162559),
    ];
    for (k, (label, want)) in frozen.iter().enumerate() {
        assert_eq!(&labels[k + 1], label);
        assert_relative_eq!(last[k + 1], *want, max_relative = 1e-6);
    }
    assert_relative_eq!(m.cauchy_gap, 0.19005495812908227, max_relative = 1e-6);
    assert!(m.mass_defect < 1e-10);
}
