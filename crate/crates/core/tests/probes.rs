mod common;

use common::{c, ginibre, pauli, random_spectrum, random_state, rel};
use isotwirl::ensembles::{substream, EnsembleKind};
use isotwirl::formfactors::{average_form_factors, average_form_factors_grid, empirical_form_factors, log_grid, FormFactors};
use isotwirl::linalg::{partial_trace_b, projector, purity};
use isotwirl::permgroup::Permutation;
use isotwirl::probes::*;
use isotwirl::twirl::{r2, r2_cp, r4, CPMapSpec, TwirlOperator};
use proptest::prelude::*;

fn gp(op: &TwirlOperator, p: &str, o: &Observable) -> f64 {
    generic_probe(op, &Permutation::parse(2 * op.k, p).unwrap(), o).unwrap().re
}

#[test]
fn generic_equivalence_at_sixteen() {
    let d = 16usize;
    let df = d as f64;
    let sp = random_spectrum(d, 5);
    let mut rng = substream(6, 0);
    for t in [0.6, 3.3] {
        let ff = empirical_form_factors(&sp, t).unwrap();
        let (op2, op4) = (r2(&ff).unwrap(), r4(&ff).unwrap());
        let rdag = Observable::dense(2, d, op2.to_matrix().unwrap().adjoint()).unwrap();
        assert!(rel(frame_potential_k1(&ff).unwrap().value, df * df * gp(&op2, "e", &rdag)) < 1e-8);

        let psi = random_state(d, &mut rng);
        let pj = projector(&psi);
        let pp = Observable::product(vec![pj.clone(), pj.clone()]).unwrap();
        assert!(rel(loschmidt1(&ff).unwrap(), df * gp(&op2, "(12)", &pp)) < 1e-8);
        let a = ginibre(d, &mut rng);
        let o2 = Observable::product(vec![a.adjoint(), a.clone()]).unwrap();
        let n2 = (a.adjoint() * &a).trace().re;
        assert!(rel(otoc2(&ff, a.trace(), n2).unwrap(), gp(&op2, "(12)", &o2)) < 1e-8);

        let (pa, pb) = (pauli(d, 0, false), pauli(d, 2, true));
        let o4 = Observable::product(vec![pa.clone(), pa.clone(), pb.clone(), pb.clone()]).unwrap();
        assert!(rel(otoc4_pauli(&ff).unwrap(), gp(&op4, "(1423)", &o4)) < 1e-8);
        let l2 = Observable::product(vec![pa.clone(), pa.clone(), pa.clone(), pa]).unwrap();
        assert!(rel(loschmidt2_pauli(&ff).unwrap(), gp(&op4, "(13)(24)", &l2)) < 1e-8);

        let (da, db) = (4usize, 4usize);
        let p = SceneParams::new(d).with_bipartition(da);
        let p = SceneParams { purity_a: purity(&partial_trace_b(&pj, da, db)), ..p };
        let ent = Observable::subsystem_swap(da, db).tensor(&pp).unwrap();
        assert!(rel(entanglement_purity(&ff, &p).unwrap(), df * df * gp(&op4, "(13)(24)", &ent)) < 1e-8);

        let deph = psi.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
        let pc = SceneParams { deph_purity: deph, ..p };
        let coh = Observable::dephasing_pair(d).tensor(&pp).unwrap();
        assert!(rel(coherence(&ff, &pc).unwrap(), 1.0 - df * df * gp(&op4, "(13)(24)", &coh)) < 1e-8);
    }
}

#[test]
fn loschmidt1_is_scaled_projector_otoc() {
    for d in [4usize, 9, 32] {
        let ff = empirical_form_factors(&random_spectrum(d, 2), 1.3).unwrap();
        let l1 = loschmidt1(&ff).unwrap();
        let o = otoc2(&ff, c(1.0), 1.0).unwrap();
        assert!((l1 - d as f64 * o).abs() < 1e-14, "{l1} vs {}", d as f64 * o);
    }
}

#[test]
fn tmi_starts_at_zero_and_settles() {
    for e in [4u32, 6, 8, 10] {
        let d = 1usize << e;
        let p = SceneParams::new(d);
        assert_eq!(p.dc * p.dc, d);
        let at_zero = tmi_bound(&FormFactors::at_zero(d), &p).unwrap().value;
        assert!(at_zero <= 1e-9, "d={d}: {at_zero}");
        let late = tmi_bound(&average_form_factors(EnsembleKind::Gue, d, 100.0 * d as f64).unwrap(), &p).unwrap().value;
        let plateau = 2.0 - e as f64;
        assert!(late < at_zero);
        assert!((late - plateau).abs() < 0.15, "d={d}: {late}");
    }
}

#[test]
fn work_vanishes_at_zero() {
    for d in [2usize, 8, 1024] {
        assert_eq!(work(&FormFactors::at_zero(d)).unwrap(), 0.0);
        let late = work(&FormFactors::asymptotic(d)).unwrap();
        assert!((late - 1.0).abs() < 1.0 / d as f64);
    }
}

#[test]
fn gde_frame_potential_at_least_two() {
    for d in [16usize, 64, 256] {
        let grid = log_grid(0.01, 100.0 * d as f64, 400).unwrap();
        for ff in average_form_factors_grid(EnsembleKind::Gde, d, &grid).unwrap() {
            let f = frame_potential_k1(&ff).unwrap().value;
            assert!(f >= 2.0, "d={d} t={}: {f}", ff.t);
        }
    }
}

#[test]
fn cp_probe_examples() {
    let d = 6usize;
    let deph = cp_probes(&CPMapSpec::dephasing(d), 1.0).unwrap();
    assert!((deph.loschmidt1_cp - 2.0 / (d as f64 + 1.0)).abs() < 1e-14);
    assert_eq!(deph.purity_out, Some(deph.loschmidt1_cp));
    let id = cp_probes(&CPMapSpec::generic(d, c((d * d) as f64)), 1.0).unwrap();
    assert!((id.loschmidt1_cp - 1.0).abs() < 1e-14);
    assert_eq!(id.purity_out, None);
    assert!(cp_probes(&CPMapSpec::dephasing(d), 1.5).is_err());
    assert!(r2_cp(&CPMapSpec::dephasing(1)).is_err());
}

#[test]
fn every_probe_is_finite_on_every_ensemble() {
    let d = 256usize;
    let p = SceneParams::new(d);
    for kind in EnsembleKind::SPECTRAL {
        for t in [0.0, 0.5, 7.0, 300.0, 5000.0] {
            let ff = average_form_factors(kind, d, t).unwrap();
            for probe in ProbeKind::ALL {
                let v = probe.evaluate(&ff, &p).unwrap();
                assert!(v.is_finite(), "{kind} {probe} t={t}");
            }
        }
    }
}

#[test]
fn scene_validation() {
    let mut p = SceneParams::new(16);
    assert!(p.validate().is_ok());
    p.purity_a = 0.1;
    assert!(p.validate().is_err());
    let q = SceneParams { da: 3, ..SceneParams::new(16) };
    assert!(q.validate().is_err());
}

#[test]
fn typicality_bound_shapes() {
    let avg = average_form_factors(EnsembleKind::Poisson, 64, 10.0).unwrap();
    let b1 = typicality_bounds(&avg, 0.01).unwrap();
    let b2 = typicality_bounds(&avg, 0.1).unwrap();
    assert!(b2.chebyshev_c2 < b1.chebyshev_c2);
    assert!(b2.chebyshev_c4 < b1.chebyshev_c4);
    assert!(b1.levy <= 4.0 && b2.levy <= b1.levy);
    assert!(typicality_bounds(&avg, 0.0).is_err());
}

proptest! {
    #[test]
    fn frame_potential_bounds(d in 2usize..40, seed in any::<u64>(), t in 0.0f64..200.0) {
        let ff = empirical_form_factors(&random_spectrum(d, seed), t).unwrap();
        let f = frame_potential_k1(&ff).unwrap();
        prop_assert!(f.value >= 1.0 - 1e-12);
        prop_assert!(f.value >= f.lower_bound - 1e-9 * f.lower_bound.max(1.0));
    }

    #[test]
    fn work_is_monotone_in_minus_c2(d in 2usize..200, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let d2 = (d * d) as f64;
        let ff = |c2: f64| FormFactors { c2: c2 * d2, ..FormFactors::at_zero(d) };
        let (wa, wb) = (work(&ff(a)).unwrap(), work(&ff(b)).unwrap());
        if a < b {
            prop_assert!(wa >= wb);
        } else {
            prop_assert!(wb >= wa);
        }
    }

    #[test]
    fn entanglement_purity_is_physical(e in 1u32..4, seed in any::<u64>(), t in 0.0f64..100.0) {
        let d = 1usize << (2 * e);
        let ff = empirical_form_factors(&random_spectrum(d, seed), t).unwrap();
        let p = SceneParams::new(d);
        let pur = entanglement_purity(&ff, &p).unwrap();
        prop_assert!(pur >= 1.0 / p.da as f64 - 1e-9 && pur <= 1.0 + 1e-9, "{}", pur);
    }
}
