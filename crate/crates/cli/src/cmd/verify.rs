//! `verify`: verification suites with a JSON report.

use isotwirl::ensembles::{substream, EnsembleKind, EnsembleSpec, Spectrum};
use isotwirl::formfactors::{average_form_factors, empirical_form_factors, log_grid, FormFactors};
use isotwirl::linalg::{evolution_diag, matrix_unit, partial_trace_a, partial_trace_b, projector, purity};
use isotwirl::oracle::{empirical_typicality, mc_ensemble_c, mc_isospectral_twirl, sample_haar_unitary, McConfig};
use isotwirl::permgroup::{weingarten, Permutation};
use isotwirl::probes::*;
use isotwirl::twirl::{isospectral_twirl, r2, r4, TwirlOperator};
use isotwirl::{CMatrix, Complex64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::output::{parse, write_json};
use crate::{CliError, CliResult, Suite, VerifyArgs};

/// One comparison: passes when `observed ≤ tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub observed: f64,
    pub verdict: &'static str,
}

impl Check {
    fn new(name: impl Into<String>, tolerance: f64, observed: f64) -> Self {
        let ok = observed <= tolerance;
        Self { name: name.into(), tolerance, observed, verdict: if ok { "pass" } else { "fail" } }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

/// Suite outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Runs a suite and returns its report.
pub fn run_suite(args: &VerifyArgs) -> CliResult<Report> {
    let checks = match args.suite {
        Suite::Weingarten => weingarten_suite(args)?,
        Suite::TwirlMc => twirl_mc_suite(args)?,
        Suite::FormfactorMc => formfactor_mc_suite(args)?,
        Suite::ProbeOracle => probe_oracle_suite(args)?,
        Suite::Typicality => typicality_suite(args)?,
    };
    let passed = checks.iter().all(Check::passed);
    Ok(Report { suite: args.suite.to_string(), seed: args.seed, passed, checks })
}

pub fn run(args: &VerifyArgs) -> CliResult<()> {
    let report = run_suite(args)?;
    write_json(&args.out, &report)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        Err(CliError::Verification(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}

fn ensembles(args: &VerifyArgs, default: &[EnsembleKind]) -> CliResult<Vec<EnsembleKind>> {
    if args.ensembles.is_empty() {
        Ok(default.to_vec())
    } else {
        args.ensembles.iter().map(|s| parse(s)).collect()
    }
}

fn weingarten_suite(args: &VerifyArgs) -> CliResult<Vec<Check>> {
    let ds = args.d.map(|d| vec![d]).unwrap_or_else(|| vec![4, 8]);
    let mut out = Vec::new();
    for n in [2usize, 4] {
        for &d in &ds {
            let t = weingarten(n, d)?;
            let r = t.delta_residual().ok_or_else(|| CliError::Usage(format!("no Weingarten inverse for n={n}, d={d}")))?;
            out.push(Check::new(format!("delta identity n={n} d={d}"), 1e-10, r));
        }
    }
    Ok(out)
}

/// `c₂, c₃, c₄, c₂(2t)` from the traces of `U` and `U²`.
fn form_factors_of(u: &CMatrix) -> FormFactors {
    let s1 = u.trace();
    let s2 = (u * u).trace();
    let c2 = s1.norm_sqr();
    FormFactors { t: 0.0, d: u.nrows(), c2, c3: s2 * s1.conj() * s1.conj(), c4: c2 * c2, c2_2t: s2.norm_sqr() }
}

fn twirl_mc_suite(args: &VerifyArgs) -> CliResult<Vec<Check>> {
    let d = args.d.unwrap_or(4);
    let n = args.samples.unwrap_or(10_000);
    let mut rng = substream(args.seed, u64::MAX);
    let u = sample_haar_unitary(d, &mut rng)?;
    let ff = form_factors_of(&u);
    let exact = isospectral_twirl(&ff, args.k)?.to_matrix()?;
    let mc = mc_isospectral_twirl(&u, args.k, &McConfig::new(d, n, args.seed))?;
    Ok(vec![Check::new(format!("max |mc − closed|/se d={d} k={}", args.k), 4.0, mc.max_z(&exact, 1e-12))])
}

fn formfactor_mc_suite(args: &VerifyArgs) -> CliResult<Vec<Check>> {
    let d = args.d.unwrap_or(64);
    let n = args.samples.unwrap_or(200);
    let grid = log_grid(0.1, 10.0 * d as f64, args.points)?;
    let mut out = Vec::new();
    for kind in ensembles(args, &[EnsembleKind::Gde])? {
        let spec = EnsembleSpec::new(kind, d)?;
        let mc = mc_ensemble_c(spec, &grid, &McConfig::new(d, n, args.seed))?;
        let avg = grid.iter().map(|&t| average_form_factors(kind, d, t)).collect::<Result<Vec<_>, _>>()?;
        let df = d as f64;
        let cols: [(&str, &Vec<isotwirl::oracle::Estimate>, Vec<f64>, f64); 3] = [
            ("c2", &mc.c2, avg.iter().map(|f| f.c2).collect(), df * df),
            ("c3", &mc.c3, avg.iter().map(|f| f.c3.re).collect(), df.powi(3)),
            ("c4", &mc.c4, avg.iter().map(|f| f.c4).collect(), df.powi(4)),
        ];
        for (q, est, exact, scale) in cols {
            let z = est
                .iter()
                .zip(&exact)
                .map(|(e, x)| (e.mean - x).abs() / e.se.max(1e-12 * scale))
                .fold(0.0, f64::max);
            out.push(Check::new(format!("{kind} {q} d={d} max |mc − closed|/se"), 3.0, z));
        }
    }
    Ok(out)
}

fn typicality_suite(args: &VerifyArgs) -> CliResult<Vec<Check>> {
    let d = args.d.unwrap_or(64);
    let n = args.samples.unwrap_or(1000);
    let deltas = [0.005, 0.02, 0.05, 0.1, 0.3];
    let default = [EnsembleKind::Gde, EnsembleKind::Poisson, EnsembleKind::WdGoe, EnsembleKind::WdGue];
    let mut out = Vec::new();
    for kind in ensembles(args, &default)? {
        let spec = EnsembleSpec::new(kind, d)?;
        for t in [0.5, 2.0, 10.0, 100.0] {
            let rep = empirical_typicality(spec, t, &deltas, &McConfig::new(d, n, args.seed))?;
            let avg = average_form_factors(kind, d, t)?;
            for (i, &dl) in deltas.iter().enumerate() {
                let b = typicality_bounds(&avg, dl)?;
                out.push(Check::new(format!("{kind} t={t} delta={dl} c2 frequency"), b.chebyshev_c2, rep.freq_c2[i]));
                out.push(Check::new(format!("{kind} t={t} delta={dl} c4 frequency"), b.chebyshev_c4, rep.freq_c4[i]));
            }
            let rises = |f: &[f64]| f.windows(2).filter(|w| w[1] > w[0]).count() as f64;
            out.push(Check::new(format!("{kind} t={t} frequency monotone in delta"), 0.0, rises(&rep.freq_c2) + rises(&rep.freq_c4)));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Probe oracle: closed forms against the generic contraction.

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ginibre<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        Complex64::new(a, b)
    })
}

fn random_state<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let g = ginibre(d, rng);
    let n = g.column(0).norm();
    g.column(0).iter().map(|z| z / n).collect()
}

fn pauli(d: usize, site: usize, x: bool) -> CMatrix {
    let one = CMatrix::identity(2, 2);
    let f = if x {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    } else {
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
    };
    (0..d.trailing_zeros() as usize).fold(CMatrix::identity(1, 1), |m, q| m.kronecker(if q == site { &f } else { &one }))
}

fn perm(n: usize, s: &str) -> CliResult<Permutation> {
    Ok(Permutation::parse(n, s)?)
}

fn gp(op: &TwirlOperator, p: &str, o: &Observable) -> CliResult<f64> {
    Ok(generic_probe(op, &perm(2 * op.k, p)?, o)?.re)
}

struct Tally(Vec<(String, f64)>);

impl Tally {
    fn record(&mut self, name: &str, closed: f64, generic: f64) {
        let e = (closed - generic).abs() / generic.abs().max(1.0);
        match self.0.iter_mut().find(|(n, _)| n == name) {
            Some((_, w)) => *w = w.max(e),
            None => self.0.push((name.to_string(), e)),
        }
    }
}

fn probe_oracle_suite(args: &VerifyArgs) -> CliResult<Vec<Check>> {
    let d = args.d.unwrap_or(8);
    if !d.is_power_of_two() || !(4..=16).contains(&d) {
        return Err(CliError::Usage(format!("probe-oracle needs d in {{4, 8, 16}}, got {d}")));
    }
    let df = d as f64;
    let mut tally = Tally(Vec::new());
    let mut rng = substream(args.seed, d as u64);
    let energies: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let sp = Spectrum::from_energies(energies, EnsembleKind::Gde)?;
    let (da, db) = (2usize, d / 2);
    for t in [0.37, 2.9] {
        let ff = empirical_form_factors(&sp, t)?;
        let (op2, op4) = (r2(&ff)?, r4(&ff)?);
        let base = SceneParams::new(d).with_bipartition(da).with_output_cut(da);

        let rdag = Observable::dense(2, d, op2.to_matrix()?.adjoint())?;
        tally.record("frame-potential", frame_potential_k1(&ff)?.value, df * df * gp(&op2, "e", &rdag)?);

        let psi = random_state(d, &mut rng);
        let pj = projector(&psi);
        let pp = Observable::product(vec![pj.clone(), pj.clone()])?;
        tally.record("loschmidt1", loschmidt1(&ff)?, df * gp(&op2, "(12)", &pp)?);
        let a = ginibre(d, &mut rng);
        let norm2 = (a.adjoint() * &a).trace().re;
        let o2 = Observable::product(vec![a.adjoint(), a.clone()])?;
        tally.record("otoc2", otoc2(&ff, a.trace(), norm2)?, gp(&op2, "(12)", &o2)?);

        let (pa, pb) = (pauli(d, 0, false), pauli(d, 1, true));
        let o4 = Observable::product(vec![pa.clone(), pa.clone(), pb.clone(), pb.clone()])?;
        tally.record("otoc4", otoc4_pauli(&ff)?, gp(&op4, "(1423)", &o4)?);
        let l2 = Observable::product(vec![pa.clone(), pa.clone(), pa.clone(), pa.clone()])?;
        tally.record("loschmidt2", loschmidt2_pauli(&ff)?, gp(&op4, "(13)(24)", &l2)?);

        let ta = Observable::subsystem_swap(da, db);
        let ent = ta.tensor(&pp)?;
        let p_pure = SceneParams { purity_a: purity(&partial_trace_b(&pj, da, db)), ..base };
        let pur_gen = df * df * gp(&op4, "(13)(24)", &ent)?;
        tally.record("entanglement", entanglement_bound(&ff, &p_pure)?.value, -pur_gen.ln());
        let g = ginibre(d, &mut rng);
        let rho = {
            let m = &g * g.adjoint();
            let tr = m.trace();
            m / tr
        };
        let p_mixed = SceneParams {
            purity_psi: purity(&rho),
            purity_a: purity(&partial_trace_b(&rho, da, db)),
            purity_b: purity(&partial_trace_a(&rho, da, db)),
            ..base
        };
        let rr = Observable::product(vec![rho.clone(), rho.clone()])?;
        tally.record(
            "entanglement (mixed)",
            entanglement_purity(&ff, &p_mixed)?,
            df * df * gp(&op4, "(13)(24)", &ta.tensor(&rr)?)?,
        );

        let (dc, dd) = (base.dc, base.dd);
        let tc = Observable::subsystem_swap(dc, dd);
        let id_c = CMatrix::identity(dc, dc);
        let mut td_terms = Vec::new();
        for i in 0..dd {
            for j in 0..dd {
                td_terms.push(ProductTerm {
                    coeff: c(1.0),
                    factors: vec![id_c.kronecker(&matrix_unit(dd, i, j)), id_c.kronecker(&matrix_unit(dd, j, i))],
                });
            }
        }
        let td = Observable::Products { n: 2, d, terms: td_terms };
        let g1 = gp(&op4, "(13)(24)", &tc.tensor(&tc)?)?;
        let g2 = gp(&op4, "(13)(24)", &td.tensor(&tc)?)?;
        tally.record("tmi", tmi_bound(&ff, &base)?.value, df.log2() + g1.log2() + g2.log2());

        let deph = psi.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
        let p_coh = SceneParams { deph_purity: deph, ..base };
        let coh = Observable::dephasing_pair(d).tensor(&pp)?;
        tally.record("coherence", coherence(&ff, &p_coh)?, 1.0 - df * df * gp(&op4, "(13)(24)", &coh)?);

        let u = evolution_diag(&sp.energies, t);
        let ud = u.adjoint();
        let proj: Vec<CMatrix> = (0..d).map(|j| matrix_unit(d, j, j)).collect();
        let mut terms = vec![ProductTerm { coeff: c(1.0), factors: vec![u.clone(), u.clone(), ud.clone(), ud.clone()] }];
        for i in 0..d {
            for j in 0..d {
                terms.push(ProductTerm {
                    coeff: c(1.0),
                    factors: vec![proj[i].clone(), proj[j].clone(), proj[i].clone(), proj[j].clone()],
                });
            }
            terms.push(ProductTerm { coeff: c(-2.0), factors: vec![u.clone(), proj[i].clone(), ud.clone(), proj[i].clone()] });
        }
        let tw = twirl_of(&Observable::Products { n: 4, d, terms })?;
        tally.record("convergence", convergence_f(&ff, &p_pure)?, df * df * gp(&tw, "(13)(24)", &ent)?);

        let h = ginibre(d, &mut rng);
        let h0 = (&h + h.adjoint()) * c(0.5);
        let eig = h0.clone().symmetric_eigen();
        let k0 = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|p| p.0).unwrap_or(0);
        let e0 = eig.eigenvalues[k0];
        let gs = projector(&eig.eigenvectors.column(k0).iter().copied().collect::<Vec<_>>());
        let e_ht = h0.trace().re / df;
        let tr_h0_sq = (&h0 * &h0).trace().re;
        let p_work = SceneParams { e0, e_ht, tr_h0_sq, ..p_pure };
        let mean = df * gp(&op2, "(12)", &Observable::product(vec![h0.clone(), gs.clone()])?)?;
        let w_gen = (mean - e0) / (e_ht - e0);
        tally.record("work", work(&ff)?, w_gen);
        let second = df * df * gp(&op4, "(13)(24)", &Observable::product(vec![h0.clone(), h0.clone(), gs.clone(), gs])?)?;
        let spread = tr_h0_sq / df - e_ht * e_ht;
        tally.record("work-fluct", work_fluctuations(&ff, &p_work)?, (second - mean * mean) / spread);

        let eps = 0.7;
        let fe = free_energy_bounds(&ff, &SceneParams { beta_eps: eps, ..p_pure })?;
        tally.record("free-energy-upper", fe.upper, w_gen + pur_gen.ln() / eps);
        tally.record("free-energy-lower", fe.lower, w_gen - (da as f64).ln() / eps);
    }
    Ok(tally.0.into_iter().map(|(n, e)| Check::new(format!("{n} d={d} relative deviation"), 1e-8, e)).collect())
}
