//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; the process exits non-zero if any
//! criterion fails.

mod common;

use std::time::Instant;

use gds_core::capacity::{
    binary_entropy, c1_lower_bound_gds, maximize_coherent_information_gds, p1_lower_bound_gds,
    q1_upper_bound_equal, Ensemble, OptimizerConfig,
};
use gds_core::cdc::{
    build_cdc, cdc_bounds, cdc_offdiag_infnorm, joint_coherent_information, superadditivity_max_lambda,
    superadditivity_report, CdcParams,
};
use gds_core::channel::families::*;
use gds_core::channel::{transposed_choi, KrausChannel};
use gds_core::gds::{build_gds, gds_is_degradable, GdsChannel};
use gds_core::linalg::ComplexMatrix;
use gds_core::singleletter::{check_single_letter, MatchSearchConfig, Route};
use gds_core::witness::{
    absolute_value_witness, build_cdc_classical_witness, build_gds_transposition_witness,
    check_classical_witness, check_transposition_witness, diamond_norm_oracle, OracleConfig,
    TranspositionWitness,
};
use num_complex::Complex;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg = OptimizerConfig::<f64>::default();
    let mut worst: f64 = 0.0;
    for p in [0.05, 0.1, 0.2, 0.35, 0.5] {
        let g = build_gds(vec![phase_flip::<f64>(p), bit_flip(p)]).map_err(err)?;
        let r = maximize_coherent_information_gds(&g, &cfg).map_err(err)?;
        let target = 2.0 - binary_entropy(p);
        let gap = (r.value - target).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-4, format!("p = {p}: {} vs {target}", r.value))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, format!("took {secs:.2} s"))?;
    Ok(format!("max |I_c - (2 - H_b)| = {worst:.2e} in {secs:.2} s"))
}

fn cdc_grid(ps: &[usize], ns: &[usize]) -> Vec<CdcParams> {
    ps.iter()
        .flat_map(|&p| ns.iter().map(move |&n| CdcParams::new(p, n).unwrap()))
        .collect()
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for params in cdc_grid(&[2, 3], &[1, 2, 3]) {
        let g = build_cdc::<f64>(&params).map_err(err)?;
        for i in 0..=params.n {
            for j in 0..=params.n {
                if i == j {
                    continue;
                }
                let a = cdc_offdiag_infnorm(&g, i, j).map_err(err)?.numeric;
                let b = cdc_offdiag_infnorm(&g, j, i).map_err(err)?.numeric;
                let expect = (params.p as f64).powi(-(i.abs_diff(j) as i32));
                let rel = (a * b - expect).abs() / expect;
                worst = worst.max(rel);
                ensure(
                    rel <= 1e-12,
                    format!("p = {}, n = {}, ({i}, {j}): {} vs {expect}", params.p, params.n, a * b),
                )?;
            }
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_res = f64::INFINITY;
    for params in cdc_grid(&[2, 3], &[1, 2, 3]) {
        let g = build_cdc::<f64>(&params).map_err(err)?;
        let subs: Vec<_> = g.subchannels().iter().map(absolute_value_witness).collect();
        let w = build_gds_transposition_witness(&g, &subs).map_err(err)?;
        let cert = check_transposition_witness(g.assembled(), &w).map_err(err)?;
        let target = 1.0 + params.n as f64 / (params.p as f64).sqrt();
        let min_res = cert.residuals.iter().copied().fold(f64::INFINITY, f64::min);
        worst_res = worst_res.min(min_res);
        if (w.y - target).abs() > 1e-12 || min_res < -1e-9 || !cert.feasible {
            failures.push(format!(
                "(p={}, n={}) y = {:.12} vs 1 + n/sqrt(p) = {:.12}, min residual {min_res:.1e}",
                params.p, params.n, w.y, target
            ));
        }
    }
    if failures.is_empty() {
        Ok(format!("all y match, min residual {worst_res:.1e}"))
    } else {
        Err(failures.join("; "))
    }
}

fn point_ensembles(g: &GdsChannel<f64>) -> Vec<Ensemble<f64>> {
    g.subchannels()
        .iter()
        .map(|s| {
            let d = s.dim_in();
            Ensemble::point(ComplexMatrix::identity(d).scale(1.0 / d as f64)).unwrap()
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for params in cdc_grid(&[2, 3, 4], &[1, 2, 3]) {
        let g = build_cdc::<f64>(&params).map_err(err)?;
        let w = build_cdc_classical_witness(&g).map_err(err)?;
        let cert = check_classical_witness(g.assembled(), &w).map_err(err)?;
        let tag = format!("p = {}, n = {}", params.p, params.n);
        let trace = w.s.real_trace();
        let target = ((params.n + 1) as f64).log2();
        ensure(cert.feasible, format!("{tag}: infeasible, residuals {:?}", cert.residuals))?;
        ensure((trace - (params.n + 1) as f64).abs() <= 1e-12, format!("{tag}: Tr S = {trace}"))?;
        let ens = point_ensembles(&g);
        let p1 = p1_lower_bound_gds(&g, &ens).map_err(err)?;
        let c1 = c1_lower_bound_gds(&g, &ens).map_err(err)?;
        for (name, v) in [("P1", p1), ("C1", c1), ("C upper", cert.value_bits)] {
            let gap = (v - target).abs();
            worst = worst.max(gap);
            ensure(gap <= 1e-9, format!("{tag}: {name} = {v} vs {target}"))?;
        }
    }
    Ok(format!("P1 = C1 = log2 Tr S = log2(n+1), worst gap {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let cfg = OptimizerConfig::<f64> {
        restarts: 8,
        ..OptimizerConfig::default()
    };
    let mut margins = Vec::new();
    for params in cdc_grid(&[2, 3], &[1, 2, 3]) {
        let g = build_cdc::<f64>(&params).map_err(err)?;
        let b = cdc_bounds(&params);
        let tag = format!("p = {}, n = {}", params.p, params.n);
        let opt = maximize_coherent_information_gds(&g, &cfg).map_err(err)?.value;
        let (m1, m2, m3) = (opt - b.q1_lower, b.q_upper - opt, b.pc_exact - b.q_upper);
        ensure(
            m1 >= -1e-9 && m2 >= -1e-9 && m3 > 0.0,
            format!("{tag}: {} <= {opt} <= {} < {}", b.q1_lower, b.q_upper, b.pc_exact),
        )?;
        margins.push(format!("({},{}) {m1:.3}/{m2:.3}/{m3:.3}", params.p, params.n));
    }
    Ok(format!("margins lower/upper/strict: {}", margins.join(" ")))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [1, 2] {
        let params = CdcParams::new(2, n).map_err(err)?;
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let v = joint_coherent_information::<f64>(&params, lambda).map_err(err)?;
            let target = (1.0 - lambda) * ((n + 1) as f64).log2();
            worst = worst.max((v - target).abs());
            ensure((v - target).abs() <= 1e-9, format!("n = {n}, lambda = {lambda}: {v} vs {target}"))?;
        }
    }
    Ok(format!("worst error {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let params = CdcParams::new(16, 1).map_err(err)?;
    let r = superadditivity_report(&params, 0.55).map_err(err)?;
    let joint = r.joint_numeric.ok_or("joint value was not evaluated numerically")?;
    ensure((joint - 0.45).abs() <= 1e-9, format!("joint value {joint}"))?;
    ensure((r.q_upper - 0.3219).abs() <= 1e-4, format!("q_upper {}", r.q_upper))?;
    ensure(r.erasure_capacity == 0.0, format!("Q(E) = {}", r.erasure_capacity))?;
    ensure(r.certified && joint > r.bound_sum, format!("{joint} does not exceed {}", r.bound_sum))?;

    // Supremum of the window by a grid followed by bisection.
    let holds = |lambda: f64| (1.0 - lambda) * 2f64.log2() > r.q_upper;
    let steps = 10_000;
    let mut lo = 0.5;
    for k in 0..=steps {
        let lambda = 0.5 + 0.5 * k as f64 / steps as f64;
        if holds(lambda) {
            lo = lambda;
        }
    }
    let mut hi = (lo + 0.5 / steps as f64).min(1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let formula = superadditivity_max_lambda(&params).map_err(err)?;
    ensure((formula - lo).abs() <= 1e-9, format!("lambda_max {formula} vs search {lo}"))?;
    Ok(format!(
        "joint {joint:.6} > {:.6} = q_upper + Q(E); lambda_max {formula:.9}",
        r.bound_sum
    ))
}

fn criterion_8() -> Outcome {
    let mut seen = Vec::new();
    for g1 in [0.3, 0.7] {
        for g2 in [0.3, 0.7] {
            let g = build_gds(vec![amplitude_damping::<f64>(g1), amplitude_damping(g2)]).map_err(err)?;
            let holds = gds_is_degradable(&g).holds;
            let expect = g1 == 0.3 && g2 == 0.3;
            ensure(holds == expect, format!("({g1}, {g2}) degradable = {holds}"))?;
            seen.push(format!("({g1},{g2})={holds}"));
        }
    }
    Ok(seen.join(" "))
}

fn criterion_9() -> Outcome {
    let g = build_gds(vec![
        amplitude_damping::<f64>(0.6),
        amplitude_damping(0.7),
        amplitude_damping(0.8),
    ])
    .map_err(err)?;
    let zero = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
    let v = check_single_letter(&g, Some(&vec![zero.clone(); 3]), &MatchSearchConfig::default()).map_err(err)?;
    ensure(v.qualifies && v.route == Route::AllAntidegradable, format!("verdict {v:?}"))?;
    for s in &v.matched_states {
        ensure((s[0][0] - 1.0).abs() <= 1e-12 && s[1] == [0.0, 0.0], format!("matched state {s:?}"))?;
    }
    let log3 = 3f64.log2();
    let opt = maximize_coherent_information_gds(&g, &OptimizerConfig::default()).map_err(err)?.value;
    ensure(opt >= log3 - 1e-3, format!("optimizer {opt}"))?;
    let rho0 = ComplexMatrix::outer(&zero);
    let outs = g
        .subchannels()
        .iter()
        .map(|s| s.complement_apply(&rho0))
        .collect::<gds_core::Result<Vec<_>>>()
        .map_err(err)?;
    let ub = q1_upper_bound_equal(&g, 0.0, &outs).map_err(err)?;
    ensure((ub.refined - log3).abs() <= 1e-12, format!("upper bound {}", ub.refined))?;
    Ok(format!("route all_antidegradable, optimizer {opt:.6}, bound {:.12}", ub.refined))
}

fn criterion_10() -> Outcome {
    let mut rng = common::rng(10);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..500 {
        let g = common::random_gds(&mut rng);
        let rho = common::random_state(&mut rng, g.dim_in());
        let tilde = common::block_truncate(&g, &rho);
        let full = gds_core::capacity::coherent_information(g.assembled(), &rho).map_err(err)?;
        let trunc = gds_core::capacity::coherent_information(g.assembled(), &tilde).map_err(err)?;
        worst = worst.max(full - trunc);
        ensure(full <= trunc + 1e-9, format!("draw {k}: {full} > {trunc}"))?;
    }
    Ok(format!("500 draws, max I_c(rho) - I_c(rho~) = {worst:.3e}"))
}

fn oracle(ch: &KrausChannel<f64>, cfg: &OracleConfig) -> Result<f64, String> {
    diamond_norm_oracle(&transposed_choi(ch), (ch.dim_in(), ch.dim_out()), cfg).map_err(err)
}

fn criterion_11() -> Outcome {
    let cfg = OracleConfig::default();
    let mut pairs: Vec<(String, KrausChannel<f64>, TranspositionWitness<f64>)> = Vec::new();
    let singles: Vec<KrausChannel<f64>> = vec![
        identity(2),
        identity(3),
        amplitude_damping(0.3),
        amplitude_damping(0.7),
        phase_flip(0.2),
        bit_flip(0.35),
        dephasing_pauli(),
        dephasing_projective(),
        completely_depolarizing(2, 3),
    ];
    for ch in singles {
        let w = absolute_value_witness(&ch);
        pairs.push((ch.name().to_string(), ch, w));
    }
    let gds_list: Vec<(String, GdsChannel<f64>)> = vec![
        ("phase+bit flip".into(), build_gds(vec![phase_flip(0.2), bit_flip(0.2)]).map_err(err)?),
        (
            "amplitude damping pair".into(),
            build_gds(vec![amplitude_damping(0.3), amplitude_damping(0.7)]).map_err(err)?,
        ),
        ("cdc(2,1)".into(), build_cdc(&CdcParams::new(2, 1).map_err(err)?).map_err(err)?),
        ("cdc(3,1)".into(), build_cdc(&CdcParams::new(3, 1).map_err(err)?).map_err(err)?),
    ];
    for (name, g) in &gds_list {
        let subs: Vec<_> = g.subchannels().iter().map(absolute_value_witness).collect();
        let w = build_gds_transposition_witness(g, &subs).map_err(err)?;
        pairs.push((name.clone(), g.assembled().clone(), w));
    }
    let mut worst = f64::NEG_INFINITY;
    for (name, ch, w) in &pairs {
        let v = oracle(ch, &cfg)?;
        worst = worst.max(v - w.y);
        ensure(v <= w.y + 1e-7, format!("{name}: oracle {v} > y = {}", w.y))?;
    }

    let id = oracle(&identity(2), &cfg)?;
    ensure((id - 2.0).abs() <= 1e-6, format!("identity oracle {id}"))?;
    for params in cdc_grid(&[2, 3], &[1, 2]) {
        let g = build_cdc::<f64>(&params).map_err(err)?;
        for sub in g.subchannels() {
            let v = oracle(sub, &cfg)?;
            ensure(
                (v - 1.0).abs() <= 1e-9,
                format!("cdc({}, {}) block {}: oracle {v}", params.p, params.n, sub.name()),
            )?;
        }
    }
    Ok(format!(
        "{} pairs, max oracle - y = {worst:.2e}, identity {id:.9}",
        pairs.len()
    ))
}

fn criterion_12() -> Outcome {
    let e = dephasing_pauli::<f64>();
    let f = dephasing_projective::<f64>();
    let swapped = KrausChannel::new("Delta_E'", vec![e.kraus()[1].clone(), e.kraus()[0].clone()]).map_err(err)?;
    let b2 = build_gds(vec![e.clone(), swapped]).map_err(err)?;
    let b3 = build_gds(vec![e, f]).map_err(err)?;
    let h = 0.5f64.sqrt();
    let zero = Complex::new(0.0, 0.0);
    // Displayed actions: entry (r, c) of the output is `coef * sigma[r, c]`.
    let b2_coef = |r: usize, c: usize| -> f64 {
        let (br, bc) = (r / 2, c / 2);
        if r % 2 != c % 2 {
            0.0
        } else if br == bc || r % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let b3_coef = |r: usize, c: usize| -> f64 {
        let (br, bc) = (r / 2, c / 2);
        if br == bc {
            if r == c {
                1.0
            } else {
                0.0
            }
        } else if r % 2 == 1 && c % 2 == 1 {
            -h
        } else {
            h
        }
    };
    let mut rng = common::rng(12);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let sigma = common::random_state(&mut rng, 4);
        for (name, g, coef) in [
            ("B2", &b2, &b2_coef as &dyn Fn(usize, usize) -> f64),
            ("B3", &b3, &b3_coef),
        ] {
            let out = g.assembled().apply(&sigma).map_err(err)?;
            let expect = ComplexMatrix::from_fn(4, 4, |r, c| {
                let k = coef(r, c);
                if k == 0.0 {
                    zero
                } else {
                    sigma[(r, c)] * k
                }
            });
            let dev = (&out - &expect).max_abs();
            worst = worst.max(dev);
            ensure(dev <= 1e-12, format!("{name} deviates by {dev:.2e}"))?;
        }
    }
    let verdict = gds_is_degradable(&b3);
    ensure(verdict.holds, format!("B3 degradability residual {:e}", verdict.residual))?;
    Ok(format!("20 inputs, max deviation {worst:.1e}; B3 degradable"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("degradable closed form 2 - H_b(p)", criterion_1),
        ("CDC infnorm product p^-|j-i|", criterion_2),
        ("block witness y = 1 + n/sqrt(p)", criterion_3),
        ("classical witness Tr S = n + 1", criterion_4),
        ("CDC capacity sandwich", criterion_5),
        ("erasure joint value", criterion_6),
        ("superadditivity certificate", criterion_7),
        ("degradability equivalence", criterion_8),
        ("single-letter amplitude damping family", criterion_9),
        ("block-diagonal optimality", criterion_10),
        ("oracle sandwich", criterion_11),
        ("dephasing implementations B2, B3", criterion_12),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} ({name}) [{secs:.1}s]: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}) [{secs:.1}s]: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
