//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::SQRT_2;
use std::process::ExitCode;
use std::time::Instant;

use diamond_relay::capacity::{
    approximate_capacity, build_full_lp, capacity, ratio, reduced_lp, schedule_rate, trivial_upper_bound,
};
use diamond_relay::experiments::{run_monte_carlo, sample_rayleigh, Fading, MonteCarloConfig};
use diamond_relay::lp::{check_certificate, solve, BigRational, SolveMode};
use diamond_relay::network::DiamondNetwork;
use diamond_relay::theory::{
    beta_profile, bound, g_values, max_m, min_m, opt4, recurrence_solution, sigma_nm, BoundaryCase,
};
use diamond_relay::worst_case::{verify_tightness, worst_even_type1, worst_odd_type1, FamilyId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_closed_form_bound() -> Outcome {
    let b2 = bound(2).unwrap();
    let b3 = bound(3).unwrap();
    let b_inf = bound(10_000).unwrap();
    ensure((b2 - 0.5).abs() <= 1e-12, || format!("bound(2) = {b2}"))?;
    ensure((b3 - 0.381966011).abs() <= 1e-6, || format!("bound(3) = {b3}"))?;
    ensure((b_inf - 0.25).abs() <= 1e-7, || format!("bound(1e4) = {b_inf}"))?;
    Ok(format!("bound(2)={b2}, bound(3)={b3:.9}, bound(1e4)-0.25={:.2e}", b_inf - 0.25))
}

fn c2_maximum_over_m() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=50 {
        let mut best = f64::NEG_INFINITY;
        for case in BoundaryCase::ALL {
            for m in min_m(case)..=max_m(n, case) {
                best = best.max(sigma_nm(m, case).unwrap() + 2.0);
            }
        }
        let err = (best - opt4(n).unwrap()).abs();
        worst = worst.max(err);
        ensure(err <= 1e-12, || format!("n={n}: max sigma+2 = {best}, opt4 = {}", opt4(n).unwrap()))?;
    }
    Ok(format!("n in [1:50], max deviation {worst:.1e}"))
}

fn c3_beta_profiles() -> Outcome {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for n in 2..=12 {
        for case in BoundaryCase::ALL {
            for m in min_m(case)..=max_m(n, case) {
                let tag = format!("n={n} m={m} case {case}");
                let p = beta_profile(n, m, case).map_err(|e| format!("{tag}: {e}"))?;
                let sigma = sigma_nm(m, case).unwrap();
                for g in g_values(&p).into_iter().filter_map(|g| g.finite()) {
                    worst = worst.max((g - sigma - 2.0).abs());
                    ensure((g - sigma - 2.0).abs() <= 1e-9, || format!("{tag}: G = {g}, sigma+2 = {}", sigma + 2.0))?;
                }
                let sol = recurrence_solution(m, case).map_err(|e| format!("{tag}: {e}"))?;
                let b = &sol.b;
                for i in 1..m {
                    let res = b[i + 1] - sigma * b[i] + b[i - 1];
                    ensure(res.abs() <= 1e-9, || format!("{tag}: recurrence residual {res} at {i}"))?;
                }
                for (i, _) in b.iter().enumerate() {
                    let closed = sol.u * sol.root_u.powu(i as u32) + sol.v * sol.root_v.powu(i as u32);
                    ensure(closed.im.abs() <= 1e-9, || format!("{tag}: Im b_{i} = {}", closed.im))?;
                }
                let terminal = if case.last_is_infinite() { b[m] } else { b[m - 1] - (sigma + 1.0) * b[m] };
                ensure(terminal.abs() <= 1e-9, || format!("{tag}: terminal residual {terminal}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (n, m, case) triples, max |G - sigma - 2| = {worst:.1e}"))
}

fn c4_even_tightness() -> Outcome {
    let mut notes = Vec::new();
    for n in [2, 4, 6, 8] {
        let r = verify_tightness(FamilyId::Even1, n, None, 1e-6).map_err(|e| format!("n={n}: {e}"))?;
        let target = opt4(n).unwrap();
        ensure(r.pass, || format!("n={n}: gap {}", r.gap))?;
        ensure((r.cn - target).abs() <= 1e-6, || format!("n={n}: C_n = {}, target {target}", r.cn))?;
        ensure((r.two_state_rate - target).abs() <= 1e-9, || {
            format!("n={n}: two-state rate {}, target {target}", r.two_state_rate)
        })?;
        notes.push(format!("n={n} gap {:.1e}", r.gap));
    }
    Ok(notes.join(", "))
}

fn c5_odd_tightness() -> Outcome {
    let mut notes = Vec::new();
    for family in [FamilyId::Odd1, FamilyId::Odd2] {
        for n in [3, 5, 7] {
            let mut gaps = Vec::new();
            for l in [1e3, 1e6, 1e9] {
                let r = verify_tightness(family, n, Some(l), 1e-4).map_err(|e| format!("{family} n={n}: {e}"))?;
                gaps.push(r.gap);
            }
            ensure(gaps[2] <= 1e-4, || format!("{family} n={n}: gap at L=1e9 is {}", gaps[2]))?;
            ensure(gaps[1] <= gaps[0] && gaps[2] <= gaps[1], || {
                format!("{family} n={n}: gaps not shrinking: {gaps:?}")
            })?;
            notes.push(format!("{family}/{n}: {:.0e}>{:.0e}>{:.0e}", gaps[0], gaps[1], gaps[2]));
        }
    }
    Ok(notes.join(", "))
}

fn c6_samplewise_floor() -> Outcome {
    let n_list: Vec<usize> = (2..=8).collect();
    let mut worst_slack = f64::INFINITY;
    for fading in [Fading::Rayleigh { sigma: 1.0 }, Fading::LogUniform { lo: 0.01, hi: 100.0 }] {
        let cfg = MonteCarloConfig { n_list: n_list.clone(), trials: 1000, seed: 6, fading };
        let out = run_monte_carlo(&cfg).map_err(|e| format!("{fading:?}: {e}"))?;
        for &(n, t, r) in &out.raw {
            let b = bound(n).unwrap();
            worst_slack = worst_slack.min(r - b);
            ensure(r >= b - 1e-9 && r <= 1.0 + 1e-9, || format!("{fading:?} n={n} trial {t}: ratio {r}, bound {b}"))?;
        }
    }
    Ok(format!("14000 networks, min(ratio - bound) = {worst_slack:.3e}"))
}

fn rational_network(rng: &mut ChaCha8Rng, n: usize) -> DiamondNetwork {
    let pairs: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.random_range(1..=1000) as f64 / 100.0, rng.random_range(1..=1000) as f64 / 100.0)).collect();
    DiamondNetwork::from_pairs(&pairs).unwrap()
}

/// Best max-min value over the grid `lambda = h * (i, j, k, rest)`.
fn grid_oracle(l: [f64; 2], r: [f64; 2], steps: usize) -> f64 {
    // cut[omega][state] with bit 0 = relay 1.
    let mut cut = [[0.0f64; 4]; 4];
    for (omega, row) in cut.iter_mut().enumerate() {
        for (s, c) in row.iter_mut().enumerate() {
            let mut ml: f64 = 0.0;
            let mut mr: f64 = 0.0;
            for i in 0..2 {
                let tx = s >> i & 1 == 1;
                let src = omega >> i & 1 == 1;
                if !tx && !src {
                    ml = ml.max(l[i]);
                }
                if tx && src {
                    mr = mr.max(r[i]);
                }
            }
            *c = ml + mr;
        }
    }
    let h = 1.0 / steps as f64;
    let mut best = 0.0f64;
    for i in 0..=steps {
        for j in 0..=steps - i {
            for k in 0..=steps - i - j {
                let lam = [i as f64 * h, j as f64 * h, k as f64 * h, (steps - i - j - k) as f64 * h];
                let mut v = f64::INFINITY;
                for row in &cut {
                    v = v.min(row[0] * lam[0] + row[1] * lam[1] + row[2] * lam[2] + row[3] * lam[3]);
                }
                best = best.max(v);
            }
        }
    }
    best
}

fn c7_lp_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let n = 1 + k % 6;
        let net = rational_network(&mut rng, n);
        let lp = build_full_lp::<f64>(&net).unwrap();
        let fs = solve(&lp).map_err(|e| e.to_string())?;
        check_certificate(&lp, &fs).map_err(|v| format!("float certificate, network {k}: {v:?}"))?;
        let lpx = build_full_lp::<BigRational>(&net).unwrap();
        let xs = solve(&lpx).map_err(|e| e.to_string())?;
        check_certificate(&lpx, &xs).map_err(|v| format!("exact certificate, network {k}: {v:?}"))?;
        let fv = fs.objective;
        let xv = approximate_capacity(&net, SolveMode::Exact).map_err(|e| e.to_string())?.value;
        let d = (fv - xv).abs();
        worst = worst.max(d);
        ensure(d <= 1e-7, || format!("network {k}: float {fv} vs exact {xv}"))?;
    }
    let mut grid_notes = Vec::new();
    let mut grid_nets = vec![[2.0, 2.0, 2.0, 2.0]];
    for _ in 0..3 {
        grid_nets.push([0.0; 4].map(|_| rng.random_range(10..=500) as f64 / 100.0));
    }
    for [l1, r1, l2, r2] in grid_nets {
        let net = DiamondNetwork::from_pairs(&[(l1, r1), (l2, r2)]).unwrap();
        let lpv = capacity(&net).map_err(|e| e.to_string())?;
        let g = grid_oracle([l1, l2], [r1, r2], 1000);
        ensure(g <= lpv + 1e-9, || format!("grid {g} exceeds LP {lpv} on {net:?}"))?;
        ensure(g >= lpv - 4e-3, || format!("grid {g} too far below LP {lpv} on {net:?}"))?;
        grid_notes.push(format!("{:.1e}", lpv - g));
    }
    Ok(format!("100 exact/float pairs, max diff {worst:.1e}; grid shortfalls [{}]", grid_notes.join(", ")))
}

fn c8_reduction_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_01: f64 = f64::INFINITY;
    let mut worst_14: f64 = f64::INFINITY;
    for k in 0..200 {
        let n = 2 + k % 7;
        let gains: Vec<(f64, f64)> = (0..n)
            .map(|_| (sample_rayleigh(&mut rng, 1.0), sample_rayleigh(&mut rng, 1.0)))
            .collect();
        let norm = DiamondNetwork::from_gains(&gains).unwrap().normalize().map_err(|e| e.to_string())?;
        let opt0 = capacity(norm.network()).map_err(|e| e.to_string())?;
        let opt1 = reduced_lp(&norm).map_err(|e| e.to_string())?.value;
        let opt4 = opt4(n).unwrap();
        worst_01 = worst_01.min(opt1 - opt0);
        worst_14 = worst_14.min(opt4 - opt1);
        ensure(opt0 <= opt1 + 1e-9, || format!("network {k} (n={n}): OPT0 {opt0} > OPT1 {opt1}"))?;
        ensure(opt1 <= opt4 + 1e-9, || format!("network {k} (n={n}): OPT1 {opt1} > OPT4 {opt4}"))?;
    }
    Ok(format!("200 networks, min(OPT1-OPT0) = {worst_01:.1e}, min(OPT4-OPT1) = {worst_14:.1e}"))
}

fn c9_monte_carlo() -> Outcome {
    let cfg = MonteCarloConfig { n_list: vec![3], trials: 1000, seed: 2020, fading: Fading::UNIT_RAYLEIGH };
    let out = run_monte_carlo(&cfg).map_err(|e| e.to_string())?;
    let s = &out.stats[0];
    ensure((0.61..=0.71).contains(&s.median), || format!("median {}", s.median))?;
    ensure((0.67..=0.77).contains(&s.q75), || format!("q75 {}", s.q75))?;
    let b = bound(3).unwrap();
    ensure(s.min >= b - 1e-9, || format!("min {} below bound {b}", s.min))?;
    let one = run_monte_carlo(&MonteCarloConfig { n_list: vec![1], ..cfg.clone() }).map_err(|e| e.to_string())?;
    ensure(one.raw.iter().all(|r| r.2 == 1.0), || "n=1 ratio differs from 1".into())?;
    Ok(format!("n=3 median {:.4}, q75 {:.4}, min {:.4}; n=1 all 1.0", s.median, s.q75, s.min))
}

fn c10_tables() -> Outcome {
    let net = worst_even_type1(6).unwrap();
    let s = 2.0 + SQRT_2;
    let ell = [SQRT_2, SQRT_2, 2.0, 2.0, s, s];
    let r = [s, s, 2.0, 2.0, SQRT_2, SQRT_2];
    for i in 0..6 {
        ensure((net.ell(i) - ell[i]).abs() <= 1e-12 && (net.r(i) - r[i]).abs() <= 1e-12, || {
            format!("even1(6) relay {}: ({}, {})", i + 1, net.ell(i), net.r(i))
        })?;
    }
    let net = worst_odd_type1(5, 1e6).unwrap();
    let ell = [1.0, 1.8019, 1.8019, 3.2470, 3.2470];
    let r = [1e6, 2.2470, 2.2470, 1.4450, 1.4450];
    let round4 = |x: f64| (x * 1e4).round() / 1e4;
    for i in 0..5 {
        ensure(round4(net.ell(i)) == ell[i] && round4(net.r(i)) == r[i], || {
            format!("odd1(5) relay {}: ({}, {})", i + 1, net.ell(i), net.r(i))
        })?;
    }
    Ok("even1(6) to 1e-12, odd1(5) to 4 decimals".into())
}

fn c11_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..200 {
        let n = 1 + k % 6;
        let pairs: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.05..10.0), rng.random_range(0.05..10.0))).collect();
        let net = DiamondNetwork::from_pairs(&pairs).unwrap();
        let res = approximate_capacity(&net, SolveMode::Float).map_err(|e| e.to_string())?;
        let c = res.value;
        let tag = format!("network {k} (n={n})");

        let mut bumped = pairs.clone();
        let i = rng.random_range(0..n);
        let delta = rng.random_range(0.0..5.0);
        if rng.random_bool(0.5) {
            bumped[i].0 += delta;
        } else {
            bumped[i].1 += delta;
        }
        let cb = capacity(&DiamondNetwork::from_pairs(&bumped).unwrap()).map_err(|e| e.to_string())?;
        ensure(cb >= c - 1e-9, || format!("{tag}: monotonicity {cb} < {c}"))?;

        let alpha = rng.random_range(0.1..10.0);
        let cs = capacity(&net.scale(alpha).unwrap()).map_err(|e| e.to_string())?;
        ensure((cs - alpha * c).abs() <= 1e-9 * (alpha * c).max(1.0), || format!("{tag}: scaling {cs} vs {}", alpha * c))?;

        let mut perm: Vec<usize> = (0..n).collect();
        for j in (1..n).rev() {
            perm.swap(j, rng.random_range(0..=j));
        }
        let cp = capacity(&net.permute(&perm).unwrap()).map_err(|e| e.to_string())?;
        ensure((cp - c).abs() <= 1e-9 * c.max(1.0), || format!("{tag}: permutation {cp} vs {c}"))?;

        let rate = schedule_rate(&net, &res.schedule).map_err(|e| e.to_string())?;
        ensure((rate - c).abs() <= 1e-9 * c.max(1.0), || format!("{tag}: schedule rate {rate} vs {c}"))?;

        let ub = trivial_upper_bound(&net);
        ensure(c <= ub + 1e-9, || format!("{tag}: {c} above upper bound {ub}"))?;
        ensure(ratio(&net).map_err(|e| e.to_string())? >= bound(n).unwrap() - 1e-9, || format!("{tag}: ratio below bound"))?;
    }
    Ok("200 networks, n in [1:6]".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("closed-form bound", c1_closed_form_bound),
        ("maximum over (m, case)", c2_maximum_over_m),
        ("beta profiles and equal G", c3_beta_profiles),
        ("tightness, even n", c4_even_tightness),
        ("tightness, odd n", c5_odd_tightness),
        ("samplewise floor", c6_samplewise_floor),
        ("LP correctness", c7_lp_correctness),
        ("reduction chain", c8_reduction_chain),
        ("Monte-Carlo box statistics", c9_monte_carlo),
        ("worst-case tables", c10_tables),
        ("capacity axioms", c11_axioms),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
