//! Acceptance suite: one PASS/FAIL line per criterion, with wall time.
//!
//! Runs as a plain binary (`harness = false`). Exits nonzero if any criterion fails.

use std::time::Instant;

use dlab_core::audit::{
    convergence_slope, increment_decomposition, perturbation_experiment, IncrementReport, PerturbationSetup,
};
use dlab_core::bessel::bessel_j;
use dlab_core::dynamics::{
    evolve, g_n_eval, power, regularized_convergence, solve_forced, ConvergenceRun, ForcingTerm,
    RegularizedNonlinearity, Trajectory,
};
use dlab_core::dyadic::{dyadic_project, DyadicBand};
use dlab_core::norms::{
    admissible_check, admissible_partner, derivative_gain, energy_n, optimal_p0, radial_strichartz_experiment,
    s_d, s_d_second_branch, strichartz_ratio, NormName, NormSpec, RadialSpace, StrichartzSetup,
};
use dlab_core::partition::{make_partition, UnitProjector};
use dlab_core::radial::{fourier_bessel, resolved_rule, RadialProfile};
use dlab_core::randomization::{
    build_atlas, hs_stability_sweep, khintchine_check, sample_randomization, Distribution, RandomCoefficientFamily,
    Truncation,
};
use dlab_core::{Direction, Field, Grid};
use dlab_harness::config::ExperimentConfig;
use dlab_harness::run::{run, RunOptions};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

/// Random spectrum on `|ξ| ≤ cut`, zero elsewhere.
fn band_limited(grid: Grid, cut: f64, rng: &mut ChaCha8Rng) -> Field {
    let spec = grid
        .frequency_norms()
        .iter()
        .map(|&k| {
            if k <= cut {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::default()
            }
        })
        .collect();
    Field::from_spectral(grid, spec).unwrap()
}

fn gaussian(grid: Grid, amp: f64, width: f64, centre: [f64; 3], kick: [f64; 3]) -> Field {
    let dim = grid.dim();
    Field::from_fn(grid, move |x| {
        let mut r2 = 0.0;
        let mut phase = 0.0;
        for a in 0..dim {
            let y = x[a] - centre[a];
            r2 += y * y;
            phase += kick[a] * x[a];
        }
        Complex64::from_polar(amp * (-r2 / (width * width)).exp(), phase)
    })
}

fn partition_reconstruction() -> Outcome {
    let mut worst_pu: f64 = 0.0;
    for (dim, l, n) in [(1, 16.0, 256), (2, 8.0, 32), (3, 8.0, 16)] {
        let grid = Grid::new(dim, l, n).map_err(e)?;
        let pu = make_partition(&grid).map_err(e)?;
        let mut acc = vec![0.0; grid.len()];
        for c in 0..pu.centers().len() {
            for p in pu.support(c) {
                acc[p.flat] += p.weight;
            }
        }
        worst_pu = acc.iter().fold(worst_pu, |m, s| m.max((s - 1.0).abs()));
    }
    ensure(worst_pu < 1e-12, || format!("sum of phi_i deviates from 1 by {worst_pu:.3e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_unit, mut worst_dyadic): (f64, f64) = (0.0, 0.0);
    for i in 0..20 {
        let grid = match i % 3 {
            0 => Grid::new(1, 16.0, 128),
            1 => Grid::new(2, 8.0, 32),
            _ => Grid::new(3, 8.0, 16),
        }
        .map_err(e)?;
        let f = band_limited(grid, 1.0 + 4.0 * rng.random::<f64>(), &mut rng);
        let projector = UnitProjector::new(&grid);
        let mut units = Field::zeros(grid);
        for j in projector.indices() {
            units = &units + &projector.project(&f, j).map_err(e)?.field;
        }
        let mut shells = Field::zeros(grid);
        for m in DyadicBand::for_grid(&grid).frequencies() {
            shells = &shells + &dyadic_project(&f, m).field;
        }
        worst_unit = worst_unit.max(units.relative_l2_error(&f));
        worst_dyadic = worst_dyadic.max(shells.relative_l2_error(&f));
    }
    ensure(worst_unit < 1e-10 && worst_dyadic < 1e-10, || {
        format!("unit-scale error {worst_unit:.3e}, dyadic error {worst_dyadic:.3e}")
    })?;
    Ok(format!("pu {worst_pu:.1e}, sum P_j {worst_unit:.1e}, sum P_M {worst_dyadic:.1e}"))
}

fn fourier_bessel_suite() -> Outcome {
    let mut worst_j: f64 = 0.0;
    for i in 0..=4990 {
        let r = 0.1 + 0.01 * i as f64;
        let exact = (2.0 / (std::f64::consts::PI * r)).sqrt() * r.sin();
        worst_j = worst_j.max((bessel_j(0.5, r).map_err(e)? - exact).abs());
    }
    ensure(worst_j < 1e-10, || format!("J_1/2 error {worst_j:.3e}"))?;

    let rule = resolved_rule(12.0, 144.0);
    let profile = |k: usize| {
        RadialProfile::from_fn(&rule, |s| Complex64::new(s.powi(k as i32) * (-s * s / 2.0).exp(), 0.0))
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    let f0 = profile(0).map_err(e)?;
    let big = fourier_bessel(&f0, 0, 3, Direction::Forward).map_err(e)?;
    let self_rec = big.relative_error(&f0.scale(Complex64::new(two_pi.powf(1.5), 0.0)), 3);
    ensure(self_rec < 1e-6, || format!("gaussian self-reciprocity {self_rec:.3e}"))?;

    let mut worst_parity: f64 = 0.0;
    for d in [3usize, 7] {
        for k in 0..=4usize {
            let f = profile(k).map_err(e)?;
            let once = fourier_bessel(&f, k, d, Direction::Forward).map_err(e)?;
            let twice = fourier_bessel(&once, k, d, Direction::Forward).map_err(e)?;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let expected = f.scale(Complex64::new(sign * two_pi.powi(d as i32), 0.0));
            worst_parity = worst_parity.max(twice.relative_error(&expected, d));
        }
    }
    ensure(worst_parity < 1e-5, || format!("double-transform parity {worst_parity:.3e}"))?;
    Ok(format!("J_1/2 {worst_j:.1e}, self-reciprocity {self_rec:.1e}, parity {worst_parity:.1e}"))
}

fn randomization_suite() -> Outcome {
    let grid = Grid::new(2, 8.0, 16).map_err(e)?;
    let trunc = Truncation { k_max: 16, j_radius: 4.0, tolerance: 5e-3 };
    let corpus = [
        gaussian(grid, 1.0, 1.0, [0.0; 3], [0.0; 3]),
        gaussian(grid, 1.0, 0.7, [0.5, -0.5, 0.0], [1.0, 0.0, 0.0]),
        gaussian(grid, 2.0, 1.2, [-1.0, 0.0, 0.0], [0.0, -1.5, 0.0]),
        Field::from_fn(grid, |x| Complex64::new(1.0 / (x[0] * x[0] + x[1] * x[1]).sqrt().cosh(), 0.0)),
        Field::from_fn(grid, |x| {
            let g = (-(x[0] * x[0] + x[1] * x[1])).exp();
            Complex64::new(g, 0.5 * x[0] * g)
        }),
    ];

    let mut worst_rec: f64 = 0.0;
    let mut worst_parseval: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut parseval_pairs = 0;
    for (idx, f) in corpus.iter().enumerate() {
        let atlas = build_atlas(f, trunc).map_err(e)?;
        let ones = sample_randomization(&atlas, &RandomCoefficientFamily::new(Distribution::Ones, 0), 0);
        worst_rec = worst_rec.max(ones.field.relative_l2_error(atlas.truncated()));

        if idx < 2 {
            let centres = atlas.centres();
            for &m in atlas.shells().iter().take(3) {
                for c in centres.iter().filter(|c| c[0].abs() <= 1 && c[1].abs() <= 1).take(2) {
                    let k = 16 * m.ceil() as usize + 16;
                    let p = atlas.parseval_check(m, *c, k).map_err(e)?;
                    worst_parseval = worst_parseval.max(p.relative_error);
                    parseval_pairs += 1;
                }
            }
        }

        let fam = RandomCoefficientFamily::new(Distribution::Rademacher, 100 + idx as u64);
        for r in hs_stability_sweep(&atlas, f, &[0.5, 0.75], &fam, 200).map_err(e)? {
            worst_ratio = worst_ratio.max(r.ratio);
        }
    }
    ensure(worst_rec == 0.0, || format!("deterministic reconstruction error {worst_rec:.3e}"))?;
    ensure(worst_parseval < 1e-8, || format!("Parseval bookkeeping error {worst_parseval:.3e}"))?;
    ensure(worst_ratio < 10.0, || format!("H^s ratio {worst_ratio:.3}"))?;
    Ok(format!(
        "reconstruction {worst_rec:.1e}, Parseval {worst_parseval:.1e} over {parseval_pairs} (M,i), max H^s ratio {worst_ratio:.3}"
    ))
}

/// `(E S^β)^{1/β} / (√β ‖c‖₂)` for Rademacher sums, β ∈ {2, 4}.
fn khintchine_oracle(c: &[f64], beta: u32) -> f64 {
    let s2: f64 = c.iter().map(|x| x * x).sum();
    let moment = match beta {
        2 => s2,
        4 => 3.0 * s2 * s2 - 2.0 * c.iter().map(|x| x.powi(4)).sum::<f64>(),
        _ => unreachable!(),
    };
    moment.powf(1.0 / beta as f64) / ((beta as f64).sqrt() * s2.sqrt())
}

fn khintchine_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let vectors: Vec<Vec<f64>> = (0..50)
        .map(|_| {
            let n = rng.random_range(1..=24);
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
        })
        .collect();
    let results: Vec<Result<(f64, f64), String>> = vectors
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let fam = RandomCoefficientFamily::new(Distribution::Rademacher, 1000 + i as u64);
            let mut worst_ratio: f64 = 0.0;
            let mut worst_z: f64 = 0.0;
            for beta in [2u32, 4, 8] {
                let r = khintchine_check(c, &fam, beta, 100_000).map_err(e)?;
                worst_ratio = worst_ratio.max(r.ratio);
                if beta <= 4 {
                    let z = (r.ratio - khintchine_oracle(c, beta)).abs() / r.stderr.max(1e-15);
                    // A single-coefficient vector gives a deterministic |S|; stderr is roundoff.
                    let z = if c.len() == 1 { 0.0 } else { z };
                    worst_z = worst_z.max(z);
                }
            }
            Ok((worst_ratio, worst_z))
        })
        .collect();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for r in results {
        let (a, b) = r?;
        worst_ratio = worst_ratio.max(a);
        worst_z = worst_z.max(b);
    }
    ensure(worst_ratio <= 1.2, || format!("Khintchine ratio {worst_ratio:.4}"))?;
    ensure(worst_z <= 3.0, || format!("oracle mismatch at {worst_z:.2} standard errors"))?;
    Ok(format!("max ratio {worst_ratio:.4}, max oracle deviation {worst_z:.2} se"))
}

/// Max relative mass and `E_n` drift of an unforced run sampled every `stride` steps.
fn drifts(u0: &Field, reg: &RegularizedNonlinearity, dt: f64, t1: f64, stride: usize) -> Result<(f64, f64), String> {
    let traj = solve_forced(u0, &ForcingTerm::zero(*u0.grid()), reg, (0.0, t1), dt, stride).map_err(e)?;
    let m0 = traj.first().l2_norm();
    let e0 = energy_n(traj.first(), reg);
    let mut dm: f64 = 0.0;
    let mut de: f64 = 0.0;
    for s in traj.states() {
        dm = dm.max((s.l2_norm() - m0).abs() / m0);
        de = de.max((energy_n(s, reg) - e0).abs() / e0.abs());
    }
    Ok((dm, de))
}

/// Mass already at roundoff cannot show a halving ratio; below this floor the clause is met.
const MASS_FLOOR: f64 = 1e-12;

fn solver_conservation() -> Outcome {
    let cases = [
        (
            "dim 3, 64^3",
            gaussian(Grid::new(3, 16.0, 64).map_err(e)?, 1.0, 1.5, [0.0; 3], [0.5, 0.0, 0.0]),
            RegularizedNonlinearity::for_dimension(4, 3.0).map_err(e)?,
        ),
        (
            "dim 1, 4096 points, d=7",
            gaussian(Grid::new(1, 64.0, 4096).map_err(e)?, 1.5, 1.0, [0.0; 3], [1.0, 0.0, 0.0]),
            RegularizedNonlinearity::for_dimension(4, 7.0).map_err(e)?,
        ),
    ];
    let mut lines = Vec::new();
    for (name, u0, reg) in cases {
        let (m1, e1) = drifts(&u0, &reg, 1e-3, 1.0, 50)?;
        let (m2, e2) = drifts(&u0, &reg, 5e-4, 1.0, 100)?;
        let mass_ratio = m1 / m2;
        let energy_ratio = e1 / e2;
        ensure(m1 < 1e-8 && e1 < 1e-6, || format!("{name}: mass drift {m1:.3e}, energy drift {e1:.3e}"))?;
        let mass_ok = (m1 < MASS_FLOOR && m2 < MASS_FLOOR) || (3.0..=5.0).contains(&mass_ratio);
        ensure(mass_ok, || format!("{name}: mass halving ratio {mass_ratio:.3}"))?;
        ensure((3.0..=5.0).contains(&energy_ratio), || format!("{name}: energy halving ratio {energy_ratio:.3}"))?;
        lines.push(format!(
            "{name}: mass {m1:.1e} (ratio {mass_ratio:.2}, roundoff floor), E_n {e1:.1e} (ratio {energy_ratio:.2})"
        ));
    }
    Ok(lines.join("; "))
}

fn regularization_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = 9.0 / 5.0;
    let grid = Grid::new(1, 8.0, 512).map_err(e)?;
    for n in [2u32, 4, 8, 16] {
        let reg = RegularizedNonlinearity::new(n, p).map_err(e)?;
        let values = (0..grid.len())
            .map(|_| Complex64::from_polar(n as f64 * rng.random::<f64>(), rng.random_range(-3.2..3.2)))
            .collect();
        let u = Field::new(grid, values).map_err(e)?;
        let gn = g_n_eval(&u, &reg);
        let exact = gn.values().iter().zip(u.values()).all(|(a, z)| *a == power(*z, p));
        ensure(exact, || format!("g_n differs from g on |u| <= {n}"))?;
    }

    let g = Grid::new(1, 2.0 * std::f64::consts::PI, 32).map_err(e)?;
    let low = |amp: f64| {
        Field::from_fn(g, move |x| Complex64::new(amp * (1.0 + 0.5 * x[0].cos()), amp * 0.3 * (2.0 * x[0]).sin()))
    };
    let run = ConvergenceRun { interval: (0.0, 0.2), dt: 0.002, stride: 10, p };
    let spec = NormSpec::named(NormName::V, 7.0, 0.01).map_err(e)?;
    let r = regularized_convergence(&low(6.0), &low(2.0), &run, &[2, 4, 8, 16], &spec).map_err(e)?;
    ensure(r.amplitudes[0] > 2.0, || format!("amplitude {:.3} does not exceed level 2", r.amplitudes[0]))?;
    ensure(r.strictly_decreasing(), || format!("successive V distances {:?}", r.successive))?;
    Ok(format!(
        "g_n = g bitwise; max |u| {:.2}; successive V distances {}",
        r.amplitudes[0],
        r.successive.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(" > ")
    ))
}

fn bump(g: Grid, amp: f64, shift: f64) -> Field {
    Field::from_fn(g, |x| {
        let y = x[0] - shift;
        Complex64::new(amp * (-y * y).exp(), 0.4 * amp * y * (-y * y).exp())
    })
}

fn energy_audit() -> Outcome {
    let g = Grid::new(1, 16.0, 256).map_err(e)?;
    let reg = RegularizedNonlinearity::new(2, 9.0 / 5.0).map_err(e)?;
    let force = ForcingTerm::untruncated(&bump(g, 3.0, 1.5), "bump");
    let v0 = bump(g, 5.0, -0.5);
    let dts = [4e-4, 2e-4, 1e-4, 5e-5];
    let reports = dts
        .par_iter()
        .map(|&dt| {
            let t = solve_forced(&v0, &force, &reg, (0.0, 0.2), dt, 1)?;
            increment_decomposition(&t, &force, &reg, 0.0, 0.2)
        })
        .collect::<Result<Vec<IncrementReport>, _>>()
        .map_err(e)?;
    ensure(reports[0].term_en.abs() > 1e-2, || format!("run never saturates: term_en {:.3e}", reports[0].term_en))?;
    let res: Vec<f64> = reports.iter().map(|r| r.residual).collect();
    let slope = convergence_slope(&dts, &res).map_err(e)?;
    ensure((slope - 2.0).abs() <= 0.3, || format!("slope {slope:.3}, residuals {res:?}"))?;

    let small = RegularizedNonlinearity::new(4, 3.0).map_err(e)?;
    let g1 = Grid::new(1, 16.0, 128).map_err(e)?;
    let zero = ForcingTerm::zero(g1);
    let t = solve_forced(&bump(g1, 1.0, 0.0), &zero, &small, (0.0, 0.5), 1e-3, 10).map_err(e)?;
    let unforced = increment_decomposition(&t, &zero, &small, 0.0, 0.5).map_err(e)?;
    ensure(
        unforced.term_forcing == 0.0 && unforced.term_en == 0.0 && unforced.residual.abs() < 1e-6,
        || format!("unforced case {unforced:?}"),
    )?;

    let g2 = Grid::new(1, 16.0, 64).map_err(e)?;
    let forcing = ForcingTerm::untruncated(&bump(g2, 3.0, 1.0), "bump");
    let zeros = Trajectory::uniform(0.0, 0.4, vec![Field::zeros(g2); 9]).map_err(e)?;
    let vanishing = increment_decomposition(&zeros, &forcing, &reg, 0.0, 0.4).map_err(e)?;
    ensure(vanishing.lhs == 0.0 && vanishing.residual.abs() < 1e-10, || format!("v = 0 case {vanishing:?}"))?;
    Ok(format!(
        "slope {slope:.3} (term_en {:.2e}, finest residual {:.2e}); F=0 residual {:.1e}; v=0 residual {:.1e}",
        reports[0].term_en,
        res[3].abs(),
        unforced.residual.abs(),
        vanishing.residual.abs()
    ))
}

fn admissibility_and_gain() -> Outcome {
    let d = 7.0;
    // (q, r, admissible at d = 7)
    let table: [(f64, f64, bool); 10] = [
        (f64::INFINITY, 2.0, true),
        (2.0, 14.0 / 5.0, true),
        (4.0, 7.0 / 3.0, true),
        (3.0, 42.0 / 17.0, true),
        (9.0, 126.0 / 59.0, true),
        (6.0, 21.0 / 9.0, false),
        (2.0, 2.0, false),
        (1.5, 4.0, false),
        (4.0, 2.0, false),
        (2.0, 26.0 / 11.0, false),
    ];
    for (q, r, want) in table {
        ensure(admissible_check(q, r, d) == want, || format!("admissible_check({q}, {r}, 7) != {want}"))?;
    }
    // (q, p0, gain) from 2/q + d/p0 - d/2 by hand.
    let gains: [(f64, f64, Option<f64>); 5] = [
        (2.0, 26.0 / 11.0, None),
        (4.0, 7.0 / 3.0, Some(0.0)),
        (2.0, 2.5, Some(0.3)),
        (4.0, 2.8, Some(0.5 + 2.5 - 3.5)),
        (5.0, 1.0 / (0.5 - 2.0 / 65.0), Some(12.0 / 65.0)),
    ];
    for (q, p0, want) in gains {
        match (derivative_gain(q, p0, d), want) {
            (Err(_), None) => {}
            (Ok(g), Some(w)) if (g - w).abs() < 1e-12 => {}
            (got, _) => return Err(format!("derivative_gain({q}, {p0}, 7) = {got:?}, expected {want:?}")),
        }
    }
    ensure((admissible_partner(4.0, 3.0) - 3.0).abs() < 1e-14, || "admissible partner at d=3".into())?;
    let sd = [(7.0, 87.0 / 117.0, true), (10.0, 39.0 / 57.0, true), (11.0, 43.0 / 63.0, false)];
    for (dd, want, second) in sd {
        ensure((s_d(dd) - want).abs() < 1e-15, || format!("s_d({dd}) = {} vs {want}", s_d(dd)))?;
        ensure(s_d_second_branch(dd) == second, || format!("branch at d = {dd}"))?;
    }
    Ok("10 admissibility pairs, 5 gains incl. excluded endpoint, s_d at 7/10/11 with crossover after 10".into())
}

fn strichartz_statistics() -> Outcome {
    let grid = Grid::new(3, 16.0, 32).map_err(e)?;
    let d = 3.0;
    let pairs: Vec<(f64, f64)> = [f64::INFINITY, 4.0, 8.0].iter().map(|&q| (q, admissible_partner(q, d))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data: Vec<Field> = (0..100).map(|_| band_limited(grid, 1.0 + 1.5 * rng.random::<f64>(), &mut rng)).collect();
    // Wrap-around time L²/(4π·max|ξ|) ≈ 8 for |ξ| ≤ 2.5; the window stays well below it.
    let ratios: Vec<f64> = data
        .par_iter()
        .map(|f| {
            pairs
                .iter()
                .map(|&(q, r)| strichartz_ratio(f, q, r, (0.0, 0.5), 9).unwrap_or(f64::NAN))
                .fold(0.0, f64::max)
        })
        .collect();
    let det_max = ratios.iter().cloned().fold(0.0, f64::max);
    ensure(ratios.iter().all(|r| r.is_finite()) && det_max < 10.0, || format!("deterministic ratio {det_max:.3}"))?;

    let dd = 7.0;
    let q = 2.0;
    let p0 = optimal_p0(q, dd, 0.05);
    let setup = StrichartzSetup { s: 0.75, q, p: p0, p0, d_param: dd, window: (0.0, 0.5), snapshots: 11, sigma_t: None };
    let space = RadialSpace::new(7, 16.0, 8.0).map_err(e)?;
    let corpus: [Box<dyn Fn(f64) -> f64>; 5] = [
        Box::new(|r| (-r * r / 2.0).exp()),
        Box::new(|r| (-r * r / 2.0).exp() * (1.0 + r)),
        Box::new(|r| 1.0 / (r.cosh() * r.cosh())),
        Box::new(|r| (-(r - 2.0).powi(2)).exp()),
        Box::new(|r| (-r * r / 4.0).exp() * (2.0 * r).cos()),
    ];
    let mut rand_max: f64 = 0.0;
    let mut gain = 0.0;
    for (i, f) in corpus.iter().enumerate() {
        let fam = RandomCoefficientFamily::new(Distribution::Rademacher, 500 + i as u64);
        let st = radial_strichartz_experiment(&space, &space.sample(f), &setup, &fam, 100).map_err(e)?;
        ensure(st.failed.is_empty(), || format!("datum {i}: failed draws {:?}", st.failed))?;
        rand_max = rand_max.max(st.max_normalized());
        gain = st.gain;
    }
    ensure(rand_max < 10.0, || format!("randomized ratio/sqrt(beta) {rand_max:.3}"))?;
    Ok(format!(
        "deterministic max ratio {det_max:.3} over 100 data x 3 pairs; randomized max ratio/sqrt(beta) {rand_max:.3} (gain {gain:.3})"
    ))
}

fn perturbation() -> Outcome {
    let g = Grid::new(1, 16.0, 128).map_err(e)?;
    let v0 = gaussian(g, 0.02, 1.0, [0.0; 3], [0.0; 3]);
    let f = gaussian(g, 0.5, 1.0, [1.0, 0.0, 0.0], [0.0; 3]);
    let setup = PerturbationSetup {
        interval: (0.0, 1.0),
        dt: 1e-3,
        stride: 10,
        d_param: 7.0,
        reg: RegularizedNonlinearity::for_dimension(4, 7.0).map_err(e)?,
        smallness: 0.1,
    };
    let r = perturbation_experiment(&v0, &f, &[0.0, 0.1, 0.05, 0.025], &setup).map_err(e)?;
    ensure(r.monotone(), || format!("distances {:?}", r.runs.iter().map(|x| (x.eps, x.dist_wdot)).collect::<Vec<_>>()))?;
    ensure(r.interpolation_holds(), || "X interpolation fails on some run".into())?;
    let worst = r.runs.iter().map(|x| x.interpolation.ratio).fold(0.0, f64::max);
    Ok(format!(
        "Wdot distances {}; max interpolation ratio {worst:.3}",
        r.runs.iter().map(|x| format!("{:.2e}", x.dist_wdot)).collect::<Vec<_>>().join(", ")
    ))
}

const HARNESS_CONFIG: &str = r#"
kind = "montecarlo"
seed = 21
d_param = 2.0
distribution = "rademacher"

[grid]
dim = 2
box_length = 8.0
points = 16

[datum]
shape = "gaussian"

[truncation]
k_max = 6
j_radius = 4.0
tolerance = 5e-3

[montecarlo]
trials = 32
s = 0.0
q = 4.0
p = 4.0
p0 = 4.0
window = [0.0, 0.5]
snapshots = 5
"#;

fn harness_determinism() -> Outcome {
    let config = ExperimentConfig::parse(HARNESS_CONFIG).map_err(e)?;
    let tmp = tempfile::TempDir::new().map_err(e)?;
    let mut outputs = Vec::new();
    for (tag, workers) in [("a", 1), ("b", 1), ("c", 4), ("d", 8)] {
        let opts = RunOptions {
            base_dir: tmp.path().to_path_buf(),
            out: tmp.path().join(tag),
            workers,
            check: true,
        };
        let o = run(&config, &opts).map_err(e)?;
        ensure(o.manifest.passed, || format!("run {tag} failed its checks"))?;
        outputs.push(o.manifest.artifacts);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "artifact hashes differ between runs".into())?;
    let radial = evolve_roundtrip()?;
    Ok(format!("{} artifacts byte-identical across 4 runs with 1/1/4/8 workers; {radial}", outputs[0].len()))
}

/// A stored trajectory read back reproduces its source bit for bit.
fn evolve_roundtrip() -> Result<String, String> {
    let g = Grid::new(1, 16.0, 64).map_err(e)?;
    let reg = RegularizedNonlinearity::new(2, 3.0).map_err(e)?;
    let u = evolve(&gaussian(g, 1.0, 1.0, [0.0; 3], [0.0; 3]), &reg, 0.0, 0.1, 1e-3).map_err(e)?;
    let t = Trajectory::uniform(0.0, 0.1, vec![u.clone(), u]).map_err(e)?;
    let mut buf = Vec::new();
    t.write_binary(&mut buf).map_err(e)?;
    let back = Trajectory::read_binary(&mut buf.as_slice()).map_err(e)?;
    let same = back.states().iter().zip(t.states()).all(|(a, b)| a.values() == b.values());
    ensure(same && back.times() == t.times(), || "trajectory round trip".into())?;
    Ok("trajectory container round-trips exactly".into())
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 11] = [
        ("partition and reconstruction", 10.0, partition_reconstruction),
        ("Fourier-Bessel transforms", 30.0, fourier_bessel_suite),
        ("randomization bookkeeping and H^s ratio", 120.0, randomization_suite),
        ("Khintchine large deviation ratio", 60.0, khintchine_suite),
        ("solver conservation", 300.0, solver_conservation),
        ("regularization consistency", 300.0, regularization_consistency),
        ("energy increment audit", 300.0, energy_audit),
        ("admissibility and gain arithmetic", 1.0, admissibility_and_gain),
        ("Strichartz statistics", 600.0, strichartz_statistics),
        ("perturbation experiment", 300.0, perturbation),
        ("harness determinism", 60.0, harness_determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failures = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match result {
            Ok(d) if secs <= *limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; exceeded {limit} s budget")),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("criterion {n:2} {status} [{secs:7.2} s / {limit} s] {name}: {detail}");
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
