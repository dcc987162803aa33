//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p aerocell-cli --test acceptance`.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use aerocell_cli::{run_with_threads, ASSOCIATION_CSV, SNR_CDF_CSV, SUMRATE_CDF_CSV};
use aerocell_core::antenna::{mrt_weights, norm_sqr, BeamWeights};
use aerocell_core::channel::{los_probability, pathloss_db};
use aerocell_core::link::{noma_pair_rates, oma_pair_rates};
use aerocell_core::{
    ecdf, percentile, run_cnc, run_shared, ArrayGeometry, ArrayMode, CncResult, ExperimentConfig,
    NetworkLayout, SharedResult,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const CNC_DROPS: usize = 10_000;
const SHARED_DROPS: usize = 2_000;
const UAV_XY: (f64, f64) = (250.0, 100.0);

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn p(samples: &[f64], q: f64) -> f64 {
    percentile(samples, q).expect("non-empty sample")
}

struct Runs {
    cnc_fixed: CncResult,
    cnc_bf3d: CncResult,
    shared_fixed: SharedResult,
    shared_bf3d: SharedResult,
}

impl Runs {
    fn cnc(&self, mode: ArrayMode) -> &CncResult {
        match mode {
            ArrayMode::Fixed => &self.cnc_fixed,
            ArrayMode::Bf3d => &self.cnc_bf3d,
        }
    }

    fn shared(&self, mode: ArrayMode) -> &SharedResult {
        match mode {
            ArrayMode::Fixed => &self.shared_fixed,
            ArrayMode::Bf3d => &self.shared_bf3d,
        }
    }
}

fn snr_at(result: &CncResult, altitude: f64) -> &[f64] {
    &result
        .per_altitude
        .iter()
        .find(|a| a.altitude_m == altitude)
        .expect("altitude in sweep")
        .snr_db
}

fn rates_mbps(result: &SharedResult, n_uav: usize) -> Vec<f64> {
    result
        .per_n_uav
        .iter()
        .find(|g| g.n_uav == n_uav)
        .expect("n_uav in sweep")
        .sum_rate_bps
        .iter()
        .map(|r| r / 1e6)
        .collect()
}

fn near3_share(result: &CncResult, altitude: f64) -> f64 {
    let layout = ExperimentConfig::cnc().layout().unwrap();
    let near = layout.nearest_facing_cells(UAV_XY.0, UAV_XY.1, 3);
    let alt = result
        .per_altitude
        .iter()
        .find(|a| a.altitude_m == altitude)
        .expect("altitude in sweep");
    near.iter().map(|id| alt.association[id - 1]).sum()
}

fn layout() -> Outcome {
    let l = NetworkLayout::hexagonal(500.0, 25.0, 2, ArrayGeometry::ula_8x1())
        .map_err(|e| e.to_string())?;
    let mut min = f64::INFINITY;
    for (i, a) in l.sites.iter().enumerate() {
        for b in &l.sites[i + 1..] {
            min = min.min((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    check(
        l.sites.len() == 19 && l.num_cells() == 57 && (min - 500.0).abs() < 1e-9,
        format!(
            "{} sites, {} cells, min spacing {min:.6} m",
            l.sites.len(),
            l.num_cells()
        ),
    )
}

fn channel_golden() -> Outcome {
    let d2 = |d3: f64, h: f64| (d3 * d3 - (h - 25.0).powi(2)).sqrt();
    let pl =
        |d3: f64, h: f64, fc: f64, los: bool| pathloss_db(d2(d3, h), d3, h, 25.0, fc, los).unwrap();
    let got = [
        pl(200.0, 90.0, 2.0, true),
        pl(200.0, 90.0, 5.0, true),
        pl(300.0, 90.0, 2.0, false),
    ];
    let expected = [84.64, 92.60, 101.03];
    let plos = los_probability(500.0, 90.0).map_err(|e| e.to_string())?;
    let ok = got.iter().zip(expected).all(|(g, e)| (g - e).abs() <= 0.01)
        && (plos - 0.938).abs() <= 0.001;
    check(
        ok,
        format!(
            "PL = {:.3} / {:.3} / {:.3} dB, P_LoS(500 m, 90 m) = {plos:.4}",
            got[0], got[1], got[2]
        ),
    )
}

fn fixed_high_far(r: &Runs) -> Outcome {
    let s = near3_share(&r.cnc_fixed, 200.0);
    check(
        s < 0.5,
        format!("nearest-3 share at 200 m = {s:.4} (need < 0.5)"),
    )
}

fn fixed_ground_near(r: &Runs) -> Outcome {
    let s = near3_share(&r.cnc_fixed, 1.5);
    check(
        s > 0.8,
        format!("nearest-3 share at 1.5 m = {s:.4} (need > 0.8)"),
    )
}

fn bf3d_high_near(r: &Runs) -> Outcome {
    let s = near3_share(&r.cnc_bf3d, 200.0);
    check(
        s >= 0.9,
        format!("nearest-3 share at 200 m = {s:.4} (need >= 0.9)"),
    )
}

fn fixed_p5_gap(r: &Runs) -> Outcome {
    let gap = p(snr_at(&r.cnc_fixed, 200.0), 5.0) - p(snr_at(&r.cnc_fixed, 1.5), 5.0);
    check(
        (6.0..=14.0).contains(&gap),
        format!("p5(200 m) - p5(1.5 m) = {gap:.2} dB (need 6..14)"),
    )
}

fn snr_orderings(r: &Runs) -> Outcome {
    let alts = [1.5, 90.0, 200.0];
    let mut detail = Vec::new();
    let mut ok = true;
    for mode in [ArrayMode::Fixed, ArrayMode::Bf3d] {
        let spread: Vec<f64> = alts
            .iter()
            .map(|&h| p(snr_at(r.cnc(mode), h), 95.0) - p(snr_at(r.cnc(mode), h), 5.0))
            .collect();
        ok &= spread.windows(2).all(|w| w[0] > w[1]);
        detail.push(format!(
            "{mode} spread {:.2}/{:.2}/{:.2}",
            spread[0], spread[1], spread[2]
        ));
    }
    let gain: Vec<f64> = alts
        .iter()
        .map(|&h| p(snr_at(&r.cnc_bf3d, h), 5.0) - p(snr_at(&r.cnc_fixed, h), 5.0))
        .collect();
    ok &= gain.iter().all(|g| *g >= 0.0) && gain[2] >= gain[0];
    detail.push(format!(
        "bf3d p5 gain {:.2}/{:.2}/{:.2} dB",
        gain[0], gain[1], gain[2]
    ));
    check(ok, detail.join(", "))
}

fn sumrate_p5(r: &Runs) -> Outcome {
    let fixed = p(&rates_mbps(&r.shared_fixed, 10), 5.0);
    let bf3d = p(&rates_mbps(&r.shared_bf3d, 10), 5.0);
    check(
        bf3d >= 2.0 * fixed && (15.0..=60.0).contains(&fixed),
        format!(
            "n_uav = 10 p5: fixed {fixed:.2} Mbps, bf3d {bf3d:.2} Mbps (ratio {:.2})",
            bf3d / fixed
        ),
    )
}

fn sumrate_orderings(r: &Runs) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for mode in [ArrayMode::Fixed, ArrayMode::Bf3d] {
        let stats: Vec<(f64, f64)> = [0, 5, 10]
            .iter()
            .map(|&n| {
                let v = rates_mbps(r.shared(mode), n);
                (p(&v, 50.0), p(&v, 5.0))
            })
            .collect();
        ok &= stats
            .windows(2)
            .all(|w| w[1].0 <= w[0].0 && w[1].1 <= w[0].1);
        detail.push(format!(
            "{mode} median {:.1}/{:.1}/{:.1}, p5 {:.1}/{:.1}/{:.1}",
            stats[0].0, stats[1].0, stats[2].0, stats[0].1, stats[1].1, stats[2].1
        ));
    }
    check(ok, detail.join("; "))
}

fn complex_normal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn mrt_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let h = complex_normal(&mut rng, 32);
        let best = mrt_weights(&h).map_err(|e| e.to_string())?.gain(&h);
        for _ in 0..1000 {
            let w =
                BeamWeights::normalized(complex_normal(&mut rng, 32)).map_err(|e| e.to_string())?;
            worst = worst.max(w.gain(&h) / best);
        }
        if (best - norm_sqr(&h)).abs() > 1e-9 * norm_sqr(&h) {
            return Err(format!(
                "MRT gain {best} differs from |h|^2 {}",
                norm_sqr(&h)
            ));
        }
    }
    check(
        worst <= 1.0 + 1e-12,
        format!("best competitor reached {worst:.6} of the MRT gain over 10^6 trials"),
    )
}

fn noma_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut max_err = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for _ in 0..10_000 {
        let s1 = 10f64.powf(rng.random_range(-3.0..4.0));
        let s2 = 10f64.powf(rng.random_range(-3.0..4.0));
        let (a, b) = noma_pair_rates(s1, s2, 1.0).map_err(|e| e.to_string())?;
        let (c, d) = oma_pair_rates(s1, s2, 1.0).map_err(|e| e.to_string())?;
        max_err = max_err.max((a + b - (1.0 + s1 + s2).log2()).abs());
        min_margin = min_margin.min((a + b) - (c + d));
    }
    check(
        max_err <= 1e-12 && min_margin >= 0.0,
        format!(
            "max |sum - log2(1+s1+s2)| = {max_err:.2e}, min NOMA - OMA = {min_margin:.3e} bit/s/Hz"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("aerocell-acceptance-{}", std::process::id()));
    let configs = [
        ExperimentConfig::cnc()
            .with_mode(ArrayMode::Bf3d)
            .with_drops(500)
            .with_seed(11),
        ExperimentConfig::cnc()
            .with_mode(ArrayMode::Fixed)
            .with_drops(500)
            .with_seed(11),
        ExperimentConfig::shared()
            .with_mode(ArrayMode::Bf3d)
            .with_drops(60)
            .with_seed(11),
        ExperimentConfig::shared()
            .with_mode(ArrayMode::Fixed)
            .with_drops(60)
            .with_seed(11),
    ];
    // At least 8 workers so the parallel path is exercised on small machines.
    let max_threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .max(8);
    let mut compared = 0;
    for (i, cfg) in configs.iter().enumerate() {
        let one = dir.join(format!("{i}-one"));
        let many = dir.join(format!("{i}-many"));
        run_with_threads(cfg, &one, 1).map_err(|e| e.to_string())?;
        run_with_threads(cfg, &many, max_threads).map_err(|e| e.to_string())?;
        for f in [ASSOCIATION_CSV, SNR_CDF_CSV, SUMRATE_CDF_CSV] {
            let (a, b) = (one.join(f), many.join(f));
            if !a.exists() {
                continue;
            }
            if fs::read(&a).map_err(|e| e.to_string())?
                != fs::read(&b).map_err(|e| e.to_string())?
            {
                return Err(format!("{f} differs between 1 and {max_threads} threads"));
            }
            compared += 1;
        }
    }
    let _ = fs::remove_dir_all(&dir);
    check(
        true,
        format!("{compared} CSVs byte-identical with 1 vs {max_threads} threads"),
    )
}

fn statistical_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let u: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let mut prev = 0.0;
    let mut ks = 0.0f64;
    for (x, c) in ecdf(&u).map_err(|e| e.to_string())? {
        ks = ks.max((c - x).abs()).max((prev - x).abs());
        prev = c;
    }
    let z: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
    let p5 = p(&z, 5.0);
    check(
        ks < 0.03 && (p5 + 1.645).abs() <= 0.03,
        format!("uniform KS = {ks:.4}, normal p5 = {p5:.4}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cnc = |mode| {
        run_cnc(
            &ExperimentConfig::cnc()
                .with_mode(mode)
                .with_drops(CNC_DROPS),
        )
        .unwrap()
    };
    let shared = |mode| {
        run_shared(
            &ExperimentConfig::shared()
                .with_mode(mode)
                .with_drops(SHARED_DROPS),
        )
        .unwrap()
    };
    let runs = Runs {
        cnc_fixed: cnc(ArrayMode::Fixed),
        cnc_bf3d: cnc(ArrayMode::Bf3d),
        shared_fixed: shared(ArrayMode::Fixed),
        shared_bf3d: shared(ArrayMode::Bf3d),
    };
    println!(
        "simulations finished in {:.1} s",
        start.elapsed().as_secs_f64()
    );

    let criteria: Vec<Criterion> = vec![
        ("layout", Box::new(layout)),
        ("channel golden values", Box::new(channel_golden)),
        (
            "association, fixed, 200 m far from UAV",
            Box::new(|| fixed_high_far(&runs)),
        ),
        (
            "association, fixed, 1.5 m near UAV",
            Box::new(|| fixed_ground_near(&runs)),
        ),
        (
            "association, bf3d, 200 m near UAV",
            Box::new(|| bf3d_high_near(&runs)),
        ),
        ("SNR p5 gap, fixed", Box::new(|| fixed_p5_gap(&runs))),
        ("SNR orderings", Box::new(|| snr_orderings(&runs))),
        ("sum rate p5, n_uav = 10", Box::new(|| sumrate_p5(&runs))),
        ("sum rate orderings", Box::new(|| sumrate_orderings(&runs))),
        ("MRT optimality", Box::new(mrt_optimality)),
        ("NOMA identities", Box::new(noma_identities)),
        ("determinism across thread counts", Box::new(determinism)),
        ("statistical sanity", Box::new(statistical_sanity)),
    ];

    let mut failed = 0;
    for (name, f) in &criteria {
        match f() {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!(
        "{} passed, {failed} failed ({:.1} s)",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
