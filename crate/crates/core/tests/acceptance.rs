//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. The experiment-scale checks take tens of minutes on one core.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use explore_core::episode::CoverageCeiling;
use explore_core::frontier::{detect_frontiers, window_filter, Window};
use explore_core::grid::Dims;
use explore_core::harness::{self, ClutterPlan, Condition, EnvSource, ExperimentResult, ExperimentSpec, Sweep};
use explore_core::mapping::Sensor;
use explore_core::nav::{clearance_field, distance_field, extract_path, known_free_field};
use explore_core::planners::{
    estimate_gain, plan_distance_advantage, plan_nearest_frontier, GainMode, InfoGainPlanner, PlanError,
};
use explore_core::world::{add_clutter, ClutterSpec, DEFAULT_CLUTTER_DENSITY};
use explore_core::{generate_env, predict, run_episode, EnvKind, EpisodeConfig, GroundTruth, PlannerConfig, PredictionRange};
use rand::Rng;

const KINDS: [EnvKind; 3] = [EnvKind::Office, EnvKind::Cave, EnvKind::Maze];
const OFFICE_SEED: u64 = 1;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn distance_fields() -> Outcome {
    let clock = Instant::now();
    let mut rng = common::rng(1001);
    let mut grids = 0;
    while grids < 200 {
        let dims = Dims::new(rng.gen_range(1..=30), rng.gen_range(1..=30));
        let density = rng.gen_range(0.0..0.5);
        let blocked = common::random_blocked(&mut rng, dims, density);
        let free: Vec<usize> = (0..dims.len()).filter(|&c| !blocked[c]).collect();
        if free.is_empty() {
            continue;
        }
        let sources: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| free[rng.gen_range(0..free.len())]).collect();
        let passable = |c: usize| !blocked[c];
        let field = distance_field(dims, 0.25, &passable, &sources).map_err(|e| e.to_string())?;
        if field.distances() != &common::relax(dims, 0.25, &passable, &sources)[..] {
            return Err(format!("grid {grids} ({}x{}) differs", dims.width, dims.height));
        }
        grids += 1;
    }
    let secs = clock.elapsed().as_secs_f64();
    check(secs < 10.0, format!("{grids} grids equal, {secs:.2} s"))
}

fn advantage_oracle() -> Outcome {
    let clock = Instant::now();
    let mut rng = common::rng(1002);
    let (mut maps, mut seed) = (0, 0u64);
    while maps < 30 {
        seed += 1;
        let side = rng.gen_range(40..=60);
        let world = generate_env(KINDS[seed as usize % 3], side, side, 1000 + seed).map_err(|e| e.to_string())?;
        let sensor = Sensor::default_for(world.cell_size());
        let steps = rng.gen_range(0..120);
        let (map, pos) = common::random_walk_state(&world, &sensor, world.starts()[0], steps, &mut rng);
        let frontiers = detect_frontiers(&map);
        let known = known_free_field(&map, pos).unwrap();
        if !frontiers.cells.iter().any(|&f| known.is_reachable(f)) {
            continue;
        }
        let window_m = [4.0, 8.0, 30.0][rng.gen_range(0..3)];
        let c_p = [PredictionRange::Cells(0), PredictionRange::Cells(2), PredictionRange::Unlimited][rng.gen_range(0..3)];
        let planning = predict(&map, &frontiers, &world, pos, window_m, c_p).map_err(|e| e.to_string())?;
        let (inside, outside) = window_filter(&frontiers, world.dims(), world.cell_size(), pos, window_m);
        let (decision, _) =
            plan_distance_advantage(&planning, pos, &inside, &outside, &known).map_err(|e| e.to_string())?;
        let window = Window::new(world.dims(), world.cell_size(), pos, window_m);
        let (target, fallback) = common::advantage_oracle(&planning, &window, pos, &inside, &outside, &known);
        if (decision.target, decision.used_fallback) != (target, fallback) {
            return Err(format!("map {maps}: target {} vs {target}", decision.target));
        }
        maps += 1;
    }
    let secs = clock.elapsed().as_secs_f64();
    check(secs < 30.0, format!("{maps} maps match, {secs:.2} s"))
}

fn zero_weight_identity() -> Outcome {
    let mut rng = common::rng(1003);
    let mut decisions = 0;
    let mut seed = 0;
    while decisions < 500 {
        seed += 1;
        let world = generate_env(KINDS[seed as usize % 3], 60, 60, 2000 + seed).map_err(|e| e.to_string())?;
        let sensor = Sensor::default_for(world.cell_size());
        for mode in [GainMode::Naive, GainMode::True] {
            let mut planner = InfoGainPlanner::new(world.dims(), mode);
            let steps = rng.gen_range(0..150);
            let (mut map, mut pos) = common::random_walk_state(&world, &sensor, world.starts()[0], steps, &mut rng);
            for _ in 0..15 {
                let frontiers = detect_frontiers(&map);
                let field = known_free_field(&map, pos).unwrap();
                let clearance = clearance_field(&map);
                let nf = match plan_nearest_frontier(&field, &frontiers) {
                    Err(PlanError::NoReachableFrontier) => break,
                    r => r.map_err(|e| e.to_string())?,
                };
                let ig = planner
                    .plan(&map, &world, &sensor, &field, &clearance, &frontiers, 0.0)
                    .map_err(|e| e.to_string())?;
                if ig.target != nf.target {
                    return Err(format!("decision {decisions}: {} vs {}", ig.target, nf.target));
                }
                decisions += 1;
                let path = extract_path(&field, nf.target, &clearance).unwrap();
                for &c in &path.cells[1..] {
                    pos = c;
                    let delta = sensor.integrate(&mut map, &sensor.cast(&world, pos).unwrap(), &world).unwrap();
                    planner.cache.observe(&delta, &sensor);
                    if !delta.is_empty() {
                        break;
                    }
                }
            }
        }
    }
    Ok(format!("{decisions} decisions identical"))
}

fn gain_bound() -> Outcome {
    let mut rng = common::rng(1004);
    let mut pairs = 0;
    let mut strict = 0;
    let mut seed = 0;
    while pairs < 100 {
        seed += 1;
        let world = generate_env(KINDS[seed as usize % 3], 60, 60, 3000 + seed).map_err(|e| e.to_string())?;
        let sensor = Sensor::default_for(world.cell_size());
        let steps = rng.gen_range(0..150);
        let (map, pos) = common::random_walk_state(&world, &sensor, world.starts()[0], steps, &mut rng);
        let field = known_free_field(&map, pos).unwrap();
        let clearance = clearance_field(&map);
        let reachable: Vec<_> = (0..map.dims().len()).filter(|&c| field.is_reachable(c)).collect();
        for _ in 0..5 {
            let goal = reachable[rng.gen_range(0..reachable.len())];
            let path = extract_path(&field, goal, &clearance).unwrap();
            let naive = estimate_gain(&map, &world, &path.cells, GainMode::Naive, &sensor).map_err(|e| e.to_string())?;
            let truth = estimate_gain(&map, &world, &path.cells, GainMode::True, &sensor).map_err(|e| e.to_string())?;
            if naive.cells_gained < truth.cells_gained {
                return Err(format!("pair {pairs}: naive {} < true {}", naive.cells_gained, truth.cells_gained));
            }
            strict += (naive.cells_gained > truth.cells_gained) as usize;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs, naive strictly larger on {strict}"))
}

/// Checks a finished episode against the reachable-area oracle.
fn complete(world: &GroundTruth, log: &explore_core::EpisodeLog) -> Result<(), String> {
    let map = log.final_map.as_ref().ok_or("no final map")?;
    let field = known_free_field(map, *log.trajectory.last().unwrap()).map_err(|e| e.to_string())?;
    if detect_frontiers(map).cells.iter().any(|&f| field.is_reachable(f)) {
        return Err("reachable frontier left".into());
    }
    let expected = CoverageCeiling::new(world, log.start).check(map)?;
    if expected != log.final_coverage {
        return Err(format!("coverage {} vs oracle {expected}", log.final_coverage));
    }
    Ok(())
}

struct Completion {
    episodes: usize,
    failures: Vec<String>,
}

impl Completion {
    fn record(&mut self, what: &str, world: &GroundTruth, log: &explore_core::EpisodeLog) {
        self.episodes += 1;
        if let Err(e) = complete(world, log) {
            self.failures.push(format!("{what}: {e}"));
        }
    }

    fn experiment(&mut self, world: &GroundTruth, result: &ExperimentResult) {
        for r in &result.records {
            self.record(&r.run_id, world, &r.log);
        }
    }
}

fn safe_episodes(done: &mut Completion) -> Outcome {
    let planners = [
        PlannerConfig::nf(),
        PlannerConfig::ig(1.0, GainMode::Naive),
        PlannerConfig::ig(1.0, GainMode::True),
        PlannerConfig::da(PredictionRange::Unlimited),
        PlannerConfig::da(PredictionRange::Cells(2)),
    ];
    let mut cells = 0;
    for i in 0..30 {
        let world = generate_env(KINDS[i % 3], 100, 100, 4000 + i as u64).map_err(|e| e.to_string())?;
        let start = world.starts()[i % world.starts().len()];
        let cfg = EpisodeConfig::new(planners[i % planners.len()]).verified();
        let log = run_episode(&world, start, &cfg, None, i as u64).map_err(|e| format!("episode {i}: {e}"))?;
        let bad = log.final_map.as_ref().unwrap().contradictions(&world).len();
        let occupied = log.trajectory.iter().filter(|&&c| !world.is_free(c)).count();
        if bad + occupied > 0 {
            return Err(format!("episode {i}: {bad} contradictions, {occupied} occupied cells"));
        }
        cells += log.trajectory.len();
        done.record(&format!("episode {i}"), &world, &log);
    }
    Ok(format!("30 episodes, {cells} executed cells, map checked after every scan"))
}

fn office() -> (EnvSource, GroundTruth) {
    let env = EnvSource::Generated {
        kind: EnvKind::Office,
        width: 200,
        height: 200,
        seed: OFFICE_SEED,
    };
    let world = env.load().expect("office world");
    (env, world)
}

fn spec(methods: Vec<PlannerConfig>) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(office().0, methods);
    s.starts = 10;
    s.master_seed = OFFICE_SEED;
    s
}

const NF: &str = "NF";
const IG: &str = "IG/NAIVE/lambda=1";
const DA: &str = "DA/cp=inf/window=30";

fn mean(v: &[f64]) -> f64 {
    harness::mean_std(v).0
}

fn ordering(r: &ExperimentResult, secs: f64) -> Outcome {
    let (nf, ig, da) = (r.d_t(NF, "none"), r.d_t(IG, "none"), r.d_t(DA, "none"));
    let (m_nf, m_ig, m_da) = (mean(&nf), mean(&ig), mean(&da));
    let wins = da.iter().zip(&nf).filter(|(d, n)| d < n).count();
    let (rel_da, rel_ig) = (100.0 * (m_da / m_nf - 1.0), 100.0 * (m_ig / m_nf - 1.0));
    let ok = m_da < m_nf && m_nf < m_ig && wins >= 8 && (rel_da + 16.0).abs() <= 15.0 && (rel_ig - 23.0).abs() <= 15.0;
    check(
        ok,
        format!(
            "mean d_T DA {m_da:.1} / NF {m_nf:.1} / IG {m_ig:.1} m, DA {rel_da:+.1}% IG {rel_ig:+.1}% vs NF, DA wins {wins}/10, {:.1} min",
            secs / 60.0
        ),
    )
}

fn lambda_sweep(base: &ExperimentResult, sweep: &ExperimentResult) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for mode in ["NAIVE", "TRUE"] {
        let at = |l: f64| {
            let label = format!("IG/{mode}/lambda={l}");
            let v = if mode == "NAIVE" && l == 1.0 { base.d_t(&label, "none") } else { sweep.d_t(&label, "none") };
            mean(&v)
        };
        let means: Vec<f64> = [-2.0, 0.0, 1.0, 2.0, 4.0].into_iter().map(at).collect();
        ok &= means[1..].windows(2).all(|w| w[0] <= w[1]);
        ok &= means[0] <= means[1] * 1.02;
        detail.push(format!(
            "{mode} {}",
            means.iter().map(|m| format!("{m:.1}")).collect::<Vec<_>>().join("/")
        ));
    }
    check(ok, format!("mean d_T at lambda -2/0/1/2/4: {}", detail.join(", ")))
}

fn frontier_debt(r: &ExperimentResult) -> Outcome {
    let curve = |m: &str| r.summary.curves.iter().find(|c| c.method == m).expect("curve");
    let nf = curve(NF);
    let half = 0.5 * nf.coverage_mean.last().unwrap();
    let i = nf.coverage_mean.iter().position(|&c| c >= half).unwrap();
    let f = |m: &str| {
        let c = curve(m);
        c.frontier_mean[i.min(c.frontier_mean.len() - 1)]
    };
    let (f_nf, f_ig, f_da) = (f(NF), f(IG), f(DA));
    check(
        f_da < f_nf && f_nf < f_ig && f_nf >= 1.5 * f_da,
        format!(
            "at {:.0} m: frontier cells DA {f_da:.0} / NF {f_nf:.0} / IG {f_ig:.0}, NF/DA {:.2}",
            i as f64 * nf.step_m,
            f_nf / f_da
        ),
    )
}

fn cp_sweep(base: &ExperimentResult, sweep: &ExperimentResult) -> Outcome {
    let da0 = mean(&sweep.d_t("DA/cp=0/window=30", "cp=0"));
    let da2 = mean(&sweep.d_t("DA/cp=2/window=30", "cp=2"));
    let nf = base.d_t(NF, "none");
    let nf_same = ["cp=0", "cp=2"].iter().all(|p| sweep.d_t(NF, p) == nf);
    let rows_same = {
        let a = sweep.summary.row(NF, "cp=0").unwrap();
        let b = sweep.summary.row(NF, "cp=2").unwrap();
        (a.mean_dt_m, a.std_dt_m, a.n) == (b.mean_dt_m, b.std_dt_m, b.n)
    };
    check(
        da2 <= da0 && nf_same && rows_same,
        format!(
            "DA mean d_T cp=0 {da0:.1}, cp=2 {da2:.1}, cp=inf {:.1} m; NF identical across cp: {}",
            mean(&base.d_t(DA, "none")),
            nf_same && rows_same
        ),
    )
}

fn clutter(r: &ExperimentResult) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for m in [NF, IG, DA] {
        let clean = mean(&r.d_t(m, Condition::CleanClean.label()));
        let (nc, nc_std) = harness::mean_std(&r.d_t(m, Condition::NoiseClean.label()));
        let nn = mean(&r.d_t(m, Condition::NoiseNoise.label()));
        ok &= nc > clean && nn > clean && (nc - nn).abs() < nc_std;
        detail.push(format!("{} {clean:.1}/{nc:.1}/{nn:.1} (std {nc_std:.1})", m.split('/').next().unwrap()));
    }
    check(ok, format!("clean/clean, noise/clean, noise/noise mean d_T: {}", detail.join(", ")))
}

fn determinism() -> Outcome {
    let csv = |s: &ExperimentSpec, jobs| {
        let r = harness::run_experiment(s, jobs).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        harness::write_runs_csv(&r.records, &mut buf).map_err(|e| e.to_string())?;
        Ok::<_, String>(buf)
    };
    let mut s = ExperimentSpec::new(
        EnvSource::Generated {
            kind: EnvKind::Office,
            width: 90,
            height: 90,
            seed: 7,
        },
        vec![PlannerConfig::nf(), PlannerConfig::ig(1.0, GainMode::Naive), PlannerConfig::da(PredictionRange::Cells(2))],
    );
    s.starts = 3;
    s.master_seed = 7;
    let mut bytes = 0;
    for sweep in [Sweep::None, Sweep::Clutter(ClutterPlan { count: 15, size: 1.0 })] {
        s.sweep = sweep;
        let a = csv(&s, 1)?;
        for jobs in [1, 2, 4] {
            if csv(&s, jobs)? != a {
                return Err(format!("CSV differs at {jobs} jobs"));
            }
        }
        bytes += a.len();
    }
    Ok(format!("identical CSV ({bytes} bytes) at 1, 2 and 4 jobs, with and without clutter"))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match &outcome {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => println!("FAIL  {name}: {d}"),
        }
        results.push((name, outcome));
    };
    let mut done = Completion {
        episodes: 0,
        failures: Vec::new(),
    };
    let expect = |r: Result<ExperimentResult, harness::HarnessError>| r.expect("experiment runs");

    run("distance fields equal relaxation", &mut distance_fields);
    run("distance advantage equals direct evaluation", &mut advantage_oracle);
    run("zero gain weight reduces to nearest frontier", &mut zero_weight_identity);
    run("naive gain bounds true gain", &mut gain_bound);
    run("episodes are conservative and collision free", &mut || safe_episodes(&mut done));

    let (_, world) = office();
    let clock = Instant::now();
    let base = expect(harness::run_experiment(
        &spec(vec![
            PlannerConfig::nf(),
            PlannerConfig::ig(1.0, GainMode::Naive),
            PlannerConfig::da(PredictionRange::Unlimited),
        ]),
        1,
    ));
    let secs = clock.elapsed().as_secs_f64();
    done.experiment(&world, &base);
    run("planner ordering on office worlds", &mut || ordering(&base, secs));

    let lambda_methods = [(-2.0, GainMode::Naive), (0.0, GainMode::Naive), (2.0, GainMode::Naive), (4.0, GainMode::Naive)]
        .into_iter()
        .chain([-2.0, 0.0, 1.0, 2.0, 4.0].map(|l| (l, GainMode::True)))
        .map(|(l, g)| PlannerConfig::ig(l, g))
        .collect();
    let lambdas = expect(harness::run_experiment(&spec(lambda_methods), 1));
    done.experiment(&world, &lambdas);
    run("gain weight sweep", &mut || lambda_sweep(&base, &lambdas));

    run("frontier debt", &mut || frontier_debt(&base));

    let mut cp_spec = spec(vec![PlannerConfig::nf(), PlannerConfig::da(PredictionRange::Cells(0))]);
    cp_spec.sweep = Sweep::Cp(vec![PredictionRange::Cells(0), PredictionRange::Cells(2)]);
    let cps = expect(harness::run_experiment(&cp_spec, 1));
    done.experiment(&world, &cps);
    run("prediction range sweep", &mut || cp_sweep(&base, &cps));

    let plan = ClutterPlan {
        count: ClutterSpec::count_for_density(&world, DEFAULT_CLUTTER_DENSITY, 1.0),
        size: 1.0,
    };
    let three = vec![
        PlannerConfig::nf(),
        PlannerConfig::ig(1.0, GainMode::Naive),
        PlannerConfig::da(PredictionRange::Unlimited),
    ];
    let cluttered = expect(harness::clutter_matrix(&spec(three), plan, 1));
    for r in &cluttered.records {
        let env = match r.sweep.as_str() {
            "clean/clean" => world.clone(),
            _ => {
                let (seed, _) = harness::clutter_seeds(OFFICE_SEED, r.start_idx);
                add_clutter(&world, &ClutterSpec { count: plan.count, size: plan.size, seed }).unwrap()
            }
        };
        done.record(&r.run_id, &env, &r.log);
    }
    run("clutter matrix", &mut || clutter(&cluttered));

    run("episodes end complete", &mut || {
        check(
            done.failures.is_empty(),
            format!("{} episodes checked; {}", done.episodes, done.failures.first().map_or("all complete", |s| s.as_str())),
        )
    });
    run("byte-identical output at any parallelism", &mut determinism);

    let failed = results.iter().filter(|(_, r)| r.is_err()).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
