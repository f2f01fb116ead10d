//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tacit::agent::ScriptedPolicy;
use tacit::bargaining::{
    enumerate_bargaining_nash, score_joint, session_metrics, strategy_cooperative, strategy_greedy,
    Assignment, BargainingBoard, BargainingVariant, Coord, Disc, PayoffLostMode, Player,
    StrategyKind,
};
use tacit::focal::{
    orbit_partition, select_focal, softmax_distribution, FocalError, Permutation,
    SalienceAssignment,
};
use tacit::game::{ChoiceTally, NormalFormGame};
use tacit::runner::{
    run_bargaining_experiment, run_task_experiment, AgentBinding, AgentSpec,
    BargainingExperimentConfig, RoleBinding, RunOptions, TaskExperimentConfig,
};
use tacit::tasks::{load_question_set, permute_options, render_prompt, PromptVariant, TaskVariant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn ci_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let m = rng.random_range(2..=8);
        let n = rng.random_range(2..=12);
        let mut counts = vec![0u64; m];
        for _ in 0..n {
            counts[rng.random_range(0..m)] += 1;
        }
        let t = ChoiceTally::from_counts(counts.clone());
        let ci = t.coordination_index().map_err(|e| e.to_string())?;
        let nci = t.normalized_ci().map_err(|e| e.to_string())?;
        let expected = ci_by_pairs(&counts);
        worst = worst.max((ci - expected).abs()).max((nci - m as f64 * expected).abs());
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    ensure(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("10000 tallies, max error {worst:e}, {:?}", start.elapsed()))
}

fn random_board(rng: &mut ChaCha8Rng, k: usize) -> BargainingBoard {
    let mut cells: Vec<u8> = (0..81).collect();
    cells.shuffle(rng);
    let at = |i: u8| Coord { row: i / 9 + 1, col: i % 9 + 1 };
    let discs = (0..k)
        .map(|i| Disc { value: f64::from(rng.random_range(1u8..=9)), pos: at(cells[2 + i]) })
        .collect();
    BargainingBoard::new(at(cells[0]), at(cells[1]), discs).unwrap()
}

fn nash_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    for g in 0..200 {
        let rows = rng.random_range(1..=20);
        let cols = rng.random_range(1..=200 / rows);
        let strategies = [rows, cols]
            .iter()
            .map(|&n| (0..n).map(|i| format!("s{i}")).collect())
            .collect();
        let game = NormalFormGame::from_fn(strategies, |_| {
            vec![f64::from(rng.random_range(-4i8..=4)), f64::from(rng.random_range(-4i8..=4))]
        })
        .map_err(|e| e.to_string())?;
        let found: BTreeSet<_> = game.enumerate_pure_nash().map_err(|e| e.to_string())?.into_iter().collect();
        ensure(found == brute_force_nash(&game), || format!("game {g} ({rows}x{cols}) differs"))?;
    }
    let mut boards = 0;
    for k in 1..=4 {
        for _ in 0..50 {
            let board = random_board(&mut rng, k);
            let found: BTreeSet<_> = enumerate_bargaining_nash(&board)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|(b, o)| (players_of(b), players_of(o)))
                .collect();
            let expected = brute_force_board_nash(&board);
            ensure(found.len() == 1 << k, || format!("k={k}: {} equilibria", found.len()))?;
            ensure(found == expected, || format!("k={k}: board equilibria differ"))?;
            boards += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("200 games, {boards} boards, {:?}", start.elapsed()))
}

fn game_one_ledger() -> Outcome {
    let board = game_one();
    let score = |b: &Assignment, o: &Assignment| score_joint(&board, b, o).map_err(|e| e.to_string());
    let all_blue = Assignment::uniform(5, Player::Blue);
    let both_blue = score(&all_blue, &all_blue)?;
    ensure((both_blue.blue_payoff, both_blue.orange_payoff) == (12.0, 0.0), || {
        format!("both blue gave {both_blue:?}")
    })?;

    let (gb, go) = (strategy_greedy(&board, Player::Blue), strategy_greedy(&board, Player::Orange));
    let greedy = score(&gb, &go)?;
    ensure((greedy.blue_payoff, greedy.orange_payoff) == (-2.4, -2.4), || {
        format!("greedy gave {greedy:?}")
    })?;
    let history = [(&board, &gb, &go)];
    let metrics = session_metrics(history).map_err(|e| e.to_string())?;
    let lost = metrics.payoff_lost(PayoffLostMode::Penalty);
    ensure(lost == 4.8, || format!("payoff lost {lost}"))?;
    ensure(metrics.missed_nash_iterations == 1, || "greedy pair not counted as missed".into())?;

    let (cb, co) = (strategy_cooperative(&board, Player::Blue), strategy_cooperative(&board, Player::Orange));
    let coop = score(&cb, &co)?;
    ensure((coop.blue_payoff, coop.orange_payoff) == (6.0, 6.0), || format!("cooperative gave {coop:?}"))?;
    ensure(coop.welfare() == 12.0 && coop.is_agreement(), || "cooperative pair conflicted".into())?;
    Ok("both-blue (12, 0), greedy (-2.4, -2.4) lost 4.8, cooperative (6, 6)".into())
}

fn softmax_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let betas: Vec<f64> = [0.0, 1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 500.0, 1000.0].to_vec();
    for case in 0..500 {
        let n = rng.random_range(2..=10);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let s = SalienceAssignment::new(0, scores.iter().copied().enumerate()).map_err(|e| e.to_string())?;
        let top = (0..n).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        let mut last_mass = 0.0;
        for &beta in &betas {
            let d = softmax_distribution(&s, beta).map_err(|e| e.to_string())?;
            let total: f64 = d.probabilities.values().sum();
            ensure((total - 1.0).abs() <= 1e-9, || format!("case {case}: sum {total} at beta {beta}"))?;
            if beta == 0.0 {
                let uniform = d.probabilities.values().all(|p| (p - 1.0 / n as f64).abs() <= 1e-12);
                ensure(uniform, || format!("case {case}: beta 0 not uniform"))?;
            }
            let mass = d.probability(&top);
            ensure(mass + 1e-12 >= last_mass, || format!("case {case}: argmax mass fell at beta {beta}"))?;
            last_mass = mass;
        }
        let base = select_focal(&s, 0.0, 0).map_err(|e| e.to_string())?;
        ensure(base == top, || format!("case {case}: argmax {base} != {top}"))?;
        for f in [|x: f64| 3.0 * x + 7.0, |x: f64| x.powi(3), |x: f64| (x + 1.0).ln()] {
            let mapped = s.map_scores(f).map_err(|e| e.to_string())?;
            ensure(select_focal(&mapped, 0.0, 0).map_err(|e| e.to_string())? == base, || {
                format!("case {case}: argmax moved under a monotone map")
            })?;
        }
    }
    Ok("500 score vectors, beta in [0, 1000]".into())
}

fn orbit_partitions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let n = rng.random_range(1..=64u32);
        let elements: BTreeSet<u32> = (0..n).collect();
        let generators: Vec<Permutation<u32>> = (0..rng.random_range(0..=4))
            .map(|_| {
                let mut images: Vec<u32> = (0..n).collect();
                // sparse permutations keep the orbit structure interesting
                let moved = rng.random_range(0..=n as usize);
                images[..moved].shuffle(&mut rng);
                let mut order: Vec<u32> = (0..n).collect();
                order.shuffle(&mut rng);
                Permutation::from_pairs(order.iter().zip(&images).map(|(&a, &b)| {
                    (a, order[b as usize])
                }))
            })
            .collect();
        let p = orbit_partition(&elements, &generators).map_err(|e| e.to_string())?;
        let covered: Vec<u32> = p.elements().copied().collect();
        ensure(covered.len() == n as usize, || format!("case {case}: orbits overlap or miss"))?;
        let got: BTreeSet<_> = p.orbits().iter().cloned().collect();
        let expected: BTreeSet<_> = orbits_by_search(&elements, &generators).into_iter().collect();
        ensure(got == expected, || format!("case {case}: orbits differ from search"))?;
    }
    let domain: BTreeSet<u32> = (1..=100).collect();
    let reflect = Permutation::from_fn(domain.iter(), |x| 101 - x);
    let p = orbit_partition(&domain, &[reflect]).map_err(|e| e.to_string())?;
    ensure(p.len() == 50 && p.orbits().iter().all(|o| o.len() == 2), || {
        format!("reflection gave {} orbits", p.len())
    })?;
    ensure(p.singletons().next().is_none(), || "reflection left a fixed point".into())?;
    Ok("100 generator sets, reflection of 1..100 gives 50 pairs".into())
}

fn ties_have_measure_zero() -> Outcome {
    let s = SalienceAssignment::new(0, [(0usize, 2.0), (1, 2.0), (2, 1.0)]).map_err(|e| e.to_string())?;
    let distinct = SalienceAssignment::new(0, (0..6usize).map(|i| (i, (i * 3 % 7) as f64)))
        .map_err(|e| e.to_string())?;
    for seed in 0..100_000u64 {
        if let Err(e) = select_focal(&distinct, 0.5, seed) {
            return Err(format!("distinct scores, seed {seed}: {e}"));
        }
    }
    let mut wins = [0u32; 3];
    for seed in 0..100_000u64 {
        match select_focal(&s, 0.5, seed) {
            Ok(e) => wins[e] += 1,
            Err(FocalError::AmbiguousFocal { .. }) => return Err(format!("seed {seed}: ambiguous")),
            Err(e) => return Err(e.to_string()),
        }
    }
    let share = f64::from(wins[0]) / f64::from(wins[0] + wins[1]);
    ensure(wins[2] == 0, || format!("dominated option won {} times", wins[2]))?;
    ensure((share - 0.5).abs() <= 0.02, || format!("tied share {share}"))?;
    // without noise the tie is reported rather than broken
    ensure(matches!(select_focal(&s, 0.0, 0), Err(FocalError::AmbiguousFocal { count: 2 })), || {
        "exact tie was broken silently".into()
    })?;
    Ok(format!("2 x 100000 draws, no ambiguity, tied share {share:.4}"))
}

fn prompt_goldens() -> Outcome {
    let questions = load_question_set(&fixture("questions_nottingham.json")).map_err(|e| e.to_string())?;
    let q = questions.iter().find(|q| q.id == "TN1").ok_or("TN1 missing")?;
    let mut checked = 0;
    for task in TaskVariant::ALL {
        for variant in PromptVariant::ALL {
            let name = format!("TN1_{}_{}.txt", task.as_str(), variant.as_str());
            let golden = std::fs::read_to_string(fixture("golden").join(&name)).map_err(|e| format!("{name}: {e}"))?;
            let rendered = render_prompt(q, task, variant, &q.options).map_err(|e| e.to_string())?;
            ensure(rendered == golden, || format!("{name} differs"))?;
            checked += 1;
        }
    }
    ensure(checked == 12, || format!("{checked} golden files"))?;
    Ok("12 prompts byte-identical".into())
}

fn task_config(out: &Path) -> TaskExperimentConfig {
    TaskExperimentConfig {
        question_set: fixture("questions_nottingham.json"),
        agents: vec![AgentBinding {
            id: "first".into(),
            spec: AgentSpec::Scripted(ScriptedPolicy::FirstDisplayed),
        }],
        tasks: TaskVariant::ALL.to_vec(),
        prompt_variants: PromptVariant::ALL.to_vec(),
        trials_per_permutation: 30,
        permutations: 3,
        permutation_seeds: None,
        seed: 11,
        output: out.to_path_buf(),
        human_tallies: None,
        focality_labels: None,
    }
}

fn bargaining_config(out: &Path) -> BargainingExperimentConfig {
    let weights = [("blue".to_string(), 0.5), ("yellow".to_string(), 0.5)].into_iter().collect();
    BargainingExperimentConfig {
        boards: fixture("boards_game1.json"),
        blue: RoleBinding::Scripted(ScriptedPolicy::Distribution { weights, seed: 2 }),
        orange: RoleBinding::Strategy(StrategyKind::Greedy),
        iterations: 100,
        variants: vec![BargainingVariant::Vanilla, BargainingVariant::Cooperative],
        seed: 11,
        output: out.to_path_buf(),
    }
}

fn single_cell_nci(dir: &Path, name: &str, policy: ScriptedPolicy, seeds: Option<Vec<u64>>) -> Result<f64, String> {
    let out = dir.join(name);
    let mut c = task_config(&out);
    c.question_set = dir.join("tn1.json");
    c.agents[0].spec = AgentSpec::Scripted(policy);
    c.tasks = vec![TaskVariant::Coordinate];
    c.prompt_variants = vec![PromptVariant::Vanilla];
    c.permutation_seeds = seeds;
    run_task_experiment(&c, RunOptions::default()).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_path(out.join("nci.csv")).map_err(|e| e.to_string())?;
    let col = reader.headers().map_err(|e| e.to_string())?.iter().position(|h| h == "nci").ok_or("no nci column")?;
    let row = reader.records().next().ok_or("empty nci table")?.map_err(|e| e.to_string())?;
    row[col].parse().map_err(|e| format!("nci {}: {e}", &row[col]))
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();

    let questions = load_question_set(&fixture("questions_nottingham.json")).map_err(|e| e.to_string())?;
    let tn1: Vec<_> = questions.into_iter().filter(|q| q.id == "TN1").collect();
    std::fs::write(dir.path().join("tn1.json"), serde_json::to_string(&tn1).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let seeds = vec![0, 21, 22];
    let mut first_counts: BTreeMap<String, u64> = BTreeMap::new();
    for &seed in &seeds {
        *first_counts.entry(permute_options(&tn1[0], seed)[0].label.clone()).or_default() += 30;
    }
    let same: u64 = first_counts.values().map(|c| c * (c - 1)).sum();
    let analytic = 5.0 * same as f64 / (90.0 * 89.0);
    let induced = single_cell_nci(dir.path(), "first", ScriptedPolicy::FirstDisplayed, Some(seeds))?;
    ensure(induced == analytic, || format!("first-displayed NCI {induced}, analytic {analytic}"))?;
    let fixed = single_cell_nci(
        dir.path(),
        "fixed",
        ScriptedPolicy::FixedLabel { label: "Saturday night".into() },
        None,
    )?;
    ensure(fixed == 5.0, || format!("fixed-label NCI {fixed}"))?;

    let tasks = run_task_experiment(&task_config(&dir.path().join("tasks")), RunOptions::default())
        .map_err(|e| e.to_string())?;
    let bargaining = run_bargaining_experiment(&bargaining_config(&dir.path().join("bargaining")), RunOptions::default())
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    ensure(tasks.exit_code() == 0 && tasks.persisted == 5 * 12 * 90, || format!("tasks: {tasks:?}"))?;
    ensure(bargaining.exit_code() == 0 && bargaining.persisted == 200, || format!("bargaining: {bargaining:?}"))?;
    for f in ["tasks/report.txt", "tasks/nci.csv", "bargaining/report.txt", "bargaining/payoffs.csv"] {
        ensure(dir.path().join(f).exists(), || format!("{f} missing"))?;
    }
    Ok(format!(
        "first-displayed NCI {induced:.6} = analytic, fixed-label 5, {} trials and {} iterations in {elapsed:?}",
        tasks.persisted, bargaining.persisted
    ))
}

fn files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        out.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn determinism_and_resume() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = |n: &str| dir.path().join(n);
    let err = |e: tacit::runner::RunnerError| e.to_string();

    run_task_experiment(&task_config(&d("t1")), RunOptions::default()).map_err(err)?;
    run_task_experiment(&task_config(&d("t2")), RunOptions::default()).map_err(err)?;
    ensure(files(&d("t1"))? == files(&d("t2"))?, || "task reruns differ".into())?;
    let cut = run_task_experiment(&task_config(&d("t3")), RunOptions { stop_after: Some(1234) }).map_err(err)?;
    ensure(cut.incomplete, || "stop did not interrupt".into())?;
    run_task_experiment(&task_config(&d("t3")), RunOptions::default()).map_err(err)?;
    ensure(files(&d("t3"))? == files(&d("t1"))?, || "resumed task run differs".into())?;

    run_bargaining_experiment(&bargaining_config(&d("b1")), RunOptions::default()).map_err(err)?;
    run_bargaining_experiment(&bargaining_config(&d("b2")), RunOptions::default()).map_err(err)?;
    ensure(files(&d("b1"))? == files(&d("b2"))?, || "bargaining reruns differ".into())?;
    run_bargaining_experiment(&bargaining_config(&d("b3")), RunOptions { stop_after: Some(77) }).map_err(err)?;
    run_bargaining_experiment(&bargaining_config(&d("b3")), RunOptions::default()).map_err(err)?;
    ensure(files(&d("b3"))? == files(&d("b1"))?, || "resumed bargaining run differs".into())?;
    Ok("reruns and resumed runs byte-identical".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("coordination index matches pair enumeration", ci_oracle),
        ("pure Nash matches brute force", nash_oracle),
        ("Game-1 payoff ledger", game_one_ledger),
        ("softmax normalisation and monotonicity", softmax_laws),
        ("orbit partition", orbit_partitions),
        ("noisy ties never ambiguous", ties_have_measure_zero),
        ("prompt golden files", prompt_goldens),
        ("scripted end-to-end pipeline", end_to_end),
        ("determinism and resume", determinism_and_resume),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(reason)) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
