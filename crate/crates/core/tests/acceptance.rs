//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test --test acceptance -- --nocapture`.

use miyazawa::accounts::{self, HouseholdGroup, Region};
use miyazawa::fiscal::{self, ImpactResult, TaxScenario};
use miyazawa::inequality::{self, GroupedDistribution, Scope, Verdict};
use miyazawa::leontief;
use miyazawa::miyazawa as income;
use miyazawa::report::{self, Precision};

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

// Published class-level figures (income in million Rp).
const Y1: [f64; 10] = [
    162_856_815.0,
    260_381_265.0,
    326_679_028.0,
    390_441_241.0,
    464_644_203.0,
    550_599_409.0,
    661_970_128.0,
    831_187_331.0,
    1_136_537_321.0,
    2_879_595_098.0,
];
const DY: [f64; 10] = [
    1_639.65, 2_592.88, 3_239.68, 3_857.56, 4_583.77, 5_420.81, 6_507.71, 8_146.07, 11_161.19,
    27_963.99,
];
const Y2: [f64; 10] = [
    162_855_175.0,
    260_378_673.0,
    326_675_788.0,
    390_437_384.0,
    464_639_619.0,
    550_593_988.0,
    661_963_620.0,
    831_179_185.0,
    1_136_526_160.0,
    2_879_567_134.0,
];
// %DY and %CY columns, in percent.
const PCT_DY: [f64; 10] = [
    0.0010068, 0.0009958, 0.0009917, 0.0009880, 0.0009865, 0.0009845, 0.0009831, 0.0009801,
    0.0009820, 0.0009711,
];
const PCT_CY: [f64; 10] = [2.18, 3.45, 4.31, 5.14, 6.10, 7.22, 8.66, 10.85, 14.86, 37.23];
const TOTAL_DY: f64 = 75_113.30;

fn twenty_groups() -> Vec<HouseholdGroup> {
    let mut groups = Vec::new();
    for region in [Region::Urban, Region::Rural] {
        for decile in 1..=10u8 {
            groups.push(HouseholdGroup {
                region,
                decile,
                group_id: format!("{region}-{decile}"),
            });
        }
    }
    groups
}

/// Class totals loaded as a 20-group result with everything on the urban
/// side; All-scope class aggregation then reproduces the table rows.
fn table_result() -> ImpactResult {
    let mut y1 = vec![0.0; 20];
    let mut dy = vec![0.0; 20];
    y1[..10].copy_from_slice(&Y1);
    dy[..10].copy_from_slice(&DY);
    ImpactResult::from_income_decline(twenty_groups(), DVector::from_vec(y1), DVector::from_vec(dy))
        .unwrap()
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/idn2016-synthetic")
}

#[test]
fn criterion_01_table_arithmetic_reproduction() {
    let result = table_result();
    for c in 0..10 {
        // engine identity: y2 = y1 - dy exactly as computed
        assert_eq!(result.y2[c], result.y1[c] - result.dy[c]);
        // vs the published column, rounded independently to integer million
        assert!(
            (result.y2[c] - Y2[c]).abs() <= 1.0,
            "class {} y2 {} vs table {}",
            c + 1,
            result.y2[c],
            Y2[c]
        );
        // relative decline to 4 significant figures
        let pct = 100.0 * result.pct_dy[c];
        assert!(
            (pct - PCT_DY[c]).abs() / PCT_DY[c] <= 1e-4,
            "class {} pct_dy {pct} vs table {}",
            c + 1,
            PCT_DY[c]
        );
        // contribution share to +-0.01 percentage points
        let cy = 100.0 * result.pct_cy[c];
        assert!(
            (cy - PCT_CY[c]).abs() <= 0.01,
            "class {} pct_cy {cy} vs table {}",
            c + 1,
            PCT_CY[c]
        );
    }
    let total: f64 = result.total_decline();
    assert!((total - TOTAL_DY).abs() <= 0.02, "total decline {total}");
    let csv = report::emit_impact_table(&result, Scope::All, &Precision::default());
    let total_row = csv.lines().last().unwrap();
    assert!(total_row.ends_with("100.00%"), "{total_row}");
    println!("ACCEPTANCE 01 PASS: Table 1 arithmetic reproduced (Y2, %DY, %CY, totals)");
}

#[test]
fn criterion_02_urban_rural_additivity() {
    // class 10 urban + rural declines and class 1 urban income arithmetic
    let mut y1 = vec![1.0; 20];
    let mut dy = vec![0.0; 20];
    y1[0] = 94_750_902.0; // urban class 1
    dy[0] = 954.23409;
    y1[9] = 1_900_000_000.0; // urban class 10, baseline immaterial here
    dy[9] = 19_144.85;
    y1[19] = 979_595_098.0; // rural class 10
    dy[19] = 8_819.13;
    let result = ImpactResult::from_income_decline(
        twenty_groups(),
        DVector::from_vec(y1),
        DVector::from_vec(dy),
    )
    .unwrap();

    let class10_sum = result.dy[9] + result.dy[19];
    assert!(
        (class10_sum - 27_963.99).abs() <= 0.02,
        "urban+rural class-10 decline {class10_sum}"
    );
    let csv = report::emit_impact_table(&result, Scope::All, &Precision::default());
    let class10 = csv.lines().find(|l| l.starts_with("Class - 10")).unwrap();
    let dy_field: f64 = class10.split(',').nth(2).unwrap().parse().unwrap();
    assert!((dy_field - 27_963.98).abs() <= 0.02, "{class10}");

    // urban class 1: 94,750,902 - 954.23409 = 94,749,947.8
    assert!((result.y2[0] - 94_749_947.8).abs() <= 0.05, "y2 {}", result.y2[0]);
    let urban_csv = report::emit_impact_table(&result, Scope::Urban, &Precision::default());
    let class1 = urban_csv.lines().find(|l| l.starts_with("Class - 1,")).unwrap();
    let fields: Vec<&str> = class1.split(',').collect();
    assert_eq!(fields[1], "94750902");
    assert_eq!(fields[2], "954.23");
    assert_eq!(fields[3], "94749948"); // integer rounding of 94,749,947.8
    println!("ACCEPTANCE 02 PASS: urban/rural additivity and text-value arithmetic");
}

#[test]
#[allow(clippy::needless_range_loop)] // explicit pair enumeration is the oracle
fn criterion_03_regressivity_kendall_tau() {
    // brute-force pair-count oracle, independent of the implementation
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..10 {
        for j in (i + 1)..10 {
            if PCT_DY[j] > PCT_DY[i] {
                concordant += 1;
            } else if PCT_DY[j] < PCT_DY[i] {
                discordant += 1;
            }
        }
    }
    let oracle_tau = (concordant - discordant) as f64 / 45.0;
    assert_eq!(concordant, 1); // single inversion, classes 8 -> 9
    assert_eq!(discordant, 44);

    let r = inequality::regressivity(&PCT_DY);
    assert!((r.kendall_tau - oracle_tau).abs() <= 1e-9);
    assert!((r.kendall_tau - (-43.0 / 45.0)).abs() <= 1e-9);
    assert_eq!(r.verdict, Verdict::Regressive);
    println!("ACCEPTANCE 03 PASS: Kendall tau = -43/45, verdict Regressive");
}

#[test]
fn criterion_04_grouped_gini() {
    let share = 0.1;
    // published decile income shares, in percent
    let published =
        GroupedDistribution::new(PCT_CY.iter().map(|&s| (share, s)).collect(), Scope::All)
            .unwrap();
    let g1 = inequality::gini(&inequality::lorenz(&published).unwrap());
    assert!((g1 - 0.4397).abs() < 0.0005, "gini before = {g1}");

    let before =
        GroupedDistribution::new(Y1.iter().map(|&y| (share, y)).collect(), Scope::All).unwrap();
    let after = GroupedDistribution::new(
        Y1.iter().zip(DY.iter()).map(|(&y, &d)| (share, y - d)).collect(),
        Scope::All,
    )
    .unwrap();
    let delta = inequality::gini_delta(&before, &after).unwrap();
    assert!(delta.delta > 0.0, "regressive shock must raise inequality, delta {}", delta.delta);
    assert!(delta.delta < 1e-5, "delta expected small, got {}", delta.delta);
    println!(
        "ACCEPTANCE 04 PASS: grouped Gini {g1:.4}, delta {:+.3e} (small increase)",
        delta.delta
    );
}

#[test]
fn criterion_05_leontief_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..50 {
        let n = rng.random_range(1..=8);
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            let col_sum_target: f64 = rng.random_range(0.1..0.9);
            let mut raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter_mut().for_each(|v| *v *= col_sum_target / s);
            for i in 0..n {
                a[(i, j)] = raw[i];
            }
        }
        let sys = leontief::leontief_inverse(&a).expect("productive by construction");

        let mut neumann = DMatrix::identity(n, n);
        let mut power = DMatrix::identity(n, n);
        for _ in 0..200 {
            power = &power * &a;
            neumann += &power;
        }
        let diff = (&sys.b - neumann).amax();
        assert!(diff <= 1e-8, "trial {trial}: Neumann diff {diff}");
        assert!(
            sys.diagnostics.residual_norm <= 1e-9,
            "trial {trial}: residual {}",
            sys.diagnostics.residual_norm
        );
    }
    println!("ACCEPTANCE 05 PASS: 50 random systems match the Neumann oracle (1e-8) with residual <= 1e-9");
}

#[test]
fn criterion_06_miyazawa_block_inverse_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..25 {
        let n = rng.random_range(1..=5);
        let r = rng.random_range(1..=4);
        // column sums kept small so the augmented matrix stays productive
        let mut a = DMatrix::zeros(n, n);
        let mut v = DMatrix::zeros(r, n);
        for j in 0..n {
            for i in 0..n {
                a[(i, j)] = rng.random_range(0.0..0.4 / n as f64);
            }
            for g in 0..r {
                v[(g, j)] = rng.random_range(0.0..0.4 / r as f64);
            }
        }
        let mut c = DMatrix::zeros(n, r);
        for g in 0..r {
            for i in 0..n {
                c[(i, g)] = rng.random_range(0.0..0.5 / n as f64);
            }
        }
        let df = DVector::from_iterator(n, (0..n).map(|_| -rng.random_range(0.0..10.0)));

        let leontief_sys = leontief::leontief_inverse(&a).unwrap();
        let sys = income::build_miyazawa(&v, &c, &leontief_sys).unwrap();
        let dy = income::income_impact(&sys, &df).unwrap();

        // oracle: household block of the augmented closed-model solve
        let mut aug = DMatrix::zeros(n + r, n + r);
        aug.view_mut((0, 0), (n, n)).copy_from(&a);
        aug.view_mut((0, n), (n, r)).copy_from(&c);
        aug.view_mut((n, 0), (r, n)).copy_from(&v);
        let mut rhs = DVector::zeros(n + r);
        rhs.rows_mut(0, n).copy_from(&df);
        let sol = (DMatrix::identity(n + r, n + r) - aug).lu().solve(&rhs).unwrap();
        for g in 0..r {
            let denom = sol[n + g].abs().max(1e-12);
            assert!(
                (dy[g] - sol[n + g]).abs() / denom <= 1e-9,
                "trial {trial} group {g}: {} vs {}",
                dy[g],
                sol[n + g]
            );
        }
    }
    println!("ACCEPTANCE 06 PASS: 25 random instances match the augmented block-inverse oracle (1e-9 relative)");
}

fn load_fixture() -> (accounts::SectorAccounts, accounts::HouseholdAccounts, TaxScenario) {
    let dir = fixture_dir();
    let acc = accounts::load_sector_accounts(dir.join("sectors.csv")).unwrap();
    let hh = accounts::load_household_accounts(dir.join("households.csv"), &acc.sector_ids).unwrap();
    let scenario = TaxScenario::from_json_file(dir.join("scenario.json"), &acc.sector_ids).unwrap();
    (acc, hh, scenario)
}

#[test]
fn criterion_07_pipeline_laws() {
    let (acc, hh, scenario) = load_fixture();

    // zero-rate neutrality: exactly zero everywhere
    let zero = TaxScenario::new("zero".into(), 0.0, 1.0, scenario.emissions.clone()).unwrap();
    let rz = fiscal::run_scenario(&acc, &hh, &zero, false).unwrap();
    assert!(rz.dy.iter().all(|&d| d == 0.0));
    assert!(rz.dv.iter().all(|&d| d == 0.0));
    assert!(rz.dp.iter().all(|&d| d == 0.0));
    assert!(rz.df.iter().all(|&d| d == 0.0));

    // linearity in the rate
    let base = fiscal::run_scenario(&acc, &hh, &scenario, false).unwrap();
    let double = TaxScenario::new(
        "2x".into(),
        2.0 * scenario.rate,
        scenario.pass_through,
        scenario.emissions.clone(),
    )
    .unwrap();
    let rd = fiscal::run_scenario(&acc, &hh, &double, false).unwrap();
    for g in 0..20 {
        let rel = (rd.dy[g] - 2.0 * base.dy[g]).abs() / (2.0 * base.dy[g]).abs();
        assert!(rel <= 1e-10, "group {g}: rel {rel}");
    }

    // sign: positive rate, nonzero emissions, positive demand
    assert!(base.dy.iter().all(|&d| d >= 0.0));
    assert!(base.total_decline() > 0.0);

    // sector-permutation invariance: relabel sectors, identical declines
    let n = acc.n();
    let perm: Vec<usize> = (0..n).rev().collect();
    let mut z = DMatrix::zeros(n, n);
    let mut w = DMatrix::zeros(20, n);
    let mut h = DMatrix::zeros(n, 20);
    let (mut f, mut x, mut va, mut e) =
        (DVector::zeros(n), DVector::zeros(n), DVector::zeros(n), DVector::zeros(n));
    let ids: Vec<String> = perm.iter().map(|&j| acc.sector_ids[j].clone()).collect();
    for (pi, &i) in perm.iter().enumerate() {
        f[pi] = acc.f[i];
        x[pi] = acc.x[i];
        va[pi] = acc.va[i];
        e[pi] = scenario.emissions.e[i];
        for (pj, &j) in perm.iter().enumerate() {
            z[(pi, pj)] = acc.z[(i, j)];
        }
        for g in 0..20 {
            w[(g, pi)] = hh.w[(g, i)];
            h[(pi, g)] = hh.h[(i, g)];
        }
    }
    let acc_p = accounts::SectorAccounts::new(ids, z, f, x, va).unwrap();
    let hh_p = accounts::HouseholdAccounts {
        groups: hh.groups.clone(),
        w,
        h,
        y0: hh.y0.clone(),
    };
    let scen_p = TaxScenario::new(
        "perm".into(),
        scenario.rate,
        scenario.pass_through,
        accounts::EmissionProfile { e },
    )
    .unwrap();
    let rp = fiscal::run_scenario(&acc_p, &hh_p, &scen_p, false).unwrap();
    for g in 0..20 {
        let rel = (rp.dy[g] - base.dy[g]).abs() / base.dy[g].abs().max(1e-30);
        assert!(rel <= 1e-12, "group {g}: rel {rel}");
    }
    println!("ACCEPTANCE 07 PASS: zero-rate neutrality, rate linearity, sign, sector-permutation invariance");
}

#[test]
fn criterion_08_inequality_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    // scale invariance
    let base: Vec<f64> = (0..10).map(|_| rng.random_range(10.0..1000.0)).collect();
    let share = 0.1;
    let dist = GroupedDistribution::new(base.iter().map(|&y| (share, y)).collect(), Scope::All).unwrap();
    let g0 = inequality::gini(&inequality::lorenz(&dist).unwrap());
    for lambda in [1e-3, 0.5, 2.0, 1e6] {
        let scaled = GroupedDistribution::new(
            base.iter().map(|&y| (share, lambda * y)).collect(),
            Scope::All,
        )
        .unwrap();
        let g = inequality::gini(&inequality::lorenz(&scaled).unwrap());
        assert!((g - g0).abs() <= 1e-12, "lambda {lambda}: {g} vs {g0}");
    }

    // Pigou-Dalton: transfers from richer to poorer never increase G
    let mut incomes = base.clone();
    let mut g_prev = g0;
    for step in 0..100 {
        let i = rng.random_range(0..incomes.len());
        let j = rng.random_range(0..incomes.len());
        let (rich, poor) = if incomes[i] >= incomes[j] { (i, j) } else { (j, i) };
        if rich == poor {
            continue;
        }
        // cap the transfer so ranks cannot cross
        let transfer = rng.random_range(0.0..1.0) * (incomes[rich] - incomes[poor]) / 2.0;
        incomes[rich] -= transfer;
        incomes[poor] += transfer;
        let dist = GroupedDistribution::new(
            incomes.iter().map(|&y| (share, y)).collect(),
            Scope::All,
        )
        .unwrap();
        let curve = inequality::lorenz(&dist).unwrap(); // convexity asserted inside
        let g = inequality::gini(&curve);
        assert!(g <= g_prev + 1e-12, "step {step}: {g} > {g_prev}");
        assert_eq!(curve.knots.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.knots.last(), Some(&(1.0, 1.0)));
        g_prev = g;
    }
    println!("ACCEPTANCE 08 PASS: Gini scale invariance, Pigou-Dalton over 100 transfers, Lorenz invariants");
}

#[test]
fn criterion_09_calibrated_end_to_end_fixture() {
    let (acc, hh, scenario) = load_fixture();
    let result = fiscal::run_scenario(&acc, &hh, &scenario, false).unwrap();

    // one free global scaling of emission intensities; the pipeline is
    // linear in the intensity scale, so calibrating the total is exact
    let scale = TOTAL_DY / result.total_decline();
    let mut per_class = [0.0; 10];
    for (g, group) in result.groups.iter().enumerate() {
        per_class[group.decile as usize - 1] += scale * result.dy[g];
    }
    for c in 0..10 {
        let rel = (per_class[c] - DY[c]).abs() / DY[c];
        assert!(
            rel <= 0.005,
            "class {}: decline {} vs table {} (rel {rel})",
            c + 1,
            per_class[c],
            DY[c]
        );
    }
    println!(
        "ACCEPTANCE 09 PASS: calibrated fixture (scale {scale:.6}) matches per-class declines within 0.5%"
    );
}

#[test]
fn criterion_10_cli_contract() {
    use std::process::Command;

    let bin = env!("CARGO_BIN_EXE_miyazawa");
    let dir = fixture_dir();
    let out1 = tempfile::tempdir().unwrap();
    let out2 = tempfile::tempdir().unwrap();

    let run = |out: &std::path::Path| {
        Command::new(bin)
            .args([
                "run",
                "--sectors",
                dir.join("sectors.csv").to_str().unwrap(),
                "--households",
                dir.join("households.csv").to_str().unwrap(),
                "--scenario",
                dir.join("scenario.json").to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--population-weights",
                "urban=0.56,rural=0.44",
            ])
            .output()
            .unwrap()
    };

    let r1 = run(out1.path());
    assert!(r1.status.success(), "stderr: {}", String::from_utf8_lossy(&r1.stderr));
    let expected = [
        "impact_all.csv",
        "impact_urban.csv",
        "impact_rural.csv",
        "contribution.csv",
        "lorenz_all.json",
        "diagnostics.json",
    ];
    for name in expected {
        assert!(out1.path().join(name).exists(), "{name} missing");
    }

    let r2 = run(out2.path());
    assert!(r2.status.success());
    for name in expected {
        let a = std::fs::read(out1.path().join(name)).unwrap();
        let b = std::fs::read(out2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }

    // a deliberately unbalanced sectors file exits 1 naming the bad row
    let broken_dir = tempfile::tempdir().unwrap();
    let original = std::fs::read_to_string(dir.join("sectors.csv")).unwrap();
    let mut lines: Vec<String> = original.lines().map(str::to_string).collect();
    // double the final demand of the s2 row to break its row balance
    let s2 = lines.iter_mut().find(|l| l.starts_with("s2,")).unwrap();
    let mut fields: Vec<String> = s2.split(',').map(str::to_string).collect();
    let fd_index = fields.len() - 3;
    let fd: f64 = fields[fd_index].parse().unwrap();
    fields[fd_index] = format!("{}", fd * 2.0);
    *s2 = fields.join(",");
    std::fs::write(broken_dir.path().join("sectors.csv"), lines.join("\n")).unwrap();

    let r3 = Command::new(bin)
        .args([
            "run",
            "--sectors",
            broken_dir.path().join("sectors.csv").to_str().unwrap(),
            "--households",
            dir.join("households.csv").to_str().unwrap(),
            "--scenario",
            dir.join("scenario.json").to_str().unwrap(),
            "--out",
            broken_dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(r3.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&r3.stderr);
    assert!(stderr.contains("s2"), "stderr must name the offending row: {stderr}");

    // missing --scenario: exit 1 with usage text
    let r4 = Command::new(bin)
        .args([
            "run",
            "--sectors",
            dir.join("sectors.csv").to_str().unwrap(),
            "--households",
            dir.join("households.csv").to_str().unwrap(),
            "--out",
            broken_dir.path().join("out2").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(r4.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r4.stderr).contains("--scenario"));

    println!("ACCEPTANCE 10 PASS: CLI exits 0, six files byte-identical across runs, unbalanced input exits 1");
}
