//! Reproduction checks against the reference tables and the closed-form
//! identities. Prints one PASS/FAIL line per criterion and exits non-zero if
//! any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use radial_wkb::action::action;
use radial_wkb::bs_solver::{bs_energy_coulomb, bs_energy_general, bs_energy_log, bs_energy_power};
use radial_wkb::mesh_solver::{solve_radial, validate_solver, MeshConfig};
use radial_wkb::potentials::{PotentialSpec, QuantumLabel};
use radial_wkb::report::{anharmonic_gamma_table, build_table, truncate4, ComparisonRow, ANHARMONIC_LAMBDAS};
use radial_wkb::specfun::beta;
use radial_wkb::wkb_correction::{fit_gamma, gamma_extract, gamma_fit_eval, modified_bs_energy, FitGauge};

// (m or d, n_r, E_exact, E_BS, gamma) as tabulated
type Reference = (f64, u32, &'static str, &'static str, &'static str);

const TABLE_D2: [Reference; 16] = [
    (1.0, 0, "1.7372", "1.7706", "-1.4e-2"),
    (1.0, 5, "8.7545", "8.7579", "-3.2e-3"),
    (1.0, 10, "13.4761", "13.4778", "-1.9e-3"),
    (1.0, 20, "21.0530", "21.0537", "-1.1e-3"),
    (3.0, 0, "2.1874", "2.1154", "1.4e-2"),
    (3.0, 5, "37.6011", "37.5896", "1.4e-3"),
    (3.0, 10, "81.6763", "81.6695", "7.2e-4"),
    (3.0, 20, "182.2834", "182.2794", "3.7e-4"),
    (4.0, 0, "2.3448", "2.1850", "2.7e-2"),
    (4.0, 5, "53.4863", "53.4550", "2.4e-3"),
    (4.0, 10, "126.6175", "126.5972", "1.3e-3"),
    (4.0, 20, "308.9313", "308.9183", "6.5e-4"),
    (6.0, 0, "2.6093", "2.2650", "4.9e-2"),
    (6.0, 5, "82.7310", "82.6369", "4.2e-3"),
    (6.0, 10, "218.0469", "217.9788", "2.2e-3"),
    (6.0, 20, "594.6983", "594.6495", "1.1e-3"),
];

const TABLE_D3: [Reference; 16] = [
    (1.0, 0, "2.3381", "2.3202", "8.7e-3"),
    (1.0, 5, "9.0226", "9.0213", "1.2e-3"),
    (1.0, 10, "13.6914", "13.6909", "6.5e-4"),
    (1.0, 20, "21.2248", "21.2245", "3.4e-4"),
    (3.0, 0, "3.4505", "3.4411", "1.7e-3"),
    (3.0, 5, "39.6535", "39.6492", "5.3e-4"),
    (3.0, 10, "84.0111", "84.0084", "2.8e-4"),
    (3.0, 20, "184.9517", "184.9501", "1.5e-4"),
    (4.0, 0, "3.7996", "3.7519", "7.1e-3"),
    (4.0, 5, "56.7342", "56.7190", "1.1e-3"),
    (4.0, 10, "130.6420", "130.6320", "6.2e-4"),
    (4.0, 20, "313.9580", "313.9515", "3.2e-4"),
    (6.0, 0, "4.3385", "4.1612", "2.1e-2"),
    (6.0, 5, "88.3923", "88.3348", "2.5e-3"),
    (6.0, 10, "225.8520", "225.8099", "1.3e-3"),
    (6.0, 20, "605.5907", "605.5604", "6.9e-4"),
];

// first column is the dimension
const TABLE_LOG: [Reference; 12] = [
    (2.0, 0, "0.5265", "0.5724", "-2.2e-2"),
    (2.0, 5, "2.9688", "2.9702", "-8.0e-3"),
    (2.0, 10, "3.6163", "3.6168", "-6.2e-3"),
    (2.0, 20, "4.2857", "4.2859", "-4.9e-3"),
    (3.0, 0, "1.0443", "0.9778", "5.2e-2"),
    (3.0, 5, "3.0196", "3.0147", "2.8e-2"),
    (3.0, 10, "3.6427", "3.6404", "2.5e-2"),
    (3.0, 20, "4.2990", "4.2980", "2.0e-2"),
    (6.0, 0, "1.8443", "1.6709", "2.8e-1"),
    (6.0, 5, "3.1653", "3.1373", "1.8e-1"),
    (6.0, 10, "3.7212", "3.7078", "1.6e-1"),
    (6.0, 20, "4.3396", "4.3335", "1.3e-1"),
];

// rows are d = 1, 2, 3, 6; columns follow ANHARMONIC_LAMBDAS
const TABLE_ANHARMONIC: [(u32, [&str; 6]); 4] = [
    (1, ["0", "0.014", "0.049", "0.072", "0.079", "0.081"]),
    (2, ["0", "0.008", "0.020", "0.025", "0.027", "0.027"]),
    (3, ["0", "0.005", "0.008", "0.007", "0.007", "0.007"]),
    (6, ["0", "-0.021", "-0.047", "-0.059", "-0.062", "-0.063"]),
];

struct Outcome {
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Checks {
    total: usize,
    failures: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn outcome(self, extra: &str) -> Outcome {
        let mut detail = format!("{}/{} checks{extra}", self.total - self.failures.len(), self.total);
        if !self.failures.is_empty() {
            let shown: Vec<&str> = self.failures.iter().take(6).map(String::as_str).collect();
            detail.push_str("; failed: ");
            detail.push_str(&shown.join("; "));
            if self.failures.len() > 6 {
                detail.push_str(&format!("; and {} more", self.failures.len() - 6));
            }
        }
        Outcome {
            pass: self.failures.is_empty(),
            detail,
        }
    }
}

fn mesh() -> MeshConfig {
    MeshConfig::default()
}

fn parse(s: &str) -> f64 {
    s.parse().expect("table literal")
}

/// Within ±1 of the tabulated 4th decimal.
fn energy_matches(ours: f64, reference: &str) -> bool {
    (parse(&truncate4(ours)) - parse(reference)).abs() <= 1.0001e-4
}

/// Rounded to the tabulated exponent, within ±1 in the 2nd significant digit.
fn sig2_matches(ours: f64, reference: &str) -> bool {
    let p = parse(reference);
    if p == 0.0 {
        return ours.abs() < 1e-8;
    }
    let unit = 10f64.powf(p.abs().log10().floor() - 1.0);
    ((ours / unit).round() - (p / unit).round()).abs() <= 1.0
}

fn check_row(c: &mut Checks, label: &str, row: &ComparisonRow, reference: &Reference) {
    let (_, n, e_exact, e_bs, gamma) = *reference;
    // truncated digits, or rounded ones where the table rounds (ln √π = 0.57236.. prints as 0.5724)
    c.check(truncate4(row.e_bs) == e_bs || format!("{:.4}", row.e_bs) == e_bs, || {
        format!("{label} n_r={n} E_BS {} vs {e_bs}", truncate4(row.e_bs))
    });
    c.check(energy_matches(row.e_exact, e_exact), || {
        format!("{label} n_r={n} E_exact {} vs {e_exact}", truncate4(row.e_exact))
    });
    c.check(sig2_matches(row.gamma, gamma), || {
        format!("{label} n_r={n} gamma {:.3e} vs {gamma}", row.gamma)
    });
}

fn power_table(d: u32, table: &[Reference]) -> Outcome {
    let mut c = Checks::default();
    for m in [1.0, 3.0, 4.0, 6.0] {
        let reference: Vec<&Reference> = table.iter().filter(|p| p.0 == m).collect();
        let n_list: Vec<u32> = reference.iter().map(|p| p.1).collect();
        let v = PotentialSpec::power(m).unwrap();
        match build_table(&v, d, &n_list, &mesh()) {
            Ok(rows) => {
                for (row, p) in rows.iter().zip(&reference) {
                    check_row(&mut c, &format!("m={m}"), row, p);
                }
            }
            Err(e) => c.check(false, || format!("m={m}: {e}")),
        }
    }
    c.outcome("")
}

fn criterion_3() -> Outcome {
    let mut c = Checks::default();
    let mut rd_d2_n20 = f64::NAN;
    for d in [2u32, 3, 6] {
        let reference: Vec<&Reference> = TABLE_LOG.iter().filter(|p| p.0 == d as f64).collect();
        let n_list: Vec<u32> = reference.iter().map(|p| p.1).collect();
        match build_table(&PotentialSpec::Log, d, &n_list, &mesh()) {
            Ok(rows) => {
                for (row, p) in rows.iter().zip(&reference) {
                    check_row(&mut c, &format!("d={d}"), row, p);
                    if d == 2 && row.q.n_r == 20 {
                        rd_d2_n20 = row.rel_dev;
                    }
                }
            }
            Err(e) => c.check(false, || format!("d={d}: {e}")),
        }
    }
    // the tabulated 4.7e-4 disagrees with its own A.D./E; the recomputed value is 4.7e-5
    c.check(sig2_matches(rd_d2_n20, "4.7e-5"), || format!("d=2 n_r=20 R.D. {rd_d2_n20:.2e} vs 4.7e-5"));
    c.outcome(&format!(", d=2 n_r=20 R.D. = {rd_d2_n20:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut c = Checks::default();
    let dims: Vec<u32> = TABLE_ANHARMONIC.iter().map(|r| r.0).collect();
    match anharmonic_gamma_table(&ANHARMONIC_LAMBDAS, &dims, &mesh()) {
        Ok(grid) => {
            for ((d, reference), ours) in TABLE_ANHARMONIC.iter().zip(&grid) {
                for ((&lambda, p), &g) in ANHARMONIC_LAMBDAS.iter().zip(reference).zip(ours) {
                    // one unit in the last tabulated digit
                    let ok = if *p == "0" { g.abs() < 1e-8 } else { (g - parse(p)).abs() <= 1.0001e-3 };
                    c.check(ok, || format!("d={d} lambda={lambda} gamma {g:.4} vs {p}"));
                }
            }
        }
        Err(e) => c.check(false, || e.to_string()),
    }
    c.outcome("")
}

fn criterion_5() -> Outcome {
    let mut c = Checks::default();
    let harmonic = PotentialSpec::power(2.0).unwrap();
    let mut worst_harmonic: f64 = 0.0;
    for d in 1..=6u32 {
        match solve_radial(&harmonic, d, 20, &mesh()) {
            Ok(s) => {
                for (n, &e) in s.energies.iter().enumerate() {
                    let g = gamma_extract(&harmonic, QuantumLabel::new(n as u32, d).unwrap(), e).unwrap();
                    worst_harmonic = worst_harmonic.max(g.abs());
                    c.check(g.abs() < 1e-8, || format!("harmonic d={d} n_r={n} gamma {g:e}"));
                }
            }
            Err(e) => c.check(false, || format!("harmonic d={d}: {e}")),
        }
    }
    // γ from the exact Coulomb energies, against the stated d/2 − 1
    let mut stated_failures = Vec::new();
    let mut worst_quarter: f64 = 0.0;
    for d in 2..=6u32 {
        for n in 0..=20u32 {
            let q = QuantumLabel::new(n, d).unwrap();
            let k = (2 * n + d - 1) as f64;
            let g = gamma_extract(&PotentialSpec::Coulomb, q, -1.0 / (k * k)).unwrap();
            worst_quarter = worst_quarter.max((g - (d as f64 / 4.0 - 0.5)).abs());
            let stated = d as f64 / 2.0 - 1.0;
            let ok = (g - stated).abs() < 1e-10;
            if !ok && n == 0 {
                stated_failures.push(format!("d={d}: {g:.6} vs {stated}"));
            }
            c.check(ok, || format!("coulomb d={d} n_r={n} gamma {g:.6} vs d/2-1 = {stated}"));
        }
    }
    for n in 0..=20u32 {
        let q = QuantumLabel::new(n, 2).unwrap();
        let exact = -1.0 / ((2 * n + 1) as f64).powi(2);
        let bs = bs_energy_coulomb(q);
        c.check((bs - exact).abs() < 1e-10, || format!("coulomb d=2 n_r={n} E_BS {bs} vs {exact}"));
    }
    c.outcome(&format!(
        ", max harmonic |gamma| {worst_harmonic:.1e}, coulomb gamma - (d/4 - 1/2) max {worst_quarter:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let mut c = Checks::default();
    let quartic = PotentialSpec::power(4.0).unwrap();
    let mut worst: f64 = 0.0;
    for d in [2u32, 3, 6] {
        for n in 0..20u32 {
            let q = QuantumLabel::new(n, d).unwrap();
            let cases = [
                ("power m=4", &quartic, bs_energy_power(4.0, q).unwrap()),
                ("coulomb", &PotentialSpec::Coulomb, bs_energy_coulomb(q)),
                ("log", &PotentialSpec::Log, bs_energy_log(q)),
            ];
            for (name, v, closed) in cases {
                match bs_energy_general(v, q, 0.0) {
                    Ok(e) => {
                        let rel = (e - closed).abs() / closed.abs();
                        worst = worst.max(rel);
                        c.check(rel <= 1e-9, || format!("{name} d={d} n_r={n} rel {rel:e}"));
                    }
                    Err(e) => c.check(false, || format!("{name} d={d} n_r={n}: {e}")),
                }
            }
        }
    }
    c.outcome(&format!(", worst relative gap {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut c = Checks::default();
    let mut worst: f64 = 0.0;
    for d in [2u32, 3, 6] {
        match validate_solver(d, &MeshConfig::with_points(100).unwrap()) {
            Ok(r) => {
                worst = worst.max(r.max_deviation);
                c.check(r.max_deviation <= 1e-8, || format!("d={d} deviation {:e}", r.max_deviation));
            }
            Err(e) => c.check(false, || format!("d={d}: {e}")),
        }
    }
    // at a fixed scale the N/2N residual must shrink at least tenfold when N doubles;
    // with the automatic scale it already sits at the rounding floor at N = 100
    let linear = PotentialSpec::power(1.0).unwrap();
    let residual = |n: usize| {
        let cfg = MeshConfig::new(n, Some(0.06), 1.0).unwrap();
        solve_radial(&linear, 3, 20, &cfg).map(|s| s.residual_estimate)
    };
    let (r100, r200) = match (residual(100), residual(200)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            c.check(false, || format!("linear refinement: {a:?} {b:?}"));
            (f64::NAN, f64::NAN)
        }
    };
    c.check(r200 * 10.0 <= r100, || format!("linear residual {r100:e} -> {r200:e}"));
    c.outcome(&format!(", max deviation {worst:.1e}, linear residual {r100:.1e} -> {r200:.1e}"))
}

fn criterion_8() -> Outcome {
    let mut c = Checks::default();
    let v = PotentialSpec::power(4.0).unwrap();
    let spectrum = match solve_radial(&v, 3, 40, &mesh()) {
        Ok(s) => s,
        Err(e) => {
            c.check(false, || e.to_string());
            return c.outcome("");
        }
    };
    let points: Vec<(f64, f64)> = spectrum
        .energies
        .iter()
        .enumerate()
        .map(|(n, &e)| (n as f64, gamma_extract(&v, QuantumLabel::new(n as u32, 3).unwrap(), e).unwrap()))
        .collect();
    let fit = match fit_gamma(&points, 1, FitGauge::UnitConstant) {
        Ok(f) => f,
        Err(e) => {
            c.check(false, || e.to_string());
            return c.outcome("");
        }
    };
    c.check(fit.rms_residual <= 1e-4, || format!("rms {:e}", fit.rms_residual));
    let mut worst: f64 = 0.0;
    for (n, &exact) in spectrum.energies.iter().enumerate() {
        let q = QuantumLabel::new(n as u32, 3).unwrap();
        let g = gamma_fit_eval(&fit, n as f64).unwrap();
        let e = modified_bs_energy(4.0, q, g).unwrap();
        worst = worst.max((e - exact).abs());
        // 5 decimal digits
        c.check((e - exact).abs() < 5e-6, || format!("n_r={n} E {e:.7} vs {exact:.7}"));
    }
    c.outcome(&format!(", rms {:.1e}, max |E_fit - E_mesh| {worst:.1e}", fit.rms_residual))
}

fn criterion_9() -> Outcome {
    let mut c = Checks::default();
    // Beta function: B(1, b) = 1/b, B(1/2, 1/2) = π and B(a, b) = B(a+1, b) + B(a, b+1)
    c.check((beta(0.5, 0.5).unwrap() - PI).abs() < 1e-13, || "B(1/2,1/2) != pi".into());
    for i in 1..=12 {
        let a = 0.25 * i as f64;
        for j in 1..=12 {
            let b = 0.3 * j as f64;
            let lhs = beta(a, b).unwrap();
            let rhs = beta(a + 1.0, b).unwrap() + beta(a, b + 1.0).unwrap();
            c.check((lhs - rhs).abs() <= 1e-12 * lhs, || format!("B({a},{b}) recurrence"));
        }
        let b = 0.7 * i as f64;
        c.check((beta(1.0, b).unwrap() * b - 1.0).abs() < 1e-13, || format!("B(1,{b})"));
    }
    // the action increases with E
    let specs = [
        PotentialSpec::power(1.0).unwrap(),
        PotentialSpec::power(4.0).unwrap(),
        PotentialSpec::power(-0.5).unwrap(),
        PotentialSpec::Coulomb,
        PotentialSpec::Log,
        PotentialSpec::anharmonic(1.0).unwrap(),
    ];
    for v in &specs {
        let grid: Vec<f64> = (1..=40)
            .map(|i| {
                let t = i as f64 / 8.0;
                if v.has_negative_spectrum() {
                    -1.0 / t
                } else if matches!(v, PotentialSpec::Log) {
                    t - 2.0
                } else {
                    t
                }
            })
            .collect();
        let values: Vec<f64> = grid.iter().map(|&e| action(v, e).unwrap()).collect();
        c.check(values.windows(2).all(|w| w[1] > w[0]), || format!("action of {v} not increasing"));
    }
    // |γ| < 1/2, sign structure at m = 1, and monotone decay for m ∈ {3, 4, 6}
    for d in [2u32, 3] {
        for m in [1.0, 3.0, 4.0, 6.0] {
            let v = PotentialSpec::power(m).unwrap();
            let n_list: Vec<u32> = (0..=40).collect();
            let rows = match build_table(&v, d, &n_list, &mesh()) {
                Ok(r) => r,
                Err(e) => {
                    c.check(false, || format!("m={m} d={d}: {e}"));
                    continue;
                }
            };
            let gammas: Vec<f64> = rows.iter().map(|r| r.gamma).collect();
            c.check(gammas.iter().all(|g| g.abs() < 0.5), || format!("m={m} d={d} |gamma| >= 1/2"));
            if m == 1.0 {
                let sign_ok = if d == 2 { gammas.iter().all(|&g| g < 0.0) } else { gammas.iter().all(|&g| g > 0.0) };
                c.check(sign_ok, || format!("m=1 d={d} sign structure"));
            } else {
                c.check(gammas[1..].windows(2).all(|w| w[1] < w[0]), || format!("m={m} d={d} not decreasing"));
                c.check(rows.iter().all(|r| r.e_exact > r.e_bs), || format!("m={m} d={d} E_exact <= E_BS"));
            }
        }
    }
    for d in [2u32, 3, 6] {
        for r in build_table(&PotentialSpec::Log, d, &(0..=20).collect::<Vec<_>>(), &mesh()).unwrap() {
            c.check(r.gamma.abs() < 0.5, || format!("log d={d} n_r={} |gamma| >= 1/2", r.q.n_r));
        }
    }
    // infinite well at d = 3: E = π²(n_r + 1)², so γ = 1/4
    for r in build_table(&PotentialSpec::InfiniteWell, 3, &(0..=40).collect::<Vec<_>>(), &mesh()).unwrap() {
        c.check((r.gamma - 0.25).abs() < 1e-12, || format!("well n_r={} gamma {}", r.q.n_r, r.gamma));
    }
    c.outcome("")
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() {
    type Criterion = (&'static str, Option<f64>, Box<dyn Fn() -> Outcome>);
    let criteria: Vec<Criterion> = vec![
        ("d=2 power potentials", Some(10.0), Box::new(|| power_table(2, &TABLE_D2))),
        ("d=3 power potentials", Some(10.0), Box::new(|| power_table(3, &TABLE_D3))),
        ("logarithmic potential", None, Box::new(criterion_3)),
        ("anharmonic ground-state gamma", Some(60.0), Box::new(criterion_4)),
        ("exactness identities", None, Box::new(criterion_5)),
        ("quadrature B-S vs closed forms", None, Box::new(criterion_6)),
        ("mesh solver self-validation", None, Box::new(criterion_7)),
        ("gamma fit quality, m=4 d=3", None, Box::new(criterion_8)),
        ("property suite", Some(5.0), Box::new(criterion_9)),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let (out, elapsed) = timed(run);
        let secs = elapsed.as_secs_f64();
        let in_budget = budget.is_none_or(|b| secs < b);
        let pass = out.pass && in_budget;
        let budget_note = match budget {
            Some(b) if !in_budget => format!(", over the {b} s budget"),
            Some(b) => format!(", budget {b} s"),
            None => String::new(),
        };
        println!(
            "criterion {}: {} [{name}] {} ({secs:.2} s{budget_note})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
