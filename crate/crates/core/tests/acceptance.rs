//! End-to-end acceptance checks. One PASS/FAIL line per criterion; the
//! process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covruler::admissibility::{
    banded_report, circulant_report, is_sampler_general, is_sampler_nonuniform, kernel_dimension,
    universal_report, AdmissibilityReport,
};
use covruler::bounds::{cardinality_bounds, leech_tau};
use covruler::htbasis::{banded_basis, circulant_basis, standard_basis};
use covruler::randsamp::{draw_scheme, monte_carlo_threshold, Subspace};
use covruler::scheme::SamplingScheme;
use covruler::search::SearchBudget;
use covruler::sets::{periodize, IndexSet, Ruler, RulerKind};
use covruler::table::{compute_table, golden_table, Cell, GoldenRow, Provenance, TableOptions, TableRow};

const SEED: u64 = 0x5eed_2024;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn golden_row(golden: &[GoldenRow], n: usize) -> GoldenRow {
    *golden.iter().find(|g| g.n == n).expect("golden row")
}

fn table_with(opts: TableOptions) -> Vec<TableRow> {
    compute_table(5, 60, &golden_table(), &opts).expect("table range")
}

fn budget(limit_minutes: u64) -> SearchBudget {
    SearchBudget::unlimited().with_time_limit(Duration::from_secs(60 * limit_minutes))
}

/// Checks one table column: exact cells must be searched-optimal and equal
/// to the golden value, the rest must be at least feasible at it.
fn check_column(
    rows: &[TableRow],
    exact_up_to: usize,
    column: impl Fn(&TableRow) -> Cell,
    golden: impl Fn(&GoldenRow) -> usize,
    elapsed: Duration,
    limit_minutes: u64,
) -> Outcome {
    let table = golden_table();
    let mut bad = Vec::new();
    for row in rows {
        let cell = column(row);
        let want = golden(&golden_row(&table, row.n));
        let provenance_ok = if row.n <= exact_up_to {
            cell.provenance == Provenance::SearchedOptimal
        } else {
            cell.provenance != Provenance::Golden
        };
        if cell.value != want || !provenance_ok {
            bad.push(format!("N={} got {} ({:?}) want {}", row.n, cell.value, cell.provenance, want));
        }
    }
    let exact = rows.iter().filter(|r| column(r).provenance == Provenance::SearchedOptimal).count();
    let in_time = elapsed < Duration::from_secs(60 * limit_minutes);
    Outcome::check(
        bad.is_empty() && in_time,
        format!(
            "{exact} cells certified optimal, {} feasible, {:.1}s (limit {limit_minutes} min){}",
            rows.len() - exact,
            elapsed.as_secs_f64(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }
        ),
    )
}

fn criterion_linear(rows: &mut Vec<TableRow>) -> Outcome {
    let start = Instant::now();
    *rows = table_with(TableOptions {
        exact_lsr_up_to: 28,
        exact_hlsr_up_to: 0,
        exact_csr_up_to: 0,
        budget: budget(10),
    });
    check_column(rows, 28, |r| r.lsr, |g| g.lsr, start.elapsed(), 10)
}

fn criterion_half(rows: &mut Vec<TableRow>) -> Outcome {
    let start = Instant::now();
    *rows = table_with(TableOptions {
        exact_lsr_up_to: 0,
        exact_hlsr_up_to: 60,
        exact_csr_up_to: 0,
        budget: budget(15),
    });
    check_column(rows, 60, |r| r.hlsr, |g| g.hlsr, start.elapsed(), 15)
}

fn criterion_circular(rows: &mut Vec<TableRow>) -> Outcome {
    let start = Instant::now();
    *rows = table_with(TableOptions {
        exact_lsr_up_to: 0,
        exact_hlsr_up_to: 0,
        exact_csr_up_to: 32,
        budget: budget(20),
    });
    let mut out = check_column(rows, 32, |r| r.csr, |g| g.csr, start.elapsed(), 20);
    let at = |n: usize| rows.iter().find(|r| r.n == n).map(|r| r.csr.value);
    let pair = (at(20), at(21));
    out.pass &= pair == (Some(6), Some(5));
    out.detail += &format!("; N=20 -> {:?}, N=21 -> {:?}", pair.0, pair.1);
    out
}

fn random_subset(rng: &mut ChaCha8Rng, k: usize) -> IndexSet {
    let density = rng.random_range(0.2..0.8);
    let mut set: Vec<usize> = (0..k).filter(|_| rng.random_bool(density)).collect();
    if set.is_empty() {
        set.push(rng.random_range(0..k));
    }
    IndexSet::new(set)
}

fn agree(label: &str, reports: &[AdmissibilityReport], disagreements: &mut Vec<String>) {
    let first = &reports[0];
    if reports.iter().any(|r| r.admissible != first.admissible || r.rank != first.rank) {
        let summary: Vec<String> = reports.iter().map(|r| format!("{:?}:{}", r.method, r.rank)).collect();
        disagreements.push(format!("{label} [{}]", summary.join(" ")));
    }
}

fn criterion_equivalence() -> Outcome {
    const SETS: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut disagreements = Vec::new();
    let mut positives = [0usize; 3];
    for i in 0..SETS {
        let k = rng.random_range(4..=16);
        let s = random_subset(&mut rng, k);
        let scheme = SamplingScheme::non_uniform(s.clone(), k).unwrap();

        let toeplitz = standard_basis(k).unwrap();
        let reports = [
            universal_report(&s, k).unwrap(),
            is_sampler_nonuniform(&s, &toeplitz).unwrap(),
            is_sampler_general(&scheme, &toeplitz).unwrap(),
        ];
        positives[0] += usize::from(reports[0].admissible);
        agree(&format!("toeplitz #{i} K={k} {:?}", s.as_slice()), &reports, &mut disagreements);

        let circ = circulant_basis(k).unwrap();
        let reports = [
            circulant_report(&s, k).unwrap(),
            is_sampler_nonuniform(&s, &circ).unwrap(),
            is_sampler_general(&scheme, &circ).unwrap(),
        ];
        positives[1] += usize::from(reports[0].admissible);
        agree(&format!("circulant #{i} K={k} {:?}", s.as_slice()), &reports, &mut disagreements);
    }
    for i in 0..SETS {
        // periodic patterns half the time, so both banded regimes are exercised
        let (n, l) = loop {
            let l = *[1usize, 1, 2, 3].choose(&mut rng).unwrap();
            let n = rng.random_range(2..=16 / l);
            if (4..=16).contains(&(n * l)) {
                break (n, l);
            }
        };
        let k = n * l;
        let d = if l >= 2 && rng.random_bool(0.5) {
            rng.random_range(n..=n * (l - 1))
        } else {
            rng.random_range(0..k)
        };
        let base = random_subset(&mut rng, n);
        let s = periodize(&base, n, l).unwrap();
        let basis = banded_basis(k, d).unwrap();
        let scheme = SamplingScheme::non_uniform(s.clone(), k).unwrap();
        let reports = [
            banded_report(&base, n, l, d).unwrap(),
            is_sampler_nonuniform(&s, &basis).unwrap(),
            is_sampler_general(&scheme, &basis).unwrap(),
        ];
        positives[2] += usize::from(reports[0].admissible);
        agree(
            &format!("banded #{i} N={n} L={l} d={d} {:?}", base.as_slice()),
            &reports,
            &mut disagreements,
        );
    }
    Outcome::check(
        disagreements.is_empty(),
        format!(
            "{SETS} sets per subspace, admissible toeplitz/circulant/banded = {}/{}/{}, {} disagreements{}",
            positives[0],
            positives[1],
            positives[2],
            disagreements.len(),
            disagreements.first().map(|d| format!("; first: {d}")).unwrap_or_default()
        ),
    )
}

fn criterion_threshold() -> Outcome {
    const TRIALS: usize = 100;
    let mut failures = Vec::new();
    let mut events = 0;
    let mut cases = 0;
    for (n, l) in [(8, 1), (8, 2), (6, 3), (12, 1)] {
        let band = n.min(n * l - 1);
        for subspace in [Subspace::Toeplitz, Subspace::Circulant, Subspace::Banded(band)] {
            cases += 1;
            let rep = monte_carlo_threshold(n, l, subspace, TRIALS, SEED).unwrap();
            let min_m = rep.plan.min_m;
            let at = rep.rate_at(min_m).unwrap();
            let mut ok = at.rate == 1.0;
            if min_m >= 2 {
                ok &= rep.rate_at(min_m - 1).unwrap().rate == 0.0;
            }
            let case_events: usize = rep.rates.iter().map(|r| r.tolerance_events).sum();
            events += case_events;
            if !ok || case_events > 0 {
                let rates: Vec<String> = rep.rates.iter().map(|r| format!("M={}:{}", r.m, r.rate)).collect();
                failures.push(format!("(N={n},L={l},{subspace}) {} events={case_events}", rates.join(" ")));
            }
        }
    }
    Outcome::check(
        failures.is_empty(),
        format!(
            "{cases} cases x {TRIALS} trials, banded d = min(N, NL-1), min_M over distinct blocks, {events} tolerance events{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    )
}

fn criterion_kernel_law() -> Outcome {
    const DRAWS: usize = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let mut bad = Vec::new();
    let mut positive = 0;
    for draw in 0..DRAWS {
        let n: usize = rng.random_range(3..=9);
        let l: usize = rng.random_range(1..=3);
        let m_max = (1..=n).take_while(|m| m * m < 2 * n - 1).last().unwrap();
        let m = rng.random_range(1..=m_max);
        let k = n * l;
        let q = 2 * k - 1;
        let expected = q.saturating_sub(m * m * (2 * l - 1));
        positive += usize::from(expected > 0);
        let scheme = draw_scheme(m, n, l, rng.random()).unwrap();
        let got = kernel_dimension(&scheme, &standard_basis(k).unwrap()).unwrap();
        if got != expected {
            bad.push(format!("#{draw} N={n} L={l} M={m}: {got} != {expected}"));
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!(
            "{DRAWS} draws, {positive} with a nontrivial kernel, {} mismatches{}",
            bad.len(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }
        ),
    )
}

fn criterion_bounds(linear: &[TableRow], half: &[TableRow], circular: &[TableRow]) -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    let mut within = |len: usize, kind: RulerKind, cell: Cell, tag: &str, n: usize| {
        if cell.provenance != Provenance::SearchedOptimal {
            return;
        }
        checked += 1;
        let b = cardinality_bounds(len, kind);
        if cell.value < b.lower || cell.value > b.upper {
            bad.push(format!("{tag} N={n}: {} outside [{}, {}]", cell.value, b.lower, b.upper));
        }
    };
    for r in linear {
        within(r.n - 1, RulerKind::Linear, r.lsr, "LSR", r.n);
    }
    for r in half {
        within(r.n / 2, RulerKind::Linear, r.hlsr, "HLSR", r.n);
    }
    for r in circular {
        within(r.n - 1, RulerKind::Circular, r.csr, "CSR", r.n);
    }
    let tau = leech_tau();
    let tau_ok = (tau - 2.4345).abs() <= 1e-4;
    let b90 = cardinality_bounds(90, RulerKind::Linear);
    let bracket_ok = (b90.lower, b90.upper) == (15, 17) && (b90.lower..=b90.upper).contains(&16);
    Outcome::check(
        bad.is_empty() && checked > 0 && tau_ok && bracket_ok,
        format!(
            "{checked} optimal cells within brackets, tau = {tau:.6}, length-90 bracket [{}, {}]{}",
            b90.lower,
            b90.upper,
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }
        ),
    )
}

fn random_base(rng: &mut ChaCha8Rng, n: usize) -> IndexSet {
    if rng.random_bool(0.5) {
        // sparse-ish: start from the ends and a few interior marks
        let mut s = vec![0, n - 1];
        s.extend((1..n - 1).filter(|_| rng.random_bool(0.45)));
        IndexSet::new(s)
    } else {
        random_subset(rng, n)
    }
}

fn is_ruler(base: &IndexSet, n: usize, kind: RulerKind) -> bool {
    Ruler::new(base.clone(), n - 1, kind).map(|r| r.verify()).unwrap_or(false)
}

fn criterion_periodic() -> Outcome {
    const BASES: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut bad = Vec::new();
    let (mut lin_pos, mut circ_pos) = (0, 0);
    for i in 0..BASES {
        let n = rng.random_range(5..=12);
        let l = rng.random_range(2..=3);
        let k = n * l;
        let base = random_base(&mut rng, n);
        let s = periodize(&base, n, l).unwrap();
        let lin = is_ruler(&base, n, RulerKind::Linear);
        let circ = is_ruler(&base, n, RulerKind::Circular);
        lin_pos += usize::from(lin);
        circ_pos += usize::from(circ);
        let toeplitz = is_sampler_nonuniform(&s, &standard_basis(k).unwrap()).unwrap().admissible;
        let circulant = is_sampler_nonuniform(&s, &circulant_basis(k).unwrap()).unwrap().admissible;
        if toeplitz != lin || circulant != circ {
            bad.push(format!(
                "#{i} N={n} L={l} {:?}: toeplitz {toeplitz}/{lin}, circulant {circulant}/{circ}",
                base.as_slice()
            ));
        }
    }
    Outcome::check(
        bad.is_empty() && lin_pos > 0 && circ_pos > lin_pos && circ_pos < BASES,
        format!(
            "{BASES} bases, {lin_pos} linear rulers, {circ_pos} circular rulers, {} mismatches{}",
            bad.len(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }
        ),
    )
}

fn main() -> ExitCode {
    let mut linear = Vec::new();
    let mut half = Vec::new();
    let mut circular = Vec::new();
    let mut results: Vec<(&str, Outcome, Duration)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        println!(
            "{} {name}: {} [{:.1}s]",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
        results.push((name, out, elapsed));
    };
    run("1 linear rulers N=5..60", &mut || criterion_linear(&mut linear));
    run("2 half-length rulers N=5..60", &mut || criterion_half(&mut half));
    run("3 circular rulers N=5..60", &mut || criterion_circular(&mut circular));
    run("4 shortcut vs rank tests", &mut criterion_equivalence);
    run("5 random sampling threshold", &mut criterion_threshold);
    run("6 kernel dimension law", &mut criterion_kernel_law);
    run("7 bounds sanity", &mut || criterion_bounds(&linear, &half, &circular));
    run("8 periodic decomposition", &mut criterion_periodic);
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
