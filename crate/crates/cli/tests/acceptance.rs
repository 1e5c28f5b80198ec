//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use pcs_core::aggregate::YearBin;
use pcs_core::cache::{decode, encode, CacheEntry, FixtureSet};
use pcs_core::pipeline::analyze;
use pcs_core::spectrum::{chance_odds, detrend, normalize, score_to_f64, select_landmark, Score};
use pcs_core::{parse_query, CitedReference, CitingPatent, DataSource, FetchResult, Mode, PatentId, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn id(s: &str) -> PatentId {
    PatentId::parse(s).unwrap()
}

/// Twice the detrended value by explicit window enumeration and rank
/// counting, sharing no code with the library.
fn oracle_doubled(c: &[u64]) -> Vec<i64> {
    let n = c.len();
    if n < 3 {
        return vec![0; n];
    }
    (0..n)
        .map(|t| {
            let lo = t.saturating_sub(2);
            let hi = (t + 2).min(n - 1);
            let window: Vec<i64> = c[lo..=hi].iter().map(|&v| v as i64).collect();
            let rank = |k: usize| {
                let mut candidates: Vec<i64> = window
                    .iter()
                    .copied()
                    .filter(|v| window.iter().filter(|w| *w <= v).count() > k)
                    .collect();
                candidates.sort_unstable();
                candidates[0]
            };
            let m = window.len();
            let twice_median = if m % 2 == 1 { 2 * rank(m / 2) } else { rank(m / 2 - 1) + rank(m / 2) };
            2 * c[t] as i64 - twice_median
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2017);
    for case in 0..1000 {
        let len = rng.random_range(1..=12);
        let c: Vec<u64> = (0..len).map(|_| rng.random_range(0..=20)).collect();
        let got: Vec<Score> = detrend(&c);
        let want = oracle_doubled(&c);
        for (g, w) in got.iter().zip(&want) {
            ensure!(*g * Score::from_integer(2) == Score::from_integer(*w), "case {case}: {c:?} gives {got:?}, oracle 2f = {want:?}");
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("1000 series, {elapsed:.2?}"))
}

fn bin(year: i32, counts: &[(&str, u64)]) -> YearBin {
    YearBin::from_counts(year, counts.iter().map(|(p, n)| (id(p), *n)).collect()).unwrap()
}

fn substitution_checks() -> Outcome {
    // c = 1, 2, 10, 3, 2: the middle year has f = 10 - 2 = 8 and its top
    // patent holds 4 of 10 citations.
    let bins = vec![
        bin(2000, &[("5000001", 1)]),
        bin(2001, &[("5000002", 2)]),
        bin(2002, &[("5000003", 4), ("5000004", 3), ("5000005", 3)]),
        bin(2003, &[("5000006", 3)]),
        bin(2004, &[("5000007", 2)]),
    ];
    let s = Spectrum::from_bins(bins, Mode::Pcs).unwrap();
    ensure!(s.f[2] == Score::from_integer(8), "f = {}", s.f[2]);
    ensure!(score_to_f64(&s.pcs[2]) == 3.2, "pcs = {}", score_to_f64(&s.pcs[2]));

    let hand: [(i64, i64, u64, u64, f64); 5] = [
        // (f numerator, f denominator, top, total, expected)
        (8, 1, 4, 10, 3.2),
        (5, 1, 1, 4, 1.25),
        (-2, 1, 1, 2, -1.0),
        (1, 2, 2, 3, 1.0 / 3.0),
        (7, 1, 9, 9, 7.0),
    ];
    for (num, den, top, total, expected) in hand {
        // The remainder is spread so no other patent outranks the top one.
        let mut ids = vec!["6000001".to_string()];
        let mut sizes = vec![top];
        let mut rest = total - top;
        while rest > 0 {
            let n = rest.min(top.saturating_sub(1).max(1));
            ids.push(format!("{}", 6_000_002 + sizes.len() as u64));
            sizes.push(n);
            rest -= n;
        }
        let counts: Vec<(&str, u64)> = ids.iter().map(String::as_str).zip(sizes).collect();
        let bins: BTreeMap<i32, YearBin> = [(1990, bin(1990, &counts))].into_iter().collect();
        let pcs = normalize(&[Score::new(num, den)], 1990, &bins);
        ensure!(score_to_f64(&pcs[0]) == expected, "{num}/{den} at {top}/{total}: {}", pcs[0]);
    }

    // Full share everywhere: pcs is f.
    let bins: Vec<YearBin> = [3u64, 9, 4, 12, 5, 5]
        .iter()
        .enumerate()
        .map(|(i, n)| bin(1980 + i as i32, &[(&format!("{}", 4_000_000 + i), *n)]))
        .collect();
    let s = Spectrum::from_bins(bins, Mode::Pcs).unwrap();
    ensure!(s.pcs == s.f, "pcs {:?} != f {:?}", s.pcs, s.f);
    Ok("3.2 from f=8 at share 0.4; share 1 gives pcs = f".into())
}

type RawCorpus = Vec<(i32, Vec<u64>)>;

fn bins_from(raw: &RawCorpus, scale: u64) -> Vec<YearBin> {
    raw.iter()
        .filter_map(|(year, counts)| {
            let map = counts
                .iter()
                .enumerate()
                .map(|(i, n)| (id(&format!("{}", 2_000_000 + *year as u64 * 10 + i as u64)), n * scale))
                .collect();
            YearBin::from_counts(*year, map)
        })
        .collect()
}

fn scaling_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut corpora = 0;
    let mut with_landmark = 0;
    while corpora < 200 {
        let years = rng.random_range(3..=20);
        let mut raw = RawCorpus::new();
        for y in 0..years {
            if rng.random_bool(0.9) {
                let patents = rng.random_range(1..=5);
                raw.push((1970 + y, (0..patents).map(|_| rng.random_range(0..=15)).collect()));
            }
        }
        let Ok(base) = Spectrum::from_bins(bins_from(&raw, 1), Mode::Pcs) else {
            continue;
        };
        corpora += 1;
        for mode in [Mode::Pcs, Mode::Rpys] {
            let base = base.with_mode(mode);
            let before = select_landmark(&base, 1000, 5);
            with_landmark += usize::from(before.is_ok() && mode == Mode::Pcs);
            for k in [2u64, 7, 100] {
                let kk = Score::from_integer(k as i64);
                let scaled = Spectrum::from_bins(bins_from(&raw, k), mode).unwrap();
                for i in 0..base.len() {
                    ensure!(scaled.f[i] == base.f[i] * kk && scaled.pcs[i] == base.pcs[i] * kk, "corpus {corpora} k={k}: year index {i} did not scale");
                }
                match (&before, select_landmark(&scaled, 1000, 5)) {
                    (Ok(a), Ok(b)) => {
                        ensure!((a.year, &a.patent) == (b.year, &b.patent), "corpus {corpora} k={k}: {}/{} became {}/{}", a.patent, a.year, b.patent, b.year);
                        ensure!(b.score == a.score * kk, "corpus {corpora} k={k}: score {} vs {}", b.score, a.score);
                    }
                    (Err(a), Err(b)) => ensure!(*a == b, "error changed"),
                    (a, b) => return Err(format!("corpus {corpora} k={k}: {a:?} vs {b:?}")),
                }
            }
        }
    }
    Ok(format!("200 corpora x k in {{2, 7, 100}}, {with_landmark} with a PCS landmark"))
}

fn load(name: &str) -> FetchResult {
    FixtureSet::bundled().load(name).unwrap().payload
}

fn rnai_landmark() -> Outcome {
    let start = Instant::now();
    let fetch = load("rnai");
    let pcs = analyze(&fetch, Mode::Pcs, 5).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let landmark = pcs.landmark.map_err(|e| e.to_string())?;
    ensure!(landmark.patent == id("6506559") && landmark.year == 2003, "PCS picked {}/{}", landmark.patent, landmark.year);
    let rpys = analyze(&fetch, Mode::Rpys, 5).map_err(|e| e.to_string())?;
    let rpys_year = rpys.landmark.map_err(|e| e.to_string())?.year;
    ensure!(rpys_year == 2009, "RPYS peak {rpys_year}");
    ensure!(elapsed < Duration::from_secs(2), "took {elapsed:?}");
    Ok(format!("PCS 6506559/2003, RPYS 2009, {elapsed:.2?}"))
}

fn rnai_secondary_peak() -> Outcome {
    let a = analyze(&load("rnai"), Mode::Pcs, 5).map_err(|e| e.to_string())?;
    let top = &a.spectrum.bins.get(&2006).ok_or("no 2006 bin")?.top_id;
    ensure!(*top == id("7056704"), "2006 top is {top}");
    Ok("2006 top patent 7056704".into())
}

fn cholesterol_landmark() -> Outcome {
    let a = analyze(&load("cholesterol"), Mode::Pcs, 5).map_err(|e| e.to_string())?;
    let l = a.landmark.as_ref().map_err(|e| e.to_string())?;
    ensure!(l.patent == id("4681893") && l.year == 1987, "picked {}/{}", l.patent, l.year);
    for (year, want) in [(2011, "8030457"), (2013, "8563698")] {
        let top = &a.spectrum.bins.get(&year).ok_or(format!("no {year} bin"))?.top_id;
        ensure!(*top == id(want), "{year} top is {top}");
    }
    Ok("4681893/1987; 2011 -> 8030457, 2013 -> 8563698".into())
}

fn chance_odds_value() -> Outcome {
    let odds = chance_odds(4065);
    let rounded: f64 = format!("{odds:.1e}").parse().unwrap();
    ensure!(rounded == 0.00025, "{odds} rounds to {rounded}");
    Ok(format!("1/4065 = {odds:.6} -> {rounded}"))
}

fn deterministic_cli() -> Outcome {
    let cache = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_pcs"))
            .env_clear()
            .env("PCS_CACHE_DIR", cache.path())
            .args(["--fixture", "rnai", "--deterministic"])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    ensure!(a.status.success() && b.status.success(), "exit {:?} / {:?}", a.status, b.status);
    ensure!(!a.stdout.is_empty(), "empty report");
    ensure!(a.stdout == b.stdout, "reports differ");
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn random_id(rng: &mut ChaCha8Rng) -> PatentId {
    const PREFIXES: [&str; 11] = ["", "", "", "", "D", "PP", "RE", "H", "T", "X", "AI"];
    let prefix = PREFIXES[rng.random_range(0..PREFIXES.len())];
    id(&format!("{prefix}{}", rng.random_range(1..11_000_000u64)))
}

fn random_fetch(rng: &mut ChaCha8Rng) -> FetchResult {
    let mut patents: Vec<CitingPatent> = Vec::new();
    for _ in 0..rng.random_range(0..30) {
        let refs: Vec<CitedReference> = (0..rng.random_range(0..10))
            .map(|_| CitedReference {
                cited_id: random_id(rng),
                grant_year: rng.random_bool(0.8).then(|| rng.random_range(1836..=2025)),
            })
            .collect();
        let title: String = (0..rng.random_range(0..40))
            .map(|_| ['a', 'Z', ' ', '"', '\\', 'é', '\n', '∂', '7'][rng.random_range(0..9)])
            .collect();
        let date = NaiveDate::from_ymd_opt(rng.random_range(1976..=2025), rng.random_range(1..=12), rng.random_range(1..=28)).unwrap();
        let p = CitingPatent::new(random_id(rng), title, date, refs);
        if !patents.iter().any(|q| q.id == p.id) {
            patents.push(p);
        }
    }
    let n = patents.len() as u64;
    FetchResult {
        patents,
        total_reported: n,
        pages_fetched: u32::from(n > 0),
        source: [DataSource::Live, DataSource::Cache, DataSource::Fixture][rng.random_range(0..3)],
    }
}

fn cache_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let query = parse_query("cholesterol, \"LDL receptor\"").unwrap();
    let (mut unknown, mut prefixed) = (0, 0);
    for case in 0..500 {
        let payload = random_fetch(&mut rng);
        for r in payload.patents.iter().flat_map(|p| &p.cited) {
            unknown += usize::from(r.grant_year.is_none());
            prefixed += usize::from(!r.cited_id.is_utility());
        }
        let entry = CacheEntry::new(&query, "patentsview-legacy", 1000, "2017-02-21", payload);
        let text = encode(&entry);
        let back = decode(&text).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(back == entry, "case {case}: decoded entry differs");
        ensure!(encode(&back) == text, "case {case}: re-encoding differs");
    }
    ensure!(unknown > 0 && prefixed > 0, "generator produced no unknown years or prefixed ids");
    Ok(format!("500 results, {unknown} undated and {prefixed} letter-prefixed references"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence of detrending", oracle_equivalence),
        ("normalization substitution checks", substitution_checks),
        ("scaling and argmax invariance", scaling_invariance),
        ("RNAi fixture landmark, both modes", rnai_landmark),
        ("RNAi fixture secondary peak", rnai_secondary_peak),
        ("cholesterol fixture landmark and later peaks", cholesterol_landmark),
        ("chance odds for 4,065 references", chance_odds_value),
        ("deterministic CLI reports", deterministic_cli),
        ("cache encode/decode round trip", cache_round_trip),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let text = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {text}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
