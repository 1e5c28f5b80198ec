//! Regenerates the bundled `rnai` and `cholesterol` fixtures.
//!
//! The corpora are synthetic: citing patents, titles and the long tail of
//! cited references are drawn from a seeded generator, sized to the corpus
//! statistics of the February 2017 PatentsView snapshot (1,217 citing
//! patents with 4,065 unique references; 11,326 unique references) and
//! seeded with the landmark patents at their real grant years.
//!
//! ```text
//! cargo run -p pcs-core --example synthesize_fixtures [-- <out_dir>]
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use chrono::{DateTime, Datelike, NaiveDate, Utc, Weekday};
use pcs_core::cache::{encode, CacheEntry};
use pcs_core::pipeline::analyze;
use pcs_core::spectrum::Mode;
use pcs_core::{parse_query, CitedReference, CitingPatent, DataSource, FetchResult, PatentId};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// First utility patent number issued in each year.
const FIRST_NUMBER: &[(i32, u64)] = &[
    (1955, 2_698_434), (1956, 2_728_913), (1957, 2_775_762), (1958, 2_818_567),
    (1959, 2_866_973), (1960, 2_919_443), (1961, 2_966_681), (1962, 3_015_103),
    (1963, 3_070_801), (1964, 3_116_487), (1965, 3_163_865), (1966, 3_226_729),
    (1967, 3_295_143), (1968, 3_360_800), (1969, 3_419_907), (1970, 3_487_470),
    (1971, 3_551_909), (1972, 3_631_539), (1973, 3_707_729), (1974, 3_781_914),
    (1975, 3_858_241), (1976, 3_930_271), (1977, 4_000_000), (1978, 4_065_812),
    (1979, 4_131_952), (1980, 4_180_867), (1981, 4_242_757), (1982, 4_308_622),
    (1983, 4_366_579), (1984, 4_423_523), (1985, 4_490_885), (1986, 4_562_596),
    (1987, 4_633_526), (1988, 4_716_594), (1989, 4_794_652), (1990, 4_890_335),
    (1991, 4_980_927), (1992, 5_077_836), (1993, 5_175_886), (1994, 5_274_846),
    (1995, 5_377_359), (1996, 5_479_658), (1997, 5_590_420), (1998, 5_704_062),
    (1999, 5_855_021), (2000, 6_009_555), (2001, 6_167_569), (2002, 6_334_220),
    (2003, 6_502_244), (2004, 6_671_894), (2005, 6_836_899), (2006, 6_981_282),
    (2007, 7_155_746), (2008, 7_313_829), (2009, 7_472_428), (2010, 7_640_598),
    (2011, 7_861_317), (2012, 8_087_679), (2013, 8_341_762), (2014, 8_621_662),
    (2015, 8_925_111), (2016, 9_226_791), (2017, 9_532_689),
];

fn number_range(year: i32) -> (u64, u64) {
    let i = FIRST_NUMBER
        .iter()
        .position(|(y, _)| *y == year)
        .unwrap_or_else(|| panic!("no patent numbers for {year}"));
    (FIRST_NUMBER[i].1, FIRST_NUMBER[i + 1].1 - 1)
}

struct Landmark {
    id: &'static str,
    year: i32,
    citers: usize,
}

/// Extra citation mass spread thinly over many patents of one year.
struct Burst {
    year: i32,
    patents: usize,
    citers: usize,
}

struct Plan {
    name: &'static str,
    seed: u64,
    query: &'static str,
    citing_count: usize,
    citing_years: (i32, i32),
    citing_growth: f64,
    cited_years: (i32, i32),
    unique_target: usize,
    undated: usize,
    reissues: usize,
    /// Relative number of distinct cited patents per year.
    baseline_weight: fn(i32) -> f64,
    landmarks: Vec<Landmark>,
    bursts: Vec<Burst>,
    titles: &'static [&'static str],
    subjects: &'static [&'static str],
}

struct Generator {
    rng: ChaCha8Rng,
    used: HashSet<PatentId>,
}

impl Generator {
    fn fresh_id(&mut self, year: i32) -> PatentId {
        let (lo, hi) = number_range(year);
        loop {
            let id = PatentId::parse(&self.rng.random_range(lo..=hi).to_string()).unwrap();
            if self.used.insert(id.clone()) {
                return id;
            }
        }
    }

    fn fresh_reissue(&mut self) -> (PatentId, i32) {
        loop {
            let serial = self.rng.random_range(34_000..40_000u64);
            let id = PatentId::parse(&format!("RE{serial}")).unwrap();
            if self.used.insert(id.clone()) {
                // Reissue numbers 34xxx-39xxx were issued roughly 1992-2006.
                return (id, 1992 + ((serial - 34_000) / 430) as i32);
            }
        }
    }

    fn grant_date(&mut self, year: i32) -> NaiveDate {
        let week = self.rng.random_range(1..=51);
        NaiveDate::from_isoywd_opt(year, week, Weekday::Tue)
            .filter(|d| d.year() == year)
            .unwrap_or_else(|| NaiveDate::from_ymd_opt(year, 6, 1).unwrap())
    }

    /// Citations per baseline patent: mostly one or two.
    fn tail_count(&mut self) -> usize {
        match self.rng.random_range(0..100) {
            0..=49 => 1,
            50..=74 => 2,
            75..=89 => 3,
            90..=96 => 4,
            _ => 5,
        }
    }
}

fn weighted_counts(weights: &[(i32, f64)], total: usize) -> BTreeMap<i32, usize> {
    let sum: f64 = weights.iter().map(|(_, w)| w).sum();
    let mut counts: BTreeMap<i32, usize> = weights
        .iter()
        .map(|(y, w)| (*y, (w / sum * total as f64).floor() as usize))
        .collect();
    let mut short = total - counts.values().sum::<usize>();
    // Hand out the rounding remainder to the heaviest years.
    let mut by_weight: Vec<_> = weights.to_vec();
    by_weight.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (year, _) in by_weight.iter().cycle() {
        if short == 0 {
            break;
        }
        *counts.get_mut(year).unwrap() += 1;
        short -= 1;
    }
    counts
}

fn build(plan: &Plan) -> FetchResult {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(plan.seed),
        used: HashSet::new(),
    };
    for lm in &plan.landmarks {
        g.used.insert(PatentId::parse(lm.id).unwrap());
    }

    // Citing patents, growing towards the end of the window.
    let citing_weights: Vec<(i32, f64)> = (plan.citing_years.0..=plan.citing_years.1)
        .map(|y| (y, plan.citing_growth.powi(y - plan.citing_years.0)))
        .collect();
    let mut citing: Vec<(PatentId, i32, NaiveDate, String)> = Vec::new();
    for (year, n) in weighted_counts(&citing_weights, plan.citing_count) {
        for _ in 0..n {
            let id = g.fresh_id(year);
            let date = g.grant_date(year);
            let template = plan.titles[g.rng.random_range(0..plan.titles.len())];
            let subject = plan.subjects[g.rng.random_range(0..plan.subjects.len())];
            citing.push((id, year, date, template.replace("{}", subject)));
        }
    }
    citing.sort_by_key(|c| c.1);

    // (cited id, grant year, number of citing patents)
    let mut cited: Vec<(PatentId, Option<i32>, usize)> = Vec::new();
    for lm in &plan.landmarks {
        cited.push((PatentId::parse(lm.id).unwrap(), Some(lm.year), lm.citers));
    }
    for burst in &plan.bursts {
        for _ in 0..burst.patents {
            let id = g.fresh_id(burst.year);
            cited.push((id, Some(burst.year), burst.citers));
        }
    }
    for _ in 0..plan.reissues {
        let (id, year) = g.fresh_reissue();
        let n = g.tail_count();
        cited.push((id, Some(year), n));
    }
    for _ in 0..plan.undated {
        let year = g.rng.random_range(plan.cited_years.0..=plan.cited_years.1);
        let id = g.fresh_id(year);
        cited.push((id, None, 1));
    }
    let baseline_total = plan.unique_target - cited.len();
    let weights: Vec<(i32, f64)> = (plan.cited_years.0..=plan.cited_years.1)
        .map(|y| (y, (plan.baseline_weight)(y) * g.rng.random_range(0.8..1.2)))
        .collect();
    for (year, n) in weighted_counts(&weights, baseline_total) {
        for _ in 0..n {
            let id = g.fresh_id(year);
            let count = g.tail_count();
            cited.push((id, Some(year), count));
        }
    }

    // Each cited patent is cited by distinct patents granted after it.
    let mut refs: Vec<Vec<CitedReference>> = vec![Vec::new(); citing.len()];
    for (id, year, count) in cited {
        let eligible: Vec<usize> = (0..citing.len())
            .filter(|&i| year.is_none_or(|y| citing[i].1 > y))
            .collect();
        let count = count.min(eligible.len());
        for pick in sample(&mut g.rng, eligible.len(), count) {
            refs[eligible[pick]].push(CitedReference {
                cited_id: id.clone(),
                grant_year: year,
            });
        }
    }

    let mut patents: Vec<CitingPatent> = citing
        .into_iter()
        .zip(refs)
        .map(|((id, _, date, title), mut cited)| {
            cited.sort_by(|a, b| a.cited_id.cmp(&b.cited_id));
            CitingPatent::new(id, title, date, cited)
        })
        .collect();
    patents.sort_by(|a, b| a.id.cmp(&b.id));

    let n = patents.len() as u64;
    FetchResult {
        patents,
        total_reported: n,
        pages_fetched: n.div_ceil(1000) as u32,
        source: DataSource::Live,
    }
}

fn rnai_weight(year: i32) -> f64 {
    let rise = 1.16f64.powi(year - 1978);
    let lag = if year > 2006 { 0.80f64.powi(year - 2006) } else { 1.0 };
    rise * lag
}

fn cholesterol_weight(year: i32) -> f64 {
    let rise = 1.075f64.powi(year - 1958);
    let lag = if year > 2004 { 0.82f64.powi(year - 2004) } else { 1.0 };
    rise * lag
}

fn plans() -> Vec<Plan> {
    vec![
        Plan {
            name: "rnai",
            seed: 0x5EED_0001,
            query: r#"RNAi, "interference RNA", siRNA, "RNA interference""#,
            citing_count: 1217,
            citing_years: (2000, 2016),
            citing_growth: 1.17,
            cited_years: (1978, 2015),
            unique_target: 4065,
            undated: 14,
            reissues: 5,
            baseline_weight: rnai_weight,
            landmarks: vec![
                Landmark { id: "6506559", year: 2003, citers: 310 },
                Landmark { id: "7056704", year: 2006, citers: 150 },
                Landmark { id: "7595387", year: 2009, citers: 62 },
            ],
            bursts: vec![Burst { year: 2009, patents: 110, citers: 5 }],
            titles: &[
                "RNA interference mediated inhibition of {} gene expression",
                "siRNA compositions targeting {}",
                "Compositions and methods for RNAi silencing of {}",
                "Modified small interfering RNA molecules against {}",
                "Lipid formulations for delivery of interference RNA to {}",
                "Double-stranded RNA agents for inhibiting {} expression",
            ],
            subjects: &[
                "VEGF", "HIF-1 alpha", "hepatitis B virus", "PCSK9", "apolipoprotein B",
                "BCL2", "KRAS", "transthyretin", "TNF-alpha", "respiratory syncytial virus",
                "huntingtin", "survivin", "EGFR", "factor VII", "HIV-1",
            ],
        },
        Plan {
            name: "cholesterol",
            seed: 0x5EED_0002,
            query: "cholesterol",
            citing_count: 3184,
            citing_years: (1976, 2016),
            citing_growth: 1.06,
            cited_years: (1958, 2015),
            unique_target: 11_326,
            undated: 31,
            reissues: 12,
            baseline_weight: cholesterol_weight,
            landmarks: vec![
                Landmark { id: "4681893", year: 1987, citers: 430 },
                Landmark { id: "8030457", year: 2011, citers: 150 },
                Landmark { id: "8563698", year: 2013, citers: 120 },
            ],
            bursts: vec![],
            titles: &[
                "Method for lowering serum cholesterol using {}",
                "Enzymatic cholesterol assay with {}",
                "Cholesterol absorption inhibitors derived from {}",
                "Compositions comprising {} for reducing LDL cholesterol",
                "Cholesterol-lowering food product containing {}",
                "Antibodies to {} for treating hypercholesterolemia",
            ],
            subjects: &[
                "plant sterols", "HMG-CoA reductase inhibitors", "PCSK9", "bile acid sequestrants",
                "niacin", "psyllium", "omega-3 fatty acids", "policosanol", "ezetimibe analogues",
                "cholesterol oxidase", "stanol esters", "oat beta-glucan", "CETP", "fibrates",
            ],
        },
    ]
}

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&out_dir).unwrap();
    let created_at: DateTime<Utc> = "2026-10-19T00:00:00Z".parse().unwrap();

    for plan in plans() {
        let fetch = build(&plan);
        fetch.validate().unwrap();
        let query = parse_query(plan.query).unwrap();
        let mut entry = CacheEntry::new(
            &query,
            "patentsview-legacy",
            1000,
            "synthetic corpus generated 2026-10-19, sized to the 2017-02 PatentsView snapshot",
            fetch,
        );
        entry.created_at = created_at;

        let pcs = analyze(&entry.payload, Mode::Pcs, 5).unwrap();
        let rpys = analyze(&entry.payload, Mode::Rpys, 5).unwrap();
        let lm = pcs.landmark.as_ref().unwrap();
        println!(
            "{}: citing {} unique {} dropped {} | pcs {} {} | rpys {} {}",
            plan.name,
            pcs.stats.citing_count,
            pcs.stats.unique_cited_count,
            pcs.stats.dropped_unknown_year,
            lm.year,
            lm.patent,
            rpys.landmark.as_ref().unwrap().year,
            rpys.landmark.as_ref().unwrap().patent,
        );
        for p in &lm.runner_up_years {
            println!("  runner-up {} {} score {:.2}", p.year, p.patent, pcs_core::spectrum::score_to_f64(&p.score));
        }
        if std::env::var_os("SYNTH_DUMP").is_some() {
            let s = &pcs.spectrum;
            for (i, year) in s.years().enumerate() {
                let bin = s.bins.get(&year);
                println!(
                    "  {year} c={:5} f={:8.1} pcs={:8.2} top={:?}",
                    s.c[i],
                    pcs_core::spectrum::score_to_f64(&s.f[i]),
                    pcs_core::spectrum::score_to_f64(&s.pcs[i]),
                    bin.map(|b| (b.top_id.to_string(), b.top_count)),
                );
            }
        }

        let path = out_dir.join(format!("{}.pcs-cache", plan.name));
        std::fs::write(&path, encode(&entry)).unwrap();
        println!("  wrote {}", path.display());
    }
}
