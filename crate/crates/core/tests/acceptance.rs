//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Set `ONTONOTES_CONLL_DIR` to a directory holding `train/`, `dev/` and
//! `test/` subdirectories of `*_conll` files to also check the full-corpus
//! pronoun counts.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Instant;

use openpronoun::conll::{parse_conll, write_conll};
use openpronoun::delex::{
    delex_document, delex_text, relexicalize, DelexMode, DelexReport, RelexOptions, PRP, PRP_POSS,
};
use openpronoun::miner::{rank_frequency, Miner, MinerConfig, TokenCount};
use openpronoun::profile::IndividualProfile;
use openpronoun::registry::{Case, PronounCategory, PronounRegistry};
use openpronoun::scorer::{
    b_cubed, ceaf_phi4, ceaf_phi4_similarity, conll_average, muc_score, Clustering, ScoreTriple,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn triple_eq(label: &str, got: ScoreTriple, want: (f64, f64, f64), tol: f64) -> Result<(), String> {
    ensure(
        close(got.precision, want.0, tol)
            && close(got.recall, want.1, tol)
            && close(got.f1, want.2, tol),
        || format!("{label}: got {got:?}, want {want:?}"),
    )
}

fn clustering(chains: &common::Chains) -> Clustering<usize> {
    Clustering::new(chains.clone()).expect("oracle chains are disjoint")
}

fn scorer_worked_example() -> Outcome {
    let key = vec![vec![0, 1, 2], vec![3, 4]];
    let response = vec![vec![0, 1], vec![2, 3], vec![4]];
    let (k, r) = (clustering(&key), clustering(&response));
    let tol = 1e-6;

    // frozen from hand computation: MUC 1/2, 1/3; B3 4/5, 8/15; CEAF 22/45, 11/15
    let muc = muc_score(&k, &r);
    let b3 = b_cubed(&k, &r);
    let ceaf = ceaf_phi4(&k, &r);
    triple_eq("MUC", muc, (0.5, 1.0 / 3.0, 0.4), tol)?;
    triple_eq("B3", b3, (0.8, 8.0 / 15.0, 0.64), tol)?;
    triple_eq(
        "CEAF",
        ceaf,
        (22.0 / 45.0, 11.0 / 15.0, 0.586_666_666_7),
        tol,
    )?;
    let avg = conll_average(muc, b3, ceaf).f1;
    ensure(close(avg, 0.542_222_222_2, tol), || format!("AVG F1 {avg}"))?;

    triple_eq("MUC vs oracle", muc, common::muc(&key, &response), tol)?;
    triple_eq("B3 vs oracle", b3, common::b_cubed(&key, &response), tol)?;
    triple_eq("CEAF vs oracle", ceaf, common::ceaf(&key, &response), tol)?;

    // the same example read from CoNLL files
    let kd = parse_conll(&std::fs::read(data_dir().join("worked_key.conll")).unwrap()).unwrap();
    let rd =
        parse_conll(&std::fs::read(data_dir().join("worked_response.conll")).unwrap()).unwrap();
    let report = openpronoun::scorer::score_corpus(&kd, &rd).map_err(|e| e.to_string())?;
    ensure(close(report.avg.f1, avg, 1e-12), || {
        format!("file AVG {}", report.avg.f1)
    })?;

    Ok(format!(
        "MUC F1 {:.4}, B3 F1 {:.4}, CEAF F1 {:.4}, AVG {:.4}",
        muc.f1, b3.f1, ceaf.f1, avg
    ))
}

fn scorer_random_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c0e);
    let tol = 1e-9;
    for case in 0..200 {
        let n = rng.gen_range(1..=10);
        let key = common::random_chains(&mut rng, n, 6);
        let response = common::random_chains(&mut rng, n, 6);
        let (k, r) = (clustering(&key), clustering(&response));
        let label = |m: &str| format!("case {case} {m} key={key:?} response={response:?}");
        triple_eq(
            &label("MUC"),
            muc_score(&k, &r),
            common::muc(&key, &response),
            tol,
        )?;
        triple_eq(
            &label("B3"),
            b_cubed(&k, &r),
            common::b_cubed(&key, &response),
            tol,
        )?;
        triple_eq(
            &label("CEAF"),
            ceaf_phi4(&k, &r),
            common::ceaf(&key, &response),
            tol,
        )?;
        let (fast, slow) = (
            ceaf_phi4_similarity(&k, &r),
            common::ceaf_similarity(&key, &response),
        );
        ensure(close(fast, slow, tol), || {
            label(&format!("alignment {fast} vs {slow}"))
        })?;
    }
    Ok("200 random clusterings agree with the reference".into())
}

fn scorer_table_average() -> Outcome {
    let f = |f1| ScoreTriple {
        precision: 0.0,
        recall: 0.0,
        f1,
    };
    let avg = conll_average(f(86.1), f(79.5), f(76.1)).f1;
    ensure(close(avg, 80.6, 0.05), || format!("average {avg}"))?;
    Ok(format!("mean of 86.1, 79.5, 76.1 = {avg:.4}"))
}

/// PRP and PRP$ counts straight from the POS column.
fn scan_pos_counts(bytes: &[u8]) -> (u64, u64) {
    let text = std::str::from_utf8(bytes).unwrap();
    let (mut prp, mut poss) = (0, 0);
    for line in text.lines() {
        if line.starts_with('#') {
            continue;
        }
        match line.split_whitespace().nth(4) {
            Some("PRP") => prp += 1,
            Some("PRP$") => poss += 1,
            _ => {}
        }
    }
    (prp, poss)
}

fn delex_split(files: &[PathBuf], split: &str) -> Result<(DelexReport, (u64, u64)), String> {
    let mut report = DelexReport::new();
    let mut scanned = (0, 0);
    for file in files {
        let bytes = std::fs::read(file).map_err(|e| format!("{}: {e}", file.display()))?;
        let (p, q) = scan_pos_counts(&bytes);
        scanned.0 += p;
        scanned.1 += q;
        let docs = parse_conll(&bytes).map_err(|e| format!("{}: {e}", file.display()))?;
        for doc in &docs {
            let (out, r) = delex_document(doc, DelexMode::Paper).map_err(|e| e.to_string())?;
            ensure(out.token_count() == doc.token_count(), || {
                "token count changed".into()
            })?;
            ensure(out.chains == doc.chains, || "chains changed".into())?;
            report.merge(r.relabel(split));
        }
    }
    Ok((report, scanned))
}

fn delex_synthetic() -> Outcome {
    // counted independently with a POS-column scan when the corpus was
    // generated (see tests/data/make_synthetic.py)
    let expected: [(&str, u64, u64); 3] =
        [("train", 509, 133), ("dev", 123, 19), ("test", 125, 30)];
    let mut report = DelexReport::new();
    let mut sentences = 0;
    for (split, prp, poss) in expected {
        let path = data_dir().join(format!("synthetic_{split}.conll"));
        let docs = parse_conll(&std::fs::read(&path).unwrap()).map_err(|e| e.to_string())?;
        sentences += docs.iter().map(|d| d.sentences.len()).sum::<usize>();
        let (r, scanned) = delex_split(&[path], split)?;
        ensure(scanned == (prp, poss), || {
            format!("{split}: scan {scanned:?}")
        })?;
        ensure(
            r.count(PRP, split) == prp && r.count(PRP_POSS, split) == poss,
            || {
                format!(
                    "{split}: delex {}/{}",
                    r.count(PRP, split),
                    r.count(PRP_POSS, split)
                )
            },
        )?;
        report.merge(r);
    }
    ensure(sentences == 500, || format!("{sentences} sentences"))?;
    let want = "placeholder\ttrain\tdev\ttest\ttotal\n\
                PRP\t509\t123\t125\t757\n\
                PRP$\t133\t19\t30\t182\n\
                Total\t642\t142\t155\t939\n";
    ensure(report.to_tsv() == want, || {
        format!("table:\n{}", report.to_tsv())
    })?;

    let ontonotes = match std::env::var_os("ONTONOTES_CONLL_DIR") {
        None => "licensed full corpus not available, skipped".to_owned(),
        Some(dir) => delex_ontonotes(Path::new(&dir))?,
    };
    Ok(format!(
        "synthetic 500 sentences, total {}; {ontonotes}",
        report.total()
    ))
}

fn conll_files_under(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            conll_files_under(&p, out)?;
        } else if p.to_string_lossy().ends_with("_conll") {
            out.push(p);
        }
    }
    Ok(())
}

fn delex_ontonotes(dir: &Path) -> Outcome {
    let expected: [(&str, u64, u64); 3] = [
        ("train", 64_476, 14_535),
        ("dev", 7_881, 1_783),
        ("test", 8_067, 1_935),
    ];
    let mut total = 0;
    for (split, prp, poss) in expected {
        let mut files = Vec::new();
        conll_files_under(&dir.join(split), &mut files).map_err(|e| e.to_string())?;
        let (r, _) = delex_split(&files, split)?;
        let got = (r.count(PRP, split), r.count(PRP_POSS, split));
        ensure(got == (prp, poss), || {
            format!("full corpus {split}: {got:?}")
        })?;
        total += r.total();
    }
    ensure(total == 98_677, || format!("full corpus total {total}"))?;
    Ok(format!("full corpus total {total}"))
}

const FILLER: &[&str] = &[
    "the",
    "a",
    "friend",
    "said",
    "that",
    "would",
    "bring",
    "book",
    "to",
    "called",
    "yesterday",
    "garden",
    "and",
    "saw",
    "was",
    "ready",
    "quickly",
    "because",
    "for",
    "kept",
    "lamp",
];

/// (template, slots) where `{}` marks a pronoun of the given case.
const SHAPES: &[&[&str]] = &[
    &[
        "NOM", "said", "that", "NOM", "would", "bring", "DEP", "book", "to", "ACC", ".",
    ],
    &["the", "lamp", "is", "IND", ",", "not", "ours", "."],
    &["NOM", "fixed", "the", "bike", "REFL", "yesterday", "."],
    &["everyone", "thanked", "ACC", "for", "DEP", "garden", "."],
    &["DEP", "friend", "saw", "ACC", "and", "NOM", "laughed", "."],
    &["NOM", "kept", "IND", "because", "NOM", "wanted", "ACC."],
];

fn case_of(slot: &str) -> Option<(Case, &str)> {
    let (core, rest) = slot.split_at(slot.find('.').unwrap_or(slot.len()));
    let case = match core {
        "NOM" => Case::Nominative,
        "ACC" => Case::Accusative,
        "DEP" => Case::PossessiveDependent,
        "IND" => Case::PossessiveIndependent,
        "REFL" => Case::Reflexive,
        _ => return None,
    };
    Some((case, rest))
}

fn delex_relex_round_trip() -> Outcome {
    let registry = PronounRegistry::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut pronouns = 0;
    for i in 0..1000 {
        let set = registry.sets().choose(&mut rng).unwrap();
        let shape = SHAPES.choose(&mut rng).unwrap();
        let mut words = Vec::new();
        for slot in shape.iter() {
            match case_of(slot) {
                Some((case, rest)) => {
                    pronouns += 1;
                    words.push(format!("{}{rest}", set.forms.get(case)));
                }
                None if rng.gen_bool(0.1) => {
                    words.push(FILLER.choose(&mut rng).unwrap().to_string());
                    words.push(slot.to_string());
                }
                None => words.push(slot.to_string()),
            }
        }
        let sentence = words.join(" ");
        let (delexed, _) = delex_text(&sentence, registry.lexicon(), DelexMode::Extended);
        let profile = IndividualProfile::single(set.id.clone());
        let back = relexicalize(&delexed, &profile, &registry, &RelexOptions::default())
            .map_err(|e| format!("sentence {i} {sentence:?}: {e}"))?;
        let same = back.split_whitespace().eq(sentence.split_whitespace());
        ensure(same, || {
            format!("sentence {i}: {sentence:?} -> {delexed:?} -> {back:?}")
        })?;
    }
    Ok(format!(
        "1000/1000 sentences restored ({pronouns} pronouns)"
    ))
}

fn miner_exactness() -> Outcome {
    const LINES: usize = 1_000_000;
    let planted: &[(&str, &str, u64)] = &[
        // (surface as written, normalized token, occurrences)
        ("xemself", "xemself", 40_000),
        ("Zirself,", "zirself", 12_500),
        ("(emself)", "emself", 5_000),
        ("🦄self", "🦄self", 3_000),
        ("starselves", "starselves", 3_000),
        ("un-vampself", "vampself", 777),
        ("THONSELF!", "thonself", 250),
        ("ⅶself", "ⅶself", 64),
        ("e\u{301}self", "\u{e9}self", 9),
        ("aerself", "aerself", 1),
    ];
    // tokens that must never be counted
    let noise = [
        "myself",
        "yourselves",
        "self",
        "do-it-yourself",
        "selves",
        "urself",
        "selfish",
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(1_000_000);
    let mut extra: Vec<Vec<&str>> = vec![Vec::new(); LINES];
    for &(surface, _, n) in planted {
        for _ in 0..n {
            extra[rng.gen_range(0..LINES)].push(surface);
        }
    }
    let words = [
        "the", "cat", "sat", "on", "mat", "and", "it", "was", "fine", "today",
    ];
    let lines: Vec<String> = extra
        .into_iter()
        .enumerate()
        .map(|(i, plants)| {
            let mut line = String::new();
            for k in 0..(i % 7 + 3) {
                line.push_str(words[(i + k * 3) % words.len()]);
                line.push(' ');
            }
            if i % 5 == 0 {
                line.push_str(noise[i % noise.len()]);
                line.push(' ');
            }
            for p in plants {
                line.push_str(p);
                line.push(' ');
            }
            line
        })
        .collect();

    let config = MinerConfig::default();
    let start = Instant::now();
    let mut single = Miner::new(&config);
    for l in &lines {
        single.feed_line(l);
    }
    let single = single.finish();

    let mut want: Vec<TokenCount> = planted
        .iter()
        .map(|&(_, tok, n)| TokenCount::new(tok, n))
        .collect();
    want.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.token.cmp(&b.token)));
    ensure(single == want, || format!("counts {single:?}"))?;

    let total: u64 = planted.iter().map(|p| p.2).sum();
    let table = rank_frequency(&single);
    ensure(table.total_mentions() == total, || {
        format!("rank total {}", table.total_mentions())
    })?;
    let mut by_count: BTreeMap<u64, u64> = BTreeMap::new();
    for &(_, _, n) in planted {
        *by_count.entry(n).or_insert(0) += 1;
    }
    let rows: Vec<(u64, u64)> = by_count.into_iter().rev().collect();
    ensure(table.rows == rows, || format!("rank rows {:?}", table.rows))?;

    for k in [2usize, 8, 32] {
        let size = LINES.div_ceil(k);
        let mut merged = Miner::new(&config);
        for chunk in lines.chunks(size) {
            let mut shard = Miner::new(&config);
            for l in chunk {
                shard.feed_line(l);
            }
            merged.merge(shard);
        }
        let merged = merged.finish();
        ensure(merged == single, || format!("k={k} differs"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{total} planted mentions over 1M lines, shards 2/8/32 agree, {secs:.1}s"
    ))
}

fn conll_round_trip() -> Outcome {
    let mut files: Vec<PathBuf> = std::fs::read_dir(data_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "conll"))
        .collect();
    files.sort();
    for f in &files {
        let bytes = std::fs::read(f).unwrap();
        let docs = parse_conll(&bytes).map_err(|e| format!("{}: {e}", f.display()))?;
        for doc in &docs {
            let rendered = doc.chains_to_column();
            let stored: Vec<Vec<&str>> = doc
                .sentences
                .iter()
                .map(|s| s.iter().map(|t| t.coref_column()).collect())
                .collect();
            ensure(rendered == stored, || {
                format!("{}: {} coreference column differs", f.display(), doc.id)
            })?;
        }
        let out = write_conll(&docs).map_err(|e| e.to_string())?;
        ensure(out == bytes, || {
            format!("{} differs after round trip", f.display())
        })?;
    }
    ensure(files.len() >= 5, || format!("only {} files", files.len()))?;
    Ok(format!("{} bundled files byte-identical", files.len()))
}

fn random_stem<R: Rng>(rng: &mut R) -> String {
    const POOLS: &[(u32, u32)] = &[
        (0x30, 0x39),       // digits
        (0x41, 0x5a),       // A-Z
        (0x61, 0x7a),       // a-z
        (0xc0, 0x24f),      // Latin extended
        (0x300, 0x36f),     // combining marks
        (0x391, 0x3c9),     // Greek
        (0x4e00, 0x4fff),   // CJK
        (0x2160, 0x2188),   // number forms
        (0x1f300, 0x1f5ff), // pictographs
        (0x1f600, 0x1f64f), // emoticons
        (0x1f900, 0x1f9ff), // supplemental symbols
    ];
    let len = rng.gen_range(1..=4);
    let mut s = String::new();
    while s.chars().count() < len {
        let (lo, hi) = POOLS[rng.gen_range(0..POOLS.len())];
        if let Some(c) = char::from_u32(rng.gen_range(lo..=hi)) {
            if !c.is_whitespace() {
                s.push(c);
            }
        }
    }
    s
}

fn registry_open_class() -> Outcome {
    let mut registry = PronounRegistry::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut emoji = 0;
    let mut digits = 0;
    let mut ids = HashMap::new();
    for _ in 0..1000 {
        let stem = random_stem(&mut rng);
        if stem.chars().any(|c| c as u32 >= 0x1f300) {
            emoji += 1;
        }
        if stem.chars().any(|c| c.is_ascii_digit()) {
            digits += 1;
        }
        let set = registry
            .derive_set_from_stem(&stem, PronounCategory::Custom)
            .map_err(|e| format!("stem {stem:?}: {e}"))?;
        ids.insert(stem, set.id.clone());
    }
    for (stem, id) in &ids {
        let set = registry.get(id).ok_or_else(|| format!("{id} lost"))?;
        for (case, form) in set.forms.iter() {
            let hits = registry.lookup_form(form);
            ensure(hits.iter().any(|(s, c)| &s.id == id && *c == case), || {
                format!("stem {stem:?}: {form:?} not found as {case}")
            })?;
        }
    }
    ensure(emoji > 0 && digits > 0, || {
        "generator missed emoji or digits".into()
    })?;
    Ok(format!(
        "1000 stems ({emoji} with emoji, {digits} with digits) registered and found"
    ))
}

fn main() {
    let criteria: &[Criterion] = &[
        ("scorer worked example", scorer_worked_example),
        ("scorer random oracle equivalence", scorer_random_oracle),
        ("scorer reported-average arithmetic", scorer_table_average),
        ("delexicalization exact counts", delex_synthetic),
        ("extended delex/relex round trip", delex_relex_round_trip),
        ("miner exactness and shard merge", miner_exactness),
        ("CoNLL byte round trip", conll_round_trip),
        ("registry open class", registry_open_class),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{ms} ms]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{ms} ms]");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
