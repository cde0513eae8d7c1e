//! Shared fixtures for integration tests.
//!
//! Large-scale checks need English text. No corpus ships with the crate, so
//! [`english_corpus`] generates an encyclopedia-flavoured English sample
//! from a fixed seed: Zipf-distributed vocabulary over real function words,
//! content words, names and multi-word names, years and punctuation, one
//! paragraph per line. Set `RGRAM_ENGLISH_CORPUS` to a UTF-8 file to use
//! real text instead; it is repeated if shorter than requested.

#![allow(dead_code)]

use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod oracles;

pub const CORPUS_ENV: &str = "RGRAM_ENGLISH_CORPUS";

const FUNCTION_WORDS: &[(&str, u32)] = &[
    ("the", 600),
    ("of", 330),
    ("and", 280),
    ("in", 240),
    ("to", 220),
    ("a", 200),
    ("was", 130),
    ("is", 110),
    ("for", 90),
    ("as", 85),
    ("on", 80),
    ("by", 75),
    ("with", 72),
    ("he", 65),
    ("that", 60),
    ("at", 55),
    ("from", 55),
    ("his", 50),
    ("it", 48),
    ("an", 40),
    ("were", 38),
    ("which", 36),
    ("are", 35),
    ("also", 30),
    ("this", 30),
    ("be", 28),
    ("has", 27),
    ("had", 27),
    ("or", 26),
    ("first", 25),
    ("their", 24),
    ("after", 23),
    ("its", 23),
    ("she", 22),
    ("her", 22),
    ("but", 21),
    ("who", 21),
    ("not", 20),
    ("they", 19),
    ("one", 19),
    ("two", 16),
    ("new", 16),
    ("have", 16),
    ("been", 15),
    ("other", 14),
    ("during", 13),
    ("when", 13),
    ("into", 12),
    ("there", 12),
    ("more", 12),
    ("time", 12),
    ("all", 11),
    ("would", 10),
    ("between", 10),
    ("only", 9),
    ("over", 9),
    ("under", 8),
    ("most", 8),
    ("three", 8),
    ("where", 7),
    ("while", 7),
    ("about", 7),
    ("many", 7),
    ("several", 6),
    ("before", 6),
    ("through", 6),
    ("became", 6),
    ("later", 6),
    ("until", 5),
    ("since", 5),
    ("both", 5),
    ("some", 5),
    ("these", 5),
    ("than", 5),
    ("such", 4),
    ("being", 4),
    ("each", 4),
];

const NOUNS: &[&str] = &[
    "city",
    "school",
    "team",
    "season",
    "game",
    "film",
    "album",
    "song",
    "river",
    "village",
    "county",
    "district",
    "state",
    "party",
    "church",
    "station",
    "club",
    "league",
    "family",
    "book",
    "series",
    "year",
    "war",
    "world",
    "government",
    "university",
    "company",
    "music",
    "army",
    "history",
    "population",
    "area",
    "member",
    "player",
    "group",
    "road",
    "line",
    "building",
    "court",
    "house",
    "park",
    "island",
    "border",
    "region",
    "language",
    "water",
    "century",
    "king",
    "president",
    "minister",
    "council",
    "election",
    "record",
    "award",
    "championship",
    "tournament",
    "match",
    "goal",
    "career",
    "band",
    "role",
    "character",
    "episode",
    "novel",
    "author",
    "artist",
    "painter",
    "writer",
    "singer",
    "actor",
    "director",
    "producer",
    "system",
    "network",
    "service",
    "program",
    "project",
    "report",
    "museum",
    "library",
    "college",
    "hospital",
    "airport",
    "bridge",
    "tower",
    "castle",
    "temple",
    "mountain",
    "lake",
    "valley",
    "forest",
    "coast",
    "port",
    "market",
    "industry",
    "product",
    "species",
    "genus",
    "family",
    "plant",
    "animal",
    "bird",
    "fish",
    "insect",
    "tree",
    "flower",
    "battle",
    "treaty",
    "empire",
    "kingdom",
    "republic",
    "province",
    "capital",
    "town",
    "community",
    "census",
    "household",
    "income",
    "average",
    "age",
    "people",
    "children",
    "students",
    "members",
    "years",
    "games",
    "points",
    "days",
    "months",
    "miles",
    "feet",
    "record",
    "label",
    "studio",
    "version",
    "track",
    "chart",
    "number",
    "position",
    "title",
    "office",
    "board",
    "committee",
    "department",
    "agency",
    "force",
    "navy",
    "ship",
    "aircraft",
    "engine",
    "car",
    "train",
    "route",
    "highway",
    "street",
    "square",
    "field",
    "stadium",
];

const ADJECTIVES: &[&str] = &[
    "national",
    "american",
    "british",
    "french",
    "german",
    "english",
    "international",
    "local",
    "public",
    "former",
    "early",
    "late",
    "large",
    "small",
    "major",
    "main",
    "new",
    "old",
    "high",
    "low",
    "short",
    "long",
    "first",
    "second",
    "third",
    "final",
    "original",
    "general",
    "royal",
    "central",
    "northern",
    "southern",
    "eastern",
    "western",
    "political",
    "military",
    "professional",
    "popular",
    "famous",
    "official",
    "independent",
    "private",
    "social",
    "economic",
    "musical",
    "historic",
    "ancient",
    "modern",
    "common",
    "rare",
    "annual",
    "regional",
    "federal",
    "young",
    "only",
    "best",
    "total",
    "current",
    "next",
    "previous",
];

const VERBS: &[&str] = &[
    "born",
    "known",
    "located",
    "released",
    "published",
    "founded",
    "established",
    "built",
    "named",
    "elected",
    "appointed",
    "married",
    "played",
    "directed",
    "produced",
    "written",
    "recorded",
    "won",
    "lost",
    "joined",
    "left",
    "returned",
    "moved",
    "died",
    "served",
    "became",
    "received",
    "created",
    "designed",
    "opened",
    "closed",
    "completed",
    "used",
    "described",
    "considered",
    "included",
    "signed",
    "formed",
    "called",
    "listed",
    "held",
    "owned",
    "operated",
    "acquired",
    "replaced",
    "defeated",
    "scored",
    "finished",
    "reached",
];

const NAMES: &[&str] = &[
    "john",
    "william",
    "james",
    "george",
    "charles",
    "thomas",
    "henry",
    "robert",
    "david",
    "richard",
    "michael",
    "edward",
    "peter",
    "paul",
    "mary",
    "elizabeth",
    "anne",
    "sarah",
    "margaret",
    "jane",
    "smith",
    "jones",
    "brown",
    "johnson",
    "williams",
    "miller",
    "davis",
    "wilson",
    "taylor",
    "clark",
    "walker",
    "wright",
    "scott",
    "green",
    "baker",
    "hill",
    "london",
    "paris",
    "berlin",
    "chicago",
    "boston",
    "texas",
    "california",
    "florida",
    "ohio",
    "virginia",
    "canada",
    "australia",
    "india",
    "china",
    "japan",
    "france",
    "germany",
    "italy",
    "spain",
    "ireland",
    "scotland",
    "england",
    "europe",
    "africa",
    "asia",
    "russia",
];

const MULTIWORD: &[&str] = &[
    "united states",
    "new york",
    "united kingdom",
    "world war ii",
    "world war i",
    "los angeles",
    "high school",
    "football club",
    "national park",
    "new zealand",
    "south africa",
    "prime minister",
    "civil war",
    "san francisco",
    "north carolina",
    "new jersey",
    "air force",
    "supreme court",
    "soviet union",
    "hong kong",
    "major league baseball",
    "olympic games",
    "european union",
    "house of representatives",
    "university of california",
    "new south wales",
    "village in the administrative district",
];

const SYLLABLES: &[&str] = &[
    "ka", "lo", "ri", "ven", "mar", "tel", "son", "ber", "ton", "ville", "ham", "ford", "ley",
    "wood", "stein", "berg", "ov", "ski", "an", "el", "ia", "or", "in", "us", "ra", "mi", "do",
    "ne", "sa", "ta", "ger", "lin", "mont", "dale", "ric", "ard", "eth", "is", "os",
];

fn zipf_weights(n: usize, exponent: f64) -> Vec<f64> {
    (1..=n).map(|r| 1.0 / (r as f64).powf(exponent)).collect()
}

struct Lexicon {
    function: (Vec<&'static str>, WeightedIndex<u32>),
    nouns: WeightedIndex<f64>,
    adjectives: WeightedIndex<f64>,
    verbs: WeightedIndex<f64>,
    names: WeightedIndex<f64>,
    multiword: WeightedIndex<f64>,
    rare: Vec<String>,
    rare_dist: WeightedIndex<f64>,
}

impl Lexicon {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let rare: Vec<String> = (0..30_000)
            .map(|_| {
                let n = rng.gen_range(2..=4);
                (0..n)
                    .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
                    .collect()
            })
            .collect();
        Lexicon {
            function: (
                FUNCTION_WORDS.iter().map(|w| w.0).collect(),
                WeightedIndex::new(FUNCTION_WORDS.iter().map(|w| w.1)).unwrap(),
            ),
            nouns: WeightedIndex::new(zipf_weights(NOUNS.len(), 1.0)).unwrap(),
            adjectives: WeightedIndex::new(zipf_weights(ADJECTIVES.len(), 1.0)).unwrap(),
            verbs: WeightedIndex::new(zipf_weights(VERBS.len(), 1.0)).unwrap(),
            names: WeightedIndex::new(zipf_weights(NAMES.len(), 0.9)).unwrap(),
            multiword: WeightedIndex::new(zipf_weights(MULTIWORD.len(), 1.1)).unwrap(),
            rare_dist: WeightedIndex::new(zipf_weights(rare.len(), 1.05)).unwrap(),
            rare,
        }
    }

    fn word(&self, rng: &mut ChaCha8Rng, out: &mut String) {
        let pick = rng.gen_range(0..100);
        let w: &str = match pick {
            0..=44 => self.function.0[self.function.1.sample(rng)],
            45..=61 => NOUNS[self.nouns.sample(rng)],
            62..=69 => ADJECTIVES[self.adjectives.sample(rng)],
            70..=78 => VERBS[self.verbs.sample(rng)],
            79..=84 => NAMES[self.names.sample(rng)],
            85..=87 => MULTIWORD[self.multiword.sample(rng)],
            _ => &self.rare[self.rare_dist.sample(rng)],
        };
        out.push_str(w);
    }
}

fn capitalize_last_sentence_start(out: &mut String, start: usize) {
    if let Some(c) = out[start..].chars().next() {
        if c.is_ascii_lowercase() {
            out.replace_range(start..start + 1, &c.to_ascii_uppercase().to_string());
        }
    }
}

/// Appends one sentence built from templates and free word runs.
fn sentence(lex: &Lexicon, rng: &mut ChaCha8Rng, out: &mut String) {
    let start = out.len();
    let noun = |rng: &mut ChaCha8Rng| NOUNS[lex.nouns.sample(rng)];
    let name = |rng: &mut ChaCha8Rng| NAMES[lex.names.sample(rng)];
    let year = |rng: &mut ChaCha8Rng| rng.gen_range(1800..2021);
    match rng.gen_range(0..10) {
        0 => {
            let (a, b) = (name(rng), name(rng));
            out.push_str(&format!(
                "{a} {b} (born {}) is an {} {}",
                year(rng),
                ["american", "english", "australian", "indian", "irish"][rng.gen_range(0..5)],
                ["actor", "author", "politician", "footballer", "singer"][rng.gen_range(0..5)]
            ));
        }
        1 => {
            let n = noun(rng);
            out.push_str(&format!(
                "the {n} was {} in {} by {}",
                VERBS[lex.verbs.sample(rng)],
                year(rng),
                name(rng)
            ));
        }
        2 => {
            let m = MULTIWORD[lex.multiword.sample(rng)];
            out.push_str(&format!(
                "it is located in the {} part of {m}",
                ["northern", "southern", "eastern", "western", "central"][rng.gen_range(0..5)]
            ));
        }
        3 => {
            out.push_str(&format!(
                "in {}, the population was {},{:03}",
                year(rng),
                rng.gen_range(1..500),
                rng.gen_range(0..1000)
            ));
        }
        _ => {
            let len = rng.gen_range(6..22);
            for i in 0..len {
                if i > 0 {
                    out.push(' ');
                }
                if rng.gen_bool(0.03) {
                    out.push_str(&year(rng).to_string());
                } else {
                    lex.word(rng, out);
                }
                if i + 1 < len && rng.gen_bool(0.06) {
                    out.push(',');
                }
            }
        }
    }
    out.push(if rng.gen_bool(0.97) { '.' } else { ';' });
    capitalize_last_sentence_start(out, start);
}

/// Deterministic English-like text of at least `bytes` bytes, one
/// paragraph per line.
pub fn synthetic_english(bytes: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lex = Lexicon::new(&mut rng);
    let mut out = String::with_capacity(bytes + 1024);
    while out.len() < bytes {
        let sentences = rng.gen_range(2..9);
        for i in 0..sentences {
            if i > 0 {
                out.push(' ');
            }
            sentence(&lex, &mut rng, &mut out);
        }
        out.push('\n');
    }
    out
}

/// English text of at least `bytes` bytes, ending on a paragraph boundary:
/// the file named by `RGRAM_ENGLISH_CORPUS` if set (repeated as needed),
/// otherwise [`synthetic_english`].
pub fn english_corpus(bytes: usize) -> String {
    match std::env::var_os(CORPUS_ENV) {
        Some(path) => {
            let text = std::fs::read_to_string(Path::new(&path))
                .unwrap_or_else(|e| panic!("{CORPUS_ENV}={path:?}: {e}"));
            assert!(!text.is_empty(), "{CORPUS_ENV} names an empty file");
            let mut out = String::with_capacity(bytes + text.len());
            while out.len() < bytes {
                out.push_str(&text);
                if !out.ends_with('\n') {
                    out.push('\n');
                }
            }
            truncate_at_line(out, bytes)
        }
        None => truncate_at_line(synthetic_english(bytes, 2019), bytes),
    }
}

/// Shortest prefix of at least `bytes` bytes that ends with a newline.
fn truncate_at_line(mut text: String, bytes: usize) -> String {
    if let Some(i) = text[bytes.min(text.len())..].find('\n') {
        text.truncate(bytes.min(text.len()) + i + 1);
    }
    text
}

pub const MB: usize = 1 << 20;
