//! Synthetic "alphabet economies" with known capability endowments.
//!
//! Letters stand for capabilities, locations hold a set of letters, and an
//! activity (a word) is feasible in a location only if every letter it needs
//! is present there. There is no partial credit: a location missing a single
//! letter cannot do the activity.
//!
//! # Random generator contract
//!
//! Worlds are reproducible across platforms. All draws come from
//! `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.3) through two
//! primitives:
//!
//! * `below(n)`: draw `x = next_u64()` until `x < n * floor(2^64 / n)`
//!   (computed as `(u64::MAX / n) * n`), return `x % n`.
//! * `subset(n, k)`: partial Fisher-Yates on `[0, n)`; for `i` in `0..k`
//!   swap position `i` with `i + below(n - i)`; the first `k` entries, sorted.
//!
//! Nested worlds draw, in order: for `P >= C` a Fisher-Yates shuffle of the
//! levels `0..C` (for `i` in `0..C-1`, swap `i` with `i + below(C - i)`)
//! assigned to the first `C` activities, then `below(C)` for each remaining
//! activity (for `P < C`, `below(C)` for every activity); then, activity by
//! activity, for each letter below its level in ascending order, one
//! `next_u64()` whose lowest bit decides membership.
//!
//! Random worlds draw `subset(A, letters_per_location)` for each location in
//! order, then for each activity repeatedly draw
//! `subset(A, letters_per_word)` until some location can do it.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use ndarray::Array2;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::incidence::{padded_labels, prune_degenerate, IncidenceError, IncidenceMatrix};
use crate::stats;

/// Draw budget per activity when sampling feasible requirements.
pub const MAX_REQUIREMENT_DRAWS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlphabetError {
    #[error("invalid world parameters: {0}")]
    InvalidParameters(String),
    #[error("activity {activity} is infeasible everywhere after {draws} draws")]
    InfeasibleWorld { activity: usize, draws: usize },
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
}

/// Letters, location endowments and activity requirements, by letter index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphabetWorld {
    pub letters: Vec<String>,
    pub location_labels: Vec<String>,
    pub endowments: Vec<BTreeSet<usize>>,
    pub activity_labels: Vec<String>,
    pub requirements: Vec<BTreeSet<usize>>,
    pub seed: u64,
}

/// `a, b, ..., z, aa, ab, ...`
pub fn letter_name(mut index: usize) -> String {
    let mut name = Vec::new();
    loop {
        name.push(b'a' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    name.reverse();
    String::from_utf8(name).expect("ascii")
}

struct Draws(ChaCha8Rng);

impl Draws {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    fn below(&mut self, n: usize) -> usize {
        let n = n as u64;
        let limit = (u64::MAX / n) * n;
        loop {
            let x = self.0.next_u64();
            if x < limit {
                return (x % n) as usize;
            }
        }
    }

    fn subset(&mut self, n: usize, k: usize) -> BTreeSet<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool[..k].iter().copied().collect()
    }

    fn coin(&mut self) -> bool {
        self.0.next_u64() & 1 == 1
    }
}

impl AlphabetWorld {
    pub fn new(
        letters: Vec<String>,
        endowments: Vec<BTreeSet<usize>>,
        requirements: Vec<BTreeSet<usize>>,
        seed: u64,
    ) -> Result<Self, AlphabetError> {
        let world = Self {
            location_labels: padded_labels("c", endowments.len()),
            activity_labels: padded_labels("p", requirements.len()),
            letters,
            endowments,
            requirements,
            seed,
        };
        world.validate()?;
        Ok(world)
    }

    pub fn validate(&self) -> Result<(), AlphabetError> {
        let a = self.letters.len();
        let bad = |s: &BTreeSet<usize>| s.iter().any(|&l| l >= a);
        if self.endowments.iter().any(bad) || self.requirements.iter().any(bad) {
            return Err(AlphabetError::InvalidWorld("set uses a letter outside the alphabet".into()));
        }
        if let Some(p) = self.requirements.iter().position(BTreeSet::is_empty) {
            return Err(AlphabetError::InvalidWorld(format!("activity {p} requires no letters")));
        }
        if self.location_labels.len() != self.endowments.len()
            || self.activity_labels.len() != self.requirements.len()
        {
            return Err(AlphabetError::InvalidWorld("label count mismatch".into()));
        }
        Ok(())
    }

    pub fn is_feasible(&self, location: usize, activity: usize) -> bool {
        self.requirements[activity].is_subset(&self.endowments[location])
    }

    /// Plain-text form: a header with the seed, the alphabet, then one
    /// `label: letters` line per location and per activity.
    pub fn to_text(&self) -> String {
        let names = |set: &BTreeSet<usize>| -> String {
            set.iter().map(|&l| self.letters[l].as_str()).collect::<Vec<_>>().join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "# alphabet world");
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "letters: {}", self.letters.join(" "));
        let _ = writeln!(out, "[locations]");
        for (label, set) in self.location_labels.iter().zip(&self.endowments) {
            let _ = writeln!(out, "{label}: {}", names(set));
        }
        let _ = writeln!(out, "[activities]");
        for (label, set) in self.activity_labels.iter().zip(&self.requirements) {
            let _ = writeln!(out, "{label}: {}", names(set));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, AlphabetError> {
        let err = |line: usize, message: &str| AlphabetError::Parse {
            line,
            message: message.to_string(),
        };
        let mut seed = None;
        let mut letters: Vec<String> = Vec::new();
        let mut section = 0;
        let mut locations = (Vec::new(), Vec::new());
        let mut activities = (Vec::new(), Vec::new());
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[locations]" => section = 1,
                "[activities]" => section = 2,
                _ => {
                    let (key, rest) = line.split_once(':').ok_or_else(|| err(line_no, "expected `key: value`"))?;
                    let (key, rest) = (key.trim(), rest.trim());
                    match (section, key) {
                        (0, "seed") => seed = Some(rest.parse().map_err(|_| err(line_no, "bad seed"))?),
                        (0, "letters") => letters = rest.split_whitespace().map(str::to_string).collect(),
                        (1 | 2, label) => {
                            let set = rest
                                .split_whitespace()
                                .map(|l| letters.iter().position(|x| x == l).ok_or_else(|| err(line_no, "unknown letter")))
                                .collect::<Result<BTreeSet<usize>, _>>()?;
                            let target = if section == 1 { &mut locations } else { &mut activities };
                            target.0.push(label.to_string());
                            target.1.push(set);
                        }
                        _ => return Err(err(line_no, "unexpected header key")),
                    }
                }
            }
        }
        let world = Self {
            letters,
            location_labels: locations.0,
            endowments: locations.1,
            activity_labels: activities.0,
            requirements: activities.1,
            seed: seed.ok_or_else(|| err(0, "missing seed"))?,
        };
        world.validate()?;
        Ok(world)
    }
}

/// World whose endowments form a strict chain: location `i` holds the first
/// `i + 1` letters. Each word's highest letter is its level; when there are
/// at least as many activities as locations, every level is used, so every
/// location has a distinct, nested set of feasible activities.
pub fn generate_nested_world(num_locations: usize, num_activities: usize, seed: u64) -> Result<AlphabetWorld, AlphabetError> {
    if num_locations < 2 {
        return Err(AlphabetError::InvalidParameters("need at least two locations".into()));
    }
    if num_activities == 0 {
        return Err(AlphabetError::InvalidParameters("need at least one activity".into()));
    }
    let c = num_locations;
    let mut draws = Draws::new(seed);
    let mut levels = Vec::with_capacity(num_activities);
    if num_activities >= c {
        let mut perm: Vec<usize> = (0..c).collect();
        for i in 0..c - 1 {
            let j = i + draws.below(c - i);
            perm.swap(i, j);
        }
        levels.extend(perm);
    }
    while levels.len() < num_activities {
        levels.push(draws.below(c));
    }
    let requirements = levels
        .iter()
        .map(|&level| {
            let mut word: BTreeSet<usize> = (0..level).filter(|_| draws.coin()).collect();
            word.insert(level);
            word
        })
        .collect();
    let endowments = (0..c).map(|i| (0..=i).collect()).collect();
    AlphabetWorld::new((0..c).map(letter_name).collect(), endowments, requirements, seed)
}

/// Parameters of [`generate_random_world`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomWorldParams {
    pub num_locations: usize,
    pub num_activities: usize,
    pub alphabet_size: usize,
    pub letters_per_location: usize,
    pub letters_per_word: usize,
    pub seed: u64,
}

/// Uniform fixed-size endowments and words; a word that no location can
/// produce is redrawn, up to [`MAX_REQUIREMENT_DRAWS`] times.
pub fn generate_random_world(params: RandomWorldParams) -> Result<AlphabetWorld, AlphabetError> {
    let RandomWorldParams {
        num_locations,
        num_activities,
        alphabet_size,
        letters_per_location,
        letters_per_word,
        seed,
    } = params;
    if letters_per_word == 0 || letters_per_word > letters_per_location || letters_per_location > alphabet_size {
        return Err(AlphabetError::InvalidParameters(format!(
            "need 1 <= letters_per_word ({letters_per_word}) <= letters_per_location ({letters_per_location}) <= alphabet_size ({alphabet_size})"
        )));
    }
    if num_locations == 0 || num_activities == 0 {
        return Err(AlphabetError::InvalidParameters("need at least one location and one activity".into()));
    }
    let mut draws = Draws::new(seed);
    let endowments: Vec<BTreeSet<usize>> = (0..num_locations)
        .map(|_| draws.subset(alphabet_size, letters_per_location))
        .collect();
    let mut requirements = Vec::with_capacity(num_activities);
    for activity in 0..num_activities {
        let word = (0..MAX_REQUIREMENT_DRAWS)
            .map(|_| draws.subset(alphabet_size, letters_per_word))
            .find(|w| endowments.iter().any(|e| w.is_subset(e)))
            .ok_or(AlphabetError::InfeasibleWorld {
                activity,
                draws: MAX_REQUIREMENT_DRAWS,
            })?;
        requirements.push(word);
    }
    AlphabetWorld::new((0..alphabet_size).map(letter_name).collect(), endowments, requirements, seed)
}

/// `M_cp = 1` iff the word of `p` is contained in the endowment of `c`,
/// with empty rows and columns pruned.
pub fn world_to_incidence(w: &AlphabetWorld) -> Result<IncidenceMatrix, AlphabetError> {
    let values = Array2::from_shape_fn((w.endowments.len(), w.requirements.len()), |(c, p)| {
        u8::from(w.is_feasible(c, p))
    });
    let m = IncidenceMatrix::new(w.location_labels.clone(), w.activity_labels.clone(), values)?;
    Ok(prune_degenerate(&m)?.0)
}

/// Rank of each location by endowment size, 1 for the largest; ties share
/// the lower rank number.
pub fn endowment_rank_oracle(w: &AlphabetWorld) -> Vec<usize> {
    let sizes: Vec<usize> = w.endowments.iter().map(BTreeSet::len).collect();
    stats::descending_rank(&sizes)
}
