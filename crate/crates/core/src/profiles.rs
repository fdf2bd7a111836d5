//! Mobility profiles from latent Dirichlet allocation.
//!
//! Each user of a (city, class) slice is one document whose words are the raw
//! subcategories of the venues they checked in at, one token per check-in.
//! Topics are fitted with collapsed Gibbs sampling. Every document draws from
//! its own random stream, derived from the seed and the document id, and
//! documents are swept in id order, so the fit does not depend on the order
//! documents are supplied in.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classify::UserTrack;
use crate::ingest::VenueCatalog;

pub const DEFAULT_TOPICS: usize = 3;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 1000;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("invalid LDA parameters: {0}")]
    InvalidParams(String),
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("corpus vocabulary is empty")]
    EmptyVocabulary,
    #[error("malformed model dump at line {line}: {message}")]
    Dump { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserDocument {
    pub user_id: String,
    /// One subcategory per check-in, repeats kept.
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<UserDocument>,
}

impl Corpus {
    pub fn new(documents: Vec<UserDocument>) -> Self {
        Corpus { documents }
    }

    /// Distinct tokens, sorted.
    pub fn vocabulary(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .documents
            .iter()
            .flat_map(|d| d.tokens.iter().map(String::as_str))
            .collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// One document per track with at least one check-in at a known venue.
pub fn build_corpus(tracks: &[UserTrack], venues: &VenueCatalog) -> Corpus {
    let documents = tracks
        .iter()
        .filter_map(|t| {
            let tokens: Vec<String> = t
                .checkins
                .iter()
                .filter_map(|c| venues.get(&c.venue_id).map(|v| v.subcategory.clone()))
                .collect();
            (!tokens.is_empty()).then(|| UserDocument {
                user_id: t.user_id.clone(),
                tokens,
            })
        })
        .collect();
    Corpus { documents }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaParams {
    /// Defaults for `topics` topics: alpha = 50 / topics, beta = 0.01,
    /// 1000 sweeps, seed 0.
    pub fn with_topics(topics: usize) -> Self {
        LdaParams {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            beta: DEFAULT_BETA,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), ProfileError> {
        if self.topics == 0 {
            return Err(ProfileError::InvalidParams("topic count must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(ProfileError::InvalidParams("iterations must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(ProfileError::InvalidParams("alpha and beta must be positive".into()));
        }
        Ok(())
    }
}

impl Default for LdaParams {
    fn default() -> Self {
        Self::with_topics(DEFAULT_TOPICS)
    }
}

/// Fitted count tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Word index to subcategory label.
    pub vocabulary: Vec<String>,
    /// Document ids in corpus order.
    pub doc_ids: Vec<String>,
    /// `topics x vocabulary` token counts.
    pub topic_word: Vec<Vec<u32>>,
    /// Tokens per topic.
    pub topic_totals: Vec<u64>,
    /// `documents x topics` token counts.
    pub doc_topic: Vec<Vec<u32>>,
}

impl TopicModel {
    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Smoothed `(n_kw + beta) / (n_k + V * beta)`.
    pub fn word_probability(&self, topic: usize, word: usize) -> f64 {
        let v = self.vocabulary.len() as f64;
        (f64::from(self.topic_word[topic][word]) + self.beta) / (self.topic_totals[topic] as f64 + v * self.beta)
    }

    pub fn topic_distribution(&self, topic: usize) -> Vec<f64> {
        (0..self.vocabulary.len())
            .map(|w| self.word_probability(topic, w))
            .collect()
    }

    /// Verifies that the three count tables agree with each other and with
    /// the supplied document lengths.
    pub fn check_counts(&self, doc_lengths: &[usize]) -> Result<(), String> {
        for (d, row) in self.doc_topic.iter().enumerate() {
            let sum: u64 = row.iter().map(|&c| u64::from(c)).sum();
            if sum != doc_lengths[d] as u64 {
                return Err(format!(
                    "document {d}: topic counts sum to {sum}, length {}",
                    doc_lengths[d]
                ));
            }
        }
        for (k, row) in self.topic_word.iter().enumerate() {
            let sum: u64 = row.iter().map(|&c| u64::from(c)).sum();
            let from_docs: u64 = self.doc_topic.iter().map(|r| u64::from(r[k])).sum();
            if sum != self.topic_totals[k] || from_docs != sum {
                return Err(format!(
                    "topic {k}: word counts {sum}, total {}, document counts {from_docs}",
                    self.topic_totals[k]
                ));
            }
        }
        let grand: u64 = self.topic_totals.iter().sum();
        let expected: u64 = doc_lengths.iter().map(|&l| l as u64).sum();
        if grand != expected {
            return Err(format!("{grand} assigned tokens, corpus has {expected}"));
        }
        Ok(())
    }

    /// Writes the flat dump format read back by [`TopicModel::read_dump`].
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let quote = |s: &str| serde_json::to_string(s).expect("strings serialize");
        let join = |row: &[u32]| row.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        writeln!(w, "# lda-model v1")?;
        writeln!(w, "topics {}", self.topics)?;
        writeln!(w, "alpha {}", self.alpha)?;
        writeln!(w, "beta {}", self.beta)?;
        writeln!(w, "vocabulary {}", self.vocabulary.len())?;
        for word in &self.vocabulary {
            writeln!(w, "word {}", quote(word))?;
        }
        writeln!(w, "documents {}", self.doc_ids.len())?;
        for (id, row) in self.doc_ids.iter().zip(&self.doc_topic) {
            writeln!(w, "doc {} {}", quote(id), join(row))?;
        }
        for row in &self.topic_word {
            writeln!(w, "topic {}", join(row))?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(reader: R) -> Result<Self, ProfileError> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| l.map(|l| (i + 1, l)))
            .filter(|r| !matches!(r, Ok((_, l)) if l.starts_with('#') || l.trim().is_empty()));
        let mut next = |want: &str| -> Result<(usize, String), ProfileError> {
            let (line, text) = lines.next().transpose()?.ok_or(ProfileError::Dump {
                line: 0,
                message: format!("unexpected end of dump, expected {want:?}"),
            })?;
            let rest = text
                .strip_prefix(want)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| ProfileError::Dump {
                    line,
                    message: format!("expected {want:?}"),
                })?;
            Ok((line, rest.to_string()))
        };
        fn parse<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, ProfileError> {
            s.trim().parse().map_err(|_| ProfileError::Dump {
                line,
                message: format!("cannot parse {s:?}"),
            })
        }
        fn unquote(line: usize, s: &str) -> Result<(String, String), ProfileError> {
            let mut de = serde_json::Deserializer::from_str(s).into_iter::<String>();
            let value = de.next().and_then(Result::ok).ok_or_else(|| ProfileError::Dump {
                line,
                message: "expected a quoted string".into(),
            })?;
            let rest = s[de.byte_offset()..].trim().to_string();
            Ok((value, rest))
        }
        fn counts(line: usize, s: &str, len: usize) -> Result<Vec<u32>, ProfileError> {
            let row: Vec<u32> = s.split_whitespace().map(|t| parse(line, t)).collect::<Result<_, _>>()?;
            if row.len() != len {
                return Err(ProfileError::Dump {
                    line,
                    message: format!("expected {len} counts, found {}", row.len()),
                });
            }
            Ok(row)
        }

        let (l, t) = next("topics")?;
        let topics: usize = parse(l, &t)?;
        let (l, t) = next("alpha")?;
        let alpha: f64 = parse(l, &t)?;
        let (l, t) = next("beta")?;
        let beta: f64 = parse(l, &t)?;
        let (l, t) = next("vocabulary")?;
        let v: usize = parse(l, &t)?;
        let mut vocabulary = Vec::with_capacity(v);
        for _ in 0..v {
            let (l, t) = next("word")?;
            vocabulary.push(unquote(l, &t)?.0);
        }
        let (l, t) = next("documents")?;
        let d: usize = parse(l, &t)?;
        let mut doc_ids = Vec::with_capacity(d);
        let mut doc_topic = Vec::with_capacity(d);
        for _ in 0..d {
            let (l, t) = next("doc")?;
            let (id, rest) = unquote(l, &t)?;
            doc_ids.push(id);
            doc_topic.push(counts(l, &rest, topics)?);
        }
        let mut topic_word = Vec::with_capacity(topics);
        for _ in 0..topics {
            let (l, t) = next("topic")?;
            topic_word.push(counts(l, &t, v)?);
        }
        let topic_totals = topic_word
            .iter()
            .map(|row| row.iter().map(|&c| u64::from(c)).sum())
            .collect();
        Ok(TopicModel {
            topics,
            alpha,
            beta,
            vocabulary,
            doc_ids,
            topic_word,
            topic_totals,
            doc_topic,
        })
    }
}

fn document_stream(user_id: &str) -> u64 {
    let digest = Sha256::digest(user_id.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Collapsed Gibbs sampler with inspectable state between sweeps.
pub struct GibbsSampler {
    model: TopicModel,
    words: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    rngs: Vec<ChaCha8Rng>,
    sweep_order: Vec<usize>,
    sweeps: usize,
    scratch: Vec<f64>,
}

impl GibbsSampler {
    /// Random initial assignment of every token.
    pub fn new(corpus: &Corpus, params: &LdaParams) -> Result<Self, ProfileError> {
        params.validate()?;
        if corpus.is_empty() {
            return Err(ProfileError::EmptyCorpus);
        }
        let vocabulary = corpus.vocabulary();
        if vocabulary.is_empty() {
            return Err(ProfileError::EmptyVocabulary);
        }
        let tokens = corpus.token_count();
        if params.topics > tokens {
            log::warn!("{} topics for only {tokens} tokens", params.topics);
        }
        let words: Vec<Vec<usize>> = {
            let index: BTreeMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
            corpus
                .documents
                .iter()
                .map(|d| d.tokens.iter().map(|t| index[t.as_str()]).collect())
                .collect()
        };
        let k = params.topics;
        let mut model = TopicModel {
            topics: k,
            alpha: params.alpha,
            beta: params.beta,
            doc_ids: corpus.documents.iter().map(|d| d.user_id.clone()).collect(),
            topic_word: vec![vec![0; vocabulary.len()]; k],
            topic_totals: vec![0; k],
            doc_topic: vec![vec![0; k]; corpus.documents.len()],
            vocabulary,
        };
        let mut rngs: Vec<ChaCha8Rng> = corpus
            .documents
            .iter()
            .map(|d| {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(document_stream(&d.user_id));
                rng
            })
            .collect();
        let mut sweep_order: Vec<usize> = (0..corpus.documents.len()).collect();
        sweep_order.sort_by(|&a, &b| {
            corpus.documents[a]
                .user_id
                .cmp(&corpus.documents[b].user_id)
                .then(a.cmp(&b))
        });

        let mut assignments = vec![Vec::new(); words.len()];
        for &d in &sweep_order {
            let rng = &mut rngs[d];
            assignments[d] = words[d]
                .iter()
                .map(|&w| {
                    let z = rng.random_range(0..k);
                    model.doc_topic[d][z] += 1;
                    model.topic_word[z][w] += 1;
                    model.topic_totals[z] += 1;
                    z
                })
                .collect();
        }
        Ok(GibbsSampler {
            model,
            words,
            assignments,
            rngs,
            sweep_order,
            sweeps: 0,
            scratch: vec![0.0; k],
        })
    }

    /// Resamples every token once.
    pub fn sweep(&mut self) {
        let k = self.model.topics;
        let v_beta = self.model.vocabulary.len() as f64 * self.model.beta;
        let (alpha, beta) = (self.model.alpha, self.model.beta);
        let m = &mut self.model;
        for &d in &self.sweep_order {
            let rng = &mut self.rngs[d];
            for (i, &w) in self.words[d].iter().enumerate() {
                let old = self.assignments[d][i];
                m.doc_topic[d][old] -= 1;
                m.topic_word[old][w] -= 1;
                m.topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(m.doc_topic[d][t]) + alpha) * (f64::from(m.topic_word[t][w]) + beta)
                        / (m.topic_totals[t] as f64 + v_beta);
                    self.scratch[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = self.scratch.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.assignments[d][i] = new;
                m.doc_topic[d][new] += 1;
                m.topic_word[new][w] += 1;
                m.topic_totals[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn model(&self) -> &TopicModel {
        &self.model
    }

    pub fn doc_lengths(&self) -> Vec<usize> {
        self.words.iter().map(Vec::len).collect()
    }

    /// Count invariants of the current state, including agreement with the
    /// per-token assignments.
    pub fn check_counts(&self) -> Result<(), String> {
        self.model.check_counts(&self.doc_lengths())?;
        for (d, zs) in self.assignments.iter().enumerate() {
            let mut row = vec![0u32; self.model.topics];
            for &z in zs {
                row[z] += 1;
            }
            if row != self.model.doc_topic[d] {
                return Err(format!("document {d}: assignments disagree with counts"));
            }
        }
        Ok(())
    }

    pub fn into_model(self) -> TopicModel {
        self.model
    }
}

/// Runs `params.iterations` sweeps and returns the final state.
pub fn fit_lda(corpus: &Corpus, params: &LdaParams) -> Result<TopicModel, ProfileError> {
    let mut sampler = GibbsSampler::new(corpus, params)?;
    for _ in 0..params.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWord {
    pub subcategory: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    /// Per topic, the top subcategories by smoothed probability.
    pub topics: Vec<Vec<TopicWord>>,
}

/// Top-`m` subcategories of every topic; ties go to the smaller label.
pub fn top_subcategories(model: &TopicModel, m: usize) -> Result<ProfileReport, ProfileError> {
    if m == 0 {
        return Err(ProfileError::InvalidParams("report size must be at least 1".into()));
    }
    let topics = (0..model.topics)
        .map(|k| {
            let probs = model.topic_distribution(k);
            let mut order: Vec<usize> = (0..probs.len()).collect();
            order.sort_by(|&a, &b| {
                probs[b]
                    .total_cmp(&probs[a])
                    .then_with(|| model.vocabulary[a].cmp(&model.vocabulary[b]))
            });
            order
                .into_iter()
                .take(m)
                .map(|w| TopicWord {
                    subcategory: model.vocabulary[w].clone(),
                    probability: probs[w],
                })
                .collect()
        })
        .collect();
    Ok(ProfileReport { topics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(user: &str, tokens: &[&str]) -> UserDocument {
        UserDocument {
            user_id: user.into(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn small_corpus() -> Corpus {
        Corpus::new(vec![
            doc("u1", &["Train Station", "Train Station", "Subway"]),
            doc("u2", &["Bar", "Bar", "Japanese Restaurant", "Subway"]),
            doc("u3", &["Arcade", "Train Station"]),
            doc("u4", &["Bar"]),
        ])
    }

    #[test]
    fn rejects_bad_input() {
        let params = LdaParams::with_topics(2);
        assert!(matches!(
            fit_lda(&Corpus::default(), &params),
            Err(ProfileError::EmptyCorpus)
        ));
        let no_tokens = Corpus::new(vec![doc("u", &[])]);
        assert!(matches!(
            fit_lda(&no_tokens, &params),
            Err(ProfileError::EmptyVocabulary)
        ));
        let zero = LdaParams::with_topics(0);
        assert!(matches!(
            fit_lda(&small_corpus(), &zero),
            Err(ProfileError::InvalidParams(_))
        ));
        let model = fit_lda(
            &small_corpus(),
            &LdaParams {
                iterations: 2,
                ..params
            },
        )
        .unwrap();
        assert!(top_subcategories(&model, 0).is_err());
    }

    #[test]
    fn more_topics_than_tokens_still_fits() {
        let c = Corpus::new(vec![doc("u", &["Bar"])]);
        let model = fit_lda(
            &c,
            &LdaParams {
                iterations: 3,
                ..LdaParams::with_topics(4)
            },
        )
        .unwrap();
        model.check_counts(&[1]).unwrap();
    }

    #[test]
    fn default_priors() {
        let p = LdaParams::default();
        assert_eq!((p.topics, p.beta, p.iterations), (3, 0.01, 1000));
        assert!((p.alpha - 50.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn counts_conserved_every_sweep() {
        let mut s = GibbsSampler::new(&small_corpus(), &LdaParams::with_topics(3)).unwrap();
        s.check_counts().unwrap();
        for _ in 0..25 {
            s.sweep();
            s.check_counts().unwrap();
        }
        assert_eq!(s.sweeps(), 25);
    }

    #[test]
    fn single_topic_is_smoothed_frequency() {
        let c = small_corpus();
        let model = fit_lda(
            &c,
            &LdaParams {
                iterations: 5,
                ..LdaParams::with_topics(1)
            },
        )
        .unwrap();
        let n = c.token_count() as f64;
        let v = model.vocabulary_size() as f64;
        for (w, word) in model.vocabulary.iter().enumerate() {
            let count = c
                .documents
                .iter()
                .flat_map(|d| &d.tokens)
                .filter(|t| *t == word)
                .count() as f64;
            let expected = (count + 0.01) / (n + v * 0.01);
            assert!((model.word_probability(0, w) - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn seeded_runs_are_identical_and_seeds_matter() {
        let c = small_corpus();
        let p = LdaParams {
            iterations: 50,
            seed: 7,
            ..LdaParams::with_topics(3)
        };
        assert_eq!(fit_lda(&c, &p).unwrap(), fit_lda(&c, &p).unwrap());
        let q = LdaParams { seed: 8, ..p };
        assert_ne!(fit_lda(&c, &p).unwrap().topic_word, fit_lda(&c, &q).unwrap().topic_word);
    }

    #[test]
    fn document_order_does_not_matter() {
        let c = small_corpus();
        let mut rev = c.clone();
        rev.documents.reverse();
        let p = LdaParams {
            iterations: 30,
            seed: 3,
            ..LdaParams::with_topics(2)
        };
        let a = fit_lda(&c, &p).unwrap();
        let b = fit_lda(&rev, &p).unwrap();
        let by_id = |m: &TopicModel| -> BTreeMap<String, Vec<u32>> {
            m.doc_ids.iter().cloned().zip(m.doc_topic.iter().cloned()).collect()
        };
        assert_eq!(by_id(&a), by_id(&b));
        assert_eq!(a.topic_word, b.topic_word);
    }

    #[test]
    fn report_ranks_and_caps() {
        let c = Corpus::new(vec![doc("u", &["Only"; 4])]);
        let model = fit_lda(
            &c,
            &LdaParams {
                iterations: 2,
                beta: 1e-9,
                ..LdaParams::with_topics(1)
            },
        )
        .unwrap();
        let r = top_subcategories(&model, 5).unwrap();
        assert_eq!(r.topics[0].len(), 1);
        assert_eq!(r.topics[0][0].subcategory, "Only");
        assert!((r.topics[0][0].probability - 1.0).abs() < 1e-9);

        let model = fit_lda(
            &small_corpus(),
            &LdaParams {
                iterations: 10,
                ..LdaParams::with_topics(2)
            },
        )
        .unwrap();
        let r = top_subcategories(&model, 100).unwrap();
        for (k, words) in r.topics.iter().enumerate() {
            assert_eq!(words.len(), model.vocabulary_size());
            assert!(words.windows(2).all(|p| p[0].probability >= p[1].probability));
            assert!(words.iter().all(|w| w.probability > 0.0 && w.probability < 1.0));
            let total: f64 = model.topic_distribution(k).iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dump_round_trip() {
        let c = Corpus::new(vec![
            doc("user \"one\"", &["Café", "Ramen / Noodle House"]),
            doc("u2", &["Bar"]),
        ]);
        let model = fit_lda(
            &c,
            &LdaParams {
                iterations: 5,
                ..LdaParams::with_topics(2)
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        model.write_dump(&mut buf).unwrap();
        let back = TopicModel::read_dump(buf.as_slice()).unwrap();
        assert_eq!(back, model);
        assert!(TopicModel::read_dump("topics 2\nalpha x\n".as_bytes()).is_err());
    }

    #[test]
    fn corpus_from_tracks() {
        use crate::ingest::{Category, CheckIn, Venue};
        let venues: VenueCatalog = [("t", "Train Station"), ("c", "Coffee Shop")]
            .into_iter()
            .map(|(id, sub)| Venue {
                venue_id: id.into(),
                name: id.into(),
                city: "tokyo".into(),
                lat: 0.0,
                lon: 0.0,
                raw_category: String::new(),
                subcategory: sub.into(),
                category: Category::Transport,
            })
            .collect();
        let ts = chrono::DateTime::parse_from_rfc3339("2014-06-02T08:00:00+09:00").unwrap();
        let track = |user: &str, vs: &[&str]| UserTrack {
            user_id: user.into(),
            checkins: vs
                .iter()
                .enumerate()
                .map(|(i, v)| CheckIn {
                    checkin_id: format!("{user}{i}"),
                    user_id: user.into(),
                    venue_id: v.to_string(),
                    timestamp: ts,
                    lat: 0.0,
                    lon: 0.0,
                })
                .collect(),
        };
        assert!(build_corpus(&[], &venues).is_empty());
        let c = build_corpus(&[track("a", &["t", "t", "t"]), track("b", &["c", "t"])], &venues);
        assert_eq!(c.documents[0].tokens, ["Train Station"; 3]);
        assert!(c.documents[1].tokens.contains(&"Train Station".to_string()));
        assert_eq!(c.vocabulary(), ["Coffee Shop", "Train Station"]);
    }
}
