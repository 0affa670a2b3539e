use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::vector::TokenVector;
use crate::num::Real;

const ENGLISH_V1: &str = include_str!("../../data/stopwords_en_v1.txt");

/// A stopword set. The shipped English list is versioned so runs stay comparable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stopwords {
    version: String,
    words: HashSet<String>,
}

impl Stopwords {
    pub fn english() -> &'static Stopwords {
        static LIST: OnceLock<Stopwords> = OnceLock::new();
        LIST.get_or_init(|| Stopwords::parse("en-v1", ENGLISH_V1))
    }

    pub fn none() -> Stopwords {
        Stopwords { version: "none".into(), words: HashSet::new() }
    }

    pub fn from_words<I, S>(version: &str, words: I) -> Stopwords
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stopwords {
            version: version.to_string(),
            words: words.into_iter().map(|w| w.as_ref().trim().to_lowercase()).collect(),
        }
    }

    fn parse(version: &str, text: &str) -> Stopwords {
        Stopwords::from_words(
            version,
            text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercased alphanumeric runs with stopwords removed.
pub fn tokens<'a>(text: &'a str, stopwords: &'a Stopwords) -> impl Iterator<Item = String> + 'a {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(move |t| !stopwords.contains(t))
}

/// Unigram counts after case folding, punctuation stripping, and stopword removal.
pub fn tokenize_bow<F: Real>(text: &str, stopwords: &Stopwords) -> TokenVector<F> {
    let mut counts: BTreeMap<String, F> = BTreeMap::new();
    for tok in tokens(text, stopwords) {
        let c = counts.entry(tok).or_insert_with(F::zero);
        *c = *c + F::one();
    }
    TokenVector::from_entries(counts)
}

/// Smoothed inverse document frequencies fit on a fixed document set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfIdf {
    documents: usize,
    idf: BTreeMap<String, f64>,
}

impl TfIdf {
    /// `idf(t) = ln((1 + N) / (1 + df(t))) + 1` over the given bag-of-words documents.
    pub fn fit<'a, F, I>(documents: I) -> Self
    where
        F: Real,
        I: IntoIterator<Item = &'a TokenVector<F>>,
    {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n = 0usize;
        for doc in documents {
            n += 1;
            for term in doc.entries().keys() {
                *df.entry(term.clone()).or_default() += 1;
            }
        }
        let idf = df
            .into_iter()
            .map(|(t, d)| (t, ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0))
            .collect();
        TfIdf { documents: n, idf }
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.idf.get(term).copied()
    }

    pub fn table(&self) -> &BTreeMap<String, f64> {
        &self.idf
    }

    pub fn documents(&self) -> usize {
        self.documents
    }

    /// Count * idf for terms seen during fitting; unseen terms are dropped.
    pub fn weigh<F: Real>(&self, bow: &TokenVector<F>) -> TokenVector<F> {
        TokenVector::from_entries(
            bow.entries()
                .iter()
                .filter_map(|(t, &c)| self.idf.get(t).map(|&idf| (t.clone(), c * F::of(idf))))
                .collect(),
        )
    }
}
