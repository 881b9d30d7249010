//! The multilingual keyword table.
//!
//! Every reserved word of the longform notation is a surface form of one of
//! the fourteen `CSM` feature identifiers. A language contributes one
//! canonical keyword per feature (plus optional accepted aliases); the
//! pivot language `csm` uses the identifiers themselves. Shorthand keywords
//! are not localized.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::model::{classify_identifier, CsmId, Identifier, ItemId};

/// Tag of the pivot language whose keywords are the `CSM` ids.
pub const PIVOT_LANG: &str = "csm";

const BUILTIN_CSV: &str = include_str!("../data/lexicon.csv");

const SHORTHAND: [(CsmId, &str); 7] = [
    (CsmId::TYPE_CONSTRUCTOR, "TC"),
    (CsmId::INSTANCE_CONSTRUCTOR, "IC"),
    (CsmId::SUB_CONSTRUCTOR_OF, "SubTC"),
    (CsmId::INSTANCE_OF, "InstOf"),
    (CsmId::PART_OF, "Po"),
    (CsmId::JOIN, "Join"),
    (CsmId::IS_MANDATORY, "IsMand"),
];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("lexicon has no keyword for {id} in `{lang}`")]
    MissingEntry { id: CsmId, lang: String },
    #[error("`{keyword}` is not a keyword in `{lang}`")]
    NotAKeyword { keyword: String, lang: String },
    #[error("keyword `{keyword}` is used twice in `{lang}`")]
    DuplicateKeyword { keyword: String, lang: String },
    #[error("lexicon row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("lexicon header must be `csm_id,wikidata_item,lang,keyword,label`")]
    BadHeader,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyword {
    pub canonical: String,
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct LexiconEntry {
    /// Informational only; several features have no agreed item yet.
    pub wikidata_item: Option<ItemId>,
    pub keywords: BTreeMap<String, Keyword>,
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    languages: Vec<String>,
    entries: BTreeMap<CsmId, LexiconEntry>,
    reverse: HashMap<(String, String), CsmId>,
}

#[derive(Debug, Deserialize)]
struct Row {
    csm_id: String,
    wikidata_item: String,
    lang: String,
    keyword: String,
    label: String,
}

impl Lexicon {
    /// The shipped table: English, Spanish, Basque and the `csm` pivot.
    pub fn builtin() -> Lexicon {
        Lexicon::from_csv(BUILTIN_CSV.as_bytes()).expect("bundled lexicon is well-formed")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let file = std::fs::File::open(path)?;
        Lexicon::from_csv(file)
    }

    pub fn from_csv(reader: impl Read) -> Result<Lexicon, LexiconError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != ["csm_id", "wikidata_item", "lang", "keyword", "label"] {
            return Err(LexiconError::BadHeader);
        }

        let mut languages: Vec<String> = Vec::new();
        let mut entries: BTreeMap<CsmId, LexiconEntry> = BTreeMap::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row_no = i + 2;
            let row = row?;
            let bad = |message: String| LexiconError::BadRow { row: row_no, message };

            let id = match classify_identifier(&row.csm_id) {
                Ok(Identifier::Csm(id)) => id,
                _ => return Err(bad(format!("`{}` is not a CSM id", row.csm_id))),
            };
            let item = parse_wikidata_ref(&row.wikidata_item)
                .map_err(|_| bad(format!("bad wikidata item `{}`", row.wikidata_item)))?;
            if row.lang.is_empty() {
                return Err(bad("empty language tag".into()));
            }
            let mut forms = row.keyword.split('|').map(str::trim);
            let canonical = forms.next().unwrap_or_default().to_string();
            if canonical.is_empty() || canonical.chars().any(char::is_whitespace) {
                return Err(bad(format!("keyword `{}` is not a single token", row.keyword)));
            }
            let aliases: Vec<String> = forms.map(str::to_string).collect();

            if !languages.contains(&row.lang) {
                languages.push(row.lang.clone());
            }
            let entry = entries.entry(id).or_default();
            if entry.wikidata_item.is_none() {
                entry.wikidata_item = item;
            }
            if entry.keywords.contains_key(&row.lang) {
                return Err(bad(format!("second row for {id} in `{}`", row.lang)));
            }
            entry
                .keywords
                .insert(row.lang.clone(), Keyword { canonical, aliases });
            entry.labels.insert(row.lang, row.label);
        }

        let mut reverse = HashMap::new();
        for lang in &languages {
            for id in CsmId::all() {
                let kw = entries
                    .get(&id)
                    .and_then(|e| e.keywords.get(lang))
                    .ok_or_else(|| LexiconError::MissingEntry { id, lang: lang.clone() })?;
                for form in std::iter::once(&kw.canonical).chain(&kw.aliases) {
                    if reverse.insert((lang.clone(), form.clone()), id).is_some() {
                        return Err(LexiconError::DuplicateKeyword {
                            keyword: form.clone(),
                            lang: lang.clone(),
                        });
                    }
                }
            }
        }

        Ok(Lexicon { languages, entries, reverse })
    }

    /// Language tags in file order.
    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn has_language(&self, lang: &str) -> bool {
        self.languages.iter().any(|l| l == lang)
    }

    pub fn entry(&self, id: CsmId) -> Option<&LexiconEntry> {
        self.entries.get(&id)
    }

    /// The canonical surface keyword for a feature in a language.
    pub fn keyword(&self, id: CsmId, lang: &str) -> Result<&str, LexiconError> {
        if !self.has_language(lang) {
            return Err(LexiconError::UnknownLanguage(lang.to_string()));
        }
        self.entries
            .get(&id)
            .and_then(|e| e.keywords.get(lang))
            .map(|k| k.canonical.as_str())
            .ok_or_else(|| LexiconError::MissingEntry { id, lang: lang.to_string() })
    }

    /// The feature a keyword (canonical or alias) stands for.
    pub fn lookup(&self, keyword: &str, lang: &str) -> Result<CsmId, LexiconError> {
        if !self.has_language(lang) {
            return Err(LexiconError::UnknownLanguage(lang.to_string()));
        }
        self.reverse
            .get(&(lang.to_string(), keyword.to_string()))
            .copied()
            .ok_or_else(|| LexiconError::NotAKeyword {
                keyword: keyword.to_string(),
                lang: lang.to_string(),
            })
    }

    /// Maps an accepted alias to its canonical spelling; other tokens are
    /// returned unchanged.
    pub fn canonical_spelling<'a>(&'a self, token: &'a str, lang: &str) -> &'a str {
        match self.lookup(token, lang) {
            Ok(id) => self.keyword(id, lang).unwrap_or(token),
            Err(_) => token,
        }
    }

    pub fn label(&self, id: CsmId, lang: &str) -> Option<&str> {
        self.entries.get(&id)?.labels.get(lang).map(String::as_str)
    }

    /// Languages in which `token` is a keyword.
    pub fn languages_with_keyword(&self, token: &str) -> Vec<&str> {
        self.languages
            .iter()
            .filter(|l| self.reverse.contains_key(&((*l).clone(), token.to_string())))
            .map(String::as_str)
            .collect()
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::builtin()
    }
}

/// The fixed shorthand keyword for a feature, where one exists.
pub fn shorthand_keyword(id: CsmId) -> Option<&'static str> {
    SHORTHAND.iter().find(|(c, _)| *c == id).map(|(_, k)| *k)
}

pub fn shorthand_lookup(token: &str) -> Option<CsmId> {
    SHORTHAND.iter().find(|(_, k)| *k == token).map(|(c, _)| *c)
}

fn parse_wikidata_ref(raw: &str) -> Result<Option<ItemId>, ()> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let raw = raw.strip_prefix("Property:").unwrap_or(raw);
    raw.parse::<ItemId>().map(Some).map_err(|_| ())
}
