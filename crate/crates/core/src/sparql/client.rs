//! Running compiled queries against a SPARQL 1.1 endpoint.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use thiserror::Error;
use url::Url;

use crate::model::{ItemId, ItemKind};
use crate::validate::{CatalogSource, ItemCatalog};

use super::CompileOptions;

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub url: Url,
    pub timeout: Duration,
    /// Rows beyond this are dropped and the result marked truncated.
    pub max_rows: usize,
    pub user_agent: String,
    pub options: CompileOptions,
}

impl EndpointConfig {
    pub fn new(url: Url) -> Self {
        EndpointConfig {
            url,
            timeout: Duration::from_secs(60),
            max_rows: 10_000,
            user_agent: concat!("cosmo/", env!("CARGO_PKG_VERSION")).into(),
            options: CompileOptions::default(),
        }
    }

    pub fn wikidata() -> Self {
        Self::new(Url::parse("https://query.wikidata.org/sparql").expect("valid url"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SparqlValue {
    /// An IRI under the configured entity prefix.
    Item(ItemId),
    Iri(String),
    Literal { value: String, lang: Option<String>, datatype: Option<String> },
}

impl SparqlValue {
    pub fn as_item(&self) -> Option<ItemId> {
        match self {
            SparqlValue::Item(i) => Some(*i),
            _ => None,
        }
    }
}

pub type Row = BTreeMap<String, SparqlValue>;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultSet {
    pub vars: Vec<String>,
    pub rows: Vec<Row>,
    pub truncated: bool,
}

#[derive(Debug, Error)]
pub enum ExecuteError {
    #[error("endpoint did not answer within {0:?}")]
    Timeout(Duration),
    #[error("endpoint answered HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("request failed: {0}")]
    Transport(String),
    #[error("malformed results: {0}")]
    MalformedResults(String),
    #[error("timeout and row limit must be positive")]
    InvalidConfig,
}

pub fn execute(query: &str, cfg: &EndpointConfig) -> Result<ResultSet, ExecuteError> {
    if cfg.timeout.is_zero() || cfg.max_rows == 0 {
        return Err(ExecuteError::InvalidConfig);
    }
    let client = reqwest::blocking::Client::builder()
        .timeout(cfg.timeout)
        .user_agent(cfg.user_agent.clone())
        .build()
        .map_err(|e| ExecuteError::Transport(e.to_string()))?;
    let resp = client
        .post(cfg.url.clone())
        .header(reqwest::header::ACCEPT, "application/sparql-results+json")
        .form(&[("query", query)])
        .send()
        .map_err(|e| classify(e, cfg.timeout))?;
    let status = resp.status();
    let body = resp.text().map_err(|e| classify(e, cfg.timeout))?;
    if !status.is_success() {
        let body: String = body.chars().take(500).collect();
        return Err(ExecuteError::Http { status: status.as_u16(), body });
    }
    parse_results(&body, &cfg.options, cfg.max_rows)
}

fn classify(e: reqwest::Error, timeout: Duration) -> ExecuteError {
    if e.is_timeout() {
        ExecuteError::Timeout(timeout)
    } else {
        ExecuteError::Transport(e.to_string())
    }
}

/// Reads the SPARQL 1.1 JSON results format.
pub fn parse_results(body: &str, opts: &CompileOptions, max_rows: usize) -> Result<ResultSet, ExecuteError> {
    let bad = |m: &str| ExecuteError::MalformedResults(m.to_string());
    let doc: serde_json::Value = serde_json::from_str(body).map_err(|e| ExecuteError::MalformedResults(e.to_string()))?;
    let vars = doc["head"]["vars"]
        .as_array()
        .ok_or_else(|| bad("missing head.vars"))?
        .iter()
        .map(|v| v.as_str().map(String::from).ok_or_else(|| bad("non-string variable name")))
        .collect::<Result<Vec<_>, _>>()?;
    let bindings = doc["results"]["bindings"].as_array().ok_or_else(|| bad("missing results.bindings"))?;
    let mut rows = Vec::new();
    for b in bindings.iter().take(max_rows) {
        let obj = b.as_object().ok_or_else(|| bad("binding is not an object"))?;
        let mut row = Row::new();
        for (name, term) in obj {
            let kind = term["type"].as_str().ok_or_else(|| bad("term without type"))?;
            let value = term["value"].as_str().ok_or_else(|| bad("term without value"))?.to_string();
            let v = match kind {
                "uri" => match value.strip_prefix(&opts.entity_prefix).and_then(|s| s.parse::<ItemId>().ok()) {
                    Some(i) => SparqlValue::Item(i),
                    None => SparqlValue::Iri(value),
                },
                "literal" | "typed-literal" => SparqlValue::Literal {
                    value,
                    lang: term["xml:lang"].as_str().map(String::from),
                    datatype: term["datatype"].as_str().map(String::from),
                },
                "bnode" => SparqlValue::Iri(format!("_:{value}")),
                other => return Err(bad(&format!("unknown term type `{other}`"))),
            };
            row.insert(name.clone(), v);
        }
        rows.push(row);
    }
    Ok(ResultSet { vars, rows, truncated: bindings.len() > max_rows })
}

/// Asks the endpoint which of `items` exist. Z items are not looked up
/// and count as known.
pub fn catalog_from_endpoint(
    items: impl IntoIterator<Item = ItemId>,
    cfg: &EndpointConfig,
) -> Result<ItemCatalog, ExecuteError> {
    let items: BTreeSet<ItemId> = items.into_iter().collect();
    let mut known: Vec<ItemId> = items.iter().copied().filter(|i| i.kind() == ItemKind::ZItem).collect();
    let lookup: Vec<ItemId> = items.iter().copied().filter(|i| i.kind() != ItemKind::ZItem).collect();
    for chunk in lookup.chunks(200) {
        let values: Vec<String> = chunk.iter().map(|i| format!("wd:{i}")).collect();
        let q = format!(
            "PREFIX wd: <{}>\nSELECT DISTINCT ?x WHERE {{ VALUES ?x {{ {} }} ?x ?p ?o . }}\n",
            cfg.options.entity_prefix,
            values.join(" ")
        );
        let res = execute(&q, cfg)?;
        known.extend(res.rows.iter().filter_map(|r| r.get("x")?.as_item()));
    }
    Ok(ItemCatalog::from_items(known, CatalogSource::Endpoint))
}
