//! Construction-aware tooling for Not-Enough-Information (NEI) evaluation
//! data in fact verification.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`construct`] NEI evidence conditions from a [`manifest::Corpus`];
//! 2. [`audit`] their shallow-feature surface;
//! 3. [`validate`] hard candidates with blinded human adjudication;
//! 4. stress-test models with [`probe`] baselines and [`metrics`] over
//!    prediction logs;
//! 5. [`report`] construction-stratified tables and run the release audit.
//!
//! ```
//! use neicap::construct::{construct_variant, ConstructionConfig};
//! use neicap::manifest::{ConstructionFamily, Label};
//! use neicap::synthetic::{synthetic_corpus, SyntheticConfig};
//!
//! let corpus = synthetic_corpus(&SyntheticConfig::default());
//! let records = construct_variant(&corpus, ConstructionFamily::Placeholder, &ConstructionConfig::default()).unwrap();
//! let nei = records.iter().filter(|r| r.label == Label::Nei).count();
//! assert_eq!(nei, 28 + 61);
//! ```

pub mod audit;
pub mod construct;
pub mod manifest;
pub mod metrics;
pub mod probe;
pub mod report;
pub mod retrieval;
pub mod rng;
pub mod synthetic;
pub mod validate;

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $file:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            pub struct $name;
        };
    }
    chapter!(Introduction, "introduction.md");
    chapter!(Manifests, "manifests.md");
    chapter!(Construction, "construction.md");
    chapter!(Audit, "audit.md");
    chapter!(Probes, "probes.md");
    chapter!(Metrics, "metrics.md");
    chapter!(Validation, "validation.md");
    chapter!(Serve, "serve.md");
    chapter!(Release, "release.md");
    chapter!(Cli, "cli.md");
}
