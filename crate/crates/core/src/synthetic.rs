//! A small generated biomedical-flavoured corpus for demos and tests.
//!
//! Every claim cites one document of five sentences. SUPPORT and REFUTE
//! documents hold one rationale sentence stating (or contradicting) the
//! claimed relation; NEI documents mention the same entity and outcome
//! without relating them.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::construct::{Fact, MultiHopExample};
use crate::manifest::{ClaimEntry, Corpus, Document, Label, Split};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    /// SUPPORT / REFUTE / NEI claim counts in train.
    pub train: [usize; 3],
    /// SUPPORT / REFUTE / NEI claim counts in test.
    pub test: [usize; 3],
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig { train: [34, 18, 28], test: [76, 40, 61], seed: 13 }
    }
}

const SYLLABLES: [&str; 16] =
    ["ka", "lo", "vir", "zen", "mar", "tu", "bex", "ro", "sil", "dan", "quo", "fel", "nor", "pi", "gra", "hul"];

const OUTCOMES: [&str; 40] = [
    "insulin secretion", "tumor growth", "bone density", "neuronal survival", "lipid uptake",
    "cardiac fibrosis", "platelet aggregation", "renal clearance", "muscle regeneration", "hepatic glycogen",
    "cortisol release", "wound closure", "macrophage activation", "synaptic plasticity", "collagen deposition",
    "vascular leakage", "mitochondrial biogenesis", "retinal degeneration", "airway remodeling", "cartilage erosion",
    "ferritin levels", "thymic output", "sperm motility", "ovarian reserve", "enamel hardness",
    "skin elasticity", "gastric emptying", "biliary flow", "axon myelination", "sleep latency",
    "appetite regulation", "serotonin turnover", "antibody titers", "viral replication", "spore germination",
    "root elongation", "biofilm formation", "plaque stability", "telomere length", "autophagy flux",
];

const CONTEXTS: [&str; 20] = [
    "mice", "rats", "zebrafish", "elderly adults", "adolescents", "primary hepatocytes", "organoids",
    "pregnant women", "smokers", "athletes", "dialysis patients", "piglets", "macaques", "infants",
    "obese volunteers", "cultured myotubes", "yeast strains", "sepsis patients", "transplant recipients",
    "astronauts",
];

const METHODS: [&str; 6] = [
    "Samples were collected from {n} donors and stored at minus eighty degrees.",
    "Tissue sections were stained and scored by two blinded pathologists.",
    "Participants were enrolled over {n} months at three regional clinics.",
    "Sequencing libraries were prepared following standard kit protocols.",
    "Statistical tests were two sided with a significance threshold of five percent.",
    "Animals were housed under a twelve hour light cycle with free access to chow.",
];

const CLOSINGS: [&str; 5] = [
    "Larger prospective studies are warranted.",
    "These observations motivate mechanistic follow up work.",
    "Limitations include modest sample size and short follow up.",
    "Replication across independent cohorts remains necessary.",
    "Funding sources had no role in study design.",
];

fn entity_names(n: usize, seed: u64) -> Vec<String> {
    let mut combos: Vec<(usize, usize, usize)> = (0..SYLLABLES.len())
        .flat_map(|a| (0..SYLLABLES.len()).flat_map(move |b| (1..10).map(move |d| (a, b, d))))
        .filter(|(a, b, _)| a != b)
        .collect();
    combos.shuffle(&mut rng::stream(seed, "entities"));
    assert!(n <= combos.len(), "at most {} synthetic entities", combos.len());
    combos[..n].iter().map(|(a, b, d)| format!("{}{}{d}", SYLLABLES[*a], SYLLABLES[*b])).collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Builds the corpus. Claim ids are `train-NNN` / `test-NNN`; document ids
/// are `doc-NNN`.
pub fn synthetic_corpus(cfg: &SyntheticConfig) -> Corpus {
    let total: usize = cfg.train.iter().chain(&cfg.test).sum();
    let names = entity_names(total, cfg.seed);
    let mut documents = Vec::with_capacity(total);
    let mut claims = Vec::with_capacity(total);
    let mut k = 0;
    for (split, counts) in [(Split::Train, cfg.train), (Split::Test, cfg.test)] {
        let mut labels: Vec<Label> =
            Label::ALL.iter().zip(counts).flat_map(|(l, n)| std::iter::repeat_n(*l, n)).collect();
        labels.shuffle(&mut rng::stream(cfg.seed, &format!("labels-{split}")));
        for (i, label) in labels.into_iter().enumerate() {
            let claim_id = format!("{split}-{i:03}");
            let doc_id = format!("doc-{k:03}");
            let mut r = rng::stream(cfg.seed, &claim_id);
            let entity = &names[k];
            let outcome = OUTCOMES[r.random_range(0..OUTCOMES.len())];
            let context = CONTEXTS[r.random_range(0..CONTEXTS.len())];
            let n = r.random_range(12..90);
            let method = METHODS[r.random_range(0..METHODS.len())].replace("{n}", &n.to_string());
            let closing = CLOSINGS[r.random_range(0..CLOSINGS.len())];
            let upward = r.random_bool(0.5);
            let (claimed, found, opposite) =
                if upward { ("increases", "raised", "lowered") } else { ("reduces", "lowered", "raised") };
            let key = match label {
                Label::Support => format!("Treatment targeting {entity} {found} {outcome} in {context}."),
                Label::Refute => format!("Treatment targeting {entity} {opposite} {outcome} in {context}."),
                Label::Nei => format!("{} was recorded in {context} at baseline.", capitalize(outcome)),
            };
            let sentences = vec![
                format!("{} is expressed in {context}.", capitalize(entity)),
                method,
                key,
                format!("{} differed across sites.", capitalize(outcome)),
                closing.to_string(),
            ];
            documents.push(Document { doc_id: doc_id.clone(), title: Some(format!("{entity} in {context}")), sentences });
            let mut rationale = std::collections::BTreeMap::new();
            if label != Label::Nei {
                rationale.insert(doc_id.clone(), [2u32].into_iter().collect());
            }
            claims.push(ClaimEntry {
                claim_id,
                claim: format!("{} {claimed} {outcome} in {context}.", capitalize(entity)),
                group_id: None,
                cited_doc_ids: vec![doc_id],
                rationale,
                label,
                split: Some(split),
            });
            k += 1;
        }
    }
    Corpus::new(documents, claims).expect("generated corpus is consistent")
}

/// Two-hop claims chaining an entity to an outcome through an intermediate.
pub fn synthetic_multihop(n: usize, seed: u64) -> Vec<MultiHopExample> {
    let names = entity_names(2 * n, seed ^ 0x5eed);
    (0..n)
        .map(|i| {
            let mut r = rng::stream(seed, &format!("hop-{i}"));
            let (a, b) = (&names[2 * i], &names[2 * i + 1]);
            let outcome = OUTCOMES[r.random_range(0..OUTCOMES.len())];
            let id = format!("hop-{i:03}");
            let fact = |k: usize, text: String| Fact { fact_id: format!("{id}-f{k}"), doc_id: None, text };
            MultiHopExample {
                claim_id: id.clone(),
                claim: format!("{} raises {outcome} through {b}.", capitalize(a)),
                group_id: None,
                required: vec![
                    fact(0, format!("{} induces {b} expression.", capitalize(a))),
                    fact(1, format!("{} raises {outcome}.", capitalize(b))),
                ],
                optional: vec![fact(2, format!("{} is widely studied.", capitalize(a)))],
            }
        })
        .collect()
}
