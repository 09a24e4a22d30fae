//! Synthetic corpora: seeded scene generation and prediction noise.

mod generate;
mod noise;
mod vocab;

pub use generate::{
    generate_corpus, GeneratedCorpus, GeneratedScene, Generator, GeneratorConfig, PanelOracle,
    SceneOracle, PANEL_CLASS_RANK,
};
pub use noise::{
    perturb_corpus, perturb_predictions, Edit, NoiseProfile, NoiseVocab, PerturbationLog,
};
pub use vocab::Vocab;
