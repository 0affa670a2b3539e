//! Text featurization, similarity kernels, and an exact top-k similarity index.

mod embed;
mod index;
mod tokenize;
mod vector;

pub use embed::{
    EmbedRequest, EmbeddingProvider, InternalTfidfProvider, PrecomputedFileProvider, ProviderDescriptor,
    ProviderKind, RemoteConfig, RemoteServiceProvider, SignProjection, EMBED_URL_VAR,
};
pub use index::{build_index, query_topk, Aggregation, Featurizer, Hit, Representation, SimilarityIndex, TextField};
pub(crate) use index::top_k;
pub use tokenize::{tokenize_bow, tokens, Stopwords, TfIdf};
pub use vector::{cosine, EmbeddingVector, TokenVector, Vector};
