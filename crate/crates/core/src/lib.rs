pub mod complex_phraser;
pub mod event_matcher;
pub mod merger;
pub mod pattern_compiler;
pub mod phrase_chunker;
pub mod pipeline;
pub mod rulefile;
pub mod scorer;
pub mod template;
pub mod tokenizer;
