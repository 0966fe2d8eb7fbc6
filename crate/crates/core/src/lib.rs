pub mod action;
pub mod cli;
pub mod error;
pub mod generators;
pub mod lang;
pub mod machine;
pub mod network;
pub mod oracle;
pub mod store;
pub mod subword;
pub mod text;
pub mod value;
pub mod verifier;
