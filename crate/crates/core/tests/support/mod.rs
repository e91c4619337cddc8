pub mod fixtures;
pub mod http;
pub mod oracle;
pub mod synth;
