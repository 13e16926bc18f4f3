//! Exact-arithmetic arena for adversarial lower bounds in on-line coloring of
//! intervals with bandwidth.
//!
//! A referee ([`engine`]) plays Presenter strategies ([`presenters`]) against
//! pluggable Algorithms ([`algorithms`]). The arithmetic of k-schemas and
//! their first-fit packings lives in [`schema`], strategy synthesis and ratio
//! tables in [`search`], and offline certificates in [`oracle`].

pub mod exactnum;
pub mod model;
pub mod schema;
pub mod engine;
pub mod algorithms;
pub mod oracle;
pub mod presenters;
pub mod search;
