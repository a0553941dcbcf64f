//! Multi-currency trade preference dynamics on the world trade network.
//!
//! Bilateral flows are turned into import/export share matrices and trade
//! abilities ([`wtn`]), countries hold a trade currency preference evolved by
//! asynchronous argmax dynamics with frozen seed groups ([`dynamics`]), and
//! seeded ensembles of such runs ([`ensemble`]) feed the reports in
//! [`analysis`].

pub mod analysis;
pub mod centrality;
pub mod commands;
pub mod config;
pub mod country;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod svg;
pub mod synth;
pub mod wtn;

pub use country::CountryIndex;
pub use dynamics::{Currency, CurrencyConfig, Dynamics, TcpState, WeightMode, Weights};
pub use ensemble::{EnsembleResult, EnsembleSpec, InitPolicy};
pub use error::{Error, Result};
pub use wtn::{FlowRecord, FlowStatistics, TradeMatrix};
