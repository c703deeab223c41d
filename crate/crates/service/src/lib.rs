//! Live game service: accounts, friends and competitions, riddle serving and
//! answer scoring over an append-only event journal, and the HTTP API.

pub mod auth;
pub mod clock;
pub mod config;
pub mod error;
pub mod game;
pub mod http;
pub mod journal;
pub mod state;

pub use clock::{Clock, ManualClock, SystemClock};
pub use config::ServiceConfig;
pub use error::ServiceError;
pub use game::{load_corpora, Game};
pub use journal::{Event, Journal};
pub use state::{GameState, SessionId};
