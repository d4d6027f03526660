pub mod books;
pub mod config;
pub mod manifest;
pub mod panel;
pub mod scenario;
pub mod series;
pub mod time;
