//! Textual syntax for TM documents (`.tm` files).
//!
//! ```text
//! model "sales" {
//!   thimac Casher @2 {
//!     thimac request {
//!       action create: create @6
//!       action release: release
//!     }
//!   }
//!   flow Casher.request.create -> Casher.request.release
//!   event E1 "The cashier requests a new sale." covers { Casher.request.create }
//!   chronology { E1 }
//! }
//! ```
//!
//! Keywords are contextual, so element names may coincide with them
//! (`action create: create`). References are absolute dotted paths.
//!
//! Parse diagnostic codes:
//!
//! | code   | meaning                                        |
//! |--------|------------------------------------------------|
//! | SYN001 | unexpected token                               |
//! | SYN002 | unterminated string                            |
//! | SYN003 | duplicate name among siblings                  |
//! | SYN004 | invalid character or string escape             |
//! | SYN005 | action or store declared outside a thimac      |
//! | SYN006 | duplicate event, chronology or source          |
//! | SYN007 | integer out of range or reversed span          |

mod lexer;
mod parser;
mod printer;

pub use parser::parse;
pub use printer::{behavior as print_behavior, print_canonical};
