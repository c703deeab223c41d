//! Identifier newtypes and a thread-safe allocator.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident($inner:ty)) => {
        $(#[$meta])*
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub $inner);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

id_type!(
    /// Index of a sentence inside one language's [`crate::corpus::CorpusIndex`].
    SentenceId(u32)
);
id_type!(PairId(u64));
id_type!(RiddleId(u64));
id_type!(PlayerId(u64));
id_type!(AnnotationId(u64));

/// Monotonic id source. Allocation is the only synchronized step of riddle
/// generation, so this is lock-free.
#[derive(Debug)]
pub struct IdSequence(AtomicU64);

impl IdSequence {
    /// A sequence whose first allocation returns `first`.
    pub fn starting_at(first: u64) -> Self {
        IdSequence(AtomicU64::new(first))
    }

    pub fn next(&self) -> u64 {
        self.0.fetch_add(1, Ordering::Relaxed)
    }

    /// Make sure future allocations are strictly greater than `seen`.
    pub fn observe(&self, seen: u64) {
        self.0.fetch_max(seen + 1, Ordering::Relaxed);
    }

    pub fn peek(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

impl Clone for IdSequence {
    fn clone(&self) -> Self {
        IdSequence::starting_at(self.peek())
    }
}

impl PartialEq for IdSequence {
    fn eq(&self, other: &Self) -> bool {
        self.peek() == other.peek()
    }
}

impl Eq for IdSequence {}

impl Default for IdSequence {
    fn default() -> Self {
        IdSequence::starting_at(1)
    }
}
