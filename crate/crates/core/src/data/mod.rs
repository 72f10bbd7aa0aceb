//! Dataset ingestion, the synthetic context-shift generator, and the
//! canonical CSV dump.

mod dump;
mod shift;
mod vowel;

pub use dump::{fingerprint, load_dump, parse_dump, write_dump};
pub use shift::{generate_shift, ScenarioOptions, ShiftScenario, COLD, WARM};
pub use vowel::{load_vowel, parse_vowel, vowel_schema, VowelColumns, VowelData, VOWEL_CLASSES};
